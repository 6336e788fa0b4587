//! Eigenvalues of small real matrices: balancing, Hessenberg reduction by
//! stabilized elimination, then the Francis double-shift QR iteration.

use num_complex::Complex;

use super::matrix::{Matrix, MAX_DIM};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Real parts closer than this are treated as the same Lyapunov level.
pub const TOL_EIG: f64 = 1e-6;

/// Per-eigenvalue iteration budget of the QR sweep.
const MAX_ITERATIONS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<S> {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex<S>>,
    /// `(real part, algebraic multiplicity)`, ascending.
    pub real_part_groups: Vec<(S, usize)>,
}

impl<S: Real> Spectrum<S> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest |real part| closest to zero, i.e. `min |Re λ|`.
    pub fn min_abs_real_part(&self) -> S {
        self.eigenvalues
            .iter()
            .map(|z| z.re.abs())
            .fold(S::infinity(), S::min)
    }
}

/// Eigenvalues of `m` grouped by real part with [`TOL_EIG`].
pub fn eigen<S: Real>(m: &Matrix<S>) -> Result<Spectrum<S>> {
    eigen_with_tolerance(m, S::lit(TOL_EIG))
}

pub fn eigen_with_tolerance<S: Real>(m: &Matrix<S>, tol: S) -> Result<Spectrum<S>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues of {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    // 1-based working copy keeps the sweep close to the textbook indexing
    let mut a = [[S::zero(); MAX_DIM + 1]; MAX_DIM + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = m[(i, j)];
        }
    }
    balance(&mut a, n);
    hessenberg(&mut a, n);
    let mut eigenvalues = hqr(&mut a, n)?;
    eigenvalues.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    let real_part_groups = group_real_parts(&eigenvalues, tol);
    Ok(Spectrum {
        eigenvalues,
        real_part_groups,
    })
}

/// Single-linkage grouping of sorted real parts; each group reports its mean.
fn group_real_parts<S: Real>(sorted: &[Complex<S>], tol: S) -> Vec<(S, usize)> {
    let mut groups: Vec<(S, usize, S)> = Vec::new();
    for z in sorted {
        match groups.last_mut() {
            Some((sum, count, last)) if z.re - *last <= tol => {
                *sum += z.re;
                *count += 1;
                *last = z.re;
            }
            _ => groups.push((z.re, 1, z.re)),
        }
    }
    groups
        .into_iter()
        .map(|(sum, count, _)| (sum / S::lit(count as f64), count))
        .collect()
}

type Work<S> = [[S; MAX_DIM + 1]; MAX_DIM + 1];

fn balance<S: Real>(a: &mut Work<S>, n: usize) {
    let radix = S::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut c = S::zero();
            let mut r = S::zero();
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c.is_zero() || r.is_zero() {
                continue;
            }
            let s = c + r;
            let mut f = S::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < S::lit(0.95) * s {
                done = false;
                let g = S::one() / f;
                for j in 1..=n {
                    a[i][j] *= g;
                }
                for j in 1..=n {
                    a[j][i] *= f;
                }
            }
        }
    }
}

fn hessenberg<S: Real>(a: &mut Work<S>, n: usize) {
    for m in 2..n {
        let mut x = S::zero();
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().take(n + 1).skip(1) {
                row.swap(i, m);
            }
        }
        if !x.is_zero() {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if !y.is_zero() {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        let v = a[m][j];
                        a[i][j] -= y * v;
                    }
                    for j in 1..=n {
                        let v = a[j][i];
                        a[j][m] += y * v;
                    }
                }
            }
        }
    }
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            a[i][j] = S::zero();
        }
    }
}

fn sign<S: Real>(a: S, b: S) -> S {
    if b >= S::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

fn hqr<S: Real>(a: &mut Work<S>, n: usize) -> Result<Vec<Complex<S>>> {
    let mut wr = [S::zero(); MAX_DIM + 1];
    let mut wi = [S::zero(); MAX_DIM + 1];
    let mut anorm = S::zero();
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = S::zero();
    let (mut p, mut q, mut r);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0usize;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s.is_zero() {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = S::zero();
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = S::zero();
                nn -= 1;
            } else {
                y = a[nn - 1][nn - 1];
                w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    p = S::lit(0.5) * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= S::zero() {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if !z.is_zero() {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = S::zero();
                        wi[nn] = S::zero();
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn = nn.saturating_sub(2);
                } else {
                    if its == MAX_ITERATIONS {
                        let partial = ((nn + 1)..=n)
                            .map(|k| (wr[k].as_f64(), wi[k].as_f64()))
                            .collect::<Vec<_>>();
                        return Err(Error::NoConvergence {
                            iterations: its,
                            dim: n,
                            found: partial.len(),
                            partial,
                        });
                    }
                    if its == 10 || its == 20 || its == 40 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = S::lit(0.75) * s;
                        y = x;
                        w = S::lit(-0.4375) * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = S::zero();
                        if i != m + 2 {
                            a[i][i - 3] = S::zero();
                        }
                    }
                    let mut k = m;
                    while k + 1 <= nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = S::zero();
                            if k != nn - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if !x.is_zero() {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if !s.is_zero() {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nn - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|k| Complex::new(wr[k], wi[k])).collect())
}
