//! Invariant lines and planes of a real matrix.

use super::eigen::eigen;
use super::matrix::{solve_linear, Matrix, Vector};
use crate::error::Result;
use crate::scalar::Real;

/// Unit vector spanning (approximately) the kernel of a nearly singular
/// matrix, by shifted inverse iteration.
pub fn kernel_direction<S: Real>(a: &Matrix<S>) -> Option<Vector<S>> {
    let n = a.rows();
    let scale = S::one() + a.norm1();
    let id = Matrix::identity(n);
    for rel in [1e-9, 1e-6, 1e-3] {
        let shifted = a.add_scaled(-S::lit(rel) * scale, &id);
        let mut x = Vector::zeros(n);
        for i in 0..n {
            x[i] = S::one() + S::lit(0.318_309_886 * i as f64);
        }
        let mut ok = true;
        for _ in 0..4 {
            match solve_linear(&shifted, &x).and_then(|y| y.normalized()) {
                Ok((y, _)) => x = y,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && a.mul_vec(&x).norm() <= S::lit(1e-6) * scale {
            return Some(x);
        }
    }
    None
}

/// Unit directions of lines fixed by the flow of `m`: one eigenvector per
/// distinct real eigenvalue, plus `plane_points` directions spread over
/// the invariant plane of every complex pair.
pub fn invariant_directions<S: Real>(m: &Matrix<S>, plane_points: usize) -> Result<Vec<Vector<S>>> {
    let n = m.rows();
    let spectrum = eigen(m)?;
    let id = Matrix::identity(n);
    let close = |x: S, y: S| (x - y).abs() <= S::lit(1e-9) * (S::one() + x.abs());
    let mut out = Vec::new();
    let mut done: Vec<(S, S)> = Vec::new();
    for z in &spectrum.eigenvalues {
        if z.im < S::zero()
            || done
                .iter()
                .any(|&(re, im)| close(re, z.re) && close(im, z.im))
        {
            continue;
        }
        done.push((z.re, z.im));
        let shifted = m.add_scaled(-z.re, &id);
        if z.im.is_zero() {
            out.extend(kernel_direction(&shifted));
            continue;
        }
        // the real plane of a + ib is the kernel of (M - a)^2 + b^2
        let q = (&shifted * &shifted).add_scaled(z.im * z.im, &id);
        let Some(x1) = kernel_direction(&q) else {
            continue;
        };
        let x2 = shifted.mul_vec(&x1).scale(S::one() / z.im);
        for k in 0..plane_points {
            let theta = S::lit(std::f64::consts::PI * k as f64 / plane_points as f64);
            let mut v = x1.scale(theta.cos());
            for i in 0..n {
                v[i] += theta.sin() * x2[i];
            }
            if let Ok((v, _)) = v.normalized() {
                out.push(v);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_invariant_line(m: &Matrix<f64>, v: &Vector<f64>) -> bool {
        let w = m.mul_vec(v);
        let along = w.dot(v);
        (0..v.len()).all(|i| (w[i] - along * v[i]).abs() < 1e-8 * (1.0 + m.norm1()))
    }

    #[test]
    fn real_eigenvectors() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let dirs = invariant_directions(&m, 8).unwrap();
        assert_eq!(dirs.len(), 3);
        for v in &dirs {
            assert!(is_invariant_line(&m, v), "{v:?}");
        }
    }

    #[test]
    fn rotation_plane_points() {
        let m: Matrix<f64> =
            Matrix::from_rows(&[[0.5, -2.0, 0.0], [2.0, 0.5, 0.0], [0.0, 0.0, -1.0]]).unwrap();
        let dirs: Vec<Vector<f64>> = invariant_directions(&m, 6).unwrap();
        assert_eq!(dirs.len(), 7);
        let in_plane = dirs.iter().filter(|v| v[2].abs() < 1e-8).count();
        assert_eq!(in_plane, 6);
        // the plane points are pairwise distinct lines
        for i in 0..6 {
            for j in 0..i {
                assert!(dirs[i].dot(&dirs[j]).abs() < 1.0 - 1e-3);
            }
        }
    }

    #[test]
    fn zero_matrix_gives_some_direction() {
        let dirs = invariant_directions(&Matrix::<f64>::zeros(2, 2), 4).unwrap();
        assert_eq!(dirs.len(), 1);
    }
}
