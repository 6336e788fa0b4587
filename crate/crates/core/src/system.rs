//! Affine control systems `x' = A0 x + a0 + sum_i u_i (A_i x + a_i)`, their
//! bilinear lift one dimension up, and exact flows for piecewise-constant controls.

use crate::error::{Error, Result};
use crate::linalg::{expm, Matrix, Vector};
use crate::scalar::Real;

/// Axis-aligned control range containing the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlBox<S> {
    lower: Vec<S>,
    upper: Vec<S>,
}

impl<S: Real> ControlBox<S> {
    pub fn new(lower: Vec<S>, upper: Vec<S>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension(format!(
                "control box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidSystem(format!(
                    "control axis {i} has non-finite bound"
                )));
            }
            if lo > hi {
                return Err(Error::InvalidSystem(format!(
                    "control axis {i}: lower {lo} above upper {hi}"
                )));
            }
            if lo > S::zero() || hi < S::zero() {
                return Err(Error::InvalidSystem(format!(
                    "control axis {i}: [{lo}, {hi}] does not contain 0"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The box `[-r, r]^m`.
    pub fn symmetric(radii: &[S]) -> Result<Self> {
        Self::new(radii.iter().map(|&r| -r).collect(), radii.to_vec())
    }

    pub fn empty() -> Self {
        Self {
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[S] {
        &self.lower
    }

    pub fn upper(&self) -> &[S] {
        &self.upper
    }

    pub fn is_degenerate(&self, axis: usize) -> bool {
        self.lower[axis] == self.upper[axis]
    }

    pub fn check(&self, u: &[S]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "control of length {} for {} axes",
                u.len(),
                self.dim()
            )));
        }
        for (axis, &v) in u.iter().enumerate() {
            if !(v >= self.lower[axis] && v <= self.upper[axis]) {
                return Err(Error::ControlRange {
                    axis,
                    value: v.as_f64(),
                    lower: self.lower[axis].as_f64(),
                    upper: self.upper[axis].as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Collapses the listed axes to `{0}`.
    pub fn frozen(&self, axes: impl IntoIterator<Item = usize>) -> Self {
        let mut out = self.clone();
        for a in axes {
            out.lower[a] = S::zero();
            out.upper[a] = S::zero();
        }
        out
    }

    /// Tensor grid of per-axis values: `per_axis` evenly spaced points from
    /// lower to upper (so the vertices are included when `per_axis >= 2`)
    /// plus `0`. Degenerate axes contribute one value. Lexicographic order,
    /// first axis slowest.
    pub fn sample_grid(&self, per_axis: usize) -> Vec<Vec<S>> {
        let axes: Vec<Vec<S>> = (0..self.dim())
            .map(|i| {
                let (lo, hi) = (self.lower[i], self.upper[i]);
                let mut vals = vec![S::zero()];
                if lo < hi {
                    match per_axis {
                        0 => {}
                        1 => vals.push(lo),
                        k => {
                            for j in 0..k {
                                let f = S::lit(j as f64 / (k - 1) as f64);
                                vals.push(if j == k - 1 { hi } else { lo + (hi - lo) * f });
                            }
                        }
                    }
                }
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                vals.dedup();
                vals
            })
            .collect();
        let mut out = vec![Vec::new()];
        for vals in &axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    vals.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

/// Partition of the control axes of a split system `x' = A(v) x + B u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMarker {
    /// Axes entering only through `B u` (`A_i = 0`).
    pub inhomogeneous: Vec<usize>,
    /// Axes entering only through `A(v)` (`a_i = 0`).
    pub homogeneous: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineControlSystem<S> {
    dim: usize,
    matrices: Vec<Matrix<S>>,
    offsets: Vec<Vector<S>>,
    omega: ControlBox<S>,
    split: Option<SplitMarker>,
}

impl<S: Real> AffineControlSystem<S> {
    /// `matrices = [A0, A1, .., Am]`, `offsets = [a0, a1, .., am]`.
    pub fn new(
        matrices: Vec<Matrix<S>>,
        offsets: Vec<Vector<S>>,
        omega: ControlBox<S>,
        split: Option<SplitMarker>,
    ) -> Result<Self> {
        let Some(a0) = matrices.first() else {
            return Err(Error::Dimension("at least A0 is required".into()));
        };
        let d = a0.rows();
        if matrices.len() != offsets.len() {
            return Err(Error::Dimension(format!(
                "{} matrices but {} offset vectors",
                matrices.len(),
                offsets.len()
            )));
        }
        if matrices.len() != omega.dim() + 1 {
            return Err(Error::Dimension(format!(
                "{} control matrices for a {}-dimensional control box",
                matrices.len() - 1,
                omega.dim()
            )));
        }
        if d + 1 > crate::linalg::MAX_DIM {
            return Err(Error::Dimension(format!(
                "state dimension {d} too large to lift"
            )));
        }
        for (i, (m, v)) in matrices.iter().zip(&offsets).enumerate() {
            if m.rows() != d || m.cols() != d {
                return Err(Error::Dimension(format!(
                    "A{i} is {}x{}, expected {d}x{d}",
                    m.rows(),
                    m.cols()
                )));
            }
            if v.len() != d {
                return Err(Error::Dimension(format!(
                    "a{i} has length {}, expected {d}",
                    v.len()
                )));
            }
        }
        if let Some(marker) = &split {
            let m = omega.dim();
            let mut seen = vec![false; m];
            for &ax in marker.inhomogeneous.iter().chain(&marker.homogeneous) {
                if ax >= m || seen[ax] {
                    return Err(Error::InvalidSystem(format!(
                        "split marker axis {ax} out of range or repeated"
                    )));
                }
                seen[ax] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidSystem(
                    "split marker does not cover all axes".into(),
                ));
            }
            for &ax in &marker.inhomogeneous {
                if !matrices[ax + 1].is_zero() {
                    return Err(Error::InvalidSystem(format!(
                        "split system: A{} must vanish on inhomogeneous axis",
                        ax + 1
                    )));
                }
            }
            for &ax in &marker.homogeneous {
                if offsets[ax + 1].norm_inf() != S::zero() {
                    return Err(Error::InvalidSystem(format!(
                        "split system: a{} must vanish on homogeneous axis",
                        ax + 1
                    )));
                }
            }
            if offsets[0].norm_inf() != S::zero() {
                return Err(Error::InvalidSystem("split system: a0 must vanish".into()));
            }
        }
        Ok(Self {
            dim: d,
            matrices,
            offsets,
            omega,
            split,
        })
    }

    /// Embeds `x' = [A0 + sum v_j A_j] x + B u` with `u` in `omega_u`, `v`
    /// in `omega_v`; the `u` axes come first.
    pub fn split(
        a0: Matrix<S>,
        homogeneous: Vec<Matrix<S>>,
        b: Matrix<S>,
        omega_u: ControlBox<S>,
        omega_v: ControlBox<S>,
    ) -> Result<Self> {
        let d = a0.rows();
        let m = b.cols();
        if b.rows() != d || omega_u.dim() != m || omega_v.dim() != homogeneous.len() {
            return Err(Error::Dimension(
                "split system blocks are inconsistent".into(),
            ));
        }
        let mut matrices = vec![a0];
        let mut offsets = vec![Vector::zeros(d)];
        for col in 0..m {
            matrices.push(Matrix::zeros(d, d));
            let mut v = Vector::zeros(d);
            for r in 0..d {
                v[r] = b[(r, col)];
            }
            offsets.push(v);
        }
        for a in homogeneous {
            matrices.push(a);
            offsets.push(Vector::zeros(d));
        }
        let mut lower = omega_u.lower().to_vec();
        lower.extend_from_slice(omega_v.lower());
        let mut upper = omega_u.upper().to_vec();
        upper.extend_from_slice(omega_v.upper());
        let p = omega_v.dim();
        let marker = SplitMarker {
            inhomogeneous: (0..m).collect(),
            homogeneous: (m..m + p).collect(),
        };
        Self::new(
            matrices,
            offsets,
            ControlBox::new(lower, upper)?,
            Some(marker),
        )
    }

    /// `x' = A x + a` with no control.
    pub fn autonomous(a: Matrix<S>, offset: Vector<S>) -> Result<Self> {
        Self::new(vec![a], vec![offset], ControlBox::empty(), None)
    }

    pub fn state_dim(&self) -> usize {
        self.dim
    }

    pub fn control_dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn matrices(&self) -> &[Matrix<S>] {
        &self.matrices
    }

    pub fn offsets(&self) -> &[Vector<S>] {
        &self.offsets
    }

    pub fn omega(&self) -> &ControlBox<S> {
        &self.omega
    }

    pub fn split_marker(&self) -> Option<&SplitMarker> {
        self.split.as_ref()
    }

    /// `A(u) = A0 + sum u_i A_i`.
    pub fn matrix_at(&self, u: &[S]) -> Matrix<S> {
        debug_assert_eq!(u.len(), self.control_dim());
        let mut m = self.matrices[0];
        for (&ui, ai) in u.iter().zip(&self.matrices[1..]) {
            if !ui.is_zero() {
                m = m.add_scaled(ui, ai);
            }
        }
        m
    }

    /// `a(u) = a0 + sum u_i a_i`.
    pub fn offset_at(&self, u: &[S]) -> Vector<S> {
        debug_assert_eq!(u.len(), self.control_dim());
        let mut v = self.offsets[0];
        for (&ui, ai) in u.iter().zip(&self.offsets[1..]) {
            if !ui.is_zero() {
                v = v + ai.scale(ui);
            }
        }
        v
    }

    /// Right-hand side `A(u) x + a(u)`.
    pub fn eval_rhs(&self, x: &Vector<S>, u: &[S]) -> Result<Vector<S>> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "state of length {} for dimension {}",
                x.len(),
                self.dim
            )));
        }
        self.omega.check(u)?;
        Ok(self.matrix_at(u).mul_vec(x) + self.offset_at(u))
    }

    pub fn lift(&self) -> LiftedSystem<S> {
        LiftedSystem {
            source: self.clone(),
        }
    }

    /// Axes whose matrix `A_i` is nonzero, i.e. those that act on the linear part.
    pub fn homogeneous_axes(&self) -> Vec<usize> {
        (0..self.control_dim())
            .filter(|&i| !self.matrices[i + 1].is_zero())
            .collect()
    }

    /// The linear part `x' = A(u) x` with controls restricted to the axes that act on it.
    pub fn linear_part(&self) -> HomogeneousSystem<S> {
        let acting = self.homogeneous_axes();
        let frozen = (0..self.control_dim()).filter(|i| !acting.contains(i));
        HomogeneousSystem {
            matrices: self.matrices.clone(),
            omega: self.omega.frozen(frozen),
        }
    }
}

/// Generator family `u -> M(u)` of a bilinear control system on `R^n`.
pub trait BilinearSystem<S: Real>: Sync {
    fn ambient_dim(&self) -> usize;
    fn omega(&self) -> &ControlBox<S>;
    fn generator(&self, u: &[S]) -> Matrix<S>;
    /// Every coefficient, in a fixed order, for content hashing.
    fn fingerprint(&self) -> Vec<f64>;
}

/// Bilinear lift with generator `M(u) = [[A(u), a(u)], [0, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSystem<S> {
    source: AffineControlSystem<S>,
}

impl<S: Real> LiftedSystem<S> {
    pub fn source(&self) -> &AffineControlSystem<S> {
        &self.source
    }
}

impl<S: Real> BilinearSystem<S> for LiftedSystem<S> {
    fn ambient_dim(&self) -> usize {
        self.source.dim + 1
    }

    fn omega(&self) -> &ControlBox<S> {
        &self.source.omega
    }

    fn generator(&self, u: &[S]) -> Matrix<S> {
        let d = self.source.dim;
        let a = self.source.matrix_at(u);
        let b = self.source.offset_at(u);
        let mut m = Matrix::zeros(d + 1, d + 1);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = a[(r, c)];
            }
            m[(r, d)] = b[r];
        }
        m
    }

    fn fingerprint(&self) -> Vec<f64> {
        let mut out = vec![1.0, self.source.dim as f64];
        fingerprint_into(
            &mut out,
            &self.source.matrices,
            Some(&self.source.offsets),
            &self.source.omega,
        );
        out
    }
}

/// Linear system `x' = (A0 + sum u_i A_i) x`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousSystem<S> {
    matrices: Vec<Matrix<S>>,
    omega: ControlBox<S>,
}

impl<S: Real> HomogeneousSystem<S> {
    pub fn new(matrices: Vec<Matrix<S>>, omega: ControlBox<S>) -> Result<Self> {
        let zero = Vector::zeros(matrices.first().map_or(1, |m| m.rows()));
        let offsets = vec![zero; matrices.len()];
        let sys = AffineControlSystem::new(matrices, offsets, omega, None)?;
        Ok(Self {
            matrices: sys.matrices,
            omega: sys.omega,
        })
    }

    pub fn matrices(&self) -> &[Matrix<S>] {
        &self.matrices
    }
}

impl<S: Real> BilinearSystem<S> for HomogeneousSystem<S> {
    fn ambient_dim(&self) -> usize {
        self.matrices[0].rows()
    }

    fn omega(&self) -> &ControlBox<S> {
        &self.omega
    }

    fn generator(&self, u: &[S]) -> Matrix<S> {
        let mut m = self.matrices[0];
        for (&ui, ai) in u.iter().zip(&self.matrices[1..]) {
            if !ui.is_zero() {
                m = m.add_scaled(ui, ai);
            }
        }
        m
    }

    fn fingerprint(&self) -> Vec<f64> {
        let mut out = vec![0.0, self.matrices[0].rows() as f64];
        fingerprint_into(&mut out, &self.matrices, None, &self.omega);
        out
    }
}

fn fingerprint_into<S: Real>(
    out: &mut Vec<f64>,
    matrices: &[Matrix<S>],
    offsets: Option<&[Vector<S>]>,
    omega: &ControlBox<S>,
) {
    for m in matrices {
        for r in 0..m.rows() {
            out.extend(m.row(r).iter().map(|x| x.as_f64()));
        }
    }
    if let Some(offsets) = offsets {
        for v in offsets {
            out.extend(v.as_slice().iter().map(|x| x.as_f64()));
        }
    }
    out.extend(omega.lower().iter().map(|x| x.as_f64()));
    out.extend(omega.upper().iter().map(|x| x.as_f64()));
}

/// Piecewise-constant control: `(duration, value)` pieces applied in order.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal<S> {
    pieces: Vec<(S, Vec<S>)>,
}

impl<S: Real> ControlSignal<S> {
    pub fn new(pieces: Vec<(S, Vec<S>)>, omega: &ControlBox<S>) -> Result<Self> {
        for (dt, u) in &pieces {
            if !(*dt > S::zero()) || !dt.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "piece duration {dt} not positive"
                )));
            }
            omega.check(u)?;
        }
        Ok(Self { pieces })
    }

    pub fn constant(duration: S, u: Vec<S>, omega: &ControlBox<S>) -> Result<Self> {
        Self::new(vec![(duration, u)], omega)
    }

    pub fn pieces(&self) -> &[(S, Vec<S>)] {
        &self.pieces
    }

    pub fn duration(&self) -> S {
        self.pieces.iter().map(|p| p.0).sum()
    }

    /// Applies `f` to every control value.
    pub fn map_values(&self, mut f: impl FnMut(&[S]) -> Vec<S>) -> Self {
        Self {
            pieces: self.pieces.iter().map(|(dt, u)| (*dt, f(u))).collect(),
        }
    }
}

/// Propagator `exp(T M(u))` applied to `z0`; returns the endpoint and
/// `log(|z| / |z0|)`.
pub fn flow_constant<S: Real, B: BilinearSystem<S> + ?Sized>(
    sys: &B,
    z0: &Vector<S>,
    u: &[S],
    t: S,
) -> Result<(Vector<S>, S)> {
    if z0.len() != sys.ambient_dim() {
        return Err(Error::Dimension(format!(
            "initial vector of length {} for ambient dimension {}",
            z0.len(),
            sys.ambient_dim()
        )));
    }
    let n0 = z0.norm();
    if n0.is_zero() {
        return Err(Error::ZeroVector);
    }
    sys.omega().check(u)?;
    let z = expm(&sys.generator(u), t)?.mul_vec(z0);
    Ok((z, (z.norm() / n0).ln()))
}

/// Composition of constant-control flows over the pieces of `sig`.
pub fn flow_signal<S: Real, B: BilinearSystem<S> + ?Sized>(
    sys: &B,
    z0: &Vector<S>,
    sig: &ControlSignal<S>,
) -> Result<(Vector<S>, S)> {
    let mut z = *z0;
    let mut growth = S::zero();
    for (dt, u) in sig.pieces() {
        let (next, g) = flow_constant(sys, &z, u, *dt)?;
        z = next;
        growth += g;
    }
    Ok((z, growth))
}

/// State trajectory endpoint of the affine system from `x0` under `sig`.
pub fn affine_endpoint<S: Real>(
    sys: &AffineControlSystem<S>,
    x0: &Vector<S>,
    sig: &ControlSignal<S>,
) -> Result<Vector<S>> {
    let lifted = sys.lift();
    let (z, _) = flow_signal(&lifted, &x0.extended(S::one()), sig)?;
    Ok(z.truncated())
}

/// `|psi(T, alpha x0, alpha u, v) - alpha psi(T, x0, u, v)|` for a split system.
pub fn scaling_identity_check<S: Real>(
    sys: &AffineControlSystem<S>,
    x0: &Vector<S>,
    sig: &ControlSignal<S>,
    alpha: S,
) -> Result<S> {
    let marker = sys.split_marker().ok_or(Error::NotSplit)?;
    if !(alpha > S::zero() && alpha <= S::one()) {
        return Err(Error::InvalidParams(format!(
            "alpha {alpha} outside (0, 1]"
        )));
    }
    let scaled_sig = sig.map_values(|u| {
        let mut w = u.to_vec();
        for &ax in &marker.inhomogeneous {
            w[ax] *= alpha;
        }
        w
    });
    let lhs = affine_endpoint(sys, &x0.scale(alpha), &scaled_sig)?;
    let rhs = affine_endpoint(sys, x0, sig)?.scale(alpha);
    Ok((lhs - rhs).norm())
}
