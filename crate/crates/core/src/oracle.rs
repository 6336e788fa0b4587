//! Exact references for autonomous and constant-control systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigen, solve_linear, Matrix, Vector, TOL_EIG};
use crate::projective::{h1, ProjectivePoint};
use crate::scalar::Real;
use crate::system::AffineControlSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovLevel<S> {
    pub lambda: S,
    pub dimension: usize,
}

/// Lyapunov spaces of `x' = Ax`: sums of generalized real eigenspaces with
/// a common real part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LyapunovDecomposition<S> {
    /// Ascending in `lambda`.
    pub levels: Vec<LyapunovLevel<S>>,
    pub has_central: bool,
    /// Number of levels with `lambda < 0`.
    pub stable_levels: usize,
    /// Dimension of the level at zero, if any.
    pub central_dimension: usize,
    /// Number of levels with `lambda > 0`.
    pub unstable_levels: usize,
}

impl<S: Real> LyapunovDecomposition<S> {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn dimension(&self) -> usize {
        self.levels.iter().map(|l| l.dimension).sum()
    }

    pub fn is_hyperbolic(&self) -> bool {
        !self.has_central
    }
}

pub fn lyapunov_decomposition<S: Real>(a: &Matrix<S>) -> Result<LyapunovDecomposition<S>> {
    let spectrum = eigen(a)?;
    let tol = S::lit(TOL_EIG);
    let levels: Vec<LyapunovLevel<S>> = spectrum
        .real_part_groups
        .iter()
        .map(|&(lambda, dimension)| LyapunovLevel { lambda, dimension })
        .collect();
    let central_dimension = levels
        .iter()
        .filter(|l| l.lambda.abs() <= tol)
        .map(|l| l.dimension)
        .sum();
    Ok(LyapunovDecomposition {
        has_central: central_dimension > 0,
        stable_levels: levels.iter().filter(|l| l.lambda < -tol).count(),
        unstable_levels: levels.iter().filter(|l| l.lambda > tol).count(),
        central_dimension,
        levels,
    })
}

/// `1 + dim L(0)`: the fiber dimension of the central bundle of the lift.
pub fn lifted_central_dimension<S: Real>(a: &Matrix<S>) -> Result<usize> {
    Ok(1 + lyapunov_decomposition(a)?.central_dimension)
}

/// The equilibrium `-A(u)^-1 a(u)` under the constant control `u`; the
/// unique bounded solution when `A(u)` is hyperbolic.
pub fn bounded_solution_constant<S: Real>(
    sys: &AffineControlSystem<S>,
    u: &[S],
) -> Result<Vector<S>> {
    sys.omega().check(u)?;
    let a = sys.matrix_at(u);
    let spectrum = eigen(&a)?;
    let closest = spectrum.min_abs_real_part();
    if closest <= S::lit(TOL_EIG) {
        return Err(Error::Nonhyperbolic {
            real_part: closest.as_f64(),
        });
    }
    let rhs = sys.offset_at(u).scale(-S::one());
    solve_linear(&a, &rhs)
}

/// Fiber of the central line bundle of the lift over the constant control
/// `u`: the direction of `(e(u), 1)`.
pub fn hyperbolic_central_line_point<S: Real>(
    sys: &AffineControlSystem<S>,
    u: &[S],
) -> Result<ProjectivePoint<S>> {
    Ok(h1(&bounded_solution_constant(sys, u)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::ControlBox;

    fn saddle() -> AffineControlSystem<f64> {
        AffineControlSystem::split(
            Matrix::from_diagonal(&[1.0, -1.0]),
            vec![],
            Matrix::from_rows(&[[1.0], [1.0]]).unwrap(),
            ControlBox::symmetric(&[1.0]).unwrap(),
            ControlBox::empty(),
        )
        .unwrap()
    }

    fn levels(a: &Matrix<f64>) -> Vec<(f64, usize)> {
        lyapunov_decomposition(a)
            .unwrap()
            .levels
            .iter()
            .map(|l| ((l.lambda * 1e9).round() / 1e9, l.dimension))
            .collect()
    }

    #[test]
    fn example_levels() {
        assert_eq!(
            levels(&Matrix::from_diagonal(&[1.0, -1.0])),
            vec![(-1.0, 1), (1.0, 1)]
        );
        let d = lyapunov_decomposition(&Matrix::from_diagonal(&[1.0, -1.0])).unwrap();
        assert_eq!(
            (d.stable_levels, d.central_dimension, d.unstable_levels),
            (1, 0, 1)
        );
        assert_eq!(
            levels(&Matrix::from_diagonal(&[0.0, 1.0])),
            vec![(0.0, 1), (1.0, 1)]
        );
        let nil = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(levels(&nil), vec![(0.0, 2)]);
    }

    #[test]
    fn lifted_dimensions() {
        assert_eq!(
            lifted_central_dimension(&Matrix::from_diagonal(&[1.0, -1.0])).unwrap(),
            1
        );
        assert_eq!(
            lifted_central_dimension(&Matrix::from_diagonal(&[0.0, 1.0])).unwrap(),
            2
        );
        let nil = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(lifted_central_dimension(&nil).unwrap(), 3);
    }

    #[test]
    fn equilibria() {
        let sys = saddle();
        let x = bounded_solution_constant(&sys, &[1.0]).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        let pole = hyperbolic_central_line_point(&sys, &[0.0]).unwrap();
        assert_eq!(pole.rep().to_vec(), vec![0.0, 0.0, 1.0]);
        assert!(matches!(
            bounded_solution_constant(&sys, &[2.0]),
            Err(Error::ControlRange { .. })
        ));
        let flat =
            AffineControlSystem::autonomous(Matrix::from_diagonal(&[0.0, 1.0]), Vector::zeros(2))
                .unwrap();
        assert!(matches!(
            bounded_solution_constant(&flat, &[]),
            Err(Error::Nonhyperbolic { .. })
        ));
    }
}
