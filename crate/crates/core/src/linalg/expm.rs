//! Matrix exponential by scaling and squaring around a diagonal Padé approximant.

use super::matrix::{solve_matrix, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

const PADE_ORDER: usize = 6;

/// Scaled argument norm at or below which the Padé core is applied directly.
const SCALING_THRESHOLD: f64 = 0.5;

/// Coefficients of the `[m/m]` Padé approximant of `exp`:
/// `c_k = (2m-k)! m! / ((2m)! k! (m-k)!)`.
fn pade_coefficients(m: usize) -> Vec<f64> {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    (0..=m)
        .map(|k| fact(2 * m - k) * fact(m) / (fact(2 * m) * fact(k) * fact(m - k)))
        .collect()
}

/// Computes `exp(t * m)`.
pub fn expm<S: Real>(m: &Matrix<S>, t: S) -> Result<Matrix<S>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "matrix exponential of {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if !t.is_finite() {
        return Err(Error::Dimension("non-finite time".into()));
    }
    let n = m.rows();
    let a = m.scale(t);
    let norm = a.norm1();
    let mut squarings = 0u32;
    let threshold = S::lit(SCALING_THRESHOLD);
    let mut scaled_norm = norm;
    while scaled_norm > threshold {
        scaled_norm = scaled_norm / S::lit(2.0);
        squarings += 1;
    }
    let a = a.scale(S::lit(0.5f64.powi(squarings as i32)));

    let coeffs = pade_coefficients(PADE_ORDER);
    let id = Matrix::<S>::identity(n);
    let mut numer = id.scale(S::lit(coeffs[0]));
    let mut denom = numer;
    let mut power = id;
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        power = &power * &a;
        let c = S::lit(c);
        numer = numer.add_scaled(c, &power);
        denom = if k % 2 == 0 {
            denom.add_scaled(c, &power)
        } else {
            denom.add_scaled(-c, &power)
        };
    }
    let mut r = solve_matrix(&denom, &numer)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn max_abs_diff(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..a.rows() {
            for c in 0..a.cols() {
                d = d.max((a[(r, c)] - b[(r, c)]).abs());
            }
        }
        d
    }

    #[test]
    fn zero_time_is_identity() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [-3.0, 0.5]]).unwrap();
        assert_eq!(expm(&m, 0.0).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn diagonal_case() {
        let m = Matrix::from_diagonal(&[1.0, -1.0]);
        let e = expm(&m, 1.0).unwrap();
        let expected = Matrix::from_diagonal(&[E, 1.0 / E]);
        assert!(max_abs_diff(&e, &expected) <= 1e-12 * E);
    }

    #[test]
    fn nilpotent_closed_form() {
        let m = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let e = expm(&m, 1.0).unwrap();
        let expected = Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(max_abs_diff(&e, &expected) <= 1e-14);
    }

    #[test]
    fn rotation_closed_form_large_argument() {
        // |tM| = 10 exercises several squarings
        let m = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let t = 10.0f64;
        let e = expm(&m, t).unwrap();
        let expected = Matrix::from_rows(&[[t.cos(), -t.sin()], [t.sin(), t.cos()]]).unwrap();
        assert!(max_abs_diff(&e, &expected) <= 1e-12);
    }

    #[test]
    fn scalar_growth_relative_error() {
        let m = Matrix::from_diagonal(&[10.0]);
        let e = expm(&m, 1.0).unwrap();
        assert!(((e[(0, 0)] - 10f64.exp()) / 10f64.exp()).abs() <= 1e-12);
    }

    #[test]
    fn non_square_rejected() {
        let m = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(expm(&m, 1.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn single_precision() {
        let m = Matrix::<f32>::from_diagonal(&[1.0, -1.0]);
        let e = expm(&m, 1.0f32).unwrap();
        assert!((e[(0, 0)] - std::f32::consts::E).abs() < 1e-5);
    }
}
