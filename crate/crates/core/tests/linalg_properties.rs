mod common;

use num_complex::Complex;
use proptest::prelude::*;
use selgrade_core::linalg::{eigen, expm, solve_linear, Matrix, Vector};

use common::{any_matrix, matrix, vector};

fn max_abs_diff(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            m = m.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    m
}

/// Coefficients `c_0..c_n` of `det(lambda I - M)` by Faddeev-LeVerrier.
fn char_poly(m: &Matrix<f64>) -> Vec<f64> {
    let n = m.rows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        // M_k = M (M_{k-1} + c_{n-k+1} I)
        let shifted = mk.add_scaled(c[n - k + 1], &Matrix::identity(n));
        mk = m * &shifted;
        c[n - k] = -mk.trace() / k as f64;
    }
    c
}

fn scaled_residual(c: &[f64], z: Complex<f64>) -> f64 {
    let mut value = Complex::new(0.0, 0.0);
    let mut scale = 0.0;
    for (k, &ck) in c.iter().enumerate() {
        value += z.powu(k as u32) * ck;
        scale += ck.abs() * z.norm().powi(k as i32);
    }
    value.norm() / scale.max(1.0)
}

fn with_norm_at_most(m: Matrix<f64>, bound: f64) -> Matrix<f64> {
    let n = m.norm1();
    if n > bound {
        m.scale(bound / n)
    } else {
        m
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn propagator_cocycle(m in any_matrix(4, 2.0), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let m = with_norm_at_most(m, 2.0);
        let whole = expm(&m, s + t).unwrap();
        let parts = &expm(&m, s).unwrap() * &expm(&m, t).unwrap();
        let scale = 1.0 + whole.norm1();
        prop_assert!(max_abs_diff(&whole, &parts) <= 1e-10 * scale);
    }

    #[test]
    fn liouville(m in any_matrix(4, 1.0), t in -2.0..2.0f64) {
        let det = expm(&m, t).unwrap().determinant().unwrap();
        let expected = (t * m.trace()).exp();
        prop_assert!((det - expected).abs() <= 1e-8 * expected);
    }

    #[test]
    fn eigenvalues_sum_to_trace(m in any_matrix(4, 3.0)) {
        let s = eigen(&m).unwrap();
        let sum: Complex<f64> = s.eigenvalues.iter().sum();
        prop_assert!((sum.re - m.trace()).abs() <= 1e-8 * (1.0 + m.norm1()));
        prop_assert!(sum.im.abs() <= 1e-8 * (1.0 + m.norm1()));
    }

    #[test]
    fn groups_partition_the_dimension(m in any_matrix(4, 3.0)) {
        let s = eigen(&m).unwrap();
        prop_assert_eq!(s.dim(), m.rows());
        prop_assert_eq!(s.real_part_groups.iter().map(|g| g.1).sum::<usize>(), m.rows());
        prop_assert!(s.real_part_groups.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn eigenvalues_are_characteristic_roots(m in any_matrix(4, 3.0)) {
        let c = char_poly(&m);
        for z in eigen(&m).unwrap().eigenvalues {
            prop_assert!(scaled_residual(&c, z) <= 1e-8, "{z} residual {}", scaled_residual(&c, z));
        }
    }

    #[test]
    fn solve_residual((m, b) in (1..=4usize).prop_flat_map(|n| (matrix(n, 2.0), vector(n, 5.0)))) {
        // keep away from singular matrices
        let m = m.add_scaled(3.0, &Matrix::identity(m.rows()));
        let x = solve_linear(&m, &b).unwrap();
        let r: Vector<f64> = m.mul_vec(&x) - b;
        prop_assert!(r.norm() <= 1e-10 * (1.0 + b.norm()));
    }
}

#[test]
fn repeated_root_companion_matrix() {
    // (x - 1)^2 (x + 2)^2
    let m: Matrix<f64> = Matrix::from_rows(&[
        [0.0, 0.0, 0.0, -4.0],
        [1.0, 0.0, 0.0, 4.0],
        [0.0, 1.0, 0.0, 3.0],
        [0.0, 0.0, 1.0, -2.0],
    ])
    .unwrap();
    let s = eigen(&m).unwrap();
    let groups: Vec<(i64, usize)> = s
        .real_part_groups
        .iter()
        .map(|&(l, k)| ((l * 1e4).round() as i64, k))
        .collect();
    assert_eq!(groups, vec![(-20000, 2), (10000, 2)]);
}
