#![allow(dead_code)]

use proptest::prelude::*;
use selgrade_core::linalg::{Matrix, Vector};
use selgrade_core::system::{AffineControlSystem, ControlBox, ControlSignal};

pub fn matrix(n: usize, r: f64) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-r..r, n * n).prop_map(move |e| Matrix::from_row_slice(n, n, &e).unwrap())
}

pub fn any_matrix(max_n: usize, r: f64) -> impl Strategy<Value = Matrix<f64>> {
    (1..=max_n).prop_flat_map(move |n| matrix(n, r))
}

pub fn vector(n: usize, r: f64) -> impl Strategy<Value = Vector<f64>> {
    prop::collection::vec(-r..r, n).prop_map(|e| Vector::from_slice(&e).unwrap())
}

pub fn nonzero_vector(n: usize) -> impl Strategy<Value = Vector<f64>> {
    vector(n, 1.0).prop_filter("nonzero", |v| v.norm() > 1e-3)
}

/// `x' = A0 x + sum_j v_j A_j x + B u` with `u` first.
pub fn split_system(d: usize) -> impl Strategy<Value = AffineControlSystem<f64>> {
    (1..=2usize, 0..=1usize).prop_flat_map(move |(m, p)| {
        (
            matrix(d, 1.0),
            prop::collection::vec(matrix(d, 0.5), p),
            prop::collection::vec(-1.0..1.0f64, d * m),
            prop::collection::vec(0.1..1.5f64, m),
            prop::collection::vec(0.1..1.0f64, p),
        )
            .prop_map(move |(a0, hom, b, ru, rv)| {
                AffineControlSystem::split(
                    a0,
                    hom,
                    Matrix::from_row_slice(d, m, &b).unwrap(),
                    ControlBox::symmetric(&ru).unwrap(),
                    ControlBox::symmetric(&rv).unwrap(),
                )
                .unwrap()
            })
    })
}

/// General affine system with `m` controls on the unit box.
pub fn affine_system(d: usize, m: usize) -> impl Strategy<Value = AffineControlSystem<f64>> {
    (
        prop::collection::vec(matrix(d, 1.0), m + 1),
        prop::collection::vec(vector(d, 1.0), m + 1),
    )
        .prop_map(move |(mats, offs)| {
            AffineControlSystem::new(
                mats,
                offs,
                ControlBox::symmetric(&vec![1.0; m]).unwrap(),
                None,
            )
            .unwrap()
        })
}

/// Piecewise-constant signal with up to 3 pieces inside `omega`.
pub fn signal(omega: &ControlBox<f64>) -> impl Strategy<Value = ControlSignal<f64>> {
    let lo = omega.lower().to_vec();
    let hi = omega.upper().to_vec();
    let omega = omega.clone();
    prop::collection::vec(
        (0.05..1.0f64, prop::collection::vec(0.0..=1.0f64, lo.len())),
        1..=3,
    )
    .prop_map(move |pieces| {
        let pieces = pieces
            .into_iter()
            .map(|(dt, f)| {
                let u = f
                    .iter()
                    .zip(lo.iter().zip(&hi))
                    .map(|(t, (a, b))| a + t * (b - a))
                    .collect();
                (dt, u)
            })
            .collect();
        ControlSignal::new(pieces, &omega).unwrap()
    })
}

fn scalar_input(a0: [[f64; 2]; 2], b: [f64; 2]) -> AffineControlSystem<f64> {
    AffineControlSystem::split(
        Matrix::from_rows(&a0).unwrap(),
        vec![],
        Matrix::from_rows(&[[b[0]], [b[1]]]).unwrap(),
        ControlBox::symmetric(&[1.0]).unwrap(),
        ControlBox::empty(),
    )
    .unwrap()
}

/// Saddle `diag(1, -1)` with input `(1, 1) u`.
pub fn saddle() -> AffineControlSystem<f64> {
    scalar_input([[1.0, 0.0], [0.0, -1.0]], [1.0, 1.0])
}

/// `diag(0, 1)` with input `(1, 1) u`.
pub fn nonhyperbolic() -> AffineControlSystem<f64> {
    scalar_input([[0.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
}

/// Double integrator with input on the first coordinate.
pub fn double_integrator() -> AffineControlSystem<f64> {
    scalar_input([[0.0, 1.0], [0.0, 0.0]], [1.0, 0.0])
}
