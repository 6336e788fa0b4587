//! Small dense real linear algebra.

mod eigen;
mod expm;
mod invariant;
mod matrix;

pub use eigen::{eigen, eigen_with_tolerance, Spectrum, TOL_EIG};
pub use expm::expm;
pub use invariant::{invariant_directions, kernel_direction};
pub use matrix::{solve_linear, solve_matrix, Matrix, Vector, MAX_DIM};
