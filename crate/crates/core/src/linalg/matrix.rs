use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported row/column count.
pub const MAX_DIM: usize = 8;

/// Dense row-major matrix with inline storage for up to `MAX_DIM`×`MAX_DIM` entries.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: [S; MAX_DIM * MAX_DIM],
}

/// Dense vector with inline storage for up to `MAX_DIM` entries.
#[derive(Clone, Copy, PartialEq)]
pub struct Vector<S> {
    len: usize,
    data: [S; MAX_DIM],
}

fn check_dim(what: &str, n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::Dimension(format!(
            "{what} = {n} outside 1..={MAX_DIM}"
        )));
    }
    Ok(())
}

impl<S: Real> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&rows) && (1..=MAX_DIM).contains(&cols),
            "matrix shape {rows}x{cols} outside 1..={MAX_DIM}"
        );
        Self {
            rows,
            cols,
            data: [S::zero(); MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[S]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[S]) -> Result<Self> {
        check_dim("rows", rows)?;
        check_dim("cols", cols)?;
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Dimension("non-finite matrix entry".into()));
        }
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = entries[r * cols + c];
            }
        }
        Ok(m)
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[S]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        check_dim("rows", nrows)?;
        let ncols = rows[0].as_ref().len();
        let mut flat = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        Self::from_row_slice(nrows, ncols, &flat)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * MAX_DIM..r * MAX_DIM + self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn scale(&self, k: S) -> Self {
        let mut m = *self;
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] *= k;
            }
        }
        m
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, k: S, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = *self;
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] += k * other[(r, c)];
            }
        }
        m
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> S {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].abs()).sum::<S>())
            .fold(S::zero(), S::max)
    }

    pub fn norm_frobenius(&self) -> S {
        let mut acc = S::zero();
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += self[(r, c)] * self[(r, c)];
            }
        }
        acc.sqrt()
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_zero(&self) -> bool {
        (0..self.rows).all(|r| self.row(r).iter().all(|x| x.is_zero()))
    }

    pub fn mul_vec(&self, v: &Vector<S>) -> Vector<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        let mut out = Vector::zeros(self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = S::zero();
            for c in 0..self.cols {
                acc += row[c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// Determinant by partial-pivoting elimination.
    pub fn determinant(&self) -> Result<S> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant of {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = *self;
        let mut det = S::one();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].abs().partial_cmp(&a[(j, k)].abs()).unwrap())
                .unwrap();
            if a[(p, k)].is_zero() {
                return Ok(S::zero());
            }
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            det *= a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / a[(k, k)];
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        Ok(det)
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * MAX_DIM + c, b * MAX_DIM + c);
        }
    }

    pub fn cast<T: Real>(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = T::lit(self[(r, c)].as_f64());
            }
        }
        m
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &S {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * MAX_DIM + c]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * MAX_DIM + c]
    }
}

impl<S: Real> Mul for Matrix<S> {
    type Output = Matrix<S>;

    fn mul(self, rhs: Matrix<S>) -> Matrix<S> {
        &self * &rhs
    }
}

impl<S: Real> Mul for &Matrix<S> {
    type Output = Matrix<S>;

    fn mul(self, rhs: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl<S: Real> Add for Matrix<S> {
    type Output = Matrix<S>;

    fn add(self, rhs: Matrix<S>) -> Matrix<S> {
        self.add_scaled(S::one(), &rhs)
    }
}

impl<S: Real> Sub for Matrix<S> {
    type Output = Matrix<S>;

    fn sub(self, rhs: Matrix<S>) -> Matrix<S> {
        self.add_scaled(-S::one(), &rhs)
    }
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|r| &self.data[r * MAX_DIM..r * MAX_DIM + self.cols]))
            .finish()
    }
}

impl<S: Real> Vector<S> {
    pub fn zeros(len: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&len),
            "vector length {len} outside 1..={MAX_DIM}"
        );
        Self {
            len,
            data: [S::zero(); MAX_DIM],
        }
    }

    pub fn from_slice(entries: &[S]) -> Result<Self> {
        check_dim("vector length", entries.len())?;
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Dimension("non-finite vector entry".into()));
        }
        let mut v = Self::zeros(entries.len());
        v.data[..entries.len()].copy_from_slice(entries);
        Ok(v)
    }

    /// Unit vector along `axis`.
    pub fn basis(len: usize, axis: usize) -> Self {
        let mut v = Self::zeros(len);
        v[axis] = S::one();
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[S] {
        &self.data[..self.len]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data[..self.len]
    }

    pub fn to_vec(&self) -> Vec<S> {
        self.as_slice().to_vec()
    }

    pub fn dot(&self, other: &Self) -> S {
        assert_eq!(self.len, other.len);
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> S {
        // hypot-style scaling keeps huge chart coordinates from overflowing
        let scale = self.norm_inf();
        if scale.is_zero() || !scale.is_finite() {
            return scale;
        }
        let acc: S = self
            .as_slice()
            .iter()
            .map(|&x| {
                let y = x / scale;
                y * y
            })
            .sum();
        scale * acc.sqrt()
    }

    pub fn norm_inf(&self) -> S {
        self.as_slice()
            .iter()
            .fold(S::zero(), |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, k: S) -> Self {
        let mut v = *self;
        v.as_mut_slice().iter_mut().for_each(|x| *x *= k);
        v
    }

    /// Returns `(v / |v|, |v|)`.
    pub fn normalized(&self) -> Result<(Self, S)> {
        let n = self.norm();
        if n.is_zero() || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok((self.scale(S::one() / n), n))
    }

    /// Appends one coordinate.
    pub fn extended(&self, last: S) -> Self {
        let mut v = Self::zeros(self.len + 1);
        v.data[..self.len].copy_from_slice(self.as_slice());
        v[self.len] = last;
        v
    }

    /// Drops the last coordinate.
    pub fn truncated(&self) -> Self {
        let mut v = Self::zeros(self.len - 1);
        v.data[..self.len - 1].copy_from_slice(&self.data[..self.len - 1]);
        v
    }

    pub fn cast<T: Real>(&self) -> Vector<T> {
        let mut v = Vector::zeros(self.len);
        for i in 0..self.len {
            v[i] = T::lit(self[i].as_f64());
        }
        v
    }
}

impl<S> Index<usize> for Vector<S> {
    type Output = S;
    #[inline]
    fn index(&self, i: usize) -> &S {
        debug_assert!(i < self.len);
        &self.data[i]
    }
}

impl<S> IndexMut<usize> for Vector<S> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut S {
        debug_assert!(i < self.len);
        &mut self.data[i]
    }
}

impl<S: Real> Add for Vector<S> {
    type Output = Vector<S>;

    fn add(mut self, rhs: Vector<S>) -> Vector<S> {
        assert_eq!(self.len, rhs.len);
        for i in 0..self.len {
            self.data[i] += rhs.data[i];
        }
        self
    }
}

impl<S: Real> Sub for Vector<S> {
    type Output = Vector<S>;

    fn sub(mut self, rhs: Vector<S>) -> Vector<S> {
        assert_eq!(self.len, rhs.len);
        for i in 0..self.len {
            self.data[i] -= rhs.data[i];
        }
        self
    }
}

impl<S: Real> Neg for Vector<S> {
    type Output = Vector<S>;

    fn neg(self) -> Vector<S> {
        self.scale(-S::one())
    }
}

impl<S: fmt::Debug> fmt::Debug for Vector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.data[..self.len]).finish()
    }
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot below `1e-12` in magnitude is reported as [`Error::Singular`].
pub fn solve_linear<S: Real>(m: &Matrix<S>, b: &Vector<S>) -> Result<Vector<S>> {
    if !m.is_square() || m.rows() != b.len() {
        return Err(Error::Dimension(format!(
            "solve {}x{} against vector of length {}",
            m.rows(),
            m.cols(),
            b.len()
        )));
    }
    let mut rhs = Matrix::zeros(b.len(), 1);
    for i in 0..b.len() {
        rhs[(i, 0)] = b[i];
    }
    let x = solve_matrix(m, &rhs)?;
    let mut out = Vector::zeros(b.len());
    for i in 0..b.len() {
        out[i] = x[(i, 0)];
    }
    Ok(out)
}

/// Solves `m X = rhs` for a matrix right-hand side.
pub fn solve_matrix<S: Real>(m: &Matrix<S>, rhs: &Matrix<S>) -> Result<Matrix<S>> {
    if !m.is_square() || m.rows() != rhs.rows() {
        return Err(Error::Dimension(format!(
            "solve {}x{} against {}x{}",
            m.rows(),
            m.cols(),
            rhs.rows(),
            rhs.cols()
        )));
    }
    let n = m.rows();
    let tiny = S::lit(1e-12);
    let mut a = *m;
    let mut x = *rhs;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().partial_cmp(&a[(j, k)].abs()).unwrap())
            .unwrap();
        if !(a[(p, k)].abs() >= tiny) {
            return Err(Error::Singular {
                column: k,
                pivot: a[(p, k)].as_f64(),
            });
        }
        a.swap_rows(p, k);
        x.swap_rows(p, k);
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
            for j in 0..x.cols() {
                let v = x[(k, j)];
                x[(i, j)] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.cols() {
            let mut acc = x[(k, j)];
            for c in k + 1..n {
                acc -= a[(k, c)] * x[(c, j)];
            }
            x[(k, j)] = acc / a[(k, k)];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_identity_returns_rhs() {
        let b = Vector::from_slice(&[1.5, -2.0, 3.0]).unwrap();
        let x = solve_linear(&Matrix::<f64>::identity(3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn solve_diagonal() {
        let m = Matrix::from_diagonal(&[1.0, -1.0]);
        let x = solve_linear(&m, &Vector::from_slice(&[1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(x.as_slice(), &[1.0, -1.0]);
    }

    #[test]
    fn solve_singular_is_error() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let err = solve_linear(&m, &Vector::from_slice(&[1.0, 1.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn solve_needs_pivoting() {
        let m = Matrix::from_rows(&[[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [4.0, -3.0, 8.0]]).unwrap();
        let b = Vector::from_slice(&[1.0, 2.0, 3.0]).unwrap();
        let x = solve_linear(&m, &b).unwrap();
        let r = m.mul_vec(&x) - b;
        assert!(r.norm() <= 1e-10 * (1.0 + b.norm()));
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(matches!(Matrix::from_rows(&rows), Err(Error::Dimension(_))));
    }

    #[test]
    fn determinant_matches_cofactor() {
        let m = Matrix::<f64>::from_rows(&[[2.0, -1.0, 0.5], [1.0, 3.0, 2.0], [0.0, 1.0, 4.0]])
            .unwrap();
        let cof = 2.0 * (3.0 * 4.0 - 2.0 * 1.0) - (-1.0) * (1.0 * 4.0 - 2.0 * 0.0)
            + 0.5 * (1.0 * 1.0 - 3.0 * 0.0);
        assert!((m.determinant().unwrap() - cof).abs() < 1e-12);
    }

    #[test]
    fn single_precision_solve() {
        let m = Matrix::<f32>::from_rows(&[[3.0, 1.0], [1.0, 2.0]]).unwrap();
        let x = solve_linear(&m, &Vector::from_slice(&[9.0, 8.0]).unwrap()).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-5 && (x[1] - 3.0).abs() < 1e-5);
    }
}
