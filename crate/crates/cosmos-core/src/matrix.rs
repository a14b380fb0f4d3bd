//! Dense row-major matrix storage and the arithmetic kernels built on it.
//!
//! Everything is a plain loop over contiguous data: no external numerical
//! backend, so results are bit-stable across runs on the same platform.
//! Accumulations always run in ascending index order, which is part of the
//! determinism contract.

use crate::scalar::Scalar;
use crate::{CoreError, Result};
use std::cell::Cell;
use std::fmt;
use std::ops::{Index, IndexMut};

thread_local! {
    // High-water mark of the largest single matrix allocation (in elements)
    // since the last reset. Used by tests that enforce the staged-product
    // memory contract of the subspace tracker.
    static PEAK_ALLOC_ELEMS: Cell<usize> = const { Cell::new(0) };
}

/// Reset the per-thread allocation high-water mark.
pub fn reset_peak_alloc_elems() {
    PEAK_ALLOC_ELEMS.with(|c| c.set(0));
}

/// Largest single matrix allocation (element count) on this thread since the
/// last [`reset_peak_alloc_elems`].
pub fn peak_alloc_elems() -> usize {
    PEAK_ALLOC_ELEMS.with(|c| c.get())
}

fn note_alloc(elems: usize) {
    PEAK_ALLOC_ELEMS.with(|c| c.set(c.get().max(elems)));
}

/// Dense real matrix, row-major, the universal carrier for weights,
/// gradients, and optimizer state.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    fn new_unchecked(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        note_alloc(rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self::new_unchecked(rows, cols, vec![T::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new_unchecked(rows, cols, data)
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(CoreError::Shape(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(CoreError::Shape(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self::new_unchecked(rows, cols, data))
    }

    /// Build from row slices; rows must be non-empty and equally long.
    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(CoreError::Shape("empty row list".into()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(CoreError::Shape("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimension mismatch");
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(m, n);
        for i in 0..m {
            let a_row = &self.data[i * k..(i + 1) * k];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (p, &a) in a_row.iter().enumerate() {
                let b_row = &other.data[p * n..(p + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row.iter()) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ * other` without materializing the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "tr_matmul row mismatch");
        let (k, m, n) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(m, n);
        for p in 0..k {
            let a_row = &self.data[p * m..(p + 1) * m];
            let b_row = &other.data[p * n..(p + 1) * n];
            for (i, &a) in a_row.iter().enumerate() {
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row.iter()) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * otherᵀ` without materializing the transpose.
    pub fn matmul_tr(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "matmul_tr column mismatch");
        let (m, k, n) = (self.rows, self.cols, other.rows);
        let mut out = Self::zeros(m, n);
        for i in 0..m {
            let a_row = &self.data[i * k..(i + 1) * k];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (j, o) in out_row.iter_mut().enumerate() {
                let b_row = &other.data[j * k..(j + 1) * k];
                let mut acc = T::zero();
                for (&a, &b) in a_row.iter().zip(b_row.iter()) {
                    acc += a * b;
                }
                *o = acc;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|a| a * s)
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// `a*self + b*other` elementwise.
    pub fn lincomb(&self, a: T, other: &Self, b: T) -> Self {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let data = self.data.iter().map(|&a| f(a)).collect();
        Self::new_unchecked(self.rows, self.cols, data)
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert!(self.same_shape(other), "elementwise shape mismatch");
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new_unchecked(self.rows, self.cols, data)
    }

    /// Frobenius inner product `<self, other>`.
    pub fn dot(&self, other: &Self) -> T {
        assert!(self.same_shape(other), "dot shape mismatch");
        let mut acc = T::zero();
        for (&a, &b) in self.data.iter().zip(other.data.iter()) {
            acc += a * b;
        }
        acc
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Max-norm distance to the identity, `‖self − I‖_max` (square only).
    pub fn identity_defect(&self) -> T {
        assert_eq!(self.rows, self.cols, "identity_defect needs square input");
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((self.data[i * self.cols + j] - target).abs());
            }
        }
        worst
    }
}

impl<T: Scalar> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Compact debug printing: full contents up to 8x8, shape summary beyond.
impl<T: Scalar> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows <= 8 && self.cols <= 8 {
            writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
            for i in 0..self.rows {
                write!(f, "  ")?;
                for j in 0..self.cols {
                    write!(f, "{:>12.5e} ", self.data[i * self.cols + j])?;
                }
                writeln!(f)?;
            }
            write!(f, "]")
        } else {
            write!(f, "DenseMatrix {}x{}", self.rows, self.cols)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m64(rows: usize, cols: usize, vals: &[f64]) -> DenseMatrix<f64> {
        DenseMatrix::from_vec(rows, cols, vals.to_vec()).unwrap()
    }

    #[test]
    fn matmul_agrees_with_hand_product() {
        let a = m64(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = m64(3, 2, &[7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = a.matmul(&b);
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn staged_transpose_products_match_explicit_transpose() {
        let a = m64(3, 2, &[1.0, -2.0, 0.5, 4.0, -1.0, 3.0]);
        let b = m64(3, 4, &(1..=12).map(|x| x as f64 * 0.3).collect::<Vec<_>>());
        let lhs = a.tr_matmul(&b);
        let rhs = a.transpose().matmul(&b);
        assert_eq!(lhs.data(), rhs.data());

        let c = m64(4, 2, &(1..=8).map(|x| x as f64 - 3.5).collect::<Vec<_>>());
        let lhs = a.matmul_tr(&c.transpose());
        let rhs = a.matmul(&c);
        for (x, y) in lhs.data().iter().zip(rhs.data().iter()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn from_vec_rejects_bad_lengths_and_zero_dims() {
        assert!(DenseMatrix::<f64>::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::<f64>::from_vec(0, 2, vec![]).is_err());
    }

    #[test]
    fn peak_alloc_tracks_largest_allocation() {
        reset_peak_alloc_elems();
        let _a = DenseMatrix::<f64>::zeros(3, 5);
        let _b = DenseMatrix::<f64>::zeros(2, 2);
        assert_eq!(peak_alloc_elems(), 15);
    }

    #[test]
    fn generic_kernels_instantiate_at_f32() {
        let a: DenseMatrix<f32> = DenseMatrix::identity(3);
        let b = a.scale(2.0);
        assert_eq!(b[(1, 1)], 2.0f32);
        assert_eq!(b.matmul(&a).data(), b.data());
    }
}
