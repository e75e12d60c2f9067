//! Linear operators: the matvec contract used by the Krylov processes, a
//! compressed-row sparse matrix and a dense wrapper.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::C64;

/// Structural tag of an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    General,
    Hermitian,
    SkewHermitian,
}

/// `y = A·x` for a square operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Writes `A·x` into `y`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[C64], y: &mut [C64]);

    /// Writes `A*·x` into `y`.
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]);

    /// An upper estimate of `‖A‖₂`.
    fn norm_estimate(&self) -> f64;

    fn structure(&self) -> Structure {
        Structure::General
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply(x, y)
    }
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply_adjoint(x, y)
    }
    fn norm_estimate(&self) -> f64 {
        (**self).norm_estimate()
    }
    fn structure(&self) -> Structure {
        (**self).structure()
    }
}

/// Applies `op` to `x`, allocating the result.
pub fn apply_new<A: LinearOperator + ?Sized>(op: &A, x: &[C64]) -> Vec<C64> {
    let mut y = vec![C64::new(0.0, 0.0); op.dim()];
    op.apply(x, &mut y);
    y
}

/// Materializes an operator as a dense matrix, one column per unit vector.
pub fn to_dense<A: LinearOperator + ?Sized>(op: &A) -> DMatrix<C64> {
    let n = op.dim();
    let mut out = DMatrix::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        out.column_mut(j).copy_from_slice(&col);
        e[j] = C64::new(0.0, 0.0);
    }
    out
}

/// Square sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
    structure: Structure,
    norm: f64,
}

impl SparseMatrix {
    /// Builds an `n×n` matrix from `(row, col, value)` triplets. Duplicate
    /// entries are summed; explicit zeros are kept.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch { expected: n, found: i.max(j) + 1 });
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Invalid("matrix entries must be finite"));
            }
            sorted.push((i, j, v));
        }
        sorted.sort_by_key(|t| (t.0, t.1));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<C64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = Self { n, row_ptr, col_idx, values, structure: Structure::General, norm: 0.0 };
        m.norm = (m.norm_one() * m.norm_inf()).sqrt();
        Ok(m)
    }

    /// Builds a diagonal matrix.
    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        let triplets: Vec<_> = entries.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(n, &triplets).expect("diagonal entries are in range")
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over the stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, self.col_idx[p], self.values[p]))
        })
    }

    /// Largest absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0f64; self.n];
        for (p, &j) in self.col_idx.iter().enumerate() {
            sums[j] += self.values[p].norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.values[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Replaces the `‖A‖₂` estimate (defaults to `√(‖A‖₁‖A‖_∞)`).
    pub fn with_norm(mut self, norm: f64) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_structure(mut self, structure: Structure) -> Self {
        self.structure = structure;
        self
    }

    /// Returns `s·A`.
    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out.norm = self.norm * s.norm();
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            out[(i, j)] += v;
        }
        out
    }

    /// True when every stored value has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for i in 0..self.n {
            let mut acc = C64::new(0.0, 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            y[i] = acc;
        }
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[p]] += self.values[p].conj() * x[i];
            }
        }
    }

    fn norm_estimate(&self) -> f64 {
        self.norm
    }

    fn structure(&self) -> Structure {
        self.structure
    }
}

/// A dense matrix behind the operator contract.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
    structure: Structure,
    norm: f64,
}

impl DenseOperator {
    /// Wraps a square matrix; the norm is the exact spectral norm.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let norm = crate::dense::two_norm(&matrix);
        Ok(Self { matrix, structure: Structure::General, norm })
    }

    pub fn with_structure(mut self, structure: Structure) -> Self {
        self.structure = structure;
        self
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.matrix[(i, j)] * x[j];
            }
            *yi = acc;
        }
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        for (j, yj) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                acc += self.matrix[(i, j)].conj() * x[i];
            }
            *yj = acc;
        }
    }

    fn norm_estimate(&self) -> f64 {
        self.norm
    }

    fn structure(&self) -> Structure {
        self.structure
    }
}

/// `(A + A*)/2` applied through the operator contract.
pub struct HermitianPart<'a, A: ?Sized>(pub &'a A);

/// `−i(A − A*)/2`, the Hermitian matrix whose eigenvalues are the imaginary
/// parts of the skew-Hermitian part's eigenvalues.
pub struct SkewPartRotated<'a, A: ?Sized>(pub &'a A);

fn combine<A: LinearOperator + ?Sized>(op: &A, x: &[C64], y: &mut [C64], adj_sign: f64, scale: C64) {
    let mut t = vec![C64::new(0.0, 0.0); op.dim()];
    op.apply(x, y);
    op.apply_adjoint(x, &mut t);
    for (yi, ti) in y.iter_mut().zip(&t) {
        *yi = (*yi + *ti * adj_sign) * scale;
    }
}

impl<A: LinearOperator + ?Sized> LinearOperator for HermitianPart<'_, A> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        combine(self.0, x, y, 1.0, C64::new(0.5, 0.0))
    }
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.apply(x, y)
    }
    fn norm_estimate(&self) -> f64 {
        self.0.norm_estimate()
    }
    fn structure(&self) -> Structure {
        Structure::Hermitian
    }
}

impl<A: LinearOperator + ?Sized> LinearOperator for SkewPartRotated<'_, A> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        combine(self.0, x, y, -1.0, C64::new(0.0, -0.5))
    }
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.apply(x, y)
    }
    fn norm_estimate(&self) -> f64 {
        self.0.norm_estimate()
    }
    fn structure(&self) -> Structure {
        Structure::Hermitian
    }
}
