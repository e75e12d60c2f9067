//! Arnoldi and Lanczos reductions and the projected exponential.
//!
//! A [`KrylovDecomposition`] grows one step at a time and keeps the whole
//! basis, so any prefix `k` can be inspected through a [`KrylovView`]. The
//! approximation of `e^{-τA}v` (or `e^{iτH}v`) from the first `k` vectors is
//! `‖v‖·V_k·f(H_k)·e₁`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Schur};
#[allow(unused_imports)]
use num_traits::Float;

use crate::dense::dense_expm;
use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Structure};
use crate::C64;

/// Relative size of `h_{k+1,k}` (against `‖A‖`) below which the Krylov space
/// is declared invariant.
pub const BREAKDOWN_TOL: f64 = 1e-14;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    Arnoldi,
    Lanczos,
}

/// Which exponential the reduced matrix feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    /// `e^{-tH_k}`: approximates `e^{-tA}v`.
    Decay,
    /// `e^{itT_k}`: approximates `e^{itH}v` for Hermitian `H`; Lanczos only.
    Unitary,
}

fn dot(u: &[C64], w: &[C64]) -> C64 {
    u.iter().zip(w).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis `V`, reduced matrix `H` (Hessenberg, or tridiagonal
/// for Lanczos) and the trailing coefficient `h_{k+1,k}`.
#[derive(Debug, Clone)]
pub struct KrylovDecomposition {
    process: Process,
    n: usize,
    basis: Vec<Vec<C64>>,
    // Column j of H holds rows 0..=j+1; the last entry is h_{j+1,j}.
    columns: Vec<Vec<C64>>,
    start_norm: f64,
    norm_a: f64,
    breakdown: bool,
}

impl KrylovDecomposition {
    /// Normalizes `v` and prepares a reduction with no steps taken.
    pub fn start<A: LinearOperator + ?Sized>(op: &A, v: &[C64], process: Process) -> Result<Self> {
        let n = op.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        if process == Process::Lanczos && op.structure() != Structure::Hermitian {
            return Err(Error::ModeMismatch);
        }
        let start_norm = norm2(v);
        if !(start_norm > 0.0) || !start_norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let v1: Vec<C64> = v.iter().map(|x| x / start_norm).collect();
        Ok(Self {
            process,
            n,
            basis: vec![v1],
            columns: Vec::new(),
            start_norm,
            norm_a: op.norm_estimate(),
            breakdown: false,
        })
    }

    /// Takes one more step. Returns `false` (and does nothing) once the
    /// space is invariant.
    pub fn step<A: LinearOperator + ?Sized>(&mut self, op: &A) -> Result<bool> {
        if op.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: op.dim() });
        }
        if self.breakdown {
            return Ok(false);
        }
        let j = self.columns.len();
        let mut w = vec![ZERO; self.n];
        op.apply(&self.basis[j], &mut w);
        let mut h = vec![ZERO; j + 2];
        match self.process {
            Process::Arnoldi => {
                for _pass in 0..2 {
                    for (i, vi) in self.basis.iter().enumerate() {
                        let c = dot(vi, &w);
                        axpy(-c, vi, &mut w);
                        h[i] += c;
                    }
                }
            }
            Process::Lanczos => {
                if j > 0 {
                    let beta = self.columns[j - 1][j];
                    axpy(-beta, &self.basis[j - 1], &mut w);
                    h[j - 1] = beta;
                }
                let alpha = dot(&self.basis[j], &w).re;
                axpy(C64::new(-alpha, 0.0), &self.basis[j], &mut w);
                h[j] = C64::new(alpha, 0.0);
                for vi in &self.basis {
                    let c = dot(vi, &w);
                    axpy(-c, vi, &mut w);
                }
            }
        }
        let beta = norm2(&w);
        if !beta.is_finite() || h.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
            return Err(Error::Overflow);
        }
        if beta <= BREAKDOWN_TOL * self.norm_a || j + 1 == self.n {
            self.breakdown = true;
            h[j + 1] = ZERO;
            self.columns.push(h);
            return Ok(true);
        }
        h[j + 1] = C64::new(beta, 0.0);
        self.columns.push(h);
        w.iter_mut().for_each(|x| *x /= beta);
        self.basis.push(w);
        Ok(true)
    }

    /// Steps until `k_max` steps exist or the space becomes invariant.
    pub fn extend<A: LinearOperator + ?Sized>(&mut self, op: &A, k_max: usize) -> Result<()> {
        while self.steps() < k_max.min(self.n) && self.step(op)? {}
        Ok(())
    }

    pub fn process(&self) -> Process {
        self.process
    }

    pub fn steps(&self) -> usize {
        self.columns.len()
    }

    pub fn breakdown(&self) -> bool {
        self.breakdown
    }

    pub fn start_norm(&self) -> f64 {
        self.start_norm
    }

    /// The `‖A‖` estimate the breakdown test used.
    pub fn norm_estimate(&self) -> f64 {
        self.norm_a
    }

    /// The first `k` steps.
    pub fn view(&self, k: usize) -> Result<KrylovView<'_>> {
        if k == 0 || k > self.steps() {
            return Err(Error::DimensionMismatch { expected: self.steps(), found: k });
        }
        Ok(KrylovView { dec: self, k })
    }

    /// All steps taken so far.
    pub fn full(&self) -> Result<KrylovView<'_>> {
        self.view(self.steps())
    }
}

/// Runs up to `k_max` Arnoldi steps.
pub fn arnoldi<A: LinearOperator + ?Sized>(op: &A, v: &[C64], k_max: usize) -> Result<KrylovDecomposition> {
    let mut dec = KrylovDecomposition::start(op, v, Process::Arnoldi)?;
    dec.extend(op, k_max)?;
    Ok(dec)
}

/// Runs up to `k_max` Lanczos steps on a Hermitian operator.
pub fn lanczos<A: LinearOperator + ?Sized>(op: &A, v: &[C64], k_max: usize) -> Result<KrylovDecomposition> {
    let mut dec = KrylovDecomposition::start(op, v, Process::Lanczos)?;
    dec.extend(op, k_max)?;
    Ok(dec)
}

/// A length-`k` prefix of a decomposition.
#[derive(Debug, Clone, Copy)]
pub struct KrylovView<'a> {
    dec: &'a KrylovDecomposition,
    k: usize,
}

impl<'a> KrylovView<'a> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn process(&self) -> Process {
        self.dec.process
    }

    /// `H_k` (or `T_k`).
    pub fn hessenberg(&self) -> DMatrix<C64> {
        let k = self.k;
        DMatrix::from_fn(k, k, |i, j| if i <= j + 1 { self.dec.columns[j][i] } else { ZERO })
    }

    /// `T_k` as a real symmetric matrix (Lanczos only).
    pub fn tridiagonal(&self) -> Result<DMatrix<f64>> {
        if self.dec.process != Process::Lanczos {
            return Err(Error::ModeMismatch);
        }
        Ok(self.hessenberg().map(|x| x.re))
    }

    /// `h_{k+1,k}` (`β_{k+1}` for Lanczos); zero at breakdown.
    pub fn h_next(&self) -> f64 {
        self.dec.columns[self.k - 1][self.k].re
    }

    pub fn breakdown(&self) -> bool {
        self.k == self.dec.steps() && self.dec.breakdown
    }

    /// Basis vector `v_{i+1}` for `i ≤ k` (`i = k` only without breakdown).
    pub fn basis_vector(&self, i: usize) -> Option<&'a [C64]> {
        if i > self.k {
            return None;
        }
        self.dec.basis.get(i).map(|v| v.as_slice())
    }

    pub fn start_norm(&self) -> f64 {
        self.dec.start_norm
    }

    /// `f(tH_k)e₁` for the chosen propagation.
    pub fn propagate_first_column(&self, t: f64, mode: Propagation) -> Result<DVector<C64>> {
        match (self.dec.process, mode) {
            (Process::Lanczos, _) => {
                let eig = self.tridiagonal()?.symmetric_eigen();
                let q = &eig.eigenvectors;
                let k = self.k;
                let mut y = DVector::from_element(k, ZERO);
                for j in 0..k {
                    let f = scalar_exp(eig.eigenvalues[j], t, mode);
                    let weight = f * q[(0, j)];
                    for i in 0..k {
                        y[i] += weight * q[(i, j)];
                    }
                }
                Ok(y)
            }
            (Process::Arnoldi, Propagation::Decay) => {
                let e = dense_expm(&(self.hessenberg() * C64::new(-t, 0.0)))?;
                Ok(e.column(0).into_owned())
            }
            (Process::Arnoldi, Propagation::Unitary) => Err(Error::ModeMismatch),
        }
    }
}

fn scalar_exp(lambda: f64, t: f64, mode: Propagation) -> C64 {
    match mode {
        Propagation::Decay => C64::new((-t * lambda).exp(), 0.0),
        Propagation::Unitary => C64::new(0.0, t * lambda).exp(),
    }
}

/// The Krylov approximation `‖v‖·V_k f(τH_k) e₁`.
pub fn krylov_approx(view: &KrylovView<'_>, tau: f64, mode: Propagation) -> Result<Vec<C64>> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain { what: "time step must be finite and nonnegative", value: tau });
    }
    let y = view.propagate_first_column(tau, mode)?;
    let mut w = vec![ZERO; view.dec.n];
    for (i, yi) in y.iter().enumerate() {
        axpy(*yi * view.dec.start_norm, &view.dec.basis[i], &mut w);
    }
    Ok(w)
}

/// `h(t) = e_kᵀ f(tH_k) e₁` at several times.
#[derive(Debug, Clone, PartialEq)]
pub struct HSeries {
    pub values: Vec<C64>,
    /// The eigen-expansion was rejected and every time was evaluated by a
    /// separate dense exponential.
    pub fallback: bool,
}

// Eigenvalue condition beyond which the Schur-based expansion is not trusted.
const MAX_EIGVEC_COND: f64 = 1e4;
const SERIES_CHECK_TOL: f64 = 1e-11;

/// Evaluates `h(t)` at every entry of `ts` from one factorization of `H_k`.
pub fn h_entry_series(view: &KrylovView<'_>, ts: &[f64], mode: Propagation) -> Result<HSeries> {
    if ts.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::Invalid("series times must be finite and nonnegative"));
    }
    let k = view.k;
    match (view.dec.process, mode) {
        (Process::Arnoldi, Propagation::Unitary) => Err(Error::ModeMismatch),
        (Process::Lanczos, _) => {
            let eig = view.tridiagonal()?.symmetric_eigen();
            let q = &eig.eigenvectors;
            let values = ts
                .iter()
                .map(|&t| {
                    (0..k).fold(ZERO, |acc, j| acc + scalar_exp(eig.eigenvalues[j], t, mode) * (q[(k - 1, j)] * q[(0, j)]))
                })
                .collect();
            Ok(HSeries { values, fallback: false })
        }
        (Process::Arnoldi, Propagation::Decay) => {
            let h = view.hessenberg();
            if let Some(values) = schur_series(&h, ts)? {
                return Ok(HSeries { values, fallback: false });
            }
            let values = ts
                .iter()
                .map(|&t| dense_expm(&(&h * C64::new(-t, 0.0))).map(|e| e[(k - 1, 0)]))
                .collect::<Result<Vec<_>>>()?;
            Ok(HSeries { values, fallback: true })
        }
    }
}

// Diagonalizes H through its complex Schur form and returns
// h(t) = Σ_j c_j e^{-tλ_j}, or None when the eigenvector basis is too
// ill-conditioned or the expansion disagrees with a dense check.
fn schur_series(h: &DMatrix<C64>, ts: &[f64]) -> Result<Option<Vec<C64>>> {
    let k = h.nrows();
    let Some(schur) = Schur::try_new(h.clone(), f64::EPSILON, 10_000) else {
        return Ok(None);
    };
    let (q, t) = schur.unpack();
    let scale = t.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    // Unit upper-triangular eigenvector matrix of T.
    let mut x = DMatrix::<C64>::identity(k, k);
    for j in 0..k {
        for i in (0..j).rev() {
            let mut s = ZERO;
            for l in i + 1..=j {
                s += t[(i, l)] * x[(l, j)];
            }
            let d = t[(i, i)] - t[(j, j)];
            if d.norm() <= 1e-12 * scale {
                return Ok(None);
            }
            x[(i, j)] = -s / d;
        }
    }
    let Some(x_inv) = x.clone().solve_upper_triangular(&DMatrix::identity(k, k)) else {
        return Ok(None);
    };
    if x.norm() * x_inv.norm() > MAX_EIGVEC_COND * k as f64 {
        return Ok(None);
    }
    let left = q.row(k - 1) * &x;
    let right = &x_inv * q.row(0).adjoint();
    let lambdas: Vec<C64> = (0..k).map(|j| t[(j, j)]).collect();
    let coeff: Vec<C64> = (0..k).map(|j| left[j] * right[j]).collect();
    let eval = |time: f64| (0..k).fold(ZERO, |acc, j| acc + coeff[j] * (-lambdas[j] * time).exp());

    if let Some(&t_max) = ts.iter().max_by(|a, b| a.total_cmp(b)) {
        let e = dense_expm(&(h * C64::new(-t_max, 0.0)))?;
        let column_scale = e.column(0).norm();
        if (eval(t_max) - e[(k - 1, 0)]).norm() > SERIES_CHECK_TOL * column_scale.max(f64::MIN_POSITIVE) {
            return Ok(None);
        }
    }
    Ok(Some(ts.iter().map(|&time| eval(time)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{DenseOperator, SparseMatrix};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn identity_breaks_down_immediately() {
        let id = SparseMatrix::diagonal(&[c(1.0); 5]);
        let dec = arnoldi(&id, &[c(1.0), c(2.0), c(0.0), c(-1.0), c(0.5)], 5).unwrap();
        assert_eq!(dec.steps(), 1);
        assert!(dec.breakdown());
        let view = dec.full().unwrap();
        assert!((view.hessenberg()[(0, 0)] - c(1.0)).norm() < 1e-15);
        assert_eq!(view.h_next(), 0.0);
    }

    #[test]
    fn zero_vector_rejected() {
        let id = SparseMatrix::diagonal(&[c(1.0); 3]);
        assert_eq!(arnoldi(&id, &[ZERO; 3], 3).unwrap_err(), Error::ZeroVector);
        assert!(matches!(arnoldi(&id, &[c(1.0); 2], 3), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lanczos_requires_hermitian_tag() {
        let id = SparseMatrix::diagonal(&[c(1.0); 3]);
        assert_eq!(lanczos(&id, &[c(1.0); 3], 2).unwrap_err(), Error::ModeMismatch);
    }

    #[test]
    fn scalar_series() {
        let m = SparseMatrix::diagonal(&[c(0.3), c(2.0)]);
        let dec = arnoldi(&m, &[c(1.0), c(1.0)], 1).unwrap();
        let view = dec.view(1).unwrap();
        let mu = view.hessenberg()[(0, 0)];
        let s = h_entry_series(&view, &[0.0, 0.5, 2.0], Propagation::Decay).unwrap();
        for (t, h) in [0.0, 0.5, 2.0].iter().zip(&s.values) {
            assert!((h - (-mu * t).exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn swap_series_closed_form() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let op = DenseOperator::new(m).unwrap();
        let dec = arnoldi(&op, &[c(1.0), c(0.0)], 2).unwrap();
        let s = h_entry_series(&dec.view(2).unwrap(), &[0.7], Propagation::Decay).unwrap();
        assert!((s.values[0] - c(-0.758_583_701_839_533_4)).norm() < 1e-12);
        assert!(!s.fallback);
    }

    #[test]
    fn zero_operator_gives_unit_series() {
        let op = DenseOperator::new(DMatrix::zeros(3, 3)).unwrap();
        let dec = arnoldi(&op, &[c(1.0), c(0.0), c(0.0)], 3).unwrap();
        assert!(dec.breakdown());
        let s = h_entry_series(&dec.full().unwrap(), &[0.0, 1.0], Propagation::Decay).unwrap();
        assert!(s.values.iter().all(|h| (h - c(1.0)).norm() < 1e-15));
    }

    #[test]
    fn unitary_requires_lanczos() {
        let m = SparseMatrix::diagonal(&[c(1.0), c(2.0)]);
        let dec = arnoldi(&m, &[c(1.0), c(1.0)], 2).unwrap();
        let view = dec.full().unwrap();
        assert_eq!(krylov_approx(&view, 1.0, Propagation::Unitary).unwrap_err(), Error::ModeMismatch);
    }

    #[test]
    fn tau_zero_returns_start_vector() {
        let m = SparseMatrix::diagonal(&[c(1.0), c(2.0), c(3.0)]);
        let v = [c(3.0), c(0.0), c(4.0)];
        let dec = arnoldi(&m, &v, 2).unwrap();
        let w = krylov_approx(&dec.full().unwrap(), 0.0, Propagation::Decay).unwrap();
        for (a, b) in w.iter().zip(&v) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
