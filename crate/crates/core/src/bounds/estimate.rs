//! The field-of-values box and the a posteriori estimator.

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use super::EstimatorMode;
use crate::conformal::SpectralBox;
use crate::dense::{hermitian_eigenvalues, hermitian_part, skew_part, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::krylov::{h_entry_series, lanczos, KrylovView};
use crate::operator::{to_dense, HermitianPart, LinearOperator, SkewPartRotated};
use crate::problems::{random_unit_vector, DEFAULT_SEED};
use crate::C64;

const SPARSE_STEPS: usize = 60;
const SPARSE_MARGIN: f64 = 0.01;

/// A box with a note on how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxEstimate {
    pub bx: SpectralBox,
    /// Extremes come from Lanczos estimates padded outward, not from a
    /// full eigendecomposition.
    pub estimated: bool,
}

fn box_of_dense(m: &DMatrix<C64>) -> Result<SpectralBox> {
    let herm = hermitian_eigenvalues(&hermitian_part(m));
    let rotated = skew_part(m) * C64::new(0.0, -1.0);
    let skew = hermitian_eigenvalues(&rotated);
    let n = herm.len();
    if n == 0 {
        return SpectralBox::new(0.0, 0.0, 0.0);
    }
    let c = skew[0].abs().max(skew[n - 1].abs());
    SpectralBox::new(herm[0], herm[n - 1], c)
}

fn ritz_extremes<A: LinearOperator + ?Sized>(op: &A) -> Result<(f64, f64)> {
    let v = random_unit_vector(op.dim(), DEFAULT_SEED);
    let dec = lanczos(op, &v, SPARSE_STEPS)?;
    let t = dec.full()?.tridiagonal()?;
    let ev: Vec<f64> = {
        let mut e: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    };
    Ok((ev[0], ev[ev.len() - 1]))
}

/// The box `[a,b]×[−c,c]` from the extreme eigenvalues of the Hermitian and
/// skew-Hermitian parts of `op`.
///
/// Up to the dense limit the eigenvalues are exact; beyond it they are
/// Lanczos estimates widened by 1% of the largest extent.
pub fn spectral_box<A: LinearOperator + ?Sized>(op: &A) -> Result<BoxEstimate> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::ZeroVector);
    }
    if n <= DENSE_LIMIT {
        return Ok(BoxEstimate { bx: box_of_dense(&to_dense(op))?, estimated: false });
    }
    let (a, b) = ritz_extremes(&HermitianPart(op))?;
    let (lo, hi) = ritz_extremes(&SkewPartRotated(op))?;
    let c = lo.abs().max(hi.abs());
    let pad = SPARSE_MARGIN * a.abs().max(b.abs()).max(c);
    Ok(BoxEstimate { bx: SpectralBox::new(a - pad, b + pad, c + pad)?, estimated: true })
}

/// The box of the reduced matrix `H_k` itself.
pub fn hessenberg_box(view: &KrylovView<'_>) -> Result<SpectralBox> {
    box_of_dense(&view.hessenberg())
}

fn simpson(values: &[f64], step: f64) -> f64 {
    let n = values.len() - 1;
    let inner: f64 = values[1..n].iter().enumerate().map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v }).sum();
    step / 3.0 * (values[0] + inner + values[n])
}

/// `h_{k+1,k}·e^{−min(ν,0)τ}·∫₀^τ |h(t)| dt` with the integral taken by
/// composite Simpson on `intervals` subintervals, times `‖v‖`.
///
/// In skew mode the leading factor is `min(β_{k+1}, (λ_max − λ_min)/2)` and
/// there is no growth factor.
pub fn aposteriori_estimate(
    view: &KrylovView<'_>,
    tau: f64,
    nu: f64,
    mode: EstimatorMode,
    intervals: usize,
) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain { what: "time step must be positive and finite", value: tau });
    }
    if intervals < 2 || !intervals.is_multiple_of(2) {
        return Err(Error::Invalid("Simpson subinterval count must be even and at least 2"));
    }
    let h_next = view.h_next();
    if view.breakdown() || h_next == 0.0 {
        return Ok(0.0);
    }
    let factor = match mode {
        EstimatorMode::General => h_next * (-nu.min(0.0) * tau).exp(),
        EstimatorMode::Skew { half_width } => h_next.min(half_width),
    };
    let step = tau / intervals as f64;
    let ts: Vec<f64> = (0..=intervals).map(|j| j as f64 * step).collect();
    let series = h_entry_series(view, &ts, mode.propagation())?;
    let abs: Vec<f64> = series.values.iter().map(|h| h.norm()).collect();
    Ok(factor * simpson(&abs, step) * view.start_norm())
}
