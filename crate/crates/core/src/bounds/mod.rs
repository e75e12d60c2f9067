//! Error bounds for the Krylov approximation of the matrix exponential.
//!
//! [`estimate`] holds the a posteriori estimator and the field-of-values
//! box, [`apriori`] the bounds that only need spectral information, and
//! [`reference`] the classical bounds they are compared against.
//! [`bound_curve`] assembles all of them along a Krylov run.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::conformal::{build_conformal, ConformalParams, SpectralBox};
use crate::error::{Error, Result};
use crate::krylov::{krylov_approx, KrylovDecomposition, Propagation};
use crate::C64;

pub mod apriori;
pub mod estimate;
pub mod reference;

pub use apriori::{
    apriori_nonhermitian, apriori_nonhermitian_crude, apriori_skew, best_apriori, crude_rate, optimal_q_nonhermitian,
    optimal_q_skew, rate_equation, simplified_q_skew, skew_quartic, threshold_q_closed_form, threshold_q_m0, tilde_z,
    SkewRateMethod,
};
pub use estimate::{aposteriori_estimate, hessenberg_box, spectral_box, BoxEstimate};
pub use reference::{hochbruck_lubich_disk, hochbruck_lubich_skew, reference_bounds, saad_bound};

/// Crouzeix's constant as used in the non-Hermitian bound.
pub const CROUZEIX: f64 = 11.08;

/// Default number of Simpson subintervals on `[0, τ]`.
pub const SIMPSON_INTERVALS: usize = 10;

/// A bound kept as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBound {
    pub ln: f64,
}

impl LogBound {
    /// Logarithms above this are reported as overflow.
    pub const OVERFLOW_LN: f64 = 700.0;

    pub const ZERO: LogBound = LogBound { ln: f64::NEG_INFINITY };

    pub fn from_ln(ln: f64) -> Self {
        LogBound { ln }
    }

    pub fn overflow(&self) -> bool {
        self.ln > Self::OVERFLOW_LN || self.ln.is_nan()
    }

    /// The bound itself, `+∞` when flagged as overflow.
    pub fn value(&self) -> f64 {
        if self.overflow() {
            f64::INFINITY
        } else {
            self.ln.exp()
        }
    }

    pub fn min(self, other: LogBound) -> LogBound {
        if other.ln < self.ln || self.ln.is_nan() {
            other
        } else {
            self
        }
    }
}

/// How the a posteriori estimator treats the operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorMode {
    /// `e^{-τA}v` by Arnoldi.
    General,
    /// `e^{iτH}v` by Lanczos, `H` Hermitian with spectrum of half width
    /// `half_width` about its midpoint.
    Skew { half_width: f64 },
}

impl EstimatorMode {
    pub fn propagation(&self) -> Propagation {
        match self {
            EstimatorMode::General => Propagation::Decay,
            EstimatorMode::Skew { .. } => Propagation::Unitary,
        }
    }
}

/// Everything the bounds need to know about one `(operator, τ)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundContext {
    /// Field-of-values box of `A`; in skew mode `[λ_min(H), λ_max(H)]×{0}`.
    pub bx: SpectralBox,
    /// Present unless the box is flat or thin.
    pub conformal: Option<ConformalParams>,
    pub tau: f64,
    /// Upper estimate of `‖A‖₂`.
    pub norm_a: f64,
    pub mode: EstimatorMode,
    /// `(λ_max − λ_min)/4` in skew mode.
    pub rho_skew: Option<f64>,
    /// Radius of a disk `|z − ρ| < ρ` known to contain the field of values.
    pub rho_disk: Option<f64>,
    pub crouzeix: f64,
    pub simpson_n: usize,
}

fn check_context(tau: f64, norm_a: f64, bx: &SpectralBox) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain { what: "time step must be positive and finite", value: tau });
    }
    let extent = bx.a.abs().max(bx.b.abs()).max(bx.c);
    if !norm_a.is_finite() || norm_a < extent * (1.0 - 1e-12) {
        return Err(Error::Domain { what: "norm estimate must dominate the spectral box", value: norm_a });
    }
    Ok(())
}

impl BoundContext {
    /// Context for `e^{-τA}v` with the field of values of `A` inside `bx`.
    pub fn general(bx: SpectralBox, tau: f64, norm_a: f64) -> Result<Self> {
        check_context(tau, norm_a, &bx)?;
        let conformal = if bx.b > bx.a && bx.c > 0.0 { Some(build_conformal(&bx)?) } else { None };
        Ok(BoundContext {
            bx,
            conformal,
            tau,
            norm_a,
            mode: EstimatorMode::General,
            rho_skew: None,
            rho_disk: None,
            crouzeix: CROUZEIX,
            simpson_n: SIMPSON_INTERVALS,
        })
    }

    /// Context for `e^{iτH}v` with `H` Hermitian, spectrum in `[lo, hi]`.
    pub fn skew(lo: f64, hi: f64, tau: f64, norm_h: f64) -> Result<Self> {
        let bx = SpectralBox::new(lo, hi, 0.0)?;
        check_context(tau, norm_h, &bx)?;
        let half_width = 0.5 * (hi - lo);
        Ok(BoundContext {
            bx,
            conformal: None,
            tau,
            norm_a: norm_h,
            mode: EstimatorMode::Skew { half_width },
            rho_skew: Some(0.25 * (hi - lo)),
            rho_disk: None,
            crouzeix: CROUZEIX,
            simpson_n: SIMPSON_INTERVALS,
        })
    }

    pub fn with_disk(mut self, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain { what: "disk radius must be positive", value: rho });
        }
        self.rho_disk = Some(rho);
        Ok(self)
    }

    pub fn with_crouzeix(mut self, q: f64) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::Domain { what: "Crouzeix constant must be positive", value: q });
        }
        self.crouzeix = q;
        Ok(self)
    }

    pub fn with_simpson(mut self, n: usize) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::Invalid("Simpson subinterval count must be even and at least 2"));
        }
        self.simpson_n = n;
        Ok(self)
    }

    /// `ν(A)` for the estimator's growth factor.
    pub fn nu(&self) -> f64 {
        self.bx.a
    }
}

/// One row of a convergence history. Overflowed bounds are `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub k: usize,
    pub err_true: Option<f64>,
    pub est_post: f64,
    pub bnd_prior: f64,
    pub q_used: f64,
    pub bnd_saad: Option<f64>,
    pub bnd_hl: Option<f64>,
}

fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Bounds and estimates for every `k` in `ks` that the decomposition reaches.
///
/// `reference`, when given, is the exact `w(τ)` and fills `err_true`.
pub fn bound_curve(
    ctx: &BoundContext,
    dec: &KrylovDecomposition,
    ks: impl IntoIterator<Item = usize>,
    want_reference: bool,
    reference: Option<&[C64]>,
) -> Result<Vec<ConvergenceRecord>> {
    let mode = ctx.mode.propagation();
    let scale = dec.start_norm();
    let mut rows = Vec::new();
    for k in ks {
        if k == 0 || k > dec.steps() {
            continue;
        }
        let view = dec.view(k)?;
        let est_post = aposteriori_estimate(&view, ctx.tau, ctx.nu(), ctx.mode, ctx.simpson_n)?;
        let (prior, q_used) = if view.breakdown() { (LogBound::ZERO, 0.0) } else { best_apriori(ctx, k)? };
        let (bnd_saad, bnd_hl) = if want_reference {
            let (saad, hl) = reference_bounds(ctx, k);
            (Some(scaled(saad, scale)), hl.map(|b| scaled(b, scale)))
        } else {
            (None, None)
        };
        let err_true = match reference {
            Some(w) => Some(distance(&krylov_approx(&view, ctx.tau, mode)?, w)),
            None => None,
        };
        rows.push(ConvergenceRecord {
            k,
            err_true,
            est_post,
            bnd_prior: scaled(prior, scale),
            q_used,
            bnd_saad,
            bnd_hl,
        });
    }
    Ok(rows)
}

fn scaled(b: LogBound, factor: f64) -> f64 {
    LogBound::from_ln(b.ln + factor.ln()).value()
}
