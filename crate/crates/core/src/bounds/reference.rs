//! Classical a priori bounds used for comparison.

#[allow(unused_imports)]
use num_traits::Float;

use super::{BoundContext, EstimatorMode, LogBound};

/// `2(τ‖A‖)^k/k!`.
pub fn saad_bound(tau_norm: f64, k: usize) -> LogBound {
    if tau_norm == 0.0 {
        return LogBound::ZERO;
    }
    let k = k as f64;
    LogBound::from_ln(2f64.ln() + k * tau_norm.ln() - libm::lgamma(k + 1.0))
}

/// `12e^{−ρτ}(eρτ/k)^k` for a field of values in `|z − ρ| < ρ`; only for
/// `k ≥ 2ρτ`.
pub fn hochbruck_lubich_disk(rho_tau: f64, k: usize) -> Option<LogBound> {
    let kf = k as f64;
    if k == 0 || kf < 2.0 * rho_tau {
        return None;
    }
    Some(LogBound::from_ln(12f64.ln() - rho_tau + kf * (1.0 + rho_tau.ln() - kf.ln())))
}

/// `12e^{−(ρτ)²/k}(eρτ/k)^k` for `e^{iτH}v`; only for `k ≥ 2ρτ`.
pub fn hochbruck_lubich_skew(rho_tau: f64, k: usize) -> Option<LogBound> {
    let kf = k as f64;
    if k == 0 || kf < 2.0 * rho_tau {
        return None;
    }
    Some(LogBound::from_ln(12f64.ln() - rho_tau * rho_tau / kf + kf * (1.0 + rho_tau.ln() - kf.ln())))
}

/// Saad's bound and, where it applies, the Hochbruck–Lubich bound.
pub fn reference_bounds(ctx: &BoundContext, k: usize) -> (LogBound, Option<LogBound>) {
    let saad = saad_bound(ctx.tau * ctx.norm_a, k);
    let hl = match ctx.mode {
        EstimatorMode::Skew { .. } => ctx.rho_skew.and_then(|rho| hochbruck_lubich_skew(rho * ctx.tau, k)),
        EstimatorMode::General => ctx.rho_disk.and_then(|rho| hochbruck_lubich_disk(rho * ctx.tau, k)),
    };
    (saad, hl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::SpectralBox;

    #[test]
    fn saad_values() {
        assert!((saad_bound(1.0, 1).value() - 2.0).abs() < 1e-15);
        for k in 1..40 {
            let r = saad_bound(3.5, k + 1).ln - saad_bound(3.5, k).ln;
            assert!((r.exp() - 3.5 / (k + 1) as f64).abs() < 1e-12 * 3.5 / (k + 1) as f64);
        }
        assert!(saad_bound(100.0, 3).value() > 0.0);
        assert!(saad_bound(1e4, 200).overflow());
    }

    #[test]
    fn hochbruck_lubich_ranges() {
        assert!(hochbruck_lubich_skew(12.5, 24).is_none());
        let b = hochbruck_lubich_skew(12.5, 25).unwrap().value();
        let expect = 12.0 * (-12.5f64 / 2.0).exp() * (core::f64::consts::E / 2.0).powf(25.0);
        assert!((b - expect).abs() < 1e-12 * expect);
        let d = hochbruck_lubich_disk(1.0, 3).unwrap().value();
        let expect = 12.0 * (-1f64).exp() * (core::f64::consts::E / 3.0).powi(3);
        assert!((d - expect).abs() < 1e-12 * expect);
        assert!(hochbruck_lubich_disk(10.0, 19).is_none());
    }

    #[test]
    fn context_dispatch() {
        let bx = SpectralBox::new(0.5, 1.5, 0.5).unwrap();
        let ctx = BoundContext::general(bx, 2.0, 1.6).unwrap();
        assert!(reference_bounds(&ctx, 5).1.is_none());
        let ctx = ctx.with_disk(1.0).unwrap();
        assert!(reference_bounds(&ctx, 3).1.is_none());
        assert!(reference_bounds(&ctx, 4).1.is_some());
        let skew = BoundContext::skew(0.0, 1.0, 4.0, 1.0).unwrap();
        assert!(reference_bounds(&skew, 2).1.is_some());
        assert!(reference_bounds(&skew, 1).1.is_none());
    }
}
