//! A priori bounds: the rectangle bound for general operators, the
//! segment bound for skew-Hermitian ones, and the rate parameters that
//! minimize them.

#[allow(unused_imports)]
use num_traits::Float;

use super::{BoundContext, EstimatorMode, LogBound};
use crate::conformal::{level_integral, ConformalParams};
use crate::elliptic::complete_elliptic;
use crate::error::{domain, Error, Result};

const BISECTION_STEPS: usize = 200;
const RATE_FLOOR: f64 = 1e-12;
const RATE_CEILING: f64 = 1.0 - 1e-12;

fn check_rate(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(domain("rate parameter must lie in (0, 1)", q))
    }
}

fn check_step(k: usize) -> Result<()> {
    if k >= 1 {
        Ok(())
    } else {
        Err(domain("iteration count must be at least 1", 0.0))
    }
}

// Bisection for an increasing function with f(lo) < 0 < f(hi).
fn bisect(mut lo: f64, mut hi: f64, what: &'static str, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    if f(lo)? >= 0.0 {
        return Ok(lo);
    }
    if f(hi)? <= 0.0 {
        return Ok(hi);
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= 1e-14 {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::NonConvergence { what, iterations: BISECTION_STEPS })
    }
}

/// The shape the box takes for the general bound.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// Proper rectangle, or a segment on the real axis (`m = 0`, `λ = 1/α`).
    Rectangle { m: f64, lambda: f64 },
    /// Vertical segment `a + i[−c, c]`.
    Vertical { rho: f64 },
    /// A single point.
    Point,
}

fn shape(ctx: &BoundContext) -> Shape {
    let bx = &ctx.bx;
    match &ctx.conformal {
        Some(cp) => Shape::Rectangle { m: cp.m, lambda: cp.lambda },
        None if bx.b > bx.a => Shape::Rectangle { m: 0.0, lambda: 1.0 / bx.half_width() },
        None if bx.c > 0.0 => Shape::Vertical { rho: 0.5 * bx.c },
        None => Shape::Point,
    }
}

fn z_tilde(m: f64, lambda: f64, a: f64, q: f64) -> Result<f64> {
    Ok(a - level_integral(m, 1.0 / q)? / lambda)
}

/// Minimum real part on the level curve `|Φ| = 1/q`: the exponent of the
/// rectangle bound.
pub fn tilde_z(cp: &ConformalParams, a: f64, q: f64) -> Result<f64> {
    check_rate(q)?;
    z_tilde(cp.m, cp.lambda, a, q)
}

fn rectangle_parts(ctx: &BoundContext) -> Result<(f64, f64)> {
    match shape(ctx) {
        Shape::Rectangle { m, lambda } => Ok((m, lambda)),
        _ => Err(Error::DegenerateBox { a: ctx.bx.a, b: ctx.bx.b, c: ctx.bx.c }),
    }
}

fn rectangle_ln(ctx: &BoundContext, k: usize, q: f64, z: f64) -> LogBound {
    let tau = ctx.tau;
    let lead = (2.0 * ctx.crouzeix * tau * ctx.norm_a).ln();
    LogBound::from_ln(lead + (k as f64 - 1.0) * q.ln() - (1.0 - q).ln() - tau * ctx.bx.a.min(0.0) - tau * z)
}

/// `2Qτ‖A‖·q^{k−1}/(1−q)·e^{−τ·min(a,0) − τz̃}`.
pub fn apriori_nonhermitian(ctx: &BoundContext, k: usize, q: f64) -> Result<LogBound> {
    check_step(k)?;
    check_rate(q)?;
    let (m, lambda) = rectangle_parts(ctx)?;
    let z = z_tilde(m, lambda, ctx.bx.a, q)?;
    Ok(rectangle_ln(ctx, k, q, z))
}

/// The same bound with `z̃` replaced by its lower estimate
/// `a − (1/q − q)/(2λ)`.
pub fn apriori_nonhermitian_crude(ctx: &BoundContext, k: usize, q: f64) -> Result<LogBound> {
    check_step(k)?;
    check_rate(q)?;
    let (_, lambda) = rectangle_parts(ctx)?;
    let z = ctx.bx.a - (1.0 / q - q) / (2.0 * lambda);
    Ok(rectangle_ln(ctx, k, q, z))
}

/// The rate that zeroes the crude exponent, `1/(√(a²λ²+1) + aλ)`.
pub fn crude_rate(a: f64, lambda: f64) -> f64 {
    let al = a * lambda;
    1.0 / ((al * al + 1.0).sqrt() + al)
}

/// Left side of the stationarity condition of `q^{k−1}/(1−q)·e^{−τz̃}`,
/// with `c = τ/(2λ)`.
pub fn rate_equation(k: usize, c: f64, m: f64, q: f64) -> f64 {
    let k = k as f64;
    let s = 1.0 - q * q;
    (k - 1.0) * q + (2.0 - k) * q * q - c * (1.0 - q) * (s * s + 4.0 * m * q * q).sqrt()
}

/// The minimizing rate of the rectangle bound at step `k`.
pub fn optimal_q_nonhermitian(ctx: &BoundContext, k: usize) -> Result<f64> {
    check_step(k)?;
    let (m, lambda) = rectangle_parts(ctx)?;
    let c = ctx.tau / (2.0 * lambda);
    bisect(RATE_FLOOR, RATE_CEILING, "rate equation", |q| Ok(rate_equation(k, c, m, q)))
}

/// Rate at which the rectangle bound's exponent vanishes for a box with
/// `b/a = kappa` and parameter `m`.
pub fn threshold_q_m0(kappa: f64, m: f64) -> Result<f64> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(domain("condition ratio must exceed 1", kappa));
    }
    if !(m > 0.0 && m < 1.0) {
        return Err(domain("modulus must lie in (0, 1)", m));
    }
    let a_lambda = 2.0 * complete_elliptic(1.0 - m)?.deficit() / (kappa - 1.0);
    bisect(RATE_FLOOR * RATE_FLOOR, RATE_CEILING, "threshold rate", |q| {
        Ok(a_lambda - level_integral(m, 1.0 / q)?)
    })
}

/// `(√κ − 1)/(√κ + 1)`.
pub fn threshold_q_closed_form(kappa: f64) -> f64 {
    let s = kappa.sqrt();
    (s - 1.0) / (s + 1.0)
}

/// `4·min{1/(1−q²), τρ/q}/(1−q)·q^k·e^{τρ(1/q − q)}`.
pub fn apriori_skew(rho: f64, tau: f64, k: usize, q: f64) -> Result<LogBound> {
    check_step(k)?;
    check_rate(q)?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(domain("spectral quarter width must be nonnegative", rho));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(domain("time step must be positive", tau));
    }
    let tr = tau * rho;
    let head = (1.0 / (1.0 - q * q)).min(tr / q);
    if head == 0.0 {
        return Ok(LogBound::ZERO);
    }
    Ok(LogBound::from_ln(4f64.ln() + head.ln() - (1.0 - q).ln() + k as f64 * q.ln() + tr * (1.0 / q - q)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewRateMethod {
    /// Root of the quartic stationarity condition of the full bound.
    Quartic,
    /// Minimizer of `q^k e^{τρ(1/q − q)}`.
    Simplified,
}

/// Minimizer of `q^k e^{τρ(1/q − q)}` over `(0, 1]`; exactly 1 while
/// `k ≤ 2τρ`.
pub fn simplified_q_skew(tau_rho: f64, k: usize) -> f64 {
    let k = k as f64;
    if k <= 2.0 * tau_rho {
        1.0
    } else {
        (k - (k * k - 4.0 * tau_rho * tau_rho).sqrt()) / (2.0 * tau_rho)
    }
}

/// `τρq⁴ + (3−k)q³ + q² + kq − τρ`.
pub fn skew_quartic(tau_rho: f64, k: usize, q: f64) -> f64 {
    let k = k as f64;
    (((tau_rho * q + 3.0 - k) * q + 1.0) * q + k) * q - tau_rho
}

/// A rate for the skew bound at step `k`, kept inside `(0, 1)`.
pub fn optimal_q_skew(tau_rho: f64, k: usize, method: SkewRateMethod) -> Result<f64> {
    check_step(k)?;
    if !(tau_rho > 0.0) || !tau_rho.is_finite() {
        return Err(domain("τρ must be positive", tau_rho));
    }
    match method {
        SkewRateMethod::Simplified => Ok(simplified_q_skew(tau_rho, k).min(RATE_CEILING)),
        SkewRateMethod::Quartic => bisect(0.0, 1.0, "skew quartic", |q| Ok(skew_quartic(tau_rho, k, q)))
            .map(|q| q.clamp(RATE_FLOOR, RATE_CEILING)),
    }
}

fn best_skew(rho: f64, tau: f64, k: usize) -> Result<(LogBound, f64)> {
    if rho == 0.0 {
        return Ok((LogBound::ZERO, 0.0));
    }
    let mut best = (LogBound::from_ln(f64::INFINITY), f64::NAN);
    for method in [SkewRateMethod::Quartic, SkewRateMethod::Simplified] {
        let q = optimal_q_skew(tau * rho, k, method)?;
        let b = apriori_skew(rho, tau, k, q)?;
        if b.ln < best.0.ln || best.1.is_nan() {
            best = (b, q);
        }
    }
    Ok(best)
}

/// The a priori bound at step `k` minimized over the candidate rates,
/// together with the rate that attains it.
///
/// A box of zero width along the real axis uses the skew bound shifted by
/// `e^{−τa}`; a single point gives a zero bound.
pub fn best_apriori(ctx: &BoundContext, k: usize) -> Result<(LogBound, f64)> {
    check_step(k)?;
    if let EstimatorMode::Skew { .. } = ctx.mode {
        let rho = ctx.rho_skew.unwrap_or(0.25 * (ctx.bx.b - ctx.bx.a));
        return best_skew(rho, ctx.tau, k);
    }
    match shape(ctx) {
        Shape::Rectangle { lambda, .. } => {
            let q = optimal_q_nonhermitian(ctx, k)?;
            let mut best = (apriori_nonhermitian(ctx, k, q)?, q);
            if ctx.bx.a > 0.0 {
                let qc = crude_rate(ctx.bx.a, lambda);
                if qc > 0.0 && qc < 1.0 {
                    let b = apriori_nonhermitian(ctx, k, qc)?;
                    if b.ln < best.0.ln {
                        best = (b, qc);
                    }
                }
            }
            Ok(best)
        }
        Shape::Vertical { rho } => {
            let (b, q) = best_skew(rho, ctx.tau, k)?;
            Ok((LogBound::from_ln(b.ln - ctx.tau * ctx.bx.a), q))
        }
        Shape::Point => Ok((LogBound::ZERO, 0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::SpectralBox;

    fn ctx(a: f64, b: f64, c: f64, tau: f64) -> BoundContext {
        let bx = SpectralBox::new(a, b, c).unwrap();
        let norm = a.abs().max(b.abs()).hypot(c);
        BoundContext::general(bx, tau, norm).unwrap()
    }

    #[test]
    fn step_multiplies_by_rate() {
        let c = ctx(1.0, 3.0, 1.0, 2.0);
        let (b5, b6) = (apriori_nonhermitian(&c, 5, 0.4).unwrap(), apriori_nonhermitian(&c, 6, 0.4).unwrap());
        assert!((b6.ln - b5.ln - 0.4f64.ln()).abs() < 1e-12);
        assert!(apriori_nonhermitian(&c, 0, 0.4).is_err());
        assert!(apriori_nonhermitian(&c, 3, 1.0).is_err());
    }

    #[test]
    fn crude_rate_zeroes_the_crude_exponent() {
        let c = ctx(0.5, 2.5, 0.7, 3.0);
        let lambda = c.conformal.as_ref().unwrap().lambda;
        let q = crude_rate(0.5, lambda);
        let bound = apriori_nonhermitian_crude(&c, 7, q).unwrap();
        let plain = (2.0 * CROUZEIX_TEST * 3.0 * c.norm_a).ln() + 6.0 * q.ln() - (1.0 - q).ln();
        assert!((bound.ln - plain).abs() < 1e-12);
    }

    const CROUZEIX_TEST: f64 = 11.08;

    #[test]
    fn tilde_z_limits_and_monotonicity() {
        let c = ctx(1.0, 3.0, 1.0, 1.0);
        let cp = c.conformal.unwrap();
        assert!((tilde_z(&cp, 1.0, 1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-6);
        let mut prev = f64::INFINITY;
        for q in [0.9, 0.7, 0.5, 0.3, 0.1] {
            let z = tilde_z(&cp, 1.0, q).unwrap();
            assert!(z < prev);
            assert!(z >= 1.0 - (1.0 / q - q) / (2.0 * cp.lambda) - 1e-14);
            prev = z;
        }
        assert!(tilde_z(&cp, 1.0, 0.0).is_err());
    }

    #[test]
    fn rate_equation_root() {
        let c = ctx(0.2, 2.0, 0.8, 10.0);
        let cp = c.conformal.unwrap();
        let mut prev = 1.0;
        for k in [2, 5, 10, 20, 40] {
            let q = optimal_q_nonhermitian(&c, k).unwrap();
            assert!(rate_equation(k, 10.0 / (2.0 * cp.lambda), cp.m, q).abs() <= 1e-10);
            assert!(q < prev);
            prev = q;
        }
    }

    #[test]
    fn flat_and_thin_boxes_are_routed() {
        let flat = ctx(1.0, 3.0, 0.0, 2.0);
        let (b, q) = best_apriori(&flat, 4).unwrap();
        assert!(b.ln.is_finite() && q > 0.0 && q < 1.0);
        // m = 0, λ = 1/α: z̃ = a − α((1/q + q)/2 − 1)
        let z = 1.0 - 1.0 * ((1.0 / 0.5 + 0.5) / 2.0 - 1.0);
        let expect = (2.0 * 11.08 * 2.0 * 3.0f64).ln() + 3.0 * 0.5f64.ln() - 0.5f64.ln() - 2.0 * z;
        assert!((apriori_nonhermitian(&flat, 4, 0.5).unwrap().ln - expect).abs() < 1e-10);

        let thin = ctx(2.0, 2.0, 1.0, 3.0);
        let (bt, _) = best_apriori(&thin, 6).unwrap();
        let (bs, _) = best_skew(0.5, 3.0, 6).unwrap();
        assert!((bt.ln - (bs.ln - 6.0)).abs() < 1e-12);
        assert!(apriori_nonhermitian(&thin, 6, 0.5).is_err());

        let point = ctx(2.0, 2.0, 0.0, 3.0);
        assert_eq!(best_apriori(&point, 1).unwrap().0, LogBound::ZERO);
    }

    #[test]
    fn threshold_matches_closed_form_for_small_m() {
        let q = threshold_q_m0(100.0, 1e-6).unwrap();
        assert!((q - 9.0 / 11.0).abs() <= 0.01);
        assert!(threshold_q_m0(1.0 + 1e-6, 0.3).unwrap() < 1e-3);
        assert!(threshold_q_m0(10.0, 0.3).unwrap() < threshold_q_m0(20.0, 0.3).unwrap());
        assert!(threshold_q_m0(1.0, 0.3).is_err());
        assert!(threshold_q_m0(4.0, 0.0).is_err());
        assert_eq!(threshold_q_closed_form(100.0), 9.0 / 11.0);
    }

    #[test]
    fn skew_bound_special_values() {
        assert_eq!(apriori_skew(0.0, 3.0, 4, 0.5).unwrap(), LogBound::ZERO);
        // 4 q^k min{1/(1−q²), τρ/q}/(1−q) e^{τρ(1/q−q)} at τρ = 1, q = 1/2, k = 3
        let expect = 4.0 * 0.125 * (4.0f64 / 3.0).min(2.0) / 0.5 * (1.5f64).exp();
        assert!((apriori_skew(0.5, 2.0, 3, 0.5).unwrap().value() - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn skew_rates() {
        assert_eq!(simplified_q_skew(12.5, 25), 1.0);
        assert!(simplified_q_skew(12.5, 26) < 1.0);
        assert_eq!(optimal_q_skew(12.5, 25, SkewRateMethod::Simplified).unwrap(), RATE_CEILING);
        for k in [1, 10, 25, 60] {
            let q = optimal_q_skew(12.5, k, SkewRateMethod::Quartic).unwrap();
            assert!(skew_quartic(12.5, k, q).abs() <= 1e-10);
        }
        assert!(optimal_q_skew(0.0, 3, SkewRateMethod::Quartic).is_err());
    }
}
