//! Conformal map from the exterior of the rectangle `[a,b]×[−c,c]` onto the
//! exterior of the unit disk.
//!
//! With `α = (b−a)/2`, `β = c` and the shifted variable `z = z̃ − (a+b)/2`,
//! the map is defined through an auxiliary `σ`:
//!
//! ```text
//! z = α − (i/λ)·(E(σ|m) − (1−m)σ),    dn(σ|m) = (u + 1/u)/2,
//! ```
//!
//! where `m` solves `(E − m₁K)/β = (E′ − mK′)/α` and `λ` is that common
//! ratio. The logarithmic capacity of the rectangle is `1/(2λ)`.

use core::f64::consts::{FRAC_PI_4, PI, TAU};

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::elliptic::{complete_elliptic, jacobi_real, EllipticPair, Jacobi};
use crate::error::{domain, Error, Result};
use crate::quad::{self, Tolerance};
use crate::C64;

/// Rectangle `[a,b]×[−c,c]` enclosing a field of values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBox {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SpectralBox {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Invalid("box extents must be finite"));
        }
        if b < a || c < 0.0 {
            return Err(Error::DegenerateBox { a, b, c });
        }
        Ok(Self { a, b, c })
    }

    /// `α = (b − a)/2`.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    /// `(a + b)/2`.
    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// True when `z` lies in the closed rectangle.
    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.a && z.re <= self.b && z.im.abs() <= self.c
    }

    /// The box shifted by `s` along the real axis.
    pub fn shifted(&self, s: f64) -> Self {
        Self { a: self.a + s, b: self.b + s, c: self.c }
    }
}

/// Map parameters for one nondegenerate rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalParams {
    pub m: f64,
    pub m1: f64,
    pub k: f64,
    pub e: f64,
    pub kp: f64,
    pub ep: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub capacity: f64,
}

/// `g(m) = f(m)/f(1−m)` with `f(m) = E(m) − (1−m)K(m)`; increasing from 0
/// to ∞ on `(0, 1)`.
pub fn modulus_ratio(m: f64) -> Result<f64> {
    if !(m > 0.0 && m < 1.0) {
        return Err(domain("modulus must lie in (0, 1)", m));
    }
    ratio_of(m, 1.0 - m)
}

fn ratio_of(m: f64, m1: f64) -> Result<f64> {
    Ok(complete_elliptic(m)?.deficit() / deficit_near_one(m, m1)?)
}

// Deficit at parameter `m1`, staying finite when `m1` rounds to 1.
fn deficit_near_one(m: f64, m1: f64) -> Result<f64> {
    if m1 < 1.0 {
        return Ok(complete_elliptic(m1)?.deficit());
    }
    let log_term = (4.0 / m.sqrt()).ln();
    Ok(1.0 - 0.5 * m * log_term - 0.25 * m)
}

const BISECTION_BUDGET: usize = 200;
const SMALLEST_PARAMETER: f64 = 1e-300;

// Solves g(x) = target for x ∈ (0, 1/2], target ≤ 1.
fn solve_small(target: f64) -> Result<f64> {
    if target == 1.0 {
        return Ok(0.5);
    }
    let g = |x: f64| ratio_of(x, 1.0 - x);
    let (mut lo, mut hi) = (SMALLEST_PARAMETER, 0.5);
    if g(lo)? >= target {
        // g(m) = πm/4 to machine precision this deep in the asymptotic range.
        return Ok(4.0 * target / PI);
    }
    for _ in 0..BISECTION_BUDGET {
        let mid = if hi > 2.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * lo {
            return Ok(0.5 * (lo + hi));
        }
        if g(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence { what: "modulus bisection", iterations: BISECTION_BUDGET })
}

// Returns (m, 1 − m), each to full relative precision.
fn solve_modulus_pair(ratio: f64) -> Result<(f64, f64)> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(domain("aspect ratio must be positive and finite", ratio));
    }
    if ratio <= 1.0 {
        let m = solve_small(ratio)?;
        Ok((m, 1.0 - m))
    } else {
        let m1 = solve_small(1.0 / ratio)?;
        Ok((1.0 - m1, m1))
    }
}

/// The unique `m ∈ (0,1)` with `g(m) = ratio`.
pub fn solve_modulus(ratio: f64) -> Result<f64> {
    solve_modulus_pair(ratio).map(|(m, _)| m)
}

/// Solves for the modulus of `bx` and packages the map parameters.
pub fn build_conformal(bx: &SpectralBox) -> Result<ConformalParams> {
    let alpha = bx.half_width();
    let beta = bx.c;
    if !(alpha > 0.0) || !(beta > 0.0) {
        return Err(Error::DegenerateBox { a: bx.a, b: bx.b, c: bx.c });
    }
    let (m, m1) = solve_modulus_pair(beta / alpha)?;
    let main: EllipticPair = complete_elliptic(m)?;
    let comp: EllipticPair = complete_elliptic(m1)?;
    let lambda = comp.deficit() / alpha;
    let other = main.deficit() / beta;
    if (other - lambda).abs() > 1e-10 * lambda {
        return Err(Error::NonConvergence { what: "modulus equation", iterations: BISECTION_BUDGET });
    }
    Ok(ConformalParams {
        m,
        m1,
        k: main.k,
        e: main.e,
        kp: comp.k,
        ep: comp.e,
        alpha,
        beta,
        lambda,
        capacity: 0.5 / lambda,
    })
}

/// `∫₀^T √(m+t²)/√(1+t²) dt` with `T = (r − 1/r)/2`.
pub fn level_integral(m: f64, r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(domain("level radius must exceed 1", r));
    }
    if !(0.0..1.0).contains(&m) {
        return Err(domain("modulus must lie in [0, 1)", m));
    }
    if r.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let upper = 0.5 * (r - 1.0 / r);
    let tol = Tolerance::absolute(1e-13);
    if upper <= 1.0 {
        return quad::integrate_real(|t| ((m + t * t) / (1.0 + t * t)).sqrt(), 0.0, upper, tol);
    }
    // Split off the unit-slope part: with t = tan θ the remainder is smooth.
    let head = quad::integrate_real(|t| ((m + t * t) / (1.0 + t * t)).sqrt(), 0.0, 1.0, tol)?;
    let deficit = quad::integrate_real(
        |th| {
            let (s, c) = (th.sin(), th.cos());
            1.0 / (1.0 + (m * c * c + s * s).sqrt())
        },
        FRAC_PI_4,
        upper.atan(),
        tol,
    )?;
    Ok(head + (upper - 1.0) - (1.0 - m) * deficit)
}

/// Leftmost point `Ψ̃(−r)` of the level curve `C_r`.
pub fn psi_minus_r(cp: &ConformalParams, bx: &SpectralBox, r: f64) -> Result<f64> {
    Ok(bx.a - level_integral(cp.m, r)? / cp.lambda)
}

const NEWTON_ITERATIONS: usize = 40;
const MAX_SUBDIVISION: u32 = 24;

struct Tracer<'a> {
    jac: Jacobi,
    cp: &'a ConformalParams,
    r: f64,
}

impl Tracer<'_> {
    fn target(&self, theta: f64) -> (C64, C64) {
        let u = C64::from_polar(self.r, theta);
        let inv = u.inv();
        (0.5 * (u + inv), C64::new(0.0, 0.5) * (u - inv))
    }

    // Residual of dn(σ) = target, measured on 1/dn when |target| > 1 so
    // that the pole at iK′ does not spoil Newton's convergence.
    fn residual(&self, sigma: C64, target: C64) -> Result<(C64, C64)> {
        let s = self.jac.scd(sigma)?;
        let d_dn = -s.sn * s.cn * self.cp.m;
        if target.norm() > 1.0 {
            let inv = s.dn.inv();
            Ok((inv - target.inv(), -d_dn * inv * inv))
        } else {
            Ok((s.dn - target, d_dn))
        }
    }

    fn newton(&self, start: C64, target: C64) -> Option<C64> {
        let mut sigma = start;
        let (mut f, mut df) = self.residual(sigma, target).ok()?;
        let scale = if target.norm() > 1.0 { target.inv().norm() } else { 1.0 };
        for _ in 0..NEWTON_ITERATIONS {
            if f.norm() <= 1e-14 * scale.max(1e-300) + 1e-15 {
                return Some(sigma);
            }
            let step = f / df;
            let mut damping = 1.0;
            loop {
                let trial = sigma - step * damping;
                if let Ok((ft, dft)) = self.residual(trial, target) {
                    if ft.norm() < f.norm() {
                        sigma = trial;
                        f = ft;
                        df = dft;
                        break;
                    }
                }
                damping *= 0.5;
                if damping < 1e-6 {
                    return (f.norm() <= 1e-12 * scale + 1e-13).then_some(sigma);
                }
            }
        }
        (f.norm() <= 1e-12 * scale + 1e-13).then_some(sigma)
    }

    // One continuation step from (θ₀, σ₀) to θ₁ with an Euler predictor.
    fn advance(&self, sigma: C64, theta0: f64, theta1: f64) -> Option<C64> {
        let (_, dt0) = self.target(theta0);
        let s = self.jac.scd(sigma).ok()?;
        let slope = dt0 / (-s.sn * s.cn * self.cp.m);
        let predicted = sigma + slope * (theta1 - theta0);
        let (t1, _) = self.target(theta1);
        let corrected = self.newton(predicted, t1)?;
        let jump = (predicted - sigma).norm();
        ((corrected - predicted).norm() <= 0.3 * jump + 1e-12).then_some(corrected)
    }

    fn march(&self, sigma: C64, theta0: f64, theta1: f64, depth: u32, out: &mut Vec<(C64, f64)>) -> Result<C64> {
        if let Some(next) = self.advance(sigma, theta0, theta1) {
            out.push((next, theta1));
            return Ok(next);
        }
        if depth >= MAX_SUBDIVISION {
            return Err(Error::ContinuationFailure { theta: theta0 });
        }
        let mid = 0.5 * (theta0 + theta1);
        let half = self.march(sigma, theta0, mid, depth + 1, out)?;
        self.march(half, mid, theta1, depth + 1, out)
    }
}

/// `n` points of the level curve `C_r = Ψ̃(|u| = r)` at `θ_j = 2πj/n`.
///
/// `σ` starts on `(0, iK′)` at `θ = 0` (found by bisection on the real
/// function `dn(iy)`), is continued in `θ` by damped Newton, and `z̃` is
/// accumulated from quadratures of `dn²` between successive `σ`.
pub fn level_curve(cp: &ConformalParams, bx: &SpectralBox, r: f64, n: usize) -> Result<Vec<C64>> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(domain("level radius must exceed 1", r));
    }
    if n < 8 {
        return Err(Error::Invalid("level curve needs at least 8 points"));
    }
    let jac = Jacobi::new(cp.m)?;
    let tracer = Tracer { jac, cp, r };
    let kp = jac.complementary_quarter_period();

    // dn(iy | m) = dc(y | m₁), increasing from 1 to ∞ on (0, K′).
    let goal = 0.5 * (r + 1.0 / r);
    let (mut lo, mut hi) = (0.0, kp);
    for _ in 0..BISECTION_BUDGET {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (_, c1, d1) = jacobi_real(mid, cp.m1, None);
        if d1 < goal * c1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut sigma = C64::new(0.0, 0.5 * (lo + hi));
    let shift = C64::new(bx.center() + cp.alpha, 0.0);
    let rotate = C64::new(0.0, -1.0 / cp.lambda);
    let mut z = shift + rotate * (jac.epsilon(sigma)? - sigma * cp.m1);

    let mut points = Vec::with_capacity(n);
    points.push(z);
    let mut path = Vec::new();
    for j in 1..n {
        let theta0 = TAU * (j - 1) as f64 / n as f64;
        let theta1 = TAU * j as f64 / n as f64;
        path.clear();
        tracer.march(sigma, theta0, theta1, 0, &mut path)?;
        for &(next, theta) in &path {
            let de = jac
                .epsilon_between(sigma, next)
                .map_err(|_| Error::ContinuationFailure { theta })?;
            z += rotate * (de - (next - sigma) * cp.m1);
            sigma = next;
        }
        points.push(z);
    }
    Ok(points)
}
