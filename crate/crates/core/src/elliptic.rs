//! Complete elliptic integrals and the Jacobi elliptic functions sn, cn, dn.
//!
//! Everything uses the parameter convention `m = k²`. Complete integrals come
//! from the arithmetic–geometric mean; real-argument Jacobi functions from the
//! descending Landen transformation; complex arguments are assembled from two
//! real evaluations at `(x | m)` and `(y | 1 - m)`.

use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::quad::{self, Tolerance};
use crate::C64;

/// Below this parameter (and above `1 - SMALL_M`) the complete integrals
/// switch to their asymptotic forms.
pub const SMALL_M: f64 = 1e-12;

/// Guard radius around the poles `iK' + 2lK + 2niK'`.
pub const POLE_GUARD: f64 = 1e-8;

const LAURENT_TERMS: usize = 24;

const AGM_GAP: f64 = 1e-15;
const MAX_AGM: usize = 64;

/// `K(m)` and `E(m)` at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPair {
    pub m: f64,
    pub k: f64,
    pub e: f64,
    deficit: f64,
}

impl EllipticPair {
    /// `E − (1−m)·K`, accumulated from the AGM tail so that it keeps full
    /// relative accuracy as `m → 0`.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    /// `dK/dm = (E − (1−m)K) / (2m(1−m))`.
    pub fn dk_dm(&self) -> f64 {
        self.deficit / (2.0 * self.m * (1.0 - self.m))
    }

    /// `dE/dm = (E − K) / (2m)`.
    pub fn de_dm(&self) -> f64 {
        (self.e - self.k) / (2.0 * self.m)
    }
}

/// Complete elliptic integrals of the first and second kind.
///
/// Accepts `m ∈ [0, 1)`. `m = 0` gives `K = E = π/2` exactly; within
/// [`SMALL_M`] of either end the leading asymptotic expansions are used.
pub fn complete_elliptic(m: f64) -> Result<EllipticPair> {
    if !(0.0..1.0).contains(&m) {
        return Err(domain("elliptic parameter m must lie in [0, 1)", m));
    }
    if m == 0.0 {
        return Ok(EllipticPair { m, k: FRAC_PI_2, e: FRAC_PI_2, deficit: 0.0 });
    }
    let m1 = 1.0 - m;
    if m < SMALL_M {
        let k = FRAC_PI_2 * (1.0 + 0.25 * m);
        let e = FRAC_PI_2 * (1.0 - 0.25 * m);
        let deficit = FRAC_PI_2 * (0.5 * m + 0.25 * m * m);
        return Ok(EllipticPair { m, k, e, deficit });
    }
    if m1 < SMALL_M {
        let log_term = (16.0 / m1).ln();
        let k = 0.5 * log_term;
        let e = 1.0 + 0.25 * m1 * (log_term - 1.0);
        return Ok(EllipticPair { m, k, e, deficit: e - m1 * k });
    }

    let mut a = 1.0;
    let mut b = m1.sqrt();
    // c_1 = (a_0 - b_0)/2 written without cancellation.
    let mut c = m / (2.0 * (1.0 + b));
    let mut weight = 1.0;
    let mut tail = 0.0;
    for _ in 0..MAX_AGM {
        tail += weight * c * c;
        let a_next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = a_next;
        if c <= AGM_GAP * a {
            break;
        }
        weight *= 2.0;
        c = c * c / (4.0 * 0.5 * (a + b));
    }
    let k = PI / (2.0 * a);
    Ok(EllipticPair {
        m,
        k,
        e: k * (1.0 - 0.5 * m - tail),
        deficit: k * (0.5 * m - tail),
    })
}

fn check_parameter(m: f64) -> Result<()> {
    if m > 0.0 && m < 1.0 {
        Ok(())
    } else {
        Err(domain("elliptic parameter m must lie in (0, 1)", m))
    }
}

/// Real-argument `(sn, cn, dn)(x | m)` for `m ∈ [0, 1]`.
///
/// `quarter_period` is `K(m)`, used for range reduction modulo `4K`; pass
/// `None` to skip the reduction.
pub(crate) fn jacobi_real(x: f64, m: f64, quarter_period: Option<f64>) -> (f64, f64, f64) {
    if m == 0.0 {
        return (x.sin(), x.cos(), 1.0);
    }
    let m1 = 1.0 - m;
    if m1 == 0.0 {
        let sech = 1.0 / x.cosh();
        return (x.tanh(), sech, sech);
    }
    let x = match quarter_period {
        Some(k) if x.abs() > k => x - 4.0 * k * (x / (4.0 * k)).round(),
        _ => x,
    };

    let mut a = [0.0f64; MAX_AGM + 1];
    let mut c = [0.0f64; MAX_AGM + 1];
    a[0] = 1.0;
    c[0] = m.sqrt();
    let mut b = m1.sqrt();
    let mut n = 0;
    while n < MAX_AGM && c[n] > AGM_GAP * a[n] {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = c[n] * c[n] / (4.0 * a[n + 1]);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * x;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = (phi.sin(), phi.cos());
    (sn, cn, (m1 + m * cn * cn).sqrt())
}

/// Values of the three basic Jacobi functions at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: C64,
    pub cn: C64,
    pub dn: C64,
}

/// Jacobi functions for a fixed parameter, with the quarter periods cached.
#[derive(Debug, Clone, Copy)]
pub struct Jacobi {
    m: f64,
    k: f64,
    kp: f64,
}

impl Jacobi {
    pub fn new(m: f64) -> Result<Self> {
        check_parameter(m)?;
        Ok(Self {
            m,
            k: complete_elliptic(m)?.k,
            kp: complete_elliptic(1.0 - m)?.k,
        })
    }

    pub fn parameter(&self) -> f64 {
        self.m
    }

    /// `K(m)`.
    pub fn quarter_period(&self) -> f64 {
        self.k
    }

    /// `K'(m) = K(1−m)`.
    pub fn complementary_quarter_period(&self) -> f64 {
        self.kp
    }

    /// Distance from `u` to the nearest pole `2lK + (2n+1)iK'`.
    pub fn pole_distance(&self, u: C64) -> f64 {
        let l = (u.re / (2.0 * self.k)).round();
        let n = ((u.im - self.kp) / (2.0 * self.kp)).round();
        let pole = C64::new(2.0 * l * self.k, (2.0 * n + 1.0) * self.kp);
        (u - pole).norm()
    }

    // Nearest pole to the segment and its distance.
    fn segment_pole(&self, from: C64, to: C64) -> (f64, C64) {
        let (two_k, two_kp) = (2.0 * self.k, 2.0 * self.kp);
        let l_lo = (from.re.min(to.re) / two_k).floor() as i64 - 1;
        let l_hi = (from.re.max(to.re) / two_k).ceil() as i64 + 1;
        let n_lo = ((from.im.min(to.im) - self.kp) / two_kp).floor() as i64 - 1;
        let n_hi = ((from.im.max(to.im) - self.kp) / two_kp).ceil() as i64 + 1;
        let dir = to - from;
        let len2 = dir.norm_sqr();
        let mut best = (f64::INFINITY, C64::new(0.0, self.kp));
        for l in l_lo..=l_hi {
            for n in n_lo..=n_hi {
                let pole = C64::new(l as f64 * two_k, (2 * n + 1) as f64 * self.kp);
                let t = if len2 > 0.0 {
                    (((pole - from) * dir.conj()).re / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let d = (from + dir * t - pole).norm();
                if d < best.0 {
                    best = (d, pole);
                }
            }
        }
        best
    }

    // Below this distance from a pole the Laurent series is used.
    fn series_radius(&self) -> f64 {
        0.5 * self.k.min(self.kp)
    }

    /// `dn²(p + v) + 1/v²` for a pole `p`, from the Laurent series of the
    /// Weierstrass function: `dn²(p + v) = e₁ − (℘(v) − 1/v²)` with
    /// `e₁ = (2 − m)/3`.
    fn regular_part(&self, v: C64) -> C64 {
        let m = self.m;
        let (e1, e2, e3) = ((2.0 - m) / 3.0, (2.0 * m - 1.0) / 3.0, -(1.0 + m) / 3.0);
        let g2 = 2.0 * (e1 * e1 + e2 * e2 + e3 * e3);
        let g3 = 4.0 * e1 * e2 * e3;
        let mut c = [0.0f64; LAURENT_TERMS + 2];
        c[2] = g2 / 20.0;
        c[3] = g3 / 28.0;
        for k in 4..c.len() {
            let sum: f64 = (2..=k - 2).map(|j| c[j] * c[k - j]).sum();
            c[k] = 3.0 * sum / ((2 * k + 1) as f64 * (k - 3) as f64);
        }
        let v2 = v * v;
        let tail = c[2..].iter().rev().fold(C64::new(0.0, 0.0), |acc, &ck| acc * v2 + ck);
        C64::new(e1, 0.0) - tail * v2
    }

    /// `(sn, cn, dn)(u | m)` for complex `u`.
    pub fn scd(&self, u: C64) -> Result<JacobiTriple> {
        if !(u.re.is_finite() && u.im.is_finite()) {
            return Err(Error::Invalid("Jacobi argument must be finite"));
        }
        if self.pole_distance(u) < POLE_GUARD {
            return Err(Error::PoleProximity { re: u.re, im: u.im, radius: POLE_GUARD });
        }
        let (s, c, d) = jacobi_real(u.re, self.m, Some(self.k));
        if u.im == 0.0 {
            return Ok(JacobiTriple { sn: s.into(), cn: c.into(), dn: d.into() });
        }
        let m = self.m;
        let (s1, c1, d1) = jacobi_real(u.im, 1.0 - m, Some(self.kp));
        let den = c1 * c1 + m * s * s * s1 * s1;
        Ok(JacobiTriple {
            sn: C64::new(s * d1, c * d * s1 * c1) / den,
            cn: C64::new(c * c1, -s * d * s1 * d1) / den,
            dn: C64::new(d * c1 * d1, -m * s * c * s1) / den,
        })
    }

    /// `∫ dn²(z|m) dz` along the straight segment `from → to`.
    ///
    /// Every pole of `dn²` has principal part `−1/(z − p)²`; the one nearest
    /// the segment is integrated in closed form and only the regular
    /// remainder goes to quadrature.
    pub fn epsilon_between(&self, from: C64, to: C64) -> Result<C64> {
        if from == to {
            return Ok(C64::new(0.0, 0.0));
        }
        let (gap, pole) = self.segment_pole(from, to);
        if gap < POLE_GUARD {
            return Err(Error::PoleProximity { re: to.re, im: to.im, radius: POLE_GUARD });
        }
        let dir = to - from;
        let tol = Tolerance::absolute(1e-12).with_rel(1e-13);
        let remainder = quad::integrate(
            |t| {
                let z = from + dir * t;
                let v = z - pole;
                if v.norm() < self.series_radius() {
                    return Ok(self.regular_part(v) * dir);
                }
                let dn = self.scd(z)?.dn;
                Ok((dn * dn + (v * v).inv()) * dir)
            },
            0.0,
            1.0,
            tol,
        )?;
        Ok(remainder + (to - pole).inv() - (from - pole).inv())
    }

    /// Jacobi's epsilon function `E(σ|m) = ∫₀^σ dn²(z|m) dz`.
    pub fn epsilon(&self, sigma: C64) -> Result<C64> {
        self.epsilon_between(C64::new(0.0, 0.0), sigma)
    }
}

/// `(sn, cn, dn)(u | m)`; see [`Jacobi::scd`].
pub fn jacobi_scd(u: C64, m: f64) -> Result<JacobiTriple> {
    Jacobi::new(m)?.scd(u)
}

/// `E(σ|m) = ∫₀^σ dn²(z|m) dz` along the straight segment from the origin.
pub fn jacobi_epsilon(sigma: C64, m: f64) -> Result<C64> {
    Jacobi::new(m)?.epsilon(sigma)
}

/// Incomplete integral of the first kind `F(φ, m) = ∫₀^φ (1 − m sin²θ)^{-1/2} dθ`
/// along the straight segment from 0 to `phi`, principal square root.
pub fn incomplete_f(phi: C64, m: f64) -> Result<C64> {
    check_parameter(m)?;
    if phi == C64::new(0.0, 0.0) {
        return Ok(phi);
    }
    let tol = Tolerance::absolute(1e-13).with_rel(1e-14);
    quad::integrate(
        |t| {
            let s = (phi * t).sin();
            Ok(phi / (C64::new(1.0, 0.0) - s * s * m).sqrt())
        },
        0.0,
        1.0,
        tol,
    )
}
