//! Adaptive Gauss–Kronrod (7/15) quadrature on finite real intervals.
//!
//! The integrand may be complex-valued; real integrands go through
//! [`integrate_real`]. Subintervals are refined until the Kronrod/Gauss
//! difference meets `max(abs_tol, rel_tol * |I|)` scaled by the subinterval's
//! share of the total length.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn absolute(abs: f64) -> Self {
        Self { abs, rel: 1e-14, max_intervals: 4000 }
    }

    pub const fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::absolute(1e-12)
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<(C64, f64)>
where
    F: FnMut(f64) -> Result<C64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    Ok((kron, (kron - gauss).norm()))
}

/// Integrates a fallible complex integrand over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<C64>
where
    F: FnMut(f64) -> Result<C64>,
{
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Invalid("quadrature limits must be finite"));
    }
    let total = (b - a).abs();
    let (first, first_err) = kronrod(&mut f, a, b)?;
    let mut pending: Vec<(f64, f64, C64, f64)> = alloc::vec![(a, b, first, first_err)];
    let mut accepted = C64::new(0.0, 0.0);
    let mut estimate = first;
    let mut intervals = 1usize;

    while let Some((lo, hi, value, err)) = pending.pop() {
        let goal = tol.abs.max(tol.rel * estimate.norm());
        let share = goal * ((hi - lo).abs() / total);
        let width_exhausted = {
            let mid = 0.5 * (lo + hi);
            mid == lo || mid == hi
        };
        if err <= share || width_exhausted {
            accepted += value;
            continue;
        }
        intervals += 1;
        if intervals > tol.max_intervals {
            return Err(Error::Quadrature { tolerance: goal, evaluations: 15 * intervals });
        }
        let mid = 0.5 * (lo + hi);
        let (left, left_err) = kronrod(&mut f, lo, mid)?;
        let (right, right_err) = kronrod(&mut f, mid, hi)?;
        estimate += left + right - value;
        pending.push((lo, mid, left, left_err));
        pending.push((mid, hi, right, right_err));
    }
    if !(accepted.re.is_finite() && accepted.im.is_finite()) {
        return Err(Error::Quadrature { tolerance: tol.abs, evaluations: 15 * intervals });
    }
    Ok(accepted)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Ok(C64::new(f(x), 0.0)), a, b, tol).map(|z| z.re)
}
