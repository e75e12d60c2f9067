//! Small dense kernels: the matrix exponential, Hermitian/skew parts and
//! spectral norms.

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::C64;

/// Largest dimension accepted by the dense paths.
pub const DENSE_LIMIT: usize = 2000;

const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn all_finite(m: &DMatrix<C64>) -> bool {
    m.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// `e^M` by scaling and squaring with the order-13 diagonal Padé approximant.
pub fn dense_expm(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
    }
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
    }
    if n == 0 {
        return Ok(m.clone());
    }
    if !all_finite(m) {
        return Err(Error::Invalid("matrix exponential argument must be finite"));
    }
    let norm = one_norm(m);
    let squarings = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    if squarings > 1100 {
        return Err(Error::Overflow);
    }
    let a = m * C64::new(2f64.powi(-squarings), 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    let b = |j: usize| C64::new(PADE_13[j], 0.0);

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (u_inner + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::Overflow)?;
    for _ in 0..squarings {
        r = &r * &r;
        if !all_finite(&r) {
            return Err(Error::Overflow);
        }
    }
    if !all_finite(&r) {
        return Err(Error::Overflow);
    }
    Ok(r)
}

/// `(M + M*)/2`.
pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `(M − M*)/2`.
pub fn skew_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m - m.adjoint()) * C64::new(0.5, 0.0)
}

/// Ascending eigenvalues of a Hermitian matrix (only the lower triangle is
/// read).
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> DVector<f64> {
    let mut ev = m.clone().symmetric_eigenvalues();
    ev.as_mut_slice().sort_by(f64::total_cmp);
    ev
}

/// Spectral norm `√λ_max(M*M)`.
pub fn two_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let ev = hermitian_eigenvalues(&gram);
    ev[ev.len() - 1].max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: usize, data: &[f64]) -> DMatrix<C64> {
        DMatrix::from_row_slice(rows, rows, &data.iter().map(|&x| C64::new(x, 0.0)).collect::<alloc::vec::Vec<_>>())
    }

    #[test]
    fn zero_gives_identity() {
        let e = dense_expm(&DMatrix::zeros(4, 4)).unwrap();
        assert!((e - DMatrix::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_matches_scalar_exponentials() {
        let d = [C64::new(-3.0, 0.5), C64::new(0.25, 0.0), C64::new(7.0, -2.0)];
        let e = dense_expm(&DMatrix::from_diagonal(&DVector::from_column_slice(&d))).unwrap();
        for (i, di) in d.iter().enumerate() {
            assert!((e[(i, i)] - di.exp()).norm() <= 1e-13 * di.exp().norm());
        }
    }

    #[test]
    fn swap_matrix_closed_form() {
        // e^{-tM} = cosh(t) I - sinh(t) M for M = [[0,1],[1,0]]
        let m = real(2, &[0.0, 1.0, 1.0, 0.0]);
        let e = dense_expm(&(&m * C64::new(-0.7, 0.0))).unwrap();
        let (ch, sh) = (1.255_169_005_630_943, 0.758_583_701_839_533_4);
        assert!((e[(0, 0)].re - ch).abs() < 1e-12);
        assert!((e[(1, 0)].re + sh).abs() < 1e-12);
        assert!(e[(0, 1)].im.abs() < 1e-15);
    }

    #[test]
    fn large_norm_uses_squaring() {
        let m = real(2, &[-40.0, 30.0, 0.0, -41.0]);
        let e = dense_expm(&m).unwrap();
        let (e1, e2) = ((-40f64).exp(), (-41f64).exp());
        assert!((e[(0, 0)].re - e1).abs() <= 1e-13 * e1);
        assert!((e[(1, 1)].re - e2).abs() <= 1e-13 * e2);
        assert!((e[(0, 1)].re - 30.0 * (e1 - e2)).abs() <= 1e-12 * 30.0 * e1);
    }

    #[test]
    fn overflow_is_reported() {
        let m = real(1, &[1000.0]);
        assert_eq!(dense_expm(&m).unwrap_err(), Error::Overflow);
    }

    #[test]
    fn dimension_guard() {
        let m = DMatrix::<C64>::zeros(DENSE_LIMIT + 1, DENSE_LIMIT + 1);
        assert!(matches!(dense_expm(&m), Err(Error::TooLarge { .. })));
        let rect = DMatrix::<C64>::zeros(3, 2);
        assert!(matches!(dense_expm(&rect), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn parts_and_norm() {
        let m = real(2, &[1.0, 2.0, 0.0, 1.0]);
        assert!((hermitian_part(&m) + skew_part(&m) - &m).norm() < 1e-15);
        let ev = hermitian_eigenvalues(&hermitian_part(&m));
        assert!((ev[0] - 0.0).abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
        // singular values of [[1,2],[0,1]] are sqrt(2) +- 1
        assert!((two_norm(&m) - (2f64.sqrt() + 1.0)).abs() < 1e-14);
    }
}
