//! Test operators with known fields of values and exact reference solutions.

use alloc::vec::Vec;

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{spectral_box, BoundContext};
use crate::conformal::SpectralBox;
use crate::dense::{dense_expm, two_norm, DENSE_LIMIT};
use crate::elliptic::complete_elliptic;
use crate::error::{domain, Error, Result};
use crate::krylov::{norm2, Propagation};
use crate::operator::{LinearOperator, SparseMatrix, Structure};
use crate::C64;

/// Seed of the default start vector.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Entries uniform on `[−1, 1)`, normalized to unit length.
pub fn random_unit_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
    let norm = norm2(&v);
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// How the exact `w(τ)` is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// Block diagonal with blocks `[[x, y], [−y, x]]`, one `(x, y)` per block.
    Blocks(Vec<(f64, f64)>),
    /// Diagonal operator with these real entries.
    Diagonal(Vec<f64>),
    /// A dense exponential of the assembled matrix.
    DenseExpm,
}

/// An operator, a start vector and what is known about both.
#[derive(Debug, Clone, PartialEq)]
pub struct TestProblem {
    pub operator: SparseMatrix,
    pub v: Vec<C64>,
    pub reference: Reference,
    /// `Decay` targets `e^{−τA}v`; `Unitary` targets `e^{iτH}v`.
    pub propagation: Propagation,
    pub box_exact: Option<SpectralBox>,
    /// Radius `ρ` of a disk `|z − ρ| < ρ` containing the field of values.
    pub disk: Option<f64>,
}

impl TestProblem {
    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// The bound context at time `tau`, from the exact box when known.
    pub fn bound_context(&self, tau: f64) -> Result<BoundContext> {
        let bx = match self.box_exact {
            Some(bx) => bx,
            None => spectral_box(&self.operator)?.bx,
        };
        let norm = self.operator.norm_estimate();
        let ctx = match self.propagation {
            Propagation::Decay => BoundContext::general(bx, tau, norm)?,
            Propagation::Unitary => BoundContext::skew(bx.a, bx.b, tau, norm)?,
        };
        match self.disk {
            Some(rho) => ctx.with_disk(rho),
            None => Ok(ctx),
        }
    }

    pub fn with_start(mut self, v: Vec<C64>) -> Result<Self> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        self.v = v;
        Ok(self)
    }
}

/// A normal block-diagonal matrix whose eigenvalues `x_ℓ ± i·y_j` form a
/// lattice spanning `bx`, moved right by `shift`.
///
/// `x_ℓ = a + (ℓ−1)(b−a)/(N−1)` for `ℓ = 1..N` and `y_j = 2jc/(N−1)` for
/// `j = 1..(N−1)/2`, so the dimension is `N(N−1)`.
pub fn lattice_normal_matrix(points: usize, bx: SpectralBox, shift: f64, seed: u64) -> Result<TestProblem> {
    if points < 3 || points.is_multiple_of(2) {
        return Err(domain("lattice size must be odd and at least 3", points as f64));
    }
    if !(bx.b > bx.a) || !(bx.c > 0.0) {
        return Err(Error::DegenerateBox { a: bx.a, b: bx.b, c: bx.c });
    }
    if !shift.is_finite() {
        return Err(domain("shift must be finite", shift));
    }
    let span = (points - 1) as f64;
    let mut blocks = Vec::with_capacity(points * (points - 1) / 2);
    for l in 0..points {
        let x = bx.a + l as f64 * (bx.b - bx.a) / span + shift;
        for j in 1..=(points - 1) / 2 {
            blocks.push((x, 2.0 * j as f64 * bx.c / span));
        }
    }
    let mut triplets = Vec::with_capacity(4 * blocks.len());
    for (p, &(x, y)) in blocks.iter().enumerate() {
        let (r, s) = (2 * p, 2 * p + 1);
        triplets.push((r, r, C64::new(x, 0.0)));
        triplets.push((r, s, C64::new(y, 0.0)));
        triplets.push((s, r, C64::new(-y, 0.0)));
        triplets.push((s, s, C64::new(x, 0.0)));
    }
    let n = 2 * blocks.len();
    let norm = blocks.iter().map(|&(x, y)| x.hypot(y)).fold(0.0, f64::max);
    let operator = SparseMatrix::from_triplets(n, &triplets)?.with_norm(norm);
    Ok(TestProblem {
        operator,
        v: random_unit_vector(n, seed),
        reference: Reference::Blocks(blocks),
        propagation: Propagation::Decay,
        box_exact: Some(bx.shifted(shift)),
        disk: None,
    })
}

/// The rectangle `[0, 2α]×[−β, β]` whose conformal parameter is `m`, with
/// `α = E(m₁) − m·K(m₁)` and `β = E(m) − m₁·K(m)`.
pub fn example2_box(m: f64) -> Result<SpectralBox> {
    if !(m > 0.0 && m < 1.0) {
        return Err(domain("modulus must lie in (0, 1)", m));
    }
    let alpha = complete_elliptic(1.0 - m)?.deficit();
    let beta = complete_elliptic(m)?.deficit();
    SpectralBox::new(0.0, 2.0 * alpha, beta)
}

/// Centered five-point discretization of `−(Δu − s·u_x − s·u_y)` on the unit
/// square, scaled by `h²`, with convection strength `s`.
pub fn convection_diffusion_scaled(grid: usize, convection: f64, seed: u64) -> Result<TestProblem> {
    if grid < 3 {
        return Err(domain("grid must have at least 3 interior points per side", grid as f64));
    }
    let h = 1.0 / (grid + 1) as f64;
    let (ahead, behind) = (-1.0 + convection * h / 2.0, -1.0 - convection * h / 2.0);
    let n = grid * grid;
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
    }
    let mut triplets = Vec::with_capacity(5 * n);
    for j in 0..grid {
        for i in 0..grid {
            let row = j * grid + i;
            triplets.push((row, row, C64::new(4.0, 0.0)));
            if i + 1 < grid {
                triplets.push((row, row + 1, C64::new(ahead, 0.0)));
            }
            if i > 0 {
                triplets.push((row, row - 1, C64::new(behind, 0.0)));
            }
            if j + 1 < grid {
                triplets.push((row, row + grid, C64::new(ahead, 0.0)));
            }
            if j > 0 {
                triplets.push((row, row - grid, C64::new(behind, 0.0)));
            }
        }
    }
    let matrix = SparseMatrix::from_triplets(n, &triplets)?;
    let norm = two_norm(&matrix.to_dense());
    Ok(TestProblem {
        operator: matrix.with_norm(norm),
        v: random_unit_vector(n, seed),
        reference: Reference::DenseExpm,
        propagation: Propagation::Decay,
        box_exact: None,
        disk: None,
    })
}

/// [`convection_diffusion_scaled`] with unit convection.
pub fn convection_diffusion(grid: usize, seed: u64) -> Result<TestProblem> {
    convection_diffusion_scaled(grid, 1.0, seed)
}

/// `H = diag(j/n)`, `j = 1..n`, for the unitary target `e^{iτH}v`.
pub fn diagonal_skew(n: usize, seed: u64) -> Result<TestProblem> {
    if n == 0 {
        return Err(domain("dimension must be at least 1", 0.0));
    }
    let d: Vec<f64> = (1..=n).map(|j| j as f64 / n as f64).collect();
    let entries: Vec<C64> = d.iter().map(|&x| C64::new(x, 0.0)).collect();
    let operator = SparseMatrix::diagonal(&entries).with_norm(1.0).with_structure(Structure::Hermitian);
    Ok(TestProblem {
        operator,
        v: random_unit_vector(n, seed),
        reference: Reference::Diagonal(d),
        propagation: Propagation::Unitary,
        box_exact: Some(SpectralBox::new(1.0 / n as f64, 1.0, 0.0)?),
        disk: None,
    })
}

/// The square `[1 − √2/2, 1 + √2/2]×[−√2/2, √2/2]` inside `|z − 1| < 1`.
pub fn example1_box() -> SpectralBox {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    SpectralBox { a: 1.0 - h, b: 1.0 + h, c: h }
}

/// The 31×31 lattice in [`example1_box`], with the enclosing disk of radius 1.
pub fn example1(seed: u64) -> Result<TestProblem> {
    let mut p = lattice_normal_matrix(31, example1_box(), 0.0, seed)?;
    p.disk = Some(1.0);
    Ok(p)
}

/// The 31×31 lattice in [`example2_box`]`(m)`.
pub fn example2(m: f64, seed: u64) -> Result<TestProblem> {
    lattice_normal_matrix(31, example2_box(m)?, 0.0, seed)
}

/// The 31×31 lattice in `[σ, 2 + σ]×[−1, 1]`.
pub fn example2_shifted(sigma: f64, seed: u64) -> Result<TestProblem> {
    lattice_normal_matrix(31, SpectralBox::new(0.0, 2.0, 1.0)?, sigma, seed)
}

/// Convection–diffusion on the 20×20 interior grid.
pub fn example3(seed: u64) -> Result<TestProblem> {
    convection_diffusion(20, seed)
}

/// `diag(j/1000)` with the unitary target.
pub fn example4(seed: u64) -> Result<TestProblem> {
    diagonal_skew(1000, seed)
}

fn target_exponent(p: &TestProblem, tau: f64) -> C64 {
    match p.propagation {
        Propagation::Decay => C64::new(-tau, 0.0),
        Propagation::Unitary => C64::new(0.0, tau),
    }
}

/// The exact `w(τ)` for the problem's start vector.
pub fn reference_solution(p: &TestProblem, tau: f64) -> Result<Vec<C64>> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(domain("time step must be finite and nonnegative", tau));
    }
    let z = target_exponent(p, tau);
    let v = &p.v;
    match &p.reference {
        Reference::Blocks(blocks) => {
            let mut w = Vec::with_capacity(v.len());
            for (p_idx, &(x, y)) in blocks.iter().enumerate() {
                // e^{zB} = e^{zx}[[cos zy, sin zy], [−sin zy, cos zy]]
                let scale = (z * x).exp();
                let (cos, sin) = ((z * y).cos(), (z * y).sin());
                let (u0, u1) = (v[2 * p_idx], v[2 * p_idx + 1]);
                w.push(scale * (cos * u0 + sin * u1));
                w.push(scale * (-sin * u0 + cos * u1));
            }
            Ok(w)
        }
        Reference::Diagonal(d) => Ok(d.iter().zip(v).map(|(&x, u)| (z * x).exp() * u).collect()),
        Reference::DenseExpm => {
            let a = p.operator.to_dense();
            let e = dense_expm(&(a * z))?;
            Ok((e * DVector::from_column_slice(v)).iter().copied().collect())
        }
    }
}
