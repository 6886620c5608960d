//! Couplings, spectral points and the closed-form transfer-matrix spectrum.
//!
//! A row of the lattice has `n = 2M+1` sites. The transfer matrix splits into
//! two blocks, one diagonalised by Fourier modes on the periodic points
//! `z^n = 1` and one on the anti-periodic points `z^n = -1`. Each mode `z`
//! carries a single-particle energy `γ(z) > 0` given by
//!
//! ```text
//! cosh γ(z) = c₂* c₁ − s₂* s₁ (z + z⁻¹)/2
//! ```
//!
//! and the block eigenvalues are `exp(½ Σ ±γ(z))` with an even number of
//! minus signs.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{capacity, domain, Result};

/// Largest `M` for which [`enumerate_eigenvalues`] materialises the full list.
pub const MAX_ENUMERATE_M: usize = 12;

/// The two boundary sectors of the transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sector {
    /// Periodic points, `z^(2M+1) = 1`. Realised on the `U = −1` subspace.
    P,
    /// Anti-periodic points, `z^(2M+1) = −1`. Realised on the `U = +1` subspace.
    A,
}

impl Sector {
    /// Offset added to the integer index before scaling to an angle.
    pub fn offset(self) -> f64 {
        match self {
            Sector::P => 0.0,
            Sector::A => 0.5,
        }
    }

    /// Value of `z^(2M+1)` for points of this sector.
    pub fn wrap_sign(self) -> f64 {
        match self {
            Sector::P => 1.0,
            Sector::A => -1.0,
        }
    }

    /// Position (0-based) of the point `1/z_k` when `z_k` has position `pos`.
    ///
    /// Periodic points are closed under `k ↦ −k`, anti-periodic points under
    /// `k ↦ −k−1`.
    pub fn mirror(self, pos: usize, n: usize) -> usize {
        match self {
            Sector::P => n - 1 - pos,
            Sector::A => (2 * n - 2 - pos) % n,
        }
    }
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sector::P => write!(f, "P"),
            Sector::A => write!(f, "A"),
        }
    }
}

/// Reduced couplings and every derived quantity used downstream.
///
/// `c_j = cosh 2K_j`, `s_j = sinh 2K_j`, and starred fields belong to the dual
/// couplings defined by `sinh 2K_j* · sinh 2K_j = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingParams {
    pub k1: f64,
    pub k2: f64,
    pub c1: f64,
    pub s1: f64,
    pub c2: f64,
    pub s2: f64,
    pub c1s: f64,
    pub s1s: f64,
    pub c2s: f64,
    pub s2s: f64,
    /// Dual coupling `K₁*`.
    pub k1s: f64,
    /// Dual coupling `K₂*`.
    pub k2s: f64,
    /// Inner branch point `e^{2(K₂−K₁*)}`.
    pub alpha1: f64,
    /// Outer branch point `e^{2(K₂+K₁*)}`.
    pub alpha2: f64,
    /// Elliptic modulus `1/(s₁ s₂)`.
    pub k_mod: f64,
    /// True below the critical temperature, i.e. when `alpha1 > 1`.
    pub subcritical: bool,
}

impl CouplingParams {
    /// Derive all quantities from positive couplings `K₁` (horizontal) and `K₂`
    /// (vertical).
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        if !(k1 > 0.0 && k1.is_finite() && k2 > 0.0 && k2.is_finite()) {
            return domain(format!(
                "couplings must be positive and finite, got K1={k1}, K2={k2}"
            ));
        }
        let (s1, c1) = ((2.0 * k1).sinh(), (2.0 * k1).cosh());
        let (s2, c2) = ((2.0 * k2).sinh(), (2.0 * k2).cosh());
        let (s1s, c1s) = (1.0 / s1, c1 / s1);
        let (s2s, c2s) = (1.0 / s2, c2 / s2);
        let k1s = 0.5 * s1s.asinh();
        let k2s = 0.5 * s2s.asinh();
        let alpha1 = (2.0 * (k2 - k1s)).exp();
        let alpha2 = (2.0 * (k2 + k1s)).exp();
        Ok(Self {
            k1,
            k2,
            c1,
            s1,
            c2,
            s2,
            c1s,
            s1s,
            c2s,
            s2s,
            k1s,
            k2s,
            alpha1,
            alpha2,
            k_mod: 1.0 / (s1 * s2),
            subcritical: alpha1 > 1.0,
        })
    }

    /// Isotropic couplings `K₁ = K₂ = k`.
    pub fn isotropic(k: f64) -> Result<Self> {
        Self::new(k, k)
    }

    /// Parameters of the dual model `(K₁*, K₂*)`.
    pub fn dual(&self) -> Result<Self> {
        Self::new(self.k1s, self.k2s)
    }

    /// True when `K₁ = K₂` up to round-off.
    pub fn is_isotropic(&self) -> bool {
        (self.k1 - self.k2).abs() <= 1e-12 * self.k1.max(self.k2)
    }

    pub(crate) fn require_subcritical(&self) -> Result<()> {
        if self.subcritical {
            Ok(())
        } else {
            domain(format!(
                "K1={}, K2={} is not below the critical temperature (alpha1={} <= 1)",
                self.k1, self.k2, self.alpha1
            ))
        }
    }
}

/// The isotropic critical coupling `½ asinh 1`.
pub fn critical_coupling() -> f64 {
    0.5 * 1f64.asinh()
}

/// One point of `Σ_P` or `Σ_A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub sector: Sector,
    /// Index in `−M..=M`.
    pub k: i64,
    pub theta: f64,
    pub z: Complex64,
}

/// The `2M+1` points of a sector, indices ascending from `−M`.
pub fn spectral_points(m: usize, sector: Sector) -> Vec<SpectralPoint> {
    let n = 2 * m + 1;
    let mi = m as i64;
    (-mi..=mi)
        .map(|k| {
            let theta = 2.0 * PI * (k as f64 + sector.offset()) / n as f64;
            SpectralPoint {
                sector,
                k,
                theta,
                z: Complex64::from_polar(1.0, theta),
            }
        })
        .collect()
}

/// Right-hand side of the dispersion relation, `cosh γ(z)`.
pub fn cosh_gamma(params: &CouplingParams, z: Complex64) -> Complex64 {
    let half_sum = (z + z.inv()) * 0.5;
    Complex64::new(params.c2s * params.c1, 0.0) - half_sum * (params.s2s * params.s1)
}

/// Single-mode energy `γ(z) > 0` for `|z| = 1`.
pub fn gamma(params: &CouplingParams, z: Complex64) -> Result<f64> {
    if (z.norm() - 1.0).abs() > 1e-12 {
        return domain(format!("gamma needs |z| = 1, got |z| = {}", z.norm()));
    }
    let x = cosh_gamma(params, z).re;
    if x < 1.0 + 1e-10 {
        return domain(format!(
            "cosh(gamma) = {x} is not above 1 at z = {z}; the couplings are critical or supercritical"
        ));
    }
    Ok((x + (x * x - 1.0).sqrt()).ln())
}

/// Principal square root of `α_j − z`.
fn branch_sqrt(alpha: f64, z: Complex64) -> Complex64 {
    (Complex64::new(alpha, 0.0) - z).sqrt()
}

/// Half-weight `a(z)` with `a² = 𝒜₁𝒜₂(z) / 𝒜₁𝒜₂(z⁻¹)`, `𝒜_j(z) = √(α_j − z)`.
///
/// Every square root is principal. On the unit circle `|a| = 1`,
/// `a(1/z) = 1/a(z)` and `a(1) > 0`.
pub fn a_weight(params: &CouplingParams, z: Complex64) -> Result<Complex64> {
    params.require_subcritical()?;
    let zi = z.inv();
    for alpha in [params.alpha1, params.alpha2] {
        for w in [z, zi] {
            if (Complex64::new(alpha, 0.0) - w).norm() < 1e-14 {
                return domain(format!("z = {z} sits on the branch point {alpha}"));
            }
        }
    }
    let num = branch_sqrt(params.alpha1, z) * branch_sqrt(params.alpha2, z);
    let den = branch_sqrt(params.alpha1, zi) * branch_sqrt(params.alpha2, zi);
    Ok((num / den).sqrt())
}

/// `w(z) = i z⁻¹ a(z)²`, the off-diagonal phase of the induced rotation.
pub fn w_weight(params: &CouplingParams, z: Complex64) -> Result<Complex64> {
    let a = a_weight(params, z)?;
    Ok(Complex64::i() * z.inv() * a * a)
}

/// Per-point data for one sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaEntry {
    pub point: SpectralPoint,
    pub gamma: f64,
    pub a: Complex64,
    pub w: Complex64,
}

/// `γ`, `a` and `w` at every point of a sector.
pub fn gamma_table(params: &CouplingParams, m: usize, sector: Sector) -> Result<Vec<GammaEntry>> {
    params.require_subcritical()?;
    spectral_points(m, sector)
        .into_iter()
        .map(|point| {
            Ok(GammaEntry {
                point,
                gamma: gamma(params, point.z)?,
                a: a_weight(params, point.z)?,
                w: w_weight(params, point.z)?,
            })
        })
        .collect()
}

/// `γ` at every point of a sector, indices ascending.
pub fn gammas(params: &CouplingParams, m: usize, sector: Sector) -> Result<Vec<f64>> {
    params.require_subcritical()?;
    spectral_points(m, sector)
        .iter()
        .map(|p| gamma(params, p.z))
        .collect()
}

/// `log λ₀ = ½ Σ γ(z)` over the sector.
pub fn log_largest_eigenvalue(params: &CouplingParams, m: usize, sector: Sector) -> Result<f64> {
    Ok(0.5 * gammas(params, m, sector)?.iter().sum::<f64>())
}

/// Largest eigenvalue `λ₀ = Π e^{γ(z)/2}` of the sector block.
pub fn largest_eigenvalue(params: &CouplingParams, m: usize, sector: Sector) -> Result<f64> {
    Ok(log_largest_eigenvalue(params, m, sector)?.exp())
}

/// Iterator over the block eigenvalues, one per even subset of modes.
///
/// Bit `i` of a mask flips the sign of mode `i` (index `i − M`), i.e. marks it
/// as excited. The value for a mask `S` is `λ₀ exp(−Σ_{S} γ)`.
#[derive(Debug, Clone)]
pub struct EigenvalueIter {
    log_lambda0: f64,
    gammas: Vec<f64>,
    next_mask: u64,
    end: u64,
}

impl Iterator for EigenvalueIter {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        while self.next_mask < self.end {
            let mask = self.next_mask;
            self.next_mask += 1;
            if mask.count_ones() % 2 == 0 {
                let excited: f64 = (0..self.gammas.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| self.gammas[i])
                    .sum();
                return Some((mask, (self.log_lambda0 - excited).exp()));
            }
        }
        None
    }
}

/// Streaming enumeration of the sector spectrum, labelled by excitation mask.
pub fn eigenvalue_iter(params: &CouplingParams, m: usize, sector: Sector) -> Result<EigenvalueIter> {
    let n = 2 * m + 1;
    if n > 63 {
        return capacity(format!("M = {m} needs more than 63 mode bits"));
    }
    let gammas = gammas(params, m, sector)?;
    Ok(EigenvalueIter {
        log_lambda0: 0.5 * gammas.iter().sum::<f64>(),
        gammas,
        next_mask: 0,
        end: 1u64 << n,
    })
}

/// All `2^{2M}` eigenvalues of the sector block, in descending order.
pub fn enumerate_eigenvalues(params: &CouplingParams, m: usize, sector: Sector) -> Result<Vec<f64>> {
    if m > MAX_ENUMERATE_M {
        return capacity(format!(
            "enumerating 2^{} eigenvalues exceeds the M <= {MAX_ENUMERATE_M} guard; use eigenvalue_iter",
            2 * m
        ));
    }
    let mut values: Vec<f64> = eigenvalue_iter(params, m, sector)?.map(|(_, v)| v).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Labelled spectrum: `(mask, eigenvalue)` pairs, descending by eigenvalue.
pub fn enumerate_labelled(params: &CouplingParams, m: usize, sector: Sector) -> Result<Vec<(u64, f64)>> {
    if m > MAX_ENUMERATE_M {
        return capacity(format!("M = {m} exceeds the M <= {MAX_ENUMERATE_M} guard"));
    }
    let mut values: Vec<(u64, f64)> = eigenvalue_iter(params, m, sector)?.collect();
    values.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(values)
}
