//! Two-point spin correlations.
//!
//! Two routes: the exact trace on the `(2M+1) × (2N+1)` torus, computed by the
//! oracle, and the spectral sum on the semi-infinite cylinder, in which the
//! anti-periodic vacuum dominates both ends and the intermediate states run
//! over periodic excitations:
//!
//! ```text
//! ⟨σ σ⟩_r = e^{r/2 Σ(γ_P − γ_A)} Σ_{J even} |⟨0_A, σ J_P⟩|² e^{−r Σ_J γ_P}.
//! ```
//!
//! The elements `⟨0_A, σ J_P⟩` are the row-frame Pfaffian ratios scaled by
//! the one-point value.

use serde::Serialize;

use crate::blfactor::CylinderParams;
use crate::error::{domain, Error, Result};
use crate::oracle::{OracleSpace, DEFAULT_MAX_M};
use crate::pfaffian::SubsetPair;
use crate::rotation::Frame;
use crate::spectral::{self, CouplingParams, Sector};
use crate::spinme;

/// Largest number of subsets the cylinder sum will enumerate.
pub const MAX_CYLINDER_TERMS: u64 = 1 << 22;

/// How a correlation is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CorrelationPath {
    TorusTrace,
    CylinderSum,
}

/// A request for `⟨σ_{row 0, col i} σ_{row r, col j}⟩`.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationRequest {
    pub m: usize,
    pub n_half: usize,
    pub params: CouplingParams,
    pub rowsep: usize,
    pub i: i64,
    pub j: i64,
    pub path: CorrelationPath,
    /// Excitation cap for the cylinder path: at most `2·max_k` modes.
    pub max_k: usize,
}

/// Evaluate a request along its path.
pub fn evaluate(req: &CorrelationRequest) -> Result<f64> {
    match req.path {
        CorrelationPath::TorusTrace => torus_two_point(req),
        CorrelationPath::CylinderSum => {
            if req.i != req.j {
                return Err(Error::Unsupported(
                    "the cylinder sum is implemented for equal columns only".into(),
                ));
            }
            Ok(cylinder_two_point(&req.params, req.m, req.rowsep, req.max_k)?.value)
        }
    }
}

/// Torus correlation from the oracle trace formula.
pub fn torus_two_point(req: &CorrelationRequest) -> Result<f64> {
    if req.m > DEFAULT_MAX_M {
        return Err(Error::Capacity(format!(
            "the torus path needs the oracle, limited to M <= {DEFAULT_MAX_M}, got {}",
            req.m
        )));
    }
    if req.rowsep == 0 || req.rowsep > 2 * req.n_half {
        return domain(format!("row separation must lie in 1..={}, got {}", 2 * req.n_half, req.rowsep));
    }
    let space = OracleSpace::build(req.m, &req.params)?;
    space.two_point_trace(req.n_half, req.i, req.j, req.rowsep)
}

/// Where the one-point value of the cylinder path came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OnePointSource {
    /// `|⟨0_A, σ 0_P⟩|` from the oracle eigenvectors.
    Oracle,
    /// `√(ξ ξ_T)` from the product formula.
    ProductFormula,
}

/// Result of the cylinder spectral sum.
#[derive(Debug, Clone, Serialize)]
pub struct CylinderCorrelation {
    pub m: usize,
    pub rowsep: usize,
    pub max_k: usize,
    pub value: f64,
    pub one_point: f64,
    pub one_point_source: OnePointSource,
    /// Contribution of each excitation level `0, 2, 4, …`.
    pub level_sums: Vec<f64>,
    /// Estimate of the omitted levels; zero when nothing was truncated.
    pub tail_estimate: f64,
    pub terms: u64,
    /// True when every term came out non-negative (always so for moduli).
    pub nonnegative: bool,
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// One-point value `|⟨0_A, σ 0_P⟩|`: the oracle when `M ≤ 3`, else `√(ξξ_T)`.
pub fn one_point(params: &CouplingParams, m: usize) -> Result<(f64, OnePointSource)> {
    if m <= 3 {
        let space = OracleSpace::build(m, params)?;
        Ok((space.exact_spin_elements(Frame::Row)?.vacuum, OnePointSource::Oracle))
    } else {
        Ok((CylinderParams::new(params, m)?.vacuum(), OnePointSource::ProductFormula))
    }
}

/// The cylinder sum over even periodic subsets with at most `2·max_k` modes.
pub fn cylinder_two_point(params: &CouplingParams, m: usize, rowsep: usize, max_k: usize) -> Result<CylinderCorrelation> {
    if rowsep == 0 {
        return domain("row separation must be positive");
    }
    if max_k > m {
        return domain(format!("excitation cap {max_k} exceeds M = {m}"));
    }
    let n = 2 * m + 1;
    let terms: u64 = (0..=max_k as u64).map(|k| binomial(n as u64, 2 * k)).sum();
    if terms > MAX_CYLINDER_TERMS || n > 40 {
        return Err(Error::Capacity(format!(
            "cylinder sum would enumerate {terms} subsets; the limit is {MAX_CYLINDER_TERMS}"
        )));
    }
    let (vac, source) = one_point(params, m)?;
    let table = spinme::table_for(params, m, Frame::Row)?;
    let gp = spectral::gammas(params, m, Sector::P)?;
    let ga = spectral::gammas(params, m, Sector::A)?;
    let r = rowsep as f64;
    let log_pref = 0.5 * r * (gp.iter().sum::<f64>() - ga.iter().sum::<f64>());

    let mut level_sums = vec![0.0; max_k + 1];
    let mut nonnegative = true;
    for mask in 0u64..1 << n {
        let bits = mask.count_ones() as usize;
        if bits % 2 != 0 || bits > 2 * max_k {
            continue;
        }
        let ratio = table.spin_ratio(&SubsetPair::from_masks(0, mask, m))?;
        let energy: f64 = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| gp[b]).sum();
        let term = ratio.norm_sqr() * (log_pref - r * energy).exp();
        nonnegative &= term >= 0.0;
        level_sums[bits / 2] += term;
    }
    let scale = vac * vac;
    for s in level_sums.iter_mut() {
        *s *= scale;
    }
    let value = level_sums.iter().sum();
    let tail_estimate = if max_k == m {
        0.0
    } else if max_k == 0 {
        // No ratio to extrapolate from: bound each two-mode term by the
        // vacuum term times e^{−2rγ_min}.
        let gmin = gp.iter().cloned().fold(f64::INFINITY, f64::min);
        level_sums[0] * binomial(n as u64, 2) as f64 * (-2.0 * r * gmin).exp()
    } else {
        // Geometric extrapolation from the last two levels.
        level_sums[max_k] * level_sums[max_k] / level_sums[max_k - 1]
    };
    Ok(CylinderCorrelation {
        m,
        rowsep,
        max_k,
        value,
        one_point: vac,
        one_point_source: source,
        level_sums,
        tail_estimate,
        terms,
        nonnegative,
    })
}
