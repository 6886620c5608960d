//! Spin matrix elements as Pfaffians.
//!
//! With `a = BD⁻¹`, `b = D⁻ᵀ` and `c = D⁻¹C`, the ratio of the matrix element
//! between excited states `I` (anti-periodic modes) and `J` (periodic modes)
//! to the vacuum element is `Pf R_{I,J}`, where
//!
//! ```text
//! R_{I,J} = [[ a_{I×I},      b_{I×J} ],
//!            [ −(D⁻¹)_{J×I}, c_{J×J} ]].
//! ```
//!
//! All `R_{I,J}` are principal minors of one skew matrix over the universe of
//! `2(2M+1)` modes, `[[a, b], [−bᵀ, c]]`, anti-periodic modes first.
//!
//! In the row frame each anti-periodic mode is additionally weighted by
//! `e^{γ/2}` and each periodic mode by `e^{−γ/2}`, a diagonal congruence that
//! turns the ratios into those of the physical transfer-matrix eigenvectors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::oracle::OracleSpace;
use crate::pfaffian::{self, max_abs, SkewMatrix, SubsetPair};
use crate::rotation::{self, BlockABCD, Frame};
use crate::spectral::{self, CouplingParams, Sector};

/// `D` counts as singular above this 1-norm condition number.
pub const MAX_CONDITION: f64 = 1e12;

/// The three ratio matrices and the skew universe they assemble into.
#[derive(Debug, Clone)]
pub struct SpinRatioTable {
    pub m: usize,
    pub frame: Frame,
    pub params: CouplingParams,
    /// `B D⁻¹`.
    pub a: DMatrix<Complex64>,
    /// `D⁻ᵀ`.
    pub b: DMatrix<Complex64>,
    /// `D⁻¹ C`.
    pub c: DMatrix<Complex64>,
    pub d_inv: DMatrix<Complex64>,
    pub d_condition: f64,
    /// Largest entry of `a + aᵀ` and `c + cᵀ`.
    pub skew_residual: f64,
    universe: SkewMatrix,
}

/// Build the ratio table from a set of blocks.
pub fn ratio_table(params: &CouplingParams, blocks: &BlockABCD) -> Result<SpinRatioTable> {
    let m = blocks.m;
    let n = 2 * m + 1;
    let cond = blocks.d_condition().unwrap_or(f64::INFINITY);
    if !(cond < MAX_CONDITION) {
        return Err(Error::Singular(format!(
            "D has condition number {cond:e}; the vacuum element <0_A, sigma 0_P> vanishes"
        )));
    }
    let d_inv = blocks.d.clone().try_inverse().expect("condition checked");
    let a = &blocks.b * &d_inv;
    let b = d_inv.transpose();
    let c = &d_inv * &blocks.c;
    let skew_residual = max_abs(&(&a + a.transpose())).max(max_abs(&(&c + c.transpose())));

    let weights: Vec<f64> = match blocks.frame {
        Frame::Symmetric => vec![1.0; 2 * n],
        Frame::Row => {
            let ga = spectral::gammas(params, m, Sector::A)?;
            let gp = spectral::gammas(params, m, Sector::P)?;
            ga.iter().map(|g| (0.5 * g).exp()).chain(gp.iter().map(|g| (-0.5 * g).exp())).collect()
        }
    };
    let mut u = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for s in 0..n {
            u[(r, s)] = a[(r, s)];
            u[(r, n + s)] = b[(r, s)];
            u[(n + r, s)] = -b[(s, r)];
            u[(n + r, n + s)] = c[(r, s)];
        }
    }
    for r in 0..2 * n {
        for s in 0..2 * n {
            u[(r, s)] *= weights[r] * weights[s];
        }
    }
    let universe = SkewMatrix::with_tolerance(u, 1e-8)?;
    Ok(SpinRatioTable {
        m,
        frame: blocks.frame,
        params: *params,
        a,
        b,
        c,
        d_inv,
        d_condition: cond,
        skew_residual,
        universe,
    })
}

/// Ratio table in the requested frame, from the closed forms or projections.
pub fn table_for(params: &CouplingParams, m: usize, frame: Frame) -> Result<SpinRatioTable> {
    let blocks = match frame {
        Frame::Symmetric => rotation::abcd(params, m)?,
        Frame::Row => rotation::abcd_projected(params, m, Frame::Row)?,
    };
    ratio_table(params, &blocks)
}

impl SpinRatioTable {
    /// The skew universe `[[a, b], [−bᵀ, c]]` with frame weights applied.
    pub fn universe(&self) -> &SkewMatrix {
        &self.universe
    }

    /// Anti-periodic/anti-periodic block of the weighted universe.
    pub fn weighted_a(&self) -> DMatrix<Complex64> {
        let n = 2 * self.m + 1;
        self.universe.matrix().view((0, 0), (n, n)).into_owned()
    }

    /// Anti-periodic/periodic block of the weighted universe.
    pub fn weighted_b(&self) -> DMatrix<Complex64> {
        let n = 2 * self.m + 1;
        self.universe.matrix().view((0, n), (n, n)).into_owned()
    }

    /// Periodic/periodic block of the weighted universe.
    pub fn weighted_c(&self) -> DMatrix<Complex64> {
        let n = 2 * self.m + 1;
        self.universe.matrix().view((n, n), (n, n)).into_owned()
    }

    /// `Pf R_{I,J}`: the element ratio for excitations `I` and `J`.
    pub fn spin_ratio(&self, pair: &SubsetPair) -> Result<Complex64> {
        if !pair.is_even() {
            return domain(format!(
                "spin ratio needs #I + #J even, got {} + {}",
                pair.i.len(),
                pair.j.len()
            ));
        }
        pfaffian::sub_pfaffian(&self.universe, pair)
    }

    /// `‖D⁻ᵀ Dᵀ − I‖_max`, the inversion contract.
    pub fn inverse_residual(&self, blocks: &BlockABCD) -> f64 {
        let n = 2 * self.m + 1;
        max_abs(&(&self.b * blocks.d.transpose() - DMatrix::identity(n, n)))
    }
}

/// Outcome of comparing Pfaffian ratios with the oracle.
#[derive(Debug, Clone, Serialize)]
pub struct CrossValidation {
    pub m: usize,
    pub frame: Frame,
    /// Worst relative deviation of the moduli.
    pub worst: f64,
    /// Pairs compared one by one.
    pub single: usize,
    /// Pairs of indistinguishable label classes compared through sums of squares.
    pub class_pairs: usize,
    /// `|⟨0_A, σ_M 0_P⟩|` from the oracle.
    pub vacuum: f64,
}

/// Compare `|Pf R_{I,J}|` with `|⟨v_A(I), σ_M v_P(J)⟩| / |⟨0_A, σ_M 0_P⟩|`
/// for all even `I`, `J` with `#I + #J ≤ 4`, `M ≤ 3`.
///
/// The oracle eigenvectors come from the transfer matrix matching `frame`.
/// Sets that share energy and momentum with their mirror image cannot be
/// separated by the oracle; for those the sum of squared moduli over the
/// class is compared instead.
pub fn cross_validate_oracle(params: &CouplingParams, m: usize, frame: Frame) -> Result<CrossValidation> {
    if m > 3 {
        return Err(Error::Capacity(format!("oracle cross-validation limited to M <= 3, got {m}")));
    }
    let space = OracleSpace::build(m, params)?;
    let exact = space.exact_spin_elements(frame)?;
    let table = table_for(params, m, frame)?;
    let n = 2 * m + 1;
    let even: Vec<u64> = (0..1u64 << n).filter(|s| s.count_ones() % 2 == 0).collect();
    let ratio = |ma: u64, mp: u64| -> Result<f64> {
        Ok(table.spin_ratio(&SubsetPair::from_masks(ma, mp, m))?.norm())
    };
    let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1e-300);
    let mut worst = 0.0f64;
    let (mut single, mut class_pairs) = (0, 0);
    let mut seen = std::collections::HashSet::new();
    for &ma in &even {
        for &mp in &even {
            if ma.count_ones() + mp.count_ones() > 4 {
                continue;
            }
            match exact.modulus(ma, mp)? {
                Some(x) => {
                    worst = worst.max(rel(x / exact.vacuum, ratio(ma, mp)?));
                    single += 1;
                }
                None => {
                    let key = (exact.a.class_of(ma)?, exact.p.class_of(mp)?);
                    if !seen.insert(key) {
                        continue;
                    }
                    let (sum, masks_a, masks_p) = exact.class_sum(ma, mp)?;
                    let mut want = 0.0;
                    for &x in &masks_a {
                        for &y in &masks_p {
                            want += ratio(x, y)?.powi(2);
                        }
                    }
                    worst = worst.max(rel(sum / exact.vacuum.powi(2), want));
                    class_pairs += 1;
                }
            }
        }
    }
    Ok(CrossValidation { m, frame, worst, single, class_pairs, vacuum: exact.vacuum })
}
