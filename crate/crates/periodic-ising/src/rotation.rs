//! Induced rotations, the tilted eigenbases and the spin-operator blocks.
//!
//! The sequence space `W` of the Clifford generators is `2(2M+1)`-dimensional.
//! In Fourier coordinates on a sector, a vector is a pair of functions
//! `(X(z), Y(z))` on the sector's points, stored as one column
//! `[X(z₀), …, X(z_{n−1}), Y(z₀), …, Y(z_{n−1})]` with the points in index
//! order `−M..=M`. Two pairings are used:
//!
//! * the Hermitian product `⟨u, v⟩ = Σ_z conj(X)X' + conj(Y)Y'`;
//! * the bilinear form `(u, v) = Σ_z X(z)X'(1/z) + Y(z)Y'(1/z)`.
//!
//! The blocks `A, B, C, D` express the spin operator's induced rotation
//! between the periodic and anti-periodic tilted bases. Two frames exist:
//! [`Frame::Symmetric`] describes `σ_M` against `V₂^{1/2} V₁ V₂^{1/2}` and
//! matches the closed forms; [`Frame::Row`] describes the same spin against
//! `V₁^{1/2} V₂ V₁^{1/2}`, whose eigenvectors are those of the physical
//! row-to-row transfer matrix.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{capacity, Result};
use crate::spectral::{self, CouplingParams, Sector};

/// Which symmetrisation of the transfer matrix the spin operator is paired with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Frame {
    /// `V₂^{1/2} V₁ V₂^{1/2}`.
    Symmetric,
    /// `V₁^{1/2} V₂ V₁^{1/2}`.
    Row,
}

impl std::fmt::Display for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Frame::Symmetric => write!(f, "symmetric"),
            Frame::Row => write!(f, "row"),
        }
    }
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The 2×2 multiplication block of the induced rotation at `z`:
/// `[[cosh γ, w sinh γ], [conj(w) sinh γ, cosh γ]]`.
pub fn transfer_block(params: &CouplingParams, z: Complex64) -> Result<Matrix2<Complex64>> {
    let g = spectral::gamma(params, z)?;
    let w = spectral::w_weight(params, z)?;
    let (ch, sh) = (g.cosh(), g.sinh());
    Ok(Matrix2::new(re(ch), w * sh, w.conj() * sh, re(ch)))
}

/// The block conjugated by `diag(z, 1)`, whose eigenvectors are `(a, ±i/a)`.
pub fn tilde_transfer_block(params: &CouplingParams, z: Complex64) -> Result<Matrix2<Complex64>> {
    let t = transfer_block(params, z)?;
    Ok(Matrix2::new(t[(0, 0)], z * t[(0, 1)], t[(1, 0)] / z, t[(1, 1)]))
}

/// `‖T(1/z)ᵀ T(z) − I‖_max`: orthogonality under the bilinear pairing.
pub fn transfer_block_orthogonality(params: &CouplingParams, z: Complex64) -> Result<f64> {
    let t = transfer_block(params, z)?;
    let ti = transfer_block(params, z.inv())?;
    let prod = ti.transpose() * t - Matrix2::identity();
    Ok(prod.iter().fold(0.0, |a, x| a.max(x.norm())))
}

/// The eigenvectors `ẽ_{±,k}` of the tilted rotation on one sector.
///
/// `ẽ_{+,k} = (a, i a⁻¹)/√2` is supported at `z_k` (eigenvalue `e^{−γ}`);
/// `ẽ_{−,k} = (a, −i a⁻¹)/√2` is supported at `1/z_k` with `a` evaluated
/// there (eigenvalue `e^{+γ}`). For the anti-periodic sector `1/z_k` is the
/// point with index `−k−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedEigenbasis {
    pub sector: Sector,
    pub m: usize,
    pub points: Vec<Complex64>,
    /// Columns `ẽ_{+,k}` in Fourier layout.
    pub plus: DMatrix<Complex64>,
    /// Columns `ẽ_{−,k}` in Fourier layout.
    pub minus: DMatrix<Complex64>,
}

/// Build the tilted eigenbasis of a sector.
pub fn tilde_eigenbasis(params: &CouplingParams, m: usize, sector: Sector) -> Result<TiltedEigenbasis> {
    params.require_subcritical()?;
    let n = 2 * m + 1;
    let points: Vec<Complex64> = spectral::spectral_points(m, sector).iter().map(|p| p.z).collect();
    let mut plus = DMatrix::zeros(2 * n, n);
    let mut minus = DMatrix::zeros(2 * n, n);
    for k in 0..n {
        let a = spectral::a_weight(params, points[k])?;
        plus[(k, k)] = a * FRAC_1_SQRT_2;
        plus[(n + k, k)] = I / a * FRAC_1_SQRT_2;
        let kk = sector.mirror(k, n);
        let a = spectral::a_weight(params, points[kk])?;
        minus[(kk, k)] = a * FRAC_1_SQRT_2;
        minus[(n + kk, k)] = -I / a * FRAC_1_SQRT_2;
    }
    Ok(TiltedEigenbasis { sector, m, points, plus, minus })
}

impl TiltedEigenbasis {
    pub fn n(&self) -> usize {
        2 * self.m + 1
    }

    /// Bilinear pairing `(u, v) = Σ_z X(z)X'(1/z) + Y(z)Y'(1/z)`.
    pub fn bilinear(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let j = self.sector.mirror(i, n);
                u[i] * v[j] + u[n + i] * v[n + j]
            })
            .sum()
    }

    /// Worst deviation from `⟨ẽ_{±,k}, ẽ_{±,l}⟩ = δ_kl`, `⟨ẽ_{+,k}, ẽ_{−,l}⟩ = 0`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.n();
        let pp = self.plus.adjoint() * &self.plus - DMatrix::identity(n, n);
        let mm = self.minus.adjoint() * &self.minus - DMatrix::identity(n, n);
        let pm = self.plus.adjoint() * &self.minus;
        [pp, mm, pm].iter().map(crate::pfaffian::max_abs).fold(0.0, f64::max)
    }

    /// Worst deviation from `(ẽ_{+,k}, ẽ_{−,l}) = δ_kl` and `(ẽ_{±,k}, ẽ_{±,l}) = 0`.
    pub fn bilinear_residual(&self) -> f64 {
        let n = self.n();
        let col = |m: &DMatrix<Complex64>, k: usize| m.column(k).iter().copied().collect::<Vec<_>>();
        let mut worst = 0.0f64;
        for k in 0..n {
            for l in 0..n {
                let delta = if k == l { 1.0 } else { 0.0 };
                let pm = self.bilinear(&col(&self.plus, k), &col(&self.minus, l));
                let pp = self.bilinear(&col(&self.plus, k), &col(&self.plus, l));
                let mm = self.bilinear(&col(&self.minus, k), &col(&self.minus, l));
                worst = worst.max((pm - delta).norm()).max(pp.norm()).max(mm.norm());
            }
        }
        worst
    }

    /// Worst deviation from `conj(ẽ_{+,k})(1/z) = ẽ_{−,k}(z)`.
    pub fn conjugation_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                let j = self.sector.mirror(i, n);
                for off in [0, n] {
                    let lhs = self.plus[(off + j, k)].conj();
                    worst = worst.max((lhs - self.minus[(off + i, k)]).norm());
                }
            }
        }
        worst
    }

    /// Worst deviation from `T̃(z) ẽ_{±} = e^{∓γ} ẽ_{±}` at each support point.
    pub fn eigen_residual(&self, params: &CouplingParams) -> Result<f64> {
        let n = self.n();
        let mut worst = 0.0f64;
        for k in 0..n {
            for (basis, sign, support) in [
                (&self.plus, -1.0, k),
                (&self.minus, 1.0, self.sector.mirror(k, n)),
            ] {
                let z = self.points[support];
                let t = tilde_transfer_block(params, z)?;
                let g = spectral::gamma(params, z)?;
                let v = nalgebra::Vector2::new(basis[(support, k)], basis[(n + support, k)]);
                let r = t * v - v * re((sign * g).exp());
                worst = worst.max(r.norm());
            }
        }
        Ok(worst)
    }
}

/// Kernel of the spin operator from periodic to anti-periodic functions:
/// `S[l, k] = (2/n)(z_A z_P)^{−M} / (z_P − z_A)`.
pub fn spin_kernel_matrix(m: usize) -> DMatrix<Complex64> {
    kernel(m, Sector::A, Sector::P)
}

/// The same kernel with the two sectors exchanged.
pub fn reverse_kernel_matrix(m: usize) -> DMatrix<Complex64> {
    kernel(m, Sector::P, Sector::A)
}

fn kernel(m: usize, to: Sector, from: Sector) -> DMatrix<Complex64> {
    let n = 2 * m + 1;
    let zt = spectral::spectral_points(m, to);
    let zf = spectral::spectral_points(m, from);
    DMatrix::from_fn(n, n, |l, k| {
        let (a, p) = (zt[l].z, zf[k].z);
        (a * p).powi(-(m as i32)) * 2.0 / (n as f64) / (p - a)
    })
}

/// Apply the spin kernel to values of `f` on the periodic points.
pub fn spin_kernel_apply(m: usize, f: &[Complex64]) -> Vec<Complex64> {
    let s = spin_kernel_matrix(m);
    let v = nalgebra::DVector::from_column_slice(f);
    (s * v).iter().copied().collect()
}

/// `min_± ‖S' S f ∓ f‖_max` for the forward kernel `S` and the reverse `S'`.
///
/// The composite is `−I`, so the minimum is attained by the minus sign.
pub fn kernel_round_trip(m: usize, f: &[Complex64]) -> f64 {
    let back = reverse_kernel_matrix(m) * spin_kernel_matrix(m) * nalgebra::DVector::from_column_slice(f);
    let plus = back.iter().zip(f).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
    let minus = back.iter().zip(f).fold(0.0f64, |a, (x, y)| a.max((x + y).norm()));
    plus.min(minus)
}

/// The four blocks of the spin operator between the tilted bases.
///
/// Rows are anti-periodic indices, columns periodic indices, both `−M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockABCD {
    pub m: usize,
    pub frame: Frame,
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
    pub c: DMatrix<Complex64>,
    pub d: DMatrix<Complex64>,
}

/// Closed-form blocks (symmetric frame):
///
/// ```text
/// A = D = (1/n)(z_P z_A)^{−M}/(z_P − z_A) · (a_A/a_P + a_P/a_A)
/// B = −C = (1/n)(z_P z_A)^{−M}/(1 − z_P z_A) · (1/(a_A a_P) − a_A a_P)
/// ```
pub fn abcd(params: &CouplingParams, m: usize) -> Result<BlockABCD> {
    params.require_subcritical()?;
    let n = 2 * m + 1;
    let za = spectral::spectral_points(m, Sector::A);
    let zp = spectral::spectral_points(m, Sector::P);
    let aa: Vec<Complex64> = za.iter().map(|p| spectral::a_weight(params, p.z)).collect::<Result<_>>()?;
    let ap: Vec<Complex64> = zp.iter().map(|p| spectral::a_weight(params, p.z)).collect::<Result<_>>()?;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for l in 0..n {
        for k in 0..n {
            let (x, y) = (za[l].z, zp[k].z);
            let pre = (y * x).powi(-(m as i32)) / n as f64;
            a[(l, k)] = pre / (y - x) * (aa[l] / ap[k] + ap[k] / aa[l]);
            b[(l, k)] = pre / (1.0 - y * x) * ((aa[l] * ap[k]).inv() - aa[l] * ap[k]);
        }
    }
    Ok(BlockABCD { m, frame: Frame::Symmetric, c: -&b, d: a.clone(), a, b })
}

/// Map from Fourier layout on a sector to position coordinates
/// `(x_{−M}, …, x_M, y_{−M}, …, y_M)`, where `x` pairs with `q_k` and `y` with `p_k`:
/// `x_k = Σ_z X̃(z) z^{−1} z^{−k}/√n`, `y_k = Σ_z Y(z) z^{−k}/√n`.
pub fn fourier_to_position(m: usize, sector: Sector) -> DMatrix<Complex64> {
    let n = 2 * m + 1;
    let zs = spectral::spectral_points(m, sector);
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for (row, k) in (-(m as i32)..=m as i32).enumerate() {
        for (col, p) in zs.iter().enumerate() {
            let f = p.z.powi(-k) * scale;
            out[(row, col)] = f / p.z;
            out[(n + row, n + col)] = f;
        }
    }
    out
}

/// Induced rotation of the spin operator in position coordinates.
///
/// `σ_M` negates `x_M` and fixes everything else. In the row frame the spin is
/// dressed by the last-site half step, which adds the rotation
/// `[[c₂*, i s₂*], [−i s₂*, c₂*]]` on `(x_M, y_M)` with `c₂* = cosh 2K₂*`,
/// `s₂* = sinh 2K₂*`.
pub fn spin_rotation_position(params: &CouplingParams, m: usize, frame: Frame) -> DMatrix<Complex64> {
    let n = 2 * m + 1;
    let (ix, iy) = (2 * m, n + 2 * m);
    let mut t = DMatrix::<Complex64>::identity(2 * n, 2 * n);
    t[(ix, ix)] = re(-1.0);
    if frame == Frame::Row {
        let mut g = DMatrix::<Complex64>::identity(2 * n, 2 * n);
        g[(ix, ix)] = re(params.c2s);
        g[(ix, iy)] = I * params.s2s;
        g[(iy, ix)] = -I * params.s2s;
        g[(iy, iy)] = re(params.c2s);
        t *= g;
    }
    t
}

/// Blocks computed by projecting the spin rotation onto the tilted bases,
/// `A = ⟨ẽ^A_+, T ẽ^P_+⟩`, `B = ⟨ẽ^A_+, T ẽ^P_−⟩`, `C = ⟨ẽ^A_−, T ẽ^P_+⟩`,
/// `D = ⟨ẽ^A_−, T ẽ^P_−⟩`.
pub fn abcd_projected(params: &CouplingParams, m: usize, frame: Frame) -> Result<BlockABCD> {
    let ea = tilde_eigenbasis(params, m, Sector::A)?;
    let ep = tilde_eigenbasis(params, m, Sector::P)?;
    let fa = fourier_to_position(m, Sector::A);
    let fp = fourier_to_position(m, Sector::P);
    let t = spin_rotation_position(params, m, frame);
    let (ap, am) = (&fa * &ea.plus, &fa * &ea.minus);
    let (pp, pm) = (&t * (&fp * &ep.plus), &t * (&fp * &ep.minus));
    Ok(BlockABCD {
        m,
        frame,
        a: ap.adjoint() * &pp,
        b: ap.adjoint() * &pm,
        c: am.adjoint() * &pp,
        d: am.adjoint() * &pm,
    })
}

/// Residuals of the complex-orthogonality identities of the blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalityResiduals {
    /// `‖DᵀA + BᵀC − I‖_max`.
    pub dta_btc: f64,
    /// `‖DᵀB + BᵀD‖_max`.
    pub dtb_btd: f64,
    /// `‖CᵀA + AᵀC‖_max`.
    pub cta_atc: f64,
    /// `‖CᵀB + AᵀD − I‖_max`.
    pub ctb_atd: f64,
    /// `‖DᵀA + BᵀCᵀ − I‖_max`, the first identity with a stray transpose.
    pub literal_first: f64,
}

impl OrthogonalityResiduals {
    /// Worst of the four identities (the literal variant excluded).
    pub fn max(&self) -> f64 {
        self.dta_btc.max(self.dtb_btd).max(self.cta_atc).max(self.ctb_atd)
    }
}

impl BlockABCD {
    pub fn orthogonality(&self) -> OrthogonalityResiduals {
        let n = 2 * self.m + 1;
        let id = DMatrix::<Complex64>::identity(n, n);
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let mx = crate::pfaffian::max_abs;
        OrthogonalityResiduals {
            dta_btc: mx(&(d.transpose() * a + b.transpose() * c - &id)),
            dtb_btd: mx(&(d.transpose() * b + b.transpose() * d)),
            cta_atc: mx(&(c.transpose() * a + a.transpose() * c)),
            ctb_atd: mx(&(c.transpose() * b + a.transpose() * d - &id)),
            literal_first: mx(&(d.transpose() * a + b.transpose() * c.transpose() - &id)),
        }
    }

    /// Largest entrywise difference to another set of blocks.
    pub fn max_difference(&self, other: &BlockABCD) -> f64 {
        let mx = crate::pfaffian::max_abs;
        mx(&(&self.a - &other.a))
            .max(mx(&(&self.b - &other.b)))
            .max(mx(&(&self.c - &other.c)))
            .max(mx(&(&self.d - &other.d)))
    }

    /// 1-norm condition number estimate of `D` from its explicit inverse.
    pub fn d_condition(&self) -> Option<f64> {
        let inv = self.d.clone().try_inverse()?;
        Some(one_norm(&self.d) * one_norm(&inv))
    }
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Determinants of the matrices in the proof that `V` is block diagonal
/// with unit-determinant blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProofDeterminants {
    pub m: usize,
    /// `det ℱ_P` with `ℱ[l, k] = z_k^l / √n`.
    pub det_fp: Complex64,
    /// `det(ℱ_P ⊕ ℱ_P)` in the interleaved layout.
    pub det_fpfp: Complex64,
    pub det_fa: Complex64,
    pub det_fafa: Complex64,
    pub det_r1p: Complex64,
    pub det_r1a: Complex64,
    pub det_r2p: Complex64,
    pub det_r2a: Complex64,
    /// `det(√2 I)` of size `2n`.
    pub det_r3: Complex64,
    /// Determinant of the composite `R₃ R₂ R₁ (ℱ ⊕ ℱ)` on the periodic sector.
    pub det_rp: Complex64,
    pub det_ra: Complex64,
    /// Sign of the permutation taking the block layout `(x…, y…)` to the
    /// interleaved layout `(x₋M, y₋M, …)`.
    pub interleave_parity: i32,
}

/// Values the determinants must take.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedDeterminants {
    pub det_f: Complex64,
    pub det_ff: Complex64,
    pub det_r1p: Complex64,
    pub det_r1a: Complex64,
    pub det_r2: Complex64,
    pub det_rp: Complex64,
    pub det_ra: Complex64,
}

impl ExpectedDeterminants {
    pub fn for_m(m: usize) -> Self {
        let n = 2 * m as i32 + 1;
        let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
        let mi = Complex64::new(0.0, -1.0);
        Self {
            det_f: mi.powi(m as i32),
            det_ff: re(sign_m),
            det_r1p: I.powi(n),
            det_r1a: mi.powi(n),
            det_r2: I.powi(n) * sign_m * 2f64.powi(-n),
            det_rp: re(-1.0),
            det_ra: re(1.0),
        }
    }
}

impl ProofDeterminants {
    /// Worst absolute deviation from [`ExpectedDeterminants`].
    pub fn max_deviation(&self) -> f64 {
        let e = ExpectedDeterminants::for_m(self.m);
        [
            (self.det_fp, e.det_f),
            (self.det_fa, e.det_f),
            (self.det_fpfp, e.det_ff),
            (self.det_fafa, e.det_ff),
            (self.det_r1p, e.det_r1p),
            (self.det_r1a, e.det_r1a),
            (self.det_r2p, e.det_r2),
            (self.det_r2a, e.det_r2),
            (self.det_rp, e.det_rp),
            (self.det_ra, e.det_ra),
        ]
        .iter()
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
    }
}

/// Largest `M` for [`proof_determinants`].
pub const MAX_PROOF_M: usize = 8;

/// Build `ℱ`, `R₁`, `R₂`, `R₃` for both sectors and take determinants.
pub fn proof_determinants(params: &CouplingParams, m: usize) -> Result<ProofDeterminants> {
    if m > MAX_PROOF_M {
        return capacity(format!("proof determinants limited to M <= {MAX_PROOF_M}, got {m}"));
    }
    params.require_subcritical()?;
    let n = 2 * m + 1;
    let fourier = |sector| {
        let zs = spectral::spectral_points(m, sector);
        let s = 1.0 / (n as f64).sqrt();
        DMatrix::from_fn(n, n, |l, k| zs[k].z.powi(l as i32 - m as i32) * s)
    };
    let doubled = |f: &DMatrix<Complex64>| {
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for l in 0..n {
            for k in 0..n {
                out[(2 * l, 2 * k)] = f[(l, k)];
                out[(2 * l + 1, 2 * k + 1)] = f[(l, k)];
            }
        }
        out
    };
    let r1 = |sector| -> Result<DMatrix<Complex64>> {
        let zs = spectral::spectral_points(m, sector);
        let mut blocks = DMatrix::zeros(2 * n, 2 * n);
        for (ki, p) in zs.iter().enumerate() {
            let a = spectral::a_weight(params, p.z)?;
            let r = FRAC_1_SQRT_2;
            blocks[(2 * ki, 2 * ki)] = a * r;
            blocks[(2 * ki, 2 * ki + 1)] = a * r;
            blocks[(2 * ki + 1, 2 * ki)] = I * p.z / a * r;
            blocks[(2 * ki + 1, 2 * ki + 1)] = -I * p.z / a * r;
        }
        blocks
            .try_inverse()
            .ok_or_else(|| crate::Error::Singular("R1 block is singular".into()))
    };
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for ki in 0..n {
        let mirror = n - 1 - ki;
        g[(2 * ki, 2 * ki)] = -I;
        g[(2 * ki, 2 * ki + 1)] = re(1.0);
        g[(2 * ki + 1, 2 * mirror)] = I;
        g[(2 * ki + 1, 2 * mirror + 1)] = re(1.0);
    }
    let r2 = g.try_inverse().ok_or_else(|| crate::Error::Singular("R2 is singular".into()))?;
    let r3 = DMatrix::<Complex64>::identity(2 * n, 2 * n) * re(2f64.sqrt());

    let (fp, fa) = (fourier(Sector::P), fourier(Sector::A));
    let (ffp, ffa) = (doubled(&fp), doubled(&fa));
    let (r1p, r1a) = (r1(Sector::P)?, r1(Sector::A)?);
    let rp = &r3 * &r2 * &r1p * &ffp;
    let ra = &r3 * &r2 * &r1a * &ffa;
    // The interleaving permutation has n(n−1)/2 inversions.
    let interleave_parity = if (n * (n - 1) / 2) % 2 == 0 { 1 } else { -1 };
    Ok(ProofDeterminants {
        m,
        det_fp: fp.determinant(),
        det_fpfp: ffp.determinant(),
        det_fa: fa.determinant(),
        det_fafa: ffa.determinant(),
        det_r1p: r1p.determinant(),
        det_r1a: r1a.determinant(),
        det_r2p: r2.determinant(),
        det_r2a: r2.determinant(),
        det_r3: r3.determinant(),
        det_rp: rp.determinant(),
        det_ra: ra.determinant(),
        interleave_parity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_has_unit_determinant() {
        let p = CouplingParams::isotropic(0.5).unwrap();
        for theta in [0.0, 0.4, 2.0, 3.1] {
            let z = Complex64::from_polar(1.0, theta);
            let t = transfer_block(&p, z).unwrap();
            assert!((t.determinant() - 1.0).norm() < 1e-12);
            assert!(transfer_block_orthogonality(&p, z).unwrap() < 1e-12);
        }
    }

    #[test]
    fn kernel_single_point() {
        let s = spin_kernel_matrix(0);
        let za = Complex64::new(-1.0, 0.0);
        assert!((s[(0, 0)] - 2.0 / (1.0 - za)).norm() < 1e-15);
    }

    #[test]
    fn closed_form_symmetries() {
        let p = CouplingParams::isotropic(0.5).unwrap();
        let b = abcd(&p, 2).unwrap();
        assert_eq!(b.a, b.d);
        assert_eq!(b.c, -&b.b);
    }
}
