//! The Bugrij–Lisovyy product formula and the summability kernels `Ṽ±`.
//!
//! For isotropic couplings the spin matrix element between the excited
//! anti-periodic state `L` and periodic state `K` is
//!
//! ```text
//! ⟨L, σ K⟩ = √(ξ ξ_T) ∏_{A∈L} e^{ν(A)/2}/√(n sinh γ_A) ∏_{P∈K} e^{−ν(P)/2}/√(n sinh γ_P)
//!            × ∏_{A<A'} sin((θ_A−θ_A')/2) / sinh((γ_A+γ_A')/2)
//!            × ∏_{P<P'} sin((θ_P−θ_P')/2) / sinh((γ_P+γ_P')/2)
//!            × ∏_{A,P}  sinh((γ_A+γ_P)/2) / sin((θ_A−θ_P)/2),
//! ```
//!
//! with `ξ = |1 − s⁻⁴|^{1/4}` and `ν(θ) = log ∏_A sinh((γ+γ')/2) / ∏_P sinh((γ+γ')/2)`.
//! In the row frame this equals `√(ξξ_T)·Pf R_{L,K}` exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::EllipticContext;
use crate::error::{domain, Error, Result};
use crate::pfaffian::{self, SkewMatrix};
use crate::rotation::{self, Frame};
use crate::spectral::{self, CouplingParams, Sector};

/// Spectral data on the cylinder of circumference `n = 2M+1` for isotropic couplings.
#[derive(Debug, Clone, Serialize)]
pub struct CylinderParams {
    pub m: usize,
    pub params: CouplingParams,
    pub theta_a: Vec<f64>,
    pub theta_p: Vec<f64>,
    pub gamma_a: Vec<f64>,
    pub gamma_p: Vec<f64>,
    /// `ν` at the anti-periodic points.
    pub nu_a: Vec<f64>,
    /// `ν` at the periodic points.
    pub nu_p: Vec<f64>,
    pub xi: f64,
    pub xi_t: f64,
}

fn log_sinh_half_sum(g: f64, h: f64) -> f64 {
    (0.5 * (g + h)).sinh().ln()
}

impl CylinderParams {
    /// Collect the spectral data. Anisotropic couplings are rejected.
    pub fn new(params: &CouplingParams, m: usize) -> Result<Self> {
        if !params.is_isotropic() {
            return Err(Error::Unsupported(format!(
                "the product formula is implemented for isotropic couplings only, got K1={}, K2={}",
                params.k1, params.k2
            )));
        }
        let gamma_a = spectral::gammas(params, m, Sector::A)?;
        let gamma_p = spectral::gammas(params, m, Sector::P)?;
        let theta_a = spectral::spectral_points(m, Sector::A).iter().map(|p| p.theta).collect();
        let theta_p = spectral::spectral_points(m, Sector::P).iter().map(|p| p.theta).collect();
        let nu = |g: f64| {
            gamma_a.iter().map(|&h| log_sinh_half_sum(g, h)).sum::<f64>()
                - gamma_p.iter().map(|&h| log_sinh_half_sum(g, h)).sum::<f64>()
        };
        let nu_a = gamma_a.iter().map(|&g| nu(g)).collect();
        let nu_p = gamma_p.iter().map(|&g| nu(g)).collect();
        let xi = (1.0 - params.s1.powi(-4)).abs().powf(0.25);
        let pair_sum = |x: &[f64], y: &[f64]| -> f64 {
            x.iter().flat_map(|&g| y.iter().map(move |&h| log_sinh_half_sum(g, h))).sum()
        };
        let log_xi_t = 0.25
            * (2.0 * pair_sum(&gamma_p, &gamma_a) - pair_sum(&gamma_p, &gamma_p) - pair_sum(&gamma_a, &gamma_a));
        Ok(Self {
            m,
            params: *params,
            theta_a,
            theta_p,
            gamma_a,
            gamma_p,
            nu_a,
            nu_p,
            xi,
            xi_t: log_xi_t.exp(),
        })
    }

    pub fn n(&self) -> usize {
        2 * self.m + 1
    }

    /// `√(ξ ξ_T)`, the modulus of the vacuum element.
    pub fn vacuum(&self) -> f64 {
        (self.xi * self.xi_t).sqrt()
    }

    fn index(&self, k: i64) -> Result<usize> {
        let m = self.m as i64;
        if k < -m || k > m {
            return domain(format!("mode index {k} outside [-{m}, {m}]"));
        }
        Ok((k + m) as usize)
    }

    /// `λ(θ) = e^{γ(θ)}` on the unit circle.
    fn lambda(&self, theta: f64) -> Result<f64> {
        Ok(spectral::gamma(&self.params, Complex64::from_polar(1.0, theta))?.exp())
    }

    /// Product form of `V₊(θ)`, which equals `e^{ν(θ)/2}` on the circle.
    pub fn v_plus(&self, theta: f64) -> Result<Complex64> {
        let li = Complex64::new(self.lambda(theta)?.recip(), 0.0);
        let (l0, lpi) = (self.lambda(0.0)?, self.lambda(std::f64::consts::PI)?);
        let head = ((li - lpi) * lpi.powf(-0.5) / ((li - l0) * l0.powf(-0.5))).sqrt();
        let mut log = Complex64::new(0.0, 0.0);
        for (&t, &g) in self.theta_a.iter().zip(&self.gamma_a) {
            if t > 0.0 && t < std::f64::consts::PI - 1e-12 {
                log += ((li - g.exp()) * (-0.5 * g).exp()).ln();
            }
        }
        for (&t, &g) in self.theta_p.iter().zip(&self.gamma_p) {
            if t > 0.0 {
                log -= ((li - g.exp()) * (-0.5 * g).exp()).ln();
            }
        }
        Ok(head * log.exp())
    }

    /// Product form of `V₋(θ)`, which equals `e^{−ν(θ)/2}` on the circle.
    pub fn v_minus(&self, theta: f64) -> Result<Complex64> {
        let l = Complex64::new(self.lambda(theta)?, 0.0);
        let (l0, lpi) = (self.lambda(0.0)?, self.lambda(std::f64::consts::PI)?);
        let head = ((l - l0.recip()) * l0.sqrt() / ((l - lpi.recip()) * lpi.sqrt())).sqrt();
        let mut log = Complex64::new(0.0, 0.0);
        for (&t, &g) in self.theta_p.iter().zip(&self.gamma_p) {
            if t > 0.0 {
                log += ((l - (-g).exp()) * (0.5 * g).exp()).ln();
            }
        }
        for (&t, &g) in self.theta_a.iter().zip(&self.gamma_a) {
            if t > 0.0 && t < std::f64::consts::PI - 1e-12 {
                log -= ((l - (-g).exp()) * (0.5 * g).exp()).ln();
            }
        }
        Ok(head * log.exp())
    }

    /// The product-formula element `⟨L, σ K⟩` for anti-periodic indices `l`
    /// and periodic indices `k`, both in `[−M, M]` and strictly increasing.
    pub fn element(&self, l: &[i64], k: &[i64]) -> Result<f64> {
        if (l.len() + k.len()) % 2 != 0 {
            return domain(format!(
                "matrix element needs #L + #K even, got {} + {}",
                l.len(),
                k.len()
            ));
        }
        let la = l.iter().map(|&x| self.index(x)).collect::<Result<Vec<_>>>()?;
        let kp = k.iter().map(|&x| self.index(x)).collect::<Result<Vec<_>>>()?;
        for w in la.windows(2).chain(kp.windows(2)) {
            if w[0] >= w[1] {
                return domain("mode indices must be strictly increasing");
            }
        }
        let n = self.n() as f64;
        let mut log = 0.5 * (self.xi * self.xi_t).ln();
        let mut sign = 1.0;
        let mut acc = |x: f64| {
            if x < 0.0 {
                sign = -sign;
            }
            log += x.abs().ln();
        };
        for &i in &la {
            let g = self.gamma_a[i];
            acc((0.5 * self.nu_a[i]).exp() / (n * g.sinh()).sqrt());
        }
        for &j in &kp {
            let g = self.gamma_p[j];
            acc((-0.5 * self.nu_p[j]).exp() / (n * g.sinh()).sqrt());
        }
        for (x, &i) in la.iter().enumerate() {
            for &i2 in &la[x + 1..] {
                acc((0.5 * (self.theta_a[i] - self.theta_a[i2])).sin()
                    / (0.5 * (self.gamma_a[i] + self.gamma_a[i2])).sinh());
            }
        }
        for (x, &j) in kp.iter().enumerate() {
            for &j2 in &kp[x + 1..] {
                acc((0.5 * (self.theta_p[j] - self.theta_p[j2])).sin()
                    / (0.5 * (self.gamma_p[j] + self.gamma_p[j2])).sinh());
            }
        }
        for &i in &la {
            for &j in &kp {
                acc((0.5 * (self.gamma_a[i] + self.gamma_p[j])).sinh()
                    / (0.5 * (self.theta_a[i] - self.theta_p[j])).sin());
            }
        }
        Ok(sign * log.exp())
    }

    /// `det E · Pf s` on the uniformising cycle, with
    /// `s_ij = −√k sn(v_i − v_j)`, `v_A = −u + iK'/2`, `v_P = −u − iK'/2`,
    /// `E = diag(V₊/√(n sinh γ) on L, V₋/√(n sinh γ) on K)`.
    ///
    /// Returns the value together with the product-formula target
    /// `(−1)^{C(#L+#K, 2)} ⟨L, σ K⟩ / √(ξξ_T)`; the sign comes from the
    /// kernel identity `s₁/sn(u−u') = −sinh((γ+γ')/2)/sin((θ−θ')/2)`.
    pub fn sn_product(&self, ctx: &EllipticContext, l: &[i64], k: &[i64]) -> Result<(Complex64, f64)> {
        let target = self.element(l, k)? / self.vacuum();
        let total = l.len() + k.len();
        let sign = if (total * total.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let n = self.n() as f64;
        let half = Complex64::new(0.0, 0.5 * ctx.kp);
        let mut points = Vec::with_capacity(total);
        let mut det = Complex64::new(1.0, 0.0);
        for &x in l {
            let i = self.index(x)?;
            let theta = self.theta_a[i];
            points.push(-ctx.theta_to_u(theta)? + half);
            det *= self.v_plus(theta)? / (n * self.gamma_a[i].sinh()).sqrt();
        }
        for &x in k {
            let j = self.index(x)?;
            let theta = self.theta_p[j];
            points.push(-ctx.theta_to_u(theta)? - half);
            det *= self.v_minus(theta)? / (n * self.gamma_p[j].sinh()).sqrt();
        }
        let rk = -ctx.k_mod.sqrt();
        let mut s = DMatrix::zeros(total, total);
        for i in 0..total {
            for j in i + 1..total {
                let v = ctx.sn(points[i] - points[j])? * rk;
                s[(i, j)] = v;
                s[(j, i)] = -v;
            }
        }
        let pf = pfaffian::pfaffian(&SkewMatrix::new(s)?)?;
        Ok((det * pf, sign * target))
    }
}

/// Comparison of the product formula with the inverse of `D`.
#[derive(Debug, Clone, Serialize)]
pub struct BlComparison {
    pub m: usize,
    /// `‖Dᵀ P − I‖_F` with `P_kj = ⟨A_k, σ P_j⟩ / √(ξξ_T)` and the closed-form `D`.
    pub frobenius_raw: f64,
    /// Largest off-diagonal modulus of `Dᵀ P`.
    pub offdiag_max: f64,
    /// Largest `|(Dᵀ P)_kk − 1|`.
    pub diag_dev_max: f64,
    /// `‖|D⁻ᵀ| − |P|‖_F / ‖P‖_F`, entrywise moduli.
    pub modulus_deviation: f64,
    /// `‖G R G − P‖_F / ‖P‖_F` with `R` the row-frame ratio block `b` and
    /// `G = diag((−1)^k)`, the sign convention relating the two bases.
    pub row_frame_deviation: f64,
    /// `‖D⁻ᵀ Dᵀ − I‖_F`, the inversion self-test.
    pub self_test: f64,
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Compare the two-index product-formula elements with `D⁻ᵀ`.
///
/// The closed-form `D` belongs to the symmetric transfer matrix while the
/// product formula describes the row transfer matrix, so the raw residual
/// does not vanish; the row-frame ratios agree to round-off.
pub fn compare_bl_vs_abcd(params: &CouplingParams, m: usize) -> Result<BlComparison> {
    let cyl = CylinderParams::new(params, m)?;
    let n = 2 * m + 1;
    let mi = m as i64;
    let mut p = DMatrix::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            let v = cyl.element(&[k as i64 - mi], &[j as i64 - mi])? / cyl.vacuum();
            p[(k, j)] = Complex64::new(v, 0.0);
        }
    }
    let blocks = rotation::abcd(params, m)?;
    let dt = blocks.d.transpose();
    let dtp = &dt * &p;
    let eye = DMatrix::<Complex64>::identity(n, n);
    let frobenius_raw = frobenius(&(&dtp - &eye));
    let mut offdiag_max = 0.0f64;
    let mut diag_dev_max = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            if r == c {
                diag_dev_max = diag_dev_max.max((dtp[(r, c)] - 1.0).norm());
            } else {
                offdiag_max = offdiag_max.max(dtp[(r, c)].norm());
            }
        }
    }
    let d_inv_t = dt
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("closed-form D is not invertible".into()))?;
    let self_test = frobenius(&(&d_inv_t * &dt - &eye));
    let p_norm = frobenius(&p);
    let modulus_deviation = d_inv_t
        .iter()
        .zip(p.iter())
        .map(|(x, y)| (x.norm() - y.norm()).powi(2))
        .sum::<f64>()
        .sqrt()
        / p_norm;
    let row = crate::spinme::table_for(params, m, Frame::Row)?;
    let mut signed = row.weighted_b();
    for r in 0..n {
        for c in 0..n {
            if (r + c) % 2 == 1 {
                signed[(r, c)] = -signed[(r, c)];
            }
        }
    }
    let row_frame_deviation = frobenius(&(signed - &p)) / p_norm;
    Ok(BlComparison {
        m,
        frobenius_raw,
        offdiag_max,
        diag_dev_max,
        modulus_deviation,
        row_frame_deviation,
        self_test,
    })
}

/// Which side of the identity `Ṽ₊/(zⁿ+1) = ±Ṽ₋/(zⁿ−1)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Neighbourhood {
    /// Near `Im u = ±K'`; the `+` identity.
    Outer,
    /// Near `Im u = 0`; the `−` identity.
    Inner,
}

/// One evaluation of the factorisation identity.
#[derive(Debug, Clone, Serialize)]
pub struct FactorizationSample {
    pub u: Complex64,
    pub neighbourhood: Neighbourhood,
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|lhs − rhs| / max(|lhs|, |rhs|)`.
    pub residual: f64,
}

/// Classify `u` into the neighbourhood of width `0.1 K'` it belongs to.
pub fn neighbourhood(ctx: &EllipticContext, u: Complex64) -> Result<Neighbourhood> {
    let width = 0.1 * ctx.kp;
    if (u.im.abs() - ctx.kp).abs() <= width {
        Ok(Neighbourhood::Outer)
    } else if u.im.abs() <= width {
        Ok(Neighbourhood::Inner)
    } else {
        domain(format!(
            "u = {u} lies outside the 0.1K' neighbourhoods of Im u = 0 and Im u = ±K'"
        ))
    }
}

/// `Ṽ₊(u)` (`plus = true`) or `Ṽ₋(u)` from the λ-products over the spectral points.
pub fn v_tilde(ctx: &EllipticContext, cyl: &CylinderParams, u: Complex64, plus: bool) -> Result<Complex64> {
    let lam = ctx.uniformize(u)?.lambda;
    let pi = std::f64::consts::PI;
    let lp = |g: f64| Complex64::new(g.exp(), 0.0);
    let interior_a = cyl.theta_a.iter().zip(&cyl.gamma_a).filter(|(t, _)| **t > 0.0 && **t < pi - 1e-12);
    let interior_p = cyl.theta_p.iter().zip(&cyl.gamma_p).filter(|(t, _)| **t > 0.0);
    let l0 = cyl.lambda(0.0)?;
    let lpi = cyl.lambda(pi)?;
    let mut log = Complex64::new(0.0, 0.0);
    if plus {
        let head = ((lam - lpi) / (lam - l0)).sqrt();
        for (_, &g) in interior_a {
            log += (lam - lp(g)).ln();
        }
        for (_, &g) in interior_p {
            log -= (lam - lp(g)).ln();
        }
        Ok(head * log.exp())
    } else {
        let head = ((lam - l0.recip()) / (lam - lpi.recip())).sqrt();
        for (_, &g) in interior_p {
            log += (lam - lp(g).inv()).ln();
        }
        for (_, &g) in interior_a {
            log -= (lam - lp(g).inv()).ln();
        }
        Ok(head * log.exp())
    }
}

/// Evaluate `Ṽ₊/(zⁿ+1)` against `±Ṽ₋/(zⁿ−1)` at each sample point.
pub fn check_factorization(
    ctx: &EllipticContext,
    cyl: &CylinderParams,
    samples: &[Complex64],
) -> Result<Vec<FactorizationSample>> {
    let n = cyl.n() as i32;
    samples
        .iter()
        .map(|&u| {
            let hood = neighbourhood(ctx, u)?;
            let zn = ctx.uniformize(u)?.z.powi(n);
            let lhs = v_tilde(ctx, cyl, u, true)? / (zn + 1.0);
            let mut rhs = v_tilde(ctx, cyl, u, false)? / (zn - 1.0);
            if hood == Neighbourhood::Inner {
                rhs = -rhs;
            }
            let residual = (lhs - rhs).norm() / lhs.norm().max(rhs.norm());
            Ok(FactorizationSample { u, neighbourhood: hood, lhs, rhs, residual })
        })
        .collect()
}

/// Both sides of the product identities over `Σ_P` and `Σ_A`.
#[derive(Debug, Clone, Serialize)]
pub struct ProductIdentity {
    pub z_prime: Complex64,
    /// Root of `s₁(λ'+1/λ')/2 = c₁c₂ − s₂(z'+1/z')/2` with `|λ'| ≥ 1`.
    pub lambda_prime: Complex64,
    pub lhs_p: Complex64,
    pub rhs_p: Complex64,
    pub lhs_a: Complex64,
    pub rhs_a: Complex64,
}

impl ProductIdentity {
    /// Largest relative deviation of the two identities.
    pub fn residual(&self) -> f64 {
        let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(b.norm());
        rel(self.lhs_p, self.rhs_p).max(rel(self.lhs_a, self.rhs_a))
    }
}

/// `∏_{p∈Σ} (c₁c₂ − s₁ cos p − s₂(z'+1/z')/2) = (s₁/2)ⁿ (λ'ⁿ ∓ 1)² λ'⁻ⁿ`,
/// `−` over the periodic points and `+` over the anti-periodic ones.
///
/// The right-hand side equals `λ'ⁿ ∓ 2 + λ'⁻ⁿ` up to the constant, so it is
/// the same for both roots `λ'` and `1/λ'`; `|λ'| = 1` needs no special case.
pub fn product_identity(params: &CouplingParams, m: usize, z_prime: Complex64) -> Result<ProductIdentity> {
    if z_prime.norm() < 1e-300 {
        return domain("z' must be non-zero");
    }
    let n = 2 * m + 1;
    let rhs_const = Complex64::new(params.c1 * params.c2, 0.0) - (z_prime + z_prime.inv()) * (0.5 * params.s2);
    let w = rhs_const * (2.0 / params.s1);
    let root = (w * w - 4.0).sqrt();
    let (r1, r2) = ((w + root) * 0.5, (w - root) * 0.5);
    let lambda_prime = if r1.norm() >= r2.norm() { r1 } else { r2 };
    let prod = |sector: Sector| -> Complex64 {
        spectral::spectral_points(m, sector)
            .iter()
            .map(|p| rhs_const - params.s1 * p.theta.cos())
            .product()
    };
    let ln = lambda_prime.powi(n as i32);
    let scale = Complex64::new((0.5 * params.s1).powi(n as i32), 0.0) / ln;
    Ok(ProductIdentity {
        z_prime,
        lambda_prime,
        lhs_p: prod(Sector::P),
        rhs_p: scale * (ln - 1.0) * (ln - 1.0),
        lhs_a: prod(Sector::A),
        rhs_a: scale * (ln + 1.0) * (ln + 1.0),
    })
}

/// Largest entry of `|s(u, u') − kernel|` over pairs of cycle points, where
/// `s = s₁/sn(u−u')` and `kernel = −sinh((γ+γ')/2)/sin((θ−θ')/2)`.
pub fn kernel_residual(ctx: &EllipticContext, params: &CouplingParams, thetas: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    let us = thetas.iter().map(|&t| ctx.theta_to_u(t)).collect::<Result<Vec<_>>>()?;
    let gs = thetas
        .iter()
        .map(|&t| spectral::gamma(params, Complex64::from_polar(1.0, t)))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..thetas.len() {
        for j in 0..thetas.len() {
            if i == j {
                continue;
            }
            let got = ctx.sn_pair_kernel(us[i], us[j])?;
            let want = -(0.5 * (gs[i] + gs[j])).sinh() / (0.5 * (thetas[i] - thetas[j])).sin();
            worst = worst.max((got - want).norm() / want.abs());
        }
    }
    Ok(worst)
}
