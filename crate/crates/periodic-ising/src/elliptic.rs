//! Jacobian elliptic functions and the uniformisation of the spectral curve.
//!
//! Real arguments go through the descending Landen (AGM) scheme. Complex
//! arguments are assembled from two real evaluations, one at modulus `k` and
//! one at the complementary modulus `k'`, via the addition formula together
//! with Jacobi's imaginary transformation `sn(iy, k) = i sc(y, k')`.
//!
//! The spectral curve
//!
//! ```text
//! s₁ (z + z⁻¹)/2 + s₂ (λ + λ⁻¹)/2 = c₁ c₂
//! ```
//!
//! is uniformised by `z = k sn(u+ia) sn(u−ia)`, `λ = sn(u−ia)/sn(u+ia)` with
//! `k = 1/(s₁ s₂)` and `0 < 2a < K'` fixed by `sc(2a, k') = s₁`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::spectral::CouplingParams;

const AGM_TOL: f64 = 1e-16;
const AGM_MAX_ITER: usize = 40;

/// Distance from a pole below which [`jacobi`] refuses to evaluate.
pub const POLE_DISTANCE: f64 = 1e-8;

/// Arithmetic-geometric mean of two positive reals.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
    }
    0.5 * (a + b)
}

/// Complete integrals `(K(k), K'(k)) = (K(k), K(k'))`.
pub fn complete_integrals(k: f64) -> Result<(f64, f64)> {
    if !(k > 0.0 && k < 1.0) {
        return domain(format!("modulus must lie in (0, 1), got {k}"));
    }
    let kp = complementary(k);
    Ok((PI / (2.0 * agm(1.0, kp)), PI / (2.0 * agm(1.0, k))))
}

fn complementary(k: f64) -> f64 {
    ((1.0 - k) * (1.0 + k)).sqrt()
}

/// Real-argument `(sn, cn, dn)` for modulus `0 ≤ k < 1`, given `K(k)`.
fn real_jacobi(u: f64, k: f64, quarter: f64) -> (f64, f64, f64) {
    let period = 4.0 * quarter;
    let u = u - period * (u / period).round();
    if k == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    let mut a = [0.0f64; AGM_MAX_ITER + 1];
    let mut c = [0.0f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = k;
    let mut b = complementary(k);
    let mut steps = 0;
    while steps < AGM_MAX_ITER {
        let an = a[steps];
        a[steps + 1] = 0.5 * (an + b);
        c[steps + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        steps += 1;
        if c[steps].abs() <= AGM_TOL * a[steps] {
            break;
        }
    }
    let mut phi = (1u64 << steps) as f64 * a[steps] * u;
    let mut prev = phi;
    for n in (1..=steps).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[n] / a[n] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // The ratio form loses dn where cn vanishes; dn > 0 on the real line.
    let dn = if cn.abs() > 1e-3 { cn / (prev - phi).cos() } else { (1.0 - k * k * sn * sn).sqrt() };
    (sn, cn, dn)
}

/// Values of the three Jacobian functions at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jacobi {
    pub sn: Complex64,
    pub cn: Complex64,
    pub dn: Complex64,
}

/// Jacobian `(sn, cn, dn)` at complex `u` for modulus `0 < k < 1`.
///
/// Poles sit at `2pK + (2q+1)iK'`; evaluation within [`POLE_DISTANCE`] of
/// one is an error.
pub fn jacobi(u: Complex64, k: f64) -> Result<Jacobi> {
    let (kq, kp_int) = complete_integrals(k)?;
    jacobi_with(u, k, kq, kp_int)
}

fn jacobi_with(u: Complex64, k: f64, kq: f64, kp_int: f64) -> Result<Jacobi> {
    if !(u.re.is_finite() && u.im.is_finite()) {
        return domain(format!("argument {u} is not finite"));
    }
    let p = (u.re / (2.0 * kq)).round();
    let q = ((u.im / kp_int - 1.0) / 2.0).round();
    let pole = Complex64::new(2.0 * p * kq, (2.0 * q + 1.0) * kp_int);
    if (u - pole).norm() < POLE_DISTANCE {
        return Err(Error::Pole(format!("u = {u} is within {POLE_DISTANCE:e} of the pole {pole}")));
    }
    let kp = complementary(k);
    let (s, c, d) = real_jacobi(u.re, k, kq);
    let (s1, c1, d1) = real_jacobi(u.im, kp, kp_int);
    let den = c1 * c1 + k * k * s * s * s1 * s1;
    Ok(Jacobi {
        sn: Complex64::new(s * d1, c * d * s1 * c1) / den,
        cn: Complex64::new(c * c1, -s * d * s1 * d1) / den,
        dn: Complex64::new(d * c1 * d1, -k * k * s * c * s1) / den,
    })
}

/// Complex `sn(u)`.
pub fn sn(u: Complex64, k: f64) -> Result<Complex64> {
    Ok(jacobi(u, k)?.sn)
}

/// Modulus, periods and the parameter `a` for one set of couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticContext {
    pub k_mod: f64,
    pub k_prime: f64,
    /// Quarter period `K`.
    pub kq: f64,
    /// Quarter period `K'`.
    pub kp: f64,
    /// Shift `a` with `0 < 2a < K'` and `sc(2a, k') = s₁`.
    pub a: f64,
    pub s1: f64,
    pub s2: f64,
    pub c1c2: f64,
}

/// Solve `sc(2a, k') = s₁` by bisection and assemble the context.
pub fn solve_a(params: &CouplingParams) -> Result<EllipticContext> {
    if !params.subcritical {
        return domain(format!(
            "elliptic uniformisation needs subcritical couplings, got K1={}, K2={}",
            params.k1, params.k2
        ));
    }
    let k = params.k_mod;
    let (kq, kp) = complete_integrals(k)?;
    let k_prime = complementary(k);
    let sc = |x: f64| {
        let (s, c, _) = real_jacobi(x, k_prime, kp);
        s / c
    };
    let (mut lo, mut hi) = (0.0, kp);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sc(mid) < params.s1 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * kp {
            break;
        }
    }
    let two_a = 0.5 * (lo + hi);
    if !(two_a > 0.0 && two_a < kp) || (sc(two_a) - params.s1).abs() > 1e-10 * params.s1.max(1.0) {
        return domain(format!("no root of sc(2a, k') = {} in (0, K')", params.s1));
    }
    Ok(EllipticContext {
        k_mod: k,
        k_prime,
        kq,
        kp,
        a: 0.5 * two_a,
        s1: params.s1,
        s2: params.s2,
        c1c2: params.c1 * params.c2,
    })
}

/// A point of the uniformising domain with its image on the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformPoint {
    pub u: Complex64,
    pub z: Complex64,
    pub lambda: Complex64,
}

impl UniformPoint {
    /// `|s₁(z+z⁻¹)/2 + s₂(λ+λ⁻¹)/2 − c₁c₂|`, scaled by the largest term.
    pub fn curve_residual(&self, ctx: &EllipticContext) -> f64 {
        let t1 = (self.z + self.z.inv()) * (0.5 * ctx.s1);
        let t2 = (self.lambda + self.lambda.inv()) * (0.5 * ctx.s2);
        let scale = t1.norm().max(t2.norm()).max(ctx.c1c2);
        (t1 + t2 - ctx.c1c2).norm() / scale
    }
}

impl EllipticContext {
    pub fn jacobi(&self, u: Complex64) -> Result<Jacobi> {
        jacobi_with(u, self.k_mod, self.kq, self.kp)
    }

    pub fn sn(&self, u: Complex64) -> Result<Complex64> {
        Ok(self.jacobi(u)?.sn)
    }

    /// `i·a` as a complex number.
    pub fn ia(&self) -> Complex64 {
        Complex64::new(0.0, self.a)
    }

    /// Map `u` to `(z, λ)` on the spectral curve.
    pub fn uniformize(&self, u: Complex64) -> Result<UniformPoint> {
        let sp = self.sn(u + self.ia())?;
        let sm = self.sn(u - self.ia())?;
        if sp.norm() < 1e-300 {
            return Err(Error::Pole(format!("lambda has a pole at u = {u}")));
        }
        Ok(UniformPoint { u, z: sp * sm * self.k_mod, lambda: sm / sp })
    }

    /// Point on the cycle `Im u = K'/2` whose image is `z = e^{iθ}`.
    ///
    /// Along the cycle `arg z` falls from `π` at `Re u = 0` to `−π` at
    /// `Re u = 2K`, so `θ ∈ (−π, π]` has a unique preimage with
    /// `Re u ∈ [0, 2K)`; `θ = π` maps to `Re u = 0`.
    pub fn theta_to_u(&self, theta: f64) -> Result<Complex64> {
        if !(theta > -PI - 1e-12 && theta <= PI + 1e-12) {
            return domain(format!("theta = {theta} outside (-pi, pi]"));
        }
        let im = 0.5 * self.kp;
        if (theta - PI).abs() < 1e-14 {
            return Ok(Complex64::new(0.0, im));
        }
        let arg_at = |x: f64| -> Result<f64> { Ok(self.uniformize(Complex64::new(x, im))?.z.arg()) };
        let (mut lo, mut hi) = (0.0, 2.0 * self.kq);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if arg_at(mid)? > theta {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * self.kq {
                break;
            }
        }
        Ok(Complex64::new(0.5 * (lo + hi), im))
    }

    /// `s₁ / sn(u − u')`.
    ///
    /// On the cycle `Im u = K'/2` this equals
    /// `−sinh((γ+γ')/2) / sin((θ−θ')/2)`.
    pub fn sn_pair_kernel(&self, u: Complex64, u_prime: Complex64) -> Result<Complex64> {
        let s = self.sn(u - u_prime)?;
        if s.norm() < 1e-12 {
            return domain(format!("points u = {u} and u' = {u_prime} coincide modulo the period lattice"));
        }
        Ok(Complex64::new(self.s1, 0.0) / s)
    }

    /// Pfaffian of `r_ij = −√k sn(u_i − u_j)` and the product `∏_{i<j} r_ij`.
    pub fn sn_skew_product(&self, points: &[Complex64]) -> Result<(Complex64, Complex64)> {
        if points.len() % 2 != 0 {
            return domain(format!("need an even number of points, got {}", points.len()));
        }
        let n = points.len();
        let rk = -self.k_mod.sqrt();
        let mut r = nalgebra::DMatrix::zeros(n, n);
        let mut prod = Complex64::new(1.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let s = self.sn(points[i] - points[j])?;
                if s.norm() < 1e-12 {
                    return domain(format!("points {i} and {j} coincide modulo the period lattice"));
                }
                let v = s * rk;
                r[(i, j)] = v;
                r[(j, i)] = -v;
                prod *= v;
            }
        }
        let pf = crate::pfaffian::pfaffian(&crate::pfaffian::SkewMatrix::new(r)?)?;
        Ok((pf, prod))
    }
}

/// Worst residuals of the identity suite.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityResiduals {
    pub points: usize,
    /// `sn² + cn² = 1` and `dn² + k² sn² = 1`.
    pub squares: f64,
    /// Addition formulas for `sn`, `cn`, `dn` and the subtraction form of `sn`.
    pub addition: f64,
    /// `sn(u + iK') = 1/(k sn u)` and `sn(u + K) = cn u / dn u`.
    pub translation: f64,
    /// `sn(u + 4K) = sn u` and `sn(u + 2iK') = sn u`.
    pub periodicity: f64,
    /// Curve residual of `uniformize` on a 32×32 grid of `[0, 2K] × [−K', K']`.
    pub curve_grid: f64,
    /// `|z| = 1` and `λ = e^{−γ(arg z)}` along `Im u = K'/2`.
    pub cycle: f64,
    /// `|s₁ + i sn(2ia)|`.
    pub shift: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [self.squares, self.addition, self.translation, self.periodicity, self.curve_grid, self.cycle, self.shift]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn rel_dev(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Check the Jacobian identities at `count` random points drawn from `seed`,
/// then the curve and cycle identities on fixed grids.
///
/// Points whose arguments come within `0.05` of a pole, or whose values
/// exceed `10⁴` in modulus, are redrawn so that the residuals measure the
/// implementation and not conditioning.
pub fn identity_suite(ctx: &EllipticContext, params: &CouplingParams, seed: u64, count: usize) -> Result<IdentityResiduals> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let k = ctx.k_mod;
    let (kq, kp) = (ctx.kq, ctx.kp);
    let safe = |u: Complex64| -> Option<Jacobi> {
        let p = (u.re / (2.0 * kq)).round();
        let q = ((u.im / kp - 1.0) / 2.0).round();
        let pole = Complex64::new(2.0 * p * kq, (2.0 * q + 1.0) * kp);
        if (u - pole).norm() < 0.05 {
            return None;
        }
        let j = ctx.jacobi(u).ok()?;
        (j.sn.norm() < 1e4 && j.cn.norm() < 1e4 && j.dn.norm() < 1e4).then_some(j)
    };
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let u = Complex64::new(rng.random_range(-4.0 * kq..4.0 * kq), rng.random_range(-2.0 * kp..2.0 * kp));
        if let Some(j) = safe(u) {
            return (u, j);
        }
    };
    let one = Complex64::new(1.0, 0.0);
    let (mut squares, mut addition, mut translation, mut periodicity) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut used = 0;
    while used < count {
        let (u, ju) = draw(&mut rng);
        let (v, jv) = draw(&mut rng);
        let (Some(jsum), Some(jdiff)) = (safe(u + v), safe(u - v)) else {
            continue;
        };
        let den = one - ju.sn * ju.sn * jv.sn * jv.sn * (k * k);
        if den.norm() < 1e-3 {
            continue;
        }
        used += 1;
        squares = squares
            .max(rel_dev(ju.sn * ju.sn + ju.cn * ju.cn, one))
            .max(rel_dev(ju.dn * ju.dn + ju.sn * ju.sn * (k * k), one));
        let sn_add = (ju.sn * jv.cn * jv.dn + jv.sn * ju.cn * ju.dn) / den;
        let cn_add = (ju.cn * jv.cn - ju.sn * jv.sn * ju.dn * jv.dn) / den;
        let dn_add = (ju.dn * jv.dn - ju.sn * jv.sn * ju.cn * jv.cn * (k * k)) / den;
        let sn_sub = (ju.sn * jv.cn * jv.dn - jv.sn * ju.cn * ju.dn) / den;
        addition = addition
            .max(rel_dev(sn_add, jsum.sn))
            .max(rel_dev(cn_add, jsum.cn))
            .max(rel_dev(dn_add, jsum.dn))
            .max(rel_dev(sn_sub, jdiff.sn));
        if let Ok(t) = ctx.sn(u + Complex64::new(0.0, kp)) {
            translation = translation.max(rel_dev(t * ju.sn * k, one));
        }
        if let Ok(t) = ctx.sn(u - Complex64::new(0.0, kp)) {
            translation = translation.max(rel_dev(t * ju.sn * k, one));
        }
        translation = translation.max(rel_dev(ctx.sn(u + kq)?, ju.cn / ju.dn));
        periodicity = periodicity
            .max(rel_dev(ctx.sn(u + 4.0 * kq)?, ju.sn))
            .max(rel_dev(ctx.sn(u + Complex64::new(0.0, 2.0 * kp))?, ju.sn));
    }

    let mut curve_grid = 0.0f64;
    for a in 0..32 {
        for b in 0..32 {
            let u = Complex64::new(2.0 * kq * (a as f64 + 0.5) / 32.0, kp * (2.0 * (b as f64 + 0.5) / 32.0 - 1.0));
            match ctx.uniformize(u) {
                Ok(pt) if pt.z.norm() < 1e8 && pt.lambda.norm() < 1e8 => {
                    curve_grid = curve_grid.max(pt.curve_residual(ctx));
                }
                _ => {}
            }
        }
    }

    let mut cycle = 0.0f64;
    for a in 0..64 {
        let u = Complex64::new(2.0 * kq * a as f64 / 64.0, 0.5 * kp);
        let pt = ctx.uniformize(u)?;
        let g = crate::spectral::gamma(params, Complex64::from_polar(1.0, pt.z.arg()))?;
        cycle = cycle.max((pt.z.norm() - 1.0).abs()).max(rel_dev(pt.lambda, Complex64::new((-g).exp(), 0.0)));
    }
    let shift = (Complex64::new(ctx.s1, 0.0) + Complex64::i() * ctx.sn(Complex64::new(0.0, 2.0 * ctx.a))?).norm();
    Ok(IdentityResiduals { points: used, squares, addition, translation, periodicity, curve_grid, cycle, shift })
}
