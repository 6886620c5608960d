//! Jacobian elliptic functions against quadrature and ODE oracles, and the
//! uniformisation of the spectral curve.

use std::f64::consts::PI;

use periodic_ising::elliptic::{self, EllipticContext};
use periodic_ising::spectral::{self, CouplingParams, Sector};
use periodic_ising::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `K(k)` by the trapezoid rule on the periodic integrand `(1 − k² sin²θ)^{−1/2}`.
fn quadrature_k(k: f64) -> f64 {
    let n = 4000;
    let h = PI / n as f64;
    let sum: f64 = (0..n).map(|i| 1.0 / (1.0 - (k * (i as f64 * h).sin()).powi(2)).sqrt()).sum();
    0.5 * sum * h
}

/// `(sn, cn, dn)` at `u` by RK4 along the segment from 0, integrating
/// `sn' = cn dn`, `cn' = −sn dn`, `dn' = −k² sn cn`.
fn ode_jacobi(u: Complex64, k: f64) -> [Complex64; 3] {
    let steps = 20_000;
    let h = u / steps as f64;
    let f = |y: [Complex64; 3]| [y[1] * y[2] * h, -y[0] * y[2] * h, -y[0] * y[1] * (k * k) * h];
    let add = |y: [Complex64; 3], d: [Complex64; 3], s: f64| [y[0] + d[0] * s, y[1] + d[1] * s, y[2] + d[2] * s];
    let mut y = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(add(y, k1, 0.5));
        let k3 = f(add(y, k2, 0.5));
        let k4 = f(add(y, k3, 1.0));
        for i in 0..3 {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) / 6.0;
        }
    }
    y
}

fn ctx_at(k: f64) -> (CouplingParams, EllipticContext) {
    let params = CouplingParams::isotropic(k).unwrap();
    (params, elliptic::solve_a(&params).unwrap())
}

#[test]
fn complete_integrals_match_quadrature() {
    for k in [0.05, 0.3, 0.724062, 0.9, 0.99] {
        let (kq, kp) = elliptic::complete_integrals(k).unwrap();
        let kc = (1.0 - k * k).sqrt();
        assert!((kq / quadrature_k(k) - 1.0).abs() < 1e-13, "K({k})");
        assert!((kp / quadrature_k(kc) - 1.0).abs() < 1e-13, "K'({k})");
    }
    let (_, ctx) = ctx_at(0.5);
    assert!((ctx.kq / quadrature_k(ctx.k_mod) - 1.0).abs() < 1e-10);
}

#[test]
fn complete_integral_limits() {
    let (kq, _) = elliptic::complete_integrals(1e-9).unwrap();
    assert!((kq - PI / 2.0).abs() < 1e-12);
    let (kq, kp) = elliptic::complete_integrals(0.5f64.sqrt()).unwrap();
    assert!((kq - kp).abs() < 1e-13);
    assert!(elliptic::complete_integrals(0.0).is_err());
    assert!(elliptic::complete_integrals(1.0).is_err());
}

#[test]
fn values_at_special_points() {
    let (_, ctx) = ctx_at(0.5);
    let j = ctx.jacobi(c(0.0, 0.0)).unwrap();
    assert!((j.sn - c(0.0, 0.0)).norm() < 1e-15 && (j.cn - c(1.0, 0.0)).norm() < 1e-15 && (j.dn - c(1.0, 0.0)).norm() < 1e-15);
    let j = ctx.jacobi(c(ctx.kq, 0.0)).unwrap();
    assert!((j.sn - c(1.0, 0.0)).norm() < 1e-14);
    assert!(j.cn.norm() < 1e-14);
    assert!((j.dn - c(ctx.k_prime, 0.0)).norm() < 1e-14);
}

#[test]
fn poles_are_errors() {
    let (_, ctx) = ctx_at(0.5);
    assert!(ctx.jacobi(c(0.0, ctx.kp)).is_err());
    assert!(ctx.jacobi(c(2.0 * ctx.kq, -ctx.kp)).is_err());
    assert!(ctx.jacobi(c(0.0, ctx.kp + 1e-6)).is_ok());
}

#[test]
fn agrees_with_ode_integration() {
    let (_, ctx) = ctx_at(0.45);
    for u in [c(0.7, 0.0), c(-1.9, 0.3), c(0.4, 0.8 * ctx.kp), c(3.0, -0.5 * ctx.kp), c(0.0, 0.6 * ctx.kp)] {
        let j = ctx.jacobi(u).unwrap();
        let want = ode_jacobi(u, ctx.k_mod);
        for (got, want) in [j.sn, j.cn, j.dn].iter().zip(want) {
            assert!((got - want).norm() < 1e-10 * (1.0 + want.norm()), "u={u}: {got} vs {want}");
        }
    }
}

#[test]
fn imaginary_quarter_translation() {
    let (_, ctx) = ctx_at(0.5);
    for u in [c(0.3, 0.1), c(1.1, -0.4), c(-0.8, 0.2)] {
        let want = ctx.sn(u).unwrap().inv() / ctx.k_mod;
        for sign in [1.0, -1.0] {
            let got = ctx.sn(u + c(0.0, sign * ctx.kp)).unwrap();
            assert!((got - want).norm() < 1e-11 * want.norm());
        }
    }
}

#[test]
fn shift_parameter_contract() {
    for k in [0.45, 0.5, 0.7] {
        let (params, ctx) = ctx_at(k);
        assert!(ctx.a > 0.0 && 2.0 * ctx.a < ctx.kp && ctx.a < 0.5 * ctx.kp);
        let s = ctx.sn(c(0.0, 2.0 * ctx.a)).unwrap();
        assert!((c(params.s1, 0.0) + c(0.0, 1.0) * s).norm() < 1e-10);
        assert!((ctx.k_mod.powi(2) + ctx.k_prime.powi(2) - 1.0).abs() < 1e-15);
        // α₂ = −k⁻¹ ns²(ia).
        let alpha2 = -(ctx.sn(ctx.ia()).unwrap().powi(2) * ctx.k_mod).inv();
        assert!((alpha2 - c(params.alpha2, 0.0)).norm() < 1e-10 * params.alpha2.abs());
    }
}

#[test]
fn supercritical_has_no_context() {
    let params = CouplingParams::isotropic(0.3).unwrap();
    assert!(elliptic::solve_a(&params).is_err());
}

#[test]
fn lambda_is_one_at_the_real_quarter_period() {
    let (_, ctx) = ctx_at(0.5);
    let p = ctx.uniformize(c(ctx.kq, 0.0)).unwrap();
    assert!((p.lambda - c(1.0, 0.0)).norm() < 1e-13);
}

#[test]
fn corner_values_exceed_one() {
    for k in [0.45, 0.5, 0.8] {
        let (params, ctx) = ctx_at(k);
        let (km, a2) = (ctx.k_mod, params.alpha2);
        // z = k⁻¹ (1 + k α₂⁻¹) / (1 + k⁻¹ α₂⁻¹).
        let want = (1.0 + km / a2) / (km * (1.0 + 1.0 / (km * a2)));
        assert!(want > 1.0);
        for sign in [1.0, -1.0] {
            let z = ctx.uniformize(c(ctx.kq, sign * ctx.kp)).unwrap().z;
            assert!(z.im.abs() < 1e-10 && (z.re / want - 1.0).abs() < 1e-10, "K={k}: {z} vs {want}");
        }
    }
}

#[test]
fn cycle_maps_to_unit_circle() {
    let (params, ctx) = ctx_at(0.5);
    for x in [0.1, 0.8, 1.7, 2.5, 3.3] {
        let p = ctx.uniformize(c(x, 0.5 * ctx.kp)).unwrap();
        assert!((p.z.norm() - 1.0).abs() < 1e-12);
        let gamma = spectral::gamma(&params, p.z / p.z.norm()).unwrap();
        assert!((p.lambda - c((-gamma).exp(), 0.0)).norm() < 1e-9);
    }
}

#[test]
fn theta_to_u_inverts_the_cycle() {
    let (_, ctx) = ctx_at(0.5);
    for theta in [PI, 2.0, 0.5, 0.0, -1.0, -3.0] {
        let u = ctx.theta_to_u(theta).unwrap();
        let z = ctx.uniformize(u).unwrap().z;
        assert!((z - Complex64::from_polar(1.0, theta)).norm() < 1e-10, "theta={theta}");
    }
    assert!(ctx.theta_to_u(4.0).is_err());
}

#[test]
fn pair_kernel_on_the_cycle() {
    let (params, ctx) = ctx_at(0.5);
    let m = 3;
    let a = spectral::spectral_points(m, Sector::A);
    let p = spectral::spectral_points(m, Sector::P);
    for pa in &a {
        for pp in &p {
            let u = ctx.theta_to_u(wrap(pa.theta)).unwrap();
            let v = ctx.theta_to_u(wrap(pp.theta)).unwrap();
            let g = spectral::gamma(&params, Complex64::from_polar(1.0, pa.theta)).unwrap();
            let h = spectral::gamma(&params, Complex64::from_polar(1.0, pp.theta)).unwrap();
            let want = -(0.5 * (g + h)).sinh() / (0.5 * (wrap(pa.theta) - wrap(pp.theta))).sin();
            let got = ctx.sn_pair_kernel(u, v).unwrap();
            assert!((got - c(want, 0.0)).norm() < 1e-9 * want.abs().max(1.0), "{got} vs {want}");
            let back = ctx.sn_pair_kernel(v, u).unwrap();
            assert!((got + back).norm() < 1e-12 * got.norm());
        }
    }
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI { t - 2.0 * PI } else { t }
}

#[test]
fn translated_kernel_form() {
    let (_, ctx) = ctx_at(0.5);
    let half = c(0.0, 0.5 * ctx.kp);
    for (x, y) in [(0.3, 1.4), (2.2, 0.9), (3.1, 0.2)] {
        let (u, up) = (c(x, 0.5 * ctx.kp), c(y, 0.5 * ctx.kp));
        let (v, vp) = (-u + half, -up - half);
        let lhs = ctx.sn_pair_kernel(u, up).unwrap();
        let rhs = ctx.sn(v - vp).unwrap() * (-ctx.k_mod.sqrt());
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm());
    }
}

#[test]
fn coincident_points_rejected() {
    let (_, ctx) = ctx_at(0.5);
    let u = c(0.4, 0.2);
    assert!(ctx.sn_pair_kernel(u, u).is_err());
    assert!(ctx.sn_pair_kernel(u, u + c(4.0 * ctx.kq, 0.0)).is_err());
    assert!(ctx.sn_skew_product(&[u, c(1.0, 0.0), u]).is_err());
}

#[test]
fn identity_suite_is_clean() {
    for k in [0.5, 0.62] {
        let (params, ctx) = ctx_at(k);
        let r = elliptic::identity_suite(&ctx, &params, 7, 200).unwrap();
        assert!(r.max() < 1e-9, "{r:?}");
    }
}

fn point(ctx: &EllipticContext, x: f64, y: f64) -> Complex64 {
    c(x * 2.0 * ctx.kq, y * 0.9 * ctx.kp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn squares_and_addition(x in -1.0f64..1.0, y in -1.0f64..1.0, x2 in -1.0f64..1.0, y2 in -1.0f64..1.0) {
        let (_, ctx) = ctx_at(0.5);
        let (u, v) = (point(&ctx, x, y), point(&ctx, x2, y2));
        let k2 = ctx.k_mod * ctx.k_mod;
        let ju = ctx.jacobi(u).unwrap();
        let jv = ctx.jacobi(v).unwrap();
        let scale = 1.0 + ju.sn.norm_sqr();
        prop_assert!((ju.sn * ju.sn + ju.cn * ju.cn - 1.0).norm() < 1e-11 * scale);
        prop_assert!((ju.sn * ju.sn * k2 + ju.dn * ju.dn - 1.0).norm() < 1e-11 * scale);
        let den = c(1.0, 0.0) - ju.sn * ju.sn * jv.sn * jv.sn * k2;
        prop_assume!(den.norm() > 1e-3);
        if let Ok(juv) = ctx.jacobi(u + v) {
            let sn_sum = (ju.sn * jv.cn * jv.dn + jv.sn * ju.cn * ju.dn) / den;
            let cn_sum = (ju.cn * jv.cn - ju.sn * ju.dn * jv.sn * jv.dn) / den;
            let dn_sum = (ju.dn * jv.dn - ju.sn * ju.cn * jv.sn * jv.cn * k2) / den;
            let s = 1.0 + juv.sn.norm();
            prop_assert!((juv.sn - sn_sum).norm() < 1e-9 * s);
            prop_assert!((juv.cn - cn_sum).norm() < 1e-9 * s);
            prop_assert!((juv.dn - dn_sum).norm() < 1e-9 * s);
        }
    }

    #[test]
    fn double_periodicity(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let (_, ctx) = ctx_at(0.55);
        let u = point(&ctx, x, y);
        let s = ctx.sn(u).unwrap();
        prop_assert!((ctx.sn(u + c(4.0 * ctx.kq, 0.0)).unwrap() - s).norm() < 1e-10 * (1.0 + s.norm()));
        prop_assert!((ctx.sn(u + c(0.0, 2.0 * ctx.kp)).unwrap() - s).norm() < 1e-10 * (1.0 + s.norm()));
        prop_assert!((ctx.sn(u + c(2.0 * ctx.kq, 0.0)).unwrap() + s).norm() < 1e-10 * (1.0 + s.norm()));
    }

    #[test]
    fn derivative_is_cn_dn(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let (_, ctx) = ctx_at(0.5);
        let u = point(&ctx, x, y);
        let h = 1e-5;
        let fd = (ctx.sn(u + c(h, 0.0)).unwrap() - ctx.sn(u - c(h, 0.0)).unwrap()) / (2.0 * h);
        let j = ctx.jacobi(u).unwrap();
        prop_assert!((fd - j.cn * j.dn).norm() < 1e-6 * (1.0 + fd.norm()));
    }

    #[test]
    fn uniformisation_lands_on_the_curve(x in 0.0f64..1.0, y in -1.0f64..1.0) {
        let (_, ctx) = ctx_at(0.5);
        let u = c(x * 2.0 * ctx.kq, y * ctx.kp);
        let near_pole = [ctx.ia(), -ctx.ia()].iter().any(|&s| {
            let w = u + s;
            (w.im.abs() - ctx.kp).abs() < 0.05 && (w.re / (2.0 * ctx.kq)).fract().abs() < 0.02
        });
        prop_assume!(!near_pole);
        if let Ok(p) = ctx.uniformize(u) {
            prop_assert!(p.curve_residual(&ctx) < 1e-10);
        }
    }

    #[test]
    fn skew_product_is_a_pfaffian(xs in prop::collection::vec((0.0f64..1.0, -0.45f64..0.45), 4..=6)) {
        let (_, ctx) = ctx_at(0.5);
        let n = xs.len() / 2 * 2;
        let pts: Vec<Complex64> = xs[..n].iter().map(|&(x, y)| c(x * 2.0 * ctx.kq, y * ctx.kp)).collect();
        let close = (0..n).any(|i| (i + 1..n).any(|j| (pts[i] - pts[j]).norm() < 0.05));
        prop_assume!(!close);
        let (pf, prod) = ctx.sn_skew_product(&pts).unwrap();
        prop_assert!((pf - prod).norm() < 1e-9 * prod.norm().max(1e-12), "{pf} vs {prod}");
    }
}
