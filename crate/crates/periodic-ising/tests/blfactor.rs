//! The product formula for cylinder matrix elements, its elliptic form and
//! the factorisation identities.

use std::f64::consts::PI;

use periodic_ising::blfactor::{self, CylinderParams, Neighbourhood};
use periodic_ising::elliptic;
use periodic_ising::pfaffian::SubsetPair;
use periodic_ising::rotation::Frame;
use periodic_ising::spectral::{self, CouplingParams, Sector};
use periodic_ising::spinme;
use periodic_ising::Complex64;
use proptest::prelude::*;

fn iso() -> CouplingParams {
    CouplingParams::isotropic(0.5).unwrap()
}

/// `ξ_T` from the plain double products, without logarithms.
fn xi_t_direct(params: &CouplingParams, m: usize) -> f64 {
    let ga = spectral::gammas(params, m, Sector::A).unwrap();
    let gp = spectral::gammas(params, m, Sector::P).unwrap();
    let prod = |x: &[f64], y: &[f64]| -> f64 {
        x.iter().flat_map(|&g| y.iter().map(move |&h| (0.5 * (g + h)).sinh())).product()
    };
    (prod(&gp, &ga).powi(2) / (prod(&gp, &gp) * prod(&ga, &ga))).powf(0.25)
}

/// All `(L, K)` with `#L, #K ≤ 2` and `#L + #K` even and positive.
fn small_pairs(m: usize) -> Vec<(Vec<i64>, Vec<i64>)> {
    let mi = m as i64;
    let idx: Vec<i64> = (-mi..=mi).collect();
    let mut subsets: Vec<Vec<i64>> = vec![vec![]];
    subsets.extend(idx.iter().map(|&x| vec![x]));
    for (p, &x) in idx.iter().enumerate() {
        for &y in &idx[p + 1..] {
            subsets.push(vec![x, y]);
        }
    }
    let mut out = Vec::new();
    for l in &subsets {
        for k in &subsets {
            if (l.len() + k.len()) % 2 == 0 && !(l.is_empty() && k.is_empty()) {
                out.push((l.clone(), k.clone()));
            }
        }
    }
    out
}

#[test]
fn xi_at_half_coupling() {
    // (1 − sinh(1)⁻⁴)^{1/4} = 0.830503008495…, the square of the Onsager
    // magnetisation at K = 1/2.
    let cyl = CylinderParams::new(&iso(), 3).unwrap();
    assert!((cyl.xi - 0.830_503_008_495_026).abs() < 1e-13);
    let onsager = (1.0 - 1.0f64.sinh().powi(-4)).powf(0.125);
    assert!((cyl.xi - onsager * onsager).abs() < 1e-15);
}

#[test]
fn xi_t_matches_direct_products_and_tends_to_one() {
    let params = iso();
    let mut prev = f64::INFINITY;
    for m in 0..=8 {
        let cyl = CylinderParams::new(&params, m).unwrap();
        assert!(cyl.xi_t.is_finite() && cyl.xi_t > 0.0);
        assert!((cyl.xi_t / xi_t_direct(&params, m) - 1.0).abs() < 1e-12, "M={m}");
        let gap = (cyl.xi_t - 1.0).abs();
        assert!(gap < prev, "M={m}: |xi_T - 1| = {gap}");
        prev = gap;
    }
}

#[test]
fn v_plus_and_minus_on_the_spectral_points() {
    let cyl = CylinderParams::new(&iso(), 4).unwrap();
    let points = cyl.theta_a.iter().zip(&cyl.nu_a).chain(cyl.theta_p.iter().zip(&cyl.nu_p));
    for (&theta, &nu) in points {
        let vp = cyl.v_plus(theta).unwrap();
        let vm = cyl.v_minus(theta).unwrap();
        assert!((vp * vm - 1.0).norm() < 1e-10, "theta={theta}");
        assert!((vp * vp - Complex64::new(nu.exp(), 0.0)).norm() < 1e-9 * nu.exp());
    }
}

#[test]
fn vacuum_element_is_the_one_point_value() {
    let cyl = CylinderParams::new(&iso(), 3).unwrap();
    assert!((cyl.element(&[], &[]).unwrap() - (cyl.xi * cyl.xi_t).sqrt()).abs() < 1e-15);
}

#[test]
fn element_contracts() {
    let cyl = CylinderParams::new(&iso(), 2).unwrap();
    assert!(cyl.element(&[0], &[]).is_err());
    assert!(cyl.element(&[3], &[0]).is_err());
    assert!(cyl.element(&[1, 0], &[]).is_err());
    assert!(CylinderParams::new(&CouplingParams::new(0.5, 0.6).unwrap(), 2).is_err());
}

#[test]
fn product_formula_reproduces_oracle_moduli() {
    // The product formula describes the row transfer matrix; compare with
    // the oracle-validated row-frame Pfaffians.
    let params = iso();
    for m in 1..=3 {
        let cyl = CylinderParams::new(&params, m).unwrap();
        let table = spinme::table_for(&params, m, Frame::Row).unwrap();
        for (l, k) in small_pairs(m) {
            let bl = cyl.element(&l, &k).unwrap() / cyl.vacuum();
            let pf = table.spin_ratio(&SubsetPair::new(l.clone(), k.clone()).unwrap()).unwrap();
            assert!((bl.abs() - pf.norm()).abs() < 1e-10 * (1.0 + bl.abs()), "M={m} L={l:?} K={k:?}");
        }
    }
}

#[test]
fn elliptic_form_of_the_product() {
    let params = iso();
    let ctx = elliptic::solve_a(&params).unwrap();
    for m in 1..=3 {
        let cyl = CylinderParams::new(&params, m).unwrap();
        for (l, k) in small_pairs(m) {
            let (value, target) = cyl.sn_product(&ctx, &l, &k).unwrap();
            assert!((value - Complex64::new(target, 0.0)).norm() < 1e-9 * (1.0 + target.abs()), "L={l:?} K={k:?}");
        }
    }
}

#[test]
fn comparison_with_the_inverse_of_d() {
    let params = iso();
    let mut prev = f64::INFINITY;
    for m in [2, 4, 6, 8] {
        let c = blfactor::compare_bl_vs_abcd(&params, m).unwrap();
        assert!(c.self_test < 1e-10);
        assert!(c.row_frame_deviation < 1e-12, "M={m}: {c:?}");
        assert!(c.modulus_deviation < prev, "M={m}: {c:?}");
        prev = c.modulus_deviation;
    }
}

#[test]
fn factorisation_at_the_corners_and_nearby() {
    let params = iso();
    let ctx = elliptic::solve_a(&params).unwrap();
    let (kq, kp) = (ctx.kq, ctx.kp);
    for m in 1..=4 {
        let cyl = CylinderParams::new(&params, m).unwrap();
        let samples = [
            Complex64::new(kq, kp),
            Complex64::new(kq, -kp),
            Complex64::new(kq, 0.0),
            Complex64::new(0.4 * kq, 0.05 * kp),
            Complex64::new(1.6 * kq, -0.07 * kp),
            Complex64::new(0.7 * kq, 0.95 * kp),
            Complex64::new(1.3 * kq, -0.92 * kp),
        ];
        for s in blfactor::check_factorization(&ctx, &cyl, &samples).unwrap() {
            assert!(s.residual < 1e-8, "M={m}: {s:?}");
        }
        for u in &samples[..3] {
            for plus in [true, false] {
                let v = blfactor::v_tilde(&ctx, &cyl, *u, plus).unwrap();
                assert!(v.re > 0.0 && v.im.abs() < 1e-9 * v.re);
            }
        }
    }
    assert_eq!(blfactor::neighbourhood(&ctx, Complex64::new(1.0, kp)).unwrap(), Neighbourhood::Outer);
    assert_eq!(blfactor::neighbourhood(&ctx, Complex64::new(1.0, 0.0)).unwrap(), Neighbourhood::Inner);
    assert!(blfactor::neighbourhood(&ctx, Complex64::new(1.0, 0.5 * kp)).is_err());
}

#[test]
fn product_identity_at_z_two() {
    // For K = 1/2 and z' = 2 the root λ' lies on the unit circle.
    let r = blfactor::product_identity(&iso(), 1, Complex64::new(2.0, 0.0)).unwrap();
    assert!((r.lambda_prime.norm() - 1.0).abs() < 1e-12);
    assert!(r.residual() < 1e-12);
}

#[test]
fn kernel_identity_on_the_spectral_points() {
    let params = iso();
    let ctx = elliptic::solve_a(&params).unwrap();
    let wrap = |t: f64| if t > PI { t - 2.0 * PI } else { t };
    let thetas: Vec<f64> = spectral::spectral_points(3, Sector::A)
        .iter()
        .chain(spectral::spectral_points(3, Sector::P).iter())
        .map(|p| wrap(p.theta))
        .collect();
    assert!(blfactor::kernel_residual(&ctx, &params, &thetas).unwrap() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_identities_hold(re in -3.0f64..3.0, im in -3.0f64..3.0, m in 0usize..6, k in 0.45f64..0.9) {
        let z = Complex64::new(re, im);
        prop_assume!(z.norm() > 0.1);
        let r = blfactor::product_identity(&CouplingParams::isotropic(k).unwrap(), m, z).unwrap();
        prop_assert!(r.residual() < 1e-9, "{r:?}");
    }
}
