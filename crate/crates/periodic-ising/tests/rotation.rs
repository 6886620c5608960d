//! Induced rotations, tilted eigenbases and the spin blocks `A, B, C, D`.

use nalgebra::{DMatrix, Matrix2, Vector2};
use periodic_ising::rotation::{self, Frame};
use periodic_ising::spectral::{self, CouplingParams, Sector};
use periodic_ising::Complex64;
use proptest::prelude::*;

fn couplings() -> Vec<CouplingParams> {
    vec![
        CouplingParams::isotropic(0.5).unwrap(),
        CouplingParams::new(0.6, 0.45).unwrap(),
        CouplingParams::new(0.35, 0.9).unwrap(),
    ]
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

#[test]
fn kernel_composite_is_minus_identity() {
    for m in 0..=6 {
        let n = 2 * m + 1;
        let prod = rotation::reverse_kernel_matrix(m) * rotation::spin_kernel_matrix(m);
        assert!(max_abs(&(prod + DMatrix::identity(n, n))) < 1e-12, "M={m}");
        let f: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64 * 0.3 - 1.0, (i as f64).cos())).collect();
        assert!(rotation::kernel_round_trip(m, &f) < 1e-12);
        let applied = rotation::spin_kernel_apply(m, &f);
        let direct = rotation::spin_kernel_matrix(m) * nalgebra::DVector::from_column_slice(&f);
        assert!(applied.iter().zip(direct.iter()).all(|(a, b)| (a - b).norm() < 1e-15));
    }
}

#[test]
fn tilted_block_eigenvectors() {
    for params in couplings() {
        for theta in [0.1, 1.3, 2.9, -2.0] {
            let z = Complex64::from_polar(1.0, theta);
            let t: Matrix2<Complex64> = rotation::tilde_transfer_block(&params, z).unwrap();
            let a = spectral::a_weight(&params, z).unwrap();
            let g = spectral::gamma(&params, z).unwrap();
            let i = Complex64::new(0.0, 1.0);
            let plus = Vector2::new(a, i / a);
            let minus = Vector2::new(a, -i / a);
            assert!((t * plus - plus * Complex64::new((-g).exp(), 0.0)).norm() < 1e-11);
            assert!((t * minus - minus * Complex64::new(g.exp(), 0.0)).norm() < 1e-11);
        }
    }
}

#[test]
fn transfer_blocks_are_bilinear_orthogonal() {
    for params in couplings() {
        for z in [0.7, 2.2, -1.1, 3.0].map(|t: f64| Complex64::from_polar(1.0, t)) {
            assert!(rotation::transfer_block_orthogonality(&params, z).unwrap() < 1e-11);
        }
    }
}

#[test]
fn tilted_bases_are_orthonormal_eigenbases() {
    for params in couplings() {
        for m in 0..=5 {
            for sector in [Sector::A, Sector::P] {
                let e = rotation::tilde_eigenbasis(&params, m, sector).unwrap();
                assert!(e.hermitian_residual() < 1e-12);
                assert!(e.bilinear_residual() < 1e-12);
                assert!(e.conjugation_residual() < 1e-12);
                assert!(e.eigen_residual(&params).unwrap() < 1e-11);
            }
        }
    }
}

#[test]
fn closed_form_blocks_match_projections() {
    for params in couplings() {
        for m in 0..=6 {
            let closed = rotation::abcd(&params, m).unwrap();
            let projected = rotation::abcd_projected(&params, m, Frame::Symmetric).unwrap();
            assert!(closed.max_difference(&projected) < 1e-11, "M={m}");
        }
    }
}

#[test]
fn blocks_satisfy_the_orthogonality_identities() {
    for params in couplings() {
        for m in 0..=6 {
            for frame in [Frame::Symmetric, Frame::Row] {
                let r = rotation::abcd_projected(&params, m, frame).unwrap().orthogonality();
                assert!(r.max() < 1e-10, "M={m} {frame}: {r:?}");
            }
        }
    }
}

#[test]
fn stray_transpose_variant_is_not_an_identity() {
    let params = CouplingParams::isotropic(0.5).unwrap();
    let r = rotation::abcd(&params, 2).unwrap().orthogonality();
    assert!(r.literal_first > 1e-3);
}

#[test]
fn block_structure_of_the_closed_form() {
    let params = CouplingParams::new(0.55, 0.5).unwrap();
    let b = rotation::abcd(&params, 3).unwrap();
    assert_eq!(b.a, b.d);
    assert!(max_abs(&(&b.b + &b.c)) == 0.0);
    assert!(b.d_condition().unwrap() < 1e6);
}

#[test]
fn proof_determinants_take_their_values() {
    for params in couplings() {
        for m in 0..=rotation::MAX_PROOF_M {
            let d = rotation::proof_determinants(&params, m).unwrap();
            assert!(d.max_deviation() < 1e-9, "M={m}: {d:?}");
        }
    }
    let params = CouplingParams::isotropic(0.5).unwrap();
    assert!(rotation::proof_determinants(&params, rotation::MAX_PROOF_M + 1).is_err());
}

#[test]
fn supercritical_blocks_rejected() {
    let params = CouplingParams::isotropic(0.3).unwrap();
    assert!(rotation::abcd(&params, 2).is_err());
    assert!(rotation::tilde_eigenbasis(&params, 2, Sector::A).is_err());
}

#[test]
fn spin_rotation_is_bilinear_orthogonal() {
    // Rotations induced by conjugation preserve the symmetric pairing.
    let params = CouplingParams::new(0.5, 0.7).unwrap();
    for frame in [Frame::Symmetric, Frame::Row] {
        let t = rotation::spin_rotation_position(&params, 2, frame);
        let n = t.nrows();
        assert!(max_abs(&(t.transpose() * &t - DMatrix::identity(n, n))) < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orthogonality_on_random_couplings(k1 in 0.45f64..1.2, k2 in 0.45f64..1.2, m in 0usize..5) {
        let params = CouplingParams::new(k1, k2).unwrap();
        prop_assume!(params.subcritical && params.alpha1 > 1.05);
        let blocks = rotation::abcd(&params, m).unwrap();
        prop_assert!(blocks.orthogonality().max() < 1e-9);
        let projected = rotation::abcd_projected(&params, m, Frame::Symmetric).unwrap();
        prop_assert!(blocks.max_difference(&projected) < 1e-10);
    }
}
