//! Oracle transfer matrices against direct configuration sums and the
//! induced rotations used by the closed forms.

use nalgebra::{Complex, DMatrix};
use periodic_ising::oracle::{self, MonomialOp, OracleSpace};
use periodic_ising::rotation::{self, Frame};
use periodic_ising::spectral::CouplingParams;
use periodic_ising::Complex64;

/// Torus partition function by summing over all `2^(cols·rows)` configurations.
fn brute_partition(cols: usize, rows: usize, k1: f64, k2: f64) -> f64 {
    let sites = cols * rows;
    let mut z = 0.0;
    for cfg in 0u64..1 << sites {
        let s = |r: usize, c: usize| if cfg >> (r * cols + c) & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = 0.0;
        for r in 0..rows {
            for c in 0..cols {
                e += k1 * s(r, c) * s(r, (c + 1) % cols) + k2 * s(r, c) * s((r + 1) % rows, c);
            }
        }
        z += f64::exp(e);
    }
    z
}

#[test]
fn trace_matches_direct_sum() {
    for (k1, k2) in [(0.5, 0.5), (0.6, 0.45), (0.2, 0.9)] {
        for (m, n) in [(0, 0), (0, 1), (1, 0), (1, 1), (2, 1)] {
            let want = brute_partition(2 * m + 1, 2 * n + 1, k1, k2);
            let space = OracleSpace::build(m, &CouplingParams::new(k1, k2).unwrap()).unwrap();
            let trace = space.partition_trace(n);
            assert!((trace / want - 1.0).abs() < 1e-11, "({m},{n}) K=({k1},{k2}): {trace} vs {want}");
            let exhaustive = oracle::exhaustive_partition(m, n, k1, k2).unwrap();
            assert!((exhaustive / want - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn exhaustive_size_guard() {
    assert!(oracle::exhaustive_partition(2, 3, 0.5, 0.5).is_err());
}

#[test]
fn operator_identities_hold() {
    for params in [CouplingParams::isotropic(0.5).unwrap(), CouplingParams::new(0.3, 0.8).unwrap()] {
        for m in 0..=3 {
            let r = OracleSpace::build(m, &params).unwrap().clifford_residuals();
            assert!(r.anticommutator < 1e-12, "{r:?}");
            assert!(r.max() < 1e-10, "{r:?}");
        }
    }
}

#[test]
fn symmetric_and_product_transfer_matrices_share_a_spectrum() {
    let params = CouplingParams::new(0.55, 0.42).unwrap();
    let space = OracleSpace::build(2, &params).unwrap();
    let mut a: Vec<Complex<f64>> = space.v_product().complex_eigenvalues().iter().copied().collect();
    let mut b: Vec<Complex<f64>> = space.vsym.complex_eigenvalues().iter().copied().collect();
    a.sort_by(|x, y| y.re.total_cmp(&x.re));
    b.sort_by(|x, y| y.re.total_cmp(&x.re));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() < 1e-9 * b[0].norm(), "{x} vs {y}");
    }
}

#[test]
fn row_and_symmetric_transfer_matrices_share_a_spectrum() {
    let params = CouplingParams::isotropic(0.5).unwrap();
    let space = OracleSpace::build(2, &params).unwrap();
    let mut a: Vec<f64> = nalgebra::SymmetricEigen::new(space.vrow.clone()).eigenvalues.iter().copied().collect();
    let mut b: Vec<f64> = nalgebra::SymmetricEigen::new(space.vsym.clone()).eigenvalues.iter().copied().collect();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10 * b[0]);
    }
}

fn one(op: MonomialOp) -> Vec<(Complex64, MonomialOp)> {
    vec![(Complex64::new(1.0, 0.0), op)]
}

#[test]
fn spin_induces_the_reflection_of_the_last_q() {
    let params = CouplingParams::isotropic(0.5).unwrap();
    for m in 1..=3 {
        let space = OracleSpace::build(m, &params).unwrap();
        let sigma = space.sigma_op(m as i64).unwrap();
        let t = oracle::induced_rotation(&space, &one(sigma.clone()), &one(sigma)).expect("linear image");
        let want = rotation::spin_rotation_position(&params, m, Frame::Symmetric);
        assert!((t - want).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }
}

#[test]
fn dressed_spin_induces_the_row_frame_rotation() {
    // The row-frame elements are those of (cosh K₂* + sinh K₂* C_M) σ_M.
    let params = CouplingParams::new(0.5, 0.62).unwrap();
    let (ch, sh) = (params.k2s.cosh(), params.k2s.sinh());
    for m in 1..=3 {
        let space = OracleSpace::build(m, &params).unwrap();
        let sigma = space.sigma_op(m as i64).unwrap();
        let flip = space.flip_op(m as i64).unwrap();
        let x = vec![(Complex64::new(ch, 0.0), sigma.clone()), (Complex64::new(sh, 0.0), flip.mul(&sigma))];
        let x_inv = vec![(Complex64::new(ch, 0.0), sigma.clone()), (Complex64::new(-sh, 0.0), sigma.mul(&flip))];
        let t = oracle::induced_rotation(&space, &x, &x_inv).expect("linear image");
        let want = rotation::spin_rotation_position(&params, m, Frame::Row);
        let dev = (t - want).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "M={m}: {dev}");
    }
}

#[test]
fn odd_parity_elements_vanish() {
    let params = CouplingParams::isotropic(0.5).unwrap();
    for m in 1..=3 {
        let space = OracleSpace::build(m, &params).unwrap();
        for frame in [Frame::Symmetric, Frame::Row] {
            let exact = space.exact_spin_elements(frame).unwrap();
            assert!(exact.parity_leak(&space).unwrap() < 1e-10);
        }
    }
}

#[test]
fn oracle_capacity_guard() {
    let params = CouplingParams::isotropic(0.5).unwrap();
    assert!(OracleSpace::build(oracle::DEFAULT_MAX_M + 1, &params).is_err());
    assert!(OracleSpace::build_with_override(oracle::OVERRIDE_MAX_M + 1, &params).is_err());
}

#[test]
fn dense_and_monomial_products_agree() {
    let params = CouplingParams::isotropic(0.5).unwrap();
    let space = OracleSpace::build(1, &params).unwrap();
    let a = space.p[0].mul(&space.q[2]);
    let dense: DMatrix<Complex64> = space.p[0].to_dense() * space.q[2].to_dense();
    assert!((a.to_dense() - dense).iter().all(|z| z.norm() < 1e-15));
}
