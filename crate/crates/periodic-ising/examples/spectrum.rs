//! Transfer-matrix spectrum from the single-particle energies, checked
//! against the oracle for a small ring.
//!
//! cargo run --example spectrum

use periodic_ising::oracle::OracleSpace;
use periodic_ising::spectral::{self, CouplingParams, Sector};

fn main() -> periodic_ising::Result<()> {
    let params = CouplingParams::new(0.6, 0.45)?;
    let m = 2;
    println!("K1={} K2={} critical K={:.6}", params.k1, params.k2, spectral::critical_coupling());
    for sector in [Sector::A, Sector::P] {
        let gammas = spectral::gammas(&params, m, sector)?;
        println!("{sector:?} gammas: {gammas:.5?}");
        println!("{sector:?} log lambda0 = {:.10}", spectral::log_largest_eigenvalue(&params, m, sector)?);
    }

    // The oracle works with a rescaled transfer matrix, so compare ratios.
    let space = OracleSpace::build(m, &params)?;
    let (a, p) = space.u_block_spectra();
    let mut formula = spectral::enumerate_eigenvalues(&params, m, Sector::A)?;
    formula.sort_by(|x, y| y.total_cmp(x));
    let mut oracle = a.clone();
    oracle.sort_by(|x, y| y.total_cmp(x));
    println!("A block: {} eigenvalues, P block: {}", a.len(), p.len());
    for (f, o) in formula.iter().zip(&oracle).take(4) {
        println!("  ratio to lambda0: formula {:.12}  oracle {:.12}", f / formula[0], o / oracle[0]);
    }
    Ok(())
}
