//! Spin matrix elements between excited states as Pfaffians, compared with
//! the eigenvectors of the oracle transfer matrix.
//!
//! cargo run --example spin_ratios

use periodic_ising::pfaffian::SubsetPair;
use periodic_ising::rotation::Frame;
use periodic_ising::spectral::CouplingParams;
use periodic_ising::spinme;

fn main() -> periodic_ising::Result<()> {
    let params = CouplingParams::isotropic(0.5)?;
    let m = 3;
    let table = spinme::table_for(&params, m, Frame::Row)?;
    for pair in [
        SubsetPair::new(vec![], vec![-1, 1])?,
        SubsetPair::new(vec![0], vec![2])?,
        SubsetPair::new(vec![-3, 0], vec![1, 2])?,
    ] {
        let r = table.spin_ratio(&pair)?;
        println!("I={:?} J={:?}: ratio {:.10} (|.| = {:.10})", pair.i, pair.j, r, r.norm());
    }
    for frame in [Frame::Symmetric, Frame::Row] {
        let cv = spinme::cross_validate_oracle(&params, m, frame)?;
        println!(
            "{frame} frame: {} single and {} class comparisons, worst relative deviation {:.1e}",
            cv.single, cv.class_pairs, cv.worst
        );
    }
    Ok(())
}
