//! Two-point function on a finite torus and on the semi-infinite cylinder.
//!
//! cargo run --example correlation

use periodic_ising::correlate::{self, CorrelationPath, CorrelationRequest};
use periodic_ising::spectral::CouplingParams;

fn main() -> periodic_ising::Result<()> {
    let params = CouplingParams::isotropic(0.5)?;
    let m = 2;
    for rowsep in 1..=3 {
        let cyl = correlate::cylinder_two_point(&params, m, rowsep, m)?;
        print!("rowsep {rowsep}: cylinder {:.12}", cyl.value);
        for n_half in [20, 40, 200] {
            let req = CorrelationRequest {
                m,
                n_half,
                params,
                rowsep,
                i: 0,
                j: 0,
                path: CorrelationPath::TorusTrace,
                max_k: m,
            };
            let torus = correlate::torus_two_point(&req)?;
            print!("  N={n_half}: {:+.1e}", torus - cyl.value);
        }
        println!();
    }
    let trunc = correlate::cylinder_two_point(&params, 4, 2, 1)?;
    println!(
        "M=4, at most two modes: {:.12} from {} terms, tail estimate {:.1e}",
        trunc.value, trunc.terms, trunc.tail_estimate
    );
    Ok(())
}
