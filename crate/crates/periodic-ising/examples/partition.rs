//! Torus partition function: transfer-matrix trace against a sum over all
//! spin configurations.
//!
//! cargo run --example partition

use periodic_ising::oracle::{self, OracleSpace};
use periodic_ising::spectral::CouplingParams;

fn main() -> periodic_ising::Result<()> {
    for (k1, k2) in [(0.5, 0.5), (0.3, 0.8)] {
        let params = CouplingParams::new(k1, k2)?;
        for (m, n) in [(0, 0), (1, 1), (2, 1)] {
            let trace = OracleSpace::build(m, &params)?.partition_trace(n);
            let direct = oracle::exhaustive_partition(m, n, k1, k2)?;
            println!(
                "K=({k1}, {k2}) {}x{} torus: trace {trace:.12e}  direct {direct:.12e}  rel {:.1e}",
                2 * m + 1,
                2 * n + 1,
                (trace / direct - 1.0).abs()
            );
        }
    }
    Ok(())
}
