//! Pfaffians of complex skew matrices.
//!
//! cargo run --example pfaffian

use periodic_ising::pfaffian::{self, SkewMatrix};
use periodic_ising::Complex64;

fn main() -> periodic_ising::Result<()> {
    let s = SkewMatrix::from_upper(6, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64).sin()));
    let pf = pfaffian::pfaffian(&s)?;
    let det = s.matrix().clone().determinant();
    println!("Pf = {pf:.12}");
    println!("Pf^2 - det = {:.1e}", (pf * pf - det).norm());
    println!("expansion  = {:.12}", pfaffian::pfaffian_expansion(&s)?);
    Ok(())
}
