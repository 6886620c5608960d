//! The product formula for cylinder matrix elements against the inverse of
//! the block `D`, in both frames.
//!
//! cargo run --example bl_comparison

use periodic_ising::blfactor::{self, CylinderParams};
use periodic_ising::spectral::CouplingParams;

fn main() -> periodic_ising::Result<()> {
    let params = CouplingParams::isotropic(0.46)?;
    let cyl = CylinderParams::new(&params, 4)?;
    println!("xi {:.12}  xi_T {:.12}  vacuum {:.12}", cyl.xi, cyl.xi_t, cyl.vacuum());
    println!("<{{0}}, sigma {{1}}> = {:.12}", cyl.element(&[0], &[1])?);
    for m in [4, 6, 8] {
        let c = blfactor::compare_bl_vs_abcd(&params, m)?;
        println!(
            "M={m}: |D^T P - I|_F {:.4}  modulus deviation {:.4}  row frame {:.1e}",
            c.frobenius_raw, c.modulus_deviation, c.row_frame_deviation
        );
    }
    Ok(())
}
