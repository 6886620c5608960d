//! Factorisation identities of the cylinder kernels on the uniformising
//! torus, and the product identities over the spectral points.
//!
//! cargo run --example factorization

use periodic_ising::blfactor::{self, CylinderParams};
use periodic_ising::elliptic;
use periodic_ising::spectral::CouplingParams;
use periodic_ising::Complex64;

fn main() -> periodic_ising::Result<()> {
    let params = CouplingParams::isotropic(0.5)?;
    let ctx = elliptic::solve_a(&params)?;
    let cyl = CylinderParams::new(&params, 3)?;
    let samples = [
        Complex64::new(ctx.kq, ctx.kp),
        Complex64::new(ctx.kq, 0.0),
        Complex64::new(0.5 * ctx.kq, 0.03 * ctx.kp),
        Complex64::new(1.2 * ctx.kq, 0.96 * ctx.kp),
    ];
    for s in blfactor::check_factorization(&ctx, &cyl, &samples)? {
        println!("u = {:.4}: {:?} residual {:.1e}", s.u, s.neighbourhood, s.residual);
    }
    for z in [Complex64::new(2.0, 0.0), Complex64::new(0.3, 0.8)] {
        let r = blfactor::product_identity(&params, 3, z)?;
        println!("z' = {z}: lambda' = {:.6}, residual {:.1e}", r.lambda_prime, r.residual());
    }
    Ok(())
}
