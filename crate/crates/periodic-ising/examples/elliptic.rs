//! Jacobian elliptic functions and the uniformisation of the spectral curve.
//!
//! cargo run --example elliptic

use periodic_ising::elliptic;
use periodic_ising::spectral::CouplingParams;
use periodic_ising::Complex64;

fn main() -> periodic_ising::Result<()> {
    let params = CouplingParams::isotropic(0.5)?;
    let ctx = elliptic::solve_a(&params)?;
    println!("k = {:.12}  K = {:.12}  K' = {:.12}  a = {:.12}", ctx.k_mod, ctx.kq, ctx.kp, ctx.a);

    let u = Complex64::new(0.7, 0.4);
    let j = ctx.jacobi(u)?;
    println!("sn {:.10}  cn {:.10}  dn {:.10}", j.sn, j.cn, j.dn);

    for theta in [2.5, 1.0, -0.5] {
        let u = ctx.theta_to_u(theta)?;
        let p = ctx.uniformize(u)?;
        println!(
            "theta {theta:+.2}: u = {:.6}, z = {:.6}, lambda = {:.6}, curve residual {:.1e}",
            u, p.z, p.lambda, p.curve_residual(&ctx)
        );
    }
    let r = elliptic::identity_suite(&ctx, &params, 1, 200)?;
    println!("identity suite on {} points: worst residual {:.1e}", r.points, r.max());
    Ok(())
}
