//! Expansion coefficients, their bounds and the grid-convergence table.

use serde_json::json;
use strip_vortex::acceptance::{bound_checks, integral_checks};
use strip_vortex::analytic::compute_coefficients;

use super::{Context, Status};
use crate::error::CliError;
use crate::output::OutDir;

pub fn run(ctx: &Context) -> Result<Status, CliError> {
    let d = &ctx.config.domain;
    let c = compute_coefficients(d.nx, d.half_length)?;
    let out = OutDir::create(&ctx.out, "coefficients", &ctx.config)?;
    let mut w = out.ndjson("coefficients.ndjson")?;
    w.record("coefficients", &c)?;

    let mut pass = true;
    let (bounds, reduced) = bound_checks(&c);
    for (primary, check) in
        integral_checks(&c).into_iter().chain(bounds).map(|k| (true, k)).chain(reduced.into_iter().map(|k| (false, k)))
    {
        pass &= !primary || check.pass;
        println!("{}{check}", if primary { "" } else { "(supplementary) " });
        w.record("check", &json!({ "primary": primary, "check": check }))?;
    }

    for l in &c.levels {
        w.record("convergence", l)?;
    }
    if let [coarse, fine] = c.levels[..] {
        let correction = c.cross_term - fine.cross_term;
        w.record(
            "richardson",
            &json!({
                "quantity": "int S0 v chi0^2",
                "coarse_nx": coarse.nx,
                "fine_nx": fine.nx,
                "coarse": coarse.cross_term,
                "fine": fine.cross_term,
                "extrapolated": c.cross_term,
                "correction": correction,
            }),
        )?;
        println!(
            "richardson: int S0 v chi0^2 = {} (nx {} -> {}, correction {correction:.3e})",
            c.cross_term, coarse.nx, fine.nx
        );
    }
    w.finish()?;
    println!("omega = {}  Lambda = {}  E = {}", c.omega, c.lambda_coeff, c.energy_coeff);
    println!(
        "omega_reduced = {}  Lambda_reduced = {}  E_reduced = {}",
        c.omega_reduced, c.lambda_reduced, c.energy_reduced
    );
    Ok(Status::from_pass(pass))
}
