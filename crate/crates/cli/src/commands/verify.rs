//! The acceptance suite end to end, one record per criterion.

use serde_json::json;
use strip_vortex::acceptance::{Suite, SuiteConfig, CRITERIA};

use super::{Context, Status};
use crate::error::CliError;
use crate::output::OutDir;

pub fn run(ctx: &Context) -> Result<Status, CliError> {
    let d = &ctx.config.domain;
    let s = &ctx.config.solver;
    let suite = Suite::new(SuiteConfig {
        half_length: d.half_length,
        nx: d.nx,
        n_modes: d.n_modes,
        coarse_nx: d.nx.div_ceil(2),
        fine_nx: 2 * d.nx - 1,
        newton_tol: s.newton_tol,
        fixed_point_tol: s.fixed_point_tol,
        mode: s.exec,
    });
    let ids: Vec<u8> = if ctx.config.verify.criteria.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        ctx.config.verify.criteria.clone()
    };
    let out = OutDir::create(&ctx.out, "verify", &ctx.config)?;
    let mut w = out.ndjson("verify.ndjson")?;
    let (mut passed, mut failed, mut skipped, mut runtime) = (0, 0, 0, 0.0);
    for id in ids {
        let r = suite.run(id);
        for line in r.lines() {
            println!("{line}");
        }
        let status = match (&r.skipped, r.passed()) {
            (Some(_), _) => {
                skipped += 1;
                "skip"
            }
            (None, true) => {
                passed += 1;
                "pass"
            }
            (None, false) => {
                failed += 1;
                "fail"
            }
        };
        runtime += r.runtime_s;
        w.record("criterion", &json!({ "status": status, "report": r }))?;
    }
    w.record("summary", &json!({ "passed": passed, "failed": failed, "skipped": skipped, "runtime_s": runtime }))?;
    w.finish()?;
    println!("{passed} passed, {failed} failed, {skipped} skipped ({runtime:.1} s)");
    Ok(Status::from_pass(failed == 0))
}
