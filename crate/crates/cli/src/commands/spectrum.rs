//! Lowest eigenvalues of `T_k` about `S₀` and the Morse index of the strip
//! linearization over a width scan.

use num_complex::Complex64;
use serde_json::json;
use strip_vortex::analytic::{critical_width, soliton};
use strip_vortex::exec;
use strip_vortex::operators::{assemble_tk, discrete_critical_width, soliton_morse_scan, spectrum};

use super::{range, Context, Status};
use crate::error::CliError;
use crate::output::{num, OutDir};
use crate::svg::{self, Series};

pub fn run(ctx: &Context) -> Result<Status, CliError> {
    let cfg = &ctx.config.spectrum;
    let k = cfg.k;
    let dk = critical_width(k)?;
    let (lo, hi) = (cfg.d_min.unwrap_or(dk - 0.5), cfg.d_max.unwrap_or(dk + 0.5));
    if !(cfg.step > 0.0) || !(hi > lo) || lo <= 0.0 {
        return Err(CliError::Usage(format!("empty width range [{lo}, {hi}] with step {}", cfg.step)));
    }
    let widths = range(lo, hi, cfg.step);
    let grid = ctx.grid()?;
    let mode = ctx.config.solver.exec;
    let s0: Vec<Complex64> = grid.sample(soliton).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let eigs: Vec<Vec<f64>> = exec::map(mode, &widths, |&d| -> strip_vortex::Result<Vec<f64>> {
        Ok(spectrum(&assemble_tk(&s0, k, d, grid)?, cfg.n_eigs)?.eigenvalues)
    })
    .into_iter()
    .collect::<Result<_, _>>()?;
    let morse = soliton_morse_scan(ctx.domain(lo)?, &widths, mode)?;

    let out = OutDir::create(&ctx.out, "spectrum", &ctx.config)?;
    let mut w = out.ndjson("spectrum.ndjson")?;
    let mut rows = Vec::new();
    for ((d, e), n) in widths.iter().zip(&eigs).zip(&morse) {
        w.record("scan", &json!({ "width": d, "tk_eigenvalues": e, "n_negative": n }))?;
        let mut row = vec![num(*d)];
        row.extend(e.iter().map(|v| num(*v)));
        row.push(n.to_string());
        rows.push(row);
    }
    let discrete = discrete_critical_width(grid, k);
    for i in 0..widths.len() - 1 {
        let (a, b) = (eigs[i][0], eigs[i + 1][0]);
        if (a > 0.0) != (b > 0.0) {
            let at = widths[i] + a / (a - b) * (widths[i + 1] - widths[i]);
            w.record(
                "zero_crossing",
                &json!({
                    "k": k, "lower": widths[i], "upper": widths[i + 1], "interpolated": at,
                    "critical_width": dk, "discrete_critical_width": discrete,
                    "within_one_step": (at - dk).abs() <= cfg.step,
                }),
            )?;
            println!("T_{k} lowest eigenvalue crosses zero at d = {at:.6} (d_{k} = {dk:.6})");
        }
        if morse[i + 1] != morse[i] {
            w.record(
                "morse_jump",
                &json!({ "lower": widths[i], "upper": widths[i + 1], "from": morse[i], "to": morse[i + 1] }),
            )?;
            println!("n_negative {} -> {} in ({:.4}, {:.4})", morse[i], morse[i + 1], widths[i], widths[i + 1]);
        }
    }
    w.finish()?;

    let mut header = vec!["width".to_string()];
    header.extend((0..cfg.n_eigs).map(|i| format!("tk_eig_{i}")));
    header.push("n_negative".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv("spectrum.csv", &header, &rows)?;

    let names: Vec<String> = (0..cfg.n_eigs).map(|i| format!("eigenvalue {i}")).collect();
    let series: Vec<Series> = names
        .iter()
        .enumerate()
        .map(|(i, name)| Series {
            name,
            points: widths.iter().zip(&eigs).map(|(d, e)| (*d, e[i])).collect(),
            markers: false,
        })
        .collect();
    out.svg(
        "spectrum.svg",
        &svg::line_plot(&format!("lowest eigenvalues of T_{k} about S0"), "d", "eigenvalue", &series),
    )?;
    let counts = Series {
        name: "n_negative",
        points: widths.iter().zip(&morse).map(|(d, n)| (*d, *n as f64)).collect(),
        markers: true,
    };
    out.svg(
        "morse.svg",
        &svg::line_plot("negative eigenvalues of the strip linearization about S0", "d", "count", &[counts]),
    )?;
    Ok(Status::Success)
}
