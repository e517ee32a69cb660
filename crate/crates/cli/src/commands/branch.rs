//! Newton continuation of the branch bifurcating from `d_k`, with per-point
//! records, onset fits and plots.

use serde_json::json;
use strip_vortex::analytic::{compute_coefficients, critical_width};
use strip_vortex::continuation::{continue_branch, fit_amplitude, verify_energy_expansion, ContinuationOptions};
use strip_vortex::fit::slope_through_origin;
use strip_vortex::operators::discrete_critical_width;

use super::{Context, Status};
use crate::error::CliError;
use crate::output::{num, opt, OutDir};
use crate::svg::{self, Glyph, Series};

/// Points nearest onset used by the amplitude and energy fits.
const FIT_POINTS: usize = 6;
/// Half-extent in `x` of the vortex map.
const MAP_HALF_WIDTH: f64 = 6.0;

pub fn run(ctx: &Context) -> Result<Status, CliError> {
    let cfg = &ctx.config.branch;
    let k = cfg.k;
    let d = &ctx.config.domain;
    let coeffs = compute_coefficients(d.nx, d.half_length)?;
    let dk = discrete_critical_width(ctx.grid()?, k);
    let opts =
        ContinuationOptions { newton: ctx.newton(), morse_index: cfg.morse_index, ..ContinuationOptions::default() };
    let branch = continue_branch(ctx.domain(dk)?, k, dk, coeffs.lambda_coeff, cfg.start, cfg.end, cfg.step, &opts)
        .map_err(|e| match e {
            strip_vortex::Error::InvalidArgument(m) => CliError::Usage(m),
            e => e.into(),
        })?;

    let out = OutDir::create(&ctx.out, "branch", &ctx.config)?;
    let mut w = out.ndjson("branch.ndjson")?;
    let mut rows = Vec::new();
    for (i, p) in branch.points.iter().enumerate() {
        let offset = p.width - dk;
        w.record(
            "point",
            &json!({
                "index": i, "width": p.width, "offset": offset, "eps": offset / dk,
                "amplitude": p.amplitude, "amplitude_sq": p.amplitude * p.amplitude,
                "energy": p.energy, "soliton_energy": p.soliton_energy, "energy_deficit": p.energy_deficit(),
                "residual_norm": p.residual_norm, "iterations": p.iterations, "method": p.method,
                "n_negative": p.n_negative, "vortex_count": p.vortices.len(),
                "total_degree": p.vortices.total_degree(), "vortices": p.vortices.entries,
            }),
        )?;
        let vortices: Vec<String> =
            p.vortices.entries.iter().map(|v| format!("{}:{}:{:+}", v.x, v.y, v.degree)).collect();
        rows.push(vec![
            i.to_string(),
            num(p.width),
            num(offset),
            num(p.amplitude),
            num(p.amplitude * p.amplitude),
            num(p.energy),
            num(p.energy_deficit()),
            num(p.residual_norm),
            p.iterations.to_string(),
            p.method.clone(),
            opt(p.n_negative),
            p.vortices.len().to_string(),
            vortices.join(";"),
        ]);
    }

    let offsets: Vec<f64> = branch.points.iter().map(|p| p.width - dk).collect();
    let amp_sq: Vec<f64> = branch.points.iter().map(|p| p.amplitude * p.amplitude).collect();
    let n_fit = FIT_POINTS.min(branch.points.len());
    let slope = (n_fit >= 2).then(|| slope_through_origin(&offsets[..n_fit], &amp_sq[..n_fit]));
    w.record(
        "summary",
        &json!({
            "k": k,
            "critical_width": critical_width(k)?,
            "discrete_critical_width": dk,
            "n_points": branch.points.len(),
            "lost_at": branch.lost_at,
            "amplitude_sq_slope": slope,
            "amplitude_sq_slope_predicted": coeffs.lambda_coeff.powi(2) / dk,
            "amplitude_sq_slope_predicted_reduced": coeffs.lambda_reduced.powi(2) / dk,
            "amplitude_fit": fit_amplitude(&branch, n_fit).ok(),
            "energy_fit": verify_energy_expansion(&branch, n_fit).ok(),
            "lambda_coeff": coeffs.lambda_coeff,
            "lambda_reduced": coeffs.lambda_reduced,
            "energy_coeff": coeffs.energy_coeff,
            "energy_reduced": coeffs.energy_reduced,
        }),
    )?;
    if let Some(at) = branch.lost_at {
        w.record("lost", &json!({ "width": at, "offset": at - dk }))?;
    }
    w.finish()?;
    out.csv(
        "branch.csv",
        &[
            "index",
            "width",
            "offset",
            "amplitude",
            "amplitude_sq",
            "energy",
            "energy_deficit",
            "residual_norm",
            "iterations",
            "method",
            "n_negative",
            "vortex_count",
            "vortices",
        ],
        &rows,
    )?;

    let curve = |f: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> { offsets.iter().map(|&o| (o, f(o))).collect() };
    let amp = [
        Series {
            name: "computed",
            points: offsets.iter().copied().zip(amp_sq.iter().copied()).collect(),
            markers: true,
        },
        Series {
            name: "Lambda^2 (d - d_k)/d_k",
            points: curve(&|o| coeffs.lambda_coeff.powi(2) * o / dk),
            markers: false,
        },
        Series { name: "reduced", points: curve(&|o| coeffs.lambda_reduced.powi(2) * o / dk), markers: false },
    ];
    out.svg(
        "amplitude.svg",
        &svg::line_plot(&format!("branch k = {k}: squared amplitude"), "d - d_k", "amplitude^2", &amp),
    )?;
    let deficit = [
        Series {
            name: "computed",
            points: branch.points.iter().map(|p| (p.width - dk, p.energy_deficit())).collect(),
            markers: true,
        },
        Series { name: "E (d - d_k)^2/d_k", points: curve(&|o| coeffs.energy_coeff * o * o / dk), markers: false },
        Series { name: "reduced", points: curve(&|o| coeffs.energy_reduced * o * o / dk), markers: false },
    ];
    out.svg(
        "energy_deficit.svg",
        &svg::line_plot(&format!("branch k = {k}: energy deficit"), "d - d_k", "E(S0) - E(Psi)", &deficit),
    )?;
    if let Some(p) = branch.points.last() {
        let f = p.field.as_ref().expect("branch points keep their fields");
        let grid = f.domain.grid;
        let cols: Vec<usize> = (0..grid.nx).filter(|&i| grid.x(i).abs() <= MAP_HALF_WIDTH).step_by(2).collect();
        let phys = f.to_physical(61);
        let xs: Vec<f64> = cols.iter().map(|&i| grid.x(i)).collect();
        let modulus: Vec<Vec<f64>> =
            cols.iter().map(|&i| phys.values.row(i).iter().map(|v| v.norm()).collect()).collect();
        let glyphs: Vec<Glyph> =
            p.vortices.entries.iter().map(|v| Glyph { x: v.x, y: v.y, degree: v.degree }).collect();
        let title = format!("|Psi| at d = {:.4} with vortex degrees", p.width);
        out.svg("vortex_map.svg", &svg::vortex_map(&title, &xs, &phys.ys, &modulus, &glyphs))?;
    }

    println!("branch k = {k}: {} points from d_k = {dk:.6}", branch.points.len());
    if let Some(s) = slope {
        println!("amplitude^2 slope {s:.6} (Lambda^2/d_k = {:.6})", coeffs.lambda_coeff.powi(2) / dk);
    }
    match branch.lost_at {
        Some(at) => Err(CliError::Solver(format!("branch lost at d = {at}; partial output kept"))),
        None => Ok(Status::Success),
    }
}
