//! The bifurcation function `J(d, λ)` on a `(d, λ)` grid and its derivative
//! probe at the discrete critical width.

use serde_json::json;
use std::f64::consts::SQRT_2;
use strip_vortex::acceptance::Check;
use strip_vortex::analytic::compute_coefficients;
use strip_vortex::operators::discrete_critical_width;
use strip_vortex::reduction::{j_surface, probe_j_derivatives, ProbeSteps};

use super::{Context, Status};
use crate::error::CliError;
use crate::output::{num, opt, OutDir};
use crate::svg;

pub fn run(ctx: &Context) -> Result<Status, CliError> {
    let cfg = &ctx.config.lyapunov;
    let k = cfg.k;
    if cfg.width_offsets.is_empty() || cfg.lambdas.is_empty() {
        return Err(CliError::Usage("lyapunov needs at least one width offset and one lambda".into()));
    }
    let d = &ctx.config.domain;
    let coeffs = compute_coefficients(d.nx, d.half_length)?;
    let dk = discrete_critical_width(ctx.grid()?, k);
    let template = ctx.domain(dk)?;
    let opts = ctx.fixed_point();
    let mode = ctx.config.solver.exec;
    let widths: Vec<f64> = cfg.width_offsets.iter().map(|o| dk + o).collect();
    let surface = j_surface(&template, k, &widths, &cfg.lambdas, &opts, mode);
    let steps = ProbeSteps { lambda: cfg.probe_lambda_step, width: cfg.probe_width_step, levels: cfg.probe_levels };
    let table = probe_j_derivatives(&template, k, dk, &steps, &opts, mode)?;

    let out = OutDir::create(&ctx.out, "lyapunov", &ctx.config)?;
    let mut w = out.ndjson("lyapunov.ndjson")?;
    let mut rows = Vec::new();
    let mut diverged = 0;
    for (i, (width, row)) in widths.iter().zip(&surface).enumerate() {
        for (lambda, j) in cfg.lambdas.iter().zip(row) {
            let status = if j.is_some() { "ok" } else { "diverged" };
            diverged += j.is_none() as usize;
            w.record(
                "cell",
                &json!({ "width": width, "offset": cfg.width_offsets[i], "lambda": lambda, "j": j, "status": status }),
            )?;
            rows.push(vec![num(*width), num(cfg.width_offsets[i]), num(*lambda), opt(*j), status.to_string()]);
        }
    }
    w.record("derivatives", &table)?;

    // Antisymmetry over surface cells whose mirror cell is also on the grid.
    let mut odd = table.oddness_defect;
    let mut zero_line = table.j.abs();
    for row in &surface {
        for (a, la) in cfg.lambdas.iter().enumerate() {
            if let (Some(ja), Some(b)) = (row[a], cfg.lambdas.iter().position(|lb| *lb == -la)) {
                if let Some(jb) = row[b] {
                    odd = odd.max((ja + jb).abs());
                }
                if *la == 0.0 {
                    zero_line = zero_line.max(ja.abs());
                }
            }
        }
    }
    let primary = vec![
        Check::abs("d_dl J(d_k, 0)", table.dl_j.value, -2.0 * SQRT_2, 1e-2),
        Check::rel("d_lll J(d_k, 0) / d_k against omega", table.lll_j.value / dk, coeffs.omega, 2e-2),
        Check::at_most("max |J(d, l) + J(d, -l)|", odd, 0.0, 1e-10),
        Check::at_most("max |J(d, 0)|", zero_line, 0.0, 1e-10),
        Check::abs("J(d_k, 0)", table.j, 0.0, 1e-6),
        Check::abs("d_d J(d_k, 0)", table.d_j.value, 0.0, 1e-6),
        Check::abs("d_l J(d_k, 0)", table.l_j.value, 0.0, 1e-6),
        Check::abs("d_dd J(d_k, 0)", table.dd_j.value, 0.0, 1e-6),
        Check::abs("d_ll J(d_k, 0)", table.ll_j.value, 0.0, 1e-6),
    ];
    let supplementary = vec![Check::rel(
        "d_lll J(d_k, 0) / d_k against omega_reduced",
        table.lll_j.value / dk,
        coeffs.omega_reduced,
        2e-2,
    )];
    let pass = primary.iter().all(|c| c.pass);
    for c in &primary {
        println!("{c}");
        w.record("check", &json!({ "primary": true, "check": c }))?;
    }
    for c in &supplementary {
        println!("(supplementary) {c}");
        w.record("check", &json!({ "primary": false, "check": c }))?;
    }
    w.record(
        "summary",
        &json!({ "k": k, "discrete_critical_width": dk, "cells": rows.len(), "diverged": diverged, "pass": pass }),
    )?;
    w.finish()?;
    out.csv("j_surface.csv", &["width", "offset", "lambda", "j", "status"], &rows)?;
    let title = format!("J(d, lambda) for k = {k}; black line J = 0, grey cells diverged");
    out.svg("j_surface.svg", &svg::heatmap(&title, "d", "lambda", &widths, &cfg.lambdas, &surface))?;
    println!("J surface: {} cells, {diverged} diverged", rows.len());
    Ok(Status::from_pass(pass))
}
