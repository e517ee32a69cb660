//! Lyapunov–Schmidt reduction: the nonlinearities `f₀` and `g`, the projected
//! fixed-point map, the bifurcation function `J(d, λ)` and difference probes of
//! its derivatives at onset.
//!
//! A state is `Ψ = ψ₀ + W + λχ_k`, where `ψ₀` is the zero sector, `W` has no
//! zero sector and its `k` sector is orthogonal to `iχ₀`. All sector equations
//! use the same discretization as the full residual in `continuation`, so a
//! state with `J = 0` is an exact solution of the discrete strip problem.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{chi0, soliton};
use crate::banded::solve_bordered;
use crate::continuation::gp_residual;
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::fit::richardson_even;
use crate::layout::HalfLayout;
use crate::operators::{apply_sector_operator, assemble_sector_half, sector_d2};
use crate::strip::{SectorField, StripDomain, XGrid};

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Values of `Z = Σ_{j≥1} z_j cos(πjy/d)` at the quadrature nodes for node `i`.
fn transverse_samples(z: &SectorField, i: usize, table: &crate::strip::CosineTable, out: &mut [Complex64]) {
    for (q, v) in out.iter_mut().enumerate() {
        let mut s = czero();
        for j in 1..=z.n_modes() {
            s += z.coeffs[j][i] * table.get(q, j);
        }
        *v = s;
    }
}

/// `2⟨ψ₀, Z⟩Z + |Z|²(ψ₀ + Z)` at one point.
#[inline]
fn cubic_part(p: Complex64, z: Complex64) -> Complex64 {
    let inner = p.re * z.re + p.im * z.im;
    z * (2.0 * inner) + (p + z) * z.norm_sqr()
}

/// Transverse average `(1/d)∫₀^d [2⟨ψ₀, w⟩w + |w|²(ψ₀ + w)] dy`.
/// The zero sector of `w` is ignored.
pub fn f0(psi0: &[Complex64], w: &SectorField) -> Vec<Complex64> {
    let table = w.domain.cosine_table();
    let mut zq = vec![czero(); table.ny];
    (0..w.domain.nx())
        .map(|i| {
            transverse_samples(w, i, &table, &mut zq);
            let s: Complex64 = zq.iter().map(|&z| cubic_part(psi0[i], z)).sum();
            s / table.ny as f64
        })
        .collect()
}

/// `g(ψ₀, w) = −2⟨ψ₀, w⟩w − |w|²(ψ₀ + w) + f₀(ψ₀, w)` in sector form; the
/// zero sector is identically zero.
pub fn g_nl(psi0: &[Complex64], w: &SectorField) -> SectorField {
    let table = w.domain.cosine_table();
    let mut out = SectorField::zeros(w.domain);
    let mut zq = vec![czero(); table.ny];
    for i in 0..w.domain.nx() {
        transverse_samples(w, i, &table, &mut zq);
        let vals: Vec<Complex64> = zq.iter().map(|&z| -cubic_part(psi0[i], z)).collect();
        for j in 1..=w.n_modes() {
            let mut s = czero();
            for (q, v) in vals.iter().enumerate() {
                s += v * table.get(q, j);
            }
            out.coeffs[j][i] = s * table.projection_weight(j);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroSectorOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ZeroSectorOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_iter: 25 }
    }
}

/// Residual `−ψ₀″ − ψ₀(1 − |ψ₀|²) + f₀` packed on the half grid, with the
/// pinned entries at `x = 0` zeroed.
fn zero_sector_residual(psi: &[Complex64], rhs: &[Complex64], grid: &XGrid, layout: &HalfLayout) -> Vec<f64> {
    let d2 = sector_d2(psi, 0, grid);
    let r: Vec<Complex64> = (0..grid.nx).map(|i| -d2[i] - psi[i] * (1.0 - psi[i].norm_sqr()) + rhs[i]).collect();
    let mut v = layout.pack_sectors(&[r], 0);
    v[1] = 0.0;
    v
}

#[derive(Debug, Clone)]
pub struct ZeroSectorSolution {
    pub psi0: Vec<Complex64>,
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Newton solve of `−ψ₀″ − ψ₀(1 − |ψ₀|²) + f₀ = 0` in the symmetry class with
/// `ψ₀(0) = 0` pinned, starting from `initial` (or `S₀`).
pub fn solve_zero_sector(
    f0_rhs: &[Complex64],
    grid: &XGrid,
    initial: Option<&[Complex64]>,
    opts: &ZeroSectorOptions,
) -> Result<ZeroSectorSolution> {
    let layout = HalfLayout::new(grid.nx, 1);
    let mut psi: Vec<Complex64> = match initial {
        Some(p) => p.to_vec(),
        None => grid.points().iter().map(|&x| Complex64::new(soliton(x), 0.0)).collect(),
    };
    let c = layout.center;
    psi[c] = czero();
    let mut u = layout.pack_sectors(std::slice::from_ref(&psi), 0);
    let mut history = Vec::new();
    for it in 0..=opts.max_iter {
        let r = zero_sector_residual(&psi, f0_rhs, grid, &layout);
        let norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        history.push(norm);
        if norm <= opts.tol {
            return Ok(ZeroSectorSolution { psi0: psi, residual: norm, history });
        }
        if it == opts.max_iter || !norm.is_finite() {
            break;
        }
        let jac = assemble_sector_half(&psi, 0, 1.0, grid, true);
        let step = jac.lu()?.solve(&r);
        u.iter_mut().zip(&step).for_each(|(a, b)| *a -= b);
        psi = layout.unpack_sectors(&u).remove(0);
    }
    Err(Error::NoConvergence {
        solver: "zero-sector newton",
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
    })
}

fn chi_line(grid: &XGrid) -> Vec<Complex64> {
    grid.points().iter().map(|&x| Complex64::new(0.0, chi0(x))).collect()
}

/// Packed functional `u ↦ ⟨u, iχ₀⟩` (trapezoid rule, half-grid unknowns).
fn chi_functional(grid: &XGrid, layout: &HalfLayout) -> Vec<f64> {
    let w = grid.trapezoid_weights();
    let mut c = vec![0.0; layout.len()];
    for node in 0..layout.nodes {
        let i = layout.center + node;
        let mult = if node == 0 { 1.0 } else { 2.0 };
        c[2 * node + 1] = mult * w[i] * chi0(grid.x(i));
    }
    c
}

/// `⟨u, iχ₀⟩_{L²(ℝ)}` of one sector line.
pub fn chi_component(line: &[Complex64], grid: &XGrid) -> f64 {
    let w = grid.trapezoid_weights();
    (0..grid.nx).map(|i| w[i] * line[i].im * chi0(grid.x(i))).sum()
}

/// Sector solution of `π_k(T(w) − rhs) = 0` about `psi0`: plain solves for
/// `j ≠ k`, and for `j = k` the bordered system
/// `T_k w_k − μ iχ₀ = rhs_k`, `⟨w_k, iχ₀⟩ = 0`. Returns `w` and `μ`.
pub fn solve_projected_w(psi0: &[Complex64], rhs: &SectorField, k: usize) -> Result<(SectorField, f64)> {
    let domain = rhs.domain;
    let grid = domain.grid;
    let width = domain.width;
    let layout = HalfLayout::new(grid.nx, 1);
    let mut w = SectorField::zeros(domain);
    let mut mu = 0.0;
    for j in 1..=domain.n_modes {
        let r = layout.pack_sectors(&rhs.coeffs[j..=j], 0);
        if r.iter().all(|v| *v == 0.0) {
            continue;
        }
        let a = assemble_sector_half(psi0, j, width, &grid, false);
        let lu = a.lu().map_err(|_| Error::NearCritical {
            width,
            critical: std::f64::consts::PI * j as f64 / (0.5f64).sqrt(),
            sector: j,
        })?;
        let x = if j == k {
            let b: Vec<f64> = layout.pack_sectors(&[chi_line(&grid)], 0).iter().map(|v| -v).collect();
            let c = chi_functional(&grid, &layout);
            let (x, m) = solve_bordered(&a, &lu, &b, &c, 0.0, &r, 0.0)?;
            mu = m;
            x
        } else {
            lu.solve(&r)
        };
        w.coeffs[j] = layout.unpack_sectors(&x).remove(0);
    }
    Ok((w, mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    /// Stop when successive iterates differ by at most this (max norm).
    pub tol: f64,
    pub max_iter: usize,
    /// Relaxation applied when the iterate difference grows.
    pub damping: f64,
    pub zero_sector: ZeroSectorOptions,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 200, damping: 0.5, zero_sector: ZeroSectorOptions::default() }
    }
}

/// Converged reduction state `(ψ₀^λ, W^λ)` at `(d, λ)`.
#[derive(Debug, Clone)]
pub struct ReducedState {
    pub psi0: Vec<Complex64>,
    pub w: SectorField,
    pub lambda: f64,
    pub k: usize,
    pub width: f64,
    /// Last successive-iterate difference.
    pub fp_residual: f64,
    /// Successive-iterate differences.
    pub history: Vec<f64>,
}

impl ReducedState {
    /// `Ψ = ψ₀ + W + λχ_k`.
    pub fn assemble(&self) -> SectorField {
        let mut f = self.w.clone();
        f.coeffs[0] = self.psi0.clone();
        let grid = f.domain.grid;
        for i in 0..grid.nx {
            f.coeffs[self.k][i] += Complex64::new(0.0, self.lambda * chi0(grid.x(i)));
        }
        f
    }

    /// `⟨W_k, iχ₀⟩`, zero for members of the complement space.
    pub fn orthogonality_defect(&self) -> f64 {
        chi_component(&self.w.coeffs[self.k], &self.w.domain.grid)
    }
}

fn max_line_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Iterates the reduction map from `(S₀, 0)` until successive iterates agree to
/// `opts.tol`.
pub fn fixed_point(domain: StripDomain, k: usize, lambda: f64, opts: &FixedPointOptions) -> Result<ReducedState> {
    if k == 0 || k > domain.n_modes {
        return Err(Error::InvalidArgument(format!("sector {k} is outside 1..={}", domain.n_modes)));
    }
    let grid = domain.grid;
    let width = domain.width;
    let chi = chi_line(&grid);
    let mut psi0: Vec<Complex64> = grid.points().iter().map(|&x| Complex64::new(soliton(x), 0.0)).collect();
    let mut w = SectorField::zeros(domain);
    let mut history: Vec<f64> = Vec::new();
    for _ in 0..opts.max_iter {
        let mut z = w.clone();
        for i in 0..grid.nx {
            z.coeffs[k][i] += chi[i] * lambda;
        }
        let f = f0(&psi0, &z);
        let psi_new = solve_zero_sector(&f, &grid, Some(&psi0), &opts.zero_sector)?.psi0;
        let mut rhs = g_nl(&psi_new, &z);
        if lambda != 0.0 {
            let t_chi = apply_sector_operator(&psi_new, &chi, k, width, &grid);
            for i in 0..grid.nx {
                rhs.coeffs[k][i] -= t_chi[i] * lambda;
            }
        }
        let (w_new, _) = solve_projected_w(&psi_new, &rhs, k)?;
        let diff = max_line_diff(&psi_new, &psi0).max(w_new.max_coeff_diff(&w));
        let grew = history.last().is_some_and(|&p| diff > p);
        if grew && opts.damping < 1.0 {
            for (a, b) in psi0.iter_mut().zip(&psi_new) {
                *a += (b - *a) * opts.damping;
            }
            w = w.axpy(opts.damping, &w_new.axpy(-1.0, &w));
        } else {
            psi0 = psi_new;
            w = w_new;
        }
        history.push(diff);
        if !diff.is_finite() || diff > 1e3 {
            break;
        }
        if diff <= opts.tol {
            return Ok(ReducedState { psi0, w, lambda, k, width, fp_residual: diff, history });
        }
    }
    Err(Error::NoConvergence {
        solver: "reduction fixed point",
        iterations: history.len(),
        residual: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// `J = ⟨−ΔΨ − Ψ(1 − |Ψ|²), χ_k⟩_{L²((−d, d))}` for the assembled state.
pub fn bifurcation_j(state: &ReducedState) -> f64 {
    let f = state.assemble();
    let r = gp_residual(&f);
    let grid = f.domain.grid;
    -state.width * chi_component(&r.coeffs[state.k], &grid)
}

/// Largest sector coefficient of the full residual after removing its `χ_k` component.
pub fn complement_residual(state: &ReducedState) -> f64 {
    let f = state.assemble();
    let mut r = gp_residual(&f);
    let grid = f.domain.grid;
    let line = &r.coeffs[state.k];
    let chi = chi_line(&grid);
    let den = chi_component(&chi, &grid);
    let a = chi_component(line, &grid) / den;
    for i in 0..grid.nx {
        r.coeffs[state.k][i] -= chi[i] * a;
    }
    r.coeffs.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `J(d, λ)` on `template` with width `width`.
pub fn evaluate_j(template: &StripDomain, width: f64, k: usize, lambda: f64, opts: &FixedPointOptions) -> Result<f64> {
    let state = fixed_point(template.with_width(width)?, k, lambda, opts)?;
    Ok(bifurcation_j(&state))
}

/// Positive root `λ*` of `J(d, ·)` by the Illinois method on `J(d, λ)/λ`,
/// starting from the bracket around `guess`.
pub fn solve_lambda_star(
    domain: StripDomain,
    k: usize,
    guess: f64,
    opts: &FixedPointOptions,
) -> Result<(f64, ReducedState)> {
    let phi = |l: f64| -> Result<f64> { Ok(bifurcation_j(&fixed_point(domain, k, l, opts)?) / l) };
    let mut a = 0.5 * guess;
    let mut fa = phi(a)?;
    let mut b = 1.5 * guess;
    let mut fb = phi(b)?;
    let mut tries = 0;
    while fa.signum() == fb.signum() {
        tries += 1;
        if tries > 8 {
            return Err(Error::InvalidArgument(format!("no sign change of J near λ = {guess}")));
        }
        if fa > 0.0 {
            a *= 0.5;
            fa = phi(a)?;
        } else {
            b *= 1.3;
            fb = phi(b)?;
        }
    }
    let mut side = 0;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = phi(c)?;
        if (b - a).abs() <= 1e-13 * c.abs() || fc == 0.0 {
            let state = fixed_point(domain, k, c, opts)?;
            return Ok((c, state));
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= 1e-12 * c.abs() {
            let state = fixed_point(domain, k, c, opts)?;
            return Ok((c, state));
        }
    }
    Err(Error::NoConvergence { solver: "illinois", iterations: 100, residual: (b - a).abs() })
}

/// Difference steps for the derivative probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSteps {
    pub lambda: f64,
    pub width: f64,
    /// Number of step halvings combined by Richardson extrapolation.
    pub levels: usize,
}

impl Default for ProbeSteps {
    fn default() -> Self {
        Self { lambda: 0.05, width: 0.05, levels: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Size of the last extrapolation correction.
    pub error: f64,
}

/// Derivatives of `J` at `(d, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeTable {
    pub width: f64,
    pub k: usize,
    pub steps: ProbeSteps,
    pub j: f64,
    pub d_j: Estimate,
    pub l_j: Estimate,
    pub dd_j: Estimate,
    pub ll_j: Estimate,
    pub dl_j: Estimate,
    pub lll_j: Estimate,
    /// `max |J(d, λ) + J(d, −λ)|` over the probed `λ`.
    pub oddness_defect: f64,
    pub evaluations: usize,
}

/// Difference probes of `J` at `(width, 0)`. Each `(d, λ)` evaluation is
/// independent and is scheduled by `mode`.
pub fn probe_j_derivatives(
    template: &StripDomain,
    k: usize,
    width: f64,
    steps: &ProbeSteps,
    opts: &FixedPointOptions,
    mode: ExecMode,
) -> Result<DerivativeTable> {
    let levels = steps.levels.max(1);
    let lam: Vec<f64> = (0..=levels).map(|l| 2.0 * steps.lambda / 2f64.powi(l as i32)).collect();
    let dsteps = [steps.width, 0.5 * steps.width];
    let mut points: Vec<(f64, f64)> = vec![(width, 0.0)];
    for &s in &lam {
        points.push((width, s));
        points.push((width, -s));
    }
    for &h in &dsteps {
        for sign in [1.0, -1.0] {
            let d = width + sign * h;
            points.push((d, 0.0));
            for &s in &lam[1..] {
                points.push((d, s));
                points.push((d, -s));
            }
        }
    }
    let values = exec::map(mode, &points, |&(d, l)| evaluate_j(template, d, k, l, opts));
    let mut table = std::collections::HashMap::new();
    for (p, v) in points.iter().zip(values) {
        table.insert((p.0.to_bits(), p.1.to_bits()), v?);
    }
    let at = |d: f64, l: f64| table[&(d.to_bits(), l.to_bits())];
    let j0 = at(width, 0.0);
    let mut oddness_defect = 0.0f64;
    for p in &points {
        if p.1 > 0.0 {
            oddness_defect = oddness_defect.max((at(p.0, p.1) + at(p.0, -p.1)).abs());
        }
    }
    let first_lambda = |d: f64| -> Estimate {
        let v: Vec<f64> = lam[1..].iter().map(|&s| (at(d, s) - at(d, -s)) / (2.0 * s)).collect();
        let (value, error) = richardson_even(&v);
        Estimate { value, error }
    };
    let l_j = first_lambda(width);
    let ll: Vec<f64> = lam[1..].iter().map(|&s| (at(width, s) - 2.0 * j0 + at(width, -s)) / (s * s)).collect();
    let (v, e) = richardson_even(&ll);
    let ll_j = Estimate { value: v, error: e };
    let lll: Vec<f64> = lam[1..]
        .iter()
        .map(|&s| {
            (at(width, 2.0 * s) - 2.0 * at(width, s) + 2.0 * at(width, -s) - at(width, -2.0 * s)) / (2.0 * s.powi(3))
        })
        .collect();
    let (v, e) = richardson_even(&lll);
    let lll_j = Estimate { value: v, error: e };
    let d1: Vec<f64> = dsteps.iter().map(|&h| (at(width + h, 0.0) - at(width - h, 0.0)) / (2.0 * h)).collect();
    let (v, e) = richardson_even(&d1);
    let d_j = Estimate { value: v, error: e };
    let d2: Vec<f64> = dsteps.iter().map(|&h| (at(width + h, 0.0) - 2.0 * j0 + at(width - h, 0.0)) / (h * h)).collect();
    let (v, e) = richardson_even(&d2);
    let dd_j = Estimate { value: v, error: e };
    let dl: Vec<f64> =
        dsteps.iter().map(|&h| (first_lambda(width + h).value - first_lambda(width - h).value) / (2.0 * h)).collect();
    let (v, e) = richardson_even(&dl);
    let dl_j = Estimate { value: v, error: e };
    Ok(DerivativeTable {
        width,
        k,
        steps: *steps,
        j: j0,
        d_j,
        l_j,
        dd_j,
        ll_j,
        dl_j,
        lll_j,
        oddness_defect,
        evaluations: points.len(),
    })
}

/// `J(d, λ)` over a grid of cells; failed cells are `None` (left the
/// perturbative regime).
pub fn j_surface(
    template: &StripDomain,
    k: usize,
    widths: &[f64],
    lambdas: &[f64],
    opts: &FixedPointOptions,
    mode: ExecMode,
) -> Vec<Vec<Option<f64>>> {
    let cells: Vec<(f64, f64)> = widths.iter().flat_map(|&d| lambdas.iter().map(move |&l| (d, l))).collect();
    let vals = exec::map(mode, &cells, |&(d, l)| evaluate_j(template, d, k, l, opts).ok());
    vals.chunks(lambdas.len()).map(|c| c.to_vec()).collect()
}
