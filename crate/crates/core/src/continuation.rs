//! Full discrete problem: residual, Newton solver, branch continuation in the
//! width, energy, and comparisons with the near-onset expansions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{chi0, chi_k_field, soliton, soliton_d1, soliton_d2};
use crate::banded::{solve_bordered, BandLu};
use crate::error::{Error, Result};
use crate::fit;
use crate::layout::HalfLayout;
use crate::operators::{assemble_strip_linearization, sector_d2, TOL_ZERO};
use crate::strip::{SectorField, StripDomain};
use crate::vortices::{find_zeros, VortexSet, ZeroOptions};

/// `ΔΨ + Ψ(1 − |Ψ|²)` in sector form.
pub fn gp_residual(f: &SectorField) -> SectorField {
    let grid = f.domain.grid;
    let mut out = f.map_pointwise(|_, p| p * (1.0 - p.norm_sqr()));
    for j in 0..=f.n_modes() {
        let d2 = sector_d2(&f.coeffs[j], j, &grid);
        let kk = f.domain.wavenumber(j).powi(2);
        for i in 0..grid.nx {
            out.coeffs[j][i] += d2[i] - f.coeffs[j][i] * kk;
        }
    }
    out
}

/// Largest sector coefficient of the residual.
pub fn residual_norm(f: &SectorField) -> f64 {
    gp_residual(f).coeffs.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 25 }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub field: SectorField,
    pub residual_norm: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

fn packed_residual(f: &SectorField, layout: &HalfLayout) -> (Vec<f64>, f64) {
    let r = gp_residual(f);
    let norm = r.coeffs.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let mut v = layout.pack(&r);
    v.iter_mut().for_each(|x| *x = -*x);
    (v, norm)
}

/// Newton iteration on the symmetric half-grid unknowns with the exact
/// Jacobian of the discrete residual.
pub fn newton_solve(initial: &SectorField, opts: &NewtonOptions) -> Result<NewtonOutcome> {
    let layout = HalfLayout::for_domain(&initial.domain);
    let mut field = initial.enforce_symmetry();
    let mut u = layout.pack(&field);
    let mut history = Vec::new();
    for it in 0..=opts.max_iter {
        let (g, norm) = packed_residual(&field, &layout);
        history.push(norm);
        if !norm.is_finite() {
            break;
        }
        if norm <= opts.tol {
            return Ok(NewtonOutcome { field, residual_norm: norm, iterations: it, history });
        }
        if it == opts.max_iter {
            break;
        }
        let jac = assemble_strip_linearization(&field)?;
        let step = jac.jacobian().lu()?.solve(&g);
        u.iter_mut().zip(&step).for_each(|(a, b)| *a -= b);
        field = layout.unpack(&u, field.domain);
    }
    Err(Error::NoConvergence {
        solver: "newton",
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// `λ̂ = ⟨ψ_k, iχ₀⟩ / ‖χ₀‖²`, the `χ_k` component of a field.
pub fn amplitude(f: &SectorField, k: usize) -> f64 {
    let grid = f.domain.grid;
    let w = grid.trapezoid_weights();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..grid.nx {
        let c = chi0(grid.x(i));
        num += w[i] * f.coeffs[k][i].im * c;
        den += w[i] * c * c;
    }
    num / den
}

/// `S₀ + Λ√((d − d_k)/d_k) χ_k`.
pub fn asymptotic_guess(domain: StripDomain, k: usize, lambda_coeff: f64, critical: f64) -> Result<SectorField> {
    if domain.width < critical {
        return Err(Error::InvalidArgument(format!("width {} is below the critical width {critical}", domain.width)));
    }
    let a = lambda_coeff * ((domain.width - critical) / critical).sqrt();
    Ok(SectorField::soliton(domain).axpy(a, &chi_k_field(domain, k)?))
}

/// Discrete energy `½∫∫|∇Ψ|² + ¼∫∫(1 − |Ψ|²)²` on `[−L, L] × (0, d)`.
///
/// The `x` gradient of sector 0 is expanded about `S₀` (exact profile plus
/// forward differences of the perturbation) and the quartic term uses the
/// trapezoid rule with the transverse quadrature, so the gradient of this
/// functional is exactly the discrete residual.
pub fn energy(f: &SectorField) -> f64 {
    let grid = f.domain.grid;
    let h = grid.h();
    let w = grid.trapezoid_weights();
    let d = f.width();
    let kin_s0 = 0.5 * grid.simpson(&grid.sample(|x| soliton_d1(x).powi(2)));
    let forward =
        |line: &[Complex64]| -> f64 { line.windows(2).map(|p| (p[1] - p[0]).norm_sqr()).sum::<f64>() * 0.5 / h };
    let eps: Vec<Complex64> = (0..grid.nx).map(|i| f.coeffs[0][i] - soliton(grid.x(i))).collect();
    let cross: f64 = -(0..grid.nx).map(|i| w[i] * soliton_d2(grid.x(i)) * eps[i].re).sum::<f64>();
    let mut e = d * (kin_s0 + cross + forward(&eps));
    for j in 1..=f.n_modes() {
        let kk = f.domain.wavenumber(j).powi(2);
        let mass: f64 = f.coeffs[j].iter().zip(&w).map(|(v, wi)| wi * v.norm_sqr()).sum();
        e += 0.5 * d * (forward(&f.coeffs[j]) + 0.5 * kk * mass);
    }
    let table = f.domain.cosine_table();
    let mut pot = 0.0;
    for i in 0..grid.nx {
        let mut s = 0.0;
        for q in 0..table.ny {
            let mut p = Complex64::new(0.0, 0.0);
            for j in 0..=f.n_modes() {
                p += f.coeffs[j][i] * table.get(q, j);
            }
            s += (1.0 - p.norm_sqr()).powi(2);
        }
        pot += w[i] * s;
    }
    e + 0.25 * pot * d / table.ny as f64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchPoint {
    pub width: f64,
    #[serde(skip)]
    pub field: Option<SectorField>,
    pub amplitude: f64,
    pub energy: f64,
    pub soliton_energy: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub vortices: VortexSet,
    pub n_negative: Option<usize>,
    /// How the point was obtained: `newton`, `fixed_amplitude` or `arclength`.
    pub method: String,
}

impl BranchPoint {
    pub fn energy_deficit(&self) -> f64 {
        self.soliton_energy - self.energy
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub k: usize,
    pub critical_width: f64,
    pub points: Vec<BranchPoint>,
    /// Set when continuation stopped early: the last width attempted.
    pub lost_at: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub newton: NewtonOptions,
    /// A corrector whose amplitude drops below this fraction of the previous one counts as collapse.
    pub collapse_fraction: f64,
    pub detect_vortices: bool,
    pub morse_index: bool,
    pub zeros: ZeroOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            collapse_fraction: 0.25,
            detect_vortices: true,
            morse_index: false,
            zeros: ZeroOptions::default(),
        }
    }
}

fn width_derivative(f: &SectorField, layout: &HalfLayout) -> Vec<f64> {
    // ∂_d of the packed −(ΔΨ + N(Ψ)): the y-Laplacian term (πj/d)²ψ_j.
    let d = f.width();
    let mut df = SectorField::zeros(f.domain);
    for j in 1..=f.n_modes() {
        let s = -2.0 * (std::f64::consts::PI * j as f64).powi(2) / d.powi(3);
        for i in 0..f.domain.nx() {
            df.coeffs[j][i] = f.coeffs[j][i] * s;
        }
    }
    layout.pack(&df)
}

fn amplitude_functional(domain: &StripDomain, layout: &HalfLayout, k: usize) -> Vec<f64> {
    let grid = domain.grid;
    let w = grid.trapezoid_weights();
    let den: f64 = (0..grid.nx).map(|i| w[i] * chi0(grid.x(i)).powi(2)).sum();
    let mut c = vec![0.0; layout.len()];
    for node in 0..layout.nodes {
        let i = layout.center + node;
        let mult = if node == 0 { 1.0 } else { 2.0 };
        c[layout.index(node, k, 1)] = mult * w[i] * chi0(grid.x(i)) / den;
    }
    c
}

/// Newton on `(Ψ, d)` with either a prescribed amplitude `⟨c, u⟩ = s` or a
/// pseudo-arclength condition `⟨c, u⟩ + e·d = s`.
fn bordered_newton(initial: &SectorField, c: &[f64], e: f64, s: f64, opts: &NewtonOptions) -> Result<NewtonOutcome> {
    let layout = HalfLayout::for_domain(&initial.domain);
    let mut field = initial.enforce_symmetry();
    let mut u = layout.pack(&field);
    let mut d = field.width();
    let mut history = Vec::new();
    for it in 0..=opts.max_iter {
        let (g, norm) = packed_residual(&field, &layout);
        let cons = crate::banded::dot(c, &u) + e * d - s;
        let total = norm.max(cons.abs());
        history.push(total);
        if !total.is_finite() {
            break;
        }
        if total <= opts.tol {
            return Ok(NewtonOutcome { field, residual_norm: norm, iterations: it, history });
        }
        if it == opts.max_iter {
            break;
        }
        let jac = assemble_strip_linearization(&field)?;
        let lu: BandLu = jac.jacobian().lu()?;
        let b = width_derivative(&field, &layout);
        let (du, dd) = solve_bordered(jac.jacobian(), &lu, &b, c, e, &g, cons)?;
        u.iter_mut().zip(&du).for_each(|(a, x)| *a -= x);
        d -= dd;
        let domain = field.domain.with_width(d)?;
        field = layout.unpack(&u, domain);
    }
    Err(Error::NoConvergence {
        solver: "bordered newton",
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// Solves for a branch field with prescribed amplitude, the width being free.
pub fn solve_fixed_amplitude(
    initial: &SectorField,
    k: usize,
    target: f64,
    opts: &NewtonOptions,
) -> Result<NewtonOutcome> {
    let layout = HalfLayout::for_domain(&initial.domain);
    let c = amplitude_functional(&initial.domain, &layout, k);
    bordered_newton(initial, &c, 0.0, target, opts)
}

fn make_point(
    field: SectorField,
    k: usize,
    outcome_res: f64,
    iterations: usize,
    method: &str,
    opts: &ContinuationOptions,
) -> Result<BranchPoint> {
    let n_negative =
        if opts.morse_index { Some(assemble_strip_linearization(&field)?.n_negative(TOL_ZERO)) } else { None };
    let vortices = if opts.detect_vortices { find_zeros(&field, &opts.zeros) } else { VortexSet::default() };
    Ok(BranchPoint {
        width: field.width(),
        amplitude: amplitude(&field, k),
        energy: energy(&field),
        soliton_energy: energy(&SectorField::soliton(field.domain)),
        residual_norm: outcome_res,
        iterations,
        vortices,
        n_negative,
        method: method.to_string(),
        field: Some(field),
    })
}

/// Solves for the branch field at one width from the asymptotic guess. When
/// Newton falls back onto `S₀`, the amplitude is pinned at the guess with the
/// width free, and Newton is restarted from that field at the target width.
pub fn solve_onset_point(
    domain: StripDomain,
    k: usize,
    critical: f64,
    lambda_coeff: f64,
    opts: &NewtonOptions,
) -> Result<(NewtonOutcome, &'static str)> {
    let d0 = domain.width;
    let guess = asymptotic_guess(domain, k, lambda_coeff, critical)?;
    let predicted = amplitude(&guess, k);
    let collapsed = |f: &SectorField| amplitude(f, k).abs() < COLLAPSE_FRACTION * predicted;
    let (o, method) = match newton_solve(&guess, opts) {
        Ok(o) if !collapsed(&o.field) => (o, "newton"),
        _ => {
            let pinned = solve_fixed_amplitude(&guess, k, predicted, opts)?;
            (newton_solve(&pinned.field.with_width(d0)?, opts)?, "fixed_amplitude")
        }
    };
    if collapsed(&o.field) {
        return Err(Error::Collapse { width: d0 });
    }
    Ok((o, method))
}

/// A converged onset amplitude below this fraction of the guess counts as collapse onto `S₀`.
const COLLAPSE_FRACTION: f64 = 0.25;

/// Continues the branch bifurcating from `d_k` (passed as `critical`) over
/// `d ∈ [critical + start, critical + end]` with step `step`. The first
/// point is seeded by the asymptotic guess with prefactor `lambda_coeff`,
/// later points by a secant predictor. Collapse onto `S₀` triggers a
/// fixed-amplitude solve; a stalled corrector triggers a pseudo-arclength step.
#[allow(clippy::too_many_arguments)]
pub fn continue_branch(
    template: StripDomain,
    k: usize,
    critical: f64,
    lambda_coeff: f64,
    start: f64,
    end: f64,
    step: f64,
    opts: &ContinuationOptions,
) -> Result<Branch> {
    if !(start > 0.0 && end > start && step > 0.0) {
        return Err(Error::InvalidArgument("need 0 < start < end and step > 0".into()));
    }
    let n_steps = ((end - start) / step + 1e-9).floor() as usize;
    let targets: Vec<f64> = (0..=n_steps).map(|i| critical + start + i as f64 * step).collect();
    let mut branch = Branch { k, critical_width: critical, points: Vec::new(), lost_at: None };
    let layout = HalfLayout::for_domain(&template);

    let d0 = targets[0];
    let (o, method) = match solve_onset_point(template.with_width(d0)?, k, critical, lambda_coeff, &opts.newton) {
        Ok(v) => v,
        Err(Error::Collapse { width }) => return Err(Error::Collapse { width }),
        Err(_) => {
            branch.lost_at = Some(d0);
            return Ok(branch);
        }
    };
    branch.points.push(make_point(o.field, k, o.residual_norm, o.iterations, method, opts)?);

    let mut t = 1;
    while t < targets.len() {
        let target = targets[t];
        let n = branch.points.len();
        let last = branch.points[n - 1].field.clone().unwrap();
        let predictor = if n >= 2 {
            let prev = branch.points[n - 2].field.as_ref().unwrap();
            let ratio = (target - last.width()) / (last.width() - prev.width());
            let mut p = last.axpy(ratio, &last.axpy(-1.0, prev));
            p.domain = template.with_width(target)?;
            p
        } else {
            last.with_width(target)?
        };
        let lam_last = branch.points[n - 1].amplitude;
        match newton_solve(&predictor, &opts.newton) {
            Ok(o) if amplitude(&o.field, k) >= opts.collapse_fraction * lam_last => {
                branch.points.push(make_point(o.field, k, o.residual_norm, o.iterations, "newton", opts)?);
                t += 1;
            }
            _ => {
                // Pseudo-arclength corrector along the secant direction.
                let ok = if n >= 2 {
                    let prev = branch.points[n - 2].field.as_ref().unwrap();
                    let du: Vec<f64> = layout.pack(&last).iter().zip(layout.pack(prev)).map(|(a, b)| a - b).collect();
                    let dd = last.width() - prev.width();
                    let norm = (crate::banded::dot(&du, &du) + dd * dd).sqrt();
                    let ds = (target - last.width()).abs() / dd.abs().max(1e-12) * norm;
                    let tu: Vec<f64> = du.iter().map(|v| v / norm).collect();
                    let td = dd / norm;
                    let u_last = layout.pack(&last);
                    let s = crate::banded::dot(&tu, &u_last) + td * last.width() + ds;
                    bordered_newton(&predictor, &tu, td, s, &opts.newton).ok()
                } else {
                    None
                };
                match ok {
                    Some(o) if o.field.width() > last.width() => {
                        let w = o.field.width();
                        branch.points.push(make_point(o.field, k, o.residual_norm, o.iterations, "arclength", opts)?);
                        while t < targets.len() && targets[t] <= w + 1e-12 {
                            t += 1;
                        }
                    }
                    _ => {
                        branch.lost_at = Some(target);
                        break;
                    }
                }
            }
        }
    }
    Ok(branch)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyFit {
    /// Least-squares slope of the deficit against `(d − d_k)²/d_k`.
    pub coefficient: f64,
    /// Log-log slope of the deficit against `d − d_k`.
    pub exponent: f64,
    pub all_positive: bool,
    pub n_points: usize,
}

/// Fits the energy deficit of the `n_points` points nearest onset.
pub fn verify_energy_expansion(branch: &Branch, n_points: usize) -> Result<EnergyFit> {
    if branch.points.len() < n_points || n_points < 2 {
        return Err(Error::InvalidArgument(format!("branch has {} points, need {n_points}", branch.points.len())));
    }
    let dk = branch.critical_width;
    let all_positive = branch.points.iter().all(|p| p.energy_deficit() > 0.0);
    let pts = &branch.points[..n_points];
    let xs: Vec<f64> = pts.iter().map(|p| (p.width - dk).powi(2) / dk).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.energy_deficit()).collect();
    let coefficient = fit::slope_through_origin(&xs, &ys);
    let lx: Vec<f64> = pts.iter().map(|p| (p.width - dk).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.abs().ln()).collect();
    let exponent = fit::linear(&lx, &ly).1;
    Ok(EnergyFit { coefficient, exponent, all_positive, n_points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeFit {
    /// Log-log slope of the amplitude against `d − d_k`.
    pub exponent: f64,
    /// Limit of `λ̂/√((d − d_k)/d_k)` at onset (linear extrapolation in `d − d_k`).
    pub prefactor: f64,
    pub n_points: usize,
}

/// Fits the amplitude law on the `n_points` points nearest onset.
pub fn fit_amplitude(branch: &Branch, n_points: usize) -> Result<AmplitudeFit> {
    if branch.points.len() < n_points || n_points < 2 {
        return Err(Error::InvalidArgument(format!("branch has {} points, need {n_points}", branch.points.len())));
    }
    let dk = branch.critical_width;
    let pts = &branch.points[..n_points];
    let lx: Vec<f64> = pts.iter().map(|p| (p.width - dk).ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.amplitude.abs().ln()).collect();
    let exponent = fit::linear(&lx, &ly).1;
    let ex: Vec<f64> = pts.iter().map(|p| p.width - dk).collect();
    let ratio: Vec<f64> = pts.iter().map(|p| p.amplitude / ((p.width - dk) / dk).sqrt()).collect();
    let prefactor = fit::linear(&ex, &ratio).0;
    Ok(AmplitudeFit { exponent, prefactor, n_points })
}

/// Extends a field on width `d'` to width `k·d'` by mirror images across the
/// Neumann lines: tile `j` holds `conj^j(R^j Ψ)`, which for odd `j` is
/// `Ψ(x, d' − t)`. In sectors this maps `ψ_j` to sector `k·j`.
pub fn tile_field(base: &SectorField, k: usize, target: StripDomain) -> Result<SectorField> {
    if (target.width - k as f64 * base.width()).abs() > 1e-9 * target.width {
        return Err(Error::InvalidArgument(format!("width mismatch: {} vs {}·{}", target.width, k, base.width())));
    }
    if target.nx() != base.domain.nx() || target.grid.half_length != base.domain.grid.half_length {
        return Err(Error::InvalidArgument("x grids differ".into()));
    }
    let mut out = SectorField::zeros(target);
    for j in 0..=base.n_modes() {
        if k * j <= target.n_modes {
            out.coeffs[k * j] = base.coeffs[j].clone();
        }
    }
    Ok(out)
}

/// Physical-space tiling of `base` over `k` tiles, evaluated tile by tile with
/// the conjugate reflection.
pub fn tiled_values(base: &SectorField, k: usize, ys: &[f64]) -> ndarray::Array2<Complex64> {
    let dp = base.width();
    let reflected = base.reflect_conjugate().conj();
    let nx = base.domain.nx();
    let mut out = ndarray::Array2::zeros((nx, ys.len()));
    for (q, &y) in ys.iter().enumerate() {
        let j = ((y / dp).floor() as usize).min(k - 1);
        let t = y - j as f64 * dp;
        let src = if j.is_multiple_of(2) { base } else { &reflected };
        let col = src.evaluate_rows(&[t]);
        for i in 0..nx {
            out[(i, q)] = col.values[(i, 0)];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingReport {
    pub width: f64,
    /// `max |Ψ_k − Υ|` on the physical grid.
    pub tiling_error: f64,
    /// `max |RΨ₁ − Ψ₁|`.
    pub base_symmetry_error: f64,
}

/// Compares `psi_k` with the tiling of `psi_1` (width `d/k`).
pub fn tiling_error(psi_k: &SectorField, psi_1: &SectorField, k: usize, y_points: usize) -> Result<TilingReport> {
    if (psi_k.width() - k as f64 * psi_1.width()).abs() > 1e-9 * psi_k.width() {
        return Err(Error::InvalidArgument("width mismatch between tiled and target fields".into()));
    }
    let phys = psi_k.to_physical(y_points);
    let tiled = tiled_values(psi_1, k, &phys.ys);
    let tiling_error = phys.values.iter().zip(tiled.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let base_symmetry_error = psi_1.reflect_conjugate().max_physical_diff(psi_1, y_points);
    Ok(TilingReport { width: psi_k.width(), tiling_error, base_symmetry_error })
}

/// Pairs branch points of widths `d` and `d/k` and compares them.
pub fn verify_tiling(branch_k: &Branch, branch_1: &Branch) -> Result<Vec<TilingReport>> {
    let k = branch_k.k;
    let mut out = Vec::new();
    for p in &branch_k.points {
        let q = branch_1
            .points
            .iter()
            .find(|q| (k as f64 * q.width - p.width).abs() <= 1e-9 * p.width)
            .ok_or_else(|| Error::InvalidArgument(format!("no base point at width {}", p.width / k as f64)))?;
        let (Some(fk), Some(f1)) = (&p.field, &q.field) else {
            return Err(Error::InvalidArgument("branch points carry no fields".into()));
        };
        out.push(tiling_error(fk, f1, k, 161)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soliton_is_discrete_solution() {
        let d = StripDomain::new(20.0, 4.0, 201, 2).unwrap();
        assert!(residual_norm(&SectorField::soliton(d)) < 1e-13);
        // The vacuum is a solution up to the O(h²) difference between S₀″ and D²S₀.
        let one = SectorField::constant(d, Complex64::new(1.0, 0.0));
        assert!(residual_norm(&one) < 0.2 * d.grid.h().powi(2));
    }

    #[test]
    fn soliton_energy_density() {
        let d = StripDomain::new(20.0, 3.0, 401, 2).unwrap();
        let e = energy(&SectorField::soliton(d));
        let exact = 3.0 * 2.0 * std::f64::consts::SQRT_2 / 3.0;
        assert!(((e - exact) / exact).abs() < 1e-10);
        let vac = energy(&SectorField::constant(d, Complex64::new(1.0, 0.0)));
        assert!(vac.abs() < d.grid.h().powi(2));
    }
}
