//! Acceptance suite. Each criterion produces a report with measured values,
//! targets, tolerances and runtime; the `acceptance` test target and the CLI
//! `verify` command both print these reports.
//!
//! Supplementary checks are printed but do not decide the verdict. They
//! compare the numerics with the coefficients of the directly expanded
//! bifurcation function (`omega_reduced` and its companions).

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analytic::{chi0, compute_coefficients, critical_width, soliton_d1, Coefficients};
use crate::continuation::{
    continue_branch, fit_amplitude, solve_onset_point, tiling_error, verify_energy_expansion, Branch,
    ContinuationOptions, NewtonOptions,
};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::operators::{assemble_l0, discrete_critical_width, soliton_morse_scan, spectrum, tk_lowest_scan, L0Sign};
use crate::reduction::{evaluate_j, probe_j_derivatives, solve_lambda_star, FixedPointOptions, ProbeSteps};
use crate::strip::{SectorField, StripDomain, XGrid};
use crate::vortices::{find_zeros, winding_number, VortexSet, ZeroOptions};

/// How a measured value is compared with its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured − target| ≤ tolerance`.
    AbsWithin,
    /// `|measured − target| ≤ tolerance·|target|`.
    RelWithin,
    /// `measured ≥ target − tolerance`.
    AtLeast,
    /// `measured ≤ target + tolerance`.
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    /// Extra context, e.g. why a convergence ratio sits at the roundoff floor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: &str, measured: f64, target: f64, tolerance: f64, relation: Relation) -> Self {
        let pass = match relation {
            Relation::AbsWithin => (measured - target).abs() <= tolerance,
            Relation::RelWithin => (measured - target).abs() <= tolerance * target.abs(),
            Relation::AtLeast => measured >= target - tolerance,
            Relation::AtMost => measured <= target + tolerance,
        };
        Self { name: name.to_string(), measured, target, tolerance, relation, pass, note: None }
    }

    pub fn abs(name: &str, measured: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, measured, target, tolerance, Relation::AbsWithin)
    }

    pub fn rel(name: &str, measured: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, measured, target, tolerance, Relation::RelWithin)
    }

    pub fn at_least(name: &str, measured: f64, bound: f64, slack: f64) -> Self {
        Self::new(name, measured, bound, slack, Relation::AtLeast)
    }

    pub fn at_most(name: &str, measured: f64, bound: f64, slack: f64) -> Self {
        Self::new(name, measured, bound, slack, Relation::AtMost)
    }

    /// Exact count comparison.
    pub fn count(name: &str, measured: usize, target: usize) -> Self {
        Self::abs(name, measured as f64, target as f64, 0.0)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn forced_fail(name: &str, note: String) -> Self {
        Self::abs(name, f64::NAN, 0.0, 0.0).with_note(note)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let op = match self.relation {
            Relation::AbsWithin => format!("= {:.10e} ± {:.1e}", self.target, self.tolerance),
            Relation::RelWithin => format!("= {:.10e} ± {:.1e} rel", self.target, self.tolerance),
            Relation::AtLeast => format!(">= {:.10e} (slack {:.1e})", self.target, self.tolerance),
            Relation::AtMost => format!("<= {:.10e} (slack {:.1e})", self.target, self.tolerance),
        };
        write!(f, "{verdict} {}: {:.10e} {op}", self.name, self.measured)?;
        if let Some(n) = &self.note {
            write!(f, " [{n}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
    pub supplementary: Vec<Check>,
    pub runtime_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl CriterionReport {
    fn new(id: u8, title: &str) -> Self {
        Self {
            id,
            title: title.to_string(),
            checks: Vec::new(),
            supplementary: Vec::new(),
            runtime_s: 0.0,
            skipped: None,
        }
    }

    /// True when not skipped and every primary check passes.
    pub fn passed(&self) -> bool {
        self.skipped.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    /// Summary line followed by one indented line per check.
    pub fn lines(&self) -> Vec<String> {
        let verdict = match (&self.skipped, self.passed()) {
            (Some(_), _) => "SKIP",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        };
        let mut out = vec![format!("criterion {:>2} {verdict} {} ({:.2} s)", self.id, self.title, self.runtime_s)];
        if let Some(r) = &self.skipped {
            out.push(format!("    skipped: {r}"));
        }
        out.extend(self.checks.iter().map(|c| format!("    {c}")));
        out.extend(self.supplementary.iter().map(|c| format!("    (supplementary) {c}")));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub half_length: f64,
    pub nx: usize,
    pub n_modes: usize,
    /// Resolutions for the convergence-order criterion, around `nx`.
    pub coarse_nx: usize,
    pub fine_nx: usize,
    pub newton_tol: f64,
    pub fixed_point_tol: f64,
    pub mode: ExecMode,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            half_length: 20.0,
            nx: 801,
            n_modes: 8,
            coarse_nx: 401,
            fine_nx: 1601,
            newton_tol: 1e-10,
            fixed_point_tol: 1e-11,
            mode: ExecMode::Parallel,
        }
    }
}

/// Smallest `nx` at which the grid-calibrated tolerances apply.
pub const CALIBRATED_NX: usize = 801;

/// Criteria whose tolerances are calibrated at the default grid.
const GRID_SENSITIVE: [u8; 5] = [2, 5, 6, 7, 12];

/// Criterion ids and titles, in order.
pub const CRITERIA: [(u8, &str); 12] = [
    (1, "critical widths from the T_k spectrum"),
    (2, "soliton spectrum"),
    (3, "closed-form integrals"),
    (4, "coefficient bounds"),
    (5, "bifurcation function"),
    (6, "amplitude law"),
    (7, "energy expansion"),
    (8, "vortex census"),
    (9, "tiling and R-symmetry"),
    (10, "Morse-index staircase"),
    (11, "reduction versus continuation"),
    (12, "convergence order"),
];

/// Relative width offsets of the onset branch.
const BRANCH_START: f64 = 0.005;
const BRANCH_END: f64 = 0.05;
const BRANCH_STEP: f64 = 0.0045;
/// Points nearest onset used by the energy fit.
const ENERGY_FIT_POINTS: usize = 6;

/// Shared state of one suite run; expensive objects are computed once.
pub struct Suite {
    pub config: SuiteConfig,
    coefficients: OnceLock<Result<Coefficients>>,
    branch1: OnceLock<Result<(f64, Branch)>>,
    psi2: OnceLock<Result<SectorField>>,
}

impl Suite {
    pub fn new(config: SuiteConfig) -> Self {
        Self { config, coefficients: OnceLock::new(), branch1: OnceLock::new(), psi2: OnceLock::new() }
    }

    fn grid(&self) -> Result<XGrid> {
        XGrid::new(self.config.half_length, self.config.nx)
    }

    fn domain(&self, width: f64, nx: usize, n_modes: usize) -> Result<StripDomain> {
        StripDomain::new(self.config.half_length, width, nx, n_modes)
    }

    fn newton(&self) -> NewtonOptions {
        NewtonOptions { tol: self.config.newton_tol, ..NewtonOptions::default() }
    }

    fn fixed_point_opts(&self) -> FixedPointOptions {
        FixedPointOptions { tol: self.config.fixed_point_tol, ..FixedPointOptions::default() }
    }

    pub fn coefficients(&self) -> Result<Coefficients> {
        self.coefficients.get_or_init(|| compute_coefficients(self.config.nx, self.config.half_length)).clone()
    }

    /// The `k = 1` branch over `d₁ʰ(1 + [0.005, 0.05])` at the suite grid, with
    /// `d₁ʰ` the discrete critical width.
    fn branch1(&self) -> Result<(f64, Branch)> {
        self.branch1.get_or_init(|| onset_branch(&self.config, self.config.nx, &self.coefficients()?)).clone()
    }

    /// `Ψ_{2,d}` at `d = d₂ + 0.2` with all `K` modes.
    fn psi2(&self) -> Result<SectorField> {
        self.psi2
            .get_or_init(|| {
                let c = self.coefficients()?;
                let grid = self.grid()?;
                let d = critical_width(2)? + 0.2;
                let dom = self.domain(d, self.config.nx, self.config.n_modes)?;
                let crit = discrete_critical_width(grid, 2);
                Ok(solve_onset_point(dom, 2, crit, c.lambda_coeff, &self.newton())?.0.field)
            })
            .clone()
    }

    /// Runs one criterion by id.
    pub fn run(&self, id: u8) -> CriterionReport {
        let title = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown");
        let mut report = CriterionReport::new(id, title);
        let start = Instant::now();
        if self.config.nx < CALIBRATED_NX && GRID_SENSITIVE.contains(&id) {
            report.skipped =
                Some(format!("tolerance is calibrated for nx >= {CALIBRATED_NX}; grid has nx = {}", self.config.nx));
            return report;
        }
        let outcome = match id {
            1 => self.critical_widths(&mut report),
            2 => self.soliton_spectrum(&mut report),
            3 => self.integrals(&mut report),
            4 => self.bounds(&mut report),
            5 => self.bifurcation_function(&mut report),
            6 => self.amplitude_law(&mut report),
            7 => self.energy_expansion(&mut report),
            8 => self.vortex_census(&mut report),
            9 => self.tiling(&mut report),
            10 => self.morse_staircase(&mut report),
            11 => self.cross_method(&mut report),
            12 => self.convergence(&mut report),
            _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
        };
        if let Err(e) = outcome {
            report.checks.push(Check::forced_fail("completed without solver error", e.to_string()));
        }
        report.runtime_s = start.elapsed().as_secs_f64();
        report
    }

    /// Runs every criterion in order.
    pub fn run_all(&self) -> Vec<CriterionReport> {
        CRITERIA.iter().map(|c| self.run(c.0)).collect()
    }

    fn critical_widths(&self, r: &mut CriterionReport) -> Result<()> {
        let grid = self.grid()?;
        let step = 0.01;
        for k in 1..=2 {
            let t = Instant::now();
            let dk = critical_width(k)?;
            let widths: Vec<f64> = (0..=100).map(|i| dk - 0.5 + i as f64 * step).collect();
            let low = tk_lowest_scan(grid, k, &widths, self.config.mode);
            let idx = low.windows(2).position(|w| w[0] > 0.0 && w[1] <= 0.0);
            let crossing = match idx {
                Some(i) => widths[i] + step * low[i] / (low[i] - low[i + 1]),
                None => f64::NAN,
            };
            r.checks.push(Check::abs(&format!("k={k} zero crossing of lowest T_k eigenvalue"), crossing, dk, step));
            r.checks.push(Check::at_most(&format!("k={k} scan runtime [s]"), t.elapsed().as_secs_f64(), 30.0, 0.0));
        }
        Ok(())
    }

    fn soliton_spectrum(&self, r: &mut CriterionReport) -> Result<()> {
        let grid = self.grid()?;
        let profile_error = |v: &[f64], exact: &dyn Fn(f64) -> f64| -> f64 {
            let e = grid.sample(exact);
            let norm = grid.trapezoid(&e.iter().map(|a| a * a).collect::<Vec<_>>()).sqrt();
            let diff: Vec<f64> = v.iter().zip(&e).map(|(a, b)| (a - b / norm).powi(2)).collect();
            grid.trapezoid(&diff).sqrt()
        };
        let minus = spectrum(&assemble_l0(L0Sign::Minus, grid), 1)?;
        r.checks.push(Check::abs("lowest eigenvalue of L0-", minus.eigenvalues[0], -0.5, 5e-4));
        r.checks.push(Check::at_most(
            "L2 error of L0- eigenvector against chi0",
            profile_error(&minus.eigenvectors[0], &chi0),
            0.0,
            1e-3,
        ));
        let plus = spectrum(&assemble_l0(L0Sign::Plus, grid), 1)?;
        r.checks.push(Check::abs("lowest eigenvalue of L0+", plus.eigenvalues[0], 0.0, 5e-4));
        r.checks.push(Check::at_most(
            "L2 error of L0+ eigenvector against S0'",
            profile_error(&plus.eigenvectors[0], &soliton_d1),
            0.0,
            1e-3,
        ));
        Ok(())
    }

    fn integrals(&self, r: &mut CriterionReport) -> Result<()> {
        let c = self.coefficients()?;
        r.checks.extend(integral_checks(&c));
        Ok(())
    }

    fn bounds(&self, r: &mut CriterionReport) -> Result<()> {
        let c = self.coefficients()?;
        let (primary, supplementary) = bound_checks(&c);
        r.checks.extend(primary);
        r.supplementary.extend(supplementary);
        Ok(())
    }

    fn bifurcation_function(&self, r: &mut CriterionReport) -> Result<()> {
        let t = Instant::now();
        let c = self.coefficients()?;
        let grid = self.grid()?;
        let dk = discrete_critical_width(grid, 1);
        let dom = self.domain(dk, self.config.nx, self.config.n_modes)?;
        let opts = self.fixed_point_opts();
        let table = probe_j_derivatives(&dom, 1, dk, &ProbeSteps::default(), &opts, self.config.mode)?;
        let mut j_zero = table.j.abs();
        for d in [dk - 0.2, dk + 0.2] {
            j_zero = j_zero.max(evaluate_j(&dom, d, 1, 0.0, &opts)?.abs());
        }
        r.checks.push(Check::at_most("max |J(d, 0)| at d_1 and d_1 +- 0.2", j_zero, 0.0, 1e-10));
        r.checks.push(Check::at_most("max |J(d, l) + J(d, -l)| over probes", table.oddness_defect, 0.0, 1e-10));
        r.checks.push(Check::abs("d_dl J(d_1, 0)", table.dl_j.value, -2.0 * SQRT_2, 1e-2));
        r.checks.push(Check::rel("d_lll J(d_1, 0) / d_1 against omega", table.lll_j.value / dk, c.omega, 2e-2));
        r.checks.push(Check::abs("J(d_1, 0)", table.j, 0.0, 1e-6));
        r.checks.push(Check::abs("d_d J(d_1, 0)", table.d_j.value, 0.0, 1e-6));
        r.checks.push(Check::abs("d_l J(d_1, 0)", table.l_j.value, 0.0, 1e-6));
        r.checks.push(Check::abs("d_dd J(d_1, 0)", table.dd_j.value, 0.0, 1e-6));
        r.checks.push(Check::abs("d_ll J(d_1, 0)", table.ll_j.value, 0.0, 1e-6));
        r.checks.push(Check::at_most("runtime [s]", t.elapsed().as_secs_f64(), 300.0, 0.0));
        r.supplementary.push(Check::rel(
            "d_lll J(d_1, 0) / d_1 against omega_reduced",
            table.lll_j.value / dk,
            c.omega_reduced,
            2e-2,
        ));
        Ok(())
    }

    fn amplitude_law(&self, r: &mut CriterionReport) -> Result<()> {
        let c = self.coefficients()?;
        let (_, branch) = self.branch1()?;
        r.checks.push(Check::count("branch points in d_1(1 + [0.005, 0.05])", branch.points.len(), expected_points()));
        let fit = fit_amplitude(&branch, branch.points.len())?;
        r.checks.push(Check::abs("amplitude exponent", fit.exponent, 0.5, 0.05));
        r.checks.push(Check::rel("amplitude prefactor against Lambda", fit.prefactor, c.lambda_coeff, 5e-2));
        r.supplementary.push(Check::rel(
            "amplitude prefactor against Lambda_reduced",
            fit.prefactor,
            c.lambda_reduced,
            5e-2,
        ));
        Ok(())
    }

    fn energy_expansion(&self, r: &mut CriterionReport) -> Result<()> {
        let c = self.coefficients()?;
        let (_, branch) = self.branch1()?;
        let min_deficit = branch.points.iter().map(|p| p.energy_deficit()).fold(f64::INFINITY, f64::min);
        r.checks.push(Check::at_least("minimum energy deficit E(S0) - E(Psi)", min_deficit, 0.0, 0.0));
        let fit = verify_energy_expansion(&branch, ENERGY_FIT_POINTS)?;
        r.checks.push(Check::rel("fitted energy coefficient against E", fit.coefficient, c.energy_coeff, 5e-2));
        r.checks.push(Check::abs("energy deficit exponent", fit.exponent, 2.0, 0.1));
        r.supplementary.push(Check::rel(
            "fitted energy coefficient against E_reduced",
            fit.coefficient,
            c.energy_reduced,
            5e-2,
        ));
        Ok(())
    }

    fn vortex_census(&self, r: &mut CriterionReport) -> Result<()> {
        let c = self.coefficients()?;
        let grid = self.grid()?;
        let h = grid.h();
        let opts = ZeroOptions::default();
        let d1 = critical_width(1)? + 0.2;
        let dom = self.domain(d1, self.config.nx, self.config.n_modes)?;
        let psi1 = solve_onset_point(dom, 1, discrete_critical_width(grid, 1), c.lambda_coeff, &self.newton())?.0.field;
        let set = find_zeros(&psi1, &opts);
        r.checks.push(Check::count("k=1 isolated zeros", set.len(), 1));
        if let Some(v) = set.entries.first() {
            r.checks.push(Check::abs("k=1 vortex x", v.x, 0.0, 2.0 * h));
            r.checks.push(Check::abs("k=1 vortex y", v.y, d1 / 2.0, 2.0 * h));
            r.checks.push(Check::abs("k=1 |degree|", v.degree.abs() as f64, 1.0, 0.0));
            r.supplementary.push(Check::abs("k=1 signed degree", v.degree as f64, -1.0, 0.0));
            r.supplementary.push(radius_independence(&psi1, &set));
        }
        if let Ok((_, branch)) = self.branch1() {
            let all_one = branch.points.iter().filter(|p| p.vortices.len() == 1).count();
            r.supplementary.push(Check::count("k=1 branch points with one vortex", all_one, branch.points.len()));
        }

        let psi2 = self.psi2()?;
        let d2 = psi2.width();
        let set = find_zeros(&psi2, &opts);
        r.checks.push(Check::count("k=2 isolated zeros", set.len(), 2));
        if set.len() == 2 {
            for (j, v) in set.entries.iter().enumerate() {
                r.checks.push(Check::abs(&format!("k=2 vortex {j} x"), v.x, 0.0, 2.0 * h));
                r.checks.push(Check::abs(&format!("k=2 vortex {j} y"), v.y, d2 * (2 * j + 1) as f64 / 4.0, 2.0 * h));
                r.checks.push(Check::abs(&format!("k=2 vortex {j} |degree|"), v.degree.abs() as f64, 1.0, 0.0));
                let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
                r.supplementary.push(Check::abs(&format!("k=2 vortex {j} signed degree"), v.degree as f64, sign, 0.0));
            }
            let product = (set.entries[0].degree * set.entries[1].degree) as f64;
            r.checks.push(Check::abs("k=2 product of degrees (alternation)", product, -1.0, 0.0));
            r.supplementary.push(radius_independence(&psi2, &set));
        }
        Ok(())
    }

    fn tiling(&self, r: &mut CriterionReport) -> Result<()> {
        let c = self.coefficients()?;
        let (_, branch) = self.branch1()?;
        let r_defect = branch
            .points
            .iter()
            .filter_map(|p| p.field.as_ref())
            .map(|f| f.reflect_conjugate().max_physical_diff(f, 161))
            .fold(0.0, f64::max);
        r.checks.push(Check::at_most("max |R Psi_1 - Psi_1| over k=1 branch", r_defect, 0.0, 1e-8));
        let psi2 = self.psi2()?;
        let grid = self.grid()?;
        let half = psi2.width() / 2.0;
        let dom = self.domain(half, self.config.nx, self.config.n_modes / 2)?;
        let psi1 = solve_onset_point(dom, 1, discrete_critical_width(grid, 1), c.lambda_coeff, &self.newton())?.0.field;
        let report = tiling_error(&psi2, &psi1, 2, 161)?;
        r.checks.push(Check::at_most("|Psi_2 - tiled Psi_1| at d = d_2 + 0.2", report.tiling_error, 0.0, 1e-6));
        r.checks.push(Check::at_most("|R Psi_1 - Psi_1| at d = d_1 + 0.1", report.base_symmetry_error, 0.0, 1e-8));
        Ok(())
    }

    fn morse_staircase(&self, r: &mut CriterionReport) -> Result<()> {
        let dom = self.domain(4.0, self.config.nx, self.config.n_modes)?;
        let expected = |d: f64| 1 + (1..).take_while(|&j| SQRT_2 * PI * (j as f64) < d).count();
        let widths: Vec<f64> = (0..100).map(|i| 2.05 + 0.1 * i as f64).collect();
        let counts = soliton_morse_scan(dom, &widths, self.config.mode)?;
        let mismatches = widths.iter().zip(&counts).filter(|(d, n)| expected(**d) != **n).count();
        r.checks.push(Check::count("scan widths with n_negative != 1 + #{d_j < d}", mismatches, 0));
        let mut jumps = Vec::new();
        for i in 0..widths.len() - 1 {
            if counts[i + 1] != counts[i] {
                let (mut a, mut b) = (widths[i], widths[i + 1]);
                let na = counts[i];
                while b - a > 1e-5 {
                    let m = 0.5 * (a + b);
                    if soliton_morse_scan(dom, &[m], ExecMode::Sequential)?[0] == na {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                jumps.push(0.5 * (a + b));
            }
        }
        r.checks.push(Check::count("number of jumps in (2, 12)", jumps.len(), 2));
        for (j, x) in jumps.iter().enumerate() {
            let dj = critical_width(j + 1)?;
            r.checks.push(Check::abs(&format!("jump {} location", j + 1), *x, dj, 0.02));
        }
        Ok(())
    }

    fn cross_method(&self, r: &mut CriterionReport) -> Result<()> {
        let c = self.coefficients()?;
        let grid = self.grid()?;
        let d = critical_width(1)? + 0.1;
        let dom = self.domain(d, self.config.nx, self.config.n_modes)?;
        let crit = discrete_critical_width(grid, 1);
        let newton = solve_onset_point(dom, 1, crit, c.lambda_coeff, &self.newton())?.0.field;
        let guess = c.lambda_coeff * ((d - crit) / crit).sqrt();
        let (lambda, state) = solve_lambda_star(dom, 1, guess, &self.fixed_point_opts())?;
        let reduced = state.assemble();
        r.checks.push(Check::at_most(
            "max |Psi_reduction - Psi_newton| on the physical grid",
            reduced.max_physical_diff(&newton, 161),
            0.0,
            1e-6,
        ));
        r.supplementary.push(Check::rel(
            "lambda* against continuation amplitude",
            lambda,
            crate::continuation::amplitude(&newton, 1),
            1e-6,
        ));
        Ok(())
    }

    fn convergence(&self, r: &mut CriterionReport) -> Result<()> {
        let cfg = self.config;
        let levels = [cfg.coarse_nx, cfg.nx, cfg.fine_nx];
        let coeffs: Vec<Coefficients> =
            levels.iter().map(|&n| compute_coefficients(n, cfg.half_length)).collect::<Result<_>>()?;
        let names = ["int chi0^2", "|S0|_H^2", "int S0 U0 chi0^2"];
        for (q, name) in names.iter().enumerate() {
            let v: Vec<f64> =
                coeffs.iter().map(|c| [c.int_chi0_sq, c.soliton_h_norm_sq, c.int_s0_u0_chi0_sq][q]).collect();
            r.checks.push(error_ratio(
                &format!("{name}: change {}->{} / change {}->{}", cfg.coarse_nx, cfg.nx, cfg.nx, cfg.fine_nx),
                (v[1] - v[0]).abs(),
                (v[2] - v[1]).abs(),
            ));
        }
        let coarse = onset_branch(&cfg, cfg.coarse_nx, &coeffs[0])?.1;
        let (_, mid) = self.branch1()?;
        let fine = onset_branch(&cfg, cfg.fine_nx, &coeffs[2])?.1;
        let fits: Vec<f64> = [&coarse, &mid, &fine]
            .iter()
            .map(|b| verify_energy_expansion(b, ENERGY_FIT_POINTS).map(|f| f.coefficient))
            .collect::<Result<_>>()?;
        r.checks.push(error_ratio(
            &format!(
                "fitted energy coefficient: change {}->{} / change {}->{}",
                cfg.coarse_nx, cfg.nx, cfg.nx, cfg.fine_nx
            ),
            (fits[1] - fits[0]).abs(),
            (fits[2] - fits[1]).abs(),
        ));
        let deficits: Vec<f64> = [&coarse, &mid, &fine].iter().map(|b| b.points[0].energy_deficit()).collect();
        r.supplementary.push(error_ratio(
            "energy deficit at the first branch point",
            (deficits[1] - deficits[0]).abs(),
            (deficits[2] - deficits[1]).abs(),
        ));
        let amps: Vec<f64> = [&coarse, &mid, &fine].iter().map(|b| b.points[0].amplitude).collect();
        r.supplementary.push(error_ratio(
            "amplitude at the first branch point",
            (amps[1] - amps[0]).abs(),
            (amps[2] - amps[1]).abs(),
        ));
        Ok(())
    }
}

/// Changes below this are indistinguishable from rounding in the quantities checked.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// `coarse_error / fine_error ≥ 3.5`, where the errors are the changes between
/// successive grids. Reported as at the floor when both changes are already
/// below rounding level, since no ratio can be resolved there.
fn error_ratio(name: &str, coarse_error: f64, fine_error: f64) -> Check {
    if coarse_error <= ROUNDOFF_FLOOR && fine_error <= ROUNDOFF_FLOOR {
        let mut c = Check::at_least(name, f64::INFINITY, 3.5, 0.0);
        c.note = Some(format!(
            "both errors below {ROUNDOFF_FLOOR:.0e} ({coarse_error:.2e}, {fine_error:.2e}): at roundoff floor"
        ));
        return c;
    }
    Check::at_least(name, coarse_error / fine_error, 3.5, 0.0)
        .with_note(format!("errors {coarse_error:.3e} -> {fine_error:.3e}"))
}

/// Closed-form integral checks at 1e-6.
pub fn integral_checks(c: &Coefficients) -> Vec<Check> {
    vec![
        Check::abs("int chi0^2", c.int_chi0_sq, 2.0 * SQRT_2, 1e-6),
        Check::abs("|S0|_H^2", c.soliton_h_norm_sq, 4.0 * SQRT_2 / 3.0, 1e-6),
        Check::abs("int S0 U0 chi0^2", c.int_s0_u0_chi0_sq, -c.int_chi0_4 / 8.0, 1e-6),
    ]
}

/// Coefficient inequalities with 1e-8 slack: the primary set on the closed-form
/// coefficients and a supplementary set on the reduced ones.
pub fn bound_checks(c: &Coefficients) -> (Vec<Check>, Vec<Check>) {
    let slack = 1e-8;
    let primary = vec![
        Check::at_least("omega >= (21/4) int chi0^4", c.omega, c.omega_bound(), slack),
        Check::at_least("-int S0 v chi0^2 >= 0", -c.cross_term, 0.0, slack),
        Check::at_most("-int S0 v chi0^2 <= int chi0^4", -c.cross_term, c.int_chi0_4, slack),
        Check::at_least("energy coefficient >= 9 Lambda^2/(14 sqrt2)", c.energy_coeff, c.energy_bound(), slack),
    ];
    let bound_reduced = 9.0 * c.lambda_reduced.powi(2) / (14.0 * SQRT_2);
    let supplementary = vec![
        Check::at_least("omega_reduced >= (21/4) int chi0^4", c.omega_reduced, c.omega_bound(), slack),
        Check::at_least("energy_reduced >= 9 Lambda_reduced^2/(14 sqrt2)", c.energy_reduced, bound_reduced, slack),
    ];
    (primary, supplementary)
}

fn expected_points() -> usize {
    ((BRANCH_END - BRANCH_START) / BRANCH_STEP + 1e-9).floor() as usize + 1
}

/// Onset branch for `k = 1` at resolution `nx`, relative offsets from the
/// discrete critical width. Returns that width and the branch.
fn onset_branch(cfg: &SuiteConfig, nx: usize, c: &Coefficients) -> Result<(f64, Branch)> {
    let grid = XGrid::new(cfg.half_length, nx)?;
    let dk = discrete_critical_width(grid, 1);
    let dom = StripDomain::new(cfg.half_length, dk, nx, cfg.n_modes)?;
    let opts = ContinuationOptions {
        newton: NewtonOptions { tol: cfg.newton_tol, ..NewtonOptions::default() },
        ..ContinuationOptions::default()
    };
    let branch =
        continue_branch(dom, 1, dk, c.lambda_coeff, BRANCH_START * dk, BRANCH_END * dk, BRANCH_STEP * dk, &opts)?;
    if let Some(d) = branch.lost_at {
        return Err(Error::NoConvergence { solver: "continuation", iterations: branch.points.len(), residual: d });
    }
    Ok((dk, branch))
}

/// Degrees at two contour radii agree for every vortex.
fn radius_independence(f: &SectorField, set: &VortexSet) -> Check {
    let h = f.domain.grid.h();
    let mismatches = set
        .entries
        .iter()
        .filter(|v| {
            let r_max = (0.45 * v.y).min(0.45 * (f.width() - v.y)).min(0.5);
            let a = winding_number(f, (v.x, v.y), r_max);
            let b = winding_number(f, (v.x, v.y), (0.5 * r_max).max(3.0 * h));
            a.is_err() || a != b
        })
        .count();
    Check::count("vortices whose degree changes between two radii", mismatches, 0)
}
