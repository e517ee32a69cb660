//! Subcommand drivers. Each writes its files under the output directory and
//! reports whether every primary check passed.

pub mod branch;
pub mod coefficients;
pub mod lyapunov;
pub mod spectrum;
pub mod verify;

use std::path::PathBuf;

use strip_vortex::continuation::NewtonOptions;
use strip_vortex::reduction::FixedPointOptions;
use strip_vortex::{StripDomain, XGrid};

use crate::config::Config;
use crate::error::CliError;

/// Outcome of a run that completed without usage or solver errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    CriterionFailure,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Success
        } else {
            Status::CriterionFailure
        }
    }
}

pub struct Context {
    pub config: Config,
    pub out: PathBuf,
}

impl Context {
    pub fn grid(&self) -> Result<XGrid, CliError> {
        let d = &self.config.domain;
        Ok(XGrid::new(d.half_length, d.nx)?)
    }

    pub fn domain(&self, width: f64) -> Result<StripDomain, CliError> {
        let d = &self.config.domain;
        Ok(StripDomain::new(d.half_length, width, d.nx, d.n_modes)?)
    }

    pub fn newton(&self) -> NewtonOptions {
        let s = &self.config.solver;
        NewtonOptions { tol: s.newton_tol, max_iter: s.newton_max_iter }
    }

    pub fn fixed_point(&self) -> FixedPointOptions {
        let s = &self.config.solver;
        FixedPointOptions { tol: s.fixed_point_tol, max_iter: s.fixed_point_max_iter, ..FixedPointOptions::default() }
    }
}

/// `lo, lo + step, …` up to `hi` inclusive (with a small tolerance).
pub fn range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0 && hi >= lo) {
        return Vec::new();
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}
