//! Versioned run configuration. Files are TOML; command-line flags override
//! file values and the resolved configuration is embedded in every output.

use serde::{Deserialize, Serialize};
use std::path::Path;
use strip_vortex::ExecMode;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub schema_version: u32,
    pub domain: DomainConfig,
    pub solver: SolverConfig,
    pub spectrum: SpectrumConfig,
    pub branch: BranchConfig,
    pub lyapunov: LyapunovConfig,
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub half_length: f64,
    pub nx: usize,
    pub n_modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
    pub exec: ExecMode,
}

/// Width scan for `spectrum`. Missing bounds default to `d_k ∓ 0.5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub k: usize,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub step: f64,
    pub n_eigs: usize,
}

/// Offsets are absolute widths above the discrete critical width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchConfig {
    pub k: usize,
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub morse_index: bool,
}

/// `J(d, λ)` surface on `d_k + width_offsets` by `lambdas`, plus the
/// derivative probe at `d_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovConfig {
    pub k: usize,
    pub width_offsets: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub probe_lambda_step: f64,
    pub probe_width_step: f64,
    pub probe_levels: usize,
}

/// Criteria to run; empty means all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub criteria: Vec<u8>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            domain: DomainConfig::default(),
            solver: SolverConfig::default(),
            spectrum: SpectrumConfig::default(),
            branch: BranchConfig::default(),
            lyapunov: LyapunovConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { half_length: 20.0, nx: 801, n_modes: 8 }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            newton_max_iter: 25,
            fixed_point_tol: 1e-11,
            fixed_point_max_iter: 200,
            exec: ExecMode::Parallel,
        }
    }
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { k: 1, d_min: None, d_max: None, step: 0.01, n_eigs: 3 }
    }
}

impl Default for BranchConfig {
    fn default() -> Self {
        Self { k: 1, start: 0.05, end: 1.0, step: 0.05, morse_index: false }
    }
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            k: 1,
            width_offsets: vec![-0.2, -0.1, 0.0, 0.1, 0.2],
            lambdas: (-8..=8).map(|i| 0.075 * i as f64).collect(),
            probe_lambda_step: 0.05,
            probe_width_step: 0.05,
            probe_levels: 3,
        }
    }
}

/// Flag overrides shared by every subcommand.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub nx: Option<usize>,
    pub half_length: Option<f64>,
    pub modes: Option<usize>,
    pub tol: Option<f64>,
}

impl Config {
    /// Reads `path` (or the defaults), applies `overrides` and validates.
    pub fn resolve(path: Option<&Path>, overrides: Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text)?
            }
            None => Self::default(),
        };
        if let Some(v) = overrides.nx {
            cfg.domain.nx = v;
        }
        if let Some(v) = overrides.half_length {
            cfg.domain.half_length = v;
        }
        if let Some(v) = overrides.modes {
            cfg.domain.n_modes = v;
        }
        if let Some(v) = overrides.tol {
            cfg.solver.newton_tol = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a config file; `schema_version` is required, every other key defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        if !table.contains_key("schema_version") {
            return Err(CliError::Config("missing schema_version".into()));
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let d = &self.domain;
        strip_vortex::StripDomain::new(d.half_length, 1.0, d.nx, d.n_modes)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let s = &self.solver;
        if !(s.newton_tol > 0.0 && s.fixed_point_tol > 0.0) {
            return Err(CliError::Config("solver tolerances must be positive".into()));
        }
        for (name, k) in [("spectrum", self.spectrum.k), ("branch", self.branch.k), ("lyapunov", self.lyapunov.k)] {
            if k == 0 || k > d.n_modes {
                return Err(CliError::Config(format!("{name}.k = {k} is outside 1..={}", d.n_modes)));
            }
        }
        if self.spectrum.n_eigs == 0 {
            return Err(CliError::Config("spectrum.n_eigs must be at least 1".into()));
        }
        if let Some(c) = self.verify.criteria.iter().find(|c| !(1..=12).contains(*c)) {
            return Err(CliError::Config(format!("verify.criteria contains unknown criterion {c}")));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = Config::default();
        assert_eq!(Config::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn overrides_take_precedence() {
        let o = Overrides { nx: Some(401), tol: Some(1e-9), ..Overrides::default() };
        let cfg = Config::resolve(None, o).unwrap();
        assert_eq!(cfg.domain.nx, 401);
        assert_eq!(cfg.solver.newton_tol, 1e-9);
        assert_eq!(cfg.solver.fixed_point_tol, 1e-11);
    }

    #[test]
    fn rejects_out_of_range_values() {
        assert!(Config::parse("schema_version = 1\n[branch]\nk = 9\n").unwrap().validate().is_err());
        assert!(Config::parse("schema_version = 1\n[solver]\nnewton_tol = 0.0\n").unwrap().validate().is_err());
        assert!(Config::parse("[domain]\nnx = 401\n").is_err());
    }
}
