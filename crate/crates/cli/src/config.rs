//! Flat `key = value` configuration files.
//!
//! Lines are `section.key = value`; blank lines and lines starting with `#`
//! are ignored. Every key has a default, so an empty file is valid. `auto`
//! defers the choice to the command (see [`KEYS`]).

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use efmrf_core::learner::{FitConfig, LambdaGrid, Method};
use efmrf_core::spg::SpgConfig;
use efmrf_core::CopulaFamily;

use crate::error::CliError;

/// Recognized keys with their defaults and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("fit.method", "EFLambda", "ET, EFCuts or EFLambda"),
    ("fit.rho_min", "2", "smallest rho of the penalty grid lambda = exp(-rho)"),
    ("fit.rho_max", "5", "largest rho of the penalty grid"),
    ("fit.rho_step", "0.1", "rho grid step"),
    ("fit.gamma", "0.5", "eBIC gamma in [0, 1]"),
    ("fit.cut_count", "100", "cuts per EF-cuts enumeration, the trivial cut included"),
    ("fit.candidates", "auto", "comma-separated copula families; auto = all for fit, the generating family for benchmark"),
    ("fit.folds", "5", "cross-validation folds for copula selection"),
    ("fit.threshold", "1e-8", "weights above this count as edges"),
    ("fit.max_outer_rounds", "20", "partition refresh rounds per penalty"),
    ("fit.cut_rounds", "3", "cut re-enumeration rounds for EF-cuts"),
    ("spg.max_iterations", "500", "SPG iteration budget per run"),
    ("spg.step_min", "1e-10", "smallest spectral step"),
    ("spg.step_max", "1e10", "largest spectral step"),
    ("spg.memory", "10", "nonmonotone line search memory"),
    ("spg.sufficient_decrease", "1e-4", "Armijo constant"),
    ("spg.tolerance", "1e-5", "projected gradient infinity-norm tolerance"),
    ("spg.max_backtracks", "30", "step halvings per line search"),
    ("scenario.samples", "auto", "rows to simulate; auto = 500 (50 for highdim)"),
    ("scenario.dim", "auto", "variables; auto = 25 (80 for highdim)"),
    ("scenario.avg_degree", "auto", "average degree of random graphs; auto = 2 (3 for highdim)"),
    ("scenario.components", "auto", "components of random graphs; auto = 2 for gmrf2, else 1"),
    ("scenario.df", "1", "t-copula degrees of freedom for tclique"),
    ("scenario.clique_sizes", "3,4", "allowed clique sizes for tclique"),
    ("benchmark.methods", "ET,EFCuts,EFLambda", "methods to compare"),
    ("benchmark.repetitions", "20", "repetitions per sample size"),
    ("benchmark.sample_sizes", "auto", "comma-separated sample sizes; auto = 50,125,250,500 for gmrf1, else the scenario size"),
    ("benchmark.fdr_cap", "0.01", "FDR truncation of ROC curves"),
    ("density.family", "gaussian", "copula family of the density grid"),
    ("density.theta", "0.5", "copula parameter"),
    ("density.df", "4", "degrees of freedom (Student's t only)"),
    ("density.grid_size", "81", "grid points per axis"),
    ("density.range", "4", "grid spans [-range, range] on both axes"),
];

/// Resolved key/value pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Self { values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect() }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut config = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Input(format!("config line {}: expected key = value", i + 1)));
            };
            config.set(key.trim(), value.trim()).map_err(|e| CliError::Input(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(config)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => Self::parse(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(CliError::Input(format!("unknown config key '{key}'"))),
        }
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("unregistered config key {key}"))
    }

    pub fn snapshot(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.raw(key);
        raw.parse().map_err(|_| CliError::Input(format!("config key '{key}': cannot parse '{raw}'")))
    }

    /// `None` when the key is `auto`.
    pub fn get_auto<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        if self.raw(key).eq_ignore_ascii_case("auto") {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        let raw = self.raw(key);
        if raw.eq_ignore_ascii_case("auto") {
            return Ok(None);
        }
        raw.split(',')
            .map(|s| s.trim().parse().map_err(|_| CliError::Input(format!("config key '{key}': cannot parse '{s}'"))))
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    pub fn methods(&self, key: &str) -> Result<Vec<Method>, CliError> {
        self.raw(key)
            .split(',')
            .map(|s| Method::from_name(s).ok_or_else(|| CliError::Input(format!("config key '{key}': unknown method '{s}'"))))
            .collect()
    }

    pub fn families(&self, key: &str) -> Result<Option<Vec<CopulaFamily>>, CliError> {
        let raw = self.raw(key);
        if raw.eq_ignore_ascii_case("auto") {
            return Ok(None);
        }
        raw.split(',')
            .map(|s| {
                CopulaFamily::from_name(s).ok_or_else(|| CliError::Input(format!("config key '{key}': unknown family '{s}'")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Learner settings; `auto` candidates fall back to `default_candidates`.
    pub fn fit_config(&self, seed: u64, default_candidates: &[CopulaFamily]) -> Result<FitConfig, CliError> {
        let method = self.methods("fit.method")?;
        if method.len() != 1 {
            return Err(CliError::Input("config key 'fit.method' takes a single method".into()));
        }
        let config = FitConfig {
            method: method[0],
            lambda_grid: LambdaGrid {
                rho_min: self.get("fit.rho_min")?,
                rho_max: self.get("fit.rho_max")?,
                rho_step: self.get("fit.rho_step")?,
            },
            gamma: self.get("fit.gamma")?,
            cut_count: self.get("fit.cut_count")?,
            candidates: self.families("fit.candidates")?.unwrap_or_else(|| default_candidates.to_vec()),
            folds: self.get("fit.folds")?,
            spg: SpgConfig {
                max_iterations: self.get("spg.max_iterations")?,
                step_min: self.get("spg.step_min")?,
                step_max: self.get("spg.step_max")?,
                memory: self.get("spg.memory")?,
                sufficient_decrease: self.get("spg.sufficient_decrease")?,
                tolerance: self.get("spg.tolerance")?,
                max_backtracks: self.get("spg.max_backtracks")?,
            },
            threshold: self.get("fit.threshold")?,
            seed,
            max_outer_rounds: self.get("fit.max_outer_rounds")?,
            cut_rounds: self.get("fit.cut_rounds")?,
        };
        config.validate().map_err(|e| CliError::Input(format!("config: {e}")))?;
        Ok(config)
    }
}
