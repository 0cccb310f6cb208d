//! The synthetic benchmark settings.

use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use efmrf_core::synth::{self, GroundTruthGraph};
use efmrf_core::{CopulaFamily, DataMatrix};

use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// Connected random GMRF.
    Gmrf1,
    /// Random GMRF with two components.
    Gmrf2,
    /// Disjoint t-copula cliques.
    Tclique,
    /// Sparse GMRF with more variables than samples.
    Highdim,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Gmrf1 => "gmrf1",
            Scenario::Gmrf2 => "gmrf2",
            Scenario::Tclique => "tclique",
            Scenario::Highdim => "highdim",
        }
    }

    /// Copula candidates containing the generating family.
    pub fn default_candidates(self) -> &'static [CopulaFamily] {
        match self {
            Scenario::Tclique => &[CopulaFamily::Gaussian, CopulaFamily::StudentT],
            _ => &[CopulaFamily::Gaussian],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        <Scenario as ValueEnum>::from_str(s, true).map_err(|_| CliError::Input(format!("unknown scenario '{s}'")))
    }
}

/// Generator parameters of a scenario after applying config overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub scenario: Scenario,
    pub samples: usize,
    pub dim: usize,
    pub avg_degree: f64,
    pub components: usize,
    pub df: f64,
    pub clique_sizes: Vec<usize>,
}

impl ScenarioParams {
    pub fn defaults(scenario: Scenario) -> Self {
        let high = scenario == Scenario::Highdim;
        Self {
            scenario,
            samples: if high { 50 } else { 500 },
            dim: if high { 80 } else { 25 },
            avg_degree: if high { 3.0 } else { 2.0 },
            components: if scenario == Scenario::Gmrf2 { 2 } else { 1 },
            df: 1.0,
            clique_sizes: vec![3, 4],
        }
    }

    pub fn from_config(scenario: Scenario, config: &Config) -> Result<Self, CliError> {
        let mut p = Self::defaults(scenario);
        if let Some(v) = config.get_auto("scenario.samples")? {
            p.samples = v;
        }
        if let Some(v) = config.get_auto("scenario.dim")? {
            p.dim = v;
        }
        if let Some(v) = config.get_auto("scenario.avg_degree")? {
            p.avg_degree = v;
        }
        if let Some(v) = config.get_auto("scenario.components")? {
            p.components = v;
        }
        p.df = config.get("scenario.df")?;
        if let Some(v) = config.get_list("scenario.clique_sizes")? {
            p.clique_sizes = v;
        }
        if p.samples == 0 {
            return Err(CliError::Input("scenario.samples must be positive".into()));
        }
        Ok(p)
    }

    pub fn graph(&self, seed: u64) -> Result<GroundTruthGraph, CliError> {
        Ok(match self.scenario {
            Scenario::Tclique => {
                let sizes = synth::sample_clique_sizes(self.dim, &self.clique_sizes, seed)?;
                synth::gen_clique_graph(self.dim, &sizes, seed)?
            }
            _ => synth::gen_graph(self.dim, self.avg_degree, self.components, seed)?,
        })
    }

    pub fn data(&self, graph: &GroundTruthGraph, samples: usize, seed: u64) -> Result<DataMatrix, CliError> {
        Ok(match self.scenario {
            Scenario::Tclique => synth::gen_tclique_data(graph, samples, self.df, seed)?,
            _ => synth::gen_gmrf_data(graph, samples, seed),
        })
    }
}
