//! `fit`, `simulate` and `density-grid`.

use std::path::Path;

use efmrf_core::copula::{self, CopulaFamily, CopulaSpec};
use efmrf_core::learner::{self, FitReport};
use efmrf_core::special::{norm_cdf, norm_pdf};
use efmrf_core::synth::{GraphKind, GroundTruthGraph};
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;
use crate::io::{self, format_real, Table};
use crate::manifest::{ManifestBuilder, MANIFEST_FILE};
use crate::scenario::{Scenario, ScenarioParams};

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Serialize)]
struct PathRecord {
    lambda: f64,
    nll: f64,
    edges: usize,
    ebic: f64,
    components: usize,
    spg_iterations: usize,
    outer_rounds: usize,
    restarted: bool,
    /// Upper triangle of beta, row by row.
    beta: Vec<f64>,
}

#[derive(Serialize)]
struct PathFile<'a> {
    manifest: &'a str,
    method: &'a str,
    selected: usize,
    selected_lambda: f64,
    entries: Vec<PathRecord>,
}

#[derive(Serialize)]
struct ComponentsFile<'a> {
    manifest: &'a str,
    component_count: usize,
    labels: &'a [usize],
    components: Vec<Vec<&'a str>>,
}

pub fn cmd_fit(input: &Path, config: &Config, seed: u64, out: &Path) -> Result<FitReport, CliError> {
    ensure_dir(out)?;
    let mut manifest = ManifestBuilder::new("fit", seed, config.snapshot().clone(), out);
    manifest.input(input)?;
    let fit_config = config.fit_config(seed, &CopulaFamily::CANDIDATES)?;
    let table = io::read_table(input)?;
    manifest.phase_done("read");
    let report = learner::fit(&table.data, &fit_config)?;
    manifest.phase_done("fit");
    write_fit_outputs(&manifest, &table, &report)?;
    manifest.phase_done("write");
    manifest.finish(&["adjacency.csv", "beta.csv", "path.json", "components.json"])?;
    Ok(report)
}

fn write_fit_outputs(manifest: &ManifestBuilder, table: &Table, report: &FitReport) -> Result<(), CliError> {
    let d = table.names.len();
    let adjacency = &report.adjacency;
    io::write_csv(
        &manifest.artifact("adjacency.csv"),
        &table.names,
        (0..d).map(|u| (0..d).map(|v| if adjacency.has_edge(u, v) { "1" } else { "0" }.to_string()).collect()),
    )?;
    io::write_csv(
        &manifest.artifact("beta.csv"),
        &table.names,
        (0..d).map(|u| (0..d).map(|v| format_real(if u == v { 0.0 } else { report.beta.get(u, v) })).collect()),
    )?;
    let entries = report
        .path
        .iter()
        .map(|e| PathRecord {
            lambda: e.lambda,
            nll: e.nll,
            edges: e.edges,
            ebic: e.ebic,
            components: e.components,
            spg_iterations: e.spg_iterations,
            outer_rounds: e.outer_rounds,
            restarted: e.restarted,
            beta: e.beta.values().to_vec(),
        })
        .collect();
    io::write_json(
        &manifest.artifact("path.json"),
        &PathFile {
            manifest: MANIFEST_FILE,
            method: report.method.name(),
            selected: report.selected,
            selected_lambda: report.selected_lambda,
            entries,
        },
    )?;
    let labels = report.partition.labels();
    let mut components = vec![Vec::new(); report.partition.component_count()];
    for (u, &l) in labels.iter().enumerate() {
        components[l].push(table.names[u].as_str());
    }
    io::write_json(
        &manifest.artifact("components.json"),
        &ComponentsFile {
            manifest: MANIFEST_FILE,
            component_count: report.partition.component_count(),
            labels,
            components,
        },
    )
}

#[derive(Serialize)]
struct TruthFile<'a> {
    manifest: &'a str,
    scenario: &'a str,
    dim: usize,
    samples: usize,
    seed: u64,
    kind: &'a GraphKind,
    edges: Vec<(usize, usize)>,
    labels: &'a [usize],
    component_count: usize,
}

pub fn cmd_simulate(
    scenario: Scenario,
    config: &Config,
    seed: u64,
    out: &Path,
) -> Result<(GroundTruthGraph, Table), CliError> {
    ensure_dir(out)?;
    let mut manifest = ManifestBuilder::new("simulate", seed, config.snapshot().clone(), out);
    manifest.argument("scenario", scenario);
    let params = ScenarioParams::from_config(scenario, config)?;
    let graph = params.graph(seed)?;
    let data = params.data(&graph, params.samples, seed)?;
    let table = Table { names: io::default_names(params.dim), data };
    manifest.phase_done("generate");
    io::write_table(&manifest.artifact("data.csv"), &table)?;
    io::write_json(
        &manifest.artifact("truth.json"),
        &TruthFile {
            manifest: MANIFEST_FILE,
            scenario: scenario.name(),
            dim: params.dim,
            samples: params.samples,
            seed,
            kind: &graph.kind,
            edges: graph.adjacency.edges(),
            labels: &graph.labels,
            component_count: graph.component_count(),
        },
    )?;
    manifest.phase_done("write");
    manifest.finish(&["data.csv", "truth.json"])?;
    Ok((graph, table))
}

/// Joint density with standard normal margins,
/// `c(Phi(x), Phi(y)) phi(x) phi(y)`, on a square grid over
/// `[-range, range]^2`. Rows are `(x, y, density)` with `y` varying fastest.
pub fn density_grid(spec: &CopulaSpec, size: usize, range: f64) -> Result<Vec<[f64; 3]>, CliError> {
    spec.validate()?;
    if size < 2 || !(range > 0.0 && range.is_finite()) {
        return Err(CliError::Input("density grid needs at least 2 points per axis and a positive range".into()));
    }
    let step = 2.0 * range / (size - 1) as f64;
    let axis: Vec<f64> = (0..size).map(|i| -range + i as f64 * step).collect();
    let mut rows = Vec::with_capacity(size * size);
    for &x in &axis {
        for &y in &axis {
            let (u, v) = (norm_cdf(x), norm_cdf(y));
            let c = copula::copula_density(spec, u, v)?;
            rows.push([x, y, c * norm_pdf(x) * norm_pdf(y)]);
        }
    }
    Ok(rows)
}

pub fn density_spec(config: &Config) -> Result<CopulaSpec, CliError> {
    let family = config.families("density.family")?.unwrap_or_else(|| vec![CopulaFamily::Gaussian]);
    if family.len() != 1 {
        return Err(CliError::Input("density.family takes a single family".into()));
    }
    let df = if family[0] == CopulaFamily::StudentT { config.get("density.df")? } else { 0.0 };
    Ok(CopulaSpec::new(family[0], config.get("density.theta")?, df)?)
}

pub fn cmd_density_grid(config: &Config, out: &Path) -> Result<Vec<[f64; 3]>, CliError> {
    ensure_dir(out)?;
    let mut manifest = ManifestBuilder::new("density-grid", 0, config.snapshot().clone(), out);
    let spec = density_spec(config)?;
    let rows = density_grid(&spec, config.get("density.grid_size")?, config.get("density.range")?)?;
    io::write_csv(
        &manifest.artifact("density.csv"),
        &["x".to_string(), "y".to_string(), "density".to_string()],
        rows.iter().map(|r| r.iter().map(|&v| format_real(v)).collect()),
    )?;
    manifest.phase_done("grid");
    manifest.finish(&["density.csv"])?;
    Ok(rows)
}
