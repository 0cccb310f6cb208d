//! Repeated simulate-fit-score runs over methods and sample sizes.

use std::collections::BTreeMap;
use std::path::Path;

use efmrf_core::learner::{self, FitConfig, Method};
use efmrf_core::synth::{self, RocPoint, ScoreEntry};
use rayon::prelude::*;
use serde::Serialize;
use statrs::statistics::{Data, OrderStatistics};

use crate::commands::ensure_dir;
use crate::config::Config;
use crate::error::CliError;
use crate::io::{self, format_real};
use crate::manifest::{ManifestBuilder, MANIFEST_FILE};
use crate::scenario::{Scenario, ScenarioParams};

/// Sample sizes of the connected-GMRF study when none are configured.
pub const GMRF1_SAMPLE_SIZES: [usize; 4] = [50, 125, 250, 500];

#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub params: ScenarioParams,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    pub sample_sizes: Vec<usize>,
    pub fdr_cap: f64,
    pub fit: FitConfig,
    pub seed: u64,
}

impl BenchmarkPlan {
    pub fn from_config(scenario: Scenario, config: &Config, seed: u64) -> Result<Self, CliError> {
        let params = ScenarioParams::from_config(scenario, config)?;
        let sample_sizes = match config.get_list("benchmark.sample_sizes")? {
            Some(v) => v,
            None if scenario == Scenario::Gmrf1 => GMRF1_SAMPLE_SIZES.to_vec(),
            None => vec![params.samples],
        };
        let plan = Self {
            methods: config.methods("benchmark.methods")?,
            repetitions: config.get("benchmark.repetitions")?,
            fdr_cap: config.get("benchmark.fdr_cap")?,
            fit: config.fit_config(seed, scenario.default_candidates())?,
            sample_sizes,
            params,
            seed,
        };
        if plan.repetitions == 0 || plan.methods.is_empty() || plan.sample_sizes.contains(&0) {
            return Err(CliError::Input("benchmark needs a method, a repetition and positive sample sizes".into()));
        }
        if !(plan.fdr_cap > 0.0 && plan.fdr_cap <= 1.0) {
            return Err(CliError::Input("benchmark.fdr_cap must lie in (0, 1]".into()));
        }
        Ok(plan)
    }

    /// Seed of one repetition; graph, data and folds all derive from it.
    pub fn repetition_seed(&self, repetition: usize) -> u64 {
        self.seed.wrapping_add(repetition as u64)
    }

    fn with_roc(&self) -> bool {
        self.params.scenario == Scenario::Highdim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub score: ScoreEntry,
    pub edges: usize,
    pub components: usize,
    pub selected_lambda: f64,
    pub spg_iterations: usize,
    pub roc: Vec<RocPoint>,
    pub recovered: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub method: Method,
    pub samples: usize,
    pub repetition: usize,
    pub seed: u64,
    pub outcome: Result<RunOutcome, String>,
}

/// Runs every (repetition, sample size, method) combination on a pool of
/// `jobs` workers. Rows come back in (repetition, sample size, method)
/// order whatever the scheduling.
pub fn run_plan(plan: &BenchmarkPlan, jobs: usize) -> Result<Vec<RunRow>, CliError> {
    let tasks: Vec<(usize, usize)> =
        (0..plan.repetitions).flat_map(|r| plan.sample_sizes.iter().map(move |&n| (r, n))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<Vec<RunRow>> = pool.install(|| tasks.par_iter().map(|&(r, n)| run_task(plan, r, n)).collect());
    Ok(rows.into_iter().flatten().collect())
}

fn run_task(plan: &BenchmarkPlan, repetition: usize, samples: usize) -> Vec<RunRow> {
    let seed = plan.repetition_seed(repetition);
    let generated = plan.params.graph(seed).and_then(|g| plan.params.data(&g, samples, seed).map(|d| (g, d)));
    plan.methods
        .iter()
        .map(|&method| {
            let outcome = match &generated {
                Err(e) => Err(e.to_string()),
                Ok((graph, data)) => {
                    let config = FitConfig { method, seed, ..plan.fit.clone() };
                    learner::fit(data, &config).map_err(|e| e.to_string()).and_then(|report| {
                        let score = synth::score(&report.adjacency, graph).map_err(|e| e.to_string())?;
                        let roc = if plan.with_roc() {
                            synth::roc_curve(&report.beta, graph, plan.fdr_cap).map_err(|e| e.to_string())?
                        } else {
                            Vec::new()
                        };
                        Ok(RunOutcome {
                            score,
                            edges: report.adjacency.edge_count(),
                            components: report.partition.component_count(),
                            selected_lambda: report.selected_lambda,
                            spg_iterations: report.spg_iterations,
                            recovered: synth::recovered_edges(&roc),
                            roc,
                        })
                    })
                }
            };
            RunRow { method, samples, repetition, seed, outcome }
        })
        .collect()
}

pub const RESULT_COLUMNS: [&str; 17] = [
    "scenario",
    "method",
    "samples",
    "repetition",
    "seed",
    "status",
    "hamming",
    "precision",
    "recall",
    "true_positives",
    "false_positives",
    "false_negatives",
    "inter_cluster_false_positives",
    "edges",
    "components",
    "selected_lambda",
    "recovered_at_fdr_cap",
];

fn result_record(scenario: Scenario, row: &RunRow) -> Vec<String> {
    let mut rec = vec![
        scenario.name().to_string(),
        row.method.name().to_string(),
        row.samples.to_string(),
        row.repetition.to_string(),
        row.seed.to_string(),
    ];
    match &row.outcome {
        Ok(o) => {
            let s = &o.score;
            rec.push("ok".into());
            rec.extend([
                s.hamming.to_string(),
                format_real(s.precision),
                format_real(s.recall),
                s.true_positives.to_string(),
                s.false_positives.to_string(),
                s.false_negatives.to_string(),
                s.inter_cluster_false_positives.to_string(),
                o.edges.to_string(),
                o.components.to_string(),
                format_real(o.selected_lambda),
                o.recovered.to_string(),
            ]);
        }
        Err(msg) => {
            rec.push(format!("failed: {msg}"));
            rec.extend(std::iter::repeat_n(String::new(), RESULT_COLUMNS.len() - 6));
        }
    }
    rec
}

/// Median and quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl Quartiles {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut data = Data::new(values.to_vec());
        Some(Self { median: data.median(), q1: data.lower_quartile(), q3: data.upper_quartile() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub method: Method,
    pub samples: usize,
    pub completed: usize,
    pub failed: usize,
    pub hamming: Option<Quartiles>,
    pub precision: Option<Quartiles>,
    pub recall: Option<Quartiles>,
    pub false_positives: Option<Quartiles>,
    pub inter_cluster_false_positives: Option<Quartiles>,
    pub edges: Option<Quartiles>,
    pub recovered_at_fdr_cap: Option<Quartiles>,
    /// Number of repetitions per estimated component count.
    pub component_histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkSummary {
    pub manifest: &'static str,
    pub scenario: &'static str,
    pub repetitions: usize,
    pub seed: u64,
    pub fdr_cap: f64,
    pub groups: Vec<GroupSummary>,
}

pub fn summarize(plan: &BenchmarkPlan, rows: &[RunRow]) -> BenchmarkSummary {
    let mut groups = Vec::new();
    for &samples in &plan.sample_sizes {
        for &method in &plan.methods {
            let group: Vec<&RunRow> = rows.iter().filter(|r| r.method == method && r.samples == samples).collect();
            let ok: Vec<&RunOutcome> = group.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let stat = |f: &dyn Fn(&RunOutcome) -> f64| Quartiles::of(&ok.iter().map(|o| f(o)).collect::<Vec<_>>());
            let mut component_histogram = BTreeMap::new();
            for o in &ok {
                *component_histogram.entry(o.components).or_insert(0) += 1;
            }
            groups.push(GroupSummary {
                method,
                samples,
                completed: ok.len(),
                failed: group.len() - ok.len(),
                hamming: stat(&|o| o.score.hamming as f64),
                precision: stat(&|o| o.score.precision),
                recall: stat(&|o| o.score.recall),
                false_positives: stat(&|o| o.score.false_positives as f64),
                inter_cluster_false_positives: stat(&|o| o.score.inter_cluster_false_positives as f64),
                edges: stat(&|o| o.edges as f64),
                recovered_at_fdr_cap: if plan.with_roc() { stat(&|o| o.recovered as f64) } else { None },
                component_histogram,
            });
        }
    }
    BenchmarkSummary {
        manifest: MANIFEST_FILE,
        scenario: plan.params.scenario.name(),
        repetitions: plan.repetitions,
        seed: plan.seed,
        fdr_cap: plan.fdr_cap,
        groups,
    }
}

pub fn cmd_benchmark(
    scenario: Scenario,
    config: &Config,
    seed: u64,
    jobs: usize,
    out: &Path,
) -> Result<(Vec<RunRow>, BenchmarkSummary), CliError> {
    ensure_dir(out)?;
    let mut manifest = ManifestBuilder::new("benchmark", seed, config.snapshot().clone(), out);
    manifest.argument("scenario", scenario);
    manifest.argument("jobs", jobs);
    let plan = BenchmarkPlan::from_config(scenario, config, seed)?;
    let rows = run_plan(&plan, jobs)?;
    manifest.phase_done("runs");
    let header: Vec<String> = RESULT_COLUMNS.iter().map(|s| s.to_string()).collect();
    io::write_csv(&manifest.artifact("results.csv"), &header, rows.iter().map(|r| result_record(scenario, r)))?;
    let summary = summarize(&plan, &rows);
    io::write_json(&manifest.artifact("summary.json"), &summary)?;
    let mut artifacts = vec!["results.csv", "summary.json"];
    if plan.with_roc() {
        let header: Vec<String> = ["method", "samples", "repetition", "threshold", "fdr", "true_positives", "false_positives"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let roc_rows = rows.iter().filter_map(|r| r.outcome.as_ref().ok().map(|o| (r, o))).flat_map(|(r, o)| {
            o.roc.iter().map(move |p| {
                vec![
                    r.method.name().to_string(),
                    r.samples.to_string(),
                    r.repetition.to_string(),
                    format_real(p.threshold),
                    format_real(p.fdr),
                    p.true_positives.to_string(),
                    p.false_positives.to_string(),
                ]
            })
        });
        io::write_csv(&manifest.artifact("roc.csv"), &header, roc_rows)?;
        artifacts.push("roc.csv");
    }
    manifest.phase_done("write");
    manifest.finish(&artifacts)?;
    Ok((rows, summary))
}
