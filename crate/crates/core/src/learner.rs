//! End-to-end structure learning: copula potentials, initialization,
//! optimization of the ET / EF-cuts / EF-λ objectives and eBIC selection.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, log, round};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::copula::{self, CopulaFamily, CopulaSpec, PairSample, PseudoObservations};
use crate::cuts::enumerate_min_cuts;
use crate::data::DataMatrix;
use crate::error::{FitError, ObjectiveError, SpgError};
use crate::graph::Adjacency;
use crate::objectives::{components_of, EfCutsProblem, EfLambdaProblem, NodePartition, PotentialTensor};
use crate::spg::{project_nonnegative, spg_minimize, SpgConfig, SpgStatus};
use crate::tree_kernel::{pair_count, pair_index, EdgeWeights};

/// Log potentials are clamped to this magnitude so every `w` is positive
/// and finite.
pub const MAX_LOG_POTENTIAL: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    #[cfg_attr(feature = "serde", serde(rename = "ET"))]
    Et,
    #[cfg_attr(feature = "serde", serde(rename = "EFCuts"))]
    EfCuts,
    #[cfg_attr(feature = "serde", serde(rename = "EFLambda"))]
    EfLambda,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Et => "ET",
            Method::EfCuts => "EFCuts",
            Method::EfLambda => "EFLambda",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Method::Et, Method::EfCuts, Method::EfLambda]
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(name.trim()))
    }
}

/// Penalties `lambda = exp(-rho)` for `rho` on a regular grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaGrid {
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_step: f64,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self { rho_min: 2.0, rho_max: 5.0, rho_step: 0.1 }
    }
}

impl LambdaGrid {
    pub fn rhos(&self) -> Vec<f64> {
        let count = round((self.rho_max - self.rho_min) / self.rho_step) as usize + 1;
        (0..count).map(|i| self.rho_min + i as f64 * self.rho_step).collect()
    }

    /// Penalties in increasing `rho` (decreasing `lambda`) order.
    pub fn lambdas(&self) -> Vec<f64> {
        self.rhos().into_iter().map(|r| exp(-r)).collect()
    }

    fn validate(&self) -> Result<(), FitError> {
        if !(self.rho_step > 0.0 && self.rho_min <= self.rho_max && self.rho_min.is_finite() && self.rho_max.is_finite()) {
            return Err(FitError::InvalidConfig("lambda grid needs rho_min <= rho_max and a positive step"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitConfig {
    pub method: Method,
    pub lambda_grid: LambdaGrid,
    pub gamma: f64,
    pub cut_count: usize,
    pub candidates: Vec<CopulaFamily>,
    pub folds: usize,
    pub spg: SpgConfig,
    /// Weights above this count as edges.
    pub threshold: f64,
    pub seed: u64,
    pub max_outer_rounds: usize,
    pub cut_rounds: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            method: Method::EfLambda,
            lambda_grid: LambdaGrid::default(),
            gamma: 0.5,
            cut_count: 100,
            candidates: CopulaFamily::CANDIDATES.to_vec(),
            folds: 5,
            spg: SpgConfig::default(),
            threshold: 1e-8,
            seed: 0,
            max_outer_rounds: 20,
            cut_rounds: 3,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        self.lambda_grid.validate()?;
        self.spg.validate()?;
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(FitError::InvalidConfig("gamma must lie in [0, 1]"));
        }
        if self.cut_count == 0 {
            return Err(FitError::InvalidConfig("cut count must be positive"));
        }
        if self.candidates.is_empty() {
            return Err(FitError::InvalidConfig("no copula candidates"));
        }
        if self.folds < 2 {
            return Err(FitError::InvalidConfig("need at least 2 folds"));
        }
        if !(self.threshold >= 0.0) {
            return Err(FitError::InvalidConfig("threshold must be nonnegative"));
        }
        if self.max_outer_rounds == 0 || self.cut_rounds == 0 {
            return Err(FitError::InvalidConfig("outer round budgets must be positive"));
        }
        Ok(())
    }
}

/// One copula per unordered variable pair, packed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CopulaTable {
    dim: usize,
    specs: Vec<CopulaSpec>,
}

impl CopulaTable {
    pub fn independence(dim: usize) -> Self {
        Self { dim, specs: vec![CopulaSpec::INDEPENDENCE; pair_count(dim)] }
    }

    pub fn from_packed(dim: usize, specs: Vec<CopulaSpec>) -> Option<Self> {
        (specs.len() == pair_count(dim)).then_some(Self { dim, specs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, u: usize, v: usize) -> &CopulaSpec {
        &self.specs[pair_index(self.dim, u, v)]
    }

    pub fn specs(&self) -> &[CopulaSpec] {
        &self.specs
    }
}

/// Seeded assignment of `n` rows to `folds` folds of near-equal size.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (i, &r) in order.iter().enumerate() {
        fold[r] = i % folds;
    }
    fold
}

/// Per pair, the candidate with the highest mean held-out log
/// pseudo-likelihood, refitted on all rows. The independence copula (held-out
/// log-likelihood 0) is kept when no candidate scores above it.
pub fn select_copulas(
    u: &PseudoObservations,
    candidates: &[CopulaFamily],
    folds: usize,
    seed: u64,
) -> Result<CopulaTable, FitError> {
    let n = u.rows();
    let d = u.cols();
    if candidates.is_empty() {
        return Err(FitError::InvalidConfig("no copula candidates"));
    }
    if folds < 2 || n < 2 * folds {
        return Err(FitError::InvalidConfig("need folds >= 2 and at least 2 rows per fold"));
    }
    let fold = fold_assignment(n, folds, seed);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|k| {
            let train = (0..n).filter(|&r| fold[r] != k).collect();
            let test = (0..n).filter(|&r| fold[r] == k).collect();
            (train, test)
        })
        .collect();
    let mut specs = Vec::with_capacity(pair_count(d));
    for a in 0..d {
        for b in a + 1..d {
            let (x, y) = (u.column(a), u.column(b));
            let family = best_family(x, y, candidates, &splits)?;
            let mut all = PairSample::new(x, y);
            specs.push(copula::fit_copula(family, &mut all)?.spec);
        }
    }
    Ok(CopulaTable { dim: d, specs })
}

fn best_family(
    x: &[f64],
    y: &[f64],
    candidates: &[CopulaFamily],
    splits: &[(Vec<usize>, Vec<usize>)],
) -> Result<CopulaFamily, FitError> {
    let pick = |rows: &[usize], col: &[f64]| rows.iter().map(|&r| col[r]).collect::<Vec<f64>>();
    let mut samples: Vec<(PairSample, PairSample)> = splits
        .iter()
        .map(|(train, test)| {
            (
                PairSample::new(&pick(train, x), &pick(train, y)),
                PairSample::new(&pick(test, x), &pick(test, y)),
            )
        })
        .collect();
    let mut best = (0.0, CopulaFamily::Independence);
    for &family in candidates {
        let mut total = 0.0;
        for (train, test) in samples.iter_mut() {
            let fit = copula::fit_copula(family, train)?;
            total += test.log_likelihood(&fit.spec);
        }
        let mean = total / splits.len() as f64;
        if mean > best.0 {
            best = (mean, family);
        }
    }
    Ok(best.1)
}

/// `W[j, u, v] = c_uv(u_j, v_j)` with log values clamped to
/// `±MAX_LOG_POTENTIAL`.
pub fn build_potentials(u: &PseudoObservations, table: &CopulaTable) -> Result<PotentialTensor, FitError> {
    let n = u.rows();
    let d = u.cols();
    if table.dim() != d {
        return Err(ObjectiveError::DimensionMismatch.into());
    }
    for spec in table.specs() {
        spec.validate()?;
    }
    let p = pair_count(d);
    let mut values = vec![0.0; n * p];
    for a in 0..d {
        for b in a + 1..d {
            let idx = pair_index(d, a, b);
            let spec = table.get(a, b);
            if spec.family == CopulaFamily::Independence {
                for j in 0..n {
                    values[j * p + idx] = 1.0;
                }
                continue;
            }
            let (x, y) = (u.column(a), u.column(b));
            for j in 0..n {
                let ld = spec.log_density_unchecked(
                    x[j].clamp(copula::CLIP, 1.0 - copula::CLIP),
                    y[j].clamp(copula::CLIP, 1.0 - copula::CLIP),
                );
                let ld = if ld.is_nan() { 0.0 } else { ld.clamp(-MAX_LOG_POTENTIAL, MAX_LOG_POTENTIAL) };
                values[j * p + idx] = exp(ld);
            }
        }
    }
    Ok(PotentialTensor::new(n, d, values)?)
}

/// Geometric-mean potential `beta0_uv = exp(mean_j log w_uv(x_j))`.
pub fn initialize_beta(w: &PotentialTensor) -> EdgeWeights {
    let p = pair_count(w.dim());
    let mut acc = vec![0.0; p];
    for j in 0..w.samples() {
        for (a, &x) in acc.iter_mut().zip(w.sample(j)) {
            *a += log(x);
        }
    }
    let n = w.samples().max(1) as f64;
    let values = acc.into_iter().map(|s| exp(s / n)).collect();
    EdgeWeights::from_packed(w.dim(), values).expect("geometric means are positive and finite")
}

/// Extended BIC `2L + |E| log n + 4 |E| gamma log d`.
pub fn ebic(nll: f64, edges: usize, samples: usize, dim: usize, gamma: f64) -> f64 {
    let e = edges as f64;
    2.0 * nll + e * log(samples as f64) + 4.0 * e * gamma * log(dim as f64)
}

/// One point of the regularization path (a single point for ET / EF-cuts,
/// with `lambda = 0`).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathEntry {
    pub lambda: f64,
    pub beta: EdgeWeights,
    /// Unpenalized negative log-likelihood under the induced partition.
    pub nll: f64,
    pub edges: usize,
    pub ebic: f64,
    pub components: usize,
    pub spg_iterations: usize,
    pub outer_rounds: usize,
    pub restarted: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitReport {
    pub method: Method,
    pub path: Vec<PathEntry>,
    pub selected: usize,
    pub selected_lambda: f64,
    pub beta: EdgeWeights,
    pub partition: NodePartition,
    pub adjacency: Adjacency,
    pub copulas: CopulaTable,
    pub spg_iterations: usize,
}

/// Fits the configured model to raw data (rows are samples).
pub fn fit(data: &DataMatrix, config: &FitConfig) -> Result<FitReport, FitError> {
    config.validate()?;
    if data.rows() < 2 || data.cols() < 2 {
        return Err(FitError::InvalidConfig("need at least 2 rows and 2 columns"));
    }
    let u = copula::to_pseudoobservations(data)?;
    let copulas = select_copulas(&u, &config.candidates, config.folds, config.seed)?;
    let w = build_potentials(&u, &copulas)?;
    fit_potentials(&w, copulas, config)
}

/// Fits from precomputed potentials.
pub fn fit_potentials(w: &PotentialTensor, copulas: CopulaTable, config: &FitConfig) -> Result<FitReport, FitError> {
    config.validate()?;
    let beta0 = initialize_beta(w);
    let path = match config.method {
        Method::Et => vec![fit_et(w, &beta0, config)?],
        Method::EfCuts => vec![fit_ef_cuts(w, &beta0, config)?],
        Method::EfLambda => fit_ef_lambda(w, &beta0, config)?,
    };
    let selected = select_by_ebic(&path);
    let entry = &path[selected];
    let beta = entry.beta.clone();
    let partition = components_of(beta.dim(), beta.values(), config.threshold);
    let adjacency = Adjacency::from_beta(&beta, config.threshold);
    let spg_iterations = path.iter().map(|e| e.spg_iterations).sum();
    Ok(FitReport {
        method: config.method,
        selected,
        selected_lambda: entry.lambda,
        beta,
        partition,
        adjacency,
        copulas,
        spg_iterations,
        path,
    })
}

/// Index of the smallest eBIC; the earliest entry wins ties.
pub fn select_by_ebic(path: &[PathEntry]) -> usize {
    let mut best = 0;
    for (i, e) in path.iter().enumerate() {
        if e.ebic < path[best].ebic {
            best = i;
        }
    }
    best
}

fn scaled(beta: &EdgeWeights, factor: f64) -> Vec<f64> {
    beta.values().iter().map(|&b| b * factor).collect()
}

/// Zeroes entries at or below the threshold.
fn sparsify(beta: &mut [f64], threshold: f64) {
    for b in beta {
        if *b <= threshold {
            *b = 0.0;
        }
    }
}

/// Factor applied to the step bound after a failed line search.
const STEP_SHRINK: f64 = 1e-3;

/// Runs SPG within the configured iteration budget. A failed line search
/// restarts from the best point with `step_max` shrunk by `STEP_SHRINK`.
fn run_spg<F>(mut eval: F, x0: &[f64], config: &SpgConfig) -> Result<(Vec<f64>, usize), ObjectiveError>
where
    F: FnMut(&[f64], Option<&mut [f64]>) -> Result<f64, ObjectiveError>,
{
    let mut first_error = None;
    let mut x = x0.to_vec();
    let mut used = 0;
    let mut local = *config;
    loop {
        local.max_iterations = config.max_iterations - used;
        let result = spg_minimize(
            |x, g| match eval(x, Some(g)) {
                Ok(v) => Some(v),
                Err(e) => {
                    first_error.get_or_insert(e);
                    None
                }
            },
            project_nonnegative,
            &x,
            &local,
        );
        let r = match result {
            Ok(r) => r,
            Err(SpgError::NonFiniteStart) => {
                return Err(first_error.unwrap_or(ObjectiveError::DisconnectedSupport))
            }
            Err(SpgError::InvalidConfig(_)) => return Err(ObjectiveError::DimensionMismatch),
        };
        used += r.iterations;
        x = r.point;
        let shrunk = local.step_max * STEP_SHRINK;
        match r.status {
            SpgStatus::NonFiniteObjective { .. } if used < config.max_iterations && shrunk > local.step_min => {
                local.step_max = shrunk;
            }
            _ => return Ok((x, used)),
        }
    }
}

fn is_recoverable(e: &ObjectiveError) -> bool {
    matches!(
        e,
        ObjectiveError::AllCutsSingular | ObjectiveError::BlockDisconnected(_) | ObjectiveError::DisconnectedSupport
    )
}

/// Runs `attempt` from `beta0`, retrying once from `2 beta0` on a
/// singularity error.
fn with_restart<T>(
    beta0: &EdgeWeights,
    mut attempt: impl FnMut(&[f64]) -> Result<T, ObjectiveError>,
) -> Result<(T, bool), FitError> {
    match attempt(beta0.values()) {
        Ok(t) => Ok((t, false)),
        Err(e) if is_recoverable(&e) => match attempt(&scaled(beta0, 2.0)) {
            Ok(t) => Ok((t, true)),
            Err(e) => Err(FitError::Diverged(e)),
        },
        Err(e) => Err(e.into()),
    }
}

fn entry(
    w: &PotentialTensor,
    mut beta: Vec<f64>,
    lambda: f64,
    config: &FitConfig,
    spg_iterations: usize,
    outer_rounds: usize,
    restarted: bool,
) -> Result<PathEntry, FitError> {
    sparsify(&mut beta, config.threshold);
    let dim = w.dim();
    let partition = components_of(dim, &beta, config.threshold);
    let nll = EfLambdaProblem::new(w, &partition, 0.0)?.evaluate(&beta, None)?;
    let edges = beta.iter().filter(|&&b| b > config.threshold).count();
    Ok(PathEntry {
        lambda,
        ebic: ebic(nll, edges, w.samples(), dim, config.gamma),
        beta: EdgeWeights::from_packed(dim, beta).map_err(ObjectiveError::from)?,
        nll,
        edges,
        components: partition.component_count(),
        spg_iterations,
        outer_rounds,
        restarted,
    })
}

fn fit_et(w: &PotentialTensor, beta0: &EdgeWeights, config: &FitConfig) -> Result<PathEntry, FitError> {
    let single = NodePartition::single_block(w.dim());
    let ((beta, iterations), restarted) = with_restart(beta0, |start| {
        let mut problem = EfLambdaProblem::new(w, &single, 0.0)?;
        run_spg(|x, g| problem.evaluate(x, g), start, &config.spg)
    })?;
    // The ET estimate keeps every weight the optimizer left positive.
    entry(w, beta, 0.0, config, iterations, 1, restarted)
}

fn fit_ef_cuts(w: &PotentialTensor, beta0: &EdgeWeights, config: &FitConfig) -> Result<PathEntry, FitError> {
    let ((beta, iterations), restarted) = with_restart(beta0, |start| {
        let mut beta = start.to_vec();
        let mut total = 0;
        for _ in 0..config.cut_rounds {
            let weights = EdgeWeights::from_packed(w.dim(), beta.clone())?;
            let cuts = enumerate_min_cuts(&weights, config.cut_count);
            let mut problem = EfCutsProblem::new(w, cuts.cuts())?;
            let (next, it) = run_spg(|x, g| problem.evaluate(x, g), &beta, &config.spg)?;
            beta = next;
            total += it;
        }
        Ok((beta, total))
    })?;
    entry(w, beta, 0.0, config, iterations, config.cut_rounds, restarted)
}

/// EF-λ objective under the partition induced by `beta` itself.
fn induced_objective(w: &PotentialTensor, beta: &[f64], lambda: f64, threshold: f64) -> Result<f64, ObjectiveError> {
    let partition = components_of(w.dim(), beta, threshold);
    EfLambdaProblem::new(w, &partition, lambda)?.evaluate(beta, None)
}

/// Zeroes single edges, smallest first, whenever that lowers the induced
/// objective. Returns whether any edge was removed.
fn prune_edges(w: &PotentialTensor, beta: &mut [f64], lambda: f64, threshold: f64) -> Result<bool, ObjectiveError> {
    let mut current = induced_objective(w, beta, lambda, threshold)?;
    let mut order: Vec<usize> = (0..beta.len()).filter(|&i| beta[i] > threshold).collect();
    order.sort_by(|&a, &b| beta[a].total_cmp(&beta[b]).then(a.cmp(&b)));
    let mut changed = false;
    for i in order {
        let kept = beta[i];
        beta[i] = 0.0;
        match induced_objective(w, beta, lambda, threshold) {
            Ok(v) if v < current => {
                current = v;
                changed = true;
            }
            _ => beta[i] = kept,
        }
    }
    Ok(changed)
}

/// Minimizes the EF-λ objective at one penalty, evaluating every trial point
/// under the partition it induces itself. Rounds repeat while thresholding
/// the SPG result changes the partition; [`prune_edges`] then polishes the
/// final point. Returns the point, SPG iterations and rounds used.
pub fn ef_lambda_step(
    w: &PotentialTensor,
    start: &[f64],
    lambda: f64,
    config: &FitConfig,
) -> Result<(Vec<f64>, usize, usize), ObjectiveError> {
    let dim = w.dim();
    let mut beta = start.to_vec();
    sparsify(&mut beta, config.threshold);
    let mut iterations = 0;
    let mut rounds = 0;
    let mut cached: Option<(NodePartition, EfLambdaProblem<'_>)> = None;
    while rounds < config.max_outer_rounds {
        rounds += 1;
        let before = components_of(dim, &beta, config.threshold);
        let (next, it) = run_spg(
            |x, g| {
                let partition = components_of(dim, x, config.threshold);
                if cached.as_ref().is_none_or(|(p, _)| *p != partition) {
                    let problem = EfLambdaProblem::new(w, &partition, lambda)?;
                    cached = Some((partition, problem));
                }
                cached.as_mut().expect("problem cached").1.evaluate(x, g)
            },
            &beta,
            &config.spg,
        )?;
        iterations += it;
        beta = next;
        sparsify(&mut beta, config.threshold);
        if components_of(dim, &beta, config.threshold) == before {
            break;
        }
    }
    prune_edges(w, &mut beta, lambda, config.threshold)?;
    Ok((beta, iterations, rounds))
}

fn fit_ef_lambda(w: &PotentialTensor, beta0: &EdgeWeights, config: &FitConfig) -> Result<Vec<PathEntry>, FitError> {
    // Grid order, each point warm-started from the previous solution.
    let lambdas = config.lambda_grid.lambdas();
    let mut path = Vec::with_capacity(lambdas.len());
    let mut warm: Option<Vec<f64>> = None;
    for &lambda in &lambdas {
        let result = match &warm {
            Some(start) => ef_lambda_step(w, start, lambda, config).map(|r| (r, false)).or_else(|e| {
                if is_recoverable(&e) {
                    with_restart(beta0, |s| ef_lambda_step(w, s, lambda, config))
                } else {
                    Err(e.into())
                }
            }),
            None => with_restart(beta0, |s| ef_lambda_step(w, s, lambda, config)),
        };
        let ((beta, iterations, rounds), restarted) = result?;
        let e = entry(w, beta.clone(), lambda, config, iterations, rounds, restarted)?;
        path.push(e);
        warm = Some(beta);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_grid_has_31_points() {
        let l = LambdaGrid::default().lambdas();
        assert_eq!(l.len(), 31);
        assert!(l.windows(2).all(|p| p[0] > p[1]));
        assert!((l[0] - exp(-2.0)).abs() < 1e-15);
        assert!((l[30] - exp(-5.0)).abs() < 1e-15);
    }

    #[test]
    fn ebic_example() {
        let v = ebic(10.0, 2, 100, 5, 0.5);
        assert!((v - (20.0 + 2.0 * log(100.0) + 4.0 * log(5.0))).abs() < 1e-12);
        assert!((v - 35.648).abs() < 1e-3);
        assert_eq!(ebic(10.0, 2, 100, 5, 0.0), 20.0 + 2.0 * log(100.0));
    }

    #[test]
    fn independence_potentials_give_equal_init() {
        let w = PotentialTensor::ones(4, 5);
        let b = initialize_beta(&w);
        assert!(b.values().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Et, Method::EfCuts, Method::EfLambda] {
            assert_eq!(Method::from_name(m.name()), Some(m));
        }
    }
}
