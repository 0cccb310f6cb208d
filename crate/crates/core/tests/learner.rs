mod common;

use common::*;
use efmrf_core::copula::{sample_copula, to_pseudoobservations, CopulaFamily, CopulaSpec, PairSample};
use efmrf_core::graph::Adjacency;
use efmrf_core::learner::*;
use efmrf_core::objectives::{connected_components, ef_lambda_objective, NodePartition, PotentialTensor};
use efmrf_core::synth::{gen_gmrf_data, GraphKind, GroundTruthGraph};
use efmrf_core::{DataMatrix, EdgeWeights};

fn two_triangles() -> GroundTruthGraph {
    let adjacency = Adjacency::from_edges(6, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]);
    let labels = adjacency.component_labels();
    GroundTruthGraph { adjacency, labels, kind: GraphKind::Random { avg_degree: 2.0, components: 2 }, seed: 0 }
}

fn gaussian_config() -> FitConfig {
    FitConfig { candidates: vec![CopulaFamily::Gaussian], ..FitConfig::default() }
}

#[test]
fn ebic_examples() {
    let expected = 20.0 + 2.0 * 100f64.ln() + 4.0 * 2.0 * 0.5 * 5f64.ln();
    assert!((ebic(10.0, 2, 100, 5, 0.5) - expected).abs() < 1e-12);
    assert!((ebic(10.0, 2, 100, 5, 0.5) - 35.648).abs() < 1e-3);
    for &(l, e) in &[(3.5, 0), (-12.0, 7), (100.0, 30)] {
        let bic = 2.0 * l + e as f64 * 250f64.ln();
        assert!((ebic(l, e, 250, 25, 0.0) - bic).abs() < 1e-12);
    }
}

#[test]
fn default_lambda_grid() {
    let lambdas = LambdaGrid::default().lambdas();
    assert_eq!(lambdas.len(), 31);
    assert!((lambdas[0] - (-2f64).exp()).abs() < 1e-15);
    assert!((lambdas[30] - (-5f64).exp()).abs() < 1e-12);
    assert!(lambdas.windows(2).all(|w| w[0] > w[1] && w[1] > 0.0));
}

#[test]
fn initialization_is_the_geometric_mean_potential() {
    let mut r = rng(100);
    let w = random_potentials(&mut r, 7, 5, 2.0);
    let beta = initialize_beta(&w);
    for u in 0..5 {
        for v in u + 1..5 {
            let mean_log = (0..7).map(|j| w.get(j, u, v).ln()).sum::<f64>() / 7.0;
            assert!((beta.get(u, v) - mean_log.exp()).abs() < 1e-12 * beta.get(u, v));
        }
    }
    let flat = initialize_beta(&PotentialTensor::ones(4, 5));
    assert!(flat.values().iter().all(|&b| b == 1.0));
}

#[test]
fn potentials_follow_the_copula_table() {
    let data = DataMatrix::new(3, 2, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0]).unwrap();
    let u = to_pseudoobservations(&data).unwrap();
    let table = CopulaTable::from_packed(2, vec![CopulaSpec::gaussian(0.5).unwrap()]).unwrap();
    let w = build_potentials(&u, &table).unwrap();
    assert!((w.get(1, 0, 1) - 1.0 / 0.75f64.sqrt()).abs() < 1e-12);
    assert_eq!(w.get(1, 0, 1), w.get(1, 1, 0));
    let ones = build_potentials(&u, &CopulaTable::independence(2)).unwrap();
    assert!((0..3).all(|j| ones.get(j, 0, 1) == 1.0));
}

#[test]
fn clayton_pairs_select_clayton() {
    let mut hits = 0;
    for rep in 0..50 {
        let s = sample_copula(&CopulaSpec::clayton(2.0).unwrap(), 500, 1000 + rep).unwrap();
        let table = select_copulas(&s, &CopulaFamily::CANDIDATES, 5, rep).unwrap();
        hits += usize::from(table.specs()[0].family == CopulaFamily::Clayton);
    }
    assert!(hits >= 45, "{hits} of 50");
}

#[test]
fn gaussian_pairs_select_an_elliptical_family() {
    for rep in 0..10 {
        let s = sample_copula(&CopulaSpec::gaussian(0.8).unwrap(), 500, 2000 + rep).unwrap();
        let family = select_copulas(&s, &CopulaFamily::CANDIDATES, 5, rep).unwrap().specs()[0].family;
        assert!(matches!(family, CopulaFamily::Gaussian | CopulaFamily::StudentT), "{family:?}");
    }
}

#[test]
fn independent_pairs_have_negligible_held_out_likelihood() {
    let folds = 5;
    for rep in 0..10 {
        let s = sample_copula(&CopulaSpec::INDEPENDENCE, 500, 3000 + rep).unwrap();
        let family = select_copulas(&s, &CopulaFamily::CANDIDATES, folds, rep).unwrap().specs()[0].family;
        // Held-out per-observation log-likelihood of the winner, with its
        // standard error across observations.
        let fold = fold_assignment(500, folds, rep);
        let mut scores = Vec::new();
        for k in 0..folds {
            let pick = |test: bool, col: usize| (0..500).filter(|&r| (fold[r] == k) == test).map(|r| s.get(r, col)).collect::<Vec<f64>>();
            let mut train = PairSample::new(&pick(false, 0), &pick(false, 1));
            let spec = efmrf_core::copula::fit_copula(family, &mut train).unwrap().spec;
            let (x, y) = (pick(true, 0), pick(true, 1));
            for (a, b) in x.iter().zip(&y) {
                scores.push(efmrf_core::copula::copula_density(&spec, *a, *b).unwrap().ln());
            }
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let sd = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() <= 2.0 * sd / n.sqrt() + 1e-12, "{family:?}: {mean} +- {}", sd / n.sqrt());
    }
}

#[test]
fn two_triangles_are_separated() {
    let truth = two_triangles();
    let data = gen_gmrf_data(&truth, 500, 7);
    let report = fit(&data, &gaussian_config()).unwrap();
    for u in 0..3 {
        for v in 3..6 {
            assert_eq!(report.beta.get(u, v), 0.0, "({u}, {v})");
        }
    }
    assert_eq!(report.partition.block_count(), 2);
}

#[test]
fn report_bookkeeping() {
    let data = gen_gmrf_data(&two_triangles(), 300, 8);
    let config = gaussian_config();
    let report = fit(&data, &config).unwrap();
    assert_eq!(report.path.len(), 31);
    let min = report.path.iter().map(|e| e.ebic).fold(f64::INFINITY, f64::min);
    assert_eq!(report.path[report.selected].ebic, min);
    assert_eq!(report.selected_lambda, report.path[report.selected].lambda);
    for e in &report.path {
        assert_eq!(e.edges, e.beta.values().iter().filter(|&&b| b > config.threshold).count());
        assert_eq!(e.ebic, ebic(e.nll, e.edges, 300, 6, config.gamma));
        assert_eq!(e.components, connected_components(&e.beta, config.threshold).block_count());
    }
    assert_eq!(report.adjacency.edge_count(), report.path[report.selected].edges);
    // Edge count is non-increasing in lambda up to one violation.
    let violations = report.path.windows(2).filter(|w| w[1].edges < w[0].edges).count();
    assert!(violations <= 1, "{violations}");
}

#[test]
fn path_improves_on_the_initialization() {
    let data = gen_gmrf_data(&two_triangles(), 300, 9);
    let config = gaussian_config();
    let u = to_pseudoobservations(&data).unwrap();
    let table = select_copulas(&u, &config.candidates, config.folds, config.seed).unwrap();
    let w = build_potentials(&u, &table).unwrap();
    let beta0 = initialize_beta(&w);
    let report = fit_potentials(&w, table, &config).unwrap();
    let whole = NodePartition::single_block(6);
    for e in &report.path {
        let start = ef_lambda_objective(&beta0, &w, &whole, e.lambda).unwrap();
        let partition = connected_components(&e.beta, config.threshold);
        let reached = ef_lambda_objective(&e.beta, &w, &partition, e.lambda).unwrap();
        assert!(reached <= start, "lambda {}: {reached} > {start}", e.lambda);
    }
}

#[test]
fn fits_are_deterministic() {
    let data = gen_gmrf_data(&two_triangles(), 200, 10);
    for method in [Method::Et, Method::EfCuts, Method::EfLambda] {
        let config = FitConfig { method, candidates: vec![CopulaFamily::Gaussian, CopulaFamily::Clayton], ..FitConfig::default() };
        assert_eq!(fit(&data, &config).unwrap(), fit(&data, &config).unwrap());
    }
}

#[test]
fn et_and_cuts_give_single_path_entries() {
    let data = gen_gmrf_data(&two_triangles(), 200, 11);
    for method in [Method::Et, Method::EfCuts] {
        let report = fit(&data, &FitConfig { method, ..gaussian_config() }).unwrap();
        assert_eq!(report.path.len(), 1);
        assert_eq!(report.selected, 0);
    }
}

#[test]
fn independence_potentials_give_an_empty_graph() {
    let w = PotentialTensor::ones(100, 5);
    for method in [Method::Et, Method::EfCuts, Method::EfLambda] {
        let config = FitConfig { method, ..FitConfig::default() };
        let report = fit_potentials(&w, CopulaTable::independence(5), &config).unwrap();
        assert!(report.path.iter().all(|e| e.nll.abs() < 1e-9));
        if method == Method::EfLambda {
            assert_eq!(report.adjacency.edge_count(), 0);
            assert_eq!(report.partition.block_count(), 5);
        }
    }
}

#[test]
fn independent_pairs_mostly_select_independence() {
    let mut hits = 0;
    for rep in 0..20 {
        let s = sample_copula(&CopulaSpec::INDEPENDENCE, 400, 4000 + rep).unwrap();
        let table = select_copulas(&s, &CopulaFamily::CANDIDATES, 5, rep).unwrap();
        hits += usize::from(table.specs()[0].family == CopulaFamily::Independence);
    }
    assert!(hits >= 10, "{hits} of 20");
}

#[test]
fn invalid_configs_are_rejected() {
    let data = gen_gmrf_data(&two_triangles(), 50, 1);
    for config in [
        FitConfig { gamma: 1.5, ..FitConfig::default() },
        FitConfig { folds: 1, ..FitConfig::default() },
        FitConfig { candidates: vec![], ..FitConfig::default() },
        FitConfig { cut_count: 0, ..FitConfig::default() },
    ] {
        assert!(fit(&data, &config).is_err());
    }
    let beta = EdgeWeights::zeros(3);
    assert_eq!(beta.values().len(), 3);
}
