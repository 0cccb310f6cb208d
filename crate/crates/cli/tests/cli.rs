use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use efmrf_core::copula::{sample_copula, CopulaSpec};
use serde_json::Value;
use statrs::distribution::{Continuous, Normal};
use tempfile::TempDir;

fn efmrf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efmrf")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) {
    let mut text = format!("{header}\n");
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

/// Two independent uniform columns.
fn independent_csv(dir: &Path) -> std::path::PathBuf {
    let s = sample_copula(&CopulaSpec::INDEPENDENCE, 300, 7).unwrap();
    let path = dir.join("noise.csv");
    write_csv(&path, "a,b", (0..300).map(|j| format!("{},{}", s.get(j, 0), s.get(j, 1))));
    path
}

fn small_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("small.conf");
    fs::write(
        &path,
        format!("# small benchmark\nscenario.dim = 6\nscenario.samples = 120\nbenchmark.repetitions = 2\nbenchmark.methods = ET,EFLambda\nfit.rho_step = 0.5\n{extra}"),
    )
    .unwrap();
    path
}

#[test]
fn independent_columns_give_an_empty_graph() {
    let dir = TempDir::new().unwrap();
    let input = independent_csv(dir.path());
    let out = dir.path().join("fit");
    let result = efmrf(&["fit", path_str(&input), "--out", path_str(&out)]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    assert_eq!(fs::read_to_string(out.join("adjacency.csv")).unwrap(), "a,b\n0,0\n0,0\n");
    let components = read_json(&out.join("components.json"));
    assert_eq!(components["component_count"], 2);
    assert_eq!(components["manifest"], "manifest.json");
    let path = read_json(&out.join("path.json"));
    assert_eq!(path["entries"].as_array().unwrap().len(), 31);
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "fit");
    for name in ["adjacency.csv", "beta.csv", "path.json", "components.json"] {
        assert!(manifest["outputs"][name].is_string(), "{name} missing from manifest");
    }
}

#[test]
fn fit_outputs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let sim = dir.path().join("sim");
    let config = small_config(dir.path(), "");
    assert!(efmrf(&["simulate", "gmrf2", "--config", path_str(&config), "--seed", "3", "--out", path_str(&sim)]).status.success());
    let input = sim.join("data.csv");
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let r = efmrf(&["fit", path_str(&input), "--config", path_str(&config), "--seed", "1", "--out", path_str(&out)]);
            assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
            out
        })
        .collect();
    for file in ["adjacency.csv", "beta.csv", "path.json", "components.json"] {
        assert_eq!(fs::read(runs[0].join(file)).unwrap(), fs::read(runs[1].join(file)).unwrap(), "{file}");
    }
    // beta.csv is symmetric with a zero diagonal and a variable-name header.
    let beta = fs::read_to_string(runs[0].join("beta.csv")).unwrap();
    let mut lines = beta.lines();
    assert_eq!(lines.next().unwrap(), "X1,X2,X3,X4,X5,X6");
    let m: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    for u in 0..6 {
        assert_eq!(m[u][u], 0.0);
        for v in 0..6 {
            assert_eq!(m[u][v], m[v][u]);
        }
    }
}

#[test]
fn constant_column_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("const.csv");
    write_csv(&input, "x,flat,y", (0..20).map(|j| format!("{j},3.5,{}", (j * 7) % 11)));
    let r = efmrf(&["fit", path_str(&input), "--out", path_str(&dir.path().join("o"))]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("'flat'"));
}

#[test]
fn malformed_input_reports_the_line() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "x,y\n1,2\n3,oops\n4,5\n").unwrap();
    let r = efmrf(&["fit", path_str(&input), "--out", path_str(&dir.path().join("o"))]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("line 3") && err.contains("oops"), "{err}");
    let missing = efmrf(&["fit", path_str(&dir.path().join("absent.csv")), "--out", path_str(&dir.path().join("o"))]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(efmrf(&["simulate", "nosuch"]).status.code(), Some(2));
    assert_eq!(efmrf(&["frobnicate"]).status.code(), Some(2));
    let config = dir.path().join("bad.conf");
    fs::write(&config, "fit.gamma = 0.5\nfit.nonsense = 1\n").unwrap();
    let r = efmrf(&["simulate", "gmrf1", "--config", path_str(&config), "--out", path_str(dir.path())]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 2"));
    let infeasible = small_config(dir.path(), "scenario.avg_degree = 9\n");
    let r = efmrf(&["simulate", "gmrf1", "--config", path_str(&infeasible), "--out", path_str(dir.path())]);
    assert_eq!(r.status.code(), Some(2));
    let r = efmrf(&["density-grid", "--family", "clayton", "--theta", "-1", "--out", path_str(dir.path())]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn simulate_defaults() {
    let dir = TempDir::new().unwrap();
    for (scenario, cols, rows) in [("gmrf1", 25, 500), ("tclique", 25, 500), ("highdim", 80, 50)] {
        let out = dir.path().join(scenario);
        assert!(efmrf(&["simulate", scenario, "--seed", "5", "--out", path_str(&out)]).status.success());
        let data = fs::read_to_string(out.join("data.csv")).unwrap();
        assert_eq!(data.lines().count(), rows + 1);
        assert_eq!(data.lines().next().unwrap().split(',').count(), cols);
        let truth = read_json(&out.join("truth.json"));
        let edges = truth["edges"].as_array().unwrap().len();
        let labels: Vec<u64> = truth["labels"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
        match scenario {
            "gmrf1" => {
                assert_eq!(edges, 25);
                assert_eq!(truth["component_count"], 1);
            }
            "highdim" => assert_eq!(edges, 120),
            _ => {
                let count = truth["component_count"].as_u64().unwrap();
                for c in 0..count {
                    let size = labels.iter().filter(|&&l| l == c).count();
                    assert!(size == 3 || size == 4);
                }
            }
        }
    }
}

fn read_density(path: &Path) -> Vec<[f64; 3]> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,y,density");
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect()
}

fn trapezoid(grid: &[[f64; 3]], size: usize) -> f64 {
    let h = grid[1][1] - grid[0][1];
    let mut total = 0.0;
    for i in 0..size {
        for j in 0..size {
            let w = |k: usize| if k == 0 || k == size - 1 { 0.5 } else { 1.0 };
            total += w(i) * w(j) * grid[i * size + j][2];
        }
    }
    total * h * h
}

#[test]
fn density_grids() {
    let dir = TempDir::new().unwrap();
    let normal = Normal::standard();
    let cases: [&[&str]; 5] = [
        &["--family", "independence"],
        &["--family", "gaussian", "--theta", "0.5"],
        &["--family", "student-t", "--theta", "-0.4", "--df", "3"],
        &["--family", "clayton", "--theta", "2"],
        &["--family", "gumbel", "--theta", "1.5"],
    ];
    for (k, extra) in cases.iter().enumerate() {
        let out = dir.path().join(format!("g{k}"));
        let mut args = vec!["density-grid", "--size", "81", "--out", path_str(&out)];
        args.extend_from_slice(extra);
        let r = efmrf(&args);
        assert!(r.status.success(), "{extra:?}: {}", String::from_utf8_lossy(&r.stderr));
        let grid = read_density(&out.join("density.csv"));
        assert_eq!(grid.len(), 81 * 81);
        assert!((trapezoid(&grid, 81) - 1.0).abs() < 1e-2, "{extra:?}");
        if k == 0 {
            for p in &grid {
                assert!((p[2] - normal.pdf(p[0]) * normal.pdf(p[1])).abs() < 1e-12);
            }
        }
        if k == 1 {
            for i in 0..81 {
                for j in 0..81 {
                    assert!((grid[i * 81 + j][2] - grid[j * 81 + i][2]).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn benchmark_summary_matches_results() {
    let dir = TempDir::new().unwrap();
    let config = small_config(dir.path(), "benchmark.sample_sizes = 60,120\n");
    let out = dir.path().join("bench");
    let r = efmrf(&["benchmark", "gmrf2", "--config", path_str(&config), "--seed", "4", "--jobs", "2", "--out", path_str(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let mut reader = csv::Reader::from_path(out.join("results.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    // One row per method, sample size and repetition.
    assert_eq!(records.len(), 2 * 2 * 2);
    let summary = read_json(&out.join("summary.json"));
    let groups = summary["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 4);
    for g in groups {
        let rows: Vec<&csv::StringRecord> = records
            .iter()
            .filter(|r| r[col("method")] == *g["method"].as_str().unwrap() && r[col("samples")].parse::<u64>().ok() == g["samples"].as_u64())
            .collect();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| &r[col("status")] == "ok"));
        for metric in ["hamming", "precision", "recall", "false_positives", "inter_cluster_false_positives"] {
            let mut v: Vec<f64> = rows.iter().map(|r| r[col(metric)].parse().unwrap()).collect();
            v.sort_by(f64::total_cmp);
            let median = (v[0] + v[1]) / 2.0;
            let reported = g[metric]["median"].as_f64().unwrap();
            assert!((median - reported).abs() < 1e-12, "{metric}: {median} vs {reported}");
        }
    }
    let again = dir.path().join("again");
    let r = efmrf(&["benchmark", "gmrf2", "--config", path_str(&config), "--seed", "4", "--jobs", "1", "--out", path_str(&again)]);
    assert!(r.status.success());
    for file in ["results.csv", "summary.json"] {
        assert_eq!(fs::read(out.join(file)).unwrap(), fs::read(again.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn highdim_benchmark_writes_roc() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("hd.conf");
    fs::write(&config, "scenario.dim = 12\nscenario.samples = 40\nbenchmark.repetitions = 1\nbenchmark.methods = EFLambda\nfit.rho_step = 1\nbenchmark.fdr_cap = 0.2\n").unwrap();
    let out = dir.path().join("hd");
    let r = efmrf(&["benchmark", "highdim", "--config", path_str(&config), "--out", path_str(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let roc = fs::read_to_string(out.join("roc.csv")).unwrap();
    for line in roc.lines().skip(1) {
        let fdr: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!(fdr <= 0.2);
    }
}
