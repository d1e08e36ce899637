use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use countfit::freqfile;
use countfit_core::estimate::mle_zig;
use countfit_core::sim::sample_histogram;
use serde_json::Value;
use tempfile::TempDir;

fn countfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_countfit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn simulate(dir: &TempDir, spec: &str, n: usize, seed: u64) -> PathBuf {
    let path = dir.path().join("sim.csv");
    let out = countfit(&[
        "simulate",
        "--model",
        spec,
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        s(&path),
        "--quiet",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn simulate_then_fit_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = simulate(&dir, "zig:pi=0.3,p=0.4", 5000, 3);
    let parsed = freqfile::read(&path).unwrap().sample;
    let direct = sample_histogram(
        &"zig:pi=0.3,p=0.4"
            .parse::<countfit::modelspec::ModelSpec>()
            .unwrap()
            .model,
        5000,
        3,
    )
    .unwrap();
    assert_eq!(parsed.histogram(), direct.histogram());

    let out = countfit(&["fit", s(&path), "--model", "zig"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["sample"]["n"], 5000);
    assert_eq!(v["sample"]["n0"], direct.n0());
    // floats survive serialization bit for bit
    let fit = mle_zig(&direct).unwrap();
    assert_eq!(
        v["models"][0]["loglik"].as_f64().unwrap().to_bits(),
        fit.loglik.to_bits()
    );
    assert_eq!(
        v["models"][0]["params"]["pi"].as_f64().unwrap().to_bits(),
        fit.model.params()[0].1.to_bits()
    );
}

#[test]
fn zig_and_hg_have_equal_aic() {
    let dir = TempDir::new().unwrap();
    let path = simulate(&dir, "zig:pi=0.25,p=0.3", 3000, 8);
    let out = countfit(&["compare", s(&path), "--models", "zig,hg"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let aic = |i: usize| v["models"][i]["aic"].as_f64().unwrap();
    assert!((aic(0) - aic(1)).abs() < 1e-9);
    let notes = v["notes"].as_array().unwrap();
    assert!(notes
        .iter()
        .any(|n| n.as_str().unwrap().contains("same maximum likelihood")));
}

#[test]
fn compare_degrees_of_freedom() {
    let dir = TempDir::new().unwrap();
    let path = simulate(&dir, "nb:m=2.5,k=0.6", 2000, 4);
    let out = countfit(&[
        "compare",
        s(&path),
        "--models",
        "nb,zig",
        "--pool-threshold",
        "5",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for m in v["models"].as_array().unwrap() {
        let gof = &m["gof"];
        let bins = gof["bins"].as_array().unwrap().len() as u64;
        assert_eq!(gof["df"].as_u64().unwrap(), bins - 1 - 2, "{}", m["family"]);
        assert_eq!(gof["pooling_threshold"], 5.0);
        let observed: u64 = gof["bins"]
            .as_array()
            .unwrap()
            .iter()
            .map(|b| b["observed"].as_u64().unwrap())
            .sum();
        assert_eq!(observed, 2000);
    }
    let best = v["best_aic_model"].as_str().unwrap();
    let best_aic = v["models"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["family"] == best)
        .unwrap()["aic"]
        .as_f64()
        .unwrap();
    for m in v["models"].as_array().unwrap() {
        assert!(best_aic <= m["aic"].as_f64().unwrap());
    }
}

#[test]
fn model_list_is_required() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "d.csv", "0,5\n1,3\n2,2\n");
    assert_eq!(code(&countfit(&["compare", s(&path), "--models", ""])), 2);
    assert_eq!(code(&countfit(&["compare", s(&path)])), 2);
    assert_eq!(code(&countfit(&["figure", s(&path), "--models", "zzz"])), 2);
    assert_eq!(
        code(&countfit(&[
            "fit",
            s(&path),
            "--model",
            "nb",
            "--pool-threshold",
            "0"
        ])),
        2
    );
}

#[test]
fn spec_bounds_are_enforced() {
    let out = countfit(&["simulate", "--model", "zig:pi=-5,p=0.4", "--n", "10"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bound"));
    let out = countfit(&["simulate", "--model", "geom:p=0.4", "--n", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn point_mass_simulation() {
    let out = countfit(&["simulate", "--model", "geom:p=1.0", "--n", "10"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "count,frequency\n0,10\n"
    );
}

#[test]
fn under_dispersed_nb_fit_fails_with_error_block() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "under.csv", "count,frequency\n0,10\n1,30\n2,10\n");
    let report = dir.path().join("r.json");
    let out = countfit(&["fit", s(&path), "--model", "nb", "--out", s(&report)]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("over-dispersed"));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["models"][0]["status"], "error");
    assert_eq!(v["models"][0]["error"]["kind"], "under_dispersed");
}

#[test]
fn all_zero_input_fails_every_family() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "zeros.csv", "0,12\n");
    let out = countfit(&["compare", s(&path), "--models", "nb,zig,hg,geom,poisson"]);
    assert_eq!(code(&out), 4);
    let v = json(&out);
    for m in v["models"].as_array().unwrap() {
        assert_eq!(m["error"]["kind"], "all_zeros");
    }
}

#[test]
fn malformed_input_exits_with_parse_code() {
    let dir = TempDir::new().unwrap();
    for (i, text) in ["0,5\n0,3\n", "0,5\n1,x\n", "3,1\n2,1\n", "0,0\n"]
        .iter()
        .enumerate()
    {
        let path = write(&dir, &format!("bad{i}.csv"), text);
        let out = countfit(&["fit", s(&path), "--model", "zig"]);
        assert_eq!(code(&out), 3, "{text:?}");
    }
    let out = countfit(&["fit", "/nonexistent/data.csv", "--model", "zig"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn sample_a_fixture_matches_tabulated_values() {
    let dir = TempDir::new().unwrap();
    // N = 540, N0 = 329, Σy = 549
    let path = write(
        &dir,
        "sample_a.csv",
        "# sample A shape\ncount,frequency\n0,329\n1,210\n339,1\n",
    );
    let out = countfit(&["fit", s(&path), "--model", "zig"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let params = &v["models"][0]["params"];
    assert!((params["pi"].as_f64().unwrap() - 0.3653).abs() < 5e-3);
    assert!((params["p"].as_f64().unwrap() - 0.3843).abs() < 5e-3);
}

#[test]
fn fit_mean_one_fixture() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "m1.csv", "0,50\n1,24\n2,12\n3,8\n4,5\n8,1\n");
    let v = json(&countfit(&["fit", s(&path), "--model", "zig"]));
    assert!(v["models"][0]["params"]["pi"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["models"][0]["params"]["p"].as_f64().unwrap(), 0.5);
}

#[test]
fn figure_columns_sum_to_n() {
    let dir = TempDir::new().unwrap();
    let path = simulate(&dir, "nb:m=2.8,k=0.42", 1500, 21);
    let out = countfit(&["figure", s(&path), "--models", "nb,zig"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("count,observed,nb,zig"));
    let mut sums = [0.0f64; 3];
    let mut last = "";
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        for (acc, f) in sums.iter_mut().zip(&fields[1..]) {
            *acc += f.parse::<f64>().unwrap();
        }
        last = fields[0];
    }
    assert_eq!(last, "tail+");
    assert_eq!(sums[0], 1500.0);
    assert!((sums[1] - 1500.0).abs() < 1e-6 && (sums[2] - 1500.0).abs() < 1e-6);
}

#[test]
fn geometric_figure_fixture() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "g.csv", "0,4\n1,2\n2,1\n4,1\n");
    let text =
        String::from_utf8(countfit(&["figure", s(&path), "--models", "geom"]).stdout).unwrap();
    // N = 8, m = 1, so p̂ = 1/2
    let expected: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(expected.len(), 6);
    for (got, want) in expected.iter().zip([4.0, 2.0, 1.0, 0.5, 0.25, 0.25]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let path = simulate(&dir, "hg:pi=0.5,p=0.3", 800, 2);
    let run = |args: &[&str]| countfit(args).stdout;
    let compare = ["compare", s(&path), "--models", "nb,zig,hg,geom,poisson"];
    assert_eq!(run(&compare), run(&compare));
    let figure = ["figure", s(&path), "--models", "nb,hg"];
    assert_eq!(run(&figure), run(&figure));
    let recover = [
        "recover",
        "--model",
        "nb:m=2,k=0.8",
        "--n",
        "300",
        "--reps",
        "4",
        "--seed",
        "9",
    ];
    assert_eq!(run(&recover), run(&recover));
}

#[test]
fn recover_reports_each_estimator() {
    let out = countfit(&[
        "recover",
        "--model",
        "nb:m=2.8235,k=0.424",
        "--n",
        "2000",
        "--reps",
        "5",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["command"], "recover");
    assert_eq!(v["param_names"], serde_json::json!(["m", "k"]));
    let methods: Vec<&str> = v["methods"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["method"].as_str().unwrap())
        .collect();
    assert_eq!(methods, ["mle_nb", "mom_nb"]);
    assert_eq!(v["methods"][0]["estimates"].as_array().unwrap().len(), 5);
}

#[test]
fn large_zig_simulation_mean() {
    let dir = TempDir::new().unwrap();
    let path = simulate(&dir, "zig:pi=0.3,p=0.4", 1_000_000, 17);
    let sample = freqfile::read(&path).unwrap().sample;
    // variance of ZIG(0.3, 0.4): (1 − π) q (1 + π q) / p²
    let var = 0.7 * 0.6 * (1.0 + 0.3 * 0.6) / 0.16;
    let se = (var / 1e6f64).sqrt();
    assert!(
        (sample.mean() - 1.05).abs() < 3.0 * se,
        "mean {}",
        sample.mean()
    );
}
