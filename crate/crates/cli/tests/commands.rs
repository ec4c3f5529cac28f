use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use depcens::io::read_dataset;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_depcens"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn depcens")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate_to(dir: &Path, name: &str, copula: &str, n: usize, seed: u64) -> PathBuf {
    let out = dir.join(name);
    let o = run(&[
        "simulate",
        "--scenario",
        "1",
        "--copula",
        copula,
        "--tau",
        "0.5",
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_reproducible_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate_to(dir.path(), "a.csv", "frank", 1000, 7);
    let b = simulate_to(dir.path(), "b.csv", "frank", 1000, 7);
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("# depcens "));
    assert!(text.contains("# seed: 7"));
    assert!(text.contains("# config: "));
    // Only the output path differs between the two invocations.
    assert_eq!(text.replace("a.csv", "b.csv"), std::fs::read_to_string(&b).unwrap());
    let data = read_dataset(&a).unwrap().data;
    assert_eq!(data.len(), 1000);
    assert!((data.fraction_uncensored() - 0.40).abs() < 0.05);
}

#[test]
fn fit_reports_estimates_standard_errors_and_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_to(dir.path(), "d.csv", "gumbel", 400, 3);
    let out = dir.path().join("fit.json");
    let o = run(&[
        "fit",
        "--data",
        path_str(&data),
        "--copula",
        "gumbel",
        "--margin-t",
        "lognormal",
        "--margin-c",
        "lognormal",
        "--bootstrap",
        "8",
        "--all-copulas",
        "--seed",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&out);
    assert_eq!(doc["meta"]["seed"], 1);
    assert_eq!(doc["meta"]["config"]["bootstrap"], 8);
    let fit = &doc["fit"];
    assert_eq!(fit["converged"], true);
    assert_eq!(fit["estimate"].as_array().unwrap().len(), 5);
    assert_eq!(fit["sandwich_se"].as_array().unwrap().len(), 5);
    assert_eq!(fit["bootstrap"]["se"].as_array().unwrap().len(), 5);
    assert_eq!(fit["names"][4], "logit_tau");
    let rows = doc["comparison"].as_array().unwrap();
    let families: Vec<&str> = rows.iter().map(|r| r["copula"].as_str().unwrap()).collect();
    assert_eq!(families, ["independence", "frank", "clayton", "gumbel", "gauss"]);
    assert!(rows.iter().all(|r| r["loglik"].is_number()));
    let empirical = doc["data"]["empirical_prob_uncensored"].as_f64().unwrap();
    assert!((fit["fitted_prob_uncensored"].as_f64().unwrap() - empirical).abs() < 0.05);
}

#[test]
fn fit_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_to(dir.path(), "d.csv", "clayton", 300, 5);
    let args = |out: &str| {
        vec![
            "fit".to_owned(),
            "--data".into(),
            path_str(&data).into(),
            "--copula".into(),
            "clayton".into(),
            "--bootstrap".into(),
            "4".into(),
            "--out".into(),
            out.into(),
        ]
    };
    let a = dir.path().join("x.json");
    let b = dir.path().join("x2.json");
    assert!(bin().args(args(path_str(&a))).status().unwrap().success());
    assert!(bin().args(args(path_str(&b))).env("DEPCENS_THREADS", "2").status().unwrap().success());
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta.replace("x.json", "x2.json"), std::fs::read_to_string(&b).unwrap());
}

#[test]
fn missing_file_names_the_path() {
    let o = run(&["fit", "--data", "/nonexistent/input.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/input.csv"));
}

#[test]
fn malformed_rows_are_listed_by_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "y,delta\n1.0,1\n2.0,x\n3.0,0\nfoo,1\n").unwrap();
    let o = run(&["fit", "--data", path_str(&p)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("line 5"), "{err}");
}

#[test]
fn nonpositive_times_are_excluded_and_counted() {
    let dir = tempfile::tempdir().unwrap();
    let src = simulate_to(dir.path(), "d.csv", "frank", 300, 11);
    let mut text = std::fs::read_to_string(&src).unwrap();
    text.push_str("0,1\n0,0\n-2.5,1\n");
    let p = dir.path().join("with_zeros.csv");
    std::fs::write(&p, text).unwrap();
    let out = dir.path().join("fit.json");
    let o = run(&["fit", "--data", path_str(&p), "--copula", "independence", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("excluded 3 rows"));
    let doc = json(&out);
    assert_eq!(doc["data"]["excluded_nonpositive"], 3);
    assert_eq!(doc["data"]["n"], 300);
}

#[test]
fn density_grid_has_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("density.csv");
    let o = run(&[
        "density",
        "--scenario",
        "1",
        "--copula",
        "gumbel",
        "--tau",
        "0.8",
        "--grid",
        "0.01:60:600",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["y", "f_y", "f_y_delta1", "f_y_delta0"]);
    let rows: Vec<Vec<f64>> =
        rdr.records().map(|r| r.unwrap().iter().map(|x| x.parse::<f64>().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 600);
    for r in &rows {
        assert_eq!(r[1], r[2] + r[3]);
    }
}

#[test]
fn density_rejects_nonpositive_grid() {
    let o = run(&["density", "--scenario", "1", "--copula", "frank", "--tau", "0.5", "--grid", "0:60:10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("positive"));
}

#[test]
fn probe_verdicts() {
    let o = run(&[
        "probe",
        "--copula",
        "frank",
        "--tau",
        "0.5",
        "--margin-t",
        "lognormal:2.2,1.0",
        "--margin-c",
        "lognormal:2.0,0.25",
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("(C2a): satisfied (numeric)"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("probe.csv");
    let o = run(&[
        "probe",
        "--copula",
        "clayton",
        "--tau",
        "0.5",
        "--margin-t",
        "lognormal:2.2,1.0",
        "--margin-c",
        "lognormal:2.0,0.25",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("(C2a): not satisfied"), "{stdout}");
    assert!(stdout.contains("(C2) fails"), "{stdout}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# (C2) fails"));
    assert!(text.lines().any(|l| l.starts_with("t,u,v,h_t_given_c")));
}

#[test]
fn study_table_layout_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path, threads: &str| {
        let o = run(&[
            "study",
            "--scenario",
            "2",
            "--families",
            "frank,gauss",
            "--taus",
            "0.5",
            "--ns",
            "150",
            "--reps",
            "3",
            "--seed",
            "4",
            "--threads",
            threads,
            "--out",
            path_str(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    args(&a, "1");
    args(&b, "2");
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap();
    let body = |t: &str| t.lines().filter(|l| !l.starts_with('#')).map(str::to_owned).collect::<Vec<_>>();
    assert_eq!(body(&ta), body(&tb));
    let lines = body(&ta);
    assert_eq!(
        lines[0],
        "scenario,copula,tau,n,reps,used,dropped,warning,statistic,mu_T,log_sigma_T,mu_C,log_sigma_C,logit_tau,tau"
    );
    assert_eq!(lines.len(), 1 + 2 * 4);
    let stats: Vec<&str> = lines[1..5].iter().map(|l| l.split(',').nth(8).unwrap()).collect();
    assert_eq!(stats, ["average.estimate", "sd.of.average.estimate", "average.bias", "RMSE"]);
}

#[test]
fn single_replicate_study_leaves_sd_blank() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&[
        "study",
        "--families",
        "clayton",
        "--taus",
        "0.5",
        "--ns",
        "200",
        "--reps",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let sd = text.lines().find(|l| l.contains("sd.of.average.estimate")).unwrap();
    assert!(sd.ends_with("sd.of.average.estimate,,,,,,"), "{sd}");
}

#[test]
fn invalid_scenario_is_an_error() {
    let o = run(&["study", "--scenario", "3", "--reps", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["simulate", "--scenario", "9", "--copula", "frank", "--tau", "0.5", "--n", "10"]);
    assert_eq!(o.status.code(), Some(1));
}
