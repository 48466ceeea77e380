use std::io::Write;
use std::process::{Command, Output};

fn effconc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_effconc")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(effconc(&["--help"]).status.code(), Some(0));
    assert_eq!(effconc(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(effconc(&["tail", "--n", "10"]).status.code(), Some(1));
    assert_eq!(effconc(&["bogus"]).status.code(), Some(1));
    assert_eq!(effconc(&["tail", "--n", "10", "--sigma", "0.7", "--u", "1"]).status.code(), Some(1));
    assert_eq!(effconc(&["quantile", "--n", "10", "--sigma", "0.2", "--delta", "1.5"]).status.code(), Some(1));
    assert_eq!(
        effconc(&["tail", "--n", "10", "--sigma", "0.2", "--u", "1", "--bounds", "nope"]).status.code(),
        Some(1)
    );
    let reps0 = effconc(&["stop", "--reps", "0"]);
    assert_eq!(reps0.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&reps0.stderr).contains("reps"));
}

#[test]
fn hoeffding_tail_is_one_at_zero() {
    let out = effconc(&["tail", "--n", "100", "--sigma", "0.25", "--u", "0", "--bounds", "hoeffding"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,r,sigma,u,sided,bound,value,is_min,winner,p,rho,kappa,lambda,flag"));
    let row: Vec<&str> = lines.next().expect("one row").split(',').collect();
    assert_eq!(row[5], "hoeffding");
    assert_eq!(row[6].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn quantile_json_lines_and_min_marking() {
    let out = effconc(&["quantile", "--n", "1000", "--sigma", "0.25", "--delta", "0.05", "--format", "json"]);
    assert!(out.status.success());
    let rows: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows.iter().filter(|r| r["is_min"] == true).count(), 1);
    let min = rows.iter().map(|r| r["value"].as_f64().unwrap()).fold(f64::INFINITY, f64::min);
    let marked = rows.iter().find(|r| r["is_min"] == true).unwrap();
    assert_eq!(marked["value"].as_f64().unwrap(), min);
    for r in &rows {
        assert!(r["value"].as_f64().unwrap() >= r["reference"].as_f64().unwrap());
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["stop", "--ell", "10", "--reps", "2", "--rules", "hoeffding,eb", "--seed", "7"];
    let a = effconc(&args);
    let b = effconc(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("replication,rule,ell,check_index,n,half_width,stopped,correct\n"));
    assert!(text.lines().any(|l| l.starts_with("0,hoeffding,10,0,14979,")));
}

#[test]
fn data_file_matches_summary_mode() {
    let data = [0.1, 0.5, 0.9, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6, 0.55];
    let mut file = tempfile::NamedTempFile::new().unwrap();
    for v in data {
        writeln!(file, "{v}").unwrap();
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let path = file.path().to_str().unwrap();
    let from_file = effconc(&["empirical", "--data", path, "--delta", "0.05", "--bounds", "eb,hoeffding"]);
    let mean_s = mean.to_string();
    let var_s = var.to_string();
    let from_summary = effconc(&[
        "empirical",
        "--n",
        "10",
        "--mean",
        &mean_s,
        "--empvar",
        &var_s,
        "--delta",
        "0.05",
        "--bounds",
        "eb,hoeffding",
    ]);
    assert!(from_file.status.success() && from_summary.status.success());
    let value = |o: &Output| -> Vec<f64> {
        stdout(o).lines().skip(1).map(|l| l.split(',').nth(7).unwrap().parse().unwrap()).collect()
    };
    for (a, b) in value(&from_file).iter().zip(value(&from_summary)) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn out_of_range_data_names_the_line() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "0.2\n0.4\n1.5\n0.1").unwrap();
    let out = effconc(&["empirical", "--data", file.path().to_str().unwrap(), "--delta", "0.05"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"));
}

#[test]
fn sweep_writes_the_requested_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tail.csv");
    let out = effconc(&[
        "sweep",
        "tail",
        "--n",
        "1e2..1e3",
        "--sigma",
        "0.25",
        "--u",
        "1,2",
        "--bounds",
        "hoeffding,bernstein",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn selftest_fault_injection_exits_three() {
    let ok = effconc(&["selftest", "--suite", "special,classical"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = effconc(&["selftest", "--suite", "wasserstein", "--inject-fault", "b21"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(stdout(&bad).contains("FAIL wasserstein/b21"));
}
