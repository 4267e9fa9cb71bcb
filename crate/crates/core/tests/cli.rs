use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracvar"))
        .args(args)
        .output()
        .unwrap()
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

const EXAMPLE: [&str; 12] = [
    "--set",
    "gamma=1",
    "--set",
    "lambda=1",
    "--set",
    "a=0",
    "--set",
    "b=1",
    "--set",
    "alpha=0.5",
    "--set",
    "beta=0.5",
];

#[test]
fn classical_solve_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = fracvar(&[
        "solve",
        "--problem",
        "classical_limit",
        "--set",
        "gamma=1",
        "--set",
        "lambda=1",
        "--set",
        "a=0",
        "--set",
        "b=1",
        "--n",
        "1000",
        "--out",
        out_arg(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!((report["j_value"].as_f64().unwrap() - 0.166667).abs() <= 1e-4);
    assert_eq!(report["converged"], serde_json::Value::Bool(true));
    assert!(report["version"].is_string());
    assert_eq!(report["config"]["problem_name"], "classical_limit");

    let csv = fs::read_to_string(out.join("solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,el_residual"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 1001);
    for (i, row) in rows.iter().enumerate() {
        let x: f64 = row[0].parse().unwrap();
        assert!((x - i as f64 / 1000.0).abs() <= 1e-15);
        assert!(row[1].parse::<f64>().is_ok());
    }
    assert_eq!(rows[0][2], "");
    assert_eq!(rows[1000][2], "");
    assert!(rows[500][2].parse::<f64>().is_ok());
}

#[test]
fn report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "solve",
        "--problem",
        "caputo_quadratic_free_endpoints",
        "--n",
        "64",
    ];
    args.extend(EXAMPLE);
    args.extend(["--out", out_arg(dir.path())]);
    assert_eq!(fracvar(&args).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["nbc_left"].is_f64() && v["nbc_right"].is_f64());
    let again = serde_json::to_string_pretty(&v).unwrap();
    let w: serde_json::Value = serde_json::from_str(&again).unwrap();
    assert_eq!(v, w);
    assert_eq!(
        v["j_value"]
            .as_f64()
            .unwrap()
            .to_string()
            .parse::<f64>()
            .unwrap(),
        v["j_value"].as_f64().unwrap()
    );
}

#[test]
fn missing_parameter_is_a_config_error_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = fracvar(&[
        "solve",
        "--problem",
        "caputo_quadratic_free_endpoints",
        "--set",
        "gamma=1",
        "--set",
        "lambda=1",
        "--set",
        "a=0",
        "--set",
        "b=1",
        "--set",
        "beta=0.5",
        "--n",
        "50",
        "--out",
        out_arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
    assert!(o.stdout.is_empty());
    assert!(!out.exists());
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"problem_name": "fixed_endpoint_quadratic", "a": 0, "b": 1, "n": 20, "alpha": 1,
            "beta": 1, "ya": 0, "yb": 1, "seed": 5, "output_dir": "ignored"}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = fracvar(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "yb=2",
        "--out",
        out_arg(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["params"]["yb"], 2.0);
    assert!(v["nbc_left"].is_null() && v["nbc_right"].is_null());
    let csv = fs::read_to_string(out.join("solution.csv")).unwrap();
    let last: f64 = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(last, 2.0);
}

#[test]
fn bad_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = dir.path().join("bad.json");
    fs::write(&bad_json, "{ not json").unwrap();
    for args in [
        vec!["solve", "--config", bad_json.to_str().unwrap()],
        vec!["solve", "--problem", "nope", "--n", "10"],
        vec!["solve"],
        vec!["frobnicate"],
        vec!["convergence", "--problem", "classical_limit", "--grids", ""],
    ] {
        let o = fracvar(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn non_convergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "solve",
        "--problem",
        "caputo_quadratic_free_endpoints",
        "--n",
        "40",
    ];
    args.extend(EXAMPLE);
    args.extend([
        "--set",
        "method=steepest_descent",
        "--set",
        "max_iters=3",
        "--out",
        out_arg(dir.path()),
    ]);
    let o = fracvar(&args);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["converged"], false);
}

fn convergence_rows(dir: &Path, alpha: &str, grids: &str) -> Vec<Vec<String>> {
    let set_a = format!("alpha={alpha}");
    let set_b = format!("beta={alpha}");
    let o = fracvar(&[
        "convergence",
        "--problem",
        "caputo_quadratic_free_endpoints",
        "--set",
        "gamma=1",
        "--set",
        "lambda=1",
        "--set",
        "a=0",
        "--set",
        "b=1",
        "--set",
        &set_a,
        "--set",
        &set_b,
        "--set",
        "reference=classical_candidate",
        "--grids",
        grids,
        "--out",
        out_arg(dir),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(dir.join("convergence.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,j_value,el_norm,nbc_left,nbc_right,max_dev_from_reference")
    );
    lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn convergence_alpha_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let a = convergence_rows(&dir.path().join("a"), "0.9", "100,200");
    let b = convergence_rows(&dir.path().join("b"), "0.99", "100,200");
    assert_eq!(a.len(), 2);
    let dev = |rows: &Vec<Vec<String>>| rows.last().unwrap()[5].parse::<f64>().unwrap();
    assert!(dev(&b) < dev(&a));
}

#[test]
fn classical_convergence_deviation_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracvar(&[
        "convergence",
        "--problem",
        "classical_limit",
        "--set",
        "gamma=1",
        "--set",
        "lambda=1",
        "--set",
        "a=0",
        "--set",
        "b=1",
        "--set",
        "reference=classical_candidate",
        "--grids",
        "50,100,200",
        "--out",
        out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let devs: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert_eq!(devs.len(), 3);
    // exact up to rounding on every grid
    assert!(devs.iter().all(|&d| d <= 1e-10), "{devs:?}");

    let o = fracvar(&[
        "convergence",
        "--problem",
        "classical_limit",
        "--set",
        "gamma=1",
        "--set",
        "lambda=1",
        "--set",
        "a=0",
        "--set",
        "b=1",
        "--grids",
        "50",
        "--out",
        out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(','));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let mut args = vec![
            "solve",
            "--problem",
            "caputo_quadratic_free_endpoints",
            "--n",
            "80",
            "--seed",
            "9",
        ];
        args.extend(EXAMPLE);
        args.extend(["--out", out.to_str().unwrap()]);
        assert_eq!(fracvar(&args).status.code(), Some(0));
        (
            fs::read(out.join("solution.csv")).unwrap(),
            fs::read(out.join("report.json")).unwrap(),
        )
    };
    assert_eq!(run("x"), run("y"));
}
