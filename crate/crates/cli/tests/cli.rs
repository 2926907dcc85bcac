use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lgqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgqp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FIG1: [&str; 14] = [
    "--s1", "1", "--s2", "-1", "--x0", "0.550", "--p0", "1.925", "--r", "1", "--theta0",
    "1.0471975511965976", "--t2", "3.0",
];

fn q_of(o: &Output) -> f64 {
    let text = stdout(o);
    let line = text.lines().find(|l| l.starts_with("q = ")).expect("q line");
    line[4..].trim().parse().unwrap()
}

#[test]
fn eval_routes_agree() {
    let mut args = vec!["eval", "--route", "integral"];
    args.extend(FIG1);
    let integral = lgqp(&args);
    assert!(integral.status.success(), "{}", stderr(&integral));
    let mut args = vec!["eval", "--route", "series", "--nmax", "500"];
    args.extend(FIG1);
    let series = lgqp(&args);
    assert!(series.status.success(), "{}", stderr(&series));
    assert!((q_of(&integral) - q_of(&series)).abs() < 1e-3);
}

#[test]
fn eval_json_output() {
    let mut args = vec!["eval", "--out", "json"];
    args.extend(FIG1);
    let o = lgqp(&args);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["route"], "integral");
    assert_eq!(doc["s2"], -1);
    assert!(doc["q"].as_f64().unwrap() > 0.5);
}

#[test]
fn window_by_series() {
    let o = lgqp(&[
        "eval", "--route", "series", "--projector", "window", "--L", "1.02", "--s1", "1",
        "--s2", "1", "--t2", "1.55",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((q_of(&o) + 0.0538).abs() < 1e-3);
}

#[test]
fn invalid_combinations_exit_2() {
    let cases: [&[&str]; 6] = [
        &["eval", "--route", "integral", "--projector", "window", "--L", "1", "--s1", "1", "--s2", "1", "--t2", "1"],
        &["eval", "--route", "integral", "--temp-ratio", "1", "--s1", "1", "--s2", "1", "--t2", "1"],
        &["eval", "--projector", "window", "--s1", "1", "--s2", "1", "--t2", "1"],
        &["eval", "--route", "integral", "--nmax", "50", "--s1", "1", "--s2", "1", "--t2", "1"],
        &["eval", "--s1", "2", "--s2", "1", "--t2", "1"],
        &["eval", "--route", "fock", "--s1", "1", "--s2", "1", "--t2", "1"],
    ];
    for args in cases {
        let o = lgqp(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn verify_exit_codes() {
    let o = lgqp(&["verify", "normalization"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS normalization"));
    let o = lgqp(&["verify", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
}

const SCAN: &str = r#"
plane = "x0p0"
route = "integral"
s1 = 1
s2 = -1
r = 0.5
axis1 = { min = -1.2, max = -0.6, steps = 3 }
axis2 = { min = 1.0, max = 1.4, steps = 3 }

[t2_search]
coarse_steps = 40
refine_iters = 20
"#;

fn scan(dir: &Path, threads: &str) -> Vec<u8> {
    let cfg = dir.join("plane.toml");
    fs::write(&cfg, SCAN).unwrap();
    let out = dir.join(format!("t{threads}"));
    fs::create_dir_all(&out).unwrap();
    let o = lgqp(&[
        "--threads",
        threads,
        "scan",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    fs::read(out.join("plane.csv")).unwrap()
}

#[test]
fn scan_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let one = scan(dir.path(), "1");
    assert_eq!(one, scan(dir.path(), "4"));
    assert_eq!(one, scan(dir.path(), "16"));
    let text = String::from_utf8(one).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("axis1,axis2,q_min,t2_argmin"));
    assert_eq!(lines.count(), 9);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t1/plane.json")).unwrap()).unwrap();
    assert_eq!(json["manifest"]["cells"], 9);
    assert_eq!(json["manifest"]["failed_cells"], 0);
    assert_eq!(json["manifest"]["config"]["t2_search"]["refine_iters"], 20);
    assert_eq!(json["cells"].as_array().unwrap().len(), 9);
    let min = json["global"]["q_min"].as_f64().unwrap();
    assert!((min + 0.113 / 4.0).abs() < 1e-3, "{min}");
}

#[test]
fn single_cell_scan_matches_minimized_eval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cell.toml");
    fs::write(
        &cfg,
        SCAN.replace("steps = 3 }", "steps = 1 }")
            .replace("min = -1.2", "min = -0.896")
            .replace("min = 1.0", "min = 1.18"),
    )
    .unwrap();
    let o = lgqp(&["scan", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("cell.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(csv.lines().count(), 2);
    let wt2 = format!("{}", row[3]);
    let e = lgqp(&[
        "eval", "--s1", "1", "--s2", "-1", "--x0", "-0.896", "--p0", "1.18", "--r", "0.5", "--t2", &wt2,
    ]);
    assert!((q_of(&e) - row[2]).abs() < 1e-14);
}

#[test]
fn config_errors_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, SCAN.replace("steps = 3 }", "steps = \"3\" }")).unwrap();
    let o = lgqp(&["scan", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 7, column 43"), "{}", stderr(&o));

    fs::write(&cfg, SCAN.replace("route = \"integral\"", "route = \"integral\"\nn_th = 0.5")).unwrap();
    let o = lgqp(&["scan", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = lgqp(&["scan", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_cells_are_nan() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("deep.toml");
    // a 601-state basis exceeds the oracle's cap, so every cell fails
    let text = SCAN
        .replace("route = \"integral\"", "route = \"oracle\"")
        .replace("steps = 3 }", "steps = 1 }")
        + "\n[controls.oracle]\ndim = 601\n";
    fs::write(&cfg, text).unwrap();
    let o = lgqp(&["scan", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("deep.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",nan,nan"), "{csv}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("deep.json")).unwrap()).unwrap();
    assert_eq!(json["manifest"]["failed_cells"], 1);
}

#[test]
fn example_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = fs::read_to_string(&path).unwrap();
            let cfg: lgqp::ScanConfig = toml::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 9);
}
