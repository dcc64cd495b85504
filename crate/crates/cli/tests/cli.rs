use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riesz-lab"))
        .args(args)
        .env_remove("RIESZ_LAB_JOBS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let out = dir.join(name.replace(".toml", ""));
    let path = dir.join(name);
    fs::write(&path, format!("output = {:?}\n{body}", out.display().to_string())).unwrap();
    path.display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i]).collect()
}

fn all_numbers_finite(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
        Value::Array(a) => a.iter().all(all_numbers_finite),
        Value::Object(m) => m.values().all(all_numbers_finite),
        _ => true,
    }
}

const SMALL_1D: &str = r#"
m = 3
[grid]
d = 1
points = 64
[params]
gamma = 2
nu = 1
lambda = 0.05
alpha = 0.5
[initial]
family = "single-mode"
k = [1]
delta = 1e-2
[stepper]
dt = 0.01
t_end = 5
sample_every = 5
"#;

#[test]
fn equilibrium_run_has_zero_diagnostics() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "eq.toml", "[grid]\nd = 2\npoints = 16\n[stepper]\nt_end = 0.5\n");
    let o = lab(&["simulate", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("eq/timeseries.csv"));
    for name in ["neutrality_residual", "m_c_0", "m_c_1", "norm_hm", "norm_l2", "L", "E", "E_mu", "cross_term", "X_m", "D"] {
        assert!(column(&header, &rows, name).iter().all(|v| *v == 0.0), "{name}");
    }
}

#[test]
fn small_single_mode_norm_decreases() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "sm.toml", SMALL_1D);
    let o = lab(&["simulate", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("sm/timeseries.csv"));
    let norm = column(&header, &rows, "norm_hm");
    assert!(norm.len() > 50);
    assert!(norm.windows(2).all(|w| w[1] < w[0]));
    assert!(stdout(&o).contains("||h0||_H^3"));
}

#[test]
fn timeseries_header_names_every_report_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "h.toml", SMALL_1D);
    assert!(lab(&["simulate", &cfg, "--set", "stepper.t_end=0.1"]).status.success());
    let (header, _) = read_csv(&dir.path().join("h/timeseries.csv"));
    let expected = [
        "t", "mass", "neutrality_residual", "m_c_0", "norm_h_hm", "norm_u_hm", "norm_hm", "norm_l2",
        "L", "E", "E_mu", "cross_term", "X_m", "D", "min_rho",
    ];
    assert_eq!(header, expected);
}

#[test]
fn alpha_equal_to_dimension_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[grid]\nd = 2\npoints = 16\n[params]\nalpha = 2.0\n");
    let o = lab(&["simulate", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("max{d−2,0} ≤ α < d"), "{}", stderr(&o));
    assert!(!dir.path().join("bad").exists());
}

#[test]
fn unknown_keys_are_rejected_with_context() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "u.toml", "[params]\ngamma = 2\nbeta = 1\n");
    let o = lab(&["simulate", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("beta") && msg.contains("line"), "{msg}");

    let o = lab(&["simulate", &cfg, "--set", "params.beta=0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn overrides_and_dry_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "o.toml", SMALL_1D);
    let o = lab(&["simulate", &cfg, "--set", "params.alpha=0.7", "--set", "initial.k=[2]", "--dry-run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("alpha = 0.7"), "{text}");
    assert!(text.contains("k = [2]"), "{text}");
    assert!(!dir.path().join("o").exists());

    let o = lab(&["simulate", &cfg, "--set", "params.alpha=1", "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lab(&["simulate", &cfg, "--set", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let body = r#"
[grid]
d = 2
points = 32
[initial]
family = "random-band"
delta = 0.05
kmax = 4
seed = 42
target = "both"
[stepper]
t_end = 0.3
"#;
    let a = write_config(dir.path(), "a.toml", body);
    let b = write_config(dir.path(), "b.toml", body);
    assert!(lab(&["simulate", &a]).status.success());
    assert!(lab(&["--jobs", "1", "simulate", &b]).status.success());
    let ta = fs::read(dir.path().join("a/timeseries.csv")).unwrap();
    let tb = fs::read(dir.path().join("b/timeseries.csv")).unwrap();
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);

    let c = write_config(dir.path(), "c.toml", &body.replace("seed = 42", "seed = 43"));
    assert!(lab(&["simulate", &c]).status.success());
    assert_ne!(fs::read(dir.path().join("c/timeseries.csv")).unwrap(), ta);
}

#[test]
fn summary_is_finite_and_states_conventions() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.toml", &format!("{SMALL_1D}[decay]\nmin_r_squared = 0.9\n"));
    assert!(lab(&["decay", &cfg]).status.success());
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s/summary.json")).unwrap()).unwrap();
    assert!(all_numbers_finite(&summary));
    assert!(summary["conventions"].as_str().unwrap().contains("(2*pi)^d"));
    assert!(summary["versions"]["riesz-lab"].is_string());
    assert_eq!(summary["config"]["params"]["alpha"], 0.5);
    assert!(summary["fits"]["norm_hm"]["rate"].as_f64().unwrap() > 0.0);
    assert!(summary["initial"]["norm_h_hm"].as_f64().unwrap() > 0.0);
}

#[test]
fn snapshots_round_trip() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "snap.toml",
        &SMALL_1D.replace("sample_every = 5", "sample_every = 5\nsnapshot_times = [0.0, 0.25]"),
    );
    assert!(lab(&["simulate", &cfg, "--set", "stepper.t_end=0.5"]).status.success());
    let snap = dir.path().join("snap/snapshots");
    let meta: Value = serde_json::from_str(&fs::read_to_string(snap.join("snapshot_001.json")).unwrap()).unwrap();
    assert_eq!(meta["points"], 64);
    assert_eq!(meta["fields"], serde_json::json!(["h", "u_0"]));
    assert!((meta["t"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    let values = riesz_lab::output::read_snapshot(&snap.join("snapshot_000.bin")).unwrap();
    assert_eq!(values.len(), 128);
    // h at x = 0 is the peak of δ cos x after a tiny neutral shift
    assert!((values[0] - 1e-2).abs() < 1e-4);
    assert!(values[64..].iter().all(|v| *v == 0.0));
}

const RELAX: &str = r#"
[grid]
d = 1
points = 64
[params]
gamma = 2
nu = 1
lambda = 0.0
alpha = 0.5
[initial]
family = "single-mode"
k = [1]
delta = 0.2
target = "density"
[stepper]
dt = 5e-4
t_end = 0.5
sample_every = 4
"#;

fn relax_errors(path: &Path) -> Vec<(f64, Option<f64>)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().ok())
        })
        .collect()
}

#[test]
fn relaxation_errors_shrink_with_epsilon() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "r.toml", RELAX);
    let o = lab(&["relax-limit", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = relax_errors(&dir.path().join("r/relax.csv"));
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0.2, 0.1, 0.05]);
    let e: Vec<f64> = rows.iter().map(|r| r.1.unwrap()).collect();
    assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
    assert!(e[1] / e[2] >= 1.5, "{e:?}");
}

#[test]
fn relaxation_from_constant_state_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &RELAX.replace("single-mode", "equilibrium"));
    assert!(lab(&["relax-limit", &cfg]).status.success());
    for (_, e) in relax_errors(&dir.path().join("c/relax.csv")) {
        assert!(e.unwrap() <= 1e-12);
    }
}

#[test]
fn unstable_epsilon_does_not_abort_the_sweep() {
    let dir = TempDir::new().unwrap();
    let body = RELAX.replace("dt = 5e-4", "dt = 2e-3").replace("t_end = 0.5", "t_end = 0.2");
    let cfg = write_config(dir.path(), "f.toml", &format!("{body}[relax]\neps = [1.0, 0.01]\n"));
    let o = lab(&["relax-limit", &cfg]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    let rows = relax_errors(&dir.path().join("f/relax.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows[0].1.is_some());
    assert!(rows[1].1.is_none());
    let text = fs::read_to_string(dir.path().join("f/relax.csv")).unwrap();
    assert!(text.contains("failed"));
}

#[test]
fn relax_rejects_increasing_epsilon() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "i.toml", &format!("{RELAX}[relax]\neps = [0.1, 0.2]\n"));
    assert_eq!(lab(&["relax-limit", &cfg]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_four() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "d.toml", &format!("{SMALL_1D}[decay]\nmin_r_squared = 1.5\n"));
    let o = lab(&["decay", &cfg]);
    assert_eq!(o.status.code(), Some(4));
    assert!(dir.path().join("d/summary.json").exists());
}

#[test]
fn numerical_failure_reports_time() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "n.toml", &SMALL_1D.replace("delta = 1e-2", "delta = 0.5").replace("dt = 0.01", "dt = 0.5"));
    let o = lab(&["simulate", &cfg]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("t = "), "{}", stderr(&o));
}

#[test]
fn job_limits() {
    let o = Command::new(env!("CARGO_BIN_EXE_riesz-lab"))
        .args(["constants"])
        .env("RIESZ_LAB_JOBS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "j.toml", RELAX);
    let o = Command::new(env!("CARGO_BIN_EXE_riesz-lab"))
        .args(["--jobs", "3", "relax-limit", &cfg])
        .env("RIESZ_LAB_JOBS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn constants_subcommand() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "k.toml", "m = 3\n[grid]\nd = 2\npoints = 16\n[params]\nalpha = 1.5\n");
    let o = lab(&["constants", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k_0"], 2);
    assert!((v["c_0"].as_f64().unwrap() - 1.5 / 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["regime"], "super-manev");

    let o = lab(&["constants", &cfg, "--set", "m=0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dispersion_subcommand() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "disp.toml", "[params]\nnu = 0.0\nlambda = 0.1\npressure = false\n");
    let o = lab(&["dispersion", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("disp/summary.json")).unwrap()).unwrap();
    let roots = summary["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 8);
    // z² = λ c |n|^{2+α-d} at n = 4
    let z = roots[3]["roots"][0][0].as_f64().unwrap();
    assert!((z - (0.1 * 4f64.powf(1.5)).sqrt()).abs() < 1e-12);
    assert_eq!(lab(&["dispersion", &cfg, "--set", "dispersion.modes=[0.5]"]).status.code(), Some(2));
}

#[test]
fn selftest_passes_and_detects_a_flipped_multiplier() {
    let o = lab(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    let line = text.lines().last().unwrap();
    let count: usize = line
        .strip_prefix("checks run: ")
        .and_then(|r| r.split(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(count >= 30, "{line}");

    let o = lab(&["selftest", "--inject-fault", "multiplier-sign"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("[FAIL] fractional-power d=1 s=0.7"));
    assert!(stderr(&o).contains("fractional-power"));
}

#[test]
fn scenario_name_must_match_subcommand() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "m.toml", "scenario = \"decay\"\n");
    assert_eq!(lab(&["simulate", &cfg, "--dry-run"]).status.code(), Some(2));
    assert!(lab(&["decay", &cfg, "--dry-run"]).status.success());
}
