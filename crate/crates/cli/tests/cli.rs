use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn vacpair(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vacpair"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn two_pulse_config(dir: &Path) {
    let out = vacpair(
        &[
            "make-config",
            "pulse-train",
            "--n",
            "2",
            "--sign-mode",
            "alternating",
            "--amplitude",
            "0.1",
            "--inverse-width",
            "0.05",
            "--delay",
            "180.32",
            "--gauge",
            "paper_2pulse",
            "--out",
            "two.json",
        ],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&vacpair(&[], dir.path())), 1);
    assert_eq!(code(&vacpair(&["spectrum", "--bogus"], dir.path())), 1);
    assert_eq!(code(&vacpair(&["spectrum", "--method", "magic"], dir.path())), 1);
    assert_eq!(code(&vacpair(&["spectrum"], dir.path())), 1);
    assert_eq!(code(&vacpair(&["spectrum", "--config", "missing.json"], dir.path())), 1);
    assert_eq!(code(&vacpair(&["make-config", "pulse-train", "--amplitude", "0.1"], dir.path())), 1);
    std::fs::write(dir.path().join("bad.json"), "{\"pulses\": 3}").unwrap();
    assert_eq!(code(&vacpair(&["spectrum", "--config", "bad.json"], dir.path())), 1);
}

#[test]
fn help_and_version_exit_with_zero() {
    let dir = TempDir::new().unwrap();
    let out = vacpair(&["--help"], dir.path());
    assert_eq!(code(&out), 0);
    for sub in ["spectrum", "density", "sweep-delay", "turning-points", "compare", "validate", "render"] {
        assert!(stdout(&out).contains(sub), "{sub} missing from help");
    }
    assert_eq!(code(&vacpair(&["--version"], dir.path())), 0);
}

#[test]
fn physics_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("zero.json"), "{\"label\": \"zero\", \"pulses\": []}").unwrap();
    let out = vacpair(&["turning-points", "--config", "zero.json", "--kpar-steps", "2"], dir.path());
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn spectrum_render_round_trip() {
    let dir = TempDir::new().unwrap();
    two_pulse_config(dir.path());
    let args = ["spectrum", "--config", "two.json", "--kpar-min", "-0.1", "--kpar-max", "0.1", "--kpar-steps", "4"];
    let first = vacpair(&[&args[..], &["--out", "a.csv", "--plot", "a.svg"]].concat(), dir.path());
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let second = vacpair(&args, dir.path());
    let text = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(text, stdout(&second));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k_parallel,k_perp,f,method");
    assert_eq!(lines.len(), 6);
    assert!(lines[1..].iter().all(|l| l.ends_with(",riccati")));

    let render = vacpair(&["render", "a.csv", "--out", "b.svg"], dir.path());
    assert_eq!(code(&render), 0);
    let svg = std::fs::read_to_string(dir.path().join("b.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains(">riccati</text>"));
    std::fs::write(dir.path().join("empty.csv"), "k_parallel,k_perp,f,method\n").unwrap();
    assert_eq!(code(&vacpair(&["render", "empty.csv"], dir.path())), 1);
}

#[test]
fn compare_interleaves_methods() {
    let dir = TempDir::new().unwrap();
    two_pulse_config(dir.path());
    let out = vacpair(
        &["compare", "--config", "two.json", "--kpar-min", "-0.05", "--kpar-max", "0.05", "--kpar-steps", "2"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let methods: Vec<String> = stdout(&out).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().to_string()).collect();
    assert_eq!(methods, ["riccati", "fermion", "riccati", "fermion", "riccati", "fermion"]);
}

#[test]
fn turning_points_csv_columns() {
    let dir = TempDir::new().unwrap();
    two_pulse_config(dir.path());
    let out = vacpair(
        &["turning-points", "--config", "two.json", "--kpar-min", "0", "--kpar-max", "0.5", "--kpar-steps", "1", "--dominant"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k_parallel,re_t,im_t,residual,vartheta"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[2] > 0.0 && r[3] < 1e-8 && r[4] > 0.0));
}

#[test]
fn density_report_is_json() {
    let dir = TempDir::new().unwrap();
    let cfg = vacpair(
        &["make-config", "single-pulse", "--amplitude", "0.3", "--inverse-width", "0.5", "--gauge", "0", "--out", "s.json"],
        dir.path(),
    );
    assert_eq!(code(&cfg), 0);
    let out = vacpair(
        &["density", "--config", "s.json", "--kpar-min", "-4", "--kpar-max", "4", "--kpar-steps", "20", "--kperp-max", "3", "--kperp-steps", "10"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["n"].as_f64().unwrap() > 0.0);
    assert!(report["error_estimate"].as_f64().is_some());
    let narrow = vacpair(
        &["density", "--config", "s.json", "--kpar-min", "-0.5", "--kpar-max", "0.5", "--kpar-steps", "4", "--kperp-max", "0.5", "--kperp-steps", "2"],
        dir.path(),
    );
    assert_eq!(code(&narrow), 2);
}

#[test]
fn sweep_delay_writes_one_row_per_value() {
    let dir = TempDir::new().unwrap();
    let spec = r#"{
        "template": {"constructor": "pulse_train", "n": 2, "sign_mode": "alternating", "amplitude": 0.2, "inverse_width": 0.4},
        "variable": "T", "values": [8.0, 9.0, 10.0],
        "observable": {"kind": "f_at_k0"}, "gauge": 0.0
    }"#;
    std::fs::write(dir.path().join("sweep.json"), spec).unwrap();
    let out = vacpair(&["sweep-delay", "--spec", "sweep.json", "--method", "qve"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("T,f,status"));
    assert_eq!(text.lines().filter(|l| l.ends_with(",ok")).count(), 3);
}

#[test]
fn validate_reports_pass_and_fail() {
    let dir = TempDir::new().unwrap();
    let cfg = vacpair(
        &["make-config", "single-pulse", "--amplitude", "0.2", "--inverse-width", "0.3", "--out", "s.json"],
        dir.path(),
    );
    assert_eq!(code(&cfg), 0);
    let pass = vacpair(&["validate", "--config", "s.json", "--kpar-min", "-1.5", "--kpar-max", "-0.5", "--kpar-steps", "4"], dir.path());
    assert_eq!(code(&pass), 0, "{}", stdout(&pass));
    let report: serde_json::Value = serde_json::from_str(&stdout(&pass)).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["cases"][0]["points"].as_array().unwrap().len(), 5);

    let fail = vacpair(
        &["validate", "--config", "s.json", "--method", "born", "--tolerance", "1e-9", "--kpar-steps", "2", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(code(&fail), 2);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn recipe_writes_csv_and_svg() {
    let dir = TempDir::new().unwrap();
    let recipe = r#"{
        "name": "tiny", "task": "spectrum",
        "field": {"constructor": "single_pulse", "amplitude": 0.2, "inverse_width": 0.4},
        "gauge": 0.0,
        "grid": {"kpar_min": -0.5, "kpar_max": 0.5, "kpar_steps": 4},
        "methods": ["riccati", "qve"]
    }"#;
    std::fs::write(dir.path().join("tiny.json"), recipe).unwrap();
    let out = vacpair(&["recipe", "tiny.json", "--out-dir", "out"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/tiny.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(dir.path().join("out/tiny.svg").exists());
    let again = vacpair(&["recipe", "tiny.json", "--out-dir", "out2"], dir.path());
    assert_eq!(code(&again), 0);
    assert_eq!(csv, std::fs::read_to_string(dir.path().join("out2/tiny.csv")).unwrap());
}
