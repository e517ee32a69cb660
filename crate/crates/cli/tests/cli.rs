use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strip-vortex"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn records(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn of_type<'a>(recs: &'a [Value], kind: &str) -> Vec<&'a Value> {
    recs.iter().filter(|r| r["type"] == kind).collect()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, format!("schema_version = 1\n{body}")).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn malformed_config_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[domain]\nnx = \"many\"\n");
    assert_eq!(run(dir.path(), &["coefficients", "--config", &cfg]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "[domain]\nunknown_key = 1\n");
    assert_eq!(run(dir.path(), &["coefficients", "--config", &cfg]).status.code(), Some(2));
    std::fs::write(dir.path().join("v2.toml"), "schema_version = 2\n").unwrap();
    assert_eq!(run(dir.path(), &["coefficients", "--config", "v2.toml"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["coefficients", "--nx", "4"]).status.code(), Some(2));
}

#[test]
fn coefficient_report_contents() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["coefficients"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let recs = records(&dir.path().join("out/coefficients.ndjson"));
    let header = &recs[0];
    assert_eq!(header["type"], "header");
    assert_eq!(header["format_version"], 1);
    assert_eq!(header["config"]["domain"]["nx"], 801);
    let c = of_type(&recs, "coefficients")[0];
    assert!((c["int_chi0_sq"].as_f64().unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() <= 1e-6);
    let r = of_type(&recs, "richardson");
    assert_eq!(r.len(), 1);
    assert_eq!(r[0]["coarse_nx"], 801);
    assert_eq!(r[0]["fine_nx"], 1601);
    assert_eq!(of_type(&recs, "convergence").len(), 2);
    assert!(of_type(&recs, "check").iter().any(|c| c["primary"] == true));
}

#[test]
fn spectrum_scan_and_empty_range() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[spectrum]\nd_min = 5.0\nd_max = 4.0\n");
    assert_eq!(run(dir.path(), &["spectrum", "--config", &cfg, "--nx", "201"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["spectrum", "--nx", "401"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = records(&dir.path().join("out/spectrum.ndjson"));
    let crossings = of_type(&recs, "zero_crossing");
    assert_eq!(crossings.len(), 1);
    let d1 = std::f64::consts::SQRT_2 * std::f64::consts::PI;
    assert!((crossings[0]["interpolated"].as_f64().unwrap() - d1).abs() <= 0.01);
    let jumps = of_type(&recs, "morse_jump");
    assert_eq!(jumps.len(), 1);
    assert_eq!((jumps[0]["from"].as_u64(), jumps[0]["to"].as_u64()), (Some(1), Some(2)));
    let csv = std::fs::read_to_string(dir.path().join("out/spectrum.csv")).unwrap();
    assert!(csv.starts_with("# format_version: 1\n"));
    let svg = std::fs::read_to_string(dir.path().join("out/spectrum.svg")).unwrap();
    assert!(svg.contains("<metadata>") && svg.contains("\"nx\":401"));
}

#[test]
fn branch_records_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["branch", "--nx", "201"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read(dir.path().join("out/branch.ndjson")).unwrap();
    let first_csv = std::fs::read(dir.path().join("out/branch.csv")).unwrap();
    assert_eq!(run(dir.path(), &["branch", "--nx", "201"]).status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("out/branch.ndjson")).unwrap(), first);
    assert_eq!(std::fs::read(dir.path().join("out/branch.csv")).unwrap(), first_csv);

    let recs = records(&dir.path().join("out/branch.ndjson"));
    let points = of_type(&recs, "point");
    assert_eq!(points.len(), 20);
    assert!(points.iter().all(|p| p["vortex_count"] == 1 && p["energy_deficit"].as_f64().unwrap() > 0.0));
    let s = of_type(&recs, "summary")[0];
    assert!(s["amplitude_sq_slope"].as_f64().unwrap() > 0.0);
    assert!(s["lost_at"].is_null());
    for f in ["amplitude.svg", "energy_deficit.svg", "vortex_map.svg"] {
        assert!(std::fs::read_to_string(dir.path().join("out").join(f)).unwrap().contains("<metadata>"));
    }
}

#[test]
fn lyapunov_marks_diverged_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[lyapunov]\nwidth_offsets = [0.1]\nlambdas = [-3.0, -0.1, 0.0, 0.1, 3.0]\nprobe_levels = 2\n",
    );
    let o = run(dir.path(), &["lyapunov", "--config", &cfg, "--nx", "201"]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = records(&dir.path().join("out/lyapunov.ndjson"));
    let cells = of_type(&recs, "cell");
    assert_eq!(cells.len(), 5);
    for c in &cells {
        let big = c["lambda"].as_f64().unwrap().abs() > 1.0;
        assert_eq!(c["status"], if big { "diverged" } else { "ok" });
        assert_eq!(c["j"].is_null(), big);
    }
    let checks = of_type(&recs, "check");
    let find = |name: &str| checks.iter().find(|c| c["check"]["name"] == name).unwrap()["check"]["pass"].clone();
    assert_eq!(find("d_dl J(d_k, 0)"), true);
    assert_eq!(find("max |J(d, l) + J(d, -l)|"), true);
    assert!(of_type(&recs, "derivatives").len() == 1);
}

#[test]
fn verify_on_a_coarse_grid_skips_calibrated_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--nx", "201", "--criteria", "4,5"]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("criterion  5 SKIP"), "{stdout}");
    let recs = records(&dir.path().join("out/verify.ndjson"));
    let crit = of_type(&recs, "criterion");
    assert_eq!(crit.len(), 2);
    assert_eq!(crit[0]["status"], "pass");
    assert_eq!(crit[1]["status"], "skip");
    assert!(crit[1]["report"]["skipped"].as_str().unwrap().contains("801"));
    let s = of_type(&recs, "summary")[0];
    assert_eq!((s["passed"].as_u64(), s["skipped"].as_u64(), s["failed"].as_u64()), (Some(1), Some(1), Some(0)));
    assert_eq!(run(dir.path(), &["verify", "--criteria", "13"]).status.code(), Some(2));
}
