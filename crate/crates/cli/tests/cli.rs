use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gsd(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsd"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("GSD_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = gsd(args, out);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_for_three_fields() {
    let dir = TempDir::new().unwrap();
    ok(&["spectrum", "--h-over-hc", "0,0.75,1.25"], dir.path());
    for (tag, ground) in [("h0.0000", -0.119), ("h0.7500", -0.119), ("h1.2500", -0.159)] {
        let csv = fs::read_to_string(dir.path().join(format!("spectrum_{tag}.csv"))).unwrap();
        assert_eq!(csv.lines().next(), Some("energy_2piJ,re_g,im_g,abs_g"));
        assert_eq!(csv.lines().count(), 129);
        let peaks = json(&dir.path().join(format!("peaks_{tag}.json")));
        let spacing = peaks["spacing_2piJ"].as_f64().unwrap();
        let first = &peaks["peaks"][0];
        assert!((first["energy_2piJ"].as_f64().unwrap() - ground).abs() <= spacing, "{tag}: {first}");
        let e = first["energy_J"].as_f64().unwrap() / (2.0 * std::f64::consts::PI);
        assert!((e - first["energy_2piJ"].as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn eigenstate_gives_one_peak() {
    let dir = TempDir::new().unwrap();
    ok(&["spectrum", "--h", "0", "--eigenstate", "T-1"], dir.path());
    let peaks = json(&dir.path().join("peaks_h0.0000.json"));
    assert_eq!(peaks["peaks"].as_array().unwrap().len(), 1);
}

#[test]
fn nyquist_violation_is_reported() {
    let dir = TempDir::new().unwrap();
    let o = gsd(&["spectrum", "--h", "0", "--dt", "5"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Nyquist"));
}

#[test]
fn ipea_reports_digits_and_history() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(&["ipea", "--h", "0"], dir.path());
    assert!(stdout.contains("-0.11936"), "{stdout}");
    let table = json(&dir.path().join("ipea_h0.0000.json"));
    let ground = &table["eigenvalues"][0];
    assert_eq!(ground["digits"], "-0.11936");
    assert!(ground["relative_error"].as_f64().unwrap() < 3e-5);
    assert_eq!(ground["iterations"].as_array().unwrap().len(), 5);
    let lines = fs::read_to_string(dir.path().join("ipea_h0.0000.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 10);
    for line in lines.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert!(v["digit"].as_u64().unwrap() <= 9);
    }

    let coarse = TempDir::new().unwrap();
    ok(&["ipea", "--h", "0", "--iterations", "1"], coarse.path());
    let table = json(&coarse.path().join("ipea_h0.0000.json"));
    let ground = &table["eigenvalues"][0];
    assert_eq!(ground["digits"], "-0.1");
    assert_eq!(ground["iterations"][0]["uncertainty_2piJ"], 0.1);
    let v = ground["value_2piJ"].as_f64().unwrap();
    assert!((-0.2..=-0.1).contains(&v));
}

#[test]
fn distill_noiseless_and_noisy() {
    let dir = TempDir::new().unwrap();
    ok(&["distill", "--h-over-hc", "0.75,1.25"], dir.path());
    // energies come from five-digit estimates, so the tagging time is slightly off
    let below = json(&dir.path().join("report_h0.7500.json"));
    assert!((below["report"]["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((below["report"]["weights"]["S"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let above = json(&dir.path().join("report_h1.2500.json"));
    assert!((above["report"]["weights"]["T-1"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let full = json(&dir.path().join("final_state_h0.7500.json"));
    assert_eq!(full["real"].as_array().unwrap().len(), 8);
    let projected = json(&dir.path().join("projected_h0.7500.json"));
    assert_eq!(projected["imag"].as_array().unwrap().len(), 4);
    let csv = fs::read_to_string(dir.path().join("weights_h0.7500.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("label,weight"));

    // T2 ten times the 19.62 ms controlled evolution
    let noisy = TempDir::new().unwrap();
    ok(&["distill", "--h", "0", "--noise-t2-ms", "196.2", "--delta-j-rel", "1e-4", "--seed", "3"], noisy.path());
    let report = json(&noisy.path().join("report_h0.0000.json"));
    let f = report["report"]["fidelity"].as_f64().unwrap();
    assert!((0.75..=0.95).contains(&f), "fidelity {f}");
    assert!(report["report"]["weights"]["T0"].as_f64().unwrap() > 0.0);
    assert!((report["controlled_evolution_s"].as_f64().unwrap() - 0.01962).abs() < 1e-4);
}

#[test]
fn compile_verifies_and_round_trips() {
    let dir = TempDir::new().unwrap();
    ok(&["compile", "--h", "0"], dir.path());
    let report = json(&dir.path().join("compile_report.json"));
    assert_eq!(report["passed"], true);
    assert!(report["state_prep"]["fidelity"].as_f64().unwrap() >= 0.999);
    for block in report["blocks"].as_array().unwrap() {
        assert_eq!(block["round_trip"], true);
        if let Some(dev) = block["max_deviation"].as_f64() {
            assert!(dev < 1e-8);
        }
    }
    let text = fs::read_to_string(dir.path().join("controlled_u_h0.0000.pulse")).unwrap();
    assert!(text.starts_with("COUPLINGS ab=160.7 bc=-194.4 ac=47.6\n"));
    let back: gsd_core::Program = gsd_core::pulsec::parse_program(&text).unwrap();
    assert_eq!(back.to_text().unwrap(), text);
}

#[test]
fn config_file_env_and_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"J": 2.0, "fields": [{"h": 0.5}], "grid": {"points": 64, "dt": 0.5}}"#).unwrap();
    let out = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_gsd"))
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .args(["--points", "32"])
        .env("GSD_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let peaks = json(&out.join("peaks_h0.5000.json"));
    assert_eq!(peaks["J"], 2.0);
    assert_eq!(peaks["points"], 32);
    assert_eq!(peaks["dt_J"], 0.5);

    fs::write(&cfg, r#"{"J": -1.0}"#).unwrap();
    let o = gsd(&["spectrum", "--config", cfg.to_str().unwrap()], &out);
    assert!(!o.status.success());
}

#[test]
fn reruns_are_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["report", "--h", "0.3", "--noise-t2-ms", "500", "--delta-j-rel", "1e-4", "--seed", "9"];
    ok(&args, a.path());
    ok(&args, b.path());
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 10);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
}
