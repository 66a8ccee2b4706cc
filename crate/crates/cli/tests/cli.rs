//! End-to-end runs of the `quadsim` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

const TWO_LEVEL: &str = "scenario = two_level\nomega_m_hz = 150e3\ndelta_m_hz = 10e6\n";

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn quadsim(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadsim"))
        .args(&args[..1])
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(&args[1..])
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report_value(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no '{key}' in {text}"));
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn pi_pulse_simulation_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "pi.conf", &format!("{TWO_LEVEL}protocol = pi\nT_tau_pi = 1\n"));
    let out = dir.path().join("out");
    let o = quadsim(&["simulate"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(report_value(&text, "error").abs() < 1e-8, "{text}");
    assert!((report_value(&text, "fidelity") - 1.0).abs() < 1e-8);
    assert!((report_value(&text, "norm_sq") - 1.0).abs() < 1e-9);

    let (header, rows) = csv(&out.join("metrics.csv"));
    assert_eq!(header, ["protocol", "scenario", "T_s", "fidelity", "error", "final_norm_sq", "pop1", "pop2", "method", "steps"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "pi");
    assert!(!out.join("trajectory.csv").exists());

    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["omega_m_hz"].as_f64(), Some(150e3));
    assert_eq!(meta["config"]["delta_m_hz"].as_f64(), Some(10e6));
    assert_eq!(meta["config"]["steps"].as_u64(), Some(100_000));
    let t: f64 = rows[0][2].parse().unwrap();
    assert_eq!(meta["config"]["durations"][0]["T_s"].as_f64(), Some(t));
}

#[test]
fn trajectory_file_tracks_the_state() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "s.conf", &format!("{TWO_LEVEL}protocol = siquad\nT_tau_pi = 5.83\nsteps = 20000\ntrajectory_stride = 100\n"));
    let out = dir.path().join("out");
    let o = quadsim(&["simulate", "--trajectory"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv(&out.join("trajectory.csv"));
    assert_eq!(header, ["t_s", "re_c1", "im_c1", "re_c2", "im_c2", "norm_sq", "pop1", "pop2"]);
    assert_eq!(rows.len(), 201);
    for r in &rows {
        let norm: f64 = r[5].parse().unwrap();
        assert!((norm - 1.0).abs() < 1e-9);
    }
    let last_pop2: f64 = rows.last().unwrap()[7].parse().unwrap();
    assert!((1.0 - last_pop2) < 1e-3);
}

#[test]
fn missing_delta_m_names_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.conf", "scenario = two_level\nomega_m_hz = 150e3\nprotocol = siquad\nT_tau_pi = 5.83\n");
    let o = quadsim(&["simulate"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("delta_m_hz"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_bad_worker_count_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.conf", &format!("{TWO_LEVEL}protocol = pi\nT_tau_pi = 1\nomega_mhz = 3\n"));
    let o = quadsim(&["simulate"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("omega_mhz"));

    let good = write_config(&dir, "good.conf", &format!("{TWO_LEVEL}protocol = pi\nT_tau_pi = 1\n"));
    let o = Command::new(env!("CARGO_BIN_EXE_quadsim"))
        .args(["simulate", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("QUAD_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("QUAD_WORKERS"));
}

#[test]
fn diverging_integration_exits_with_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "rk4.conf", &format!("{TWO_LEVEL}protocol = siquad\nT_tau_pi = 5.83\nmethod = rk4\nsteps = 10\n"));
    let o = quadsim(&["simulate"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("integration failed"));
}

#[test]
fn lossy_three_level_siquad_misses_the_threshold() {
    let dir = TempDir::new().unwrap();
    let text = "scenario = three_level\nprotocol = siquad\nomega0_hz = 5e6\ndelta_big_hz = 10e9\ndelta_m_hz = 10e6\ngamma_hz = 5.6e6\nT_s = 2.85e-3\nsteps = 100000\n";
    let cfg = write_config(&dir, "l.conf", text);
    let out = dir.path().join("out");
    let o = quadsim(&["simulate"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let f = report_value(&stdout(&o), "fidelity");
    assert!(f < 0.999, "F = {f}");
    let (header, _) = csv(&out.join("metrics.csv"));
    assert!(header.contains(&"pop3".to_string()));
}

fn duration_scan_config(dir: &TempDir) -> PathBuf {
    let text = format!(
        "{TWO_LEVEL}protocols = siquad, faquad, pi\nsteps = 2000\n\n[sweep]\naxis = duration\nduration_lo_tau_pi = 0\nduration_hi_tau_pi = 10\nduration_points = 200\n"
    );
    write_config(dir, "scan.conf", &text)
}

#[test]
fn duration_scan_rows_and_plot() {
    let dir = TempDir::new().unwrap();
    let cfg = duration_scan_config(&dir);
    let out = dir.path().join("out");
    let o = quadsim(&["sweep", "--plot"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));

    let (header, rows) = csv(&out.join("sweep.csv"));
    assert_eq!(
        header,
        ["protocol", "scenario", "axis", "axis_value", "T_s", "fidelity", "error", "final_norm_sq", "method", "steps"]
    );
    assert_eq!(rows.len(), 600);
    for r in &rows {
        assert_eq!(r.len(), header.len());
        let digits = r[6].split('e').next().unwrap().replace(['-', '.'], "");
        assert!(digits.len() >= 12, "{}", r[6]);
    }

    let svg = std::fs::read_to_string(out.join("sweep.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
    let series: Vec<&str> =
        doc.descendants().filter(|n| n.has_tag_name("polyline")).filter_map(|n| n.attribute("data-series")).collect();
    assert_eq!(series, ["siquad", "faquad", "pi"]);
    assert!(doc.descendants().any(|n| n.attribute("class") == Some("x-label")));
    assert!(doc.descendants().any(|n| n.attribute("class") == Some("y-label")));
}

fn sha(path: &Path) -> String {
    format!("{:x}", Sha256::digest(std::fs::read(path).unwrap()))
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = duration_scan_config(&dir);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(quadsim(&["sweep", "--plot"], &cfg, &a).status.success());
    assert!(quadsim(&["sweep", "--plot"], &cfg, &b).status.success());
    for name in ["sweep.csv", "sweep.svg", "metadata.json"] {
        assert_eq!(sha(&a.join(name)), sha(&b.join(name)), "{name}");
    }
}

#[test]
fn single_protocol_compare_reports_its_worst_case() {
    let dir = TempDir::new().unwrap();
    let text = format!("{TWO_LEVEL}protocol = siquad\nT_tau_pi = 5.83\nsteps = 5000\n\n[sweep]\namplitude_points = 11\ndetuning_points = 11\n");
    let cfg = write_config(&dir, "one.conf", &text);
    let out = dir.path().join("out");
    let o = quadsim(&["compare"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));

    let (_, summary) = csv(&out.join("compare_summary.csv"));
    let (_, rows) = csv(&out.join("compare_rows.csv"));
    let (_, dominance) = csv(&out.join("dominance.csv"));
    assert_eq!(summary.len(), 2);
    assert!(dominance.is_empty());
    for s in &summary {
        let worst = rows.iter().filter(|r| r[2] == s[0]).map(|r| r[6].parse::<f64>().unwrap()).fold(f64::MIN, f64::max);
        assert_eq!(s[3].parse::<f64>().unwrap(), worst);
        assert_eq!(s[6], "");
    }
    assert!(stdout(&o).contains("axis amplitude_scale"));
}

#[test]
fn default_compare_ranks_siquad_by_worst_case() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "{TWO_LEVEL}protocols = siquad, faquad, pi\nT_siquad_tau_pi = 5.83\nT_faquad_tau_pi = 6.33\nT_pi_tau_pi = 1\nsteps = 20000\n\n[sweep]\namplitude_lo = 0.9\namplitude_hi = 1.1\n"
    );
    let cfg = write_config(&dir, "cmp.conf", &text);
    let out = dir.path().join("out");
    let o = quadsim(&["compare", "--plot"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, summary) = csv(&out.join("compare_summary.csv"));
    for axis in ["amplitude_scale", "detuning_offset"] {
        let worst = |p: &str| summary.iter().find(|r| r[0] == axis && r[1] == p).unwrap()[3].parse::<f64>().unwrap();
        assert!(worst("siquad") < worst("faquad") && worst("faquad") < worst("pi"), "{axis}");
        let siquad = summary.iter().find(|r| r[0] == axis && r[1] == "siquad").unwrap();
        assert!(siquad[6].split(';').any(|p| p == "pi"), "{axis}: {siquad:?}");
    }
    for name in ["compare_amplitude_scale.svg", "compare_detuning_offset.svg"] {
        let svg = std::fs::read_to_string(out.join(name)).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 3);
    }
}

#[test]
fn conflicting_durations_exit_with_1() {
    let dir = TempDir::new().unwrap();
    let text = format!("{TWO_LEVEL}protocols = siquad, pi\nT_siquad_s = 2e-5\nT_siquad_tau_pi = 5.83\nT_pi_tau_pi = 1\n");
    let cfg = write_config(&dir, "c.conf", &text);
    let o = quadsim(&["compare"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("T_siquad_s"));
}

#[test]
fn bundled_presets_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .inspect(|p| {
            quadsim::config::RunConfig::from_path(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        })
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["fig2a_time_scan", "fig2b_amplitude", "fig2c_detuning", "fig3_gamma_off_long", "fig3_gamma_off_short", "fig3_gamma_on_short"]
    );
}
