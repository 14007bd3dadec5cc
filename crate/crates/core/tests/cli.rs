use std::path::Path;
use std::process::{Command, Output};

fn entsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entsim")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Data rows of a CSV output, header and schema line dropped.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn col(text: &str, name: &str) -> Vec<f64> {
    let header: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    rows(text).iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn simulate_rising_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o =
        entsim(&["simulate", "--pulse", "rising", "--omega", "1.77", "--r12", "0.2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("peak eof"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("# schema: entsim.simulate/1"));
    assert_eq!(
        text.lines().nth(1),
        Some("t,m1,m2,xx,xy,zz,rho11,rho22,rho33,rho44,re_rho23,im_rho23,concurrence,eof,drive")
    );
    let eof = col(&text, "eof");
    let imax = (0..eof.len()).max_by(|&a, &b| eof[a].total_cmp(&eof[b])).unwrap();
    assert!(eof[imax] > 0.9);
    assert!(eof[..=imax].windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(eof[imax..].windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(*eof.last().unwrap() < 1e-4);
}

#[test]
fn simulate_is_deterministic() {
    let a = entsim(&["simulate", "--pulse", "gaussian", "--omega", "2.55"]);
    let b = entsim(&["simulate", "--pulse", "gaussian", "--omega", "2.55"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn zero_drive_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[focus]\ngamma10 = 0.0\ngamma20 = 0.0\n[output]\nsamples = 200\n");
    let o = entsim(&["simulate", "--config", &cfg]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(col(&text, "eof").iter().all(|&e| e == 0.0));
    assert!(col(&text, "drive").iter().all(|&e| e == 0.0));
}

#[test]
fn json_output() {
    let o = entsim(&["simulate", "--format", "json", "--omega", "2.0"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let head: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(head["schema"], "entsim.simulate/1");
    let first: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(first["m1"], -1.0);
    assert_eq!(lines.count(), 1999);
}

#[test]
fn sweep_cell_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", "[sweep]\nomegas = [1.77]\nr12s = [0.2]\n");
    let s = entsim(&["sweep", "--config", &cfg]);
    assert!(s.status.success());
    let sweep = String::from_utf8(s.stdout).unwrap();
    assert_eq!(sweep.lines().nth(1), Some("family,r12,omega,peak_eof,peak_time,status"));
    let peak = col(&sweep, "peak_eof")[0];
    let sim = entsim(&["simulate", "--omega", "1.77", "--r12", "0.2"]);
    let note = String::from_utf8(sim.stderr).unwrap();
    let printed: f64 = note.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert_eq!(peak, printed);
}

#[test]
fn sweep_flags_poisoned_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", "[sweep]\nomegas = [1.0, 2.0]\nr12s = [1e-5, 0.2]\nworkers = 2\n");
    let o = entsim(&["sweep", "--config", &cfg]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let status: Vec<String> = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap()[5].to_string())
        .collect();
    assert_eq!(status.len(), 4);
    assert!(status[0].starts_with("error:") && status[1].starts_with("error:"));
    assert_eq!(&status[2..], ["ok", "ok"]);
}

#[test]
fn couplings_limits_and_sign_changes() {
    let o = entsim(&["couplings"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let (r, g) = (col(&text, "r12"), col(&text, "gamma12"));
    assert!((g[0] - 1.0).abs() < 1e-6);
    let flips = r
        .windows(2)
        .zip(g.windows(2))
        .filter(|(rw, gw)| rw[0] >= 0.3 && rw[1] <= 1.5 && gw[0].signum() != gw[1].signum())
        .count();
    assert!(flips >= 1);

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "far.toml", "[scan]\nr12_min = 99.0\nr12_max = 100.0\npoints = 3\n");
    let o = entsim(&["couplings", "--config", &cfg]);
    let text = String::from_utf8(o.stdout).unwrap();
    let last = rows(&text).pop().unwrap();
    assert_eq!(last[0].parse::<f64>().unwrap(), 100.0);
    assert!(last[1].parse::<f64>().unwrap().abs() < 1e-2);
    assert!(last[2].parse::<f64>().unwrap().abs() < 1e-2);
}

#[test]
fn validate_builtin_passes() {
    let o = entsim(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(rows(&text).iter().all(|r| r[1] == "pass"));
}

#[test]
fn validate_perturbed_manifest_fails() {
    let dir = tempfile::tempdir().unwrap();
    let builtin: serde_json::Value = serde_json::from_str(include_str!("../golden/manifest.json")).unwrap();
    let mut m = builtin.clone();
    let v = m["entries"]["eof.c0.6"]["value"].as_f64().unwrap();
    m["entries"]["eof.c0.6"]["value"] = (v + 1e-3).into();
    let path = write(dir.path(), "m.json", &m.to_string());
    let o = entsim(&["validate", "--manifest", &path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout).unwrap().contains("eof.c0.6,FAIL"));
}

#[test]
fn validate_missing_manifest() {
    let o = entsim(&["validate", "--manifest", "/nonexistent/m.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("cannot read"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[pulse]\nomega = 1.0\nwidth = 2.0\n");
    let o = entsim(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("width") && err.contains("line 3"), "{err}");
    assert_eq!(entsim(&["simulate", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(entsim(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn tabulated_pulse_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let om: f64 = 2.0;
    let mut table = String::from("t,xi\n");
    let n = 8001;
    for i in 0..n {
        let t = -10.0 / om + 20.0 / om * i as f64 / (n - 1) as f64;
        let xi = (om * om / std::f64::consts::TAU).powf(0.25) * (-om * om * t * t / 4.0).exp();
        table.push_str(&format!("{t:.17e},{xi:.17e}\n"));
    }
    let path = write(dir.path(), "xi.csv", &table);
    let cfg =
        write(dir.path(), "t.toml", &format!("[pulse]\nfamily = \"tabulated\"\nomega = 2.0\ntable = \"{path}\"\n"));
    let o = entsim(&["simulate", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let tab = col(&String::from_utf8(o.stdout).unwrap(), "eof").into_iter().fold(0.0, f64::max);
    let g = entsim(&["simulate", "--pulse", "gaussian", "--omega", "2.0"]);
    let gau = col(&String::from_utf8(g.stdout).unwrap(), "eof").into_iter().fold(0.0, f64::max);
    assert!((tab - gau).abs() < 1e-4, "{tab} {gau}");
}
