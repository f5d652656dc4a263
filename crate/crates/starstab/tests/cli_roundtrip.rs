//! End-to-end checks of the command line driver: artifacts, manifest hashes,
//! determinism, and exit codes.

use starstab::cli;
use starstab::io;
use std::fs;
use std::path::Path;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["starstab"];
    argv.extend_from_slice(args);
    cli::run(argv)
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn star_closed_form_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
seed = 1

[eos]
kind = "polytrope"
k = 1.0
gamma = 2.0
allow_gamma_outside_range = true

[star]
mu = 1.0
profile_nodes = 256
"#,
    );
    let out = dir.path().join("out");
    let code = run(&["star", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let profile = io::read_profile(&out.join("profile")).unwrap();
    let k = (2.0 * std::f64::consts::PI).sqrt();
    let r_exact = std::f64::consts::PI / k;
    assert!((profile.radius / r_exact - 1.0).abs() <= 1e-9);
    for (i, &r) in profile.r.iter().enumerate() {
        let exact = if r == 0.0 { 1.0 } else { (k * r).sin() / (k * r) };
        assert!((profile.rho[i] - exact).abs() <= 1e-8);
    }
    // manifest lists every artifact with its hash
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o["path"].as_str().unwrap().ends_with("profile.csv")));
    for o in outputs {
        assert_eq!(o["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn classify_family_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[eos]
kind = "polytrope"
k = 1.0
gamma = 1.5

[star]
profile_nodes = 192

[family]
mu_lo = 0.3
mu_hi = 3.0
samples = 9
refine = false
"#,
    );
    let out = dir.path().join("out");
    let code = run(&["classify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let curve = io::read_curve(&out.join("family.csv")).unwrap();
    assert_eq!(curve.samples.len(), 9);
    assert!(curve.samples.iter().all(|s| s.n_unstable == Some(0)));
}

#[test]
fn determinism_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
seed = 11

[eos]
kind = "white_dwarf"
a = 1.0
b = 1.0

[star]
mu = 0.7
profile_nodes = 128
"#,
    );
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    assert_eq!(run(&["star", "--config", &cfg, "--out", out1.to_str().unwrap()]), 0);
    assert_eq!(run(&["star", "--config", &cfg, "--out", out2.to_str().unwrap()]), 0);
    for name in ["profile.csv", "profile.json", "resolved_config.toml"] {
        let a = fs::read(out1.join(name)).unwrap();
        let b = fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} must be byte-identical");
    }
    // re-running from the emitted resolved config reproduces the bytes too
    let out3 = dir.path().join("c");
    assert_eq!(
        run(&[
            "star",
            "--config",
            out1.join("resolved_config.toml").to_str().unwrap(),
            "--out",
            out3.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(
        fs::read(out1.join("profile.csv")).unwrap(),
        fs::read(out3.join("profile.csv")).unwrap()
    );
}

#[test]
fn distance_subcommand_reads_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    // first produce a profile
    let cfg = write_config(
        dir.path(),
        r#"
[eos]
kind = "polytrope"
k = 1.0
gamma = 1.5

[star]
mu = 1.0
profile_nodes = 512
"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&["star", "--config", &cfg, "--out", out.to_str().unwrap()]), 0);
    // craft a state: the star itself with a velocity kick
    let profile = io::read_profile(&out.join("profile")).unwrap();
    let n = 512;
    let r_dom = 1.4 * profile.radius;
    let r: Vec<f64> = (0..n).map(|i| r_dom * i as f64 / (n - 1) as f64).collect();
    let rho: Vec<f64> = profile.r.iter().map(|_| 0.0).take(0).collect::<Vec<f64>>();
    let _ = rho;
    let rho: Vec<f64> = r
        .iter()
        .map(|&x| {
            if x >= profile.radius {
                0.0
            } else {
                // piecewise-linear resample of the stored profile
                let idx = ((x / profile.radius) * (profile.r.len() - 1) as f64).floor() as usize;
                let idx = idx.min(profile.r.len() - 2);
                let t = (x - profile.r[idx]) / (profile.r[idx + 1] - profile.r[idx]);
                profile.rho[idx] * (1.0 - t) + profile.rho[idx + 1] * t
            }
        })
        .collect();
    let v: Vec<f64> = r
        .iter()
        .zip(rho.iter())
        .map(|(&x, &d)| if d > 0.0 { 1e-3 * x } else { 0.0 })
        .collect();
    let state_path = dir.path().join("state.csv");
    io::write_state(&state_path, &r, &rho, &v).unwrap();
    let cfg2 = fs::read_to_string(dir.path().join("run.toml")).unwrap()
        + &format!(
            "\n[distance]\nprofile = \"{}\"\nstate = \"{}\"\n",
            out.join("profile").display(),
            state_path.display()
        );
    let cfg2_path = dir.path().join("run2.toml");
    fs::write(&cfg2_path, cfg2).unwrap();
    let out2 = dir.path().join("out2");
    assert_eq!(
        run(&["distance", "--config", cfg2_path.to_str().unwrap(), "--out", out2.to_str().unwrap()]),
        0
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out2.join("distance.json")).unwrap()).unwrap();
    assert!(report["d1"].as_f64().unwrap() > 0.0);
    assert!(report["decomposition_residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // config error: malformed toml
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "not really = [toml").unwrap();
    assert_eq!(run(&["star", "--config", bad.to_str().unwrap()]), 2);
    // config error: missing section
    let cfg = write_config(dir.path(), "[eos]\nkind = \"polytrope\"\nk = 1.0\ngamma = 1.5\n");
    let out = dir.path().join("out");
    assert_eq!(run(&["distance", "--config", &cfg, "--out", out.to_str().unwrap()]), 2);
    // numerical failure: gamma = 1.1 star has no vacuum boundary
    let cfg_num = write_config(
        dir.path(),
        r#"
[eos]
kind = "polytrope"
k = 1.0
gamma = 1.1
allow_gamma_outside_range = true

[star]
mu = 1.0
r_max_factor = 50.0
"#,
    );
    assert_eq!(run(&["star", "--config", &cfg_num, "--out", out.to_str().unwrap()]), 4);
    // unknown exponent rejected as config-stage validation (exit 4: invalid law)
    let cfg_gamma = write_config(
        dir.path(),
        r#"
[eos]
kind = "polytrope"
k = 1.0
gamma = 1.2
"#,
    );
    let code = run(&["eos", "--config", &cfg_gamma, "--out", out.to_str().unwrap()]);
    assert_ne!(code, 0);
}

#[test]
fn eos_report_white_dwarf() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[eos]
kind = "white_dwarf"
a = 1.0
b = 1.0
"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&["eos", "--config", &cfg, "--out", out.to_str().unwrap()]), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("eos_report.json")).unwrap()).unwrap();
    assert!((report["gamma0"].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-14);
    assert!((report["gamma1"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-14);
    assert!(report["fenchel_max_violation"].as_f64().unwrap() <= 1e-9);
}
