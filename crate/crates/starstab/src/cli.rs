//! Command line driver. One thin binary dispatches to these handlers; each
//! run is driven by a single TOML config and leaves its artifacts plus a
//! manifest (content hashes, wall time) in the output directory.
//!
//! Exit codes: 0 ok, 2 config error, 3 invariant violation, 4 numerical
//! failure.

use crate::config::RunConfig;
use crate::eos::{build_enthalpy, Enthalpy, PressureLaw};
use crate::error::{Error, Result};
use crate::family;
use crate::functionals;
use crate::hydro;
use crate::io;
use crate::spectral;
use crate::star::{solve_star, StarProfile};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "starstab", version, about = "Steady gaseous stars, their stability, and radial Euler-Poisson dynamics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a pressure law, validate its assumptions, report the enthalpy.
    Eos(RunArgs),
    /// Solve one steady star and write its profile.
    Star(RunArgs),
    /// Sweep the mass-radius family.
    Family(RunArgs),
    /// Sweep (or load) a family and fill the unstable-mode counts.
    Classify(RunArgs),
    /// Assemble a stability operator and report its inertia.
    Spectrum(RunArgs),
    /// Distance breakdown of a stored state against a stored profile.
    Distance(RunArgs),
    /// Evolve a perturbed star and record d(t) diagnostics.
    Evolve(RunArgs),
    /// Batch of evolutions over perturbation amplitudes.
    Experiment(RunArgs),
    /// Cross-module consistency suite; nonzero exit on any violation.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides config `out_dir` and $STARSTAB_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parse argv, execute, and return the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, args) = match &cli.cmd {
        Cmd::Eos(a) => ("eos", a),
        Cmd::Star(a) => ("star", a),
        Cmd::Family(a) => ("family", a),
        Cmd::Classify(a) => ("classify", a),
        Cmd::Spectrum(a) => ("spectrum", a),
        Cmd::Distance(a) => ("distance", a),
        Cmd::Evolve(a) => ("evolve", a),
        Cmd::Experiment(a) => ("experiment", a),
        Cmd::Verify(a) => ("verify", a),
    };
    match execute(name, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("starstab {name}: {e}");
            e.exit_code()
        }
    }
}

fn execute(name: &str, args: &RunArgs) -> Result<i32> {
    let start = Instant::now();
    let text = std::fs::read_to_string(&args.config)?;
    let config = RunConfig::parse(&text)?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("STARSTAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    let mut manifest = io::Manifest::new(name, &text, config.seed);
    // the resolved config is itself an artifact: re-running from it must
    // reproduce the outputs
    let resolved = out_dir.join("resolved_config.toml");
    std::fs::write(&resolved, config.to_toml())?;
    manifest.record(&resolved)?;

    let mut code = 0;
    let artifacts = match name {
        "eos" => cmd_eos(&config, &out_dir)?,
        "star" => cmd_star(&config, &out_dir)?,
        "family" => cmd_family(&config, &out_dir, false)?,
        "classify" => cmd_family(&config, &out_dir, true)?,
        "spectrum" => cmd_spectrum(&config, &out_dir)?,
        "distance" => cmd_distance(&config, &out_dir)?,
        "evolve" => cmd_evolve(&config, &out_dir)?,
        "experiment" => cmd_experiment(&config, &out_dir)?,
        "verify" => {
            let (paths, ok) = cmd_verify(&config, &out_dir)?;
            if !ok {
                code = 3;
            }
            paths
        }
        other => return Err(Error::Config(format!("unknown subcommand {other}"))),
    };
    for p in &artifacts {
        manifest.record(p)?;
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(code)
}

fn build_eos(config: &RunConfig) -> Result<(PressureLaw, Enthalpy)> {
    let spec = config.eos_required()?;
    let law = PressureLaw::from_spec(spec)?;
    if !spec.allow_gamma_outside_range {
        law.validate()?;
    }
    let enthalpy = build_enthalpy(&law, &config.enthalpy)?;
    Ok((law, enthalpy))
}

fn solve_from_config(config: &RunConfig, enthalpy: &Enthalpy) -> Result<StarProfile> {
    let section = config.star.clone().unwrap_or_default();
    solve_star(enthalpy, section.mu, &section.solve_options())
}

fn load_or_solve_profile(
    config: &RunConfig,
    enthalpy: &Enthalpy,
    stem: &Option<String>,
) -> Result<StarProfile> {
    match stem {
        Some(s) => io::read_profile(Path::new(s)),
        None => solve_from_config(config, enthalpy),
    }
}

#[derive(Serialize)]
struct EosReport {
    label: String,
    gamma0: f64,
    gamma1: f64,
    k0: f64,
    k1: f64,
    theta0: f64,
    provenance: crate::eos::Provenance,
    fenchel_samples: usize,
    fenchel_max_violation: f64,
}

fn cmd_eos(config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (law, enthalpy) = build_eos(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut worst = f64::NEG_INFINITY;
    let samples = 2000;
    for rho_b in [0.1, 1.0, 10.0] {
        worst = worst.max(enthalpy.fenchel_check(rho_b, samples, &mut rng));
    }
    let report = EosReport {
        label: law.label().to_string(),
        gamma0: law.gamma0(),
        gamma1: law.gamma1(),
        k0: law.k0(),
        k1: law.k1(),
        theta0: law.theta0,
        provenance: enthalpy.provenance(),
        fenchel_samples: 3 * samples,
        fenchel_max_violation: worst,
    };
    let path = out.join("eos_report.json");
    io::write_json(&path, &report)?;
    Ok(vec![path])
}

fn cmd_star(config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (_, enthalpy) = build_eos(config)?;
    let profile = solve_from_config(config, &enthalpy)?;
    io::write_profile(&out.join("profile"), &profile)
}

fn cmd_family(config: &RunConfig, out: &Path, classify: bool) -> Result<Vec<PathBuf>> {
    let (law, enthalpy) = build_eos(config)?;
    let section = config
        .family
        .clone()
        .ok_or_else(|| Error::Config("missing [family] section".into()))?;
    let mut curve = match &section.input_curve {
        Some(path) => io::read_curve(Path::new(path))?,
        None => {
            let solve = config.star.clone().unwrap_or_default().solve_options();
            family::sweep(&enthalpy, section.mu_lo, section.mu_hi, section.samples, &solve, section.refine)?
        }
    };
    if classify {
        family::classify(&mut curve, law.gamma0())?;
    }
    let csv = out.join("family.csv");
    io::write_curve(&csv, &curve)?;
    let events = out.join("family_events.json");
    io::write_curve_events(&events, &curve.events, &curve.flags)?;
    Ok(vec![csv, events])
}

fn cmd_spectrum(config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (_, enthalpy) = build_eos(config)?;
    let section = config.spectral.clone().unwrap_or_default();
    let profile = load_or_solve_profile(config, &enthalpy, &section.profile)?;
    let kind = section.operator_kind()?;
    let opts = spectral::ReportOptions {
        cells: section.cells,
        r_out_factor: section.r_out_factor,
        zero_tol_factor: section.zero_tol_factor,
    };
    let report = spectral::spectral_report(&profile, &enthalpy, kind, &opts)?;
    let path = out.join("spectrum.json");
    io::write_json(&path, &report)?;
    Ok(vec![path])
}

fn cmd_distance(config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (_, enthalpy) = build_eos(config)?;
    let section = config
        .distance
        .as_ref()
        .ok_or_else(|| Error::Config("missing [distance] section".into()))?;
    let profile = Arc::new(io::read_profile(Path::new(&section.profile))?);
    let (r, rho, v) = io::read_state(Path::new(&section.state))?;
    let state = functionals::PerturbedState::new(profile, r, rho, v)?;
    let breakdown = functionals::distance(&state, &enthalpy)?;
    let residual = functionals::decomposition_check(&state, &enthalpy)?;
    #[derive(Serialize)]
    struct DistanceReport {
        #[serde(flatten)]
        breakdown: functionals::DistanceBreakdown,
        decomposition_residual: f64,
    }
    let path = out.join("distance.json");
    io::write_json(&path, &DistanceReport { breakdown, decomposition_residual: residual })?;
    Ok(vec![path])
}

fn cmd_evolve(config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (_, enthalpy) = build_eos(config)?;
    let hydro_cfg = config
        .hydro
        .clone()
        .ok_or_else(|| Error::Config("missing [hydro] section".into()))?;
    let profile = Arc::new(solve_from_config(config, &enthalpy)?);
    let initial = hydro::make_initial(&profile, &enthalpy, &hydro_cfg)?;
    let traj = hydro::evolve(&initial, &hydro_cfg, &profile, &enthalpy)?;
    let csv = out.join("trajectory.csv");
    io::write_trajectory(&csv, &traj)?;
    #[derive(Serialize)]
    struct EvolveSummary {
        t_unit: f64,
        outputs: usize,
        sup_d: f64,
        d0: f64,
        mass_drift: f64,
        failure: Option<String>,
    }
    let summary = EvolveSummary {
        t_unit: traj.t_unit,
        outputs: traj.times.len(),
        sup_d: traj.sup_distance(),
        d0: traj.dist.first().map(|d| d.total).unwrap_or(f64::NAN),
        mass_drift: (traj.mass.last().unwrap_or(&0.0) - traj.mass.first().unwrap_or(&0.0)).abs(),
        failure: traj.failure.clone(),
    };
    let json = out.join("evolve_summary.json");
    io::write_json(&json, &summary)?;
    if traj.failure.is_some() {
        return Err(Error::NonFiniteState { t: *traj.times.last().unwrap_or(&0.0), cell: 0 });
    }
    Ok(vec![csv, json])
}

fn cmd_experiment(config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (_, enthalpy) = build_eos(config)?;
    let hydro_cfg = config
        .hydro
        .clone()
        .ok_or_else(|| Error::Config("missing [hydro] section".into()))?;
    let section = config
        .experiment
        .as_ref()
        .ok_or_else(|| Error::Config("missing [experiment] section".into()))?;
    let profile = Arc::new(solve_from_config(config, &enthalpy)?);
    let report = hydro::stability_experiment(&profile, &enthalpy, &hydro_cfg, &section.amplitudes)?;
    let path = out.join("experiment.json");
    io::write_json(&path, &report)?;
    Ok(vec![path])
}

/// One check of the verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Cross-module consistency suite: the decomposition identity on seeded
/// random states, inertia against the turning point classifier, the dual
/// inertia equality, and the translation kernel. Returns the checks and
/// whether all passed.
pub fn verify_suite(seed: u64) -> Result<Vec<VerifyCheck>> {
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(VerifyCheck { name: name.into(), passed, detail });
    };
    let spec_opts = spectral::ReportOptions { cells: 40, ..Default::default() };
    for (gamma, expect_nu) in [(1.5, 0usize), (1.25, 1usize)] {
        let law = PressureLaw::polytrope(1.0, gamma)?;
        let enthalpy = build_enthalpy(&law, &Default::default())?;
        let profile = Arc::new(solve_star(
            &enthalpy,
            1.0,
            &crate::star::SolveOptions { profile_nodes: 1024, ..Default::default() },
        )?);

        // decomposition identity on seeded random states
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let st = functionals::random_admissible_state(
                &profile,
                &enthalpy,
                1.6 * profile.radius,
                1025,
                0.2,
                &mut rng,
            )?;
            worst = worst.max(functionals::decomposition_check(&st, &enthalpy)?);
        }
        push(
            &format!("decomposition-identity gamma={gamma}"),
            worst <= 1e-8,
            format!("max residual {worst:.3e} (tol 1e-8)"),
        );

        // classifier count vs constrained inertia
        let solve = crate::star::SolveOptions { profile_nodes: 512, ..Default::default() };
        let mut curve = family::sweep(&enthalpy, 0.5, 2.0, 9, &solve, false)?;
        family::classify(&mut curve, gamma)?;
        let nu = curve.samples[4].n_unstable.unwrap() as usize;
        let lmu = spectral::spectral_report(&profile, &enthalpy, spectral::OperatorKind::LmuZmuRadial, &spec_opts)?;
        push(
            &format!("inertia-vs-classifier gamma={gamma}"),
            nu == expect_nu && lmu.n_neg == nu && lmu.n_zero == 0,
            format!("classifier n^u = {nu}, spectral n^- = {}, n^0 = {}", lmu.n_neg, lmu.n_zero),
        );

        // dual-side inertia equality
        let tl0 = spectral::spectral_report(&profile, &enthalpy, spectral::OperatorKind::TildeL0, &spec_opts)?;
        push(
            &format!("dual-inertia-equality gamma={gamma}"),
            tl0.n_neg == lmu.n_neg && tl0.n_zero == lmu.n_zero,
            format!(
                "tilde L0 (n^-, n^0) = ({}, {}), L_mu|Z = ({}, {})",
                tl0.n_neg, tl0.n_zero, lmu.n_neg, lmu.n_zero
            ),
        );

        // translation kernel of the l = 1 block
        let tl1 = spectral::spectral_report(&profile, &enthalpy, spectral::OperatorKind::TildeL1, &spec_opts)?;
        let ratio = tl1.convergence.as_ref().map(|c| c.min_abs_ratio).unwrap_or(0.0);
        push(
            &format!("translation-kernel gamma={gamma}"),
            ratio >= 4.0,
            format!("kernel eigenvalue shrink ratio {ratio:.2} per doubling (need >= 4)"),
        );
    }
    Ok(checks)
}

fn cmd_verify(config: &RunConfig, out: &Path) -> Result<(Vec<PathBuf>, bool)> {
    let checks = verify_suite(config.seed)?;
    let all = checks.iter().all(|c| c.passed);
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    #[derive(Serialize)]
    struct VerifyReport {
        passed: bool,
        checks: Vec<VerifyCheck>,
    }
    let path = out.join("verify.json");
    io::write_json(&path, &VerifyReport { passed: all, checks })?;
    Ok((vec![path], all))
}
