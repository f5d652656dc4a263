//! Spherically symmetric finite-volume Euler-Poisson evolution.
//!
//! Conservative update of `(rho, rho u)` on a uniform radial grid with an
//! HLL interface flux, minmod-limited second-order reconstruction (falling
//! back to first order near vacuum), the geometric pressure source of
//! spherical coordinates, monopole gravity from the enclosed mass, an
//! optional viscous momentum flux `eps rho du/dr`, and a two-stage
//! strong-stability-preserving time integrator. Walls at both ends keep the
//! boundary flux zero, so mass is conserved to round-off.

use crate::eos::Enthalpy;
use crate::error::{Error, Result};
use crate::functionals::{distance, smooth_bump, DistanceBreakdown, PerturbedState};
use crate::quad::NeumaierSum;
use crate::spectral;
use crate::star::StarProfile;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Spherical,
    /// 1D slab; used by Riemann-problem validation. Gravity is off.
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    DensityBump,
    VelocityKick,
    EigenmodeSeed,
    /// Diffuse exterior shell carrying extra mass; drives the
    /// `|M - M_mu|^q` term of the stability estimate.
    ExteriorShell,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub amplitude: f64,
    #[serde(default)]
    pub mass_preserving: bool,
    /// Bump center as a fraction of the star radius (shell: offset outside).
    #[serde(default = "default_center_frac")]
    pub center_frac: f64,
    /// Bump width as a fraction of the star radius.
    #[serde(default = "default_width_frac")]
    pub width_frac: f64,
}

fn default_center_frac() -> f64 {
    0.5
}

fn default_width_frac() -> f64 {
    0.12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HydroConfig {
    pub cells: usize,
    /// Domain radius as a multiple of the star radius.
    pub r_dom_factor: f64,
    pub cfl: f64,
    /// Density floor as a fraction of the central density.
    pub floor_frac: f64,
    /// Viscosity `eps` of the regularized momentum equation; 0 = inviscid.
    pub visc: f64,
    /// Run length in sound-crossing times.
    pub t_end_crossings: f64,
    /// Diagnostics cadence in sound-crossing times.
    pub cadence_crossings: f64,
    /// Exponent q of the `|M - M_mu|^q` term in amplification ratios.
    pub q_exponent: f64,
    pub geometry: Geometry,
    #[serde(default)]
    pub gravity: Option<bool>,
    #[serde(default)]
    pub store_snapshots: bool,
    /// Stop early once d(t) exceeds this multiple of d(0); collapse runs on
    /// unstable stars otherwise crawl into the singularity.
    #[serde(default)]
    pub stop_growth_factor: Option<f64>,
    /// Hard step budget; exceeded budgets end the run with a failure note.
    pub max_steps: u64,
    pub perturbation: PerturbationSpec,
}

impl Default for HydroConfig {
    fn default() -> Self {
        HydroConfig {
            cells: 256,
            r_dom_factor: 1.5,
            cfl: 0.4,
            // small enough that floor applications stay below the 1e-12
            // relative mass-conservation budget
            floor_frac: 1e-14,
            visc: 0.0,
            t_end_crossings: 10.0,
            cadence_crossings: 0.05,
            q_exponent: 1.5,
            geometry: Geometry::Spherical,
            gravity: None,
            store_snapshots: false,
            stop_growth_factor: None,
            max_steps: 20_000_000,
            perturbation: PerturbationSpec {
                kind: PerturbationKind::DensityBump,
                amplitude: 1e-2,
                mass_preserving: true,
                center_frac: 0.5,
                width_frac: 0.12,
            },
        }
    }
}

impl HydroConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!("CFL = {} outside (0, 1)", self.cfl)));
        }
        if !(self.floor_frac > 0.0) {
            return Err(Error::Config("density floor must be positive".into()));
        }
        if !(self.r_dom_factor > 1.0) {
            return Err(Error::Config("r_dom_factor must exceed 1 (R_dom > R_mu)".into()));
        }
        Ok(())
    }

    fn gravity_on(&self) -> bool {
        self.gravity.unwrap_or(self.geometry == Geometry::Spherical)
    }
}

/// Time series of diagnostics for one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub casimir: Vec<f64>,
    pub dist: Vec<DistanceBreakdown>,
    pub snapshots: Vec<(f64, Vec<f64>, Vec<f64>)>,
    /// Sound-crossing time used as the time unit.
    pub t_unit: f64,
    /// Populated when stepping failed; the series above hold the partial run.
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn sup_distance(&self) -> f64 {
        self.dist.iter().map(|d| d.total).fold(0.0, f64::max)
    }
}

/// The explicit finite-volume integrator.
pub struct Sim {
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
    pub t: f64,
    enthalpy: Enthalpy,
    gravity: bool,
    cfl: f64,
    floor: f64,
    /// Cells below this density form the vacuum band: their velocity is
    /// pinned to zero so near-empty cells cannot collapse the time step.
    vac_cut: f64,
    visc: f64,
    faces: Vec<f64>,
    centers: Vec<f64>,
    vol: Vec<f64>,
    area: Vec<f64>,
    dr: f64,
}

impl Sim {
    pub fn new(
        enthalpy: &Enthalpy,
        geometry: Geometry,
        r_dom: f64,
        cells: usize,
        floor: f64,
        cfl: f64,
        visc: f64,
        gravity: bool,
        rho0: impl Fn(f64) -> f64,
        v0: impl Fn(f64) -> f64,
    ) -> Self {
        let dr = r_dom / cells as f64;
        let faces: Vec<f64> = (0..=cells).map(|i| i as f64 * dr).collect();
        let centers: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * dr).collect();
        let (vol, area): (Vec<f64>, Vec<f64>) = match geometry {
            Geometry::Spherical => (
                (0..cells)
                    .map(|i| 4.0 * PI / 3.0 * (faces[i + 1].powi(3) - faces[i].powi(3)))
                    .collect(),
                faces.iter().map(|&r| 4.0 * PI * r * r).collect(),
            ),
            Geometry::Planar => (vec![dr; cells], vec![1.0; cells + 1]),
        };
        let mut rho: Vec<f64> = centers.iter().map(|&r| rho0(r).max(floor)).collect();
        let mom: Vec<f64> = centers
            .iter()
            .zip(rho.iter_mut())
            .map(|(&r, d)| if *d > floor { *d * v0(r) } else { 0.0 })
            .collect();
        Sim {
            rho,
            mom,
            t: 0.0,
            enthalpy: enthalpy.clone(),
            gravity,
            cfl,
            floor,
            vac_cut: 1e4 * floor,
            visc,
            faces,
            centers,
            vol,
            area,
            dr,
        }
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Total mass by compensated summation.
    pub fn total_mass(&self) -> f64 {
        let mut s = NeumaierSum::new();
        for i in 0..self.rho.len() {
            s.add(self.rho[i] * self.vol[i]);
        }
        s.total()
    }

    /// Total energy: kinetic + enthalpy - gravitational field energy.
    pub fn total_energy(&self) -> f64 {
        let mut s = NeumaierSum::new();
        for i in 0..self.rho.len() {
            let kin = if self.rho[i] > self.floor {
                0.5 * self.mom[i] * self.mom[i] / self.rho[i]
            } else {
                0.0
            };
            s.add((kin + self.enthalpy.phi(self.rho[i])) * self.vol[i]);
        }
        if self.gravity {
            // (1/8pi) int |grad V|^2 dx with grad V = m(r)/r^2 (midpoint rule)
            let mut m_acc = 0.0;
            let mut field = NeumaierSum::new();
            for i in 0..self.rho.len() {
                let m_c = m_acc + 0.5 * self.rho[i] * self.vol[i];
                m_acc += self.rho[i] * self.vol[i];
                let r = self.centers[i];
                field.add(m_c * m_c / (r * r) * self.dr);
            }
            let m_tot = m_acc;
            let tail = m_tot * m_tot / self.faces[self.faces.len() - 1];
            s.add(-(4.0 * PI * field.total() + 4.0 * PI * tail) / (8.0 * PI));
        }
        s.total()
    }

    fn max_signal(&self) -> f64 {
        let mut s = 0.0f64;
        for i in 0..self.rho.len() {
            let u = if self.rho[i] > self.vac_cut { self.mom[i] / self.rho[i] } else { 0.0 };
            let c = self.enthalpy.law().sound_speed(self.rho[i]);
            s = s.max(u.abs() + c);
        }
        s
    }

    /// CFL-stable time step, including the explicit viscous restriction.
    pub fn dt_stable(&self) -> f64 {
        let mut dt = self.cfl * self.dr / self.max_signal().max(1e-300);
        if self.visc > 0.0 {
            dt = dt.min(0.25 * self.dr * self.dr / self.visc);
        }
        dt
    }

    /// One SSP-RK2 step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if dt <= 1e-300 * self.dr {
            return Err(Error::DtUnderflow { t: self.t });
        }
        let n = self.rho.len();
        let (mut r1, mut m1) = (self.rho.clone(), self.mom.clone());
        let (dr0, dm0) = self.rhs(&self.rho, &self.mom);
        for i in 0..n {
            r1[i] = self.rho[i] + dt * dr0[i];
            m1[i] = self.mom[i] + dt * dm0[i];
        }
        self.apply_floor(&mut r1, &mut m1);
        let (dr1, dm1) = self.rhs(&r1, &m1);
        for i in 0..n {
            self.rho[i] = 0.5 * (self.rho[i] + r1[i] + dt * dr1[i]);
            self.mom[i] = 0.5 * (self.mom[i] + m1[i] + dt * dm1[i]);
        }
        let floor = self.floor;
        let vac = self.vac_cut;
        for i in 0..n {
            if self.rho[i] < floor {
                self.rho[i] = floor;
            }
            if self.rho[i] <= vac {
                self.mom[i] = 0.0;
            }
        }
        self.t += dt;
        for i in 0..n {
            if !(self.rho[i].is_finite() && self.mom[i].is_finite()) {
                return Err(Error::NonFiniteState { t: self.t, cell: i });
            }
        }
        Ok(())
    }

    fn apply_floor(&self, rho: &mut [f64], mom: &mut [f64]) {
        for i in 0..rho.len() {
            if rho[i] < self.floor {
                rho[i] = self.floor;
            }
            if rho[i] <= self.vac_cut {
                mom[i] = 0.0;
            }
        }
    }

    /// Conservative right-hand side for one stage.
    fn rhs(&self, rho: &[f64], mom: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = rho.len();
        let law = self.enthalpy.law();
        let u: Vec<f64> = (0..n)
            .map(|i| if rho[i] > self.vac_cut { mom[i] / rho[i] } else { 0.0 })
            .collect();
        // minmod slopes; zero (first order) next to the vacuum band
        let mut s_rho = vec![0.0; n];
        let mut s_u = vec![0.0; n];
        for i in 1..n - 1 {
            let near_floor = rho[i - 1] <= 1e1 * self.vac_cut
                || rho[i] <= 1e1 * self.vac_cut
                || rho[i + 1] <= 1e1 * self.vac_cut;
            if near_floor {
                continue;
            }
            s_rho[i] = minmod(rho[i] - rho[i - 1], rho[i + 1] - rho[i]) / self.dr;
            s_u[i] = minmod(u[i] - u[i - 1], u[i + 1] - u[i]) / self.dr;
        }
        // interface fluxes (mass, momentum); walls at both ends
        let mut f_mass = vec![0.0; n + 1];
        let mut f_mom = vec![0.0; n + 1];
        for f in 1..n {
            let (il, ir) = (f - 1, f);
            let rl = (rho[il] + 0.5 * self.dr * s_rho[il]).max(self.floor);
            let rr = (rho[ir] - 0.5 * self.dr * s_rho[ir]).max(self.floor);
            let ul = u[il] + 0.5 * self.dr * s_u[il];
            let ur = u[ir] - 0.5 * self.dr * s_u[ir];
            let (fm, fp) = hll_flux(law, rl, ul, rr, ur);
            f_mass[f] = fm;
            f_mom[f] = fp;
            if self.visc > 0.0 {
                let rho_f = 0.5 * (rho[il] + rho[ir]);
                f_mom[f] -= self.visc * rho_f * (u[ir] - u[il]) / self.dr;
            }
        }
        // wall closures: zero mass flux, pressure-only momentum flux
        f_mom[0] = law.p(rho[0]);
        f_mom[n] = law.p(rho[n - 1]);
        // enclosed mass at faces for gravity
        let mut g = vec![0.0; n];
        if self.gravity {
            let mut m_face = 0.0;
            for i in 0..n {
                let m_c = m_face + 0.5 * rho[i] * self.vol[i];
                m_face += rho[i] * self.vol[i];
                let r = self.centers[i];
                g[i] = m_c / (r * r);
            }
        }
        let mut drho = vec![0.0; n];
        let mut dmom = vec![0.0; n];
        for i in 0..n {
            let (af0, af1) = (self.area[i], self.area[i + 1]);
            drho[i] = -(af1 * f_mass[i + 1] - af0 * f_mass[i]) / self.vol[i];
            dmom[i] = -(af1 * f_mom[i + 1] - af0 * f_mom[i]) / self.vol[i];
            // geometric pressure source keeps uniform states exact
            dmom[i] += law.p(rho[i]) * (af1 - af0) / self.vol[i];
            if self.gravity {
                dmom[i] -= rho[i] * g[i];
            }
        }
        (drho, dmom)
    }

    /// Velocity with the vacuum contract applied (v = 0 on floored cells).
    pub fn velocity(&self) -> Vec<f64> {
        (0..self.rho.len())
            .map(|i| {
                if self.rho[i] > 1.0000001 * self.floor {
                    self.mom[i] / self.rho[i]
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Snapshot as a functional-ready state.
    pub fn state(&self, profile: &Arc<StarProfile>) -> Result<PerturbedState> {
        PerturbedState::new(
            profile.clone(),
            self.centers.clone(),
            self.rho.clone(),
            self.velocity(),
        )
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// HLL flux for the barotropic system (rho, rho u) with
/// F = (rho u, rho u^2 + P).
fn hll_flux(law: &crate::eos::PressureLaw, rl: f64, ul: f64, rr: f64, ur: f64) -> (f64, f64) {
    let cl = law.sound_speed(rl);
    let cr = law.sound_speed(rr);
    let sl = (ul - cl).min(ur - cr);
    let sr = (ul + cl).max(ur + cr);
    let fl = (rl * ul, rl * ul * ul + law.p(rl));
    let fr = (rr * ur, rr * ur * ur + law.p(rr));
    if sl >= 0.0 {
        fl
    } else if sr <= 0.0 {
        fr
    } else {
        let inv = 1.0 / (sr - sl);
        (
            (sr * fl.0 - sl * fr.0 + sl * sr * (rr - rl)) * inv,
            (sr * fl.1 - sl * fr.1 + sl * sr * (rr * ur - rl * ul)) * inv,
        )
    }
}

/// Build the initial data for a perturbation spec on the star.
pub fn make_initial(
    profile: &Arc<StarProfile>,
    enthalpy: &Enthalpy,
    config: &HydroConfig,
) -> Result<PerturbedState> {
    config.validate()?;
    let spec = &config.perturbation;
    let r_mu = profile.radius;
    let r_dom = config.r_dom_factor * r_mu;
    let dr = r_dom / config.cells as f64;
    let centers: Vec<f64> = (0..config.cells).map(|i| (i as f64 + 0.5) * dr).collect();
    let base: Vec<f64> = centers.iter().map(|&r| profile.rho_at(r, enthalpy)).collect();
    let mut rho = base.clone();
    let mut v = vec![0.0; config.cells];
    match spec.kind {
        PerturbationKind::DensityBump => {
            let c = spec.center_frac * r_mu;
            let w = spec.width_frac * r_mu;
            for (i, &r) in centers.iter().enumerate() {
                rho[i] += spec.amplitude * profile.mu * smooth_bump(r, c, w);
            }
            if spec.mass_preserving {
                // uniform rescale against the functional engine's mass
                // measure (one pass is exact by linearity)
                let probe = PerturbedState::new(profile.clone(), centers.clone(), rho.clone(), v.clone())?;
                let (m_state, m_star) = probe.masses(enthalpy);
                let scale = m_star / m_state;
                for d in rho.iter_mut() {
                    *d *= scale;
                }
            }
        }
        PerturbationKind::VelocityKick => {
            for (i, &r) in centers.iter().enumerate() {
                if r <= r_mu {
                    v[i] = spec.amplitude * r * (-(r / r_mu) * (r / r_mu)).exp();
                }
            }
        }
        PerturbationKind::EigenmodeSeed => {
            let (asm, sigma) = seed_sigma(profile, enthalpy)?;
            let mode: Vec<f64> = centers
                .iter()
                .map(|&r| {
                    if r < r_mu {
                        asm.eval(&sigma, r) * profile.inv_phi2_at(r, enthalpy)
                    } else {
                        0.0
                    }
                })
                .collect();
            let peak = mode.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1e-300);
            for i in 0..config.cells {
                rho[i] += spec.amplitude * profile.mu * mode[i] / peak;
            }
        }
        PerturbationKind::ExteriorShell => {
            let c = (1.0 + spec.center_frac.max(0.01)) * r_mu;
            let w = spec.width_frac * r_mu;
            // normalize the shell to carry amplitude * M_mu of mass
            let mut shell_mass = 0.0;
            for (i, &r) in centers.iter().enumerate() {
                let (a, b) = (i as f64 * dr, (i as f64 + 1.0) * dr);
                let vol = 4.0 * PI / 3.0 * (b.powi(3) - a.powi(3));
                shell_mass += smooth_bump(r, c, w) * vol;
            }
            let scale = spec.amplitude * profile.mass / shell_mass.max(1e-300);
            for (i, &r) in centers.iter().enumerate() {
                rho[i] += scale * smooth_bump(r, c, w);
            }
        }
    }
    let min_rho = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_rho < -1e-13 * profile.mu {
        return Err(Error::NegativeDensity { min_rho });
    }
    for d in rho.iter_mut() {
        *d = d.max(0.0);
    }
    PerturbedState::new(profile.clone(), centers, rho, v)
}

/// The eigenvector used by `EigenmodeSeed`: the most negative direction of
/// `L_mu` on `Z_mu` when one exists, otherwise the lowest mode.
fn seed_sigma(profile: &StarProfile, enthalpy: &Enthalpy) -> Result<(spectral::Assembly, Vec<f64>)> {
    let asm = spectral::assemble_lmu_zmu(profile, enthalpy, 64)?;
    let rep = spectral::inertia(&asm, true, 1e-6)?;
    Ok((asm, rep.min_vector.clone()))
}

/// Evolve the initial state, recording diagnostics every cadence interval.
pub fn evolve(
    initial: &PerturbedState,
    config: &HydroConfig,
    profile: &Arc<StarProfile>,
    enthalpy: &Enthalpy,
) -> Result<Trajectory> {
    config.validate()?;
    let r_dom = config.r_dom_factor * profile.radius;
    let floor = config.floor_frac * profile.mu;
    let mut sim = Sim::new(
        enthalpy,
        config.geometry,
        r_dom,
        config.cells,
        floor,
        config.cfl,
        config.visc,
        config.gravity_on(),
        |r| initial.rho_at(r),
        |r| initial.v_at(r),
    );
    let t_unit = profile.sound_crossing_time(enthalpy);
    let t_end = config.t_end_crossings * t_unit;
    let cadence = config.cadence_crossings * t_unit;
    let mut traj = Trajectory {
        times: Vec::new(),
        mass: Vec::new(),
        energy: Vec::new(),
        casimir: Vec::new(),
        dist: Vec::new(),
        snapshots: Vec::new(),
        t_unit,
        failure: None,
    };
    let v_r = -profile.mass / profile.radius;
    let record = |sim: &Sim, traj: &mut Trajectory| -> Result<()> {
        let st = sim.state(profile)?;
        let d = distance(&st, enthalpy)?;
        let e = sim.total_energy();
        traj.times.push(sim.t);
        traj.mass.push(sim.total_mass());
        traj.energy.push(e);
        traj.casimir.push(e - v_r * sim.total_mass());
        traj.dist.push(d);
        if config.store_snapshots {
            traj.snapshots.push((sim.t, sim.rho.clone(), sim.velocity()));
        }
        Ok(())
    };
    record(&sim, &mut traj)?;
    let d0 = traj.dist[0].total;
    let mut next_out = cadence;
    let mut steps: u64 = 0;
    while sim.t < t_end {
        let dt = sim.dt_stable().min(next_out - sim.t).min(t_end - sim.t);
        if let Err(e) = sim.step(dt) {
            traj.failure = Some(e.to_string());
            return Ok(traj);
        }
        steps += 1;
        if steps > config.max_steps {
            traj.failure = Some(format!("step budget {} exhausted at t = {}", config.max_steps, sim.t));
            return Ok(traj);
        }
        if sim.t >= next_out - 1e-12 * t_unit {
            record(&sim, &mut traj)?;
            next_out += cadence;
            if let Some(factor) = config.stop_growth_factor {
                if traj.dist.last().map(|d| d.total >= factor * d0).unwrap_or(false) {
                    return Ok(traj);
                }
            }
        }
    }
    if traj.times.last().map(|&t| t < sim.t).unwrap_or(true) {
        record(&sim, &mut traj)?;
    }
    Ok(traj)
}

/// One run of a batch experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub amplitude: f64,
    pub d0: f64,
    pub mass_gap: f64,
    pub sup_d: f64,
    /// `sup_t d / (d(0) + |M - M_mu|^q)`
    pub ratio: f64,
    /// Same without the mass term, for comparison.
    pub ratio_without_mass_term: f64,
    pub failed: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub q_exponent: f64,
    pub runs: Vec<RunSummary>,
    pub max_ratio: f64,
}

/// Run the perturbation at each amplitude and report amplification ratios
/// `sup_t d(t) / (d(0) + |M - M_mu|^q)`.
pub fn stability_experiment(
    profile: &Arc<StarProfile>,
    enthalpy: &Enthalpy,
    config: &HydroConfig,
    amplitudes: &[f64],
) -> Result<ExperimentReport> {
    let mut runs = Vec::new();
    for &a in amplitudes {
        let mut cfg = config.clone();
        cfg.perturbation.amplitude = a;
        let initial = make_initial(profile, enthalpy, &cfg)?;
        let traj = evolve(&initial, &cfg, profile, enthalpy)?;
        let d0 = traj.dist.first().map(|d| d.total).unwrap_or(f64::NAN);
        let gap = traj.dist.first().map(|d| d.mass_gap).unwrap_or(f64::NAN);
        let sup = traj.sup_distance();
        let denom = d0 + gap.powf(cfg.q_exponent);
        runs.push(RunSummary {
            amplitude: a,
            d0,
            mass_gap: gap,
            sup_d: sup,
            ratio: sup / denom,
            ratio_without_mass_term: sup / d0,
            failed: traj.failure,
        });
    }
    let max_ratio = runs.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(ExperimentReport { q_exponent: config.q_exponent, runs, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{build_enthalpy, PressureLaw, TabulationSpec};
    use crate::star::{solve_star, SolveOptions};
    use approx::assert_relative_eq;

    fn setup(gamma: f64) -> (Arc<StarProfile>, Enthalpy) {
        let ent = build_enthalpy(&PressureLaw::polytrope(1.0, gamma).unwrap(), &TabulationSpec::default()).unwrap();
        let p = solve_star(&ent, 1.0, &SolveOptions { profile_nodes: 1024, ..Default::default() }).unwrap();
        (Arc::new(p), ent)
    }

    #[test]
    fn uniform_state_is_preserved() {
        let ent = build_enthalpy(&PressureLaw::polytrope(1.0, 1.4).unwrap(), &TabulationSpec::default()).unwrap();
        for geometry in [Geometry::Planar, Geometry::Spherical] {
            let mut sim = Sim::new(&ent, geometry, 1.0, 64, 1e-14, 0.4, 0.0, false, |_| 0.7, |_| 0.0);
            let rho0 = sim.rho.clone();
            for _ in 0..25 {
                let dt = sim.dt_stable();
                sim.step(dt).unwrap();
            }
            for i in 0..sim.rho.len() {
                assert_relative_eq!(sim.rho[i], rho0[i], max_relative = 1e-13);
                assert!(sim.mom[i].abs() <= 1e-13 * rho0[i]);
            }
        }
    }

    #[test]
    fn mass_is_conserved_to_roundoff() {
        let (p, ent) = setup(1.5);
        let cfg = HydroConfig { cells: 128, t_end_crossings: 0.5, ..Default::default() };
        let init = make_initial(&p, &ent, &cfg).unwrap();
        let traj = evolve(&init, &cfg, &p, &ent).unwrap();
        assert!(traj.failure.is_none());
        let m0 = traj.mass[0];
        for &m in &traj.mass {
            assert!((m - m0).abs() <= 1e-12 * m0, "mass drift {}", (m - m0) / m0);
        }
    }

    #[test]
    fn single_step_mass_change_is_boundary_flux_only() {
        let (p, ent) = setup(1.5);
        let cfg = HydroConfig { cells: 96, ..Default::default() };
        let init = make_initial(&p, &ent, &cfg).unwrap();
        let floor = cfg.floor_frac * p.mu;
        let mut sim = Sim::new(
            &ent,
            Geometry::Spherical,
            cfg.r_dom_factor * p.radius,
            cfg.cells,
            floor,
            cfg.cfl,
            0.0,
            true,
            |r| init.rho_at(r),
            |r| init.v_at(r),
        );
        let m0 = sim.total_mass();
        sim.step(sim.dt_stable()).unwrap();
        // walls carry zero mass flux, so the telescoping sum is exact
        assert!((sim.total_mass() - m0).abs() <= 1e-13 * m0);
    }

    #[test]
    fn energy_does_not_grow() {
        let (p, ent) = setup(1.5);
        for visc in [0.0, 1e-3] {
            let cfg = HydroConfig {
                cells: 128,
                t_end_crossings: 2.0,
                visc,
                ..Default::default()
            };
            let init = make_initial(&p, &ent, &cfg).unwrap();
            let traj = evolve(&init, &cfg, &p, &ent).unwrap();
            let e0 = traj.energy[0];
            let scale = e0.abs().max(p.mass * p.mass / p.radius);
            for &e in &traj.energy {
                assert!(e <= e0 + 1e-4 * scale, "energy grew: {} -> {}", e0, e);
            }
        }
    }

    #[test]
    fn vacuum_cells_report_zero_velocity() {
        let (p, ent) = setup(1.5);
        let cfg = HydroConfig { cells: 96, t_end_crossings: 0.3, ..Default::default() };
        let init = make_initial(&p, &ent, &cfg).unwrap();
        let floor = cfg.floor_frac * p.mu;
        let mut sim = Sim::new(
            &ent,
            Geometry::Spherical,
            cfg.r_dom_factor * p.radius,
            cfg.cells,
            floor,
            cfg.cfl,
            0.0,
            true,
            |r| init.rho_at(r),
            |r| init.v_at(r),
        );
        for _ in 0..50 {
            sim.step(sim.dt_stable()).unwrap();
        }
        let v = sim.velocity();
        for i in 0..sim.rho.len() {
            if sim.rho[i] <= 1.0000001 * floor {
                assert_eq!(v[i], 0.0);
            }
        }
    }

    #[test]
    fn perturbation_builders() {
        let (p, ent) = setup(1.5);
        // amplitude zero reproduces the star
        let cfg = HydroConfig {
            perturbation: PerturbationSpec {
                kind: PerturbationKind::DensityBump,
                amplitude: 0.0,
                mass_preserving: false,
                center_frac: 0.5,
                width_frac: 0.12,
            },
            ..Default::default()
        };
        let st = make_initial(&p, &ent, &cfg).unwrap();
        let d = distance(&st, &ent).unwrap();
        // the sampled star is only 2nd-order accurate on the hydro grid, so
        // d is small but not zero
        assert!(d.total <= 1e-6 * p.mass * p.mass / p.radius);
        // mass-preserving bump
        let cfg2 = HydroConfig {
            perturbation: PerturbationSpec {
                kind: PerturbationKind::DensityBump,
                amplitude: 1e-2,
                mass_preserving: true,
                center_frac: 0.5,
                width_frac: 0.12,
            },
            ..Default::default()
        };
        let st2 = make_initial(&p, &ent, &cfg2).unwrap();
        let d2 = distance(&st2, &ent).unwrap();
        assert!(d2.mass_gap <= 1e-12 * p.mass, "mass gap {}", d2.mass_gap);
        // eigenmode seed scales quadratically in amplitude for d2/d4
        let mk = |a: f64| HydroConfig {
            perturbation: PerturbationSpec {
                kind: PerturbationKind::EigenmodeSeed,
                amplitude: a,
                mass_preserving: false,
                center_frac: 0.5,
                width_frac: 0.12,
            },
            ..Default::default()
        };
        let da = distance(&make_initial(&p, &ent, &mk(1e-3)).unwrap(), &ent).unwrap();
        let db = distance(&make_initial(&p, &ent, &mk(2e-3)).unwrap(), &ent).unwrap();
        let ratio = (db.d2 + db.d4) / (da.d2 + da.d4);
        assert!((ratio - 4.0).abs() < 0.4, "quadratic scaling violated: {ratio}");
        // negative density rejected
        let bad = HydroConfig {
            perturbation: PerturbationSpec {
                kind: PerturbationKind::DensityBump,
                amplitude: -2.0,
                mass_preserving: false,
                center_frac: 0.5,
                width_frac: 0.12,
            },
            ..Default::default()
        };
        assert!(make_initial(&p, &ent, &bad).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = HydroConfig { cfl: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = HydroConfig { r_dom_factor: 0.8, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn seed_sigma_smoke() {
        let (p, ent) = setup(1.25);
        let (_asm, sigma) = seed_sigma(&p, &ent).unwrap();
        assert!(sigma.iter().any(|&x| x != 0.0));
    }
}
