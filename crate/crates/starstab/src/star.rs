//! Steady-state solver: the non-rotating star at central density `mu`.
//!
//! The hydrostatic relation `Phi'(rho) = -V + V(R)` turns, with
//! `u(r) = Phi'(rho(r))`, into the smooth shooting problem
//!
//! ```text
//! u' = -m / r^2,        m' = 4 pi r^2 (Phi')_+^{-1}(u),
//! u(0) = Phi'(mu),      m(0) = 0,
//! ```
//!
//! integrated outward until the vacuum boundary `u = 0`. `u` stays smooth
//! through the surface where the density itself loses regularity, which is
//! why the solver works in `u` rather than in `rho`.

use crate::eos::Enthalpy;
use crate::error::{Error, Result};
use crate::interp::{hermite, hermite_deriv};
use std::f64::consts::PI;

/// Step control and output options for [`solve_star`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Relative tolerance of the adaptive integrator.
    pub rtol: f64,
    /// Absolute tolerance, as a fraction of the natural (u, m) scales.
    pub atol_frac: f64,
    /// Relative tolerance on the located surface radius.
    pub radius_rel_tol: f64,
    /// Number of stored profile nodes (uniform in r on [0, R]).
    pub profile_nodes: usize,
    /// Give up when no vacuum boundary appears before `r_max_factor` times
    /// the central scale length.
    pub r_max_factor: f64,
    /// Fixed step size (in units of the scale length) instead of adaptive
    /// control; used by convergence studies.
    pub fixed_step: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rtol: 1e-11,
            atol_frac: 1e-13,
            radius_rel_tol: 1e-12,
            profile_nodes: 2048,
            r_max_factor: 1e4,
            fixed_step: None,
        }
    }
}

/// One steady star: radial grid, density, enclosed mass, potential, and the
/// scalars (mu, R, M, steady-relation residual).
#[derive(Debug, Clone)]
pub struct StarProfile {
    pub mu: f64,
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub radius: f64,
    pub mass: f64,
    /// Normalized hydrostatic residual of the stored profile.
    pub residual: f64,
    pub law_label: String,
    /// `u = Phi'(rho) = V(R) - V(r)` at the nodes; the smooth interpolation
    /// variable.
    u: Vec<f64>,
}

impl StarProfile {
    /// Rebuild the interpolation data after loading arrays from disk.
    pub fn from_arrays(
        mu: f64,
        r: Vec<f64>,
        rho: Vec<f64>,
        m: Vec<f64>,
        v: Vec<f64>,
        radius: f64,
        mass: f64,
        residual: f64,
        law_label: String,
    ) -> Self {
        let u = v.iter().map(|&vi| -mass / radius - vi).collect();
        StarProfile { mu, r, rho, m, v, radius, mass, residual, law_label, u }
    }

    fn cell(&self, r: f64) -> usize {
        match self.r.binary_search_by(|v| v.total_cmp(&r)) {
            Ok(j) => j.min(self.r.len() - 2),
            Err(j) => j.saturating_sub(1).min(self.r.len() - 2),
        }
    }

    /// `u(r) = V(R) - V(r)` everywhere (negative outside the star).
    pub fn u_at(&self, r: f64) -> f64 {
        if r >= self.radius {
            return self.mass / r - self.mass / self.radius;
        }
        if r <= 0.0 {
            return self.u[0];
        }
        let j = self.cell(r);
        let (r0, r1) = (self.r[j], self.r[j + 1]);
        let d0 = self.du(j);
        let d1 = self.du(j + 1);
        hermite(r, r0, r1, self.u[j], self.u[j + 1], d0, d1)
    }

    /// `u'(r) = -m/r^2` from the interpolant.
    pub fn du_at(&self, r: f64) -> f64 {
        if r >= self.radius {
            return -self.mass / (r * r);
        }
        if r <= 0.0 {
            return 0.0;
        }
        let j = self.cell(r);
        hermite_deriv(r, self.r[j], self.r[j + 1], self.u[j], self.u[j + 1], self.du(j), self.du(j + 1))
    }

    fn du(&self, i: usize) -> f64 {
        if self.r[i] == 0.0 {
            0.0
        } else {
            -self.m[i] / (self.r[i] * self.r[i])
        }
    }

    /// Enclosed mass, constant `M` outside the star.
    pub fn m_at(&self, r: f64) -> f64 {
        if r >= self.radius {
            return self.mass;
        }
        if r <= 0.0 {
            return 0.0;
        }
        let j = self.cell(r);
        let slope = |i: usize| 4.0 * PI * self.r[i] * self.r[i] * self.rho[i];
        hermite(r, self.r[j], self.r[j + 1], self.m[j], self.m[j + 1], slope(j), slope(j + 1))
    }

    /// Gravitational potential; `-M/r` outside the star.
    pub fn v_at(&self, r: f64) -> f64 {
        if r >= self.radius {
            return -self.mass / r;
        }
        -self.mass / self.radius - self.u_at(r)
    }

    /// Density through the enthalpy inverse of the smooth variable `u`.
    pub fn rho_at(&self, r: f64, enthalpy: &Enthalpy) -> f64 {
        enthalpy.inv_dphi(self.u_at(r))
    }

    /// `1 / Phi''(rho(r))`: the dual-side weight, continuous and vanishing
    /// at the surface.
    pub fn inv_phi2_at(&self, r: f64, enthalpy: &Enthalpy) -> f64 {
        let rho = self.rho_at(r, enthalpy);
        if rho <= 0.0 {
            return 0.0;
        }
        let dp = enthalpy.law().dp(rho);
        if dp > 0.0 {
            rho / dp
        } else {
            0.0
        }
    }

    /// `V'(r) = m/r^2`.
    pub fn dv_at(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.m_at(r) / (r * r)
    }

    /// Sound-crossing time `2 int_0^R dr / sqrt(P'(rho))`.
    pub fn sound_crossing_time(&self, enthalpy: &Enthalpy) -> f64 {
        let n = 4096;
        let h = self.radius / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) * h;
            let c = enthalpy.law().sound_speed(self.rho_at(r, enthalpy));
            if c > 0.0 {
                acc += h / c;
            }
        }
        2.0 * acc
    }
}

struct Rhs<'a> {
    enthalpy: &'a Enthalpy,
}

impl Rhs<'_> {
    #[inline]
    fn eval(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        let rho = self.enthalpy.inv_dphi(y[0]);
        [-y[1] / (r * r), 4.0 * PI * r * r * rho]
    }
}

// Dormand-Prince 5(4) pair.
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// One Dormand-Prince step from (r, y) with step h. Returns (y_new, err_est).
fn dp_step(rhs: &Rhs, r: f64, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let mut k = [[0.0f64; 2]; 7];
    k[0] = rhs.eval(r, y);
    for s in 0..6 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s + 1) {
            let a = DP_A[s][j];
            if a != 0.0 {
                ys[0] += h * a * kj[0];
                ys[1] += h * a * kj[1];
            }
        }
        k[s + 1] = rhs.eval(r + DP_C[s] * h, ys);
    }
    // 5th order solution is the s = 5 combination (k[6] is FSAL at r + h)
    let mut ynew = y;
    for (j, kj) in k.iter().enumerate().take(6) {
        let a = DP_A[5][j];
        if a != 0.0 {
            ynew[0] += h * a * kj[0];
            ynew[1] += h * a * kj[1];
        }
    }
    let mut err = [0.0f64; 2];
    for (j, kj) in k.iter().enumerate() {
        err[0] += DP_E[j] * kj[0];
        err[1] += DP_E[j] * kj[1];
    }
    err[0] *= h;
    err[1] *= h;
    (ynew, err)
}

struct Integrator<'a> {
    rhs: Rhs<'a>,
    scale: [f64; 2],
    rtol: f64,
    atol: [f64; 2],
    h: f64,
}

impl Integrator<'_> {
    fn err_norm(&self, e: [f64; 2], y: [f64; 2]) -> f64 {
        let w0 = self.atol[0] + self.rtol * y[0].abs().max(self.scale[0] * 1e-3);
        let w1 = self.atol[1] + self.rtol * y[1].abs().max(self.scale[1] * 1e-3);
        ((e[0] / w0).powi(2) + (e[1] / w1).powi(2)).sqrt() * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Advance exactly to r_target; returns the state there.
    fn advance_to(&mut self, mut r: f64, mut y: [f64; 2], r_target: f64) -> Result<(f64, [f64; 2])> {
        let mut steps = 0u64;
        while r < r_target {
            steps += 1;
            if steps > 50_000_000 {
                return Err(Error::StepUnderflow { r });
            }
            let h = self.h.min(r_target - r);
            let (ynew, err) = dp_step(&self.rhs, r, y, h);
            let norm = self.err_norm(err, ynew);
            if norm <= 1.0 {
                r += h;
                y = ynew;
                self.h = h * (0.9 * norm.max(1e-12).powf(-0.2)).clamp(0.2, 5.0);
            } else {
                self.h = h * (0.9 * norm.powf(-0.25)).clamp(0.1, 0.9);
            }
            if self.h < 1e-14 * r.max(1.0) {
                return Err(Error::StepUnderflow { r });
            }
        }
        Ok((r, y))
    }
}

/// Series start of the center expansion at a tiny radius `r0`:
/// `u = Phi'(mu) - (2 pi/3) mu r^2 + (2 pi^2/15)(mu^2/Phi''(mu)) r^4`.
fn series_start(enthalpy: &Enthalpy, mu: f64, r0: f64) -> [f64; 2] {
    let phi2 = enthalpy.d2phi(mu);
    let rho2 = -(2.0 * PI / 3.0) * mu / phi2;
    let u0 = enthalpy.dphi(mu);
    let u = u0 - (2.0 * PI / 3.0) * mu * r0 * r0 + (2.0 * PI * PI / 15.0) * (mu * mu / phi2) * r0.powi(4);
    let m = (4.0 * PI / 3.0) * mu * r0.powi(3) + (4.0 * PI / 5.0) * rho2 * r0.powi(5);
    [u, m]
}

/// Solve the steady star at central density `mu`.
pub fn solve_star(enthalpy: &Enthalpy, mu: f64, opts: &SolveOptions) -> Result<StarProfile> {
    assert!(mu > 0.0, "central density must be positive");
    let u0 = enthalpy.dphi(mu);
    let alpha = (u0 / (4.0 * PI * mu)).sqrt(); // central scale length
    let r0 = 1e-6 * alpha;
    let r_max = opts.r_max_factor * alpha;
    let m_scale = 4.0 * PI * mu * alpha.powi(3);

    let mut integ = Integrator {
        rhs: Rhs { enthalpy },
        scale: [u0, m_scale],
        rtol: opts.rtol,
        atol: [opts.atol_frac * u0, opts.atol_frac * m_scale],
        h: opts.fixed_step.map(|s| s * alpha).unwrap_or(1e-3 * alpha),
    };
    let fixed = opts.fixed_step.map(|s| s * alpha);

    // March outward watching for the sign change of u.
    let mut r = r0;
    let mut y = series_start(enthalpy, mu, r0);
    let mut ra;
    let mut ya;
    let mut steps = 0u64;
    loop {
        steps += 1;
        if steps > 50_000_000 {
            return Err(Error::StepUnderflow { r });
        }
        let h = match fixed {
            Some(hf) => hf,
            None => integ.h,
        };
        let h = h.min(r_max - r).max(1e-14 * alpha);
        let (ynew, err) = dp_step(&integ.rhs, r, y, h);
        let accept = fixed.is_some() || integ.err_norm(err, ynew) <= 1.0;
        if accept {
            if fixed.is_none() {
                let norm = integ.err_norm(err, ynew).max(1e-10);
                integ.h = h * (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0);
            }
            ra = r;
            ya = y;
            r += h;
            y = ynew;
            if y[0] <= 0.0 {
                break;
            }
            if r >= r_max {
                return Err(Error::NoVacuumBoundary { r_max });
            }
        } else {
            let norm = integ.err_norm(err, ynew);
            integ.h = h * (0.9 * norm.powf(-0.25)).clamp(0.1, 0.9);
            if integ.h < 1e-14 * alpha {
                return Err(Error::StepUnderflow { r });
            }
        }
    }

    // Newton iteration (with a bisection bracket) on the partial step from
    // (ra, ya) for the surface u(R) = 0.
    let bracket_h = r - ra;
    let u_at = |s: f64| -> ([f64; 2], f64, f64) {
        let (ys, _) = dp_step(&integ.rhs, ra, ya, s);
        let du = -ys[1] / ((ra + s) * (ra + s));
        (ys, ys[0], du)
    };
    let (mut lo, mut hi) = (0.0f64, bracket_h);
    let mut s = bracket_h * ya[0] / (ya[0] - y[0]).max(f64::MIN_POSITIVE);
    s = s.clamp(1e-3 * bracket_h, 0.999 * bracket_h);
    for _ in 0..80 {
        let (_, us, dus) = u_at(s);
        if us > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - us / dus;
        s = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) <= opts.radius_rel_tol * (ra + s) {
            break;
        }
    }
    let (ys, _, _) = u_at(s);
    let radius = ra + s;
    let mass = ys[1];

    // Second pass: land exactly on the uniform profile nodes.
    let n = opts.profile_nodes.max(16);
    let mut rr = vec![0.0; n];
    let mut uu = vec![0.0; n];
    let mut mm = vec![0.0; n];
    for (i, ri) in rr.iter_mut().enumerate() {
        *ri = radius * i as f64 / (n - 1) as f64;
    }
    uu[0] = u0;
    let mut state = series_start(enthalpy, mu, r0);
    let mut rcur = r0;
    integ.h = 1e-3 * alpha;
    for i in 1..n {
        let (rn, yn) = integ.advance_to(rcur, state, rr[i])?;
        rcur = rn;
        state = yn;
        uu[i] = yn[0];
        mm[i] = yn[1];
    }
    uu[n - 1] = 0.0;
    mm[n - 1] = mass;
    let rho: Vec<f64> = uu.iter().map(|&u| enthalpy.inv_dphi(u)).collect();
    let v: Vec<f64> = uu.iter().map(|&u| -mass / radius - u).collect();

    let mut profile = StarProfile {
        mu,
        r: rr,
        rho,
        m: mm,
        v,
        radius,
        mass,
        residual: 0.0,
        law_label: enthalpy.law().label().to_string(),
        u: uu,
    };
    profile.residual = steady_residual(&profile, enthalpy);
    Ok(profile)
}

/// Maximum normalized hydrostatic residual `|dP/dr + rho m / r^2|` over the
/// interior nodes, with `dP/dr` from 4th-order finite differences of the
/// stored pressure column. Normalization is the largest gravity term.
pub fn steady_residual(profile: &StarProfile, enthalpy: &Enthalpy) -> f64 {
    let n = profile.r.len();
    if n < 7 {
        return f64::NAN;
    }
    let h = profile.r[1] - profile.r[0];
    let p: Vec<f64> = profile.rho.iter().map(|&rho| enthalpy.law().p(rho)).collect();
    let grav: Vec<f64> = (0..n)
        .map(|i| {
            if profile.r[i] == 0.0 {
                0.0
            } else {
                profile.rho[i] * profile.m[i] / (profile.r[i] * profile.r[i])
            }
        })
        .collect();
    let scale = grav.iter().cloned().fold(0.0f64, f64::max);
    let mut worst = 0.0f64;
    for i in 2..n - 2 {
        if profile.rho[i] < 1e-12 * profile.mu {
            continue;
        }
        let dpdr = (-p[i + 2] + 8.0 * p[i + 1] - 8.0 * p[i - 1] + p[i - 2]) / (12.0 * h);
        let res = (dpdr + grav[i]).abs();
        if res > worst {
            worst = res;
        }
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{build_enthalpy, PressureLaw, TabulationSpec};
    use approx::assert_relative_eq;

    fn enthalpy(k: f64, gamma: f64) -> Enthalpy {
        let law = if gamma > 6.0 / 5.0 && gamma < 2.0 {
            PressureLaw::polytrope(k, gamma).unwrap()
        } else {
            PressureLaw::polytrope_unchecked(k, gamma)
        };
        build_enthalpy(&law, &TabulationSpec::default()).unwrap()
    }

    /// gamma = 2 closed form: rho = mu sin(kr)/(kr), k = sqrt(2 pi / K),
    /// R = pi / k, for every mu.
    #[test]
    fn gamma_two_closed_form() {
        let ent = enthalpy(1.0, 2.0);
        let kwave = (2.0 * PI).sqrt();
        let r_exact = PI / kwave;
        for mu in [0.5, 1.0, 3.0] {
            let p = solve_star(&ent, mu, &SolveOptions::default()).unwrap();
            assert_relative_eq!(p.radius, r_exact, max_relative = 1e-10);
            let m_exact = 4.0 * PI * PI * mu / kwave.powi(3);
            assert_relative_eq!(p.mass, m_exact, max_relative = 1e-10);
            let mut worst = 0.0f64;
            for (i, &r) in p.r.iter().enumerate() {
                let exact = if r == 0.0 { mu } else { mu * (kwave * r).sin() / (kwave * r) };
                let err = (p.rho[i] - exact).abs() / mu;
                worst = worst.max(err);
            }
            assert!(worst <= 1e-8, "profile error {worst}");
            // V(R) = -M/R by construction
            assert_relative_eq!(p.v_at(p.radius), -p.mass / p.radius, max_relative = 1e-14);
        }
    }

    #[test]
    fn polytrope_radius_scaling() {
        let ent = enthalpy(1.0, 1.5);
        let opts = SolveOptions::default();
        let p1 = solve_star(&ent, 1.0, &opts).unwrap();
        let p4 = solve_star(&ent, 4.0, &opts).unwrap();
        // R(4 mu)/R(mu) = 4^{(gamma-2)/2} = 4^{-1/4}
        assert_relative_eq!(p4.radius / p1.radius, 4.0f64.powf(-0.25), max_relative = 1e-5);
        // M ~ mu^{(3 gamma - 4)/2} = mu^{1/4}
        assert_relative_eq!(p4.mass / p1.mass, 4.0f64.powf(0.25), max_relative = 1e-5);
    }

    #[test]
    fn residual_of_solver_output_is_small() {
        let ent = enthalpy(1.0, 1.5);
        let p = solve_star(&ent, 1.0, &SolveOptions::default()).unwrap();
        assert!(p.residual <= 1e-7, "residual {}", p.residual);
        // white dwarf too
        let wd = build_enthalpy(&PressureLaw::white_dwarf(1.0, 1.0).unwrap(), &TabulationSpec::default()).unwrap();
        let p = solve_star(&wd, 1.0, &SolveOptions::default()).unwrap();
        assert!(p.residual <= 1e-7, "wd residual {}", p.residual);
    }

    #[test]
    fn residual_flags_fake_profile() {
        let ent = enthalpy(1.0, 2.0);
        let good = solve_star(&ent, 1.0, &SolveOptions::default()).unwrap();
        // exact closed form injected -> tiny residual
        let kwave = (2.0 * PI).sqrt();
        let n = good.r.len();
        let rho: Vec<f64> = good
            .r
            .iter()
            .map(|&r| if r == 0.0 { 1.0 } else { (kwave * r).sin() / (kwave * r) })
            .collect();
        let mut m = vec![0.0; n];
        for i in 0..n {
            let r = good.r[i];
            // m(r) = 4 pi mu (sin(kr) - kr cos(kr)) / k^3
            m[i] = 4.0 * PI * ((kwave * r).sin() - kwave * r * (kwave * r).cos()) / kwave.powi(3);
        }
        let v: Vec<f64> = good.r.iter().map(|&r| good.v_at(r)).collect();
        let exact = StarProfile::from_arrays(
            1.0,
            good.r.clone(),
            rho,
            m,
            v.clone(),
            good.radius,
            good.mass,
            0.0,
            "exact".into(),
        );
        assert!(steady_residual(&exact, &ent) <= 1e-8);
        // constant-density fake violates balance at O(1)
        let fake = StarProfile::from_arrays(
            1.0,
            good.r.clone(),
            vec![1.0; n],
            good.m.clone(),
            v,
            good.radius,
            good.mass,
            0.0,
            "fake".into(),
        );
        assert!(steady_residual(&fake, &ent) > 0.1);
    }

    #[test]
    fn no_vacuum_boundary_for_flat_exponent() {
        // gamma = 1.1 (Lane-Emden n = 10) has an infinite star; the solver
        // reports the typed failure instead of looping.
        let ent = enthalpy(1.0, 1.1);
        let opts = SolveOptions { r_max_factor: 50.0, ..Default::default() };
        match solve_star(&ent, 1.0, &opts) {
            Err(Error::NoVacuumBoundary { .. }) => {}
            other => panic!("expected NoVacuumBoundary, got {other:?}"),
        }
    }

    #[test]
    fn fixed_step_convergence_order() {
        let ent = enthalpy(1.0, 1.5);
        let reference = solve_star(&ent, 1.0, &SolveOptions::default()).unwrap();
        let mut errs = Vec::new();
        for step in [0.05, 0.025, 0.0125] {
            let opts = SolveOptions { fixed_step: Some(step), profile_nodes: 64, ..Default::default() };
            let p = solve_star(&ent, 1.0, &opts).unwrap();
            errs.push((p.radius - reference.radius).abs().max((p.mass - reference.mass).abs()));
        }
        let order = (errs[0] / errs[2]).log2() / 2.0;
        assert!(order >= 4.0 || errs[2] < 1e-12, "observed order {order}, errs {errs:?}");
    }

    #[test]
    fn interpolants_match_nodes() {
        let ent = enthalpy(1.0, 1.5);
        let p = solve_star(&ent, 2.0, &SolveOptions::default()).unwrap();
        for i in (0..p.r.len()).step_by(173) {
            assert_relative_eq!(p.m_at(p.r[i]), p.m[i], max_relative = 1e-12);
            assert_relative_eq!(p.v_at(p.r[i]), p.v[i], max_relative = 1e-12);
        }
        // between nodes, density from u round-trips the enthalpy
        let rmid = 0.5 * (p.r[100] + p.r[101]);
        let rho = p.rho_at(rmid, &ent);
        assert_relative_eq!(ent.dphi(rho), p.u_at(rmid), max_relative = 1e-10);
        // monotonicity of the stored profile
        for w in p.rho.windows(2) {
            assert!(w[1] <= w[0] + 1e-13);
        }
        for w in p.m.windows(2) {
            assert!(w[1] >= w[0] - 1e-13);
        }
    }
}
