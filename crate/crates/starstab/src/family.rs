//! The mass-radius family `mu -> (M, R)` and the turning point principle.
//!
//! The unstable-mode count `n^u(mu)` is seeded at small `mu` by the vacuum
//! exponent (`1` for `gamma0` in (6/5, 4/3), `0` in (4/3, 2)) and can change
//! only at mass extrema: `+1` when `M'R'` flips from `-` to `+` (the curve
//! bends counterclockwise), `-1` on the opposite flip.

use crate::eos::Enthalpy;
use crate::error::{Error, Result};
use crate::star::{solve_star, SolveOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySample {
    pub mu: f64,
    pub mass: f64,
    pub radius: f64,
    pub dm_dmu: f64,
    pub dr_dmu: f64,
    /// d(M/R)/dmu, the quantity entering the index `i_mu`.
    pub dmr_dmu: f64,
    pub n_unstable: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum CurveEvent {
    MassExtremum {
        mu: f64,
        /// +1 counterclockwise (n^u up), -1 clockwise (n^u down),
        /// 0 when the bend direction could not be resolved.
        delta: i32,
    },
    /// A decrement was requested at n^u = 0; the count is clamped and the
    /// event kept for inspection (it indicates a misdetected extremum).
    ClampedAtZero { mu: f64 },
}

#[derive(Debug, Clone, Default)]
pub struct FamilyCurve {
    pub samples: Vec<FamilySample>,
    pub events: Vec<CurveEvent>,
    pub flags: Vec<String>,
}

impl FamilyCurve {
    /// Build a curve from raw (mu, M, R) triples; derivatives are attached
    /// by local 4th-order fits. Used by tests and by synthetic data.
    pub fn from_points(mu: Vec<f64>, mass: Vec<f64>, radius: Vec<f64>) -> Self {
        assert!(mu.windows(2).all(|w| w[1] > w[0]), "mu must be strictly increasing");
        let samples = (0..mu.len())
            .map(|i| FamilySample {
                mu: mu[i],
                mass: mass[i],
                radius: radius[i],
                dm_dmu: 0.0,
                dr_dmu: 0.0,
                dmr_dmu: 0.0,
                n_unstable: None,
            })
            .collect();
        let mut c = FamilyCurve { samples, events: Vec::new(), flags: Vec::new() };
        c.attach_derivatives();
        c
    }

    /// Recompute dM/dmu, dR/dmu, d(M/R)/dmu with 5-point local Lagrange
    /// differentiation (valid on non-uniform grids).
    pub fn attach_derivatives(&mut self) {
        let n = self.samples.len();
        let mu: Vec<f64> = self.samples.iter().map(|s| s.mu).collect();
        let m: Vec<f64> = self.samples.iter().map(|s| s.mass).collect();
        let r: Vec<f64> = self.samples.iter().map(|s| s.radius).collect();
        let mr: Vec<f64> = (0..n).map(|i| m[i] / r[i]).collect();
        for i in 0..n {
            let lo = i.saturating_sub(2).min(n.saturating_sub(5));
            let hi = (lo + 5).min(n);
            let lo = hi.saturating_sub(5.min(n));
            let xs = &mu[lo..hi];
            self.samples[i].dm_dmu = lagrange_deriv(xs, &m[lo..hi], mu[i]);
            self.samples[i].dr_dmu = lagrange_deriv(xs, &r[lo..hi], mu[i]);
            self.samples[i].dmr_dmu = lagrange_deriv(xs, &mr[lo..hi], mu[i]);
        }
    }

    pub fn max_abs_dm(&self) -> f64 {
        self.samples.iter().map(|s| s.dm_dmu.abs()).fold(0.0, f64::max)
    }
}

/// Derivative at `x` of the Lagrange polynomial through (xs, ys).
pub fn lagrange_deriv(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut denom = 1.0;
        for j in 0..n {
            if j != i {
                denom *= xs[i] - xs[j];
            }
        }
        // L_i'(x) = sum_{m != i} prod_{j != i, m} (x - x_j) / denom
        let mut dli = 0.0;
        for m in 0..n {
            if m == i {
                continue;
            }
            let mut prod = 1.0;
            for j in 0..n {
                if j != i && j != m {
                    prod *= x - xs[j];
                }
            }
            dli += prod;
        }
        acc += ys[i] * dli / denom;
    }
    acc
}

/// Sweep the family over `[mu_lo, mu_hi]` (log-spaced) and attach
/// derivatives. With `refine`, extra solves are inserted around sign changes
/// of dM/dmu until the bracketing spacing shrinks by 16x.
pub fn sweep(
    enthalpy: &Enthalpy,
    mu_lo: f64,
    mu_hi: f64,
    count: usize,
    opts: &SolveOptions,
    refine: bool,
) -> Result<FamilyCurve> {
    assert!(mu_lo > 0.0 && mu_hi > mu_lo && count >= 8);
    let mut mus: Vec<f64> = (0..count)
        .map(|i| (mu_lo.ln() + (mu_hi.ln() - mu_lo.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect();
    let mut curve = solve_all(enthalpy, &mus, opts)?;
    if refine {
        for _round in 0..4 {
            let mut inserts = Vec::new();
            for w in curve.samples.windows(2) {
                if w[0].dm_dmu * w[1].dm_dmu < 0.0 {
                    inserts.push((w[0].mu.ln() + w[1].mu.ln()) * 0.5);
                }
            }
            if inserts.is_empty() {
                break;
            }
            for lmu in inserts {
                mus.push(lmu.exp());
            }
            mus.sort_by(|a, b| a.total_cmp(b));
            mus.dedup();
            curve = solve_all(enthalpy, &mus, opts)?;
        }
    }
    // Degenerate families (gamma0 = 4/3-like) have mass independent of mu.
    let flat = curve
        .samples
        .iter()
        .all(|s| s.dm_dmu.abs() * s.mu / s.mass <= 1e-4);
    if flat {
        curve.flags.push("degenerate mass extremum everywhere: |dM/dmu| below threshold at every sample".into());
    }
    Ok(curve)
}

fn solve_all(enthalpy: &Enthalpy, mus: &[f64], opts: &SolveOptions) -> Result<FamilyCurve> {
    let results: Vec<Result<(f64, f64)>> = mus
        .par_iter()
        .map(|&mu| solve_star(enthalpy, mu, opts).map(|p| (p.mass, p.radius)))
        .collect();
    let mut mu_ok = Vec::new();
    let mut mass = Vec::new();
    let mut radius = Vec::new();
    let mut flags = Vec::new();
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok((m, r)) => {
                mu_ok.push(mus[i]);
                mass.push(m);
                radius.push(r);
            }
            Err(e) => {
                flags.push(format!("truncated: solve failed at mu = {}: {e}", mus[i]));
                break;
            }
        }
    }
    if mu_ok.len() < 6 {
        return Err(Error::FamilySample {
            mu: *mus.first().unwrap(),
            source: Box::new(Error::Spectral("fewer than 6 solvable samples".into())),
        });
    }
    let mut curve = FamilyCurve::from_points(mu_ok, mass, radius);
    curve.flags = flags;
    Ok(curve)
}

/// Fill `n_unstable` by the turning point rule. `gamma0` decides the
/// small-mu seed; the value 4/3 is rejected because the dichotomy does not
/// cover it.
pub fn classify(curve: &mut FamilyCurve, gamma0: f64) -> Result<()> {
    if (gamma0 - 4.0 / 3.0).abs() < 1e-9 {
        return Err(Error::DegenerateGamma0);
    }
    if !(gamma0 > 6.0 / 5.0 && gamma0 < 2.0) {
        return Err(Error::GammaOutOfRange { value: gamma0, lo: 6.0 / 5.0, hi: 2.0 });
    }
    let n = curve.samples.len();
    let dm_scale = curve.max_abs_dm();
    let tol = 1e-9 * dm_scale;
    // Sign changes between samples of definite derivative sign. Samples
    // whose derivative sits inside the tolerance band (for instance a grid
    // point landing exactly on the extremum) do not carry sign information.
    let mut crossings: Vec<(usize, usize)> = Vec::new();
    let mut last: Option<usize> = None;
    for (i, s) in curve.samples.iter().enumerate() {
        if s.dm_dmu.abs() <= tol {
            continue;
        }
        if let Some(il) = last {
            if curve.samples[il].dm_dmu * s.dm_dmu < 0.0 {
                crossings.push((il, i));
            }
        }
        last = Some(i);
    }
    // Noise screen: genuine extrema are isolated; clustered sign changes
    // mean the derivative is noise and the sweep needs refinement.
    for w in crossings.windows(2) {
        if w[1].0 - w[0].1 < 2 {
            return Err(Error::DerivativeNoise { mu: curve.samples[w[0].1].mu });
        }
    }
    // Bend direction at each crossing, read off the flanking samples of
    // definite sign.
    let mut raw: Vec<(f64, i32)> = Vec::new();
    for &(il, ir) in &crossings {
        let s = &curve.samples[il];
        let t = &curve.samples[ir];
        let mu_star = s.mu + (t.mu - s.mu) * s.dm_dmu / (s.dm_dmu - t.dm_dmu);
        let before = s.dm_dmu * s.dr_dmu;
        let after = t.dm_dmu * t.dr_dmu;
        let thresh = tol * (s.dr_dmu.abs() + t.dr_dmu.abs()).max(f64::MIN_POSITIVE);
        let delta = if before < -thresh && after > thresh {
            1
        } else if before > thresh && after < -thresh {
            -1
        } else {
            0
        };
        if delta == 0 {
            curve.flags.push(format!("unresolved bend direction at mu = {mu_star}"));
        }
        raw.push((mu_star, delta));
    }
    // Walk mu upward, applying each event as it is passed.
    let mut count: i64 = if gamma0 < 4.0 / 3.0 { 1 } else { 0 };
    let mut events = Vec::new();
    let mut j = 0usize;
    for i in 0..n {
        while j < raw.len() && raw[j].0 < curve.samples[i].mu {
            let (mu_star, delta) = raw[j];
            if count + i64::from(delta) < 0 {
                events.push(CurveEvent::ClampedAtZero { mu: mu_star });
                count = 0;
            } else {
                count += i64::from(delta);
                events.push(CurveEvent::MassExtremum { mu: mu_star, delta });
            }
            j += 1;
        }
        curve.samples[i].n_unstable = Some(count as u32);
    }
    curve.events = events;
    Ok(())
}

/// The paper's index `i_mu` entering `n^u = n^-(L_mu) - i_mu`:
/// `1` when `M'(mu) d/dmu(M/R) > 0` or `M'(mu) = 0`,
/// `0` when the product is negative or `d/dmu(M/R) = 0`.
pub fn i_mu(curve: &FamilyCurve, k: usize) -> Result<u32> {
    let n = curve.samples.len();
    assert!(k < n);
    let s = &curve.samples[k];
    // "= 0" is read on logarithmic slopes: |d ln M / d ln mu| below 1e-6
    // counts as a vanishing derivative regardless of units.
    let m_zero = (s.dm_dmu * s.mu / s.mass).abs() <= 1e-6;
    let mr_zero = (s.dmr_dmu * s.mu / (s.mass / s.radius)).abs() <= 1e-6;
    match (m_zero, mr_zero) {
        (true, true) => Err(Error::IndeterminateIndex { index: k }),
        (true, false) => Ok(1),
        (false, true) => Ok(0),
        (false, false) => Ok(if s.dm_dmu * s.dmr_dmu > 0.0 { 1 } else { 0 }),
    }
}
