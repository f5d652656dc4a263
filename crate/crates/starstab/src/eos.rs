//! Equation-of-state layer: pressure laws, the enthalpy `Phi` with its
//! inverse map, and the pointwise Legendre transform `Psi*`.
//!
//! A barotropic law `P(rho)` with `P' > 0` and power-law behaviour
//! `P'(s) ~ K0 s^{gamma0 - 1}` near vacuum and `~ K1 s^{gamma1 - 1}` at large
//! density defines the convex enthalpy through
//! `Phi'(rho) = int_0^rho P'(s)/s ds`, `Phi(0) = Phi'(0) = 0`.
//! The admissible exponent window for both `gamma0` and `gamma1` is the open
//! interval (6/5, 2).

use crate::error::{Error, Result};
use crate::interp::CubicHermite;
use crate::quad::NeumaierSum;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Open admissible interval for the pressure exponents.
pub const GAMMA_LO: f64 = 6.0 / 5.0;
pub const GAMMA_HI: f64 = 2.0;

/// White-dwarf pressure shape `f(x) = x sqrt(1+x^2)(2x^2-3) + 3 asinh(x)`,
/// equal to `8 int_0^x y^4 / sqrt(1+y^2) dy`.
pub fn white_dwarf_f(x: f64) -> f64 {
    let s = (1.0 + x * x).sqrt();
    x * s * (2.0 * x * x - 3.0) + 3.0 * x.asinh()
}

/// `int_0^x u^2 (sqrt(1+u^2) - 1) du`, the primitive behind the white-dwarf
/// enthalpy. Closed form for moderate x, series for small x where the closed
/// form cancels.
fn white_dwarf_h(x: f64) -> f64 {
    if x <= 0.5 {
        // sum_{k>=1} C(1/2, k) x^{2k+3} / (2k+3)
        let x2 = x * x;
        let mut coeff = 0.5;
        let mut pow = x2 * x2 * x; // x^5
        let mut sum = 0.0;
        for k in 1..70 {
            let term = coeff * pow / (2 * k + 3) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            coeff *= (0.5 - k as f64) / (k as f64 + 1.0);
            pow *= x2;
        }
        sum
    } else {
        let s = (1.0 + x * x).sqrt();
        0.25 * x * s * s * s - (x * s + x.asinh()) / 8.0 - x * x * x / 3.0
    }
}

/// Pressure-law kinds supported by the artifact.
#[derive(Debug, Clone)]
enum LawKind {
    /// `P = K rho^gamma`
    Polytrope { k: f64, gamma: f64 },
    /// `P = A f(x)`, `rho = B x^3`
    WhiteDwarf { a: f64, b: f64 },
    /// log-log PCHIP through sampled (rho, P) with power-law tails
    Table {
        ln_p: CubicHermite,
        rho_lo: f64,
        rho_hi: f64,
    },
}

/// A barotropic pressure law with its exponent metadata.
#[derive(Debug, Clone)]
pub struct PressureLaw {
    kind: LawKind,
    gamma0: f64,
    gamma1: f64,
    k0: f64,
    k1: f64,
    /// Crossover densities of the (C2)/(C3) structure, when meaningful.
    pub rho_star: Option<f64>,
    pub rho_star_hi: Option<f64>,
    /// (C2) remainder exponent `theta0 = (gamma0 - 1)/2`.
    pub theta0: f64,
    /// (C3) decay exponent, when the law declares one.
    pub eps_decay: Option<f64>,
    label: String,
}

impl PressureLaw {
    /// `P = K rho^gamma` with `gamma` inside the admissible open interval.
    pub fn polytrope(k: f64, gamma: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::InvalidLaw(format!("polytrope constant K = {k} must be positive")));
        }
        if !(gamma > GAMMA_LO && gamma < GAMMA_HI) {
            return Err(Error::GammaOutOfRange { value: gamma, lo: GAMMA_LO, hi: GAMMA_HI });
        }
        Ok(Self::polytrope_unchecked(k, gamma))
    }

    /// Polytrope without the exponent-interval check. Oracle laws such as
    /// `gamma = 2` (closed-form star) go through here.
    pub fn polytrope_unchecked(k: f64, gamma: f64) -> Self {
        assert!(k > 0.0 && gamma > 1.0);
        PressureLaw {
            kind: LawKind::Polytrope { k, gamma },
            gamma0: gamma,
            gamma1: gamma,
            k0: k * gamma,
            k1: k * gamma,
            rho_star: None,
            rho_star_hi: None,
            theta0: 0.5 * (gamma - 1.0),
            eps_decay: None,
            label: format!("polytrope K={k} gamma={gamma}"),
        }
    }

    /// White-dwarf law `P = A f((rho/B)^{1/3})`. Exponents are
    /// `gamma0 = 5/3`, `theta0 = 1/3`, `gamma1 = 4/3`, `eps = 2/3`.
    pub fn white_dwarf(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidLaw(format!("white dwarf constants A = {a}, B = {b} must be positive")));
        }
        Ok(PressureLaw {
            kind: LawKind::WhiteDwarf { a, b },
            gamma0: 5.0 / 3.0,
            gamma1: 4.0 / 3.0,
            k0: 8.0 * a / (3.0 * b.powf(5.0 / 3.0)),
            k1: 8.0 * a / (3.0 * b.powf(4.0 / 3.0)),
            rho_star: Some(b),
            rho_star_hi: Some(b),
            theta0: 1.0 / 3.0,
            eps_decay: Some(2.0 / 3.0),
            label: format!("white dwarf A={a} B={b}"),
        })
    }

    /// Law interpolated through sampled `(rho, P)` columns, log-log monotone
    /// cubic inside the table and power-law tails with the declared exponents
    /// outside.
    pub fn from_table(rho: &[f64], p: &[f64], gamma0: f64, gamma1: f64) -> Result<Self> {
        if rho.len() != p.len() || rho.len() < 4 {
            return Err(Error::InvalidLaw("table needs at least 4 (rho, P) rows".into()));
        }
        for i in 0..rho.len() {
            if !(rho[i] > 0.0 && p[i] > 0.0) {
                return Err(Error::InvalidLaw(format!("table row {i} not positive")));
            }
            if i > 0 && (rho[i] <= rho[i - 1] || p[i] <= p[i - 1]) {
                return Err(Error::InvalidLaw(format!("table not strictly increasing at row {i}")));
            }
        }
        for (g, name) in [(gamma0, "gamma0"), (gamma1, "gamma1")] {
            if !(g > GAMMA_LO && g < GAMMA_HI) {
                return Err(Error::InvalidLaw(format!("{name} = {g} outside ({GAMMA_LO}, {GAMMA_HI})")));
            }
        }
        let lx: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
        let ly: Vec<f64> = p.iter().map(|v| v.ln()).collect();
        let ln_p = CubicHermite::pchip(lx, ly);
        let rho_lo = rho[0];
        let rho_hi = *rho.last().unwrap();
        let mut law = PressureLaw {
            kind: LawKind::Table { ln_p, rho_lo, rho_hi },
            gamma0,
            gamma1,
            k0: 0.0,
            k1: 0.0,
            rho_star: Some(rho_lo),
            rho_star_hi: Some(rho_hi),
            theta0: 0.5 * (gamma0 - 1.0),
            eps_decay: None,
            label: format!("table[{} rows]", rho.len()),
        };
        law.k0 = law.dp(rho_lo) * rho_lo.powf(1.0 - gamma0);
        law.k1 = law.dp(rho_hi) * rho_hi.powf(1.0 - gamma1);
        Ok(law)
    }

    pub fn from_spec(spec: &EosSpec) -> Result<Self> {
        match spec.kind.as_str() {
            "polytrope" => {
                let k = spec.k.ok_or_else(|| Error::Config("polytrope needs `k`".into()))?;
                let gamma = spec.gamma.ok_or_else(|| Error::Config("polytrope needs `gamma`".into()))?;
                if spec.allow_gamma_outside_range {
                    Ok(Self::polytrope_unchecked(k, gamma))
                } else {
                    Self::polytrope(k, gamma)
                }
            }
            "white_dwarf" => Self::white_dwarf(spec.a.unwrap_or(1.0), spec.b.unwrap_or(1.0)),
            "custom_table" => {
                let path = spec.table.as_ref().ok_or_else(|| Error::Config("custom_table needs `table` path".into()))?;
                let (rho, p) = crate::io::read_table_csv(std::path::Path::new(path))?;
                let g0 = spec.gamma0.ok_or_else(|| Error::Config("custom_table needs `gamma0`".into()))?;
                let g1 = spec.gamma1.ok_or_else(|| Error::Config("custom_table needs `gamma1`".into()))?;
                Self::from_table(&rho, &p, g0, g1)
            }
            other => Err(Error::Config(format!("unknown eos kind `{other}`"))),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    /// Pressure `P(rho)`.
    pub fn p(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            LawKind::Polytrope { k, gamma } => k * rho.powf(*gamma),
            LawKind::WhiteDwarf { a, b } => a * white_dwarf_f((rho / b).cbrt()),
            LawKind::Table { ln_p, rho_lo, rho_hi } => {
                if rho < *rho_lo {
                    self.p(*rho_lo) * (rho / rho_lo).powf(self.gamma0)
                } else if rho > *rho_hi {
                    self.p(*rho_hi) * (rho / rho_hi).powf(self.gamma1)
                } else {
                    ln_p.eval(rho.ln()).exp()
                }
            }
        }
    }

    /// `P'(rho)`.
    pub fn dp(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            LawKind::Polytrope { k, gamma } => k * gamma * rho.powf(gamma - 1.0),
            LawKind::WhiteDwarf { a, b } => {
                let x = (rho / b).cbrt();
                8.0 * a / (3.0 * b) * x * x / (1.0 + x * x).sqrt()
            }
            LawKind::Table { ln_p, rho_lo, rho_hi } => {
                if rho < *rho_lo {
                    self.dp(*rho_lo) * (rho / rho_lo).powf(self.gamma0 - 1.0)
                } else if rho > *rho_hi {
                    self.dp(*rho_hi) * (rho / rho_hi).powf(self.gamma1 - 1.0)
                } else {
                    let t = rho.ln();
                    let sigma = ln_p.eval_deriv(t);
                    sigma * ln_p.eval(t).exp() / rho
                }
            }
        }
    }

    /// `P''(rho)`; finite differences of the slope for tabulated laws.
    pub fn d2p(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            LawKind::Polytrope { k, gamma } => k * gamma * (gamma - 1.0) * rho.powf(gamma - 2.0),
            LawKind::WhiteDwarf { a, b } => {
                let x = (rho / b).cbrt();
                let s2 = 1.0 + x * x;
                8.0 * a / (9.0 * b * rho) * x * x * (2.0 + x * x) / (s2 * s2.sqrt())
            }
            LawKind::Table { .. } => {
                let h = 1e-4 * rho;
                (self.dp(rho + h) - self.dp(rho - h)) / (2.0 * h)
            }
        }
    }

    /// Sound speed `c = sqrt(P'(rho))`.
    pub fn sound_speed(&self, rho: f64) -> f64 {
        self.dp(rho).max(0.0).sqrt()
    }

    /// Sampling-based check of the structural assumptions: positivity of
    /// `P'`, the vacuum / large-density exponent limits (5% relative), and
    /// the (C1) combination `rho P'' + 2 P' > 0`.
    pub fn validate(&self) -> Result<()> {
        let samples = 80usize;
        for i in 0..samples {
            let t = -8.0 + 16.0 * i as f64 / (samples - 1) as f64;
            let rho = 10f64.powf(t);
            if !(self.dp(rho) > 0.0) {
                return Err(Error::InvalidLaw(format!("P'({rho}) = {} not positive", self.dp(rho))));
            }
            let c1 = rho * self.d2p(rho) + 2.0 * self.dp(rho);
            if !(c1 > 0.0) {
                return Err(Error::InvalidLaw(format!("rho P'' + 2 P' = {c1} not positive at rho = {rho}")));
            }
        }
        for s in [1e-6, 1e-8] {
            let lim = self.dp(s) * s.powf(1.0 - self.gamma0);
            if (lim / self.k0 - 1.0).abs() > 0.05 {
                return Err(Error::InvalidLaw(format!(
                    "vacuum limit s^(1-gamma0) P'(s) = {lim} at s = {s} departs from K0 = {} by more than 5%",
                    self.k0
                )));
            }
        }
        for s in [1e6, 1e8] {
            let lim = self.dp(s) * s.powf(1.0 - self.gamma1);
            if (lim / self.k1 - 1.0).abs() > 0.05 {
                return Err(Error::InvalidLaw(format!(
                    "large-density limit s^(1-gamma1) P'(s) = {lim} at s = {s} departs from K1 = {} by more than 5%",
                    self.k1
                )));
            }
        }
        Ok(())
    }
}

/// Structured eos configuration record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EosSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(default)]
    pub allow_gamma_outside_range: bool,
}

impl EosSpec {
    pub fn polytrope(k: f64, gamma: f64) -> Self {
        EosSpec {
            kind: "polytrope".into(),
            k: Some(k),
            gamma: Some(gamma),
            a: None,
            b: None,
            table: None,
            gamma0: None,
            gamma1: None,
            allow_gamma_outside_range: false,
        }
    }

    pub fn white_dwarf(a: f64, b: f64) -> Self {
        EosSpec {
            kind: "white_dwarf".into(),
            k: None,
            gamma: None,
            a: Some(a),
            b: Some(b),
            table: None,
            gamma0: None,
            gamma1: None,
            allow_gamma_outside_range: false,
        }
    }
}

/// Origin of the enthalpy evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    ClosedForm,
    QuadratureTabulated,
}

#[derive(Debug, Clone)]
enum EnthalpyForm {
    /// `Phi' = cp rho^{gamma-1}`, `Phi = cf rho^gamma`
    PowerLaw { cp: f64, cf: f64, gamma: f64 },
    /// `Phi' = (8A/B)(sqrt(1+x^2) - 1)`, `Phi = 24 A h(x)`, `x = (rho/B)^{1/3}`
    WhiteDwarf { a: f64, b: f64 },
    Tabulated(Tabulated),
}

#[derive(Debug, Clone)]
struct Tabulated {
    /// PCHIP of ln Phi' against ln rho.
    ln_phip: CubicHermite,
    /// PCHIP of ln Phi against ln rho.
    ln_phi: CubicHermite,
    rho_lo: f64,
    rho_hi: f64,
    phip_lo: f64,
    phip_hi: f64,
    gamma0: f64,
    gamma1: f64,
}

/// Grid specification for quadrature-tabulated enthalpies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabulationSpec {
    /// Points per decade of the log-spaced density grid.
    pub points_per_decade: usize,
    /// Tabulate even when a closed form exists (used to exercise the
    /// tabulated route against closed forms).
    pub force_tabulated: bool,
}

impl Default for TabulationSpec {
    fn default() -> Self {
        TabulationSpec { points_per_decade: 400, force_tabulated: false }
    }
}

/// The convex enthalpy `Phi` derived from a pressure law, together with its
/// first two derivatives and the zero-extended inverse `(Phi')_+^{-1}`.
#[derive(Debug, Clone)]
pub struct Enthalpy {
    law: PressureLaw,
    form: EnthalpyForm,
    provenance: Provenance,
}

/// Build the enthalpy for a law: closed form when the law declares one,
/// otherwise a log-spaced tabulation of `Phi' = int P'(s)/s ds` over
/// `[1e-12 rho_ref, 1e6 rho_ref]`, `rho_ref = max(rho_*, 1)`.
pub fn build_enthalpy(law: &PressureLaw, spec: &TabulationSpec) -> Result<Enthalpy> {
    let form = if spec.force_tabulated {
        EnthalpyForm::Tabulated(tabulate(law, spec)?)
    } else {
        match &law.kind {
            LawKind::Polytrope { k, gamma } => EnthalpyForm::PowerLaw {
                cp: k * gamma / (gamma - 1.0),
                cf: k / (gamma - 1.0),
                gamma: *gamma,
            },
            LawKind::WhiteDwarf { a, b } => EnthalpyForm::WhiteDwarf { a: *a, b: *b },
            LawKind::Table { .. } => EnthalpyForm::Tabulated(tabulate(law, spec)?),
        }
    };
    let provenance = match &form {
        EnthalpyForm::Tabulated(_) => Provenance::QuadratureTabulated,
        _ => Provenance::ClosedForm,
    };
    Ok(Enthalpy { law: law.clone(), form, provenance })
}

fn tabulate(law: &PressureLaw, spec: &TabulationSpec) -> Result<Tabulated> {
    let rho_ref = law.rho_star.unwrap_or(1.0).max(1.0);
    let lo = 1e-12 * rho_ref;
    let hi = 1e6 * rho_ref;
    let decades = (hi / lo).log10();
    let n = ((spec.points_per_decade as f64 * decades).ceil() as usize).max(64);
    let n = n + (n % 2); // even panel count for cumulative Simpson
    let t_lo = lo.ln();
    let t_hi = hi.ln();
    let ht = (t_hi - t_lo) / n as f64;
    // Integrand of Phi' in t = ln rho is P'(e^t); seed the lowest node from
    // the vacuum asymptotic P' ~ K0 rho^{gamma0 - 1}.
    let t: Vec<f64> = (0..=n).map(|i| t_lo + ht * i as f64).collect();
    let g: Vec<f64> = t.iter().map(|&ti| law.dp(ti.exp())).collect();
    let mut phip = vec![0.0; n + 1];
    phip[0] = law.k0 / (law.gamma0 - 1.0) * lo.powf(law.gamma0 - 1.0);
    let mut acc = NeumaierSum::new();
    acc.add(phip[0]);
    for i in (0..n).step_by(2) {
        // Simpson over the pair [t_i, t_{i+2}]; the midpoint node splits it
        // into two stored increments that sum to the Simpson value.
        let half = ht / 6.0;
        let s_full = (g[i] + 4.0 * g[i + 1] + g[i + 2]) * 2.0 * half;
        // 3-point (Simpson 3/8-like) split for the first half using the
        // quadratic through the three nodes.
        let s_first = half * (2.5 * g[i] + 4.0 * g[i + 1] - 0.5 * g[i + 2]);
        acc.add(s_first);
        phip[i + 1] = acc.total();
        acc.add(s_full - s_first);
        phip[i + 2] = acc.total();
    }
    for (i, v) in phip.iter().enumerate() {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::Tabulation(format!("Phi' tabulation not positive at node {i}")));
        }
        if i > 0 && phip[i] <= phip[i - 1] {
            return Err(Error::Tabulation(format!("Phi' table not monotone at node {i} (invalid law)")));
        }
    }
    // Phi by the same cumulative rule applied to rho * Phi'(rho) in t.
    let gphi: Vec<f64> = t.iter().zip(phip.iter()).map(|(&ti, &fp)| ti.exp() * fp).collect();
    let mut phi = vec![0.0; n + 1];
    phi[0] = phip[0] * lo * (law.gamma0 - 1.0) / law.gamma0;
    let mut acc = NeumaierSum::new();
    acc.add(phi[0]);
    for i in (0..n).step_by(2) {
        let half = ht / 6.0;
        let s_full = (gphi[i] + 4.0 * gphi[i + 1] + gphi[i + 2]) * 2.0 * half;
        let s_first = half * (2.5 * gphi[i] + 4.0 * gphi[i + 1] - 0.5 * gphi[i + 2]);
        acc.add(s_first);
        phi[i + 1] = acc.total();
        acc.add(s_full - s_first);
        phi[i + 2] = acc.total();
    }
    let ln_phip = CubicHermite::pchip(t.clone(), phip.iter().map(|v| v.ln()).collect());
    let ln_phi = CubicHermite::pchip(t, phi.iter().map(|v| v.ln()).collect());
    Ok(Tabulated {
        ln_phip,
        ln_phi,
        rho_lo: lo,
        rho_hi: hi,
        phip_lo: phip[0],
        phip_hi: phip[n],
        gamma0: law.gamma0,
        gamma1: law.gamma1,
    })
}

impl Enthalpy {
    pub fn law(&self) -> &PressureLaw {
        &self.law
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `Phi(rho)`.
    pub fn phi(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match &self.form {
            EnthalpyForm::PowerLaw { cf, gamma, .. } => cf * rho.powf(*gamma),
            EnthalpyForm::WhiteDwarf { a, b } => 24.0 * a * white_dwarf_h((rho / b).cbrt()),
            EnthalpyForm::Tabulated(t) => {
                if rho < t.rho_lo {
                    t.ln_phi.eval(t.rho_lo.ln()).exp() * (rho / t.rho_lo).powf(t.gamma0)
                } else if rho > t.rho_hi {
                    // continue with Phi' power tail: Phi(rho) = Phi(hi) +
                    // int_hi^rho Phi'(s) ds with Phi' ~ phip_hi (s/hi)^(g1-1)
                    let phi_hi = t.ln_phi.eval(t.rho_hi.ln()).exp();
                    phi_hi
                        + t.phip_hi * t.rho_hi / t.gamma1
                            * ((rho / t.rho_hi).powf(t.gamma1) - 1.0)
                } else {
                    t.ln_phi.eval(rho.ln()).exp()
                }
            }
        }
    }

    /// `Phi'(rho)`.
    pub fn dphi(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match &self.form {
            EnthalpyForm::PowerLaw { cp, gamma, .. } => cp * rho.powf(gamma - 1.0),
            EnthalpyForm::WhiteDwarf { a, b } => {
                let x = (rho / b).cbrt();
                let x2 = x * x;
                8.0 * a / b * (x2 / (1.0 + (1.0 + x2).sqrt()))
            }
            EnthalpyForm::Tabulated(t) => {
                if rho < t.rho_lo {
                    t.phip_lo * (rho / t.rho_lo).powf(t.gamma0 - 1.0)
                } else if rho > t.rho_hi {
                    t.phip_hi * (rho / t.rho_hi).powf(t.gamma1 - 1.0)
                } else {
                    t.ln_phip.eval(rho.ln()).exp()
                }
            }
        }
    }

    /// `Phi''(rho) = P'(rho)/rho`; `+inf` at the vacuum for laws with
    /// `gamma0 < 2`.
    pub fn d2phi(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            // limit of P'(rho)/rho ~ K0 rho^{gamma0-2}
            return if self.law.gamma0 < 2.0 {
                f64::INFINITY
            } else {
                self.law.k0
            };
        }
        self.law.dp(rho) / rho
    }

    /// Zero-extended inverse `(Phi')_+^{-1}(y)`: zero for `y <= 0`.
    pub fn inv_dphi(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match &self.form {
            EnthalpyForm::PowerLaw { cp, gamma, .. } => (y / cp).powf(1.0 / (gamma - 1.0)),
            EnthalpyForm::WhiteDwarf { a, b } => {
                let t = y * b / (8.0 * a);
                let x = (t * (t + 2.0)).sqrt();
                b * x * x * x
            }
            EnthalpyForm::Tabulated(t) => {
                if y < t.phip_lo {
                    t.rho_lo * (y / t.phip_lo).powf(1.0 / (t.gamma0 - 1.0))
                } else if y > t.phip_hi {
                    t.rho_hi * (y / t.phip_hi).powf(1.0 / (t.gamma1 - 1.0))
                } else {
                    match t.ln_phip.invert_monotone(y.ln()) {
                        Some(lr) => lr.exp(),
                        None => t.rho_lo * (y / t.phip_lo).powf(1.0 / (t.gamma0 - 1.0)),
                    }
                }
            }
        }
    }

    /// Relative enthalpy `Psi_{rho_b}(tau) = Phi(tau + rho_b) - Phi(rho_b)
    /// - Phi'(rho_b) tau`, nonnegative by convexity.
    pub fn psi(&self, rho_b: f64, tau: f64) -> Result<f64> {
        if tau < -rho_b {
            return Err(Error::BelowVacuumBound { tau, bound: -rho_b });
        }
        Ok(self.phi(tau + rho_b) - self.phi(rho_b) - self.dphi(rho_b) * tau)
    }

    /// Legendre transform of `Psi_{rho_b}` with its first two derivatives.
    ///
    /// For `y <= -Phi'(rho_b)` the infimum sits at the vacuum bound and the
    /// transform is affine; otherwise the touching point is
    /// `z(y) = (Phi')^{-1}(y + Phi'(rho_b)) - rho_b`.
    pub fn psi_star(&self, rho_b: f64, y: f64) -> PsiStar {
        let phip_b = self.dphi(rho_b);
        if y <= -phip_b {
            PsiStar {
                value: -self.phi(rho_b) + phip_b * rho_b + y * rho_b,
                d1: rho_b,
                d2: 0.0,
            }
        } else {
            let zr = self.inv_dphi(y + phip_b); // z(y) + rho_b
            let z = zr - rho_b;
            let psi = self.phi(zr) - self.phi(rho_b) - phip_b * z;
            PsiStar {
                value: psi - y * z,
                d1: -z,
                d2: -1.0 / self.d2phi(zr),
            }
        }
    }

    /// Maximum normalized Fenchel-Young violation
    /// `Psi*(y) + y tau - Psi(tau)` over `n` randomized `(tau, y)` pairs at
    /// background `rho_b`. Nonpositive up to quadrature/interpolation error.
    pub fn fenchel_check<R: Rng>(&self, rho_b: f64, n: usize, rng: &mut R) -> f64 {
        assert!(n >= 1);
        let phip = self.dphi(rho_b.max(1e-8));
        let y_scale = 3.0 * phip.max(self.dphi(1.0));
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..n {
            let tau = if rng.gen_bool(0.3) {
                // cluster near the vacuum bound where the transform kinks
                -rho_b * rng.gen_range(0.0..1.0)
            } else {
                rho_b * (rng.gen_range(-1.0..3.0f64)).exp() - rho_b
            };
            let y = y_scale * rng.gen_range(-1.5..1.5f64);
            let psi = self.psi(rho_b, tau).expect("tau >= -rho_b by construction");
            let star = self.psi_star(rho_b, y).value;
            let viol = (star + y * tau - psi) / (1.0 + psi.abs() + (y * tau).abs());
            if viol > worst {
                worst = viol;
            }
        }
        worst
    }
}

/// Value and first two derivatives of `Psi*_{rho_b}` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiStar {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}
