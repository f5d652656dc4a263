//! Structured run configuration: one TOML document drives every subcommand.

use crate::eos::{EosSpec, TabulationSpec};
use crate::error::{Error, Result};
use crate::hydro::HydroConfig;
use serde::{Deserialize, Serialize};

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Seed for every randomized suite in the run.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eos: Option<EosSpec>,
    #[serde(default)]
    pub enthalpy: TabulationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hydro: Option<HydroConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run config serializes")
    }

    pub fn eos_required(&self) -> Result<&EosSpec> {
        self.eos.as_ref().ok_or_else(|| Error::Config("missing [eos] section".into()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StarSection {
    pub mu: f64,
    pub profile_nodes: usize,
    pub rtol: f64,
    pub radius_rel_tol: f64,
    pub r_max_factor: f64,
}

impl Default for StarSection {
    fn default() -> Self {
        StarSection {
            mu: 1.0,
            profile_nodes: 2048,
            rtol: 1e-11,
            radius_rel_tol: 1e-12,
            r_max_factor: 1e4,
        }
    }
}

impl StarSection {
    pub fn solve_options(&self) -> crate::star::SolveOptions {
        crate::star::SolveOptions {
            rtol: self.rtol,
            radius_rel_tol: self.radius_rel_tol,
            profile_nodes: self.profile_nodes,
            r_max_factor: self.r_max_factor,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySection {
    pub mu_lo: f64,
    pub mu_hi: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_true")]
    pub refine: bool,
    /// Optional pre-computed curve to classify instead of sweeping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_curve: Option<String>,
}

fn default_samples() -> usize {
    33
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralSection {
    /// One of `l_mu_zmu`, `tilde_l0`, `tilde_l1`.
    pub operator: String,
    pub cells: usize,
    pub r_out_factor: f64,
    pub zero_tol_factor: f64,
    /// Load this profile stem instead of solving the [star] section.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
}

impl Default for SpectralSection {
    fn default() -> Self {
        SpectralSection {
            operator: "l_mu_zmu".into(),
            cells: 96,
            r_out_factor: 2.0,
            zero_tol_factor: 1e-6,
            profile: None,
        }
    }
}

impl SpectralSection {
    pub fn operator_kind(&self) -> Result<crate::spectral::OperatorKind> {
        match self.operator.as_str() {
            "l_mu_zmu" => Ok(crate::spectral::OperatorKind::LmuZmuRadial),
            "tilde_l0" => Ok(crate::spectral::OperatorKind::TildeL0),
            "tilde_l1" => Ok(crate::spectral::OperatorKind::TildeL1),
            other => Err(Error::Config(format!(
                "unknown spectral operator `{other}` (expected l_mu_zmu | tilde_l0 | tilde_l1)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceSection {
    /// Profile stem (the solver's csv/json pair without extension).
    pub profile: String,
    /// State CSV path.
    pub state: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSection {
    pub amplitudes: Vec<f64>,
}
