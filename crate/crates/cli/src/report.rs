//! Serialized run results.

use cs_emission::emission::{DecayBreakdown, ShiftBreakdown};
use cs_emission::spectral::TrajectoryReport;
use cs_emission::validation::{CrossGridReport, CutoffSensitivity, HermitianOracle, SumRuleReport, ThetaScan};
use cs_emission::{Parity, Spectrum, StateKind};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub index: usize,
    pub re: f64,
    pub im: f64,
    pub kind: StateKind,
    pub parity: Parity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub theta: f64,
    pub n_bound: usize,
    pub n_resonance: usize,
    pub n_discrete: usize,
    pub continuum_ray_angle: f64,
    pub states: Vec<StateRecord>,
}

impl From<&Spectrum> for SpectrumRecord {
    fn from(sp: &Spectrum) -> Self {
        Self {
            theta: sp.theta.radians(),
            n_bound: sp.n_bound,
            n_resonance: sp.n_resonance,
            n_discrete: sp.n_discrete,
            continuum_ray_angle: sp.theta.continuum_ray_angle(),
            states: sp
                .states
                .iter()
                .map(|s| StateRecord {
                    index: s.index,
                    re: s.energy.re,
                    im: s.energy.im,
                    kind: s.kind,
                    parity: s.parity,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub ordinal: usize,
    pub oracle: HermitianOracle,
    pub rate: f64,
    pub shift: f64,
    pub rate_rel_error: f64,
    pub shift_rel_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub all_passed: bool,
    pub checks: Vec<Check>,
    pub sum_rule: Option<SumRuleReport>,
    pub rate_scan: Option<ThetaScan>,
    pub shift_scan: Option<ThetaScan>,
    pub oracle: Vec<OracleComparison>,
    pub cross_grid: Option<CrossGridReport>,
    pub cutoff: Option<CutoffSensitivity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSummary {
    pub rate: ThetaScan,
    pub shift: ThetaScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

/// Common envelope of every JSON file the CLI writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: String,
    pub command: String,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_scan: Option<ThetaSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<TrajectoryReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    /// Only present when requested; wall-clock time breaks byte-identical reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunResult {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            config: config.clone(),
            spectrum: None,
            decay: None,
            shift: None,
            theta_scan: None,
            trajectories: None,
            validation: None,
            timing: None,
        }
    }
}
