//! Flat `section.key = value` run configuration.
//!
//! ```text
//! # comment
//! potential.kind = gaussian-well
//! potential.a = 0.5
//! grid.x_max = 160
//! theta = 0.12, 0.15, 0.18
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cs_emission::discretization::{build_grid, Grid};
use cs_emission::pipeline::{DEFAULT_N_POINTS, DEFAULT_X_MAX};
use cs_emission::{EmissionParams, Pipeline, PotentialSpec, ScalingAngle, Tolerances, UnitSystem, C_LIGHT_AU};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable that overrides `output.dir`.
pub const OUT_DIR_ENV: &str = "CS_EMISSION_OUT_DIR";

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("key `{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid, ConfigError> {
        build_grid(self.x_min, self.x_max, self.n_points).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -DEFAULT_X_MAX,
            x_max: DEFAULT_X_MAX,
            n_points: DEFAULT_N_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Angles for the θ-independence scan; defaults to θ and θ ± 0.03.
    pub theta_list: Option<Vec<f64>>,
    /// Second grid for the cross-discretization check.
    pub alt_grid: Option<GridConfig>,
    pub cutoff_factor: f64,
    pub sum_rule_tol: f64,
    pub theta_scan_tol: f64,
    pub oracle_tol: f64,
    pub cross_grid_tol: f64,
    pub cutoff_tol: f64,
    pub parity_tol: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            theta_list: None,
            alt_grid: None,
            cutoff_factor: 10.0,
            sum_rule_tol: 1e-5,
            theta_scan_tol: 1e-3,
            oracle_tol: 1e-6,
            cross_grid_tol: 1e-6,
            cutoff_tol: 1e-6,
            parity_tol: 1e-12,
        }
    }
}

/// Everything that determines the numbers. Echoed into every JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub grid: GridConfig,
    pub theta: Vec<f64>,
    pub initial_state: Option<usize>,
    pub c_light: f64,
    pub cutoff_sq: Option<f64>,
    pub tolerances: Tolerances,
    pub validation: ValidationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self { json: true, csv: true }
    }
}

impl Formats {
    pub fn parse(list: &str) -> Option<Self> {
        let mut f = Formats { json: false, csv: false };
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "json" => f.json = true,
                "csv" => f.csv = true,
                _ => return None,
            }
        }
        (f.json || f.csv).then_some(f)
    }
}

/// Where and how results are written. Kept apart from [`RunConfig`] so the
/// output location never leaks into the results themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Formats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub run: RunConfig,
    pub output: OutputConfig,
}

const KEYS: &[&str] = &[
    "potential.kind",
    "potential.a",
    "potential.b",
    "potential.w",
    "potential.omega0",
    "grid.x_min",
    "grid.x_max",
    "grid.n_points",
    "theta",
    "initial_state",
    "units.c_light",
    "emission.cutoff_sq",
    "tolerances.bound",
    "tolerances.ray",
    "tolerances.ray_min_modulus",
    "tolerances.parity",
    "tolerances.stationarity",
    "tolerances.match_radius",
    "output.dir",
    "output.formats",
    "validation.theta_list",
    "validation.alt_grid.x_max",
    "validation.alt_grid.n_points",
    "validation.cutoff_factor",
    "validation.sum_rule_tol",
    "validation.theta_scan_tol",
    "validation.oracle_tol",
    "validation.cross_grid_tol",
    "validation.cutoff_tol",
    "validation.parity_tol",
];

pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: k + 1 })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax { line: k + 1 });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: k + 1,
                key: key.to_string(),
            });
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError::Duplicate(key.to_string()));
        }
    }
    Ok(map)
}

struct Pairs(BTreeMap<String, String>);

impl Pairs {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.0
            .get(key)
            .map(|v| {
                v.parse().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: v.clone(),
                })
            })
            .transpose()
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.get(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.0
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| ConfigError::BadValue {
                        key: key.to_string(),
                        value: v.clone(),
                    })
            })
            .transpose()
    }
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let p = Pairs(parse_pairs(text)?);

        let kind: String = p.require("potential.kind")?;
        let potential = match kind.as_str() {
            "gaussian-well" => PotentialSpec::GaussianWell {
                a: p.require("potential.a")?,
                b: p.require("potential.b")?,
                w: p.require("potential.w")?,
            },
            "harmonic" => PotentialSpec::Harmonic {
                omega0: p.require("potential.omega0")?,
            },
            _ => {
                return Err(ConfigError::BadValue {
                    key: "potential.kind".into(),
                    value: kind,
                })
            }
        };

        let default_grid = GridConfig::default();
        let x_max: f64 = p.get("grid.x_max")?.unwrap_or(default_grid.x_max);
        let grid = GridConfig {
            x_min: p.get("grid.x_min")?.unwrap_or(-x_max),
            x_max,
            n_points: p.require_or("grid.n_points", default_grid.n_points)?,
        };

        let d = Tolerances::default();
        let tolerances = Tolerances {
            bound: p.get("tolerances.bound")?.unwrap_or(d.bound),
            ray: p.get("tolerances.ray")?.unwrap_or(d.ray),
            ray_min_modulus: p.get("tolerances.ray_min_modulus")?.unwrap_or(d.ray_min_modulus),
            parity: p.get("tolerances.parity")?.unwrap_or(d.parity),
            stationarity: p.get("tolerances.stationarity")?.unwrap_or(d.stationarity),
            match_radius: p.get("tolerances.match_radius")?.unwrap_or(d.match_radius),
        };

        let v = ValidationConfig::default();
        let alt_grid = match p.get::<f64>("validation.alt_grid.x_max")? {
            Some(x) => Some(GridConfig {
                x_min: -x,
                x_max: x,
                n_points: p.require("validation.alt_grid.n_points")?,
            }),
            None if p.0.contains_key("validation.alt_grid.n_points") => {
                return Err(ConfigError::Missing("validation.alt_grid.x_max".into()))
            }
            None => None,
        };
        let validation = ValidationConfig {
            theta_list: p.list("validation.theta_list")?,
            alt_grid,
            cutoff_factor: p.get("validation.cutoff_factor")?.unwrap_or(v.cutoff_factor),
            sum_rule_tol: p.get("validation.sum_rule_tol")?.unwrap_or(v.sum_rule_tol),
            theta_scan_tol: p.get("validation.theta_scan_tol")?.unwrap_or(v.theta_scan_tol),
            oracle_tol: p.get("validation.oracle_tol")?.unwrap_or(v.oracle_tol),
            cross_grid_tol: p.get("validation.cross_grid_tol")?.unwrap_or(v.cross_grid_tol),
            cutoff_tol: p.get("validation.cutoff_tol")?.unwrap_or(v.cutoff_tol),
            parity_tol: p.get("validation.parity_tol")?.unwrap_or(v.parity_tol),
        };

        let run = RunConfig {
            potential,
            grid,
            theta: p.list("theta")?.ok_or_else(|| ConfigError::Missing("theta".into()))?,
            initial_state: p.get("initial_state")?,
            c_light: p.get("units.c_light")?.unwrap_or(C_LIGHT_AU),
            cutoff_sq: p.get("emission.cutoff_sq")?,
            tolerances,
            validation,
        };
        run.check()?;

        let formats = match p.0.get("output.formats") {
            Some(s) => Formats::parse(s).ok_or_else(|| ConfigError::BadValue {
                key: "output.formats".into(),
                value: s.clone(),
            })?,
            None => Formats::default(),
        };
        let output = OutputConfig {
            dir: p.get::<String>("output.dir")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
            formats,
        };
        Ok(Settings { run, output })
    }

    /// Apply `--out`, then the environment override, in that priority.
    pub fn resolve_out_dir(&mut self, flag: Option<PathBuf>, env: Option<String>) {
        if let Some(dir) = flag {
            self.output.dir = dir;
        } else if let Some(dir) = env.filter(|s| !s.is_empty()) {
            self.output.dir = PathBuf::from(dir);
        }
    }
}

impl Pairs {
    fn require_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }
}

impl RunConfig {
    /// Every precondition that can be checked without diagonalizing.
    pub fn check(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        self.grid.build()?;
        if self.theta.is_empty() {
            return invalid("theta list is empty".into());
        }
        for &t in &self.theta {
            ScalingAngle::new(t).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if self.theta.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("theta list must be strictly ascending".into());
        }
        UnitSystem::new(self.c_light).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(c) = self.cutoff_sq {
            if !(c.is_finite() && c > 0.0) {
                return invalid(format!("emission.cutoff_sq must be positive (got {c})"));
            }
        }
        match self.potential {
            PotentialSpec::GaussianWell { a, b, w } => {
                if !(a.is_finite() && b.is_finite() && w.is_finite() && w >= 0.0) {
                    return invalid("gaussian-well needs finite a, b and w >= 0".into());
                }
            }
            PotentialSpec::Harmonic { omega0 } => {
                if !(omega0.is_finite() && omega0 > 0.0) {
                    return invalid("harmonic needs omega0 > 0".into());
                }
            }
        }
        let t = &self.tolerances;
        let tols = [t.bound, t.ray, t.ray_min_modulus, t.parity, t.stationarity, t.match_radius];
        if tols.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return invalid("tolerances must be positive".into());
        }
        if let Some(list) = &self.validation.theta_list {
            for &t in list {
                ScalingAngle::new(t).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
        }
        if let Some(g) = &self.validation.alt_grid {
            g.build()?;
        }
        if !(self.validation.cutoff_factor.is_finite() && self.validation.cutoff_factor > 0.0) {
            return invalid("validation.cutoff_factor must be positive".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        self.grid.build().expect("grid checked at parse time")
    }

    pub fn units(&self) -> UnitSystem {
        UnitSystem::new(self.c_light).expect("units checked at parse time")
    }

    pub fn emission(&self) -> EmissionParams {
        EmissionParams {
            units: self.units(),
            cutoff_sq: self.cutoff_sq,
        }
    }

    pub fn angles(&self) -> Vec<ScalingAngle> {
        self.theta.iter().map(|&t| ScalingAngle::new(t).expect("theta checked at parse time")).collect()
    }

    pub fn pipeline(&self) -> Pipeline {
        Pipeline {
            potential: self.potential,
            grid: self.grid(),
            emission: self.emission(),
            tolerances: self.tolerances,
        }
    }

    pub fn require_initial_state(&self) -> Result<usize, ConfigError> {
        self.initial_state.ok_or_else(|| ConfigError::Missing("initial_state".into()))
    }

    /// The second grid of the cross-discretization check: a wider box with a
    /// finer spacing unless configured.
    pub fn alt_grid(&self) -> GridConfig {
        self.validation.alt_grid.unwrap_or_else(|| {
            let n = ((self.grid.n_points - 1) as f64 * 1.375).round() as usize + 1;
            GridConfig {
                x_min: self.grid.x_min * 1.25,
                x_max: self.grid.x_max * 1.25,
                n_points: n,
            }
        })
    }

    pub fn scan_thetas(&self) -> Vec<f64> {
        self.validation.theta_list.clone().unwrap_or_else(|| {
            let t = self.theta[0];
            if t >= 0.03 {
                vec![t - 0.03, t, t + 0.03]
            } else {
                vec![t, t + 0.03, t + 0.06]
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "potential.kind = gaussian-well\npotential.a = 0.5\npotential.b = -2.1\npotential.w = 0.1\ntheta = 0.15\n";

    #[test]
    fn minimal_config_uses_defaults() {
        let s = Settings::parse(BASE).unwrap();
        assert_eq!(s.run.potential, PotentialSpec::double_barrier());
        assert_eq!(s.run.grid, GridConfig::default());
        assert_eq!(s.run.theta, vec![0.15]);
        assert_eq!(s.run.c_light, C_LIGHT_AU);
        assert_eq!(s.output.formats, Formats::default());
        assert_eq!(s.run.initial_state, None);
    }

    #[test]
    fn comments_lists_and_overrides() {
        let text = format!("{BASE}# note\ninitial_state = 3  # second resonance\nunits.c_light = 0.0072973\noutput.formats = csv\n");
        let s = Settings::parse(&text.replace("theta = 0.15", "theta = 0.12, 0.15,0.18")).unwrap();
        assert_eq!(s.run.theta, vec![0.12, 0.15, 0.18]);
        assert_eq!(s.run.initial_state, Some(3));
        assert_eq!(s.run.c_light, 0.0072973);
        assert_eq!(s.output.formats, Formats { json: false, csv: true });
    }

    #[test]
    fn errors() {
        assert_eq!(Settings::parse("theta = 0.1\n"), Err(ConfigError::Missing("potential.kind".into())));
        assert!(matches!(Settings::parse(&format!("{BASE}grid.spacing = 2\n")), Err(ConfigError::UnknownKey { line: 6, .. })));
        assert!(matches!(Settings::parse(&format!("{BASE}theta\n")), Err(ConfigError::Syntax { .. })));
        assert!(matches!(Settings::parse(&format!("{BASE}theta = 0.2\n")), Err(ConfigError::Duplicate(_))));
        assert!(matches!(Settings::parse(&BASE.replace("0.15", "0.9")), Err(ConfigError::Invalid(_))));
        assert!(matches!(Settings::parse(&BASE.replace("0.15", "0.2, 0.1")), Err(ConfigError::Invalid(_))));
        assert!(matches!(Settings::parse(&format!("{BASE}grid.n_points = 10\n")), Err(ConfigError::Invalid(_))));
        assert!(matches!(Settings::parse(&format!("{BASE}grid.x_min = -3\ngrid.x_max = 4\n")), Err(ConfigError::Invalid(_))));
        assert!(matches!(Settings::parse(&format!("{BASE}output.formats = xml\n")), Err(ConfigError::BadValue { .. })));
        assert!(matches!(Settings::parse(&BASE.replace("0.5", "abc")), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn out_dir_priority() {
        let mut s = Settings::parse(&format!("{BASE}output.dir = a\n")).unwrap();
        s.resolve_out_dir(None, None);
        assert_eq!(s.output.dir, PathBuf::from("a"));
        s.resolve_out_dir(None, Some("b".into()));
        assert_eq!(s.output.dir, PathBuf::from("b"));
        s.resolve_out_dir(Some("c".into()), Some("b".into()));
        assert_eq!(s.output.dir, PathBuf::from("c"));
    }

    #[test]
    fn alt_grid_default_differs() {
        let s = Settings::parse(BASE).unwrap();
        let alt = s.run.alt_grid();
        assert_eq!(alt.x_max, 200.0);
        assert_eq!(alt.n_points, 1101);
    }
}
