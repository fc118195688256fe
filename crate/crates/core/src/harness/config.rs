//! Scenario files: a TOML document with one `[tolerances]` table and a list of `[[scenario]]` tables.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::datum::{Datum, Geometry};
use crate::equilibria::{critical_mass, MobilitySpec};
use crate::error::{Error, Result};
use crate::solver::{DtPolicy, Mode, Scheme, SolverConfig, WholeLineDatum};
use crate::transform::{LevelPolicy, Profile};

/// Every tolerance used by checks and acceptance criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest sup-norm drift of a discretized equilibrium over the run.
    pub stationarity_drift: f64,
    /// Smallest drift reduction per grid halving.
    pub stationarity_ratio: f64,
    /// |x_p(t_end) − 0.2·m_c| bound, as a fraction of m_c.
    pub condensate_fraction: f64,
    /// min_slope below which a snapshot counts as singular for the profile fit.
    pub singular_slope: f64,
    /// Relative tolerance on the blow-up exponent −2/γ.
    pub profile_exponent: f64,
    /// Relative tolerance on the blow-up prefactor (2/γ)^{1/γ}.
    pub profile_prefactor: f64,
    /// Entropy identity defect relative to H(0) − H(t_end).
    pub entropy_defect: f64,
    /// Smallest empirical order of the entropy identity defect.
    pub entropy_order: f64,
    /// Allowed entropy increase between snapshots, relative to |H(0)|.
    pub entropy_increase: f64,
    /// Smallest min ∂ₓu(t)/min ∂ₓu(0) in γ = 2 runs.
    pub gamma2_slope_ratio: f64,
    /// Density-ordering tolerance c in c·(Δx + dt).
    pub comparison_constant: f64,
    /// Zero band c in c·(Δx + dt) for sign-change counts.
    pub intersection_constant: f64,
    /// Additive slack of the L² bound.
    pub l2_slack: f64,
    /// Bound on the last whole-line ladder difference.
    pub ladder: f64,
    /// Sup-norm tolerance on f away from r = 0 in the transform round trip, per unit of Δx·max|f'|.
    pub round_trip: f64,
    /// Barrier confinement slack in units of (max Δx / m)·R.
    pub barrier_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            stationarity_drift: 1e-3,
            stationarity_ratio: 1.8,
            condensate_fraction: 0.05,
            singular_slope: 1e-6,
            profile_exponent: 0.05,
            profile_prefactor: 0.10,
            entropy_defect: 1e-2,
            entropy_order: 1.0,
            entropy_increase: 1e-10,
            gamma2_slope_ratio: 0.5,
            comparison_constant: 1.0,
            intersection_constant: 0.01,
            l2_slack: 1e-8,
            ladder: 1e-3,
            round_trip: 4.0,
            barrier_slack: 4.0,
        }
    }
}

impl Tolerances {
    /// Applies the entries of a TOML table of overrides (same keys as `[tolerances]`).
    pub fn with_overrides(&self, overrides: &toml::Table) -> Result<Tolerances> {
        let mut base = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        for (k, v) in overrides {
            if !base.contains_key(k) {
                return Err(Error::Config(format!("unknown tolerance '{k}'")));
            }
            base.insert(k.clone(), v.clone());
        }
        toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn from_override_file(&self, path: &Path) -> Result<Tolerances> {
        let text = std::fs::read_to_string(path)?;
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let inner = match table.get("tolerances") {
            Some(toml::Value::Table(t)) => t.clone(),
            _ => table,
        };
        self.with_overrides(&inner)
    }
}

/// Per-scenario switches for the optional pipeline stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Toggles {
    /// Build barriers and check the sandwich at every step.
    pub barriers: bool,
    /// Write snapshot files (config and diagnostics are always written).
    pub snapshots: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            barriers: true,
            snapshots: true,
        }
    }
}

/// One `[[scenario]]` table as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub gamma: f64,
    pub radius: f64,
    /// Absolute mass; exclusive with `mass_ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// Mass as a multiple of m_c(R).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_ratio: Option<f64>,
    pub nodes: usize,
    pub t_end: f64,
    /// Defaults to the adaptive policy starting at Δx.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<DtPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_interval: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    #[serde(default)]
    pub scheme: Scheme,
    /// Present for whole-line scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_ladder: Option<Vec<f64>>,
    /// Bounded-domain datum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datum: Option<Datum>,
    /// Whole-line datum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub whole_line_datum: Option<WholeLineDatum>,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

/// Initial data of a resolved scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum InitialData {
    Bounded { datum: Datum },
    WholeLine { datum: WholeLineDatum },
}

/// A scenario with its mass and solver configuration resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub config: SolverConfig,
    pub initial: InitialData,
    pub toggles: Toggles,
    pub out_dir: Option<PathBuf>,
}

impl ScenarioSpec {
    pub fn resolve(&self, tol: &Tolerances) -> Result<Scenario> {
        let ctx = |e: Error| e.at_stage(&format!("scenario '{}'", self.name));
        let spec = MobilitySpec::bosonic(self.gamma);
        let mass = match (self.mass, self.mass_ratio) {
            (Some(m), None) => m,
            (None, Some(k)) => {
                let mc = critical_mass(&spec, self.radius)
                    .map_err(ctx)?
                    .value
                    .ok_or_else(|| ctx(Error::Config("m_c(R) is infinite; give the mass directly".into())))?;
                k * mc
            }
            _ => return Err(ctx(Error::Config("give exactly one of mass and mass_ratio".into()))),
        };
        let mut cfg = SolverConfig::new(self.gamma, self.radius, mass, self.nodes, self.t_end);
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        cfg.sigma = self.sigma;
        if let Some(t) = self.newton_tol {
            cfg.newton_tol = t;
        }
        cfg.snapshot_interval = self.snapshot_interval;
        if let Some(s) = self.snapshot_stride {
            cfg.snapshot_stride = s;
        }
        cfg.scheme = self.scheme;
        cfg.barrier_slack = tol.barrier_slack;
        cfg.check_barriers = self.toggles.barriers;
        let initial = match (&self.r_ladder, &self.datum, &self.whole_line_datum) {
            (None, Some(d), None) => InitialData::Bounded { datum: d.clone() },
            (Some(ladder), None, Some(d)) => {
                cfg.mode = Mode::WholeLine { r_ladder: ladder.clone() };
                InitialData::WholeLine { datum: d.clone() }
            }
            _ => {
                return Err(ctx(Error::Config(
                    "bounded scenarios need `datum`; whole-line scenarios need `r_ladder` and `whole_line_datum`".into(),
                )))
            }
        };
        cfg.validate().map_err(ctx)?;
        Ok(Scenario {
            name: self.name.clone(),
            config: cfg,
            initial,
            toggles: self.toggles.clone(),
            out_dir: self.out_dir.clone(),
        })
    }
}

impl Scenario {
    /// Initial profile of a bounded scenario.
    pub fn initial_profile(&self) -> Result<Profile> {
        match &self.initial {
            InitialData::Bounded { datum } => datum.resolve(&Geometry {
                gamma: self.config.gamma,
                radius: self.config.radius,
                mass: self.config.mass,
                nodes: self.config.nodes,
            }),
            InitialData::WholeLine { .. } => Err(Error::Config(format!(
                "scenario '{}' is whole-line; its rungs carry their own profiles",
                self.name
            ))),
        }
    }

    pub fn level(&self) -> LevelPolicy {
        self.config.level
    }
}

/// A parsed config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub scenario: Vec<ScenarioSpec>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Resolved scenarios; names must be unique.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        let mut seen = std::collections::HashSet::new();
        for s in &self.scenario {
            if !seen.insert(s.name.as_str()) {
                return Err(Error::Config(format!("duplicate scenario name '{}'", s.name)));
            }
        }
        self.scenario.iter().map(|s| s.resolve(&self.tolerances)).collect()
    }
}
