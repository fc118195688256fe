//! Scenario pipeline (admissibility, barriers, simulation, checks, persistence) and parallel sweeps.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{InitialData, Scenario, Tolerances};
use super::datum::Datum;
use super::persist::save_trajectory;
use super::verify::{trajectory_checks, whole_line_checks, CheckResult};
use crate::equilibria::{critical_mass, MobilitySpec};
use crate::error::{Error, Result};
use crate::solver::{
    admissibility_check, build_barriers, graded_ladder_grid, simulate_with, whole_line_simulate, AdmissibilityReport,
    Mode, Trajectory, WholeLineDatum, WholeLineReport,
};

/// Everything a scenario run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub name: String,
    pub admissibility: Option<AdmissibilityReport>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
    #[serde(skip)]
    pub whole_line: Option<WholeLineReport>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl ScenarioOutcome {
    /// Trajectories of the run: one for bounded scenarios, one per rung for whole-line scenarios.
    pub fn trajectories(&self) -> Vec<&Trajectory> {
        match (&self.trajectory, &self.whole_line) {
            (Some(t), _) => vec![t],
            (None, Some(w)) => w.trajectories.iter().collect(),
            _ => Vec::new(),
        }
    }
}

/// Runs one scenario end to end. Outputs go to `out` (or the scenario's own directory) when given.
pub fn run_scenario(s: &Scenario, tol: &Tolerances, out: Option<&Path>) -> Result<ScenarioOutcome> {
    let tag = |stage: &str| format!("scenario '{}' at {stage}", s.name);
    let out_dir: Option<PathBuf> = out.map(Path::to_path_buf).or_else(|| s.out_dir.clone());
    let spec = MobilitySpec::bosonic(s.config.gamma);
    let mut outcome = match &s.initial {
        InitialData::Bounded { datum } => {
            let u0 = s.initial_profile().map_err(|e| e.at_stage(&tag("datum")))?;
            let allow_flat = matches!(datum, Datum::Equilibrium { theta: None });
            let adm = admissibility_check(&u0, false, allow_flat, &spec)
                .and_then(|r| r.into_result())
                .map_err(|e| e.at_stage(&tag("admissibility")))?;
            let barriers = if s.toggles.barriers {
                let btol = s.config.barrier_slack * u0.max_dx() / u0.m * u0.radius;
                Some(build_barriers(&u0, &spec, btol).map_err(|e| e.at_stage(&tag("barriers")))?)
            } else {
                None
            };
            let traj = simulate_with(&s.config, &u0, barriers).map_err(|e| e.at_stage(&tag("simulate")))?;
            let checks = trajectory_checks(&traj, tol);
            ScenarioOutcome {
                name: s.name.clone(),
                admissibility: Some(adm),
                trajectory: Some(traj),
                whole_line: None,
                passed: checks.iter().all(|c| c.passed),
                checks,
            }
        }
        InitialData::WholeLine { datum } => {
            let adm = whole_line_admissibility(s, datum, &spec).map_err(|e| e.at_stage(&tag("admissibility")))?;
            let rep = whole_line_simulate(&s.config, datum, tol.ladder).map_err(|e| e.at_stage(&tag("simulate")))?;
            let checks = whole_line_checks(&rep, tol);
            ScenarioOutcome {
                name: s.name.clone(),
                admissibility: Some(adm),
                trajectory: None,
                passed: checks.iter().all(|c| c.passed),
                checks,
                whole_line: Some(rep),
            }
        }
    };
    if let Some(dir) = out_dir {
        persist_outcome(s, &mut outcome, &dir).map_err(|e| e.at_stage(&tag("persistence")))?;
    }
    Ok(outcome)
}

/// Whole-line clauses on the truncation to the largest radius of the ladder.
fn whole_line_admissibility(s: &Scenario, datum: &WholeLineDatum, spec: &MobilitySpec) -> Result<AdmissibilityReport> {
    let Mode::WholeLine { r_ladder } = &s.config.mode else {
        return Err(Error::Config("whole-line scenario without a radius ladder".into()));
    };
    let top = *r_ladder.last().ok_or_else(|| Error::Config("empty radius ladder".into()))?;
    let grid = graded_ladder_grid(datum, r_ladder, s.config.nodes)?;
    admissibility_check(&grid.profile(top, s.config.gamma)?, true, false, spec)?.into_result()
}

fn persist_outcome(s: &Scenario, outcome: &mut ScenarioOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("scenario.json"), serde_json::to_string_pretty(s)?)?;
    if let Some(t) = &outcome.trajectory {
        save_trajectory(t, dir, s.toggles.snapshots)?;
    }
    if let Some(w) = &outcome.whole_line {
        for t in &w.trajectories {
            save_trajectory(t, &dir.join(format!("R{}", t.config.radius)), s.toggles.snapshots)?;
        }
    }
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(outcome)?)?;
    Ok(())
}

/// One row of a sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub name: String,
    pub gamma: f64,
    pub mass: f64,
    /// m/m_c(R); empty when m_c(R) is infinite.
    pub mass_ratio: Option<f64>,
    pub passed: bool,
    /// x_p at the last snapshot.
    pub x_p_final: Option<f64>,
    /// x_p beyond its grid bracket at the last snapshot.
    pub condensed: Option<bool>,
    pub error: Option<String>,
}

/// Sweep results in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    /// CSV of (γ, m/m_c, x_p_final, condensed) over the rows that ran.
    pub fn condensation_map_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["name", "gamma", "mass_ratio", "x_p_final", "condensed"])?;
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
            wr.write_record([
                r.name.clone(),
                r.gamma.to_string(),
                opt(r.mass_ratio),
                opt(r.x_p_final),
                r.condensed.map_or(String::new(), |c| c.to_string()),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Runs scenarios on `jobs` threads; a failing scenario is recorded and the others continue.
/// Outputs go to `out/<name>` when `out` is given.
pub fn sweep(scenarios: &[Scenario], tol: &Tolerances, jobs: usize, out: Option<&Path>) -> Result<SweepSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let rows = pool.install(|| {
        scenarios
            .par_iter()
            .map(|s| {
                let dir = out.map(|o| o.join(&s.name));
                let spec = MobilitySpec::bosonic(s.config.gamma);
                let mc = critical_mass(&spec, s.config.radius).ok().and_then(|r| r.value);
                let mut row = SweepRow {
                    name: s.name.clone(),
                    gamma: s.config.gamma,
                    mass: s.config.mass,
                    mass_ratio: mc.map(|mc| s.config.mass / mc),
                    passed: false,
                    x_p_final: None,
                    condensed: None,
                    error: None,
                };
                match run_scenario(s, tol, dir.as_deref()) {
                    Ok(o) => {
                        row.passed = o.passed;
                        if let Some(r) = o.trajectory.as_ref().and_then(|t| t.records.last()) {
                            row.x_p_final = Some(r.x_p);
                            row.condensed = Some(r.x_p_lo > 0.0);
                        }
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                row
            })
            .collect()
    });
    Ok(SweepSummary { rows })
}
