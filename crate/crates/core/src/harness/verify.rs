//! Named checks with tolerances, trajectory checks, and verification of saved runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Tolerances;
use super::persist::load_trajectory;
use crate::error::{Error, Result};
use crate::solver::{Trajectory, WholeLineReport};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    pub passed: bool,
    /// Measured quantity compared against `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
    /// Set when the check could not run; holds the error message.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Whether the error was a configuration problem rather than a numerical failure.
    #[serde(default)]
    pub configuration_error: bool,
}

impl CheckResult {
    pub fn new(id: &str, description: &str, passed: bool, value: f64, tolerance: f64, detail: String) -> Self {
        CheckResult {
            id: id.to_string(),
            description: description.to_string(),
            passed,
            value,
            tolerance,
            detail,
            error: None,
            configuration_error: false,
        }
    }

    /// A failed check carrying the error that stopped it.
    pub fn from_error(id: &str, description: &str, e: &Error) -> Self {
        CheckResult {
            error: Some(e.to_string()),
            configuration_error: e.is_configuration(),
            ..CheckResult::new(id, description, false, f64::NAN, f64::NAN, format!("error: {e}"))
        }
    }

    /// One line: verdict, identifier, value against tolerance, and detail.
    pub fn line(&self) -> String {
        format!(
            "{} {} {}: value {:.6e} tol {:.6e}; {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.description,
            self.value,
            self.tolerance,
            self.detail
        )
    }
}

/// Aggregate of named checks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerificationSuite {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl VerificationSuite {
    pub fn new(checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        VerificationSuite { checks, passed }
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = CheckResult>) {
        self.checks.extend(checks);
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn lines(&self) -> Vec<String> {
        self.checks.iter().map(CheckResult::line).collect()
    }

    pub fn write_report(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Allowed rise of H between snapshots: the relative floor plus the Newton residual bound
/// 2R·m·max(residual, tol) per step, times the mean number of steps between snapshots.
pub fn entropy_allowance(traj: &Trajectory, tol: &Tolerances) -> f64 {
    let h0 = traj.records.first().map_or(0.0, |r| r.entropy.abs());
    let gaps = traj.records.len().saturating_sub(1).max(1) as f64;
    let steps = (traj.stats.steps as f64 / gaps).ceil().max(1.0);
    let newton = traj.stats.max_newton_residual.max(traj.config.newton_tol);
    tol.entropy_increase * h0 + steps * 2.0 * traj.config.radius * traj.config.mass * newton
}

/// H non-increasing between consecutive snapshots within [`entropy_allowance`].
pub fn entropy_monotone_check(traj: &Trajectory, tol: &Tolerances) -> CheckResult {
    let allowance = entropy_allowance(traj, tol);
    let mut worst = (f64::NEG_INFINITY, None);
    for (k, w) in traj.records.windows(2).enumerate() {
        let rise = w[1].entropy - w[0].entropy;
        if rise > worst.0 {
            worst = (rise, Some(k));
        }
    }
    let rise = worst.0.max(0.0);
    let detail = match worst.1 {
        Some(k) if rise > allowance => format!(
            "H rose from {} at t = {} to {} at t = {}",
            traj.records[k].entropy,
            traj.records[k].t,
            traj.records[k + 1].entropy,
            traj.records[k + 1].t
        ),
        _ => format!("{} snapshots", traj.records.len()),
    };
    CheckResult::new(
        "entropy-monotone",
        "entropy non-increasing between snapshots",
        rise <= allowance,
        rise,
        allowance,
        detail,
    )
}

/// ‖u(t)‖² ≤ max{m, ‖u₀‖²} + slack at every snapshot.
pub fn l2_bound_check(traj: &Trajectory, tol: &Tolerances) -> CheckResult {
    let Some(first) = traj.snapshots.first() else {
        return CheckResult::new("l2-bound", "L2 bound", true, 0.0, tol.l2_slack, "no snapshots".into());
    };
    let cap = first.m.max(first.l2_norm_sq());
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for s in &traj.snapshots {
        let ex = s.l2_norm_sq() - cap;
        if ex > worst.0 {
            worst = (ex, s.t);
        }
    }
    CheckResult::new(
        "l2-bound",
        "L2 norm bounded by max(m, initial L2 norm)",
        worst.0 <= tol.l2_slack,
        worst.0,
        tol.l2_slack,
        format!("largest excess at t = {}", worst.1),
    )
}

/// Largest excursion outside the barrier pair within the slack; trivially true without barriers.
pub fn barrier_check(traj: &Trajectory, tol: &Tolerances) -> CheckResult {
    let Some(first) = traj.snapshots.first() else {
        return CheckResult::new("barriers", "barrier sandwich", true, 0.0, 0.0, "no snapshots".into());
    };
    let allowed = tol.barrier_slack * first.max_dx() / first.m * first.radius;
    match &traj.barriers {
        None => CheckResult::new("barriers", "barrier sandwich", true, 0.0, allowed, "no barriers built".into()),
        Some(b) => {
            let ex = traj.stats.max_barrier_excess.max(traj.snapshots.iter().map(|s| b.excess(s)).fold(0.0, f64::max));
            CheckResult::new(
                "barriers",
                "barrier sandwich",
                ex <= allowed,
                ex,
                allowed,
                format!("θ = {}, c = {}, k = {}", b.theta, b.c, b.k),
            )
        }
    }
}

/// Increasing times, monotone profiles and boundary values at every snapshot.
pub fn profile_invariants_check(traj: &Trajectory) -> CheckResult {
    let tol = 1e-12 * traj.config.radius;
    match traj.check_invariants(tol) {
        Ok(()) => CheckResult::new(
            "profile-invariants",
            "monotone profiles with u = ∓R at the ends",
            true,
            0.0,
            tol,
            format!("{} snapshots", traj.snapshots.len()),
        ),
        Err(e) => CheckResult::new(
            "profile-invariants",
            "monotone profiles with u = ∓R at the ends",
            false,
            f64::NAN,
            tol,
            e.to_string(),
        ),
    }
}

/// The generic checks every bounded trajectory must pass.
pub fn trajectory_checks(traj: &Trajectory, tol: &Tolerances) -> Vec<CheckResult> {
    vec![
        profile_invariants_check(traj),
        entropy_monotone_check(traj, tol),
        l2_bound_check(traj, tol),
        barrier_check(traj, tol),
    ]
}

/// Ladder checks plus the generic checks of every rung, tagged by radius.
pub fn whole_line_checks(rep: &WholeLineReport, tol: &Tolerances) -> Vec<CheckResult> {
    let last = rep.differences.last().copied().unwrap_or(f64::NAN);
    let mut out = vec![CheckResult::new(
        "ladder",
        "ladder differences decrease and the last is small",
        rep.monotone && last <= tol.ladder,
        last,
        tol.ladder,
        format!("differences {:?}", rep.differences),
    )];
    for t in &rep.trajectories {
        for mut c in trajectory_checks(t, tol) {
            c.id = format!("{}@R={}", c.id, t.config.radius);
            out.push(c);
        }
    }
    out
}

/// Trajectory directories under `target`: the directory itself when it holds `config.json`,
/// otherwise every descendant directory that does.
pub fn find_trajectories(target: &Path) -> Result<Vec<PathBuf>> {
    if !target.exists() {
        return Err(Error::Config(format!("target {} does not exist", target.display())));
    }
    let mut out = Vec::new();
    let mut stack = vec![target.to_path_buf()];
    while let Some(dir) = stack.pop() {
        if dir.join("config.json").is_file() {
            out.push(dir.clone());
        }
        let mut subs: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir() && p.file_name().map_or(true, |n| n != "snapshots"))
            .collect();
        subs.sort();
        stack.extend(subs.into_iter().rev());
    }
    if out.is_empty() {
        return Err(Error::Config(format!("no trajectory found under {}", target.display())));
    }
    out.sort();
    Ok(out)
}

/// Generic checks on every saved trajectory under the targets, tagged by directory.
pub fn verify_targets(targets: &[PathBuf], tol: &Tolerances) -> Result<VerificationSuite> {
    let mut suite = VerificationSuite::new(Vec::new());
    for t in targets {
        for dir in find_trajectories(t)? {
            let traj = load_trajectory(&dir)?;
            let tag = dir.display().to_string();
            suite.extend(trajectory_checks(&traj, tol).into_iter().map(|mut c| {
                c.id = format!("{}@{}", c.id, tag);
                c
            }));
        }
    }
    Ok(suite)
}
