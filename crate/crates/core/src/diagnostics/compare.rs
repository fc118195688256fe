//! Paired-trajectory checks: density ordering, translate sign changes, and non-increasing
//! intersection counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::interp_linear;
use crate::solver::Trajectory;
use crate::transform::{
    decompose, sign_changes, sign_changes_with, DensityMeasure, LevelPolicy, Profile, SIGN_ZERO_TOL,
};

/// Result of [`comparison_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub passed: bool,
    /// Largest (f_A − f_B)/max(1, f_B) over snapshots and nodes.
    pub max_violation: f64,
    pub tolerance: f64,
    /// (t, r) of the largest violation.
    pub witness: Option<(f64, f64)>,
    /// Translates u_B(· + y) checked for a single crossing with u_A.
    pub translate_checks: usize,
    pub translate_failures: usize,
}

impl ComparisonReport {
    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            return Ok(self);
        }
        let (t, r) = self.witness.unwrap_or((f64::NAN, f64::NAN));
        Err(Error::InvariantViolation(format!(
            "density ordering violated by {:e} (tol {:e}) at t = {t}, r = {r}; {} of {} translate checks failed",
            self.max_violation, self.tolerance, self.translate_failures, self.translate_checks
        )))
    }
}

/// f_B at r; +∞ inside B's innermost node on a side where B carries an atom.
fn density_at(d: &DensityMeasure, r: f64) -> f64 {
    let s = d.split();
    let (rs, fs) = if r < 0.0 { (&d.r[..s], &d.f[..s]) } else { (&d.r[s..], &d.f[s..]) };
    if rs.is_empty() {
        return if d.x_p > 0.0 { f64::INFINITY } else { 0.0 };
    }
    let inner = if r < 0.0 { *rs.last().unwrap() } else { rs[0] };
    if r.abs() < inner.abs() && d.unbounded {
        return f64::INFINITY;
    }
    interp_linear(rs, fs, r)
}

fn check_translates(a: &Profile, b: &Profile) -> (usize, usize) {
    let gap = b.m - a.m;
    if !(gap > 1e-9 * b.m) {
        return (0, 0);
    }
    let mut failures = 0;
    let shifts = 5;
    for k in 1..=shifts {
        let y = gap * k as f64 / (shifts + 1) as f64;
        let w: Vec<f64> = a.x.iter().zip(a.u.iter()).map(|(x, u)| u - b.eval(x + y)).collect();
        if sign_changes(&w) != 1 {
            failures += 1;
        }
    }
    (shifts, failures)
}

/// Checks f_A ≤ f_B + tol·max(1, f_B) at every snapshot (matched by index) and node of A outside
/// both grid-scaled level bands, and, when m_B > m_A, that u_A − u_B(· + y) changes sign exactly
/// once for interior shifts y.
pub fn comparison_check(a: &Trajectory, b: &Trajectory, tol: f64) -> Result<ComparisonReport> {
    let level = LevelPolicy::default();
    let mut worst = (f64::NEG_INFINITY, None);
    let (mut checks, mut failures) = (0, 0);
    for (sa, sb) in a.snapshots.iter().zip(b.snapshots.iter()) {
        if (sa.t - sb.t).abs() > 1e-9 * sa.t.abs().max(1.0) {
            return Err(Error::Validation(format!("snapshot times differ: {} vs {}", sa.t, sb.t)));
        }
        let da = decompose(sa, level)?;
        let db = decompose(sb, level)?;
        let band = da.level_tol.max(db.level_tol);
        for (r, fa) in da.r.iter().zip(da.f.iter()) {
            if r.abs() <= band {
                continue;
            }
            let fb = density_at(&db, *r);
            if !fb.is_finite() {
                continue;
            }
            let v = (fa - fb) / fb.max(1.0);
            if v > worst.0 {
                worst = (v, Some((sa.t, *r)));
            }
        }
        let (c, f) = check_translates(sa, sb);
        checks += c;
        failures += f;
    }
    let max_violation = worst.0.max(0.0);
    Ok(ComparisonReport {
        passed: max_violation <= tol && failures == 0,
        max_violation,
        tolerance: tol,
        witness: if max_violation > 0.0 { worst.1 } else { None },
        translate_checks: checks,
        translate_failures: failures,
    })
}

/// Result of [`intersection_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub passed: bool,
    pub times: Vec<f64>,
    /// Z[u_A − u_B] on the window at each snapshot.
    pub counts: Vec<usize>,
    /// Snapshot indices (k, k+1) of the first increase.
    pub offending: Option<(usize, usize)>,
    /// Whether u_A − u_B, at each window end, either vanishes at every snapshot or keeps one strict sign.
    pub lateral_ok: bool,
}

impl IntersectionReport {
    pub fn into_result(self) -> Result<Self> {
        match self.offending {
            None => Ok(self),
            Some((i, j)) => Err(Error::InvariantViolation(format!(
                "intersection count rose from {} at t = {} to {} at t = {}",
                self.counts[i], self.times[i], self.counts[j], self.times[j]
            ))),
        }
    }
}

/// Absolute floor for |u_A − u_B| below which a sample counts as zero (solver noise).
pub const INTERSECTION_NOISE_FLOOR: f64 = 1e-8;

/// u_B(x) with the local bound ½·max|Δ²U_B| on the error of linear interpolation at x.
fn eval_with_bound(b: &Profile, x: f64) -> (f64, f64) {
    let n = b.len();
    let j = crate::numerics::locate(&b.x, x).min(n - 2);
    let d2 = |i: usize| {
        if i == 0 || i + 1 >= n {
            0.0
        } else {
            (b.u[i + 1] - 2.0 * b.u[i] + b.u[i - 1]).abs()
        }
    };
    let exact = x == b.x[j] || x == b.x[j + 1];
    (b.eval(x), if exact { 0.0 } else { 0.5 * d2(j).max(d2(j + 1)) })
}

/// Z[u_A(t) − u_B(t)] on the nodes of A inside `window`, required non-increasing in t.
///
/// A sample counts as zero when |w| is within 10⁻¹⁰·max|w|, the interpolation bound of u_B at
/// that node, the noise floor scaled by R, or the discretization allowance `tol` (both profiles
/// then agree to resolution, for instance on a shared condensate plateau).
pub fn intersection_check(
    a: &Trajectory,
    b: &Trajectory,
    window: (f64, f64),
    tol: f64,
) -> Result<IntersectionReport> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::Validation(format!("empty window [{lo}, {hi}]")));
    }
    let mut times = Vec::new();
    let mut counts = Vec::new();
    let mut ends: Vec<(f64, f64)> = Vec::new();
    for (sa, sb) in a.snapshots.iter().zip(b.snapshots.iter()) {
        let floor = (INTERSECTION_NOISE_FLOOR * sa.radius.max(sb.radius)).max(tol);
        let mut xs = vec![lo];
        xs.extend(sa.x.iter().copied().filter(|x| *x > lo && *x < hi));
        xs.push(hi);
        let samples: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| {
                let (ub, bound) = eval_with_bound(sb, x);
                (sa.eval(x) - ub, bound)
            })
            .collect();
        let scale = samples.iter().fold(0.0f64, |m, s| m.max(s.0.abs()));
        let rel = SIGN_ZERO_TOL * scale;
        let w: Vec<f64> = samples
            .iter()
            .map(|&(v, bound)| if v.abs() <= rel.max(bound).max(floor) { 0.0 } else { v })
            .collect();
        ends.push((w[0], *w.last().unwrap()));
        times.push(sa.t);
        counts.push(sign_changes_with(&w, 0.0));
    }
    let offending = counts.windows(2).position(|c| c[1] > c[0]).map(|k| (k, k + 1));
    let sgn = |v: f64| {
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };
    let steady_end = |pick: fn(&(f64, f64)) -> f64| {
        let s0 = sgn(pick(&ends[0]));
        ends.iter().all(|e| sgn(pick(e)) == s0)
    };
    let lateral_ok = ends.is_empty() || (steady_end(|e| e.0) && steady_end(|e| e.1));
    Ok(IntersectionReport {
        passed: offending.is_none(),
        times,
        counts,
        offending,
        lateral_ok,
    })
}
