//! Whole-line problems through a ladder of truncations [a_R, b_R] with u = ∓R at the ends.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{simulate_with, Mode, SolverConfig, Trajectory};
use crate::equilibria::MobilitySpec;
use crate::error::{Error, Result};
use crate::numerics::{bisect, CdfMesh};
use crate::transform::Profile;

/// Initial densities on the whole line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WholeLineDatum {
    /// mass·N(0, width²).
    Gaussian { mass: f64, width: f64 },
    /// f_{∞,θ} on ℝ, θ > 0.
    Steady { gamma: f64, theta: f64 },
}

impl WholeLineDatum {
    pub fn density(&self, r: f64) -> f64 {
        match *self {
            WholeLineDatum::Gaussian { mass, width } => {
                let z = r / width;
                mass * (-0.5 * z * z).exp() / (width * (2.0 * std::f64::consts::PI).sqrt())
            }
            WholeLineDatum::Steady { gamma, theta } => MobilitySpec::bosonic(gamma)
                .steady_density(theta, r)
                .unwrap_or(0.0),
        }
    }

    /// Half-width beyond which the density is negligible in double precision.
    fn support(&self) -> f64 {
        match *self {
            WholeLineDatum::Gaussian { width, .. } => 40.0 * width,
            WholeLineDatum::Steady { .. } => 40.0,
        }
    }
}

/// Nodes r_j on [−R_max, R_max] shared by every rung of the ladder, with cdf values M0(r_j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderGrid {
    pub radii: Vec<f64>,
    pub r: Vec<f64>,
    pub cdf: Vec<f64>,
    pub total_mass: f64,
}

impl LadderGrid {
    /// Index range of the nodes of rung R.
    pub fn range(&self, radius: f64) -> (usize, usize) {
        let a = self.r.iter().position(|&v| v == -radius).expect("rung node");
        let b = self.r.iter().position(|&v| v == radius).expect("rung node");
        (a, b)
    }

    /// Initial profile of rung R: x = M0(r) − M0(−R), u = r.
    pub fn profile(&self, radius: f64, gamma: f64) -> Result<Profile> {
        let (a, b) = self.range(radius);
        let base = self.cdf[a];
        let m = self.cdf[b] - base;
        let mut x: Vec<f64> = self.cdf[a..=b].iter().map(|c| c - base).collect();
        *x.last_mut().unwrap() = m;
        let mut p = Profile::new(0.0, m, radius, gamma, x, self.r[a..=b].to_vec())?;
        p.whole_line = true;
        Ok(p)
    }
}

/// Grid equidistributing Ψ(r) = M0(r) + m·(r + R_max)/(2R_max) with nodes at every ±R of the ladder.
pub fn graded_ladder_grid(datum: &WholeLineDatum, radii: &[f64], nodes: usize) -> Result<LadderGrid> {
    let l = datum.support();
    let f = |r: f64| datum.density(r);
    let mesh = CdfMesh::new(&f, -l, l, 20_000)?;
    let m = mesh.mass();
    let rmax = *radii.last().unwrap();
    let psi = |r: f64| mesh.eval(&f, r) + m * (r + rmax) / (2.0 * rmax);
    let mut breaks: Vec<f64> = radii.iter().rev().map(|r| -r).collect();
    breaks.extend(radii.iter().copied());
    let total = psi(rmax) - psi(-rmax);
    let mut r = vec![-rmax];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (pa, pb) = (psi(a), psi(b));
        let cells = (((pb - pa) / total) * (nodes - 1) as f64).round().max(2.0) as usize;
        for k in 1..cells {
            let target = pa + (pb - pa) * k as f64 / cells as f64;
            r.push(bisect(|z| psi(z) - target, a, b, 1e-15 * rmax, 200));
        }
        r.push(b);
    }
    let cdf: Vec<f64> = r.iter().map(|&z| mesh.eval(&f, z)).collect();
    if let Some(j) = cdf.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Config(format!(
            "datum tail too thin to resolve the ladder in double precision near r = {}",
            r[j]
        )));
    }
    Ok(LadderGrid {
        radii: radii.to_vec(),
        r,
        cdf,
        total_mass: m,
    })
}

/// Ladder outcome: consecutive sup-differences on the window of the smallest rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WholeLineReport {
    pub radii: Vec<f64>,
    /// sup over snapshots and window nodes of |u^{(R_k)} − u^{(R_{k+1})}|.
    pub differences: Vec<f64>,
    pub monotone: bool,
    pub converged: bool,
    pub tolerance: f64,
    /// Largest ‖u(t)‖² − max{m, ‖u₀‖²} over all rungs and snapshots.
    pub l2_excess: f64,
    pub trajectories: Vec<Trajectory>,
}

/// Runs the bounded solver on every rung of `cfg.mode`'s ladder (in parallel) and compares them.
pub fn whole_line_simulate(cfg: &SolverConfig, datum: &WholeLineDatum, tol: f64) -> Result<WholeLineReport> {
    let radii = match &cfg.mode {
        Mode::WholeLine { r_ladder } => r_ladder.clone(),
        Mode::Bounded => return Err(Error::Config("whole-line run needs mode = whole_line".into())),
    };
    cfg.validate()?;
    let grid = graded_ladder_grid(datum, &radii, cfg.nodes)?;
    let spec = MobilitySpec::bosonic(cfg.gamma);
    let top = grid.profile(*radii.last().unwrap(), cfg.gamma)?;
    super::admissibility_check(&top, true, false, &spec)?.into_result()?;
    let runs: Vec<Result<Trajectory>> = radii
        .par_iter()
        .map(|&radius| {
            let u0 = grid.profile(radius, cfg.gamma)?;
            let mut c = cfg.clone();
            c.radius = radius;
            c.mass = u0.m;
            c.nodes = u0.len();
            c.mode = Mode::Bounded;
            simulate_with(&c, &u0, None).map_err(|e| e.at_stage(&format!("rung R = {radius}")))
        })
        .collect();
    let trajectories: Vec<Trajectory> = runs.into_iter().collect::<Result<_>>()?;
    let (w0, w1) = grid.range(radii[0]);
    let mut differences = Vec::new();
    for k in 0..radii.len() - 1 {
        let (a0, _) = grid.range(radii[k]);
        let (a1, _) = grid.range(radii[k + 1]);
        let (ta, tb) = (&trajectories[k], &trajectories[k + 1]);
        let mut worst = 0.0f64;
        for (sa, sb) in ta.snapshots.iter().zip(tb.snapshots.iter()) {
            for j in w0..=w1 {
                worst = worst.max((sa.u[j - a0] - sb.u[j - a1]).abs());
            }
        }
        differences.push(worst);
    }
    let mut l2_excess = f64::NEG_INFINITY;
    for t in &trajectories {
        let cap = t.snapshots[0].m.max(t.snapshots[0].l2_norm_sq());
        for s in &t.snapshots {
            l2_excess = l2_excess.max(s.l2_norm_sq() - cap);
        }
    }
    let monotone = differences.windows(2).all(|w| w[1] < w[0]);
    let converged = differences.last().map_or(false, |&d| d <= tol);
    Ok(WholeLineReport {
        radii,
        differences,
        monotone,
        converged,
        tolerance: tol,
        l2_excess,
        trajectories,
    })
}

impl WholeLineReport {
    /// Error unless the ladder differences decrease.
    pub fn into_result(self) -> Result<Self> {
        if !self.monotone {
            return Err(Error::NonConvergence(format!(
                "ladder differences do not decrease: {:?}",
                self.differences
            )));
        }
        Ok(self)
    }
}
