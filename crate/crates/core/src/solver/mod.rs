//! Fully implicit time integration of F_σ(u, ∂ₜu, ∂ₓu, ∂ₓ²u) = 0 on [0, m] with u = ∓R at the ends.

pub mod barriers;
pub mod flux;
pub mod whole_line;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::equilibria::MobilitySpec;
use crate::error::{Error, Result};
use crate::numerics::{first_derivative_weights, isotonic_project, second_derivative_weights, solve_tridiagonal};
use crate::transform::{LevelPolicy, Profile};

pub use barriers::{admissibility_check, build_barriers, initial_speed, AdmissibilityReport, BarrierPair, Clause};
pub use whole_line::{graded_ladder_grid, whole_line_simulate, LadderGrid, WholeLineDatum, WholeLineReport};

/// F(z, α, p, q) = |p|^γ α − |p|^{γ−2} q + z(1 + |p|^γ).
pub fn residual_f(z: f64, alpha: f64, p: f64, q: f64, gamma: f64) -> f64 {
    let ap = p.abs();
    let pg = ap.powf(gamma);
    pg * alpha - ap.powf(gamma - 2.0) * q + z * (1.0 + pg)
}

/// F_σ(z, α, p, q) = |p|^γ α − (|p| + σ)^{γ−2} q + z(1 + |p|^γ).
pub fn residual_f_sigma(z: f64, alpha: f64, p: f64, q: f64, gamma: f64, sigma: f64) -> f64 {
    let ap = p.abs();
    let pg = ap.powf(gamma);
    pg * alpha - (ap + sigma).powf(gamma - 2.0) * q + z * (1.0 + pg)
}

/// Coefficients of the row-scaled residual F_σ/(1+|p|^γ) = A·α − B·q + z and their p-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub da: f64,
    pub b: f64,
    pub db: f64,
}

/// A = |p|^γ/(1+|p|^γ), B = (|p|+σ)^{γ−2}/(1+|p|^γ), evaluated without overflow for large |p|.
pub fn coefficients(p: f64, gamma: f64, sigma: f64) -> Coefficients {
    let ap = p.abs();
    let sg = if p < 0.0 { -1.0 } else { 1.0 };
    let ps = ap + sigma;
    let (a, b, pg1_over) = if ap <= 1.0 {
        let pg = ap.powf(gamma);
        let den = 1.0 + pg;
        // γ|p|^{γ−1}/(1+|p|^γ)
        let g1 = if ap == 0.0 { 0.0 } else { gamma * pg / ap / den };
        (pg / den, ps.powf(gamma - 2.0) / den, g1)
    } else {
        let inv = ap.powf(-gamma);
        let den = 1.0 + inv;
        let a = 1.0 / den;
        let b = (ps / ap).powf(gamma - 2.0) / (ap * ap) / den;
        (a, b, gamma / ap * a)
    };
    let da = sg * pg1_over * (1.0 - a);
    let q_term = if gamma == 2.0 {
        0.0
    } else if ps == 0.0 {
        // (γ−2)(|p|+σ)^{γ−3} B-relative term; finite only for γ ≥ 3.
        if gamma >= 3.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (gamma - 2.0) / ps
    };
    let db = if b == 0.0 { 0.0 } else { sg * b * (q_term - pg1_over) };
    Coefficients { a, da, b, db }
}

/// Time-step control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DtPolicy {
    Fixed { dt: f64 },
    /// Start at `dt0`; double after ≤ 3 Newton iterations, halve on failure; stay within [dt_min, dt_max].
    Adaptive { dt0: f64, dt_min: f64, dt_max: f64 },
}

impl DtPolicy {
    pub fn initial(&self) -> f64 {
        match *self {
            DtPolicy::Fixed { dt } => dt,
            DtPolicy::Adaptive { dt0, .. } => dt0,
        }
    }
}

/// Spatial discretization of the diffusion term B_σ(∂ₓu)·∂ₓ²u.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// ∂ₓP_σ(∂ₓu) as a difference of cell pressures: a monotone scheme whose steps decrease the
    /// discrete entropy for any dt.
    #[default]
    Conservative,
    /// B_σ(p_i)·q_i with centered p_i and the 3-point q_i.
    Centered,
}

/// Domain mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Bounded,
    WholeLine { r_ladder: Vec<f64> },
}

/// Solver configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub gamma: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub mass: f64,
    pub nodes: usize,
    /// Regularization σ; `None` selects σ = Δx for 2 < γ < 3 and σ = 0 otherwise.
    pub sigma: Option<f64>,
    pub dt: DtPolicy,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub t_end: f64,
    /// Snapshot every `snapshot_stride` multiples of the initial time step.
    pub snapshot_stride: usize,
    /// Snapshot spacing in time; overrides `snapshot_stride` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_interval: Option<f64>,
    pub mode: Mode,
    #[serde(default)]
    pub scheme: Scheme,
    /// Number of dt halvings allowed within one step before a hard failure.
    pub max_halvings: usize,
    /// Barrier confinement slack as a multiple of (max Δx / m)·R.
    pub barrier_slack: f64,
    pub check_barriers: bool,
    pub level: LevelPolicy,
}

impl SolverConfig {
    /// Defaults for a bounded run: dt = Δx adaptive, Newton tolerance 1e−10 with at most 25 iterations.
    pub fn new(gamma: f64, radius: f64, mass: f64, nodes: usize, t_end: f64) -> Self {
        let dx = mass / (nodes.max(2) - 1) as f64;
        SolverConfig {
            gamma,
            radius,
            mass,
            nodes,
            sigma: None,
            dt: DtPolicy::Adaptive {
                dt0: dx,
                dt_min: dx * 1e-6,
                dt_max: 64.0 * dx,
            },
            newton_tol: 1e-10,
            newton_max_iter: 25,
            t_end,
            snapshot_stride: 10,
            snapshot_interval: None,
            mode: Mode::Bounded,
            scheme: Scheme::default(),
            max_halvings: 20,
            barrier_slack: 4.0,
            check_barriers: true,
            level: LevelPolicy::default(),
        }
    }

    pub fn with_fixed_dt(mut self, dt: f64) -> Self {
        self.dt = DtPolicy::Fixed { dt };
        self
    }

    pub fn dx(&self) -> f64 {
        self.mass / (self.nodes - 1) as f64
    }

    /// Effective σ for a grid with largest cell `dx`.
    pub fn sigma_for(&self, dx: f64) -> f64 {
        match self.sigma {
            Some(s) => s,
            None if self.gamma > 2.0 && self.gamma < 3.0 => dx,
            None => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.gamma >= 2.0) {
            return bad(format!("gamma must be ≥ 2, got {}", self.gamma));
        }
        if !(self.radius > 0.0) || !(self.mass > 0.0) {
            return bad("radius and mass must be positive".into());
        }
        if self.nodes < 16 {
            return bad(format!("nodes must be ≥ 16, got {}", self.nodes));
        }
        if !(self.dt.initial() > 0.0) {
            return bad("dt must be positive".into());
        }
        if let Some(s) = self.sigma {
            if !(s >= 0.0) {
                return bad(format!("sigma must be ≥ 0, got {s}"));
            }
            if s == 0.0 && self.gamma > 2.0 && self.gamma < 3.0 && self.scheme == Scheme::Centered {
                return bad("sigma = 0 leaves the q-coefficient non-differentiable for 2 < γ < 3".into());
            }
        }
        if !(self.t_end >= 0.0) || self.snapshot_stride == 0 || self.newton_max_iter == 0 {
            return bad("t_end ≥ 0, snapshot_stride ≥ 1 and newton_max_iter ≥ 1 are required".into());
        }
        if let Some(iv) = self.snapshot_interval {
            if !(iv > 0.0) {
                return bad(format!("snapshot_interval must be positive, got {iv}"));
            }
        }
        if let Mode::WholeLine { r_ladder } = &self.mode {
            if r_ladder.len() < 2 || r_ladder.windows(2).any(|w| !(w[1] > w[0])) || r_ladder[0] <= 0.0 {
                return bad("r_ladder must hold ≥ 2 increasing positive radii".into());
            }
        }
        Ok(())
    }
}

/// Outcome of one implicit step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepInfo {
    pub iterations: usize,
    pub residual: f64,
    /// Number of pooled blocks created by the monotone projection.
    pub projection_pools: usize,
    /// ∫ A(∂ₓu)·(∂ₜu)² dx at the new time level: the discrete entropy dissipation.
    pub dissipation: f64,
}

/// Discrete operators on a fixed non-uniform grid.
struct Stencil {
    d1: Vec<(f64, f64, f64)>,
    d2: Vec<(f64, f64, f64)>,
    /// Cell lengths x_{i+1} − x_i.
    h: Vec<f64>,
    /// Nodal weights ½(x_{i+1} − x_{i−1}).
    w: Vec<f64>,
}

impl Stencil {
    fn new(x: &[f64]) -> Self {
        let n = x.len();
        let mut d1 = vec![(0.0, 0.0, 0.0); n];
        let mut d2 = vec![(0.0, 0.0, 0.0); n];
        let h: Vec<f64> = x.windows(2).map(|c| c[1] - c[0]).collect();
        let mut w = vec![0.0; n];
        for i in 1..n - 1 {
            let (hm, hp) = (h[i - 1], h[i]);
            d1[i] = first_derivative_weights(hm, hp);
            d2[i] = second_derivative_weights(hm, hp);
            w[i] = 0.5 * (hm + hp);
        }
        Stencil { d1, d2, h, w }
    }

    fn pq(&self, u: &[f64], i: usize) -> (f64, f64) {
        let (a, b, c) = self.d1[i];
        let (d, e, f) = self.d2[i];
        (
            a * u[i - 1] + b * u[i] + c * u[i + 1],
            d * u[i - 1] + e * u[i] + f * u[i + 1],
        )
    }

    fn p(&self, u: &[f64], i: usize) -> f64 {
        let (a, b, c) = self.d1[i];
        a * u[i - 1] + b * u[i] + c * u[i + 1]
    }
}

/// The implicit system of one step: rows A(p_i)(u_i − v_i)/dt − [B q]_i + u_i at interior nodes,
/// where [B q]_i is B(p_i)·q_i (centered) or the pressure difference of adjacent cells (conservative).
struct System<'a> {
    st: &'a Stencil,
    v: &'a [f64],
    dt: f64,
    gamma: f64,
    sigma: f64,
    scheme: Scheme,
}

impl System<'_> {
    fn cell_slope(&self, u: &[f64], c: usize) -> f64 {
        (u[c + 1] - u[c]) / self.st.h[c]
    }

    fn residual(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        out[0] = 0.0;
        out[n - 1] = 0.0;
        match self.scheme {
            Scheme::Centered => {
                for i in 1..n - 1 {
                    let (p, q) = self.st.pq(u, i);
                    let c = coefficients(p, self.gamma, self.sigma);
                    out[i] = c.a * (u[i] - self.v[i]) / self.dt - c.b * q + u[i];
                }
            }
            Scheme::Conservative => {
                let mut left = flux::pressure(self.cell_slope(u, 0), self.gamma, self.sigma);
                for i in 1..n - 1 {
                    let right = flux::pressure(self.cell_slope(u, i), self.gamma, self.sigma);
                    let c = coefficients(self.st.p(u, i), self.gamma, self.sigma);
                    out[i] = c.a * (u[i] - self.v[i]) / self.dt - (right - left) / self.st.w[i] + u[i];
                    left = right;
                }
            }
        }
    }

    /// Tridiagonal Jacobian of the interior rows.
    fn jacobian(&self, u: &[f64], lower: &mut [f64], diag: &mut [f64], upper: &mut [f64]) -> std::result::Result<(), String> {
        let n = u.len();
        let mut b_left = 0.0;
        if self.scheme == Scheme::Conservative {
            b_left = flux::pressure_slope(self.cell_slope(u, 0), self.gamma, self.sigma);
        }
        for i in 1..n - 1 {
            let (p, q) = self.st.pq(u, i);
            let c = coefficients(p, self.gamma, self.sigma);
            let k = i - 1;
            let (w1m, w10, w1p) = self.st.d1[i];
            let ta = c.da * (u[i] - self.v[i]) / self.dt;
            if !ta.is_finite() {
                return Err(format!("non-finite Jacobian at node {i}"));
            }
            match self.scheme {
                Scheme::Centered => {
                    if !c.db.is_finite() {
                        return Err(format!("non-finite Jacobian at node {i}"));
                    }
                    let gp = ta - c.db * q;
                    let (w2m, w20, w2p) = self.st.d2[i];
                    lower[k] = gp * w1m - c.b * w2m;
                    diag[k] = c.a / self.dt + 1.0 + gp * w10 - c.b * w20;
                    upper[k] = gp * w1p - c.b * w2p;
                }
                Scheme::Conservative => {
                    let b_right = flux::pressure_slope(self.cell_slope(u, i), self.gamma, self.sigma);
                    let (hm, hp, w) = (self.st.h[i - 1], self.st.h[i], self.st.w[i]);
                    lower[k] = ta * w1m - b_left / (hm * w);
                    diag[k] = c.a / self.dt + 1.0 + ta * w10 + (b_left / hm + b_right / hp) / w;
                    upper[k] = ta * w1p - b_right / (hp * w);
                    b_left = b_right;
                }
            }
        }
        Ok(())
    }

    /// Per-row round-off floor: 64·ε times the magnitude of the row's terms.
    fn floor(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut out = vec![0.0; n];
        let mut left = 0.0;
        if self.scheme == Scheme::Conservative {
            left = flux::pressure(self.cell_slope(u, 0), self.gamma, self.sigma).abs();
        }
        for i in 1..n - 1 {
            let (p, _) = self.st.pq(u, i);
            let c = coefficients(p, self.gamma, self.sigma);
            let q_term = match self.scheme {
                Scheme::Centered => {
                    let (d, e, f) = self.st.d2[i];
                    c.b * ((d * u[i - 1]).abs() + (e * u[i]).abs() + (f * u[i + 1]).abs())
                }
                Scheme::Conservative => {
                    let right = flux::pressure(self.cell_slope(u, i), self.gamma, self.sigma).abs();
                    let t = (left + right) / self.st.w[i];
                    left = right;
                    t
                }
            };
            out[i] = 64.0 * f64::EPSILON * (c.a * (u[i].abs() + self.v[i].abs()) / self.dt + q_term + u[i].abs());
        }
        out
    }
}

fn norm2(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest amount by which a row exceeds its round-off floor.
fn excess_inf(r: &[f64], floor: &[f64]) -> f64 {
    r.iter().zip(floor.iter()).fold(0.0, |a, (v, f)| a.max(v.abs() - f))
}

/// Damped Newton solve of the implicit system; returns the new values, iterations and residual.
fn newton_solve(sys: &System, tol: f64, max_iter: usize, radius: f64) -> std::result::Result<(Vec<f64>, usize, f64), String> {
    let v = sys.v;
    let n = v.len();
    let m = n - 2;
    let mut u = v.to_vec();
    let mut g = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let floor = sys.floor(v);
    sys.residual(&u, &mut g);
    let mut res = excess_inf(&g, &floor);
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for it in 0..max_iter {
        if res <= tol {
            return Ok((u, it, res));
        }
        sys.jacobian(&u, &mut lower, &mut diag, &mut upper)?;
        for k in 0..m {
            rhs[k] = -g[k + 1];
        }
        let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs).ok_or("singular Newton matrix")?;
        let phi0 = norm2(&g);
        let mut lambda = 1.0;
        let step_max = delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        loop {
            trial.copy_from_slice(&u);
            for k in 0..m {
                trial[k + 1] += lambda * delta[k];
            }
            sys.residual(&trial, &mut gt);
            let phi = norm2(&gt);
            if phi.is_finite() && phi <= (1.0 - 1e-4 * lambda) * phi0 {
                break;
            }
            lambda *= 0.5;
            if lambda < 1.0 / 1024.0 {
                // Residual at round-off level: accept the current iterate.
                if res <= 1e3 * tol && step_max <= 1e-12 * radius.max(1.0) {
                    return Ok((u, it, res));
                }
                return Err(format!("line search failed (residual {res:e})"));
            }
        }
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut g, &mut gt);
        res = excess_inf(&g, &floor);
        if lambda * step_max <= 1e-14 * radius.max(1.0) && res <= 1e3 * tol {
            return Ok((u, it + 1, res));
        }
    }
    if res <= tol {
        return Ok((u, max_iter, res));
    }
    Err(format!("no convergence in {max_iter} iterations (residual {res:e})"))
}

/// One implicit Euler step of size `dt`, followed by monotone projection and Dirichlet reassertion.
pub fn time_step(state: &Profile, dt: f64, cfg: &SolverConfig) -> Result<(Profile, StepInfo)> {
    let st = Stencil::new(&state.x);
    step_with(&st, state, dt, cfg)
}

fn step_with(st: &Stencil, state: &Profile, dt: f64, cfg: &SolverConfig) -> Result<(Profile, StepInfo)> {
    let sigma = cfg.sigma_for(state.max_dx());
    let sys = System {
        st,
        v: &state.u,
        dt,
        gamma: state.gamma,
        sigma,
        scheme: cfg.scheme,
    };
    let (mut u, iterations, res) = newton_solve(&sys, cfg.newton_tol, cfg.newton_max_iter, state.radius)
    .map_err(|msg| Error::NewtonDivergence { t: state.t + dt, msg })?;
    let n = u.len();
    u[0] = -state.radius;
    u[n - 1] = state.radius;
    let pools = isotonic_project(&mut u);
    for v in u.iter_mut() {
        *v = v.clamp(-state.radius, state.radius);
    }
    u[0] = -state.radius;
    u[n - 1] = state.radius;
    let mut diss = 0.0;
    for i in 1..n - 1 {
        let c = coefficients(st.p(&u, i), state.gamma, sigma);
        let ut = (u[i] - state.u[i]) / dt;
        diss += st.w[i] * c.a * ut * ut;
    }
    let next = Profile {
        t: state.t + dt,
        u,
        ..state.clone()
    };
    Ok((
        next,
        StepInfo {
            iterations,
            residual: res,
            projection_pools: pools,
            dissipation: diss,
        },
    ))
}

/// Aggregate statistics of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub newton_iterations: usize,
    pub max_newton_residual: f64,
    pub projection_activations: usize,
    pub dt_halvings: usize,
    /// max_n ‖u^{n+1} − u^n‖_∞ / dt.
    pub max_speed: f64,
    /// Largest excursion outside the barrier pair.
    pub max_barrier_excess: f64,
    pub sigma: f64,
}

/// Snapshots, per-snapshot diagnostics and run statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: SolverConfig,
    pub snapshots: Vec<Profile>,
    pub records: Vec<DiagnosticsRecord>,
    pub stats: RunStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barriers: Option<BarrierPair>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> Option<&Profile> {
        self.snapshots.last()
    }

    /// Checks strictly increasing times and the profile invariants of every snapshot.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        for w in self.snapshots.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::InvariantViolation(format!(
                    "snapshot times not increasing ({} then {})",
                    w[0].t, w[1].t
                )));
            }
        }
        for s in &self.snapshots {
            s.check_invariants(tol)?;
        }
        Ok(())
    }
}

/// Advances `u0` from its own time `u0.t` to `t_end`, emitting snapshots every `snapshot_interval` (default `snapshot_stride·dt0`)
/// with diagnostics.
pub fn simulate(cfg: &SolverConfig, u0: &Profile) -> Result<Trajectory> {
    simulate_with(cfg, u0, None)
}

/// As [`simulate`], with an optional barrier pair for confinement checks.
pub fn simulate_with(cfg: &SolverConfig, u0: &Profile, barriers: Option<BarrierPair>) -> Result<Trajectory> {
    cfg.validate()?;
    u0.validate_grid()?;
    if u0.monotonicity_violation().is_some() {
        return Err(Error::Admissibility("initial profile is not monotone".into()));
    }
    let spec = MobilitySpec::bosonic(cfg.gamma);
    let st = Stencil::new(&u0.x);
    let dt0 = cfg.dt.initial();
    let interval = cfg.snapshot_interval.unwrap_or(dt0 * cfg.snapshot_stride as f64);
    let mut stats = RunStats {
        sigma: cfg.sigma_for(u0.max_dx()),
        ..Default::default()
    };
    let tol_b = cfg.barrier_slack * u0.max_dx() / u0.m * u0.radius;
    let mut state = u0.clone();
    let mut snapshots = vec![u0.clone()];
    let mut tracker = diagnostics::RecordTracker::new(&spec, u0, cfg.level, stats.sigma)?;
    let mut d_prev = diagnostics::dissipation_profile(u0, stats.sigma);
    let mut records = vec![tracker.record(u0, d_prev)?];
    let mut dt = dt0;
    let mut k_snap = 1usize;
    let eps_t = 1e-12 * interval.max(cfg.t_end).max(1e-300);
    while state.t < cfg.t_end - eps_t {
        let target = (u0.t + k_snap as f64 * interval).min(cfg.t_end);
        let mut h = dt.min(target - state.t);
        let mut halvings = 0;
        let (next, info) = loop {
            match step_with(&st, &state, h, cfg) {
                Ok(r) => break r,
                Err(e) => {
                    halvings += 1;
                    stats.dt_halvings += 1;
                    if halvings > cfg.max_halvings {
                        return Err(e);
                    }
                    h *= 0.5;
                }
            }
        };
        stats.steps += 1;
        stats.newton_iterations += info.iterations;
        stats.max_newton_residual = stats.max_newton_residual.max(info.residual);
        if info.projection_pools > 0 {
            stats.projection_activations += 1;
        }
        stats.max_speed = stats.max_speed.max(next.sup_distance(&state) / h);
        if let Some(b) = &barriers {
            let ex = b.excess(&next);
            stats.max_barrier_excess = stats.max_barrier_excess.max(ex);
            if cfg.check_barriers && ex > tol_b {
                return Err(Error::InvariantViolation(format!(
                    "barrier sandwich violated by {ex:e} at t = {}",
                    next.t
                )));
            }
        }
        let d_next = diagnostics::dissipation_profile(&next, stats.sigma);
        tracker.accumulate(d_prev, d_next, h);
        d_prev = d_next;
        // Snap the clock onto the snapshot time to avoid drift.
        let mut next = next;
        let at_snapshot = (next.t - target).abs() <= eps_t;
        if at_snapshot {
            next.t = target;
        }
        if let DtPolicy::Adaptive { dt_min, dt_max, .. } = cfg.dt {
            if halvings > 0 {
                dt = (h).max(dt_min);
            } else if info.iterations <= 3 && h >= dt * (1.0 - 1e-12) {
                dt = (2.0 * dt).min(dt_max);
            } else if info.iterations >= cfg.newton_max_iter {
                dt = (0.5 * dt).max(dt_min);
            }
        }
        state = next;
        if at_snapshot {
            records.push(tracker.record(&state, d_prev)?);
            snapshots.push(state.clone());
            k_snap += 1;
        }
    }
    Ok(Trajectory {
        config: cfg.clone(),
        snapshots,
        records,
        stats,
        barriers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn residual_examples() {
        assert_eq!(residual_f(0.0, 0.0, 1.0, 0.0, 4.0), 0.0);
        assert_eq!(residual_f(1.0, 0.0, 0.0, 5.0, 3.0), 1.0);
        assert_eq!(residual_f_sigma(0.0, 1.0, 1.0, 1.0, 2.0, 0.5), 0.0);
    }

    #[test]
    fn coefficient_derivatives_match_differences() {
        for &g in &[2.0, 3.0, 4.0, 2.5] {
            for &p in &[-3.0f64, -0.7, 0.2, 0.9, 1.0, 1.3, 40.0] {
                let s = if g < 3.0 { 0.1 } else { 0.0 };
                let h = 1e-6 * p.abs().max(1e-3);
                let c = coefficients(p, g, s);
                let cp = coefficients(p + h, g, s);
                let cm = coefficients(p - h, g, s);
                assert_abs_diff_eq!(c.da, (cp.a - cm.a) / (2.0 * h), epsilon = 1e-6 * (1.0 + c.da.abs()));
                assert_abs_diff_eq!(c.db, (cp.b - cm.b) / (2.0 * h), epsilon = 1e-6 * (1.0 + c.db.abs()));
                let pg = p.abs().powf(g);
                assert_abs_diff_eq!(c.a, pg / (1.0 + pg), epsilon = 1e-14);
                assert_abs_diff_eq!(c.b, (p.abs() + s).powf(g - 2.0) / (1.0 + pg), epsilon = 1e-14);
            }
        }
    }
}
