//! Observables of profiles and trajectories: entropy, dissipation, condensate size, energy,
//! boundary flux, blow-up profile, and the comparison and Sturmian checks.

pub mod compare;
pub mod criteria;
pub mod profile;

use serde::{Deserialize, Serialize};

use crate::equilibria::MobilitySpec;
use crate::error::Result;
use crate::numerics::{derivative, first_derivative_weights};
use crate::solver::flux::pressure;
use crate::solver::{coefficients, Trajectory};
use crate::transform::{decompose, DensityMeasure, LevelPolicy, Profile};

pub use compare::{comparison_check, intersection_check, ComparisonReport, IntersectionReport};
pub use criteria::{
    estimate_toscani_constant, global_reg_criterion, lambda_star, toscani_criterion, toscani_ratio, GlobalRegReport,
    ToscaniEstimate, ToscaniVerdict,
};
pub use profile::{
    ode_flux_residual, profile_exact, profile_fit, profile_fit_window, tau_at_nodes, uxx_sign_extent, ProfileFit,
};

/// Per-snapshot scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    #[serde(rename = "H")]
    pub entropy: f64,
    #[serde(rename = "D_R")]
    pub dissipation: f64,
    pub entropy_identity_defect: f64,
    pub x_p_lo: f64,
    pub x_p: f64,
    pub x_p_hi: f64,
    #[serde(rename = "E")]
    pub kinetic_energy: f64,
    pub min_slope: f64,
    /// `None` when the density is read as unbounded.
    pub sup_f: Option<f64>,
    pub flux_left: f64,
    pub flux_right: f64,
    pub l2_sq: f64,
    pub profile_exponent: Option<f64>,
    pub profile_prefactor: Option<f64>,
    /// ∫_0^t D_R dτ accumulated over the implicit steps.
    #[serde(rename = "cum_D")]
    pub cumulative_dissipation: f64,
}

/// ½∫₀^m u² dx, exact for the piecewise-linear interpolant.
pub fn kinetic_energy(p: &Profile) -> f64 {
    0.5 * p.l2_norm_sq()
}

/// Entropy ∫ (u²/2) dx + ∫ Φ(1/∂ₓu) ∂ₓu dx on the piecewise-linear profile: the trapezoid rule for
/// the first term and the exact cell integral for the second. This is the functional the implicit
/// steps decrease.
pub fn entropy_profile(p: &Profile, spec: &MobilitySpec) -> Result<f64> {
    let mut h = 0.0;
    for i in 0..p.len() - 1 {
        let dx = p.x[i + 1] - p.x[i];
        let (a, b) = (p.u[i], p.u[i + 1]);
        h += dx * (a * a + b * b) / 4.0;
        let du = b - a;
        if du > 0.0 {
            h += du * spec.phi(dx / du)?;
        }
    }
    Ok(h)
}

/// ∫ g dr on one side: trapezoid between nodes, rectangle on the gap to the origin.
fn side_integral(r: &[f64], g: &[f64], outer: f64) -> f64 {
    let n = r.len();
    if n == 0 {
        return 0.0;
    }
    let mut s = g[0] * (r[0] - outer).abs();
    for j in 0..n - 1 {
        s += 0.5 * (g[j] + g[j + 1]) * (r[j + 1] - r[j]).abs();
    }
    s + g[n - 1] * r[n - 1].abs()
}

fn sides(d: &DensityMeasure) -> [(Vec<f64>, Vec<f64>, f64); 2] {
    let s = d.split();
    let left = (d.r[..s].to_vec(), d.f[..s].to_vec(), -d.radius);
    let right = (
        d.r[s..].iter().rev().copied().collect(),
        d.f[s..].iter().rev().copied().collect(),
        d.radius,
    );
    [left, right]
}

/// 𝓗(f) = ∫_{−R}^{R} (r²/2) f + Φ(f) dr on the r-grid; the atom contributes nothing.
pub fn entropy(d: &DensityMeasure, spec: &MobilitySpec) -> Result<f64> {
    let mut h = 0.0;
    for (r, f, outer) in sides(d) {
        let g: Vec<f64> = r
            .iter()
            .zip(f.iter())
            .map(|(r, f)| Ok(0.5 * r * r * f + spec.phi(*f)?))
            .collect::<Result<_>>()?;
        h += side_integral(&r, &g, outer);
    }
    Ok(h)
}

/// D_R = ∫ |∂_r f + r h(f)|²/h(f) dr on the r-grid with one-sided stencils toward r = 0±.
pub fn dissipation(d: &DensityMeasure, spec: &MobilitySpec) -> f64 {
    let mut total = 0.0;
    for (r, f, outer) in sides(d) {
        if r.len() < 3 {
            continue;
        }
        let fp = derivative(&r, &f);
        let g: Vec<f64> = (0..r.len())
            .map(|j| {
                let hf = spec.h_ext(f[j]);
                if hf > 0.0 && hf.is_finite() {
                    let j_flux = fp[j] + r[j] * hf;
                    j_flux * j_flux / hf
                } else {
                    0.0
                }
            })
            .collect();
        total += side_integral(&r, &g, outer);
    }
    total
}

/// D_R from the profile: ∫ (∂ₓP_σ(∂ₓu) − u)²/A dx, the stationary residual weighted by 1/A.
pub fn dissipation_profile(p: &Profile, sigma: f64) -> f64 {
    let n = p.len();
    let cell = |i: usize| pressure((p.u[i + 1] - p.u[i]) / (p.x[i + 1] - p.x[i]), p.gamma, sigma);
    let mut total = 0.0;
    let mut left = cell(0);
    for i in 1..n - 1 {
        let right = cell(i);
        let (hm, hp) = (p.x[i] - p.x[i - 1], p.x[i + 1] - p.x[i]);
        let (a, b, c) = first_derivative_weights(hm, hp);
        let pp = a * p.u[i - 1] + b * p.u[i] + c * p.u[i + 1];
        let co = coefficients(pp, p.gamma, sigma);
        let w = 0.5 * (hm + hp);
        if co.a > 1e-300 {
            let g = (right - left) / w - p.u[i];
            total += w * g * g / co.a;
        }
        left = right;
    }
    total
}

/// (∂_r f + r h(f)) at r = −R and r = R with one-sided stencils.
pub fn boundary_flux_residual(d: &DensityMeasure, spec: &MobilitySpec) -> (f64, f64) {
    let mut out = [f64::NAN, f64::NAN];
    for (k, (r, f, outer)) in sides(d).into_iter().enumerate() {
        if r.len() < 3 || r[0] != outer {
            continue;
        }
        let fp = derivative(&r, &f);
        out[k] = fp[0] + r[0] * spec.h_ext(f[0]);
    }
    (out[0], out[1])
}

/// |H(t) − H(s) + ∫_s^t D_R| between two snapshot indices.
pub fn entropy_identity_residual(traj: &Trajectory, s_idx: usize, t_idx: usize) -> f64 {
    let a = &traj.records[s_idx];
    let b = &traj.records[t_idx];
    (b.entropy - a.entropy + (b.cumulative_dissipation - a.cumulative_dissipation)).abs()
}

/// Builds records along a run, carrying H(0) and the accumulated dissipation.
pub struct RecordTracker {
    spec: MobilitySpec,
    level: LevelPolicy,
    h0: f64,
    cumulative: f64,
    sigma: f64,
}

impl RecordTracker {
    /// `sigma` is the regularization of the run; it enters the profile-based dissipation.
    pub fn new(spec: &MobilitySpec, u0: &Profile, level: LevelPolicy, sigma: f64) -> Result<Self> {
        Ok(RecordTracker {
            spec: spec.clone(),
            level,
            h0: entropy_profile(u0, spec)?,
            cumulative: 0.0,
            sigma,
        })
    }

    /// Adds ½(Dⁿ + Dⁿ⁺¹)·dt for a step between states with dissipations Dⁿ and Dⁿ⁺¹.
    pub fn accumulate(&mut self, d_start: f64, d_end: f64, dt: f64) {
        self.cumulative += 0.5 * (d_start + d_end) * dt;
    }

    /// Record for `p`; a non-positive `dissipation` is replaced by the profile-based value.
    pub fn record(&self, p: &Profile, dissipation: f64) -> Result<DiagnosticsRecord> {
        let d = decompose(p, self.level)?;
        let h = entropy_profile(p, &self.spec)?;
        let diss = if dissipation > 0.0 {
            dissipation
        } else {
            dissipation_profile(p, self.sigma)
        };
        let (fl, fr) = boundary_flux_residual(&d, &self.spec);
        let fit = if d.unbounded { profile_fit(&d).ok() } else { None };
        Ok(DiagnosticsRecord {
            t: p.t,
            entropy: h,
            dissipation: diss,
            entropy_identity_defect: h - self.h0 + self.cumulative,
            x_p_lo: d.x_p_lo,
            x_p: d.x_p,
            x_p_hi: d.x_p_hi,
            kinetic_energy: kinetic_energy(p),
            min_slope: d.min_slope,
            sup_f: if d.unbounded { None } else { Some(d.sup_f()) },
            flux_left: fl,
            flux_right: fr,
            l2_sq: p.l2_norm_sq(),
            profile_exponent: fit.as_ref().map(|f| f.exponent),
            profile_prefactor: fit.as_ref().map(|f| f.prefactor),
            cumulative_dissipation: self.cumulative,
        })
    }
}

/// Records for every snapshot of a trajectory, using zero dissipation history.
pub fn records_for(snapshots: &[Profile], level: LevelPolicy) -> Result<Vec<DiagnosticsRecord>> {
    let Some(first) = snapshots.first() else {
        return Ok(Vec::new());
    };
    let spec = MobilitySpec::bosonic(first.gamma);
    let tracker = RecordTracker::new(&spec, first, level, 0.0)?;
    snapshots.iter().map(|s| tracker.record(s, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kinetic_energy_of_linear_profile() {
        let p = Profile::linear(1.0, 1.0, 4.0, 33).unwrap();
        assert_abs_diff_eq!(kinetic_energy(&p), 1.0 / 6.0, epsilon = 1e-15);
    }
}
