//! Blow-up profile near the condensate: power-law fit, the ODE closed form, and its residual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{derivative, second_derivative_weights};
use crate::transform::{DensityMeasure, Profile};

/// Least-squares power law f ≈ prefactor·|r|^exponent near the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub fit_window: (f64, f64),
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

fn not_applicable(d: &DensityMeasure) -> Result<()> {
    if d.unbounded {
        Ok(())
    } else {
        Err(Error::NotApplicable(format!(
            "density is bounded at t = {} (slope at plateau {})",
            d.t, d.slope_at_plateau
        )))
    }
}

/// Nodes of each side ordered outward from the origin, as (r, f) index lists.
fn sides_outward(d: &DensityMeasure) -> [Vec<usize>; 2] {
    let s = d.split();
    [(0..s).rev().collect(), (s..d.r.len()).collect()]
}

/// Fit on the default window [2·Δr_min, 0.1·R], skipping the innermost node of each side.
pub fn profile_fit(d: &DensityMeasure) -> Result<ProfileFit> {
    not_applicable(d)?;
    let dr_min = d
        .r
        .windows(2)
        .filter(|w| w[0] * w[1] > 0.0)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    profile_fit_window(d, 2.0 * dr_min, 0.1 * d.radius)
}

/// Fit on lo ≤ |r| ≤ hi, per side, averaging exponent and log-prefactor over the sides.
pub fn profile_fit_window(d: &DensityMeasure, lo: f64, hi: f64) -> Result<ProfileFit> {
    not_applicable(d)?;
    let mut exps = Vec::new();
    let mut logs = Vec::new();
    let mut sq = 0.0;
    let mut count = 0usize;
    for side in sides_outward(d) {
        let pts: Vec<(f64, f64)> = side
            .iter()
            .skip(1)
            .filter(|&&j| {
                let a = d.r[j].abs();
                a >= lo && a <= hi && d.f[j] > 0.0
            })
            .map(|&j| (d.r[j].abs().ln(), d.f[j].ln()))
            .collect();
        if pts.len() < 2 {
            continue;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if !(sxx > 0.0) {
            continue;
        }
        let slope = sxy / sxx;
        let icpt = my - slope * mx;
        for p in &pts {
            sq += (p.1 - icpt - slope * p.0).powi(2);
        }
        count += pts.len();
        exps.push(slope);
        logs.push(icpt);
    }
    if exps.is_empty() {
        return Err(Error::NotApplicable(format!(
            "fewer than two nodes in the fit window [{lo}, {hi}]"
        )));
    }
    let k = exps.len() as f64;
    Ok(ProfileFit {
        exponent: exps.iter().sum::<f64>() / k,
        prefactor: (logs.iter().sum::<f64>() / k).exp(),
        fit_window: (lo, hi),
        residual: (sq / count as f64).sqrt(),
    })
}

/// τ(t, r_j) = ∂ₜu(t, M(t, r_j)) by the centered difference of `prev` and `next` at the source nodes of `d`.
pub fn tau_at_nodes(prev: &Profile, next: &Profile, d: &DensityMeasure) -> Result<Vec<f64>> {
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::Validation(format!("snapshots not ordered in time: {} then {}", prev.t, next.t)));
    }
    if d.source_x.len() != d.r.len() {
        return Err(Error::Validation("density carries no source x nodes".into()));
    }
    Ok(d.source_x.iter().map(|&x| (next.eval(x) - prev.eval(x)) / dt).collect())
}

/// Closed-form predictor f = (γ/q·∫₀^r s q ds)^{−1/γ}, q = exp(−γ∫₀^r (τ + s) ds), on the nodes of `d`.
///
/// The s-part of q is integrated exactly and exp(−γ∫τ) is averaged per cell, so τ ≡ 0 returns f_c.
pub fn profile_exact(d: &DensityMeasure, tau: &[f64]) -> Result<Vec<f64>> {
    not_applicable(d)?;
    if tau.len() != d.r.len() {
        return Err(Error::Validation("τ and r lengths differ".into()));
    }
    let g = d.gamma;
    let mut out = vec![f64::NAN; d.r.len()];
    for side in sides_outward(d) {
        let Some(&first) = side.first() else { continue };
        let (mut a, mut tau_a) = (0.0, tau[first]);
        let (mut big_t, mut e_a) = (0.0, 1.0);
        let mut acc = 0.0;
        for &j in &side {
            let b = d.r[j];
            big_t += 0.5 * (tau_a + tau[j]) * (b - a);
            let e_b = (-g * big_t).exp();
            // ∫_a^b s e^{−γs²/2} ds, from expm1 to keep digits for small r.
            let cell = ((-0.5 * g * a * a).exp_m1() - (-0.5 * g * b * b).exp_m1()) / g;
            acc += 0.5 * (e_a + e_b) * cell;
            let ratio = g * acc * (0.5 * g * b * b).exp() / e_b;
            out[j] = ratio.powf(-1.0 / g);
            a = b;
            tau_a = tau[j];
            e_a = e_b;
        }
    }
    Ok(out)
}

/// f'/f + r f^γ + τ + r at every node of `d`, with one-sided stencils toward r = 0±.
pub fn ode_flux_residual(d: &DensityMeasure, tau: &[f64]) -> Result<Vec<f64>> {
    if tau.len() != d.r.len() {
        return Err(Error::Validation("τ and r lengths differ".into()));
    }
    let g = d.gamma;
    let s = d.split();
    let mut out = Vec::with_capacity(d.r.len());
    for (lo, hi) in [(0, s), (s, d.r.len())] {
        let (r, f) = (&d.r[lo..hi], &d.f[lo..hi]);
        if r.len() < 3 {
            out.extend(std::iter::repeat(f64::NAN).take(r.len()));
            continue;
        }
        let fp = derivative(r, f);
        for k in 0..r.len() {
            out.push(fp[k] / f[k] + r[k] * f[k].powf(g) + tau[lo + k] + r[k]);
        }
    }
    Ok(out)
}

/// Largest c with u·∂ₓ²u > 0 at every interior node where level < |u| < c (R when no node violates).
pub fn uxx_sign_extent(p: &Profile, level: f64) -> f64 {
    let mut c = p.radius;
    for i in 1..p.len() - 1 {
        let u = p.u[i];
        if u.abs() <= level {
            continue;
        }
        let (a, b, e) = second_derivative_weights(p.x[i] - p.x[i - 1], p.x[i + 1] - p.x[i]);
        let q = a * p.u[i - 1] + b * u + e * p.u[i + 1];
        if !(u * q > 0.0) {
            c = c.min(u.abs());
        }
    }
    c
}
