//! Condensation and regularity criteria: the energy criterion with its blow-up time bound, an
//! estimate of its constant, and the partial-mass majorization for global regularity.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::equilibria::MobilitySpec;
use crate::error::{Error, Result};
use crate::numerics::interp_linear;

/// Outcome of the energy criterion m − B·m^{3γ/2}/(2E₀)^{(γ−2)/2} ≤ −δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToscaniVerdict {
    pub satisfied: bool,
    /// m − B·m^{3γ/2}/(2E₀)^{(γ−2)/2}; negative when the criterion holds, with δ = −margin.
    pub margin: f64,
    /// E₀/δ when satisfied: a condensate must appear before this time.
    pub blowup_time_bound: Option<f64>,
}

/// Evaluates the energy criterion; `b` is the user-supplied constant and is never defaulted.
pub fn toscani_criterion(m: f64, e0: f64, gamma: f64, b: Option<f64>) -> Result<ToscaniVerdict> {
    let b = b.ok_or_else(|| Error::Config("the energy criterion needs a user-supplied constant B_γ > 0".into()))?;
    if !(b > 0.0) || !(m > 0.0) || !(e0 > 0.0) || !(gamma > 2.0) {
        return Err(Error::Config(format!(
            "energy criterion needs B > 0, m > 0, E0 > 0, γ > 2; got B = {b}, m = {m}, E0 = {e0}, γ = {gamma}"
        )));
    }
    let margin = m - b * m.powf(1.5 * gamma) / (2.0 * e0).powf(0.5 * (gamma - 2.0));
    let satisfied = margin < 0.0;
    Ok(ToscaniVerdict {
        satisfied,
        margin,
        blowup_time_bound: satisfied.then(|| e0 / -margin),
    })
}

/// ∫r²f^{γ+1}·(∫r²f)^{γ/2−1}/(∫f)^{3γ/2} by the trapezoid rule on samples (r increasing).
pub fn toscani_ratio(r: &[f64], f: &[f64], gamma: f64) -> f64 {
    let trap = |g: &dyn Fn(usize) -> f64| -> f64 {
        (0..r.len().saturating_sub(1))
            .map(|j| 0.5 * (g(j) + g(j + 1)) * (r[j + 1] - r[j]))
            .sum()
    };
    let i1 = trap(&|j| r[j] * r[j] * f[j].powf(gamma + 1.0));
    let i2 = trap(&|j| r[j] * r[j] * f[j]);
    let i0 = trap(&|j| f[j]);
    i1 * i2.powf(0.5 * gamma - 1.0) / i0.powf(1.5 * gamma)
}

/// Minimum of the energy-criterion ratio over the densities e^{−|r|^k}, k ∈ [0.25, 8].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToscaniEstimate {
    /// Candidate constant; an estimate from above of the infimum, not a proven bound.
    pub b_hat: f64,
    pub best_k: f64,
    /// Ratio of the Gaussian member (k = 2), which is (γ+1)^{−3/2}(2π)^{−γ/2}.
    pub gaussian_ratio: f64,
}

/// Ratio for e^{−|r|^k} in closed form; the ratio is invariant under f ↦ a·f(b·r).
fn family_ratio(k: f64, gamma: f64) -> f64 {
    let g3 = gamma_fn(3.0 / k);
    let i1 = (gamma + 1.0).powf(-3.0 / k) * g3;
    let i0 = gamma_fn(1.0 / k);
    // The common factor 2/k cancels up to (2/k)^{1 + γ/2 − 1 − 3γ/2} = (2/k)^{−γ}.
    (2.0 / k).powf(-gamma) * i1 * g3.powf(0.5 * gamma - 1.0) / i0.powf(1.5 * gamma)
}

/// B̂_γ: the smallest ratio over the family e^{−|r|^k}, k ∈ [1/4, 8], scanned on a log grid.
pub fn estimate_toscani_constant(gamma: f64) -> ToscaniEstimate {
    let (lo, hi) = (0.25f64.ln(), 8.0f64.ln());
    let n = 400;
    let mut best = (f64::INFINITY, 2.0);
    for i in 0..=n {
        let k = (lo + (hi - lo) * i as f64 / n as f64).exp();
        let v = family_ratio(k, gamma);
        if v < best.0 {
            best = (v, k);
        }
    }
    // Golden-section refinement in log k around the grid minimum.
    let step = (hi - lo) / n as f64;
    let (mut a, mut b) = ((best.1.ln() - step).max(lo), (best.1.ln() + step).min(hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if family_ratio(c.exp(), gamma) < family_ratio(d.exp(), gamma) {
            b = d;
        } else {
            a = c;
        }
    }
    let k = (0.5 * (a + b)).exp();
    let v = family_ratio(k, gamma);
    let (b_hat, best_k) = if v < best.0 { (v, k) } else { best };
    ToscaniEstimate {
        b_hat,
        best_k,
        gaussian_ratio: family_ratio(2.0, gamma),
    }
}

/// Partial-mass majorization of f̃₀(r) = max(f₀(r), f₀(−r)) by f_{∞,θ}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRegReport {
    pub holds: bool,
    pub theta: f64,
    /// Largest ∫₀^ρ f̃₀ − ∫₀^ρ f_{∞,θ} over the grid.
    pub worst_excess: f64,
    /// ρ where the excess is largest.
    pub witness: f64,
}

/// Checks ∫₀^ρ f̃₀ ≤ ∫₀^ρ f_{∞,θ} at every grid |r|, both integrals by the same trapezoid rule.
pub fn global_reg_criterion(r: &[f64], f0: &[f64], spec: &MobilitySpec, theta: f64) -> Result<GlobalRegReport> {
    if r.len() != f0.len() || r.len() < 2 {
        return Err(Error::Validation("need matching r and f0 samples".into()));
    }
    let mut rho: Vec<f64> = r.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
    rho.sort_by(f64::total_cmp);
    rho.dedup();
    let tilde = |x: f64| interp_linear(r, f0, x).max(interp_linear(r, f0, -x));
    let mut worst = (f64::NEG_INFINITY, 0.0);
    let (mut acc0, mut acc_s) = (0.0, 0.0);
    let (mut prev, mut g_prev, mut s_prev) = (0.0, f64::NAN, f64::NAN);
    for &x in &rho {
        let g = tilde(x);
        let s = spec.steady_density(theta, x)?;
        if g_prev.is_nan() {
            acc0 += g * x;
            acc_s += s * x;
        } else {
            acc0 += 0.5 * (g + g_prev) * (x - prev);
            acc_s += 0.5 * (s + s_prev) * (x - prev);
        }
        let excess = acc0 - acc_s;
        if excess > worst.0 {
            worst = (excess, x);
        }
        prev = x;
        g_prev = g;
        s_prev = s;
    }
    let tol = 1e-12 * acc_s.max(1e-300);
    Ok(GlobalRegReport {
        holds: worst.0 <= tol,
        theta,
        worst_excess: worst.0,
        witness: worst.1,
    })
}

/// Smallest λ in [lo, hi] (to `tol`) with f_{0,λ}(ρ) = λ^{−1}f₀(ρ/λ) passing the criterion on a
/// uniform symmetric grid of `nodes` points over [−R, R].
#[allow(clippy::too_many_arguments)]
pub fn lambda_star<F: Fn(f64) -> f64>(
    base: F,
    radius: f64,
    nodes: usize,
    spec: &MobilitySpec,
    theta: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let r: Vec<f64> = (0..nodes)
        .map(|i| -radius + 2.0 * radius * i as f64 / (nodes - 1) as f64)
        .filter(|v| *v != 0.0)
        .collect();
    let holds = |lam: f64| -> Result<bool> {
        let f: Vec<f64> = r.iter().map(|&x| base(x / lam) / lam).collect();
        Ok(global_reg_criterion(&r, &f, spec, theta)?.holds)
    };
    if holds(lo)? || !holds(hi)? {
        return Err(Error::Unresolved {
            msg: "criterion does not switch from false to true on the bracket".into(),
            lo,
            hi,
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let c = 0.5 * (a + b);
        if holds(c)? {
            b = c;
        } else {
            a = c;
        }
    }
    Ok(b)
}
