//! Steady-state barriers u_{θ,±}, the drift constant C(u₀), and admissibility of initial data.

use serde::{Deserialize, Serialize};

use crate::equilibria::{theta_of_mass, MobilitySpec, SteadyState, THETA_MAX_DEFAULT};
use crate::error::{Error, Result};
use crate::numerics::{first_derivative_weights, second_derivative_weights};
use crate::transform::{decompose, LevelPolicy, Profile};

/// Barrier pair u⁻(t) = max(u₀ − Ct, u_{θ,−}), u⁺(t) = min(u₀ + Ct, u_{θ,+}) sampled on the profile grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierPair {
    pub theta: f64,
    /// Drift constant C(u₀).
    pub c: f64,
    /// Lipschitz bound √2·max{C, Lip(u_{θ,±})}.
    pub k: f64,
    pub u0: Vec<f64>,
    /// u_{θ,−}: pseudo-inverse of (m − m^{(R,θ)})δ_{−R} + f_{∞,θ}.
    pub static_lower: Vec<f64>,
    /// u_{θ,+}: pseudo-inverse of f_{∞,θ} + (m − m^{(R,θ)})δ_R.
    pub static_upper: Vec<f64>,
}

impl BarrierPair {
    pub fn lower(&self, t: f64) -> Vec<f64> {
        self.u0
            .iter()
            .zip(self.static_lower.iter())
            .map(|(u, l)| (u - self.c * t).max(*l))
            .collect()
    }

    pub fn upper(&self, t: f64) -> Vec<f64> {
        self.u0
            .iter()
            .zip(self.static_upper.iter())
            .map(|(u, l)| (u + self.c * t).min(*l))
            .collect()
    }

    /// Largest amount by which `p` leaves [u⁻(t), u⁺(t)].
    pub fn excess(&self, p: &Profile) -> f64 {
        let t = p.t;
        let mut worst = 0.0f64;
        for (i, &v) in p.u.iter().enumerate() {
            let lo = (self.u0[i] - self.c * t).max(self.static_lower[i]);
            let hi = (self.u0[i] + self.c * t).min(self.static_upper[i]);
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}

/// Discrete C(u₀) = max over interior nodes with |u₀| > 0 of |u(1 + p^{−γ}) − q/p²|.
pub fn initial_speed(u0: &Profile) -> f64 {
    let n = u0.len();
    let g = u0.gamma;
    let mut c = 0.0f64;
    for i in 1..n - 1 {
        if u0.u[i] == 0.0 {
            continue;
        }
        let (hm, hp) = (u0.x[i] - u0.x[i - 1], u0.x[i + 1] - u0.x[i]);
        let (a, b, d) = first_derivative_weights(hm, hp);
        let (e, f, h) = second_derivative_weights(hm, hp);
        let p = a * u0.u[i - 1] + b * u0.u[i] + d * u0.u[i + 1];
        let q = e * u0.u[i - 1] + f * u0.u[i] + h * u0.u[i + 1];
        if !(p > 0.0) {
            return f64::INFINITY;
        }
        c = c.max((u0.u[i] * (1.0 + p.powf(-g)) - q / (p * p)).abs());
    }
    c
}

/// u_{θ,∓} sampled on the grid x.
pub fn static_barriers(spec: &MobilitySpec, radius: f64, m: f64, theta: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let st = SteadyState::new(spec, radius, theta)?;
    let atom = m - st.mass;
    if atom < -1e-12 * m {
        return Err(Error::Domain(format!(
            "θ = {theta} gives m^(R,θ) = {} above m = {m}",
            st.mass
        )));
    }
    let atom = atom.max(0.0);
    let mut lower = Vec::with_capacity(x.len());
    let mut upper = Vec::with_capacity(x.len());
    for &xi in x {
        lower.push(if xi <= atom { -radius } else { st.inverse_cdf(xi - atom)? });
        upper.push(if xi >= st.mass { radius } else { st.inverse_cdf(xi)? });
    }
    let fr = st.density(radius)?;
    Ok((lower, upper, 1.0 / fr))
}

/// Smallest θ on a geometric ladder starting at θ^{(R,m)} with u_{θ,−} ≤ u₀ ≤ u_{θ,+} (within `tol`).
pub fn build_barriers(u0: &Profile, spec: &MobilitySpec, tol: f64) -> Result<BarrierPair> {
    let n = u0.len();
    let scale = 1e-12 * u0.radius;
    if (u0.u[0] + u0.radius).abs() > scale || (u0.u[n - 1] - u0.radius).abs() > scale {
        return Err(Error::BarrierFailure(format!(
            "boundary values ({}, {}) differ from ∓R",
            u0.u[0],
            u0.u[n - 1]
        )));
    }
    let theta0 = theta_of_mass(spec, u0.radius, u0.m)?;
    let c = initial_speed(u0);
    if !c.is_finite() {
        return Err(Error::BarrierFailure("C(u₀) is infinite: flat or decreasing datum".into()));
    }
    let mut ladder = vec![theta0];
    let mut th = if theta0 > 0.0 { theta0 } else { 1e-3 };
    while th < THETA_MAX_DEFAULT {
        th *= 1.25;
        ladder.push(th.min(THETA_MAX_DEFAULT));
    }
    for &theta in &ladder {
        let (lo, hi, lip) = match static_barriers(spec, u0.radius, u0.m, theta, &u0.x) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let ok = (0..n).all(|i| lo[i] <= u0.u[i] + tol && u0.u[i] <= hi[i] + tol);
        if ok {
            return Ok(BarrierPair {
                theta,
                c,
                k: std::f64::consts::SQRT_2 * c.max(lip),
                u0: u0.u.clone(),
                static_lower: lo,
                static_upper: hi,
            });
        }
    }
    Err(Error::BarrierFailure(format!(
        "no θ ≤ {THETA_MAX_DEFAULT} sandwiches the datum; it is too steep near ±R"
    )))
}

/// One admissibility clause with an optional witness location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
    pub detail: String,
}

/// Admissibility verdict with per-clause results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub passed: bool,
    pub clauses: Vec<Clause>,
    pub c0: f64,
}

impl AdmissibilityReport {
    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            return Ok(self);
        }
        let failed: Vec<String> = self
            .clauses
            .iter()
            .filter(|c| !c.passed)
            .map(|c| match c.witness {
                Some(w) => format!("{} (witness {w}): {}", c.name, c.detail),
                None => format!("{}: {}", c.name, c.detail),
            })
            .collect();
        Err(Error::Admissibility(failed.join("; ")))
    }
}

fn clause(name: &str, passed: bool, witness: Option<f64>, detail: String) -> Clause {
    Clause {
        name: name.to_string(),
        passed,
        witness,
        detail,
    }
}

/// Checks the bounded-domain clauses (end values, positive slope, finite C(u₀)); in whole-line mode
/// also the minorant, L² and tail clauses on the sampled range. Flat zero-level segments are accepted
/// only with `allow_flat_zero`.
pub fn admissibility_check(
    u0: &Profile,
    whole_line: bool,
    allow_flat_zero: bool,
    spec: &MobilitySpec,
) -> Result<AdmissibilityReport> {
    u0.validate_grid()?;
    let n = u0.len();
    let mut clauses = Vec::new();
    let scale = 1e-12 * u0.radius;
    let end_ok = (u0.u[0] + u0.radius).abs() <= scale && (u0.u[n - 1] - u0.radius).abs() <= scale;
    clauses.push(clause(
        "endpoints",
        end_ok,
        if end_ok { None } else { Some(if (u0.u[0] + u0.radius).abs() > scale { 0.0 } else { u0.m }) },
        format!("u0(0) = {}, u0(m) = {}, R = {}", u0.u[0], u0.u[n - 1], u0.radius),
    ));
    let bad = (0..n - 1).find(|&i| {
        let d = u0.u[i + 1] - u0.u[i];
        !(d > 0.0) && !(allow_flat_zero && d == 0.0 && u0.u[i] == 0.0)
    });
    clauses.push(clause(
        "positive_slope",
        bad.is_none(),
        bad.map(|i| u0.x[i]),
        match bad {
            Some(i) => format!("u0 not increasing between x = {} and {}", u0.x[i], u0.x[i + 1]),
            None => "min slope positive".into(),
        },
    ));
    let c0 = initial_speed(u0);
    clauses.push(clause(
        "finite_drift_constant",
        c0.is_finite() || allow_flat_zero,
        None,
        format!("C(u0) = {c0}"),
    ));
    if whole_line {
        let d = decompose(u0, LevelPolicy::default())?;
        // IV2: f0 ≥ f_{∞,θ} for some θ on the geometric ladder.
        let mut found = None;
        let mut th = 0.05;
        while th <= THETA_MAX_DEFAULT {
            if d.r.iter().zip(d.f.iter()).all(|(r, f)| {
                spec.steady_density(th, *r).map_or(false, |s| *f >= s)
            }) {
                found = Some(th);
                break;
            }
            th *= 1.5;
        }
        let witness = if found.is_none() {
            let th = THETA_MAX_DEFAULT;
            d.r.iter()
                .zip(d.f.iter())
                .find(|(r, f)| spec.steady_density(th, **r).map_or(true, |s| **f < s))
                .map(|(r, _)| *r)
        } else {
            None
        };
        clauses.push(clause(
            "minorant",
            found.is_some(),
            witness,
            match found {
                Some(t) => format!("f0 ≥ f_(∞,θ) with θ = {t}"),
                None => "no ladder θ gives a minorant".into(),
            },
        ));
        let l2 = u0.l2_norm_sq();
        clauses.push(clause("l2_finite", l2.is_finite(), None, format!("‖u0‖² = {l2}")));
        let tail = d
            .r
            .iter()
            .zip(d.f.iter())
            .map(|(r, f)| r.abs().powi(2) * f)
            .fold(0.0, f64::max);
        clauses.push(clause(
            "tail_bound",
            tail.is_finite(),
            None,
            format!("sup |r|^2 f0 = {tail} (ε0 = 1)"),
        ));
    }
    let passed = clauses.iter().all(|c| c.passed);
    Ok(AdmissibilityReport { passed, clauses, c0 })
}
