//! Critical mass m_c(R) and the finiteness criterion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadOptions};

use super::mobility::MobilitySpec;
use super::steady::steady_mass;

/// Number of dyadic blocks examined by both finiteness tests.
pub const CRITICAL_BLOCKS: usize = 64;
/// A block ratio at or above `1 - CRITICAL_RATIO_TOL` is read as divergence.
pub const CRITICAL_RATIO_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalMassReport {
    #[serde(rename = "R")]
    pub radius: f64,
    pub finite: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    /// Partial integrals ∫_1^{2^j} (s/h(s)) (−Φ'(s))^{-1/2} ds, j = 1, 2, ...
    pub partials: Vec<f64>,
    /// Asymptotic ratio of consecutive dyadic increments of the criterion integral.
    #[serde(skip)]
    pub criterion_ratio: f64,
    /// Asymptotic ratio of consecutive dyadic increments of ∫_{δ<|r|<R} f_c.
    #[serde(skip)]
    pub mass_ratio: f64,
}

fn opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        max_intervals: 2000,
    }
}

fn tail_ratio(increments: &[f64]) -> f64 {
    let n = increments.len();
    let last = increments[n - 1];
    let earlier = increments[n - 9];
    if last <= 0.0 || earlier <= 0.0 {
        return 0.0;
    }
    (last / earlier).powf(1.0 / 8.0)
}

/// Decides whether m_c(R) is finite by two independent tests and returns its value.
///
/// Test one: dyadic partial integrals of (s/h(s))(−Φ'(s))^{-1/2} on [1, ∞).
/// Test two: ∫_{δ<|r|<R} f_c under dyadic refinement δ → 0.
/// Divergence is declared when the increments stop decaying geometrically.
pub fn critical_mass(spec: &MobilitySpec, radius: f64) -> Result<CriticalMassReport> {
    spec.validate()?;
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("R must be positive, got {radius}")));
    }
    let g = |s: f64| -> f64 {
        let hs = spec.h_ext(s);
        let pp = spec.phi_prime(s).unwrap_or(0.0);
        if !hs.is_finite() || pp >= 0.0 {
            return 0.0;
        }
        (s / hs) / (-pp).sqrt()
    };
    let mut inc = Vec::with_capacity(CRITICAL_BLOCKS);
    let mut partials = Vec::with_capacity(CRITICAL_BLOCKS);
    let mut acc = 0.0;
    for j in 0..CRITICAL_BLOCKS {
        let a = 2f64.powi(j as i32);
        let v = integrate(g, a, 2.0 * a, opts())?.value;
        inc.push(v);
        acc += v;
        partials.push(acc);
    }
    let rho_c = tail_ratio(&inc);
    let finite_c = rho_c < 1.0 - CRITICAL_RATIO_TOL;

    let fc = |r: f64| spec.steady_density(0.0, r).unwrap_or(0.0);
    let mut inc_m = Vec::with_capacity(CRITICAL_BLOCKS);
    for j in 0..CRITICAL_BLOCKS {
        let d = radius * 0.5f64.powi(j as i32);
        let v = 2.0 * integrate(fc, 0.5 * d, d, opts())?.value;
        inc_m.push(v);
    }
    let rho_m = tail_ratio(&inc_m);
    let finite_m = rho_m < 1.0 - CRITICAL_RATIO_TOL;

    if finite_c != finite_m {
        return Err(Error::Inconsistent(format!(
            "criterion integral says finite={finite_c} (ratio {rho_c}), graded mass says finite={finite_m} (ratio {rho_m})"
        )));
    }
    let value = if finite_c {
        if spec.tail_exponent() > 3.0 {
            Some(steady_mass(spec, radius, 0.0)?.value)
        } else {
            let core: f64 = inc_m.iter().sum();
            Some(core + inc_m[CRITICAL_BLOCKS - 1] * rho_m / (1.0 - rho_m))
        }
    } else {
        None
    };
    Ok(CriticalMassReport {
        radius,
        finite: finite_c,
        value,
        partials,
        criterion_ratio: rho_c,
        mass_ratio: rho_m,
    })
}
