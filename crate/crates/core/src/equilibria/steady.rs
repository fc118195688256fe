//! Steady states f_{∞,θ}, their masses, and the mass ↔ θ correspondence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_pieces, QuadOptions};

use super::mobility::MobilitySpec;

pub const THETA_MAX_DEFAULT: f64 = 50.0;
pub const THETA_TOL_DEFAULT: f64 = 1e-10;

fn opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// Mass value with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub value: f64,
    pub error: f64,
}

/// ∫_0^a f_{∞,θ}(r) dr, with the substitution r = w^k near the origin when
/// the θ = 0 singularity |r|^{-2/(α-1)} is integrable.
pub fn half_mass(spec: &MobilitySpec, theta: f64, a: f64) -> Result<MassEstimate> {
    if a < 0.0 {
        return Err(Error::Domain(format!("half_mass needs a ≥ 0, got {a}")));
    }
    if a == 0.0 {
        return Ok(MassEstimate { value: 0.0, error: 0.0 });
    }
    let alpha = spec.tail_exponent();
    if alpha > 3.0 {
        let k = (alpha - 1.0) / (alpha - 3.0);
        // Leading behaviour f ≈ c·r^{-2/(α-1)}; for the bosonic case c = (γ/2)^{-1/γ}.
        let lim0 = if theta == 0.0 {
            match spec.gamma() {
                Some(g) if matches!(spec.kind, super::mobility::MobilityKind::Bosonic { .. }) => {
                    k * (g / 2.0).powf(-1.0 / g)
                }
                _ => f64::NAN,
            }
        } else {
            0.0
        };
        let integrand = |w: f64| -> f64 {
            let r = w.powf(k);
            if r == 0.0 {
                return if lim0.is_nan() { 0.0 } else { lim0 };
            }
            match spec.steady_density(theta, r) {
                Ok(f) if f.is_finite() => f * k * w.powf(k - 1.0),
                _ => {
                    if lim0.is_nan() {
                        0.0
                    } else {
                        lim0
                    }
                }
            }
        };
        let b = a.powf(1.0 / k);
        let mut pts = vec![0.0];
        for j in (1..=6).rev() {
            let p = b * 0.25f64.powi(j);
            pts.push(p);
        }
        pts.push(b);
        let r = integrate_pieces(integrand, &pts, opts())?;
        return Ok(MassEstimate {
            value: r.value,
            error: r.error,
        });
    }
    if theta == 0.0 {
        return Err(Error::InfiniteMass(
            "θ = 0 density is not integrable at the origin for this mobility".into(),
        ));
    }
    let mut pts = vec![0.0];
    let scale = theta.sqrt();
    for c in [0.01, 0.1, 1.0, 10.0] {
        let p = c * scale;
        if p < a {
            pts.push(p);
        }
    }
    pts.push(a);
    let r = integrate_pieces(|r: f64| spec.steady_density(theta, r).unwrap_or(0.0), &pts, opts())?;
    Ok(MassEstimate {
        value: r.value,
        error: r.error,
    })
}

/// m^{(R,θ)} = ∫_{−R}^{R} f_{∞,θ}(r) dr.
pub fn steady_mass(spec: &MobilitySpec, radius: f64, theta: f64) -> Result<MassEstimate> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("R must be positive, got {radius}")));
    }
    if theta < 0.0 {
        return Err(Error::Domain(format!("θ must be ≥ 0, got {theta}")));
    }
    let h = half_mass(spec, theta, radius)?;
    Ok(MassEstimate {
        value: 2.0 * h.value,
        error: 2.0 * h.error,
    })
}

/// θ^{(R,m)} = min{θ ≥ 0 : m^{(R,θ)} ≤ m} by bisection on [0, θ_max].
pub fn theta_of_mass(spec: &MobilitySpec, radius: f64, m: f64) -> Result<f64> {
    theta_of_mass_with(spec, radius, m, THETA_MAX_DEFAULT, THETA_TOL_DEFAULT)
}

pub fn theta_of_mass_with(spec: &MobilitySpec, radius: f64, m: f64, theta_max: f64, tol: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    if spec.tail_exponent() > 3.0 {
        let mc = steady_mass(spec, radius, 0.0)?.value;
        if m >= mc {
            return Ok(0.0);
        }
    }
    let m_top = steady_mass(spec, radius, theta_max)?.value;
    if m_top > m {
        return Err(Error::Unresolved {
            msg: format!("mass {m} below m^(R,θ_max) = {m_top}"),
            lo: theta_max,
            hi: f64::INFINITY,
        });
    }
    let mut lo = 0.0;
    let mut hi = theta_max;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let mm = steady_mass(spec, radius, mid)?.value;
        if mm > m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A steady state f_{∞,θ} on [−R, R] with cached mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub theta: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub mass: f64,
    pub spec: MobilitySpec,
    half: f64,
}

impl SteadyState {
    pub fn new(spec: &MobilitySpec, radius: f64, theta: f64) -> Result<Self> {
        let half = half_mass(spec, theta, radius)?.value;
        Ok(SteadyState {
            theta,
            radius,
            mass: 2.0 * half,
            spec: spec.clone(),
            half,
        })
    }

    pub fn density(&self, r: f64) -> Result<f64> {
        self.spec.steady_density(self.theta, r)
    }

    /// ∫_0^a f, a ∈ [0, R].
    pub fn half_mass(&self, a: f64) -> Result<f64> {
        Ok(half_mass(&self.spec, self.theta, a)?.value)
    }

    /// M(r) = ∫_{−R}^r f.
    pub fn cdf(&self, r: f64) -> Result<f64> {
        let r = r.clamp(-self.radius, self.radius);
        if r < 0.0 {
            Ok(self.half - self.half_mass(-r)?)
        } else {
            Ok(self.half + self.half_mass(r)?)
        }
    }

    /// a ∈ [0, R] with ∫_0^a f = y.
    pub fn inverse_half_mass(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        if y >= self.half {
            return Ok(self.radius);
        }
        let mut lo = 0.0;
        let mut hi = self.radius;
        let mut a = self.radius * y / self.half;
        let mut last = f64::INFINITY;
        for _ in 0..200 {
            let v = self.half_mass(a)? - y;
            if v == 0.0 {
                return Ok(a);
            }
            if v < 0.0 {
                lo = a;
            } else {
                hi = a;
            }
            if hi - lo <= 4.0 * f64::EPSILON * self.radius || v.abs() <= 1e-15 * self.half {
                break;
            }
            let f = if a > 0.0 { self.density(a).unwrap_or(f64::INFINITY) } else { f64::INFINITY };
            let newton = a - v / f;
            let next = if newton.is_finite() && newton > lo && newton < hi && (v.abs() < 0.5 * last) {
                newton
            } else {
                0.5 * (lo + hi)
            };
            last = v.abs();
            a = next;
        }
        Ok(a)
    }

    /// Pseudo-inverse of the cdf: r with M(r) = x for x ∈ [0, mass].
    pub fn inverse_cdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(-self.radius);
        }
        if x >= self.mass {
            return Ok(self.radius);
        }
        if x < self.half {
            Ok(-self.inverse_half_mass(self.half - x)?)
        } else {
            Ok(self.inverse_half_mass(x - self.half)?)
        }
    }
}

/// The entropy minimizer of mass m on [−R, R] sampled at the given x nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumProfile {
    pub theta: f64,
    /// Mass carried by the atom at the origin.
    pub condensate: f64,
    pub x_minus: f64,
    pub x_plus: f64,
    pub u: Vec<f64>,
}

/// u_∞^{(R,m)}: pseudo-inverse of f_{∞,θ^{(R,m)}} when m < m_c(R), and of f_c + (m − m_c)δ₀ otherwise.
pub fn equilibrium_profile(spec: &MobilitySpec, radius: f64, m: f64, x: &[f64]) -> Result<EquilibriumProfile> {
    let theta = theta_of_mass(spec, radius, m)?;
    let st = SteadyState::new(spec, radius, theta)?;
    let atom = if theta == 0.0 { (m - st.mass).max(0.0) } else { 0.0 };
    let x_minus = st.half;
    let x_plus = st.half + atom;
    let mut u = Vec::with_capacity(x.len());
    let last = x.len().saturating_sub(1);
    for (i, &xi) in x.iter().enumerate() {
        let v = if i == 0 {
            -radius
        } else if i == last {
            radius
        } else if xi < x_minus {
            -st.inverse_half_mass(x_minus - xi)?
        } else if xi <= x_plus {
            0.0
        } else {
            st.inverse_half_mass(xi - x_plus)?
        };
        u.push(v);
    }
    Ok(EquilibriumProfile {
        theta,
        condensate: atom,
        x_minus,
        x_plus,
        u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_inverse_roundtrip() {
        let spec = MobilitySpec::bosonic(4.0);
        let st = SteadyState::new(&spec, 1.0, 0.3).unwrap();
        for &x in &[0.01, 0.2, st.mass / 2.0, 0.9 * st.mass] {
            let r = st.inverse_cdf(x).unwrap();
            assert_relative_eq!(st.cdf(r).unwrap(), x, max_relative = 1e-11);
        }
    }
}
