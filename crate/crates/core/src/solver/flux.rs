//! Pressure P_σ(p) = ∫₀^p B_σ(s) ds with B_σ(s) = (|s|+σ)^{γ−2}/(1+|s|^γ), so that B_σ(∂ₓu)·∂ₓ²u = ∂ₓP_σ(∂ₓu).

use statrs::function::beta::{beta_reg, ln_beta};

use crate::numerics::{integrate_best_effort, QuadOptions};

/// P_σ(∞) for σ = 0: π/(γ sin(π/γ)).
pub fn pressure_limit(gamma: f64) -> f64 {
    std::f64::consts::PI / (gamma * (std::f64::consts::PI / gamma).sin())
}

/// P₀(p) for p ≥ 0 in closed form for γ = 2, 4, through the regularized incomplete beta otherwise.
fn pressure_zero(p: f64, gamma: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return pressure_limit(gamma);
    }
    if gamma == 2.0 {
        return p.atan();
    }
    if gamma == 4.0 {
        let r2 = std::f64::consts::SQRT_2;
        let log = (-2.0 * r2 * p / (1.0 + r2 * p + p * p)).ln_1p();
        return (0.5 * log + (r2 * p).atan2(1.0 - p * p)) / (2.0 * r2);
    }
    // With t = p^γ/(1+p^γ): P₀ = (1/γ)·B(a, b)·I_t(a, b), a = 1 − 1/γ, b = 1/γ.
    let (a, b) = (1.0 - 1.0 / gamma, 1.0 / gamma);
    let scale = ln_beta(a, b).exp() / gamma;
    if p <= 1.0 {
        let pg = p.powf(gamma);
        scale * beta_reg(a, b, pg / (1.0 + pg))
    } else {
        let s = 1.0 / (1.0 + p.powf(gamma));
        scale * (1.0 - beta_reg(b, a, s))
    }
}

/// Pressure P_σ(p), odd in p.
pub fn pressure(p: f64, gamma: f64, sigma: f64) -> f64 {
    let ap = p.abs();
    let mut v = pressure_zero(ap, gamma);
    if sigma > 0.0 && gamma != 2.0 && ap > 0.0 {
        let g = |s: f64| ((s + sigma).powf(gamma - 2.0) - s.powf(gamma - 2.0)) / (1.0 + s.powf(gamma));
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            max_intervals: 200,
        };
        let knee = sigma.min(ap);
        v += integrate_best_effort(&g, 0.0, knee, opts).value;
        if ap > knee {
            v += integrate_best_effort(&g, knee, ap, opts).value;
        }
    }
    if p < 0.0 {
        -v
    } else {
        v
    }
}

/// B_σ(p) = (|p|+σ)^{γ−2}/(1+|p|^γ), the derivative of [`pressure`].
pub fn pressure_slope(p: f64, gamma: f64, sigma: f64) -> f64 {
    super::coefficients(p, gamma, sigma).b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    #[test]
    fn closed_forms_match_quadrature() {
        for &g in &[2.0, 2.5, 3.0, 4.0, 6.0] {
            for &p in &[1e-3, 0.3, 1.0, 2.7, 40.0, 1e4] {
                let b = |s: f64| s.powf(g - 2.0) / (1.0 + s.powf(g));
                let q = integrate(b, 0.0, p, QuadOptions::default()).unwrap().value;
                let v = pressure(p, g, 0.0);
                assert!((v - q).abs() <= 1e-12 * (1.0 + q.abs()), "γ {g} p {p}: {v} vs {q}");
                assert_eq!(pressure(-p, g, 0.0), -v);
            }
            assert!((pressure(1e12, g, 0.0) - pressure_limit(g)).abs() < 1e-9);
        }
    }

    #[test]
    fn regularized_pressure_matches_quadrature() {
        for &(g, s) in &[(2.5, 0.01), (4.0, 0.05)] {
            for &p in &[1e-3, 0.5, 3.0] {
                let b = |x: f64| (x + s).powf(g - 2.0) / (1.0 + x.powf(g));
                let q = integrate(b, 0.0, p, QuadOptions::default()).unwrap().value;
                assert!((pressure(p, g, s) - q).abs() <= 1e-11, "γ {g} σ {s} p {p}");
            }
        }
    }
}
