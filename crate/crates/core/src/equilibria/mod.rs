//! Mobilities, entropy integrands, steady states and critical masses.

pub mod critical;
pub mod mobility;
pub mod steady;

pub use critical::{critical_mass, CriticalMassReport};
pub use mobility::{attenuation_eta, attenuation_g, smooth_step, MobilityKind, MobilitySpec, MobilityTable};
pub use steady::{
    equilibrium_profile, half_mass, steady_mass, theta_of_mass, theta_of_mass_with, EquilibriumProfile, MassEstimate,
    SteadyState, THETA_MAX_DEFAULT, THETA_TOL_DEFAULT,
};

/// h(s) for the given mobility.
pub fn mobility_eval(spec: &MobilitySpec, s: f64) -> crate::Result<f64> {
    spec.h(s)
}

/// Φ'(s) = −∫_s^∞ dz/h(z).
pub fn phi_prime(spec: &MobilitySpec, s: f64) -> crate::Result<f64> {
    spec.phi_prime(s)
}

/// Φ(s) = ∫_0^s Φ'.
pub fn phi(spec: &MobilitySpec, s: f64) -> crate::Result<f64> {
    spec.phi(s)
}

/// f_{∞,θ}(r).
pub fn steady_density(spec: &MobilitySpec, theta: f64, r: f64) -> crate::Result<f64> {
    spec.steady_density(theta, r)
}
