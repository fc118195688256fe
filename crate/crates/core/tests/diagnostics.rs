use approx::{assert_abs_diff_eq, assert_relative_eq};
use bosefp::diagnostics::*;
use bosefp::equilibria::{critical_mass, equilibrium_profile, MobilitySpec};
use bosefp::solver::{simulate, SolverConfig, Trajectory};
use bosefp::transform::{uniform_grid, DensityMeasure, Profile};
use bosefp::Error;

/// Symmetric nodes ±(k/n)·R, k = 1..n.
fn symmetric_nodes(radius: f64, n: usize) -> Vec<f64> {
    let mut r: Vec<f64> = (1..=n).rev().map(|k| -radius * k as f64 / n as f64).collect();
    r.extend((1..=n).map(|k| radius * k as f64 / n as f64));
    r
}

fn power_law(gamma: f64, c: f64, n: usize) -> DensityMeasure {
    let r = symmetric_nodes(1.0, n);
    let f: Vec<f64> = r.iter().map(|r| c * r.abs().powf(-2.0 / gamma)).collect();
    DensityMeasure::from_density(0.0, 1.0, gamma, r, f, 0.2).unwrap()
}

fn steady_run(ratio: f64, nodes: usize) -> Trajectory {
    let spec = MobilitySpec::bosonic(4.0);
    let m = ratio * critical_mass(&spec, 1.0).unwrap().value.unwrap();
    let x = uniform_grid(m, nodes);
    let eq = equilibrium_profile(&spec, 1.0, m, &x).unwrap();
    let u0 = Profile::new(0.0, m, 1.0, 4.0, x, eq.u).unwrap();
    let mut cfg = SolverConfig::new(4.0, 1.0, m, nodes, 0.5).with_fixed_dt(0.01);
    cfg.snapshot_interval = Some(0.25);
    simulate(&cfg, &u0).unwrap()
}

#[test]
fn power_law_fit_recovers_exponent_and_prefactor() {
    for gamma in [3.0, 4.0, 6.0] {
        let d = power_law(gamma, 0.7, 2000);
        let fit = profile_fit(&d).unwrap();
        assert_abs_diff_eq!(fit.exponent, -2.0 / gamma, epsilon = 1e-10);
        assert_relative_eq!(fit.prefactor, 0.7, max_relative = 1e-10);
        assert!(fit.residual < 1e-10);
    }
}

#[test]
fn fit_on_bounded_density_is_not_applicable() {
    let r = symmetric_nodes(1.0, 50);
    let f = vec![1.0; r.len()];
    let d = DensityMeasure::from_density(0.0, 1.0, 4.0, r, f, 0.0).unwrap();
    assert!(matches!(profile_fit(&d), Err(Error::NotApplicable(_))));
}

#[test]
fn zero_tau_gives_the_critical_density() {
    let spec = MobilitySpec::bosonic(4.0);
    let d = power_law(4.0, 1.0, 400);
    let tau = vec![0.0; d.r.len()];
    let f = profile_exact(&d, &tau).unwrap();
    for (r, f) in d.r.iter().zip(&f) {
        let fc = spec.steady_density(0.0, *r).unwrap();
        assert_relative_eq!(*f, fc, max_relative = 1e-10);
    }
}

#[test]
fn critical_density_solves_the_flux_ode() {
    let spec = MobilitySpec::bosonic(4.0);
    let r = symmetric_nodes(1.0, 4000);
    let f: Vec<f64> = r.iter().map(|r| spec.steady_density(0.0, *r).unwrap()).collect();
    let d = DensityMeasure::from_density(0.0, 1.0, 4.0, r, f, 0.1).unwrap();
    let res = ode_flux_residual(&d, &vec![0.0; d.r.len()]).unwrap();
    for (r, v) in d.r.iter().zip(&res) {
        if r.abs() > 0.05 && r.abs() < 0.99 {
            assert!(v.abs() < 1e-3, "residual {v} at r = {r}");
        }
    }
}

#[test]
fn energy_criterion_flips_sign() {
    // γ = 4, m = 1, B = 1: margin = 1 − 1/(2E₀).
    let yes = toscani_criterion(1.0, 0.25, 4.0, Some(1.0)).unwrap();
    assert!(yes.satisfied);
    assert_abs_diff_eq!(yes.margin, -1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(yes.blowup_time_bound.unwrap(), 0.25, epsilon = 1e-14);
    let no = toscani_criterion(1.0, 1.0, 4.0, Some(1.0)).unwrap();
    assert!(!no.satisfied);
    assert_abs_diff_eq!(no.margin, 0.5, epsilon = 1e-14);
    assert!(no.blowup_time_bound.is_none());
    assert!(matches!(toscani_criterion(1.0, 1.0, 4.0, None), Err(Error::Config(_))));
}

#[test]
fn gaussian_ratio_matches_closed_form_and_bounds_the_estimate() {
    for gamma in [3.0, 4.0] {
        let est = estimate_toscani_constant(gamma);
        let closed = (gamma + 1.0).powf(-1.5) * (2.0 * std::f64::consts::PI).powf(-0.5 * gamma);
        assert_relative_eq!(est.gaussian_ratio, closed, max_relative = 1e-12);
        assert!(est.b_hat <= est.gaussian_ratio);
        let r: Vec<f64> = (0..20001).map(|i| -12.0 + 24.0 * i as f64 / 20000.0).collect();
        let f: Vec<f64> = r.iter().map(|r| 3.0 * (-0.5 * (r / 1.7).powi(2)).exp()).collect();
        assert_relative_eq!(toscani_ratio(&r, &f, gamma), closed, max_relative = 1e-6);
    }
}

#[test]
fn global_regularity_majorization() {
    let spec = MobilitySpec::bosonic(4.0);
    let theta = 0.3;
    let r = symmetric_nodes(1.0, 200);
    let f: Vec<f64> = r.iter().map(|r| spec.steady_density(theta, *r).unwrap()).collect();
    assert!(global_reg_criterion(&r, &f, &spec, theta).unwrap().holds);
    let half: Vec<f64> = f.iter().map(|v| 0.5 * v).collect();
    assert!(global_reg_criterion(&r, &half, &spec, theta).unwrap().holds);
    let double: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
    let rep = global_reg_criterion(&r, &double, &spec, theta).unwrap();
    assert!(!rep.holds && rep.worst_excess > 0.0);
}

#[test]
fn lambda_star_is_the_switching_point() {
    let spec = MobilitySpec::bosonic(4.0);
    let theta = 0.3;
    let base = |r: f64| 4.0 * (-0.5 * (r / 0.05).powi(2)).exp();
    let lam = lambda_star(base, 1.0, 401, &spec, theta, 0.5, 100.0, 1e-6).unwrap();
    let r: Vec<f64> = (0..401).map(|i| -1.0 + i as f64 / 200.0).filter(|v| *v != 0.0).collect();
    let scaled = |l: f64| -> Vec<f64> { r.iter().map(|&x| base(x / l) / l).collect() };
    assert!(global_reg_criterion(&r, &scaled(lam), &spec, theta).unwrap().holds);
    assert!(!global_reg_criterion(&r, &scaled(lam - 1e-3), &spec, theta).unwrap().holds);
}

#[test]
fn identical_runs_have_no_intersections() {
    let a = steady_run(0.5, 129);
    let rep = intersection_check(&a, &a, (0.0, a.config.mass), 0.0).unwrap();
    assert!(rep.passed);
    assert!(rep.counts.iter().all(|&c| c == 0));
    let cmp = comparison_check(&a, &a, 1e-12).unwrap();
    assert!(cmp.passed);
    assert_eq!(cmp.max_violation, 0.0);
}

#[test]
fn ordered_steady_states_compare() {
    let a = steady_run(0.3, 129);
    let b = steady_run(0.6, 129);
    let ok = comparison_check(&a, &b, 1e-3).unwrap();
    assert!(ok.passed, "{ok:?}");
    assert!(ok.translate_checks > 0);
    let bad = comparison_check(&b, &a, 1e-3).unwrap();
    assert!(!bad.passed);
    assert!(bad.witness.is_some());
    assert!(matches!(bad.into_result(), Err(Error::InvariantViolation(_))));
}

#[test]
fn mismatched_snapshot_times_are_rejected() {
    let a = steady_run(0.5, 129);
    let mut b = a.clone();
    b.snapshots[1].t += 0.1;
    assert!(matches!(comparison_check(&a, &b, 1e-3), Err(Error::Validation(_))));
}

#[test]
fn entropy_identity_is_tight_at_the_steady_state() {
    let a = steady_run(0.5, 129);
    let last = a.records.len() - 1;
    // Stationary data: nothing to dissipate beyond the discretization floor.
    assert!(entropy_identity_residual(&a, 0, last) < 1e-6);
    assert!(a.records.iter().all(|r| r.dissipation >= 0.0));
}
