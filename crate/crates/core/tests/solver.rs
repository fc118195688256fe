use approx::assert_abs_diff_eq;
use bosefp::equilibria::{critical_mass, equilibrium_profile, MobilitySpec};
use bosefp::harness::{Datum, Geometry};
use bosefp::solver::*;
use bosefp::transform::{uniform_grid, Profile};
use bosefp::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn mc(gamma: f64) -> f64 {
    critical_mass(&MobilitySpec::bosonic(gamma), 1.0).unwrap().value.unwrap()
}

fn minimizer(gamma: f64, m: f64, nodes: usize) -> Profile {
    let x = uniform_grid(m, nodes);
    let eq = equilibrium_profile(&MobilitySpec::bosonic(gamma), 1.0, m, &x).unwrap();
    Profile::new(0.0, m, 1.0, gamma, x, eq.u).unwrap()
}

/// Steady density perturbed by a no-flux-compatible cosine, matched to mass m.
fn perturbed(gamma: f64, m: f64, nodes: usize, amp: f64) -> Profile {
    let datum = Datum::EquilibriumPlusPerturbation {
        theta: None,
        amp,
        wavenumber: 2.0,
        phase: 0.0,
        compatible: true,
    };
    datum
        .resolve(&Geometry {
            gamma,
            radius: 1.0,
            mass: m,
            nodes,
        })
        .unwrap()
}

#[test]
fn residual_examples() {
    assert_eq!(residual_f(0.0, 0.0, 1.0, 0.0, 4.0), 0.0);
    assert_eq!(residual_f(1.0, 0.0, 0.0, 5.0, 3.0), 1.0);
    assert_eq!(residual_f_sigma(0.0, 1.0, 1.0, 1.0, 2.0, 0.5), 0.0);
}

#[test]
fn sigma_zero_reduces_bitwise() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..1000 {
        let (z, a, p, q) = (
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(0.0..10.0),
            rng.gen_range(-50.0..50.0),
        );
        let g: f64 = rng.gen_range(2.0..6.0);
        assert_eq!(
            residual_f_sigma(z, a, p, q, g, 0.0).to_bits(),
            residual_f(z, a, p, q, g).to_bits()
        );
    }
}

proptest! {
    #[test]
    fn regularized_residual_decreases_in_q(
        z in -2.0f64..2.0, a in -5.0f64..5.0, p in 0.0f64..10.0,
        q in -50.0f64..50.0, dq in 1e-3f64..10.0, g in 2.0f64..6.0, s in 1e-3f64..1.0,
    ) {
        prop_assert!(residual_f_sigma(z, a, p, q + dq, g, s) < residual_f_sigma(z, a, p, q, g, s));
    }
}

#[test]
fn config_validation() {
    assert!(matches!(SolverConfig::new(4.0, 1.0, 1.0, 8, 1.0).validate(), Err(Error::Config(_))));
    assert!(matches!(SolverConfig::new(1.5, 1.0, 1.0, 64, 1.0).validate(), Err(Error::Config(_))));
    let mut c = SolverConfig::new(4.0, 1.0, 1.0, 64, 1.0);
    c.sigma = Some(-1.0);
    assert!(matches!(c.validate(), Err(Error::Config(_))));
    assert!(SolverConfig::new(2.0, 1.0, 1.0, 64, 1.0).validate().is_ok());
}

#[test]
fn minimizer_is_admissible_and_sandwiched() {
    let spec = MobilitySpec::bosonic(4.0);
    let u0 = minimizer(4.0, 0.5 * mc(4.0), 257);
    let rep = admissibility_check(&u0, false, false, &spec).unwrap();
    assert!(rep.passed, "{:?}", rep.clauses);
    let b = build_barriers(&u0, &spec, 1e-10).unwrap();
    assert!(b.excess(&u0) <= 1e-10);
    assert!(b.c < 1e-2, "C(u0) = {}", b.c);
}

#[test]
fn linear_datum_gets_finite_barriers() {
    let spec = MobilitySpec::bosonic(4.0);
    let u0 = Profile::linear(1.0, 1.0, 4.0, 129).unwrap();
    let b = build_barriers(&u0, &spec, 1e-12).unwrap();
    assert!(b.theta.is_finite() && b.k.is_finite());
    // Barriers are monotone and attain ∓R at the ends.
    for v in [b.lower(0.5), b.upper(0.5)] {
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
    }
    assert_eq!(b.static_lower[0], -1.0);
    assert_eq!(*b.static_upper.last().unwrap(), 1.0);
}

#[test]
fn wrong_boundary_value_is_rejected() {
    let spec = MobilitySpec::bosonic(4.0);
    let mut u0 = Profile::linear(1.0, 1.0, 4.0, 33).unwrap();
    u0.u[0] = -0.9;
    assert!(matches!(build_barriers(&u0, &spec, 1e-12), Err(Error::BarrierFailure(_))));
    let rep = admissibility_check(&u0, false, false, &spec).unwrap();
    assert!(!rep.passed);
    assert!(matches!(rep.into_result(), Err(Error::Admissibility(_))));
}

#[test]
fn interior_flat_segment_fails_slope_clause() {
    let spec = MobilitySpec::bosonic(4.0);
    let u0 = Profile::from_fn(1.0, 1.0, 4.0, 41, |x| {
        let v = -1.0 + 2.0 * x;
        if (0.3..=0.5).contains(&v) { 0.3 } else { v }
    })
    .unwrap();
    let rep = admissibility_check(&u0, false, false, &spec).unwrap();
    let slope = rep.clauses.iter().find(|c| c.name == "positive_slope").unwrap();
    assert!(!slope.passed);
    assert!(slope.witness.is_some());
}

#[test]
fn gaussian_whole_line_datum_is_admissible() {
    let spec = MobilitySpec::bosonic(4.0);
    let datum = WholeLineDatum::Gaussian { mass: 1.0, width: 1.2 };
    let grid = graded_ladder_grid(&datum, &[4.0, 6.0, 8.0], 513).unwrap();
    let u0 = grid.profile(8.0, 4.0).unwrap();
    let rep = admissibility_check(&u0, true, false, &spec).unwrap();
    assert!(rep.passed, "{:?}", rep.clauses);
}

#[test]
fn minimizers_are_nearly_stationary() {
    let m_c = mc(4.0);
    for ratio in [0.5, 1.5] {
        let u0 = minimizer(4.0, ratio * m_c, 257);
        let dx = u0.max_dx();
        let cfg = SolverConfig::new(4.0, 1.0, u0.m, 257, 1.0).with_fixed_dt(dx);
        let traj = simulate(&cfg, &u0).unwrap();
        let drift = traj.last().unwrap().sup_distance(&u0);
        assert!(drift < 10.0 * dx * dx + 1e-3 * dx, "ratio {ratio}: drift {drift}");
    }
}

#[test]
fn subcritical_perturbation_relaxes_with_decreasing_entropy() {
    let m = 0.5 * mc(4.0);
    let u0 = perturbed(4.0, m, 129, 0.3);
    let target = minimizer(4.0, m, 129);
    let cfg = SolverConfig::new(4.0, 1.0, m, 129, 20.0);
    let traj = simulate(&cfg, &u0).unwrap();
    traj.check_invariants(1e-12).unwrap();
    for w in traj.records.windows(2) {
        assert!(w[1].entropy <= w[0].entropy + 1e-9, "H rose at t = {}", w[1].t);
    }
    let start = u0.sup_distance(&target);
    let end = traj.last().unwrap().sup_distance(&target);
    assert!(end < 0.05 * start, "distance {start} -> {end}");
    assert_eq!(traj.stats.projection_activations, 0);
}

#[test]
fn single_step_is_bounded_by_the_lipschitz_constant() {
    let spec = MobilitySpec::bosonic(4.0);
    let u0 = perturbed(4.0, 0.5 * mc(4.0), 129, 0.2);
    let b = build_barriers(&u0, &spec, 1e-10).unwrap();
    let cfg = SolverConfig::new(4.0, 1.0, u0.m, 129, 1.0);
    for dt in [1e-2, 1e-3, 1e-4] {
        let (next, info) = time_step(&u0, dt, &cfg).unwrap();
        assert!(info.residual <= cfg.newton_tol);
        assert!(next.sup_distance(&u0) <= (b.k + 1.0) * dt, "dt {dt}");
        assert_eq!(next.u[0], -1.0);
        assert_eq!(*next.u.last().unwrap(), 1.0);
    }
}

#[test]
fn barrier_confinement_holds() {
    let spec = MobilitySpec::bosonic(4.0);
    let u0 = perturbed(4.0, 0.5 * mc(4.0), 129, 0.3);
    let b = build_barriers(&u0, &spec, 1e-10).unwrap();
    let cfg = SolverConfig::new(4.0, 1.0, u0.m, 129, 5.0);
    let traj = simulate_with(&cfg, &u0, Some(b)).unwrap();
    let allowed = cfg.barrier_slack * u0.max_dx() / u0.m;
    assert!(traj.stats.max_barrier_excess <= allowed);
}

#[test]
fn gamma2_density_stays_bounded() {
    let u0 = Profile::from_fn(1.5, 1.0, 2.0, 129, |x| {
        let s = x / 1.5;
        -1.0 + 2.0 * s + 0.2 * (2.0 * std::f64::consts::PI * s).sin()
    })
    .unwrap();
    let cfg = SolverConfig::new(2.0, 1.0, 1.5, 129, 10.0);
    let traj = simulate(&cfg, &u0).unwrap();
    for r in &traj.records {
        assert!(r.min_slope > 1e-3, "min slope {} at t = {}", r.min_slope, r.t);
    }
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let u0 = perturbed(4.0, 0.5 * mc(4.0), 129, 0.3);
    let dx = u0.max_dx();
    let mut cfg = SolverConfig::new(4.0, 1.0, u0.m, 129, 1.0).with_fixed_dt(dx);
    cfg.snapshot_interval = Some(0.25);
    let full = simulate(&cfg, &u0).unwrap();
    let k = 2;
    let resumed = simulate(&cfg, &full.snapshots[k]).unwrap();
    assert_eq!(resumed.snapshots.len(), full.snapshots.len() - k);
    for (a, b) in resumed.snapshots.iter().zip(&full.snapshots[k..]) {
        assert_abs_diff_eq!(a.t, b.t, epsilon = 1e-12);
        assert!(a.sup_distance(b) <= 1e-8, "t = {}: {}", a.t, a.sup_distance(b));
    }
}

#[test]
fn whole_line_steady_datum_is_stationary_across_the_ladder() {
    let datum = WholeLineDatum::Steady { gamma: 4.0, theta: 0.5 };
    let mut cfg = SolverConfig::new(4.0, 4.0, 1.0, 257, 0.5).with_fixed_dt(0.01);
    cfg.mode = Mode::WholeLine {
        r_ladder: vec![2.0, 3.0, 4.0],
    };
    cfg.snapshot_interval = Some(0.25);
    let rep = whole_line_simulate(&cfg, &datum, 1e-2).unwrap();
    assert_eq!(rep.trajectories.len(), 3);
    assert!(rep.l2_excess <= 1e-9, "L2 excess {}", rep.l2_excess);
}
