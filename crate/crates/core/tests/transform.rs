use approx::assert_abs_diff_eq;
use bosefp::equilibria::{critical_mass, equilibrium_profile, steady_density, theta_of_mass, MobilitySpec};
use bosefp::transform::*;
use bosefp::Error;
use proptest::prelude::*;

fn measure(radius: f64, gamma: f64, r: Vec<f64>, f: Vec<f64>, x_p: f64) -> DensityMeasure {
    DensityMeasure::from_density(0.0, radius, gamma, r, f, x_p).unwrap()
}

/// Nodes on [−R, 0) and (0, R] avoiding the origin.
fn two_sided_nodes(radius: f64, n: usize) -> Vec<f64> {
    let h = radius / n as f64;
    let mut r: Vec<f64> = (0..n).map(|k| -radius + k as f64 * h).collect();
    r.extend((1..=n).map(|k| k as f64 * h));
    r
}

#[test]
fn uniform_density_gives_linear_profile() {
    let r = two_sided_nodes(1.0, 8);
    let f = vec![1.0; r.len()];
    let d = measure(1.0, 4.0, r, f, 0.0);
    assert_abs_diff_eq!(d.mass, 2.0, epsilon = 1e-14);
    let cdf = cdf_from_density(&d).unwrap();
    let p = pseudo_inverse(&cdf, 2.0).unwrap();
    for (x, u) in p.x.iter().zip(&p.u) {
        assert_abs_diff_eq!(*u, x - 1.0, epsilon = 1e-13);
    }
}

#[test]
fn atom_becomes_flat_segment() {
    let r = two_sided_nodes(1.0, 10);
    let f = vec![0.5; r.len()];
    let d = measure(1.0, 4.0, r, f, 0.3);
    let cdf = cdf_from_density(&d).unwrap();
    assert_abs_diff_eq!(cdf.eval_left(0.0), 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(cdf.eval(0.0), 0.8, epsilon = 1e-14);
    let p = pseudo_inverse(&cdf, d.mass).unwrap();
    let on_plateau: Vec<f64> = p.x.iter().zip(&p.u).filter(|(_, u)| **u == 0.0).map(|(x, _)| *x).collect();
    assert_abs_diff_eq!(on_plateau[0], 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(*on_plateau.last().unwrap(), 0.8, epsilon = 1e-14);
    assert_eq!(pseudo_inverse_on_grid(&cdf, d.mass, &[0.5, 0.65, 0.8]).unwrap(), vec![0.0, 0.0, 0.0]);
}

#[test]
fn flat_profile_segment_gives_jump() {
    let x = uniform_grid(2.0, 21);
    let u: Vec<f64> = x
        .iter()
        .map(|&xi| if xi < 0.6 { -1.0 + xi / 0.6 } else if xi <= 1.0 { 0.0 } else { xi - 1.0 })
        .collect();
    let p = Profile::new(0.0, 2.0, 1.0, 4.0, x, u).unwrap();
    let m = generalized_inverse(&p).unwrap();
    assert_abs_diff_eq!(m.eval_left(0.0), 0.6, epsilon = 1e-12);
    assert_abs_diff_eq!(m.eval(0.0), 1.0, epsilon = 1e-12);
}

#[test]
fn linear_profile_has_constant_density() {
    let p = Profile::linear(3.0, 1.5, 4.0, 65).unwrap();
    let d = decompose(&p, LevelPolicy::default()).unwrap();
    assert_eq!(d.x_p, 0.0);
    for f in &d.f {
        assert_abs_diff_eq!(*f, 1.0, epsilon = 1e-12);
    }
    assert!(d.mass_defect < 1e-12);
}

#[test]
fn supercritical_minimizer_carries_the_excess() {
    let spec = MobilitySpec::bosonic(4.0);
    let mc = critical_mass(&spec, 1.0).unwrap().value.unwrap();
    let m = 1.5 * mc;
    let n = 1025;
    let x = uniform_grid(m, n);
    let eq = equilibrium_profile(&spec, 1.0, m, &x).unwrap();
    let p = Profile::new(0.0, m, 1.0, 4.0, x, eq.u).unwrap();
    let d = decompose(&p, LevelPolicy::default()).unwrap();
    assert!(d.x_p_lo <= m - mc && m - mc <= d.x_p_hi, "{} not in [{}, {}]", m - mc, d.x_p_lo, d.x_p_hi);
    // f matches f_c away from the singular origin.
    for (r, f) in d.r.iter().zip(&d.f) {
        if r.abs() > 0.2 && r.abs() < 0.95 {
            let fc = steady_density(&spec, 0.0, *r).unwrap();
            assert!((f - fc).abs() / fc < 0.02, "f({r}) = {f} vs {fc}");
        }
    }
}

#[test]
fn subcritical_minimizer_has_no_atom() {
    let spec = MobilitySpec::bosonic(4.0);
    let mc = critical_mass(&spec, 1.0).unwrap().value.unwrap();
    let m = 0.5 * mc;
    let theta = theta_of_mass(&spec, 1.0, m).unwrap();
    let x = uniform_grid(m, 513);
    let eq = equilibrium_profile(&spec, 1.0, m, &x).unwrap();
    let p = Profile::new(0.0, m, 1.0, 4.0, x, eq.u).unwrap();
    let d = decompose(&p, LevelPolicy::default()).unwrap();
    assert!(d.x_p <= d.level_tol * d.sup_f());
    let dx = m / 512.0;
    for (r, f) in d.r.iter().zip(&d.f) {
        let exact = steady_density(&spec, theta, *r).unwrap();
        assert!((f - exact).abs() <= 20.0 * dx * exact.max(1.0), "f({r}) = {f} vs {exact}");
    }
}

#[test]
fn non_monotone_profile_is_rejected() {
    let x = uniform_grid(1.0, 5);
    let p = Profile::new(0.0, 1.0, 1.0, 4.0, x, vec![-1.0, 0.2, 0.1, 0.5, 1.0]).unwrap();
    assert!(matches!(decompose(&p, LevelPolicy::default()), Err(Error::Validation(_))));
    assert!(matches!(generalized_inverse(&p), Err(Error::Validation(_))));
}

#[test]
fn mass_mismatch_is_reported() {
    let r = two_sided_nodes(1.0, 4);
    let f = vec![1.0; r.len()];
    let cdf = cdf_from_density(&measure(1.0, 4.0, r, f, 0.0)).unwrap();
    assert!(matches!(pseudo_inverse(&cdf, 2.5), Err(Error::MassMismatch { .. })));
}

#[test]
fn sign_change_examples() {
    assert_eq!(sign_changes(&[1.0, 2.0, 0.5]), 0);
    assert_eq!(sign_changes(&[-1.0, 1.0]), 1);
    assert_eq!(sign_changes(&[1.0, -2.0, 3.0]), 2);
    assert_eq!(sign_changes(&[0.0, -1.0, 0.0, 0.0, 2.0]), 1);
}

#[test]
fn composition_identity_at_random_levels() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
    let m = 2.0;
    let p = Profile::from_fn(m, 1.0, 4.0, 257, |x| ((x - 1.0) + 0.3 * (x - 1.0).powi(3)) / 1.3).unwrap();
    let cdf = generalized_inverse(&p).unwrap();
    for _ in 0..33 {
        let r: f64 = rng.gen_range(-0.99..0.99);
        let x = cdf.eval(r);
        assert_abs_diff_eq!(p.eval(x), r, epsilon = 1e-12);
    }
}

/// Smooth increasing profile on n nodes with slope exp(Σ aₖ sin(kπx/m)), optionally with a zero
/// plateau of about the given length in the middle.
fn random_profile(m: f64, n: usize, coeffs: &[f64], plateau: f64) -> Profile {
    let x = uniform_grid(m, n);
    let slope = |x: f64| {
        let s: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * ((k + 1) as f64 * std::f64::consts::PI * x / m).sin())
            .sum();
        s.exp()
    };
    // Cumulative slope by fine trapezoid.
    let fine = 64;
    let mut cum = vec![0.0; n];
    for i in 1..n {
        let h = (x[i] - x[i - 1]) / fine as f64;
        let mut acc = 0.0;
        for k in 0..fine {
            let a = x[i - 1] + k as f64 * h;
            acc += 0.5 * h * (slope(a) + slope(a + h));
        }
        cum[i] = cum[i - 1] + acc;
    }
    let mid = (n - 1) / 2;
    let flat = ((plateau / (m / (n - 1) as f64)).round() as usize).min(mid / 2);
    let (a, b) = (mid - flat / 2, mid - flat / 2 + flat);
    let u: Vec<f64> = (0..n)
        .map(|i| {
            if i < a {
                -(cum[a] - cum[i]) / cum[a]
            } else if i <= b {
                0.0
            } else {
                (cum[i] - cum[b]) / (cum[n - 1] - cum[b])
            }
        })
        .collect();
    Profile::new(0.0, m, 1.0, 4.0, x, u).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generalized_inverse_then_pseudo_inverse_is_exact_at_nodes(
        n in 16usize..128,
        coeffs in prop::collection::vec(-0.8f64..0.8, 1..5),
        plateau in prop_oneof![Just(0.0), 0.05f64..0.4],
    ) {
        let p = random_profile(2.0, n, &coeffs, plateau);
        let cdf = generalized_inverse(&p).unwrap();
        let back = pseudo_inverse_on_grid(&cdf, p.m, &p.x).unwrap();
        for (a, b) in back.iter().zip(&p.u) {
            prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
        }
    }

    #[test]
    fn cdf_is_monotone_with_mass_m(
        weights in prop::collection::vec(0.1f64..4.0, 8..64),
        x_p in prop_oneof![Just(0.0), 0.01f64..1.0],
    ) {
        let k = weights.len() / 2;
        let r = two_sided_nodes(1.0, k);
        let f: Vec<f64> = r.iter().enumerate().map(|(j, _)| weights[j % weights.len()]).collect();
        let d = measure(1.0, 3.0, r, f, x_p);
        let cdf = cdf_from_density(&d).unwrap();
        prop_assert!(cdf.validate().is_ok());
        prop_assert!((cdf.mass() - d.mass).abs() <= 1e-12 * d.mass);
        prop_assert!((cdf.eval(0.0) - cdf.eval_left(0.0) - x_p).abs() <= 1e-12);
    }

    #[test]
    fn decompose_conserves_mass(
        n in 16usize..128,
        coeffs in prop::collection::vec(-0.8f64..0.8, 1..5),
        plateau in prop_oneof![Just(0.0), 0.05f64..0.4],
    ) {
        let p = random_profile(2.0, n, &coeffs, plateau);
        let d = decompose(&p, LevelPolicy::default()).unwrap();
        prop_assert!(d.mass_defect <= 4.0 * p.max_dx(), "defect {}", d.mass_defect);
        prop_assert!(d.x_p_lo <= d.x_p && d.x_p <= d.x_p_hi);
    }

    #[test]
    fn round_trip_recovers_the_density(
        n in 16usize..128,
        weights in prop::collection::vec(0.5f64..2.0, 1..6),
    ) {
        // Smooth density: f(r) = a + b r² with random coefficients from the weights.
        let a = weights[0];
        let b = weights[weights.len() - 1];
        let r = two_sided_nodes(1.0, n);
        let f: Vec<f64> = r.iter().map(|r| a + b * r * r).collect();
        let d = measure(1.0, 4.0, r.clone(), f, 0.0);
        let cdf = cdf_from_density(&d).unwrap();
        let p = pseudo_inverse(&cdf, d.mass).unwrap();
        let back = decompose(&p, LevelPolicy::default()).unwrap();
        let dr = 1.0 / n as f64;
        for (rb, fb) in back.r.iter().zip(&back.f) {
            if rb.abs() >= 0.1 && rb.abs() <= 0.95 {
                let exact = a + b * rb * rb;
                prop_assert!((fb - exact).abs() <= 8.0 * dr * (a + 2.0 * b), "f({}) = {} vs {}", rb, fb, exact);
            }
        }
        prop_assert!(back.x_p <= dr * (a + b));
    }

    #[test]
    fn sign_changes_invariant_under_rescaling(
        w in prop::collection::vec(-5.0f64..5.0, 0..40),
        scale in 1e-3f64..1e3,
    ) {
        let scaled: Vec<f64> = w.iter().map(|v| v * scale).collect();
        prop_assert_eq!(sign_changes(&w), sign_changes(&scaled));
    }

    #[test]
    fn sign_changes_invariant_under_refinement(
        w in prop::collection::vec(-5.0f64..5.0, 2..40),
    ) {
        // Linear interpolation at midpoints adds no strict alternation.
        let mut fine = Vec::with_capacity(2 * w.len());
        for pair in w.windows(2) {
            fine.push(pair[0]);
            if pair[0] * pair[1] > 0.0 {
                fine.push(0.5 * (pair[0] + pair[1]));
            }
        }
        fine.push(*w.last().unwrap());
        prop_assert_eq!(sign_changes(&w), sign_changes(&fine));
    }
}
