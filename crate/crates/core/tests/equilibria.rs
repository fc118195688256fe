use approx::{assert_abs_diff_eq, assert_relative_eq};
use bosefp::equilibria::*;
use bosefp::Error;
use proptest::prelude::*;

/// m_c(1) for γ = 4, from 20-digit tanh-sinh quadrature of ∫_{-1}^{1}(e^{2r²}−1)^{-1/4} dr.
const MC_GAMMA4_R1: f64 = 3.193_673_375_529_992_3;
/// m_c(1), m_c(2) for γ = 3 from the same oracle.
const MC_GAMMA3_R1: f64 = 5.055_744_249_971_730_6;
const MC_GAMMA3_R2: f64 = 5.758_021_418_318_198_5;
/// m^{(1,1)} for γ = 4.
const MASS_GAMMA4_R1_THETA1: f64 = 0.631_389_944_073_452_3;

/// Independent oracle: composite Simpson on r = w^k with many panels.
fn simpson_mass(gamma: f64, radius: f64, theta: f64, panels: usize) -> f64 {
    let k = gamma / (gamma - 2.0);
    let b = radius.powf(1.0 / k);
    let f = |w: f64| {
        if w == 0.0 {
            return if theta == 0.0 { k * (gamma / 2.0).powf(-1.0 / gamma) } else { 0.0 };
        }
        let r = w.powf(k);
        (gamma * (0.5 * r * r + theta)).exp_m1().powf(-1.0 / gamma) * k * w.powf(k - 1.0)
    };
    let h = b / panels as f64;
    let mut s = f(0.0) + f(b);
    for i in 1..panels {
        let w = i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(w);
    }
    2.0 * s * h / 3.0
}

#[test]
fn mobility_examples() {
    assert_eq!(mobility_eval(&MobilitySpec::bosonic(1.0), 1.0).unwrap(), 2.0);
    assert_eq!(mobility_eval(&MobilitySpec::bosonic(2.0), 0.0).unwrap(), 0.0);
    assert_eq!(mobility_eval(&MobilitySpec::bosonic(3.0), 2.0).unwrap(), 18.0);
}

#[test]
fn tabulated_mobility_domain_error() {
    let csv = "s,h\n0.5,0.5625\n1,2\n2,18\n4,260\n";
    let t = MobilityTable::from_csv_reader(csv.as_bytes()).unwrap();
    let spec = MobilitySpec::tabulated(t);
    assert!(matches!(spec.h(8.0), Err(Error::Domain(_))));
    assert!(matches!(spec.h(0.1), Err(Error::Domain(_))));
    assert_abs_diff_eq!(spec.h(2.0).unwrap(), 18.0, epsilon = 1e-12);
    assert!(MobilityTable::from_csv_reader("a,b\n1,2\n".as_bytes()).is_err());
}

#[test]
fn phi_prime_examples() {
    let v1 = phi_prime(&MobilitySpec::bosonic(1.0), 1.0).unwrap();
    assert_abs_diff_eq!(v1, (0.5f64).ln(), epsilon = 1e-15);
    let v2 = phi_prime(&MobilitySpec::bosonic(2.0), 1.0).unwrap();
    assert_abs_diff_eq!(v2, -0.346_573_590_279_972_65, epsilon = 1e-15);
    for g in [1.0, 2.0] {
        let spec = MobilitySpec::bosonic(g);
        let q = spec.phi_prime_by_quadrature(1.0).unwrap();
        assert_relative_eq!(q, spec.phi_prime(1.0).unwrap(), max_relative = 1e-10);
    }
    assert!(phi_prime(&MobilitySpec::bosonic(2.0), 1e12).unwrap() > -1e-20);
    assert!(matches!(phi_prime(&MobilitySpec::bosonic(2.0), 0.0), Err(Error::Domain(_))));
}

#[test]
fn phi_prime_closed_form_matches_quadrature() {
    for g in [2.0, 3.0, 4.0] {
        let spec = MobilitySpec::bosonic(g);
        let mut s = 1e-3;
        while s <= 1e3 {
            let c = spec.phi_prime(s).unwrap();
            let q = spec.phi_prime_by_quadrature(s).unwrap();
            assert_relative_eq!(c, q, max_relative = 1e-8);
            s *= 1.7;
        }
    }
}

#[test]
fn phi_examples() {
    let spec1 = MobilitySpec::bosonic(1.0);
    assert_eq!(phi(&spec1, 0.0).unwrap(), 0.0);
    assert_abs_diff_eq!(phi(&spec1, 1.0).unwrap(), -2.0 * 2f64.ln(), epsilon = 1e-14);
    let spec2 = MobilitySpec::bosonic(2.0);
    let p10 = phi(&spec2, 10.0).unwrap();
    let p1 = phi(&spec2, 1.0).unwrap();
    // 20-digit oracle values.
    assert_abs_diff_eq!(p10, -1.520_879_328_569_575, epsilon = 1e-11);
    assert_abs_diff_eq!(p1, -1.131_971_753_677_421, epsilon = 1e-11);
    assert!(p10 < 0.0 && p10.abs() / 10.0 < p1.abs());
    // Generic route through Φ' agrees with the bosonic closed route.
    let gen = MobilitySpec::attenuated(2.0, 1e-6).unwrap();
    assert_relative_eq!(phi(&gen, 1.0).unwrap(), p1, max_relative = 1e-9);
}

#[test]
fn phi_sublinear() {
    let spec = MobilitySpec::bosonic(4.0);
    let big = phi(&spec, 1e8).unwrap();
    assert!(big / 1e8 > -1e-7);
    assert_abs_diff_eq!(big, -1.110_720_734_539_591_6, epsilon = 1e-9);
}

#[test]
fn steady_density_examples() {
    let v = steady_density(&MobilitySpec::bosonic(1.0), 2f64.ln(), 0.0).unwrap();
    assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
    let w = steady_density(&MobilitySpec::bosonic(2.0), 0.0, 1.0).unwrap();
    assert_abs_diff_eq!(w, (std::f64::consts::E - 1.0).powf(-0.5), epsilon = 1e-15);
    assert_abs_diff_eq!(w, 0.762_873_978_366_890_2, epsilon = 1e-15);
    assert!(steady_density(&MobilitySpec::bosonic(3.0), 60.0, 0.5).unwrap() < 1e-25);
    assert!(matches!(
        steady_density(&MobilitySpec::bosonic(3.0), 0.0, 0.0),
        Err(Error::Singular(_))
    ));
}

#[test]
fn generic_inversion_matches_closed_form() {
    // Attenuated mobility with ε tiny coincides with the bosonic one on the relevant range.
    let g = MobilitySpec::attenuated(4.0, 1e-8).unwrap();
    let b = MobilitySpec::bosonic(4.0);
    for &(theta, r) in &[(0.1, 0.0), (0.0, 0.3), (1.0, 0.9)] {
        assert_relative_eq!(
            g.steady_density(theta, r).unwrap(),
            b.steady_density(theta, r).unwrap(),
            max_relative = 1e-9
        );
    }
}

#[test]
fn steady_mass_reference_values() {
    let spec4 = MobilitySpec::bosonic(4.0);
    let mc = steady_mass(&spec4, 1.0, 0.0).unwrap().value;
    assert_relative_eq!(mc, MC_GAMMA4_R1, max_relative = 1e-11);
    assert_relative_eq!(simpson_mass(4.0, 1.0, 0.0, 20000), MC_GAMMA4_R1, max_relative = 1e-9);
    let m1 = steady_mass(&spec4, 1.0, 1.0).unwrap().value;
    assert_relative_eq!(m1, MASS_GAMMA4_R1_THETA1, max_relative = 1e-11);
    let spec3 = MobilitySpec::bosonic(3.0);
    assert_relative_eq!(steady_mass(&spec3, 1.0, 0.0).unwrap().value, MC_GAMMA3_R1, max_relative = 1e-10);
    assert_relative_eq!(steady_mass(&spec3, 2.0, 0.0).unwrap().value, MC_GAMMA3_R2, max_relative = 1e-10);
    assert!(steady_mass(&spec4, 1.0, 40.0).unwrap().value < 1e-16);
    assert!(matches!(
        steady_mass(&MobilitySpec::bosonic(2.0), 1.0, 0.0),
        Err(Error::InfiniteMass(_))
    ));
}

#[test]
fn steady_mass_decreasing_in_theta() {
    for g in [2.0, 3.0, 4.0] {
        let spec = MobilitySpec::bosonic(g);
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let th = 1e-4 * 3f64.powi(k);
            let m = steady_mass(&spec, 1.0, th).unwrap().value;
            assert!(m < prev);
            prev = m;
        }
    }
}

#[test]
fn theta_of_mass_examples() {
    let spec4 = MobilitySpec::bosonic(4.0);
    assert_eq!(theta_of_mass(&spec4, 1.0, 1.2 * MC_GAMMA4_R1).unwrap(), 0.0);
    let m = steady_mass(&spec4, 1.0, 1.0).unwrap().value;
    assert_abs_diff_eq!(theta_of_mass(&spec4, 1.0, m).unwrap(), 1.0, epsilon = 1e-8);
    // γ = 3, half the critical mass: bisection against a fine θ scan.
    let spec3 = MobilitySpec::bosonic(3.0);
    let target = 0.5 * MC_GAMMA3_R1;
    let th = theta_of_mass(&spec3, 1.0, target).unwrap();
    assert_abs_diff_eq!(th, 0.035_254_807_439_539_06, epsilon = 1e-9);
    let mut best = (f64::INFINITY, 0.0);
    for i in 1..2000 {
        let t = i as f64 * 1e-4;
        let r = (steady_mass(&spec3, 1.0, t).unwrap().value - target).abs();
        if r < best.0 {
            best = (r, t);
        }
    }
    assert!((best.1 - th).abs() <= 1e-4);
    assert!(matches!(
        theta_of_mass(&spec4, 1.0, 1e-30),
        Err(Error::Unresolved { .. })
    ));
}

#[test]
fn critical_mass_examples() {
    let r2 = critical_mass(&MobilitySpec::bosonic(2.0), 1.0).unwrap();
    assert!(!r2.finite);
    assert!(r2.value.is_none());
    // Divergent partial integrals: increments stay near √2·ln 2.
    let n = r2.partials.len();
    assert!(r2.partials[n - 1] - r2.partials[n - 2] > 0.9);
    let r4 = critical_mass(&MobilitySpec::bosonic(4.0), 1.0).unwrap();
    assert!(r4.finite);
    assert_relative_eq!(r4.value.unwrap(), MC_GAMMA4_R1, max_relative = 1e-11);
    let a = critical_mass(&MobilitySpec::bosonic(3.0), 1.0).unwrap();
    let b = critical_mass(&MobilitySpec::bosonic(3.0), 2.0).unwrap();
    assert!(b.value.unwrap() > a.value.unwrap());
    let json = serde_json::to_value(&r4).unwrap();
    assert_eq!(json["R"], 1.0);
    assert_eq!(json["finite"], true);
    assert!(json["partials"].is_array());
    let j2 = serde_json::to_value(&r2).unwrap();
    assert!(j2.get("value").is_none());
    // Attenuated mobility grows cubically: infinite critical mass.
    let att = critical_mass(&MobilitySpec::attenuated(4.0, 0.5).unwrap(), 1.0).unwrap();
    assert!(!att.finite);
}

#[test]
fn attenuated_sandwich() {
    for eps in [0.1, 0.5, 2.0] {
        let a = MobilitySpec::attenuated(4.0, eps).unwrap();
        let b = MobilitySpec::bosonic(4.0);
        let mut s = 1e-3;
        while s < 1e4 {
            let ha = a.h(s).unwrap();
            let hb = b.h(s).unwrap();
            if s <= 1.0 / eps {
                assert_eq!(ha, hb);
            } else {
                assert!(ha <= hb);
            }
            s *= 1.3;
        }
    }
}

#[test]
fn attenuation_bump_properties() {
    let beta = 2.0;
    let mut prev = 0.0;
    for i in 0..=300 {
        let sg = i as f64 * 0.01;
        let e = attenuation_eta(sg, beta);
        assert!(e <= sg.powf(beta) + 1e-15);
        assert!(e >= prev - 1e-15);
        prev = e;
    }
    assert_abs_diff_eq!(attenuation_eta(2.0, beta), 2.25, epsilon = 1e-15);
    assert_abs_diff_eq!(attenuation_eta(5.0, beta), 2.25, epsilon = 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn phi_prime_strictly_increasing(g in 2.0f64..6.0, a in -3.0f64..3.0, d in 0.01f64..1.0) {
        let spec = MobilitySpec::bosonic(g);
        let s1 = 10f64.powf(a);
        let s2 = s1 * (1.0 + d);
        let p1 = spec.phi_prime(s1).unwrap();
        let p2 = spec.phi_prime(s2).unwrap();
        prop_assert!(p1 < p2 && p2 < 0.0);
    }

    #[test]
    fn phi_nonpositive(g in 2.0f64..6.0, a in -3.0f64..4.0) {
        let spec = MobilitySpec::bosonic(g);
        prop_assert!(spec.phi(10f64.powf(a)).unwrap() <= 0.0);
    }
}
