//! The default scenario set; the acceptance battery builds its runs from the same descriptors.

use super::config::{ConfigFile, ScenarioSpec, Toggles, Tolerances};
use super::datum::Datum;
use crate::error::Result;
use crate::solver::{DtPolicy, Scheme, WholeLineDatum};

use super::config::Scenario;

fn base(name: &str, gamma: f64, mass_ratio: f64, nodes: usize, t_end: f64, datum: Datum) -> ScenarioSpec {
    ScenarioSpec {
        name: name.to_string(),
        gamma,
        radius: 1.0,
        mass: None,
        mass_ratio: Some(mass_ratio),
        nodes,
        t_end,
        dt: None,
        sigma: None,
        newton_tol: None,
        snapshot_interval: None,
        snapshot_stride: None,
        scheme: Scheme::default(),
        r_ladder: None,
        datum: Some(datum),
        whole_line_datum: None,
        toggles: Toggles::default(),
        out_dir: None,
    }
}

/// Cell width of a uniform grid of `nodes` nodes on [0, m].
fn cell(mass: f64, nodes: usize) -> f64 {
    mass / (nodes - 1) as f64
}

/// Discretized entropy minimizer at `mass_ratio`·m_c(1), γ = 4, dt = Δx, over [0, 10]. Barriers
/// need a bounded datum, so they are off when the minimizer carries an atom.
pub fn stationary(name: &str, mass_ratio: f64, nodes: usize, m_c: f64) -> ScenarioSpec {
    let mut s = base(name, 4.0, mass_ratio, nodes, 10.0, Datum::Equilibrium { theta: None });
    s.toggles.barriers = mass_ratio < 1.0;
    s.dt = Some(DtPolicy::Fixed {
        dt: cell(mass_ratio * m_c, nodes),
    });
    s.snapshot_interval = Some(0.5);
    s
}

/// γ = 4 at 1.2·m_c(1) from the θ = 0.1 steady profile rescaled in mass, which stays below f_c.
pub fn supercritical_condense(nodes: usize, t_end: f64) -> ScenarioSpec {
    let mut s = base(
        "supercritical-condense",
        4.0,
        1.2,
        nodes,
        t_end,
        Datum::Equilibrium { theta: Some(0.1) },
    );
    s.snapshot_interval = Some(0.25);
    s
}

/// γ = 4 at 0.8·m_c(1) from a narrow Gaussian core that satisfies the energy criterion.
pub fn transient_condensate(nodes: usize, t_end: f64) -> ScenarioSpec {
    let mut s = base(
        "transient-condensate",
        4.0,
        0.8,
        nodes,
        t_end,
        Datum::GaussianCore {
            width: 0.05,
            floor: 0.02,
        },
    );
    s.snapshot_interval = Some(0.0125);
    s
}

/// γ = 4 at 0.5·m_c(1) from a no-flux-compatible perturbation of the steady state, dt = Δx/8.
pub fn entropy_identity(nodes: usize, m_c: f64) -> ScenarioSpec {
    let mut s = base(
        "entropy-identity",
        4.0,
        0.5,
        nodes,
        1.0,
        Datum::EquilibriumPlusPerturbation {
            theta: None,
            amp: 0.4,
            wavenumber: 2.0,
            phase: 0.0,
            compatible: true,
        },
    );
    s.dt = Some(DtPolicy::Fixed {
        dt: 0.125 * cell(0.5 * m_c, nodes),
    });
    s.snapshot_interval = Some(0.05);
    s
}

/// γ = 2 from a two-bump mixture at mass 1.5 (m_c is infinite for γ = 2).
pub fn gamma2_global(nodes: usize) -> ScenarioSpec {
    let mut s = base(
        "gamma2-global",
        2.0,
        1.0,
        nodes,
        50.0,
        Datum::Mixture {
            bumps: vec![
                super::datum::Bump {
                    weight: 1.0,
                    center: -0.4,
                    width: 0.15,
                },
                super::datum::Bump {
                    weight: 0.6,
                    center: 0.5,
                    width: 0.25,
                },
            ],
            floor: 0.1,
        },
    );
    s.mass_ratio = None;
    s.mass = Some(1.5);
    s.snapshot_interval = Some(0.5);
    s
}

/// γ = 4 Gaussian of mass 1 and width 1.2 on the ladder R ∈ {4, 6, 8}.
pub fn whole_line_gaussian(nodes: usize) -> ScenarioSpec {
    let mut s = base("whole-line-gaussian", 4.0, 1.0, nodes, 5.0, Datum::Equilibrium { theta: None });
    s.radius = 8.0;
    s.mass_ratio = None;
    s.mass = Some(1.0);
    s.datum = None;
    s.whole_line_datum = Some(WholeLineDatum::Gaussian { mass: 1.0, width: 1.2 });
    s.r_ladder = Some(vec![4.0, 6.0, 8.0]);
    s.dt = Some(DtPolicy::Fixed { dt: 0.01 });
    s.snapshot_interval = Some(0.25);
    s.toggles.barriers = false;
    s
}

/// The default scenario set as a config file.
pub fn default_config() -> Result<ConfigFile> {
    let mc = crate::equilibria::critical_mass(&crate::equilibria::MobilitySpec::bosonic(4.0), 1.0)?
        .value
        .expect("m_c(1) is finite for γ = 4");
    Ok(ConfigFile {
        tolerances: Tolerances::default(),
        scenario: vec![
            stationary("stationary-subcritical", 0.5, 513, mc),
            stationary("stationary-supercritical", 1.5, 513, mc),
            supercritical_condense(1025, 20.0),
            transient_condensate(1025, 2.0),
            entropy_identity(513, mc),
            gamma2_global(257),
            whole_line_gaussian(1025),
        ],
    })
}

/// The default scenario set, resolved.
pub fn default_scenarios() -> Result<Vec<Scenario>> {
    default_config()?.scenarios()
}
