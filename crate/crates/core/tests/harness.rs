use std::path::Path;

use bosefp::harness::*;
use bosefp::solver::{simulate, SolverConfig, Trajectory};
use bosefp::transform::Profile;
use bosefp::Error;

fn small_scenario(name: &str) -> ScenarioSpec {
    let mut s = scenarios::stationary(name, 0.5, 65, 3.193_673_375_529_992_3);
    s.t_end = 1.0;
    s
}

fn resolve(spec: &ScenarioSpec) -> Scenario {
    spec.resolve(&Tolerances::default()).unwrap()
}

fn assert_bit_equal(a: &Trajectory, b: &Trajectory) {
    assert_eq!(a.config, b.config);
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.barriers, b.barriers);
    assert_eq!(a.snapshots.len(), b.snapshots.len());
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        assert_eq!(x.t.to_bits(), y.t.to_bits());
        assert!(x.u.iter().zip(&y.u).all(|(p, q)| p.to_bits() == q.to_bits()));
        assert!(x.x.iter().zip(&y.x).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(format!("{x:?}"), format!("{y:?}"));
    }
}

#[test]
fn persistence_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let u0 = Profile::from_fn(1.0, 1.0, 4.0, 33, |x| (2.0 * x - 1.0) * (1.0 + 0.3 * (2.0 * x - 1.0).powi(2)) / 1.3).unwrap();
    let mut cfg = SolverConfig::new(4.0, 1.0, 1.0, 33, 1.0);
    cfg.snapshot_interval = Some(0.01);
    let traj = simulate(&cfg, &u0).unwrap();
    assert_eq!(traj.snapshots.len(), 101);
    save_trajectory(&traj, dir.path(), true).unwrap();
    assert_bit_equal(&traj, &load_trajectory(dir.path()).unwrap());
}

#[test]
fn empty_trajectory_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let traj = Trajectory {
        config: SolverConfig::new(4.0, 1.0, 1.0, 33, 0.0),
        snapshots: Vec::new(),
        records: Vec::new(),
        stats: Default::default(),
        barriers: None,
    };
    save_trajectory(&traj, dir.path(), true).unwrap();
    assert_bit_equal(&traj, &load_trajectory(dir.path()).unwrap());
}

#[test]
fn schema_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let u0 = Profile::linear(1.0, 1.0, 4.0, 33).unwrap();
    let traj = simulate(&SolverConfig::new(4.0, 1.0, 1.0, 33, 0.1), &u0).unwrap();
    save_trajectory(&traj, dir.path(), true).unwrap();
    let path = dir.path().join("config.json");
    let text = std::fs::read_to_string(&path).unwrap().replace(TRAJECTORY_SCHEMA, "traj-0");
    std::fs::write(&path, text).unwrap();
    let err = load_trajectory(dir.path()).unwrap_err();
    assert!(matches!(err, Error::Schema(_)), "{err}");
    assert!(err.is_configuration());
}

#[test]
fn injected_entropy_increase_is_caught_with_a_witness() {
    let s = resolve(&small_scenario("entropy-fixture"));
    let mut o = run_scenario(&s, &Tolerances::default(), None).unwrap();
    assert!(o.passed);
    let traj = o.trajectory.as_mut().unwrap();
    let k = traj.records.len() / 2;
    traj.records[k].entropy += 1e-3;
    let c = verify::entropy_monotone_check(traj, &Tolerances::default());
    assert!(!c.passed);
    assert!(c.detail.contains("H rose from"), "{}", c.detail);
    assert!(c.line().starts_with("FAIL entropy-monotone"));
}

#[test]
fn verify_reads_saved_runs() {
    let dir = tempfile::tempdir().unwrap();
    let s = resolve(&small_scenario("saved"));
    run_scenario(&s, &Tolerances::default(), Some(dir.path())).unwrap();
    let suite = verify_targets(&[dir.path().to_path_buf()], &Tolerances::default()).unwrap();
    assert!(suite.passed, "{:?}", suite.lines());
    assert_eq!(suite.checks.len(), 4);
    let missing = verify_targets(&[dir.path().join("nope")], &Tolerances::default()).unwrap_err();
    assert!(missing.is_configuration());
}

#[test]
fn config_parses_and_round_trips() {
    let cfg = default_config().unwrap();
    let text = cfg.to_toml().unwrap();
    assert_eq!(ConfigFile::parse(&text).unwrap(), cfg);
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    assert_eq!(ConfigFile::load(&shipped).unwrap(), cfg);
    assert_eq!(cfg.scenarios().unwrap().len(), 7);
}

#[test]
fn config_errors() {
    let dup = ConfigFile {
        tolerances: Tolerances::default(),
        scenario: vec![small_scenario("twin"), small_scenario("twin")],
    };
    assert!(matches!(dup.scenarios(), Err(Error::Config(m)) if m.contains("duplicate")));
    assert!(matches!(ConfigFile::parse("[tolerances]\nnot_a_key = 1.0\n"), Err(Error::Config(_))));
    let mut over = toml::Table::new();
    over.insert("not_a_key".into(), toml::Value::Float(1.0));
    assert!(Tolerances::default().with_overrides(&over).is_err());
    let mut over = toml::Table::new();
    over.insert("ladder".into(), toml::Value::Float(0.5));
    assert_eq!(Tolerances::default().with_overrides(&over).unwrap().ladder, 0.5);
    let mut both = small_scenario("both");
    both.mass = Some(1.0);
    assert!(both.resolve(&Tolerances::default()).unwrap_err().is_configuration());
    let mut infinite = small_scenario("gamma2-ratio");
    infinite.gamma = 2.0;
    assert!(infinite.resolve(&Tolerances::default()).unwrap_err().is_configuration());
}

#[test]
fn single_cell_sweep_matches_run_scenario() {
    let s = resolve(&small_scenario("cell"));
    let tol = Tolerances::default();
    let direct = run_scenario(&s, &tol, None).unwrap();
    let summary = sweep(std::slice::from_ref(&s), &tol, 1, None).unwrap();
    assert_eq!(summary.rows.len(), 1);
    let row = &summary.rows[0];
    assert_eq!(row.passed, direct.passed);
    assert_eq!(row.x_p_final, direct.trajectory.as_ref().unwrap().records.last().map(|r| r.x_p));
    let mut csv = Vec::new();
    summary.condensation_map_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("name,gamma,mass_ratio,x_p_final,condensed\ncell,4,"));
}

#[test]
fn sweep_isolates_failures() {
    let good = resolve(&small_scenario("good"));
    let mut bad = resolve(&small_scenario("bad"));
    bad.initial = InitialData::Bounded {
        datum: Datum::DensityTable {
            file: "/nonexistent/density.csv".into(),
        },
    };
    let summary = sweep(&[bad, good], &Tolerances::default(), 2, None).unwrap();
    assert!(!summary.passed());
    assert!(summary.rows[0].error.as_deref().unwrap().contains("at datum"));
    assert!(summary.rows[1].passed);
}

#[test]
fn inadmissible_datum_aborts_at_admissibility() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("u.csv");
    // Flat at the level 0.3 over x ∈ [0.6, 0.8]: the slope clause fails there.
    std::fs::write(&table, "x,u\n0,-1\n0.6,0.3\n0.8,0.3\n1,1\n").unwrap();
    let mut spec = small_scenario("flat");
    spec.datum = Some(Datum::ProfileTable { file: table });
    let err = run_scenario(&resolve(&spec), &Tolerances::default(), None).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("at admissibility"), "{msg}");
    assert!(msg.contains("positive_slope (witness"), "{msg}");
    assert!(matches!(err.root(), Error::Admissibility(_)));
}

#[test]
fn density_gap_gives_an_admissible_jump() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("f.csv");
    std::fs::write(&table, "r,f\n-1,1\n-0.2,1\n-0.1,0\n0.3,0\n0.4,1\n1,1\n").unwrap();
    let mut spec = small_scenario("gap");
    spec.datum = Some(Datum::DensityTable { file: table });
    let o = run_scenario(&resolve(&spec), &Tolerances::default(), None).unwrap();
    assert!(o.admissibility.unwrap().passed);
    assert!(o.passed);
}

#[test]
fn runs_are_deterministic() {
    let s = resolve(&small_scenario("det"));
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_scenario(&s, &Tolerances::default(), Some(a.path())).unwrap();
    run_scenario(&s, &Tolerances::default(), Some(b.path())).unwrap();
    let read = |d: &Path| std::fs::read(d.join("diagnostics.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn diagnostics_csv_rejects_unknown_columns() {
    let err = read_diagnostics_csv("t,H\n0,1\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Schema(_)));
}
