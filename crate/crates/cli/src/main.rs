//! Command-line front end: equilibria, simulation, sweeps, verification, profile fits and paired comparisons.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bosefp::diagnostics::{comparison_check, intersection_check, profile_fit};
use bosefp::equilibria::{critical_mass, steady_mass, theta_of_mass, MobilitySpec};
use bosefp::harness::{
    battery, default_config, load_trajectory, run_scenario, sweep, verify_targets, ConfigFile, Scenario, Tolerances,
    VerificationSuite,
};
use bosefp::solver::Trajectory;
use bosefp::transform::{decompose, load_profile, LevelPolicy, Profile};
use bosefp::Error;
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bosefp", version, about = "Bosonic Fokker-Planck laboratory in pseudo-inverse variables")]
struct Cli {
    /// Scenario file (TOML); the built-in default scenario set is used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// TOML file of tolerance overrides (keys of the `[tolerances]` table).
    #[arg(long = "tol-overrides", global = true)]
    tol_overrides: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print m_c(R), and the steady mass, θ or density samples on request.
    Equilibrium {
        #[arg(long, default_value_t = 4.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Print the steady mass m^{(R,θ)} and, with --points, samples of f_{∞,θ}.
        #[arg(long)]
        theta: Option<f64>,
        /// Print θ^{(R,m)} for this mass.
        #[arg(long)]
        mass: Option<f64>,
        /// Number of density samples on (0, R].
        #[arg(long, default_value_t = 0)]
        points: usize,
    },
    /// Run scenarios through the full pipeline.
    Simulate {
        /// Run only the named scenario.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Run all scenarios in parallel and write a summary and a condensation map.
    Sweep,
    /// Run the acceptance battery, or the generic checks on saved runs when targets are given.
    Verify {
        /// Criteria to run, comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<String>,
        /// Saved run directories to check instead of the battery.
        targets: Vec<PathBuf>,
    },
    /// Fit the blow-up profile of a snapshot file or of a saved run's snapshot.
    ProfileFit {
        /// Snapshot JSON file or run directory.
        path: PathBuf,
        /// Snapshot index within a run directory (default: last).
        #[arg(long)]
        index: Option<usize>,
    },
    /// Paired-run checks: intersection counts, and density ordering with --ordered.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Require f_A ≤ f_B.
        #[arg(long)]
        ordered: bool,
        /// Mass window for intersection counts (default [0, min(m_A, m_B)]).
        #[arg(long, num_args = 2)]
        window: Option<Vec<f64>>,
    },
}

/// Exit status classes.
enum Failure {
    Checks(String),
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_configuration() {
            Failure::Config(e.to_string())
        } else if matches!(e.root(), Error::NotApplicable(_)) {
            Failure::Checks(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type CliResult = Result<(), Failure>;

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn load_config(cli: &Cli) -> Result<ConfigFile, Failure> {
    Ok(match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => default_config()?,
    })
}

fn tolerances(cli: &Cli, base: &Tolerances) -> Result<Tolerances, Failure> {
    Ok(match &cli.tol_overrides {
        Some(p) => base.from_override_file(p)?,
        None => base.clone(),
    })
}

fn suite_status(suite: &VerificationSuite) -> CliResult {
    if suite.passed {
        return Ok(());
    }
    let failed: Vec<&str> = suite.failures().map(|c| c.id.as_str()).collect();
    let msg = format!("failed checks: {}", failed.join(", "));
    if suite.failures().any(|c| c.configuration_error) {
        Err(Failure::Config(msg))
    } else if suite.failures().any(|c| c.error.is_some()) {
        Err(Failure::Numerical(msg))
    } else {
        Err(Failure::Checks(msg))
    }
}

fn equilibrium(gamma: f64, radius: f64, theta: Option<f64>, mass: Option<f64>, points: usize) -> CliResult {
    let spec = MobilitySpec::bosonic(gamma);
    let mc = critical_mass(&spec, radius)?;
    let mut out = json!({ "gamma": gamma, "R": radius, "m_c": mc.value, "m_c_finite": mc.finite });
    if let Some(th) = theta {
        out["theta"] = json!(th);
        out["steady_mass"] = json!(steady_mass(&spec, radius, th)?.value);
        if points > 0 {
            let samples: Vec<[f64; 2]> = (1..=points)
                .map(|k| {
                    let r = radius * k as f64 / points as f64;
                    Ok([r, spec.steady_density(th, r)?])
                })
                .collect::<Result<_, Error>>()?;
            out["density"] = json!(samples);
        }
    }
    if let Some(m) = mass {
        out["mass"] = json!(m);
        out["theta_of_mass"] = json!(theta_of_mass(&spec, radius, m)?);
    }
    print_json(&out);
    Ok(())
}

fn selected(cfg: &ConfigFile, name: Option<&str>) -> Result<Vec<Scenario>, Failure> {
    let all = cfg.scenarios()?;
    match name {
        None => Ok(all),
        Some(n) => {
            let s: Vec<Scenario> = all.into_iter().filter(|s| s.name == n).collect();
            if s.is_empty() {
                Err(Failure::Config(format!("no scenario named '{n}'")))
            } else {
                Ok(s)
            }
        }
    }
}

fn simulate(cli: &Cli, scenario: Option<&str>) -> CliResult {
    let cfg = load_config(cli)?;
    let tol = tolerances(cli, &cfg.tolerances)?;
    let mut suite = VerificationSuite::new(Vec::new());
    for s in selected(&cfg, scenario)? {
        let dir = cli.out.as_ref().map(|o| o.join(&s.name));
        let outcome = run_scenario(&s, &tol, dir.as_deref())?;
        println!("scenario {}: {}", s.name, if outcome.passed { "pass" } else { "FAIL" });
        for c in &outcome.checks {
            println!("  {}", c.line());
        }
        suite.extend(outcome.checks.into_iter().map(|mut c| {
            c.id = format!("{}@{}", c.id, s.name);
            c
        }));
    }
    suite_status(&suite)
}

fn run_sweep(cli: &Cli) -> CliResult {
    let cfg = load_config(cli)?;
    let tol = tolerances(cli, &cfg.tolerances)?;
    let scenarios = cfg.scenarios()?;
    let summary = sweep(&scenarios, &tol, cli.jobs, cli.out.as_deref())?;
    match &cli.out {
        Some(o) => {
            std::fs::create_dir_all(o).map_err(Error::from)?;
            std::fs::write(
                o.join("summary.json"),
                serde_json::to_string_pretty(&summary).map_err(Error::from)?,
            )
            .map_err(Error::from)?;
            let f = std::fs::File::create(o.join("condensation_map.csv")).map_err(Error::from)?;
            summary.condensation_map_csv(f)?;
        }
        None => summary.condensation_map_csv(std::io::stdout())?,
    }
    for r in &summary.rows {
        eprintln!(
            "{}: {}{}",
            r.name,
            if r.passed { "pass" } else { "FAIL" },
            r.error.as_ref().map_or(String::new(), |e| format!(" ({e})"))
        );
    }
    if summary.passed() {
        Ok(())
    } else {
        Err(Failure::Checks("some scenarios failed".into()))
    }
}

fn verify(cli: &Cli, criteria: &[String], targets: &[PathBuf]) -> CliResult {
    let base = match &cli.config {
        Some(p) => ConfigFile::load(p)?.tolerances,
        None => Tolerances::default(),
    };
    let tol = tolerances(cli, &base)?;
    let suite = if targets.is_empty() {
        battery(criteria, &tol)
    } else {
        verify_targets(targets, &tol)?
    };
    for line in suite.lines() {
        println!("{line}");
    }
    if let Some(o) = &cli.out {
        suite.write_report(&o.join("verify_report.json"))?;
    }
    suite_status(&suite)
}

fn load_snapshot(path: &Path, index: Option<usize>) -> Result<Profile, Failure> {
    if path.is_dir() {
        let traj = load_trajectory(path)?;
        let k = index.unwrap_or(traj.snapshots.len().saturating_sub(1));
        traj.snapshots
            .get(k)
            .cloned()
            .ok_or_else(|| Failure::Config(format!("run has {} snapshots; index {k} is out of range", traj.snapshots.len())))
    } else {
        Ok(load_profile(path)?)
    }
}

fn fit(path: &Path, index: Option<usize>) -> CliResult {
    let p = load_snapshot(path, index)?;
    let d = decompose(&p, LevelPolicy::default())?;
    let f = profile_fit(&d)?;
    print_json(&json!({
        "t": p.t,
        "gamma": p.gamma,
        "x_p": d.x_p,
        "min_slope": d.min_slope,
        "exponent": f.exponent,
        "prefactor": f.prefactor,
        "fit_window": [f.fit_window.0, f.fit_window.1],
        "residual": f.residual,
        "reference_exponent": -2.0 / p.gamma,
        "reference_prefactor": (2.0 / p.gamma).powf(1.0 / p.gamma),
    }));
    Ok(())
}

fn pair_band(a: &Trajectory, b: &Trajectory) -> f64 {
    let dx = a.snapshots[0].max_dx().max(b.snapshots[0].max_dx());
    let dt = a.config.dt.initial().max(b.config.dt.initial());
    dx + dt
}

fn compare(cli: &Cli, a: &Path, b: &Path, ordered: bool, window: Option<&[f64]>) -> CliResult {
    let base = match &cli.config {
        Some(p) => ConfigFile::load(p)?.tolerances,
        None => Tolerances::default(),
    };
    let tol = tolerances(cli, &base)?;
    let (ta, tb) = (load_trajectory(a)?, load_trajectory(b)?);
    let band = pair_band(&ta, &tb);
    let win = match window {
        Some(w) => (w[0], w[1]),
        None => (0.0, ta.config.mass.min(tb.config.mass)),
    };
    let z = intersection_check(&ta, &tb, win, tol.intersection_constant * band)?;
    let mut passed = z.passed;
    let mut out = json!({ "intersections": z });
    if ordered {
        let c = comparison_check(&ta, &tb, tol.comparison_constant * band)?;
        passed &= c.passed;
        out["comparison"] = json!(c);
    }
    out["passed"] = json!(passed);
    print_json(&out);
    if passed {
        Ok(())
    } else {
        Err(Failure::Checks("paired checks failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Equilibrium {
            gamma,
            radius,
            theta,
            mass,
            points,
        } => equilibrium(*gamma, *radius, *theta, *mass, *points),
        Command::Simulate { scenario } => simulate(&cli, scenario.as_deref()),
        Command::Sweep => run_sweep(&cli),
        Command::Verify { criteria, targets } => verify(&cli, criteria, targets),
        Command::ProfileFit { path, index } => fit(path, *index),
        Command::Compare { a, b, ordered, window } => compare(&cli, a, b, *ordered, window.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(m)) => {
            eprintln!("check failure: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
