//! Initial-datum descriptors resolved to admissible profiles on a uniform mass grid.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::equilibria::{equilibrium_profile, theta_of_mass, MobilitySpec, SteadyState, THETA_MAX_DEFAULT};
use crate::error::{Error, Result};
use crate::numerics::{bisect, interp_linear, CdfMesh};
use crate::transform::{uniform_grid, Profile};

/// Cells of the cdf table behind density-based data.
const CDF_CELLS: usize = 4096;

/// One Gaussian bump of a mixture datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub weight: f64,
    pub center: f64,
    pub width: f64,
}

/// Initial-datum descriptor; every density is renormalized to the scenario mass on [−R, R].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Datum {
    /// Without θ: the entropy minimizer u_∞^{(R,m)}, atom included. With θ: f_{∞,θ} rescaled to mass m.
    Equilibrium {
        #[serde(default)]
        theta: Option<f64>,
    },
    /// f_{∞,θ}·(1 + amp·cos(kπr/R + phase)); θ defaults to θ^{(R,m)}.
    ///
    /// With `compatible`, the perturbation is damped by ½(1 + cos(πr/R)) so the no-flux condition
    /// holds at ±R, and the mass is matched by θ instead of by rescaling.
    EquilibriumPlusPerturbation {
        #[serde(default)]
        theta: Option<f64>,
        amp: f64,
        wavenumber: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        compatible: bool,
    },
    /// Density samples from a CSV file with header `r,f`, linearly interpolated.
    DensityTable { file: PathBuf },
    /// Profile samples from a CSV file with header `x,u`, taken as given: the x range is mapped onto
    /// [0, m] and u is interpolated linearly, with no renormalization or boundary correction.
    ProfileTable { file: PathBuf },
    /// λ^{−1}·f₀(r/λ) for a density-valued base datum.
    ScaledFamily { base: Box<Datum>, lambda: f64 },
    /// Gaussian core of the given width over a uniform floor carrying the fraction `floor` of the mass.
    GaussianCore { width: f64, floor: f64 },
    /// Positive sum of Gaussian bumps over a uniform floor density.
    Mixture { bumps: Vec<Bump>, floor: f64 },
    /// Σ wᵢ·fᵢ with each density-valued part normalized to unit mass on [−R, R].
    Sum { parts: Vec<Datum>, weights: Vec<f64> },
}

/// Scenario geometry needed to resolve a datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub gamma: f64,
    pub radius: f64,
    pub mass: f64,
    pub nodes: usize,
}

fn gaussian(r: f64, c: f64, w: f64) -> f64 {
    let z = (r - c) / w;
    (-0.5 * z * z).exp() / (w * (2.0 * std::f64::consts::PI).sqrt())
}

/// Two-column numeric CSV with a header row; the first column must increase strictly.
fn read_table(path: &PathBuf) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut r = Vec::new();
    let mut f = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("{}: bad row {:?}", path.display(), rec)))
        };
        r.push(parse(0)?);
        f.push(parse(1)?);
    }
    if r.len() < 2 || r.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(format!(
            "{}: need ≥ 2 rows with an increasing first column",
            path.display()
        )));
    }
    Ok((r, f))
}

impl Datum {
    /// Unnormalized density on [−R, R]; `None` for the minimizer, which may carry an atom, and for
    /// profile tables.
    pub fn density(&self, g: &Geometry) -> Result<Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>> {
        let spec = MobilitySpec::bosonic(g.gamma);
        Ok(Some(match self {
            Datum::Equilibrium { theta: None } | Datum::ProfileTable { .. } => return Ok(None),
            Datum::Equilibrium { theta: Some(th) } => {
                let th = *th;
                if !(th > 0.0) {
                    return Err(Error::Config(format!("equilibrium datum needs θ > 0, got {th}")));
                }
                Box::new(move |r| spec.steady_density(th, r).unwrap_or(0.0))
            }
            Datum::EquilibriumPlusPerturbation {
                theta,
                amp,
                wavenumber,
                phase,
                compatible,
            } => {
                if !(amp.abs() <= 0.5) {
                    return Err(Error::Config(format!("perturbation amplitude must be ≤ 0.5, got {amp}")));
                }
                let (a, k, ph, rad) = (*amp, *wavenumber, *phase, g.radius);
                let pi = std::f64::consts::PI;
                if *compatible {
                    let factor = move |r: f64| 1.0 + a * 0.5 * (1.0 + (pi * r / rad).cos()) * (k * pi * r / rad + ph).cos();
                    let sp = spec.clone();
                    let mass = |th: f64| -> f64 {
                        let f = |r: f64| sp.steady_density(th, r).unwrap_or(0.0) * factor(r);
                        CdfMesh::new(&f, -rad, rad, 256).map_or(f64::NAN, |c| c.mass())
                    };
                    let (lo, hi) = (1e-8, THETA_MAX_DEFAULT);
                    if !(mass(lo) > g.mass && mass(hi) < g.mass) {
                        return Err(Error::Config(format!(
                            "no θ in [{lo}, {hi}] gives the compatible perturbation mass {}",
                            g.mass
                        )));
                    }
                    let th = bisect(|t| mass(t) - g.mass, lo, hi, 1e-14, 200);
                    return Ok(Some(Box::new(move |r| spec.steady_density(th, r).unwrap_or(0.0) * factor(r))));
                }
                let th = match theta {
                    Some(t) => *t,
                    None => theta_of_mass(&spec, g.radius, g.mass)?,
                };
                if !(th > 0.0) {
                    return Err(Error::Config(
                        "perturbation needs θ > 0; give θ explicitly for supercritical masses".into(),
                    ));
                }
                Box::new(move |r| {
                    spec.steady_density(th, r).unwrap_or(0.0)
                        * (1.0 + a * (k * pi * r / rad + ph).cos())
                })
            }
            Datum::DensityTable { file } => {
                let (r, f) = read_table(file)?;
                if f.iter().any(|v| !(*v >= 0.0)) {
                    return Err(Error::Config(format!("{}: negative density sample", file.display())));
                }
                Box::new(move |x| interp_linear(&r, &f, x))
            }
            Datum::ScaledFamily { base, lambda } => {
                if !(*lambda > 0.0) {
                    return Err(Error::Config(format!("λ must be positive, got {lambda}")));
                }
                let b = base
                    .density(g)?
                    .ok_or_else(|| Error::Config("scaled family needs a density-valued base".into()))?;
                let lam = *lambda;
                Box::new(move |r| b(r / lam) / lam)
            }
            Datum::GaussianCore { width, floor } => {
                if !(*width > 0.0) || !(0.0..1.0).contains(floor) {
                    return Err(Error::Config("gaussian core needs width > 0 and 0 ≤ floor < 1".into()));
                }
                let (w, fl, rad) = (*width, *floor, g.radius);
                // Normalize the truncated core to 1 − floor and the floor to `floor` (total 1).
                let core = CdfMesh::new(&|r| gaussian(r, 0.0, w), -rad, rad, 256)?.mass();
                Box::new(move |r| (1.0 - fl) * gaussian(r, 0.0, w) / core + fl / (2.0 * rad))
            }
            Datum::Mixture { bumps, floor } => {
                if bumps.iter().any(|b| !(b.weight >= 0.0) || !(b.width > 0.0)) || !(*floor >= 0.0) {
                    return Err(Error::Config("mixture needs weights ≥ 0, widths > 0, floor ≥ 0".into()));
                }
                let (bs, fl) = (bumps.clone(), *floor);
                Box::new(move |r| fl + bs.iter().map(|b| b.weight * gaussian(r, b.center, b.width)).sum::<f64>())
            }
            Datum::Sum { parts, weights } => {
                if parts.len() != weights.len() || parts.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(Error::Config("sum needs one weight ≥ 0 per part".into()));
                }
                let mut fs: Vec<(f64, Box<dyn Fn(f64) -> f64 + Send + Sync>)> = Vec::new();
                for (p, w) in parts.iter().zip(weights.iter()) {
                    let f = p
                        .density(g)?
                        .ok_or_else(|| Error::Config("sum parts must be density-valued".into()))?;
                    let total = CdfMesh::new(&f, -g.radius, g.radius, 512)?.mass();
                    if !(total > 0.0) {
                        return Err(Error::Config("sum part has no mass on [−R, R]".into()));
                    }
                    fs.push((w / total, f));
                }
                Box::new(move |r| fs.iter().map(|(c, f)| c * f(r)).sum::<f64>())
            }
        }))
    }

    /// The profile on `g.nodes` uniform mass nodes, u = pseudo-inverse of the renormalized cdf.
    pub fn resolve(&self, g: &Geometry) -> Result<Profile> {
        let spec = MobilitySpec::bosonic(g.gamma);
        let x = uniform_grid(g.mass, g.nodes);
        if let Datum::ProfileTable { file } = self {
            let (xs, us) = read_table(file)?;
            let (x0, x1) = (xs[0], xs[xs.len() - 1]);
            let u = x.iter().map(|xi| interp_linear(&xs, &us, x0 + (x1 - x0) * xi / g.mass)).collect();
            return Profile::new(0.0, g.mass, g.radius, g.gamma, x, u);
        }
        let u = match self {
            Datum::Equilibrium { theta: None } => equilibrium_profile(&spec, g.radius, g.mass, &x)?.u,
            Datum::Equilibrium { theta: Some(th) } if *th > 0.0 => {
                let st = SteadyState::new(&spec, g.radius, *th)?;
                let c = g.mass / st.mass;
                x.iter().map(|xi| st.inverse_cdf(xi / c)).collect::<Result<_>>()?
            }
            _ => {
                let f = self.density(g)?.expect("density-valued datum");
                let mesh = CdfMesh::new(&f, -g.radius, g.radius, CDF_CELLS)?;
                let total = mesh.mass();
                if !(total > 0.0) || !total.is_finite() {
                    return Err(Error::Config(format!("datum has mass {total} on [−R, R]")));
                }
                let c = g.mass / total;
                x.iter().map(|xi| mesh.inverse(&f, xi / c)).collect()
            }
        };
        let mut u = u;
        u[0] = -g.radius;
        *u.last_mut().unwrap() = g.radius;
        Profile::new(0.0, g.mass, g.radius, g.gamma, x, u)
    }
}
