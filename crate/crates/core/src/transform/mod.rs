//! Conversions between densities with an atom at the origin, their cdfs, and
//! pseudo-inverse profiles on the mass interval, plus the sign-change counter.

pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{derivative, locate};

pub use io::{
    load_profile, profile_from_json, profile_to_json, save_profile, write_density_csv, write_profile_csv, SCHEMA,
};

/// Relative tolerance used when comparing a table's total mass against the target mass.
pub const MASS_TOL: f64 = 1e-10;

/// A monotone grid function u on [0, m]: the pseudo-inverse of the cdf.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub t: f64,
    pub m: f64,
    pub radius: f64,
    pub gamma: f64,
    /// Set for truncations of a whole-line problem; `radius` is then the effective radius.
    pub whole_line: bool,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl Profile {
    pub fn new(t: f64, m: f64, radius: f64, gamma: f64, x: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        let p = Profile {
            t,
            m,
            radius,
            gamma,
            whole_line: false,
            x,
            u,
        };
        p.validate_grid()?;
        Ok(p)
    }

    /// Linear profile u(x) = −R + 2Rx/m on n uniform nodes.
    pub fn linear(m: f64, radius: f64, gamma: f64, n: usize) -> Result<Self> {
        let x = uniform_grid(m, n);
        let u = x.iter().map(|&xi| -radius + 2.0 * radius * xi / m).collect();
        Profile::new(0.0, m, radius, gamma, x, u)
    }

    /// Profile sampled from `g` on n uniform nodes, with exact boundary values ∓R.
    pub fn from_fn<G: Fn(f64) -> f64>(m: f64, radius: f64, gamma: f64, n: usize, g: G) -> Result<Self> {
        let x = uniform_grid(m, n);
        let mut u: Vec<f64> = x.iter().map(|&xi| g(xi)).collect();
        u[0] = -radius;
        u[n - 1] = radius;
        Profile::new(0.0, m, radius, gamma, x, u)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Grid structure: at least two nodes, strictly increasing x spanning [0, m], finite values.
    pub fn validate_grid(&self) -> Result<()> {
        let n = self.x.len();
        if n < 2 || self.u.len() != n {
            return Err(Error::Validation(format!(
                "profile needs ≥ 2 nodes with matching lengths (x: {n}, u: {})",
                self.u.len()
            )));
        }
        if !(self.m > 0.0) || !(self.radius > 0.0) {
            return Err(Error::Validation(format!(
                "profile needs m > 0 and R > 0 (m = {}, R = {})",
                self.m, self.radius
            )));
        }
        for i in 0..n - 1 {
            if !(self.x[i + 1] > self.x[i]) {
                return Err(Error::Validation(format!("x grid not strictly increasing at node {i}")));
            }
        }
        let scale = self.m.max(1.0) * 1e-12;
        if self.x[0].abs() > scale || (self.x[n - 1] - self.m).abs() > scale {
            return Err(Error::Validation(format!(
                "x grid spans [{}, {}], expected [0, {}]",
                self.x[0],
                self.x[n - 1],
                self.m
            )));
        }
        if let Some(i) = self.u.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite u at node {i}")));
        }
        Ok(())
    }

    /// Index of the first strict decrease of u, if any.
    pub fn monotonicity_violation(&self) -> Option<usize> {
        (0..self.u.len() - 1).find(|&i| self.u[i + 1] < self.u[i])
    }

    /// Full invariants: grid, monotone u, boundary values ∓R within `tol`, |u| ≤ R + tol.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        self.validate_grid()?;
        if let Some(i) = self.monotonicity_violation() {
            return Err(Error::InvariantViolation(format!(
                "u decreases between x = {} and x = {} ({} > {})",
                self.x[i],
                self.x[i + 1],
                self.u[i],
                self.u[i + 1]
            )));
        }
        let n = self.u.len();
        if (self.u[0] + self.radius).abs() > tol || (self.u[n - 1] - self.radius).abs() > tol {
            return Err(Error::InvariantViolation(format!(
                "boundary values ({}, {}) differ from ∓R = ∓{}",
                self.u[0],
                self.u[n - 1],
                self.radius
            )));
        }
        if let Some(i) = self.u.iter().position(|v| v.abs() > self.radius + tol) {
            return Err(Error::InvariantViolation(format!(
                "|u| = {} exceeds R at x = {}",
                self.u[i].abs(),
                self.x[i]
            )));
        }
        Ok(())
    }

    /// u at an arbitrary x ∈ [0, m] by linear interpolation.
    pub fn eval(&self, x: f64) -> f64 {
        crate::numerics::interp_linear(&self.x, &self.u, x)
    }

    /// Discrete ∂ₓu.
    pub fn slope(&self) -> Vec<f64> {
        derivative(&self.x, &self.u)
    }

    /// Smallest cell width.
    pub fn min_dx(&self) -> f64 {
        self.x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Largest cell width.
    pub fn max_dx(&self) -> f64 {
        self.x.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// ∫₀^m u² dx for the piecewise-linear interpolant.
    pub fn l2_norm_sq(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.u.windows(2))
            .map(|(x, u)| (x[1] - x[0]) * (u[0] * u[0] + u[0] * u[1] + u[1] * u[1]) / 3.0)
            .sum()
    }

    /// Sup-norm distance to another profile on the same grid.
    pub fn sup_distance(&self, other: &Profile) -> f64 {
        self.u
            .iter()
            .zip(other.u.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// n uniform nodes on [0, m].
pub fn uniform_grid(m: f64, n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|i| m * i as f64 / (n - 1) as f64).collect();
    x[n - 1] = m;
    x
}

/// A right-continuous non-decreasing cdf M on [−R, R] sampled at nodes.
///
/// `value[j] = M(r_j)` and `left[j] = M(r_j−)`; between nodes M is linear from
/// `value[j]` to `left[j+1]`. A jump `value[j] − left[j]` is an atom at `r_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfTable {
    pub t: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub gamma: f64,
    pub r: Vec<f64>,
    pub left: Vec<f64>,
    pub value: Vec<f64>,
}

impl CdfTable {
    pub fn mass(&self) -> f64 {
        *self.value.last().unwrap_or(&0.0)
    }

    /// M(r), right-continuous.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.r.len();
        if r < self.r[0] {
            return 0.0;
        }
        if r >= self.r[n - 1] {
            return self.value[n - 1];
        }
        let j = locate(&self.r, r);
        if r == self.r[j] {
            return self.value[j];
        }
        let s = (r - self.r[j]) / (self.r[j + 1] - self.r[j]);
        self.value[j] + s * (self.left[j + 1] - self.value[j])
    }

    /// M(r−).
    pub fn eval_left(&self, r: f64) -> f64 {
        let n = self.r.len();
        if r <= self.r[0] {
            return if r == self.r[0] { self.left[0] } else { 0.0 };
        }
        if r > self.r[n - 1] {
            return self.value[n - 1];
        }
        let j = match self.r.binary_search_by(|v| v.partial_cmp(&r).unwrap()) {
            Ok(j) => return self.left[j],
            Err(j) => j - 1,
        };
        let s = (r - self.r[j]) / (self.r[j + 1] - self.r[j]);
        self.value[j] + s * (self.left[j + 1] - self.value[j])
    }

    /// Checks ordering of nodes and values.
    pub fn validate(&self) -> Result<()> {
        let n = self.r.len();
        if n < 2 || self.left.len() != n || self.value.len() != n {
            return Err(Error::Validation("cdf table needs ≥ 2 nodes with matching columns".into()));
        }
        for j in 0..n {
            if j + 1 < n && !(self.r[j + 1] > self.r[j]) {
                return Err(Error::Validation(format!("cdf nodes not strictly increasing at {j}")));
            }
            if self.value[j] < self.left[j] || (j + 1 < n && self.left[j + 1] < self.value[j]) {
                return Err(Error::Validation(format!("cdf decreases near r = {}", self.r[j])));
            }
        }
        if self.left[0] < 0.0 {
            return Err(Error::Validation("cdf negative at −R".into()));
        }
        Ok(())
    }
}

/// Threshold policy for the zero level set {u = 0}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPolicy {
    /// Multiplier κ in the grid-scaled band width κ·max|u_{i+1} − u_i|.
    pub kappa: f64,
    /// Absolute threshold below which |u| counts as exactly zero.
    pub zero_tol: f64,
}

impl Default for LevelPolicy {
    fn default() -> Self {
        LevelPolicy {
            kappa: 2.0,
            zero_tol: 1e-9,
        }
    }
}

impl LevelPolicy {
    /// Plateau threshold max(100·eps·R, zero_tol).
    pub fn zero_level(&self, radius: f64) -> f64 {
        (100.0 * f64::EPSILON * radius).max(self.zero_tol)
    }
}

/// A measure f·dr + x_p δ₀ on [−R, R] reconstructed from, or converted to, a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMeasure {
    pub t: f64,
    pub mass: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub gamma: f64,
    /// Nodes on [−R, 0) followed by nodes on (0, R], increasing.
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    /// Mass of the atom at the origin.
    pub x_p: f64,
    /// Grid-uncertainty bracket of `x_p`.
    pub x_p_lo: f64,
    pub x_p_hi: f64,
    /// M(0−) and M(0).
    pub x_minus: f64,
    pub x_plus: f64,
    /// Grid-scaled band width max(10·eps·R, κ·max|Δu|) and the length of {|u| ≤ level_tol}.
    pub level_tol: f64,
    pub band_length: f64,
    /// Threshold used for the zero plateau.
    pub zero_level: f64,
    /// min ∂ₓu over the profile nodes (0 when built from a density).
    pub min_slope: f64,
    /// ∂ₓu interpolated at x_− and x_+.
    pub slope_at_plateau: f64,
    /// True when the density is read as unbounded near the origin.
    pub unbounded: bool,
    /// x node each r node came from (empty when built from a density).
    pub source_x: Vec<f64>,
    /// |x_p + ∫f − m| with ∫f by the end-padded trapezoid rule.
    pub mass_defect: f64,
}

/// Width of the singular envelope (2/γ)^{1/γ}|r|^{−2/γ} over |r| ≤ ℓ on one side.
pub fn envelope_width(gamma: f64, level: f64) -> f64 {
    if gamma <= 2.0 || level <= 0.0 {
        return 0.0;
    }
    let e = 1.0 - 2.0 / gamma;
    (2.0 / gamma).powf(1.0 / gamma) * level.powf(e) / e
}

/// ∫ f dr on one side: trapezoid between nodes, rectangles out to the side's ends.
fn side_mass(r: &[f64], f: &[f64], outer: f64, inner: f64) -> Vec<f64> {
    // Increments for segments [outer, r0], [r0, r1], ..., [r_last, inner]; on the
    // positive side the caller passes inner = 0 and outer = R in reversed order.
    let n = r.len();
    let mut inc = Vec::with_capacity(n + 1);
    if n == 0 {
        inc.push(0.0);
        return inc;
    }
    inc.push(f[0] * (r[0] - outer).abs());
    for j in 0..n - 1 {
        inc.push(0.5 * (f[j] + f[j + 1]) * (r[j + 1] - r[j]).abs());
    }
    inc.push(f[n - 1] * (inner - r[n - 1]).abs());
    inc
}

impl DensityMeasure {
    /// A measure from density samples and an atom at the origin; x_± and the mass follow from the data.
    pub fn from_density(t: f64, radius: f64, gamma: f64, r: Vec<f64>, f: Vec<f64>, x_p: f64) -> Result<Self> {
        if r.len() != f.len() {
            return Err(Error::Validation("r and f lengths differ".into()));
        }
        if let Some(j) = f.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Validation(format!("negative or non-finite f at r = {}", r[j])));
        }
        if x_p < 0.0 {
            return Err(Error::Validation(format!("x_p must be ≥ 0, got {x_p}")));
        }
        for j in 0..r.len() {
            if r[j] == 0.0 || r[j].abs() > radius {
                return Err(Error::Validation(format!("r node {} outside [−R,0)∪(0,R]", r[j])));
            }
            if j + 1 < r.len() && !(r[j + 1] > r[j]) {
                return Err(Error::Validation("r nodes not strictly increasing".into()));
            }
        }
        let split = r.iter().position(|&v| v > 0.0).unwrap_or(r.len());
        let left: f64 = side_mass(&r[..split], &f[..split], -radius, 0.0).iter().sum();
        let rr: Vec<f64> = r[split..].iter().rev().copied().collect();
        let fr: Vec<f64> = f[split..].iter().rev().copied().collect();
        let right: f64 = side_mass(&rr, &fr, radius, 0.0).iter().sum();
        let x_minus = left;
        let x_plus = left + x_p;
        let sup = f.iter().copied().fold(0.0, f64::max);
        Ok(DensityMeasure {
            t,
            mass: x_plus + right,
            radius,
            gamma,
            r,
            f,
            x_p,
            x_p_lo: x_p,
            x_p_hi: x_p,
            x_minus,
            x_plus,
            level_tol: 0.0,
            band_length: x_p,
            zero_level: 0.0,
            min_slope: if sup > 0.0 { 1.0 / sup } else { f64::INFINITY },
            slope_at_plateau: 0.0,
            unbounded: x_p > 0.0,
            source_x: Vec::new(),
            mass_defect: 0.0,
        })
    }

    /// Index of the first node on (0, R].
    pub fn split(&self) -> usize {
        self.r.iter().position(|&v| v > 0.0).unwrap_or(self.r.len())
    }

    /// Largest density sample.
    pub fn sup_f(&self) -> f64 {
        self.f.iter().copied().fold(0.0, f64::max)
    }

    /// ∫ f dr by the end-padded trapezoid rule.
    pub fn density_mass(&self) -> f64 {
        let s = self.split();
        let left: f64 = side_mass(&self.r[..s], &self.f[..s], -self.radius, 0.0).iter().sum();
        let rr: Vec<f64> = self.r[s..].iter().rev().copied().collect();
        let fr: Vec<f64> = self.f[s..].iter().rev().copied().collect();
        let right: f64 = side_mass(&rr, &fr, self.radius, 0.0).iter().sum();
        left + right
    }

    /// The recorded constant C in f(r) ≤ C|r|^{−2/γ}.
    pub fn upper_bound_constant(&self) -> f64 {
        let e = 2.0 / self.gamma;
        self.r
            .iter()
            .zip(self.f.iter())
            .map(|(r, f)| f * r.abs().powf(e))
            .fold(0.0, f64::max)
    }
}

/// The cdf M(r) = μ([−R, r]) of a density measure, with the jump x_p at r = 0.
///
/// Each side's increments are scaled so that M(0−) = x_− and M(R) − M(0) = m − x_+.
pub fn cdf_from_density(d: &DensityMeasure) -> Result<CdfTable> {
    if let Some(j) = d.f.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::Validation(format!("negative density sample at r = {}", d.r[j])));
    }
    let s = d.split();
    let (rl, fl) = (&d.r[..s], &d.f[..s]);
    let inc_l = side_mass(rl, fl, -d.radius, 0.0);
    let tot_l: f64 = inc_l.iter().sum();
    let scale_l = if tot_l > 0.0 { d.x_minus / tot_l } else { 0.0 };

    let rr: Vec<f64> = d.r[s..].iter().rev().copied().collect();
    let fr: Vec<f64> = d.f[s..].iter().rev().copied().collect();
    let inc_r = side_mass(&rr, &fr, d.radius, 0.0);
    let tot_r: f64 = inc_r.iter().sum();
    let right_mass = d.mass - d.x_plus;
    let scale_r = if tot_r > 0.0 { right_mass / tot_r } else { 0.0 };

    let mut r = Vec::with_capacity(d.r.len() + 3);
    let mut left = Vec::with_capacity(d.r.len() + 3);
    let mut value = Vec::with_capacity(d.r.len() + 3);
    let mut push = |rv: f64, m: f64| {
        r.push(rv);
        left.push(m);
        value.push(m);
    };
    let mut acc = 0.0;
    if rl.first().map_or(true, |&v| v > -d.radius) {
        push(-d.radius, 0.0);
    }
    for (j, &rv) in rl.iter().enumerate() {
        acc = (acc + scale_l * inc_l[j]).min(d.x_minus);
        push(rv, acc);
    }
    r.push(0.0);
    left.push(d.x_minus);
    value.push(d.x_plus);
    // Positive side: increments were accumulated from R inward; walk them outward.
    let np = rr.len();
    let mut acc_r = d.x_plus;
    for k in 0..np {
        // Segment between 0 (or the previous node) and node rr[np-1-k].
        acc_r = (acc_r + scale_r * inc_r[np - k]).min(d.mass);
        r.push(rr[np - 1 - k]);
        left.push(acc_r);
        value.push(acc_r);
    }
    if rr.first().map_or(true, |&v| v < d.radius) {
        r.push(d.radius);
        left.push(d.mass);
        value.push(d.mass);
    } else if let Some(v) = value.last_mut() {
        *v = d.mass;
        *left.last_mut().unwrap() = d.mass;
    }
    if d.x_p == 0.0 && rl.is_empty() && np == 0 {
        return Err(Error::Validation("empty density measure".into()));
    }
    let t = CdfTable {
        t: d.t,
        radius: d.radius,
        gamma: d.gamma,
        r,
        left,
        value,
    };
    t.validate()?;
    Ok(t)
}

fn check_mass(cdf: &CdfTable, m: f64) -> Result<()> {
    let found = cdf.mass();
    if (found - m).abs() > MASS_TOL * m.max(1.0) {
        return Err(Error::MassMismatch { expected: m, found });
    }
    Ok(())
}

/// The pseudo-inverse u(x) = min{r : M(r) ≥ x} on its natural grid: the distinct values of M at
/// the table nodes, with both ends of every jump so that atoms become flat segments.
pub fn pseudo_inverse(cdf: &CdfTable, m: f64) -> Result<Profile> {
    cdf.validate()?;
    check_mass(cdf, m)?;
    let mut x: Vec<f64> = Vec::with_capacity(2 * cdf.r.len());
    let mut u: Vec<f64> = Vec::with_capacity(2 * cdf.r.len());
    let mut push = |xv: f64, rv: f64| {
        if x.last().map_or(true, |&last| xv > last) {
            x.push(xv);
            u.push(rv);
        }
    };
    push(0.0, cdf.r[0]);
    for j in 0..cdf.r.len() {
        push(cdf.left[j], cdf.r[j]);
        push(cdf.value[j], cdf.r[j]);
    }
    let n = x.len();
    x[n - 1] = m;
    u[n - 1] = cdf.radius;
    u[0] = -cdf.radius;
    Profile::new(cdf.t, m, cdf.radius, cdf.gamma, x, u)
}

/// u(x) = min{r : M(r) ≥ x} at the given x values.
pub fn pseudo_inverse_on_grid(cdf: &CdfTable, m: f64, xs: &[f64]) -> Result<Vec<f64>> {
    cdf.validate()?;
    check_mass(cdf, m)?;
    let n = cdf.r.len();
    Ok(xs
        .iter()
        .map(|&x| {
            if x <= cdf.value[0] {
                return cdf.r[0];
            }
            // First node whose right value reaches x.
            let j = cdf.value.partition_point(|&v| v < x).min(n - 1);
            if cdf.left[j] < x {
                return cdf.r[j];
            }
            let (a, b) = (cdf.value[j - 1], cdf.left[j]);
            if b <= a || x >= b {
                return cdf.r[j];
            }
            let s = ((x - a) / (b - a)).clamp(0.0, 1.0);
            cdf.r[j - 1] + s * (cdf.r[j] - cdf.r[j - 1])
        })
        .collect())
}

/// The generalized inverse M(r) = sup{x : u(x) ≤ r} of a profile: nodes at the distinct values of u,
/// with a jump wherever u is flat.
pub fn generalized_inverse(p: &Profile) -> Result<CdfTable> {
    p.validate_grid()?;
    if let Some(i) = p.monotonicity_violation() {
        return Err(Error::Validation(format!("profile decreases at node {i}")));
    }
    let mut r = Vec::with_capacity(p.len());
    let mut left = Vec::with_capacity(p.len());
    let mut value = Vec::with_capacity(p.len());
    let mut i = 0;
    while i < p.len() {
        let mut k = i;
        while k + 1 < p.len() && p.u[k + 1] == p.u[i] {
            k += 1;
        }
        r.push(p.u[i]);
        left.push(if i == 0 { 0.0 } else { p.x[i] });
        value.push(p.x[k]);
        i = k + 1;
    }
    let t = CdfTable {
        t: p.t,
        radius: p.radius,
        gamma: p.gamma,
        r,
        left,
        value,
    };
    t.validate()?;
    Ok(t)
}

/// x where the piecewise-linear u crosses `level` going up between nodes i and i+1.
fn crossing(p: &Profile, i: usize, level: f64) -> f64 {
    let (u0, u1) = (p.u[i], p.u[i + 1]);
    if u1 == u0 {
        return p.x[i];
    }
    let s = ((level - u0) / (u1 - u0)).clamp(0.0, 1.0);
    p.x[i] + s * (p.x[i + 1] - p.x[i])
}

/// Length and ends of {|u| ≤ ℓ} around the zero crossing, ends interpolated linearly.
fn band(p: &Profile, level: f64) -> (f64, f64, usize, usize) {
    let n = p.len();
    // First node with u ≥ −ℓ and last node with u ≤ ℓ.
    let i_lo = p.u.partition_point(|&v| v < -level);
    let i_hi = p.u.partition_point(|&v| v <= level);
    if i_hi == 0 || i_lo >= n || i_lo >= i_hi {
        // No node inside the band: the zero crossing lies within one cell.
        let k = p.u.partition_point(|&v| v < 0.0).clamp(1, n - 1);
        let x0 = crossing(p, k - 1, 0.0);
        return (x0, x0, k - 1, k);
    }
    let a = if i_lo == 0 { p.x[0] } else { crossing(p, i_lo - 1, -level) };
    let b = if i_hi >= n { p.x[n - 1] } else { crossing(p, i_hi - 1, level) };
    (a, b, i_lo.saturating_sub(1), i_hi.min(n - 1))
}

/// Splits a profile into f·dr + x_p δ₀ with f = 1/∂ₓu pushed through u.
pub fn decompose(p: &Profile, policy: LevelPolicy) -> Result<DensityMeasure> {
    p.validate_grid()?;
    if let Some(i) = p.monotonicity_violation() {
        return Err(Error::Validation(format!(
            "non-monotone profile at x = {} (u = {} then {})",
            p.x[i],
            p.u[i],
            p.u[i + 1]
        )));
    }
    let n = p.len();
    let eps = f64::EPSILON;
    let max_inc = p.u.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let level_tol = (10.0 * eps * p.radius).max(policy.kappa * max_inc);
    let (ba, bb, _, _) = band(p, level_tol);
    let band_length = bb - ba;

    let zero_level = policy.zero_level(p.radius);
    let (za, zb, ia, ib) = band(p, zero_level);
    let core = zb - za;
    let w_env = envelope_width(p.gamma, zero_level);
    let x_p = (core - 2.0 * w_env).max(0.0);
    let (x_minus, x_plus) = if x_p > 0.0 {
        (za + w_env, zb - w_env)
    } else {
        let mid = 0.5 * (za + zb);
        (mid, mid)
    };
    let cell = (p.x[ia + 1] - p.x[ia]) + (p.x[ib] - p.x[ib - 1]);
    let x_p_lo = (x_p - cell).max(0.0);
    let x_p_hi = (x_p + cell).min(p.m);

    let slope = p.slope();
    let min_slope = slope.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let slope_at = |x: f64| crate::numerics::interp_linear(&p.x, &slope, x);
    let slope_at_plateau = slope_at(x_minus).min(slope_at(x_plus)).max(0.0);

    let mut r = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut source_x = Vec::with_capacity(n);
    for i in 0..n {
        let ui = p.u[i];
        let keep = (ui < -zero_level && p.x[i] <= x_minus) || (ui > zero_level && p.x[i] >= x_plus);
        if !keep || !(slope[i] > 0.0) || ui.abs() > p.radius {
            continue;
        }
        if r.last().map_or(false, |&last| ui <= last) {
            continue;
        }
        r.push(ui);
        f.push(1.0 / slope[i]);
        source_x.push(p.x[i]);
    }
    let unbounded = slope_at_plateau < 1e-6 || x_p_lo > 0.0;
    let mut d = DensityMeasure {
        t: p.t,
        mass: p.m,
        radius: p.radius,
        gamma: p.gamma,
        r,
        f,
        x_p,
        x_p_lo,
        x_p_hi,
        x_minus,
        x_plus,
        level_tol,
        band_length,
        zero_level,
        min_slope,
        slope_at_plateau,
        unbounded,
        source_x,
        mass_defect: 0.0,
    };
    d.mass_defect = (d.x_p + d.density_mass() - p.m).abs();
    Ok(d)
}

/// Relative threshold below which samples count as zero in [`sign_changes`].
pub const SIGN_ZERO_TOL: f64 = 1e-10;

/// Number of strict sign alternations after dropping samples with |w| ≤ 1e−10·max|w|.
pub fn sign_changes(w: &[f64]) -> usize {
    let scale = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    sign_changes_with(w, SIGN_ZERO_TOL * scale)
}

/// Number of strict sign alternations after dropping samples with |w| ≤ `zero_tol`.
pub fn sign_changes_with(w: &[f64], zero_tol: f64) -> usize {
    let mut count = 0;
    let mut prev = 0.0f64;
    for &v in w {
        if !(v.abs() > zero_tol) {
            continue;
        }
        if prev != 0.0 && prev * v < 0.0 {
            count += 1;
        }
        prev = v.signum();
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sign_change_examples() {
        assert_eq!(sign_changes(&[1.0, 2.0, 3.0]), 0);
        assert_eq!(sign_changes(&[-1.0, 1.0]), 1);
        assert_eq!(sign_changes(&[1.0, -2.0, 3.0]), 2);
        assert_eq!(sign_changes(&[1.0, 0.0, 1e-14, -1.0]), 1);
    }

    #[test]
    fn linear_profile_decomposes_to_uniform_density() {
        let p = Profile::linear(1.0, 1.0, 4.0, 65).unwrap();
        let d = decompose(&p, LevelPolicy::default()).unwrap();
        assert_eq!(d.x_p, 0.0);
        for f in &d.f {
            assert_abs_diff_eq!(*f, 0.5, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(d.x_minus, 0.5, epsilon = 1e-12);
    }
}
