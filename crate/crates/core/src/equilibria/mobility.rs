//! Mobility functions `h` and the entropy integrands `Φ'`, `Φ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_best_effort, QuadOptions};

/// Piecewise power-law mobility interpolated from samples `(s_i, h_i)`.
///
/// Between samples `h(z) = h_i (z/s_i)^{a_i}` with the log-log slope `a_i`;
/// below `s_0` and above `s_n` the first and last slopes are continued.
/// The continuation is used for `Φ'` only; [`MobilitySpec::h`] rejects
/// arguments outside the sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityTable {
    pub s: Vec<f64>,
    pub h: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
    #[serde(skip)]
    tail: Vec<f64>,
}

impl MobilityTable {
    pub fn new(s: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if s.len() < 2 || s.len() != h.len() {
            return Err(Error::Validation("mobility table needs at least two (s, h) rows".into()));
        }
        if s[0] <= 0.0 {
            return Err(Error::Validation("mobility table must start at s > 0".into()));
        }
        for i in 0..s.len() {
            if !(s[i].is_finite() && h[i].is_finite() && h[i] > 0.0) {
                return Err(Error::Validation(format!("row {i}: h must be positive and finite")));
            }
            if i > 0 && (s[i] <= s[i - 1] || h[i] < h[i - 1]) {
                return Err(Error::Validation(format!(
                    "row {i}: s must increase strictly and h must be non-decreasing"
                )));
            }
        }
        let mut t = MobilityTable {
            s,
            h,
            slopes: Vec::new(),
            tail: Vec::new(),
        };
        t.prepare()?;
        Ok(t)
    }

    fn prepare(&mut self) -> Result<()> {
        let n = self.s.len();
        self.slopes = (0..n - 1)
            .map(|i| (self.h[i + 1] / self.h[i]).ln() / (self.s[i + 1] / self.s[i]).ln())
            .collect();
        let a_hi = self.slopes[n - 2];
        if a_hi <= 1.0 {
            return Err(Error::Validation(format!(
                "mobility table grows too slowly at the top (log-log slope {a_hi} <= 1): 1/h not integrable"
            )));
        }
        // tail[i] = ∫_{s_i}^∞ dz / h(z)
        self.tail = vec![0.0; n];
        self.tail[n - 1] = power_tail(self.s[n - 1], self.h[n - 1], a_hi, self.s[n - 1]);
        for i in (0..n - 1).rev() {
            self.tail[i] =
                self.tail[i + 1] + power_segment(self.s[i], self.h[i], self.slopes[i], self.s[i], self.s[i + 1]);
        }
        Ok(())
    }

    /// Reads a two-column CSV with header `s,h`.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "s" || &headers[1] != "h" {
            return Err(Error::Schema("mobility table header must be `s,h`".into()));
        }
        let mut s = Vec::new();
        let mut h = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec[k]
                    .parse::<f64>()
                    .map_err(|e| Error::Schema(format!("bad number `{}`: {e}", &rec[k])))
            };
            s.push(parse(0)?);
            h.push(parse(1)?);
        }
        MobilityTable::new(s, h)
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        MobilityTable::from_csv_reader(f)
    }

    fn ensure_prepared(&self) -> std::borrow::Cow<'_, MobilityTable> {
        if self.tail.len() == self.s.len() {
            std::borrow::Cow::Borrowed(self)
        } else {
            let mut t = self.clone();
            // Validated at construction; deserialized tables are re-prepared here.
            let _ = t.prepare();
            std::borrow::Cow::Owned(t)
        }
    }

    fn h_extended(&self, z: f64) -> f64 {
        let n = self.s.len();
        if z <= self.s[0] {
            return self.h[0] * (z / self.s[0]).powf(self.slopes[0]);
        }
        if z >= self.s[n - 1] {
            return self.h[n - 1] * (z / self.s[n - 1]).powf(self.slopes[n - 2]);
        }
        let i = crate::numerics::locate(&self.s, z);
        self.h[i] * (z / self.s[i]).powf(self.slopes[i])
    }

    fn inv_h_tail(&self, z: f64) -> f64 {
        let n = self.s.len();
        if z >= self.s[n - 1] {
            return power_tail(self.s[n - 1], self.h[n - 1], self.slopes[n - 2], z);
        }
        if z < self.s[0] {
            return self.tail[0] + power_segment(self.s[0], self.h[0], self.slopes[0], z, self.s[0]);
        }
        let i = crate::numerics::locate(&self.s, z);
        self.tail[i + 1] + power_segment(self.s[i], self.h[i], self.slopes[i], z, self.s[i + 1])
    }
}

/// ∫_u^v dz / (h0 (z/s0)^a).
fn power_segment(s0: f64, h0: f64, a: f64, u: f64, v: f64) -> f64 {
    if (a - 1.0).abs() < 1e-12 {
        (s0 / h0) * (v / u).ln()
    } else {
        (s0 / h0) / (1.0 - a) * ((v / s0).powf(1.0 - a) - (u / s0).powf(1.0 - a))
    }
}

/// ∫_v^∞ dz / (h0 (z/s0)^a) for a > 1.
fn power_tail(s0: f64, h0: f64, a: f64, v: f64) -> f64 {
    (s0 / h0) / (a - 1.0) * (v / s0).powf(1.0 - a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MobilityKind {
    /// h(s) = s(1 + s^γ).
    Bosonic { gamma: f64 },
    /// φ_ε(s) = s(1 + s²η_ε(s)), equal to the bosonic mobility for s ≤ 1/ε and cubic beyond 2/ε.
    Attenuated { gamma: f64, eps: f64 },
    Tabulated { table: MobilityTable },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilitySpec {
    pub kind: MobilityKind,
    /// Smallest argument considered when inverting `Φ'`.
    pub s_cut: f64,
}

const S_CUT_DEFAULT: f64 = 1e-300;

fn tight() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// C^∞ step from 0 at t ≤ 1 to 1 at t ≥ 2, built from the bump exp(−1/z).
pub fn smooth_step(t: f64) -> f64 {
    let psi = |z: f64| if z > 0.0 { (-1.0 / z).exp() } else { 0.0 };
    let a = psi(t - 1.0);
    let b = psi(2.0 - t);
    if a + b == 0.0 {
        return if t >= 2.0 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// g(σ) = σ on [0,1], 1 + ∫_1^σ (1 − S(t)) dt on (1,2), 3/2 on [2,∞).
///
/// g is C^∞, non-decreasing with g' ∈ [0,1], so g(σ) ≤ σ; the symmetry of the
/// step makes ∫_1^2 (1 − S) = 1/2, hence g(2) = 3/2.
pub fn attenuation_g(sigma: f64) -> f64 {
    if sigma <= 1.0 {
        sigma
    } else if sigma >= 2.0 {
        1.5
    } else {
        let r = integrate_best_effort(&|t: f64| 1.0 - smooth_step(t), 1.0, sigma, tight());
        (1.0 + r.value).min(1.5)
    }
}

/// η(σ) = g(σ)^β with β = γ − 2.
pub fn attenuation_eta(sigma: f64, beta: f64) -> f64 {
    if sigma <= 1.0 {
        sigma.powf(beta)
    } else {
        attenuation_g(sigma).powf(beta)
    }
}

impl MobilitySpec {
    pub fn bosonic(gamma: f64) -> Self {
        MobilitySpec {
            kind: MobilityKind::Bosonic { gamma },
            s_cut: S_CUT_DEFAULT,
        }
    }

    pub fn attenuated(gamma: f64, eps: f64) -> Result<Self> {
        if gamma < 2.0 || !(eps > 0.0) {
            return Err(Error::Validation("attenuated mobility needs γ ≥ 2 and ε > 0".into()));
        }
        Ok(MobilitySpec {
            kind: MobilityKind::Attenuated { gamma, eps },
            s_cut: S_CUT_DEFAULT,
        })
    }

    pub fn tabulated(table: MobilityTable) -> Self {
        MobilitySpec {
            kind: MobilityKind::Tabulated { table },
            s_cut: S_CUT_DEFAULT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            MobilityKind::Bosonic { gamma } => {
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::Validation(format!("γ must be positive, got {gamma}")));
                }
            }
            MobilityKind::Attenuated { gamma, eps } => {
                if *gamma < 2.0 || !(*eps > 0.0) {
                    return Err(Error::Validation("attenuated mobility needs γ ≥ 2 and ε > 0".into()));
                }
            }
            MobilityKind::Tabulated { table } => {
                MobilityTable::new(table.s.clone(), table.h.clone())?;
            }
        }
        if !(self.s_cut > 0.0) {
            return Err(Error::Validation("s_cut must be positive".into()));
        }
        Ok(())
    }

    /// Bosonic exponent when the spec is bosonic or attenuated.
    pub fn gamma(&self) -> Option<f64> {
        match &self.kind {
            MobilityKind::Bosonic { gamma } | MobilityKind::Attenuated { gamma, .. } => Some(*gamma),
            MobilityKind::Tabulated { .. } => None,
        }
    }

    /// Growth exponent α with h(s) ~ c·s^α as s → ∞.
    pub fn tail_exponent(&self) -> f64 {
        match &self.kind {
            MobilityKind::Bosonic { gamma } => gamma + 1.0,
            MobilityKind::Attenuated { .. } => 3.0,
            MobilityKind::Tabulated { table } => {
                let t = table.ensure_prepared();
                t.slopes[t.slopes.len() - 1]
            }
        }
    }

    /// h(s).
    pub fn h(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("mobility argument must be finite and ≥ 0, got {s}")));
        }
        match &self.kind {
            MobilityKind::Tabulated { table } => {
                let n = table.s.len();
                if s < table.s[0] || s > table.s[n - 1] {
                    return Err(Error::Domain(format!(
                        "s = {s} outside tabulated range [{}, {}]",
                        table.s[0],
                        table.s[n - 1]
                    )));
                }
                Ok(table.ensure_prepared().h_extended(s))
            }
            _ => Ok(self.h_ext(s)),
        }
    }

    /// h(s) including the documented continuation of tabulated data.
    pub fn h_ext(&self, s: f64) -> f64 {
        match &self.kind {
            MobilityKind::Bosonic { gamma } => s * (1.0 + s.powf(*gamma)),
            MobilityKind::Attenuated { gamma, eps } => {
                if eps * s <= 1.0 {
                    s * (1.0 + s.powf(*gamma))
                } else {
                    let beta = gamma - 2.0;
                    let eta = eps.powf(-beta) * attenuation_eta(eps * s, beta);
                    s * (1.0 + s * s * eta)
                }
            }
            MobilityKind::Tabulated { table } => {
                if s <= 0.0 {
                    0.0
                } else {
                    table.ensure_prepared().h_extended(s)
                }
            }
        }
    }

    /// Φ'(s) = −∫_s^∞ dz/h(z).
    pub fn phi_prime(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("Φ'(s) needs s > 0 (Φ' → −∞ at 0), got {s}")));
        }
        if s.is_infinite() {
            return Ok(0.0);
        }
        match &self.kind {
            MobilityKind::Bosonic { gamma } => Ok(bosonic_phi_prime(*gamma, s)),
            MobilityKind::Attenuated { gamma, eps } => attenuated_phi_prime(*gamma, *eps, s),
            MobilityKind::Tabulated { table } => Ok(-table.ensure_prepared().inv_h_tail(s)),
        }
    }

    /// Φ'(s) by adaptive quadrature of 1/h on (s, ∞), for cross-validation.
    pub fn phi_prime_by_quadrature(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("Φ'(s) needs s > 0, got {s}")));
        }
        // z = s/t maps t ∈ (0,1] onto [s, ∞).
        let f = |t: f64| {
            let z = s / t;
            let hz = self.h_ext(z);
            if hz.is_infinite() {
                0.0
            } else {
                s / (t * t * hz)
            }
        };
        let mut pts = vec![0.0];
        for k in (1..=8).rev() {
            pts.push(0.5f64.powi(2 * k));
        }
        pts.push(1.0);
        let r = crate::numerics::integrate_pieces(f, &pts, tight())?;
        Ok(-r.value)
    }

    /// Φ(s) = ∫_0^s Φ'(σ) dσ.
    pub fn phi(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("Φ(s) needs s ≥ 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        if let MobilityKind::Bosonic { gamma } = self.kind {
            if gamma == 1.0 {
                return Ok(s * s.ln() - (1.0 + s) * s.ln_1p());
            }
            return bosonic_phi(gamma, s);
        }
        let a = s.min(1.0);
        // σ = a·w² removes the logarithmic singularity of Φ' at 0.
        let lower = integrate(
            |w: f64| {
                if w == 0.0 {
                    0.0
                } else {
                    2.0 * a * w * self.phi_prime(a * w * w).unwrap_or(0.0)
                }
            },
            0.0,
            1.0,
            tight(),
        )?;
        let mut total = lower.value;
        if s > 1.0 {
            // σ = 1/t on [1, s].
            let upper = integrate(
                |t: f64| self.phi_prime(1.0 / t).unwrap_or(0.0) / (t * t),
                1.0 / s,
                1.0,
                tight(),
            )?;
            total += upper.value;
        }
        Ok(total.min(0.0))
    }

    /// (Φ')^{-1}(y) for y < 0.
    pub fn phi_prime_inverse(&self, y: f64) -> Result<f64> {
        if !(y < 0.0) {
            return Err(Error::Domain(format!("(Φ')^{{-1}} needs y < 0, got {y}")));
        }
        if let MobilityKind::Bosonic { gamma } = self.kind {
            return Ok((-gamma * y).exp_m1().powf(-1.0 / gamma));
        }
        // Bracket in log s, then bisection safeguarded Newton steps.
        let g = |s: f64| self.phi_prime(s).map(|v| v - y);
        let mut lo = 1.0f64;
        let mut hi = 1.0f64;
        while g(lo)? > 0.0 {
            lo *= 0.5;
            if lo < self.s_cut {
                return Err(Error::Unresolved {
                    msg: "Φ' inversion below s_cut".into(),
                    lo: self.s_cut,
                    hi: lo,
                });
            }
        }
        while g(hi)? < 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Unresolved {
                    msg: "Φ' inversion overflow".into(),
                    lo: hi,
                    hi: f64::INFINITY,
                });
            }
        }
        let mut s = (lo * hi).sqrt();
        for _ in 0..200 {
            let v = g(s)?;
            if v == 0.0 {
                return Ok(s);
            }
            if v < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            // Newton step: d/ds Φ'(s) = 1/h(s).
            let newton = s - v * self.h_ext(s);
            s = if newton > lo && newton < hi {
                newton
            } else {
                (lo * hi).sqrt()
            };
            if (hi - lo) <= 1e-15 * hi {
                break;
            }
        }
        Ok(s)
    }

    /// f_{∞,θ}(r) = (Φ')^{-1}(−(r²/2 + θ)).
    pub fn steady_density(&self, theta: f64, r: f64) -> Result<f64> {
        if theta < 0.0 {
            return Err(Error::Domain(format!("θ must be ≥ 0, got {theta}")));
        }
        let level = 0.5 * r * r + theta;
        if level == 0.0 {
            return Err(Error::Singular("f_{∞,0} is singular at r = 0".into()));
        }
        if let MobilityKind::Bosonic { gamma } = self.kind {
            return Ok((gamma * level).exp_m1().powf(-1.0 / gamma));
        }
        self.phi_prime_inverse(-level)
    }
}

fn bosonic_phi_prime(gamma: f64, s: f64) -> f64 {
    if s >= 1.0 {
        -(s.powf(-gamma)).ln_1p() / gamma
    } else {
        s.ln() - s.powf(gamma).ln_1p() / gamma
    }
}

fn bosonic_phi(gamma: f64, s: f64) -> Result<f64> {
    // Φ(s) = sΦ'(s) − I(s) with I(s) = ∫_0^s dσ/(1+σ^γ).
    Ok((s * bosonic_phi_prime(gamma, s) - bosonic_inverse_integral(gamma, s)?).min(0.0))
}

/// I(s) = ∫_0^s dσ/(1+σ^γ): power series near 0, asymptotic series beyond 2, quadrature between.
fn bosonic_inverse_integral(gamma: f64, s: f64) -> Result<f64> {
    let series_small = |v: f64| {
        let x = v.powf(gamma);
        let mut term = v;
        let mut sum = 0.0;
        let mut k = 0.0;
        while term.abs() > 1e-18 * v {
            sum += term / (k * gamma + 1.0);
            term *= -x;
            k += 1.0;
        }
        sum
    };
    if s <= 0.5 {
        return Ok(series_small(s));
    }
    if s >= 2.0 {
        let total = (std::f64::consts::PI / gamma) / (std::f64::consts::PI / gamma).sin();
        let x = s.powf(-gamma);
        let mut term = s * x;
        let mut tail = 0.0;
        let mut k = 1.0;
        while term.abs() > 1e-18 * s * x {
            tail += term / (k * gamma - 1.0);
            term *= -x;
            k += 1.0;
        }
        return Ok(total - tail);
    }
    let mid = integrate(|v: f64| 1.0 / (1.0 + v.powf(gamma)), 0.5, s, tight())?;
    Ok(series_small(0.5) + mid.value)
}

fn attenuated_phi_prime(gamma: f64, eps: f64, s: f64) -> Result<f64> {
    let beta = gamma - 2.0;
    let c = eps.powf(-beta) * 1.5f64.powf(beta);
    let b2 = 2.0 / eps;
    let b1 = 1.0 / eps;
    // Beyond 2/ε the mobility is exactly s(1 + c s²).
    let tail = |v: f64| 0.5 * (1.0 / (c * v * v)).ln_1p();
    if s >= b2 {
        return Ok(-tail(s));
    }
    let spec = MobilitySpec {
        kind: MobilityKind::Attenuated { gamma, eps },
        s_cut: S_CUT_DEFAULT,
    };
    let mid_lo = s.max(b1);
    let mid = integrate(|z: f64| 1.0 / spec.h_ext(z), mid_lo, b2, tight())?;
    let mut total = mid.value + tail(b2);
    if s < b1 {
        total += bosonic_phi_prime(gamma, b1) - bosonic_phi_prime(gamma, s);
    }
    Ok(-total)
}
