//! Versioned JSON snapshots of profiles and CSV exports for plotting.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DensityMeasure, Profile};
use crate::error::{Error, Result};

/// Snapshot schema identifier.
pub const SCHEMA: &str = "cf-1";

#[derive(Serialize, Deserialize)]
struct SnapshotRepr {
    schema: String,
    t: f64,
    m: f64,
    #[serde(rename = "R")]
    radius: f64,
    gamma: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    whole_line: bool,
    x: Vec<f64>,
    u: Vec<f64>,
}

impl Serialize for Profile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SnapshotRepr {
            schema: SCHEMA.to_string(),
            t: self.t,
            m: self.m,
            radius: self.radius,
            gamma: self.gamma,
            whole_line: self.whole_line,
            x: self.x.clone(),
            u: self.u.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SnapshotRepr::deserialize(d)?;
        if r.schema != SCHEMA {
            return Err(serde::de::Error::custom(format!(
                "snapshot schema {:?} is not supported; expected {SCHEMA:?} (re-export with this version)",
                r.schema
            )));
        }
        Ok(Profile {
            t: r.t,
            m: r.m,
            radius: r.radius,
            gamma: r.gamma,
            whole_line: r.whole_line,
            x: r.x,
            u: r.u,
        })
    }
}

pub fn profile_to_json(p: &Profile) -> Result<String> {
    Ok(serde_json::to_string(p)?)
}

pub fn profile_from_json(s: &str) -> Result<Profile> {
    let v: serde_json::Value = serde_json::from_str(s)?;
    match v.get("schema").and_then(|s| s.as_str()) {
        Some(SCHEMA) => {}
        Some(other) => {
            return Err(Error::Schema(format!(
                "snapshot schema {other:?} is not supported; expected {SCHEMA:?}"
            )))
        }
        None => return Err(Error::Schema("snapshot has no schema field".into())),
    }
    Ok(serde_json::from_value(v)?)
}

pub fn save_profile(p: &Profile, path: &Path) -> Result<()> {
    std::fs::write(path, profile_to_json(p)?)?;
    Ok(())
}

pub fn load_profile(path: &Path) -> Result<Profile> {
    profile_from_json(&std::fs::read_to_string(path)?)
}

/// CSV with header `x,u`.
pub fn write_profile_csv<W: Write>(p: &Profile, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "u"])?;
    for (x, u) in p.x.iter().zip(p.u.iter()) {
        wr.write_record([x.to_string(), u.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// CSV with header `r,f`.
pub fn write_density_csv<W: Write>(d: &DensityMeasure, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["r", "f"])?;
    for (r, f) in d.r.iter().zip(d.f.iter()) {
        wr.write_record([r.to_string(), f.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}
