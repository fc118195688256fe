//! Trajectory directories: `config.json`, `snapshots/NNNN.json` and `diagnostics.csv`.
//!
//! Floats are written in shortest round-trip form, so loading reproduces every value bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::solver::{BarrierPair, RunStats, SolverConfig, Trajectory};
use crate::transform::io::{load_profile, save_profile};

/// Trajectory directory schema identifier.
pub const TRAJECTORY_SCHEMA: &str = "traj-1";

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    config: SolverConfig,
    stats: RunStats,
    snapshot_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    barriers: Option<BarrierPair>,
}

/// Writes records as CSV with the column names of [`DiagnosticsRecord`]; `None` becomes an empty field.
pub fn write_diagnostics_csv<W: std::io::Write>(records: &[DiagnosticsRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    if records.is_empty() {
        wr.write_record(DIAGNOSTICS_COLUMNS)?;
    }
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Column order of `diagnostics.csv`.
pub const DIAGNOSTICS_COLUMNS: [&str; 16] = [
    "t",
    "H",
    "D_R",
    "entropy_identity_defect",
    "x_p_lo",
    "x_p",
    "x_p_hi",
    "E",
    "min_slope",
    "sup_f",
    "flux_left",
    "flux_right",
    "l2_sq",
    "profile_exponent",
    "profile_prefactor",
    "cum_D",
];

pub fn read_diagnostics_csv<R: std::io::Read>(r: R) -> Result<Vec<DiagnosticsRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != DIAGNOSTICS_COLUMNS {
        return Err(Error::Schema(format!("unexpected diagnostics columns: {:?}", headers)));
    }
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Saves `traj` into `dir`, creating it; existing files of the same names are replaced.
/// Snapshot files are skipped when `snapshots` is false.
pub fn save_trajectory(traj: &Trajectory, dir: &Path, snapshots: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    let header = Header {
        schema: TRAJECTORY_SCHEMA.to_string(),
        config: traj.config.clone(),
        stats: traj.stats.clone(),
        snapshot_count: if snapshots { traj.snapshots.len() } else { 0 },
        barriers: traj.barriers.clone(),
    };
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&header)?)?;
    if snapshots {
        let sd = dir.join("snapshots");
        fs::create_dir_all(&sd)?;
        for (k, s) in traj.snapshots.iter().enumerate() {
            save_profile(s, &sd.join(format!("{k:04}.json")))?;
        }
    }
    let f = fs::File::create(dir.join("diagnostics.csv"))?;
    write_diagnostics_csv(&traj.records, std::io::BufWriter::new(f))
}

/// Loads a directory written by [`save_trajectory`].
pub fn load_trajectory(dir: &Path) -> Result<Trajectory> {
    let cfg_path = dir.join("config.json");
    let text = fs::read_to_string(&cfg_path).map_err(|e| Error::Config(format!("{}: {e}", cfg_path.display())))?;
    let raw: serde_json::Value = serde_json::from_str(&text)?;
    match raw.get("schema").and_then(|s| s.as_str()) {
        Some(TRAJECTORY_SCHEMA) => {}
        other => {
            return Err(Error::Schema(format!(
                "trajectory schema {other:?} is not supported; expected {TRAJECTORY_SCHEMA:?} (re-run to migrate)"
            )))
        }
    }
    let header: Header = serde_json::from_value(raw)?;
    let mut snapshots = Vec::with_capacity(header.snapshot_count);
    for k in 0..header.snapshot_count {
        snapshots.push(load_profile(&dir.join("snapshots").join(format!("{k:04}.json")))?);
    }
    let f = fs::File::open(dir.join("diagnostics.csv"))?;
    let records = read_diagnostics_csv(std::io::BufReader::new(f))?;
    Ok(Trajectory {
        config: header.config,
        snapshots,
        records,
        stats: header.stats,
        barriers: header.barriers,
    })
}
