use super::campaign::Campaign;
use crate::error::{invalid, Error, Result};

/// Per-SNR savings of partial rewind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavingsRow {
    pub ebn0_db: f64,
    pub fer: f64,
    pub ts_add_with: f64,
    pub ts_add_without: f64,
    /// Percentage reduction of `ts_add`; 0 when no frame needed a retry.
    pub ts_saving_pct: f64,
    pub nv_add_with: f64,
    pub nv_add_without: f64,
    pub nv_saving_pct: f64,
}

fn saving(with: f64, without: f64) -> f64 {
    if with.is_nan() || without.is_nan() || without == 0.0 {
        0.0
    } else {
        100.0 * (1.0 - with / without)
    }
}

/// Manifest keys that must agree between the two campaigns.
const MATCHED_KEYS: &[&str] = &[
    "n",
    "k",
    "crc",
    "info_set",
    "decoder",
    "list",
    "t_max",
    "ebn0_db",
    "seed",
    "min_errors",
    "max_frames",
    "batch",
];

/// Compare a campaign run with partial rewind against one without.
///
/// The two must share code, decoder, grid and seed. Frame counts and error
/// counts must then agree exactly; any difference is a transparency failure.
pub fn compare_pr(with: &Campaign, without: &Campaign) -> Result<Vec<SavingsRow>> {
    for key in MATCHED_KEYS {
        let (a, b) = (with.manifest.get(key), without.manifest.get(key));
        if a != b {
            return invalid(format!(
                "campaigns differ in '{key}': {} vs {}",
                a.unwrap_or("<missing>"),
                b.unwrap_or("<missing>")
            ));
        }
    }
    if with.records.len() != without.records.len() {
        return invalid(format!(
            "SNR grids differ: {} vs {} points",
            with.records.len(),
            without.records.len()
        ));
    }
    let mut rows = Vec::with_capacity(with.records.len());
    for (a, b) in with.records.iter().zip(&without.records) {
        if a.ebn0_db != b.ebn0_db {
            return invalid(format!("SNR grids differ: {} vs {}", a.ebn0_db, b.ebn0_db));
        }
        if a.frames != b.frames || a.frame_errors != b.frame_errors {
            return Err(Error::Transparency {
                ebn0_db: a.ebn0_db,
                detail: format!(
                    "{}/{} frame errors with partial rewind, {}/{} without",
                    a.frame_errors, a.frames, b.frame_errors, b.frames
                ),
            });
        }
        if a.avg_attempts != b.avg_attempts {
            return Err(Error::Transparency {
                ebn0_db: a.ebn0_db,
                detail: format!(
                    "average attempts {} with partial rewind, {} without",
                    a.avg_attempts, b.avg_attempts
                ),
            });
        }
        rows.push(SavingsRow {
            ebn0_db: a.ebn0_db,
            fer: a.fer,
            ts_add_with: a.avg_time_steps_add,
            ts_add_without: b.avg_time_steps_add,
            ts_saving_pct: saving(a.avg_time_steps_add, b.avg_time_steps_add),
            nv_add_with: a.avg_node_visits_add,
            nv_add_without: b.avg_node_visits_add,
            nv_saving_pct: saving(a.avg_node_visits_add, b.avg_node_visits_add),
        });
    }
    Ok(rows)
}
