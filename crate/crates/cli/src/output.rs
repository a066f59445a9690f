//! CSV/JSON writers for the machine-readable artifacts.
//!
//! Every record type has a fixed column set; missing values are explicit
//! nulls (empty CSV fields), never omitted columns, so outputs stay
//! diff-able across machines and flags.

use std::path::Path;

use anyhow::Context;
use serde::Serialize;

/// Fixed-order benchmark record, one per grid point per variant.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub n: u32,
    pub variant: String,
    pub k: Option<u32>,
    pub l: Option<u32>,
    pub trials: u64,
    pub success_rate: Option<f64>,
    pub mean_queries: Option<f64>,
    pub mean_fresh_objects: Option<f64>,
    pub mean_peak_live: Option<f64>,
    pub mean_wall_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub trial: u64,
    pub variant: String,
    pub n: u32,
    pub k: u32,
    pub l: Option<u32>,
    pub seed: u64,
    pub d_true: u64,
    pub d_recovered: Option<u64>,
    pub matched: bool,
    pub levels: Option<u32>,
    pub oracle_queries: Option<u64>,
    pub fresh_objects: Option<u64>,
    pub max_peak_live: Option<u64>,
    pub base_queries: Option<u64>,
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRecord {
    pub suite: String,
    pub pass: bool,
    pub detail: String,
}

pub fn write_records<T: Serialize>(path: &Path, format: &str, records: &[T]) -> anyhow::Result<()> {
    match format {
        "csv" => {
            let mut writer = csv::Writer::from_path(path)
                .with_context(|| format!("cannot open {}", path.display()))?;
            for record in records {
                writer.serialize(record)?;
            }
            writer.flush()?;
        }
        "json" => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("cannot open {}", path.display()))?;
            let mut file = std::io::BufWriter::new(file);
            serde_json::to_writer_pretty(&mut file, records)?;
            use std::io::Write;
            writeln!(file)?;
        }
        other => anyhow::bail!("unknown format {other}"),
    }
    Ok(())
}

/// Render an optional value the way the text output shows nulls.
pub fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(v) => v.to_string(),
        None => "-".to_string(),
    }
}

pub fn wall_ms(duration: std::time::Duration, timings: bool) -> Option<f64> {
    timings.then_some(duration.as_secs_f64() * 1e3)
}
