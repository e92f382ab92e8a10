use std::io::{Read, Write};
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

/// One row of sweep output: a technique evaluated at one grid point.
///
/// `setup_flops_per_symbol` carries the one-time covariance construction
/// cost that `flops_per_symbol` excludes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub technique: String,
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub v: usize,
    pub ebn0_db: Option<f64>,
    pub kappa: Option<u32>,
    pub accuracy: f64,
    pub accuracy_ci95: f64,
    pub i_tot: f64,
    pub i_dim: f64,
    pub i_per_storage_bit: Option<f64>,
    pub flops_per_symbol: f64,
    pub setup_flops_per_symbol: f64,
    pub trials: usize,
    pub seed: u64,
    pub r: usize,
    pub lambda_frac: Option<f64>,
    pub status: String,
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> anyhow::Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Writes `records` to `path`, header first, rows in the given order.
pub fn emit_csv(records: &[SweepRecord], path: &Path) -> anyhow::Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(records, std::io::BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

/// Column names in output order; matches the serialized field order.
pub const HEADER: [&str; 18] = [
    "technique",
    "n",
    "D",
    "v",
    "ebn0_db",
    "kappa",
    "accuracy",
    "accuracy_ci95",
    "i_tot",
    "i_dim",
    "i_per_storage_bit",
    "flops_per_symbol",
    "setup_flops_per_symbol",
    "trials",
    "seed",
    "r",
    "lambda_frac",
    "status",
];
