//! Results CSV and confidence intervals.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::experiment::SerRecord;

/// Column order of the results file.
pub const CSV_COLUMNS: [&str; 18] = [
    "scheme", "U", "K", "W", "ksel", "gamma_th", "spacing", "d", "cbr", "snr_db", "trials",
    "symbols", "errors", "ser", "ci_lo", "ci_hi", "seed", "wall_time_s",
];

const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `errors` out of `total`.
pub fn wilson_interval(errors: u64, total: u64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// One row of the results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scheme: String,
    #[serde(rename = "U")]
    pub users: usize,
    #[serde(rename = "K")]
    pub ports: usize,
    #[serde(rename = "W")]
    pub aperture: f64,
    pub ksel: usize,
    pub gamma_th: f64,
    pub spacing: String,
    pub d: Option<f64>,
    pub cbr: f64,
    pub snr_db: f64,
    pub trials: u64,
    pub symbols: u64,
    pub errors: u64,
    pub ser: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl From<&SerRecord> for CsvRow {
    fn from(r: &SerRecord) -> Self {
        let c = &r.config;
        CsvRow {
            scheme: c.scheme.label().to_string(),
            users: c.users,
            ports: c.ports,
            aperture: c.aperture,
            ksel: c.k_sel,
            gamma_th: c.gamma_th,
            spacing: c.spacing.label().to_string(),
            d: c.spacing.gap_fraction(),
            cbr: c.cbr,
            snr_db: c.snr_db,
            trials: r.trials,
            symbols: r.symbols_total,
            errors: r.symbol_errors,
            ser: r.ser,
            ci_lo: r.ci.0,
            ci_hi: r.ci.1,
            seed: c.seed,
            wall_time_s: r.wall_time_s,
        }
    }
}

/// Results file writer; every row is flushed as soon as it is written.
pub struct CsvSink {
    writer: csv::Writer<File>,
}

impl CsvSink {
    pub fn create<P: AsRef<Path>>(path: P) -> Result<Self> {
        let writer = csv::Writer::from_path(path)?;
        Ok(Self { writer })
    }

    pub fn write(&mut self, record: &SerRecord) -> Result<()> {
        self.writer.serialize(CsvRow::from(record))?;
        self.writer.flush()?;
        Ok(())
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<P: AsRef<Path>>(path: P) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_estimate() {
        let (lo, hi) = wilson_interval(100, 10_000);
        assert!(lo < 0.01 && 0.01 < hi);
        // Reference: statsmodels proportion_confint(100, 10000, method="wilson").
        assert!((lo - 0.008_229_336).abs() < 1e-8, "{lo}");
        assert!((hi - 0.012_146_982).abs() < 1e-8, "{hi}");
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
        let (lo, hi) = wilson_interval(0, 50);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
    }

    #[test]
    fn header_matches_column_contract() {
        let row = CsvRow {
            scheme: "turbo".into(),
            users: 1,
            ports: 2,
            aperture: 1.0,
            ksel: 1,
            gamma_th: 0.6,
            spacing: "fixed".into(),
            d: Some(0.05),
            cbr: 1.0,
            snr_db: 10.0,
            trials: 1,
            symbols: 1,
            errors: 0,
            ser: 0.0,
            ci_lo: 0.0,
            ci_hi: 1.0,
            seed: 3,
            wall_time_s: 0.5,
        };
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "turbo,1,2,1.0,1,0.6,fixed,0.05,1.0,10.0,1,1,0,0.0,0.0,1.0,3,0.5"
        );
    }
}
