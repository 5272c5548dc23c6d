//! Per-run records, CSV serialization, and the run summary.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "cycle,success_rate,critic_loss,mean_return,epsilon";

/// One cycle's statistics. `epsilon` is the exploration scale after the
/// cycle's decay was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRow {
    pub cycle: usize,
    pub success_rate: f64,
    pub critic_loss: f64,
    pub mean_return: f64,
    pub epsilon: f64,
}

/// Full per-seed training trace, ordered by cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub rows: Vec<CycleRow>,
}

impl RunRecord {
    pub fn success_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.success_rate).collect()
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.cycle, r.success_rate, r.critic_loss, r.mean_return, r.epsilon
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("vec writes cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Reads a per-seed CSV back into rows (seed is not part of the file).
pub fn read_record_csv(path: &Path) -> Result<Vec<CycleRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "unexpected CSV header {other:?}, expected {CSV_HEADER:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Config(format!("row {}: expected 5 fields", i + 2)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Config(format!("row {}: {e}", i + 2)))
        };
        rows.push(CycleRow {
            cycle: fields[0]
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("row {}: {e}", i + 2)))?,
            success_rate: parse(fields[1])?,
            critic_loss: parse(fields[2])?,
            mean_return: parse(fields[3])?,
            epsilon: parse(fields[4])?,
        });
    }
    Ok(rows)
}

/// End-of-run summary; `per_seed_cycles` is aligned with the config's seed
/// list and holds the first cycle whose smoothed success rate reached the
/// threshold, or null for seeds that never did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub median_cycles_to_threshold: Option<usize>,
    pub per_seed_cycles: Vec<Option<usize>>,
    pub threshold: f64,
    pub config_digest: String,
}

/// Lower median, with "never" ordered after every finite value.
pub fn median_cycles(per_seed: &[Option<usize>]) -> Option<usize> {
    if per_seed.is_empty() {
        return None;
    }
    let mut sorted: Vec<Option<usize>> = per_seed.to_vec();
    sorted.sort_by_key(|c| c.unwrap_or(usize::MAX));
    sorted[(sorted.len() - 1) / 2]
}

/// First 1-based cycle index whose smoothed value reaches the threshold.
pub fn cycles_to_threshold(smoothed: &[f64], threshold: f64) -> Option<usize> {
    smoothed
        .iter()
        .position(|&v| v >= threshold)
        .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> RunRecord {
        RunRecord {
            seed: 3,
            rows: vec![
                CycleRow {
                    cycle: 1,
                    success_rate: 0.0,
                    critic_loss: 1.25,
                    mean_return: -50.0,
                    epsilon: 0.099,
                },
                CycleRow {
                    cycle: 2,
                    success_rate: 0.5,
                    critic_loss: 0.75,
                    mean_return: -25.0,
                    epsilon: 0.09801,
                },
            ],
        }
    }

    #[test]
    fn csv_header_is_byte_exact() {
        let text = sample_record().to_csv_string();
        assert!(text.starts_with("cycle,success_rate,critic_loss,mean_return,epsilon\n"));
    }

    #[test]
    fn csv_round_trips() {
        let record = sample_record();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seed_3.csv");
        std::fs::write(&path, record.to_csv_string()).unwrap();
        let rows = read_record_csv(&path).unwrap();
        assert_eq!(rows, record.rows);
    }

    #[test]
    fn median_orders_never_after_finite() {
        assert_eq!(median_cycles(&[Some(10), Some(20), Some(30)]), Some(20));
        assert_eq!(median_cycles(&[Some(10), None, Some(30)]), Some(30));
        assert_eq!(median_cycles(&[None, None, Some(30)]), None);
        assert_eq!(median_cycles(&[Some(5), Some(7)]), Some(5));
        assert_eq!(median_cycles(&[]), None);
    }

    #[test]
    fn threshold_scan_finds_first_crossing() {
        assert_eq!(cycles_to_threshold(&[0.1, 0.5, 0.8, 0.9], 0.8), Some(3));
        assert_eq!(cycles_to_threshold(&[0.1, 0.2], 0.8), None);
    }
}
