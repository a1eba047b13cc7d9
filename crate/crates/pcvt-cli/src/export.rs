//! CSV/JSON result emission and re-import.
//!
//! CSV is the tabular format (one row per run per stage); JSON carries the
//! full records including final generator positions. Floats are written in
//! shortest round-trip form, so re-imported statistics match in-memory ones
//! exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use pcvt::Measures;

use crate::config::ExperimentConfig;
use crate::runner::{ResultRecord, SweepPoint};

pub const CSV_HEADER: [&str; 8] = [
    "run",
    "seed",
    "stage",
    "e_minus_1",
    "h",
    "r_eps",
    "iterations",
    "seconds",
];

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub run: usize,
    pub seed: u64,
    pub stage: usize,
    pub e_minus_1: f64,
    pub h: f64,
    pub r_eps: f64,
    pub iterations: usize,
    pub seconds: f64,
}

impl CsvRow {
    pub fn measures(&self) -> Measures {
        Measures {
            e_minus_1: self.e_minus_1,
            h: self.h,
            r_eps: self.r_eps,
        }
    }
}

/// Write the per-stage rows of a batch as CSV. Failed runs contribute no
/// rows; an empty record set produces a header-only file.
pub fn write_csv<W: Write>(out: W, records: &[ResultRecord]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rec in records {
        for s in &rec.stages {
            w.write_record(&[
                rec.run.to_string(),
                rec.seed.to_string(),
                s.stage.to_string(),
                s.e_minus_1.to_string(),
                s.h.to_string(),
                s.r_eps.to_string(),
                s.iterations.to_string(),
                s.seconds.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, records: &[ResultRecord]) -> anyhow::Result<()> {
    write_csv(BufWriter::new(File::create(path)?), records)
}

pub fn read_csv_file(path: &Path) -> anyhow::Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(CsvRow {
            run: rec[0].parse()?,
            seed: rec[1].parse()?,
            stage: rec[2].parse()?,
            e_minus_1: rec[3].parse()?,
            h: rec[4].parse()?,
            r_eps: rec[5].parse()?,
            iterations: rec[6].parse()?,
            seconds: rec[7].parse()?,
        });
    }
    Ok(rows)
}

/// Batch artifact: configuration plus the full records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchDocument {
    pub config: ExperimentConfig,
    pub records: Vec<ResultRecord>,
}

pub fn write_json_file(
    path: &Path,
    config: &ExperimentConfig,
    records: &[ResultRecord],
) -> anyhow::Result<()> {
    let doc = BatchDocument {
        config: config.clone(),
        records: records.to_vec(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    w.flush()?;
    Ok(())
}

pub fn read_json_file(path: &Path) -> anyhow::Result<BatchDocument> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_sweep_csv<W: Write>(out: W, points: &[SweepPoint]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "stage", "mean_e_minus_1", "min_e_minus_1", "mean_h", "mean_r_eps"])?;
    for p in points {
        w.write_record(&[
            p.k.to_string(),
            p.stage.to_string(),
            p.mean_e_minus_1.to_string(),
            p.min_e_minus_1.to_string(),
            p.mean_h.to_string(),
            p.mean_r_eps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Group rows into per-stage sample vectors (stage index -> one `Measures`
/// per run), as `summarize` expects for the hybrid batches.
pub fn stage_samples(rows: &[CsvRow]) -> Vec<Vec<Measures>> {
    let stages = rows.iter().map(|r| r.stage).max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); stages];
    for row in rows {
        out[row.stage].push(row.measures());
    }
    out
}

/// Flatten rows into one sample per run (baselines have a single stage).
pub fn flat_samples(rows: &[CsvRow]) -> Vec<Measures> {
    rows.iter().map(|r| r.measures()).collect()
}

/// In-memory counterpart of [`stage_samples`] for freshly run batches.
pub fn record_stage_samples(records: &[ResultRecord]) -> Vec<Vec<Measures>> {
    let stages = records
        .iter()
        .flat_map(|r| r.stages.iter().map(|s| s.stage))
        .max()
        .map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); stages];
    for rec in records {
        for s in &rec.stages {
            out[s.stage].push(Measures {
                e_minus_1: s.e_minus_1,
                h: s.h,
                r_eps: s.r_eps,
            });
        }
    }
    out
}

/// All stage rows of a record set, flattened.
pub fn record_flat_samples(records: &[ResultRecord]) -> Vec<Measures> {
    records
        .iter()
        .flat_map(|r| r.stages.iter())
        .map(|s| Measures {
            e_minus_1: s.e_minus_1,
            h: s.h,
            r_eps: s.r_eps,
        })
        .collect()
}

/// Strip the wall-time column from CSV text, for byte comparisons that
/// exclude timing.
pub fn csv_without_seconds(text: &str) -> String {
    text.lines()
        .map(|line| {
            match line.rsplit_once(',') {
                Some((rest, _seconds)) => rest.to_string(),
                None => line.to_string(),
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Strip `seconds` fields from a JSON document, for byte comparisons that
/// exclude timing.
pub fn json_without_seconds(text: &str) -> String {
    text.lines()
        .filter(|line| !line.trim_start().starts_with("\"seconds\""))
        .collect::<Vec<_>>()
        .join("\n")
}
