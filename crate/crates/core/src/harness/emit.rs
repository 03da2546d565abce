//! CSV/JSON output of sweep records.

use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use super::RunRecord;
use crate::modem::SampleBlock;

pub const CSV_COLUMNS: [&str; 12] = [
    "scheme",
    "variable",
    "value",
    "N",
    "sigma_w",
    "bits",
    "errors",
    "bep",
    "ci_low",
    "ci_high",
    "seed",
    "fingerprint",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("no records to emit")]
    Empty,
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// 17 significant digits; parses back to the same `f64`.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct Row<'a> {
    scheme: &'a str,
    variable: &'a str,
    value: f64,
    #[serde(rename = "N")]
    n: usize,
    sigma_w: f64,
    bits: u64,
    errors: u64,
    bep: f64,
    ci_low: f64,
    ci_high: f64,
    seed: u64,
    fingerprint: &'a str,
}

impl<'a> From<&'a RunRecord> for Row<'a> {
    fn from(r: &'a RunRecord) -> Self {
        Row {
            scheme: r.scheme.name(),
            variable: r.variable.name(),
            value: r.value,
            n: r.samples_per_symbol,
            sigma_w: r.sigma_w,
            bits: r.estimate.bits,
            errors: r.estimate.errors,
            bep: r.estimate.bep,
            ci_low: r.estimate.ci_low,
            ci_high: r.estimate.ci_high,
            seed: r.seed,
            fingerprint: &r.fingerprint,
        }
    }
}

/// Serializes records to bytes.
pub fn render(records: &[RunRecord], format: OutputFormat) -> Result<Vec<u8>, EmitError> {
    if records.is_empty() {
        return Err(EmitError::Empty);
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_COLUMNS)?;
            for r in records {
                let row = Row::from(r);
                w.write_record([
                    row.scheme.to_string(),
                    row.variable.to_string(),
                    float(row.value),
                    row.n.to_string(),
                    float(row.sigma_w),
                    row.bits.to_string(),
                    row.errors.to_string(),
                    float(row.bep),
                    float(row.ci_low),
                    float(row.ci_high),
                    row.seed.to_string(),
                    row.fingerprint.to_string(),
                ])?;
            }
            w.into_inner()
                .map_err(|e| EmitError::Csv(e.into_error().into()))
        }
        OutputFormat::Json => {
            let rows: Vec<Row> = records.iter().map(Row::from).collect();
            let mut bytes = serde_json::to_vec_pretty(&rows).expect("plain data serializes");
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

pub fn emit(
    records: &[RunRecord],
    format: OutputFormat,
    path: impl AsRef<Path>,
) -> Result<(), EmitError> {
    let path = path.as_ref();
    let bytes = render(records, format)?;
    fs::write(path, bytes).map_err(|source| EmitError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// One-column dump of a sample block, for debugging.
pub fn write_block_csv(block: &SampleBlock, path: impl AsRef<Path>) -> Result<(), EmitError> {
    let path = path.as_ref();
    let mut text = String::from("x\n");
    for x in block.samples() {
        text.push_str(&float(*x));
        text.push('\n');
    }
    fs::write(path, text).map_err(|source| EmitError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{BepEstimate, SweepVariable, Z_95};
    use crate::modem::Scheme;
    use std::time::Duration;

    fn records() -> Vec<RunRecord> {
        let mut out = vec![];
        for scheme in Scheme::ALL {
            for (i, n) in [40usize, 100].into_iter().enumerate() {
                out.push(RunRecord {
                    scheme,
                    variable: SweepVariable::SamplesN,
                    value: n as f64,
                    samples_per_symbol: n * scheme.bits_per_symbol(),
                    sigma_w: 2e-5,
                    estimate: BepEstimate::wilson(17 + i as u64, 1_000, Z_95),
                    wall_time: Duration::from_millis(3),
                    seed: 42,
                    fingerprint: format!("{:016x}", scheme.tag() * 10 + i as u64),
                });
            }
        }
        out
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(render(&records(), OutputFormat::Csv).unwrap()).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        let first: Vec<_> = lines[1].split(',').collect();
        assert_eq!(first[0], "kljn");
        assert_eq!(first[1], "N");
        assert_eq!(first[2], "4.0000000000000000e1");
        assert_eq!(first[3], "40");
        assert_eq!(first[4].parse::<f64>().unwrap(), 2e-5);
        assert_eq!(first[7], "1.7000000000000001e-2");
        assert_eq!(first[7].parse::<f64>().unwrap(), 17.0 / 1000.0);
    }

    #[test]
    fn floats_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            2e-5,
            1.05e-8 + 1e-24,
            f64::MIN_POSITIVE,
            0.0,
        ] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_keys_match_csv_columns() {
        let v: serde_json::Value =
            serde_json::from_slice(&render(&records(), OutputFormat::Json).unwrap()).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 6);
        let keys: Vec<_> = arr[0].as_object().unwrap().keys().cloned().collect();
        let mut want: Vec<_> = CSV_COLUMNS.iter().map(|s| s.to_string()).collect();
        let mut got = keys;
        want.sort();
        got.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn reemit_is_byte_identical_and_empty_is_error() {
        let r = records();
        assert_eq!(
            render(&r, OutputFormat::Csv).unwrap(),
            render(&r, OutputFormat::Csv).unwrap()
        );
        assert!(matches!(
            render(&[], OutputFormat::Csv),
            Err(EmitError::Empty)
        ));
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = emit(&records(), OutputFormat::Csv, "/nonexistent/dir/out.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }

    #[test]
    fn block_dump() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("block.csv");
        let block = SampleBlock::new(vec![1.5, -2.0], 0.0, 1.0).unwrap();
        write_block_csv(&block, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
    }
}
