//! Parameter sweeps over block length or channel noise.
//!
//! Every (scheme, value) cell owns a noise source on the master seed with
//! stream id `tag(scheme) << 32 | value_index`, so results do not depend on
//! how cells are scheduled across workers.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{run_point, BepEstimate, HarnessError};
use crate::detect::ThresholdMode;
use crate::modem::{NoiseSource, Scheme};
use crate::params::{ChannelConfig, SchemeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "N")]
    SamplesN,
    #[serde(rename = "sigma_w")]
    SigmaW,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::SamplesN => "N",
            SweepVariable::SigmaW => "sigma_w",
        }
    }
}

/// How the nominal `N` maps onto samples per symbol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fairness {
    /// `N` samples per symbol for every scheme.
    PerSymbol,
    /// `N` samples per bit: a symbol gets `N * bits_per_symbol` samples.
    #[default]
    PerBit,
}

impl Fairness {
    pub fn samples_per_symbol(self, n: usize, scheme: Scheme) -> usize {
        match self {
            Fairness::PerSymbol => n,
            Fairness::PerBit => n * scheme.bits_per_symbol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// Ascending values of the swept variable.
    pub values: Vec<f64>,
    pub config: SchemeConfig,
    /// Channel used when sweeping `N`.
    pub channel: ChannelConfig,
    /// Nominal `N` used when sweeping `sigma_w`.
    pub samples_n: usize,
    pub schemes: Vec<Scheme>,
    pub min_bits: u64,
    pub seed: u64,
    pub fairness: Fairness,
    pub threshold_mode: ThresholdMode,
}

impl SweepSpec {
    pub const MIN_BITS_FLOOR: u64 = 1_000;

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidSpec(m));
        if self.values.is_empty() {
            return bad("no sweep values".into());
        }
        if self
            .values
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return bad("sweep values must be strictly ascending".into());
        }
        if self.schemes.is_empty() {
            return bad("no schemes selected".into());
        }
        if self.min_bits < Self::MIN_BITS_FLOOR {
            return bad(format!(
                "min_bits must be at least {}, got {}",
                Self::MIN_BITS_FLOOR,
                self.min_bits
            ));
        }
        match self.variable {
            SweepVariable::SamplesN => {
                if let Some(v) = self
                    .values
                    .iter()
                    .find(|v| !(v.fract() == 0.0 && **v >= 2.0 && **v <= u32::MAX as f64))
                {
                    return bad(format!("N values must be whole numbers >= 2, got {v}"));
                }
                self.channel.validate()?;
            }
            SweepVariable::SigmaW => {
                for &v in &self.values {
                    ChannelConfig::new(v)?;
                }
                if self.samples_n < 2 {
                    return bad(format!("N must be at least 2, got {}", self.samples_n));
                }
            }
        }
        self.config.validate()?;
        Ok(())
    }

    fn cell(&self, scheme: Scheme, index: usize) -> Cell {
        let value = self.values[index];
        let (n, channel) = match self.variable {
            SweepVariable::SamplesN => (value as usize, self.channel),
            SweepVariable::SigmaW => (self.samples_n, ChannelConfig { sigma_w: value }),
        };
        Cell {
            scheme,
            value,
            samples_per_symbol: self.fairness.samples_per_symbol(n, scheme),
            channel,
            stream_id: scheme.tag() << 32 | index as u64,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    scheme: Scheme,
    value: f64,
    samples_per_symbol: usize,
    channel: ChannelConfig,
    stream_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub scheme: Scheme,
    pub variable: SweepVariable,
    pub value: f64,
    /// Samples per symbol actually simulated.
    pub samples_per_symbol: usize,
    pub sigma_w: f64,
    pub estimate: BepEstimate,
    #[serde(skip)]
    pub wall_time: Duration,
    pub seed: u64,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub scheme: Scheme,
    pub value: f64,
    pub error: HarnessError,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<RunRecord>,
    pub failures: Vec<CellFailure>,
}

#[derive(Serialize)]
struct FingerprintInput<'a> {
    scheme: Scheme,
    variable: SweepVariable,
    value: f64,
    samples_per_symbol: usize,
    sigma_w: f64,
    min_bits: u64,
    seed: u64,
    stream_id: u64,
    fairness: Fairness,
    threshold_mode: ThresholdMode,
    config: &'a SchemeConfig,
}

fn fingerprint(spec: &SweepSpec, cell: &Cell) -> String {
    let input = FingerprintInput {
        scheme: cell.scheme,
        variable: spec.variable,
        value: cell.value,
        samples_per_symbol: cell.samples_per_symbol,
        sigma_w: cell.channel.sigma_w,
        min_bits: spec.min_bits,
        seed: spec.seed,
        stream_id: cell.stream_id,
        fairness: spec.fairness,
        threshold_mode: spec.threshold_mode,
        config: &spec.config,
    };
    let bytes = serde_json::to_vec(&input).expect("plain data serializes");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

fn run_cell(spec: &SweepSpec, cell: &Cell) -> Result<RunRecord, CellFailure> {
    let start = Instant::now();
    let mut rng = NoiseSource::new(spec.seed, cell.stream_id);
    let estimate = run_point(
        cell.scheme,
        &spec.config,
        &cell.channel,
        cell.samples_per_symbol,
        spec.min_bits,
        spec.threshold_mode,
        &mut rng,
    )
    .map_err(|error| CellFailure {
        scheme: cell.scheme,
        value: cell.value,
        error,
    })?;
    Ok(RunRecord {
        scheme: cell.scheme,
        variable: spec.variable,
        value: cell.value,
        samples_per_symbol: cell.samples_per_symbol,
        sigma_w: cell.channel.sigma_w,
        estimate,
        wall_time: start.elapsed(),
        seed: spec.seed,
        fingerprint: fingerprint(spec, cell),
    })
}

/// Runs every (scheme, value) cell on at most `workers` threads. Records come
/// back scheme-major in the order of `spec.schemes` and `spec.values`.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepOutput, HarnessError> {
    spec.validate()?;
    let cells: Vec<Cell> = spec
        .schemes
        .iter()
        .flat_map(|&s| (0..spec.values.len()).map(move |i| (s, i)))
        .map(|(s, i)| spec.cell(s, i))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::InvalidSpec(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| cells.par_iter().map(|c| run_cell(spec, c)).collect());
    let mut out = SweepOutput::default();
    for r in results {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(fail) => out.failures.push(fail),
        }
    }
    Ok(out)
}
