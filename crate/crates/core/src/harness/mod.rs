//! Monte Carlo bit-error-probability engine.

mod emit;
mod range;
mod sweep;

pub use emit::{emit, render, write_block_csv, EmitError, OutputFormat, CSV_COLUMNS};
pub use range::{parse_counts, parse_values, RangeError, MAX_POINTS};
pub use sweep::{
    run_sweep, CellFailure, Fairness, RunRecord, SweepOutput, SweepSpec, SweepVariable,
};

use serde::Serialize;
use thiserror::Error;

use crate::detect::{detect_symbol, DetectError, ThresholdBank, ThresholdMode};
use crate::modem::{awgn, modulate, select_state, ModemError, NoiseSource, Scheme, SymbolBits};
use crate::params::{ChannelConfig, ParamError, SchemeConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
}

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BepEstimate {
    pub errors: u64,
    pub bits: u64,
    pub bep: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BepEstimate {
    /// Point estimate with a Wilson score interval at `z`.
    pub fn wilson(errors: u64, bits: u64, z: f64) -> Self {
        assert!(
            bits > 0 && errors <= bits,
            "need 0 <= errors <= bits, bits > 0"
        );
        let n = bits as f64;
        let p = errors as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            errors,
            bits,
            bep: p,
            ci_low: (center - half).max(0.0).min(p),
            ci_high: (center + half).min(1.0).max(p),
        }
    }

    pub fn overlaps(&self, other: &BepEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Simulates uniformly random symbols until at least `min_bits` bits have
/// been sent and counts bit errors over every position.
///
/// `n` is the number of samples per symbol.
pub fn run_point(
    scheme: Scheme,
    config: &SchemeConfig,
    channel: &ChannelConfig,
    n: usize,
    min_bits: u64,
    mode: ThresholdMode,
    rng: &mut NoiseSource,
) -> Result<BepEstimate, HarnessError> {
    if min_bits == 0 {
        return Err(HarnessError::InvalidSpec(
            "min_bits must be at least 1".into(),
        ));
    }
    if n < 2 {
        return Err(ModemError::BlockTooShort(n).into());
    }
    let (sub0, sub1) = config.subchannels()?;
    let bank = ThresholdBank::for_scheme(scheme, config, channel, mode)?;
    let bps = scheme.bits_per_symbol() as u64;
    let symbols = min_bits.div_ceil(bps);
    let mut errors = 0u64;
    for _ in 0..symbols {
        let sent = SymbolBits::random(scheme, rng);
        let block = modulate(select_state(&sent, &sub0, &sub1), n, rng)?;
        let block = awgn(block, channel.sigma_w, rng);
        let got = detect_symbol(&block, scheme, &bank)?;
        errors += sent.hamming(&got) as u64;
    }
    Ok(BepEstimate::wilson(errors, symbols * bps, Z_95))
}
