//! Noise modulators and the additive Gaussian channel.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::SubchannelParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModemError {
    #[error("{scheme} symbols carry {expected} bits, got {got}")]
    Arity {
        scheme: Scheme,
        expected: usize,
        got: usize,
    },
    #[error("sample block needs at least 2 samples, got {0}")]
    BlockTooShort(usize),
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Variance-only binary modulation.
    Kljn,
    /// One mean sub-bit and one variance sub-bit.
    Gqnm,
    /// Sum of two GQNM outputs, 16 states.
    Cgqnm,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Kljn, Scheme::Gqnm, Scheme::Cgqnm];

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Scheme::Kljn => 1,
            Scheme::Gqnm => 2,
            Scheme::Cgqnm => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Kljn => "kljn",
            Scheme::Gqnm => "gqnm",
            Scheme::Cgqnm => "cgqnm",
        }
    }

    /// Stable small integer used to derive RNG stream ids.
    pub fn tag(self) -> u64 {
        match self {
            Scheme::Kljn => 1,
            Scheme::Gqnm => 2,
            Scheme::Cgqnm => 3,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = ModemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModemError::UnknownScheme(s.to_string()))
    }
}

/// Information bits of one symbol.
///
/// Layout: KLJN `[b1]`, GQNM `[b0, b1]`, CGQNM `[b0_0, b1_0, b0_1, b1_1]`
/// where `b0_i` is the mean sub-bit and `b1_i` the variance sub-bit of
/// subchannel `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolBits {
    scheme: Scheme,
    bits: [bool; 4],
}

impl SymbolBits {
    pub fn new(scheme: Scheme, bits: &[bool]) -> Result<Self, ModemError> {
        let expected = scheme.bits_per_symbol();
        if bits.len() != expected {
            return Err(ModemError::Arity {
                scheme,
                expected,
                got: bits.len(),
            });
        }
        let mut store = [false; 4];
        store[..expected].copy_from_slice(bits);
        Ok(Self {
            scheme,
            bits: store,
        })
    }

    /// The `index`-th pattern, first bit most significant. `index` is
    /// reduced modulo the number of patterns.
    pub fn from_index(scheme: Scheme, index: u32) -> Self {
        let n = scheme.bits_per_symbol();
        let mut bits = [false; 4];
        for (i, b) in bits.iter_mut().take(n).enumerate() {
            *b = (index >> (n - 1 - i)) & 1 == 1;
        }
        Self { scheme, bits }
    }

    pub fn random(scheme: Scheme, rng: &mut impl Rng) -> Self {
        let mut bits = [false; 4];
        for b in bits.iter_mut().take(scheme.bits_per_symbol()) {
            *b = rng.random();
        }
        Self { scheme, bits }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits[..self.scheme.bits_per_symbol()]
    }

    /// Number of differing positions. Bits past the shorter arity count as
    /// errors.
    pub fn hamming(&self, other: &SymbolBits) -> usize {
        let (a, b) = (self.as_slice(), other.as_slice());
        let common = a.iter().zip(b).filter(|(x, y)| x != y).count();
        common + a.len().abs_diff(b.len())
    }
}

/// Mean and variance of the Gaussian a symbol is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolState {
    pub mean: f64,
    pub variance: f64,
}

/// Deterministic Gaussian/bit source. `(seed, stream_id)` fixes the
/// sequence; distinct stream ids give independent ChaCha streams.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    /// Fresh source on the same seed with another stream.
    pub fn fork(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl RngCore for NoiseSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// One symbol duration worth of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    samples: Vec<f64>,
    /// Mean the samples were drawn around, volts.
    pub true_mean: f64,
    /// Total variance including any channel noise added so far, volts².
    pub true_var: f64,
}

impl SampleBlock {
    pub fn new(samples: Vec<f64>, true_mean: f64, true_var: f64) -> Result<Self, ModemError> {
        if samples.len() < 2 {
            return Err(ModemError::BlockTooShort(samples.len()));
        }
        Ok(Self {
            samples,
            true_mean,
            true_var,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Maps bits to the Gaussian the modulator emits.
///
/// CGQNM adds both subchannels; GQNM and KLJN use subchannel 0 only, KLJN
/// with zero mean.
pub fn select_state(
    bits: &SymbolBits,
    sub0: &SubchannelParams,
    sub1: &SubchannelParams,
) -> SymbolState {
    let b = bits.as_slice();
    match bits.scheme() {
        Scheme::Kljn => SymbolState {
            mean: 0.0,
            variance: sub0.variance(b[0]),
        },
        Scheme::Gqnm => SymbolState {
            mean: sub0.mean(b[0]),
            variance: sub0.variance(b[1]),
        },
        Scheme::Cgqnm => SymbolState {
            mean: sub0.mean(b[0]) + sub1.mean(b[2]),
            variance: sub0.variance(b[1]) + sub1.variance(b[3]),
        },
    }
}

/// Draws `n` i.i.d. samples from `Normal(state.mean, state.variance)`.
pub fn modulate(
    state: SymbolState,
    n: usize,
    rng: &mut NoiseSource,
) -> Result<SampleBlock, ModemError> {
    if n < 2 {
        return Err(ModemError::BlockTooShort(n));
    }
    let sd = state.variance.max(0.0).sqrt();
    let samples = (0..n)
        .map(|_| state.mean + sd * rng.standard_normal())
        .collect();
    Ok(SampleBlock {
        samples,
        true_mean: state.mean,
        true_var: state.variance,
    })
}

/// Adds independent `Normal(0, sigma_w²)` noise to every sample.
pub fn awgn(mut block: SampleBlock, sigma_w: f64, rng: &mut NoiseSource) -> SampleBlock {
    if sigma_w > 0.0 {
        for x in block.samples.iter_mut() {
            *x += sigma_w * rng.standard_normal();
        }
        block.true_var += sigma_w * sigma_w;
    }
    block
}
