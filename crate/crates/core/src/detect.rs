//! Block statistics and midpoint-threshold detectors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modem::{SampleBlock, Scheme, SymbolBits};
use crate::params::{ChannelConfig, DerivedConstants, ParamError, SchemeConfig, SubchannelParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("threshold bank is for {bank}, asked to detect {scheme}")]
    SchemeMismatch { bank: Scheme, scheme: Scheme },
    #[error("{0} bank has no 4-level {1} thresholds")]
    Arity(Scheme, &'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockEstimates {
    pub mean_hat: f64,
    pub var_hat: f64,
}

/// Divisor of the sample variance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum VarianceNormalization {
    /// `1/N`, biased by `(N-1)/N`.
    #[default]
    Population,
    /// `1/(N-1)`.
    Bessel,
}

pub fn estimate(block: &SampleBlock) -> BlockEstimates {
    estimate_samples(block.samples(), VarianceNormalization::Population)
}

pub fn estimate_samples(xs: &[f64], norm: VarianceNormalization) -> BlockEstimates {
    let n = xs.len() as f64;
    let mean_hat = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean_hat) * (x - mean_hat)).sum();
    let var_hat = match norm {
        VarianceNormalization::Population => ss / n,
        VarianceNormalization::Bessel => ss / (n - 1.0),
    };
    BlockEstimates { mean_hat, var_hat }
}

/// Whether variance thresholds account for the channel noise floor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// Midpoints of the transmitted variances.
    Midpoint,
    /// Midpoints shifted up by `sigma_w²`.
    #[default]
    NoiseAdjusted,
}

/// Ascending thresholds splitting a line into regions, each region tagged
/// with the packed bits it decodes to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelBank {
    thresholds: Vec<f64>,
    codes: Vec<u8>,
}

impl LevelBank {
    fn new(thresholds: Vec<f64>, codes: Vec<u8>) -> Self {
        debug_assert_eq!(thresholds.len() + 1, codes.len());
        debug_assert!(thresholds.windows(2).all(|w| w[0] < w[1]));
        Self { thresholds, codes }
    }

    fn binary(low: f64, high: f64) -> Self {
        Self::new(vec![(low + high) / 2.0], vec![0, 1])
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Index of the region `x` falls in; ties go to the upper region.
    pub fn region(&self, x: f64, shift: f64) -> usize {
        self.thresholds
            .iter()
            .take_while(|&&t| x >= t + shift)
            .count()
    }

    fn code(&self, x: f64, shift: f64) -> u8 {
        self.codes[self.region(x, shift)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdBank {
    pub scheme: Scheme,
    /// Absent for KLJN.
    pub mean: Option<LevelBank>,
    pub var: LevelBank,
    pub mode: ThresholdMode,
    /// Added to every variance threshold before comparison.
    pub var_shift: f64,
}

impl ThresholdBank {
    fn shift(mode: ThresholdMode, channel: &ChannelConfig) -> f64 {
        match mode {
            ThresholdMode::Midpoint => 0.0,
            ThresholdMode::NoiseAdjusted => channel.noise_variance(),
        }
    }

    pub fn cgqnm(
        constants: &DerivedConstants,
        mode: ThresholdMode,
        channel: &ChannelConfig,
    ) -> Self {
        Self {
            scheme: Scheme::Cgqnm,
            mean: Some(LevelBank::new(
                constants.mean_thresholds.to_vec(),
                constants.mean_codes.to_vec(),
            )),
            var: LevelBank::new(
                constants.var_thresholds.to_vec(),
                constants.var_codes.to_vec(),
            ),
            mode,
            var_shift: Self::shift(mode, channel),
        }
    }

    pub fn gqnm(sub0: &SubchannelParams, mode: ThresholdMode, channel: &ChannelConfig) -> Self {
        Self {
            scheme: Scheme::Gqnm,
            mean: Some(LevelBank::binary(sub0.m_low, sub0.m_high)),
            var: LevelBank::binary(sub0.var_low, sub0.var_high),
            mode,
            var_shift: Self::shift(mode, channel),
        }
    }

    pub fn kljn(sub0: &SubchannelParams, mode: ThresholdMode, channel: &ChannelConfig) -> Self {
        Self {
            scheme: Scheme::Kljn,
            mean: None,
            var: LevelBank::binary(sub0.var_low, sub0.var_high),
            mode,
            var_shift: Self::shift(mode, channel),
        }
    }

    pub fn for_scheme(
        scheme: Scheme,
        config: &SchemeConfig,
        channel: &ChannelConfig,
        mode: ThresholdMode,
    ) -> Result<Self, ParamError> {
        channel.validate()?;
        let (sub0, _) = config.subchannels()?;
        Ok(match scheme {
            Scheme::Kljn => Self::kljn(&sub0, mode, channel),
            Scheme::Gqnm => Self::gqnm(&sub0, mode, channel),
            Scheme::Cgqnm => Self::cgqnm(&config.constants()?, mode, channel),
        })
    }

    fn four_level(&self, bank: Option<&LevelBank>, what: &'static str) -> Result<(), DetectError> {
        match bank {
            Some(b) if b.thresholds.len() == 3 => Ok(()),
            _ => Err(DetectError::Arity(self.scheme, what)),
        }
    }
}

fn unpack(code: u8) -> (bool, bool) {
    (code & 1 == 1, code & 2 == 2)
}

/// Composite mean sub-bits `(b0_0, b0_1)` from the block mean.
pub fn detect_mean_bits(mean_hat: f64, bank: &ThresholdBank) -> Result<(bool, bool), DetectError> {
    bank.four_level(bank.mean.as_ref(), "mean")?;
    let mean = bank.mean.as_ref().expect("checked above");
    Ok(unpack(mean.code(mean_hat, 0.0)))
}

/// Composite variance sub-bits `(b1_0, b1_1)` from the block variance.
pub fn detect_var_bits(var_hat: f64, bank: &ThresholdBank) -> Result<(bool, bool), DetectError> {
    bank.four_level(Some(&bank.var), "variance")?;
    Ok(unpack(bank.var.code(var_hat, bank.var_shift)))
}

pub fn detect_symbol(
    block: &SampleBlock,
    scheme: Scheme,
    bank: &ThresholdBank,
) -> Result<SymbolBits, DetectError> {
    detect_estimates(&estimate(block), scheme, bank)
}

/// Same as [`detect_symbol`] on precomputed estimates.
pub fn detect_estimates(
    est: &BlockEstimates,
    scheme: Scheme,
    bank: &ThresholdBank,
) -> Result<SymbolBits, DetectError> {
    if bank.scheme != scheme {
        return Err(DetectError::SchemeMismatch {
            bank: bank.scheme,
            scheme,
        });
    }
    let var_code = bank.var.code(est.var_hat, bank.var_shift);
    let bits = match scheme {
        Scheme::Kljn => vec![var_code == 1],
        Scheme::Gqnm => {
            let mean = bank
                .mean
                .as_ref()
                .ok_or(DetectError::Arity(scheme, "mean"))?;
            vec![mean.code(est.mean_hat, 0.0) == 1, var_code == 1]
        }
        Scheme::Cgqnm => {
            let (b00, b01) = detect_mean_bits(est.mean_hat, bank)?;
            let (b10, b11) = detect_var_bits(est.var_hat, bank)?;
            vec![b00, b10, b01, b11]
        }
    };
    Ok(SymbolBits::new(scheme, &bits).expect("arity fixed by scheme"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{modulate, select_state, NoiseSource, SymbolState};
    use crate::params::ScalingParams;

    fn canonical() -> SchemeConfig {
        SchemeConfig::Derived(ScalingParams {
            m_l0: 1e-3,
            alpha: 20.0,
            beta: 5.0,
            var_00: 1e-10,
            eta: 5.0,
            gamma: 20.0,
        })
    }

    fn bank(scheme: Scheme, mode: ThresholdMode, sigma_w: f64) -> ThresholdBank {
        ThresholdBank::for_scheme(
            scheme,
            &canonical(),
            &ChannelConfig::new(sigma_w).unwrap(),
            mode,
        )
        .unwrap()
    }

    fn block(xs: &[f64]) -> SampleBlock {
        SampleBlock::new(xs.to_vec(), 0.0, 0.0).unwrap()
    }

    #[test]
    fn estimates_by_hand() {
        let e = estimate(&block(&[1.0, 2.0, 3.0]));
        assert_eq!(e.mean_hat, 2.0);
        assert!((e.var_hat - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            estimate(&block(&[0.0, 2.0])),
            BlockEstimates {
                mean_hat: 1.0,
                var_hat: 1.0
            }
        );
        assert_eq!(
            estimate(&block(&[7.0; 9])),
            BlockEstimates {
                mean_hat: 7.0,
                var_hat: 0.0
            }
        );
        let b = estimate_samples(&[1.0, 2.0, 3.0], VarianceNormalization::Bessel);
        assert_eq!(b.var_hat, 1.0);
    }

    #[test]
    fn mean_regions() {
        let b = bank(Scheme::Cgqnm, ThresholdMode::Midpoint, 0.0);
        assert_eq!(detect_mean_bits(5e-2, &b).unwrap(), (true, false));
        assert_eq!(detect_mean_bits(0.2, &b).unwrap(), (true, true));
        assert_eq!(detect_mean_bits(-10.0, &b).unwrap(), (false, false));
        assert_eq!(detect_mean_bits(8e-2, &b).unwrap(), (false, true));
    }

    #[test]
    fn mean_region_changes_exactly_at_thresholds() {
        let b = bank(Scheme::Cgqnm, ThresholdMode::Midpoint, 0.0);
        let ths = b.mean.as_ref().unwrap().thresholds().to_vec();
        let mut changes = vec![];
        let mut prev = detect_mean_bits(-1.0, &b).unwrap();
        let steps = 20_000;
        for i in 0..=steps {
            let x = -0.05 + 0.25 * i as f64 / steps as f64;
            let cur = detect_mean_bits(x, &b).unwrap();
            if cur != prev {
                changes.push(x);
                prev = cur;
            }
        }
        assert_eq!(changes.len(), 3);
        for (c, t) in changes.iter().zip(&ths) {
            assert!(*c >= *t && c - t <= 0.25 / steps as f64 + 1e-15);
        }
        // ties resolve upward
        for (r, t) in ths.iter().enumerate() {
            assert_eq!(b.mean.as_ref().unwrap().region(*t, 0.0), r + 1);
        }
    }

    #[test]
    fn variance_regions() {
        let b = bank(Scheme::Cgqnm, ThresholdMode::Midpoint, 2e-5);
        assert_eq!(detect_var_bits(5e-9, &b).unwrap(), (true, false));
        assert_eq!(detect_var_bits(0.0, &b).unwrap(), (false, false));
        assert_eq!(detect_var_bits(2e-8, &b).unwrap(), (true, true));
        assert_eq!(detect_var_bits(8e-9, &b).unwrap(), (false, true));
    }

    #[test]
    fn noise_adjusted_shifts_variance_thresholds() {
        // 2.6e-9 lies between Th_v1 = 2.3e-9 and Th_v1 + sigma_w² = 2.7e-9.
        let literal = bank(Scheme::Cgqnm, ThresholdMode::Midpoint, 2e-5);
        let adjusted = bank(Scheme::Cgqnm, ThresholdMode::NoiseAdjusted, 2e-5);
        assert_eq!(detect_var_bits(2.6e-9, &literal).unwrap(), (true, false));
        assert_eq!(detect_var_bits(2.6e-9, &adjusted).unwrap(), (false, false));
        assert_eq!(adjusted.var_shift, 2e-5 * 2e-5);
    }

    #[test]
    fn true_states_decode_exactly() {
        let cfg = canonical();
        let (s0, s1) = cfg.subchannels().unwrap();
        let b = bank(Scheme::Cgqnm, ThresholdMode::Midpoint, 0.0);
        for idx in 0..16 {
            let bits = SymbolBits::from_index(Scheme::Cgqnm, idx);
            let st = select_state(&bits, &s0, &s1);
            let est = BlockEstimates {
                mean_hat: st.mean,
                var_hat: st.variance,
            };
            assert_eq!(detect_estimates(&est, Scheme::Cgqnm, &b).unwrap(), bits);
        }
    }

    #[test]
    fn noiseless_cgqnm_block_decodes() {
        let (s0, s1) = canonical().subchannels().unwrap();
        let c = canonical().constants().unwrap();
        // true state (m3, var2)
        let state = SymbolState {
            mean: c.means[2],
            variance: c.variances[1],
        };
        let blk = modulate(state, 10_000, &mut NoiseSource::new(5, 0)).unwrap();
        let b = bank(Scheme::Cgqnm, ThresholdMode::NoiseAdjusted, 0.0);
        let got = detect_symbol(&blk, Scheme::Cgqnm, &b).unwrap();
        assert_eq!(got.as_slice(), &[false, true, true, false]);
        let direct = select_state(&got, &s0, &s1);
        assert_eq!(direct, state);
    }

    #[test]
    fn baseline_detectors() {
        let (s0, _) = canonical().subchannels().unwrap();
        let k = bank(Scheme::Kljn, ThresholdMode::NoiseAdjusted, 0.0);
        let got = detect_symbol(&block(&[0.3; 8]), Scheme::Kljn, &k).unwrap();
        assert_eq!(got.as_slice(), &[false]);
        let g = bank(Scheme::Gqnm, ThresholdMode::NoiseAdjusted, 0.0);
        let got = detect_symbol(&block(&[s0.m_high; 8]), Scheme::Gqnm, &g).unwrap();
        assert_eq!(got.as_slice(), &[true, false]);
    }

    #[test]
    fn mismatched_banks_are_errors() {
        let k = bank(Scheme::Kljn, ThresholdMode::NoiseAdjusted, 0.0);
        assert!(matches!(
            detect_symbol(&block(&[0.0, 1.0]), Scheme::Cgqnm, &k),
            Err(DetectError::SchemeMismatch { .. })
        ));
        assert!(detect_mean_bits(0.0, &k).is_err());
        let g = bank(Scheme::Gqnm, ThresholdMode::NoiseAdjusted, 0.0);
        assert!(detect_var_bits(0.0, &g).is_err());
    }

    #[test]
    fn long_block_round_trip_over_all_patterns() {
        // The closest variance pair (1.01e-8, 1.05e-8) needs ~1e5 samples
        // before the estimator spread is well inside the half gap.
        let cfg = canonical();
        let (s0, s1) = cfg.subchannels().unwrap();
        let b = bank(Scheme::Cgqnm, ThresholdMode::NoiseAdjusted, 0.0);
        let mut rng = NoiseSource::new(11, 0);
        let mut symbol_errors = 0;
        let reps = 24;
        for idx in 0..16 {
            let bits = SymbolBits::from_index(Scheme::Cgqnm, idx);
            for _ in 0..reps {
                let blk = modulate(select_state(&bits, &s0, &s1), 100_000, &mut rng).unwrap();
                if detect_symbol(&blk, Scheme::Cgqnm, &b).unwrap() != bits {
                    symbol_errors += 1;
                }
            }
        }
        assert_eq!(symbol_errors, 0);
    }

    #[test]
    fn estimator_moments() {
        let (n, reps) = (100, 10_000);
        let c = canonical().constants().unwrap();
        let state = SymbolState {
            mean: c.means[0],
            variance: c.variances[0],
        };
        let mut rng = NoiseSource::new(21, 3);
        let (mut sum_m, mut sum_v) = (0.0, 0.0);
        for _ in 0..reps {
            let e = estimate(&modulate(state, n, &mut rng).unwrap());
            sum_m += e.mean_hat;
            sum_v += e.var_hat;
        }
        let (mm, mv) = (sum_m / reps as f64, sum_v / reps as f64);
        let tol = 5.0 * (state.variance / (n * reps) as f64).sqrt();
        assert!((mm - state.mean).abs() < tol);
        let biased = (n as f64 - 1.0) / n as f64 * state.variance;
        assert!((mv / biased - 1.0).abs() < 0.01);
    }
}
