//! Scheme parameters and the constants derived from them.
//!
//! A composite modulator is the sum of two quadratic noise modulators
//! (subchannel 0 and subchannel 1). Each subchannel switches between two
//! bias voltages and two noise variances. The composite output therefore
//! sits on one of four mean levels and one of four variance levels, and the
//! receiver separates them with midpoint thresholds.
//!
//! Level codes pack the two bits that select a level: bit 0 belongs to
//! subchannel 0 and bit 1 to subchannel 1. For mean levels the bits are the
//! mean sub-bits `(b0_0, b0_1)`, for variance levels the variance sub-bits
//! `(b1_0, b1_1)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("degenerate levels: {0}")]
    Degenerate(String),
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), ParamError> {
    if cond {
        Ok(())
    } else {
        Err(ParamError::Invalid(msg()))
    }
}

/// Bias voltages and noise variances of one quadratic modulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubchannelParams {
    /// Low bias voltage (mean sub-bit 0), volts.
    #[serde(rename = "m_L")]
    pub m_low: f64,
    /// High bias voltage (mean sub-bit 1), volts.
    #[serde(rename = "m_H")]
    pub m_high: f64,
    /// Low noise variance (variance sub-bit 0), volts².
    #[serde(rename = "var_0")]
    pub var_low: f64,
    /// High noise variance (variance sub-bit 1), volts².
    #[serde(rename = "var_1")]
    pub var_high: f64,
}

impl SubchannelParams {
    pub fn new(m_low: f64, m_high: f64, var_low: f64, var_high: f64) -> Result<Self, ParamError> {
        let p = Self {
            m_low,
            m_high,
            var_low,
            var_high,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        require(
            [self.m_low, self.m_high, self.var_low, self.var_high]
                .iter()
                .all(|v| v.is_finite()),
            || "subchannel values must be finite".into(),
        )?;
        require(self.m_low < self.m_high, || {
            format!("m_L < m_H violated ({} >= {})", self.m_low, self.m_high)
        })?;
        require(self.var_low > 0.0, || {
            format!("var_0 > 0 violated ({})", self.var_low)
        })?;
        require(self.var_low < self.var_high, || {
            format!(
                "var_0 < var_1 violated ({} >= {})",
                self.var_low, self.var_high
            )
        })
    }

    pub fn mean(&self, bit: bool) -> f64 {
        if bit {
            self.m_high
        } else {
            self.m_low
        }
    }

    pub fn variance(&self, bit: bool) -> f64 {
        if bit {
            self.var_high
        } else {
            self.var_low
        }
    }
}

/// The six free parameters of the canonical scaling rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    #[serde(rename = "m_L0")]
    pub m_l0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub var_00: f64,
    pub eta: f64,
    pub gamma: f64,
}

impl ScalingParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let Self {
            m_l0,
            alpha,
            beta,
            var_00,
            eta,
            gamma,
        } = *self;
        require(
            [m_l0, alpha, beta, var_00, eta, gamma]
                .iter()
                .all(|v| v.is_finite()),
            || "scaling parameters must be finite".into(),
        )?;
        require(alpha > 1.0, || format!("alpha > 1 violated ({alpha})"))?;
        require(beta > 1.0, || format!("beta > 1 violated ({beta})"))?;
        require(alpha > beta, || {
            format!("alpha > beta violated ({alpha} <= {beta})")
        })?;
        require(eta > 1.0, || format!("eta > 1 violated ({eta})"))?;
        require(gamma > 1.0, || format!("gamma > 1 violated ({gamma})"))?;
        require(gamma > eta, || {
            format!("gamma > eta violated ({gamma} <= {eta})")
        })?;
        require(m_l0 > 0.0, || format!("m_L0 > 0 violated ({m_l0})"))?;
        require(var_00 > 0.0, || format!("var_00 > 0 violated ({var_00})"))
    }
}

/// How the two subchannels are specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SchemeConfig {
    /// Subchannels follow from the scaling rules.
    Derived(ScalingParams),
    /// Subchannels are given verbatim.
    Explicit {
        sub0: SubchannelParams,
        sub1: SubchannelParams,
    },
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<(), ParamError> {
        match self {
            SchemeConfig::Derived(p) => p.validate(),
            SchemeConfig::Explicit { sub0, sub1 } => {
                sub0.validate()
                    .map_err(|e| ParamError::Invalid(format!("sub0: {e}")))?;
                sub1.validate()
                    .map_err(|e| ParamError::Invalid(format!("sub1: {e}")))
            }
        }
    }

    pub fn subchannels(&self) -> Result<(SubchannelParams, SubchannelParams), ParamError> {
        derive_subchannels(self)
    }

    pub fn constants(&self) -> Result<DerivedConstants, ParamError> {
        let (sub0, sub1) = self.subchannels()?;
        derive_constants(&sub0, &sub1)
    }
}

/// Expands a configuration into its two subchannels.
///
/// In derived mode `m_H = alpha * m_L` on both subchannels, `m_L1 = beta * m_L0`,
/// `var_1 = eta * var_0` on both subchannels and `var_01 = gamma * var_00`.
pub fn derive_subchannels(
    config: &SchemeConfig,
) -> Result<(SubchannelParams, SubchannelParams), ParamError> {
    config.validate()?;
    match *config {
        SchemeConfig::Derived(p) => {
            let m_l1 = p.beta * p.m_l0;
            let var_01 = p.gamma * p.var_00;
            let sub0 = SubchannelParams {
                m_low: p.m_l0,
                m_high: p.alpha * p.m_l0,
                var_low: p.var_00,
                var_high: p.eta * p.var_00,
            };
            let sub1 = SubchannelParams {
                m_low: m_l1,
                m_high: p.alpha * m_l1,
                var_low: var_01,
                var_high: p.eta * var_01,
            };
            Ok((sub0, sub1))
        }
        SchemeConfig::Explicit { sub0, sub1 } => Ok((sub0, sub1)),
    }
}

/// The four composite levels in each dimension and the midpoint thresholds
/// between them. Levels are ascending; `*_codes[j]` is the packed bit pair
/// that produces level `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub means: [f64; 4],
    pub mean_codes: [u8; 4],
    pub variances: [f64; 4],
    pub var_codes: [u8; 4],
    pub mean_thresholds: [f64; 3],
    pub var_thresholds: [f64; 3],
}

fn sorted_levels(raw: [(f64, u8); 4], what: &str) -> Result<([f64; 4], [u8; 4]), ParamError> {
    let mut levels = raw;
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in levels.windows(2) {
        if w[0].0.partial_cmp(&w[1].0) != Some(std::cmp::Ordering::Less) {
            return Err(ParamError::Degenerate(format!(
                "{what} levels coincide ({} == {})",
                w[0].0, w[1].0
            )));
        }
    }
    Ok((levels.map(|l| l.0), levels.map(|l| l.1)))
}

pub(crate) fn midpoints(levels: &[f64; 4]) -> [f64; 3] {
    [
        (levels[0] + levels[1]) / 2.0,
        (levels[1] + levels[2]) / 2.0,
        (levels[2] + levels[3]) / 2.0,
    ]
}

/// Builds the composite level table from two subchannels.
///
/// Mean levels are the four sums `m_{b0_0} + m_{b0_1}`, variance levels the
/// four sums `var_{b1_0} + var_{b1_1}`. Both are sorted ascending with their
/// bit codes attached, so arbitrary explicit values still give a usable
/// detector. Coinciding levels are an error.
pub fn derive_constants(
    sub0: &SubchannelParams,
    sub1: &SubchannelParams,
) -> Result<DerivedConstants, ParamError> {
    sub0.validate()?;
    sub1.validate()?;
    let mut mean_raw = [(0.0, 0u8); 4];
    let mut var_raw = [(0.0, 0u8); 4];
    for code in 0u8..4 {
        let (bit0, bit1) = (code & 1 == 1, code & 2 == 2);
        mean_raw[code as usize] = (sub0.mean(bit0) + sub1.mean(bit1), code);
        var_raw[code as usize] = (sub0.variance(bit0) + sub1.variance(bit1), code);
    }
    let (means, mean_codes) = sorted_levels(mean_raw, "mean")?;
    let (variances, var_codes) = sorted_levels(var_raw, "variance")?;
    Ok(DerivedConstants {
        means,
        mean_codes,
        variances,
        var_codes,
        mean_thresholds: midpoints(&means),
        var_thresholds: midpoints(&variances),
    })
}

/// Additive white Gaussian channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Channel-noise standard deviation, volts.
    pub sigma_w: f64,
}

impl ChannelConfig {
    pub fn new(sigma_w: f64) -> Result<Self, ParamError> {
        let c = Self { sigma_w };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        require(self.sigma_w.is_finite() && self.sigma_w >= 0.0, || {
            format!("sigma_w >= 0 violated ({})", self.sigma_w)
        })
    }

    pub fn noise_variance(&self) -> f64 {
        self.sigma_w * self.sigma_w
    }
}
