//! JSON configuration files.
//!
//! ```json
//! { "m_L0": 1e-3, "alpha": 20, "beta": 5, "var_00": 1e-10, "eta": 5, "gamma": 20,
//!   "sigma_w": 2e-5, "samples_per_symbol": 100 }
//! ```
//!
//! Replacing the six scaling keys with an `explicit` object selects explicit
//! mode: `"explicit": { "sub0": { "m_L": .., "m_H": .., "var_0": .., "var_1": .. }, "sub1": { .. } }`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{ChannelConfig, ParamError, ScalingParams, SchemeConfig, SubchannelParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Everything a config file describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub scheme: SchemeConfig,
    pub channel: ChannelConfig,
    pub samples_per_symbol: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "m_L0")]
    m_l0: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    var_00: Option<f64>,
    eta: Option<f64>,
    gamma: Option<f64>,
    sigma_w: f64,
    samples_per_symbol: usize,
    explicit: Option<RawExplicit>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExplicit {
    sub0: SubchannelParams,
    sub1: SubchannelParams,
}

impl SimConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let scaling = [
            ("m_L0", raw.m_l0),
            ("alpha", raw.alpha),
            ("beta", raw.beta),
            ("var_00", raw.var_00),
            ("eta", raw.eta),
            ("gamma", raw.gamma),
        ];
        let scheme = match raw.explicit {
            Some(RawExplicit { sub0, sub1 }) => {
                if let Some((key, _)) = scaling.iter().find(|(_, v)| v.is_some()) {
                    return Err(ConfigError::Parse(format!(
                        "`{key}` cannot be combined with `explicit`"
                    )));
                }
                SchemeConfig::Explicit { sub0, sub1 }
            }
            None => {
                let missing: Vec<_> = scaling
                    .iter()
                    .filter(|(_, v)| v.is_none())
                    .map(|(k, _)| *k)
                    .collect();
                if !missing.is_empty() {
                    return Err(ConfigError::Parse(format!(
                        "missing keys: {}",
                        missing.join(", ")
                    )));
                }
                let v = scaling.map(|(_, v)| v.unwrap_or_default());
                SchemeConfig::Derived(ScalingParams {
                    m_l0: v[0],
                    alpha: v[1],
                    beta: v[2],
                    var_00: v[3],
                    eta: v[4],
                    gamma: v[5],
                })
            }
        };
        scheme.validate()?;
        let channel = ChannelConfig::new(raw.sigma_w)?;
        if raw.samples_per_symbol < 2 {
            return Err(ParamError::Invalid(format!(
                "samples_per_symbol >= 2 violated ({})",
                raw.samples_per_symbol
            ))
            .into());
        }
        Ok(Self {
            scheme,
            channel,
            samples_per_symbol: raw.samples_per_symbol,
        })
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, ConfigError> {
        let text = std::str::from_utf8(bytes).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_json_str(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"{"m_L0": 1e-3, "alpha": 20, "beta": 5, "var_00": 1e-10,
        "eta": 5, "gamma": 20, "sigma_w": 2e-5, "samples_per_symbol": 100}"#;

    #[test]
    fn parses_derived() {
        let cfg = SimConfig::from_json_str(CANONICAL).unwrap();
        assert!(matches!(cfg.scheme, SchemeConfig::Derived(p) if p.alpha == 20.0));
        assert_eq!(cfg.channel.sigma_w, 2e-5);
        assert_eq!(cfg.samples_per_symbol, 100);
    }

    #[test]
    fn parses_explicit() {
        let text = r#"{"sigma_w": 0, "samples_per_symbol": 10, "explicit": {
            "sub0": {"m_L": 0, "m_H": 1, "var_0": 1, "var_1": 2},
            "sub1": {"m_L": 0, "m_H": 2, "var_0": 3, "var_1": 7}}}"#;
        let cfg = SimConfig::from_json_str(text).unwrap();
        let SchemeConfig::Explicit { sub1, .. } = cfg.scheme else {
            panic!("expected explicit mode")
        };
        assert_eq!(sub1.var_high, 7.0);
    }

    #[test]
    fn rejects_mixed_modes_and_missing_keys() {
        let mixed = r#"{"alpha": 2, "sigma_w": 0, "samples_per_symbol": 10, "explicit": {
            "sub0": {"m_L": 0, "m_H": 1, "var_0": 1, "var_1": 2},
            "sub1": {"m_L": 0, "m_H": 2, "var_0": 3, "var_1": 7}}}"#;
        assert!(matches!(
            SimConfig::from_json_str(mixed),
            Err(ConfigError::Parse(_))
        ));
        let missing = r#"{"m_L0": 1, "sigma_w": 0, "samples_per_symbol": 10}"#;
        let err = SimConfig::from_json_str(missing).unwrap_err().to_string();
        assert!(err.contains("alpha") && err.contains("gamma"), "{err}");
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let unknown = CANONICAL.replace("\"eta\"", "\"etta\"");
        assert!(matches!(
            SimConfig::from_json_str(&unknown),
            Err(ConfigError::Parse(_))
        ));
        let bad = CANONICAL.replace("\"alpha\": 20", "\"alpha\": 0.5");
        assert!(matches!(
            SimConfig::from_json_str(&bad),
            Err(ConfigError::Param(_))
        ));
        let short = CANONICAL.replace("100", "1");
        assert!(matches!(
            SimConfig::from_json_str(&short),
            Err(ConfigError::Param(_))
        ));
        let neg = CANONICAL.replace("2e-5", "-2e-5");
        assert!(matches!(
            SimConfig::from_json_str(&neg),
            Err(ConfigError::Param(_))
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = SimConfig::load("/nonexistent/cfg.json").unwrap_err();
        assert!(matches!(err, ConfigError::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/cfg.json"));
    }
}
