//! Simulation of noise-modulation links.
//!
//! Three modulators share one pipeline: KLJN (variance only), GQNM (one
//! mean bit and one variance bit) and the composite CGQNM, the sum of two
//! GQNM outputs carrying four bits on four mean levels and four variance
//! levels. The receiver estimates the block mean and variance and slices
//! them with midpoint thresholds.
//!
//! * [`params`]: configuration, derived levels and thresholds
//! * [`modem`]: symbol generation and the AWGN channel
//! * [`detect`]: block estimators and threshold detectors
//! * [`analysis`]: distinguishability margins
//! * [`harness`]: Monte Carlo BEP points, sweeps and CSV/JSON output

pub mod analysis;
pub mod config;
pub mod detect;
pub mod harness;
pub mod modem;
pub mod params;

pub use config::{ConfigError, SimConfig};
pub use modem::Scheme;
pub use params::{ChannelConfig, DerivedConstants, SchemeConfig, SubchannelParams};
