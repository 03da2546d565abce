//! Distinguishability of the composite mixture components.
//!
//! Two checks decide whether midpoint thresholds can separate the levels:
//! the mean levels must be far apart compared with the widest composite
//! noise, and the variance levels must be far apart compared with the
//! spread of the sample-variance estimator at block length `N`.
//!
//! The estimator spread comes from `var_hat = (sigma²/N) * e` with
//! `e ~ chi²(N-1)`, so `Var(var_hat) = 2 sigma⁴ (N-1) / N²`. The verbatim
//! fourth-moment expression is also available for comparison; it is not
//! dimensionally consistent and is always flagged.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{DerivedConstants, ParamError, SchemeConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("chi-square degrees of freedom must be positive, got {0}")]
    Domain(f64),
    #[error("block length must be at least 2, got {0}")]
    BlockTooShort(usize),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// `E[X^m]` for `X ~ chi²(k)`, i.e. `2^m Γ(k/2 + m) / Γ(k/2)`, evaluated as
/// the rising product `2^m ∏_{j<m} (k/2 + j)`.
pub fn chi_square_moment(k: f64, m: u32) -> Result<f64, AnalysisError> {
    if !k.is_finite() || k <= 0.0 {
        return Err(AnalysisError::Domain(k));
    }
    let half = k / 2.0;
    Ok((0..m).map(|j| 2.0 * (half + j as f64)).product())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceFormula {
    /// `16 N⁻⁴ σ² Γ((N+7)/2)/Γ((N-1)/2) − σ⁴`, taken verbatim.
    Verbatim,
    /// `2 σ⁴ (N-1) / N²`.
    #[default]
    CorrectedChiSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpreadWarning {
    /// The verbatim expression went negative; no real spread exists.
    Negative,
    /// The verbatim expression mixes σ² and σ⁴ terms.
    DimensionallyInconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadEstimate {
    /// `Var(var_hat)`, volts⁴ in corrected mode.
    pub variance: f64,
    pub warning: Option<SpreadWarning>,
}

impl SpreadEstimate {
    /// Standard deviation; NaN when the variance is negative.
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Variance of the `1/N` sample variance of `N` draws with variance `sigma2`.
pub fn sample_variance_spread(
    sigma2: f64,
    n: usize,
    formula: VarianceFormula,
) -> Result<SpreadEstimate, AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::BlockTooShort(n));
    }
    let nf = n as f64;
    Ok(match formula {
        VarianceFormula::CorrectedChiSquare => SpreadEstimate {
            variance: 2.0 * sigma2 * sigma2 * (nf - 1.0) / (nf * nf),
            warning: None,
        },
        VarianceFormula::Verbatim => {
            let fourth = chi_square_moment(nf - 1.0, 4)?;
            let variance = fourth * sigma2 / nf.powi(4) - sigma2 * sigma2;
            let warning = if variance < 0.0 {
                SpreadWarning::Negative
            } else {
                SpreadWarning::DimensionallyInconsistent
            };
            SpreadEstimate {
                variance,
                warning: Some(warning),
            }
        }
    })
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        lhs / rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCondition {
    /// Smallest gap between adjacent mean levels, volts.
    pub lhs: f64,
    /// `6 sqrt(var_4)`, volts.
    pub rhs: f64,
    pub ratio: f64,
    pub satisfied: bool,
    /// `m_H0` (equal to `alpha * m_L0` in derived mode), volts.
    pub literal_lhs: f64,
    pub literal_ratio: f64,
}

/// Mean-dimension condition: adjacent means separated by more than six
/// standard deviations of the widest component.
pub fn check_mean_condition(
    constants: &DerivedConstants,
    config: &SchemeConfig,
    margin_factor: f64,
) -> Result<MeanCondition, AnalysisError> {
    let (sub0, _) = config.subchannels()?;
    let lhs = constants
        .means
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let rhs = 6.0 * constants.variances[3].max(0.0).sqrt();
    let r = ratio(lhs, rhs);
    Ok(MeanCondition {
        lhs,
        rhs,
        ratio: r,
        satisfied: r >= margin_factor,
        literal_lhs: sub0.m_high,
        literal_ratio: ratio(sub0.m_high, rhs),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairMargin {
    /// `var_{f+1} - var_f`, volts².
    pub gap: f64,
    /// `3 σ_var,f + 3 σ_var,f+1`.
    pub spread: f64,
    pub ratio: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceCondition {
    pub pairs: [PairMargin; 3],
    pub satisfied: bool,
    pub warnings: Vec<SpreadWarning>,
}

/// Variance-dimension condition over all three adjacent pairs.
pub fn check_variance_condition(
    constants: &DerivedConstants,
    n: usize,
    formula: VarianceFormula,
    margin_factor: f64,
) -> Result<VarianceCondition, AnalysisError> {
    let mut spreads = [SpreadEstimate {
        variance: 0.0,
        warning: None,
    }; 4];
    for (s, &v) in spreads.iter_mut().zip(&constants.variances) {
        *s = sample_variance_spread(v, n, formula)?;
    }
    let mut warnings: Vec<SpreadWarning> = spreads.iter().filter_map(|s| s.warning).collect();
    warnings.dedup();
    let pairs: [PairMargin; 3] = std::array::from_fn(|f| {
        let gap = constants.variances[f + 1] - constants.variances[f];
        let spread = 3.0 * spreads[f].std_dev() + 3.0 * spreads[f + 1].std_dev();
        let r = if spread.is_nan() {
            f64::NAN
        } else {
            ratio(gap, spread)
        };
        PairMargin {
            gap,
            spread,
            ratio: r,
            satisfied: r >= margin_factor,
        }
    });
    Ok(VarianceCondition {
        satisfied: pairs.iter().all(|p| p.satisfied),
        pairs,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinguishabilityReport {
    pub samples_per_symbol: usize,
    pub formula_mode: VarianceFormula,
    pub margin_factor: f64,
    pub mean: MeanCondition,
    pub variance: VarianceCondition,
}

impl DistinguishabilityReport {
    pub fn evaluate(
        config: &SchemeConfig,
        n: usize,
        formula: VarianceFormula,
        margin_factor: f64,
    ) -> Result<Self, AnalysisError> {
        let constants = config.constants()?;
        Ok(Self {
            samples_per_symbol: n,
            formula_mode: formula,
            margin_factor,
            mean: check_mean_condition(&constants, config, margin_factor)?,
            variance: check_variance_condition(&constants, n, formula, margin_factor)?,
        })
    }

    pub fn satisfied(&self) -> bool {
        self.mean.satisfied && self.variance.satisfied
    }
}

impl fmt::Display for DistinguishabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yes = |b: bool| if b { "yes" } else { "no" };
        let formula = match self.formula_mode {
            VarianceFormula::Verbatim => "verbatim",
            VarianceFormula::CorrectedChiSquare => "corrected",
        };
        writeln!(
            f,
            "N = {}  variance formula = {}  margin = {}",
            self.samples_per_symbol, formula, self.margin_factor
        )?;
        let m = &self.mean;
        writeln!(f, "mean condition")?;
        writeln!(f, "  {:<22}{:>14.6e}", "min adjacent gap", m.lhs)?;
        writeln!(f, "  {:<22}{:>14.6e}", "m_H0 (alpha*m_L0)", m.literal_lhs)?;
        writeln!(f, "  {:<22}{:>14.6e}", "6*sqrt(var_4)", m.rhs)?;
        writeln!(f, "  {:<22}{:>14.4}", "ratio (gap)", m.ratio)?;
        writeln!(f, "  {:<22}{:>14.4}", "ratio (m_H0)", m.literal_ratio)?;
        writeln!(f, "  {:<22}{:>14}", "satisfied", yes(m.satisfied))?;
        writeln!(f, "variance condition")?;
        writeln!(
            f,
            "  {:<6}{:>14}{:>14}{:>12}{:>11}",
            "pair", "gap", "spread", "ratio", "satisfied"
        )?;
        for (i, p) in self.variance.pairs.iter().enumerate() {
            writeln!(
                f,
                "  {:<6}{:>14.6e}{:>14.6e}{:>12.4}{:>11}",
                format!("{}-{}", i + 1, i + 2),
                p.gap,
                p.spread,
                p.ratio,
                yes(p.satisfied)
            )?;
        }
        writeln!(
            f,
            "  {:<20}{:>9}",
            "all pairs satisfied",
            yes(self.variance.satisfied)
        )?;
        for w in &self.variance.warnings {
            let msg = match w {
                SpreadWarning::Negative => "spread expression is negative for some level",
                SpreadWarning::DimensionallyInconsistent => {
                    "spread expression is not dimensionally consistent"
                }
            };
            writeln!(f, "warning: {msg}")?;
        }
        Ok(())
    }
}
