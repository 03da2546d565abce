//! Scalar-or-range arguments: `x` or `start:stop:step` (stop inclusive).

use thiserror::Error;

/// Largest number of points a range may expand to.
pub const MAX_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RangeError {
    #[error("empty value")]
    Empty,
    #[error("`{0}` is not a finite number")]
    BadNumber(String),
    #[error("expected `x` or `start:stop:step`, got `{0}`")]
    BadShape(String),
    #[error("step must be positive, got {0}")]
    BadStep(f64),
    #[error("range is descending ({start} > {stop})")]
    Descending { start: f64, stop: f64 },
    #[error("range expands to more than {MAX_POINTS} points")]
    TooMany,
    #[error("`{0}` is not a non-negative integer")]
    NotInteger(f64),
}

fn number(s: &str) -> Result<f64, RangeError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RangeError::Empty);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| RangeError::BadNumber(s.to_string()))
}

/// Parses a single value or an inclusive range into ascending values.
pub fn parse_values(s: &str) -> Result<Vec<f64>, RangeError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [one] => Ok(vec![number(one)?]),
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if step.is_nan() || step <= 0.0 {
                return Err(RangeError::BadStep(step));
            }
            if start > stop {
                return Err(RangeError::Descending { start, stop });
            }
            let span = (stop - start) / step;
            if !span.is_finite() || span >= MAX_POINTS as f64 {
                return Err(RangeError::TooMany);
            }
            let steps = (span + 1e-9).floor() as usize;
            let tol = 1e-9 * step;
            let values: Vec<f64> = (0..=steps)
                .map(|i| {
                    let v = start + i as f64 * step;
                    if (v - stop).abs() <= tol {
                        stop
                    } else {
                        v
                    }
                })
                .collect();
            if values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(RangeError::BadStep(step));
            }
            Ok(values)
        }
        _ => Err(RangeError::BadShape(s.to_string())),
    }
}

/// Like [`parse_values`] but every value must be a whole count.
pub fn parse_counts(s: &str) -> Result<Vec<usize>, RangeError> {
    parse_values(s)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(RangeError::NotInteger(v))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_and_ranges() {
        assert_eq!(parse_values("2e-5").unwrap(), vec![2e-5]);
        assert_eq!(
            parse_counts("40:100:15").unwrap(),
            vec![40, 55, 70, 85, 100]
        );
        assert_eq!(parse_counts("40:99:15").unwrap(), vec![40, 55, 70, 85]);
        let s = parse_values("1e-5:5e-5:1e-5").unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s[0], 1e-5);
        assert_eq!(s[4], 5e-5);
        assert_eq!(parse_values("3:3:1").unwrap(), vec![3.0]);
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(parse_values(""), Err(RangeError::Empty));
        assert!(matches!(parse_values("abc"), Err(RangeError::BadNumber(_))));
        assert!(matches!(parse_values("nan"), Err(RangeError::BadNumber(_))));
        assert!(matches!(parse_values("1:2"), Err(RangeError::BadShape(_))));
        assert!(matches!(parse_values("1:2:0"), Err(RangeError::BadStep(_))));
        assert!(matches!(
            parse_values("1:2:-1"),
            Err(RangeError::BadStep(_))
        ));
        assert!(matches!(
            parse_values("5:1:1"),
            Err(RangeError::Descending { .. })
        ));
        assert_eq!(parse_values("0:1e300:1e-300"), Err(RangeError::TooMany));
        assert!(matches!(
            parse_counts("1.5"),
            Err(RangeError::NotInteger(_))
        ));
        assert!(matches!(parse_counts("-2"), Err(RangeError::NotInteger(_))));
        // step below the spacing of representable values near start
        assert!(parse_values("1e16:1.0000000000000002e16:1").is_err());
    }
}
