//! Grid specifications for `curves`.
//!
//! A grid is either `start:step:end`, inclusive of `end` within `1e-12`, or
//! a comma list whose entries may be fractions such as `1/7`.

use std::str::FromStr;

use thiserror::Error;

const ENDPOINT_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("cannot parse '{0}' as a number or fraction")]
    Number(String),
    #[error("step must be positive, got {0}")]
    Step(f64),
    #[error("range end {end} is below its start {start}")]
    Backwards { start: f64, end: f64 },
    #[error("grid is empty")]
    Empty,
    #[error("grid of {0} points is too large")]
    TooLarge(usize),
}

/// Largest number of points a range may expand to.
const MAX_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Range { start: f64, step: f64, end: f64 },
    List(Vec<f64>),
}

impl GridSpec {
    /// Grid points in ascending order for ranges, as given for lists. A
    /// range that spans `extra` also gets that point inserted, so the
    /// uniform point `1/m` is always present on a full sweep.
    pub fn points(&self, extra: Option<f64>) -> Vec<f64> {
        match self {
            GridSpec::List(values) => values.clone(),
            GridSpec::Range { start, step, end } => {
                let count = ((end - start) / step + ENDPOINT_SLACK / step).floor() as usize + 1;
                let mut points: Vec<f64> = (0..count)
                    .map(|i| round_to_slack(start + i as f64 * step).min(*end))
                    .collect();
                if let Some(x) = extra {
                    if x >= *start - ENDPOINT_SLACK && x <= *end + ENDPOINT_SLACK {
                        let at = points.partition_point(|&v| v < x);
                        let duplicate = [at.checked_sub(1), Some(at)]
                            .into_iter()
                            .flatten()
                            .any(|i| points.get(i).is_some_and(|v| (v - x).abs() <= ENDPOINT_SLACK));
                        if !duplicate {
                            points.insert(at, x);
                        }
                    }
                }
                points
            }
        }
    }
}

/// Removes the drift of repeated float addition.
fn round_to_slack(x: f64) -> f64 {
    (x / ENDPOINT_SLACK).round() * ENDPOINT_SLACK
}

fn number(s: &str) -> Result<f64, GridError> {
    let s = s.trim();
    let bad = || GridError::Number(s.to_string());
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

impl FromStr for GridSpec {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            let (start, step, end) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
            if step <= 0.0 {
                return Err(GridError::Step(step));
            }
            if end < start {
                return Err(GridError::Backwards { start, end });
            }
            let count = (end - start) / step;
            if count >= MAX_POINTS as f64 {
                return Err(GridError::TooLarge(count as usize));
            }
            return Ok(GridSpec::Range { start, step, end });
        }
        let values = s
            .split(',')
            .filter(|v| !v.trim().is_empty())
            .map(number)
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(GridError::Empty);
        }
        Ok(GridSpec::List(values))
    }
}
