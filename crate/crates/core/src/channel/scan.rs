//! Batch evaluation over a grid of zero-signal probabilities.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::{efficiency_limit, mutual_information, ChannelError, NoiseModel, QuadratureSpec};
use crate::constellation::{ConstellationKind, Efficiency, SymbolDistribution};

/// One point of an entropy / efficiency curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub p: f64,
    /// Entropy without noise, mutual information with noise (bits/symbol).
    pub information: f64,
    pub energy: f64,
    pub efficiency: Efficiency,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("row {row} (p = {p}): {source}")]
pub struct ScanError {
    pub row: usize,
    pub p: f64,
    #[source]
    pub source: ChannelError,
}

#[derive(Serialize)]
struct RowRecord {
    p: f64,
    information: f64,
    energy: f64,
    efficiency: Option<f64>,
    efficiency_kind: &'static str,
}

impl Serialize for CurveRow {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (efficiency, efficiency_kind) = match self.efficiency {
            Efficiency::Finite(v) => (Some(v), "finite"),
            Efficiency::Limit(v) => (Some(v), "limit"),
            Efficiency::Unbounded => (None, "unbounded"),
        };
        RowRecord {
            p: self.p,
            information: self.information,
            energy: self.energy,
            efficiency,
            efficiency_kind,
        }
        .serialize(serializer)
    }
}

fn scan_row(
    kind: ConstellationKind,
    noise: Option<&NoiseModel>,
    p: f64,
    quad: &QuadratureSpec,
) -> Result<CurveRow, ChannelError> {
    let dist = SymbolDistribution::zero_signal_family(kind, p)?;
    let energy = dist.average_energy();
    let Some(model) = noise else {
        return Ok(CurveRow {
            p,
            information: dist.entropy(),
            energy,
            efficiency: dist.efficiency(),
        });
    };
    let information = mutual_information(&dist, model, quad)?;
    let efficiency = if energy > 0.0 {
        Efficiency::Finite(information / energy)
    } else {
        Efficiency::Limit(efficiency_limit(model.n())?)
    };
    Ok(CurveRow {
        p,
        information,
        energy,
        efficiency,
    })
}

/// Evaluates the `kind` family at every `p` in `p_grid`, noise-free when
/// `noise` is `None`. Rows are computed in parallel and returned in grid
/// order; the first failing row (lowest index) is reported.
pub fn curve_scan(
    kind: ConstellationKind,
    noise: Option<&NoiseModel>,
    p_grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<CurveRow>, ScanError> {
    p_grid
        .par_iter()
        .enumerate()
        .map(|(row, &p)| {
            scan_row(kind, noise, p, quad).map_err(|source| ScanError { row, p, source })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Largest `p` tried by the noisy efficiency search.
const NOISY_P_CEILING: f64 = 1.0 - 1e-7;

/// Zero-signal probability `p ≥ 1/m` at which the noisy efficiency of the
/// `kind` family equals `target_eta`, located by bisection to `1e-7` in `p`.
/// Targets at or above the value reached at `p = 1 - 1e-7` are reported as
/// unreachable.
pub fn find_p_for_noisy_efficiency(
    kind: ConstellationKind,
    model: &NoiseModel,
    target_eta: f64,
    quad: &QuadratureSpec,
) -> Result<f64, ChannelError> {
    let m = kind
        .size()
        .ok_or(crate::constellation::ConstellationError::NotAFamily)?;
    let eta = |p: f64| -> Result<f64, ChannelError> {
        let dist = SymbolDistribution::zero_signal_family(kind, p)?;
        Ok(mutual_information(&dist, model, quad)? / dist.average_energy())
    };
    let p_upm = 1.0 / m as f64;
    let (eta_lo, eta_hi) = (eta(p_upm)?, eta(NOISY_P_CEILING)?);
    if !(target_eta >= eta_lo - 1e-9 && target_eta < eta_hi) {
        return Err(ChannelError::UnreachableEfficiency {
            target: target_eta,
            min: eta_lo,
            max: eta_hi,
        });
    }
    if target_eta <= eta_lo {
        return Ok(p_upm);
    }
    let (mut lo, mut hi) = (p_upm, NOISY_P_CEILING);
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if eta(mid)? < target_eta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_rows_preserve_order() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let rows = curve_scan(ConstellationKind::Binary, None, &grid, &QuadratureSpec::default()).unwrap();
        assert_eq!(rows.len(), grid.len());
        for (row, p) in rows.iter().zip(&grid) {
            assert_eq!(row.p, *p);
        }
        assert_eq!(rows[0].information, 0.0);
        assert_eq!(rows[10].information, 0.0);
        assert_eq!(rows[10].efficiency, Efficiency::Unbounded);
    }

    #[test]
    fn bad_row_reports_index() {
        let err = curve_scan(
            ConstellationKind::Ternary,
            None,
            &[0.1, 0.2, 1.5, 2.0],
            &QuadratureSpec::default(),
        )
        .unwrap_err();
        assert_eq!(err.row, 2);
        assert_eq!(err.p, 1.5);
    }

    #[test]
    fn noisy_point_mass_row_uses_limit() {
        let model = NoiseModel::new(1.0).unwrap();
        let rows = curve_scan(ConstellationKind::Binary, Some(&model), &[1.0], &QuadratureSpec::default())
            .unwrap();
        assert_eq!(rows[0].information, 0.0);
        assert_eq!(rows[0].efficiency, Efficiency::Limit(efficiency_limit(1.0).unwrap()));
    }

    #[test]
    fn row_serializes_unbounded_as_null() {
        let row = CurveRow {
            p: 1.0,
            information: 0.0,
            energy: 0.0,
            efficiency: Efficiency::Unbounded,
        };
        let json = serde_json::to_value(row).unwrap();
        assert!(json["efficiency"].is_null());
        assert_eq!(json["efficiency_kind"], "unbounded");
    }
}
