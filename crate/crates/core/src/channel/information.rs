//! Mutual information of a discrete input under Gaussian noise.
//!
//! The primary route is the per-symbol divergence form
//!
//! `I = Σ_x p_x ∫ ρ_Z(z) lg(ρ_Z(z) / ρ_Y(x + z)) dz`
//!
//! integrated with the midpoint rule on a square grid centred on each point.
//! Inside the logarithm `ρ_Y(x+z)/ρ_Z(z) = Σ_b p_b exp(-d_b(z))` where
//! `d_b` is affine in `z`, so every term factors into a product of
//! per-axis tables and the inner loop needs one `ln` per grid node.
//!
//! `h(Y) - h(Z)` on a box covering the whole constellation is kept as an
//! independent cross-check.

use std::f64::consts::{LN_2, PI};

use super::{ChannelError, NoiseDims, NoiseModel};
use crate::constellation::SymbolDistribution;

/// Largest admissible analytic bound on the integrand mass outside the grid.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Largest admissible change in `I` (bits) when the grid is refined.
pub const REFINEMENT_TOLERANCE: f64 = 1e-4;

/// Integration window and resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Window half-width in units of `√N`.
    pub half_width: f64,
    pub steps_per_axis: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            steps_per_axis: 401,
        }
    }
}

impl QuadratureSpec {
    pub fn new(half_width: f64, steps_per_axis: usize) -> Result<Self, ChannelError> {
        let spec = Self {
            half_width,
            steps_per_axis,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.half_width >= 6.0 && self.half_width.is_finite()) {
            return Err(ChannelError::InvalidQuadrature(format!(
                "half_width must be at least 6, got {}",
                self.half_width
            )));
        }
        if self.steps_per_axis < 201 {
            return Err(ChannelError::InvalidQuadrature(format!(
                "steps_per_axis must be at least 201, got {}",
                self.steps_per_axis
            )));
        }
        Ok(())
    }

    /// Twice the resolution (401 → 801).
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            steps_per_axis: 2 * self.steps_per_axis - 1,
        }
    }
}

/// Midpoint nodes on `[lo, hi]` and the cell width.
fn midpoints(lo: f64, hi: f64, steps: usize) -> (Vec<f64>, f64) {
    let h = (hi - lo) / steps as f64;
    ((0..steps).map(|i| lo + (i as f64 + 0.5) * h).collect(), h)
}

fn check_dims(dist: &SymbolDistribution, model: &NoiseModel) -> Result<(), ChannelError> {
    if model.dims() == NoiseDims::Real && !dist.constellation().is_real() {
        return Err(ChannelError::RealNoiseOnComplexAlphabet);
    }
    Ok(())
}

/// Analytic bound (bits) on the part of the divergence integral outside
/// the per-symbol windows.
///
/// The window contains the disc of radius `R = half_width·√N`, outside of
/// which `ρ_Z` has mass at most `exp(-R²/2N)` and first moment at most
/// `(R + √N·√(π/2))·exp(-R²/2N)`. The log ratio is bounded by
/// `max(ln(1/p_x), |z|·diam/N)`.
pub fn tail_bound(dist: &SymbolDistribution, model: &NoiseModel, quad: &QuadratureSpec) -> f64 {
    let n = model.n();
    let sigma = model.sigma();
    let radius = quad.half_width * sigma;
    let mass = (-0.5 * quad.half_width * quad.half_width).exp();
    let first_moment = (radius + sigma * (PI / 2.0).sqrt()) * mass;
    let p_min = dist
        .probs()
        .iter()
        .copied()
        .filter(|&p| p > 0.0)
        .fold(1.0, f64::min);
    let diameter = dist.constellation().diameter();
    ((1.0 / p_min).ln() * mass + diameter / n * first_moment) / LN_2
}

/// Mutual information (bits/symbol) on a single grid, without the
/// refinement check.
pub fn mutual_information_on_grid(
    dist: &SymbolDistribution,
    model: &NoiseModel,
    quad: &QuadratureSpec,
) -> Result<f64, ChannelError> {
    quad.validate()?;
    check_dims(dist, model)?;
    let active: Vec<(f64, num_complex::Complex64)> = dist
        .probs()
        .iter()
        .copied()
        .zip(dist.constellation().points().iter().copied())
        .filter(|(p, _)| *p > 0.0)
        .collect();
    if active.len() <= 1 {
        return Ok(0.0);
    }
    let bound = tail_bound(dist, model, quad);
    if bound > TAIL_TOLERANCE {
        return Err(ChannelError::TailTooLarge {
            bound,
            limit: TAIL_TOLERANCE,
        });
    }

    let n = model.n();
    let half = quad.half_width * model.sigma();
    let (grid, h) = midpoints(-half, half, quad.steps_per_axis);
    let norm = 1.0 / (2.0 * PI * n).sqrt();
    let weight: Vec<f64> = grid
        .iter()
        .map(|g| norm * (-g * g / (2.0 * n)).exp() * h)
        .collect();

    let mut total = 0.0;
    for &(p_a, a) in &active {
        let nats = match model.dims() {
            NoiseDims::Complex => {
                // exp(-d_b) = [p_b e^{-|Δ|²/4N - Δr·u/N}] · [e^{-|Δ|²/4N - Δi·v/N}]
                let mut fx = Vec::with_capacity(active.len());
                let mut fy = Vec::with_capacity(active.len());
                for &(p_b, b) in &active {
                    let delta = a - b;
                    let c = delta.norm_sqr() / (4.0 * n);
                    fx.push(
                        grid.iter()
                            .map(|u| p_b * (-c - delta.re * u / n).exp())
                            .collect::<Vec<_>>(),
                    );
                    fy.push(
                        grid.iter()
                            .map(|v| (-c - delta.im * v / n).exp())
                            .collect::<Vec<_>>(),
                    );
                }
                let mut acc = 0.0;
                for (j, wy) in weight.iter().enumerate() {
                    let mut row = 0.0;
                    for (i, wx) in weight.iter().enumerate() {
                        let s: f64 = fx.iter().zip(&fy).map(|(x, y)| x[i] * y[j]).sum();
                        row -= wx * s.ln();
                    }
                    acc += wy * row;
                }
                acc
            }
            NoiseDims::Real => {
                let fx: Vec<Vec<f64>> = active
                    .iter()
                    .map(|&(p_b, b)| {
                        let delta = a.re - b.re;
                        grid.iter()
                            .map(|u| p_b * (-delta * delta / (2.0 * n) - delta * u / n).exp())
                            .collect()
                    })
                    .collect();
                weight
                    .iter()
                    .enumerate()
                    .map(|(i, w)| -w * fx.iter().map(|f| f[i]).sum::<f64>().ln())
                    .sum()
            }
        };
        total += p_a * nats;
    }
    Ok(total / LN_2)
}

/// Mutual information `I(X;Y)` in bits/symbol.
///
/// Evaluated on the requested grid and on the refined grid; a change larger
/// than [`REFINEMENT_TOLERANCE`] is reported as non-convergence. Returns the
/// refined value.
pub fn mutual_information(
    dist: &SymbolDistribution,
    model: &NoiseModel,
    quad: &QuadratureSpec,
) -> Result<f64, ChannelError> {
    let coarse = mutual_information_on_grid(dist, model, quad)?;
    let refined = mutual_information_on_grid(dist, model, &quad.refined())?;
    if (coarse - refined).abs() > REFINEMENT_TOLERANCE {
        return Err(ChannelError::NonConvergence { coarse, refined });
    }
    Ok(refined)
}

/// Per-axis tables of `p_b ρ(y - b)` over a box covering every point.
struct OutputGrid {
    hx: f64,
    hy: f64,
    /// `fx[b][i]`, with `p_b` folded in.
    fx: Vec<Vec<f64>>,
    /// `fy[b][j]`; empty for real noise.
    fy: Vec<Vec<f64>>,
}

impl OutputGrid {
    fn new(dist: &SymbolDistribution, model: &NoiseModel, quad: &QuadratureSpec) -> Self {
        let n = model.n();
        let pad = quad.half_width * model.sigma();
        let active: Vec<_> = dist
            .probs()
            .iter()
            .copied()
            .zip(dist.constellation().points().iter().copied())
            .filter(|(p, _)| *p > 0.0)
            .collect();
        let (re_lo, re_hi, im_lo, im_hi) = active.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), (_, x)| (a.min(x.re), b.max(x.re), c.min(x.im), d.max(x.im)),
        );
        let norm = 1.0 / (2.0 * PI * n).sqrt();
        let phi = |t: f64| norm * (-t * t / (2.0 * n)).exp();
        let (xs, hx) = midpoints(re_lo - pad, re_hi + pad, quad.steps_per_axis);
        let fx = active
            .iter()
            .map(|(p, b)| xs.iter().map(|u| p * phi(u - b.re)).collect())
            .collect();
        let (fy, hy) = match model.dims() {
            NoiseDims::Complex => {
                let (ys, hy) = midpoints(im_lo - pad, im_hi + pad, quad.steps_per_axis);
                (
                    active
                        .iter()
                        .map(|(_, b)| ys.iter().map(|v| phi(v - b.im)).collect())
                        .collect(),
                    hy,
                )
            }
            NoiseDims::Real => (Vec::new(), 1.0),
        };
        Self { hx, hy, fx, fy }
    }

    /// Calls `f(ρ_Y)` at every node and sums `f(ρ_Y)·cell area`.
    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let nx = self.fx[0].len();
        if self.fy.is_empty() {
            return (0..nx)
                .map(|i| f(self.fx.iter().map(|c| c[i]).sum()))
                .sum::<f64>()
                * self.hx;
        }
        let ny = self.fy[0].len();
        let mut acc = 0.0;
        for j in 0..ny {
            for i in 0..nx {
                let rho: f64 = self.fx.iter().zip(&self.fy).map(|(x, y)| x[i] * y[j]).sum();
                acc += f(rho);
            }
        }
        acc * self.hx * self.hy
    }
}

/// `∫ ρ_Y` on the output box; 1 up to the truncated tails.
pub fn integrate_output_density(
    dist: &SymbolDistribution,
    model: &NoiseModel,
    quad: &QuadratureSpec,
) -> Result<f64, ChannelError> {
    quad.validate()?;
    check_dims(dist, model)?;
    Ok(OutputGrid::new(dist, model, quad).integrate(|rho| rho))
}

/// Differential entropy `h(Y)` in bits on the output box.
pub fn output_entropy(
    dist: &SymbolDistribution,
    model: &NoiseModel,
    quad: &QuadratureSpec,
) -> Result<f64, ChannelError> {
    quad.validate()?;
    check_dims(dist, model)?;
    let nats = OutputGrid::new(dist, model, quad)
        .integrate(|rho| if rho > 0.0 { -rho * rho.ln() } else { 0.0 });
    Ok(nats / LN_2)
}

/// `I = h(Y) - h(Z)`.
pub fn mutual_information_via_output_entropy(
    dist: &SymbolDistribution,
    model: &NoiseModel,
    quad: &QuadratureSpec,
) -> Result<f64, ChannelError> {
    Ok(output_entropy(dist, model, quad)? - model.entropy())
}
