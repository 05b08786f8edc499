//! Additive white Gaussian noise channel `Y = X + Z`.
//!
//! The noise parameter `N` is the per-component variance, so the complex
//! density is `ρ_Z(z) = exp(-|z|²/2N) / (2πN)` and `E|Z|² = 2N`. A real
//! (one-component) variant is available for sensitivity checks on the real
//! alphabets; it is never the default.

mod information;
mod scan;

pub use information::{
    integrate_output_density, mutual_information, mutual_information_on_grid,
    mutual_information_via_output_entropy, output_entropy, tail_bound, QuadratureSpec,
    REFINEMENT_TOLERANCE, TAIL_TOLERANCE,
};
pub use scan::{curve_scan, find_p_for_noisy_efficiency, CurveRow, ScanError};

use std::f64::consts::{E, LN_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::constellation::{ConstellationError, SymbolDistribution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("noise parameter must be positive and finite, got {0}")]
    InvalidNoise(f64),
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),
    #[error("quadrature tail bound {bound:e} exceeds {limit:e}; widen half_width")]
    TailTooLarge { bound: f64, limit: f64 },
    #[error("quadrature did not converge: {coarse} bits on the base grid, {refined} bits on the refined grid")]
    NonConvergence { coarse: f64, refined: f64 },
    #[error("average energy is zero; use efficiency_limit for the p -> 1 value")]
    ZeroEnergy,
    #[error("real-valued noise requires a constellation on the real axis")]
    RealNoiseOnComplexAlphabet,
    #[error("target efficiency {target} unreachable (attainable range [{min}, {max}])")]
    UnreachableEfficiency { target: f64, min: f64, max: f64 },
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
}

/// How many noise components are added.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseDims {
    /// Circular noise in the complex plane.
    Complex,
    /// Noise on the real axis only.
    Real,
}

/// Gaussian noise with per-component variance `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    n: f64,
    dims: NoiseDims,
}

impl NoiseModel {
    /// Circular complex noise.
    pub fn new(n: f64) -> Result<Self, ChannelError> {
        Self::with_dims(n, NoiseDims::Complex)
    }

    /// Real-axis noise, for sensitivity checks on real alphabets.
    pub fn real(n: f64) -> Result<Self, ChannelError> {
        Self::with_dims(n, NoiseDims::Real)
    }

    pub fn with_dims(n: f64, dims: NoiseDims) -> Result<Self, ChannelError> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(ChannelError::InvalidNoise(n));
        }
        Ok(Self { n, dims })
    }

    /// The noise parameter `N`.
    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn dims(&self) -> NoiseDims {
        self.dims
    }

    pub fn sigma(&self) -> f64 {
        self.n.sqrt()
    }

    /// `ln ρ_Z(z)`. For real noise the imaginary part of `z` is ignored.
    pub fn ln_density(&self, z: Complex64) -> f64 {
        match self.dims {
            NoiseDims::Complex => -(2.0 * PI * self.n).ln() - z.norm_sqr() / (2.0 * self.n),
            NoiseDims::Real => -0.5 * (2.0 * PI * self.n).ln() - z.re * z.re / (2.0 * self.n),
        }
    }

    pub fn log2_density(&self, z: Complex64) -> f64 {
        self.ln_density(z) / LN_2
    }

    pub fn density(&self, z: Complex64) -> f64 {
        self.ln_density(z).exp()
    }

    /// Differential entropy `h(Z)` in bits: `lg(2πeN)` for complex noise,
    /// half of that for real noise.
    pub fn entropy(&self) -> f64 {
        let per_component = 0.5 * (2.0 * PI * E * self.n).log2();
        match self.dims {
            NoiseDims::Complex => 2.0 * per_component,
            NoiseDims::Real => per_component,
        }
    }

    /// One noise sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let sigma = self.sigma();
        let re: f64 = rng.sample(StandardNormal);
        match self.dims {
            NoiseDims::Complex => {
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(sigma * re, sigma * im)
            }
            NoiseDims::Real => Complex64::new(sigma * re, 0.0),
        }
    }

    /// Adds independent noise to every symbol in place.
    pub fn add_noise<R: Rng + ?Sized>(&self, rng: &mut R, symbols: &mut [Complex64]) {
        for x in symbols.iter_mut() {
            *x += self.sample(rng);
        }
    }
}

/// `ρ_Y(y) = Σ_x p_x ρ_Z(y - x)`.
pub fn output_density(dist: &SymbolDistribution, model: &NoiseModel, y: Complex64) -> f64 {
    dist.probs()
        .iter()
        .zip(dist.constellation().points())
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &x)| p * model.density(y - x))
        .sum()
}

/// Bits per energy unit under noise, `I(X;Y) / E`.
pub fn noisy_efficiency(
    dist: &SymbolDistribution,
    model: &NoiseModel,
    quad: &QuadratureSpec,
) -> Result<f64, ChannelError> {
    let energy = dist.average_energy();
    if energy <= 0.0 {
        return Err(ChannelError::ZeroEnergy);
    }
    Ok(mutual_information(dist, model, quad)? / energy)
}

/// `lim_{p→1} η = 1 / (N ln 4)`, common to every alphabet whose nonzero
/// points have unit energy.
pub fn efficiency_limit(n: f64) -> Result<f64, ChannelError> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(ChannelError::InvalidNoise(n));
    }
    Ok(1.0 / (n * 4f64.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{Constellation, ConstellationKind};
    use crate::rng;

    #[test]
    fn rejects_bad_noise() {
        assert!(NoiseModel::new(0.0).is_err());
        assert!(NoiseModel::new(-1.0).is_err());
        assert!(NoiseModel::new(f64::INFINITY).is_err());
        assert!(efficiency_limit(0.0).is_err());
    }

    #[test]
    fn limit_examples() {
        assert!((efficiency_limit(1.0).unwrap() - 0.72135).abs() < 1e-5);
        assert!((efficiency_limit(0.1).unwrap() - 7.2135).abs() < 1e-4);
        assert!((efficiency_limit(0.72135).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn sampling_moments() {
        let model = NoiseModel::new(0.1).unwrap();
        let mut rng = rng::seeded(11);
        let draws = 1_000_000;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut power = 0.0;
        for _ in 0..draws {
            let z = model.sample(&mut rng);
            sum += z;
            power += z.norm_sqr();
        }
        let mean = sum / draws as f64;
        let bound = 4.0 * (0.1f64 / draws as f64).sqrt();
        assert!(mean.re.abs() < bound && mean.im.abs() < bound, "{mean}");
        let power = power / draws as f64;
        assert!((power - 0.2).abs() < 0.002, "{power}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = NoiseModel::new(0.3).unwrap();
        let a: Vec<Complex64> = {
            let mut r = rng::stream(5, 9);
            (0..16).map(|_| model.sample(&mut r)).collect()
        };
        let b: Vec<Complex64> = {
            let mut r = rng::stream(5, 9);
            (0..16).map(|_| model.sample(&mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn real_noise_has_no_imaginary_part() {
        let model = NoiseModel::real(0.5).unwrap();
        let mut r = rng::seeded(1);
        assert!((0..100).all(|_| model.sample(&mut r).im == 0.0));
    }

    #[test]
    fn degenerate_output_density() {
        let model = NoiseModel::new(0.2).unwrap();
        let dist =
            SymbolDistribution::zero_signal_family(ConstellationKind::Hexagonal, 1.0).unwrap();
        for y in [Complex64::new(0.0, 0.0), Complex64::new(0.3, -0.7)] {
            let a = output_density(&dist, &model, y);
            let b = model.density(y);
            assert!((a - b).abs() <= 1e-15 * b);
        }
    }

    #[test]
    fn hexagonal_output_density_at_origin() {
        let model = NoiseModel::new(0.1).unwrap();
        let dist = SymbolDistribution::uniform(Constellation::hexagonal());
        let expected = (1.0 / 7.0) * (1.0 / (2.0 * PI * 0.1)) * (1.0 + 6.0 * (-1.0f64 / 0.2).exp());
        let got = output_density(&dist, &model, Complex64::new(0.0, 0.0));
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn noisy_efficiency_needs_energy() {
        let model = NoiseModel::new(0.1).unwrap();
        let dist = SymbolDistribution::zero_signal_family(ConstellationKind::Binary, 1.0).unwrap();
        assert_eq!(
            noisy_efficiency(&dist, &model, &QuadratureSpec::default()),
            Err(ChannelError::ZeroEnergy)
        );
    }
}
