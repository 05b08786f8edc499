//! Symbol alphabets with a zero-energy point, their probability
//! distributions, and the noise-free entropy / energy / efficiency arithmetic.
//!
//! Energies are `|x|²` in units where every nonzero point of the three
//! standard alphabets has energy 1. All logarithms are base 2.

use std::f64::consts::{E, LN_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `Σ p = 1` accepted when building a distribution.
const PROB_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstellationError {
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("distribution has {got} entries, constellation has {expected} symbols")]
    LengthMismatch { expected: usize, got: usize },
    #[error("probabilities must be non-negative and sum to 1 (sum = {0})")]
    NotNormalized(f64),
    #[error("zero-signal families are only defined for binary, ternary and hexagonal alphabets")]
    NotAFamily,
    #[error("constellation must have at least one point")]
    Empty,
    #[error("more than one zero-energy point")]
    MultipleZeroPoints,
    #[error("target energy {target} outside the achievable open interval ({min}, {max})")]
    EnergyOutOfRange { target: f64, min: f64, max: f64 },
    #[error("beta must be finite, got {0}")]
    NonFiniteBeta(f64),
    #[error("energy must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("quantization step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("target efficiency {target} unreachable (attainable range [{min}, {max}])")]
    UnreachableEfficiency { target: f64, min: f64, max: f64 },
}

/// Which alphabet a [`Constellation`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationKind {
    /// `{0, 1}`
    Binary,
    /// `{-1, 0, +1}`
    Ternary,
    /// `{0} ∪ {e^{ikπ/3} : k = 0..5}`
    Hexagonal,
    Custom,
}

impl ConstellationKind {
    /// Alphabet size of the three standard families.
    pub fn size(self) -> Option<usize> {
        match self {
            ConstellationKind::Binary => Some(2),
            ConstellationKind::Ternary => Some(3),
            ConstellationKind::Hexagonal => Some(7),
            ConstellationKind::Custom => None,
        }
    }
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ConstellationKind::Binary => "binary",
            ConstellationKind::Ternary => "ternary",
            ConstellationKind::Hexagonal => "hexagonal",
            ConstellationKind::Custom => "custom",
        };
        f.write_str(name)
    }
}

impl FromStr for ConstellationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "binary" => Ok(ConstellationKind::Binary),
            "ternary" => Ok(ConstellationKind::Ternary),
            "hexagonal" | "hex" => Ok(ConstellationKind::Hexagonal),
            other => Err(format!(
                "unknown constellation '{other}' (expected binary, ternary or hexagonal)"
            )),
        }
    }
}

/// A finite set of points in the I-Q plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    energies: Vec<f64>,
    zero_index: Option<usize>,
}

impl Constellation {
    /// One of the three standard alphabets. `Custom` is rejected.
    pub fn standard(kind: ConstellationKind) -> Result<Self, ConstellationError> {
        let points = match kind {
            ConstellationKind::Binary => vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ConstellationKind::Ternary => vec![
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
            ConstellationKind::Hexagonal => std::iter::once(Complex64::new(0.0, 0.0))
                .chain((0..6).map(|k| Complex64::from_polar(1.0, k as f64 * PI / 3.0)))
                .collect(),
            ConstellationKind::Custom => return Err(ConstellationError::NotAFamily),
        };
        Self::build(kind, points)
    }

    pub fn binary() -> Self {
        Self::standard(ConstellationKind::Binary).expect("binary alphabet")
    }

    pub fn ternary() -> Self {
        Self::standard(ConstellationKind::Ternary).expect("ternary alphabet")
    }

    pub fn hexagonal() -> Self {
        Self::standard(ConstellationKind::Hexagonal).expect("hexagonal alphabet")
    }

    /// An arbitrary alphabet. At most one point may sit at the origin.
    pub fn custom(points: Vec<Complex64>) -> Result<Self, ConstellationError> {
        Self::build(ConstellationKind::Custom, points)
    }

    fn build(kind: ConstellationKind, points: Vec<Complex64>) -> Result<Self, ConstellationError> {
        if points.is_empty() {
            return Err(ConstellationError::Empty);
        }
        let energies: Vec<f64> = points.iter().map(|x| x.norm_sqr()).collect();
        let mut zeros = energies.iter().enumerate().filter(|(_, &e)| e == 0.0);
        let zero_index = zeros.next().map(|(i, _)| i);
        if zeros.next().is_some() {
            return Err(ConstellationError::MultipleZeroPoints);
        }
        Ok(Self {
            kind,
            points,
            energies,
            zero_index,
        })
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn zero_index(&self) -> Option<usize> {
        self.zero_index
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every point lies on the real axis.
    pub fn is_real(&self) -> bool {
        self.points.iter().all(|x| x.im == 0.0)
    }

    /// Largest distance between two points (0 for a single point).
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }
}

/// A probability vector over the symbols of a constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDistribution {
    constellation: Constellation,
    probs: Vec<f64>,
}

impl SymbolDistribution {
    pub fn new(constellation: Constellation, probs: Vec<f64>) -> Result<Self, ConstellationError> {
        if probs.len() != constellation.len() {
            return Err(ConstellationError::LengthMismatch {
                expected: constellation.len(),
                got: probs.len(),
            });
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > PROB_SUM_TOLERANCE
        {
            return Err(ConstellationError::NotNormalized(sum));
        }
        Ok(Self {
            constellation,
            probs,
        })
    }

    /// The one-parameter family: the zero point gets `p`, the remaining
    /// `m - 1` symbols share `1 - p` equally.
    pub fn zero_signal_family(kind: ConstellationKind, p: f64) -> Result<Self, ConstellationError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ConstellationError::ProbabilityOutOfRange(p));
        }
        let constellation = Constellation::standard(kind)?;
        let zero = constellation.zero_index().ok_or(ConstellationError::NotAFamily)?;
        let m = constellation.len();
        let rest = (1.0 - p) / (m - 1) as f64;
        let probs = (0..m).map(|i| if i == zero { p } else { rest }).collect();
        Ok(Self {
            constellation,
            probs,
        })
    }

    /// Uniform probability modulation over the alphabet.
    pub fn uniform(constellation: Constellation) -> Self {
        let m = constellation.len();
        Self {
            probs: vec![1.0 / m as f64; m],
            constellation,
        }
    }

    /// All mass on one symbol.
    pub fn point_mass(constellation: Constellation, index: usize) -> Result<Self, ConstellationError> {
        let mut probs = vec![0.0; constellation.len()];
        *probs.get_mut(index).ok_or(ConstellationError::LengthMismatch {
            expected: constellation.len(),
            got: index + 1,
        })? = 1.0;
        Ok(Self {
            constellation,
            probs,
        })
    }

    /// `p_s ∝ exp(-β E_s)`.
    pub fn boltzmann(constellation: Constellation, beta: f64) -> Result<Self, ConstellationError> {
        if !beta.is_finite() {
            return Err(ConstellationError::NonFiniteBeta(beta));
        }
        let probs = boltzmann_weights(constellation.energies(), beta);
        Ok(Self {
            constellation,
            probs,
        })
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Shannon entropy in bits/symbol; `0 · lg 0 = 0`.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.probs)
    }

    /// `Σ p_s E_s`.
    pub fn average_energy(&self) -> f64 {
        self.probs
            .iter()
            .zip(self.constellation.energies())
            .map(|(p, e)| p * e)
            .sum()
    }

    /// Noise-free bits per energy unit, `entropy / average_energy`.
    pub fn efficiency(&self) -> Efficiency {
        let energy = self.average_energy();
        if energy > 0.0 {
            Efficiency::Finite(self.entropy() / energy)
        } else {
            Efficiency::Unbounded
        }
    }

    /// Whether all probability sits on a single symbol.
    pub fn is_point_mass(&self) -> bool {
        self.probs.iter().filter(|&&p| p > 0.0).count() == 1
    }
}

/// Bits per energy unit. A zero-energy distribution has no finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Efficiency {
    Finite(f64),
    /// Average energy is zero.
    Unbounded,
    /// Zero energy under noise; the value is the `p → 1` limit.
    Limit(f64),
}

impl Efficiency {
    /// Numeric value, `+∞` when unbounded.
    pub fn value(self) -> f64 {
        match self {
            Efficiency::Finite(v) | Efficiency::Limit(v) => v,
            Efficiency::Unbounded => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Efficiency::Finite(v) => Some(v),
            _ => None,
        }
    }
}

pub(crate) fn lg(x: f64) -> f64 {
    x.ln() / LN_2
}

/// Entropy in bits of an arbitrary probability vector.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * lg(1.0 / p))
        .sum()
}

fn boltzmann_weights(energies: &[f64], beta: f64) -> Vec<f64> {
    let exponents: Vec<f64> = energies.iter().map(|e| -beta * e).collect();
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponents.iter().map(|x| (x - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

fn boltzmann_energy(energies: &[f64], beta: f64) -> f64 {
    boltzmann_weights(energies, beta)
        .iter()
        .zip(energies)
        .map(|(p, e)| p * e)
        .sum()
}

/// Inverse temperature `β` whose Boltzmann distribution has average energy
/// `target_energy`. The map `β ↦ E(β)` is strictly decreasing, so a bracket
/// is grown geometrically from `β = 0` and then bisected.
pub fn solve_beta(constellation: &Constellation, target_energy: f64) -> Result<f64, ConstellationError> {
    let energies = constellation.energies();
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(target_energy > min && target_energy < max) {
        return Err(ConstellationError::EnergyOutOfRange {
            target: target_energy,
            min,
            max,
        });
    }
    let energy_at = |beta: f64| boltzmann_energy(energies, beta);
    let at_zero = energy_at(0.0);
    if at_zero == target_energy {
        return Ok(0.0);
    }
    // Keep E(lo) > target > E(hi).
    let (mut lo, mut hi) = if at_zero > target_energy {
        let mut hi: f64 = 1.0;
        while energy_at(hi) > target_energy {
            hi *= 2.0;
        }
        (if hi > 1.0 { hi / 2.0 } else { 0.0 }, hi)
    } else {
        let mut lo: f64 = -1.0;
        while energy_at(lo) < target_energy {
            lo *= 2.0;
        }
        (lo, if lo < -1.0 { lo / 2.0 } else { 0.0 })
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if energy_at(mid) > target_energy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Differential entropy (bits) of a real Gaussian with variance `energy`.
pub fn gaussian_entropy(energy: f64) -> Result<f64, ConstellationError> {
    if energy <= 0.0 {
        return Err(ConstellationError::NonPositiveEnergy(energy));
    }
    Ok(0.5 * lg(2.0 * PI * E * energy))
}

/// Differential entropy (bits) of a centred uniform density with second
/// moment `energy`.
pub fn uniform_entropy(energy: f64) -> Result<f64, ConstellationError> {
    if energy <= 0.0 {
        return Err(ConstellationError::NonPositiveEnergy(energy));
    }
    Ok(0.5 * lg(12.0 * energy))
}

/// `½ lg(πe/6)`: how many more bits a Gaussian carries than a uniform
/// density at equal average energy.
pub fn gaussian_gain() -> f64 {
    0.5 * lg(PI * E / 6.0)
}

/// Entropy of a density quantized with step `q`: `H + lg(1/q)`.
pub fn quantized_entropy_estimate(differential_entropy: f64, q: f64) -> Result<f64, ConstellationError> {
    if q <= 0.0 {
        return Err(ConstellationError::NonPositiveStep(q));
    }
    Ok(differential_entropy - lg(q))
}

/// Largest `p` the efficiency search will consider.
const P_CEILING: f64 = 1.0 - 1e-15;

/// Zero-signal probability `p ≥ 1/m` at which the noise-free efficiency of
/// the `kind` family equals `target_eta`. The branch below `1/m` is never
/// returned.
pub fn find_p_for_efficiency(kind: ConstellationKind, target_eta: f64) -> Result<f64, ConstellationError> {
    let m = kind.size().ok_or(ConstellationError::NotAFamily)?;
    let p_upm = 1.0 / m as f64;
    let eta = |p: f64| -> Result<f64, ConstellationError> {
        Ok(SymbolDistribution::zero_signal_family(kind, p)?
            .efficiency()
            .value())
    };
    let eta_upm = eta(p_upm)?;
    let eta_max = eta(P_CEILING)?;
    if !(target_eta.is_finite()) || target_eta < eta_upm - 1e-9 || target_eta > eta_max {
        return Err(ConstellationError::UnreachableEfficiency {
            target: target_eta,
            min: eta_upm,
            max: eta_max,
        });
    }
    if target_eta <= eta_upm {
        return Ok(p_upm);
    }
    let (mut lo, mut hi) = (p_upm, P_CEILING);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if eta(mid)? < target_eta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
