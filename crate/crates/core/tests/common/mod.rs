//! Test-only oracles built without the library's channel code.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Complex Gaussian density with per-component variance `n`.
fn gauss(z: Complex64, n: f64) -> f64 {
    (-(z.re * z.re + z.im * z.im) / (2.0 * n)).exp() / (2.0 * PI * n)
}

/// Monte-Carlo estimate of `I(X;Y)` in bits for `Y = X + Z`, averaging
/// `lg ρ(y|x) − lg ρ(y)` over `samples` draws. Returns (estimate, standard
/// error).
pub fn monte_carlo_information(
    points: &[Complex64],
    probs: &[f64],
    n: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    const CHUNKS: usize = 64;
    let per_chunk = samples / CHUNKS;
    let sigma = n.sqrt();
    let (sum, sum_sq) = (0..CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let mut acc = (0.0, 0.0);
            for _ in 0..per_chunk {
                let u: f64 = rng.random();
                let mut x = points.len() - 1;
                let mut cum = 0.0;
                for (i, p) in probs.iter().enumerate() {
                    cum += p;
                    if u < cum {
                        x = i;
                        break;
                    }
                }
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let z = Complex64::new(sigma * re, sigma * im);
                let y = points[x] + z;
                let mix: f64 = points.iter().zip(probs).map(|(&c, &p)| p * gauss(y - c, n)).sum();
                let term = (gauss(z, n) / mix).log2();
                acc.0 += term;
                acc.1 += term * term;
            }
            acc
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let count = (per_chunk * CHUNKS) as f64;
    let mean = sum / count;
    let var = sum_sq / count - mean * mean;
    (mean, (var / count).sqrt())
}

/// Noise-free efficiency `h/E` of the zero-signal family with `m` points at
/// unit energy, computed from scratch.
pub fn family_efficiency(m: usize, p: f64) -> f64 {
    let q = (1.0 - p) / (m - 1) as f64;
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if q > 0.0 {
        h -= (m - 1) as f64 * q * q.log2();
    }
    h / (1.0 - p)
}

pub fn family_entropy(m: usize, p: f64) -> f64 {
    family_efficiency(m, p) * (1.0 - p)
}

/// Reads a seed list: one integer per line, `#` comments allowed.
pub fn read_seeds(text: &str) -> Vec<u64> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse().expect("seed"))
        .collect()
}

/// Aitken's Δ² extrapolation of a geometrically converging sequence.
pub fn aitken(a: f64, b: f64, c: f64) -> f64 {
    let denom = (c - b) - (b - a);
    if denom == 0.0 {
        c
    } else {
        c - (c - b) * (c - b) / denom
    }
}

/// `I(X;Y)` in bits by the trapezoid rule on one uniform box around the
/// constellation, in the divergence form `Σ p_x ∫ ρ(y|x) lg(ρ(y|x)/ρ(y))`.
/// The rule converges exponentially for Gaussian integrands, so a step of
/// σ/10 and a margin of 12σ are far below test tolerances.
pub fn trapezoid_information(points: &[Complex64], probs: &[f64], n: f64) -> f64 {
    let sigma = n.sqrt();
    let h = sigma / 10.0;
    let margin = 12.0 * sigma;
    let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for c in points {
        lo_re = lo_re.min(c.re);
        hi_re = hi_re.max(c.re);
        lo_im = lo_im.min(c.im);
        hi_im = hi_im.max(c.im);
    }
    let nx = ((hi_re - lo_re + 2.0 * margin) / h).ceil() as usize;
    let ny = ((hi_im - lo_im + 2.0 * margin) / h).ceil() as usize;
    (0..=nx)
        .into_par_iter()
        .map(|i| {
            let re = lo_re - margin + i as f64 * h;
            let mut acc = 0.0;
            for j in 0..=ny {
                let y = Complex64::new(re, lo_im - margin + j as f64 * h);
                let cond: Vec<f64> = points.iter().map(|&c| gauss(y - c, n)).collect();
                let mix: f64 = cond.iter().zip(probs).map(|(c, p)| c * p).sum();
                for (c, p) in cond.iter().zip(probs) {
                    if *p > 0.0 && *c > 0.0 {
                        acc += p * c * (c / mix).log2();
                    }
                }
            }
            acc
        })
        .sum::<f64>()
        * h
        * h
}
