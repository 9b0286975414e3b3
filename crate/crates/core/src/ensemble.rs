//! Coherent-amplitude prior `p(α) = (λ/π) e^{−λ|α|²}` and ensemble averages.
//!
//! Sampling is counter based: sample `i` is drawn from a ChaCha8 stream
//! keyed by the seed, at word offset `4i`, via Box–Muller. The value of
//! each sample therefore depends only on `(seed, i)`, and the reduction
//! runs over fixed-size batches in index order, so results are
//! bit-identical for any number of rayon threads.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Minimum Monte-Carlo sample count.
pub const MIN_SAMPLES: usize = 100;
const BATCH: usize = 4096;
const WORDS_PER_SAMPLE: u128 = 4;

/// Gaussian prior over coherent amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorEnsemble {
    /// Inverse width λ.
    pub lambda: f64,
    pub seed: u64,
}

impl PriorEnsemble {
    pub fn new(lambda: f64, seed: u64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", format!("{lambda} must be positive and finite")));
        }
        Ok(Self { lambda, seed })
    }

    /// Sampler positioned at sample index `start`.
    pub fn sampler_at(&self, start: u64) -> PriorSampler {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(WORDS_PER_SAMPLE * start as u128);
        PriorSampler {
            rng,
            scale: (0.5 / self.lambda).sqrt(),
        }
    }

    /// The `index`-th sample of this ensemble's stream.
    pub fn sample(&self, index: u64) -> Complex64 {
        self.sampler_at(index).next_alpha()
    }
}

/// Sequential reader of a prior sample stream.
#[derive(Debug, Clone)]
pub struct PriorSampler {
    rng: ChaCha8Rng,
    scale: f64,
}

impl PriorSampler {
    fn unit_open(&mut self) -> f64 {
        // (0, 1]: never zero, so ln() below is finite.
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_alpha(&mut self) -> Complex64 {
        let u1 = self.unit_open();
        let u2 = self.unit_open();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        Complex64::new(r * c, r * s) * self.scale
    }
}

impl Iterator for PriorSampler {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        Some(self.next_alpha())
    }
}

/// One draw from the prior, stream position 0.
pub fn sample_prior(ensemble: &PriorEnsemble) -> Complex64 {
    ensemble.sample(0)
}

/// Sample mean with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }
}

fn pairwise_merge(parts: &[Moments]) -> Moments {
    match parts.len() {
        0 => Moments {
            n: 0.0,
            mean: 0.0,
            m2: 0.0,
        },
        1 => parts[0],
        len => {
            let (lo, hi) = parts.split_at(len / 2);
            pairwise_merge(lo).merge(pairwise_merge(hi))
        }
    }
}

/// Monte-Carlo average of `f` over `n` prior samples.
///
/// Aborts with [`Error::KernelOutOfRange`] if `f` leaves `[0, 1]`.
pub fn mc_average_fidelity<F>(f: F, ensemble: &PriorEnsemble, n: usize) -> Result<MCEstimate>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    if n < MIN_SAMPLES {
        return Err(Error::param(
            "n",
            format!("{n} samples; at least {MIN_SAMPLES} required"),
        ));
    }
    let n_batches = n.div_ceil(BATCH);
    let parts: Vec<Moments> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let start = b * BATCH;
            let len = BATCH.min(n - start);
            let mut sampler = ensemble.sampler_at(start as u64);
            let mut acc = Moments {
                n: 0.0,
                mean: 0.0,
                m2: 0.0,
            };
            for _ in 0..len {
                let v = f(sampler.next_alpha());
                if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                    return Err(Error::KernelOutOfRange { value: v });
                }
                acc.n += 1.0;
                let delta = v - acc.mean;
                acc.mean += delta / acc.n;
                acc.m2 += delta * (v - acc.mean);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let total = pairwise_merge(&parts);
    let var = total.m2 / (total.n - 1.0);
    Ok(MCEstimate {
        mean: total.mean,
        stderr: (var.max(0.0) / total.n).sqrt(),
        n_samples: n,
        seed: ensemble.seed,
    })
}

/// Closed form of `∫ d²α (λ/π) e^{−λ|α|²} e^{−|c₁α + c₂ᾱ|²}`.
///
/// With `α = u + iv` the exponent is `−[u v] M [u v]ᵀ`, `a = c₁ + c₂`,
/// `b = i(c₁ − c₂)`, `M = [[|a|², Re(a b̄)], [Re(a b̄), |b|²]]`, and the
/// integral is `λ / √det(λI + M)`.
pub fn gaussian_average(c_linear: Complex64, c_conjugate: Complex64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    let a = c_linear + c_conjugate;
    let b = Complex64::i() * (c_linear - c_conjugate);
    let cross = (a * b.conj()).re;
    let form = Matrix2::new(lambda + a.norm_sqr(), cross, cross, lambda + b.norm_sqr());
    let det = form.determinant();
    if !(det > 0.0) || form[(0, 0)] <= 0.0 {
        return Err(Error::NotPositiveDefinite(det));
    }
    Ok(lambda / det.sqrt())
}
