//! Laplace and Gumbel noise, plus private selection by Gumbel-argmax.
//!
//! All samplers use inverse-transform sampling from a seeded ChaCha stream.
//! The uniform draw is clamped to `[2^-53, 1 - 2^-53]` so the logarithms in
//! the inverse CDFs stay finite. This is not a cryptographic source and does
//! not defend against floating-point attacks on the Laplace mechanism; it is
//! meant for experiments and reproducible simulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{ensure_positive, Error, Result};

const U_MIN: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53
const U_MAX: f64 = 1.0 - U_MIN;

/// Distribution family a [`NoiseSource`] draws from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// Two-sided Laplace with the source's scale.
    Laplace,
    /// Gumbel (max-type) with the source's location and scale.
    Gumbel,
    /// Uniform on `[low, high]`. Bounded noise for utility experiments only.
    Uniform { low: f64, high: f64 },
    /// Always returns the location. Used to test algorithms in their noiseless limit.
    ZeroForTest,
}

/// A seeded stream of noise values.
///
/// Each concurrent consumer must own its own source; use [`derive_seed`] to
/// split a master seed into independent per-instance seeds.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    kind: NoiseKind,
    scale: f64,
    location: f64,
    rng: ChaCha12Rng,
}

impl NoiseSource {
    pub fn laplace(scale: f64, seed: u64) -> Result<Self> {
        ensure_positive("laplace scale", scale)?;
        Ok(Self::raw(NoiseKind::Laplace, scale, 0.0, seed))
    }

    pub fn gumbel(location: f64, scale: f64, seed: u64) -> Result<Self> {
        ensure_positive("gumbel scale", scale)?;
        if !location.is_finite() {
            return Err(Error::Parameter(format!("gumbel location must be finite, got {location}")));
        }
        Ok(Self::raw(NoiseKind::Gumbel, scale, location, seed))
    }

    pub fn uniform(low: f64, high: f64, seed: u64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low <= high) {
            return Err(Error::Parameter(format!("uniform bounds must satisfy low <= high, got [{low}, {high}]")));
        }
        Ok(Self::raw(NoiseKind::Uniform { low, high }, high - low, 0.0, seed))
    }

    pub fn zero() -> Self {
        Self::raw(NoiseKind::ZeroForTest, 0.0, 0.0, 0)
    }

    fn raw(kind: NoiseKind, scale: f64, location: f64, seed: u64) -> Self {
        Self { kind, scale, location, rng: ChaCha12Rng::seed_from_u64(seed) }
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn is_zero(&self) -> bool {
        self.kind == NoiseKind::ZeroForTest
    }

    /// True for the two kinds that carry a differential-privacy guarantee.
    pub fn is_private(&self) -> bool {
        matches!(self.kind, NoiseKind::Laplace | NoiseKind::Gumbel)
    }

    /// Uniform draw on the open unit interval, clamped away from 0 and 1.
    pub fn open_uniform(&mut self) -> f64 {
        let u: f64 = self.rng.random();
        u.clamp(U_MIN, U_MAX)
    }

    /// Draws one value from this source's own distribution.
    pub fn sample(&mut self) -> f64 {
        match self.kind {
            NoiseKind::Laplace => laplace_quantile(self.open_uniform(), self.scale),
            NoiseKind::Gumbel => gumbel_quantile(self.open_uniform(), self.location, self.scale),
            NoiseKind::Uniform { low, high } => {
                let u: f64 = self.rng.random();
                low + (high - low) * u
            }
            NoiseKind::ZeroForTest => self.location,
        }
    }
}

/// Mixes a master seed with a stream index into an independent child seed
/// (SplitMix64 finalizer applied twice).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Inverse CDF of the zero-mean Laplace distribution.
pub fn laplace_quantile(u: f64, scale: f64) -> f64 {
    let centered = u - 0.5;
    -scale * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}

/// Inverse CDF of the Gumbel distribution: `location - scale * ln(-ln u)`.
pub fn gumbel_quantile(u: f64, location: f64, scale: f64) -> f64 {
    location - scale * (-u.ln()).ln()
}

/// Draws `Lap(scale)` from the source's random stream.
///
/// A `ZeroForTest` source yields 0.
pub fn sample_laplace(scale: f64, source: &mut NoiseSource) -> Result<f64> {
    ensure_positive("laplace scale", scale)?;
    if source.is_zero() {
        return Ok(0.0);
    }
    Ok(laplace_quantile(source.open_uniform(), scale))
}

/// Draws `Gumbel(location, scale)` from the source's random stream.
///
/// A `ZeroForTest` source yields `location`.
pub fn sample_gumbel(location: f64, scale: f64, source: &mut NoiseSource) -> Result<f64> {
    ensure_positive("gumbel scale", scale)?;
    if source.is_zero() {
        return Ok(location);
    }
    Ok(gumbel_quantile(source.open_uniform(), location, scale))
}

pub fn gumbel_cdf(x: f64, location: f64, scale: f64) -> Result<f64> {
    ensure_positive("gumbel scale", scale)?;
    Ok((-(-(x - location) / scale).exp()).exp())
}

pub fn laplace_cdf(x: f64, scale: f64) -> Result<f64> {
    ensure_positive("laplace scale", scale)?;
    Ok(if x < 0.0 { 0.5 * (x / scale).exp() } else { 1.0 - 0.5 * (-x / scale).exp() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    pub index: usize,
    pub score: f64,
}

/// Exponential mechanism realised as Gumbel-argmax.
///
/// Adds `Gumbel(0, 2 * sensitivity / epsilon)` to every score and returns the
/// `index` of the largest noisy score. The selection law is exactly
/// `P(i) ∝ exp(epsilon * score_i / (2 * sensitivity))`, without ever
/// exponentiating a score. With a `ZeroForTest` source this is the exact
/// argmax (first maximum wins).
pub fn private_argmax(
    candidates: &[ScoredCandidate],
    epsilon: f64,
    sensitivity: f64,
    source: &mut NoiseSource,
) -> Result<usize> {
    ensure_positive("epsilon", epsilon)?;
    ensure_positive("sensitivity", sensitivity)?;
    if candidates.is_empty() {
        return Err(Error::Parameter("private_argmax needs at least one candidate".into()));
    }
    let scale = 2.0 * sensitivity / epsilon;
    let mut best = (candidates[0].index, f64::NEG_INFINITY);
    for c in candidates {
        let noisy = c.score + sample_gumbel(0.0, scale, source)?;
        if noisy > best.1 {
            best = (c.index, noisy);
        }
    }
    Ok(best.0)
}
