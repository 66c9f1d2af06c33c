//! Parametric delay distributions and deterministic substream sampling.
//!
//! Distributions are parameterized by their analytic median and interquartile
//! range so that presets can be written straight from box-plot style figures.
//! Sampling is a pure function of `(seed, node, purpose, stream, seq)`: every
//! draw comes from its own counter-derived generator, so enabling a probe or
//! changing one distribution's parameters never shifts any other sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::time::TimeNs;

/// z value of the 0.75 quantile of the standard normal.
const Z75: f64 = 0.674_489_750_196_081_7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    /// `shift + Lognormal(mu, sigma)`, fitted so the analytic median and IQR
    /// match the configured values. The shift is `max(0, median - 2*iqr)`.
    ShiftedLognormal,
    /// Always the median.
    Constant,
    /// Uniform on `[median - iqr, median + iqr]` (so the analytic IQR is
    /// `iqr` and the support width is twice that).
    Uniform,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("median must be non-negative")]
    NegativeMedian,
    #[error("iqr must be non-negative")]
    NegativeIqr,
    #[error("uniform support extends below zero (median {0} < iqr {1})")]
    NegativeSupport(TimeNs, TimeNs),
    #[error("outlier probability {0} outside [0, 1]")]
    BadOutlierProb(f64),
    #[error("outlier scale must be non-negative")]
    BadOutlierScale,
}

/// A per-component delay law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub kind: DistributionKind,
    pub median: TimeNs,
    pub iqr: TimeNs,
    /// Probability that a sample is multiplied by `outlier_scale`.
    #[serde(default)]
    pub outlier_prob: f64,
    #[serde(default = "one")]
    pub outlier_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Distribution {
    pub fn constant(median: TimeNs) -> Self {
        Distribution {
            kind: DistributionKind::Constant,
            median,
            iqr: TimeNs::ZERO,
            outlier_prob: 0.0,
            outlier_scale: 1.0,
        }
    }

    pub fn uniform(median: TimeNs, iqr: TimeNs) -> Self {
        Distribution {
            kind: DistributionKind::Uniform,
            median,
            iqr,
            outlier_prob: 0.0,
            outlier_scale: 1.0,
        }
    }

    pub fn lognormal(median: TimeNs, iqr: TimeNs) -> Self {
        Distribution {
            kind: DistributionKind::ShiftedLognormal,
            median,
            iqr,
            outlier_prob: 0.0,
            outlier_scale: 1.0,
        }
    }

    pub fn with_outliers(mut self, prob: f64, scale: f64) -> Self {
        self.outlier_prob = prob;
        self.outlier_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<(), DistributionError> {
        if self.median.is_negative() {
            return Err(DistributionError::NegativeMedian);
        }
        if self.iqr.is_negative() {
            return Err(DistributionError::NegativeIqr);
        }
        if self.kind == DistributionKind::Uniform && self.iqr > self.median {
            return Err(DistributionError::NegativeSupport(self.median, self.iqr));
        }
        if !(0.0..=1.0).contains(&self.outlier_prob) {
            return Err(DistributionError::BadOutlierProb(self.outlier_prob));
        }
        if self.outlier_scale < 0.0 {
            return Err(DistributionError::BadOutlierScale);
        }
        Ok(())
    }

    /// Lognormal shape parameters `(shift, mu, sigma)` for the fitted law.
    fn lognormal_params(&self) -> (f64, f64, f64) {
        let m = self.median.as_ns() as f64;
        let i = self.iqr.as_ns() as f64;
        let shift = (m - 2.0 * i).max(0.0);
        let body_median = m - shift;
        let sigma = (i / (2.0 * body_median)).asinh() / Z75;
        (shift, body_median.ln(), sigma)
    }

    /// Quantile of the base law (outlier mixture excluded) at the standard
    /// normal score `z`; exact for constant and shifted-lognormal kinds and
    /// used by statistical tests.
    pub fn base_quantile_at_z(&self, z: f64) -> f64 {
        match self.kind {
            DistributionKind::Constant => self.median.as_ns() as f64,
            DistributionKind::Uniform => {
                // Map through the normal CDF for a comparable parameterization.
                let p = 0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2));
                let lo = (self.median - self.iqr).as_ns() as f64;
                lo + p * (2 * self.iqr.as_ns()) as f64
            }
            DistributionKind::ShiftedLognormal => {
                if self.iqr == TimeNs::ZERO {
                    return self.median.as_ns() as f64;
                }
                let (shift, mu, sigma) = self.lognormal_params();
                shift + (mu + sigma * z).exp()
            }
        }
    }

    /// Draw one non-negative sample.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> TimeNs {
        let base = match self.kind {
            DistributionKind::Constant => self.median.as_ns() as f64,
            DistributionKind::Uniform => {
                let lo = (self.median - self.iqr).as_ns();
                let hi = (self.median + self.iqr).as_ns();
                rng.random_range(lo..=hi) as f64
            }
            DistributionKind::ShiftedLognormal => {
                if self.iqr == TimeNs::ZERO {
                    self.median.as_ns() as f64
                } else {
                    let (shift, mu, sigma) = self.lognormal_params();
                    shift + (mu + sigma * standard_normal(rng)).exp()
                }
            }
        };
        let value = if self.outlier_prob > 0.0 && rng.random::<f64>() < self.outlier_prob {
            base * self.outlier_scale
        } else {
            base
        };
        TimeNs::from_ns(value.round().max(0.0) as i64)
    }
}

/// Box-Muller transform; kept in-tree so draws stay stable.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let mut u1: f64 = rng.random();
    while u1 <= f64::MIN_POSITIVE {
        u1 = rng.random();
    }
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Error function, Abramowitz-Stegun 7.1.26 (|err| < 1.5e-7); only used for
/// analytic cross-checks, never in the sampling path.
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

/// Deterministic generator for one draw site.
///
/// The stream is keyed by `(seed, node, purpose, stream, seq)`, so each node
/// and sampling purpose has an independent substream and the same frame gets
/// the same underlying randomness regardless of which probes are active.
pub fn substream_rng(seed: u64, node: &str, purpose: &str, stream: u32, seq: u64) -> ChaCha12Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update([0u8]);
    h.update(node.as_bytes());
    h.update([0u8]);
    h.update(purpose.as_bytes());
    h.update([0u8]);
    h.update(stream.to_le_bytes());
    h.update(seq.to_le_bytes());
    ChaCha12Rng::from_seed(h.finalize().into())
}

/// One-shot sample from a node/purpose substream.
pub fn sample_at(
    d: &Distribution,
    seed: u64,
    node: &str,
    purpose: &str,
    stream: u32,
    seq: u64,
) -> TimeNs {
    d.sample(&mut substream_rng(seed, node, purpose, stream, seq))
}
