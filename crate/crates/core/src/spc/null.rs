//! No-change models for normalized series: simulation and fitting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::NormalizedSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NullKind {
    WhiteNoise,
    Ar1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullModel {
    pub kind: NullKind,
    /// Marginal standard deviation.
    pub sigma: f64,
    /// Lag-one coefficient; zero for white noise.
    #[serde(default)]
    pub phi: f64,
}

impl NullModel {
    pub fn white_noise(sigma: f64) -> Self {
        NullModel {
            kind: NullKind::WhiteNoise,
            sigma,
            phi: 0.0,
        }
    }

    pub fn ar1(sigma: f64, phi: f64) -> Result<Self> {
        let m = NullModel {
            kind: NullKind::Ar1,
            sigma,
            phi,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid(format!("null model sigma {} must be non-negative", self.sigma)));
        }
        if self.kind == NullKind::Ar1 && !(self.phi.abs() < 1.0) {
            return Err(Error::invalid(format!("AR1 phi {} is not stationary", self.phi)));
        }
        Ok(())
    }

    /// Draws one series of `length` values from `rng`.
    pub fn sample(&self, length: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut out = Vec::with_capacity(length);
        if self.sigma == 0.0 {
            out.resize(length, 0.0);
            return out;
        }
        let mut draw = || -> f64 { StandardNormal.sample(&mut *rng) };
        match self.kind {
            NullKind::WhiteNoise => out.extend((0..length).map(|_| self.sigma * draw())),
            NullKind::Ar1 => {
                let innovation = self.sigma * (1.0 - self.phi * self.phi).sqrt();
                let mut prev = self.sigma * draw();
                for t in 0..length {
                    if t > 0 {
                        prev = self.phi * prev + innovation * draw();
                    }
                    out.push(prev);
                }
            }
        }
        out
    }
}

/// Seed of the `index`-th simulation derived from a master seed
/// (SplitMix64 finalizer), so parallel runs match sequential ones.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn simulate_null(model: &NullModel, length: usize, seed: u64) -> Result<NormalizedSeries> {
    model.validate()?;
    if length == 0 {
        return Err(Error::invalid("null simulation length must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(NormalizedSeries::from_values(model.sample(length, &mut rng)))
}

/// Two-sided 5% critical value of the standard normal.
const Z_975: f64 = 1.959_963_984_540_054;

/// Fits a white-noise or AR1 null to historical normalized series.
///
/// Each series is demeaned on its own; sigma is the pooled standard deviation
/// and the lag-one autocorrelation is pooled over all adjacent non-missing
/// pairs. AR1 is chosen when that coefficient differs from its white-noise
/// expectation (which is negative because of demeaning) at the 5% level;
/// the returned phi carries a small-sample bias correction.
pub fn fit_null(historical: &[NormalizedSeries]) -> Result<NullModel> {
    if !historical.iter().any(|s| s.present().count() >= 3) {
        return Err(Error::invalid("fitting a null model needs a series with at least 3 values"));
    }
    let (mut ss, mut lag, mut dof, mut pairs, mut obs, mut used) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    // Expected pooled lag-one numerator under white noise, in units of sigma².
    let mut null_lag = 0.0_f64;
    for s in historical {
        let n = s.present().count();
        if n < 2 {
            continue;
        }
        let mean = s.present().sum::<f64>() / n as f64;
        for (t, v) in s.values.iter().enumerate() {
            let Some(v) = v else { continue };
            ss += (v - mean).powi(2);
            if let Some(Some(prev)) = t.checked_sub(1).map(|p| s.values[p]) {
                lag += (v - mean) * (prev - mean);
                pairs += 1.0;
            }
        }
        dof += (n - 1) as f64;
        null_lag -= (n - 1) as f64 / n as f64;
        obs += n as f64;
        used += 1.0;
    }
    let sigma = (ss / dof).sqrt();
    if ss == 0.0 || pairs < 2.0 {
        return Ok(NullModel::white_noise(if ss == 0.0 { 0.0 } else { sigma }));
    }
    let r1 = lag / ss;
    let null_mean = null_lag / dof;
    if (r1 - null_mean).abs() > Z_975 / pairs.sqrt() {
        let mean_len = obs / used;
        let phi = r1 + (1.0 + 4.0 * r1) / mean_len;
        NullModel::ar1(sigma, phi.clamp(-0.99, 0.99))
    } else {
        Ok(NullModel::white_noise(sigma))
    }
}
