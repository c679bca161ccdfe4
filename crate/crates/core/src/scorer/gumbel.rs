use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const U_CLAMP: f64 = 1e-12;

/// Temperature and noise switch of the Gumbel-Softmax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelConfig {
    pub temperature: f64,
    pub noise: bool,
}

impl GumbelConfig {
    pub fn new(temperature: f64, noise: bool) -> Result<Self> {
        let cfg = Self { temperature, noise };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::Config(format!("temperature must be positive, got {}", self.temperature)));
        }
        Ok(())
    }

    pub fn inference(self) -> Self {
        Self { noise: false, ..self }
    }
}

/// Output of one Gumbel-Softmax draw, kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GumbelSample {
    pub probs: Vec<f64>,
    /// Gumbel noise added to each logit (all zero without noise).
    pub noise: Vec<f64>,
    pub temperature: f64,
}

impl GumbelSample {
    /// Gradient on the logits given the gradient on the probabilities, with
    /// the sampled noise held fixed.
    pub fn backward(&self, dprobs: &[f64]) -> Result<Vec<f64>> {
        if dprobs.len() != self.probs.len() {
            return Err(Error::LengthMismatch {
                left: dprobs.len(),
                right: self.probs.len(),
            });
        }
        let mean: f64 = self.probs.iter().zip(dprobs).map(|(p, g)| p * g).sum();
        Ok(self
            .probs
            .iter()
            .zip(dprobs)
            .map(|(p, g)| p * (g - mean) / self.temperature)
            .collect())
    }
}

/// `softmax((logits + g) / τ)` with `g` standard Gumbel noise drawn from
/// `seed` when enabled.
pub fn gumbel_softmax(logits: &[f64], cfg: &GumbelConfig, seed: u64) -> GumbelSample {
    let noise: Vec<f64> = if cfg.noise {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        logits
            .iter()
            .map(|_| {
                let u: f64 = rng.random::<f64>().clamp(U_CLAMP, 1.0 - U_CLAMP);
                -(-u.ln()).ln()
            })
            .collect()
    } else {
        vec![0.0; logits.len()]
    };
    let z: Vec<f64> = logits.iter().zip(&noise).map(|(l, g)| (l + g) / cfg.temperature).collect();
    GumbelSample {
        probs: softmax(&z),
        noise,
        temperature: cfg.temperature,
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|v| v / sum).collect()
}
