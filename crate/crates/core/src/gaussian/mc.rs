use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::example::{truncated_square_loss, ExampleConfig, GenEstimate};
use crate::error::{Error, Result};

/// Monte Carlo sample size and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSpec {
    pub n_samples: u64,
    pub seed: u64,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec { n_samples: 1_000_000, seed: 0 }
    }
}

impl McSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1_000 {
            return Err(Error::InvalidConfig(format!("n_samples = {} is below 1000", self.n_samples)));
        }
        Ok(())
    }
}

const BATCH: u64 = 1 << 14;

#[derive(Clone, Copy)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Monte Carlo estimate of the generalization error of the truncated loss.
///
/// Each draw takes `(Z_1, Z_2)`, forms `W`, and an independent copy `W'` from
/// a fresh pair; the summand is `loss(W', Z_1) - (loss(W, Z_1) + loss(W, Z_2)) / 2`.
/// Batch `b` draws from ChaCha8 stream `b` under `seed`, and batches are
/// merged in index order, so the result is independent of scheduling.
pub fn true_gen_mc(cfg: &ExampleConfig, mc: &McSpec) -> Result<GenEstimate> {
    mc.validate()?;
    let batches = mc.n_samples.div_ceil(BATCH);
    let (t, s, beta, c) = (cfg.t, cfg.sigma, cfg.beta, cfg.c);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(b);
            let size = BATCH.min(mc.n_samples - b * BATCH);
            let mut m = Moments { count: 0.0, mean: 0.0, m2: 0.0 };
            for _ in 0..size {
                let mut draw = || -> f64 {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    beta + s * n
                };
                let (z1, z2, y1, y2) = (draw(), draw(), draw(), draw());
                let w = t * z1 + (1.0 - t) * z2;
                let w_indep = t * y1 + (1.0 - t) * y2;
                let x = truncated_square_loss(w_indep, z1, c)
                    - 0.5 * (truncated_square_loss(w, z1, c) + truncated_square_loss(w, z2, c));
                m.count += 1.0;
                let delta = x - m.mean;
                m.mean += delta / m.count;
                m.m2 += delta * (x - m.mean);
            }
            m
        })
        .collect();
    let total = parts
        .into_iter()
        .fold(Moments { count: 0.0, mean: 0.0, m2: 0.0 }, Moments::merge);
    let var = total.m2 / (total.count - 1.0);
    Ok(GenEstimate { value: total.mean, ci_halfwidth: 1.96 * (var / total.count).sqrt() })
}
