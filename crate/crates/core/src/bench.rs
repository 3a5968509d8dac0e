//! Incremental sliding update versus per-window recomputation.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::signature::{window_signature, AugmentedWindow};
use crate::sliding::{SlidingParams, SlidingSignatureState};
use crate::tensor::{product_counter, TruncatedTensorSeq};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub dim: usize,
    pub order: usize,
    pub window: usize,
    pub slides: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            order: 4,
            window: 432,
            slides: 5000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub incremental_seconds: f64,
    pub naive_seconds: f64,
    pub incremental_products: u64,
    pub naive_products: u64,
    /// Level-relative difference between the two final signatures.
    pub final_relative_error: f64,
}

impl BenchReport {
    pub fn speedup(&self) -> f64 {
        self.naive_seconds / self.incremental_seconds
    }

    pub fn incremental_products_per_slide(&self) -> f64 {
        self.incremental_products as f64 / self.config.slides as f64
    }

    pub fn naive_products_per_slide(&self) -> f64 {
        self.naive_products as f64 / self.config.slides as f64
    }
}

/// Gaussian random walk with `covariate_dim` channels, row-major.
pub fn random_walk(len: usize, covariate_dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = vec![0.0; covariate_dim];
    (0..len)
        .map(|_| {
            for p in pos.iter_mut() {
                *p += rng.sample::<f64, _>(StandardNormal);
            }
            pos.clone()
        })
        .collect()
}

/// Times `slides` one-step updates of the sliding engine (re-anchoring off)
/// against recomputing each of the same windows from scratch, counting
/// truncated products on both sides.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    if config.slides == 0 {
        return Err(Error::InvalidArgument(
            "benchmark needs at least one slide".into(),
        ));
    }
    let w = config.window;
    let stream = random_walk(w + 1 + config.slides, config.dim - 1, config.seed);
    let params = SlidingParams::new(config.dim, config.order, w).without_reanchoring();

    let mut engine = SlidingSignatureState::init(&stream[..=w], params)?;
    let start = Instant::now();
    let (res, incremental_products) = product_counter::count(|| -> Result<()> {
        for sample in &stream[w + 1..] {
            engine.slide(sample)?;
        }
        Ok(())
    });
    res?;
    let incremental_seconds = start.elapsed().as_secs_f64();

    let dt = params.time_step();
    let start = Instant::now();
    let (last, naive_products) =
        product_counter::count(|| -> Result<Option<TruncatedTensorSeq>> {
            let mut last = None;
            for s in 1..=config.slides {
                let window = AugmentedWindow::with_time_step(&stream[s..=s + w], dt)?;
                last = Some(window_signature(&window, config.order)?);
            }
            Ok(last)
        });
    let last = last?.expect("at least one slide");
    let naive_seconds = start.elapsed().as_secs_f64();

    let final_relative_error = engine
        .signature()
        .expect("engine initialized")
        .max_relative_error(&last);
    Ok(BenchReport {
        config: config.clone(),
        incremental_seconds,
        naive_seconds,
        incremental_products,
        naive_products,
        final_relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_products() {
        let report = run_bench(&BenchConfig {
            window: 20,
            slides: 30,
            ..BenchConfig::default()
        })
        .unwrap();
        assert_eq!(report.incremental_products, 60);
        assert_eq!(report.naive_products, 600);
        assert!(report.final_relative_error < 1e-11);
    }

    #[test]
    fn walk_is_seeded() {
        assert_eq!(random_walk(5, 2, 3), random_walk(5, 2, 3));
        assert_ne!(random_walk(5, 2, 3), random_walk(5, 2, 4));
    }
}
