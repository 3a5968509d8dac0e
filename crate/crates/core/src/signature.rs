//! Signatures of time-augmented piecewise-linear paths.
//!
//! Channel 0 of every path is rescaled time; channels `1..d` carry the raw
//! covariates. A window of `w + 1` samples is the linear interpolation of the
//! points `(j / w, X_{t-w+j})`, so each segment has time increment `1 / w` and
//! the whole window spans unit time.

use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::{truncated_size, TruncatedTensorSeq};

/// Signature of a single linear segment with the given increment:
/// level `k` is `increment^{⊗k} / k!`.
pub fn segment_signature(increment: &[f64], order: usize) -> Result<TruncatedTensorSeq> {
    let d = increment.len();
    let mut sig = TruncatedTensorSeq::neutral(d, order)?;
    let mut prev = vec![1.0];
    for k in 1..=order {
        let mut next = Vec::with_capacity(prev.len() * d);
        let inv_k = 1.0 / k as f64;
        for &p in &prev {
            for &v in increment {
                next.push(p * v * inv_k);
            }
        }
        sig.level_mut(k).copy_from_slice(&next);
        prev = next;
    }
    Ok(sig)
}

/// Augmented increment `(dt, next - prev)` between two covariate samples.
pub fn augmented_increment(prev: &[f64], next: &[f64], dt: f64) -> Vec<f64> {
    debug_assert_eq!(prev.len(), next.len());
    let mut inc = Vec::with_capacity(prev.len() + 1);
    inc.push(dt);
    inc.extend(next.iter().zip(prev).map(|(n, p)| n - p));
    inc
}

/// A window of consecutive covariate samples with an implicit time channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedWindow {
    covariate_dim: usize,
    samples: Vec<f64>,
    time_step: f64,
}

impl AugmentedWindow {
    /// Window over `samples`, each of the same covariate dimension, with time
    /// step `1 / (samples.len() - 1)`.
    pub fn new(samples: &[Vec<f64>]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::WindowLength {
                expected: 2,
                got: samples.len(),
            });
        }
        let dt = 1.0 / (samples.len() - 1) as f64;
        Self::with_time_step(samples, dt)
    }

    /// Window with an explicit per-step time increment. Used for sub-windows
    /// that keep the time scale of an enclosing window.
    pub fn with_time_step(samples: &[Vec<f64>], time_step: f64) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::WindowLength {
                expected: 2,
                got: 0,
            });
        };
        let c = first.len();
        if c == 0 {
            return Err(Error::Shape("covariate samples must be non-empty".into()));
        }
        let mut flat = Vec::with_capacity(samples.len() * c);
        for (j, s) in samples.iter().enumerate() {
            if s.len() != c {
                return Err(Error::Shape(format!(
                    "sample {j} has {} covariates, expected {c}",
                    s.len()
                )));
            }
            flat.extend_from_slice(s);
        }
        Self::from_flat(c, flat, time_step)
    }

    /// Window from row-major samples of `covariate_dim` values each.
    pub fn from_flat(covariate_dim: usize, samples: Vec<f64>, time_step: f64) -> Result<Self> {
        if covariate_dim == 0 || !samples.len().is_multiple_of(covariate_dim) {
            return Err(Error::Shape(format!(
                "{} values do not split into samples of {covariate_dim}",
                samples.len()
            )));
        }
        if !time_step.is_finite() || time_step <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {time_step}"
            )));
        }
        Ok(Self {
            covariate_dim,
            samples,
            time_step,
        })
    }

    /// Path dimension including the time channel.
    pub fn dim(&self) -> usize {
        self.covariate_dim + 1
    }

    pub fn num_samples(&self) -> usize {
        self.samples.len() / self.covariate_dim
    }

    /// Number of linear segments (`w`).
    pub fn window_len(&self) -> usize {
        self.num_samples().saturating_sub(1)
    }

    pub fn time_step(&self) -> f64 {
        self.time_step
    }

    pub fn sample(&self, j: usize) -> &[f64] {
        &self.samples[j * self.covariate_dim..(j + 1) * self.covariate_dim]
    }

    /// Augmented increments of every segment, oldest first.
    pub fn increments(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.window_len())
            .map(move |j| augmented_increment(self.sample(j), self.sample(j + 1), self.time_step))
    }
}

/// Truncated signature of the window's piecewise-linear path: a left-to-right
/// fold of truncated products of segment signatures, starting from the neutral
/// element (one product per segment).
pub fn window_signature(window: &AugmentedWindow, order: usize) -> Result<TruncatedTensorSeq> {
    if window.window_len() == 0 {
        return Err(Error::WindowLength {
            expected: 2,
            got: window.num_samples(),
        });
    }
    let mut sig = TruncatedTensorSeq::neutral(window.dim(), order)?;
    for inc in window.increments() {
        sig = sig.product(&segment_signature(&inc, order)?)?;
    }
    Ok(sig)
}

/// A word over the path channels, stored zero-based. Displayed one-based,
/// e.g. `(1,2)`, with channel 1 being time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn from_one_based(idx: &[usize]) -> Self {
        Self(idx.iter().map(|i| i - 1).collect())
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str(")")
    }
}

/// Number of retained features: `s_d(N) - 1 - N`.
pub fn feature_len(dim: usize, order: usize) -> usize {
    truncated_size(dim, order) - 1 - order
}

/// Multi-indices of the retained features, by length then lexicographically.
/// The empty word and the time-only words `(1)`, `(1,1)`, ... are excluded.
pub fn feature_indices(dim: usize, order: usize) -> Result<Vec<MultiIndex>> {
    if dim < 2 {
        return Err(Error::Dimension(dim));
    }
    let mut out = Vec::with_capacity(feature_len(dim, order));
    for k in 1..=order {
        // Row-major order within a level is lexicographic; flat index 0 is the
        // time-only word.
        for flat in 1..dim.pow(k as u32) {
            let mut word = vec![0; k];
            let mut rem = flat;
            for slot in word.iter_mut().rev() {
                *slot = rem % dim;
                rem /= dim;
            }
            out.push(MultiIndex(word));
        }
    }
    Ok(out)
}

/// Flattens a signature into the feature vector laid out as [`feature_indices`].
pub fn flatten_features(sig: &TruncatedTensorSeq) -> Vec<f64> {
    let mut out = Vec::with_capacity(feature_len(sig.dim(), sig.order()));
    flatten_features_into(sig, &mut out);
    out
}

pub(crate) fn flatten_features_into(sig: &TruncatedTensorSeq, out: &mut Vec<f64>) {
    for k in 1..=sig.order() {
        out.extend_from_slice(&sig.level(k)[1..]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(words: &[&[usize]]) -> Vec<MultiIndex> {
        words
            .iter()
            .map(|w| MultiIndex::from_one_based(w))
            .collect()
    }

    #[test]
    fn zero_segment_is_neutral() {
        for n in 0..4 {
            let s = segment_signature(&[0.0, 0.0, 0.0], n).unwrap();
            assert_eq!(s, TruncatedTensorSeq::neutral(3, n).unwrap());
        }
    }

    #[test]
    fn segment_levels() {
        let s = segment_signature(&[1.0, 2.0], 2).unwrap();
        assert_eq!(s.level(1), &[1.0, 2.0]);
        assert_eq!(s.level(2), &[0.5, 1.0, 1.0, 2.0]);

        let s = segment_signature(&[2.0, 0.0, 0.0], 3).unwrap();
        assert_eq!(s.coeff(&[0]), 2.0);
        assert_eq!(s.coeff(&[0, 0]), 2.0);
        assert!((s.coeff(&[0, 0, 0]) - 4.0 / 3.0).abs() < 1e-15);
        let nonzero = s.as_slice().iter().filter(|x| **x != 0.0).count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn constant_window_is_straight_time_line() {
        let w = AugmentedWindow::new(&[vec![3.0], vec![3.0], vec![3.0]]).unwrap();
        let sig = window_signature(&w, 2).unwrap();
        let line = segment_signature(&[1.0, 0.0], 2).unwrap();
        assert!(sig.max_relative_error(&line) < 1e-15);
        assert_eq!(sig.coeff(&[0]), 1.0);
        assert_eq!(sig.coeff(&[0, 0]), 0.5);
    }

    #[test]
    fn proportional_segments_merge() {
        // Increments (0.5, 1) and (0.5, 1): the same direction.
        let w = AugmentedWindow::new(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let sig = window_signature(&w, 4).unwrap();
        let merged = segment_signature(&[1.0, 2.0], 4).unwrap();
        assert!(sig.max_relative_error(&merged) < 1e-14);
    }

    #[test]
    fn empty_window_rejected() {
        assert!(AugmentedWindow::new(&[vec![1.0]]).is_err());
        assert!(AugmentedWindow::new(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn feature_index_lists() {
        assert_eq!(
            feature_indices(2, 2).unwrap(),
            idx(&[&[2], &[1, 2], &[2, 1], &[2, 2]])
        );
        assert_eq!(feature_indices(2, 1).unwrap(), idx(&[&[2]]));
        let d3 = feature_indices(3, 2).unwrap();
        assert_eq!(d3.len(), 10);
        assert_eq!(&d3[..3], &idx(&[&[2], &[3], &[1, 2]])[..]);
        assert_eq!(feature_len(3, 2), 10);
        assert_eq!(feature_len(2, 4), 31 - 1 - 4);
    }

    #[test]
    fn multi_index_display() {
        assert_eq!(
            MultiIndex::from_one_based(&[1, 2, 2]).to_string(),
            "(1,2,2)"
        );
    }

    #[test]
    fn flatten_examples() {
        let n = TruncatedTensorSeq::neutral(2, 3).unwrap();
        assert!(flatten_features(&n).iter().all(|x| *x == 0.0));

        let w = AugmentedWindow::new(&[vec![1.0], vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let f = flatten_features(&window_signature(&w, 3).unwrap());
        assert_eq!(f.len(), feature_len(2, 3));
        assert!(f.iter().all(|x| *x == 0.0));

        let s = segment_signature(&[1.0, 2.0], 2).unwrap();
        assert_eq!(flatten_features(&s), vec![2.0, 1.0, 1.0, 2.0]);
    }
}
