//! Incremental signature maintenance over a sliding window.
//!
//! Each one-step slide removes the oldest segment by concatenating the
//! signature of its time-reversed copy on the left, and appends the newest
//! segment on the right:
//!
//! ```text
//! S_new = S(-u) ⊗ S_old ⊗ S(v)
//! ```
//!
//! where `u` is the oldest augmented increment and `v` the newest. That is two
//! truncated products per step instead of the `w` a recompute needs.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::signature::{
    augmented_increment, feature_len, flatten_features, segment_signature, window_signature,
    AugmentedWindow,
};
use crate::tensor::TruncatedTensorSeq;

/// Default number of slides between recomputes from the buffer.
pub const DEFAULT_REANCHOR_EVERY: u64 = 10_000;

/// Shape of a sliding engine: path dimension `d` (time channel included),
/// truncation order `N` and window length `w` in steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlidingParams {
    pub dim: usize,
    pub order: usize,
    pub window: usize,
    /// Recompute the signature from the buffer every this many slides.
    /// `None` disables re-anchoring.
    pub reanchor_every: Option<u64>,
}

impl SlidingParams {
    pub fn new(dim: usize, order: usize, window: usize) -> Self {
        Self {
            dim,
            order,
            window,
            reanchor_every: Some(DEFAULT_REANCHOR_EVERY),
        }
    }

    pub fn without_reanchoring(mut self) -> Self {
        self.reanchor_every = None;
        self
    }

    pub fn with_reanchor_every(mut self, every: u64) -> Self {
        self.reanchor_every = Some(every);
        self
    }

    pub fn time_step(&self) -> f64 {
        1.0 / self.window as f64
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Dimension(self.dim));
        }
        if self.window == 0 {
            return Err(Error::InvalidArgument(
                "window must be at least 1 step".into(),
            ));
        }
        if self.reanchor_every == Some(0) {
            return Err(Error::InvalidArgument(
                "re-anchor period must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Sliding-window signature state machine.
///
/// Holds the last `w + 1` raw covariate samples and the truncated signature of
/// their augmented path. Mutated by [`slide`](Self::slide); not shareable
/// across writers.
#[derive(Debug, Clone)]
pub struct SlidingSignatureState {
    params: SlidingParams,
    buffer: VecDeque<Vec<f64>>,
    sig: Option<TruncatedTensorSeq>,
    step: usize,
    since_anchor: u64,
    products: u64,
}

impl SlidingSignatureState {
    /// An uninitialized engine. Feed it with [`push`](Self::push) or call
    /// [`init`](Self::init) with a full window.
    pub fn new(params: SlidingParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            buffer: VecDeque::with_capacity(params.window + 1),
            sig: None,
            step: 0,
            since_anchor: 0,
            products: 0,
        })
    }

    /// Engine initialized on exactly `w + 1` samples.
    pub fn init(samples: &[Vec<f64>], params: SlidingParams) -> Result<Self> {
        let mut state = Self::new(params)?;
        if samples.len() != params.window + 1 {
            return Err(Error::WindowLength {
                expected: params.window + 1,
                got: samples.len(),
            });
        }
        for s in samples {
            state.check_sample(s)?;
            state.buffer.push_back(s.clone());
        }
        state.recompute()?;
        state.step = params.window;
        Ok(state)
    }

    pub fn params(&self) -> &SlidingParams {
        &self.params
    }

    pub fn is_initialized(&self) -> bool {
        self.sig.is_some()
    }

    /// Signature of the current window.
    pub fn signature(&self) -> Option<&TruncatedTensorSeq> {
        self.sig.as_ref()
    }

    /// Position `t` of the window's right edge (zero-based sample index).
    pub fn step(&self) -> usize {
        self.step
    }

    /// Truncated products performed by incremental updates (re-anchors and
    /// the initial fold excluded).
    pub fn update_products(&self) -> u64 {
        self.products
    }

    /// Buffered samples, oldest first.
    pub fn buffer(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.buffer.iter().map(Vec::as_slice)
    }

    /// The current buffer as a window with the engine's time step.
    pub fn window(&self) -> Result<AugmentedWindow> {
        let samples: Vec<Vec<f64>> = self.buffer.iter().cloned().collect();
        AugmentedWindow::with_time_step(&samples, self.params.time_step())
    }

    fn check_sample(&self, sample: &[f64]) -> Result<()> {
        if sample.len() + 1 != self.params.dim {
            return Err(Error::Shape(format!(
                "sample has {} covariates, engine expects {}",
                sample.len(),
                self.params.dim - 1
            )));
        }
        if sample.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("covariate sample"));
        }
        Ok(())
    }

    fn recompute(&mut self) -> Result<()> {
        self.sig = Some(window_signature(&self.window()?, self.params.order)?);
        self.since_anchor = 0;
        Ok(())
    }

    /// Appends a sample. Before the window is full the sample is only
    /// buffered; the call that completes it initializes the signature, and
    /// every later call slides. Returns whether a signature is available.
    pub fn push(&mut self, sample: &[f64]) -> Result<bool> {
        if self.is_initialized() {
            self.slide(sample)?;
            return Ok(true);
        }
        self.check_sample(sample)?;
        self.buffer.push_back(sample.to_vec());
        if self.buffer.len() == self.params.window + 1 {
            self.recompute()?;
            self.step = self.params.window;
            return Ok(true);
        }
        self.step = self.buffer.len() - 1;
        Ok(false)
    }

    /// Advances the window by one step.
    pub fn slide(&mut self, new_sample: &[f64]) -> Result<()> {
        let Some(sig) = self.sig.as_ref() else {
            return Err(Error::InvalidArgument(
                "sliding engine is not initialized".into(),
            ));
        };
        self.check_sample(new_sample)?;
        let dt = self.params.time_step();
        let order = self.params.order;

        let oldest = augmented_increment(&self.buffer[0], &self.buffer[1], dt);
        let reversed: Vec<f64> = oldest.iter().map(|x| -x).collect();
        let newest = augmented_increment(&self.buffer[self.params.window], new_sample, dt);

        let updated = segment_signature(&reversed, order)?
            .product(sig)?
            .product(&segment_signature(&newest, order)?)?;
        self.products += 2;

        self.buffer.pop_front();
        self.buffer.push_back(new_sample.to_vec());
        self.sig = Some(updated);
        self.step += 1;
        self.since_anchor += 1;

        if let Some(every) = self.params.reanchor_every {
            if self.since_anchor >= every {
                self.recompute()?;
            }
        }
        Ok(())
    }

    /// Inverse of [`slide`](Self::slide): puts `previous_oldest` back at the
    /// front and drops the newest sample, which is returned.
    pub fn unslide(&mut self, previous_oldest: &[f64]) -> Result<Vec<f64>> {
        let Some(sig) = self.sig.as_ref() else {
            return Err(Error::InvalidArgument(
                "sliding engine is not initialized".into(),
            ));
        };
        self.check_sample(previous_oldest)?;
        let dt = self.params.time_step();
        let order = self.params.order;
        let w = self.params.window;

        let restored = augmented_increment(previous_oldest, &self.buffer[0], dt);
        let newest = augmented_increment(&self.buffer[w - 1], &self.buffer[w], dt);
        let reversed: Vec<f64> = newest.iter().map(|x| -x).collect();

        let updated = segment_signature(&restored, order)?
            .product(sig)?
            .product(&segment_signature(&reversed, order)?)?;
        self.products += 2;

        let dropped = self.buffer.pop_back().expect("buffer holds w + 1 samples");
        self.buffer.push_front(previous_oldest.to_vec());
        self.sig = Some(updated);
        self.step -= 1;
        Ok(dropped)
    }

    /// Feature vector of the current window (time-only and constant terms dropped).
    pub fn current_features(&self) -> Result<Vec<f64>> {
        self.sig
            .as_ref()
            .map(flatten_features)
            .ok_or_else(|| Error::InvalidArgument("sliding engine is not initialized".into()))
    }

    pub fn feature_len(&self) -> usize {
        feature_len(self.params.dim, self.params.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::segment_signature;

    fn samples(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|v| vec![*v]).collect()
    }

    #[test]
    fn init_two_segments() {
        let p = SlidingParams::new(2, 2, 2);
        let st = SlidingSignatureState::init(&samples(&[0.0, 1.0, 3.0]), p).unwrap();
        let expected = segment_signature(&[0.5, 1.0], 2)
            .unwrap()
            .product(&segment_signature(&[0.5, 2.0], 2).unwrap())
            .unwrap();
        assert!(st.signature().unwrap().max_relative_error(&expected) < 1e-15);
        assert_eq!(st.step(), 2);
    }

    #[test]
    fn init_wrong_count() {
        let p = SlidingParams::new(2, 2, 3);
        assert!(matches!(
            SlidingSignatureState::init(&samples(&[0.0, 1.0]), p),
            Err(Error::WindowLength {
                expected: 4,
                got: 2
            })
        ));
    }

    #[test]
    fn slide_requires_init() {
        let mut st = SlidingSignatureState::new(SlidingParams::new(2, 2, 3)).unwrap();
        assert!(st.slide(&[1.0]).is_err());
        assert!(st.current_features().is_err());
    }

    #[test]
    fn constant_series_never_changes() {
        let p = SlidingParams::new(2, 4, 5);
        let mut st = SlidingSignatureState::init(&samples(&[2.0; 6]), p).unwrap();
        let first = st.signature().unwrap().clone();
        for _ in 0..50 {
            st.slide(&[2.0]).unwrap();
            assert!(st.signature().unwrap().max_relative_error(&first) < 1e-13);
            assert!(st
                .current_features()
                .unwrap()
                .iter()
                .all(|x| x.abs() < 1e-13));
        }
    }

    #[test]
    fn push_fills_then_slides() {
        let p = SlidingParams::new(2, 3, 3);
        let mut st = SlidingSignatureState::new(p).unwrap();
        let xs = [0.0, 1.0, -1.0, 2.0, 0.5, 0.25];
        let mut ready = Vec::new();
        for x in xs {
            ready.push(st.push(&[x]).unwrap());
        }
        assert_eq!(ready, vec![false, false, false, true, true, true]);
        assert_eq!(st.step(), 5);
        assert_eq!(st.update_products(), 4);
        let direct = window_signature(&st.window().unwrap(), 3).unwrap();
        assert!(st.signature().unwrap().max_relative_error(&direct) < 1e-13);
    }

    #[test]
    fn reanchoring_recomputes() {
        let p = SlidingParams::new(2, 3, 4).with_reanchor_every(3);
        let mut st = SlidingSignatureState::init(&samples(&[0.0, 1.0, 0.0, 1.0, 0.0]), p).unwrap();
        for x in [0.3, 0.7, -0.2] {
            st.slide(&[x]).unwrap();
        }
        // Right after a re-anchor the state equals the fold bit-for-bit.
        let direct = window_signature(&st.window().unwrap(), 3).unwrap();
        assert_eq!(st.signature().unwrap(), &direct);
    }

    #[test]
    fn rejects_bad_samples() {
        let p = SlidingParams::new(3, 2, 2);
        let mut st = SlidingSignatureState::new(p).unwrap();
        assert!(st.push(&[1.0]).is_err());
        assert!(st.push(&[1.0, f64::NAN]).is_err());
        assert!(SlidingSignatureState::new(SlidingParams::new(2, 2, 0)).is_err());
    }
}
