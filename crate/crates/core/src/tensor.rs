//! Truncated tensor algebra over `R^d`.
//!
//! A [`TruncatedTensorSeq`] stores levels `0..=N` of an element of the tensor
//! algebra in one contiguous buffer. Level `k` is a dense block of `d^k`
//! coefficients indexed by multi-indices `(i_1, ..., i_k)` in row-major order
//! (last index fastest). With that layout the level-`k` block of a product is
//! a sum of outer products of contiguous blocks, which is what
//! [`TruncatedTensorSeq::product`] computes.

use std::cell::Cell;
use std::fmt;

use crate::error::{Error, Result};

thread_local! {
    static PRODUCT_COUNT: Cell<u64> = const { Cell::new(0) };
}

/// Per-thread count of truncated products, used to audit the cost of the
/// sliding update against a from-scratch recompute.
pub mod product_counter {
    use super::PRODUCT_COUNT;

    /// Number of truncated products computed on this thread since the last reset.
    pub fn get() -> u64 {
        PRODUCT_COUNT.with(|c| c.get())
    }

    pub fn reset() {
        PRODUCT_COUNT.with(|c| c.set(0));
    }

    /// Runs `f` and returns its output together with the number of products it performed.
    pub fn count<T>(f: impl FnOnce() -> T) -> (T, u64) {
        let before = get();
        let out = f();
        (out, get() - before)
    }
}

/// Number of coefficients in levels `0..=order` over dimension `dim`,
/// i.e. `(d^{N+1} - 1) / (d - 1)`.
pub fn truncated_size(dim: usize, order: usize) -> usize {
    level_offset(dim, order + 1)
}

/// Offset of level `k` inside the flat buffer.
#[inline]
fn level_offset(dim: usize, k: usize) -> usize {
    let mut off = 0;
    let mut block = 1;
    for _ in 0..k {
        off += block;
        block *= dim;
    }
    off
}

/// An element of the tensor algebra truncated at order `N`.
#[derive(Clone, PartialEq)]
pub struct TruncatedTensorSeq {
    dim: usize,
    order: usize,
    data: Vec<f64>,
}

impl fmt::Debug for TruncatedTensorSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut dbg = f.debug_struct("TruncatedTensorSeq");
        dbg.field("dim", &self.dim).field("order", &self.order);
        let levels: Vec<&[f64]> = (0..=self.order).map(|k| self.level(k)).collect();
        dbg.field("levels", &levels).finish()
    }
}

impl TruncatedTensorSeq {
    /// Zero element (every level zero, including level 0).
    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Dimension(dim));
        }
        Ok(Self {
            dim,
            order,
            data: vec![0.0; truncated_size(dim, order)],
        })
    }

    /// The neutral element `(1, 0, 0, ...)`.
    pub fn neutral(dim: usize, order: usize) -> Result<Self> {
        let mut t = Self::zeros(dim, order)?;
        t.data[0] = 1.0;
        Ok(t)
    }

    /// Builds an element from explicit level blocks; block `k` must hold `dim^k` entries.
    pub fn from_levels(dim: usize, levels: &[Vec<f64>]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Shape("at least level 0 is required".into()));
        }
        let order = levels.len() - 1;
        let mut t = Self::zeros(dim, order)?;
        for (k, block) in levels.iter().enumerate() {
            let want = dim.pow(k as u32);
            if block.len() != want {
                return Err(Error::Shape(format!(
                    "level {k} has {} entries, expected {want}",
                    block.len()
                )));
            }
            t.level_mut(k).copy_from_slice(block);
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// All coefficients, level by level.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let start = level_offset(self.dim, k);
        &self.data[start..start + self.dim.pow(k as u32)]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [f64] {
        let start = level_offset(self.dim, k);
        let len = self.dim.pow(k as u32);
        &mut self.data[start..start + len]
    }

    /// Coefficient for a zero-based multi-index; the empty index is level 0.
    pub fn coeff(&self, index: &[usize]) -> f64 {
        let flat = index.iter().fold(0, |acc, &i| acc * self.dim + i);
        self.level(index.len())[flat]
    }

    pub fn is_group_element(&self) -> bool {
        self.data[0] == 1.0
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.order != other.order {
            return Err(Error::Shape(format!(
                "(dim {}, order {}) vs (dim {}, order {})",
                self.dim, self.order, other.dim, other.order
            )));
        }
        Ok(())
    }

    /// Truncated tensor product `self ⊗ other`: level `k` of the result is
    /// `sum_{l=0..=k} self_l ⊗ other_{k-l}`; orders above `N` are discarded.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self {
            dim: self.dim,
            order: self.order,
            data: vec![0.0; self.data.len()],
        };
        mul_into(self, other, &mut out);
        Ok(out)
    }

    /// Inverse in the truncated group, obtained by solving
    /// `sum_l a_l ⊗ inv_{k-l} = 0` level by level.
    pub fn group_inverse(&self) -> Result<Self> {
        if !self.is_group_element() {
            return Err(Error::NotGroupElement(self.data[0]));
        }
        let d = self.dim;
        let mut inv = Self::neutral(d, self.order)?;
        for k in 1..=self.order {
            let mut acc = vec![0.0; d.pow(k as u32)];
            for l in 1..=k {
                outer_acc(self.level(l), inv.level(k - l), &mut acc);
            }
            for (dst, v) in inv.level_mut(k).iter_mut().zip(acc) {
                *dst = -v;
            }
        }
        Ok(inv)
    }

    /// Euclidean norm of each level's coefficient block.
    pub fn level_norms(&self) -> Vec<f64> {
        (0..=self.order)
            .map(|k| self.level(k).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    /// Restriction to levels `0..=order`.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order {
            return Err(Error::Shape(format!(
                "cannot truncate order {} to higher order {order}",
                self.order
            )));
        }
        Ok(Self {
            dim: self.dim,
            order,
            data: self.data[..truncated_size(self.dim, order)].to_vec(),
        })
    }

    /// Largest level-relative deviation from `reference`:
    /// `max_k max_i |a_i - b_i| / max(1, max_j |b_j|)` with `i, j` ranging
    /// over level `k`. Coefficients in a level are compared against that
    /// level's scale, so cancellation inside a level does not inflate the
    /// error; levels below unit scale are compared absolutely.
    pub fn max_relative_error(&self, reference: &Self) -> f64 {
        assert_eq!(
            (self.dim, self.order),
            (reference.dim, reference.order),
            "max_relative_error on incompatible shapes"
        );
        (0..=self.order)
            .map(|k| {
                let b = reference.level(k);
                let scale = b.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
                self.level(k)
                    .iter()
                    .zip(b)
                    .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
                    / scale
            })
            .fold(0.0, f64::max)
    }
}

/// `acc += a ⊗ b` on row-major blocks.
#[inline]
fn outer_acc(a: &[f64], b: &[f64], acc: &mut [f64]) {
    let n = b.len();
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        let row = &mut acc[i * n..(i + 1) * n];
        for (r, &bj) in row.iter_mut().zip(b) {
            *r += ai * bj;
        }
    }
}

fn mul_into(a: &TruncatedTensorSeq, b: &TruncatedTensorSeq, out: &mut TruncatedTensorSeq) {
    PRODUCT_COUNT.with(|c| c.set(c.get() + 1));
    for k in 0..=a.order {
        let start = level_offset(a.dim, k);
        let len = a.dim.pow(k as u32);
        let dst = &mut out.data[start..start + len];
        for l in 0..=k {
            outer_acc(a.level(l), b.level(k - l), dst);
        }
    }
}
