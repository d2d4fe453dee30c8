//! Bulk operations over flat arrays.
//!
//! This is the small vocabulary the flattened construction is written in:
//! scans, reductions, scatters, histograms and segment bookkeeping. Every
//! operation is a pure function of its inputs. Sizes, offsets and indices are
//! `i64` so that negative inputs can be reported rather than silently wrapped.

use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrimError {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("index {index} out of bounds for length {len}")]
    OutOfBounds { index: i64, len: usize },
    #[error("negative count {0}")]
    NegativeCount(i64),
    #[error("integer overflow")]
    Overflow,
}

/// Per-segment sizes of a flattened irregular array.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Shape {
    sizes: Vec<i64>,
}

impl Shape {
    pub fn new(sizes: Vec<i64>) -> Result<Self, PrimError> {
        if let Some(&bad) = sizes.iter().find(|&&s| s < 0) {
            return Err(PrimError::NegativeCount(bad));
        }
        Ok(Shape { sizes })
    }

    pub fn sizes(&self) -> &[i64] {
        &self.sizes
    }

    pub fn segments(&self) -> usize {
        self.sizes.len()
    }

    /// Length of the flat array this shape describes.
    pub fn flat_len(&self) -> Result<i64, PrimError> {
        sum(&self.sizes)
    }

    /// Start of each segment in the flat array.
    pub fn offsets(&self) -> Vec<i64> {
        presum(&self.sizes)
    }

    /// The shape of the squared-size segments used by level-two tables.
    pub fn squared(&self) -> Shape {
        Shape {
            sizes: self.sizes.iter().map(|s| s * s).collect(),
        }
    }

    pub fn into_sizes(self) -> Vec<i64> {
        self.sizes
    }
}

impl TryFrom<Vec<i64>> for Shape {
    type Error = PrimError;

    fn try_from(sizes: Vec<i64>) -> Result<Self, Self::Error> {
        Shape::new(sizes)
    }
}

/// Exclusive prefix sum: `result[0] == 0` and `result[i] == xs[0] + .. + xs[i - 1]`.
pub fn presum(xs: &[i64]) -> Vec<i64> {
    let mut acc = 0i64;
    xs.iter()
        .map(|&x| {
            let start = acc;
            acc += x;
            start
        })
        .collect()
}

pub fn sum(xs: &[i64]) -> Result<i64, PrimError> {
    xs.iter()
        .try_fold(0i64, |acc, &x| acc.checked_add(x))
        .ok_or(PrimError::Overflow)
}

pub fn or_all(xs: &[bool]) -> bool {
    xs.iter().any(|&b| b)
}

/// Disjunction of each segment's flags, one result per segment.
pub fn seg_reduce_or(shape: &Shape, flags: &[bool]) -> Result<Vec<bool>, PrimError> {
    let flat = shape.flat_len()?;
    if flat as usize != flags.len() {
        return Err(PrimError::LengthMismatch {
            expected: flat as usize,
            actual: flags.len(),
        });
    }
    let mut start = 0usize;
    Ok(shape
        .sizes()
        .iter()
        .map(|&size| {
            let end = start + size as usize;
            let any = or_all(&flags[start..end]);
            start = end;
            any
        })
        .collect())
}

pub fn rep<T: Clone>(n: i64, x: T) -> Result<Vec<T>, PrimError> {
    if n < 0 {
        return Err(PrimError::NegativeCount(n));
    }
    Ok(vec![x; n as usize])
}

/// How many elements ahead indexed loops issue prefetches.
pub(crate) const AHEAD: usize = 16;

/// Hints that `p` will be read soon.
#[inline(always)]
pub(crate) fn prefetch<T>(p: &T) {
    #[cfg(target_arch = "x86_64")]
    // SAFETY: prefetching is a hint; it never faults or changes memory.
    #[allow(unused_unsafe)]
    unsafe {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        _mm_prefetch::<_MM_HINT_T0>(p as *const T as *const i8);
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = p;
}

/// Prefetches `xs[is[j]]`, ignoring positions or indices out of range.
#[inline(always)]
pub(crate) fn prefetch_at<T>(xs: &[T], is: &[i64], j: usize) {
    if let Some(x) = is.get(j).and_then(|&i| xs.get(i as usize)) {
        prefetch(x);
    }
}

fn check_index(index: i64, len: usize) -> Result<usize, PrimError> {
    if index < 0 || index as usize >= len {
        Err(PrimError::OutOfBounds { index, len })
    } else {
        Ok(index as usize)
    }
}

/// Copy of `dest` with `dest[is[j]] = vs[j]`. With repeated indices the value
/// latest in `vs` wins.
pub fn scatter<T: Clone>(dest: &[T], is: &[i64], vs: &[T]) -> Result<Vec<T>, PrimError> {
    let mut out = dest.to_vec();
    scatter_into(&mut out, is, vs.iter().cloned())?;
    Ok(out)
}

/// In-place form of [`scatter`]. On error `dest` may be partially written.
pub fn scatter_into<T>(dest: &mut [T], is: &[i64], vs: impl IntoIterator<Item = T>) -> Result<(), PrimError> {
    let mut count = 0usize;
    for (j, (&i, v)) in is.iter().zip(vs).enumerate() {
        prefetch_at(dest, is, j + AHEAD);
        let i = check_index(i, dest.len())?;
        dest[i] = v;
        count += 1;
    }
    if count != is.len() {
        return Err(PrimError::LengthMismatch {
            expected: is.len(),
            actual: count,
        });
    }
    Ok(())
}

/// Stable sort under a caller-supplied total order.
pub fn stable_sort_by<T>(mut xs: Vec<T>, cmp: impl FnMut(&T, &T) -> Ordering) -> Vec<T> {
    // slice::sort_by is a stable merge sort
    xs.sort_by(cmp);
    xs
}

/// Sort pairs by their integer tag and drop the tag.
pub fn sort_by_tag<T>(xs: Vec<(i64, T)>) -> Vec<T> {
    stable_sort_by(xs, |a, b| a.0.cmp(&b.0))
        .into_iter()
        .map(|(_, x)| x)
        .collect()
}

/// Group `xs` into `m` buckets by `is`, preserving input order within a group.
pub fn groupby<T: Clone>(m: i64, is: &[i64], xs: &[T]) -> Result<Vec<Vec<T>>, PrimError> {
    if m < 0 {
        return Err(PrimError::NegativeCount(m));
    }
    if is.len() != xs.len() {
        return Err(PrimError::LengthMismatch {
            expected: is.len(),
            actual: xs.len(),
        });
    }
    let mut groups = vec![Vec::new(); m as usize];
    for (&g, x) in is.iter().zip(xs) {
        let g = check_index(g, m as usize)?;
        groups[g].push(x.clone());
    }
    Ok(groups)
}

/// Histogram over `n` zero-initialised bins, summing `vs[j]` into bin `is[j]`.
pub fn hist(n: i64, is: &[i64], vs: &[i64]) -> Result<Vec<i64>, PrimError> {
    if n < 0 {
        return Err(PrimError::NegativeCount(n));
    }
    if is.len() != vs.len() {
        return Err(PrimError::LengthMismatch {
            expected: is.len(),
            actual: vs.len(),
        });
    }
    let mut bins = vec![0i64; n as usize];
    for (j, (&b, &v)) in is.iter().zip(vs).enumerate() {
        prefetch_at(&bins, is, j + AHEAD);
        let b = check_index(b, bins.len())?;
        bins[b] += v;
    }
    Ok(bins)
}

/// Histogram of unit weights; `hist(n, is, rep(is.len(), 1))` without the ones.
pub fn hist_ones(n: i64, is: &[i64]) -> Result<Vec<i64>, PrimError> {
    if n < 0 {
        return Err(PrimError::NegativeCount(n));
    }
    let mut bins = vec![0i64; n as usize];
    for (j, &b) in is.iter().enumerate() {
        prefetch_at(&bins, is, j + AHEAD);
        let b = check_index(b, bins.len())?;
        bins[b] += 1;
    }
    Ok(bins)
}

/// For each of `n` bins, whether it receives more than one index. Same as
/// `hist_ones(n, is)` followed by `> 1`, with byte-sized saturating counts.
pub fn crowded(n: i64, is: &[i64]) -> Result<Vec<bool>, PrimError> {
    if n < 0 {
        return Err(PrimError::NegativeCount(n));
    }
    let mut bins = vec![0u8; n as usize];
    for (j, &b) in is.iter().enumerate() {
        prefetch_at(&bins, is, j + AHEAD);
        let b = check_index(b, bins.len())?;
        bins[b] = bins[b].saturating_add(1);
    }
    Ok(bins.into_iter().map(|c| c > 1).collect())
}

/// Replicated iota: segment index `i` repeated `counts[i]` times.
pub fn repiota(counts: &[i64]) -> Result<Vec<i64>, PrimError> {
    let total = sum(counts)?;
    if let Some(&bad) = counts.iter().find(|&&c| c < 0) {
        return Err(PrimError::NegativeCount(bad));
    }
    let mut out = Vec::with_capacity(total as usize);
    for (i, &c) in counts.iter().enumerate() {
        out.extend(std::iter::repeat_n(i as i64, c as usize));
    }
    Ok(out)
}

/// Split into (satisfying, not satisfying), both in input order.
pub fn partition<T>(xs: Vec<T>, p: impl FnMut(&T) -> bool) -> (Vec<T>, Vec<T>) {
    xs.into_iter().partition(p)
}

pub fn filter<T>(xs: Vec<T>, mut p: impl FnMut(&T) -> bool) -> Vec<T> {
    xs.into_iter().filter(|x| p(x)).collect()
}
