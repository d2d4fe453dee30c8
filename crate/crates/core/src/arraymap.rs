//! Comparison-based baseline maps: a sorted array searched by bisection, and
//! the same keys in Eytzinger (breadth-first) order.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::fmt;

use crate::hashmap::{dedup_first, Ctx};
use crate::keys::KeySpec;
use crate::prims;
use crate::StaticMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layout {
    Sorted,
    Eytzinger,
}

pub struct ArrayMap<K: KeySpec, V> {
    ctx: Ctx<K>,
    keys: Vec<K::Key>,
    vals: Vec<V>,
    layout: Layout,
}

impl<K: KeySpec, V> ArrayMap<K, V> {
    /// Sorts and deduplicates (first value wins). Empty input gives an empty map.
    pub fn from_array(ctx: Ctx<K>, kvs: Vec<(K::Key, V)>, layout: Layout) -> Self {
        let kvs = dedup_first::<K, V>(ctx.borrow(), kvs);
        Self::from_array_nodup(ctx, kvs, layout)
    }

    /// Sorts without checking for repeated keys.
    pub fn from_array_nodup(ctx: Ctx<K>, kvs: Vec<(K::Key, V)>, layout: Layout) -> Self {
        let sorted = prims::stable_sort_by(kvs, |a, b| K::compare((ctx.borrow(), &a.0), (ctx.borrow(), &b.0)));
        let (keys, vals): (Vec<_>, Vec<_>) = match layout {
            Layout::Sorted => sorted.into_iter().unzip(),
            Layout::Eytzinger => eytzinger(sorted).into_iter().unzip(),
        };
        ArrayMap {
            ctx,
            keys,
            vals,
            layout,
        }
    }

    #[inline]
    fn index_of(&self, needle_ctx: &K::Ctx, k: &K::Key) -> Option<usize> {
        let map_ctx = self.ctx.borrow();
        let cmp = |x: &K::Key| K::compare((map_ctx, x), (needle_ctx, k));
        let i = match self.layout {
            Layout::Sorted => binary_search(&self.keys, cmp),
            Layout::Eytzinger => eytzinger_search(&self.keys, cmp),
        };
        (i >= 0).then_some(i as usize)
    }

    pub fn lookup(&self, needle_ctx: &K::Ctx, k: &K::Key) -> Option<&V> {
        self.index_of(needle_ctx, k).map(|i| &self.vals[i])
    }

    pub fn member(&self, needle_ctx: &K::Ctx, k: &K::Key) -> bool {
        self.index_of(needle_ctx, k).is_some()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Keys in storage order (sorted, or breadth-first for Eytzinger).
    pub fn keys(&self) -> &[K::Key] {
        &self.keys
    }

    pub fn values(&self) -> &[V] {
        &self.vals
    }

    pub fn ctx(&self) -> &K::Ctx {
        self.ctx.borrow()
    }
}

impl<K: KeySpec, V> StaticMap<K, V> for ArrayMap<K, V> {
    fn lookup(&self, needle_ctx: &K::Ctx, k: &K::Key) -> Option<&V> {
        ArrayMap::lookup(self, needle_ctx, k)
    }

    fn member(&self, needle_ctx: &K::Ctx, k: &K::Key) -> bool {
        ArrayMap::member(self, needle_ctx, k)
    }

    fn len(&self) -> usize {
        self.keys.len()
    }
}

impl<K: KeySpec, V> fmt::Debug for ArrayMap<K, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArrayMap")
            .field("len", &self.keys.len())
            .field("layout", &self.layout)
            .finish()
    }
}

/// Index of the element comparing `Equal` in a sorted array, or -1.
///
/// `cmp(x)` orders the stored element `x` against the needle.
pub fn binary_search<T>(keys: &[T], mut cmp: impl FnMut(&T) -> Ordering) -> i64 {
    let (mut lo, mut hi) = (0usize, keys.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match cmp(&keys[mid]) {
            Ordering::Less => lo = mid + 1,
            Ordering::Greater => hi = mid,
            Ordering::Equal => return mid as i64,
        }
    }
    -1
}

/// Rearranges a sorted sequence into breadth-first order of its implicit
/// search tree, where node `i` has children `2i + 1` and `2i + 2`.
pub fn eytzinger<T>(sorted: Vec<T>) -> Vec<T> {
    let n = sorted.len();
    let mut perm = vec![0usize; n];
    let mut next = 0usize;
    fill(&mut perm, &mut next, 0);
    let mut slots: Vec<Option<T>> = sorted.into_iter().map(Some).collect();
    perm.into_iter()
        .map(|i| slots[i].take().expect("permutation is a bijection"))
        .collect()
}

// in-order walk of the implicit tree assigns sorted ranks to nodes
fn fill(perm: &mut [usize], next: &mut usize, node: usize) {
    if node >= perm.len() {
        return;
    }
    fill(perm, next, 2 * node + 1);
    perm[node] = *next;
    *next += 1;
    fill(perm, next, 2 * node + 2);
}

/// Search over an Eytzinger-ordered array. Returns the index of the match in
/// that array, or -1.
pub fn eytzinger_search<T>(keys: &[T], mut cmp: impl FnMut(&T) -> Ordering) -> i64 {
    let n = keys.len();
    // 1-based node numbers; descend right while the node is below the needle
    let mut k = 1usize;
    while k <= n {
        k = 2 * k + (cmp(&keys[k - 1]) == Ordering::Less) as usize;
    }
    // strip the trailing right turns plus one left turn to land on the lower bound
    k >>= k.trailing_ones() + 1;
    if k == 0 || cmp(&keys[k - 1]) != Ordering::Equal {
        -1
    } else {
        (k - 1) as i64
    }
}
