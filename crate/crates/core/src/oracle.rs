//! Membership oracles with query accounting.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::point::Point;
use crate::rng::RandomSource;

/// Largest dimension a [`StoredSet`] may have (a 2²⁴-bit table is 2 MiB).
pub const STORED_CAP: usize = 24;

/// Uncounted ground-truth membership. Implementors must be thread-safe.
pub trait Membership: Send + Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &Point) -> bool;
}

/// A set A ⊆ F₂ⁿ held as a bitset of length 2ⁿ.
#[derive(Clone, PartialEq, Eq)]
pub struct StoredSet {
    n: usize,
    bits: Vec<u64>,
}

impl StoredSet {
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 || n > STORED_CAP {
            return Err(Error::TooLarge { n, cap: STORED_CAP });
        }
        Ok(StoredSet { n, bits: vec![0; (1usize << n).div_ceil(64)] })
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::from_fn(n, |_| true)
    }

    /// Builds the set {x : f(x)} where x ranges over indices 0..2ⁿ.
    pub fn from_fn(n: usize, f: impl Fn(u64) -> bool) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for x in 0..(1u64 << n) {
            if f(x) {
                s.insert_index(x as usize);
            }
        }
        Ok(s)
    }

    pub fn from_membership(m: &dyn Membership) -> Result<Self> {
        let n = m.dim();
        let mut s = Self::empty(n)?;
        for x in 0..(1u64 << n) {
            if m.contains(&Point::from_u64(n, x)) {
                s.insert_index(x as usize);
            }
        }
        Ok(s)
    }

    pub fn from_points<'a>(n: usize, pts: impl IntoIterator<Item = &'a Point>) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for p in pts {
            if p.dim() != n {
                return Err(Error::DimensionMismatch { left: p.dim(), right: n });
            }
            s.insert_index(p.index());
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains_index(&self, i: usize) -> bool {
        (self.bits[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn insert_index(&mut self, i: usize) {
        self.bits[i >> 6] |= 1 << (i & 63);
    }

    pub fn remove_index(&mut self, i: usize) {
        self.bits[i >> 6] &= !(1 << (i & 63));
    }

    pub fn len(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Vol(A) = |A| / 2ⁿ.
    pub fn volume(&self) -> f64 {
        self.len() as f64 / (1u64 << self.n) as f64
    }

    pub fn size(&self) -> usize {
        1 << self.n
    }

    /// Member indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
        })
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.indices().map(|i| Point::from_u64(self.n, i as u64))
    }

    pub fn is_subset(&self, other: &StoredSet) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// |self Δ other| / 2ⁿ.
    pub fn distance(&self, other: &StoredSet) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let d: u64 = self.bits.iter().zip(&other.bits).map(|(a, b)| (a ^ b).count_ones() as u64).sum();
        d as f64 / (1u64 << self.n) as f64
    }

    pub fn difference(&self, other: &StoredSet) -> StoredSet {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a & !b).collect();
        StoredSet { n: self.n, bits }
    }

    /// 0/1 indicator as a table of scalars.
    pub fn indicator<S: num_traits::Zero + num_traits::One + Clone>(&self) -> Vec<S> {
        (0..self.size()).map(|i| if self.contains_index(i) { S::one() } else { S::zero() }).collect()
    }
}

impl Membership for StoredSet {
    fn dim(&self) -> usize {
        self.n
    }
    #[inline]
    fn contains(&self, x: &Point) -> bool {
        debug_assert_eq!(x.dim(), self.n);
        self.contains_index(x.index())
    }
}

impl fmt::Debug for StoredSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StoredSet(n = {}, |A| = {})", self.n, self.len())
    }
}

/// A set given by a membership predicate; usable at any n.
pub struct PredicateSet<F> {
    n: usize,
    pred: F,
}

impl<F: Fn(&Point) -> bool + Send + Sync> PredicateSet<F> {
    pub fn new(n: usize, pred: F) -> Self {
        PredicateSet { n, pred }
    }
}

impl<F: Fn(&Point) -> bool + Send + Sync> Membership for PredicateSet<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn contains(&self, x: &Point) -> bool {
        (self.pred)(x)
    }
}

/// Counted black-box access to a set. Every [`SetOracle::query`] adds one to
/// the meter; the counter is atomic so the oracle can be shared by threads.
pub struct SetOracle {
    inner: Arc<dyn Membership>,
    count: AtomicU64,
}

impl SetOracle {
    pub fn new(inner: Arc<dyn Membership>) -> Self {
        SetOracle { inner, count: AtomicU64::new(0) }
    }

    pub fn from_set<M: Membership + 'static>(m: M) -> Self {
        Self::new(Arc::new(m))
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[inline]
    pub fn query(&self, x: &Point) -> bool {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.contains(x)
    }

    pub fn query_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    /// The underlying membership, for reference computations that must not
    /// touch the meter.
    pub fn ground_truth(&self) -> &Arc<dyn Membership> {
        &self.inner
    }
}

impl fmt::Debug for SetOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetOracle(n = {}, queries = {})", self.dim(), self.query_count())
    }
}

/// A possibly randomized bit-valued function on F₂ⁿ.
pub trait BitFn: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &Point, rng: &mut RandomSource) -> bool;
}

impl BitFn for SetOracle {
    fn dim(&self) -> usize {
        SetOracle::dim(self)
    }
    fn eval(&self, x: &Point, _: &mut RandomSource) -> bool {
        self.query(x)
    }
}

impl BitFn for StoredSet {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &Point, _: &mut RandomSource) -> bool {
        self.contains(x)
    }
}

/// Adapts a closure to [`BitFn`].
pub struct FnBit<F> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(&Point, &mut RandomSource) -> bool + Sync> BitFn for FnBit<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &Point, rng: &mut RandomSource) -> bool {
        (self.f)(x, rng)
    }
}
