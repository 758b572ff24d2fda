//! Elements of F₂ⁿ.
//!
//! A [`Point`] is stored as little-endian 64-bit words: `words[0]` holds the
//! 64 least significant bits. Coordinate `i` (1-based) lives at bit position
//! `n - i`, so coordinate 1 is the most significant bit and the integer value
//! of a point matches its hex serialization. For `n <= 64` the words live
//! inline and every operation touches a single machine word.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

type Words = SmallVec<[u64; 1]>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    n: usize,
    words: Words,
}

#[inline]
fn word_count(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[inline]
fn top_mask(n: usize) -> u64 {
    match n % 64 {
        0 if n == 0 => 0,
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl Point {
    pub fn zero(n: usize) -> Self {
        Point { n, words: smallvec![0; word_count(n)] }
    }

    /// The all-ones vector 1ⁿ.
    pub fn ones(n: usize) -> Self {
        let mut p = Point { n, words: smallvec![u64::MAX; word_count(n)] };
        p.clear_padding();
        p
    }

    /// Unit vector e_i, `i` 1-based.
    pub fn unit(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= n, "coordinate {i} out of range for n = {n}");
        let mut p = Point::zero(n);
        p.set_bit(n - i, true);
        p
    }

    /// Builds a point from its integer value (`n <= 64`).
    pub fn from_u64(n: usize, value: u64) -> Self {
        assert!(n <= 64, "from_u64 requires n <= 64");
        Point { n, words: smallvec![value & top_mask(n)] }
    }

    pub fn from_words(n: usize, words: &[u64]) -> Self {
        let mut p = Point::zero(n);
        for (dst, src) in p.words.iter_mut().zip(words) {
            *dst = *src;
        }
        p.clear_padding();
        p
    }

    /// Uniform random point. Words are drawn lowest first, so the low
    /// coordinates of points drawn from identical streams agree across `n`.
    pub fn random<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut p = Point::zero(n);
        for w in p.words.iter_mut() {
            *w = rng.next_u64();
        }
        p.clear_padding();
        p
    }

    fn clear_padding(&mut self) {
        let last = self.words.len() - 1;
        self.words[last] &= top_mask(self.n);
        if self.n == 0 {
            self.words[0] = 0;
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Integer value for `n <= 64`; used as the index into dense tables.
    #[inline]
    pub fn as_u64(&self) -> u64 {
        debug_assert!(self.n <= 64);
        self.words[0]
    }

    #[inline]
    pub fn index(&self) -> usize {
        self.as_u64() as usize
    }

    /// Bit at position `pos` (0 = least significant = coordinate n).
    #[inline]
    pub fn bit(&self, pos: usize) -> bool {
        (self.words[pos / 64] >> (pos % 64)) & 1 == 1
    }

    #[inline]
    pub fn set_bit(&mut self, pos: usize, value: bool) {
        let (w, b) = (pos / 64, pos % 64);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    /// Coordinate `i` (1-based).
    pub fn coord(&self, i: usize) -> bool {
        self.bit(self.n - i)
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Position of the most significant set bit.
    pub fn leading_bit(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    fn check_dim(&self, other: &Point) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    pub fn try_xor(&self, other: &Point) -> Result<Point> {
        self.check_dim(other)?;
        Ok(self ^ other)
    }

    pub fn try_dot(&self, other: &Point) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.dot(other))
    }

    /// ⟨x, y⟩ over F₂. Panics on dimension mismatch.
    #[inline]
    pub fn dot(&self, other: &Point) -> bool {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    /// `self ^= a ^ b` without allocating.
    #[inline]
    pub fn assign_xor_of(&mut self, a: &Point, b: &Point) {
        debug_assert!(a.n == b.n);
        if self.n != a.n {
            *self = Point::zero(a.n);
        }
        for ((d, x), y) in self.words.iter_mut().zip(&a.words).zip(&b.words) {
            *d = x ^ y;
        }
    }

    pub fn to_hex(&self) -> String {
        let digits = self.n.div_ceil(4).max(1);
        let mut out = String::with_capacity(digits + 4);
        out.push_str(&self.n.to_string());
        out.push(':');
        for d in (0..digits).rev() {
            let pos = d * 4;
            let w = self.words[pos / 64] >> (pos % 64);
            out.push(char::from_digit((w & 0xf) as u32, 16).unwrap());
        }
        out
    }

    pub fn parse_hex(s: &str) -> Result<Point> {
        let bad = |why: &str| Error::Parse(format!("point {s:?}: {why}"));
        let (n, hex) = s.split_once(':').ok_or_else(|| bad("missing `n:` prefix"))?;
        let n: usize = n.trim().parse().map_err(|_| bad("invalid dimension"))?;
        if n == 0 {
            return Err(bad("dimension must be positive"));
        }
        if hex.len() != n.div_ceil(4) {
            return Err(bad("wrong number of hex digits"));
        }
        let mut p = Point::zero(n);
        for (d, ch) in hex.chars().rev().enumerate() {
            let v = ch
                .to_digit(16)
                .filter(|_| !ch.is_ascii_uppercase())
                .ok_or_else(|| bad("expected lowercase hex"))? as u64;
            let pos = d * 4;
            p.words[pos / 64] |= v << (pos % 64);
        }
        let before = p.clone();
        p.clear_padding();
        if p != before {
            return Err(bad("bits set beyond dimension"));
        }
        Ok(p)
    }
}

impl BitXor for &Point {
    type Output = Point;

    #[inline]
    fn bitxor(self, rhs: &Point) -> Point {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

impl BitXorAssign<&Point> for Point {
    #[inline]
    fn bitxor_assign(&mut self, rhs: &Point) {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point({})", self.to_hex())
    }
}

impl FromStr for Point {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Point::parse_hex(s)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Point::parse_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Componentwise XOR with a dimension check.
pub fn xor(x: &Point, y: &Point) -> Result<Point> {
    x.try_xor(y)
}

/// Inner product ⟨x, y⟩ mod 2 with a dimension check.
pub fn dot(x: &Point, y: &Point) -> Result<bool> {
    x.try_dot(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn p4(bits: &str) -> Point {
        Point::from_u64(4, u64::from_str_radix(bits, 2).unwrap())
    }

    #[test]
    fn xor_examples() {
        assert_eq!(xor(&p4("0101"), &p4("0011")).unwrap(), p4("0110"));
        let x = p4("1011");
        assert!(xor(&x, &x).unwrap().is_zero());
        assert_eq!(xor(&x, &Point::zero(4)).unwrap(), x);
    }

    #[test]
    fn dot_examples() {
        assert!(dot(&p4("1100"), &p4("1010")).unwrap());
        assert!(!dot(&p4("1101"), &Point::zero(4)).unwrap());
        assert!(!dot(&p4("1111"), &p4("1111")).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Point::zero(4);
        let b = Point::zero(5);
        assert!(matches!(xor(&a, &b), Err(Error::DimensionMismatch { left: 4, right: 5 })));
        assert!(dot(&a, &b).is_err());
    }

    #[test]
    fn coordinate_one_is_most_significant() {
        let e1 = Point::unit(16, 1);
        assert_eq!(e1.to_hex(), "16:8000");
        assert!(e1.coord(1));
        assert_eq!(Point::unit(16, 16).to_hex(), "16:0001");
        assert_eq!(Point::parse_hex("16:00ff").unwrap().as_u64(), 0xff);
    }

    #[test]
    fn hex_rejects_malformed() {
        for bad in ["00ff", "16:0ff", "16:00FF", "5:3f", "0:0", "x:00"] {
            assert!(Point::parse_hex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn wide_points_use_chunked_words() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = Point::random(130, &mut rng);
        assert_eq!(x.words().len(), 3);
        assert_eq!(Point::parse_hex(&x.to_hex()).unwrap(), x);
        assert_eq!(Point::ones(130).weight(), 130);
        assert_eq!(Point::unit(130, 1).leading_bit(), Some(129));
    }

    #[test]
    fn random_low_bits_agree_across_dimensions() {
        let a = Point::random(16, &mut rand_chacha::ChaCha8Rng::seed_from_u64(9));
        let b = Point::random(48, &mut rand_chacha::ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a.as_u64(), b.as_u64() & 0xffff);
    }

    #[test]
    fn group_laws_exhaustive_n4() {
        let pts: Vec<Point> = (0..16).map(|v| Point::from_u64(4, v)).collect();
        for x in &pts {
            for y in &pts {
                assert_eq!(x ^ y, y ^ x);
                for z in &pts {
                    assert_eq!(&(x ^ y) ^ z, x ^ &(y ^ z));
                    assert_eq!((x ^ y).dot(z), x.dot(z) ^ y.dot(z));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn group_laws_n8(a in 0u64..256, b in 0u64..256, c in 0u64..256) {
            let (x, y, z) = (Point::from_u64(8, a), Point::from_u64(8, b), Point::from_u64(8, c));
            prop_assert_eq!(&(&x ^ &y) ^ &z, &x ^ &(&y ^ &z));
            prop_assert_eq!(&x ^ &y, &y ^ &x);
            prop_assert!((&x ^ &x).is_zero());
            prop_assert_eq!((&x ^ &y).dot(&z), x.dot(&z) ^ y.dot(&z));
        }

        #[test]
        fn hex_round_trip(n in 1usize..200, seed in any::<u64>()) {
            let x = Point::random(n, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let back: Point = x.to_hex().parse().unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
