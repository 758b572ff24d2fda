//! Brute-force Walsh–Hadamard reference engine.
//!
//! Spectra are normalized as f̂(α) = E_x[f(x)·χ_α(x)] with χ_α(x) = (−1)^⟨α,x⟩,
//! and tables are indexed by the integer value of the point (see [`Point`]).

mod coset;
mod sumset;

use std::fmt::{Debug, Display};
use std::io::{self, Write};

use num_rational::Rational64;
use num_traits::{Num, Signed};

use crate::error::{Error, Result};
use crate::point::Point;

pub use coset::{
    coset_coeff, is_quasirandom_on_coset, restrict, restricted_spectrum, CosetSpec,
    RestrictedSpectrum,
};
pub use sumset::{brute_sumset, sumset_by_pairs, sumset_by_transform};

/// Scalar types a spectrum can be computed in.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Slack allowed in threshold comparisons: zero for exact types.
    fn tolerance() -> Self;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn from_i64(v: i64) -> Self {
        v as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for Rational64 {
    fn from_i64(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn tolerance() -> Self {
        Rational64::from_integer(0)
    }
}

/// The full table of 2ⁿ Fourier coefficients of a function on F₂ⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable<S> {
    pub n: usize,
    pub values: Vec<S>,
}

fn log2_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Unnormalized in-place butterfly: buf ← Σ_x buf(x)·χ_α(x).
pub fn wht_in_place<S: Clone + std::ops::Add<Output = S> + std::ops::Sub<Output = S>>(buf: &mut [S]) {
    let len = buf.len();
    let mut h = 1;
    while h < len {
        for block in buf.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (a.clone(), b.clone());
                *a = x.clone() + y.clone();
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Normalized Walsh–Hadamard transform of a table of length 2ⁿ.
pub fn wht<S: Scalar>(f: &[S]) -> Result<SpectrumTable<S>> {
    let n = log2_len(f.len())?;
    let mut values = f.to_vec();
    wht_in_place(&mut values);
    let scale = S::from_i64(1i64 << n);
    for v in values.iter_mut() {
        *v = v.clone() / scale.clone();
    }
    Ok(SpectrumTable { n, values })
}

/// h(x) = E_y[f(y)·g(x + y)], computed through ĥ = f̂·ĝ.
pub fn convolve<S: Scalar>(f: &[S], g: &[S]) -> Result<Vec<S>> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch { left: f.len(), right: g.len() });
    }
    let (ff, gg) = (wht(f)?, wht(g)?);
    let prod = ff.values.into_iter().zip(gg.values).map(|(a, b)| a * b).collect();
    Ok(SpectrumTable { n: ff.n, values: prod }.inverse())
}

/// ⟨f, g⟩ = E_x[f(x)g(x)].
pub fn inner<S: Scalar>(f: &[S], g: &[S]) -> S {
    let sum = f.iter().zip(g).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
    sum / S::from_i64(f.len() as i64)
}

/// Outcome of a quasirandomness check.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiVerdict<S> {
    pub quasirandom: bool,
    /// Largest nontrivial coefficient magnitude (zero if there is none).
    pub max_abs: S,
    /// A frequency attaining `max_abs` when the check fails.
    pub witness: Option<Point>,
}

impl<S: Scalar> SpectrumTable<S> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, alpha: &Point) -> S {
        self.values[alpha.index()].clone()
    }

    /// f = Σ_α f̂(α)χ_α.
    pub fn inverse(&self) -> Vec<S> {
        let mut f = self.values.clone();
        wht_in_place(&mut f);
        f
    }

    /// Σ_α f̂(α)².
    pub fn energy(&self) -> S {
        self.values.iter().fold(S::zero(), |acc, v| acc + v.clone() * v.clone())
    }

    /// Largest |f̂(α)| over α ≠ 0 together with its index.
    pub fn max_nontrivial(&self) -> (usize, S) {
        let mut best = (0, S::zero());
        for (i, v) in self.values.iter().enumerate().skip(1) {
            if v.abs() > best.1 {
                best = (i, v.abs());
            }
        }
        best
    }

    /// Frequencies with |f̂(α)| ≥ θ.
    pub fn heavy(&self, theta: &S) -> Vec<Point> {
        let cut = theta.clone() - S::tolerance();
        (0..self.len())
            .filter(|&i| self.values[i].abs() >= cut)
            .map(|i| Point::from_u64(self.n, i as u64))
            .collect()
    }

    /// ε-quasirandom iff every nontrivial |f̂(α)| ≤ ε.
    pub fn is_quasirandom(&self, eps: &S) -> QuasiVerdict<S> {
        let (idx, max_abs) = self.max_nontrivial();
        let quasirandom = max_abs <= eps.clone() + S::tolerance();
        let witness = (!quasirandom).then(|| Point::from_u64(self.n, idx as u64));
        QuasiVerdict { quasirandom, max_abs, witness }
    }

    pub fn to_f64(&self) -> SpectrumTable<f64> {
        SpectrumTable { n: self.n, values: self.values.iter().map(Scalar::to_f64).collect() }
    }

    /// CSV with header `alpha_hex,coefficient`, one row per frequency.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "alpha_hex,coefficient")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", Point::from_u64(self.n, i as u64), v)?;
        }
        Ok(())
    }
}

/// Convenience: quasirandomness of a plain table.
pub fn is_quasirandom<S: Scalar>(f: &[S], eps: &S) -> Result<QuasiVerdict<S>> {
    Ok(wht(f)?.is_quasirandom(eps))
}
