use serde::{Deserialize, Serialize};

use super::{wht, QuasiVerdict, Scalar, SpectrumTable};
use crate::error::{Error, Result};
use crate::gf2::{independent, particular_solution, CosetParam};
use crate::point::Point;

/// The coset H' = {x : ⟨x, αᵢ⟩ = bᵢ} of H = {x : ⟨x, αᵢ⟩ = 0}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetSpec {
    pub n: usize,
    pub parities: Vec<Point>,
    pub b: Vec<bool>,
}

impl CosetSpec {
    pub fn new(n: usize, parities: Vec<Point>, b: Vec<bool>) -> Result<Self> {
        if parities.len() != b.len() {
            return Err(Error::DimensionMismatch { left: parities.len(), right: b.len() });
        }
        if let Some(p) = parities.iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch { left: p.dim(), right: n });
        }
        if !independent(&parities) {
            return Err(Error::Dependent);
        }
        Ok(CosetSpec { n, parities, b })
    }

    /// The whole space, as a codimension-0 coset.
    pub fn whole(n: usize) -> Self {
        CosetSpec { n, parities: vec![], b: vec![] }
    }

    pub fn codim(&self) -> usize {
        self.parities.len()
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.parities.iter().zip(&self.b).all(|(a, &bi)| a.dot(x) == bi)
    }

    /// β ∈ H, i.e. β is orthogonal to every defining parity.
    pub fn in_direction(&self, beta: &Point) -> bool {
        self.parities.iter().all(|a| !a.dot(beta))
    }

    pub fn param(&self) -> CosetParam {
        CosetParam::new(&self.parities, &self.b, self.n).expect("validated at construction")
    }

    /// All points of the coset, in local-coordinate order.
    pub fn points(&self) -> Vec<Point> {
        let p = self.param();
        (0..1u64 << p.dim()).map(|c| p.map_index(c)).collect()
    }
}

/// f̂_{H'}(β) = 2^{−(n−k)} Σ_{x∈H'} f(x)·χ_β(x) for β ∈ H.
pub fn coset_coeff<S: Scalar>(f: &[S], c: &CosetSpec, beta: &Point) -> Result<S> {
    if f.len() != 1 << c.n {
        return Err(Error::DimensionMismatch { left: f.len(), right: 1 << c.n });
    }
    if beta.dim() != c.n {
        return Err(Error::DimensionMismatch { left: beta.dim(), right: c.n });
    }
    if !c.in_direction(beta) {
        return Err(Error::NotInSubspace(beta.to_hex()));
    }
    let pts = c.points();
    let sum = pts.iter().fold(S::zero(), |acc, x| {
        let v = f[x.index()].clone();
        if beta.dot(x) {
            acc - v
        } else {
            acc + v
        }
    });
    Ok(sum / S::from_i64(pts.len() as i64))
}

/// f·1_{H'} as a table on the whole space.
pub fn restrict<S: Scalar>(f: &[S], c: &CosetSpec) -> Vec<S> {
    (0..f.len())
        .map(|i| if c.contains(&Point::from_u64(c.n, i as u64)) { f[i].clone() } else { S::zero() })
        .collect()
}

/// Spectrum of f on a coset, computed in local coordinates.
///
/// Local frequency u corresponds to the class of β modulo span(αᵢ) with
/// ⟨β, hⱼ⟩ = uⱼ for the coset's direction basis hⱼ, and
/// |local(u)| = |f̂_{H'}(β)|. The index u = 0 is the trivial class.
#[derive(Clone, Debug)]
pub struct RestrictedSpectrum<S> {
    pub param: CosetParam,
    pub local: SpectrumTable<S>,
}

impl<S: Scalar> RestrictedSpectrum<S> {
    /// A representative frequency of local index u.
    pub fn frequency(&self, u: usize) -> Point {
        let bits: Vec<bool> = (0..self.param.dim()).map(|j| (u >> j) & 1 == 1).collect();
        particular_solution(self.param.basis(), &bits, self.param.ambient())
            .expect("direction basis is independent")
    }

    /// Local index of the class of β.
    pub fn local_index(&self, beta: &Point) -> usize {
        self.param.basis().iter().enumerate().map(|(j, h)| (beta.dot(h) as usize) << j).sum()
    }

    /// |f̂_{H'}(β)|, for any β (only its class matters).
    pub fn magnitude(&self, beta: &Point) -> S {
        self.local.values[self.local_index(beta)].abs()
    }

    /// Vol_{H'}(f) = f̂_{H'}(0).
    pub fn density(&self) -> S {
        self.local.values[0].clone()
    }

    pub fn is_quasirandom(&self, eps: &S) -> QuasiVerdict<S> {
        let v = self.local.is_quasirandom(eps);
        let witness = v.witness.map(|u| self.frequency(u.index()));
        QuasiVerdict { witness, ..v }
    }
}

pub fn restricted_spectrum<S: Scalar>(f: &[S], c: &CosetSpec) -> Result<RestrictedSpectrum<S>> {
    if f.len() != 1 << c.n {
        return Err(Error::DimensionMismatch { left: f.len(), right: 1 << c.n });
    }
    let param = c.param();
    let g: Vec<S> = (0..1u64 << param.dim()).map(|u| f[param.map_index(u).index()].clone()).collect();
    Ok(RestrictedSpectrum { param, local: wht(&g)? })
}

/// Def 2.2 quasirandomness of f on a coset, over all nontrivial characters.
pub fn is_quasirandom_on_coset<S: Scalar>(f: &[S], c: &CosetSpec, eps: &S) -> Result<QuasiVerdict<S>> {
    Ok(restricted_spectrum(f, c)?.is_quasirandom(eps))
}
