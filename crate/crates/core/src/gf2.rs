//! Linear algebra over F₂ on [`Point`] rows.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

/// A k × N matrix over F₂, stored as k rows of length N.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GF2Matrix {
    pub cols: usize,
    pub rows: Vec<Point>,
}

impl GF2Matrix {
    pub fn new(cols: usize, rows: Vec<Point>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.dim() != cols) {
            return Err(Error::DimensionMismatch { left: r.dim(), right: cols });
        }
        Ok(GF2Matrix { cols, rows })
    }

    pub fn random<R: RngCore + ?Sized>(k: usize, cols: usize, rng: &mut R) -> Self {
        GF2Matrix { cols, rows: (0..k).map(|_| Point::random(cols, rng)).collect() }
    }

    pub fn rank(&self) -> usize {
        gf2_rank(self)
    }
}

/// Rank over F₂ by row reduction.
pub fn gf2_rank(m: &GF2Matrix) -> usize {
    let mut basis = EchelonBasis::new(m.cols);
    m.rows.iter().filter(|r| basis.insert(r)).count()
}

/// Incrementally maintained row-echelon basis. Each stored row has a
/// distinct leading bit.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    n: usize,
    rows: Vec<(usize, Point)>,
}

impl EchelonBasis {
    pub fn new(n: usize) -> Self {
        EchelonBasis { n, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `x` against the basis; the result is zero iff `x` is in the span.
    pub fn reduce(&self, x: &Point) -> Point {
        let mut r = x.clone();
        for (lead, row) in &self.rows {
            if r.bit(*lead) {
                r ^= row;
            }
        }
        r
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.reduce(x).is_zero()
    }

    /// Adds `x`; returns false (and leaves the basis unchanged) when dependent.
    pub fn insert(&mut self, x: &Point) -> bool {
        assert_eq!(x.dim(), self.n, "dimension mismatch");
        let r = self.reduce(x);
        match r.leading_bit() {
            None => false,
            Some(lead) => {
                // keep rows sorted by decreasing leading bit so one pass reduces
                let pos = self.rows.iter().position(|(l, _)| *l < lead).unwrap_or(self.rows.len());
                self.rows.insert(pos, (lead, r));
                true
            }
        }
    }
}

/// True iff the points are linearly independent.
pub fn independent(points: &[Point]) -> bool {
    let Some(first) = points.first() else { return true };
    let mut b = EchelonBasis::new(first.dim());
    points.iter().all(|p| b.insert(p))
}

/// Reduced row echelon form of the system ⟨αᵢ, x⟩ = bᵢ.
struct Rref {
    n: usize,
    /// (pivot bit, row, rhs)
    rows: Vec<(usize, Point, bool)>,
}

fn rref(parities: &[Point], b: &[bool], n: usize) -> Result<Rref> {
    if parities.len() != b.len() {
        return Err(Error::DimensionMismatch { left: parities.len(), right: b.len() });
    }
    let mut rows: Vec<(usize, Point, bool)> = Vec::with_capacity(parities.len());
    for (p, &rhs) in parities.iter().zip(b) {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { left: p.dim(), right: n });
        }
        let (mut r, mut v) = (p.clone(), rhs);
        for (lead, row, rv) in &rows {
            if r.bit(*lead) {
                r ^= row;
                v ^= rv;
            }
        }
        let Some(lead) = r.leading_bit() else {
            return Err(if v { Error::Inconsistent } else { Error::Dependent });
        };
        for (_, row, rv) in rows.iter_mut() {
            if row.bit(lead) {
                *row ^= &r;
                *rv ^= v;
            }
        }
        rows.push((lead, r, v));
    }
    Ok(Rref { n, rows })
}

impl Rref {
    fn particular(&self) -> Point {
        let mut x = Point::zero(self.n);
        for (lead, _, v) in &self.rows {
            x.set_bit(*lead, *v);
        }
        x
    }

    fn null_basis(&self) -> Vec<Point> {
        let mut pivot = vec![false; self.n];
        for (lead, _, _) in &self.rows {
            pivot[*lead] = true;
        }
        (0..self.n)
            .rev()
            .filter(|&f| !pivot[f])
            .map(|f| {
                let mut h = Point::zero(self.n);
                h.set_bit(f, true);
                for (lead, row, _) in &self.rows {
                    if row.bit(f) {
                        h.set_bit(*lead, true);
                    }
                }
                h
            })
            .collect()
    }
}

/// Basis of H = {x : ⟨x, αᵢ⟩ = 0 for all i}; has n − k elements.
pub fn null_space(parities: &[Point], n: usize) -> Result<Vec<Point>> {
    Ok(rref(parities, &vec![false; parities.len()], n)?.null_basis())
}

/// Some x with ⟨x, αᵢ⟩ = bᵢ (free coordinates set to zero).
pub fn particular_solution(parities: &[Point], b: &[bool], n: usize) -> Result<Point> {
    Ok(rref(parities, b, n)?.particular())
}

/// Uniform sample from the coset {x : ⟨x, αᵢ⟩ = bᵢ}.
pub fn coset_solve<R: RngCore + ?Sized>(
    parities: &[Point],
    b: &[bool],
    n: usize,
    rng: &mut R,
) -> Result<Point> {
    Ok(CosetParam::new(parities, b, n)?.sample(rng))
}

/// Parametrization c ↦ p ⊕ Σ cⱼhⱼ of a coset by F₂^{n−k}, where local
/// coordinate j of c is bit j (least significant first).
#[derive(Clone, Debug)]
pub struct CosetParam {
    n: usize,
    shift: Point,
    basis: Vec<Point>,
    /// byte lookup: tables[i][v] = XOR of basis[8i + j] over set bits j of v
    tables: Vec<Vec<Point>>,
}

impl CosetParam {
    pub fn new(parities: &[Point], b: &[bool], n: usize) -> Result<Self> {
        let r = rref(parities, b, n)?;
        Ok(Self::from_parts(r.particular(), r.null_basis(), n))
    }

    pub fn from_parts(shift: Point, basis: Vec<Point>, n: usize) -> Self {
        let tables = basis
            .chunks(8)
            .map(|chunk| {
                let mut t = vec![Point::zero(n); 1 << chunk.len()];
                for v in 1..t.len() {
                    let low = v.trailing_zeros() as usize;
                    t[v] = &t[v & (v - 1)] ^ &chunk[low];
                }
                t
            })
            .collect();
        CosetParam { n, shift, basis, tables }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> &Point {
        &self.shift
    }

    pub fn basis(&self) -> &[Point] {
        &self.basis
    }

    /// Maps local coordinates (given as the words of a point of F₂^{n−k}).
    pub fn map(&self, c: &Point) -> Point {
        let mut x = self.shift.clone();
        for (i, t) in self.tables.iter().enumerate() {
            let pos = i * 8;
            let byte = ((c.words()[pos / 64] >> (pos % 64)) & 0xff) as usize & (t.len() - 1);
            if byte != 0 {
                x ^= &t[byte];
            }
        }
        x
    }

    pub fn map_index(&self, c: u64) -> Point {
        self.map(&Point::from_u64(self.dim().max(1), c))
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Point {
        if self.basis.is_empty() {
            return self.shift.clone();
        }
        self.map(&Point::random(self.dim(), rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(n: usize, v: u64) -> Point {
        Point::from_u64(n, v)
    }

    #[test]
    fn rank_examples() {
        let m = GF2Matrix::new(3, vec![pt(3, 0b100), pt(3, 0b010), pt(3, 0b110)]).unwrap();
        assert_eq!(gf2_rank(&m), 2);
        let id = GF2Matrix::new(7, (1..=5).map(|i| Point::unit(7, i)).collect()).unwrap();
        assert_eq!(id.rank(), 5);
        assert_eq!(GF2Matrix::new(4, vec![]).unwrap().rank(), 0);
    }

    #[test]
    fn random_wide_matrices_have_full_rank() {
        // failure probability per draw is below 2^(k² − N) = 2^-24
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (k, n) = (4, 40);
        let fails = (0..2000).filter(|_| GF2Matrix::random(k, n, &mut rng).rank() < k).count();
        assert_eq!(fails, 0);
    }

    #[test]
    fn coset_solve_half_cube() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let x = coset_solve(&[Point::unit(3, 1)], &[true], 3, &mut rng).unwrap();
            seen.insert(x.as_u64());
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![4, 5, 6, 7]);
    }

    #[test]
    fn full_codimension_is_a_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ps = [Point::unit(2, 1), Point::unit(2, 2)];
        for _ in 0..10 {
            assert!(coset_solve(&ps, &[false, false], 2, &mut rng).unwrap().is_zero());
        }
    }

    #[test]
    fn dependent_and_inconsistent_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ps = [pt(3, 0b100), pt(3, 0b010), pt(3, 0b110)];
        assert_eq!(coset_solve(&ps, &[true, false, true], 3, &mut rng), Err(Error::Dependent));
        assert_eq!(coset_solve(&ps, &[true, false, false], 3, &mut rng), Err(Error::Inconsistent));
    }

    #[test]
    fn null_space_is_orthogonal_and_complete() {
        let ps = [pt(6, 0b110001), pt(6, 0b011010)];
        let h = null_space(&ps, 6).unwrap();
        assert_eq!(h.len(), 4);
        assert!(independent(&h));
        for v in &h {
            assert!(ps.iter().all(|a| !a.dot(v)));
        }
    }

    #[test]
    fn echelon_membership() {
        let mut b = EchelonBasis::new(5);
        assert!(b.insert(&pt(5, 0b10100)));
        assert!(b.insert(&pt(5, 0b00110)));
        assert!(!b.insert(&pt(5, 0b10010)));
        assert!(b.contains(&pt(5, 0b10010)));
        assert!(!b.contains(&pt(5, 0b00001)));
        assert_eq!(b.rank(), 2);
    }

    #[test]
    fn param_is_a_bijection_onto_the_coset() {
        let ps = [pt(8, 0b1100_0001), pt(8, 0b0011_0110), pt(8, 0b1000_1000)];
        let b = [true, false, true];
        let param = CosetParam::new(&ps, &b, 8).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for c in 0..(1u64 << param.dim()) {
            let x = param.map_index(c);
            for (a, &bi) in ps.iter().zip(&b) {
                assert_eq!(a.dot(&x), bi);
            }
            seen.insert(x.as_u64());
        }
        assert_eq!(seen.len(), 32);
    }

    proptest! {
        #[test]
        fn coset_solve_satisfies_constraints(n in 2usize..90, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = 1 + (seed as usize) % n.min(5);
            let ps: Vec<Point> = (0..k).map(|_| Point::random(n, &mut rng)).collect();
            prop_assume!(independent(&ps));
            let b: Vec<bool> = (0..k).map(|i| (seed >> i) & 1 == 1).collect();
            let x = coset_solve(&ps, &b, n, &mut rng).unwrap();
            for (a, bi) in ps.iter().zip(&b) {
                prop_assert_eq!(a.dot(&x), *bi);
            }
        }
    }
}
