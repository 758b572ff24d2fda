use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumset_core::fourier::{
    brute_sumset, convolve, coset_coeff, inner, restrict, restricted_spectrum, sumset_by_pairs, sumset_by_transform,
    wht,
};
use sumset_core::{CosetSpec, Point, StoredSet};

fn chi(alpha: u64, x: u64) -> f64 {
    if (alpha & x).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Coefficients by direct summation, O(4ⁿ).
fn naive_spectrum(f: &[f64]) -> Vec<f64> {
    let len = f.len() as u64;
    (0..len).map(|a| (0..len).map(|x| f[x as usize] * chi(a, x)).sum::<f64>() / len as f64).collect()
}

fn random_fn(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn random_set(n: usize, density: f64, rng: &mut ChaCha8Rng) -> StoredSet {
    let mut s = StoredSet::empty(n).unwrap();
    for i in 0..1 << n {
        if rng.gen_bool(density) {
            s.insert_index(i);
        }
    }
    s
}

#[test]
fn transform_matches_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=8 {
        let f = random_fn(n, &mut rng);
        let fast = wht(&f).unwrap();
        for (a, b) in fast.values.iter().zip(naive_spectrum(&f)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn exact_transform_of_indicator() {
    let n = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_set(n, 0.4, &mut rng);
    let f: Vec<Rational64> = a.indicator();
    let s = wht(&f).unwrap();
    for alpha in 0..1u64 << n {
        let direct: i64 = a.indices().map(|x| chi(alpha, x as u64) as i64).sum();
        assert_eq!(s.values[alpha as usize], Rational64::new(direct, 64));
    }
    assert_eq!(s.inverse(), f);
}

#[test]
fn parseval_and_plancherel() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [3, 7, 10] {
        let (f, g) = (random_fn(n, &mut rng), random_fn(n, &mut rng));
        let (ff, gg) = (wht(&f).unwrap(), wht(&g).unwrap());
        assert!((inner(&f, &f) - ff.energy()).abs() < 1e-12);
        let spectral: f64 = ff.values.iter().zip(&gg.values).map(|(a, b)| a * b).sum();
        assert!((inner(&f, &g) - spectral).abs() < 1e-12);
    }
}

#[test]
fn convolution_matches_direct_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 7;
    let (f, g) = (random_fn(n, &mut rng), random_fn(n, &mut rng));
    let h = convolve(&f, &g).unwrap();
    for x in 0..1usize << n {
        let direct = (0..1usize << n).map(|y| f[y] * g[x ^ y]).sum::<f64>() / (1 << n) as f64;
        assert!((h[x] - direct).abs() < 1e-12);
    }
}

#[test]
fn support_of_self_convolution_is_the_sumset() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, d) in [(6, 0.05), (8, 0.02), (10, 0.3), (9, 0.0)] {
        let a = random_set(n, d, &mut rng);
        let mut naive = StoredSet::empty(n).unwrap();
        for x in a.indices() {
            for y in a.indices() {
                naive.insert_index(x ^ y);
            }
        }
        let f: Vec<f64> = a.indicator();
        let h = convolve(&f, &f).unwrap();
        let support = StoredSet::from_fn(n, |x| h[x as usize] > 0.5 / (1 << n) as f64).unwrap();
        assert_eq!(support, naive);
        assert_eq!(sumset_by_pairs(&a), naive);
        assert_eq!(sumset_by_transform(&a), naive);
        assert_eq!(brute_sumset(&a), naive);
    }
}

fn random_coset(n: usize, k: usize, rng: &mut ChaCha8Rng) -> CosetSpec {
    loop {
        let parities: Vec<Point> = (0..k).map(|_| Point::random(n, rng)).collect();
        let b: Vec<bool> = (0..k).map(|_| rng.gen()).collect();
        if let Ok(c) = CosetSpec::new(n, parities, b) {
            return c;
        }
    }
}

#[test]
fn restriction_coefficients_scale_by_two_to_the_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let n = rng.gen_range(4..=10);
        let k = rng.gen_range(1..=3.min(n - 1));
        let f = random_fn(n, &mut rng);
        let c = random_coset(n, k, &mut rng);
        let rf = wht(&restrict(&f, &c)).unwrap();
        // γ ranges over span(αᵢ), β over the direction space H
        let span: Vec<Point> = (0..1u64 << k)
            .map(|m| (0..k).filter(|&i| (m >> i) & 1 == 1).fold(Point::zero(n), |acc, i| &acc ^ &c.parities[i]))
            .collect();
        for beta in (0..1u64 << n).map(|b| Point::from_u64(n, b)).filter(|b| c.in_direction(b)) {
            let local = coset_coeff(&f, &c, &beta).unwrap();
            for gamma in &span {
                assert!((rf.get(&(gamma ^ &beta)).abs() - local.abs() / (1 << k) as f64).abs() < 1e-12);
            }
        }
        // every frequency, through its class modulo span(αᵢ)
        let rs = restricted_spectrum(&f, &c).unwrap();
        for gamma in (0..1u64 << n).map(|g| Point::from_u64(n, g)) {
            assert!((rf.get(&gamma).abs() - rs.magnitude(&gamma) / (1 << k) as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn coset_coefficient_by_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 8;
    let f = random_fn(n, &mut rng);
    let c = random_coset(n, 2, &mut rng);
    for beta in (0..1u64 << n).filter(|&b| c.in_direction(&Point::from_u64(n, b))) {
        let members: Vec<u64> = (0..1u64 << n).filter(|&x| c.contains(&Point::from_u64(n, x))).collect();
        let direct = members.iter().map(|&x| f[x as usize] * chi(beta, x)).sum::<f64>() / members.len() as f64;
        assert!((coset_coeff(&f, &c, &Point::from_u64(n, beta)).unwrap() - direct).abs() < 1e-12);
    }
}

#[test]
fn translation_multiplies_by_a_character() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 9;
    let f = random_fn(n, &mut rng);
    let y = rng.gen_range(0..1usize << n);
    let shifted: Vec<f64> = (0..1usize << n).map(|x| f[x ^ y]).collect();
    let (ff, fs) = (wht(&f).unwrap(), wht(&shifted).unwrap());
    for a in 0..1usize << n {
        assert!((fs.values[a] - chi(a as u64, y as u64) * ff.values[a]).abs() < 1e-12);
    }
}

/// Two dense, spectrally flat pieces on cosets x + H and y + H: the sumset
/// misses at most a 4ε²/τ⁴ fraction of x + y + H (Chebyshev on the
/// nontrivial part of the convolution).
#[test]
fn quasirandom_pieces_nearly_fill_the_sum_coset() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 12;
    for trial in 0..6 {
        let c1 = random_coset(n, 2, &mut rng);
        let c2 = CosetSpec::new(n, c1.parities.clone(), (0..2).map(|_| rng.gen()).collect()).unwrap();
        let density = [0.3, 0.5, 0.7][trial % 3];
        let coins: Vec<bool> = (0..1 << n).map(|_| rng.gen_bool(density)).collect();
        let a = StoredSet::from_fn(n, |x| {
            let p = Point::from_u64(n, x);
            (c1.contains(&p) || c2.contains(&p)) && coins[x as usize]
        })
        .unwrap();
        let f: Vec<f64> = a.indicator();
        let (s1, s2) = (restricted_spectrum(&f, &c1).unwrap(), restricted_spectrum(&f, &c2).unwrap());
        let eps = s1.local.max_nontrivial().1.max(s2.local.max_nontrivial().1);
        let tau = s1.density().min(s2.density());
        let target_b: Vec<bool> = c1.b.iter().zip(&c2.b).map(|(a, b)| a ^ b).collect();
        let target = CosetSpec::new(n, c1.parities.clone(), target_b).unwrap();
        let sum = brute_sumset(&a);
        let pts = target.points();
        let missing = pts.iter().filter(|p| !sum.contains_index(p.index())).count() as f64 / pts.len() as f64;
        assert!(missing <= 4.0 * eps * eps / tau.powi(4), "missing {missing}, ε̂ {eps}, τ {tau}");
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn majority_is_spectrally_flat_but_misses_all_ones() {
    for n in [5usize, 9, 13] {
        let a = StoredSet::from_fn(n, |x| 2 * x.count_ones() as usize >= n).unwrap();
        let s = wht(&a.indicator::<f64>()).unwrap();
        let (_, max) = s.max_nontrivial();
        // the largest nontrivial coefficient sits on the first level
        let level_one = binomial(n as u64 - 1, (n as u64 - 1) / 2) as f64 / (1u64 << n) as f64;
        assert!((max - level_one).abs() < 1e-12);
        assert!(max * (n as f64).sqrt() < 0.5);
        assert!(!brute_sumset(&a).contains_index((1 << n) - 1));
    }
}

#[test]
fn rational_and_float_spectra_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a = random_set(10, 0.5, &mut rng);
    let exact = wht(&a.indicator::<Rational64>()).unwrap();
    let float = wht(&a.indicator::<f64>()).unwrap();
    for (e, f) in exact.values.iter().zip(&float.values) {
        assert!((*e.numer() as f64 / *e.denom() as f64 - f).abs() < 1e-12);
    }
    let v = exact.is_quasirandom(&Rational64::new(1, 2));
    assert!(v.quasirandom && !v.max_abs.is_zero() && v.max_abs.is_positive());
}
