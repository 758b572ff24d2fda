use rand::Rng;
use sumset_core::fourier::wht;
use sumset_core::oracle::FnBit;
use sumset_core::parity::{
    amplification, explicit_gl, implicit_gl, linearity_test, local_correct, ExplicitGlParams, GLResult, GlParams,
    ParityOracle, Restriction,
};
use sumset_core::{Point, RandomSource, SetOracle, StoredSet};

fn set_from(n: usize, pred: impl Fn(&Point) -> bool) -> StoredSet {
    StoredSet::from_fn(n, |x| pred(&Point::from_u64(n, x))).unwrap()
}

/// Reads the hidden frequency off an oracle at the unit vectors.
fn decode_alpha(o: &ParityOracle, a: &SetOracle, n: usize, rng: &mut RandomSource) -> Point {
    let m = amplification(1e-6);
    let mut p = Point::zero(n);
    for i in 1..=n {
        if o.eval_amplified(a, &Point::unit(n, i), 0, m, rng) {
            p ^= &Point::unit(n, i);
        }
    }
    p
}

fn frequencies(res: &GLResult, a: &SetOracle, n: usize) -> Vec<Point> {
    let mut rng = RandomSource::new(99);
    let mut out: Vec<Point> = res.oracles.iter().map(|o| decode_alpha(o, a, n, &mut rng)).collect();
    out.sort_by_key(|p| p.as_u64());
    out
}

#[test]
fn hyperplane_yields_its_normal() {
    let n = 14;
    let alpha = Point::from_u64(n, 0b10_0110_0000_0101);
    let a = SetOracle::from_set(set_from(n, |x| !alpha.dot(x)));
    let res = implicit_gl(&a, &GlParams::new(0.3, 0.1).unwrap(), &mut RandomSource::new(1)).unwrap();
    assert_eq!(frequencies(&res, &a, n), vec![Point::zero(n), alpha.clone()]);
    let o = res.oracles.iter().find(|o| !o.constant).unwrap();
    assert!((o.estimate - 0.5).abs() <= 0.3 / 4.0);
    let mut rng = RandomSource::new(2);
    let agree = (0..300)
        .filter(|_| {
            let x = Point::random(n, &mut rng);
            o.eval_fixed(&a, &x, 0) == alpha.dot(&x)
        })
        .count();
    assert!(agree >= 295, "{agree}/300");
}

#[test]
fn planted_codimension_two_yields_four_parities() {
    let n = 14;
    let b1 = Point::from_u64(n, 0b10_0110_0000_0101);
    let b2 = Point::from_u64(n, 0b01_0000_1101_0010);
    let a = SetOracle::from_set(set_from(n, |x| !b1.dot(x) && !b2.dot(x)));
    let res = implicit_gl(&a, &GlParams::new(0.2, 0.1).unwrap(), &mut RandomSource::new(3)).unwrap();
    let mut expect = vec![Point::zero(n), b1.clone(), b2.clone(), &b1 ^ &b2];
    expect.sort_by_key(|p| p.as_u64());
    assert_eq!(frequencies(&res, &a, n), expect);
    for o in &res.oracles {
        assert!((o.estimate - 0.25).abs() <= 0.05);
    }
}

#[test]
fn random_set_has_only_the_trivial_heavy_coefficient() {
    let n = 16;
    let mut rng = RandomSource::new(4);
    let coins: Vec<bool> = (0..1 << n).map(|_| rng.gen_bool(0.5)).collect();
    let a = SetOracle::from_set(StoredSet::from_fn(n, |x| coins[x as usize]).unwrap());
    let res = implicit_gl(&a, &GlParams::new(0.3, 0.1).unwrap(), &mut RandomSource::new(5)).unwrap();
    assert_eq!(res.oracles.len(), 1);
    assert!(res.oracles[0].constant);
}

#[test]
fn empty_set_yields_nothing() {
    let a = SetOracle::from_set(StoredSet::empty(12).unwrap());
    let res = implicit_gl(&a, &GlParams::new(0.3, 0.1).unwrap(), &mut RandomSource::new(6)).unwrap();
    assert!(res.oracles.is_empty());
}

#[test]
fn query_count_does_not_depend_on_n() {
    let mut meters = vec![];
    let mut outputs = vec![];
    for n in [16, 32, 48] {
        // structure on the low coordinates only
        let alpha = Point::from_u64(n, 0b1011_0010_0110);
        let a = SetOracle::from_set(sumset_core::PredicateSet::new(n, move |x: &Point| !alpha.dot(x)));
        let res = implicit_gl(&a, &GlParams::new(0.3, 0.1).unwrap(), &mut RandomSource::new(7)).unwrap();
        meters.push(a.query_count());
        outputs.push(res.oracles.iter().map(|o| (o.b, o.constant)).collect::<Vec<_>>());
    }
    assert!(meters.windows(2).all(|w| w[0] == w[1]), "{meters:?}");
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn local_correction_repairs_sparse_corruption() {
    let n = 12;
    let alpha = Point::from_u64(n, 0b1100_1010_0111);
    let mut rng = RandomSource::new(8);
    let corrupt: Vec<bool> = (0..1 << n).map(|_| rng.gen_bool(0.08)).collect();
    let d = FnBit { n, f: |x: &Point, _: &mut RandomSource| alpha.dot(x) ^ corrupt[x.index()] };
    let fixed = local_correct(&d, 41, &mut RandomSource::new(9)).unwrap();
    let agree = (0..1u64 << n)
        .filter(|&x| {
            let p = Point::from_u64(n, x);
            sumset_core::BitFn::eval(&fixed, &p, &mut rng) == alpha.dot(&p)
        })
        .count();
    assert!(agree as f64 >= 0.99 * (1 << n) as f64, "{agree}");
    assert!(local_correct(&d, 40, &mut rng).is_err());
}

#[test]
fn fixed_evaluation_cost() {
    let n = 14;
    let alpha = Point::from_u64(n, 0b11_0000_0000_0001);
    let a = SetOracle::from_set(set_from(n, |x| alpha.dot(x)));
    let params = GlParams::new(0.4, 0.1).unwrap();
    let res = implicit_gl(&a, &params, &mut RandomSource::new(10)).unwrap();
    let o = res.oracles.iter().find(|o| !o.constant).unwrap();
    let before = a.query_count();
    o.eval_fixed(&a, &Point::random(n, &mut RandomSource::new(11)), 0);
    assert_eq!(a.query_count() - before, ((1u64 << params.t) - 1) * params.r as u64);
    assert_eq!(o.fixed_cost(), ((1u64 << params.t) - 1) * params.r as u64);
}

#[test]
fn oracles_survive_serialization() {
    let n = 12;
    let alpha = Point::from_u64(n, 0b0110_0001_1001);
    let a = SetOracle::from_set(set_from(n, |x| !alpha.dot(x)));
    let res = implicit_gl(&a, &GlParams::new(0.4, 0.1).unwrap(), &mut RandomSource::new(12)).unwrap();
    let back: GLResult = serde_json::from_str(&serde_json::to_string(&res).unwrap()).unwrap();
    let mut rng = RandomSource::new(13);
    for _ in 0..20 {
        let x = Point::random(n, &mut rng);
        assert_eq!(res.eval_all_fixed(&a, &x, 0), back.eval_all_fixed(&a, &x, 0));
    }
}

#[test]
fn restricted_target_records_its_home() {
    let n = 12;
    let alpha = Point::from_u64(n, 0b1001_0000_0011);
    let a = SetOracle::from_set(set_from(n, |x| !alpha.dot(x)));
    let levels = implicit_gl(&a, &GlParams::new(0.4, 0.1).unwrap(), &mut RandomSource::new(14)).unwrap();
    let level = levels.oracles.into_iter().find(|o| !o.constant).unwrap();
    let tree = vec![level];
    let target = Restriction::new(&a, &tree, 0);
    let res = implicit_gl(&target, &GlParams::new(0.2, 0.1).unwrap(), &mut RandomSource::new(15)).unwrap();
    assert!(!res.oracles.is_empty());
    assert!(res.oracles.iter().all(|o| o.home == 0 && o.home_depth == 1));
}

fn structured_sets(n: usize) -> Vec<StoredSet> {
    let mut rng = RandomSource::new(16);
    let mut sets = vec![StoredSet::empty(n).unwrap(), StoredSet::full(n).unwrap()];
    for k in 1..=3 {
        let ps: Vec<Point> = (0..k).map(|_| Point::random(n, &mut rng)).collect();
        let coins: Vec<bool> = (0..1 << n).map(|_| rng.gen_bool(0.8)).collect();
        sets.push(set_from(n, |x| ps.iter().all(|p| !p.dot(x))));
        sets.push(set_from(n, |x| ps.iter().all(|p| !p.dot(x)) && coins[x.index()]));
    }
    sets
}

fn check_explicit(params: &ExplicitGlParams, n: usize) {
    let theta = params.theta;
    for (i, s) in structured_sets(n).into_iter().enumerate() {
        let spec = wht(&s.indicator::<f64>()).unwrap();
        let a = SetOracle::from_set(s);
        let hits = explicit_gl(&a, params, &mut RandomSource::new(17 + i as u64)).unwrap();
        for (alpha, v) in spec.values.iter().enumerate() {
            let found = hits.iter().any(|h| h.alpha.as_u64() == alpha as u64);
            if v.abs() >= theta {
                assert!(found, "missed {alpha} with {v}");
            }
            if v.abs() < theta / 2.0 {
                assert!(!found, "returned {alpha} with {v}");
            }
        }
    }
}

#[test]
fn explicit_search_matches_thresholding() {
    check_explicit(&ExplicitGlParams::new(0.3, 0.05).unwrap(), 10);
    check_explicit(&ExplicitGlParams::new(0.3, 0.05).unwrap().sampling_only(), 10);
}

#[test]
fn random_function_fails_linearity() {
    let n = 12;
    let mut rng = RandomSource::new(18);
    let table: Vec<bool> = (0..1 << n).map(|_| rng.gen()).collect();
    let d = FnBit { n, f: |x: &Point, _: &mut RandomSource| table[x.index()] };
    let out = linearity_test(&d, 0.05, 0.2, 0.01, &mut rng).unwrap();
    assert!(!out.accepted);
    assert!(out.rejection_rate > 0.4);
}
