use std::process::Command;

use sumset_cli::{generate, run, sweep, write_csv, write_outputs, RunConfig, SetSpec, SweepGrid};
use sumset_core::{Mode, Point};

fn union_spec() -> SetSpec {
    serde_json::from_str(
        r#"{"kind": "coset_union", "n": 16,
            "parities": ["16:8605", "16:40d2", "16:3108"],
            "cosets": ["000", "011", "101"]}"#,
    )
    .unwrap()
}

fn hyperplane_spec(n: usize) -> SetSpec {
    SetSpec::CosetUnion { n, parities: vec![Point::from_u64(n, 0b1011_0010_0110)], cosets: vec!["0".into()] }
}

#[test]
fn specs_round_trip_through_json() {
    let specs = vec![
        union_spec(),
        SetSpec::Explicit { n: 8, members: vec![Point::from_u64(8, 3), Point::from_u64(8, 200)] },
        SetSpec::AffineSubspace { n: 10, basis: vec![Point::unit(10, 1)], shift: Point::from_u64(10, 5) },
        SetSpec::Random { n: 12, density: 0.3, seed: 4 },
        SetSpec::Majority { n: 9 },
        SetSpec::NoisyCosetUnion {
            n: 12,
            parities: vec![Point::unit(12, 2)],
            cosets: vec!["1".into()],
            density: 0.5,
            flip: 0.01,
            seed: 1,
        },
    ];
    for s in specs {
        let back: SetSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        s.validate().unwrap();
    }
    let bad = SetSpec::CosetUnion { n: 8, parities: vec![Point::unit(8, 1)], cosets: vec!["01".into()] };
    assert!(bad.validate().is_err());
}

#[test]
fn generators_have_the_requested_shape() {
    let n = 12;
    let basis: Vec<Point> = (1..=9).map(|i| Point::unit(n, i)).collect();
    let affine = generate(&SetSpec::AffineSubspace { n, basis, shift: Point::unit(n, 12) }).unwrap();
    let twin = affine.twin.unwrap();
    assert_eq!(twin.volume(), 1.0 / 8.0);
    assert!(twin.contains_index(1));

    let random = generate(&SetSpec::Random { n: 14, density: 0.3, seed: 2 }).unwrap().twin.unwrap();
    assert!((random.volume() - 0.3).abs() <= 0.02);

    let maj = SetSpec::Majority { n: 9 }.membership().unwrap();
    assert!(maj.contains(&Point::from_u64(9, 0b1_1111_0000)));
    assert!(!maj.contains(&Point::from_u64(9, 0b1111_0000)));

    let union = generate(&union_spec()).unwrap().twin.unwrap();
    assert_eq!(union.volume(), 3.0 / 8.0);
}

#[test]
fn runs_are_reproducible() {
    let config = RunConfig { seed: 7, ..RunConfig::default() };
    let (r1, s1) = run(&union_spec(), &config).unwrap();
    let (r2, _) = run(&union_spec(), &config).unwrap();
    let strip = |r: &sumset_cli::RunReport| {
        let mut v = serde_json::to_value(r).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v
    };
    assert_eq!(strip(&r1), strip(&r2));
    let q = &r1.queries;
    assert_eq!(q.total, q.gl + q.prune + q.independence + q.leaves + q.volume_a_prime + q.volume_sumset);
    assert_eq!(r1.keep_leaves.len(), 3);
    assert!(r1.audit.as_ref().unwrap().pass);

    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path(), &r1, &s1).unwrap();
    for f in ["report.json", "tree.json", "transcript.jsonl"] {
        assert!(dir.path().join(f).exists());
    }
    let lines = std::fs::read_to_string(dir.path().join("transcript.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), r1.stages);
}

fn write_spec(dir: &std::path::Path, spec: &SetSpec) -> std::path::PathBuf {
    let p = dir.join("spec.json");
    std::fs::write(&p, serde_json::to_string(spec).unwrap()).unwrap();
    p
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &union_spec());
    let bin = env!("CARGO_BIN_EXE_sumset");
    let ok = Command::new(bin).args(["run", "--spec"]).arg(&spec).output().unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["n"], 16);

    let exhausted = Command::new(bin).args(["run", "--kmax", "0", "--spec"]).arg(&spec).output().unwrap();
    assert_eq!(exhausted.status.code(), Some(2));

    std::fs::write(&spec, "{\"kind\": \"nope\"}").unwrap();
    let bad = Command::new(bin).args(["run", "--spec"]).arg(&spec).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn sweep_writes_csv() {
    let grid = SweepGrid { ns: vec![12, 14], eps: vec![0.2], tau: vec![0.2], modes: vec![Mode::Explicit] };
    let spec = hyperplane_spec(12);
    let rows = sweep(&spec, &grid, &RunConfig::default()).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![12, 14]);
    assert!(rows.iter().all(|r| r.status == "ok" && r.dist == Some(0.0)));
    let mut buf = vec![];
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,eps,tau,mode,queries,dist,volume,eps_hat,bound,status");
    assert_eq!(lines.count(), 2);
}

#[test]
fn implicit_meters_do_not_grow_with_n() {
    let grid = SweepGrid { ns: vec![16, 32, 48], eps: vec![0.5], tau: vec![0.5], modes: vec![Mode::Implicit] };
    let base = RunConfig { k_max: Some(2), i_max: Some(32), seed: 3, gamma: 0.25, ..RunConfig::default() };
    let rows = sweep(&hyperplane_spec(16), &grid, &base).unwrap();
    assert!(rows.iter().all(|r| r.status == "ok"), "{rows:?}");
    let q: Vec<_> = rows.iter().map(|r| r.queries.unwrap()).collect();
    assert!(q.windows(2).all(|w| w[0] == w[1]), "{q:?}");
}
