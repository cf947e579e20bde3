use lusin_core::rational::Rational;
use lusin_core::scattered::cantor::{audit_scheme, cantor_scheme, ThirdsOracle};
use lusin_core::scattered::cb::{brute_ranks, cb_analyze, neighbourhood, OrdInterval, OrdinalSpace, SubSpace};
use lusin_core::scattered::map::{build_closed_open_map, verify_map, MapNode};
use lusin_core::scattered::ordinal::Ordinal;
use lusin_core::games::EOpenSet;
use lusin_core::sorgenfrey::SOpenSet;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::{RngCore, SeedableRng};

fn o(s: &str) -> Ordinal {
    s.parse().unwrap()
}

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Rational {
    let d = 1 + (rng.next_u64() % 1_000_000) as i128;
    Rational::new((rng.next_u64() % d as u64) as i128, d)
}

#[test]
fn heights_of_successor_ordinals() {
    for k in 0..=4u32 {
        for m in 1..=3u64 {
            let alpha = Ordinal::term(k, m).succ();
            let space = OrdinalSpace::ordinal(&alpha).unwrap().whole();
            // about 10^4 sample points for the brute-force comparison
            let n = match k {
                0 => 0,
                1 => 10_000 / m,
                2 => ((10_000 / m) as f64).sqrt().ceil() as u64,
                _ => 0,
            };
            let report = cb_analyze(&space, n);
            assert_eq!(report.height, k + 1, "{}", alpha);
            assert_eq!(report.levels.len(), (k + 1) as usize);
            if n > 0 {
                let (count, agree) = report.cross_check.expect("brute force ran");
                assert!(agree, "{}", alpha);
                assert!(count >= 9_000, "{} sampled only {}", alpha, count);
            }
        }
    }
    let sq = OrdinalSpace::ordinal(&o("w^2+1")).unwrap().whole();
    for k in 1..20 {
        assert_eq!(sq.rank(&(0, Ordinal::term(1, k))), Some(1));
    }
    assert_eq!(sq.rank(&(0, o("w^2"))), Some(2));
    assert_eq!(sq.rank(&(0, o("0"))), Some(0));
}

#[test]
fn omega_plus_one_levels() {
    let report = cb_analyze(&OrdinalSpace::ordinal(&o("w+1")).unwrap().whole(), 101);
    assert_eq!(report.height, 2);
    assert_eq!(report.levels[1].to_string(), "{w}");
    assert_eq!(report.cross_check, Some((102, true)));
}

#[test]
fn omega_squared_map_audit() {
    let space = OrdinalSpace::ordinal(&o("w^2+1")).unwrap();
    let map = build_closed_open_map(&SOpenSet::interval(r("0"), r("1")), &space).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples: Vec<Rational> = (0..1000).map(|_| random_unit(&mut rng)).collect();
    for q in &samples {
        let e = map.eval(q).unwrap();
        assert!(e.limit_depth <= 3);
    }
    let audit = verify_map(&map, &samples, 50);
    assert!(audit.passed(), "{:?}", audit.checks);
    assert_eq!(audit.check("surjectivity").unwrap().checked, 51 * 51 + 1);
    assert_eq!(audit.check("continuity").unwrap().checked, 102);
    let MapNode::Limit(root) = &map.root else { panic!("root is a limit node") };
    assert_eq!(root.y0, o("w^2"));
}

#[test]
fn omega_plus_one_map() {
    let space = OrdinalSpace::ordinal(&o("w+1")).unwrap();
    let map = build_closed_open_map(&SOpenSet::interval(r("0"), r("1")), &space).unwrap();
    assert_eq!(map.eval(&r("0")).unwrap().value, (0, o("w")));
    assert_eq!(map.eval(&r("3/4")).unwrap().value, (0, o("0")));
    assert_eq!(map.eval(&r("1/5")).unwrap().value, (0, o("2")));
    for n in 0..=50 {
        assert_eq!(map.preimage_point(&(0, Ordinal::finite(n))).unwrap(), Rational::pow2(-(n as i64) - 1));
    }
    assert!(map.eval(&r("1")).is_err());
}

#[test]
fn maps_on_scattered_domains() {
    let domain: SOpenSet = "[-3,-1) u [0,1/2) u [5,+inf)".parse().unwrap();
    for blocks in [&["w^3+1"][..], &["w*2+4", "3", "w^2+w+1"], &["w^2*3+w*2+1"]] {
        let alphas: Vec<Ordinal> = blocks.iter().map(|s| o(s)).collect();
        let space = OrdinalSpace::sum(&alphas).unwrap();
        let map = build_closed_open_map(&domain, &space).unwrap();
        let samples: Vec<Rational> = (0..400).map(|i| Rational::new(i * 3 - 600, 47)).collect();
        let audit = verify_map(&map, &samples, 4);
        assert!(audit.passed(), "{:?}: {:?}", blocks, audit.checks);
    }
}

#[test]
fn segment_scheme_depth_ten() {
    let u = |_: usize| EOpenSet::interval(r("-1"), r("2"));
    let sch = cantor_scheme(&ThirdsOracle { lo: r("0") }, &u, 10).unwrap();
    assert_eq!(sch.nodes.len(), 2047);
    assert_eq!(sch.leaves().len(), 1024);
    let audit = audit_scheme(&sch, &u);
    assert!(audit.passed(), "{:?}", audit);
}

fn random_ordinal_below_omega_squared(rng: &mut ChaCha8Rng) -> Ordinal {
    Ordinal::from_terms([(1, rng.next_u64() % 8), (0, rng.next_u64() % 8)])
}

fn random_subspace(rng: &mut ChaCha8Rng) -> SubSpace {
    let pieces = 1 + rng.next_u64() % 3;
    SubSpace::from_pieces((0..pieces).map(|_| {
        let mut a = random_ordinal_below_omega_squared(rng);
        let mut b = if rng.next_u64() % 4 == 0 { o("w^2") } else { random_ordinal_below_omega_squared(rng) };
        if b < a {
            std::mem::swap(&mut a, &mut b);
        }
        (0, OrdInterval::new(a, rng.next_u64() % 2 == 0, b, rng.next_u64() % 3 != 0))
    }))
}

#[test]
fn subspace_rank_properties() {
    let x = OrdinalSpace::ordinal(&o("w^2+1")).unwrap().whole();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let mut seen = 0;
    while seen < 50 {
        let a = random_subspace(&mut rng);
        if a.is_empty() {
            continue;
        }
        seen += 1;
        assert!(a.height() <= x.height(), "{}", a);
        let pts: Vec<Ordinal> =
            Ordinal::truncation(&o("w^2"), 12).into_iter().filter(|p| a.contains(&(0, p.clone()))).collect();
        let brute = brute_ranks(&pts, 12);
        for (p, b) in pts.iter().zip(&brute) {
            let pt = (0, p.clone());
            let ra = a.rank(&pt).unwrap();
            let rx = x.rank(&pt).unwrap();
            assert_eq!(ra, *b, "rank of {} in {}", p, a);
            assert!(ra <= rx, "rank of {} in {}", p, a);
            for n in [0, 3, 11] {
                for (space, r) in [(&x, rx), (&a, ra)] {
                    let nb = neighbourhood(space, &pt, n);
                    assert!(nb.contains(&pt));
                    assert!(nb.without(&pt).height() <= r, "O({}) in {}", p, space);
                    assert!(nb.without(&pt).height() <= rx);
                }
            }
        }
    }
}
