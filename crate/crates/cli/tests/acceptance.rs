//! One line per acceptance criterion. Correctness is asserted; wall-clock
//! budgets are measured and printed but not asserted, since they depend on
//! the host.

mod common;

use std::time::{Duration, Instant};

use lusin_core::fiber::{amplify, disjoint, even_map_basic_image, verify_amplifier};
use lusin_core::games::{
    audit_run, play, BasicNestingII, CompletenessII, EuclidLine, GameKind, MidpointII, RandomI, SorgenfreyModel,
    StrictWrapper,
};
use lusin_core::polish::{ball_family_audit, eval_h, solve_preimage, BallFamily, RealsCapped};
use lusin_core::rational::Rational;
use lusin_core::scattered::cantor::{audit_scheme, cantor_scheme, ThirdsOracle};
use lusin_core::scattered::cb::{brute_ranks, cb_analyze, neighbourhood, OrdInterval, OrdinalSpace, SubSpace};
use lusin_core::scattered::map::{build_closed_open_map, verify_map, MapNode};
use lusin_core::scattered::ordinal::Ordinal;
use lusin_core::games::EOpenSet;
use lusin_core::seqcore::{validate_strict_lusin, AuditOptions, Axiom, Mode};
use lusin_core::sorgenfrey::{address, node_interval, SOpenSet, SorgenfreyAlgebra, SorgenfreyPiBase};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn o(s: &str) -> Ordinal {
    s.parse().unwrap()
}

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn scheme_axioms() -> Check {
    let rule = SorgenfreyPiBase::new();
    let mut opts = AuditOptions::<SorgenfreyAlgebra>::new(6, 12);
    opts.pi_base = true;
    opts.gap_bound = true;
    let audit = validate_strict_lusin(&rule, &SorgenfreyAlgebra, &opts);
    for ax in [Axiom::L0, Axiom::L1, Axiom::L2, Axiom::L3, Axiom::L5, Axiom::Gap, Axiom::Nonempty] {
        let v = audit.verdict(ax).ok_or_else(|| format!("{} missing", ax.name()))?;
        ensure(v.passed() && v.mode == Mode::Exact, || format!("{:?}", v))?;
    }
    Ok(format!("{} nodes", audit.nodes_checked))
}

fn address_soundness() -> Check {
    let rule = SorgenfreyPiBase::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<Rational> = (0..1000)
        .map(|_| {
            let d = 1 + (rng.next_u64() % 100_000) as i128;
            Rational::new((rng.next_u64() % (10 * d as u64)) as i128 - 5 * d, d)
        })
        .collect();
    let addrs: Vec<_> = pts.iter().map(|x| address(x, &rule, 10)).collect();
    for (x, s) in pts.iter().zip(&addrs) {
        let iv = node_interval(&rule, s).ok_or_else(|| format!("{} has no interval", s))?;
        ensure(iv.a <= *x && *x < iv.b, || format!("{} not in {}", x, s))?;
        ensure(iv.width() <= Rational::pow2(-9), || format!("{} has width {}", s, iv.width()))?;
    }
    let sep = Rational::pow2(-8);
    let mut pairs = 0u64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if (&pts[i] - &pts[j]).abs() > sep {
                pairs += 1;
                ensure(addrs[i] != addrs[j], || format!("{} and {} share {}", pts[i], pts[j], addrs[i]))?;
            }
        }
    }
    Ok(format!("1000 points, {} separated pairs", pairs))
}

fn ball_family() -> Check {
    let fam = BallFamily::new(RealsCapped);
    let audit = ball_family_audit(&fam, 4, 24, &Rational::pow2(-6), &[0, 5, 10]);
    for c in &audit.checks {
        ensure(c.passed(), || format!("{}: {:?}", c.name, c.failure))?;
    }
    for name in ["nesting", "diameter"] {
        ensure(audit.check(name).is_some_and(|c| c.exact && c.checked > 0), || format!("{} not checked exactly", name))?;
    }
    ensure(audit.check("tail-cover").is_some_and(|c| c.checked > 0), || String::from("tail cover not checked"))?;
    Ok(format!("{} balls", audit.nodes))
}

fn desk_surjectivity() -> Check {
    let fam = BallFamily::new(RealsCapped);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tol = Rational::pow2(-10);
    for _ in 0..200 {
        let d = 1 + (rng.next_u64() % 10_000) as i128;
        let y = Rational::new((rng.next_u64() % (20 * d as u64 + 1)) as i128 - 10 * d, d);
        let x = solve_preimage(&fam, &y, 10, 4096).map_err(|e| format!("{}: {}", y, e))?;
        let (h, _) = eval_h(&fam, &x, 10);
        ensure((&h - &y).abs() <= tol, || format!("{} -> {} lands at {}", y, x, h))?;
    }
    Ok(String::from("200/200 targets"))
}

fn games() -> Check {
    for seed in 0..100 {
        let one = RandomI { seed };
        let run = play(GameKind::Strong, &SorgenfreyModel, &one, &MidpointII, 25).map_err(|a| format!("seed {}: {}", seed, a.illegal))?;
        let a = audit_run(&run, &SorgenfreyModel, &Rational::one());
        ensure(a.legal() && a.nonempty, || format!("seed {}: {:?}", seed, a.violations))?;
        let (x, z) = a.witness.clone().ok_or_else(|| format!("seed {}: no witness", seed))?;
        ensure(x < z, || format!("seed {}: degenerate witness", seed))?;
        // the last answer is [x, z); the closed [x, z] sits inside one
        // component of every earlier answer
        let (last, earlier) = run.rounds.split_last().unwrap();
        ensure(last.v == SOpenSet::interval(x.clone(), z.clone()), || format!("seed {}: last answer {}", seed, last.v))?;
        for round in earlier {
            let comp = round.v.component_of(&x).ok_or_else(|| format!("seed {}: {} not in {}", seed, x, round.v))?;
            ensure(comp.contains(&z), || format!("seed {}: {} not in {}", seed, z, round.v))?;
        }
    }
    let limit = Rational::new(1, 25);
    for seed in 0..100 {
        let two = StrictWrapper::new(Box::new(CompletenessII));
        let run = play(GameKind::Strict, &EuclidLine, &RandomI { seed }, &two, 25).map_err(|a| format!("seed {}: {}", seed, a.illegal))?;
        let a = audit_run(&run, &EuclidLine, &limit);
        ensure(a.legal() && a.nonempty, || format!("strict seed {}", seed))?;
        let last: &EOpenSet = &run.rounds.last().unwrap().v;
        let d = last.diameter().ok_or_else(|| format!("strict seed {}: unbounded", seed))?;
        ensure(d < limit, || format!("strict seed {}: diameter {}", seed, d))?;
    }
    Ok(String::from("100 strong runs, 100 strict runs"))
}

fn fiber_amplification() -> Check {
    let state = amplify(10, &BasicNestingII, &StrictWrapper::new(Box::new(BasicNestingII))).map_err(|e| e.to_string())?;
    let cert = verify_amplifier(&state).map_err(|e| e.to_string())?;
    ensure(cert.stems.len() == 1024, || format!("{} pieces", cert.stems.len()))?;
    for (i, a) in state.pieces.iter().enumerate() {
        ensure(even_map_basic_image(a) == state.target, || format!("image of {}", a))?;
        for b in &state.pieces[i + 1..] {
            ensure(disjoint(a, b), || format!("{} meets {}", a, b))?;
        }
    }
    Ok(format!("1024 pieces onto N{}", cert.image))
}

fn cantor_bendixson() -> Check {
    let mut cross = 0;
    for k in 0..=4u32 {
        for m in 1..=3u64 {
            let alpha = Ordinal::term(k, m).succ();
            let space = OrdinalSpace::ordinal(&alpha).map_err(|e| e.to_string())?.whole();
            let n = match k {
                1 => 10_000 / m,
                2 => ((10_000 / m) as f64).sqrt().ceil() as u64,
                _ => 0,
            };
            let report = cb_analyze(&space, n);
            ensure(report.height == k + 1, || format!("height of {} is {}", alpha, report.height))?;
            if n > 0 {
                let (count, agree) = report.cross_check.ok_or_else(|| format!("{} not cross-checked", alpha))?;
                ensure(agree && count >= 9_000, || format!("{}: {} points, agree {}", alpha, count, agree))?;
                cross += 1;
            }
        }
    }
    let sq = OrdinalSpace::ordinal(&o("w^2+1")).unwrap().whole();
    for k in 1..20 {
        ensure(sq.rank(&(0, Ordinal::term(1, k))) == Some(1), || format!("rank of w*{}", k))?;
    }
    ensure(sq.rank(&(0, o("w^2"))) == Some(2), || String::from("rank of w^2"))?;
    Ok(format!("15 heights, {} brute-force comparisons", cross))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Rational {
    let d = 1 + (rng.next_u64() % 1_000_000) as i128;
    Rational::new((rng.next_u64() % d as u64) as i128, d)
}

fn map_compiler() -> Check {
    let space = OrdinalSpace::ordinal(&o("w^2+1")).unwrap();
    let map = build_closed_open_map(&SOpenSet::interval(r("0"), r("1")), &space).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples: Vec<Rational> = (0..1000).map(|_| random_unit(&mut rng)).collect();
    for q in &samples {
        map.eval(q).map_err(|e| e.to_string())?;
    }
    let audit = verify_map(&map, &samples, 50);
    for c in &audit.checks {
        ensure(c.failure.is_none(), || format!("{}: {:?}", c.name, c.failure))?;
    }
    // every ordinal up to the bound has an explicit preimage that maps back
    for y in Ordinal::truncation(&o("w^2"), 51) {
        let q = map.preimage_point(&(0, y.clone())).map_err(|e| e.to_string())?;
        ensure(map.eval(&q).map_err(|e| e.to_string())?.value == (0, y.clone()), || format!("preimage of {}", y))?;
    }
    let MapNode::Limit(root) = &map.root else { return Err(String::from("root is not a limit node")) };
    ensure(root.y0 == o("w^2"), || format!("root top point {}", root.y0))?;
    Ok(format!("{} nodes, {} checks", audit.nodes, audit.checks.len()))
}

fn segment_scheme() -> Check {
    let u = |_: usize| EOpenSet::interval(r("-1"), r("2"));
    let sch = cantor_scheme(&ThirdsOracle { lo: r("0") }, &u, 10).map_err(|e| e.to_string())?;
    ensure(sch.leaves().len() == 1024, || format!("{} leaves", sch.leaves().len()))?;
    let audit = audit_scheme(&sch, &u);
    ensure(audit.passed(), || format!("{:?}", audit))?;
    Ok(format!("{} segments", sch.nodes.len()))
}

fn random_below_omega_squared(rng: &mut ChaCha8Rng) -> Ordinal {
    Ordinal::from_terms([(1, rng.next_u64() % 8), (0, rng.next_u64() % 8)])
}

fn random_subspace(rng: &mut ChaCha8Rng) -> SubSpace {
    let pieces = 1 + rng.next_u64() % 3;
    SubSpace::from_pieces((0..pieces).map(|_| {
        let mut a = random_below_omega_squared(rng);
        let mut b = if rng.next_u64() % 4 == 0 { o("w^2") } else { random_below_omega_squared(rng) };
        if b < a {
            std::mem::swap(&mut a, &mut b);
        }
        (0, OrdInterval::new(a, rng.next_u64() % 2 == 0, b, rng.next_u64() % 3 != 0))
    }))
}

fn subspace_ranks() -> Check {
    let x = OrdinalSpace::ordinal(&o("w^2+1")).unwrap().whole();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let (mut seen, mut points) = (0, 0);
    while seen < 50 {
        let a = random_subspace(&mut rng);
        if a.is_empty() {
            continue;
        }
        seen += 1;
        ensure(a.height() <= x.height(), || format!("height of {}", a))?;
        let pts: Vec<Ordinal> =
            Ordinal::truncation(&o("w^2"), 12).into_iter().filter(|p| a.contains(&(0, p.clone()))).collect();
        let brute = brute_ranks(&pts, 12);
        for (p, b) in pts.iter().zip(&brute) {
            points += 1;
            let pt = (0, p.clone());
            let ra = a.rank(&pt).unwrap();
            let rx = x.rank(&pt).unwrap();
            ensure(ra == *b && ra <= rx, || format!("rank of {} in {}", p, a))?;
            for n in [0, 3, 11] {
                for (space, rk) in [(&x, rx), (&a, ra)] {
                    let nb = neighbourhood(space, &pt, n);
                    ensure(nb.contains(&pt), || format!("O_{}({}) in {}", n, p, space))?;
                    let rest = nb.without(&pt).height();
                    ensure(rest <= rk && rest <= rx, || format!("O_{}({}) in {} has height {}", n, p, space, rest))?;
                }
            }
        }
    }
    Ok(format!("50 subspaces, {} points", points))
}

fn cli_determinism() -> Check {
    for (name, args) in common::GOLDEN {
        common::check_golden(name, args)?;
    }
    Ok(format!("{} golden files", common::GOLDEN.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check, Option<u64>); 11] = [
        ("scheme axioms, depth 6 bound 12", scheme_axioms, Some(5)),
        ("address soundness", address_soundness, None),
        ("ball family, depth 4 bound 24", ball_family, Some(10)),
        ("desk surjectivity", desk_surjectivity, None),
        ("games, 100 seeds x 25 rounds", games, None),
        ("fiber amplification, depth 10", fiber_amplification, Some(10)),
        ("cantor-bendixson heights and ranks", cantor_bendixson, None),
        ("closed-open map onto w^2+1", map_compiler, None),
        ("segment scheme, depth 10", segment_scheme, None),
        ("subspace rank properties", subspace_ranks, None),
        ("cli determinism", cli_determinism, None),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let took = t.elapsed();
        let over = budget.is_some_and(|s| took > Duration::from_secs(s));
        let timing = match budget {
            Some(s) => format!("{:.2?} of {} s budget", took, s),
            None => format!("{:.2?}", took),
        };
        match &result {
            Ok(detail) if !over => println!("criterion {:>2} PASS  {}: {} ({})", i + 1, name, detail, timing),
            Ok(detail) => println!("criterion {:>2} FAIL  {}: {} but over budget ({})", i + 1, name, detail, timing),
            Err(why) => println!("criterion {:>2} FAIL  {}: {} ({})", i + 1, name, why, timing),
        }
        if let Err(why) = result {
            failed.push(format!("{}: {}", name, why));
        }
    }
    assert!(failed.is_empty(), "{:#?}", failed);
}
