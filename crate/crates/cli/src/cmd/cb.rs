use clap::{Args, Subcommand};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use lusin_core::rational::Rational;
use lusin_core::scattered::cb::{cb_analyze, OrdPoint, OrdinalSpace};
use lusin_core::scattered::map::{build_closed_open_map, verify_map, ClosedOpenMap, MapNode, Step};
use lusin_core::scattered::ordinal::Ordinal;
use lusin_core::sorgenfrey::SOpenSet;

use crate::parse;
use crate::report::{domain, strings, Failure, Report, Table};
use crate::Output;

#[derive(Args)]
pub struct Target {
    /// Successor ordinals, comma separated for a sum of spaces [0, a] + [0, b] + ...
    #[arg(long, value_parser = parse::ordinal, value_delimiter = ',', required = true)]
    ordinal: Vec<Ordinal>,
}

#[derive(Args)]
pub struct MapSetup {
    #[command(flatten)]
    target: Target,
    /// Clopen Sorgenfrey domain, e.g. "[0,1) u [2,+inf)"
    #[arg(long, value_parser = parse::sopen, default_value = "[0,1)", allow_hyphen_values = true)]
    domain: SOpenSet,
}

#[derive(Subcommand)]
pub enum Command {
    /// Height and levels of an ordinal space
    Analyze {
        #[command(flatten)]
        target: Target,
        /// Digit bound of the brute-force cross-check
        #[arg(long, default_value_t = 101)]
        truncation: u64,
        /// Points whose rank to report, as ORD or BLOCK:ORD
        #[arg(long, value_parser = parse::ord_point, value_delimiter = ';')]
        rank: Vec<OrdPoint>,
        #[command(flatten)]
        out: Output,
    },
    /// Compile a continuous surjection from the domain and expand its tree
    BuildMap {
        #[command(flatten)]
        setup: MapSetup,
        /// Levels of the tree to expand
        #[arg(long, default_value_t = 2)]
        expand: usize,
        /// Children listed per limit node
        #[arg(long, default_value_t = 3)]
        children: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate the compiled map and its explicit preimages
    EvalMap {
        #[command(flatten)]
        setup: MapSetup,
        #[arg(long, value_parser = parse::rational, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<Rational>,
        /// Points to pull back, as ORD or BLOCK:ORD
        #[arg(long, value_parser = parse::ord_point, value_delimiter = ';')]
        y: Vec<OrdPoint>,
        #[command(flatten)]
        out: Output,
    },
    /// Check partition, continuity and surjectivity of the compiled map
    VerifyMap {
        #[command(flatten)]
        setup: MapSetup,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        bound: u32,
        #[command(flatten)]
        out: Output,
    },
}

fn space(t: &Target) -> Result<OrdinalSpace, Failure> {
    OrdinalSpace::sum(&t.ordinal).map_err(domain)
}

fn point(p: &OrdPoint) -> String {
    if p.0 == 0 {
        p.1.to_string()
    } else {
        format!("#{}:{}", p.0, p.1)
    }
}

fn step(s: &Step) -> String {
    match s {
        Step::Part(i) => format!("part:{}", i),
        Step::Piece(n) => format!("piece:{}", n),
        Step::Anchor => String::from("anchor"),
        Step::Leaf => String::from("leaf"),
    }
}

fn compile(s: &MapSetup) -> Result<ClosedOpenMap, Failure> {
    build_closed_open_map(&s.domain, &space(&s.target)?).map_err(domain)
}

fn setup_input(s: &MapSetup) -> Value {
    json!({"ordinal": strings(&s.target.ordinal), "domain": s.domain.to_string()})
}

fn node_json(node: &MapNode, path: &str, depth: usize, children: u32, table: &mut Table) -> Value {
    let (kind, detail, mut v) = match node {
        MapNode::Leaf { domain, value } => {
            ("leaf", point(value), json!({"domain": domain.to_string(), "value": point(value)}))
        }
        MapNode::Sum { domain, target, parts, .. } => (
            "sum",
            format!("{} parts", parts.len()),
            json!({"domain": domain.to_string(), "target": target.to_string(), "parts": strings(parts)}),
        ),
        MapNode::Limit(l) => (
            "limit",
            format!("{} -> {}", l.z0(), point(&(l.block, l.y0.clone()))),
            json!({
                "domain": l.domain.to_string(),
                "target": node.target().to_string(),
                "anchor": {"a": l.a.to_string(), "w": l.w.to_string()},
                "z0": l.z0().to_string(),
                "y0": point(&(l.block, l.y0.clone())),
            }),
        ),
    };
    table.push([path.to_string(), kind.to_string(), node.domain().to_string(), node.target().to_string(), detail]);
    v["type"] = json!(kind);
    if depth > 0 && !matches!(node, MapNode::Leaf { .. }) {
        let kids: Vec<Value> = node
            .children(children)
            .iter()
            .enumerate()
            .map(|(i, c)| node_json(c, &format!("{}/{}", path, i), depth - 1, children, table))
            .collect();
        v["children"] = Value::Array(kids);
    }
    v
}

// uniform-ish rationals in a bounded window of a random component
fn sample(domain: &SOpenSet, rng: &mut ChaCha8Rng) -> Rational {
    let segs = domain.segments();
    let s = if segs.len() > 1 { &segs[(rng.next_u64() % segs.len() as u64) as usize] } else { &segs[0] };
    let (a, b) = match (&s.lo, &s.hi) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        (Some(a), None) => (a.clone(), a + &Rational::one()),
        (None, Some(b)) => (b - &Rational::one(), b.clone()),
        (None, None) => (Rational::zero(), Rational::one()),
    };
    let d = 1 + (rng.next_u64() % 1_000_000) as i128;
    let u = Rational::new((rng.next_u64() % d as u64) as i128, d);
    &a + &(&(&b - &a) * &u)
}

pub fn run(c: Command) -> Result<(Report, Output), Failure> {
    match c {
        Command::Analyze { target, truncation, rank, out } => {
            let sp = space(&target)?;
            let report = cb_analyze(&sp.whole(), truncation);
            let mut table = Table::new(&["alpha", "points"]);
            let levels: Vec<Value> = report
                .levels
                .iter()
                .map(|l| {
                    table.push([l.alpha.to_string(), l.to_string()]);
                    json!({"alpha": l.alpha, "points": l.to_string()})
                })
                .collect();
            let ranks: Vec<Value> = rank.iter().map(|p| json!({"point": point(p), "rank": report.rank(p)})).collect();
            let cross = report.cross_check.map_or(Value::Null, |(n, agree)| json!({"points": n, "agree": agree}));
            let ok = report.cross_check.map_or(true, |(_, agree)| agree);
            let payload = json!({
                "space": sp.to_string(),
                "height": report.height,
                "levels": levels,
                "cross_check": cross,
                "ranks": ranks,
            });
            let input = json!({
                "ordinal": strings(&target.ordinal),
                "truncation": truncation,
                "rank": rank.iter().map(point).collect::<Vec<_>>(),
            });
            Ok((Report { kind: "cb-report", command: "cb analyze", input, payload, table, ok }, out))
        }
        Command::BuildMap { setup, expand, children, out } => {
            if expand > 6 || children > 16 {
                return Err(Failure::Usage(String::from("--expand is limited to 6 and --children to 16")));
            }
            let map = compile(&setup)?;
            let mut table = Table::new(&["path", "type", "domain", "target", "detail"]);
            let tree = node_json(&map.root, "", expand, children, &mut table);
            let payload = json!({"space": map.space.to_string(), "root": tree});
            let mut input = setup_input(&setup);
            input["expand"] = json!(expand);
            input["children"] = json!(children);
            Ok((Report { kind: "cb-report", command: "cb build-map", input, payload, table, ok: true }, out))
        }
        Command::EvalMap { setup, q, y, out } => {
            if q.is_empty() && y.is_empty() {
                return Err(Failure::Usage(String::from("give --q, --y or both")));
            }
            let map = compile(&setup)?;
            let mut table = Table::new(&["direction", "input", "output", "path", "limit_depth"]);
            let mut evals = Vec::new();
            for x in &q {
                let e = map.eval(x).map_err(domain)?;
                let path: Vec<String> = e.path.iter().map(step).collect();
                table.push(["eval".into(), x.to_string(), point(&e.value), path.join(" "), e.limit_depth.to_string()]);
                evals.push(json!({"q": x.to_string(), "value": point(&e.value), "path": path, "limit_depth": e.limit_depth}));
            }
            let mut pre = Vec::new();
            for p in &y {
                let x = map.preimage_point(p).map_err(domain)?;
                table.push(["preimage".into(), point(p), x.to_string(), String::new(), String::new()]);
                pre.push(json!({"y": point(p), "q": x.to_string()}));
            }
            let payload = json!({"space": map.space.to_string(), "evaluations": evals, "preimages": pre});
            let mut input = setup_input(&setup);
            input["q"] = strings(&q);
            input["y"] = json!(y.iter().map(point).collect::<Vec<_>>());
            Ok((Report { kind: "evaluation", command: "cb eval-map", input, payload, table, ok: true }, out))
        }
        Command::VerifyMap { setup, samples, seed, bound, out } => {
            let map = compile(&setup)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Rational> = (0..samples).map(|_| sample(&setup.domain, &mut rng)).collect();
            let audit = verify_map(&map, &pts, bound);
            let mut table = Table::new(&["check", "checked", "passed", "failure"]);
            let checks: Vec<Value> = audit
                .checks
                .iter()
                .map(|c| {
                    table.push([c.name.to_string(), c.checked.to_string(), c.failure.is_none().to_string(), c.failure.clone().unwrap_or_default()]);
                    json!({"name": c.name, "checked": c.checked, "passed": c.failure.is_none(), "failure": c.failure})
                })
                .collect();
            let payload = json!({"space": map.space.to_string(), "nodes": audit.nodes, "checks": checks, "passed": audit.passed()});
            let mut input = setup_input(&setup);
            input["samples"] = json!(samples);
            input["seed"] = json!(seed);
            input["bound"] = json!(bound);
            Ok((Report { kind: "audit", command: "cb verify-map", input, payload, table, ok: audit.passed() }, out))
        }
    }
}
