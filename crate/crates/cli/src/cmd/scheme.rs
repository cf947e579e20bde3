use clap::{Subcommand, ValueEnum};
use serde_json::{json, Value};

use lusin_core::rational::Rational;
use lusin_core::seqcore::{
    validate_strict_lusin, AuditOptions, BaireAlgebra, BaireLocator, BairePoint, BaireRegion, BaireStandardBase,
    FinSeq, Outcome, SchemeAudit,
};
use lusin_core::sorgenfrey::{address, node_interval, IntervalLocator, SOpenSet, SorgenfreyAlgebra};

use super::pi_base;
use crate::parse;
use crate::report::{opt, strings, Failure, Report, Table};
use crate::Output;

#[derive(Clone, Copy, ValueEnum)]
pub enum Rule {
    Sorgenfrey,
    Baire,
}

#[derive(Subcommand)]
pub enum Command {
    /// Expand a scheme to a finite depth and check the axioms
    Audit {
        #[arg(long, value_enum, default_value = "sorgenfrey")]
        rule: Rule,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Largest child index expanded at each node
        #[arg(long, default_value_t = 8)]
        bound: u64,
        /// Extra endpoints for the Sorgenfrey base, comma separated
        #[arg(long, value_parser = parse::rational, value_delimiter = ',')]
        endpoints: Vec<Rational>,
        /// Also witness the neighbourhood axiom at the test points
        #[arg(long)]
        neighbourhoods: bool,
        /// Worker threads, 0 for all cores; the record does not depend on it
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        out: Output,
    },
    /// The address of a rational in the Sorgenfrey scheme
    Address {
        #[arg(long, value_parser = parse::rational, allow_hyphen_values = true)]
        q: Rational,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, value_parser = parse::rational, value_delimiter = ',')]
        endpoints: Vec<Rational>,
        #[command(flatten)]
        out: Output,
    },
}

fn audit_report(audit: &SchemeAudit, input: Value) -> Report {
    let mut table = Table::new(&["axiom", "mode", "outcome", "address", "i", "j", "detail"]);
    let verdicts: Vec<Value> = audit
        .verdicts
        .iter()
        .map(|v| {
            let (outcome, cx, reason) = match &v.outcome {
                Outcome::Pass => ("pass", Value::Null, Value::Null),
                Outcome::Fail(c) => (
                    "fail",
                    json!({"address": c.address.to_string(), "i": c.i, "j": c.j, "witness": c.witness}),
                    Value::Null,
                ),
                Outcome::Unsupported(r) => ("unsupported", Value::Null, Value::String(r.clone())),
            };
            let mut row = vec![v.axiom.name().to_string(), v.mode.name().to_string(), outcome.to_string()];
            match &v.outcome {
                Outcome::Fail(c) => row.extend([c.address.to_string(), opt_num(c.i), opt_num(c.j), c.witness.clone()]),
                Outcome::Unsupported(r) => row.extend([String::new(), String::new(), String::new(), r.clone()]),
                Outcome::Pass => row.extend([String::new(), String::new(), String::new(), String::new()]),
            }
            table.push(row);
            json!({"axiom": v.axiom.name(), "mode": v.mode.name(), "outcome": outcome, "counterexample": cx, "reason": reason})
        })
        .collect();
    let failed = audit.verdicts.iter().any(|v| matches!(v.outcome, Outcome::Fail(_)));
    let payload = json!({
        "label": audit.label,
        "depth": audit.depth,
        "child_bound": audit.child_bound,
        "nodes_checked": audit.nodes_checked,
        "passed": !failed,
        "verdicts": verdicts,
        "width_profile": audit.width_profile.iter().map(opt).collect::<Vec<_>>(),
        "notes": audit.notes,
    });
    // unsupported axioms are reported, not failed
    Report { kind: "audit", command: "scheme audit", input, payload, table, ok: !failed }
}

fn opt_num(x: Option<u64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn sorgenfrey_points() -> Vec<Rational> {
    ["0", "3/4", "-1/2", "5/7"].iter().map(|s| s.parse().expect("literal")).collect()
}

fn baire_points() -> Vec<BairePoint> {
    vec![BairePoint::new(vec![], vec![0]), BairePoint::new(vec![1, 2], vec![3]), BairePoint::new(vec![4], vec![0, 1])]
}

pub fn run(c: Command) -> Result<(Report, Output), Failure> {
    match c {
        Command::Audit { rule, depth, bound, endpoints, neighbourhoods, threads, out } => {
            let input = json!({
                "rule": match rule { Rule::Sorgenfrey => "sorgenfrey", Rule::Baire => "baire" },
                "depth": depth,
                "bound": bound,
                "endpoints": strings(&endpoints),
                "neighbourhoods": neighbourhoods,
            });
            let audit = match rule {
                Rule::Sorgenfrey => {
                    let r = pi_base(&endpoints);
                    let loc = IntervalLocator { rule: &r };
                    let nb = |x: &Rational| -> Vec<SOpenSet> {
                        (0..3).map(|j| SOpenSet::interval(x.clone(), x + &Rational::pow2(-j))).collect()
                    };
                    let mut opts = AuditOptions::<SorgenfreyAlgebra>::new(depth, bound);
                    opts.pi_base = true;
                    opts.gap_bound = true;
                    opts.threads = threads;
                    if neighbourhoods {
                        opts.test_points = sorgenfrey_points();
                        opts.locator = Some(&loc);
                        opts.neighbourhoods = Some(&nb);
                    }
                    validate_strict_lusin(&r, &SorgenfreyAlgebra, &opts)
                }
                Rule::Baire => {
                    if !endpoints.is_empty() {
                        return Err(Failure::Usage(String::from("--endpoints applies to the sorgenfrey rule only")));
                    }
                    let nb = |x: &BairePoint| -> Vec<BaireRegion> { (0..3).map(|j| BaireRegion::basic(x.restrict(j))).collect() };
                    let mut opts = AuditOptions::<BaireAlgebra>::new(depth, bound);
                    opts.pi_base = true;
                    opts.threads = threads;
                    if neighbourhoods {
                        opts.test_points = baire_points();
                        opts.locator = Some(&BaireLocator);
                        opts.neighbourhoods = Some(&nb);
                    }
                    validate_strict_lusin(&BaireStandardBase, &BaireAlgebra, &opts)
                }
            };
            Ok((audit_report(&audit, input), out))
        }
        Command::Address { q, depth, endpoints, out } => {
            if depth == 0 {
                return Err(Failure::Usage(String::from("--depth must be at least 1")));
            }
            let r = pi_base(&endpoints);
            let s = address(&q, &r, depth);
            let mut table = Table::new(&["length", "address", "a", "b", "width"]);
            let mut prefixes = Vec::new();
            for len in 1..=depth {
                let p: FinSeq = s.prefix(len);
                let iv = node_interval(&r, &p).ok_or_else(|| Failure::Domain(format!("node {} is not an interval", p)))?;
                table.push([len.to_string(), p.to_string(), iv.a.to_string(), iv.b.to_string(), iv.width().to_string()]);
                prefixes.push(json!({"length": len, "address": p.to_string(), "a": iv.a.to_string(), "b": iv.b.to_string()}));
            }
            let iv = node_interval(&r, &s).expect("checked above");
            let payload = json!({
                "q": q.to_string(),
                "address": s.to_string(),
                "interval": {"a": iv.a.to_string(), "b": iv.b.to_string()},
                "width": iv.width().to_string(),
                "prefixes": prefixes,
            });
            let input = json!({"q": q.to_string(), "depth": depth, "endpoints": strings(&endpoints)});
            Ok((Report { kind: "evaluation", command: "scheme address", input, payload, table, ok: true }, out))
        }
    }
}
