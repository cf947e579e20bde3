use clap::{Subcommand, ValueEnum};
use serde_json::{json, Value};

use lusin_core::polish::{
    ball_family_audit, eval_h, image_witness, open_map_eval, solve_preimage, BallFamily, PolishPresentation, RealsCapped,
};
use lusin_core::rational::Rational;
use lusin_core::seqcore::FinSeq;
use lusin_core::sorgenfrey::address;

use super::pi_base;
use crate::parse;
use crate::report::{domain, strings, Failure, Report, Table};
use crate::Output;

#[derive(Clone, Copy, ValueEnum)]
pub enum Target {
    RealsCapped,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate the open map at a rational to precision 2^-k
    Eval {
        #[arg(long, value_parser = parse::rational, allow_hyphen_values = true)]
        q: Rational,
        #[arg(long, value_enum, default_value = "reals-capped")]
        target: Target,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, value_parser = parse::rational, value_delimiter = ',')]
        endpoints: Vec<Rational>,
        #[command(flatten)]
        out: Output,
    },
    /// An address and a rational mapping within 2^-k of a target point
    Preimage {
        #[arg(long, value_parser = parse::rational, allow_hyphen_values = true)]
        y: Rational,
        #[arg(long, value_enum, default_value = "reals-capped")]
        target: Target,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Largest child index tried at each level
        #[arg(long, default_value_t = 4096)]
        bound: u64,
        #[arg(long, value_parser = parse::rational, value_delimiter = ',')]
        endpoints: Vec<Rational>,
        #[command(flatten)]
        out: Output,
    },
    /// Audit the ball family to a finite depth
    AuditBalls {
        #[arg(long, value_enum, default_value = "reals-capped")]
        target: Target,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 24)]
        bound: u64,
        /// Mesh of the net used for the tail-cover check
        #[arg(long, value_parser = parse::positive, default_value = "1/64")]
        net: Rational,
        #[arg(long, value_delimiter = ',', default_value = "0,5,10")]
        tail_starts: Vec<u64>,
        #[command(flatten)]
        out: Output,
    },
}

fn family(t: Target) -> BallFamily<RealsCapped> {
    match t {
        Target::RealsCapped => BallFamily::new(RealsCapped),
    }
}

pub fn run(c: Command) -> Result<(Report, Output), Failure> {
    match c {
        Command::Eval { q, target, k, endpoints, out } => {
            let fam = family(target);
            let pi = pi_base(&endpoints);
            let (point, err) = open_map_eval(&fam, &pi, &q, k);
            let s = address(&q, &pi, k.max(1));
            let mut table = Table::new(&["q", "k", "address", "point", "err"]);
            table.push([q.to_string(), k.to_string(), s.to_string(), point.to_string(), err.to_string()]);
            let payload = json!({"q": q.to_string(), "k": k, "address": s.to_string(), "point": point.to_string(), "err": err.to_string()});
            let input = json!({"q": q.to_string(), "target": fam.space().name(), "k": k, "endpoints": strings(&endpoints)});
            Ok((Report { kind: "evaluation", command: "map eval", input, payload, table, ok: true }, out))
        }
        Command::Preimage { y, target, k, bound, endpoints, out } => {
            let fam = family(target);
            let pi = pi_base(&endpoints);
            let tol = Rational::pow2(-(k as i64));
            let x = solve_preimage(&fam, &y, k, bound).map_err(domain)?;
            let (hx, _) = eval_h(&fam, &x, k);
            let dx = fam.space().dist(&hx, &y);
            let q = image_witness(&fam, &pi, &FinSeq::empty(), &y, k, bound).map_err(domain)?;
            let (fq, _) = open_map_eval(&fam, &pi, &q, k);
            let dq = fam.space().dist(&fq, &y);
            let ok = dx <= tol && dq <= tol;
            let mut table = Table::new(&["y", "k", "address", "h", "dist", "q", "f_q", "dist_q"]);
            table.push([
                y.to_string(),
                k.to_string(),
                x.to_string(),
                hx.to_string(),
                dx.to_string(),
                q.to_string(),
                fq.to_string(),
                dq.to_string(),
            ]);
            let payload = json!({
                "y": y.to_string(),
                "k": k,
                "tolerance": tol.to_string(),
                "address": x.to_string(),
                "h": hx.to_string(),
                "dist": dx.to_string(),
                "witness": {"q": q.to_string(), "point": fq.to_string(), "dist": dq.to_string()},
                "within_tolerance": ok,
            });
            let input = json!({"y": y.to_string(), "target": fam.space().name(), "k": k, "bound": bound, "endpoints": strings(&endpoints)});
            Ok((Report { kind: "evaluation", command: "map preimage", input, payload, table, ok }, out))
        }
        Command::AuditBalls { target, depth, bound, net, tail_starts, out } => {
            let fam = family(target);
            let audit = ball_family_audit(&fam, depth, bound, &net, &tail_starts);
            let mut table = Table::new(&["check", "exact", "checked", "passed", "address", "reason"]);
            let checks: Vec<Value> = audit
                .checks
                .iter()
                .map(|c| {
                    let (at, why) = c.failure.as_ref().map_or((String::new(), String::new()), |(s, w)| (s.to_string(), w.clone()));
                    table.push([c.name.to_string(), c.exact.to_string(), c.checked.to_string(), c.passed().to_string(), at, why]);
                    let failure = c.failure.as_ref().map_or(Value::Null, |(s, w)| json!({"address": s.to_string(), "reason": w}));
                    json!({"name": c.name, "exact": c.exact, "checked": c.checked, "passed": c.passed(), "failure": failure})
                })
                .collect();
            let payload = json!({
                "space": audit.space,
                "depth": audit.depth,
                "child_bound": audit.child_bound,
                "net": audit.net.to_string(),
                "tail_starts": audit.tail_starts,
                "nodes": audit.nodes,
                "passed": audit.passed(),
                "checks": checks,
                "notes": audit.notes,
            });
            let input = json!({"target": fam.space().name(), "depth": depth, "bound": bound, "net": net.to_string(), "tail_starts": tail_starts});
            Ok((Report { kind: "audit", command: "map audit-balls", input, payload, table, ok: audit.passed() }, out))
        }
    }
}
