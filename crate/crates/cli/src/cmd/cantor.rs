use clap::Subcommand;
use serde_json::json;

use lusin_core::games::EOpenSet;
use lusin_core::rational::Rational;
use lusin_core::scattered::cantor::{audit_scheme, cantor_scheme, ThirdsOracle};

use crate::parse;
use crate::report::{domain, opt, strings, Failure, Report, Table};
use crate::Output;

#[derive(Subcommand)]
pub enum Command {
    /// Nested disjoint segments [a_s, b_s] inside [lo, +inf) for binary s
    Scheme {
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Left end of the set the segments start from
        #[arg(long, value_parser = parse::rational, default_value = "0", allow_hyphen_values = true)]
        lo: Rational,
        /// Open sets U_0, U_1, ... separated by ';'; the last one repeats
        #[arg(long, value_parser = parse::eopen, value_delimiter = ';', default_value = "(-1, 2)", allow_hyphen_values = true)]
        u: Vec<EOpenSet>,
        #[command(flatten)]
        out: Output,
    },
}

pub fn run(c: Command) -> Result<(Report, Output), Failure> {
    let Command::Scheme { depth, lo, u, out } = c;
    if depth > 16 {
        return Err(Failure::Usage(String::from("--depth is limited to 16")));
    }
    let opens = |n: usize| u[n.min(u.len() - 1)].clone();
    let sch = cantor_scheme(&ThirdsOracle { lo: lo.clone() }, &opens, depth).map_err(domain)?;
    let audit = audit_scheme(&sch, &opens);
    let mut table = Table::new(&["seq", "a", "b"]);
    let segments: Vec<_> = sch
        .nodes
        .iter()
        .map(|(s, a, b)| {
            table.push([s.to_string(), a.to_string(), b.to_string()]);
            json!({"seq": s.to_string(), "a": a.to_string(), "b": b.to_string()})
        })
        .collect();
    let payload = json!({
        "depth": sch.depth,
        "segments": segments,
        "audit": {
            "segments": audit.segments,
            "nondegenerate": opt(&audit.nondegenerate),
            "nesting": opt(&audit.nesting),
            "siblings": opt(&audit.siblings),
            "containment": opt(&audit.containment),
            "leaves_disjoint": opt(&audit.leaves_disjoint),
            "passed": audit.passed(),
        },
    });
    let input = json!({"depth": depth, "lo": lo.to_string(), "oracle": "thirds", "u": strings(&u)});
    Ok((Report { kind: "audit", command: "cantor scheme", input, payload, table, ok: audit.passed() }, out))
}
