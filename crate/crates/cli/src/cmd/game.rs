use clap::{Args, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lusin_core::games::{
    audit_run, play, BaireModel, BasicNestingII, CompletenessII, EuclidLine, GameKind, GreedyHalvingI, MidpointII,
    PlayerI, PlayerII, RandomI, Run, SorgenfreyModel, SpaceModel, StrictWrapper,
};
use lusin_core::rational::Rational;

use crate::parse;
use crate::report::{cell, opt, Failure, Report, Table};
use crate::Output;

#[derive(Clone, Copy, ValueEnum)]
pub enum Space {
    Sorgenfrey,
    Euclid,
    Baire,
}

fn kind(s: &str) -> Result<GameKind, String> {
    GameKind::parse(s).ok_or_else(|| String::from("expected choquet, strong or strict"))
}

#[derive(Args)]
pub struct Setup {
    #[arg(long, value_parser = kind)]
    kind: GameKind,
    #[arg(long, value_enum)]
    space: Space,
    /// Player I: random:SEED or greedy (euclid only)
    #[arg(long)]
    pi: String,
    /// Player II: midpoint (sorgenfrey; alias lemma13), completeness (euclid), basic (baire),
    /// or strict:STRATEGY
    #[arg(long)]
    pii: String,
    #[arg(long, default_value_t = 20)]
    rounds: usize,
    /// Diameter bound for strict runs; defaults to 1/rounds
    #[arg(long, value_parser = parse::positive)]
    tolerance: Option<Rational>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Play one run and audit it
    Play {
        #[command(flatten)]
        setup: Setup,
        #[command(flatten)]
        out: Output,
    },
    /// Play runs for consecutive seeds of a random player I and audit each
    Audit {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[command(flatten)]
        out: Output,
    },
}

pub trait Roster: SpaceModel + Sized + 'static {
    fn player_i(name: &str) -> Option<Box<dyn PlayerI<Self>>> {
        let seed = name.strip_prefix("random:")?.parse().ok()?;
        Some(Box::new(RandomI { seed }))
    }
    fn base_ii(name: &str) -> Option<Box<dyn PlayerII<Self>>>;
    fn player_ii(name: &str) -> Option<Box<dyn PlayerII<Self>>> {
        match name.strip_prefix("strict:") {
            Some(inner) => Some(Box::new(StrictWrapper::new(Self::player_ii(inner)?))),
            None => Self::base_ii(name),
        }
    }
}

impl Roster for SorgenfreyModel {
    fn base_ii(name: &str) -> Option<Box<dyn PlayerII<Self>>> {
        matches!(name, "midpoint" | "lemma13").then(|| Box::new(MidpointII) as Box<dyn PlayerII<Self>>)
    }
}

impl Roster for EuclidLine {
    fn player_i(name: &str) -> Option<Box<dyn PlayerI<Self>>> {
        if name == "greedy" {
            return Some(Box::new(GreedyHalvingI));
        }
        let seed = name.strip_prefix("random:")?.parse().ok()?;
        Some(Box::new(RandomI { seed }))
    }
    fn base_ii(name: &str) -> Option<Box<dyn PlayerII<Self>>> {
        (name == "completeness").then(|| Box::new(CompletenessII) as Box<dyn PlayerII<Self>>)
    }
}

impl Roster for BaireModel {
    fn base_ii(name: &str) -> Option<Box<dyn PlayerII<Self>>> {
        (name == "basic").then(|| Box::new(BasicNestingII) as Box<dyn PlayerII<Self>>)
    }
}

pub fn player_ii<M: Roster>(name: &str) -> Result<Box<dyn PlayerII<M>>, Failure> {
    M::player_ii(name).ok_or_else(|| Failure::Usage(format!("no player II {:?} on this space", name)))
}

fn player_i<M: Roster>(name: &str) -> Result<Box<dyn PlayerI<M>>, Failure> {
    M::player_i(name).ok_or_else(|| Failure::Usage(format!("no player I {:?} on this space", name)))
}

// one played and audited run
struct Outcome {
    rounds: Vec<Value>,
    rows: Vec<Vec<String>>,
    aborted: Value,
    audit: Value,
    summary: Vec<String>,
    passed: bool,
}

fn play_one<M: Roster>(space: &M, s: &Setup, pi: &str, tol: &Rational) -> Result<Outcome, Failure> {
    let one = player_i::<M>(pi)?;
    let two = player_ii::<M>(&s.pii)?;
    let (run, aborted): (Run<M>, _) = match play(s.kind, space, one.as_ref(), two.as_ref(), s.rounds) {
        Ok(run) => (run, None),
        Err(a) => (a.partial, Some(a.illegal)),
    };
    let mut rows = Vec::new();
    let rounds = run
        .rounds
        .iter()
        .enumerate()
        .map(|(n, r)| {
            rows.push(vec![n.to_string(), r.u.to_string(), cell(&r.x), r.v.to_string()]);
            json!({"round": n, "u": r.u.to_string(), "x": opt(&r.x), "v": r.v.to_string()})
        })
        .collect();
    let a = audit_run(&run, space, tol);
    let witness = a.witness.as_ref().map_or(Value::Null, |(x, z)| json!([x.to_string(), z.to_string()]));
    let passed = aborted.is_none() && a.passed();
    let audit = json!({
        "legal": a.legal(),
        "violations": a.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "intersection": a.intersection.to_string(),
        "nonempty": a.nonempty,
        "diameter": opt(&a.diameter),
        "tolerance": a.tolerance.to_string(),
        "within_tolerance": a.within_tolerance,
        "witness": witness,
        "notes": a.notes,
        "passed": a.passed(),
    });
    let summary = vec![
        a.legal().to_string(),
        a.nonempty.to_string(),
        cell(&a.diameter),
        cell(&a.within_tolerance),
        a.witness.as_ref().map_or_else(String::new, |(x, z)| format!("[{}, {}]", x, z)),
        passed.to_string(),
    ];
    let aborted = aborted.map_or(Value::Null, |i| {
        json!({"player": i.player.to_string(), "round": i.round, "reason": i.reason.name()})
    });
    Ok(Outcome { rounds, rows, aborted, audit, summary, passed })
}

fn space_name(s: Space) -> &'static str {
    match s {
        Space::Sorgenfrey => SorgenfreyModel.name(),
        Space::Euclid => EuclidLine.name(),
        Space::Baire => BaireModel.name(),
    }
}

fn play_on(s: &Setup, pi: &str, tol: &Rational) -> Result<Outcome, Failure> {
    match s.space {
        Space::Sorgenfrey => play_one(&SorgenfreyModel, s, pi, tol),
        Space::Euclid => play_one(&EuclidLine, s, pi, tol),
        Space::Baire => play_one(&BaireModel, s, pi, tol),
    }
}

fn input(s: &Setup, tol: &Rational) -> Value {
    json!({
        "kind": s.kind.name(),
        "space": space_name(s.space),
        "pi": s.pi,
        "pii": s.pii,
        "rounds": s.rounds,
        "tolerance": tol.to_string(),
    })
}

pub fn run(c: Command) -> Result<(Report, Output), Failure> {
    match c {
        Command::Play { setup, out } => {
            let tol = tolerance(&setup)?;
            let o = play_on(&setup, &setup.pi, &tol)?;
            let payload = json!({
                "rounds": o.rounds,
                "aborted": o.aborted,
                "audit": o.audit,
                "passed": o.passed,
            });
            let table = Table { header: vec!["round", "u", "x", "v"], rows: o.rows };
            let input = input(&setup, &tol);
            Ok((Report { kind: "run", command: "game play", input, payload, table, ok: o.passed }, out))
        }
        Command::Audit { setup, seeds, out } => {
            let tol = tolerance(&setup)?;
            let start: u64 = match setup.pi.strip_prefix("random:") {
                Some(s) => s.parse().map_err(|_| Failure::Usage(format!("bad seed in {:?}", setup.pi)))?,
                None if setup.pi == "random" => 0,
                None => return Err(Failure::Usage(String::from("game audit needs --pi random or random:START"))),
            };
            let mut table = Table::new(&["seed", "legal", "nonempty", "diameter", "within_tolerance", "witness", "passed"]);
            let mut runs = Vec::new();
            let mut failures = 0u64;
            for seed in start..start + seeds {
                let o = play_on(&setup, &format!("random:{}", seed), &tol)?;
                failures += u64::from(!o.passed);
                table.push(std::iter::once(seed.to_string()).chain(o.summary));
                runs.push(json!({"seed": seed, "aborted": o.aborted, "audit": o.audit, "passed": o.passed}));
            }
            let payload = json!({"runs": runs, "failures": failures, "passed": failures == 0});
            let mut input = input(&setup, &tol);
            input["seeds"] = json!(seeds);
            Ok((Report { kind: "audit", command: "game audit", input, payload, table, ok: failures == 0 }, out))
        }
    }
}

fn tolerance(s: &Setup) -> Result<Rational, Failure> {
    if s.rounds == 0 {
        return Err(Failure::Usage(String::from("--rounds must be at least 1")));
    }
    Ok(s.tolerance.clone().unwrap_or_else(|| Rational::new(1, s.rounds as i128)))
}
