//! Nested disjoint segment schemes inside a set without isolated points.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::games::EOpenSet;
use crate::rational::Rational;
use crate::seqcore::FinSeq;

/// Access to a set `B` with no isolated points.
pub trait PointOracle {
    /// Some point of `B`.
    fn start(&self) -> Rational;
    /// Two points of `B` strictly between `a` and `b`, increasing.
    fn pick_two(&self, a: &Rational, b: &Rational) -> (Rational, Rational);
}

/// `B = [lo, hi]`, answering with the thirds of each interval.
#[derive(Clone, Debug)]
pub struct ThirdsOracle {
    pub lo: Rational,
}

impl PointOracle for ThirdsOracle {
    fn start(&self) -> Rational {
        self.lo.clone()
    }

    fn pick_two(&self, a: &Rational, b: &Rational) -> (Rational, Rational) {
        let third = &(b - a) / &Rational::integer(3);
        let p = a + &third;
        let q = &p + &third;
        (p, q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeError {
    /// The oracle answered with points that are equal, out of order or not inside.
    Degenerate { at: FinSeq, points: (Rational, Rational) },
    /// `U_n` misses the point the segment has to start at.
    Uncovered { at: FinSeq, point: Rational },
}

impl fmt::Display for SchemeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeError::Degenerate { at, points } => {
                write!(f, "oracle returned {} and {} below {}", points.0, points.1, seq_label(at.digits()))
            }
            SchemeError::Uncovered { at, point } => write!(f, "open set misses {} at {}", point, seq_label(at.digits())),
        }
    }
}

pub fn seq_label(s: &[u64]) -> String {
    let parts: Vec<String> = s.iter().map(|k| format!("{}", k)).collect();
    format!("<{}>", parts.join(""))
}

/// `[a, b]` for every binary sequence up to the depth, in breadth-first
/// order (root first, then `<0>`, `<1>`, `<00>`, ...).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentScheme {
    pub depth: usize,
    pub nodes: Vec<(FinSeq, Rational, Rational)>,
}

impl SegmentScheme {
    pub fn leaves(&self) -> &[(FinSeq, Rational, Rational)] {
        let n = self.nodes.len();
        &self.nodes[n - (1usize << self.depth)..]
    }

    fn index(s: &[u64]) -> usize {
        // breadth-first heap index
        s.iter().fold(0usize, |i, &k| 2 * i + 1 + k as usize)
    }

    pub fn get(&self, s: &[u64]) -> Option<&(FinSeq, Rational, Rational)> {
        self.nodes.get(Self::index(s)).filter(|n| n.0.digits() == s)
    }
}

// right end of the component of u holding p
fn room(u: &EOpenSet, p: &Rational) -> Option<Option<Rational>> {
    u.parts()
        .iter()
        .find(|c| c.lo.as_ref().map_or(true, |l| l < p) && c.hi.as_ref().map_or(true, |h| p < h))
        .map(|c| c.hi.clone())
}

fn cap(p: &Rational, e: &Option<Rational>, b: Rational) -> Rational {
    match e {
        Some(e) => b.min(p + &(e - p).halve()),
        None => b,
    }
}

/// Builds `[a_s, b_s]` for `length(s) <= depth`: the root starts at the
/// oracle's point, children at the two points picked inside the parent;
/// right ends halve the room to the sibling, the parent's end and the end
/// of the `U_(length)` component.
pub fn cantor_scheme(
    oracle: &dyn PointOracle,
    u: &dyn Fn(usize) -> EOpenSet,
    depth: usize,
) -> Result<SegmentScheme, SchemeError> {
    let a = oracle.start();
    let e = room(&u(0), &a).ok_or_else(|| SchemeError::Uncovered { at: FinSeq::empty(), point: a.clone() })?;
    let b = cap(&a, &e, &a + &Rational::one());
    let mut nodes = alloc::vec![(FinSeq::empty(), a, b)];
    let mut level = 0..1;
    for len in 1..=depth {
        let open = u(len);
        let start = nodes.len();
        for i in level.clone() {
            let (s, a, b) = nodes[i].clone();
            let (p, q) = oracle.pick_two(&a, &b);
            if !(a < p && p < q && q < b) {
                return Err(SchemeError::Degenerate { at: s, points: (p, q) });
            }
            let gap = (&q - &p).halve();
            for (k, x) in [(0u64, &p), (1, &q)] {
                let t = s.extend(k);
                let e = room(&open, x).ok_or_else(|| SchemeError::Uncovered { at: t.clone(), point: x.clone() })?;
                let end = (x + &gap).min(x + &(&b - x).halve());
                let end = cap(x, &e, end);
                nodes.push((t, x.clone(), end));
            }
        }
        level = start..nodes.len();
    }
    Ok(SegmentScheme { depth, nodes })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeAudit {
    pub segments: usize,
    pub nondegenerate: Option<String>,
    pub nesting: Option<String>,
    pub siblings: Option<String>,
    pub containment: Option<String>,
    pub leaves_disjoint: Option<String>,
}

impl SchemeAudit {
    pub fn passed(&self) -> bool {
        [&self.nondegenerate, &self.nesting, &self.siblings, &self.containment, &self.leaves_disjoint]
            .iter()
            .all(|f| f.is_none())
    }
}

fn closed_inside(u: &EOpenSet, a: &Rational, b: &Rational) -> bool {
    u.parts().iter().any(|c| c.lo.as_ref().map_or(true, |l| l < a) && c.hi.as_ref().map_or(true, |h| b < h))
}

/// Re-checks a scheme exactly: `a < b`, nesting, disjoint siblings,
/// `[a_s, b_s]` inside `U_(length s)`, and all leaves pairwise disjoint.
pub fn audit_scheme(scheme: &SegmentScheme, u: &dyn Fn(usize) -> EOpenSet) -> SchemeAudit {
    let mut out = SchemeAudit {
        segments: scheme.nodes.len(),
        nondegenerate: None,
        nesting: None,
        siblings: None,
        containment: None,
        leaves_disjoint: None,
    };
    let note = |slot: &mut Option<String>, s: &FinSeq| {
        if slot.is_none() {
            *slot = Some(seq_label(s.digits()));
        }
    };
    let opens: Vec<EOpenSet> = (0..=scheme.depth).map(u).collect();
    for (s, a, b) in &scheme.nodes {
        if a >= b {
            note(&mut out.nondegenerate, s);
        }
        if !closed_inside(&opens[s.len()], a, b) {
            note(&mut out.containment, s);
        }
        if let Some((_, pa, pb)) = s.digits().split_last().and_then(|(_, p)| scheme.get(p)) {
            if !(pa <= a && b <= pb) {
                note(&mut out.nesting, s);
            }
        }
        if s.len() < scheme.depth {
            match (scheme.get(s.extend(0).digits()), scheme.get(s.extend(1).digits())) {
                (Some((_, _, lb)), Some((_, ra, _))) if lb < ra => {}
                _ => note(&mut out.siblings, s),
            }
        }
    }
    let mut leaves: Vec<&(FinSeq, Rational, Rational)> = scheme.leaves().iter().collect();
    leaves.sort_by(|x, y| x.1.cmp(&y.1));
    if let Some(w) = leaves.windows(2).find(|w| w[0].2 >= w[1].1) {
        out.leaves_disjoint = Some(format!("{} and {}", seq_label(w[0].0.digits()), seq_label(w[1].0.digits())));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn wide(_: usize) -> EOpenSet {
        EOpenSet::interval(r("-1"), r("2"))
    }

    #[test]
    fn thirds_depth_one() {
        let sch = cantor_scheme(&ThirdsOracle { lo: r("0") }, &wide, 1).unwrap();
        assert_eq!(sch.nodes[0], (FinSeq::empty(), r("0"), r("1")));
        assert_eq!(sch.nodes[1], (FinSeq::from_digits(alloc::vec![0]), r("1/3"), r("1/2")));
        assert_eq!(sch.nodes[2], (FinSeq::from_digits(alloc::vec![1]), r("2/3"), r("5/6")));
    }

    #[test]
    fn depth_ten() {
        let sch = cantor_scheme(&ThirdsOracle { lo: r("0") }, &wide, 10).unwrap();
        assert_eq!(sch.leaves().len(), 1024);
        let audit = audit_scheme(&sch, &wide);
        assert!(audit.passed(), "{:?}", audit);
    }

    struct Stuck;

    impl PointOracle for Stuck {
        fn start(&self) -> Rational {
            Rational::zero()
        }
        fn pick_two(&self, a: &Rational, _: &Rational) -> (Rational, Rational) {
            (a.clone(), a.clone())
        }
    }

    #[test]
    fn degenerate_oracle_is_rejected() {
        assert!(matches!(cantor_scheme(&Stuck, &wide, 2), Err(SchemeError::Degenerate { .. })));
    }

    #[test]
    fn shrinking_open_sets_bound_the_segments() {
        let u = |_: usize| EOpenSet::interval(r("-1"), r("3/4"));
        let sch = cantor_scheme(&ThirdsOracle { lo: r("0") }, &u, 6).unwrap();
        assert_eq!(sch.nodes[0].2, r("3/8"));
        assert!(audit_scheme(&sch, &u).passed());
        let miss = |n: usize| if n < 2 { wide(n) } else { EOpenSet::interval(r("1/2"), r("2")) };
        assert!(matches!(cantor_scheme(&ThirdsOracle { lo: r("0") }, &miss, 3), Err(SchemeError::Uncovered { .. })));
    }
}
