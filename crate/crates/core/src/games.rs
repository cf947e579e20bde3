//! Choquet, strong Choquet and strict Choquet games over pluggable open-set
//! algebras, with the explicit Player II strategies.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::Rational;
use crate::seqcore::{BaireAlgebra, BairePoint, BaireRegion, FinSeq, SetAlgebra};
use crate::sorgenfrey::{SOpenSet, Segment};

/// An open-set algebra with sampling, plus optional metric extras.
pub trait SpaceModel {
    type Set: Clone + Eq + fmt::Debug + fmt::Display;
    type Point: Clone + Eq + fmt::Debug + fmt::Display;

    fn name(&self) -> &'static str;
    fn universe(&self) -> Self::Set;
    fn is_empty(&self, a: &Self::Set) -> bool;
    fn intersect(&self, a: &Self::Set, b: &Self::Set) -> Self::Set;
    fn is_subset(&self, a: &Self::Set, b: &Self::Set) -> bool;
    fn contains(&self, a: &Self::Set, p: &Self::Point) -> bool;
    fn sample_point(&self, a: &Self::Set) -> Option<Self::Point>;

    /// A random nonempty open subset of a nonempty `a`.
    fn random_open(&self, a: &Self::Set, rng: &mut dyn RngCore) -> Self::Set;
    /// A random point of a nonempty `a`.
    fn random_point(&self, a: &Self::Set, rng: &mut dyn RngCore) -> Self::Point;

    fn diameter(&self, _a: &Self::Set) -> Option<Rational> {
        None
    }

    /// A nonempty open subset of `a` with diameter below `target`, containing
    /// `point` when one is given.
    fn shrink(&self, _a: &Self::Set, _target: &Rational, _point: Option<&Self::Point>) -> Option<Self::Set> {
        None
    }

    /// A closed segment `[x, z]` inside every earlier answer, when the model
    /// has one to offer for the last answer.
    fn closed_witness(&self, _last: &Self::Set, _x: &Self::Point, _earlier: &[Self::Set]) -> Option<(Self::Point, Self::Point)> {
        None
    }
}

// k/8 for k in 1..8
fn eighth(rng: &mut dyn RngCore) -> Rational {
    Rational::new(1 + (rng.next_u32() % 7) as i128, 8)
}

// a bounded window [a, b) inside a Sorgenfrey segment
fn window(s: &Segment) -> (Rational, Rational) {
    match (&s.lo, &s.hi) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        (Some(a), None) => (a.clone(), a + &Rational::one()),
        (None, Some(b)) => (b - &Rational::one(), b.clone()),
        (None, None) => (Rational::zero(), Rational::one()),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SorgenfreyModel;

impl SpaceModel for SorgenfreyModel {
    type Set = SOpenSet;
    type Point = Rational;

    fn name(&self) -> &'static str {
        "sorgenfrey"
    }

    fn universe(&self) -> SOpenSet {
        SOpenSet::line()
    }

    fn is_empty(&self, a: &SOpenSet) -> bool {
        a.is_empty()
    }

    fn intersect(&self, a: &SOpenSet, b: &SOpenSet) -> SOpenSet {
        a.intersect(b)
    }

    fn is_subset(&self, a: &SOpenSet, b: &SOpenSet) -> bool {
        a.is_subset(b)
    }

    fn contains(&self, a: &SOpenSet, p: &Rational) -> bool {
        a.contains(p)
    }

    fn sample_point(&self, a: &SOpenSet) -> Option<Rational> {
        a.sample_point()
    }

    /// One or two subintervals of a random component, with dyadic offsets.
    fn random_open(&self, a: &SOpenSet, rng: &mut dyn RngCore) -> SOpenSet {
        let segs = a.segments();
        let (lo, hi) = window(&segs[rng.next_u32() as usize % segs.len()]);
        let w = &hi - &lo;
        let c = &lo + &(&w * &eighth(rng)).mul_pow2(-1);
        let d = &c + &(&(&hi - &c) * &eighth(rng));
        let first = SOpenSet::interval(c, d.clone());
        if rng.next_u32() % 3 == 0 {
            let e = &d + &(&(&hi - &d) * &eighth(rng));
            let f = &e + &(&(&hi - &e) * &eighth(rng));
            first.union(&SOpenSet::interval(e, f))
        } else {
            first
        }
    }

    fn random_point(&self, a: &SOpenSet, rng: &mut dyn RngCore) -> Rational {
        let segs = a.segments();
        let (lo, hi) = window(&segs[rng.next_u32() as usize % segs.len()]);
        // left endpoints are picked often: they are the Sorgenfrey-specific case
        if rng.next_u32() % 4 == 0 {
            lo
        } else {
            &lo + &(&(&hi - &lo) * &eighth(rng))
        }
    }

    fn closed_witness(&self, last: &SOpenSet, x: &Rational, earlier: &[SOpenSet]) -> Option<(Rational, Rational)> {
        let seg = last.component_of(x)?;
        let z = seg.hi.clone()?;
        if seg.lo.as_ref() != Some(x) {
            return None;
        }
        earlier.iter().all(|v| v.contains_closed(x, &z)).then(|| (x.clone(), z))
    }
}

/// Open rational interval `(lo, hi)`, unbounded on a missing side.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct OpenInterval {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl OpenInterval {
    pub fn new(a: Rational, b: Rational) -> Self {
        OpenInterval { lo: Some(a), hi: Some(b) }
    }

    fn is_empty(&self) -> bool {
        matches!((&self.lo, &self.hi), (Some(a), Some(b)) if a >= b)
    }

    fn contains(&self, x: &Rational) -> bool {
        self.lo.as_ref().map_or(true, |a| a < x) && self.hi.as_ref().map_or(true, |b| x < b)
    }

    fn within(&self, other: &OpenInterval) -> bool {
        let lo_ok = match (&other.lo, &self.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(c), Some(a)) => c <= a,
        };
        let hi_ok = match (&other.hi, &self.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(d), Some(b)) => b <= d,
        };
        lo_ok && hi_ok
    }

    fn meet(&self, other: &OpenInterval) -> OpenInterval {
        let lo = match (&self.lo, &other.lo) {
            (None, x) | (x, None) => x.clone(),
            (Some(a), Some(b)) => Some(a.max(b).clone()),
        };
        let hi = match (&self.hi, &other.hi) {
            (None, x) | (x, None) => x.clone(),
            (Some(a), Some(b)) => Some(a.min(b).clone()),
        };
        OpenInterval { lo, hi }
    }
}

impl fmt::Display for OpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lo {
            Some(a) => write!(f, "({}, ", a)?,
            None => f.write_str("(-inf, ")?,
        }
        match &self.hi {
            Some(b) => write!(f, "{})", b),
            None => f.write_str("+inf)"),
        }
    }
}

/// Finite union of open intervals: sorted, pairwise disjoint, overlapping
/// pieces merged. `(a, b)` and `(b, c)` stay apart since `b` is missing.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct EOpenSet {
    parts: Vec<OpenInterval>,
}

impl EOpenSet {
    pub fn empty() -> Self {
        EOpenSet { parts: Vec::new() }
    }

    pub fn line() -> Self {
        EOpenSet { parts: vec![OpenInterval { lo: None, hi: None }] }
    }

    pub fn interval(a: Rational, b: Rational) -> Self {
        Self::from_parts([OpenInterval::new(a, b)])
    }

    pub fn from_parts<I: IntoIterator<Item = OpenInterval>>(parts: I) -> Self {
        let mut v: Vec<OpenInterval> = parts.into_iter().filter(|p| !p.is_empty()).collect();
        v.sort_by(|x, y| match (&x.lo, &y.lo) {
            (None, None) => core::cmp::Ordering::Equal,
            (None, _) => core::cmp::Ordering::Less,
            (_, None) => core::cmp::Ordering::Greater,
            (Some(a), Some(b)) => a.cmp(b),
        });
        let mut out: Vec<OpenInterval> = Vec::with_capacity(v.len());
        for p in v {
            if let Some(last) = out.last_mut() {
                let overlaps = match (&last.hi, &p.lo) {
                    (None, _) | (_, None) => true,
                    (Some(b), Some(c)) => c < b,
                };
                if overlaps {
                    let hi = match (&last.hi, &p.hi) {
                        (None, _) | (_, None) => None,
                        (Some(b), Some(d)) => Some(b.max(d).clone()),
                    };
                    last.hi = hi;
                    continue;
                }
            }
            out.push(p);
        }
        EOpenSet { parts: out }
    }

    pub fn parts(&self) -> &[OpenInterval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    pub fn intersect(&self, other: &EOpenSet) -> EOpenSet {
        Self::from_parts(self.parts.iter().flat_map(|p| other.parts.iter().map(move |q| p.meet(q))))
    }

    /// Each interval, being connected, must sit in a single component.
    pub fn is_subset(&self, other: &EOpenSet) -> bool {
        self.parts.iter().all(|p| other.parts.iter().any(|q| p.within(q)))
    }

    pub fn diameter(&self) -> Option<Rational> {
        let lo = self.parts.first()?.lo.as_ref()?;
        let hi = self.parts.last()?.hi.as_ref()?;
        Some(hi - lo)
    }
}

impl fmt::Display for EOpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("{}");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            write!(f, "{}", p)?;
        }
        Ok(())
    }
}

fn open_window(p: &OpenInterval) -> (Rational, Rational) {
    match (&p.lo, &p.hi) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        (Some(a), None) => (a.clone(), a + &Rational::one()),
        (None, Some(b)) => (b - &Rational::one(), b.clone()),
        (None, None) => (Rational::zero(), Rational::one()),
    }
}

/// The real line with its usual topology and metric.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EuclidLine;

impl SpaceModel for EuclidLine {
    type Set = EOpenSet;
    type Point = Rational;

    fn name(&self) -> &'static str {
        "euclid"
    }

    fn universe(&self) -> EOpenSet {
        EOpenSet::line()
    }

    fn is_empty(&self, a: &EOpenSet) -> bool {
        a.is_empty()
    }

    fn intersect(&self, a: &EOpenSet, b: &EOpenSet) -> EOpenSet {
        a.intersect(b)
    }

    fn is_subset(&self, a: &EOpenSet, b: &EOpenSet) -> bool {
        a.is_subset(b)
    }

    fn contains(&self, a: &EOpenSet, p: &Rational) -> bool {
        a.contains(p)
    }

    fn sample_point(&self, a: &EOpenSet) -> Option<Rational> {
        let (lo, hi) = open_window(a.parts.first()?);
        Some(lo.midpoint(&hi))
    }

    fn random_open(&self, a: &EOpenSet, rng: &mut dyn RngCore) -> EOpenSet {
        let (lo, hi) = open_window(&a.parts[rng.next_u32() as usize % a.parts.len()]);
        let w = &hi - &lo;
        let c = &lo + &(&w * &eighth(rng)).mul_pow2(-1);
        let d = &c + &(&(&hi - &c) * &eighth(rng));
        EOpenSet::interval(c, d)
    }

    fn random_point(&self, a: &EOpenSet, rng: &mut dyn RngCore) -> Rational {
        let (lo, hi) = open_window(&a.parts[rng.next_u32() as usize % a.parts.len()]);
        &lo + &(&(&hi - &lo) * &eighth(rng))
    }

    fn diameter(&self, a: &EOpenSet) -> Option<Rational> {
        a.diameter()
    }

    /// Without a point: `(a, a + min(w, t)/2)` in the leftmost component.
    /// With one: the interval of radius `t/4` around it, clipped.
    fn shrink(&self, a: &EOpenSet, target: &Rational, point: Option<&Rational>) -> Option<EOpenSet> {
        match point {
            None => {
                let (lo, hi) = open_window(a.parts.first()?);
                let w = &hi - &lo;
                let w = if w < *target { w } else { target.clone() };
                Some(EOpenSet::interval(lo.clone(), &lo + &w.halve()))
            }
            Some(x) => {
                let comp = a.parts.iter().find(|p| p.contains(x))?;
                let r = target.mul_pow2(-2);
                let around = OpenInterval::new(x - &r, x + &r);
                Some(EOpenSet::from_parts([comp.meet(&around)]))
            }
        }
    }
}

/// The Baire space with the standard base and metric `2^-(first difference)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BaireModel;

impl SpaceModel for BaireModel {
    type Set = BaireRegion;
    type Point = BairePoint;

    fn name(&self) -> &'static str {
        "baire"
    }

    fn universe(&self) -> BaireRegion {
        BaireRegion::basic(FinSeq::empty())
    }

    fn is_empty(&self, a: &BaireRegion) -> bool {
        a.0.is_empty()
    }

    fn intersect(&self, a: &BaireRegion, b: &BaireRegion) -> BaireRegion {
        BaireAlgebra.intersect(a, b).expect("exact")
    }

    fn is_subset(&self, a: &BaireRegion, b: &BaireRegion) -> bool {
        BaireAlgebra.is_subset(a, b).expect("exact")
    }

    fn contains(&self, a: &BaireRegion, p: &BairePoint) -> bool {
        BaireAlgebra.contains(a, p).expect("exact")
    }

    fn sample_point(&self, a: &BaireRegion) -> Option<BairePoint> {
        let b = a.0.first()?;
        let mut prefix = b.stem.digits().to_vec();
        prefix.push(b.lo);
        Some(BairePoint::new(prefix, vec![0]))
    }

    fn random_open(&self, a: &BaireRegion, rng: &mut dyn RngCore) -> BaireRegion {
        let b = &a.0[rng.next_u32() as usize % a.0.len()];
        let mut stem = b.stem.extend(b.lo + u64::from(rng.next_u32() % 3));
        for _ in 0..rng.next_u32() % 2 {
            stem.push(u64::from(rng.next_u32() % 3));
        }
        BaireRegion::basic(stem)
    }

    fn random_point(&self, a: &BaireRegion, rng: &mut dyn RngCore) -> BairePoint {
        let b = &a.0[rng.next_u32() as usize % a.0.len()];
        let mut prefix = b.stem.digits().to_vec();
        prefix.push(b.lo + u64::from(rng.next_u32() % 3));
        BairePoint::new(prefix, vec![u64::from(rng.next_u32() % 3)])
    }

    fn diameter(&self, a: &BaireRegion) -> Option<Rational> {
        // a region with two boxes may still have small diameter; the
        // longest common prefix of its stems bounds it
        let first = &a.0.first()?.stem;
        let common = a.0.iter().fold(first.len(), |m, b| {
            m.min(b.stem.digits().iter().zip(first.digits()).take_while(|(x, y)| x == y).count())
        });
        Some(Rational::pow2(-(common as i64)))
    }

    fn shrink(&self, a: &BaireRegion, target: &Rational, point: Option<&BairePoint>) -> Option<BaireRegion> {
        let stem = match point {
            Some(x) => {
                let b = a.0.iter().find(|b| self.contains(&BaireRegion(vec![(*b).clone()]), x))?;
                x.restrict(b.stem.len() + 1)
            }
            None => {
                let b = a.0.first()?;
                b.stem.extend(b.lo)
            }
        };
        let mut stem = stem;
        while Rational::pow2(-(stem.len() as i64)) >= *target {
            let next = point.map_or(0, |x| x.digit(stem.len()));
            stem.push(next);
        }
        Some(BaireRegion::basic(stem))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GameKind {
    Choquet,
    Strong,
    Strict,
}

impl GameKind {
    pub fn name(&self) -> &'static str {
        match self {
            GameKind::Choquet => "choquet",
            GameKind::Strong => "strong",
            GameKind::Strict => "strict",
        }
    }

    pub fn parse(s: &str) -> Option<GameKind> {
        match s {
            "choquet" => Some(GameKind::Choquet),
            "strong" => Some(GameKind::Strong),
            "strict" => Some(GameKind::Strict),
            _ => None,
        }
    }

    fn with_points(&self) -> bool {
        matches!(self, GameKind::Strong)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    I,
    II,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::I => "I",
            Player::II => "II",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Violation {
    NotNested,
    Empty,
    PointMissing,
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::NotNested => "not-nested",
            Violation::Empty => "empty",
            Violation::PointMissing => "point-missing",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IllegalMove {
    pub player: Player,
    pub round: usize,
    pub reason: Violation,
}

impl fmt::Display for IllegalMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "illegal move by {} in round {}: {}", self.player, self.round, self.reason.name())
    }
}

/// One round: I's set (and point in the strong game), then II's answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round<M: SpaceModel> {
    pub u: M::Set,
    pub x: Option<M::Point>,
    pub v: M::Set,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run<M: SpaceModel> {
    pub kind: GameKind,
    pub rounds: Vec<Round<M>>,
}

impl<M: SpaceModel> Run<M> {
    pub fn new(kind: GameKind) -> Self {
        Run { kind, rounds: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// The set I must play inside next.
    pub fn current(&self, space: &M) -> M::Set {
        self.rounds.last().map_or_else(|| space.universe(), |r| r.v.clone())
    }
}

/// I's move: a set, and a point in the strong game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IMove<M: SpaceModel> {
    pub u: M::Set,
    pub x: Option<M::Point>,
}

pub trait PlayerI<M: SpaceModel> {
    fn label(&self) -> String;
    fn play(&self, space: &M, run: &Run<M>) -> IMove<M>;
}

pub trait PlayerII<M: SpaceModel> {
    fn label(&self) -> String;
    fn respond(&self, space: &M, run: &Run<M>, mv: &IMove<M>) -> M::Set;
}

/// Random open subsets of the current set; the stream depends only on the
/// seed and the round, so replays agree.
#[derive(Clone, Copy, Debug)]
pub struct RandomI {
    pub seed: u64,
}

impl<M: SpaceModel> PlayerI<M> for RandomI {
    fn label(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn play(&self, space: &M, run: &Run<M>) -> IMove<M> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(run.len() as u64);
        let u = space.random_open(&run.current(space), &mut rng);
        let x = run.kind.with_points().then(|| space.random_point(&u, &mut rng));
        IMove { u, x }
    }
}

/// Left half of the leftmost component of the current set (Euclid line).
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyHalvingI;

impl PlayerI<EuclidLine> for GreedyHalvingI {
    fn label(&self) -> String {
        String::from("greedy")
    }

    fn play(&self, space: &EuclidLine, run: &Run<EuclidLine>) -> IMove<EuclidLine> {
        let cur = run.current(space);
        let (lo, hi) = open_window(&cur.parts()[0]);
        let u = EOpenSet::interval(lo.clone(), lo.midpoint(&hi));
        let x = run.kind.with_points().then(|| lo.midpoint(&lo.midpoint(&hi)));
        IMove { u, x }
    }
}

/// Sorgenfrey strong-game answer: `[x, (x + y)/2)` where `[x, y)` is the
/// largest interval from `x` inside its component of `U` (`y = x + 1` on a ray).
#[derive(Clone, Copy, Debug, Default)]
pub struct MidpointII;

pub fn sorgenfrey_strong_answer(u: &SOpenSet, x: &Rational) -> Option<SOpenSet> {
    let comp = u.component_of(x)?;
    let y = match &comp.hi {
        Some(y) => y.clone(),
        None => x + &Rational::one(),
    };
    let z = x.midpoint(&y);
    Some(SOpenSet::interval(x.clone(), z))
}

impl PlayerII<SorgenfreyModel> for MidpointII {
    fn label(&self) -> String {
        String::from("midpoint")
    }

    fn respond(&self, _space: &SorgenfreyModel, _run: &Run<SorgenfreyModel>, mv: &IMove<SorgenfreyModel>) -> SOpenSet {
        let x = mv.x.clone().or_else(|| mv.u.sample_point()).expect("I's set is nonempty");
        // an x outside U is passed through so the engine attributes the fault
        sorgenfrey_strong_answer(&mv.u, &x).unwrap_or_else(|| SOpenSet::interval(x.clone(), &x + &Rational::one()))
    }
}

/// Euclid-line answer: the middle half `(a + w/4, b - w/4)` of the leftmost
/// component, so closures nest and widths halve. In the strong game the
/// middle half around the point's component, centred on the point.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompletenessII;

impl PlayerII<EuclidLine> for CompletenessII {
    fn label(&self) -> String {
        String::from("completeness")
    }

    fn respond(&self, _space: &EuclidLine, _run: &Run<EuclidLine>, mv: &IMove<EuclidLine>) -> EOpenSet {
        match &mv.x {
            None => {
                let (lo, hi) = open_window(&mv.u.parts()[0]);
                let q = (&hi - &lo).mul_pow2(-2);
                EOpenSet::interval(&lo + &q, &hi - &q)
            }
            Some(x) => {
                let Some(comp) = mv.u.parts().iter().find(|p| p.contains(x)) else {
                    return EOpenSet::interval(x.clone(), x + &Rational::one());
                };
                let (lo, hi) = open_window(comp);
                let r = core::cmp::min(x - &lo, &hi - x).halve();
                EOpenSet::interval(x - &r, x + &r)
            }
        }
    }
}

/// Baire answer: a basic `N_t` inside I's set with `length(t) >` round index.
#[derive(Clone, Copy, Debug, Default)]
pub struct BasicNestingII;

impl PlayerII<BaireModel> for BasicNestingII {
    fn label(&self) -> String {
        String::from("basic")
    }

    fn respond(&self, space: &BaireModel, run: &Run<BaireModel>, mv: &IMove<BaireModel>) -> BaireRegion {
        let target = Rational::pow2(-(run.len() as i64));
        space.shrink(&mv.u, &target, mv.x.as_ref()).unwrap_or_else(|| mv.u.clone())
    }
}

/// Shrinks I's set to diameter below `1/(n+1)` at round `n`, then defers
/// to the wrapped strategy.
pub struct StrictWrapper<M: SpaceModel> {
    pub base: Box<dyn PlayerII<M>>,
}

impl<M: SpaceModel> StrictWrapper<M> {
    pub fn new(base: Box<dyn PlayerII<M>>) -> Self {
        StrictWrapper { base }
    }
}

pub fn shrink_target(round: usize) -> Rational {
    Rational::new(1, round as i128 + 1)
}

impl<M: SpaceModel> PlayerII<M> for StrictWrapper<M> {
    fn label(&self) -> String {
        format!("strict({})", self.base.label())
    }

    fn respond(&self, space: &M, run: &Run<M>, mv: &IMove<M>) -> M::Set {
        let target = shrink_target(run.len());
        let u2 = space
            .shrink(&mv.u, &target, mv.x.as_ref())
            .expect("space model cannot shrink a nonempty open set");
        self.base.respond(space, run, &IMove { u: u2, x: mv.x.clone() })
    }
}

/// Why a play stopped early.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aborted<M: SpaceModel> {
    pub partial: Run<M>,
    pub illegal: IllegalMove,
}

fn check_i<M: SpaceModel>(space: &M, kind: GameKind, prev: &M::Set, mv: &IMove<M>, round: usize) -> Result<(), IllegalMove> {
    let bad = |reason| Err(IllegalMove { player: Player::I, round, reason });
    if space.is_empty(&mv.u) {
        return bad(Violation::Empty);
    }
    if !space.is_subset(&mv.u, prev) {
        return bad(Violation::NotNested);
    }
    if kind.with_points() {
        match &mv.x {
            Some(x) if space.contains(&mv.u, x) => {}
            _ => return bad(Violation::PointMissing),
        }
    }
    Ok(())
}

fn check_ii<M: SpaceModel>(space: &M, kind: GameKind, u: &M::Set, x: Option<&M::Point>, v: &M::Set, round: usize) -> Result<(), IllegalMove> {
    let bad = |reason| Err(IllegalMove { player: Player::II, round, reason });
    if space.is_empty(v) {
        return bad(Violation::Empty);
    }
    if !space.is_subset(v, u) {
        return bad(Violation::NotNested);
    }
    if kind.with_points() {
        match x {
            Some(x) if space.contains(v, x) => {}
            _ => return bad(Violation::PointMissing),
        }
    }
    Ok(())
}

/// Plays `rounds` rounds, checking every move before accepting it.
pub fn play<M: SpaceModel>(
    kind: GameKind,
    space: &M,
    one: &dyn PlayerI<M>,
    two: &dyn PlayerII<M>,
    rounds: usize,
) -> Result<Run<M>, Aborted<M>> {
    let mut run = Run::new(kind);
    for n in 0..rounds {
        let prev = run.current(space);
        let mv = one.play(space, &run);
        if let Err(illegal) = check_i(space, kind, &prev, &mv, n) {
            return Err(Aborted { partial: run, illegal });
        }
        let v = two.respond(space, &run, &mv);
        if let Err(illegal) = check_ii(space, kind, &mv.u, mv.x.as_ref(), &v, n) {
            return Err(Aborted { partial: run, illegal });
        }
        run.rounds.push(Round { u: mv.u, x: mv.x, v });
    }
    Ok(run)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunAudit<M: SpaceModel> {
    pub kind: GameKind,
    pub rounds: usize,
    pub violations: Vec<IllegalMove>,
    pub intersection: M::Set,
    pub nonempty: bool,
    pub diameter: Option<Rational>,
    pub tolerance: Rational,
    /// `None` when the model has no metric.
    pub within_tolerance: Option<bool>,
    pub witness: Option<(M::Point, M::Point)>,
    pub notes: Vec<String>,
}

impl<M: SpaceModel> RunAudit<M> {
    pub fn legal(&self) -> bool {
        self.violations.is_empty()
    }

    /// Legal and nonempty; strict runs also need the diameter proxy.
    pub fn passed(&self) -> bool {
        self.legal()
            && self.nonempty
            && (self.kind != GameKind::Strict || self.within_tolerance == Some(true))
    }
}

/// Re-checks a run move by move and measures the finite intersection.
pub fn audit_run<M: SpaceModel>(run: &Run<M>, space: &M, tolerance: &Rational) -> RunAudit<M> {
    let mut violations = Vec::new();
    let mut prev = space.universe();
    let mut meet = space.universe();
    for (n, r) in run.rounds.iter().enumerate() {
        let mv = IMove { u: r.u.clone(), x: r.x.clone() };
        if let Err(e) = check_i(space, run.kind, &prev, &mv, n) {
            violations.push(e);
        }
        if let Err(e) = check_ii(space, run.kind, &r.u, r.x.as_ref(), &r.v, n) {
            violations.push(e);
        }
        meet = space.intersect(&meet, &r.v);
        prev = r.v.clone();
    }
    let diameter = space.diameter(&meet);
    let within_tolerance = diameter.as_ref().map(|d| d <= tolerance);
    let witness = match run.rounds.split_last() {
        Some((last, earlier)) => last.x.as_ref().and_then(|x| {
            let vs: Vec<M::Set> = earlier.iter().map(|r| r.v.clone()).collect();
            space.closed_witness(&last.v, x, &vs)
        }),
        None => None,
    };
    let mut notes = vec![String::from("finite-depth proxy: only the first rounds of an infinite run are checked")];
    if diameter.is_none() {
        notes.push(format!("{} model has no metric; the singleton proxy does not apply", space.name()));
    }
    RunAudit {
        kind: run.kind,
        rounds: run.len(),
        violations,
        nonempty: !space.is_empty(&meet),
        intersection: meet,
        diameter,
        tolerance: tolerance.clone(),
        within_tolerance,
        witness,
        notes,
    }
}
