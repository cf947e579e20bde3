//! Finite-sequence addresses, lazy Lusin schemes and their depth-bounded audit.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use spin::Mutex;

use crate::rational::Rational;

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinSeq(Vec<u64>);

impl FinSeq {
    pub fn empty() -> Self {
        FinSeq(Vec::new())
    }

    pub fn from_digits(digits: Vec<u64>) -> Self {
        FinSeq(digits)
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `s^n`
    pub fn extend(&self, n: u64) -> Self {
        let mut d = Vec::with_capacity(self.0.len() + 1);
        d.extend_from_slice(&self.0);
        d.push(n);
        FinSeq(d)
    }

    pub fn push(&mut self, n: u64) {
        self.0.push(n);
    }

    pub fn pop(&mut self) -> Option<u64> {
        self.0.pop()
    }

    /// `s|m`; panics if `m > len`.
    pub fn prefix(&self, m: usize) -> Self {
        FinSeq(self.0[..m].to_vec())
    }

    pub fn is_prefix_of(&self, other: &FinSeq) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn comparable(&self, other: &FinSeq) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn get(&self, i: usize) -> Option<u64> {
        self.0.get(i).copied()
    }

    pub fn concat(&self, other: &FinSeq) -> Self {
        let mut d = self.0.clone();
        d.extend_from_slice(&other.0);
        FinSeq(d)
    }
}

impl From<Vec<u64>> for FinSeq {
    fn from(v: Vec<u64>) -> Self {
        FinSeq(v)
    }
}

impl<const N: usize> From<[u64; N]> for FinSeq {
    fn from(v: [u64; N]) -> Self {
        FinSeq(v.to_vec())
    }
}

impl fmt::Display for FinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for FinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFinSeqError(pub String);

impl fmt::Display for ParseFinSeqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid digit list {:?}", self.0)
    }
}

impl FromStr for FinSeq {
    type Err = ParseFinSeqError;

    /// Parses `[0,2,0,0]`; brackets optional, `[]` is the empty sequence.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t.strip_prefix('[').unwrap_or(t);
        let t = t.strip_suffix(']').unwrap_or(t).trim();
        if t.is_empty() {
            return Ok(FinSeq::empty());
        }
        t.split(',')
            .map(|d| d.trim().parse::<u64>().map_err(|_| ParseFinSeqError(s.into())))
            .collect::<Result<Vec<_>, _>>()
            .map(FinSeq)
    }
}

/// An operation the set algebra cannot decide exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unsupported(pub &'static str);

impl fmt::Display for Unsupported {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unsupported check: {}", self.0)
    }
}

/// Extensional open-set algebra of a space model.
pub trait SetAlgebra {
    type Set: Clone + fmt::Display;
    type Point: Clone + fmt::Display;

    fn universe(&self) -> Self::Set;
    fn is_empty(&self, a: &Self::Set) -> Result<bool, Unsupported>;
    fn intersect(&self, a: &Self::Set, b: &Self::Set) -> Result<Self::Set, Unsupported>;
    fn is_subset(&self, a: &Self::Set, b: &Self::Set) -> Result<bool, Unsupported>;
    fn contains(&self, a: &Self::Set, p: &Self::Point) -> Result<bool, Unsupported>;

    /// Exact test of `parts[0] ∪ parts[1] ∪ … = whole`.
    fn union_equals(&self, _parts: &[Self::Set], _whole: &Self::Set) -> Result<bool, Unsupported> {
        Err(Unsupported("finite union equality"))
    }

    fn is_open(&self, _a: &Self::Set) -> Result<bool, Unsupported> {
        Err(Unsupported("openness"))
    }

    /// Diameter-like size; `None` when unbounded or not defined.
    fn width(&self, _a: &Self::Set) -> Option<Rational> {
        None
    }

    /// First intersecting pair `(i, j)`, `i < j`, if any.
    fn first_overlap(&self, parts: &[Self::Set]) -> Result<Option<(usize, usize)>, Unsupported> {
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                if !self.is_empty(&self.intersect(&parts[i], &parts[j])?)? {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    fn equals(&self, a: &Self::Set, b: &Self::Set) -> Result<bool, Unsupported> {
        Ok(self.is_subset(a, b)? && self.is_subset(b, a)?)
    }
}

/// Intensional description of a scheme `(V_s)`.
pub trait SchemeRule {
    type Payload: Clone;

    fn root(&self) -> Self::Payload;

    /// Payload of `s^n` given the payload of `s` and `length(s)`.
    fn child(&self, parent: &Self::Payload, parent_len: usize, n: u64) -> Self::Payload;

    /// Children `0..=bound` in order; rules may compute them jointly.
    fn children(&self, parent: &Self::Payload, parent_len: usize, bound: u64) -> Vec<Self::Payload> {
        (0..=bound).map(|n| self.child(parent, parent_len, n)).collect()
    }

    /// The union of children with index `>= from`, when finitely describable.
    fn tail(&self, _parent: &Self::Payload, _parent_len: usize, _from: u64) -> Option<Self::Payload> {
        None
    }

    fn label(&self) -> String {
        String::from("scheme")
    }

    fn payload(&self, s: &FinSeq) -> Self::Payload {
        let mut p = self.root();
        for (k, &n) in s.digits().iter().enumerate() {
            p = self.child(&p, k, n);
        }
        p
    }
}

/// Finds the child containing a point.
pub trait Locator<P, S> {
    fn locate(&self, point: &P, parent: &S, parent_len: usize, bound: u64) -> Option<u64>;
}

/// Brute-force membership scan over children `0..=bound`.
pub struct ScanLocator<'a, R, A> {
    pub rule: &'a R,
    pub algebra: &'a A,
}

impl<'a, R, A> Locator<A::Point, A::Set> for ScanLocator<'a, R, A>
where
    R: SchemeRule<Payload = A::Set>,
    A: SetAlgebra,
{
    fn locate(&self, point: &A::Point, parent: &A::Set, parent_len: usize, bound: u64) -> Option<u64> {
        (0..=bound).find(|&n| {
            let c = self.rule.child(parent, parent_len, n);
            self.algebra.contains(&c, point).unwrap_or(false)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AddressError {
    NotInUniverse,
    /// No child within the bound contains the point at this level.
    BoundExhausted { level: usize },
    /// The locator answered a child that does not contain the point.
    LocatorMismatch { level: usize, child: u64 },
    Unsupported(Unsupported),
}

impl fmt::Display for AddressError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AddressError::NotInUniverse => f.write_str("point outside the universe"),
            AddressError::BoundExhausted { level } => write!(f, "bound exhausted at level {level}"),
            AddressError::LocatorMismatch { level, child } => {
                write!(f, "locator returned child {child} at level {level} which misses the point")
            }
            AddressError::Unsupported(u) => write!(f, "{u}"),
        }
    }
}

/// The unique `s` of length `depth` with `x ∈ V_{s|k}` for all `k ≤ depth`.
pub fn sigma_address<R, A, L>(
    x: &A::Point,
    rule: &R,
    algebra: &A,
    locator: &L,
    depth: usize,
    bound: u64,
) -> Result<FinSeq, AddressError>
where
    R: SchemeRule<Payload = A::Set>,
    A: SetAlgebra,
    L: Locator<A::Point, A::Set> + ?Sized,
{
    let mut payload = rule.root();
    if !algebra.contains(&payload, x).map_err(AddressError::Unsupported)? {
        return Err(AddressError::NotInUniverse);
    }
    let mut s = FinSeq::empty();
    for level in 0..depth {
        let n = locator
            .locate(x, &payload, level, bound)
            .ok_or(AddressError::BoundExhausted { level })?;
        let child = rule.child(&payload, level, n);
        if !algebra.contains(&child, x).map_err(AddressError::Unsupported)? {
            return Err(AddressError::LocatorMismatch { level, child: n });
        }
        s.push(n);
        payload = child;
    }
    Ok(s)
}

/// Payload cache keyed by address. Expansion is idempotent, so a lost race
/// only costs a recomputation.
pub struct SchemeTree<R: SchemeRule> {
    rule: R,
    memo: Mutex<BTreeMap<FinSeq, R::Payload>>,
}

impl<R: SchemeRule> SchemeTree<R> {
    pub fn new(rule: R) -> Self {
        SchemeTree { rule, memo: Mutex::new(BTreeMap::new()) }
    }

    pub fn rule(&self) -> &R {
        &self.rule
    }

    pub fn payload(&self, s: &FinSeq) -> R::Payload {
        if let Some(p) = self.memo.lock().get(s) {
            return p.clone();
        }
        let p = match s.digits().split_last() {
            None => self.rule.root(),
            Some((&n, init)) => {
                let parent = self.payload(&FinSeq::from_digits(init.to_vec()));
                self.rule.child(&parent, init.len(), n)
            }
        };
        self.memo.lock().entry(s.clone()).or_insert(p).clone()
    }

    pub fn cached(&self) -> usize {
        self.memo.lock().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axiom {
    L0,
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
    Nonempty,
    Gap,
}

impl Axiom {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::L0 => "L0",
            Axiom::L1 => "L1",
            Axiom::L2 => "L2",
            Axiom::L3 => "L3",
            Axiom::L4 => "L4",
            Axiom::L5 => "L5",
            Axiom::L6 => "L6",
            Axiom::Nonempty => "nonempty",
            Axiom::Gap => "gap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Witnessed,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Witnessed => "witnessed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub address: FinSeq,
    pub i: Option<u64>,
    pub j: Option<u64>,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail(Counterexample),
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomVerdict {
    pub axiom: Axiom,
    pub mode: Mode,
    pub outcome: Outcome,
}

impl AxiomVerdict {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeAudit {
    pub label: String,
    pub depth: usize,
    pub child_bound: u64,
    pub nodes_checked: u64,
    pub verdicts: Vec<AxiomVerdict>,
    /// Maximum node width per address length, `None` where unbounded.
    pub width_profile: Vec<Option<Rational>>,
    pub notes: Vec<String>,
}

impl SchemeAudit {
    pub fn verdict(&self, axiom: Axiom) -> Option<&AxiomVerdict> {
        self.verdicts.iter().find(|v| v.axiom == axiom)
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed())
    }

    /// First failing verdict's counterexample.
    pub fn counterexample(&self) -> Option<(Axiom, &Counterexample)> {
        self.verdicts.iter().find_map(|v| match &v.outcome {
            Outcome::Fail(c) => Some((v.axiom, c)),
            _ => None,
        })
    }
}

/// Neighbourhoods of a point used to witness (L6).
pub type NeighbourhoodFn<'a, P, S> = &'a dyn Fn(&P) -> Vec<S>;

pub struct AuditOptions<'a, A: SetAlgebra> {
    pub depth: usize,
    pub child_bound: u64,
    pub test_points: Vec<A::Point>,
    /// Also audit (L5) and, with a locator and neighbourhoods, (L6).
    pub pi_base: bool,
    /// Check `width(V_{s^m}) < 1/length(s)` for `length(s) ≥ 1`.
    pub gap_bound: bool,
    pub locator: Option<&'a dyn Locator<A::Point, A::Set>>,
    pub neighbourhoods: Option<NeighbourhoodFn<'a, A::Point, A::Set>>,
    /// Worker threads for the tree walk; 0 picks the available parallelism.
    /// The record does not depend on it.
    pub threads: usize,
}

impl<'a, A: SetAlgebra> AuditOptions<'a, A> {
    pub fn new(depth: usize, child_bound: u64) -> Self {
        AuditOptions {
            depth,
            child_bound,
            test_points: Vec::new(),
            pi_base: false,
            gap_bound: false,
            locator: None,
            neighbourhoods: None,
            threads: 0,
        }
    }
}

struct Tally {
    outcome: Outcome,
    mode: Mode,
}

impl Tally {
    fn new(mode: Mode) -> Self {
        Tally { outcome: Outcome::Pass, mode }
    }

    fn fail(&mut self, c: Counterexample) {
        if self.outcome == Outcome::Pass {
            self.outcome = Outcome::Fail(c);
        }
    }

    fn unsupported(&mut self, u: Unsupported) {
        if !matches!(self.outcome, Outcome::Fail(_)) {
            self.outcome = Outcome::Unsupported(u.to_string());
        }
    }

    fn live(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

fn cx(address: &FinSeq, i: Option<u64>, j: Option<u64>, witness: String) -> Counterexample {
    Counterexample { address: address.clone(), i, j, witness }
}

struct Walker<'r, R, A: SetAlgebra> {
    rule: &'r R,
    algebra: &'r A,
    depth: usize,
    bound: u64,
    gap: bool,
    pi_base: bool,
    exact_l3: bool,
    test_points: &'r [A::Point],
    l0: Tally,
    l1: Tally,
    l3: Tally,
    l5: Tally,
    nonempty: Tally,
    gap_tally: Tally,
    widths: Vec<Option<Option<Rational>>>,
    nodes: u64,
}

impl<'r, R, A> Walker<'r, R, A>
where
    R: SchemeRule<Payload = A::Set>,
    A: SetAlgebra,
{
    // Same configuration, nothing recorded yet.
    #[cfg(feature = "std")]
    fn fresh(&self) -> Self {
        Walker {
            rule: self.rule,
            algebra: self.algebra,
            depth: self.depth,
            bound: self.bound,
            gap: self.gap,
            pi_base: self.pi_base,
            exact_l3: self.exact_l3,
            test_points: self.test_points,
            l0: Tally::new(self.l0.mode),
            l1: Tally::new(self.l1.mode),
            l3: Tally::new(self.l3.mode),
            l5: Tally::new(self.l5.mode),
            nonempty: Tally::new(self.nonempty.mode),
            gap_tally: Tally::new(self.gap_tally.mode),
            widths: Vec::new(),
            nodes: 0,
        }
    }

    // Folds in a walker that ran on a later part of the tree, keeping the
    // first failure in depth-first order.
    #[cfg(feature = "std")]
    fn absorb(&mut self, other: Self) {
        for (mine, theirs) in [
            (&mut self.l0, other.l0),
            (&mut self.l1, other.l1),
            (&mut self.l3, other.l3),
            (&mut self.l5, other.l5),
            (&mut self.nonempty, other.nonempty),
            (&mut self.gap_tally, other.gap_tally),
        ] {
            if theirs.mode == Mode::Witnessed {
                mine.mode = Mode::Witnessed;
            }
            match theirs.outcome {
                Outcome::Pass => {}
                Outcome::Fail(c) => mine.fail(c),
                Outcome::Unsupported(u) => {
                    if mine.outcome == Outcome::Pass {
                        mine.outcome = Outcome::Unsupported(u);
                    }
                }
            }
        }
        self.exact_l3 &= other.exact_l3;
        for (len, w) in other.widths.into_iter().enumerate() {
            if let Some(w) = w {
                self.record_width(len, w);
            }
        }
        self.nodes += other.nodes;
    }

    fn record_width(&mut self, len: usize, w: Option<Rational>) {
        while self.widths.len() <= len {
            self.widths.push(None);
        }
        let slot = &mut self.widths[len];
        match (slot.as_mut(), w) {
            (None, w) => *slot = Some(w),
            (Some(None), _) => {}
            (Some(cur), None) => *cur = None,
            (Some(Some(a)), Some(b)) => {
                if b > *a {
                    *a = b;
                }
            }
        }
    }

    fn check_node(&mut self, s: &FinSeq, payload: &A::Set) -> Option<Rational> {
        self.nodes += 1;
        let w = self.algebra.width(payload);
        self.record_width(s.len(), w.clone());
        if self.nonempty.live() {
            match self.algebra.is_empty(payload) {
                Ok(true) => self.nonempty.fail(cx(s, None, None, payload.to_string())),
                Ok(false) => {}
                Err(u) => self.nonempty.unsupported(u),
            }
        }
        if self.pi_base && self.l5.live() {
            match self.algebra.is_open(payload) {
                Ok(false) => self.l5.fail(cx(s, None, None, format!("{payload} is not open"))),
                Ok(true) => {}
                Err(u) => self.l5.unsupported(u),
            }
        }
        w
    }

    fn walk(&mut self, s: &mut FinSeq, payload: &A::Set) {
        let len = s.len();
        let mut children = self.rule.children(payload, len, self.bound);
        let limit = (len >= 1).then(|| Rational::new(1, len as i128));
        for (n, c) in children.iter().enumerate() {
            s.push(n as u64);
            let width = self.check_node(s, c);
            s.pop();
            if self.l0.live() {
                match self.algebra.is_subset(c, payload) {
                    Ok(false) => self.l0.fail(cx(s, Some(n as u64), None, c.to_string())),
                    Ok(true) => {}
                    Err(u) => self.l0.unsupported(u),
                }
            }
            if let (true, Some(limit)) = (self.gap && self.gap_tally.live(), &limit) {
                match width {
                    Some(w) if w < *limit => {}
                    Some(w) => self.gap_tally.fail(cx(s, Some(n as u64), None, format!("width {w}"))),
                    None => self.gap_tally.unsupported(Unsupported("child width")),
                }
            }
        }
        if self.l1.live() {
            match self.algebra.first_overlap(&children) {
                Ok(Some((i, j))) => {
                    let meet = self
                        .algebra
                        .intersect(&children[i], &children[j])
                        .map(|m| m.to_string())
                        .unwrap_or_default();
                    self.l1.fail(cx(s, Some(i as u64), Some(j as u64), meet));
                }
                Ok(None) => {}
                Err(u) => self.l1.unsupported(u),
            }
        }
        if self.l3.live() {
            self.check_cover(s, payload, &mut children);
        }
        if len < self.depth {
            for (n, c) in children.iter().enumerate() {
                s.push(n as u64);
                self.walk(s, c);
                s.pop();
            }
        }
    }

    fn check_cover(&mut self, s: &FinSeq, payload: &A::Set, children: &mut Vec<A::Set>) {
        if self.exact_l3 {
            let tail = self.rule.tail(payload, s.len(), self.bound + 1);
            if let Some(tail) = tail {
                children.push(tail);
                let verdict = self.algebra.union_equals(children, payload);
                children.pop();
                match verdict {
                    Ok(true) => return,
                    Ok(false) => {
                        self.l3.fail(cx(s, None, None, format!("children and tail do not cover {payload}")));
                        return;
                    }
                    Err(_) => {}
                }
            }
            self.exact_l3 = false;
            self.l3.mode = Mode::Witnessed;
        }
        for x in self.test_points {
            if !self.algebra.contains(payload, x).unwrap_or(false) {
                continue;
            }
            let hit = children.iter().any(|c| self.algebra.contains(c, x).unwrap_or(false));
            let in_tail = self
                .rule
                .tail(payload, s.len(), self.bound + 1)
                .map(|t| self.algebra.contains(&t, x).unwrap_or(false))
                .unwrap_or(false);
            if !hit && !in_tail {
                self.l3.fail(cx(s, None, None, format!("point {x} not covered within bound")));
                return;
            }
        }
    }
}

fn walk_tree<R, A>(w: &mut Walker<'_, R, A>, root: &A::Set, threads: usize)
where
    R: SchemeRule<Payload = A::Set> + Sync,
    A: SetAlgebra + Sync,
    A::Set: Send + Sync,
    A::Point: Sync,
{
    let mut s = FinSeq::empty();
    w.check_node(&s, root);
    #[cfg(not(feature = "std"))]
    let _ = threads;
    #[cfg(feature = "std")]
    {
        let threads = match threads {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            t => t,
        };
        if threads > 1 && w.depth >= 1 {
            walk_split(w, root, threads);
            return;
        }
    }
    w.walk(&mut s, root);
}

// The subtrees below the root's children are independent: walk them on worker
// threads and merge the records in child order.
#[cfg(feature = "std")]
fn walk_split<R, A>(w: &mut Walker<'_, R, A>, root: &A::Set, threads: usize)
where
    R: SchemeRule<Payload = A::Set> + Sync,
    A: SetAlgebra + Sync,
    A::Set: Send + Sync,
    A::Point: Sync,
{
    use std::sync::atomic::{AtomicUsize, Ordering};

    let depth = w.depth;
    w.depth = 0;
    w.walk(&mut FinSeq::empty(), root);
    w.depth = depth;

    let children = w.rule.children(root, 0, w.bound);
    let template = w.fresh();
    let next = AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<Walker<'_, R, A>>>> =
        children.iter().map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads.min(children.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(child) = children.get(i) else { break };
                let mut sub = template.fresh();
                sub.walk(&mut FinSeq::from_digits(vec![i as u64]), child);
                *slots[i].lock().unwrap() = Some(sub);
            });
        }
    });
    for slot in slots {
        let sub = slot.into_inner().unwrap().expect("every subtree walked");
        w.absorb(sub);
    }
}

/// Audits the scheme to the given depth: every address `s` with
/// `length(s) ≤ depth` is expanded to children `0..=child_bound`.
pub fn validate_strict_lusin<R, A>(rule: &R, algebra: &A, opts: &AuditOptions<'_, A>) -> SchemeAudit
where
    R: SchemeRule<Payload = A::Set> + Sync,
    A: SetAlgebra + Sync,
    A::Set: Send + Sync,
    A::Point: Sync,
{
    let mut notes = Vec::new();
    let root = rule.root();
    let mut l2 = Tally::new(Mode::Exact);
    match algebra.equals(&root, &algebra.universe()) {
        Ok(true) => {}
        Ok(false) => l2.fail(cx(&FinSeq::empty(), None, None, root.to_string())),
        Err(u) => l2.unsupported(u),
    }

    let probe_tail = rule.tail(&root, 0, opts.child_bound + 1);
    let exact_l3 = probe_tail.is_some()
        && algebra.union_equals(core::slice::from_ref(&root), &root).is_ok();

    let mut w = Walker {
        rule,
        algebra,
        depth: opts.depth,
        bound: opts.child_bound,
        gap: opts.gap_bound,
        pi_base: opts.pi_base,
        exact_l3,
        test_points: &opts.test_points,
        l0: Tally::new(Mode::Exact),
        l1: Tally::new(Mode::Exact),
        l3: Tally::new(if exact_l3 { Mode::Exact } else { Mode::Witnessed }),
        l5: Tally::new(Mode::Exact),
        nonempty: Tally::new(Mode::Exact),
        gap_tally: Tally::new(Mode::Exact),
        widths: Vec::new(),
        nodes: 0,
    };
    walk_tree(&mut w, &root, opts.threads);

    let width_profile: Vec<Option<Rational>> = w.widths.iter().map(|x| x.clone().flatten()).collect();
    let l4 = audit_width_decay(rule, algebra, opts, &width_profile);
    notes.push(String::from(
        "L4 checked by width decay only: per-level maximum width nonincreasing and shrinking along sampled branches",
    ));
    if w.l3.mode == Mode::Witnessed {
        notes.push(String::from("L3 witnessed on test points: algebra or rule lacks an exact tail descriptor"));
    }

    let mut verdicts = vec![
        AxiomVerdict { axiom: Axiom::L0, mode: w.l0.mode, outcome: w.l0.outcome },
        AxiomVerdict { axiom: Axiom::L1, mode: w.l1.mode, outcome: w.l1.outcome },
        AxiomVerdict { axiom: Axiom::L2, mode: l2.mode, outcome: l2.outcome },
        AxiomVerdict { axiom: Axiom::L3, mode: w.l3.mode, outcome: w.l3.outcome },
        l4,
        AxiomVerdict { axiom: Axiom::Nonempty, mode: w.nonempty.mode, outcome: w.nonempty.outcome },
    ];
    if opts.gap_bound {
        verdicts.push(AxiomVerdict { axiom: Axiom::Gap, mode: Mode::Exact, outcome: w.gap_tally.outcome });
    }
    if opts.pi_base {
        verdicts.push(AxiomVerdict { axiom: Axiom::L5, mode: Mode::Exact, outcome: w.l5.outcome });
        verdicts.push(audit_neighbourhood_tails(rule, algebra, opts));
    }
    SchemeAudit {
        label: rule.label(),
        depth: opts.depth,
        child_bound: opts.child_bound,
        nodes_checked: w.nodes,
        verdicts,
        width_profile,
        notes,
    }
}

fn branch_payloads<R, A>(rule: &R, algebra: &A, opts: &AuditOptions<'_, A>) -> Vec<(FinSeq, Vec<A::Set>)>
where
    R: SchemeRule<Payload = A::Set>,
    A: SetAlgebra,
{
    let len = opts.depth + 1;
    let mut out = Vec::new();
    for digit in [0, opts.child_bound] {
        let s = FinSeq::from_digits(vec![digit; len]);
        let mut chain = vec![rule.root()];
        for k in 0..len {
            let next = rule.child(&chain[k], k, digit);
            chain.push(next);
        }
        out.push((s, chain));
    }
    if let Some(loc) = opts.locator {
        for x in &opts.test_points {
            let Ok(s) = sigma_address(x, rule, algebra, loc, len, opts.child_bound) else {
                continue;
            };
            let chain = (0..=len).map(|k| rule.payload(&s.prefix(k))).collect();
            out.push((s, chain));
        }
    }
    out
}

fn audit_width_decay<R, A>(
    rule: &R,
    algebra: &A,
    opts: &AuditOptions<'_, A>,
    profile: &[Option<Rational>],
) -> AxiomVerdict
where
    R: SchemeRule<Payload = A::Set>,
    A: SetAlgebra,
{
    let mut tally = Tally::new(Mode::Witnessed);
    let first = profile.iter().position(|w| w.is_some());
    let Some(first) = first else {
        tally.unsupported(Unsupported("width"));
        return AxiomVerdict { axiom: Axiom::L4, mode: tally.mode, outcome: tally.outcome };
    };
    for d in first + 1..profile.len() {
        match (&profile[d - 1], &profile[d]) {
            (Some(a), Some(b)) if b <= a => {}
            (_, b) => {
                let shown = b.as_ref().map(|w| w.to_string()).unwrap_or_else(|| String::from("unbounded"));
                tally.fail(cx(&FinSeq::empty(), Some(d as u64), None, format!("max width at length {d} is {shown}")));
            }
        }
    }
    for (s, chain) in branch_payloads(rule, algebra, opts) {
        let Some(start) = chain.iter().position(|p| algebra.width(p).is_some()) else {
            continue;
        };
        let w0 = algebra.width(&chain[start]);
        let wn = algebra.width(chain.last().unwrap());
        match (w0, wn) {
            (Some(a), Some(b)) if b < a || (a.is_zero() && b.is_zero()) => {}
            (a, b) => tally.fail(cx(
                &s,
                None,
                None,
                format!("branch width does not shrink: {a:?} -> {b:?}"),
            )),
        }
    }
    AxiomVerdict { axiom: Axiom::L4, mode: tally.mode, outcome: tally.outcome }
}

/// (L6): for every test point `x` and supplied neighbourhood `O ∋ x` there is
/// `s` with `x ∈ V_s` and `n₀` with `⋃_{n ≥ n₀} V_{s^n} ⊆ O`.
fn audit_neighbourhood_tails<R, A>(rule: &R, algebra: &A, opts: &AuditOptions<'_, A>) -> AxiomVerdict
where
    R: SchemeRule<Payload = A::Set>,
    A: SetAlgebra,
{
    let mut tally = Tally::new(Mode::Witnessed);
    let (Some(loc), Some(nbhd)) = (opts.locator, opts.neighbourhoods) else {
        tally.unsupported(Unsupported("no locator or neighbourhood oracle for L6"));
        return AxiomVerdict { axiom: Axiom::L6, mode: tally.mode, outcome: tally.outcome };
    };
    let len = opts.depth + 1;
    'points: for x in &opts.test_points {
        let s = match sigma_address(x, rule, algebra, loc, len, opts.child_bound) {
            Ok(s) => s,
            Err(e) => {
                tally.fail(cx(&FinSeq::empty(), None, None, format!("address of {x}: {e}")));
                break;
            }
        };
        let chain: Vec<A::Set> = (0..=len).map(|k| rule.payload(&s.prefix(k))).collect();
        for o in nbhd(x) {
            let mut found = false;
            'search: for (k, p) in chain.iter().enumerate() {
                for n0 in 0..=opts.child_bound {
                    let Some(t) = rule.tail(p, k, n0) else {
                        tally.unsupported(Unsupported("tail descriptor"));
                        break 'points;
                    };
                    match algebra.is_subset(&t, &o) {
                        Ok(true) => {
                            found = true;
                            break 'search;
                        }
                        Ok(false) => {}
                        Err(u) => {
                            tally.unsupported(u);
                            break 'points;
                        }
                    }
                }
            }
            if !found {
                tally.fail(cx(&s, None, None, format!("no tail inside neighbourhood {o} of {x}")));
                break 'points;
            }
        }
    }
    AxiomVerdict { axiom: Axiom::L6, mode: tally.mode, outcome: tally.outcome }
}

/// A point of the Baire space given by a finite prefix followed by a repeated cycle.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BairePoint {
    pub prefix: Vec<u64>,
    pub cycle: Vec<u64>,
}

impl BairePoint {
    /// Panics if `cycle` is empty.
    pub fn new(prefix: Vec<u64>, cycle: Vec<u64>) -> Self {
        assert!(!cycle.is_empty(), "cycle must be nonempty");
        BairePoint { prefix, cycle }
    }

    pub fn digit(&self, i: usize) -> u64 {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// `x|m`
    pub fn restrict(&self, m: usize) -> FinSeq {
        FinSeq::from_digits((0..m).map(|i| self.digit(i)).collect())
    }

    pub fn extends(&self, s: &FinSeq) -> bool {
        s.digits().iter().enumerate().all(|(i, &d)| self.digit(i) == d)
    }
}

impl fmt::Display for BairePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", FinSeq::from_digits(self.prefix.clone()))?;
        write!(f, "{}...", FinSeq::from_digits(self.cycle.clone()))
    }
}

/// `{x ∈ N_stem : x(length(stem)) ≥ lo}`; `lo = 0` is the basic open `N_stem`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct BaireBox {
    pub stem: FinSeq,
    pub lo: u64,
}

impl BaireBox {
    pub fn basic(stem: FinSeq) -> Self {
        BaireBox { stem, lo: 0 }
    }

    fn meet(&self, other: &BaireBox) -> Option<BaireBox> {
        let (a, b) = if self.stem.len() <= other.stem.len() { (self, other) } else { (other, self) };
        if !a.stem.is_prefix_of(&b.stem) {
            return None;
        }
        if a.stem.len() == b.stem.len() {
            return Some(BaireBox { stem: a.stem.clone(), lo: a.lo.max(b.lo) });
        }
        (b.stem.digits()[a.stem.len()] >= a.lo).then(|| b.clone())
    }

    fn contains(&self, x: &BairePoint) -> bool {
        x.extends(&self.stem) && x.digit(self.stem.len()) >= self.lo
    }
}

/// Finite union of Baire boxes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BaireRegion(pub Vec<BaireBox>);

impl BaireRegion {
    pub fn basic(stem: FinSeq) -> Self {
        BaireRegion(vec![BaireBox::basic(stem)])
    }
}

impl fmt::Display for BaireRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("{}");
        }
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            if b.lo == 0 {
                write!(f, "N{}", b.stem)?;
            } else {
                write!(f, "N{}[>={}]", b.stem, b.lo)?;
            }
        }
        Ok(())
    }
}

/// Exact algebra of finite unions of Baire boxes.
#[derive(Clone, Copy, Debug, Default)]
pub struct BaireAlgebra;

impl BaireAlgebra {
    fn box_covered(&self, b: &BaireBox, by: &[BaireBox]) -> bool {
        let n = b.stem.len();
        let mut from_here: Option<u64> = None;
        for c in by {
            if c.stem.len() < n && c.stem.is_prefix_of(&b.stem) && b.stem.digits()[c.stem.len()] >= c.lo {
                return true;
            }
            if c.stem == b.stem {
                from_here = Some(from_here.map_or(c.lo, |m| m.min(c.lo)));
            }
        }
        // boxes with longer stems only reach finitely many children, so an
        // uncovered infinite tail can only be closed by a box at this stem
        let Some(m) = from_here else { return false };
        (b.lo..m).all(|d| self.box_covered(&BaireBox::basic(b.stem.extend(d)), by))
    }
}

impl SetAlgebra for BaireAlgebra {
    type Set = BaireRegion;
    type Point = BairePoint;

    fn universe(&self) -> BaireRegion {
        BaireRegion::basic(FinSeq::empty())
    }

    fn is_empty(&self, a: &BaireRegion) -> Result<bool, Unsupported> {
        Ok(a.0.is_empty())
    }

    fn intersect(&self, a: &BaireRegion, b: &BaireRegion) -> Result<BaireRegion, Unsupported> {
        let mut out: Vec<BaireBox> =
            a.0.iter().flat_map(|x| b.0.iter().filter_map(move |y| x.meet(y))).collect();
        out.sort();
        out.dedup();
        Ok(BaireRegion(out))
    }

    fn is_subset(&self, a: &BaireRegion, b: &BaireRegion) -> Result<bool, Unsupported> {
        Ok(a.0.iter().all(|x| self.box_covered(x, &b.0)))
    }

    fn contains(&self, a: &BaireRegion, p: &BairePoint) -> Result<bool, Unsupported> {
        Ok(a.0.iter().any(|b| b.contains(p)))
    }

    fn union_equals(&self, parts: &[BaireRegion], whole: &BaireRegion) -> Result<bool, Unsupported> {
        let all: Vec<BaireBox> = parts.iter().flat_map(|p| p.0.iter().cloned()).collect();
        Ok(self.is_subset(&BaireRegion(all.clone()), whole)? && self.is_subset(whole, &BaireRegion(all))?)
    }

    fn is_open(&self, _a: &BaireRegion) -> Result<bool, Unsupported> {
        Ok(true)
    }

    fn width(&self, a: &BaireRegion) -> Option<Rational> {
        a.0.iter().map(|b| Rational::pow2(-(b.stem.len() as i64))).max()
    }
}

/// The standard base `N_s` of the Baire space as a scheme.
#[derive(Clone, Copy, Debug, Default)]
pub struct BaireStandardBase;

impl SchemeRule for BaireStandardBase {
    type Payload = BaireRegion;

    fn root(&self) -> BaireRegion {
        BaireRegion::basic(FinSeq::empty())
    }

    fn child(&self, parent: &BaireRegion, _parent_len: usize, n: u64) -> BaireRegion {
        let stem = parent.0.first().map(|b| b.stem.clone()).unwrap_or_default();
        BaireRegion::basic(stem.extend(n))
    }

    fn tail(&self, parent: &BaireRegion, _parent_len: usize, from: u64) -> Option<BaireRegion> {
        let stem = parent.0.first().map(|b| b.stem.clone()).unwrap_or_default();
        Some(BaireRegion(vec![BaireBox { stem, lo: from }]))
    }

    fn label(&self) -> String {
        String::from("baire-standard")
    }
}

/// Reads the next digit off the point.
#[derive(Clone, Copy, Debug, Default)]
pub struct BaireLocator;

impl Locator<BairePoint, BaireRegion> for BaireLocator {
    fn locate(&self, point: &BairePoint, parent: &BaireRegion, _len: usize, bound: u64) -> Option<u64> {
        let stem = &parent.0.first()?.stem;
        let d = point.digit(stem.len());
        (d <= bound).then_some(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finseq_extend_and_prefix() {
        let s = FinSeq::from([1, 2]);
        let t = s.extend(7);
        assert_eq!(t.len(), 3);
        assert_eq!(t.prefix(2), s);
        assert!(s.is_prefix_of(&t));
        assert!(!t.is_prefix_of(&s));
        assert_eq!(FinSeq::empty().len(), 0);
    }

    #[test]
    fn finseq_text_round_trip() {
        let s = FinSeq::from([0, 2, 0, 0]);
        assert_eq!(s.to_string(), "[0,2,0,0]");
        assert_eq!("[0,2,0,0]".parse::<FinSeq>().unwrap(), s);
        assert_eq!("[]".parse::<FinSeq>().unwrap(), FinSeq::empty());
        assert!("[1,x]".parse::<FinSeq>().is_err());
    }

    #[test]
    fn baire_box_cover_decisions() {
        let alg = BaireAlgebra;
        let whole = BaireRegion::basic(FinSeq::empty());
        let mut parts: Vec<BaireBox> = (0..3).map(|n| BaireBox::basic(FinSeq::from([n]))).collect();
        assert!(!alg.is_subset(&whole, &BaireRegion(parts.clone())).unwrap());
        parts.push(BaireBox { stem: FinSeq::empty(), lo: 3 });
        assert!(alg.is_subset(&whole, &BaireRegion(parts.clone())).unwrap());
        // a hole two levels down
        let mut holey: Vec<BaireBox> = (1..3).map(|n| BaireBox::basic(FinSeq::from([n]))).collect();
        holey.push(BaireBox { stem: FinSeq::empty(), lo: 3 });
        holey.push(BaireBox { stem: FinSeq::from([0]), lo: 1 });
        assert!(!alg.is_subset(&whole, &BaireRegion(holey.clone())).unwrap());
        holey.push(BaireBox::basic(FinSeq::from([0, 0])));
        assert!(alg.is_subset(&whole, &BaireRegion(holey)).unwrap());
    }

    #[test]
    fn baire_standard_base_passes() {
        let opts = AuditOptions::<BaireAlgebra>::new(3, 6);
        let audit = validate_strict_lusin(&BaireStandardBase, &BaireAlgebra, &opts);
        assert!(audit.passed(), "{:?}", audit.verdicts);
        assert_eq!(audit.verdict(Axiom::L3).unwrap().mode, Mode::Exact);
    }

    #[test]
    fn baire_addresses_are_prefixes() {
        let x = BairePoint::new(vec![2, 7], vec![1]);
        let s = sigma_address(&x, &BaireStandardBase, &BaireAlgebra, &BaireLocator, 2, 32).unwrap();
        assert_eq!(s, FinSeq::from([2, 7]));
        let scan = ScanLocator { rule: &BaireStandardBase, algebra: &BaireAlgebra };
        let t = sigma_address(&x, &BaireStandardBase, &BaireAlgebra, &scan, 5, 32).unwrap();
        assert_eq!(t, x.restrict(5));
    }

    #[test]
    fn scan_bound_exhaustion_is_reported() {
        let x = BairePoint::new(vec![40], vec![0]);
        let scan = ScanLocator { rule: &BaireStandardBase, algebra: &BaireAlgebra };
        let err = sigma_address(&x, &BaireStandardBase, &BaireAlgebra, &scan, 1, 32).unwrap_err();
        assert_eq!(err, AddressError::BoundExhausted { level: 0 });
    }

    #[test]
    fn memo_tree_matches_direct_payload() {
        let tree = SchemeTree::new(BaireStandardBase);
        let s = FinSeq::from([3, 1, 4]);
        assert_eq!(tree.payload(&s), BaireStandardBase.payload(&s));
        assert_eq!(tree.payload(&s), tree.payload(&s));
        assert_eq!(tree.cached(), 4);
    }
}
