//! Closed-open continuous surjections from Sorgenfrey clopen sets onto
//! compact countable ordinal spaces, compiled as a lazy decision tree.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::cb::{finite_points, OrdInterval, OrdPoint, OrdinalSpace, SubSpace};
use super::ordinal::Ordinal;
use crate::rational::Rational;
use crate::sorgenfrey::{anchor_interval, decompose_clopen, ClopenDecomposition, SOpenSet, Segment};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapError {
    EmptyDomain,
    EmptyTarget,
    OutsideDomain(Rational),
    OutsideTarget(OrdPoint),
}

impl fmt::Display for MapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapError::EmptyDomain => f.write_str("empty domain"),
            MapError::EmptyTarget => f.write_str("empty target"),
            MapError::OutsideDomain(q) => write!(f, "{} is outside the domain", q),
            MapError::OutsideTarget((b, y)) => write!(f, "#{}:{} is outside the target", b, y),
        }
    }
}

/// A node whose target is one interval ending at its unique top-rank point
/// `y0`: `z0` maps to `y0`, `Z_n` onto `W_n`.
#[derive(Clone, Debug)]
pub struct LimitNode {
    pub domain: SOpenSet,
    pub block: usize,
    pub target: OrdInterval,
    /// `[a, a + w)` is the anchor; `U_n = [a, a + w/2^n)`.
    pub a: Rational,
    pub w: Rational,
    pub y0: Ordinal,
    // y0 = gamma + ω^(step+1); block ends are gamma + ω^step·i for i >= offset
    gamma: Ordinal,
    step: u32,
    offset: u64,
}

#[derive(Clone, Debug)]
pub enum MapNode {
    Leaf { domain: SOpenSet, value: OrdPoint },
    /// Finite clopen partition of the domain, one part per target piece; the
    /// last part takes the decomposition's remainder.
    Sum { domain: SOpenSet, target: SubSpace, split: ClopenDecomposition, parts: Vec<SubSpace> },
    Limit(LimitNode),
}

impl LimitNode {
    pub fn z0(&self) -> &Rational {
        &self.a
    }

    /// `U_n`
    pub fn shrink(&self, n: u32) -> SOpenSet {
        SOpenSet::interval(self.a.clone(), &self.a + &self.w.mul_pow2(-(n as i64)))
    }

    /// `Z_n`: the domain outside `U_1` for `n = 0`, else `U_n \ U_(n+1)`.
    pub fn piece(&self, n: u32) -> SOpenSet {
        if n == 0 {
            self.domain.difference(&self.shrink(1))
        } else {
            let lo = &self.a + &self.w.mul_pow2(-(n as i64) - 1);
            SOpenSet::interval(lo, &self.a + &self.w.mul_pow2(-(n as i64)))
        }
    }

    // i-th block end before the offset shift
    fn mark(&self, i: u64) -> Ordinal {
        self.gamma.add(&Ordinal::term(self.step, i))
    }

    /// `μ_n`, the right end of `W_n`.
    pub fn block_end(&self, n: u64) -> Ordinal {
        self.mark(self.offset + n)
    }

    /// `W_n`
    pub fn block(&self, n: u64) -> OrdInterval {
        if n == 0 {
            OrdInterval::new(self.target.lo.clone(), self.target.lo_closed, self.block_end(0), true)
        } else {
            OrdInterval::left_open(self.block_end(n - 1), self.block_end(n))
        }
    }

    /// `(μ_(n-1), y0]`, the union of `W_m` for `m >= n` and `{y0}`.
    pub fn block_tail(&self, n: u64) -> OrdInterval {
        if n == 0 {
            self.target.clone()
        } else {
            OrdInterval::left_open(self.block_end(n - 1), self.y0.clone())
        }
    }

    /// Index of the `Z_n` holding `q`, for `q` in the domain other than `z0`.
    pub fn piece_index(&self, q: &Rational) -> u32 {
        if *q <= self.a || *q >= &self.a + &self.w {
            return 0;
        }
        let r = &(q - &self.a) / &self.w;
        (-1 - r.floor_log2()).max(0) as u32
    }

    /// Index of the `W_n` holding `y`, for `y` in the target other than `y0`.
    pub fn block_index(&self, y: &Ordinal) -> u64 {
        if *y <= self.block_end(0) {
            return 0;
        }
        let c = y.coeff(self.step);
        let i = if *y == self.mark(c) { c } else { c + 1 };
        i.saturating_sub(self.offset)
    }

    pub fn child(&self, n: u32) -> MapNode {
        MapNode::build(&self.piece(n), &SubSpace::from_pieces([(self.block, self.block(n as u64))]))
            .expect("pieces and blocks are nonempty")
    }

    /// Smallest `n >= 1` with `U_n` inside `set`, when `set` holds `z0`.
    fn inner_index(&self, set: &SOpenSet) -> Option<u32> {
        let seg = set.component_of(&self.a)?;
        let Some(e) = &seg.hi else { return Some(1) };
        let room = &(e - &self.a) / &self.w;
        Some(if room >= Rational::one() { 1 } else { (-room.floor_log2()).max(1) as u32 })
    }

    /// Smallest `n >= 1` with `U_n` missing `set`, when `set` misses `z0`.
    fn outer_index(&self, set: &SOpenSet) -> u32 {
        let gap = set
            .segments()
            .iter()
            .filter_map(|s| s.lo.as_ref().filter(|l| **l > self.a))
            .min()
            .map(|l| l - &self.a);
        match gap {
            None => 1,
            Some(g) => {
                let room = &g / &self.w;
                if room >= Rational::one() {
                    1
                } else {
                    (-room.floor_log2()).max(1) as u32
                }
            }
        }
    }
}

fn single(block: usize, iv: OrdInterval) -> SubSpace {
    SubSpace::from_pieces([(block, iv)])
}

// cut one interval into pieces each ending at a top-rank point, plus the part above
fn top_split(iv: &OrdInterval) -> Vec<OrdInterval> {
    let tops = iv.top_points();
    let mut out = Vec::new();
    let mut lo = (iv.lo.clone(), iv.lo_closed);
    for t in tops {
        out.push(OrdInterval::new(lo.0, lo.1, t.clone(), true));
        lo = (t, false);
    }
    let rest = OrdInterval::new(lo.0, lo.1, iv.hi.clone(), iv.hi_closed);
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}

impl MapNode {
    /// Compiles one level of the map from `domain` onto `target`.
    pub fn build(domain: &SOpenSet, target: &SubSpace) -> Result<MapNode, MapError> {
        if domain.is_empty() {
            return Err(MapError::EmptyDomain);
        }
        let pieces = target.pieces();
        let sum = |parts: Vec<SubSpace>| {
            let split = decompose_clopen(domain).expect("nonempty domain");
            MapNode::Sum { domain: domain.clone(), target: target.clone(), split, parts }
        };
        match pieces {
            [] => Err(MapError::EmptyTarget),
            [(b, iv)] => {
                if let Some(x) = iv.single_point() {
                    return Ok(MapNode::Leaf { domain: domain.clone(), value: (*b, x) });
                }
                if iv.max_rank() == Some(0) {
                    let pts = finite_points(iv);
                    return Ok(sum(pts.into_iter().map(|x| single(*b, OrdInterval::point(x))).collect()));
                }
                let parts = top_split(iv);
                if parts.len() > 1 {
                    return Ok(sum(parts.into_iter().map(|p| single(*b, p)).collect()));
                }
                Ok(MapNode::Limit(LimitNode::new(domain, *b, iv)))
            }
            _ => Ok(sum(pieces.iter().map(|(b, iv)| single(*b, iv.clone())).collect())),
        }
    }

    pub fn domain(&self) -> &SOpenSet {
        match self {
            MapNode::Leaf { domain, .. } | MapNode::Sum { domain, .. } => domain,
            MapNode::Limit(l) => &l.domain,
        }
    }

    pub fn target(&self) -> SubSpace {
        match self {
            MapNode::Leaf { value, .. } => single(value.0, OrdInterval::point(value.1.clone())),
            MapNode::Sum { target, .. } => target.clone(),
            MapNode::Limit(l) => single(l.block, l.target.clone()),
        }
    }

    /// Children as (domain piece, target piece, node); a limit node lists
    /// `Z_0..Z_(count-1)`.
    pub fn children(&self, count: u32) -> Vec<MapNode> {
        match self {
            MapNode::Leaf { .. } => Vec::new(),
            MapNode::Sum { .. } => (0..self.sum_len()).map(|i| self.sum_child(i)).collect(),
            MapNode::Limit(l) => (0..count).map(|n| l.child(n)).collect(),
        }
    }

    fn sum_len(&self) -> usize {
        match self {
            MapNode::Sum { parts, .. } => parts.len(),
            _ => 0,
        }
    }

    fn sum_domain(&self, i: usize) -> SOpenSet {
        let MapNode::Sum { split, parts, .. } = self else { unreachable!() };
        if i + 1 == parts.len() {
            split.remainder(i as u64)
        } else {
            split.piece(i as u64)
        }
    }

    fn sum_child(&self, i: usize) -> MapNode {
        let MapNode::Sum { parts, .. } = self else { unreachable!() };
        MapNode::build(&self.sum_domain(i), &parts[i]).expect("sum parts are nonempty")
    }

    fn sum_index(&self, q: &Rational) -> Option<usize> {
        let MapNode::Sum { split, parts, .. } = self else { unreachable!() };
        split.index_of(q).map(|i| (i as usize).min(parts.len() - 1))
    }
}

impl LimitNode {
    fn new(domain: &SOpenSet, block: usize, iv: &OrdInterval) -> LimitNode {
        let (a, b) = anchor_interval(domain).expect("nonempty domain");
        let (gamma, k) = iv.hi.split_last().expect("limit top");
        let step = k - 1;
        let c = iv.lo.coeff(step);
        let mark = |i: u64| gamma.add(&Ordinal::term(step, i));
        // first mark inside the target; gamma itself when it lies above lo
        let offset = if iv.lo < gamma || iv.contains(&gamma) {
            0
        } else if iv.contains(&mark(c)) {
            c
        } else {
            c + 1
        };
        LimitNode {
            domain: domain.clone(),
            block,
            target: iv.clone(),
            w: &b - &a,
            a,
            y0: iv.hi.clone(),
            gamma,
            step,
            offset,
        }
    }
}

/// Compiled map onto a whole ordinal space.
#[derive(Clone, Debug)]
pub struct ClosedOpenMap {
    pub space: OrdinalSpace,
    pub root: MapNode,
}

pub fn build_closed_open_map(domain: &SOpenSet, space: &OrdinalSpace) -> Result<ClosedOpenMap, MapError> {
    Ok(ClosedOpenMap { space: space.clone(), root: MapNode::build(domain, &space.whole())? })
}

/// One step of a descent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Part(usize),
    Piece(u32),
    Anchor,
    Leaf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub value: OrdPoint,
    pub path: Vec<Step>,
    /// Limit nodes passed through.
    pub limit_depth: usize,
}

impl ClosedOpenMap {
    pub fn eval(&self, q: &Rational) -> Result<Evaluation, MapError> {
        if !self.root.domain().contains(q) {
            return Err(MapError::OutsideDomain(q.clone()));
        }
        let mut node = self.root.clone();
        let mut path = Vec::new();
        let mut limit_depth = 0;
        loop {
            node = match &node {
                MapNode::Leaf { value, .. } => {
                    path.push(Step::Leaf);
                    return Ok(Evaluation { value: value.clone(), path, limit_depth });
                }
                MapNode::Sum { .. } => {
                    let i = node.sum_index(q).expect("q stays in the domain");
                    path.push(Step::Part(i));
                    node.sum_child(i)
                }
                MapNode::Limit(l) => {
                    limit_depth += 1;
                    if *q == l.a {
                        path.push(Step::Anchor);
                        return Ok(Evaluation { value: (l.block, l.y0.clone()), path, limit_depth });
                    }
                    let n = l.piece_index(q);
                    path.push(Step::Piece(n));
                    l.child(n)
                }
            };
        }
    }

    /// An explicit rational mapped to `y`.
    pub fn preimage_point(&self, y: &OrdPoint) -> Result<Rational, MapError> {
        if !self.root.target().contains(y) {
            return Err(MapError::OutsideTarget(y.clone()));
        }
        let mut node = self.root.clone();
        loop {
            node = match &node {
                MapNode::Leaf { domain, .. } => return Ok(domain.sample_point().expect("nonempty")),
                MapNode::Sum { parts, .. } => {
                    let i = parts.iter().position(|p| p.contains(y)).expect("parts cover the target");
                    node.sum_child(i)
                }
                MapNode::Limit(l) => {
                    if y.1 == l.y0 {
                        return Ok(l.a.clone());
                    }
                    l.child(l.block_index(&y.1) as u32)
                }
            };
        }
    }

    /// Exact preimage of a clopen subset of the target.
    pub fn preimage(&self, set: &SubSpace) -> SOpenSet {
        preimage_at(&self.root, set)
    }

    /// Exact image of a clopen subset of the domain.
    pub fn image(&self, set: &SOpenSet) -> Image {
        let mut tails = Vec::new();
        let points = image_at(&self.root, &set.intersect(self.root.domain()), &mut tails);
        Image { points, tails }
    }
}

fn preimage_at(node: &MapNode, set: &SubSpace) -> SOpenSet {
    let target = node.target();
    let set = set.intersect(&target);
    if set.is_empty() {
        return SOpenSet::empty();
    }
    if set == target {
        return node.domain().clone();
    }
    match node {
        MapNode::Leaf { .. } => unreachable!("a point target is either hit or missed"),
        MapNode::Sum { parts, .. } => {
            let mut out = SOpenSet::empty();
            for i in 0..parts.len() {
                out = out.union(&preimage_at(&node.sum_child(i), &set));
            }
            out
        }
        MapNode::Limit(l) => {
            let y0 = (l.block, l.y0.clone());
            // an open set holding y0 holds a tail of blocks; a closed one missing it misses a tail
            let (upto, mut out) = if set.contains(&y0) {
                let piece = set.pieces().iter().find(|p| p.1.contains(&l.y0)).expect("y0 is in the set");
                // first n with μ_(n-1) >= the piece's left end
                let n = l.block_index(&piece.1.lo) + 1;
                (n, l.shrink(n as u32))
            } else {
                let top = set.pieces().iter().map(|p| l.block_index(&p.1.hi)).max().unwrap_or(0);
                (top + 1, SOpenSet::empty())
            };
            for n in 0..upto {
                out = out.union(&preimage_at(&l.child(n as u32), &set));
            }
            out
        }
    }
}

/// Image of a clopen set: the listed points' intervals plus, for each limit
/// node whose `z0` was inside, the certified tail `(μ_(N-1), y0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub points: SubSpace,
    pub tails: Vec<(OrdPoint, u64)>,
}

fn image_at(node: &MapNode, set: &SOpenSet, tails: &mut Vec<(OrdPoint, u64)>) -> SubSpace {
    if set.is_empty() {
        return SubSpace::empty();
    }
    if set == node.domain() {
        return node.target();
    }
    match node {
        MapNode::Leaf { value, .. } => single(value.0, OrdInterval::point(value.1.clone())),
        MapNode::Sum { parts, .. } => {
            let mut out = SubSpace::empty();
            for i in 0..parts.len() {
                let part = node.sum_domain(i);
                out = out.union(&image_at(&node.sum_child(i), &set.intersect(&part), tails));
            }
            out
        }
        MapNode::Limit(l) => {
            let (upto, mut out) = if set.contains(&l.a) {
                let n = l.inner_index(set).expect("set holds z0");
                tails.push(((l.block, l.y0.clone()), n as u64));
                (n, single(l.block, l.block_tail(n as u64)))
            } else {
                (l.outer_index(set), SubSpace::empty())
            };
            for n in 0..upto {
                out = out.union(&image_at(&l.child(n), &set.intersect(&l.piece(n)), tails));
            }
            out
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapCheck {
    pub name: &'static str,
    pub checked: usize,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapAudit {
    pub nodes: usize,
    pub checks: Vec<MapCheck>,
}

impl MapAudit {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.failure.is_none())
    }

    pub fn check(&self, name: &str) -> Option<&MapCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tally {
    name: &'static str,
    checked: usize,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, checked: 0, failure: None }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn done(self) -> MapCheck {
        MapCheck { name: self.name, checked: self.checked, failure: self.failure }
    }
}

fn union_all<'a>(sets: impl IntoIterator<Item = &'a SOpenSet>) -> SOpenSet {
    sets.into_iter().fold(SOpenSet::empty(), |acc, s| acc.union(s))
}

fn disjoint_sets(sets: &[SOpenSet]) -> bool {
    let mut segs: Vec<&Segment> = sets.iter().flat_map(|s| s.segments()).collect();
    segs.sort_by(|x, y| match (&x.lo, &y.lo) {
        (Some(a), Some(b)) => a.cmp(b),
        (None, _) => core::cmp::Ordering::Less,
        (_, None) => core::cmp::Ordering::Greater,
    });
    segs.windows(2).all(|w| match (&w[0].hi, &w[1].lo) {
        (Some(h), Some(l)) => h <= l,
        _ => false,
    })
}

fn disjoint_spaces(sets: &[SubSpace]) -> bool {
    sets.iter().enumerate().all(|(i, x)| sets[i + 1..].iter().all(|y| x.intersect(y).is_empty()))
}

fn node_label(path: &[u32]) -> String {
    let parts: Vec<String> = path.iter().map(|n| format!("{}", n)).collect();
    format!("<{}>", parts.join(","))
}

// partition invariants at every node reached with child indices < count
struct NodeTallies {
    part: Tally,
    heights: Tally,
    nonempty: Tally,
}

fn audit_nodes(node: &MapNode, count: u32, depth: usize, path: &mut Vec<u32>, nodes: &mut usize, t: &mut NodeTallies) {
    *nodes += 1;
    let label = || node_label(path);
    match node {
        MapNode::Leaf { domain, .. } => t.nonempty.record(!domain.is_empty(), label),
        MapNode::Sum { domain, target, parts, .. } => {
            let kids: Vec<MapNode> = node.children(0);
            let doms: Vec<SOpenSet> = kids.iter().map(|k| k.domain().clone()).collect();
            let tgts: Vec<SubSpace> = kids.iter().map(MapNode::target).collect();
            t.nonempty.record(doms.iter().all(|d| !d.is_empty()) && tgts.iter().all(|x| !x.is_empty()), label);
            t.part.record(
                disjoint_sets(&doms)
                    && union_all(&doms) == *domain
                    && disjoint_spaces(&tgts)
                    && tgts.iter().fold(SubSpace::empty(), |a, x| a.union(x)) == *target
                    && tgts == *parts,
                label,
            );
            let h = target.height();
            t.heights.record(tgts.iter().all(|x| x.height() <= h), label);
            if depth > 0 {
                for (i, k) in kids.iter().enumerate() {
                    path.push(i as u32);
                    audit_nodes(k, count, depth - 1, path, nodes, t);
                    path.pop();
                }
            }
        }
        MapNode::Limit(l) => {
            let kids = node.children(count);
            let doms: Vec<SOpenSet> = kids.iter().map(|k| k.domain().clone()).collect();
            let tgts: Vec<SubSpace> = kids.iter().map(MapNode::target).collect();
            let tail_dom = l.shrink(count);
            let tail_tgt = single(l.block, l.block_tail(count as u64));
            let mut all_doms = doms.clone();
            all_doms.push(tail_dom.clone());
            let mut all_tgts = tgts.clone();
            all_tgts.push(tail_tgt.clone());
            t.nonempty.record(doms.iter().all(|d| !d.is_empty()) && tgts.iter().all(|x| !x.is_empty()), label);
            t.part.record(
                disjoint_sets(&all_doms)
                    && union_all(&all_doms) == l.domain
                    && tail_dom.contains(&l.a)
                    && disjoint_spaces(&all_tgts)
                    && all_tgts.iter().fold(SubSpace::empty(), |a, x| a.union(x)) == single(l.block, l.target.clone())
                    && tail_tgt.contains(&(l.block, l.y0.clone()))
                    && !tgts.iter().any(|x| x.contains(&(l.block, l.y0.clone()))),
                label,
            );
            let h = single(l.block, l.target.clone()).height();
            t.heights.record(tgts.iter().all(|x| x.height() < h), label);
            if depth > 0 {
                for (i, k) in kids.iter().enumerate() {
                    path.push(i as u32);
                    audit_nodes(k, count, depth - 1, path, nodes, t);
                    path.pop();
                }
            }
        }
    }
}

/// Exact checks of a compiled map (samples outside the domain are ignored):
/// - partition invariants at every node reached by child indices `<= bound`;
/// - exact preimages of `W_n` and of `(μ_n, y0]` for `n <= bound` at the
///   root, each complementary to the preimage of the rest of the space;
/// - images of intervals between consecutive samples, checked against the
///   samples and by pulling back;
/// - an explicit preimage for every point whose digits are `<= bound`.
pub fn verify_map(map: &ClosedOpenMap, samples: &[Rational], bound: u32) -> MapAudit {
    let mut nodes = 0;
    let mut t = NodeTallies { part: Tally::new("partition"), heights: Tally::new("heights"), nonempty: Tally::new("nonempty") };
    // materialize enough levels to reach every leaf of the desk-scale spaces
    let depth = map.space.blocks.iter().filter_map(|b| b.leading_exp()).max().unwrap_or(0) as usize * 2 + 2;
    audit_nodes(&map.root, bound + 1, depth, &mut Vec::new(), &mut nodes, &mut t);
    let NodeTallies { part, heights, nonempty } = t;

    let whole = map.space.whole();
    let domain = map.root.domain().clone();
    let samples: Vec<Rational> = samples.iter().filter(|q| domain.contains(q)).cloned().collect();
    let samples = &samples[..];

    let mut total = Tally::new("eval-total");
    let values: Vec<Option<OrdPoint>> = samples
        .iter()
        .map(|q| {
            let ev = map.eval(q).ok();
            total.record(
                ev.as_ref().map_or(false, |e| whole.contains(&e.value) && e.limit_depth <= whole.height() as usize),
                || format!("eval({})", q),
            );
            ev.map(|e| e.value)
        })
        .collect();

    let mut cont = Tally::new("continuity");
    let mut sets: Vec<SubSpace> = Vec::new();
    if let MapNode::Limit(l) = &map.root {
        for n in 0..=bound as u64 {
            sets.push(single(l.block, l.block(n)));
            sets.push(single(l.block, l.block_tail(n + 1)));
        }
    } else {
        sets.extend(whole.pieces().iter().map(|p| single(p.0, p.1.clone())));
    }
    for s in &sets {
        let pre = map.preimage(s);
        let rest = map.preimage(&whole.difference(s));
        let mut ok = pre.intersect(&rest).is_empty() && pre.union(&rest) == domain && !pre.is_empty();
        for (q, v) in samples.iter().zip(&values) {
            if let Some(v) = v {
                ok &= pre.contains(q) == s.contains(v);
            }
        }
        for seg in pre.segments() {
            if let Some(lo) = &seg.lo {
                ok &= map.eval(lo).map_or(false, |e| s.contains(&e.value));
            }
        }
        cont.record(ok, || format!("preimage of {}", s));
    }

    let mut img = Tally::new("images");
    let mut sorted: Vec<Rational> = samples.to_vec();
    sorted.sort();
    sorted.dedup();
    for w in sorted.windows(2).step_by(7) {
        let c = SOpenSet::interval(w[0].clone(), w[1].clone()).intersect(&domain);
        if c.is_empty() {
            continue;
        }
        let im = map.image(&c);
        let mut ok = im.points.is_clopen_in(&map.space)
            && c.is_subset(&map.preimage(&im.points))
            && im.points.pieces().iter().all(|p| !map.preimage(&single(p.0, p.1.clone())).intersect(&c).is_empty());
        for (q, v) in samples.iter().zip(&values) {
            if let (true, Some(v)) = (c.contains(q), v) {
                ok &= im.points.contains(v);
            }
        }
        img.record(ok, || format!("image of {}", c));
    }

    let mut surj = Tally::new("surjectivity");
    for (b, top) in map.space.blocks.iter().enumerate() {
        for y in Ordinal::truncation(top, bound as u64 + 1) {
            let p = (b, y);
            let ok = map.preimage_point(&p).ok().and_then(|q| map.eval(&q).ok()).map_or(false, |e| e.value == p);
            surj.record(ok, || format!("preimage of #{}:{}", p.0, p.1));
        }
    }

    MapAudit {
        nodes,
        checks: [part, heights, nonempty, total, cont, img, surj].into_iter().map(Tally::done).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn unit() -> SOpenSet {
        SOpenSet::interval(r("0"), r("1"))
    }

    fn map(alpha: &str) -> ClosedOpenMap {
        build_closed_open_map(&unit(), &OrdinalSpace::ordinal(&o(alpha)).unwrap()).unwrap()
    }

    #[test]
    fn omega_plus_one() {
        let m = map("w+1");
        let MapNode::Limit(l) = &m.root else { panic!("expected a limit node") };
        assert_eq!(l.y0, o("w"));
        assert_eq!(*l.z0(), r("0"));
        for n in 0..6u32 {
            let lo = Rational::pow2(-(n as i64) - 1);
            assert_eq!(l.piece(n), SOpenSet::interval(lo, Rational::pow2(-(n as i64))));
            assert_eq!(l.block(n as u64), OrdInterval::point(Ordinal::finite(n as u64)));
        }
        assert_eq!(m.eval(&r("0")).unwrap().value, (0, o("w")));
        assert_eq!(m.eval(&r("3/4")).unwrap().value, (0, o("0")));
        assert_eq!(m.eval(&r("1/5")).unwrap().value, (0, o("2")));
        for n in 0..=50u64 {
            assert_eq!(m.preimage_point(&(0, Ordinal::finite(n))).unwrap(), Rational::pow2(-(n as i64) - 1));
        }
        let tail = SubSpace::interval(OrdInterval::left_open(o("5"), o("w")));
        assert_eq!(m.preimage(&tail), SOpenSet::interval(r("0"), r("1/64")));
    }

    #[test]
    fn single_point_is_a_leaf() {
        let m = map("1");
        assert!(matches!(m.root, MapNode::Leaf { ref value, .. } if *value == (0, o("0"))));
    }

    #[test]
    fn omega_squared_children() {
        let m = map("w^2+1");
        let MapNode::Limit(l) = &m.root else { panic!("expected a limit node") };
        assert_eq!(l.y0, o("w^2"));
        assert_eq!(l.block(0).to_string(), "{0}");
        for n in 1..5u64 {
            let b = l.block(n);
            assert_eq!(b, OrdInterval::left_open(Ordinal::term(1, n - 1), Ordinal::term(1, n)));
            assert_eq!(SubSpace::interval(b).height(), 2);
        }
    }

    #[test]
    fn sums_and_successor_tops() {
        let space = OrdinalSpace::sum(&[o("w+3"), o("2"), o("w^2*2+1")]).unwrap();
        let m = build_closed_open_map(&SOpenSet::interval(r("-1"), r("3")), &space).unwrap();
        let samples: Vec<Rational> = (0..400).map(|i| Rational::new(i * 4 - 400, 401)).collect();
        let audit = verify_map(&m, &samples, 6);
        assert!(audit.passed(), "{:?}", audit);
    }

    #[test]
    fn audit_omega_squared() {
        let m = map("w^2+1");
        let samples: Vec<Rational> = (0..300).map(|i| Rational::new(i * 7 + 1, 2200)).collect();
        let audit = verify_map(&m, &samples, 12);
        assert!(audit.passed(), "{:?}", audit);
    }
}
