//! Sorgenfrey open sets as canonical unions of half-open rational intervals,
//! and the Lusin π-base of the Sorgenfrey line.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use smallvec::{smallvec, SmallVec};

use crate::rational::Rational;
use crate::seqcore::{sigma_address, FinSeq, Locator, SchemeRule, SetAlgebra, Unsupported};

/// `[a, b)` with `a < b`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HalfInterval {
    pub a: Rational,
    pub b: Rational,
}

impl HalfInterval {
    /// Panics unless `a < b`.
    pub fn new(a: Rational, b: Rational) -> Self {
        assert!(a < b, "empty half interval");
        HalfInterval { a, b }
    }

    pub fn width(&self) -> Rational {
        &self.b - &self.a
    }
}

/// `[lo, hi)` where a missing `lo` is `-inf` and a missing `hi` is `+inf`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

fn cmp_lo(a: &Option<Rational>, b: &Option<Rational>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, _) => Ordering::Less,
        (_, None) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

fn cmp_hi(a: &Option<Rational>, b: &Option<Rational>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, _) => Ordering::Greater,
        (_, None) => Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

// lo (closed, -inf if None) against hi (open, +inf if None): is lo < hi?
fn lo_below_hi(lo: &Option<Rational>, hi: &Option<Rational>) -> bool {
    match (lo, hi) {
        (None, _) | (_, None) => true,
        (Some(l), Some(h)) => l < h,
    }
}

fn max_hi(a: &Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
    if cmp_hi(a, b) == Ordering::Less {
        b.clone()
    } else {
        a.clone()
    }
}

impl Segment {
    pub fn new(lo: Option<Rational>, hi: Option<Rational>) -> Self {
        Segment { lo, hi }
    }

    pub fn bounded(a: Rational, b: Rational) -> Self {
        Segment { lo: Some(a), hi: Some(b) }
    }

    pub fn is_empty(&self) -> bool {
        !lo_below_hi(&self.lo, &self.hi)
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.lo.as_ref().map_or(true, |l| l <= q) && self.hi.as_ref().map_or(true, |h| q < h)
    }

    fn within(&self, other: &Segment) -> bool {
        cmp_lo(&other.lo, &self.lo) != Ordering::Greater && cmp_hi(&self.hi, &other.hi) != Ordering::Greater
    }

    pub fn width(&self) -> Option<Rational> {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) => write!(f, "[{a}, {b})"),
            (Some(a), None) => write!(f, "[{a}, +inf)"),
            (None, Some(b)) => write!(f, "(-inf, {b})"),
            (None, None) => f.write_str("(-inf, +inf)"),
        }
    }
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Canonical finite union of half-open intervals and rays: sorted, pairwise
/// disjoint, no two adjacent. Every such set is clopen in the Sorgenfrey line.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SOpenSet {
    segs: SmallVec<[Segment; 1]>,
}

impl SOpenSet {
    pub fn empty() -> Self {
        SOpenSet { segs: SmallVec::new() }
    }

    pub fn line() -> Self {
        SOpenSet { segs: smallvec![Segment::new(None, None)] }
    }

    /// `[a, b)`, empty when `a >= b`.
    pub fn interval(a: Rational, b: Rational) -> Self {
        if a < b {
            SOpenSet { segs: smallvec![Segment::bounded(a, b)] }
        } else {
            SOpenSet::empty()
        }
    }

    /// `[a, +inf)`
    pub fn from_point_up(a: Rational) -> Self {
        SOpenSet { segs: smallvec![Segment::new(Some(a), None)] }
    }

    /// `(-inf, b)`
    pub fn below(b: Rational) -> Self {
        SOpenSet { segs: smallvec![Segment::new(None, Some(b))] }
    }

    /// Canonical form of an arbitrary list of segments.
    pub fn from_segments<I: IntoIterator<Item = Segment>>(segs: I) -> Self {
        let mut v: Vec<Segment> = segs.into_iter().filter(|s| !s.is_empty()).collect();
        v.sort_by(|x, y| cmp_lo(&x.lo, &y.lo));
        let mut out: SmallVec<[Segment; 1]> = SmallVec::with_capacity(v.len());
        for s in v {
            if let Some(last) = out.last_mut() {
                // merge on overlap or adjacency: next.lo <= last.hi
                let touches = match (&s.lo, &last.hi) {
                    (_, None) | (None, _) => true,
                    (Some(l), Some(h)) => l <= h,
                };
                if touches {
                    last.hi = max_hi(&last.hi, &s.hi);
                    continue;
                }
            }
            out.push(s);
        }
        SOpenSet { segs: out }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segs
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    pub fn is_line(&self) -> bool {
        self.segs.len() == 1 && self.segs[0].lo.is_none() && self.segs[0].hi.is_none()
    }

    pub fn contains(&self, q: &Rational) -> bool {
        // segments are sorted; find the last one starting at or before q
        let idx = self.segs.partition_point(|s| s.lo.as_ref().map_or(true, |l| l <= q));
        idx > 0 && self.segs[idx - 1].contains(q)
    }

    /// The component containing `q`.
    pub fn component_of(&self, q: &Rational) -> Option<&Segment> {
        self.segs.iter().find(|s| s.contains(q))
    }

    /// `[x, z] ⊆ self` for the closed segment with `x <= z`.
    pub fn contains_closed(&self, x: &Rational, z: &Rational) -> bool {
        self.component_of(x).is_some_and(|s| s.hi.as_ref().map_or(true, |h| z < h))
    }

    pub fn union(&self, other: &SOpenSet) -> SOpenSet {
        SOpenSet::from_segments(self.segs.iter().chain(other.segs.iter()).cloned())
    }

    pub fn intersect(&self, other: &SOpenSet) -> SOpenSet {
        let mut out = SmallVec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.segs.len() && j < other.segs.len() {
            let (x, y) = (&self.segs[i], &other.segs[j]);
            let lo = if cmp_lo(&x.lo, &y.lo) == Ordering::Greater { x.lo.clone() } else { y.lo.clone() };
            let hi = if cmp_hi(&x.hi, &y.hi) == Ordering::Less { x.hi.clone() } else { y.hi.clone() };
            let s = Segment::new(lo, hi);
            if !s.is_empty() {
                out.push(s);
            }
            if cmp_hi(&x.hi, &y.hi) == Ordering::Less {
                i += 1;
            } else {
                j += 1;
            }
        }
        // pieces of two canonical sets cannot become adjacent
        SOpenSet { segs: out }
    }

    /// Complement in the line; again a canonical clopen set.
    pub fn complement(&self) -> SOpenSet {
        let mut out = SmallVec::new();
        let mut cursor: Option<Option<Rational>> = Some(None);
        for s in &self.segs {
            if let Some(from) = cursor.take() {
                let gap = Segment::new(from, s.lo.clone());
                if s.lo.is_some() && !gap.is_empty() {
                    out.push(gap);
                }
            }
            cursor = s.hi.clone().map(|h| Some(h));
        }
        if let Some(from) = cursor {
            out.push(Segment::new(from, None));
        }
        SOpenSet { segs: out }
    }

    pub fn difference(&self, other: &SOpenSet) -> SOpenSet {
        self.intersect(&other.complement())
    }

    pub fn is_subset(&self, other: &SOpenSet) -> bool {
        if let ([s], [o]) = (&self.segs[..], &other.segs[..]) {
            return s.within(o);
        }
        let mut j = 0;
        for s in &self.segs {
            // skip components ending at or before s starts
            while j < other.segs.len() && !lo_below_hi(&s.lo, &other.segs[j].hi) {
                j += 1;
            }
            if j == other.segs.len() || !s.within(&other.segs[j]) {
                return false;
            }
        }
        true
    }

    /// `sup - inf`, `None` if unbounded or empty.
    pub fn diameter(&self) -> Option<Rational> {
        let lo = self.segs.first()?.lo.as_ref()?;
        let hi = self.segs.last()?.hi.as_ref()?;
        Some(hi - lo)
    }

    /// Total length, `None` if unbounded.
    pub fn measure(&self) -> Option<Rational> {
        self.segs.iter().try_fold(Rational::zero(), |acc, s| s.width().map(|w| acc + w))
    }

    /// Rational tokens as used in exports.
    pub fn tokens(&self) -> Vec<String> {
        self.segs.iter().map(|s| s.to_string()).collect()
    }

    /// Some point of the set: the left end of the first component, or one
    /// below the right end of a leading ray.
    pub fn sample_point(&self) -> Option<Rational> {
        let s = self.segs.first()?;
        Some(match (&s.lo, &s.hi) {
            (Some(a), _) => a.clone(),
            (None, Some(b)) => b - &Rational::one(),
            (None, None) => Rational::zero(),
        })
    }
}

impl fmt::Display for SOpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.segs.is_empty() {
            return f.write_str("{}");
        }
        for (i, s) in self.segs.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for SOpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseSetError(pub String);

impl fmt::Display for ParseSetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid set {:?}", self.0)
    }
}

fn parse_end(s: &str) -> Result<Option<Rational>, ()> {
    match s.trim() {
        "+inf" | "inf" | "-inf" => Ok(None),
        t => t.parse::<Rational>().map(Some).map_err(|_| ()),
    }
}

impl FromStr for SOpenSet {
    type Err = ParseSetError;

    /// Parses tokens `[a, b)`, `[a, +inf)`, `(-inf, b)`, `(-inf, +inf)`
    /// separated by `u`, `,` or whitespace; `{}` is the empty set.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseSetError(s.into());
        let mut rest = s.trim();
        if rest == "{}" || rest.is_empty() {
            return Ok(SOpenSet::empty());
        }
        let mut segs = Vec::new();
        while !rest.is_empty() {
            rest = rest.trim_start_matches(|c: char| c.is_whitespace() || c == ',' || c == 'u' || c == 'U');
            if rest.is_empty() {
                break;
            }
            let open = rest.chars().next().ok_or_else(err)?;
            let close = rest.find(')').ok_or_else(err)?;
            let body = &rest[1..close];
            let (l, r) = body.split_once(',').ok_or_else(err)?;
            let lo = parse_end(l).map_err(|_| err())?;
            let hi = parse_end(r).map_err(|_| err())?;
            match (open, &lo, l.trim(), r.trim()) {
                ('[', Some(_), _, rt) if rt != "-inf" => {}
                ('(', None, "-inf", rt) if rt != "-inf" => {}
                _ => return Err(err()),
            }
            if r.trim() == "inf" {
                return Err(err());
            }
            let seg = Segment::new(lo, hi);
            if seg.is_empty() {
                return Err(err());
            }
            segs.push(seg);
            rest = &rest[close + 1..];
        }
        Ok(SOpenSet::from_segments(segs))
    }
}

impl From<HalfInterval> for SOpenSet {
    fn from(h: HalfInterval) -> Self {
        SOpenSet::interval(h.a, h.b)
    }
}

/// Exact open-set algebra of the Sorgenfrey line on canonical sets.
#[derive(Clone, Copy, Debug, Default)]
pub struct SorgenfreyAlgebra;

impl SetAlgebra for SorgenfreyAlgebra {
    type Set = SOpenSet;
    type Point = Rational;

    fn universe(&self) -> SOpenSet {
        SOpenSet::line()
    }

    fn is_empty(&self, a: &SOpenSet) -> Result<bool, Unsupported> {
        Ok(a.is_empty())
    }

    fn intersect(&self, a: &SOpenSet, b: &SOpenSet) -> Result<SOpenSet, Unsupported> {
        Ok(a.intersect(b))
    }

    fn is_subset(&self, a: &SOpenSet, b: &SOpenSet) -> Result<bool, Unsupported> {
        Ok(a.is_subset(b))
    }

    fn contains(&self, a: &SOpenSet, p: &Rational) -> Result<bool, Unsupported> {
        Ok(a.contains(p))
    }

    fn union_equals(&self, parts: &[SOpenSet], whole: &SOpenSet) -> Result<bool, Unsupported> {
        let segs = || parts.iter().flat_map(|p| p.segs.iter());
        if let Some(eq) = merged_equals(segs(), whole) {
            return Ok(eq);
        }
        let mut all: Vec<&Segment> = segs().collect();
        all.sort_by(|x, y| cmp_lo(&x.lo, &y.lo));
        Ok(merged_equals(all.into_iter(), whole).expect("sorted input"))
    }

    fn is_open(&self, _a: &SOpenSet) -> Result<bool, Unsupported> {
        Ok(true)
    }

    fn width(&self, a: &SOpenSet) -> Option<Rational> {
        a.diameter()
    }

    /// Sweep over all components sorted by left end; an overlap between two
    /// sets shows up between a component and the furthest-reaching earlier one.
    fn first_overlap(&self, parts: &[SOpenSet]) -> Result<Option<(usize, usize)>, Unsupported> {
        if in_order(parts) {
            return Ok(None);
        }
        let mut all: Vec<(&Segment, usize)> =
            parts.iter().enumerate().flat_map(|(i, p)| p.segs.iter().map(move |s| (s, i))).collect();
        all.sort_by(|x, y| cmp_lo(&x.0.lo, &y.0.lo).then(x.1.cmp(&y.1)));
        let mut reach: Option<(&Option<Rational>, usize)> = None;
        for (s, owner) in all {
            if let Some((hi, prev)) = reach {
                if lo_below_hi(&s.lo, hi) {
                    let (i, j) = if prev < owner { (prev, owner) } else { (owner, prev) };
                    return Ok(Some((i, j)));
                }
            }
            if reach.map_or(true, |(hi, _)| cmp_hi(&s.hi, hi) == Ordering::Greater) {
                reach = Some((&s.hi, owner));
            }
        }
        Ok(None)
    }
}

// Merges segments sorted by left end on the fly and compares the result with
// the canonical components of `whole`; `None` if the input turns out unsorted.
fn merged_equals<'a, I: Iterator<Item = &'a Segment>>(segs: I, whole: &SOpenSet) -> Option<bool> {
    let mut expect = whole.segs.iter();
    let mut iter = segs.peekable();
    let mut verdict = true;
    while let Some(first) = iter.next() {
        let mut hi = &first.hi;
        while let Some(next) = iter.peek() {
            let touches = match (&next.lo, hi) {
                (_, None) => true,
                (None, _) => return None,
                (Some(l), Some(h)) => l <= h,
            };
            if !touches {
                break;
            }
            if cmp_lo(&next.lo, &first.lo) == Ordering::Less {
                return None;
            }
            if cmp_hi(&next.hi, hi) == Ordering::Greater {
                hi = &next.hi;
            }
            iter.next();
        }
        match expect.next() {
            Some(w) if w.lo == first.lo && &w.hi == hi => {}
            _ => verdict = false,
        }
    }
    Some(verdict && expect.next().is_none())
}

// Every component of each part ends at or before the next part starts: the
// parts are then pairwise disjoint without sorting.
fn in_order(parts: &[SOpenSet]) -> bool {
    let mut reach: Option<&Option<Rational>> = None;
    for p in parts {
        for s in p.segs.iter() {
            if let Some(hi) = reach {
                let clear = match (hi, &s.lo) {
                    (Some(h), Some(l)) => h <= l,
                    _ => false,
                };
                if !clear {
                    return false;
                }
            }
            reach = Some(&s.hi);
        }
    }
    true
}

/// Zigzag order of the integers: 0, -1, 1, -2, 2, ...
pub fn zigzag(n: u64) -> i128 {
    if n % 2 == 0 {
        (n / 2) as i128
    } else {
        -(((n + 1) / 2) as i128)
    }
}

/// Inverse of [`zigzag`].
pub fn zigzag_index(z: i128) -> u64 {
    if z >= 0 {
        (2 * z) as u64
    } else {
        (-2 * z - 1) as u64
    }
}

/// The Lusin π-base of the Sorgenfrey line: integer blocks at level one, then
/// halving cuts `x_n = b - (b-a)/2^n` towards the right end of each node.
/// Mandated endpoints are merged into the cut sequence of every node whose
/// interior contains them, so each appears as some right endpoint `b_s`.
#[derive(Clone, Debug, Default)]
pub struct SorgenfreyPiBase {
    endpoints: Vec<Rational>,
}

impl SorgenfreyPiBase {
    pub fn new() -> Self {
        SorgenfreyPiBase { endpoints: Vec::new() }
    }

    pub fn with_endpoints<I: IntoIterator<Item = Rational>>(d: I) -> Self {
        let mut endpoints: Vec<Rational> = d.into_iter().collect();
        endpoints.sort();
        endpoints.dedup();
        SorgenfreyPiBase { endpoints }
    }

    pub fn endpoints(&self) -> &[Rational] {
        &self.endpoints
    }

    fn node(parent: &SOpenSet) -> (Rational, Rational) {
        match parent.segments() {
            [Segment { lo: Some(a), hi: Some(b) }] => (a.clone(), b.clone()),
            _ => panic!("interval node expected, got {parent}"),
        }
    }

    // Mandated points strictly inside (a, b) that are not already halving cuts.
    fn inserted(&self, a: &Rational, b: &Rational) -> Vec<Rational> {
        if self.endpoints.is_empty() {
            return Vec::new();
        }
        let w = b - a;
        self.endpoints
            .iter()
            .filter(|d| a < *d && *d < b)
            .filter(|d| {
                let r = &w / &(b - *d);
                !(r.is_integer() && r > Rational::one() && r == Rational::pow2(r.floor_log2()))
            })
            .cloned()
            .collect()
    }

    fn halving_cut(a: &Rational, b: &Rational, j: u64) -> Rational {
        b - &(b - a).mul_pow2(-(j as i64))
    }

    /// Cut points `c_0 = a < c_1 < ...` of the node `[a, b)`, the first `count`.
    pub fn cuts(&self, a: &Rational, b: &Rational, count: usize) -> Vec<Rational> {
        let extra = self.inserted(a, b);
        let mut out = Vec::with_capacity(count);
        let (mut j, mut k) = (0u64, 0usize);
        let mut gap = b - a;
        while out.len() < count {
            let h = if j == 0 { a.clone() } else { b - &gap };
            if k < extra.len() && extra[k] < h {
                out.push(extra[k].clone());
                k += 1;
            } else {
                out.push(h);
                j += 1;
                gap = gap.halve();
            }
        }
        out
    }

    fn cut_pair(&self, a: &Rational, b: &Rational, n: u64) -> (Rational, Rational) {
        if self.inserted(a, b).is_empty() {
            return (Self::halving_cut(a, b, n), Self::halving_cut(a, b, n + 1));
        }
        let mut c = self.cuts(a, b, n as usize + 2);
        let hi = c.pop().unwrap();
        let lo = c.pop().unwrap();
        (lo, hi)
    }

    /// Child index of `q` inside the node `[a, b)`.
    fn index_in(&self, q: &Rational, a: &Rational, b: &Rational) -> u64 {
        let ratio = &(b - a) / &(b - q);
        let h = ratio.floor_log2() as u64;
        let before = self.inserted(a, b).iter().filter(|d| *d <= q).count() as u64;
        h + before
    }
}

fn blocks_below(from: u64) -> SOpenSet {
    // blocks with zigzag index < from form one interval [lo, hi)
    if from == 0 {
        return SOpenSet::empty();
    }
    let last = from - 1;
    let (z_lo, z_hi) = if last % 2 == 0 {
        (-((last / 2) as i128), (last / 2) as i128)
    } else {
        (-(((last + 1) / 2) as i128), (last / 2) as i128)
    };
    SOpenSet::interval(Rational::integer(z_lo), Rational::integer(z_hi + 1))
}

impl SchemeRule for SorgenfreyPiBase {
    type Payload = SOpenSet;

    fn root(&self) -> SOpenSet {
        SOpenSet::line()
    }

    fn child(&self, parent: &SOpenSet, parent_len: usize, n: u64) -> SOpenSet {
        if parent_len == 0 {
            let z = Rational::integer(zigzag(n));
            let z1 = &z + &Rational::one();
            return SOpenSet::interval(z, z1);
        }
        let (a, b) = Self::node(parent);
        let (lo, hi) = self.cut_pair(&a, &b, n);
        SOpenSet::interval(lo, hi)
    }

    fn children(&self, parent: &SOpenSet, parent_len: usize, bound: u64) -> Vec<SOpenSet> {
        if parent_len == 0 {
            return (0..=bound).map(|n| self.child(parent, 0, n)).collect();
        }
        let (a, b) = Self::node(parent);
        // room for a tail descriptor appended by audits
        let mut out = Vec::with_capacity(bound as usize + 2);
        if self.inserted(&a, &b).is_empty() {
            let mut gap = (&b - &a).halve();
            let mut lo = a;
            for _ in 0..=bound {
                let hi = &b - &gap;
                gap = gap.halve();
                // cuts increase strictly, so each piece is a nonempty interval
                let seg = Segment::bounded(core::mem::replace(&mut lo, hi.clone()), hi);
                out.push(SOpenSet { segs: smallvec![seg] });
            }
            return out;
        }
        let mut cuts = self.cuts(&a, &b, bound as usize + 2).into_iter();
        let mut lo = cuts.next().expect("at least two cuts");
        out.extend(cuts.map(|hi| SOpenSet::interval(core::mem::replace(&mut lo, hi.clone()), hi)));
        out
    }

    fn tail(&self, parent: &SOpenSet, parent_len: usize, from: u64) -> Option<SOpenSet> {
        if parent_len == 0 {
            return Some(blocks_below(from).complement());
        }
        let (a, b) = Self::node(parent);
        let c = if from == 0 { a } else { self.cut_pair(&a, &b, from - 1).1 };
        Some(SOpenSet::interval(c, b))
    }

    fn label(&self) -> String {
        if self.endpoints.is_empty() {
            String::from("sorgenfrey")
        } else {
            let d: Vec<String> = self.endpoints.iter().map(|q| q.to_string()).collect();
            alloc::format!("sorgenfrey+endpoints{{{}}}", d.join(","))
        }
    }
}

/// Exact child index from the cut arithmetic.
pub struct IntervalLocator<'a> {
    pub rule: &'a SorgenfreyPiBase,
}

impl Locator<Rational, SOpenSet> for IntervalLocator<'_> {
    fn locate(&self, q: &Rational, parent: &SOpenSet, parent_len: usize, bound: u64) -> Option<u64> {
        let n = if parent_len == 0 {
            zigzag_index(q.floor().to_i128()?)
        } else {
            let (a, b) = SorgenfreyPiBase::node(parent);
            if !(a <= *q && *q < b) {
                return None;
            }
            self.rule.index_in(q, &a, &b)
        };
        (n <= bound).then_some(n)
    }
}

/// Address of `q` of the given length; every rational has one.
pub fn address(q: &Rational, rule: &SorgenfreyPiBase, depth: usize) -> FinSeq {
    let loc = IntervalLocator { rule };
    sigma_address(q, rule, &SorgenfreyAlgebra, &loc, depth, u64::MAX)
        .expect("every rational lies in exactly one child")
}

/// `[a_s, b_s)` of the node at `s` (length at least one).
pub fn node_interval(rule: &SorgenfreyPiBase, s: &FinSeq) -> Option<HalfInterval> {
    match rule.payload(s).segments() {
        [Segment { lo: Some(a), hi: Some(b) }] => Some(HalfInterval::new(a.clone(), b.clone())),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptySetError;

impl fmt::Display for EmptySetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("empty set")
    }
}

/// Countable partition of a nonempty clopen set: the part outside an anchor
/// interval `[a, b)` first (when nonempty), then the ladder
/// `[b - w/(n+1), b - w/(n+2))`.
#[derive(Clone, Debug)]
pub struct ClopenDecomposition {
    set: SOpenSet,
    a: Rational,
    b: Rational,
    residual: Option<SOpenSet>,
}

/// The anchor `[a, b)` inside the first component (unit length for rays).
pub fn anchor_interval(set: &SOpenSet) -> Option<(Rational, Rational)> {
    let s = set.segments().first()?;
    Some(match (&s.lo, &s.hi) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        (Some(a), None) => (a.clone(), a + &Rational::one()),
        (None, Some(b)) => (b - &Rational::one(), b.clone()),
        (None, None) => (Rational::zero(), Rational::one()),
    })
}

pub fn decompose_clopen(set: &SOpenSet) -> Result<ClopenDecomposition, EmptySetError> {
    let (a, b) = anchor_interval(set).ok_or(EmptySetError)?;
    let rest = set.difference(&SOpenSet::interval(a.clone(), b.clone()));
    let residual = (!rest.is_empty()).then_some(rest);
    Ok(ClopenDecomposition { set: set.clone(), a, b, residual })
}

impl ClopenDecomposition {
    pub fn anchor(&self) -> (&Rational, &Rational) {
        (&self.a, &self.b)
    }

    pub fn has_residual(&self) -> bool {
        self.residual.is_some()
    }

    fn ladder_cut(&self, k: u64) -> Rational {
        // b - w/(k+1)
        let w = &self.b - &self.a;
        &self.b - &(&w / &Rational::integer(k as i128 + 1))
    }

    fn ladder(&self, n: u64) -> SOpenSet {
        SOpenSet::interval(self.ladder_cut(n), self.ladder_cut(n + 1))
    }

    /// The `i`-th piece.
    pub fn piece(&self, i: u64) -> SOpenSet {
        match (&self.residual, i) {
            (Some(r), 0) => r.clone(),
            (Some(_), i) => self.ladder(i - 1),
            (None, i) => self.ladder(i),
        }
    }

    pub fn pieces(&self, count: usize) -> Vec<SOpenSet> {
        (0..count as u64).map(|i| self.piece(i)).collect()
    }

    /// Union of all pieces with index `>= i`.
    pub fn remainder(&self, i: u64) -> SOpenSet {
        match (&self.residual, i) {
            (Some(_), 0) => self.set.clone(),
            (Some(_), i) => SOpenSet::interval(self.ladder_cut(i - 1), self.b.clone()),
            (None, i) => SOpenSet::interval(self.ladder_cut(i), self.b.clone()),
        }
    }

    /// Index of the piece containing `q`.
    pub fn index_of(&self, q: &Rational) -> Option<u64> {
        if !self.set.contains(q) {
            return None;
        }
        let offset = u64::from(self.residual.is_some());
        if !(self.a <= *q && *q < self.b) {
            return Some(0);
        }
        // largest n with b - w/(n+1) <= q, i.e. n + 1 <= w/(b - q)
        let w = &self.b - &self.a;
        let n = (&w / &(&self.b - q)).floor().to_i128()? as u64 - 1;
        Some(n + offset)
    }

    pub fn iter(&self) -> impl Iterator<Item = SOpenSet> + '_ {
        (0..).map(move |i| self.piece(i))
    }

    pub fn set(&self) -> &SOpenSet {
        &self.set
    }
}

#[cfg(test)]
mod tests {
    use alloc::vec;
    use super::*;
    use crate::q;
    use crate::seqcore::{validate_strict_lusin, AuditOptions, Axiom, Mode, ScanLocator};

    fn iv(a: Rational, b: Rational) -> SOpenSet {
        SOpenSet::interval(a, b)
    }

    #[test]
    fn canonical_merges_adjacent_and_overlapping() {
        let s = SOpenSet::from_segments([
            Segment::bounded(q!(2), q!(3)),
            Segment::bounded(q!(0), q!(1)),
            Segment::bounded(q!(1), q!(3, 2)),
            Segment::bounded(q!(5, 4), q!(2)),
        ]);
        assert_eq!(s, iv(q!(0), q!(3)));
        let t = SOpenSet::from_segments([Segment::new(None, Some(q!(0))), Segment::new(Some(q!(-1)), None)]);
        assert!(t.is_line());
    }

    #[test]
    fn complement_and_difference() {
        let s = iv(q!(0), q!(1)).union(&iv(q!(2), q!(3)));
        let c = s.complement();
        assert_eq!(c.to_string(), "(-inf, 0/1) u [1/1, 2/1) u [3/1, +inf)");
        assert_eq!(c.complement(), s);
        assert!(SOpenSet::line().complement().is_empty());
        assert!(SOpenSet::empty().complement().is_line());
        assert_eq!(s.difference(&iv(q!(0), q!(1))), iv(q!(2), q!(3)));
    }

    #[test]
    fn subset_tracks_components() {
        let s = iv(q!(0), q!(1)).union(&iv(q!(2), q!(3)));
        assert!(iv(q!(1, 2), q!(1)).is_subset(&s));
        assert!(!iv(q!(1, 2), q!(5, 2)).is_subset(&s));
        assert!(s.is_subset(&SOpenSet::line()));
        assert!(SOpenSet::from_point_up(q!(4)).is_subset(&SOpenSet::from_point_up(q!(3))));
        assert!(!SOpenSet::from_point_up(q!(3)).is_subset(&SOpenSet::from_point_up(q!(4))));
    }

    #[test]
    fn text_round_trip() {
        let s = SOpenSet::below(q!(-1)).union(&iv(q!(1, 3), q!(1, 2))).union(&SOpenSet::from_point_up(q!(2)));
        let t: SOpenSet = s.to_string().parse().unwrap();
        assert_eq!(s, t);
        assert_eq!("{}".parse::<SOpenSet>().unwrap(), SOpenSet::empty());
        assert!("[1/2, 1/3)".parse::<SOpenSet>().is_err());
        assert!("(0, 1)".parse::<SOpenSet>().is_err());
    }

    #[test]
    fn zigzag_round_trip() {
        let first: Vec<i128> = (0..5).map(zigzag).collect();
        assert_eq!(first, [0, -1, 1, -2, 2]);
        for z in -50..50 {
            assert_eq!(zigzag(zigzag_index(z)), z);
        }
    }

    #[test]
    fn pi_base_children() {
        let r = SorgenfreyPiBase::new();
        assert_eq!(r.child(&SOpenSet::line(), 0, 2), iv(q!(1), q!(2)));
        let unit = iv(q!(0), q!(1));
        assert_eq!(r.child(&unit, 1, 0), iv(q!(0), q!(1, 2)));
        assert_eq!(r.child(&unit, 1, 1), iv(q!(1, 2), q!(3, 4)));
        assert_eq!(r.child(&unit, 1, 2), iv(q!(3, 4), q!(7, 8)));
    }

    #[test]
    fn root_tail_is_the_complement_of_early_blocks() {
        let r = SorgenfreyPiBase::new();
        let line = SOpenSet::line();
        for from in 0..9u64 {
            let tail = r.tail(&line, 0, from).unwrap();
            let mut parts: Vec<SOpenSet> = (0..from).map(|n| r.child(&line, 0, n)).collect();
            parts.push(tail.clone());
            assert!(SorgenfreyAlgebra.union_equals(&parts, &line).unwrap());
            for n in 0..from {
                assert!(r.child(&line, 0, n).intersect(&tail).is_empty());
            }
        }
    }

    #[test]
    fn addresses_match_examples() {
        let r = SorgenfreyPiBase::new();
        assert_eq!(address(&q!(3, 4), &r, 4), FinSeq::from([0, 2, 0, 0]));
        assert_eq!(address(&q!(0), &r, 3), FinSeq::from([0, 0, 0]));
        assert_eq!(address(&q!(-1, 2), &r, 2), FinSeq::from([1, 1]));
    }

    #[test]
    fn exact_locator_agrees_with_scan() {
        let r = SorgenfreyPiBase::with_endpoints([q!(1, 3), q!(2, 3), q!(-5, 7)]);
        let scan = ScanLocator { rule: &r, algebra: &SorgenfreyAlgebra };
        for (n, d) in [(3, 4), (1, 3), (-5, 7), (2, 3), (7, 9), (-13, 5), (99, 100)] {
            let x = q!(n, d);
            let exact = address(&x, &r, 6);
            let brute = sigma_address(&x, &r, &SorgenfreyAlgebra, &scan, 6, 200).unwrap();
            assert_eq!(exact, brute, "{x}");
        }
    }

    #[test]
    fn sorgenfrey_audit_depth_four() {
        let r = SorgenfreyPiBase::new();
        let loc = IntervalLocator { rule: &r };
        let nb = |x: &Rational| -> Vec<SOpenSet> {
            (0..3).map(|j| iv(x.clone(), x + &Rational::pow2(-j))).collect()
        };
        let mut opts = AuditOptions::<SorgenfreyAlgebra>::new(4, 8);
        opts.pi_base = true;
        opts.gap_bound = true;
        opts.test_points = vec![q!(0), q!(3, 4), q!(-1, 2), q!(5, 7)];
        opts.locator = Some(&loc);
        opts.neighbourhoods = Some(&nb);
        let audit = validate_strict_lusin(&r, &SorgenfreyAlgebra, &opts);
        assert!(audit.passed(), "{:?}", audit.verdicts);
        assert_eq!(audit.verdict(Axiom::L3).unwrap().mode, Mode::Exact);
        assert_eq!(audit.verdict(Axiom::L6).unwrap().mode, Mode::Witnessed);
    }

    #[test]
    fn overlapping_children_are_caught() {
        struct Bad;
        impl SchemeRule for Bad {
            type Payload = SOpenSet;
            fn root(&self) -> SOpenSet {
                SOpenSet::line()
            }
            fn child(&self, parent: &SOpenSet, len: usize, n: u64) -> SOpenSet {
                let base = SorgenfreyPiBase::new();
                if len == 0 {
                    return base.child(parent, 0, n);
                }
                let (a, b) = SorgenfreyPiBase::node(parent);
                let w = &b - &a;
                match n {
                    0 => iv(a.clone(), &a + &(&w * &q!(2, 3))),
                    1 => iv(&a + &w.halve(), b),
                    _ => base.child(parent, len, n),
                }
            }
        }
        let opts = AuditOptions::<SorgenfreyAlgebra>::new(1, 2);
        let audit = validate_strict_lusin(&Bad, &SorgenfreyAlgebra, &opts);
        let (axiom, c) = audit.counterexample().unwrap();
        assert_eq!(axiom, Axiom::L1);
        assert_eq!((c.address.clone(), c.i, c.j), (FinSeq::from([0]), Some(0), Some(1)));
        assert_eq!(c.witness, "[1/2, 2/3)");
    }

    // overlaps only below blocks 2 and 5, at different depths
    struct LateOverlap;
    impl SchemeRule for LateOverlap {
        type Payload = SOpenSet;
        fn root(&self) -> SOpenSet {
            SOpenSet::line()
        }
        fn child(&self, parent: &SOpenSet, len: usize, n: u64) -> SOpenSet {
            let base = SorgenfreyPiBase::new();
            let plain = base.child(parent, len, n);
            if len == 0 || n != 0 {
                return plain;
            }
            let (a, b) = SorgenfreyPiBase::node(parent);
            let bad = (len == 2 && a >= q!(1) && a < q!(2)) || (len == 1 && a == q!(-3));
            if bad {
                iv(a, b)
            } else {
                plain
            }
        }
    }

    #[test]
    fn parallel_walk_matches_serial() {
        let serial = AuditOptions::<SorgenfreyAlgebra> { threads: 1, ..AuditOptions::new(3, 6) };
        let parallel = AuditOptions::<SorgenfreyAlgebra> { threads: 4, ..AuditOptions::new(3, 6) };
        let a = validate_strict_lusin(&LateOverlap, &SorgenfreyAlgebra, &serial);
        let b = validate_strict_lusin(&LateOverlap, &SorgenfreyAlgebra, &parallel);
        assert!(!a.passed());
        assert_eq!(a, b);
        let (axiom, c) = a.counterexample().unwrap();
        assert_eq!((axiom, c.address.clone()), (Axiom::L1, FinSeq::from([2, 0])));
        let good = SorgenfreyPiBase::new();
        let a = validate_strict_lusin(&good, &SorgenfreyAlgebra, &serial);
        let b = validate_strict_lusin(&good, &SorgenfreyAlgebra, &parallel);
        assert!(a.passed());
        assert_eq!(a, b);
    }

    #[test]
    fn mandated_endpoint_appears() {
        let r = SorgenfreyPiBase::with_endpoints([q!(1, 3)]);
        let hit = (0..20u64).any(|n| {
            let s = FinSeq::from([0, n]);
            node_interval(&r, &s).is_some_and(|h| h.b == q!(1, 3))
        });
        assert!(hit);
    }

    #[test]
    fn decomposition_examples() {
        let d = decompose_clopen(&iv(q!(0), q!(1))).unwrap();
        assert_eq!(d.pieces(3), [iv(q!(0), q!(1, 2)), iv(q!(1, 2), q!(2, 3)), iv(q!(2, 3), q!(3, 4))]);
        let two = iv(q!(0), q!(1)).union(&iv(q!(2), q!(3)));
        let d = decompose_clopen(&two).unwrap();
        assert_eq!(d.piece(0), iv(q!(2), q!(3)));
        assert_eq!(d.piece(1), iv(q!(0), q!(1, 2)));
        assert_eq!(d.index_of(&q!(5, 2)), Some(0));
        assert_eq!(d.index_of(&q!(1, 2)), Some(2));
        assert!(decompose_clopen(&SOpenSet::empty()).is_err());
    }
}
