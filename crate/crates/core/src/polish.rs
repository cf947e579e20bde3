//! Presented Polish spaces, the nested ball family over them, and the open
//! map `h` from the Baire space (and, through addresses, from the Sorgenfrey
//! line) onto the space.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::rational::Rational;
use crate::seqcore::FinSeq;
use crate::sorgenfrey::{address, node_interval, SorgenfreyPiBase};

/// A separable metric space given by a dense sequence and an exact metric.
/// Completeness is declared, not checked.
pub trait PolishPresentation {
    type Point: Clone + Eq + fmt::Debug + fmt::Display;

    fn name(&self) -> &str;

    fn dense(&self, i: u64) -> Self::Point;

    fn dist(&self, a: &Self::Point, b: &Self::Point) -> Rational;

    /// The `i`-th dense point (in enumeration order) lying in the open ball
    /// `B(c, r)`. The default scans the enumeration.
    fn dense_in_ball(&self, c: &Self::Point, r: &Rational, i: u64) -> Option<Self::Point> {
        scan_dense_in_ball(self, c, r, i, 1 << 22)
    }

    /// Finite net of resolution `eps` inside `B(c, r)`, if the space offers one.
    fn net(&self, _c: &Self::Point, _r: &Rational, _eps: &Rational) -> Option<Vec<Self::Point>> {
        None
    }
}

pub fn scan_dense_in_ball<Y: PolishPresentation + ?Sized>(
    y: &Y,
    c: &Y::Point,
    r: &Rational,
    i: u64,
    limit: u64,
) -> Option<Y::Point> {
    let mut seen = 0;
    for k in 0..limit {
        let p = y.dense(k);
        if y.dist(c, &p) < *r {
            if seen == i {
                return Some(p);
            }
            seen += 1;
        }
    }
    None
}

/// The real line with metric `min(|x - y|, 1)`.
///
/// Dense points are dyadic rationals by level: level 0 is `{0}`, level `m`
/// adds the points `k/2^m` with `|k| <= 2^(2m-1)` not already present,
/// in increasing order.
#[derive(Clone, Copy, Debug, Default)]
pub struct RealsCapped;

// |k| bound at level m
fn level_bound(m: u32) -> i128 {
    if m == 0 {
        0
    } else {
        1i128 << (2 * m - 1)
    }
}

fn count_even(a: i128, b: i128) -> i128 {
    if a > b {
        0
    } else {
        b.div_euclid(2) - (a + 1).div_euclid(2) + 1
    }
}

// numerators at level m lying strictly inside (lo, hi) and inside the level range
fn level_range(m: u32, lo: Option<&Rational>, hi: Option<&Rational>) -> (i128, i128) {
    let k = level_bound(m);
    let mut a = -k;
    let mut b = k;
    if let Some(lo) = lo {
        let t = lo.mul_pow2(m as i64).floor().to_i128().unwrap_or(i128::MIN / 4);
        a = a.max(t + 1);
    }
    if let Some(hi) = hi {
        let t = hi.mul_pow2(m as i64).ceil().to_i128().unwrap_or(i128::MAX / 4);
        b = b.min(t - 1);
    }
    (a, b)
}

// points of level m (not earlier) with numerator in [a, x]
fn new_upto(m: u32, a: i128, x: i128) -> i128 {
    if a > x {
        return 0;
    }
    let h = 2 * level_bound(m.saturating_sub(1)) * i128::from(m > 0);
    let old = if m == 0 { 0 } else { count_even(a.max(-h), x.min(h)) };
    (x - a + 1) - old
}

impl RealsCapped {
    fn nth_in_interval(&self, lo: Option<&Rational>, hi: Option<&Rational>, mut i: u64) -> Option<Rational> {
        for m in 0..60u32 {
            let (a, b) = level_range(m, lo, hi);
            let fresh = new_upto(m, a, b);
            if (i as i128) < fresh {
                // smallest x with new_upto(a, x) > i
                let (mut l, mut r) = (a, b);
                while l < r {
                    let mid = l + (r - l) / 2;
                    if new_upto(m, a, mid) > i as i128 {
                        r = mid;
                    } else {
                        l = mid + 1;
                    }
                }
                return Some(Rational::new(l, 1i128 << m));
            }
            i -= fresh as u64;
        }
        None
    }

    /// Enumeration index of a dyadic point, if it is one.
    pub fn index_of(&self, p: &Rational) -> Option<u64> {
        let den = p.denom();
        let e = den.bits().saturating_sub(1);
        if Rational::pow2(e as i64) != Rational::from_bigints(den, 1.into()) {
            return None;
        }
        let m = (e as u32).max(level_of_magnitude(p));
        let mut idx: i128 = 0;
        for l in 0..m {
            let (a, b) = level_range(l, None, None);
            idx += new_upto(l, a, b);
        }
        let (a, _) = level_range(m, None, None);
        let k = p.mul_pow2(m as i64).to_i128()?;
        Some((idx + new_upto(m, a, k) - 1) as u64)
    }
}

// least level whose range reaches |p|
fn level_of_magnitude(p: &Rational) -> u32 {
    let mut m = 0;
    while Rational::integer(level_bound(m)) < p.abs().mul_pow2(m as i64) {
        m += 1;
    }
    m
}

impl PolishPresentation for RealsCapped {
    type Point = Rational;

    fn name(&self) -> &str {
        "reals-capped"
    }

    fn dense(&self, i: u64) -> Rational {
        self.nth_in_interval(None, None, i).expect("enumeration is total")
    }

    fn dist(&self, a: &Rational, b: &Rational) -> Rational {
        let d = (a - b).abs();
        if d > Rational::one() {
            Rational::one()
        } else {
            d
        }
    }

    fn dense_in_ball(&self, c: &Rational, r: &Rational, i: u64) -> Option<Rational> {
        if *r > Rational::one() {
            return Some(self.dense(i));
        }
        self.nth_in_interval(Some(&(c - r)), Some(&(c + r)), i)
    }

    /// Grid points `k * eps` strictly inside the ball, plus the center.
    fn net(&self, c: &Rational, r: &Rational, eps: &Rational) -> Option<Vec<Rational>> {
        if *r > Rational::one() || !eps.is_positive() {
            return None;
        }
        let lo = (&(c - r) / eps).floor().to_i128()? + 1;
        let hi = (&(c + r) / eps).ceil().to_i128()? - 1;
        let mut out: Vec<Rational> = (lo..=hi).map(|k| &Rational::integer(k) * eps).collect();
        if let Err(at) = out.binary_search(c) {
            out.insert(at, c.clone());
        }
        Some(out)
    }
}

/// `min{(r - d)/2, 2^(-len-3)}`.
pub fn child_radius(r_parent: &Rational, dist: &Rational, parent_len: usize) -> Result<Rational, CenterOutside> {
    if dist >= r_parent {
        return Err(CenterOutside);
    }
    let slack = (r_parent - dist).halve();
    let cap = Rational::pow2(-(parent_len as i64) - 3);
    Ok(if slack < cap { slack } else { cap })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CenterOutside;

impl fmt::Display for CenterOutside {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("center outside parent")
    }
}

/// Child `n` of a ball takes the `g(n)`-th dense point inside it. `g` restarts
/// at every block `[5(3^j - 1)/2, 5(3^(j+1) - 1)/2)`, so each value recurs in
/// every later block.
pub fn schedule(n: u64) -> u64 {
    let mut start = 0u64;
    let mut size = 5u64;
    loop {
        if n < start + size {
            return n - start;
        }
        start += size;
        size *= 3;
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ball<P> {
    pub center: P,
    pub radius: Rational,
    pub address: FinSeq,
}

/// The lazily materialized family `(B_s)`.
pub struct BallFamily<Y: PolishPresentation> {
    space: Y,
    root: Ball<Y::Point>,
    memo: spin::Mutex<BTreeMap<FinSeq, Ball<Y::Point>>>,
}

impl<Y: PolishPresentation> BallFamily<Y> {
    /// Root center is dense point 0, root radius 2.
    pub fn new(space: Y) -> Self {
        let root = Ball { center: space.dense(0), radius: Rational::integer(2), address: FinSeq::empty() };
        BallFamily { space, root, memo: spin::Mutex::new(BTreeMap::new()) }
    }

    pub fn space(&self) -> &Y {
        &self.space
    }

    pub fn root(&self) -> &Ball<Y::Point> {
        &self.root
    }

    pub fn child(&self, parent: &Ball<Y::Point>, n: u64) -> Ball<Y::Point> {
        let center = self
            .space
            .dense_in_ball(&parent.center, &parent.radius, schedule(n))
            .expect("open balls contain dense points");
        let d = self.space.dist(&parent.center, &center);
        let radius = child_radius(&parent.radius, &d, parent.address.len()).expect("center chosen inside the ball");
        Ball { center, radius, address: parent.address.extend(n) }
    }

    /// `B_s`, memoized.
    pub fn ball(&self, s: &FinSeq) -> Ball<Y::Point> {
        if s.is_empty() {
            return self.root.clone();
        }
        if let Some(b) = self.memo.lock().get(s) {
            return b.clone();
        }
        let parent = self.ball(&s.prefix(s.len() - 1));
        let b = self.child(&parent, s.digits()[s.len() - 1]);
        self.memo.lock().insert(s.clone(), b.clone());
        b
    }

    pub fn contains(&self, b: &Ball<Y::Point>, p: &Y::Point) -> bool {
        self.space.dist(&b.center, p) < b.radius
    }

    pub fn cached(&self) -> usize {
        self.memo.lock().len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallCheck {
    pub name: &'static str,
    pub exact: bool,
    pub checked: u64,
    pub failure: Option<(FinSeq, String)>,
}

impl BallCheck {
    fn new(name: &'static str, exact: bool) -> Self {
        BallCheck { name, exact, checked: 0, failure: None }
    }

    fn record(&mut self, ok: bool, at: &FinSeq, why: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some((at.clone(), why()));
        }
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallAudit {
    pub space: String,
    pub depth: usize,
    pub child_bound: u64,
    pub net: Rational,
    pub tail_starts: Vec<u64>,
    pub nodes: u64,
    pub checks: Vec<BallCheck>,
    pub notes: Vec<String>,
}

impl BallAudit {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(BallCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&BallCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Materializes every ball with address length `<= depth` and digits
/// `<= child_bound`, checking nonempty, root, closure nesting and diameter
/// exactly, and tail cover on nets.
pub fn ball_family_audit<Y: PolishPresentation>(
    family: &BallFamily<Y>,
    depth: usize,
    child_bound: u64,
    net: &Rational,
    tail_starts: &[u64],
) -> BallAudit {
    let y = family.space();
    let mut nonempty = BallCheck::new("nonempty", true);
    let mut root = BallCheck::new("root", true);
    let mut nesting = BallCheck::new("nesting", true);
    let mut diameter = BallCheck::new("diameter", true);
    let mut tail = BallCheck::new("tail-cover", false);
    let mut nodes = 1u64;

    let r0 = &family.root().radius;
    root.record(*r0 > Rational::one(), &FinSeq::empty(), || format!("root radius {} does not exceed the metric cap 1", r0));
    nonempty.record(r0.is_positive(), &FinSeq::empty(), || String::from("root radius not positive"));

    let mut stack = alloc::vec![family.root().clone()];
    while let Some(parent) = stack.pop() {
        let len = parent.address.len();
        if len >= depth {
            continue;
        }
        let kids: Vec<_> = (0..=child_bound).map(|n| family.child(&parent, n)).collect();
        nodes += kids.len() as u64;
        let cap = Rational::pow2(-(len as i64) - 3);
        let diam_cap = Rational::pow2(-(len as i64) - 1);
        for k in &kids {
            nonempty.record(k.radius.is_positive(), &k.address, || format!("radius {}", k.radius));
            let d = y.dist(&parent.center, &k.center);
            let lhs = &d + &k.radius.double();
            nesting.record(lhs <= parent.radius && k.radius <= cap, &k.address, || {
                format!("dist {} + 2*{} vs {}", d, k.radius, parent.radius)
            });
            diameter.record(k.radius.double() <= diam_cap, &k.address, || format!("2*{} > {}", k.radius, diam_cap));
        }
        // the root ball is the whole space; its tail cover is tested on a window
        let window = if len == 0 { Rational::new(1, 8) } else { parent.radius.clone() };
        let window = if window < parent.radius { window } else { parent.radius.clone() };
        match y.net(&parent.center, &window, net) {
            Some(points) => {
                for &n0 in tail_starts {
                    for p in &points {
                        let hit = kids.iter().skip(n0 as usize).any(|k| family.contains(k, p));
                        tail.record(hit, &parent.address, || format!("net point {} uncovered by children {}..={}", p, n0, child_bound));
                    }
                }
            }
            None => tail.record(false, &parent.address, || String::from("space offers no net")),
        }
        stack.extend(kids.into_iter().rev());
    }
    BallAudit {
        space: String::from(y.name()),
        depth,
        child_bound,
        net: net.clone(),
        tail_starts: tail_starts.to_vec(),
        nodes,
        checks: alloc::vec![nonempty, root, nesting, diameter, tail],
        notes: alloc::vec![
            String::from("tail cover is witnessed on finite nets; the root is tested on B(y_root, 1/8)"),
            String::from("finite sub-base behaviour only; continuity and openness over the whole topology are not certified"),
        ],
    }
}

/// `h` at precision `k`: the center of `B_{x|k}` with error bound `2^-k`
/// (`k = 0` gives the root center with bound 1).
pub fn eval_h<Y: PolishPresentation>(family: &BallFamily<Y>, x: &FinSeq, k: usize) -> (Y::Point, Rational) {
    if k == 0 {
        return (family.root().center.clone(), Rational::one());
    }
    assert!(x.len() >= k, "address shorter than the requested precision");
    (family.ball(&x.prefix(k)).center, Rational::pow2(-(k as i64)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PreimageError {
    BoundExhausted { level: usize },
    OutsideBall,
}

impl fmt::Display for PreimageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreimageError::BoundExhausted { level } => write!(f, "bound exhausted at level {}", level),
            PreimageError::OutsideBall => f.write_str("point outside the starting ball"),
        }
    }
}

/// Extends `from` greedily to length `k`: at each node the least child whose
/// center is within `min{2^(-len-3), (r_s - d(y_s, y))/4}` of `y`.
pub fn descend<Y: PolishPresentation>(
    family: &BallFamily<Y>,
    from: &FinSeq,
    y: &Y::Point,
    k: usize,
    child_bound: u64,
) -> Result<FinSeq, PreimageError> {
    let space = family.space();
    let mut ball = family.ball(from);
    if !family.contains(&ball, y) {
        return Err(PreimageError::OutsideBall);
    }
    while ball.address.len() < k {
        let len = ball.address.len();
        let slack = (&ball.radius - &space.dist(&ball.center, y)).mul_pow2(-2);
        let cap = Rational::pow2(-(len as i64) - 3);
        let tol = if slack < cap { slack } else { cap };
        ball = (0..=child_bound)
            .map(|n| family.child(&ball, n))
            .find(|c| space.dist(y, &c.center) < tol)
            .ok_or(PreimageError::BoundExhausted { level: len })?;
    }
    Ok(ball.address)
}

/// An address `x` of length `k` with `h(x)` within `2^-k` of `y`.
pub fn solve_preimage<Y: PolishPresentation>(
    family: &BallFamily<Y>,
    y: &Y::Point,
    k: usize,
    child_bound: u64,
) -> Result<FinSeq, PreimageError> {
    descend(family, &FinSeq::empty(), y, k, child_bound)
}

/// `h(σ(q))` at precision `k`: the open map from the Sorgenfrey line.
pub fn open_map_eval<Y: PolishPresentation>(
    family: &BallFamily<Y>,
    pi: &SorgenfreyPiBase,
    q: &Rational,
    k: usize,
) -> (Y::Point, Rational) {
    let s = address(q, pi, k.max(1));
    eval_h(family, &s, k)
}

/// A rational in `V_s` whose image at precision `k` is within `2^-k` of `p`,
/// for `p` in `B_s`.
pub fn image_witness<Y: PolishPresentation>(
    family: &BallFamily<Y>,
    pi: &SorgenfreyPiBase,
    s: &FinSeq,
    p: &Y::Point,
    k: usize,
    child_bound: u64,
) -> Result<Rational, PreimageError> {
    let t = descend(family, s, p, k.max(s.len()).max(1), child_bound)?;
    let iv = node_interval(pi, &t).ok_or(PreimageError::OutsideBall)?;
    Ok(iv.a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    #[test]
    fn radius_examples() {
        assert_eq!(child_radius(&q!(2), &q!(1), 0).unwrap(), q!(1, 8));
        assert_eq!(child_radius(&q!(1, 8), &q!(1, 16), 1).unwrap(), q!(1, 32));
        assert_eq!(child_radius(&q!(1, 8), &q!(1, 8), 1), Err(CenterOutside));
    }

    #[test]
    fn enumeration_starts_by_level() {
        let y = RealsCapped;
        let first: Vec<Rational> = (0..5).map(|i| y.dense(i)).collect();
        assert_eq!(first, [q!(0), q!(-1), q!(-1, 2), q!(1, 2), q!(1)]);
        // level 2 runs from -2 to 2 in quarters, skipping level 1 points
        assert_eq!(y.dense(5), q!(-2));
        assert_eq!(y.dense(6), q!(-7, 4));
    }

    #[test]
    fn ball_lookup_matches_scan() {
        let y = RealsCapped;
        for (c, r) in [(q!(0), q!(1, 8)), (q!(3, 4), q!(1, 32)), (q!(-5, 3), q!(1, 7)), (q!(9), q!(1, 2))] {
            let scanned: Vec<Rational> = (0..1u64 << 19).map(|k| y.dense(k)).filter(|p| y.dist(&c, p) < r).take(24).collect();
            assert_eq!(scanned.len(), 24, "{} {}", c, r);
            for (i, p) in scanned.iter().enumerate() {
                assert_eq!(y.dense_in_ball(&c, &r, i as u64).as_ref(), Some(p), "{} {} {}", c, r, i);
            }
            assert_eq!(scan_dense_in_ball(&y, &c, &r, 3, 1 << 19).as_ref(), Some(&scanned[3]));
        }
    }

    #[test]
    fn index_of_inverts_dense() {
        let y = RealsCapped;
        for i in 0..300 {
            assert_eq!(y.index_of(&y.dense(i)), Some(i));
        }
        assert_eq!(y.index_of(&q!(1, 3)), None);
    }

    #[test]
    fn schedule_has_infinite_fibres() {
        for v in 0..5 {
            assert!((0..64).filter(|&n| schedule(n) == v).count() >= 3);
        }
        assert_eq!(schedule(4), 4);
        assert_eq!(schedule(5), 0);
        assert_eq!(schedule(20), 0);
        assert_eq!(schedule(65), 0);
    }

    #[test]
    fn eval_at_zero_is_root() {
        let fam = BallFamily::new(RealsCapped);
        assert_eq!(eval_h(&fam, &FinSeq::empty(), 0), (q!(0), q!(1)));
    }

    #[test]
    fn small_audit_passes() {
        let fam = BallFamily::new(RealsCapped);
        let audit = ball_family_audit(&fam, 2, 24, &q!(1, 64), &[0, 5, 10]);
        assert!(audit.passed(), "{:?}", audit.checks);
        assert_eq!(audit.nodes, 1 + 25 + 625);
    }

    #[test]
    fn preimage_round_trip() {
        let fam = BallFamily::new(RealsCapped);
        let y = q!(1, 3);
        let x = solve_preimage(&fam, &y, 8, 4096).unwrap();
        let (p, err) = eval_h(&fam, &x, 8);
        assert!((&p - &y).abs() <= err);
        assert_eq!(solve_preimage(&fam, &y, 0, 4096).unwrap(), FinSeq::empty());
        let root = solve_preimage(&fam, &q!(0), 1, 4096).unwrap();
        assert_eq!(fam.ball(&root).center, q!(0));
    }

    #[test]
    fn open_map_nested() {
        let fam = BallFamily::new(RealsCapped);
        let pi = SorgenfreyPiBase::new();
        let (a, _) = open_map_eval(&fam, &pi, &q!(3, 4), 4);
        let (b, e) = open_map_eval(&fam, &pi, &q!(3, 4), 8);
        assert_eq!(e, q!(1, 256));
        assert!((&a - &b).abs() <= q!(1, 16));
    }
}
