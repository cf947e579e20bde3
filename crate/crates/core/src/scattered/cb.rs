//! Subspaces of compact ordinal spaces and their Cantor-Bendixson analysis.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::ordinal::Ordinal;

/// An interval of ordinals; the left end is closed only at 0 or at a limit,
/// the right end is open only at a limit (other cases are rewritten).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct OrdInterval {
    pub lo: Ordinal,
    pub lo_closed: bool,
    pub hi: Ordinal,
    pub hi_closed: bool,
}

impl OrdInterval {
    pub fn new(lo: Ordinal, lo_closed: bool, hi: Ordinal, hi_closed: bool) -> Self {
        let (lo, lo_closed) = match (lo_closed, lo.pred()) {
            (true, Some(p)) => (p, false),
            _ => (lo, lo_closed),
        };
        let (hi, hi_closed) = match (hi_closed, hi.pred()) {
            (false, Some(p)) => (p, true),
            _ => (hi, hi_closed),
        };
        OrdInterval { lo, lo_closed, hi, hi_closed }
    }

    /// `[lo, hi]`
    pub fn closed(lo: Ordinal, hi: Ordinal) -> Self {
        Self::new(lo, true, hi, true)
    }

    /// `(lo, hi]`
    pub fn left_open(lo: Ordinal, hi: Ordinal) -> Self {
        Self::new(lo, false, hi, true)
    }

    pub fn point(x: Ordinal) -> Self {
        Self::closed(x.clone(), x)
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Greater => true,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Less => false,
        }
    }

    pub fn contains(&self, x: &Ordinal) -> bool {
        let above = if self.lo_closed { self.lo <= *x } else { self.lo < *x };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    /// The only point, for one-point intervals (`{x + 1}` is stored as `(x, x + 1]`).
    pub fn single_point(&self) -> Option<Ordinal> {
        let one = if self.lo_closed { self.lo == self.hi } else { self.hi_closed && self.lo.succ() == self.hi };
        (one && self.hi_closed).then(|| self.hi.clone())
    }

    pub fn is_singleton(&self) -> bool {
        self.single_point().is_some()
    }

    pub fn meet(&self, other: &OrdInterval) -> OrdInterval {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        OrdInterval::new(lo, lo_closed, hi, hi_closed)
    }

    /// `self ⊆ other`
    pub fn within(&self, other: &OrdInterval) -> bool {
        self.is_empty() || self.meet(other) == *self
    }

    /// The same points with a closed right end.
    fn closed_right(&self) -> Option<OrdInterval> {
        if self.hi_closed {
            return Some(self.clone());
        }
        // hi = δ + ω^k is a limit; points of (lo, hi) lie below δ + ω^(k-1)·j for large j
        let (d, k) = self.hi.split_last()?;
        let mut j = 1;
        loop {
            let h = d.add(&Ordinal::term(k - 1, j));
            if self.lo < h || (self.lo_closed && self.lo == h) {
                return Some(OrdInterval { hi: h, hi_closed: true, ..self.clone() });
            }
            if h >= self.hi {
                return None;
            }
            j += 1;
        }
    }

    /// Largest Cantor-Bendixson rank of a point of the interval (as a space).
    pub fn max_rank(&self) -> Option<u32> {
        if self.is_empty() {
            return None;
        }
        let iv = self.closed_right()?;
        // the smallest prefix of hi above lo carries the largest last exponent
        let best = iv
            .hi
            .prefixes()
            .find(|p| iv.lo < *p)
            .map(|p| p.last_exp());
        Some(best.unwrap_or(0))
    }

    /// Rank of `x` inside this interval as a space.
    pub fn rank_of(&self, x: &Ordinal) -> Option<u32> {
        if !self.contains(x) {
            return None;
        }
        Some(if self.lo_closed && *x == self.lo { 0 } else { x.last_exp() })
    }

    /// The finitely many points of top rank, when that rank is attained at
    /// finitely many points.
    pub fn top_points(&self) -> Vec<Ordinal> {
        let Some(m) = self.max_rank() else { return Vec::new() };
        let Some(iv) = self.closed_right() else { return Vec::new() };
        if m == 0 {
            // a rank-0 top means every point is isolated; finite only for short runs
            return Vec::new();
        }
        let p = iv.hi.truncate(m);
        let (base, _) = p.split_last().expect("nonzero prefix");
        let base = base.truncate(m + 1);
        (1..=p.coeff(m))
            .map(|c| base.add(&Ordinal::term(m, c)))
            .filter(|x| iv.rank_of(x) == Some(m))
            .collect()
    }
}

impl fmt::Display for OrdInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(x) = self.single_point() {
            return write!(f, "{{{}}}", x);
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Compact ordinal spaces `[0, top_i]`, summed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OrdinalSpace {
    pub blocks: Vec<Ordinal>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotCompact(pub Ordinal);

impl fmt::Display for NotCompact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} is not a successor, so [0, {}) is not compact", self.0, self.0)
    }
}

impl OrdinalSpace {
    /// The space `[0, top]`.
    pub fn up_to(top: Ordinal) -> Self {
        OrdinalSpace { blocks: alloc::vec![top] }
    }

    /// The ordinal `α` as the space `[0, α - 1]`.
    pub fn ordinal(alpha: &Ordinal) -> Result<Self, NotCompact> {
        alpha.pred().map(Self::up_to).ok_or_else(|| NotCompact(alpha.clone()))
    }

    pub fn sum(alphas: &[Ordinal]) -> Result<Self, NotCompact> {
        let blocks = alphas
            .iter()
            .map(|a| a.pred().ok_or_else(|| NotCompact(a.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OrdinalSpace { blocks })
    }

    pub fn whole(&self) -> SubSpace {
        SubSpace::from_pieces(self.blocks.iter().enumerate().map(|(i, t)| (i, OrdInterval::closed(Ordinal::zero(), t.clone()))))
    }
}

impl fmt::Display for OrdinalSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "[0, {}]", t)?;
        }
        Ok(())
    }
}

/// A point of a summed space: block index and ordinal.
pub type OrdPoint = (usize, Ordinal);

/// Finite union of intervals, each inside one block; sorted, disjoint, and
/// touching intervals merged.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SubSpace {
    pieces: Vec<(usize, OrdInterval)>,
}

// the two intervals overlap or abut with no gap point between them
fn joins(a: &OrdInterval, b: &OrdInterval) -> bool {
    match a.hi.cmp(&b.lo) {
        Ordering::Greater => true,
        Ordering::Equal => a.hi_closed || b.lo_closed,
        Ordering::Less => false,
    }
}

impl SubSpace {
    pub fn empty() -> Self {
        SubSpace::default()
    }

    pub fn from_pieces<I: IntoIterator<Item = (usize, OrdInterval)>>(pieces: I) -> Self {
        let mut v: Vec<(usize, OrdInterval)> = pieces.into_iter().filter(|p| !p.1.is_empty()).collect();
        v.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.lo.cmp(&y.1.lo)).then(y.1.lo_closed.cmp(&x.1.lo_closed)));
        let mut out: Vec<(usize, OrdInterval)> = Vec::with_capacity(v.len());
        for (b, iv) in v {
            if let Some((lb, last)) = out.last_mut() {
                if *lb == b && joins(last, &iv) {
                    match last.hi.cmp(&iv.hi) {
                        Ordering::Less => {
                            last.hi = iv.hi;
                            last.hi_closed = iv.hi_closed;
                        }
                        Ordering::Equal => last.hi_closed |= iv.hi_closed,
                        Ordering::Greater => {}
                    }
                    continue;
                }
            }
            out.push((b, iv));
        }
        SubSpace { pieces: out }
    }

    pub fn interval(iv: OrdInterval) -> Self {
        Self::from_pieces([(0, iv)])
    }

    pub fn pieces(&self) -> &[(usize, OrdInterval)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, p: &OrdPoint) -> bool {
        self.pieces.iter().any(|(b, iv)| *b == p.0 && iv.contains(&p.1))
    }

    pub fn intersect(&self, other: &SubSpace) -> SubSpace {
        Self::from_pieces(
            self.pieces
                .iter()
                .flat_map(|(b, x)| other.pieces.iter().filter(move |(c, _)| c == b).map(move |(_, y)| (*b, x.meet(y)))),
        )
    }

    pub fn union(&self, other: &SubSpace) -> SubSpace {
        Self::from_pieces(self.pieces.iter().chain(&other.pieces).cloned())
    }

    pub fn is_subset(&self, other: &SubSpace) -> bool {
        self.pieces.iter().all(|(b, x)| other.pieces.iter().any(|(c, y)| c == b && x.within(y)))
    }

    pub fn difference(&self, other: &SubSpace) -> SubSpace {
        let mut cur = self.pieces.clone();
        for (c, y) in &other.pieces {
            cur = cur
                .into_iter()
                .flat_map(|(b, x)| {
                    if b == *c {
                        let [l, r] = subtract(&x, y);
                        alloc::vec![(b, l), (b, r)]
                    } else {
                        alloc::vec![(b, x)]
                    }
                })
                .filter(|p| !p.1.is_empty())
                .collect();
        }
        Self::from_pieces(cur)
    }

    /// Removes one point.
    pub fn without(&self, p: &OrdPoint) -> SubSpace {
        Self::from_pieces(self.pieces.iter().flat_map(|(b, iv)| {
            if *b != p.0 || !iv.contains(&p.1) {
                return alloc::vec![(*b, iv.clone())];
            }
            let x = &p.1;
            alloc::vec![
                (*b, OrdInterval::new(iv.lo.clone(), iv.lo_closed, x.clone(), false)),
                (*b, OrdInterval::new(x.clone(), false, iv.hi.clone(), iv.hi_closed)),
            ]
        }))
    }

    /// Cantor-Bendixson rank of a point of the subspace.
    pub fn rank(&self, p: &OrdPoint) -> Option<u32> {
        self.pieces.iter().find(|(b, iv)| *b == p.0 && iv.contains(&p.1)).and_then(|(_, iv)| iv.rank_of(&p.1))
    }

    /// First stage with an empty level: one more than the largest rank.
    pub fn height(&self) -> u32 {
        self.pieces.iter().filter_map(|(_, iv)| iv.max_rank()).map(|m| m + 1).max().unwrap_or(0)
    }

    /// `I_α` as a description, for `α < height`.
    pub fn level(&self, alpha: u32) -> Level {
        let mut parts = Vec::new();
        for (b, iv) in &self.pieces {
            let Some(m) = iv.max_rank() else { continue };
            if alpha > m {
                continue;
            }
            let top = iv.top_points();
            if alpha == m && !top.is_empty() {
                parts.push(LevelPart::Points(*b, top));
            } else if alpha == 0 && m == 0 {
                parts.push(LevelPart::Points(*b, finite_points(iv)));
            } else {
                parts.push(LevelPart::RankIn(*b, iv.clone()));
            }
        }
        Level { alpha, parts }
    }

    pub fn is_clopen_in(&self, space: &OrdinalSpace) -> bool {
        // open needs no closed left end except at a block's 0; closed needs no open right end
        self.pieces.iter().all(|(b, iv)| {
            b < &space.blocks.len()
                && (!iv.lo_closed || iv.lo.is_zero())
                && iv.hi_closed
        })
    }
}

// pieces of `x` outside `y`
fn subtract(x: &OrdInterval, y: &OrdInterval) -> [OrdInterval; 2] {
    [
        x.meet(&OrdInterval::new(Ordinal::zero(), true, y.lo.clone(), !y.lo_closed)),
        x.meet(&OrdInterval::new(y.hi.clone(), !y.hi_closed, x.hi.clone(), true)),
    ]
}

// a rank-0 interval is a finite run of successors (and possibly 0 or a closed limit end)
pub(crate) fn finite_points(iv: &OrdInterval) -> Vec<Ordinal> {
    let mut out = Vec::new();
    let mut x = if iv.lo_closed { iv.lo.clone() } else { iv.lo.succ() };
    while iv.contains(&x) {
        out.push(x.clone());
        x = x.succ();
    }
    out
}

impl fmt::Display for SubSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return f.write_str("{}");
        }
        for (i, (b, iv)) in self.pieces.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            if *b > 0 {
                write!(f, "#{}:", b)?;
            }
            write!(f, "{}", iv)?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LevelPart {
    Points(usize, Vec<Ordinal>),
    /// Every point of the interval with the level's rank.
    RankIn(usize, OrdInterval),
}

/// Symbolic description of `I_α`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Level {
    pub alpha: u32,
    pub parts: Vec<LevelPart>,
}

impl Level {
    pub fn contains(&self, space: &SubSpace, p: &OrdPoint) -> bool {
        space.rank(p) == Some(self.alpha)
            && self.parts.iter().any(|part| match part {
                LevelPart::Points(b, xs) => *b == p.0 && xs.contains(&p.1),
                LevelPart::RankIn(b, iv) => *b == p.0 && iv.contains(&p.1),
            })
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, part) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            match part {
                LevelPart::Points(b, xs) => {
                    if *b > 0 {
                        write!(f, "#{}:", b)?;
                    }
                    let xs: Vec<String> = xs.iter().map(|x| format!("{}", x)).collect();
                    write!(f, "{{{}}}", xs.join(", "))?;
                }
                LevelPart::RankIn(b, iv) => {
                    if *b > 0 {
                        write!(f, "#{}:", b)?;
                    }
                    write!(f, "rank {} points of {}", self.alpha, iv)?;
                }
            }
        }
        Ok(())
    }
}

/// `O(x)`: `{x}` for isolated points, else `(λ_n, x]` from the fundamental
/// sequence (intersected with the subspace).
pub fn neighbourhood(space: &SubSpace, p: &OrdPoint, n: u64) -> SubSpace {
    let x = &p.1;
    let iv = match x.fundamental(n) {
        Some(l) if space.rank(p).unwrap_or(0) > 0 => OrdInterval::left_open(l, x.clone()),
        _ => OrdInterval::point(x.clone()),
    };
    space.intersect(&SubSpace::from_pieces([(p.0, iv)]))
}

/// Ranks by repeated removal of isolated points on a finite sample.
///
/// A finite set is discrete, so "isolated" is judged against the sample
/// density: a limit `x = b + ω^e` counts as a limit point while the sample
/// still meets `[b + ω^(e-1)·⌈m/2⌉, x)`; successors and 0 are isolated.
pub fn brute_ranks(points: &[Ordinal], m: u64) -> Vec<u32> {
    let n = points.len();
    let mut alive: Vec<bool> = alloc::vec![true; n];
    let mut rank = alloc::vec![0u32; n];
    let mut stage = 0;
    while alive.iter().any(|&a| a) {
        let mut kill = Vec::new();
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            let x = &points[i];
            let limit_point = x.split_last().filter(|_| x.is_limit()).map_or(false, |(b, e)| {
                let from = b.add(&Ordinal::term(e - 1, m.div_ceil(2)));
                let start = points.partition_point(|y| *y < from);
                (start..i).any(|j| alive[j])
            });
            if !limit_point {
                kill.push(i);
            }
        }
        for i in kill {
            alive[i] = false;
            rank[i] = stage;
        }
        stage += 1;
    }
    rank
}

/// Result of analysing a space (or subspace).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CbReport {
    pub space: SubSpace,
    pub height: u32,
    pub levels: Vec<Level>,
    /// Points compared and whether brute force agreed, when run.
    pub cross_check: Option<(usize, bool)>,
}

impl CbReport {
    pub fn rank(&self, p: &OrdPoint) -> Option<u32> {
        self.space.rank(p)
    }
}

/// Largest sample size for the brute-force comparison.
pub const BRUTE_LIMIT: usize = 200_000;

/// Symbolic levels and height, cross-checked by brute force on the
/// truncation with digits below `truncation` when it is small enough.
pub fn cb_analyze(space: &SubSpace, truncation: u64) -> CbReport {
    let height = space.height();
    let levels = (0..height).map(|a| space.level(a)).collect();
    let mut cross_check = None;
    if truncation > 0 {
        let mut checked = 0;
        let mut agree = true;
        let mut blocks: Vec<usize> = space.pieces().iter().map(|p| p.0).collect();
        blocks.dedup();
        for b in blocks {
            let top = space.pieces().iter().filter(|p| p.0 == b).map(|p| p.1.hi.clone()).max().expect("block has pieces");
            let lead = top.leading_exp().unwrap_or(0);
            let approx = (truncation as f64).powi(lead as i32) * (top.coeff(lead) as f64 + 1.0);
            if approx > BRUTE_LIMIT as f64 {
                continue;
            }
            let pts: Vec<Ordinal> =
                Ordinal::truncation(&top, truncation).into_iter().filter(|x| space.contains(&(b, x.clone()))).collect();
            let brute = brute_ranks(&pts, truncation);
            for (x, r) in pts.iter().zip(&brute) {
                checked += 1;
                if space.rank(&(b, x.clone())) != Some(*r) {
                    agree = false;
                }
            }
        }
        if checked > 0 {
            cross_check = Some((checked, agree));
        }
    }
    CbReport { space: space.clone(), height, levels, cross_check }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn space(a: &str) -> SubSpace {
        OrdinalSpace::ordinal(&o(a)).unwrap().whole()
    }

    #[test]
    fn omega_plus_one() {
        let r = cb_analyze(&space("w+1"), 101);
        assert_eq!(r.height, 2);
        assert_eq!(r.levels.len(), 2);
        assert_eq!(r.levels[1].to_string(), "{w}");
        assert_eq!(r.levels[0].to_string(), "rank 0 points of [0, w]");
        assert_eq!(r.cross_check, Some((102, true)));
    }

    #[test]
    fn omega_squared_plus_one() {
        let s = space("w^2+1");
        assert_eq!(s.height(), 3);
        for k in 1..5 {
            assert_eq!(s.rank(&(0, Ordinal::term(1, k))), Some(1));
        }
        assert_eq!(s.rank(&(0, o("w^2"))), Some(2));
        assert_eq!(s.rank(&(0, o("0"))), Some(0));
    }

    #[test]
    fn closed_left_limit_is_isolated() {
        let a = SubSpace::interval(OrdInterval::closed(o("w"), o("w*2")));
        assert_eq!(a.rank(&(0, o("w"))), Some(0));
        assert_eq!(a.rank(&(0, o("w*2"))), Some(1));
        assert_eq!(a.height(), 2);
        let pts = Ordinal::truncation(&o("w*2"), 30);
        let pts: Vec<Ordinal> = pts.into_iter().filter(|x| a.contains(&(0, x.clone()))).collect();
        let brute = brute_ranks(&pts, 30);
        assert_eq!(brute[0], 0);
        assert_eq!(*brute.last().unwrap(), 1);
    }

    #[test]
    fn open_right_end_heights() {
        let a = SubSpace::interval(OrdInterval::new(o("w*3"), false, o("w^2"), false));
        assert_eq!(a.height(), 2);
        let b = SubSpace::interval(OrdInterval::new(o("0"), true, o("w^2+w"), false));
        assert_eq!(b.height(), 3);
        let c = SubSpace::interval(OrdInterval::new(o("w+5"), false, o("w*2"), false));
        assert_eq!(c.height(), 1);
    }

    #[test]
    fn merging_and_removal() {
        let a = SubSpace::from_pieces([
            (0, OrdInterval::new(o("0"), true, o("w"), false)),
            (0, OrdInterval::point(o("w"))),
        ]);
        assert_eq!(a, space("w+1"));
        let b = space("w+1").without(&(0, o("w")));
        assert_eq!(b.height(), 1);
        assert_eq!(b.to_string(), "[0, w)");
        let c = space("w^2+1").difference(&SubSpace::interval(OrdInterval::left_open(o("w"), o("w*3"))));
        assert_eq!(c.to_string(), "[0, w] u (w*3, w^2]");
        assert_eq!(c.union(&space("w^2+1")), space("w^2+1"));
    }

    #[test]
    fn closed_limit_end_is_not_a_top_point() {
        let a = OrdInterval::closed(o("w"), o("w*2"));
        assert_eq!(a.top_points(), [o("w*2")]);
        let b = OrdInterval::left_open(o("w"), o("w^2+w*3"));
        assert_eq!(b.top_points(), [o("w^2")]);
    }
}
