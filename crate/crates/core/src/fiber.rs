//! Cover refinement for the even-coordinate map `f(x)(n) = x(2n)` on the
//! Baire space, and the amplification loop that produces `2^n` disjoint
//! basic opens with one common image.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::games::{BaireModel, GameKind, IMove, PlayerII, Round, Run};
use crate::seqcore::{BaireRegion, FinSeq};

/// `f(N_s) = N_t` with `t` the even-position digits of `s`.
pub fn even_map_basic_image(s: &FinSeq) -> FinSeq {
    FinSeq::from_digits(s.digits().iter().step_by(2).copied().collect())
}

/// `N_a ∩ N_b = ∅`
pub fn disjoint(a: &FinSeq, b: &FinSeq) -> bool {
    !a.comparable(b)
}

/// `N_a ⊆ N_b`
pub fn within(a: &FinSeq, b: &FinSeq) -> bool {
    b.is_prefix_of(a)
}

/// A basic open inside `N_s ∩ f^-1(N_t)` with image exactly `N_t`, when
/// `f(N_s) ⊇ N_t`; free odd positions are filled with 0.
pub fn pullback(s: &FinSeq, t: &FinSeq) -> Option<FinSeq> {
    let img = even_map_basic_image(s);
    if !img.is_prefix_of(t) {
        return None;
    }
    let mut u = s.clone();
    while u.len() < 2 * t.len() - usize::from(!t.is_empty()) {
        let i = u.len();
        u.push(if i % 2 == 0 { t.digits()[i / 2] } else { 0 });
    }
    Some(u)
}

/// Disjoint basic opens all mapping exactly onto `N_target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub target: FinSeq,
    pub pieces: Vec<FinSeq>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverError {
    /// Two pieces overlap.
    Overlap(usize, usize),
    /// A piece's image differs from the target.
    Image(usize),
    NoPieces,
    /// `R` is not inside piece `k`.
    NotInsidePiece(usize),
    /// `S` is not inside the target.
    NotInsideTarget,
    NoSuchPiece(usize),
}

impl fmt::Display for CoverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverError::Overlap(i, j) => write!(f, "pieces {} and {} overlap", i, j),
            CoverError::Image(i) => write!(f, "piece {} has the wrong image", i),
            CoverError::NoPieces => f.write_str("cover has no pieces"),
            CoverError::NotInsidePiece(k) => write!(f, "refinement misses piece {}", k),
            CoverError::NotInsideTarget => f.write_str("refinement misses the target"),
            CoverError::NoSuchPiece(k) => write!(f, "no piece {}", k),
        }
    }
}

impl Cover {
    pub fn full() -> Self {
        Cover { target: FinSeq::empty(), pieces: vec![FinSeq::empty()] }
    }

    pub fn check(&self) -> Result<(), CoverError> {
        if self.pieces.is_empty() {
            return Err(CoverError::NoPieces);
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if even_map_basic_image(p) != self.target {
                return Err(CoverError::Image(i));
            }
            for (j, q) in self.pieces.iter().enumerate().skip(i + 1) {
                if !disjoint(p, q) {
                    return Err(CoverError::Overlap(i, j));
                }
            }
        }
        Ok(())
    }

    // every piece pulled back to a smaller target
    fn retarget(&self, t: FinSeq) -> Cover {
        let pieces = self.pieces.iter().map(|p| pullback(p, &t).expect("target shrinks inside every image")).collect();
        Cover { target: t, pieces }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Directive {
    /// Split piece `k` in two along a collision pair.
    Split(usize),
    SplitAll,
    ShrinkPiece(usize, FinSeq),
    ShrinkTarget(FinSeq),
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Directive::Split(k) => write!(f, "split {}", k),
            Directive::SplitAll => f.write_str("split all"),
            Directive::ShrinkPiece(k, r) => write!(f, "shrink piece {} to N{}", k, r),
            Directive::ShrinkTarget(s) => write!(f, "shrink target to N{}", s),
        }
    }
}

/// Two extensions of `s` that differ only at the first free odd position.
pub fn collision_pair(s: &FinSeq) -> (FinSeq, FinSeq) {
    let mut base = s.clone();
    if base.len() % 2 == 0 {
        base.push(0);
    }
    (base.extend(0), base.extend(1))
}

fn split(cover: &Cover, k: usize) -> Result<Cover, CoverError> {
    let p = cover.pieces.get(k).ok_or(CoverError::NoSuchPiece(k))?;
    let (a, b) = collision_pair(p);
    let t = even_map_basic_image(&a);
    let mut out = cover.retarget(t.clone());
    let a = pullback(&a, &t).expect("collision stems map onto the new target");
    let b = pullback(&b, &t).expect("collision stems map onto the new target");
    out.pieces.splice(k..=k, [a, b]);
    Ok(out)
}

/// Applies one refinement statement; the transcript line says what changed.
pub fn refine(cover: &Cover, directive: &Directive) -> Result<(Cover, String), CoverError> {
    let out = match directive {
        Directive::Split(k) => split(cover, *k)?,
        Directive::SplitAll => {
            let mut c = cover.clone();
            for k in 0..cover.pieces.len() {
                c = split(&c, 2 * k)?;
            }
            c
        }
        Directive::ShrinkPiece(k, r) => {
            let p = cover.pieces.get(*k).ok_or(CoverError::NoSuchPiece(*k))?;
            if !within(r, p) {
                return Err(CoverError::NotInsidePiece(*k));
            }
            let t = even_map_basic_image(r);
            let mut out = cover.retarget(t.clone());
            out.pieces[*k] = pullback(r, &t).expect("image of r is t");
            out
        }
        Directive::ShrinkTarget(s) => {
            if !within(s, &cover.target) {
                return Err(CoverError::NotInsideTarget);
            }
            cover.retarget(s.clone())
        }
    };
    let line = format!("{}: target N{} -> N{}, {} pieces", directive, cover.target, out.target, out.pieces.len());
    Ok((out, line))
}

/// One completed level of the amplification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    /// `W_s` for `s` in `{0,1}^k`, in lexicographic order of `s`.
    pub w: Vec<FinSeq>,
    pub w_tilde: FinSeq,
    /// I's and II's moves in each branch's game.
    pub u: Vec<FinSeq>,
    pub v: Vec<FinSeq>,
    pub u_tilde: FinSeq,
    pub v_tilde: FinSeq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmplifierState {
    pub depth: usize,
    pub levels: Vec<Level>,
    /// `W_s` for `s` in `{0,1}^depth`.
    pub pieces: Vec<FinSeq>,
    pub target: FinSeq,
    pub transcript: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmplifyError {
    Cover(CoverError),
    /// A strategy answered outside I's set.
    Strategy { level: usize, branch: Option<usize> },
}

impl fmt::Display for AmplifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmplifyError::Cover(e) => write!(f, "{}", e),
            AmplifyError::Strategy { level, branch: Some(b) } => write!(f, "domain strategy illegal at level {} branch {}", level, b),
            AmplifyError::Strategy { level, branch: None } => write!(f, "target strategy illegal at level {}", level),
        }
    }
}

impl From<CoverError> for AmplifyError {
    fn from(e: CoverError) -> Self {
        AmplifyError::Cover(e)
    }
}

// a basic open inside II's answer
fn basic_inside(r: &BaireRegion) -> Option<FinSeq> {
    let b = r.0.first()?;
    Some(if b.lo == 0 { b.stem.clone() } else { b.stem.extend(b.lo) })
}

fn answer(two: &dyn PlayerII<BaireModel>, run: &mut Run<BaireModel>, u: &FinSeq) -> Option<FinSeq> {
    let mv = IMove { u: BaireRegion::basic(u.clone()), x: None };
    let v = two.respond(&BaireModel, run, &mv);
    let stem = basic_inside(&v)?;
    if !within(&stem, u) {
        return None;
    }
    run.rounds.push(Round { u: mv.u, x: None, v });
    Some(stem)
}

/// Runs the recursion to `depth`: at each level every branch plays its
/// domain game and the piece shrinks into II's answer, the target plays the
/// target game and shrinks into II's answer, then every piece splits.
pub fn amplify(
    depth: usize,
    domain_ii: &dyn PlayerII<BaireModel>,
    target_ii: &dyn PlayerII<BaireModel>,
) -> Result<AmplifierState, AmplifyError> {
    let mut cover = Cover::full();
    let mut runs: Vec<Run<BaireModel>> = vec![Run::new(GameKind::Choquet)];
    let mut target_run = Run::new(GameKind::Strict);
    let mut levels = Vec::new();
    let mut transcript = Vec::new();
    for k in 0..depth {
        let w = cover.pieces.clone();
        let w_tilde = cover.target.clone();
        let mut u = Vec::with_capacity(w.len());
        let mut v = Vec::with_capacity(w.len());
        for i in 0..w.len() {
            let ui = cover.pieces[i].clone();
            let vi = answer(domain_ii, &mut runs[i], &ui).ok_or(AmplifyError::Strategy { level: k, branch: Some(i) })?;
            let (c, line) = refine(&cover, &Directive::ShrinkPiece(i, vi.clone()))?;
            cover = c;
            transcript.push(line);
            u.push(ui);
            v.push(vi);
        }
        let u_tilde = cover.target.clone();
        let v_tilde = answer(target_ii, &mut target_run, &u_tilde).ok_or(AmplifyError::Strategy { level: k, branch: None })?;
        let (c, line) = refine(&cover, &Directive::ShrinkTarget(v_tilde.clone()))?;
        transcript.push(line);
        let (c, line) = refine(&c, &Directive::SplitAll)?;
        transcript.push(line);
        cover = c;
        runs = runs.into_iter().flat_map(|r| [r.clone(), r]).collect();
        levels.push(Level { w, w_tilde, u, v, u_tilde, v_tilde });
    }
    Ok(AmplifierState { depth, levels, pieces: cover.pieces, target: cover.target, transcript })
}

/// Independent re-check of a finished amplification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub depth: usize,
    pub image: FinSeq,
    /// Sorted.
    pub stems: Vec<FinSeq>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyError {
    Count { expected: usize, found: usize },
    Overlap(FinSeq, FinSeq),
    Image(FinSeq),
    Nesting { level: usize, what: String },
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Count { expected, found } => write!(f, "expected {} pieces, found {}", expected, found),
            VerifyError::Overlap(a, b) => write!(f, "N{} and N{} overlap", a, b),
            VerifyError::Image(a) => write!(f, "image of N{} differs from the target", a),
            VerifyError::Nesting { level, what } => write!(f, "nesting fails at level {}: {}", level, what),
        }
    }
}

pub fn verify_amplifier(state: &AmplifierState) -> Result<Certificate, VerifyError> {
    let n = state.pieces.len();
    if n != 1 << state.depth {
        return Err(VerifyError::Count { expected: 1 << state.depth, found: n });
    }
    for (i, a) in state.pieces.iter().enumerate() {
        if even_map_basic_image(a) != state.target {
            return Err(VerifyError::Image(a.clone()));
        }
        for b in &state.pieces[i + 1..] {
            if !disjoint(a, b) {
                return Err(VerifyError::Overlap(a.clone(), b.clone()));
            }
        }
    }
    let nest = |level: usize, what: String| VerifyError::Nesting { level, what };
    for (k, lv) in state.levels.iter().enumerate() {
        let next_w: &[FinSeq] = state.levels.get(k + 1).map_or(&state.pieces, |l| &l.w);
        let next_target = state.levels.get(k + 1).map_or(&state.target, |l| &l.w_tilde);
        let chain = [&lv.w_tilde, &lv.u_tilde, &lv.v_tilde, next_target];
        for pair in chain.windows(2) {
            if !within(pair[1], pair[0]) {
                return Err(nest(k, format!("N{} not inside N{}", pair[1], pair[0])));
            }
        }
        for (i, w) in lv.w.iter().enumerate() {
            let (u, v) = (&lv.u[i], &lv.v[i]);
            if !within(u, w) || !within(v, u) {
                return Err(nest(k, format!("branch {} moves leave W", i)));
            }
            for c in &next_w[2 * i..2 * i + 2] {
                if !within(c, v) {
                    return Err(nest(k, format!("child N{} not inside N{}", c, v)));
                }
            }
        }
    }
    let mut stems = state.pieces.clone();
    stems.sort();
    Ok(Certificate { depth: state.depth, image: state.target.clone(), stems })
}
