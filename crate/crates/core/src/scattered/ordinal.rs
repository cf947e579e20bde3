//! Ordinals below `ω^ω` in Cantor normal form.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

/// `Σ ω^k · m` with exponents strictly decreasing and coefficients positive.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(u32, u64)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn finite(n: u64) -> Self {
        Self::term(0, n)
    }

    pub fn omega() -> Self {
        Self::term(1, 1)
    }

    /// `ω^k · m`
    pub fn term(k: u32, m: u64) -> Self {
        if m == 0 {
            Self::zero()
        } else {
            Ordinal { terms: alloc::vec![(k, m)] }
        }
    }

    /// Sums the terms left to right with ordinal addition.
    pub fn from_terms<I: IntoIterator<Item = (u32, u64)>>(terms: I) -> Self {
        terms.into_iter().fold(Self::zero(), |acc, (k, m)| acc.add(&Self::term(k, m)))
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_successor(&self) -> bool {
        matches!(self.terms.last(), Some((0, _)))
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.terms.last(), Some((k, _)) if *k > 0)
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.0 == 0)
    }

    /// Exponent of the last term; 0 for zero and successors. This is the
    /// Cantor-Bendixson rank of the point in any `[0, top]`.
    pub fn last_exp(&self) -> u32 {
        self.terms.last().map_or(0, |t| t.0)
    }

    pub fn leading_exp(&self) -> Option<u32> {
        self.terms.first().map(|t| t.0)
    }

    /// Coefficient of `ω^k`.
    pub fn coeff(&self, k: u32) -> u64 {
        self.terms.iter().find(|t| t.0 == k).map_or(0, |t| t.1)
    }

    pub fn add(&self, other: &Ordinal) -> Ordinal {
        let Some(&(e, m)) = other.terms.first() else { return self.clone() };
        let mut terms: Vec<(u32, u64)> = self.terms.iter().copied().take_while(|t| t.0 > e).collect();
        let carry = self.coeff(e);
        terms.push((e, m + carry));
        terms.extend(other.terms.iter().skip(1).copied());
        Ordinal { terms }
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::finite(1))
    }

    /// `x - 1` for a successor.
    pub fn pred(&self) -> Option<Ordinal> {
        if !self.is_successor() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().expect("successor is nonzero");
        last.1 -= 1;
        if last.1 == 0 {
            terms.pop();
        }
        Some(Ordinal { terms })
    }

    /// The terms with exponent `>= k`.
    pub fn truncate(&self, k: u32) -> Ordinal {
        Ordinal { terms: self.terms.iter().copied().take_while(|t| t.0 >= k).collect() }
    }

    /// Prefix sums of the terms, shortest first (excluding zero).
    pub fn prefixes(&self) -> impl Iterator<Item = Ordinal> + '_ {
        (1..=self.terms.len()).map(move |i| Ordinal { terms: self.terms[..i].to_vec() })
    }

    /// `(γ, k)` with `self = γ + ω^k` for nonzero `self`.
    pub fn split_last(&self) -> Option<(Ordinal, u32)> {
        let &(k, m) = self.terms.last()?;
        let mut terms = self.terms.clone();
        if m == 1 {
            terms.pop();
        } else {
            terms.last_mut().expect("nonempty").1 = m - 1;
        }
        Some((Ordinal { terms }, k))
    }

    /// `λ_n = γ + ω^(k-1)·(n+1)` for a limit `λ = γ + ω^k`.
    pub fn fundamental(&self, n: u64) -> Option<Ordinal> {
        if !self.is_limit() {
            return None;
        }
        let (g, k) = self.split_last()?;
        Some(g.add(&Ordinal::term(k - 1, n + 1)))
    }

    /// Points of `[0, top]` whose CNF digits below the leading exponent are
    /// all under `m`, plus `top` itself, in increasing order.
    pub fn truncation(top: &Ordinal, m: u64) -> Vec<Ordinal> {
        let Some(lead) = top.leading_exp() else { return alloc::vec![Ordinal::zero()] };
        let lead = lead as usize;
        let lead_max = top.coeff(lead as u32);
        let mut out = Vec::new();
        let mut digits = alloc::vec![0u64; lead + 1];
        'outer: loop {
            let x = Ordinal::from_terms((0..=lead).rev().map(|k| (k as u32, digits[k])));
            if x > *top {
                break;
            }
            out.push(x);
            // mixed-radix increment, least significant digit first
            for k in 0..=lead {
                let cap = if k == lead { lead_max } else { m - 1 };
                if digits[k] < cap {
                    digits[k] += 1;
                    digits[..k].fill(0);
                    continue 'outer;
                }
            }
            break;
        }
        if out.last() != Some(top) {
            out.push(top.clone());
        }
        out
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            match a.0.cmp(&b.0).then(a.1.cmp(&b.1)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::finite(n)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, &(k, m)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            match (k, m) {
                (0, m) => write!(f, "{}", m)?,
                (1, 1) => f.write_str("w")?,
                (1, m) => write!(f, "w*{}", m)?,
                (k, 1) => write!(f, "w^{}", k)?,
                (k, m) => write!(f, "w^{}*{}", k, m)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseOrdinalError {
    Syntax(String),
    /// `ω^ω` or beyond.
    Unsupported(String),
}

impl fmt::Display for ParseOrdinalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseOrdinalError::Syntax(s) => write!(f, "cannot parse ordinal term {:?}", s),
            ParseOrdinalError::Unsupported(s) => write!(f, "unsupported: {:?} is not below w^w", s),
        }
    }
}

fn parse_term(t: &str) -> Result<(u32, u64), ParseOrdinalError> {
    let bad = || ParseOrdinalError::Syntax(String::from(t));
    let t = t.trim();
    let (base, coef) = match t.split_once('*') {
        Some((b, c)) => (b.trim(), c.trim().parse::<u64>().map_err(|_| bad())?),
        None => (t, 1),
    };
    if let Some(rest) = base.strip_prefix('w').or_else(|| base.strip_prefix('ω')) {
        let rest = rest.trim();
        let k = if rest.is_empty() {
            1
        } else {
            let e = rest.strip_prefix('^').ok_or_else(bad)?.trim();
            let e = e.trim_start_matches('(').trim_end_matches(')');
            if e.contains('w') || e.contains('ω') {
                return Err(ParseOrdinalError::Unsupported(String::from(t)));
            }
            e.parse::<u32>().map_err(|_| bad())?
        };
        Ok((k, coef))
    } else if coef == 1 {
        Ok((0, base.parse::<u64>().map_err(|_| bad())?))
    } else {
        Err(bad())
    }
}

impl FromStr for Ordinal {
    type Err = ParseOrdinalError;

    /// CNF-style sums such as `w^2*3+w+4`; terms are added as ordinals.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Err(ParseOrdinalError::Syntax(String::from(s)));
        }
        let terms = s.split('+').map(parse_term).collect::<Result<Vec<_>, _>>()?;
        Ok(Ordinal::from_terms(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "7", "w", "w*3", "w^2", "w^2*3+w+4", "w^4*2+w^2+1"] {
            assert_eq!(o(s).to_string(), s);
        }
        assert_eq!(o("1+w"), o("w"));
        assert_eq!(o("w+w"), o("w*2"));
        assert!(matches!("w^w".parse::<Ordinal>(), Err(ParseOrdinalError::Unsupported(_))));
        assert!("w^".parse::<Ordinal>().is_err());
    }

    #[test]
    fn order_and_kinds() {
        assert!(o("w") > o("100"));
        assert!(o("w^2") > o("w*100+5"));
        assert!(o("w*2+1") > o("w*2"));
        assert!(o("w^2").is_limit());
        assert!(o("w+1").is_successor());
        assert_eq!(o("w*3+2").pred(), Some(o("w*3+1")));
        assert_eq!(o("w^2*2+w").last_exp(), 1);
    }

    #[test]
    fn fundamental_sequences() {
        let f = |s: &str, n| o(s).fundamental(n).unwrap();
        assert_eq!([f("w^2", 0), f("w^2", 1), f("w^2", 2)], [o("w"), o("w*2"), o("w*3")]);
        assert_eq!([f("w*3", 0), f("w*3", 1)], [o("w*2+1"), o("w*2+2")]);
        assert_eq!([f("w^3+w^2", 0), f("w^3+w^2", 1)], [o("w^3+w"), o("w^3+w*2")]);
        assert_eq!(o("5").fundamental(0), None);
    }

    #[test]
    fn truncations() {
        let t = Ordinal::truncation(&o("w"), 4);
        assert_eq!(t, [o("0"), o("1"), o("2"), o("3"), o("w")]);
        assert_eq!(Ordinal::truncation(&o("w^2"), 10).len(), 101);
        let t = Ordinal::truncation(&o("w*2+3"), 5);
        assert_eq!(t.len(), 5 + 5 + 4);
        assert_eq!(Ordinal::truncation(&o("w+40"), 10).last(), Some(&o("w+40")));
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }
}
