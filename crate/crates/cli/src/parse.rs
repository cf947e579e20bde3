//! Value parsers for clap. Everything numeric is exact.

use lusin_core::games::{EOpenSet, OpenInterval};
use lusin_core::rational::Rational;
use lusin_core::scattered::cb::OrdPoint;
use lusin_core::scattered::ordinal::Ordinal;
use lusin_core::sorgenfrey::SOpenSet;

pub fn rational(s: &str) -> Result<Rational, String> {
    s.trim().parse().map_err(|e| format!("{}", e))
}

pub fn positive(s: &str) -> Result<Rational, String> {
    let r = rational(s)?;
    if r.is_positive() {
        Ok(r)
    } else {
        Err(String::from("must be positive"))
    }
}

pub fn ordinal(s: &str) -> Result<Ordinal, String> {
    s.trim().parse().map_err(|e| format!("{}", e))
}

/// `3:w^2` is the point `w^2` of block 3; a bare ordinal is in block 0.
pub fn ord_point(s: &str) -> Result<OrdPoint, String> {
    match s.split_once(':') {
        Some((b, o)) => Ok((b.trim().trim_start_matches('#').parse().map_err(|_| format!("bad block index {:?}", b))?, ordinal(o)?)),
        None => Ok((0, ordinal(s)?)),
    }
}

pub fn sopen(s: &str) -> Result<SOpenSet, String> {
    s.parse().map_err(|e| format!("{}", e))
}

fn end(s: &str, inf: &str) -> Result<Option<Rational>, String> {
    let t = s.trim();
    if t == inf || (inf == "+inf" && t == "inf") {
        Ok(None)
    } else {
        rational(t).map(Some)
    }
}

/// Open subsets of the line: `(a, b) u (c, +inf)`; `{}` is empty.
pub fn eopen(s: &str) -> Result<EOpenSet, String> {
    let s = s.trim();
    if s == "{}" {
        return Ok(EOpenSet::empty());
    }
    let mut parts = Vec::new();
    let mut rest = s;
    loop {
        rest = rest.trim_start();
        let body = rest.strip_prefix('(').ok_or_else(|| format!("expected '(' in {:?}", s))?;
        let close = body.find(')').ok_or_else(|| format!("unclosed interval in {:?}", s))?;
        let (lo, hi) = body[..close].split_once(',').ok_or_else(|| format!("expected 'a, b' in {:?}", s))?;
        let (lo, hi) = (end(lo, "-inf")?, end(hi, "+inf")?);
        if let (Some(a), Some(b)) = (&lo, &hi) {
            if a >= b {
                return Err(format!("empty interval ({}, {})", a, b));
            }
        }
        parts.push(OpenInterval { lo, hi });
        rest = body[close + 1..].trim_start();
        if rest.is_empty() {
            break;
        }
        rest = rest.strip_prefix('u').ok_or_else(|| format!("expected 'u' between intervals in {:?}", s))?;
    }
    Ok(EOpenSet::from_parts(parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclid_sets() {
        let u = eopen("(-1, 2) u (5,+inf)").unwrap();
        assert_eq!(u.to_string(), "(-1/1, 2/1) u (5/1, +inf)");
        assert!(eopen("(2, 1)").is_err());
        assert!(eopen("[0, 1)").is_err());
        assert!(eopen("{}").unwrap().is_empty());
    }

    #[test]
    fn points() {
        assert_eq!(ord_point("2:w").unwrap(), (2, Ordinal::omega()));
        assert_eq!(ord_point("w*2").unwrap().0, 0);
    }
}
