//! Exact rationals with a machine-word fast path.
//!
//! Values whose reduced numerator and denominator fit in `i128` are stored
//! inline. Operands that fit in `i64` take overflow-free `i128` arithmetic,
//! dyadic operands are aligned by shifts, and anything that would overflow is
//! redone on big integers and demoted again when it fits. The representation is canonical, so equality and hashing
//! compare it directly.

use alloc::boxed::Box;
use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

// Reduced, denominator positive.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Small {
    n: i128,
    d: i128,
}

#[derive(Clone)]
enum Repr {
    Small(Small),
    Big(Box<BigRational>),
}

#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational {:?}", self.0)
    }
}

#[inline(always)]
fn fits(x: i128) -> bool {
    x as i64 as i128 == x
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    if (a | b) >> 64 == 0 {
        return (a as u64).gcd(&(b as u64)) as u128;
    }
    a.gcd(&b)
}

// n/d with d != 0, any magnitude that fits i128.
fn reduce(mut n: i128, mut d: i128) -> Rational {
    if d < 0 {
        match (n.checked_neg(), d.checked_neg()) {
            (Some(a), Some(b)) => {
                n = a;
                d = b;
            }
            _ => return Rational::from_big(BigRational::new(BigInt::from(n), BigInt::from(d))),
        }
    }
    if d != 1 {
        let g = gcd_u128(n.unsigned_abs(), d as u128);
        if g > 1 {
            n /= g as i128;
            d /= g as i128;
        }
    }
    if n == 0 {
        d = 1;
    }
    if n == i128::MIN {
        return Rational::from_big(BigRational::new_raw(BigInt::from(n), BigInt::from(d)));
    }
    Rational(Repr::Small(Small { n, d }))
}

#[inline(always)]
fn shl_checked(x: i128, k: u32) -> Option<i128> {
    (k < 126 && x.unsigned_abs().leading_zeros() > k + 1).then(|| x << k)
}

#[inline(always)]
fn is_pow2(d: i128) -> bool {
    d & (d - 1) == 0
}

fn small_of_big(b: &BigRational) -> Option<Small> {
    let n = b.numer().to_i128()?;
    let d = b.denom().to_i128()?;
    if n == i128::MIN || d == i128::MIN {
        return None;
    }
    Some(Small { n, d })
}

impl Rational {
    #[inline]
    fn from_big(b: BigRational) -> Self {
        match small_of_big(&b) {
            Some(s) => Rational(Repr::Small(s)),
            None => Rational(Repr::Big(Box::new(b))),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(s) => BigRational::new_raw(BigInt::from(s.n), BigInt::from(s.d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    /// Panics if `den == 0`.
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        reduce(num, den)
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Self::from_big(BigRational::new(num, den))
    }

    pub fn integer(n: i128) -> Self {
        reduce(n, 1)
    }

    pub fn zero() -> Self {
        Rational(Repr::Small(Small { n: 0, d: 1 }))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(Small { n: 1, d: 1 }))
    }

    /// `2^k` for any integer exponent.
    pub fn pow2(k: i64) -> Self {
        if (0..126).contains(&k) {
            Rational(Repr::Small(Small { n: 1 << k, d: 1 }))
        } else if (-126..0).contains(&k) {
            Rational(Repr::Small(Small { n: 1, d: 1 << -k }))
        } else {
            let p = BigInt::from(1u8) << k.unsigned_abs();
            let one = BigInt::from(1u8);
            Self::from_big(if k >= 0 { BigRational::new_raw(p, one) } else { BigRational::new_raw(one, p) })
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(s) => BigInt::from(s.n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(s) => BigInt::from(s.d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(s) => s.n == 0,
            Repr::Big(b) => b.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(s) => s.n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && !self.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(s) => s.d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Panics on zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            Repr::Small(s) => reduce(s.d, s.n),
            Repr::Big(b) => Self::from_big(b.recip()),
        }
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> Self {
        match &self.0 {
            Repr::Small(s) => Rational(Repr::Small(Small { n: s.n.div_euclid(s.d), d: 1 })),
            Repr::Big(b) => Self::from_big(b.floor()),
        }
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> Self {
        -&(-self).floor()
    }

    pub fn to_i128(&self) -> Option<i128> {
        match &self.0 {
            Repr::Small(s) if s.d == 1 => Some(s.n),
            Repr::Big(b) if b.is_integer() => b.numer().to_i128(),
            _ => None,
        }
    }

    /// `self * 2^k`; shifts instead of a gcd where possible.
    #[inline]
    pub fn mul_pow2(&self, k: i64) -> Self {
        if let Repr::Small(s) = &self.0 {
            if s.n == 0 {
                return self.clone();
            }
            if k.unsigned_abs() < 126 {
                let k32 = k.unsigned_abs() as u32;
                // move factors of two between numerator and denominator first
                let (from, to) = if k >= 0 { (s.d, s.n) } else { (s.n, s.d) };
                let cancel = from.trailing_zeros().min(k32);
                let from = from >> cancel;
                if let Some(to) = shl_checked(to, k32 - cancel) {
                    let (n, d) = if k >= 0 { (to, from) } else { (from, to) };
                    return Rational(Repr::Small(Small { n, d }));
                }
            }
        }
        self * &Self::pow2(k)
    }

    #[inline]
    pub fn halve(&self) -> Self {
        self.mul_pow2(-1)
    }

    pub fn double(&self) -> Self {
        self.mul_pow2(1)
    }

    /// Midpoint of `self` and `other`.
    pub fn midpoint(&self, other: &Self) -> Self {
        (self + other).halve()
    }

    /// `floor(log2(self))` for `self > 0`.
    pub fn floor_log2(&self) -> i64 {
        assert!(self.is_positive(), "log of nonpositive value");
        if let Repr::Small(s) = &self.0 {
            let k = (127 - s.n.leading_zeros() as i64) - (127 - s.d.leading_zeros() as i64);
            // n/d lies in [2^(k-1), 2^(k+1)); compare n against d * 2^k
            let scaled = if k >= 0 {
                shl_checked(s.d, k as u32).map(|d| s.n >= d)
            } else {
                shl_checked(s.n, (-k) as u32).map(|n| n >= s.d)
            };
            if let Some(hit) = scaled {
                return if hit { k } else { k - 1 };
            }
        }
        let n = self.numer();
        let d = self.denom();
        let mut k = n.bits() as i64 - d.bits() as i64;
        loop {
            let p = Self::pow2(k);
            if &p > self {
                k -= 1;
            } else if &p.double() <= self {
                k += 1;
            } else {
                return k;
            }
        }
    }
}

#[inline]
fn small_add(a: Small, b: Small, negate_b: bool) -> Rational {
    let bn = if negate_b { b.n.checked_neg() } else { Some(b.n) };
    if let Some(r) = bn.and_then(|bn| small_add_fast(a.n, a.d, bn, b.d)) {
        return r;
    }
    let (x, y) = (Rational(Repr::Small(a)).to_big(), Rational(Repr::Small(b)).to_big());
    Rational::from_big(if negate_b { x - y } else { x + y })
}

#[inline]
fn small_add_fast(an: i128, ad: i128, bn: i128, bd: i128) -> Option<Rational> {
    if is_pow2(ad) && is_pow2(bd) {
        // align by shifting, reduce by trailing zeros
        let (n, d) = if ad >= bd {
            (an.checked_add(shl_checked(bn, ad.trailing_zeros() - bd.trailing_zeros())?)?, ad)
        } else {
            (shl_checked(an, bd.trailing_zeros() - ad.trailing_zeros())?.checked_add(bn)?, bd)
        };
        if n == 0 {
            return Some(Rational::zero());
        }
        if n == i128::MIN {
            return None;
        }
        let tz = n.trailing_zeros().min(d.trailing_zeros());
        return Some(Rational(Repr::Small(Small { n: n >> tz, d: d >> tz })));
    }
    if ad == bd {
        return Some(reduce(an.checked_add(bn)?, ad));
    }
    if fits(an) && fits(ad) && fits(bn) && fits(bd) {
        return Some(reduce(wide_mul(an, bd) + wide_mul(bn, ad), wide_mul(ad, bd)));
    }
    let n = an.checked_mul(bd)?.checked_add(bn.checked_mul(ad)?)?;
    Some(reduce(n, ad.checked_mul(bd)?))
}

fn mul_fast(an: i128, ad: i128, bn: i128, bd: i128) -> Option<Rational> {
    if fits(an) && fits(ad) && fits(bn) && fits(bd) {
        return Some(reduce(an * bn, ad * bd));
    }
    // cancel across before multiplying to stay in range
    let g1 = gcd_u128(an.unsigned_abs(), bd.unsigned_abs()).max(1) as i128;
    let g2 = gcd_u128(bn.unsigned_abs(), ad.unsigned_abs()).max(1) as i128;
    Some(reduce((an / g1).checked_mul(bn / g2)?, (ad / g2).checked_mul(bd / g1)?))
}

fn small_mul(a: Small, b: Small) -> Rational {
    mul_fast(a.n, a.d, b.n, b.d).unwrap_or_else(|| {
        Rational::from_big(Rational(Repr::Small(a)).to_big() * Rational(Repr::Small(b)).to_big())
    })
}

fn small_div(a: Small, b: Small) -> Rational {
    let (bn, bd) = if b.n < 0 { (b.d.checked_neg(), b.n.checked_neg()) } else { (Some(b.d), Some(b.n)) };
    match (bn, bd) {
        (Some(bn), Some(bd)) => mul_fast(a.n, a.d, bn, bd),
        _ => None,
    }
    .unwrap_or_else(|| Rational::from_big(Rational(Repr::Small(a)).to_big() / Rational(Repr::Small(b)).to_big()))
}

#[inline(always)]
fn wide_mul(x: i128, y: i128) -> i128 {
    (x as i64 as i128) * (y as i64 as i128)
}

#[inline]
fn small_cmp(a: &Small, b: &Small) -> Ordering {
    if a.d == b.d {
        return a.n.cmp(&b.n);
    }
    if is_pow2(a.d) && is_pow2(b.d) {
        // align the smaller denominator by a shift
        let (x, y, shift, flip) = if a.d < b.d {
            (a.n, b.n, b.d.trailing_zeros() - a.d.trailing_zeros(), false)
        } else {
            (b.n, a.n, a.d.trailing_zeros() - b.d.trailing_zeros(), true)
        };
        if let Some(x) = shl_checked(x, shift) {
            let o = x.cmp(&y);
            return if flip { o.reverse() } else { o };
        }
    }
    let (sa, sb) = (a.n.signum(), b.n.signum());
    if sa != sb {
        return sa.cmp(&sb);
    }
    if fits(a.n) && fits(a.d) && fits(b.n) && fits(b.d) {
        // sign-extended 64-bit operands: a single widening multiply each
        return wide_mul(a.n, b.d).cmp(&wide_mul(b.n, a.d));
    }
    match (a.n.checked_mul(b.d), b.n.checked_mul(a.d)) {
        (Some(l), Some(r)) => l.cmp(&r),
        _ => Rational(Repr::Small(*a)).to_big().cmp(&Rational(Repr::Small(*b)).to_big()),
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    #[inline]
    fn add(self, rhs: &'a Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => small_add(*a, *b, false),
            _ => Rational::from_big(self.to_big() + rhs.to_big()),
        }
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;
    #[inline]
    fn sub(self, rhs: &'a Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => small_add(*a, *b, true),
            _ => Rational::from_big(self.to_big() - rhs.to_big()),
        }
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &'a Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => small_mul(*a, *b),
            _ => Rational::from_big(self.to_big() * rhs.to_big()),
        }
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => small_div(*a, *b),
            _ => Rational::from_big(self.to_big() / rhs.to_big()),
        }
    }
}
impl Div<Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        &self / &rhs
    }
}
impl<'a> Div<&'a Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        &self / rhs
    }
}
impl<'a> Div<Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        self / &rhs
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(s) => Rational(Repr::Small(Small { n: -s.n, d: s.d })),
            _ => Rational::from_big(-self.to_big()),
        }
    }
}
impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a == b,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            _ => false,
        }
    }
}
impl Eq for Rational {}

impl Ord for Rational {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => small_cmp(a, b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}
impl PartialOrd for Rational {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(s) => {
                0u8.hash(state);
                s.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i128> for Rational {
    fn from(n: i128) -> Self {
        Self::integer(n)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::integer(n as i128)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Self::integer(n as i128)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(s) => write!(f, "{}/{}", s.n, s.d),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `p` or `p/q` with optional sign on `p`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.into());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let valid = |x: &str, signed: bool| {
            let digits = if signed { x.strip_prefix('-').unwrap_or(x) } else { x };
            !digits.is_empty() && digits.bytes().all(|c| c.is_ascii_digit())
        };
        if !valid(n, true) || !valid(d, false) {
            return Err(err());
        }
        let n = BigInt::parse_bytes(n.as_bytes(), 10).ok_or_else(err)?;
        let d = BigInt::parse_bytes(d.as_bytes(), 10).ok_or_else(err)?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Self::from_bigints(n, d))
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational::one()
    }
}

/// `a <= x < b`
pub fn in_half_open(x: &Rational, a: &Rational, b: &Rational) -> bool {
    a <= x && x < b
}

#[macro_export]
macro_rules! q {
    ($n:expr) => {
        $crate::rational::Rational::integer($n as i128)
    };
    ($n:expr, $d:expr) => {
        $crate::rational::Rational::new($n as i128, $d as i128)
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn display_is_always_a_fraction() {
        assert_eq!(Rational::new(6, -4).to_string(), "-3/2");
        assert_eq!(Rational::integer(3).to_string(), "3/1");
        assert_eq!(Rational::zero().to_string(), "0/1");
    }

    #[test]
    fn parse_accepts_integers_and_fractions() {
        assert_eq!("7".parse::<Rational>().unwrap(), Rational::integer(7));
        assert_eq!("-2/4".parse::<Rational>().unwrap(), Rational::new(-1, 2));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1.5".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
        assert!("2/-3".parse::<Rational>().is_err());
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let huge = Rational::pow2(100);
        let sq = &huge * &huge;
        assert!(matches!(sq.0, Repr::Big(_)));
        let back = &sq / &huge;
        assert!(matches!(back.0, Repr::Small(_)));
        assert_eq!(back, huge);
        let tiny = Rational::pow2(-200);
        assert_eq!(&(&tiny * &Rational::pow2(200)), &Rational::one());
    }

    #[test]
    fn floor_log2_brackets_value() {
        for (n, d) in [(1, 1), (3, 1), (1, 3), (7, 8), (1024, 1), (1025, 3), (1, 1 << 40), ((1 << 100) - 1, 5), (7, 1 << 110)] {
            let x = Rational::new(n, d);
            let k = x.floor_log2();
            assert!(Rational::pow2(k) <= x && x < Rational::pow2(k + 1));
        }
    }

    #[test]
    fn halve_and_double_match_division() {
        let x = Rational::new(5, 12);
        assert_eq!(x.halve(), &x / &Rational::integer(2));
        assert_eq!(x.double(), &x * &Rational::integer(2));
        assert_eq!(x.mul_pow2(-3), &x / &Rational::integer(8));
    }
}
