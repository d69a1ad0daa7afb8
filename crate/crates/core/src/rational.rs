//! Exact rational numbers with a machine-word fast path.
//!
//! Values that fit in a reduced `i64` numerator/denominator pair stay on the
//! fast path; anything larger transparently promotes to a boxed
//! `BigRational`. Results are always normalized, so structural equality and
//! hashing agree with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone)]
pub enum Rational {
    Small { num: i64, den: i64 },
    Big(Box<BigRational>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational::Small { num: 0, den: 1 };
    pub const ONE: Rational = Rational::Small { num: 1, den: 1 };

    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    pub fn integer(n: i64) -> Rational {
        Rational::Small { num: n, den: 1 }
    }

    pub fn from_i128(mut num: i128, mut den: i128) -> Rational {
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = gcd_i128(num, den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        match (i64::try_from(num), i64::try_from(den)) {
            (Ok(n), Ok(d)) => Rational::Small { num: n, den: d },
            _ => Rational::Big(Box::new(BigRational::new(BigInt::from(num), BigInt::from(den)))),
        }
    }

    fn from_big(r: BigRational) -> Rational {
        // BigRational::new already reduces; demote when it fits.
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rational::Small { num: n, den: d },
            _ => Rational::Big(Box::new(r)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rational::Small { num, den } => BigRational::new_raw(BigInt::from(*num), BigInt::from(*den)),
            Rational::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rational::Small { num: 0, .. })
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rational::Small { num, .. } => *num < 0,
            Rational::Big(b) => b.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rational::Small { den, .. } => *den == 1,
            Rational::Big(b) => b.is_integer(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Rational::Small { num, .. } => BigInt::from(*num),
            Rational::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Rational::Small { den, .. } => BigInt::from(*den),
            Rational::Big(b) => b.denom().clone(),
        }
    }

    pub fn floor(&self) -> Rational {
        match self {
            Rational::Small { num, den } => Rational::integer(num.div_floor(den)),
            Rational::Big(b) => Rational::from_big(b.floor()),
        }
    }

    /// Representative in `[0, 1)` of the class modulo 1.
    pub fn fract_mod1(&self) -> Rational {
        match self {
            Rational::Small { num, den } => Rational::Small { num: num.mod_floor(den), den: *den },
            Rational::Big(_) => self - &self.floor(),
        }
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rational::Small { num, den } => {
                // Exact when both parts fit in the mantissa; otherwise fall back
                // to correctly-rounded big conversion.
                if num.unsigned_abs() < (1 << 53) && *den < (1 << 53) {
                    *num as f64 / *den as f64
                } else {
                    self.to_big().to_f64().unwrap_or(f64::NAN)
                }
            }
            Rational::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64_exact(x: f64) -> Option<Rational> {
        BigRational::from_float(x).map(Rational::from_big)
    }

    /// The rational with the smallest denominator that rounds to `x` as an
    /// `f64`. Recovers `1/10` from `0.1`, `1/3` from `1.0/3.0`, and so on.
    pub fn simplest_from_f64(x: f64) -> Option<Rational> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Rational::ZERO);
        }
        let exact = Rational::from_f64_exact(x)?;
        let up = f64::from_bits(if x > 0.0 { x.to_bits() + 1 } else { x.to_bits() - 1 });
        let down = f64::from_bits(if x > 0.0 { x.to_bits() - 1 } else { x.to_bits() + 1 });
        let half = Rational::new(1, 2);
        let hi_neighbor = Rational::from_f64_exact(up.max(down))?;
        let lo_neighbor = Rational::from_f64_exact(up.min(down))?;
        // Open rounding interval (midpoints to the neighbours).
        let lo = &exact + &(&(&lo_neighbor - &exact) * &half);
        let hi = &exact + &(&(&hi_neighbor - &exact) * &half);
        Some(simplest_between(&lo, &hi))
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }
}

/// Simplest rational strictly inside `(lo, hi)` by continued-fraction
/// descent. Requires `lo < hi`.
fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    if lo.is_negative() {
        if hi > &Rational::ZERO {
            return Rational::ZERO;
        }
        return -simplest_between(&-hi, &-lo);
    }
    let fl = lo.floor();
    let next = &fl + &Rational::ONE;
    if &next < hi {
        return next;
    }
    let frac_lo = lo - &fl;
    let frac_hi = hi - &fl;
    let inv_lo = &Rational::ONE / &frac_hi;
    let inner = if frac_lo.is_zero() {
        &inv_lo.floor() + &Rational::ONE
    } else {
        simplest_between(&inv_lo, &(&Rational::ONE / &frac_lo))
    };
    &fl + &(&Rational::ONE / &inner)
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational::from_big(r)
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Normalized forms are unique, so hash the numeric content.
        match self {
            Rational::Small { num, den } => {
                num.hash(state);
                den.hash(state);
            }
            Rational::Big(b) => {
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rational::Small { num: a, den: b }, Rational::Small { num: c, den: d }) => {
                ((*a as i128) * (*d as i128)).cmp(&((*c as i128) * (*b as i128)))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        if let (Rational::Small { num: a, den: b }, Rational::Small { num: c, den: d }) = (self, rhs) {
            if b == d {
                return Rational::from_i128(*a as i128 + *c as i128, *b as i128);
            }
            let n = (*a as i128) * (*d as i128) + (*c as i128) * (*b as i128);
            return Rational::from_i128(n, (*b as i128) * (*d as i128));
        }
        Rational::from_big(self.to_big() + rhs.to_big())
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        if let (Rational::Small { num: a, den: b }, Rational::Small { num: c, den: d }) = (self, rhs) {
            if b == d {
                return Rational::from_i128(*a as i128 - *c as i128, *b as i128);
            }
            let n = (*a as i128) * (*d as i128) - (*c as i128) * (*b as i128);
            return Rational::from_i128(n, (*b as i128) * (*d as i128));
        }
        Rational::from_big(self.to_big() - rhs.to_big())
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        if let (Rational::Small { num: a, den: b }, Rational::Small { num: c, den: d }) = (self, rhs) {
            return Rational::from_i128((*a as i128) * (*c as i128), (*b as i128) * (*d as i128));
        }
        Rational::from_big(self.to_big() * rhs.to_big())
    }
}

impl Div for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        if let (Rational::Small { num: a, den: b }, Rational::Small { num: c, den: d }) = (self, rhs) {
            return Rational::from_i128((*a as i128) * (*d as i128), (*b as i128) * (*c as i128));
        }
        Rational::from_big(self.to_big() / rhs.to_big())
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match self {
            Rational::Small { num, den } => Rational::from_i128(-(*num as i128), *den as i128),
            Rational::Big(b) => Rational::from_big(-(**b).clone()),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| &acc + &x)
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| &acc + x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rational::Small { num, den: 1 } => write!(f, "{num}"),
            Rational::Small { num, den } => write!(f, "{num}/{den}"),
            Rational::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Rational::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
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

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num: BigInt = n.parse().map_err(|_| err())?;
        let den: BigInt = d.parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        Ok(Rational::from_big(BigRational::new(num, den)))
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Continued-fraction convergents `p/q` of `x`, in order, stopping at the first
/// convergent whose denominator reaches `min_den`.
pub fn convergent_with_min_denominator(terms: impl Iterator<Item = u64>, min_den: u64) -> Rational {
    // h_{-1}=1, h_{-2}=0; k_{-1}=0, k_{-2}=1
    let (mut h1, mut h2) = (BigInt::one(), BigInt::zero());
    let (mut k1, mut k2) = (BigInt::zero(), BigInt::one());
    let target = BigInt::from(min_den);
    for a in terms {
        let a = BigInt::from(a);
        let h = &a * &h1 + &h2;
        let k = &a * &k1 + &k2;
        h2 = std::mem::replace(&mut h1, h);
        k2 = std::mem::replace(&mut k1, k);
        if k1 >= target {
            break;
        }
    }
    Rational::from_big(BigRational::new(h1, k1))
}

/// Partial quotients of the exact binary value of `x`.
pub fn continued_fraction_terms(x: &Rational) -> Vec<u64> {
    let mut out = Vec::new();
    let mut cur = x.to_big();
    loop {
        let fl = cur.floor();
        out.push(fl.to_integer().to_u64().unwrap_or(0));
        let frac = &cur - &fl;
        if frac.is_zero() || out.len() > 200 {
            break;
        }
        cur = frac.recip();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn arithmetic_normalizes() {
        assert_eq!(q("1/3") + q("1/6"), q("1/2"));
        assert_eq!(q("2/4"), q("1/2"));
        assert_eq!(q("-3/-6").to_string(), "1/2");
        assert_eq!((q("1/2") * q("2")).to_string(), "1");
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rational::new(i64::MAX, 1);
        let sum = &big + &big;
        assert!(matches!(sum, Rational::Big(_)));
        let back = &sum - &big;
        assert!(matches!(back, Rational::Small { .. }));
        assert_eq!(back, big);
        // repeated halving far past 2^63
        let mut x = Rational::ONE;
        let half = q("1/2");
        for _ in 0..200 {
            x = &x * &half;
        }
        assert!(matches!(x, Rational::Big(_)));
        assert!(x > Rational::ZERO);
        assert_eq!(x.to_f64(), 2f64.powi(-200));
    }

    #[test]
    fn floor_and_mod1() {
        assert_eq!(q("-1/3").floor(), q("-1"));
        assert_eq!(q("-1/3").fract_mod1(), q("2/3"));
        assert_eq!(q("7/3").fract_mod1(), q("1/3"));
    }

    #[test]
    fn simplest_from_f64_recovers_decimals() {
        assert_eq!(Rational::simplest_from_f64(0.1).unwrap(), q("1/10"));
        assert_eq!(Rational::simplest_from_f64(0.25).unwrap(), q("1/4"));
        assert_eq!(Rational::simplest_from_f64(1.0 / 3.0).unwrap(), q("1/3"));
        assert_eq!(Rational::simplest_from_f64(0.2).unwrap(), q("1/5"));
        assert_eq!(Rational::simplest_from_f64(0.0).unwrap(), Rational::ZERO);
        assert_eq!(Rational::simplest_from_f64(3.0).unwrap(), q("3"));
        assert_eq!(Rational::simplest_from_f64(0.15).unwrap(), q("3/20"));
    }

    #[test]
    fn golden_convergent() {
        let r = convergent_with_min_denominator(std::iter::once(0).chain(std::iter::repeat(1)), 1_000_000);
        assert_eq!(r, q("832040/1346269"));
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["0", "1", "-5/7", "123456789012345678901234567891/2"] {
            assert_eq!(q(s).to_string(), s);
        }
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }
}
