//! Exact rational numbers.
//!
//! Values whose reduced numerator and denominator fit in an `i128` are kept
//! inline and handled with checked machine arithmetic; anything larger spills
//! into a [`BigRational`]. The representation is canonical (a value is inline
//! if and only if it fits), so structural equality is value equality.

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};
use core::iter::Sum;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone)]
enum Repr {
    /// Reduced, `den > 0`, `num != i128::MIN`.
    Small(i128, i128),
    /// Reduced; never representable as `Small`.
    Big(BigRational),
}

/// An exact rational number in lowest terms with a positive denominator.
#[derive(Clone)]
pub struct Rational(Repr);

/// Error returned when a string is not of the form `p/q` or `p`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational `{input}`: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            core::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if (a | b) >> 64 == 0 {
        return gcd_u64(a as u64, b as u64) as u128;
    }
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            core::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
        if (a | b) >> 64 == 0 {
            return (gcd_u64(a as u64, b as u64) as u128) << shift;
        }
    }
}

#[inline]
fn gcd_i128(a: i128, b: i128) -> i128 {
    gcd_u128(a.unsigned_abs(), b.unsigned_abs()) as i128
}

#[inline]
fn fits(v: i128) -> bool {
    v != i128::MIN
}

impl Rational {
    fn small_unchecked(num: i128, den: i128) -> Self {
        debug_assert!(den > 0 && fits(num));
        Rational(Repr::Small(num, den))
    }

    fn from_big(r: BigRational) -> Self {
        if let (Some(n), Some(d)) = (r.numer().to_i128(), r.denom().to_i128()) {
            if fits(n) {
                return Rational::small_unchecked(n, d);
            }
        }
        Rational(Repr::Big(r))
    }

    /// Reduces `num / den`, falling back to big integers on overflow.
    fn from_i128_pair(num: i128, den: i128) -> Self {
        assert!(den != 0, "rational with zero denominator");
        let g = gcd_i128(num, den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            match (n.checked_neg(), d.checked_neg()) {
                (Some(nn), Some(dd)) => {
                    n = nn;
                    d = dd;
                }
                _ => {
                    return Rational::from_big(BigRational::new(BigInt::from(num), BigInt::from(den)))
                }
            }
        }
        if fits(n) {
            Rational::small_unchecked(n, d)
        } else {
            Rational::from_big(BigRational::new(BigInt::from(n), BigInt::from(d)))
        }
    }

    /// Builds `num / den` in lowest terms.
    ///
    /// Panics if `den` is zero.
    pub fn new(num: i64, den: i64) -> Self {
        Rational::from_i128_pair(num as i128, den as i128)
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "rational with zero denominator");
        Rational::from_big(BigRational::new(num, den))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational::small_unchecked(n as i128, 1)
    }

    pub fn zero() -> Self {
        Rational::small_unchecked(0, 1)
    }

    pub fn one() -> Self {
        Rational::small_unchecked(1, 1)
    }

    /// `2^-bits` as an exact value.
    pub fn dyadic_unit(bits: u32) -> Self {
        if bits < 126 {
            Rational::small_unchecked(1, 1i128 << bits)
        } else {
            Rational::from_big(BigRational::new(BigInt::one(), BigInt::one() << bits as usize))
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    /// Number of bits in the denominator.
    pub fn denom_bits(&self) -> u64 {
        match &self.0 {
            Repr::Small(_, d) => 128 - d.leading_zeros() as u64,
            Repr::Big(r) => r.denom().bits(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(r) => r.is_positive(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn signum(&self) -> Ordering {
        if self.is_negative() {
            Ordering::Less
        } else if self.is_zero() {
            Ordering::Equal
        } else {
            Ordering::Greater
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Rational::from_i128_pair(*d, *n),
            Repr::Big(r) => Rational::from_big(r.recip()),
        }
    }

    /// Largest integer not above `self`.
    pub fn floor(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Rational::small_unchecked(n.div_euclid(*d), 1),
            Repr::Big(r) => Rational::from_big(BigRational::from_integer(r.numer().div_floor(r.denom()))),
        }
    }

    /// Nearest multiple of `2^-bits`, ties rounded up.
    pub fn round_to_dyadic(&self, bits: u32) -> Self {
        let unit = Rational::dyadic_unit(bits);
        let scaled = self / &unit + Rational::new(1, 2);
        scaled.floor() * unit
    }

    pub fn midpoint(&self, other: &Self) -> Self {
        (self + other) * Rational::new(1, 2)
    }

    pub fn min<'a>(&'a self, other: &'a Self) -> &'a Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max<'a>(&'a self, other: &'a Self) -> &'a Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Nearest `f64`; only for reporting.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => {
                if n.unsigned_abs() < (1u128 << 53) && *d < (1i128 << 53) {
                    *n as f64 / *d as f64
                } else {
                    self.to_big().to_f64().unwrap_or(f64::NAN)
                }
            }
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Rational::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }
}

fn add_small(a: i128, b: i128, c: i128, d: i128) -> Option<Rational> {
    if b == d {
        let n = a.checked_add(c)?;
        return Some(Rational::from_i128_pair(n, b));
    }
    let g = gcd_i128(b, d);
    if g == 1 {
        let n = a.checked_mul(d)?.checked_add(c.checked_mul(b)?)?;
        let den = b.checked_mul(d)?;
        if !fits(n) {
            return None;
        }
        return Some(Rational::small_unchecked(n, den));
    }
    let t = a.checked_mul(d / g)?.checked_add(c.checked_mul(b / g)?)?;
    let g2 = gcd_i128(t, g);
    let n = t / g2;
    let den = (b / g).checked_mul(d / g2)?;
    if !fits(n) {
        return None;
    }
    Some(Rational::small_unchecked(n, den))
}

fn mul_small(a: i128, b: i128, c: i128, d: i128) -> Option<Rational> {
    if a == 0 || c == 0 {
        return Some(Rational::zero());
    }
    let g1 = gcd_i128(a, d);
    let g2 = gcd_i128(c, b);
    let n = (a / g1).checked_mul(c / g2)?;
    let den = (b / g2).checked_mul(d / g1)?;
    if !fits(n) {
        return None;
    }
    Some(Rational::small_unchecked(n, den))
}

impl Add<&Rational> for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            if let Some(r) = add_small(*a, *b, *c, *d) {
                return r;
            }
        }
        Rational::from_big(self.to_big() + rhs.to_big())
    }
}

impl Sub<&Rational> for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            if let Some(r) = add_small(*a, *b, -*c, *d) {
                return r;
            }
        }
        Rational::from_big(self.to_big() - rhs.to_big())
    }
}

impl Mul<&Rational> for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            if let Some(r) = mul_small(*a, *b, *c, *d) {
                return r;
            }
        }
        Rational::from_big(self.to_big() * rhs.to_big())
    }
}

impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        self * &rhs.recip()
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            // `num != i128::MIN`, so negation cannot overflow.
            Repr::Small(n, d) => Rational::small_unchecked(-*n, *d),
            Repr::Big(r) => Rational::from_big(-r.clone()),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Rational> for Rational {
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
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = &*self + rhs;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = &*self * rhs;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(r) => {
                1u8.hash(state);
                r.hash(state);
            }
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            if b == d {
                return a.cmp(c);
            }
            let sa = a.signum();
            let sc = c.signum();
            if sa != sc {
                return sa.cmp(&sc);
            }
            if let (Some(l), Some(r)) = (a.checked_mul(*d), c.checked_mul(*b)) {
                return l.cmp(&r);
            }
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational::from_big(r)
    }
}

impl From<&Rational> for BigRational {
    fn from(r: &Rational) -> Self {
        r.to_big()
    }
}

/// Always `p/q`, including `q = 1`.
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(s: &str, input: &str) -> Result<BigInt, ParseRationalError> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError {
            input: input.into(),
            reason: "expected decimal integers of the form p/q",
        });
    }
    BigInt::from_str(s).map_err(|_| ParseRationalError {
        input: input.into(),
        reason: "integer out of range",
    })
}

/// Accepts `p/q` (and a bare integer `p`); decimals are rejected.
impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (t, None),
        };
        let num = parse_int(n, s)?;
        let den = match d {
            Some(d) => {
                if d.starts_with(['-', '+']) {
                    return Err(ParseRationalError {
                        input: s.into(),
                        reason: "denominator must be an unsigned integer",
                    });
                }
                parse_int(d, s)?
            }
            None => BigInt::one(),
        };
        if den.is_zero() {
            return Err(ParseRationalError {
                input: s.into(),
                reason: "zero denominator",
            });
        }
        Ok(Rational::from_bigints(num, den))
    }
}
