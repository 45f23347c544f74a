//! Exact scalars in ℚ(√2) and exact comparisons against rational powers of integers.
//!
//! Every length and threshold in the construction is of the form `a + b√2` with
//! rational `a` and `b`; signs are decided from `a² ≷ 2b²`, so no floating point
//! ever enters a comparison.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parses `"n"`, `"n/d"` or a finite decimal such as `"-0.125"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int_part = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(int_digits).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let mag = BigRational::new(int_part * &scale + frac_part, scale);
        return Ok(if negative { -mag } else { mag });
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|_| bad())
}

/// Canonical `"num/den"` text form used in every JSON report.
pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rational_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod serde_bigint {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
        }
        match Repr::deserialize(d)? {
            Repr::Text(t) => BigInt::from_str(t.trim()).map_err(serde::de::Error::custom),
            Repr::Int(i) => Ok(BigInt::from(i)),
        }
    }
}

/// A rational exponent `num/den` with `den ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Exponent {
    pub num: u32,
    pub den: u32,
}

impl Exponent {
    pub const fn new(num: u32, den: u32) -> Self {
        Self { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// The weight pair `(s, t)` with `s + t = 1`, stored over a common denominator `δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExponentPair {
    sigma_s: u32,
    sigma_t: u32,
    delta: u32,
}

impl ExponentPair {
    pub fn from_parts(sigma_s: u32, sigma_t: u32, delta: u32) -> Result<Self> {
        if delta == 0 {
            return Err(Error::InvalidExponents("common denominator must be positive".into()));
        }
        if sigma_s.checked_add(sigma_t) != Some(delta) {
            return Err(Error::InvalidExponents(format!(
                "s + t must equal 1 (got {sigma_s}/{delta} + {sigma_t}/{delta})"
            )));
        }
        let g = sigma_s.gcd(&sigma_t).gcd(&delta).max(1);
        Ok(Self {
            sigma_s: sigma_s / g,
            sigma_t: sigma_t / g,
            delta: delta / g,
        })
    }

    pub fn new(s: &BigRational, t: &BigRational) -> Result<Self> {
        if s.is_negative() || t.is_negative() {
            return Err(Error::InvalidExponents("s and t must be nonnegative".into()));
        }
        if !(s + t).is_one() {
            return Err(Error::InvalidExponents(format!(
                "s + t must equal 1 (got {} + {})",
                rational_to_string(s),
                rational_to_string(t)
            )));
        }
        let delta = s.denom().lcm(t.denom());
        let to_u32 = |v: BigInt| {
            v.to_u32()
                .ok_or_else(|| Error::InvalidExponents("denominator too large".into()))
        };
        let sigma_s = to_u32(s.numer() * (&delta / s.denom()))?;
        let sigma_t = to_u32(t.numer() * (&delta / t.denom()))?;
        Self::from_parts(sigma_s, sigma_t, to_u32(delta)?)
    }

    pub fn parse(s: &str, t: &str) -> Result<Self> {
        Self::new(&parse_rational(s)?, &parse_rational(t)?)
    }

    pub fn sigma_s(&self) -> u32 {
        self.sigma_s
    }

    pub fn sigma_t(&self) -> u32 {
        self.sigma_t
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn s(&self) -> Exponent {
        Exponent::new(self.sigma_s, self.delta)
    }

    pub fn t(&self) -> Exponent {
        Exponent::new(self.sigma_t, self.delta)
    }

    pub fn one_plus_s(&self) -> Exponent {
        Exponent::new(self.delta + self.sigma_s, self.delta)
    }

    pub fn one_plus_t(&self) -> Exponent {
        Exponent::new(self.delta + self.sigma_t, self.delta)
    }

    /// True when `s > t`; band thresholds then use `s` in the role of the larger exponent.
    pub fn is_swapped(&self) -> bool {
        self.sigma_s > self.sigma_t
    }

    /// `min(s, t)` and `max(s, t)`.
    pub fn ordered(&self) -> (Exponent, Exponent) {
        if self.is_swapped() {
            (self.t(), self.s())
        } else {
            (self.s(), self.t())
        }
    }

    pub fn max_exponent(&self) -> Exponent {
        self.ordered().1
    }

    pub fn s_rational(&self) -> BigRational {
        self.s().to_rational()
    }

    pub fn t_rational(&self) -> BigRational {
        self.t().to_rational()
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.s(), self.t())
    }
}

impl Serialize for ExponentPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExponentPair", 2)?;
        st.serialize_field("s", &rational_to_string(&self.s_rational()))?;
        st.serialize_field("t", &rational_to_string(&self.t_rational()))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ExponentPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            s: String,
            t: String,
        }
        let raw = Raw::deserialize(d)?;
        ExponentPair::parse(&raw.s, &raw.t).map_err(serde::de::Error::custom)
    }
}

/// `a + b·√2` with rational `a`, `b`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Quad {
    a: BigRational,
    b: BigRational,
}

impl Quad {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Self { a, b }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn sqrt2() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int<T: Into<BigInt>>(n: T) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_rational(a: BigRational) -> Self {
        Self::new(a, BigRational::zero())
    }

    /// `num/den`; panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    /// Exact sign, as an ordering against zero.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            // opposite signs: |a| vs |b|√2, i.e. a² vs 2b² (never equal since √2 ∉ ℚ)
            (Ordering::Greater, Ordering::Less) => (&self.a * &self.a).cmp(&(&self.b * &self.b * two())),
            (Ordering::Less, Ordering::Greater) => (&self.b * &self.b * two()).cmp(&(&self.a * &self.a)),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Quad {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn conj(&self) -> Quad {
        Quad::new(self.a.clone(), -&self.b)
    }

    /// Field norm `a² − 2b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * two()
    }

    pub fn checked_recip(&self) -> Option<Quad> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Quad::new(&self.a / &n, -&self.b / &n))
    }

    pub fn recip(&self) -> Quad {
        self.checked_recip().expect("reciprocal of zero in Q(sqrt 2)")
    }

    pub fn pow(&self, mut exp: u32) -> Quad {
        let mut base = self.clone();
        let mut acc = Quad::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn scale(&self, k: &BigRational) -> Quad {
        Quad::new(&self.a * k, &self.b * k)
    }

    pub fn scale_int(&self, k: &BigInt) -> Quad {
        Quad::new(&self.a * k, &self.b * k)
    }

    /// Greatest integer `≤ self`, exactly.
    pub fn floor(&self) -> BigInt {
        // self = (p + q√2) / d with d > 0
        let d = self.a.denom() * self.b.denom();
        let p = self.a.numer() * self.b.denom();
        let q = self.b.numer() * self.a.denom();
        match q.sign() {
            Sign::NoSign => p.div_floor(&d),
            Sign::Plus => {
                // q√2 ∈ (s, s+1), s = ⌊√(2q²)⌋; no multiple of d lies strictly inside (p+s, p+s+1)
                let s = (&q * &q * 2u32).sqrt();
                (p + s).div_floor(&d)
            }
            Sign::Minus => {
                let s = (&q * &q * 2u32).sqrt();
                (p - s - 1u32).div_floor(&d)
            }
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// Nearest integer, ties towards +∞.
    pub fn round(&self) -> BigInt {
        (self + &Quad::ratio(1, 2)).floor()
    }

    pub fn min(self, other: Quad) -> Quad {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Quad) -> Quad {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Floating approximation, for diagnostics and search guidance only.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * std::f64::consts::SQRT_2
    }

    /// `|a| + |b|√2`, the scale against which [`Quad::to_f64`] is accurate.
    pub fn magnitude_f64(&self) -> f64 {
        self.a.abs().to_f64().unwrap_or(f64::INFINITY) + self.b.abs().to_f64().unwrap_or(f64::INFINITY) * std::f64::consts::SQRT_2
    }

    /// Natural logarithm of a positive value, approximate; robust to magnitudes outside f64.
    pub fn ln_approx(&self) -> f64 {
        debug_assert!(self.is_positive());
        let direct = self.to_f64();
        if direct.is_finite() && direct > 1e-300 && direct < 1e300 {
            return direct.ln();
        }
        // rescale by a power of two chosen from the bit lengths
        let bits = |r: &BigRational| r.numer().bits() as i64 - r.denom().bits() as i64;
        let shift = if self.b.is_zero() { bits(&self.a) } else { bits(&self.b).max(bits(&self.a)) };
        let scale = if shift >= 0 {
            BigRational::new(BigInt::one(), BigInt::one() << shift as usize)
        } else {
            BigRational::from_integer(BigInt::one() << (-shift) as usize)
        };
        self.scale(&scale).to_f64().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn two() -> BigRational {
    BigRational::from_integer(BigInt::from(2))
}

/// Compares `x` against `base^(exponent)` exactly by raising both sides to the `den`-th power.
pub fn cmp_power(x: &Quad, base: &BigInt, exponent: Exponent) -> Result<Ordering> {
    if x.is_negative() {
        return Err(Error::Negative(format!("cmp_power argument {x}")));
    }
    if base.is_negative() || base.is_zero() {
        return Err(Error::Precondition(format!("cmp_power base must be >= 1, got {base}")));
    }
    if exponent.den == 0 {
        return Err(Error::Precondition("exponent denominator must be positive".into()));
    }
    Ok(cmp_power_unchecked(x, base, exponent))
}

pub(crate) fn cmp_power_unchecked(x: &Quad, base: &BigInt, exponent: Exponent) -> Ordering {
    let rhs = base.pow(exponent.num);
    if let Some(r) = x.as_rational() {
        let lhs_num = r.numer().pow(exponent.den);
        let lhs_den = r.denom().pow(exponent.den);
        return lhs_num.cmp(&(rhs * lhs_den));
    }
    let lhs = x.pow(exponent.den);
    (&lhs - &Quad::from_int(rhs)).signum()
}

/// Greatest integer `≤ x`; see [`Quad::floor`].
pub fn floor_quad(x: &Quad) -> BigInt {
    x.floor()
}

/// `⌊base^(num/den)⌋` for `base ≥ 0`.
pub fn floor_root_power(base: &BigInt, exponent: Exponent) -> BigInt {
    base.pow(exponent.num).nth_root(exponent.den)
}

impl PartialOrd for Quad {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quad {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.b == other.b {
            return self.a.cmp(&other.a);
        }
        (self - other).signum()
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quad({} + {}·√2)", self.a, self.b)
    }
}

/// Parses `"a"`, `"b√2"`, `"a + b√2"` (also `sqrt2` or `*sqrt2`) with rational `a`, `b`.
pub fn parse_quad(text: &str) -> Result<Quad> {
    let bad = || Error::Parse(format!("not an element of Q(√2): {text:?}"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let compact = compact.replace("*sqrt2", "√").replace("sqrt2", "√").replace("*√2", "√").replace("√2", "√");
    if compact.is_empty() {
        return Err(bad());
    }
    // split into signed terms, keeping signs that follow an operator
    let mut terms = Vec::new();
    let mut start = 0;
    let mut prev = ' ';
    for (i, ch) in compact.char_indices() {
        let after_operator = matches!(prev, '+' | '-' | '/');
        prev = ch;
        if i > start && (ch == '+' || ch == '-') && !after_operator {
            terms.push(&compact[start..i]);
            start = i;
        }
    }
    terms.push(&compact[start..]);
    let (mut a, mut b) = (BigRational::zero(), BigRational::zero());
    for term in terms {
        let term = term.strip_prefix('+').unwrap_or(term);
        if let Some(coeff) = term.strip_suffix('√') {
            b += match coeff {
                "" => BigRational::one(),
                "-" => -BigRational::one(),
                c => parse_rational(c).map_err(|_| bad())?,
            };
        } else {
            a += parse_rational(term).map_err(|_| bad())?;
        }
    }
    Ok(Quad::new(a, b))
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}√2", self.b),
            (false, false) => write!(f, "{} + {}√2", self.a, self.b),
        }
    }
}

impl From<BigRational> for Quad {
    fn from(a: BigRational) -> Self {
        Quad::from_rational(a)
    }
}

impl From<BigInt> for Quad {
    fn from(n: BigInt) -> Self {
        Quad::from_int(n)
    }
}

impl From<i64> for Quad {
    fn from(n: i64) -> Self {
        Quad::from_int(n)
    }
}

impl Serialize for Quad {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Quad", 2)?;
        st.serialize_field("a", &rational_to_string(&self.a))?;
        st.serialize_field("b", &rational_to_string(&self.b))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Quad {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Parts { a: String, b: String },
            Rational(String),
        }
        match Repr::deserialize(d)? {
            Repr::Parts { a, b } => Ok(Quad::new(
                parse_rational(&a).map_err(serde::de::Error::custom)?,
                parse_rational(&b).map_err(serde::de::Error::custom)?,
            )),
            Repr::Rational(a) => parse_rational(&a)
                .map(Quad::from_rational)
                .map_err(serde::de::Error::custom),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<'a> $trait<&'a Quad> for &'a Quad {
            type Output = Quad;
            fn $method(self, rhs: &'a Quad) -> Quad {
                let f: fn(&Quad, &Quad) -> Quad = $body;
                f(self, rhs)
            }
        }
        impl $trait<Quad> for Quad {
            type Output = Quad;
            fn $method(self, rhs: Quad) -> Quad {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Quad> for Quad {
            type Output = Quad;
            fn $method(self, rhs: &'a Quad) -> Quad {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Quad> for &'a Quad {
            type Output = Quad;
            fn $method(self, rhs: Quad) -> Quad {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |x, y| Quad::new(&x.a + &y.a, &x.b + &y.b));
forward_binop!(Sub, sub, |x, y| Quad::new(&x.a - &y.a, &x.b - &y.b));
forward_binop!(Mul, mul, |x, y| {
    if x.b.is_zero() {
        return Quad::new(&x.a * &y.a, &x.a * &y.b);
    }
    if y.b.is_zero() {
        return Quad::new(&x.a * &y.a, &x.b * &y.a);
    }
    Quad::new(
        &x.a * &y.a + &x.b * &y.b * two(),
        &x.a * &y.b + &x.b * &y.a,
    )
});
forward_binop!(Div, div, |x, y| x * &y.recip());

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad::new(-self.a, -self.b)
    }
}

impl Neg for &Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad::new(-&self.a, -&self.b)
    }
}

impl AddAssign<&Quad> for Quad {
    fn add_assign(&mut self, rhs: &Quad) {
        self.a += &rhs.a;
        self.b += &rhs.b;
    }
}

impl SubAssign<&Quad> for Quad {
    fn sub_assign(&mut self, rhs: &Quad) {
        self.a -= &rhs.a;
        self.b -= &rhs.b;
    }
}
