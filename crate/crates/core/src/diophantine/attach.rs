//! Rational points, rational lines and the attached line of a point.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{box_points, reduced_basis};
use crate::quad::{floor_root_power, serde_bigint, ExponentPair};

/// `(p/q, r/q)` with `q > 0` and `gcd(p, q, r) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct RatPoint {
    // field order gives the (q, p, r) sort order used by every enumeration
    #[serde(with = "serde_bigint")]
    q: BigInt,
    #[serde(with = "serde_bigint")]
    p: BigInt,
    #[serde(with = "serde_bigint")]
    r: BigInt,
}

#[derive(Deserialize)]
struct RawPoint {
    #[serde(with = "serde_bigint")]
    p: BigInt,
    #[serde(with = "serde_bigint")]
    r: BigInt,
    #[serde(with = "serde_bigint")]
    q: BigInt,
}

impl TryFrom<RawPoint> for RatPoint {
    type Error = Error;

    fn try_from(raw: RawPoint) -> Result<Self> {
        RatPoint::new(raw.p, raw.r, raw.q)
    }
}

impl RatPoint {
    pub fn new(p: BigInt, r: BigInt, q: BigInt) -> Result<Self> {
        let invalid = |reason| Error::InvalidPoint {
            p: p.to_string(),
            r: r.to_string(),
            q: q.to_string(),
            reason,
        };
        if !q.is_positive() {
            return Err(invalid("denominator must be positive"));
        }
        if !p.gcd(&q).gcd(&r).is_one() {
            return Err(invalid("p, q, r must be coprime"));
        }
        Ok(Self { q, p, r })
    }

    pub fn from_i64(p: i64, r: i64, q: i64) -> Result<Self> {
        Self::new(p.into(), r.into(), q.into())
    }

    /// Skips validation; callers guarantee `q > 0` and coprimality.
    pub(crate) fn new_unchecked(p: BigInt, r: BigInt, q: BigInt) -> Self {
        debug_assert!(q.is_positive() && p.gcd(&q).gcd(&r).is_one());
        Self { q, p, r }
    }

    /// The reduced point with coordinates `(x, y)`.
    pub fn from_coords(x: &BigRational, y: &BigRational) -> Self {
        let q = x.denom().lcm(y.denom());
        let p = x.numer() * (&q / x.denom());
        let r = y.numer() * (&q / y.denom());
        let g = p.gcd(&r).gcd(&q);
        Self::new_unchecked(p / &g, r / &g, q / &g)
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn r(&self) -> &BigInt {
        &self.r
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn x(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }

    pub fn y(&self) -> BigRational {
        BigRational::new(self.r.clone(), self.q.clone())
    }
}

impl fmt::Display for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}/{}, {}/{})", self.p, self.q, self.r, self.q)
    }
}

/// `Ax + By + C = 0` with `gcd(A, B, C) = 1` and the first nonzero of `(A, B)` positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLine")]
pub struct RatLine {
    #[serde(with = "serde_bigint", rename = "A")]
    a: BigInt,
    #[serde(with = "serde_bigint", rename = "B")]
    b: BigInt,
    #[serde(with = "serde_bigint", rename = "C")]
    c: BigInt,
}

#[derive(Deserialize)]
struct RawLine {
    #[serde(with = "serde_bigint", rename = "A")]
    a: BigInt,
    #[serde(with = "serde_bigint", rename = "B")]
    b: BigInt,
    #[serde(with = "serde_bigint", rename = "C")]
    c: BigInt,
}

impl TryFrom<RawLine> for RatLine {
    type Error = Error;

    fn try_from(raw: RawLine) -> Result<Self> {
        RatLine::new(raw.a, raw.b, raw.c)
    }
}

impl RatLine {
    pub fn new(a: BigInt, b: BigInt, c: BigInt) -> Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::InvalidGeometry("line direction (A, B) must be nonzero".into()));
        }
        let g = a.gcd(&b).gcd(&c);
        let (mut a, mut b, mut c) = (a / &g, b / &g, c / &g);
        if a.is_negative() || (a.is_zero() && b.is_negative()) {
            a = -a;
            b = -b;
            c = -c;
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    /// `A·p + B·r + C·q`, zero exactly when the line passes through the point.
    pub fn eval_scaled(&self, point: &RatPoint) -> BigInt {
        &self.a * &point.p + &self.b * &point.r + &self.c * &point.q
    }

    pub fn passes_through(&self, point: &RatPoint) -> bool {
        self.eval_scaled(point).is_zero()
    }
}

impl fmt::Display for RatLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L({}, {}, {})", self.a, self.b, self.c)
    }
}

/// A rational point together with its attached line and height.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttachedPoint {
    pub point: RatPoint,
    pub line: RatLine,
    #[serde(with = "serde_bigint")]
    pub height: BigInt,
}

/// `max(|A|^δ q^(δt), |B|^δ q^(δs))`, the δ-th power of `q^δ · ν(A, B)`.
///
/// `(A, B)` lies in the box `|A| ≤ q^s, |B| ≤ q^t` exactly when this is at most `q^δ`.
pub fn scaled_norm_key(a: &BigInt, b: &BigInt, q: &BigInt, st: ExponentPair) -> BigInt {
    let left = a.abs().pow(st.delta()) * q.pow(st.sigma_t());
    let right = b.abs().pow(st.delta()) * q.pow(st.sigma_s());
    left.max(right)
}

pub fn in_attach_box(a: &BigInt, b: &BigInt, q: &BigInt, st: ExponentPair) -> bool {
    scaled_norm_key(a, b, q, st) <= q.pow(st.delta())
}

/// Normalized candidate with its ordering key `(ν-key, |A|, |B|, A, B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Candidate {
    key: BigInt,
    a: BigInt,
    b: BigInt,
}

impl Candidate {
    fn new(a: BigInt, b: BigInt, q: &BigInt, st: ExponentPair) -> Option<Self> {
        if a.is_zero() && b.is_zero() {
            return None;
        }
        let (a, b) = if a.is_negative() || (a.is_zero() && b.is_negative()) { (-a, -b) } else { (a, b) };
        let key = scaled_norm_key(&a, &b, q, st);
        Some(Self { key, a, b })
    }

    fn order(&self, other: &Self) -> Ordering {
        // after normalization A ≥ 0, so (|A|, |B|, A, B) reduces to (A, |B|, B)
        self.key
            .cmp(&other.key)
            .then_with(|| self.a.cmp(&other.a))
            .then_with(|| self.b.abs().cmp(&other.b.abs()))
            .then_with(|| self.b.cmp(&other.b))
    }
}

fn best(cands: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    cands.into_iter().min_by(|x, y| x.order(y))
}

/// Modular inverse of `a` modulo `m ≥ 1` (zero when `m = 1`).
fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// Direct sweep over `A = d·j` is used while the number of `j` values stays below this.
const DIRECT_SWEEP_LIMIT: u64 = 4096;

/// Steps allowed to the lattice sweep; the search box holds a handful of points.
const LATTICE_LIMIT: u64 = 1 << 22;

/// Attaches to `P` the line through it whose integer normal `(A, B)` minimizes
/// `ν(A, B) = max(|A| q^(−s), |B| q^(−t))`, ties broken by the smallest `(|A|, |B|, A, B)`
/// after sign normalization.
///
/// The normals of lines through `P` are the lattice `{(A, B) : Ap + Br ≡ 0 (mod q)}` of
/// determinant `q`; with `d = gcd(r, q)` it has basis `(d, B₀), (0, q/d)`. The box
/// `|A| ≤ q^s, |B| ≤ q^t` has area `4q`, so it contains a nonzero lattice vector, and
/// the ν-minimizer over the whole lattice lies in it. A ν-minimizer is primitive, which
/// makes `(A, B, C)` coprime.
pub fn attach_line(point: &RatPoint, st: ExponentPair) -> Result<AttachedPoint> {
    let q = point.q();
    if let Some((a, b)) = small::attach(point, st) {
        return finish(point, Candidate { key: BigInt::zero(), a: a.into(), b: b.into() });
    }
    let d = point.r().gcd(q);
    let modulus = q / &d;
    // rB ≡ −pA (mod q) with A = d·j  ⟺  B ≡ B₀·j (mod q/d)
    let b0 = (-point.p() * mod_inverse(&(point.r() / &d), &modulus)).mod_floor(&modulus);
    let a_max = floor_root_power(q, st.s());
    let b_max = floor_root_power(q, st.t());
    let j_max = &a_max / &d;

    let chosen = if j_max.to_u64().is_some_and(|j| j <= DIRECT_SWEEP_LIMIT) {
        direct_sweep(&d, &modulus, &b0, &j_max, &b_max, q, st)
    } else {
        lattice_search(&d, &modulus, &b0, &a_max, &b_max, q, st)?
    };
    let chosen = chosen.ok_or_else(|| Error::Violation(format!("no admissible line through {point}")))?;
    finish(point, chosen)
}

fn finish(point: &RatPoint, chosen: Candidate) -> Result<AttachedPoint> {
    let q = point.q();
    let c = -(&chosen.a * point.p() + &chosen.b * point.r());
    debug_assert!((&c % q).is_zero());
    let c = c / q;
    let height = q * chosen.a.abs().max(chosen.b.abs());
    let line = RatLine::new(chosen.a, chosen.b, c)?;
    Ok(AttachedPoint {
        point: point.clone(),
        line,
        height,
    })
}

/// For each `A = d·j ≥ 0` only the two `B` of the residue class nearest zero can win.
fn direct_sweep(
    d: &BigInt,
    modulus: &BigInt,
    b0: &BigInt,
    j_max: &BigInt,
    b_max: &BigInt,
    q: &BigInt,
    st: ExponentPair,
) -> Option<Candidate> {
    let mut out = Vec::new();
    let mut residue = BigInt::zero();
    let mut j = BigInt::zero();
    while &j <= j_max {
        let a = d * &j;
        // at j = 0 the class is modulus·ℤ and the zero vector drops out
        for b in [residue.clone(), &residue - modulus] {
            if &b.abs() <= b_max {
                out.extend(Candidate::new(a.clone(), b, q, st));
            }
        }
        residue = (residue + b0).mod_floor(modulus);
        j += 1;
    }
    best(out)
}

/// The direct sweep in machine integers, for `q^δ` below `2^120` so every key fits.
mod small {
    use num_traits::ToPrimitive;

    use super::RatPoint;
    use crate::quad::ExponentPair;

    fn gcd(mut a: i128, mut b: i128) -> i128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a.abs()
    }

    fn inverse(a: i128, m: i128) -> i128 {
        let (mut r0, mut r1, mut x0, mut x1) = (a.rem_euclid(m), m, 1i128, 0i128);
        while r1 != 0 {
            let k = r0 / r1;
            (r0, r1) = (r1, r0 - k * r1);
            (x0, x1) = (x1, x0 - k * x1);
        }
        x0.rem_euclid(m)
    }

    /// Largest `x ≥ 0` with `x^den ≤ q^num`.
    fn floor_root(q: i128, num: u32, den: u32) -> i128 {
        let target = q.pow(num);
        let mut x = ((q as f64).powf(num as f64 / den as f64)).floor() as i128;
        while x > 0 && x.checked_pow(den).is_none_or(|v| v > target) {
            x -= 1;
        }
        while (x + 1).checked_pow(den).is_some_and(|v| v <= target) {
            x += 1;
        }
        x
    }

    pub(super) fn attach(point: &RatPoint, st: ExponentPair) -> Option<(i128, i128)> {
        let delta = st.delta();
        if point.q().bits() * u64::from(delta) > 120 {
            return None;
        }
        let (p, r, q) = (point.p().to_i128()?, point.r().to_i128()?, point.q().to_i128()?);
        let d = gcd(r, q);
        let modulus = q / d;
        let b0 = (-p * inverse(r / d, modulus)).rem_euclid(modulus);
        let a_max = floor_root(q, st.sigma_s(), delta);
        let b_max = floor_root(q, st.sigma_t(), delta);
        let (qs, qt) = (q.pow(st.sigma_s()), q.pow(st.sigma_t()));
        let key = |a: i128, b: i128| (a.abs().pow(delta) * qt).max(b.abs().pow(delta) * qs);
        let rank = |a: i128, b: i128| (key(a, b), a, b.abs(), b);
        let mut best: Option<(i128, i128, i128, i128)> = None;
        let mut residue = 0i128;
        for j in 0..=a_max / d {
            let a = d * j;
            for b in [residue, residue - modulus] {
                if (a, b) == (0, 0) || b.abs() > b_max {
                    continue;
                }
                let (a, b) = if a == 0 && b < 0 { (a, -b) } else { (a, b) };
                let cand = rank(a, b);
                if best.is_none_or(|x| cand < x) {
                    best = Some(cand);
                }
            }
            residue = (residue + b0) % modulus;
        }
        best.map(|(_, a, _, b)| (a, b))
    }
}

/// Lattice reduction supplies a near-minimal vector; its key bounds a box that
/// provably contains the minimizer, which is then enumerated exactly.
fn lattice_search(
    d: &BigInt,
    modulus: &BigInt,
    b0: &BigInt,
    a_max: &BigInt,
    b_max: &BigInt,
    q: &BigInt,
    st: ExponentPair,
) -> Result<Option<Candidate>> {
    // coordinates (j, B) with A = d·j; weights make (A/q^s, B/q^t) roughly isotropic
    let wx = (d * b_max).pow(2);
    let wy = a_max.pow(2);
    let (u, v) = reduced_basis(b0, modulus, &wx, &wy);
    let guides = [
        (u.0.clone(), u.1.clone()),
        (v.0.clone(), v.1.clone()),
        (&u.0 + &v.0, &u.1 + &v.1),
        (&u.0 - &v.0, &u.1 - &v.1),
    ];
    let guide = best(guides.into_iter().filter_map(|(j, b)| Candidate::new(d * j, b, q, st)))
        .expect("reduced basis vectors are nonzero");

    // key(A, B) ≤ K  ⟹  |A|^δ ≤ K / q^(δt)  and  |B|^δ ≤ K / q^(δs)
    let delta = st.delta();
    let a_bound = (&guide.key / q.pow(st.sigma_t())).nth_root(delta).min(a_max.clone());
    let b_bound = (&guide.key / q.pow(st.sigma_s())).nth_root(delta).min(b_max.clone());
    let points = box_points(b0, modulus, &(a_bound / d), &b_bound, LATTICE_LIMIT)?;
    Ok(best(
        points
            .into_iter()
            .filter_map(|(j, b)| Candidate::new(d * j, b, q, st))
            .chain(std::iter::once(guide)),
    ))
}
