//! Exact closed regions in the plane: squares, Δ-boxes, strips and discs.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{cmp_power_unchecked, serde_bigint, Exponent, Quad};

/// `[x0, x0 + side] × [y0, y0 + side]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Square {
    x0: Quad,
    y0: Quad,
    side: Quad,
}

impl Square {
    pub fn new(x0: Quad, y0: Quad, side: Quad) -> Result<Self> {
        if !side.is_positive() {
            return Err(Error::InvalidGeometry(format!("square side must be positive, got {side}")));
        }
        Ok(Self { x0, y0, side })
    }

    pub fn x0(&self) -> &Quad {
        &self.x0
    }

    pub fn y0(&self) -> &Quad {
        &self.y0
    }

    pub fn side(&self) -> &Quad {
        &self.side
    }

    pub fn x1(&self) -> Quad {
        &self.x0 + &self.side
    }

    pub fn y1(&self) -> Quad {
        &self.y0 + &self.side
    }

    pub fn center(&self) -> (Quad, Quad) {
        let half = self.side.scale(&BigRational::new(1.into(), 2.into()));
        (&self.x0 + &half, &self.y0 + &half)
    }

    pub fn contains_point(&self, x: &Quad, y: &Quad) -> bool {
        x >= &self.x0 && *x <= self.x1() && y >= &self.y0 && *y <= self.y1()
    }

    pub fn contains_square(&self, other: &Square) -> bool {
        other.x0 >= self.x0 && other.y0 >= self.y0 && other.x1() <= self.x1() && other.y1() <= self.y1()
    }

    /// Translated copy with the same side.
    pub fn offset(&self, dx: &Quad, dy: &Quad) -> Square {
        Square {
            x0: &self.x0 + dx,
            y0: &self.y0 + dy,
            side: self.side.clone(),
        }
    }
}

/// Closed disc.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Disc {
    cx: Quad,
    cy: Quad,
    radius: Quad,
}

impl Disc {
    pub fn new(cx: Quad, cy: Quad, radius: Quad) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::InvalidGeometry(format!("disc radius must be positive, got {radius}")));
        }
        Ok(Self { cx, cy, radius })
    }

    pub fn cx(&self) -> &Quad {
        &self.cx
    }

    pub fn cy(&self) -> &Quad {
        &self.cy
    }

    pub fn radius(&self) -> &Quad {
        &self.radius
    }

    /// Squared distance between the centers.
    pub fn center_distance_sq(&self, other: &Disc) -> Quad {
        let dx = &self.cx - &other.cx;
        let dy = &self.cy - &other.cy;
        &dx * &dx + &dy * &dy
    }

    /// `inner ⊆ self`, decided by `|c − c'|² ≤ (ρ − ρ')²` with `ρ ≥ ρ'`.
    pub fn contains_disc(&self, inner: &Disc) -> bool {
        let slack = &self.radius - &inner.radius;
        if slack.is_negative() {
            return false;
        }
        self.center_distance_sq(inner) <= &slack * &slack
    }

    pub fn contains_point(&self, x: &Quad, y: &Quad) -> bool {
        let dx = x - &self.cx;
        let dy = y - &self.cy;
        &dx * &dx + &dy * &dy <= &self.radius * &self.radius
    }

    /// Concentric square of side `√2·ρ`.
    pub fn inscribed_square(&self) -> Square {
        let side = &Quad::sqrt2() * &self.radius;
        let half = side.scale(&BigRational::new(1.into(), 2.into()));
        Square {
            x0: &self.cx - &half,
            y0: &self.cy - &half,
            side,
        }
    }

    /// Concentric square of side `2ρ`.
    pub fn circumscribed_square(&self) -> Square {
        Square {
            x0: &self.cx - &self.radius,
            y0: &self.cy - &self.radius,
            side: self.radius.scale_int(&2.into()),
        }
    }

    /// Inscribed closed disc of a square.
    pub fn inscribed_in(square: &Square) -> Disc {
        let (cx, cy) = square.center();
        Disc {
            cx,
            cy,
            radius: square.side().scale(&BigRational::new(1.into(), 2.into())),
        }
    }
}

/// Half-width `c · q^(−exponent)` kept symbolic so membership stays exact for fractional exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfWidth {
    pub c: BigRational,
    pub q: BigInt,
    pub exponent: Exponent,
}

impl HalfWidth {
    pub fn new(c: BigRational, q: BigInt, exponent: Exponent) -> Self {
        Self { c, q, exponent }
    }

    /// `gap ≤ c·q^(−e)` for `gap ≥ 0`.
    pub fn covers(&self, gap: &Quad) -> bool {
        if !gap.is_positive() {
            return true;
        }
        // gap ≤ c q^-e  ⟺  c/gap ≥ q^e
        let ratio = Quad::from_rational(self.c.clone()) / gap;
        cmp_power_unchecked(&ratio, &self.q, self.exponent) != Ordering::Less
    }

    /// Rational upper bound within a relative `2^-64` of the true value.
    pub fn upper_bound(&self) -> BigRational {
        // q^e ≥ ⌊(q^num · 2^(64·den))^(1/den)⌋ / 2^64
        let scaled = (self.q.pow(self.exponent.num) << (64 * self.exponent.den as usize))
            .nth_root(self.exponent.den);
        let scaled = scaled.max(BigInt::from(1));
        &self.c * BigRational::new(BigInt::from(1) << 64usize, scaled)
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.c.to_f64().unwrap_or(f64::NAN) * self.q.to_f64().unwrap_or(f64::NAN).powf(-self.exponent.to_f64())
    }
}

/// Distance from a rational coordinate to `[lo, hi]`, zero when inside.
pub fn interval_gap(v: &BigRational, lo: &Quad, hi: &Quad) -> Quad {
    let v = Quad::from_rational(v.clone());
    if &v < lo {
        lo - &v
    } else if &v > hi {
        &v - hi
    } else {
        Quad::zero()
    }
}

/// Axis-aligned box centered at a rational point with symbolic half-widths.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub cx: BigRational,
    pub cy: BigRational,
    pub hx: HalfWidth,
    pub hy: HalfWidth,
}

impl Rect {
    pub fn contains_point(&self, x: &Quad, y: &Quad) -> bool {
        let dx = (x - &Quad::from_rational(self.cx.clone())).abs();
        let dy = (y - &Quad::from_rational(self.cy.clone())).abs();
        self.hx.covers(&dx) && self.hy.covers(&dy)
    }

    /// Rational box containing `self`.
    pub fn outer_box(&self) -> (BigRational, BigRational, BigRational, BigRational) {
        let ux = self.hx.upper_bound();
        let uy = self.hy.upper_bound();
        (&self.cx - &ux, &self.cy - &uy, &self.cx + &ux, &self.cy + &uy)
    }
}

/// `{ (x, y) : |Ax + By + C| ≤ (w/2)·√(A² + B²) }` with integer, primitive, sign-normalized `(A, B, C)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strip {
    #[serde(with = "serde_bigint", rename = "A")]
    a: BigInt,
    #[serde(with = "serde_bigint", rename = "B")]
    b: BigInt,
    #[serde(with = "serde_bigint", rename = "C")]
    c: BigInt,
    width: Quad,
}

impl Strip {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, width: Quad) -> Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::InvalidGeometry("strip direction (A, B) must be nonzero".into()));
        }
        if !width.is_positive() {
            return Err(Error::InvalidGeometry(format!("strip width must be positive, got {width}")));
        }
        let g = a.gcd(&b).gcd(&c);
        let (mut a, mut b, mut c) = (a / &g, b / &g, c / &g);
        let lead = if a.is_zero() { &b } else { &a };
        if lead.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        Ok(Self { a, b, c, width })
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

    pub fn width(&self) -> &Quad {
        &self.width
    }

    pub(crate) fn eval(&self, x: &Quad, y: &Quad) -> Quad {
        x.scale_int(&self.a) + y.scale_int(&self.b) + Quad::from_int(self.c.clone())
    }

    /// `(w/2)² (A² + B²)`.
    fn half_width_sq(&self) -> Quad {
        let norm = BigRational::from_integer(&self.a * &self.a + &self.b * &self.b);
        let w = &self.width * &self.width;
        w.scale(&(norm / BigRational::from_integer(4.into())))
    }

    fn within(value: &Quad, bound_sq: &Quad) -> bool {
        &(value * value) <= bound_sq
    }

    /// `(w/2)·√(A² + B²)` to double precision.
    pub(crate) fn half_width_f64(&self) -> f64 {
        let (a, b) = (self.a.to_f64().unwrap_or(f64::MAX), self.b.to_f64().unwrap_or(f64::MAX));
        self.width.to_f64() / 2.0 * a.hypot(b)
    }

    pub fn contains_point(&self, x: &Quad, y: &Quad) -> bool {
        Self::within(&self.eval(x, y), &self.half_width_sq())
    }

    /// Every corner of the rational outer box of `rect` lies in the strip.
    pub fn contains_rect_outer(&self, rect: &Rect) -> bool {
        let (x0, y0, x1, y1) = rect.outer_box();
        let h = self.half_width_sq();
        let (a, b, c) = (
            BigRational::from_integer(self.a.clone()),
            BigRational::from_integer(self.b.clone()),
            BigRational::from_integer(self.c.clone()),
        );
        [(&x0, &y0), (&x0, &y1), (&x1, &y0), (&x1, &y1)].iter().all(|(x, y)| {
            let f = Quad::from_rational(&a * *x + &b * *y + &c);
            Self::within(&f, &h)
        })
    }
}

/// Closed-set intersection with a square.
pub trait Region {
    fn intersects_square(&self, square: &Square) -> bool;
}

impl Region for Square {
    fn intersects_square(&self, o: &Square) -> bool {
        self.x0 <= o.x1() && o.x0 <= self.x1() && self.y0 <= o.y1() && o.y0 <= self.y1()
    }
}

impl Region for Rect {
    fn intersects_square(&self, sq: &Square) -> bool {
        let gx = interval_gap(&self.cx, sq.x0(), &sq.x1());
        if !self.hx.covers(&gx) {
            return false;
        }
        let gy = interval_gap(&self.cy, sq.y0(), &sq.y1());
        self.hy.covers(&gy)
    }
}

impl Region for Strip {
    fn intersects_square(&self, sq: &Square) -> bool {
        // a linear form on a box is extremal at opposite corners
        let (xlo, xhi) = if self.a.is_negative() { (sq.x1(), sq.x0().clone()) } else { (sq.x0().clone(), sq.x1()) };
        let (ylo, yhi) = if self.b.is_negative() { (sq.y1(), sq.y0().clone()) } else { (sq.y0().clone(), sq.y1()) };
        let fmin = self.eval(&xlo, &ylo);
        let fmax = self.eval(&xhi, &yhi);
        let h = self.half_width_sq();
        let low_ok = !fmin.is_positive() || Self::within(&fmin, &h);
        let high_ok = !fmax.is_negative() || Self::within(&fmax, &h);
        low_ok && high_ok
    }
}

pub fn intersects<R: Region>(a: &R, b: &Square) -> bool {
    a.intersects_square(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn int(n: i64) -> Quad {
        Quad::from_int(n)
    }

    fn unit_at(x: i64, y: i64) -> Square {
        Square::new(int(x), int(y), int(1)).unwrap()
    }

    #[test]
    fn inscribed_and_circumscribed() {
        let d = Disc::new(int(0), int(0), int(1)).unwrap();
        let ins = d.inscribed_square();
        assert_eq!(ins.side(), &Quad::sqrt2());
        let half = Quad::new(BigRational::zero(), BigRational::new(1.into(), 2.into()));
        assert_eq!(ins.x0(), &-&half);
        assert_eq!(ins.x1(), half);
        assert_eq!(d.circumscribed_square().side(), &int(2));

        let d2 = Disc::new(Quad::ratio(1, 2), Quad::ratio(1, 2), Quad::new(BigRational::zero(), BigRational::new(1.into(), 2.into()))).unwrap();
        assert_eq!(d2.inscribed_square().side(), &int(1));
        assert!(Disc::new(int(0), int(0), int(0)).is_err());
    }

    #[test]
    fn strip_and_rect_examples() {
        let strip_x0 = Strip::new(1.into(), 0.into(), 0.into(), Quad::ratio(1, 2)).unwrap();
        assert!(intersects(&strip_x0, &unit_at(0, 0)));
        assert!(!intersects(&strip_x0, &unit_at(1, 0)));

        let rect = Rect {
            cx: BigRational::zero(),
            cy: BigRational::zero(),
            hx: HalfWidth::new(BigRational::one(), 1.into(), Exponent::new(1, 1)),
            hy: HalfWidth::new(BigRational::one(), 1.into(), Exponent::new(1, 1)),
        };
        assert!(!intersects(&rect, &Square::new(int(2), int(2), int(1)).unwrap()));
        assert!(intersects(&rect, &Square::new(int(1), int(1), int(1)).unwrap()));

        let diag = Strip::new(1.into(), (-1).into(), 0.into(), Quad::sqrt2()).unwrap();
        assert!(intersects(&diag, &unit_at(0, 0)));
        assert!(intersects(&diag, &Square::new(int(2), int(2), int(1)).unwrap()));
        assert!(!intersects(&diag, &unit_at(3, 0)));
        // x − y = −1 touches the corner (0,1) of the unit square; half-width √2/2 reaches it
        assert!(intersects(&diag, &unit_at(0, 1)));
    }

    #[test]
    fn strip_normalization() {
        let s = Strip::new((-2).into(), 4.into(), 6.into(), int(1)).unwrap();
        assert_eq!((s.a().clone(), s.b().clone(), s.c().clone()), (1.into(), (-2).into(), (-3).into()));
        let s = Strip::new(0.into(), (-3).into(), 3.into(), int(1)).unwrap();
        assert_eq!((s.a().clone(), s.b().clone(), s.c().clone()), (0.into(), 1.into(), (-1).into()));
    }

    #[test]
    fn halfwidth_boundary_is_closed() {
        let c = BigRational::new(1.into(), 600.into());
        let hw = HalfWidth::new(c.clone(), 1.into(), Exponent::new(3, 2));
        assert!(hw.covers(&Quad::from_rational(c.clone())));
        assert!(!hw.covers(&Quad::from_rational(&c * BigRational::new(1001.into(), 1000.into()))));
        let ub = HalfWidth::new(c.clone(), 2.into(), Exponent::new(3, 2)).upper_bound();
        // c / 2^(3/2) = √2 c / 4
        let exact = Quad::new(BigRational::zero(), &c / BigRational::from_integer(4.into()));
        assert!(Quad::from_rational(ub.clone()) >= exact);
        assert!(Quad::from_rational(ub) < exact.scale(&BigRational::new(1_000_001.into(), 1_000_000.into())));
    }

    #[test]
    fn disc_containment() {
        let outer = Disc::new(int(0), int(0), int(2)).unwrap();
        let inner = Disc::new(int(1), int(0), int(1)).unwrap();
        assert!(outer.contains_disc(&inner));
        let off = Disc::new(Quad::ratio(11, 10), int(0), int(1)).unwrap();
        assert!(!outer.contains_disc(&off));
    }
}
