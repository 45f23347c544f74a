//! Enumeration of rational points whose removal box meets a square.
//!
//! For a square `S` and a denominator range `[q_lo, q_hi]` we want every coprime
//! `(p, q, r)` with `Δ(P) ∩ S ≠ ∅`. Short ranges are scanned directly. Long ranges use
//! the lattice `{(q, y) : y ≡ a·q (mod 2^K)}`, `a = ⌊x_c 2^K⌋` for the center `x_c`
//! of `S`: a denominator can only qualify if `q·x_c` is within `q·w/2 + c` of an
//! integer (`w` the side), which puts `(q, a·q − 2^K p)` in a thin box. Every
//! surviving `q` is then checked exactly in both coordinates.
//!
//! Badness from avoided boxes: if `(x, y)` avoids `Δ(P)` for every reduced `P` with
//! denominator at most `Q`, then `max(q^s‖qx‖, q^t‖qy‖) > c` for all `1 ≤ q ≤ Q`.
//! Indeed, let `q ≤ Q` and integers `p, r` with `q^s|qx − p| ≤ c` and `q^t|qy − r| ≤ c`.
//! Write `(p, q, r) = g·(p', q', r')` with `gcd(p', q', r') = 1`. Then
//! `|x − p'/q'| ≤ c q^(−1−s) ≤ c q'^(−1−s)` because `q' ≤ q`, and likewise in `y`, so
//! `(x, y) ∈ Δ(p'/q', r'/q')` with `q' ≤ Q`, a contradiction.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::attach::{attach_line, AttachedPoint, RatPoint};
use super::bands::BandIndex;
use super::params::ConstructionParams;
use crate::error::{Error, Result};
use crate::geometry::{HalfWidth, Rect, Square};
use crate::quad::{serde_bigint, serde_rational, ExponentPair, Quad};

/// Denominator ranges up to this length are always scanned directly.
const DIRECT_RANGE: u64 = 4096;

/// Removal box `Δ(P)`: half-widths `c q^(−(1+s))` and `c q^(−(1+t))` around `P`.
pub fn delta_box(point: &RatPoint, st: ExponentPair, c: &BigRational) -> Rect {
    Rect {
        cx: point.x(),
        cy: point.y(),
        hx: HalfWidth::new(c.clone(), point.q().clone(), st.one_plus_s()),
        hy: HalfWidth::new(c.clone(), point.q().clone(), st.one_plus_t()),
    }
}

/// Integer range `[⌈lo⌉, ⌊hi⌋]` of numerators for one coordinate, padded by `c` on both sides.
fn numerator_range(q: &BigInt, lo: &Quad, hi: &Quad, c: &BigRational) -> (BigInt, BigInt) {
    let qq = Quad::from_int(q.clone());
    let pad = Quad::from_rational(c.clone());
    ((&(&qq * lo) - &pad).ceil(), (&(&qq * hi) + &pad).floor())
}

struct Scan<'a> {
    region: &'a Square,
    st: ExponentPair,
    c: &'a BigRational,
    budget: u64,
    steps: u64,
}

impl Scan<'_> {
    fn charge(&mut self, n: u64) -> Result<()> {
        self.steps = self.steps.saturating_add(n);
        if self.steps > self.budget {
            return Err(Error::BudgetExceeded {
                needed: self.steps,
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// Every qualifying point with denominator exactly `q`.
    fn points_for(&mut self, q: &BigInt, out: &mut Vec<RatPoint>) -> Result<()> {
        let (plo, phi) = numerator_range(q, self.region.x0(), &self.region.x1(), self.c);
        let (rlo, rhi) = numerator_range(q, self.region.y0(), &self.region.y1(), self.c);
        if plo > phi || rlo > rhi {
            return Ok(());
        }
        let hx_exp = self.st.one_plus_s();
        let hy_exp = self.st.one_plus_t();
        let mut xs = Vec::new();
        let mut p = plo;
        while p <= phi {
            self.charge(1)?;
            let hx = HalfWidth::new(self.c.clone(), q.clone(), hx_exp);
            let gap = crate::geometry::interval_gap(&BigRational::new(p.clone(), q.clone()), self.region.x0(), &self.region.x1());
            if hx.covers(&gap) {
                xs.push(p.clone());
            }
            p += 1;
        }
        if xs.is_empty() {
            return Ok(());
        }
        let mut r = rlo;
        while r <= rhi {
            self.charge(1)?;
            let hy = HalfWidth::new(self.c.clone(), q.clone(), hy_exp);
            let gap = crate::geometry::interval_gap(&BigRational::new(r.clone(), q.clone()), self.region.y0(), &self.region.y1());
            if hy.covers(&gap) {
                let g = r.gcd(q);
                for p in &xs {
                    if p.gcd(&g).is_one() {
                        out.push(RatPoint::new_unchecked(p.clone(), r.clone(), q.clone()));
                    }
                }
            }
            r += 1;
        }
        Ok(())
    }
}

/// Candidate denominators in `[q_lo, q_hi]` from the x-coordinate lattice filter.
fn lattice_candidates(region: &Square, q_lo: &BigInt, q_hi: &BigInt, c: &BigRational, budget: u64) -> Result<BTreeSet<BigInt>> {
    let c_inv_bits = (c.denom() / c.numer()).bits() + 1;
    let k = q_hi.bits() + c_inv_bits + 8;
    let modulus = BigInt::one() << k as usize;
    let (xc, _) = region.center();
    let a = xc.scale_int(&modulus).floor();
    // |q x_c − p| ≤ q w/2 + c, plus rounding of a·q against x_c·q·2^K
    let half = region.side().scale(&BigRational::new(1.into(), 2.into()));
    let slack = &(&half * &Quad::from_int(q_hi.clone())) + &Quad::from_rational(c.clone());
    let y_max = slack.scale_int(&modulus).ceil() + q_hi + 1;
    let points = crate::lattice::box_points(&a, &modulus, q_hi, &y_max, budget)?;
    Ok(points
        .into_iter()
        .map(|(x, _)| x.abs())
        .filter(|q| q >= q_lo && q <= q_hi)
        .collect())
}

/// All coprime `P` with `q_lo ≤ q ≤ q_hi` and `Δ(P) ∩ region ≠ ∅`, sorted by `(q, p, r)`.
///
/// `budget` bounds the number of elementary steps; exceeding it is an error, never a
/// silent truncation.
pub fn rational_points_near(
    region: &Square,
    q_lo: &BigInt,
    q_hi: &BigInt,
    st: ExponentPair,
    c: &BigRational,
    budget: u64,
) -> Result<Vec<RatPoint>> {
    let q_lo = q_lo.max(&BigInt::one()).clone();
    if &q_lo > q_hi {
        return Ok(Vec::new());
    }
    let mut scan = Scan {
        region,
        st,
        c,
        budget,
        steps: 0,
    };
    let mut out = Vec::new();
    let span = (q_hi - &q_lo + 1u32).to_u64().unwrap_or(u64::MAX);
    // expected lattice hits ≈ 2 q_hi (q_hi w + 2c); the direct scan costs `span`
    let expected_hits = {
        let qf = q_hi.to_f64().unwrap_or(f64::INFINITY);
        2.0 * qf * (qf * region.side().to_f64() + 2.0 * c.to_f64().unwrap_or(1.0)) + 16.0
    };
    if span <= DIRECT_RANGE || expected_hits >= span as f64 {
        scan.charge(span)?;
        let mut q = q_lo;
        while &q <= q_hi {
            scan.points_for(&q, &mut out)?;
            q += 1;
        }
    } else {
        let candidates = lattice_candidates(region, &q_lo, q_hi, c, budget)?;
        scan.charge(candidates.len() as u64)?;
        for q in &candidates {
            scan.points_for(q, &mut out)?;
        }
    }
    out.sort();
    Ok(out)
}

/// Points of level `n` (restricted to sub-band `k` when given) whose removal box meets `region`.
pub fn enumerate_band(
    region: &Square,
    n: u32,
    k: Option<u32>,
    params: &ConstructionParams,
    budget: u64,
) -> Result<Vec<AttachedPoint>> {
    let Some((q_lo, q_hi)) = params.band_q_range(n, k) else {
        return Ok(Vec::new());
    };
    let points = rational_points_near(region, &q_lo, &q_hi, params.st(), params.c(), budget)?;
    let mut out = Vec::new();
    for point in points {
        let ap = attach_line(&point, params.st())?;
        match params.band_of(&ap)? {
            Some(BandIndex { n: bn, k: bk }) if bn == n && k.is_none_or(|k| k == bk) => out.push(ap),
            _ => {}
        }
    }
    Ok(out)
}

/// Outcome of [`certify_badness`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadnessCertificate {
    /// Denominator bound that was checked.
    #[serde(with = "serde_bigint")]
    pub certified_q: BigInt,
    /// On success every point of the region scores strictly above this for all `q ≤ certified_q`.
    #[serde(with = "serde_rational")]
    pub score_floor: BigRational,
    /// First reduced point (in `(q, p, r)` order) whose box meets the region.
    pub witness: Option<RatPoint>,
}

impl BadnessCertificate {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks that `region` avoids `Δ(P)` for every reduced `P` with `q ≤ q_max`; by the
/// reduction argument in the module docs this bounds `max(q^s‖qx‖, q^t‖qy‖) > c` on the
/// region for every `q ≤ q_max`.
pub fn certify_badness(
    region: &Square,
    q_max: &BigInt,
    st: ExponentPair,
    c: &BigRational,
    budget: u64,
) -> Result<BadnessCertificate> {
    if q_max.is_negative() {
        return Err(Error::Negative(format!("q_max = {q_max}")));
    }
    let witness = if q_max.is_zero() {
        None
    } else {
        rational_points_near(region, &BigInt::one(), q_max, st, c, budget)?.into_iter().next()
    };
    Ok(BadnessCertificate {
        certified_q: q_max.clone(),
        score_floor: c.clone(),
        witness,
    })
}
