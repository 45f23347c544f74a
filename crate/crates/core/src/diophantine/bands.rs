//! Height levels `H_n ≤ H(P) < H_{n+1}` and their denominator sub-bands.
//!
//! With `t' = max(s, t)` and `T_j = H_n^(1/(1+t')) R^j`, level `n` splits into
//! `k = 1: T_0 ≤ q < T_10` and `k ≥ 2: T_{2k+6} ≤ q < T_{2k+8}`. Since `H(P) ≤ q^(1+t')`
//! every point of level `n` has `q ≥ T_0`, and `q ≤ H(P) < H_{n+1}` keeps `k ≤ n`,
//! so the sub-bands tile the level.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::attach::AttachedPoint;
use super::params::ConstructionParams;
use crate::error::{Error, Result};
use crate::quad::Quad;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BandIndex {
    pub n: u32,
    pub k: u32,
}

/// Exponent `j` of `R` at the lower edge of sub-band `k`.
pub fn band_lower_exponent(k: u32) -> u32 {
    if k <= 1 {
        0
    } else {
        2 * k + 6
    }
}

/// Exponent `j` of `R` at the upper edge of sub-band `k`.
pub fn band_upper_exponent(k: u32) -> u32 {
    if k <= 1 {
        10
    } else {
        2 * k + 8
    }
}

/// Least integer `x ≥ 1` with `pred(x)`, for `pred` monotone (false, then true) and
/// true somewhere; `guess` only steers the search.
pub(crate) fn least_satisfying(guess: &BigInt, pred: impl Fn(&BigInt) -> bool) -> BigInt {
    let one = BigInt::one();
    let mut hi = guess.max(&one).clone();
    let mut step = BigInt::one();
    while !pred(&hi) {
        hi += &step;
        step *= 2;
    }
    // find a lower point that fails (or 1 if it already holds)
    let mut step = BigInt::one();
    let mut lo = &hi - &step;
    loop {
        if lo < one {
            if pred(&one) {
                return one;
            }
            lo = one.clone();
            break;
        }
        if !pred(&lo) {
            break;
        }
        hi = lo.clone();
        step *= 2;
        lo = &hi - &step;
    }
    // invariant: pred(lo) false, pred(hi) true
    while &hi - &lo > one {
        let mid: BigInt = (&lo + &hi) / 2;
        if pred(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn f64_to_bigint(v: f64) -> BigInt {
    if !v.is_finite() || v < 1.0 {
        return BigInt::one();
    }
    if v < 1e18 {
        return BigInt::from(v as u64);
    }
    let exp = v.log2().floor() as i64 - 52;
    BigInt::from((v / 2f64.powi(exp as i32)) as u64) << exp as usize
}

impl ConstructionParams {
    /// `H_n^δ`, reused by the threshold comparisons.
    fn h_pow_delta(&self, n: u32) -> Quad {
        self.h(n).pow(self.st().delta())
    }

    /// Compares `q` with `T_j = H_n^(1/(1+t')) R^j` by raising both sides to the power `δ(1+t')`.
    pub fn cmp_threshold(&self, q: &BigInt, n: u32, j: u32) -> Ordering {
        let e = self.st().delta() + self.st().ordered().1.num;
        let rhs = &self.h_pow_delta(n) * &self.r().pow(j * e);
        Quad::from_int(q.pow(e)).cmp(&rhs)
    }

    /// Approximate `ln T_j`, a search guide only.
    fn ln_threshold(&self, n: u32, j: u32) -> f64 {
        let t = self.st().max_exponent().to_f64();
        self.h(n).ln_approx() / (1.0 + t) + j as f64 * self.r().ln_approx()
    }

    /// Least integer `q ≥ 1` with `q ≥ T_j`.
    pub fn least_q_at_threshold(&self, n: u32, j: u32) -> BigInt {
        let guess = f64_to_bigint(self.ln_threshold(n, j).exp());
        least_satisfying(&guess, |q| self.cmp_threshold(q, n, j) != Ordering::Less)
    }

    /// The level `n ≥ 1` with `H_n ≤ height < H_{n+1}`.
    pub fn level_of_height(&self, height: &BigInt) -> Result<u32> {
        let h = Quad::from_int(height.clone());
        if h < self.h(1) {
            return Err(Error::Precondition(format!("height {height} lies below H_1")));
        }
        let est = ((h.ln_approx() - self.h(1).ln_approx()) / self.r().ln_approx()).floor();
        let mut n = if est.is_finite() && est > 0.0 { est as u32 + 1 } else { 1 };
        while n > 1 && self.h(n) > h {
            n -= 1;
        }
        while self.h(n + 1) <= h {
            n += 1;
        }
        Ok(n)
    }

    /// Sub-band of `q` inside level `n`, or `None` if `q < T_0`.
    pub fn sub_band_of(&self, q: &BigInt, n: u32) -> Option<u32> {
        if self.cmp_threshold(q, n, 0) == Ordering::Less {
            return None;
        }
        if self.cmp_threshold(q, n, 10) == Ordering::Less {
            return Some(1);
        }
        // q ≥ T_10 = T_{2·2+6}; find k with T_{2k+6} ≤ q < T_{2k+8}
        let r_ln = self.r().ln_approx();
        let est = ((q.to_f64().map_or(f64::INFINITY, f64::ln) - self.ln_threshold(n, 0)) / r_ln - 6.0) / 2.0;
        let mut k = if est.is_finite() && est >= 2.0 { est.floor() as u32 } else { 2 };
        while k > 2 && self.cmp_threshold(q, n, band_lower_exponent(k)) == Ordering::Less {
            k -= 1;
        }
        while self.cmp_threshold(q, n, band_upper_exponent(k)) != Ordering::Less {
            k += 1;
        }
        Some(k)
    }

    /// `(n, k)` of an attached point; `None` only if the point violates the height bound.
    pub fn band_of(&self, ap: &AttachedPoint) -> Result<Option<BandIndex>> {
        let n = self.level_of_height(&ap.height)?;
        Ok(self
            .sub_band_of(ap.point.q(), n)
            .filter(|&k| k <= n)
            .map(|k| BandIndex { n, k }))
    }

    /// Inclusive denominator range of sub-band `k` of level `n` (all of level `n` when
    /// `k` is `None`), clipped by `1 ≤ q < H_{n+1}`. `None` when empty.
    pub fn band_q_range(&self, n: u32, k: Option<u32>) -> Option<(BigInt, BigInt)> {
        let cap: BigInt = self.h(n + 1).ceil() - 1;
        if !cap.is_positive() {
            return None;
        }
        let (lo, hi) = match k {
            None => (self.least_q_at_threshold(n, 0), cap),
            Some(k) => {
                if k == 0 || k > n {
                    return None;
                }
                let lo = self.least_q_at_threshold(n, band_lower_exponent(k));
                let hi: BigInt = self.least_q_at_threshold(n, band_upper_exponent(k)) - 1;
                (lo, hi.min(cap))
            }
        };
        (lo <= hi).then_some((lo, hi))
    }
}
