//! The constant set of the construction: weights, game ratios, scale, removal constant.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{parse_rational, rational_to_string, ExponentPair, Quad};

/// Strict mode enforces the full bound on `c`; toy mode keeps only `c < lR⁻¹/6`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    Toy,
}

/// Block side of the colored tessellation.
pub const DEFAULT_M: u32 = 12;

/// `α₀ = (24√2)⁻¹ = √2/48`.
pub fn alpha0() -> Quad {
    Quad::new(BigRational::zero(), BigRational::new(1.into(), 48.into()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionParams {
    st: ExponentPair,
    beta: Quad,
    alpha0: Quad,
    l: Quad,
    r: Quad,
    r_inv: Quad,
    c: BigRational,
    m: u32,
    mode: Mode,
    blocks: u32,
    /// `6c/l`, so that `H_n = h_coeff · Rⁿ`.
    h_coeff: Quad,
}

/// Largest `2^e` (e ∈ ℤ) strictly below a positive bound.
pub fn largest_power_of_two_below(bound: &Quad) -> BigRational {
    let pow2 = |e: i64| {
        if e >= 0 {
            BigRational::from_integer(BigInt::one() << e as usize)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
        }
    };
    let mut e = (bound.ln_approx() / std::f64::consts::LN_2).floor() as i64;
    while Quad::from_rational(pow2(e)) >= *bound {
        e -= 1;
    }
    while Quad::from_rational(pow2(e + 1)) < *bound {
        e += 1;
    }
    pow2(e)
}

impl ConstructionParams {
    /// Strict parameters: `R = (α₀β)⁻¹`, `m = 12`, and
    /// `c < min(lR⁻¹/6, R⁻¹²/16)`; `c = None` picks the largest admissible power of two.
    pub fn strict(st: ExponentPair, beta: &BigRational, l: Quad, c: Option<BigRational>) -> Result<Self> {
        if !beta.is_positive() || *beta >= BigRational::one() {
            return Err(Error::InvalidParams(format!("beta must lie in (0, 1), got {}", rational_to_string(beta))));
        }
        let beta_q = Quad::from_rational(beta.clone());
        let r = (&alpha0() * &beta_q).recip();
        Self::assemble(st, beta_q, l, r, c, DEFAULT_M, Mode::Strict)
    }

    /// Toy parameters for exercising band arithmetic at small levels: `R` is given
    /// directly (so `β = (α₀R)⁻¹` need not lie in (0, 1)), `m` may be lowered, and only
    /// `c < lR⁻¹/6` is enforced.
    pub fn toy(st: ExponentPair, r: Quad, l: Quad, c: Option<BigRational>, m: u32) -> Result<Self> {
        if r <= Quad::one() {
            return Err(Error::InvalidParams(format!("R must exceed 1, got {r}")));
        }
        let beta = (&alpha0() * &r).recip();
        Self::assemble(st, beta, l, r, c, m, Mode::Toy)
    }

    /// Strict defaults used by the game: `(s, t) = (1/3, 2/3)`, `l = 2`, automatic `c`.
    pub fn defaults(beta: &BigRational) -> Result<Self> {
        Self::strict(ExponentPair::from_parts(1, 2, 3)?, beta, Quad::from_int(2), None)
    }

    fn assemble(
        st: ExponentPair,
        beta: Quad,
        l: Quad,
        r: Quad,
        c: Option<BigRational>,
        m: u32,
        mode: Mode,
    ) -> Result<Self> {
        if !l.is_positive() {
            return Err(Error::InvalidParams(format!("l must be positive, got {l}")));
        }
        if m == 0 {
            return Err(Error::InvalidParams("m must be positive".into()));
        }
        if mode == Mode::Strict && m != DEFAULT_M {
            return Err(Error::InvalidParams(format!("strict mode requires m = {DEFAULT_M}")));
        }
        let r_inv = r.recip();
        let bound = Self::c_bound_for(&l, &r, &r_inv, mode);
        let c = match c {
            Some(c) => c,
            None => largest_power_of_two_below(&bound),
        };
        if !c.is_positive() {
            return Err(Error::InvalidParams("c must be positive".into()));
        }
        if Quad::from_rational(c.clone()) >= bound {
            return Err(Error::InvalidParams(format!(
                "c = {} violates c < {} (≈ {:e}) required in {} mode",
                rational_to_string(&c),
                bound,
                bound.to_f64(),
                if mode == Mode::Strict { "strict" } else { "toy" }
            )));
        }
        let blocks = (&r / &Quad::from_int(m)).floor();
        let blocks = blocks
            .to_u32()
            .ok_or_else(|| Error::InvalidParams(format!("[R/m] = {blocks} out of range")))?;
        if mode == Mode::Strict && blocks == 0 {
            return Err(Error::InvalidParams("[R/m] must be at least 1".into()));
        }
        let h_coeff = (&Quad::from_rational(c.clone()) * &Quad::from_int(6)) / &l;
        Ok(Self {
            st,
            beta,
            alpha0: alpha0(),
            l,
            r,
            r_inv,
            c,
            m,
            mode,
            blocks,
            h_coeff,
        })
    }

    fn c_bound_for(l: &Quad, r: &Quad, r_inv: &Quad, mode: Mode) -> Quad {
        let first = l / &(r * &Quad::from_int(6));
        match mode {
            Mode::Toy => first,
            Mode::Strict => first.min(r_inv.pow(12) / Quad::from_int(16)),
        }
    }

    /// Upper bound on `c` in force for this mode (strict inequality).
    pub fn c_bound(&self) -> Quad {
        Self::c_bound_for(&self.l, &self.r, &self.r_inv, self.mode)
    }

    pub fn st(&self) -> ExponentPair {
        self.st
    }

    pub fn beta(&self) -> &Quad {
        &self.beta
    }

    pub fn alpha0(&self) -> &Quad {
        &self.alpha0
    }

    pub fn l(&self) -> &Quad {
        &self.l
    }

    /// `R = (α₀β)⁻¹`.
    pub fn r(&self) -> &Quad {
        &self.r
    }

    pub fn r_inv(&self) -> &Quad {
        &self.r_inv
    }

    pub fn c(&self) -> &BigRational {
        &self.c
    }

    pub fn c_quad(&self) -> Quad {
        Quad::from_rational(self.c.clone())
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_strict(&self) -> bool {
        self.mode == Mode::Strict
    }

    /// `[R/m]`.
    pub fn blocks_per_side(&self) -> u32 {
        self.blocks
    }

    /// `m·[R/m]`.
    pub fn children_per_side(&self) -> u32 {
        self.m * self.blocks
    }

    /// Number of colors `[R/m]²`.
    pub fn colors(&self) -> u32 {
        self.blocks * self.blocks
    }

    /// Successors per vertex `m²[R/m]²`.
    pub fn successors(&self) -> u32 {
        self.children_per_side().pow(2)
    }

    /// `H_n = 6c l⁻¹ Rⁿ`.
    pub fn h(&self, n: u32) -> Quad {
        &self.h_coeff * &self.r.pow(n)
    }

    /// Side `l·R⁻ⁿ` of a level-`n` square.
    pub fn side(&self, n: u32) -> Quad {
        &self.l * &self.r_inv.pow(n)
    }

    /// Least `n ≥ 1` with `H_n ≥ 1`: the first level whose band can hold a point.
    pub fn first_active_level(&self) -> u32 {
        let mut n = 1;
        while self.h(n) < Quad::one() {
            n += 1;
        }
        n
    }

    pub fn to_record(&self) -> ParamsRecord {
        ParamsRecord {
            s: rational_to_string(&self.st.s_rational()),
            t: rational_to_string(&self.st.t_rational()),
            beta: self.beta.clone(),
            alpha0: self.alpha0.clone(),
            l: self.l.clone(),
            r: self.r.clone(),
            c: rational_to_string(&self.c),
            m: self.m,
            mode: self.mode,
        }
    }
}

/// Serialized form; every derived field is re-checked on load.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub s: String,
    pub t: String,
    pub beta: Quad,
    pub alpha0: Quad,
    pub l: Quad,
    #[serde(rename = "R")]
    pub r: Quad,
    pub c: String,
    pub m: u32,
    pub mode: Mode,
}

impl TryFrom<ParamsRecord> for ConstructionParams {
    type Error = Error;

    fn try_from(rec: ParamsRecord) -> Result<Self> {
        let st = ExponentPair::parse(&rec.s, &rec.t)?;
        let c = Some(parse_rational(&rec.c)?);
        let params = match rec.mode {
            Mode::Strict => {
                let beta = rec
                    .beta
                    .as_rational()
                    .ok_or_else(|| Error::InvalidParams("strict beta must be rational".into()))?
                    .clone();
                Self::strict(st, &beta, rec.l.clone(), c)?
            }
            Mode::Toy => Self::toy(st, rec.r.clone(), rec.l.clone(), c, rec.m)?,
        };
        if params.to_record() != rec {
            return Err(Error::InvalidParams("derived constants do not match the record".into()));
        }
        Ok(params)
    }
}

impl Serialize for ConstructionParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConstructionParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ParamsRecord::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn default_constants() {
        let p = ConstructionParams::defaults(&half()).unwrap();
        assert_eq!(p.alpha0(), &Quad::new(BigRational::zero(), BigRational::new(1.into(), 48.into())));
        assert_eq!(&(p.alpha0() * p.beta()) * p.r(), Quad::one());
        assert_eq!(p.r(), &Quad::new(BigRational::zero(), BigRational::from_integer(48.into())));
        assert_eq!(p.blocks_per_side(), 5);
        assert_eq!(p.children_per_side(), 60);
        assert_eq!(p.colors(), 25);
        assert_eq!(p.successors(), 3600);
        assert_eq!(p.c(), &BigRational::new(1.into(), BigInt::one() << 78usize));
        assert_eq!(p.first_active_level(), 13);
        assert!(p.h(1) <= Quad::one());
    }

    #[test]
    fn three_quarters() {
        let p = ConstructionParams::defaults(&BigRational::new(3.into(), 4.into())).unwrap();
        assert_eq!(p.blocks_per_side(), 3);
        assert_eq!(p.c(), &BigRational::new(1.into(), BigInt::one() << 71usize));
        assert_eq!(p.first_active_level(), 13);
        assert_eq!(p.h(14), Quad::from_int(192));
    }

    #[test]
    fn c_bound_enforced() {
        let st = ExponentPair::from_parts(1, 2, 3).unwrap();
        let too_big = Some(BigRational::new(1.into(), 1000.into()));
        assert!(ConstructionParams::strict(st, &half(), Quad::from_int(2), too_big.clone()).is_err());
        // toy R = 10, l = 1: c < 1/60 only
        let toy = ConstructionParams::toy(st, Quad::from_int(10), Quad::one(), too_big, 12).unwrap();
        assert_eq!(toy.h(2), Quad::ratio(6, 10));
        assert!(ConstructionParams::toy(st, Quad::from_int(10), Quad::one(), Some(BigRational::new(1.into(), 60.into())), 12).is_err());
    }

    #[test]
    fn toy_heights() {
        let st = ExponentPair::from_parts(1, 2, 3).unwrap();
        let toy = ConstructionParams::toy(st, Quad::from_int(10), Quad::one(), Some(BigRational::new(1.into(), 600.into())), 1).unwrap();
        assert_eq!(toy.h(2), Quad::one());
        assert_eq!(toy.h(5), Quad::from_int(1000));
    }

    #[test]
    fn record_round_trip() {
        let p = ConstructionParams::defaults(&half()).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: ConstructionParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        let mut tampered = p.to_record();
        tampered.r = Quad::from_int(60);
        assert!(ConstructionParams::try_from(tampered).is_err());
    }
}
