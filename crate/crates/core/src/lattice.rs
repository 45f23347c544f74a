//! Exact enumeration of the planar lattice `{(x, y) : y ≡ a·x (mod m)}` inside a box.
//!
//! The box `|x| ≤ X, |y| ≤ Y` sits inside the ellipse `x²Y² + y²X² ≤ 2X²Y²`. After
//! Lagrange reduction of the basis `(1, a), (0, m)` for that quadratic form, the
//! ellipse is swept row by row along the second reduced vector, so the work is
//! proportional to the number of points found plus a small constant.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Point = (BigInt, BigInt);

/// Diagonal quadratic form `x²·wx + y²·wy` with positive weights.
#[derive(Clone, Debug)]
struct Form {
    wx: BigInt,
    wy: BigInt,
}

impl Form {
    fn inner(&self, u: &Point, v: &Point) -> BigInt {
        &u.0 * &v.0 * &self.wx + &u.1 * &v.1 * &self.wy
    }

    fn norm(&self, u: &Point) -> BigInt {
        self.inner(u, u)
    }
}

/// `round(n / d)` for `d > 0`, halves rounded up.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    (n * BigInt::from(2) + d).div_floor(&(d * BigInt::from(2)))
}

fn ceil_sqrt(n: &BigInt) -> BigInt {
    let r = n.sqrt();
    if &r * &r == *n {
        r
    } else {
        r + 1
    }
}

fn sub_mul(v: &Point, mu: &BigInt, u: &Point) -> Point {
    (&v.0 - mu * &u.0, &v.1 - mu * &u.1)
}

/// Lagrange-reduced basis `(u, v)` with `N(u) ≤ N(v)` for the form `x²·wx + y²·wy`.
fn reduce(mut u: Point, mut v: Point, form: &Form) -> (Point, Point) {
    let mut nu = form.norm(&u);
    let mut nv = form.norm(&v);
    if nu > nv {
        std::mem::swap(&mut u, &mut v);
        std::mem::swap(&mut nu, &mut nv);
    }
    loop {
        let mu = round_div(&form.inner(&u, &v), &nu);
        if mu.is_zero() {
            return (u, v);
        }
        v = sub_mul(&v, &mu, &u);
        nv = form.norm(&v);
        if nv >= nu {
            return (u, v);
        }
        std::mem::swap(&mut u, &mut v);
        std::mem::swap(&mut nu, &mut nv);
    }
}

/// Reduced basis of `{(x, y) : y ≡ a·x (mod m)}` for the weighted form `x²·wx + y²·wy`.
pub fn reduced_basis(a: &BigInt, m: &BigInt, wx: &BigInt, wy: &BigInt) -> (Point, Point) {
    let form = Form {
        wx: wx.clone(),
        wy: wy.clone(),
    };
    reduce((BigInt::one(), a.mod_floor(m)), (BigInt::zero(), m.clone()), &form)
}

fn saturating_u64(n: &BigInt) -> u64 {
    n.to_u64().unwrap_or(u64::MAX)
}

/// All `(x, y)` with `y ≡ a·x (mod m)`, `|x| ≤ xmax`, `|y| ≤ ymax`.
///
/// Fails with [`Error::BudgetExceeded`] rather than truncating when the sweep
/// would take more than `limit` steps.
pub fn box_points(a: &BigInt, m: &BigInt, xmax: &BigInt, ymax: &BigInt, limit: u64) -> Result<Vec<Point>> {
    if !m.is_positive() {
        return Err(Error::Precondition(format!("lattice modulus must be positive, got {m}")));
    }
    if xmax.is_negative() || ymax.is_negative() {
        return Ok(Vec::new());
    }
    let a = a.mod_floor(m);
    let budget_err = |needed: &BigInt| Error::BudgetExceeded {
        needed: saturating_u64(needed),
        budget: limit,
    };

    if xmax.is_zero() {
        // x = 0 forces y ∈ mℤ
        let k = ymax / m;
        if BigInt::from(2) * &k + 1 > BigInt::from(limit) {
            return Err(budget_err(&(k * 2 + 1)));
        }
        let mut out = Vec::new();
        let mut j = -k.clone();
        while j <= k {
            out.push((BigInt::zero(), &j * m));
            j += 1;
        }
        return Ok(out);
    }
    if ymax.is_zero() {
        // y = 0 forces a·x ≡ 0, i.e. x ∈ (m / gcd(a, m))ℤ
        let step = m / a.gcd(m);
        let k = xmax / &step;
        if BigInt::from(2) * &k + 1 > BigInt::from(limit) {
            return Err(budget_err(&(k * 2 + 1)));
        }
        let mut out = Vec::new();
        let mut j = -k.clone();
        while j <= k {
            out.push((&j * &step, BigInt::zero()));
            j += 1;
        }
        return Ok(out);
    }

    let form = Form {
        wx: ymax * ymax,
        wy: xmax * xmax,
    };
    let (u, v) = reduce((BigInt::one(), a.clone()), (BigInt::zero(), m.clone()), &form);
    let nu = form.norm(&u);
    let nv = form.norm(&v);
    let inner = form.inner(&u, &v);
    let rho2 = BigInt::from(2) * xmax * xmax * ymax * ymax;
    let det2 = &nu * &nv - &inner * &inner;
    // points i·u + j·v with N ≤ ρ²; solvable in i only when j²·det² ≤ ρ²·N(u)
    let jmax = (&rho2 * &nu / &det2).sqrt();
    if jmax.clone() * 2 + 1 > BigInt::from(limit) {
        return Err(budget_err(&(jmax * 2 + 1)));
    }

    let mut steps: u64 = 0;
    let mut out = Vec::new();
    let mut j = -jmax.clone();
    while j <= jmax {
        let disc = &rho2 * &nu - &j * &j * &det2;
        if !disc.is_negative() {
            let root = ceil_sqrt(&disc);
            let centre = -(&j * &inner);
            let lo = (&centre - &root).div_ceil(&nu);
            let hi = (&centre + &root).div_floor(&nu);
            let mut i = lo;
            while i <= hi {
                steps += 1;
                if steps > limit {
                    let area: BigInt = BigInt::from(4) * xmax * ymax / m + &jmax * BigInt::from(2) + 1;
                    return Err(budget_err(&area.max(BigInt::from(steps))));
                }
                let x = &i * &u.0 + &j * &v.0;
                let y = &i * &u.1 + &j * &v.1;
                if x.abs() <= *xmax && y.abs() <= *ymax {
                    out.push((x, y));
                }
                i += 1;
            }
        }
        j += 1;
    }
    Ok(out)
}
