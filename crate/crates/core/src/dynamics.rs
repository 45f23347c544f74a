//! Systole of the lattice `g_u h_(x,y) ℤ³` along the diagonal flow
//! `g_u = diag(e^(su), e^(tu), e^(−u))`. Bounded trajectories correspond to
//! `(s, t)`-badly approximable `(x, y)`.
//!
//! Double precision throughout: this is a diagnostic and feeds no exact certificate.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::quad::{serde_rational, ExponentPair};

/// Tolerance on `det = 1`.
pub const DET_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowPoint {
    #[serde(with = "serde_rational")]
    pub x: BigRational,
    #[serde(with = "serde_rational")]
    pub y: BigRational,
    pub st: ExponentPair,
    pub u: f64,
    /// Row-major `g_u · h_(x,y)`.
    pub basis: [[f64; 3]; 3],
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl FlowPoint {
    pub fn new(x: BigRational, y: BigRational, st: ExponentPair, u: f64) -> Result<Self> {
        if !u.is_finite() {
            return Err(Error::InvalidParams(format!("flow time must be finite, got {u}")));
        }
        let (xf, yf) = (x.to_f64().unwrap_or(f64::NAN), y.to_f64().unwrap_or(f64::NAN));
        let (es, et, eu) = ((st.s().to_f64() * u).exp(), (st.t().to_f64() * u).exp(), (-u).exp());
        let basis = [[es, 0.0, es * xf], [0.0, et, et * yf], [0.0, 0.0, eu]];
        let det = det3(&basis);
        if (det - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::Violation(format!("det(g_u h) = {det} is not 1 within {DET_TOLERANCE}")));
        }
        Ok(Self { x, y, st, u, basis })
    }

    pub fn det(&self) -> f64 {
        det3(&self.basis)
    }

    /// `basis · v`.
    pub fn apply(&self, v: [i64; 3]) -> [f64; 3] {
        let v = v.map(|c| c as f64);
        self.basis.map(|row| row[0] * v[0] + row[1] * v[1] + row[2] * v[2])
    }

    /// Least box size accepted by [`systole`]: `⌈e^u⌉(1 + ⌈|x| + |y|⌉)`.
    pub fn required_bound(&self) -> u64 {
        let xy = self.x.to_f64().unwrap_or(0.0).abs() + self.y.to_f64().unwrap_or(0.0).abs();
        (self.u.max(0.0).exp().ceil() as u64) * (1 + xy.ceil() as u64)
    }
}

fn sup_norm(w: [f64; 3]) -> f64 {
    w.iter().fold(0.0, |m, c| m.max(c.abs()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Systole {
    pub value: f64,
    pub witness: [i64; 3],
}

/// Integer in `[−bound, bound]` nearest to `v`.
fn nearest_in_box(v: f64, bound: i64) -> i64 {
    (v.round() as i64).clamp(-bound, bound)
}

/// Shortest nonzero vector of `g_u h ℤ³` in the sup norm over coefficients `‖v‖_∞ ≤ coeff_bound`.
///
/// For a fixed third coefficient the three coordinates decouple, so the best first two
/// coefficients are the integers nearest `−v₃x` and `−v₃y`; the scan over `v₃` is
/// therefore exact over the box.
pub fn systole(fp: &FlowPoint, coeff_bound: u64) -> Result<Systole> {
    let required = fp.required_bound();
    if coeff_bound < required {
        return Err(Error::InsufficientBound {
            given: coeff_bound,
            required,
        });
    }
    let bound = coeff_bound as i64;
    let (xf, yf) = (fp.x.to_f64().unwrap_or(0.0), fp.y.to_f64().unwrap_or(0.0));
    // v₃ = 0: the shorter of the first two basis vectors
    let mut best = {
        let a = fp.apply([1, 0, 0]);
        let b = fp.apply([0, 1, 0]);
        if sup_norm(a) <= sup_norm(b) {
            Systole { value: sup_norm(a), witness: [1, 0, 0] }
        } else {
            Systole { value: sup_norm(b), witness: [0, 1, 0] }
        }
    };
    for c in 1..=bound {
        let v = [nearest_in_box(-(c as f64) * xf, bound), nearest_in_box(-(c as f64) * yf, bound), c];
        let value = sup_norm(fp.apply(v));
        if value < best.value {
            best = Systole { value, witness: v };
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub u: f64,
    pub systole: f64,
    pub witness: [i64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
    /// Smallest sample; `None` for an empty grid.
    pub min: Option<TraceSample>,
}

impl Trace {
    /// CSV with columns `u,systole,vx,vy,vz`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,systole,vx,vy,vz\n");
        for s in &self.samples {
            writeln!(out, "{},{:e},{},{},{}", s.u, s.systole, s.witness[0], s.witness[1], s.witness[2]).expect("write to string");
        }
        out
    }
}

/// Systole at each `u` of the grid, each with its minimal admissible box.
pub fn trace(x: &BigRational, y: &BigRational, st: ExponentPair, u_grid: &[f64], exec: Exec) -> Result<Trace> {
    let samples = exec.try_map(u_grid, |&u| {
        let fp = FlowPoint::new(x.clone(), y.clone(), st, u)?;
        let sys = systole(&fp, fp.required_bound())?;
        Ok::<_, Error>(TraceSample {
            u,
            systole: sys.value,
            witness: sys.witness,
        })
    })?;
    let min = samples
        .iter()
        .min_by(|a, b| a.systole.total_cmp(&b.systole))
        .cloned();
    Ok(Trace { samples, min })
}

/// `0, step, 2·step, … ≤ umax`.
pub fn uniform_grid(umax: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !umax.is_finite() || umax < 0.0 {
        return Err(Error::InvalidParams(format!("need step > 0 and umax ≥ 0, got step {step}, umax {umax}")));
    }
    let count = (umax / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| i as f64 * step).collect())
}
