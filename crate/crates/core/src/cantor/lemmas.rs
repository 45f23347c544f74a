//! Verifiers for line constancy of band points near a window and the strip cover it implies.
//!
//! For `P_i = (p_i/q_i, r_i/q_i)` with attached lines `w_i = (A_i, B_i, C_i)` and
//! `v_i = (p_i/q_i, r_i/q_i, 1)`, the diagnostics record `⟨v₁, w₂⟩` (whose `q₁`-multiple
//! is an integer), its bound `4c q₁⁻¹ R^λ + 12c q₂⁻¹ R^(k+1)` with `λ = 10` for `k = 1`
//! and `2` otherwise, and the cross product `w₁ × w₂`, which vanishes exactly when the
//! lines agree.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::cover_strip_width;
use crate::diophantine::{delta_box, enumerate_band, in_attach_box, AttachedPoint, ConstructionParams, RatLine, RatPoint};
use crate::error::{Error, Result};
use crate::geometry::{Square, Strip};
use crate::quad::{serde_bigint, serde_rational, Quad};

/// Pairwise diagnostics are kept for at most this many pairs per window.
const MAX_PAIR_DIAGNOSTICS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDiagnostics {
    pub first: RatPoint,
    pub second: RatPoint,
    /// `⟨v₁, w₂⟩`.
    #[serde(with = "serde_rational")]
    pub inner: BigRational,
    /// `q₁·⟨v₁, w₂⟩`, always an integer.
    #[serde(with = "serde_bigint")]
    pub scaled_inner: BigInt,
    /// `w₁ × w₂ = (p̃₀, r̃₀, q̃₀)`.
    pub cross: [String; 3],
    pub lambda_k: u32,
    /// `|⟨v₁, w₂⟩| ≤ 4c q₁⁻¹ R^λ + 12c q₂⁻¹ R^(k+1)`.
    pub inner_bound_holds: bool,
    pub same_line: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstancyReport {
    pub n: u32,
    pub k: u32,
    pub window: Square,
    pub instances: usize,
    pub constant: bool,
    /// The window avoids every box of levels `1..=n−k`, as a square of `S_(n−k)` does.
    pub window_survives: bool,
    /// `16cR¹² < 1`, the bound closing the `k = 1` case.
    pub case1_bound_holds: bool,
    /// `2 H_n^(1/(1+t)) R^(−k−1)`, the bound on `|q̃₀|` in the `k ≥ 2` case.
    pub q0_bound: Option<f64>,
    pub points: Vec<AttachedPoint>,
    pub diagnostics: Vec<PairDiagnostics>,
}

impl ConstancyReport {
    /// Non-constant lines where the hypotheses hold.
    pub fn is_violation(&self) -> bool {
        !self.constant && (self.k == 1 || self.window_survives)
    }

    pub fn common_line(&self) -> Option<&RatLine> {
        if self.constant {
            self.points.first().map(|ap| &ap.line)
        } else {
            None
        }
    }
}

fn line_vec(line: &RatLine) -> [BigInt; 3] {
    [line.a().clone(), line.b().clone(), line.c().clone()]
}

fn cross(u: &[BigInt; 3], v: &[BigInt; 3]) -> [BigInt; 3] {
    [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ]
}

pub(crate) fn pair_diagnostics(a: &AttachedPoint, b: &AttachedPoint, k: u32, params: &ConstructionParams) -> PairDiagnostics {
    let (p1, p2) = (&a.point, &b.point);
    let w2 = line_vec(&b.line);
    // q₁⟨v₁, w₂⟩ = A₂p₁ + B₂r₁ + C₂q₁
    let scaled_inner = &w2[0] * p1.p() + &w2[1] * p1.r() + &w2[2] * p1.q();
    let inner = BigRational::new(scaled_inner.clone(), p1.q().clone());
    let lambda_k = if k == 1 { 10 } else { 2 };
    let c = params.c_quad();
    let r = params.r();
    let bound = (&c * &r.pow(lambda_k)).scale(&BigRational::new(4.into(), p1.q().clone()))
        + (&c * &r.pow(k + 1)).scale(&BigRational::new(12.into(), p2.q().clone()));
    let cr = cross(&line_vec(&a.line), &w2);
    PairDiagnostics {
        first: p1.clone(),
        second: p2.clone(),
        inner_bound_holds: Quad::from_rational(inner.abs()) <= bound,
        inner,
        scaled_inner,
        same_line: cr.iter().all(Zero::is_zero),
        cross: cr.map(|x| x.to_string()),
        lambda_k,
    }
}

fn check_window(n: u32, k: u32, window: &Square, params: &ConstructionParams) -> Result<()> {
    if !params.is_strict() {
        return Err(Error::ModeError("line constancy needs the strict constant c; toy parameters are rejected".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("need 1 ≤ k ≤ n, got n = {n}, k = {k}")));
    }
    let side = params.side(n - k);
    if window.side() != &side {
        return Err(Error::Precondition(format!("window side {} differs from lR^-(n-k) = {side}", window.side())));
    }
    Ok(())
}

/// Enumerates `𝒫_{n,k}(window)` and checks that all attached lines agree.
pub fn verify_line_constancy(
    n: u32,
    k: u32,
    window: &Square,
    params: &ConstructionParams,
    budget: u64,
) -> Result<ConstancyReport> {
    check_window(n, k, window, params)?;
    let points = enumerate_band(window, n, Some(k), params, budget)?;
    let mut window_survives = true;
    for level in 1..=n - k {
        if !enumerate_band(window, level, None, params, budget)?.is_empty() {
            window_survives = false;
            break;
        }
    }
    let constant = points.windows(2).all(|w| w[0].line == w[1].line);
    let mut diagnostics = Vec::new();
    'pairs: for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if diagnostics.len() == MAX_PAIR_DIAGNOSTICS {
                break 'pairs;
            }
            diagnostics.push(pair_diagnostics(a, b, k, params));
        }
    }
    let case1 = (params.c_quad() * params.r().pow(12)).scale_int(&16.into()) < Quad::one();
    let q0_bound = (k >= 2).then(|| {
        let t = params.st().max_exponent().to_f64();
        2.0 * params.h(n).to_f64().powf(1.0 / (1.0 + t)) * params.r().to_f64().powi(-(k as i32) - 1)
    });
    Ok(ConstancyReport {
        n,
        k,
        window: window.clone(),
        instances: points.len(),
        constant,
        window_survives,
        case1_bound_holds: case1,
        q0_bound,
        points,
        diagnostics,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentCheck {
    pub point: RatPoint,
    /// `(A, B)` in the box `|A| ≤ q^s, |B| ≤ q^t` and `(2c/q)² ≤ (w/2)²(A² + B²)`, which
    /// together bound the distance of `Δ(P)` from the line by `w/2`.
    pub exact_bound_holds: bool,
    /// All corners of the rational outer box of `Δ(P)` lie in the strip.
    pub outer_corners_inside: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripCover {
    pub strip: Strip,
    pub checks: Vec<ContainmentCheck>,
    pub all_contained: bool,
}

/// Strip of width `(2/3)lR^(−n)` around the common line of `𝒫_{n,k}(window)`, with a
/// containment check for every box; `None` when the band set is empty.
pub fn strip_cover(
    n: u32,
    k: u32,
    window: &Square,
    params: &ConstructionParams,
    budget: u64,
) -> Result<Option<StripCover>> {
    let report = verify_line_constancy(n, k, window, params, budget)?;
    cover_from_report(&report, params)
}

/// As [`strip_cover`], reusing a constancy report.
pub fn cover_from_report(report: &ConstancyReport, params: &ConstructionParams) -> Result<Option<StripCover>> {
    if report.points.is_empty() {
        return Ok(None);
    }
    if report.is_violation() {
        let lines: BTreeSet<String> = report.points.iter().map(|ap| ap.line.to_string()).collect();
        return Err(Error::Violation(format!(
            "attached lines differ on a window at level {} band {}: {}",
            report.n,
            report.k,
            lines.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    if !report.constant {
        // hypotheses fail (window does not survive), so no strip is claimed
        return Ok(None);
    }
    let line = &report.points[0].line;
    let width = cover_strip_width(params, report.n);
    let strip = Strip::new(line.a().clone(), line.b().clone(), line.c().clone(), width.clone())?;
    let st = params.st();
    let c = params.c();
    let norm = line.a() * line.a() + line.b() * line.b();
    let checks: Vec<ContainmentCheck> = report
        .points
        .iter()
        .map(|ap| {
            let q = ap.point.q();
            let lhs = BigRational::from_integer(16.into()) * c * c;
            let rhs = (&width * &width).scale_int(&(q * q * &norm));
            let exact = line.passes_through(&ap.point)
                && in_attach_box(line.a(), line.b(), q, st)
                && Quad::from_rational(lhs) <= rhs;
            ContainmentCheck {
                point: ap.point.clone(),
                exact_bound_holds: exact,
                outer_corners_inside: strip.contains_rect_outer(&delta_box(&ap.point, st, c)),
            }
        })
        .collect();
    let all_contained = checks.iter().all(|c| c.exact_bound_holds && c.outer_corners_inside);
    Ok(Some(StripCover {
        strip,
        checks,
        all_contained,
    }))
}

fn centered_window(cx: &BigRational, cy: &BigRational, side: &Quad) -> Square {
    let half = side.scale(&BigRational::new(BigInt::one(), 2.into()));
    Square::new(
        &Quad::from_rational(cx.clone()) - &half,
        &Quad::from_rational(cy.clone()) - &half,
        side.clone(),
    )
    .expect("window side is positive")
}

/// Index of the nearest other point in sup distance, by a sweep over points sorted by `x`.
fn nearest_neighbours(coords: &[(f64, f64)]) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&i, &j| coords[i].0.total_cmp(&coords[j].0).then(i.cmp(&j)));
    let mut out = vec![None; coords.len()];
    for (pos, &i) in order.iter().enumerate() {
        let mut best = f64::INFINITY;
        let mut best_j: Option<usize> = None;
        let consider = |j: usize, best: &mut f64, best_j: &mut Option<usize>| {
            let d = (coords[i].0 - coords[j].0).abs().max((coords[i].1 - coords[j].1).abs());
            if d < *best || (d == *best && best_j.is_some_and(|b| j < b)) {
                *best = d;
                *best_j = Some(j);
            }
        };
        for &j in order[pos + 1..].iter() {
            if coords[j].0 - coords[i].0 > best {
                break;
            }
            consider(j, &mut best, &mut best_j);
        }
        for &j in order[..pos].iter().rev() {
            if coords[i].0 - coords[j].0 > best {
                break;
            }
            consider(j, &mut best, &mut best_j);
        }
        out[i] = best_j;
    }
    out
}

/// Windows of side `lR^(−(n−k))` aimed at band points of level `n` inside `region`: one
/// centered on each point and one on the midpoint of each point and its nearest
/// neighbour. Sorted and deduplicated.
pub fn directed_windows(
    params: &ConstructionParams,
    n: u32,
    k: u32,
    region: &Square,
    budget: u64,
) -> Result<Vec<Square>> {
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("need 1 ≤ k ≤ n, got n = {n}, k = {k}")));
    }
    let side = params.side(n - k);
    let seeds = enumerate_band(region, n, None, params, budget)?;
    let coords: Vec<(f64, f64)> = seeds
        .iter()
        .map(|ap| (ap.point.x().to_f64().unwrap_or(0.0), ap.point.y().to_f64().unwrap_or(0.0)))
        .collect();
    let two = BigRational::from_integer(2.into());
    let mut centers = BTreeSet::new();
    for (i, nn) in nearest_neighbours(&coords).into_iter().enumerate() {
        let (x, y) = (seeds[i].point.x(), seeds[i].point.y());
        if let Some(j) = nn {
            let mx = (&x + seeds[j].point.x()) / &two;
            let my = (&y + seeds[j].point.y()) / &two;
            centers.insert((mx, my));
        }
        centers.insert((x, y));
    }
    Ok(centers.iter().map(|(x, y)| centered_window(x, y, &side)).collect())
}
