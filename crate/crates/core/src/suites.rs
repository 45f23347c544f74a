//! Batch verification suites shared by the command line and the integration tests.
//!
//! Each suite returns a [`SuiteReport`]; randomness comes only from the given seed, and
//! per-item work runs through [`Exec`] with results merged in input order, so reports
//! are byte-identical across runs and execution modes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cantor::{
    count_strip_hits, cover_from_report, cover_strip_width, directed_windows, strip_hit_bound, verify_line_constancy,
    Tessellation,
};
use crate::diophantine::{alpha0, attach_line, in_attach_box, ConstructionParams, RatPoint};
use crate::error::{Error, Result};
use crate::game::{certify_transcript, check_identities, BobStrategy, Certification, GameState};
use crate::geometry::{Disc, Square, Strip};
use crate::par::Exec;
use crate::quad::{rational_to_string, ExponentPair, Quad};
use crate::trees::{find_type_i, growth_slack, verify_growth, TreeShape, Vertex};

/// At most this many failure messages are kept per report.
const MAX_FAILURES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub instances: u64,
    pub violations: u64,
    pub details: Value,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.into(),
            instances: 0,
            violations: 0,
            details: json!({}),
            failures: Vec::new(),
        }
    }

    fn fail(&mut self, msg: impl FnOnce() -> String) {
        self.violations += 1;
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(msg());
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.fail(msg);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Exact identities among the fixed constants.
pub fn constants() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("constants");
    let a0 = alpha0();
    rep.check(a0 == Quad::new(BigRational::zero(), BigRational::new(1.into(), 48.into())), || "α₀ ≠ √2/48".into());
    rep.check(
        (&a0 * &Quad::new(BigRational::zero(), BigRational::from_integer(24.into()))) == Quad::one(),
        || "α₀·24√2 ≠ 1".into(),
    );
    for beta in [BigRational::new(1.into(), 2.into()), BigRational::new(3.into(), 4.into())] {
        let p = ConstructionParams::defaults(&beta)?;
        rep.check((p.alpha0() * p.beta() * p.r()) == Quad::one(), || format!("α₀βR ≠ 1 for β = {beta}"));
    }
    let m = 12u32;
    rep.check(3 * m - 2 == 34 && m * m == 144, || "m identities".into());
    let slack = growth_slack(m)?;
    rep.check(slack == BigRational::new(2392.into(), 27.into()), || format!("slack = {slack}"));
    rep.check(slack > BigRational::from_integer(88.into()), || "slack ≤ 88".into());
    rep.check(m * m - (3 * m - 2) == 110, || "a₁ bound ≠ 110".into());
    let four_root2 = Quad::new(BigRational::zero(), BigRational::from_integer(4.into()));
    rep.check(four_root2.floor() == BigInt::from(5), || "⌊4√2⌋ ≠ 5".into());
    let p = ConstructionParams::defaults(&BigRational::new(1.into(), 2.into()))?;
    rep.check(p.blocks_per_side() == 5 && p.colors() == 25 && p.successors() == 3600, || "default tree shape".into());
    rep.details = json!({
        "alpha0": a0.to_string(),
        "slack": rational_to_string(&slack),
        "blocks_per_side": p.blocks_per_side(),
        "c": rational_to_string(p.c()),
        "first_active_level": p.first_active_level(),
    });
    Ok(rep)
}

/// Normal `(A, B)` with the smallest `(key, A, |B|, B)` by scanning the whole box
/// `|A| ≤ q^s, |B| ≤ q^t` in machine integers, independently of the attachment code.
pub fn attach_oracle(p: i64, r: i64, q: i64, st: ExponentPair) -> Option<(i64, i64)> {
    let delta = st.delta();
    let (qs, qt) = ((q as i128).pow(st.sigma_s()), (q as i128).pow(st.sigma_t()));
    let qd = (q as i128).pow(delta);
    // |A| ≤ q^s ⟺ |A|^δ ≤ q^(σs)
    let max_with = |lim: i128| {
        let mut x = 0i64;
        while ((x + 1) as i128).pow(delta) <= lim {
            x += 1;
        }
        x
    };
    let (amax, bmax) = (max_with(qs), max_with(qt));
    let mut best: Option<(i128, i64, i64, i64)> = None;
    let step = r.rem_euclid(q);
    for a in 0..=amax {
        let a_key = (a as i128).pow(delta) * qt;
        if best.is_some_and(|x| a_key > x.0) {
            break;
        }
        // residue of b·r stepped along b, compared with that of −a·p
        let target = (-a * p).rem_euclid(q);
        let mut residue = (-bmax * r).rem_euclid(q);
        for b in -bmax..=bmax {
            let hit = residue == target;
            residue += step;
            if residue >= q {
                residue -= q;
            }
            if !hit || (a == 0 && b <= 0) {
                continue;
            }
            let key = a_key.max((b.unsigned_abs() as i128).pow(delta) * qs);
            debug_assert!(key <= qd);
            let cand = (key, a, b.abs(), b);
            if best.is_none_or(|x| cand < x) {
                best = Some(cand);
            }
        }
    }
    best.map(|(_, a, _, b)| (a, b))
}

/// Line attachment and height bounds over every reduced point of `[0, 1]²` with `q ≤ q_max`.
///
/// Returns the attachment report (line through `P`, normal in the box, agreement with
/// [`attach_oracle`]) and the height report (`q ≤ H(P) ≤ q^(1+max(s,t))`).
pub fn attachment(q_max: i64, pairs: &[ExponentPair], exec: Exec) -> Result<(SuiteReport, SuiteReport)> {
    let mut aug = SuiteReport::new("lemma-aug");
    let mut height = SuiteReport::new("height-bound");
    let mut per_pair = Vec::new();
    for &st in pairs {
        let per_q = exec.map_range(q_max as usize, |i| {
            let q = i as i64 + 1;
            let mut aug = SuiteReport::new("");
            let mut height = SuiteReport::new("");
            for p in 0..=q {
                for r in 0..=q {
                    let Ok(point) = RatPoint::from_i64(p, r, q) else { continue };
                    let ap = match attach_line(&point, st) {
                        Ok(ap) => ap,
                        Err(e) => {
                            aug.check(false, || format!("{point}: {e}"));
                            continue;
                        }
                    };
                    let (a, b) = (ap.line.a().to_i64().unwrap_or(i64::MAX), ap.line.b().to_i64().unwrap_or(i64::MAX));
                    let oracle = attach_oracle(p, r, q, st);
                    let qb = BigInt::from(q);
                    let ok = ap.line.passes_through(&point)
                        && in_attach_box(ap.line.a(), ap.line.b(), &qb, st)
                        && oracle == Some((a, b));
                    aug.check(ok, || format!("{point} (s,t) = {st}: got {}, oracle {oracle:?}", ap.line));
                    // H ≤ q^(1+t')  ⟺  H^δ ≤ q^(δ + σ')
                    let e = st.delta() + st.ordered().1.num;
                    let upper = ap.height.pow(st.delta()) <= qb.pow(e);
                    height.check(qb <= ap.height && upper, || format!("{point} (s,t) = {st}: H = {}", ap.height));
                }
            }
            (aug, height)
        });
        let mut count = 0;
        for (a, h) in per_q {
            count += a.instances;
            merge(&mut aug, a);
            merge(&mut height, h);
        }
        per_pair.push(json!({"st": st.to_string(), "points": count}));
    }
    aug.details = json!({"q_max": q_max, "pairs": per_pair});
    height.details = aug.details.clone();
    Ok((aug, height))
}

fn merge(into: &mut SuiteReport, from: SuiteReport) {
    into.instances += from.instances;
    into.violations += from.violations;
    for f in from.failures {
        if into.failures.len() < MAX_FAILURES {
            into.failures.push(f);
        }
    }
}

/// Dyadic rational `k/2^30` with `k` uniform in `[0, 2^30]`.
fn unit_dyadic(rng: &mut ChaCha8Rng) -> Quad {
    Quad::from_rational(BigRational::new(rng.gen_range(0..=1i64 << 30).into(), (1i64 << 30).into()))
}

/// `block_in_square` for random squares of side `2m·lR^(−n)` inside random parents.
pub fn grid_property(params: &ConstructionParams, samples: u64, seed: u64, exec: Exec) -> Result<SuiteReport> {
    let root = Square::new(Quad::zero(), Quad::zero(), params.l().clone())?;
    let tess = Tessellation::new(params.clone(), root)?;
    let mut rep = SuiteReport::new("grid");
    let outcomes = exec.map_range(samples as usize, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let depth = rng.gen_range(0..3u32);
        let parent = Vertex::from_path((0..depth).map(|_| rng.gen_range(0..params.successors())).collect());
        let parent_sq = tess.node_square(&parent).expect("parent within depth").square;
        let side = params.side(depth + 1).scale_int(&(2 * params.m()).into());
        let slack = parent_sq.side() - &side;
        let sigma = parent_sq.offset(&(&slack * &unit_dyadic(&mut rng)), &(&slack * &unit_dyadic(&mut rng)));
        let sigma = Square::new(sigma.x0().clone(), sigma.y0().clone(), side).expect("positive side");
        match tess.block_in_square(&parent, &sigma) {
            Ok(color) if sigma.contains_square(&tess.block_square(&parent_sq, color)) => None,
            Ok(color) => Some(format!("sample {i}: block {color} not inside sigma")),
            Err(e) => Some(format!("sample {i}: {e}")),
        }
    });
    for o in outcomes {
        rep.check(o.is_none(), || o.unwrap_or_default());
    }
    rep.details = json!({"samples": samples, "seed": seed});
    Ok(rep)
}

/// Random strip of width `(2/3)lR^(−n)` through a random point of `square`. One in eight
/// strips is axis-parallel or diagonal, the directions that cross the most cells.
pub fn random_strip(rng: &mut ChaCha8Rng, params: &ConstructionParams, square: &Square, n: u32) -> Strip {
    let side = square.side().to_f64();
    let px = square.x0().to_f64() + side * rng.gen::<f64>();
    let py = square.y0().to_f64() + side * rng.gen::<f64>();
    let scale = (1u64 << 24) as f64 / side;
    let (a, b) = if rng.gen_range(0..8) == 0 {
        [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)][rng.gen_range(0..4)]
    } else {
        loop {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            if a.abs() + b.abs() > 1e-3 {
                break (a, b);
            }
        }
    };
    let (a, b) = ((a * scale).round() as i64, (b * scale).round() as i64);
    let c = -(a as f64 * px + b as f64 * py).round() as i64;
    Strip::new(a.into(), b.into(), c.into(), cover_strip_width(params, n)).expect("nonzero direction and width")
}

/// Color chosen by a seeded hash of the vertex path.
pub fn hashed_color(seed: u64, v: &Vertex, colors: u32) -> u32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = v.path().iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &j| (h ^ u64::from(j) ^ 0x100).wrapping_mul(0x0100_0000_01b3));
    rng.set_stream(h);
    rng.gen_range(1..=colors)
}

/// Strip counts below the root for random type-(II) choices, with each strip aimed at
/// the block kept below the root; every count must stay within `(3m − 2)^k`.
pub fn strip_counts(params: &ConstructionParams, k: u32, samples: u64, seed: u64, exec: Exec) -> Result<SuiteReport> {
    let root = Square::new(Quad::zero(), Quad::zero(), params.l().clone())?;
    let tess = Tessellation::new(params.clone(), root.clone())?;
    let bound = strip_hit_bound(params.m(), k).to_u64().unwrap_or(u64::MAX);
    let counts = exec.map_range(samples as usize, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((u64::from(k) << 40) + i as u64);
        let choice_seed: u64 = rng.gen();
        let colors = params.colors();
        // aim the strip at the block kept below the root so level 1 is never empty
        let block = tess.block_square(&root, hashed_color(choice_seed, &Vertex::root(), colors));
        let strip = random_strip(&mut rng, params, &block, k);
        count_strip_hits(&tess, &root, |v| hashed_color(choice_seed, v, colors), &strip, k)
    });
    let mut rep = SuiteReport::new(&format!("stripcount-k{k}"));
    let mut max = 0;
    let mut histogram = BTreeMap::new();
    for (i, c) in counts.iter().enumerate() {
        max = max.max(*c);
        *histogram.entry(*c).or_insert(0u64) += 1;
        rep.check(*c <= bound, || format!("sample {i}: {c} hits exceed {bound}"));
    }
    let top: Vec<(u64, u64)> = histogram.into_iter().rev().take(5).collect();
    rep.details = json!({"k": k, "samples": samples, "bound": bound, "max_observed": max, "top_counts": top});
    Ok(rep)
}

/// Side of a seed region expected to hold about `target` reduced points with `q ≤ q_hi`.
fn seed_side(q_hi: &BigInt, target: f64) -> Quad {
    let q = q_hi.to_f64().unwrap_or(f64::MAX);
    // reduced points with q ≤ Q in a unit square: about Q³/(3ζ(3))
    let side = (target * 3.0 * 1.202 / q.powi(3)).sqrt().min(0.125);
    let bits = (-side.log2()).ceil() as usize;
    Quad::from_rational(BigRational::new(BigInt::one(), BigInt::one() << bits))
}

/// Options for [`constancy`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstancyOptions {
    pub levels: Vec<u32>,
    pub ks: Vec<u32>,
    pub random_windows: u64,
    pub seed: u64,
    /// Expected number of seed points per level.
    pub seed_target: u64,
    pub budget: u64,
}

/// Line constancy, strip containment and the strip-count composite over directed and
/// random windows. Fails as vacuous when no window holds two band points.
pub fn constancy(params: &ConstructionParams, opts: &ConstancyOptions, exec: Exec) -> Result<SuiteReport> {
    let tess = Tessellation::new(params.clone(), Square::new(Quad::zero(), Quad::zero(), params.l().clone())?)?;
    let mut rep = SuiteReport::new("constancy");
    let mut runs = Vec::new();
    let mut multi_total = 0u64;
    for &n in &opts.levels {
        let Some((_, q_hi)) = params.band_q_range(n, None) else {
            runs.push(json!({"n": n, "note": "level has no points"}));
            continue;
        };
        let side = seed_side(&q_hi, opts.seed_target as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(u64::from(n));
        let corner = |rng: &mut ChaCha8Rng| {
            let span = Quad::one() - &side;
            &span * &unit_dyadic(rng)
        };
        let region = Square::new(corner(&mut rng), corner(&mut rng), side.clone())?;
        for &k in &opts.ks {
            if k == 0 || k > n {
                continue;
            }
            let mut windows = directed_windows(params, n, k, &region, opts.budget)?;
            let directed = windows.len();
            let wside = params.side(n - k);
            for _ in 0..opts.random_windows {
                let x = unit_dyadic(&mut rng);
                let y = unit_dyadic(&mut rng);
                windows.push(Square::new(x, y, wside.clone())?);
            }
            let results = exec.try_map(&windows, |w| {
                let report = verify_line_constancy(n, k, w, params, opts.budget)?;
                let cover = cover_from_report(&report, params);
                let composite = match &cover {
                    Ok(Some(c)) => {
                        let choice_seed = opts.seed ^ u64::from(n) << 32 ^ u64::from(k);
                        let hits =
                            count_strip_hits(&tess, w, |v| hashed_color(choice_seed, v, params.colors()), &c.strip, k);
                        Some(hits)
                    }
                    _ => None,
                };
                Ok::<_, Error>((report, cover, composite))
            })?;
            let bound = strip_hit_bound(params.m(), k).to_u64().unwrap_or(u64::MAX);
            let (mut instances, mut multi, mut strips, mut max_points, mut max_hits) = (0u64, 0u64, 0u64, 0usize, 0u64);
            for (report, cover, hits) in results {
                instances += report.instances as u64;
                max_points = max_points.max(report.instances);
                if report.instances >= 2 {
                    multi += 1;
                }
                let ctx = format!("n = {n}, k = {k}, window at ({}, {})", report.window.x0(), report.window.y0());
                rep.check(!report.is_violation(), || format!("{ctx}: attached lines differ"));
                rep.check(report.diagnostics.iter().all(|d| d.inner_bound_holds), || format!("{ctx}: inner bound fails"));
                match cover {
                    Ok(Some(c)) => {
                        strips += 1;
                        rep.check(c.all_contained, || format!("{ctx}: a box leaves the strip"));
                    }
                    Ok(None) => {}
                    Err(e) => rep.check(false, || format!("{ctx}: {e}")),
                }
                if let Some(h) = hits {
                    max_hits = max_hits.max(h);
                    rep.check(h <= bound, || format!("{ctx}: {h} strip hits exceed {bound}"));
                }
            }
            multi_total += multi;
            runs.push(json!({
                "n": n,
                "k": k,
                "seed_region": {"x0": region.x0().to_string(), "y0": region.y0().to_string(), "side": side.to_string()},
                "directed_windows": directed,
                "random_windows": opts.random_windows,
                "band_points": instances,
                "max_points_per_window": max_points,
                "multi_point_windows": multi,
                "strips": strips,
                "max_strip_hits": max_hits,
            }));
        }
    }
    let vacuous = multi_total == 0;
    if vacuous {
        rep.fail(|| "vacuous: no window holds two band points".into());
    }
    rep.details = json!({"runs": runs, "multi_point_windows": multi_total, "vacuous": vacuous});
    Ok(rep)
}

/// Survival predicate: each vertex below the root survives with probability `p`, by a hash of its path.
pub fn random_survival(seed: u64, p: f64) -> impl Fn(&Vertex) -> bool + Sync + Send {
    move |v: &Vertex| {
        if v.level() == 0 {
            return true;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = v.path().iter().fold(0x9e37_79b9_7f4a_7c15u64, |h, &j| (h ^ u64::from(j) ^ 0x100).wrapping_mul(0x0100_0000_01b3));
        rng.set_stream(h);
        rng.gen_bool(p)
    }
}

/// Existence of a depth-`h` type-(I) subtree by exhaustive recursion (no pruning order).
pub fn type_i_exists_brute(shape: &TreeShape, survives: &dyn Fn(&Vertex) -> bool, v: &Vertex, h: u32) -> bool {
    if !survives(v) {
        return false;
    }
    if h == 0 {
        return true;
    }
    (1..=shape.colors()).all(|color| {
        let found: Vec<bool> = shape
            .children_of_color(color)
            .map(|j| type_i_exists_brute(shape, survives, &v.child(j), h - 1))
            .collect();
        found.into_iter().any(|b| b)
    })
}

/// `find_type_i` against exhaustive recursion on random survival predicates.
pub fn tree_search(shape: &TreeShape, depth: u32, samples: u64, seed: u64, exec: Exec) -> Result<SuiteReport> {
    let outcomes = exec.map_range(samples as usize, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let p = rng.gen_range(0.45..0.95);
        let pred_seed: u64 = rng.gen();
        let survives = random_survival(pred_seed, p);
        let brute = type_i_exists_brute(shape, &survives, &Vertex::root(), depth);
        match find_type_i(shape, &survives, depth) {
            Ok(Some(w)) => (brute, true, w.validate(shape, &survives).is_ok()),
            Ok(None) => (brute, false, true),
            Err(_) => (brute, false, false),
        }
    });
    let mut rep = SuiteReport::new("tree-search");
    let mut found = 0;
    for (i, (brute, got, valid)) in outcomes.into_iter().enumerate() {
        found += u64::from(got);
        rep.check(brute == got && valid, || format!("sample {i}: brute force {brute}, search {got}, witness valid {valid}"));
    }
    rep.details = json!({
        "successors": shape.successors(),
        "colors": shape.colors(),
        "depth": depth,
        "samples": samples,
        "with_witness": found,
    });
    Ok(rep)
}

/// Worst-case counts `a_0 = 1`, `a_n = m² a_(n−1) − Σ_(k=1)^n (3m−2)^k a_(n−k)`; `None`
/// once a count would turn negative or overflow.
pub fn worst_case_counts(m: u32, levels: u32) -> Option<Vec<u64>> {
    let mut a: Vec<i128> = vec![1];
    for n in 1..=levels as usize {
        let mut next = i128::from(m * m) * a[n - 1];
        let mut power = 1i128;
        for k in 1..=n {
            power = power.checked_mul(i128::from(3 * m - 2))?;
            next = next.checked_sub(power.checked_mul(a[n - k])?)?;
        }
        if next < 0 {
            return None;
        }
        a.push(next);
    }
    a.into_iter().map(|x| u64::try_from(x).ok()).collect()
}

/// The growth recursion on given counts (or the worst case) and the exact slack.
pub fn growth(m: u32, counts: Option<&[u64]>, levels: u32) -> Result<SuiteReport> {
    let owned;
    let counts = match counts {
        Some(c) => c,
        None => {
            owned = worst_case_counts(m, levels)
                .ok_or_else(|| Error::Violation(format!("worst-case counts turn negative within {levels} levels")))?;
            &owned
        }
    };
    let report = verify_growth(counts, m)?;
    let mut rep = SuiteReport::new("growth");
    for s in &report.steps {
        rep.check(s.recursion_holds && s.exceeds_88, || format!("n = {}: a_n = {}, bound {}", s.n, s.a_n, s.lower_bound));
    }
    rep.check(report.slack_exceeds_88, || format!("slack {} ≤ 88", report.slack));
    rep.details = serde_json::to_value(&report).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(rep)
}

/// One configured game for [`games`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameCase {
    pub beta: String,
    pub bob: BobStrategy,
    pub lookahead: u32,
}

/// Full games from `B₀ = disc(0, 24√2)` for `rounds(params)` rounds, each certified up to `q_cap`.
pub fn games(
    st: ExponentPair,
    cases: &[GameCase],
    extra_rounds: u32,
    q_cap: &BigInt,
    budget: u64,
    exec: Exec,
) -> Result<(SuiteReport, Vec<Certification>)> {
    let b0 = Disc::new(Quad::zero(), Quad::zero(), Quad::new(BigRational::zero(), BigRational::from_integer(24.into())))?;
    let outcomes = exec.map(cases, |case| -> Result<(Vec<String>, Option<Certification>, Value)> {
        let beta = crate::quad::parse_rational(&case.beta)?;
        let params = crate::game::strict_params_for(st, &beta, &b0)?;
        let rounds = params.first_active_level() + extra_rounds;
        let mut state = GameState::start(params, b0.clone(), case.lookahead, budget)?;
        let mut problems = Vec::new();
        if let Err(e) = state.play(&case.bob, rounds) {
            problems.push(format!("β = {}, {:?}: {e}", case.beta, case.bob));
            return Ok((problems, None, json!({"rounds_played": state.round()})));
        }
        if let Err(n) = check_identities(&state) {
            problems.push(format!("β = {}, {:?}: identities fail at round {n}", case.beta, case.bob));
        }
        let cert = certify_transcript(&state, q_cap, budget)?;
        let ok = cert.passed
            && !cert.partial
            && cert.band_recheck
            && cert.direct_scan_passed
            && cert.min_center_score.is_some_and(|s| s > cert.c.to_f64().unwrap_or(0.0));
        if !ok {
            problems.push(format!("β = {}, {:?}: certification failed: {cert:?}", case.beta, case.bob));
        }
        let survivors: Vec<usize> = state.rounds().iter().map(|r| r.survivors_in_block).collect();
        Ok((problems, Some(cert), json!({"rounds_played": state.round(), "survivors_in_block": survivors})))
    });
    let mut rep = SuiteReport::new("game");
    let mut certs = Vec::new();
    let mut per_case = Vec::new();
    for (case, out) in cases.iter().zip(outcomes) {
        let (problems, cert, info) = out?;
        rep.instances += 1;
        for p in problems {
            rep.fail(|| p);
        }
        per_case.push(json!({
            "beta": case.beta,
            "bob": case.bob,
            "lookahead": case.lookahead,
            "certified_q": cert.as_ref().map(|c| c.certified_q.to_string()),
            "info": info,
        }));
        certs.extend(cert);
    }
    rep.details = json!({"cases": per_case});
    Ok((rep, certs))
}
