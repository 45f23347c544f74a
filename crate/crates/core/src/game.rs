//! The `(α₀, β)` game: legality checks, Alice's tessellation strategy, Bob adversaries,
//! transcripts and certification of the limit point.
//!
//! Alice starts with the disc `A₀` concentric with `B₀` and sets `l = 2ρ(A₀)`, so the
//! root square `Σ₀` is circumscribed about `A₀`. In round `n` the inscribed square of
//! Bob's disc `B_n` has side `2m·lR^(−n)` and therefore contains a whole color block of
//! the current vertex's children; Alice moves to a surviving child in that block and
//! answers with its inscribed disc, of radius `lR^(−n)/2 = α₀ρ(B_n)`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cantor::Tessellation;
use crate::diophantine::{alpha0, certify_badness, enumerate_band, ConstructionParams, ParamsRecord, RatPoint};
use crate::error::{Error, Result};
use crate::geometry::{Disc, HalfWidth, Square};
use crate::quad::{serde_bigint, serde_rational, ExponentPair, Quad};
use crate::trees::Vertex;

/// Grid resolution of seeded-random Bob moves.
const RANDOM_GRID: i64 = 1024;

/// Bits of precision in the steering step length.
const STEER_BITS: u32 = 40;

/// Denominator cap of the independent direct scan at the final center.
pub const DIRECT_SCAN_CAP: u64 = 100_000;

/// Bob's play.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BobStrategy {
    /// Always concentric with Alice's last disc.
    Concentric,
    /// Uniform center on a `1/1024` grid of the admissible disc of centers.
    SeededRandom { seed: u64 },
    /// Moves as far as allowed toward a target point.
    Steering {
        #[serde(with = "serde_rational")]
        x: BigRational,
        #[serde(with = "serde_rational")]
        y: BigRational,
    },
}

impl BobStrategy {
    /// Next disc for Bob: radius `β·ρ(A)` and center within `ρ(A) − ρ(B)` of `A`'s center.
    pub fn next_disc(&self, state: &GameState) -> Disc {
        let a = state.last_alice();
        let radius = state.params.beta() * a.radius();
        let gap = a.radius() - &radius;
        let (dx, dy) = match self {
            BobStrategy::Concentric => (Quad::zero(), Quad::zero()),
            BobStrategy::SeededRandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(u64::from(state.round) + 1);
                let (u, v) = loop {
                    let u = rng.gen_range(-RANDOM_GRID..=RANDOM_GRID);
                    let v = rng.gen_range(-RANDOM_GRID..=RANDOM_GRID);
                    if u * u + v * v <= RANDOM_GRID * RANDOM_GRID {
                        break (u, v);
                    }
                };
                (gap.scale(&BigRational::new(u.into(), RANDOM_GRID.into())), gap.scale(&BigRational::new(v.into(), RANDOM_GRID.into())))
            }
            BobStrategy::Steering { x, y } => {
                let dx = Quad::from_rational(x.clone()) - a.cx();
                let dy = Quad::from_rational(y.clone()) - a.cy();
                let lambda = steering_step(&(&dx * &dx + &dy * &dy), &gap);
                (dx.scale(&lambda), dy.scale(&lambda))
            }
        };
        let disc = Disc::new(a.cx() + &dx, a.cy() + &dy, radius).expect("Bob radius is positive");
        debug_assert!(a.contains_disc(&disc));
        disc
    }
}

/// Largest `λ ≤ 1` of the form `k·2^(−e)` (with `STEER_BITS` significant bits) such that
/// `λ²·dist² ≤ gap²`, found by exact comparisons.
fn steering_step(dist_sq: &Quad, gap: &Quad) -> BigRational {
    let gap_sq = gap * gap;
    let fits = |lambda: &BigRational| dist_sq.scale(&(lambda * lambda)) <= gap_sq;
    let one = BigRational::one();
    if fits(&one) {
        return one;
    }
    let mut e = 0usize;
    while !fits(&BigRational::new(BigInt::one(), BigInt::one() << e)) {
        e += 1;
    }
    // λ ∈ [2^(−e), 2^(1−e)): bisect the mantissa
    let den = BigInt::one() << (e + STEER_BITS as usize);
    let mut lo = BigInt::one() << STEER_BITS as usize;
    let mut hi = BigInt::one() << (STEER_BITS as usize + 1);
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1usize;
        if fits(&BigRational::new(mid.clone(), den.clone())) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    BigRational::new(lo, den)
}

/// One completed round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub bob: Disc,
    pub alice: Disc,
    /// Full path of Alice's vertex from the root.
    pub vertex: Vertex,
    pub color: u32,
    pub survivors_in_block: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    params: ConstructionParams,
    tess: Tessellation,
    round: u32,
    b0: Disc,
    a0: Disc,
    rounds: Vec<RoundRecord>,
    tau: Vertex,
    lookahead: u32,
    budget: u64,
}

/// Strict parameters matching `B₀`: `l = 2α₀ρ(B₀)`.
pub fn strict_params_for(st: ExponentPair, beta: &BigRational, b0: &Disc) -> Result<ConstructionParams> {
    let l = (alpha0() * b0.radius()).scale_int(&2.into());
    ConstructionParams::strict(st, beta, l, None)
}

impl GameState {
    /// Opens the game on Bob's first disc; `params.l` must equal `2α₀ρ(B₀)`.
    pub fn start(params: ConstructionParams, b0: Disc, lookahead: u32, budget: u64) -> Result<Self> {
        if lookahead == 0 {
            return Err(Error::InvalidParams("lookahead must be at least 1".into()));
        }
        let a_radius = params.alpha0() * b0.radius();
        let l = a_radius.scale_int(&2.into());
        if &l != params.l() {
            return Err(Error::InvalidParams(format!(
                "l = {} does not match 2α₀ρ(B₀) = {l}",
                params.l()
            )));
        }
        let a0 = Disc::new(b0.cx().clone(), b0.cy().clone(), a_radius)?;
        let tess = Tessellation::new(params.clone(), a0.circumscribed_square())?;
        Ok(Self {
            params,
            tess,
            round: 0,
            b0,
            a0,
            rounds: Vec::new(),
            tau: Vertex::root(),
            lookahead,
            budget,
        })
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn tessellation(&self) -> &Tessellation {
        &self.tess
    }

    /// Number of completed rounds.
    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn b0(&self) -> &Disc {
        &self.b0
    }

    pub fn a0(&self) -> &Disc {
        &self.a0
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn vertex(&self) -> &Vertex {
        &self.tau
    }

    pub fn lookahead(&self) -> u32 {
        self.lookahead
    }

    /// Alice's most recent disc.
    pub fn last_alice(&self) -> &Disc {
        self.rounds.last().map_or(&self.a0, |r| &r.alice)
    }

    /// Bob's disc must have exactly this radius.
    pub fn expected_bob_radius(&self) -> Quad {
        self.params.beta() * self.last_alice().radius()
    }

    fn check_bob(&self, bn: &Disc) -> Result<()> {
        let a = self.last_alice();
        let expected = self.expected_bob_radius();
        let round = self.round + 1;
        if bn.radius() != &expected {
            return Err(Error::IllegalMove(format!(
                "round {round}: Bob's radius {} differs from β·ρ(A) = {expected} (difference {})",
                bn.radius(),
                bn.radius() - &expected
            )));
        }
        if !a.contains_disc(bn) {
            let slack = a.radius() - bn.radius();
            return Err(Error::IllegalMove(format!(
                "round {round}: Bob's disc leaves A: squared center distance {} exceeds (ρ(A) − ρ(B))² = {}",
                a.center_distance_sq(bn),
                &slack * &slack
            )));
        }
        Ok(())
    }

    /// Alice's answer to `bn`: moves to a surviving child inside the inscribed square of `bn`.
    pub fn alice_move(&mut self, bn: Disc) -> Result<&RoundRecord> {
        self.check_bob(&bn)?;
        let n = self.round + 1;
        let sigma = bn.inscribed_square();
        let expected_side = self.params.side(n).scale_int(&(2 * self.params.m()).into());
        if sigma.side() != &expected_side {
            return Err(Error::Violation(format!(
                "round {n}: inscribed square side {} differs from 2m·lR^-n = {expected_side}",
                sigma.side()
            )));
        }
        let parent_sq = self.tess.node_square(&self.tau)?.square;
        let color = self.tess.block_in_square_of(&parent_sq, &sigma)?;
        let block = self.tess.block_survival_of(&parent_sq, n, color, self.budget)?;
        let mut chosen = None;
        for &j in &block.survivors {
            let child = self.tess.child_square(&parent_sq, j);
            if self.tess.has_type_i_subtree(&child, n, self.lookahead - 1, self.budget)? {
                chosen = Some((j, child));
                break;
            }
        }
        let Some((j, square)) = chosen else {
            return Err(Error::DeadEnd {
                round: n,
                color,
                survivors: block.survivors.len() as u32,
            });
        };
        let vertex = self.tau.child(j);
        let report = self.tess.survives(&vertex, self.budget)?;
        if !report.survived {
            return Err(Error::Violation(format!(
                "round {n}: chosen vertex {:?} fails the independent survival check",
                vertex.path()
            )));
        }
        let alice = Disc::inscribed_in(&square);
        if alice.radius() != &(self.params.alpha0() * bn.radius()) || !bn.contains_disc(&alice) {
            return Err(Error::Violation(format!("round {n}: Alice's disc breaks the ratio or containment identity")));
        }
        self.tau = vertex.clone();
        self.round = n;
        self.rounds.push(RoundRecord {
            bob: bn,
            alice,
            vertex,
            color,
            survivors_in_block: block.survivors.len(),
        });
        Ok(self.rounds.last().expect("just pushed"))
    }

    /// Plays `rounds` rounds against `bob`.
    pub fn play(&mut self, bob: &BobStrategy, rounds: u32) -> Result<()> {
        for _ in 0..rounds {
            let bn = bob.next_disc(self);
            self.alice_move(bn)?;
        }
        Ok(())
    }
}

/// Outcome of [`certify_transcript`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    /// Every point of the final disc has score above `c` for all `q` up to this bound.
    #[serde(with = "serde_bigint")]
    pub certified_q: BigInt,
    /// `⌊H_(N+1)^(1/(1+max(s,t)))⌋` capped by the caller, before any budget fallback.
    #[serde(with = "serde_bigint")]
    pub requested_q: BigInt,
    #[serde(with = "serde_bigint")]
    pub q_cap: BigInt,
    #[serde(with = "serde_rational")]
    pub c: BigRational,
    pub passed: bool,
    /// Certification was shortened to fit the budget.
    pub partial: bool,
    pub witness: Option<RatPoint>,
    /// The final disc avoids every band point of levels `1..=N`.
    pub band_recheck: bool,
    /// Denominator bound of the direct scan at the final center.
    pub direct_scan_q: u64,
    /// No `q` in the direct scan comes within `c` once the disc radius is allowed for.
    pub direct_scan_passed: bool,
    /// `min_q max(q^s‖qx‖, q^t‖qy‖)` at the center, to double precision.
    pub min_center_score: Option<f64>,
}

/// Largest `q` with `q^(1+max(s,t)) < H_(N+1)`; zero when `N = 0` and `H_1 ≤ 1`.
pub fn height_denominator_bound(params: &ConstructionParams, rounds: u32) -> BigInt {
    params.least_q_at_threshold(rounds + 1, 0) - BigInt::one()
}

/// Distance from `v` to the nearest integer.
fn dist_to_int(v: &Quad) -> Quad {
    let lo = v - &Quad::from_int(v.floor());
    let hi = &Quad::one() - &lo;
    lo.min(hi)
}

fn f64_dist(v: f64) -> f64 {
    (v - v.round()).abs()
}

/// Direct scan at `(x, y)`: for each `q`, the points within `rho` of the center stay
/// outside the box `q^s‖qx‖ ≤ c, q^t‖qy‖ ≤ c` in at least one coordinate.
fn direct_scan(x: &Quad, y: &Quad, rho: &Quad, q_max: u64, st: ExponentPair, c: &BigRational) -> (bool, Option<f64>) {
    let (xf, yf, rf) = (x.to_f64(), y.to_f64(), rho.to_f64());
    let (s, t) = (st.s().to_f64(), st.t().to_f64());
    let mut min_score: Option<f64> = None;
    let mut passed = true;
    for q in 1..=q_max {
        let qf = q as f64;
        let (gx, gy) = (f64_dist(qf * xf), f64_dist(qf * yf));
        let score = (qf.powf(s) * gx).max(qf.powf(t) * gy);
        min_score = Some(min_score.map_or(score, |m: f64| m.min(score)));
        // float error of qx is below 1e-9 here, and c < 1e-9
        if gx - qf * rf > 1e-6 || gy - qf * rf > 1e-6 {
            continue;
        }
        let qq = BigInt::from(q);
        let gap = |v: &Quad| {
            let g = dist_to_int(&v.scale_int(&qq)).scale(&BigRational::new(BigInt::one(), qq.clone())) - rho;
            if g.is_negative() {
                Quad::zero()
            } else {
                g
            }
        };
        let hx = HalfWidth::new(c.clone(), qq.clone(), st.one_plus_s());
        let hy = HalfWidth::new(c.clone(), qq.clone(), st.one_plus_t());
        if hx.covers(&gap(x)) && hy.covers(&gap(y)) {
            passed = false;
            break;
        }
    }
    (passed, min_score)
}

/// Certifies badness of Alice's final disc up to `min(q_cap, ⌊H_(N+1)^(1/(1+max(s,t)))⌋)`,
/// with an independent re-check of the bands and a direct scan at the center.
pub fn certify_transcript(state: &GameState, q_cap: &BigInt, budget: u64) -> Result<Certification> {
    let params = state.params();
    let n = state.round();
    let bound = height_denominator_bound(params, n);
    let requested = bound.min(q_cap.clone()).max(BigInt::zero());
    let disc = state.last_alice();
    let region = disc.circumscribed_square();

    let mut q = requested.clone();
    let mut partial = false;
    let cert = loop {
        match certify_badness(&region, &q, params.st(), params.c(), budget) {
            Ok(cert) => break cert,
            Err(Error::BudgetExceeded { .. }) if q > BigInt::one() => {
                q = &q / 2;
                partial = true;
            }
            Err(e) => return Err(e),
        }
    };
    let final_square: Square = if n == 0 {
        state.tessellation().root().clone()
    } else {
        state.tessellation().node_square(state.vertex())?.square
    };
    let mut band_recheck = true;
    for level in 1..=n {
        if !enumerate_band(&final_square, level, None, params, budget)?.is_empty() {
            band_recheck = false;
            break;
        }
    }
    let scan_q = cert.certified_q.to_u64().unwrap_or(u64::MAX).min(DIRECT_SCAN_CAP);
    let (direct_scan_passed, min_center_score) =
        direct_scan(disc.cx(), disc.cy(), disc.radius(), scan_q, params.st(), params.c());
    Ok(Certification {
        certified_q: cert.certified_q.clone(),
        requested_q: requested,
        q_cap: q_cap.clone(),
        c: params.c().clone(),
        passed: cert.passed(),
        partial,
        witness: cert.witness,
        band_recheck,
        direct_scan_q: scan_q,
        direct_scan_passed,
        min_center_score,
    })
}

/// Saved game: parameters, the opening, every round and the certification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub params: ParamsRecord,
    pub bob_strategy: BobStrategy,
    pub lookahead: u32,
    pub b0: Disc,
    pub a0: Disc,
    pub rounds: Vec<RoundRecord>,
    pub certification: Option<Certification>,
}

impl Transcript {
    pub fn from_state(state: &GameState, bob: &BobStrategy, certification: Option<Certification>) -> Self {
        Self {
            params: state.params().to_record(),
            bob_strategy: bob.clone(),
            lookahead: state.lookahead(),
            b0: state.b0().clone(),
            a0: state.a0().clone(),
            rounds: state.rounds().to_vec(),
            certification,
        }
    }

    /// Replays Bob's recorded discs, checking that Alice's answers match the record.
    pub fn replay(&self, budget: u64) -> Result<GameState> {
        let params = ConstructionParams::try_from(self.params.clone())?;
        let mut state = GameState::start(params, self.b0.clone(), self.lookahead, budget)?;
        if state.a0() != &self.a0 {
            return Err(Error::Violation("recorded A₀ differs from the replay".into()));
        }
        for rec in &self.rounds {
            let got = state.alice_move(rec.bob.clone())?;
            if got != rec {
                return Err(Error::Violation(format!(
                    "round {}: recorded answer differs from the replay",
                    state.round()
                )));
            }
        }
        Ok(state)
    }
}

/// Ratio identities of a completed game: `ρ(B_n) = βρ(A_(n−1))`, `ρ(A_n) = α₀ρ(B_n) = lR^(−n)/2`,
/// and the nesting `A_n ⊆ B_n ⊆ A_(n−1)`. Returns the first failing round.
pub fn check_identities(state: &GameState) -> std::result::Result<(), u32> {
    let p = state.params();
    let mut prev = state.a0().clone();
    let half = BigRational::new(BigInt::one(), 2.into());
    if state.a0().radius() != &(p.alpha0() * state.b0().radius()) || !state.b0().contains_disc(state.a0()) {
        return Err(0);
    }
    for (i, rec) in state.rounds().iter().enumerate() {
        let n = i as u32 + 1;
        let ok = rec.bob.radius() == &(p.beta() * prev.radius())
            && rec.alice.radius() == &(p.alpha0() * rec.bob.radius())
            && rec.alice.radius() == &p.side(n).scale(&half)
            && prev.contains_disc(&rec.bob)
            && rec.bob.contains_disc(&rec.alice)
            && rec.alice.radius().cmp(prev.radius()) == Ordering::Less;
        if !ok {
            return Err(n);
        }
        prev = rec.alice.clone();
    }
    Ok(())
}
