//! Acceptance criteria, each at its stated size and tolerance.
//!
//! The criteria run one after another in a single test so that the runtime limits are
//! measured without other tests competing for the CPU. Each prints a `PASS [n]` or
//! `FAIL [n]` line; the test fails if any criterion does.

use std::time::{Duration, Instant};

use badgame::diophantine::{ConstructionParams, DEFAULT_Q_BUDGET};
use badgame::dynamics::{systole, FlowPoint};
use badgame::game::{BobStrategy, DIRECT_SCAN_CAP};
use badgame::par::Exec;
use badgame::suites::{self, ConstancyOptions, GameCase, SuiteReport};
use badgame::trees::TreeShape;
use badgame::ExponentPair;
use num_bigint::BigInt;
use num_rational::BigRational;

const SEED: u64 = 20_240_601;

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn default_params() -> ConstructionParams {
    ConstructionParams::defaults(&half()).unwrap()
}

fn pairs() -> [ExponentPair; 3] {
    [
        ExponentPair::from_parts(1, 1, 2).unwrap(),
        ExponentPair::from_parts(1, 2, 3).unwrap(),
        ExponentPair::from_parts(0, 1, 1).unwrap(),
    ]
}

struct Verdict {
    ok: bool,
    summary: String,
}

impl Verdict {
    fn of(reports: &[&SuiteReport], limit: Option<Duration>, elapsed: Duration, extra: Option<(bool, String)>) -> Self {
        let mut ok = reports.iter().all(|r| r.passed());
        let mut parts: Vec<String> = reports
            .iter()
            .map(|r| format!("{}: {} instances, {} violations", r.suite, r.instances, r.violations))
            .collect();
        for r in reports {
            parts.extend(r.failures.iter().take(3).cloned());
        }
        if let Some((extra_ok, msg)) = extra {
            ok &= extra_ok;
            parts.push(msg);
        }
        if let Some(limit) = limit {
            let within = elapsed <= limit;
            ok &= within;
            parts.push(format!("{:.1} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()));
        }
        Self {
            ok,
            summary: parts.join("; "),
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn constant_identities() -> Verdict {
    let (rep, took) = timed(|| suites::constants().unwrap());
    let n0 = default_params().first_active_level();
    Verdict::of(&[&rep], Some(Duration::from_secs(1)), took, Some((n0 == 13, format!("n0 = {n0}"))))
}

fn attachment_and_heights() -> (Verdict, Verdict) {
    let ((aug, height), took) = timed(|| suites::attachment(200, &pairs(), Exec::Parallel).unwrap());
    (
        Verdict::of(&[&aug], Some(Duration::from_secs(60)), took, None),
        Verdict::of(&[&height], None, took, None),
    )
}

fn grid() -> Verdict {
    let (rep, took) = timed(|| suites::grid_property(&default_params(), 100_000, SEED, Exec::Parallel).unwrap());
    Verdict::of(&[&rep], Some(Duration::from_secs(60)), took, None)
}

fn strip_counts() -> Verdict {
    let p = default_params();
    let (k1, t1) = timed(|| suites::strip_counts(&p, 1, 10_000, SEED, Exec::Parallel).unwrap());
    let (k2, t2) = timed(|| suites::strip_counts(&p, 2, 1_000, SEED, Exec::Parallel).unwrap());
    let note = format!(
        "max k=1 {} (bound {}), max k=2 {} (bound {})",
        k1.details["max_observed"], k1.details["bound"], k2.details["max_observed"], k2.details["bound"]
    );
    let bounds_ok = k1.details["bound"] == 34 && k2.details["bound"] == 1156;
    Verdict::of(&[&k1, &k2], None, t1 + t2, Some((bounds_ok, note)))
}

fn constancy_options(seed: u64) -> ConstancyOptions {
    ConstancyOptions {
        levels: vec![13, 14],
        ks: vec![1, 2],
        random_windows: 100,
        seed,
        seed_target: 20_000,
        budget: DEFAULT_Q_BUDGET,
    }
}

fn constancy() -> Verdict {
    let p = default_params();
    let levels = vec![p.first_active_level(), p.first_active_level() + 1];
    let opts = ConstancyOptions { levels, ..constancy_options(SEED) };
    let (rep, took) = timed(|| suites::constancy(&p, &opts, Exec::Parallel).unwrap());
    let note = format!(
        "windows with two or more band points: {}",
        rep.details["multi_point_windows"]
    );
    Verdict::of(&[&rep], Some(Duration::from_secs(600)), took, Some((true, note)))
}

fn game_cases(seeds: &[u64]) -> Vec<GameCase> {
    let mut cases = Vec::new();
    for beta in ["1/2", "3/4"] {
        for (i, &seed) in seeds.iter().enumerate() {
            let lookahead = 1 + (i as u32 % 2);
            let bobs = [
                BobStrategy::Concentric,
                BobStrategy::SeededRandom { seed },
                BobStrategy::Steering { x: half(), y: half() },
            ];
            for bob in bobs {
                cases.push(GameCase {
                    beta: beta.into(),
                    bob,
                    lookahead,
                });
            }
        }
    }
    cases
}

fn games() -> Verdict {
    let st = ExponentPair::from_parts(1, 2, 3).unwrap();
    let cases = game_cases(&[SEED, SEED + 1, SEED + 2]);
    let cap = BigInt::from(DIRECT_SCAN_CAP);
    let ((rep, certs), took) =
        timed(|| suites::games(st, &cases, 3, &cap, DEFAULT_Q_BUDGET, Exec::Parallel).unwrap());
    let least = certs.iter().map(|c| c.certified_q.clone()).min();
    let enough = certs.len() == cases.len() && least.as_ref().is_some_and(|q| *q >= BigInt::from(10_000));
    let note = format!(
        "{} games, least certified_q {}",
        cases.len(),
        least.map_or("none".into(), |q| q.to_string())
    );
    Verdict::of(&[&rep], Some(Duration::from_secs(900)), took, Some((enough, note)))
}

fn tree_search() -> Verdict {
    let shape = TreeShape::new(16, 4, 4).unwrap();
    let (rep, took) = timed(|| suites::tree_search(&shape, 4, 200, SEED, Exec::Parallel).unwrap());
    Verdict::of(&[&rep], Some(Duration::from_secs(60)), took, None)
}

fn dynamics() -> Verdict {
    let st = ExponentPair::from_parts(1, 2, 3).unwrap();
    let zero = BigRational::from_integer(0.into());
    let (failures, took) = timed(|| {
        let mut failures = Vec::new();
        for i in 0..=6 {
            let u = f64::from(i) * 0.5;
            let origin = FlowPoint::new(zero.clone(), zero.clone(), st, u).unwrap();
            let centre = FlowPoint::new(half(), half(), st, u).unwrap();
            for fp in [&origin, &centre] {
                if (fp.det() - 1.0).abs() > 1e-12 {
                    failures.push(format!("u = {u}: det {}", fp.det()));
                }
            }
            let s0 = systole(&origin, origin.required_bound()).unwrap().value;
            if (s0 - (-u).exp()).abs() > 1e-9 {
                failures.push(format!("u = {u}: systole at origin {s0}"));
            }
            let sc = systole(&centre, centre.required_bound()).unwrap().value;
            if sc > 2.0 * (-u).exp() {
                failures.push(format!("u = {u}: systole at (1/2, 1/2) {sc}"));
            }
        }
        failures
    });
    let note = if failures.is_empty() { "7 times checked".into() } else { failures.join(", ") };
    Verdict::of(&[], Some(Duration::from_secs(10)), took, Some((failures.is_empty(), note)))
}

/// Every suite twice with the same seed, once per execution mode, at reduced sizes.
fn determinism() -> Verdict {
    let p = default_params();
    let st = ExponentPair::from_parts(1, 2, 3).unwrap();
    let shape = TreeShape::new(16, 4, 4).unwrap();
    let cap = BigInt::from(DIRECT_SCAN_CAP);
    let run = |exec: Exec| -> Vec<String> {
        let (aug, height) = suites::attachment(40, &pairs(), exec).unwrap();
        let (game, certs) =
            suites::games(st, &game_cases(&[SEED])[..3], 3, &cap, DEFAULT_Q_BUDGET, exec).unwrap();
        let opts = ConstancyOptions { random_windows: 10, seed_target: 2_000, ..constancy_options(SEED) };
        let reports = [
            suites::constants().unwrap(),
            aug,
            height,
            suites::grid_property(&p, 2_000, SEED, exec).unwrap(),
            suites::strip_counts(&p, 1, 500, SEED, exec).unwrap(),
            suites::strip_counts(&p, 2, 50, SEED, exec).unwrap(),
            suites::constancy(&p, &opts, exec).unwrap(),
            suites::tree_search(&shape, 4, 20, SEED, exec).unwrap(),
            suites::growth(12, None, 6).unwrap(),
            game,
        ];
        let mut out: Vec<String> = reports.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
        out.push(serde_json::to_string(&certs).unwrap());
        out
    };
    let (runs, took) = timed(|| [run(Exec::Parallel), run(Exec::Parallel), run(Exec::Sequential)]);
    let differing: Vec<usize> =
        (0..runs[0].len()).filter(|&i| runs[0][i] != runs[1][i] || runs[0][i] != runs[2][i]).collect();
    let note = format!("{} reports compared, differing: {differing:?}", runs[0].len());
    Verdict::of(&[], None, took, Some((differing.is_empty(), note)))
}

#[test]
fn acceptance_criteria() {
    let mut verdicts: Vec<(u32, &str, Verdict)> = Vec::new();
    verdicts.push((1, "constant identities", constant_identities()));
    let (aug, heights) = attachment_and_heights();
    verdicts.push((2, "line attachment", aug));
    verdicts.push((3, "height bounds", heights));
    verdicts.push((4, "grid property", grid()));
    verdicts.push((5, "strip counts", strip_counts()));
    verdicts.push((6, "line constancy and strip containment", constancy()));
    verdicts.push((7, "end-to-end games", games()));
    verdicts.push((8, "type-(I) search", tree_search()));
    verdicts.push((9, "dynamics", dynamics()));
    verdicts.push((10, "determinism", determinism()));

    let mut failed = Vec::new();
    for (n, name, v) in &verdicts {
        println!("{} [{n}] {name}: {}", if v.ok { "PASS" } else { "FAIL" }, v.summary);
        if !v.ok {
            failed.push(*n);
        }
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
