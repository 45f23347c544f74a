//! `badgame`: attach lines, classify points, run verification suites, play and certify games.
//!
//! Reports are pretty JSON (CSV for `dynamics`) on stdout or `--out`. Exit status is 0
//! when nothing was violated, 1 on violations and 2 on usage or runtime errors.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use badgame::diophantine::{attach_line, certify_badness, RatPoint};
use badgame::dynamics::{trace, uniform_grid};
use badgame::game::{certify_transcript, BobStrategy, GameState, Transcript, DIRECT_SCAN_CAP};
use badgame::par::Exec;
use badgame::quad::rational_to_string;
use badgame::suites::{self, ConstancyOptions, SuiteReport};
use badgame::trees::TreeShape;
use badgame::{parse_rational, Disc, Quad, Square};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{FileConfig, Settings, QBUDGET_ENV};

#[derive(Debug, Parser)]
#[command(name = "badgame", version, about = "Schmidt's game for weighted badly approximable vectors")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true, visible_alias = "params")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    s: Option<String>,
    #[arg(long, global = true)]
    t: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    /// Side of the root square, e.g. `2` or `3/2 + 1/4√2`.
    #[arg(long, global = true)]
    l: Option<String>,
    /// Rational constant or `auto`.
    #[arg(long, global = true)]
    c: Option<String>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// R for toy mode.
    #[arg(long, global = true)]
    toy_r: Option<String>,
    /// m for toy mode.
    #[arg(long, global = true)]
    toy_m: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    lookahead: Option<u32>,
    #[arg(long, global = true)]
    q_budget: Option<u64>,
    #[arg(long, global = true, value_enum)]
    exec: Option<ExecArg>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Strict,
    Toy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExecArg {
    Sequential,
    Parallel,
}

#[derive(Debug, Args)]
struct PointArgs {
    /// `x,y` with rational coordinates.
    #[arg(long, conflicts_with_all = ["p", "r", "q"])]
    point: Option<String>,
    #[arg(long, requires_all = ["r", "q"])]
    p: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    q: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Line attached to a rational point, its height and band.
    Attach(PointArgs),
    /// Height band of a rational point.
    Classify(PointArgs),
    #[command(subcommand)]
    Verify(Verify),
    #[command(subcommand)]
    Tree(Tree),
    /// Play a full game and certify Alice's final disc.
    Play(PlayArgs),
    /// Certify a region, or replay a saved transcript and certify it again.
    Certify(CertifyArgs),
    /// Systole of the flowed lattice along a grid of times, as CSV.
    Dynamics(DynamicsArgs),
}

#[derive(Debug, Subcommand)]
enum Verify {
    /// Line attachment and height bounds over every point with q ≤ qmax.
    LemmaAug {
        #[arg(long, default_value_t = 200)]
        qmax: i64,
    },
    /// Line constancy and strip containment over directed and random windows.
    Constancy(ConstancyArgs),
    /// Same checks as `constancy`.
    Strip(ConstancyArgs),
    /// Strip hit counts against (3m − 2)^k.
    Stripcount {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Random subsquares always contain a whole color block.
    Grid {
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Growth recursion on worst-case or given counts.
    Growth {
        /// Comma-separated counts a_0, a_1, …
        #[arg(long, value_delimiter = ',')]
        counts: Option<Vec<u64>>,
        #[arg(long, default_value_t = 6)]
        levels: u32,
    },
}

#[derive(Debug, Args)]
struct ConstancyArgs {
    /// Levels to scan; defaults to the first two active levels.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    ks: Vec<u32>,
    /// Random windows per level.
    #[arg(long, default_value_t = 100)]
    samples: u64,
    /// Expected number of seed points per level.
    #[arg(long, default_value_t = 20_000)]
    seed_target: u64,
}

#[derive(Debug, Subcommand)]
enum Tree {
    /// `find_type_i` against brute force on random survival predicates.
    Search {
        #[arg(long, visible_alias = "n", default_value_t = 16)]
        successors: u32,
        #[arg(long, visible_alias = "d", default_value_t = 4)]
        colors: u32,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[arg(long, default_value_t = 200)]
        samples: u64,
    },
}

#[derive(Debug, Args)]
struct PlayArgs {
    /// `concentric`, `random` or `steering:x,y`.
    #[arg(long, default_value = "concentric")]
    bob: String,
    /// Defaults to the first active level plus 3.
    #[arg(long)]
    rounds: Option<u32>,
    /// Center of B₀ as `x,y`; its radius is fixed by `l`.
    #[arg(long, default_value = "0,0")]
    center: String,
    #[arg(long, default_value_t = DIRECT_SCAN_CAP)]
    qcap: u64,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    /// Square as JSON `{"x0": …, "y0": …, "side": …}`.
    #[arg(long, conflicts_with = "transcript", required_unless_present = "transcript")]
    region: Option<String>,
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Denominator bound for a region; overrides the recorded cap for a transcript.
    #[arg(long)]
    qmax: Option<u64>,
}

#[derive(Debug, Args)]
struct DynamicsArgs {
    #[arg(long, default_value = "0")]
    x: String,
    #[arg(long, default_value = "0")]
    y: String,
    #[arg(long, default_value_t = 5.0)]
    umax: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
}

/// A finished command: the report text and whether anything was violated.
struct Outcome {
    text: String,
    violated: bool,
}

impl Outcome {
    fn json(value: &impl Serialize, violated: bool) -> Result<Self> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        Ok(Self { text, violated })
    }

    fn suite(rep: &SuiteReport) -> Result<Self> {
        Self::json(rep, !rep.passed())
    }
}

fn settings(global: &GlobalArgs, rounds: Option<u32>) -> Result<Settings> {
    let file = match &global.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = FileConfig {
        s: global.s.clone(),
        t: global.t.clone(),
        beta: global.beta.clone(),
        l: global.l.clone(),
        c: global.c.clone(),
        mode: global.mode.map(|m| match m {
            ModeArg::Strict => badgame::diophantine::Mode::Strict,
            ModeArg::Toy => badgame::diophantine::Mode::Toy,
        }),
        toy_r: global.toy_r.clone(),
        toy_m: global.toy_m,
        seed: global.seed,
        lookahead: global.lookahead,
        rounds,
        q_budget: global.q_budget,
        exec: global.exec.map(|e| match e {
            ExecArg::Sequential => Exec::Sequential,
            ExecArg::Parallel => Exec::Parallel,
        }),
    };
    Settings::resolve(file, flags, std::env::var(QBUDGET_ENV).ok())
}

fn parse_pair(text: &str) -> Result<(BigRational, BigRational)> {
    let Some((x, y)) = text.split_once(',') else {
        bail!("expected `x,y`, got {text:?}");
    };
    Ok((parse_rational(x)?, parse_rational(y)?))
}

fn point_of(args: &PointArgs) -> Result<RatPoint> {
    if let Some(text) = &args.point {
        let (x, y) = parse_pair(text)?;
        return Ok(RatPoint::from_coords(&x, &y));
    }
    match (&args.p, &args.r, &args.q) {
        (Some(p), Some(r), Some(q)) => {
            let int = |s: &str| s.trim().parse::<BigInt>().with_context(|| format!("not an integer: {s:?}"));
            Ok(RatPoint::new(int(p)?, int(r)?, int(q)?)?)
        }
        _ => bail!("give --point x,y or all of --p --r --q"),
    }
}

fn attach(set: &Settings, args: &PointArgs, with_line: bool) -> Result<Outcome> {
    let point = point_of(args)?;
    let ap = attach_line(&point, set.st)?;
    let level = set.params.level_of_height(&ap.height)?;
    let band = set.params.band_of(&ap)?;
    let mut report = json!({
        "point": ap.point,
        "height": ap.height.to_string(),
        "level": level,
        "band": band,
    });
    if with_line {
        report["line"] = serde_json::to_value(&ap.line)?;
    }
    Outcome::json(&report, false)
}

fn constancy(set: &Settings, args: &ConstancyArgs) -> Result<Outcome> {
    let n0 = set.params.first_active_level();
    let opts = ConstancyOptions {
        levels: args.levels.clone().unwrap_or_else(|| vec![n0, n0 + 1]),
        ks: args.ks.clone(),
        random_windows: args.samples,
        seed: set.seed,
        seed_target: args.seed_target,
        budget: set.q_budget,
    };
    Outcome::suite(&suites::constancy(&set.params, &opts, set.exec)?)
}

fn verify(set: &Settings, cmd: &Verify) -> Result<Outcome> {
    match cmd {
        Verify::LemmaAug { qmax } => {
            let (aug, height) = suites::attachment(*qmax, &[set.st], set.exec)?;
            let violated = !aug.passed() || !height.passed();
            Outcome::json(&json!({"lemma_aug": aug, "height_bound": height}), violated)
        }
        Verify::Constancy(args) | Verify::Strip(args) => constancy(set, args),
        Verify::Stripcount { k, samples } => {
            Outcome::suite(&suites::strip_counts(&set.params, *k, *samples, set.seed, set.exec)?)
        }
        Verify::Grid { samples } => Outcome::suite(&suites::grid_property(&set.params, *samples, set.seed, set.exec)?),
        Verify::Growth { counts, levels } => {
            Outcome::suite(&suites::growth(set.params.m(), counts.as_deref(), *levels)?)
        }
    }
}

fn parse_bob(text: &str, seed: u64) -> Result<BobStrategy> {
    match text.split_once(':') {
        None if text == "concentric" => Ok(BobStrategy::Concentric),
        None if text == "random" || text == "seeded-random" => Ok(BobStrategy::SeededRandom { seed }),
        Some(("steering", target)) => {
            let (x, y) = parse_pair(target)?;
            Ok(BobStrategy::Steering { x, y })
        }
        _ => bail!("unknown Bob strategy {text:?}; use concentric, random or steering:x,y"),
    }
}

fn play(set: &Settings, args: &PlayArgs) -> Result<Outcome> {
    let bob = parse_bob(&args.bob, set.seed)?;
    let (cx, cy) = parse_pair(&args.center)?;
    // l = 2α₀ρ(B₀)
    let radius = set.params.l() * &set.params.alpha0().recip() * &Quad::from_rational(BigRational::new(1.into(), 2.into()));
    let b0 = Disc::new(Quad::from_rational(cx), Quad::from_rational(cy), radius)?;
    let mut state = GameState::start(set.params.clone(), b0, set.lookahead, set.q_budget)?;
    let rounds = set.rounds.unwrap_or(set.params.first_active_level() + 3);
    state.play(&bob, rounds)?;
    if let Err(round) = badgame::game::check_identities(&state) {
        bail!("radius identities fail at round {round}");
    }
    let cert = certify_transcript(&state, &BigInt::from(args.qcap), set.q_budget)?;
    let violated = !cert.passed || !cert.band_recheck || !cert.direct_scan_passed;
    Outcome::json(&Transcript::from_state(&state, &bob, Some(cert)), violated)
}

fn certify(set: &Settings, args: &CertifyArgs) -> Result<Outcome> {
    if let Some(path) = &args.transcript {
        return recertify(set, path, args.qmax);
    }
    let region: Square = serde_json::from_str(args.region.as_deref().unwrap_or_default()).context("parsing --region")?;
    let q_max = BigInt::from(args.qmax.unwrap_or(DIRECT_SCAN_CAP));
    let cert = certify_badness(&region, &q_max, set.st, set.params.c(), set.q_budget)?;
    let report = json!({
        "region": region,
        "st": set.st.to_string(),
        "c": rational_to_string(set.params.c()),
        "certificate": cert,
    });
    Outcome::json(&report, !cert.passed())
}

fn recertify(set: &Settings, path: &Path, qmax: Option<u64>) -> Result<Outcome> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading transcript {}", path.display()))?;
    let transcript: Transcript = serde_json::from_str(&text).context("parsing transcript")?;
    let state = transcript.replay(set.q_budget)?;
    let recorded = transcript.certification.as_ref();
    let q_cap = match (qmax, recorded) {
        (Some(q), _) => BigInt::from(q),
        (None, Some(c)) => c.q_cap.clone(),
        (None, None) => BigInt::from(DIRECT_SCAN_CAP),
    };
    let cert = certify_transcript(&state, &q_cap, set.q_budget)?;
    let matches = recorded.map(|c| *c == cert);
    let violated = !cert.passed || !cert.band_recheck || !cert.direct_scan_passed || matches == Some(false);
    let report: Value = json!({
        "rounds": state.round(),
        "replay_matches": true,
        "matches_recorded": matches,
        "certification": cert,
    });
    Outcome::json(&report, violated)
}

fn dynamics(set: &Settings, args: &DynamicsArgs) -> Result<Outcome> {
    let x = parse_rational(&args.x)?;
    let y = parse_rational(&args.y)?;
    let grid = uniform_grid(args.umax, args.step)?;
    let tr = trace(&x, &y, set.st, &grid, set.exec)?;
    Ok(Outcome {
        text: tr.to_csv(),
        violated: false,
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let rounds = match &cli.command {
        Command::Play(p) => p.rounds,
        _ => None,
    };
    let set = settings(&cli.global, rounds)?;
    match &cli.command {
        Command::Attach(args) => attach(&set, args, true),
        Command::Classify(args) => attach(&set, args, false),
        Command::Verify(cmd) => verify(&set, cmd),
        Command::Tree(Tree::Search {
            successors,
            colors,
            depth,
            samples,
        }) => {
            let shape = TreeShape::new(*successors, *colors, *depth)?;
            Outcome::suite(&suites::tree_search(&shape, *depth, *samples, set.seed, set.exec)?)
        }
        Command::Play(args) => play(&set, args),
        Command::Certify(args) => certify(&set, args),
        Command::Dynamics(args) => dynamics(&set, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|o| {
        match &cli.global.out {
            Some(path) => std::fs::write(path, &o.text).with_context(|| format!("writing {}", path.display()))?,
            None => print!("{}", o.text),
        }
        Ok(o)
    });
    match outcome {
        Ok(o) if o.violated => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
