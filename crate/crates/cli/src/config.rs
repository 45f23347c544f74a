//! Run settings: command-line flags over `BADGAME_QBUDGET` over the config file over defaults.

use std::path::Path;

use anyhow::{bail, Context, Result};
use badgame::diophantine::{ConstructionParams, Mode, DEFAULT_M, DEFAULT_Q_BUDGET};
use badgame::par::Exec;
use badgame::{parse_quad, parse_rational, ExponentPair};
use serde::Deserialize;

pub const QBUDGET_ENV: &str = "BADGAME_QBUDGET";

/// Config file contents; every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub s: Option<String>,
    pub t: Option<String>,
    pub beta: Option<String>,
    pub l: Option<String>,
    pub c: Option<String>,
    pub mode: Option<Mode>,
    pub toy_r: Option<String>,
    pub toy_m: Option<u32>,
    pub seed: Option<u64>,
    pub lookahead: Option<u32>,
    pub rounds: Option<u32>,
    pub q_budget: Option<u64>,
    pub exec: Option<Exec>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `over` replace those here.
    pub fn overlay(self, over: FileConfig) -> FileConfig {
        FileConfig {
            s: over.s.or(self.s),
            t: over.t.or(self.t),
            beta: over.beta.or(self.beta),
            l: over.l.or(self.l),
            c: over.c.or(self.c),
            mode: over.mode.or(self.mode),
            toy_r: over.toy_r.or(self.toy_r),
            toy_m: over.toy_m.or(self.toy_m),
            seed: over.seed.or(self.seed),
            lookahead: over.lookahead.or(self.lookahead),
            rounds: over.rounds.or(self.rounds),
            q_budget: over.q_budget.or(self.q_budget),
            exec: over.exec.or(self.exec),
        }
    }
}

/// Fully resolved settings.
#[derive(Clone, Debug)]
pub struct Settings {
    pub st: ExponentPair,
    pub params: ConstructionParams,
    pub seed: u64,
    pub lookahead: u32,
    pub rounds: Option<u32>,
    pub q_budget: u64,
    pub exec: Exec,
}

impl Settings {
    /// `env_budget` is the raw value of [`QBUDGET_ENV`], if set; it beats the config file
    /// but not an explicit flag, which the caller has already folded into `flags`.
    pub fn resolve(file: FileConfig, flags: FileConfig, env_budget: Option<String>) -> Result<Self> {
        let flag_budget = flags.q_budget;
        let cfg = file.overlay(flags);
        let env_budget = match env_budget {
            Some(raw) => Some(
                raw.trim()
                    .parse::<u64>()
                    .with_context(|| format!("{QBUDGET_ENV} must be a nonnegative integer, got {raw:?}"))?,
            ),
            None => None,
        };
        let q_budget = flag_budget.or(env_budget).or(cfg.q_budget).unwrap_or(DEFAULT_Q_BUDGET);

        let st = ExponentPair::parse(cfg.s.as_deref().unwrap_or("1/3"), cfg.t.as_deref().unwrap_or("2/3"))?;
        let beta = parse_rational(cfg.beta.as_deref().unwrap_or("1/2"))?;
        let l = parse_quad(cfg.l.as_deref().unwrap_or("2"))?;
        let c = match cfg.c.as_deref().map(str::trim) {
            None | Some("auto") => None,
            Some(text) => Some(parse_rational(text)?),
        };
        let params = match cfg.mode.unwrap_or_default() {
            Mode::Strict => {
                if cfg.toy_r.is_some() || cfg.toy_m.is_some() {
                    bail!("toy_r and toy_m require mode toy");
                }
                ConstructionParams::strict(st, &beta, l, c)?
            }
            Mode::Toy => {
                let Some(r) = cfg.toy_r.as_deref() else {
                    bail!("mode toy needs toy_r");
                };
                ConstructionParams::toy(st, parse_quad(r)?, l, c, cfg.toy_m.unwrap_or(DEFAULT_M))?
            }
        };
        Ok(Self {
            st,
            params,
            seed: cfg.seed.unwrap_or(0),
            lookahead: cfg.lookahead.unwrap_or(1),
            rounds: cfg.rounds,
            q_budget,
            exec: cfg.exec.unwrap_or_default(),
        })
    }
}
