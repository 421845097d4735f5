//! Round-robin tournaments.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use penumbral_core::planner::TimeControl;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentFactory, AgentSpec};
use crate::elo::{estimate_elo, outcomes_from_records, EloOptions, EloTable};
use crate::game::{mix_seed, play_game, GameOptions};
use crate::record::{GameRecord, Termination};

/// A tournament file.
///
/// ```toml
/// games_per_pair = 20
/// seed = 7
///
/// [[agent]]
/// kind = "dsmcp_mixture"
/// overrides = { c = 2.0, kappa = 0.1 }
///
/// [[agent]]
/// kind = "network_only"
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TournamentConfig {
    #[serde(rename = "agent")]
    pub agents: Vec<AgentSpec>,
    /// Explicit pairs of agent names; every pair when absent.
    #[serde(default)]
    pub pairings: Option<Vec<[String; 2]>>,
    #[serde(default = "default_games")]
    pub games_per_pair: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_turn_cap")]
    pub turn_cap: u32,
    #[serde(default = "default_clock")]
    pub clock_seconds: f64,
    /// Per-action budget for every planning agent, applied before agent
    /// overrides. Defaults to one second per action.
    #[serde(default = "default_time")]
    pub time: TimeControl,
    /// Fresh-seed attempts for a game that ends in an error.
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    #[serde(default)]
    pub anchor: Option<String>,
    #[serde(default = "default_anchor_rating")]
    pub anchor_rating: f64,
    /// Track baselines up to this many states so records carry both
    /// players' counts.
    #[serde(default)]
    pub track_cap: Option<usize>,
}

fn default_games() -> usize {
    10
}
fn default_workers() -> usize {
    1
}
fn default_turn_cap() -> u32 {
    150
}
fn default_clock() -> f64 {
    900.0
}
fn default_time() -> TimeControl {
    TimeControl::Fixed { seconds: 1.0 }
}
fn default_retries() -> usize {
    2
}
fn default_anchor_rating() -> f64 {
    1000.0
}

impl TournamentConfig {
    pub fn new(agents: Vec<AgentSpec>, games_per_pair: usize) -> TournamentConfig {
        TournamentConfig {
            agents,
            pairings: None,
            games_per_pair,
            seed: 0,
            workers: default_workers(),
            turn_cap: default_turn_cap(),
            clock_seconds: default_clock(),
            time: default_time(),
            max_retries: default_retries(),
            anchor: None,
            anchor_rating: default_anchor_rating(),
            track_cap: None,
        }
    }

    pub fn load(path: &Path) -> anyhow::Result<TournamentConfig> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }

    /// Resolved agents with the tournament time control applied.
    pub fn factories(&self) -> anyhow::Result<Vec<AgentFactory>> {
        let mut names = Vec::new();
        let mut out = Vec::new();
        for spec in &self.agents {
            let mut spec = spec.clone();
            if spec.kind.uses_planner() && !spec.overrides.contains_key("time") {
                spec.overrides.insert("time".into(), toml::Value::try_from(self.time)?);
            }
            let f = spec.resolve()?;
            if names.contains(&f.name) {
                anyhow::bail!("two agents are named {}", f.name);
            }
            names.push(f.name.clone());
            out.push(f);
        }
        if out.len() < 2 {
            anyhow::bail!("a tournament needs at least two agents");
        }
        Ok(out)
    }

    fn pairs(&self, names: &[String]) -> anyhow::Result<Vec<(usize, usize)>> {
        match &self.pairings {
            None => Ok((0..names.len()).flat_map(|a| (a + 1..names.len()).map(move |b| (a, b))).collect()),
            Some(list) => list
                .iter()
                .map(|[a, b]| {
                    let find = |s: &String| {
                        names
                            .iter()
                            .position(|n| n == s)
                            .ok_or_else(|| anyhow::anyhow!("unknown agent {s} in pairings"))
                    };
                    Ok((find(a)?, find(b)?))
                })
                .collect(),
        }
    }
}

/// One scheduled game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub white: usize,
    pub black: usize,
    pub seed: u64,
}

/// Every pair plays `games` games, alternating colors starting with the
/// first agent as white.
pub fn schedule(pairs: &[(usize, usize)], games: usize, seed: u64) -> Vec<Fixture> {
    let mut out = Vec::with_capacity(pairs.len() * games);
    for &(a, b) in pairs {
        for g in 0..games {
            let (white, black) = if g % 2 == 0 { (a, b) } else { (b, a) };
            out.push(Fixture { white, black, seed: mix_seed(seed, out.len() as u64) });
        }
    }
    out
}

pub struct TournamentResult {
    pub records: Vec<GameRecord>,
    pub elo: EloTable,
    /// Games replayed after an error.
    pub retried: usize,
    /// Games still failing after every retry.
    pub failed: usize,
}

/// Plays one fixture, retrying with fresh seeds after errors.
pub fn play_fixture(
    factories: &[AgentFactory],
    f: &Fixture,
    opts: &GameOptions,
    max_retries: usize,
) -> (GameRecord, usize) {
    let mut seed = f.seed;
    let mut attempt = 0;
    loop {
        let mut white = factories[f.white].build();
        let mut black = factories[f.black].build();
        let r = play_game(white.as_mut(), black.as_mut(), seed, opts);
        if r.reason != Termination::Error || attempt >= max_retries {
            return (r, attempt);
        }
        attempt += 1;
        log::warn!("replaying game {} with a fresh seed after: {}", f.seed, r.error.as_deref().unwrap_or(""));
        seed = mix_seed(seed, 0xE0 + attempt as u64);
    }
}

/// Plays the whole schedule on `workers` threads, one game per worker at a
/// time, calling `progress` as games finish.
pub fn run_tournament(
    cfg: &TournamentConfig,
    mut progress: impl FnMut(usize, &GameRecord) + Send,
) -> anyhow::Result<TournamentResult> {
    let factories = cfg.factories()?;
    let names: Vec<String> = factories.iter().map(|f| f.name.clone()).collect();
    let fixtures = schedule(&cfg.pairs(&names)?, cfg.games_per_pair, cfg.seed);
    let opts = GameOptions {
        turn_cap: cfg.turn_cap,
        clock: Duration::from_secs_f64(cfg.clock_seconds),
        track_cap: cfg.track_cap,
        ..GameOptions::default()
    };
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<(GameRecord, usize)>>> = Mutex::new(vec![None; fixtures.len()]);
    let progress = Mutex::new(&mut progress);
    std::thread::scope(|s| {
        for _ in 0..cfg.workers.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(f) = fixtures.get(i) else { break };
                let out = play_fixture(&factories, f, &opts, cfg.max_retries);
                (progress.lock().unwrap())(i, &out.0);
                results.lock().unwrap()[i] = Some(out);
            });
        }
    });
    let mut records = Vec::with_capacity(fixtures.len());
    let mut retried = 0;
    let mut failed = 0;
    for (r, attempts) in results.into_inner().unwrap().into_iter().map(Option::unwrap) {
        retried += attempts;
        failed += (r.reason == Termination::Error) as usize;
        records.push(r);
    }
    if retried > 0 || failed > 0 {
        log::info!("{retried} games replayed after errors, {failed} still failing");
    }
    let elo = elo_for(&records, &names, cfg)?;
    Ok(TournamentResult { records, elo, retried, failed })
}

fn elo_for(records: &[GameRecord], names: &[String], cfg: &TournamentConfig) -> anyhow::Result<EloTable> {
    let (found, outcomes) = outcomes_from_records(records);
    // Keep configuration order for the table.
    let remap: Vec<usize> = found.iter().map(|n| names.iter().position(|m| m == n).unwrap()).collect();
    let outcomes: Vec<_> = outcomes
        .into_iter()
        .map(|mut o| {
            o.a = remap[o.a];
            o.b = remap[o.b];
            o
        })
        .collect();
    let anchor = cfg.anchor.clone().unwrap_or_else(|| {
        if names.iter().any(|n| n == "RandomBot") {
            "RandomBot".into()
        } else {
            names[0].clone()
        }
    });
    let opts = EloOptions { anchor, anchor_rating: cfg.anchor_rating, ..EloOptions::default() };
    Ok(estimate_elo(names, &outcomes, &opts)?)
}
