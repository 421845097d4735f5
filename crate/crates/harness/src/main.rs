use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use penumbral::agent::{AgentKind, AgentSpec, Preset};
use penumbral::game::{mix_seed, play_game, GameOptions};
use penumbral::record::{load_records, save_jsonl, GameRecord, Termination};
use penumbral::selfplay::{write_dump, ExtractOptions};
use penumbral::stats::{replay_stats, REPLAY_CAP};
use penumbral::tourney::{run_tournament, TournamentConfig};

#[derive(Parser)]
#[command(name = "penumbral", version, about = "Reconnaissance blind chess with synoptic Monte Carlo planning")]
struct Cli {
    /// More log output; repeat for debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game and print it.
    Play(PlayArgs),
    /// Run a tournament from a TOML file.
    Tourney {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Recount possible states in logged games and relate them to results.
    Stats {
        /// A .jsonl file or a directory of them.
        #[arg(long)]
        replay: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Per-player rows instead of buckets.
        #[arg(long)]
        games_csv: Option<PathBuf>,
        #[arg(long, default_value_t = REPLAY_CAP)]
        cap: usize,
    },
    /// Play games and write their records and synopsis dumps for training.
    Selfplay(SelfplayArgs),
}

#[derive(Args)]
struct PlannerArgs {
    #[arg(long, value_enum, default_value = "desk")]
    preset: PresetArg,
    /// Seconds per action for planning agents.
    #[arg(long)]
    time: Option<f64>,
    /// Budget each action as a share of the remaining clock instead.
    #[arg(long, conflicts_with_all = ["time", "playouts"])]
    proportional: bool,
    /// Fixed playouts per action instead of a time budget.
    #[arg(long)]
    playouts: Option<usize>,
    /// Network weights; the heuristic evaluator otherwise.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Planner parameter overrides, `name=value` in TOML syntax.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum PresetArg {
    Desk,
    Full,
}

impl PlannerArgs {
    fn spec(&self, kind: AgentKind) -> anyhow::Result<AgentSpec> {
        let mut spec = AgentSpec::of(kind);
        spec.preset = match self.preset {
            PresetArg::Desk => Preset::Desk,
            PresetArg::Full => Preset::Full,
        };
        spec.weights = self.weights.clone();
        let time = if self.proportional {
            Some("{ mode = \"proportional\", divisor = 20.0, floor_ms = 100 }".to_string())
        } else if let Some(n) = self.playouts {
            Some(format!("{{ mode = \"playouts\", count = {n} }}"))
        } else {
            self.time.map(|s| format!("{{ mode = \"fixed\", seconds = {s:?} }}"))
        };
        let mut lines: Vec<String> = self.overrides.clone();
        if let Some(t) = time {
            lines.push(format!("time = {t}"));
        }
        let table: toml::Table = toml::from_str(&lines.join("\n")).context("parsing --set values")?;
        spec.overrides = table;
        Ok(spec)
    }
}

#[derive(Args)]
struct PlayArgs {
    #[arg(long, default_value = "DsmcpMixture")]
    white: AgentKind,
    #[arg(long, default_value = "RandomBot")]
    black: AgentKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append the game record to this JSONL file.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, default_value_t = 150)]
    turn_cap: u32,
    /// Track baselines up to this many states for the record.
    #[arg(long)]
    track_cap: Option<usize>,
    #[command(flatten)]
    planner: PlannerArgs,
}

#[derive(Args)]
struct SelfplayArgs {
    #[arg(long, default_value_t = 10)]
    games: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "DsmcpMixture")]
    white: AgentKind,
    #[arg(long, default_value = "DsmcpMixture")]
    black: AgentKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// States per synopsis.
    #[arg(long, default_value_t = 128)]
    ell: usize,
    #[arg(long, default_value_t = REPLAY_CAP)]
    cap: usize,
    #[arg(long, default_value_t = 150)]
    turn_cap: u32,
    #[command(flatten)]
    planner: PlannerArgs,
}

fn summary(r: &GameRecord) -> String {
    match (r.reason, r.winner) {
        (Termination::Error, _) => format!("aborted: {}", r.error.as_deref().unwrap_or("")),
        (reason, Some(w)) => format!("{} ({w}) wins by {reason:?}", r.player(w)),
        (reason, None) => format!("draw by {reason:?}"),
    }
}

fn play(args: PlayArgs) -> anyhow::Result<()> {
    let white = args.planner.spec(args.white)?.resolve()?;
    let mut black_spec = args.planner.spec(args.black)?;
    if args.white == args.black {
        black_spec.name = Some(format!("{}-2", args.black));
    }
    let black = black_spec.resolve()?;
    let opts = GameOptions { turn_cap: args.turn_cap, track_cap: args.track_cap, ..GameOptions::default() };
    let (mut w, mut b) = (white.build(), black.build());
    let record = play_game(w.as_mut(), b.as_mut(), args.seed, &opts);
    print!("{}", record.table());
    println!("{}", summary(&record));
    if let Some(path) = args.log {
        let mut records = if path.exists() { load_records(&path)? } else { Vec::new() };
        records.push(record);
        save_jsonl(&path, &records)?;
    }
    Ok(())
}

fn tourney(config: PathBuf, out: PathBuf, workers: Option<usize>) -> anyhow::Result<()> {
    let mut cfg = TournamentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
    if let Some(w) = workers {
        cfg.workers = w;
    }
    fs::create_dir_all(&out)?;
    let result = run_tournament(&cfg, |i, r| {
        log::info!("game {i}: {} vs {}: {}", r.white, r.black, summary(r));
    })?;
    save_jsonl(&out.join("games.jsonl"), &result.records)?;
    serde_json::to_writer_pretty(File::create(out.join("elo.json"))?, &result.elo)?;
    print!("{}", result.elo);
    if result.failed > 0 {
        eprintln!("{} games failed after retries", result.failed);
    }
    Ok(())
}

fn stats(replay: PathBuf, csv: Option<PathBuf>, games_csv: Option<PathBuf>, cap: usize) -> anyhow::Result<()> {
    let records = load_records(&replay)?;
    let s = replay_stats(&records, cap);
    println!("games replayed: {} (skipped {})", s.games.len(), s.skipped);
    match s.median_max_states {
        Some(m) => println!("median max |X|: {m}"),
        None => println!("median max |X|: -"),
    }
    for b in &s.buckets {
        println!("[{:>8}, {:>8})  {:>5} players  {:>5.1}%", b.lo, b.hi, b.players, b.win_pct);
    }
    match s.spearman {
        Some(r) => println!("spearman(win%, max |X|): {r:.3}"),
        None => println!("spearman(win%, max |X|): -"),
    }
    if let Some(path) = csv {
        s.write_csv(BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = games_csv {
        s.write_games_csv(BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn selfplay(args: SelfplayArgs) -> anyhow::Result<()> {
    let white = args.planner.spec(args.white)?.resolve()?;
    let mut black_spec = args.planner.spec(args.black)?;
    if args.white == args.black {
        black_spec.name = Some(format!("{}-2", args.black));
    }
    let black = black_spec.resolve()?;
    let opts = GameOptions { turn_cap: args.turn_cap, ..GameOptions::default() };
    fs::create_dir_all(&args.out)?;
    let mut records = Vec::with_capacity(args.games);
    for g in 0..args.games {
        let (mut w, mut b) = if g % 2 == 0 { (white.build(), black.build()) } else { (black.build(), white.build()) };
        let r = play_game(w.as_mut(), b.as_mut(), mix_seed(args.seed, g as u64), &opts);
        log::info!("game {g}: {}", summary(&r));
        records.push(r);
    }
    save_jsonl(&args.out.join("games.jsonl"), &records)?;
    let extract = ExtractOptions { ell: args.ell, cap: args.cap, seed: args.seed };
    let n = write_dump(BufWriter::new(File::create(args.out.join("synopses.pnbs"))?), &records, &extract)?;
    println!("{} games, {n} examples written to {}", records.len(), args.out.display());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match cli.command {
        Command::Play(a) => play(a),
        Command::Tourney { config, out, workers } => tourney(config, out, workers),
        Command::Stats { replay, csv, games_csv, cap } => stats(replay, csv, games_csv, cap),
        Command::Selfplay(a) => selfplay(a),
    }
}
