//! Game records: one JSON object per line, schema version 1.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use penumbral_core::game::{SenseResult, Transition};
use penumbral_core::{Action, Color, Phase, Square, WorldState};
use serde::{Deserialize, Serialize};

use crate::agent::Diagnostics;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    KingCapture,
    TurnCap,
    Timeout,
    /// An agent broke the protocol or its tracking failed; the game does not
    /// count.
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub game: u64,
    pub white: u64,
    pub black: u64,
}

/// One player's sense and move.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    /// Full-move number, starting at 1.
    pub number: u32,
    pub color: Color,
    pub sense: Action,
    pub sense_result: SenseResult,
    /// Absent when the game ended before the move.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested: Option<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub executed: Option<Action>,
    /// Square where the move captured, seen by both players.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture: Option<Square>,
    /// Possible-state counts of white and black after this turn; `None`
    /// when that player was not tracked.
    pub states: [Option<usize>; 2],
    /// Thinking time for the sense and the move, in milliseconds.
    #[serde(default)]
    pub ms: [f64; 2],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthAudit {
    /// Tracker checks made while the game ran.
    pub checks: usize,
    /// Checks where the true state was missing.
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub v: u32,
    pub white: String,
    pub black: String,
    pub seeds: Seeds,
    pub turns: Vec<TurnRecord>,
    pub winner: Option<Color>,
    pub reason: Termination,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub truth: TruthAudit,
    #[serde(default)]
    pub diagnostics: [Diagnostics; 2],
    /// Wall-clock duration of the game in milliseconds.
    #[serde(default)]
    pub ms: f64,
}

impl GameRecord {
    pub fn player(&self, color: Color) -> &str {
        match color {
            Color::White => &self.white,
            Color::Black => &self.black,
        }
    }

    /// Score of `color`: 1 for a win, 0.5 for a draw.
    pub fn score(&self, color: Color) -> f64 {
        match self.winner {
            Some(w) if w == color => 1.0,
            Some(_) => 0.0,
            None => 0.5,
        }
    }

    /// Number of game actions, senses and moves.
    pub fn actions(&self) -> usize {
        self.turns.iter().map(|t| 1 + t.requested.is_some() as usize).sum()
    }

    /// The record with all wall-clock fields zeroed.
    pub fn without_timing(&self) -> GameRecord {
        let mut r = self.clone();
        r.ms = 0.0;
        for t in &mut r.turns {
            t.ms = [0.0; 2];
        }
        r
    }

    /// The moves as a numbered table, `sense : move` per player.
    pub fn table(&self) -> String {
        let cell = |t: &TurnRecord| {
            let sq = match t.sense {
                Action::Sense(sq) => sq.to_string(),
                a => a.to_string(),
            };
            let mv = match t.requested {
                Some(Action::Move(m)) => m.to_string(),
                Some(a) => a.to_string(),
                None => "-".into(),
            };
            format!("{sq} : {mv}")
        };
        let mut out = String::new();
        for t in &self.turns {
            match t.color {
                Color::White => out.push_str(&format!("{:>3}  {:<14}", t.number, cell(t))),
                Color::Black => {
                    if out.is_empty() {
                        out.push_str(&format!("{:>3}  {:<14}", t.number, "..."));
                    }
                    out.push_str(&cell(t));
                    out.push('\n');
                }
            }
        }
        if !out.ends_with('\n') && !out.is_empty() {
            out.push('\n');
        }
        out
    }

    /// Largest recorded state count per player, if tracked throughout.
    pub fn max_states(&self) -> [Option<usize>; 2] {
        let mut out = [Some(1), Some(1)];
        for t in &self.turns {
            for c in 0..2 {
                out[c] = match (out[c], t.states[c]) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
            }
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("unsupported record version {0}")]
    Version(u32),
    #[error("turn {turn}: {msg}")]
    Mismatch { turn: usize, msg: String },
    #[error("turn {turn}: {source}")]
    Rules { turn: usize, source: penumbral_core::game::RulesError },
    #[error("recorded result {recorded} but the replay gives {replayed}")]
    Result { recorded: String, replayed: String },
}

/// Re-simulates `record` from the initial position, calling `visit` with the
/// state before each action, the action and its transition. Every recorded
/// observation must come out identical.
pub fn replay_with(
    record: &GameRecord,
    mut visit: impl FnMut(&WorldState, Action, &Transition),
) -> Result<WorldState, ReplayError> {
    if record.v != SCHEMA_VERSION {
        return Err(ReplayError::Version(record.v));
    }
    let mut x = WorldState::initial();
    for (i, t) in record.turns.iter().enumerate() {
        let mismatch = |msg: String| ReplayError::Mismatch { turn: i, msg };
        if x.side_to_move() != t.color || x.phase() != Phase::Sense {
            return Err(mismatch(format!("expected {} to sense", x.side_to_move())));
        }
        let tr = x.apply(t.sense).map_err(|source| ReplayError::Rules { turn: i, source })?;
        if tr.actor.sense != Some(t.sense_result) {
            return Err(mismatch(format!("sense {} shows something else", t.sense)));
        }
        visit(&x, t.sense, &tr);
        x = tr.state;
        let Some(req) = t.requested else {
            if i + 1 != record.turns.len() {
                return Err(mismatch("a turn without a move must be the last".into()));
            }
            break;
        };
        let tr = x.apply(req).map_err(|source| ReplayError::Rules { turn: i, source })?;
        if tr.actor.executed != t.executed || tr.actor.capture != t.capture || tr.other.capture != t.capture {
            return Err(mismatch(format!("move {req} executes differently")));
        }
        visit(&x, req, &tr);
        x = tr.state;
    }
    let replayed = match (x.winner(), record.reason) {
        (Some(w), Termination::KingCapture) => Some(w),
        (None, Termination::KingCapture) => {
            return Err(ReplayError::Result { recorded: "king capture".into(), replayed: "no capture".into() })
        }
        (Some(w), _) => {
            return Err(ReplayError::Result { recorded: format!("{:?}", record.reason), replayed: format!("{w} wins") })
        }
        (None, _) => record.winner,
    };
    if replayed != record.winner {
        return Err(ReplayError::Result {
            recorded: format!("{:?}", record.winner),
            replayed: format!("{replayed:?}"),
        });
    }
    Ok(x)
}

pub fn replay(record: &GameRecord) -> Result<WorldState, ReplayError> {
    replay_with(record, |_, _, _| {})
}

pub fn write_jsonl<'a, W: Write>(out: W, records: impl IntoIterator<Item = &'a GameRecord>) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_jsonl<'a>(path: &Path, records: impl IntoIterator<Item = &'a GameRecord>) -> io::Result<()> {
    write_jsonl(File::create(path)?, records)
}

/// Parses one record per non-empty line. Records of other versions are
/// errors.
pub fn read_jsonl<R: io::Read>(input: R) -> Vec<Result<GameRecord, String>> {
    BufReader::new(input)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(n, line)| {
            let line = line.map_err(|e| format!("line {}: {e}", n + 1))?;
            let r: GameRecord = serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", n + 1))?;
            if r.v != SCHEMA_VERSION {
                return Err(format!("line {}: unsupported version {}", n + 1, r.v));
            }
            Ok(r)
        })
        .collect()
}

/// Reads a `.jsonl` file, or every `.jsonl` file in a directory in name
/// order. Unreadable lines are logged and skipped.
pub fn load_records(path: &Path) -> io::Result<Vec<GameRecord>> {
    let mut files = Vec::new();
    if path.is_dir() {
        for entry in std::fs::read_dir(path)? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e == "jsonl") {
                files.push(p);
            }
        }
        files.sort();
    } else {
        files.push(path.to_path_buf());
    }
    let mut out = Vec::new();
    for f in files {
        for r in read_jsonl(File::open(&f)?) {
            match r {
                Ok(r) => out.push(r),
                Err(e) => log::warn!("{}: {e}", f.display()),
            }
        }
    }
    Ok(out)
}
