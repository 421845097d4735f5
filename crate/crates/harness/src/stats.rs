//! Possible-state counts recomputed from game records, and win rate by
//! uncertainty.

use std::io::Write;

use penumbral_core::tracking::{StepEvent, Tracker, TrackingError};
use penumbral_core::{Color, Phase};
use serde::Serialize;

use crate::record::{replay_with, GameRecord, Termination};

/// Default tracking cap for replays.
pub const REPLAY_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameStats {
    pub index: usize,
    pub players: [String; 2],
    pub winner: Option<Color>,
    /// Largest possible-state count per player; the cap when it overflowed.
    pub max_states: [usize; 2],
    pub overflowed: [bool; 2],
    /// Counts after each turn, white then black; `None` once overflowed.
    pub per_turn: Vec<[Option<usize>; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bucket {
    /// Inclusive lower and exclusive upper bound on max |X|.
    pub lo: usize,
    pub hi: usize,
    pub players: usize,
    /// Wins plus half the draws.
    pub score: f64,
    pub win_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayStats {
    pub games: Vec<GameStats>,
    pub skipped: usize,
    pub buckets: Vec<Bucket>,
    pub median_max_states: Option<f64>,
    /// Spearman correlation of bucket order against win percentage over
    /// buckets with at least [`MIN_BUCKET`] players.
    pub spearman: Option<f64>,
}

/// Smallest bucket that enters the correlation.
pub const MIN_BUCKET: usize = 10;

/// Replays one record with a fresh tracker per player.
pub fn replay_counts(record: &GameRecord, cap: usize) -> Result<GameStats, String> {
    let mut trackers = [Tracker::with_window(Color::White, cap, 2), Tracker::with_window(Color::Black, cap, 2)];
    let mut per_turn = Vec::new();
    let mut failure = None;
    replay_with(record, |x, action, t| {
        if failure.is_some() {
            return;
        }
        let actor = x.side_to_move();
        let phase = x.phase();
        for (c, tracker) in trackers.iter_mut().enumerate() {
            if tracker.overflowed() {
                continue;
            }
            let event = if c == actor.index() {
                StepEvent::own(action, &t.actor)
            } else {
                StepEvent::opponent(phase, &t.other)
            };
            match tracker.observe(event) {
                Ok(_) | Err(TrackingError::Overflowed { .. }) => {}
                Err(e) => failure = Some(e.to_string()),
            }
        }
        if phase == Phase::Move {
            per_turn.push(trackers.each_ref().map(|t| (!t.overflowed()).then(|| t.current().len())));
        }
    })
    .map_err(|e| e.to_string())?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(GameStats {
        index: 0,
        players: [record.white.clone(), record.black.clone()],
        winner: record.winner,
        max_states: trackers.each_ref().map(|t| if t.overflowed() { cap } else { t.peak() }),
        overflowed: trackers.each_ref().map(Tracker::overflowed),
        per_turn,
    })
}

/// Half-decade bucket of a state count: `[10^(i/2), 10^((i+1)/2))`.
fn bucket_of(n: usize) -> usize {
    ((n.max(1) as f64).log10() * 2.0 + 1e-9).floor() as usize
}

fn bucket_bounds(i: usize) -> (usize, usize) {
    let b = |k: usize| 10f64.powf(k as f64 / 2.0).ceil() as usize;
    (b(i), b(i + 1))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties; `None` with fewer
/// than two points or a constant series.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..rx.len() {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx).powi(2);
        syy += (ry[i] - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// Recounts possible states for every record and relates each player's
/// largest count to its result. Aborted or unreplayable records are
/// skipped.
pub fn replay_stats(records: &[GameRecord], cap: usize) -> ReplayStats {
    let mut games = Vec::new();
    let mut skipped = 0;
    for (i, r) in records.iter().enumerate() {
        if r.reason == Termination::Error {
            skipped += 1;
            continue;
        }
        match replay_counts(r, cap) {
            Ok(mut g) => {
                g.index = i;
                games.push(g);
            }
            Err(e) => {
                log::warn!("skipping record {i}: {e}");
                skipped += 1;
            }
        }
    }
    summarize(games, skipped)
}

/// Buckets and correlation for already counted games.
pub fn summarize(games: Vec<GameStats>, skipped: usize) -> ReplayStats {
    let mut counts: Vec<(usize, f64)> = Vec::new();
    for g in &games {
        for c in Color::ALL {
            let score = match g.winner {
                Some(w) if w == c => 1.0,
                Some(_) => 0.0,
                None => 0.5,
            };
            counts.push((g.max_states[c.index()], score));
        }
    }
    let mut buckets: Vec<Bucket> = Vec::new();
    if let Some(top) = counts.iter().map(|&(n, _)| bucket_of(n)).max() {
        for i in 0..=top {
            let (lo, hi) = bucket_bounds(i);
            let members: Vec<f64> = counts.iter().filter(|&&(n, _)| bucket_of(n) == i).map(|&(_, s)| s).collect();
            if members.is_empty() {
                continue;
            }
            let score: f64 = members.iter().sum();
            buckets.push(Bucket {
                lo,
                hi,
                players: members.len(),
                score,
                win_pct: 100.0 * score / members.len() as f64,
            });
        }
    }
    let used: Vec<&Bucket> = buckets.iter().filter(|b| b.players >= MIN_BUCKET).collect();
    let order: Vec<f64> = used.iter().map(|b| b.lo as f64).collect();
    let pct: Vec<f64> = used.iter().map(|b| b.win_pct).collect();
    let spearman = spearman(&order, &pct);
    let median_max_states = median(counts.iter().map(|&(n, _)| n as f64).collect());
    ReplayStats { games, skipped, buckets, median_max_states, spearman }
}

impl ReplayStats {
    /// One row per bucket.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lo", "hi", "players", "score", "win_pct"])?;
        for b in &self.buckets {
            w.serialize((b.lo, b.hi, b.players, b.score, b.win_pct))?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per player per game.
    pub fn write_games_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["game", "color", "player", "max_states", "overflowed", "score"])?;
        for g in &self.games {
            for c in Color::ALL {
                let score = match g.winner {
                    Some(w) if w == c => 1.0,
                    Some(_) => 0.0,
                    None => 0.5,
                };
                let i = c.index();
                w.serialize((g.index, c.to_string(), &g.players[i], g.max_states[i], g.overflowed[i], score))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
