//! Training data: synopsis dumps extracted from game records.

use std::io::Write;

use penumbral_core::eval::oriented_index;
use penumbral_core::tracking::dump::{DumpRecord, DumpWriter};
use penumbral_core::tracking::{subsample, synopsis, StepEvent, Tracker, TrackingError};
use penumbral_core::{Color, PieceKind, WorldState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::mix_seed;
use crate::record::{replay_with, GameRecord, Termination};

/// Actions before the end that count as "soon".
pub const SOON: usize = 5;

#[derive(Clone, Debug)]
pub struct ExtractOptions {
    /// Members per synopsis.
    pub ell: usize,
    /// Tracking cap; actions after a player's tracker overflows are skipped.
    pub cap: usize,
    pub seed: u64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { ell: 128, cap: 1_000_000, seed: 0 }
    }
}

fn piece_counts(x: &WorldState, me: Color) -> [u8; 12] {
    let mut out = [0u8; 12];
    for (i, k) in PieceKind::ALL.into_iter().enumerate() {
        out[i] = x.pieces(me, k).count() as u8;
        out[6 + i] = x.pieces(me.opponent(), k).count() as u8;
    }
    out
}

/// One example per action of each player while its tracker is live: the
/// synopsis of `ell` random possible states before acting, the action, the
/// result and the true piece counts. The headset tag is the acting
/// player's name.
pub fn extract(record: &GameRecord, opts: &ExtractOptions) -> Result<Vec<DumpRecord>, String> {
    if record.reason == Termination::Error {
        return Err("aborted game".into());
    }
    let total = record.actions();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, record.seeds.game));
    let mut trackers =
        [Tracker::with_window(Color::White, opts.cap, 2), Tracker::with_window(Color::Black, opts.cap, 2)];
    let mut out = Vec::new();
    let mut done = 0;
    let mut failure = None;
    replay_with(record, |x, action, t| {
        let me = x.side_to_move();
        let left = total - done;
        done += 1;
        if failure.is_some() {
            return;
        }
        let tr = &trackers[me.index()];
        if !tr.overflowed() {
            let l = subsample(tr.current().states(), opts.ell, None, &mut rng);
            let winner = match record.winner {
                Some(w) if w == me => 1,
                Some(_) => -1,
                None => 0,
            };
            out.push(DumpRecord {
                synopsis: synopsis(l.states(), me),
                action: oriented_index(action, me),
                winner,
                soon_win: winner == 1 && left <= SOON,
                soon_lose: winner == -1 && left <= SOON,
                piece_counts: piece_counts(x, me),
                headset: record.player(me).to_string(),
            });
        }
        for (c, tracker) in trackers.iter_mut().enumerate() {
            if tracker.overflowed() {
                continue;
            }
            let event = if c == me.index() {
                StepEvent::own(action, &t.actor)
            } else {
                StepEvent::opponent(x.phase(), &t.other)
            };
            match tracker.observe(event) {
                Ok(_) | Err(TrackingError::Overflowed { .. }) => {}
                Err(e) => failure = Some(e.to_string()),
            }
        }
    })
    .map_err(|e| e.to_string())?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Writes a `PNBS1` dump of every extractable record; returns the number of
/// examples written.
pub fn write_dump<W: Write>(out: W, records: &[GameRecord], opts: &ExtractOptions) -> std::io::Result<usize> {
    let mut w = DumpWriter::new(out)?;
    let mut n = 0;
    for (i, r) in records.iter().enumerate() {
        match extract(r, opts) {
            Ok(examples) => {
                for e in &examples {
                    w.write(e)?;
                }
                n += examples.len();
            }
            Err(e) => log::warn!("record {i} skipped: {e}"),
        }
    }
    w.into_inner().flush()?;
    Ok(n)
}
