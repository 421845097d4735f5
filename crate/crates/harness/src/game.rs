//! Running one game between two agents.

use std::time::{Duration, Instant};

use penumbral_core::tracking::{StepEvent, Tracker, TrackingError};
use penumbral_core::{Action, Bitboard, Color, Phase, PieceKind, WorldState};

use crate::agent::{Agent, Turn};
use crate::record::{GameRecord, Seeds, Termination, TruthAudit, TurnRecord, SCHEMA_VERSION};

/// Per-game settings.
#[derive(Clone, Debug)]
pub struct GameOptions {
    /// Full moves after which the game is a draw.
    pub turn_cap: u32,
    /// Thinking time each player has for the whole game.
    pub clock: Duration,
    /// Flag a player whose clock runs out as the loser.
    pub enforce_clock: bool,
    /// Track players that keep no tracker of their own, up to this many
    /// states, so the record carries both players' state counts.
    pub track_cap: Option<usize>,
    /// Check after every action that each live tracker contains the true
    /// state.
    pub check_truth: bool,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions {
            turn_cap: 150,
            clock: Duration::from_secs(900),
            enforce_clock: true,
            track_cap: None,
            check_truth: false,
        }
    }
}

/// SplitMix64 step; derives independent seeds from one.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn own_pieces(x: &WorldState, color: Color) -> [Bitboard; 6] {
    PieceKind::ALL.map(|k| x.pieces(color, k))
}

struct Table<'a> {
    agents: [&'a mut dyn Agent; 2],
    /// Harness trackers for agents without their own.
    shadows: [Option<Tracker>; 2],
    truth: TruthAudit,
}

impl Table<'_> {
    fn tracker(&self, c: usize) -> Option<&Tracker> {
        match &self.shadows[c] {
            Some(t) => (!t.overflowed()).then_some(t),
            None => self.agents[c].tracker(),
        }
    }

    /// Delivers the observations of one action. Returns an error message if
    /// an agent's tracking failed.
    fn deliver(&mut self, events: [StepEvent; 2], truth: &WorldState, check: bool) -> Result<(), String> {
        for (c, event) in events.into_iter().enumerate() {
            if let Some(t) = &mut self.shadows[c] {
                if !t.overflowed() {
                    match t.observe(event.clone()) {
                        Ok(_) | Err(TrackingError::Overflowed { .. }) => {}
                        Err(e) => return Err(format!("harness tracker for {}: {e}", Color::ALL[c])),
                    }
                }
            }
            self.agents[c].observe(&event).map_err(|e| format!("{}: {e}", self.agents[c].name()))?;
        }
        if check {
            for c in 0..2 {
                let Some(t) = self.tracker(c) else { continue };
                let found = t.current().contains(truth);
                self.truth.checks += 1;
                if !found {
                    self.truth.violations += 1;
                    log::error!("{} lost track of the true state {truth}", Color::ALL[c]);
                }
            }
        }
        Ok(())
    }

    fn sizes(&self) -> [Option<usize>; 2] {
        [0, 1].map(|c| self.tracker(c).map(|t| t.current().len()))
    }
}

fn events_for(actor: Color, phase: Phase, action: Action, t: &penumbral_core::game::Transition) -> [StepEvent; 2] {
    let own = StepEvent::own(action, &t.actor);
    let other = StepEvent::opponent(phase, &t.other);
    match actor {
        Color::White => [own, other],
        Color::Black => [other, own],
    }
}

/// Plays one game. Agents act in turn, each sense followed by a move; both
/// agents observe every action. The game ends on king capture, when a
/// clock runs out, at the turn cap, or on a protocol or tracking error.
pub fn play_game(white: &mut dyn Agent, black: &mut dyn Agent, seed: u64, opts: &GameOptions) -> GameRecord {
    let started = Instant::now();
    let seeds = Seeds { game: seed, white: mix_seed(seed, 1), black: mix_seed(seed, 2) };
    let names = [white.name().to_string(), black.name().to_string()];
    white.start(Color::White, &names[1], seeds.white);
    black.start(Color::Black, &names[0], seeds.black);
    let shadow = |a: &dyn Agent, color: Color| match (opts.track_cap, a.tracker()) {
        (Some(cap), None) => Some(Tracker::with_window(color, cap, 2)),
        _ => None,
    };
    let shadows = [shadow(&*white, Color::White), shadow(&*black, Color::Black)];
    let mut table = Table { agents: [white, black], shadows, truth: TruthAudit::default() };

    let mut x = WorldState::initial();
    let mut clocks = [opts.clock; 2];
    let mut turns: Vec<TurnRecord> = Vec::new();
    let senses: Vec<Action> = Action::senses().collect();

    let finish = |table: &Table, turns: Vec<TurnRecord>, winner: Option<Color>, reason, error: Option<String>| {
        if let Some(e) = &error {
            log::warn!("game {seed} aborted: {e}");
        }
        GameRecord {
            v: SCHEMA_VERSION,
            white: names[0].clone(),
            black: names[1].clone(),
            seeds,
            turns,
            winner,
            reason,
            error,
            truth: table.truth,
            diagnostics: [table.agents[0].diagnostics(), table.agents[1].diagnostics()],
            ms: started.elapsed().as_secs_f64() * 1e3,
        }
    };

    loop {
        let mover = x.side_to_move();
        let m = mover.index();
        let number = x.ply() as u32 / 2 + 1;
        if number > opts.turn_cap {
            return finish(&table, turns, None, Termination::TurnCap, None);
        }

        // Sense.
        let t0 = Instant::now();
        let own = own_pieces(&x, mover);
        let sense = table.agents[m].act(&Turn { phase: Phase::Sense, requestable: &senses, own, remaining: clocks[m] });
        let sense_ms = t0.elapsed();
        clocks[m] = clocks[m].saturating_sub(sense_ms);
        if opts.enforce_clock && clocks[m].is_zero() {
            return finish(&table, turns, Some(mover.opponent()), Termination::Timeout, None);
        }
        if !matches!(sense, Action::Sense(_)) {
            let e = format!("{} requested {sense} when sensing", names[m]);
            return finish(&table, turns, None, Termination::Error, Some(e));
        }
        let tr = x.apply(sense).expect("senses are always allowed");
        let events = events_for(mover, Phase::Sense, sense, &tr);
        x = tr.state;
        if let Err(e) = table.deliver(events, &x, opts.check_truth) {
            return finish(&table, turns, None, Termination::Error, Some(e));
        }
        let mut turn = TurnRecord {
            number,
            color: mover,
            sense,
            sense_result: tr.actor.sense.unwrap(),
            requested: None,
            executed: None,
            capture: None,
            states: [None; 2],
            ms: [sense_ms.as_secs_f64() * 1e3, 0.0],
        };

        // Move.
        let requestable = x.requestable_actions();
        let t0 = Instant::now();
        let req =
            table.agents[m].act(&Turn { phase: Phase::Move, requestable: &requestable, own, remaining: clocks[m] });
        let move_ms = t0.elapsed();
        turn.ms[1] = move_ms.as_secs_f64() * 1e3;
        clocks[m] = clocks[m].saturating_sub(move_ms);
        if opts.enforce_clock && clocks[m].is_zero() {
            turn.states = table.sizes();
            turns.push(turn);
            return finish(&table, turns, Some(mover.opponent()), Termination::Timeout, None);
        }
        if !requestable.contains(&req) {
            let e = format!("{} requested {req}, which its pieces do not allow", names[m]);
            return finish(&table, turns, None, Termination::Error, Some(e));
        }
        let tr = x.apply(req).expect("requestable");
        debug_assert!(x.legal_actions().contains(&tr.actor.executed.unwrap()));
        let events = events_for(mover, Phase::Move, req, &tr);
        x = tr.state;
        turn.requested = Some(req);
        turn.executed = tr.actor.executed;
        turn.capture = tr.actor.capture;
        let delivered = table.deliver(events, &x, opts.check_truth);
        turn.states = table.sizes();
        turns.push(turn);
        if let Err(e) = delivered {
            return finish(&table, turns, None, Termination::Error, Some(e));
        }
        if let Some(w) = x.winner() {
            return finish(&table, turns, Some(w), Termination::KingCapture, None);
        }
    }
}
