//! Simple opponents that need no evaluator.

use penumbral_core::game::{Move, SenseResult};
use penumbral_core::planner::prune_senses;
use penumbral_core::tracking::{StepEvent, Tracker, TrackingError};
use penumbral_core::{Action, Color, Phase, PieceKind, Square, WorldState};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{Agent, AgentError, Diagnostics, Turn};

fn interior(sq: Square) -> Square {
    Square::from_coords(sq.file().clamp(1, 6), sq.rank().clamp(1, 6))
}

fn random_interior_sense(rng: &mut ChaCha8Rng) -> Action {
    Action::Sense(Square::from_coords(rng.gen_range(1..7), rng.gen_range(1..7)))
}

/// Uniform over the requestable actions.
pub struct RandomBot {
    name: String,
    rng: ChaCha8Rng,
}

impl RandomBot {
    pub fn new(name: &str) -> RandomBot {
        RandomBot { name: name.to_string(), rng: ChaCha8Rng::seed_from_u64(0) }
    }
}

impl Agent for RandomBot {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&mut self, _color: Color, _opponent: &str, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn act(&mut self, turn: &Turn) -> Action {
        *turn.requestable.choose(&mut self.rng).expect("something is always requestable")
    }

    fn observe(&mut self, _event: &StepEvent) -> Result<(), AgentError> {
        Ok(())
    }
}

pub fn piece_value(kind: PieceKind) -> i32 {
    match kind {
        PieceKind::Pawn => 1,
        PieceKind::Knight | PieceKind::Bishop => 3,
        PieceKind::Rook => 5,
        PieceKind::Queen => 9,
        PieceKind::King => 1000,
    }
}

fn mirror(m: &str, color: Color) -> Move {
    let mv: Move = m.parse().unwrap();
    match color {
        Color::White => mv,
        Color::Black => Move { from: mv.from.flip_rank(), to: mv.to.flip_rank(), promotion: None },
    }
}

const RUSHES: [&[&str]; 3] =
    [&["b1c3", "c3b5", "b5d6", "d6e8"], &["g1h3", "h3f4", "f4h5", "h5f6", "f6e8"], &["e2e4", "d1h5", "h5f7", "f7e8"]];

/// Senses around where it last saw the enemy king, captures the king or the
/// most valuable piece it just saw, and otherwise walks a fixed attack
/// route toward the king's home square.
pub struct AttackerBot {
    name: String,
    rng: ChaCha8Rng,
    king: Square,
    seen: Option<SenseResult>,
    route: Vec<Move>,
    step: usize,
    color: Color,
}

impl AttackerBot {
    pub fn new(name: &str) -> AttackerBot {
        AttackerBot {
            name: name.to_string(),
            rng: ChaCha8Rng::seed_from_u64(0),
            king: Square::from_coords(4, 7),
            seen: None,
            route: Vec::new(),
            step: 0,
            color: Color::White,
        }
    }

    fn enemy(&self, sq: Square) -> Option<PieceKind> {
        let p = self.seen.as_ref()?.piece_at(sq)?;
        (p.color != self.color).then_some(p.kind)
    }

    fn choose_move(&mut self, turn: &Turn) -> Action {
        let pawns = turn.own[PieceKind::Pawn.index()];
        let moves: Vec<Move> = turn
            .requestable
            .iter()
            .filter_map(|a| a.as_move())
            .filter(|m| !(pawns.contains(m.from) && m.from.file() == m.to.file()))
            .collect();
        let mut best: Option<(i32, Vec<Move>)> = None;
        for sq in Square::all() {
            let Some(kind) = self.enemy(sq) else { continue };
            let options: Vec<Move> = moves.iter().copied().filter(|m| m.to == sq).collect();
            if options.is_empty() {
                continue;
            }
            let v = piece_value(kind);
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, options));
            }
        }
        if let Some((_, options)) = best {
            self.step = self.route.len();
            return Action::Move(*options.choose(&mut self.rng).unwrap());
        }
        if let Some(&mv) = self.route.get(self.step) {
            if let Some(a) =
                turn.requestable.iter().find(|a| a.as_move().is_some_and(|m| m.from == mv.from && m.to == mv.to))
            {
                return *a;
            }
            self.step = self.route.len();
        }
        *turn.requestable.choose(&mut self.rng).unwrap()
    }
}

impl Agent for AttackerBot {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&mut self, color: Color, _opponent: &str, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.color = color;
        self.king = Square::from_coords(4, color.opponent().back_rank());
        self.seen = None;
        let rush = RUSHES.choose(&mut self.rng).unwrap();
        self.route = rush.iter().map(|m| mirror(m, color)).collect();
        self.step = 0;
    }

    fn act(&mut self, turn: &Turn) -> Action {
        match turn.phase {
            Phase::Sense => Action::Sense(interior(self.king)),
            Phase::Move => self.choose_move(turn),
        }
    }

    fn observe(&mut self, event: &StepEvent) -> Result<(), AgentError> {
        match event {
            StepEvent::OwnSense { result } => {
                self.seen = Some(*result);
                if let Some((sq, _)) = result
                    .squares()
                    .find(|(_, p)| p.is_some_and(|p| p.color != self.color && p.kind == PieceKind::King))
                {
                    self.king = sq;
                }
            }
            StepEvent::OwnMove { requested, executed, .. } => {
                self.seen = None;
                let on_route = self
                    .route
                    .get(self.step)
                    .is_some_and(|m| requested.as_move().is_some_and(|r| r.from == m.from && r.to == m.to));
                if on_route && requested == executed {
                    self.step += 1;
                } else if on_route {
                    self.step = self.route.len();
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn material(x: &WorldState, color: Color) -> i32 {
    let side = |c: Color| -> i32 {
        [PieceKind::Pawn, PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen, PieceKind::King]
            .into_iter()
            .map(|k| x.pieces(c, k).count() as i32 * piece_value(k))
            .sum()
    };
    side(color) - side(color.opponent())
}

/// Tracks its possible states and picks the request with the best material
/// balance one ply ahead on a single sampled state. Plays randomly once the
/// tracker overflows.
pub struct MaterialBot {
    name: String,
    cap: usize,
    rng: ChaCha8Rng,
    color: Color,
    tracker: Tracker,
    random_actions: usize,
}

impl MaterialBot {
    pub fn new(name: &str, cap: usize) -> MaterialBot {
        MaterialBot {
            name: name.to_string(),
            cap,
            rng: ChaCha8Rng::seed_from_u64(0),
            color: Color::White,
            tracker: Tracker::with_window(Color::White, cap, 2),
            random_actions: 0,
        }
    }
}

impl Agent for MaterialBot {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&mut self, color: Color, _opponent: &str, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.color = color;
        self.tracker = Tracker::with_window(color, self.cap, 2);
        self.random_actions = 0;
    }

    fn act(&mut self, turn: &Turn) -> Action {
        if self.tracker.overflowed() {
            self.random_actions += 1;
            return match turn.phase {
                Phase::Sense => random_interior_sense(&mut self.rng),
                Phase::Move => *turn.requestable.choose(&mut self.rng).unwrap(),
            };
        }
        let x = self.tracker.current();
        match turn.phase {
            Phase::Sense => *prune_senses(x.iter()).choose(&mut self.rng).unwrap(),
            Phase::Move => {
                let state = x.states().choose(&mut self.rng).unwrap().clone();
                let mut best = i32::MIN;
                let mut picks = Vec::new();
                for &a in turn.requestable {
                    let after = state.apply_unchecked(a).state;
                    let v = if after.winner() == Some(self.color) { i32::MAX } else { material(&after, self.color) };
                    if v > best {
                        best = v;
                        picks.clear();
                    }
                    if v == best {
                        picks.push(a);
                    }
                }
                *picks.choose(&mut self.rng).unwrap()
            }
        }
    }

    fn observe(&mut self, event: &StepEvent) -> Result<(), AgentError> {
        if self.tracker.overflowed() {
            return Ok(());
        }
        match self.tracker.observe(event.clone()) {
            Ok(_) | Err(TrackingError::Overflowed { .. }) => Ok(()),
            Err(e) => Err(e.into()),
        }
    }

    fn tracker(&self) -> Option<&Tracker> {
        (!self.tracker.overflowed()).then_some(&self.tracker)
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            random_actions: self.random_actions,
            overflowed: self.tracker.overflowed(),
            ..Diagnostics::default()
        }
    }
}
