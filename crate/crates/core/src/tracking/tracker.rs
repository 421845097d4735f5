use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PossibleStateSet;
use crate::game::{Action, Color, Move, Observation, Phase, SenseResult, Square, WorldState};

/// One game action as seen by the tracking player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepEvent {
    OwnSense { result: SenseResult },
    OwnMove { requested: Action, executed: Action, capture: Option<Square> },
    OpponentSense,
    OpponentMove { capture: Option<Square> },
}

impl StepEvent {
    /// Event for an action the tracking player took and what it observed.
    pub fn own(action: Action, obs: &Observation) -> StepEvent {
        match action {
            Action::Sense(_) => StepEvent::OwnSense { result: obs.sense.expect("sense observation carries a result") },
            _ => StepEvent::OwnMove {
                requested: action,
                executed: obs.executed.expect("move observation carries the executed move"),
                capture: obs.capture,
            },
        }
    }

    /// Event for an opponent action, given the phase it was taken in.
    pub fn opponent(phase: Phase, obs: &Observation) -> StepEvent {
        match phase {
            Phase::Sense => StepEvent::OpponentSense,
            Phase::Move => StepEvent::OpponentMove { capture: obs.capture },
        }
    }

    pub fn is_own(&self) -> bool {
        matches!(self, StepEvent::OwnSense { .. } | StepEvent::OwnMove { .. })
    }

    /// Appends every successor of `x` consistent with this event.
    pub fn successors(&self, x: &WorldState, buf: &mut Vec<Move>, out: &mut Vec<WorldState>) {
        if x.is_terminal() {
            return;
        }
        match self {
            StepEvent::OwnSense { result } => {
                if result.matches(x) {
                    out.push(x.after_sense());
                }
            }
            StepEvent::OwnMove { requested, executed, capture } => {
                if x.substitute(*requested) == *executed {
                    let (next, cap) = x.after_move(executed.as_move());
                    if cap == *capture {
                        out.push(next);
                    }
                }
            }
            StepEvent::OpponentSense => out.push(x.after_sense()),
            StepEvent::OpponentMove { capture } => {
                if capture.is_none() {
                    out.push(x.after_move(None).0);
                }
                buf.clear();
                x.executable_moves(buf);
                for &mv in buf.iter() {
                    if x.capture_square_of(mv) == *capture {
                        out.push(x.after_move(Some(mv)).0);
                    }
                }
            }
        }
    }

    /// Whether some successor of `x` under this event lies in `next`.
    pub fn has_successor_in(&self, x: &WorldState, next: &PossibleStateSet) -> bool {
        let mut buf = Vec::new();
        let mut out = Vec::new();
        self.successors(x, &mut buf, &mut out);
        out.iter().any(|y| next.contains(y))
    }
}

/// Result of expanding a set by one event.
pub struct Expansion {
    pub set: PossibleStateSet,
    /// `(child, parent)` index pairs, one per generated successor.
    pub edges: Vec<(u32, u32)>,
    pub overflow: bool,
}

const CHUNK: usize = 512;
const CHUNKS_PER_ROUND: usize = 64;

/// Successors of every state in `prev` consistent with `event`, deduplicated.
/// Stops early with `overflow` set once more than `cap` states exist.
pub fn expand(prev: &PossibleStateSet, event: &StepEvent, cap: usize) -> Expansion {
    let states = prev.states();
    let mut set = PossibleStateSet::with_capacity(states.len().min(cap));
    let mut edges = Vec::with_capacity(states.len());
    let round = CHUNK * CHUNKS_PER_ROUND;
    for (r, group) in states.chunks(round).enumerate() {
        let base = r * round;
        let produced: Vec<Vec<(WorldState, u32)>> = group
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut buf = Vec::with_capacity(64);
                let mut succ = Vec::with_capacity(8);
                let mut out = Vec::with_capacity(chunk.len());
                for (i, x) in chunk.iter().enumerate() {
                    succ.clear();
                    event.successors(x, &mut buf, &mut succ);
                    let parent = (base + c * CHUNK + i) as u32;
                    out.extend(succ.drain(..).map(|y| (y, parent)));
                }
                out
            })
            .collect();
        for (child, parent) in produced.into_iter().flatten() {
            let (idx, _) = set.insert(child);
            edges.push((idx as u32, parent));
            if set.len() > cap {
                return Expansion { set, edges, overflow: true };
            }
        }
    }
    Expansion { set, edges, overflow: false }
}

/// Removes, from the back, every state with no successor in the next set.
/// `events[i]` leads from `history[i]` to `history[i + 1]`. This recomputes
/// successors and serves as the reference for [`Tracker`]'s edge-based pass.
pub fn retro_filter(history: &mut [PossibleStateSet], events: &[StepEvent]) {
    assert_eq!(events.len() + 1, history.len().max(1));
    for i in (0..history.len().saturating_sub(1)).rev() {
        let (head, tail) = history.split_at_mut(i + 1);
        let next = &tail[0];
        let keep: Vec<bool> = head[i].states().par_iter().map(|x| events[i].has_successor_in(x, next)).collect();
        if keep.iter().all(|k| *k) {
            continue;
        }
        head[i].retain_flags(&keep);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrackingError {
    #[error("no possible state is consistent with step {step} ({event:?})")]
    Empty { step: usize, event: StepEvent },
    #[error("tracking was abandoned after the state count exceeded {cap}")]
    Overflowed { cap: usize },
}

/// One tracked step: the possible states after an event and the edges back
/// to the previous step.
pub struct TrackStep {
    pub set: PossibleStateSet,
    pub edges: Vec<(u32, u32)>,
    /// `None` for the initial step.
    pub event: Option<StepEvent>,
}

/// What changed after observing an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepReport {
    /// Absolute index of the new step.
    pub step: usize,
    /// Oldest step whose set shrank during the backward pass, if any.
    pub oldest_changed: Option<usize>,
    pub size: usize,
}

/// Exact possible-state tracking for one player.
///
/// Keeps one [`TrackStep`] per observed game action (both players' senses
/// and moves). After each new step a backward pass removes earlier states
/// that have no surviving successor. Only the newest `window` steps are
/// retained; older ones are dropped.
pub struct Tracker {
    color: Color,
    cap: usize,
    window: usize,
    steps: VecDeque<TrackStep>,
    first: usize,
    overflow: bool,
    peak: usize,
}

pub const DEFAULT_CAP: usize = 9_000_000;

impl Tracker {
    pub fn new(color: Color, cap: usize) -> Tracker {
        Tracker::with_window(color, cap, usize::MAX)
    }

    pub fn with_window(color: Color, cap: usize, window: usize) -> Tracker {
        let mut steps = VecDeque::new();
        steps.push_back(TrackStep {
            set: PossibleStateSet::singleton(WorldState::initial()),
            edges: Vec::new(),
            event: None,
        });
        Tracker { color, cap, window: window.max(1), steps, first: 0, overflow: false, peak: 1 }
    }

    /// Starts from an arbitrary set instead of the initial position.
    pub fn from_set(color: Color, cap: usize, window: usize, set: PossibleStateSet) -> Tracker {
        let peak = set.len();
        let mut steps = VecDeque::new();
        steps.push_back(TrackStep { set, edges: Vec::new(), event: None });
        Tracker { color, cap, window: window.max(1), steps, first: 0, overflow: false, peak }
    }

    pub fn color(&self) -> Color {
        self.color
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    /// Largest set size seen so far.
    pub fn peak(&self) -> usize {
        self.peak
    }

    /// Absolute index of the newest step.
    pub fn current_step(&self) -> usize {
        self.first + self.steps.len() - 1
    }

    /// Absolute index of the oldest retained step.
    pub fn first_step(&self) -> usize {
        self.first
    }

    pub fn current(&self) -> &PossibleStateSet {
        &self.steps.back().unwrap().set
    }

    pub fn step(&self, index: usize) -> Option<&TrackStep> {
        index.checked_sub(self.first).and_then(|i| self.steps.get(i))
    }

    pub fn observe(&mut self, event: StepEvent) -> Result<StepReport, TrackingError> {
        if self.overflow {
            return Err(TrackingError::Overflowed { cap: self.cap });
        }
        let step = self.current_step() + 1;
        let exp = expand(self.current(), &event, self.cap);
        if exp.overflow {
            log::warn!("{} tracker exceeded {} states at step {step}; tracking stops", self.color, self.cap);
            self.overflow = true;
            self.peak = self.peak.max(exp.set.len());
            self.steps.clear();
            return Err(TrackingError::Overflowed { cap: self.cap });
        }
        if exp.set.is_empty() {
            return Err(TrackingError::Empty { step, event });
        }
        self.peak = self.peak.max(exp.set.len());
        let size = exp.set.len();
        self.steps.push_back(TrackStep { set: exp.set, edges: exp.edges, event: Some(event) });
        let oldest_changed = self.backward_pass();
        while self.steps.len() > self.window {
            self.steps.pop_front();
            self.first += 1;
            self.steps[0].edges = Vec::new();
        }
        Ok(StepReport { step, oldest_changed, size })
    }

    /// Edge-based backward filtering with early exit once a level is intact.
    fn backward_pass(&mut self) -> Option<usize> {
        let mut oldest = None;
        for i in (0..self.steps.len() - 1).rev() {
            let mut keep = vec![false; self.steps[i].set.len()];
            for &(_, parent) in &self.steps[i + 1].edges {
                keep[parent as usize] = true;
            }
            if keep.iter().all(|k| *k) {
                break;
            }
            oldest = Some(self.first + i);
            let map = self.steps[i].set.retain_flags(&keep);
            let child_edges = std::mem::take(&mut self.steps[i].edges);
            self.steps[i].edges =
                child_edges.into_iter().filter_map(|(c, p)| map[c as usize].map(|c| (c, p))).collect();
            for e in &mut self.steps[i + 1].edges {
                e.1 = map[e.1 as usize].expect("parent of a surviving child survives");
            }
        }
        oldest
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opponent_first_move_gives_21_states() {
        let mut t = Tracker::new(Color::Black, DEFAULT_CAP);
        t.observe(StepEvent::OpponentSense).unwrap();
        let r = t.observe(StepEvent::OpponentMove { capture: None }).unwrap();
        assert_eq!(r.size, 21);
        assert_eq!(t.current().len(), 21);
    }
}
