//! Approximate belief states: an unweighted particle filter over the
//! opponent's information states.
//!
//! Each tracked step `i` has a collection of particles, every one a
//! [`LimitedStateSet`] seen from the opponent's side that intersects the
//! viewer's possible states `X_i`. New particles for step `i` are drawn by
//! advancing a random particle of step `i - 1` and rejecting candidates that
//! miss `X_i`.

use std::collections::VecDeque;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::game::{Action, Color, Phase, Square, WorldState};
use crate::tracking::{subsample, LimitedStateSet, PossibleStateSet, StepEvent, Tracker};

/// How the opponent picks an action at one of its information states.
pub trait OpponentModel {
    fn choose(&self, j: &LimitedStateSet, rng: &mut dyn RngCore) -> Action;
}

/// Uniform over all senses, or over every requestable move and pass.
pub struct UniformOpponent;

impl OpponentModel for UniformOpponent {
    fn choose(&self, j: &LimitedStateSet, rng: &mut dyn RngCore) -> Action {
        let x = &j.states()[0];
        match x.phase() {
            Phase::Sense => Action::Sense(Square::new(rng.gen_range(0..64))),
            Phase::Move => *x.requestable_actions().choose(rng).expect("pass is always requestable"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BeliefConfig {
    pub n_particles: usize,
    /// Rejection attempts before falling back to a singleton.
    pub k: usize,
    pub ell: usize,
}

impl Default for BeliefConfig {
    fn default() -> Self {
        BeliefConfig { n_particles: 4096, k: 512, ell: 128 }
    }
}

/// Opponent-perspective successors of `j` when the opponent acts with
/// `action`, keeping the members on which the opponent would observe what it
/// observes on `anchor`.
pub fn advance_opponent_action(j: &LimitedStateSet, anchor: &WorldState, action: Action) -> Vec<WorldState> {
    let seen = anchor.apply_unchecked(action).actor;
    j.states()
        .iter()
        .filter_map(|x| {
            let t = x.apply_unchecked(action);
            (t.actor == seen).then_some(t.state)
        })
        .collect()
}

/// Opponent-perspective successors of `j` when the viewer acts: every
/// outcome the opponent cannot tell apart from what happened.
pub fn advance_viewer_action(j: &LimitedStateSet, event: &StepEvent) -> Vec<WorldState> {
    let seen = match event {
        StepEvent::OwnSense { .. } => StepEvent::OpponentSense,
        StepEvent::OwnMove { capture, .. } => StepEvent::OpponentMove { capture: *capture },
        _ => unreachable!("viewer events only"),
    };
    let mut out = PossibleStateSet::new();
    let mut buf = Vec::new();
    let mut succ = Vec::new();
    for x in j.states() {
        succ.clear();
        seen.successors(x, &mut buf, &mut succ);
        for y in succ.drain(..) {
            out.insert(y);
        }
    }
    out.states().to_vec()
}

/// Outcome of one draw.
#[derive(Debug)]
pub enum Draw {
    Accepted { particle: LimitedStateSet, attempts: usize },
    Fallback(LimitedStateSet),
}

impl Draw {
    pub fn into_particle(self) -> LimitedStateSet {
        match self {
            Draw::Accepted { particle, .. } | Draw::Fallback(particle) => particle,
        }
    }
}

/// Rejection sampling of one particle for the step reached by `event` from
/// `prev_x`.
///
/// The opponent's action at a drawn particle comes from `model`. The
/// candidate keeps a member consistent with `x` whenever one exists, so a
/// candidate is accepted exactly when it intersects `x`.
#[allow(clippy::too_many_arguments)]
pub fn draw_sample<R: Rng>(
    prev: &[LimitedStateSet],
    prev_x: &PossibleStateSet,
    event: &StepEvent,
    x: &PossibleStateSet,
    model: &dyn OpponentModel,
    cfg: &BeliefConfig,
    rng: &mut R,
) -> Draw {
    if !prev.is_empty() {
        for attempt in 1..=cfg.k {
            let j = prev.choose(rng).unwrap();
            let members = if event.is_own() {
                advance_viewer_action(j, event)
            } else {
                let anchors: Vec<&WorldState> = j.states().iter().filter(|s| prev_x.contains(s)).collect();
                let Some(anchor) = anchors.choose(rng) else { continue };
                let action = model.choose(j, rng);
                advance_opponent_action(j, anchor, action)
            };
            let consistent: Vec<usize> = (0..members.len()).filter(|&i| x.contains(&members[i])).collect();
            if let Some(&must) = consistent.choose(rng) {
                let particle = subsample(&members, cfg.ell, Some(must), rng);
                return Draw::Accepted { particle, attempts: attempt };
            }
        }
    }
    Draw::Fallback(LimitedStateSet::singleton(x.states().choose(rng).expect("X is never empty").clone()))
}

/// Limits on one repopulation call.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_draws: usize,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn draws(n: usize) -> Budget {
        Budget { max_draws: n, deadline: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RepopulateReport {
    pub draws: usize,
    pub fallbacks: usize,
    pub complete: bool,
}

/// Particles for every step the viewer's tracker retains.
pub struct BeliefHistory {
    viewer: Color,
    first: usize,
    steps: VecDeque<Vec<LimitedStateSet>>,
}

impl BeliefHistory {
    pub fn new(viewer: Color) -> BeliefHistory {
        let mut steps = VecDeque::new();
        steps.push_back(vec![LimitedStateSet::singleton(WorldState::initial())]);
        BeliefHistory { viewer, first: 0, steps }
    }

    pub fn viewer(&self) -> Color {
        self.viewer
    }

    pub fn current_step(&self) -> usize {
        self.first + self.steps.len() - 1
    }

    pub fn particles(&self, step: usize) -> &[LimitedStateSet] {
        step.checked_sub(self.first).and_then(|i| self.steps.get(i)).map_or(&[], Vec::as_slice)
    }

    pub fn current(&self) -> &[LimitedStateSet] {
        self.steps.back().unwrap()
    }

    /// Aligns with `tracker` after it observed new steps and drops particles
    /// that no longer intersect their step's possible states, from step
    /// `from` onwards.
    pub fn sync(&mut self, tracker: &Tracker, from: usize) {
        while self.current_step() < tracker.current_step() {
            self.steps.push_back(Vec::new());
        }
        while self.first < tracker.first_step() {
            self.steps.pop_front();
            self.first += 1;
        }
        for step in from.max(self.first)..=self.current_step() {
            let x = &tracker.step(step).unwrap().set;
            self.steps[step - self.first].retain(|p| p.states().iter().any(|s| x.contains(s)));
        }
    }

    fn deficit(&self, cfg: &BeliefConfig) -> Option<usize> {
        // The oldest retained step only needs one particle; it has no
        // predecessor to draw from.
        if self.steps[0].is_empty() {
            return Some(self.first);
        }
        (1..self.steps.len()).find(|&i| self.steps[i].len() < cfg.n_particles).map(|i| self.first + i)
    }

    /// Fills deficits, oldest step first, until every step holds
    /// `n_particles` or the budget runs out.
    pub fn repopulate<R: Rng>(
        &mut self,
        tracker: &Tracker,
        model: &dyn OpponentModel,
        cfg: &BeliefConfig,
        budget: Budget,
        rng: &mut R,
    ) -> RepopulateReport {
        let mut report = RepopulateReport::default();
        loop {
            let Some(step) = self.deficit(cfg) else {
                report.complete = true;
                return report;
            };
            if report.draws >= budget.max_draws || budget.deadline.is_some_and(|d| Instant::now() >= d) {
                return report;
            }
            let x = &tracker.step(step).unwrap().set;
            let draw = if step == self.first {
                Draw::Fallback(LimitedStateSet::singleton(x.states().choose(rng).unwrap().clone()))
            } else {
                let ts = tracker.step(step).unwrap();
                let prev_x = &tracker.step(step - 1).unwrap().set;
                let event = ts.event.as_ref().unwrap();
                draw_sample(self.particles(step - 1), prev_x, event, x, model, cfg, rng)
            };
            report.draws += 1;
            if matches!(draw, Draw::Fallback(_)) {
                report.fallbacks += 1;
            }
            self.steps[step - self.first].push(draw.into_particle());
        }
    }
}
