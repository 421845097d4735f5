//! The DSMCP player: exact tracking, particle beliefs and planning.

use std::sync::Arc;
use std::time::{Duration, Instant};

use penumbral_core::belief::{BeliefHistory, Budget};
use penumbral_core::eval::{select_headset, Evaluator, TOP};
use penumbral_core::planner::{
    candidates, sample_policy, Decision, NodeStats, Planner, PlannerConfig, SearchBudget, TimeControl,
};
use penumbral_core::tracking::{StepEvent, Tracker, TrackingError};
use penumbral_core::{Action, Color, Phase, Square};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{Agent, AgentError, Diagnostics, Turn};

/// Share of a timed decision spent refilling beliefs before searching.
pub const BELIEF_SHARE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Search,
    /// Sample the averaged root policy; no playouts.
    PolicyOnly,
}

pub struct Dsmcp {
    name: String,
    cfg: PlannerConfig,
    mode: Mode,
    evaluator: Arc<dyn Evaluator>,
    stats: NodeStats,
    color: Color,
    opponent_headset: String,
    tracker: Tracker,
    beliefs: BeliefHistory,
    rng: ChaCha8Rng,
    /// Check playout invariants; defaults to debug builds.
    pub audit: bool,
    diag: Diagnostics,
}

impl Dsmcp {
    pub fn new(name: &str, cfg: PlannerConfig, evaluator: Arc<dyn Evaluator>, mode: Mode) -> Dsmcp {
        let stats = NodeStats::new(1 << cfg.table_bits);
        Dsmcp {
            name: name.to_string(),
            tracker: Tracker::with_window(Color::White, cfg.state_cap, cfg.window),
            cfg,
            mode,
            evaluator,
            stats,
            color: Color::White,
            opponent_headset: TOP.to_string(),
            beliefs: BeliefHistory::new(Color::White),
            rng: ChaCha8Rng::seed_from_u64(0),
            audit: cfg!(debug_assertions),
            diag: Diagnostics::default(),
        }
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.cfg
    }

    pub fn beliefs(&self) -> &BeliefHistory {
        &self.beliefs
    }

    fn random_action(&mut self, turn: &Turn) -> Action {
        self.diag.random_actions += 1;
        match turn.phase {
            Phase::Sense => Action::Sense(Square::from_coords(self.rng.gen_range(1..7), self.rng.gen_range(1..7))),
            Phase::Move => *turn.requestable.choose(&mut self.rng).unwrap(),
        }
    }
}

impl Agent for Dsmcp {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&mut self, color: Color, opponent: &str, seed: u64) {
        self.color = color;
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.tracker = Tracker::with_window(color, self.cfg.state_cap, self.cfg.window);
        self.beliefs = BeliefHistory::new(color);
        self.stats.clear();
        self.opponent_headset = select_headset(opponent, &self.evaluator.headsets());
        self.diag = Diagnostics::default();
    }

    fn act(&mut self, turn: &Turn) -> Action {
        if self.tracker.overflowed() {
            return self.random_action(turn);
        }
        let start = Instant::now();
        let timed = self.cfg.time.budget(turn.remaining);
        let Dsmcp { cfg, mode, evaluator, stats, opponent_headset, tracker, beliefs, rng, audit, diag, .. } = self;
        let mut planner = Planner::new(cfg, evaluator.as_ref(), stats).with_opponent(opponent_headset);
        planner.audit = *audit;

        let refill = match timed {
            Some(d) => Budget { max_draws: usize::MAX, deadline: Some(start + d.mul_f64(BELIEF_SHARE)) },
            None => Budget::draws(cfg.n_particles),
        };
        let r = beliefs.repopulate(tracker, &planner, &cfg.belief(), refill, rng);
        diag.belief_draws += r.draws;
        diag.belief_fallbacks += r.fallbacks;

        let x = tracker.current();
        match mode {
            Mode::PolicyOnly => {
                let actions = candidates(x.states());
                let prior = planner.root_prior(beliefs.current(), x, &actions, rng);
                actions[sample_policy(&prior, rng)]
            }
            Mode::Search => {
                let budget = match (timed, cfg.time) {
                    (Some(d), _) => SearchBudget::until(start + d),
                    (None, TimeControl::Playouts { count }) => SearchBudget::playouts(count),
                    (None, _) => SearchBudget::until(start + Duration::from_secs(1)),
                };
                let report = planner.choose_action(beliefs.current(), x, budget, rng);
                diag.searches += 1;
                diag.playouts += report.playouts;
                diag.static_wins += (report.decision == Decision::StaticWin) as usize;
                if *audit {
                    diag.audited_steps += report.audit.steps;
                    diag.audited_backups += report.audit.backups;
                }
                diag.intersection_violations += report.audit.intersection_violations;
                diag.virtual_loss_violations += report.audit.virtual_loss_violations;
                report.action
            }
        }
    }

    fn observe(&mut self, event: &StepEvent) -> Result<(), AgentError> {
        if self.tracker.overflowed() {
            return Ok(());
        }
        match self.tracker.observe(event.clone()) {
            Ok(report) => {
                self.beliefs.sync(&self.tracker, report.oldest_changed.unwrap_or(report.step));
                Ok(())
            }
            Err(TrackingError::Overflowed { .. }) => {
                self.diag.overflowed = true;
                Ok(())
            }
            Err(e) => Err(e.into()),
        }
    }

    fn tracker(&self) -> Option<&Tracker> {
        (!self.tracker.overflowed()).then_some(&self.tracker)
    }

    fn diagnostics(&self) -> Diagnostics {
        self.diag.clone()
    }
}
