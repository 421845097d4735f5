use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::analysis::{king_capturable, prune_senses, static_win};
use super::bandit::bandit;
use super::config::{FinalChoice, PlannerConfig};
use super::stats::{ArmStats, NodeStats};
use crate::belief::OpponentModel;
use crate::eval::{action_index, Evaluation, Evaluator, TOP};
use crate::game::{Action, Color, Phase, PieceKind, Transition, WorldState};
use crate::tracking::{set_hash_of, subsample, synopsis, LimitedStateSet, PossibleStateSet, StepEvent};

/// Actions the planner considers for the side to act over `states`: pruned
/// senses, or requestable moves with under-promotions folded into the
/// queen promotion.
pub fn candidates(states: &[WorldState]) -> Vec<Action> {
    let first = &states[0];
    match first.phase() {
        Phase::Sense => prune_senses(states),
        Phase::Move => first
            .requestable_actions()
            .into_iter()
            .filter(|a| !matches!(a, Action::Move(m) if m.promotion.is_some_and(|p| p != PieceKind::Queen)))
            .collect(),
    }
}

/// Stopping rule for one search; it ends at whichever limit comes first.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchBudget {
    pub deadline: Option<Instant>,
    pub playouts: Option<usize>,
}

impl SearchBudget {
    pub fn playouts(n: usize) -> SearchBudget {
        SearchBudget { deadline: None, playouts: Some(n) }
    }

    pub fn until(deadline: Instant) -> SearchBudget {
        SearchBudget { deadline: Some(deadline), playouts: None }
    }

    fn exhausted(&self, done: usize) -> bool {
        self.playouts.is_some_and(|n| done >= n) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Invariant checks gathered during playouts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Audit {
    pub steps: usize,
    /// Steps where the determinized state was missing from `I` or `J`.
    pub intersection_violations: usize,
    pub backups: usize,
    /// Backups after which a path entry did not gain exactly one visit per
    /// occurrence.
    pub virtual_loss_violations: usize,
}

impl Audit {
    pub fn merge(&mut self, other: &Audit) {
        self.steps += other.steps;
        self.intersection_violations += other.intersection_violations;
        self.backups += other.backups;
        self.virtual_loss_violations += other.virtual_loss_violations;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    OnlyAction,
    StaticWin,
    Search,
    /// No playout finished; the root prior decided.
    Prior,
}

#[derive(Clone, Debug)]
pub struct RootArm {
    pub action: Action,
    pub prior: f32,
    pub stats: ArmStats,
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub action: Action,
    pub decision: Decision,
    pub playouts: usize,
    pub nodes: usize,
    pub root: Vec<RootArm>,
    pub audit: Audit,
}

/// DSMCP action selection for one player.
pub struct Planner<'a> {
    pub cfg: &'a PlannerConfig,
    pub evaluator: &'a dyn Evaluator,
    pub stats: &'a NodeStats,
    pub own_headset: String,
    /// Headset modelling the opponent.
    pub opponent_headset: String,
    /// Check playout invariants; on by default in debug builds.
    pub audit: bool,
}

type PathEntry = (u64, Color);

fn event_for(viewer: Color, actor: Color, action: Action, phase: Phase, t: &Transition) -> StepEvent {
    if viewer == actor {
        StepEvent::own(action, &t.actor)
    } else {
        StepEvent::opponent(phase, &t.other)
    }
}

impl<'a> Planner<'a> {
    pub fn new(cfg: &'a PlannerConfig, evaluator: &'a dyn Evaluator, stats: &'a NodeStats) -> Planner<'a> {
        Planner {
            cfg,
            evaluator,
            stats,
            own_headset: TOP.to_string(),
            opponent_headset: TOP.to_string(),
            audit: cfg!(debug_assertions),
        }
    }

    pub fn with_opponent(mut self, headset: &str) -> Planner<'a> {
        self.opponent_headset = headset.to_string();
        self
    }

    fn evaluate(&self, k: &LimitedStateSet, actions: &[Action], own: bool) -> Evaluation {
        let s = synopsis(k.states(), k.side_to_move());
        let headset = if own { &self.own_headset } else { &self.opponent_headset };
        self.evaluator.evaluate_one(&s, actions, headset)
    }

    fn arms(&self, hash: u64, actions: &[Action]) -> Vec<ArmStats> {
        actions.iter().map(|a| self.stats.get(NodeStats::key(hash, action_index(*a)))).collect()
    }

    /// A playout root: `J` from the beliefs, a state of `J` inside `X`, and
    /// `I` as random states of `X` including it.
    fn root_sets<R: Rng + ?Sized>(
        &self,
        beliefs: &[LimitedStateSet],
        x: &PossibleStateSet,
        ell_j: usize,
        rng: &mut R,
    ) -> (LimitedStateSet, LimitedStateSet, WorldState) {
        let drawn = beliefs.choose(rng).and_then(|j| {
            let inside: Vec<(usize, usize)> =
                j.states().iter().enumerate().filter_map(|(m, s)| x.find(s).map(|i| (m, i))).collect();
            inside.choose(rng).map(|&(m, i)| (j, m, i))
        });
        let (j, at_x, x0) = match drawn {
            Some((j, m, i)) => (subsample(j.states(), ell_j, Some(m), rng), i, x.get(i).clone()),
            None => {
                let i = rng.gen_range(0..x.len());
                (LimitedStateSet::singleton(x.get(i).clone()), i, x.get(i).clone())
            }
        };
        let i = subsample(x.states(), self.cfg.ell, Some(at_x), rng);
        (i, j, x0)
    }

    /// Average own policy over up to `b` belief samples.
    pub fn root_prior<R: Rng + ?Sized>(
        &self,
        beliefs: &[LimitedStateSet],
        x: &PossibleStateSet,
        actions: &[Action],
        rng: &mut R,
    ) -> Vec<f32> {
        let picked: Vec<&LimitedStateSet> = if beliefs.len() <= self.cfg.b {
            beliefs.iter().collect()
        } else {
            beliefs.choose_multiple(rng, self.cfg.b).collect()
        };
        let samples: Vec<LimitedStateSet> = if picked.is_empty() {
            vec![self.root_sets(&[], x, 1, rng).0]
        } else {
            picked.into_iter().map(|j| self.root_sets(std::slice::from_ref(j), x, 1, rng).0).collect()
        };
        let n = samples.len();
        let me = x.get(0).side_to_move();
        let syn: Vec<_> = samples.iter().map(|i| synopsis(i.states(), me)).collect();
        let batch: Vec<_> = syn.iter().map(|s| (s, actions)).collect();
        let mut prior = vec![0.0f32; actions.len()];
        for e in self.evaluator.evaluate(&batch, &self.own_headset) {
            for (p, v) in prior.iter_mut().zip(&e.policy) {
                *p += v / n as f32;
            }
        }
        prior
    }

    /// Successors of `set` under `event`, cut to `limit` members keeping
    /// `next`.
    fn progress<R: Rng + ?Sized>(
        &self,
        set: &LimitedStateSet,
        event: &StepEvent,
        next: &WorldState,
        limit: usize,
        audit: &mut Audit,
        rng: &mut R,
    ) -> LimitedStateSet {
        let mut pool = PossibleStateSet::with_capacity(set.len() * 2);
        let mut buf = Vec::new();
        let mut succ = Vec::new();
        for x in set.states() {
            succ.clear();
            event.successors(x, &mut buf, &mut succ);
            for y in succ.drain(..) {
                pool.insert(y);
            }
        }
        let must = match pool.find(next) {
            Some(i) => i,
            None => {
                audit.intersection_violations += 1;
                debug_assert!(false, "determinized successor missing after {event:?}");
                pool.insert(next.clone()).0
            }
        };
        subsample(pool.states(), limit, Some(must), rng)
    }

    /// Adds virtual loss along `path`; returns the visit counts seen before
    /// when auditing.
    fn add_virtual_loss(&self, path: &[PathEntry]) -> Option<Vec<f64>> {
        let before =
            (self.audit && self.distinct_slots(path)).then(|| path.iter().map(|(k, _)| self.stats.get(*k).n).collect());
        for (k, _) in path {
            self.stats.add_visits(*k, self.cfg.n_vl);
        }
        before
    }

    /// Backs up `value` for player `who` along `path`, retracting the
    /// virtual loss.
    fn backup(&self, path: &[PathEntry], who: Color, value: f64, before: Option<Vec<f64>>, audit: &mut Audit) {
        for (k, c) in path {
            self.stats.record(*k, if *c == who { value } else { -value }, 1.0 - self.cfg.n_vl);
        }
        audit.backups += 1;
        let Some(before) = before else { return };
        for (i, (k, _)) in path.iter().enumerate() {
            if path[..i].iter().any(|(o, _)| o == k) {
                continue;
            }
            let times = path.iter().filter(|(o, _)| o == k).count() as f64;
            if (self.stats.get(*k).n - before[i] - times).abs() > 1e-9 {
                audit.virtual_loss_violations += 1;
                debug_assert!(false, "virtual loss did not net to one visit");
            }
        }
    }

    fn distinct_slots(&self, path: &[PathEntry]) -> bool {
        let mask = self.stats.capacity() as u64 - 1;
        path.iter().all(|(a, _)| path.iter().all(|(b, _)| a == b || a & mask != b & mask))
    }

    /// One playout from the root; returns the number of evaluated nodes.
    #[allow(clippy::too_many_arguments)]
    fn playout<R: Rng + ?Sized>(
        &self,
        root_hash: u64,
        actions: &[Action],
        prior: &[f32],
        beliefs: &[LimitedStateSet],
        x: &PossibleStateSet,
        audit: &mut Audit,
        rng: &mut R,
    ) -> usize {
        let cfg = self.cfg;
        let me = x.get(0).side_to_move();
        let cautious = cfg.kappa > 0.0 && rng.gen::<f64>() < cfg.kappa;
        let ell_j = if cautious { cfg.ell_cautious } else { cfg.ell };
        let (mut i, mut j, mut xt) = self.root_sets(beliefs, x, ell_j, rng);
        let arms = self.arms(root_hash, actions);
        let a0 = bandit(&cfg.bandit_params(true), prior, &arms, true, rng);
        let mut path: Vec<PathEntry> = vec![(NodeStats::key(root_hash, action_index(actions[a0])), me)];
        let mut at = actions[a0];
        let mut depth = if xt.phase() == Phase::Sense { cfg.d_sense } else { cfg.d_move };
        let mut nodes = 0;
        let mut t = 0;
        while t <= depth {
            audit.steps += 1;
            if self.audit && !(i.contains(&xt) && j.contains(&xt)) {
                audit.intersection_violations += 1;
                debug_assert!(false, "I and J lost the determinized state");
            }
            let actor = xt.side_to_move();
            let phase = xt.phase();
            let tr = xt.apply_unchecked(at);
            let ev_i = event_for(me, actor, at, phase, &tr);
            let ev_j = event_for(me.opponent(), actor, at, phase, &tr);
            xt = tr.state;
            i = self.progress(&i, &ev_i, &xt, cfg.ell, audit, rng);
            j = self.progress(&j, &ev_j, &xt, ell_j, audit, rng);

            let won = if xt.is_terminal() {
                Some(actor)
            } else if cfg.static_analysis && king_capturable(&xt) {
                Some(xt.side_to_move())
            } else {
                None
            };
            if let Some(winner) = won {
                let before = self.add_virtual_loss(&path);
                self.backup(&path, winner, 1.0, before, audit);
                break;
            }

            let to_act = xt.side_to_move();
            let k = if to_act == me { &i } else { &j };
            let cands = candidates(k.states());
            let e = self.evaluate(k, &cands, to_act == me);
            nodes += 1;
            if self.stats.get(path.last().unwrap().0).n > cfg.z {
                depth += 1;
            }
            let before = self.add_virtual_loss(&path);
            let arms = self.arms(k.set_hash(), &cands);
            let pick = bandit(&cfg.bandit_params(false), &e.policy, &arms, false, rng);
            self.backup(&path, to_act, e.value as f64, before, audit);
            at = cands[pick];
            path.push((NodeStats::key(k.set_hash(), action_index(at)), to_act));
            t += 1;
        }
        nodes
    }

    /// Runs playouts from the player's possible states `x` and current
    /// beliefs until `budget` is spent, then picks an action.
    pub fn choose_action<R: Rng + ?Sized>(
        &self,
        beliefs: &[LimitedStateSet],
        x: &PossibleStateSet,
        budget: SearchBudget,
        rng: &mut R,
    ) -> SearchReport {
        assert!(!x.is_empty(), "search needs a possible state");
        let actions = candidates(x.states());
        let report = |action, decision, root| SearchReport {
            action,
            decision,
            playouts: 0,
            nodes: 0,
            root,
            audit: Audit::default(),
        };
        if actions.len() == 1 {
            return report(actions[0], Decision::OnlyAction, Vec::new());
        }
        if self.cfg.static_analysis {
            let refs: Vec<&WorldState> = x.iter().collect();
            if let Some(a) = static_win(&refs) {
                return report(a, Decision::StaticWin, Vec::new());
            }
        }
        let root_hash = set_hash_of(&mut x.iter().map(WorldState::zobrist).collect::<Vec<_>>());
        let prior = self.root_prior(beliefs, x, &actions, rng);
        let mut audit = Audit::default();
        let mut playouts = 0;
        let mut nodes = 0;
        while !budget.exhausted(playouts) {
            nodes += self.playout(root_hash, &actions, &prior, beliefs, x, &mut audit, rng);
            playouts += 1;
        }
        let arms = self.arms(root_hash, &actions);
        let root: Vec<RootArm> = actions
            .iter()
            .zip(&prior)
            .zip(&arms)
            .map(|((&action, &prior), &stats)| RootArm { action, prior, stats })
            .collect();
        let (best, decision) = match self.final_arm(&arms) {
            Some(b) => (b, Decision::Search),
            None => {
                log::debug!("no playout finished; falling back to the root prior");
                (argmax(prior.iter().map(|&p| p as f64)), Decision::Prior)
            }
        };
        SearchReport { action: actions[best], decision, playouts, nodes, root, audit }
    }

    fn final_arm(&self, arms: &[ArmStats]) -> Option<usize> {
        if arms.iter().all(|a| a.n <= 0.0) {
            return None;
        }
        let score = |a: &ArmStats| {
            if a.n <= 0.0 {
                return f64::NEG_INFINITY;
            }
            match self.cfg.final_choice {
                FinalChoice::ValueTotal => a.q,
                FinalChoice::Visits => a.n,
                FinalChoice::Mean => a.q / a.n,
            }
        };
        Some(argmax(arms.iter().map(score)))
    }
}

/// First index of the largest value.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// The opponent model behind belief sampling: the bandit over the
/// opponent's policy and the shared statistics.
impl OpponentModel for Planner<'_> {
    fn choose(&self, j: &LimitedStateSet, rng: &mut dyn RngCore) -> Action {
        let cands = candidates(j.states());
        if cands.len() == 1 {
            return cands[0];
        }
        let e = self.evaluate(j, &cands, false);
        let arms = self.arms(j.set_hash(), &cands);
        cands[bandit(&self.cfg.bandit_params(false), &e.policy, &arms, false, rng)]
    }
}
