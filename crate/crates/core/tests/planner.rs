use penumbral_core::belief::OpponentModel;
use penumbral_core::eval::{action_index, Heuristic};
use penumbral_core::game::{Action, Color, WorldState};
use penumbral_core::planner::{
    argmax_arm, bandit, candidates, king_capturable, prune_senses, static_win, winning_move, ArmStats, BanditKind,
    BanditParams, Decision, NodeStats, Planner, PlannerConfig, SearchBudget,
};
use penumbral_core::tracking::{LimitedStateSet, PossibleStateSet};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn state(s: &str) -> WorldState {
    s.parse().unwrap()
}

fn act(s: &str) -> Action {
    s.parse().unwrap()
}

fn set_of(states: &[&str]) -> PossibleStateSet {
    let mut x = PossibleStateSet::new();
    for s in states {
        x.insert(state(s));
    }
    x
}

fn ucb(c: f64, m: f64, phi: f64) -> BanditParams {
    BanditParams { kind: BanditKind::Ucb1, c, m, phi }
}

fn arm(n: f64, q: f64, min: f64) -> ArmStats {
    ArmStats { n, q, min }
}

// ---- bandit ----

#[test]
fn bandit_hand_example() {
    let p = ucb(2.0, f64::INFINITY, 0.0);
    let arms = [arm(1.0, 1.0, 1.0), arm(1.0, 0.0, 0.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(bandit(&p, &[0.5, 0.5], &arms, false, &mut rng), 0);
    let explore = 2.0 * 0.5 * (2f64.ln() / 1.0).sqrt();
    assert!((explore - 0.8326).abs() < 1e-4);
    assert!((penumbral_core::planner::score(&p, 0.5, &arms[0], 2.0) - (1.0 + explore)).abs() < 1e-12);
    assert!((penumbral_core::planner::score(&p, 0.5, &arms[1], 2.0) - explore).abs() < 1e-12);
}

#[test]
fn single_arm_is_returned() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for root in [false, true] {
        assert_eq!(bandit(&ucb(2.0, 1.0, 0.3), &[1.0], &[ArmStats::EMPTY], root, &mut rng), 0);
    }
}

#[test]
fn mixing_constant_extremes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // The deterministic branch would pick arm 1 (far higher mean).
    let arms = [arm(50.0, -40.0, -1.0), arm(50.0, 45.0, 0.0), arm(50.0, 0.0, -1.0)];
    let pi = [0.7f32, 0.1, 0.2];
    let mut counts = [0usize; 3];
    for _ in 0..20_000 {
        counts[bandit(&ucb(2.0, 0.0, 0.0), &pi, &arms, false, &mut rng)] += 1;
    }
    for (c, p) in counts.iter().zip(pi) {
        assert!((*c as f64 / 20_000.0 - p as f64).abs() < 0.015, "{counts:?}");
    }
    for n in [0.0, 1e-9, 3.0] {
        let arms = [arm(n, -n, -1.0), arm(n, n, 0.0)];
        for _ in 0..1000 {
            let a = bandit(&ucb(2.0, f64::INFINITY, 0.0), &[0.99, 0.01], &arms, false, &mut rng);
            assert_eq!(a, argmax_arm(&ucb(2.0, f64::INFINITY, 0.0), &[0.99, 0.01], &arms));
        }
    }
    // The root never samples, even with m = 0.
    for _ in 0..1000 {
        assert_eq!(bandit(&ucb(2.0, 0.0, 0.0), &pi, &arms, true, &mut rng), 1);
    }
}

#[test]
fn unvisited_arms_go_first_by_prior() {
    let p = ucb(2.0, f64::INFINITY, 0.0);
    let arms = [arm(3.0, 3.0, 1.0), ArmStats::EMPTY, ArmStats::EMPTY, ArmStats::EMPTY];
    assert_eq!(argmax_arm(&p, &[0.1, 0.2, 0.4, 0.3], &arms), 2);
    assert_eq!(argmax_arm(&p, &[0.1, 0.3, 0.3, 0.3], &arms), 1);
    let visited = [arm(1.0, 0.0, 0.0), arm(1.0, 0.0, 0.0)];
    assert_eq!(argmax_arm(&p, &[0.5, 0.5], &visited), 0);
}

#[test]
fn full_paranoia_ignores_the_mean() {
    let p = ucb(1e-9, f64::INFINITY, 1.0);
    let arms = [arm(10.0, 9.0, -0.9), arm(10.0, -5.0, -0.2)];
    assert_eq!(argmax_arm(&p, &[0.5, 0.5], &arms), 1);
    let p = ucb(1e-9, f64::INFINITY, 0.0);
    assert_eq!(argmax_arm(&p, &[0.5, 0.5], &arms), 0);
}

/// The bandit rule evaluated from scratch.
fn brute_force(kind: BanditKind, c: f64, phi: f64, pi: &[f32], arms: &[ArmStats]) -> usize {
    let n: f64 = arms.iter().map(|a| a.n).sum();
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, a) in arms.iter().enumerate() {
        let s = match kind {
            BanditKind::Ucb1 => (1.0 - phi) * (a.q / a.n) + phi * a.min + c * pi[i] as f64 * (n.ln() / a.n).sqrt(),
            BanditKind::Avop => {
                (1.0 - phi) * (a.q / (1.0 + a.n)) + phi * a.min + c * pi[i] as f64 * n.sqrt() / (1.0 + a.n)
            }
        };
        if s > best.0 {
            best = (s, i);
        }
    }
    best.1
}

fn random_case(rng: &mut ChaCha8Rng) -> (Vec<f32>, Vec<ArmStats>) {
    let k = rng.gen_range(2..40);
    let raw: Vec<f32> = (0..k).map(|_| rng.gen::<f32>()).collect();
    let total: f32 = raw.iter().sum();
    let pi = raw.iter().map(|p| p / total).collect();
    let arms = (0..k)
        .map(|_| {
            let n = rng.gen_range(1..200) as f64;
            let mean = rng.gen_range(-1.0..1.0);
            let min = rng.gen_range(-1.0..=mean);
            arm(n, mean * n, min)
        })
        .collect();
    (pi, arms)
}

#[test]
fn deterministic_branch_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..20_000 {
        let (pi, arms) = random_case(&mut rng);
        let kind = if case % 2 == 0 { BanditKind::Ucb1 } else { BanditKind::Avop };
        let c = rng.gen_range(0.1..4.0);
        let phi = rng.gen_range(0.0..1.0);
        let p = BanditParams { kind, c, m: f64::INFINITY, phi };
        assert_eq!(bandit(&p, &pi, &arms, false, &mut rng), brute_force(kind, c, phi, &pi, &arms));
    }
}

#[test]
fn shifting_every_value_keeps_the_choice() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5_000 {
        let (pi, arms) = random_case(&mut rng);
        let p = ucb(rng.gen_range(0.1..4.0), f64::INFINITY, rng.gen_range(0.0..1.0));
        let shift = rng.gen_range(-3.0..3.0);
        let moved: Vec<ArmStats> = arms.iter().map(|a| arm(a.n, a.q + shift * a.n, a.min + shift)).collect();
        assert_eq!(argmax_arm(&p, &pi, &arms), argmax_arm(&p, &pi, &moved));
    }
}

// ---- statistics table ----

#[test]
fn backup_traces() {
    let stats = NodeStats::new(1 << 10);
    let k = NodeStats::key(42, 7);
    stats.add_visits(k, 1.0);
    assert_eq!(stats.get(k).n, 1.0);
    stats.record(k, 0.5, 0.0);
    stats.add_visits(k, 1.0);
    stats.record(k, -0.5, 0.0);
    assert_eq!(stats.get(k), arm(2.0, 0.0, -0.5));
    stats.add_visits(k, 1.0);
    stats.record(k, 0.0, 0.0);
    assert_eq!(stats.get(k), arm(3.0, 0.0, -0.5));
    // No virtual loss: one visit per backup.
    let k2 = NodeStats::key(42, 8);
    stats.record(k2, 0.25, 1.0);
    assert_eq!(stats.get(k2), arm(1.0, 0.25, 0.25));
    assert_eq!(stats.total_visits(), 4.0);
}

#[test]
fn collisions_keep_the_newest_entry() {
    let stats = NodeStats::new(64);
    let keys: Vec<u64> = (0..65u64).map(|i| NodeStats::key(i, 0)).collect();
    for (i, k) in keys.iter().enumerate() {
        stats.record(*k, i as f64, 1.0);
    }
    let slot = |k: u64| k as usize & 63;
    for (i, k) in keys.iter().enumerate() {
        let newest = keys.iter().rposition(|o| slot(*o) == slot(*k)).unwrap();
        if newest == i {
            assert_eq!(stats.get(*k), arm(1.0, i as f64, i as f64));
        } else {
            assert_eq!(stats.get(*k), ArmStats::EMPTY);
        }
    }
}

proptest! {
    #[test]
    fn minimum_never_exceeds_the_mean(values in prop::collection::vec(-1.0f64..1.0, 1..30)) {
        let stats = NodeStats::new(16);
        let k = NodeStats::key(1, 1);
        for v in &values {
            stats.add_visits(k, 1.0);
            stats.record(k, *v, 0.0);
        }
        let a = stats.get(k);
        prop_assert_eq!(a.n, values.len() as f64);
        prop_assert!(a.min <= a.q / a.n + 1e-12);
    }
}

// ---- senses and forced wins ----

#[test]
fn rim_senses_and_uninformative_windows_are_pruned() {
    let x = set_of(&[
        "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR b s KQkq - - - - -",
        "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b s KQkq e3 - - - -",
    ]);
    let senses = prune_senses(x.iter());
    assert!(!senses.contains(&act("sense:a1")));
    assert!(!senses.contains(&act("sense:h8")));
    // Differences on e2, e3 and e4 only.
    for s in &senses {
        let Action::Sense(sq) = s else { panic!() };
        assert!((sq.file() as i8 - 4).abs() <= 1 && (1..=4).contains(&sq.rank()), "{s}");
    }
    assert_eq!(senses.len(), 3 * 4);
    let lone = set_of(&["rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w s KQkq - - - - -"]);
    assert_eq!(prune_senses(lone.iter()), vec![act("sense:b2")]);
}

#[test]
fn queenside_uncertainty_prunes_kingside_senses() {
    let x = set_of(&[
        "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR b s KQkq - - - - -",
        "rnbqkbnr/pppppppp/8/8/8/N7/PPPPPPPP/R1BQKBNR b s KQkq - - - - -",
    ]);
    let senses = prune_senses(x.iter());
    assert!(senses.iter().all(|s| matches!(s, Action::Sense(sq) if sq.file() <= 3)));
    assert!(senses.contains(&act("sense:b2")));
}

#[test]
fn uniform_king_capture_is_found() {
    let a = state("6k1/8/8/8/8/8/8/K5Q1 w m - - - - - -");
    let b = state("6k1/p7/8/8/8/8/8/K5Q1 w m - - - - - -");
    assert_eq!(winning_move(&[&a, &b]), Some(act("move:g1g8")));
    assert!(king_capturable(&a));
    let c = state("5k2/8/8/8/8/8/8/K5Q1 w m - - - - - -");
    assert_eq!(winning_move(&[&a, &c]), None);
    // The same rook request reaches the king on either square.
    let r1 = state("8/6k1/8/8/8/8/K7/6R1 w m - - - - - -");
    let r2 = state("6k1/8/8/8/8/8/K7/6R1 w m - - - - - -");
    assert_eq!(winning_move(&[&r1, &r2]), Some(act("move:g1g8")));
}

#[test]
fn a_sense_can_set_up_a_forced_win() {
    // King on g8 (queen takes) or h8 (rook takes); the requests differ, so
    // the sense must tell them apart.
    let a = state("6k1/8/4Q3/8/8/8/8/K6R w s - - - - - -");
    let b = state("7k/8/4Q3/8/8/8/8/K6R w s - - - - - -");
    let sense = static_win(&[&a, &b]).expect("a separating sense exists");
    let Action::Sense(sq) = sense else { panic!("{sense}") };
    assert!(
        penumbral_core::game::attacks::sense_window(sq).contains(penumbral_core::game::Square::from_coords(6, 7))
            || penumbral_core::game::attacks::sense_window(sq)
                .contains(penumbral_core::game::Square::from_coords(7, 7))
    );
    // A king that cannot be reached in one state leaves no forced win.
    let c = state("7k/7p/4Q3/8/8/8/8/K6R w s - - - - - -");
    assert_eq!(static_win(&[&a, &c]), None);
}

// ---- search ----

fn search(
    cfg: &PlannerConfig,
    x: &PossibleStateSet,
    beliefs: &[LimitedStateSet],
    n: usize,
    seed: u64,
) -> penumbral_core::planner::SearchReport {
    let stats = NodeStats::new(1 << 16);
    let planner = Planner::new(cfg, &Heuristic, &stats);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    planner.choose_action(beliefs, x, SearchBudget::playouts(n), &mut rng)
}

#[test]
fn trivial_roots_skip_search() {
    let cfg = PlannerConfig::desk();
    let x = set_of(&["rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w s KQkq - - - - -"]);
    let r = search(&cfg, &x, &[], 10, 0);
    assert_eq!((r.action, r.decision, r.playouts), (act("sense:b2"), Decision::OnlyAction, 0));
    let x = set_of(&["6k1/8/8/8/8/8/8/K5Q1 w m - - - - - -", "6k1/p7/8/8/8/8/8/K5Q1 w m - - - - - -"]);
    let r = search(&cfg, &x, &[], 10, 0);
    assert_eq!((r.action, r.decision), (act("move:g1g8"), Decision::StaticWin));
    let simple = PlannerConfig { static_analysis: false, ..cfg };
    let r = search(&simple, &x, &[], 10, 0);
    assert_eq!(r.decision, Decision::Search);
}

fn beliefs_for(x: &PossibleStateSet) -> Vec<LimitedStateSet> {
    x.iter().map(|s| LimitedStateSet::singleton(s.clone())).collect()
}

#[test]
fn hanging_the_queen_scores_worse() {
    let x = set_of(&["rnbqkbnr/pppppppp/8/8/8/3Q4/PPPPPPPP/RNB1KBNR w m KQkq - - - - -"]);
    let cfg = PlannerConfig { final_choice: penumbral_core::planner::FinalChoice::Mean, ..PlannerConfig::desk() };
    let r = search(&cfg, &x, &beliefs_for(&x), 1000, 4);
    assert_eq!(r.playouts, 1000);
    assert_eq!(r.audit.intersection_violations + r.audit.virtual_loss_violations, 0);
    let mean = |a: Action| {
        let s = r.root.iter().find(|r| r.action == a).unwrap().stats;
        assert!(s.n > 0.0);
        s.q / s.n
    };
    let hang = mean(act("move:d3d6"));
    let best = r.root.iter().filter(|a| a.stats.n > 0.0).map(|a| a.stats.q / a.stats.n).fold(f64::MIN, f64::max);
    assert!(hang < best, "hang {hang} best {best}");
    assert_ne!(r.action, act("move:d3d6"));
}

#[test]
fn searches_return_requestable_actions_and_keep_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = PlannerConfig::desk();
    for (m, bandit_kind) in [(1.0, BanditKind::Ucb1), (f64::INFINITY, BanditKind::Avop), (0.0, BanditKind::Ucb1)] {
        let cfg = PlannerConfig { m, bandit: bandit_kind, kappa: 0.5, phi: 0.2, z: 3.0, ..cfg.clone() };
        let mut truth = WorldState::initial();
        for _ in 0..30 {
            if truth.is_terminal() {
                break;
            }
            let x = set_of(&[&truth.to_string()]);
            let r = search(&cfg, &x, &beliefs_for(&x), 40, rng.gen());
            assert!(truth.requestable_actions().contains(&r.action), "{}", r.action);
            assert_eq!(r.audit.intersection_violations, 0);
            assert_eq!(r.audit.virtual_loss_violations, 0);
            let a = *truth.requestable_actions().choose(&mut rng).unwrap();
            truth = truth.apply(a).unwrap().state;
        }
    }
}

#[test]
fn visits_grow_by_one_per_path_entry_per_backup() {
    let x = set_of(&["rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b m KQkq e3 - - - -"]);
    let cfg = PlannerConfig { n_vl: 3.0, ..PlannerConfig::desk() };
    let stats = NodeStats::new(1 << 18);
    let planner = Planner::new(&cfg, &Heuristic, &stats);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let beliefs = beliefs_for(&x);
    let r = planner.choose_action(&beliefs, &x, SearchBudget::playouts(50), &mut rng);
    assert!(r.audit.backups > 50);
    assert_eq!(r.audit.virtual_loss_violations, 0);
    let root_visits: f64 = r.root.iter().map(|a| a.stats.n).sum();
    // Every backup reaches the root entry once.
    assert_eq!(root_visits, r.audit.backups as f64);
}

#[test]
fn the_planner_models_the_opponent_with_its_candidates() {
    let cfg = PlannerConfig::desk();
    let stats = NodeStats::new(1 << 10);
    let planner = Planner::new(&cfg, &Heuristic, &stats);
    let j = LimitedStateSet::singleton(state("rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b m KQkq e3 - - - -"));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cands = candidates(j.states());
    for _ in 0..100 {
        assert!(cands.contains(&planner.choose(&j, &mut rng)));
    }
    assert!(cands.iter().all(|a| action_index(*a) < 4161));
    let _ = Color::White;
}
