use std::collections::HashSet;

use penumbral_core::game::{Action, Bitboard, Color, PieceKind, Square, WorldState};
use penumbral_core::tracking::dump::{read_dump, DumpRecord, DumpWriter};
use penumbral_core::tracking::synopsis::{Fold, AND_OR_PAIRS, CONSTANT_PLANES, FOLDS, PLANES};
use penumbral_core::tracking::{
    expand, retro_filter, set_hash_of, subsample, synopsis, LimitedStateSet, PossibleStateSet, StepEvent, Tracker,
    TrackingError, DEFAULT_CAP,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sq(s: &str) -> Square {
    s.parse().unwrap()
}

fn act(s: &str) -> Action {
    s.parse().unwrap()
}

/// Truth plus one tracker per player.
struct Game {
    truth: WorldState,
    trackers: [Tracker; 2],
}

impl Game {
    fn new() -> Game {
        Game {
            truth: WorldState::initial(),
            trackers: [Tracker::new(Color::White, DEFAULT_CAP), Tracker::new(Color::Black, DEFAULT_CAP)],
        }
    }

    /// Random play can explode the state count; fuzzing games use a small cap
    /// and stop once either tracker gives up.
    fn capped(cap: usize) -> Game {
        Game {
            truth: WorldState::initial(),
            trackers: [Tracker::new(Color::White, cap), Tracker::new(Color::Black, cap)],
        }
    }

    fn play(&mut self, action: Action) {
        assert!(self.try_play(action), "tracker overflow");
    }

    fn try_play(&mut self, action: Action) -> bool {
        let actor = self.truth.side_to_move();
        let phase = self.truth.phase();
        let t = self.truth.apply(action).unwrap();
        let own = self.trackers[actor.index()].observe(StepEvent::own(action, &t.actor));
        let other = self.trackers[(!actor).index()].observe(StepEvent::opponent(phase, &t.other));
        self.truth = t.state;
        for r in [own, other] {
            match r {
                Ok(_) => {}
                Err(TrackingError::Overflowed { .. }) => return false,
                Err(e) => panic!("{e}"),
            }
        }
        true
    }

    fn truth_tracked(&self) -> bool {
        self.trackers.iter().all(|t| t.current().contains(&self.truth))
    }
}

const KNIGHT_GAME: [(&str, &str, &str, &str); 4] = [
    ("g6", "e2e4", "e3", "h7h5"),
    ("g7", "d2d4", "f2", "f7f5"),
    ("g6", "e4f5", "e4", "h5h4"),
    ("d7", "f1e2", "g4", "b8c6"),
];

fn play_knight_game() -> Game {
    let mut g = Game::new();
    for (ws, wm, bs, bm) in KNIGHT_GAME {
        g.play(Action::Sense(sq(ws)));
        g.play(act(&format!("move:{wm}")));
        g.play(Action::Sense(sq(bs)));
        g.play(act(&format!("move:{bm}")));
        assert!(g.truth_tracked());
    }
    g
}

#[test]
fn knight_game_white_has_238_states_after_b8c6() {
    let g = play_knight_game();
    assert_eq!(g.trackers[0].current().len(), 238);
}

#[test]
fn knight_game_counts_after_each_black_move() {
    // Counts from an independent python-chess replay.
    let mut g = Game::new();
    let expected = [21, 22, 21, 238];
    for ((ws, wm, bs, bm), want) in KNIGHT_GAME.into_iter().zip(expected) {
        g.play(Action::Sense(sq(ws)));
        g.play(act(&format!("move:{wm}")));
        g.play(Action::Sense(sq(bs)));
        g.play(act(&format!("move:{bm}")));
        assert_eq!(g.trackers[0].current().len(), want, "after {bm}");
    }
}

#[test]
fn knight_game_synopsis_shows_the_knight_may_be_on_c6() {
    let g = play_knight_game();
    let x = g.trackers[0].current();
    let must = x.find(&g.truth).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let l = subsample(x.states(), 128, Some(must), &mut rng);
    let s = synopsis(l.states(), Color::White);
    assert!(s.plane(27).contains(sq("c6")));
    assert!(!s.plane(20).contains(sq("c6")), "other states keep the knight at home");
}

fn random_requestable(x: &WorldState, rng: &mut impl Rng) -> Action {
    *x.requestable_actions().choose(rng).unwrap()
}

#[test]
fn random_games_keep_the_truth_tracked() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..6 {
        let mut g = Game::capped(50_000);
        for _ in 0..60 {
            if g.truth.is_terminal() {
                break;
            }
            let a = random_requestable(&g.truth, &mut rng);
            if !g.try_play(a) {
                break;
            }
            assert!(g.truth_tracked());
        }
    }
}

#[test]
fn opponent_first_move_branches_21_ways() {
    let mut g = Game::new();
    g.play(act("sense:e7"));
    g.play(act("move:e2e4"));
    assert_eq!(g.trackers[1].current().len(), 21);
    assert_eq!(g.trackers[0].current().len(), 1);
}

fn identities(set: &PossibleStateSet) -> HashSet<WorldState> {
    set.iter().cloned().collect()
}

#[test]
fn edge_pass_matches_recomputed_retro_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for game in 0..4 {
        let mut truth = WorldState::initial();
        let mut tracker = Tracker::new(Color::White, DEFAULT_CAP);
        let mut history = vec![PossibleStateSet::singleton(WorldState::initial())];
        let mut events = Vec::new();
        for _ in 0..32 {
            if truth.is_terminal() {
                break;
            }
            let phase = truth.phase();
            let actor = truth.side_to_move();
            let a = random_requestable(&truth, &mut rng);
            let t = truth.apply(a).unwrap();
            let ev =
                if actor == Color::White { StepEvent::own(a, &t.actor) } else { StepEvent::opponent(phase, &t.other) };
            tracker.observe(ev.clone()).unwrap();
            let next = expand(history.last().unwrap(), &ev, DEFAULT_CAP);
            history.push(next.set);
            events.push(ev);
            truth = t.state;
        }
        retro_filter(&mut history, &events);
        for (i, h) in history.iter().enumerate() {
            let tracked = &tracker.step(i).unwrap().set;
            assert_eq!(identities(h), identities(tracked), "game {game} step {i}");
        }
    }
}

#[test]
fn retro_filter_removes_ancestors_excluded_by_a_sense() {
    // Black sees White's e-pawn on e4 after White's first move, so every
    // other White first move is removed from the earlier step too.
    let mut g = Game::new();
    g.play(act("sense:e7"));
    g.play(act("move:e2e4"));
    let before = g.trackers[1].step(2).unwrap().set.len();
    assert_eq!(before, 21);
    g.play(act("sense:e4"));
    assert_eq!(g.trackers[1].current().len(), 1);
    assert_eq!(g.trackers[1].step(2).unwrap().set.len(), 1);
}

#[test]
fn retro_filter_is_a_fixpoint_on_consistent_history() {
    let mut history = vec![PossibleStateSet::singleton(WorldState::initial())];
    let events = vec![StepEvent::OpponentSense];
    history.push(expand(&history[0], &events[0], 10).set);
    let before: Vec<_> = history.iter().map(identities).collect();
    retro_filter(&mut history, &events);
    let after: Vec<_> = history.iter().map(identities).collect();
    assert_eq!(before, after);
    let mut single = vec![PossibleStateSet::singleton(WorldState::initial())];
    retro_filter(&mut single, &[]);
    assert_eq!(single[0].len(), 1);
}

#[test]
fn windowed_tracker_drops_old_steps() {
    let mut t = Tracker::with_window(Color::Black, DEFAULT_CAP, 3);
    t.observe(StepEvent::OpponentSense).unwrap();
    t.observe(StepEvent::OpponentMove { capture: None }).unwrap();
    t.observe(StepEvent::OpponentSense).unwrap();
    assert_eq!(t.current_step(), 3);
    assert_eq!(t.first_step(), 1);
    assert!(t.step(0).is_none());
    assert_eq!(t.current().len(), 21);
}

#[test]
fn overflow_stops_tracking() {
    let mut t = Tracker::new(Color::Black, 10);
    t.observe(StepEvent::OpponentSense).unwrap();
    assert!(t.observe(StepEvent::OpponentMove { capture: None }).is_err());
    assert!(t.overflowed());
    assert!(t.observe(StepEvent::OpponentSense).is_err());
}

// ---- synopsis ----

#[test]
fn initial_singleton_planes() {
    let s = synopsis(&[WorldState::initial()], Color::White);
    assert_eq!(s.plane(19).0, 0x00FF_0000_0000_0000);
    assert_eq!(s.plane(12).0, 0xFF00);
    assert_eq!(s.plane(10), Bitboard::FULL);
    // From Black's side the board is flipped.
    let b = synopsis(&[WorldState::initial()], Color::Black);
    assert_eq!(b.plane(12).0, 0xFF00);
    assert_eq!(b.plane(19).0, 0x00FF_0000_0000_0000);
    for i in 0..10 {
        assert_eq!(b.plane(i).0, CONSTANT_PLANES[i]);
    }
}

#[test]
fn and_or_semantics_on_a_queen() {
    let with: WorldState = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w s KQkq - - - - -".parse().unwrap();
    let without: WorldState = "rnb1kbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w s KQkq - - - - -".parse().unwrap();
    let s = synopsis(&[with, without], Color::White);
    assert!(s.plane(23).is_empty());
    assert_eq!(s.plane(30), sq("d8").bb());
    assert!(!s.plane(68).contains(sq("d8")));
    assert!(s.plane(68).contains(sq("e8")));
}

/// Consistent sets drawn from trackers along random games.
fn sample_sets(seed: u64, games: usize) -> Vec<(Vec<WorldState>, Color)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..games {
        let mut g = Game::capped(20_000);
        for _ in 0..40 {
            if g.truth.is_terminal() {
                break;
            }
            let a = random_requestable(&g.truth, &mut rng);
            if !g.try_play(a) {
                break;
            }
            for t in &g.trackers {
                let x = t.current().states();
                let n = rng.gen_range(1..=x.len().min(12));
                let members: Vec<WorldState> = x.choose_multiple(&mut rng, n).cloned().collect();
                out.push((members, t.color()));
            }
        }
    }
    out
}

#[test]
fn synopsis_properties_on_tracked_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (members, color) in sample_sets(21, 4) {
        let s = synopsis(&members, color);
        for (i, c) in CONSTANT_PLANES.iter().enumerate() {
            assert_eq!(s.plane(i).0, *c);
        }
        for (d, p) in AND_OR_PAIRS {
            assert!(s.plane(d).is_subset(s.plane(p)), "plane {d} not within {p}");
        }
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        assert_eq!(synopsis(&shuffled, color), s);
        if members.len() > 1 {
            let sub = synopsis(&members[..members.len() - 1], color);
            for i in 0..PLANES {
                match FOLDS[i] {
                    Fold::And => assert!(s.plane(i).is_subset(sub.plane(i)), "AND plane {i} grew"),
                    Fold::Or => assert!(sub.plane(i).is_subset(s.plane(i)), "OR plane {i} shrank"),
                    _ => assert_eq!(s.plane(i), sub.plane(i)),
                }
            }
        }
    }
}

#[test]
fn every_plane_has_a_fold() {
    assert_eq!(FOLDS.iter().filter(|f| **f == Fold::Constant).count(), 10);
    for (d, p) in AND_OR_PAIRS {
        assert_eq!((FOLDS[d], FOLDS[p]), (Fold::And, Fold::Or));
    }
    assert_eq!(FOLDS[68], Fold::And);
}

#[test]
fn dump_round_trip() {
    let s = synopsis(&[WorldState::initial()], Color::Black);
    let r = DumpRecord {
        synopsis: s,
        action: 4160,
        winner: -1,
        soon_win: false,
        soon_lose: true,
        piece_counts: [8, 2, 2, 2, 1, 1, 8, 2, 2, 2, 1, 1],
        headset: "Top".into(),
    };
    let mut w = DumpWriter::new(Vec::new()).unwrap();
    w.write(&r).unwrap();
    w.write(&DumpRecord { headset: String::new(), ..r.clone() }).unwrap();
    let bytes = w.into_inner();
    assert_eq!(&bytes[..5], b"PNBS1");
    assert_eq!(bytes.len(), 5 + 2 * (832 + 18) + 3);
    let back = read_dump(&bytes[..]).unwrap();
    assert_eq!(back.len(), 2);
    assert_eq!(back[0], r);
    assert!(read_dump(&bytes[..bytes.len() - 1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn set_hash_ignores_order(mut hashes in prop::collection::vec(any::<u64>(), 1..40), seed in any::<u64>()) {
        let a = set_hash_of(&mut hashes.clone());
        hashes.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(a, set_hash_of(&mut hashes));
    }

    #[test]
    fn set_hash_separates_sets(hashes in prop::collection::hash_set(any::<u64>(), 2..40)) {
        let v: Vec<u64> = hashes.into_iter().collect();
        let full = set_hash_of(&mut v.clone());
        prop_assert_ne!(full, set_hash_of(&mut v[1..].to_vec()));
    }

    #[test]
    fn subsample_is_deterministic(seed in any::<u64>(), limit in 1usize..30) {
        let mut g = Game::new();
        g.play(act("sense:e7"));
        g.play(act("move:e2e4"));
        g.play(act("sense:a1"));
        let pool = g.trackers[1].current().states().to_vec();
        let a = subsample(&pool, limit, Some(3), &mut ChaCha8Rng::seed_from_u64(seed));
        let b = subsample(&pool, limit, Some(3), &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(a.set_hash(), b.set_hash());
        prop_assert_eq!(a.len(), limit.min(pool.len()));
        prop_assert!(a.contains(&pool[3]));
    }
}

#[test]
fn limited_set_hash_matches_member_hashes() {
    let x = WorldState::initial();
    let y = x.apply(act("sense:d4")).unwrap().state;
    let a = LimitedStateSet::new(vec![x.clone(), y.clone()]);
    let b = LimitedStateSet::new(vec![y, x]);
    assert_eq!(a.set_hash(), b.set_hash());
    assert_eq!(a.side_to_move(), Color::White);
    let _ = PieceKind::Queen;
}
