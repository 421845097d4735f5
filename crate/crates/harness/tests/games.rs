use std::sync::Arc;

use penumbral::agent::{AgentSpec, Scripted};
use penumbral::baselines::{AttackerBot, MaterialBot, RandomBot};
use penumbral::dsmcp::{Dsmcp, Mode};
use penumbral::record::{read_jsonl, replay, replay_with, write_jsonl, Termination};
use penumbral::{play_game, AgentKind, GameOptions, GameRecord};
use penumbral_core::eval::Heuristic;
use penumbral_core::planner::{PlannerConfig, TimeControl};
use penumbral_core::{Action, Color};

fn act(s: &str) -> Action {
    s.parse().unwrap()
}

/// White wins on turn 8; after b8c6 White holds 238 possible states.
const WHITE: [(&str, &str); 8] = [
    ("g6", "e2e4"),
    ("g7", "d2d4"),
    ("g6", "e4f5"),
    ("d7", "f1e2"),
    ("g7", "e2h5"),
    ("b7", "d1h5"),
    ("e7", "h5e8"),
    ("g6", "g6e8"),
];
const BLACK: [(&str, &str); 7] =
    [("e3", "h7h5"), ("f2", "f7f5"), ("e4", "h5h4"), ("g4", "b8c6"), ("g4", "h8h5"), ("g5", "g7g6"), ("g6", "d7d6")];

fn script(list: &[(&str, &str)]) -> Vec<Action> {
    list.iter().flat_map(|(s, m)| [act(&format!("sense:{s}")), act(&format!("move:{m}"))]).collect()
}

fn knight_game(track_cap: Option<usize>) -> GameRecord {
    let mut w = Scripted::new("White", script(&WHITE));
    let mut b = Scripted::new("Black", script(&BLACK));
    let opts = GameOptions { track_cap, check_truth: true, ..GameOptions::default() };
    play_game(&mut w, &mut b, 0, &opts)
}

fn random_game(seed: u64, turn_cap: u32) -> GameRecord {
    let mut w = RandomBot::new("W");
    let mut b = RandomBot::new("B");
    play_game(&mut w, &mut b, seed, &GameOptions { turn_cap, ..GameOptions::default() })
}

#[test]
fn knight_game_game_ends_with_the_queen_taking_the_king() {
    let r = knight_game(Some(1_000_000));
    assert_eq!((r.winner, r.reason), (Some(Color::White), Termination::KingCapture));
    assert_eq!(r.turns.len(), 15);
    let last = r.turns.last().unwrap();
    assert_eq!((last.number, last.executed), (8, Some(act("move:g6e8"))));
    // h5e8 runs into the pawn on g6 and stops there.
    assert_eq!(r.turns[12].executed, Some(act("move:h5g6")));
    assert_eq!(r.turns[7].states[0], Some(238));
    assert_eq!(r.truth.violations, 0);
    assert!(r.truth.checks > 0);
    replay(&r).unwrap();
}

#[test]
fn knight_game_table_lists_senses_and_moves() {
    let table = knight_game(None).table();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[3].split_whitespace().collect::<Vec<_>>(), ["4", "d7", ":", "f1e2", "g4", ":", "b8c6"]);
    assert_eq!(lines[7].split_whitespace().collect::<Vec<_>>(), ["8", "g6", ":", "g6e8"]);
}

#[test]
fn same_seed_same_game() {
    for seed in 0..5 {
        assert_eq!(random_game(seed, 150).without_timing(), random_game(seed, 150).without_timing());
    }
    assert_ne!(random_game(1, 150).without_timing(), random_game(2, 150).without_timing());
}

#[test]
fn turn_cap_draws() {
    let r = random_game(3, 2);
    if r.reason == Termination::TurnCap {
        assert_eq!(r.winner, None);
        assert_eq!(r.turns.len(), 4);
        assert_eq!(r.turns.last().unwrap().number, 2);
    }
    // Kings stay home when both sides only sense.
    let mut w = Scripted::new("W", vec![act("sense:d4"), act("pass"), act("sense:d4"), act("pass")]);
    let mut b = Scripted::new("B", vec![act("sense:d4"), act("pass"), act("sense:d4"), act("pass")]);
    let r = play_game(&mut w, &mut b, 0, &GameOptions { turn_cap: 2, ..GameOptions::default() });
    assert_eq!((r.winner, r.reason, r.turns.len()), (None, Termination::TurnCap, 4));
    assert_eq!(r.score(Color::White), 0.5);
    replay(&r).unwrap();
}

#[test]
fn protocol_errors_abort_the_game() {
    let mut w = Scripted::new("W", vec![act("move:e2e4")]);
    let mut b = RandomBot::new("B");
    let r = play_game(&mut w, &mut b, 0, &GameOptions::default());
    assert_eq!(r.reason, Termination::Error);
    assert!(r.error.unwrap().contains("sensing"));

    // A knight cannot reach e5.
    let mut w = Scripted::new("W", vec![act("sense:d4"), act("move:g1e5")]);
    let r = play_game(&mut w, &mut b, 0, &GameOptions::default());
    assert_eq!(r.reason, Termination::Error);
    assert_eq!(r.winner, None);
}

#[test]
fn records_round_trip_and_replay() {
    let records: Vec<GameRecord> = (0..8).map(|s| random_game(s, 150)).collect();
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().all(|l| l.starts_with("{\"v\":1,")));
    let back: Vec<GameRecord> = read_jsonl(&buf[..]).into_iter().map(Result::unwrap).collect();
    assert_eq!(back, records);
    for r in &back {
        let end = replay(r).unwrap();
        assert_eq!(end.winner(), r.winner.filter(|_| r.reason == Termination::KingCapture));
    }
}

#[test]
fn tampered_records_fail_to_replay() {
    let r = knight_game(None);
    let mut bad = r.clone();
    bad.turns[2].sense_result = r.turns[3].sense_result;
    assert!(replay(&bad).is_err());
    let mut bad = r.clone();
    bad.winner = Some(Color::Black);
    assert!(replay(&bad).is_err());
    let mut bad = r.clone();
    bad.turns[12].executed = Some(act("move:h5e8"));
    assert!(replay(&bad).is_err());
    let mut bad = r;
    bad.v = 2;
    assert!(replay(&bad).is_err());
    assert!(read_jsonl(&b"{\"v\":2}\n"[..])[0].is_err());
}

#[test]
fn shadow_trackers_fill_both_counts() {
    let r = knight_game(Some(1_000_000));
    assert!(r.turns.iter().all(|t| t.states[0].is_some() && t.states[1].is_some()));
    let untracked = knight_game(None);
    assert!(untracked.turns.iter().all(|t| t.states == [None, None]));
    assert_eq!(untracked.truth.checks, 0);
}

#[test]
fn baselines_beat_random_play() {
    let opts = GameOptions::default();
    let mut wins = 0.0;
    for seed in 0..20 {
        let mut a = AttackerBot::new("AttackerBot");
        let mut r = RandomBot::new("RandomBot");
        let rec =
            if seed % 2 == 0 { play_game(&mut a, &mut r, seed, &opts) } else { play_game(&mut r, &mut a, seed, &opts) };
        assert_ne!(rec.reason, Termination::Error);
        let me = if rec.white == "AttackerBot" { Color::White } else { Color::Black };
        wins += rec.score(me);
    }
    assert!(wins >= 14.0, "{wins} of 20");
}

#[test]
fn material_bot_tracks_the_truth() {
    let opts = GameOptions { check_truth: true, ..GameOptions::default() };
    for seed in 0..6 {
        let mut m = MaterialBot::new("MaterialBot", 50_000);
        let mut a = AttackerBot::new("AttackerBot");
        let r = play_game(&mut m, &mut a, seed, &opts);
        assert_ne!(r.reason, Termination::Error, "{:?}", r.error);
        assert_eq!(r.truth.violations, 0);
        replay(&r).unwrap();
    }
}

#[test]
fn dsmcp_only_requests_what_its_pieces_allow() {
    // The harness aborts a game on any request outside the requestable set,
    // and every executed move must be legal in the true state.
    let cfg = PlannerConfig { time: TimeControl::Playouts { count: 24 }, ..PlannerConfig::desk() };
    let opts = GameOptions { turn_cap: 40, check_truth: true, ..GameOptions::default() };
    for (seed, mode) in [(0, Mode::Search), (1, Mode::PolicyOnly), (2, Mode::Search), (3, Mode::Search)] {
        let mut d = Dsmcp::new("Dsmcp", cfg.clone(), Arc::new(Heuristic), mode);
        d.audit = true;
        let mut r = RandomBot::new("RandomBot");
        let rec =
            if seed % 2 == 0 { play_game(&mut d, &mut r, seed, &opts) } else { play_game(&mut r, &mut d, seed, &opts) };
        assert_ne!(rec.reason, Termination::Error, "{:?}", rec.error);
        assert_eq!(rec.truth.violations, 0);
        let diag = &rec.diagnostics[(seed % 2) as usize];
        assert_eq!(diag.intersection_violations + diag.virtual_loss_violations, 0);
        let mut checked = 0;
        replay_with(&rec, |x, a, t| {
            if let Action::Move(_) = a {
                assert!(x.requestable_actions().contains(&a));
                assert!(x.legal_actions().contains(&t.actor.executed.unwrap()));
                checked += 1;
            }
        })
        .unwrap();
        assert!(checked > 0);
    }
}

#[test]
fn every_agent_kind_plays_a_short_game() {
    for kind in AgentKind::ALL {
        let spec = AgentSpec::of(kind).with_override("time", toml_playouts(8));
        let f = spec.resolve().unwrap();
        let mut a = f.build();
        let mut b = RandomBot::new("RandomBot");
        let r = play_game(a.as_mut(), &mut b, 5, &GameOptions { turn_cap: 6, ..GameOptions::default() });
        assert_ne!(r.reason, Termination::Error, "{kind}: {:?}", r.error);
        assert_eq!(r.white, kind.label());
    }
}

fn toml_playouts(n: i64) -> toml::Value {
    let mut t = toml::Table::new();
    t.insert("mode".into(), "playouts".into());
    t.insert("count".into(), n.into());
    toml::Value::Table(t)
}
