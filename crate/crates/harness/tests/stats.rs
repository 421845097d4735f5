use penumbral::agent::Scripted;
use penumbral::baselines::{AttackerBot, MaterialBot};
use penumbral::record::Termination;
use penumbral::selfplay::{extract, write_dump, ExtractOptions, SOON};
use penumbral::stats::{replay_counts, replay_stats, spearman, summarize, GameStats, MIN_BUCKET};
use penumbral::{play_game, GameOptions, GameRecord};
use penumbral_core::eval::oriented_index;
use penumbral_core::tracking::dump::read_dump;
use penumbral_core::{Action, Color};

fn act(s: &str) -> Action {
    s.parse().unwrap()
}

fn knight_game() -> GameRecord {
    let white = "sense:g6 move:e2e4 sense:g7 move:d2d4 sense:g6 move:e4f5 sense:d7 move:f1e2 \
                 sense:g7 move:e2h5 sense:b7 move:d1h5 sense:e7 move:h5e8 sense:g6 move:g6e8";
    let black = "sense:e3 move:h7h5 sense:f2 move:f7f5 sense:e4 move:h5h4 sense:g4 move:b8c6 \
                 sense:g4 move:h8h5 sense:g5 move:g7g6 sense:g6 move:d7d6";
    let parse = |s: &str| s.split_whitespace().map(act).collect();
    let mut w = Scripted::new("W", parse(white));
    let mut b = Scripted::new("B", parse(black));
    play_game(&mut w, &mut b, 0, &GameOptions { track_cap: Some(1_000_000), ..GameOptions::default() })
}

#[test]
fn knight_game_recount() {
    let r = knight_game();
    let g = replay_counts(&r, 1_000_000).unwrap();
    assert!(g.max_states[0] >= 238);
    assert_eq!(g.per_turn[7][0], Some(238));
    assert_eq!(g.overflowed, [false, false]);
    let recorded: Vec<[Option<usize>; 2]> = r.turns.iter().map(|t| t.states).collect();
    assert_eq!(g.per_turn, recorded);
    assert_eq!(r.max_states(), g.max_states.map(Some));
}

#[test]
fn recount_matches_play_time_counts() {
    let opts = GameOptions { track_cap: Some(200_000), ..GameOptions::default() };
    for seed in 0..6 {
        let mut a = AttackerBot::new("A");
        let mut m = MaterialBot::new("M", 200_000);
        let r = play_game(&mut a, &mut m, seed, &opts);
        let g = replay_counts(&r, 200_000).unwrap();
        let recorded: Vec<[Option<usize>; 2]> = r.turns.iter().map(|t| t.states).collect();
        assert_eq!(g.per_turn, recorded, "seed {seed}");
        assert_eq!(replay_counts(&r, 200_000).unwrap(), g);
    }
}

#[test]
fn overflow_saturates_at_the_cap() {
    let g = replay_counts(&knight_game(), 100).unwrap();
    assert_eq!(g.overflowed, [true, true]);
    assert_eq!(g.max_states, [100, 100]);
    assert!(g.per_turn.last().unwrap().iter().all(Option::is_none));
}

#[test]
fn empty_input_gives_an_empty_csv() {
    let s = replay_stats(&[], 1000);
    assert!(s.buckets.is_empty() && s.spearman.is_none() && s.median_max_states.is_none());
    let mut out = Vec::new();
    s.write_csv(&mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "lo,hi,players,score,win_pct\n");
}

#[test]
fn aborted_records_are_skipped() {
    let mut bad = knight_game();
    bad.reason = Termination::Error;
    let mut broken = knight_game();
    broken.turns[1].sense_result = broken.turns[0].sense_result;
    let s = replay_stats(&[bad, broken, knight_game()], 1_000_000);
    assert_eq!((s.games.len(), s.skipped), (1, 2));
    assert_eq!(s.games[0].index, 2);
}

fn game(max: [usize; 2], winner: Option<Color>) -> GameStats {
    GameStats {
        index: 0,
        players: ["W".into(), "B".into()],
        winner,
        max_states: max,
        overflowed: [false; 2],
        per_turn: Vec::new(),
    }
}

#[test]
fn buckets_are_half_decades() {
    let mut games = Vec::new();
    for _ in 0..MIN_BUCKET {
        games.push(game([5, 50], Some(Color::White)));
        games.push(game([400, 4000], None));
    }
    let s = summarize(games, 0);
    let bounds: Vec<(usize, usize, usize)> = s.buckets.iter().map(|b| (b.lo, b.hi, b.players)).collect();
    assert_eq!(bounds, [(4, 10, 10), (32, 100, 10), (317, 1000, 10), (3163, 10000, 10)]);
    let pct: Vec<f64> = s.buckets.iter().map(|b| b.win_pct).collect();
    assert_eq!(pct, [100.0, 0.0, 50.0, 50.0]);
    assert_eq!(s.median_max_states, Some(225.0));
    let mut out = Vec::new();
    s.write_games_csv(&mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 41);
}

#[test]
fn spearman_reference_values() {
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
    assert_eq!(spearman(&[1.0], &[1.0]), None);
    assert_eq!(spearman(&[1.0, 2.0], &[5.0, 5.0]), None);
    // Hand computed: ranks (1,2,3,4,5) and (2,1,4,3,5), d^2 = 4, rho = 1 - 6*4/120.
    let r = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
    assert!((r - 0.8).abs() < 1e-12);
    // Ties take average ranks: (1, 2.5, 2.5, 4) against (1, 2, 3, 4).
    let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!((r - 4.5 / (4.5 * 5.0f64).sqrt()).abs() < 1e-12);
}

#[test]
fn selfplay_examples_from_the_knight_game() {
    let r = knight_game();
    let examples = extract(&r, &ExtractOptions { ell: 16, cap: 1_000_000, seed: 1 }).unwrap();
    assert_eq!(examples.len(), r.actions());
    let first = &examples[0];
    assert_eq!(first.action, oriented_index(act("sense:g6"), Color::White));
    assert_eq!((first.winner, first.headset.as_str()), (1, "W"));
    assert_eq!(&first.piece_counts[..6], &[8, 2, 2, 2, 1, 1]);
    let black = &examples[1 + 1];
    assert_eq!((black.winner, black.headset.as_str()), (-1, "B"));
    let n = examples.len();
    for (i, e) in examples.iter().enumerate() {
        let soon = n - i <= SOON;
        assert_eq!(e.soon_win, soon && e.winner == 1, "{i}");
        assert_eq!(e.soon_lose, soon && e.winner == -1, "{i}");
    }
    assert_eq!(examples.last().unwrap().action, oriented_index(act("move:g6e8"), Color::White));
    // Black's moves are flipped before indexing.
    assert_eq!(examples[3].action, oriented_index(act("move:h7h5"), Color::Black));

    let mut buf = Vec::new();
    let written = write_dump(&mut buf, &[r.clone(), r], &ExtractOptions::default()).unwrap();
    assert_eq!(written, 2 * n);
    let back = read_dump(&buf[..]).unwrap();
    assert_eq!(back.len(), 2 * n);
    assert_eq!(back[0].action, examples[0].action);
}

#[test]
fn aborted_games_give_no_examples() {
    let mut r = knight_game();
    r.reason = Termination::Error;
    assert!(extract(&r, &ExtractOptions::default()).is_err());
    let mut buf = Vec::new();
    assert_eq!(write_dump(&mut buf, &[r], &ExtractOptions::default()).unwrap(), 0);
    assert_eq!(read_dump(&buf[..]).unwrap().len(), 0);
}
