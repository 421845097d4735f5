use penumbral::elo::{estimate_elo, outcomes_from_records, rating_gap, win_probability, EloError, EloOptions, Outcome};
use penumbral::record::{GameRecord, Seeds, Termination, SCHEMA_VERSION};
use penumbral_core::Color;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn flat() -> EloOptions {
    EloOptions { anchor: "A".into(), anchor_rating: 1000.0, prior_sd: f64::INFINITY }
}

/// `wins` wins, `losses` losses of a over b.
fn results(a: usize, b: usize, wins: usize, losses: usize) -> Vec<Outcome> {
    let mut v: Vec<Outcome> = (0..wins).map(|_| Outcome::game(a, b, 1.0)).collect();
    v.extend((0..losses).map(|_| Outcome::game(a, b, 0.0)));
    v
}

/// Bradley-Terry maximum likelihood by the minorize-maximize iteration;
/// returns ratings with agent 0 at 1000.
fn mm_oracle(n: usize, outcomes: &[Outcome]) -> Vec<f64> {
    let mut wins = vec![0.0; n];
    let mut pair = vec![vec![0.0; n]; n];
    for o in outcomes {
        wins[o.a] += o.score * o.weight;
        wins[o.b] += (1.0 - o.score) * o.weight;
        pair[o.a][o.b] += o.weight;
        pair[o.b][o.a] += o.weight;
    }
    let mut gamma = vec![1.0; n];
    for _ in 0..20_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let d: f64 = (0..n).filter(|&j| j != i).map(|j| pair[i][j] / (gamma[i] + gamma[j])).sum();
                wins[i] / d
            })
            .collect();
        let g0 = next[0];
        gamma = next.iter().map(|g| g / g0).collect();
    }
    gamma.iter().map(|g| 1000.0 + 400.0 * g.log10()).collect()
}

#[test]
fn even_scores_give_equal_ratings() {
    let t = estimate_elo(&names(&["A", "B"]), &results(0, 1, 50, 50), &flat()).unwrap();
    assert!((t.rating("B").unwrap() - 1000.0).abs() < 1e-6);
    let (gap, half) = t.gap("A", "B").unwrap();
    assert!(gap.abs() < 1e-6 && half > 0.0);
}

#[test]
fn three_to_one_is_190_85_points() {
    let expected = 400.0 * 3f64.log10();
    assert!((rating_gap(0.75) - expected).abs() < 1e-9);
    assert!((win_probability(expected) - 0.75).abs() < 1e-12);
    let t = estimate_elo(&names(&["A", "B"]), &results(0, 1, 300, 100), &flat()).unwrap();
    let (gap, _) = t.gap("A", "B").unwrap();
    assert!((gap - 190.85).abs() < 0.01, "{gap}");
    // The weak prior shrinks the gap only slightly.
    let t = estimate_elo(
        &names(&["A", "B"]),
        &results(0, 1, 300, 100),
        &EloOptions { anchor: "A".into(), ..EloOptions::default() },
    )
    .unwrap();
    let (gap, _) = t.gap("A", "B").unwrap();
    assert!(gap < 190.85 && gap > 190.85 - 15.0, "{gap}");
}

#[test]
fn identical_agents_interval_contains_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let outcomes: Vec<Outcome> = (0..200).map(|_| Outcome::game(0, 1, [0.0, 0.5, 1.0][rng.gen_range(0..3)])).collect();
    let t = estimate_elo(&names(&["A", "B"]), &outcomes, &flat()).unwrap();
    let (gap, half) = t.gap("A", "B").unwrap();
    assert!(gap.abs() < half, "{gap} ± {half}");
    assert!(!t.separated("A", "B").unwrap());
}

#[test]
fn cycle_ratings_overlap() {
    let mut outcomes = results(0, 1, 60, 40);
    outcomes.extend(results(1, 2, 60, 40));
    outcomes.extend(results(2, 0, 60, 40));
    let t = estimate_elo(&names(&["A", "B", "C"]), &outcomes, &flat()).unwrap();
    for (a, b) in [("A", "B"), ("B", "C"), ("A", "C")] {
        let (gap, half) = t.gap(a, b).unwrap();
        assert!(gap.abs() < 1e-6 && gap.abs() < half);
        let ea = &t.entries[t.index(a).unwrap()];
        let eb = &t.entries[t.index(b).unwrap()];
        assert!(gap.abs() <= ea.interval.max(eb.interval));
    }
}

#[test]
fn agrees_with_minorize_maximize() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let n = rng.gen_range(2..6);
        let strength: Vec<f64> = (0..n).map(|_| rng.gen_range(-300.0..300.0)).collect();
        let mut outcomes = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for _ in 0..40 {
                    let p = win_probability(strength[a] - strength[b]);
                    let u: f64 = rng.gen();
                    let s = if u < 0.1 {
                        0.5
                    } else if rng.gen::<f64>() < p {
                        1.0
                    } else {
                        0.0
                    };
                    outcomes.push(Outcome::game(a, b, s));
                }
            }
        }
        let list: Vec<String> = (0..n).map(|i| format!("P{i}")).collect();
        let opts = EloOptions { anchor: "P0".into(), anchor_rating: 1000.0, prior_sd: f64::INFINITY };
        let t = estimate_elo(&list, &outcomes, &opts).unwrap();
        let oracle = mm_oracle(n, &outcomes);
        for i in 0..n {
            assert!((t.entries[i].rating - oracle[i]).abs() < 0.01, "{} vs {}", t.entries[i].rating, oracle[i]);
        }
    }
}

#[test]
fn intervals_shrink_with_more_games() {
    let small = estimate_elo(&names(&["A", "B"]), &results(0, 1, 30, 10), &flat()).unwrap();
    let large = estimate_elo(&names(&["A", "B"]), &results(0, 1, 300, 100), &flat()).unwrap();
    let w = |t: &penumbral::elo::EloTable| t.gap("A", "B").unwrap().1;
    assert!((w(&small) / w(&large) - 10f64.sqrt()).abs() < 0.05);
    assert_eq!(large.entries[0].interval, 0.0);
}

#[test]
fn disconnected_agents_are_anchored_with_a_warning() {
    let mut outcomes = results(0, 1, 5, 5);
    outcomes.extend(results(2, 3, 8, 2));
    let t = estimate_elo(&names(&["A", "B", "C", "D"]), &outcomes, &flat()).unwrap();
    assert_eq!(t.warnings.len(), 1);
    assert!(t.warnings[0].contains('C'));
    assert_eq!(t.rating("C"), Some(1000.0));
    assert!(t.to_string().contains("warning"));
    let t = estimate_elo(&names(&["A", "B"]), &results(0, 1, 5, 5), &EloOptions::default()).unwrap();
    assert_eq!(t.warnings.len(), 1, "RandomBot absent");
}

#[test]
fn bad_inputs() {
    assert_eq!(
        estimate_elo(&names(&["A", "B", "C"]), &results(0, 1, 1, 1), &flat()).unwrap_err(),
        EloError::NoGames("C".into())
    );
    assert!(matches!(estimate_elo(&names(&["A"]), &results(0, 1, 1, 1), &flat()), Err(EloError::Index(1, 1))));
}

#[test]
fn perfect_scores_stay_finite_under_the_prior() {
    let t = estimate_elo(
        &names(&["A", "B"]),
        &results(0, 1, 20, 0),
        &EloOptions { anchor: "A".into(), ..EloOptions::default() },
    )
    .unwrap();
    let b = t.rating("B").unwrap();
    assert!(b.is_finite() && b < 1000.0);
}

fn record(white: &str, black: &str, winner: Option<Color>, reason: Termination) -> GameRecord {
    GameRecord {
        v: SCHEMA_VERSION,
        white: white.into(),
        black: black.into(),
        seeds: Seeds { game: 0, white: 0, black: 0 },
        turns: Vec::new(),
        winner,
        reason,
        error: None,
        truth: Default::default(),
        diagnostics: Default::default(),
        ms: 0.0,
    }
}

#[test]
fn outcomes_skip_aborted_games() {
    let records = [
        record("A", "B", Some(Color::White), Termination::KingCapture),
        record("B", "A", None, Termination::TurnCap),
        record("B", "C", None, Termination::Error),
        record("C", "A", Some(Color::Black), Termination::Timeout),
    ];
    let (list, outcomes) = outcomes_from_records(&records);
    assert_eq!(list, names(&["A", "B", "C"]));
    assert_eq!(outcomes, vec![Outcome::game(0, 1, 1.0), Outcome::game(1, 0, 0.5), Outcome::game(2, 0, 0.0)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn anchor_shift_keeps_predictions(
        scores in prop::collection::vec(0usize..3, 30..120),
        shift in -2000.0f64..2000.0,
    ) {
        let outcomes: Vec<Outcome> = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| Outcome::game(i % 3, (i + 1) % 3, s as f64 / 2.0))
            .collect();
        let list = names(&["A", "B", "C"]);
        let base = EloOptions { anchor: "A".into(), ..EloOptions::default() };
        let moved = EloOptions { anchor_rating: base.anchor_rating + shift, ..base.clone() };
        let t0 = estimate_elo(&list, &outcomes, &base).unwrap();
        let t1 = estimate_elo(&list, &outcomes, &moved).unwrap();
        for a in &list {
            prop_assert!((t1.rating(a).unwrap() - t0.rating(a).unwrap() - shift).abs() < 1e-4);
            for b in &list {
                let d = (t0.predict(a, b).unwrap() - t1.predict(a, b).unwrap()).abs();
                prop_assert!(d < 1e-7, "{}", d);
            }
        }
    }
}
