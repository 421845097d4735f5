use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stats::ArmStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BanditKind {
    /// UCB1 with policy priors.
    #[default]
    Ucb1,
    /// PUCT variant.
    Avop,
}

/// Parameters read by [`bandit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BanditParams {
    pub kind: BanditKind,
    pub c: f64,
    /// Mixing constant; `f64::INFINITY` never samples from the policy.
    pub m: f64,
    pub phi: f64,
}

/// Deterministic score of arm `a`; `n` is the total visit count. Unvisited
/// UCB1 arms score `+inf`.
pub fn score(p: &BanditParams, pi: f32, arm: &ArmStats, n: f64) -> f64 {
    let pi = pi as f64;
    match p.kind {
        BanditKind::Ucb1 => {
            if arm.n <= 0.0 {
                return f64::INFINITY;
            }
            let mean = arm.q / arm.n;
            let min = if arm.min.is_finite() { arm.min } else { mean };
            (1.0 - p.phi) * mean + p.phi * min + p.c * pi * (n.ln().max(0.0) / arm.n).sqrt()
        }
        BanditKind::Avop => {
            let mean = arm.q / (1.0 + arm.n);
            let min = if arm.min.is_finite() { arm.min } else { 0.0 };
            (1.0 - p.phi) * mean + p.phi * min + p.c * pi * n.sqrt() / (1.0 + arm.n)
        }
    }
}

/// Whether the stochastic branch is taken for total visit count `n`.
fn mixes<R: Rng + ?Sized>(p: &BanditParams, n: f64, root: bool, rng: &mut R) -> bool {
    if root || p.m == f64::INFINITY {
        return false;
    }
    (-p.m * n).exp() > rng.gen::<f64>()
}

/// Samples an index from `pi`; uniform if it carries no mass.
pub fn sample_policy<R: Rng + ?Sized>(pi: &[f32], rng: &mut R) -> usize {
    let total: f64 = pi.iter().map(|&p| p.max(0.0) as f64).sum();
    if !(total > 0.0) {
        return rng.gen_range(0..pi.len());
    }
    let mut r = rng.gen::<f64>() * total;
    for (i, &p) in pi.iter().enumerate() {
        r -= p.max(0.0) as f64;
        if r < 0.0 {
            return i;
        }
    }
    pi.iter().rposition(|&p| p > 0.0).unwrap()
}

/// Deterministic branch: unvisited UCB1 arms in descending policy order,
/// then the highest score; ties go to the lowest index.
pub fn argmax_arm(p: &BanditParams, pi: &[f32], arms: &[ArmStats]) -> usize {
    let n: f64 = arms.iter().map(|a| a.n).sum();
    if p.kind == BanditKind::Ucb1 {
        let mut best: Option<usize> = None;
        for (i, a) in arms.iter().enumerate() {
            if a.n <= 0.0 && best.is_none_or(|b| pi[i] > pi[b]) {
                best = Some(i);
            }
        }
        if let Some(b) = best {
            return b;
        }
    }
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, a) in arms.iter().enumerate() {
        let s = score(p, pi[i], a, n);
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Picks an arm: with probability `exp(-m n)` away from the root, a sample
/// from `pi`; otherwise [`argmax_arm`].
pub fn bandit<R: Rng + ?Sized>(p: &BanditParams, pi: &[f32], arms: &[ArmStats], root: bool, rng: &mut R) -> usize {
    assert!(!pi.is_empty() && pi.len() == arms.len(), "bandit needs one prior per arm");
    if pi.len() == 1 {
        return 0;
    }
    let n: f64 = arms.iter().map(|a| a.n).sum();
    if mixes(p, n, root, rng) {
        sample_policy(pi, rng)
    } else {
        argmax_arm(p, pi, arms)
    }
}
