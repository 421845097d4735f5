//! Elo ratings from pairwise results.
//!
//! The win probability of `a` over `b` is `1 / (1 + 10^((r_b - r_a) / 400))`
//! and a draw counts as half a win. Ratings maximize the log-likelihood plus
//! a weak Gaussian prior centred on the anchor rating; the anchor itself is
//! fixed. Intervals come from the inverse of the negative Hessian at the
//! optimum.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::record::GameRecord;

/// Natural-log scale of one Elo point.
pub const K: f64 = std::f64::consts::LN_10 / 400.0;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// `score` is what `a` scored against `b`: 1, 0.5 or 0, or a fraction for
/// aggregated games with `weight` games behind it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub a: usize,
    pub b: usize,
    pub score: f64,
    pub weight: f64,
}

impl Outcome {
    pub fn game(a: usize, b: usize, score: f64) -> Outcome {
        Outcome { a, b, score, weight: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub struct EloOptions {
    pub anchor: String,
    pub anchor_rating: f64,
    /// Standard deviation of the prior; `f64::INFINITY` removes it.
    pub prior_sd: f64,
}

impl Default for EloOptions {
    fn default() -> Self {
        EloOptions { anchor: "RandomBot".into(), anchor_rating: 1000.0, prior_sd: 1000.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EloEntry {
    pub name: String,
    pub rating: f64,
    /// Half-width of the 95% interval.
    pub interval: f64,
    pub games: f64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EloTable {
    pub anchor: String,
    pub anchor_rating: f64,
    pub entries: Vec<EloEntry>,
    /// Rating covariance, row-major over `entries`.
    pub covariance: Vec<Vec<f64>>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EloError {
    #[error("{0} has no games")]
    NoGames(String),
    #[error("outcome refers to agent {0}, beyond the {1} names given")]
    Index(usize, usize),
}

/// Logistic win probability of a rating difference.
pub fn win_probability(diff: f64) -> f64 {
    1.0 / (1.0 + (-K * diff).exp())
}

/// Rating difference that gives `p`; `400 log10(p / (1 - p))`.
pub fn rating_gap(p: f64) -> f64 {
    (p / (1.0 - p)).ln() / K
}

impl EloTable {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn rating(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.entries[i].rating)
    }

    /// `r_a - r_b` and the half-width of its 95% interval.
    pub fn gap(&self, a: &str, b: &str) -> Option<(f64, f64)> {
        let (i, j) = (self.index(a)?, self.index(b)?);
        let c = &self.covariance;
        let var = (c[i][i] + c[j][j] - 2.0 * c[i][j]).max(0.0);
        Some((self.entries[i].rating - self.entries[j].rating, Z95 * var.sqrt()))
    }

    /// Predicted probability that `a` beats `b`.
    pub fn predict(&self, a: &str, b: &str) -> Option<f64> {
        Some(win_probability(self.rating(a)? - self.rating(b)?))
    }

    /// Whether the 95% intervals of `a` and `b` are disjoint.
    pub fn separated(&self, a: &str, b: &str) -> Option<bool> {
        let (i, j) = (self.index(a)?, self.index(b)?);
        let (ea, eb) = (&self.entries[i], &self.entries[j]);
        Some((ea.rating - eb.rating).abs() > ea.interval + eb.interval)
    }
}

impl fmt::Display for EloTable {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let mut order: Vec<&EloEntry> = self.entries.iter().collect();
        order.sort_by(|a, b| b.rating.total_cmp(&a.rating));
        let width = order.iter().map(|e| e.name.len()).max().unwrap_or(4).max(5);
        writeln!(f, "{:width$}  {:>12}  {:>6}  {:>6}", "agent", "elo", "games", "score")?;
        for e in order {
            let pct = if e.games > 0.0 { 100.0 * e.score / e.games } else { 0.0 };
            writeln!(f, "{:width$}  {:>5.0} ± {:<4.0}  {:>6}  {:>5.1}%", e.name, e.rating, e.interval, e.games, pct)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Maximum a posteriori ratings for `names` from `outcomes`.
pub fn estimate_elo(names: &[String], outcomes: &[Outcome], opts: &EloOptions) -> Result<EloTable, EloError> {
    let n = names.len();
    let mut games = vec![0.0; n];
    let mut score = vec![0.0; n];
    let mut parent: Vec<usize> = (0..n).collect();
    for o in outcomes {
        if o.a >= n || o.b >= n {
            return Err(EloError::Index(o.a.max(o.b), n));
        }
        games[o.a] += o.weight;
        games[o.b] += o.weight;
        score[o.a] += o.weight * o.score;
        score[o.b] += o.weight * (1.0 - o.score);
        let (ra, rb) = (find(&mut parent, o.a), find(&mut parent, o.b));
        parent[ra] = rb;
    }
    if let Some(i) = (0..n).find(|&i| games[i] == 0.0) {
        return Err(EloError::NoGames(names[i].clone()));
    }

    // One fixed agent per connected component: the anchor, or the first
    // member of a component without it.
    let anchor = names.iter().position(|s| *s == opts.anchor);
    let mut warnings = Vec::new();
    let mut fixed = vec![false; n];
    let mut seen_roots = Vec::new();
    if let Some(a) = anchor {
        fixed[a] = true;
        seen_roots.push(find(&mut parent, a));
    }
    for i in 0..n {
        let r = find(&mut parent, i);
        if !seen_roots.contains(&r) {
            seen_roots.push(r);
            fixed[i] = true;
            let w = if anchor.is_some() {
                format!("{} is not connected to {}; anchored at {}", names[i], opts.anchor, opts.anchor_rating)
            } else {
                format!("anchor {} absent; {} anchored at {}", opts.anchor, names[i], opts.anchor_rating)
            };
            log::warn!("{w}");
            warnings.push(w);
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let mut slot = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        slot[i] = k;
    }

    let prior_prec = if opts.prior_sd.is_finite() { 1.0 / (opts.prior_sd * opts.prior_sd) } else { 0.0 };
    let mut r = vec![opts.anchor_rating; n];
    let objective = |r: &[f64]| -> f64 {
        let mut l = 0.0;
        for o in outcomes {
            let p = win_probability(r[o.a] - r[o.b]).clamp(1e-300, 1.0 - 1e-16);
            l += o.weight * (o.score * p.ln() + (1.0 - o.score) * (1.0 - p).ln());
        }
        l - 0.5 * prior_prec * free.iter().map(|&i| (r[i] - opts.anchor_rating).powi(2)).sum::<f64>()
    };
    // Negative Hessian and gradient of the objective over the free ratings.
    let derivatives = |r: &[f64]| -> (DMatrix<f64>, DVector<f64>) {
        let m = free.len();
        let mut h = DMatrix::<f64>::zeros(m, m);
        let mut g = DVector::<f64>::zeros(m);
        for o in outcomes {
            let p = win_probability(r[o.a] - r[o.b]);
            let d = o.weight * K * (o.score - p);
            let c = o.weight * K * K * p * (1.0 - p);
            let (sa, sb) = (slot[o.a], slot[o.b]);
            if sa != usize::MAX {
                g[sa] += d;
                h[(sa, sa)] += c;
            }
            if sb != usize::MAX {
                g[sb] -= d;
                h[(sb, sb)] += c;
            }
            if sa != usize::MAX && sb != usize::MAX {
                h[(sa, sb)] -= c;
                h[(sb, sa)] -= c;
            }
        }
        for (k, &i) in free.iter().enumerate() {
            g[k] -= prior_prec * (r[i] - opts.anchor_rating);
            h[(k, k)] += prior_prec;
        }
        (h, g)
    };

    let mut value = objective(&r);
    for _ in 0..200 {
        let (h, g) = derivatives(&r);
        // A tiny ridge keeps the step defined when the prior is off and a
        // player has a perfect score.
        let ridge = DMatrix::<f64>::identity(free.len(), free.len()) * 1e-12;
        let Some(step) = (h + ridge).cholesky().map(|c| c.solve(&g)) else { break };
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let mut trial = r.clone();
            for (k, &i) in free.iter().enumerate() {
                trial[i] += t * step[k];
            }
            let v = objective(&trial);
            if v >= value {
                r = trial;
                value = v;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved || step.amax() * t < 1e-9 {
            break;
        }
    }

    let (h, _) = derivatives(&r);
    let cov_free =
        h.clone().try_inverse().unwrap_or_else(|| DMatrix::from_element(free.len(), free.len(), f64::INFINITY));
    let mut covariance = vec![vec![0.0; n]; n];
    for (ka, &a) in free.iter().enumerate() {
        for (kb, &b) in free.iter().enumerate() {
            covariance[a][b] = cov_free[(ka, kb)];
        }
    }
    let entries = (0..n)
        .map(|i| EloEntry {
            name: names[i].clone(),
            rating: r[i],
            interval: Z95 * covariance[i][i].max(0.0).sqrt(),
            games: games[i],
            score: score[i],
        })
        .collect();
    Ok(EloTable { anchor: opts.anchor.clone(), anchor_rating: opts.anchor_rating, entries, covariance, warnings })
}

/// Agent names in order of first appearance and one outcome per decided
/// or drawn game; aborted games are skipped.
pub fn outcomes_from_records(records: &[GameRecord]) -> (Vec<String>, Vec<Outcome>) {
    let mut names: Vec<String> = Vec::new();
    let idx = |s: &str, names: &mut Vec<String>| match names.iter().position(|n| n == s) {
        Some(i) => i,
        None => {
            names.push(s.to_string());
            names.len() - 1
        }
    };
    let mut out = Vec::new();
    for r in records {
        if r.reason == crate::record::Termination::Error {
            continue;
        }
        let a = idx(&r.white, &mut names);
        let b = idx(&r.black, &mut names);
        out.push(Outcome::game(a, b, r.score(penumbral_core::Color::White)));
    }
    (names, out)
}
