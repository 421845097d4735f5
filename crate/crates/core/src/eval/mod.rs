//! Policy and value estimates over synopses.
//!
//! An [`Evaluator`] maps a synopsis and a list of candidate actions to a
//! probability for each candidate and a value in `[-1, 1]` for the player
//! whose view the synopsis encodes. Two implementations ship: the
//! dependency-free [`Heuristic`] and the convolutional [`Network`] loaded
//! from a weight file.

mod heuristic;
pub mod index;
mod network;

pub use heuristic::Heuristic;
pub use index::{action_from_index, action_index, oriented_index};
pub use network::{LoadError, Network, WeightFile};

use crate::game::Action;
use crate::tracking::Synopsis;

/// Headset trained on the strongest players; default opponent model.
pub const TOP: &str = "Top";
/// Headset trained on every game; supplies the value estimate.
pub const ALL: &str = "All";

#[derive(Clone, Debug, PartialEq)]
pub struct Aux {
    pub soon_win: f32,
    pub soon_lose: f32,
    pub piece_counts: [f32; 12],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    /// One probability per candidate action, summing to 1.
    pub policy: Vec<f32>,
    pub value: f32,
    pub aux: Option<Aux>,
}

pub trait Evaluator: Send + Sync {
    /// Names of the policy headsets available.
    fn headsets(&self) -> Vec<String>;

    /// Evaluates each `(synopsis, candidates)` pair with the policy of
    /// `headset` (falling back to [`TOP`]).
    fn evaluate(&self, batch: &[(&Synopsis, &[Action])], headset: &str) -> Vec<Evaluation>;

    fn evaluate_one(&self, synopsis: &Synopsis, actions: &[Action], headset: &str) -> Evaluation {
        self.evaluate(&[(synopsis, actions)], headset).pop().unwrap()
    }
}

/// Exact name match, otherwise [`TOP`].
pub fn select_headset(opponent: &str, registry: &[String]) -> String {
    registry.iter().find(|h| *h == opponent).cloned().unwrap_or_else(|| TOP.to_string())
}

/// Softmax of `logits` in place.
pub(crate) fn softmax(logits: &mut [f32]) {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut sum = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        sum += *l;
    }
    for l in logits.iter_mut() {
        *l /= sum;
    }
}
