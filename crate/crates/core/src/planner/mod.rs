//! Action selection by playouts over approximate information states.
//!
//! Each playout draws the opponent's set `J` from the belief particles and
//! the player's own set `I` from its possible states, then walks both
//! forward together around one determinized state. Nodes are keyed by set
//! hash in a shared [`NodeStats`] table; arms are chosen by [`bandit`].

pub mod analysis;
mod bandit;
mod config;
mod search;
mod stats;

pub use analysis::{king_capturable, prune_senses, static_win, winning_move, winning_sense};
pub use bandit::{argmax_arm, bandit, sample_policy, score, BanditKind, BanditParams};
pub use config::{FinalChoice, PlannerConfig, TimeControl};
pub use search::{candidates, Audit, Decision, Planner, RootArm, SearchBudget, SearchReport};
pub use stats::{ArmStats, NodeStats, DEFAULT_CAPACITY};
