//! Possible-state tracking and the structures built on it.
//!
//! A [`Tracker`] holds, for one player, every world state consistent with
//! that player's observations, one set per game action. Planning works on
//! [`LimitedStateSet`]s, small uniform subsamples of these sets, summarized
//! as a fixed stack of bitboards by [`synopsis`].

pub mod dump;
mod limited;
mod possible;
pub mod synopsis;
mod tracker;

pub use limited::{sample_indices, set_hash_of, subsample, LimitedStateSet};
pub use possible::PossibleStateSet;
pub use synopsis::{synopsis, Synopsis};
pub use tracker::{
    expand, retro_filter, Expansion, StepEvent, StepReport, TrackStep, Tracker, TrackingError, DEFAULT_CAP,
};
