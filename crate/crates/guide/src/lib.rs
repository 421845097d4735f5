//! The guide's chapters, compiled so every snippet runs as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/rules.md")]
pub mod rules {}

#[doc = include_str!("../../../book/src/tracking.md")]
pub mod tracking {}

#[doc = include_str!("../../../book/src/synopsis.md")]
pub mod synopsis {}

#[doc = include_str!("../../../book/src/beliefs.md")]
pub mod beliefs {}

#[doc = include_str!("../../../book/src/planning.md")]
pub mod planning {}

#[doc = include_str!("../../../book/src/games.md")]
pub mod games {}

#[doc = include_str!("../../../book/src/tournaments.md")]
pub mod tournaments {}

#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}
