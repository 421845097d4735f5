//! Game harness for the `penumbral-core` engine.
//!
//! * [`agent`] defines the [`Agent`] trait, the agent families and the
//!   declarative [`AgentSpec`] used by tournament files.
//! * [`dsmcp`] is the full player: exact tracking, particle beliefs,
//!   and planning or policy sampling.
//! * [`baselines`] holds simple opponents.
//! * [`game`] runs one game and produces a replayable [`GameRecord`].
//! * [`tourney`] schedules round robins and [`elo`] rates the results.
//! * [`stats`] recounts possible states from records; [`selfplay`] turns
//!   records into synopsis dumps for training.
//!
//! ```
//! use penumbral::agent::{Agent, AgentKind, AgentSpec};
//! use penumbral::game::{play_game, GameOptions};
//!
//! let random = AgentSpec::of(AgentKind::RandomBot).resolve().unwrap();
//! let (mut white, mut black) = (random.build(), random.build());
//! let opts = GameOptions { turn_cap: 20, ..GameOptions::default() };
//! let record = play_game(white.as_mut(), black.as_mut(), 7, &opts);
//! assert!(penumbral::record::replay(&record).is_ok());
//! ```

pub mod agent;
pub mod baselines;
pub mod dsmcp;
pub mod elo;
pub mod game;
pub mod record;
pub mod selfplay;
pub mod stats;
pub mod tourney;

pub use agent::{Agent, AgentKind, AgentSpec};
pub use game::{play_game, GameOptions};
pub use record::GameRecord;
