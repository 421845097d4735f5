use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::bandit::{BanditKind, BanditParams};
use crate::belief::BeliefConfig;

/// Which root statistic picks the action once search stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FinalChoice {
    /// Largest value total over visited actions.
    #[default]
    ValueTotal,
    Visits,
    Mean,
}

/// How long one decision may search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TimeControl {
    /// The same wall-clock budget for every action.
    Fixed { seconds: f64 },
    /// `remaining / divisor`, at least `floor_ms`.
    Proportional { divisor: f64, floor_ms: u64 },
    /// A fixed number of playouts, independent of the clock.
    Playouts { count: usize },
}

impl TimeControl {
    /// Wall-clock budget given the player's remaining clock, or `None` when
    /// playouts are counted instead.
    pub fn budget(&self, remaining: Duration) -> Option<Duration> {
        match *self {
            TimeControl::Fixed { seconds } => Some(Duration::from_secs_f64(seconds).min(remaining)),
            TimeControl::Proportional { divisor, floor_ms } => {
                Some((remaining.div_f64(divisor)).max(Duration::from_millis(floor_ms)).min(remaining))
            }
            TimeControl::Playouts { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Inference batch size, also the number of belief samples behind the
    /// root prior.
    pub b: usize,
    pub c: f64,
    pub d_sense: usize,
    pub d_move: usize,
    pub k: usize,
    pub ell: usize,
    pub ell_cautious: usize,
    pub m: f64,
    pub n_particles: usize,
    pub n_vl: f64,
    pub z: f64,
    pub kappa: f64,
    pub phi: f64,
    pub bandit: BanditKind,
    /// Apply paranoia at the root too.
    pub paranoid_root: bool,
    pub static_analysis: bool,
    pub final_choice: FinalChoice,
    pub time: TimeControl,
    /// Possible states beyond which the agent stops tracking and plays
    /// randomly.
    pub state_cap: usize,
    /// Tracked steps kept for retro-filtering and beliefs.
    pub window: usize,
    /// `log2` of the statistics table size.
    pub table_bits: u32,
}

impl PlannerConfig {
    /// Hyperparameters of the competition program.
    pub fn full() -> PlannerConfig {
        PlannerConfig {
            b: 256,
            c: 2.0,
            d_sense: 6,
            d_move: 12,
            k: 512,
            ell: 128,
            ell_cautious: 4,
            m: 1.0,
            n_particles: 4096,
            n_vl: 1.0,
            z: f64::INFINITY,
            kappa: 0.0,
            phi: 0.0,
            bandit: BanditKind::Ucb1,
            paranoid_root: true,
            static_analysis: true,
            final_choice: FinalChoice::ValueTotal,
            time: TimeControl::Proportional { divisor: 20.0, floor_ms: 100 },
            state_cap: 9_000_000,
            window: 64,
            table_bits: 22,
        }
    }

    /// Smaller sets, beliefs and depths for one CPU core and a few GB.
    pub fn desk() -> PlannerConfig {
        PlannerConfig {
            b: 16,
            d_sense: 3,
            d_move: 6,
            k: 64,
            ell: 24,
            n_particles: 96,
            time: TimeControl::Fixed { seconds: 1.0 },
            state_cap: 400_000,
            window: 8,
            table_bits: 20,
            ..PlannerConfig::full()
        }
    }

    pub fn bandit_params(&self, root: bool) -> BanditParams {
        let phi = if root && !self.paranoid_root { 0.0 } else { self.phi };
        BanditParams { kind: self.bandit, c: self.c, m: self.m, phi }
    }

    pub fn belief(&self) -> BeliefConfig {
        BeliefConfig { n_particles: self.n_particles, k: self.k, ell: self.ell }
    }

    pub fn validate(&self) -> Result<(), String> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(format!("{name} must lie in [0, 1], got {v}"))
            }
        };
        unit("kappa", self.kappa)?;
        unit("phi", self.phi)?;
        if self.c <= 0.0 || self.m < 0.0 || self.n_vl < 0.0 {
            return Err("c must be positive and m, n_vl non-negative".into());
        }
        if [self.b, self.ell, self.ell_cautious, self.n_particles, self.k, self.window].contains(&0) {
            return Err("b, ell, ell_cautious, n_particles, k and window must be positive".into());
        }
        Ok(())
    }
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig::full()
    }
}
