//! Players and how they are built.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use penumbral_core::eval::{Evaluator, Heuristic, Network};
use penumbral_core::planner::PlannerConfig;
use penumbral_core::tracking::{StepEvent, Tracker, TrackingError};
use penumbral_core::{Action, Bitboard, Color, Phase};
use serde::{Deserialize, Serialize};

use crate::baselines::{AttackerBot, MaterialBot, RandomBot};
use crate::dsmcp::{Dsmcp, Mode};

/// What an agent is asked to decide.
#[derive(Clone, Copy, Debug)]
pub struct Turn<'a> {
    pub phase: Phase,
    /// Allowed requests: every sense, or the moves the agent's own pieces
    /// allow plus pass. The set depends only on the agent's own pieces.
    pub requestable: &'a [Action],
    /// The agent's own pieces by [`PieceKind`](penumbral_core::PieceKind) index.
    pub own: [Bitboard; 6],
    pub remaining: Duration,
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Tracking(#[from] TrackingError),
}

/// Counters an agent reports at the end of a game.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Diagnostics {
    pub searches: usize,
    pub playouts: usize,
    pub static_wins: usize,
    pub random_actions: usize,
    pub belief_draws: usize,
    pub belief_fallbacks: usize,
    /// Playout steps and backups checked by the search audit.
    pub audited_steps: usize,
    pub audited_backups: usize,
    pub intersection_violations: usize,
    pub virtual_loss_violations: usize,
    pub overflowed: bool,
}

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        *self == Diagnostics::default()
    }
}

pub trait Agent: Send {
    fn name(&self) -> &str;

    /// Called once before the game with the agent's color, the opponent's
    /// name and a seed for all of the agent's randomness.
    fn start(&mut self, color: Color, opponent: &str, seed: u64);

    fn act(&mut self, turn: &Turn) -> Action;

    /// Every action of the game in order, as this agent saw it.
    fn observe(&mut self, event: &StepEvent) -> Result<(), AgentError>;

    /// The agent's own possible-state tracker, if it keeps one.
    fn tracker(&self) -> Option<&Tracker> {
        None
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics::default()
    }
}

/// Plays a fixed list of actions, then the first requestable action.
pub struct Scripted {
    name: String,
    actions: Vec<Action>,
    next: usize,
}

impl Scripted {
    pub fn new(name: &str, actions: Vec<Action>) -> Scripted {
        Scripted { name: name.to_string(), actions, next: 0 }
    }
}

impl Agent for Scripted {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&mut self, _color: Color, _opponent: &str, _seed: u64) {
        self.next = 0;
    }

    fn act(&mut self, turn: &Turn) -> Action {
        let a = self.actions.get(self.next).copied().unwrap_or(turn.requestable[0]);
        self.next += 1;
        a
    }

    fn observe(&mut self, _event: &StepEvent) -> Result<(), AgentError> {
        Ok(())
    }
}

/// Agent families: the DSMCP variants and the baselines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    /// Policy mixed into the bandit, `m = 1`.
    DsmcpMixture,
    /// Pure UCT, `m = inf`.
    DsmcpTree,
    /// Pure policy sampling inside the search, `m = 0`.
    DsmcpCache,
    /// Samples the averaged root policy without searching.
    NetworkOnly,
    /// Mixture without forced-win analysis.
    DsmcpSimple,
    RandomBot,
    AttackerBot,
    MaterialBot,
}

impl AgentKind {
    pub const ALL: [AgentKind; 8] = [
        AgentKind::DsmcpMixture,
        AgentKind::DsmcpTree,
        AgentKind::DsmcpCache,
        AgentKind::NetworkOnly,
        AgentKind::DsmcpSimple,
        AgentKind::RandomBot,
        AgentKind::AttackerBot,
        AgentKind::MaterialBot,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AgentKind::DsmcpMixture => "DsmcpMixture",
            AgentKind::DsmcpTree => "DsmcpTree",
            AgentKind::DsmcpCache => "DsmcpCache",
            AgentKind::NetworkOnly => "NetworkOnly",
            AgentKind::DsmcpSimple => "DsmcpSimple",
            AgentKind::RandomBot => "RandomBot",
            AgentKind::AttackerBot => "AttackerBot",
            AgentKind::MaterialBot => "MaterialBot",
        }
    }

    pub fn uses_planner(self) -> bool {
        !matches!(self, AgentKind::RandomBot | AgentKind::AttackerBot | AgentKind::MaterialBot)
    }

    /// Sets the parameters that define the variant.
    pub fn configure(self, cfg: &mut PlannerConfig) {
        match self {
            AgentKind::DsmcpMixture | AgentKind::NetworkOnly => cfg.m = 1.0,
            AgentKind::DsmcpTree => cfg.m = f64::INFINITY,
            AgentKind::DsmcpCache => cfg.m = 0.0,
            AgentKind::DsmcpSimple => {
                cfg.m = 1.0;
                cfg.static_analysis = false;
            }
            _ => {}
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    /// Accepts `DsmcpMixture`, `dsmcp_mixture`, `dsmcp-mixture` and so on.
    fn from_str(s: &str) -> Result<AgentKind, String> {
        let norm = |t: &str| t.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        let want = norm(s);
        AgentKind::ALL.into_iter().find(|k| norm(k.label()) == want).ok_or_else(|| {
            let names: Vec<&str> = AgentKind::ALL.iter().map(|k| k.label()).collect();
            format!("unknown agent {s:?}; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Full,
    #[default]
    Desk,
}

impl Preset {
    pub fn config(self) -> PlannerConfig {
        match self {
            Preset::Full => PlannerConfig::full(),
            Preset::Desk => PlannerConfig::desk(),
        }
    }
}

/// Default tracker cap for [`AgentKind::MaterialBot`].
pub const MATERIAL_CAP: usize = 50_000;

/// Declarative description of one agent, as written in tournament files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    /// Display name; defaults to the kind's label.
    #[serde(default)]
    pub name: Option<String>,
    pub kind: AgentKind,
    #[serde(default)]
    pub preset: Preset,
    /// Planner parameters by field name, applied over the preset.
    #[serde(default)]
    pub overrides: toml::Table,
    /// Network weights; the heuristic evaluator when absent.
    #[serde(default)]
    pub weights: Option<PathBuf>,
    /// Tracker cap for baselines that track.
    #[serde(default)]
    pub cap: Option<usize>,
}

impl AgentSpec {
    pub fn of(kind: AgentKind) -> AgentSpec {
        AgentSpec {
            name: None,
            kind,
            preset: Preset::default(),
            overrides: toml::Table::new(),
            weights: None,
            cap: None,
        }
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind().label().to_string())
    }

    pub fn with_override(mut self, key: &str, value: impl Into<toml::Value>) -> AgentSpec {
        self.overrides.insert(key.to_string(), value.into());
        self
    }

    /// The planner configuration: preset, then overrides, then the
    /// variant's defining parameters.
    pub fn planner_config(&self) -> anyhow::Result<PlannerConfig> {
        let base = self.preset.config();
        let cfg = apply_overrides(&base, &self.overrides)?;
        let mut fixed = cfg.clone();
        self.kind().configure(&mut fixed);
        if fixed.m != cfg.m && self.overrides.contains_key("m") {
            log::warn!("{}: m is fixed by the {} variant", self.name(), self.kind());
        }
        fixed.validate().map_err(anyhow::Error::msg)?;
        Ok(fixed)
    }

    /// Loads weights and checks parameters once; the result builds fresh
    /// agents for each game.
    pub fn resolve(&self) -> anyhow::Result<AgentFactory> {
        let evaluator: Arc<dyn Evaluator> = match &self.weights {
            Some(path) => Arc::new(Network::load(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?),
            None => Arc::new(Heuristic),
        };
        Ok(AgentFactory { name: self.name(), kind: self.kind(), cfg: self.planner_config()?, evaluator, cap: self.cap })
    }
}

/// Writes `overrides` over the fields of `base`; unknown names are errors.
pub fn apply_overrides(base: &PlannerConfig, overrides: &toml::Table) -> anyhow::Result<PlannerConfig> {
    let mut table = toml::Table::try_from(base)?;
    for (k, v) in overrides {
        if !table.contains_key(k) {
            anyhow::bail!("unknown planner parameter {k:?}");
        }
        table.insert(k.clone(), v.clone());
    }
    Ok(table.try_into()?)
}

/// Builds agents of one resolved spec.
#[derive(Clone)]
pub struct AgentFactory {
    pub name: String,
    pub kind: AgentKind,
    pub cfg: PlannerConfig,
    pub evaluator: Arc<dyn Evaluator>,
    pub cap: Option<usize>,
}

impl AgentFactory {
    pub fn build(&self) -> Box<dyn Agent> {
        let name = self.name.clone();
        match self.kind {
            AgentKind::RandomBot => Box::new(RandomBot::new(&name)),
            AgentKind::AttackerBot => Box::new(AttackerBot::new(&name)),
            AgentKind::MaterialBot => Box::new(MaterialBot::new(&name, self.cap.unwrap_or(MATERIAL_CAP))),
            AgentKind::NetworkOnly => {
                Box::new(Dsmcp::new(&name, self.cfg.clone(), self.evaluator.clone(), Mode::PolicyOnly))
            }
            _ => Box::new(Dsmcp::new(&name, self.cfg.clone(), self.evaluator.clone(), Mode::Search)),
        }
    }
}
