//! Deterministic simulator and verification engine for corrigible
//! utility-maximizing agents in a finite car-factory toy universe.
//!
//! The crate is organized around six pieces:
//!
//! - [`state`]: world states, actions, successor distributions
//! - [`rewards`]: reward specifications and correction functions
//! - [`agents`]: policies and memoized value functions
//! - [`factory`]: the toy universe and its scenario extensions
//! - [`verify`]: executable constraint and desiderata checks plus an
//!   independent brute-force value oracle
//! - [`trace`] / [`config`] / [`studies`]: scenario runner, trace rendering,
//!   declarative configs, and the golden trace-study suite

pub mod agents;
pub mod config;
pub mod factory;
pub mod num;
pub mod par;
pub mod rewards;
pub mod state;
pub mod studies;
pub mod trace;
pub mod verify;

pub use agents::{AgentSpec, AgentVariant, Engine, EngineError, TieValue};
pub use factory::{build_universe, ScenarioConfig, ScenarioKind, ScenarioParams, Universe};
pub use num::{Q, Utility};
pub use rewards::{ButtonCondition, FSlot, GSlot, RewardSpec, SpecForm};
pub use state::{ActionId, Button, PhysicalState, Token, WorldState};
pub use trace::{render_compact, render_tokens, run, TraceSet};
