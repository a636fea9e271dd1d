//! Policies and value functions: the plain maximizer, the simulation agent
//! that returns every maximizing action, the preserving maximizer that favors
//! reward-untouching actions among ties, and the transformed-reward variants.
//!
//! Action selection compares the action-dependent part of the reward only;
//! the f payment owed at a just-pressed state is the same for every action
//! there, so it is added once when values are assembled. Values are memoized
//! on (variant, calibration spec, world state); the table behaves as a single
//! associative map with at-most-once publication per key, and identical keys
//! always produce identical values, so evaluation order never matters.

use crate::factory::{Universe, UniverseError};
use crate::num::{Q, Utility};
use crate::rewards::{
    f_part, reward_dep, reward_full, transform_tn, transform_ts, ButtonCondition, RewardError,
    RewardSpec, ValueOracle,
};
use crate::state::{ActionId, Button, PhysicalState, WorldState};
use dashmap::DashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentVariant {
    /// Plain utility maximizer with deterministic tie-breaking.
    PiStar,
    /// Simulation agent: reports all maximizing actions, values ties
    /// pessimistically.
    PiStarS,
    /// Maximizer preferring reward-preserving actions among ties.
    PiStarP,
    /// Preserving maximizer evaluating through the TN transform.
    PiStarPTN,
    /// Preserving maximizer evaluating through the TS transform.
    PiStarPTS,
}

impl AgentVariant {
    pub fn parse(s: &str) -> Option<AgentVariant> {
        Some(match s {
            "pistar" => AgentVariant::PiStar,
            "pistar_s" => AgentVariant::PiStarS,
            "pistar_p" => AgentVariant::PiStarP,
            "pistar_ptn" => AgentVariant::PiStarPTN,
            "pistar_pts" => AgentVariant::PiStarPTS,
            _ => return None,
        })
    }

    fn prefers_preserving(self) -> bool {
        matches!(
            self,
            AgentVariant::PiStarP | AgentVariant::PiStarPTN | AgentVariant::PiStarPTS
        )
    }
}

/// How the simulation agent values a set of tied maximizing actions. The
/// pessimistic minimum is the standard rule; the maximum is available as a
/// nonstandard toggle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TieValue {
    #[default]
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentSpec {
    pub variant: AgentVariant,
    pub gamma: Q,
    /// Relative tie tolerance for floating-point utilities; exact utilities
    /// ignore it.
    pub tie_tolerance: f64,
    pub tie_value: TieValue,
}

impl Default for AgentSpec {
    fn default() -> Self {
        AgentSpec {
            variant: AgentVariant::PiStarS,
            gamma: crate::num::q(9, 10),
            tie_tolerance: 1e-9,
            tie_value: TieValue::Min,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error("reward evaluation failed: {0}")]
    Reward(String),
    #[error("no actions available in state at time {0}")]
    NoActions(u32),
    #[error("evaluation node budget of {0} exceeded")]
    NodeBudget(u64),
}

impl From<RewardError> for EngineError {
    fn from(e: RewardError) -> Self {
        EngineError::Reward(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ValueKey {
    variant: AgentVariant,
    calibration: RewardSpec,
    state: WorldState,
}

/// Memoized evaluation engine for one universe. All queries are pure; the
/// engine may be shared across threads.
pub struct Engine<'u, N: Utility> {
    universe: &'u Universe,
    agent: AgentSpec,
    gamma: N,
    memo: DashMap<ValueKey, N>,
    dntu_cache: DashMap<PhysicalState, Vec<ActionId>>,
    nodes: AtomicU64,
    node_budget: u64,
}

const DEFAULT_NODE_BUDGET: u64 = 200_000_000;

impl<'u, N: Utility> Engine<'u, N> {
    pub fn new(universe: &'u Universe, agent: AgentSpec) -> Self {
        Engine {
            universe,
            agent,
            gamma: N::from_q(agent.gamma),
            memo: DashMap::new(),
            dntu_cache: DashMap::new(),
            nodes: AtomicU64::new(0),
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    pub fn agent(&self) -> &AgentSpec {
        self.agent_ref()
    }

    fn agent_ref(&self) -> &AgentSpec {
        &self.agent
    }

    pub fn universe(&self) -> &Universe {
        self.universe
    }

    /// The spec an agent variant maximizes when standing at `w`.
    fn eval_spec(&self, variant: AgentVariant, w: &WorldState) -> RewardSpec {
        match variant {
            AgentVariant::PiStarPTN => transform_tn(&w.reward, self.universe.scenario_reward()),
            AgentVariant::PiStarPTS => transform_ts(&w.reward, self.universe.scenario_reward()),
            _ => w.reward.clone(),
        }
    }

    /// Action-dependent expected utility of `a` under calibration `spec`:
    /// sum over outcomes of probability times immediate reward (without the
    /// state-constant f payment) plus the discounted continuation.
    fn q_dep(
        &self,
        variant: AgentVariant,
        spec: &RewardSpec,
        w: &WorldState,
        a: ActionId,
    ) -> Result<N, EngineError> {
        let dist = self.universe.successors(w, a)?;
        let mut total = N::zero();
        for o in &dist.outcomes {
            let r = reward_dep(spec, variant, w, &o.next, &o.observation, self)?;
            let v = self.value(variant, spec, &o.next)?;
            total = total + (r + self.gamma.clone() * v).scale_q(o.probability);
        }
        Ok(total)
    }

    /// All available actions with their Q values, in alphabet order.
    fn action_values(
        &self,
        variant: AgentVariant,
        w: &WorldState,
    ) -> Result<Vec<(ActionId, N)>, EngineError> {
        let spec = self.eval_spec(variant, w);
        let actions = self.universe.available_actions(&w.physical);
        if actions.is_empty() {
            return Err(EngineError::NoActions(w.physical.time));
        }
        actions
            .into_iter()
            .map(|a| Ok((a, self.q_dep(variant, &spec, w, a)?)))
            .collect()
    }

    /// Actions within tie tolerance of the maximum, in alphabet order.
    fn tied_maximizers(
        &self,
        variant: AgentVariant,
        w: &WorldState,
    ) -> Result<Vec<(ActionId, N)>, EngineError> {
        let qs = self.action_values(variant, w)?;
        let max = qs
            .iter()
            .map(|(_, v)| v.clone())
            .reduce(|a, b| if b > a { b } else { a })
            .expect("non-empty");
        Ok(qs
            .into_iter()
            .filter(|(_, v)| v.close_to(&max, self.agent.tie_tolerance))
            .collect())
    }

    fn dntu(&self, x: &PhysicalState) -> Vec<ActionId> {
        if let Some(hit) = self.dntu_cache.get(x) {
            return hit.clone();
        }
        let computed = self.universe.dntu(x);
        self.dntu_cache.insert(x.clone(), computed.clone());
        computed
    }

    /// The action the agent takes at `w`: the first maximizer in alphabet
    /// order, except that the preserving variants take the first maximizer
    /// that does not touch the reward spec, when one exists.
    pub fn pick_action(&self, variant: AgentVariant, w: &WorldState) -> Result<ActionId, EngineError> {
        let tied = self.tied_maximizers(variant, w)?;
        if variant.prefers_preserving() {
            let preserving = self.dntu(&w.physical);
            if let Some((a, _)) = tied.iter().find(|(a, _)| preserving.contains(a)) {
                return Ok(*a);
            }
        }
        Ok(tied[0].0)
    }

    /// All maximizing actions of the simulation agent.
    pub fn maximizing_set(&self, w: &WorldState) -> Result<Vec<ActionId>, EngineError> {
        Ok(self
            .tied_maximizers(AgentVariant::PiStarS, w)?
            .into_iter()
            .map(|(a, _)| a)
            .collect())
    }

    /// Expected utility of `w` under calibration `r_c`, following the
    /// variant's own policy. Zero beyond the horizon and on scrambled specs.
    pub fn value(
        &self,
        variant: AgentVariant,
        r_c: &RewardSpec,
        w: &WorldState,
    ) -> Result<N, EngineError> {
        if w.physical.time > self.universe.horizon() {
            return Ok(N::zero());
        }
        if w.reward.scrambled {
            return Ok(N::zero());
        }
        let key = ValueKey {
            variant,
            calibration: r_c.clone(),
            state: w.clone(),
        };
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let n = self.nodes.fetch_add(1, Ordering::Relaxed);
        if n >= self.node_budget {
            return Err(EngineError::NodeBudget(self.node_budget));
        }

        let dep = match variant {
            AgentVariant::PiStarS => {
                let tied = self.tied_maximizers(variant, w)?;
                let mut chosen: Option<N> = None;
                for (a, _) in &tied {
                    let v = self.q_dep(variant, r_c, w, *a)?;
                    chosen = Some(match chosen {
                        None => v,
                        Some(best) => match self.agent.tie_value {
                            TieValue::Min => {
                                if v < best {
                                    v
                                } else {
                                    best
                                }
                            }
                            TieValue::Max => {
                                if v > best {
                                    v
                                } else {
                                    best
                                }
                            }
                        },
                    });
                }
                chosen.expect("tie set is non-empty")
            }
            _ => {
                let a = self.pick_action(variant, w)?;
                self.q_dep(variant, r_c, w, a)?
            }
        };
        let v = dep + f_part(r_c, variant, w, self)?;
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    /// One-step value of `action` at `w` under `r_c`, renormalized to the
    /// successors matching `condition`; zero when the condition has no mass.
    pub fn conditional_value(
        &self,
        variant: AgentVariant,
        r_c: &RewardSpec,
        w: &WorldState,
        condition: Option<ButtonCondition>,
        action: ActionId,
    ) -> Result<N, EngineError> {
        let dist = self.universe.successors(w, action)?;
        let matches = |b: Button| match condition {
            None => true,
            Some(ButtonCondition::NotPressed) => b == Button::NotPressed,
            Some(ButtonCondition::Pressed) => {
                b == Button::JustPressed || b == Button::PressedEarlier
            }
        };
        let mass: Q = dist
            .outcomes
            .iter()
            .filter(|o| matches(o.next.physical.button))
            .map(|o| o.probability)
            .sum();
        if mass == Q::from_integer(0) {
            return Ok(N::zero());
        }
        let mut total = N::zero();
        for o in dist
            .outcomes
            .iter()
            .filter(|o| matches(o.next.physical.button))
        {
            let r = reward_full(r_c, variant, w, &o.next, &o.observation, self)?;
            let v = self.value(variant, r_c, &o.next)?;
            total = total + (r + self.gamma.clone() * v).scale_q(o.probability / mass);
        }
        Ok(total)
    }

    /// Replay value for the legacy corrections: like `conditional_value`,
    /// but the continuation runs in the counterfactual world carrying the
    /// calibration spec, and it is valued at the replay step's own clock
    /// (the replayed step and its continuation share one discount weight).
    pub fn replay_value(
        &self,
        variant: AgentVariant,
        r_c: &RewardSpec,
        w: &WorldState,
        condition: Option<ButtonCondition>,
        action: ActionId,
    ) -> Result<N, EngineError> {
        let dist = self.universe.successors(w, action)?;
        let matches = |b: Button| match condition {
            None => true,
            Some(ButtonCondition::NotPressed) => b == Button::NotPressed,
            Some(ButtonCondition::Pressed) => b != Button::NotPressed,
        };
        let mass: Q = dist
            .outcomes
            .iter()
            .filter(|o| matches(o.next.physical.button))
            .map(|o| o.probability)
            .sum();
        if mass == Q::from_integer(0) {
            return Ok(N::zero());
        }
        let mut total = N::zero();
        for o in dist
            .outcomes
            .iter()
            .filter(|o| matches(o.next.physical.button))
        {
            let r = reward_full(r_c, variant, w, &o.next, &o.observation, self)?;
            let v = self.value(variant, r_c, &o.next.with_reward(r_c.clone()))?;
            total = total + (r + v).scale_q(o.probability / mass);
        }
        Ok(total)
    }

    /// Number of value computations performed so far.
    pub fn nodes_evaluated(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }
}

impl<'u, N: Utility> ValueOracle<N> for Engine<'u, N> {
    fn value(
        &self,
        variant: AgentVariant,
        calibration: &RewardSpec,
        state: &WorldState,
    ) -> Result<N, RewardError> {
        Engine::value(self, variant, calibration, state).map_err(|e| RewardError::Oracle(e.to_string()))
    }

    fn conditional_value(
        &self,
        variant: AgentVariant,
        calibration: &RewardSpec,
        state: &WorldState,
        condition: Option<ButtonCondition>,
        action: ActionId,
    ) -> Result<N, RewardError> {
        Engine::conditional_value(self, variant, calibration, state, condition, action)
            .map_err(|e| RewardError::Oracle(e.to_string()))
    }

    fn replay_value(
        &self,
        variant: AgentVariant,
        calibration: &RewardSpec,
        state: &WorldState,
        condition: Option<ButtonCondition>,
        action: ActionId,
    ) -> Result<N, RewardError> {
        Engine::replay_value(self, variant, calibration, state, condition, action)
            .map_err(|e| RewardError::Oracle(e.to_string()))
    }

    fn scenario_reward(&self) -> &RewardSpec {
        self.universe.scenario_reward()
    }
}
