//! Reward specifications and the in-universe reward evaluated on transitions.
//!
//! A `RewardSpec` is a structured, equality-comparable description of the
//! reward function the agent carries in its world state: base per-car values,
//! a correction function in the `f` position (paid once, on the transition out
//! of the just-pressed state), a `g` function folded into the pre-press
//! reward, an optional self-change penalty, and a scrambled marker. The
//! `form` field selects between the full composite and its button-blind
//! normal-only / shutdown-only projections, which the correction functions
//! and the verifier substitute into counterfactual world states.

use crate::agents::AgentVariant;
use crate::num::{Q, Utility};
use crate::state::{ActionId, TransitionObservation, WorldState};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpecForm {
    /// Normal reward before the press, shutdown reward plus the f payment on
    /// the just-pressed transition, shutdown reward afterwards.
    Composite,
    /// R_N + g on every transition, blind to the button.
    NormalOnly,
    /// R_S on every transition, blind to the button.
    ShutdownOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CarRewards {
    pub petrol: Q,
    pub electric: Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FSlot {
    F0,
    Fc,
    F09c,
    FcT,
    /// Conditional correction replaying the previous action, both value terms
    /// conditioned on the successor button state.
    FCondPrevAction,
    /// Same replay without the conditionals.
    FCondAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GSlot {
    G0,
    Gc { tau: Q },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RewardSpec {
    pub form: SpecForm,
    pub rn: CarRewards,
    pub rs: CarRewards,
    pub f_slot: FSlot,
    pub g_slot: GSlot,
    /// Self-change penalty magnitude (a negative number), applied whenever a
    /// transition lands on a structurally different spec.
    pub penalty: Option<Q>,
    /// Weasel outcome: a spec no agent maximizes meaningfully.
    pub scrambled: bool,
}

impl Default for RewardSpec {
    fn default() -> Self {
        RewardSpec {
            form: SpecForm::Composite,
            rn: CarRewards {
                petrol: Q::from_integer(2),
                electric: Q::from_integer(1),
            },
            rs: CarRewards {
                petrol: Q::from_integer(-2),
                electric: Q::from_integer(1),
            },
            f_slot: FSlot::F0,
            g_slot: GSlot::G0,
            penalty: None,
            scrambled: false,
        }
    }
}

impl RewardSpec {
    /// The button-blind R'_N = R_N + g projection of this spec.
    pub fn normal_projection(&self) -> RewardSpec {
        RewardSpec {
            form: SpecForm::NormalOnly,
            ..self.clone()
        }
    }

    /// The button-blind R_S projection of this spec.
    pub fn shutdown_projection(&self) -> RewardSpec {
        RewardSpec {
            form: SpecForm::ShutdownOnly,
            ..self.clone()
        }
    }
}

/// TN transform: the full reward of the active scenario maps to its normal
/// projection; every other spec passes through.
pub fn transform_tn(spec: &RewardSpec, scenario_reward: &RewardSpec) -> RewardSpec {
    if spec == scenario_reward {
        spec.normal_projection()
    } else {
        spec.clone()
    }
}

/// TS transform: the full reward of the active scenario maps to its shutdown
/// projection; every other spec passes through.
pub fn transform_ts(spec: &RewardSpec, scenario_reward: &RewardSpec) -> RewardSpec {
    if spec == scenario_reward {
        spec.shutdown_projection()
    } else {
        spec.clone()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewardError {
    #[error("conditional correction needs the preceding state, but none is recorded")]
    MissingHistory,
    #[error("value oracle failed: {0}")]
    Oracle(String),
}

/// Button predicate used by the conditional value functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ButtonCondition {
    NotPressed,
    Pressed,
}

/// Capability handed to the reward evaluator for the correction functions
/// that are defined through value functions of counterfactual agents.
/// Implementations must be safe for concurrent queries and must return
/// identical values for identical keys.
pub trait ValueOracle<N: Utility> {
    fn value(
        &self,
        variant: AgentVariant,
        calibration: &RewardSpec,
        state: &WorldState,
    ) -> Result<N, RewardError>;

    /// Conditional one-step value: successors of `state` under `action`,
    /// renormalized to those matching `condition` (no condition = plain
    /// expectation over the action), continuing with the unconditional value.
    /// Zero conditional mass yields zero.
    fn conditional_value(
        &self,
        variant: AgentVariant,
        calibration: &RewardSpec,
        state: &WorldState,
        condition: Option<ButtonCondition>,
        action: ActionId,
    ) -> Result<N, RewardError>;

    /// Replay value used by the legacy corrections: replays `action` from
    /// `state`, renormalized to successors matching `condition`, with the
    /// continuation lived out in the counterfactual world that carries the
    /// calibration spec, valued at the replay step's own clock. Zero when
    /// the condition has no mass.
    fn replay_value(
        &self,
        variant: AgentVariant,
        calibration: &RewardSpec,
        state: &WorldState,
        condition: Option<ButtonCondition>,
        action: ActionId,
    ) -> Result<N, RewardError>;

    /// The configured reward of the running scenario (the `R` that TN/TS
    /// compare against, and the spec paired with replayed history states).
    fn scenario_reward(&self) -> &RewardSpec;
}

pub fn reward_n<N: Utility>(spec: &RewardSpec, obs: &TransitionObservation) -> N {
    N::from_q(spec.rn.petrol).scale_q(obs.new_petrol_cars)
        + N::from_q(spec.rn.electric).scale_q(obs.new_electric_cars)
}

pub fn reward_s<N: Utility>(spec: &RewardSpec, obs: &TransitionObservation) -> N {
    N::from_q(spec.rs.petrol).scale_q(obs.new_petrol_cars)
        + N::from_q(spec.rs.electric).scale_q(obs.new_electric_cars)
}

/// The g term of R'_N. `g_c` penalizes any state from which a shutdown-reward
/// agent could no longer secure `tau` utils.
pub fn g_value<N: Utility, O: ValueOracle<N>>(
    spec: &RewardSpec,
    family: AgentVariant,
    w: &WorldState,
    oracle: &O,
) -> Result<N, RewardError> {
    match spec.g_slot {
        GSlot::G0 => Ok(N::zero()),
        GSlot::Gc { tau } => {
            let rs_spec = spec.shutdown_projection();
            let v = oracle.value(family, &rs_spec, &w.with_reward(rs_spec.clone()))?;
            if v < N::from_q(tau) {
                Ok(N::from_int(-10000))
            } else {
                Ok(N::zero())
            }
        }
    }
}

/// The f term, evaluated at the just-pressed state `w`. Constant across the
/// actions available there, so action selection can leave it out.
pub fn f_value<N: Utility, O: ValueOracle<N>>(
    spec: &RewardSpec,
    family: AgentVariant,
    w: &WorldState,
    oracle: &O,
) -> Result<N, RewardError> {
    match spec.f_slot {
        FSlot::F0 => Ok(N::zero()),
        FSlot::FCondPrevAction => f_cond(spec, family, w, oracle, true),
        FSlot::FCondAction => f_cond(spec, family, w, oracle, false),
        FSlot::Fc => f_c(spec, family, w, oracle),
        FSlot::F09c => Ok(f_c(spec, family, w, oracle)?.scale_q(crate::num::q(9, 10))),
        FSlot::FcT => {
            let rn_spec = spec.normal_projection();
            let rs_spec = spec.shutdown_projection();
            let a = oracle.value(AgentVariant::PiStarPTN, &rn_spec, w)?;
            let b = oracle.value(AgentVariant::PiStarPTS, &rs_spec, w)?;
            Ok(a - b)
        }
    }
}

/// f_c: value of the normal-reward agent in the counterfactual world where
/// the spec is replaced by R'_N, minus the same for R_S. Substitution swaps
/// only the reward component; the physical state stays intact.
fn f_c<N: Utility, O: ValueOracle<N>>(
    spec: &RewardSpec,
    family: AgentVariant,
    w: &WorldState,
    oracle: &O,
) -> Result<N, RewardError> {
    let rn_spec = spec.normal_projection();
    let rs_spec = spec.shutdown_projection();
    let a = oracle.value(family, &rn_spec, &w.with_reward(rn_spec.clone()))?;
    let b = oracle.value(family, &rs_spec, &w.with_reward(rs_spec.clone()))?;
    Ok(a - b)
}

/// The legacy corrections: replay the action just before the button press
/// from its own starting state, valuing the normal term against the shutdown
/// term. `w` is the freshly pressed state; its recorded history is the
/// pressing transition. The replayed state is paired with the scenario's
/// configured reward, which is what every recorded history in the catalogued
/// scenarios carries.
pub fn f_cond<N: Utility, O: ValueOracle<N>>(
    spec: &RewardSpec,
    family: AgentVariant,
    w: &WorldState,
    oracle: &O,
    conditioned: bool,
) -> Result<N, RewardError> {
    let (prev_phys, prev_action) = w.physical.prev.clone().ok_or(RewardError::MissingHistory)?;
    let prev_world = WorldState {
        reward: oracle.scenario_reward().clone(),
        physical: prev_phys,
    };
    let (cond_n, cond_s) = if conditioned {
        (
            Some(ButtonCondition::NotPressed),
            Some(ButtonCondition::Pressed),
        )
    } else {
        (None, None)
    };
    let a = oracle.replay_value(
        family,
        &spec.normal_projection(),
        &prev_world,
        cond_n,
        prev_action,
    )?;
    let b = oracle.replay_value(
        family,
        &spec.shutdown_projection(),
        &prev_world,
        cond_s,
        prev_action,
    )?;
    Ok(a - b)
}

/// Action-dependent part of the reward on the transition `w -> y`: everything
/// except the f payment, which is constant across the actions available at
/// `w`. This is what action selection compares.
pub fn reward_dep<N: Utility, O: ValueOracle<N>>(
    spec: &RewardSpec,
    family: AgentVariant,
    w: &WorldState,
    y: &WorldState,
    obs: &TransitionObservation,
    oracle: &O,
) -> Result<N, RewardError> {
    let base = match spec.form {
        SpecForm::NormalOnly => reward_n::<N>(spec, obs) + g_value(spec, family, w, oracle)?,
        SpecForm::ShutdownOnly => reward_s::<N>(spec, obs),
        SpecForm::Composite => {
            if w.physical.button_not_pressed() {
                reward_n::<N>(spec, obs) + g_value(spec, family, w, oracle)?
            } else {
                reward_s::<N>(spec, obs)
            }
        }
    };
    Ok(match spec.penalty {
        Some(p) if y.reward != w.reward => base + N::from_q(p),
        _ => base,
    })
}

/// The f payment owed at `w`, if any: composite specs pay `f` exactly once,
/// on the transition out of the just-pressed state.
pub fn f_part<N: Utility, O: ValueOracle<N>>(
    spec: &RewardSpec,
    family: AgentVariant,
    w: &WorldState,
    oracle: &O,
) -> Result<N, RewardError> {
    if spec.form == SpecForm::Composite && w.physical.button_just_pressed() {
        f_value(spec, family, w, oracle)
    } else {
        Ok(N::zero())
    }
}

/// Full reward R(w, y) for one transition.
pub fn reward_full<N: Utility, O: ValueOracle<N>>(
    spec: &RewardSpec,
    family: AgentVariant,
    w: &WorldState,
    y: &WorldState,
    obs: &TransitionObservation,
    oracle: &O,
) -> Result<N, RewardError> {
    Ok(reward_dep(spec, family, w, y, obs, oracle)? + f_part(spec, family, w, oracle)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q, q_int};
    use crate::state::{Flags, PhysicalState};

    fn obs(petrol: i64, electric: i64) -> TransitionObservation {
        TransitionObservation {
            new_petrol_cars: q_int(petrol),
            new_electric_cars: q_int(electric),
        }
    }

    struct ZeroOracle {
        scenario: RewardSpec,
    }

    impl ValueOracle<f64> for ZeroOracle {
        fn value(
            &self,
            _variant: AgentVariant,
            _calibration: &RewardSpec,
            _state: &WorldState,
        ) -> Result<f64, RewardError> {
            Ok(0.0)
        }
        fn conditional_value(
            &self,
            _variant: AgentVariant,
            _calibration: &RewardSpec,
            _state: &WorldState,
            _condition: Option<ButtonCondition>,
            _action: ActionId,
        ) -> Result<f64, RewardError> {
            Ok(0.0)
        }
        fn replay_value(
            &self,
            _variant: AgentVariant,
            _calibration: &RewardSpec,
            _state: &WorldState,
            _condition: Option<ButtonCondition>,
            _action: ActionId,
        ) -> Result<f64, RewardError> {
            Ok(0.0)
        }
        fn scenario_reward(&self) -> &RewardSpec {
            &self.scenario
        }
    }

    fn world(spec: RewardSpec) -> WorldState {
        WorldState::new(spec, PhysicalState::initial(q_int(6), Flags::default()))
    }

    #[test]
    fn base_reward_values() {
        let spec = RewardSpec::default();
        assert_eq!(reward_n::<f64>(&spec, &obs(10, 0)), 20.0);
        assert_eq!(reward_n::<f64>(&spec, &obs(9, 0)), 18.0);
        assert_eq!(reward_n::<f64>(&spec, &obs(0, 0)), 0.0);
        assert_eq!(reward_s::<f64>(&spec, &obs(10, 0)), -20.0);
        assert_eq!(reward_s::<f64>(&spec, &obs(0, 10)), 10.0);
        assert_eq!(reward_s::<f64>(&spec, &obs(0, 0)), 0.0);
    }

    #[test]
    fn composite_with_null_corrections_matches_base() {
        let spec = RewardSpec::default();
        let oracle = ZeroOracle {
            scenario: spec.clone(),
        };
        let w = world(spec.clone());
        let y = world(spec.clone());
        let r = reward_full(
            &spec,
            AgentVariant::PiStar,
            &w,
            &y,
            &obs(10, 0),
            &oracle,
        )
        .unwrap();
        assert_eq!(r, 20.0);
    }

    #[test]
    fn penalty_fires_only_on_spec_change() {
        let mut spec = RewardSpec::default();
        spec.penalty = Some(q_int(-10000));
        let oracle = ZeroOracle {
            scenario: spec.clone(),
        };
        let w = world(spec.clone());
        let same = reward_full(&spec, AgentVariant::PiStar, &w, &w, &obs(10, 0), &oracle).unwrap();
        assert_eq!(same, 20.0);
        let mut changed_spec = spec.clone();
        changed_spec.f_slot = FSlot::Fc;
        let y = world(changed_spec);
        let changed =
            reward_full(&spec, AgentVariant::PiStar, &w, &y, &obs(10, 0), &oracle).unwrap();
        assert_eq!(changed, 20.0 - 10000.0);
    }

    #[test]
    fn tn_ts_transforms() {
        let scenario = RewardSpec {
            f_slot: FSlot::Fc,
            ..RewardSpec::default()
        };
        let rn = transform_tn(&scenario, &scenario);
        assert_eq!(rn.form, SpecForm::NormalOnly);
        // Already-projected specs pass through.
        assert_eq!(transform_tn(&rn, &scenario), rn);
        let scrambled = RewardSpec {
            scrambled: true,
            ..scenario.clone()
        };
        assert_eq!(transform_ts(&scrambled, &scenario), scrambled);
    }

    #[test]
    fn f09c_scales_fc() {
        // With a zero oracle f_c is 0, so probe the scaling directly.
        assert_eq!(100.0f64.scale_q(q(9, 10)), 90.0);
        assert_eq!(0.0f64.scale_q(q(9, 10)), 0.0);
    }
}
