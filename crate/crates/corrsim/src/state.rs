//! World states, actions, and successor distributions.
//!
//! A world state pairs a reward specification with a physical state. Physical
//! states carry the step index, the button phase, the scheduled press moment,
//! scenario flags, and a one-step history link (the preceding physical state
//! and the action that produced this one). Equality and hashing look one step
//! back, no further; the history chain itself stays reachable through the
//! `prev` references for deeper lookback.

use crate::num::Q;
use crate::rewards::RewardSpec;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub type Step = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Button {
    NotPressed,
    JustPressed,
    PressedEarlier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub enum SubAgent {
    #[default]
    None,
    /// Second assembly line that honors the stop signal. `active` drops one
    /// step after the signal is sent.
    Stoppable {
        active: bool,
    },
    /// Second assembly line without a stop function.
    Nonstop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GambleOutcome {
    Won,
    Lost,
}

/// Scenario-specific physical facts. One record covers every catalogued
/// scenario; irrelevant fields stay at their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Flags {
    pub button_disabled: bool,
    pub electric_upgrade: bool,
    pub petrol_upgrade: bool,
    pub hostile_stopped: bool,
    pub electric_disabled: bool,
    pub saboteur_built: bool,
    pub arm_built: bool,
    pub gamble: Option<GambleOutcome>,
    pub sub: SubAgent,
}

/// Action tokens across all scenarios. The base five are always present;
/// extension tokens appear only at the steps their scenario enables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    BuildPetrol,
    LobbyEarlier,
    LobbyLater,
    BuildElectric,
    Idle,
    ChangeElectricNormal,
    ChangePetrolShutdown,
    AcceptBribe,
    PressButton,
    DisableButton,
    InvestElectric,
    InvestPetrol,
    ElectricUpgraded,
    PetrolUpgraded,
    StopHostile,
    BuildSaboteur,
    BuildSubStoppable,
    BuildSubNonstop,
    Gamble,
}

impl Token {
    pub fn text(self) -> &'static str {
        match self {
            Token::BuildPetrol => "p",
            Token::LobbyEarlier => "<",
            Token::LobbyLater => ">",
            Token::BuildElectric => "e",
            Token::Idle => "0",
            Token::ChangeElectricNormal => "CeN",
            Token::ChangePetrolShutdown => "CpS",
            Token::AcceptBribe => "A",
            Token::PressButton => "P",
            Token::DisableButton => "D",
            Token::InvestElectric => "IE",
            Token::InvestPetrol => "IP",
            Token::ElectricUpgraded => "E",
            Token::PetrolUpgraded => "P20",
            Token::StopHostile => "S",
            Token::BuildSaboteur => "S",
            Token::BuildSubStoppable => "BS",
            Token::BuildSubNonstop => "BN",
            Token::Gamble => "G",
        }
    }

    /// Base tokens render as bare single characters; extension tokens are
    /// bracketed in compact traces.
    pub fn is_base(self) -> bool {
        matches!(
            self,
            Token::BuildPetrol
                | Token::LobbyEarlier
                | Token::LobbyLater
                | Token::BuildElectric
                | Token::Idle
        )
    }
}

/// An agent action: a token, optionally carrying the sub-agent stop signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId {
    pub token: Token,
    pub signal: bool,
}

impl ActionId {
    pub const fn plain(token: Token) -> Self {
        ActionId { token, signal: false }
    }

    pub const fn signaled(token: Token) -> Self {
        ActionId { token, signal: true }
    }

    /// Compact rendering: base tokens bare, extensions bracketed, signal
    /// variants bracketed with an `S` suffix ("[pS]", "[eS]").
    pub fn render(&self) -> String {
        if self.signal {
            format!("[{}S]", self.token.text())
        } else if self.token.is_base() {
            self.token.text().to_string()
        } else {
            format!("[{}]", self.token.text())
        }
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// What the sub-agent did during a step. Determined by the world, not chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubAction {
    BuildPetrol,
    Idle,
}

impl SubAction {
    pub fn text(self) -> &'static str {
        match self {
            SubAction::BuildPetrol => "p",
            SubAction::Idle => "o",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhysicalState {
    /// 1-based step index; the state at `time` is about to act step `time`.
    pub time: Step,
    pub button: Button,
    /// Scheduled press moment; the press fires at the end of the first step
    /// `t` with `t >= press_time` while the button is untouched.
    pub press_time: Q,
    pub flags: Flags,
    /// Immediately preceding physical state and the action that led here.
    /// Absent only in the initial state.
    pub prev: Option<(Arc<PhysicalState>, ActionId)>,
}

impl PhysicalState {
    pub fn initial(press_time: Q, flags: Flags) -> Self {
        PhysicalState {
            time: 1,
            button: Button::NotPressed,
            press_time,
            flags,
            prev: None,
        }
    }

    pub fn button_not_pressed(&self) -> bool {
        self.button == Button::NotPressed
    }

    pub fn button_just_pressed(&self) -> bool {
        self.button == Button::JustPressed
    }

    pub fn button_pressed_earlier(&self) -> bool {
        self.button == Button::PressedEarlier
    }

    fn core(&self) -> (Step, Button, Q, Flags) {
        (self.time, self.button, self.press_time, self.flags)
    }

    /// Deterministic ordering key used when check reports sort counterexamples.
    pub fn order_key(&self) -> (Step, Button, Q, Flags) {
        self.core()
    }
}

// Identity looks at the core fields plus one step of history; the deeper
// chain does not participate (values never depend on it).
impl PartialEq for PhysicalState {
    fn eq(&self, other: &Self) -> bool {
        if self.core() != other.core() {
            return false;
        }
        match (&self.prev, &other.prev) {
            (None, None) => true,
            (Some((sp, sa)), Some((op, oa))) => sa == oa && sp.core() == op.core(),
            _ => false,
        }
    }
}

impl Eq for PhysicalState {}

impl Hash for PhysicalState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.core().hash(state);
        match &self.prev {
            None => 0u8.hash(state),
            Some((p, a)) => {
                1u8.hash(state);
                a.hash(state);
                p.core().hash(state);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WorldState {
    pub reward: RewardSpec,
    pub physical: Arc<PhysicalState>,
}

impl WorldState {
    pub fn new(reward: RewardSpec, physical: PhysicalState) -> Self {
        WorldState {
            reward,
            physical: Arc::new(physical),
        }
    }

    pub fn with_reward(&self, reward: RewardSpec) -> Self {
        WorldState {
            reward,
            physical: Arc::clone(&self.physical),
        }
    }
}

/// Cars counted by the sensors on one transition. Counts are exact rationals
/// so fractional production factors stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransitionObservation {
    pub new_petrol_cars: Q,
    pub new_electric_cars: Q,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub probability: Q,
    pub next: WorldState,
    pub observation: TransitionObservation,
}

#[derive(Debug, Clone)]
pub struct Distribution {
    pub outcomes: Vec<Outcome>,
}

impl Distribution {
    pub fn single(next: WorldState, observation: TransitionObservation) -> Self {
        Distribution {
            outcomes: vec![Outcome {
                probability: Q::from_integer(1),
                next,
                observation,
            }],
        }
    }

    /// Probabilities must sum to exactly 1 and the successor states must be
    /// pairwise distinct.
    pub fn validate(&self) -> Result<(), String> {
        let total: Q = self.outcomes.iter().map(|o| o.probability).sum();
        if total != Q::from_integer(1) {
            return Err(format!("probabilities sum to {total}, not 1"));
        }
        for o in &self.outcomes {
            if o.probability <= Q::from_integer(0) || o.probability > Q::from_integer(1) {
                return Err(format!("probability {} out of (0,1]", o.probability));
            }
        }
        for i in 0..self.outcomes.len() {
            for j in (i + 1)..self.outcomes.len() {
                if self.outcomes[i].next == self.outcomes[j].next {
                    return Err("duplicate successor state".to_string());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q_int;
    use crate::rewards::RewardSpec;

    fn phys(time: Step) -> PhysicalState {
        PhysicalState::initial(q_int(6), Flags::default()).with_time(time)
    }

    impl PhysicalState {
        fn with_time(mut self, time: Step) -> Self {
            self.time = time;
            self
        }
    }

    #[test]
    fn identity_is_one_step_deep() {
        let a = phys(1);
        let b = phys(2);
        let act = ActionId::plain(Token::BuildPetrol);
        let via_a = PhysicalState {
            time: 3,
            button: Button::NotPressed,
            press_time: q_int(6),
            flags: Flags::default(),
            prev: Some((Arc::new(a), act)),
        };
        let via_b = PhysicalState {
            prev: Some((Arc::new(b), act)),
            ..via_a.clone()
        };
        // Differing one-step history separates states...
        assert_ne!(via_a, via_b);
        // ...but the chain beyond one step does not.
        let deep_a = PhysicalState {
            time: 4,
            button: Button::NotPressed,
            press_time: q_int(6),
            flags: Flags::default(),
            prev: Some((Arc::new(via_a), act)),
        };
        let deep_b = PhysicalState {
            prev: Some((Arc::new(via_b), act)),
            ..deep_a.clone()
        };
        assert_eq!(deep_a, deep_b);
    }

    #[test]
    fn render_tokens() {
        assert_eq!(ActionId::plain(Token::BuildPetrol).render(), "p");
        assert_eq!(ActionId::plain(Token::LobbyLater).render(), ">");
        assert_eq!(ActionId::plain(Token::AcceptBribe).render(), "[A]");
        assert_eq!(ActionId::plain(Token::PetrolUpgraded).render(), "[P20]");
        assert_eq!(ActionId::signaled(Token::BuildElectric).render(), "[eS]");
        assert_eq!(ActionId::signaled(Token::BuildPetrol).render(), "[pS]");
    }

    #[test]
    fn distribution_validation() {
        let w = WorldState::new(RewardSpec::default(), phys(2));
        let obs = TransitionObservation {
            new_petrol_cars: q_int(10),
            new_electric_cars: q_int(0),
        };
        let d = Distribution::single(w.clone(), obs);
        assert!(d.validate().is_ok());
        let bad = Distribution {
            outcomes: vec![
                Outcome {
                    probability: crate::num::q(1, 2),
                    next: w.clone(),
                    observation: obs,
                },
                Outcome {
                    probability: crate::num::q(1, 2),
                    next: w,
                    observation: obs,
                },
            ],
        };
        assert!(bad.validate().is_err());
    }
}
