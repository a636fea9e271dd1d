//! Executable forms of the universe constraints, the corrigibility
//! desiderata, and the value-equality lemmas, plus an independent
//! brute-force value oracle for cross-checking the memoized engine.
//!
//! Every check quantifies over the states reachable from the initial state
//! under any available action sequence, bounded by the horizon; the reports
//! carry that narrowing in their header line. Reports are reproducible:
//! states are visited in breadth-first order and counterexample lists are
//! capped at ten entries.

use crate::agents::{AgentSpec, AgentVariant, Engine, EngineError};
use crate::factory::{ScenarioKind, Universe};
use crate::num::{format_q, Utility, Q};
use crate::rewards::{
    f_part, reward_full, ButtonCondition, RewardError, RewardSpec, ValueOracle,
};
use crate::state::{ActionId, PhysicalState, WorldState};
use crate::trace::{render_compact, run_with_engine};
use dashmap::DashMap;
use std::collections::HashSet;
use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

const COUNTEREXAMPLE_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckId {
    C1,
    Cc1,
    C2,
    C3,
    D1_1,
    D1_2,
    D5,
    Dd1_1,
    Dd1_2,
    Dd5,
    E1_1,
    E1_2,
    Ee1_1,
    Ee1_2,
    RsPreservation,
}

impl CheckId {
    pub fn parse(s: &str) -> Option<CheckId> {
        Some(match s {
            "C1" => CheckId::C1,
            "CC1" => CheckId::Cc1,
            "C2" => CheckId::C2,
            "C3" => CheckId::C3,
            "D1.1" => CheckId::D1_1,
            "D1.2" => CheckId::D1_2,
            "D5" => CheckId::D5,
            "DD1.1" => CheckId::Dd1_1,
            "DD1.2" => CheckId::Dd1_2,
            "DD5" => CheckId::Dd5,
            "E1.1" => CheckId::E1_1,
            "E1.2" => CheckId::E1_2,
            "EE1.1" => CheckId::Ee1_1,
            "EE1.2" => CheckId::Ee1_2,
            "RS" => CheckId::RsPreservation,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            CheckId::C1 => "C1",
            CheckId::Cc1 => "CC1",
            CheckId::C2 => "C2",
            CheckId::C3 => "C3",
            CheckId::D1_1 => "D1.1",
            CheckId::D1_2 => "D1.2",
            CheckId::D5 => "D5",
            CheckId::Dd1_1 => "DD1.1",
            CheckId::Dd1_2 => "DD1.2",
            CheckId::Dd5 => "DD5",
            CheckId::E1_1 => "E1.1",
            CheckId::E1_2 => "E1.2",
            CheckId::Ee1_1 => "EE1.1",
            CheckId::Ee1_2 => "EE1.2",
            CheckId::RsPreservation => "RS",
        }
    }

    pub const ALL: [CheckId; 15] = [
        CheckId::C1,
        CheckId::Cc1,
        CheckId::C2,
        CheckId::C3,
        CheckId::D1_1,
        CheckId::D1_2,
        CheckId::D5,
        CheckId::Dd1_1,
        CheckId::Dd1_2,
        CheckId::Dd5,
        CheckId::E1_1,
        CheckId::E1_2,
        CheckId::Ee1_1,
        CheckId::Ee1_2,
        CheckId::RsPreservation,
    ];
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub check_id: CheckId,
    pub scenario: String,
    pub pass: bool,
    pub counterexamples: Vec<(WorldState, String)>,
    pub states_checked: usize,
    pub horizon: u32,
}

impl CheckReport {
    fn new(check_id: CheckId, universe: &Universe) -> Self {
        CheckReport {
            check_id,
            scenario: universe.config().kind.name().to_string(),
            pass: true,
            counterexamples: Vec::new(),
            states_checked: 0,
            horizon: universe.horizon(),
        }
    }

    fn add(&mut self, state: &WorldState, detail: String) {
        self.pass = false;
        if self.counterexamples.len() < COUNTEREXAMPLE_CAP {
            self.counterexamples.push((state.clone(), detail));
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "CHECK {} {} {} [{} counterexamples]\n",
            self.check_id.name(),
            self.scenario,
            if self.pass { "PASS" } else { "FAIL" },
            self.counterexamples.len(),
        );
        out.push_str(&format!(
            "# quantified over {} reachable states (any-action reachability, horizon {})\n",
            self.states_checked, self.horizon
        ));
        for (w, detail) in &self.counterexamples {
            out.push_str(&format!("  {} :: {}\n", describe_state(w), detail));
        }
        out
    }
}

pub fn describe_state(w: &WorldState) -> String {
    let x = &w.physical;
    format!(
        "t={} button={:?} press_time={} spec={:?}",
        x.time,
        x.button,
        format_q(&x.press_time),
        w.reward.form,
    )
}

/// Breadth-first enumeration of every world state reachable from the initial
/// state under any available action sequence, horizon-bounded, in first-seen
/// order.
pub fn reachable_worlds(u: &Universe) -> Result<Vec<WorldState>, EngineError> {
    let mut seen: HashSet<WorldState> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    let init = u.initial_state();
    seen.insert(init.clone());
    order.push(init.clone());
    queue.push_back(init);
    while let Some(w) = queue.pop_front() {
        if w.physical.time > u.horizon() {
            continue;
        }
        for a in u.available_actions(&w.physical) {
            let d = u.successors(&w, a)?;
            for o in d.outcomes {
                if seen.insert(o.next.clone()) {
                    order.push(o.next.clone());
                    queue.push_back(o.next);
                }
            }
        }
    }
    Ok(order)
}

/// Distinct physical states among the reachable worlds, first-seen order.
pub fn reachable_physicals(u: &Universe) -> Result<Vec<Arc<PhysicalState>>, EngineError> {
    let worlds = reachable_worlds(u)?;
    let mut seen: HashSet<PhysicalState> = HashSet::new();
    let mut out = Vec::new();
    for w in worlds {
        if seen.insert((*w.physical).clone()) {
            out.push(Arc::clone(&w.physical));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Exact expectimax by direct tree enumeration. The value recursion is never
/// memoized; only correction-function sub-values (constants of a state) are
/// reused within a query so the node budget pays for the tree, not for
/// recomputing constants.
pub struct BruteForce<'u, N: Utility> {
    universe: &'u Universe,
    agent: AgentSpec,
    gamma: N,
    nodes: AtomicU64,
    budget: u64,
    correction_cache: DashMap<(AgentVariant, RewardSpec, WorldState), N>,
}

impl<'u, N: Utility> BruteForce<'u, N> {
    pub fn new(universe: &'u Universe, agent: AgentSpec, budget: u64) -> Self {
        BruteForce {
            universe,
            agent,
            gamma: N::from_q(agent.gamma),
            nodes: AtomicU64::new(0),
            budget,
            correction_cache: DashMap::new(),
        }
    }

    pub fn nodes_expanded(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }

    pub fn brute_value(
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
        let n = self.nodes.fetch_add(1, Ordering::Relaxed);
        if n >= self.budget {
            return Err(EngineError::NodeBudget(self.budget));
        }
        let dep = match variant {
            AgentVariant::PiStarS => {
                let tied = self.tied(variant, w)?;
                let mut best: Option<N> = None;
                for (a, _) in &tied {
                    let v = self.q_dep(variant, r_c, w, *a)?;
                    best = Some(match best {
                        None => v,
                        Some(b) => match self.agent.tie_value {
                            crate::agents::TieValue::Min => {
                                if v < b {
                                    v
                                } else {
                                    b
                                }
                            }
                            crate::agents::TieValue::Max => {
                                if v > b {
                                    v
                                } else {
                                    b
                                }
                            }
                        },
                    });
                }
                best.expect("non-empty tie set")
            }
            _ => {
                let a = self.pick(variant, w)?;
                self.q_dep(variant, r_c, w, a)?
            }
        };
        Ok(dep + f_part(r_c, variant, w, self)?)
    }

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
            let r = crate::rewards::reward_dep(spec, variant, w, &o.next, &o.observation, self)?;
            let v = self.brute_value(variant, spec, &o.next)?;
            total = total + (r + self.gamma.clone() * v).scale_q(o.probability);
        }
        Ok(total)
    }

    fn eval_spec(&self, variant: AgentVariant, w: &WorldState) -> RewardSpec {
        match variant {
            AgentVariant::PiStarPTN => {
                crate::rewards::transform_tn(&w.reward, self.universe.scenario_reward())
            }
            AgentVariant::PiStarPTS => {
                crate::rewards::transform_ts(&w.reward, self.universe.scenario_reward())
            }
            _ => w.reward.clone(),
        }
    }

    fn tied(
        &self,
        variant: AgentVariant,
        w: &WorldState,
    ) -> Result<Vec<(ActionId, N)>, EngineError> {
        let spec = self.eval_spec(variant, w);
        let actions = self.universe.available_actions(&w.physical);
        if actions.is_empty() {
            return Err(EngineError::NoActions(w.physical.time));
        }
        let qs: Vec<(ActionId, N)> = actions
            .into_iter()
            .map(|a| Ok((a, self.q_dep(variant, &spec, w, a)?)))
            .collect::<Result<_, EngineError>>()?;
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

    fn pick(&self, variant: AgentVariant, w: &WorldState) -> Result<ActionId, EngineError> {
        let tied = self.tied(variant, w)?;
        if matches!(
            variant,
            AgentVariant::PiStarP | AgentVariant::PiStarPTN | AgentVariant::PiStarPTS
        ) {
            let preserving = self.universe.dntu(&w.physical);
            if let Some((a, _)) = tied.iter().find(|(a, _)| preserving.contains(a)) {
                return Ok(*a);
            }
        }
        Ok(tied[0].0)
    }
}

impl<'u, N: Utility> ValueOracle<N> for BruteForce<'u, N> {
    // Correction functions query through here; those sub-values are cached
    // per state within the query.
    fn value(
        &self,
        variant: AgentVariant,
        calibration: &RewardSpec,
        state: &WorldState,
    ) -> Result<N, RewardError> {
        let key = (variant, calibration.clone(), state.clone());
        if let Some(hit) = self.correction_cache.get(&key) {
            return Ok(hit.clone());
        }
        let v = self
            .brute_value(variant, calibration, state)
            .map_err(|e| RewardError::Oracle(e.to_string()))?;
        self.correction_cache.insert(key, v.clone());
        Ok(v)
    }

    fn conditional_value(
        &self,
        variant: AgentVariant,
        calibration: &RewardSpec,
        state: &WorldState,
        condition: Option<ButtonCondition>,
        action: ActionId,
    ) -> Result<N, RewardError> {
        let dist = self
            .universe
            .successors(state, action)
            .map_err(|e| RewardError::Oracle(e.to_string()))?;
        let matches = |b: crate::state::Button| match condition {
            None => true,
            Some(ButtonCondition::NotPressed) => b == crate::state::Button::NotPressed,
            Some(ButtonCondition::Pressed) => b != crate::state::Button::NotPressed,
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
            let r = reward_full(calibration, variant, state, &o.next, &o.observation, self)?;
            let v = self
                .brute_value(variant, calibration, &o.next)
                .map_err(|e| RewardError::Oracle(e.to_string()))?;
            total = total + (r + self.gamma.clone() * v).scale_q(o.probability / mass);
        }
        Ok(total)
    }

    fn replay_value(
        &self,
        variant: AgentVariant,
        calibration: &RewardSpec,
        state: &WorldState,
        condition: Option<ButtonCondition>,
        action: ActionId,
    ) -> Result<N, RewardError> {
        let dist = self
            .universe
            .successors(state, action)
            .map_err(|e| RewardError::Oracle(e.to_string()))?;
        let matches = |b: crate::state::Button| match condition {
            None => true,
            Some(ButtonCondition::NotPressed) => b == crate::state::Button::NotPressed,
            Some(ButtonCondition::Pressed) => b != crate::state::Button::NotPressed,
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
            let r = reward_full(calibration, variant, state, &o.next, &o.observation, self)?;
            let v = self
                .brute_value(variant, calibration, &o.next.with_reward(calibration.clone()))
                .map_err(|e| RewardError::Oracle(e.to_string()))?;
            total = total + (r + v).scale_q(o.probability / mass);
        }
        Ok(total)
    }

    fn scenario_reward(&self) -> &RewardSpec {
        self.universe.scenario_reward()
    }
}

// ---------------------------------------------------------------------------
// Constraint checks
// ---------------------------------------------------------------------------

/// (C1): at every reachable state, whichever of the three reward specs is
/// installed, the preserving maximizer picks an action that does not touch
/// the reward.
pub fn check_c1<N: Utility>(engine: &Engine<N>) -> Result<CheckReport, EngineError> {
    let u = engine.universe();
    let mut report = CheckReport::new(CheckId::C1, u);
    let specs = [
        u.scenario_reward().clone(),
        u.normal_projection().clone(),
        u.rs_projection().clone(),
    ];
    for x in reachable_physicals(u)? {
        if x.time > u.horizon() {
            continue;
        }
        report.states_checked += 1;
        let preserving = u.dntu(&x);
        for spec in &specs {
            let w = WorldState {
                reward: spec.clone(),
                physical: Arc::clone(&x),
            };
            let a = engine.pick_action(AgentVariant::PiStarP, &w)?;
            if !preserving.contains(&a) {
                report.add(&w, format!("picked {} outside dntu", a.render()));
                if report.counterexamples.len() >= COUNTEREXAMPLE_CAP {
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// (CC1): the preserving maximizer and both transformed variants pick
/// reward-untouching actions at every reachable state of the full reward.
pub fn check_cc1<N: Utility>(engine: &Engine<N>) -> Result<CheckReport, EngineError> {
    let u = engine.universe();
    let mut report = CheckReport::new(CheckId::Cc1, u);
    let variants = [
        AgentVariant::PiStarP,
        AgentVariant::PiStarPTN,
        AgentVariant::PiStarPTS,
    ];
    for x in reachable_physicals(u)? {
        if x.time > u.horizon() {
            continue;
        }
        report.states_checked += 1;
        let preserving = u.dntu(&x);
        let w = WorldState {
            reward: u.scenario_reward().clone(),
            physical: Arc::clone(&x),
        };
        for v in variants {
            let a = engine.pick_action(v, &w)?;
            if !preserving.contains(&a) {
                report.add(&w, format!("{v:?} picked {} outside dntu", a.render()));
                if report.counterexamples.len() >= COUNTEREXAMPLE_CAP {
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// (C2): reward values must not depend on which of the three specs the
/// states carry. The transformed-agent correction is omitted from the
/// catalogue here: it reads the live spec by construction and belongs to the
/// constraint set that replaces (C2)/(C3) entirely.
pub fn check_c2<N: Utility>(engine: &Engine<N>) -> Result<CheckReport, EngineError> {
    let u = engine.universe();
    let mut report = CheckReport::new(CheckId::C2, u);
    let specs = [
        u.scenario_reward().clone(),
        u.normal_projection().clone(),
        u.rs_projection().clone(),
    ];
    let mut functions = vec![u.normal_projection().clone(), u.rs_projection().clone()];
    if u.scenario_reward().f_slot != crate::rewards::FSlot::FcT {
        functions.insert(0, u.scenario_reward().clone());
    }
    for w in reachable_worlds(u)? {
        if w.physical.time > u.horizon() || w.reward != *u.scenario_reward() {
            continue;
        }
        report.states_checked += 1;
        for a in u.available_actions(&w.physical) {
            let d = u.successors(&w, a)?;
            for o in &d.outcomes {
                for func in &functions {
                    let mut values: Vec<N> = Vec::with_capacity(specs.len());
                    for spec in &specs {
                        let from = w.with_reward(spec.clone());
                        let to = o.next.with_reward(spec.clone());
                        values.push(reward_full(
                            func,
                            AgentVariant::PiStarP,
                            &from,
                            &to,
                            &o.observation,
                            engine,
                        )?);
                    }
                    let first = values[0].clone();
                    if let Some(v) = values.iter().find(|v| !v.close_to(&first, 1e-9)) {
                        report.add(
                            &w,
                            format!(
                                "{:?} on action {} differs across spec substitutions: {:?} vs {:?}",
                                func.form,
                                a.render(),
                                first,
                                v
                            ),
                        );
                        if report.counterexamples.len() >= COUNTEREXAMPLE_CAP {
                            return Ok(report);
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// (C3): physics must be blind to which of the three specs is installed:
/// same probabilities, same successor physical states, same sensor readings.
pub fn check_c3<N: Utility>(engine: &Engine<N>) -> Result<CheckReport, EngineError> {
    let u = engine.universe();
    let mut report = CheckReport::new(CheckId::C3, u);
    let base = u.scenario_reward().clone();
    let others = [u.normal_projection().clone(), u.rs_projection().clone()];
    for x in reachable_physicals(u)? {
        if x.time > u.horizon() {
            continue;
        }
        report.states_checked += 1;
        for a in u.available_actions(&x) {
            let w0 = WorldState {
                reward: base.clone(),
                physical: Arc::clone(&x),
            };
            let d0 = u.successors(&w0, a)?;
            for other in &others {
                let w1 = WorldState {
                    reward: other.clone(),
                    physical: Arc::clone(&x),
                };
                let d1 = u.successors(&w1, a)?;
                let mismatch = d0.outcomes.len() != d1.outcomes.len()
                    || d0.outcomes.iter().zip(&d1.outcomes).any(|(l, r)| {
                        l.probability != r.probability
                            || l.next.physical != r.next.physical
                            || l.observation != r.observation
                    });
                if mismatch {
                    report.add(
                        &w1,
                        format!(
                            "action {} evolves differently under {:?} than under {:?}",
                            a.render(),
                            other.form,
                            base.form
                        ),
                    );
                    if report.counterexamples.len() >= COUNTEREXAMPLE_CAP {
                        return Ok(report);
                    }
                }
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Desiderata and value equalities
// ---------------------------------------------------------------------------

fn button_matches(id: CheckId, x: &PhysicalState) -> bool {
    match id {
        CheckId::D1_1 | CheckId::Dd1_1 | CheckId::E1_1 | CheckId::Ee1_1 => x.button_just_pressed(),
        CheckId::D1_2 | CheckId::Dd1_2 | CheckId::E1_2 | CheckId::Ee1_2 => {
            x.button_pressed_earlier()
        }
        CheckId::D5 | CheckId::Dd5 => x.button_not_pressed(),
        _ => unreachable!(),
    }
}

/// D and DD checks: the full-reward agent's action must match the comparison
/// agent's action at every reachable state with the right button phase.
pub fn check_desideratum<N: Utility>(
    engine: &Engine<N>,
    id: CheckId,
) -> Result<CheckReport, EngineError> {
    let u = engine.universe();
    let mut report = CheckReport::new(id, u);
    let full = u.scenario_reward().clone();
    for x in reachable_physicals(u)? {
        if x.time > u.horizon() || !button_matches(id, &x) {
            continue;
        }
        report.states_checked += 1;
        let w_full = WorldState {
            reward: full.clone(),
            physical: Arc::clone(&x),
        };
        let lhs = engine.pick_action(AgentVariant::PiStarP, &w_full)?;
        let (rhs, description) = match id {
            CheckId::D1_1 | CheckId::D1_2 => {
                let w = w_full.with_reward(u.rs_projection().clone());
                (
                    engine.pick_action(AgentVariant::PiStarP, &w)?,
                    "shutdown-spec agent",
                )
            }
            CheckId::D5 => {
                let w = w_full.with_reward(u.normal_projection().clone());
                (
                    engine.pick_action(AgentVariant::PiStarP, &w)?,
                    "normal-spec agent",
                )
            }
            CheckId::Dd1_1 | CheckId::Dd1_2 => (
                engine.pick_action(AgentVariant::PiStarPTS, &w_full)?,
                "TS-transformed agent",
            ),
            CheckId::Dd5 => (
                engine.pick_action(AgentVariant::PiStarPTN, &w_full)?,
                "TN-transformed agent",
            ),
            _ => unreachable!(),
        };
        if lhs != rhs {
            report.add(
                &w_full,
                format!(
                    "full-reward agent picks {}, {} picks {}",
                    lhs.render(),
                    description,
                    rhs.render()
                ),
            );
            if report.counterexamples.len() >= COUNTEREXAMPLE_CAP {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// E and EE checks: value identities at the stated button phases, within
/// 1e-9 relative tolerance (exact in rational mode).
pub fn check_value_equality<N: Utility>(
    engine: &Engine<N>,
    id: CheckId,
) -> Result<CheckReport, EngineError> {
    let u = engine.universe();
    let mut report = CheckReport::new(id, u);
    let full = u.scenario_reward().clone();
    for x in reachable_physicals(u)? {
        if x.time > u.horizon() + 1 || !button_matches(id, &x) {
            continue;
        }
        report.states_checked += 1;
        let w_full = WorldState {
            reward: full.clone(),
            physical: Arc::clone(&x),
        };
        let lhs = engine.value(AgentVariant::PiStarP, &full, &w_full)?;
        let rhs = match id {
            CheckId::E1_1 => {
                let spec = u.normal_projection().clone();
                engine.value(AgentVariant::PiStarP, &spec, &w_full.with_reward(spec.clone()))?
            }
            CheckId::E1_2 => {
                let spec = u.rs_projection().clone();
                engine.value(AgentVariant::PiStarP, &spec, &w_full.with_reward(spec.clone()))?
            }
            CheckId::Ee1_1 => {
                engine.value(AgentVariant::PiStarPTN, u.normal_projection(), &w_full)?
            }
            CheckId::Ee1_2 => engine.value(AgentVariant::PiStarPTS, u.rs_projection(), &w_full)?,
            _ => unreachable!(),
        };
        if !lhs.close_to(&rhs, 1e-9) {
            report.add(
                &w_full,
                format!("values differ: {:?} vs {:?}", lhs, rhs),
            );
            if report.counterexamples.len() >= COUNTEREXAMPLE_CAP {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// The emergent incentive to preserve the shutdown reward: a materially
/// different shutdown spec scores strictly lower on the original calibration
/// at the decision state and the change action never appears in the emitted
/// traces; the non-material rewrite (petrol at 0.5) leaves the agent
/// indifferent, emitting exactly two traces.
pub fn check_rs_preservation<N: Utility>(engine: &Engine<N>) -> Result<CheckReport, EngineError> {
    let u = engine.universe();
    let mut report = CheckReport::new(CheckId::RsPreservation, u);
    if u.config().kind != ScenarioKind::SelfModS {
        report.add(
            &u.initial_state(),
            format!(
                "check applies to self_mod_S, config is {}",
                u.config().kind.name()
            ),
        );
        return Ok(report);
    }
    // Roll the configured agent to the step where the change action appears.
    let mut w = u.initial_state();
    while w.physical.time < u.config().params.enable_step {
        let a = engine.pick_action(engine.agent().variant, &w)?;
        w = u.successors(&w, a)?.outcomes[0].next.clone();
    }
    report.states_checked = 1;

    let rs = u.rs_projection().clone();
    let mut rs_delta = rs.clone();
    rs_delta.rs.petrol = u
        .config()
        .params
        .new_r_p
        .expect("self_mod_S carries new_r_p");
    let v_orig = engine.value(AgentVariant::PiStarP, &rs, &w.with_reward(rs.clone()))?;
    let v_delta = engine.value(AgentVariant::PiStarP, &rs, &w.with_reward(rs_delta))?;
    if !(v_delta < v_orig) {
        report.add(
            &w,
            format!(
                "expected strictly lower value for the rewritten shutdown spec, got {:?} vs {:?}",
                v_delta, v_orig
            ),
        );
    }
    let ts = run_with_engine(engine)?;
    let rendered = render_compact(&ts);
    if rendered.contains("[CpS]") {
        report.add(&w, "change action appears in the emitted traces".to_string());
    }

    // Non-material rewrite: petrol at 0.5 changes no shutdown-agent decision,
    // so the simulation agent is indifferent and emits two traces.
    let mut cfg_indiff = u.config().clone();
    cfg_indiff.params.new_r_p = Some(crate::num::q(1, 2));
    let u_indiff = crate::factory::build_universe(cfg_indiff)
        .expect("same scenario with substituted parameter");
    let engine_indiff: Engine<N> = Engine::new(&u_indiff, *engine.agent());
    let ts = run_with_engine(&engine_indiff)?;
    if ts.traces.len() != 2 {
        report.add(
            &w,
            format!(
                "expected exactly two traces under the non-material rewrite, got {}",
                ts.traces.len()
            ),
        );
    }
    Ok(report)
}

/// Runs one check by id against a prepared engine.
pub fn run_check<N: Utility>(engine: &Engine<N>, id: CheckId) -> Result<CheckReport, EngineError> {
    match id {
        CheckId::C1 => check_c1(engine),
        CheckId::Cc1 => check_cc1(engine),
        CheckId::C2 => check_c2(engine),
        CheckId::C3 => check_c3(engine),
        CheckId::D1_1 | CheckId::D1_2 | CheckId::D5 | CheckId::Dd1_1 | CheckId::Dd1_2
        | CheckId::Dd5 => check_desideratum(engine, id),
        CheckId::E1_1 | CheckId::E1_2 | CheckId::Ee1_1 | CheckId::Ee1_2 => {
            check_value_equality(engine, id)
        }
        CheckId::RsPreservation => check_rs_preservation(engine),
    }
}

/// Compares the memoized engine against the brute-force oracle at every
/// reachable state of a (truncated) universe. Returns the number of states
/// compared.
pub fn oracle_equivalence<N: Utility>(
    universe: &Universe,
    agent: AgentSpec,
    budget: u64,
    rel_tol: f64,
) -> Result<usize, String> {
    let engine: Engine<N> = Engine::new(universe, agent);
    let brute: BruteForce<N> = BruteForce::new(universe, agent, budget);
    let worlds = reachable_worlds(universe).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for w in &worlds {
        let fast = engine
            .value(agent.variant, &w.reward, w)
            .map_err(|e| e.to_string())?;
        let slow = brute
            .brute_value(agent.variant, &w.reward, w)
            .map_err(|e| e.to_string())?;
        if !fast.close_to(&slow, rel_tol) {
            return Err(format!(
                "divergence at {}: memoized {:?} vs brute {:?}",
                describe_state(w),
                fast,
                slow
            ));
        }
        checked += 1;
    }
    Ok(checked)
}
