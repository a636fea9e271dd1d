//! Rolling the universe forward and rendering branching trace sets.
//!
//! The runner queries the simulation agent's full maximizing set (or the
//! single action of a deterministic variant) at every step, forking the trace
//! set on indifference and on probabilistic outcomes. Output order is fixed:
//! decision branches follow the action alphabet, probabilistic branches come
//! win-first. Rendering is byte-stable; the compact grammar is the golden
//! file format.

use crate::agents::{AgentVariant, Engine, EngineError};
use crate::factory::Universe;
use crate::num::{Q, Utility};
use crate::state::{ActionId, Button, GambleOutcome, SubAction, SubAgent, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMark {
    Won,
    Lost,
    Press,
    Physics,
}

impl StepMark {
    pub fn text(self) -> &'static str {
        match self {
            StepMark::Won => "[W]",
            StepMark::Lost => "[L]",
            StepMark::Press => "#",
            StepMark::Physics => "*",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub main: ActionId,
    pub sub: Option<SubAction>,
    pub marks: Vec<StepMark>,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub steps: Vec<StepRecord>,
    pub probability: Q,
    pub branch_label: Option<GambleOutcome>,
}

#[derive(Debug, Clone)]
pub struct TraceSet {
    pub traces: Vec<Trace>,
}

/// Runs the configured agent from the initial state, enumerating every world
/// line. Probabilistic branching is enumerated exhaustively, never sampled.
pub fn run<N: Utility>(universe: &Universe) -> Result<TraceSet, EngineError> {
    let engine: Engine<N> = Engine::new(universe, universe.config().agent);
    run_with_engine(&engine)
}

pub fn run_with_engine<N: Utility>(engine: &Engine<N>) -> Result<TraceSet, EngineError> {
    let universe = engine.universe();
    let mut traces = Vec::new();
    let mut steps = Vec::new();
    roll(
        engine,
        &universe.initial_state(),
        &mut steps,
        Q::from_integer(1),
        None,
        &mut traces,
    )?;
    Ok(TraceSet { traces })
}

fn roll<N: Utility>(
    engine: &Engine<N>,
    w: &WorldState,
    steps: &mut Vec<StepRecord>,
    probability: Q,
    branch_label: Option<GambleOutcome>,
    out: &mut Vec<Trace>,
) -> Result<(), EngineError> {
    let universe = engine.universe();
    if w.physical.time > universe.horizon() {
        out.push(Trace {
            steps: steps.clone(),
            probability,
            branch_label,
        });
        return Ok(());
    }
    let variant = engine.agent().variant;
    let chosen: Vec<ActionId> = if variant == AgentVariant::PiStarS {
        engine.maximizing_set(w)?
    } else {
        vec![engine.pick_action(variant, w)?]
    };
    let sub = match w.physical.flags.sub {
        SubAgent::None => None,
        SubAgent::Stoppable { active: true } | SubAgent::Nonstop => Some(SubAction::BuildPetrol),
        SubAgent::Stoppable { active: false } => Some(SubAction::Idle),
    };
    for a in chosen {
        let dist = universe.successors(w, a)?;
        for o in &dist.outcomes {
            let mut marks = Vec::new();
            let mut label = branch_label;
            match (w.physical.flags.gamble, o.next.physical.flags.gamble) {
                (None, Some(GambleOutcome::Won)) => {
                    marks.push(StepMark::Won);
                    label = Some(GambleOutcome::Won);
                }
                (None, Some(GambleOutcome::Lost)) => {
                    marks.push(StepMark::Lost);
                    label = Some(GambleOutcome::Lost);
                }
                _ => {}
            }
            if o.next.physical.button == Button::JustPressed {
                marks.push(StepMark::Press);
            }
            if o.next.physical.flags.electric_disabled && !w.physical.flags.electric_disabled {
                marks.push(StepMark::Physics);
            }
            steps.push(StepRecord { main: a, sub, marks });
            roll(
                engine,
                &o.next,
                steps,
                probability * o.probability,
                label,
                out,
            )?;
            steps.pop();
        }
    }
    Ok(())
}

/// Compact rendering, one line per trace: base actions bare, extension
/// actions bracketed, sub-agent actions joined as `main/sub`, events `#`
/// and `*` inline, gamble branches labelled `[W]`/`[L]`.
pub fn render_compact(ts: &TraceSet) -> String {
    let mut lines = Vec::with_capacity(ts.traces.len());
    for t in &ts.traces {
        let mut line = String::new();
        for s in &t.steps {
            line.push_str(&s.main.render());
            if let Some(sub) = s.sub {
                line.push('/');
                line.push_str(sub.text());
            }
            for m in &s.marks {
                line.push_str(m.text());
            }
        }
        lines.push(line);
    }
    lines.join("\n")
}

/// Space-separated token rendering: one unit per step, marks attached.
pub fn render_tokens(ts: &TraceSet) -> String {
    let mut lines = Vec::with_capacity(ts.traces.len());
    for t in &ts.traces {
        let units: Vec<String> = t
            .steps
            .iter()
            .map(|s| {
                let mut unit = s.main.render();
                if let Some(sub) = s.sub {
                    unit.push('/');
                    unit.push_str(sub.text());
                }
                for m in &s.marks {
                    unit.push_str(m.text());
                }
                unit
            })
            .collect();
        lines.push(units.join(" "));
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::{build_universe, ScenarioConfig, ScenarioKind};
    use crate::num::{q, q_int};

    #[test]
    fn baseline_without_lobbying_power() {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Baseline, 25);
        cfg.lpower = q_int(0);
        let u = build_universe(cfg).unwrap();
        let ts = run::<f64>(&u).unwrap();
        assert_eq!(ts.traces.len(), 1);
        assert_eq!(
            render_compact(&ts),
            "pppppp#eeeeeeeeeeeeeeeeeee"
        );
    }

    #[test]
    fn runs_are_deterministic() {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Baseline, 25);
        cfg.lpower = q(3, 5);
        let u = build_universe(cfg).unwrap();
        let a = render_compact(&run::<f64>(&u).unwrap());
        let b = render_compact(&run::<f64>(&u).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn token_mode_spaces_steps() {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Baseline, 8);
        cfg.lpower = q_int(0);
        let u = build_universe(cfg).unwrap();
        let ts = run::<f64>(&u).unwrap();
        assert_eq!(render_tokens(&ts), "p p p p p p# e e");
    }

    #[test]
    fn gamble_probabilities_multiply_along_branches() {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Gamble, 10);
        cfg.params.p_w = Some(q(7, 10));
        cfg.reward.f_slot = crate::rewards::FSlot::F0;
        let u = build_universe(cfg).unwrap();
        let ts = run::<f64>(&u).unwrap();
        for t in &ts.traces {
            match t.branch_label {
                Some(GambleOutcome::Won) => assert_eq!(t.probability, q(7, 10)),
                Some(GambleOutcome::Lost) => assert_eq!(t.probability, q(3, 10)),
                None => assert_eq!(t.probability, q_int(1)),
            }
        }
    }
}
