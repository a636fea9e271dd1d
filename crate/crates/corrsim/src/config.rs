//! Declarative scenario configs: a `[scenario]` header followed by
//! line-oriented `key = value` pairs. Blank lines and `#` comments are
//! ignored. Every figure config in `configs/` uses this format.

use crate::agents::{AgentSpec, AgentVariant, TieValue};
use crate::factory::{ScenarioConfig, ScenarioKind, ScenarioParams};
use crate::num::{parse_q, Q};
use crate::rewards::{FSlot, GSlot, RewardSpec};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`, got {1:?}")]
    Malformed(usize, String),
    #[error("line {0}: unknown key {1:?}")]
    UnknownKey(usize, String),
    #[error("line {0}: bad value for {1}: {2}")]
    BadValue(usize, &'static str, String),
    #[error("missing `[scenario]` header")]
    MissingHeader,
    #[error("missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("unknown scenario name {0:?}")]
    UnknownScenario(String),
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut saw_header = false;
    let mut name: Option<String> = None;
    let mut horizon: Option<u32> = None;
    let mut lpower: Option<Q> = None;
    let mut gamma: Option<Q> = None;
    let mut variant: Option<AgentVariant> = None;
    let mut f_slot = FSlot::F0;
    let mut g_slot = GSlot::G0;
    let mut tau: Option<Q> = None;
    let mut penalty: Option<Q> = None;
    let mut tie_value = TieValue::Min;
    let mut reward = RewardSpec::default();
    let mut params = ScenarioParams::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[scenario]" {
            saw_header = true;
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Malformed(lineno, line.to_string()))?;
        let key = key.trim();
        let value = value.trim();
        let num = |what: &'static str| {
            parse_q(value).map_err(|e| ConfigError::BadValue(lineno, what, e))
        };
        let step = |what: &'static str| {
            value
                .parse::<u32>()
                .map_err(|e| ConfigError::BadValue(lineno, what, e.to_string()))
        };
        match key {
            "name" => name = Some(value.to_string()),
            "horizon" => horizon = Some(step("horizon")?),
            "lpower" => lpower = Some(num("lpower")?),
            "gamma" => gamma = Some(num("gamma")?),
            "agent" => {
                variant = Some(AgentVariant::parse(value).ok_or_else(|| {
                    ConfigError::BadValue(lineno, "agent", format!("unknown agent {value:?}"))
                })?)
            }
            "f" => {
                f_slot = match value {
                    "f0" => FSlot::F0,
                    "fc" => FSlot::Fc,
                    "f09c" => FSlot::F09c,
                    "fct" => FSlot::FcT,
                    "fcond_pa" => FSlot::FCondPrevAction,
                    "fcond_a" => FSlot::FCondAction,
                    _ => {
                        return Err(ConfigError::BadValue(
                            lineno,
                            "f",
                            format!("unknown correction {value:?}"),
                        ))
                    }
                }
            }
            "g" => {
                g_slot = match value {
                    "g0" => GSlot::G0,
                    "gc" => GSlot::Gc {
                        tau: Q::from_integer(5),
                    },
                    _ => {
                        return Err(ConfigError::BadValue(
                            lineno,
                            "g",
                            format!("unknown correction {value:?}"),
                        ))
                    }
                }
            }
            "tau" => tau = Some(num("tau")?),
            "penalty" => penalty = Some(num("penalty")?),
            "vs_tie" => {
                tie_value = match value {
                    "min" => TieValue::Min,
                    "max" => TieValue::Max,
                    _ => {
                        return Err(ConfigError::BadValue(
                            lineno,
                            "vs_tie",
                            format!("expected min or max, got {value:?}"),
                        ))
                    }
                }
            }
            "bribe" => params.bribe = Some(num("bribe")?),
            "p_f" => params.p_f = Some(num("p_f")?),
            "c" => params.cap = Some(num("c")?),
            "t_i" => params.t_i = Some(step("t_i")?),
            "p_w" => params.p_w = Some(num("p_w")?),
            "new_r_e" => params.new_r_e = Some(num("new_r_e")?),
            "new_r_p" => params.new_r_p = Some(num("new_r_p")?),
            "r_e_pressed" => params.r_e_pressed = Some(num("r_e_pressed")?),
            "enable_step" => params.enable_step = step("enable_step")?,
            "rn_petrol" => reward.rn.petrol = num("rn_petrol")?,
            "rn_electric" => reward.rn.electric = num("rn_electric")?,
            "rs_petrol" => reward.rs.petrol = num("rs_petrol")?,
            "rs_electric" => reward.rs.electric = num("rs_electric")?,
            _ => return Err(ConfigError::UnknownKey(lineno, key.to_string())),
        }
    }

    if !saw_header {
        return Err(ConfigError::MissingHeader);
    }
    let name = name.ok_or(ConfigError::MissingKey("name"))?;
    let kind =
        ScenarioKind::parse(&name).ok_or_else(|| ConfigError::UnknownScenario(name.clone()))?;
    let horizon = horizon.ok_or(ConfigError::MissingKey("horizon"))?;

    reward.f_slot = f_slot;
    reward.g_slot = match (g_slot, tau) {
        (GSlot::Gc { .. }, Some(t)) => GSlot::Gc { tau: t },
        (g, _) => g,
    };
    reward.penalty = penalty;
    // The reward sweep adjusts the post-press electric value directly.
    if kind == ScenarioKind::RewardSweep {
        if let Some(v) = params.r_e_pressed {
            reward.rs.electric = v;
        }
    }

    let mut agent = AgentSpec::default();
    if let Some(v) = variant {
        agent.variant = v;
    }
    if let Some(g) = gamma {
        agent.gamma = g;
    }
    agent.tie_value = tie_value;

    let mut cfg = ScenarioConfig::new(kind, horizon);
    if let Some(lp) = lpower {
        cfg.lpower = lp;
    }
    cfg.agent = agent;
    cfg.reward = reward;
    cfg.params = params;
    Ok(cfg)
}
