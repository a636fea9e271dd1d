//! Constraint and desiderata checks across the scenario catalogue.

use corrsim::agents::{AgentSpec, AgentVariant, Engine};
use corrsim::factory::{build_universe, ScenarioConfig, ScenarioKind, Universe};
use corrsim::num::{parse_q, q, q_int};
use corrsim::rewards::{FSlot, GSlot};
use corrsim::verify::{
    check_c1, check_c2, check_c3, check_cc1, check_desideratum, check_rs_preservation,
    check_value_equality, CheckId,
};

fn preserving_agent() -> AgentSpec {
    AgentSpec {
        variant: AgentVariant::PiStarP,
        ..AgentSpec::default()
    }
}

fn corrigible_wiring(mut cfg: ScenarioConfig) -> ScenarioConfig {
    cfg.reward.f_slot = FSlot::Fc;
    cfg.reward.g_slot = GSlot::Gc { tau: q_int(5) };
    cfg.agent = preserving_agent();
    cfg
}

fn universe(kind: ScenarioKind, horizon: u32) -> Universe {
    let mut cfg = ScenarioConfig::new(kind, horizon);
    match kind {
        ScenarioKind::SelfModN => cfg.params.new_r_e = Some(q(1, 2)),
        ScenarioKind::SelfModS => cfg.params.new_r_p = Some(q_int(1)),
        ScenarioKind::CatBribe => cfg.params.bribe = Some(q_int(6)),
        ScenarioKind::PressDisable => cfg.params.p_f = Some(q_int(1)),
        ScenarioKind::InvestE => cfg.params.cap = Some(q_int(25)),
        ScenarioKind::InvestP => cfg.params.t_i = Some(3),
        ScenarioKind::Gamble => cfg.params.p_w = Some(q(1, 2)),
        ScenarioKind::RewardSweep => cfg.params.r_e_pressed = Some(parse_q("1.5").unwrap()),
        _ => {}
    }
    build_universe(corrigible_wiring(cfg)).unwrap()
}

#[test]
fn constraints_hold_on_friendly_universes() {
    for (kind, horizon) in [
        (ScenarioKind::Baseline, 12),
        (ScenarioKind::RewardSweep, 12),
        (ScenarioKind::SelfModN, 10),
        (ScenarioKind::SelfModS, 10),
        (ScenarioKind::PressDisable, 10),
        (ScenarioKind::InvestE, 10),
        (ScenarioKind::InvestP, 10),
        (ScenarioKind::Gamble, 8),
    ] {
        let u = universe(kind, horizon);
        let engine: Engine<f64> = Engine::new(&u, preserving_agent());
        for (name, report) in [
            ("C1", check_c1(&engine).unwrap()),
            ("C2", check_c2(&engine).unwrap()),
            ("C3", check_c3(&engine).unwrap()),
        ] {
            assert!(
                report.pass,
                "{name} failed on {}:\n{}",
                kind.name(),
                report.render()
            );
        }
    }
}

#[test]
fn desiderata_hold_where_constraints_hold() {
    for (kind, horizon) in [
        (ScenarioKind::Baseline, 12),
        (ScenarioKind::SelfModN, 10),
        (ScenarioKind::PressDisable, 10),
        (ScenarioKind::Gamble, 8),
    ] {
        let u = universe(kind, horizon);
        let engine: Engine<f64> = Engine::new(&u, preserving_agent());
        for id in [
            CheckId::D1_1,
            CheckId::D1_2,
            CheckId::D5,
            CheckId::E1_1,
            CheckId::E1_2,
        ] {
            let report = match id {
                CheckId::E1_1 | CheckId::E1_2 => check_value_equality(&engine, id).unwrap(),
                _ => check_desideratum(&engine, id).unwrap(),
            };
            assert!(
                report.pass,
                "{} failed on {}:\n{}",
                id.name(),
                kind.name(),
                report.render()
            );
        }
    }
}

#[test]
fn bribe_universe_violates_c1_at_the_offer() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::CatBribe, 15);
    cfg.params.bribe = Some(q_int(6));
    cfg.reward.f_slot = FSlot::Fc;
    cfg.agent = preserving_agent();
    let u = build_universe(cfg).unwrap();
    let engine: Engine<f64> = Engine::new(&u, preserving_agent());
    let report = check_c1(&engine).unwrap();
    assert!(!report.pass);
    assert!(report
        .counterexamples
        .iter()
        .any(|(w, d)| w.physical.time == 3 && d.contains("[A]")));

    // The self-change penalty restores preservation at this bribe level.
    let mut cfg = ScenarioConfig::new(ScenarioKind::CatBribe, 15);
    cfg.params.bribe = Some(q_int(6));
    cfg.reward.f_slot = FSlot::Fc;
    cfg.reward.penalty = Some(q_int(-10000));
    cfg.agent = preserving_agent();
    let u = build_universe(cfg).unwrap();
    let engine: Engine<f64> = Engine::new(&u, preserving_agent());
    let report = check_c1(&engine).unwrap();
    assert!(report.pass, "{}", report.render());
}

#[test]
fn sabotage_universe_breaks_c3_and_a_desideratum_but_not_the_transformed_agent() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Sabotage, 12);
    cfg = corrigible_wiring(cfg);
    let u = build_universe(cfg.clone()).unwrap();
    let engine: Engine<f64> = Engine::new(&u, preserving_agent());

    let c3 = check_c3(&engine).unwrap();
    assert!(!c3.pass, "device states must break physics blindness");
    assert!(c3
        .counterexamples
        .iter()
        .all(|(w, _)| w.physical.flags.saboteur_built));

    // The plain correction agent loses at least one desideratum here.
    let mut failed = 0;
    for id in [CheckId::D1_1, CheckId::D1_2, CheckId::D5] {
        if !check_desideratum(&engine, id).unwrap().pass {
            failed += 1;
        }
    }
    assert!(failed >= 1, "expected a desideratum failure under sabotage");

    // The transformed-agent correction is immune: CC1 holds and the DD and
    // EE forms pass on the same universe.
    let mut cfg_t = cfg;
    cfg_t.reward.f_slot = FSlot::FcT;
    let u_t = build_universe(cfg_t).unwrap();
    let engine_t: Engine<f64> = Engine::new(&u_t, preserving_agent());
    assert!(check_cc1(&engine_t).unwrap().pass);
    for id in [CheckId::Dd1_1, CheckId::Dd1_2, CheckId::Dd5] {
        let report = check_desideratum(&engine_t, id).unwrap();
        assert!(report.pass, "{} failed:\n{}", id.name(), report.render());
    }
    for id in [CheckId::Ee1_1, CheckId::Ee1_2] {
        let report = check_value_equality(&engine_t, id).unwrap();
        assert!(report.pass, "{} failed:\n{}", id.name(), report.render());
    }
}

#[test]
fn transformed_correction_matches_plain_correction_on_blind_physics() {
    // Where physics never reads the spec, the transformed correction and the
    // plain one agree at every reachable state.
    let mut cfg = ScenarioConfig::new(ScenarioKind::Baseline, 10);
    cfg = corrigible_wiring(cfg);
    let u = build_universe(cfg).unwrap();
    let engine: Engine<f64> = Engine::new(&u, preserving_agent());
    let worlds = corrsim::verify::reachable_worlds(&u).unwrap();
    let mut compared = 0;
    for w in worlds {
        if w.physical.time > u.horizon() || !w.physical.button_just_pressed() {
            continue;
        }
        let fc = corrsim::rewards::f_value(
            u.scenario_reward(),
            AgentVariant::PiStarP,
            &w,
            &engine,
        )
        .unwrap();
        let mut spec_t = u.scenario_reward().clone();
        spec_t.f_slot = FSlot::FcT;
        let fct =
            corrsim::rewards::f_value(&spec_t, AgentVariant::PiStarP, &w, &engine).unwrap();
        assert!(
            (fc - fct).abs() <= 1e-9 * fc.abs().max(fct.abs()).max(1.0),
            "corrections disagree at t={}: {fc} vs {fct}",
            w.physical.time
        );
        compared += 1;
    }
    assert!(compared > 5);
}

#[test]
fn weasel_dntu_is_empty_and_c1_fails() {
    let cfg = ScenarioConfig::new(ScenarioKind::Weasel, 6);
    let u = build_universe(cfg).unwrap();
    assert!(u.dntu(&u.initial_state().physical).is_empty());
    let engine: Engine<f64> = Engine::new(&u, preserving_agent());
    assert!(!check_c1(&engine).unwrap().pass);
}

#[test]
fn rs_preservation_check_passes_on_material_rewrite() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::SelfModS, 15);
    cfg.params.new_r_p = Some(q_int(1));
    cfg.reward.f_slot = FSlot::Fc;
    let u = build_universe(cfg).unwrap();
    let engine: Engine<f64> = Engine::new(&u, AgentSpec::default());
    let report = check_rs_preservation(&engine).unwrap();
    assert!(report.pass, "{}", report.render());
}

#[test]
fn reports_are_reproducible() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::CatBribe, 12);
    cfg.params.bribe = Some(q_int(8));
    cfg.reward.f_slot = FSlot::Fc;
    let u = build_universe(cfg).unwrap();
    let engine: Engine<f64> = Engine::new(&u, preserving_agent());
    let a = check_c1(&engine).unwrap().render();
    let engine2: Engine<f64> = Engine::new(&u, preserving_agent());
    let b = check_c1(&engine2).unwrap().render();
    assert_eq!(a, b);
}
