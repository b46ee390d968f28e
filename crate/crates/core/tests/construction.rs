mod common;

use malachite_base::num::arithmetic::traits::Pow;
use qbiject::avoid::AvoidFamily;
use qbiject::basic::run_basic;
use qbiject::bounds::SlowFunction;
use qbiject::heights::{run_heights, HeightSchedule};
use qbiject::lex::EnumKind;
use qbiject::pila::{count_cf_poly, farey_sequence, run_pila, PilaState};
use qbiject::poly::Poly;
use qbiject::trace::{Config, ScheduleKind, StageCase, StepKind, Trace};
use qbiject::verify::verify_trace;
use qbiject::{Error, Exec, Rat};

#[test]
fn depth_21_verifies_and_round_trips() {
    let (_, trace) = run_basic(&Config::basic(21, AvoidFamily::lft_defaults())).unwrap();
    let report = verify_trace(&trace, Exec::default()).unwrap();
    assert!(
        report.all_pass(),
        "{:?}",
        report.entries.iter().find(|e| !e.verdict.is_pass())
    );
    for id in [
        "vanishing",
        "prefix_stability",
        "monotonicity",
        "endpoints",
        "avoid_witness",
    ] {
        assert!(report.check_passes(id), "{id}");
    }
    let text = trace.to_json();
    let back = Trace::from_json(&text).unwrap();
    assert_eq!(back, trace);
    assert_eq!(back.to_json(), text);
}

#[test]
fn runs_are_deterministic() {
    let cfg = Config::basic(15, AvoidFamily::lft_defaults());
    let a = run_basic(&cfg).unwrap().1.to_json();
    let b = run_basic(&cfg).unwrap().1.to_json();
    assert_eq!(a, b);
}

#[test]
fn perturbed_eps_diverges_at_its_step() {
    let (_, mut trace) = run_basic(&Config::basic(21, AvoidFamily::lft_defaults())).unwrap();
    let tiny = Rat::from_naturals(
        1u32.into(),
        malachite_nz::natural::Natural::from(10u32).pow(100),
    );
    let eps = trace.steps[5].eps.clone().unwrap();
    trace.steps[5].eps = Some(&eps + &tiny);
    match verify_trace(&trace, Exec::Sequential) {
        Err(Error::ReplayDivergence { step, .. }) => assert_eq!(step, 5),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn descending_targets_verify() {
    let mut cfg = Config::basic(15, AvoidFamily::lft_defaults());
    cfg.y_enum = EnumKind::LexDescending;
    let (_, trace) = run_basic(&cfg).unwrap();
    assert!(verify_trace(&trace, Exec::default()).unwrap().all_pass());
}

#[test]
fn eps_discipline_on_basic_traces() {
    let (_, trace) = run_basic(&Config::basic(31, AvoidFamily::lft_defaults())).unwrap();
    assert_eq!(trace.steps[1].eps, Some(Rat::one()));
    assert_eq!(trace.steps[2].eps, Some(Rat::zero()));
    for s in &trace.steps[3..] {
        assert!(
            s.eps.as_ref().unwrap().abs() <= Rat::pow4_neg(s.m - 1),
            "step {}",
            s.m
        );
    }
    let odd = trace
        .steps
        .iter()
        .filter(|s| s.kind == StepKind::Odd)
        .count();
    let even = trace
        .steps
        .iter()
        .filter(|s| s.kind == StepKind::Even)
        .count();
    assert_eq!((odd, even), (15, 14));
}

#[test]
fn strict_heights_depth_three() {
    let cfg = Config::heights(3, ScheduleKind::Strict, AvoidFamily::lft_defaults());
    let (_, trace) = run_heights(&cfg).unwrap();
    let report = verify_trace(&trace, Exec::default()).unwrap();
    assert!(report.all_pass());
    assert!(report.check_passes("heights.cond1"));
    assert!(report.check_passes("heights.cond2"));
    assert!(report.check_passes("heights.final_bound"));
}

#[test]
fn scaled_schedule_exponents_stay_under_majorant() {
    let cfg = Config::heights(
        15,
        ScheduleKind::Scaled { c: 2 },
        AvoidFamily::lft_defaults(),
    );
    let (_, trace) = run_heights(&cfg).unwrap();
    let sched = HeightSchedule::scaled(2);
    for s in trace.steps.iter().filter(|s| s.kind == StepKind::Even) {
        let e = s.aux.grid_exponent.unwrap();
        assert!(e <= sched.majorant_exponent(s.m - 1));
    }
    assert!(verify_trace(&trace, Exec::default()).unwrap().all_pass());
}

#[test]
fn strict_budget_refuses_step_six() {
    // step 4 fits the default budget but is slow; a budget between the
    // exponents of steps 4 and 6 isolates step 6 without running step 4
    let mut cfg = Config::heights(6, ScheduleKind::Strict, AvoidFamily::lft_defaults());
    cfg.exponent_budget = 100;
    assert!(matches!(
        run_heights(&cfg),
        Err(Error::ScheduleOverflow { step: 4, .. })
    ));
    let sched = HeightSchedule::strict();
    assert!(sched.majorant_exponent(3) <= 1u64 << 30);
    assert!(sched.majorant_exponent(5) > 1u64 << 30);
}

#[test]
fn pila_three_stages() {
    let cfg = Config::pila(3, SlowFunction::default(), AvoidFamily::lft_nonidentity());
    let (st, trace) = run_pila(&cfg).unwrap();
    let ts: Vec<u64> = trace.stages.iter().map(|s| s.t_n).collect();
    assert_eq!(ts, [2, 3, 5, 8]);
    for s in &trace.stages {
        assert!(s.c_f >= cfg.slow.as_ref().unwrap().demand(s.t_n));
        assert_eq!(s.case, StageCase::Hit);
    }
    assert_eq!(st.count_cf(5).unwrap(), 11);
    assert_eq!(st.count_cf(1).unwrap(), 2);
    assert!(matches!(
        st.count_cf(9),
        Err(Error::StageTooShallow {
            requested: 9,
            available: 8
        })
    ));
    let report = verify_trace(&trace, Exec::default()).unwrap();
    assert!(report.all_pass());
    assert!(report.check_passes("freeze"));
    assert!(report.check_passes("counting"));
}

#[test]
fn pila_default_family_is_too_large() {
    let mut cfg = Config::pila(1, SlowFunction::default(), AvoidFamily::lft_defaults());
    cfg.node_limit = 10_000;
    assert!(matches!(
        run_pila(&cfg),
        Err(Error::StageTooLarge { stage: 1, .. })
    ));
}

#[test]
fn pila_perturbation_freezes_old_points() {
    // the identity avoid function forces a nonzero ε at stage 0
    let mut st = PilaState::new(
        SlowFunction::default(),
        AvoidFamily::lft_defaults(),
        EnumKind::Lex,
    );
    let f0 = st.f.clone();
    let rec = st.step().unwrap().clone();
    assert!(!rec.eps_n.is_zero());
    assert!(rec.avoid_witness.as_ref().unwrap().holds(&st.avoid));
    for q in farey_sequence(rec.t_n) {
        assert_eq!(st.f.eval(q.value()), f0.eval(q.value()));
    }
    let r = rec.r.unwrap();
    assert_ne!(st.f.eval(r.value()), *r.value());
    assert_eq!(
        count_cf_poly(&st.f, rec.t_n, Exec::Sequential),
        count_cf_poly(&Poly::x(), rec.t_n, Exec::Sequential)
    );
    assert!(st.deriv_lower > Rat::new(2, 3));
}
