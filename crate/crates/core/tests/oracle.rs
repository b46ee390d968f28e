mod common;

use malachite_q::Rational;
use qbiject::avoid::AvoidFamily;
use qbiject::basic::run_basic;
use qbiject::trace::Config;
use qbiject::{Rat, UnitRat};

use common::{eval_naive, expand_partial, oracle_values_match};

#[test]
fn brute_force_replay_small_depths() {
    for depth in 3..=7 {
        for avoid in [AvoidFamily::lft_defaults(), AvoidFamily::empty()] {
            let (st, trace) = run_basic(&Config::basic(depth, avoid)).unwrap();
            assert!(oracle_values_match(&trace), "depth {depth}");
            let f = expand_partial(&trace, depth as usize);
            for (x, v) in st.nodes.iter().zip(&st.values) {
                assert_eq!(
                    eval_naive(&f, &x.value().to_rational()),
                    v.value().to_rational()
                );
            }
            // incremental partial sums agree with the expansion coefficientwise
            let inc: Vec<Rational> = st.f_m().coeffs().iter().map(|c| c.to_rational()).collect();
            let mut expanded = f.clone();
            while expanded.last().is_some_and(|c| *c == 0u32) {
                expanded.pop();
            }
            assert_eq!(inc, expanded);
        }
    }
}

#[test]
fn worked_value_at_one_third() {
    let (_, trace) = run_basic(&Config::basic(7, AvoidFamily::lft_defaults())).unwrap();
    let third = UnitRat::small(1, 3);
    assert_eq!(trace.f_exact_at(&third), Some(Rat::new(1729, 5184)));
    let f = expand_partial(&trace, 7);
    assert_eq!(
        eval_naive(&f, &third.value().to_rational()),
        Rational::from_signeds(1729, 5184)
    );
}

#[test]
fn partial_sums_rebuilt_from_trace() {
    let (st, trace) = run_basic(&Config::basic(12, AvoidFamily::lft_defaults())).unwrap();
    for n in 1..=12 {
        assert_eq!(trace.partial_sum(n).unwrap(), st.partials[n as usize]);
    }
}
