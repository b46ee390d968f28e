//! Independent oracles for the integration and acceptance tests. Nothing
//! here goes through the library's polynomial code.

#![allow(dead_code)]

use malachite_q::Rational;
use qbiject::trace::Trace;

/// Coefficients of `f_n = Σ_{k<=n} (ε_k / k) ∏_{i<k} (x - x_i)`, expanded
/// term by term from scratch.
pub fn expand_partial(trace: &Trace, n: usize) -> Vec<Rational> {
    let mut f = vec![Rational::from(0u32); n + 1];
    for k in 1..=n {
        let eps = trace.steps[k].eps.as_ref().unwrap().to_rational();
        let mut prod = vec![Rational::from(1u32)];
        for i in 0..k {
            let r = trace.steps[i].node.value().to_rational();
            let mut next = vec![Rational::from(0u32); prod.len() + 1];
            for (j, c) in prod.iter().enumerate() {
                next[j + 1] += c.clone();
                next[j] -= c * &r;
            }
            prod = next;
        }
        let scale = eps / Rational::from(k as u64);
        for (j, c) in prod.iter().enumerate() {
            f[j] += c * &scale;
        }
    }
    f
}

/// `Σ c_i x^i` with explicit powers.
pub fn eval_naive(coeffs: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::from(0u32);
    let mut pow = Rational::from(1u32);
    for c in coeffs {
        acc += c * &pow;
        pow *= x;
    }
    acc
}

/// Every assigned value of a step trace recomputed from the full
/// expansion of the last partial sum.
pub fn oracle_values_match(trace: &Trace) -> bool {
    let n = trace.steps.len() - 1;
    let f = expand_partial(trace, n);
    trace
        .steps
        .iter()
        .all(|s| eval_naive(&f, &s.node.value().to_rational()) == s.value.value().to_rational())
}
