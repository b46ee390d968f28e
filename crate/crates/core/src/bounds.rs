//! Certified rational enclosures for the few transcendental quantities the
//! library touches: `ln T` (to gate `C_f(T) >= s(T)`), `π` and square roots
//! (for one asymptotic comparison).

use malachite_base::num::arithmetic::traits::FloorSqrt;
use malachite_base::num::logic::traits::SignificantBits;
use malachite_nz::natural::Natural;
use serde::{Deserialize, Serialize};

use crate::rat::Rat;

/// Terms used in every `atanh` series; each term gains at least a factor 9.
const SERIES_TERMS: u64 = 40;

/// Rounds `[lo, hi]` outward to multiples of `2^-bits`.
pub fn round_outward(lo: &Rat, hi: &Rat, bits: u64) -> (Rat, Rat) {
    let scale = Rat::from(Natural::from(1u32) << bits);
    let l = (lo * &scale).floor();
    let h = (hi * &scale).ceil();
    (&Rat::from(l) / &scale, &Rat::from(h) / &scale)
}

/// `[lo, hi]` containing `atanh(u)` for `0 <= u <= 1/3`.
fn atanh_bounds(u: &Rat) -> (Rat, Rat) {
    assert!(!u.is_negative() && *u <= Rat::new(1, 3));
    let u2 = u * u;
    let mut term = u.clone();
    let mut sum = Rat::zero();
    for i in 0..SERIES_TERMS {
        sum = &sum + &(&term / &Rat::int(2 * i as i64 + 1));
        term = &term * &u2;
    }
    // remaining terms are below term/(2N+1) * 1/(1-u^2)
    let tail = &(&term / &Rat::int(2 * SERIES_TERMS as i64 + 1)) / &(&Rat::one() - &u2);
    let hi = &sum + &tail;
    (sum, hi)
}

/// `[lo, hi]` containing `ln 2 = 2 atanh(1/3)`.
pub fn ln2_bounds() -> (Rat, Rat) {
    let (lo, hi) = atanh_bounds(&Rat::new(1, 3));
    (&lo * &Rat::int(2), &hi * &Rat::int(2))
}

/// `[lo, hi]` containing `ln t` for an integer `t >= 1`, by `t = 2^j r`
/// with `r` in `[1, 2)` and `ln r = 2 atanh((r-1)/(r+1))`.
pub fn ln_bounds(t: &Natural) -> (Rat, Rat) {
    assert!(*t >= 1u32);
    let j = t.significant_bits() - 1;
    let r = Rat::from_naturals(t.clone(), Natural::from(1u32) << j);
    let u = &(&r - &Rat::one()) / &(&r + &Rat::one());
    let (alo, ahi) = atanh_bounds(&u);
    let (l2lo, l2hi) = ln2_bounds();
    let jr = Rat::int(j as i64);
    (
        &(&jr * &l2lo) + &(&alo * &Rat::int(2)),
        &(&jr * &l2hi) + &(&ahi * &Rat::int(2)),
    )
}

/// `[lo, hi]` containing `atan(1/n)` for an integer `n >= 2`, from the
/// alternating series (partial sums straddle the limit).
fn atan_inv_bounds(n: i64) -> (Rat, Rat) {
    let x = Rat::new(1, n);
    let x2 = &x * &x;
    let mut term = x.clone();
    let mut sum = Rat::zero();
    let mut prev = Rat::zero();
    for i in 0..SERIES_TERMS {
        prev = sum.clone();
        let t = &term / &Rat::int(2 * i as i64 + 1);
        sum = if i % 2 == 0 { &sum + &t } else { &sum - &t };
        term = &term * &x2;
    }
    // an even number of terms ends on a subtraction: sum < atan < prev
    if SERIES_TERMS.is_multiple_of(2) {
        (sum, prev)
    } else {
        (prev, sum)
    }
}

/// `[lo, hi]` containing `π`, by Machin's formula, rounded outward to
/// `2^-bits`.
pub fn pi_bounds(bits: u64) -> (Rat, Rat) {
    let (a_lo, a_hi) = atan_inv_bounds(5);
    let (b_lo, b_hi) = atan_inv_bounds(239);
    let lo = &(&a_lo * &Rat::int(16)) - &(&b_hi * &Rat::int(4));
    let hi = &(&a_hi * &Rat::int(16)) - &(&b_lo * &Rat::int(4));
    round_outward(&lo, &hi, bits)
}

/// `[lo, hi]` containing `√n`, with `hi - lo = 2^-bits` unless exact.
pub fn sqrt_bounds(n: u64, bits: u64) -> (Rat, Rat) {
    let scaled = Natural::from(n) << (2 * bits);
    let s = (&scaled).floor_sqrt();
    let lo = Rat::dyadic(s.clone(), bits);
    if &s * &s == scaled {
        return (lo.clone(), lo);
    }
    (lo, Rat::dyadic(s + Natural::from(1u32), bits))
}

/// `s(T) = c (ln T)^k`, a slowly increasing function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlowFunction {
    pub c: Rat,
    pub k: u32,
}

impl Default for SlowFunction {
    fn default() -> Self {
        SlowFunction {
            c: Rat::int(2),
            k: 1,
        }
    }
}

impl SlowFunction {
    pub fn new(c: Rat, k: u32) -> Self {
        assert!(!c.is_negative(), "s must be nonnegative");
        assert!(k >= 1);
        SlowFunction { c, k }
    }

    /// A rational upper bound for `s(t)`.
    pub fn upper(&self, t: u64) -> Rat {
        let (_, hi) = ln_bounds(&Natural::from(t));
        &self.c * &hi.pow(u64::from(self.k))
    }

    /// `⌈upper(t)⌉`, the count a stage must reach.
    pub fn demand(&self, t: u64) -> Natural {
        Natural::try_from(self.upper(t).ceil()).expect("s is nonnegative")
    }
}
