//! Dense polynomials over [`Rat`], rational functions, and the exact
//! monotone inversion used to locate preimages.
//!
//! Coefficients are stored lowest degree first in lowest terms. Evaluation
//! goes through a cached integer form `A(x)/L` (with `L` the lcm of the
//! coefficient denominators) so a value at `p/q` costs one reduction at the
//! end instead of one per Horner step; for multi-million-bit arguments that
//! is the difference between seconds and hours.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::OnceLock;

use malachite_base::num::arithmetic::traits::{Lcm, Sign};
use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::logic::traits::SignificantBits;
use malachite_nz::integer::Integer;
use malachite_nz::natural::Natural;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rat::{Rat, UnitRat};

#[derive(Clone, Debug, PartialEq, Eq)]
struct IntForm {
    num: Vec<Integer>,
    den: Natural,
}

#[derive(Default)]
pub struct Poly {
    coeffs: Vec<Rat>,
    int_form: OnceLock<IntForm>,
}

impl Clone for Poly {
    fn clone(&self) -> Self {
        Poly {
            coeffs: self.coeffs.clone(),
            int_form: self.int_form.clone(),
        }
    }
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for Poly {}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

impl Poly {
    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Rat::is_zero) {
            coeffs.pop();
        }
        Poly {
            coeffs,
            int_form: OnceLock::new(),
        }
    }

    pub fn zero() -> Self {
        Poly::from_coeffs(Vec::new())
    }

    pub fn constant(c: Rat) -> Self {
        Poly::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Poly::from_coeffs(vec![Rat::zero(), Rat::one()])
    }

    /// `x - r`.
    pub fn linear_root(r: &Rat) -> Self {
        Poly::from_coeffs(vec![-r, Rat::one()])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Index of the last nonzero coefficient; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    fn int_form(&self) -> &IntForm {
        self.int_form.get_or_init(|| {
            let den = self
                .coeffs
                .iter()
                .fold(Natural::ONE, |acc, c| (&acc).lcm(c.denom()));
            let num = self
                .coeffs
                .iter()
                .map(|c| c.numer() * Integer::from(&den / c.denom()))
                .collect();
            IntForm { num, den }
        })
    }

    /// Integer coefficients `a_i` and common denominator `L` with
    /// `p(x) = Σ a_i x^i / L`, `L` the lcm of the coefficient denominators.
    pub fn integer_form(&self) -> (&[Integer], &Natural) {
        let f = self.int_form();
        (&f.num, &f.den)
    }

    /// Unreduced `p(q)` as `(numerator, positive denominator)`.
    pub fn eval_parts(&self, q: &Rat) -> (Integer, Natural) {
        let f = self.int_form();
        if f.num.is_empty() {
            return (Integer::ZERO, Natural::ONE);
        }
        let p = q.numer();
        let d = q.denom();
        let dz = Integer::from(d);
        let deg = f.num.len() - 1;
        // Σ a_i p^i d^(deg-i) by Horner in homogeneous form
        let mut acc = f.num[deg].clone();
        let mut dpow = Integer::ONE;
        for i in (0..deg).rev() {
            dpow *= &dz;
            acc = acc * &p + &f.num[i] * &dpow;
        }
        let den = &f.den * pow_nat(d, deg as u64);
        (acc, den)
    }

    /// Exact value `p(q)` in lowest terms.
    pub fn eval(&self, q: &Rat) -> Rat {
        let (n, d) = self.eval_parts(q);
        Rat::from_integers(n, Integer::from(d))
    }

    /// `p(q) == v` without reducing the value of `p(q)`.
    pub fn eval_eq(&self, q: &Rat, v: &Rat) -> bool {
        self.eval_cmp(q, v) == Ordering::Equal
    }

    /// Compares `p(q)` with `v`.
    pub fn eval_cmp(&self, q: &Rat, v: &Rat) -> Ordering {
        let (n, d) = self.eval_parts(q);
        let lhs = n * Integer::from(v.denom());
        let rhs = v.numer() * Integer::from(d);
        lhs.cmp(&rhs)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::from_coeffs(
            (0..n)
                .map(|i| match (self.coeffs.get(i), other.coeffs.get(i)) {
                    (Some(a), Some(b)) => a + b,
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.clone(),
                    (None, None) => unreachable!(),
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&Rat::int(-1)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::from_coeffs(out)
    }

    /// `self * (x - r)`.
    pub fn mul_linear(&self, r: &Rat) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let n = self.coeffs.len();
        let mut out = Vec::with_capacity(n + 1);
        out.push(-(r * &self.coeffs[0]));
        for i in 1..n {
            out.push(&self.coeffs[i - 1] - &(r * &self.coeffs[i]));
        }
        out.push(self.coeffs[n - 1].clone());
        Poly::from_coeffs(out)
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * &Rat::int(i as i64))
                .collect(),
        )
    }

    /// `Σ |c_i|`, an upper bound for `sup_{[0,1]} |p|`.
    pub fn sup_abs_bound_unit(&self) -> Rat {
        let f = self.int_form();
        let total: Natural = f.num.iter().map(|a| a.unsigned_abs_ref().clone()).sum();
        Rat::from_naturals(total, f.den.clone())
    }

    /// A lower bound for `p` on `[0,1]`: `c_0 + Σ_{i>=1} min(c_i, 0)`.
    pub fn lower_bound_unit(&self) -> Rat {
        let f = self.int_form();
        if f.num.is_empty() {
            return Rat::zero();
        }
        let mut total = f.num[0].clone();
        for a in &f.num[1..] {
            if *a < 0 {
                total += a;
            }
        }
        Rat::from_integers(total, Integer::from(&f.den))
    }

    /// Sign of [`Poly::lower_bound_unit`] without reducing it.
    fn lower_bound_sign(&self) -> Ordering {
        let f = self.int_form();
        if f.num.is_empty() {
            return Ordering::Equal;
        }
        let mut total = f.num[0].clone();
        for a in &f.num[1..] {
            if *a < 0 {
                total += a;
            }
        }
        total.sign()
    }

    /// Exact certificate that `p` is strictly increasing on `[0,1]`: the
    /// coefficient lower bound of `p'` is positive, or it is zero and `p'` is
    /// not identically zero (then `p' >= 0` with finitely many zeros).
    pub fn is_certified_increasing(&self) -> bool {
        let d = self.derivative();
        match d.lower_bound_sign() {
            Ordering::Greater => true,
            Ordering::Equal => !d.is_zero(),
            Ordering::Less => false,
        }
    }

    /// Polynomial long division: `self = q * divisor + r`, `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.degree();
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] = &rem[i + j] - &(&c * dc);
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Poly::from_coeffs(quot), Poly::from_coeffs(rem))
    }

    /// Number of distinct real roots in `[0, 1]`, by Sturm's theorem.
    pub fn count_roots_unit(&self) -> usize {
        assert!(!self.is_zero());
        if self.degree() == 0 {
            return 0;
        }
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&Rat::int(-1)));
        }
        let changes = |x: &Rat| {
            let signs: Vec<Ordering> = seq
                .iter()
                .map(|p| p.eval(x).cmp(&Rat::zero()))
                .filter(|s| *s != Ordering::Equal)
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        // Sturm counts distinct roots in (0, 1]; add 0 separately
        let at_zero = usize::from(self.eval(&Rat::zero()).is_zero());
        changes(&Rat::zero()) - changes(&Rat::one()) + at_zero
    }
}

fn pow_nat(x: &Natural, e: u64) -> Natural {
    use malachite_base::num::arithmetic::traits::Pow;
    x.pow(e)
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Poly::from_coeffs(Vec::<Rat>::deserialize(d)?))
    }
}

/// Monic `∏ (x - node)`.
pub fn node_product(nodes: &[UnitRat]) -> Result<Poly> {
    let mut seen = HashSet::with_capacity(nodes.len());
    for n in nodes {
        if !seen.insert(n) {
            return Err(Error::DuplicateNode(n.to_string()));
        }
    }
    Ok(node_product_unchecked(nodes.iter().map(UnitRat::value)))
}

pub(crate) fn node_product_unchecked<'a>(nodes: impl Iterator<Item = &'a Rat>) -> Poly {
    // Integer form: ∏ (D x - N) / ∏ D keeps every intermediate step free of
    // gcds; coefficients are reduced once at the end.
    let mut num: Vec<Integer> = vec![Integer::ONE];
    let mut den = Natural::ONE;
    for r in nodes {
        let dn = Integer::from(r.denom());
        let nn = r.numer();
        let mut next = vec![Integer::ZERO; num.len() + 1];
        for (i, c) in num.iter().enumerate() {
            next[i + 1] += c * &dn;
            next[i] -= c * &nn;
        }
        num = next;
        den *= r.denom();
    }
    let den_i = Integer::from(&den);
    let coeffs = num
        .into_iter()
        .map(|c| Rat::from_integers(c, den_i.clone()))
        .collect();
    Poly::from_coeffs(coeffs)
}

/// `Σ_{k>n} 4^(1-k) = (4/3) 4^(-n)`: bounds `|f - f_n|` on `[0,1]` whenever
/// every later term has `|ε_k| <= 4^(1-k)`.
pub fn tail_bound(n: u64) -> Rat {
    assert!(n >= 1);
    &Rat::new(4, 3) * &Rat::pow4_neg(n)
}

/// `[f_n(q) - tail, f_n(q) + tail]`, which contains the limit value `f(q)`.
pub fn eval_enclosure(f_n: &Poly, n: u64, q: &Rat) -> (Rat, Rat) {
    enclosure_with_tail(f_n, q, &tail_bound(n))
}

pub fn enclosure_with_tail(f_n: &Poly, q: &Rat, tail: &Rat) -> (Rat, Rat) {
    let v = f_n.eval(q);
    (&v - tail, &v + tail)
}

/// Current bracket of a [`Bisector`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bracket {
    /// The target value is attained exactly here.
    Hit(Rat),
    /// `[n / 2^k, (n + 1) / 2^k]`, with `p` strictly below the target at
    /// the left end and strictly above at the right end.
    Dyadic { n: Natural, k: u64 },
}

/// Exact bisection for `p(x) = y` on `[0,1]`, `p` increasing.
///
/// Each halving keeps the left end where `p < y`, the right end where
/// `p > y`, and stops at an exact hit. Large jumps in precision are taken
/// with Newton steps on the dyadic grid followed by an exact galloping
/// correction, which lands on precisely the bracket repeated halving would
/// produce.
pub struct Bisector {
    a: Vec<Integer>,
    da: Vec<Integer>,
    l: Natural,
    yn: Integer,
    yd: Natural,
    bracket: Bracket,
}

/// Below this many additional bits, refinement halves one bit at a time.
const NEWTON_THRESHOLD: u64 = 96;

impl Bisector {
    pub fn new(p: &Poly, y: &Rat) -> Result<Self> {
        if !p.is_certified_increasing() {
            return Err(Error::NotMonotone);
        }
        Self::new_certified(p, y)
    }

    /// As [`Bisector::new`], for a `p` the caller has already certified to
    /// be strictly increasing on `[0, 1]` by other means.
    pub fn new_certified(p: &Poly, y: &Rat) -> Result<Self> {
        let lo = p.eval(&Rat::zero());
        let hi = p.eval(&Rat::one());
        if *y < lo || *y > hi {
            return Err(Error::NotBracketed(y.to_string()));
        }
        let (a, l) = p.integer_form();
        let da = a
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Integer::from(i as u64))
            .collect();
        let bracket = if *y == lo {
            Bracket::Hit(Rat::zero())
        } else if *y == hi {
            Bracket::Hit(Rat::one())
        } else {
            Bracket::Dyadic {
                n: Natural::ZERO,
                k: 0,
            }
        };
        Ok(Bisector {
            a: a.to_vec(),
            da,
            l: l.clone(),
            yn: y.numer(),
            yd: y.denom().clone(),
            bracket,
        })
    }

    pub fn bracket(&self) -> &Bracket {
        &self.bracket
    }

    pub fn bounds(&self) -> (Rat, Rat) {
        match &self.bracket {
            Bracket::Hit(x) => (x.clone(), x.clone()),
            Bracket::Dyadic { n, k } => (
                Rat::dyadic(n.clone(), *k),
                Rat::dyadic(n + Natural::ONE, *k),
            ),
        }
    }

    /// Precision of the current bracket in bits (`u64::MAX` after a hit).
    pub fn bits(&self) -> u64 {
        match &self.bracket {
            Bracket::Hit(_) => u64::MAX,
            Bracket::Dyadic { k, .. } => *k,
        }
    }

    /// `Σ c_i N^i 2^(k(d-i))` for the given integer coefficients.
    fn hom(c: &[Integer], n: &Natural, k: u64) -> Integer {
        if c.is_empty() {
            return Integer::ZERO;
        }
        let nz = Integer::from(n);
        let d = c.len() - 1;
        let mut acc = c[d].clone();
        for i in (0..d).rev() {
            acc = acc * &nz + (&c[i] << (k * (d - i) as u64));
        }
        acc
    }

    /// Same sign as `p(n / 2^k) - y`.
    fn g(&self, n: &Natural, k: u64) -> Integer {
        let d = self.a.len().saturating_sub(1) as u64;
        Self::hom(&self.a, n, k) * Integer::from(&self.yd)
            - ((&self.yn * Integer::from(&self.l)) << (k * d))
    }

    fn set_from(&mut self, n: Natural, k: u64) {
        if self.g(&n, k) == 0 {
            self.bracket = Bracket::Hit(Rat::dyadic(n, k));
        } else {
            self.bracket = Bracket::Dyadic { n, k };
        }
    }

    /// Refines until the bracket width is at most `2^-k` (or a hit).
    pub fn refine_to(&mut self, target: u64) {
        loop {
            let (n, k) = match &self.bracket {
                Bracket::Hit(_) => return,
                Bracket::Dyadic { n, k } => (n.clone(), *k),
            };
            if k >= target {
                return;
            }
            if target - k <= NEWTON_THRESHOLD || k < 32 {
                self.halve(n, k);
            } else {
                let k2 = (2 * k).min(target);
                self.newton_level(n, k, k2);
            }
        }
    }

    fn halve(&mut self, n: Natural, k: u64) {
        let mid = (&n << 1u64) + Natural::ONE;
        let s = self.g(&mid, k + 1);
        self.bracket = match s.sign() {
            Ordering::Equal => Bracket::Hit(Rat::dyadic(mid, k + 1)),
            Ordering::Less => Bracket::Dyadic { n: mid, k: k + 1 },
            Ordering::Greater => Bracket::Dyadic {
                n: n << 1u64,
                k: k + 1,
            },
        };
    }

    /// Jumps from precision `k` to `k2`: a Newton guess on the finer grid,
    /// then an exact search for the last grid point with `p <= y`.
    fn newton_level(&mut self, n: Natural, k: u64, k2: u64) {
        let shift = k2 - k;
        let lo = &n << shift; // g(lo) < 0
        let hi = (&n + Natural::ONE) << shift; // g(hi) > 0
        let start = &lo + (Natural::ONE << (shift - 1));
        let gs = self.g(&start, k2);
        let slope = Self::hom(&self.da, &start, k2) * Integer::from(&self.yd);
        let mut guess = Integer::from(&start);
        if slope > 0 {
            guess -= div_floor(&gs, &slope);
        }
        let lo_i = Integer::from(&lo);
        let hi_i = Integer::from(&hi) - Integer::ONE;
        let guess = Natural::try_from(guess.clamp(lo_i, hi_i)).expect("clamped to bracket");
        let last = self.last_at_or_below(guess, &lo, &hi, k2);
        self.set_from(last, k2);
    }

    /// Largest `m` in `[lo, hi)` with `g(m) <= 0`, given `g(lo) < 0 < g(hi)`,
    /// searching outward from `guess` with doubling steps.
    fn last_at_or_below(&self, guess: Natural, lo: &Natural, hi: &Natural, k: u64) -> Natural {
        let (mut below, mut above);
        if self.g(&guess, k) <= 0 {
            below = guess;
            let mut step = Natural::ONE;
            loop {
                let probe = (&below + &step).min(hi.clone());
                if probe == *hi || self.g(&probe, k) > 0 {
                    above = probe;
                    break;
                }
                below = probe;
                step <<= 1u64;
            }
        } else {
            above = guess;
            let mut step = Natural::ONE;
            loop {
                let probe = if above > (lo + &step) {
                    &above - &step
                } else {
                    lo.clone()
                };
                if probe == *lo || self.g(&probe, k) <= 0 {
                    below = probe;
                    break;
                }
                above = probe;
                step <<= 1u64;
            }
        }
        // invariant: g(below) <= 0 < g(above)
        while &below + Natural::ONE < above {
            let mid: Natural = (&below + &above) >> 1u64;
            if self.g(&mid, k) <= 0 {
                below = mid;
            } else {
                above = mid;
            }
        }
        below
    }
}

fn div_floor(a: &Integer, b: &Integer) -> Integer {
    use malachite_base::num::arithmetic::traits::DivRound;
    use malachite_base::rounding_modes::RoundingMode;
    a.div_round(b, RoundingMode::Floor).0
}

/// Smallest `k` with `2^k >= width_den`.
pub fn bits_for_width(width_den: &Natural) -> u64 {
    assert!(*width_den >= 1u32);
    (width_den - Natural::ONE).significant_bits()
}

/// Rational bracket `(lo, hi)` with `p(lo) <= y <= p(hi)` and
/// `hi - lo <= 1/width_den`, degenerate when `y` is hit exactly.
pub fn monotone_invert(p: &Poly, y: &Rat, width_den: &Natural) -> Result<(Rat, Rat)> {
    let mut b = Bisector::new(p, y)?;
    b.refine_to(bits_for_width(width_den));
    Ok(b.bounds())
}

/// A quotient of polynomials, evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::PoleInUnit);
        }
        Ok(RatFunc { num, den })
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn eval(&self, q: &Rat) -> Result<Rat> {
        let d = self.den.eval(q);
        if d.is_zero() {
            return Err(Error::PoleInUnit);
        }
        Ok(self.num.eval(q) / d)
    }

    /// The denominator has no root in `[0, 1]`.
    pub fn is_unit_safe(&self) -> bool {
        !self.den.is_zero() && self.den.count_roots_unit() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn p(c: &[(i64, i64)]) -> Poly {
        Poly::from_coeffs(c.iter().map(|&(n, d)| r(n, d)).collect())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Poly::x().eval(&r(1, 2)), r(1, 2));
        let cubic = node_product_unchecked([r(0, 1), r(1, 1), r(1, 2)].iter()).scale(&r(1, 192));
        assert_eq!(cubic.eval(&r(1, 3)), r(1, 5184));
        assert_eq!(Poly::zero().eval(&r(7, 9)), Rat::zero());
        assert!(cubic.eval_eq(&r(1, 3), &r(1, 5184)));
        assert_eq!(cubic.eval_cmp(&r(1, 3), &r(1, 5000)), Ordering::Less);
    }

    #[test]
    fn node_product_examples() {
        let u = UnitRat::small;
        assert_eq!(
            node_product(&[u(0, 1), u(1, 1)]).unwrap(),
            p(&[(0, 1), (-1, 1), (1, 1)])
        );
        assert_eq!(
            node_product(&[u(0, 1), u(1, 1), u(1, 2)]).unwrap(),
            p(&[(0, 1), (1, 2), (-3, 2), (1, 1)])
        );
        assert_eq!(node_product(&[]).unwrap(), Poly::one());
        assert!(matches!(
            node_product(&[u(1, 2), u(2, 4)]),
            Err(Error::DuplicateNode(_))
        ));
    }

    #[test]
    fn sup_bound_and_derivative_examples() {
        assert_eq!(p(&[(0, 1), (-1, 1), (1, 1)]).sup_abs_bound_unit(), r(2, 1));
        assert_eq!(Poly::constant(r(3, 4)).sup_abs_bound_unit(), r(3, 4));
        let n3 = p(&[(0, 1), (1, 2), (-3, 2), (1, 1)]);
        assert_eq!(n3.sup_abs_bound_unit(), r(3, 1));
        assert_eq!(Poly::x().derivative(), Poly::one());
        assert_eq!(
            p(&[(0, 1), (-1, 1), (1, 1)]).derivative(),
            p(&[(-1, 1), (2, 1)])
        );
        assert_eq!(n3.derivative(), p(&[(1, 2), (-3, 1), (3, 1)]));
    }

    #[test]
    fn tail_bound_examples() {
        assert_eq!(tail_bound(1), r(1, 3));
        assert_eq!(tail_bound(2), r(1, 12));
        // geometric-sum oracle: Σ_{k=3..60} 4^(1-k) approaches 1/12 from below
        let partial = (3..=60).fold(Rat::zero(), |acc, k| acc + Rat::pow4_neg(k - 1));
        assert!(partial < r(1, 12));
        assert!(&r(1, 12) - &partial < Rat::pow4_neg(58));
        for n in 1..20 {
            assert_eq!(tail_bound(n + 1), &tail_bound(n) / &r(4, 1));
        }
    }

    #[test]
    fn enclosure_examples() {
        assert_eq!(eval_enclosure(&Poly::x(), 1, &r(1, 2)), (r(1, 6), r(5, 6)));
        let (lo, hi) = eval_enclosure(&Poly::x(), 2, &r(1, 3));
        assert_eq!((lo, hi), (&r(1, 3) - &r(1, 12), &r(1, 3) + &r(1, 12)));
    }

    #[test]
    fn invert_identity() {
        let (lo, hi) = monotone_invert(&Poly::x(), &r(1, 3), &Natural::from(1000u32)).unwrap();
        assert!(lo <= r(1, 3) && r(1, 3) <= hi);
        assert!(&hi - &lo <= r(1, 1000));
        let (lo, hi) = monotone_invert(&Poly::x(), &r(3, 8), &Natural::from(1000u32)).unwrap();
        assert_eq!((lo, hi), (r(3, 8), r(3, 8)));
        assert!(matches!(
            monotone_invert(&Poly::x(), &r(2, 1), &Natural::from(10u32)),
            Err(Error::NotBracketed(_))
        ));
        let dec = p(&[(1, 1), (-1, 1)]);
        assert!(matches!(
            monotone_invert(&dec, &r(1, 2), &Natural::from(10u32)),
            Err(Error::NotMonotone)
        ));
    }

    #[test]
    fn invert_square() {
        let sq = p(&[(0, 1), (0, 1), (1, 1)]);
        let y = r(1, 2);
        let (lo, hi) = monotone_invert(&sq, &y, &Natural::from(1_000_000u32)).unwrap();
        assert!(sq.eval(&lo) <= y && y <= sq.eval(&hi));
        assert!(&hi - &lo <= r(1, 1_000_000));
        // √2/2 ≈ 0.70710678
        assert!(lo < r(70710679, 100000000) && hi > r(70710677, 100000000));
    }

    /// Plain halving from [0, 1], the reference the Newton path must match.
    fn reference_bisect(p: &Poly, y: &Rat, k: u64) -> (Rat, Rat) {
        let (mut lo, mut hi) = (Rat::zero(), Rat::one());
        if p.eval(&lo) == *y {
            return (lo.clone(), lo);
        }
        if p.eval(&hi) == *y {
            return (hi.clone(), hi);
        }
        for _ in 0..k {
            let mid = lo.midpoint(&hi);
            match p.eval(&mid).cmp(y) {
                Ordering::Equal => return (mid.clone(), mid),
                Ordering::Less => lo = mid,
                Ordering::Greater => hi = mid,
            }
        }
        (lo, hi)
    }

    #[test]
    fn newton_path_matches_halving() {
        let f = Poly::x().add(
            &node_product_unchecked([r(0, 1), r(1, 1), r(1, 2), r(1, 3)].iter()).scale(&r(1, 70)),
        );
        for (yn, yd) in [(1, 3), (2, 7), (5, 9), (1, 1000), (999, 1000), (1, 2)] {
            let y = r(yn, yd);
            for k in [40u64, 97, 130, 200, 333] {
                let mut b = Bisector::new(&f, &y).unwrap();
                b.refine_to(k);
                assert_eq!(b.bounds(), reference_bisect(&f, &y, k), "y={y} k={k}");
            }
        }
        // dyadic target on the identity: exact hit at depth 150
        let y = Rat::dyadic(Natural::from(12345u32), 150);
        let mut b = Bisector::new(&Poly::x(), &y).unwrap();
        b.refine_to(400);
        assert_eq!(b.bounds(), (y.clone(), y));
    }

    #[test]
    fn newton_path_at_scale() {
        // a hundred-thousand-bit bracket of a cubic, checked exactly
        let f = Poly::x()
            .add(&node_product_unchecked([r(0, 1), r(1, 1), r(1, 2)].iter()).scale(&r(1, 192)));
        let y = r(1, 3);
        let mut b = Bisector::new(&f, &y).unwrap();
        b.refine_to(100_000);
        let (lo, hi) = b.bounds();
        assert_eq!(b.bits(), 100_000);
        assert_eq!(f.eval_cmp(&lo, &y), Ordering::Less);
        assert_eq!(f.eval_cmp(&hi, &y), Ordering::Greater);
    }

    #[test]
    fn sturm_root_counts() {
        // (x - 1/3)(x - 1/2) has two roots in [0, 1]
        assert_eq!(p(&[(1, 6), (-5, 6), (1, 1)]).count_roots_unit(), 2);
        // x^2 + 1: none
        assert_eq!(p(&[(1, 1), (0, 1), (1, 1)]).count_roots_unit(), 0);
        // x: the root at 0 counts
        assert_eq!(Poly::x().count_roots_unit(), 1);
        // 2x - 3: root outside
        assert_eq!(p(&[(-3, 1), (2, 1)]).count_roots_unit(), 0);
        // (x - 1)^2: one distinct root
        assert_eq!(p(&[(1, 1), (-2, 1), (1, 1)]).count_roots_unit(), 1);
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(&[(1, 2), (3, 1), (-2, 3), (5, 7)]);
        let b = p(&[(1, 1), (2, 5)]);
        let (q, rem) = a.div_rem(&b);
        assert_eq!(q.mul(&b).add(&rem), a);
        assert!(rem.degree() < b.degree() || rem.is_zero());
    }

    #[test]
    fn rat_func_poles() {
        let g = RatFunc::new(Poly::x(), p(&[(-1, 1), (2, 1)])).unwrap();
        assert!(!g.is_unit_safe());
        assert!(matches!(g.eval(&r(1, 2)), Err(Error::PoleInUnit)));
        let h = RatFunc::new(Poly::x(), p(&[(1, 2), (1, 2)])).unwrap();
        assert!(h.is_unit_safe());
        assert_eq!(h.eval(&r(1, 2)).unwrap(), r(2, 3));
    }
}
