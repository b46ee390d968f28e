//! The counting variant: at stage `n` the function is frozen on every
//! rational of height at most `T_n`, which forces
//! `C_f(T_n) = #{x : H(x) <= T_n, H(f(x)) <= T_n} >= s(T_n)`.

use std::collections::HashMap;

use malachite_base::num::arithmetic::traits::{FloorRoot, Pow};
use malachite_base::num::logic::traits::SignificantBits;
use malachite_nz::natural::Natural;

use crate::avoid::{AvoidFamily, AvoidWitness};
use crate::bounds::{ln2_bounds, SlowFunction};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lex::{farey_count, gcd_u64, EnumKind, Enumeration};
use crate::poly::{node_product_unchecked, Bisector, Bracket, Poly};
use crate::rat::{Rat, UnitRat};
use crate::trace::{
    Config, Mode, StageCase, StageRecord, Trace, DEFAULT_NODE_LIMIT, TRACE_VERSION,
};

/// `(b, d)` with `H(f(q)) <= b H(q)^d` for every `q` in `[0, 1]`:
/// `f = (1/L) Σ a_i x^i`, `b = max(Σ |a_i|, L)`, `d = deg f`.
pub fn poly_height_coeff(f: &Poly) -> (Natural, u64) {
    let (a, l) = f.integer_form();
    let sum: Natural = a.iter().map(|c| c.unsigned_abs_ref().clone()).sum();
    (sum.max(l.clone()), f.degree() as u64)
}

/// Largest `K` with `b K^d <= t`.
fn height_reach(b: &Natural, d: u64, t: u64) -> u64 {
    let q = Natural::from(t) / b;
    let k = if d <= 1 { q } else { (&q).floor_root(d) };
    u64::try_from(&k).expect("reach is at most t")
}

/// Least `T >= max(b + 1, lower)` with `farey_count(K) >= ⌈s(T)⌉`, where
/// `K` is the largest integer with `b K^d <= T`. Every `q` of height at
/// most `K` then has `H(f(q)) <= T`.
pub fn choose_t(b: &Natural, d: u64, lower: u64, slow: &SlowFunction) -> u64 {
    let start = u64::try_from(&(b + Natural::from(1u32)))
        .expect("height coefficient fits in u64")
        .max(lower)
        .max(1);
    let (l2lo, l2hi) = ln2_bounds();
    let mut counts: HashMap<u64, u64> = HashMap::new();
    let mut t = start;
    loop {
        let k = height_reach(b, d, t);
        let have = *counts.entry(k).or_insert_with(|| farey_count(k));
        let have_r = Rat::from(Natural::from(have));
        // ln t lies in [(bits - 1) ln 2, bits ln 2]
        let bits = t.significant_bits() as i64;
        let cheap_hi = &slow.c * &(&l2hi * &Rat::int(bits)).pow(u64::from(slow.k));
        let cheap_lo = &slow.c * &(&l2lo * &Rat::int(bits - 1)).pow(u64::from(slow.k));
        if have_r >= Rat::from(cheap_hi.ceil()) {
            return t;
        }
        if have_r < cheap_lo {
            // cheap_lo never decreases, so nothing below the next K works
            let next = b * Natural::from(k + 1).pow(d);
            t = u64::try_from(&next).map_or(u64::MAX, |n| n.max(t + 1));
            continue;
        }
        if have >= slow.demand(t) {
            return t;
        }
        t += 1;
    }
}

/// All rationals in `[0, 1]` of height at most `t`, in increasing order.
pub fn farey_sequence(t: u64) -> Vec<UnitRat> {
    let mut out = Vec::new();
    for h in 1..=t {
        for p in 0..=h {
            if gcd_u64(p, h) == 1 {
                out.push(UnitRat::small(p, h));
            }
        }
    }
    out.sort();
    out
}

/// `4^(-|Q|-1) / |Q|`.
pub fn eps_bound(q_size: u64) -> Rat {
    &Rat::pow4_neg(q_size + 1) / &Rat::int(q_size as i64)
}

/// `#{q : H(q) <= t, H(f(q)) <= t}`, summed over denominators.
pub fn count_cf_poly(f: &Poly, t: u64, exec: Exec) -> u64 {
    let tn = Natural::from(t);
    exec.sum_range(1..t + 1, |h| {
        (0..=h)
            .filter(|&p| gcd_u64(p, h) == 1)
            .filter(|&p| *f.eval(&Rat::new(p as i64, h as i64)).height_ref() <= tn)
            .count() as u64
    })
}

/// `g(0) != 0` or `g(1) != 1` already separates `g` from every `f` built
/// here, which fixes both endpoints.
fn endpoint_witness(family: &AvoidFamily, t: u64) -> Option<AvoidWitness> {
    for p in [UnitRat::zero(), UnitRat::one()] {
        let g = family.eval(t, p.value())?;
        if &g != p.value() {
            return Some(AvoidWitness {
                g: t,
                point: p.clone(),
                f_value: p.into_rat(),
                g_value: g,
            });
        }
    }
    None
}

pub struct PilaState {
    pub n: u64,
    pub f: Poly,
    pub t_seq: Vec<u64>,
    pub z_list: Vec<UnitRat>,
    pub eps_list: Vec<Rat>,
    /// Lower bound for `f'` on `[0, 1]`.
    pub deriv_lower: Rat,
    pub avoid: AvoidFamily,
    pub slow: SlowFunction,
    pub node_limit: u64,
    pub exec: Exec,
    pub records: Vec<StageRecord>,
    y_enum: Enumeration,
}

impl PilaState {
    pub fn new(slow: SlowFunction, avoid: AvoidFamily, y_kind: EnumKind) -> Self {
        PilaState::with_poly(Poly::x(), slow, avoid, y_kind).expect("the identity is increasing")
    }

    /// Starts from an arbitrary `f_0` fixing 0 and 1 whose derivative has a
    /// positive coefficient lower bound on `[0, 1]`.
    pub fn with_poly(
        f: Poly,
        slow: SlowFunction,
        avoid: AvoidFamily,
        y_kind: EnumKind,
    ) -> Result<Self> {
        if f.eval(&Rat::zero()) != Rat::zero() || f.eval(&Rat::one()) != Rat::one() {
            return Err(Error::Config("f_0 must fix 0 and 1".into()));
        }
        let deriv_lower = f.derivative().lower_bound_unit();
        if !deriv_lower.is_positive() {
            return Err(Error::NotMonotone);
        }
        Ok(PilaState {
            n: 0,
            f,
            t_seq: Vec::new(),
            z_list: Vec::new(),
            eps_list: Vec::new(),
            deriv_lower,
            avoid,
            slow,
            node_limit: DEFAULT_NODE_LIMIT,
            exec: Exec::default(),
            records: Vec::new(),
            y_enum: Enumeration::new(y_kind),
        })
    }

    pub fn y_at(&mut self, i: u64) -> UnitRat {
        self.y_enum.get(i).clone()
    }

    /// Current threshold: the last `T_n` fixed by a completed stage.
    pub fn threshold(&self) -> Option<u64> {
        self.t_seq.last().copied()
    }

    /// `C_f(t)` for `t` up to the current threshold, where `f` agrees with
    /// the limit function on every counted point.
    pub fn count_cf(&self, t: u64) -> Result<u64> {
        let available = self.threshold().unwrap_or(0);
        if t > available {
            return Err(Error::StageTooShallow {
                requested: t,
                available,
            });
        }
        Ok(count_cf_poly(&self.f, t, self.exec))
    }

    /// `Q_n`: every rational of height at most `t` plus the earlier `z`s.
    fn node_set(&self, t: u64) -> Result<Vec<UnitRat>> {
        let base = farey_count(t);
        if base + self.z_list.len() as u64 > self.node_limit {
            return Err(Error::StageTooLarge {
                stage: self.n,
                reason: format!("|Q_n| >= {base} exceeds the node limit {}", self.node_limit),
            });
        }
        let tn = Natural::from(t);
        let mut q = farey_sequence(t);
        q.extend(
            self.z_list
                .iter()
                .filter(|z| *z.value().height_ref() > tn)
                .cloned(),
        );
        q.sort();
        Ok(q)
    }

    /// The `≺`-least `r` with `t < H(r) <= t + n + 1` that is not an
    /// earlier `z`.
    fn pick_r(&self, t: u64) -> Option<UnitRat> {
        (t + 1..=t + self.n + 1)
            .flat_map(|h| {
                (1..h)
                    .filter(move |&p| gcd_u64(p, h) == 1)
                    .map(move |p| (p, h))
            })
            .map(|(p, h)| UnitRat::small(p, h))
            .find(|r| !self.z_list.contains(r))
    }

    /// Runs stage `n`: fixes `T_n`, builds `Q_n`, picks `z_n` and `ε_n`
    /// and sets `f_{n+1} = f_n + ε_n ∏_{q ∈ Q_n} (x - q)`.
    pub fn step(&mut self) -> Result<&StageRecord> {
        let n = self.n;
        let (b, d) = poly_height_coeff(&self.f);
        let lower = self.threshold().map_or(0, |t| t + n);
        let t = choose_t(&b, d, lower, &self.slow);
        let q = self.node_set(t)?;
        let q_size = q.len() as u64;
        let bound = eps_bound(q_size);
        let y = self.y_at(n);
        let c_f = count_cf_poly(&self.f, t, self.exec);
        let s_upper = self.slow.upper(t);

        let found = q
            .binary_search_by(|x| self.f.eval_cmp(x.value(), y.value()))
            .ok()
            .map(|i| q[i].clone());
        let (case, z, eps, r, bits, witness) = match found {
            Some(z) => {
                let r = self.pick_r(t).ok_or(Error::Invariant {
                    step: n,
                    what: "no rational of the next height band is free".into(),
                })?;
                let prod_r = product_at(r.value(), &q);
                let f_r = self.f.eval(r.value());
                let g_r = self.avoid.eval(n, r.value());
                let mut ladder = vec![Rat::zero()];
                let mut e = bound.clone();
                for _ in 0..2 {
                    ladder.push(e.clone());
                    e = &e / &Rat::int(2);
                }
                let (eps, witness) = ladder
                    .into_iter()
                    .find_map(|eps| {
                        let v = &f_r + &(&eps * &prod_r);
                        match &g_r {
                            Some(g) if *g == v => None,
                            Some(g) => Some((
                                eps,
                                Some(AvoidWitness {
                                    g: n,
                                    point: r.clone(),
                                    f_value: v,
                                    g_value: g.clone(),
                                }),
                            )),
                            None => Some((eps, None)),
                        }
                    })
                    .expect("at most one candidate collides with g_n(r)");
                (StageCase::Hit, z, eps, Some(r), None, witness)
            }
            None => {
                let (z, eps, k) = self.fresh_node(&q, &y, &bound)?;
                let witness = endpoint_witness(&self.avoid, n).or_else(|| {
                    let g = self.avoid.eval(n, z.value())?;
                    Some(AvoidWitness {
                        g: n,
                        point: z.clone(),
                        f_value: y.value().clone(),
                        g_value: g,
                    })
                });
                (StageCase::Fresh, z, eps, None, Some(k), witness)
            }
        };
        if !eps.is_zero() {
            let prod = node_product_unchecked(q.iter().map(UnitRat::value));
            self.f = self.f.add(&prod.scale(&eps));
            self.deriv_lower = &self.deriv_lower - &(&eps.abs() * &Rat::int(q_size as i64));
        }
        if !self.deriv_lower.is_positive() {
            return Err(Error::Invariant {
                step: n,
                what: "monotonicity certificate lost".into(),
            });
        }
        self.t_seq.push(t);
        self.z_list.push(z.clone());
        self.eps_list.push(eps.clone());
        self.records.push(StageRecord {
            n,
            t_n: t,
            q_size,
            b_n: b.to_string(),
            d_n: d,
            y_n: y,
            z_n: z,
            eps_n: eps,
            case,
            r,
            bits,
            avoid_witness: witness,
            c_f,
            s_upper,
        });
        self.n += 1;
        Ok(self.records.last().expect("just pushed"))
    }

    /// Case `y_n ∉ f_n(Q_n)`: a node `z` near `f_n^{-1}(y_n)`, outside
    /// `Q_n`, with `g_n(z) != y_n` and `|ε| <= bound`.
    fn fresh_node(&self, q: &[UnitRat], y: &UnitRat, bound: &Rat) -> Result<(UnitRat, Rat, u64)> {
        let n = self.n;
        let mut bis = Bisector::new_certified(&self.f, y.value())?;
        let g_free = endpoint_witness(&self.avoid, n).is_some();
        let accept = |z: &Rat| -> Option<Rat> {
            if !z.in_unit() {
                return None;
            }
            let zu = UnitRat::new(z.clone()).ok()?;
            if q.binary_search(&zu).is_ok() {
                return None;
            }
            if !g_free {
                if let Some(g) = self.avoid.eval(n, z) {
                    if &g == y.value() {
                        return None;
                    }
                }
            }
            let num = y.value() - &self.f.eval(z);
            let eps = &num / &product_at(z, q);
            (eps.abs() <= *bound).then_some(eps)
        };
        let mut k = 2 * q.len() as u64 + 8;
        loop {
            bis.refine_to(k);
            let cands: Vec<Rat> = match bis.bracket() {
                Bracket::Hit(x) => {
                    let step = Rat::dyadic(Natural::from(1u32), k);
                    vec![x.clone(), x - &step, x + &step]
                }
                Bracket::Dyadic { .. } => {
                    let (lo, hi) = bis.bounds();
                    vec![lo, hi]
                }
            };
            for c in cands {
                if let Some(eps) = accept(&c) {
                    let z = UnitRat::new(c)?;
                    return Ok((z, eps, k));
                }
            }
            if k > 1 << 24 {
                return Err(Error::Invariant {
                    step: n,
                    what: "no admissible node near the preimage".into(),
                });
            }
            k += k / 2;
        }
    }
}

/// `∏_{q ∈ Q} (x - q)`.
fn product_at(x: &Rat, q: &[UnitRat]) -> Rat {
    q.iter().fold(Rat::one(), |acc, n| &acc * &(x - n.value()))
}

pub(crate) const PILA_NOTES: &[&str] = &[
    "T_n is the least T >= max(b_n + 1, T_(n-1) + n) with farey_count(K) >= ceil(s(T)), K the largest integer with b_n K^d_n <= T",
    "r is the least rational in the order by height then value with T_n < H(r) <= T_n + n + 1 other than an earlier z",
    "the epsilon ladder in the hit case is 0, then 4^(-|Q|-1)/|Q| halved",
];

/// Runs stages `0..=stages`.
pub fn run_pila(config: &Config) -> Result<(PilaState, Trace)> {
    if config.mode != Mode::Pila {
        return Err(Error::Config("run_pila needs mode pila".into()));
    }
    let stages = config
        .stages
        .ok_or_else(|| Error::Config("pila mode needs a stage count".into()))?;
    let slow = config.slow.clone().unwrap_or_default();
    let mut st = PilaState::new(slow, config.avoid.clone(), config.y_enum);
    st.node_limit = config.node_limit;
    for _ in 0..=stages {
        st.step()?;
    }
    let trace = Trace {
        version: TRACE_VERSION,
        mode: Mode::Pila,
        config: config.clone(),
        seed_repair: None,
        notes: PILA_NOTES.iter().map(|s| s.to_string()).collect(),
        schedule: None,
        steps: Vec::new(),
        stages: st.records.clone(),
    };
    Ok((st, trace))
}

/// `f_{n+1}` from `f_n` and a stage record, for replay.
pub fn apply_stage(f: &Poly, rec: &StageRecord, z_before: &[UnitRat]) -> Poly {
    if rec.eps_n.is_zero() {
        return f.clone();
    }
    let tn = Natural::from(rec.t_n);
    let mut q = farey_sequence(rec.t_n);
    q.extend(
        z_before
            .iter()
            .filter(|z| *z.value().height_ref() > tn)
            .cloned(),
    );
    let prod = node_product_unchecked(q.iter().map(UnitRat::value));
    f.add(&prod.scale(&rec.eps_n))
}
