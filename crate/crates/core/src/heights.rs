//! The height-bounded construction: the same odd/even skeleton, with the
//! even-step node taken from a grid of size `M = 2(m+1) 4^m 2^e` and every
//! step carrying exact certificates for
//! `h(ε_n / n) <= n X(n)` and `h(x_{j_k}) <= X(n)`.

use malachite_base::num::arithmetic::traits::Pow;
use malachite_base::num::logic::traits::SignificantBits;
use malachite_nz::natural::Natural;
use serde::{Deserialize, Serialize};

use crate::basic::{index_if_small, init_basic, ConstructionState, BASIC_NOTES};
use crate::bounds::ln2_bounds;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lex::{bounded_rational_near, bounded_rational_near_dyadic, Side};
use crate::poly::Bracket;
use crate::rat::{certify_h_le, certify_log_le, certify_log_le_scaled, Rat, UnitRat, Verdict};
use crate::trace::{
    Config, GridPolicy, Mode, ScheduleDesc, ScheduleKind, StepAux, StepKind, StepLedger,
    StepRecord, Trace, TRACE_VERSION,
};

/// Final-bound checks evaluate `B` at `min(H(x)^2, FINAL_T_CAP)`; `B` is
/// increasing, so a pass there implies the bound at `H(x)^2`.
pub const FINAL_T_CAP: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeightSchedule {
    pub kind: ScheduleKind,
}

impl HeightSchedule {
    pub fn strict() -> Self {
        HeightSchedule {
            kind: ScheduleKind::Strict,
        }
    }

    pub fn scaled(c: u64) -> Self {
        HeightSchedule {
            kind: ScheduleKind::Scaled { c },
        }
    }

    pub fn base(&self) -> u64 {
        match self.kind {
            ScheduleKind::Strict => 48,
            ScheduleKind::Scaled { c } => c,
        }
    }

    /// `X(0) = 1`, `X(t) = c^t (t-1)!`.
    pub fn x_of(&self, t: u64) -> Natural {
        if t == 0 {
            return Natural::from(1u32);
        }
        let fact: Natural = (1..t).map(Natural::from).product();
        Natural::from(self.base()).pow(t) * fact
    }

    /// `B(t) = 4 t X(t)`.
    pub fn b_of(&self, t: u64) -> Natural {
        assert!(t >= 1);
        Natural::from(4 * t) * self.x_of(t)
    }

    /// `Σ_{k<n} X(k) <= X(n)`.
    pub fn superadditive_at(&self, n: u64) -> bool {
        let sum: Natural = (0..n).map(|k| self.x_of(k)).sum();
        sum <= self.x_of(n)
    }

    /// `13 m X(m)`, the natural-log size of the grid factor `exp(13 m X(m))`.
    pub fn log_exponent(&self, m: u64) -> Natural {
        Natural::from(13 * m) * self.x_of(m)
    }

    /// `e = ⌈13 m X(m) / ln 2⌉` from a certified lower bound on `ln 2`, so
    /// `2^e >= exp(13 m X(m))`.
    pub fn majorant_exponent(&self, m: u64) -> Natural {
        let (ln2_lo, _) = ln2_bounds();
        let q = &Rat::from(self.log_exponent(m)) / &ln2_lo;
        Natural::try_from(q.ceil()).expect("positive")
    }
}

/// `2(m+1) 4^m 2^e`.
pub fn grid_size(m: u64, e: u64) -> Natural {
    Natural::from(2 * (m + 1)) << (2 * m + e)
}

/// Grid exponents tried by an even step at index `m`: the literal
/// majorant exponent, or `0, 1, 2, 4, ...` up to it.
fn grid_exponents(policy: GridPolicy, e_max: &Natural) -> Vec<Natural> {
    match policy {
        GridPolicy::Literal => vec![e_max.clone()],
        GridPolicy::Adaptive => {
            let mut out = vec![Natural::from(0u32)];
            let mut e = Natural::from(1u32);
            while &e < e_max {
                out.push(e.clone());
                e <<= 1u64;
            }
            if out.last() != Some(e_max) {
                out.push(e_max.clone());
            }
            out
        }
    }
}

fn step_ledger(st: &ConstructionState, sched: &HeightSchedule, node_height: Verdict) -> StepLedger {
    let n = st.m;
    let eps = &st.eps_seq[n as usize - 1];
    let xn = sched.x_of(n);
    let scaled_eps = eps / &Rat::int(n as i64);
    StepLedger {
        cond1: certify_h_le(&scaled_eps, &(Natural::from(n) * &xn)),
        cond2: certify_log_le(&st.max_node_height(), &xn),
        node_height,
        eps_bound: Verdict::from_bool(eps.abs() <= Rat::pow4_neg(n - 1)),
    }
}

fn attach_ledger(st: &mut ConstructionState, ledger: StepLedger) -> &StepRecord {
    let rec = st.records.last_mut().expect("a step was taken");
    rec.ledger = Some(ledger);
    rec
}

/// Odd step with height certificates; the node satisfies `H(x_a) <= m+1`.
pub fn step_odd_h<'a>(
    st: &'a mut ConstructionState,
    sched: &HeightSchedule,
) -> Result<&'a StepRecord> {
    st.step_odd()?;
    let n = st.m;
    let x_a = st.nodes.last().expect("node added");
    let nh = Verdict::from_bool(*x_a.value().height_ref() <= Natural::from(n));
    let ledger = step_ledger(st, sched, nh);
    Ok(attach_ledger(st, ledger))
}

/// Which side of `x̄` the node goes: below when `x̄` lies right of the
/// midpoint of the gap between its neighbouring nodes, above otherwise.
fn choose_side(st: &ConstructionState, y: &UnitRat) -> Side {
    // nodes left of x̄ are exactly those whose value is below y
    let mut left: Option<(&UnitRat, &UnitRat)> = None;
    let mut right: Option<(&UnitRat, &UnitRat)> = None;
    for (x, v) in st.nodes.iter().zip(&st.values) {
        if v < y {
            if left.is_none_or(|(_, lv)| v > lv) {
                left = Some((x, v));
            }
        } else if right.is_none_or(|(_, rv)| v < rv) {
            right = Some((x, v));
        }
    }
    let (a_t, a_t1) = (left.expect("0 is a node").0, right.expect("1 is a node").0);
    let mid = a_t.value().midpoint(a_t1.value());
    if st.f_m().eval_cmp(&mid, y.value()) != std::cmp::Ordering::Greater {
        Side::Below
    } else {
        Side::Above
    }
}

/// Even step on the grid `M = 2(m+1) 4^m 2^e`: bisect to width below
/// `1/(2M)`, take the grid point on the chosen side, and set
/// `ε = (m+1) (y_b - f_m(z)) / ∏ (z - x_{j_k})`.
pub fn step_even_h<'a>(
    st: &'a mut ConstructionState,
    sched: &HeightSchedule,
    policy: GridPolicy,
    budget: u64,
) -> Result<&'a StepRecord> {
    let m = st.m;
    let n = m + 1;
    let e_max = sched.majorant_exponent(m);
    if policy == GridPolicy::Literal && e_max > budget {
        return Err(Error::ScheduleOverflow {
            step: n,
            exponent: e_max.to_string(),
            budget,
        });
    }
    let (b, y_b, mut bis) = st.even_target()?;
    let side = choose_side(st, &y_b);
    let bound = Rat::pow4_neg(m);
    let mut accepted = None;
    for e in grid_exponents(policy, &e_max) {
        if e > budget {
            return Err(Error::ScheduleOverflow {
                step: n,
                exponent: e.to_string(),
                budget,
            });
        }
        let e = u64::try_from(&e).expect("within budget");
        let grid = grid_size(m, e);
        let k = (&grid << 1u64).significant_bits();
        bis.refine_to(k);
        let z = match bis.bracket() {
            Bracket::Hit(x) => bounded_rational_near(x, x, &grid, side)?,
            Bracket::Dyadic { n: num, k: kk } => {
                bounded_rational_near_dyadic(num, *kk, &grid, side)
            }
        };
        if st.is_node(&z) {
            if policy == GridPolicy::Literal {
                return Err(Error::Invariant {
                    step: n,
                    what: "grid point coincides with a node".into(),
                });
            }
            continue;
        }
        let eps = st.even_eps(&z, &y_b);
        if eps.abs() > bound {
            if policy == GridPolicy::Literal {
                return Err(Error::Invariant {
                    step: n,
                    what: "grid point too far from the preimage".into(),
                });
            }
            continue;
        }
        accepted = Some((z, eps, e, k, grid));
        break;
    }
    let (z, eps, e, k, grid) = accepted.ok_or(Error::Invariant {
        step: n,
        what: "no grid exponent up to the majorant works".into(),
    })?;
    st.b_seq.push(b);
    let aux = StepAux {
        b: Some(b),
        bits: Some(k),
        grid_exponent: Some(e),
        side: Some(side),
        ..StepAux::default()
    };
    let nh = Verdict::from_bool(*z.value().height_ref() <= grid);
    let j = index_if_small(&z);
    st.commit(StepKind::Even, j, z, eps, y_b, aux, None)?;
    let ledger = step_ledger(st, sched, nh);
    Ok(attach_ledger(st, ledger))
}

pub(crate) const HEIGHTS_NOTES: &[&str] = &[
    "exp(13 m X(m)) in the grid bound is replaced by the integer majorant 2^ceil(13 m X(m) / ln 2)",
    "the even-step node is the grid point floor(M x)/M or ceil(M x)/M on the chosen side",
];

pub fn schedule_of(config: &Config) -> Result<HeightSchedule> {
    match config.schedule {
        Some(ScheduleKind::Scaled { c: 0 }) => {
            Err(Error::Config("scaled schedule needs c >= 1".into()))
        }
        Some(kind) => Ok(HeightSchedule { kind }),
        None => Err(Error::Config("heights mode needs a schedule".into())),
    }
}

/// Runs the height-bounded construction through step `depth`.
pub fn run_heights(config: &Config) -> Result<(ConstructionState, Trace)> {
    if config.mode != Mode::Heights {
        return Err(Error::Config("run_heights needs mode heights".into()));
    }
    let sched = schedule_of(config)?;
    let policy = config.grid_policy().expect("schedule present");
    let depth = config
        .depth
        .ok_or_else(|| Error::Config("heights mode needs a depth".into()))?;
    if depth < 3 {
        return Err(Error::Config("depth must be at least 3".into()));
    }
    let mut st = init_basic(config.y_enum, config.avoid.clone())?;
    for rec in st.records.iter_mut().skip(1) {
        // seeds: ε_1/1 = 1 and ε_2/2 = 0 have denominator 1
        rec.ledger = Some(StepLedger {
            cond1: Verdict::Pass,
            cond2: certify_log_le(rec.node.value().height_ref(), &sched.x_of(rec.m)),
            node_height: Verdict::Pass,
            eps_bound: Verdict::Pass,
        });
    }
    while st.m < depth {
        if (st.m + 1) % 2 == 1 {
            step_odd_h(&mut st, &sched)?;
        } else {
            step_even_h(&mut st, &sched, policy, config.exponent_budget)?;
        }
    }
    let mut notes: Vec<String> = BASIC_NOTES.iter().map(|s| s.to_string()).collect();
    notes.extend(HEIGHTS_NOTES.iter().map(|s| s.to_string()));
    if policy == GridPolicy::Adaptive {
        notes.push(
            "scaled schedule: grid exponent is the least of 0, 1, 2, 4, ... (capped at 13 m X(m)) passing the exact checks"
                .into(),
        );
    }
    let trace = Trace {
        version: TRACE_VERSION,
        mode: Mode::Heights,
        config: config.clone(),
        seed_repair: Some(st.seed_repair()),
        notes,
        schedule: Some(ScheduleDesc {
            kind: sched.kind,
            exponent_budget: config.exponent_budget,
            grid_policy: policy,
        }),
        steps: st.records.clone(),
        stages: Vec::new(),
    };
    Ok((st, trace))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub check: String,
    pub location: u64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightLedger {
    pub entries: Vec<LedgerEntry>,
}

impl HeightLedger {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.verdict.is_pass())
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.entries.iter().filter(|e| e.verdict == v).count()
    }
}

/// Recomputes every height certificate of a heights trace from its records.
pub fn check_height_ledger(
    steps: &[StepRecord],
    sched: &HeightSchedule,
    exec: Exec,
) -> HeightLedger {
    let mut entries = Vec::new();
    let depth = steps.last().map_or(0, |s| s.m);
    let mut max_h = Natural::from(1u32);
    for s in steps {
        let n = s.m;
        max_h = max_h.max(s.node.value().height_ref().clone());
        let xn = sched.x_of(n);
        if let Some(eps) = &s.eps {
            let scaled = eps / &Rat::int(n as i64);
            entries.push(LedgerEntry {
                check: "cond1".into(),
                location: n,
                verdict: certify_h_le(&scaled, &(Natural::from(n) * &xn)),
            });
        }
        entries.push(LedgerEntry {
            check: "cond2".into(),
            location: n,
            verdict: certify_log_le(&max_h, &xn),
        });
        if let (StepKind::Even, Some(e)) = (s.kind, s.aux.grid_exponent) {
            let m = n - 1;
            let grid = grid_size(m, e);
            entries.push(LedgerEntry {
                check: "grid_height".into(),
                location: n,
                verdict: Verdict::from_bool(*s.node.value().height_ref() <= grid),
            });
            let e_max = sched.majorant_exponent(m);
            entries.push(LedgerEntry {
                check: "grid_within_majorant".into(),
                location: n,
                verdict: Verdict::from_bool(e <= e_max),
            });
        }
    }
    for n in 1..=depth {
        entries.push(LedgerEntry {
            check: "superadditive".into(),
            location: n,
            verdict: Verdict::from_bool(sched.superadditive_at(n)),
        });
    }
    // per-node bounds are independent of each other
    let per_node = exec.map(steps, |s| {
        let k = s.m;
        let h = s.node.value().height_ref();
        let h2 = h * h;
        let t = if h2 > FINAL_T_CAP {
            FINAL_T_CAP
        } else {
            u64::try_from(&h2).expect("small")
        };
        let d = s.value.value().denom();
        let mut fin = certify_log_le(d, &sched.b_of(t));
        if t == FINAL_T_CAP && fin != Verdict::Pass {
            fin = Verdict::Marginal;
        }
        let chain = if k == 0 {
            Verdict::from_bool(*s.value.value().height_ref() == 1u32)
        } else {
            certify_log_le_scaled(
                s.value.value().height_ref(),
                h,
                k,
                &(Natural::from(3 * k) * sched.x_of(k)),
            )
        };
        let index = Verdict::from_bool(k <= h2);
        [
            LedgerEntry {
                check: "final_bound".into(),
                location: k,
                verdict: fin,
            },
            LedgerEntry {
                check: "chain_bound".into(),
                location: k,
                verdict: chain,
            },
            LedgerEntry {
                check: "index_bound".into(),
                location: k,
                verdict: index,
            },
        ]
    });
    entries.extend(per_node.into_iter().flatten());
    HeightLedger { entries }
}
