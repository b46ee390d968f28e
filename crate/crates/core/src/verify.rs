//! Replay and certification of traces, plus the enumeration asymptotics
//! suite.

use std::collections::HashSet;

use malachite_base::num::arithmetic::traits::Pow;
use malachite_nz::natural::Natural;
use serde::{Deserialize, Serialize};

use crate::basic::{run_basic, ConstructionState};
use crate::bounds::{pi_bounds, sqrt_bounds};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::heights::{check_height_ledger, run_heights, schedule_of};
use crate::lex::{totients, EnumKind, Enumeration};
use crate::pila::{
    apply_stage, count_cf_poly, eps_bound, farey_sequence, poly_height_coeff, run_pila,
};
use crate::poly::Poly;
use crate::rat::{Rat, UnitRat, Verdict};
use crate::trace::{Mode, StageRecord, StepKind, StepRecord, Trace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub check: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<u64>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub marginal: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub mode: Mode,
    pub entries: Vec<CheckEntry>,
    pub summary: Summary,
}

impl VerifyReport {
    fn new(mode: Mode, entries: Vec<CheckEntry>) -> Self {
        let count = |v| entries.iter().filter(|e| e.verdict == v).count();
        let summary = Summary {
            pass: count(Verdict::Pass),
            fail: count(Verdict::Fail),
            marginal: count(Verdict::Marginal),
        };
        VerifyReport {
            mode,
            entries,
            summary,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.fail == 0 && self.summary.marginal == 0
    }

    /// Entries with the given check id.
    pub fn check(&self, id: &str) -> impl Iterator<Item = &CheckEntry> {
        let id = id.to_string();
        self.entries.iter().filter(move |e| e.check == id)
    }

    /// True when every entry with the given id passes and there is one.
    pub fn check_passes(&self, id: &str) -> bool {
        let mut any = false;
        for e in self.check(id) {
            any = true;
            if !e.verdict.is_pass() {
                return false;
            }
        }
        any
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn entry(check: &str, location: Option<u64>, ok: bool) -> CheckEntry {
    CheckEntry {
        check: check.into(),
        location,
        verdict: Verdict::from_bool(ok),
        detail: None,
    }
}

fn entry_detail(check: &str, location: Option<u64>, ok: bool, detail: String) -> CheckEntry {
    CheckEntry {
        detail: Some(detail),
        ..entry(check, location, ok)
    }
}

fn first_step_divergence(
    recorded: &[StepRecord],
    replayed: &[StepRecord],
) -> Option<(u64, String)> {
    for (a, b) in recorded.iter().zip(replayed) {
        if a != b {
            let what = if a.node != b.node {
                "node"
            } else if a.eps != b.eps {
                "eps"
            } else if a.value != b.value {
                "value"
            } else {
                "step record"
            };
            return Some((b.m, format!("{what} differs from the replay")));
        }
    }
    if recorded.len() != replayed.len() {
        let at = recorded.len().min(replayed.len()) as u64;
        return Some((at, "step count differs from the replay".into()));
    }
    None
}

fn first_stage_divergence(
    recorded: &[StageRecord],
    replayed: &[StageRecord],
) -> Option<(u64, String)> {
    for (a, b) in recorded.iter().zip(replayed) {
        if a != b {
            return Some((b.n, "stage record differs from the replay".into()));
        }
    }
    if recorded.len() != replayed.len() {
        let at = recorded.len().min(replayed.len()) as u64;
        return Some((at, "stage count differs from the replay".into()));
    }
    None
}

/// Replays the run recorded in `trace` and re-checks every property of
/// its mode in exact arithmetic.
pub fn verify_trace(trace: &Trace, exec: Exec) -> Result<VerifyReport> {
    if trace.mode != trace.config.mode {
        return Err(Error::Trace("header mode differs from config mode".into()));
    }
    match trace.mode {
        Mode::Basic | Mode::Heights => verify_steps(trace, exec),
        Mode::Pila => verify_stages(trace, exec),
    }
}

fn verify_steps(trace: &Trace, exec: Exec) -> Result<VerifyReport> {
    let (st, replay) = if trace.mode == Mode::Basic {
        run_basic(&trace.config)?
    } else {
        run_heights(&trace.config)?
    };
    if let Some((step, what)) = first_step_divergence(&trace.steps, &replay.steps) {
        return Err(Error::ReplayDivergence { step, what });
    }
    if trace.seed_repair != replay.seed_repair {
        return Err(Error::ReplayDivergence {
            step: 2,
            what: "seed repair differs from the replay".into(),
        });
    }
    let mut entries = step_checks(&st, &trace.steps, trace, exec);
    if trace.mode == Mode::Heights {
        let sched = schedule_of(&trace.config)?;
        let ledger = check_height_ledger(&trace.steps, &sched, exec);
        entries.extend(ledger.entries.into_iter().map(|e| CheckEntry {
            check: format!("heights.{}", e.check),
            location: Some(e.location),
            verdict: e.verdict,
            detail: None,
        }));
    }
    Ok(VerifyReport::new(trace.mode, entries))
}

fn step_checks(
    st: &ConstructionState,
    steps: &[StepRecord],
    trace: &Trace,
    exec: Exec,
) -> Vec<CheckEntry> {
    let mut out = Vec::new();
    let depth = st.m;
    let f = st.f_m();

    // ε_1 = 1, ε_2 = 0, |ε_n| <= 4^(1-n) afterwards
    for s in steps.iter().skip(1) {
        let eps = s.eps.as_ref().expect("only the first seed has no eps");
        let ok = match s.m {
            1 => *eps == Rat::one(),
            2 => eps.is_zero(),
            n => eps.abs() <= Rat::pow4_neg(n - 1),
        };
        out.push(entry("eps_discipline", Some(s.m), ok));
    }

    // p_n = f_n - f_(n-1) vanishes at every earlier node; f_n agrees with
    // the recorded value at every node assigned so far
    let ns: Vec<u64> = (1..=depth).collect();
    let per_n = exec.map(&ns, |&n| {
        let n = n as usize;
        let p_n = st.partials[n].sub(&st.partials[n - 1]);
        let vanish = (0..n).all(|m| p_n.eval_eq(st.nodes[m].value(), &Rat::zero()));
        let stable =
            (0..=n).all(|k| st.partials[n].eval_eq(st.nodes[k].value(), st.values[k].value()));
        (vanish, stable)
    });
    for (n, (vanish, stable)) in ns.iter().zip(per_n) {
        out.push(entry("vanishing", Some(*n), vanish));
        out.push(entry("prefix_stability", Some(*n), stable));
    }

    let nodes: HashSet<&UnitRat> = st.nodes.iter().collect();
    let values: HashSet<&UnitRat> = st.values.iter().collect();
    out.push(entry(
        "injective_nodes",
        None,
        nodes.len() == st.nodes.len(),
    ));
    out.push(entry(
        "injective_values",
        None,
        values.len() == st.values.len(),
    ));

    // each odd step takes the least unassigned domain point and each even
    // step the least unassigned target, so the prefixes grow by one per step
    let odd = steps.iter().filter(|s| s.kind == StepKind::Odd).count() as u64;
    let even = steps.iter().filter(|s| s.kind == StepKind::Even).count() as u64;
    let mut xe = Enumeration::new(EnumKind::Lex);
    let dom_prefix = (0..).take_while(|&i| nodes.contains(xe.get(i))).count() as u64;
    let mut ye = Enumeration::new(trace.config.y_enum);
    let rng_prefix = (0..).take_while(|&i| values.contains(ye.get(i))).count() as u64;
    out.push(entry_detail(
        "coverage_domain",
        None,
        dom_prefix >= odd + 2,
        format!(
            "x_0..x_{} assigned after {odd} odd steps",
            dom_prefix.saturating_sub(1)
        ),
    ));
    out.push(entry_detail(
        "coverage_range",
        None,
        rng_prefix >= even + 2,
        format!(
            "y_0..y_{} attained after {even} even steps",
            rng_prefix.saturating_sub(1)
        ),
    ));
    let bs: Vec<u64> = steps.iter().filter_map(|s| s.aux.b).collect();
    out.push(entry(
        "b_increasing",
        None,
        bs.windows(2).all(|w| w[0] < w[1]),
    ));

    // sup |p_n'| <= min(coefficient bound, |ε_n|) for n >= 2
    let lower = (2..=depth as usize).fold(Rat::one(), |acc, n| {
        let p_n = st.partials[n].sub(&st.partials[n - 1]);
        let coef = p_n.derivative().sup_abs_bound_unit();
        let eps = st.eps_seq[n - 1].abs();
        &acc - &coef.min(eps)
    });
    out.push(entry_detail(
        "monotonicity",
        Some(depth),
        lower >= Rat::new(2, 3),
        format!("f' >= {lower} on [0, 1]"),
    ));
    out.push(entry(
        "endpoints",
        Some(depth),
        f.eval_eq(&Rat::zero(), &Rat::zero()) && f.eval_eq(&Rat::one(), &Rat::one()),
    ));

    let family = &trace.config.avoid;
    let mut ordinal = 0u64;
    for s in steps {
        if s.kind != StepKind::Odd {
            continue;
        }
        if (ordinal as usize) < family.len() {
            let ok = match &s.avoid_witness {
                Some(w) => {
                    w.g == ordinal && w.holds(family) && f.eval_eq(w.point.value(), &w.f_value)
                }
                None => false,
            };
            out.push(entry("avoid_witness", Some(s.m), ok));
        }
        ordinal += 1;
    }
    out
}

fn verify_stages(trace: &Trace, exec: Exec) -> Result<VerifyReport> {
    let (st, replay) = run_pila(&trace.config)?;
    if let Some((step, what)) = first_stage_divergence(&trace.stages, &replay.stages) {
        return Err(Error::ReplayDivergence { step, what });
    }
    let stages = &trace.stages;
    let slow = trace.config.slow.clone().unwrap_or_default();
    let mut polys = vec![Poly::x()];
    for (i, rec) in stages.iter().enumerate() {
        let zs: Vec<UnitRat> = stages[..i].iter().map(|s| s.z_n.clone()).collect();
        let next = apply_stage(&polys[i], rec, &zs);
        polys.push(next);
    }
    let fin = polys.last().expect("f_0 is present");
    let mut out = vec![entry("replay_function", None, fin == &st.f)];

    let mut lower = Rat::one();
    for (i, rec) in stages.iter().enumerate() {
        let n = Some(rec.n);
        let f_n = &polys[i];
        let (b, d) = poly_height_coeff(f_n);
        out.push(entry(
            "height_coeff",
            n,
            b.to_string() == rec.b_n && d == rec.d_n,
        ));
        let ok = farey_sequence(30)
            .iter()
            .all(|q| *f_n.eval(q.value()).height_ref() <= &b * &q.value().height().pow(d));
        out.push(entry("height_coeff_bound", n, ok));
        let t_ok = rec.t_n > b && (i == 0 || rec.t_n >= stages[i - 1].t_n + rec.n);
        out.push(entry("threshold", n, t_ok));

        let count = count_cf_poly(f_n, rec.t_n, exec);
        let demand = slow.demand(rec.t_n);
        out.push(entry_detail(
            "counting",
            n,
            count == rec.c_f && count >= demand,
            format!("C_f({}) = {count}, demand {demand}", rec.t_n),
        ));

        // freeze: 100 spread points of height <= T_n keep their value in
        // every later stage
        let pts = farey_sequence(rec.t_n);
        let stride = (pts.len() / 100).max(1);
        let sample: Vec<&UnitRat> = pts.iter().step_by(stride).take(100).collect();
        let frozen = sample.iter().all(|q| {
            let v = f_n.eval(q.value());
            polys[i + 1..].iter().all(|g| g.eval_eq(q.value(), &v))
        });
        out.push(entry_detail(
            "freeze",
            n,
            frozen,
            format!("{} points", sample.len()),
        ));

        out.push(entry(
            "eps_bound",
            n,
            rec.eps_n.abs() <= eps_bound(rec.q_size),
        ));
        lower = &lower - &(&rec.eps_n.abs() * &Rat::int(rec.q_size as i64));
        out.push(entry(
            "surjectivity",
            n,
            polys[i + 1].eval_eq(rec.z_n.value(), rec.y_n.value())
                && fin.eval_eq(rec.z_n.value(), rec.y_n.value()),
        ));
        if trace.config.avoid.get(rec.n).is_some() {
            let ok = match &rec.avoid_witness {
                Some(w) => {
                    w.g == rec.n
                        && w.holds(&trace.config.avoid)
                        && fin.eval_eq(w.point.value(), &w.f_value)
                }
                None => false,
            };
            out.push(entry("avoid_witness", n, ok));
        }
    }
    let zs: HashSet<&UnitRat> = stages.iter().map(|s| &s.z_n).collect();
    out.push(entry("distinct_z", None, zs.len() == stages.len()));
    out.push(entry_detail(
        "monotonicity",
        None,
        lower >= Rat::new(2, 3),
        format!("f' >= {lower} on [0, 1]"),
    ));
    out.push(entry(
        "endpoints",
        None,
        fin.eval_eq(&Rat::zero(), &Rat::zero()) && fin.eval_eq(&Rat::one(), &Rat::one()),
    ));
    Ok(VerifyReport::new(Mode::Pila, out))
}

/// `H(x_n)` for `n <= n_max` in the height-then-value enumeration, from
/// cumulative Farey counts.
pub struct HeightTable {
    /// `cum[h] = #{q : H(q) <= h}`.
    cum: Vec<u64>,
}

impl HeightTable {
    pub fn new(n_max: u64) -> Self {
        let mut size = 64usize;
        loop {
            let phi = totients(size);
            let mut cum = vec![0u64; size + 1];
            cum[1] = 2;
            for h in 2..=size {
                cum[h] = cum[h - 1] + u64::from(phi[h]);
            }
            if cum[size] > n_max {
                return HeightTable { cum };
            }
            size *= 2;
        }
    }

    pub fn height(&self, n: u64) -> u64 {
        self.cum.partition_point(|&c| c <= n) as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub n_max: u64,
    /// `H(x_n)^2 >= 2n` for every `2 <= n <= n_max`.
    pub scan: Verdict,
    pub first_failure: Option<u64>,
    pub height_at_max: u64,
    /// Interval for `H(x_{n_max}) √3 / (π √n_max)`.
    pub ratio_lo: Rat,
    pub ratio_hi: Rat,
    /// `|ratio - 1| < tolerance`.
    pub ratio: Verdict,
    pub tolerance: Rat,
}

impl AsymptoticReport {
    pub fn all_pass(&self) -> bool {
        self.scan.is_pass() && self.ratio.is_pass()
    }
}

pub const RATIO_TOLERANCE: (i64, i64) = (2, 100);
const INTERVAL_BITS: u64 = 64;

pub fn asymptotic_suite(n_max: u64, exec: Exec) -> AsymptoticReport {
    assert!(n_max >= 10, "n_max must be at least 10");
    let table = HeightTable::new(n_max);
    let first_failure = exec.first_failure(2..n_max + 1, |n| {
        let h = table.height(n) as u128;
        h * h >= 2 * n as u128
    });
    let h = table.height(n_max);
    let (pi_lo, pi_hi) = pi_bounds(INTERVAL_BITS);
    let (s3_lo, s3_hi) = sqrt_bounds(3, INTERVAL_BITS);
    let (sn_lo, sn_hi) = sqrt_bounds(n_max, INTERVAL_BITS);
    let hr = Rat::from(Natural::from(h));
    let ratio_lo = &(&hr * &s3_lo) / &(&pi_hi * &sn_hi);
    let ratio_hi = &(&hr * &s3_hi) / &(&pi_lo * &sn_lo);
    let tol = Rat::new(RATIO_TOLERANCE.0, RATIO_TOLERANCE.1);
    let lo_edge = &Rat::one() - &tol;
    let hi_edge = &Rat::one() + &tol;
    let ratio = if ratio_lo > lo_edge && ratio_hi < hi_edge {
        Verdict::Pass
    } else if ratio_hi <= lo_edge || ratio_lo >= hi_edge {
        Verdict::Fail
    } else {
        Verdict::Marginal
    };
    AsymptoticReport {
        n_max,
        scan: Verdict::from_bool(first_failure.is_none()),
        first_failure,
        height_at_max: h,
        ratio_lo,
        ratio_hi,
        ratio,
        tolerance: tol,
    }
}
