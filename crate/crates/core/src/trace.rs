//! The serialized record of a construction run. Every rational is a
//! `"num/den"` string; a trace plus its embedded config is enough for the
//! verifier to replay the run bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::avoid::{AvoidFamily, AvoidWitness};
use crate::bounds::SlowFunction;
use crate::error::{Error, Result};
use crate::lex::{EnumKind, Side};
use crate::pila::apply_stage;
use crate::poly::Poly;
use crate::rat::{Rat, UnitRat, Verdict};

pub const TRACE_VERSION: u32 = 1;

/// Default cap on the exponent `e` of the grid size `2(m+1) 4^m 2^e`.
pub const DEFAULT_EXPONENT_BUDGET: u64 = 1 << 30;

/// Default cap on `|Q_n|` in pila mode.
pub const DEFAULT_NODE_LIMIT: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Basic,
    Heights,
    Pila,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Basic => "basic",
            Mode::Heights => "heights",
            Mode::Pila => "pila",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScheduleKind {
    /// `X(t) = 48^t (t-1)!`
    Strict,
    /// `X(t) = c^t (t-1)!`
    Scaled { c: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridPolicy {
    /// Grid exponent exactly `13 m X(m)`.
    Literal,
    /// Least exponent in `0, 1, 2, 4, ...` (capped at `13 m X(m)`) whose
    /// grid point passes every exact check.
    Adaptive,
}

/// Everything that determines a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<u64>,
    #[serde(default)]
    pub y_enum: EnumKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleKind>,
    #[serde(default = "default_budget")]
    pub exponent_budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slow: Option<SlowFunction>,
    #[serde(default = "default_node_limit")]
    pub node_limit: u64,
    pub avoid: AvoidFamily,
}

fn default_budget() -> u64 {
    DEFAULT_EXPONENT_BUDGET
}

fn default_node_limit() -> u64 {
    DEFAULT_NODE_LIMIT
}

impl Config {
    pub fn basic(depth: u64, avoid: AvoidFamily) -> Self {
        Config {
            mode: Mode::Basic,
            depth: Some(depth),
            stages: None,
            y_enum: EnumKind::Lex,
            schedule: None,
            exponent_budget: DEFAULT_EXPONENT_BUDGET,
            slow: None,
            node_limit: DEFAULT_NODE_LIMIT,
            avoid,
        }
    }

    pub fn heights(depth: u64, schedule: ScheduleKind, avoid: AvoidFamily) -> Self {
        Config {
            mode: Mode::Heights,
            schedule: Some(schedule),
            ..Config::basic(depth, avoid)
        }
    }

    pub fn pila(stages: u64, slow: SlowFunction, avoid: AvoidFamily) -> Self {
        Config {
            mode: Mode::Pila,
            depth: None,
            stages: Some(stages),
            slow: Some(slow),
            ..Config::basic(0, avoid)
        }
    }

    pub fn grid_policy(&self) -> Option<GridPolicy> {
        match self.schedule? {
            ScheduleKind::Strict => Some(GridPolicy::Literal),
            ScheduleKind::Scaled { .. } => Some(GridPolicy::Adaptive),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Seed,
    Odd,
    Even,
}

/// Choices made inside a step, enough to explain (and replay) it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepAux {
    /// Odd steps: index of the new domain point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    /// Odd steps: `ε = s / ((m+2) 4^m)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
    /// Even steps: index of the target value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<u64>,
    /// Even steps: the bracket `[n/2^bits, (n+1)/2^bits]` the node came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u64>,
    /// Heights even steps: grid size `2(m+1) 4^m 2^e`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_exponent: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
}

/// Height certificates attached to a heights-mode step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepLedger {
    /// `h(ε_n / n) <= n X(n)`
    pub cond1: Verdict,
    /// `h(x_{j_k}) <= X(n)` for every `k <= n`
    pub cond2: Verdict,
    /// `H(x_a) <= n` on odd steps, `H(z) <= M` on even steps
    pub node_height: Verdict,
    /// `|ε_n| <= 4^(1-n)`
    pub eps_bound: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub m: u64,
    pub kind: StepKind,
    /// Enumeration index of the node; `null` when its height exceeds the
    /// range where the index is computed.
    pub j: Option<u64>,
    pub node: UnitRat,
    /// `ε_m`; absent for the first seed, which has no correction term.
    pub eps: Option<Rat>,
    pub value: UnitRat,
    pub aux: StepAux,
    pub avoid_witness: Option<AvoidWitness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger: Option<StepLedger>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageCase {
    /// `y_n` is already a value of `f_n` on `Q_n`.
    Hit,
    /// `y_n` gets a new preimage near `f_n^{-1}(y_n)`.
    Fresh,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub n: u64,
    pub t_n: u64,
    pub q_size: u64,
    /// `H(f_n(x)) <= b_n H(x)^(d_n)`, as a decimal string.
    pub b_n: String,
    pub d_n: u64,
    pub y_n: UnitRat,
    pub z_n: UnitRat,
    pub eps_n: Rat,
    pub case: StageCase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<UnitRat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u64>,
    pub avoid_witness: Option<AvoidWitness>,
    pub c_f: u64,
    pub s_upper: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRepair {
    pub j2: u64,
    pub y2: UnitRat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDesc {
    pub kind: ScheduleKind,
    pub exponent_budget: u64,
    pub grid_policy: GridPolicy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub version: u32,
    pub mode: Mode,
    pub config: Config,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_repair: Option<SeedRepair>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageRecord>,
}

impl Trace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Trace = serde_json::from_str(text).map_err(|e| Error::Trace(e.to_string()))?;
        if t.version != TRACE_VERSION {
            return Err(Error::Trace(format!("unsupported version {}", t.version)));
        }
        if t.mode != t.config.mode {
            return Err(Error::Trace("header mode differs from config mode".into()));
        }
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::Trace(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Trace(format!("{}: {e}", path.display())))?;
        Trace::from_json(&text)
    }

    /// Assigned `(x, f(x))` pairs in construction order.
    pub fn assigned_pairs(&self) -> Vec<(UnitRat, UnitRat)> {
        if self.mode == Mode::Pila {
            return self
                .stages
                .iter()
                .map(|s| (s.z_n.clone(), s.y_n.clone()))
                .collect();
        }
        self.steps
            .iter()
            .map(|s| (s.node.clone(), s.value.clone()))
            .collect()
    }

    /// `f_n` rebuilt from the recorded nodes and `ε` of a basic or heights
    /// trace, without replaying any choice.
    pub fn partial_sum(&self, n: u64) -> Result<Poly> {
        if self.mode == Mode::Pila {
            return Err(Error::Config("partial sums need a step trace".into()));
        }
        let depth = self.steps.last().map_or(0, |s| s.m);
        if n > depth {
            return Err(Error::StageTooShallow {
                requested: n,
                available: depth,
            });
        }
        let mut f = Poly::zero();
        let mut prod = Poly::one();
        for s in &self.steps[..=n as usize] {
            if let Some(eps) = &s.eps {
                if !eps.is_zero() {
                    f = f.add(&prod.scale(&(eps / &Rat::int(s.m as i64))));
                }
            }
            prod = prod.mul_linear(s.node.value());
        }
        Ok(f)
    }

    /// The last polynomial `f_(N+1)` of a pila trace.
    pub fn pila_poly(&self) -> Poly {
        let mut f = Poly::x();
        for (i, rec) in self.stages.iter().enumerate() {
            let zs: Vec<UnitRat> = self.stages[..i].iter().map(|s| s.z_n.clone()).collect();
            f = apply_stage(&f, rec, &zs);
        }
        f
    }

    /// `f(q)` when `q` is an assigned node of a basic or heights trace.
    pub fn f_exact_at(&self, q: &UnitRat) -> Option<Rat> {
        self.steps
            .iter()
            .find(|s| &s.node == q)
            .map(|s| s.value.value().clone())
    }
}
