//! The back-and-forth construction: `f = Σ p_n` with
//! `p_n = (ε_n / n) ∏_{k<n} (x - x_{j_k})`. Odd steps pin the image of the
//! least unassigned domain point; even steps give the least unassigned
//! target value a preimage.

use std::collections::HashSet;

use malachite_base::num::logic::traits::SignificantBits;
use malachite_nz::natural::Natural;

use crate::avoid::{AvoidFamily, AvoidWitness};
use crate::error::{Error, Result};
use crate::lex::{lex_index, EnumKind, Enumeration, LEX_INDEX_MAX_HEIGHT};
use crate::poly::{Bisector, Bracket, Poly};
use crate::rat::{Rat, UnitRat};
use crate::trace::{Config, Mode, SeedRepair, StepAux, StepKind, StepRecord, Trace, TRACE_VERSION};

/// `∏ (x - node)` evaluated at one point.
pub fn node_diff_product<'a>(x: &Rat, nodes: impl IntoIterator<Item = &'a UnitRat>) -> Rat {
    nodes
        .into_iter()
        .fold(Rat::one(), |acc, n| &acc * &(x - n.value()))
}

/// Lexicographic index if the height is small enough to compute it.
pub fn index_if_small(z: &UnitRat) -> Option<u64> {
    if *z.value().height_ref() <= Natural::from(LEX_INDEX_MAX_HEIGHT) {
        lex_index(z).ok()
    } else {
        None
    }
}

#[derive(Clone, Debug)]
pub struct ConstructionState {
    /// Index of the last step taken.
    pub m: u64,
    pub j_seq: Vec<Option<u64>>,
    /// `ε_1, ε_2, ...`; `eps_seq[n - 1] = ε_n`.
    pub eps_seq: Vec<Rat>,
    pub nodes: Vec<UnitRat>,
    pub values: Vec<UnitRat>,
    /// `partials[n] = f_n`, with `f_0 = 0`.
    pub partials: Vec<Poly>,
    /// `prods[n] = ∏_{k<n} (x - x_{j_k})`.
    pub prods: Vec<Poly>,
    /// Target indices chosen by the even steps, in order.
    pub b_seq: Vec<u64>,
    pub records: Vec<StepRecord>,
    /// `1 - Σ_{n>=2} |ε_n|`, a lower bound for `f_m'` on `[0, 1]`.
    pub deriv_lower: Rat,
    pub avoid: AvoidFamily,
    node_set: HashSet<UnitRat>,
    value_set: HashSet<UnitRat>,
    x_enum: Enumeration,
    y_enum: Enumeration,
    a_cursor: u64,
    y_cursor: u64,
    odd_ordinal: u64,
}

impl ConstructionState {
    pub fn f_m(&self) -> &Poly {
        &self.partials[self.m as usize]
    }

    /// `∏_{k<=m} (x - x_{j_k})`, the factor of the next correction term.
    pub fn next_prod(&self) -> &Poly {
        &self.prods[self.m as usize + 1]
    }

    pub fn is_node(&self, q: &UnitRat) -> bool {
        self.node_set.contains(q)
    }

    pub fn is_value(&self, q: &UnitRat) -> bool {
        self.value_set.contains(q)
    }

    /// `f(q)` for an assigned node, `None` otherwise.
    pub fn f_exact_at(&self, q: &UnitRat) -> Option<&UnitRat> {
        self.nodes
            .iter()
            .position(|n| n == q)
            .map(|i| &self.values[i])
    }

    pub fn max_node_height(&self) -> Natural {
        self.nodes
            .iter()
            .map(|n| n.value().height_ref())
            .max()
            .cloned()
            .unwrap_or(Natural::from(1u32))
    }

    fn next_x_index(&mut self) -> u64 {
        while self.node_set.contains(self.x_enum.get(self.a_cursor)) {
            self.a_cursor += 1;
        }
        self.a_cursor
    }

    fn next_y_index(&mut self) -> u64 {
        while self.value_set.contains(self.y_enum.get(self.y_cursor)) {
            self.y_cursor += 1;
        }
        self.y_cursor
    }

    pub fn x_at(&mut self, i: u64) -> UnitRat {
        self.x_enum.get(i).clone()
    }

    pub fn y_at(&mut self, i: u64) -> UnitRat {
        self.y_enum.get(i).clone()
    }

    /// Appends step `m + 1` with `p_{m+1} = (ε / (m+1)) ∏_{k<=m} (x - x_{j_k})`.
    pub(crate) fn commit(
        &mut self,
        kind: StepKind,
        j: Option<u64>,
        node: UnitRat,
        eps: Rat,
        value: UnitRat,
        aux: StepAux,
        avoid_witness: Option<AvoidWitness>,
    ) -> Result<&StepRecord> {
        let n = self.m + 1;
        if self.node_set.contains(&node) {
            return Err(Error::DuplicateNode(node.to_string()));
        }
        if self.value_set.contains(&value) {
            return Err(Error::Invariant {
                step: n,
                what: format!("value {value} assigned twice"),
            });
        }
        let prod = self.next_prod().clone();
        let f_next = if eps.is_zero() {
            self.f_m().clone()
        } else {
            self.f_m().add(&prod.scale(&(&eps / &Rat::int(n as i64))))
        };
        self.prods.push(prod.mul_linear(node.value()));
        self.partials.push(f_next);
        self.deriv_lower = &self.deriv_lower - &eps.abs();
        self.eps_seq.push(eps.clone());
        self.j_seq.push(j);
        self.node_set.insert(node.clone());
        self.value_set.insert(value.clone());
        self.nodes.push(node.clone());
        self.values.push(value.clone());
        self.m = n;
        self.records.push(StepRecord {
            m: n,
            kind,
            j,
            node,
            eps: Some(eps),
            value,
            aux,
            avoid_witness,
            ledger: None,
        });
        Ok(self.records.last().expect("just pushed"))
    }

    /// Odd step `m + 1`: assign an image to the least unassigned domain point,
    /// trying `ε = s / ((m+2) 4^m)` for `s = 0, 1, ..., m+2`.
    pub fn step_odd(&mut self) -> Result<&StepRecord> {
        let m = self.m;
        let n = m + 1;
        assert!(n % 2 == 1 && n >= 3, "step {n} is not an odd step");
        let a = self.next_x_index();
        let x_a = self.x_at(a);
        let base = self.f_m().eval(x_a.value());
        let prodv = node_diff_product(x_a.value(), &self.nodes);
        let t = self.odd_ordinal;
        let g_val = self.avoid.eval(t, x_a.value());
        let unit = &Rat::from(Natural::from(m + 2)) * &Rat::pow4_neg(m).recip();
        let scale = &prodv / &(&unit * &Rat::int(n as i64));
        let mut chosen = None;
        for s in 0..=m + 2 {
            let z = &base + &(&scale * &Rat::int(s as i64));
            let z = UnitRat::new(z).map_err(|e| Error::Invariant {
                step: n,
                what: e.to_string(),
            })?;
            if self.value_set.contains(&z) || g_val.as_ref() == Some(z.value()) {
                continue;
            }
            chosen = Some((s, z));
            break;
        }
        let (s, z) = chosen.ok_or(Error::Invariant {
            step: n,
            what: "every candidate ε collides".into(),
        })?;
        let eps = &Rat::int(s as i64) / &unit;
        let witness = g_val.map(|g_value| AvoidWitness {
            g: t,
            point: x_a.clone(),
            f_value: z.value().clone(),
            g_value,
        });
        self.odd_ordinal += 1;
        let aux = StepAux {
            a: Some(a),
            s: Some(s),
            ..StepAux::default()
        };
        self.commit(StepKind::Odd, Some(a), x_a, eps, z, aux, witness)
    }

    /// The least unassigned target `(b, y_b)` and an exact bisector for
    /// `f_m(x) = y_b`.
    pub(crate) fn even_target(&mut self) -> Result<(u64, UnitRat, Bisector)> {
        let n = self.m + 1;
        if !self.deriv_lower.is_positive() {
            return Err(Error::Invariant {
                step: n,
                what: "monotonicity certificate lost".into(),
            });
        }
        let b = self.next_y_index();
        let y_b = self.y_at(b);
        let bis = Bisector::new_certified(self.f_m(), y_b.value())?;
        Ok((b, y_b, bis))
    }

    /// `ε = (m+1) (y - f_m(z)) / ∏_{k<=m} (z - x_{j_k})`.
    pub(crate) fn even_eps(&self, z: &UnitRat, y: &UnitRat) -> Rat {
        let n = self.m + 1;
        let num = y.value() - &self.f_m().eval(z.value());
        if num.is_zero() {
            return Rat::zero();
        }
        let den = node_diff_product(z.value(), &self.nodes);
        &(&num * &Rat::int(n as i64)) / &den
    }

    fn nearest_node_distance(&self, q: &Rat) -> Rat {
        self.nodes
            .iter()
            .map(|n| (q - n.value()).abs())
            .min()
            .expect("seeds are present")
    }

    /// Even step `m + 1`: bisect `f_m = y_b`, take the bracket endpoint
    /// farther from the existing nodes, and halve until
    /// `|ε| = (m+1) |h_m(z)| < 4^-m`.
    pub fn step_even(&mut self) -> Result<&StepRecord> {
        let m = self.m;
        let n = m + 1;
        assert!(
            n.is_multiple_of(2) && n >= 4,
            "step {n} is not an even step"
        );
        let (b, y_b, mut bis) = self.even_target()?;
        let bound = Rat::pow4_neg(m);
        let mut k = 2 * m + n.significant_bits() + 8;
        let (z, eps) = loop {
            bis.refine_to(k);
            let (lo, hi) = match bis.bracket() {
                Bracket::Hit(x) => {
                    let z = UnitRat::new(x.clone())?;
                    if self.is_node(&z) {
                        return Err(Error::Invariant {
                            step: n,
                            what: "target already attained at a node".into(),
                        });
                    }
                    break (z, Rat::zero());
                }
                Bracket::Dyadic { .. } => bis.bounds(),
            };
            let z = if self.nearest_node_distance(&hi) > self.nearest_node_distance(&lo) {
                hi
            } else {
                lo
            };
            let z = UnitRat::new(z)?;
            if self.is_node(&z) {
                k += 1;
                continue;
            }
            let eps = self.even_eps(&z, &y_b);
            let ratio = &eps.abs() / &bound;
            if ratio < Rat::one() {
                break (z, eps);
            }
            let excess = Natural::try_from(ratio.ceil()).expect("positive");
            k += excess.significant_bits().max(1);
        };
        self.b_seq.push(b);
        let aux = StepAux {
            b: Some(b),
            bits: Some(k),
            ..StepAux::default()
        };
        let j = index_if_small(&z);
        self.commit(StepKind::Even, j, z, eps, y_b, aux, None)
    }

    /// Number of odd steps taken so far.
    pub fn odd_steps(&self) -> u64 {
        self.odd_ordinal
    }
}

/// Seeds `x_0 = 0 -> 0`, `x_1 = 1 -> 1` (`ε_1 = 1`), and the repair step
/// `y_2 -> y_2` (`ε_2 = 0`) that gives `p_3` its third node.
pub fn init_basic(y_kind: EnumKind, avoid: AvoidFamily) -> Result<ConstructionState> {
    let mut x_enum = Enumeration::new(EnumKind::Lex);
    let mut y_enum = Enumeration::new(y_kind);
    for e in [&mut x_enum, &mut y_enum] {
        if *e.get(0) != UnitRat::zero() || *e.get(1) != UnitRat::one() {
            return Err(Error::BadEnumeration);
        }
    }
    let zero = Poly::zero();
    let mut st = ConstructionState {
        m: 0,
        j_seq: vec![Some(0)],
        eps_seq: Vec::new(),
        nodes: vec![UnitRat::zero()],
        values: vec![UnitRat::zero()],
        partials: vec![zero],
        prods: vec![Poly::one(), Poly::x()],
        b_seq: Vec::new(),
        records: vec![StepRecord {
            m: 0,
            kind: StepKind::Seed,
            j: Some(0),
            node: UnitRat::zero(),
            eps: None,
            value: UnitRat::zero(),
            aux: StepAux::default(),
            avoid_witness: None,
            ledger: None,
        }],
        deriv_lower: Rat::one(),
        avoid,
        node_set: HashSet::from([UnitRat::zero()]),
        value_set: HashSet::from([UnitRat::zero()]),
        x_enum,
        y_enum,
        a_cursor: 0,
        y_cursor: 0,
        odd_ordinal: 0,
    };
    // ε_1 = 1 is the leading term p_1 = x; it does not count against the
    // derivative bound
    st.commit(
        StepKind::Seed,
        Some(1),
        UnitRat::one(),
        Rat::one(),
        UnitRat::one(),
        StepAux::default(),
        None,
    )?;
    st.deriv_lower = Rat::one();
    // f_1 = x, so the preimage of y_2 is y_2 itself
    let b = st.next_y_index();
    let y2 = st.y_at(b);
    let j2 = lex_index(&y2)?;
    let aux = StepAux {
        b: Some(b),
        ..StepAux::default()
    };
    st.commit(
        StepKind::Seed,
        Some(j2),
        y2.clone(),
        Rat::zero(),
        y2,
        aux,
        None,
    )?;
    st.b_seq.push(b);
    Ok(st)
}

impl ConstructionState {
    pub fn seed_repair(&self) -> SeedRepair {
        SeedRepair {
            j2: self.j_seq[2].expect("seed index is small"),
            y2: self.nodes[2].clone(),
        }
    }
}

pub(crate) const BASIC_NOTES: &[&str] = &[
    "j_2 is defined by an even step at m+1 = 2: z = y_2, eps_2 = 0",
    "odd steps take eps = s/((m+2) 4^m) for the least admissible s",
    "avoid functions are consumed one per odd step, in order",
    "j is null when the node height exceeds 2^32",
];

/// Runs steps `3, 4, ..., depth`.
pub fn run_basic(config: &Config) -> Result<(ConstructionState, Trace)> {
    if config.mode != Mode::Basic {
        return Err(Error::Config("run_basic needs mode basic".into()));
    }
    let depth = config
        .depth
        .ok_or_else(|| Error::Config("basic mode needs a depth".into()))?;
    if depth < 3 {
        return Err(Error::Config("depth must be at least 3".into()));
    }
    let mut st = init_basic(config.y_enum, config.avoid.clone())?;
    while st.m < depth {
        if (st.m + 1) % 2 == 1 {
            st.step_odd()?;
        } else {
            st.step_even()?;
        }
    }
    let trace = Trace {
        version: TRACE_VERSION,
        mode: Mode::Basic,
        config: config.clone(),
        seed_repair: Some(st.seed_repair()),
        notes: BASIC_NOTES.iter().map(|s| s.to_string()).collect(),
        schedule: None,
        steps: st.records.clone(),
        stages: Vec::new(),
    };
    Ok((st, trace))
}
