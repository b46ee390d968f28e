//! Functions a construction must avoid, and the two one-parameter families
//! of linear fractional transformations that induce bijections of
//! `Q ∩ [0,1]`.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lex::LexCursor;
use crate::poly::{Poly, RatFunc};
use crate::rat::{Rat, UnitRat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LftFamily {
    /// `x / (a x + 1 - a)`: increasing, fixes 0 and 1.
    First,
    /// `(a - 1)(x - 1) / (a x + 1 - a)`: decreasing, swaps 0 and 1.
    Second,
}

/// Both families share the denominator `a x + 1 - a`, which is `1 - a` at 0
/// and `1` at 1, so it has no root in `[0, 1]` exactly when `a < 1`.
pub fn lft_admissible(a: &Rat) -> bool {
    *a < 1
}

pub fn lft(a: &Rat, family: LftFamily) -> Result<RatFunc> {
    if !lft_admissible(a) {
        return Err(Error::PoleInUnit);
    }
    let one_minus_a = &Rat::one() - a;
    let den = Poly::from_coeffs(vec![one_minus_a.clone(), a.clone()]);
    let num = match family {
        LftFamily::First => Poly::x(),
        LftFamily::Second => Poly::from_coeffs(vec![one_minus_a, a - &Rat::one()]),
    };
    RatFunc::new(num, den)
}

pub fn lft_eval(a: &Rat, q: &UnitRat, family: LftFamily) -> Result<UnitRat> {
    let g = lft(a, family)?;
    UnitRat::new(g.eval(q.value())?)
}

/// Closed-form inverse; both families are closed under inversion.
pub fn lft_inverse_eval(a: &Rat, y: &UnitRat, family: LftFamily) -> Result<UnitRat> {
    if !lft_admissible(a) {
        return Err(Error::PoleInUnit);
    }
    let y = y.value();
    let one_minus_a = &Rat::one() - a;
    let x = match family {
        LftFamily::First => (y * &one_minus_a) / (&Rat::one() - &(a * y)),
        LftFamily::Second => (&one_minus_a * &(&Rat::one() - y)) / (&(a * y) + &one_minus_a),
    };
    UnitRat::new(x)
}

/// Exhaustive check over every `q` with `H(q) <= sample_h`: the image is in
/// `[0, 1]`, no two points collide, and the inverse maps each image back.
pub fn lft_bijection_check(a: &Rat, family: LftFamily, sample_h: u64) -> Result<bool> {
    if !lft_admissible(a) {
        return Err(Error::PoleInUnit);
    }
    let mut seen = HashSet::new();
    let mut cursor = LexCursor::new();
    while cursor.current_height() <= sample_h {
        let q = cursor.next_unit();
        if *q.value().height_ref() > malachite_nz::natural::Natural::from(sample_h) {
            break;
        }
        let image = match lft_eval(a, &q, family) {
            Ok(v) => v,
            Err(_) => return Ok(false),
        };
        if lft_inverse_eval(a, &image, family)? != q || !seen.insert(image) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The family `{g_n}`; every member is defined on all of `[0, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AvoidFamily {
    funcs: Vec<RatFunc>,
}

impl AvoidFamily {
    pub fn new(funcs: Vec<RatFunc>) -> Result<Self> {
        for (i, g) in funcs.iter().enumerate() {
            if !g.is_unit_safe() {
                return Err(Error::Config(format!(
                    "avoid function {i} has a pole in [0, 1]"
                )));
            }
        }
        Ok(AvoidFamily { funcs })
    }

    pub fn empty() -> Self {
        AvoidFamily::default()
    }

    pub fn from_lfts(params: &[(Rat, LftFamily)]) -> Result<Self> {
        let funcs = params
            .iter()
            .map(|(a, fam)| lft(a, *fam))
            .collect::<Result<Vec<_>>>()?;
        AvoidFamily::new(funcs)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let funcs: Vec<RatFunc> =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        AvoidFamily::new(funcs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        AvoidFamily::from_json(&text)
    }

    /// Increasing LFTs of the first family with `a = 0, 1/2, -1, 1/3, ...`
    /// followed by a few decreasing ones; `g_0` is the identity.
    pub fn lft_defaults() -> Self {
        AvoidFamily::from_json(include_str!("../data/lft_defaults.json"))
            .expect("bundled family is valid")
    }

    /// Increasing LFTs of the first family other than the identity.
    pub fn lft_nonidentity() -> Self {
        AvoidFamily::from_json(include_str!("../data/lft_nonidentity.json"))
            .expect("bundled family is valid")
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    pub fn get(&self, t: u64) -> Option<&RatFunc> {
        usize::try_from(t).ok().and_then(|t| self.funcs.get(t))
    }

    pub fn funcs(&self) -> &[RatFunc] {
        &self.funcs
    }

    /// `g_t(q)`; members are unit-safe, so this cannot hit a pole.
    pub fn eval(&self, t: u64, q: &Rat) -> Option<Rat> {
        self.get(t)
            .map(|g| g.eval(q).expect("avoid functions are unit-safe"))
    }
}

/// Exact evidence that `f` differs from `g_index`: at `point` the
/// constructed function takes `f_value` while `g` takes `g_value`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvoidWitness {
    pub g: u64,
    pub point: UnitRat,
    pub f_value: Rat,
    pub g_value: Rat,
}

impl AvoidWitness {
    pub fn holds(&self, family: &AvoidFamily) -> bool {
        family.eval(self.g, self.point.value()).as_ref() == Some(&self.g_value)
            && self.f_value != self.g_value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lft_eval_examples() {
        let u = UnitRat::small;
        for q in [u(0, 1), u(1, 3), u(5, 7), u(1, 1)] {
            assert_eq!(lft_eval(&Rat::zero(), &q, LftFamily::First).unwrap(), q);
        }
        assert_eq!(
            lft_eval(&Rat::new(1, 2), &u(1, 2), LftFamily::First).unwrap(),
            u(2, 3)
        );
        assert!(matches!(
            lft_eval(&Rat::int(2), &u(1, 2), LftFamily::First),
            Err(Error::PoleInUnit)
        ));
        // second family at a = 0 is 1 - x
        assert_eq!(
            lft_eval(&Rat::zero(), &u(1, 3), LftFamily::Second).unwrap(),
            u(2, 3)
        );
    }

    #[test]
    fn bijection_checks() {
        assert!(lft_bijection_check(&Rat::zero(), LftFamily::First, 50).unwrap());
        assert!(lft_bijection_check(&Rat::new(1, 2), LftFamily::First, 50).unwrap());
        assert!(lft_bijection_check(&Rat::new(-3, 2), LftFamily::Second, 40).unwrap());
        assert!(matches!(
            lft_bijection_check(&Rat::int(2), LftFamily::First, 10),
            Err(Error::PoleInUnit)
        ));
    }

    #[test]
    fn bundled_families() {
        let d = AvoidFamily::lft_defaults();
        assert!(d.len() >= 8);
        assert_eq!(
            d.get(0).unwrap(),
            &lft(&Rat::zero(), LftFamily::First).unwrap()
        );
        let n = AvoidFamily::lft_nonidentity();
        for g in n.funcs() {
            assert_ne!(g, &lft(&Rat::zero(), LftFamily::First).unwrap());
            assert_eq!(g.eval(&Rat::zero()).unwrap(), Rat::zero());
            assert_eq!(g.eval(&Rat::one()).unwrap(), Rat::one());
        }
    }

    #[test]
    fn family_rejects_poles() {
        let bad = RatFunc::new(
            Poly::x(),
            Poly::from_coeffs(vec![Rat::int(-1), Rat::int(2)]),
        )
        .unwrap();
        assert!(matches!(AvoidFamily::new(vec![bad]), Err(Error::Config(_))));
    }

    #[test]
    fn json_round_trip() {
        let fam = AvoidFamily::from_lfts(&[
            (Rat::zero(), LftFamily::First),
            (Rat::new(1, 3), LftFamily::Second),
        ])
        .unwrap();
        let text = serde_json::to_string(&fam).unwrap();
        assert!(text.starts_with("[{\"num\":[\"0/1\",\"1/1\"]"));
        assert_eq!(AvoidFamily::from_json(&text).unwrap(), fam);
    }
}
