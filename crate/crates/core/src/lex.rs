//! The lexicographic well-ordering of `Q ∩ [0,1]` (by height, then by
//! value), its enumeration `x_0 = 0, x_1 = 1, x_2 = 1/2, ...`, Farey counts,
//! and the bounded-height grid approximation used by the even steps.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::OnceLock;

use malachite_base::num::basic::traits::Zero;
use malachite_base::num::conversion::traits::SaturatingFrom;
use malachite_nz::integer::Integer;
use malachite_nz::natural::Natural;

use crate::error::{Error, Result};
use crate::rat::{Rat, UnitRat};

/// `q1 ≺ q2`: smaller height first, ties broken by value.
pub fn lex_cmp(q1: &UnitRat, q2: &UnitRat) -> Ordering {
    q1.value()
        .height_ref()
        .cmp(q2.value().height_ref())
        .then_with(|| q1.value().cmp(q2.value()))
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Streams the lexicographic enumeration as `(numerator, denominator)`
/// pairs: `(0,1), (1,1), (1,2), (1,3), (2,3), (1,4), (3,4), ...`.
#[derive(Clone, Debug)]
pub struct LexCursor {
    next_index: u64,
    height: u64,
    num: u64,
}

impl Default for LexCursor {
    fn default() -> Self {
        Self::new()
    }
}

impl LexCursor {
    pub fn new() -> Self {
        LexCursor {
            next_index: 0,
            height: 1,
            num: 0,
        }
    }

    /// Index of the element the next call to `next` returns.
    pub fn next_index(&self) -> u64 {
        self.next_index
    }

    pub fn current_height(&self) -> u64 {
        self.height
    }

    pub fn next_unit(&mut self) -> UnitRat {
        let (p, q) = self.next().expect("enumeration is infinite");
        UnitRat::small(p, q)
    }
}

impl Iterator for LexCursor {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        if self.height == 1 {
            let out = (self.num, 1);
            if self.num == 0 {
                self.num = 1;
            } else {
                self.height = 2;
                self.num = 1;
            }
            self.next_index += 1;
            return Some(out);
        }
        loop {
            if self.num >= self.height {
                self.height += 1;
                self.num = 1;
            }
            let p = self.num;
            self.num += 1;
            if gcd_u64(p, self.height) == 1 {
                self.next_index += 1;
                return Some((p, self.height));
            }
        }
    }
}

/// Euler's totient for `0..=n` by a linear sieve (`phi[0] = 0`).
pub fn totients(n: usize) -> Vec<u32> {
    let mut phi = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    if n >= 1 {
        phi[1] = 1;
    }
    for i in 2..=n {
        if phi[i] == 0 {
            phi[i] = (i - 1) as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let ip = i * p as usize;
            if ip > n {
                break;
            }
            if i % p as usize == 0 {
                phi[ip] = phi[i] * p;
                break;
            }
            phi[ip] = phi[i] * (p - 1);
        }
    }
    phi
}

const SMALL_TABLE: usize = 1 << 21;

/// Prefix sums `Φ(k) = φ(1) + ... + φ(k)` for `k < SMALL_TABLE`.
fn small_phi_sums() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let phi = totients(SMALL_TABLE - 1);
        let mut acc = 0u64;
        phi.iter()
            .map(|&v| {
                acc += v as u64;
                acc
            })
            .collect()
    })
}

fn phi_sum_rec(n: u64, table: &[u64], memo: &mut HashMap<u64, u128>) -> u128 {
    if (n as usize) < table.len() {
        return table[n as usize] as u128;
    }
    if let Some(&v) = memo.get(&n) {
        return v;
    }
    // Φ(n) = n(n+1)/2 - Σ_{d=2..n} Φ(⌊n/d⌋), grouped by equal quotients
    let mut total = n as u128 * (n as u128 + 1) / 2;
    let mut d = 2u64;
    while d <= n {
        let q = n / d;
        let d_hi = n / q;
        total -= (d_hi - d + 1) as u128 * phi_sum_rec(q, table, memo);
        d = d_hi + 1;
    }
    memo.insert(n, total);
    total
}

/// `Φ(n) = Σ_{k<=n} φ(k)`, exact. Sieve below `2^21`, memoized
/// Dirichlet-hyperbola recursion above.
pub fn totient_sum(n: u64) -> u128 {
    let table = small_phi_sums();
    let mut memo = HashMap::new();
    phi_sum_rec(n, table, &mut memo)
}

/// `#{q ∈ Q ∩ [0,1] : H(q) <= k} = 1 + Σ_{j<=k} φ(j)`.
pub fn farey_count(k: u64) -> u64 {
    assert!(k >= 1, "farey_count needs K >= 1");
    u64::try_from(1 + totient_sum(k)).expect("Farey count overflows u64")
}

fn distinct_prime_factors(mut h: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= h {
        if h.is_multiple_of(p) {
            out.push(p);
            while h.is_multiple_of(p) {
                h /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if h > 1 {
        out.push(h);
    }
    out
}

/// `#{1 <= p' <= p : gcd(p', h) = 1}` by inclusion-exclusion.
fn coprime_rank(p: u64, primes: &[u64]) -> u64 {
    let mut total: i128 = 0;
    for mask in 0u32..(1 << primes.len()) {
        let mut d = 1u64;
        for (i, &pr) in primes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                d *= pr;
            }
        }
        let term = (p / d) as i128;
        if mask.count_ones() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total as u64
}

/// Largest height for which [`lex_index`] is computed exactly.
pub const LEX_INDEX_MAX_HEIGHT: u64 = u32::MAX as u64;

/// The unique `n` with `x_n = q`.
pub fn lex_index(q: &UnitRat) -> Result<u64> {
    let v = q.value();
    if v.is_zero() {
        return Ok(0);
    }
    let h = v.denom();
    if *h == 1u32 {
        return Ok(1);
    }
    let too_large = || Error::IndexTooLarge(h.to_string());
    if *h > Natural::from(LEX_INDEX_MAX_HEIGHT) {
        return Err(too_large());
    }
    let h = u64::saturating_from(h);
    let p = u64::saturating_from(v.numer_abs());
    let primes = distinct_prime_factors(h);
    Ok(farey_count(h - 1) + coprime_rank(p, &primes) - 1)
}

/// `x_n` of the lexicographic enumeration.
pub fn lex_enumerate(n: u64) -> UnitRat {
    match n {
        0 => return UnitRat::zero(),
        1 => return UnitRat::one(),
        _ => {}
    }
    // smallest h with farey_count(h) > n
    let mut hi = 2u64;
    while farey_count(hi) <= n {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if farey_count(mid) > n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let h = hi;
    let rank = n - farey_count(h - 1) + 1;
    let primes = distinct_prime_factors(h);
    let (mut a, mut b) = (1u64, h - 1);
    while a < b {
        let mid = a + (b - a) / 2;
        if coprime_rank(mid, &primes) >= rank {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    UnitRat::small(a, h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
}

/// Grid point `⌊M·lo⌋/M` (below) or `⌈M·hi⌉/M` (above) for a bracket
/// `[lo, hi]` of width `< 1/(2M)` around some target point. The result has
/// height at most `M` and lies on the requested side of the whole bracket.
pub fn bounded_rational_near(lo: &Rat, hi: &Rat, m: &Natural, side: Side) -> Result<UnitRat> {
    assert!(*m != 0u32, "grid size must be positive");
    assert!(lo <= hi, "inverted bracket");
    let width = hi - lo;
    let scaled = &width * &Rat::from(m.clone() * Natural::from(2u32));
    if scaled >= Rat::one() {
        return Err(Error::BracketTooWide {
            width: width.to_string(),
        });
    }
    let mr = Rat::from(m.clone());
    let k: Integer = match side {
        Side::Below => (lo * &mr).floor(),
        Side::Above => (hi * &mr).ceil(),
    };
    let k = k.max(Integer::ZERO).min(Integer::from(m.clone()));
    UnitRat::new(Rat::from_integers(k, Integer::from(m.clone())))
}

/// Grid point of `bounded_rational_near` for the dyadic bracket
/// `[n/2^k, (n+1)/2^k]`, computed with shifts instead of rational arithmetic.
/// Requires `2^k > 2M`.
pub fn bounded_rational_near_dyadic(n: &Natural, k: u64, m: &Natural, side: Side) -> UnitRat {
    use malachite_base::num::logic::traits::SignificantBits;
    assert!(
        k >= (m << 1u64).significant_bits(),
        "bracket too wide for the grid"
    );
    let g = match side {
        Side::Below => (m * n) >> k,
        Side::Above => {
            let t = m * (n + Natural::from(1u32));
            let q = &t >> k;
            if q.clone() << k == t {
                q
            } else {
                q + Natural::from(1u32)
            }
        }
    };
    let g = g.min(m.clone());
    UnitRat::new(Rat::from_naturals(g, m.clone())).expect("grid point lies in [0, 1]")
}

/// Order used for an enumeration of `Q ∩ [0,1]`. Both start `0, 1`, then run
/// through heights `2, 3, ...`; within a height `Lex` ascends in value and
/// `LexDescending` descends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumKind {
    #[default]
    Lex,
    LexDescending,
}

/// Random-access view of an enumeration, materialized one height at a time.
#[derive(Clone, Debug)]
pub struct Enumeration {
    kind: EnumKind,
    items: Vec<UnitRat>,
    height: u64,
}

impl Enumeration {
    pub fn new(kind: EnumKind) -> Self {
        Enumeration {
            kind,
            items: vec![UnitRat::zero(), UnitRat::one()],
            height: 1,
        }
    }

    pub fn kind(&self) -> EnumKind {
        self.kind
    }

    pub fn get(&mut self, i: u64) -> &UnitRat {
        let i = usize::try_from(i).expect("index fits in memory");
        while self.items.len() <= i {
            self.height += 1;
            let h = self.height;
            let mut level: Vec<u64> = (1..h).filter(|&p| gcd_u64(p, h) == 1).collect();
            if self.kind == EnumKind::LexDescending {
                level.reverse();
            }
            self.items
                .extend(level.into_iter().map(|p| UnitRat::small(p, h)));
        }
        &self.items[i]
    }
}
