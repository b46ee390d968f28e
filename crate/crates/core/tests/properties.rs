use malachite_nz::integer::Integer;
use malachite_nz::natural::Natural;
use malachite_q::Rational;
use proptest::prelude::*;

use qbiject::avoid::{lft_eval, lft_inverse_eval, LftFamily};
use qbiject::lex::{
    bounded_rational_near, farey_count, gcd_u64, lex_cmp, lex_enumerate, lex_index, Side,
};
use qbiject::poly::{monotone_invert, node_product, tail_bound, Bisector, Bracket, Poly};
use qbiject::rat::{certify_log_le, Rat, UnitRat, Verdict};
use qbiject::Exec;

fn unit() -> impl Strategy<Value = UnitRat> {
    (1u64..500)
        .prop_flat_map(|q| (0..=q, Just(q)))
        .prop_map(|(p, q)| UnitRat::small(p, q))
}

fn small_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((-20i64..20, 1i64..12), 1..6)
        .prop_map(|cs| Poly::from_coeffs(cs.into_iter().map(|(n, d)| Rat::new(n, d)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lex_index_inverts_enumeration(n in 0u64..200_000) {
        let q = lex_enumerate(n);
        prop_assert_eq!(lex_index(&q).unwrap(), n);
    }

    #[test]
    fn enumeration_is_increasing(n in 0u64..50_000) {
        prop_assert_eq!(lex_cmp(&lex_enumerate(n), &lex_enumerate(n + 1)), std::cmp::Ordering::Less);
    }

    #[test]
    fn farey_count_matches_brute_force(k in 1u64..120) {
        let brute = 1 + (1..=k).map(|q| (1..=q).filter(|&p| gcd_u64(p, q) == 1).count() as u64).sum::<u64>();
        prop_assert_eq!(farey_count(k), brute);
    }

    #[test]
    fn rat_text_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let r = Rat::new(n, d);
        prop_assert_eq!(r.to_string().parse::<Rat>().unwrap(), r);
    }

    #[test]
    fn grid_point_is_bounded_and_on_side(q in unit(), m in 1u64..5000, below in any::<bool>()) {
        let m_n = Natural::from(m);
        let side = if below { Side::Below } else { Side::Above };
        let z = bounded_rational_near(q.value(), q.value(), &m_n, side).unwrap();
        prop_assert!(z.value().denom() <= &m_n);
        match side {
            Side::Below => prop_assert!(z.value() <= q.value()),
            Side::Above => prop_assert!(z.value() >= q.value()),
        }
        let gap = (z.value() - q.value()).abs();
        prop_assert!(gap <= Rat::new(1, m as i64));
    }

    #[test]
    fn node_product_vanishes_on_nodes(nodes in prop::collection::hash_set(unit(), 1..8)) {
        let nodes: Vec<UnitRat> = nodes.into_iter().collect();
        let p = node_product(&nodes).unwrap();
        prop_assert_eq!(p.degree(), nodes.len());
        for x in &nodes {
            prop_assert!(p.eval(x.value()).is_zero());
        }
    }

    #[test]
    fn evaluation_is_a_ring_map(a in small_poly(), b in small_poly(), x in unit()) {
        let x = x.value();
        prop_assert_eq!(a.add(&b).eval(x), &a.eval(x) + &b.eval(x));
        prop_assert_eq!(a.mul(&b).eval(x), &a.eval(x) * &b.eval(x));
        prop_assert_eq!(a.eval_cmp(x, &b.eval(x)), a.eval(x).cmp(&b.eval(x)));
    }

    #[test]
    fn bisection_brackets_the_preimage(c in 1i64..30, y in unit(), bits in 1u64..300) {
        // x + x^2 c / 30 is increasing on [0, 1]; scale it onto [0, 1]
        let raw = Poly::from_coeffs(vec![Rat::zero(), Rat::one(), Rat::new(c, 30)]);
        let p = raw.scale(&(Rat::one() / raw.eval(&Rat::one())));
        let mut b = Bisector::new(&p, y.value()).unwrap();
        b.refine_to(bits);
        let (lo, hi) = b.bounds();
        match b.bracket() {
            Bracket::Hit(x) => prop_assert_eq!(p.eval(x), y.value().clone()),
            Bracket::Dyadic { k, .. } => {
                prop_assert_eq!(*k, bits);
                prop_assert!(p.eval(&lo) < *y.value() && p.eval(&hi) > *y.value());
            }
        }
        let (lo2, hi2) = monotone_invert(&p, y.value(), &(Natural::from(1u32) << bits)).unwrap();
        prop_assert!(lo2 <= hi2 && &hi2 - &lo2 <= Rat::dyadic(Natural::from(1u32), bits));
    }

    #[test]
    fn lft_inverse_round_trips(an in -30i64..30, ad in 1i64..30, q in unit(), second in any::<bool>()) {
        let a = Rat::new(an, ad);
        prop_assume!(a < Rat::one());
        let fam = if second { LftFamily::Second } else { LftFamily::First };
        let y = lft_eval(&a, &q, fam).unwrap();
        prop_assert_eq!(lft_inverse_eval(&a, &y, fam).unwrap(), q);
    }

    #[test]
    fn log_certificate_is_sound(x in 1u64..u64::MAX, b in 0u64..60) {
        let v = certify_log_le(&Natural::from(x), &Natural::from(b));
        let truth = (x as f64).ln() <= b as f64;
        // a pass or fail disagreeing with a comfortable float margin is a bug
        let margin = ((x as f64).ln() - b as f64).abs() > 1e-6;
        if margin {
            match v {
                Verdict::Pass => prop_assert!(truth),
                Verdict::Fail => prop_assert!(!truth),
                Verdict::Marginal => {}
            }
        }
    }

    #[test]
    fn sequential_and_parallel_agree(n in 1u64..5000) {
        let f = |i: u64| i * i % 7;
        prop_assert_eq!(Exec::Sequential.sum_range(0..n, f), Exec::Parallel.sum_range(0..n, f));
        let pred = |i: u64| i % 97 != 96;
        prop_assert_eq!(Exec::Sequential.first_failure(0..n, pred), Exec::Parallel.first_failure(0..n, pred));
    }

    #[test]
    fn tail_bound_is_the_geometric_sum(n in 1u64..40) {
        let direct = (n + 1..n + 200).fold(Rat::zero(), |acc, k| &acc + &Rat::pow4_neg(k - 1));
        prop_assert!(direct < tail_bound(n));
        prop_assert!(&tail_bound(n) - &direct < Rat::pow4_neg(n + 190));
    }

    #[test]
    fn rat_arithmetic_matches_reference(
        (a, b, c, d) in (-(1i64 << 40)..(1i64 << 40), 1i64..(1i64 << 40), -(1i64 << 40)..(1i64 << 40), 1i64..(1i64 << 40)),
        ka in 0u64..200,
        kb in 0u64..200,
    ) {
        // dyadic factors exercise the power-of-two gcd path
        let x = Rat::new(a, b) / Rat::from(Natural::from(1u32) << ka);
        let y = Rat::new(c, d) * Rat::from(Natural::from(1u32) << kb);
        let rx = Rational::from_integers(Integer::from(a), Integer::from(b)) >> ka;
        let ry = Rational::from_integers(Integer::from(c), Integer::from(d)) << kb;
        prop_assert_eq!((&x + &y).to_rational(), &rx + &ry);
        prop_assert_eq!((&x - &y).to_rational(), &rx - &ry);
        prop_assert_eq!((&x * &y).to_rational(), &rx * &ry);
        if c != 0 {
            prop_assert_eq!((&x / &y).to_rational(), &rx / &ry);
        }
        prop_assert_eq!(x.cmp(&y), rx.cmp(&ry));
        prop_assert_eq!(Rat::from_rational(rx.clone()), x.clone());
        prop_assert_eq!(x.midpoint(&y).to_rational(), (&rx + &ry) >> 1u64);
    }
}
