use num_traits::{Signed, Zero};
use proptest::prelude::*;

use tauber_core::constructions::{
    build_certificate, escape_rowfinite, escape_unbounded, EscapeCaps,
};
use tauber_core::ideals::IdealPresentation;
use tauber_core::rational::{int, rat, sint};
use tauber_core::sequence::Sequence;
use tauber_core::setlang::{parse_set, SetDescription};
use tauber_core::sigma::{metric, Selector};
use tauber_core::summability::{row_profile, transform_exact, SummabilityMatrix};
use tauber_core::Rational;

fn leaf() -> impl Strategy<Value = SetDescription> {
    prop_oneof![
        proptest::collection::btree_set(1u64..300, 0..8).prop_map(SetDescription::finite_from_iter),
        (1u64..20, 1u64..10).prop_map(|(f, s)| SetDescription::ap(f, s).unwrap()),
        Just(SetDescription::squares()),
        Just(SetDescription::powers2()),
        (0u32..6).prop_map(SetDescription::nu2_ge),
    ]
}

fn set() -> impl Strategy<Value = SetDescription> {
    leaf().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(SetDescription::complement),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.union(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.intersect(b)),
            (inner.clone(), -5i64..6).prop_map(|(a, o)| a.shift(o)),
            (1u64..4, 1u64..4).prop_map(|(f, s)| SetDescription::dyadic_blocks(
                SetDescription::ap(f, s).unwrap()
            )),
        ]
    })
}

fn selector() -> impl Strategy<Value = Selector> {
    proptest::collection::btree_set(1u64..64, 0..40).prop_map(|s| {
        Selector::new(
            s.into_iter().collect(),
            tauber_core::sigma::Tail::Open {
                decided_through: 64,
            },
        )
        .unwrap()
    })
}

fn small_rows() -> impl Strategy<Value = Vec<Vec<Rational>>> {
    proptest::collection::vec(
        proptest::collection::vec((-4i64..5, 1i64..4), 1..6).prop_map(|v| {
            let mut row: Vec<Rational> = v.into_iter().map(|(p, q)| rat(p, q)).collect();
            if row.last().is_some_and(|r| r.is_zero()) {
                *row.last_mut().unwrap() = int(1);
            }
            row
        }),
        1..6,
    )
}

fn matrix() -> impl Strategy<Value = SummabilityMatrix> {
    prop_oneof![
        Just(SummabilityMatrix::Cesaro),
        Just(SummabilityMatrix::Identity),
        small_rows()
            .prop_map(|rows| SummabilityMatrix::explicit(rows, Some(SummabilityMatrix::Cesaro))),
        leaf().prop_map(|s| SummabilityMatrix::row_drop(SummabilityMatrix::Cesaro, s)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sets_round_trip_through_text(s in set()) {
        let back = parse_set(&s.to_string()).unwrap();
        for n in 1..400 {
            prop_assert_eq!(back.member(n), s.member(n));
        }
    }

    #[test]
    fn complement_flips_membership(s in set(), n in 1u64..5000) {
        prop_assert_eq!(s.clone().complement().member(n), !s.member(n));
    }

    #[test]
    fn prefix_counts_match_enumeration(s in set(), n in 1u64..3000) {
        let brute = (1..=n).filter(|&k| s.member(k)).count() as u64;
        prop_assert_eq!(s.count_prefix(n).unwrap(), brute);
    }

    #[test]
    fn next_member_matches_scan(s in set(), from in 1u64..3000) {
        let scan = (from..from + 4000).find(|&k| s.member(k));
        let next = s.next_member(from, 1 << 20);
        match scan {
            Some(m) => prop_assert_eq!(next, Some(m)),
            None => prop_assert!(next.is_none_or(|m| m >= from + 4000 && s.member(m))),
        }
    }

    #[test]
    fn transforms_are_linear(
        a in matrix(),
        x in proptest::collection::vec(-20i64..20, 64),
        y in proptest::collection::vec(-20i64..20, 64),
        alpha in -3i64..4,
        beta in -3i64..4,
    ) {
        let seq = |v: &[i64]| Sequence::Prefix(v.iter().map(|&t| sint(t)).collect());
        let mixed: Vec<i64> = x.iter().zip(&y).map(|(p, q)| alpha * p + beta * q).collect();
        let tx = transform_exact(&a, &seq(&x), 32).unwrap();
        let ty = transform_exact(&a, &seq(&y), 32).unwrap();
        let tm = transform_exact(&a, &seq(&mixed), 32).unwrap();
        for n in 0..32 {
            prop_assert_eq!(&tm[n], &(sint(alpha) * &tx[n] + sint(beta) * &ty[n]));
        }
    }

    #[test]
    fn z_w_grows_with_w(a in matrix(), w1 in 1u64..40, dw in 0u64..40) {
        let profile = row_profile(&a, 200).unwrap();
        let small = profile.z_w_prefix(w1);
        let large = profile.z_w_prefix(w1 + dw);
        prop_assert!(small.iter().all(|n| large.contains(n)));
    }

    #[test]
    fn metric_axioms(a in selector(), b in selector(), c in selector(), k in 1u64..64) {
        let ab = metric(&a, &b, k).unwrap();
        let ba = metric(&b, &a, k).unwrap();
        prop_assert_eq!(&ab.lo, &ba.lo);
        prop_assert!(metric(&a, &a, k).unwrap().lo.is_zero());
        prop_assert_eq!(ab.lo.is_zero(), ab.differing.is_empty());
        let ac = metric(&a, &c, k).unwrap();
        let bc = metric(&b, &c, k).unwrap();
        prop_assert!(ac.lo <= &ab.lo + &bc.lo);
        prop_assert!(ab.lo <= ab.hi);
    }

    #[test]
    fn certificates_bound_every_candidate_limit(
        levels in proptest::collection::vec(0u8..3, 64..256),
        l_num in 1i64..4,
        gap in 1i64..4,
    ) {
        let values: Vec<Rational> = levels.iter().map(|&v| rat(v as i64, 2)).collect();
        let (l, u) = (rat(l_num, 8), rat(l_num + gap, 8));
        let n = values.len() as u64;
        let cert = build_certificate(&values, &l, &u, &[n / 4, n / 2, n]).unwrap();
        prop_assume!(cert.is_valid());
        let floor = cert.delta_upper.clone().min(cert.delta_lower.clone());
        let eps = (&u - &l) / int(2);
        for i in 0..=10 {
            let eta = &l + (&u - &l) * rat(i, 10);
            for w in &cert.witnesses {
                let s = w.scale as usize;
                let off = values[..s].iter().filter(|y| (*y - &eta).abs() >= eps).count();
                prop_assert!(rat(off as i64, s as i64) >= floor);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn single_row_escape_beats_the_bound(
        stem in proptest::collection::btree_set(1u64..30, 0..4),
        lead in 0u64..4,
        m0 in 1u64..500,
    ) {
        let stem: Vec<u64> = stem.into_iter().collect();
        let row = move |k: u64| if k <= lead { Rational::zero() } else { rat(1, (k * k) as i64) };
        let r = escape_unbounded(&stem, &row, &Sequence::SignedLinear, &int(m0), EscapeCaps::default()).unwrap();
        let i0 = r.target_rows[0];
        let picks = r.selector.prefix(i0).unwrap();
        prop_assert!(picks.starts_with(&stem));
        let sum: Rational = picks
            .iter()
            .enumerate()
            .map(|(k, &p)| row(k as u64 + 1) * if p % 2 == 1 { sint(-(p as i64)) } else { int(p) })
            .sum();
        prop_assert!(sum.abs() >= int(m0 + 1));
    }

    #[test]
    fn rowfinite_escape_beats_the_bound(
        stem in proptest::collection::btree_set(1u64..30, 0..4),
        m0 in 1u64..300,
        under_z in any::<bool>(),
    ) {
        let stem: Vec<u64> = stem.into_iter().collect();
        let ideal = if under_z { IdealPresentation::z() } else { IdealPresentation::fin() };
        let x = Sequence::Linear(int(1));
        let r = escape_rowfinite(&stem, &SummabilityMatrix::Cesaro, &x, &ideal, &int(m0), 1, 4096, EscapeCaps::default()).unwrap();
        let top = *r.target_rows.iter().max().unwrap();
        let picks = r.selector.prefix(top).unwrap();
        prop_assert!(picks.starts_with(&stem));
        for &n in &r.target_rows {
            let mean = rat(picks[..n as usize].iter().sum::<u64>() as i64, n as i64);
            prop_assert!(mean >= int(m0));
        }
    }
}
