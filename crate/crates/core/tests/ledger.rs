mod common;

use common::{brute_block, demo_ledger};
use ergoseq::ledger::{check_constraints, extend_ledger, extend_to, Ledger, LedgerError, Profile, Relation, ResourceBounds};
use ergoseq::rational::{int, rat, Rational};
use num_bigint::BigInt;
use proptest::prelude::*;

#[test]
fn demo_blocks_match_frozen_table() {
    let l = demo_ledger();
    let primes: Vec<Vec<u64>> = l.blocks.iter().map(|b| b.primes.clone()).collect();
    assert_eq!(primes, vec![vec![1], vec![53, 59], vec![67, 71], vec![83, 89], vec![97, 101], vec![113, 127]]);
    let betas: Vec<Option<u64>> = l.blocks.iter().map(|b| b.beta).collect();
    assert_eq!(betas, vec![Some(9381), Some(66598), Some(310254), Some(1303001), Some(5295519), None]);
    assert_eq!(l.nbar, vec![0, 9381, 11247, 17600, 38296, 110018]);
    assert!(l.blocks.iter().all(|b| b.gamma == rat(1, 4)));
}

#[test]
fn demo_counts_agree_with_direct_rule() {
    let l = demo_ledger();
    for b in &l.blocks[..4] {
        let els = brute_block(b.beta_prev, b.beta.unwrap(), &b.primes, b.d);
        assert_eq!(els.len() as u64, b.count.unwrap(), "block {}", b.m);
    }
}

#[test]
fn every_demo_step_passes_its_records() {
    let l = demo_ledger();
    l.validate().unwrap();
    for m in 1..=l.last_m() {
        let rep = check_constraints(l, m).unwrap();
        assert!(rep.overall, "m={m}: {:?}", rep.failed());
        assert!(rep.records.iter().all(|r| r.relation.holds(&r.lhs, &r.rhs) == r.satisfied));
    }
}

#[test]
fn parameters_move_monotonically() {
    let l = demo_ledger();
    for w in l.blocks.windows(2) {
        assert!(w[1].p > w[0].p);
        assert!(w[1].q_sum <= w[0].q_sum);
        assert!(w[1].d > w[0].d);
        assert!(w[1].min_prime() > w[0].max_prime());
        assert!(w[1].max_prime() < 2 * w[1].min_prime());
    }
    assert!(l.nbar.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn faithful_third_step_is_infeasible() {
    let l = extend_to(&Profile::Faithful, 2, &ResourceBounds::default()).unwrap();
    for m in 1..=2 {
        assert!(check_constraints(&l, m).unwrap().overall);
    }
    match extend_ledger(&l, &ResourceBounds::default()) {
        Err(LedgerError::InfeasibleAtScale { m: 3, lower_bound, .. }) => {
            assert_eq!(lower_bound, "128424079523840001");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn json_round_trip() {
    let l = demo_ledger();
    let s = serde_json::to_string(l).unwrap();
    let back: Ledger = serde_json::from_str(&s).unwrap();
    assert_eq!(&back, l);
    back.validate().unwrap();
}

#[test]
fn structural_tampering_is_caught() {
    let mut l = demo_ledger().clone();
    l.nbar[3] += 1;
    assert!(l.validate().is_err());
    let mut l = demo_ledger().clone();
    l.blocks[2].q_sum = rat(1, 30);
    assert!(l.validate().is_err());
    let mut l = demo_ledger().clone();
    l.blocks[3].beta_prev += 1;
    assert!(l.validate().is_err());
}

#[test]
fn tight_bounds_report_infeasible() {
    let bounds = ResourceBounds {
        max_k: 1_000,
        max_prime: 1_000,
        max_beta: 100_000,
    };
    let err = extend_to(&Profile::demo(), 6, &bounds).unwrap_err();
    assert!(matches!(err, LedgerError::InfeasibleAtScale { .. } | LedgerError::NoPrimeWindow { .. }), "{err:?}");
}

fn relation() -> impl Strategy<Value = Relation> {
    prop_oneof![Just(Relation::Lt), Just(Relation::Le), Just(Relation::Gt), Just(Relation::Ge), Just(Relation::Eq)]
}

proptest! {
    #[test]
    fn relation_agrees_with_ordering(a in -50i64..50, b in 1i64..20, c in -50i64..50, d in 1i64..20, r in relation()) {
        let (x, y) = (rat(a, b), rat(c, d));
        let expect = match r {
            Relation::Lt => x < y,
            Relation::Le => x <= y,
            Relation::Gt => x > y,
            Relation::Ge => x >= y,
            Relation::Eq => x == y,
            Relation::Divides => unreachable!(),
        };
        prop_assert_eq!(r.holds(&x, &y), expect);
    }

    #[test]
    fn divides_matches_remainder(a in 1i64..200, b in 0i64..5000) {
        prop_assert_eq!(Relation::Divides.holds(&int(a), &int(b)), b % a == 0);
    }

    #[test]
    fn constant_overrides_parse_exactly(n in 1i64..1000, d in 1i64..1000) {
        let mut t = Profile::demo().constants();
        t.set("gamma_small", &format!("{n}/{d}")).unwrap();
        prop_assert_eq!(t.gamma_small, rat(n, d));
    }

    #[test]
    fn block_gamma_tampering_fails_records(m in 2u32..=5, bump in 1i64..10) {
        let mut l = demo_ledger().clone();
        let g: Rational = l.blocks[m as usize - 1].gamma.clone() + rat(bump, 100);
        l.blocks[m as usize - 1].gamma = g;
        let rep = check_constraints(&l, m).unwrap();
        prop_assert!(!rep.overall);
        prop_assert!(rep.failed().iter().any(|n| n == "gamma_matches_table"));
    }
}

#[test]
fn faithful_bound_is_exact_integer() {
    let expected: BigInt = BigInt::from(320_000u64 * 256 * 16) * BigInt::from(97_979_797u64) + BigInt::from(1);
    assert_eq!(expected.to_string(), "128424079523840001");
}
