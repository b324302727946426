mod common;

use common::{brute_block, demo_ledger, demo_store};
use ergoseq::rational::{int, one, Rational};
use ergoseq::sequence::construct::{BlockSpec, PeriodPattern};
use ergoseq::sequence::{banach_density, build_block, gap_profile, parse_lines, verify_block, SequenceStore};
use proptest::prelude::*;

fn moduli() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(2u64..40, 1..=4).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn construction_matches_direct_rule(q in moduli(), lo in 0u64..500, len in 0u64..2000, d in 0u64..6) {
        let spec = BlockSpec { lo, hi: lo + len, moduli: &q, min_gap: d };
        let built = spec.build();
        prop_assert_eq!(&built.elements, &brute_block(lo, lo + len, &q, d));
        prop_assert_eq!(spec.count(None), built.elements.len() as u64);
    }

    #[test]
    fn periodic_count_matches_construction(q in moduli(), c in 0u64..3, len in 0u64..3000, d in 0u64..4) {
        let pat = PeriodPattern::new(&q, d).unwrap();
        let lo = c * pat.period;
        let spec = BlockSpec { lo, hi: lo + len, moduli: &q, min_gap: d };
        prop_assert_eq!(spec.count(Some(&pat)), spec.build().elements.len() as u64);
    }

    #[test]
    fn export_lines_round_trip(mut v in prop::collection::btree_set(0u64..1_000_000, 0..200)) {
        let v: Vec<u64> = std::mem::take(&mut v).into_iter().collect();
        let text: String = v.iter().map(|x| format!("{x}\n")).collect();
        prop_assert_eq!(parse_lines(&text).unwrap(), v);
    }

    #[test]
    fn non_increasing_lines_are_rejected(a in 0u64..1000, b in 0u64..1000) {
        prop_assume!(b <= a);
        let text = format!("{a}\n{b}\n");
        prop_assert!(parse_lines(&text).is_err());
    }

    #[test]
    fn nth_and_prefix_counts_agree(k in 1u64..110_000) {
        let s = demo_store();
        let x = s.nth(k).unwrap();
        prop_assert_eq!(s.prefix_count(x).unwrap(), k - 1);
        prop_assert_eq!(s.prefix_count(x + 1).unwrap(), k);
    }
}

#[test]
fn demo_blocks_match_direct_rule() {
    let l = demo_ledger();
    for m in 2..=5 {
        let b = build_block(l, m).unwrap();
        let p = l.block(m).unwrap();
        assert_eq!(b.elements, brute_block(p.beta_prev, p.beta.unwrap(), &p.primes, p.d), "block {m}");
    }
}

#[test]
fn first_block_is_every_integer() {
    let s = demo_store();
    let b = s.block(1).unwrap();
    assert_eq!(b.elements, (0..9381).collect::<Vec<u64>>());
}

#[test]
fn aligned_windows_meet_density_bounds() {
    let l = demo_ledger();
    let s = demo_store();
    for m in 2..=5 {
        let r = verify_block(l, s, m).unwrap();
        assert!(r.ok(), "block {m}: {:?}", r.failures);
        assert!(r.lower_ok && r.upper_ok);
    }
}

/// Every prefix of every block: `(1 - gamma) floor((N - lo)/p) p Q <= count < (floor((N - lo)/p) + 1) p Q`,
/// in integer arithmetic.
#[test]
fn partial_block_counts_for_every_length() {
    let l = demo_ledger();
    let s = demo_store();
    let as_i128 = |r: &Rational| -> (i128, i128) { (r.numer().try_into().unwrap(), r.denom().try_into().unwrap()) };
    for m in 2..=5 {
        let b = l.block(m).unwrap();
        let (qn, qd) = as_i128(&b.q_sum);
        let (gn, gd) = as_i128(&(one() - b.gamma.clone()));
        let p = b.p as i128;
        let els = &s.block(m).unwrap().elements;
        let mut idx = 0usize;
        for n in b.beta_prev + 1..=b.beta.unwrap() {
            while idx < els.len() && els[idx] < n {
                idx += 1;
            }
            let count = idx as i128;
            let pn = ((n - b.beta_prev) as i128) / p;
            assert!(count * gd * qd >= gn * pn * p * qn, "lower m={m} N={n}");
            assert!(count * qd < (pn + 1) * p * qn, "upper m={m} N={n}");
        }
    }
}

#[test]
fn gaps_and_first_positions() {
    let l = demo_ledger();
    let s = demo_store();
    for g in gap_profile(s).into_iter().filter(|g| g.m >= 2) {
        assert!(g.gap >= l.block(g.m).unwrap().d, "{g:?}");
    }
    for b in &s.blocks()[1..] {
        assert!(b.elements[0] >= b.beta_prev + b.d);
        assert!(b.elements.windows(2).all(|w| w[1] - w[0] >= b.d));
    }
}

#[test]
fn banach_density_decreases_with_window() {
    let s = demo_store();
    let d: Vec<Rational> = [1_000u64, 10_000, 100_000, 1_000_000].iter().map(|&n| banach_density(s, n).unwrap()).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert!(d[0] <= int(1));
}

#[test]
fn store_rejects_gaps_between_blocks() {
    let s = demo_store();
    let mut blocks = s.blocks()[..3].to_vec();
    blocks.remove(1);
    assert!(SequenceStore::from_blocks(blocks).is_err());
}

#[test]
fn export_of_store_round_trips() {
    let s = demo_store();
    assert_eq!(parse_lines(&s.export_lines()).unwrap(), s.elements());
}
