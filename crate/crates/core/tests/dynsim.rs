mod common;

use common::{demo_ledger, demo_store};
use ergoseq::dynsim::{
    build_tower, count_bounds_check, decompose, sample_orbit, subseq_average, subseq_max, tower_transfer_check, Angle, Observable, SystemSpec,
};
use ergoseq::rational::{int, rat, Rational};
use ergoseq::sequence::SequenceStore;
use ergoseq::zops::GridContext;
use num_traits::Signed;
use proptest::prelude::*;

fn golden() -> SystemSpec {
    SystemSpec::Rotation { alpha: Angle::Golden }
}

fn half() -> Observable {
    Observable::Indicator { lo: int(0), hi: rat(1, 2) }
}

#[test]
fn first_block_average_is_birkhoff() {
    let s = demo_store();
    let beta1 = s.block(1).unwrap().beta;
    for x0 in [0u128, 1 << 100, u128::MAX / 3] {
        let g = sample_orbit(golden(), half(), x0, beta1).unwrap();
        for n in 1..=beta1 {
            assert_eq!(subseq_average(&g, s, n).unwrap(), g.birkhoff_average(n).unwrap(), "x0={x0} N={n}");
        }
    }
}

#[test]
fn constant_observable_averages_to_itself() {
    let s = demo_store();
    let g = sample_orbit(golden(), Observable::Constant(rat(3, 7)), 5, 400_000).unwrap();
    for n in [1u64, 9381, 9382, 66598, 400_000] {
        assert_eq!(subseq_average(&g, s, n).unwrap(), rat(3, 7));
    }
    assert_eq!(subseq_max(&g, s, 400_000).unwrap(), rat(3, 7));
}

#[test]
fn cyclic_residue_observable_counts_exactly() {
    // Every demo modulus is odd beyond block 1, so on Z_2 the average of
    // 1_{even} over block 2 is the share of even elements.
    let s = demo_store();
    let g = sample_orbit(SystemSpec::Cyclic { period: 2 }, Observable::Residues(vec![0]), 0, 66598).unwrap();
    let b = s.block(2).unwrap();
    let even = b.elements.iter().filter(|&&x| x % 2 == 0).count() as u64;
    let total = s.prefix_count(66598).unwrap();
    let expect = (int(9381u64.div_ceil(2)) + int(even)) / int(total);
    assert_eq!(subseq_average(&g, s, 66598).unwrap(), expect);
}

#[test]
fn horizon_is_enforced() {
    let s = demo_store();
    let g = sample_orbit(golden(), half(), 0, 1000).unwrap();
    assert!(subseq_average(&g, s, 1001).is_err());
}

#[test]
fn counting_chain_holds_and_detects_thinning() {
    let l = demo_ledger();
    let s = demo_store();
    let r = count_bounds_check(l, s).unwrap();
    assert!(r.overall, "{:?}", r.failed());
    let mut blocks = s.blocks().to_vec();
    blocks[2].elements = blocks[2].elements.iter().step_by(2).copied().collect();
    let thin = SequenceStore::from_blocks(blocks).unwrap();
    let bad = count_bounds_check(l, &thin).unwrap();
    assert!(!bad.overall);
    assert!(bad.failed().iter().any(|r| r.name == "full_block_lower" && r.m == 3));
}

fn levels() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((0i64..5000, 1i64..50), 1..8).prop_map(|v| v.into_iter().map(|(a, b)| rat(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_identities(lv in levels(), ln in 1i64..100, ld in 1i64..100) {
        let d = decompose(&lv, demo_ledger(), &rat(ln, ld)).unwrap();
        let c = d.check();
        prop_assert!(c.ok(), "{:?}", c);
        prop_assert!(c.middle_ratio.iter().all(|r| *r <= int(3)));
    }

    #[test]
    fn tower_levels_are_disjoint(period in 10u64..3000, frac in 60u64..100) {
        let height = (period * frac / 100).max(1);
        if let Ok(t) = build_tower(period, height, &rat(1, 2)) {
            prop_assert!(t.levels_disjoint());
            prop_assert_eq!(t.covered.clone(), rat((t.base.len() as u64 * height) as i64, period as i64));
            prop_assert!(t.covered > rat(1, 2));
        }
    }

    #[test]
    fn tower_transfer_agrees(seed in any::<u64>(), c in 0usize..2) {
        let ctx = GridContext::new([[2u64, 3], [3, 5]][c].as_slice()).unwrap();
        let t = build_tower(2000, 400, &rat(1, 2)).unwrap();
        let g: Vec<Rational> = (0..2000u64).map(|x| int(((x.wrapping_mul(2654435761) >> 5) % 7) as i64 - 3)).collect();
        let r = tower_transfer_check(&t, &g, &ctx, 4, 60, seed).unwrap();
        prop_assert_eq!(r.agreements, 4);
    }
}

#[test]
fn decomposition_rejects_bad_input() {
    assert!(decompose(&[int(1)], demo_ledger(), &int(0)).is_err());
    assert!(decompose(&[int(-1)], demo_ledger(), &int(1)).is_err());
}

#[test]
fn subsequence_max_bounds_every_average() {
    let s = demo_store();
    let g = sample_orbit(golden(), Observable::Step { breaks: vec![rat(1, 3)], values: vec![int(-1), int(2)] }, 9, 20_000).unwrap();
    let m = subseq_max(&g, s, 20_000).unwrap();
    for n in (1..=20_000).step_by(97) {
        assert!(subseq_average(&g, s, n).unwrap().abs() <= m);
    }
}
