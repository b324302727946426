use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use super::{gamma_for, BlockParams, Ledger, LedgerError};
use crate::rational::{int, one, pow, wire, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    /// `lhs` divides `rhs` (both integers).
    Divides,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Divides => {
                lhs.is_integer() && rhs.is_integer() && {
                    let (a, b) = (lhs.to_integer(), rhs.to_integer());
                    a != BigInt::from(0) && b.is_multiple_of(&a)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintRecord {
    pub name: String,
    #[serde(with = "wire")]
    pub lhs: Rational,
    #[serde(with = "wire")]
    pub rhs: Rational,
    pub relation: Relation,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub m: u32,
    pub profile: String,
    pub records: Vec<ConstraintRecord>,
    pub overall: bool,
}

impl ConstraintReport {
    fn new(m: u32, profile: &str, records: Vec<ConstraintRecord>) -> Self {
        let overall = records.iter().all(|r| r.satisfied);
        Self {
            m,
            profile: profile.to_string(),
            records,
            overall,
        }
    }

    pub fn failed(&self) -> Vec<String> {
        self.records.iter().filter(|r| !r.satisfied).map(|r| r.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&ConstraintRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}

struct Recorder(Vec<ConstraintRecord>);

impl Recorder {
    fn push(&mut self, name: &str, lhs: Rational, relation: Relation, rhs: Rational) {
        let satisfied = relation.holds(&lhs, &rhs);
        self.0.push(ConstraintRecord {
            name: name.to_string(),
            lhs,
            rhs,
            relation,
            satisfied,
        });
    }
}

/// Records that depend only on the prefix counts `N_0..N_{m-2}` and block
/// `m`'s own parameters: everything chosen before `beta_{m-1}`.
pub(crate) fn block_records(ledger: &Ledger, b: &BlockParams) -> Result<Vec<ConstraintRecord>, LedgerError> {
    let c = &ledger.constants;
    let m = b.m;
    let mi = m as i64;
    let mut r = Recorder(Vec::new());
    let n2 = int(ledger.nbar_at(mi - 2)?);
    let k = int(b.k);
    let d1 = int(b.d + 1);
    let minq = int(b.min_prime());
    let mp1 = m + 1;

    r.push("min_prime_count", k.clone(), Relation::Ge, int(c.k_min));
    let lhs = c.k_growth_coef.clone() / k.clone() * n2.clone() * pow(&c.k_growth_base, mp1);
    r.push("prime_count_growth", lhs, Relation::Lt, pow(&c.k_threshold_base, mp1).recip());

    let distinct: BTreeSet<u64> = b.primes.iter().copied().collect();
    r.push("distinct_primes", int(distinct.len() as u64), Relation::Eq, k.clone());
    let prime_count = b.primes.iter().filter(|&&q| crate::primes::is_prime(q)).count();
    r.push("primes_prime", int(prime_count as u64), Relation::Eq, k.clone());
    r.push("primes_exceed_gap", minq.clone(), Relation::Gt, int(b.d));
    r.push(
        "dyadic_ratio",
        Rational::new(b.max_prime().into(), b.min_prime().into()),
        Relation::Lt,
        int(2),
    );

    let prev = ledger.block(m - 1)?;
    r.push("period_increases", int(b.p), Relation::Gt, int(prev.p));
    r.push("density_decreases", b.q_sum.clone(), Relation::Lt, prev.q_sum.clone());

    let lhs = n2.clone() * c.spacing_coef.clone() * k.clone() * k.clone() * d1.clone() / minq.clone();
    r.push(
        "prime_size_vs_history",
        lhs,
        Relation::Lt,
        (c.spacing_rhs.clone() * int(mp1)).recip(),
    );

    let expected_gamma = gamma_for(c, m, &ledger.nbar)?;
    r.push("gamma_matches_table", b.gamma.clone(), Relation::Eq, expected_gamma);
    if m > c.gamma_small_max_m {
        let n3 = ledger.nbar_at(mi - 3)?;
        if n3 > 0 {
            let rhs = (c.gamma_large_coef.clone() * int(m) * int(n3)).recip();
            r.push("gamma_decreasing", b.gamma.clone(), Relation::Lt, rhs);
        }
    }
    r.push(
        "deletion_fraction",
        b.gamma.clone(),
        Relation::Gt,
        c.deletion_coef.clone() * k * d1 / minq,
    );
    r.push("density_floor", one() - b.gamma.clone(), Relation::Gt, c.density_floor.clone());
    Ok(r.0)
}

/// Records that involve the end point `beta_{m-1}` of block `m-1` and the
/// resulting prefix count `N_{m-1}`, for a candidate pair.
pub fn evaluate_start_candidate(
    ledger: &Ledger,
    b: &BlockParams,
    beta_prev: u64,
    nbar_prev: u64,
) -> Result<ConstraintReport, LedgerError> {
    let recs = start_records(ledger, b, beta_prev, nbar_prev)?;
    Ok(ConstraintReport::new(b.m, &ledger.constants.profile, recs))
}

fn start_records(
    ledger: &Ledger,
    b: &BlockParams,
    beta_prev: u64,
    nbar_prev: u64,
) -> Result<Vec<ConstraintRecord>, LedgerError> {
    let c = &ledger.constants;
    let m = b.m;
    let mi = m as i64;
    let mut r = Recorder(Vec::new());
    let p = int(b.p);
    let beta1 = int(beta_prev);
    let beta2 = int(ledger.beta_at(mi - 2)?);
    let n1 = int(nbar_prev);
    let n2 = int(ledger.nbar_at(mi - 2)?);
    let n3 = int(ledger.nbar_at(mi - 3)?);
    let mr = int(m);
    let prev = ledger.block(m - 1)?;

    r.push(
        "period_fits_block",
        p.clone(),
        Relation::Lt,
        (beta1.clone() - beta2.clone()) / c.period_block_ratio.clone(),
    );
    r.push("period_divides_start", p.clone(), Relation::Divides, beta1.clone());
    r.push(
        "block_start_margin",
        beta2 + c.start_margin_mult.clone() * int(prev.p),
        Relation::Lt,
        c.gamma_beta.clone() / int(2) * beta1.clone(),
    );
    if m == 2 {
        r.push("first_block_length", beta1, Relation::Gt, int(c.beta1_min));
    }

    if nbar_prev == 0 {
        return Err(LedgerError::Invalid(format!("block {m}: N_{} must be positive", m - 1)));
    }
    let mut history = int(0u64);
    for i in 1..=mi - 2 {
        history += int(ledger.nbar_at(i)?);
    }
    let hist_lhs = history * n3.clone() / n1.clone();
    r.push(
        "history_ratio",
        hist_lhs.clone(),
        Relation::Lt,
        (c.history_ratio_rhs.clone() * mr.clone()).recip(),
    );
    r.push(
        "period_vs_count",
        p.clone(),
        Relation::Lt,
        n1.clone() / c.count_period_ratio.clone(),
    );
    r.push(
        "history_period_ratio",
        n3.clone() / n1.clone() * c.history_period_coef.clone() * p.clone(),
        Relation::Lt,
        (c.history_period_rhs.clone() * mr.clone()).recip(),
    );
    r.push(
        "history_sum_ratio",
        hist_lhs,
        Relation::Lt,
        (c.history_sum_rhs.clone() * mr.clone()).recip(),
    );
    r.push(
        "earlier_blocks_small",
        n2.clone(),
        Relation::Lt,
        (n1.clone() - n2.clone()) / (c.earlier_blocks_rhs.clone() * mr.clone()),
    );
    r.push(
        "previous_total_ratio",
        n2.clone() / n1.clone(),
        Relation::Lt,
        (c.previous_total_rhs.clone() * mr.clone()).recip(),
    );
    r.push(
        "first_part_tail",
        c.first_part_coef.clone() * int(m + 1) * n2 * p * n3 / n1,
        Relation::Lt,
        (c.first_part_rhs.clone() * mr).recip(),
    );
    Ok(r.0)
}

/// Every inequality imposed on the choices made at inductive step `m`,
/// evaluated exactly. For `m = 1` these are the base-case identities.
pub fn check_constraints(ledger: &Ledger, m: u32) -> Result<ConstraintReport, LedgerError> {
    let b = ledger.block(m)?;
    let profile = &ledger.constants.profile;
    if m == 1 {
        let mut r = Recorder(Vec::new());
        r.push("base_prime_count", int(b.k), Relation::Eq, int(1u32));
        r.push("base_modulus", int(b.primes[0]), Relation::Eq, int(1u32));
        r.push("base_period", int(b.p), Relation::Eq, int(1u32));
        r.push("base_density", b.q_sum.clone(), Relation::Eq, one());
        r.push("gamma_matches_table", b.gamma.clone(), Relation::Eq, gamma_for(&ledger.constants, 1, &ledger.nbar)?);
        r.push("density_floor", one() - b.gamma.clone(), Relation::Gt, ledger.constants.density_floor.clone());
        r.push("block_starts_at_zero", int(b.beta_prev), Relation::Eq, int(0u32));
        return Ok(ConstraintReport::new(1, profile, r.0));
    }
    let mut records = block_records(ledger, b)?;
    let beta_prev = ledger.beta_at(m as i64 - 1)?;
    let nbar_prev = ledger.nbar_at(m as i64 - 1)?;
    records.extend(start_records(ledger, b, beta_prev, nbar_prev)?);
    Ok(ConstraintReport::new(m, profile, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{default_constants, demo_constants};
    use crate::rational::rat;

    #[test]
    fn relations() {
        assert!(Relation::Divides.holds(&int(5), &int(35)));
        assert!(!Relation::Divides.holds(&int(5), &int(36)));
        assert!(!Relation::Divides.holds(&int(0), &int(0)));
        assert!(!Relation::Divides.holds(&rat(1, 2), &int(1)));
        assert!(Relation::Le.holds(&int(1), &int(1)));
        assert!(!Relation::Lt.holds(&int(1), &int(1)));
    }

    #[test]
    fn base_case_passes() {
        let l = Ledger::base(default_constants());
        let rep = check_constraints(&l, 1).unwrap();
        assert!(rep.overall, "{:?}", rep.failed());
    }

    #[test]
    fn toy_block_fails_deletion_fraction() {
        // q = {3, 5}, d = 2: 1/8 is not above 2 * 2 * 3 / 3 = 4.
        let mut l = Ledger::base(default_constants());
        l.blocks[0].beta = Some(15);
        l.blocks[0].count = Some(15);
        l.nbar.push(15);
        let b = BlockParams::from_primes(2, 15, vec![3, 5], 2, rat(1, 8)).unwrap();
        l.blocks.push(b);
        let rep = check_constraints(&l, 2).unwrap();
        let rec = rep.get("deletion_fraction").unwrap();
        assert_eq!(rec.lhs, rat(1, 8));
        assert_eq!(rec.rhs, int(4));
        assert!(!rec.satisfied);
        assert!(!rep.overall);
        // History terms vanish at m = 2.
        assert_eq!(rep.get("prime_count_growth").unwrap().lhs, int(0));
        assert_eq!(rep.get("prime_size_vs_history").unwrap().lhs, int(0));
        assert_eq!(rep.get("history_sum_ratio").unwrap().lhs, int(0));
    }

    #[test]
    fn non_multiple_start_is_rejected() {
        let mut l = Ledger::base(demo_constants());
        let b = BlockParams::from_primes(2, 9381, vec![53, 59], 2, rat(1, 4)).unwrap();
        let ok = evaluate_start_candidate(&l, &b, 9381, 9381).unwrap();
        assert!(ok.overall, "{:?}", ok.failed());
        let bad = evaluate_start_candidate(&l, &b, 9382, 9382).unwrap();
        assert!(!bad.get("period_divides_start").unwrap().satisfied);
        assert!(!bad.overall);
        l.blocks[0].beta = Some(100);
        assert!(evaluate_start_candidate(&l, &b, 0, 0).is_err());
    }
}
