use serde::Serialize;

use super::DynsimError;
use crate::ledger::{Ledger, Relation};
use crate::rational::{int, wire, Rational};
use crate::sequence::SequenceStore;

/// One link of a counting chain: `lhs relation rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRecord {
    pub name: String,
    pub m: u32,
    /// `N` for the partial-block and prefix bounds.
    pub n: Option<u64>,
    #[serde(with = "wire")]
    pub lhs: Rational,
    #[serde(with = "wire")]
    pub rhs: Rational,
    pub relation: Relation,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub records: Vec<CountRecord>,
    pub overall: bool,
}

impl CountReport {
    pub fn failed(&self) -> Vec<&CountRecord> {
        self.records.iter().filter(|r| !r.satisfied).collect()
    }
}

struct Recorder(Vec<CountRecord>);

impl Recorder {
    fn push(&mut self, name: &str, m: u32, n: Option<u64>, lhs: Rational, relation: Relation, rhs: Rational) {
        let satisfied = relation.holds(&lhs, &rhs);
        self.0.push(CountRecord {
            name: name.into(),
            m,
            n,
            lhs,
            rhs,
            relation,
            satisfied,
        });
    }
}

/// Lengths inside block `(lo, hi]` at which the partial-block bounds are checked.
fn sample_lengths(lo: u64, hi: u64, p: u64) -> Vec<u64> {
    let mut v = vec![lo + 1, hi];
    for k in [1u64, 2, 3] {
        for d in [0i64, -1, 1] {
            let x = (lo + k * p) as i64 + d;
            if x > lo as i64 && x <= hi as i64 {
                v.push(x as u64);
            }
        }
    }
    let steps = 40u64;
    for i in 1..steps {
        v.push(lo + (hi - lo) * i / steps);
    }
    v.retain(|&x| x > lo && x <= hi);
    v.sort_unstable();
    v.dedup();
    v
}

/// Full-block, partial-block and prefix counting bounds, evaluated on the
/// store's actual counts for every block with a known end.
pub fn count_bounds_check(ledger: &Ledger, store: &SequenceStore) -> Result<CountReport, DynsimError> {
    let c = &ledger.constants;
    let mut rec = Recorder(Vec::new());
    let one = int(1);
    let built = store.blocks().len() as u32;
    let last = ledger.finalized_len().min(built);
    // Running lower bound sum over full blocks for the prefix chain.
    let mut prefix_lower = Rational::from_integer(0.into());
    for m in 1..=last {
        let b = ledger.block(m)?;
        let beta = b.beta.unwrap();
        let lo = b.beta_prev;
        let p = b.p;
        let q = b.q_sum.clone();
        let g = b.gamma.clone();
        let count = int(store.count_range(lo, beta)?);
        let pm = (beta - lo) / p;
        let full = int(pm * p) * q.clone();

        rec.push("full_block_lower", m, None, count.clone(), Relation::Gt, (one.clone() - g.clone()) * full.clone());
        rec.push(
            "full_block_lower_length",
            m,
            None,
            (one.clone() - g.clone()) * full.clone(),
            Relation::Ge,
            (one.clone() - g.clone()) * (int(beta - lo) - int(p)) * q.clone(),
        );
        rec.push(
            "full_block_lower_total",
            m,
            None,
            (one.clone() - g.clone()) * (int(beta - lo) - int(p)) * q.clone(),
            Relation::Gt,
            (one.clone() - g.clone()) * (one.clone() - c.gamma_beta.clone()) * int(beta) * q.clone(),
        );
        rec.push("full_block_upper", m, None, count.clone(), Relation::Lt, int((pm + 1) * p) * q.clone());
        rec.push(
            "full_block_upper_length",
            m,
            None,
            int((pm + 1) * p) * q.clone(),
            Relation::Le,
            int(beta - lo + p) * q.clone(),
        );
        // The last link uses p_m < beta_{m-1}, which needs m >= 2.
        if m >= 2 {
            rec.push("full_block_upper_total", m, None, int(beta - lo + p) * q.clone(), Relation::Lt, int(beta) * q.clone());
        }

        for n in sample_lengths(lo, beta, p) {
            let part = int(store.count_range(lo, n)?);
            let pn = (n - lo) / p;
            let lower = (one.clone() - g.clone()) * int(pn * p) * q.clone();
            rec.push("partial_block_lower", m, Some(n), part.clone(), Relation::Ge, lower.clone());
            rec.push(
                "partial_block_lower_length",
                m,
                Some(n),
                lower,
                Relation::Gt,
                (one.clone() - g.clone()) * (int(n - lo) - int(p)) * q.clone(),
            );
            rec.push("partial_block_upper", m, Some(n), part.clone(), Relation::Lt, int((pn + 1) * p) * q.clone());
            rec.push(
                "partial_block_upper_length",
                m,
                Some(n),
                int((pn + 1) * p) * q.clone(),
                Relation::Le,
                int(n - lo + p) * q.clone(),
            );
            let total = int(store.prefix_count(n)?);
            let chain = prefix_lower.clone() + (one.clone() - g.clone()) * (int(n - lo) - int(p)) * q.clone();
            rec.push("prefix_lower_sum", m, Some(n), total.clone(), Relation::Ge, chain);
            rec.push("prefix_count_floor", m, Some(n), total, Relation::Gt, Rational::new(3.into(), 5.into()) * q.clone() * int(n));
        }
        prefix_lower += (one.clone() - g) * (int(beta - lo) - int(p)) * q;
    }
    let overall = rec.0.iter().all(|r| r.satisfied);
    Ok(CountReport { records: rec.0, overall })
}
