use num_traits::{Signed, Zero};
use serde::Serialize;

use super::DynsimError;
use crate::ledger::Ledger;
use crate::rational::{int, wire, wire_vec, Rational};

/// The three pieces of `f / lambda'` at step `m`, one entry per level of `f`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionStep {
    pub m: u32,
    /// `N_{m-3}`.
    pub lower: u64,
    /// `N_m`.
    pub upper: u64,
    #[serde(with = "wire_vec")]
    pub f1: Vec<Rational>,
    #[serde(with = "wire_vec")]
    pub f2: Vec<Rational>,
    #[serde(with = "wire_vec")]
    pub f3: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    #[serde(with = "wire")]
    pub lambda_prime: Rational,
    /// The values taken by `f`.
    #[serde(with = "wire_vec")]
    pub levels: Vec<Rational>,
    pub steps: Vec<DecompositionStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub sums_to_scaled_f: bool,
    pub small_steps_have_no_low_part: bool,
    pub middle_parts_bounded: bool,
    /// `sum_m f_2,m / (f / lambda')` per level (0 where `f = 0`).
    #[serde(with = "wire_vec")]
    pub middle_ratio: Vec<Rational>,
}

impl DecompositionCheck {
    pub fn ok(&self) -> bool {
        self.sums_to_scaled_f && self.small_steps_have_no_low_part && self.middle_parts_bounded
    }
}

/// Split `f / lambda'`, `lambda' = lambda / 3`, by the thresholds `N_{m-3}`
/// and `N_m`, for every step `m` whose `N_m` is in the ledger.
pub fn decompose(levels: &[Rational], ledger: &Ledger, lambda: &Rational) -> Result<Decomposition, DynsimError> {
    if !lambda.is_positive() {
        return Err(DynsimError::BadSpec("lambda must be positive".into()));
    }
    if levels.iter().any(|v| v.is_negative()) {
        return Err(DynsimError::BadSpec("the decomposition needs f >= 0".into()));
    }
    let lambda_prime = lambda / int(3);
    let scaled: Vec<Rational> = levels.iter().map(|v| v / &lambda_prime).collect();
    let top = ledger.nbar.len() as u32 - 1;
    let mut steps = Vec::new();
    for m in 1..=top {
        let lower = ledger.nbar_at(m as i64 - 3)?;
        let upper = ledger.nbar_at(m as i64)?;
        let (lo, hi) = (int(lower), int(upper));
        let pick = |keep: &dyn Fn(&Rational) -> bool| -> Vec<Rational> {
            scaled.iter().map(|g| if keep(g) { g.clone() } else { Rational::zero() }).collect()
        };
        steps.push(DecompositionStep {
            m,
            lower,
            upper,
            f1: pick(&|g| *g < lo),
            f2: pick(&|g| lo <= *g && *g < hi),
            f3: pick(&|g| *g >= hi),
        });
    }
    Ok(Decomposition {
        lambda_prime,
        levels: levels.to_vec(),
        steps,
    })
}

impl Decomposition {
    pub fn check(&self) -> DecompositionCheck {
        let scaled: Vec<Rational> = self.levels.iter().map(|v| v / &self.lambda_prime).collect();
        let sums = self.steps.iter().all(|s| (0..scaled.len()).all(|i| &s.f1[i] + &s.f2[i] + &s.f3[i] == scaled[i]));
        let small = self.steps.iter().filter(|s| s.m <= 3).all(|s| s.f1.iter().all(Zero::is_zero));
        let mut middle = vec![Rational::zero(); scaled.len()];
        for s in &self.steps {
            for (acc, v) in middle.iter_mut().zip(&s.f2) {
                *acc += v;
            }
        }
        let bounded = middle.iter().zip(&scaled).all(|(s, g)| *s <= int(3) * g);
        let middle_ratio = middle
            .iter()
            .zip(&scaled)
            .map(|(s, g)| if g.is_zero() { Rational::zero() } else { s / g })
            .collect();
        DecompositionCheck {
            sums_to_scaled_f: sums,
            small_steps_have_no_low_part: small,
            middle_parts_bounded: bounded,
            middle_ratio,
        }
    }
}
