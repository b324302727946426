use serde::{Deserialize, Serialize};

use crate::rational::{int, rat, wire, Rational};

/// Every numeric constant used by the block-parameter inequalities.
///
/// Each inequality keeps its shape across profiles; only these numbers move.
/// The faithful table reproduces the literal construction, the demo table is
/// scaled so that five blocks fit below `10^7`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantTable {
    pub profile: String,

    /// Relative slack allowed between a block's start and its length.
    #[serde(with = "wire")]
    pub gamma_beta: Rational,
    /// Density tolerance for the early blocks.
    #[serde(with = "wire")]
    pub gamma_small: Rational,
    /// Blocks `m <= gamma_small_max_m` use `gamma_small`.
    pub gamma_small_max_m: u32,
    /// Later blocks use `1 / (gamma_large_coef * (m+1) * N_{m-2})`.
    #[serde(with = "wire")]
    pub gamma_large_coef: Rational,

    /// Prime-count growth: `(coef / K) * N_{m-2} * base^{m+1} < threshold_base^{-(m+1)}`.
    #[serde(with = "wire")]
    pub k_growth_coef: Rational,
    #[serde(with = "wire")]
    pub k_growth_base: Rational,
    #[serde(with = "wire")]
    pub k_threshold_base: Rational,
    /// Structural floor on the number of progressions for `m >= 2`.
    pub k_min: u32,

    /// Prime size: `N_{m-2} * coef * K^2 * (d+1) / min q < 1 / (rhs * (m+1))`.
    #[serde(with = "wire")]
    pub spacing_coef: Rational,
    #[serde(with = "wire")]
    pub spacing_rhs: Rational,

    /// Deletion fraction: `gamma_m > coef * K * (d+1) / min q`.
    #[serde(with = "wire")]
    pub deletion_coef: Rational,

    /// `1 - gamma_m > density_floor`.
    #[serde(with = "wire")]
    pub density_floor: Rational,
    /// `p_m < (beta_{m-1} - beta_{m-2}) / period_block_ratio`.
    #[serde(with = "wire")]
    pub period_block_ratio: Rational,

    /// `(sum N) * N_{m-3} / N_{m-1} < 1 / (history_ratio_rhs * m)`.
    #[serde(with = "wire")]
    pub history_ratio_rhs: Rational,
    /// `p_m < N_{m-1} / count_period_ratio`.
    #[serde(with = "wire")]
    pub count_period_ratio: Rational,

    /// `beta_{m-1} + mult * p_m < (gamma_beta / 2) * beta_m`.
    #[serde(with = "wire")]
    pub start_margin_mult: Rational,

    /// `(N_{m-3} / N_{m-1}) * coef * p_m < 1 / (rhs * m)`.
    #[serde(with = "wire")]
    pub history_period_coef: Rational,
    #[serde(with = "wire")]
    pub history_period_rhs: Rational,

    /// Same left side as the history ratio, tighter right side `1 / (rhs * m)`.
    #[serde(with = "wire")]
    pub history_sum_rhs: Rational,
    /// `N_{m-2} < (N_{m-1} - N_{m-2}) / (rhs * m)`.
    #[serde(with = "wire")]
    pub earlier_blocks_rhs: Rational,
    /// `N_{m-2} / N_{m-1} < 1 / (rhs * m)`.
    #[serde(with = "wire")]
    pub previous_total_rhs: Rational,
    /// `coef * (m+1) * N_{m-2} * p_m * N_{m-3} / N_{m-1} < 1 / (rhs * m)`.
    #[serde(with = "wire")]
    pub first_part_coef: Rational,
    #[serde(with = "wire")]
    pub first_part_rhs: Rational,

    /// Final lower bound `N_0^N > c * Q(m0) * N` of the prefix-count chain.
    #[serde(with = "wire")]
    pub prefix_count_floor: Rational,
    /// `beta_1 > beta1_min`.
    pub beta1_min: u64,
}

pub fn default_constants() -> ConstantTable {
    ConstantTable {
        profile: "faithful".into(),
        gamma_beta: rat(1, 1000),
        gamma_small: rat(1, 8),
        gamma_small_max_m: 3,
        gamma_large_coef: int(2000),
        k_growth_coef: int(32 * 10_000),
        k_growth_base: int(4),
        k_threshold_base: int(2),
        k_min: 2,
        spacing_coef: int(4),
        spacing_rhs: int(200),
        deletion_coef: int(2),
        density_floor: rat(3, 4),
        period_block_ratio: int(10_000),
        history_ratio_rhs: int(3),
        count_period_ratio: int(100),
        start_margin_mult: int(2),
        history_period_coef: int(3),
        history_period_rhs: int(200),
        history_sum_rhs: int(100),
        earlier_blocks_rhs: int(100),
        previous_total_rhs: int(1),
        first_part_coef: int(10_000),
        first_part_rhs: int(1000),
        prefix_count_floor: rat(3, 5),
        beta1_min: 10,
    }
}

/// Desk-scale table: same inequalities, constants chosen so that the
/// binding constraints are the density tolerance `1/4`, the start margin with
/// `gamma_beta = 1/2` and a period that fits twice into the previous block.
pub fn demo_constants() -> ConstantTable {
    let tiny = rat(1, 1_000_000);
    ConstantTable {
        profile: "demo".into(),
        gamma_beta: rat(1, 2),
        gamma_small: rat(1, 4),
        gamma_small_max_m: u32::MAX,
        gamma_large_coef: int(2000),
        k_growth_coef: rat(1, 1_000_000_000),
        k_growth_base: int(1),
        k_threshold_base: int(1),
        k_min: 2,
        spacing_coef: rat(1, 1_000_000_000),
        spacing_rhs: int(1),
        deletion_coef: int(2),
        density_floor: rat(1, 2),
        period_block_ratio: int(2),
        history_ratio_rhs: tiny.clone(),
        count_period_ratio: int(2),
        start_margin_mult: int(2),
        history_period_coef: int(3),
        history_period_rhs: tiny.clone(),
        history_sum_rhs: tiny,
        earlier_blocks_rhs: rat(1, 100),
        previous_total_rhs: rat(1, 4),
        first_part_coef: rat(1, 1_000_000_000_000),
        first_part_rhs: int(1),
        prefix_count_floor: rat(2, 5),
        beta1_min: 10,
    }
}

impl ConstantTable {
    /// Entries that must be strictly positive, by name.
    pub fn positive_entries(&self) -> Vec<(&'static str, &Rational)> {
        vec![
            ("gamma_beta", &self.gamma_beta),
            ("gamma_small", &self.gamma_small),
            ("gamma_large_coef", &self.gamma_large_coef),
            ("k_growth_coef", &self.k_growth_coef),
            ("k_growth_base", &self.k_growth_base),
            ("k_threshold_base", &self.k_threshold_base),
            ("spacing_coef", &self.spacing_coef),
            ("spacing_rhs", &self.spacing_rhs),
            ("deletion_coef", &self.deletion_coef),
            ("density_floor", &self.density_floor),
            ("period_block_ratio", &self.period_block_ratio),
            ("history_ratio_rhs", &self.history_ratio_rhs),
            ("count_period_ratio", &self.count_period_ratio),
            ("start_margin_mult", &self.start_margin_mult),
            ("history_period_coef", &self.history_period_coef),
            ("history_period_rhs", &self.history_period_rhs),
            ("history_sum_rhs", &self.history_sum_rhs),
            ("earlier_blocks_rhs", &self.earlier_blocks_rhs),
            ("previous_total_rhs", &self.previous_total_rhs),
            ("first_part_coef", &self.first_part_coef),
            ("first_part_rhs", &self.first_part_rhs),
            ("prefix_count_floor", &self.prefix_count_floor),
        ]
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in self.positive_entries() {
            if !crate::rational::is_positive(v) {
                return Err(format!("constant {name} must be positive"));
            }
        }
        if self.gamma_beta >= crate::rational::one() {
            return Err("gamma_beta must be < 1".into());
        }
        if self.k_min == 0 {
            return Err("k_min must be >= 1".into());
        }
        Ok(())
    }

    /// Apply `name=value` overrides (values in rational text form).
    pub fn set(&mut self, name: &str, value: &str) -> Result<(), String> {
        let r = || crate::rational::parse_text(value);
        let u = || value.trim().parse::<u64>().map_err(|e| format!("{name}: {e}"));
        match name {
            "profile" => self.profile = value.trim().to_string(),
            "gamma_beta" => self.gamma_beta = r()?,
            "gamma_small" => self.gamma_small = r()?,
            "gamma_small_max_m" => self.gamma_small_max_m = u()?.min(u32::MAX as u64) as u32,
            "gamma_large_coef" => self.gamma_large_coef = r()?,
            "k_growth_coef" => self.k_growth_coef = r()?,
            "k_growth_base" => self.k_growth_base = r()?,
            "k_threshold_base" => self.k_threshold_base = r()?,
            "k_min" => self.k_min = u()?.min(u32::MAX as u64) as u32,
            "spacing_coef" => self.spacing_coef = r()?,
            "spacing_rhs" => self.spacing_rhs = r()?,
            "deletion_coef" => self.deletion_coef = r()?,
            "density_floor" => self.density_floor = r()?,
            "period_block_ratio" => self.period_block_ratio = r()?,
            "history_ratio_rhs" => self.history_ratio_rhs = r()?,
            "count_period_ratio" => self.count_period_ratio = r()?,
            "start_margin_mult" => self.start_margin_mult = r()?,
            "history_period_coef" => self.history_period_coef = r()?,
            "history_period_rhs" => self.history_period_rhs = r()?,
            "history_sum_rhs" => self.history_sum_rhs = r()?,
            "earlier_blocks_rhs" => self.earlier_blocks_rhs = r()?,
            "previous_total_rhs" => self.previous_total_rhs = r()?,
            "first_part_coef" => self.first_part_coef = r()?,
            "first_part_rhs" => self.first_part_rhs = r()?,
            "prefix_count_floor" => self.prefix_count_floor = r()?,
            "beta1_min" => self.beta1_min = u()?,
            _ => return Err(format!("unknown constant {name:?}")),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::pow;

    #[test]
    fn faithful_literals() {
        let c = default_constants();
        assert_eq!(c.gamma_beta, rat(1, 1000));
        assert_eq!(c.gamma_small, rat(1, 8));
        assert_eq!(c.gamma_small_max_m, 3);
        // threshold at m is 2^{-(m+1)}
        for m in 1..8u32 {
            let thr = pow(&c.k_threshold_base, m + 1).recip();
            assert_eq!(thr, Rational::new(1.into(), (1u64 << (m + 1)).into()));
        }
        assert_eq!(c.k_growth_coef, int(320_000));
        assert!(c.validate().is_ok());
        assert!(demo_constants().validate().is_ok());
    }

    #[test]
    fn overrides_parse_and_reject_unknowns() {
        let mut c = demo_constants();
        c.set("gamma_small", "1/5").unwrap();
        assert_eq!(c.gamma_small, rat(1, 5));
        assert!(c.set("nope", "1").is_err());
        c.set("gamma_beta", "2").unwrap();
        assert!(c.validate().is_err());
    }
}
