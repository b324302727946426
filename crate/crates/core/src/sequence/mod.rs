//! The sets `Lambda_m`, the global enumeration `n_1 < n_2 < ...` and the
//! counting and density checks on them.

pub mod construct;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{Ledger, LedgerError};
use crate::rational::{int, one, Rational};
use construct::{BlockSpec, Constructed};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("block {0} has no end point in the ledger yet")]
    LedgerIncomplete(u32),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("range end {end} exceeds the built horizon {horizon}")]
    OutOfBuiltRange { end: u64, horizon: u64 },
    #[error("window length {len} exceeds the built horizon {horizon}")]
    WindowTooLarge { len: u64, horizon: u64 },
    #[error("bad store: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceBlock {
    pub m: u32,
    pub beta_prev: u64,
    pub beta: u64,
    pub d: u64,
    pub elements: Vec<u64>,
    pub deleted_per_j: Vec<u64>,
}

impl SequenceBlock {
    pub fn min_gap(&self) -> Option<u64> {
        self.elements.windows(2).map(|w| w[1] - w[0]).min()
    }
}

pub fn build_block(ledger: &Ledger, m: u32) -> Result<SequenceBlock, SequenceError> {
    let b = ledger.block(m)?;
    let beta = b.beta.ok_or(SequenceError::LedgerIncomplete(m))?;
    let Constructed { elements, deleted_per_j } = BlockSpec {
        lo: b.beta_prev,
        hi: beta,
        moduli: &b.primes,
        min_gap: b.d,
    }
    .build();
    Ok(SequenceBlock {
        m,
        beta_prev: b.beta_prev,
        beta,
        d: b.d,
        elements,
        deleted_per_j,
    })
}

/// All blocks concatenated, with a sorted global array for counting.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceStore {
    blocks: Vec<SequenceBlock>,
    elements: Vec<u64>,
    /// `offsets[i]` = number of elements before block `i`.
    offsets: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub m: u32,
    pub beta_prev: u64,
    pub beta: u64,
    pub size: u64,
    pub min_gap: Option<u64>,
}

impl SequenceStore {
    /// Blocks must be contiguous and in order.
    pub fn from_blocks(blocks: Vec<SequenceBlock>) -> Result<Self, SequenceError> {
        if blocks.is_empty() {
            return Err(SequenceError::Invalid("no blocks".into()));
        }
        let mut elements = Vec::with_capacity(blocks.iter().map(|b| b.elements.len()).sum());
        let mut offsets = Vec::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            if i > 0 && b.beta_prev != blocks[i - 1].beta {
                return Err(SequenceError::Invalid(format!("block {} does not start where block {} ends", b.m, blocks[i - 1].m)));
            }
            if b.beta < b.beta_prev {
                return Err(SequenceError::Invalid(format!("block {} has negative length", b.m)));
            }
            if !b.elements.windows(2).all(|w| w[0] < w[1]) {
                return Err(SequenceError::Invalid(format!("block {} is not strictly increasing", b.m)));
            }
            if b.elements.first().is_some_and(|&x| x < b.beta_prev) || b.elements.last().is_some_and(|&x| x >= b.beta) {
                return Err(SequenceError::Invalid(format!("block {} has elements outside its interval", b.m)));
            }
            offsets.push(elements.len());
            elements.extend_from_slice(&b.elements);
        }
        Ok(Self { blocks, elements, offsets })
    }

    pub fn blocks(&self) -> &[SequenceBlock] {
        &self.blocks
    }

    pub fn block(&self, m: u32) -> Option<&SequenceBlock> {
        self.blocks.iter().find(|b| b.m == m)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn start(&self) -> u64 {
        self.blocks[0].beta_prev
    }

    /// End of the last built block.
    pub fn horizon(&self) -> u64 {
        self.blocks.last().unwrap().beta
    }

    /// Number of elements below `b`, for `b` up to the horizon.
    pub fn prefix_count(&self, b: u64) -> Result<u64, SequenceError> {
        if b > self.horizon() {
            return Err(SequenceError::OutOfBuiltRange { end: b, horizon: self.horizon() });
        }
        Ok(self.elements.partition_point(|&x| x < b) as u64)
    }

    /// `#{n_k in [a, b)}`.
    pub fn count_range(&self, a: u64, b: u64) -> Result<u64, SequenceError> {
        if a >= b {
            // An inverted range is still checked against the horizon.
            self.prefix_count(b)?;
            return Ok(0);
        }
        Ok(self.prefix_count(b)? - self.prefix_count(a)?)
    }

    /// `n_k` with `k` counted from 1.
    pub fn nth(&self, k: u64) -> Option<u64> {
        if k == 0 {
            return None;
        }
        self.elements.get(k as usize - 1).copied()
    }

    /// `N_m` for each built block end `beta_m`, starting with `N_0 = 0`.
    pub fn nbar(&self) -> Vec<u64> {
        let mut out = vec![0];
        for (i, b) in self.blocks.iter().enumerate() {
            out.push((self.offsets[i] + b.elements.len()) as u64);
        }
        out
    }

    pub fn summaries(&self) -> Vec<BlockSummary> {
        self.blocks
            .iter()
            .map(|b| BlockSummary {
                m: b.m,
                beta_prev: b.beta_prev,
                beta: b.beta,
                size: b.elements.len() as u64,
                min_gap: b.min_gap(),
            })
            .collect()
    }

    /// One decimal integer per line.
    pub fn export_lines(&self) -> String {
        let mut s = String::with_capacity(self.elements.len() * 8);
        for x in &self.elements {
            writeln!(s, "{x}").unwrap();
        }
        s
    }
}

/// Parse the newline-delimited export back into a strictly increasing list.
pub fn parse_lines(text: &str) -> Result<Vec<u64>, SequenceError> {
    let mut out: Vec<u64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let x: u64 = line.parse().map_err(|e| SequenceError::Parse {
            line: i + 1,
            msg: format!("{e}"),
        })?;
        if out.last().is_some_and(|&prev| prev >= x) {
            return Err(SequenceError::Parse {
                line: i + 1,
                msg: "not strictly increasing".into(),
            });
        }
        out.push(x);
    }
    Ok(out)
}

/// Build every finalized block (`through` defaults to all of them) in parallel.
pub fn build_store(ledger: &Ledger, through: Option<u32>) -> Result<SequenceStore, SequenceError> {
    let fin = ledger.finalized_len();
    let last = through.unwrap_or(fin);
    if last == 0 {
        return Err(SequenceError::Invalid("no finalized block to build".into()));
    }
    if last > fin {
        return Err(SequenceError::LedgerIncomplete(fin + 1));
    }
    let blocks = (1..=last)
        .into_par_iter()
        .map(|m| build_block(ledger, m))
        .collect::<Result<Vec<_>, _>>()?;
    SequenceStore::from_blocks(blocks)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockReport {
    pub m: u32,
    pub windows: u64,
    #[serde(with = "crate::rational::wire")]
    pub min_ratio: Rational,
    #[serde(with = "crate::rational::wire")]
    pub max_ratio: Rational,
    pub min_gap: Option<u64>,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub gap_ok: bool,
    pub spacing_ok: bool,
    /// A single progression cannot lose points, so the strict upper bound
    /// is met with equality.
    pub single_progression: bool,
    pub failures: Vec<String>,
}

impl BlockReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Window-density, gap and spacing checks for one block.
pub fn verify_block(ledger: &Ledger, store: &SequenceStore, m: u32) -> Result<BlockReport, SequenceError> {
    let params = ledger.block(m)?;
    let block = store
        .block(m)
        .ok_or_else(|| SequenceError::Invalid(format!("block {m} is not in the store")))?;
    let pq = int(params.p) * params.q_sum.clone();
    let lower = one() - params.gamma.clone();
    let mut min_ratio: Option<Rational> = None;
    let mut max_ratio: Option<Rational> = None;
    let mut windows = 0u64;
    let mut lower_ok = true;
    let mut upper_ok = true;
    let mut start = block.beta_prev;
    let els = &block.elements;
    let mut idx = 0usize;
    while start + params.p <= block.beta {
        let end = start + params.p;
        let from = idx + els[idx..].partition_point(|&x| x < start);
        let to = from + els[from..].partition_point(|&x| x < end);
        idx = from;
        let ratio = int((to - from) as u64) / pq.clone();
        lower_ok &= ratio > lower;
        upper_ok &= ratio < one();
        if min_ratio.as_ref().is_none_or(|r| &ratio < r) {
            min_ratio = Some(ratio.clone());
        }
        if max_ratio.as_ref().is_none_or(|r| &ratio > r) {
            max_ratio = Some(ratio);
        }
        windows += 1;
        start = end;
    }
    let single_progression = params.k == 1;
    let min_gap = block.min_gap();
    let gap_ok = m == 1 || min_gap.is_none_or(|g| g >= params.d);
    let spacing_ok = m == 1 || els.first().is_none_or(|&x| x >= block.beta_prev + params.d);
    let mut failures = Vec::new();
    if m >= 2 {
        if !lower_ok {
            failures.push("window_lower_bound".to_string());
        }
        if !upper_ok && !single_progression {
            failures.push("window_upper_bound".to_string());
        }
    }
    if !gap_ok {
        failures.push("min_gap".to_string());
    }
    if !spacing_ok {
        failures.push("start_spacing".to_string());
    }
    Ok(BlockReport {
        m,
        windows,
        min_ratio: min_ratio.unwrap_or_else(|| int(0u32)),
        max_ratio: max_ratio.unwrap_or_else(|| int(0u32)),
        min_gap,
        lower_ok,
        upper_ok,
        gap_ok,
        spacing_ok,
        single_progression,
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapEntry {
    pub m: u32,
    /// Global index of the left element of the smallest gap (from 1).
    pub k: u64,
    pub gap: u64,
}

/// Smallest consecutive gap inside each block with at least two elements.
pub fn gap_profile(store: &SequenceStore) -> Vec<GapEntry> {
    store
        .blocks
        .iter()
        .enumerate()
        .filter_map(|(i, b)| {
            let (pos, gap) = b
                .elements
                .windows(2)
                .enumerate()
                .map(|(j, w)| (j, w[1] - w[0]))
                .min_by_key(|&(j, g)| (g, j))?;
            Some(GapEntry {
                m: b.m,
                k: (store.offsets[i] + pos + 1) as u64,
                gap,
            })
        })
        .collect()
}

/// Largest element count of a window `[a, a+len)` inside the built range,
/// divided by `len`.
pub fn banach_density(store: &SequenceStore, len: u64) -> Result<Rational, SequenceError> {
    let lo = store.start();
    let hi = store.horizon();
    if len == 0 || len > hi - lo {
        return Err(SequenceError::WindowTooLarge { len, horizon: hi - lo });
    }
    // Some optimal window starts at an element, or is the last possible one.
    let els = &store.elements;
    let mut best = store.count_range(hi - len, hi)?;
    let mut j = 0usize;
    for (i, &a) in els.iter().enumerate() {
        if a + len > hi {
            break;
        }
        let end = a + len;
        if j < i {
            j = i;
        }
        while j < els.len() && els[j] < end {
            j += 1;
        }
        best = best.max((j - i) as u64);
    }
    Ok(Rational::new(best.into(), len.into()))
}
