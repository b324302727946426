//! Union of arithmetic progressions with the close-point deletion rule.

/// One block's construction input: progressions `{l*q}` for each modulus,
/// restricted to `[lo, hi)`, with points closer than `min_gap + 1` to a point
/// of a different progression removed.
#[derive(Clone, Copy, Debug)]
pub struct BlockSpec<'a> {
    pub lo: u64,
    pub hi: u64,
    pub moduli: &'a [u64],
    pub min_gap: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Constructed {
    pub elements: Vec<u64>,
    pub deleted_per_j: Vec<u64>,
}

fn first_multiple_at_least(q: u64, lo: u64) -> u64 {
    lo.div_ceil(q) * q
}

impl<'a> BlockSpec<'a> {
    /// Whether `n` (a multiple of `moduli[j]` inside the block) has a point of
    /// another progression within `min_gap`, counting only points in `[lo, hi)`.
    pub fn is_deleted(&self, n: u64, j: usize) -> bool {
        self.moduli.iter().enumerate().any(|(jj, &q)| {
            if jj == j {
                return false;
            }
            let below = n - n % q;
            if below >= self.lo && n - below <= self.min_gap {
                return true;
            }
            let above = below + q;
            above < self.hi && above - n <= self.min_gap
        })
    }

    pub fn build(&self) -> Constructed {
        let mut elements = Vec::new();
        let mut deleted_per_j = vec![0u64; self.moduli.len()];
        if self.hi <= self.lo {
            return Constructed {
                elements,
                deleted_per_j,
            };
        }
        for (j, &q) in self.moduli.iter().enumerate() {
            let mut n = first_multiple_at_least(q, self.lo);
            while n < self.hi {
                if self.is_deleted(n, j) {
                    deleted_per_j[j] += 1;
                } else {
                    elements.push(n);
                }
                n += q;
            }
        }
        elements.sort_unstable();
        elements.dedup();
        Constructed {
            elements,
            deleted_per_j,
        }
    }

    /// Exact element count, using the periodic pattern when `lo` is a multiple
    /// of the period (so only the top `min_gap` positions need direct work).
    pub fn count(&self, pattern: Option<&PeriodPattern>) -> u64 {
        if self.hi <= self.lo {
            return 0;
        }
        let pattern = match pattern {
            Some(pat) if self.lo % pat.period == 0 && pat.moduli == self.moduli => pat,
            _ => return self.build().elements.len() as u64,
        };
        let tail_start = self.hi.saturating_sub(self.min_gap).max(self.lo);
        let body = pattern.count_prefix(tail_start - self.lo);
        body + self.count_direct(tail_start, self.hi)
    }

    fn count_direct(&self, a: u64, b: u64) -> u64 {
        let mut hits: Vec<u64> = Vec::new();
        for (j, &q) in self.moduli.iter().enumerate() {
            let mut n = first_multiple_at_least(q, a);
            while n < b {
                if !self.is_deleted(n, j) {
                    hits.push(n);
                }
                n += q;
            }
        }
        hits.sort_unstable();
        hits.dedup();
        hits.len() as u64
    }
}

/// Survivor offsets of the bi-infinite periodic construction over one period
/// `[0, p)`, where `p` is the product of the moduli.
#[derive(Clone, Debug)]
pub struct PeriodPattern {
    pub period: u64,
    pub moduli: Vec<u64>,
    pub min_gap: u64,
    pub offsets: Vec<u64>,
}

pub const MAX_PATTERN_PERIOD: u64 = 1 << 28;

impl PeriodPattern {
    pub fn new(moduli: &[u64], min_gap: u64) -> Option<Self> {
        let period = moduli
            .iter()
            .try_fold(1u64, |acc, &q| acc.checked_mul(q))?;
        if period == 0 || period > MAX_PATTERN_PERIOD {
            return None;
        }
        let mut offsets = Vec::new();
        for (j, &q) in moduli.iter().enumerate() {
            for n in (0..period).step_by(q as usize) {
                let hit = moduli.iter().enumerate().any(|(jj, &qq)| {
                    if jj == j {
                        return false;
                    }
                    let r = n % qq;
                    r <= min_gap || qq - r <= min_gap
                });
                if !hit {
                    offsets.push(n);
                }
            }
        }
        offsets.sort_unstable();
        offsets.dedup();
        Some(Self {
            period,
            moduli: moduli.to_vec(),
            min_gap,
            offsets,
        })
    }

    pub fn per_period(&self) -> u64 {
        self.offsets.len() as u64
    }

    /// Number of periodic survivors in `[0, len)`.
    pub fn count_prefix(&self, len: u64) -> u64 {
        let full = len / self.period;
        let rem = len % self.period;
        full * self.per_period() + self.offsets.partition_point(|&o| o < rem) as u64
    }
}
