//! Binnings that map non-negative click counts to ordinal categories: an
//! unsupervised equal-frequency quantizer for miner attributes and fixed
//! cut-point intervals (multiples of a step, zero kept separate) for the
//! activity-intensity state space.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinningKind {
    EqualFrequency,
    FixedCutpoints,
}

impl BinningKind {
    fn as_str(self) -> &'static str {
        match self {
            BinningKind::EqualFrequency => "equal_frequency",
            BinningKind::FixedCutpoints => "fixed_cutpoints",
        }
    }
}

/// A total, monotone map from non-negative integers to bin indices.
///
/// Intervals are right-closed: a value `v` falls in bin `i` when
/// `boundaries[i-1] < v <= boundaries[i]` (with open ends below the first
/// and above the last boundary). When `zero_separate` is set, the value 0
/// occupies its own bin 0 ahead of the boundary bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Binning {
    pub kind: BinningKind,
    /// Strictly increasing cut points.
    pub boundaries: Vec<f64>,
    pub zero_separate: bool,
    /// Set when an equal-frequency request had fewer distinct values than
    /// requested bins and fell back to one bin per distinct value.
    pub degenerate: bool,
}

impl Binning {
    pub fn bin_count(&self) -> usize {
        self.boundaries.len() + 1 + usize::from(self.zero_separate)
    }

    /// Bin index for a value; total over all non-negative integers.
    pub fn apply(&self, value: u64) -> usize {
        if self.zero_separate {
            if value == 0 {
                return 0;
            }
            1 + self.count_below(value)
        } else {
            self.count_below(value)
        }
    }

    fn count_below(&self, value: u64) -> usize {
        // boundaries are sorted; bins are right-closed, so a value sitting
        // exactly on a boundary belongs to the lower bin
        self.boundaries.iter().filter(|&&b| value as f64 > b).count()
    }

    /// Human-readable label for a bin, comma-free so it can sit inside CSV
    /// fields and DOT labels. Integer boundaries get integer-range labels.
    pub fn label(&self, bin: usize) -> String {
        debug_assert!(bin < self.bin_count());
        if self.zero_separate {
            if bin == 0 {
                return String::from("0");
            }
            return self.range_label(bin - 1, 0.0);
        }
        self.range_label(bin, f64::NEG_INFINITY)
    }

    fn range_label(&self, slot: usize, lowest: f64) -> String {
        let lo = if slot == 0 {
            lowest
        } else {
            self.boundaries[slot - 1]
        };
        let hi = self.boundaries.get(slot).copied();
        let integral = |x: f64| x == libm::floor(x);
        match hi {
            Some(hi) if lo == f64::NEG_INFINITY => format!("<={}", fmt_num(hi)),
            Some(hi) => {
                if integral(lo) && integral(hi) {
                    // (lo, hi] over integers is lo+1 ..= hi
                    format!("{}-{}", fmt_num(lo + 1.0), fmt_num(hi))
                } else {
                    format!("{}<x<={}", fmt_num(lo), fmt_num(hi))
                }
            }
            None if lo == f64::NEG_INFINITY => String::from("all"),
            None => format!(">{}", fmt_num(lo)),
        }
    }

    /// The plain-text wire form: `kind;zero_separate;b1,b2,...`.
    pub fn to_text(&self) -> String {
        let bounds: Vec<String> = self.boundaries.iter().map(|b| fmt_num(*b)).collect();
        format!(
            "{};{};{}",
            self.kind.as_str(),
            self.zero_separate,
            bounds.join(",")
        )
    }

    pub fn from_text(text: &str) -> Result<Self, BinningParseError> {
        let mut parts = text.trim().splitn(3, ';');
        let kind = match parts.next() {
            Some("equal_frequency") => BinningKind::EqualFrequency,
            Some("fixed_cutpoints") => BinningKind::FixedCutpoints,
            other => {
                return Err(BinningParseError::BadKind(
                    other.unwrap_or_default().into(),
                ))
            }
        };
        let zero_separate = match parts.next() {
            Some("true") => true,
            Some("false") => false,
            other => {
                return Err(BinningParseError::BadFlag(
                    other.unwrap_or_default().into(),
                ))
            }
        };
        let bounds_text = parts.next().unwrap_or("");
        let mut boundaries = Vec::new();
        if !bounds_text.is_empty() {
            for tok in bounds_text.split(',') {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| BinningParseError::BadBoundary(tok.into()))?;
                boundaries.push(v);
            }
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BinningParseError::NotIncreasing);
        }
        Ok(Binning {
            kind,
            boundaries,
            zero_separate,
            degenerate: false,
        })
    }
}

fn fmt_num(x: f64) -> String {
    if x == libm::floor(x) && libm::fabs(x) < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinningParseError {
    BadKind(String),
    BadFlag(String),
    BadBoundary(String),
    NotIncreasing,
}

impl fmt::Display for BinningParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinningParseError::BadKind(k) => write!(f, "unknown binning kind `{k}`"),
            BinningParseError::BadFlag(v) => write!(f, "zero_separate flag must be true/false, got `{v}`"),
            BinningParseError::BadBoundary(b) => write!(f, "bad boundary `{b}`"),
            BinningParseError::NotIncreasing => write!(f, "boundaries must be strictly increasing"),
        }
    }
}

impl core::error::Error for BinningParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscretizeError {
    /// Fewer values than requested bins.
    TooFewValues { got: usize, requested: usize },
    /// Bin count must be at least 2.
    BadBinCount(usize),
}

impl fmt::Display for DiscretizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscretizeError::TooFewValues { got, requested } => {
                write!(f, "need at least {requested} values for {requested} bins, got {got}")
            }
            DiscretizeError::BadBinCount(k) => write!(f, "bin count must be >= 2, got {k}"),
        }
    }
}

impl core::error::Error for DiscretizeError {}

/// Unsupervised equal-frequency discretization into `k` bins.
///
/// Cuts may only sit between runs of equal values, so equal values never
/// split across bins. Among admissible cut positions near the ideal ones
/// (`i*n/k`), the combination keeping the most bins and the smallest
/// size spread is selected; for large `k` a self-correcting greedy pass is
/// used instead. Boundaries are midpoints between the adjacent distinct
/// values. With fewer than `k` distinct values the result has one bin per
/// distinct value and is marked `degenerate`.
pub fn equal_frequency_bins(values: &[u64], k: usize) -> Result<Binning, DiscretizeError> {
    if k < 2 {
        return Err(DiscretizeError::BadBinCount(k));
    }
    if values.len() < k {
        return Err(DiscretizeError::TooFewValues {
            got: values.len(),
            requested: k,
        });
    }
    let mut sorted: Vec<u64> = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();

    let mut distinct: Vec<u64> = sorted.clone();
    distinct.dedup();

    let midpoint = |a: u64, b: u64| (a as f64 + b as f64) / 2.0;

    if distinct.len() < k {
        let boundaries = distinct.windows(2).map(|w| midpoint(w[0], w[1])).collect();
        return Ok(Binning {
            kind: BinningKind::EqualFrequency,
            boundaries,
            zero_separate: false,
            degenerate: true,
        });
    }

    // Admissible cut positions: prefix indices where the value changes.
    let mut admissible: Vec<usize> = Vec::with_capacity(distinct.len());
    for p in 1..n {
        if sorted[p - 1] != sorted[p] {
            admissible.push(p);
        }
    }

    let cuts = if k <= 9 {
        best_cuts_exhaustive(&admissible, n, k)
    } else {
        greedy_cuts(&admissible, n, k)
    };

    let boundaries: Vec<f64> = cuts
        .iter()
        .map(|&c| midpoint(sorted[c - 1], sorted[c]))
        .collect();
    debug_assert!(boundaries.windows(2).all(|w| w[0] < w[1]));

    Ok(Binning {
        kind: BinningKind::EqualFrequency,
        boundaries,
        zero_separate: false,
        degenerate: false,
    })
}

/// Up to four admissible positions bracketing `ideal`.
fn near_candidates(admissible: &[usize], ideal: usize) -> Vec<usize> {
    let j = admissible.partition_point(|&p| p < ideal);
    let lo = j.saturating_sub(2);
    let hi = (j + 2).min(admissible.len());
    admissible[lo..hi].to_vec()
}

fn ideal_cut(n: usize, k: usize, i: usize) -> usize {
    (2 * i * n + k) / (2 * k) // round(i*n/k)
}

fn spread_of(cuts: &[usize], n: usize) -> usize {
    let mut max = 0usize;
    let mut min = usize::MAX;
    let mut prev = 0usize;
    for &c in cuts.iter().chain(core::iter::once(&n)) {
        let size = c - prev;
        max = max.max(size);
        min = min.min(size);
        prev = c;
    }
    max - min
}

/// Searches combinations of candidate positions around each ideal cut,
/// preferring full bin count, then minimal spread, then the lexicographically
/// smallest cut vector (keeps results deterministic).
fn best_cuts_exhaustive(admissible: &[usize], n: usize, k: usize) -> Vec<usize> {
    let candidate_sets: Vec<Vec<usize>> = (1..k)
        .map(|i| near_candidates(admissible, ideal_cut(n, k, i)))
        .collect();

    let mut best: Option<(usize, usize, Vec<usize>)> = None; // (bins lost, spread, cuts)
    let mut stack: Vec<usize> = Vec::with_capacity(k - 1);
    search(&candidate_sets, 0, &mut stack, &mut best, n, k);
    best.map(|(_, _, cuts)| cuts)
        .unwrap_or_else(|| greedy_cuts(admissible, n, k))
}

fn search(
    sets: &[Vec<usize>],
    depth: usize,
    stack: &mut Vec<usize>,
    best: &mut Option<(usize, usize, Vec<usize>)>,
    n: usize,
    k: usize,
) {
    if depth == sets.len() {
        let lost = (k - 1) - stack.len();
        let spread = spread_of(stack, n);
        let better = match best {
            None => true,
            Some((bl, bs, bc)) => (lost, spread, &*stack) < (*bl, *bs, bc),
        };
        if better {
            *best = Some((lost, spread, stack.clone()));
        }
        return;
    }
    for &cand in &sets[depth] {
        let last = stack.last().copied().unwrap_or(0);
        if cand > last {
            stack.push(cand);
            search(sets, depth + 1, stack, best, n, k);
            stack.pop();
        }
    }
    // allow dropping this cut (adjacent ideals may share one tie run)
    search(sets, depth + 1, stack, best, n, k);
}

/// Sequential fallback: each cut targets an even split of what remains, so
/// earlier displacement is compensated later instead of compounding.
fn greedy_cuts(admissible: &[usize], n: usize, k: usize) -> Vec<usize> {
    let mut cuts = Vec::with_capacity(k - 1);
    let mut prev = 0usize;
    for i in 0..k - 1 {
        let bins_left = k - i;
        let target = prev + (2 * (n - prev) + bins_left) / (2 * bins_left);
        let j = admissible.partition_point(|&p| p < target);
        let below = j.checked_sub(1).map(|x| admissible[x]).filter(|&p| p > prev);
        let above = admissible.get(j).copied().filter(|&p| p > prev);
        let pick = match (below, above) {
            (Some(b), Some(a)) => {
                if target - b <= a - target {
                    Some(b)
                } else {
                    Some(a)
                }
            }
            (Some(b), None) => Some(b),
            (None, Some(a)) => Some(a),
            (None, None) => None,
        };
        match pick {
            Some(p) if p < n => {
                cuts.push(p);
                prev = p;
            }
            _ => break,
        }
    }
    cuts
}

/// Fixed cut points at multiples of `step` up to `max_boundary`, with zero
/// in its own bin: `{0}, (0, step], (step, 2*step], ..., (max_boundary, inf)`.
pub fn fixed_cutpoint_bins(step: u64, max_boundary: u64) -> Binning {
    assert!(step >= 1, "step must be positive");
    let top = max_boundary.max(step);
    let boundaries = (1..)
        .map(|i| i * step)
        .take_while(|&b| b <= top)
        .map(|b| b as f64)
        .collect();
    Binning {
        kind: BinningKind::FixedCutpoints,
        boundaries,
        zero_separate: true,
        degenerate: false,
    }
}
