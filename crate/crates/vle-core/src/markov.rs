//! Week-indexed activity state analysis: state sequences over intensity bins
//! or content-type combinations, time-inhomogeneous transition estimation
//! (one matrix per week step), outcome-split models, and the scenario engine
//! for zero/non-zero weekly activity patterns.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::discretize::Binning;
use crate::features::{CohortFeatures, Outcome, StudyWeek, WeekRange, WeeklyFeatures};
use crate::model::{ContentType, StudentId, Vocabulary};
use crate::rng::KeyedRng;

/// Hard cap on the number of selected content types for combination state
/// spaces; 2^k states beyond this are too sparse to estimate.
pub const MAX_COMBINATION_TYPES: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkovError {
    EmptySequences,
    TooManyTypes { got: usize },
    MissingOutcome(StudentId),
    LengthMismatch,
    WeekOutOfRange { scenario: String, week: u32, max: u32 },
}

impl fmt::Display for MarkovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkovError::EmptySequences => write!(f, "EmptySequences: nothing to fit"),
            MarkovError::TooManyTypes { got } => write!(
                f,
                "TooManyTypes: at most {MAX_COMBINATION_TYPES} content types, got {got}"
            ),
            MarkovError::MissingOutcome(s) => write!(f, "MissingOutcome: student {s} is unlabeled"),
            MarkovError::LengthMismatch => write!(f, "LengthMismatch: sequences differ in length"),
            MarkovError::WeekOutOfRange { scenario, week, max } => write!(
                f,
                "WeekOutOfRange: scenario `{scenario}` touches week {week}, last week is {max}"
            ),
        }
    }
}

impl core::error::Error for MarkovError {}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpaceKind {
    /// States are the bins of a click-count binning.
    Intensity(Binning),
    /// States are all subsets of the selected content types.
    TypeCombination(Vec<ContentType>),
}

/// Ordered state labels plus the rule assigning a weekly state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub kind: StateSpaceKind,
    labels: Vec<String>,
}

impl StateSpace {
    pub fn intensity(binning: Binning) -> Self {
        let labels = (0..binning.bin_count()).map(|b| binning.label(b)).collect();
        StateSpace {
            kind: StateSpaceKind::Intensity(binning),
            labels,
        }
    }

    /// State space over subsets of `types`; state index is the bitmask of
    /// active types in the given order.
    pub fn type_combination(
        types: Vec<ContentType>,
        vocabulary: &Vocabulary,
    ) -> Result<Self, MarkovError> {
        if types.len() > MAX_COMBINATION_TYPES {
            return Err(MarkovError::TooManyTypes { got: types.len() });
        }
        let labels = (0..(1usize << types.len()))
            .map(|mask| {
                if mask == 0 {
                    "none".to_string()
                } else {
                    let names: Vec<&str> = types
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, t)| vocabulary.name(*t))
                        .collect();
                    names.join("+")
                }
            })
            .collect();
        Ok(StateSpace {
            kind: StateSpaceKind::TypeCombination(types),
            labels,
        })
    }

    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn state_of(&self, feats: &WeeklyFeatures, week: StudyWeek) -> usize {
        match &self.kind {
            StateSpaceKind::Intensity(binning) => binning.apply(feats.total_clicks(week)),
            StateSpaceKind::TypeCombination(types) => {
                let mut mask = 0usize;
                for (i, ty) in types.iter().enumerate() {
                    if feats.type_active(week, *ty) {
                        mask |= 1 << i;
                    }
                }
                mask
            }
        }
    }
}

/// One student's state per week over the analysed range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSequence {
    pub student: StudentId,
    pub states: Vec<usize>,
}

/// Builds one sequence per student, in sorted student order.
pub fn build_sequences(
    features: &CohortFeatures,
    space: &StateSpace,
    weeks: WeekRange,
) -> Vec<StateSequence> {
    features
        .iter()
        .map(|(student, feats)| StateSequence {
            student: student.clone(),
            states: weeks.iter().map(|w| space.state_of(feats, w)).collect(),
        })
        .collect()
}

/// Students with at least one zero-activity week in the range.
pub fn cohort_filter(features: &CohortFeatures, weeks: WeekRange) -> BTreeSet<StudentId> {
    features
        .iter()
        .filter(|(_, feats)| weeks.iter().any(|w| feats.total_clicks(w) == 0))
        .map(|(student, _)| student.clone())
        .collect()
}

/// Time-inhomogeneous transition model: one count/probability matrix per
/// week step. Rows with no outgoing observations are undefined (flagged, not
/// uniform); they correspond to states never occupied at that week.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    pub state_labels: Vec<String>,
    pub weeks: WeekRange,
    /// `counts[step][from][to]`; step `i` covers week `start+i -> start+i+1`.
    pub counts: Vec<Vec<Vec<u64>>>,
    /// Row-normalized `counts`; undefined rows are all zero.
    pub probabilities: Vec<Vec<Vec<f64>>>,
    pub n_sequences: usize,
}

impl TransitionModel {
    fn empty(space: &StateSpace, weeks: WeekRange) -> Self {
        let steps = weeks.len() - 1;
        let s = space.n_states();
        TransitionModel {
            state_labels: space.labels.clone(),
            weeks,
            counts: vec![vec![vec![0; s]; s]; steps],
            probabilities: vec![vec![vec![0.0; s]; s]; steps],
            n_sequences: 0,
        }
    }

    pub fn n_states(&self) -> usize {
        self.state_labels.len()
    }

    pub fn n_steps(&self) -> usize {
        self.counts.len()
    }

    /// A row is defined when the state was occupied at that step.
    pub fn row_defined(&self, step: usize, state: usize) -> bool {
        self.counts[step][state].iter().any(|&c| c > 0)
    }

    /// Occupancy count of a state at a week position `0..=n_steps`.
    pub fn occupancy(&self, position: usize, state: usize) -> u64 {
        if position < self.n_steps() {
            self.counts[position][state].iter().sum()
        } else if self.n_steps() == 0 {
            0
        } else {
            let last = self.n_steps() - 1;
            (0..self.n_states())
                .map(|from| self.counts[last][from][state])
                .sum()
        }
    }

    /// Simulates `n` sequences from the fitted model with a deterministic
    /// keyed stream. The initial state follows the empirical week-start
    /// occupancy; sampled walks only visit defined rows.
    pub fn sample_sequences(&self, n: usize, seed: u64) -> Vec<StateSequence> {
        let start_occ: Vec<f64> = (0..self.n_states())
            .map(|s| self.occupancy(0, s) as f64)
            .collect();
        (0..n)
            .map(|i| {
                let mut rng = KeyedRng::from_key(&[seed, 0x5A3B1E, i as u64]);
                let mut state = rng.categorical(&start_occ);
                let mut states = vec![state];
                for step in 0..self.n_steps() {
                    let row: Vec<f64> = self.counts[step][state]
                        .iter()
                        .map(|&c| c as f64)
                        .collect();
                    state = rng.categorical(&row);
                    states.push(state);
                }
                StateSequence {
                    student: StudentId::new(format!("sim{i:06}")),
                    states,
                }
            })
            .collect()
    }
}

/// Estimates per-step transition counts and row-normalized probabilities.
pub fn fit_transitions(
    sequences: &[StateSequence],
    space: &StateSpace,
    weeks: WeekRange,
) -> Result<TransitionModel, MarkovError> {
    if sequences.is_empty() {
        return Err(MarkovError::EmptySequences);
    }
    let len = weeks.len();
    if sequences.iter().any(|s| s.states.len() != len) {
        return Err(MarkovError::LengthMismatch);
    }
    let mut model = TransitionModel::empty(space, weeks);
    for seq in sequences {
        for (step, pair) in seq.states.windows(2).enumerate() {
            model.counts[step][pair[0]][pair[1]] += 1;
        }
    }
    for (step, matrix) in model.counts.iter().enumerate() {
        for (from, row) in matrix.iter().enumerate() {
            let total: u64 = row.iter().sum();
            if total > 0 {
                for (to, &c) in row.iter().enumerate() {
                    model.probabilities[step][from][to] = c as f64 / total as f64;
                }
            }
        }
    }
    model.n_sequences = sequences.len();
    Ok(model)
}

/// Fits one sub-model per requested outcome class on that class's sequences.
/// A class with no members yields an empty (all-undefined) model rather than
/// an error, so reports can still enumerate every class.
pub fn split_by_outcome(
    sequences: &[StateSequence],
    outcomes: &BTreeMap<StudentId, Outcome>,
    classes: &[Outcome],
    space: &StateSpace,
    weeks: WeekRange,
) -> Result<BTreeMap<Outcome, TransitionModel>, MarkovError> {
    let mut per_class: BTreeMap<Outcome, Vec<StateSequence>> =
        classes.iter().map(|&c| (c, Vec::new())).collect();
    for seq in sequences {
        let outcome = *outcomes
            .get(&seq.student)
            .ok_or_else(|| MarkovError::MissingOutcome(seq.student.clone()))?;
        if let Some(bucket) = per_class.get_mut(&outcome) {
            bucket.push(seq.clone());
        }
    }
    per_class
        .into_iter()
        .map(|(class, seqs)| {
            let model = if seqs.is_empty() {
                TransitionModel::empty(space, weeks)
            } else {
                fit_transitions(&seqs, space, weeks)?
            };
            Ok((class, model))
        })
        .collect()
}

/// Constraint on one week's total activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeekConstraint {
    Zero,
    NonZero,
    Any,
}

impl WeekConstraint {
    fn code(self) -> char {
        match self {
            WeekConstraint::Zero => 'Z',
            WeekConstraint::NonZero => 'N',
            WeekConstraint::Any => 'A',
        }
    }
}

/// A per-week zero/non-zero activity pattern, optionally requiring at least
/// one zero week inside a range.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    /// Weeks constrained to Zero or NonZero; unlisted weeks are Any.
    pub constraints: BTreeMap<u32, WeekConstraint>,
    pub exists_zero_in: Option<WeekRange>,
}

impl ScenarioSpec {
    pub fn new(
        name: impl Into<String>,
        constraints: impl IntoIterator<Item = (u32, WeekConstraint)>,
        exists_zero_in: Option<WeekRange>,
    ) -> Self {
        let constraints: BTreeMap<u32, WeekConstraint> = constraints
            .into_iter()
            .filter(|(_, c)| *c != WeekConstraint::Any)
            .collect();
        if let Some(range) = exists_zero_in {
            debug_assert!(
                range
                    .iter()
                    .all(|w| constraints.get(&w.0) != Some(&WeekConstraint::NonZero)),
                "exists-zero range must not overlap NonZero weeks"
            );
        }
        ScenarioSpec {
            name: name.into(),
            constraints,
            exists_zero_in,
        }
    }

    /// `zero only in lo..=hi` within the considered weeks: zero on every week
    /// of the span, non-zero on every other considered week.
    fn zero_only_in(name: &str, span: WeekRange, considered: WeekRange) -> Self {
        let constraints = considered.iter().map(|w| {
            if span.contains(w) {
                (w.0, WeekConstraint::Zero)
            } else {
                (w.0, WeekConstraint::NonZero)
            }
        });
        ScenarioSpec::new(name, constraints, None)
    }
}

/// True when every week constraint holds and, if required, some week in the
/// exists range has zero activity.
pub fn match_scenario(spec: &ScenarioSpec, feats: &WeeklyFeatures) -> bool {
    for (&week, constraint) in &spec.constraints {
        let total = feats.total_clicks(StudyWeek(week));
        let ok = match constraint {
            WeekConstraint::Zero => total == 0,
            WeekConstraint::NonZero => total > 0,
            WeekConstraint::Any => true,
        };
        if !ok {
            return false;
        }
    }
    if let Some(range) = spec.exists_zero_in {
        if !range.iter().any(|w| feats.total_clicks(w) == 0) {
            return false;
        }
    }
    true
}

/// The built-in twelve-scenario catalog over weeks 0-4.
pub fn default_catalog() -> Vec<ScenarioSpec> {
    let weeks = WeekRange::new(0, 4);
    let zo = |name: &str, lo: u32, hi: u32| ScenarioSpec::zero_only_in(name, WeekRange::new(lo, hi), weeks);
    vec![
        ScenarioSpec::new("zero in any of 0-4", [], Some(weeks)),
        zo("zero only in 1-4", 1, 4),
        zo("zero only in 2-4", 2, 4),
        zo("zero only in 3-4", 3, 4),
        zo("zero only in 4", 4, 4),
        zo("zero only in 0", 0, 0),
        zo("zero only in 0-1", 0, 1),
        zo("zero only in 0-2", 0, 2),
        zo("zero only in 0-3", 0, 3),
        ScenarioSpec::new(
            "zero in some of 0-3 and non-zero in 4",
            [(4, WeekConstraint::NonZero)],
            Some(WeekRange::new(0, 3)),
        ),
        ScenarioSpec::new(
            "zero in some of 0-2 and non-zero in 3-4",
            [(3, WeekConstraint::NonZero), (4, WeekConstraint::NonZero)],
            Some(WeekRange::new(0, 2)),
        ),
        ScenarioSpec::new(
            "zero in some of 0-1 and non-zero in 2-4",
            [
                (2, WeekConstraint::NonZero),
                (3, WeekConstraint::NonZero),
                (4, WeekConstraint::NonZero),
            ],
            Some(WeekRange::new(0, 1)),
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogParseError {
    BadLine { line: usize, text: String },
    BadWeekToken { line: usize, token: String },
    BadExistsRange { line: usize, token: String },
    NameHasComma { line: usize },
    ExistsOverlapsNonZero { line: usize, week: u32 },
}

impl fmt::Display for CatalogParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogParseError::BadLine { line, text } => {
                write!(f, "line {line}: expected `name | w0=Z ... | exists_zero=...`, got `{text}`")
            }
            CatalogParseError::BadWeekToken { line, token } => {
                write!(f, "line {line}: bad week token `{token}`")
            }
            CatalogParseError::BadExistsRange { line, token } => {
                write!(f, "line {line}: bad exists_zero range `{token}`")
            }
            CatalogParseError::NameHasComma { line } => {
                write!(f, "line {line}: scenario names must not contain commas")
            }
            CatalogParseError::ExistsOverlapsNonZero { line, week } => write!(
                f,
                "line {line}: exists_zero range covers week {week}, which is constrained non-zero"
            ),
        }
    }
}

impl core::error::Error for CatalogParseError {}

/// Parses a scenario catalog: one scenario per line,
/// `name | w0=Z w1=N w2=A ... | exists_zero=<lo-hi or ->`.
/// Blank lines and `#` comments are skipped.
pub fn parse_catalog(text: &str) -> Result<Vec<ScenarioSpec>, CatalogParseError> {
    let mut specs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CatalogParseError::BadLine {
                line: line_no,
                text: line.into(),
            });
        }
        let name = fields[0];
        if name.contains(',') {
            return Err(CatalogParseError::NameHasComma { line: line_no });
        }
        let mut constraints = BTreeMap::new();
        for token in fields[1].split_whitespace() {
            let bad = || CatalogParseError::BadWeekToken {
                line: line_no,
                token: token.into(),
            };
            let (week_part, code) = token.split_once('=').ok_or_else(bad)?;
            let week: u32 = week_part
                .strip_prefix('w')
                .ok_or_else(bad)?
                .parse()
                .map_err(|_| bad())?;
            let constraint = match code {
                "Z" => WeekConstraint::Zero,
                "N" => WeekConstraint::NonZero,
                "A" => WeekConstraint::Any,
                _ => return Err(bad()),
            };
            if constraint != WeekConstraint::Any {
                constraints.insert(week, constraint);
            }
        }
        let exists_token = fields[2]
            .strip_prefix("exists_zero=")
            .ok_or_else(|| CatalogParseError::BadLine {
                line: line_no,
                text: line.into(),
            })?;
        let exists_zero_in = if exists_token == "-" {
            None
        } else {
            let bad = || CatalogParseError::BadExistsRange {
                line: line_no,
                token: exists_token.into(),
            };
            let (lo, hi) = exists_token.split_once('-').ok_or_else(bad)?;
            let lo: u32 = lo.parse().map_err(|_| bad())?;
            let hi: u32 = hi.parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            let range = WeekRange::new(lo, hi);
            for week in range.iter() {
                if constraints.get(&week.0) == Some(&WeekConstraint::NonZero) {
                    return Err(CatalogParseError::ExistsOverlapsNonZero {
                        line: line_no,
                        week: week.0,
                    });
                }
            }
            Some(range)
        };
        specs.push(ScenarioSpec {
            name: name.into(),
            constraints,
            exists_zero_in,
        });
    }
    Ok(specs)
}

/// Renders scenarios in the catalog file format over the given weeks.
pub fn format_catalog(specs: &[ScenarioSpec], weeks: WeekRange) -> String {
    let mut out = String::new();
    for spec in specs {
        let cells: Vec<String> = weeks
            .iter()
            .map(|w| {
                let c = spec
                    .constraints
                    .get(&w.0)
                    .copied()
                    .unwrap_or(WeekConstraint::Any);
                format!("w{}={}", w.0, c.code())
            })
            .collect();
        let exists = match spec.exists_zero_in {
            None => "-".to_string(),
            Some(r) => format!("{}-{}", r.start, r.end),
        };
        out.push_str(&format!(
            "{} | {} | exists_zero={}\n",
            spec.name,
            cells.join(" "),
            exists
        ));
    }
    out
}

/// Outcome shares among the students matching one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeShares {
    pub pct_not_submitted: f64,
    pub pct_failed: f64,
    pub pct_passed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRow {
    pub name: String,
    pub matched: usize,
    /// Absent when no student matched.
    pub shares: Option<OutcomeShares>,
}

/// Per-scenario outcome breakdown over the zero-week-filtered cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub weeks: WeekRange,
    /// Size of the filtered cohort the percentages refer to.
    pub cohort_size: usize,
    pub rows: Vec<ScenarioRow>,
}

/// Evaluates every scenario over the cohort restricted to students with at
/// least one zero-activity week in the range (the population the scenario
/// catalog is defined for).
pub fn scenario_report(
    specs: &[ScenarioSpec],
    features: &CohortFeatures,
    outcomes: &BTreeMap<StudentId, Outcome>,
    weeks: WeekRange,
) -> Result<ScenarioReport, MarkovError> {
    for spec in specs {
        let touched = spec
            .constraints
            .keys()
            .copied()
            .chain(spec.exists_zero_in.into_iter().map(|r| r.end));
        for week in touched {
            if week > features.num_weeks() {
                return Err(MarkovError::WeekOutOfRange {
                    scenario: spec.name.clone(),
                    week,
                    max: features.num_weeks(),
                });
            }
        }
    }
    let cohort = cohort_filter(features, weeks);
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut matched = 0usize;
        let mut by_outcome = [0usize; 3];
        for student in &cohort {
            let feats = features.get(student).expect("cohort comes from features");
            if match_scenario(spec, feats) {
                let outcome = *outcomes
                    .get(student)
                    .ok_or_else(|| MarkovError::MissingOutcome(student.clone()))?;
                matched += 1;
                by_outcome[outcome.index()] += 1;
            }
        }
        let shares = (matched > 0).then(|| {
            let pct = |c: usize| 100.0 * c as f64 / matched as f64;
            OutcomeShares {
                pct_not_submitted: pct(by_outcome[Outcome::NotSubmitted.index()]),
                pct_failed: pct(by_outcome[Outcome::Failed.index()]),
                pct_passed: pct(by_outcome[Outcome::Passed.index()]),
            }
        });
        rows.push(ScenarioRow {
            name: spec.name.clone(),
            matched,
            shares,
        });
    }
    Ok(ScenarioReport {
        weeks,
        cohort_size: cohort.len(),
        rows,
    })
}
