//! Activity-type analysis: per-content-type success tables, a significance
//! filter for selecting influential content types, and a naive Bayes model
//! of assignment failure driven by the binary activity flags.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::features::{CohortFeatures, Outcome, StudyWeek, WeekRange};
use crate::model::{ContentType, StudentId, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BayesError {
    EmptyCohort,
    /// Fitting needs at least one student in each class.
    SingleClassCohort,
    FlagLengthMismatch { expected: usize, got: usize },
    /// A student in the feature set has no outcome label.
    MissingOutcome(StudentId),
}

impl fmt::Display for BayesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BayesError::EmptyCohort => write!(f, "EmptyCohort: no students to analyse"),
            BayesError::SingleClassCohort => write!(
                f,
                "SingleClassCohort: need both fail-class and pass-class students"
            ),
            BayesError::FlagLengthMismatch { expected, got } => {
                write!(f, "FlagLengthMismatch: model has {expected} flags, got {got}")
            }
            BayesError::MissingOutcome(s) => write!(f, "MissingOutcome: student {s} is unlabeled"),
        }
    }
}

impl core::error::Error for BayesError {}

/// Which outcomes count as the fail class when scoring risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailClass {
    /// NotSubmitted and Failed both count as failing (default).
    NotSubmittedOrFailed,
    /// Only NotSubmitted counts as failing.
    NotSubmittedOnly,
}

impl FailClass {
    pub fn is_fail(self, outcome: Outcome) -> bool {
        match self {
            FailClass::NotSubmittedOrFailed => {
                matches!(outcome, Outcome::NotSubmitted | Outcome::Failed)
            }
            FailClass::NotSubmittedOnly => matches!(outcome, Outcome::NotSubmitted),
        }
    }
}

/// Activity/inactivity success split for one content type over a week range.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSuccessRow {
    pub content_type: ContentType,
    pub n_active: usize,
    pub n_inactive: usize,
    pub passed_active: usize,
    pub passed_inactive: usize,
    /// Pass rate among active students; `None` when the group is empty.
    pub pass_rate_active: Option<f64>,
    pub pass_rate_inactive: Option<f64>,
    /// active minus inactive pass rate, when both are defined.
    pub rate_difference: Option<f64>,
}

/// Success rates by content-type activity over a week range. A student is
/// "active" in a type when active in it during at least one of the weeks.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSuccessTable {
    pub weeks: WeekRange,
    pub cohort_size: usize,
    pub rows: Vec<TypeSuccessRow>,
}

pub fn type_success_table(
    features: &CohortFeatures,
    outcomes: &BTreeMap<StudentId, Outcome>,
    weeks: WeekRange,
) -> Result<TypeSuccessTable, BayesError> {
    if features.is_empty() {
        return Err(BayesError::EmptyCohort);
    }
    let n_types = features.n_types();
    let mut rows = Vec::with_capacity(n_types);
    for ty_idx in 0..n_types {
        let ty = ContentType::from_index(ty_idx);
        let mut n_active = 0usize;
        let mut n_inactive = 0usize;
        let mut passed_active = 0usize;
        let mut passed_inactive = 0usize;
        for (student, feats) in features.iter() {
            let outcome = *outcomes
                .get(student)
                .ok_or_else(|| BayesError::MissingOutcome(student.clone()))?;
            let active = weeks.iter().any(|w| feats.type_active(w, ty));
            let passed = outcome == Outcome::Passed;
            if active {
                n_active += 1;
                passed_active += usize::from(passed);
            } else {
                n_inactive += 1;
                passed_inactive += usize::from(passed);
            }
        }
        let rate = |passed: usize, n: usize| {
            if n == 0 {
                None
            } else {
                Some(passed as f64 / n as f64)
            }
        };
        let pass_rate_active = rate(passed_active, n_active);
        let pass_rate_inactive = rate(passed_inactive, n_inactive);
        let rate_difference = match (pass_rate_active, pass_rate_inactive) {
            (Some(a), Some(i)) => Some(a - i),
            _ => None,
        };
        rows.push(TypeSuccessRow {
            content_type: ty,
            n_active,
            n_inactive,
            passed_active,
            passed_inactive,
            pass_rate_active,
            pass_rate_inactive,
            rate_difference,
        });
    }
    Ok(TypeSuccessTable {
        weeks,
        cohort_size: features.len(),
        rows,
    })
}

/// Two-proportion z statistic for the activity split of one row, when both
/// groups are non-empty.
pub fn two_proportion_z(row: &TypeSuccessRow) -> Option<f64> {
    if row.n_active == 0 || row.n_inactive == 0 {
        return None;
    }
    let n1 = row.n_active as f64;
    let n2 = row.n_inactive as f64;
    let p1 = row.passed_active as f64 / n1;
    let p2 = row.passed_inactive as f64 / n2;
    let pooled = (row.passed_active + row.passed_inactive) as f64 / (n1 + n2);
    let se = libm::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
    if se == 0.0 {
        // both rates identical at 0 or 1; no evidence of a difference
        return Some(0.0);
    }
    Some((p1 - p2) / se)
}

/// Two-sided p-value for a standard normal statistic.
fn z_p_value(z: f64) -> f64 {
    libm::erfc(libm::fabs(z) / core::f64::consts::SQRT_2)
}

/// Content types whose activity split shows a significant pass-rate
/// difference (two-proportion z-test at `alpha`, two-sided), with both
/// groups at least `min_group` strong. Returned in vocabulary order.
pub fn select_significant_types(
    table: &TypeSuccessTable,
    alpha: f64,
    min_group: usize,
) -> Vec<ContentType> {
    table
        .rows
        .iter()
        .filter(|row| row.n_active >= min_group && row.n_inactive >= min_group)
        .filter(|row| match two_proportion_z(row) {
            Some(z) => z_p_value(z) < alpha,
            None => false,
        })
        .map(|row| row.content_type)
        .collect()
}

/// One binary activity flag: whole-week activity or activity in a specific
/// content type during a week.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlagId {
    pub week: StudyWeek,
    pub content_type: Option<ContentType>,
}

impl FlagId {
    pub fn label(&self, vocabulary: &Vocabulary) -> String {
        match self.content_type {
            None => format!("{}_active", self.week),
            Some(ty) => format!("{}_{}", self.week, vocabulary.name(ty)),
        }
    }

    pub fn value(&self, feats: &crate::features::WeeklyFeatures) -> bool {
        match self.content_type {
            None => feats.week_active(self.week),
            Some(ty) => feats.type_active(self.week, ty),
        }
    }
}

/// All week flags plus all (week, content type) flags over a range, in
/// (week, type) order.
pub fn default_flag_selection(weeks: WeekRange, vocabulary: &Vocabulary) -> Vec<FlagId> {
    let mut flags = Vec::new();
    for week in weeks.iter() {
        flags.push(FlagId {
            week,
            content_type: None,
        });
        for ty in vocabulary.iter() {
            flags.push(FlagId {
                week,
                content_type: Some(ty),
            });
        }
    }
    flags
}

/// Naive Bayes over binary activity flags with add-one smoothing. All stored
/// probabilities are strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BayesModel {
    pub fail_class: FailClass,
    pub prior_fail: f64,
    pub flags: Vec<FlagId>,
    pub p_given_fail: Vec<f64>,
    pub p_given_pass: Vec<f64>,
}

/// Fits flag conditionals per class with Laplace smoothing:
/// `p(f=1|c) = (count(f=1, c) + 1) / (count(c) + 2)`.
pub fn fit_bayes(
    features: &CohortFeatures,
    outcomes: &BTreeMap<StudentId, Outcome>,
    flags: &[FlagId],
    fail_class: FailClass,
) -> Result<BayesModel, BayesError> {
    let mut n_fail = 0usize;
    let mut n_pass = 0usize;
    let mut fail_counts = alloc::vec![0usize; flags.len()];
    let mut pass_counts = alloc::vec![0usize; flags.len()];

    for (student, feats) in features.iter() {
        let outcome = *outcomes
            .get(student)
            .ok_or_else(|| BayesError::MissingOutcome(student.clone()))?;
        let is_fail = fail_class.is_fail(outcome);
        if is_fail {
            n_fail += 1;
        } else {
            n_pass += 1;
        }
        for (i, flag) in flags.iter().enumerate() {
            if flag.value(feats) {
                if is_fail {
                    fail_counts[i] += 1;
                } else {
                    pass_counts[i] += 1;
                }
            }
        }
    }

    if n_fail == 0 || n_pass == 0 {
        return Err(BayesError::SingleClassCohort);
    }

    let smooth = |count: usize, total: usize| (count as f64 + 1.0) / (total as f64 + 2.0);
    Ok(BayesModel {
        fail_class,
        prior_fail: n_fail as f64 / (n_fail + n_pass) as f64,
        flags: flags.to_vec(),
        p_given_fail: fail_counts.iter().map(|&c| smooth(c, n_fail)).collect(),
        p_given_pass: pass_counts.iter().map(|&c| smooth(c, n_pass)).collect(),
    })
}

impl BayesModel {
    /// Posterior probability of the fail class given a flag vector,
    /// accumulated in log space. The pass posterior is the exact complement.
    pub fn posterior(&self, flags: &[bool]) -> Result<(f64, f64), BayesError> {
        if flags.len() != self.flags.len() {
            return Err(BayesError::FlagLengthMismatch {
                expected: self.flags.len(),
                got: flags.len(),
            });
        }
        let mut log_fail = libm::log(self.prior_fail);
        let mut log_pass = libm::log(1.0 - self.prior_fail);
        for (i, &set) in flags.iter().enumerate() {
            let (pf, pp) = (self.p_given_fail[i], self.p_given_pass[i]);
            if set {
                log_fail += libm::log(pf);
                log_pass += libm::log(pp);
            } else {
                log_fail += libm::log(1.0 - pf);
                log_pass += libm::log(1.0 - pp);
            }
        }
        // logistic of the log-odds, stable for large |delta|
        let delta = log_pass - log_fail;
        let p_fail = if delta >= 0.0 {
            let e = libm::exp(-delta);
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + libm::exp(delta))
        };
        // smoothing keeps every factor inside (0,1), but guard the rounding
        let p_fail = p_fail.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        Ok((p_fail, 1.0 - p_fail))
    }

    /// Convenience accessor for the fail posterior alone.
    pub fn fail_probability(&self, flags: &[bool]) -> Result<f64, BayesError> {
        self.posterior(flags).map(|(f, _)| f)
    }

    /// Flag vector for one student's features, in model flag order.
    pub fn flag_vector(&self, feats: &crate::features::WeeklyFeatures) -> Vec<bool> {
        self.flags.iter().map(|f| f.value(feats)).collect()
    }
}
