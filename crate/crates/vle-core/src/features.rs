//! Weekly feature families: per-student click totals, per-content-type
//! counts, activity flags, and the assignment outcome label.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{AssessmentRecord, ContentType, Dataset, PresentationConfig, StudentId};

/// Study week index. Week 0 is the pre-course period; week 1 starts on day 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StudyWeek(pub u32);

impl StudyWeek {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StudyWeek {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

/// Inclusive range of study weeks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeekRange {
    pub start: u32,
    pub end: u32,
}

impl WeekRange {
    pub fn new(start: u32, end: u32) -> Self {
        debug_assert!(start <= end);
        WeekRange { start, end }
    }

    pub fn iter(&self) -> impl Iterator<Item = StudyWeek> {
        (self.start..=self.end).map(StudyWeek)
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, week: StudyWeek) -> bool {
        (self.start..=self.end).contains(&week.0)
    }
}

impl fmt::Display for WeekRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// Maps a day offset to its study week: negative days collapse into week 0,
/// day `d >= 0` lands in week `d / 7 + 1`, capped at `num_weeks`.
pub fn day_to_week(day_offset: i32, config: &PresentationConfig) -> StudyWeek {
    if day_offset < 0 {
        return StudyWeek(0);
    }
    let week = day_offset as u32 / 7 + 1;
    StudyWeek(week.min(config.num_weeks))
}

/// One student's weekly activity: total clicks and per-content-type clicks
/// for every week 0..=num_weeks (absent weeks are explicit zeros), with
/// activity flags derived from the counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeeklyFeatures {
    totals: Vec<u64>,
    by_type: Vec<Vec<u64>>, // [week][content type]
}

impl WeeklyFeatures {
    fn zeroed(num_weeks: u32, n_types: usize) -> Self {
        let weeks = num_weeks as usize + 1;
        WeeklyFeatures {
            totals: vec![0; weeks],
            by_type: vec![vec![0; n_types]; weeks],
        }
    }

    pub fn total_clicks(&self, week: StudyWeek) -> u64 {
        self.totals[week.index()]
    }

    pub fn type_clicks(&self, week: StudyWeek, ty: ContentType) -> u64 {
        self.by_type[week.index()][ty.index()]
    }

    pub fn week_active(&self, week: StudyWeek) -> bool {
        self.total_clicks(week) > 0
    }

    pub fn type_active(&self, week: StudyWeek, ty: ContentType) -> bool {
        self.type_clicks(week, ty) > 0
    }

    /// Number of week slots (num_weeks + 1).
    pub fn num_week_slots(&self) -> usize {
        self.totals.len()
    }

    pub fn all_totals(&self) -> &[u64] {
        &self.totals
    }
}

/// Weekly features for a whole cohort, keyed by student in sorted order.
/// Every roster student is present, including all-zero ones.
#[derive(Debug, Clone)]
pub struct CohortFeatures {
    per_student: BTreeMap<StudentId, WeeklyFeatures>,
    num_weeks: u32,
    n_types: usize,
}

impl CohortFeatures {
    pub fn get(&self, student: &StudentId) -> Option<&WeeklyFeatures> {
        self.per_student.get(student)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StudentId, &WeeklyFeatures)> {
        self.per_student.iter()
    }

    pub fn len(&self) -> usize {
        self.per_student.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_student.is_empty()
    }

    pub fn num_weeks(&self) -> u32 {
        self.num_weeks
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }
}

/// Aggregates day-level click records into weekly features for every roster
/// student. Per-student work is independent; totals are order-insensitive
/// sums, so the result does not depend on record order.
pub fn aggregate_weekly(dataset: &Dataset) -> CohortFeatures {
    let config = dataset.config();
    let n_types = config.vocabulary.len();
    let mut per_student: BTreeMap<StudentId, WeeklyFeatures> = dataset
        .roster()
        .iter()
        .map(|s| (s.clone(), WeeklyFeatures::zeroed(config.num_weeks, n_types)))
        .collect();

    for rec in dataset.clicks() {
        let week = day_to_week(rec.day_offset, config);
        let feats = per_student
            .get_mut(&rec.student)
            .expect("roster contains every click's student");
        feats.totals[week.index()] += u64::from(rec.clicks);
        feats.by_type[week.index()][rec.content_type.index()] += u64::from(rec.clicks);
    }

    CohortFeatures {
        per_student,
        num_weeks: config.num_weeks,
        n_types,
    }
}

/// Assignment outcome for the TMA of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    NotSubmitted,
    Failed,
    Passed,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::NotSubmitted, Outcome::Failed, Outcome::Passed];

    pub fn index(self) -> usize {
        match self {
            Outcome::NotSubmitted => 0,
            Outcome::Failed => 1,
            Outcome::Passed => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::NotSubmitted => "NotSubmitted",
            Outcome::Failed => "Failed",
            Outcome::Passed => "Passed",
        }
    }

    pub fn parse(s: &str) -> Option<Outcome> {
        Outcome::ALL.into_iter().find(|o| o.label() == s)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Labels one student: no record (or an unsubmitted one) for the TMA of
/// interest is NotSubmitted, otherwise the score decides against
/// `pass_threshold`.
pub fn label_outcome(
    assessments: &[AssessmentRecord],
    student: &StudentId,
    config: &PresentationConfig,
) -> Outcome {
    let record = assessments
        .iter()
        .find(|a| a.student == *student && a.tma_index == config.tma_of_interest);
    match record.and_then(|r| r.score) {
        None => Outcome::NotSubmitted,
        Some(score) if u32::from(score) >= u32::from(config.pass_threshold) => Outcome::Passed,
        Some(_) => Outcome::Failed,
    }
}

/// Outcome labels for the whole roster, in sorted student order.
pub fn label_outcomes(dataset: &Dataset) -> BTreeMap<StudentId, Outcome> {
    dataset
        .roster()
        .iter()
        .map(|s| {
            (
                s.clone(),
                label_outcome(dataset.assessments(), s, dataset.config()),
            )
        })
        .collect()
}
