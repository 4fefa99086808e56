//! Canonical data model: students, content types, click and assessment
//! records, presentation configuration and the immutable [`Dataset`] shared
//! by every analysis.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Opaque student identifier. Ordered so that every cohort-level map and
/// report iterates students deterministically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StudentId(String);

impl StudentId {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        debug_assert!(!id.is_empty(), "student ids must be non-empty");
        StudentId(id)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StudentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Interned content-type label; resolves to a name through the
/// [`Vocabulary`] it was created from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContentType(u16);

impl ContentType {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Crate-internal constructor for code that iterates feature-matrix
    /// columns, which are laid out in vocabulary order.
    pub(crate) fn from_index(idx: usize) -> ContentType {
        ContentType(idx as u16)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VocabularyError {
    Empty,
    DuplicateLabel(String),
    /// Labels flow into comma-separated files and graph labels, so a small
    /// character set is enforced up front.
    BadLabel(String),
}

impl fmt::Display for VocabularyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VocabularyError::Empty => write!(f, "content vocabulary is empty"),
            VocabularyError::DuplicateLabel(l) => write!(f, "duplicate content type `{l}`"),
            VocabularyError::BadLabel(l) => write!(
                f,
                "content type `{l}` must be non-empty and free of whitespace, commas, `|` and `+`"
            ),
        }
    }
}

impl core::error::Error for VocabularyError {}

/// The set of content-type labels a presentation recognizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    names: Vec<String>,
}

impl Vocabulary {
    pub fn new<I, S>(names: I) -> Result<Self, VocabularyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for name in names {
            let name = name.into();
            if name.is_empty()
                || name
                    .chars()
                    .any(|c| c.is_whitespace() || matches!(c, ',' | '|' | '+'))
            {
                return Err(VocabularyError::BadLabel(name));
            }
            if out.contains(&name) {
                return Err(VocabularyError::DuplicateLabel(name));
            }
            out.push(name);
        }
        if out.is_empty() {
            return Err(VocabularyError::Empty);
        }
        Ok(Vocabulary { names: out })
    }

    /// The default eleven content types.
    pub fn default_labels() -> Self {
        Vocabulary::new([
            "forum",
            "wiki",
            "resource",
            "quiz",
            "homepage",
            "subpage",
            "oucontent",
            "url",
            "glossary",
            "page",
            "questionnaire",
        ])
        .expect("default labels are valid")
    }

    pub fn get(&self, name: &str) -> Option<ContentType> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| ContentType(i as u16))
    }

    pub fn name(&self, ct: ContentType) -> &str {
        &self.names[ct.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ContentType> + '_ {
        (0..self.names.len()).map(|i| ContentType(i as u16))
    }

    pub fn labels(&self) -> &[String] {
        &self.names
    }
}

/// One aggregated click event: how many times a student touched a content
/// type on a given day, counted in days relative to the module start
/// (negative offsets are pre-course activity).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickRecord {
    pub student: StudentId,
    pub day_offset: i32,
    pub content_type: ContentType,
    pub clicks: u32,
}

/// Result row for one tutor-marked assignment. `score` is present exactly
/// when the assignment was submitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssessmentRecord {
    pub student: StudentId,
    pub tma_index: u32,
    pub score: Option<u8>,
}

impl AssessmentRecord {
    pub fn submitted(&self) -> bool {
        self.score.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    TooFewWeeks(u32),
    BadPassThreshold(u8),
    BadTmaIndex(u32),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::TooFewWeeks(w) => {
                write!(f, "num_weeks must be at least 5, got {w}")
            }
            ConfigError::BadPassThreshold(t) => {
                write!(f, "pass_threshold must be in 1..=100, got {t}")
            }
            ConfigError::BadTmaIndex(t) => write!(f, "tma_of_interest must be positive, got {t}"),
        }
    }
}

impl core::error::Error for ConfigError {}

/// Per-presentation settings shared across the pipeline.
///
/// Weeks run from 0 (pre-course) through `num_weeks` inclusive; activity past
/// the last week is capped into it rather than dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PresentationConfig {
    pub vocabulary: Vocabulary,
    pub num_weeks: u32,
    pub pass_threshold: u8,
    pub tma_of_interest: u32,
}

impl PresentationConfig {
    pub fn new(
        vocabulary: Vocabulary,
        num_weeks: u32,
        pass_threshold: u8,
        tma_of_interest: u32,
    ) -> Result<Self, ConfigError> {
        if num_weeks < 5 {
            return Err(ConfigError::TooFewWeeks(num_weeks));
        }
        if pass_threshold == 0 || pass_threshold > 100 {
            return Err(ConfigError::BadPassThreshold(pass_threshold));
        }
        if tma_of_interest == 0 {
            return Err(ConfigError::BadTmaIndex(tma_of_interest));
        }
        Ok(PresentationConfig {
            vocabulary,
            num_weeks,
            pass_threshold,
            tma_of_interest,
        })
    }
}

impl Default for PresentationConfig {
    fn default() -> Self {
        PresentationConfig {
            vocabulary: Vocabulary::default_labels(),
            num_weeks: 5,
            pass_threshold: 40,
            tma_of_interest: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetError {
    UnknownContentType { index: usize },
    DuplicateAssessment { student: StudentId, tma_index: u32 },
    ScoreOutOfRange { student: StudentId, score: u8 },
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::UnknownContentType { index } => {
                write!(f, "content type index {index} is outside the vocabulary")
            }
            DatasetError::DuplicateAssessment { student, tma_index } => {
                write!(f, "student {student} has two records for TMA {tma_index}")
            }
            DatasetError::ScoreOutOfRange { student, score } => {
                write!(f, "student {student} has score {score} outside 0..=100")
            }
        }
    }
}

impl core::error::Error for DatasetError {}

/// Immutable, validated input to every analysis.
///
/// Construction merges duplicate `(student, day, content type)` click rows by
/// summing their counts and derives the roster as the union of students seen
/// in either record collection. The value is safe to share read-only.
#[derive(Debug, Clone)]
pub struct Dataset {
    clicks: Vec<ClickRecord>,
    assessments: Vec<AssessmentRecord>,
    roster: BTreeSet<StudentId>,
    config: PresentationConfig,
}

impl Dataset {
    pub fn new(
        clicks: Vec<ClickRecord>,
        assessments: Vec<AssessmentRecord>,
        config: PresentationConfig,
    ) -> Result<Self, DatasetError> {
        let mut merged: BTreeMap<(StudentId, i32, ContentType), u64> = BTreeMap::new();
        for rec in clicks {
            if rec.content_type.index() >= config.vocabulary.len() {
                return Err(DatasetError::UnknownContentType {
                    index: rec.content_type.index(),
                });
            }
            *merged
                .entry((rec.student, rec.day_offset, rec.content_type))
                .or_insert(0) += u64::from(rec.clicks);
        }
        let clicks: Vec<ClickRecord> = merged
            .into_iter()
            .map(|((student, day_offset, content_type), total)| ClickRecord {
                student,
                day_offset,
                content_type,
                clicks: u32::try_from(total).unwrap_or(u32::MAX),
            })
            .collect();

        let mut seen: BTreeSet<(StudentId, u32)> = BTreeSet::new();
        for rec in &assessments {
            if let Some(score) = rec.score {
                if score > 100 {
                    return Err(DatasetError::ScoreOutOfRange {
                        student: rec.student.clone(),
                        score,
                    });
                }
            }
            if !seen.insert((rec.student.clone(), rec.tma_index)) {
                return Err(DatasetError::DuplicateAssessment {
                    student: rec.student.clone(),
                    tma_index: rec.tma_index,
                });
            }
        }

        let mut roster = BTreeSet::new();
        roster.extend(clicks.iter().map(|r| r.student.clone()));
        roster.extend(assessments.iter().map(|r| r.student.clone()));

        Ok(Dataset {
            clicks,
            assessments,
            roster,
            config,
        })
    }

    pub fn clicks(&self) -> &[ClickRecord] {
        &self.clicks
    }

    pub fn assessments(&self) -> &[AssessmentRecord] {
        &self.assessments
    }

    pub fn roster(&self) -> &BTreeSet<StudentId> {
        &self.roster
    }

    pub fn config(&self) -> &PresentationConfig {
        &self.config
    }

    pub fn total_clicks(&self) -> u64 {
        self.clicks.iter().map(|r| u64::from(r.clicks)).sum()
    }
}

/// Summary counts produced by [`validate`]; informational only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub students: usize,
    pub click_records: usize,
    pub assessment_records: usize,
    /// Distinct study weeks with at least one click.
    pub weeks_covered: usize,
    /// Students with click activity but no record for the TMA of interest;
    /// downstream they are labeled as not submitted.
    pub missing_assessment: Vec<StudentId>,
}

pub fn validate(dataset: &Dataset) -> ValidationReport {
    let config = dataset.config();
    let weeks: BTreeSet<u32> = dataset
        .clicks()
        .iter()
        .map(|r| crate::features::day_to_week(r.day_offset, config).0)
        .collect();

    let with_tma: BTreeSet<&StudentId> = dataset
        .assessments()
        .iter()
        .filter(|a| a.tma_index == config.tma_of_interest)
        .map(|a| &a.student)
        .collect();
    let mut missing: Vec<StudentId> = dataset
        .clicks()
        .iter()
        .map(|r| &r.student)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|s| !with_tma.contains(s))
        .cloned()
        .collect();
    missing.dedup();

    ValidationReport {
        students: dataset.roster().len(),
        click_records: dataset.clicks().len(),
        assessment_records: dataset.assessments().len(),
        weeks_covered: weeks.len(),
        missing_assessment: missing,
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "students: {}", self.students)?;
        writeln!(f, "click_records: {}", self.click_records)?;
        writeln!(f, "assessment_records: {}", self.assessment_records)?;
        writeln!(f, "weeks_covered: {}", self.weeks_covered)?;
        writeln!(
            f,
            "missing_assessment_for_tma: {}",
            self.missing_assessment.len()
        )?;
        for s in &self.missing_assessment {
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}
