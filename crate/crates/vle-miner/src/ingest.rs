//! File ingestion: clickstream and assessment CSVs plus the plain-text
//! presentation config. Every data problem is reported with its line number.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;
use vle_core::model::{
    AssessmentRecord, ClickRecord, ConfigError, Dataset, DatasetError, PresentationConfig,
    StudentId, Vocabulary, VocabularyError,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("Io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("Csv: {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("MissingColumn: {path}: header lacks `{column}`")]
    MissingColumn { path: String, column: &'static str },
    #[error("EmptyStudentId: line {line}: empty id_student field")]
    EmptyStudentId { line: u64 },
    #[error("BadDayOffset: line {line}: `{value}` is not an integer day offset")]
    BadDayOffset { line: u64, value: String },
    #[error("NonIntegerClicks: line {line}: `{value}` is not an integer click count")]
    NonIntegerClicks { line: u64, value: String },
    #[error("NegativeClicks: line {line}: click count {value} is negative")]
    NegativeClicks { line: u64, value: i64 },
    #[error("UnknownContentType: line {line}: `{label}` is not in the content vocabulary")]
    UnknownContentType { line: u64, label: String },
    #[error("BadTmaIndex: line {line}: `{value}` is not a positive assignment index")]
    BadTmaIndex { line: u64, value: String },
    #[error("ScoreOutOfRange: line {line}: score `{value}` is outside 0..=100")]
    ScoreOutOfRange { line: u64, value: String },
    #[error("Dataset: {0}")]
    Dataset(#[from] DatasetError),
}

fn open_reader(path: &Path) -> Result<csv::Reader<fs::File>, IngestError> {
    let file = fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn column_index(
    reader: &mut csv::Reader<fs::File>,
    path: &Path,
    column: &'static str,
) -> Result<usize, IngestError> {
    let headers = reader.headers().map_err(|source| IngestError::Csv {
        path: path.display().to_string(),
        source,
    })?;
    headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| IngestError::MissingColumn {
            path: path.display().to_string(),
            column,
        })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

/// Loads the clickstream file (`id_student,date,activity_type,sum_click`).
/// Duplicate `(student, day, type)` rows are summed into one record.
pub fn load_clicks(
    path: &Path,
    config: &PresentationConfig,
) -> Result<Vec<ClickRecord>, IngestError> {
    let mut reader = open_reader(path)?;
    let col_student = column_index(&mut reader, path, "id_student")?;
    let col_date = column_index(&mut reader, path, "date")?;
    let col_type = column_index(&mut reader, path, "activity_type")?;
    let col_clicks = column_index(&mut reader, path, "sum_click")?;

    let mut merged: BTreeMap<(StudentId, i32, vle_core::model::ContentType), u64> =
        BTreeMap::new();
    for result in reader.records() {
        let record = result.map_err(|source| IngestError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        let line = record_line(&record);
        let field = |i: usize| record.get(i).unwrap_or_default();

        let student = field(col_student);
        if student.is_empty() {
            return Err(IngestError::EmptyStudentId { line });
        }
        let day: i32 = field(col_date)
            .parse()
            .map_err(|_| IngestError::BadDayOffset {
                line,
                value: field(col_date).into(),
            })?;
        let clicks: i64 =
            field(col_clicks)
                .parse()
                .map_err(|_| IngestError::NonIntegerClicks {
                    line,
                    value: field(col_clicks).into(),
                })?;
        if clicks < 0 {
            return Err(IngestError::NegativeClicks {
                line,
                value: clicks,
            });
        }
        let label = field(col_type);
        let content_type =
            config
                .vocabulary
                .get(label)
                .ok_or_else(|| IngestError::UnknownContentType {
                    line,
                    label: label.into(),
                })?;
        *merged
            .entry((StudentId::new(student), day, content_type))
            .or_insert(0) += clicks as u64;
    }

    Ok(merged
        .into_iter()
        .map(|((student, day_offset, content_type), total)| ClickRecord {
            student,
            day_offset,
            content_type,
            clicks: u32::try_from(total).unwrap_or(u32::MAX),
        })
        .collect())
}

/// Loads the assessment file (`id_student,assessment,score`); an empty score
/// field means the assignment was not submitted.
pub fn load_assessments(path: &Path) -> Result<Vec<AssessmentRecord>, IngestError> {
    let mut reader = open_reader(path)?;
    let col_student = column_index(&mut reader, path, "id_student")?;
    let col_tma = column_index(&mut reader, path, "assessment")?;
    let col_score = column_index(&mut reader, path, "score")?;

    let mut out = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|source| IngestError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        let line = record_line(&record);
        let field = |i: usize| record.get(i).unwrap_or_default();

        let student = field(col_student);
        if student.is_empty() {
            return Err(IngestError::EmptyStudentId { line });
        }
        let tma_index: u32 = field(col_tma)
            .parse()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| IngestError::BadTmaIndex {
                line,
                value: field(col_tma).into(),
            })?;
        let raw_score = field(col_score);
        let score = if raw_score.is_empty() {
            None
        } else {
            let value: i64 = raw_score.parse().map_err(|_| IngestError::ScoreOutOfRange {
                line,
                value: raw_score.into(),
            })?;
            if !(0..=100).contains(&value) {
                return Err(IngestError::ScoreOutOfRange {
                    line,
                    value: raw_score.into(),
                });
            }
            Some(value as u8)
        };
        out.push(AssessmentRecord {
            student: StudentId::new(student),
            tma_index,
            score,
        });
    }
    Ok(out)
}

/// Loads both files into a validated dataset.
pub fn load_dataset(
    clicks_path: &Path,
    assessments_path: &Path,
    config: PresentationConfig,
) -> Result<Dataset, IngestError> {
    let clicks = load_clicks(clicks_path, &config)?;
    let assessments = load_assessments(assessments_path)?;
    Ok(Dataset::new(clicks, assessments, config)?)
}

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("Io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("BadConfigLine: line {line}: expected `key=value`, got `{text}`")]
    BadLine { line: usize, text: String },
    #[error("UnknownConfigKey: line {line}: `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("BadConfigValue: line {line}: `{key}` cannot take `{value}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("Vocabulary: {0}")]
    Vocabulary(#[from] VocabularyError),
    #[error("Config: {0}")]
    Config(#[from] ConfigError),
}

/// Parses the plain-text presentation config: `key=value` lines with keys
/// `num_weeks`, `pass_threshold`, `tma_of_interest`, `content_types`
/// (comma-separated). Missing keys keep their defaults; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<PresentationConfig, ConfigFileError> {
    let defaults = PresentationConfig::default();
    let mut num_weeks = defaults.num_weeks;
    let mut pass_threshold = defaults.pass_threshold;
    let mut tma_of_interest = defaults.tma_of_interest;
    let mut vocabulary = defaults.vocabulary;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigFileError::BadLine {
            line: line_no,
            text: line.into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |k: &str, v: &str| ConfigFileError::BadValue {
            line: line_no,
            key: k.into(),
            value: v.into(),
        };
        match key {
            "num_weeks" => num_weeks = value.parse().map_err(|_| bad(key, value))?,
            "pass_threshold" => pass_threshold = value.parse().map_err(|_| bad(key, value))?,
            "tma_of_interest" => tma_of_interest = value.parse().map_err(|_| bad(key, value))?,
            "content_types" => {
                vocabulary = Vocabulary::new(value.split(',').map(str::trim))?;
            }
            other => {
                return Err(ConfigFileError::UnknownKey {
                    line: line_no,
                    key: other.into(),
                })
            }
        }
    }
    Ok(PresentationConfig::new(
        vocabulary,
        num_weeks,
        pass_threshold,
        tma_of_interest,
    )?)
}

pub fn load_config(path: &Path) -> Result<PresentationConfig, ConfigFileError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}
