//! JSON form of the cohort generator spec and the ground-truth directory
//! the `generate` subcommand emits next to its datasets.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vle_core::bayes::{FailClass, FlagId};
use vle_core::datagen::{ArchetypeSpec, CohortSpec, GroundTruth};
use vle_core::discretize::fixed_cutpoint_bins;
use vle_core::features::{Outcome, StudyWeek};
use vle_core::model::{PresentationConfig, Vocabulary};

#[derive(Debug, Error)]
pub enum SpecFileError {
    #[error("Io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("BadSpecFile: {0}")]
    Json(#[from] serde_json::Error),
    #[error("BadSpecFile: {0}")]
    Vocabulary(#[from] vle_core::model::VocabularyError),
    #[error("BadSpecFile: {0}")]
    Config(#[from] vle_core::model::ConfigError),
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SpecFile {
    pub n_students: usize,
    pub seed: u64,
    #[serde(default)]
    pub num_weeks: Option<u32>,
    #[serde(default)]
    pub pass_threshold: Option<u8>,
    #[serde(default)]
    pub tma_of_interest: Option<u32>,
    #[serde(default)]
    pub content_types: Option<Vec<String>>,
    pub archetypes: Vec<ArchetypeFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ArchetypeFile {
    pub name: String,
    pub weight: f64,
    pub zero_prob: Vec<f64>,
    pub mean_active_clicks: Vec<f64>,
    pub type_propensity: Vec<f64>,
    /// `[not_submitted, failed, passed]`
    pub outcome_dist: [f64; 3],
}

impl SpecFile {
    pub fn into_spec(self) -> Result<CohortSpec, SpecFileError> {
        let defaults = PresentationConfig::default();
        let vocabulary = match self.content_types {
            Some(labels) => Vocabulary::new(labels)?,
            None => defaults.vocabulary,
        };
        let config = PresentationConfig::new(
            vocabulary,
            self.num_weeks.unwrap_or(defaults.num_weeks),
            self.pass_threshold.unwrap_or(defaults.pass_threshold),
            self.tma_of_interest.unwrap_or(defaults.tma_of_interest),
        )?;
        Ok(CohortSpec {
            config,
            n_students: self.n_students,
            seed: self.seed,
            archetypes: self
                .archetypes
                .into_iter()
                .map(|a| ArchetypeSpec {
                    name: a.name,
                    weight: a.weight,
                    zero_prob: a.zero_prob,
                    mean_active_clicks: a.mean_active_clicks,
                    type_propensity: a.type_propensity,
                    outcome_dist: a.outcome_dist,
                })
                .collect(),
        })
    }

    pub fn from_spec(spec: &CohortSpec) -> SpecFile {
        SpecFile {
            n_students: spec.n_students,
            seed: spec.seed,
            num_weeks: Some(spec.config.num_weeks),
            pass_threshold: Some(spec.config.pass_threshold),
            tma_of_interest: Some(spec.config.tma_of_interest),
            content_types: Some(spec.config.vocabulary.labels().to_vec()),
            archetypes: spec
                .archetypes
                .iter()
                .map(|a| ArchetypeFile {
                    name: a.name.clone(),
                    weight: a.weight,
                    zero_prob: a.zero_prob.clone(),
                    mean_active_clicks: a.mean_active_clicks.clone(),
                    type_propensity: a.type_propensity.clone(),
                    outcome_dist: a.outcome_dist,
                })
                .collect(),
        }
    }
}

pub fn load_spec(path: &Path) -> Result<CohortSpec, SpecFileError> {
    let text = fs::read_to_string(path).map_err(|source| SpecFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: SpecFile = serde_json::from_str(&text)?;
    file.into_spec()
}

pub fn spec_to_json(spec: &CohortSpec) -> String {
    let mut json = serde_json::to_string_pretty(&SpecFile::from_spec(spec))
        .expect("spec serialization cannot fail");
    json.push('\n');
    json
}

/// Renders the analytic ground-truth files: the spec echo, step-30 mixture
/// transition matrices, flag conditionals for every week/type flag, outcome
/// rates and the realized per-student truths.
pub fn ground_truth_files(truth: &GroundTruth) -> Vec<(&'static str, String)> {
    let spec = &truth.spec;
    let mut files = Vec::new();

    files.push(("spec.json", spec_to_json(spec)));

    let binning = fixed_cutpoint_bins(30, 90);
    let labels: Vec<String> = (0..binning.bin_count()).map(|b| binning.label(b)).collect();
    let matrices = spec.mixture_transitions(&binning);
    let mut out = String::from("week_step,from_state,to_state,probability\n");
    for (step, matrix) in matrices.iter().enumerate() {
        for (from, row) in matrix.iter().enumerate() {
            if row.iter().all(|&p| p == 0.0) {
                continue;
            }
            for (to, &p) in row.iter().enumerate() {
                let _ = writeln!(out, "{step},{},{},{p:.6}", labels[from], labels[to]);
            }
        }
    }
    files.push(("transitions_step30.csv", out));

    let mut out = String::from("flag_id,p_given_fail,p_given_pass\n");
    for week in 0..=spec.config.num_weeks {
        let mut flags = vec![FlagId {
            week: StudyWeek(week),
            content_type: None,
        }];
        flags.extend(spec.config.vocabulary.iter().map(|ty| FlagId {
            week: StudyWeek(week),
            content_type: Some(ty),
        }));
        for flag in flags {
            let fail = spec.flag_conditional(&flag, FailClass::NotSubmittedOrFailed, true);
            let pass = spec.flag_conditional(&flag, FailClass::NotSubmittedOrFailed, false);
            let _ = writeln!(
                out,
                "{},{fail:.6},{pass:.6}",
                flag.label(&spec.config.vocabulary)
            );
        }
    }
    files.push(("flag_conditionals.csv", out));

    let rates = spec.outcome_rates();
    let mut out = String::from("outcome,rate\n");
    for outcome in Outcome::ALL {
        let _ = writeln!(out, "{},{:.6}", outcome.label(), rates[outcome.index()]);
    }
    files.push(("outcome_rates.csv", out));

    let mut out = String::from("id_student,archetype,outcome");
    for week in 0..=spec.config.num_weeks {
        let _ = write!(out, ",w{week}_total");
    }
    out.push('\n');
    for st in &truth.students {
        let _ = write!(
            out,
            "{},{},{}",
            st.student,
            spec.archetypes[st.archetype].name,
            st.outcome.label()
        );
        for total in &st.weekly_totals {
            let _ = write!(out, ",{total}");
        }
        out.push('\n');
    }
    files.push(("students.csv", out));

    files
}

#[cfg(test)]
mod tests {
    use super::*;
    use vle_core::datagen::{default_spec, generate};

    #[test]
    fn spec_json_round_trips() {
        let spec = default_spec(7, 100);
        let json = spec_to_json(&spec);
        let parsed: SpecFile = serde_json::from_str(&json).unwrap();
        let back = parsed.into_spec().unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn minimal_spec_file_uses_defaults() {
        let json = r#"{
            "n_students": 5,
            "seed": 3,
            "archetypes": [{
                "name": "only",
                "weight": 1.0,
                "zero_prob": [0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
                "mean_active_clicks": [10, 10, 10, 10, 10, 10],
                "type_propensity": [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
                "outcome_dist": [0.3, 0.2, 0.5]
            }]
        }"#;
        let file: SpecFile = serde_json::from_str(json).unwrap();
        let spec = file.into_spec().unwrap();
        assert_eq!(spec.config.num_weeks, 5);
        assert_eq!(spec.config.pass_threshold, 40);
        spec.validate().unwrap();
    }

    #[test]
    fn ground_truth_files_have_expected_shapes() {
        let spec = default_spec(7, 20);
        let (_, truth) = generate(&spec).unwrap();
        let files = ground_truth_files(&truth);
        let names: Vec<&str> = files.iter().map(|(n, _)| *n).collect();
        assert_eq!(
            names,
            [
                "spec.json",
                "transitions_step30.csv",
                "flag_conditionals.csv",
                "outcome_rates.csv",
                "students.csv"
            ]
        );
        let students = &files[4].1;
        assert_eq!(students.lines().count(), 21, "header + 20 students");
        let conditionals = &files[2].1;
        // 6 weeks x (1 week flag + 11 type flags) + header
        assert_eq!(conditionals.lines().count(), 1 + 6 * 12);
    }
}
