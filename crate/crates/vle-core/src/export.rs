//! Text renderers: layered DOT graphs for transition models and CSV tables
//! for rules, reports, features and the raw record formats. All output is
//! UTF-8 with LF line endings and deterministic number formatting, so
//! repeated runs are byte-identical.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::bayes::{BayesModel, TypeSuccessTable};
use crate::features::{CohortFeatures, Outcome, StudyWeek};
use crate::guha::{Attribute, Hypothesis, QuantifierSpec};
use crate::markov::{ScenarioReport, TransitionModel};
use crate::model::{AssessmentRecord, ClickRecord, PresentationConfig, StudentId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExportError {
    /// The transition model has no defined row to draw.
    EmptyModel,
}

impl fmt::Display for ExportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExportError::EmptyModel => write!(f, "EmptyModel: nothing to render"),
        }
    }
}

impl core::error::Error for ExportError {}

/// Styling knobs for the DOT rendering. The color ramp endpoints (white at
/// probability 0, red at 1) and the one-rank-per-week layout are fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStyle {
    /// Edges below this probability are omitted.
    pub min_edge_probability: f64,
}

impl Default for GraphStyle {
    fn default() -> Self {
        GraphStyle {
            min_edge_probability: 0.01,
        }
    }
}

/// Linear white-to-red ramp: the red channel stays at 255 while green and
/// blue fall with probability, so higher probability is always deeper red.
fn edge_color(p: f64) -> String {
    let fade = (255.0 * (1.0 - p.clamp(0.0, 1.0))) as u8;
    format!("#ff{fade:02x}{fade:02x}")
}

/// Categorical fill colors for states, cycled by state index.
const NODE_PALETTE: [&str; 10] = [
    "#ffffff", "#ffe0b2", "#c8e6c9", "#bbdefb", "#e1bee7", "#fff9c4", "#ffccbc", "#d7ccc8",
    "#b2ebf2", "#f0f4c3",
];

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders a transition model as a layered digraph: one rank per week, one
/// node per occupied (week, state) pair, one edge per transition at or above
/// the style threshold. Edges only run from a week to the next, so the graph
/// is acyclic by construction.
pub fn to_dot(model: &TransitionModel, style: &GraphStyle) -> Result<String, ExportError> {
    let any_defined =
        (0..model.n_steps()).any(|s| (0..model.n_states()).any(|st| model.row_defined(s, st)));
    if !any_defined {
        return Err(ExportError::EmptyModel);
    }

    let positions = model.n_steps() + 1;
    let mut out = String::new();
    let _ = writeln!(out, "digraph transitions {{");
    let _ = writeln!(out, "  rankdir=TB;");
    let _ = writeln!(out, "  node [shape=box, style=filled];");

    for pos in 0..positions {
        let week = model.weeks.start as usize + pos;
        let occupied: Vec<usize> = (0..model.n_states())
            .filter(|&s| model.occupancy(pos, s) > 0)
            .collect();
        if occupied.is_empty() {
            continue;
        }
        let _ = writeln!(out, "  {{ rank=same;");
        for state in occupied {
            let _ = writeln!(
                out,
                "    {} [label={}, fillcolor=\"{}\"];",
                quote(&format!("w{week}_s{state}")),
                quote(&format!("w{week} {}", model.state_labels[state])),
                NODE_PALETTE[state % NODE_PALETTE.len()],
            );
        }
        let _ = writeln!(out, "  }}");
    }

    for step in 0..model.n_steps() {
        let week = model.weeks.start as usize + step;
        for from in 0..model.n_states() {
            for to in 0..model.n_states() {
                if model.counts[step][from][to] == 0 {
                    continue;
                }
                let p = model.probabilities[step][from][to];
                if p < style.min_edge_probability {
                    continue;
                }
                let _ = writeln!(
                    out,
                    "  {} -> {} [color=\"{}\", label=\"{:.6}\"];",
                    quote(&format!("w{week}_s{from}")),
                    quote(&format!("w{}_s{to}", week + 1)),
                    edge_color(p),
                    p,
                );
            }
        }
    }

    let _ = writeln!(out, "}}");
    Ok(out)
}

/// CSV table of mined hypotheses, preserving miner order. Confidence and
/// support use the shortest round-tripping float form so parsing the table
/// recovers the stored values exactly.
pub fn rules_to_table(
    hypotheses: &[Hypothesis],
    attributes: &[Attribute],
    spec: &QuantifierSpec,
) -> String {
    let mut out = String::from("antecedent,succedent,a,b,c,d,confidence,support,quantifier\n");
    for h in hypotheses {
        let _ = writeln!(
            out,
            "{},outcome={},{},{},{},{},{},{},{}",
            h.antecedent.render(attributes),
            h.succedent.label(),
            h.table.a,
            h.table.b,
            h.table.c,
            h.table.d,
            h.confidence,
            h.support,
            spec,
        );
    }
    out
}

/// CSV of per-step transitions; only observed (count > 0) cells are listed.
/// `week_step` is the source week of the step.
pub fn transitions_to_csv(model: &TransitionModel) -> String {
    let mut out = String::from("week_step,from_state,to_state,count,probability\n");
    for step in 0..model.n_steps() {
        let week = model.weeks.start as usize + step;
        for from in 0..model.n_states() {
            for to in 0..model.n_states() {
                let count = model.counts[step][from][to];
                if count == 0 {
                    continue;
                }
                let _ = writeln!(
                    out,
                    "{week},{},{},{count},{:.6}",
                    model.state_labels[from],
                    model.state_labels[to],
                    model.probabilities[step][from][to],
                );
            }
        }
    }
    out
}

/// CSV scenario report: percentages with one decimal, empty cells when no
/// student matched.
pub fn scenario_report_to_csv(report: &ScenarioReport) -> String {
    let mut out = String::from("scenario,matched,pct_not_submitted,pct_passed,pct_failed\n");
    for row in &report.rows {
        match row.shares {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "{},{},{:.1},{:.1},{:.1}",
                    row.name, row.matched, s.pct_not_submitted, s.pct_passed, s.pct_failed,
                );
            }
            None => {
                let _ = writeln!(out, "{},{},,,", row.name, row.matched);
            }
        }
    }
    out
}

/// Per-student weekly feature matrix with the outcome label.
pub fn features_to_csv(
    features: &CohortFeatures,
    outcomes: &BTreeMap<StudentId, Outcome>,
    config: &PresentationConfig,
) -> String {
    let vocab = &config.vocabulary;
    let mut out = String::from("id_student");
    for week in 0..=config.num_weeks {
        let _ = write!(out, ",w{week}_total");
        for label in vocab.labels() {
            let _ = write!(out, ",w{week}_{label}");
        }
    }
    out.push_str(",outcome\n");

    for (student, feats) in features.iter() {
        let _ = write!(out, "{student}");
        for week in 0..=config.num_weeks {
            let w = StudyWeek(week);
            let _ = write!(out, ",{}", feats.total_clicks(w));
            for ty in vocab.iter() {
                let _ = write!(out, ",{}", feats.type_clicks(w, ty));
            }
        }
        let outcome = outcomes
            .get(student)
            .map(|o| o.label())
            .unwrap_or("NotSubmitted");
        let _ = writeln!(out, ",{outcome}");
    }
    out
}

/// Bayes model export: a `prior_fail=` line followed by one row per flag.
pub fn bayes_model_to_text(model: &BayesModel, config: &PresentationConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "prior_fail={}", model.prior_fail);
    out.push_str("flag_id,p_given_fail,p_given_pass\n");
    for (i, flag) in model.flags.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6}",
            flag.label(&config.vocabulary),
            model.p_given_fail[i],
            model.p_given_pass[i],
        );
    }
    out
}

/// Per-student fail probabilities.
pub fn scores_to_csv(scores: &[(StudentId, f64)]) -> String {
    let mut out = String::from("id_student,p_fail\n");
    for (student, p) in scores {
        let _ = writeln!(out, "{student},{p:.6}");
    }
    out
}

/// Content-type success table with the significance verdict.
pub fn type_success_to_csv(
    table: &TypeSuccessTable,
    significant: &[crate::model::ContentType],
    config: &PresentationConfig,
) -> String {
    let mut out = String::from(
        "content_type,n_active,n_inactive,pass_rate_active,pass_rate_inactive,rate_difference,significant\n",
    );
    let fmt_rate = |r: Option<f64>| match r {
        Some(v) => format!("{v:.6}"),
        None => String::new(),
    };
    for row in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            config.vocabulary.name(row.content_type),
            row.n_active,
            row.n_inactive,
            fmt_rate(row.pass_rate_active),
            fmt_rate(row.pass_rate_inactive),
            fmt_rate(row.rate_difference),
            significant.contains(&row.content_type),
        );
    }
    out
}

/// Raw clickstream rows in the ingest file format.
pub fn clicks_to_csv(clicks: &[ClickRecord], config: &PresentationConfig) -> String {
    let mut out = String::from("id_student,date,activity_type,sum_click\n");
    for rec in clicks {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            rec.student,
            rec.day_offset,
            config.vocabulary.name(rec.content_type),
            rec.clicks,
        );
    }
    out
}

/// Raw assessment rows in the ingest file format (empty score means not
/// submitted).
pub fn assessments_to_csv(assessments: &[AssessmentRecord]) -> String {
    let mut out = String::from("id_student,assessment,score\n");
    for rec in assessments {
        match rec.score {
            Some(score) => {
                let _ = writeln!(out, "{},{},{}", rec.student, rec.tma_index, score);
            }
            None => {
                let _ = writeln!(out, "{},{},", rec.student, rec.tma_index);
            }
        }
    }
    out
}
