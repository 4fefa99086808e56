//! Subcommand front end. Every subcommand is a pure function of its input
//! files, flags and seed: outputs (including the run manifest) are
//! byte-identical across reruns and thread counts.
//!
//! Exit codes: 0 success, 1 data errors (with a line-numbered diagnostic on
//! stderr), 2 usage errors (bad flags or flag grammar, handled by clap).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use vle_core::bayes::{
    default_flag_selection, fit_bayes, select_significant_types, type_success_table, FailClass,
};
use vle_core::datagen::default_spec;
use vle_core::discretize::fixed_cutpoint_bins;
use vle_core::export::{
    assessments_to_csv, bayes_model_to_text, clicks_to_csv, features_to_csv, rules_to_table,
    scenario_report_to_csv, scores_to_csv, to_dot, transitions_to_csv, type_success_to_csv,
    GraphStyle,
};
use vle_core::features::{aggregate_weekly, label_outcomes, Outcome, WeekRange};
use vle_core::guha::{default_attribute_space, mine_assoc, CategoricalMatrix, QuantifierSpec};
use vle_core::markov::{
    build_sequences, default_catalog, fit_transitions, format_catalog, parse_catalog,
    scenario_report, split_by_outcome, StateSpace, TransitionModel,
};
use vle_core::model::{Dataset, PresentationConfig, StudentId, Vocabulary};

use crate::ingest;
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::parallel;
use crate::rules_json::rules_to_json;
use crate::spec_file;
use crate::transitions::load_transitions;

/// Analyse weekly online-learning activity: validate and aggregate click
/// logs, score at-risk students, mine association rules, fit weekly
/// transition models and evaluate zero-activity scenarios.
#[derive(Debug, Parser)]
#[command(name = "vle-miner", version, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load both input files and report roster, record and coverage counts.
    IngestCheck {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Export the weekly feature matrix with outcome labels.
    Features {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Content-type success analysis and Bayes at-risk scoring.
    Bayes {
        #[command(flatten)]
        data: DataArgs,
        /// Weeks to take activity flags from.
        #[arg(long, default_value = "0-4", value_parser = parse_week_range)]
        weeks: WeekRange,
        /// Significance level for the content-type selection.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Minimum active/inactive group size for the selection test.
        #[arg(long, default_value_t = 30)]
        min_group: usize,
        /// Treat only non-submission as failing (default counts failed
        /// scores too).
        #[arg(long)]
        not_submitted_only: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Mine association rules between activity attributes and outcomes.
    Guha {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "0-4", value_parser = parse_week_range)]
        weeks: WeekRange,
        /// Quantifier: `fi:<min-confidence>:<base>` (founded implication)
        /// or `aa:<ratio>:<base>` (above average).
        #[arg(long, default_value = "fi:0.9:20", value_parser = parse_quantifier)]
        quantifier: QuantifierSpec,
        /// Maximum antecedent length.
        #[arg(long, default_value_t = 3)]
        max_length: usize,
        /// Equal-frequency bins for weekly click totals.
        #[arg(long, default_value_t = 5)]
        bins: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fit weekly transition models and render them as layered graphs.
    Markov {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "0-5", value_parser = parse_week_range)]
        weeks: WeekRange,
        /// State space: `intensity:<step>` (count bins at multiples of the
        /// step, zero separate) or `types:<t1,t2,...>` (activity-type
        /// combinations).
        #[arg(long, default_value = "intensity:30", value_parser = parse_space)]
        space: SpaceArg,
        /// Also fit one model per outcome class (NotSubmitted and Passed).
        #[arg(long)]
        split_outcome: bool,
        /// Omit graph edges below this probability.
        #[arg(long, default_value_t = 0.01)]
        min_edge_prob: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Evaluate zero-activity week scenarios over the filtered cohort.
    Scenarios {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "0-4", value_parser = parse_week_range)]
        weeks: WeekRange,
        /// Scenario catalog file; the built-in twelve-scenario catalog is
        /// used when absent.
        #[arg(long)]
        scenario_catalog: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Re-render a transitions CSV as a layered DOT graph.
    RenderDot {
        /// Transitions CSV produced by the markov subcommand.
        #[arg(long)]
        transitions: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        min_edge_prob: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Generate a synthetic cohort with ground-truth files.
    Generate {
        /// `default` or a path to a cohort spec JSON file.
        #[arg(long, default_value = "default")]
        spec: String,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the spec's number of students.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Clickstream CSV (`id_student,date,activity_type,sum_click`).
    #[arg(long)]
    clicks: PathBuf,
    /// Assessment CSV (`id_student,assessment,score`).
    #[arg(long)]
    assessments: PathBuf,
    /// Presentation config (key=value lines); defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Assignment of interest, overriding the config.
    #[arg(long)]
    tma: Option<u32>,
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone)]
enum SpaceArg {
    Intensity { step: u64 },
    Types(Vec<String>),
}

impl std::fmt::Display for SpaceArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpaceArg::Intensity { step } => write!(f, "intensity:{step}"),
            SpaceArg::Types(names) => write!(f, "types:{}", names.join(",")),
        }
    }
}

fn parse_week_range(text: &str) -> Result<WeekRange, String> {
    let (a, b) = text
        .split_once('-')
        .ok_or_else(|| format!("expected `A-B`, got `{text}`"))?;
    let start: u32 = a.trim().parse().map_err(|_| format!("bad week `{a}`"))?;
    let end: u32 = b.trim().parse().map_err(|_| format!("bad week `{b}`"))?;
    if start > end {
        return Err(format!("range start {start} exceeds end {end}"));
    }
    Ok(WeekRange::new(start, end))
}

fn parse_quantifier(text: &str) -> Result<QuantifierSpec, String> {
    QuantifierSpec::parse(text).map_err(|e| e.to_string())
}

fn parse_space(text: &str) -> Result<SpaceArg, String> {
    if let Some(rest) = text.strip_prefix("intensity:") {
        let step: u64 = rest
            .parse()
            .map_err(|_| format!("bad intensity step `{rest}`"))?;
        if step == 0 {
            return Err("intensity step must be positive".into());
        }
        return Ok(SpaceArg::Intensity { step });
    }
    if let Some(rest) = text.strip_prefix("types:") {
        let names: Vec<String> = rest
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if names.is_empty() {
            return Err("types list is empty".into());
        }
        return Ok(SpaceArg::Types(names));
    }
    Err(format!(
        "expected `intensity:<step>` or `types:<t1,t2,...>`, got `{text}`"
    ))
}

/// Data-level failure: anything wrong with the inputs rather than the
/// invocation.
#[derive(Debug)]
pub struct RunError(pub String);

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for RunError {}

macro_rules! data_err {
    ($e:expr) => {
        RunError($e.to_string())
    };
}

/// Parses argv and runs the subcommand. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses exit code 2 for usage errors and 0 for --help/--version
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::IngestCheck { data, out } => ingest_check(data, out),
        Command::Features { data, out } => features_cmd(data, out),
        Command::Bayes {
            data,
            weeks,
            alpha,
            min_group,
            not_submitted_only,
            out,
        } => bayes_cmd(data, weeks, alpha, min_group, not_submitted_only, out),
        Command::Guha {
            data,
            weeks,
            quantifier,
            max_length,
            bins,
            out,
        } => guha_cmd(data, weeks, quantifier, max_length, bins, out),
        Command::Markov {
            data,
            weeks,
            space,
            split_outcome,
            min_edge_prob,
            out,
        } => markov_cmd(data, weeks, space, split_outcome, min_edge_prob, out),
        Command::Scenarios {
            data,
            weeks,
            scenario_catalog,
            out,
        } => scenarios_cmd(data, weeks, scenario_catalog, out),
        Command::RenderDot {
            transitions,
            min_edge_prob,
            out,
        } => render_dot_cmd(transitions, min_edge_prob, out),
        Command::Generate { spec, seed, n, out } => generate_cmd(spec, seed, n, out),
    }
}

fn load_inputs(data: &DataArgs) -> Result<Dataset, RunError> {
    let mut config = match &data.config {
        Some(path) => ingest::load_config(path).map_err(|e| data_err!(e))?,
        None => PresentationConfig::default(),
    };
    if let Some(tma) = data.tma {
        if tma == 0 {
            return Err(RunError("BadTmaIndex: --tma must be positive".into()));
        }
        config.tma_of_interest = tma;
    }
    ingest::load_dataset(&data.clicks, &data.assessments, config).map_err(|e| data_err!(e))
}

fn write_output(dir: &Path, name: &str, content: &str) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|e| data_err!(format!("Io: {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| data_err!(format!("Io: {}: {e}", path.display())))
}

fn base_manifest(name: &str, data: &DataArgs, out: &OutArg) -> RunManifest {
    let mut m = RunManifest::new(name, &out.out)
        .input("clicks", &data.clicks)
        .input("assessments", &data.assessments);
    if let Some(cfg) = &data.config {
        m = m.input("config", cfg);
    }
    if let Some(tma) = data.tma {
        m = m.parameter("tma", tma);
    }
    m
}

fn check_weeks(weeks: WeekRange, config: &PresentationConfig) -> Result<(), RunError> {
    if weeks.end > config.num_weeks {
        return Err(RunError(format!(
            "WeekOutOfRange: weeks {weeks} exceed num_weeks {}",
            config.num_weeks
        )));
    }
    Ok(())
}

fn ingest_check(data: DataArgs, out: OutArg) -> Result<(), RunError> {
    let dataset = load_inputs(&data)?;
    let report = vle_core::model::validate(&dataset);
    let text = report.to_string();
    print!("{text}");
    write_output(&out.out, "validation_report.txt", &text)?;
    let manifest = base_manifest("ingest-check", &data, &out);
    write_output(&out.out, MANIFEST_FILE, &manifest.to_json())
}

fn features_cmd(data: DataArgs, out: OutArg) -> Result<(), RunError> {
    let dataset = load_inputs(&data)?;
    let features = aggregate_weekly(&dataset);
    let outcomes = label_outcomes(&dataset);
    let csv = features_to_csv(&features, &outcomes, dataset.config());
    write_output(&out.out, "features.csv", &csv)?;
    let manifest = base_manifest("features", &data, &out);
    write_output(&out.out, MANIFEST_FILE, &manifest.to_json())
}

fn bayes_cmd(
    data: DataArgs,
    weeks: WeekRange,
    alpha: f64,
    min_group: usize,
    not_submitted_only: bool,
    out: OutArg,
) -> Result<(), RunError> {
    let dataset = load_inputs(&data)?;
    check_weeks(weeks, dataset.config())?;
    let features = aggregate_weekly(&dataset);
    let outcomes = label_outcomes(&dataset);
    let config = dataset.config();

    let table = type_success_table(&features, &outcomes, weeks).map_err(|e| data_err!(e))?;
    let significant = select_significant_types(&table, alpha, min_group);
    write_output(
        &out.out,
        "type_success.csv",
        &type_success_to_csv(&table, &significant, config),
    )?;
    let mut names = String::new();
    for ty in &significant {
        names.push_str(config.vocabulary.name(*ty));
        names.push('\n');
    }
    write_output(&out.out, "significant_types.txt", &names)?;

    let fail_class = if not_submitted_only {
        FailClass::NotSubmittedOnly
    } else {
        FailClass::NotSubmittedOrFailed
    };
    let flags = default_flag_selection(weeks, &config.vocabulary);
    let model =
        fit_bayes(&features, &outcomes, &flags, fail_class).map_err(|e| data_err!(e))?;
    write_output(&out.out, "bayes_model.txt", &bayes_model_to_text(&model, config))?;

    let scores: Vec<(StudentId, f64)> = features
        .iter()
        .map(|(student, feats)| {
            let p = model
                .fail_probability(&model.flag_vector(feats))
                .expect("flag vector matches the model");
            (student.clone(), p)
        })
        .collect();
    write_output(&out.out, "scores.csv", &scores_to_csv(&scores))?;

    let manifest = base_manifest("bayes", &data, &out)
        .parameter("weeks", weeks)
        .parameter("alpha", alpha)
        .parameter("min-group", min_group)
        .parameter("not-submitted-only", not_submitted_only);
    write_output(&out.out, MANIFEST_FILE, &manifest.to_json())
}

fn guha_cmd(
    data: DataArgs,
    weeks: WeekRange,
    quantifier: QuantifierSpec,
    max_length: usize,
    bins: usize,
    out: OutArg,
) -> Result<(), RunError> {
    if max_length == 0 {
        return Err(RunError("BadMaxLength: --max-length must be positive".into()));
    }
    if bins < 2 {
        return Err(RunError("BadBins: --bins must be at least 2".into()));
    }
    let dataset = load_inputs(&data)?;
    check_weeks(weeks, dataset.config())?;
    let features = aggregate_weekly(&dataset);
    let outcomes = label_outcomes(&dataset);
    let vocabulary = dataset.config().vocabulary.clone();

    let attributes = default_attribute_space(&features, weeks, &vocabulary, bins);
    let mut binnings = String::new();
    for attr in &attributes {
        if let vle_core::guha::AttributeSource::BinnedCount { binning, .. } = &attr.source {
            binnings.push_str(&format!("{}={}\n", attr.id, binning.to_text()));
        }
    }
    write_output(&out.out, "binnings.txt", &binnings)?;
    let matrix =
        CategoricalMatrix::build(&features, &outcomes, attributes).map_err(|e| data_err!(e))?;
    let succedents = [Outcome::NotSubmitted, Outcome::Passed];
    let hypotheses =
        mine_assoc(&matrix, &succedents, &quantifier, max_length).map_err(|e| data_err!(e))?;

    write_output(
        &out.out,
        "hypotheses.csv",
        &rules_to_table(&hypotheses, matrix.attributes(), &quantifier),
    )?;
    write_output(
        &out.out,
        "hypotheses.json",
        &rules_to_json(
            &hypotheses,
            matrix.attributes(),
            &quantifier,
            matrix.n_rows() as u64,
        ),
    )?;

    let manifest = base_manifest("guha", &data, &out)
        .parameter("weeks", weeks)
        .parameter("quantifier", quantifier)
        .parameter("max-length", max_length)
        .parameter("bins", bins);
    write_output(&out.out, MANIFEST_FILE, &manifest.to_json())
}

fn resolve_space(space: &SpaceArg, vocabulary: &Vocabulary) -> Result<StateSpace, RunError> {
    match space {
        SpaceArg::Intensity { step } => {
            Ok(StateSpace::intensity(fixed_cutpoint_bins(*step, 3 * step)))
        }
        SpaceArg::Types(names) => {
            let mut types = Vec::with_capacity(names.len());
            for name in names {
                types.push(vocabulary.get(name).ok_or_else(|| {
                    RunError(format!(
                        "UnknownContentType: `{name}` is not in the content vocabulary"
                    ))
                })?);
            }
            StateSpace::type_combination(types, vocabulary).map_err(|e| data_err!(e))
        }
    }
}

fn write_model_outputs(
    out_dir: &Path,
    stem: &str,
    model: &TransitionModel,
    style: &GraphStyle,
) -> Result<(), RunError> {
    write_output(out_dir, &format!("{stem}.csv"), &transitions_to_csv(model))?;
    match to_dot(model, style) {
        Ok(dot) => write_output(out_dir, &format!("{stem}.dot"), &dot),
        Err(e) => {
            // zero-member class: the CSV records the emptiness, no graph
            eprintln!("note: {stem}: {e}; skipping graph");
            Ok(())
        }
    }
}

fn markov_cmd(
    data: DataArgs,
    weeks: WeekRange,
    space_arg: SpaceArg,
    split_outcome: bool,
    min_edge_prob: f64,
    out: OutArg,
) -> Result<(), RunError> {
    let dataset = load_inputs(&data)?;
    check_weeks(weeks, dataset.config())?;
    if weeks.len() < 2 {
        return Err(RunError(format!(
            "WeekRangeTooShort: need at least two weeks for transitions, got {weeks}"
        )));
    }
    let features = aggregate_weekly(&dataset);
    let space = resolve_space(&space_arg, &dataset.config().vocabulary)?;
    let sequences = build_sequences(&features, &space, weeks);
    let style = GraphStyle {
        min_edge_probability: min_edge_prob,
    };

    let model = fit_transitions(&sequences, &space, weeks).map_err(|e| data_err!(e))?;
    write_model_outputs(&out.out, "transitions", &model, &style)?;

    if split_outcome {
        let outcomes = label_outcomes(&dataset);
        let classes = [Outcome::NotSubmitted, Outcome::Passed];
        let split = split_by_outcome(&sequences, &outcomes, &classes, &space, weeks)
            .map_err(|e| data_err!(e))?;
        for (outcome, sub_model) in &split {
            write_model_outputs(
                &out.out,
                &format!("transitions_{}", outcome.label()),
                sub_model,
                &style,
            )?;
        }
    }

    let manifest = base_manifest("markov", &data, &out)
        .parameter("weeks", weeks)
        .parameter("space", &space_arg)
        .parameter("split-outcome", split_outcome)
        .parameter("min-edge-prob", min_edge_prob);
    write_output(&out.out, MANIFEST_FILE, &manifest.to_json())
}

fn scenarios_cmd(
    data: DataArgs,
    weeks: WeekRange,
    catalog_path: Option<PathBuf>,
    out: OutArg,
) -> Result<(), RunError> {
    let dataset = load_inputs(&data)?;
    check_weeks(weeks, dataset.config())?;
    let features = aggregate_weekly(&dataset);
    let outcomes = label_outcomes(&dataset);

    let catalog = match &catalog_path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| data_err!(format!("Io: {}: {e}", path.display())))?;
            parse_catalog(&text).map_err(|e| data_err!(e))?
        }
        None => default_catalog(),
    };

    let report =
        scenario_report(&catalog, &features, &outcomes, weeks).map_err(|e| data_err!(e))?;
    write_output(&out.out, "scenario_report.csv", &scenario_report_to_csv(&report))?;
    write_output(
        &out.out,
        "scenario_catalog.txt",
        &format_catalog(&catalog, weeks),
    )?;

    let mut manifest = base_manifest("scenarios", &data, &out).parameter("weeks", weeks);
    if let Some(path) = &catalog_path {
        manifest = manifest.input("scenario-catalog", path);
    }
    write_output(&out.out, MANIFEST_FILE, &manifest.to_json())
}

fn render_dot_cmd(
    transitions: PathBuf,
    min_edge_prob: f64,
    out: OutArg,
) -> Result<(), RunError> {
    let model = load_transitions(&transitions).map_err(|e| data_err!(e))?;
    let style = GraphStyle {
        min_edge_probability: min_edge_prob,
    };
    let dot = to_dot(&model, &style).map_err(|e| data_err!(e))?;
    let stem = transitions
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("transitions");
    write_output(&out.out, &format!("{stem}.dot"), &dot)?;

    let manifest = RunManifest::new("render-dot", &out.out)
        .input("transitions", &transitions)
        .parameter("min-edge-prob", min_edge_prob);
    write_output(&out.out, MANIFEST_FILE, &manifest.to_json())
}

fn generate_cmd(
    spec_arg: String,
    seed: Option<u64>,
    n: Option<usize>,
    out: OutArg,
) -> Result<(), RunError> {
    let mut spec = if spec_arg == "default" {
        default_spec(seed.unwrap_or(7), n.unwrap_or(10_000))
    } else {
        spec_file::load_spec(Path::new(&spec_arg)).map_err(|e| data_err!(e))?
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    if let Some(n) = n {
        spec.n_students = n;
    }

    let threads = parallel::thread_cap();
    let (dataset, truth) =
        parallel::generate_parallel(&spec, threads).map_err(|e| data_err!(e))?;

    write_output(&out.out, "clicks.csv", &clicks_to_csv(dataset.clicks(), &spec.config))?;
    write_output(
        &out.out,
        "assessments.csv",
        &assessments_to_csv(dataset.assessments()),
    )?;
    let truth_dir = out.out.join("ground_truth");
    for (name, content) in spec_file::ground_truth_files(&truth) {
        write_output(&truth_dir, name, &content)?;
    }

    let mut manifest = RunManifest::new("generate", &out.out)
        .parameter("spec", &spec_arg)
        .parameter("n", spec.n_students)
        .seed(spec.seed);
    if spec_arg != "default" {
        manifest = manifest.input("spec-file", Path::new(&spec_arg));
    }
    write_output(&out.out, MANIFEST_FILE, &manifest.to_json())
}
