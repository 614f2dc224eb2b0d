//! Command-line entry point.
//!
//! Exit codes: 0 on success, 2 on usage errors, 1 on data errors. Every output
//! file gets a run manifest beside it (see [`crate::report::manifest_path`]).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::classify::holdout::{repeated_holdout, HoldoutConfig, HoldoutReport};
use crate::classify::importance::gini_importance;
use crate::classify::{
    compute_metrics, design_matrix, select_feature_subset, train_model, ClassifyError, FeatureSubset, MeanMetrics,
    ModelKind, TrainedModel,
};
use crate::features::{extract_all, FeatureVector, DEFAULT_BOT_THRESHOLD, FEATURE_NAMES};
use crate::ingestion::{self, IngestError};
use crate::network::PropagationNetwork;
use crate::report::{self, ReportError};
use crate::sentiment::{Lexicon, LexiconError};
use crate::stats::{boxplots, compare_groups, TTestKind, DEFAULT_ALPHA};
use crate::synth::{generate_corpus, preset_params, PresetKind, SynthError, SynthOptions};

#[derive(Debug, Parser)]
#[command(name = "hpnf", version, about = "Hierarchical propagation network features for fake news detection")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus in the ingestion format.
    Synth(SynthArgs),
    /// Extract feature vectors to CSV.
    Extract(ExtractArgs),
    /// Compare fake and real feature distributions.
    Analyze(AnalyzeArgs),
    /// Repeated-holdout evaluation of one classifier.
    Train(TrainArgs),
    /// Score a saved model on a labeled dataset.
    Evaluate(EvaluateArgs),
    /// Gini feature importance of a tree model.
    Importance(ImportanceArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Single-preset corpus.
    #[arg(long, conflicts_with = "mixed", required_unless_present = "mixed")]
    pub preset: Option<PresetKind>,
    /// Items of the single preset.
    #[arg(long, default_value_t = 200, requires = "preset")]
    pub n: usize,
    /// Fake-like items followed by real-like items.
    #[arg(long)]
    pub mixed: bool,
    #[arg(long, default_value_t = 200, requires = "mixed")]
    pub n_fake: usize,
    #[arg(long, default_value_t = 200, requires = "mixed")]
    pub n_real: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Add friends outside the parent-inference window.
    #[arg(long)]
    pub confound: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractOptions {
    /// Lexicon TSV (default: bundled lexicon).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BOT_THRESHOLD)]
    pub bot_threshold: f64,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// Corpus directory (features are extracted on the fly).
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Previously extracted features.csv.
    #[arg(long)]
    pub features_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractArgs {
    #[arg(long)]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub options: ExtractOptions,
    /// Also write per-item edge lists as JSONL.
    #[arg(long)]
    pub dump_networks: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub options: ExtractOptions,
    /// comparison.json path; boxplot.json is written beside it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ALPHA, value_parser = parse_open_unit)]
    pub alpha: f64,
    /// Pooled-variance t-test instead of Welch.
    #[arg(long)]
    pub pooled: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub options: ExtractOptions,
    #[arg(long, value_enum, default_value_t = ModelKind::Rf)]
    pub model: ModelKind,
    #[arg(long, value_enum, default_value_t = FeatureSubset::All)]
    pub features: FeatureSubset,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    /// Training fraction of each split.
    #[arg(long, default_value_t = 0.8, value_parser = parse_open_unit)]
    pub split: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Plain random splits.
    #[arg(long)]
    pub no_stratify: bool,
    /// metrics.json path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also train on all rows and save the model.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub options: ExtractOptions,
    #[arg(long)]
    pub model_file: PathBuf,
    /// Subset the model was trained on.
    #[arg(long, value_enum, default_value_t = FeatureSubset::All)]
    pub features: FeatureSubset,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub options: ExtractOptions,
    /// Tree model to train (ignored with --model-file).
    #[arg(long, value_enum, default_value_t = ModelKind::Rf)]
    pub model: ModelKind,
    /// Use a saved rf or dt model instead of training one.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FeatureSubset::All)]
    pub features: FeatureSubset,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// importance.csv path.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_open_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Data(String),
    #[error("cannot start worker pool: {0}")]
    Threads(String),
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n as usize);
    }
    let pool = builder.build().map_err(|e| CliError::Threads(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Analyze(a) => analyze(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Importance(a) => importance(a),
    })
}

fn config_of(args: &impl Serialize) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn write_manifest(
    command: &str,
    args: &impl Serialize,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
) -> Result<(), CliError> {
    let primary = outputs.first().expect("at least one output");
    let digests = report::digest_inputs(inputs)?;
    let manifest = report::manifest_json(command, config_of(args), &digests, outputs);
    report::write_json(&report::manifest_path(primary), &manifest)?;
    Ok(())
}

fn lexicon(options: &ExtractOptions) -> Result<Lexicon, CliError> {
    Ok(match &options.lexicon {
        Some(p) => Lexicon::load(p)?,
        None => Lexicon::builtin(),
    })
}

fn option_inputs(options: &ExtractOptions) -> Vec<PathBuf> {
    options.lexicon.iter().cloned().collect()
}

/// Feature vectors of an input plus the paths to digest.
fn load_vectors(input: &Input, options: &ExtractOptions) -> Result<(Vec<FeatureVector>, Vec<PathBuf>), CliError> {
    let mut inputs = option_inputs(options);
    let vectors = match (&input.data_dir, &input.features_csv) {
        (Some(dir), _) => {
            let corpus = ingestion::load_corpus(dir)?;
            inputs.push(dir.clone());
            extract_all(&corpus, &lexicon(options)?, options.bot_threshold)
        }
        (None, Some(csv)) => {
            inputs.push(csv.clone());
            report::read_features_csv(csv)?
        }
        (None, None) => unreachable!("clap enforces one input"),
    };
    Ok((vectors, inputs))
}

fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let opts = SynthOptions { confound: a.confound };
    let fake = preset_params(PresetKind::FakeLike, a.seed);
    let real = preset_params(PresetKind::RealLike, a.seed);
    let (n_fake, n_real, pf, pr) = match a.preset {
        Some(PresetKind::FakeLike) => (a.n, 0, &fake, &real),
        Some(PresetKind::RealLike) => (0, a.n, &fake, &real),
        None => (a.n_fake, a.n_real, &fake, &real),
    };
    let corpus = generate_corpus(pf, pr, n_fake, n_real, opts)?;
    ingestion::write_records(&a.out, &corpus.records)?;
    let outputs: Vec<PathBuf> = ingestion::CORPUS_FILES.iter().map(|f| a.out.join(f)).collect();
    let manifest = report::manifest_json("synth", config_of(a), &[], &outputs);
    report::write_json(&a.out.join("manifest.json"), &manifest)?;
    eprintln!("wrote {} fake and {} real items to {}", n_fake, n_real, a.out.display());
    Ok(())
}

fn extract(a: &ExtractArgs) -> Result<(), CliError> {
    let corpus = ingestion::load_corpus(&a.data_dir)?;
    let validation = ingestion::validate_corpus(&corpus);
    let vectors = extract_all(&corpus, &lexicon(&a.options)?, a.options.bot_threshold);
    report::write_features_csv(&a.out, &vectors)?;
    let mut outputs = vec![a.out.clone()];
    if let Some(dump) = &a.dump_networks {
        let dumps: Vec<_> = corpus
            .items()
            .filter(|i| !i.is_excluded())
            .map(|i| PropagationNetwork::build(i, corpus.users()).map(|n| n.edge_dump()))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Data(e.to_string()))?;
        report::write_network_dump(dump, &dumps)?;
        outputs.push(dump.clone());
    }
    let mut inputs = option_inputs(&a.options);
    inputs.push(a.data_dir.clone());
    write_manifest("extract", a, &inputs, &outputs)?;
    eprintln!("extracted {} vectors ({} items excluded without tweets)", vectors.len(), validation.excluded().count());
    Ok(())
}

fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let (vectors, inputs) = load_vectors(&a.input, &a.options)?;
    let kind = if a.pooled { TTestKind::Pooled } else { TTestKind::Welch };
    let cmp = compare_groups(&vectors, a.alpha, kind);
    let boxes = boxplots(&vectors);
    let box_path = report::boxplot_path(&a.out);
    report::write_json(&a.out, &report::comparison_json(&cmp))?;
    report::write_json(&box_path, &report::boxplot_json(&boxes))?;
    write_manifest("analyze", a, &inputs, &[a.out.clone(), box_path])?;
    let significant = cmp.features.iter().filter(|f| f.ttest.is_some_and(|t| t.significant)).count();
    eprintln!("{significant} of {} features significant at alpha={}", cmp.features.len(), a.alpha);
    Ok(())
}

fn matrix(vectors: &[FeatureVector], subset: FeatureSubset) -> (Vec<Vec<f64>>, Vec<crate::Label>) {
    let (x, y) = design_matrix(vectors);
    (select_feature_subset(&x, subset), y)
}

fn train(a: &TrainArgs) -> Result<(), CliError> {
    let (vectors, inputs) = load_vectors(&a.input, &a.options)?;
    let (x, y) = matrix(&vectors, a.features);
    let cfg = HoldoutConfig { runs: a.runs as usize, train_frac: a.split, seed: a.seed, stratify: !a.no_stratify };
    let report = repeated_holdout(&x, &y, a.model, &cfg)?;
    report::write_json(&a.out, &report::metrics_json(&report))?;
    let mut outputs = vec![a.out.clone()];
    if let Some(path) = &a.model_out {
        let model = train_model(a.model, &x, &y, a.seed)?;
        report::write_text(path, &model.to_json())?;
        outputs.push(path.clone());
    }
    write_manifest("train", a, &inputs, &outputs)?;
    eprintln!("{} mean f1 {}", a.model.as_str(), crate::format::sig9(report.mean.f1));
    Ok(())
}

fn load_model(path: &Path) -> Result<TrainedModel, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ReportError::Io { path: path.display().to_string(), source })?;
    Ok(TrainedModel::from_json(&text)?)
}

fn check_width(model: &TrainedModel, subset: FeatureSubset) -> Result<(), CliError> {
    let width = subset.columns().len();
    if model.n_features != width {
        return Err(CliError::Data(format!(
            "model expects {} features but --features {} selects {width}",
            model.n_features,
            subset.as_str()
        )));
    }
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let model = load_model(&a.model_file)?;
    check_width(&model, a.features)?;
    let (vectors, mut inputs) = load_vectors(&a.input, &a.options)?;
    let (x, y) = matrix(&vectors, a.features);
    let metrics = compute_metrics(&model.predict_all(&x), &y)?;
    let report = HoldoutReport { kind: model.kind(), per_run: vec![metrics], mean: MeanMetrics::of(&[metrics]) };
    report::write_json(&a.out, &report::metrics_json(&report))?;
    inputs.push(a.model_file.clone());
    write_manifest("evaluate", a, &inputs, std::slice::from_ref(&a.out))?;
    eprintln!("f1 {}", crate::format::sig9(metrics.f1));
    Ok(())
}

fn importance(a: &ImportanceArgs) -> Result<(), CliError> {
    let (vectors, mut inputs) = load_vectors(&a.input, &a.options)?;
    let (x, y) = matrix(&vectors, a.features);
    let model = match &a.model_file {
        Some(p) => {
            inputs.push(p.clone());
            let m = load_model(p)?;
            check_width(&m, a.features)?;
            m
        }
        None => train_model(a.model, &x, &y, a.seed)?,
    };
    let report = gini_importance(&model, &x, &y)?;
    let names: Vec<&str> = a.features.columns().into_iter().map(|c| FEATURE_NAMES[c]).collect();
    report::write_text(&a.out, &report::importance_csv(&report, &names))?;
    write_manifest("importance", a, &inputs, std::slice::from_ref(&a.out))?;
    eprintln!("top feature {}", names[report.ranking[0]]);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["hpnf"]), 2);
        assert_eq!(run(["hpnf", "frobnicate"]), 2);
        assert_eq!(run(["hpnf", "train", "--features-csv", "x.csv", "--out", "m.json", "--split", "1.5"]), 2);
        assert_eq!(run(["hpnf", "train", "--features-csv", "x.csv", "--out", "m.json", "--runs", "0"]), 2);
        assert_eq!(run(["hpnf", "analyze", "--data-dir", "d", "--features-csv", "x.csv", "--out", "c.json"]), 2);
    }

    #[test]
    fn missing_input_is_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope");
        let out = dir.path().join("f.csv");
        assert_eq!(
            run(["hpnf", "extract", "--data-dir", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]),
            1
        );
    }

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(run(["hpnf", "--version"]), 0);
    }
}
