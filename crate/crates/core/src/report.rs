//! On-disk output formats: features.csv, comparison/boxplot/metrics JSON,
//! importance.csv, network dumps and run manifests.
//!
//! Floats are rounded to 9 significant digits everywhere. Non-finite JSON
//! numbers (an infinite t statistic from two constant samples) are written
//! as `null`.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classify::holdout::HoldoutReport;
use crate::classify::importance::ImportanceReport;
use crate::classify::metrics::{MeanMetrics, Metrics};
use crate::features::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::format::{round9, sig9};
use crate::ingestion::Label;
use crate::network::EdgeDump;
use crate::stats::{BoxSummary, ComparisonReport, Description, FeatureBoxes};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Format { path: String, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.display().to_string(), source }
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round9(x))
    } else {
        Value::Null
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), ReportError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, text).map_err(io_err(path))
}

// ---- features.csv ----

pub fn features_header() -> Vec<String> {
    std::iter::once("news_id".to_string())
        .chain(std::iter::once("label".to_string()))
        .chain(FEATURE_NAMES.iter().map(|s| s.to_string()))
        .chain(std::iter::once("mask".to_string()))
        .collect()
}

pub fn features_csv(vectors: &[FeatureVector]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(features_header()).expect("in-memory write");
    for v in vectors {
        let mut row = vec![v.news_id.clone(), v.label.as_str().to_string()];
        row.extend(v.values.iter().map(|x| sig9(*x)));
        row.push(v.mask_string());
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 csv")
}

pub fn write_features_csv(path: &Path, vectors: &[FeatureVector]) -> Result<(), ReportError> {
    write_text(path, &features_csv(vectors))
}

pub fn read_features_csv(path: &Path) -> Result<Vec<FeatureVector>, ReportError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_features_csv(&text).map_err(|(line, message)| ReportError::Format {
        path: path.display().to_string(),
        line,
        message,
    })
}

pub fn parse_features_csv(text: &str) -> Result<Vec<FeatureVector>, (usize, String)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(|e| (1, e.to_string()))?.iter().map(str::to_string).collect();
    if header != features_header() {
        return Err((1, "unexpected header".into()));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| (line, e.to_string()))?;
        let label: Label = rec[1].parse().map_err(|_| (line, format!("bad label {:?}", &rec[1])))?;
        let mut values = [0.0; FEATURE_COUNT];
        for (k, v) in values.iter_mut().enumerate() {
            *v = rec[k + 2].parse().map_err(|_| (line, format!("bad number {:?}", &rec[k + 2])))?;
        }
        let mask = FeatureVector::parse_mask(&rec[FEATURE_COUNT + 2]).ok_or_else(|| (line, "bad mask".to_string()))?;
        out.push(FeatureVector { news_id: rec[0].to_string(), label, values, mask });
    }
    Ok(out)
}

// ---- statistics ----

fn description_json(d: &Description) -> Value {
    json!({"min": opt_num(d.min), "max": opt_num(d.max), "mean": opt_num(d.mean), "n": d.n})
}

pub fn comparison_json(report: &ComparisonReport) -> Value {
    let rows: Vec<Value> = report
        .features
        .iter()
        .map(|f| {
            let t = f.ttest;
            json!({
                "feature": f.feature,
                "fake": description_json(&f.fake),
                "real": description_json(&f.real),
                "t": opt_num(t.map(|t| t.t)),
                "df": opt_num(t.map(|t| t.df)),
                "p": opt_num(t.map(|t| t.p_two_sided)),
                "significant": t.map(|t| t.significant),
            })
        })
        .collect();
    Value::Array(rows)
}

fn box_json(b: &Option<BoxSummary>) -> Value {
    match b {
        None => Value::Null,
        Some(b) => json!({
            "q1": num(b.q1),
            "median": num(b.median),
            "q3": num(b.q3),
            "whisker_low": num(b.whisker_low),
            "whisker_high": num(b.whisker_high),
            "outliers": b.outliers,
        }),
    }
}

/// `{feature: {fake: box, real: box}}` in canonical feature order.
pub fn boxplot_json(boxes: &[FeatureBoxes]) -> Value {
    let mut m = Map::new();
    for b in boxes {
        m.insert(b.feature.into(), json!({"fake": box_json(&b.fake), "real": box_json(&b.real)}));
    }
    Value::Object(m)
}

/// `boxplot.json` beside a comparison output path.
pub fn boxplot_path(comparison_out: &Path) -> PathBuf {
    comparison_out.with_file_name("boxplot.json")
}

// ---- classification ----

fn metrics_row(acc: f64, prec: f64, rec: f64, f1: f64) -> Value {
    json!({"acc": num(acc), "prec": num(prec), "rec": num(rec), "f1": num(f1)})
}

fn run_json(m: &Metrics) -> Value {
    metrics_row(m.accuracy, m.precision, m.recall, m.f1)
}

fn mean_json(m: &MeanMetrics) -> Value {
    metrics_row(m.accuracy, m.precision, m.recall, m.f1)
}

pub fn metrics_json(report: &HoldoutReport) -> Value {
    json!({
        "kind": report.kind.as_str(),
        "runs": report.per_run.len(),
        "per_run": report.per_run.iter().map(run_json).collect::<Vec<_>>(),
        "mean": mean_json(&report.mean),
    })
}

pub fn importance_csv(report: &ImportanceReport, names: &[&str]) -> String {
    let mut out = String::from("feature,importance,rank\n");
    for (rank0, &i) in report.ranking.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", names[i], sig9(report.importances[i]), rank0 + 1));
    }
    out
}

// ---- network dumps ----

pub fn write_network_dump(path: &Path, dumps: &[EdgeDump]) -> Result<(), ReportError> {
    let mut text = String::new();
    for d in dumps {
        text.push_str(&serde_json::to_string(d).expect("edge dump serializes"));
        text.push('\n');
    }
    write_text(path, &text)
}

// ---- manifests ----

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> Result<String, ReportError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Digests of the given files, plus every file directly inside the given
/// directories, sorted by path.
pub fn digest_inputs(paths: &[PathBuf]) -> Result<Vec<InputDigest>, ReportError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = std::fs::read_dir(p).map_err(io_err(p))?;
            for e in entries {
                let e = e.map_err(io_err(p))?;
                if e.path().is_file() {
                    files.push(e.path());
                }
            }
        } else {
            files.push(p.clone());
        }
    }
    files.sort();
    files.into_iter().map(|f| Ok(InputDigest { sha256: sha256_file(&f)?, path: f.display().to_string() })).collect()
}

/// `<out>.manifest.json`; for a directory output, `manifest.json` inside it.
pub fn manifest_path(out: &Path) -> PathBuf {
    if out.is_dir() {
        out.join("manifest.json")
    } else {
        let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        out.with_file_name(name)
    }
}

pub fn manifest_json(command: &str, config: Value, inputs: &[InputDigest], outputs: &[PathBuf]) -> Value {
    json!({
        "tool": "hpnf",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "inputs": inputs,
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), ReportError> {
    write_text(path, &to_json_text(value))
}
