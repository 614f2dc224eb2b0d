//! Python module `hpnf_py`.
//!
//! ```python
//! import hpnf_py
//! corpus = hpnf_py.synth(n_fake=50, n_real=50, seed=7)
//! vectors = corpus.extract()
//! report = hpnf_py.repeated_holdout(vectors, "rf")
//! ```

use std::path::PathBuf;

use hpnf::classify::holdout::{repeated_holdout as holdout, HoldoutConfig};
use hpnf::classify::importance::gini_importance as importance;
use hpnf::classify::{design_matrix, select_feature_subset, train_model, FeatureSubset, ModelKind, TrainedModel};
use hpnf::features::{extract_all, DEFAULT_BOT_THRESHOLD, FEATURE_COUNT, FEATURE_NAMES};
use hpnf::ingestion::{self, EngagementCorpus};
use hpnf::report;
use hpnf::sentiment::{Lexicon, SentimentScorer};
use hpnf::stats::{self, TTestKind};
use hpnf::synth::{generate_corpus, preset_params, PresetKind, SynthOptions};
use hpnf::PropagationNetwork;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn model_kind(name: &str) -> PyResult<ModelKind> {
    ModelKind::ALL
        .into_iter()
        .find(|k| k.as_str() == name)
        .ok_or_else(|| value_err(format!("unknown model kind {name:?} (gnb, dt, lr, rf)")))
}

fn subset(name: &str) -> PyResult<FeatureSubset> {
    FeatureSubset::ALL
        .into_iter()
        .find(|s| s.as_str() == name)
        .ok_or_else(|| value_err(format!("unknown feature subset {name:?}")))
}

/// One 32-dimensional feature vector.
#[pyclass(name = "FeatureVector", frozen, from_py_object)]
#[derive(Clone)]
struct PyFeatureVector {
    inner: hpnf::FeatureVector,
}

#[pymethods]
impl PyFeatureVector {
    #[getter]
    fn news_id(&self) -> &str {
        &self.inner.news_id
    }

    #[getter]
    fn label(&self) -> &'static str {
        self.inner.label.as_str()
    }

    /// Values in canonical order; masked entries are `None`.
    #[getter]
    fn values(&self) -> Vec<Option<f64>> {
        (0..FEATURE_COUNT).map(|i| self.inner.get(i)).collect()
    }

    #[getter]
    fn mask(&self) -> String {
        self.inner.mask_string()
    }

    fn __getitem__(&self, name: &str) -> PyResult<Option<f64>> {
        let i = hpnf::features::feature_index(name).ok_or_else(|| PyKeyError::new_err(name.to_string()))?;
        Ok(self.inner.get(i))
    }

    fn __repr__(&self) -> String {
        format!("FeatureVector({:?}, {})", self.inner.news_id, self.inner.label)
    }
}

/// A validated engagement corpus.
#[pyclass(name = "Corpus", frozen)]
struct PyCorpus {
    inner: EngagementCorpus,
}

#[pymethods]
impl PyCorpus {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn news_ids(&self) -> Vec<String> {
        self.inner.items().map(|i| i.news_id().to_string()).collect()
    }

    #[pyo3(signature = (lexicon=None, bot_threshold=DEFAULT_BOT_THRESHOLD))]
    fn extract(&self, py: Python<'_>, lexicon: Option<PathBuf>, bot_threshold: f64) -> PyResult<Vec<PyFeatureVector>> {
        let lex = match lexicon {
            Some(p) => Lexicon::load(&p).map_err(value_err)?,
            None => Lexicon::builtin(),
        };
        let vectors = py.detach(|| extract_all(&self.inner, &lex, bot_threshold));
        Ok(vectors.into_iter().map(|inner| PyFeatureVector { inner }).collect())
    }

    /// `{"news_id", "macro_edges", "micro_edges"}` of one item.
    fn edges<'py>(&self, py: Python<'py>, news_id: &str) -> PyResult<Bound<'py, PyAny>> {
        let item = self.inner.item(news_id).ok_or_else(|| PyKeyError::new_err(news_id.to_string()))?;
        let net = PropagationNetwork::build(item, self.inner.users()).map_err(value_err)?;
        json_to_py(py, &serde_json::to_value(net.edge_dump()).map_err(value_err)?)
    }

    fn write(&self, out: PathBuf) -> PyResult<()> {
        ingestion::write_records(&out, &self.inner.to_records()).map_err(value_err)
    }
}

/// A trained classifier.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: TrainedModel,
    subset: FeatureSubset,
}

fn matrix(vectors: &[PyFeatureVector], subset: FeatureSubset) -> (Vec<Vec<f64>>, Vec<hpnf::Label>) {
    let vs: Vec<_> = vectors.iter().map(|v| v.inner.clone()).collect();
    let (x, y) = design_matrix(&vs);
    (select_feature_subset(&x, subset), y)
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (vectors, kind="rf", seed=42, features="all"))]
    fn train(vectors: Vec<PyFeatureVector>, kind: &str, seed: u64, features: &str) -> PyResult<Self> {
        let subset = subset(features)?;
        let (x, y) = matrix(&vectors, subset);
        let inner = train_model(model_kind(kind)?, &x, &y, seed).map_err(value_err)?;
        Ok(Self { inner, subset })
    }

    #[staticmethod]
    #[pyo3(signature = (text, features="all"))]
    fn from_json(text: &str, features: &str) -> PyResult<Self> {
        let inner = TrainedModel::from_json(text).map_err(value_err)?;
        Ok(Self { inner, subset: subset(features)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().as_str()
    }

    fn predict(&self, vectors: Vec<PyFeatureVector>) -> Vec<&'static str> {
        let (x, _) = matrix(&vectors, self.subset);
        self.inner.predict_all(&x).into_iter().map(|l| l.as_str()).collect()
    }

    /// `[(feature, importance), ...]` by decreasing importance.
    fn importance(&self, vectors: Vec<PyFeatureVector>) -> PyResult<Vec<(&'static str, f64)>> {
        let (x, y) = matrix(&vectors, self.subset);
        let report = importance(&self.inner, &x, &y).map_err(value_err)?;
        let names: Vec<&'static str> = self.subset.columns().into_iter().map(|c| FEATURE_NAMES[c]).collect();
        Ok(report.ranking.iter().map(|&i| (names[i], report.importances[i])).collect())
    }
}

#[pyfunction]
fn load_corpus(data_dir: PathBuf) -> PyResult<PyCorpus> {
    Ok(PyCorpus { inner: ingestion::load_corpus(&data_dir).map_err(value_err)? })
}

/// Synthetic corpus of fake-like then real-like items.
#[pyfunction]
#[pyo3(signature = (n_fake=200, n_real=200, seed=42, confound=false))]
fn synth(py: Python<'_>, n_fake: usize, n_real: usize, seed: u64, confound: bool) -> PyResult<PyCorpus> {
    let inner = py.detach(|| {
        let f = preset_params(PresetKind::FakeLike, seed);
        let r = preset_params(PresetKind::RealLike, seed);
        generate_corpus(&f, &r, n_fake, n_real, SynthOptions { confound })
            .map_err(value_err)?
            .corpus()
            .map_err(value_err)
    })?;
    Ok(PyCorpus { inner })
}

#[pyfunction]
fn sentiment(text: &str) -> f64 {
    Lexicon::builtin().score(text).value()
}

#[pyfunction]
#[pyo3(signature = (a, b, alpha=stats::DEFAULT_ALPHA, pooled=false))]
fn t_test(a: Vec<f64>, b: Vec<f64>, alpha: f64, pooled: bool) -> PyResult<(f64, f64, f64, bool)> {
    let kind = if pooled { TTestKind::Pooled } else { TTestKind::Welch };
    let r = stats::t_test(&a, &b, alpha, kind).map_err(value_err)?;
    Ok((r.t, r.df, r.p_two_sided, r.significant))
}

/// Per-feature comparison records, as written to comparison.json.
#[pyfunction]
#[pyo3(signature = (vectors, alpha=stats::DEFAULT_ALPHA, pooled=false))]
fn compare_groups<'py>(
    py: Python<'py>,
    vectors: Vec<PyFeatureVector>,
    alpha: f64,
    pooled: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let vs: Vec<_> = vectors.into_iter().map(|v| v.inner).collect();
    let kind = if pooled { TTestKind::Pooled } else { TTestKind::Welch };
    json_to_py(py, &report::comparison_json(&stats::compare_groups(&vs, alpha, kind)))
}

/// Metrics record, as written to metrics.json.
#[pyfunction]
#[pyo3(signature = (vectors, kind="rf", runs=5, split=0.8, seed=42, stratify=true, features="all"))]
#[allow(clippy::too_many_arguments)]
fn repeated_holdout<'py>(
    py: Python<'py>,
    vectors: Vec<PyFeatureVector>,
    kind: &str,
    runs: usize,
    split: f64,
    seed: u64,
    stratify: bool,
    features: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let (x, y) = matrix(&vectors, subset(features)?);
    let cfg = HoldoutConfig { runs, train_frac: split, seed, stratify };
    let kind = model_kind(kind)?;
    let r = py.detach(|| holdout(&x, &y, kind, &cfg)).map_err(value_err)?;
    json_to_py(py, &report::metrics_json(&r))
}

#[pymodule]
fn hpnf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FEATURE_NAMES", FEATURE_NAMES.to_vec())?;
    m.add_class::<PyFeatureVector>()?;
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(load_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(sentiment, m)?)?;
    m.add_function(wrap_pyfunction!(t_test, m)?)?;
    m.add_function(wrap_pyfunction!(compare_groups, m)?)?;
    m.add_function(wrap_pyfunction!(repeated_holdout, m)?)?;
    Ok(())
}
