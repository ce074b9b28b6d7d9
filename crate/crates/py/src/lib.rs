//! Python bindings: spike trains, intensity models, depth scores, medians,
//! outlier detection, the elastic distance, and the depth-versus-depth
//! classifier.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use spikedepth_core as core;

fn to_py_err(e: core::Error) -> PyErr {
    match e {
        core::Error::Numerical(m) => PyRuntimeError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn domain(t_start: f64, t_end: f64) -> PyResult<core::TimeDomain> {
    core::TimeDomain::new(t_start, t_end).map_err(to_py_err)
}

fn parse_variant(variant: &str) -> PyResult<core::DepthVariant> {
    match variant {
        "ilr" => Ok(core::DepthVariant::Ilr),
        "simplified" => Ok(core::DepthVariant::Simplified),
        other => Err(PyValueError::new_err(format!(
            "unknown depth variant '{other}' (expected ilr|simplified)"
        ))),
    }
}

fn depth_config(r: f64, variant: &str) -> PyResult<core::DepthConfig> {
    core::DepthConfig::new(r, parse_variant(variant)?).map_err(to_py_err)
}

/// A strictly increasing sequence of event times in an open window.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct SpikeTrain {
    inner: core::SpikeTrain,
}

#[pymethods]
impl SpikeTrain {
    #[new]
    #[pyo3(signature = (times, t_start=0.0, t_end=1.0))]
    fn new(times: Vec<f64>, t_start: f64, t_end: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::SpikeTrain::new(times, domain(t_start, t_end)?).map_err(to_py_err)?,
        })
    }

    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    fn cardinality(&self) -> usize {
        self.inner.cardinality()
    }

    fn domain(&self) -> (f64, f64) {
        (self.inner.domain().start(), self.inner.domain().end())
    }

    fn isi_vector(&self) -> Vec<f64> {
        self.inner.isi_vector()
    }

    fn __len__(&self) -> usize {
        self.inner.cardinality()
    }

    fn __repr__(&self) -> String {
        format!(
            "SpikeTrain({} spikes on [{}, {}])",
            self.inner.cardinality(),
            self.inner.domain().start(),
            self.inner.domain().end()
        )
    }
}

/// A sample of trains on one shared window, with optional labels.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct TrainSample {
    inner: core::TrainSample,
}

#[pymethods]
impl TrainSample {
    #[new]
    #[pyo3(signature = (trains, labels=None))]
    fn new(trains: Vec<SpikeTrain>, labels: Option<Vec<Option<String>>>) -> PyResult<Self> {
        let trains: Vec<core::SpikeTrain> = trains.into_iter().map(|t| t.inner).collect();
        let inner = match labels {
            Some(labels) => core::TrainSample::with_labels(trains, labels),
            None => core::TrainSample::new(trains),
        }
        .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    fn trains(&self) -> Vec<SpikeTrain> {
        self.inner
            .trains()
            .iter()
            .map(|t| SpikeTrain { inner: t.clone() })
            .collect()
    }

    fn labels(&self) -> Vec<Option<String>> {
        self.inner.labels().to_vec()
    }

    fn mean_cardinality(&self) -> f64 {
        self.inner.mean_cardinality()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Conditional intensity model: constant, tabulated curve, self-exciting, or
/// Markov-interval; fitted variants come from `fit_kernel` / `fit_imi`.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct IntensityModel {
    inner: core::IntensityModel,
}

#[pymethods]
impl IntensityModel {
    #[staticmethod]
    #[pyo3(signature = (rate, t_start=0.0, t_end=1.0))]
    fn constant(rate: f64, t_start: f64, t_end: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::IntensityModel::constant(rate, domain(t_start, t_end)?)
                .map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (grid, rates, t_start=0.0, t_end=1.0))]
    fn curve(grid: Vec<f64>, rates: Vec<f64>, t_start: f64, t_end: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::IntensityModel::Curve(
                core::CurveIntensity::new(domain(t_start, t_end)?, grid, rates)
                    .map_err(to_py_err)?,
            ),
        })
    }

    /// Self-exciting model over a baseline given as another model (constant
    /// or curve).
    #[staticmethod]
    fn hawkes(base: &IntensityModel, jump: f64, decay: f64) -> PyResult<Self> {
        let baseline = match &base.inner {
            core::IntensityModel::Constant(c) => core::BaselineIntensity::Constant(c.clone()),
            core::IntensityModel::Curve(c) => core::BaselineIntensity::Curve(c.clone()),
            _ => {
                return Err(PyValueError::new_err(
                    "the baseline must be a constant or curve model",
                ))
            }
        };
        Ok(Self {
            inner: core::IntensityModel::Hawkes(
                core::HawkesIntensity::new(baseline, jump, decay).map_err(to_py_err)?,
            ),
        })
    }

    /// Kernel (Poisson) intensity estimate from a sample.
    #[staticmethod]
    fn fit_kernel(sample: &TrainSample) -> PyResult<Self> {
        Ok(Self {
            inner: core::estimate_intensity_kernel(&sample.inner).map_err(to_py_err)?,
        })
    }

    /// Markov-interval estimate for non-Poisson samples.
    #[staticmethod]
    fn fit_imi(sample: &TrainSample) -> PyResult<Self> {
        Ok(Self {
            inner: core::estimate_intensity_imi(&sample.inner).map_err(to_py_err)?,
        })
    }

    fn is_history_dependent(&self) -> bool {
        self.inner.is_history_dependent()
    }

    /// Rate at a time, given the event history for history-dependent models.
    #[pyo3(signature = (t, history=None))]
    fn rate_at(&self, t: f64, history: Option<Vec<f64>>) -> f64 {
        let history = history.unwrap_or_default();
        match &self.inner {
            core::IntensityModel::Constant(c) => c.rate(),
            core::IntensityModel::Curve(c) => c.rate_at(t),
            core::IntensityModel::Hawkes(h) => h.conditional_rate(t, &history),
            core::IntensityModel::Imi(m) => {
                let last = history.iter().rev().find(|&&e| e < t).copied();
                m.conditional_rate(t, last)
            }
        }
    }
}

/// Probability mass over spike counts.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct CardinalityModel {
    inner: core::CardinalityModel,
}

#[pymethods]
impl CardinalityModel {
    #[staticmethod]
    fn from_sample(sample: &TrainSample) -> Self {
        Self {
            inner: core::CardinalityModel::from_sample(&sample.inner),
        }
    }

    #[staticmethod]
    fn poisson(mean: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::CardinalityModel::poisson(mean).map_err(to_py_err)?,
        })
    }

    fn count_depth(&self, k: usize) -> f64 {
        core::cardinality_depth(k, &self.inner)
    }

    fn weight(&self, k: usize) -> f64 {
        core::cardinality_weight(k, &self.inner)
    }
}

#[pyfunction]
#[pyo3(signature = (rate, n, seed, t_start=0.0, t_end=1.0))]
fn sample_hpp(rate: f64, n: usize, seed: u64, t_start: f64, t_end: f64) -> PyResult<TrainSample> {
    Ok(TrainSample {
        inner: core::sample_hpp(rate, domain(t_start, t_end)?, n, seed).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn sample_ipp(model: &IntensityModel, n: usize, seed: u64) -> PyResult<TrainSample> {
    let curve = match &model.inner {
        core::IntensityModel::Curve(c) => c,
        _ => return Err(PyValueError::new_err("sampling needs a curve model")),
    };
    Ok(TrainSample {
        inner: core::sample_ipp(curve, n, seed).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn sample_hawkes(model: &IntensityModel, n: usize, seed: u64) -> PyResult<TrainSample> {
    let hawkes = match &model.inner {
        core::IntensityModel::Hawkes(h) => h,
        _ => return Err(PyValueError::new_err("sampling needs a self-exciting model")),
    };
    Ok(TrainSample {
        inner: core::sample_hawkes(hawkes, n, seed).map_err(to_py_err)?,
    })
}

/// Depth of one train: `(total, weight, conditional, degenerate)`.
#[pyfunction]
#[pyo3(signature = (train, model, counts, r=1.0, variant="ilr"))]
fn depth(
    train: &SpikeTrain,
    model: &IntensityModel,
    counts: &CardinalityModel,
    r: f64,
    variant: &str,
) -> PyResult<(f64, f64, f64, bool)> {
    let cfg = depth_config(r, variant)?;
    let s = core::depth(&train.inner, &model.inner, &counts.inner, &cfg).map_err(to_py_err)?;
    Ok((s.total, s.weight, s.conditional, s.degenerate))
}

/// Total depths of a whole sample.
#[pyfunction]
#[pyo3(signature = (sample, model, counts, r=1.0, variant="ilr"))]
fn depth_scores(
    sample: &TrainSample,
    model: &IntensityModel,
    counts: &CardinalityModel,
    r: f64,
    variant: &str,
) -> PyResult<Vec<f64>> {
    let cfg = depth_config(r, variant)?;
    let gm = core::GroupModel::new(
        model.inner.clone(),
        counts.inner.clone(),
        sample.inner.mean_cardinality(),
    );
    let scores = gm.depths(&sample.inner, &cfg).map_err(to_py_err)?;
    Ok(scores.into_iter().map(|s| s.total).collect())
}

/// Depth-based median train and its total depth.
#[pyfunction]
#[pyo3(signature = (sample, model, counts, r=1.0, variant="ilr"))]
fn estimate_median(
    sample: &TrainSample,
    model: &IntensityModel,
    counts: &CardinalityModel,
    r: f64,
    variant: &str,
) -> PyResult<(SpikeTrain, f64)> {
    let cfg = depth_config(r, variant)?;
    let med = core::estimate_median(&sample.inner, &model.inner, &counts.inner, &cfg)
        .map_err(to_py_err)?;
    Ok((SpikeTrain { inner: med.median }, med.score.total))
}

/// Flag depth outliers; returns `(rows, metrics)` where rows are
/// `(index, cardinality, depth, threshold, flagged)` and metrics is
/// `(precision, recall, f1)` when the sample carries "outlier" labels.
#[pyfunction]
#[pyo3(signature = (sample, model, counts, delta, n_mc=100_000, seed=0, r=1.0, variant="ilr"))]
#[allow(clippy::too_many_arguments)]
fn detect_outliers(
    sample: &TrainSample,
    model: &IntensityModel,
    counts: &CardinalityModel,
    delta: f64,
    n_mc: usize,
    seed: u64,
    r: f64,
    variant: &str,
) -> PyResult<(Vec<(usize, usize, f64, f64, bool)>, Option<(f64, f64, f64)>)> {
    let cfg = depth_config(r, variant)?;
    let report = core::detect_outliers(
        &sample.inner,
        &model.inner,
        &counts.inner,
        &cfg,
        delta,
        n_mc,
        seed,
    )
    .map_err(to_py_err)?;
    let rows = report
        .rows
        .iter()
        .map(|r| (r.index, r.cardinality, r.depth, r.threshold, r.flagged))
        .collect();
    let metrics = report.metrics.map(|m| (m.precision, m.recall, m.f1));
    Ok((rows, metrics))
}

/// Penalized elastic distance between two trains.
#[pyfunction]
fn d_mu(f: &SpikeTrain, g: &SpikeTrain, mu: f64) -> PyResult<f64> {
    core::d_mu(&f.inner, &g.inner, mu).map_err(to_py_err)
}

/// Isometric log-ratio map of a positive composition.
#[pyfunction]
fn ilr_transform(isi: Vec<f64>) -> PyResult<Vec<f64>> {
    core::ilr_transform(&isi).map_err(to_py_err)
}

/// Map a train through the cumulative intensity of a model.
#[pyfunction]
fn time_rescale(train: &SpikeTrain, model: &IntensityModel) -> PyResult<SpikeTrain> {
    let ci = core::cumulative(&model.inner, Some(&train.inner)).map_err(to_py_err)?;
    Ok(SpikeTrain {
        inner: core::time_rescale(&train.inner, &ci).map_err(to_py_err)?,
    })
}

/// Depth-versus-depth classifier with a trained monotone boundary.
#[pyclass(frozen)]
struct DdClassifier {
    gm_f: core::GroupModel,
    gm_g: core::GroupModel,
    cfg: core::DepthConfig,
    boundary: core::BoundaryFunction,
    training_error: f64,
}

#[pymethods]
impl DdClassifier {
    /// Fit group models (`"kernel"` or `"imi"` per group) and train the
    /// boundary on the two training samples.
    #[staticmethod]
    #[pyo3(signature = (train_f, train_g, fit_f="kernel", fit_g="kernel", degree=5, seed=0, r=1.0, variant="ilr"))]
    #[allow(clippy::too_many_arguments)]
    fn fit(
        train_f: &TrainSample,
        train_g: &TrainSample,
        fit_f: &str,
        fit_g: &str,
        degree: usize,
        seed: u64,
        r: f64,
        variant: &str,
    ) -> PyResult<Self> {
        let cfg = depth_config(r, variant)?;
        let fit_one = |name: &str, sample: &core::TrainSample| -> PyResult<core::GroupModel> {
            match name {
                "kernel" => core::GroupModel::fit_poisson(sample).map_err(to_py_err),
                "imi" => core::GroupModel::fit_interval(sample).map_err(to_py_err),
                other => Err(PyValueError::new_err(format!(
                    "unknown fit '{other}' (expected kernel|imi)"
                ))),
            }
        };
        let gm_f = fit_one(fit_f, &train_f.inner)?;
        let gm_g = fit_one(fit_g, &train_g.inner)?;
        let points =
            core::dd_plot(&train_f.inner, &train_g.inner, &gm_f, &gm_g, &cfg).map_err(to_py_err)?;
        let optimizer = core::OptimizerConfig {
            degree,
            seed,
            ..core::OptimizerConfig::default()
        };
        let trained = core::train_boundary(&points, &optimizer).map_err(to_py_err)?;
        Ok(Self {
            gm_f,
            gm_g,
            cfg,
            boundary: trained.boundary,
            training_error: trained.training_error,
        })
    }

    #[getter]
    fn training_error(&self) -> f64 {
        self.training_error
    }

    /// Boundary samples `(t, f(t))` for plotting.
    #[pyo3(signature = (count=1001))]
    fn boundary_samples(&self, count: usize) -> Vec<(f64, f64)> {
        self.boundary.samples(count)
    }

    /// Group assignment ("F" or "G") for every train in a sample.
    fn classify(&self, sample: &TrainSample) -> PyResult<Vec<String>> {
        let groups = core::classify_dd_batch(
            &sample.inner,
            &self.gm_f,
            &self.gm_g,
            &self.cfg,
            &self.boundary,
        )
        .map_err(to_py_err)?;
        Ok(groups.into_iter().map(|g| g.to_string()).collect())
    }

    /// Misclassification rate on labeled test samples (first sample is group
    /// F, second is group G).
    fn misclassification(&self, test_f: &TrainSample, test_g: &TrainSample) -> PyResult<f64> {
        let pf = self.classify(test_f)?;
        let pg = self.classify(test_g)?;
        let errors = pf.iter().filter(|g| g.as_str() != "F").count()
            + pg.iter().filter(|g| g.as_str() != "G").count();
        Ok(errors as f64 / (pf.len() + pg.len()) as f64)
    }
}

#[pymodule]
fn spikedepth(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SpikeTrain>()?;
    m.add_class::<TrainSample>()?;
    m.add_class::<IntensityModel>()?;
    m.add_class::<CardinalityModel>()?;
    m.add_class::<DdClassifier>()?;
    m.add_function(wrap_pyfunction!(sample_hpp, m)?)?;
    m.add_function(wrap_pyfunction!(sample_ipp, m)?)?;
    m.add_function(wrap_pyfunction!(sample_hawkes, m)?)?;
    m.add_function(wrap_pyfunction!(depth, m)?)?;
    m.add_function(wrap_pyfunction!(depth_scores, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_median, m)?)?;
    m.add_function(wrap_pyfunction!(detect_outliers, m)?)?;
    m.add_function(wrap_pyfunction!(d_mu, m)?)?;
    m.add_function(wrap_pyfunction!(ilr_transform, m)?)?;
    m.add_function(wrap_pyfunction!(time_rescale, m)?)?;
    Ok(())
}
