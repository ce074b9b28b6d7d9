//! Depth-versus-depth classification with a strictly increasing boundary.
//!
//! Each train is mapped to the pair of its depths with respect to two fitted
//! groups. The classifier is a boundary `f` in that plane, constrained to be
//! strictly increasing with `f(0) = 0` by writing `f(t) = ∫_0^t exp(h(x)) dx`
//! for a polynomial `h`. The misclassification count
//!
//! `M(f) = (Σ_F 1{d_G > f(d_F)} + Σ_G 1{d_G < f(d_F)}) / (m + n)`
//!
//! is minimized through its logistic smoothing by a perturbed gradient
//! iteration: `a ← a - η ∇M + sqrt(η T) Z` with the temperature `T` annealed
//! geometrically. Baseline classifiers (maximum depth, binned Gaussian
//! likelihood, minimum distance to the group medians) share the module.

use crate::depth::{depth_from_cumulative, CardinalityModel, DepthConfig, DepthScore};
use crate::error::{Error, Result};
use crate::intensity::{cumulative, IntensityModel};
use crate::metric::d_mu;
use crate::model::{SpikeTrain, TimeDomain, TrainSample};
use crate::simulate::{stream_tag, substream, RngSeed};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default bin count of the likelihood baseline.
pub const DEFAULT_LM_BINS: usize = 10;
/// Variance floor of the likelihood baseline.
pub const LM_VARIANCE_FLOOR: f64 = 1e-6;

/// Quadrature nodes of the boundary integral on `[0, 1]`.
const QUAD_POINTS: usize = 201;

/// Binary group tag of the depth-versus-depth construction: depth w.r.t.
/// group `F` is the first coordinate, group `G` the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Group {
    F,
    G,
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Group::F => write!(f, "F"),
            Group::G => write!(f, "G"),
        }
    }
}

/// One observation in the depth-versus-depth plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DDPoint {
    pub d_f: f64,
    pub d_g: f64,
    pub group: Group,
}

/// A fitted group: intensity model plus count distribution.
#[derive(Debug, Clone)]
pub struct GroupModel {
    pub intensity: IntensityModel,
    pub cardinality: CardinalityModel,
    pub mean_cardinality: f64,
}

impl GroupModel {
    pub fn new(intensity: IntensityModel, cardinality: CardinalityModel, mean_cardinality: f64) -> Self {
        Self {
            intensity,
            cardinality,
            mean_cardinality,
        }
    }

    /// Fit under a Poisson assumption: kernel intensity, empirical counts.
    pub fn fit_poisson(sample: &TrainSample) -> Result<Self> {
        let intensity = crate::estimate::estimate_intensity_kernel(sample)?;
        Ok(Self::new(
            intensity,
            CardinalityModel::from_sample(sample),
            sample.mean_cardinality(),
        ))
    }

    /// Fit a Markov-interval model for non-Poisson data.
    pub fn fit_interval(sample: &TrainSample) -> Result<Self> {
        let intensity = crate::estimate::estimate_intensity_imi(sample)?;
        Ok(Self::new(
            intensity,
            CardinalityModel::from_sample(sample),
            sample.mean_cardinality(),
        ))
    }

    pub fn depth(&self, train: &SpikeTrain, cfg: &DepthConfig) -> Result<DepthScore> {
        crate::depth::depth(train, &self.intensity, &self.cardinality, cfg)
    }

    /// Depths of a whole sample, sharing one cumulative table when the model
    /// is history-free.
    pub fn depths(&self, sample: &TrainSample, cfg: &DepthConfig) -> Result<Vec<DepthScore>> {
        if self.intensity.is_history_dependent() {
            sample
                .trains()
                .par_iter()
                .map(|t| self.depth(t, cfg))
                .collect()
        } else {
            let ci = cumulative(&self.intensity, None)?;
            Ok(sample
                .trains()
                .par_iter()
                .map(|t| depth_from_cumulative(t, &ci, &self.cardinality, cfg))
                .collect())
        }
    }
}

/// Scatter of both samples' depth pairs, group `F` first.
pub fn dd_plot(
    f_sample: &TrainSample,
    g_sample: &TrainSample,
    gm_f: &GroupModel,
    gm_g: &GroupModel,
    cfg: &DepthConfig,
) -> Result<Vec<DDPoint>> {
    f_sample.domain().ensure_same(g_sample.domain())?;
    let mut points = Vec::with_capacity(f_sample.len() + g_sample.len());
    for (sample, group) in [(f_sample, Group::F), (g_sample, Group::G)] {
        let df = gm_f.depths(sample, cfg)?;
        let dg = gm_g.depths(sample, cfg)?;
        for (a, b) in df.iter().zip(&dg) {
            points.push(DDPoint {
                d_f: a.total,
                d_g: b.total,
                group,
            });
        }
    }
    Ok(points)
}

/// Strictly increasing boundary `f(t) = ∫_0^t exp(h(x)) dx` with polynomial
/// `h(x) = Σ a_i x^i`, tabulated by per-cell Simpson quadrature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryFunction {
    coefficients: Vec<f64>,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl BoundaryFunction {
    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        assert!(!coefficients.is_empty(), "need at least a constant term");
        let nodes: Vec<f64> = (0..QUAD_POINTS)
            .map(|j| j as f64 / (QUAD_POINTS - 1) as f64)
            .collect();
        let mut cumulative = Vec::with_capacity(QUAD_POINTS);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for j in 1..QUAD_POINTS {
            let (a, b) = (nodes[j - 1], nodes[j]);
            let mid = 0.5 * (a + b);
            let h = b - a;
            acc += h / 6.0
                * (poly_exp(&coefficients, a)
                    + 4.0 * poly_exp(&coefficients, mid)
                    + poly_exp(&coefficients, b));
            cumulative.push(acc);
        }
        Self {
            coefficients,
            nodes,
            cumulative,
        }
    }

    /// The identity boundary (`h = 0`), equivalent to the maximum-depth rule.
    pub fn identity() -> Self {
        Self::from_coefficients(vec![0.0])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let step = 1.0 / (QUAD_POINTS - 1) as f64;
        let j = ((t / step) as usize).min(QUAD_POINTS - 2);
        let a = self.nodes[j];
        let h = t - a;
        if h <= 0.0 {
            return self.cumulative[j];
        }
        let mid = a + 0.5 * h;
        self.cumulative[j]
            + h / 6.0
                * (poly_exp(&self.coefficients, a)
                    + 4.0 * poly_exp(&self.coefficients, mid)
                    + poly_exp(&self.coefficients, t))
    }

    /// `(t, f(t))` pairs on a uniform grid, for export and plotting.
    pub fn samples(&self, count: usize) -> Vec<(f64, f64)> {
        (0..count)
            .map(|i| {
                let t = i as f64 / (count - 1) as f64;
                (t, self.eval(t))
            })
            .collect()
    }
}

fn poly_eval(coefficients: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coefficients.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_exp(coefficients: &[f64], x: f64) -> f64 {
    poly_eval(coefficients, x).exp()
}

/// Hyper-parameters of the boundary optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Polynomial degree of `h`.
    pub degree: usize,
    /// Gradient step size η.
    pub learning_rate: f64,
    /// Geometric temperature factor per iteration, in (0, 1).
    pub annealing: f64,
    /// Stop when the iterate moves less than this.
    pub tolerance: f64,
    /// Logistic steepness replacing the indicator.
    pub steepness: f64,
    /// Independent optimization runs; the identity boundary is always an
    /// extra candidate.
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: RngSeed,
    /// Redraw the perturbation every iteration (default); `false` reproduces
    /// the literal once-drawn variant.
    pub redraw_noise: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            degree: 5,
            learning_rate: 0.05,
            annealing: 0.95,
            tolerance: 1e-4,
            steepness: 100.0,
            restarts: 5,
            max_iterations: 2000,
            seed: 0,
            redraw_noise: true,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0)
            || !(self.annealing > 0.0 && self.annealing < 1.0)
            || !(self.tolerance > 0.0)
            || !(self.steepness > 0.0)
            || self.max_iterations == 0
        {
            return Err(Error::InvalidParameter(
                "optimizer needs positive learning rate, tolerance and steepness, \
                 annealing in (0,1), and at least one iteration"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// A trained boundary with its in-sample hard error.
#[derive(Debug, Clone)]
pub struct TrainedBoundary {
    pub boundary: BoundaryFunction,
    pub training_error: f64,
    /// `false` when the winning run exhausted its iteration budget; the best
    /// iterate is returned regardless.
    pub converged: bool,
}

/// Hard misclassification rate of a boundary on labeled depth pairs.
///
/// An exact tie `d_G = f(d_F)` is resolved toward group `F`, matching the
/// classifier's deterministic fallback.
pub fn misclassification_rate(points: &[DDPoint], boundary: &BoundaryFunction) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let errors = points
        .iter()
        .filter(|p| {
            let fd = boundary.eval(p.d_f);
            match p.group {
                Group::F => p.d_g > fd,
                Group::G => p.d_g <= fd,
            }
        })
        .count();
    errors as f64 / points.len() as f64
}

/// Scratch grids shared by all iterations of a training run.
struct QuadScratch {
    nodes: Vec<f64>,
    mids: Vec<f64>,
    /// `nodes[j]^i` for `i = 0..=degree`.
    node_pows: Vec<Vec<f64>>,
    mid_pows: Vec<Vec<f64>>,
}

impl QuadScratch {
    fn new(degree: usize) -> Self {
        let nodes: Vec<f64> = (0..QUAD_POINTS)
            .map(|j| j as f64 / (QUAD_POINTS - 1) as f64)
            .collect();
        let mids: Vec<f64> = (0..QUAD_POINTS - 1)
            .map(|j| (nodes[j] + nodes[j + 1]) * 0.5)
            .collect();
        let pows = |xs: &[f64]| -> Vec<Vec<f64>> {
            (0..=degree)
                .map(|i| xs.iter().map(|x| x.powi(i as i32)).collect())
                .collect()
        };
        Self {
            node_pows: pows(&nodes),
            mid_pows: pows(&mids),
            nodes,
            mids,
        }
    }
}

/// Cumulative tables of `∫ x^i exp(h)` for `i = 0..=degree`; index 0 is the
/// boundary itself.
fn build_tables(coeffs: &[f64], scratch: &QuadScratch) -> Vec<Vec<f64>> {
    let degree = coeffs.len() - 1;
    let e_nodes: Vec<f64> = scratch.nodes.iter().map(|&x| poly_exp(coeffs, x)).collect();
    let e_mids: Vec<f64> = scratch.mids.iter().map(|&x| poly_exp(coeffs, x)).collect();
    let h = 1.0 / (QUAD_POINTS - 1) as f64;
    let mut tables = vec![vec![0.0; QUAD_POINTS]; degree + 1];
    for i in 0..=degree {
        let npow = &scratch.node_pows[i];
        let mpow = &scratch.mid_pows[i];
        let mut acc = 0.0;
        for j in 1..QUAD_POINTS {
            acc += h / 6.0
                * (npow[j - 1] * e_nodes[j - 1]
                    + 4.0 * mpow[j - 1] * e_mids[j - 1]
                    + npow[j] * e_nodes[j]);
            tables[i][j] = acc;
        }
    }
    tables
}

fn interp(table: &[f64], d: f64) -> f64 {
    let d = d.clamp(0.0, 1.0);
    let pos = d * (QUAD_POINTS - 1) as f64;
    let j = (pos as usize).min(QUAD_POINTS - 2);
    let frac = pos - j as f64;
    table[j] + frac * (table[j + 1] - table[j])
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Smoothed objective and its gradient in the polynomial coefficients.
fn smoothed_objective(
    points: &[DDPoint],
    tables: &[Vec<f64>],
    steepness: f64,
) -> (f64, Vec<f64>) {
    let dim = tables.len();
    let mut value = 0.0;
    let mut grad = vec![0.0; dim];
    for p in points {
        let fd = interp(&tables[0], p.d_f);
        let (z, sign) = match p.group {
            Group::F => (steepness * (p.d_g - fd), -1.0),
            Group::G => (steepness * (fd - p.d_g), 1.0),
        };
        let s = sigmoid(z);
        value += s;
        let factor = sign * steepness * s * (1.0 - s);
        for (i, g) in grad.iter_mut().enumerate() {
            *g += factor * interp(&tables[i], p.d_f);
        }
    }
    let scale = 1.0 / points.len() as f64;
    for g in grad.iter_mut() {
        *g *= scale;
    }
    (value * scale, grad)
}

fn hard_error_from_tables(points: &[DDPoint], tables: &[Vec<f64>]) -> f64 {
    let errors = points
        .iter()
        .filter(|p| {
            let fd = interp(&tables[0], p.d_f);
            match p.group {
                Group::F => p.d_g > fd,
                Group::G => p.d_g <= fd,
            }
        })
        .count();
    errors as f64 / points.len() as f64
}

struct RunOutcome {
    coefficients: Vec<f64>,
    converged: bool,
}

fn run_optimizer(
    points: &[DDPoint],
    cfg: &OptimizerConfig,
    scratch: &QuadScratch,
    run_index: u64,
) -> RunOutcome {
    let dim = cfg.degree + 1;
    let mut rng = substream(cfg.seed, stream_tag::BOUNDARY, run_index);
    let frozen_noise: Vec<f64> = (0..dim)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let mut a = vec![0.0; dim];
    let mut temperature = 1.0_f64;
    let mut best = a.clone();
    let mut best_hard = hard_error_from_tables(points, &build_tables(&a, scratch));
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        let tables = build_tables(&a, scratch);
        let (_, grad) = smoothed_objective(points, &tables, cfg.steepness);
        let noise_scale = (cfg.learning_rate * temperature).sqrt();
        let mut step_norm_sq = 0.0;
        let mut a_new = Vec::with_capacity(dim);
        for i in 0..dim {
            let z: f64 = if cfg.redraw_noise {
                StandardNormal.sample(&mut rng)
            } else {
                frozen_noise[i]
            };
            let step = -cfg.learning_rate * grad[i] + noise_scale * z;
            step_norm_sq += step * step;
            a_new.push(a[i] + step);
        }
        let hard = hard_error_from_tables(points, &build_tables(&a_new, scratch));
        if hard < best_hard {
            best_hard = hard;
            best = a_new.clone();
        }
        a = a_new;
        temperature *= cfg.annealing;
        if step_norm_sq.sqrt() < cfg.tolerance {
            converged = true;
            break;
        }
    }
    // A converged run yields its final iterate (the annealed optimum); only a
    // run cut off by the iteration budget falls back to the best iterate it
    // visited. Either way, finish with the zero-temperature limit of the
    // iteration: plain gradient steps until the iterate settles, which makes
    // the run's output a deterministic function of its basin.
    let mut polished = if converged { a } else { best };
    let polish_rate = cfg.learning_rate / 5.0;
    for _ in 0..1000 {
        let tables = build_tables(&polished, scratch);
        let (_, grad) = smoothed_objective(points, &tables, cfg.steepness);
        let mut step_norm_sq = 0.0;
        for (p, g) in polished.iter_mut().zip(&grad) {
            let step = -polish_rate * g;
            step_norm_sq += step * step;
            *p += step;
        }
        if step_norm_sq.sqrt() < cfg.tolerance {
            break;
        }
    }
    RunOutcome {
        coefficients: polished,
        converged,
    }
}

/// Train the monotone boundary: the best of `restarts` perturbed-gradient runs
/// and the identity initialization, judged by the hard misclassification rate.
pub fn train_boundary(points: &[DDPoint], cfg: &OptimizerConfig) -> Result<TrainedBoundary> {
    cfg.validate()?;
    let has_f = points.iter().any(|p| p.group == Group::F);
    let has_g = points.iter().any(|p| p.group == Group::G);
    if !has_f || !has_g {
        return Err(Error::InvalidParameter(
            "boundary training needs at least one point per group".into(),
        ));
    }
    let scratch = QuadScratch::new(cfg.degree);
    let runs: Vec<RunOutcome> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|run| run_optimizer(points, cfg, &scratch, run))
        .collect();

    // Identity candidate first: ties resolve toward the simplest boundary.
    let mut candidates: Vec<(Vec<f64>, bool)> = vec![(vec![0.0; cfg.degree + 1], true)];
    candidates.extend(runs.into_iter().map(|r| (r.coefficients, r.converged)));

    let mut best: Option<(BoundaryFunction, f64, bool)> = None;
    for (coeffs, converged) in candidates {
        let boundary = BoundaryFunction::from_coefficients(coeffs);
        let err = misclassification_rate(points, &boundary);
        match &best {
            Some((_, best_err, _)) if err >= *best_err => {}
            _ => best = Some((boundary, err, converged)),
        }
    }
    let (boundary, training_error, converged) = best.unwrap();
    Ok(TrainedBoundary {
        boundary,
        training_error,
        converged,
    })
}

fn cardinality_tie_break(k: usize, mean_f: f64, mean_g: f64) -> Group {
    let df = (k as f64 - mean_f).abs();
    let dg = (k as f64 - mean_g).abs();
    if dg < df {
        Group::G
    } else {
        Group::F
    }
}

fn decide(fd_f: f64, d_g: f64, tie: impl FnOnce() -> Group) -> Group {
    if fd_f > d_g {
        Group::F
    } else if fd_f < d_g {
        Group::G
    } else {
        tie()
    }
}

/// Depth-versus-depth rule: group `F` when `f(d_F) > d_G`. Exact ties (which
/// include unseen cardinalities with both depths zero) go to the group whose
/// mean cardinality is nearer, then to `F`.
pub fn classify_dd(
    train: &SpikeTrain,
    gm_f: &GroupModel,
    gm_g: &GroupModel,
    cfg: &DepthConfig,
    boundary: &BoundaryFunction,
) -> Result<Group> {
    let d_f = gm_f.depth(train, cfg)?.total;
    let d_g = gm_g.depth(train, cfg)?.total;
    Ok(decide(boundary.eval(d_f), d_g, || {
        cardinality_tie_break(
            train.cardinality(),
            gm_f.mean_cardinality,
            gm_g.mean_cardinality,
        )
    }))
}

/// Batch of [`classify_dd`] sharing cumulative tables across the sample.
pub fn classify_dd_batch(
    sample: &TrainSample,
    gm_f: &GroupModel,
    gm_g: &GroupModel,
    cfg: &DepthConfig,
    boundary: &BoundaryFunction,
) -> Result<Vec<Group>> {
    let df = gm_f.depths(sample, cfg)?;
    let dg = gm_g.depths(sample, cfg)?;
    Ok(sample
        .trains()
        .iter()
        .zip(df.iter().zip(&dg))
        .map(|(train, (a, b))| {
            decide(boundary.eval(a.total), b.total, || {
                cardinality_tie_break(
                    train.cardinality(),
                    gm_f.mean_cardinality,
                    gm_g.mean_cardinality,
                )
            })
        })
        .collect())
}

/// The intensity-approximation variant shares the decision rule with
/// [`classify_dd`]; it differs only upstream, where the non-Poisson group's
/// model is deliberately fitted as a kernel curve instead of a
/// Markov-interval model.
pub fn classify_ia(
    train: &SpikeTrain,
    gm_f: &GroupModel,
    gm_g_kernel: &GroupModel,
    cfg: &DepthConfig,
    boundary: &BoundaryFunction,
) -> Result<Group> {
    classify_dd(train, gm_f, gm_g_kernel, cfg, boundary)
}

/// Maximum-depth rule: the depth-versus-depth rule with the identity boundary.
pub fn classify_md(
    train: &SpikeTrain,
    gm_f: &GroupModel,
    gm_g: &GroupModel,
    cfg: &DepthConfig,
) -> Result<Group> {
    let d_f = gm_f.depth(train, cfg)?.total;
    let d_g = gm_g.depth(train, cfg)?.total;
    Ok(decide(d_f, d_g, || {
        cardinality_tie_break(
            train.cardinality(),
            gm_f.mean_cardinality,
            gm_g.mean_cardinality,
        )
    }))
}

/// Batch of [`classify_md`].
pub fn classify_md_batch(
    sample: &TrainSample,
    gm_f: &GroupModel,
    gm_g: &GroupModel,
    cfg: &DepthConfig,
) -> Result<Vec<Group>> {
    let df = gm_f.depths(sample, cfg)?;
    let dg = gm_g.depths(sample, cfg)?;
    Ok(sample
        .trains()
        .iter()
        .zip(df.iter().zip(&dg))
        .map(|(train, (a, b))| {
            decide(a.total, b.total, || {
                cardinality_tie_break(
                    train.cardinality(),
                    gm_f.mean_cardinality,
                    gm_g.mean_cardinality,
                )
            })
        })
        .collect())
}

/// Gaussian likelihood model over binned spike counts, diagonal covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LmModel {
    domain: TimeDomain,
    means: Vec<f64>,
    variances: Vec<f64>,
}

fn bin_counts(train: &SpikeTrain, domain: &TimeDomain, bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; bins];
    let width = domain.length() / bins as f64;
    for &t in train.times() {
        let idx = (((t - domain.start()) / width) as usize).min(bins - 1);
        counts[idx] += 1.0;
    }
    counts
}

/// Fit the likelihood baseline on one group.
pub fn fit_lm(sample: &TrainSample, bins: usize) -> Result<LmModel> {
    if bins == 0 {
        return Err(Error::InvalidParameter("bin count must be positive".into()));
    }
    let domain = *sample.domain();
    let n = sample.len() as f64;
    let mut means = vec![0.0; bins];
    let mut sq = vec![0.0; bins];
    for train in sample.trains() {
        for (b, c) in bin_counts(train, &domain, bins).into_iter().enumerate() {
            means[b] += c;
            sq[b] += c * c;
        }
    }
    let mut variances = vec![0.0; bins];
    for b in 0..bins {
        means[b] /= n;
        variances[b] = (sq[b] / n - means[b] * means[b]).max(LM_VARIANCE_FLOOR);
    }
    Ok(LmModel {
        domain,
        means,
        variances,
    })
}

impl LmModel {
    pub fn log_likelihood(&self, train: &SpikeTrain) -> f64 {
        let counts = bin_counts(train, &self.domain, self.means.len());
        let mut ll = 0.0;
        for ((&x, &mu), &var) in counts.iter().zip(&self.means).zip(&self.variances) {
            ll += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (x - mu) * (x - mu) / (2.0 * var);
        }
        ll
    }
}

/// Likelihood rule: the larger binned Gaussian log-likelihood wins; an exact
/// tie goes to group `F`.
pub fn classify_lm(train: &SpikeTrain, lm_f: &LmModel, lm_g: &LmModel) -> Group {
    if lm_g.log_likelihood(train) > lm_f.log_likelihood(train) {
        Group::G
    } else {
        Group::F
    }
}

/// Minimum-distance-to-median rule under the elastic metric. An equidistant
/// train goes to the group whose median cardinality is nearer, then to `F`.
pub fn classify_mm2(
    train: &SpikeTrain,
    median_f: &SpikeTrain,
    median_g: &SpikeTrain,
    mu: f64,
) -> Result<Group> {
    let df = d_mu(train, median_f, mu)?;
    let dg = d_mu(train, median_g, mu)?;
    if df < dg {
        Ok(Group::F)
    } else if dg < df {
        Ok(Group::G)
    } else {
        Ok(cardinality_tie_break(
            train.cardinality(),
            median_f.cardinality() as f64,
            median_g.cardinality() as f64,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point(d_f: f64, d_g: f64, group: Group) -> DDPoint {
        DDPoint { d_f, d_g, group }
    }

    fn separated_cloud() -> Vec<DDPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut points = Vec::new();
        for _ in 0..100 {
            let x: f64 = rng.random::<f64>() * 0.5 + 0.45;
            let y = x * 0.4 * rng.random::<f64>();
            points.push(point(x, y, Group::F));
            let x2: f64 = rng.random::<f64>() * 0.3;
            let y2 = 0.5 + 0.45 * rng.random::<f64>();
            points.push(point(x2, y2, Group::G));
        }
        points
    }

    #[test]
    fn identity_boundary_is_the_diagonal() {
        let b = BoundaryFunction::identity();
        for t in [0.0, 0.3, 0.77, 1.0] {
            assert!((b.eval(t) - t).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_is_strictly_increasing_through_origin() {
        let b = BoundaryFunction::from_coefficients(vec![0.3, -1.2, 2.0, 0.5, -0.7, 0.1]);
        assert_eq!(b.eval(0.0), 0.0);
        let samples = b.samples(1001);
        for w in samples.windows(2) {
            assert!(w[1].1 > w[0].1, "not increasing at {:?}", w);
        }
    }

    #[test]
    fn misclassification_examples() {
        let cloud = separated_cloud();
        // Any boundary between the clouds scores zero.
        let b = BoundaryFunction::identity();
        assert_eq!(misclassification_rate(&cloud, &b), 0.0);
        // All points swapped sides score one.
        let swapped: Vec<DDPoint> = cloud
            .iter()
            .map(|p| DDPoint {
                d_f: p.d_f,
                d_g: p.d_g,
                group: match p.group {
                    Group::F => Group::G,
                    Group::G => Group::F,
                },
            })
            .collect();
        assert_eq!(misclassification_rate(&swapped, &b), 1.0);
    }

    #[test]
    fn identity_boundary_matches_md_error_on_symmetric_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut points = Vec::new();
        for _ in 0..200 {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            points.push(point(x, y, Group::F));
            points.push(point(y, x, Group::G));
        }
        let b = BoundaryFunction::identity();
        let dd_err = misclassification_rate(&points, &b);
        // Maximum-depth errors: F-point errs when d_g > d_f, G-point when
        // d_g <= d_f (ties to F). Same rule, same count.
        let md_err = points
            .iter()
            .filter(|p| match p.group {
                Group::F => p.d_g > p.d_f,
                Group::G => p.d_g <= p.d_f,
            })
            .count() as f64
            / points.len() as f64;
        assert!((dd_err - md_err).abs() < 1e-12);
    }

    #[test]
    fn training_separable_clouds_reaches_zero_error() {
        let cloud = separated_cloud();
        let cfg = OptimizerConfig {
            restarts: 3,
            max_iterations: 800,
            seed: 9,
            ..OptimizerConfig::default()
        };
        let trained = train_boundary(&cloud, &cfg).unwrap();
        assert_eq!(trained.training_error, 0.0);
    }

    #[test]
    fn training_needs_both_groups() {
        let points = vec![point(0.5, 0.5, Group::F)];
        assert!(train_boundary(&points, &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn smoothed_objective_tracks_hard_error() {
        let cloud = separated_cloud();
        let cfg = OptimizerConfig::default();
        let scratch = QuadScratch::new(cfg.degree);
        let coeffs = vec![0.2, -0.4, 0.3, 0.0, 0.1, -0.2];
        let tables = build_tables(&coeffs, &scratch);
        let (smooth, _) = smoothed_objective(&cloud, &tables, cfg.steepness);
        let boundary = BoundaryFunction::from_coefficients(coeffs);
        let hard = misclassification_rate(&cloud, &boundary);
        let near = cloud
            .iter()
            .filter(|p| (p.d_g - boundary.eval(p.d_f)).abs() < 5.0 / cfg.steepness)
            .count() as f64
            / cloud.len() as f64;
        // Logistic tail bound: far points each contribute at most σ(-5).
        assert!(
            (smooth - hard).abs() <= near + 0.007,
            "smooth {smooth} hard {hard} near {near}"
        );
    }

    #[test]
    fn identity_boundary_classification_matches_maximum_depth() {
        use crate::model::TimeDomain;
        use crate::simulate::{sample_hpp, sample_ipp};
        use crate::intensity::CurveIntensity;
        let domain = TimeDomain::unit();
        let f_sample = sample_hpp(8.0, domain, 60, 41).unwrap();
        let curve = CurveIntensity::from_fn(domain, |t| 96.0 * (t - 0.5) * (t - 0.5)).unwrap();
        let g_sample = sample_ipp(&curve, 60, 42).unwrap();
        let gm_f = GroupModel::fit_poisson(&f_sample).unwrap();
        let gm_g = GroupModel::fit_poisson(&g_sample).unwrap();
        let cfg = DepthConfig::default();
        let b = BoundaryFunction::identity();
        for sample in [&f_sample, &g_sample] {
            let dd = classify_dd_batch(sample, &gm_f, &gm_g, &cfg, &b).unwrap();
            let md = classify_md_batch(sample, &gm_f, &gm_g, &cfg).unwrap();
            assert_eq!(dd, md);
        }
    }

    #[test]
    fn dd_plot_of_identical_groups_sits_on_the_diagonal() {
        use crate::model::TimeDomain;
        use crate::simulate::sample_hpp;
        let sample = sample_hpp(6.0, TimeDomain::unit(), 40, 3).unwrap();
        let gm = GroupModel::fit_poisson(&sample).unwrap();
        let points = dd_plot(&sample, &sample, &gm, &gm, &DepthConfig::default()).unwrap();
        assert_eq!(points.len(), 80);
        for p in points {
            assert_eq!(p.d_f.to_bits(), p.d_g.to_bits());
        }
    }

    #[test]
    fn classify_rules_on_extreme_depths_and_ties() {
        use crate::intensity::IntensityModel;
        use crate::model::{SpikeTrain, TimeDomain};
        let domain = TimeDomain::unit();
        let cfg = DepthConfig::default();
        let train = SpikeTrain::new(vec![1.0 / 3.0, 2.0 / 3.0], domain).unwrap();
        let model = IntensityModel::constant(2.0, domain).unwrap();
        // d_F = 1 (modal count, equal spacings), d_G = 0 (count outside the
        // support): assigned to F by any valid boundary.
        let gm_f = GroupModel::new(
            model.clone(),
            CardinalityModel::from_pmf(vec![0.0, 0.0, 1.0]).unwrap(),
            2.0,
        );
        let gm_g = GroupModel::new(
            model.clone(),
            CardinalityModel::from_pmf(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap(),
            5.0,
        );
        let b = BoundaryFunction::identity();
        assert_eq!(classify_dd(&train, &gm_f, &gm_g, &cfg, &b).unwrap(), Group::F);
        assert_eq!(classify_md(&train, &gm_f, &gm_g, &cfg).unwrap(), Group::F);

        // Cardinality outside both supports: both depths 0, the fallback goes
        // to the group with the nearer mean count.
        let gm_f0 = GroupModel::new(
            model.clone(),
            CardinalityModel::from_pmf(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap(),
            7.0,
        );
        let gm_g0 = GroupModel::new(
            model.clone(),
            CardinalityModel::from_pmf(vec![0.0, 0.0, 0.0, 1.0]).unwrap(),
            3.0,
        );
        let s = gm_f0.depth(&train, &cfg).unwrap();
        assert_eq!(s.total, 0.0);
        assert_eq!(
            classify_dd(&train, &gm_f0, &gm_g0, &cfg, &b).unwrap(),
            Group::G
        );
    }

    #[test]
    fn lm_identical_models_fall_back_to_first_group() {
        use crate::model::TimeDomain;
        use crate::simulate::sample_hpp;
        let sample = sample_hpp(5.0, TimeDomain::unit(), 50, 9).unwrap();
        let lm = fit_lm(&sample, DEFAULT_LM_BINS).unwrap();
        for t in sample.trains() {
            assert_eq!(classify_lm(t, &lm, &lm), Group::F);
        }
        // On balanced groups the deterministic fallback halves the errors.
    }

    #[test]
    fn lm_separates_disjoint_count_ranges() {
        use crate::model::TimeDomain;
        use crate::simulate::sample_hpp;
        let slow = sample_hpp(2.0, TimeDomain::unit(), 100, 11).unwrap();
        let fast = sample_hpp(30.0, TimeDomain::unit(), 100, 12).unwrap();
        let lm_f = fit_lm(&slow, DEFAULT_LM_BINS).unwrap();
        let lm_g = fit_lm(&fast, DEFAULT_LM_BINS).unwrap();
        let errs = slow
            .trains()
            .iter()
            .filter(|t| classify_lm(t, &lm_f, &lm_g) != Group::F)
            .count()
            + fast
                .trains()
                .iter()
                .filter(|t| classify_lm(t, &lm_f, &lm_g) != Group::G)
                .count();
        assert_eq!(errs, 0);
    }

    #[test]
    fn mm2_assigns_to_own_median_and_breaks_exact_ties() {
        use crate::model::{SpikeTrain, TimeDomain};
        let domain = TimeDomain::unit();
        let med_f = SpikeTrain::new(vec![0.25, 0.5, 0.75], domain).unwrap();
        let med_g = SpikeTrain::new(vec![0.1, 0.9], domain).unwrap();
        assert_eq!(
            classify_mm2(&med_f, &med_f, &med_g, 20.0).unwrap(),
            Group::F
        );
        assert_eq!(
            classify_mm2(&med_g, &med_f, &med_g, 20.0).unwrap(),
            Group::G
        );
        // Identical medians: both distances coincide exactly, the terminal
        // fallback picks the first group.
        let probe = SpikeTrain::new(vec![0.4], domain).unwrap();
        assert_eq!(
            classify_mm2(&probe, &med_f, &med_f.clone(), 20.0).unwrap(),
            Group::F
        );
    }

    #[test]
    fn depth_ordering_consistency_of_monotone_boundary() {
        let cloud = separated_cloud();
        let trained = train_boundary(
            &cloud,
            &OptimizerConfig {
                restarts: 2,
                max_iterations: 400,
                seed: 4,
                ..OptimizerConfig::default()
            },
        )
        .unwrap();
        let f = &trained.boundary;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let (af, ag): (f64, f64) = (rng.random(), rng.random());
            let (bf, bg): (f64, f64) = (rng.random(), rng.random());
            // Arrange A weakly left/above B.
            let (a, b) = ((af.min(bf), ag.max(bg)), (af.max(bf), ag.min(bg)));
            let b_to_g = f.eval(b.0) < b.1;
            if b_to_g {
                assert!(f.eval(a.0) < a.1, "monotone consistency violated");
            }
        }
    }
}
