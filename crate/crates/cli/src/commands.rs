//! Implementations of the CLI subcommands.

use crate::error::{CliError, CliResult};
use crate::experiments::{
    self, ClassExperiment, ClassOptions, DetectionSim, MedianSim,
};
use crate::formats;
use crate::recipes;
use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};
use spikedepth_core::ddclass::{
    classify_dd_batch, classify_lm, classify_md_batch, classify_mm2, dd_plot, fit_lm,
    train_boundary, BoundaryFunction, Group, GroupModel, OptimizerConfig, DEFAULT_LM_BINS,
};
use spikedepth_core::{
    detect_outliers, estimate_median, sample_hawkes, sample_hpp, sample_ipp, BaselineIntensity,
    CardinalityModel, ConstantIntensity, DepthConfig, DepthVariant, HawkesIntensity,
    IntensityModel, TimeDomain, TrainSample,
};
use std::fs;
use std::path::{Path, PathBuf};

pub fn parse_variant(s: &str) -> CliResult<DepthVariant> {
    match s {
        "ilr" => Ok(DepthVariant::Ilr),
        "simplified" => Ok(DepthVariant::Simplified),
        other => Err(CliError::Validation(format!(
            "unknown depth variant '{other}' (expected ilr|simplified)"
        ))),
    }
}

fn depth_config(r: f64, variant: &str) -> CliResult<DepthConfig> {
    DepthConfig::new(r, parse_variant(variant)?).map_err(Into::into)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct CommonSimArgs {
    /// Number of trains to generate.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub t_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Label attached to every generated train.
    #[arg(long)]
    pub label: Option<String>,
    /// Output train file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Homogeneous Poisson trains.
    Hpp {
        #[command(flatten)]
        common: CommonSimArgs,
        #[arg(long)]
        rate: f64,
        /// Confine events to a sub-window (burst generation).
        #[arg(long)]
        window_start: Option<f64>,
        #[arg(long)]
        window_end: Option<f64>,
    },
    /// Inhomogeneous Poisson trains from a named curve or model file.
    Ipp {
        #[command(flatten)]
        common: CommonSimArgs,
        /// One of sinusoid|parabola|bimodal|trimodal.
        #[arg(long, conflicts_with = "model")]
        curve: Option<String>,
        /// JSON intensity model file.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Self-exciting trains.
    Hawkes {
        #[command(flatten)]
        common: CommonSimArgs,
        /// Named baseline curve.
        #[arg(long, conflicts_with = "base_rate")]
        base_curve: Option<String>,
        /// Constant baseline rate.
        #[arg(long)]
        base_rate: Option<f64>,
        /// Scale applied to the named baseline curve.
        #[arg(long, default_value_t = 1.0)]
        base_scale: f64,
        #[arg(long)]
        jump: f64,
        #[arg(long)]
        decay: f64,
    },
}

fn attach_label(sample: TrainSample, label: &Option<String>) -> CliResult<TrainSample> {
    match label {
        None => Ok(sample),
        Some(l) => {
            let labels = vec![Some(l.clone()); sample.len()];
            TrainSample::with_labels(sample.trains().to_vec(), labels).map_err(Into::into)
        }
    }
}

pub fn run_simulate(cmd: SimulateCommand) -> CliResult<()> {
    let (common, sample) = match cmd {
        SimulateCommand::Hpp {
            common,
            rate,
            window_start,
            window_end,
        } => {
            let domain = TimeDomain::new(common.t_start, common.t_end)?;
            let sample = match (window_start, window_end) {
                (None, None) => sample_hpp(rate, domain, common.n, common.seed)?,
                (Some(lo), Some(hi)) => {
                    let trains =
                        recipes::windowed_hpp(rate, lo, hi, domain, common.n, common.seed)?;
                    TrainSample::new(trains)?
                }
                _ => {
                    return Err(CliError::Validation(
                        "window-start and window-end must be given together".into(),
                    ))
                }
            };
            (common, sample)
        }
        SimulateCommand::Ipp {
            common,
            curve,
            model,
        } => {
            let domain = TimeDomain::new(common.t_start, common.t_end)?;
            let curve_model = match (curve, model) {
                (Some(name), None) => recipes::named_curve(&name, domain)?,
                (None, Some(path)) => match load_model(&path)? {
                    IntensityModel::Curve(c) => c,
                    _ => {
                        return Err(CliError::Validation(
                            "ipp simulation needs a curve model".into(),
                        ))
                    }
                },
                _ => {
                    return Err(CliError::Validation(
                        "give exactly one of --curve or --model".into(),
                    ))
                }
            };
            let sample = sample_ipp(&curve_model, common.n, common.seed)?;
            (common, sample)
        }
        SimulateCommand::Hawkes {
            common,
            base_curve,
            base_rate,
            base_scale,
            jump,
            decay,
        } => {
            let domain = TimeDomain::new(common.t_start, common.t_end)?;
            let base = match (base_curve, base_rate) {
                (Some(name), None) => {
                    BaselineIntensity::Curve(recipes::curve_scaled(&name, base_scale, domain)?)
                }
                (None, Some(rate)) => {
                    BaselineIntensity::Constant(ConstantIntensity::new(rate * base_scale, domain)?)
                }
                _ => {
                    return Err(CliError::Validation(
                        "give exactly one of --base-curve or --base-rate".into(),
                    ))
                }
            };
            let model = HawkesIntensity::new(base, jump, decay)?;
            let sample = sample_hawkes(&model, common.n, common.seed)?;
            (common, sample)
        }
    };
    let sample = attach_label(sample, &common.label)?;
    formats::write_train_file(&common.out, &sample)?;
    println!(
        "wrote {} trains (mean count {:.3}) to {}",
        sample.len(),
        sample.mean_cardinality(),
        common.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// model sourcing shared by depth / median / detect
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ModelSourceArgs {
    /// Fit the intensity from the input sample: kernel (Poisson) or imi.
    #[arg(long, conflicts_with_all = ["model", "rate"])]
    pub fit: Option<String>,
    /// Load a JSON intensity model.
    #[arg(long, conflicts_with = "rate")]
    pub model: Option<PathBuf>,
    /// Declare a constant rate.
    #[arg(long)]
    pub rate: Option<f64>,
}

fn load_model(path: &Path) -> CliResult<IntensityModel> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

impl ModelSourceArgs {
    pub fn resolve(&self, sample: &TrainSample) -> CliResult<IntensityModel> {
        match (&self.fit, &self.model, self.rate) {
            (Some(kind), None, None) => match kind.as_str() {
                "kernel" => spikedepth_core::estimate_intensity_kernel(sample).map_err(Into::into),
                "imi" => spikedepth_core::estimate_intensity_imi(sample).map_err(Into::into),
                other => Err(CliError::Validation(format!(
                    "unknown fit '{other}' (expected kernel|imi)"
                ))),
            },
            (None, Some(path), None) => {
                let model = load_model(path)?;
                model.domain().ensure_same(sample.domain())?;
                Ok(model)
            }
            (None, None, Some(rate)) => {
                IntensityModel::constant(rate, *sample.domain()).map_err(Into::into)
            }
            (None, None, None) => {
                spikedepth_core::estimate_intensity_kernel(sample).map_err(Into::into)
            }
            _ => Err(CliError::Validation(
                "give at most one of --fit, --model, --rate".into(),
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// depth
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub source: ModelSourceArgs,
    #[arg(long, default_value = "ilr")]
    pub variant: String,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Save the fitted model as JSON.
    #[arg(long)]
    pub save_model: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DepthRow {
    pub index: usize,
    pub cardinality: usize,
    pub weight: f64,
    pub conditional: f64,
    pub total: f64,
    pub degenerate: bool,
}

pub fn run_depth(args: DepthArgs) -> CliResult<()> {
    let loaded = formats::read_train_file(&args.input)?;
    if loaded.perturbed_events > 0 {
        eprintln!("perturbed {} tied event times by 1e-9", loaded.perturbed_events);
    }
    let sample = loaded.sample;
    let model = args.source.resolve(&sample)?;
    let cfg = depth_config(args.r, &args.variant)?;
    let cm = CardinalityModel::from_sample(&sample);
    let gm = GroupModel::new(model.clone(), cm, sample.mean_cardinality());
    let scores = gm.depths(&sample, &cfg)?;
    let rows: Vec<DepthRow> = scores
        .iter()
        .enumerate()
        .map(|(index, s)| DepthRow {
            index,
            cardinality: sample.trains()[index].cardinality(),
            weight: s.weight,
            conditional: s.conditional,
            total: s.total,
            degenerate: s.degenerate,
        })
        .collect();
    formats::write_csv(&args.out, &rows)?;
    if let Some(path) = args.save_model {
        formats::write_json(&path, &model)?;
    }
    println!("scored {} trains to {}", rows.len(), args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// median
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct MedianArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub source: ModelSourceArgs,
    #[arg(long, default_value = "ilr")]
    pub variant: String,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long)]
    pub out_json: PathBuf,
    /// Also write the median as a single-train file.
    #[arg(long)]
    pub out_train: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct MedianReport {
    cardinality: usize,
    times: Vec<f64>,
    total_depth: f64,
    weight: f64,
    conditional_depth: f64,
}

pub fn run_median(args: MedianArgs) -> CliResult<()> {
    let sample = formats::read_train_file(&args.input)?.sample;
    let model = args.source.resolve(&sample)?;
    let cfg = depth_config(args.r, &args.variant)?;
    let cm = CardinalityModel::from_sample(&sample);
    let med = estimate_median(&sample, &model, &cm, &cfg)?;
    let report = MedianReport {
        cardinality: med.cardinality,
        times: med.median.times().to_vec(),
        total_depth: med.score.total,
        weight: med.score.weight,
        conditional_depth: med.score.conditional,
    };
    formats::write_json(&args.out_json, &report)?;
    if let Some(path) = args.out_train {
        let single = TrainSample::new(vec![med.median.clone()])?;
        formats::write_train_file(&path, &single)?;
    }
    println!(
        "median has {} spikes, depth {:.6}",
        med.cardinality, med.score.total
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub source: ModelSourceArgs,
    #[arg(long, default_value = "ilr")]
    pub variant: String,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = spikedepth_core::outlier::DEFAULT_MC_DRAWS)]
    pub n_mc: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_csv: PathBuf,
    #[arg(long)]
    pub out_json: PathBuf,
}

#[derive(Debug, Serialize)]
struct DetectSummary {
    delta: f64,
    n_mc: usize,
    seed: u64,
    scored: usize,
    flagged: usize,
    metrics: Option<spikedepth_core::DetectionMetrics>,
}

pub fn run_detect(args: DetectArgs) -> CliResult<()> {
    let sample = formats::read_train_file(&args.input)?.sample;
    let model = args.source.resolve(&sample)?;
    let cfg = depth_config(args.r, &args.variant)?;
    let cm = CardinalityModel::from_sample(&sample);
    let report = detect_outliers(&sample, &model, &cm, &cfg, args.delta, args.n_mc, args.seed)?;
    formats::write_csv(&args.out_csv, &report.rows)?;
    let summary = DetectSummary {
        delta: args.delta,
        n_mc: args.n_mc,
        seed: args.seed,
        scored: report.rows.len(),
        flagged: report.flagged,
        metrics: report.metrics,
    };
    formats::write_json(&args.out_json, &summary)?;
    println!(
        "flagged {} of {} trains at delta {}",
        report.flagged,
        report.rows.len(),
        args.delta
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Labeled training file with exactly two distinct labels.
    #[arg(long)]
    pub train: PathBuf,
    /// Test file; labels optional (used for the error report when present).
    #[arg(long)]
    pub test: PathBuf,
    /// dd|md|lm|mm2|ia
    #[arg(long)]
    pub method: String,
    /// kernel|imi intensity fit for the first group.
    #[arg(long, default_value = "kernel")]
    pub fit_f: String,
    /// kernel|imi intensity fit for the second group.
    #[arg(long, default_value = "kernel")]
    pub fit_g: String,
    #[arg(long, default_value = "ilr")]
    pub variant: String,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 20.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 5)]
    pub k0: usize,
    #[arg(long, default_value_t = spikedepth_core::outlier::DEFAULT_MC_DRAWS)]
    pub n_mc: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Remove detected outliers from each training group before fitting.
    #[arg(long)]
    pub remove_outliers: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DecisionRow {
    pub index: usize,
    pub predicted: String,
    pub actual: Option<String>,
}

#[derive(Debug, Serialize)]
struct ClassifySummary {
    method: String,
    label_f: String,
    label_g: String,
    train_sizes: (usize, usize),
    removed: Option<(usize, usize)>,
    test_size: usize,
    misclassification: Option<f64>,
    seed: u64,
}

fn split_by_label(sample: &TrainSample) -> CliResult<(String, TrainSample, String, TrainSample)> {
    let mut order: Vec<String> = Vec::new();
    for l in sample.labels() {
        match l {
            Some(l) => {
                if !order.contains(l) {
                    order.push(l.clone());
                }
            }
            None => {
                return Err(CliError::Validation(
                    "training file must label every train".into(),
                ))
            }
        }
    }
    if order.len() != 2 {
        return Err(CliError::Validation(format!(
            "training file must carry exactly two labels, found {}",
            order.len()
        )));
    }
    let pick = |label: &str| -> CliResult<TrainSample> {
        let trains: Vec<_> = sample
            .trains()
            .iter()
            .zip(sample.labels())
            .filter(|(_, l)| l.as_deref() == Some(label))
            .map(|(t, _)| t.clone())
            .collect();
        TrainSample::new(trains).map_err(Into::into)
    };
    Ok((
        order[0].clone(),
        pick(&order[0])?,
        order[1].clone(),
        pick(&order[1])?,
    ))
}

fn fit_by_name(name: &str, sample: &TrainSample) -> CliResult<GroupModel> {
    match name {
        "kernel" => GroupModel::fit_poisson(sample).map_err(Into::into),
        "imi" => GroupModel::fit_interval(sample).map_err(Into::into),
        other => Err(CliError::Validation(format!(
            "unknown fit '{other}' (expected kernel|imi)"
        ))),
    }
}

pub fn run_classify(args: ClassifyArgs) -> CliResult<()> {
    let train = formats::read_train_file(&args.train)?.sample;
    let test = formats::read_train_file(&args.test)?.sample;
    let cfg = depth_config(args.r, &args.variant)?;
    let (label_f, mut train_f, label_g, mut train_g) = split_by_label(&train)?;
    fs::create_dir_all(&args.out_dir)?;

    // The intensity-approximation variant is the boundary pipeline with the
    // second group deliberately fitted as a kernel curve.
    let (fit_f_name, fit_g_name) = if args.method == "ia" {
        ("kernel".to_string(), "kernel".to_string())
    } else {
        (args.fit_f.clone(), args.fit_g.clone())
    };

    let mut removed = None;
    if let Some(delta) = args.remove_outliers {
        let mut removed_counts = (0usize, 0usize);
        for (sample, fit_name, slot, count) in [
            (&mut train_f, &fit_f_name, 0u64, &mut removed_counts.0),
            (&mut train_g, &fit_g_name, 1u64, &mut removed_counts.1),
        ] {
            let gm = fit_by_name(fit_name, sample)?;
            let report = detect_outliers(
                sample,
                &gm.intensity,
                &gm.cardinality,
                &cfg,
                delta,
                args.n_mc,
                experiments::derive_seed(args.seed, 0, 900 + slot),
            )?;
            let flagged: std::collections::HashSet<usize> =
                report.flagged_indices().into_iter().collect();
            *count = flagged.len();
            if flagged.len() == sample.len() {
                return Err(CliError::Numerical(
                    "outlier removal flagged every train".into(),
                ));
            }
            *sample = sample.filter_by_index(|i| !flagged.contains(&i))?;
        }
        removed = Some(removed_counts);
    }

    let gm_f = fit_by_name(&fit_f_name, &train_f)?;
    let gm_g = fit_by_name(&fit_g_name, &train_g)?;

    let predictions: Vec<Group> = match args.method.as_str() {
        "dd" | "ia" => {
            let points = dd_plot(&train_f, &train_g, &gm_f, &gm_g, &cfg)?;
            let optimizer = OptimizerConfig {
                degree: args.k0,
                seed: args.seed,
                ..OptimizerConfig::default()
            };
            let trained = train_boundary(&points, &optimizer)?;
            write_boundary_artifacts(&args.out_dir, &points, &trained.boundary)?;
            classify_dd_batch(&test, &gm_f, &gm_g, &cfg, &trained.boundary)?
        }
        "md" => classify_md_batch(&test, &gm_f, &gm_g, &cfg)?,
        "lm" => {
            let lm_f = fit_lm(&train_f, DEFAULT_LM_BINS)?;
            let lm_g = fit_lm(&train_g, DEFAULT_LM_BINS)?;
            test.trains()
                .iter()
                .map(|t| classify_lm(t, &lm_f, &lm_g))
                .collect()
        }
        "mm2" => {
            let med_f = estimate_median(&train_f, &gm_f.intensity, &gm_f.cardinality, &cfg)?;
            let med_g = estimate_median(&train_g, &gm_g.intensity, &gm_g.cardinality, &cfg)?;
            test.trains()
                .iter()
                .map(|t| classify_mm2(t, &med_f.median, &med_g.median, args.mu))
                .collect::<Result<_, _>>()?
        }
        other => {
            return Err(CliError::Validation(format!(
                "unknown method '{other}' (expected dd|md|lm|mm2|ia)"
            )))
        }
    };

    let decisions: Vec<DecisionRow> = predictions
        .iter()
        .enumerate()
        .map(|(index, g)| DecisionRow {
            index,
            predicted: match g {
                Group::F => label_f.clone(),
                Group::G => label_g.clone(),
            },
            actual: test.labels()[index].clone(),
        })
        .collect();
    formats::write_csv(&args.out_dir.join("decisions.csv"), &decisions)?;

    let misclassification = if test.labels().iter().all(Option::is_some) {
        let errors = decisions
            .iter()
            .filter(|d| d.actual.as_deref() != Some(d.predicted.as_str()))
            .count();
        Some(errors as f64 / decisions.len() as f64)
    } else {
        None
    };
    let summary = ClassifySummary {
        method: args.method.clone(),
        label_f,
        label_g,
        train_sizes: (train_f.len(), train_g.len()),
        removed,
        test_size: test.len(),
        misclassification,
        seed: args.seed,
    };
    formats::write_json(&args.out_dir.join("summary.json"), &summary)?;
    match misclassification {
        Some(e) => println!("misclassification rate {e:.4}"),
        None => println!("classified {} trains (no test labels)", decisions.len()),
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub t: f64,
    pub f_of_t: f64,
}

pub fn write_boundary_artifacts(
    dir: &Path,
    points: &[spikedepth_core::DDPoint],
    boundary: &BoundaryFunction,
) -> CliResult<()> {
    formats::write_csv(&dir.join("ddpoints.csv"), points)?;
    let rows: Vec<BoundaryRow> = boundary
        .samples(1001)
        .into_iter()
        .map(|(t, f_of_t)| BoundaryRow { t, f_of_t })
        .collect();
    formats::write_csv(&dir.join("boundary.csv"), &rows)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// sim1|sim2|sim3|sim4|sim5|class-hpp-ipp|class-ipp-hawkes|dd-gauss
    pub experiment: String,
    /// Repetitions (default 20; dd-gauss defaults to 100).
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Detection thresholds δ (detection studies only).
    #[arg(long = "delta")]
    pub deltas: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value = "ilr")]
    pub variant: String,
    #[arg(long, default_value_t = 20.0)]
    pub mu: f64,
    /// Boundary polynomial degree (default 5; dd-gauss defaults to 2).
    #[arg(long)]
    pub k0: Option<usize>,
    #[arg(long, default_value_t = spikedepth_core::outlier::DEFAULT_MC_DRAWS)]
    pub n_mc: usize,
    /// Remove detected outliers from training groups before classifying.
    #[arg(long)]
    pub remove_outliers: Option<f64>,
    /// Output directory for result tables and sidecars.
    #[arg(long)]
    pub out: PathBuf,
}

/// Full configuration echoed into every sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub id: String,
    pub repetitions: usize,
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub r: f64,
    pub variant: String,
    pub mu: f64,
    pub degree: usize,
    pub n_mc: usize,
    pub remove_delta: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MedianSummaryRow {
    reps: usize,
    cardinality_changes: usize,
    mean_max_shift: f64,
    sd_max_shift: f64,
}

pub fn run_reproduce(args: ReproduceArgs) -> CliResult<()> {
    let id = args.experiment.as_str();
    let reps = args.reps.unwrap_or(match id {
        "dd-gauss" => 100,
        _ => 20,
    });
    if reps == 0 {
        return Err(CliError::Validation("repetitions must be at least 1".into()));
    }
    let degree = args.k0.unwrap_or(match id {
        "dd-gauss" => 2,
        _ => 5,
    });
    let deltas = if args.deltas.is_empty() {
        vec![0.001, 0.005, 0.01]
    } else {
        args.deltas.clone()
    };
    for d in &deltas {
        if !(*d > 0.0 && *d < 1.0) {
            return Err(CliError::Validation(format!("delta {d} outside (0, 1)")));
        }
    }
    let cfg = depth_config(args.r, &args.variant)?;
    fs::create_dir_all(&args.out)?;
    let spec = ExperimentSpec {
        id: id.to_string(),
        repetitions: reps,
        seed: args.seed,
        deltas: deltas.clone(),
        r: args.r,
        variant: args.variant.clone(),
        mu: args.mu,
        degree,
        n_mc: args.n_mc,
        remove_delta: args.remove_outliers,
    };
    formats::write_json(&args.out.join(format!("{id}_config.json")), &spec)?;

    match id {
        "sim1" | "sim2" => {
            let sim = if id == "sim1" { MedianSim::Hpp } else { MedianSim::Ipp };
            let result = experiments::run_median_robustness(sim, reps, args.seed, &cfg)?;
            formats::write_csv(&args.out.join(format!("{id}_reps.csv")), &result.rows)?;
            let shifts: Vec<f64> = result.rows.iter().filter_map(|r| r.max_shift).collect();
            let summary = MedianSummaryRow {
                reps,
                cardinality_changes: result.rows.len() - shifts.len(),
                mean_max_shift: experiments::mean(&shifts),
                sd_max_shift: experiments::standard_deviation(&shifts),
            };
            formats::write_csv(&args.out.join(format!("{id}_summary.csv")), &[summary])?;
            let clean = TrainSample::new(vec![result.clean_median_rep0.clone()])?;
            formats::write_train_file(&args.out.join(format!("{id}_median_clean.txt")), &clean)?;
            let cont = TrainSample::new(vec![result.contaminated_median_rep0.clone()])?;
            formats::write_train_file(
                &args.out.join(format!("{id}_median_contaminated.txt")),
                &cont,
            )?;
            println!(
                "{id}: {} reps, cardinality changes {}, mean max shift {:.5} \
                 (median estimation {:.4}s on average)",
                reps,
                result.rows.len() - shifts.len(),
                experiments::mean(&shifts),
                result.mean_median_seconds,
            );
        }
        "sim3" | "sim4" | "sim5" => {
            let sim = match id {
                "sim3" => DetectionSim::HppFlat,
                "sim4" => DetectionSim::IppSinusoid,
                _ => DetectionSim::HawkesBimodal,
            };
            let (rows, summary) =
                experiments::run_detection(sim, &deltas, reps, args.n_mc, args.seed, &cfg)?;
            formats::write_csv(&args.out.join(format!("{id}_reps.csv")), &rows)?;
            formats::write_csv(&args.out.join(format!("{id}_summary.csv")), &summary)?;
            for s in &summary {
                println!(
                    "{id} delta {:.4}: precision {:.1} ({:.2}) recall {:.1} ({:.2}) f1 {:.1} ({:.2})",
                    s.delta,
                    100.0 * s.precision_mean,
                    s.precision_sd,
                    100.0 * s.recall_mean,
                    s.recall_sd,
                    100.0 * s.f1_mean,
                    s.f1_sd,
                );
            }
        }
        "class-hpp-ipp" | "class-ipp-hawkes" => {
            let exp = if id == "class-hpp-ipp" {
                ClassExperiment::HppVsIpp
            } else {
                ClassExperiment::IppVsHawkes
            };
            let opts = ClassOptions {
                depth: cfg,
                mu: args.mu,
                degree,
                n_mc: args.n_mc,
                remove_delta: args.remove_outliers,
                ..ClassOptions::default()
            };
            let (rows, summary, plot) =
                experiments::run_classification(exp, reps, args.seed, &opts)?;
            formats::write_csv(&args.out.join(format!("{id}_reps.csv")), &rows)?;
            formats::write_csv(&args.out.join(format!("{id}_summary.csv")), &summary)?;
            formats::write_csv(&args.out.join(format!("{id}_ddpoints.csv")), &plot.training_points)?;
            let boundary_rows: Vec<BoundaryRow> = plot
                .boundary
                .samples(1001)
                .into_iter()
                .map(|(t, f_of_t)| BoundaryRow { t, f_of_t })
                .collect();
            formats::write_csv(&args.out.join(format!("{id}_boundary.csv")), &boundary_rows)?;
            for s in &summary {
                println!(
                    "{id} {}: median {:.4} mean {:.4} sd {:.4}",
                    s.method, s.median_error, s.mean_error, s.sd_error
                );
            }
        }
        "dd-gauss" => {
            let rows = experiments::run_gauss_dd(reps, args.seed, degree)?;
            formats::write_csv(&args.out.join(format!("{id}_reps.csv")), &rows)?;
            let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
            let summary = vec![experiments::ClassSummaryRow {
                method: "dd".into(),
                median_error: experiments::median_of(&errs),
                mean_error: experiments::mean(&errs),
                sd_error: experiments::standard_deviation(&errs),
            }];
            formats::write_csv(&args.out.join(format!("{id}_summary.csv")), &summary)?;
            println!(
                "dd-gauss: median {:.4} mean {:.4}",
                experiments::median_of(&errs),
                experiments::mean(&errs)
            );
        }
        other => {
            return Err(CliError::Validation(format!(
                "unknown experiment '{other}'"
            )))
        }
    }
    Ok(())
}
