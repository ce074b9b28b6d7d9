//! The simulation studies: median robustness, outlier detection, spike train
//! classification, and the bivariate-Gaussian boundary illustration.
//!
//! Every study is parameterized by a repetition count and a master seed; each
//! repetition derives its own sampler seeds, so runs are deterministic and
//! repetitions parallelize without changing results (they are collected by
//! repetition index, never by completion order).

use crate::error::{CliError, CliResult};
use crate::recipes;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spikedepth_core::ddclass::{
    classify_dd_batch, classify_lm, classify_md_batch, classify_mm2, dd_plot, fit_lm,
    misclassification_rate, train_boundary, BoundaryFunction, DDPoint, Group, GroupModel,
    OptimizerConfig, DEFAULT_LM_BINS,
};
use spikedepth_core::multivariate::{sample_gaussian_2d, GaussianSpec, MahalanobisDepth};
use spikedepth_core::outlier::OUTLIER_LABEL;
use spikedepth_core::simulate::{stream_tag, substream};
use spikedepth_core::{
    detect_outliers, estimate_median, sample_hawkes, sample_hpp, sample_ipp, CardinalityModel,
    DepthConfig, SpikeTrain, TimeDomain, TrainSample,
};

/// Mix a repetition and slot into a fresh sampler seed.
pub fn derive_seed(master: u64, rep: u64, slot: u64) -> u64 {
    let mut z = master
        .wrapping_add(rep.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(slot.wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn standard_deviation(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

pub fn median_of(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// ---------------------------------------------------------------------------
// Median robustness (simulations 1 and 2)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedianSim {
    /// Homogeneous rate 10.
    Hpp,
    /// Sinusoidal rate.
    Ipp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MedianRepRow {
    pub rep: usize,
    pub cardinality_clean: usize,
    pub cardinality_contaminated: usize,
    /// Largest per-spike shift after contamination; empty if the cardinality
    /// changed.
    pub max_shift: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct MedianRobustness {
    pub rows: Vec<MedianRepRow>,
    pub clean_median_rep0: SpikeTrain,
    pub contaminated_median_rep0: SpikeTrain,
    /// Mean wall-clock seconds per median estimation (reported, not stored in
    /// result tables).
    pub mean_median_seconds: f64,
}

fn median_sim_sample(sim: MedianSim, n: usize, seed: u64) -> CliResult<TrainSample> {
    let domain = TimeDomain::unit();
    Ok(match sim {
        MedianSim::Hpp => sample_hpp(10.0, domain, n, seed)?,
        MedianSim::Ipp => sample_ipp(&recipes::named_curve("sinusoid", domain)?, n, seed)?,
    })
}

pub fn run_median_robustness(
    sim: MedianSim,
    reps: usize,
    seed: u64,
    cfg: &DepthConfig,
) -> CliResult<MedianRobustness> {
    let domain = TimeDomain::unit();
    let results: CliResult<Vec<(MedianRepRow, SpikeTrain, SpikeTrain, f64)>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let clean = median_sim_sample(sim, 500, derive_seed(seed, rep as u64, 0))?;
            let outliers =
                recipes::windowed_hpp(200.0, 0.0, 0.05, domain, 10, derive_seed(seed, rep as u64, 1))?;
            let contaminated = recipes::contaminate(&clean, outliers, OUTLIER_LABEL)?;

            let fit_clean = spikedepth_core::estimate_intensity_kernel(&clean)?;
            let cm_clean = CardinalityModel::from_sample(&clean);
            let t0 = std::time::Instant::now();
            let med_clean = estimate_median(&clean, &fit_clean, &cm_clean, cfg)?;
            let seconds = t0.elapsed().as_secs_f64();

            let fit_cont = spikedepth_core::estimate_intensity_kernel(&contaminated)?;
            let cm_cont = CardinalityModel::from_sample(&contaminated);
            let med_cont = estimate_median(&contaminated, &fit_cont, &cm_cont, cfg)?;

            let max_shift = if med_clean.cardinality == med_cont.cardinality {
                Some(
                    med_clean
                        .median
                        .times()
                        .iter()
                        .zip(med_cont.median.times())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max),
                )
            } else {
                None
            };
            Ok((
                MedianRepRow {
                    rep,
                    cardinality_clean: med_clean.cardinality,
                    cardinality_contaminated: med_cont.cardinality,
                    max_shift,
                },
                med_clean.median,
                med_cont.median,
                seconds,
            ))
        })
        .collect();
    let mut results = results?;
    results.sort_by_key(|(row, _, _, _)| row.rep);
    let mean_median_seconds = mean(&results.iter().map(|r| r.3).collect::<Vec<_>>());
    let clean_median_rep0 = results[0].1.clone();
    let contaminated_median_rep0 = results[0].2.clone();
    Ok(MedianRobustness {
        rows: results.into_iter().map(|r| r.0).collect(),
        clean_median_rep0,
        contaminated_median_rep0,
        mean_median_seconds,
    })
}

// ---------------------------------------------------------------------------
// Outlier detection (simulations 3, 4, 5)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionSim {
    /// 1000 homogeneous trains, bursts in consecutive tenth-windows.
    HppFlat,
    /// Sinusoidal originals, same bursts.
    IppSinusoid,
    /// Self-exciting originals, tri-modal outliers; per-observation
    /// thresholds.
    HawkesBimodal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionRepRow {
    pub rep: usize,
    pub delta: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionSummaryRow {
    pub delta: f64,
    pub precision_mean: f64,
    pub precision_sd: f64,
    pub recall_mean: f64,
    pub recall_sd: f64,
    pub f1_mean: f64,
    pub f1_sd: f64,
}

fn detection_contaminated_sample(sim: DetectionSim, rep: u64, seed: u64) -> CliResult<TrainSample> {
    let domain = TimeDomain::unit();
    let originals = match sim {
        DetectionSim::HppFlat => sample_hpp(10.0, domain, 1000, derive_seed(seed, rep, 0))?,
        DetectionSim::IppSinusoid => sample_ipp(
            &recipes::named_curve("sinusoid", domain)?,
            1000,
            derive_seed(seed, rep, 0),
        )?,
        DetectionSim::HawkesBimodal => sample_hawkes(
            &recipes::hawkes_bimodal_model(domain)?,
            1000,
            derive_seed(seed, rep, 0),
        )?,
    };
    let outliers: Vec<SpikeTrain> = match sim {
        DetectionSim::HppFlat | DetectionSim::IppSinusoid => {
            let mut all = Vec::with_capacity(10);
            for w in 0..10 {
                let lo = w as f64 / 10.0;
                let hi = (w + 1) as f64 / 10.0;
                all.extend(recipes::windowed_hpp(
                    100.0,
                    lo,
                    hi,
                    domain,
                    1,
                    derive_seed(seed, rep, 100 + w),
                )?);
            }
            all
        }
        DetectionSim::HawkesBimodal => sample_ipp(
            &recipes::named_curve("trimodal", domain)?,
            10,
            derive_seed(seed, rep, 100),
        )?
        .trains()
        .to_vec(),
    };
    recipes::contaminate(&originals, outliers, OUTLIER_LABEL)
}

pub fn run_detection(
    sim: DetectionSim,
    deltas: &[f64],
    reps: usize,
    n_mc: usize,
    seed: u64,
    cfg: &DepthConfig,
) -> CliResult<(Vec<DetectionRepRow>, Vec<DetectionSummaryRow>)> {
    let rows: CliResult<Vec<Vec<DetectionRepRow>>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let sample = detection_contaminated_sample(sim, rep as u64, seed)?;
            let model = match sim {
                DetectionSim::HawkesBimodal => {
                    spikedepth_core::estimate_intensity_imi(&sample)?
                }
                _ => spikedepth_core::estimate_intensity_kernel(&sample)?,
            };
            let cm = CardinalityModel::from_sample(&sample);
            let mut rep_rows = Vec::with_capacity(deltas.len());
            for &delta in deltas {
                let report = detect_outliers(
                    &sample,
                    &model,
                    &cm,
                    cfg,
                    delta,
                    n_mc,
                    derive_seed(seed, rep as u64, 200),
                )?;
                let m = report.metrics.ok_or_else(|| {
                    CliError::Numerical("detection sample lost its labels".into())
                })?;
                rep_rows.push(DetectionRepRow {
                    rep,
                    delta,
                    precision: m.precision,
                    recall: m.recall,
                    f1: m.f1,
                    flagged: report.flagged,
                });
            }
            Ok(rep_rows)
        })
        .collect();
    let mut flat: Vec<DetectionRepRow> = rows?.into_iter().flatten().collect();
    flat.sort_by(|a, b| {
        a.rep
            .cmp(&b.rep)
            .then(a.delta.partial_cmp(&b.delta).unwrap())
    });

    let mut summary = Vec::new();
    for &delta in deltas {
        let select = |f: fn(&DetectionRepRow) -> f64| -> Vec<f64> {
            flat.iter().filter(|r| r.delta == delta).map(f).collect()
        };
        let precision = select(|r| r.precision);
        let recall = select(|r| r.recall);
        let f1 = select(|r| r.f1);
        summary.push(DetectionSummaryRow {
            delta,
            precision_mean: mean(&precision),
            precision_sd: standard_deviation(&precision),
            recall_mean: mean(&recall),
            recall_sd: standard_deviation(&recall),
            f1_mean: mean(&f1),
            f1_sd: standard_deviation(&f1),
        });
    }
    Ok((flat, summary))
}

// ---------------------------------------------------------------------------
// Classification (section-3 studies)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassExperiment {
    /// Homogeneous rate 8 versus the parabola profile.
    HppVsIpp,
    /// Bimodal profile versus its self-exciting counterpart.
    IppVsHawkes,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassOptions {
    pub depth: DepthConfig,
    pub mu: f64,
    pub degree: usize,
    pub n_mc: usize,
    pub remove_delta: Option<f64>,
    pub train_size: usize,
    pub test_size: usize,
}

impl Default for ClassOptions {
    fn default() -> Self {
        Self {
            depth: DepthConfig::default(),
            mu: 20.0,
            degree: 5,
            n_mc: spikedepth_core::outlier::DEFAULT_MC_DRAWS,
            remove_delta: None,
            train_size: 500,
            test_size: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassRepRow {
    pub rep: usize,
    pub method: String,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassSummaryRow {
    pub method: String,
    pub median_error: f64,
    pub mean_error: f64,
    pub sd_error: f64,
}

/// Plot-ready artifacts from the first repetition.
#[derive(Debug, Clone)]
pub struct ClassPlotData {
    pub training_points: Vec<DDPoint>,
    pub boundary: BoundaryFunction,
}

fn class_samples(
    exp: ClassExperiment,
    n: usize,
    seed: u64,
    group: Group,
) -> CliResult<TrainSample> {
    let domain = TimeDomain::unit();
    Ok(match (exp, group) {
        (ClassExperiment::HppVsIpp, Group::F) => sample_hpp(8.0, domain, n, seed)?,
        (ClassExperiment::HppVsIpp, Group::G) => {
            sample_ipp(&recipes::named_curve("parabola", domain)?, n, seed)?
        }
        (ClassExperiment::IppVsHawkes, Group::F) => {
            sample_ipp(&recipes::named_curve("bimodal", domain)?, n, seed)?
        }
        (ClassExperiment::IppVsHawkes, Group::G) => {
            sample_hawkes(&recipes::hawkes_bimodal_model(domain)?, n, seed)?
        }
    })
}

fn fit_group(exp: ClassExperiment, group: Group, sample: &TrainSample) -> CliResult<GroupModel> {
    Ok(match (exp, group) {
        (ClassExperiment::IppVsHawkes, Group::G) => GroupModel::fit_interval(sample)?,
        _ => GroupModel::fit_poisson(sample)?,
    })
}

fn test_error(preds_f: &[Group], preds_g: &[Group]) -> f64 {
    let errors = preds_f.iter().filter(|g| **g != Group::F).count()
        + preds_g.iter().filter(|g| **g != Group::G).count();
    errors as f64 / (preds_f.len() + preds_g.len()) as f64
}

struct PipelineOutput {
    errors: Vec<(String, f64)>,
    points: Vec<DDPoint>,
    boundary: BoundaryFunction,
}

#[allow(clippy::too_many_arguments)]
fn run_class_pipeline(
    exp: ClassExperiment,
    train_f: &TrainSample,
    train_g: &TrainSample,
    test_f: &TrainSample,
    test_g: &TrainSample,
    opts: &ClassOptions,
    boundary_seed: u64,
    suffix: &str,
) -> CliResult<PipelineOutput> {
    let cfg = &opts.depth;
    let gm_f = fit_group(exp, Group::F, train_f)?;
    let gm_g = fit_group(exp, Group::G, train_g)?;

    let points = dd_plot(train_f, train_g, &gm_f, &gm_g, cfg)?;
    let optimizer = OptimizerConfig {
        degree: opts.degree,
        seed: boundary_seed,
        ..OptimizerConfig::default()
    };
    let trained = train_boundary(&points, &optimizer)?;
    let boundary = trained.boundary;

    let mut errors = Vec::new();
    let dd_f = classify_dd_batch(test_f, &gm_f, &gm_g, cfg, &boundary)?;
    let dd_g = classify_dd_batch(test_g, &gm_f, &gm_g, cfg, &boundary)?;
    errors.push((format!("dd{suffix}"), test_error(&dd_f, &dd_g)));

    let md_f = classify_md_batch(test_f, &gm_f, &gm_g, cfg)?;
    let md_g = classify_md_batch(test_g, &gm_f, &gm_g, cfg)?;
    errors.push((format!("md{suffix}"), test_error(&md_f, &md_g)));

    let lm_f = fit_lm(train_f, DEFAULT_LM_BINS)?;
    let lm_g = fit_lm(train_g, DEFAULT_LM_BINS)?;
    let lm_pred =
        |s: &TrainSample| -> Vec<Group> { s.trains().iter().map(|t| classify_lm(t, &lm_f, &lm_g)).collect() };
    errors.push((format!("lm{suffix}"), test_error(&lm_pred(test_f), &lm_pred(test_g))));

    let med_f = estimate_median(train_f, &gm_f.intensity, &gm_f.cardinality, cfg)?;
    let med_g = estimate_median(train_g, &gm_g.intensity, &gm_g.cardinality, cfg)?;
    let mm2_pred = |s: &TrainSample| -> CliResult<Vec<Group>> {
        s.trains()
            .iter()
            .map(|t| classify_mm2(t, &med_f.median, &med_g.median, opts.mu).map_err(Into::into))
            .collect()
    };
    errors.push((
        format!("mm2{suffix}"),
        test_error(&mm2_pred(test_f)?, &mm2_pred(test_g)?),
    ));

    if exp == ClassExperiment::IppVsHawkes {
        // Intensity-approximation variant: fit the self-exciting group as a
        // plain kernel curve and rerun the boundary pipeline. The optimizer
        // reuses the same noise stream so the paired comparison against the
        // interval-model run isolates the model change.
        let gm_g_kernel = GroupModel::fit_poisson(train_g)?;
        let ia_points = dd_plot(train_f, train_g, &gm_f, &gm_g_kernel, cfg)?;
        let ia_optimizer = OptimizerConfig {
            degree: opts.degree,
            seed: boundary_seed,
            ..OptimizerConfig::default()
        };
        let ia_trained = train_boundary(&ia_points, &ia_optimizer)?;
        let ia_f = classify_dd_batch(test_f, &gm_f, &gm_g_kernel, cfg, &ia_trained.boundary)?;
        let ia_g = classify_dd_batch(test_g, &gm_f, &gm_g_kernel, cfg, &ia_trained.boundary)?;
        errors.push((format!("ia{suffix}"), test_error(&ia_f, &ia_g)));
    }

    Ok(PipelineOutput {
        errors,
        points,
        boundary,
    })
}

fn remove_flagged(
    sample: &TrainSample,
    gm: &GroupModel,
    cfg: &DepthConfig,
    delta: f64,
    n_mc: usize,
    seed: u64,
) -> CliResult<TrainSample> {
    let report = detect_outliers(sample, &gm.intensity, &gm.cardinality, cfg, delta, n_mc, seed)?;
    let flagged: std::collections::HashSet<usize> = report.flagged_indices().into_iter().collect();
    if flagged.len() == sample.len() {
        return Err(CliError::Numerical(
            "outlier removal flagged every train".into(),
        ));
    }
    sample
        .filter_by_index(|i| !flagged.contains(&i))
        .map_err(Into::into)
}

pub fn run_classification(
    exp: ClassExperiment,
    reps: usize,
    seed: u64,
    opts: &ClassOptions,
) -> CliResult<(Vec<ClassRepRow>, Vec<ClassSummaryRow>, ClassPlotData)> {
    let per_rep: CliResult<Vec<(usize, Vec<(String, f64)>, Option<ClassPlotData>)>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let r = rep as u64;
            let train_f = class_samples(exp, opts.train_size, derive_seed(seed, r, 0), Group::F)?;
            let train_g = class_samples(exp, opts.train_size, derive_seed(seed, r, 1), Group::G)?;
            let test_f = class_samples(exp, opts.test_size, derive_seed(seed, r, 2), Group::F)?;
            let test_g = class_samples(exp, opts.test_size, derive_seed(seed, r, 3), Group::G)?;

            let boundary_seed = derive_seed(seed, r, 10);
            let plain = run_class_pipeline(
                exp, &train_f, &train_g, &test_f, &test_g, opts, boundary_seed, "",
            )?;
            let mut errors = plain.errors.clone();

            if let Some(delta) = opts.remove_delta {
                let gm_f = fit_group(exp, Group::F, &train_f)?;
                let gm_g = fit_group(exp, Group::G, &train_g)?;
                let cfg = &opts.depth;
                let kept_f = remove_flagged(
                    &train_f,
                    &gm_f,
                    cfg,
                    delta,
                    opts.n_mc,
                    derive_seed(seed, r, 20),
                )?;
                let kept_g = remove_flagged(
                    &train_g,
                    &gm_g,
                    cfg,
                    delta,
                    opts.n_mc,
                    derive_seed(seed, r, 21),
                )?;
                // Same boundary noise streams and test data as the plain run:
                // the paired difference isolates the removal effect.
                let removed = run_class_pipeline(
                    exp, &kept_f, &kept_g, &test_f, &test_g, opts, boundary_seed, "_removed",
                )?;
                errors.extend(removed.errors);
            }

            let plot = if rep == 0 {
                Some(ClassPlotData {
                    training_points: plain.points,
                    boundary: plain.boundary,
                })
            } else {
                None
            };
            Ok((rep, errors, plot))
        })
        .collect();
    let mut per_rep = per_rep?;
    per_rep.sort_by_key(|(rep, _, _)| *rep);

    let mut rows = Vec::new();
    let mut plot = None;
    for (rep, errors, p) in per_rep {
        if let Some(p) = p {
            plot = Some(p);
        }
        for (method, error) in errors {
            rows.push(ClassRepRow { rep, method, error });
        }
    }
    let mut methods: Vec<String> = rows.iter().map(|r| r.method.clone()).collect();
    methods.sort();
    methods.dedup();
    let summary = methods
        .into_iter()
        .map(|method| {
            let errs: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == method)
                .map(|r| r.error)
                .collect();
            ClassSummaryRow {
                method,
                median_error: median_of(&errs),
                mean_error: mean(&errs),
                sd_error: standard_deviation(&errs),
            }
        })
        .collect();
    let plot = plot.ok_or_else(|| CliError::Numerical("no first repetition".into()))?;
    Ok((rows, summary, plot))
}

// ---------------------------------------------------------------------------
// Bivariate-Gaussian boundary illustration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussRepRow {
    pub rep: usize,
    pub error: f64,
}

pub fn gauss_group_specs() -> (GaussianSpec, GaussianSpec) {
    (
        GaussianSpec {
            mean: [0.0, 0.0],
            cov: [[1.0, 1.0], [1.0, 4.0]],
        },
        GaussianSpec {
            mean: [1.0, 1.0],
            cov: [[0.25, 0.25], [0.25, 1.0]],
        },
    )
}

pub fn run_gauss_dd(reps: usize, seed: u64, degree: usize) -> CliResult<Vec<GaussRepRow>> {
    let (spec_f, spec_g) = gauss_group_specs();
    let rows: CliResult<Vec<GaussRepRow>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, stream_tag::EXPERIMENT, rep as u64);
            let train_f = sample_gaussian_2d(&spec_f, 200, &mut rng);
            let train_g = sample_gaussian_2d(&spec_g, 200, &mut rng);
            let test_f = sample_gaussian_2d(&spec_f, 500, &mut rng);
            let test_g = sample_gaussian_2d(&spec_g, 500, &mut rng);

            let depth_f = MahalanobisDepth::fit(&train_f).map_err(CliError::from)?;
            let depth_g = MahalanobisDepth::fit(&train_g).map_err(CliError::from)?;

            let mut points = Vec::with_capacity(400);
            for (set, group) in [(&train_f, Group::F), (&train_g, Group::G)] {
                for &x in set.iter() {
                    points.push(DDPoint {
                        d_f: depth_f.depth(x),
                        d_g: depth_g.depth(x),
                        group,
                    });
                }
            }
            let optimizer = OptimizerConfig {
                degree,
                seed: derive_seed(seed, rep as u64, 5),
                ..OptimizerConfig::default()
            };
            let trained = train_boundary(&points, &optimizer)?;
            let test_points: Vec<DDPoint> = [(&test_f, Group::F), (&test_g, Group::G)]
                .into_iter()
                .flat_map(|(set, group)| {
                    set.iter().map(move |&x| DDPoint {
                        d_f: depth_f.depth(x),
                        d_g: depth_g.depth(x),
                        group,
                    })
                })
                .collect();
            let error = misclassification_rate(&test_points, &trained.boundary);
            Ok(GaussRepRow { rep, error })
        })
        .collect();
    let mut rows = rows?;
    rows.sort_by_key(|r| r.rep);
    Ok(rows)
}
