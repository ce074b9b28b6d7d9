//! Intensity estimation from spike train samples.
//!
//! Poisson-style data gets a Gaussian-kernel rate estimate over the pooled
//! spike times, reflected at the window boundaries and normalized so the rate
//! integrates to the sample's mean cardinality. Non-Poisson data gets a
//! Markov-interval model: the same marginal profile times an interval-hazard
//! gain, with the product calibrated by sequential simulation so the model
//! reproduces the observed mean count.

use crate::error::{Error, Result};
use crate::intensity::{CurveIntensity, ImiIntensity, IntensityModel, CURVE_GRID_POINTS};
use crate::model::TrainSample;
use crate::simulate::sample_imi;

/// Grid resolution of the Markov-interval model (time axis and lag axis).
pub const IMI_GRID_POINTS: usize = 200;

/// Trains simulated per evaluation of the calibration target.
const CALIBRATION_TRAINS: usize = 2_000;
/// Internal seed of the calibration simulations; fitting is deterministic.
const CALIBRATION_SEED: u64 = 0x5eed_ca1b;
/// Relative mean-count mismatch accepted by the calibration loop.
const CALIBRATION_TOLERANCE: f64 = 0.005;

/// Rate used for a sample with no spikes at all, so the estimate still has a
/// strictly increasing cumulative integral.
const EMPTY_SAMPLE_RATE: f64 = 1e-9;

/// Silverman's rule on a data vector, with a window-scaled fallback when the
/// spread collapses.
fn silverman_bandwidth(data: &[f64], window: f64) -> f64 {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| -> f64 {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let mut scale = sd.min(iqr / 1.34);
    if scale <= 0.0 {
        scale = sd.max(0.1 * window);
    }
    if scale <= 0.0 {
        scale = 0.1 * window;
    }
    (0.9 * scale * n.powf(-0.2)).min(window)
}

/// Gaussian kernel density on a uniform grid with boundary reflection.
///
/// Events are binned to the nearest grid node and the kernel is applied as a
/// discrete convolution over the mirrored extension of the bin weights, so the
/// probability mass leaking past either boundary folds back inside.
fn reflected_kde(points: &[f64], start: f64, end: f64, n_grid: usize, bandwidth: f64) -> Vec<f64> {
    let step = (end - start) / (n_grid - 1) as f64;
    let mut weights = vec![0.0_f64; n_grid];
    for &p in points {
        let idx = (((p - start) / step).round() as usize).min(n_grid - 1);
        weights[idx] += 1.0;
    }
    // Mirror about both boundaries: extended index e in [-(n-1), 2(n-1)].
    let mut extended = vec![0.0_f64; 3 * n_grid - 2];
    let shift = n_grid - 1;
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        extended[shift + j] += w;
        extended[shift - j] += w;
        extended[shift + 2 * (n_grid - 1) - j] += w;
    }

    let half_width = ((5.0 * bandwidth / step).ceil() as usize).min(n_grid - 1);
    let norm = 1.0 / ((points.len() as f64) * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    let kernel: Vec<f64> = (0..=half_width)
        .map(|o| {
            let z = o as f64 * step / bandwidth;
            (-0.5 * z * z).exp() * norm
        })
        .collect();
    let mut density = vec![0.0_f64; n_grid];
    for i in 0..n_grid {
        let mut acc = 0.0;
        let center = shift + i;
        for o in 1..=half_width {
            acc += kernel[o] * (extended[center - o] + extended[center + o]);
        }
        acc += kernel[0] * extended[center];
        density[i] = acc;
    }
    density
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    step * (0.5 * (values[0] + values[values.len() - 1]) + interior)
}

/// Kernel rate estimate over the pooled spike times of a sample, with the
/// bandwidth set by Silverman's rule.
///
/// The estimate integrates to the mean cardinality; a sample with no spikes
/// yields a flat floor rate.
pub fn estimate_intensity_kernel(sample: &TrainSample) -> Result<IntensityModel> {
    estimate_intensity_kernel_scaled(sample, 1.0)
}

/// Kernel rate estimate with the Silverman bandwidth multiplied by `scale`
/// (sensitivity-analysis hook).
pub fn estimate_intensity_kernel_scaled(
    sample: &TrainSample,
    bandwidth_scale: f64,
) -> Result<IntensityModel> {
    if !(bandwidth_scale > 0.0) {
        return Err(Error::InvalidParameter(
            "bandwidth scale must be positive".into(),
        ));
    }
    let domain = *sample.domain();
    let pooled: Vec<f64> = sample
        .trains()
        .iter()
        .flat_map(|t| t.times().iter().copied())
        .collect();
    if pooled.is_empty() {
        let curve = CurveIntensity::from_fn(domain, |_| EMPTY_SAMPLE_RATE)?;
        return Ok(IntensityModel::Curve(curve));
    }
    let bandwidth = silverman_bandwidth(&pooled, domain.length()) * bandwidth_scale;
    let n_grid = CURVE_GRID_POINTS;
    let density = reflected_kde(&pooled, domain.start(), domain.end(), n_grid, bandwidth);
    let step = domain.length() / (n_grid - 1) as f64;
    let mass = trapezoid(&density, step);
    if mass <= 0.0 {
        return Err(Error::Numerical("kernel density integrated to zero".into()));
    }
    let scale = sample.mean_cardinality() / mass;
    let grid: Vec<f64> = (0..n_grid).map(|i| domain.start() + i as f64 * step).collect();
    let rates: Vec<f64> = density.iter().map(|d| d * scale).collect();
    Ok(IntensityModel::Curve(CurveIntensity::new(domain, grid, rates)?))
}

fn curve_of(model: &IntensityModel) -> &CurveIntensity {
    match model {
        IntensityModel::Curve(c) => c,
        _ => unreachable!("kernel estimation always returns a curve"),
    }
}

/// Markov-interval estimate: marginal kernel profile times an interval-hazard
/// gain in the marginally rescaled lag, calibrated so sequential simulation of
/// the fitted model reproduces the sample's mean count.
///
/// Inter-event intervals are first pushed through the marginal cumulative
/// `Λ1`; for Poisson data the rescaled intervals are unit exponentials, whose
/// hazard is identically 1, so the estimated gain isolates history dependence
/// from the profile's inhomogeneity.
pub fn estimate_intensity_imi(sample: &TrainSample) -> Result<IntensityModel> {
    let domain = *sample.domain();
    let mean_count = sample.mean_cardinality();
    if mean_count < 1.0 {
        return Err(Error::InvalidParameter(
            "interval estimation needs a mean cardinality of at least 1".into(),
        ));
    }
    let window = domain.length();
    let kernel_fit = estimate_intensity_kernel(sample)?;
    let dense = curve_of(&kernel_fit);
    // Downsample the marginal profile onto the model grid.
    let step = window / (IMI_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..IMI_GRID_POINTS)
        .map(|i| domain.start() + i as f64 * step)
        .collect();
    let marginal_rates: Vec<f64> = grid.iter().map(|&t| dense.rate_at(t)).collect();
    let marginal = CurveIntensity::new(domain, grid, marginal_rates)?;

    // A probe model with unit gain supplies Λ1 for rescaling the intervals.
    let unit_probe = ImiIntensity::new(marginal.clone(), vec![0.0, window], vec![1.0, 1.0])?;
    // Event intervals: the gap from the window start to the first spike (the
    // model measures the pre-first lag from the window start) and every
    // inter-spike gap. The gap from the last spike to the window end is
    // censored: it contributes time at risk but no event.
    let mut isis: Vec<f64> = Vec::new();
    let mut censored: Vec<f64> = Vec::new();
    for train in sample.trains() {
        let cum_at = |t: f64| unit_probe.marginal_cum_at(t);
        let mut prev = cum_at(domain.start());
        for &t in train.times() {
            let v = cum_at(t);
            if v - prev > 0.0 {
                isis.push(v - prev);
            }
            prev = v;
        }
        let tail = cum_at(domain.end()) - prev;
        if tail > 0.0 {
            censored.push(tail);
        }
    }

    // Rescaled lags live on [0, Λ1(T2)].
    let total_mass = unit_probe.marginal_cum_at(domain.end());
    let lag_step = total_mass / (IMI_GRID_POINTS - 1) as f64;
    let lag_grid: Vec<f64> = (0..IMI_GRID_POINTS).map(|i| i as f64 * lag_step).collect();

    let gain = if isis.is_empty() {
        vec![1.0; IMI_GRID_POINTS]
    } else {
        // Life-table hazard on the grid cells: events over time-at-risk. The
        // unit-exponential baseline of rescaled lags makes the hazard itself
        // the gain (identically 1 for Poisson data, up to sampling noise).
        let cells = IMI_GRID_POINTS - 1;
        let mut events = vec![0.0_f64; cells];
        let mut exposure = vec![0.0_f64; cells];
        let add_exposure = |d: f64, exposure: &mut Vec<f64>| {
            for (c, e) in exposure.iter_mut().enumerate() {
                let lo = c as f64 * lag_step;
                if d <= lo {
                    break;
                }
                *e += (d - lo).min(lag_step);
            }
        };
        for &d in &isis {
            let cell = ((d / lag_step) as usize).min(cells - 1);
            events[cell] += 1.0;
            add_exposure(d, &mut exposure);
        }
        for &d in &censored {
            add_exposure(d, &mut exposure);
        }
        // Hold the gain constant beyond the 99th percentile of observed lags;
        // the exposure out there is too thin to trust.
        let mut sorted = isis.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q99 = sorted[((sorted.len() - 1) as f64 * 0.99) as usize];
        let clamp_cell = ((q99 / lag_step) as usize).min(cells - 1);
        // Node gain: windowed hazard (total events over total exposure in the
        // neighboring cells), which weights cells by their information.
        let smoothing = 2usize;
        let mut gain = vec![1.0_f64; IMI_GRID_POINTS];
        for (i, g) in gain.iter_mut().enumerate() {
            let center = i.min(cells - 1).min(clamp_cell);
            let lo = center.saturating_sub(smoothing);
            let hi = (center + smoothing).min(clamp_cell);
            let ev: f64 = events[lo..=hi].iter().sum();
            let ex: f64 = exposure[lo..=hi].iter().sum();
            if ex > 0.0 {
                *g = ev / ex;
            }
        }
        let mean_gain = gain.iter().sum::<f64>() / gain.len() as f64;
        let floor = (1e-6 * mean_gain).max(1e-12);
        for g in gain.iter_mut() {
            *g = g.max(floor);
        }
        gain
    };

    // Calibrate a global gain factor by bisection: the simulated mean count is
    // increasing in the factor.
    let build = |factor: f64| -> Result<ImiIntensity> {
        let scaled: Vec<f64> = gain.iter().map(|g| g * factor).collect();
        ImiIntensity::new(marginal.clone(), lag_grid.clone(), scaled)
    };
    let simulated_mean = |factor: f64| -> Result<f64> {
        let model = build(factor)?;
        let s = sample_imi(&model, CALIBRATION_TRAINS, CALIBRATION_SEED)?;
        Ok(s.mean_cardinality())
    };
    let mut lo = 0.05_f64;
    let mut hi = 20.0_f64;
    let mut lo_val = simulated_mean(lo)?;
    let mut hi_val = simulated_mean(hi)?;
    for _ in 0..6 {
        if lo_val > mean_count {
            lo /= 4.0;
            lo_val = simulated_mean(lo)?;
        }
        if hi_val < mean_count {
            hi *= 4.0;
            hi_val = simulated_mean(hi)?;
        }
    }
    let mut factor = 1.0;
    for _ in 0..40 {
        factor = 0.5 * (lo + hi);
        let value = simulated_mean(factor)?;
        if ((value - mean_count) / mean_count).abs() <= CALIBRATION_TOLERANCE {
            break;
        }
        if value < mean_count {
            lo = factor;
        } else {
            hi = factor;
        }
    }
    Ok(IntensityModel::Imi(build(factor)?))
}
