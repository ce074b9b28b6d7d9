//! Intensity models, cumulative integrals, time rescaling, and the
//! isometric log-ratio map.
//!
//! Every depth computation reduces a train to its rescaled spacings
//! `Λ(s_i) - Λ(s_{i-1})`, so the cumulative intensity `Λ` and its inverse are
//! the workhorses here. History-free models (constant rate, tabulated curve)
//! share one lookup table across a whole sample; self-exciting and
//! Markov-interval models evaluate `Λ` against each train's own history.

use crate::error::{Error, Result};
use crate::model::{SpikeTrain, TimeDomain};
use serde::{Deserialize, Serialize};

/// Number of grid points used when tabulating a curve from a closure.
pub const CURVE_GRID_POINTS: usize = 10_001;

/// Relative rate floor applied to tabulated curves so that `Λ` stays strictly
/// increasing and invertible.
pub const RATE_FLOOR_FRACTION: f64 = 1e-6;

/// Homogeneous rate on a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantIntensity {
    rate: f64,
    domain: TimeDomain,
}

impl ConstantIntensity {
    pub fn new(rate: f64, domain: TimeDomain) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "constant intensity rate must be positive, got {rate}"
            )));
        }
        Ok(Self { rate, domain })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn domain(&self) -> &TimeDomain {
        &self.domain
    }
}

/// Deterministic rate tabulated on a strictly increasing grid covering the
/// whole window. Evaluation interpolates linearly; the cumulative integral is
/// exact for the interpolant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveIntensity {
    domain: TimeDomain,
    grid: Vec<f64>,
    rates: Vec<f64>,
}

impl CurveIntensity {
    pub fn new(domain: TimeDomain, grid: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != rates.len() {
            return Err(Error::InvalidParameter(
                "curve grid needs at least two points and matching rate values".into(),
            ));
        }
        let eps = 1e-9 * domain.length();
        if (grid[0] - domain.start()).abs() > eps || (grid[grid.len() - 1] - domain.end()).abs() > eps
        {
            return Err(Error::InvalidParameter(
                "curve grid must cover the full domain".into(),
            ));
        }
        for w in grid.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidParameter(
                    "curve grid must be strictly increasing".into(),
                ));
            }
        }
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidParameter(
                "curve rates must be finite and non-negative".into(),
            ));
        }
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        let floor = RATE_FLOOR_FRACTION * mean;
        let rates = rates.into_iter().map(|r| r.max(floor)).collect();
        Ok(Self { domain, grid, rates })
    }

    /// Tabulate `f` on a uniform grid of [`CURVE_GRID_POINTS`] points.
    pub fn from_fn<F: Fn(f64) -> f64>(domain: TimeDomain, f: F) -> Result<Self> {
        let n = CURVE_GRID_POINTS;
        let h = domain.length() / (n - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|i| domain.start() + i as f64 * h).collect();
        let rates: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
        Self::new(domain, grid, rates)
    }

    pub fn domain(&self) -> &TimeDomain {
        &self.domain
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Linear interpolation of the rate, clamped to the window.
    pub fn rate_at(&self, t: f64) -> f64 {
        let t = t.clamp(self.domain.start(), self.domain.end());
        let i = match self.grid.partition_point(|&g| g <= t) {
            0 => 0,
            p if p >= self.grid.len() => self.grid.len() - 2,
            p => p - 1,
        };
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let w = (t - t0) / (t1 - t0);
        self.rates[i] * (1.0 - w) + self.rates[i + 1] * w
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().cloned().fold(0.0, f64::max)
    }
}

/// History-free baseline of a self-exciting process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaselineIntensity {
    Constant(ConstantIntensity),
    Curve(CurveIntensity),
}

impl BaselineIntensity {
    pub fn domain(&self) -> &TimeDomain {
        match self {
            BaselineIntensity::Constant(c) => c.domain(),
            BaselineIntensity::Curve(c) => c.domain(),
        }
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        match self {
            BaselineIntensity::Constant(c) => c.rate(),
            BaselineIntensity::Curve(c) => c.rate_at(t),
        }
    }
}

/// Self-exciting process: baseline plus an exponentially decaying jump after
/// every event, `λ(t | H_t) = base(t) + Σ_{t_i < t} jump · exp(-decay (t - t_i))`.
///
/// Stationarity requires `jump < decay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HawkesIntensity {
    base: BaselineIntensity,
    jump: f64,
    decay: f64,
}

impl HawkesIntensity {
    pub fn new(base: BaselineIntensity, jump: f64, decay: f64) -> Result<Self> {
        if !(jump >= 0.0) || !(decay > 0.0) || !jump.is_finite() || !decay.is_finite() {
            return Err(Error::InvalidParameter(
                "self-excitation needs jump >= 0 and decay > 0".into(),
            ));
        }
        if jump >= decay {
            return Err(Error::InvalidParameter(format!(
                "unstable excitation: jump {jump} must be below decay {decay}"
            )));
        }
        Ok(Self { base, jump, decay })
    }

    pub fn base(&self) -> &BaselineIntensity {
        &self.base
    }

    pub fn jump(&self) -> f64 {
        self.jump
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn domain(&self) -> &TimeDomain {
        self.base.domain()
    }

    /// Conditional rate given the events strictly before `t`.
    pub fn conditional_rate(&self, t: f64, history: &[f64]) -> f64 {
        let mut excitation = 0.0;
        for &e in history.iter().rev() {
            if e < t {
                excitation += self.jump * (-self.decay * (t - e)).exp();
            }
        }
        self.base.rate_at(t) + excitation
    }
}

/// Markov-interval model: conditional rate factorized as a deterministic
/// marginal profile times a gain in the elapsed time since the last event,
/// `λ(t | H_t) = marginal(t) · gain(Λ1(t) - Λ1(t_last))`.
///
/// The lag is measured through the marginal's own cumulative `Λ1`: under a
/// plain Poisson process the rescaled inter-event intervals are unit
/// exponentials, so the gain sits at 1 and any deviation reflects genuine
/// history dependence rather than the profile's inhomogeneity. Before the
/// first event the lag is measured from the window start, which keeps `Λ`
/// continuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImiIntensity {
    marginal: CurveIntensity,
    /// `Λ1` at the marginal grid nodes.
    marginal_cum: Vec<f64>,
    /// Rescaled-lag grid.
    lag_grid: Vec<f64>,
    lag_gain: Vec<f64>,
}

impl ImiIntensity {
    pub fn new(marginal: CurveIntensity, lag_grid: Vec<f64>, lag_gain: Vec<f64>) -> Result<Self> {
        if lag_grid.len() < 2 || lag_grid.len() != lag_gain.len() {
            return Err(Error::InvalidParameter(
                "lag grid needs at least two points and matching gain values".into(),
            ));
        }
        for w in lag_grid.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidParameter(
                    "lag grid must be strictly increasing".into(),
                ));
            }
        }
        if lag_gain.iter().any(|g| !g.is_finite() || *g <= 0.0) {
            return Err(Error::InvalidParameter(
                "lag gains must be finite and positive".into(),
            ));
        }
        let mut marginal_cum = Vec::with_capacity(marginal.grid().len());
        marginal_cum.push(0.0);
        let mut acc = 0.0;
        for i in 1..marginal.grid().len() {
            let h = marginal.grid()[i] - marginal.grid()[i - 1];
            acc += 0.5 * (marginal.rates()[i - 1] + marginal.rates()[i]) * h;
            marginal_cum.push(acc);
        }
        Ok(Self {
            marginal,
            marginal_cum,
            lag_grid,
            lag_gain,
        })
    }

    pub fn domain(&self) -> &TimeDomain {
        self.marginal.domain()
    }

    /// The history-free marginal profile, used for median estimation.
    pub fn marginal(&self) -> &CurveIntensity {
        &self.marginal
    }

    pub fn lag_grid(&self) -> &[f64] {
        &self.lag_grid
    }

    pub fn lag_gain(&self) -> &[f64] {
        &self.lag_gain
    }

    /// `Λ1(t)`, the marginal cumulative used as the lag clock.
    pub fn marginal_cum_at(&self, t: f64) -> f64 {
        let grid = self.marginal.grid();
        let rates = self.marginal.rates();
        let t = t.clamp(self.domain().start(), self.domain().end());
        let i = match grid.partition_point(|&g| g <= t) {
            0 => 0,
            p if p >= grid.len() => grid.len() - 2,
            p => p - 1,
        };
        let dt = t - grid[i];
        let h = grid[i + 1] - grid[i];
        let slope = (rates[i + 1] - rates[i]) / h;
        self.marginal_cum[i] + dt * rates[i] + 0.5 * slope * dt * dt
    }

    /// Gain at a rescaled lag, linearly interpolated and held constant beyond
    /// the grid.
    pub fn gain_at(&self, rescaled_lag: f64) -> f64 {
        let n = self.lag_grid.len();
        if rescaled_lag <= self.lag_grid[0] {
            return self.lag_gain[0];
        }
        if rescaled_lag >= self.lag_grid[n - 1] {
            return self.lag_gain[n - 1];
        }
        let i = self.lag_grid.partition_point(|&g| g <= rescaled_lag) - 1;
        let (x0, x1) = (self.lag_grid[i], self.lag_grid[i + 1]);
        let w = (rescaled_lag - x0) / (x1 - x0);
        self.lag_gain[i] * (1.0 - w) + self.lag_gain[i + 1] * w
    }

    /// Conditional rate given the last event before `t` (window start if none).
    pub fn conditional_rate(&self, t: f64, last_event: Option<f64>) -> f64 {
        let reference = last_event.unwrap_or_else(|| self.domain().start());
        self.rate_with_reference_cum(t, self.marginal_cum_at(reference))
    }

    /// Conditional rate with the reference's `Λ1` precomputed (hot path of
    /// segment quadrature).
    pub(crate) fn rate_with_reference_cum(&self, t: f64, reference_cum: f64) -> f64 {
        self.marginal.rate_at(t) * self.gain_at(self.marginal_cum_at(t) - reference_cum)
    }

    /// Largest possible conditional rate (thinning bound).
    pub fn rate_bound(&self) -> f64 {
        let max_gain = self.lag_gain.iter().cloned().fold(0.0_f64, f64::max);
        self.marginal.max_rate() * max_gain
    }
}

/// Tagged union of the supported conditional intensity models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IntensityModel {
    Constant(ConstantIntensity),
    Curve(CurveIntensity),
    Hawkes(HawkesIntensity),
    Imi(ImiIntensity),
}

impl IntensityModel {
    pub fn constant(rate: f64, domain: TimeDomain) -> Result<Self> {
        Ok(IntensityModel::Constant(ConstantIntensity::new(rate, domain)?))
    }

    pub fn domain(&self) -> &TimeDomain {
        match self {
            IntensityModel::Constant(c) => c.domain(),
            IntensityModel::Curve(c) => c.domain(),
            IntensityModel::Hawkes(h) => h.domain(),
            IntensityModel::Imi(m) => m.domain(),
        }
    }

    /// Whether `Λ` depends on the evaluated train's own event history.
    pub fn is_history_dependent(&self) -> bool {
        matches!(self, IntensityModel::Hawkes(_) | IntensityModel::Imi(_))
    }
}

/// Exact cumulative integral of a piecewise-linear rate on a grid.
#[derive(Debug, Clone)]
struct CumTable {
    domain: TimeDomain,
    grid: Vec<f64>,
    rates: Vec<f64>,
    cum: Vec<f64>,
}

impl CumTable {
    fn from_grid(domain: TimeDomain, grid: Vec<f64>, rates: Vec<f64>) -> Self {
        let mut cum = Vec::with_capacity(grid.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 1..grid.len() {
            let h = grid[i] - grid[i - 1];
            acc += 0.5 * (rates[i - 1] + rates[i]) * h;
            cum.push(acc);
        }
        Self {
            domain,
            grid,
            rates,
            cum,
        }
    }

    fn from_constant(c: &ConstantIntensity) -> Self {
        let domain = *c.domain();
        Self::from_grid(
            domain,
            vec![domain.start(), domain.end()],
            vec![c.rate(), c.rate()],
        )
    }

    fn from_curve(c: &CurveIntensity) -> Self {
        Self::from_grid(*c.domain(), c.grid().to_vec(), c.rates().to_vec())
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn cell_of(&self, t: f64) -> usize {
        match self.grid.partition_point(|&g| g <= t) {
            0 => 0,
            p if p >= self.grid.len() => self.grid.len() - 2,
            p => p - 1,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(self.domain.start(), self.domain.end());
        let i = self.cell_of(t);
        let dt = t - self.grid[i];
        let h = self.grid[i + 1] - self.grid[i];
        let slope = (self.rates[i + 1] - self.rates[i]) / h;
        self.cum[i] + dt * self.rates[i] + 0.5 * slope * dt * dt
    }

    fn rate_at(&self, t: f64) -> f64 {
        let t = t.clamp(self.domain.start(), self.domain.end());
        let i = self.cell_of(t);
        let h = self.grid[i + 1] - self.grid[i];
        let w = (t - self.grid[i]) / h;
        self.rates[i] * (1.0 - w) + self.rates[i + 1] * w
    }

    /// Invert `Λ(t) = y`: locate the cell, solve the in-cell quadratic, then
    /// apply one Newton refinement.
    fn invert(&self, y: f64) -> f64 {
        let i = match self.cum.partition_point(|&c| c <= y) {
            0 => 0,
            p if p >= self.cum.len() => self.cum.len() - 2,
            p => p - 1,
        };
        let h = self.grid[i + 1] - self.grid[i];
        let slope = (self.rates[i + 1] - self.rates[i]) / h;
        let rem = y - self.cum[i];
        let r0 = self.rates[i];
        let mut dt = if slope.abs() < 1e-300 {
            if r0 > 0.0 {
                rem / r0
            } else {
                0.0
            }
        } else {
            let disc = (r0 * r0 + 2.0 * slope * rem).max(0.0);
            (-r0 + disc.sqrt()) / slope
        };
        dt = dt.clamp(0.0, h);
        let mut t = self.grid[i] + dt;
        let rate = self.rate_at(t);
        if rate > 0.0 {
            t -= (self.eval(t) - y) / rate;
            t = t.clamp(self.grid[i], self.grid[i + 1]);
        }
        t
    }
}

enum CumKind {
    Table(CumTable),
    Hawkes {
        base: CumTable,
        jump: f64,
        decay: f64,
        events: Vec<f64>,
        total: f64,
    },
    Imi {
        model: ImiIntensity,
        events: Vec<f64>,
        /// `Λ` at each segment start: window start, then every event, then the
        /// window end.
        segment_cum: Vec<f64>,
    },
}

/// Cumulative intensity `Λ(t) = ∫ λ(u | H_u) du` from the window start, with
/// `Λ(t_start) = 0`. For history-dependent models the instance is bound to one
/// train's history.
pub struct CumulativeIntensity {
    kind: CumKind,
}

impl CumulativeIntensity {
    pub fn domain(&self) -> &TimeDomain {
        match &self.kind {
            CumKind::Table(t) => &t.domain,
            CumKind::Hawkes { base, .. } => &base.domain,
            CumKind::Imi { model, .. } => model.domain(),
        }
    }

    /// `Λ(t_end)`, the expected event count of the bound realization.
    pub fn total(&self) -> f64 {
        match &self.kind {
            CumKind::Table(t) => t.total(),
            CumKind::Hawkes { total, .. } => *total,
            CumKind::Imi { segment_cum, .. } => *segment_cum.last().unwrap(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            CumKind::Table(table) => table.eval(t),
            CumKind::Hawkes {
                base,
                jump,
                decay,
                events,
                ..
            } => {
                let mut acc = base.eval(t);
                let ratio = jump / decay;
                for &e in events {
                    if e >= t {
                        break;
                    }
                    acc += ratio * (1.0 - (-decay * (t - e)).exp());
                }
                acc
            }
            CumKind::Imi {
                model,
                events,
                segment_cum,
            } => {
                let t = t.clamp(model.domain().start(), model.domain().end());
                let seg = events.partition_point(|&e| e < t);
                let seg_start = if seg == 0 {
                    model.domain().start()
                } else {
                    events[seg - 1]
                };
                let reference = if seg == 0 {
                    model.domain().start()
                } else {
                    events[seg - 1]
                };
                segment_cum[seg] + imi_segment_integral(model, seg_start, t, reference)
            }
        }
    }

    /// Inverse of `Λ`: the time `t` with `|Λ(t) - y| < 1e-9 Λ(t_end)`.
    pub fn invert(&self, y: f64) -> Result<f64> {
        let total = self.total();
        let tol = 1e-9 * total;
        if y < -tol || y > total + tol {
            return Err(Error::InvalidParameter(format!(
                "inverse target {y} outside [0, {total}]"
            )));
        }
        let y = y.clamp(0.0, total);
        let t = match &self.kind {
            CumKind::Table(table) => table.invert(y),
            _ => {
                // Monotone bisection; history-dependent evaluations are cheap.
                let (mut lo, mut hi) = (self.domain().start(), self.domain().end());
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.eval(mid) < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        };
        if (self.eval(t) - y).abs() > tol.max(1e-12) {
            return Err(Error::Numerical(format!(
                "cumulative inverse did not reach tolerance at y={y}"
            )));
        }
        Ok(t)
    }
}

/// Composite Simpson integral of the conditional rate over one inter-event
/// segment of a Markov-interval model.
fn imi_segment_integral(model: &ImiIntensity, a: f64, b: f64, reference: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let len = model.domain().length();
    let base_step = len / 2048.0;
    let mut n = ((b - a) / base_step).ceil() as usize;
    n = n.clamp(8, 512);
    if n % 2 == 1 {
        n += 1;
    }
    let h = (b - a) / n as f64;
    let reference_cum = model.marginal_cum_at(reference);
    let rate = |t: f64| model.rate_with_reference_cum(t, reference_cum);
    let mut sum = rate(a) + rate(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * rate(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Build the cumulative intensity for a model, bound to `train`'s history when
/// the model is history-dependent.
pub fn cumulative(model: &IntensityModel, train: Option<&SpikeTrain>) -> Result<CumulativeIntensity> {
    if let Some(tr) = train {
        model.domain().ensure_same(tr.domain())?;
    }
    let kind = match model {
        IntensityModel::Constant(c) => CumKind::Table(CumTable::from_constant(c)),
        IntensityModel::Curve(c) => CumKind::Table(CumTable::from_curve(c)),
        IntensityModel::Hawkes(h) => {
            let tr = train.ok_or_else(|| {
                Error::InvalidParameter(
                    "a self-exciting model needs a train to evaluate its history".into(),
                )
            })?;
            let base = match h.base() {
                BaselineIntensity::Constant(c) => CumTable::from_constant(c),
                BaselineIntensity::Curve(c) => CumTable::from_curve(c),
            };
            let events = tr.times().to_vec();
            let ratio = h.jump() / h.decay();
            let t_end = h.domain().end();
            let mut total = base.total();
            for &e in &events {
                total += ratio * (1.0 - (-h.decay() * (t_end - e)).exp());
            }
            CumKind::Hawkes {
                base,
                jump: h.jump(),
                decay: h.decay(),
                events,
                total,
            }
        }
        IntensityModel::Imi(m) => {
            let tr = train.ok_or_else(|| {
                Error::InvalidParameter(
                    "a Markov-interval model needs a train to evaluate its history".into(),
                )
            })?;
            let events = tr.times().to_vec();
            let start = m.domain().start();
            let end = m.domain().end();
            let mut segment_cum = Vec::with_capacity(events.len() + 2);
            segment_cum.push(0.0);
            let mut acc = 0.0;
            let mut prev = start;
            let mut reference = start;
            for &e in &events {
                acc += imi_segment_integral(m, prev, e, reference);
                segment_cum.push(acc);
                prev = e;
                reference = e;
            }
            acc += imi_segment_integral(m, prev, end, reference);
            segment_cum.push(acc);
            CumKind::Imi {
                model: m.clone(),
                events,
                segment_cum,
            }
        }
    };
    Ok(CumulativeIntensity { kind })
}

/// Map a train through its cumulative intensity. The result lives on
/// `[0, Λ(t_end)]` and is a unit-rate realization when the model is the true
/// generator.
pub fn time_rescale(train: &SpikeTrain, ci: &CumulativeIntensity) -> Result<SpikeTrain> {
    train.domain().ensure_same(ci.domain())?;
    let rescaled_domain = TimeDomain::new(0.0, ci.total())?;
    let times: Vec<f64> = train.times().iter().map(|&t| ci.eval(t)).collect();
    SpikeTrain::new(times, rescaled_domain)
}

/// Isometric log-ratio map of a positive composition through the Helmert
/// basis: `y_j = (Σ_{i<=j} c_i - j c_{j+1}) / sqrt(j (j+1))` with `c` the
/// centered log-ratios. Output has length `len - 1` and the same Euclidean
/// norm as `c`.
pub fn ilr_transform(isi: &[f64]) -> Result<Vec<f64>> {
    if isi.len() < 2 {
        return Err(Error::InvalidParameter(
            "the log-ratio map needs at least two intervals".into(),
        ));
    }
    if isi.iter().any(|&u| !(u > 0.0) || !u.is_finite()) {
        return Err(Error::InvalidParameter(
            "all intervals must be strictly positive".into(),
        ));
    }
    let logs: Vec<f64> = isi.iter().map(|u| u.ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let clr: Vec<f64> = logs.iter().map(|l| l - mean).collect();
    let k = isi.len() - 1;
    let mut out = Vec::with_capacity(k);
    let mut prefix = 0.0;
    for j in 1..=k {
        prefix += clr[j - 1];
        let jf = j as f64;
        out.push((prefix - jf * clr[j]) / (jf * (jf + 1.0)).sqrt());
    }
    Ok(out)
}
