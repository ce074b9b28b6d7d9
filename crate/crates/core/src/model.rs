//! Domain types: time windows, spike trains, and labeled samples.
//!
//! A spike train is a strictly increasing sequence of event times in the open
//! interval `(t_start, t_end)`. Events exactly on a boundary are rejected:
//! every downstream depth formula takes logarithms of the gaps to both
//! boundaries, which must stay strictly positive.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Closed observation window `[t_start, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDomain {
    t_start: f64,
    t_end: f64,
}

impl TimeDomain {
    pub fn new(t_start: f64, t_end: f64) -> Result<Self> {
        if !t_start.is_finite() || !t_end.is_finite() || t_start >= t_end {
            return Err(Error::InvalidDomain(t_start, t_end));
        }
        Ok(Self { t_start, t_end })
    }

    /// The unit window `[0, 1]` used throughout the simulation studies.
    pub fn unit() -> Self {
        Self {
            t_start: 0.0,
            t_end: 1.0,
        }
    }

    pub fn start(&self) -> f64 {
        self.t_start
    }

    pub fn end(&self) -> f64 {
        self.t_end
    }

    pub fn length(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn contains_open(&self, t: f64) -> bool {
        t > self.t_start && t < self.t_end
    }

    /// Err when two operands live on different windows.
    pub fn ensure_same(&self, other: &TimeDomain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch(
                self.t_start,
                self.t_end,
                other.t_start,
                other.t_end,
            ))
        }
    }
}

/// A single spike train: strictly increasing event times inside an open window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    times: Vec<f64>,
    domain: TimeDomain,
}

impl SpikeTrain {
    /// Build a train, validating strict ordering and open-interval membership.
    pub fn new(times: Vec<f64>, domain: TimeDomain) -> Result<Self> {
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidSpikeTrain(format!(
                    "non-finite spike time at index {i}"
                )));
            }
            if !domain.contains_open(t) {
                return Err(Error::InvalidSpikeTrain(format!(
                    "spike time {t} outside the open interval ({}, {})",
                    domain.start(),
                    domain.end()
                )));
            }
            if i > 0 && times[i - 1] >= t {
                return Err(Error::InvalidSpikeTrain(format!(
                    "spike times not strictly increasing at index {i}: {} >= {t}",
                    times[i - 1]
                )));
            }
        }
        Ok(Self { times, domain })
    }

    /// Empty train on the given window.
    pub fn empty(domain: TimeDomain) -> Self {
        Self {
            times: Vec::new(),
            domain,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn domain(&self) -> &TimeDomain {
        &self.domain
    }

    /// Number of spikes `k`.
    pub fn cardinality(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Inter-spike intervals including the gaps to both window boundaries.
    ///
    /// Returns `(s_1 - t_start, s_2 - s_1, ..., t_end - s_k)`, a vector of
    /// `k + 1` positive entries summing to the window length. An empty train
    /// yields the single interval `t_end - t_start`.
    pub fn isi_vector(&self) -> Vec<f64> {
        let mut isi = Vec::with_capacity(self.times.len() + 1);
        let mut prev = self.domain.start();
        for &t in &self.times {
            isi.push(t - prev);
            prev = t;
        }
        isi.push(self.domain.end() - prev);
        isi
    }
}

/// A sample of spike trains on one shared window, with optional per-train labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSample {
    trains: Vec<SpikeTrain>,
    labels: Vec<Option<String>>,
}

impl TrainSample {
    pub fn new(trains: Vec<SpikeTrain>) -> Result<Self> {
        let n = trains.len();
        Self::with_labels(trains, vec![None; n])
    }

    pub fn with_labels(trains: Vec<SpikeTrain>, labels: Vec<Option<String>>) -> Result<Self> {
        if trains.is_empty() {
            return Err(Error::EmptySample);
        }
        if labels.len() != trains.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} trains",
                labels.len(),
                trains.len()
            )));
        }
        let domain = *trains[0].domain();
        for t in &trains[1..] {
            domain.ensure_same(t.domain())?;
        }
        Ok(Self { trains, labels })
    }

    pub fn trains(&self) -> &[SpikeTrain] {
        &self.trains
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn domain(&self) -> &TimeDomain {
        self.trains[0].domain()
    }

    pub fn len(&self) -> usize {
        self.trains.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one train
    }

    /// Average number of spikes per train.
    pub fn mean_cardinality(&self) -> f64 {
        let total: usize = self.trains.iter().map(SpikeTrain::cardinality).sum();
        total as f64 / self.trains.len() as f64
    }

    /// Concatenation of two samples on the same domain, labels preserved.
    pub fn concat(&self, other: &TrainSample) -> Result<TrainSample> {
        self.domain().ensure_same(other.domain())?;
        let mut trains = self.trains.clone();
        trains.extend_from_slice(&other.trains);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        TrainSample::with_labels(trains, labels)
    }

    /// New sample keeping only the trains whose index passes the predicate.
    pub fn filter_by_index<P: Fn(usize) -> bool>(&self, keep: P) -> Result<TrainSample> {
        let mut trains = Vec::new();
        let mut labels = Vec::new();
        for (i, (t, l)) in self.trains.iter().zip(&self.labels).enumerate() {
            if keep(i) {
                trains.push(t.clone());
                labels.push(l.clone());
            }
        }
        TrainSample::with_labels(trains, labels)
    }
}
