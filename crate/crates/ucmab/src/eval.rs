//! Offline evaluation: qini curves over ranked individuals, the random
//! selection baseline, and multi-run regret aggregation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Outcome, Treatment};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("scored input must be non-empty")]
    EmptyInput,
    #[error("bin count must be >= 1, got {0}")]
    InvalidBinCount(usize),
    #[error("bin count {bins} exceeds the number of individuals {n}")]
    TooManyBins { bins: usize, n: usize },
    #[error("score must be finite, got {0}")]
    NonFiniteScore(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no traces to aggregate")]
    NoTraces,
}

/// A holdout individual ranked by a model's estimated uplift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredIndividual {
    pub score: f64,
    pub arm: Treatment,
    pub y: Outcome,
}

/// One point of the cumulative incremental response-rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QiniPoint {
    /// Bin index, 1-based.
    pub bin: usize,
    /// Fraction of the population included, `bin / bins`.
    pub fraction: f64,
    /// Cumulative incremental response rate over the first `bin` bins.
    pub q: f64,
    pub responders_treated: usize,
    pub n_treated: usize,
    pub responders_control: usize,
    pub n_control: usize,
    /// Set when a cumulative denominator was zero and `q` was pinned to 0.
    pub undefined_rate: bool,
}

/// Cumulative incremental response-rate curve: sort descending by score
/// (stable, ties by input order), partition into `bins` near-equal bins
/// (the first `n mod bins` bins get one extra), and compute
/// `Y1/N1 - Y0/N0` cumulatively.
pub fn qini_curve(scored: &[ScoredIndividual], bins: usize) -> Result<Vec<QiniPoint>, EvalError> {
    if scored.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if bins < 1 {
        return Err(EvalError::InvalidBinCount(bins));
    }
    if bins > scored.len() {
        return Err(EvalError::TooManyBins {
            bins,
            n: scored.len(),
        });
    }
    if let Some(s) = scored.iter().find(|s| !s.score.is_finite()) {
        return Err(EvalError::NonFiniteScore(s.score));
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].score.partial_cmp(&scored[a].score).unwrap());

    let n = scored.len();
    let base = n / bins;
    let extra = n % bins;
    let mut points = Vec::with_capacity(bins);
    let mut cursor = 0usize;
    let (mut y1, mut n1, mut y0, mut n0) = (0usize, 0usize, 0usize, 0usize);
    for bin in 1..=bins {
        let bin_size = base + usize::from(bin <= extra);
        for &idx in &order[cursor..cursor + bin_size] {
            let s = &scored[idx];
            match s.arm {
                Treatment::Treated => {
                    n1 += 1;
                    if s.y.responded {
                        y1 += 1;
                    }
                }
                Treatment::Control => {
                    n0 += 1;
                    if s.y.responded {
                        y0 += 1;
                    }
                }
            }
        }
        cursor += bin_size;
        let undefined = n1 == 0 || n0 == 0;
        let q = if undefined {
            0.0
        } else {
            y1 as f64 / n1 as f64 - y0 as f64 / n0 as f64
        };
        points.push(QiniPoint {
            bin,
            fraction: bin as f64 / bins as f64,
            q,
            responders_treated: y1,
            n_treated: n1,
            responders_control: y0,
            n_control: n0,
            undefined_rate: undefined,
        });
    }
    Ok(points)
}

/// Expected curve of a random ranking: a linear ramp from `final_q / bins`
/// at the first bin to `final_q` at the last.
pub fn random_selection_line(final_q: f64, bins: usize) -> Vec<f64> {
    (1..=bins)
        .map(|b| final_q * b as f64 / bins as f64)
        .collect()
}

/// Trapezoidal area between a model's qini curve and a baseline over the
/// included-fraction axis, both anchored at (0, 0).
pub fn qini_area(curve: &[QiniPoint], baseline: &[f64]) -> Result<f64, EvalError> {
    if curve.len() != baseline.len() {
        return Err(EvalError::LengthMismatch(curve.len(), baseline.len()));
    }
    let mut area = 0.0;
    let mut prev_fraction = 0.0;
    let mut prev_gap = 0.0;
    for (point, &base) in curve.iter().zip(baseline) {
        let gap = point.q - base;
        area += (point.fraction - prev_fraction) * (gap + prev_gap) / 2.0;
        prev_fraction = point.fraction;
        prev_gap = gap;
    }
    Ok(area)
}

/// Per-step causal regret of one episode, kept both raw and as a trailing
/// moving average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    raw: Vec<f64>,
    windowed: Vec<f64>,
    window: usize,
    drift_markers: Vec<u64>,
}

impl RegretTrace {
    pub fn from_raw(raw: Vec<f64>, window: usize, drift_markers: Vec<u64>) -> Self {
        let window = window.max(1);
        let mut windowed = Vec::with_capacity(raw.len());
        let mut running = 0.0;
        for (t, &r) in raw.iter().enumerate() {
            running += r;
            if t >= window {
                running -= raw[t - window];
            }
            let len = (t + 1).min(window);
            windowed.push(running / len as f64);
        }
        RegretTrace {
            raw,
            windowed,
            window,
            drift_markers,
        }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn windowed(&self) -> &[f64] {
        &self.windowed
    }

    pub fn drift_markers(&self) -> &[u64] {
        &self.drift_markers
    }

    /// Mean raw regret over `[from, to)`.
    pub fn mean_over(&self, from: usize, to: usize) -> f64 {
        let to = to.min(self.raw.len());
        if from >= to {
            return 0.0;
        }
        self.raw[from..to].iter().sum::<f64>() / (to - from) as f64
    }

    /// Windowed regret at the final step.
    pub fn final_windowed(&self) -> f64 {
        *self.windowed.last().unwrap_or(&0.0)
    }
}

/// Aggregate of replicate traces: pointwise mean plus a min/max band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedTrace {
    pub mean: RegretTrace,
    pub band_min: Vec<f64>,
    pub band_max: Vec<f64>,
}

/// Pointwise mean of equal-length traces, with the min/max envelope for
/// plotting.
pub fn aggregate_traces(traces: &[RegretTrace]) -> Result<AggregatedTrace, EvalError> {
    let first = traces.first().ok_or(EvalError::NoTraces)?;
    for t in traces {
        if t.len() != first.len() {
            return Err(EvalError::LengthMismatch(t.len(), first.len()));
        }
        if t.window != first.window {
            return Err(EvalError::LengthMismatch(t.window, first.window));
        }
    }
    let n = traces.len() as f64;
    let len = first.len();
    let mut mean_raw = vec![0.0; len];
    let mut band_min = vec![f64::INFINITY; len];
    let mut band_max = vec![f64::NEG_INFINITY; len];
    for trace in traces {
        for (i, (&r, &w)) in trace.raw.iter().zip(&trace.windowed).enumerate() {
            mean_raw[i] += r / n;
            band_min[i] = band_min[i].min(w);
            band_max[i] = band_max[i].max(w);
        }
    }
    Ok(AggregatedTrace {
        mean: RegretTrace::from_raw(mean_raw, first.window, first.drift_markers.clone()),
        band_min,
        band_max,
    })
}
