//! ADWIN adaptive-windowing change detector over a stream of values in
//! [0, 1]. The window is kept as an exponential histogram: level `i`
//! holds at most `M` buckets of `2^i` elements each, so memory is
//! logarithmic in the window width. On every insertion all bucket
//! boundaries are checked as candidate cuts against a Hoeffding-style
//! bound; when the two sub-window means differ by more than the bound,
//! the older portion is dropped.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::BaselineError;

/// Max buckets per histogram level.
const MAX_BUCKETS_PER_LEVEL: usize = 5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdwinDetector {
    delta: f64,
    /// `levels[i]` holds bucket sums of `2^i` elements, oldest at the front.
    levels: Vec<VecDeque<f64>>,
    total: f64,
    width: u64,
}

impl AdwinDetector {
    pub fn new(delta: f64) -> Result<Self, BaselineError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(BaselineError::InvalidDelta(delta));
        }
        Ok(AdwinDetector {
            delta,
            levels: vec![VecDeque::new()],
            total: 0.0,
            width: 0,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of elements currently in the window.
    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn mean(&self) -> f64 {
        if self.width == 0 {
            0.0
        } else {
            self.total / self.width as f64
        }
    }

    pub fn reset(&mut self) {
        self.levels = vec![VecDeque::new()];
        self.total = 0.0;
        self.width = 0;
    }

    /// Insert a value and check for a distribution change. Returns true
    /// and shrinks the window when a change is detected.
    pub fn observe(&mut self, value: f64) -> Result<bool, BaselineError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(BaselineError::InvalidSignal(value));
        }
        self.insert(value);
        Ok(self.detect_and_shrink())
    }

    fn insert(&mut self, value: f64) {
        self.levels[0].push_back(value);
        self.total += value;
        self.width += 1;
        // merge the two oldest buckets of an overfull level into the next
        for level in 0..self.levels.len() {
            if self.levels[level].len() <= MAX_BUCKETS_PER_LEVEL {
                break;
            }
            let a = self.levels[level].pop_front().unwrap();
            let b = self.levels[level].pop_front().unwrap();
            if level + 1 == self.levels.len() {
                self.levels.push(VecDeque::new());
            }
            self.levels[level + 1].push_back(a + b);
        }
    }

    fn detect_and_shrink(&mut self) -> bool {
        let mut detected = false;
        // repeat until no admissible cut remains
        while self.find_cut() {
            detected = true;
            self.drop_oldest_bucket();
        }
        detected
    }

    /// Scan every bucket boundary, oldest first, for a split (W0, W1)
    /// with |mean0 - mean1| >= eps_cut.
    fn find_cut(&self) -> bool {
        if self.width < 2 {
            return false;
        }
        let log_term = (4.0 * self.width as f64 / self.delta).ln();
        let mut n0 = 0u64;
        let mut sum0 = 0.0;
        for level in (0..self.levels.len()).rev() {
            let size = 1u64 << level;
            for &bucket_sum in &self.levels[level] {
                n0 += size;
                sum0 += bucket_sum;
                let n1 = self.width - n0;
                if n1 == 0 {
                    break;
                }
                let sum1 = self.total - sum0;
                let mean0 = sum0 / n0 as f64;
                let mean1 = sum1 / n1 as f64;
                let m = 1.0 / (1.0 / n0 as f64 + 1.0 / n1 as f64);
                let eps_cut = (log_term / (2.0 * m)).sqrt();
                if (mean0 - mean1).abs() >= eps_cut {
                    return true;
                }
            }
        }
        false
    }

    fn drop_oldest_bucket(&mut self) {
        for level in (0..self.levels.len()).rev() {
            if let Some(sum) = self.levels[level].pop_front() {
                self.total -= sum;
                self.width -= 1u64 << level;
                return;
            }
        }
    }
}

/// Feed one value to the detector; true means a change was detected and
/// the window was shrunk.
pub fn adwin_observe(detector: &mut AdwinDetector, value: f64) -> Result<bool, BaselineError> {
    detector.observe(value)
}
