//! Exact piecewise-constant truth sets over a time interval.

use serde::{Deserialize, Serialize};

/// The truth set of a predicate over `[domain.0, domain.1]`, stored as
/// sorted disjoint half-open intervals `[a, b)`. Interior endpoints of a
/// scanned set are bit-exact refresh times of the underlying realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseIndicator {
    domain: (f64, f64),
    intervals: Vec<(f64, f64)>,
}

impl PiecewiseIndicator {
    pub fn empty(domain: (f64, f64)) -> Self {
        assert!(domain.0 <= domain.1, "inverted domain");
        Self {
            domain,
            intervals: Vec::new(),
        }
    }

    /// Builds from pre-sorted disjoint intervals; merges abutting pieces
    /// and drops empty ones.
    pub fn from_intervals(domain: (f64, f64), intervals: Vec<(f64, f64)>) -> Self {
        let mut ind = Self::empty(domain);
        for (a, b) in intervals {
            ind.push(a, b);
        }
        ind
    }

    /// Appends `[a, b)`; must come after everything already stored.
    pub fn push(&mut self, a: f64, b: f64) {
        assert!(a >= self.domain.0 && b <= self.domain.1, "outside domain");
        assert!(a <= b, "inverted interval");
        if a == b {
            return;
        }
        if let Some(last) = self.intervals.last_mut() {
            assert!(last.1 <= a, "intervals must be pushed in order");
            if last.1 == a {
                last.1 = b;
                return;
            }
        }
        self.intervals.push((a, b));
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure of the set.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Value at `t` under the half-open convention.
    pub fn value_at(&self, t: f64) -> bool {
        let i = self.intervals.partition_point(|&(a, _)| a <= t);
        i > 0 && t < self.intervals[i - 1].1
    }

    /// Endpoints strictly inside the domain; for scanned sets these lie in
    /// the countable set of refresh times.
    pub fn interior_endpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for &(a, b) in &self.intervals {
            if a > self.domain.0 {
                out.push(a);
            }
            if b < self.domain.1 {
                out.push(b);
            }
        }
        out
    }

    /// Restriction to a sub-window of the domain.
    pub fn restrict(&self, window: (f64, f64)) -> Self {
        assert!(window.0 >= self.domain.0 && window.1 <= self.domain.1);
        let mut out = Self::empty(window);
        for &(a, b) in &self.intervals {
            let lo = a.max(window.0);
            let hi = b.min(window.1);
            if lo < hi {
                out.push(lo, hi);
            }
        }
        out
    }
}
