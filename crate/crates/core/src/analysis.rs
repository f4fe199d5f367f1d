//! Post-processing: box-counting dimension of good-time sets and
//! escape-rate scans against slowly-growing barriers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicator::PiecewiseIndicator;
use crate::point::ORIGIN;
use crate::process::DynamicalWalkRealization;
use crate::schedule::Schedule;

/// `n^(0.5 - 1/(log2 n)^(0.25 + eps))` for `n >= 2`; `0` for `n` in
/// `{0, 1}` (where `log2 n` would vanish or be undefined).
pub fn log_barrier(n: u64, eps: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let log_n = (n as f64).log2();
    (n as f64).powf(0.5 - 1.0 / log_n.powf(0.25 + eps))
}

/// Barrier families for escape-rate experiments: the pure power `n^alpha`
/// or the log-corrected form of [`log_barrier`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Barrier {
    Power { alpha: f64 },
    LogCorrected { eps: f64 },
}

impl Barrier {
    pub fn eval(self, n: u64) -> f64 {
        match self {
            Barrier::Power { alpha } => {
                if n == 0 {
                    0.0
                } else {
                    (n as f64).powf(alpha)
                }
            }
            Barrier::LogCorrected { eps } => log_barrier(n, eps),
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Barrier::Power { alpha } => {
                if !(0.0 < alpha && alpha < 0.5) {
                    return Err(Error::BadParameter {
                        name: "alpha",
                        value: alpha,
                        constraint: "0 < alpha < 1/2",
                    });
                }
            }
            Barrier::LogCorrected { eps } => {
                if !(eps > 0.0) {
                    return Err(Error::BadParameter {
                        name: "eps",
                        value: eps,
                        constraint: "eps > 0",
                    });
                }
            }
        }
        Ok(())
    }
}

/// Box-counting summary: dyadic box sizes, boxes hit per scale, and the
/// least-squares slope of `log2(count)` against depth.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionReport {
    /// Dyadic depths used.
    pub depths: Vec<u32>,
    /// Box size per depth: `|domain| * 2^-d`.
    pub scales: Vec<f64>,
    /// Boxes intersecting the set per depth.
    pub counts: Vec<u64>,
    /// Fitted dimension estimate.
    pub slope: f64,
    /// R^2 of the fit; 1 for a perfect power law.
    pub fit_r2: f64,
    /// Set was empty; slope reported as 0.
    pub empty: bool,
}

/// Counts, per depth `d`, the dyadic boxes of size `|domain| * 2^-d`
/// hit by the set, and fits `log2(count)` against `d` by unweighted
/// least squares. Depths with zero count are dropped from the fit.
pub fn box_count_dimension(ind: &PiecewiseIndicator, depths: &[u32]) -> Result<DimensionReport> {
    let (lo, hi) = ind.domain();
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(Error::BadParameter {
            name: "domain",
            value: span,
            constraint: "positive length",
        });
    }
    if depths.is_empty() || depths.contains(&0) {
        return Err(Error::BadParameter {
            name: "depths",
            value: 0.0,
            constraint: "at least one depth, all >= 1",
        });
    }

    let mut scales = Vec::with_capacity(depths.len());
    let mut counts = Vec::with_capacity(depths.len());
    for &d in depths {
        let boxes = 1u64 << d;
        let width = span / boxes as f64;
        scales.push(width);
        let mut count = 0u64;
        let mut last_counted: i64 = -1;
        for &(a, b) in ind.intervals() {
            // Boxes k with [lo + k w, lo + (k+1) w) meeting [a, b).
            let mut k_lo = ((a - lo) / width).floor() as i64;
            let k_hi = (((b - lo) / width).ceil() as i64 - 1).min(boxes as i64 - 1);
            k_lo = k_lo.max(last_counted + 1);
            if k_hi >= k_lo {
                count += (k_hi - k_lo + 1) as u64;
                last_counted = k_hi;
            }
        }
        counts.push(count);
    }

    let empty = counts.iter().all(|&c| c == 0);
    let (slope, fit_r2) = if empty {
        (0.0, 0.0)
    } else {
        let pts: Vec<(f64, f64)> = depths
            .iter()
            .zip(&counts)
            .filter(|(_, &c)| c > 0)
            .map(|(&d, &c)| (d as f64, (c as f64).log2()))
            .collect();
        least_squares(&pts)
    };

    Ok(DimensionReport {
        depths: depths.to_vec(),
        scales,
        counts,
        slope,
        fit_r2,
        empty,
    })
}

/// Slope and R^2 of an unweighted least-squares line through `pts`.
fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (0.0, 1.0);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (0.0, 1.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Outcome of one grid time in an escape-rate scan.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EscapeReport {
    pub t: f64,
    /// The barrier was never violated over `n` in `[1, s_M]`.
    pub survives: bool,
    /// Largest `n` such that no violation occurs at or before it.
    pub max_surviving_n: u64,
}

/// Evaluates, at each grid time, whether the walk stays above the barrier
/// for every `n` up to `s_M`. The time-`t` step vector is reconstructed
/// incrementally between consecutive grid points (refresh replay), then
/// scanned directly; grid times are handled in sorted order and reported
/// sorted, so results do not depend on the input ordering.
pub fn escape_rate_scan(
    r: &DynamicalWalkRealization,
    sched: &Schedule,
    barrier: Barrier,
    t_grid: &[f64],
) -> Result<Vec<EscapeReport>> {
    barrier.validate()?;
    let n = sched.max_stop();
    if n > r.n_steps() as u64 {
        return Err(Error::StateTooShort {
            len: r.n_steps(),
            k: sched.levels(),
            needed: n,
        });
    }
    let n = n as usize;
    let mut grid: Vec<f64> = t_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("grid times are finite"));
    grid.dedup();
    if grid.is_empty() {
        return Ok(Vec::new());
    }

    let mut steps = r.steps_at(n, grid[0])?;
    let mut out = Vec::with_capacity(grid.len());
    let mut prev_t = grid[0];
    for &t in &grid {
        if t > prev_t {
            for e in r.refresh_events((prev_t, t), (1, n))? {
                steps[e.index - 1] = e.direction;
            }
            prev_t = t;
        }
        out.push(scan_barrier(&steps, barrier, t));
    }
    Ok(out)
}

fn scan_barrier(steps: &[crate::point::Direction], barrier: Barrier, t: f64) -> EscapeReport {
    let mut pos = ORIGIN;
    let mut max_ok = steps.len() as u64;
    let mut survives = true;
    for (i, d) in steps.iter().enumerate() {
        pos += d.offset();
        let n = (i + 1) as u64;
        if pos.norm() < barrier.eval(n) {
            survives = false;
            max_ok = n - 1;
            break;
        }
    }
    EscapeReport {
        t,
        survives,
        max_surviving_n: max_ok,
    }
}
