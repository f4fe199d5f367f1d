//! Monte Carlo estimators for the return, annulus, and joint-return
//! probabilities, the good-event probability and its two-time ratio, and
//! the second-moment machinery, all grounded by the exact Dirichlet
//! oracle in [`crate::dirichlet`].
//!
//! Sampling is counter-based (see [`crate::rng`]): sample `i` of an
//! operation is a pure function of `(seed, op salt, i)`, so samples are
//! reproducible in isolation and parallel chunking cannot change any
//! result. Walk draws for step `j` live at counters `3j`, `3j+1`, `3j+2`
//! (time-0 direction, refresh flag, fresh direction); single-time
//! estimators consume only the first slot, which is what makes a
//! two-time coupling at `t = 0` reproduce the single-walk trajectory
//! bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dirichlet::DirichletField;
use crate::error::{Error, Result};
use crate::point::{LatticePoint, ORIGIN};
use crate::rng::SampleDraws;
use crate::schedule::{level_of_time, Schedule};

/// Operation salts separating estimator randomness streams. The window
/// walk salt is shared between the single and joint return estimators on
/// purpose, and the good-event salt between the plain and coupled
/// good-event samplers: the coupled run at `t = 0` then replicates the
/// plain run exactly.
mod salt {
    pub const WINDOW_WALK: u64 = 1;
    pub const G_EVENT: u64 = 2;
    pub const GOOD_EVENT: u64 = 3;
    pub const SUMMARY_SINGLE: u64 = 4;
    pub const SUMMARY_JOINT: u64 = 5;
    pub const HITTING: u64 = 6;
    pub const LEAVE: u64 = 7;
}

/// Samples per parallel chunk. Fixed so that reductions are in canonical
/// order regardless of worker count.
const CHUNK: u64 = 4096;

/// Mergeable (count, sum, sum of squares) triple; merging is associative
/// and commutative, so any reduction topology gives the same totals.
#[derive(Clone, Copy, Debug, Default)]
pub struct Tally {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Tally {
    pub fn add(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }
}

/// Mean, standard error, and a normal-approximation confidence interval
/// for a Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub ci_level: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

pub const DEFAULT_CI_LEVEL: f64 = 0.95;

fn z_quantile(ci_level: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(0.5 + ci_level / 2.0)
}

impl EstimatorReport {
    /// Report for `hits` successes out of `n` Bernoulli samples;
    /// `stderr = sqrt(mean (1 - mean) / n)`.
    pub fn bernoulli(hits: u64, n: u64, ci_level: f64) -> Self {
        assert!(n > 0, "no samples");
        let mean = hits as f64 / n as f64;
        let stderr = (mean * (1.0 - mean) / n as f64).sqrt();
        Self::with_ci(mean, stderr, n, ci_level)
    }

    /// Report for real-valued samples using the sample variance.
    pub fn from_tally(t: Tally, ci_level: f64) -> Self {
        assert!(t.count > 0, "no samples");
        let n = t.count as f64;
        let mean = t.sum / n;
        let var = (t.sum_sq / n - mean * mean).max(0.0);
        let stderr = if t.count > 1 {
            (var / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self::with_ci(mean, stderr, t.count, ci_level)
    }

    fn with_ci(mean: f64, stderr: f64, n: u64, ci_level: f64) -> Self {
        let z = z_quantile(ci_level);
        Self {
            mean,
            stderr,
            n_samples: n,
            ci_level,
            ci_lo: mean - z * stderr,
            ci_hi: mean + z * stderr,
        }
    }
}

/// Ratio `P(joint) / P(single)^2` with its delta-method error, or the
/// reason it is undefined.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum RatioValue {
    Defined { ratio: f64, stderr: f64 },
    /// Denominator mean within 5 standard errors of zero.
    Undefined { denominator_sigmas: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioReport {
    pub numerator: EstimatorReport,
    pub denominator: EstimatorReport,
    pub value: RatioValue,
}

/// Runs `sample -> bool` over `0..samples` in fixed chunks and counts
/// hits. Integer reduction, so the result is independent of chunking.
fn count_hits<F>(samples: u64, f: F) -> u64
where
    F: Fn(u64) -> bool + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(samples);
            (lo..hi).filter(|&i| f(i)).count() as u64
        })
        .sum()
}

fn window_len(sched: &Schedule, k: usize) -> Result<u64> {
    let (a, b) = sched.window(k)?;
    Ok(b - a)
}

/// Walks `w` steps from `x` using slot-0 draws; true iff the origin is
/// hit at some step.
fn window_walk_hits(draws: &SampleDraws, x: LatticePoint, w: u64) -> bool {
    let mut pos = x;
    for j in 1..=w {
        pos += draws.direction(3 * j).offset();
        if pos.is_origin() {
            return true;
        }
    }
    false
}

/// Probability that the walk, conditioned to sit at `x` at the window
/// start, returns to the origin at some step of the inclusive window
/// `[s_(k-1), s_k]`. Realized as a fresh walk from `x` over the window
/// length (Markov property); the start index itself cannot count since
/// `x` is away from the origin.
pub fn estimate_return_prob(
    sched: &Schedule,
    k: usize,
    x: LatticePoint,
    samples: u64,
    seed: u64,
) -> Result<EstimatorReport> {
    if x.is_origin() {
        return Err(Error::BadHittingStart { x, n: 0 });
    }
    let w = window_len(sched, k)?;
    let hits = count_hits(samples, |i| {
        window_walk_hits(&SampleDraws::new(seed, salt::WINDOW_WALK, i), x, w)
    });
    Ok(EstimatorReport::bernoulli(hits, samples, DEFAULT_CI_LEVEL))
}

/// Probability that the walk conditioned to sit at `x` at the window
/// start fails to land inside the level-`k` annulus at step `s_k`.
pub fn estimate_g_failure(
    sched: &Schedule,
    k: usize,
    x: LatticePoint,
    samples: u64,
    seed: u64,
) -> Result<EstimatorReport> {
    let w = window_len(sched, k)?;
    let annulus = sched.annulus(k)?;
    let misses = count_hits(samples, |i| {
        let draws = SampleDraws::new(seed, salt::G_EVENT, i);
        let mut pos = x;
        for j in 1..=w {
            pos += draws.direction(3 * j).offset();
        }
        !annulus.contains(pos)
    });
    Ok(EstimatorReport::bernoulli(misses, samples, DEFAULT_CI_LEVEL))
}

/// Refresh probability of one step over a gap `t` under a rate-one
/// clock.
#[inline]
fn refresh_prob(t: f64) -> f64 {
    -(-t).exp_m1()
}

/// Probability that both coupled walks return within the window: walk 0
/// starts at `x`, walk `t` at `y`; step `j` of walk `t` equals step `j`
/// of walk 0 unless the step refreshed in `(0, t]` (probability
/// `1 - e^-t`, drawn once per step), in which case it is an independent
/// uniform direction.
pub fn estimate_joint_return(
    sched: &Schedule,
    k: usize,
    x: LatticePoint,
    y: LatticePoint,
    t: f64,
    samples: u64,
    seed: u64,
) -> Result<EstimatorReport> {
    if x.is_origin() {
        return Err(Error::BadHittingStart { x, n: 0 });
    }
    if y.is_origin() {
        return Err(Error::BadHittingStart { x: y, n: 0 });
    }
    if !(t >= 0.0) {
        return Err(Error::BadParameter {
            name: "t",
            value: t,
            constraint: "t >= 0",
        });
    }
    let w = window_len(sched, k)?;
    let p_refresh = refresh_prob(t);
    let hits = count_hits(samples, |i| {
        let draws = SampleDraws::new(seed, salt::WINDOW_WALK, i);
        let mut pos0 = x;
        let mut post = y;
        let mut hit0 = false;
        let mut hitt = false;
        for j in 1..=w {
            let d0 = draws.direction(3 * j);
            if !hit0 {
                pos0 += d0.offset();
                hit0 = pos0.is_origin();
            }
            if !hitt {
                let dt = if t > 0.0 && draws.uniform(3 * j + 1) < p_refresh {
                    draws.direction(3 * j + 2)
                } else {
                    d0
                };
                post += dt.offset();
                hitt = post.is_origin();
            }
            if hit0 && hitt {
                return true;
            }
        }
        false
    });
    Ok(EstimatorReport::bernoulli(hits, samples, DEFAULT_CI_LEVEL))
}

/// Level flags gathered from one walk pass: per level, whether the
/// return window fired and whether the annulus check passed.
struct LevelFlags {
    r_fired: Vec<bool>,
    g_ok: Vec<bool>,
}

impl LevelFlags {
    /// Largest `m` such that the good event holds at every level up to
    /// `m`.
    fn good_up_to(&self) -> usize {
        let mut m = 0;
        for k in 0..self.r_fired.len() {
            if self.r_fired[k] || !self.g_ok[k] {
                break;
            }
            m = k + 1;
        }
        m
    }
}

/// One walk from the origin through `s_M` steps; `direction(j)` supplies
/// step `j`. Returns the per-level flags with the shared-endpoint
/// convention: an origin hit at `s_k` counts for levels `k` and `k + 1`.
fn run_level_walk<D>(sched: &Schedule, direction: D) -> LevelFlags
where
    D: Fn(u64) -> crate::point::Direction,
{
    let m = sched.levels();
    let stops = sched.stops();
    let mut flags = LevelFlags {
        r_fired: vec![false; m],
        g_ok: vec![false; m],
    };
    let mut pos = ORIGIN;
    let mut level = 0usize; // current level index k-1: window (s_(k-1), s_k]
    for j in 1..=stops[m] {
        pos += direction(j).offset();
        while stops[level + 1] < j {
            level += 1;
        }
        if pos.is_origin() {
            flags.r_fired[level] = true;
        }
        if j == stops[level + 1] {
            if pos.is_origin() && level + 1 < m {
                // Shared endpoint: also the left end of the next window.
                flags.r_fired[level + 1] = true;
            }
            flags.g_ok[level] = sched
                .annulus(level + 1)
                .expect("level within schedule")
                .contains(pos);
        }
    }
    flags
}

/// Probability of the good event at a fixed time: every annulus event
/// holds and no return window fires, evaluated on a fresh walk from the
/// origin. Exactly 1 for a zero-level schedule.
pub fn estimate_good_event_prob(
    sched: &Schedule,
    samples: u64,
    seed: u64,
) -> Result<EstimatorReport> {
    let m = sched.levels();
    if m == 0 {
        return Ok(EstimatorReport::bernoulli(
            samples.max(1),
            samples.max(1),
            DEFAULT_CI_LEVEL,
        ));
    }
    let hits = count_hits(samples, |i| {
        let draws = SampleDraws::new(seed, salt::GOOD_EVENT, i);
        run_level_walk(sched, |j| draws.direction(3 * j)).good_up_to() == m
    });
    Ok(EstimatorReport::bernoulli(hits, samples, DEFAULT_CI_LEVEL))
}

/// Outcome of one coupled two-time good-event sample.
struct CoupledGood {
    good0: usize,
    goodt: usize,
}

fn coupled_good_sample(
    sched: &Schedule,
    draws: &SampleDraws,
    t: f64,
    p_refresh: f64,
) -> CoupledGood {
    let flags0 = run_level_walk(sched, |j| draws.direction(3 * j));
    let flagst = run_level_walk(sched, |j| {
        if t > 0.0 && draws.uniform(3 * j + 1) < p_refresh {
            draws.direction(3 * j + 2)
        } else {
            draws.direction(3 * j)
        }
    });
    CoupledGood {
        good0: flags0.good_up_to(),
        goodt: flagst.good_up_to(),
    }
}

/// The two-time ratio `P(E(0) and E(t)) / P(E(0))^2`.
///
/// The numerator couples one realization's steps at times 0 and `t`
/// through per-step refresh flags and shares the good-event salt, so its
/// time-0 marginal replicates [`estimate_good_event_prob`] sample for
/// sample; the joint event is then contained in the denominator event
/// per sample, and at `t = 0` the ratio collapses to exactly
/// `1 / denominator`. The stderr is the delta method for `p / q^2` with
/// the empirical covariance of the shared samples.
pub fn estimate_ratio(sched: &Schedule, t: f64, samples: u64, seed: u64) -> Result<RatioReport> {
    if !(t >= 0.0) {
        return Err(Error::BadParameter {
            name: "t",
            value: t,
            constraint: "t >= 0",
        });
    }
    let m = sched.levels();
    if m == 0 {
        let sure = EstimatorReport::bernoulli(samples.max(1), samples.max(1), DEFAULT_CI_LEVEL);
        return Ok(RatioReport {
            numerator: sure,
            denominator: sure,
            value: RatioValue::Defined {
                ratio: 1.0,
                stderr: 0.0,
            },
        });
    }
    let p_refresh = refresh_prob(t);
    let chunks = samples.div_ceil(CHUNK);
    let (joint_hits, single_hits) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(samples);
            let mut joint = 0u64;
            let mut single = 0u64;
            for i in lo..hi {
                let draws = SampleDraws::new(seed, salt::GOOD_EVENT, i);
                let s = coupled_good_sample(sched, &draws, t, p_refresh);
                if s.good0 == m {
                    single += 1;
                    if s.goodt == m {
                        joint += 1;
                    }
                }
            }
            (joint, single)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let numerator = EstimatorReport::bernoulli(joint_hits, samples, DEFAULT_CI_LEVEL);
    let denominator = estimate_good_event_prob(sched, samples, seed)?;
    debug_assert_eq!(single_hits, (denominator.mean * samples as f64).round() as u64);

    let p = numerator.mean;
    let q = denominator.mean;
    let value = if q <= 5.0 * denominator.stderr {
        RatioValue::Undefined {
            denominator_sigmas: if denominator.stderr > 0.0 {
                q / denominator.stderr
            } else {
                0.0
            },
        }
    } else {
        let ratio = p / (q * q);
        // Delta method for f = p/q^2 with shared samples:
        // cov(1_joint, 1_single) = p(1 - q) since joint implies single.
        let n = samples as f64;
        let var_p = p * (1.0 - p) / n;
        let var_q = q * (1.0 - q) / n;
        let cov = p * (1.0 - q) / n;
        let dfdp = 1.0 / (q * q);
        let dfdq = -2.0 * p / (q * q * q);
        let var = (dfdp * dfdp * var_p + dfdq * dfdq * var_q + 2.0 * dfdp * dfdq * cov).max(0.0);
        RatioValue::Defined {
            ratio,
            stderr: var.sqrt(),
        }
    };
    Ok(RatioReport {
        numerator,
        denominator,
        value,
    })
}

/// One row of the level-by-level conditional table.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub k: usize,
    /// Samples satisfying the level-(k-1) event (single / joint run).
    pub n_cond_single: u64,
    pub n_cond_joint: u64,
    /// Conditional estimates `P(E_k | E_(k-1))` and the joint analogue.
    pub p_single: f64,
    pub se_single: f64,
    pub p_joint: f64,
    pub se_joint: f64,
    /// Unconditional counts, exposed for containment checks.
    pub n_single: u64,
    pub n_joint: u64,
    pub sufficient: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    pub t: f64,
    /// `K(t)`: joint-side constraints apply to levels above it.
    pub k_threshold: u64,
    /// Smallest `C >= 0` such that, with `g_k = C log2(k) / k^2`, the
    /// squared single conditional exceeds `1 - 4/k - g_k` for `k >= 2`
    /// and the joint conditional stays below `1 - 4/k + g_k` for
    /// `k > K(t)`, over the levels with sufficient conditioning samples.
    pub fitted_c: f64,
    pub samples: u64,
}

/// Minimum conditioning count for a level to participate in the fit.
const MIN_CONDITIONING: u64 = 100;

/// Level-by-level conditional probabilities of the good event, single
/// time and coupled pair, by rejection on the previous level.
pub fn check_summary(sched: &Schedule, t: f64, samples: u64, seed: u64) -> Result<SummaryTable> {
    if !(t > 0.0) {
        return Err(Error::BadParameter {
            name: "t",
            value: t,
            constraint: "t > 0",
        });
    }
    let m = sched.levels();
    let p_refresh = refresh_prob(t);
    let chunks = samples.div_ceil(CHUNK);

    // counts[k] = samples good through level k+1 (single run);
    // jcounts[k] likewise for the coupled pair.
    let (counts, jcounts) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(samples);
            let mut counts = vec![0u64; m + 1];
            let mut jcounts = vec![0u64; m + 1];
            for i in lo..hi {
                let sd = SampleDraws::new(seed, salt::SUMMARY_SINGLE, i);
                let good = run_level_walk(sched, |j| sd.direction(3 * j)).good_up_to();
                for slot in counts.iter_mut().take(good + 1) {
                    *slot += 1;
                }
                let jd = SampleDraws::new(seed, salt::SUMMARY_JOINT, i);
                let s = coupled_good_sample(sched, &jd, t, p_refresh);
                let jgood = s.good0.min(s.goodt);
                for slot in jcounts.iter_mut().take(jgood + 1) {
                    *slot += 1;
                }
            }
            (counts, jcounts)
        })
        .reduce(
            || (vec![0u64; m + 1], vec![0u64; m + 1]),
            |mut a, b| {
                for (x, y) in a.0.iter_mut().zip(&b.0) {
                    *x += y;
                }
                for (x, y) in a.1.iter_mut().zip(&b.1) {
                    *x += y;
                }
                a
            },
        );

    let k_threshold = level_of_time(t)?;
    let mut rows = Vec::with_capacity(m);
    let mut fitted_c = 0.0f64;
    for k in 1..=m {
        let cond = |num: u64, den: u64| -> (f64, f64) {
            if den == 0 {
                return (f64::NAN, f64::NAN);
            }
            let p = num as f64 / den as f64;
            (p, (p * (1.0 - p) / den as f64).sqrt())
        };
        let (p_single, se_single) = cond(counts[k], counts[k - 1]);
        let (p_joint, se_joint) = cond(jcounts[k], jcounts[k - 1]);
        let sufficient = counts[k - 1] >= MIN_CONDITIONING && jcounts[k - 1] >= MIN_CONDITIONING;
        rows.push(SummaryRow {
            k,
            n_cond_single: counts[k - 1],
            n_cond_joint: jcounts[k - 1],
            p_single,
            se_single,
            p_joint,
            se_joint,
            n_single: counts[k],
            n_joint: jcounts[k],
            sufficient,
        });
        if sufficient && k >= 2 {
            let kf = k as f64;
            let log_k = kf.log2();
            // Single side: p^2 > 1 - 4/k - g_k.
            let need = (1.0 - 4.0 / kf - p_single * p_single) * kf * kf / log_k;
            fitted_c = fitted_c.max(need);
            // Joint side, only where the decorrelation window applies.
            if (k as u64) > k_threshold {
                let need = (p_joint - 1.0 + 4.0 / kf) * kf * kf / log_k;
                fitted_c = fitted_c.max(need);
            }
        }
    }
    Ok(SummaryTable {
        rows,
        t,
        k_threshold,
        fitted_c,
        samples,
    })
}

/// Paley-Zygmund style lower bound `(mean)^2 / mean of squares`; zero
/// when every sample is zero.
pub fn second_moment_lower_bound(l_samples: &[f64]) -> Result<f64> {
    if l_samples.is_empty() {
        return Err(Error::BadParameter {
            name: "l_samples",
            value: 0.0,
            constraint: "at least one sample",
        });
    }
    let n = l_samples.len() as f64;
    let mean = l_samples.iter().sum::<f64>() / n;
    let mean_sq = l_samples.iter().map(|v| v * v).sum::<f64>() / n;
    if mean_sq == 0.0 {
        return Ok(0.0);
    }
    Ok(mean * mean / mean_sq)
}

/// The two excursion-size probabilities bounded by `C/m^2`: escaping to
/// distance `m sqrt(n)` before step `n`, and finishing within
/// `sqrt(n)/m` of `target`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeaveReport {
    pub exceed: EstimatorReport,
    pub concentrate: EstimatorReport,
    /// `C/m^2` for the configured constant.
    pub bound: f64,
    pub exceed_within: bool,
    pub concentrate_within: bool,
}

pub fn check_leave(
    n_steps: u64,
    m: f64,
    target: LatticePoint,
    c: f64,
    samples: u64,
    seed: u64,
) -> Result<LeaveReport> {
    if !(m > 0.0 && m * m < n_steps as f64) {
        return Err(Error::BadParameter {
            name: "m",
            value: m,
            constraint: "0 < m < sqrt(n)",
        });
    }
    let sqrt_n = (n_steps as f64).sqrt();
    let exceed_r2 = (m * sqrt_n) * (m * sqrt_n);
    let conc_r2 = (sqrt_n / m) * (sqrt_n / m);
    let chunks = samples.div_ceil(CHUNK);
    let (exceed_hits, conc_hits) = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let lo = ch * CHUNK;
            let hi = ((ch + 1) * CHUNK).min(samples);
            let mut ex = 0u64;
            let mut co = 0u64;
            for i in lo..hi {
                let draws = SampleDraws::new(seed, salt::LEAVE, i);
                let mut pos = ORIGIN;
                let mut exceeded = false;
                for j in 1..n_steps {
                    pos += draws.direction(3 * j).offset();
                    if (pos.norm_sq() as f64) > exceed_r2 {
                        exceeded = true;
                    }
                }
                pos += draws.direction(3 * n_steps).offset();
                if exceeded {
                    ex += 1;
                }
                if ((pos - target).norm_sq() as f64) < conc_r2 {
                    co += 1;
                }
            }
            (ex, co)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let exceed = EstimatorReport::bernoulli(exceed_hits, samples, DEFAULT_CI_LEVEL);
    let concentrate = EstimatorReport::bernoulli(conc_hits, samples, DEFAULT_CI_LEVEL);
    let bound = c / (m * m);
    Ok(LeaveReport {
        exceed_within: exceed.mean <= bound,
        concentrate_within: concentrate.mean <= bound,
        exceed,
        concentrate,
        bound,
    })
}

/// Monte Carlo counterpart of the exact hitting probability: walk from
/// `x` until the origin is hit or the ball of radius `n` is left.
pub fn hitting_prob_mc(
    n: i64,
    x: LatticePoint,
    samples: u64,
    seed: u64,
) -> Result<EstimatorReport> {
    if x.is_origin() || x.norm_sq() >= n * n {
        return Err(Error::BadHittingStart { x, n });
    }
    let n2 = n * n;
    let hits = count_hits(samples, |i| {
        let draws = SampleDraws::new(seed, salt::HITTING, i);
        let mut pos = x;
        let mut ctr = 0u64;
        loop {
            ctr += 1;
            pos += draws.direction(ctr).offset();
            if pos.is_origin() {
                return true;
            }
            if pos.norm_sq() >= n2 {
                return false;
            }
        }
    });
    Ok(EstimatorReport::bernoulli(hits, samples, DEFAULT_CI_LEVEL))
}

/// One grid point of a logarithmic hitting-bound fit.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HittingBoundRow {
    pub n: i64,
    pub x: LatticePoint,
    pub exact: f64,
    /// Smallest `C` making both bounds hold at this point.
    pub needed_c: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HittingBoundFit {
    pub rows: Vec<HittingBoundRow>,
    /// Smallest `C >= 0` such that, base-2 logs throughout,
    /// `(log n - log|x| - C)/log n <= h <= (log n - log|x| + C)/log n`
    /// at every grid point.
    pub c: f64,
}

/// Fits the smallest non-negative `C` for which every exact hitting
/// probability on the `radii x starts` grid lies inside both logarithmic
/// bounds. `C` is non-increasing under shrinking the grid.
pub fn fit_hitting_bound_constant(radii: &[i64], starts: &[LatticePoint]) -> Result<HittingBoundFit> {
    let mut rows = Vec::new();
    let mut c: f64 = 0.0;
    for &n in radii {
        let field = DirichletField::solve(n)?;
        for &x in starts {
            let h = field.value(x)?;
            let log_n = (n as f64).log2();
            let log_x = x.norm().log2();
            let lower_slack = log_n - log_x - h * log_n; // C >= this for lower bound
            let upper_slack = h * log_n - (log_n - log_x); // C >= this for upper bound
            let needed = lower_slack.max(upper_slack).max(0.0);
            rows.push(HittingBoundRow {
                n,
                x,
                exact: h,
                needed_c: needed,
            });
            c = c.max(needed);
        }
    }
    if rows.is_empty() {
        return Err(Error::BadParameter {
            name: "grid",
            value: 0.0,
            constraint: "at least one (n, x) pair",
        });
    }
    Ok(HittingBoundFit { rows, c })
}

/// Constant `C` such that `f(t) <= C (1 + |log2 t|)^4` across the given
/// `(t, ratio)` grid: the max of `ratio / (1 + |log2 t|)^4`.
pub fn fit_log4_constant(points: &[(f64, f64)]) -> f64 {
    points
        .iter()
        .map(|&(t, ratio)| ratio / (1.0 + t.log2().abs()).powi(4))
        .fold(0.0, f64::max)
}
