//! The raw randomness of a dynamical walk: i.i.d. step directions, each
//! refreshed at the arrival times of an independent rate-one Poisson clock.
//!
//! Step `n` holds a direction that is constant on `[tau_m, tau_{m+1})`;
//! a query exactly at a refresh time sees the new value. Timelines are
//! generated lazily: index `n`'s timeline is a pure function of
//! `(seed, n)`, truncated at `t_max`.

use rand_chacha::rand_core::RngCore;

use crate::error::{Error, Result};
use crate::point::Direction;
use crate::rng;

/// Refresh history of a single step index over `[0, t_max]`.
///
/// `times[0] == 0.0` always; later entries are the strictly increasing
/// Poisson arrival times in `(0, t_max]`. `directions[m]` holds on
/// `[times[m], times[m+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct RefreshTimeline {
    times: Vec<f64>,
    directions: Vec<Direction>,
}

impl RefreshTimeline {
    pub fn from_parts(times: Vec<f64>, directions: Vec<Direction>) -> Result<Self> {
        if times.len() != directions.len() || times.is_empty() {
            return Err(Error::BadContainer {
                reason: "timeline arrays empty or of mismatched length".into(),
            });
        }
        if times[0] != 0.0 {
            return Err(Error::BadContainer {
                reason: "timeline must start at tau = 0".into(),
            });
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadContainer {
                reason: "refresh times must be strictly increasing".into(),
            });
        }
        Ok(Self { times, directions })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    /// Number of refreshes after time zero.
    pub fn refresh_count(&self) -> usize {
        self.times.len() - 1
    }

    /// Direction in force at time `t` (half-open convention).
    pub fn value_at(&self, t: f64) -> Direction {
        let m = self.times.partition_point(|&tau| tau <= t);
        self.directions[m - 1]
    }

    /// First refresh lands in `(0, t]`?
    pub fn refreshed_by(&self, t: f64) -> bool {
        self.times.len() > 1 && self.times[1] <= t
    }
}

/// All step timelines of one experiment: the full randomness of a
/// dynamical walk over indices `1..=n_steps` and times `[0, t_max]`.
///
/// Immutable after sampling and safe to query concurrently.
#[derive(Clone, Debug)]
pub struct DynamicalWalkRealization {
    n_steps: usize,
    t_max: f64,
    seed: u64,
    /// `None`: timelines are regenerated from the seed on demand.
    /// `Some`: explicit timelines, e.g. read back from a container dump.
    explicit: Option<Vec<RefreshTimeline>>,
}

/// A refresh event: step `index` switches to `direction` at time `time`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefreshEvent {
    pub time: f64,
    pub index: usize,
    pub direction: Direction,
}

/// Samples the step timelines for indices `1..=n_steps` over `[0, t_max]`.
/// Deterministic in `(n_steps, t_max, seed)`; `n_steps = 0` is an empty
/// realization.
pub fn sample_realization(n_steps: usize, t_max: f64, seed: u64) -> DynamicalWalkRealization {
    DynamicalWalkRealization {
        n_steps,
        t_max,
        seed,
        explicit: None,
    }
}

impl DynamicalWalkRealization {
    pub fn from_timelines(timelines: Vec<RefreshTimeline>, t_max: f64, seed: u64) -> Self {
        Self {
            n_steps: timelines.len(),
            t_max,
            seed,
            explicit: Some(timelines),
        }
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Timeline of step `n` (1-based). Generated on demand unless the
    /// realization carries explicit timelines.
    pub fn timeline(&self, n: usize) -> Result<RefreshTimeline> {
        if n == 0 || n > self.n_steps {
            return Err(Error::IndexOutOfRange {
                index: n,
                max: self.n_steps,
            });
        }
        if let Some(tls) = &self.explicit {
            return Ok(tls[n - 1].clone());
        }
        Ok(generate_timeline(self.seed, n, self.t_max))
    }

    /// Direction of step `n` at time `t`: the value `Y_n^m` for the unique
    /// `m` with `tau_m <= t < tau_{m+1}`.
    pub fn step_at(&self, n: usize, t: f64) -> Result<Direction> {
        self.check_time(t)?;
        Ok(self.timeline(n)?.value_at(t))
    }

    /// Refresh events with `tau` in the half-open window `(window.0, window.1]`
    /// for the inclusive index range, sorted by time with ties broken by
    /// index. Ties have probability zero for generated realizations but can
    /// occur after deserialization.
    pub fn refresh_events(
        &self,
        window: (f64, f64),
        indices: (usize, usize),
    ) -> Result<Vec<RefreshEvent>> {
        let (t0, t1) = window;
        self.check_time(t0)?;
        self.check_time(t1)?;
        if t0 > t1 {
            return Err(Error::TimeOutOfRange {
                t: t1,
                lo: t0,
                hi: self.t_max,
            });
        }
        let (lo, hi) = indices;
        self.check_index_range(lo, hi)?;
        let mut events = Vec::new();
        for n in lo..=hi {
            let tl = self.timeline(n)?;
            for m in 1..tl.times().len() {
                let tau = tl.times()[m];
                if tau > t0 && tau <= t1 {
                    events.push(RefreshEvent {
                        time: tau,
                        index: n,
                        direction: tl.directions()[m],
                    });
                }
            }
        }
        events.sort_by(|a, b| {
            a.time
                .partial_cmp(&b.time)
                .expect("refresh times are finite")
                .then(a.index.cmp(&b.index))
        });
        Ok(events)
    }

    /// The set `I` of indices in the inclusive range with at least one
    /// refresh in `(0, t]`, i.e. those whose time-`t` step is independent
    /// of the time-0 step. Returned sorted.
    pub fn refreshed_indices(&self, indices: (usize, usize), t: f64) -> Result<Vec<usize>> {
        self.check_time(t)?;
        let (lo, hi) = indices;
        self.check_index_range(lo, hi)?;
        let mut out = Vec::new();
        for n in lo..=hi {
            if self.timeline(n)?.refreshed_by(t) {
                out.push(n);
            }
        }
        Ok(out)
    }

    /// Step vector `(X_1(t), ..., X_n(t))` for a prefix of indices; the
    /// bulk accessor event-driven scans start from.
    pub fn steps_at(&self, n: usize, t: f64) -> Result<Vec<Direction>> {
        self.check_time(t)?;
        if n > self.n_steps {
            return Err(Error::IndexOutOfRange {
                index: n,
                max: self.n_steps,
            });
        }
        (1..=n).map(|i| Ok(self.timeline(i)?.value_at(t))).collect()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.t_max).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                lo: 0.0,
                hi: self.t_max,
            });
        }
        Ok(())
    }

    fn check_index_range(&self, lo: usize, hi: usize) -> Result<()> {
        if lo == 0 || hi > self.n_steps || lo > hi {
            return Err(Error::BadRange { lo, hi });
        }
        Ok(())
    }
}

/// Timeline of index `n`: initial direction at tau = 0, then alternating
/// inverse-CDF exponential gaps and fresh directions until `t_max` is
/// passed.
fn generate_timeline(seed: u64, n: usize, t_max: f64) -> RefreshTimeline {
    let mut rng = rng::index_rng(seed, n);
    let mut times = vec![0.0];
    let mut directions = vec![Direction::from_bits(rng.next_u32() as u8)];
    let mut t = 0.0;
    loop {
        let gap = -rng::open01(rng.next_u64()).ln();
        t += gap;
        if t > t_max {
            break;
        }
        times.push(t);
        directions.push(Direction::from_bits(rng.next_u32() as u8));
    }
    RefreshTimeline { times, directions }
}
