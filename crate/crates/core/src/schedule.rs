//! Stopping-time / annulus hierarchies.
//!
//! A schedule fixes stopping indices `s_0 = 1 < s_1 < ... < s_M` and, per
//! level `k`, a closed annulus `r_k <= |x| <= R_k` the walk must occupy at
//! step `s_k`. Three families:
//!
//! * `paper(M)`: `s_k = k^10 * 2^(2k^2)`, annuli `[2^(k^2), k^10 * 2^(k^2)]`.
//!   Astronomically large beyond `M = 2`; overflow of the step-index type
//!   is an explicit error.
//! * `desk(M, rho, lambda)`: geometric `s_k = ceil(rho^k)` with annuli
//!   `[ceil(sqrt(s_k)/lambda), ceil(sqrt(s_k)*lambda)]`, preserving the
//!   geometric structure `sqrt(s_(k-1)) << r_k <= R_k ~ sqrt(s_k)` at
//!   sizes a desk run can simulate.
//! * `quadratic(M, c, lambda)`: `log2 s_k = 2*c*k^2`, a scaled-down
//!   rendition of the quadratic-exponent shape for trend experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::LatticePoint;

/// Closed Euclidean annulus `inner <= |x| <= outer`. Membership compares
/// squared norms so integer-radius boundaries are exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

impl Annulus {
    pub fn contains(&self, p: LatticePoint) -> bool {
        let d2 = p.norm_sq() as f64;
        self.inner * self.inner <= d2 && d2 <= self.outer * self.outer
    }
}

/// Stopping times and annuli for levels `1..=M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// `s[k]` for `k = 0..=M`; `s[0] = 1`, strictly increasing.
    s: Vec<u64>,
    /// Annulus of level `k` at `annuli[k-1]`.
    annuli: Vec<Annulus>,
}

impl Schedule {
    /// `s_k = k^10 * 2^(2k^2)`, `r_k = 2^(k^2)`, `R_k = k^10 * 2^(k^2)`.
    pub fn paper(levels: usize) -> Result<Self> {
        let mut s = vec![1u64];
        let mut annuli = Vec::new();
        for k in 1..=levels {
            let k_u = k as u64;
            let s_k = k_u
                .checked_pow(10)
                .and_then(|a| {
                    let bits = 2 * (k as u32) * (k as u32);
                    if bits >= 64 {
                        None
                    } else {
                        a.checked_mul(1u64 << bits)
                    }
                })
                .ok_or(Error::ScheduleOverflow { level: k })?;
            s.push(s_k);
            let r = 2f64.powi((k * k) as i32);
            let big_r = (k as f64).powi(10) * r;
            annuli.push(Annulus {
                inner: r,
                outer: big_r,
            });
        }
        Self::from_parts(s, annuli)
    }

    /// Geometric desk schedule: `s_k = ceil(rho^k)`, annuli
    /// `[ceil(sqrt(s_k)/lambda), ceil(sqrt(s_k)*lambda)]`.
    pub fn desk(levels: usize, rho: f64, lambda: f64) -> Result<Self> {
        if !(rho >= 2.0) {
            return Err(Error::BadParameter {
                name: "rho",
                value: rho,
                constraint: "growth ratio >= 2",
            });
        }
        if !(lambda >= 1.0) {
            return Err(Error::BadParameter {
                name: "lambda",
                value: lambda,
                constraint: "annulus width >= 1",
            });
        }
        let mut s = vec![1u64];
        let mut annuli = Vec::new();
        for k in 1..=levels {
            let s_k = rho.powi(k as i32).ceil();
            if s_k >= u64::MAX as f64 {
                return Err(Error::ScheduleOverflow { level: k });
            }
            let s_k = s_k as u64;
            s.push(s_k);
            let root = (s_k as f64).sqrt();
            annuli.push(Annulus {
                inner: (root / lambda).ceil(),
                outer: (root * lambda).ceil(),
            });
        }
        Self::from_parts(s, annuli)
    }

    /// Quadratic-exponent schedule: `s_k = ceil(2^(2ck^2))`, annuli
    /// `[2^(ck^2)/lambda, 2^(ck^2)*lambda]`. With `c = 1/4` the annulus
    /// radii grow as `2^(k^2/4)`; smaller `c` scales the same shape down
    /// to desk-size step counts.
    pub fn quadratic(levels: usize, c: f64, lambda: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::BadParameter {
                name: "c",
                value: c,
                constraint: "exponent coefficient > 0",
            });
        }
        if !(lambda >= 1.0) {
            return Err(Error::BadParameter {
                name: "lambda",
                value: lambda,
                constraint: "annulus width >= 1",
            });
        }
        let mut s = vec![1u64];
        let mut annuli = Vec::new();
        for k in 1..=levels {
            let log2_s = 2.0 * c * (k * k) as f64;
            if log2_s >= 63.0 {
                return Err(Error::ScheduleOverflow { level: k });
            }
            // Small c collapses the first few levels under ceil; lift
            // them minimally so stopping times stay strictly increasing.
            let s_k = ((2f64.powf(log2_s)).ceil() as u64).max(s.last().unwrap() + 1);
            s.push(s_k);
            let root = 2f64.powf(c * (k * k) as f64);
            annuli.push(Annulus {
                inner: (root / lambda).max(1.0),
                outer: (root * lambda).max(1.0),
            });
        }
        Self::from_parts(s, annuli)
    }

    /// Explicit stopping times (including `s_0`) and per-level annuli.
    pub fn from_parts(s: Vec<u64>, annuli: Vec<Annulus>) -> Result<Self> {
        if s.is_empty() || s[0] != 1 {
            return Err(Error::BadSchedule {
                reason: "stopping times must start at s_0 = 1".into(),
            });
        }
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadSchedule {
                reason: "stopping times must be strictly increasing".into(),
            });
        }
        if annuli.len() + 1 != s.len() {
            return Err(Error::BadSchedule {
                reason: format!(
                    "{} stopping times need {} annuli, got {}",
                    s.len(),
                    s.len() - 1,
                    annuli.len()
                ),
            });
        }
        for (i, a) in annuli.iter().enumerate() {
            if !(a.inner > 0.0 && a.inner <= a.outer) {
                return Err(Error::BadSchedule {
                    reason: format!("annulus {} violates 0 < r <= R", i + 1),
                });
            }
        }
        Ok(Self { s, annuli })
    }

    /// Number of levels `M`.
    pub fn levels(&self) -> usize {
        self.annuli.len()
    }

    /// `s_k` for `k = 0..=M`.
    pub fn stop(&self, k: usize) -> u64 {
        self.s[k]
    }

    pub fn stops(&self) -> &[u64] {
        &self.s
    }

    /// Largest stopping index `s_M`.
    pub fn max_stop(&self) -> u64 {
        *self.s.last().unwrap()
    }

    pub fn annulus(&self, k: usize) -> Result<Annulus> {
        if k == 0 || k > self.levels() {
            return Err(Error::LevelOutOfRange {
                k,
                max: self.levels(),
            });
        }
        Ok(self.annuli[k - 1])
    }

    /// Restriction to the first `m` levels.
    pub fn truncate(&self, m: usize) -> Result<Schedule> {
        if m > self.levels() {
            return Err(Error::LevelOutOfRange {
                k: m,
                max: self.levels(),
            });
        }
        Ok(Schedule {
            s: self.s[..=m].to_vec(),
            annuli: self.annuli[..m].to_vec(),
        })
    }

    /// Inclusive return window `[s_(k-1), s_k]` of level `k`.
    pub fn window(&self, k: usize) -> Result<(u64, u64)> {
        if k == 0 || k > self.levels() {
            return Err(Error::LevelOutOfRange {
                k,
                max: self.levels(),
            });
        }
        Ok((self.s[k - 1], self.s[k]))
    }
}

/// The level index `K(t)`: the unique integer in
/// `[|log2 t|, 1 + |log2 t|)` for `t < 1`, and `0` for `t >= 1`.
/// Levels above `K(t)` are the ones whose refresh decorrelation has had
/// time to act.
pub fn level_of_time(t: f64) -> Result<u64> {
    if !(t > 0.0) {
        return Err(Error::BadParameter {
            name: "t",
            value: t,
            constraint: "time > 0",
        });
    }
    if t >= 1.0 {
        return Ok(0);
    }
    Ok((-t.log2()).ceil() as u64)
}
