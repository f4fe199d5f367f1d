//! Return / annulus / barrier events at a fixed time, and the exact
//! event-driven scan of the good-time set across a whole interval.

use crate::analysis::log_barrier;
use crate::error::{Error, Result};
use crate::indicator::PiecewiseIndicator;
use crate::point::{Direction, ORIGIN};
use crate::prefix::{default_block_size, PrefixState};
use crate::process::DynamicalWalkRealization;
use crate::schedule::Schedule;

fn check_level(sched: &Schedule, k: usize) -> Result<()> {
    if k == 0 || k > sched.levels() {
        return Err(Error::LevelOutOfRange {
            k,
            max: sched.levels(),
        });
    }
    Ok(())
}

fn check_len(state: &PrefixState, sched: &Schedule, k: usize) -> Result<()> {
    let needed = sched.stop(k);
    if (state.len() as u64) < needed {
        return Err(Error::StateTooShort {
            len: state.len(),
            k,
            needed,
        });
    }
    Ok(())
}

/// Return event of level `k`: some `n` in the inclusive window
/// `[s_(k-1), s_k]` has `S_n` at the origin. Consecutive levels share the
/// endpoint index `s_k`.
pub fn event_r_k(state: &PrefixState, sched: &Schedule, k: usize) -> Result<bool> {
    check_level(sched, k)?;
    check_len(state, sched, k)?;
    let (a, b) = sched.window(k)?;
    state.has_zero_in(a as usize, b as usize)
}

/// Annulus event of level `k`: the walk sits in the closed annulus `A_k`
/// at step `s_k`.
pub fn event_g_k(state: &PrefixState, sched: &Schedule, k: usize) -> Result<bool> {
    check_level(sched, k)?;
    check_len(state, sched, k)?;
    let p = state.position(sched.stop(k) as usize)?;
    Ok(sched.annulus(k)?.contains(p))
}

/// The good event up to level `M`: every annulus event holds and no
/// return event does. Vacuously true for `M = 0`.
pub fn event_e_m(state: &PrefixState, sched: &Schedule) -> Result<bool> {
    if sched.levels() > 0 {
        check_len(state, sched, sched.levels())?;
    }
    for k in 1..=sched.levels() {
        if event_r_k(state, sched, k)? || !event_g_k(state, sched, k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Barrier-strengthened return event: some `n` in `[s_(k-1), s_k]` has
/// `|S_n| < n^(0.5 - 1/(log2 n)^(0.25 + eps))`. Direct scan of the step
/// vector.
pub fn event_r_eps_k(
    steps: &[Direction],
    sched: &Schedule,
    k: usize,
    eps: f64,
) -> Result<bool> {
    check_level(sched, k)?;
    if !(eps > 0.0) {
        return Err(Error::BadParameter {
            name: "eps",
            value: eps,
            constraint: "eps > 0",
        });
    }
    let (a, b) = sched.window(k)?;
    if (steps.len() as u64) < b {
        return Err(Error::StateTooShort {
            len: steps.len(),
            k,
            needed: b,
        });
    }
    let mut pos = ORIGIN;
    for (i, d) in steps.iter().enumerate().take(b as usize) {
        pos += d.offset();
        let n = (i + 1) as u64;
        if n >= a && pos.norm() < log_barrier(n, eps) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Fast `O(M)` re-evaluation of the good event on a state built with the
/// schedule's stopping times as block marks: segment `k` counts origin
/// hits in `(s_(k-1), s_k]`, and the shared left endpoint `s_(k-1)` is an
/// `O(1)` position probe.
fn event_e_m_marked(state: &PrefixState, sched: &Schedule) -> bool {
    for k in 1..=sched.levels() {
        if state.segment_zero_count(k) > 0 {
            return false;
        }
        let left = state
            .position(sched.stop(k - 1) as usize)
            .expect("marked state covers the schedule");
        if left.is_origin() {
            return false;
        }
        let at_stop = state
            .position(sched.stop(k) as usize)
            .expect("marked state covers the schedule");
        if !sched
            .annulus(k)
            .expect("level within schedule")
            .contains(at_stop)
        {
            return false;
        }
    }
    true
}

/// Exact truth set of the good event over `window`: builds the prefix
/// state at the window start, replays refresh events in time order, and
/// re-evaluates in `O(M)` per event. Interval endpoints other than the
/// window ends are bit-exact refresh times, and `measure()` of the result
/// is the exact Lebesgue measure of the level-`M` good-time set in the
/// window.
pub fn scan_e_m(
    r: &DynamicalWalkRealization,
    sched: &Schedule,
    window: (f64, f64),
) -> Result<PiecewiseIndicator> {
    let n = sched.max_stop();
    if n > r.n_steps() as u64 {
        return Err(Error::StateTooShort {
            len: r.n_steps(),
            k: sched.levels(),
            needed: n,
        });
    }
    let n = n as usize;
    let steps = r.steps_at(n, window.0)?;
    let marks: Vec<usize> = sched.stops().iter().map(|&s| s as usize).collect();
    let mut state = PrefixState::with_marks(steps, default_block_size(n), &marks);

    let mut ind = PiecewiseIndicator::empty(window);
    let mut holding = event_e_m_marked(&state, sched);
    let mut since = window.0;
    for e in r.refresh_events(window, (1, n))? {
        state.point_update(e.index, e.direction)?;
        let now = event_e_m_marked(&state, sched);
        if now != holding {
            if holding {
                ind.push(since, e.time);
            } else {
                since = e.time;
            }
            holding = now;
        }
    }
    if holding {
        ind.push(since, window.1);
    }
    Ok(ind)
}
