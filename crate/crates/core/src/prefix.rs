//! Blocked offset-decomposition of walk prefix sums.
//!
//! Holds `S_1..S_N` of a fixed-time step vector under single-step
//! replacement. Replacing one step shifts every later position by the
//! same delta, so positions are stored per block as local sums plus a
//! per-block offset: an update rebuilds one block and adds the delta to
//! the offsets of the blocks after it, `O(B + N/B)` total. A block knows
//! how many of its positions sit at the origin (one hash lookup keyed by
//! `-offset`), which makes zero-in-range queries cheap and the global
//! zero test `O(1)`.
//!
//! Zero-hitting is the only query shape supported; barrier scans use
//! direct passes elsewhere.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::point::{Direction, LatticePoint, ORIGIN};

#[derive(Clone, Debug)]
struct Block {
    /// 0-based index of the first step in the block; the block covers
    /// positions `n` in `[start+1, start+len]`.
    start: usize,
    len: usize,
    /// `S_start`, the prefix sum just before the block.
    offset: LatticePoint,
    /// `local[j] = S_{start+1+j} - S_start`.
    local: Vec<LatticePoint>,
    /// Multiplicity of each local sum value within the block.
    counts: HashMap<LatticePoint, u32>,
    /// Cached `counts[-offset]`: positions in this block at the origin.
    zeros: u32,
    /// Marked segment this block belongs to.
    segment: u32,
}

impl Block {
    fn recount_zeros(&self) -> u32 {
        self.counts.get(&-self.offset).copied().unwrap_or(0)
    }
}

/// Prefix sums of a step vector with `O(sqrt N)` point updates and fast
/// zero queries.
#[derive(Clone, Debug)]
pub struct PrefixState {
    steps: Vec<Direction>,
    blocks: Vec<Block>,
    block_of: Vec<u32>,
    /// Number of blocks containing at least one origin position.
    zero_blocks: usize,
    /// Origin positions per marked segment.
    segment_zeros: Vec<u64>,
    /// Inclusive 1-based end of each segment.
    segment_ends: Vec<usize>,
    /// Block touches since construction; exposed for cost tests.
    work: u64,
}

impl PrefixState {
    /// Builds with the default block size `ceil(sqrt(N))` and a single
    /// segment covering everything.
    pub fn build(steps: Vec<Direction>) -> Self {
        let b = default_block_size(steps.len());
        Self::with_marks(steps, b, &[])
    }

    pub fn with_block_size(steps: Vec<Direction>, block_size: usize) -> Self {
        Self::with_marks(steps, block_size, &[])
    }

    /// Builds with blocks cut at the given strictly increasing 1-based
    /// marks, so no block straddles a mark. Segment 0 is `[1, marks[0]]`,
    /// segment `j` is `(marks[j-1], marks[j]]`, plus a trailing segment if
    /// the last mark falls short of `N`. Per-segment origin counts are
    /// maintained incrementally.
    pub fn with_marks(steps: Vec<Direction>, block_size: usize, marks: &[usize]) -> Self {
        let n = steps.len();
        let block_size = block_size.max(1);
        debug_assert!(marks.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(marks.iter().all(|&m| m >= 1 && m <= n));

        let mut segment_ends: Vec<usize> = marks.to_vec();
        if segment_ends.last().copied().unwrap_or(0) < n {
            segment_ends.push(n);
        }
        if n == 0 {
            segment_ends.clear();
        }

        let mut blocks = Vec::new();
        let mut block_of = vec![0u32; n];
        let mut start = 0usize; // 0-based step index
        for (seg, &end) in segment_ends.iter().enumerate() {
            while start < end {
                let len = block_size.min(end - start);
                block_of[start..start + len].fill(blocks.len() as u32);
                blocks.push(Block {
                    start,
                    len,
                    offset: ORIGIN,
                    local: Vec::new(),
                    counts: HashMap::new(),
                    zeros: 0,
                    segment: seg as u32,
                });
                start += len;
            }
        }

        let mut state = Self {
            steps,
            blocks,
            block_of,
            zero_blocks: 0,
            segment_zeros: vec![0; segment_ends.len()],
            segment_ends,
            work: 0,
        };
        let mut offset = ORIGIN;
        for b in 0..state.blocks.len() {
            state.blocks[b].offset = offset;
            state.rebuild_block(b);
            let blk = &state.blocks[b];
            offset = blk.offset + blk.local[blk.len - 1];
        }
        state
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn step(&self, i: usize) -> Result<Direction> {
        self.check_index(i)?;
        Ok(self.steps[i - 1])
    }

    pub fn steps(&self) -> &[Direction] {
        &self.steps
    }

    /// `S_n`; `n = 0` is the origin.
    pub fn position(&self, n: usize) -> Result<LatticePoint> {
        if n == 0 {
            return Ok(ORIGIN);
        }
        self.check_index(n)?;
        let blk = &self.blocks[self.block_of[n - 1] as usize];
        Ok(blk.offset + blk.local[n - 1 - blk.start])
    }

    /// Replaces step `i`; every position `n >= i` shifts by `new - old`.
    pub fn point_update(&mut self, i: usize, new: Direction) -> Result<()> {
        self.check_index(i)?;
        let old = self.steps[i - 1];
        if old == new {
            return Ok(());
        }
        self.steps[i - 1] = new;
        let delta = new.offset() - old.offset();
        let b = self.block_of[i - 1] as usize;
        self.rebuild_block(b);
        for b2 in b + 1..self.blocks.len() {
            self.work += 1;
            let blk = &mut self.blocks[b2];
            let before = blk.zeros;
            blk.offset += delta;
            blk.zeros = blk.recount_zeros();
            let after = blk.zeros;
            let seg = blk.segment;
            self.apply_zero_change(seg, before, after);
        }
        Ok(())
    }

    /// True iff `S_n` is the origin for some `n` in the inclusive range
    /// `[a, b]`. Interior blocks answer by their cached origin count;
    /// boundary blocks are scanned directly.
    pub fn has_zero_in(&self, a: usize, b: usize) -> Result<bool> {
        if a == 0 || b > self.len() || a > b {
            return Err(Error::BadRange { lo: a, hi: b });
        }
        let first = self.block_of[a - 1] as usize;
        let last = self.block_of[b - 1] as usize;
        for bi in first..=last {
            let blk = &self.blocks[bi];
            let covered = blk.start + 1 >= a && blk.start + blk.len <= b;
            if covered {
                if blk.zeros > 0 {
                    return Ok(true);
                }
            } else {
                let lo = a.max(blk.start + 1);
                let hi = b.min(blk.start + blk.len);
                let target = -blk.offset;
                for n in lo..=hi {
                    if blk.local[n - 1 - blk.start] == target {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    /// True iff some `S_n`, `n` in `[1, N]`, is the origin. `O(1)`.
    pub fn has_zero_anywhere(&self) -> bool {
        self.zero_blocks > 0
    }

    /// Number of origin positions in marked segment `seg`.
    pub fn segment_zero_count(&self, seg: usize) -> u64 {
        self.segment_zeros[seg]
    }

    pub fn segment_count(&self) -> usize {
        self.segment_ends.len()
    }

    /// Number of blocks currently holding an origin position; equals the
    /// count recomputed from scratch (checked by the coherence tests).
    pub fn zero_block_count(&self) -> usize {
        self.zero_blocks
    }

    /// Blocks touched by updates since construction (or the last reset).
    pub fn work_counter(&self) -> u64 {
        self.work
    }

    pub fn reset_work_counter(&mut self) {
        self.work = 0;
    }

    fn rebuild_block(&mut self, b: usize) {
        let blk = &mut self.blocks[b];
        self.work += blk.len as u64;
        let before = blk.zeros;
        blk.local.clear();
        blk.counts.clear();
        let mut sum = ORIGIN;
        for j in 0..blk.len {
            sum += self.steps[blk.start + j].offset();
            blk.local.push(sum);
            *blk.counts.entry(sum).or_insert(0) += 1;
        }
        blk.zeros = blk.recount_zeros();
        let (after, seg) = (blk.zeros, blk.segment);
        self.apply_zero_change(seg, before, after);
    }

    fn apply_zero_change(&mut self, seg: u32, before: u32, after: u32) {
        if before == after {
            return;
        }
        match (before > 0, after > 0) {
            (false, true) => self.zero_blocks += 1,
            (true, false) => self.zero_blocks -= 1,
            _ => {}
        }
        let cell = &mut self.segment_zeros[seg as usize];
        *cell = (*cell + after as u64) - before as u64;
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: self.len(),
            });
        }
        Ok(())
    }
}

pub fn default_block_size(n: usize) -> usize {
    (n as f64).sqrt().ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SampleDraws;

    fn dirs(s: &str) -> Vec<Direction> {
        s.chars()
            .map(|c| match c {
                'E' => Direction::East,
                'W' => Direction::West,
                'N' => Direction::North,
                'S' => Direction::South,
                _ => panic!("bad direction char {c}"),
            })
            .collect()
    }

    /// Naive mirror used as the oracle throughout.
    struct Naive {
        steps: Vec<Direction>,
    }

    impl Naive {
        fn position(&self, n: usize) -> LatticePoint {
            self.steps[..n]
                .iter()
                .fold(ORIGIN, |acc, d| acc + d.offset())
        }
        fn has_zero_in(&self, a: usize, b: usize) -> bool {
            let mut sum = self.position(a - 1);
            for i in a..=b {
                sum += self.steps[i - 1].offset();
                if sum.is_origin() {
                    return true;
                }
            }
            false
        }
        fn zero_blocks(&self, state: &PrefixState) -> usize {
            state
                .blocks
                .iter()
                .filter(|blk| {
                    (blk.start + 1..=blk.start + blk.len)
                        .any(|n| self.position(n).is_origin())
                })
                .count()
        }
    }

    #[test]
    fn two_step_hand_cases() {
        let s = PrefixState::build(dirs("EW"));
        assert_eq!(s.position(1).unwrap(), LatticePoint::new(1, 0));
        assert_eq!(s.position(2).unwrap(), ORIGIN);
        assert!(s.has_zero_in(1, 2).unwrap());
        assert!(!s.has_zero_in(1, 1).unwrap());
        assert!(s.has_zero_anywhere());

        let mut s = PrefixState::build(dirs("EW"));
        s.point_update(2, Direction::North).unwrap();
        assert_eq!(s.position(2).unwrap(), LatticePoint::new(1, 1));
        assert!(!s.has_zero_anywhere());
    }

    #[test]
    fn empty_and_degenerate() {
        let s = PrefixState::build(Vec::new());
        assert_eq!(s.len(), 0);
        assert!(!s.has_zero_anywhere());
        assert_eq!(s.position(0).unwrap(), ORIGIN);
        assert!(s.position(1).is_err());

        let s = PrefixState::build(dirs("EWNS"));
        assert!(s.has_zero_in(3, 2).is_err(), "inverted range must error");
        assert!(s.has_zero_in(0, 2).is_err());
        assert!(s.has_zero_in(1, 5).is_err());
    }

    #[test]
    fn all_east_walk_never_returns() {
        let s = PrefixState::build(vec![Direction::East; 100]);
        assert!(!s.has_zero_anywhere());
        for (a, b) in [(1, 100), (5, 17), (99, 100)] {
            assert!(!s.has_zero_in(a, b).unwrap());
        }
    }

    #[test]
    fn positions_path_example() {
        let s = PrefixState::build(dirs("NNE"));
        assert_eq!(s.position(3).unwrap(), LatticePoint::new(1, 2));
        assert_eq!(s.position(0).unwrap(), ORIGIN);
    }

    #[test]
    fn update_to_same_value_is_identity() {
        let mut s = PrefixState::build(dirs("ENWS"));
        let before: Vec<_> = (0..=4).map(|n| s.position(n).unwrap()).collect();
        s.point_update(3, Direction::West).unwrap();
        let after: Vec<_> = (0..=4).map(|n| s.position(n).unwrap()).collect();
        assert_eq!(before, after);
    }

    fn random_steps(draws: &SampleDraws, len: usize, salt: u64) -> Vec<Direction> {
        (0..len)
            .map(|i| draws.direction(salt.wrapping_mul(1 << 20).wrapping_add(i as u64)))
            .collect()
    }

    #[test]
    fn randomized_builds_match_naive_positions() {
        let draws = SampleDraws::new(2024, 11, 0);
        for case in 0..200u64 {
            let len = 1 + (draws.raw(case) % 300) as usize;
            let steps = random_steps(&draws, len, case + 1000);
            let state = PrefixState::build(steps.clone());
            let naive = Naive { steps };
            for n in 0..=len {
                assert_eq!(state.position(n).unwrap(), naive.position(n));
            }
        }
    }

    #[test]
    fn randomized_update_sequences_match_naive() {
        let draws = SampleDraws::new(99, 12, 0);
        let mut ctr = 0u64;
        let mut next = || {
            ctr += 1;
            draws.raw(ctr)
        };
        for _case in 0..50 {
            let len = 2 + (next() % 257) as usize;
            let steps = random_steps(&draws, len, next());
            let mut state = PrefixState::with_block_size(steps.clone(), 1 + (next() % 40) as usize);
            let mut naive = Naive { steps };
            for _op in 0..400 {
                match next() % 3 {
                    0 => {
                        let i = 1 + (next() as usize % len);
                        let d = Direction::from_bits(next() as u8);
                        state.point_update(i, d).unwrap();
                        naive.steps[i - 1] = d;
                    }
                    1 => {
                        let a = 1 + (next() as usize % len);
                        let b = a + (next() as usize % (len - a + 1));
                        assert_eq!(
                            state.has_zero_in(a, b).unwrap(),
                            naive.has_zero_in(a, b),
                            "range [{a},{b}]"
                        );
                    }
                    _ => {
                        let n = next() as usize % (len + 1);
                        assert_eq!(state.position(n).unwrap(), naive.position(n));
                    }
                }
                assert_eq!(
                    state.has_zero_anywhere(),
                    naive.has_zero_in(1, len),
                    "global zero flag diverged"
                );
            }
        }
    }

    #[test]
    fn zero_block_counter_coherent_after_updates() {
        let draws = SampleDraws::new(5, 13, 0);
        let len = 200;
        let steps = random_steps(&draws, len, 1);
        let mut state = PrefixState::with_block_size(steps.clone(), 9);
        let mut naive = Naive { steps };
        for op in 0..500u64 {
            let i = 1 + (draws.raw(op * 2) as usize % len);
            let d = Direction::from_bits(draws.raw(op * 2 + 1) as u8);
            state.point_update(i, d).unwrap();
            naive.steps[i - 1] = d;
            assert_eq!(state.zero_block_count(), naive.zero_blocks(&state));
        }
    }

    #[test]
    fn segment_zero_counts_match_direct_scans() {
        let draws = SampleDraws::new(31, 14, 0);
        let len = 64;
        let marks = [1usize, 4, 16, 64];
        let steps = random_steps(&draws, len, 3);
        let mut state = PrefixState::with_marks(steps.clone(), 4, &marks);
        let mut naive = Naive { steps };
        let check = |state: &PrefixState, naive: &Naive| {
            let bounds = [(1, 1), (2, 4), (5, 16), (17, 64)];
            for (seg, &(a, b)) in bounds.iter().enumerate() {
                let direct = (a..=b).filter(|&n| naive.position(n).is_origin()).count() as u64;
                assert_eq!(state.segment_zero_count(seg), direct, "segment {seg}");
            }
        };
        check(&state, &naive);
        for op in 0..300u64 {
            let i = 1 + (draws.raw(op * 2 + 100) as usize % len);
            let d = Direction::from_bits(draws.raw(op * 2 + 101) as u8);
            state.point_update(i, d).unwrap();
            naive.steps[i - 1] = d;
            check(&state, &naive);
        }
    }

    #[test]
    fn update_work_scales_like_sqrt_n() {
        // Instrumented block touches per update at N = 2^10, 2^14, 2^18:
        // with B = ceil(sqrt N) each 16x in N should multiply per-update
        // work by about 4 (allow generous slack, not wall-clock).
        let mut per_update = Vec::new();
        for exp in [10u32, 14, 18] {
            let n = 1usize << exp;
            let draws = SampleDraws::new(exp as u64, 15, 0);
            let steps = random_steps(&draws, n, 7);
            let mut state = PrefixState::build(steps);
            state.reset_work_counter();
            let updates = 200u64;
            for op in 0..updates {
                let i = 1 + (draws.raw(op * 2) as usize % n);
                let d = Direction::from_bits(draws.raw(op * 2 + 1) as u8);
                state.point_update(i, d).unwrap();
            }
            per_update.push(state.work_counter() as f64 / updates as f64);
        }
        for w in per_update.windows(2) {
            let ratio = w[1] / w[0];
            assert!(
                ratio > 2.0 && ratio < 8.0,
                "work ratio {ratio} outside sqrt scaling band, {per_update:?}"
            );
        }
    }
}
