//! Exact hitting probabilities on the lattice ball.
//!
//! Solves the discrete Dirichlet problem on `{y : |y| < n}`:
//! `h(origin) = 1`, `h = 0` on `{|y| >= n}`, and `h` harmonic (the mean
//! of its four neighbors) everywhere else. `h(x)` is the probability
//! that simple random walk from `x` returns to the origin before exiting
//! the ball of radius `n`.
//!
//! Two backends behind one interface: a banded Cholesky factorization of
//! the 5-point system for balls below 1e5 unknowns, and a geometric
//! multigrid iteration with a certified terminal residual above that.
//! Either way the result is checked against the residual target before
//! it is returned.

use crate::error::{Error, Result};
use crate::point::LatticePoint;

/// Max per-equation residual `|h - mean(neighbors)|` accepted from a
/// solve.
pub const RESIDUAL_TARGET: f64 = 1e-10;

/// Unknown-count threshold between the direct and iterative backends.
const DIRECT_LIMIT: usize = 100_000;

/// Solved hitting-probability field for one ball radius.
pub struct DirichletField {
    n: i64,
    side: usize,
    center: usize,
    /// Row-major over the covering square; 0 outside the ball.
    values: Vec<f64>,
    residual: f64,
}

impl DirichletField {
    /// Solves the ball of radius `n >= 1`.
    pub fn solve(n: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::BadParameter {
                name: "n",
                value: n as f64,
                constraint: "ball radius >= 1",
            });
        }
        let unknowns = count_interior(n) - 1;
        let mut field = if unknowns <= DIRECT_LIMIT {
            solve_direct(n)?
        } else {
            solve_multigrid(n)?
        };
        field.residual = field.max_harmonicity_residual();
        if field.residual > RESIDUAL_TARGET {
            return Err(Error::ResidualNotCertified {
                achieved: field.residual,
                target: RESIDUAL_TARGET,
            });
        }
        Ok(field)
    }

    pub fn radius(&self) -> i64 {
        self.n
    }

    /// Certified max harmonicity residual of the returned field.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `h(x)`; requires `0 < |x| < n`.
    pub fn value(&self, x: LatticePoint) -> Result<f64> {
        if x.is_origin() || x.norm_sq() >= self.n * self.n {
            return Err(Error::BadHittingStart { x, n: self.n });
        }
        Ok(self.raw(x))
    }

    fn raw(&self, p: LatticePoint) -> f64 {
        if p.norm_sq() >= self.n * self.n {
            return 0.0;
        }
        let i = (p.y + self.center as i64) as usize;
        let j = (p.x + self.center as i64) as usize;
        self.values[i * self.side + j]
    }

    /// Max `|h - mean(neighbors)|` over interior non-origin points.
    pub fn max_harmonicity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let n2 = self.n * self.n;
        for y in -(self.n - 1)..=(self.n - 1) {
            for x in -(self.n - 1)..=(self.n - 1) {
                let p = LatticePoint::new(x, y);
                if p.norm_sq() >= n2 || p.is_origin() {
                    continue;
                }
                let avg = 0.25
                    * (self.raw(LatticePoint::new(x + 1, y))
                        + self.raw(LatticePoint::new(x - 1, y))
                        + self.raw(LatticePoint::new(x, y + 1))
                        + self.raw(LatticePoint::new(x, y - 1)));
                worst = worst.max((self.raw(p) - avg).abs());
            }
        }
        worst
    }
}

/// Probability that the walk from `x` returns to the origin before
/// exiting the ball of radius `n`; one full-field solve per call, so
/// batch queries through [`DirichletField`] when several points share a
/// radius.
pub fn hitting_prob_exact(n: i64, x: LatticePoint) -> Result<f64> {
    if x.is_origin() || x.norm_sq() >= n * n {
        return Err(Error::BadHittingStart { x, n });
    }
    DirichletField::solve(n)?.value(x)
}

fn count_interior(n: i64) -> usize {
    let mut count = 0usize;
    for y in -(n - 1)..=(n - 1) {
        for x in -(n - 1)..=(n - 1) {
            if x * x + y * y < n * n {
                count += 1;
            }
        }
    }
    count
}

// ---------------------------------------------------------------------
// Direct backend: banded Cholesky on 4h(p) - sum h(q) = [q hits origin].
// ---------------------------------------------------------------------

fn solve_direct(n: i64) -> Result<DirichletField> {
    let side = (2 * n + 1) as usize;
    let center = n as usize;
    let n2 = n * n;

    // Row-major ids over interior non-origin points.
    let mut id = vec![usize::MAX; side * side];
    let mut coords = Vec::new();
    for y in -(n - 1)..=(n - 1) {
        for x in -(n - 1)..=(n - 1) {
            if x * x + y * y < n2 && !(x == 0 && y == 0) {
                id[((y + n) as usize) * side + (x + n) as usize] = coords.len();
                coords.push((x, y));
            }
        }
    }
    let m = coords.len();

    // Bandwidth: max id distance between lattice neighbors.
    let mut bw = 0usize;
    let neighbor_ids = |x: i64, y: i64, id: &[usize]| -> [Option<usize>; 4] {
        let mut out = [None; 4];
        for (slot, (dx, dy)) in [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().enumerate() {
            let (qx, qy) = (x + dx, y + dy);
            if qx * qx + qy * qy < n2 && !(qx == 0 && qy == 0) {
                out[slot] = Some(id[((qy + n) as usize) * side + (qx + n) as usize]);
            }
        }
        out
    };
    for (i, &(x, y)) in coords.iter().enumerate() {
        for q in neighbor_ids(x, y, &id).into_iter().flatten() {
            bw = bw.max(i.abs_diff(q));
        }
    }

    // Lower-band storage: ab[i][d] = A[i][i - bw + d] for d in 0..=bw.
    let w = bw + 1;
    let mut ab = vec![0.0f64; m * w];
    let mut rhs = vec![0.0f64; m];
    for (i, &(x, y)) in coords.iter().enumerate() {
        ab[i * w + bw] = 4.0;
        for (slot, (dx, dy)) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)].iter().enumerate() {
            let (qx, qy) = (x + dx, y + dy);
            if qx == 0 && qy == 0 {
                rhs[i] += 1.0; // pinned origin value
            } else if let Some(q) = neighbor_ids(x, y, &id)[slot] {
                if q < i {
                    ab[i * w + (bw - (i - q))] = -1.0;
                }
            }
        }
    }

    band_cholesky(&mut ab, m, bw)?;
    band_solve(&ab, m, bw, &mut rhs);

    let mut values = vec![0.0f64; side * side];
    values[center * side + center] = 1.0;
    for (i, &(x, y)) in coords.iter().enumerate() {
        values[((y + n) as usize) * side + (x + n) as usize] = rhs[i];
    }
    Ok(DirichletField {
        n,
        side,
        center,
        values,
        residual: f64::NAN,
    })
}

/// In-place banded Cholesky: on return `ab` holds `L` in the same layout.
fn band_cholesky(ab: &mut [f64], m: usize, bw: usize) -> Result<()> {
    let w = bw + 1;
    for j in 0..m {
        let start = j.saturating_sub(bw);
        let mut diag = ab[j * w + bw];
        for k in start..j {
            let l_jk = ab[j * w + (bw - (j - k))];
            diag -= l_jk * l_jk;
        }
        if diag <= 0.0 {
            return Err(Error::ResidualNotCertified {
                achieved: f64::INFINITY,
                target: RESIDUAL_TARGET,
            });
        }
        let l_jj = diag.sqrt();
        ab[j * w + bw] = l_jj;
        let i_end = (j + bw).min(m - 1);
        for i in j + 1..=i_end {
            let mut a_ij = ab[i * w + (bw - (i - j))];
            let k_start = start.max(i.saturating_sub(bw));
            for k in k_start..j {
                a_ij -= ab[i * w + (bw - (i - k))] * ab[j * w + (bw - (j - k))];
            }
            ab[i * w + (bw - (i - j))] = a_ij / l_jj;
        }
    }
    Ok(())
}

/// Solves `L L^T x = b` in place.
fn band_solve(ab: &[f64], m: usize, bw: usize, b: &mut [f64]) {
    let w = bw + 1;
    for i in 0..m {
        let mut v = b[i];
        for k in i.saturating_sub(bw)..i {
            v -= ab[i * w + (bw - (i - k))] * b[k];
        }
        b[i] = v / ab[i * w + bw];
    }
    for i in (0..m).rev() {
        let mut v = b[i];
        let j_end = (i + bw).min(m - 1);
        for j in i + 1..=j_end {
            v -= ab[j * w + (bw - (j - i))] * b[j];
        }
        b[i] = v / ab[i * w + bw];
    }
}

// ---------------------------------------------------------------------
// Iterative backend: geometric multigrid with certified terminal
// residual. Grid padded to a 2^k + 1 square so vertex coarsening stays
// aligned; all non-free points (outside the ball, the pinned origin,
// padding) read as zero in the correction equations.
// ---------------------------------------------------------------------

struct Level {
    side: usize,
    /// 1 for points carrying an unknown.
    free: Vec<u8>,
    /// Contiguous free runs `(row, j_lo, j_hi)` inclusive; the origin row
    /// is split around the pin, so runs carry no interior holes and the
    /// smoother needs no mask loads.
    spans: Vec<(u32, u32, u32)>,
    /// Free points adjacent to a frozen one (plus one dilation ring);
    /// extra relaxation here restores the multigrid rate the staircase
    /// boundary would otherwise spoil.
    band: Vec<u32>,
    u: Vec<f64>,
    b: Vec<f64>,
}

/// Extra boundary-band Gauss-Seidel passes per smoothing call.
const BAND_SWEEPS: usize = 6;

fn solve_multigrid(n: i64) -> Result<DirichletField> {
    let min_side = (2 * n + 1) as usize;
    let mut k = 2u32;
    while (1usize << k) + 1 < min_side {
        k += 1;
    }

    let mut levels = Vec::new();
    let mut lk = k;
    loop {
        let side = (1usize << lk) + 1;
        levels.push(build_level(n, side, 1i64 << (k - lk)));
        if side <= 5 || lk == 2 {
            break;
        }
        lk -= 1;
    }

    // Full-multigrid start: solve each level's own pinned-origin problem
    // coarsest-first, carrying the interpolant up as the initial guess.
    // A v-cycle only writes the rhs of levels below the one it starts
    // at, so each level's origin rhs survives its own solve.
    for l in (0..levels.len()).rev() {
        set_origin_rhs(&mut levels[l]);
        if l + 1 < levels.len() {
            let (fine_slice, coarse_slice) = levels.split_at_mut(l + 1);
            prolong(&mut fine_slice[l], &coarse_slice[0], true);
        }
        if l > 0 {
            v_cycle(&mut levels[l..], 0);
            v_cycle(&mut levels[l..], 0);
        }
    }

    let max_cycles = 200;
    let mut achieved = f64::INFINITY;
    for cycle in 0..max_cycles {
        v_cycle(&mut levels, 0);
        achieved = residual_inf(&levels[0]) / 4.0;
        if std::env::var_os("DYNWALK_MG_TRACE").is_some() {
            eprintln!("mg cycle {cycle}: residual {achieved:.3e}");
        }
        if achieved <= RESIDUAL_TARGET * 0.5 {
            break;
        }
    }
    if achieved > RESIDUAL_TARGET {
        return Err(Error::ResidualNotCertified {
            achieved,
            target: RESIDUAL_TARGET,
        });
    }

    // Transcribe the padded grid into the tight (2n+1)^2 field.
    let side_out = (2 * n + 1) as usize;
    let mut values = vec![0.0f64; side_out * side_out];
    let fine = &levels[0];
    let c_fine = (fine.side / 2) as i64;
    for y in -n..=n {
        for x in -n..=n {
            let v = if x == 0 && y == 0 {
                1.0
            } else {
                let i = (y + c_fine) as usize;
                let j = (x + c_fine) as usize;
                fine.u[i * fine.side + j]
            };
            values[((y + n) as usize) * side_out + (x + n) as usize] = v;
        }
    }
    Ok(DirichletField {
        n,
        side: side_out,
        center: n as usize,
        values,
        residual: f64::NAN,
    })
}

/// Level whose grid point (i, j) sits at lattice coords
/// `((j - c) * spacing, (i - c) * spacing)`.
fn build_level(n: i64, side: usize, spacing: i64) -> Level {
    let c = (side / 2) as i64;
    let n2 = n * n;
    let mut free = vec![0u8; side * side];
    for i in 0..side {
        for j in 0..side {
            let x = (j as i64 - c) * spacing;
            let y = (i as i64 - c) * spacing;
            if x * x + y * y < n2 && !(x == 0 && y == 0) {
                free[i * side + j] = 1;
            }
        }
    }

    // Free runs per row; the pinned origin splits its row in two.
    let mut spans = Vec::new();
    for i in 0..side {
        let mut j = 0;
        while j < side {
            if free[i * side + j] == 1 {
                let lo = j;
                while j < side && free[i * side + j] == 1 {
                    j += 1;
                }
                spans.push((i as u32, lo as u32, (j - 1) as u32));
            } else {
                j += 1;
            }
        }
    }

    // Free points whose stencil touches a frozen point, dilated once.
    let mut near = vec![false; side * side];
    for i in 1..side - 1 {
        for j in 1..side - 1 {
            let p = i * side + j;
            if free[p] == 1
                && (free[p - 1] == 0
                    || free[p + 1] == 0
                    || free[p - side] == 0
                    || free[p + side] == 0)
            {
                near[p] = true;
            }
        }
    }
    // The pinned origin needs the most care: the error there has a
    // log-singular profile the inter-grid transfers track poorly, so the
    // band densely covers a patch around the center.
    let cg = side / 2;
    let patch = 12i64;
    let mut band = Vec::new();
    for i in 1..side - 1 {
        for j in 1..side - 1 {
            let p = i * side + j;
            if free[p] != 1 {
                continue;
            }
            let (di, dj) = (i as i64 - cg as i64, j as i64 - cg as i64);
            if near[p]
                || near[p - 1]
                || near[p + 1]
                || near[p - side]
                || near[p + side]
                || di * di + dj * dj <= patch * patch
            {
                band.push(p as u32);
            }
        }
    }

    Level {
        side,
        free,
        spans,
        band,
        u: vec![0.0; side * side],
        b: vec![0.0; side * side],
    }
}

/// +1 on the rhs of every free neighbor of the pinned origin.
fn set_origin_rhs(lvl: &mut Level) {
    lvl.b.iter_mut().for_each(|v| *v = 0.0);
    let c = (lvl.side / 2) as i64;
    let side = lvl.side;
    for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
        let (i, j) = ((c + dy) as usize, (c + dx) as usize);
        if lvl.free[i * side + j] == 1 {
            lvl.b[i * side + j] = 1.0;
        }
    }
}

fn smooth(lvl: &mut Level, sweeps: usize) {
    let side = lvl.side;
    let u = &mut lvl.u;
    let b = &lvl.b;
    for _ in 0..sweeps {
        for color in 0..2usize {
            for &(i, lo, hi) in &lvl.spans {
                let row = i as usize * side;
                // First index of the right parity inside [lo, hi].
                let start = lo as usize + ((i as usize + color + lo as usize) % 2);
                let mut j = start;
                while j <= hi as usize {
                    let p = row + j;
                    let s = u[p - 1] + u[p + 1] + u[p - side] + u[p + side];
                    u[p] = 0.25 * (s + b[p]);
                    j += 2;
                }
            }
        }
        for _ in 0..BAND_SWEEPS {
            for &p in &lvl.band {
                let p = p as usize;
                let s = u[p - 1] + u[p + 1] + u[p - side] + u[p + side];
                u[p] = 0.25 * (s + b[p]);
            }
        }
    }
}

#[inline]
fn residual_at(lvl: &Level, p: usize) -> f64 {
    let side = lvl.side;
    lvl.b[p] + lvl.u[p - 1] + lvl.u[p + 1] + lvl.u[p - side] + lvl.u[p + side] - 4.0 * lvl.u[p]
}

fn residual_inf(lvl: &Level) -> f64 {
    let mut worst: f64 = 0.0;
    let side = lvl.side;
    for &(i, lo, hi) in &lvl.spans {
        let row = i as usize * side;
        for j in lo as usize..=hi as usize {
            worst = worst.max(residual_at(lvl, row + j).abs());
        }
    }
    worst
}

/// Adds (or assigns, for a full-multigrid start) the bilinear
/// interpolant of the coarse field at every free fine point.
fn prolong(fine: &mut Level, coarse: &Level, replace: bool) {
    let fs = fine.side;
    let cs = coarse.side;
    for &(i, lo, hi) in &fine.spans {
        let fi = i as usize;
        let (ci, ri) = (fi / 2, fi % 2);
        for fj in lo as usize..=hi as usize {
            let (cj, rj) = (fj / 2, fj % 2);
            let cval = |a: usize, b: usize| coarse.u[a * cs + b];
            let e = match (ri, rj) {
                (0, 0) => cval(ci, cj),
                (0, 1) => 0.5 * (cval(ci, cj) + cval(ci, cj + 1)),
                (1, 0) => 0.5 * (cval(ci, cj) + cval(ci + 1, cj)),
                _ => {
                    0.25 * (cval(ci, cj) + cval(ci, cj + 1) + cval(ci + 1, cj)
                        + cval(ci + 1, cj + 1))
                }
            };
            let p = fi * fs + fj;
            if replace {
                fine.u[p] = e;
            } else {
                fine.u[p] += e;
            }
        }
    }
}

fn v_cycle(levels: &mut [Level], l: usize) {
    if l + 1 == levels.len() {
        smooth(&mut levels[l], 64);
        return;
    }
    smooth(&mut levels[l], 2);

    // Full-weighting restriction of the residual, scaled by 4 for the
    // unscaled 5-point operator; coarse correction starts at zero.
    let (fine_slice, coarse_slice) = levels.split_at_mut(l + 1);
    let fine = &fine_slice[l];
    let coarse = &mut coarse_slice[0];
    let fs = fine.side;
    coarse.u.iter_mut().for_each(|v| *v = 0.0);
    coarse.b.iter_mut().for_each(|v| *v = 0.0);
    let cs = coarse.side;
    for &(i, lo, hi) in &coarse.spans {
        let ci = i as usize;
        let fi = 2 * ci;
        for cj in lo as usize..=hi as usize {
            let fj = 2 * cj;
            let r = |di: i64, dj: i64| -> f64 {
                let i = (fi as i64 + di) as usize;
                let j = (fj as i64 + dj) as usize;
                if i == 0 || j == 0 || i >= fs - 1 || j >= fs - 1 {
                    return 0.0;
                }
                let p = i * fs + j;
                if fine.free[p] == 1 {
                    residual_at(fine, p)
                } else {
                    0.0
                }
            };
            let fw = 4.0 * r(0, 0)
                + 2.0 * (r(1, 0) + r(-1, 0) + r(0, 1) + r(0, -1))
                + (r(1, 1) + r(1, -1) + r(-1, 1) + r(-1, -1));
            coarse.b[ci * cs + cj] = fw * 0.25;
        }
    }

    v_cycle(levels, l + 1);

    let (fine_slice, coarse_slice) = levels.split_at_mut(l + 1);
    prolong(&mut fine_slice[l], &coarse_slice[0], false);

    smooth(&mut levels[l], 2);
}
