//! Experiment configuration: flag/file merging, schedule parsing, and
//! validation.
//!
//! A config file (TOML, same keys as the flags) supplies defaults; flags
//! override the file; anything still unset falls back to built-in
//! defaults. Every field has a default except the seed, which is
//! generated and recorded in the manifest when absent.

use serde::{Deserialize, Serialize};

use dynwalk_core::schedule::{Annulus, Schedule};
use dynwalk_core::LatticePoint;

/// Raw optional settings, as read from flags or a config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schedule: Option<String>,
    pub m: Option<usize>,
    pub n: Option<u64>,
    pub t_max: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub t: Option<String>,
    pub eps: Option<f64>,
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub depths: Option<String>,
    pub grid: Option<f64>,
    pub workers: Option<usize>,
    pub out: Option<String>,
}

impl Config {
    /// Field-wise merge; `self` wins over `fallback`.
    pub fn or(self, fallback: Config) -> Config {
        Config {
            schedule: self.schedule.or(fallback.schedule),
            m: self.m.or(fallback.m),
            n: self.n.or(fallback.n),
            t_max: self.t_max.or(fallback.t_max),
            seed: self.seed.or(fallback.seed),
            samples: self.samples.or(fallback.samples),
            t: self.t.or(fallback.t),
            eps: self.eps.or(fallback.eps),
            alpha: self.alpha.or(fallback.alpha),
            k: self.k.or(fallback.k),
            x: self.x.or(fallback.x),
            y: self.y.or(fallback.y),
            depths: self.depths.or(fallback.depths),
            grid: self.grid.or(fallback.grid),
            workers: self.workers.or(fallback.workers),
            out: self.out.or(fallback.out),
        }
    }
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub schedule_spec: String,
    #[serde(skip)]
    pub schedule: Schedule,
    pub n: u64,
    pub t_max: f64,
    pub seed: u64,
    pub seed_generated: bool,
    pub samples: u64,
    pub t_list: Vec<f64>,
    pub eps: f64,
    pub alpha: Option<f64>,
    pub k: usize,
    pub x: Vec<LatticePoint>,
    pub y: LatticePoint,
    pub depths: Vec<u32>,
    pub grid: f64,
    pub workers: Option<usize>,
    pub out: String,
}

/// Parses `"paper M"`, `"desk M RHO LAMBDA"`, `"quad M C LAMBDA"`, or
/// `"explicit s0,s1,... r1,... R1,..."`.
pub fn parse_schedule(spec: &str) -> Result<Schedule, String> {
    let parts: Vec<&str> = spec.split_whitespace().collect();
    let fail = |msg: String| -> Result<Schedule, String> { Err(msg) };
    match parts.as_slice() {
        ["paper", m] => {
            let m = m.parse::<usize>().map_err(|e| format!("paper M: {e}"))?;
            Schedule::paper(m).map_err(|e| e.to_string())
        }
        ["desk", m, rho, lambda] => {
            let m = m.parse::<usize>().map_err(|e| format!("desk M: {e}"))?;
            let rho = rho.parse::<f64>().map_err(|e| format!("desk rho: {e}"))?;
            let lambda = lambda
                .parse::<f64>()
                .map_err(|e| format!("desk lambda: {e}"))?;
            Schedule::desk(m, rho, lambda).map_err(|e| e.to_string())
        }
        ["quad", m, c, lambda] => {
            let m = m.parse::<usize>().map_err(|e| format!("quad M: {e}"))?;
            let c = c.parse::<f64>().map_err(|e| format!("quad c: {e}"))?;
            let lambda = lambda
                .parse::<f64>()
                .map_err(|e| format!("quad lambda: {e}"))?;
            Schedule::quadratic(m, c, lambda).map_err(|e| e.to_string())
        }
        ["explicit", stops, inner, outer] => {
            let stops = parse_u64_list(stops)?;
            let inner = parse_f64_list(inner)?;
            let outer = parse_f64_list(outer)?;
            if inner.len() != outer.len() {
                return fail("explicit schedule: r and R lists differ in length".into());
            }
            let annuli: Vec<Annulus> = inner
                .into_iter()
                .zip(outer)
                .map(|(r, b)| Annulus { inner: r, outer: b })
                .collect();
            Schedule::from_parts(stops, annuli).map_err(|e| e.to_string())
        }
        _ => fail(format!(
            "unrecognized schedule '{spec}' (want: paper M | desk M RHO LAMBDA | \
             quad M C LAMBDA | explicit s0,s1,... r1,... R1,...)"
        )),
    }
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| format!("{p}: {e}")))
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p}: {e}")))
        .collect()
}

/// `"x,y"` or a semicolon-separated list of points.
pub fn parse_points(s: &str) -> Result<Vec<LatticePoint>, String> {
    s.split(';')
        .map(|p| {
            let parts: Vec<&str> = p.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(format!("point '{p}' is not 'x,y'"));
            }
            let x = parts[0].parse::<i64>().map_err(|e| format!("{p}: {e}"))?;
            let y = parts[1].parse::<i64>().map_err(|e| format!("{p}: {e}"))?;
            Ok(LatticePoint::new(x, y))
        })
        .collect()
}

pub const DEFAULT_SCHEDULE: &str = "desk 3 4 2";
pub const DEFAULT_GRID: f64 = 0.0009765625; // 2^-10

/// Resolves a merged config against defaults. The schedule is truncated
/// to `m` levels when `--M` is given; `k` defaults to the top level; `x`
/// and `y` default to the smallest axis point of the level-(k-1)
/// annulus, or (1, 0) for level 1.
pub fn resolve(cfg: &Config) -> Result<Resolved, String> {
    let schedule_spec = cfg
        .schedule
        .clone()
        .unwrap_or_else(|| DEFAULT_SCHEDULE.to_string());
    let mut schedule = parse_schedule(&schedule_spec)?;
    if let Some(m) = cfg.m {
        schedule = schedule.truncate(m).map_err(|e| e.to_string())?;
    }
    let k = cfg.k.unwrap_or(schedule.levels().max(1));
    let default_start = if k <= 1 {
        LatticePoint::new(1, 0)
    } else {
        match schedule.annulus(k - 1) {
            Ok(a) => LatticePoint::new(a.inner.ceil() as i64, 0),
            Err(_) => LatticePoint::new(1, 0),
        }
    };
    let x = match &cfg.x {
        Some(s) => parse_points(s)?,
        None => vec![default_start],
    };
    let y = match &cfg.y {
        Some(s) => {
            let pts = parse_points(s)?;
            if pts.len() != 1 {
                return Err("y must be a single point".into());
            }
            pts[0]
        }
        None => default_start,
    };
    let t_list = match &cfg.t {
        Some(s) => parse_f64_list(s)?,
        None => vec![1.0],
    };
    let depths = match &cfg.depths {
        Some(s) => parse_u64_list(s)?.into_iter().map(|d| d as u32).collect(),
        None => (1..=10).collect(),
    };
    let (seed, seed_generated) = match cfg.seed {
        Some(s) => (s, false),
        None => (rand::random::<u64>(), true),
    };
    Ok(Resolved {
        n: cfg.n.unwrap_or(schedule.max_stop()),
        schedule_spec,
        schedule,
        t_max: cfg.t_max.unwrap_or(1.0),
        seed,
        seed_generated,
        samples: cfg.samples.unwrap_or(10_000),
        t_list,
        eps: cfg.eps.unwrap_or(0.25),
        alpha: cfg.alpha,
        k,
        x,
        y,
        depths,
        grid: cfg.grid.unwrap_or(DEFAULT_GRID),
        workers: cfg.workers,
        out: cfg.out.clone().unwrap_or_else(|| "out".to_string()),
    })
}

/// Per-subcommand precondition checks; an empty list means the run can
/// proceed.
#[allow(clippy::collapsible_match)] // one arm per subcommand reads better
pub fn validate(subcommand: &str, r: &Resolved) -> Vec<String> {
    let mut v = Vec::new();
    let m = r.schedule.levels();
    let needs_walks = matches!(
        subcommand,
        "scan-exc"
            | "estimate-return"
            | "estimate-joint"
            | "estimate-em"
            | "estimate-ratio"
            | "check-summary"
            | "second-moment"
            | "escape-rate"
            | "dimension"
    );
    if needs_walks && r.schedule_spec.starts_with("paper") && m > 2 {
        v.push(format!(
            "paper schedule with M = {m} needs s_M = {} steps per walk; cap M at 2",
            r.schedule.max_stop()
        ));
    }
    if r.samples == 0 {
        v.push("samples must be positive".into());
    }
    if !(r.t_max >= 0.0) {
        v.push("t-max must be non-negative".into());
    }
    match subcommand {
        "scan-exc" | "second-moment" | "escape-rate" | "dimension" => {
            if r.n < r.schedule.max_stop() {
                v.push(format!(
                    "N = {} shorter than the schedule's s_M = {}",
                    r.n,
                    r.schedule.max_stop()
                ));
            }
        }
        _ => {}
    }
    match subcommand {
        "estimate-return" | "estimate-joint" => {
            if r.k == 0 || r.k > m {
                v.push(format!("k = {} outside schedule levels [1, {m}]", r.k));
            }
            for p in &r.x {
                if p.is_origin() {
                    v.push("start x at origin".into());
                }
            }
            if subcommand == "estimate-joint" {
                if r.y.is_origin() {
                    v.push("start y at origin".into());
                }
                if r.t_list.iter().any(|&t| t < 0.0) {
                    v.push("t must be non-negative".into());
                }
            }
        }
        "estimate-ratio" => {
            if r.t_list.iter().any(|&t| t < 0.0) {
                v.push("t must be non-negative".into());
            }
        }
        "check-summary" => {
            if r.t_list.iter().any(|&t| t <= 0.0) {
                v.push("t must be positive".into());
            }
        }
        "hitting-prob" => {
            let n = r.n as i64;
            if n < 2 {
                v.push("ball radius N must be at least 2".into());
            }
            for p in &r.x {
                if p.is_origin() {
                    v.push("start at origin".into());
                } else if p.norm_sq() >= n * n {
                    v.push(format!("start {p} outside the ball of radius {n}"));
                }
            }
        }
        "escape-rate" => {
            if let Some(alpha) = r.alpha {
                if !(0.0 < alpha && alpha < 0.5) {
                    v.push("alpha must lie in (0, 1/2)".into());
                }
            } else if !(r.eps > 0.0) {
                v.push("eps must be positive".into());
            }
            if !(r.grid > 0.0) {
                v.push("grid spacing must be positive".into());
            }
        }
        "dimension" => {
            if r.depths.is_empty() || r.depths.contains(&0) {
                v.push("depths must be positive".into());
            }
        }
        _ => {}
    }
    // Schedule-construction errors surface at parse time; desk growth
    // and width bounds are re-checked there.
    v
}
