//! Subcommand implementations. Each writes one results CSV plus a JSON
//! manifest into the output directory and prints a one-line summary.

use serde_json::json;

use dynwalk_core::analysis::{box_count_dimension, escape_rate_scan, Barrier};
use dynwalk_core::dirichlet::DirichletField;
use dynwalk_core::estimators::{
    check_summary, estimate_good_event_prob, estimate_joint_return, estimate_ratio,
    estimate_return_prob, fit_hitting_bound_constant, fit_log4_constant, hitting_prob_mc,
    second_moment_lower_bound, EstimatorReport, RatioValue,
};
use dynwalk_core::events::scan_e_m;
use dynwalk_core::process::sample_realization;
use dynwalk_core::rng::sub_seed;

use crate::config::Resolved;
use crate::output::{fmt_f64 as f, RunWriter};

pub enum RunError {
    /// Precondition or configuration problem surfaced at run time.
    Config(String),
    /// The run itself failed (undefined ratio, uncertified solve, io).
    Runtime(String),
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Runtime(format!("io: {e}"))
    }
}

impl From<dynwalk_core::Error> for RunError {
    fn from(e: dynwalk_core::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

type RunResult = Result<(), RunError>;

fn report_cells(rep: &EstimatorReport) -> String {
    format!(
        "{},{},{},{},{}",
        rep.n_samples,
        f(rep.mean),
        f(rep.stderr),
        f(rep.ci_lo),
        f(rep.ci_hi)
    )
}

pub fn scan_exc(r: &Resolved, dump: Option<&str>) -> RunResult {
    let mut w = RunWriter::new(&r.out, "scan-exc")?;
    let realization = sample_realization(r.n as usize, r.t_max, r.seed);
    let ind = scan_e_m(&realization, &r.schedule, (0.0, r.t_max))?;
    let rows: Vec<String> = ind
        .intervals()
        .iter()
        .enumerate()
        .map(|(i, (a, b))| format!("{i},{},{}", f(*a), f(*b)))
        .collect();
    w.write_csv("scan-exc.csv", "interval,start,end", &rows)?;
    if let Some(path) = dump {
        let mut buf = Vec::new();
        dynwalk_core::container::write_realization(&mut buf, &realization)
            .map_err(|e| RunError::Runtime(format!("dump: {e}")))?;
        std::fs::write(path, &buf)?;
    }
    let measure = ind.measure();
    println!(
        "scan-exc: {} intervals, measure {measure} over [0, {}]",
        ind.intervals().len(),
        r.t_max
    );
    w.finish(
        r,
        json!({"measure": measure, "intervals": ind.intervals().len()}),
    )?;
    Ok(())
}

pub fn estimate_return(r: &Resolved) -> RunResult {
    let mut w = RunWriter::new(&r.out, "estimate-return")?;
    let (lo, hi) = r.schedule.window(r.k)?;
    let mut rows = Vec::new();
    for &x in &r.x {
        let rep = estimate_return_prob(&r.schedule, r.k, x, r.samples, r.seed)?;
        rows.push(format!(
            "{},{},{},{lo},{hi},{}",
            r.k,
            x.x,
            x.y,
            report_cells(&rep)
        ));
        println!(
            "estimate-return: k={} x={x} mean {} +- {}",
            r.k,
            f(rep.mean),
            f(rep.stderr)
        );
    }
    w.write_csv(
        "estimate-return.csv",
        "k,x1,x2,window_lo,window_hi,samples,mean,stderr,ci_lo,ci_hi",
        &rows,
    )?;
    w.finish(r, json!({"window": [lo, hi]}))?;
    Ok(())
}

pub fn estimate_joint(r: &Resolved) -> RunResult {
    let mut w = RunWriter::new(&r.out, "estimate-joint")?;
    let x = r.x[0];
    let mut rows = Vec::new();
    for &t in &r.t_list {
        let rep = estimate_joint_return(&r.schedule, r.k, x, r.y, t, r.samples, r.seed)?;
        rows.push(format!(
            "{},{},{},{},{},{},{}",
            r.k,
            x.x,
            x.y,
            r.y.x,
            r.y.y,
            f(t),
            report_cells(&rep)
        ));
        println!(
            "estimate-joint: k={} t={t} mean {} +- {}",
            r.k,
            f(rep.mean),
            f(rep.stderr)
        );
    }
    w.write_csv(
        "estimate-joint.csv",
        "k,x1,x2,y1,y2,t,samples,mean,stderr,ci_lo,ci_hi",
        &rows,
    )?;
    w.finish(r, json!({}))?;
    Ok(())
}

pub fn estimate_em(r: &Resolved) -> RunResult {
    let mut w = RunWriter::new(&r.out, "estimate-em")?;
    let rep = estimate_good_event_prob(&r.schedule, r.samples, r.seed)?;
    let rows = vec![format!("{},{}", r.schedule.levels(), report_cells(&rep))];
    w.write_csv(
        "estimate-em.csv",
        "m,samples,mean,stderr,ci_lo,ci_hi",
        &rows,
    )?;
    println!(
        "estimate-em: M={} mean {} +- {}",
        r.schedule.levels(),
        f(rep.mean),
        f(rep.stderr)
    );
    w.finish(r, json!({}))?;
    Ok(())
}

pub fn estimate_ratio_cmd(r: &Resolved) -> RunResult {
    let mut w = RunWriter::new(&r.out, "estimate-ratio")?;
    let mut rows = Vec::new();
    let mut undefined = Vec::new();
    let mut fit_points = Vec::new();
    for &t in &r.t_list {
        let rep = estimate_ratio(&r.schedule, t, r.samples, r.seed)?;
        let (ratio, stderr, defined) = match rep.value {
            RatioValue::Defined { ratio, stderr } => (ratio, stderr, true),
            RatioValue::Undefined { .. } => {
                undefined.push(t);
                (f64::NAN, f64::NAN, false)
            }
        };
        if defined && t > 0.0 {
            fit_points.push((t, ratio));
        }
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            r.schedule.levels(),
            f(t),
            f(rep.numerator.mean),
            f(rep.numerator.stderr),
            f(rep.denominator.mean),
            f(rep.denominator.stderr),
            f(ratio),
            f(stderr),
            defined
        ));
        println!(
            "estimate-ratio: t={t} ratio {} +- {}",
            f(ratio),
            f(stderr)
        );
    }
    w.write_csv(
        "estimate-ratio.csv",
        "m,t,num_mean,num_stderr,den_mean,den_stderr,ratio,ratio_stderr,defined",
        &rows,
    )?;
    let log4_c = fit_log4_constant(&fit_points);
    println!("estimate-ratio: fitted C with f(t) <= C (1+|log2 t|)^4: {log4_c}");
    w.finish(r, json!({"log4_constant": log4_c, "undefined_at": undefined.clone()}))?;
    if !undefined.is_empty() {
        return Err(RunError::Runtime(format!(
            "ratio undefined at t = {undefined:?} (denominator within 5 sigma of zero)"
        )));
    }
    Ok(())
}

pub fn check_summary_cmd(r: &Resolved) -> RunResult {
    let mut w = RunWriter::new(&r.out, "check-summary")?;
    let t = r.t_list[0];
    let table = check_summary(&r.schedule, t, r.samples, r.seed)?;
    let rows: Vec<String> = table
        .rows
        .iter()
        .map(|row| {
            format!(
                "{},{},{},{},{},{},{},{}",
                row.k,
                row.n_cond_single,
                f(row.p_single),
                f(row.se_single),
                row.n_cond_joint,
                f(row.p_joint),
                f(row.se_joint),
                row.sufficient
            )
        })
        .collect();
    w.write_csv(
        "check-summary.csv",
        "k,n_cond_single,p_single,se_single,n_cond_joint,p_joint,se_joint,sufficient",
        &rows,
    )?;
    println!(
        "check-summary: t={t} K(t)={} fitted C = {}",
        table.k_threshold, table.fitted_c
    );
    w.finish(
        r,
        json!({"fitted_c": table.fitted_c, "k_threshold": table.k_threshold}),
    )?;
    Ok(())
}

pub fn hitting_prob(r: &Resolved) -> RunResult {
    let mut w = RunWriter::new(&r.out, "hitting-prob")?;
    let n = r.n as i64;
    let field = DirichletField::solve(n)?;
    let fit = fit_hitting_bound_constant(&[n], &r.x)?;
    let mut rows = Vec::new();
    for (i, &x) in r.x.iter().enumerate() {
        let exact = field.value(x)?;
        let mc = hitting_prob_mc(n, x, r.samples, sub_seed(r.seed, i as u64))?;
        rows.push(format!(
            "{n},{},{},{},{},{},{},{}",
            x.x,
            x.y,
            f(exact),
            f(mc.mean),
            f(mc.stderr),
            mc.n_samples,
            f(fit.c)
        ));
        println!(
            "hitting-prob: n={n} x={x} exact {} mc {} +- {}",
            f(exact),
            f(mc.mean),
            f(mc.stderr)
        );
    }
    w.write_csv(
        "hitting-prob.csv",
        "n,x1,x2,exact,mc_mean,mc_stderr,mc_samples,fitted_c",
        &rows,
    )?;
    println!("hitting-prob: fitted base-2 C = {}", fit.c);
    w.finish(
        r,
        json!({"fitted_c": fit.c, "solver_residual": field.residual()}),
    )?;
    Ok(())
}

pub fn second_moment(r: &Resolved) -> RunResult {
    let mut w = RunWriter::new(&r.out, "second-moment")?;
    let n = r.n as usize;
    let mut rows = Vec::new();
    let mut measures = Vec::with_capacity(r.samples as usize);
    for i in 0..r.samples {
        let realization = sample_realization(n, r.t_max, sub_seed(r.seed, i));
        let l = scan_e_m(&realization, &r.schedule, (0.0, r.t_max))?.measure();
        rows.push(format!("{i},{}", f(l)));
        measures.push(l);
    }
    w.write_csv("second-moment.csv", "sample,measure", &rows)?;
    let bound = second_moment_lower_bound(&measures)?;
    let positive = measures.iter().filter(|&&l| l > 0.0).count();
    let p_pos = positive as f64 / measures.len() as f64;
    let mean_l = measures.iter().sum::<f64>() / measures.len() as f64;
    println!(
        "second-moment: P(L > 0) = {p_pos} >= bound {bound} (mean L = {mean_l}, {} realizations)",
        measures.len()
    );
    w.finish(
        r,
        json!({"bound": bound, "empirical_p_positive": p_pos, "mean_measure": mean_l}),
    )?;
    Ok(())
}

pub fn escape_rate(r: &Resolved) -> RunResult {
    let mut w = RunWriter::new(&r.out, "escape-rate")?;
    let barrier = match r.alpha {
        Some(alpha) => Barrier::Power { alpha },
        None => Barrier::LogCorrected { eps: r.eps },
    };
    let grid: Vec<f64> = {
        let mut g = Vec::new();
        let mut t = 0.0;
        while t <= r.t_max {
            g.push(t);
            t += r.grid;
        }
        g
    };
    let realization = sample_realization(r.n as usize, r.t_max, r.seed);
    let reports = escape_rate_scan(&realization, &r.schedule, barrier, &grid)?;
    let rows: Vec<String> = reports
        .iter()
        .map(|e| format!("{},{},{}", f(e.t), e.survives, e.max_surviving_n))
        .collect();
    w.write_csv("escape-rate.csv", "t,survives,max_surviving_n", &rows)?;
    let survivors = reports.iter().filter(|e| e.survives).count();
    let t0_fails = reports.first().map(|e| !e.survives).unwrap_or(false);
    println!(
        "escape-rate: {survivors} of {} grid times survive (t = 0 fails: {t0_fails})",
        reports.len()
    );
    w.finish(
        r,
        json!({"survivors": survivors, "grid_points": reports.len(), "t0_fails": t0_fails}),
    )?;
    Ok(())
}

pub fn dimension(r: &Resolved) -> RunResult {
    let mut w = RunWriter::new(&r.out, "dimension")?;
    let realization = sample_realization(r.n as usize, r.t_max, r.seed);
    let ind = scan_e_m(&realization, &r.schedule, (0.0, r.t_max))?;
    let rep = box_count_dimension(&ind, &r.depths)?;
    let rows: Vec<String> = rep
        .depths
        .iter()
        .zip(rep.scales.iter().zip(&rep.counts))
        .map(|(d, (s, c))| format!("{d},{},{c}", f(*s)))
        .collect();
    w.write_csv("dimension.csv", "depth,box_size,count", &rows)?;
    println!(
        "dimension: slope {} (r2 {}, measure {}, empty {})",
        f(rep.slope),
        f(rep.fit_r2),
        f(ind.measure()),
        rep.empty
    );
    w.finish(
        r,
        json!({
            "slope": rep.slope,
            "fit_r2": rep.fit_r2,
            "empty": rep.empty,
            "measure": ind.measure(),
        }),
    )?;
    Ok(())
}
