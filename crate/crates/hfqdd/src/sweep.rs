//! Knudsen-number sweeps of the composite-approximation error and the
//! log-log fit of its order.
//!
//! For each `eps` the kinetic reference and the asymptotic solution are run
//! on the same step grid, and a control pair at half the step measures how
//! much of the error is discretization: the floor of a case is the largest
//! `X_k` change of the error field `w - composite` between the two
//! resolutions. Cases whose (sup over output times) error is within 10x of
//! their floor are excluded from the fit.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use hfqdd_core::assembler::{snapped_times, AsymptoticSolution};
use hfqdd_core::equilibrium::FastOperator;
use hfqdd_core::kinetic::{kinetic_solve, KineticProblem};
use hfqdd_core::{NormSpec, StepPlan, Trajectory, WignerField};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{CsvSink, CsvTable, Metadata};

/// Minimum number of usable `eps` points for an order fit.
pub const MIN_FIT_POINTS: usize = 4;
/// Points within this factor of their discretization floor are not fitted.
pub const FLOOR_FACTOR: f64 = 10.0;
/// Errors below this are indistinguishable from round-off.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// One output time of one case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub t: f64,
    pub composite_error: f64,
    pub layer_error: f64,
    pub bulk_error: f64,
}

/// The fields behind one [`SweepRow`], kept for the per-run files.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub kinetic: WignerField,
    pub bulk: WignerField,
    pub layer: WignerField,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub eps: f64,
    pub rows: Vec<SweepRow>,
    pub snapshots: Vec<Snapshot>,
    /// Discretization floor from the half-step control run.
    pub floor: f64,
}

impl CaseResult {
    /// Sup over the output times of the composite error.
    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.composite_error).fold(0.0, f64::max)
    }

    /// Whether the case is far enough above its floor to enter the fit.
    pub fn usable(&self) -> bool {
        let e = self.max_error();
        e > ROUNDOFF_FLOOR && e > FLOOR_FACTOR * self.floor
    }
}

/// Least-squares fit `ln error = ln C + p ln eps` with a 95% interval on `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub order: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub constant: f64,
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub cases: Vec<CaseResult>,
    pub fit: OrderFit,
}

impl SweepResult {
    pub fn rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.cases.iter().flat_map(|c| c.rows.iter())
    }

    /// Whether the sup-in-time error decreases strictly as `eps` decreases.
    pub fn monotone(&self) -> bool {
        self.cases.windows(2).all(|w| w[1].max_error() < w[0].max_error())
    }
}

struct Resolution {
    kinetic: Trajectory<WignerField>,
    asym: AsymptoticSolution,
}

fn run_resolution(
    fast: &Arc<FastOperator>,
    w0: &WignerField,
    t_final: f64,
    dt: f64,
    times: &[f64],
) -> Result<Resolution> {
    let problem = KineticProblem::new(fast.clone(), w0.clone(), t_final, dt)?;
    let kinetic = kinetic_solve(&problem, times)?;
    let asym = AsymptoticSolution::build(fast.clone(), w0, t_final, dt, times)?;
    Ok(Resolution { kinetic, asym })
}

/// Runs one case: the configured resolution plus its half-step control.
pub fn run_case(config: &ExperimentConfig, eps: f64) -> Result<CaseResult> {
    let spec = config.norm();
    let fast = config.fast_operator(eps)?;
    let w0 = config.initial.build(&fast)?;
    let times = snapped_times(config.t_final, config.dt, &config.output_times())?;
    let plan_dt = StepPlan::new(config.t_final, config.dt, &[])?.dt;
    let main = run_resolution(&fast, &w0, config.t_final, plan_dt, &times)?;
    let control = run_resolution(&fast, &w0, config.t_final, 0.5 * plan_dt, &times)?;

    let mut rows = Vec::with_capacity(times.len());
    let mut snapshots = Vec::with_capacity(times.len());
    let mut floor: f64 = 0.0;
    for &t in &times {
        let kinetic = main.kinetic.at(t)?.clone();
        let bulk = main.asym.bulk(t)?;
        let layer = main.asym.layer_part(t)?;
        let (composite_error, bulk_error, layer_error) = error_norms(&kinetic, &bulk, &layer, spec)?;
        rows.push(SweepRow { eps, t, composite_error, layer_error, bulk_error });

        let fine = control.kinetic.at(t)?.sub(&control.asym.evaluate(t)?)?;
        let coarse = kinetic.sub(&bulk)?.sub(&layer)?;
        floor = floor.max(coarse.sub(&fine)?.norm_xk(spec));
        snapshots.push(Snapshot { t, kinetic, bulk, layer });
    }
    Ok(CaseResult { eps, rows, snapshots, floor })
}

/// `(composite, bulk, layer)` error norms, evaluated exactly as when the
/// per-run files are read back.
pub fn error_norms(
    kinetic: &WignerField,
    bulk: &WignerField,
    layer: &WignerField,
    spec: NormSpec,
) -> Result<(f64, f64, f64)> {
    let bulk_diff = kinetic.sub(bulk)?;
    Ok((bulk_diff.sub(layer)?.norm_xk(spec), bulk_diff.norm_xk(spec), layer.norm_xk(spec)))
}

/// Runs every case of `eps_list` on the current rayon pool and fits the
/// order. Cases are independent; results are gathered in list order, so the
/// outcome does not depend on the pool size.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    if config.eps_list.len() < MIN_FIT_POINTS {
        return Err(HarnessError::FitDegenerate(format!(
            "eps_list has {} value(s); an order fit needs at least {MIN_FIT_POINTS}",
            config.eps_list.len()
        )));
    }
    let cases = config.eps_list.par_iter().map(|&eps| run_case(config, eps)).collect::<Result<Vec<_>>>()?;
    let fit = fit_cases(&cases)?;
    Ok(SweepResult { cases, fit })
}

/// Fits the usable cases, refusing when too few remain.
pub fn fit_cases(cases: &[CaseResult]) -> Result<OrderFit> {
    if cases.iter().all(|c| c.max_error() < ROUNDOFF_FLOOR) {
        return Err(HarnessError::FitDegenerate(format!(
            "all errors are below {ROUNDOFF_FLOOR:e}: the datum is reproduced to round-off (floor)"
        )));
    }
    let points: Vec<(f64, f64)> = cases.iter().filter(|c| c.usable()).map(|c| (c.eps, c.max_error())).collect();
    if points.len() < MIN_FIT_POINTS {
        let detail: Vec<String> =
            cases.iter().map(|c| format!("eps={} error={:e} floor={:e}", c.eps, c.max_error(), c.floor)).collect();
        return Err(HarnessError::FitDegenerate(format!(
            "only {} of {} points lie above {FLOOR_FACTOR}x their discretization floor ({})",
            points.len(),
            cases.len(),
            detail.join("; ")
        )));
    }
    fit_power_law(&points)
}

/// Ordinary least squares on `(ln eps, ln error)` with a Student-t 95%
/// interval on the slope.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<OrderFit> {
    let n = points.len();
    if n < 3 || points.iter().any(|&(e, err)| !(e > 0.0 && err > 0.0)) {
        return Err(HarnessError::FitDegenerate(format!("{n} points cannot be fitted on log axes")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(e, err)| (e.ln(), err.ln())).collect();
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx <= 0.0 {
        return Err(HarnessError::FitDegenerate("all eps values coincide".into()));
    }
    let order = sxy / sxx;
    let intercept = mean_y - order * mean_x;
    let ssr: f64 = logs.iter().map(|p| (p.1 - intercept - order * p.0).powi(2)).sum();
    let dof = (n - 2) as f64;
    let stderr = (ssr / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| HarnessError::FitDegenerate(e.to_string()))?.inverse_cdf(0.975);
    Ok(OrderFit {
        order,
        ci_low: order - t * stderr,
        ci_high: order + t * stderr,
        constant: intercept.exp(),
        points: n,
    })
}

/// Path of the per-run file of case `index` next to the sweep CSV `out`.
pub fn run_file_path(out: &Path, index: usize) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    out.with_file_name(format!("{stem}.run{index}.csv"))
}

pub const SWEEP_HEADER: [&str; 7] = ["eps", "t", "composite_error", "layer_error", "bulk_error", "floor", "in_fit"];
pub const RUN_HEADER: [&str; 6] = ["t", "x", "v", "w", "bulk", "layer"];

/// Writes the sweep CSV and one per-run file per case.
pub fn write_sweep(result: &SweepResult, config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let hash = config.hash();
    let mut run_files = Vec::with_capacity(result.cases.len());
    for (i, case) in result.cases.iter().enumerate() {
        let path = run_file_path(out, i);
        let meta = Metadata::new(&hash, true)
            .with("eps", case.eps)
            .with("norm_k", config.norm_k)
            .with("floor", format!("{:e}", case.floor));
        let mut sink = CsvSink::create(&path, &meta, &RUN_HEADER)?;
        for snap in &case.snapshots {
            let grid = snap.kinetic.grid().clone();
            for (ix, &x) in grid.space().points().iter().enumerate() {
                for (jv, &v) in grid.v_points().iter().enumerate() {
                    sink.row(&[snap.t, x, v, snap.kinetic.at(ix, jv), snap.bulk.at(ix, jv), snap.layer.at(ix, jv)])?;
                }
            }
        }
        sink.finish()?;
        run_files.push(path);
    }

    let names: Vec<String> =
        run_files.iter().map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned()).collect();
    let fit = result.fit;
    let meta = Metadata::new(&hash, true)
        .with("norm_k", config.norm_k)
        .with("fitted_order", fit.order)
        .with("fitted_order_ci95_low", fit.ci_low)
        .with("fitted_order_ci95_high", fit.ci_high)
        .with("fitted_constant", fit.constant)
        .with("fit_points", fit.points)
        .with("monotone", result.monotone())
        .with("run_files", names.join(";"));
    let mut sink = CsvSink::create(out, &meta, &SWEEP_HEADER)?;
    for case in &result.cases {
        let in_fit = if case.usable() { 1.0 } else { 0.0 };
        for r in &case.rows {
            sink.row(&[r.eps, r.t, r.composite_error, r.layer_error, r.bulk_error, case.floor, in_fit])?;
        }
    }
    sink.finish()?;
    Ok(run_files)
}

/// Recomputes `(t, composite, bulk, layer)` from a per-run file.
pub fn rows_from_run_file(path: &Path, config: &ExperimentConfig) -> Result<Vec<(f64, f64, f64, f64)>> {
    let table = CsvTable::read(path)?;
    if table.header != RUN_HEADER {
        return Err(HarnessError::invalid(format!("{} is not a per-run file", path.display())));
    }
    let grid = config.phase_grid()?;
    let block = grid.size();
    if block == 0 || table.rows.len() % block != 0 {
        return Err(HarnessError::invalid(format!("{} does not match the configured grid", path.display())));
    }
    let column = |rows: &[Vec<f64>], i: usize| rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let mut out = Vec::new();
    for chunk in table.rows.chunks(block) {
        let field = |i| WignerField::from_values(&grid, column(chunk, i));
        let (c, b, l) = error_norms(&field(3)?, &field(4)?, &field(5)?, config.norm())?;
        out.push((chunk[0][0], c, b, l));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_fit_recovers_exact_slope() {
        let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.025].iter().map(|&e: &f64| (e, 3.0 * e.powi(2))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.order - 2.0).abs() < 1e-12);
        assert!((fit.constant - 3.0).abs() < 1e-10);
        assert!(fit.ci_high - fit.ci_low < 1e-9);
    }

    #[test]
    fn confidence_interval_brackets_noisy_slope() {
        let noise = [1.05, 0.97, 1.02, 0.99, 1.01];
        let pts: Vec<(f64, f64)> =
            [0.4, 0.2, 0.1, 0.05, 0.025].iter().zip(noise).map(|(&e, f): (&f64, f64)| (e, e.powi(2) * f)).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!(fit.ci_low < fit.order && fit.order < fit.ci_high);
        assert!(fit.ci_low < 2.0 && 2.0 < fit.ci_high, "{fit:?}");
    }

    fn case(eps: f64, err: f64, floor: f64) -> CaseResult {
        let row = SweepRow { eps, t: 0.5, composite_error: err, layer_error: 0.0, bulk_error: err };
        CaseResult { eps, rows: vec![row], snapshots: Vec::new(), floor }
    }

    #[test]
    fn floor_points_are_excluded_and_may_degenerate_the_fit() {
        let good: Vec<CaseResult> = [0.2, 0.1, 0.05, 0.025].iter().map(|&e| case(e, e * e, 1e-9)).collect();
        assert_eq!(fit_cases(&good).unwrap().points, 4);
        let mut floored = good.clone();
        floored[3].floor = 1e-4;
        assert!(!floored[3].usable());
        assert!(matches!(fit_cases(&floored), Err(HarnessError::FitDegenerate(_))));
        let tiny: Vec<CaseResult> = [0.2, 0.1, 0.05, 0.025].iter().map(|&e| case(e, 1e-15, 0.0)).collect();
        let err = fit_cases(&tiny).unwrap_err();
        assert!(err.to_string().contains("floor"), "{err}");
    }

    #[test]
    fn short_eps_list_is_refused_before_running() {
        let config = ExperimentConfig { eps_list: vec![0.1], ..ExperimentConfig::default() };
        let err = run_sweep(&config).unwrap_err();
        assert!(matches!(err, HarnessError::FitDegenerate(_)));
        assert_eq!(err.exit_code(), 3);
    }
}
