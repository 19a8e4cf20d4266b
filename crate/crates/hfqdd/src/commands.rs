//! The work behind each CLI subcommand: read a validated config, run, and
//! write one CSV. Each returns a one-line summary for the terminal.

use std::path::Path;
use std::sync::Arc;

use hfqdd_core::assembler::{snapped_times, verify_d2_d1, BulkProfiles};
use hfqdd_core::equilibrium::{kernel_moments_closed_form, FastOperator};
use hfqdd_core::kinetic::{kinetic_solve, KineticProblem};
use hfqdd_core::qdd::{initial_correction_n1, QddProblem, QddSolver};
use hfqdd_core::transport::{check_ellipticity, TransportCoeffs};
use hfqdd_core::{DensityField, SpaceGrid};

use crate::config::{ExperimentConfig, KineticOutput};
use crate::error::{HarnessError, Result};
use crate::output::{CsvSink, Metadata};
use crate::sweep::{run_sweep, write_sweep};

/// Tolerance on the kernel-moment relative errors reported by `moments-check`.
pub const MOMENT_TOL: f64 = 1e-6;
/// Tolerance on the transport-profile absolute errors reported by `moments-check`.
pub const PROFILE_TOL: f64 = 1e-6;

/// `x, D, W, E` at the configured Knudsen number. Evaluated pointwise, so
/// aperiodic potentials are allowed and no truncation is involved.
pub fn coeffs(config: &ExperimentConfig, out: &Path) -> Result<String> {
    let params = config.physical_params(config.params.eps)?;
    let grid = Arc::new(SpaceGrid::new(config.grid.n_x, config.grid.length).map_err(HarnessError::invalid)?);
    let c = TransportCoeffs::evaluate(&config.potential.build(), &params, &grid);
    let meta = Metadata::new(&config.hash(), false).with("ellipticity_floor", c.ellipticity_floor);
    let mut sink = CsvSink::create(out, &meta, &["x", "D", "W", "E"])?;
    for (i, &x) in grid.points().iter().enumerate() {
        sink.row(&[x, c.d.values()[i], c.w.values()[i], c.e.values()[i]])?;
    }
    sink.finish()?;
    Ok(format!("wrote {} rows; min D = {}", grid.len(), c.ellipticity_floor))
}

/// Worst errors of a `moments-check` run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    /// Largest relative error of `int M`, `int v M`, `int v^2 M`.
    pub moments: [f64; 3],
    /// Largest absolute error of `int v D2` against `D` and `int v D1` against
    /// `W`; `None` when the potential is not periodic on the box (the profiles
    /// need `x`-derivatives of `M`).
    pub diffusion: Option<f64>,
    pub drift: Option<f64>,
    /// Relative boundary value of `M`.
    pub tail: f64,
}

impl MomentReport {
    pub fn passes(&self) -> bool {
        let profile_ok = |e: Option<f64>| e.is_none_or(|e| e <= PROFILE_TOL);
        self.moments.iter().all(|&e| e <= MOMENT_TOL) && profile_ok(self.diffusion) && profile_ok(self.drift)
    }
}

/// Relative error with the denominator floored at `1e-8`, so points where
/// the exact moment vanishes are judged absolutely.
pub fn relative_error(numeric: f64, exact: f64) -> f64 {
    (numeric - exact).abs() / exact.abs().max(1e-8)
}

/// Numerical kernel moments and transport profiles against their closed
/// forms, per grid point. `M` acts pointwise in `x`, so aperiodic
/// potentials are allowed; their profile columns are `NaN`.
pub fn moments_check(config: &ExperimentConfig, out: &Path) -> Result<(String, MomentReport)> {
    let params = config.physical_params(config.params.eps)?;
    let grid = config.phase_grid()?;
    let pot = config.potential.build();
    let fast = FastOperator::new(&pot, &params, &grid)?;
    let kernel = fast.kernel();
    let profiles = if pot.is_periodic_on(grid.space()) { Some(BulkProfiles::new(&fast)?) } else { None };
    let nan = DensityField::from_fn(grid.space_arc(), |_| f64::NAN);
    let (d2, d1) = match &profiles {
        Some(p) => (p.d2.velocity_moment(1), p.d1.velocity_moment(1)),
        None => (nan.clone(), nan),
    };
    let coeffs = TransportCoeffs::evaluate(&pot, &params, grid.space_arc());
    let numeric = [kernel.zeroth_moment(), kernel.first_moment(), kernel.second_moment()];

    let mut worst = [0.0f64; 3];
    let header = ["x", "m0", "m0_exact", "m1", "m1_exact", "m2", "m2_exact", "D_profile", "D", "W_profile", "W"];
    let mut rows = Vec::with_capacity(grid.n_x());
    for (i, &x) in grid.space().points().iter().enumerate() {
        let (e0, e1, e2) = kernel_moments_closed_form(&pot, &params, x);
        let exact = [e0, e1, e2];
        for k in 0..3 {
            worst[k] = worst[k].max(relative_error(numeric[k].values()[i], exact[k]));
        }
        rows.push([
            x,
            numeric[0].values()[i],
            e0,
            numeric[1].values()[i],
            e1,
            numeric[2].values()[i],
            e2,
            d2.values()[i],
            coeffs.d.values()[i],
            d1.values()[i],
            coeffs.w.values()[i],
        ]);
    }
    let profile = profiles.as_ref().map(|p| verify_d2_d1(&fast, p));
    let report = MomentReport {
        moments: worst,
        diffusion: profile.map(|p| p.diffusion),
        drift: profile.map(|p| p.drift),
        tail: kernel.tail(),
    };
    let show = |e: Option<f64>| e.map_or_else(|| "skipped (aperiodic)".to_string(), |e| format!("{e:e}"));
    let meta = Metadata::new(&config.hash(), true)
        .with("max_rel_err_m0", report.moments[0])
        .with("max_rel_err_m1", report.moments[1])
        .with("max_rel_err_m2", report.moments[2])
        .with("max_abs_err_D", show(report.diffusion))
        .with("max_abs_err_W", show(report.drift))
        .with("kernel_tail", report.tail)
        .with("pass", report.passes());
    let mut sink = CsvSink::create(out, &meta, &header)?;
    for r in &rows {
        sink.row(r)?;
    }
    sink.finish()?;
    let summary = format!(
        "moment rel errors {:e} {:e} {:e}; D/W profile errors {} {}",
        worst[0],
        worst[1],
        worst[2],
        show(report.diffusion),
        show(report.drift)
    );
    if report.passes() {
        Ok((summary, report))
    } else {
        Err(HarnessError::SelfTestFailed(format!("moments-check above tolerance: {summary}")))
    }
}

/// Mass bookkeeping of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassReport {
    pub initial: f64,
    /// Largest relative deviation over the output times.
    pub drift: f64,
}

fn mass_report<'a>(initial: f64, masses: impl Iterator<Item = f64> + 'a) -> MassReport {
    let drift = masses.map(|m| (m - initial).abs() / initial.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    MassReport { initial, drift }
}

/// The macroscopic run: `n0 = int w0 dv`, optionally corrected by `eps n1`.
pub fn qdd_run(config: &ExperimentConfig, out: &Path) -> Result<(String, MassReport)> {
    let eps = config.params.eps;
    let fast = config.fast_operator(eps)?;
    let w0 = config.initial.build(&fast)?;
    let space = fast.grid().space_arc().clone();
    let n1 = if config.qdd_corrected_datum {
        initial_correction_n1(&fast.project_q(&w0)?, fast.theta())?
    } else {
        DensityField::zeros(&space)
    };
    let coeffs = TransportCoeffs::evaluate(fast.potential(), fast.params(), &space);
    let problem = QddProblem::new(coeffs, *fast.params(), w0.density(), n1, config.t_final, config.dt)
        .with_scheme(config.qdd_scheme.into());
    let solver = QddSolver::new(problem)?;
    let traj = solver.solve(&snapped_times(config.t_final, config.dt, &config.output_times())?)?;
    let initial = solver.problem().initial_datum()?.mass();
    let report = mass_report(initial, traj.iter().map(|(_, n)| n.mass()));

    let meta = Metadata::new(&config.hash(), true)
        .with("eps", eps)
        .with("dt", solver.dt())
        .with("ellipticity", solver.ellipticity())
        .with("mass_initial", report.initial)
        .with("mass_rel_drift", report.drift);
    let mut sink = CsvSink::create(out, &meta, &["t", "x", "n"])?;
    for (t, n) in traj.iter() {
        for (&x, &value) in space.points().iter().zip(n.values()) {
            sink.row(&[t, x, value])?;
        }
    }
    sink.finish()?;
    Ok((format!("{} snapshots; relative mass drift {:e}", traj.len(), report.drift), report))
}

/// The kinetic reference run.
pub fn kinetic_run(config: &ExperimentConfig, out: &Path) -> Result<(String, MassReport)> {
    let eps = config.params.eps;
    let fast = config.fast_operator(eps)?;
    let w0 = config.initial.build(&fast)?;
    let grid = fast.grid().clone();
    let problem = KineticProblem::new(fast, w0, config.t_final, config.dt)?;
    let traj = kinetic_solve(&problem, &snapped_times(config.t_final, config.dt, &config.output_times())?)?;
    let report = mass_report(problem.mass(), traj.iter().map(|(_, w)| w.density().mass()));

    let meta = Metadata::new(&config.hash(), true)
        .with("eps", eps)
        .with("mass_initial", report.initial)
        .with("mass_rel_drift", report.drift);
    let header: &[&str] = match config.kinetic_output {
        KineticOutput::Full => &["t", "x", "v", "w"],
        KineticOutput::Density => &["t", "x", "n"],
    };
    let mut sink = CsvSink::create(out, &meta, header)?;
    for (t, w) in traj.iter() {
        match config.kinetic_output {
            KineticOutput::Full => {
                for (ix, &x) in grid.space().points().iter().enumerate() {
                    for (jv, &v) in grid.v_points().iter().enumerate() {
                        sink.row(&[t, x, v, w.at(ix, jv)])?;
                    }
                }
            }
            KineticOutput::Density => {
                for (&x, &n) in grid.space().points().iter().zip(w.density().values()) {
                    sink.row(&[t, x, n])?;
                }
            }
        }
    }
    sink.finish()?;
    Ok((format!("{} snapshots; relative mass drift {:e}", traj.len(), report.drift), report))
}

/// The convergence sweep plus its per-run files.
pub fn converge_sweep(config: &ExperimentConfig, out: &Path) -> Result<String> {
    let coeffs_check = |eps: f64| -> Result<()> {
        let params = config.physical_params(eps)?;
        let grid = Arc::new(SpaceGrid::new(config.grid.n_x, config.grid.length).map_err(HarnessError::invalid)?);
        check_ellipticity(&TransportCoeffs::evaluate(&config.potential.build(), &params, &grid))?;
        Ok(())
    };
    for &eps in &config.eps_list {
        coeffs_check(eps)?;
    }
    let result = run_sweep(config)?;
    let files = write_sweep(&result, config, out)?;
    let f = result.fit;
    Ok(format!(
        "fitted order {:.4} (95% CI [{:.4}, {:.4}]) from {} points; monotone: {}; {} per-run files",
        f.order,
        f.ci_low,
        f.ci_high,
        f.points,
        result.monotone(),
        files.len()
    ))
}
