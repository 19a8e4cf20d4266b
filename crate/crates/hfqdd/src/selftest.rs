//! The invariant suite behind `selftest`: structural identities checked on
//! seeded random fields and a small fixed configuration.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use hfqdd_core::dft::{dft_v, idft_v};
use hfqdd_core::equilibrium::{kernel_moments_closed_form, maxwellian, FastOperator};
use hfqdd_core::kinetic::{kinetic_solve, KineticProblem};
use hfqdd_core::layer::semigroup_g;
use hfqdd_core::potential::catalog;
use hfqdd_core::qdd::{QddProblem, QddSolver};
use hfqdd_core::transport::TransportCoeffs;
use hfqdd_core::{DensityField, NormSpec, PhaseGrid, PhysicalParams, Potential, PotentialKind, WignerField};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{HarnessError, Result};
use crate::output::{format_value, CsvSink, Metadata};

/// Random fields drawn per randomized check.
pub const RANDOM_FIELDS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Measured defect (smaller is better).
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn random_field(rng: &mut StdRng, grid: &Arc<PhaseGrid>) -> WignerField {
    WignerField::from_fn(grid, |_, v| rng.gen_range(-1.0..1.0) * (-0.25 * v * v).exp())
}

fn worst(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Runs every check; fails only on internal errors, not on a failed check.
pub fn run_checks(seed: u64) -> Result<Vec<Check>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let grid = PhaseGrid::build(16, 2.0 * PI, 128, 10.0)?;
    let params = PhysicalParams::unit(0.1)?;
    let pot = Potential::new(PotentialKind::Cosine { amplitude: 0.2, k0: 1.0 });
    let fast = Arc::new(FastOperator::new(&pot, &params, &grid)?);
    let spec = NormSpec::default();
    let fields: Vec<WignerField> = (0..RANDOM_FIELDS).map(|_| random_field(&mut rng, &grid)).collect();
    let mut checks = Vec::new();

    let round_trip = worst(fields.iter().map(|w| idft_v(&dft_v(w)).sub(w).map_or(f64::INFINITY, |d| d.max_abs())));
    checks.push(Check { name: "dft_round_trip", value: round_trip, tolerance: 1e-12 });

    let mut triangle = f64::NEG_INFINITY;
    let mut linearity = 0.0f64;
    for pair in fields.chunks_exact(2) {
        let (a, b) = (&pair[0], &pair[1]);
        triangle = triangle.max(a.add(b)?.norm_xk(spec) - a.norm_xk(spec) - b.norm_xk(spec));
        let (s, t) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let lhs = a.scale(s).add(&b.scale(t))?.density();
        let rhs = a.density().scale(s).add(&b.density().scale(t))?;
        linearity = linearity.max(lhs.sub(&rhs)?.max_abs());
    }
    checks.push(Check { name: "norm_triangle_excess", value: triangle.max(0.0), tolerance: 1e-12 });
    checks.push(Check { name: "density_linearity", value: linearity, tolerance: 1e-12 });

    let mut odd = 0.0f64;
    for pot in catalog() {
        for _ in 0..RANDOM_FIELDS {
            let (x, eta) = (rng.gen_range(-3.0..3.0), rng.gen_range(-20.0..20.0));
            let (a, b) = (pot.delta_v(&params, x, eta), pot.delta_v(&params, x, -eta));
            odd = odd.max((a + b).abs() / (1.0 + a.abs()));
        }
    }
    checks.push(Check { name: "delta_v_odd", value: odd, tolerance: 1e-13 });

    let theta = fast.theta();
    let mut skew = 0.0f64;
    let mut mass = 0.0f64;
    for w in &fields {
        let tw = theta.apply(w)?;
        skew = skew.max(tw.inner_l2(w)?.abs() / w.inner_l2(w)?);
        mass = mass.max(tw.density().max_abs());
    }
    checks.push(Check { name: "theta_skew", value: skew, tolerance: 1e-10 });
    checks.push(Check { name: "theta_mass", value: mass, tolerance: 1e-12 });

    let kernel = fast.kernel();
    let moments = [kernel.zeroth_moment(), kernel.first_moment(), kernel.second_moment()];
    let mut moment_err = 0.0f64;
    for (i, &x) in grid.space().points().iter().enumerate() {
        let (e0, e1, e2) = kernel_moments_closed_form(&pot, &params, x);
        for (m, e) in moments.iter().zip([e0, e1, e2]) {
            moment_err = moment_err.max((m.values()[i] - e).abs() / e.abs().max(1e-8));
        }
    }
    checks.push(Check { name: "kernel_moments", value: moment_err, tolerance: 1e-6 });

    let n = DensityField::from_fn(grid.space_arc(), |x| 1.0 + 0.5 * x.cos());
    let nm = kernel.field().scale_rows(&n)?;
    let fixed = fast.apply(&nm)?.norm_xk(spec);
    checks.push(Check { name: "kernel_fixed_point", value: fixed, tolerance: 1e-8 });

    let mut solve = 0.0f64;
    let mut semigroup = 0.0f64;
    for w in fields.iter().take(10) {
        let h = fast.project_q(w)?;
        let sol = fast.solve_zero_mass(&h)?;
        solve = solve.max(fast.apply(&sol)?.sub(&h)?.norm_xk(spec));
        let tau = rng.gen_range(0.0..5.0);
        let g = semigroup_g(theta, &h, tau)?;
        semigroup = semigroup.max((g.norm_l2() - (-params.nu * tau).exp() * h.norm_l2()).abs());
    }
    checks.push(Check { name: "zero_mass_solve", value: solve, tolerance: 1e-9 });
    checks.push(Check { name: "semigroup_decay", value: semigroup, tolerance: 1e-12 });

    let w0 = WignerField::from_fn(&grid, |x, v| {
        (1.0 + 0.5 * x.cos()) * maxwellian(&params, v) + 0.2 * x.sin() * v * maxwellian(&params, v)
    });
    let kinetic = kinetic_solve(&KineticProblem::new(fast.clone(), w0.clone(), 0.2, 0.01)?, &[0.2])?;
    let m0 = w0.density().mass();
    let kinetic_mass = worst(kinetic.iter().map(|(_, w)| (w.density().mass() - m0).abs() / m0));
    checks.push(Check { name: "kinetic_mass", value: kinetic_mass, tolerance: 1e-10 });

    let coeffs = TransportCoeffs::evaluate(&pot, &params, grid.space_arc());
    let problem = QddProblem::new(coeffs, params, n.clone(), DensityField::zeros(grid.space_arc()), 0.2, 0.01);
    let qdd = QddSolver::new(problem)?.solve(&[0.2])?;
    let qdd_mass = worst(qdd.iter().map(|(_, m)| (m.mass() - n.mass()).abs() / n.mass()));
    checks.push(Check { name: "qdd_mass", value: qdd_mass, tolerance: 1e-10 });

    Ok(checks)
}

/// Runs the suite, optionally writes `check, value, tolerance, pass`, and
/// fails if any check does.
pub fn selftest(seed: u64, config_hash: &str, out: Option<&Path>) -> Result<String> {
    let checks = run_checks(seed)?;
    if let Some(path) = out {
        let meta = Metadata::new(config_hash, true).with("seed", seed);
        let mut sink = CsvSink::create(path, &meta, &["check", "value", "tolerance", "pass"])?;
        for c in &checks {
            sink.record(&[
                c.name.to_string(),
                format_value(c.value),
                format_value(c.tolerance),
                c.passed().to_string(),
            ])?;
        }
        sink.finish()?;
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{} = {:e} > {:e}", c.name, c.value, c.tolerance))
        .collect();
    if failed.is_empty() {
        Ok(format!("{} checks passed (seed {seed})", checks.len()))
    } else {
        Err(HarnessError::SelfTestFailed(failed.join("; ")))
    }
}
