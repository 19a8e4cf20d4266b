//! Reference solver for the scaled Wigner-BGK equation
//!
//! ```text
//! dw/dt = -v dw/dx + (1/eps) (Theta w - nu w + nu n[w] (F + hbar^2 F2)).
//! ```
//!
//! Strang splitting `T(dt/2) C(dt) T(dt/2)` of two substeps that are each
//! exact on the grid:
//!
//! - `T`: free streaming, an exact periodic shift of every `v` column by
//!   `v dt`;
//! - `C`: the collision-field flow. It leaves `n[w]` invariant (`Theta` and
//!   `-nu + Omega` carry no mass), so with `n` frozen each `(x, eta)` mode
//!   obeys a scalar linear ODE that is integrated in closed form.
//!
//! Neither substep has a stability restriction tied to `eps`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::dft::{dft_v, dx_field, map_velocity_spectrum, shift_columns};
use crate::equilibrium::FastOperator;
use crate::field::{StepPlan, Trajectory, WignerField};
use crate::grid::PhaseGrid;
use crate::{Error, Result};

/// `|a dt|` below which `(exp(a dt) - 1)/a` uses its Taylor series.
const SERIES_THRESHOLD: f64 = 1e-6;

/// Norm growth (relative to the datum) treated as divergence.
pub const MAX_GROWTH: f64 = 1e3;

/// `(exp(z) - 1) / z` with a series fallback near zero.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_THRESHOLD {
        Complex64::new(1.0, 0.0) + z * (0.5 + z / 6.0)
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Per-mode factors of the collision-field flow over one fixed step.
#[derive(Debug, Clone)]
pub struct CollisionStep {
    dt: f64,
    /// `exp(a dt)`, `a = (i delta_v - nu)/eps`, row-major over `(x, eta)`.
    decay: Vec<Complex64>,
    /// `(exp(a dt) - 1)/a * (nu/eps) * F(F + hbar^2 F2)`, per unit density.
    source: Vec<Complex64>,
}

impl CollisionStep {
    pub fn new(fast: &FastOperator, dt: f64) -> Self {
        let grid = fast.grid();
        let p = fast.params();
        let target = dft_v(fast.equilibrium().target());
        let nv = grid.n_v();
        let mut decay = Vec::with_capacity(grid.size());
        let mut source = Vec::with_capacity(grid.size());
        for ix in 0..grid.n_x() {
            for k in 0..nv {
                let a = Complex64::new(-p.nu, fast.theta().delta(ix, k)) / p.eps;
                let z = a * dt;
                decay.push(z.exp());
                source.push(phi1(z) * dt * (p.nu / p.eps) * target.at(ix, k));
            }
        }
        Self { dt, decay, source }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Applies the exact collision-field flow to `w`.
    pub fn apply(&self, w: &WignerField) -> WignerField {
        let nv = w.grid().n_v();
        let n = w.density();
        let (out, _) = map_velocity_spectrum(w, |ix, spec| {
            let ni = n.values()[ix];
            let (d, s) = (&self.decay[ix * nv..(ix + 1) * nv], &self.source[ix * nv..(ix + 1) * nv]);
            for ((a, &g), &q) in spec.iter_mut().zip(d).zip(s) {
                *a = g * *a + q * ni;
            }
        });
        out
    }
}

/// One collision-field substep of length `dt`.
pub fn collision_field_substep(fast: &FastOperator, w: &WignerField, dt: f64) -> Result<WignerField> {
    w.check_grid(fast.grid())?;
    Ok(CollisionStep::new(fast, dt).apply(w))
}

/// Exact free streaming over `dt`: `w(x, v) -> w(x - v dt, v)`.
pub fn transport_substep(w: &WignerField, dt: f64) -> WignerField {
    shift_columns(w, |v| v * dt)
}

/// `S w = -v dw/dx`, spectrally.
pub fn apply_streaming(w: &WignerField) -> WignerField {
    dx_field(w).weight_v(|v| -v)
}

#[derive(Debug, Clone)]
pub struct KineticProblem {
    pub fast: Arc<FastOperator>,
    pub w0: WignerField,
    pub t_final: f64,
    pub dt: f64,
}

impl KineticProblem {
    /// Fails unless the potential is periodic on the box and `w0` lives on
    /// the operator's grid.
    pub fn new(fast: Arc<FastOperator>, w0: WignerField, t_final: f64, dt: f64) -> Result<Self> {
        if !fast.potential().is_periodic_on(fast.grid().space()) {
            return Err(Error::AperiodicPotential);
        }
        w0.check_grid(fast.grid())?;
        if !w0.is_finite() {
            return Err(Error::InvalidParameter { name: "w0", value: f64::NAN });
        }
        Ok(Self { fast, w0, t_final, dt })
    }

    pub fn grid(&self) -> &Arc<PhaseGrid> {
        self.fast.grid()
    }

    /// Total mass `int int w dx dv` of the datum.
    pub fn mass(&self) -> f64 {
        self.w0.density().mass()
    }
}

/// Strang-split time marching; records states at the output times snapped
/// to the step grid.
pub fn kinetic_solve(problem: &KineticProblem, outputs: &[f64]) -> Result<Trajectory<WignerField>> {
    let plan = StepPlan::new(problem.t_final, problem.dt, outputs)?;
    let collision = CollisionStep::new(&problem.fast, plan.dt);
    let half = 0.5 * plan.dt;
    let norm0 = problem.w0.norm_l2().max(f64::MIN_POSITIVE);
    let mut traj = Trajectory::new();
    let mut w = problem.w0.clone();
    // `w` is the exact state at `step` unless `pending` is set, in which case
    // a trailing half streaming step is still owed (merged into the next
    // step's leading half step when no output intervenes).
    let mut pending = false;
    let mut next = plan.output_steps.iter().peekable();
    for step in 0..=plan.n_steps {
        if next.peek() == Some(&&step) {
            if pending {
                w = transport_substep(&w, half);
                pending = false;
            }
            traj.push(plan.time(step), w.clone());
            next.next();
        }
        if step == plan.n_steps {
            break;
        }
        w = transport_substep(&w, if pending { plan.dt } else { half });
        w = collision.apply(&w);
        pending = true;
        let growth = w.norm_l2() / norm0;
        if growth.is_nan() || growth > MAX_GROWTH {
            return Err(Error::StabilityViolation { step: step + 1, growth });
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::maxwellian;
    use crate::field::DensityField;
    use crate::params::PhysicalParams;
    use crate::potential::{Potential, PotentialKind};
    use core::f64::consts::PI;

    fn cosine() -> Potential {
        Potential::new(PotentialKind::Cosine { amplitude: 0.2, k0: 1.0 })
    }

    fn fast(pot: &Potential, p: PhysicalParams, nx: usize, nv: usize) -> Arc<FastOperator> {
        let g = PhaseGrid::build(nx, 2.0 * PI, nv, 10.0).unwrap();
        Arc::new(FastOperator::new(pot, &p, &g).unwrap())
    }

    fn datum(op: &FastOperator) -> WignerField {
        let p = *op.params();
        WignerField::from_fn(op.grid(), |x, v| {
            (1.0 + 0.5 * libm::cos(x)) * maxwellian(&p, v) + 0.3 * libm::sin(x) * v * maxwellian(&p, v - 0.5)
        })
    }

    #[test]
    fn phi1_series_matches_closed_form() {
        for z in [Complex64::new(-1e-7, 2e-7), Complex64::new(1e-3, -2e-3), Complex64::new(-3.0, 1.0)] {
            let direct = (z.exp() - 1.0) / z;
            assert!((phi1(z) - direct).norm() < 1e-9);
        }
    }

    #[test]
    fn collision_keeps_kernel_states_fixed() {
        let op = fast(&cosine(), PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.05).unwrap(), 32, 128);
        let n = DensityField::from_fn(op.grid().space_arc(), |x| 1.0 + 0.5 * libm::sin(x));
        let nm = op.kernel().field().scale_rows(&n).unwrap();
        let out = collision_field_substep(&op, &nm, 0.01).unwrap();
        assert!(out.sub(&nm).unwrap().norm_l2() <= 1e-9 * nm.norm_l2());
    }

    #[test]
    fn collision_preserves_density_and_zero_step_is_identity() {
        let op = fast(&cosine(), PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.05).unwrap(), 32, 128);
        let w = datum(&op);
        let out = collision_field_substep(&op, &w, 0.03).unwrap();
        assert!(out.density().sub(&w.density()).unwrap().max_abs() <= 1e-12);
        let same = collision_field_substep(&op, &w, 0.0).unwrap();
        assert!(same.sub(&w).unwrap().max_abs() <= 1e-14);
    }

    #[test]
    fn homogeneous_relaxation_is_exact() {
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.3, 0.1).unwrap();
        let op = fast(&Potential::zero().with_offset(0.4), p, 16, 128);
        let w0 = WignerField::from_fn(op.grid(), |_, v| 2.0 * maxwellian(&p, v - 1.0));
        let f = WignerField::from_fn(op.grid(), |_, v| maxwellian(&p, v));
        let exact = |t: f64| {
            let n = w0.density();
            let nf = f.scale_rows(&n).unwrap();
            nf.add(&w0.sub(&nf).unwrap().scale(libm::exp(-p.nu * t / p.eps))).unwrap()
        };
        let out = collision_field_substep(&op, &w0, 0.07).unwrap();
        assert!(out.sub(&exact(0.07)).unwrap().norm_l2() <= 1e-10 * w0.norm_l2());
        let pr = KineticProblem::new(op.clone(), w0.clone(), 0.5, 0.01).unwrap();
        let traj = kinetic_solve(&pr, &[0.5]).unwrap();
        let rel = traj.at(0.5).unwrap().sub(&exact(0.5)).unwrap().norm_l2() / exact(0.5).norm_l2();
        assert!(rel <= 1e-8, "{rel}");
    }

    #[test]
    fn transport_is_an_exact_shift() {
        let g = PhaseGrid::build(64, 2.0 * PI, 16, 10.0).unwrap();
        let w = WignerField::from_fn(&g, |x, v| libm::exp(libm::sin(x)) * (1.0 + 0.1 * v));
        assert!(transport_substep(&w, 0.0).sub(&w).unwrap().max_abs() < 1e-14);
        // v_j * dt is an integer number of cells when dt = dx / dv.
        let dt = g.space().dx() / g.dv();
        let moved = transport_substep(&w, dt);
        let (nx, nv) = (g.n_x(), g.n_v());
        let mut worst = 0.0f64;
        for j in 0..nv {
            let cells = libm::round(g.v_points()[j] * dt / g.space().dx()) as i64;
            for i in 0..nx {
                let src = (i as i64 - cells).rem_euclid(nx as i64) as usize;
                worst = worst.max((moved.at(i, j) - w.at(src, j)).abs());
            }
        }
        assert!(worst <= 1e-10, "{worst}");
        assert!((moved.norm_l2() - w.norm_l2()).abs() <= 1e-12 * w.norm_l2());
        let flat = WignerField::from_fn(&g, |_, v| libm::exp(-v * v));
        assert!(transport_substep(&flat, 0.37).sub(&flat).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn mass_is_conserved_over_unit_time() {
        let op = fast(&cosine(), PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.1).unwrap(), 32, 128);
        let pr = KineticProblem::new(op.clone(), datum(&op), 1.0, 0.01).unwrap();
        let traj = kinetic_solve(&pr, &[0.25, 0.5, 1.0]).unwrap();
        for (_, w) in traj.iter() {
            assert!((w.density().mass() - pr.mass()).abs() <= 1e-10 * pr.mass());
        }
    }

    #[test]
    fn aperiodic_potentials_are_refused() {
        let p = PhysicalParams::default();
        let op = fast(&Potential::new(PotentialKind::Linear { e0: 0.3 }), p, 16, 128);
        let w0 = WignerField::zeros(op.grid());
        assert!(matches!(KineticProblem::new(op, w0, 1.0, 0.1), Err(Error::AperiodicPotential)));
    }

    #[test]
    fn small_eps_stays_bounded() {
        let op = fast(&cosine(), PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1e-3).unwrap(), 32, 128);
        let pr = KineticProblem::new(op.clone(), datum(&op), 0.2, 0.02).unwrap();
        let w = kinetic_solve(&pr, &[0.2]).unwrap().at(0.2).unwrap().clone();
        assert!(w.is_finite() && w.norm_l2() <= 2.0 * pr.w0.norm_l2());
    }

    #[test]
    fn strang_splitting_is_second_order() {
        let op = fast(&cosine(), PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.2).unwrap(), 32, 128);
        let w0 = datum(&op);
        let t = 0.4;
        let run = |dt: f64| {
            let pr = KineticProblem::new(op.clone(), w0.clone(), t, dt).unwrap();
            kinetic_solve(&pr, &[t]).unwrap().at(t).unwrap().clone()
        };
        let dt = 0.04;
        let reference = run(dt / 8.0);
        let e1 = run(dt).sub(&reference).unwrap().norm_l2();
        let e2 = run(dt / 2.0).sub(&reference).unwrap().norm_l2();
        let order = libm::log2(e1 / e2);
        assert!(order > 1.8 && order < 2.2, "{order}");
    }

    #[test]
    fn streaming_operator_is_minus_v_dx() {
        let g = PhaseGrid::build(32, 2.0 * PI, 16, 10.0).unwrap();
        let w = WignerField::from_fn(&g, |x, v| libm::sin(2.0 * x) * v);
        let expected = WignerField::from_fn(&g, |x, v| -v * 2.0 * libm::cos(2.0 * x) * v);
        assert!(apply_streaming(&w).sub(&expected).unwrap().max_abs() < 1e-11);
    }
}
