//! Solver for the high-field quantum drift-diffusion equation in divergence
//! form on the periodic grid,
//!
//! ```text
//! dn/dt = d/dx [(E + eps W) n] + eps d/dx (D dn/dx),
//! ```
//!
//! started from the corrected datum `n0 + eps n1`.
//!
//! Both flux operators are assembled as dense matrices whose columns sum to
//! zero, so every stage conserves the discrete mass exactly (to rounding).
//! One step is the symmetric composition drift(dt/2), diffusion(dt),
//! drift(dt/2): explicit midpoint for drift, Crank-Nicolson for diffusion.

use alloc::vec::Vec;

use crate::dft::{dx_density, spectral_derivative_matrix};
use crate::equilibrium::check_zero_mass;
use crate::field::{DensityField, StepPlan, Trajectory, WignerField};
use crate::linalg::{Lu, Matrix};
use crate::params::PhysicalParams;
use crate::pseudodiff::ThetaOperator;
use crate::transport::{check_ellipticity, TransportCoeffs};
use crate::{Error, Result};

/// Advective CFL number of the drift stages.
pub const DRIFT_CFL: f64 = 0.25;

/// Norm growth (relative to the datum) treated as divergence.
pub const MAX_GROWTH: f64 = 1e3;

/// `n1 = int v d/dx (i delta_v - nu)^-1 psi0 dv = -d/dx int v (nu - Theta)^-1 psi0 dv`.
pub fn initial_correction_n1(psi0: &WignerField, theta: &ThetaOperator) -> Result<DensityField> {
    check_zero_mass(psi0)?;
    let r = theta.resolvent(psi0)?;
    Ok(dx_density(&r.velocity_moment(1)).scale(-1.0))
}

/// Spatial discretization of the flux divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxScheme {
    /// Fourier differentiation of fluxes (spectrally accurate).
    #[default]
    Spectral,
    /// Second-order centered differences with half-point diffusivities.
    Centered,
}

#[derive(Debug, Clone)]
pub struct QddProblem {
    pub coeffs: TransportCoeffs,
    pub params: PhysicalParams,
    pub n0: DensityField,
    pub n1: DensityField,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: FluxScheme,
}

impl QddProblem {
    pub fn new(
        coeffs: TransportCoeffs,
        params: PhysicalParams,
        n0: DensityField,
        n1: DensityField,
        t_final: f64,
        dt: f64,
    ) -> Self {
        Self { coeffs, params, n0, n1, t_final, dt, scheme: FluxScheme::Spectral }
    }

    pub fn with_scheme(mut self, scheme: FluxScheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// `n(0) = n0 + eps n1`.
    pub fn initial_datum(&self) -> Result<DensityField> {
        self.n0.axpy(self.params.eps, &self.n1)
    }

    /// Largest step allowed by the advective CFL heuristic.
    pub fn dt_limit(&self) -> f64 {
        let speed = self.coeffs.max_speed(self.params.eps);
        if speed == 0.0 {
            f64::INFINITY
        } else {
            DRIFT_CFL * self.coeffs.grid().dx() / speed
        }
    }
}

/// Assembled operators for one problem.
#[derive(Debug, Clone)]
pub struct QddSolver {
    problem: QddProblem,
    drift: Matrix,
    /// `I + (dt/2) B`.
    explicit_half: Matrix,
    /// LU of `I - (dt/2) B`.
    implicit_half: Lu,
    plan_dt: f64,
    ellipticity: f64,
}

impl QddSolver {
    /// Checks ellipticity and the step size against the CFL heuristic, then
    /// assembles the step operators for the step of [`StepPlan::new`].
    pub fn new(problem: QddProblem) -> Result<Self> {
        problem.params.validate()?;
        let ellipticity = check_ellipticity(&problem.coeffs)?;
        let grid = problem.coeffs.grid().clone();
        if **problem.n0.grid() != *grid || **problem.n1.grid() != *grid {
            return Err(Error::GridMismatch);
        }
        let limit = problem.dt_limit();
        if problem.dt > limit {
            return Err(Error::TimeStepTooLarge { dt: problem.dt, limit });
        }
        let plan_dt = StepPlan::new(problem.t_final, problem.dt, &[])?.dt;
        let n = grid.len();
        let eps = problem.params.eps;
        let speed: Vec<f64> =
            problem.coeffs.e.values().iter().zip(problem.coeffs.w.values()).map(|(e, w)| e + eps * w).collect();
        let (drift, diffusion) = match problem.scheme {
            FluxScheme::Spectral => {
                let dx = Matrix::from_row_major(n, spectral_derivative_matrix(&grid));
                let diffusion = dx.scale_columns(problem.coeffs.d.values()).matmul(&dx).combine(eps, &dx, 0.0);
                (dx.scale_columns(&speed), diffusion)
            }
            FluxScheme::Centered => centered_operators(grid.dx(), &speed, problem.coeffs.d.values(), eps),
        };
        let id = Matrix::identity(n);
        let explicit_half = id.combine(1.0, &diffusion, 0.5 * plan_dt);
        let implicit_half = Lu::factor(id.combine(1.0, &diffusion, -0.5 * plan_dt))?;
        Ok(Self { problem, drift, explicit_half, implicit_half, plan_dt, ellipticity })
    }

    pub fn problem(&self) -> &QddProblem {
        &self.problem
    }

    /// Ellipticity constant `min D` found at setup.
    pub fn ellipticity(&self) -> f64 {
        self.ellipticity
    }

    /// The step actually taken (the requested step shrunk to divide `t_final`).
    pub fn dt(&self) -> f64 {
        self.plan_dt
    }

    fn drift_stage(&self, n: &[f64], h: f64) -> Vec<f64> {
        let k1 = self.drift.matvec(n);
        let mid: Vec<f64> = n.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
        let k2 = self.drift.matvec(&mid);
        n.iter().zip(&k2).map(|(a, k)| a + h * k).collect()
    }

    /// One step of size [`Self::dt`].
    pub fn step(&self, n: &DensityField) -> Result<DensityField> {
        let half = 0.5 * self.plan_dt;
        let a = self.drift_stage(n.values(), half);
        let b = self.implicit_half.solve(&self.explicit_half.matvec(&a));
        let c = self.drift_stage(&b, half);
        DensityField::from_values(n.grid(), c)
    }

    /// Marches from `n0 + eps n1` to `t_final`, recording the states at the
    /// output times (snapped to the step grid).
    pub fn solve(&self, outputs: &[f64]) -> Result<Trajectory<DensityField>> {
        let plan = StepPlan::new(self.problem.t_final, self.problem.dt, outputs)?;
        let mut n = self.problem.initial_datum()?;
        let norm0 = n.norm_l2().max(f64::MIN_POSITIVE);
        let mut traj = Trajectory::new();
        let mut next = plan.output_steps.iter().peekable();
        for step in 0..=plan.n_steps {
            if next.peek() == Some(&&step) {
                traj.push(plan.time(step), n.clone());
                next.next();
            }
            if step == plan.n_steps {
                break;
            }
            n = self.step(&n)?;
            let growth = n.norm_l2() / norm0;
            if growth.is_nan() || growth > MAX_GROWTH {
                return Err(Error::StabilityViolation { step: step + 1, growth });
            }
        }
        Ok(traj)
    }
}

/// Centered flux differences: drift `(f_{i+1} - f_{i-1}) / 2h` with
/// `f = s n`, diffusion `(D_{i+1/2}(n_{i+1} - n_i) - D_{i-1/2}(n_i - n_{i-1})) / h^2`.
fn centered_operators(h: f64, speed: &[f64], d: &[f64], eps: f64) -> (Matrix, Matrix) {
    let n = speed.len();
    let mut drift = Matrix::zeros(n);
    let mut diffusion = Matrix::zeros(n);
    for i in 0..n {
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        drift.set(i, r, speed[r] / (2.0 * h));
        drift.set(i, l, -speed[l] / (2.0 * h));
        let dr = 0.5 * (d[i] + d[r]) * eps / (h * h);
        let dl = 0.5 * (d[i] + d[l]) * eps / (h * h);
        diffusion.set(i, r, diffusion.get(i, r) + dr);
        diffusion.set(i, l, diffusion.get(i, l) + dl);
        diffusion.set(i, i, diffusion.get(i, i) - dr - dl);
    }
    (drift, diffusion)
}

/// Convenience wrapper: one step of `problem` from `n`.
pub fn qdd_step(problem: &QddProblem, n: &DensityField) -> Result<DensityField> {
    QddSolver::new(problem.clone())?.step(n)
}

/// Convenience wrapper: full solve of `problem`.
pub fn qdd_solve(problem: &QddProblem, outputs: &[f64]) -> Result<Trajectory<DensityField>> {
    QddSolver::new(problem.clone())?.solve(outputs)
}
