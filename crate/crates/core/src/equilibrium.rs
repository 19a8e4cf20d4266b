//! Equilibrium objects: the Maxwellian `F`, its `hbar^2` correction `F2`, the
//! BGK target operator `Omega w = nu n[w] (F + hbar^2 F2)`, the kernel
//! function `M = nu (nu - Theta)^-1 (F + hbar^2 F2)` with its moments, the
//! projections `P w = M n[w]`, `Q = I - P`, and the fast operator
//! `(A + C) w = Theta w - nu w + Omega w`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::field::{DensityField, NormSpec, WignerField};
use crate::grid::PhaseGrid;
use crate::params::PhysicalParams;
use crate::potential::Potential;
use crate::pseudodiff::ThetaOperator;
use crate::{Error, Result};

/// Largest admissible `|n[w]|` for a field declared to have zero mass.
pub const ZERO_MASS_TOL: f64 = 1e-8;

/// Largest admissible `exp(-beta m v_max^2 / 2) v_max^4`, so that second
/// moments of Gaussian-tailed profiles are trustworthy on the box.
pub const GAUSSIAN_TAIL_TOL: f64 = 1e-12;

/// Largest admissible value of the kernel function on the velocity boundary,
/// relative to its maximum.
pub const KERNEL_TAIL_TOL: f64 = 1e-8;

/// `F(v) = (beta m / 2 pi)^{1/2} exp(-beta m v^2 / 2)`.
pub fn maxwellian(params: &PhysicalParams, v: f64) -> f64 {
    let bm = params.beta * params.m;
    libm::sqrt(bm / (2.0 * PI)) * libm::exp(-0.5 * bm * v * v)
}

/// `F2(x, v) = (beta^2 / 24) [-V''/m + beta V'' v^2] F(v)`.
pub fn f2_correction(pot: &Potential, params: &PhysicalParams, grid: &Arc<PhaseGrid>) -> WignerField {
    let (beta, m) = (params.beta, params.m);
    WignerField::from_fn(grid, |x, v| {
        let v2 = pot.derivative(2, x);
        beta * beta / 24.0 * (-v2 / m + beta * v2 * v * v) * maxwellian(params, v)
    })
}

/// Fails when the velocity box truncates the Maxwellian too early.
pub fn check_velocity_box(params: &PhysicalParams, v_max: f64) -> Result<()> {
    let tail = libm::exp(-0.5 * params.beta * params.m * v_max * v_max) * libm::pow(v_max, 4.0);
    if tail < GAUSSIAN_TAIL_TOL {
        Ok(())
    } else {
        Err(Error::VelocityBoxTooSmall { v_max, tail, limit: GAUSSIAN_TAIL_TOL })
    }
}

/// Fails with [`Error::NonZeroMass`] unless `n[w]` vanishes to
/// [`ZERO_MASS_TOL`].
pub fn check_zero_mass(w: &WignerField) -> Result<()> {
    let max_density = w.density().max_abs();
    if max_density <= ZERO_MASS_TOL {
        Ok(())
    } else {
        Err(Error::NonZeroMass { max_density })
    }
}

/// The BGK target `F + hbar^2 F2` and the operator `Omega`.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    params: PhysicalParams,
    target: WignerField,
}

impl Equilibrium {
    pub fn new(pot: &Potential, params: &PhysicalParams, grid: &Arc<PhaseGrid>) -> Result<Self> {
        params.validate()?;
        check_velocity_box(params, grid.v_max())?;
        let h2 = params.hbar * params.hbar;
        let f2 = f2_correction(pot, params, grid);
        let mut target = WignerField::from_fn(grid, |_, v| maxwellian(params, v));
        if h2 != 0.0 {
            target = target.axpy(h2, &f2)?;
        }
        Ok(Self { params: *params, target })
    }

    /// `F + hbar^2 F2` on the grid.
    pub fn target(&self) -> &WignerField {
        &self.target
    }

    pub fn grid(&self) -> &Arc<PhaseGrid> {
        self.target.grid()
    }

    /// `Omega w = nu n[w] (F + hbar^2 F2)`.
    pub fn omega_apply(&self, w: &WignerField) -> Result<WignerField> {
        let n = w.density().scale(self.params.nu);
        self.target.scale_rows(&n)
    }
}

/// The kernel function `M(x, v)` with its numeric moments.
#[derive(Debug, Clone)]
pub struct KernelM {
    field: WignerField,
    zeroth_moment: DensityField,
    first_moment: DensityField,
    second_moment: DensityField,
    tail: f64,
}

impl KernelM {
    /// `M = nu (nu - Theta)^-1 (F + hbar^2 F2)`.
    pub fn new(theta: &ThetaOperator, eq: &Equilibrium) -> Result<Self> {
        let field = theta.resolvent(eq.target())?.scale(theta.params().nu);
        let nv = field.grid().n_v();
        let peak = field.max_abs();
        let tail = field.rows().map(|row| row[0].abs().max(row[nv - 1].abs())).fold(0.0, f64::max) / peak;
        if tail > KERNEL_TAIL_TOL {
            return Err(Error::VelocityBoxTooSmall { v_max: field.grid().v_max(), tail, limit: KERNEL_TAIL_TOL });
        }
        Ok(Self {
            zeroth_moment: field.density(),
            first_moment: field.velocity_moment(1),
            second_moment: field.velocity_moment(2),
            field,
            tail,
        })
    }

    pub fn field(&self) -> &WignerField {
        &self.field
    }

    pub fn grid(&self) -> &Arc<PhaseGrid> {
        self.field.grid()
    }

    pub fn zeroth_moment(&self) -> &DensityField {
        &self.zeroth_moment
    }

    pub fn first_moment(&self) -> &DensityField {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &DensityField {
        &self.second_moment
    }

    /// Largest boundary value of `|M|` relative to its maximum.
    pub fn tail(&self) -> f64 {
        self.tail
    }
}

/// Closed-form moments `(int M, int v M, int v^2 M)` at `x`.
pub fn kernel_moments_closed_form(pot: &Potential, params: &PhysicalParams, x: f64) -> (f64, f64, f64) {
    let PhysicalParams { hbar, m, beta, nu, .. } = *params;
    let (v1, v2) = (pot.derivative(1, x), pot.derivative(2, x));
    let m1 = -v1 / (nu * m);
    let m2 = 1.0 / (beta * m) + 2.0 * v1 * v1 / (nu * nu * m * m) + beta * hbar * hbar * v2 / (12.0 * m * m);
    (1.0, m1, m2)
}

/// `P w = M n[w]`.
pub fn project_p(w: &WignerField, kernel: &KernelM) -> Result<WignerField> {
    kernel.field.scale_rows(&w.density())
}

/// `Q w = w - M n[w]`.
pub fn project_q(w: &WignerField, kernel: &KernelM) -> Result<WignerField> {
    w.sub(&project_p(w, kernel)?)
}

/// The fast operator `A + C` with everything it needs, built once per
/// (potential, parameters, grid).
#[derive(Debug, Clone)]
pub struct FastOperator {
    theta: ThetaOperator,
    equilibrium: Equilibrium,
    kernel: KernelM,
}

impl FastOperator {
    pub fn new(pot: &Potential, params: &PhysicalParams, grid: &Arc<PhaseGrid>) -> Result<Self> {
        let equilibrium = Equilibrium::new(pot, params, grid)?;
        let theta = ThetaOperator::new(pot, params, grid);
        let kernel = KernelM::new(&theta, &equilibrium)?;
        Ok(Self { theta, equilibrium, kernel })
    }

    pub fn theta(&self) -> &ThetaOperator {
        &self.theta
    }

    pub fn equilibrium(&self) -> &Equilibrium {
        &self.equilibrium
    }

    pub fn kernel(&self) -> &KernelM {
        &self.kernel
    }

    pub fn params(&self) -> &PhysicalParams {
        self.theta.params()
    }

    pub fn potential(&self) -> &Potential {
        self.theta.potential()
    }

    pub fn grid(&self) -> &Arc<PhaseGrid> {
        self.theta.grid()
    }

    /// `(A + C) w = Theta w - nu w + Omega w`.
    pub fn apply(&self, w: &WignerField) -> Result<WignerField> {
        let nu = self.params().nu;
        self.theta.apply(w)?.axpy(-nu, w)?.add(&self.equilibrium.omega_apply(w)?)
    }

    /// The zero-mass solution of `(A + C) w = h` for zero-mass `h`. On that
    /// subspace `Omega` vanishes, so `w = -(nu - Theta)^-1 h`.
    pub fn solve_zero_mass(&self, h: &WignerField) -> Result<WignerField> {
        check_zero_mass(h)?;
        Ok(self.theta.resolvent(h)?.scale(-1.0))
    }

    pub fn project_p(&self, w: &WignerField) -> Result<WignerField> {
        project_p(w, &self.kernel)
    }

    pub fn project_q(&self, w: &WignerField) -> Result<WignerField> {
        project_q(w, &self.kernel)
    }
}

/// Lower bound on `||(A + C) w - M||_{X_k}` over all zero-mass `w`.
///
/// Every such residual `r` has `int r dv = -1` at each `x`, because
/// `Theta`, `-nu + Omega` and zero-mass `w` contribute no mass while `M` has
/// unit mass. Cauchy-Schwarz with the weight `1 + |v|^{2k}` then bounds the
/// weighted norm from below, for any candidate whatsoever.
pub fn unsolvability_bound(grid: &PhaseGrid, spec: NormSpec) -> f64 {
    let dv = grid.dv();
    let inv_weight: f64 = grid.v_points().iter().map(|&v| dv / spec.weight(v)).sum();
    libm::sqrt(grid.space().length() / inv_weight)
}

/// Maxwellian samples on the velocity grid.
pub fn maxwellian_row(params: &PhysicalParams, grid: &PhaseGrid) -> Vec<f64> {
    grid.v_points().iter().map(|&v| maxwellian(params, v)).collect()
}
