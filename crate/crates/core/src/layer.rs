//! Initial-layer terms on the fast time `tau = t / eps`.
//!
//! With `psi0 = Q w0`, `phi0 = P w0 = n0 M`, `R = (nu - Theta)^-1` and the
//! decaying group `G(tau) = exp((Theta - nu) tau)` on zero-mass fields:
//!
//! ```text
//! psi0~(tau) = G(tau) psi0
//! phi1~(tau) = P S [Q(A+C)Q]^-1 G(tau) psi0 = M int v d/dx R G(tau) psi0 dv
//! psi1~(tau) = G(tau) psi1~(0) + int_0^tau G(tau - s) Q S G(s) psi0 ds
//! psi1~(0)   = [Q(A+C)Q]^-1 Q S phi0 = -R Q S (n0 M)
//! ```
//!
//! using `[Q(A+C)Q]^-1 = -R` on zero-mass fields and `S = -v d/dx`.

use alloc::sync::Arc;

use crate::dft::dx_density;
use crate::equilibrium::{check_zero_mass, FastOperator};
use crate::field::{NormSpec, WignerField};
use crate::kinetic::apply_streaming;
use crate::pseudodiff::ThetaOperator;
use crate::quadrature::composite_gauss_legendre;
use crate::{Error, Result};

/// Gauss-Legendre nodes per panel of the Duhamel quadrature.
pub const NODES_PER_PANEL: usize = 8;
/// Panels per unit `tau` at the coarsest level (32 nodes per unit `tau`).
pub const PANELS_PER_UNIT_TAU: f64 = 4.0;
/// Largest `X_k` difference between successive refinements accepted.
pub const DUHAMEL_TOL: f64 = 1e-8;
/// Panel doublings attempted before giving up.
pub const MAX_REFINEMENTS: usize = 6;

/// `G(tau) w = exp(-nu tau) F^-1 exp(i delta_v tau) F w` for zero-mass `w`.
pub fn semigroup_g(theta: &ThetaOperator, w: &WignerField, tau: f64) -> Result<WignerField> {
    check_zero_mass(w)?;
    theta.decay_group(w, tau)
}

#[derive(Debug, Clone)]
pub struct LayerTerms {
    fast: Arc<FastOperator>,
    psi0: WignerField,
    psi1_start: WignerField,
    spec: NormSpec,
}

impl LayerTerms {
    pub fn new(fast: Arc<FastOperator>, w0: &WignerField) -> Result<Self> {
        w0.check_grid(fast.grid())?;
        let psi0 = fast.project_q(w0)?;
        let phi0 = fast.project_p(w0)?;
        let qs_phi0 = fast.project_q(&apply_streaming(&phi0))?;
        let psi1_start = fast.solve_zero_mass(&qs_phi0)?;
        Ok(Self { fast, psi0, psi1_start, spec: NormSpec::default() })
    }

    pub fn with_norm(mut self, spec: NormSpec) -> Self {
        self.spec = spec;
        self
    }

    pub fn fast(&self) -> &Arc<FastOperator> {
        &self.fast
    }

    /// The fluctuation part `Q w0` of the datum.
    pub fn psi0(&self) -> &WignerField {
        &self.psi0
    }

    pub fn psi0_tilde(&self, tau: f64) -> Result<WignerField> {
        semigroup_g(self.fast.theta(), &self.psi0, tau)
    }

    pub fn phi1_tilde(&self, tau: f64) -> Result<WignerField> {
        let r = self.fast.theta().resolvent(&self.psi0_tilde(tau)?)?;
        let current = dx_density(&r.velocity_moment(1));
        self.fast.kernel().field().scale_rows(&current)
    }

    /// `psi1~(0)`.
    pub fn psi1_start(&self) -> &WignerField {
        &self.psi1_start
    }

    /// `int_0^tau G(tau - s) Q S G(s) psi0 ds` on `panels` equal panels.
    pub fn duhamel(&self, tau: f64, panels: usize) -> Result<WignerField> {
        let theta = self.fast.theta();
        let mut acc = WignerField::zeros(self.fast.grid());
        if tau == 0.0 || self.psi0.max_abs() == 0.0 {
            return Ok(acc);
        }
        for (s, weight) in composite_gauss_legendre(0.0, tau, panels, NODES_PER_PANEL) {
            let g = theta.decay_group(&self.psi0, s)?;
            let qs = self.fast.project_q(&apply_streaming(&g))?;
            acc = acc.axpy(weight, &theta.decay_group(&qs, tau - s)?)?;
        }
        Ok(acc)
    }

    /// The Duhamel integral refined by panel doubling until successive
    /// levels agree to [`DUHAMEL_TOL`] in the `X_k` norm; returns the finer
    /// level.
    pub fn duhamel_converged(&self, tau: f64) -> Result<WignerField> {
        let mut panels = libm::ceil(PANELS_PER_UNIT_TAU * tau).max(1.0) as usize;
        let mut coarse = self.duhamel(tau, panels)?;
        let mut difference = f64::INFINITY;
        for _ in 0..MAX_REFINEMENTS {
            panels *= 2;
            let fine = self.duhamel(tau, panels)?;
            difference = fine.sub(&coarse)?.norm_xk(self.spec);
            if difference <= DUHAMEL_TOL {
                return Ok(fine);
            }
            coarse = fine;
        }
        Err(Error::QuadratureNotConverged { tau, difference })
    }

    pub fn psi1_tilde(&self, tau: f64) -> Result<WignerField> {
        let homogeneous = self.fast.theta().decay_group(&self.psi1_start, tau)?;
        homogeneous.add(&self.duhamel_converged(tau)?)
    }
}
