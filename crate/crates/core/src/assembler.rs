//! The composite asymptotic solution
//!
//! ```text
//! n(t) M + eps psi1(n(t)) + psi0~(t/eps) + eps phi1~(t/eps) + eps psi1~(t/eps)
//! ```
//!
//! with `n` the QDD solution from `n0 + eps n1`, and its distance to the
//! kinetic reference.
//!
//! The bulk correction is `psi1[n] = R Q S (n M)`, which expands to
//! `-(D2 dn/dx + D1 n)` with the `n`-independent profiles
//!
//! ```text
//! D2 = R [M (v + V'/(nu m))],   D1 = R [v dM/dx + M V''/(nu m)],
//! ```
//!
//! whose first velocity moments are the transport coefficients `D` and `W`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dft::{dx_density, dx_field};
use crate::equilibrium::FastOperator;
use crate::field::{DensityField, NormSpec, StepPlan, Trajectory, WignerField};
use crate::kinetic::apply_streaming;
use crate::layer::LayerTerms;
use crate::qdd::{initial_correction_n1, QddProblem, QddSolver};
use crate::transport::{diffusion_coeff, drift_coeff, TransportCoeffs};
use crate::Result;

/// The profiles `D2`, `D1`.
#[derive(Debug, Clone)]
pub struct BulkProfiles {
    pub d2: WignerField,
    pub d1: WignerField,
}

impl BulkProfiles {
    pub fn new(fast: &FastOperator) -> Result<Self> {
        let p = fast.params();
        let grid = fast.grid();
        let m = fast.kernel().field();
        let pot = fast.potential();
        let space = grid.space();
        let mut a = WignerField::zeros(grid);
        let mut b = WignerField::zeros(grid);
        let dm = dx_field(m);
        for (ix, &x) in space.points().iter().enumerate() {
            let e1 = pot.derivative(1, x) / (p.nu * p.m);
            let e2 = pot.derivative(2, x) / (p.nu * p.m);
            let (mr, dmr) = (m.row(ix), dm.row(ix));
            for (j, (&v, (ar, br))) in
                grid.v_points().iter().zip(a.row_mut(ix).iter_mut().zip(b.row_mut(ix).iter_mut())).enumerate()
            {
                *ar = mr[j] * (v + e1);
                *br = v * dmr[j] + mr[j] * e2;
            }
        }
        Ok(Self { d2: fast.theta().resolvent(&a)?, d1: fast.theta().resolvent(&b)? })
    }

    /// `psi1[n] = -(D2 dn/dx + D1 n)`.
    pub fn psi_bar_1(&self, n: &DensityField) -> Result<WignerField> {
        let a = self.d2.scale_rows(&dx_density(n))?;
        let b = self.d1.scale_rows(n)?;
        Ok(a.add(&b)?.scale(-1.0))
    }
}

/// `psi1[n] = R Q S (n M)` evaluated directly, without the profiles.
pub fn psi_bar_1_direct(fast: &FastOperator, n: &DensityField) -> Result<WignerField> {
    let nm = fast.kernel().field().scale_rows(n)?;
    let qs = fast.project_q(&apply_streaming(&nm))?;
    fast.theta().resolvent(&qs)
}

/// Largest discrepancies between the moments of `D2`, `D1` and the closed
/// forms of `D`, `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileReport {
    pub diffusion: f64,
    pub drift: f64,
}

pub fn verify_d2_d1(fast: &FastOperator, profiles: &BulkProfiles) -> ProfileReport {
    let (p, pot) = (fast.params(), fast.potential());
    let points = fast.grid().space().points();
    let worst = |moment: DensityField, f: &dyn Fn(f64) -> f64| {
        moment.values().iter().zip(points).map(|(a, &x)| (a - f(x)).abs()).fold(0.0, f64::max)
    };
    ProfileReport {
        diffusion: worst(profiles.d2.velocity_moment(1), &|x| diffusion_coeff(pot, p, x)),
        drift: worst(profiles.d1.velocity_moment(1), &|x| drift_coeff(pot, p, x)),
    }
}

/// Everything needed to evaluate the composite approximation at the output
/// times of its QDD trajectory.
#[derive(Debug, Clone)]
pub struct AsymptoticSolution {
    fast: Arc<FastOperator>,
    layer: LayerTerms,
    profiles: BulkProfiles,
    n_traj: Trajectory<DensityField>,
    n1: DensityField,
}

/// Error of the composite approximation at one time, with the bulk/layer
/// split: `composite <= bulk + layer` by the triangle inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBreakdown {
    pub t: f64,
    /// `||w - composite||`.
    pub composite: f64,
    /// `||w - (n M + eps psi1[n])||`.
    pub bulk: f64,
    /// `||psi0~ + eps phi1~ + eps psi1~||`.
    pub layer: f64,
}

impl AsymptoticSolution {
    /// Builds the layer terms, the corrected datum, and the QDD trajectory
    /// on the step grid of `(t_final, dt)`.
    pub fn build(fast: Arc<FastOperator>, w0: &WignerField, t_final: f64, dt: f64, outputs: &[f64]) -> Result<Self> {
        let layer = LayerTerms::new(fast.clone(), w0)?;
        let profiles = BulkProfiles::new(&fast)?;
        let n0 = w0.density();
        let n1 = initial_correction_n1(layer.psi0(), fast.theta())?;
        let p = *fast.params();
        let coeffs = TransportCoeffs::evaluate(fast.potential(), &p, fast.grid().space_arc());
        let problem = QddProblem::new(coeffs, p, n0, n1.clone(), t_final, dt);
        let n_traj = QddSolver::new(problem)?.solve(outputs)?;
        Ok(Self { fast, layer, profiles, n_traj, n1 })
    }

    pub fn layer(&self) -> &LayerTerms {
        &self.layer
    }

    pub fn profiles(&self) -> &BulkProfiles {
        &self.profiles
    }

    pub fn densities(&self) -> &Trajectory<DensityField> {
        &self.n_traj
    }

    /// The first-order datum correction `n1`.
    pub fn n1(&self) -> &DensityField {
        &self.n1
    }

    pub fn times(&self) -> &[f64] {
        &self.n_traj.times
    }

    /// `n(t) M + eps psi1[n(t)]`.
    pub fn bulk(&self, t: f64) -> Result<WignerField> {
        let n = self.n_traj.at(t)?;
        let eps = self.fast.params().eps;
        self.fast.kernel().field().scale_rows(n)?.axpy(eps, &self.profiles.psi_bar_1(n)?)
    }

    /// `psi0~(t/eps) + eps phi1~(t/eps) + eps psi1~(t/eps)`.
    pub fn layer_part(&self, t: f64) -> Result<WignerField> {
        let eps = self.fast.params().eps;
        let tau = t / eps;
        self.layer.psi0_tilde(tau)?.axpy(eps, &self.layer.phi1_tilde(tau)?)?.axpy(eps, &self.layer.psi1_tilde(tau)?)
    }

    pub fn evaluate(&self, t: f64) -> Result<WignerField> {
        self.bulk(t)?.add(&self.layer_part(t)?)
    }

    /// Errors against a kinetic state `w` at time `t`.
    pub fn breakdown(&self, w: &WignerField, t: f64, spec: NormSpec) -> Result<ErrorBreakdown> {
        let bulk_diff = w.sub(&self.bulk(t)?)?;
        let layer = self.layer_part(t)?;
        Ok(ErrorBreakdown {
            t,
            composite: bulk_diff.sub(&layer)?.norm_xk(spec),
            bulk: bulk_diff.norm_xk(spec),
            layer: layer.norm_xk(spec),
        })
    }
}

/// `||w_kin(t) - composite(t)||_{X_k}` at a time stored in both trajectories.
pub fn composite_error(
    kinetic: &Trajectory<WignerField>,
    asym: &AsymptoticSolution,
    spec: NormSpec,
    t: f64,
) -> Result<f64> {
    Ok(asym.breakdown(kinetic.at(t)?, t, spec)?.composite)
}

/// Breakdowns at every time of the kinetic trajectory.
pub fn error_history(
    kinetic: &Trajectory<WignerField>,
    asym: &AsymptoticSolution,
    spec: NormSpec,
) -> Result<Vec<ErrorBreakdown>> {
    kinetic.iter().map(|(t, w)| asym.breakdown(w, t, spec)).collect()
}

/// Output times of a run, snapped exactly as both solvers snap them.
pub fn snapped_times(t_final: f64, dt: f64, outputs: &[f64]) -> Result<Vec<f64>> {
    Ok(StepPlan::new(t_final, dt, outputs)?.output_times())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::maxwellian;
    use crate::grid::PhaseGrid;
    use crate::kinetic::{kinetic_solve, KineticProblem};
    use crate::params::PhysicalParams;
    use crate::potential::{Potential, PotentialKind};
    use core::f64::consts::PI;

    fn op(pot: Potential, eps: f64) -> Arc<FastOperator> {
        let g = PhaseGrid::build(32, 2.0 * PI, 128, 10.0).unwrap();
        Arc::new(FastOperator::new(&pot, &PhysicalParams::new(1.0, 1.0, 1.0, 1.0, eps).unwrap(), &g).unwrap())
    }

    fn cosine() -> Potential {
        Potential::new(PotentialKind::Cosine { amplitude: 0.2, k0: 1.0 })
    }

    fn bump_density(g: &PhaseGrid) -> DensityField {
        DensityField::from_fn(g.space_arc(), |x| 0.5 + libm::exp(-2.0 * x * x))
    }

    #[test]
    fn constant_potential_reduction() {
        let f = op(Potential::zero().with_offset(1.0), 0.1);
        let p = *f.params();
        let n = bump_density(f.grid());
        let dn = dx_density(&n);
        let prof = BulkProfiles::new(&f).unwrap();
        let got = prof.psi_bar_1(&n).unwrap();
        let expected =
            WignerField::from_fn(f.grid(), |_, v| v * maxwellian(&p, v) / p.nu).scale_rows(&dn).unwrap().scale(-1.0);
        assert!(got.sub(&expected).unwrap().max_abs() <= 1e-9 * expected.max_abs());
        let flat = DensityField::from_fn(f.grid().space_arc(), |_| 2.0);
        assert!(prof.psi_bar_1(&flat).unwrap().max_abs() < 1e-14);
        assert!(prof.d1.max_abs() < 1e-14);
    }

    #[test]
    fn bulk_correction_routes_agree_and_carry_no_mass() {
        let f = op(cosine(), 0.1);
        let n = bump_density(f.grid());
        let prof = BulkProfiles::new(&f).unwrap();
        let a = prof.psi_bar_1(&n).unwrap();
        let b = psi_bar_1_direct(&f, &n).unwrap();
        let spec = NormSpec::default();
        assert!(a.sub(&b).unwrap().norm_xk(spec) <= 1e-8 * a.norm_xk(spec));
        assert!(a.density().max_abs() <= 1e-8);
    }

    #[test]
    fn profile_moments_are_the_transport_coefficients() {
        for pot in [Potential::zero(), cosine()] {
            let f = op(pot, 0.1);
            let r = verify_d2_d1(&f, &BulkProfiles::new(&f).unwrap());
            assert!(r.diffusion <= 1e-6 && r.drift <= 1e-6, "{r:?}");
        }
    }

    #[test]
    fn composite_reproduces_equilibrium_datum() {
        let f = op(cosine(), 0.1);
        let n0 = bump_density(f.grid());
        let w0 = f.kernel().field().scale_rows(&n0).unwrap();
        let asym = AsymptoticSolution::build(f.clone(), &w0, 0.2, 0.01, &[0.0, 0.2]).unwrap();
        let b = asym.breakdown(&w0, 0.0, NormSpec::default()).unwrap();
        assert!(b.composite <= 1e-9, "{b:?}");
    }

    #[test]
    fn composite_with_its_own_trajectory_has_zero_error() {
        let f = op(cosine(), 0.1);
        let p = *f.params();
        let w0 = WignerField::from_fn(f.grid(), |x, v| {
            (1.0 + 0.3 * libm::cos(x)) * maxwellian(&p, v) + 0.2 * libm::sin(x) * v * maxwellian(&p, v)
        });
        let asym = AsymptoticSolution::build(f, &w0, 0.1, 0.01, &[0.05, 0.1]).unwrap();
        let mut own = Trajectory::new();
        for &t in asym.times() {
            own.push(t, asym.evaluate(t).unwrap());
        }
        for &t in asym.times() {
            assert!(composite_error(&own, &asym, NormSpec::default(), t).unwrap() <= 1e-14);
        }
    }

    #[test]
    fn composite_error_is_second_order_in_eps() {
        let spec = NormSpec::default();
        let mut errs = Vec::new();
        for eps in [0.05, 0.025] {
            let f = op(cosine(), eps);
            let p = *f.params();
            let n0 = DensityField::from_fn(f.grid().space_arc(), |x| 1.0 + 0.5 * libm::cos(x));
            let fluctuation = WignerField::from_fn(f.grid(), |x, v| 0.2 * libm::sin(x) * v * maxwellian(&p, v));
            let w0 = f.kernel().field().scale_rows(&n0).unwrap().add(&fluctuation).unwrap();
            let (t, dt) = (0.25, 1e-3);
            let kin = kinetic_solve(&KineticProblem::new(f.clone(), w0.clone(), t, dt).unwrap(), &[t]).unwrap();
            let asym = AsymptoticSolution::build(f, &w0, t, dt, &[t]).unwrap();
            let b = asym.breakdown(kin.at(t).unwrap(), t, spec).unwrap();
            assert!(b.composite <= b.bulk + b.layer + 1e-15);
            errs.push(b.composite);
        }
        let order = libm::log2(errs[0] / errs[1]);
        assert!(order > 1.7 && order < 2.3, "{errs:?}");
    }
}
