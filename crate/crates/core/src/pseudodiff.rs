//! The pseudo-differential operator `Theta[V]` and its resolvent, as exact
//! Fourier multipliers in `v` at each fixed `x`.
//!
//! In the `eta` variable, `Theta[V]` multiplies by `i delta_v(x, eta)`, so
//! `(nu - Theta)^-1` divides by `nu - i delta_v` and the decaying group
//! `exp((Theta - nu) tau)` multiplies by `exp((i delta_v - nu) tau)`.
//!
//! The Nyquist `eta` column is its own mirror image; its multiplier must be
//! real for real fields to stay real, so `delta_v` is set to zero there.

use alloc::sync::Arc;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::dft::map_velocity_spectrum;
use crate::field::WignerField;
use crate::grid::PhaseGrid;
use crate::params::PhysicalParams;
use crate::potential::Potential;
use crate::Result;

/// Tolerance for the imaginary residue of a multiplier application, relative
/// to the input magnitude.
const REALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ThetaOperator {
    grid: Arc<PhaseGrid>,
    params: PhysicalParams,
    potential: Potential,
    /// `delta_v(x_i, eta_k)`, row-major.
    delta: Vec<f64>,
}

impl ThetaOperator {
    pub fn new(potential: &Potential, params: &PhysicalParams, grid: &Arc<PhaseGrid>) -> Self {
        let nyq = grid.nyquist_v();
        let mut delta = Vec::with_capacity(grid.size());
        for &x in grid.space().points() {
            for (k, &eta) in grid.eta_points().iter().enumerate() {
                delta.push(if k == nyq { 0.0 } else { potential.delta_v(params, x, eta) });
            }
        }
        Self { grid: grid.clone(), params: *params, potential: *potential, delta }
    }

    pub fn grid(&self) -> &Arc<PhaseGrid> {
        &self.grid
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn delta(&self, ix: usize, k: usize) -> f64 {
        self.delta[ix * self.grid.n_v() + k]
    }

    pub fn delta_row(&self, ix: usize) -> &[f64] {
        let n = self.grid.n_v();
        &self.delta[ix * n..(ix + 1) * n]
    }

    /// The multiplier `i delta_v(x_i, eta_k)`.
    pub fn multiplier(&self, ix: usize, k: usize) -> Complex64 {
        Complex64::new(0.0, self.delta(ix, k))
    }

    /// Applies the per-mode multiplier `f(delta_v)` to every row of `w`.
    pub fn apply_multiplier(&self, w: &WignerField, f: impl Fn(f64) -> Complex64) -> Result<WignerField> {
        w.check_grid(&self.grid)?;
        let (out, residue) = map_velocity_spectrum(w, |ix, spec| {
            for (s, &d) in spec.iter_mut().zip(self.delta_row(ix)) {
                *s *= f(d);
            }
        });
        debug_assert!(
            residue <= REALITY_TOL * (1.0 + w.max_abs()) * (1.0 + out.max_abs()),
            "imaginary residue {residue:e}"
        );
        Ok(out)
    }

    /// `Theta[V] w`.
    pub fn apply(&self, w: &WignerField) -> Result<WignerField> {
        self.apply_multiplier(w, |d| Complex64::new(0.0, d))
    }

    /// `(nu - Theta[V])^-1 h`.
    pub fn resolvent(&self, h: &WignerField) -> Result<WignerField> {
        let nu = self.params.nu;
        self.apply_multiplier(h, |d| Complex64::new(nu, -d).inv())
    }

    /// `(nu - Theta[V]) w`, the inverse of [`Self::resolvent`].
    pub fn apply_shifted(&self, w: &WignerField) -> Result<WignerField> {
        let nu = self.params.nu;
        self.apply_multiplier(w, |d| Complex64::new(nu, -d))
    }

    /// `exp((Theta - nu) tau) w`.
    pub fn decay_group(&self, w: &WignerField, tau: f64) -> Result<WignerField> {
        let nu = self.params.nu;
        let damp = libm::exp(-nu * tau);
        self.apply_multiplier(w, |d| {
            let a = d * tau;
            Complex64::new(damp * libm::cos(a), damp * libm::sin(a))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::dft_v;
    use crate::potential::PotentialKind;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};

    fn grid() -> Arc<PhaseGrid> {
        PhaseGrid::build(16, 2.0 * PI, 128, 10.0).unwrap()
    }

    fn cosine() -> Potential {
        Potential::new(PotentialKind::Cosine { amplitude: 0.3, k0: 1.0 })
    }

    fn random_field(g: &Arc<PhaseGrid>, seed: u64) -> WignerField {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        WignerField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn smooth_field(g: &Arc<PhaseGrid>) -> WignerField {
        WignerField::from_fn(g, |x, v| {
            (1.0 + 0.5 * libm::sin(x)) * (1.0 + v + 0.3 * v * v) * libm::exp(-0.5 * (v - 0.4) * (v - 0.4))
        })
    }

    #[test]
    fn multiplier_is_imaginary_and_hermitian() {
        let g = grid();
        let op = ThetaOperator::new(&cosine(), &PhysicalParams::default(), &g);
        let n = g.n_v();
        for ix in 0..g.n_x() {
            for k in 1..n {
                let (a, b) = (op.multiplier(ix, k), op.multiplier(ix, n - k));
                assert_eq!(a.re, 0.0);
                assert!((a - b.conj()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_potential_gives_zero_and_scalar_resolvent() {
        let g = grid();
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 2.5, 0.1).unwrap();
        let op = ThetaOperator::new(&Potential::zero().with_offset(1.0), &p, &g);
        let h = smooth_field(&g);
        assert_eq!(op.apply(&h).unwrap().max_abs(), 0.0);
        let r = op.resolvent(&h).unwrap();
        assert!(r.sub(&h.scale(1.0 / 2.5)).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn harmonic_theta_is_a_velocity_derivative() {
        // delta_v = V'(x) eta / m, so Theta w = (V'/m) dw/dv; compare against a
        // spectral v-derivative built from the transform directly.
        let g = grid();
        let p = PhysicalParams::new(0.7, 1.5, 1.0, 1.0, 0.1).unwrap();
        let pot = Potential::new(PotentialKind::Harmonic { omega: 0.8 });
        let op = ThetaOperator::new(&pot, &p, &g);
        let w = smooth_field(&g);
        let got = op.apply(&w).unwrap();
        let nyq = g.nyquist_v();
        let (dv, _) = map_velocity_spectrum(&w, |_, s| {
            for (k, (a, &eta)) in s.iter_mut().zip(g.eta_points()).enumerate() {
                *a *= if k == nyq { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, eta) };
            }
        });
        let expected = WignerField::from_fn(&g, |_, _| 0.0);
        let mut expected = expected;
        for ix in 0..g.n_x() {
            let f = pot.derivative(1, g.space().points()[ix]) / p.m;
            for (e, d) in expected.row_mut(ix).iter_mut().zip(dv.row(ix)) {
                *e = f * d;
            }
        }
        let err = got.sub(&expected).unwrap().max_abs();
        assert!(err <= 1e-10 * expected.max_abs(), "{err}");
    }

    #[test]
    fn theta_annihilates_mass_and_is_skew() {
        let g = grid();
        let op = ThetaOperator::new(&cosine(), &PhysicalParams::default(), &g);
        for seed in 0..10 {
            let w = random_field(&g, seed);
            let tw = op.apply(&w).unwrap();
            assert!(tw.density().max_abs() <= 1e-12);
            let skew = tw.inner_l2(&w).unwrap().abs();
            assert!(skew <= 1e-10 * w.inner_l2(&w).unwrap());
        }
    }

    #[test]
    fn resolvent_round_trip() {
        let g = grid();
        let op = ThetaOperator::new(&cosine(), &PhysicalParams::default(), &g);
        let h = random_field(&g, 42);
        let back = op.apply_shifted(&op.resolvent(&h).unwrap()).unwrap();
        let rel = back.sub(&h).unwrap().norm_l2() / h.norm_l2();
        assert!(rel <= 1e-10, "{rel}");
        // (nu - Theta) w = nu w - Theta w
        let direct = h.scale(op.params().nu).sub(&op.apply(&h).unwrap()).unwrap();
        assert!(direct.sub(&op.apply_shifted(&h).unwrap()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn resolvent_passes_zero_mode_with_factor_one_over_nu() {
        let g = PhaseGrid::build(16, 2.0 * PI, 256, 10.0).unwrap();
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.1).unwrap();
        let op = ThetaOperator::new(&cosine(), &p, &g);
        let h = WignerField::from_fn(&g, |_, v| libm::exp(-0.5 * v * v) / libm::sqrt(2.0 * PI));
        let r = op.resolvent(&h).unwrap();
        let (nr, nh) = (r.density(), h.density());
        for (a, b) in nr.values().iter().zip(nh.values()) {
            assert!((a - b / p.nu).abs() <= 1e-12);
        }
    }

    #[test]
    fn decay_group_contracts_l2_exactly() {
        let g = grid();
        let op = ThetaOperator::new(&cosine(), &PhysicalParams::default(), &g);
        let w = random_field(&g, 3);
        let tau = 0.8;
        let gw = op.decay_group(&w, tau).unwrap();
        assert!((gw.norm_l2() - libm::exp(-tau) * w.norm_l2()).abs() <= 1e-12);
        let _ = dft_v(&gw);
    }
}
