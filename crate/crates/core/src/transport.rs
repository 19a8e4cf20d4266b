//! Transport coefficients of the quantum drift-diffusion equation
//!
//! ```text
//! dn/dt = d/dx (E n) + eps d/dx (D dn/dx) + eps d/dx (W n)
//! ```
//!
//! in one space dimension, and the uniform-ellipticity gate `D >= c > 0`.

use alloc::sync::Arc;

use crate::field::DensityField;
use crate::grid::SpaceGrid;
use crate::params::PhysicalParams;
use crate::potential::Potential;
use crate::{Error, Result};

/// `D = (1/nu) (1/(beta m) + V'^2/(nu^2 m^2) + beta hbar^2 V''/(12 m^2))`.
pub fn diffusion_coeff(pot: &Potential, params: &PhysicalParams, x: f64) -> f64 {
    let PhysicalParams { hbar, m, beta, nu, .. } = *params;
    let (v1, v2) = (pot.derivative(1, x), pot.derivative(2, x));
    (1.0 / (beta * m) + v1 * v1 / (nu * nu * m * m) + beta * hbar * hbar * v2 / (12.0 * m * m)) / nu
}

/// `W = (1/nu) (3 V'' V'/(nu^2 m^2) + beta hbar^2 V'''/(12 m^2))`.
pub fn drift_coeff(pot: &Potential, params: &PhysicalParams, x: f64) -> f64 {
    let PhysicalParams { hbar, m, beta, nu, .. } = *params;
    let [v1, v2, v3] = pot.gradients(x);
    (3.0 * v2 * v1 / (nu * nu * m * m) + beta * hbar * hbar * v3 / (12.0 * m * m)) / nu
}

/// `E = V'/(nu m)`.
pub fn field_coeff(pot: &Potential, params: &PhysicalParams, x: f64) -> f64 {
    pot.derivative(1, x) / (params.nu * params.m)
}

/// `D`, `W`, `E` sampled on a grid.
#[derive(Debug, Clone)]
pub struct TransportCoeffs {
    pub d: DensityField,
    pub w: DensityField,
    pub e: DensityField,
    /// Grid minimum of `D`; positive iff the operator is uniformly elliptic.
    pub ellipticity_floor: f64,
}

impl TransportCoeffs {
    pub fn evaluate(pot: &Potential, params: &PhysicalParams, grid: &Arc<SpaceGrid>) -> Self {
        let d = DensityField::from_fn(grid, |x| diffusion_coeff(pot, params, x));
        let w = DensityField::from_fn(grid, |x| drift_coeff(pot, params, x));
        let e = DensityField::from_fn(grid, |x| field_coeff(pot, params, x));
        let ellipticity_floor = d.values().iter().copied().fold(f64::INFINITY, f64::min);
        Self { d, w, e, ellipticity_floor }
    }

    pub fn grid(&self) -> &Arc<SpaceGrid> {
        self.d.grid()
    }

    /// Largest drift speed `|E| + eps |W|` on the grid.
    pub fn max_speed(&self, eps: f64) -> f64 {
        self.e.values().iter().zip(self.w.values()).map(|(e, w)| e.abs() + eps * w.abs()).fold(0.0, f64::max)
    }
}

/// Returns the ellipticity constant `c = min D` if it is positive.
pub fn check_ellipticity(coeffs: &TransportCoeffs) -> Result<f64> {
    let c = coeffs.ellipticity_floor;
    if c > 0.0 {
        return Ok(c);
    }
    let ix = coeffs.d.values().iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(i, _)| i);
    Err(Error::EllipticityViolation { min: c, x: coeffs.grid().points()[ix] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::dx_density;
    use crate::equilibrium::FastOperator;
    use crate::grid::PhaseGrid;
    use crate::potential::{catalog, PotentialKind};
    use core::f64::consts::PI;

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.1).unwrap()
    }

    fn cosine() -> Potential {
        Potential::new(PotentialKind::Cosine { amplitude: 0.3, k0: 1.0 })
    }

    #[test]
    fn closed_form_examples() {
        let p = unit();
        assert_eq!(diffusion_coeff(&Potential::zero(), &p, 0.4), 1.0);
        let lin = Potential::new(PotentialKind::Linear { e0: 0.6 });
        assert!((diffusion_coeff(&lin, &p, -1.0) - 1.36).abs() < 1e-15);
        assert_eq!(drift_coeff(&lin, &p, 2.0), 0.0);
        let har = Potential::new(PotentialKind::Harmonic { omega: 1.0 });
        for x in [-1.0, 0.0, 0.7] {
            assert!((drift_coeff(&har, &p, x) - 3.0 * x).abs() < 1e-15);
        }
    }

    #[test]
    fn ellipticity_gate() {
        let g = Arc::new(SpaceGrid::new(64, 2.0 * PI).unwrap());
        let p = unit();
        let c = check_ellipticity(&TransportCoeffs::evaluate(&Potential::zero(), &p, &g)).unwrap();
        assert_eq!(c, 1.0);
        let small = Potential::new(PotentialKind::Cosine { amplitude: 0.1, k0: 1.0 });
        let c = check_ellipticity(&TransportCoeffs::evaluate(&small, &p, &g)).unwrap();
        assert!(c > 0.9 && c < 1.0);
        // beta hbar^2 A k0^2 / (12 m^2) = 20/12 > 1/(beta m)
        let strong = Potential::new(PotentialKind::Cosine { amplitude: 20.0, k0: 1.0 });
        let err = check_ellipticity(&TransportCoeffs::evaluate(&strong, &p, &g)).unwrap_err();
        assert!(matches!(err, Error::EllipticityViolation { min, x } if min < 0.0 && x.abs() < 1e-12));
    }

    #[test]
    fn offsets_do_not_change_coefficients() {
        let g = Arc::new(SpaceGrid::new(16, 2.0 * PI).unwrap());
        for pot in catalog() {
            let a = TransportCoeffs::evaluate(&pot, &unit(), &g);
            let b = TransportCoeffs::evaluate(&pot.with_offset(3.5), &unit(), &g);
            assert_eq!(a.d.values(), b.d.values());
            assert_eq!(a.w.values(), b.w.values());
            assert_eq!(a.e.values(), b.e.values());
        }
    }

    #[test]
    fn pressure_tensor_identities_hold_for_kernel_moments() {
        let g = PhaseGrid::build(64, 2.0 * PI, 256, 10.0).unwrap();
        for p in [unit(), PhysicalParams::new(0.8, 1.2, 0.9, 1.5, 0.1).unwrap()] {
            let op = FastOperator::new(&cosine(), &p, &g).unwrap();
            let m2 = op.kernel().second_moment();
            let dm2 = dx_density(m2);
            let k = p.nu * p.nu * p.m * p.m;
            for (ix, &x) in g.space().points().iter().enumerate() {
                let [v1, v2, _] = cosine().gradients(x);
                let d = p.nu * diffusion_coeff(&cosine(), &p, x) - (m2.values()[ix] - v1 * v1 / k);
                assert!(d.abs() <= 1e-6, "{d}");
                let w = p.nu * drift_coeff(&cosine(), &p, x) - (dm2.values()[ix] - v2 * v1 / k);
                assert!(w.abs() <= 1e-6, "{w}");
            }
        }
    }

    #[test]
    fn expanded_and_divergence_forms_agree() {
        let g = Arc::new(SpaceGrid::new(64, 2.0 * PI).unwrap());
        let p = PhysicalParams::new(0.9, 1.1, 1.2, 1.3, 0.1).unwrap();
        let n = DensityField::from_fn(&g, |x| 1.0 + 0.4 * libm::cos(x) + 0.1 * libm::sin(3.0 * x));
        let dn = dx_density(&n);
        for pot in [cosine(), Potential::zero(), Potential::new(PotentialKind::Cosine { amplitude: 0.2, k0: 2.0 })] {
            let c = TransportCoeffs::evaluate(&pot, &p, &g);
            let mut flux = DensityField::zeros(&g);
            let mut expanded = DensityField::zeros(&g);
            let PhysicalParams { hbar, m, beta, nu, .. } = p;
            for (ix, &x) in g.points().iter().enumerate() {
                let [v1, v2, v3] = pot.gradients(x);
                let (ni, dni) = (n.values()[ix], dn.values()[ix]);
                flux.values_mut()[ix] = c.d.values()[ix] * dni + c.w.values()[ix] * ni;
                expanded.values_mut()[ix] = (dni / (beta * m)
                    + v1 * v1 / (nu * nu * m * m) * dni
                    + ni * 3.0 * v2 * v1 / (nu * nu * m * m)
                    + beta * hbar * hbar / (12.0 * m * m) * (v2 * dni + v3 * ni))
                    / nu;
            }
            let diff = dx_density(&flux).sub(&dx_density(&expanded)).unwrap().max_abs();
            assert!(diff <= 1e-8, "{diff}");
        }
    }
}
