//! Catalog of smooth external potentials with exact derivatives up to fourth
//! order, and the quantum finite difference
//!
//! ```text
//! delta_v(x, eta) = [V(x + hbar eta / 2m) - V(x - hbar eta / 2m)] / hbar.
//! ```

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::field::DensityField;
use crate::grid::SpaceGrid;
use crate::params::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    Zero,
    /// `V = e0 x`.
    Linear {
        e0: f64,
    },
    /// `V = omega^2 x^2 / 2`.
    Harmonic {
        omega: f64,
    },
    /// `V = A exp(-x^2 / (2 sigma^2))`.
    GaussianBump {
        amplitude: f64,
        sigma: f64,
    },
    /// `V = A cos(k0 x)`.
    Cosine {
        amplitude: f64,
        k0: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    /// Additive constant; never affects any observable.
    offset: f64,
}

/// `V, V', V'', V''', V''''` sampled on a grid.
#[derive(Debug, Clone)]
pub struct PotentialSamples {
    pub derivatives: [DensityField; 5],
}

impl PotentialSamples {
    pub fn order(&self, k: usize) -> &DensityField {
        &self.derivatives[k]
    }
}

impl Potential {
    pub fn new(kind: PotentialKind) -> Self {
        Self { kind, offset: 0.0 }
    }

    pub fn zero() -> Self {
        Self::new(PotentialKind::Zero)
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `d^order V / dx^order` at `x`, exact. Orders above four are not needed
    /// anywhere and panic.
    pub fn derivative(&self, order: usize, x: f64) -> f64 {
        assert!(order <= 4, "derivatives up to fourth order");
        match self.kind {
            PotentialKind::Zero => {
                if order == 0 {
                    self.offset
                } else {
                    0.0
                }
            }
            PotentialKind::Linear { e0 } => match order {
                0 => e0 * x + self.offset,
                1 => e0,
                _ => 0.0,
            },
            PotentialKind::Harmonic { omega } => {
                let w2 = omega * omega;
                match order {
                    0 => 0.5 * w2 * x * x + self.offset,
                    1 => w2 * x,
                    2 => w2,
                    _ => 0.0,
                }
            }
            PotentialKind::Cosine { amplitude, k0 } => {
                let (s, c) = (libm::sin(k0 * x), libm::cos(k0 * x));
                let kp = libm::pow(k0, order as f64);
                let base = match order % 4 {
                    0 => c,
                    1 => -s,
                    2 => -c,
                    _ => s,
                };
                amplitude * kp * base + if order == 0 { self.offset } else { 0.0 }
            }
            PotentialKind::GaussianBump { amplitude, sigma } => {
                // d^n/dx^n exp(-s^2/2) = (-1/sigma)^n He_n(s) exp(-s^2/2), s = x/sigma.
                let s = x / sigma;
                let g = libm::exp(-0.5 * s * s);
                let he = match order {
                    0 => 1.0,
                    1 => s,
                    2 => s * s - 1.0,
                    3 => s * s * s - 3.0 * s,
                    _ => s * s * s * s - 6.0 * s * s + 3.0,
                };
                let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
                amplitude * sign * he * g / libm::pow(sigma, order as f64) + if order == 0 { self.offset } else { 0.0 }
            }
        }
    }

    /// `[V', V'', V''']` at `x`.
    pub fn gradients(&self, x: f64) -> [f64; 3] {
        [self.derivative(1, x), self.derivative(2, x), self.derivative(3, x)]
    }

    /// `delta_v(x, eta)`. With `hbar = 0` this is the classical limit
    /// `V'(x) eta / m`.
    pub fn delta_v(&self, params: &PhysicalParams, x: f64, eta: f64) -> f64 {
        let (hbar, m) = (params.hbar, params.m);
        if hbar == 0.0 {
            return self.derivative(1, x) * eta / m;
        }
        let a = hbar * eta / (2.0 * m);
        match self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Linear { e0 } => e0 * eta / m,
            PotentialKind::Harmonic { omega } => omega * omega * x * eta / m,
            PotentialKind::Cosine { amplitude, k0 } => -2.0 * amplitude * libm::sin(k0 * x) * libm::sin(k0 * a) / hbar,
            PotentialKind::GaussianBump { .. } => (self.derivative(0, x + a) - self.derivative(0, x - a)) / hbar,
        }
    }

    /// Whether the potential (with all its derivatives) is periodic on the
    /// grid's box, so it may be used with spectral `x`-transport.
    pub fn is_periodic_on(&self, grid: &SpaceGrid) -> bool {
        match self.kind {
            PotentialKind::Zero => true,
            PotentialKind::Linear { e0 } => e0 == 0.0,
            PotentialKind::Harmonic { omega } => omega == 0.0,
            PotentialKind::Cosine { amplitude, k0 } => {
                if amplitude == 0.0 {
                    return true;
                }
                let periods = k0 * grid.length() / (2.0 * PI);
                (periods - libm::round(periods)).abs() < 1e-12 * periods.abs().max(1.0)
            }
            PotentialKind::GaussianBump { amplitude, sigma } => {
                // Derivatives up to fourth order must vanish at the seam.
                let s = 0.5 * grid.length() / sigma;
                amplitude == 0.0 || libm::exp(-0.5 * s * s) * (1.0 + libm::pow(s, 4.0)) < 1e-14
            }
        }
    }

    /// Derivative arrays `V, ..., V''''` on the grid.
    pub fn derivatives(&self, grid: &Arc<SpaceGrid>) -> PotentialSamples {
        let sample = |k: usize| DensityField::from_fn(grid, |x| self.derivative(k, x));
        PotentialSamples { derivatives: [sample(0), sample(1), sample(2), sample(3), sample(4)] }
    }

    /// Grid maximum of `|V'|`, used for velocity-box diagnostics.
    pub fn max_gradient(&self, grid: &SpaceGrid) -> f64 {
        grid.points().iter().map(|&x| self.derivative(1, x).abs()).fold(0.0, f64::max)
    }
}

/// Every catalog member with representative parameters, for property checks.
pub fn catalog() -> Vec<Potential> {
    alloc::vec![
        Potential::zero(),
        Potential::new(PotentialKind::Linear { e0: 0.7 }),
        Potential::new(PotentialKind::Harmonic { omega: 1.3 }),
        Potential::new(PotentialKind::GaussianBump { amplitude: 0.2, sigma: 1.0 }),
        Potential::new(PotentialKind::Cosine { amplitude: 0.3, k0: 1.0 }),
    ]
}
