//! Numerical core for the high-field Wigner-BGK equation and its quantum
//! drift-diffusion (QDD) limit in one space dimension.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. Everything is
//! discretized on a periodic `x` box times a truncated symmetric `v` box, and
//! every velocity-space operator is an exact Fourier multiplier in the dual
//! variable `eta`.
//!
//! Layout, bottom-up:
//!
//! - [`fft`], [`grid`], [`field`], [`dft`]: grids, sample arrays, norms and the
//!   transform contract (all continuum scaling lives in [`dft`]).
//! - [`potential`]: analytic external potentials and the quantum difference
//!   `delta_v`.
//! - [`pseudodiff`]: the pseudo-differential operator `Theta[V]` and the
//!   resolvent `(nu - Theta)^-1`.
//! - [`equilibrium`]: Maxwellian, its `hbar^2` correction, the BGK gain term,
//!   the kernel function `M` and the projections `P`, `Q`.
//! - [`transport`]: diffusion `D`, drift `W`, field `E` and the ellipticity gate.
//! - [`qdd`]: the macroscopic solver.
//! - [`kinetic`]: the Strang-split reference solver for the kinetic equation.
//! - [`layer`]: the initial-layer semigroup and layer terms.
//! - [`assembler`]: the composite asymptotic solution and its error.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod assembler;
pub mod dft;
pub mod equilibrium;
mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod kinetic;
pub mod layer;
pub mod linalg;
pub mod params;
pub mod potential;
pub mod pseudodiff;
pub mod qdd;
pub mod quadrature;
pub mod transport;

pub use error::{Error, Result};
pub use field::{DensityField, NormSpec, StepPlan, Trajectory, WignerField};
pub use grid::{PhaseGrid, SpaceGrid};
pub use params::PhysicalParams;
pub use potential::{Potential, PotentialKind};
