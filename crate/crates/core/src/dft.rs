//! Discrete Fourier transforms on phase-space fields.
//!
//! The velocity transform approximates the symmetric continuum transform
//!
//! ```text
//! (F w)(x, eta) = (2 pi)^{-1/2} int w(x, v) exp(-i v eta) dv
//! ```
//!
//! on the truncated box. Its scaling and the `exp(-i eta v_0)` phase of the
//! shifted grid are handled here and nowhere else; other modules only see
//! spectra in this normalization.
//!
//! Transforms in `x` are plain periodic spectral operations (derivatives and
//! shifts) and never expose spectra.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::field::{DensityField, WignerField};
use crate::grid::{PhaseGrid, SpaceGrid};
use crate::{Error, Result};

/// Samples `(F w)(x_i, eta_k)`, row-major with `eta` fastest in FFT order.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<PhaseGrid>,
    values: Vec<Complex64>,
}

impl SpectralField {
    pub fn grid(&self) -> &Arc<PhaseGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn row(&self, ix: usize) -> &[Complex64] {
        let n = self.grid.n_v();
        &self.values[ix * n..(ix + 1) * n]
    }

    pub fn at(&self, ix: usize, k: usize) -> Complex64 {
        self.values[ix * self.grid.n_v() + k]
    }
}

/// Per-grid constants of the velocity transform.
struct VelocityTransform<'a> {
    grid: &'a PhaseGrid,
    /// `dv / sqrt(2 pi) * exp(-i eta_k v_0)`.
    forward: Vec<Complex64>,
    /// Inverse of `forward`, including the `1/n` of the unnormalized FFT.
    inverse: Vec<Complex64>,
}

impl<'a> VelocityTransform<'a> {
    fn new(grid: &'a PhaseGrid) -> Self {
        let v0 = grid.v_points()[0];
        let scale = grid.dv() / libm::sqrt(2.0 * PI);
        let n = grid.n_v() as f64;
        let (forward, inverse) = grid
            .eta_points()
            .iter()
            .map(|&eta| {
                let phase = Complex64::new(libm::cos(eta * v0), -libm::sin(eta * v0));
                (phase * scale, phase.conj() / (scale * n))
            })
            .unzip();
        Self { grid, forward, inverse }
    }

    fn forward_row(&self, row: &[f64], buf: &mut [Complex64]) {
        for (b, &a) in buf.iter_mut().zip(row) {
            *b = Complex64::new(a, 0.0);
        }
        self.grid.fft_v().forward(buf);
        for (b, &f) in buf.iter_mut().zip(&self.forward) {
            *b *= f;
        }
    }

    /// Inverse transform in place; returns the largest imaginary part.
    fn inverse_row(&self, buf: &mut [Complex64], out: &mut [f64]) -> f64 {
        for (b, &f) in buf.iter_mut().zip(&self.inverse) {
            *b *= f;
        }
        self.grid.fft_v().inverse(buf);
        let mut residue = 0.0f64;
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = b.re;
            residue = residue.max(b.im.abs());
        }
        residue
    }
}

/// Forward velocity transform of every `x` row.
pub fn dft_v(field: &WignerField) -> SpectralField {
    let grid = field.grid();
    let tr = VelocityTransform::new(grid);
    let nv = grid.n_v();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.size()];
    for (row, out) in field.rows().zip(values.chunks_exact_mut(nv)) {
        tr.forward_row(row, out);
    }
    SpectralField { grid: grid.clone(), values }
}

/// Inverse velocity transform, returning the real part and the largest
/// discarded imaginary part.
pub fn idft_v_with_residue(spec: &SpectralField) -> (WignerField, f64) {
    let grid = spec.grid();
    let tr = VelocityTransform::new(grid);
    let nv = grid.n_v();
    let mut out = WignerField::zeros(grid);
    let mut buf = vec![Complex64::new(0.0, 0.0); nv];
    let mut residue = 0.0f64;
    for (ix, row) in spec.values.chunks_exact(nv).enumerate() {
        buf.copy_from_slice(row);
        residue = residue.max(tr.inverse_row(&mut buf, out.row_mut(ix)));
    }
    (out, residue)
}

pub fn idft_v(spec: &SpectralField) -> WignerField {
    idft_v_with_residue(spec).0
}

/// Applies `f(ix, spectrum_row)` between a forward and an inverse velocity
/// transform of each row. Returns the real result and the largest imaginary
/// residue.
pub fn map_velocity_spectrum(field: &WignerField, mut f: impl FnMut(usize, &mut [Complex64])) -> (WignerField, f64) {
    let grid = field.grid();
    let tr = VelocityTransform::new(grid);
    let nv = grid.n_v();
    let mut out = WignerField::zeros(grid);
    let mut buf = vec![Complex64::new(0.0, 0.0); nv];
    let mut residue = 0.0f64;
    for ix in 0..grid.n_x() {
        tr.forward_row(field.row(ix), &mut buf);
        f(ix, &mut buf);
        residue = residue.max(tr.inverse_row(&mut buf, out.row_mut(ix)));
    }
    (out, residue)
}

/// Like [`map_velocity_spectrum`] but also hands `f` a second field's
/// spectrum row (same grid).
pub fn map_velocity_spectrum2(
    field: &WignerField,
    other: &WignerField,
    mut f: impl FnMut(usize, &mut [Complex64], &[Complex64]),
) -> Result<(WignerField, f64)> {
    if !field.same_grid(other) {
        return Err(Error::GridMismatch);
    }
    let grid = field.grid();
    let tr = VelocityTransform::new(grid);
    let nv = grid.n_v();
    let mut out = WignerField::zeros(grid);
    let mut buf = vec![Complex64::new(0.0, 0.0); nv];
    let mut buf2 = vec![Complex64::new(0.0, 0.0); nv];
    let mut residue = 0.0f64;
    for ix in 0..grid.n_x() {
        tr.forward_row(field.row(ix), &mut buf);
        tr.forward_row(other.row(ix), &mut buf2);
        f(ix, &mut buf, &buf2);
        residue = residue.max(tr.inverse_row(&mut buf, out.row_mut(ix)));
    }
    Ok((out, residue))
}

/// Periodic spectral operation on each `v` column: `f(jv, k_index, wavenumber)`
/// returns the multiplier for that Fourier mode. The Nyquist multiplier is
/// replaced by its real part so real input stays real.
fn map_columns(field: &WignerField, f: impl Fn(usize, usize, f64) -> Complex64) -> WignerField {
    let grid = field.grid();
    let space = grid.space();
    let (nx, nv) = (grid.n_x(), grid.n_v());
    let nyq = space.nyquist();
    let inv_n = 1.0 / nx as f64;
    let mut out = WignerField::zeros(grid);
    let mut buf = vec![Complex64::new(0.0, 0.0); nx];
    for jv in 0..nv {
        for (ix, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(field.at(ix, jv), 0.0);
        }
        space.fft().forward(&mut buf);
        for (k, b) in buf.iter_mut().enumerate() {
            let mut mult = f(jv, k, space.wavenumbers()[k]);
            if k == nyq {
                mult = Complex64::new(mult.re, 0.0);
            }
            *b *= mult * inv_n;
        }
        space.fft().inverse(&mut buf);
        let values = out.values_mut();
        for (ix, b) in buf.iter().enumerate() {
            values[ix * nv + jv] = b.re;
        }
    }
    out
}

/// Spectral `d/dx` of every `v` column (Nyquist mode dropped).
pub fn dx_field(field: &WignerField) -> WignerField {
    let nyq = field.grid().space().nyquist();
    map_columns(field, |_, k, kx| if k == nyq { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, kx) })
}

/// Exact periodic translation of column `v_j` by `shift(v_j)`:
/// `w(x) -> w(x - shift)`.
pub fn shift_columns(field: &WignerField, shift: impl Fn(f64) -> f64) -> WignerField {
    let shifts: Vec<f64> = field.grid().v_points().iter().map(|&v| shift(v)).collect();
    map_columns(field, |jv, _, kx| {
        let a = kx * shifts[jv];
        Complex64::new(libm::cos(a), -libm::sin(a))
    })
}

/// Spectral `d/dx` of a density (Nyquist mode dropped).
pub fn dx_density(n: &DensityField) -> DensityField {
    let grid = n.grid();
    let mut buf: Vec<Complex64> = n.values().iter().map(|&a| Complex64::new(a, 0.0)).collect();
    spectral_derivative_in_place(grid, &mut buf);
    let values = buf.iter().map(|b| b.re).collect();
    DensityField::from_values(grid, values).expect("same length")
}

fn spectral_derivative_in_place(grid: &SpaceGrid, buf: &mut [Complex64]) {
    let nyq = grid.nyquist();
    let inv_n = 1.0 / grid.len() as f64;
    grid.fft().forward(buf);
    for (k, b) in buf.iter_mut().enumerate() {
        *b = if k == nyq { Complex64::new(0.0, 0.0) } else { *b * Complex64::new(0.0, grid.wavenumbers()[k] * inv_n) };
    }
    grid.fft().inverse(buf);
}

/// Dense spectral differentiation matrix (row-major, `n x n`).
pub fn spectral_derivative_matrix(grid: &SpaceGrid) -> Vec<f64> {
    let n = grid.len();
    let mut mat = vec![0.0; n * n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for col in 0..n {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        buf[col] = Complex64::new(1.0, 0.0);
        spectral_derivative_in_place(grid, &mut buf);
        for (row, b) in buf.iter().enumerate() {
            mat[row * n + col] = b.re;
        }
    }
    mat
}
