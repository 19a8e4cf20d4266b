//! Uniform periodic grids in `x` and `(x, v)` with their Fourier duals.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fft::Fft;
use crate::{Error, Result};

/// Standard DFT dual frequencies (`fftfreq` ordering) scaled by `2 pi / length`.
///
/// Index `n / 2` (Nyquist) carries `-n/2`.
fn dual_frequencies(n: usize, length: f64) -> Vec<f64> {
    let base = 2.0 * PI / length;
    (0..n)
        .map(|j| {
            let signed = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
            base * signed as f64
        })
        .collect()
}

fn check_size(name: &'static str, n: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::GridSize { name, n });
    }
    Ok(())
}

/// Periodic box `[-L/2, L/2)` sampled at `n` points.
#[derive(Debug, Clone)]
pub struct SpaceGrid {
    n: usize,
    length: f64,
    points: Vec<f64>,
    wavenumbers: Vec<f64>,
    fft: Fft,
}

impl SpaceGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        check_size("n_x", n)?;
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter { name: "length", value: length });
        }
        let dx = length / n as f64;
        let points = (0..n).map(|i| -0.5 * length + i as f64 * dx).collect();
        Ok(Self { n, length, points, wavenumbers: dual_frequencies(n, length), fft: Fft::new(n)? })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    pub fn fft(&self) -> &Fft {
        &self.fft
    }
}

impl PartialEq for SpaceGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

/// Phase-space grid: a [`SpaceGrid`] times the truncated velocity box
/// `[-v_max, v_max)`.
#[derive(Debug, Clone)]
pub struct PhaseGrid {
    space: Arc<SpaceGrid>,
    n_v: usize,
    v_max: f64,
    v_points: Vec<f64>,
    eta_points: Vec<f64>,
    fft_v: Fft,
}

impl PhaseGrid {
    pub fn new(space: SpaceGrid, n_v: usize, v_max: f64) -> Result<Self> {
        Self::with_space(Arc::new(space), n_v, v_max)
    }

    pub fn with_space(space: Arc<SpaceGrid>, n_v: usize, v_max: f64) -> Result<Self> {
        check_size("n_v", n_v)?;
        if !(v_max.is_finite() && v_max > 0.0) {
            return Err(Error::InvalidParameter { name: "v_max", value: v_max });
        }
        let dv = 2.0 * v_max / n_v as f64;
        let v_points = (0..n_v).map(|j| -v_max + j as f64 * dv).collect();
        Ok(Self { space, n_v, v_max, v_points, eta_points: dual_frequencies(n_v, 2.0 * v_max), fft_v: Fft::new(n_v)? })
    }

    /// Convenience constructor for the common `(n_x, L_x, n_v, v_max)` tuple.
    pub fn build(n_x: usize, length: f64, n_v: usize, v_max: f64) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::new(SpaceGrid::new(n_x, length)?, n_v, v_max)?))
    }

    pub fn space(&self) -> &SpaceGrid {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<SpaceGrid> {
        &self.space
    }

    pub fn n_x(&self) -> usize {
        self.space.len()
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / self.n_v as f64
    }

    pub fn v_points(&self) -> &[f64] {
        &self.v_points
    }

    pub fn eta_points(&self) -> &[f64] {
        &self.eta_points
    }

    pub fn nyquist_v(&self) -> usize {
        self.n_v / 2
    }

    pub fn fft_v(&self) -> &Fft {
        &self.fft_v
    }

    /// Number of samples `n_x * n_v`.
    pub fn size(&self) -> usize {
        self.n_x() * self.n_v
    }

    pub fn cell_volume(&self) -> f64 {
        self.space.dx() * self.dv()
    }
}

impl PartialEq for PhaseGrid {
    fn eq(&self, other: &Self) -> bool {
        *self.space == *other.space && self.n_v == other.n_v && self.v_max == other.v_max
    }
}
