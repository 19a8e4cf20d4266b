//! Sampled fields on the grids, the `X_k` norm and the velocity density.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{PhaseGrid, SpaceGrid};
use crate::{Error, Result};

/// Real samples `w(x_i, v_j)`, stored row-major with `v` fastest.
#[derive(Debug, Clone)]
pub struct WignerField {
    grid: Arc<PhaseGrid>,
    values: Vec<f64>,
}

impl WignerField {
    pub fn zeros(grid: &Arc<PhaseGrid>) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.size()] }
    }

    pub fn from_values(grid: &Arc<PhaseGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid: grid.clone(), values })
    }

    /// Samples `f(x, v)` at every grid node.
    pub fn from_fn(grid: &Arc<PhaseGrid>, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.size());
        for &x in grid.space().points() {
            for &v in grid.v_points() {
                values.push(f(x, v));
            }
        }
        Self { grid: grid.clone(), values }
    }

    /// `g(x) F(v)` from a density and a per-`x` velocity profile field.
    pub fn from_density_times(n: &DensityField, profile: &WignerField) -> Result<Self> {
        if **n.grid() != *profile.grid.space() {
            return Err(Error::GridMismatch);
        }
        let nv = profile.grid.n_v();
        let values = profile
            .values
            .chunks_exact(nv)
            .zip(n.values())
            .flat_map(|(row, &ni)| row.iter().map(move |&m| ni * m))
            .collect();
        Ok(Self { grid: profile.grid.clone(), values })
    }

    pub fn grid(&self) -> &Arc<PhaseGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, ix: usize) -> &[f64] {
        let nv = self.grid.n_v();
        &self.values[ix * nv..(ix + 1) * nv]
    }

    pub fn row_mut(&mut self, ix: usize) -> &mut [f64] {
        let nv = self.grid.n_v();
        &mut self.values[ix * nv..(ix + 1) * nv]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.grid.n_v())
    }

    pub fn at(&self, ix: usize, jv: usize) -> f64 {
        self.values[ix * self.grid.n_v() + jv]
    }

    pub fn same_grid(&self, other: &WignerField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn check_grid(&self, grid: &PhaseGrid) -> Result<()> {
        if *self.grid == *grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn zip_with(&self, other: &WignerField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn add(&self, other: &WignerField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &WignerField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &WignerField) -> Result<Self> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&a| alpha * a).collect() }
    }

    /// Multiplies each `x` row by `n(x_i)`.
    pub fn scale_rows(&self, n: &DensityField) -> Result<Self> {
        Self::from_density_times(n, self)
    }

    /// Multiplies every sample by `g(v_j)`.
    pub fn weight_v(&self, g: impl Fn(f64) -> f64) -> Self {
        let weights: Vec<f64> = self.grid.v_points().iter().map(|&v| g(v)).collect();
        let values = self
            .values
            .chunks_exact(self.grid.n_v())
            .flat_map(|row| row.iter().zip(&weights).map(|(&a, &w)| a * w))
            .collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &a| m.max(a.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|a| a.is_finite())
    }

    /// `n[w](x) = int w dv` by the rectangle (midpoint) rule.
    pub fn density(&self) -> DensityField {
        let dv = self.grid.dv();
        let values = self.rows().map(|row| dv * row.iter().sum::<f64>()).collect();
        DensityField { grid: self.grid.space_arc().clone(), values }
    }

    /// Per-`x` velocity moment `int v^p w dv`.
    pub fn velocity_moment(&self, power: i32) -> DensityField {
        let dv = self.grid.dv();
        let weights: Vec<f64> = self.grid.v_points().iter().map(|&v| libm::pow(v, power as f64)).collect();
        let values = self.rows().map(|row| dv * row.iter().zip(&weights).map(|(&a, &w)| a * w).sum::<f64>()).collect();
        DensityField { grid: self.grid.space_arc().clone(), values }
    }

    /// `||w||_{X_k}`: square root of `int int |w|^2 (1 + |v|^{2k}) dx dv`.
    pub fn norm_xk(&self, spec: NormSpec) -> f64 {
        let weights: Vec<f64> = self.grid.v_points().iter().map(|&v| spec.weight(v)).collect();
        let sum: f64 = self.rows().map(|row| row.iter().zip(&weights).map(|(&a, &w)| a * a * w).sum::<f64>()).sum();
        libm::sqrt(sum * self.grid.cell_volume())
    }

    /// Plain `L^2(dx dv)` norm.
    pub fn norm_l2(&self) -> f64 {
        libm::sqrt(self.inner_l2(self).unwrap_or(0.0))
    }

    /// `<a, b>_{L^2(dx dv)}`.
    pub fn inner_l2(&self, other: &WignerField) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }
}

/// Velocity-weight exponent of the `X_k` norm. `k` must be 1-admissible
/// (`2k > 1`), i.e. `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormSpec {
    k: u32,
}

impl NormSpec {
    pub fn new(k: u32) -> Result<Self> {
        if 2 * k <= 1 {
            return Err(Error::InvalidParameter { name: "k", value: k as f64 });
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn weight(&self, v: f64) -> f64 {
        1.0 + libm::pow(v.abs(), 2.0 * self.k as f64)
    }
}

impl Default for NormSpec {
    fn default() -> Self {
        Self { k: 1 }
    }
}

/// Samples `n(x_i)` on a [`SpaceGrid`].
#[derive(Debug, Clone)]
pub struct DensityField {
    grid: Arc<SpaceGrid>,
    values: Vec<f64>,
}

impl DensityField {
    pub fn zeros(grid: &Arc<SpaceGrid>) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn from_values(grid: &Arc<SpaceGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn from_fn(grid: &Arc<SpaceGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: grid.clone(), values: grid.points().iter().map(|&x| f(x)).collect() }
    }

    pub fn grid(&self) -> &Arc<SpaceGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `int n dx`.
    pub fn mass(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &a| m.max(a.abs()))
    }

    pub fn norm_l2(&self) -> f64 {
        libm::sqrt(self.grid.dx() * self.values.iter().map(|a| a * a).sum::<f64>())
    }

    fn zip_with(&self, other: &DensityField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if *self.grid != *other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn add(&self, other: &DensityField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DensityField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn axpy(&self, alpha: f64, other: &DensityField) -> Result<Self> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&a| alpha * a).collect() }
    }
}

/// A sequence of states at increasing output times.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<f64>,
    pub states: Vec<T>,
}

impl<T> Trajectory<T> {
    pub fn new() -> Self {
        Self { times: Vec::new(), states: Vec::new() }
    }

    pub fn push(&mut self, t: f64, state: T) {
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State stored at `t`, matched to within `1e-9 * max(1, |t|)`.
    pub fn at(&self, t: f64) -> Result<&T> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .map(|i| &self.states[i])
            .ok_or(Error::TimeNotInTrajectory { t })
    }

    pub fn last(&self) -> Option<&T> {
        self.states.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

impl<T> Default for Trajectory<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Uniform time stepping to `t_final` with outputs snapped to the step grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPlan {
    pub n_steps: usize,
    pub dt: f64,
    /// Step indices at which states are recorded, increasing and distinct.
    pub output_steps: Vec<usize>,
}

impl StepPlan {
    /// The step is shrunk to `t_final / ceil(t_final / dt_max)`; each output
    /// time moves to the nearest step.
    pub fn new(t_final: f64, dt_max: f64, outputs: &[f64]) -> Result<Self> {
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidParameter { name: "t_final", value: t_final });
        }
        if !(dt_max > 0.0 && dt_max.is_finite()) {
            return Err(Error::InvalidParameter { name: "dt", value: dt_max });
        }
        let n_steps = libm::ceil(t_final / dt_max * (1.0 - 1e-12)) as usize;
        let dt = if n_steps == 0 { dt_max } else { t_final / n_steps as f64 };
        let mut output_steps = Vec::with_capacity(outputs.len());
        for &t in outputs {
            if !(t >= 0.0 && t <= t_final * (1.0 + 1e-12)) {
                return Err(Error::InvalidOutputTime { t });
            }
            let k = if n_steps == 0 { 0 } else { (libm::round(t / dt) as usize).min(n_steps) };
            output_steps.push(k);
        }
        output_steps.sort_unstable();
        output_steps.dedup();
        Ok(Self { n_steps, dt, output_steps })
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    pub fn output_times(&self) -> Vec<f64> {
        self.output_steps.iter().map(|&k| self.time(k)).collect()
    }
}
