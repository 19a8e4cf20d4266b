//! JSON experiment configuration and its validation.
//!
//! Every field has a default, so `{}` is a valid configuration (the unit
//! constants, a `128 x 128` grid on `[-pi, pi) x [-10, 10]`, `V = 0`, a
//! constant unit density in the kernel profile). The schema is documented in
//! the README.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use hfqdd_core::equilibrium::{maxwellian, FastOperator};
use hfqdd_core::qdd::FluxScheme;
use hfqdd_core::{DensityField, NormSpec, PhaseGrid, PhysicalParams, Potential, PotentialKind, SpaceGrid, WignerField};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub initial: InitialConfig,
    pub t_final: f64,
    pub dt: f64,
    /// Output times; empty means `[t_final]`.
    pub outputs: Vec<f64>,
    /// Knudsen numbers of a convergence sweep, strictly decreasing in `(0, 1)`.
    pub eps_list: Vec<f64>,
    /// Velocity weight exponent `k` of the `X_k` norm.
    pub norm_k: u32,
    pub qdd_scheme: SchemeConfig,
    /// Start the macroscopic run from `n0 + eps n1` instead of `n0`.
    pub qdd_corrected_datum: bool,
    pub kinetic_output: KineticOutput,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: ParamsConfig::default(),
            grid: GridConfig::default(),
            potential: PotentialConfig::default(),
            initial: InitialConfig::default(),
            t_final: 0.5,
            dt: 1e-3,
            outputs: Vec::new(),
            eps_list: Vec::new(),
            norm_k: 1,
            qdd_scheme: SchemeConfig::Spectral,
            qdd_corrected_datum: true,
            kinetic_output: KineticOutput::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub hbar: f64,
    pub m: f64,
    pub beta: f64,
    pub nu: f64,
    pub eps: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let p = PhysicalParams::default();
        Self { hbar: p.hbar, m: p.m, beta: p.beta, nu: p.nu, eps: p.eps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_x: usize,
    pub n_v: usize,
    /// Length of the periodic `x` box `[-length/2, length/2)`.
    pub length: f64,
    pub v_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_x: 128, n_v: 128, length: 2.0 * PI, v_max: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero {
        #[serde(default)]
        offset: f64,
    },
    Linear {
        e0: f64,
        #[serde(default)]
        offset: f64,
    },
    Harmonic {
        omega: f64,
        #[serde(default)]
        offset: f64,
    },
    GaussianBump {
        amplitude: f64,
        sigma: f64,
        #[serde(default)]
        offset: f64,
    },
    Cosine {
        amplitude: f64,
        k0: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Zero { offset: 0.0 }
    }
}

impl PotentialConfig {
    pub fn build(&self) -> Potential {
        let (kind, offset) = match *self {
            PotentialConfig::Zero { offset } => (PotentialKind::Zero, offset),
            PotentialConfig::Linear { e0, offset } => (PotentialKind::Linear { e0 }, offset),
            PotentialConfig::Harmonic { omega, offset } => (PotentialKind::Harmonic { omega }, offset),
            PotentialConfig::GaussianBump { amplitude, sigma, offset } => {
                (PotentialKind::GaussianBump { amplitude, sigma }, offset)
            }
            PotentialConfig::Cosine { amplitude, k0, offset } => (PotentialKind::Cosine { amplitude, k0 }, offset),
        };
        Potential::new(kind).with_offset(offset)
    }

    fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            PotentialConfig::Zero { offset } => vec![("offset", offset)],
            PotentialConfig::Linear { e0, offset } => vec![("e0", e0), ("offset", offset)],
            PotentialConfig::Harmonic { omega, offset } => vec![("omega", omega), ("offset", offset)],
            PotentialConfig::GaussianBump { amplitude, sigma, offset } => {
                vec![("amplitude", amplitude), ("sigma", sigma), ("offset", offset)]
            }
            PotentialConfig::Cosine { amplitude, k0, offset } => {
                vec![("amplitude", amplitude), ("k0", k0), ("offset", offset)]
            }
        }
    }
}

/// Initial density profile `n0(x)`; `mode` counts periods over the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityConfig {
    Constant { value: f64 },
    Cosine { mean: f64, amplitude: f64, mode: u32 },
    Gaussian { background: f64, amplitude: f64, width: f64 },
}

impl DensityConfig {
    pub fn build(&self, grid: &Arc<SpaceGrid>) -> DensityField {
        let k = 2.0 * PI / grid.length();
        match *self {
            DensityConfig::Constant { value } => DensityField::from_fn(grid, |_| value),
            DensityConfig::Cosine { mean, amplitude, mode } => {
                DensityField::from_fn(grid, |x| mean + amplitude * (mode as f64 * k * x).cos())
            }
            DensityConfig::Gaussian { background, amplitude, width } => {
                DensityField::from_fn(grid, |x| background + amplitude * (-0.5 * (x / width).powi(2)).exp())
            }
        }
    }
}

/// Velocity profile multiplying `n0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileConfig {
    /// The kernel function `M` (a prepared, well-balanced datum).
    Kernel,
    /// The Maxwellian `F`.
    Maxwellian,
}

/// Zero-mass fluctuation `amplitude sin(mode k x) v F(v)` added to the datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationConfig {
    pub amplitude: f64,
    pub mode: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub density: DensityConfig,
    pub profile: ProfileConfig,
    pub fluctuation: Option<FluctuationConfig>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { density: DensityConfig::Constant { value: 1.0 }, profile: ProfileConfig::Kernel, fluctuation: None }
    }
}

impl InitialConfig {
    /// `w0 = n0 P(v) + amplitude sin(mode k x) v F(v)` with `P` the chosen
    /// profile.
    pub fn build(&self, fast: &FastOperator) -> Result<WignerField> {
        let grid = fast.grid();
        let p = *fast.params();
        let n0 = self.density.build(grid.space_arc());
        let base = match self.profile {
            ProfileConfig::Kernel => fast.kernel().field().scale_rows(&n0)?,
            ProfileConfig::Maxwellian => WignerField::from_fn(grid, |_, v| maxwellian(&p, v)).scale_rows(&n0)?,
        };
        Ok(match self.fluctuation {
            None => base,
            Some(FluctuationConfig { amplitude, mode }) => {
                let k = 2.0 * PI * mode as f64 / grid.space().length();
                let extra = WignerField::from_fn(grid, |x, v| amplitude * (k * x).sin() * v * maxwellian(&p, v));
                base.add(&extra)?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeConfig {
    Spectral,
    Centered,
}

impl From<SchemeConfig> for FluxScheme {
    fn from(s: SchemeConfig) -> Self {
        match s {
            SchemeConfig::Spectral => FluxScheme::Spectral,
            SchemeConfig::Centered => FluxScheme::Centered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticOutput {
    /// Rows `t, x, v, w`.
    Full,
    /// Rows `t, x, n`.
    Density,
}

impl ExperimentConfig {
    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::ConfigRead { path: path.to_path_buf(), source })?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|source| HarnessError::ConfigParse { path: path.to_path_buf(), source })?;
        config.validate()?;
        Ok(config)
    }

    /// Parses and validates a config held in memory.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(HarnessError::invalid)?;
        config.validate()?;
        Ok(config)
    }

    /// Hex SHA-256 of the canonical JSON form, so formatting differences in
    /// the file do not change the hash.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks every invariant that does not need a numerical operator.
    pub fn validate(&self) -> Result<()> {
        self.physical_params(self.params.eps)?;
        self.phase_grid()?;
        NormSpec::new(self.norm_k).map_err(HarnessError::invalid)?;
        for (name, value) in self.potential.parameters() {
            if !value.is_finite() {
                return Err(HarnessError::ConfigInvalid(format!("potential {name} = {value} is not finite")));
            }
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(HarnessError::ConfigInvalid(format!("t_final = {} must be positive", self.t_final)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.t_final) {
            return Err(HarnessError::ConfigInvalid(format!("dt = {} must lie in (0, t_final]", self.dt)));
        }
        if let Some(&t) = self.outputs.iter().find(|&&t| !(0.0..=self.t_final).contains(&t)) {
            return Err(HarnessError::ConfigInvalid(format!("output time {t} outside [0, t_final]")));
        }
        if let Some(&e) = self.eps_list.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return Err(HarnessError::ConfigInvalid(format!("eps_list entry {e} outside (0, 1)")));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(HarnessError::ConfigInvalid("eps_list must be strictly decreasing".into()));
        }
        if let Some(f) = self.initial.fluctuation {
            if !f.amplitude.is_finite() {
                return Err(HarnessError::ConfigInvalid("fluctuation amplitude is not finite".into()));
            }
        }
        if let DensityConfig::Gaussian { width, .. } = self.initial.density {
            if width.is_nan() || width <= 0.0 {
                return Err(HarnessError::ConfigInvalid(format!("gaussian density width {width} must be positive")));
            }
        }
        Ok(())
    }

    pub fn physical_params(&self, eps: f64) -> Result<PhysicalParams> {
        let p = self.params;
        PhysicalParams::new(p.hbar, p.m, p.beta, p.nu, eps).map_err(HarnessError::invalid)
    }

    pub fn phase_grid(&self) -> Result<Arc<PhaseGrid>> {
        let g = self.grid;
        PhaseGrid::build(g.n_x, g.length, g.n_v, g.v_max).map_err(HarnessError::invalid)
    }

    pub fn norm(&self) -> NormSpec {
        NormSpec::new(self.norm_k).expect("validated")
    }

    pub fn output_times(&self) -> Vec<f64> {
        if self.outputs.is_empty() {
            vec![self.t_final]
        } else {
            self.outputs.clone()
        }
    }

    /// The potential, refused unless it is periodic on the `x` box (needed by
    /// every solver that transports in `x`).
    pub fn periodic_potential(&self, grid: &PhaseGrid) -> Result<Potential> {
        let pot = self.potential.build();
        if pot.is_periodic_on(grid.space()) {
            Ok(pot)
        } else {
            Err(HarnessError::invalid(hfqdd_core::Error::AperiodicPotential))
        }
    }

    /// The fast operator at Knudsen number `eps`.
    pub fn fast_operator(&self, eps: f64) -> Result<Arc<FastOperator>> {
        let grid = self.phase_grid()?;
        let pot = self.periodic_potential(&grid)?;
        let params = self.physical_params(eps)?;
        Ok(Arc::new(FastOperator::new(&pot, &params, &grid)?))
    }
}
