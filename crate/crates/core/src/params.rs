use crate::{Error, Result};

/// Nondimensional constants of the scaled Wigner-BGK equation.
///
/// `hbar` may be zero (the classical limit, where `delta_v` degenerates to
/// `V'(x) eta / m`); every other constant must be strictly positive and the
/// Knudsen number lies in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub m: f64,
    pub beta: f64,
    pub nu: f64,
    pub eps: f64,
}

impl PhysicalParams {
    pub fn new(hbar: f64, m: f64, beta: f64, nu: f64, eps: f64) -> Result<Self> {
        let p = Self { hbar, m, beta, nu, eps };
        p.validate()?;
        Ok(p)
    }

    /// `hbar = m = beta = nu = 1` with the given Knudsen number.
    pub fn unit(eps: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, 1.0, eps)
    }

    pub fn with_eps(self, eps: f64) -> Result<Self> {
        Self::new(self.hbar, self.m, self.beta, self.nu, eps)
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        Self::new(hbar, self.m, self.beta, self.nu, self.eps)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        if !(self.hbar.is_finite() && self.hbar >= 0.0) {
            return Err(Error::InvalidParameter { name: "hbar", value: self.hbar });
        }
        positive("m", self.m)?;
        positive("beta", self.beta)?;
        positive("nu", self.nu)?;
        positive("eps", self.eps)?;
        if self.eps >= 1.0 {
            return Err(Error::InvalidParameter { name: "eps", value: self.eps });
        }
        Ok(())
    }

    /// Thermal diffusivity `1 / (nu beta m)` of the field-free problem.
    pub fn thermal_diffusivity(&self) -> f64 {
        1.0 / (self.nu * self.beta * self.m)
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { hbar: 1.0, m: 1.0, beta: 1.0, nu: 1.0, eps: 0.1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(PhysicalParams::unit(0.5).is_ok());
        assert!(PhysicalParams::unit(1.0).is_err());
        assert!(PhysicalParams::unit(0.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 1.0, 1.0, 0.1).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, 0.0, 0.1).is_err());
        assert!(PhysicalParams::new(f64::NAN, 1.0, 1.0, 1.0, 0.1).is_err());
        assert!(PhysicalParams::new(0.0, 1.0, 1.0, 1.0, 0.1).is_ok());
    }
}
