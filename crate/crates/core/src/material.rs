//! Modified SIMP interpolation `E(rho) = Emin + rho^p (E0 - Emin)` and the design field.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialLaw {
    pub e0: f64,
    pub emin: f64,
    pub nu: f64,
    pub p: f64,
}

impl Default for MaterialLaw {
    fn default() -> Self {
        Self {
            e0: 1.0,
            emin: 1e-9,
            nu: 0.3,
            p: 3.0,
        }
    }
}

impl MaterialLaw {
    pub fn new(e0: f64, emin: f64, nu: f64, p: f64) -> Result<Self> {
        let law = Self { e0, emin, nu, p };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.emin > 0.0 && self.emin < self.e0 && self.e0.is_finite()) {
            return Err(Error::InvalidMaterial(format!(
                "need 0 < Emin < E0, got Emin={}, E0={}",
                self.emin, self.e0
            )));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidMaterial(format!(
                "penalization p={} must be >= 1",
                self.p
            )));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(Error::PoissonOutOfRange(self.nu));
        }
        Ok(())
    }

    /// Same law with a different penalization exponent.
    pub fn with_penalty(&self, p: f64) -> Self {
        Self { p, ..*self }
    }

    #[inline]
    pub fn modulus(&self, rho: f64) -> f64 {
        self.emin + rho.powf(self.p) * (self.e0 - self.emin)
    }

    #[inline]
    pub fn modulus_slope(&self, rho: f64) -> f64 {
        self.p * rho.powf(self.p - 1.0) * (self.e0 - self.emin)
    }

    pub fn interpolate_modulus(&self, rho: &[f64]) -> Vec<f64> {
        rho.iter().map(|&r| self.modulus(r)).collect()
    }

    pub fn modulus_derivative(&self, rho: &[f64]) -> Vec<f64> {
        rho.iter().map(|&r| self.modulus_slope(r)).collect()
    }
}

/// `E_i = Emin + rho_i^p (E0 - Emin)` for every element.
pub fn interpolate_modulus(law: &MaterialLaw, rho: &DesignField) -> Vec<f64> {
    law.interpolate_modulus(rho.values())
}

/// `dE_i/drho_i = p rho_i^(p-1) (E0 - Emin)`.
pub fn modulus_derivative(law: &MaterialLaw, rho: &DesignField) -> Vec<f64> {
    law.modulus_derivative(rho.values())
}

/// Elemental densities in `[0, 1]` together with the prescribed volume fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignField {
    rho: Vec<f64>,
    pub vf_target: f64,
}

impl DesignField {
    pub fn new(rho: Vec<f64>, vf_target: f64) -> Result<Self> {
        if let Some((i, r)) = rho
            .iter()
            .enumerate()
            .find(|(_, r)| !(**r >= 0.0 && **r <= 1.0))
        {
            return Err(Error::InvalidDesign(format!(
                "density {r} at element {i} outside [0, 1]"
            )));
        }
        if !(vf_target > 0.0 && vf_target <= 1.0) {
            return Err(Error::InvalidDesign(format!(
                "volume fraction {vf_target} outside (0, 1]"
            )));
        }
        Ok(Self { rho, vf_target })
    }

    pub fn uniform(n: usize, vf_target: f64) -> Result<Self> {
        Self::new(vec![vf_target; n], vf_target)
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    pub fn into_values(self) -> Vec<f64> {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// `sum v_i rho_i / V0`.
    pub fn volume_fraction(&self, volumes: &[f64]) -> f64 {
        volume_fraction(&self.rho, volumes)
    }
}

pub fn volume_fraction(rho: &[f64], volumes: &[f64]) -> f64 {
    let total: f64 = volumes.iter().sum();
    rho.iter().zip(volumes).map(|(r, v)| r * v).sum::<f64>() / total
}
