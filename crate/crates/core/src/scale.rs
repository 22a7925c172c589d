//! Physical units of the oscillator H = v|p| + F|x|.
//!
//! All numerics run in the dimensionless form H = |k| + |x|; this module
//! carries the scales needed to map results back: energies scale with
//! sqrt(hbar v F) and lengths with sqrt(hbar v / F).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScale {
    /// Dispersion velocity in epsilon(p) = v |p|.
    pub v: f64,
    /// Confining force in V(x) = F |x|.
    pub f: f64,
    pub hbar: f64,
}

impl Default for PhysicalScale {
    fn default() -> Self {
        Self {
            v: 1.0,
            f: 1.0,
            hbar: 1.0,
        }
    }
}

impl PhysicalScale {
    pub fn new(v: f64, f: f64, hbar: f64) -> Result<Self> {
        if !(v > 0.0 && f > 0.0 && hbar > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "physical scale requires v, F, hbar > 0 (got v={v}, F={f}, hbar={hbar})"
            )));
        }
        Ok(Self { v, f, hbar })
    }

    /// E_n = lambda_n * energy_scale().
    pub fn energy_scale(&self) -> f64 {
        (self.hbar * self.v * self.f).sqrt()
    }

    /// Physical position per dimensionless lattice position.
    pub fn length_scale(&self) -> f64 {
        (self.hbar * self.v / self.f).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_scale() {
        let s = PhysicalScale::default();
        assert_eq!(s.energy_scale(), 1.0);
        assert_eq!(s.length_scale(), 1.0);
    }

    #[test]
    fn quadrupled_velocity_doubles_energy() {
        let s = PhysicalScale::new(4.0, 1.0, 1.0).unwrap();
        assert_eq!(s.energy_scale(), 2.0);
        assert_eq!(s.length_scale(), 2.0);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(PhysicalScale::new(0.0, 1.0, 1.0).is_err());
        assert!(PhysicalScale::new(1.0, -2.0, 1.0).is_err());
    }
}
