//! Classical baselines: the Fabry-Perot Airy profile and the Sagnac phase.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cavity::{Grid, Trace, TraceSource};
use crate::error::{ensure_finite, Error, Result};
use crate::optics::Phase;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FabryPerotConfig {
    /// Mirror amplitude reflection coefficient; the intensity reflectance
    /// is `R = r²`.
    pub r: f64,
    /// Phase of the transmission peak.
    pub center: Phase,
}

impl Default for FabryPerotConfig {
    fn default() -> Self {
        FabryPerotConfig {
            r: 0.999,
            center: Phase::new(PI),
        }
    }
}

impl FabryPerotConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("Fabry-Perot r", self.r)?;
        ensure_finite("Fabry-Perot center", self.center.radians())?;
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::domain(
                "Fabry-Perot r",
                format!("{} not in (0, 1)", self.r),
            ));
        }
        Ok(())
    }

    pub fn reflectance(&self) -> f64 {
        self.r * self.r
    }

    /// Coefficient of finesse `F = 4R / (1 - R)²`.
    pub fn finesse_coefficient(&self) -> f64 {
        let big_r = self.reflectance();
        4.0 * big_r / ((1.0 - big_r) * (1.0 - big_r))
    }

    /// Airy transmission at `psi`, peak value 1.
    pub fn transmission(&self, psi: f64) -> f64 {
        let s = ((psi - self.center.radians()) / 2.0).sin();
        1.0 / (1.0 + self.finesse_coefficient() * s * s)
    }
}

/// Airy transmission on channel A and reflection `1 - T` on channel B.
pub fn fp_trace(cfg: &FabryPerotConfig, grid: &Grid) -> Result<Trace> {
    cfg.validate()?;
    grid.validate()?;
    let psi_grid = grid.points();
    let i_a: Vec<f64> = psi_grid.iter().map(|&p| cfg.transmission(p)).collect();
    let i_b = i_a.iter().map(|t| 1.0 - t).collect();
    Ok(Trace {
        psi_grid,
        i_a,
        i_b,
        normalized: true,
        scale: 1.0,
        source: TraceSource::FabryPerot(*cfg),
    })
}

/// Ring geometry and rotation for the Sagnac conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SagnacParams {
    /// Enclosed area, m².
    pub area: f64,
    /// Vacuum wavelength, m.
    pub wavelength: f64,
    /// Rotation rate, rad/s.
    pub omega: f64,
}

impl Default for SagnacParams {
    fn default() -> Self {
        SagnacParams {
            area: 1.0,
            wavelength: 633e-9,
            omega: 0.0,
        }
    }
}

impl SagnacParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("area", self.area)?;
        ensure_finite("wavelength", self.wavelength)?;
        ensure_finite("omega", self.omega)?;
        if self.area <= 0.0 {
            return Err(Error::domain(
                "area",
                format!("{} must be positive", self.area),
            ));
        }
        if self.wavelength <= 0.0 {
            return Err(Error::domain(
                "wavelength",
                format!("{} must be positive", self.wavelength),
            ));
        }
        Ok(())
    }
}

/// Sagnac phase `8π A Ω / (λ c)` between the counter-propagating beams.
pub fn sagnac_phase(p: &SagnacParams) -> Result<Phase> {
    p.validate()?;
    Ok(Phase::new(
        8.0 * PI * p.area * p.omega / (p.wavelength * SPEED_OF_LIGHT),
    ))
}
