//! Radiant exposure of an object that blocks the intracavity beam.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Speed of light used by the exposure model (m/s).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Skin maximum permissible exposure (J/m²).
pub const SKIN_MPE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyParams {
    /// Output beam power (W).
    pub output_power: f64,
    /// Receiver mirror reflectivity.
    pub reflectivity: f64,
    /// Cavity length (m).
    pub cavity_length: f64,
    /// Light speed (m/s).
    pub light_speed: f64,
    /// Beam cross-section (m²).
    pub beam_area: f64,
    /// Maximum permissible exposure (J/m²).
    pub mpe: f64,
}

impl SafetyParams {
    /// 5 W output through a 2 m cavity with a 7 mm receiver aperture.
    pub fn baseline() -> Self {
        Self {
            output_power: 5.0,
            reflectivity: 0.9,
            cavity_length: 2.0,
            light_speed: SPEED_OF_LIGHT,
            beam_area: PI * 7e-3 * 7e-3,
            mpe: SKIN_MPE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.output_power.is_finite() && self.output_power >= 0.0) {
            return Err(invalid("output_power", "must be non-negative"));
        }
        if self.reflectivity >= 1.0 {
            return Err(Error::UnboundedCirculatingPower);
        }
        if !(self.reflectivity > 0.0) {
            return Err(invalid("reflectivity", "must lie in (0, 1)"));
        }
        for (name, v) in [
            ("cavity_length", self.cavity_length),
            ("light_speed", self.light_speed),
            ("beam_area", self.beam_area),
            ("mpe", self.mpe),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureReport {
    /// Circulating beam power `P_o / (1 − R)` (W).
    pub circulating_power: f64,
    /// Stored-energy lifetime `L / c` (s).
    pub storage_time: f64,
    /// Radiant exposure `P_s t_s / A_r` (J/m²).
    pub radiant_exposure: f64,
    pub compliant: bool,
}

pub fn radiant_exposure(s: &SafetyParams) -> Result<ExposureReport> {
    s.validate()?;
    let circulating_power = s.output_power / (1.0 - s.reflectivity);
    let storage_time = s.cavity_length / s.light_speed;
    let radiant_exposure = circulating_power * storage_time / s.beam_area;
    Ok(ExposureReport {
        circulating_power,
        storage_time,
        radiant_exposure,
        compliant: radiant_exposure <= s.mpe,
    })
}
