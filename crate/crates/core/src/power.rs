//! Analytic laser power transfer from the round-trip efficiency to beam and
//! electrical output.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Rule deriving the four leg factors `(V₁, V₂, V₃, V₄)` from `η_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "rule", content = "exponents")]
pub enum LossSplit {
    /// Every leg gets `η_t^(1/4)`.
    #[default]
    Symmetric,
    /// Leg `i` gets `η_t^(w_i)`; the exponents sum to one.
    Weighted([f64; 4]),
}

impl LossSplit {
    pub fn validate(&self) -> Result<()> {
        if let LossSplit::Weighted(w) = self {
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(invalid("loss_split", "exponents must be non-negative"));
            }
            if (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(invalid("loss_split", "exponents must sum to one"));
            }
        }
        Ok(())
    }

    pub fn legs(&self, eta_t: f64) -> [f64; 4] {
        match self {
            LossSplit::Symmetric => [eta_t.powf(0.25); 4],
            LossSplit::Weighted(w) => w.map(|e| eta_t.powf(e)),
        }
    }
}

/// Named choices for the small-signal gain-length product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GainPreset {
    /// Reproduces a 5 W beam at `η_t = 1`.
    #[default]
    Calibrated,
    /// Backed out of the rated excitation efficiency of 0.72.
    RatedExcitation,
}

/// Beam power the calibrated preset reproduces at `η_t = 1` (W).
pub const CALIBRATION_TARGET_W: f64 = 5.0;

/// Rated excitation efficiency used by [`GainPreset::RatedExcitation`].
pub const RATED_EXCITATION_EFFICIENCY: f64 = 0.72;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModelParams {
    /// Pump power into the gain medium (W).
    pub pump_power: f64,
    /// Saturated intensity (W/m²).
    pub saturation_intensity: f64,
    /// Receiver mirror reflectivity.
    pub reflectivity: f64,
    /// Lumped scattering and absorption factor `V_S`.
    pub optics_loss: f64,
    /// Small-signal gain-length product `g₀ℓ_g`.
    pub g0_lg: f64,
    /// Gain medium radius (m).
    pub gain_radius: f64,
    /// Beam to gain cross-section ratio `A_b/A_g`.
    pub area_ratio: f64,
    /// Photovoltaic efficiency.
    pub eta_pv: f64,
    pub split: LossSplit,
}

impl PowerModelParams {
    /// Baseline values with `g0_lg` still unset.
    pub fn baseline_uncalibrated() -> Self {
        Self {
            pump_power: 37.3,
            saturation_intensity: 1.26e7,
            reflectivity: 0.9,
            optics_loss: 0.88,
            g0_lg: f64::NAN,
            gain_radius: 2.8e-3,
            area_ratio: 1.0,
            eta_pv: 0.12,
            split: LossSplit::Symmetric,
        }
    }

    /// Baseline values with `g0_lg` from `preset`.
    pub fn baseline(preset: GainPreset) -> Self {
        let mut p = Self::baseline_uncalibrated();
        p.g0_lg = p.preset_gain(preset).expect("baseline values are valid");
        p
    }

    /// `g0_lg` selected by `preset` for the other parameters of `self`.
    pub fn preset_gain(&self, preset: GainPreset) -> Result<f64> {
        match preset {
            GainPreset::Calibrated => calibrate_gain(self, CALIBRATION_TARGET_W),
            GainPreset::RatedExcitation => Ok(RATED_EXCITATION_EFFICIENCY * self.pump_power
                / (self.gain_area() * self.saturation_intensity)),
        }
    }

    /// `A_g = π r_g²`.
    pub fn gain_area(&self) -> f64 {
        PI * self.gain_radius * self.gain_radius
    }

    /// `A_b = η_B A_g`.
    pub fn beam_area(&self) -> f64 {
        self.area_ratio * self.gain_area()
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_without_gain()?;
        if !(self.g0_lg.is_finite() && self.g0_lg > 0.0) {
            return Err(invalid("g0_lg", "must be positive"));
        }
        Ok(())
    }

    fn validate_without_gain(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, "must be positive"))
            }
        };
        let fraction = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(invalid(name, "must lie in (0, 1]"))
            }
        };
        positive("pump_power", self.pump_power)?;
        positive("saturation_intensity", self.saturation_intensity)?;
        positive("gain_radius", self.gain_radius)?;
        fraction("reflectivity", self.reflectivity)?;
        fraction("optics_loss", self.optics_loss)?;
        fraction("area_ratio", self.area_ratio)?;
        if !(0.0..=1.0).contains(&self.eta_pv) {
            return Err(invalid("eta_pv", "must lie in [0, 1]"));
        }
        self.split.validate()
    }

    /// Copy with the area ratio taken from a mode's enclosed-power radius,
    /// capped at the full gain aperture.
    pub fn with_mode_area(&self, enclosed_radius: f64) -> Result<Self> {
        if !(enclosed_radius.is_finite() && enclosed_radius > 0.0) {
            return Err(invalid("enclosed_radius", "must be positive"));
        }
        Ok(Self {
            area_ratio: (enclosed_radius / self.gain_radius).powi(2).min(1.0),
            ..*self
        })
    }

    /// Logarithmic round-trip loss `|ln sqrt(R V_S² η_t)|`.
    pub fn log_loss(&self, eta_t: f64) -> f64 {
        (0.5 * (self.reflectivity * self.optics_loss * self.optics_loss * eta_t).ln()).abs()
    }

    /// Extraction ratio `(1−R)V₂ / (1 − R V₂V₃ + sqrt(R η_t)(1/(V₁V₂V_S) − V_S))`.
    pub fn extraction_ratio(&self, eta_t: f64) -> f64 {
        let [v1, v2, v3, _] = self.split.legs(eta_t);
        let (r, vs) = (self.reflectivity, self.optics_loss);
        let denom = 1.0 - r * v2 * v3 + (r * eta_t).sqrt() * (1.0 / (v1 * v2 * vs) - vs);
        (1.0 - r) * v2 / denom
    }
}

fn check_eta(eta_t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta_t) {
        Ok(())
    } else {
        Err(invalid("eta_t", "must lie in [0, 1]"))
    }
}

/// Intracavity-extracted beam power (W); zero below threshold.
pub fn output_beam_power(eta_t: f64, p: &PowerModelParams) -> Result<f64> {
    check_eta(eta_t)?;
    p.validate()?;
    if eta_t == 0.0 {
        return Ok(0.0);
    }
    let bracket = p.g0_lg - p.log_loss(eta_t);
    if bracket <= 0.0 {
        return Ok(0.0);
    }
    Ok(p.beam_area() * p.saturation_intensity * p.extraction_ratio(eta_t) * bracket)
}

/// Photovoltaic output power (W).
pub fn output_electrical_power(eta_t: f64, p: &PowerModelParams) -> Result<f64> {
    Ok(p.eta_pv * output_beam_power(eta_t, p)?)
}

/// Lasing threshold pump power (W); infinite when `η_t = 0`.
pub fn threshold_power(eta_t: f64, p: &PowerModelParams) -> Result<f64> {
    check_eta(eta_t)?;
    p.validate()?;
    if eta_t == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(p.log_loss(eta_t) * p.pump_power / p.g0_lg)
}

/// Factors of the electrical output `η_pv η_e η_g (P_in − P_th)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFactors {
    /// Excitation efficiency `A_g I_S g₀ℓ_g / P_in`.
    pub excitation: f64,
    /// Extraction efficiency `η_B · ratio`.
    pub extraction: f64,
    /// Threshold pump power (W).
    pub threshold: f64,
}

pub fn power_factors(eta_t: f64, p: &PowerModelParams) -> Result<PowerFactors> {
    let threshold = threshold_power(eta_t, p)?;
    Ok(PowerFactors {
        excitation: p.gain_area() * p.saturation_intensity * p.g0_lg / p.pump_power,
        extraction: if eta_t > 0.0 {
            p.area_ratio * p.extraction_ratio(eta_t)
        } else {
            0.0
        },
        threshold,
    })
}

/// Electrical power through the factored form; zero below threshold.
pub fn factored_electrical_power(eta_t: f64, p: &PowerModelParams) -> Result<f64> {
    let f = power_factors(eta_t, p)?;
    if !(p.pump_power > f.threshold) {
        return Ok(0.0);
    }
    Ok(p.eta_pv * f.extraction * f.excitation * (p.pump_power - f.threshold))
}

/// `g0_lg` that yields `target` watts of beam power at `η_t = 1`.
pub fn calibrate_gain(p: &PowerModelParams, target: f64) -> Result<f64> {
    if !(target.is_finite() && target > 0.0) {
        return Err(invalid("target", "beam power target must be positive"));
    }
    p.validate_without_gain()?;
    let slope = p.beam_area() * p.saturation_intensity * p.extraction_ratio(1.0);
    if !(slope.is_finite() && slope > 0.0) {
        return Err(invalid("target", "no positive extraction at unit efficiency"));
    }
    Ok(p.log_loss(1.0) + target / slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibrated_gain_value() {
        let p = PowerModelParams::baseline(GainPreset::Calibrated);
        assert!((p.g0_lg - 0.236).abs() < 1e-3, "{}", p.g0_lg);
        assert!((output_beam_power(1.0, &p).unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn rated_excitation_preset_is_below_threshold() {
        let p = PowerModelParams::baseline(GainPreset::RatedExcitation);
        assert!((p.g0_lg - 0.0865).abs() < 5e-4, "{}", p.g0_lg);
        assert_eq!(output_beam_power(1.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn threshold_examples() {
        let mut p = PowerModelParams::baseline_uncalibrated();
        p.g0_lg = 0.236;
        assert!((threshold_power(1.0, &p).unwrap() - 28.5).abs() < 0.5);
        assert_eq!(threshold_power(0.0, &p).unwrap(), f64::INFINITY);
        p.reflectivity = 1.0;
        p.optics_loss = 1.0;
        assert_eq!(threshold_power(1.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn below_threshold_and_zero_eta() {
        let p = PowerModelParams::baseline(GainPreset::Calibrated);
        assert_eq!(output_beam_power(0.0, &p).unwrap(), 0.0);
        assert_eq!(output_beam_power(0.5, &p).unwrap(), 0.0);
        assert!(output_beam_power(1.5, &p).is_err());
    }

    #[test]
    fn zero_target_limit() {
        let p = PowerModelParams::baseline_uncalibrated();
        let g = calibrate_gain(&p, 1e-12).unwrap();
        assert!((g - 0.1806).abs() < 1e-4);
        assert!(calibrate_gain(&p, 0.0).is_err());
    }

    #[test]
    fn weighted_split_rules() {
        assert!(LossSplit::Weighted([0.25; 4]).validate().is_ok());
        assert!(LossSplit::Weighted([0.5; 4]).validate().is_err());
        let legs = LossSplit::Weighted([0.1, 0.2, 0.3, 0.4]).legs(0.5);
        assert!((legs.iter().product::<f64>() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mode_area_ratio() {
        let p = PowerModelParams::baseline(GainPreset::Calibrated);
        let q = p.with_mode_area(1.4e-3).unwrap();
        assert!((q.area_ratio - 0.25).abs() < 1e-12);
        assert_eq!(p.with_mode_area(1.0).unwrap().area_ratio, 1.0);
        assert!(p.with_mode_area(0.0).is_err());
    }
}
