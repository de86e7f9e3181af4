//! Experiment configuration in TOML with baseline defaults.
//!
//! Every section and key is optional; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cavity::CavityGeometry;
use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::foxli::{mode_radius, FoxLiConfig, ModeSolution, SeedKind, DEFAULT_PERTURBATION_SEED};
use crate::power::{GainPreset, LossSplit, PowerModelParams};
use crate::ray::FtcrGeometry;
use crate::safety::{SafetyParams, SKIN_MPE, SPEED_OF_LIGHT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub grid: GridConfig,
    pub foxli: FoxLiSection,
    pub power: PowerConfig,
    pub safety: SafetyConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub tx_focal_m: f64,
    pub tx_interval_m: f64,
    pub tx_radius_m: f64,
    pub rx_focal_m: f64,
    pub rx_interval_m: f64,
    pub rx_radius_m: f64,
    pub gain_radius_m: f64,
    pub reflectivity: f64,
    pub position_m: [f64; 3],
    pub displacement_m: [f64; 3],
    pub wavelength_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = CavityGeometry::baseline(2.0);
        Self {
            tx_focal_m: g.tx_ftcr.focal,
            tx_interval_m: g.tx_ftcr.interval,
            tx_radius_m: g.tx_ftcr.radius,
            rx_focal_m: g.rx_ftcr.focal,
            rx_interval_m: g.rx_ftcr.interval,
            rx_radius_m: g.rx_ftcr.radius,
            gain_radius_m: g.gain_radius,
            reflectivity: g.reflectivity,
            position_m: g.position,
            displacement_m: g.displacement,
            wavelength_m: g.wavelength,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub window_m: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 512,
            window_m: 56e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FoxLiSection {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub stability_window: usize,
    pub seed_kind: SeedKind,
    pub perturbation_seed: u64,
}

impl Default for FoxLiSection {
    fn default() -> Self {
        let c = FoxLiConfig::default();
        Self {
            max_iterations: c.max_iterations,
            tolerance: c.tolerance,
            stability_window: c.stability_window,
            seed_kind: c.seed_kind,
            perturbation_seed: DEFAULT_PERTURBATION_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    pub pump_power_w: f64,
    pub saturation_intensity_w_per_m2: f64,
    pub optics_loss: f64,
    pub gain_preset: GainPreset,
    /// Explicit `g0_lg`; overrides the preset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0_lg: Option<f64>,
    pub area_ratio: f64,
    /// Replace `area_ratio` by the solved mode's enclosed-power area.
    pub area_ratio_from_mode: bool,
    pub eta_pv: f64,
    pub loss_split: LossSplit,
}

impl Default for PowerConfig {
    fn default() -> Self {
        let p = PowerModelParams::baseline_uncalibrated();
        Self {
            pump_power_w: p.pump_power,
            saturation_intensity_w_per_m2: p.saturation_intensity,
            optics_loss: p.optics_loss,
            gain_preset: GainPreset::Calibrated,
            g0_lg: None,
            area_ratio: p.area_ratio,
            area_ratio_from_mode: false,
            eta_pv: p.eta_pv,
            loss_split: LossSplit::Symmetric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafetyConfig {
    /// Output beam power; defaults to the power model at unit efficiency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_power_w: Option<f64>,
    /// Beam cross-section; defaults to the receiver aperture area.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam_area_m2: Option<f64>,
    pub mpe_j_per_m2: f64,
    pub light_speed_m_per_s: f64,
}

impl Default for SafetyConfig {
    fn default() -> Self {
        Self {
            output_power_w: None,
            beam_area_m2: None,
            mpe_j_per_m2: SKIN_MPE,
            light_speed_m_per_s: SPEED_OF_LIGHT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(&self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::Config(format!("unknown axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub axis: Axis,
    pub start_m: f64,
    pub stop_m: f64,
    pub steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            axis: Axis::X,
            start_m: -0.2,
            stop_m: 0.2,
            steps: 21,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(crate::error::invalid("sweep.steps", "must be at least 2"));
        }
        if !(self.start_m.is_finite() && self.stop_m.is_finite() && self.start_m < self.stop_m) {
            return Err(crate::error::invalid("sweep.start_m", "must be below sweep.stop_m"));
        }
        Ok(())
    }

    /// Evenly spaced displacements from `start_m` to `stop_m` inclusive.
    pub fn points(&self) -> Vec<f64> {
        let span = self.stop_m - self.start_m;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop_m
                } else {
                    self.start_m + span * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    pub emit_plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            emit_plots: true,
        }
    }
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } if !name.contains('.') => Error::InvalidParameter {
            name: format!("{section}.{name}"),
            reason,
        },
        other => other,
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Canonical TOML text; loading it back yields an equal config.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML text, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry().validate().map_err(|e| prefix("geometry", e))?;
        self.grid_spec()?;
        self.foxli_config().validate().map_err(|e| prefix("foxli", e))?;
        self.power_params().map_err(|e| prefix("power", e))?;
        self.sweep.validate()?;
        self.safety_params().map_err(|e| prefix("safety", e))?;
        Ok(())
    }

    /// Like [`validate`](Self::validate), but leaves the displacement along
    /// `axis` to be checked per sweep point.
    pub fn validate_for_sweep(&self, axis: Axis) -> Result<()> {
        let mut probe = self.clone();
        probe.geometry.displacement_m[axis.index()] = match axis {
            Axis::Z => 1.0 - self.geometry.position_m[2],
            Axis::X | Axis::Y => 0.0,
        };
        probe.validate()
    }

    pub fn geometry(&self) -> CavityGeometry {
        let g = &self.geometry;
        CavityGeometry {
            tx_ftcr: FtcrGeometry {
                focal: g.tx_focal_m,
                interval: g.tx_interval_m,
                radius: g.tx_radius_m,
            },
            rx_ftcr: FtcrGeometry {
                focal: g.rx_focal_m,
                interval: g.rx_interval_m,
                radius: g.rx_radius_m,
            },
            gain_radius: g.gain_radius_m,
            reflectivity: g.reflectivity,
            position: g.position_m,
            displacement: g.displacement_m,
            wavelength: g.wavelength_m,
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n, self.grid.window_m)
    }

    pub fn foxli_config(&self) -> FoxLiConfig {
        let f = &self.foxli;
        FoxLiConfig {
            max_iterations: f.max_iterations,
            tolerance: f.tolerance,
            stability_window: f.stability_window,
            seed_kind: f.seed_kind,
            perturbation_seed: f.perturbation_seed,
        }
    }

    /// Power parameters for a solved mode, honouring `area_ratio_from_mode`.
    pub fn power_params_for(&self, sol: &ModeSolution) -> Result<PowerModelParams> {
        let p = self.power_params()?;
        if !self.power.area_ratio_from_mode {
            return Ok(p);
        }
        match mode_radius(sol) {
            Ok(r) => p.with_mode_area(r.enclosed),
            Err(_) => Ok(p),
        }
    }

    pub fn power_params(&self) -> Result<PowerModelParams> {
        let p = &self.power;
        let mut params = PowerModelParams {
            pump_power: p.pump_power_w,
            saturation_intensity: p.saturation_intensity_w_per_m2,
            reflectivity: self.geometry.reflectivity,
            optics_loss: p.optics_loss,
            g0_lg: f64::NAN,
            gain_radius: self.geometry.gain_radius_m,
            area_ratio: p.area_ratio,
            eta_pv: p.eta_pv,
            split: p.loss_split,
        };
        params.g0_lg = match p.g0_lg {
            Some(g) => g,
            None => params.preset_gain(p.gain_preset)?,
        };
        params.validate()?;
        Ok(params)
    }

    /// Exposure inputs; the cavity length is the axial separation.
    pub fn safety_params(&self) -> Result<SafetyParams> {
        let s = &self.safety;
        let output_power = match s.output_power_w {
            Some(p) => p,
            None => crate::power::output_beam_power(1.0, &self.power_params()?)?,
        };
        let r = self.geometry.rx_radius_m;
        let params = SafetyParams {
            output_power,
            reflectivity: self.geometry.reflectivity,
            cavity_length: self.geometry().separation(),
            light_speed: s.light_speed_m_per_s,
            beam_area: s.beam_area_m2.unwrap_or(std::f64::consts::PI * r * r),
            mpe: s.mpe_j_per_m2,
        };
        params.validate()?;
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_baseline() {
        let c = ExperimentConfig::from_toml_str("").unwrap();
        let g = c.geometry();
        assert_eq!(g, CavityGeometry::baseline(2.0));
        let p = c.power_params().unwrap();
        assert_eq!((p.pump_power, p.saturation_intensity, p.optics_loss, p.eta_pv), (37.3, 1.26e7, 0.88, 0.12));
        assert_eq!(c.grid_spec().unwrap(), GridSpec::new(512, 56e-3).unwrap());
    }

    #[test]
    fn bad_reflectivity_is_named() {
        let e = ExperimentConfig::from_toml_str("[geometry]\nreflectivity = 1.2\n").unwrap_err();
        match e {
            Error::InvalidParameter { name, .. } => assert_eq!(name, "geometry.reflectivity"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_toml_str("[geometry]\nreflectivty = 0.9\n").unwrap_err();
        assert!(matches!(e, Error::Config(ref m) if m.contains("reflectivty")), "{e:?}");
        assert!(ExperimentConfig::from_toml_str("[bogus]\n").is_err());
    }

    #[test]
    fn canonical_round_trip_and_hash() {
        let mut c = ExperimentConfig::default();
        c.power.loss_split = LossSplit::Weighted([0.1, 0.2, 0.3, 0.4]);
        c.power.g0_lg = Some(0.3);
        c.sweep.axis = Axis::Z;
        let text = c.to_toml_string();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let mut d = c.clone();
        d.grid.window_m = 0.06;
        assert_ne!(d.hash(), c.hash());
    }

    #[test]
    fn sweep_points() {
        let s = SweepConfig::default();
        let p = s.points();
        assert_eq!(p.len(), 21);
        assert_eq!((p[0], p[20]), (-0.2, 0.2));
        assert!((p[10]).abs() < 1e-15);
        assert!(SweepConfig { steps: 1, ..s.clone() }.validate().is_err());
        assert!(SweepConfig { start_m: 0.3, ..s }.validate().is_err());
    }

    #[test]
    fn safety_defaults_reproduce_baseline() {
        let s = ExperimentConfig::default().safety_params().unwrap();
        assert!((s.output_power - 5.0).abs() < 1e-9);
        assert_eq!(s.cavity_length, 2.0);
        assert!((s.beam_area - 1.5394e-4).abs() < 1e-8);
    }

    #[test]
    fn z_sweep_may_start_at_the_transmitter() {
        let mut c = ExperimentConfig::default();
        c.geometry.position_m = [0.0; 3];
        assert!(c.validate().is_err());
        assert!(c.validate_for_sweep(Axis::Z).is_ok());
        assert!(c.validate_for_sweep(Axis::X).is_err());
        c.geometry.gain_radius_m = -1.0;
        assert!(c.validate_for_sweep(Axis::Z).is_err());
    }
}
