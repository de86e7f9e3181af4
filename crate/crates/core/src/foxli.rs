//! Self-reproducing cavity mode by power iteration on the round-trip operator.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cavity::{CavityGeometry, CavityLoop};
use crate::error::{invalid, Error, Result};
use crate::field::{Field, GridSpec};

/// Default seed for the perturbed plane wave.
pub const DEFAULT_PERTURBATION_SEED: u64 = 0x5eed_f0c5;

/// Amplitude of the pseudo-random perturbation relative to the plane wave.
pub const PERTURBATION_AMPLITUDE: f64 = 1e-3;

/// Initial field of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SeedKind {
    #[default]
    PlaneWave,
    PlaneWavePerturbed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoxLiConfig {
    pub max_iterations: usize,
    /// Relative spread allowed across the stability window.
    pub tolerance: f64,
    pub stability_window: usize,
    pub seed_kind: SeedKind,
    pub perturbation_seed: u64,
}

impl Default for FoxLiConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-4,
            stability_window: 10,
            seed_kind: SeedKind::PlaneWave,
            perturbation_seed: DEFAULT_PERTURBATION_SEED,
        }
    }
}

impl FoxLiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(invalid("max_iterations", "must be at least 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(invalid("tolerance", "must be positive"));
        }
        if self.stability_window < 2 {
            return Err(invalid("stability_window", "must be at least 2"));
        }
        Ok(())
    }
}

/// Result of a mode solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    /// Unit-power envelope on the loop start plane (zero after a collapse).
    pub mode: Field,
    /// Round-trip power ratio `|γ|²`.
    pub eta_t: f64,
    /// `|γ|`.
    pub gamma_magnitude: f64,
    pub iterations_used: usize,
    pub converged: bool,
    /// The field fell below `COLLAPSE_POWER`.
    pub collapsed: bool,
    pub eta_t_history: Vec<f64>,
    /// `(min, max)` of the last window when the run did not converge.
    pub oscillation_band: Option<(f64, f64)>,
}

/// Power below which the field counts as collapsed.
pub const COLLAPSE_POWER: f64 = 1e-30;

/// Uniform plane wave, optionally with a fixed-seed complex perturbation,
/// normalized to unit power.
pub fn seed_field(kind: SeedKind, grid: GridSpec, wavelength: f64, seed: u64) -> Field {
    let mut field = Field::from_fn(grid, wavelength, |_, _| Complex64::new(1.0, 0.0));
    if kind == SeedKind::PlaneWavePerturbed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in field.values.iter_mut() {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            *v += PERTURBATION_AMPLITUDE * Complex64::new(re, im);
        }
    }
    field
        .normalize()
        .expect("plane wave has positive power")
}

/// True when the last `window` estimates spread by less than `tolerance`
/// relative to their maximum.
pub fn window_is_stable(history: &[f64], window: usize, tolerance: f64) -> bool {
    if history.len() < window {
        return false;
    }
    let (lo, hi) = band(&history[history.len() - window..]);
    hi > 0.0 && (hi - lo) / hi < tolerance
}

fn band(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Solves for the dominant mode of `geometry` on `grid`.
pub fn solve_mode(geometry: &CavityGeometry, grid: &GridSpec, cfg: &FoxLiConfig) -> Result<ModeSolution> {
    cfg.validate()?;
    let cavity = CavityLoop::new(geometry, grid)?;
    let seed = seed_field(cfg.seed_kind, *grid, geometry.wavelength, cfg.perturbation_seed);
    iterate(&cavity, seed, cfg)
}

/// Power iteration of `cavity` from an arbitrary starting field.
pub fn iterate(cavity: &CavityLoop, start: Field, cfg: &FoxLiConfig) -> Result<ModeSolution> {
    cfg.validate()?;
    let mut field = start;
    if field.grid != *cavity.grid() {
        return Err(Error::InvalidGrid("seed grid differs from the cavity grid".into()));
    }
    field.normalize_in_place()?;
    let mut history = Vec::with_capacity(cfg.max_iterations.min(4096));
    for iteration in 1..=cfg.max_iterations {
        cavity.apply(&mut field.values);
        let eta = field.total_power()?;
        history.push(eta);
        if eta < COLLAPSE_POWER {
            field.values.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            return Ok(ModeSolution {
                mode: field,
                eta_t: 0.0,
                gamma_magnitude: 0.0,
                iterations_used: iteration,
                converged: true,
                collapsed: true,
                eta_t_history: history,
                oscillation_band: None,
            });
        }
        let scale = 1.0 / eta.sqrt();
        field.values.iter_mut().for_each(|v| *v *= scale);
        if window_is_stable(&history, cfg.stability_window, cfg.tolerance) {
            return Ok(finish(field, history, iteration, true, cfg));
        }
    }
    Ok(finish(field, history, cfg.max_iterations, false, cfg))
}

fn finish(mode: Field, history: Vec<f64>, iterations: usize, converged: bool, cfg: &FoxLiConfig) -> ModeSolution {
    let eta_t = *history.last().expect("at least one iteration");
    let window = cfg.stability_window.min(history.len());
    let oscillation_band = (!converged).then(|| band(&history[history.len() - window..]));
    ModeSolution {
        mode,
        eta_t,
        gamma_magnitude: eta_t.sqrt(),
        iterations_used: iterations,
        converged,
        collapsed: false,
        eta_t_history: history,
        oscillation_band,
    }
}

/// Size of a solved mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRadius {
    /// `sqrt(<r²>)` of the intensity.
    pub rms: f64,
    /// Radius enclosing [`ENCLOSED_FRACTION`] of the power.
    pub enclosed: f64,
}

/// `1 − e⁻²`: a Gaussian's `1/e²` radius encloses this fraction of its power.
pub const ENCLOSED_FRACTION: f64 = 0.864_664_716_763_387_3;

pub fn mode_radius(sol: &ModeSolution) -> Result<ModeRadius> {
    if sol.collapsed || sol.eta_t <= 0.0 {
        return Err(Error::DegenerateMode);
    }
    field_radius(&sol.mode)
}

/// Radii of any field with nonzero power.
pub fn field_radius(field: &Field) -> Result<ModeRadius> {
    Ok(ModeRadius {
        rms: field.rms_radius()?,
        enclosed: field.enclosed_radius(ENCLOSED_FRACTION)?,
    })
}
