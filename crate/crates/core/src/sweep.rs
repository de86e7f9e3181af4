//! Displacement sweeps: one mode solve and power evaluation per point.

use rayon::prelude::*;

use crate::config::{Axis, ExperimentConfig};
use crate::error::{Error, Result};
use crate::foxli::{mode_radius, solve_mode};
use crate::power::{output_beam_power, output_electrical_power};

/// Version string recorded in run metadata.
pub const SOFTWARE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// Displacement along the swept axis (m).
    pub displacement: f64,
    pub eta_t: f64,
    pub beam_power: f64,
    pub electrical_power: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Enclosed-power mode radius (m); NaN when undefined.
    pub mode_radius: f64,
    /// Solver fault for this point, if any.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMetadata {
    pub config_hash: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub software_version: String,
    pub axis: String,
}

impl RunMetadata {
    /// Metadata for `cfg`; the timestamp honours `SOURCE_DATE_EPOCH`.
    pub fn for_config(cfg: &ExperimentConfig, axis: Axis) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        Self {
            config_hash: cfg.hash(),
            timestamp,
            software_version: SOFTWARE_VERSION.to_string(),
            axis: axis.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub metadata: RunMetadata,
    pub records: Vec<SweepRecord>,
}

/// Solves one point with the swept axis displaced by `displacement`.
pub fn run_point(cfg: &ExperimentConfig, axis: Axis, displacement: f64) -> SweepRecord {
    match try_point(cfg, axis, displacement) {
        Ok(r) => r,
        Err(e) => SweepRecord {
            displacement,
            eta_t: 0.0,
            beam_power: 0.0,
            electrical_power: 0.0,
            iterations: 0,
            converged: false,
            mode_radius: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

fn try_point(cfg: &ExperimentConfig, axis: Axis, displacement: f64) -> Result<SweepRecord> {
    let mut geometry = cfg.geometry();
    geometry.displacement[axis.index()] = displacement;
    let grid = cfg.grid_spec()?;
    let sol = solve_mode(&geometry, &grid, &cfg.foxli_config())?;
    let power = cfg.power_params_for(&sol)?;
    let eta = sol.eta_t.clamp(0.0, 1.0);
    Ok(SweepRecord {
        displacement,
        eta_t: sol.eta_t,
        beam_power: output_beam_power(eta, &power)?,
        electrical_power: output_electrical_power(eta, &power)?,
        iterations: sol.iterations_used,
        converged: sol.converged,
        mode_radius: mode_radius(&sol).map(|r| r.enclosed).unwrap_or(f64::NAN),
        error: None,
    })
}

/// Runs the configured sweep on `threads` workers (all cores when `None`).
/// Records come back ordered by displacement.
pub fn run_sweep(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<SweepResult> {
    cfg.validate_for_sweep(cfg.sweep.axis)?;
    let points = cfg.sweep.points();
    run_points(cfg, cfg.sweep.axis, &points, threads)
}

/// Solves an explicit list of displacements along `axis`.
pub fn run_points(
    cfg: &ExperimentConfig,
    axis: Axis,
    points: &[f64],
    threads: Option<usize>,
) -> Result<SweepResult> {
    cfg.validate_for_sweep(axis)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(crate::error::invalid("threads", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut records: Vec<SweepRecord> =
        pool.install(|| points.par_iter().map(|&d| run_point(cfg, axis, d)).collect());
    records.sort_by(|a, b| a.displacement.total_cmp(&b.displacement));
    Ok(SweepResult {
        metadata: RunMetadata::for_config(cfg, axis),
        records,
    })
}
