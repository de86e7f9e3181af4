use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use rbcsim::config::{Axis, ExperimentConfig};
use rbcsim::foxli::{mode_radius, solve_mode};
use rbcsim::power::{calibrate_gain, output_beam_power, output_electrical_power, threshold_power};
use rbcsim::ray::{captured_count, cavity_is_stable, cavity_path, ray_fan, FtcrGeometry, DEFAULT_MAX_BOUNCES};
use rbcsim::{plot, report, safety, sweep};

#[derive(Parser, Debug)]
#[command(name = "rbcsim", version, about = "Resonant beam cavity simulator")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML experiment configuration; omitted keys take baseline values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "RBCSIM_OUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write SVG charts.
    #[arg(long, global = true, overrides_with = "no_plot")]
    plot: bool,
    /// Skip SVG charts.
    #[arg(long, global = true)]
    no_plot: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one cavity mode and dump the field.
    Mode {
        /// Also write the field as little-endian binary.
        #[arg(long)]
        binary: bool,
    },
    /// Sweep the receiver displacement along one axis.
    Sweep {
        #[arg(long)]
        axis: Option<Axis>,
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        stop: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Radiant exposure of a blocking object.
    Safety,
    /// Ray-optics stability over a list of separations.
    Stability {
        /// Separations in meters.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 3.0, 3.5])]
        distances: Vec<f64>,
    },
    /// Ray-fan capture counts for the configured and plain cat's-eye cavities.
    Raytrace {
        /// Rays per side of the fan.
        #[arg(long, default_value_t = 10)]
        side: usize,
        #[arg(long, default_value_t = 2e-3)]
        x_max: f64,
        #[arg(long, default_value_t = 5e-3)]
        theta_max: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_BOUNCES)]
        bounces: usize,
    },
    /// Gain-length product reproducing a beam power at unit efficiency.
    Calibrate {
        /// Target beam power in watts.
        #[arg(long, default_value_t = 5.0)]
        target: f64,
    },
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if g.no_plot {
        cfg.output.emit_plots = false;
    } else if g.plot {
        cfg.output.emit_plots = true;
    }
    let out = g.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    match cli.command {
        Command::Mode { binary } => run_mode(&cfg, &out, binary),
        Command::Sweep { axis, start, stop, steps } => {
            if let Some(a) = axis {
                cfg.sweep.axis = a;
            }
            if let Some(v) = start {
                cfg.sweep.start_m = v;
            }
            if let Some(v) = stop {
                cfg.sweep.stop_m = v;
            }
            if let Some(v) = steps {
                cfg.sweep.steps = v;
            }
            run_sweep(&cfg, &out, g.threads)
        }
        Command::Safety => run_safety(&cfg, &out),
        Command::Stability { distances } => run_stability(&cfg, &out, &distances),
        Command::Raytrace { side, x_max, theta_max, bounces } => {
            run_raytrace(&cfg, &out, side, x_max, theta_max, bounces)
        }
        Command::Calibrate { target } => run_calibrate(&cfg, &out, target),
    }
}

fn run_mode(cfg: &ExperimentConfig, out: &Path, binary: bool) -> Result<()> {
    cfg.validate()?;
    let geometry = cfg.geometry();
    let sol = solve_mode(&geometry, &cfg.grid_spec()?, &cfg.foxli_config())?;
    let power = cfg.power_params_for(&sol)?;
    let eta = sol.eta_t.clamp(0.0, 1.0);
    let mut summary = String::from("key,value\n");
    let mut row = |k: &str, v: String| {
        println!("{k:<22} {v}");
        let _ = writeln!(summary, "{k},{v}");
    };
    row("eta_t", format!("{:.10}", sol.eta_t));
    row("iterations", sol.iterations_used.to_string());
    row("converged", sol.converged.to_string());
    row("collapsed", sol.collapsed.to_string());
    if let Ok(r) = mode_radius(&sol) {
        row("rms_radius_m", format!("{:.6e}", r.rms));
        row("enclosed_radius_m", format!("{:.6e}", r.enclosed));
    }
    row("beam_power_w", format!("{:.6}", output_beam_power(eta, &power)?));
    row("electrical_power_w", format!("{:.6}", output_electrical_power(eta, &power)?));
    write(&out.join("mode_summary.csv"), &summary)?;
    report::write_field_csv(&sol.mode, &out.join("mode_field.csv"))?;
    if binary {
        report::write_field_binary(&sol.mode, &out.join("mode_field.bin"))?;
    }
    Ok(())
}

fn run_sweep(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<()> {
    let result = sweep::run_sweep(cfg, threads)?;
    println!(
        "{:>14} {:>10} {:>10} {:>10} {:>6} {:>5}",
        "displacement_m", "eta_t", "beam_W", "elec_W", "iters", "conv"
    );
    for r in &result.records {
        println!(
            "{:>14.4} {:>10.6} {:>10.4} {:>10.4} {:>6} {:>5}",
            r.displacement, r.eta_t, r.beam_power, r.electrical_power, r.iterations, r.converged
        );
        if let Some(e) = &r.error {
            eprintln!("  point {:.4} failed: {e}", r.displacement);
        }
    }
    let stem = format!("sweep_{}", cfg.sweep.axis.name());
    report::emit_csv(&result, &out.join(format!("{stem}.csv")))?;
    if cfg.output.emit_plots {
        plot::emit_plot(&result, &out.join(format!("{stem}.svg")))?;
    }
    Ok(())
}

fn run_safety(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let params = cfg.safety_params()?;
    let r = safety::radiant_exposure(&params)?;
    let rows = [
        ("circulating_power_w", format!("{:.4}", r.circulating_power)),
        ("storage_time_s", format!("{:.4e}", r.storage_time)),
        ("beam_area_m2", format!("{:.4e}", params.beam_area)),
        ("radiant_exposure_j_per_m2", format!("{:.4e}", r.radiant_exposure)),
        ("mpe_j_per_m2", format!("{:.1}", params.mpe)),
    ];
    let mut csv = String::from("key,value\n");
    for (k, v) in &rows {
        println!("{k:<28} {v}");
        let _ = writeln!(csv, "{k},{v}");
    }
    let verdict = if r.compliant { "compliant" } else { "non-compliant" };
    println!("{verdict}");
    let _ = writeln!(csv, "verdict,{verdict}");
    write(&out.join("safety.csv"), &csv)
}

fn run_stability(cfg: &ExperimentConfig, out: &Path, distances: &[f64]) -> Result<()> {
    let g = cfg.geometry();
    let mut csv = String::from("distance_m,verdict,margin_m\n");
    println!("{:>10} {:>10} {:>10}", "d_m", "verdict", "margin_m");
    for &d in distances {
        let v = cavity_is_stable(&g.tx_ftcr, &g.rx_ftcr, d)?;
        let margin = v.margin().map(|m| format!("{m:.4}")).unwrap_or_else(|| "nan".into());
        println!("{d:>10.3} {:>10} {margin:>10}", v.label());
        let _ = writeln!(csv, "{d},{},{margin}", v.label());
    }
    write(&out.join("stability.csv"), &csv)
}

fn run_raytrace(
    cfg: &ExperimentConfig,
    out: &Path,
    side: usize,
    x_max: f64,
    theta_max: f64,
    bounces: usize,
) -> Result<()> {
    let g = cfg.geometry();
    let d = g.separation();
    let fan = ray_fan(side, x_max, theta_max);
    let plain = |f: &FtcrGeometry| FtcrGeometry { interval: f.focal, ..*f };
    let cases = [
        ("configured", g.tx_ftcr, g.rx_ftcr),
        ("plain_cat_eye", plain(&g.tx_ftcr), plain(&g.rx_ftcr)),
    ];
    let mut csv = String::from("cavity,rays,captured\n");
    for (name, tx, rx) in cases {
        let path = cavity_path(&tx, &rx, g.gain_radius, d)?;
        let n = captured_count(&fan, &path, bounces)?;
        println!("{name:<14} {n}/{} rays captured after {bounces} bounces", fan.len());
        let _ = writeln!(csv, "{name},{},{n}", fan.len());
    }
    write(&out.join("raytrace.csv"), &csv)
}

fn run_calibrate(cfg: &ExperimentConfig, out: &Path, target: f64) -> Result<()> {
    let mut p = cfg.power_params()?;
    p.g0_lg = calibrate_gain(&p, target)?;
    let threshold = threshold_power(1.0, &p)?;
    println!("g0_lg                  {:.6}", p.g0_lg);
    println!("threshold_power_w      {threshold:.4}");
    write(
        &out.join("calibrate.csv"),
        &format!("key,value\ntarget_w,{target}\ng0_lg,{}\nthreshold_power_w,{threshold}\n", p.g0_lg),
    )
}
