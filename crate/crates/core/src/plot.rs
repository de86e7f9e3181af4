//! Deterministic SVG line charts of sweep results.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::SweepResult;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 280.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 52.0;
const TICKS: usize = 5;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    values: Vec<f64>,
}

struct Panel<'a> {
    y_label: &'a str,
    series: Vec<Series<'a>>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * hi.abs().max(1.0) {
        let pad = 0.5 * hi.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn draw_panel(out: &mut String, panel: &Panel, xs: &[f64], x_label: &str, top: f64) {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let (x0, x1) = bounds(xs.iter().copied());
    let (y0, y1) = bounds(panel.series.iter().flat_map(|s| s.values.iter().copied()));
    let y0 = y0.min(0.0);
    let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| top + MARGIN_TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let _ = writeln!(
        out,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
        MARGIN_LEFT,
        top + MARGIN_TOP,
        plot_w,
        plot_h
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            px(xv),
            top + PANEL_HEIGHT - MARGIN_BOTTOM + 16.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            py(yv) + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        top + PANEL_HEIGHT - 12.0,
        x_label
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        top + MARGIN_TOP + plot_h / 2.0,
        top + MARGIN_TOP + plot_h / 2.0,
        panel.y_label
    );
    for (k, s) in panel.series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&s.values)
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| (px(x), py(y)))
            .collect();
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                s.color,
                path.join(" ")
            );
        }
        for (x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{}"/>"#, s.color);
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="{}">{}</text>"#,
            MARGIN_LEFT + 8.0 + 150.0 * k as f64,
            top + MARGIN_TOP - 8.0,
            s.color,
            s.label
        );
    }
}

/// Two stacked charts: efficiency, and beam and electrical power.
pub fn render_svg(result: &SweepResult) -> Result<String> {
    if result.records.is_empty() {
        return Err(Error::NothingToPlot);
    }
    let lateral = result.metadata.axis != "z";
    let (scale, x_label) = if lateral {
        (100.0, format!("displacement {} (cm)", result.metadata.axis))
    } else {
        (1.0, "displacement z (m)".to_string())
    };
    let xs: Vec<f64> = result.records.iter().map(|r| r.displacement * scale).collect();
    let efficiency = Panel {
        y_label: "transmission efficiency",
        series: vec![Series {
            label: "eta_t",
            color: "#1f4e9c",
            values: result.records.iter().map(|r| r.eta_t).collect(),
        }],
    };
    let power = Panel {
        y_label: "power (W)",
        series: vec![
            Series {
                label: "beam power (W)",
                color: "#b3261e",
                values: result.records.iter().map(|r| r.beam_power).collect(),
            },
            Series {
                label: "electrical power (W)",
                color: "#2e7d32",
                values: result.records.iter().map(|r| r.electrical_power).collect(),
            },
        ],
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{:.0}" viewBox="0 0 {WIDTH:.0} {:.0}">"#,
        2.0 * PANEL_HEIGHT,
        2.0 * PANEL_HEIGHT
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    draw_panel(&mut out, &efficiency, &xs, &x_label, 0.0);
    draw_panel(&mut out, &power, &xs, &x_label, PANEL_HEIGHT);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_plot(result: &SweepResult, path: &Path) -> Result<()> {
    let svg = render_svg(result)?;
    std::fs::write(path, svg).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
