//! CSV persistence of sweep results and field dumps.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, GridSpec};
use crate::sweep::{RunMetadata, SweepRecord, SweepResult};

pub const CSV_HEADER: &str =
    "displacement_m,eta_t,beam_power_w,electrical_power_w,iterations,converged,mode_radius_m";

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text: `#` metadata lines, the header, then one row per record.
pub fn render_csv(result: &SweepResult) -> String {
    let m = &result.metadata;
    let mut out = String::new();
    let _ = writeln!(out, "# config_hash = {}", m.config_hash);
    let _ = writeln!(out, "# timestamp_unix = {}", m.timestamp);
    let _ = writeln!(out, "# software_version = {}", m.software_version);
    let _ = writeln!(out, "# axis = {}", m.axis);
    for (i, r) in result.records.iter().enumerate() {
        if let Some(e) = &r.error {
            let _ = writeln!(out, "# error row {i}: {}", e.replace('\n', " "));
        }
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &result.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(r.displacement),
            num(r.eta_t),
            num(r.beam_power),
            num(r.electrical_power),
            r.iterations,
            r.converged,
            num(r.mode_radius)
        );
    }
    out
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(result)).map_err(|e| io_err(path, e))
}

/// Parses text produced by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<SweepResult> {
    let bad = |line: usize, what: &str| Error::Config(format!("csv line {}: {what}", line + 1));
    let mut meta = RunMetadata {
        config_hash: String::new(),
        timestamp: 0,
        software_version: String::new(),
        axis: String::new(),
    };
    let mut errors: Vec<(usize, String)> = Vec::new();
    let mut records = Vec::new();
    let mut seen_header = false;
    for (ln, line) in text.lines().enumerate() {
        if let Some(comment) = line.strip_prefix("# ") {
            if let Some(rest) = comment.strip_prefix("error row ") {
                let (idx, msg) = rest.split_once(": ").ok_or_else(|| bad(ln, "error line"))?;
                let idx = idx.parse().map_err(|_| bad(ln, "error row index"))?;
                errors.push((idx, msg.to_string()));
            } else if let Some((k, v)) = comment.split_once(" = ") {
                match k {
                    "config_hash" => meta.config_hash = v.to_string(),
                    "timestamp_unix" => meta.timestamp = v.parse().map_err(|_| bad(ln, "timestamp"))?,
                    "software_version" => meta.software_version = v.to_string(),
                    "axis" => meta.axis = v.to_string(),
                    _ => {}
                }
            }
            continue;
        }
        if !seen_header {
            if line != CSV_HEADER {
                return Err(bad(ln, "unexpected header"));
            }
            seen_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(bad(ln, "expected 7 columns"));
        }
        let f = |i: usize| cols[i].parse::<f64>().map_err(|_| bad(ln, "number"));
        records.push(SweepRecord {
            displacement: f(0)?,
            eta_t: f(1)?,
            beam_power: f(2)?,
            electrical_power: f(3)?,
            iterations: cols[4].parse().map_err(|_| bad(ln, "iterations"))?,
            converged: cols[5].parse().map_err(|_| bad(ln, "converged"))?,
            mode_radius: f(6)?,
            error: None,
        });
    }
    if !seen_header {
        return Err(Error::Config("csv has no header".into()));
    }
    for (i, msg) in errors {
        if let Some(r) = records.get_mut(i) {
            r.error = Some(msg);
        }
    }
    Ok(SweepResult {
        metadata: meta,
        records,
    })
}

pub fn read_csv(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_csv(&text)
}

/// Field dump as CSV rows of `x_m,y_m,intensity,phase_rad`.
pub fn render_field_csv(field: &Field) -> String {
    let g = field.grid;
    let n = g.n();
    let mut out = String::with_capacity(g.len() * 96);
    out.push_str("x_m,y_m,intensity,phase_rad\n");
    for iy in 0..n {
        for ix in 0..n {
            let v = field.at(ix, iy);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                num(g.coord(ix)),
                num(g.coord(iy)),
                num(v.norm_sqr()),
                num(v.arg())
            );
        }
    }
    out
}

pub fn write_field_csv(field: &Field, path: &Path) -> Result<()> {
    std::fs::write(path, render_field_csv(field)).map_err(|e| io_err(path, e))
}

/// Binary field dump, all little-endian `f64`: `n`, pitch (m), wavelength (m),
/// then `(re, im)` pairs in row-major order.
pub fn encode_field(field: &Field) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 16 * field.values.len());
    for v in [field.n() as f64, field.dx(), field.wavelength] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &field.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    let bad = |m: &str| Error::Config(format!("field dump: {m}"));
    let word = |i: usize| -> Result<f64> {
        let b = bytes.get(8 * i..8 * i + 8).ok_or_else(|| bad("truncated"))?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    };
    let n = word(0)?;
    if !(n >= 2.0 && n.fract() == 0.0 && n <= 65536.0) {
        return Err(bad("bad size"));
    }
    let n = n as usize;
    if bytes.len() != 24 + 16 * n * n {
        return Err(bad("length does not match size"));
    }
    let grid = GridSpec::unchecked(n, word(1)? * n as f64)?;
    let values = (0..n * n)
        .map(|i| Ok(Complex64::new(word(3 + 2 * i)?, word(4 + 2 * i)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Field {
        grid,
        values,
        wavelength: word(2)?,
    })
}

pub fn write_field_binary(field: &Field, path: &Path) -> Result<()> {
    std::fs::write(path, encode_field(field)).map_err(|e| io_err(path, e))
}
