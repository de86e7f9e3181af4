//! Sampled complex scalar fields on uniform square grids.
//!
//! Sample `(ix, iy)` sits at `x = (ix - n/2)·dx`, `y = (iy - n/2)·dx`, so the
//! grid centre is an exact sample. Values are stored row-major (`iy * n + ix`).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Grid geometry: `n` samples per axis over a square window of side `window` meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    window: f64,
}

impl GridSpec {
    pub fn new(n: usize, window: f64) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 64"
            )));
        }
        Self::unchecked(n, window)
    }

    /// Like [`GridSpec::new`] but without the size rule; used for the scratch
    /// grids produced inside optical elements and for small test grids.
    pub(crate) fn unchecked(n: usize, window: f64) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n = {n} must be even")));
        }
        if !(window.is_finite() && window > 0.0) {
            return Err(Error::InvalidGrid(format!("window = {window} m must be positive")));
        }
        Ok(Self { n, window })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    /// Sample pitch in meters.
    pub fn dx(&self) -> f64 {
        self.window / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Coordinate of sample index `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.dx()
    }

    /// Spatial frequency (cycles/m) of FFT bin `k` (unshifted FFT order).
    #[inline]
    pub fn freq(&self, k: usize) -> f64 {
        let n = self.n as isize;
        let k = k as isize;
        let signed = if k < n / 2 { k } else { k - n };
        signed as f64 / self.window
    }

    /// The window must leave a guard band around the largest aperture.
    pub fn check_guard_band(&self, max_aperture_diameter: f64) -> Result<()> {
        if self.window <= 2.0 * max_aperture_diameter {
            return Err(Error::InvalidGrid(format!(
                "window {:.4e} m must exceed twice the largest aperture diameter {:.4e} m",
                self.window, max_aperture_diameter
            )));
        }
        Ok(())
    }

    /// Quadratic lens phase of focal length `focal` must change by less than
    /// π per sample out to `radius`.
    pub fn check_lens_sampling(&self, wavelength: f64, focal: f64, radius: f64) -> Result<()> {
        let bound = wavelength * focal.abs() / (2.0 * radius);
        if self.dx() > bound {
            return Err(Error::AliasingRisk(format!(
                "pitch {:.3e} m exceeds {:.3e} m needed for a f = {focal} m lens out to r = {radius} m",
                self.dx(),
                bound
            )));
        }
        Ok(())
    }
}

/// Complex scalar field `u(x, y)` sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    /// Vacuum wavelength in meters.
    pub wavelength: f64,
}

impl Field {
    pub fn zeros(grid: GridSpec, wavelength: f64) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            wavelength,
        }
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(grid: GridSpec, wavelength: f64, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..n {
            let y = grid.coord(iy);
            for ix in 0..n {
                values.push(f(grid.coord(ix), y));
            }
        }
        Self {
            grid,
            values,
            wavelength,
        }
    }

    /// Unit-power TEM00 Gaussian `exp(-r²/w²)` centred at `(x0, y0)`.
    pub fn gaussian(grid: GridSpec, wavelength: f64, waist: f64, x0: f64, y0: f64) -> Self {
        let mut field = Self::from_fn(grid, wavelength, |x, y| {
            let r2 = (x - x0).powi(2) + (y - y0).powi(2);
            Complex64::new((-r2 / (waist * waist)).exp(), 0.0)
        });
        let amp = (2.0 / (std::f64::consts::PI * waist * waist)).sqrt();
        field.values.iter_mut().for_each(|v| *v *= amp);
        field
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx()
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.grid.n() + ix]
    }

    /// Errors with the first non-finite sample, scanning row-major.
    pub fn check_finite(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            Some(i) => Err(Error::NumericFault {
                x: i % self.n(),
                y: i / self.n(),
            }),
            None => Ok(()),
        }
    }

    /// Riemann sum of `|u|²·dx²`.
    pub fn total_power(&self) -> Result<f64> {
        self.check_finite()?;
        Ok(self.power_unchecked())
    }

    pub(crate) fn power_unchecked(&self) -> f64 {
        let dx = self.dx();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx * dx
    }

    /// Rescales to unit total power.
    pub fn normalize(&self) -> Result<Field> {
        let mut out = self.clone();
        out.normalize_in_place()?;
        Ok(out)
    }

    pub fn normalize_in_place(&mut self) -> Result<f64> {
        let power = self.total_power()?;
        if power <= 0.0 {
            return Err(Error::DegenerateField);
        }
        let scale = 1.0 / power.sqrt();
        self.values.iter_mut().for_each(|v| *v *= scale);
        Ok(power)
    }

    /// Intensity-weighted centroid `(x̄, ȳ)` in meters.
    pub fn centroid(&self) -> Result<(f64, f64)> {
        self.check_finite()?;
        let n = self.n();
        let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for iy in 0..n {
            let y = self.grid.coord(iy);
            for ix in 0..n {
                let w = self.values[iy * n + ix].norm_sqr();
                sw += w;
                sx += w * self.grid.coord(ix);
                sy += w * y;
            }
        }
        if sw <= 0.0 {
            return Err(Error::DegenerateField);
        }
        Ok((sx / sw, sy / sw))
    }

    /// RMS radius `sqrt(<r²>)` about the centroid.
    pub fn rms_radius(&self) -> Result<f64> {
        let (cx, cy) = self.centroid()?;
        let n = self.n();
        let (mut sw, mut sr) = (0.0, 0.0);
        for iy in 0..n {
            let dy = self.grid.coord(iy) - cy;
            for ix in 0..n {
                let w = self.values[iy * n + ix].norm_sqr();
                let dx = self.grid.coord(ix) - cx;
                sw += w;
                sr += w * (dx * dx + dy * dy);
            }
        }
        Ok((sr / sw).sqrt())
    }

    /// Radius about the centroid enclosing `fraction` of the total power.
    ///
    /// Samples are binned by radius and the crossing is linearly interpolated
    /// between neighbouring sample radii.
    pub fn enclosed_radius(&self, fraction: f64) -> Result<f64> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(crate::error::invalid("fraction", "must lie in (0, 1]"));
        }
        let (cx, cy) = self.centroid()?;
        let n = self.n();
        let mut samples: Vec<(f64, f64)> = Vec::with_capacity(self.grid.len());
        let mut total = 0.0;
        for iy in 0..n {
            let dy = self.grid.coord(iy) - cy;
            for ix in 0..n {
                let w = self.values[iy * n + ix].norm_sqr();
                if w > 0.0 {
                    let dx = self.grid.coord(ix) - cx;
                    samples.push(((dx * dx + dy * dy).sqrt(), w));
                    total += w;
                }
            }
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let target = fraction * total;
        let (mut acc, mut prev_r, mut prev_acc) = (0.0, 0.0, 0.0);
        for (r, w) in samples {
            acc += w;
            if acc >= target {
                let t = if acc > prev_acc {
                    (target - prev_acc) / (acc - prev_acc)
                } else {
                    1.0
                };
                return Ok(prev_r + t * (r - prev_r));
            }
            prev_r = r;
            prev_acc = acc;
        }
        Ok(prev_r)
    }
}
