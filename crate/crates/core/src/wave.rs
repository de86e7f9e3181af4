//! Field-transfer operators on uniform grids: angular-spectrum propagation,
//! lateral shift, hard apertures, thin lenses and the cat's-eye retroreflector.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::beam::{Frame, PlanBuilder};
use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::{Field, GridSpec};
use crate::ray::FtcrGeometry;

/// Phase of the free-space transfer function `exp(i2π d·sqrt(1/λ² − ν²))`,
/// or `None` for evanescent frequencies.
///
/// The on-axis part `2π d/λ` is reduced modulo 2π with a fused remainder so
/// long distances keep full precision.
pub fn propagation_phase(distance: f64, wavelength: f64, fx: f64, fy: f64) -> Option<f64> {
    let s = wavelength * wavelength * (fx * fx + fy * fy);
    if s >= 1.0 {
        return None;
    }
    let cycles = (distance / wavelength).round();
    let rem = (-wavelength).mul_add(cycles, distance);
    let axial = 2.0 * PI * rem / wavelength;
    let deficit = 2.0 * PI * (distance / wavelength) * s / (1.0 + (1.0 - s).sqrt());
    Some(axial - deficit)
}

/// Transfer function in unshifted FFT order; evanescent bins are zero.
pub fn propagation_kernel(grid: &GridSpec, wavelength: f64, distance: f64) -> Vec<Complex64> {
    let n = grid.n();
    let mut kernel = Vec::with_capacity(grid.len());
    for ky in 0..n {
        let fy = grid.freq(ky);
        for kx in 0..n {
            kernel.push(match propagation_phase(distance, wavelength, grid.freq(kx), fy) {
                Some(phase) => Complex64::from_polar(1.0, phase),
                None => Complex64::new(0.0, 0.0),
            });
        }
    }
    kernel
}

fn filter(field: &Field, kernel: &[Complex64]) -> Field {
    let fft = Fft2::new(field.n());
    let mut out = field.clone();
    fft.forward(&mut out.values);
    out.values.iter_mut().zip(kernel).for_each(|(v, k)| *v *= k);
    fft.inverse(&mut out.values);
    out
}

/// Angular-spectrum propagation over `distance` meters.
pub fn propagate(field: &Field, distance: f64) -> Result<Field> {
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(Error::InvalidDistance(distance));
    }
    field.check_finite()?;
    if distance == 0.0 {
        return Ok(field.clone());
    }
    let kernel = propagation_kernel(&field.grid, field.wavelength, distance);
    Ok(filter(field, &kernel))
}

/// Translates the field content by `(sx, sy)` through a spectral phase ramp.
pub fn shift(field: &Field, sx: f64, sy: f64) -> Result<Field> {
    let window = field.grid.window();
    if !(sx.abs() < window / 4.0 && sy.abs() < window / 4.0) {
        return Err(Error::ShiftOverflow { sx, sy, window });
    }
    field.check_finite()?;
    if sx == 0.0 && sy == 0.0 {
        return Ok(field.clone());
    }
    let g = field.grid;
    let n = g.n();
    let mut kernel = Vec::with_capacity(g.len());
    for ky in 0..n {
        let fy = g.freq(ky);
        for kx in 0..n {
            kernel.push(Complex64::from_polar(1.0, -2.0 * PI * (g.freq(kx) * sx + fy * sy)));
        }
    }
    Ok(filter(field, &kernel))
}

fn circular_mask(field: &Field, radius: f64) -> Result<Field> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(crate::error::invalid("radius", "must be positive"));
    }
    let g = field.grid;
    let n = g.n();
    let r2 = radius * radius;
    let mut out = field.clone();
    for iy in 0..n {
        let y = g.coord(iy);
        for ix in 0..n {
            let x = g.coord(ix);
            if x * x + y * y > r2 {
                out.values[iy * n + ix] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}

/// Gain medium as a circular aperture of radius `radius`.
pub fn apply_gain_aperture(field: &Field, radius: f64) -> Result<Field> {
    circular_mask(field, radius)
}

/// Plane mirror of radius `radius` as a circular indicator.
pub fn apply_mirror(field: &Field, radius: f64) -> Result<Field> {
    circular_mask(field, radius)
}

/// Thin-lens phase `−π(x² + y²)/(λf)` in radians.
pub fn lens_phase(x: f64, y: f64, wavelength: f64, focal: f64) -> f64 {
    -PI * (x * x + y * y) / (wavelength * focal)
}

/// Converging lens of focal length `focal` and radius `radius`.
pub fn apply_lens(field: &Field, focal: f64, radius: f64) -> Result<Field> {
    if !(focal.is_finite() && focal > 0.0) {
        return Err(crate::error::invalid("focal", "must be positive"));
    }
    apply_thin_lens(field, focal, radius)
}

/// Thin lens of any nonzero focal length; negative values diverge.
pub fn apply_thin_lens(field: &Field, focal: f64, radius: f64) -> Result<Field> {
    if !(focal.is_finite() && focal != 0.0) {
        return Err(crate::error::invalid("focal", "must be finite and nonzero"));
    }
    let g = field.grid;
    let reach = radius.min(g.window() / std::f64::consts::SQRT_2);
    g.check_lens_sampling(field.wavelength, focal, reach)?;
    let mut out = circular_mask(field, radius)?;
    let n = g.n();
    for iy in 0..n {
        let y = g.coord(iy);
        for ix in 0..n {
            let phase = lens_phase(g.coord(ix), y, field.wavelength, focal);
            out.values[iy * n + ix] *= Complex64::from_polar(1.0, phase);
        }
    }
    Ok(out)
}

/// Retroreflector applied element by element on the input grid.
///
/// Needs a pitch fine enough to sample the full lens phase, so it is only
/// practical for small apertures.
pub fn ftcr_reflect_direct(field: &Field, g: &FtcrGeometry) -> Result<Field> {
    g.validate()?;
    let u = propagate(field, g.focal)?;
    let u = apply_lens(&u, g.focal, g.radius)?;
    let u = propagate(&u, g.interval)?;
    let u = apply_mirror(&u, g.radius)?;
    let u = apply_mirror(&u, g.radius)?;
    let u = propagate(&u, g.interval)?;
    let u = apply_lens(&u, g.focal, g.radius)?;
    propagate(&u, g.focal)
}

/// Records a retroreflector whose optical axis meets the reference plane at
/// `axis`. The output frame is the paraxial image of the input frame.
pub(crate) fn record_ftcr(b: &mut PlanBuilder, axis: [f64; 2], g: &FtcrGeometry) -> Result<()> {
    g.validate()?;
    let input = b.frame();
    let power = g.focal_length()?.power();
    let lam = b.wavelength();
    let offset = [input.center[0] - axis[0], input.center[1] - axis[1]];
    let out_carrier = [
        -input.carrier[0] + offset[0] * power / lam,
        -input.carrier[1] + offset[1] * power / lam,
    ];
    let out_center = [axis[0] - offset[0], axis[1] - offset[1]];

    b.propagate(g.focal, None)?;
    b.aperture(axis, g.radius)?;
    b.lens(axis, g.focal)?;
    b.fresnel(g.interval, g.radius)?;
    b.aperture(axis, g.radius)?;
    b.aperture(axis, g.radius)?;
    b.fresnel(g.interval, g.radius)?;
    b.aperture(axis, g.radius)?;
    b.lens(axis, g.focal)?;
    b.fold_curvature(g.radius)?;
    b.set_carrier(out_carrier)?;
    b.propagate(g.focal, Some(out_center))
}

/// Retroreflector operator: focal plane to lens, lens, lens to mirror,
/// mirror, and back through the same lens to the focal plane.
///
/// Inside the retroreflector the field is carried in a curvature frame with
/// paraxial Fresnel steps, so the pitch of `field` need not resolve the lens
/// phase.
pub fn ftcr_reflect(field: &Field, g: &FtcrGeometry) -> Result<Field> {
    field.check_finite()?;
    let mut b = PlanBuilder::new(field.n(), field.wavelength, Frame::new(field.dx()))?;
    record_ftcr(&mut b, [0.0, 0.0], g)?;
    let plan = b.finish();
    let mut out = field.clone();
    plan.apply(&mut out.values);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAM: f64 = 1.064e-6;

    fn grid(n: usize, w: f64) -> GridSpec {
        GridSpec::new(n, w).unwrap()
    }

    fn max_diff(a: &Field, b: &Field) -> f64 {
        a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn peak(f: &Field) -> f64 {
        f.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_distance_is_identity() {
        let f = Field::gaussian(grid(64, 4e-3), LAM, 0.5e-3, 0.0, 0.0);
        assert!(max_diff(&propagate(&f, 0.0).unwrap(), &f) < 1e-12);
        assert_eq!(propagate(&f, -1.0), Err(Error::InvalidDistance(-1.0)));
    }

    #[test]
    fn plane_wave_picks_up_axial_phase() {
        let f = Field::from_fn(grid(64, 4e-3), LAM, |_, _| Complex64::new(1.0, 0.0));
        let out = propagate(&f, 1.0).unwrap();
        let expected = Complex64::from_polar(1.0, 2.0 * PI * 1.0 / LAM);
        for v in &out.values {
            assert!((v - expected).norm() < 1e-6);
        }
    }

    #[test]
    fn shift_zero_and_inverse() {
        let f = Field::gaussian(grid(128, 8e-3), LAM, 0.5e-3, 0.0, 0.0);
        assert!(max_diff(&shift(&f, 0.0, 0.0).unwrap(), &f) < 1e-12);
        let back = shift(&shift(&f, 1e-3, -0.5e-3).unwrap(), -1e-3, 0.5e-3).unwrap();
        assert!(max_diff(&back, &f) / peak(&f) < 1e-10);
        assert!(matches!(shift(&f, 2e-3, 0.0), Err(Error::ShiftOverflow { .. })));
    }

    #[test]
    fn shift_moves_centroid() {
        let g = grid(256, 16e-3);
        let f = Field::gaussian(g, LAM, 0.5e-3, 0.0, 0.0);
        let (x, y) = shift(&f, 1e-3, 0.0).unwrap().centroid().unwrap();
        assert!((x - 1e-3).abs() < g.dx() && y.abs() < g.dx());
    }

    #[test]
    fn aperture_examples() {
        let g = grid(128, 1.0);
        let inside = Field::gaussian(g, LAM, 0.02, 0.0, 0.0);
        assert!(max_diff(&apply_gain_aperture(&inside, 0.3).unwrap(), &inside) < 1e-30);
        let outside = Field::gaussian(g, LAM, 0.02, 0.3, 0.3);
        let cut = apply_mirror(&outside, 0.05).unwrap();
        assert!(cut.total_power().unwrap() < 1e-30);
        let tiny = apply_mirror(&Field::from_fn(g, LAM, |_, _| Complex64::new(1.0, 0.0)), 1e-4).unwrap();
        assert_eq!(tiny.values.iter().filter(|v| v.norm() > 0.0).count(), 1);
        assert!(apply_mirror(&inside, 0.0).is_err());
    }

    #[test]
    fn lens_phase_values() {
        assert_eq!(lens_phase(0.0, 0.0, LAM, 50.4e-3), 0.0);
        assert!((lens_phase(7e-3, 0.0, LAM, 50.4e-3) + 2870.6).abs() < 0.1);
    }

    #[test]
    fn lens_sampling_and_sign_rules() {
        let f = Field::gaussian(grid(512, 56e-3), LAM, 1e-3, 0.0, 0.0);
        assert!(matches!(apply_lens(&f, 50.4e-3, 7e-3), Err(Error::AliasingRisk(_))));
        assert!(apply_lens(&f, -1.0, 7e-3).is_err());
    }

    #[test]
    fn lens_focuses_plane_wave_on_axis() {
        let g = grid(256, 2e-3);
        let f = Field::from_fn(g, LAM, |_, _| Complex64::new(1.0, 0.0));
        let focal = 50e-3;
        let out = propagate(&apply_lens(&f, focal, 0.8e-3).unwrap(), focal).unwrap();
        let (imax, _) = out
            .values
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
        let n = g.n();
        assert_eq!((imax % n, imax / n), (n / 2, n / 2));
    }

    #[test]
    fn ftcr_preserves_axis_and_power_bound() {
        let g = grid(512, 56e-3);
        let f = Field::gaussian(g, LAM, 0.5e-3, 0.0, 0.0);
        let out = ftcr_reflect(&f, &FtcrGeometry::BASELINE).unwrap();
        let (x, y) = out.centroid().unwrap();
        assert!(x.abs() < g.dx() && y.abs() < g.dx());
        assert!(out.total_power().unwrap() <= f.total_power().unwrap() * (1.0 + 1e-12));
        let zero = ftcr_reflect(&Field::zeros(g, LAM), &FtcrGeometry::BASELINE).unwrap();
        assert_eq!(zero.total_power().unwrap(), 0.0);
    }
}
