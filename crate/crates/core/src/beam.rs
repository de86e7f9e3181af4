//! Chief-ray framed beams and compiled operator plans.
//!
//! A framed beam stores an envelope `v` on an `n × n` grid of pitch `p`
//! together with a frame: centre `c`, carrier `ν` and curvature `κ`. The
//! physical field at `X = c + ξ` is
//!
//! ```text
//! u(c + ξ) = v(ξ) · exp(i2π ν·ξ) · exp(iπ κ |ξ|² / λ)
//! ```
//!
//! Tilts and lens curvatures live in the frame, so the envelope stays slowly
//! varying and a coarse grid resolves steeply tilted, strongly focused beams.
//! Operators only record work into a [`Plan`]; a plan is then replayed on many
//! envelopes without recomputing kernels.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{fftshift, transpose, Fft2};

/// Frame of a chief-ray framed beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    /// Grid centre in the current transverse coordinates (m).
    pub center: [f64; 2],
    /// Carrier spatial frequency (cycles/m).
    pub carrier: [f64; 2],
    /// Wavefront curvature (1/m); positive diverges.
    pub curvature: f64,
    /// Sample pitch (m).
    pub pitch: f64,
}

impl Frame {
    pub fn new(pitch: f64) -> Self {
        Self {
            center: [0.0; 2],
            carrier: [0.0; 2],
            curvature: 0.0,
            pitch,
        }
    }

    pub fn with_carrier(mut self, carrier: [f64; 2]) -> Self {
        self.carrier = carrier;
        self
    }

    pub fn with_center(mut self, center: [f64; 2]) -> Self {
        self.center = center;
        self
    }
}

#[derive(Debug, Clone)]
enum Step {
    Mul(Arc<Vec<Complex64>>),
    Scale(Complex64),
    Forward,
    /// Unnormalized inverse transform.
    Backward,
    Shift,
    Transpose,
    Checkpoint(usize),
}

/// Records framed operators for an `n × n` envelope.
#[derive(Debug, Clone)]
pub struct PlanBuilder {
    n: usize,
    wavelength: f64,
    frame: Frame,
    steps: Vec<Step>,
    checkpoints: Vec<f64>,
}

impl PlanBuilder {
    pub fn new(n: usize, wavelength: f64, frame: Frame) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n = {n} must be even")));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(crate::error::invalid("wavelength", "must be positive"));
        }
        if !(frame.pitch.is_finite() && frame.pitch > 0.0) {
            return Err(Error::InvalidGrid(format!("pitch {} m", frame.pitch)));
        }
        Ok(Self {
            n,
            wavelength,
            frame,
            steps: Vec::new(),
            checkpoints: Vec::new(),
        })
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Local coordinate of sample `i` relative to the frame centre.
    fn local(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.frame.pitch
    }

    fn spatial(&self, f: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for iy in 0..n {
            let y = self.local(iy);
            for ix in 0..n {
                out.push(f(self.local(ix), y));
            }
        }
        out
    }

    fn push_mul(&mut self, values: Vec<Complex64>) {
        self.steps.push(Step::Mul(Arc::new(values)));
    }

    /// Moves the frame centre to new transverse coordinates; no numerical work.
    pub fn recenter(&mut self, origin_shift: [f64; 2]) {
        self.frame.center[0] -= origin_shift[0];
        self.frame.center[1] -= origin_shift[1];
    }

    /// Exact angular-spectrum propagation over `distance` along the axis.
    ///
    /// The output frame is centred on `target` (current coordinates) or, when
    /// `None`, on the walked-off chief ray.
    pub fn propagate(&mut self, distance: f64, target: Option<[f64; 2]>) -> Result<()> {
        if !(distance.is_finite() && distance >= 0.0) {
            return Err(Error::InvalidDistance(distance));
        }
        if self.frame.curvature != 0.0 {
            return Err(Error::AliasingRisk(
                "curved frame must be folded before angular-spectrum propagation".into(),
            ));
        }
        let lam = self.wavelength;
        let [vx, vy] = self.frame.carrier;
        let k2 = 1.0 / (lam * lam);
        let g0sq = k2 - (vx * vx + vy * vy);
        if g0sq <= 0.0 {
            return Err(Error::AliasingRisk("carrier is evanescent".into()));
        }
        let g0 = g0sq.sqrt();
        let target = target.unwrap_or([
            self.frame.center[0] + distance * vx / g0,
            self.frame.center[1] + distance * vy / g0,
        ]);
        let delta = [
            target[0] - self.frame.center[0],
            target[1] - self.frame.center[1],
        ];
        let n = self.n;
        let span = n as f64 * self.frame.pitch;
        let freq = |k: usize| {
            let s = if k < n / 2 { k as isize } else { k as isize - n as isize };
            s as f64 / span
        };
        let norm = 1.0 / (n * n) as f64;
        let mut kernel = Vec::with_capacity(n * n);
        for ky in 0..n {
            let my = freq(ky);
            for kx in 0..n {
                let mx = freq(kx);
                let (fx, fy) = (mx + vx, my + vy);
                let g1sq = k2 - (fx * fx + fy * fy);
                if g1sq <= 0.0 {
                    kernel.push(Complex64::new(0.0, 0.0));
                    continue;
                }
                let g1 = g1sq.sqrt();
                // γ(μ + ν) − γ(ν) without cancellation.
                let dg = -(mx * mx + my * my + 2.0 * (mx * vx + my * vy)) / (g1 + g0);
                let phase = 2.0 * PI * (distance * dg + mx * delta[0] + my * delta[1]);
                kernel.push(Complex64::from_polar(norm, phase));
            }
        }
        self.steps.push(Step::Forward);
        self.push_mul(kernel);
        self.steps.push(Step::Backward);
        self.frame.center = target;
        Ok(())
    }

    /// Paraxial single-transform Fresnel propagation over `distance`.
    ///
    /// The pitch becomes `λ·distance / (n·p)`; two equal steps restore it.
    /// `support` bounds the radius that carries power and is used for the
    /// sampling check of the input chirp.
    pub fn fresnel(&mut self, distance: f64, support: f64) -> Result<()> {
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::InvalidDistance(distance));
        }
        let lam = self.wavelength;
        let kappa = self.frame.curvature + 1.0 / distance;
        self.check_chirp(kappa, support)?;
        if kappa != 0.0 {
            let chirp = self.spatial(|x, y| {
                Complex64::from_polar(1.0, PI * kappa * (x * x + y * y) / lam)
            });
            self.push_mul(chirp);
        }
        let p = self.frame.pitch;
        self.steps.push(Step::Shift);
        self.steps.push(Step::Forward);
        self.steps.push(Step::Shift);
        self.steps
            .push(Step::Scale(Complex64::new(0.0, -p * p / (lam * distance))));
        let [vx, vy] = self.frame.carrier;
        self.frame.center[0] += lam * distance * vx;
        self.frame.center[1] += lam * distance * vy;
        self.frame.curvature = 1.0 / distance;
        self.frame.pitch = lam * distance / (self.n as f64 * p);
        Ok(())
    }

    fn check_chirp(&self, kappa: f64, support: f64) -> Result<()> {
        let half_diag = self.frame.pitch * self.n as f64 / std::f64::consts::SQRT_2;
        let rho = support.min(half_diag);
        let peak = kappa.abs() * rho / self.wavelength;
        let nyquist = 1.0 / (2.0 * self.frame.pitch);
        if peak > nyquist {
            return Err(Error::AliasingRisk(format!(
                "curvature {kappa:.4} 1/m over {rho:.3e} m needs pitch below {:.3e} m, have {:.3e} m",
                self.wavelength / (2.0 * kappa.abs() * rho),
                self.frame.pitch
            )));
        }
        Ok(())
    }

    /// Hard circular aperture of `radius` centred at `axis` (current coordinates).
    pub fn aperture(&mut self, axis: [f64; 2], radius: f64) -> Result<()> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(crate::error::invalid("radius", "must be positive"));
        }
        let ox = self.frame.center[0] - axis[0];
        let oy = self.frame.center[1] - axis[1];
        let r2 = radius * radius;
        let mask = self.spatial(|x, y| {
            let inside = (x + ox).powi(2) + (y + oy).powi(2) <= r2;
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        });
        self.push_mul(mask);
        Ok(())
    }

    /// Thin lens of focal length `focal` centred at `axis`; frame update only.
    pub fn lens(&mut self, axis: [f64; 2], focal: f64) -> Result<()> {
        if !(focal.is_finite() && focal != 0.0) {
            return Err(crate::error::invalid("focal", "must be finite and nonzero"));
        }
        let lam = self.wavelength;
        self.frame.curvature -= 1.0 / focal;
        self.frame.carrier[0] -= (self.frame.center[0] - axis[0]) / (lam * focal);
        self.frame.carrier[1] -= (self.frame.center[1] - axis[1]) / (lam * focal);
        Ok(())
    }

    /// Moves the frame curvature into the envelope.
    pub fn fold_curvature(&mut self, support: f64) -> Result<()> {
        let kappa = self.frame.curvature;
        if kappa == 0.0 {
            return Ok(());
        }
        self.check_chirp(kappa, support)?;
        let lam = self.wavelength;
        let chirp = self.spatial(|x, y| Complex64::from_polar(1.0, PI * kappa * (x * x + y * y) / lam));
        self.push_mul(chirp);
        self.frame.curvature = 0.0;
        Ok(())
    }

    /// Re-expresses the envelope against a new carrier.
    pub fn set_carrier(&mut self, carrier: [f64; 2]) -> Result<()> {
        let dvx = self.frame.carrier[0] - carrier[0];
        let dvy = self.frame.carrier[1] - carrier[1];
        if dvx == 0.0 && dvy == 0.0 {
            return Ok(());
        }
        let nyquist = 1.0 / (2.0 * self.frame.pitch);
        if dvx.abs().max(dvy.abs()) > 0.25 * nyquist {
            return Err(Error::AliasingRisk(format!(
                "carrier change ({dvx:.3e}, {dvy:.3e}) cycles/m is too large for the grid"
            )));
        }
        let tilt = self.spatial(|x, y| Complex64::from_polar(1.0, 2.0 * PI * (dvx * x + dvy * y)));
        self.push_mul(tilt);
        self.frame.carrier = carrier;
        Ok(())
    }

    /// Records the envelope power at this point; returns the checkpoint index.
    pub fn checkpoint(&mut self) -> usize {
        let id = self.checkpoints.len();
        self.checkpoints.push(self.frame.pitch);
        self.steps.push(Step::Checkpoint(id));
        id
    }

    pub fn finish(self) -> Plan {
        let n = self.n;
        Plan {
            n,
            wavelength: self.wavelength,
            output: self.frame,
            checkpoint_pitch: self.checkpoints,
            steps: orient(optimize(self.steps, n), n),
            fft: Arc::new(Fft2::new(n)),
        }
    }
}

fn optimize(mut steps: Vec<Step>, n: usize) -> Vec<Step> {
    loop {
        let before = steps.len();
        let mut out: Vec<Step> = Vec::with_capacity(steps.len());
        for step in steps {
            match (out.last(), &step) {
                (Some(Step::Backward), Step::Forward) => {
                    out.pop();
                    out.push(Step::Scale(Complex64::new((n * n) as f64, 0.0)));
                }
                (Some(Step::Shift), Step::Shift) => {
                    out.pop();
                }
                (Some(Step::Scale(a)), Step::Scale(b)) => {
                    let s = a * b;
                    out.pop();
                    out.push(Step::Scale(s));
                }
                (Some(Step::Mul(a)), Step::Scale(s)) | (Some(Step::Scale(s)), Step::Mul(a)) => {
                    let merged: Vec<Complex64> = a.iter().map(|v| v * s).collect();
                    out.pop();
                    out.push(Step::Mul(Arc::new(merged)));
                }
                (Some(Step::Mul(a)), Step::Mul(b)) => {
                    let merged: Vec<Complex64> = a.iter().zip(b.iter()).map(|(x, y)| x * y).collect();
                    out.pop();
                    out.push(Step::Mul(Arc::new(merged)));
                }
                _ => out.push(step),
            }
        }
        steps = out;
        if steps.len() == before {
            return steps;
        }
    }
}

/// Drops the closing transpose of every transform: each one flips the buffer
/// layout, so pointwise factors recorded while flipped are stored transposed
/// and a single transpose restores the layout at the end if needed.
fn orient(steps: Vec<Step>, n: usize) -> Vec<Step> {
    let mut flipped = false;
    let mut out: Vec<Step> = steps
        .into_iter()
        .map(|step| match step {
            Step::Forward | Step::Backward => {
                flipped = !flipped;
                step
            }
            Step::Mul(m) if flipped => {
                let mut t = (*m).clone();
                transpose(&mut t, n);
                Step::Mul(Arc::new(t))
            }
            other => other,
        })
        .collect();
    if flipped {
        out.push(Step::Transpose);
    }
    out
}

/// Compiled sequence of framed operators.
#[derive(Debug, Clone)]
pub struct Plan {
    n: usize,
    wavelength: f64,
    output: Frame,
    checkpoint_pitch: Vec<f64>,
    steps: Vec<Step>,
    fft: Arc<Fft2>,
}

impl Plan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Frame of the envelope after the plan runs.
    pub fn output_frame(&self) -> Frame {
        self.output
    }

    /// Number of transforms per application.
    pub fn transform_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::Forward | Step::Backward))
            .count()
    }

    /// Runs the plan in place and returns the power `Σ|v|²p²` at each checkpoint.
    pub fn apply(&self, data: &mut [Complex64]) -> Vec<f64> {
        assert_eq!(data.len(), self.n * self.n, "envelope size mismatch");
        let mut powers = vec![0.0; self.checkpoint_pitch.len()];
        for step in &self.steps {
            match step {
                Step::Mul(m) => data.iter_mut().zip(m.iter()).for_each(|(v, k)| *v *= k),
                Step::Scale(s) => data.iter_mut().for_each(|v| *v *= s),
                Step::Forward => self.fft.forward_transposed(data),
                Step::Backward => self.fft.backward_transposed(data),
                Step::Transpose => transpose(data, self.n),
                Step::Shift => fftshift(data, self.n),
                Step::Checkpoint(id) => {
                    let p = self.checkpoint_pitch[*id];
                    powers[*id] = data.iter().map(|v| v.norm_sqr()).sum::<f64>() * p * p;
                }
            }
        }
        powers
    }
}
