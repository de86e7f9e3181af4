//! Two-retroreflector cavity geometry and the compiled round-trip operator.
//!
//! The loop starts on the gain plane (the transmitter retroreflector focal
//! plane). Envelopes on the gain plane are expressed against the carrier of
//! the line joining the two focal points, so an off-axis receiver needs no
//! extra sampling.

use num_complex::Complex64;

use crate::beam::{Frame, Plan, PlanBuilder};
use crate::error::{Error, Result};
use crate::field::{Field, GridSpec};
use crate::ray::FtcrGeometry;
use crate::wave::{self, record_ftcr};

/// Placement and optics of a transmitter/receiver pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    pub tx_ftcr: FtcrGeometry,
    pub rx_ftcr: FtcrGeometry,
    /// Gain medium radius (m).
    pub gain_radius: f64,
    /// Receiver mirror reflectivity.
    pub reflectivity: f64,
    /// Initial receiver position `(x₀, y₀, z₀)` (m).
    pub position: [f64; 3],
    /// Receiver displacement `(Δx, Δy, Δz)` (m).
    pub displacement: [f64; 3],
    /// Vacuum wavelength (m).
    pub wavelength: f64,
}

impl CavityGeometry {
    /// Baseline cavity with the receiver `distance` meters away on axis.
    pub fn baseline(distance: f64) -> Self {
        Self {
            tx_ftcr: FtcrGeometry::BASELINE,
            rx_ftcr: FtcrGeometry::BASELINE,
            gain_radius: 2.8e-3,
            reflectivity: 0.9,
            position: [0.0, 0.0, distance],
            displacement: [0.0; 3],
            wavelength: 1064e-9,
        }
    }

    pub fn with_displacement(mut self, displacement: [f64; 3]) -> Self {
        self.displacement = displacement;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.tx_ftcr.validate()?;
        self.rx_ftcr.validate()?;
        let d = self.separation();
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidDistance(d));
        }
        if !(self.gain_radius.is_finite() && self.gain_radius > 0.0) {
            return Err(crate::error::invalid("gain_radius", "must be positive"));
        }
        if !(self.reflectivity > 0.0 && self.reflectivity < 1.0) {
            return Err(crate::error::invalid("reflectivity", "must lie in (0, 1)"));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(crate::error::invalid("wavelength", "must be positive"));
        }
        let [ox, oy] = self.offset();
        if !(ox.is_finite() && oy.is_finite()) {
            return Err(crate::error::invalid("displacement", "must be finite"));
        }
        Ok(())
    }

    /// Axial separation `z₀ + Δz`.
    pub fn separation(&self) -> f64 {
        self.position[2] + self.displacement[2]
    }

    /// Lateral receiver offset `(x₀ + Δx, y₀ + Δy)`.
    pub fn offset(&self) -> [f64; 2] {
        [
            self.position[0] + self.displacement[0],
            self.position[1] + self.displacement[1],
        ]
    }

    /// Carrier of the transmitter-to-receiver chief ray (cycles/m).
    pub fn chief_carrier(&self) -> [f64; 2] {
        let [sx, sy] = self.offset();
        let d = self.separation();
        let len = (sx * sx + sy * sy + d * d).sqrt();
        [sx / (self.wavelength * len), sy / (self.wavelength * len)]
    }

    /// Largest radius among the apertures in the loop.
    pub fn max_aperture_radius(&self) -> f64 {
        self.gain_radius
            .max(self.tx_ftcr.radius)
            .max(self.rx_ftcr.radius)
    }
}

/// Reference plane where the loop starts and ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoopStart {
    /// Gain medium on the transmitter focal plane.
    #[default]
    GainPlane,
    /// Receiver focal plane, before the receiver retroreflector.
    ReceiverPlane,
}

/// Round-trip power ratios of the four legs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossFactors {
    /// Transmitter to gain medium.
    pub tx_to_gain: f64,
    /// Gain medium to receiver.
    pub gain_to_rx: f64,
    /// Receiver to gain medium.
    pub rx_to_gain: f64,
    /// Gain medium to transmitter.
    pub gain_to_tx: f64,
}

impl LossFactors {
    pub fn product(&self) -> f64 {
        self.tx_to_gain * self.gain_to_rx * self.rx_to_gain * self.gain_to_tx
    }
}

/// Compiled round-trip operator for one geometry and grid.
#[derive(Debug, Clone)]
pub struct CavityLoop {
    geometry: CavityGeometry,
    grid: GridSpec,
    start: LoopStart,
    frame: Frame,
    plan: Plan,
    legs: bool,
}

impl CavityLoop {
    pub fn new(geometry: &CavityGeometry, grid: &GridSpec) -> Result<Self> {
        Self::build(geometry, grid, LoopStart::GainPlane, false)
    }

    pub fn starting_at(geometry: &CavityGeometry, grid: &GridSpec, start: LoopStart) -> Result<Self> {
        Self::build(geometry, grid, start, false)
    }

    /// Loop that also measures power after every leg.
    pub fn with_legs(geometry: &CavityGeometry, grid: &GridSpec) -> Result<Self> {
        Self::build(geometry, grid, LoopStart::GainPlane, true)
    }

    fn build(geometry: &CavityGeometry, grid: &GridSpec, start: LoopStart, legs: bool) -> Result<Self> {
        geometry.validate()?;
        grid.check_guard_band(2.0 * geometry.max_aperture_radius())?;
        let g = geometry;
        let s = g.offset();
        let d = g.separation();
        let nu = g.chief_carrier();
        let back = [-nu[0], -nu[1]];
        let origin = [0.0, 0.0];

        let frame = Frame::new(grid.dx()).with_carrier(nu);
        let mut b = PlanBuilder::new(grid.n(), g.wavelength, frame)?;

        let forward_leg = |b: &mut PlanBuilder| -> Result<()> {
            b.propagate(d, Some(s))?;
            b.recenter(s);
            record_ftcr(b, origin, &g.rx_ftcr)
        };
        let return_leg = |b: &mut PlanBuilder, legs: bool| -> Result<()> {
            b.propagate(d, Some([-s[0], -s[1]]))?;
            b.recenter([-s[0], -s[1]]);
            b.aperture(origin, g.gain_radius)?;
            if legs {
                b.checkpoint();
            }
            record_ftcr(b, origin, &g.tx_ftcr)?;
            if legs {
                b.checkpoint();
            }
            b.aperture(origin, g.gain_radius)
        };

        match start {
            LoopStart::GainPlane => {
                if legs {
                    b.checkpoint();
                }
                forward_leg(&mut b)?;
                if legs {
                    b.checkpoint();
                }
                return_leg(&mut b, legs)?;
                if legs {
                    b.checkpoint();
                }
            }
            LoopStart::ReceiverPlane => {
                record_ftcr(&mut b, origin, &g.rx_ftcr)?;
                debug_assert_eq!(b.frame().carrier, back);
                return_leg(&mut b, false)?;
                b.propagate(d, Some(s))?;
                b.recenter(s);
            }
        }

        let out = b.frame();
        let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= 1e-9 * scale;
        let carrier_scale = 1.0 / grid.window();
        if !(close(out.pitch, frame.pitch, frame.pitch)
            && close(out.center[0], frame.center[0], grid.dx())
            && close(out.center[1], frame.center[1], grid.dx())
            && close(out.carrier[0], frame.carrier[0], carrier_scale)
            && close(out.carrier[1], frame.carrier[1], carrier_scale)
            && out.curvature == 0.0)
        {
            return Err(Error::InvalidGeometry(format!(
                "round trip does not close: {out:?} vs {frame:?}"
            )));
        }
        Ok(Self {
            geometry: *geometry,
            grid: *grid,
            start,
            frame,
            plan: b.finish(),
            legs,
        })
    }

    pub fn geometry(&self) -> &CavityGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn start(&self) -> LoopStart {
        self.start
    }

    /// Frame of the envelope on the start plane.
    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Transforms per round trip.
    pub fn transform_count(&self) -> usize {
        self.plan.transform_count()
    }

    /// Applies one round trip to an envelope in place.
    pub fn apply(&self, values: &mut [Complex64]) {
        self.plan.apply(values);
    }

    /// One round trip of `field`, which must live on this loop's grid.
    pub fn round_trip(&self, field: &Field) -> Result<Field> {
        self.check_field(field)?;
        field.check_finite()?;
        let mut out = field.clone();
        self.plan.apply(&mut out.values);
        out.check_finite()?;
        Ok(out)
    }

    /// Per-leg power ratios for one round trip of `field`.
    pub fn loss_factors(&self, field: &Field) -> Result<LossFactors> {
        if !self.legs {
            return Err(crate::error::invalid("loop", "built without leg checkpoints"));
        }
        self.check_field(field)?;
        field.check_finite()?;
        let mut data = field.values.clone();
        let p = self.plan.apply(&mut data);
        if p[0] <= 0.0 {
            return Err(Error::DegenerateField);
        }
        let ratio = |a: f64, b: f64| if a > 0.0 { b / a } else { 0.0 };
        Ok(LossFactors {
            gain_to_rx: ratio(p[0], p[1]),
            rx_to_gain: ratio(p[1], p[2]),
            gain_to_tx: ratio(p[2], p[3]),
            tx_to_gain: ratio(p[3], p[4]),
        })
    }

    fn check_field(&self, field: &Field) -> Result<()> {
        if field.grid != self.grid || field.wavelength != self.geometry.wavelength {
            return Err(Error::InvalidGrid(
                "field grid or wavelength differs from the cavity loop".into(),
            ));
        }
        Ok(())
    }
}

/// One round trip of an envelope on the gain plane.
pub fn round_trip(field: &Field, geometry: &CavityGeometry) -> Result<Field> {
    let mut geometry = *geometry;
    geometry.wavelength = field.wavelength;
    CavityLoop::new(&geometry, &field.grid)?.round_trip(field)
}

/// One round trip of a physical gain-plane field, element by element on the
/// field's own grid.
///
/// Each leg re-centres on the far retroreflector axis with a spectral shift.
/// The grid must sample the lens phases and the chief-ray tilt, which limits
/// this route to small apertures.
pub fn round_trip_direct(field: &Field, geometry: &CavityGeometry) -> Result<Field> {
    geometry.validate()?;
    let [sx, sy] = geometry.offset();
    let d = geometry.separation();
    let u = wave::shift(field, -sx, -sy)?;
    let u = wave::propagate(&u, d)?;
    let u = wave::ftcr_reflect_direct(&u, &geometry.rx_ftcr)?;
    let u = wave::shift(&u, sx, sy)?;
    let u = wave::propagate(&u, d)?;
    let u = wave::apply_gain_aperture(&u, geometry.gain_radius)?;
    let u = wave::ftcr_reflect_direct(&u, &geometry.tx_ftcr)?;
    wave::apply_gain_aperture(&u, geometry.gain_radius)
}

/// Envelope of a physical gain-plane field `u(x, y)` against the chief-ray carrier.
pub fn envelope_from_physical(field: &Field, geometry: &CavityGeometry) -> Field {
    modulate(field, geometry.chief_carrier(), -1.0)
}

/// Physical gain-plane field from an envelope.
pub fn physical_from_envelope(field: &Field, geometry: &CavityGeometry) -> Field {
    modulate(field, geometry.chief_carrier(), 1.0)
}

fn modulate(field: &Field, carrier: [f64; 2], sign: f64) -> Field {
    let g = field.grid;
    let n = g.n();
    let mut out = field.clone();
    for iy in 0..n {
        let y = g.coord(iy);
        for ix in 0..n {
            let x = g.coord(ix);
            let phase = sign * 2.0 * std::f64::consts::PI * (carrier[0] * x + carrier[1] * y);
            out.values[iy * n + ix] *= Complex64::from_polar(1.0, phase);
        }
    }
    out
}
