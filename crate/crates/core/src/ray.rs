//! Paraxial ray-transfer (ABCD) optics of focal telecentric cat's-eye
//! retroreflectors and the two-retroreflector cavity.

use std::ops::Mul;

use crate::error::{Error, Result};

/// Paraxial ray: transverse displacement `x` (m) and slope `theta` (rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayState {
    pub x: f64,
    pub theta: f64,
}

impl RayState {
    pub fn new(x: f64, theta: f64) -> Self {
        Self { x, theta }
    }
}

/// 2×2 ray-transfer matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RayMatrix {
    pub const IDENTITY: RayMatrix = RayMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Free-space propagation over `distance` meters.
    pub fn free_space(distance: f64) -> Self {
        Self::new(1.0, distance, 0.0, 1.0)
    }

    /// Thin lens of focal length `focal`.
    pub fn thin_lens(focal: f64) -> Self {
        Self::new(1.0, 0.0, -1.0 / focal, 1.0)
    }

    /// Plane mirror in the unfolded frame.
    pub fn plane_mirror() -> Self {
        Self::IDENTITY
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn apply(&self, ray: RayState) -> RayState {
        RayState {
            x: self.a * ray.x + self.b * ray.theta,
            theta: self.c * ray.x + self.d * ray.theta,
        }
    }

    /// Product of matrices listed in the order light meets them.
    pub fn sequence<'a>(elements: impl IntoIterator<Item = &'a RayMatrix>) -> RayMatrix {
        elements
            .into_iter()
            .fold(RayMatrix::IDENTITY, |acc, m| *m * acc)
    }

    pub fn max_abs_diff(&self, other: &RayMatrix) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl Mul for RayMatrix {
    type Output = RayMatrix;

    fn mul(self, r: RayMatrix) -> RayMatrix {
        RayMatrix {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}

/// Cat's-eye retroreflector: lens of focal length `focal`, plane mirror at
/// `interval` behind it, both limited to `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtcrGeometry {
    pub focal: f64,
    pub interval: f64,
    pub radius: f64,
}

/// Retroreflector focusing strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FocalLength {
    /// `l > f`: equivalent thin lens of this focal length (m).
    Finite(f64),
    /// `l = f`: no focusing.
    Infinite,
}

impl FocalLength {
    /// Optical power `1/f_RR` in m⁻¹.
    pub fn power(&self) -> f64 {
        match self {
            FocalLength::Finite(f) => 1.0 / f,
            FocalLength::Infinite => 0.0,
        }
    }
}

impl FtcrGeometry {
    /// Baseline retroreflector: f = 50.4 mm, l = 52 mm, r = 7 mm.
    pub const BASELINE: FtcrGeometry = FtcrGeometry {
        focal: 50.4e-3,
        interval: 52.0e-3,
        radius: 7.0e-3,
    };

    pub fn new(focal: f64, interval: f64, radius: f64) -> Result<Self> {
        let g = Self {
            focal,
            interval,
            radius,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal.is_finite() && self.focal > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "focal length {} m must be positive",
                self.focal
            )));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "aperture radius {} m must be positive",
                self.radius
            )));
        }
        if !(self.interval.is_finite() && self.interval >= self.focal) {
            return Err(Error::InvalidGeometry(format!(
                "mirror-lens interval {} m is shorter than the focal length {} m",
                self.interval, self.focal
            )));
        }
        Ok(())
    }

    /// `f_RR = 1 / (2l/f² − 2/f)`.
    pub fn focal_length(&self) -> Result<FocalLength> {
        self.validate()?;
        let power = 2.0 * (self.interval - self.focal) / (self.focal * self.focal);
        if power == 0.0 {
            Ok(FocalLength::Infinite)
        } else {
            Ok(FocalLength::Finite(1.0 / power))
        }
    }

    /// The seven elementary matrices from the front focal plane back to it,
    /// in the order light meets them.
    pub fn elements(&self) -> [RayMatrix; 7] {
        let (f, l) = (self.focal, self.interval);
        [
            RayMatrix::free_space(f),
            RayMatrix::thin_lens(f),
            RayMatrix::free_space(l),
            RayMatrix::plane_mirror(),
            RayMatrix::free_space(l),
            RayMatrix::thin_lens(f),
            RayMatrix::free_space(f),
        ]
    }

    /// Explicit product of the seven elements.
    pub fn matrix_explicit(&self) -> Result<RayMatrix> {
        self.validate()?;
        Ok(RayMatrix::sequence(self.elements().iter()))
    }

    /// Factored form `[[-1, 0], [1/f_RR, -1]]`.
    pub fn matrix(&self) -> Result<RayMatrix> {
        let p = self.focal_length()?.power();
        Ok(RayMatrix::new(-1.0, 0.0, p, -1.0))
    }
}

/// Stability of a symmetric two-retroreflector cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilityVerdict {
    Stable { margin: f64 },
    Marginal,
    Unstable { margin: f64 },
}

impl StabilityVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            StabilityVerdict::Stable { .. } => "stable",
            StabilityVerdict::Marginal => "marginal",
            StabilityVerdict::Unstable { .. } => "unstable",
        }
    }

    /// `4·f_RR − d`, when defined.
    pub fn margin(&self) -> Option<f64> {
        match self {
            StabilityVerdict::Stable { margin } | StabilityVerdict::Unstable { margin } => {
                Some(*margin)
            }
            StabilityVerdict::Marginal => None,
        }
    }
}

/// `d < 4·f_RR` criterion for identical retroreflectors `distance` apart.
pub fn cavity_is_stable(
    tx: &FtcrGeometry,
    rx: &FtcrGeometry,
    distance: f64,
) -> Result<StabilityVerdict> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::InvalidDistance(distance));
    }
    tx.validate()?;
    rx.validate()?;
    if tx != rx {
        return Err(Error::NotSupported);
    }
    Ok(match tx.focal_length()? {
        FocalLength::Infinite => StabilityVerdict::Marginal,
        FocalLength::Finite(frr) => {
            let margin = 4.0 * frr - distance;
            if margin > 0.0 {
                StabilityVerdict::Stable { margin }
            } else {
                StabilityVerdict::Unstable { margin }
            }
        }
    })
}

/// Round-trip matrix referenced to the transmitter focal plane.
pub fn round_trip_matrix(tx: &FtcrGeometry, rx: &FtcrGeometry, distance: f64) -> Result<RayMatrix> {
    let p = RayMatrix::free_space(distance);
    Ok(RayMatrix::sequence(
        [p, rx.matrix()?, p, tx.matrix()?].iter(),
    ))
}

/// Element of an unfolded ray path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayElement {
    FreeSpace(f64),
    Lens { focal: f64, radius: f64 },
    /// Plane mirror; each one counts as a bounce.
    Mirror { radius: f64 },
    Aperture { radius: f64 },
}

impl RayElement {
    fn matrix(&self) -> RayMatrix {
        match *self {
            RayElement::FreeSpace(d) => RayMatrix::free_space(d),
            RayElement::Lens { focal, .. } => RayMatrix::thin_lens(focal),
            RayElement::Mirror { .. } | RayElement::Aperture { .. } => RayMatrix::IDENTITY,
        }
    }

    fn radius(&self) -> Option<f64> {
        match *self {
            RayElement::FreeSpace(_) => None,
            RayElement::Lens { radius, .. }
            | RayElement::Mirror { radius }
            | RayElement::Aperture { radius } => Some(radius),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOutcome {
    /// Survived `bounces` mirror reflections.
    Captured { bounces: usize },
    /// Left an aperture during bounce number `bounce` (0-based).
    Escaped { bounce: usize },
}

impl TraceOutcome {
    pub fn is_captured(&self) -> bool {
        matches!(self, TraceOutcome::Captured { .. })
    }
}

pub const DEFAULT_MAX_BOUNCES: usize = 500;

/// Repeats `path` until `max_bounces` mirror reflections have happened or the
/// ray falls outside an aperture.
pub fn trace_ray(ray: RayState, path: &[RayElement], max_bounces: usize) -> Result<TraceOutcome> {
    if max_bounces == 0 {
        return Err(crate::error::invalid("max_bounces", "must be at least 1"));
    }
    if !path.iter().any(|e| matches!(e, RayElement::Mirror { .. })) {
        return Err(Error::InvalidGeometry("ray path has no mirror".into()));
    }
    let mut state = ray;
    let mut bounces = 0;
    loop {
        for element in path {
            state = element.matrix().apply(state);
            if let Some(r) = element.radius() {
                if !(state.x.abs() <= r) {
                    return Ok(TraceOutcome::Escaped { bounce: bounces });
                }
            }
            if matches!(element, RayElement::Mirror { .. }) {
                bounces += 1;
                if bounces == max_bounces {
                    return Ok(TraceOutcome::Captured { bounces });
                }
            }
        }
    }
}

fn ftcr_path(g: &FtcrGeometry) -> [RayElement; 7] {
    [
        RayElement::FreeSpace(g.focal),
        RayElement::Lens {
            focal: g.focal,
            radius: g.radius,
        },
        RayElement::FreeSpace(g.interval),
        RayElement::Mirror { radius: g.radius },
        RayElement::FreeSpace(g.interval),
        RayElement::Lens {
            focal: g.focal,
            radius: g.radius,
        },
        RayElement::FreeSpace(g.focal),
    ]
}

/// One unfolded round trip starting at the gain aperture on the transmitter
/// focal plane.
pub fn cavity_path(
    tx: &FtcrGeometry,
    rx: &FtcrGeometry,
    gain_radius: f64,
    distance: f64,
) -> Result<Vec<RayElement>> {
    tx.validate()?;
    rx.validate()?;
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::InvalidDistance(distance));
    }
    let mut path = vec![RayElement::FreeSpace(distance)];
    path.extend(ftcr_path(rx));
    path.push(RayElement::FreeSpace(distance));
    path.push(RayElement::Aperture {
        radius: gain_radius,
    });
    path.extend(ftcr_path(tx));
    path.push(RayElement::Aperture {
        radius: gain_radius,
    });
    Ok(path)
}

/// Deterministic `side × side` grid of rays over `|x| ≤ x_max`, `|θ| ≤ theta_max`.
pub fn ray_fan(side: usize, x_max: f64, theta_max: f64) -> Vec<RayState> {
    let lin = |i: usize, m: f64| {
        if side == 1 {
            0.0
        } else {
            -m + 2.0 * m * i as f64 / (side - 1) as f64
        }
    };
    (0..side)
        .flat_map(|i| (0..side).map(move |j| RayState::new(lin(i, x_max), lin(j, theta_max))))
        .collect()
}

/// Number of rays in `fan` still inside the cavity after `max_bounces`.
pub fn captured_count(fan: &[RayState], path: &[RayElement], max_bounces: usize) -> Result<usize> {
    let mut count = 0;
    for ray in fan {
        if trace_ray(*ray, path, max_bounces)?.is_captured() {
            count += 1;
        }
    }
    Ok(count)
}
