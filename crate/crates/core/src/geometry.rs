//! Array geometries, user/scatterer placement and near-field boundaries.
//!
//! The array lies in the `z = 0` plane with boresight along `+z`. Microstrips
//! run along `y`; consecutive microstrips are stacked along `x`. Users and
//! scatterers are placed on the `xz`-plane in front of the array.

use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation speed used throughout, in m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

pub type Point = Point3<f64>;

// Guards the floor in M = floor(2A/λ) against A = kλ landing at k - 1e-16.
const FLOOR_SLACK: f64 = 1e-9;

pub fn wavelength(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

/// A holographic metasurface array of `M` microstrips with `L` elements each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmaArray {
    pub num_microstrips: usize,
    pub elements_per_strip: usize,
    /// Spacing between adjacent elements on one microstrip, in meters.
    pub element_spacing: f64,
    /// Spacing between adjacent microstrips, in meters.
    pub strip_spacing: f64,
    /// Element positions ordered `m * L + l`.
    pub positions: Vec<Point>,
    pub wavelength: f64,
    /// Side length `A` of the square footprint.
    pub array_length: f64,
    /// Aperture `D = sqrt(2) A`.
    pub aperture: f64,
}

impl HmaArray {
    pub fn num_elements(&self) -> usize {
        self.num_microstrips * self.elements_per_strip
    }

    /// Flat element index of element `l` on microstrip `m` (both 0-based).
    pub fn index(&self, m: usize, l: usize) -> usize {
        m * self.elements_per_strip + l
    }

    pub fn position(&self, m: usize, l: usize) -> Point {
        self.positions[self.index(m, l)]
    }

    pub fn fraunhofer_distance(&self) -> f64 {
        fraunhofer_distance(self.aperture, self.wavelength)
    }

    pub fn fresnel_distance(&self) -> f64 {
        fresnel_distance(self.aperture, self.wavelength)
    }
}

/// Builds the `A x A` metasurface array with λ/5 element spacing along each
/// microstrip and λ/2 spacing between microstrips.
pub fn build_hma_array(array_length: f64, wavelength: f64) -> Result<HmaArray> {
    if !(array_length > 0.0 && wavelength > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "array length {array_length} and wavelength {wavelength} must be positive"
        )));
    }
    let m = (2.0 * array_length / wavelength + FLOOR_SLACK).floor() as usize;
    let l = (5.0 * array_length / wavelength + FLOOR_SLACK).floor() as usize;
    if m == 0 || l == 0 {
        return Err(Error::InvalidGeometry(format!(
            "array length {array_length} m gives {m} microstrips x {l} elements at wavelength {wavelength} m"
        )));
    }
    let element_spacing = wavelength / 5.0;
    let strip_spacing = wavelength / 2.0;
    let x0 = (m as f64 - 1.0) / 2.0;
    let y0 = (l as f64 - 1.0) / 2.0;
    let mut positions = Vec::with_capacity(m * l);
    for mi in 0..m {
        for li in 0..l {
            positions.push(Point::new(
                (mi as f64 - x0) * strip_spacing,
                (li as f64 - y0) * element_spacing,
                0.0,
            ));
        }
    }
    Ok(HmaArray {
        num_microstrips: m,
        elements_per_strip: l,
        element_spacing,
        strip_spacing,
        positions,
        wavelength,
        array_length,
        aperture: std::f64::consts::SQRT_2 * array_length,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    Ula,
    Upa,
}

/// A conventional array with uniform spacing, centered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionalArray {
    pub layout: Layout,
    pub num_antennas: usize,
    pub spacing: f64,
    pub positions: Vec<Point>,
}

impl ConventionalArray {
    /// Linear array along `x`.
    pub fn ula(num_antennas: usize, spacing: f64) -> Result<Self> {
        if num_antennas == 0 || !(spacing > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "ULA needs antennas > 0 and spacing > 0 (got {num_antennas}, {spacing})"
            )));
        }
        let c = (num_antennas as f64 - 1.0) / 2.0;
        let positions = (0..num_antennas)
            .map(|i| Point::new((i as f64 - c) * spacing, 0.0, 0.0))
            .collect();
        Ok(Self {
            layout: Layout::Ula,
            num_antennas,
            spacing,
            positions,
        })
    }

    /// `nx x ny` planar array in the `z = 0` plane, ordered `ix * ny + iy`.
    pub fn upa(nx: usize, ny: usize, spacing: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || !(spacing > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "UPA needs a non-empty grid and spacing > 0 (got {nx}x{ny}, {spacing})"
            )));
        }
        let cx = (nx as f64 - 1.0) / 2.0;
        let cy = (ny as f64 - 1.0) / 2.0;
        let mut positions = Vec::with_capacity(nx * ny);
        for ix in 0..nx {
            for iy in 0..ny {
                positions.push(Point::new(
                    (ix as f64 - cx) * spacing,
                    (iy as f64 - cy) * spacing,
                    0.0,
                ));
            }
        }
        Ok(Self {
            layout: Layout::Upa,
            num_antennas: nx * ny,
            spacing,
            positions,
        })
    }

    /// Square UPA filling an `A x A` footprint at the given spacing, i.e.
    /// `floor(A / spacing)` antennas per side (at least one).
    pub fn upa_matching(array_length: f64, spacing: f64) -> Result<Self> {
        if !(array_length > 0.0 && spacing > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "array length {array_length} and spacing {spacing} must be positive"
            )));
        }
        let n = ((array_length / spacing + FLOOR_SLACK).floor() as usize).max(1);
        Self::upa(n, n, spacing)
    }
}

/// `d_F = 2 D^2 / λ`.
pub fn fraunhofer_distance(aperture: f64, wavelength: f64) -> f64 {
    2.0 * aperture * aperture / wavelength
}

/// `d_N = (D^4 / (8 λ))^(1/3)`.
pub fn fresnel_distance(aperture: f64, wavelength: f64) -> f64 {
    (aperture.powi(4) / (8.0 * wavelength)).cbrt()
}

/// Path anchor points of one user: the LoS point and one scatterer per NLoS
/// path, plus the incidence angle of each NLoS reflection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserLayout {
    pub los_point: Point,
    pub scatterers: Vec<Point>,
    /// Incidence angle in `[0, π/2)`, one per scatterer.
    pub incidence_angles: Vec<f64>,
}

impl UserLayout {
    pub fn num_paths(&self) -> usize {
        self.scatterers.len()
    }

    /// Anchor point of path `p` (0 is LoS).
    pub fn path_point(&self, p: usize) -> Point {
        if p == 0 {
            self.los_point
        } else {
            self.scatterers[p - 1]
        }
    }

    /// Incidence angle of path `p`; zero for the LoS path.
    pub fn incidence_angle(&self, p: usize) -> f64 {
        if p == 0 {
            0.0
        } else {
            self.incidence_angles[p - 1]
        }
    }

    /// All anchor points, LoS first.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        std::iter::once(self.los_point).chain(self.scatterers.iter().copied())
    }
}

/// Radius range `(inner, outer]` and angle range for random placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub angle_range: (f64, f64),
}

impl Placement {
    /// The near-field annulus `(d_N, d_F]` of `array`.
    pub fn near_field(array: &HmaArray, angle_range: (f64, f64)) -> Result<Self> {
        let placement = Self {
            inner_radius: array.fresnel_distance(),
            outer_radius: array.fraunhofer_distance(),
            angle_range,
        };
        placement.validate()?;
        Ok(placement)
    }

    fn validate(&self) -> Result<()> {
        if !(self.inner_radius >= 0.0 && self.inner_radius < self.outer_radius) {
            return Err(Error::InvalidGeometry(format!(
                "empty radial range ({}, {}]",
                self.inner_radius, self.outer_radius
            )));
        }
        let (lo, hi) = self.angle_range;
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(lo <= hi && lo > -half_pi && hi < half_pi) {
            return Err(Error::InvalidGeometry(format!(
                "angle range [{lo}, {hi}] must lie inside (-π/2, π/2)"
            )));
        }
        Ok(())
    }

    /// Draws a point on the `xz`-plane: radius uniform in `(inner, outer]`,
    /// angle from boresight uniform over the configured range.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let u: f64 = rng.random();
        let r = self.outer_radius - u * (self.outer_radius - self.inner_radius);
        let (lo, hi) = self.angle_range;
        let theta = lo + rng.random::<f64>() * (hi - lo);
        Point::new(r * theta.sin(), 0.0, r * theta.cos())
    }
}

fn sample_incidence<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * std::f64::consts::FRAC_PI_2
}

/// Draws `num_users` users, each with one LoS point and `paths_per_user`
/// scatterers, all inside the near-field annulus of `array`.
pub fn sample_user_layout(
    seed: u64,
    num_users: usize,
    paths_per_user: usize,
    array: &HmaArray,
    angle_range: (f64, f64),
) -> Result<Vec<UserLayout>> {
    if num_users == 0 {
        return Err(Error::InvalidParameter("at least one user is required".into()));
    }
    let placement = Placement::near_field(array, angle_range)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..num_users)
        .map(|_| sample_one(&mut rng, &placement, None, paths_per_user))
        .collect())
}

/// One user whose LoS point is fixed; scatterers are drawn from `placement`.
pub fn sample_user_at(
    seed: u64,
    los_point: Point,
    paths_per_user: usize,
    placement: &Placement,
) -> Result<UserLayout> {
    placement.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_one(&mut rng, placement, Some(los_point), paths_per_user))
}

fn sample_one(
    rng: &mut ChaCha8Rng,
    placement: &Placement,
    los: Option<Point>,
    paths: usize,
) -> UserLayout {
    let los_point = match los {
        Some(p) => p,
        None => placement.sample(rng),
    };
    let mut scatterers = Vec::with_capacity(paths);
    let mut incidence_angles = Vec::with_capacity(paths);
    for _ in 0..paths {
        scatterers.push(placement.sample(rng));
        incidence_angles.push(sample_incidence(rng));
    }
    UserLayout {
        los_point,
        scatterers,
        incidence_angles,
    }
}
