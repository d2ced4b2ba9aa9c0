//! Spherical-wave dual-wideband uplink channels.
//!
//! Every path contributes `sqrt(ε) A(f) exp(-j 2π (f_c + f) d / c)` to every
//! element, where `A(f)` combines the reflection loss, the element radiation
//! profile and the free-space `1/d` spreading. The plane-wave variant keeps
//! the amplitudes and replaces the per-element phase by its far-field
//! linearization around the array center.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, UserLayout, SPEED_OF_LIGHT};
use crate::linalg::{CMatrix, CVector, C64};

/// The OFDM subcarrier grid `f_s = (s - (S+1)/2) B / S`, `s = 0..S-1`.
///
/// The offsets are not symmetric about the carrier: their mean is `-B/S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcarrierGrid {
    pub bandwidth: f64,
    pub count: usize,
    pub carrier: f64,
    /// Baseband offsets `f_s` in Hz.
    pub frequencies: Vec<f64>,
    /// `Δ_B = B / S`.
    pub spacing: f64,
}

impl SubcarrierGrid {
    pub fn new(bandwidth: f64, count: usize, carrier: f64) -> Result<Self> {
        if count == 0 || !(bandwidth > 0.0) || !(carrier > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid needs S >= 1, B > 0, fc > 0 (got S = {count}, B = {bandwidth}, fc = {carrier})"
            )));
        }
        let spacing = bandwidth / count as f64;
        let half = (count as f64 + 1.0) / 2.0;
        let frequencies = (0..count).map(|s| (s as f64 - half) * spacing).collect();
        Ok(Self {
            bandwidth,
            count,
            carrier,
            frequencies,
            spacing,
        })
    }

    /// Absolute frequency `f_c + f_s`.
    pub fn absolute(&self, s: usize) -> f64 {
        self.carrier + self.frequencies[s]
    }

    /// Index used when a single "narrowband" subcarrier stands in for the band.
    pub fn center_index(&self) -> usize {
        self.count / 2
    }

    pub fn carrier_wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier
    }
}

/// Propagation and material constants of the channel model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    /// Complex refractive index `n_t` of reflecting surfaces.
    pub refractive_index: C64,
    /// Surface roughness `σ_rough` in meters.
    pub roughness: f64,
    /// Boresight exponent `b` of the element radiation profile.
    pub boresight_exponent: f64,
    /// Linear power factor applied to the radiation profile of every element.
    pub element_gain: f64,
    /// Path loss in dB is `-slope * log10(d) + intercept`.
    pub path_loss_slope_db: f64,
    pub path_loss_intercept_db: f64,
    /// Standard deviation of log-normal shadowing in dB.
    pub shadowing_std_db: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            refractive_index: Complex::new(2.24, -0.025),
            roughness: 0.088e-3,
            boresight_exponent: 2.0,
            element_gain: 1.0,
            path_loss_slope_db: 38.0,
            path_loss_intercept_db: -34.5,
            shadowing_std_db: 8.0,
        }
    }
}

/// `τ = ‖a - b‖ / c`.
pub fn propagation_delay(scatterer: &Point, element: &Point) -> Result<f64> {
    Ok(checked_distance(scatterer, element)? / SPEED_OF_LIGHT)
}

fn checked_distance(a: &Point, b: &Point) -> Result<f64> {
    let d = (a - b).norm();
    if d == 0.0 {
        return Err(Error::SingularGeometry(
            [a.x, a.y, a.z],
            [b.x, b.y, b.z],
        ));
    }
    Ok(d)
}

/// `F(θ) = 2(b+1) cos^b θ` on `[0, π/2]`, zero elsewhere.
pub fn radiation_profile(theta: f64, exponent: f64) -> f64 {
    if (0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        // cos(π/2) is 6e-17 in floating point; the profile is zero there.
        let c = theta.cos().max(0.0);
        if c < 1e-15 {
            return 0.0;
        }
        2.0 * (exponent + 1.0) * c.powf(exponent)
    } else {
        0.0
    }
}

/// Rough-surface reflection coefficient of path `p` at baseband offset `f`.
///
/// The LoS path (`p = 0`) is unattenuated. For NLoS paths the refraction
/// angle uses the principal branch of the complex arcsine.
pub fn reflection_coefficient(
    path_index: usize,
    offset_hz: f64,
    carrier_hz: f64,
    incidence: f64,
    params: &ChannelParams,
) -> C64 {
    if path_index == 0 {
        return Complex::new(1.0, 0.0);
    }
    let n = params.refractive_index;
    let cos_i = incidence.cos();
    let sin_t = Complex::new(incidence.sin(), 0.0) / n;
    let cos_t = sin_t.asin().cos();
    let fresnel = (cos_i - n * cos_t) / (cos_i + n * cos_t);
    let f = carrier_hz + offset_hz;
    let exponent = 8.0 * std::f64::consts::PI.powi(2) * f * f * params.roughness.powi(2) * cos_i * cos_i
        / (SPEED_OF_LIGHT * SPEED_OF_LIGHT);
    fresnel * (-exponent).exp()
}

/// `A = |Γ| sqrt(F) c / (4π f d)` with `f` the absolute frequency.
pub fn gain_coefficient(
    reflection_magnitude: f64,
    radiation: f64,
    absolute_frequency: f64,
    distance: f64,
) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {distance}")));
    }
    if !(absolute_frequency > 0.0) {
        return Err(Error::Domain(format!(
            "absolute frequency must be positive, got {absolute_frequency}"
        )));
    }
    Ok(reflection_magnitude * radiation.sqrt() * SPEED_OF_LIGHT
        / (4.0 * std::f64::consts::PI * absolute_frequency * distance))
}

/// Mean large-scale gain in dB at distance `d`.
pub fn path_loss_db(distance: f64, params: &ChannelParams) -> f64 {
    -params.path_loss_slope_db * distance.log10() + params.path_loss_intercept_db
}

/// Linear large-scale gain `ε` with shadowing `eta_db` already drawn.
pub fn large_scale_gain(distance: f64, eta_db: f64, params: &ChannelParams) -> f64 {
    10f64.powf((path_loss_db(distance, params) + eta_db) / 10.0)
}

/// Draws `ε` at distance `d` with log-normal shadowing.
pub fn large_scale_fading<R: Rng + ?Sized>(distance: f64, rng: &mut R, params: &ChannelParams) -> f64 {
    let eta = if params.shadowing_std_db > 0.0 {
        Normal::new(0.0, params.shadowing_std_db)
            .expect("finite std")
            .sample(rng)
    } else {
        0.0
    };
    large_scale_gain(distance, eta, params)
}

/// Large-scale gains `ε[u][p]`, one per path and shared by all elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFading {
    pub gains: Vec<Vec<f64>>,
}

impl PathFading {
    /// Draws one gain per path, in user-major order, using the distance from
    /// the path anchor point to the array center.
    pub fn draw<R: Rng + ?Sized>(layouts: &[UserLayout], params: &ChannelParams, rng: &mut R) -> Self {
        let gains = layouts
            .iter()
            .map(|u| {
                u.points()
                    .map(|p| large_scale_fading(p.coords.norm(), rng, params))
                    .collect()
            })
            .collect();
        Self { gains }
    }

    /// Shadowing-free gains.
    pub fn mean(layouts: &[UserLayout], params: &ChannelParams) -> Self {
        let gains = layouts
            .iter()
            .map(|u| {
                u.points()
                    .map(|p| large_scale_gain(p.coords.norm(), 0.0, params))
                    .collect()
            })
            .collect();
        Self { gains }
    }

    /// Equal gain on every path.
    pub fn uniform(layouts: &[UserLayout], gain: f64) -> Self {
        Self {
            gains: layouts.iter().map(|u| vec![gain; u.num_paths() + 1]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelModel {
    Spherical,
    Plane,
}

impl ChannelModel {
    pub fn tag(self) -> &'static str {
        match self {
            ChannelModel::Spherical => "spherical",
            ChannelModel::Plane => "plane",
        }
    }
}

/// Per-subcarrier channel matrices `G_s` of size `N_R x U`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub matrices: Vec<CMatrix>,
    pub model: ChannelModel,
    pub coupling_applied: bool,
    pub grid: SubcarrierGrid,
}

impl ChannelSet {
    pub fn new(matrices: Vec<CMatrix>, model: ChannelModel, grid: SubcarrierGrid) -> Result<Self> {
        if matrices.len() != grid.count {
            return Err(Error::DimensionMismatch {
                context: "ChannelSet::new",
                expected: format!("{} subcarriers", grid.count),
                actual: format!("{} matrices", matrices.len()),
            });
        }
        if let Some(first) = matrices.first() {
            let shape = first.shape();
            if matrices.iter().any(|g| g.shape() != shape) {
                return Err(Error::DimensionMismatch {
                    context: "ChannelSet::new",
                    expected: format!("{shape:?} for every subcarrier"),
                    actual: "mixed shapes".into(),
                });
            }
        }
        let set = Self {
            matrices,
            model,
            coupling_applied: false,
            grid,
        };
        if !set.is_finite() {
            return Err(Error::NonFinite("channel matrices"));
        }
        Ok(set)
    }

    pub fn num_elements(&self) -> usize {
        self.matrices.first().map_or(0, |g| g.nrows())
    }

    pub fn num_users(&self) -> usize {
        self.matrices.first().map_or(0, |g| g.ncols())
    }

    pub fn num_subcarriers(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_finite(&self) -> bool {
        self.matrices.iter().all(crate::linalg::is_finite)
    }

    /// Copy in which every subcarrier carries subcarrier `index`'s channel.
    pub fn replicate_subcarrier(&self, index: usize) -> Self {
        let g = self.matrices[index].clone();
        Self {
            matrices: vec![g; self.matrices.len()],
            model: self.model,
            coupling_applied: self.coupling_applied,
            grid: self.grid.clone(),
        }
    }

    /// Same channels with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for g in out.matrices.iter_mut() {
            g.scale_mut(factor);
        }
        out
    }
}

/// Per-element amplitude vector `a_{u,p}(f)` of one path.
pub fn path_gain_vector(
    anchor: &Point,
    path_index: usize,
    incidence: f64,
    fading: f64,
    positions: &[Point],
    grid: &SubcarrierGrid,
    s: usize,
    params: &ChannelParams,
) -> Result<Vec<f64>> {
    let f_abs = grid.absolute(s);
    let gamma = reflection_coefficient(path_index, grid.frequencies[s], grid.carrier, incidence, params).norm();
    positions
        .iter()
        .map(|el| {
            let v = anchor - el;
            let d = checked_distance(anchor, el)?;
            let theta = (v.z / d).clamp(-1.0, 1.0).acos();
            let radiation = params.element_gain * radiation_profile(theta, params.boresight_exponent);
            Ok(fading.sqrt() * gain_coefficient(gamma, radiation, f_abs, d)?)
        })
        .collect()
}

/// Spherical array response `b_{u,p}(f)`.
pub fn spherical_response(anchor: &Point, positions: &[Point], absolute_frequency: f64) -> Result<CVector> {
    let k = 2.0 * std::f64::consts::PI * absolute_frequency / SPEED_OF_LIGHT;
    let values: Result<Vec<C64>> = positions
        .iter()
        .map(|el| Ok(Complex::from_polar(1.0, -k * checked_distance(anchor, el)?)))
        .collect();
    Ok(CVector::from_vec(values?))
}

/// Far-field array response: delay to the array center plus the linear
/// projection of each element position on the arrival direction.
pub fn plane_response(anchor: &Point, positions: &[Point], absolute_frequency: f64) -> Result<CVector> {
    let r = anchor.coords.norm();
    if r == 0.0 {
        return Err(Error::SingularGeometry([0.0; 3], [0.0; 3]));
    }
    let theta = (anchor.z / r).clamp(-1.0, 1.0).acos();
    let phi = anchor.y.atan2(anchor.x);
    let (ux, uy) = (theta.sin() * phi.cos(), theta.sin() * phi.sin());
    let k = 2.0 * std::f64::consts::PI * absolute_frequency / SPEED_OF_LIGHT;
    Ok(CVector::from_iterator(
        positions.len(),
        positions.iter().map(|el| {
            let path = r - (el.x * ux + el.y * uy);
            Complex::from_polar(1.0, -k * path)
        }),
    ))
}

fn synthesize(
    layouts: &[UserLayout],
    positions: &[Point],
    grid: &SubcarrierGrid,
    params: &ChannelParams,
    fading: &PathFading,
    model: ChannelModel,
) -> Result<ChannelSet> {
    if fading.gains.len() != layouts.len()
        || fading
            .gains
            .iter()
            .zip(layouts)
            .any(|(g, u)| g.len() != u.num_paths() + 1)
    {
        return Err(Error::DimensionMismatch {
            context: "channel synthesis",
            expected: "one fading gain per path".into(),
            actual: "mismatched fading table".into(),
        });
    }
    let n = positions.len();
    let mut matrices = Vec::with_capacity(grid.count);
    for s in 0..grid.count {
        let f_abs = grid.absolute(s);
        let mut g = CMatrix::zeros(n, layouts.len());
        for (u, layout) in layouts.iter().enumerate() {
            let mut column = CVector::zeros(n);
            for p in 0..=layout.num_paths() {
                let anchor = layout.path_point(p);
                let amplitude = path_gain_vector(
                    &anchor,
                    p,
                    layout.incidence_angle(p),
                    fading.gains[u][p],
                    positions,
                    grid,
                    s,
                    params,
                )?;
                let response = match model {
                    ChannelModel::Spherical => spherical_response(&anchor, positions, f_abs)?,
                    ChannelModel::Plane => plane_response(&anchor, positions, f_abs)?,
                };
                for (i, a) in amplitude.iter().enumerate() {
                    column[i] += response[i] * *a;
                }
            }
            g.set_column(u, &column);
        }
        matrices.push(g);
    }
    ChannelSet::new(matrices, model, grid.clone())
}

/// Channel under the exact spherical-wavefront model.
pub fn spherical_channel(
    layouts: &[UserLayout],
    positions: &[Point],
    grid: &SubcarrierGrid,
    params: &ChannelParams,
    fading: &PathFading,
) -> Result<ChannelSet> {
    synthesize(layouts, positions, grid, params, fading, ChannelModel::Spherical)
}

/// Channel under the plane-wave approximation, with the same amplitudes.
pub fn plane_wave_channel(
    layouts: &[UserLayout],
    positions: &[Point],
    grid: &SubcarrierGrid,
    params: &ChannelParams,
    fading: &PathFading,
) -> Result<ChannelSet> {
    synthesize(layouts, positions, grid, params, fading, ChannelModel::Plane)
}

/// Propagation inside the microstrips, `H_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WaveguideModel {
    /// `H_s = h_s I`.
    Scalar { gains: Vec<C64> },
    /// `H_s = diag(exp(-α ρ_n - j β_s ρ_n))` with `β_s = β (f_c + f_s) / f_c`.
    Full {
        attenuation: f64,
        wavenumber: f64,
        port_distances: Vec<f64>,
    },
}

impl WaveguideModel {
    /// `H_s = I` on every subcarrier.
    pub fn identity(num_subcarriers: usize) -> Self {
        WaveguideModel::Scalar {
            gains: vec![Complex::new(1.0, 0.0); num_subcarriers],
        }
    }

    /// Lossy microstrip with α = 0.6 Np/m and β = 2π/λ_c; element `l` of
    /// every strip sits `l·λ_c/5` from the port (`l` counted from 1).
    pub fn lossy(num_microstrips: usize, elements_per_strip: usize, wavelength: f64) -> Self {
        let port_distances = (0..num_microstrips)
            .flat_map(|_| (1..=elements_per_strip).map(move |l| l as f64 * wavelength / 5.0))
            .collect();
        WaveguideModel::Full {
            attenuation: 0.6,
            wavenumber: 2.0 * std::f64::consts::PI / wavelength,
            port_distances,
        }
    }

    /// Diagonal of `H_s` for `n` elements.
    pub fn diagonal(&self, s: usize, grid: &SubcarrierGrid, n: usize) -> Result<CVector> {
        match self {
            WaveguideModel::Scalar { gains } => {
                let h = *gains.get(s).ok_or(Error::DimensionMismatch {
                    context: "waveguide gains",
                    expected: format!("at least {} subcarriers", s + 1),
                    actual: format!("{}", gains.len()),
                })?;
                Ok(CVector::from_element(n, h))
            }
            WaveguideModel::Full {
                attenuation,
                wavenumber,
                port_distances,
            } => {
                if port_distances.len() != n {
                    return Err(Error::DimensionMismatch {
                        context: "waveguide port distances",
                        expected: n.to_string(),
                        actual: port_distances.len().to_string(),
                    });
                }
                let beta = wavenumber * grid.absolute(s) / grid.carrier;
                Ok(CVector::from_iterator(
                    n,
                    port_distances
                        .iter()
                        .map(|&rho| Complex::from_polar((-attenuation * rho).exp(), -beta * rho)),
                ))
            }
        }
    }

    /// Diagonals for every subcarrier of `grid`.
    pub fn diagonals(&self, grid: &SubcarrierGrid, n: usize) -> Result<Vec<CVector>> {
        (0..grid.count).map(|s| self.diagonal(s, grid, n)).collect()
    }
}

/// `H_s` as a dense diagonal matrix.
pub fn waveguide_response(model: &WaveguideModel, s: usize, grid: &SubcarrierGrid, n: usize) -> Result<CMatrix> {
    Ok(DMatrix::from_diagonal(&model.diagonal(s, grid, n)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_grid_values() {
        let grid = SubcarrierGrid::new(600e6, 12, 26e9).unwrap();
        assert_eq!(grid.spacing, 50e6);
        assert!((grid.frequencies[0] + 325e6).abs() < 1e-3);
        assert!((grid.frequencies[11] - 225e6).abs() < 1e-3);
        assert!(grid.frequencies.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn delay_examples() {
        let o = Point::origin();
        assert!((propagation_delay(&Point::new(3.0, 0.0, 0.0), &o).unwrap() - 1e-8).abs() < 1e-20);
        assert!((propagation_delay(&o, &Point::new(1.0, 2.0, 2.0)).unwrap() - 1e-8).abs() < 1e-20);
        assert!(matches!(propagation_delay(&o, &o), Err(Error::SingularGeometry(..))));
    }

    #[test]
    fn radiation_examples() {
        assert_eq!(radiation_profile(0.0, 2.0), 6.0);
        assert_eq!(radiation_profile(std::f64::consts::FRAC_PI_2, 2.0), 0.0);
        assert_eq!(radiation_profile(std::f64::consts::FRAC_PI_2, 0.5), 0.0);
        assert!((radiation_profile(std::f64::consts::FRAC_PI_3, 2.0) - 1.5).abs() < 1e-12);
        assert_eq!(radiation_profile(2.0, 2.0), 0.0);
    }

    #[test]
    fn reflection_examples() {
        let mut params = ChannelParams::default();
        assert_eq!(reflection_coefficient(0, 1e6, 26e9, 0.3, &params), Complex::new(1.0, 0.0));
        params.refractive_index = Complex::new(2.24, 0.0);
        params.roughness = 0.0;
        let g = reflection_coefficient(1, 0.0, 26e9, 0.0, &params);
        assert!((g.re - (1.0 - 2.24) / (1.0 + 2.24)).abs() < 1e-12);
        assert!((g.re + 0.3827).abs() < 1e-4);
        params.roughness = 1.0;
        assert!(reflection_coefficient(1, 0.0, 26e9, 0.2, &params).norm() < 1e-100);
    }

    #[test]
    fn gain_examples() {
        let f = 26e9;
        let d = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * f);
        assert!((gain_coefficient(1.0, 6.0, f, d).unwrap() - 6f64.sqrt()).abs() < 1e-12);
        assert_eq!(gain_coefficient(1.0, 0.0, f, 1.0).unwrap(), 0.0);
        let a1 = gain_coefficient(0.7, 3.0, f, 0.5).unwrap();
        let a2 = gain_coefficient(0.7, 3.0, f, 1.0).unwrap();
        assert!((a1 - 2.0 * a2).abs() < 1e-15);
    }

    #[test]
    fn fading_without_shadowing() {
        let params = ChannelParams::default();
        assert!((large_scale_gain(1.0, 0.0, &params) - 10f64.powf(-3.45)).abs() < 1e-15);
    }

    #[test]
    fn shadowing_statistics() {
        let params = ChannelParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| 10.0 * large_scale_fading(10.0, &mut rng, &params).log10())
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean + 72.5).abs() < 0.1, "mean {mean}");
        assert!((var.sqrt() - 8.0).abs() < 0.1, "std {}", var.sqrt());
    }

    #[test]
    fn waveguide_examples() {
        let grid = SubcarrierGrid::new(100e6, 2, 26e9).unwrap();
        let id = waveguide_response(&WaveguideModel::identity(2), 1, &grid, 3).unwrap();
        assert_eq!(id, CMatrix::identity(3, 3));
        let lossless = WaveguideModel::Full {
            attenuation: 0.0,
            wavenumber: 500.0,
            port_distances: vec![0.01, 0.02, 0.03],
        };
        let d = lossless.diagonal(0, &grid, 3).unwrap();
        assert!(d.iter().all(|h| (h.norm() - 1.0).abs() < 1e-15));
        let lossy = WaveguideModel::Full {
            attenuation: 0.5,
            wavenumber: 500.0,
            port_distances: vec![0.1],
        };
        let d = lossy.diagonal(0, &grid, 1).unwrap();
        assert!((d[0].norm() - (-0.05f64).exp()).abs() < 1e-15);
        assert!((d[0].norm() - 0.9512).abs() < 1e-4);
    }
}
