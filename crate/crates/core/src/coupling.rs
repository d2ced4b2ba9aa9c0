//! Mutual coupling between side-by-side parallel wire dipoles.
//!
//! `C = (Z_A + Z_L)(Z + Z_L I)^-1`, where `Z` carries the antenna impedance on
//! its diagonal and the closed-form dipole mutual impedances elsewhere.

use nalgebra::SVD;
use num_complex::Complex;

use crate::channel::ChannelSet;
use crate::error::{dims, Error, Result};
use crate::geometry::Point;
use crate::linalg::{CMatrix, C64};
use crate::special::{cosine_integral, sine_integral};

/// Condition number of `Z + Z_L I` beyond which the coupling matrix is refused.
pub const MAX_COUPLING_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConfig {
    pub antenna_impedance: C64,
    pub load_impedance: C64,
    pub dipole_length: f64,
    /// `κ = 2π / λ`.
    pub wavenumber: f64,
    pub positions: Vec<Point>,
}

impl CouplingConfig {
    /// 50 Ω antenna and load impedances with the given dipole length.
    pub fn new(positions: Vec<Point>, wavelength: f64, dipole_length: f64) -> Self {
        Self {
            antenna_impedance: Complex::new(50.0, 0.0),
            load_impedance: Complex::new(50.0, 0.0),
            dipole_length,
            wavenumber: 2.0 * std::f64::consts::PI / wavelength,
            positions,
        }
    }

    /// Metamaterial elements modelled as λ/32 dipoles.
    pub fn metamaterial(positions: Vec<Point>, wavelength: f64) -> Self {
        Self::new(positions, wavelength, wavelength / 32.0)
    }

    /// Conventional half-wave dipoles.
    pub fn half_wave(positions: Vec<Point>, wavelength: f64) -> Self {
        Self::new(positions, wavelength, wavelength / 2.0)
    }

    fn validate(&self) -> Result<()> {
        if (self.antenna_impedance + self.load_impedance).norm() == 0.0 {
            return Err(Error::InvalidParameter("Z_A + Z_L must be nonzero".into()));
        }
        if !(self.dipole_length > 0.0 && self.wavenumber > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dipole length {} and wavenumber {} must be positive",
                self.dipole_length, self.wavenumber
            )));
        }
        Ok(())
    }
}

/// Mutual impedance between two parallel side-by-side dipoles `d` apart.
pub fn mutual_impedance_entry(distance: f64, dipole_length: f64, wavenumber: f64) -> Result<C64> {
    if !(distance > 0.0) {
        return Err(Error::Domain(format!(
            "mutual impedance needs a positive separation, got {distance}"
        )));
    }
    let k = wavenumber;
    let hyp = (distance * distance + dipole_length * dipole_length).sqrt();
    let u0 = k * distance;
    let u1 = k * (hyp + dipole_length);
    let u2 = k * (hyp - dipole_length);
    let re = 30.0 * (2.0 * cosine_integral(u0)? - cosine_integral(u1)? - cosine_integral(u2)?);
    let im = -30.0 * (2.0 * sine_integral(u0) - sine_integral(u1) - sine_integral(u2));
    Ok(Complex::new(re, im))
}

/// The full mutual impedance matrix `Z`.
pub fn impedance_matrix(config: &CouplingConfig) -> Result<CMatrix> {
    config.validate()?;
    let n = config.positions.len();
    let mut z = CMatrix::from_diagonal_element(n, n, config.antenna_impedance);
    for a in 0..n {
        for b in (a + 1)..n {
            let d = (config.positions[a] - config.positions[b]).norm();
            let entry = mutual_impedance_entry(d, config.dipole_length, config.wavenumber)?;
            z[(a, b)] = entry;
            z[(b, a)] = entry;
        }
    }
    Ok(z)
}

/// `C = (Z_A + Z_L)(Z + Z_L I)^-1` for an explicit impedance matrix.
pub fn coupling_from_impedance(
    impedance: &CMatrix,
    antenna_impedance: C64,
    load_impedance: C64,
) -> Result<CMatrix> {
    let n = impedance.nrows();
    let shifted = impedance + CMatrix::from_diagonal_element(n, n, load_impedance);
    let svd = SVD::new(shifted.clone(), false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition > MAX_COUPLING_CONDITION {
        return Err(Error::IllConditionedCoupling { condition });
    }
    let inverse = shifted
        .try_inverse()
        .ok_or(Error::IllConditionedCoupling { condition })?;
    Ok(inverse * (antenna_impedance + load_impedance))
}

pub fn coupling_matrix(config: &CouplingConfig) -> Result<CMatrix> {
    let z = impedance_matrix(config)?;
    coupling_from_impedance(&z, config.antenna_impedance, config.load_impedance)
}

/// Replaces every `G_s` by `C G_s`.
pub fn apply_coupling(coupling: &CMatrix, channels: &ChannelSet) -> Result<ChannelSet> {
    let n = channels.num_elements();
    if coupling.nrows() != n || coupling.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "apply_coupling",
            expected: dims(n, n),
            actual: dims(coupling.nrows(), coupling.ncols()),
        });
    }
    let mut out = channels.clone();
    for g in out.matrices.iter_mut() {
        *g = coupling * &*g;
    }
    out.coupling_applied = true;
    Ok(out)
}
