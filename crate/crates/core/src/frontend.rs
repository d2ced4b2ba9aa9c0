//! Metasurface weights and the analog + digital receive chain.
//!
//! The weights are stored as the compact vector `q` of length `N_R = M L`,
//! ordered `m * L + l`. The block matrix `Q` (`M x N_R`) only has `q` on its
//! strip blocks, so products with it are done strip-wise.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{dims, Error, Result};
use crate::linalg::{CMatrix, CVector, C64, J};

const LORENTZ_TOL: f64 = 1e-9;
const UNIT_TOL: f64 = 1e-12;

/// Feasible set of a single metasurface weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FeasibleSet {
    /// Any complex value.
    Unconstrained,
    /// Real amplitude in `[min, max]`.
    AmplitudeOnly { min: f64, max: f64 },
    /// `{0, level}`.
    BinaryAmplitude { level: f64 },
    /// `(j + e^{jφ}) / 2`.
    Lorentzian,
}

impl FeasibleSet {
    /// Amplitude-only set `[0.001, 5]`.
    pub const AO_DEFAULT: FeasibleSet = FeasibleSet::AmplitudeOnly { min: 0.001, max: 5.0 };
    /// Binary set `{0, 0.1}`.
    pub const BA_DEFAULT: FeasibleSet = FeasibleSet::BinaryAmplitude { level: 0.1 };

    pub fn tag(&self) -> &'static str {
        match self {
            FeasibleSet::Unconstrained => "UC",
            FeasibleSet::AmplitudeOnly { .. } => "AO",
            FeasibleSet::BinaryAmplitude { .. } => "BA",
            FeasibleSet::Lorentzian => "LP",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FeasibleSet::AmplitudeOnly { min, max } if !(max > min && min > 0.0) => {
                Err(Error::InvalidParameter(format!(
                    "amplitude-only bounds need max > min > 0 (got [{min}, {max}])"
                )))
            }
            FeasibleSet::BinaryAmplitude { level } if !(level > 0.0) => Err(Error::InvalidParameter(
                format!("binary amplitude level must be positive (got {level})"),
            )),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, value: C64) -> bool {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return false;
        }
        match *self {
            FeasibleSet::Unconstrained => true,
            FeasibleSet::AmplitudeOnly { min, max } => {
                value.im == 0.0 && value.re >= min && value.re <= max
            }
            FeasibleSet::BinaryAmplitude { level } => {
                value.im == 0.0 && (value.re == 0.0 || value.re == level)
            }
            FeasibleSet::Lorentzian => ((value - J * 0.5).norm() - 0.5).abs() <= LORENTZ_TOL,
        }
    }
}

impl fmt::Display for FeasibleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibleSet::AmplitudeOnly { min, max } => write!(f, "AO[{min},{max}]"),
            FeasibleSet::BinaryAmplitude { level } => write!(f, "BA{{0,{level}}}"),
            other => f.write_str(other.tag()),
        }
    }
}

impl FromStr for FeasibleSet {
    type Err = Error;

    /// Parses `UC`, `AO`, `BA` or `LP` (case-insensitive) with the default
    /// parameters, or the explicit forms `AO[a,b]` and `BA{0,c}` printed by
    /// `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        let bad = || Error::InvalidParameter(format!("unknown feasible set '{text}'"));
        let number = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let upper = text.to_ascii_uppercase();
        let set = match upper.as_str() {
            "UC" => FeasibleSet::Unconstrained,
            "AO" => FeasibleSet::AO_DEFAULT,
            "BA" => FeasibleSet::BA_DEFAULT,
            "LP" => FeasibleSet::Lorentzian,
            _ => {
                if let Some(body) = upper.strip_prefix("AO[").and_then(|r| r.strip_suffix(']')) {
                    let (a, b) = body.split_once(',').ok_or_else(bad)?;
                    FeasibleSet::AmplitudeOnly {
                        min: number(a)?,
                        max: number(b)?,
                    }
                } else if let Some(body) = upper.strip_prefix("BA{").and_then(|r| r.strip_suffix('}')) {
                    let (zero, c) = body.split_once(',').ok_or_else(bad)?;
                    if number(zero)? != 0.0 {
                        return Err(bad());
                    }
                    FeasibleSet::BinaryAmplitude { level: number(c)? }
                } else {
                    return Err(bad());
                }
            }
        };
        set.validate()?;
        Ok(set)
    }
}

/// Weights `q` together with the set they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: CVector,
    set: FeasibleSet,
}

impl WeightVector {
    pub fn new(values: CVector, set: FeasibleSet) -> Result<Self> {
        set.validate()?;
        if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| !set.contains(**v)) {
            return Err(Error::Infeasible {
                index,
                value: v.to_string(),
                set: set.to_string(),
            });
        }
        Ok(Self { values, set })
    }

    pub fn values(&self) -> &CVector {
        &self.values
    }

    pub fn set(&self) -> FeasibleSet {
        self.set
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> CVector {
        self.values
    }
}

/// The dense block matrix `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub matrix: CMatrix,
    pub elements_per_strip: usize,
}

impl WeightMatrix {
    /// Reads the strip blocks back into `q`.
    pub fn block_entries(&self) -> CVector {
        let l = self.elements_per_strip;
        let m = self.matrix.nrows();
        CVector::from_iterator(m * l, (0..m * l).map(|n| self.matrix[(n / l, n)]))
    }
}

/// Places `q` on the strip blocks: `Q[m, m L + l] = q[m L + l]`.
pub fn expand_to_block(q: &CVector, num_microstrips: usize, elements_per_strip: usize) -> Result<WeightMatrix> {
    let n = num_microstrips * elements_per_strip;
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            context: "expand_to_block",
            expected: n.to_string(),
            actual: q.len().to_string(),
        });
    }
    let mut matrix = CMatrix::zeros(num_microstrips, n);
    for (i, &v) in q.iter().enumerate() {
        matrix[(i / elements_per_strip, i)] = v;
    }
    Ok(WeightMatrix {
        matrix,
        elements_per_strip,
    })
}

/// Unit-modulus vector `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(CVector);

impl PhaseVector {
    pub fn new(values: CVector) -> Result<Self> {
        if let Some((index, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| (v.norm() - 1.0).abs() > UNIT_TOL)
        {
            return Err(Error::NonUnitModulus {
                index,
                modulus: v.norm(),
            });
        }
        Ok(Self(values))
    }

    pub fn from_angles(angles: &[f64]) -> Self {
        Self(CVector::from_iterator(
            angles.len(),
            angles.iter().map(|&a| Complex::from_polar(1.0, a)),
        ))
    }

    pub fn values(&self) -> &CVector {
        &self.0
    }
}

/// `q = (j + p) / 2`.
pub fn lorentzian_map(p: &PhaseVector) -> WeightVector {
    WeightVector {
        values: p.0.map(|v| (J + v) * 0.5),
        set: FeasibleSet::Lorentzian,
    }
}

/// `e^{j arg z}` with `arg 0 = 0`.
pub(crate) fn unit_phase(z: C64) -> C64 {
    if z.norm() == 0.0 {
        Complex::new(1.0, 0.0)
    } else {
        Complex::from_polar(1.0, z.arg())
    }
}

/// Nearest feasible point, used for initialization and safeguarding.
pub fn project_to_set(raw: &CVector, set: FeasibleSet) -> Result<WeightVector> {
    set.validate()?;
    let values = match set {
        FeasibleSet::Unconstrained => raw.clone(),
        FeasibleSet::AmplitudeOnly { min, max } => raw.map(|v| Complex::new(v.re.clamp(min, max), 0.0)),
        FeasibleSet::BinaryAmplitude { level } => raw.map(|v| {
            if (v.re - level).abs() <= v.re.abs() {
                Complex::new(level, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        }),
        FeasibleSet::Lorentzian => raw.map(|v| {
            let centered = v * 2.0 - J;
            // Already on the circle: keep the exact value.
            if (centered.norm() - 1.0).abs() <= UNIT_TOL {
                v
            } else {
                (J + unit_phase(centered)) * 0.5
            }
        }),
    };
    WeightVector::new(values, set)
}

/// `Q v` for `v` of length `N_R`, done strip by strip.
pub fn block_apply(q: &CVector, elements_per_strip: usize, v: &CVector) -> CVector {
    let m = q.len() / elements_per_strip;
    CVector::from_iterator(
        m,
        (0..m).map(|mi| {
            let r = mi * elements_per_strip..(mi + 1) * elements_per_strip;
            r.map(|n| q[n] * v[n]).sum::<C64>()
        }),
    )
}

/// `Q diag(h) X` for `X` of size `N_R x k`, strip-wise.
pub fn block_times(q: &CVector, elements_per_strip: usize, h: &CVector, x: &CMatrix) -> CMatrix {
    let m = q.len() / elements_per_strip;
    let mut out = CMatrix::zeros(m, x.ncols());
    for mi in 0..m {
        for n in mi * elements_per_strip..(mi + 1) * elements_per_strip {
            let w = q[n] * h[n];
            if w == Complex::new(0.0, 0.0) {
                continue;
            }
            for c in 0..x.ncols() {
                out[(mi, c)] += w * x[(n, c)];
            }
        }
    }
    out
}

/// `Q diag(h)` as a dense `M x N_R` matrix.
pub fn front_end_matrix(q: &CVector, elements_per_strip: usize, h: &CVector) -> CMatrix {
    let m = q.len() / elements_per_strip;
    let mut out = CMatrix::zeros(m, q.len());
    for (n, (&qn, &hn)) in q.iter().zip(h.iter()).enumerate() {
        out[(n / elements_per_strip, n)] = qn * hn;
    }
    out
}

/// `z = W^H Q H y`.
pub fn receive_combine(
    combiner: &CMatrix,
    weights: &WeightMatrix,
    waveguide: &CVector,
    received: &CVector,
) -> Result<CVector> {
    let (m, n) = weights.matrix.shape();
    if combiner.nrows() != m || waveguide.len() != n || received.len() != n {
        return Err(Error::DimensionMismatch {
            context: "receive_combine",
            expected: format!("W with {m} rows, H and y of length {n}"),
            actual: format!(
                "W {}, H {}, y {}",
                dims(combiner.nrows(), combiner.ncols()),
                waveguide.len(),
                received.len()
            ),
        });
    }
    let q = weights.block_entries();
    let strip_out = block_apply(&q, weights.elements_per_strip, &waveguide.component_mul(received));
    Ok(combiner.adjoint() * strip_out)
}
