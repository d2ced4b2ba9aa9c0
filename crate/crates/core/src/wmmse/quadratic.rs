//! The weight subproblem `min q^H S q − 2 Re(q^H c*)` and its assembly.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, hermitian_part, CMatrix, CVector, C64};
use crate::frontend::front_end_matrix;

use super::objective::{AuxWeightSet, CombinerSet, LinkBudget};

/// `f(q) = q^H S q − 2 Re(q^H c*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub s: CMatrix,
    pub c: CVector,
}

impl QuadraticForm {
    pub fn new(s: CMatrix, c: CVector) -> Result<Self> {
        if s.nrows() != s.ncols() || s.nrows() != c.len() {
            return Err(Error::DimensionMismatch {
                context: "QuadraticForm",
                expected: format!("square S matching c of length {}", c.len()),
                actual: format!("{}x{}", s.nrows(), s.ncols()),
            });
        }
        Ok(Self { s, c })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn objective(&self, q: &CVector) -> f64 {
        let sq = &self.s * q;
        q.dotc(&sq).re - 2.0 * q.dotc(&self.c.conjugate()).re
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.s)
    }

    /// Same minimizers with `S` and `c` divided by `scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        Self {
            s: self.s.unscale(scale),
            c: self.c.unscale(scale),
        }
    }
}

/// How the optimization variable maps to the analog front end `F_s`.
#[derive(Debug, Clone, PartialEq)]
pub enum Architecture {
    /// `F_s = Q H_s` with `Q` the strip-block expansion of `q`.
    Metasurface {
        elements_per_strip: usize,
        /// Diagonal of `H_s` for every subcarrier.
        waveguide: Vec<CVector>,
    },
    /// `F_s = X` with a dense `num_rf x num_antennas` matrix, stored row-major
    /// as `x[m N + n] = X[m, n]`.
    FullAnalog { num_rf: usize, num_antennas: usize },
}

impl Architecture {
    pub fn num_variables(&self) -> usize {
        match self {
            Architecture::Metasurface { waveguide, .. } => waveguide.first().map_or(0, |h| h.len()),
            Architecture::FullAnalog { num_rf, num_antennas } => num_rf * num_antennas,
        }
    }

    pub fn num_outputs(&self) -> usize {
        match self {
            Architecture::Metasurface {
                elements_per_strip,
                waveguide,
            } => waveguide.first().map_or(0, |h| h.len()) / elements_per_strip,
            Architecture::FullAnalog { num_rf, .. } => *num_rf,
        }
    }

    /// `F_s` for subcarrier `s`.
    pub fn frontend(&self, x: &CVector, s: usize) -> CMatrix {
        match self {
            Architecture::Metasurface {
                elements_per_strip,
                waveguide,
            } => front_end_matrix(x, *elements_per_strip, &waveguide[s]),
            Architecture::FullAnalog { num_rf, num_antennas } => {
                CMatrix::from_fn(*num_rf, *num_antennas, |m, n| x[m * num_antennas + n])
            }
        }
    }

    pub fn frontends(&self, x: &CVector, num_subcarriers: usize) -> Vec<CMatrix> {
        (0..num_subcarriers).map(|s| self.frontend(x, s)).collect()
    }

    pub(crate) fn check(&self, channels: &[CMatrix]) -> Result<()> {
        let n = match self {
            Architecture::Metasurface {
                elements_per_strip,
                waveguide,
            } => {
                if waveguide.len() != channels.len() {
                    return Err(Error::DimensionMismatch {
                        context: "waveguide responses",
                        expected: format!("{} subcarriers", channels.len()),
                        actual: waveguide.len().to_string(),
                    });
                }
                let n = waveguide.first().map_or(0, |h| h.len());
                if *elements_per_strip == 0 || n % elements_per_strip != 0 || waveguide.iter().any(|h| h.len() != n) {
                    return Err(Error::DimensionMismatch {
                        context: "waveguide responses",
                        expected: format!("equal lengths divisible by {elements_per_strip}"),
                        actual: n.to_string(),
                    });
                }
                n
            }
            Architecture::FullAnalog { num_antennas, .. } => *num_antennas,
        };
        if let Some(g) = channels.iter().find(|g| g.nrows() != n) {
            return Err(Error::DimensionMismatch {
                context: "channel rows",
                expected: n.to_string(),
                actual: g.nrows().to_string(),
            });
        }
        Ok(())
    }

    /// Assembles `S` and `c` from fixed `W_s`, `M_s`.
    pub fn build_quadratic(
        &self,
        combiners: &CombinerSet,
        aux: &AuxWeightSet,
        channels: &[CMatrix],
        budget: &LinkBudget,
    ) -> Result<QuadraticForm> {
        self.check(channels)?;
        let dim = self.num_variables();
        let mut s_acc = CMatrix::zeros(dim, dim);
        let mut c_acc = CVector::zeros(dim);
        let p = budget.power;
        let sigma = budget.noise_power();
        for (s, ((w, m), g)) in combiners.0.iter().zip(&aux.0).zip(channels).enumerate() {
            let b = w * m * w.adjoint();
            match self {
                Architecture::Metasurface {
                    elements_per_strip,
                    waveguide,
                } => {
                    let l = *elements_per_strip;
                    let h = &waveguide[s];
                    let hg = CMatrix::from_fn(g.nrows(), g.ncols(), |i, j| h[i] * g[(i, j)]);
                    let a = &hg * hg.adjoint();
                    let c_mat = &hg * m * w.adjoint();
                    for row in 0..dim {
                        for col in 0..dim {
                            // (B ⊗ 1_L) ⊙ A^T; the noise part only survives on the diagonal.
                            let mut v = a[(col, row)] * p;
                            if row == col {
                                v += h[row].norm_sqr() * sigma;
                            }
                            s_acc[(row, col)] += b[(row / l, col / l)] * v;
                        }
                        c_acc[row] += c_mat[(row, row / l)] * p;
                    }
                }
                Architecture::FullAnalog { num_rf, num_antennas } => {
                    let n = *num_antennas;
                    let a = g * g.adjoint();
                    let c_mat = g * m * w.adjoint();
                    for i in 0..*num_rf {
                        for j in 0..*num_rf {
                            let bij = b[(i, j)];
                            if bij == C64::new(0.0, 0.0) {
                                continue;
                            }
                            for l in 0..n {
                                for k in 0..n {
                                    let mut v = a[(k, l)] * p;
                                    if k == l {
                                        v += sigma;
                                    }
                                    s_acc[(i * n + l, j * n + k)] += bij * v;
                                }
                            }
                        }
                        for k in 0..n {
                            c_acc[i * n + k] += c_mat[(k, i)] * p;
                        }
                    }
                }
            }
        }
        QuadraticForm::new(hermitian_part(&s_acc), c_acc)
    }
}
