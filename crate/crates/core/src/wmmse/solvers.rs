//! Solvers for the weight subproblem under each feasible set.
//!
//! Every solver is warm-started and never returns a point whose objective is
//! above the warm start's, which is what keeps the outer AO loop monotone.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::{unit_phase, FeasibleSet};
use crate::linalg::{hermitian_eigen, power_iteration, CMatrix, CVector, J};

use super::quadratic::QuadraticForm;

/// Largest matrix size for which a non-converged power iteration falls back
/// to a full eigendecomposition.
pub const FULL_EIGEN_LIMIT: usize = 64;

/// Tolerances and iteration caps for the AO loop and the inner solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Stop the AO loop when the rate changes by at most this much.
    pub ao_tol: f64,
    pub ao_max_iter: usize,
    /// Stop MM when the objective changes by at most this much.
    pub mm_tol: f64,
    pub mm_max_iter: usize,
    /// Relative Rayleigh-quotient change that ends the power iteration.
    pub eig_tol: f64,
    pub eig_max_iter: usize,
    /// Stationarity tolerance for the box and binary solvers.
    pub qp_tol: f64,
    pub qp_max_iter: usize,
    /// Relative ridge for linear solves.
    pub ridge: f64,
    /// Seed for the random initial weights.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            ao_tol: 1e-3,
            ao_max_iter: 100,
            mm_tol: 1e-8,
            mm_max_iter: 1000,
            eig_tol: 1e-9,
            eig_max_iter: 500,
            qp_tol: 1e-9,
            qp_max_iter: 2000,
            ridge: 1e-12,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("ao_tol", self.ao_tol),
            ("mm_tol", self.mm_tol),
            ("eig_tol", self.eig_tol),
            ("qp_tol", self.qp_tol),
            ("ridge", self.ridge),
        ];
        for (name, v) in tols {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive (got {v})")));
            }
        }
        let caps = [
            ("ao_max_iter", self.ao_max_iter),
            ("mm_max_iter", self.mm_max_iter),
            ("eig_max_iter", self.eig_max_iter),
            ("qp_max_iter", self.qp_max_iter),
        ];
        for (name, v) in caps {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenMethod {
    Power,
    Full,
    /// Power iteration did not converge; `trace(S)` is used as the bound.
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBound {
    /// Estimate of `λmax`.
    pub value: f64,
    /// A value `T` with `T I ⪰ S`, used by the MM surrogate.
    pub majorizer: f64,
    pub method: EigenMethod,
    pub iterations: usize,
}

impl EigenBound {
    /// Set when the estimate fell back to the trace bound.
    pub fn warning(&self) -> bool {
        self.method == EigenMethod::Trace
    }
}

/// Largest eigenvalue of a Hermitian PSD matrix.
pub fn max_eigenvalue(s: &CMatrix, options: &SolverOptions) -> EigenBound {
    let n = s.nrows();
    if n == 0 {
        return EigenBound {
            value: 0.0,
            majorizer: 0.0,
            method: EigenMethod::Full,
            iterations: 0,
        };
    }
    let est = power_iteration(s, options.eig_tol, options.eig_max_iter);
    if est.converged {
        return EigenBound {
            value: est.value,
            majorizer: est.value + est.residual,
            method: EigenMethod::Power,
            iterations: est.iterations,
        };
    }
    if n <= FULL_EIGEN_LIMIT {
        let (values, _) = hermitian_eigen(s);
        let top = values[n - 1].max(0.0);
        return EigenBound {
            value: top,
            majorizer: top,
            method: EigenMethod::Full,
            iterations: est.iterations,
        };
    }
    let trace: f64 = (0..n).map(|i| s[(i, i)].re).sum();
    EigenBound {
        value: trace,
        majorizer: trace,
        method: EigenMethod::Trace,
        iterations: est.iterations,
    }
}

/// Output of a weight solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub q: CVector,
    pub objective: f64,
    pub iterations: usize,
    /// Objective after every inner iteration (MM: the `f(p)` sequence).
    pub trace: Vec<f64>,
    /// Stationarity residual: `‖S q − c*‖` for the unconstrained solver, the
    /// gradient-mapping norm for the box solver.
    pub residual: Option<f64>,
    pub eigen: Option<EigenBound>,
    /// True when the solver's candidate was worse than the warm start and
    /// the warm start was returned instead.
    pub kept_warm_start: bool,
}

fn check_warm(form: &QuadraticForm, warm: &CVector) -> Result<()> {
    if warm.len() != form.dim() {
        return Err(Error::DimensionMismatch {
            context: "warm start",
            expected: form.dim().to_string(),
            actual: warm.len().to_string(),
        });
    }
    Ok(())
}

fn finish(form: &QuadraticForm, warm: &CVector, candidate: CVector, mut sol: Solution) -> Solution {
    let f_new = form.objective(&candidate);
    let f_old = form.objective(warm);
    if f_new.is_finite() && f_new <= f_old {
        sol.q = candidate;
        sol.objective = f_new;
    } else {
        sol.q = warm.clone();
        sol.objective = f_old;
        sol.kept_warm_start = true;
    }
    sol
}

fn empty_solution() -> Solution {
    Solution {
        q: CVector::zeros(0),
        objective: 0.0,
        iterations: 0,
        trace: Vec::new(),
        residual: None,
        eigen: None,
        kept_warm_start: false,
    }
}

/// Unconstrained minimizer: `(S + ridge λmax I) q = c*`, solved on the
/// eigenbasis of `S`.
pub fn solve_uc(form: &QuadraticForm, warm: &CVector, options: &SolverOptions) -> Result<Solution> {
    check_warm(form, warm)?;
    let (values, vectors) = hermitian_eigen(&form.s);
    let n = form.dim();
    let top = values.iter().fold(0.0_f64, |a, &v| a.max(v));
    if top <= 0.0 {
        let mut sol = empty_solution();
        sol.q = warm.clone();
        sol.objective = form.objective(warm);
        sol.kept_warm_start = true;
        return Ok(sol);
    }
    let shift = options.ridge * top;
    let rhs = vectors.adjoint() * form.c.conjugate();
    let coeffs = CVector::from_fn(n, |i, _| {
        let v = values[i].max(0.0);
        if v <= f64::EPSILON * top * n as f64 {
            Complex::new(0.0, 0.0)
        } else {
            rhs[i] / (v + shift)
        }
    });
    let q = &vectors * coeffs;
    let residual = (&form.s * &q - form.c.conjugate()).norm();
    let mut sol = empty_solution();
    sol.iterations = 1;
    sol.residual = Some(residual);
    Ok(finish(form, warm, q, sol))
}

/// Projected gradient on the real objective `x^T Re(S) x − 2 Re(c)^T x` over
/// the box `[min, max]`, step `1 / (2 λmax)`.
///
/// Stops when a step moves the iterate by at most `qp_tol (1 + ‖x‖)`.
pub fn solve_ao_box(
    form: &QuadraticForm,
    min: f64,
    max: f64,
    warm: &CVector,
    options: &SolverOptions,
) -> Result<Solution> {
    check_warm(form, warm)?;
    if !(max >= min && min > 0.0) {
        return Err(Error::InvalidParameter(format!("box [{min}, {max}] needs max >= min > 0")));
    }
    let n = form.dim();
    let r = form.s.map(|z| z.re);
    let b = form.c.map(|z| z.re);
    let mut x = nalgebra::DVector::from_fn(n, |i, _| warm[i].re.clamp(min, max));
    let to_complex = |x: &nalgebra::DVector<f64>| x.map(|v| Complex::new(v, 0.0));
    let real_obj = |x: &nalgebra::DVector<f64>| x.dot(&(&r * x)) - 2.0 * b.dot(x);
    let eigen = max_eigenvalue(&form.s, options);
    let mut sol = empty_solution();
    sol.eigen = Some(eigen);
    let lipschitz = 2.0 * eigen.majorizer;
    let mut f = real_obj(&x);
    sol.trace.push(f);
    if lipschitz > 0.0 && max > min {
        for it in 1..=options.qp_max_iter {
            sol.iterations = it;
            let grad = (&r * &x - &b) * 2.0;
            let next = (&x - grad / lipschitz).map(|v| v.clamp(min, max));
            // Norm of the gradient mapping L (x - x⁺).
            let mapping = (&next - &x).norm() * lipschitz;
            let f_next = real_obj(&next);
            if f_next > f {
                break;
            }
            x = next;
            f = f_next;
            sol.trace.push(f);
            sol.residual = Some(mapping);
            if mapping <= options.qp_tol {
                break;
            }
        }
    }
    let start = to_complex(&nalgebra::DVector::from_fn(n, |i, _| warm[i].re.clamp(min, max)));
    Ok(finish(form, &start, to_complex(&x), sol))
}

/// Cyclic coordinate descent over `q_n ∈ {0, level}`. Ties go to `level`.
pub fn solve_ba_greedy(form: &QuadraticForm, level: f64, warm: &CVector, options: &SolverOptions) -> Result<Solution> {
    check_warm(form, warm)?;
    if !(level > 0.0) {
        return Err(Error::InvalidParameter(format!("binary level must be positive (got {level})")));
    }
    let n = form.dim();
    let mut q = warm.map(|v| {
        if (v.re - level).abs() <= v.re.abs() {
            Complex::new(level, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let start = q.clone();
    let mut sq = &form.s * &q;
    let mut f = form.objective(&q);
    let mut sol = empty_solution();
    sol.trace.push(f);
    for pass in 1..=options.qp_max_iter {
        sol.iterations = pass;
        let mut changed = false;
        for i in 0..n {
            let on = q[i].re != 0.0;
            let delta = if on { -level } else { level };
            // f(q + δ e_i) − f(q), δ real.
            let diff = 2.0 * delta * sq[i].re + delta * delta * form.s[(i, i)].re - 2.0 * delta * form.c[i].re;
            let take = if on { diff < 0.0 } else { diff <= 0.0 };
            if take {
                let d = Complex::new(delta, 0.0);
                q[i] += d;
                for k in 0..n {
                    sq[k] += form.s[(k, i)] * d;
                }
                f += diff;
                changed = true;
            }
        }
        sol.trace.push(f);
        if !changed {
            break;
        }
    }
    Ok(finish(form, &start, q, sol))
}

/// MM over unit-modulus `p` for `g(p) = p^H S p − 2 Re(p^H b)`:
/// `a = (T I − S) p + b`, `p ← e^{j arg a}`.
fn unit_modulus_mm(s: &CMatrix, b: &CVector, p0: CVector, options: &SolverOptions, sol: &mut Solution) -> CVector {
    let eigen = max_eigenvalue(s, options);
    sol.eigen = Some(eigen);
    let t = eigen.majorizer;
    let objective = |p: &CVector| p.dotc(&(s * p)).re - 2.0 * p.dotc(b).re;
    let mut p = p0;
    let mut f = objective(&p);
    sol.trace.push(f);
    for it in 1..=options.mm_max_iter {
        sol.iterations = it;
        let a = p.scale(t) - s * &p + b;
        let next = a.map(unit_phase);
        let f_next = objective(&next);
        if f_next > f {
            // Only reachable through rounding or an underestimated λmax.
            break;
        }
        let change = f - f_next;
        p = next;
        f = f_next;
        sol.trace.push(f);
        if change <= options.mm_tol {
            break;
        }
    }
    p
}

/// Lorentzian-constrained MM. With `q = (j + p) / 2` the objective becomes
/// `(p^H S p − 2 Re(p^H (2c* − j S 1))) / 4` plus a constant; the trace
/// records the bracketed `f(p)`.
pub fn solve_lp_mm(form: &QuadraticForm, warm: &CVector, options: &SolverOptions) -> Result<Solution> {
    check_warm(form, warm)?;
    let n = form.dim();
    let ones = CVector::from_element(n, Complex::new(1.0, 0.0));
    let b = form.c.conjugate().scale(2.0) - (&form.s * ones) * J;
    let p0 = warm.map(|v| unit_phase(v * 2.0 - J));
    let start = p0.map(|v| (J + v) * 0.5);
    let mut sol = empty_solution();
    let p = unit_modulus_mm(&form.s, &b, p0, options, &mut sol);
    let q = p.map(|v| (J + v) * 0.5);
    Ok(finish(form, &start, q, sol))
}

/// `p^H S p − 2 Re(p^H (2c* − j S 1))`, the phase-domain objective of
/// [`solve_lp_mm`].
pub fn lp_phase_objective(form: &QuadraticForm, p: &CVector) -> f64 {
    let n = form.dim();
    let ones = CVector::from_element(n, Complex::new(1.0, 0.0));
    let b = form.c.conjugate().scale(2.0) - (&form.s * ones) * J;
    p.dotc(&(&form.s * p)).re - 2.0 * p.dotc(&b).re
}

/// MM for unit-modulus `q` directly (the hybrid analog stage).
pub fn solve_unit_modulus_mm(form: &QuadraticForm, warm: &CVector, options: &SolverOptions) -> Result<Solution> {
    check_warm(form, warm)?;
    let p0 = warm.map(unit_phase);
    let mut sol = empty_solution();
    let p = unit_modulus_mm(&form.s, &form.c.conjugate(), p0.clone(), options, &mut sol);
    Ok(finish(form, &p0, p, sol))
}

/// Which solver handles the weight update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSolver {
    Unconstrained,
    AmplitudeBox { min: f64, max: f64 },
    BinaryGreedy { level: f64 },
    Lorentzian,
    UnitModulus,
}

impl From<FeasibleSet> for WeightSolver {
    fn from(set: FeasibleSet) -> Self {
        match set {
            FeasibleSet::Unconstrained => WeightSolver::Unconstrained,
            FeasibleSet::AmplitudeOnly { min, max } => WeightSolver::AmplitudeBox { min, max },
            FeasibleSet::BinaryAmplitude { level } => WeightSolver::BinaryGreedy { level },
            FeasibleSet::Lorentzian => WeightSolver::Lorentzian,
        }
    }
}

impl WeightSolver {
    pub fn solve(&self, form: &QuadraticForm, warm: &CVector, options: &SolverOptions) -> Result<Solution> {
        match *self {
            WeightSolver::Unconstrained => solve_uc(form, warm, options),
            WeightSolver::AmplitudeBox { min, max } => solve_ao_box(form, min, max, warm, options),
            WeightSolver::BinaryGreedy { level } => solve_ba_greedy(form, level, warm, options),
            WeightSolver::Lorentzian => solve_lp_mm(form, warm, options),
            WeightSolver::UnitModulus => solve_unit_modulus_mm(form, warm, options),
        }
    }
}
