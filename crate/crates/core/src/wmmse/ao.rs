//! Alternating optimization of the combiners, auxiliary weights and the
//! analog front end.

use web_time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frontend::{FeasibleSet, WeightVector};
use crate::linalg::{CMatrix, CVector, J};

use super::objective::{
    frontend_rate, mmse_update, mse_matrix, mse_rate, sum_rate_with_frontend, AuxWeightSet, CombinerSet, LinkBudget,
};
use super::quadratic::Architecture;
use super::solvers::{SolverOptions, WeightSolver};

/// Allowed decrease of the rate between AO iterations.
pub const MONOTONIC_SLACK: f64 = 1e-9;

/// Wall-clock time spent in each stage of one AO iteration, in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub combiner: f64,
    pub quadratic: f64,
    pub solve: f64,
}

/// Diagnostics of one AO iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Rate after this iteration's weight update and the following `W` update.
    pub rate: f64,
    /// `Σ_s log2 |(E_s / P)^-1|` at the start of the iteration.
    pub mse_rate: f64,
    /// Relative gap between `mse_rate` and the rate it should equal.
    pub identity_gap: f64,
    pub inner_iterations: usize,
    /// Objective trace of the inner solver.
    pub inner_trace: Vec<f64>,
    pub kept_warm_start: bool,
    pub eigen_warning: bool,
    pub timings: StageTimings,
}

/// Outcome of an AO run on an arbitrary architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct AoRun {
    pub x: CVector,
    pub combiners: CombinerSet,
    pub aux: AuxWeightSet,
    /// Rate of the initial point followed by the rate after every iteration.
    pub rate_trace: Vec<f64>,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
}

impl AoRun {
    pub fn final_rate(&self) -> f64 {
        self.rate_trace.last().copied().unwrap_or(0.0)
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Largest relative rate/MSE identity gap seen over the run.
    pub fn max_identity_gap(&self) -> f64 {
        self.records.iter().fold(0.0, |a, r| a.max(r.identity_gap))
    }
}

/// State of a metasurface AO run.
#[derive(Debug, Clone, PartialEq)]
pub struct AoState {
    pub q: WeightVector,
    pub combiners: CombinerSet,
    pub aux: AuxWeightSet,
    pub rate_trace: Vec<f64>,
    pub iteration: usize,
    pub converged: bool,
    pub records: Vec<IterationRecord>,
}

impl AoState {
    pub fn final_rate(&self) -> f64 {
        self.rate_trace.last().copied().unwrap_or(0.0)
    }

    pub fn max_identity_gap(&self) -> f64 {
        self.records.iter().fold(0.0, |a, r| a.max(r.identity_gap))
    }
}

struct Linearization {
    frontends: Vec<CMatrix>,
    combiners: CombinerSet,
    aux: AuxWeightSet,
}

/// MMSE combiners and the matching `M_s = E_s^-1` for the front end `x`.
fn linearize(arch: &Architecture, x: &CVector, channels: &[CMatrix], budget: &LinkBudget) -> Result<Linearization> {
    let frontends = arch.frontends(x, channels.len());
    let (w, m): (Vec<_>, Vec<_>) = frontends
        .iter()
        .zip(channels)
        .map(|(f, g)| mmse_update(f, g, budget))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(Linearization {
        frontends,
        combiners: CombinerSet(w),
        aux: AuxWeightSet(m),
    })
}

fn best_rate(frontends: &[CMatrix], channels: &[CMatrix], budget: &LinkBudget) -> Result<f64> {
    frontends.iter().zip(channels).map(|(f, g)| frontend_rate(f, g, budget)).sum()
}

/// Rate of a given front end with its MMSE combiners.
pub fn optimal_combiner_rate(arch: &Architecture, x: &CVector, channels: &[CMatrix], budget: &LinkBudget) -> Result<f64> {
    arch.check(channels)?;
    best_rate(&arch.frontends(x, channels.len()), channels, budget)
}

/// Rate of a fixed design `(x, W)` on `channels`.
pub fn evaluate_design(arch: &Architecture, x: &CVector, combiners: &CombinerSet, channels: &[CMatrix], budget: &LinkBudget) -> Result<f64> {
    arch.check(channels)?;
    if combiners.0.len() != channels.len() {
        return Err(Error::DimensionMismatch {
            context: "evaluate_design",
            expected: format!("{} combiners", channels.len()),
            actual: combiners.0.len().to_string(),
        });
    }
    sum_rate_with_frontend(&arch.frontends(x, channels.len()), channels, combiners, budget)
}

/// The AO loop: `W` update, `E`, `M = E^-1`, weight update, repeated until
/// the rate changes by at most `ao_tol`.
///
/// The recorded rate is the rate with MMSE combiners for the current front
/// end, which cannot decrease; a drop beyond [`MONOTONIC_SLACK`] is reported
/// as an error.
pub fn optimize(
    arch: &Architecture,
    channels: &[CMatrix],
    solver: WeightSolver,
    budget: &LinkBudget,
    options: &SolverOptions,
    initial: CVector,
) -> Result<AoRun> {
    options.validate()?;
    arch.check(channels)?;
    if initial.len() != arch.num_variables() {
        return Err(Error::DimensionMismatch {
            context: "initial weights",
            expected: arch.num_variables().to_string(),
            actual: initial.len().to_string(),
        });
    }
    let mut x = initial;
    let mut lin = linearize(arch, &x, channels, budget)?;
    let mut rate = best_rate(&lin.frontends, channels, budget)?;
    let mut rate_trace = vec![rate];
    let mut records = Vec::new();
    let mut converged = false;
    for iteration in 1..=options.ao_max_iter {
        // The identity is checked on E from its definition, independently of
        // the whitened M used by the update.
        let mses = lin
            .frontends
            .iter()
            .zip(channels)
            .zip(&lin.combiners.0)
            .map(|((f, g), w)| mse_matrix(f, g, w, budget))
            .collect::<Result<Vec<_>>>()?;
        let identity = mse_rate(&mses, budget.power);
        let with_combiners = sum_rate_with_frontend(&lin.frontends, channels, &lin.combiners, budget)?;
        let identity_gap = (identity - with_combiners).abs() / with_combiners.abs().max(1.0);

        let t0 = Instant::now();
        let form = arch.build_quadratic(&lin.combiners, &lin.aux, channels, budget)?;
        let n = form.dim().max(1);
        let scale = (0..form.dim()).map(|i| form.s[(i, i)].re).sum::<f64>() / n as f64;
        let form = if scale > 0.0 && scale.is_finite() { form.scaled(scale) } else { form };
        let t1 = Instant::now();
        let sol = solver.solve(&form, &x, options)?;
        let t2 = Instant::now();
        x = sol.q;
        lin = linearize(arch, &x, channels, budget)?;
        let next = best_rate(&lin.frontends, channels, budget)?;
        let t3 = Instant::now();
        if !next.is_finite() {
            return Err(Error::NonFinite("sum rate"));
        }
        if next < rate - MONOTONIC_SLACK {
            return Err(Error::MonotonicityViolation {
                iteration,
                previous: rate,
                current: next,
                slack: MONOTONIC_SLACK,
            });
        }
        records.push(IterationRecord {
            iteration,
            rate: next,
            mse_rate: identity,
            identity_gap,
            inner_iterations: sol.iterations,
            inner_trace: sol.trace,
            kept_warm_start: sol.kept_warm_start,
            eigen_warning: sol.eigen.is_some_and(|e| e.warning()),
            timings: StageTimings {
                combiner: (t3 - t2).as_secs_f64(),
                quadratic: (t1 - t0).as_secs_f64(),
                solve: (t2 - t1).as_secs_f64(),
            },
        });
        rate_trace.push(next);
        let delta = (next - rate).abs();
        rate = next;
        if delta <= options.ao_tol {
            converged = true;
            break;
        }
    }
    Ok(AoRun {
        x,
        combiners: lin.combiners,
        aux: lin.aux,
        rate_trace,
        records,
        converged,
    })
}

/// Initial weights: random Lorentzian phases for LP, the box midpoint for AO,
/// all-on for BA and unit-magnitude random phases for UC.
pub fn initial_weights(set: FeasibleSet, n: usize, seed: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match set {
        FeasibleSet::Unconstrained => random_phases(&mut rng, n),
        FeasibleSet::AmplitudeOnly { min, max } => CVector::from_element(n, Complex::new(0.5 * (min + max), 0.0)),
        FeasibleSet::BinaryAmplitude { level } => CVector::from_element(n, Complex::new(level, 0.0)),
        FeasibleSet::Lorentzian => random_phases(&mut rng, n).map(|p| (J + p) * 0.5),
    }
}

pub(crate) fn random_phases<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| Complex::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
}

/// Runs the AO loop for a metasurface front end.
pub fn run_ao(
    channels: &[CMatrix],
    elements_per_strip: usize,
    waveguide: &[CVector],
    set: FeasibleSet,
    budget: &LinkBudget,
    options: &SolverOptions,
) -> Result<AoState> {
    set.validate()?;
    let arch = Architecture::Metasurface {
        elements_per_strip,
        waveguide: waveguide.to_vec(),
    };
    let initial = initial_weights(set, arch.num_variables(), options.seed);
    let run = optimize(&arch, channels, WeightSolver::from(set), budget, options, initial)?;
    let q = WeightVector::new(run.x, set)?;
    Ok(AoState {
        q,
        combiners: run.combiners,
        aux: run.aux,
        iteration: run.records.len(),
        rate_trace: run.rate_trace,
        converged: run.converged,
        records: run.records,
    })
}
