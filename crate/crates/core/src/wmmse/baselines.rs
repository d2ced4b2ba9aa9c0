//! Reference architectures: the fully-digital receiver and the hybrid
//! analog/digital combiner with a unit-modulus analog stage.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

use super::ao::{optimize, random_phases, AoRun};
use super::objective::{CombinerSet, LinkBudget};
use super::quadratic::Architecture;
use super::solvers::{SolverOptions, WeightSolver};

pub use super::objective::fully_digital_rate;

/// Result of [`hybrid_ad_optimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct HybridDesign {
    /// Analog combiner `W_RF` (`N x num_rf`).
    pub analog: CMatrix,
    /// Digital combiners `W_BB,s` (`num_rf x U`).
    pub digital: CombinerSet,
    pub rate: f64,
    pub run: AoRun,
}

/// Hybrid combiner design on a conventional array: the same AO loop with a
/// dense `num_rf x N` analog stage `W_RF^H`. With `relaxed` the unit-modulus
/// constraint is dropped.
pub fn hybrid_ad_optimize(
    channels: &[CMatrix],
    num_rf: usize,
    budget: &LinkBudget,
    options: &SolverOptions,
    relaxed: bool,
) -> Result<HybridDesign> {
    let num_antennas = channels.first().map_or(0, |g| g.nrows());
    if num_rf == 0 || num_antennas == 0 {
        return Err(Error::InvalidParameter(format!(
            "hybrid design needs RF chains and antennas (got {num_rf} and {num_antennas})"
        )));
    }
    let arch = Architecture::FullAnalog { num_rf, num_antennas };
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let initial = random_phases(&mut rng, num_rf * num_antennas);
    let solver = if relaxed {
        WeightSolver::Unconstrained
    } else {
        WeightSolver::UnitModulus
    };
    let run = optimize(&arch, channels, solver, budget, options, initial)?;
    let analog = arch.frontend(&run.x, 0).adjoint();
    Ok(HybridDesign {
        analog,
        digital: run.combiners.clone(),
        rate: run.final_rate(),
        run,
    })
}

/// `W_RF^H` flattened the way [`Architecture::FullAnalog`] stores it.
pub fn flatten_analog(analog: &CMatrix) -> CVector {
    let (n, m) = analog.shape();
    CVector::from_fn(n * m, |i, _| analog[(i % n, i / n)].conj())
}
