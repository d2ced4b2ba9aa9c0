//! Sum-rate maximization by alternating WMMSE and weight updates.

pub mod ao;
pub mod baselines;
pub mod objective;
pub mod quadratic;
pub mod solvers;

pub use ao::{evaluate_design, initial_weights, optimal_combiner_rate, optimize, run_ao, AoRun, AoState, IterationRecord};
pub use baselines::{fully_digital_rate, hybrid_ad_optimize, HybridDesign};
pub use objective::{
    dbm_to_watts, frontend_rate, mmse_update, mse_matrix, mse_rate, subcarrier_rate, sum_rate_with_frontend, update_m, update_w, AuxWeightSet,
    CombinerSet, LinkBudget,
};
pub use quadratic::{Architecture, QuadraticForm};
pub use solvers::{
    lp_phase_objective, max_eigenvalue, solve_ao_box, solve_ba_greedy, solve_lp_mm, solve_uc, solve_unit_modulus_mm,
    EigenBound, Solution, SolverOptions, WeightSolver,
};
