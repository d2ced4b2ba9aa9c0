use holoxl::coupling::{coupling_matrix, CouplingConfig};
use holoxl::frontend::{lorentzian_map, project_to_set, FeasibleSet, PhaseVector};
use holoxl::geometry::Point;
use holoxl::linalg::{CMatrix, CVector, C64};
use holoxl::special::sine_integral;
use holoxl::wmmse::{
    frontend_rate, initial_weights, optimize, solve_ao_box, solve_ba_greedy, solve_lp_mm, solve_uc, Architecture,
    LinkBudget, QuadraticForm, SolverOptions, WeightSolver,
};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix(r: usize, c: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(complex(), r * c).prop_map(move |v| CMatrix::from_vec(r, c, v))
}

fn vector(n: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec(complex(), n).prop_map(CVector::from_vec)
}

fn form(n: usize) -> impl Strategy<Value = QuadraticForm> {
    (matrix(n, n), vector(n)).prop_map(move |(x, c)| {
        let s = &x * x.adjoint() + CMatrix::identity(n, n).scale(1e-3);
        QuadraticForm::new(s, c).unwrap()
    })
}

fn set() -> impl Strategy<Value = FeasibleSet> {
    prop_oneof![
        Just(FeasibleSet::Unconstrained),
        Just(FeasibleSet::AO_DEFAULT),
        Just(FeasibleSet::BA_DEFAULT),
        Just(FeasibleSet::Lorentzian),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_lands_in_the_set(raw in vector(8), set in set()) {
        let q = project_to_set(&raw, set).unwrap();
        prop_assert!(q.values().iter().all(|&v| set.contains(v)));
    }

    #[test]
    fn lorentzian_weights_lie_on_the_circle(angles in prop::collection::vec(-10.0..10.0f64, 1..12)) {
        let q = lorentzian_map(&PhaseVector::from_angles(&angles));
        for v in q.values().iter() {
            prop_assert!(((v - C64::new(0.0, 0.5)).norm() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_integral_is_odd(x in 0.0..80.0f64) {
        prop_assert_eq!(sine_integral(-x), -sine_integral(x));
    }

    #[test]
    fn coupling_matrix_is_symmetric(offsets in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 2..6)) {
        let lambda = 0.01;
        // Grid cells keep every pair at least λ/5 apart.
        let positions: Vec<Point> = offsets
            .iter()
            .enumerate()
            .map(|(i, (dx, dy))| Point::new(0.4 * lambda * i as f64 + 0.1 * lambda * dx, 0.1 * lambda * dy, 0.0))
            .collect();
        let c = coupling_matrix(&CouplingConfig::metamaterial(positions, lambda)).unwrap();
        prop_assert!((&c - c.transpose()).norm() < 1e-10 * c.norm());
    }

    #[test]
    fn rate_ignores_invertible_row_mixing(f in matrix(3, 6), g in matrix(6, 2), t in matrix(3, 3)) {
        let t = t + CMatrix::identity(3, 3).scale(3.0);
        let budget = LinkBudget::new(1.0, 0.1, 1.0).unwrap();
        let a = frontend_rate(&f, &g, &budget).unwrap();
        let b = frontend_rate(&(t * &f), &g, &budget).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1.0));
    }

    #[test]
    fn uc_minimizes_the_quadratic(form in form(6), probe in vector(6)) {
        let sol = solve_uc(&form, &CVector::zeros(6), &SolverOptions::default()).unwrap();
        prop_assert!(sol.objective <= form.objective(&probe) + 1e-9);
    }

    #[test]
    fn constrained_solvers_stay_feasible_and_never_lose(form in form(7), warm in vector(7)) {
        let options = SolverOptions::default();
        let lp_warm = project_to_set(&warm, FeasibleSet::Lorentzian).unwrap().into_values();
        let lp = solve_lp_mm(&form, &lp_warm, &options).unwrap();
        prop_assert!(lp.q.iter().all(|&v| FeasibleSet::Lorentzian.contains(v)));
        prop_assert!(lp.objective <= form.objective(&lp_warm) + 1e-12);
        prop_assert!(lp.trace.windows(2).all(|w| w[1] <= w[0] + 1e-10));

        let ao = FeasibleSet::AmplitudeOnly { min: 0.1, max: 2.0 };
        let ao_warm = project_to_set(&warm, ao).unwrap().into_values();
        let boxed = solve_ao_box(&form, 0.1, 2.0, &ao_warm, &options).unwrap();
        prop_assert!(boxed.q.iter().all(|&v| ao.contains(v)));
        prop_assert!(boxed.objective <= form.objective(&ao_warm) + 1e-12);

        let ba = FeasibleSet::BinaryAmplitude { level: 0.7 };
        let ba_warm = project_to_set(&warm, ba).unwrap().into_values();
        let binary = solve_ba_greedy(&form, 0.7, &ba_warm, &options).unwrap();
        prop_assert!(binary.q.iter().all(|&v| ba.contains(v)));
        prop_assert!(binary.objective <= form.objective(&ba_warm) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // UC contains every other set, so UC started from a constrained optimum
    // can only match or improve it.
    #[test]
    fn unconstrained_contains_constrained(
        g0 in matrix(6, 2),
        g1 in matrix(6, 2),
        h in vector(6),
        set in prop_oneof![Just(FeasibleSet::AO_DEFAULT), Just(FeasibleSet::Lorentzian)],
        seed in 0u64..1000,
    ) {
        let channels = vec![g0, g1];
        let waveguide = vec![h.map(|v| v + 1.5), h.map(|v| v.conj() + 1.5)];
        let arch = Architecture::Metasurface { elements_per_strip: 3, waveguide };
        let budget = LinkBudget::new(1.0, 0.05, 1.0).unwrap();
        let options = SolverOptions { ao_max_iter: 20, seed, ..Default::default() };
        let constrained = optimize(&arch, &channels, set.into(), &budget, &options, initial_weights(set, 6, seed)).unwrap();
        let uc = optimize(&arch, &channels, WeightSolver::Unconstrained, &budget, &options, constrained.x.clone()).unwrap();
        prop_assert!(uc.final_rate() >= constrained.final_rate() - 1e-6);
        prop_assert!(constrained.rate_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }
}
