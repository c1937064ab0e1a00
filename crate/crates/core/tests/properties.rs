use hgeo::report::{to_json_pretty, Family, ProblemConfig, RunReport};
use hgeo::solvers::{
    enumerate_rays, variational_critical_points, CriticalKind, SolveConfig, SOUNDNESS_TOL,
};
use hgeo::{GeodesicProblem, LieAlgebra, RandersStructure, ReductiveDecomposition};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn small() -> SolveConfig {
    SolveConfig {
        seeds: 250,
        ..SolveConfig::default()
    }
}

fn drift() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-0.5..0.5f64)
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::So3), Just(Family::Sl2), Just(Family::Mixed)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_reported_ray_is_sound(
        fam in family(),
        params in prop::array::uniform3(0.2..5.0f64),
        v in drift(),
    ) {
        let cfg = ProblemConfig::family(fam, params, &v, small()).unwrap();
        let problem = cfg.problem().unwrap();
        let report = hgeo::report::run_solve(&cfg).unwrap();
        prop_assert!(report.audit.pass);
        for ray in &report.rays {
            let x = ray.direction();
            prop_assert!(problem.randers_residual(&x).unwrap().norm < SOUNDNESS_TOL);
            prop_assert!((problem.randers().norm(&x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_seeds_give_identical_rays(
        params in prop::array::uniform3(0.2..5.0f64),
        v in drift(),
        seed in 0u64..1000,
    ) {
        let cfg = SolveConfig { rng_seed: seed, ..small() };
        let p = ProblemConfig::family(Family::Sl2, params, &v, cfg.clone()).unwrap().problem().unwrap();
        let a = enumerate_rays(&p, &cfg).unwrap();
        let b = enumerate_rays(&p, &cfg).unwrap();
        prop_assert_eq!(a.rays, b.rays);
    }

    #[test]
    fn reports_round_trip_through_json(
        params in prop::array::uniform3(0.2..5.0f64),
        v in drift(),
    ) {
        let cfg = ProblemConfig::family(Family::So3, params, &v, small()).unwrap();
        let report = hgeo::report::run_solve(&cfg).unwrap();
        let text = to_json_pretty(&report).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, report);
    }
}

/// `so(3) ⊕ sl(2)` modulo the rotation generated by the third `so(3)` basis
/// vector: `m` is five-dimensional with Killing signature (2, 3, 0).
fn saddle_problem(params: [f64; 3], c: f64, block: [f64; 6], v: [f64; 3]) -> GeodesicProblem {
    let algebra = LieAlgebra::so3(1.0, 1.0, 1.0).direct_sum(&LieAlgebra::sl2(params[0], params[1], params[2]));
    let unit = |i: usize| {
        let mut e = DVector::zeros(6);
        e[i] = 1.0;
        e
    };
    let decomposition =
        ReductiveDecomposition::new(&algebra, &[unit(0), unit(1), unit(3), unit(4), unit(5)], &[unit(2)]).unwrap();
    // isotropy-invariant inner product: c I on the rotated plane, any SPD block on sl(2)
    let l = DMatrix::from_row_slice(3, 3, &[block[0], 0.0, 0.0, block[1], block[2], 0.0, block[3], block[4], block[5]]);
    let spd = &l * l.transpose() + DMatrix::identity(3, 3) * 0.5;
    let mut alpha = DMatrix::zeros(5, 5);
    alpha[(0, 0)] = c;
    alpha[(1, 1)] = c;
    alpha.view_mut((2, 2), (3, 3)).copy_from(&spd);
    let mut drift = DVector::from_column_slice(&[0.0, 0.0, v[0], v[1], v[2]]);
    let len = drift.dot(&(&alpha * &drift)).sqrt();
    if len > 0.8 {
        drift *= 0.8 / len;
    }
    GeodesicProblem::new(algebra, decomposition, RandersStructure::new(alpha, drift).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn five_dimensional_saddle_regime(
        params in prop::array::uniform3(0.5..3.0f64),
        c in 0.5..2.0f64,
        block in prop::array::uniform6(-1.0..1.0f64),
        v in prop::array::uniform3(-0.6..0.6f64),
    ) {
        let problem = saddle_problem(params, c, block, v);
        let sig = problem.killing().signature();
        prop_assert!(sig.p > 1 && sig.q > 1);
        let cfg = SolveConfig { seeds: 300, ..SolveConfig::default() };
        let found = variational_critical_points(&problem, &cfg).unwrap();
        prop_assert!(!found.points.is_empty());
        let k = problem.killing().matrix();
        for point in &found.points {
            let y = point.ray.direction();
            let lambda = point.ray.lambda;
            prop_assert!(problem.residual_m(&y).unwrap().norm < SOUNDNESS_TOL);
            let phi = problem.randers().legendre(&y).unwrap();
            let gap = (k * &y - phi * lambda).amax();
            prop_assert!(gap < 1e-8 * (1.0 + lambda.abs()), "multiplier residual {}", gap);
        }
        // the largest and smallest values of K/F² are always critical
        prop_assert!(found.points.iter().any(|p| p.kind == CriticalKind::Maximum));
        prop_assert!(found.points.iter().any(|p| p.kind == CriticalKind::Minimum));
    }
}
