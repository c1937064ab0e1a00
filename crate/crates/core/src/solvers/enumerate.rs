use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::newton::{gauss_newton, numerical_kernel, NewtonOutcome};
use super::seeds::seed_directions;
use super::{
    alpha_sqrt, sort_rays, theorem_audit, GeodesicRay, KillingSummary, RayKind, SolveConfig, SolveReport,
    SolveStats, SOUNDNESS_TOL,
};
use crate::criterion::GeodesicProblem;
use crate::error::{Error, Result};

/// Singular values below this fraction of the largest count as kernel.
const RANK_TOL: f64 = 1e-7;

/// Residual system on the α-unit sphere of `m` augmented by `α(x_m, x_m) - 1`.
/// Unknowns are `m`-coordinates when `h = 0` and `g`-coordinates otherwise.
pub(crate) struct RaySystem<'a> {
    problem: &'a GeodesicProblem,
}

impl<'a> RaySystem<'a> {
    pub(crate) fn new(problem: &'a GeodesicProblem) -> Self {
        Self { problem }
    }

    fn unknowns(&self) -> usize {
        if self.problem.has_isotropy() {
            self.problem.dim_g()
        } else {
            self.problem.dim_m()
        }
    }

    fn m_part(&self, u: &DVector<f64>) -> DVector<f64> {
        if self.problem.has_isotropy() {
            self.problem.m_coords(u)
        } else {
            u.clone()
        }
    }

    pub(crate) fn eval(&self, u: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let p = self.problem;
        let (r, jac) = if p.has_isotropy() {
            p.general_residual_jacobian(u).ok()?
        } else {
            p.randers_residual_jacobian(u).ok()?
        };
        let x = self.m_part(u);
        let alpha = p.randers().alpha();
        let ax = alpha * &x;
        let grad = if p.has_isotropy() {
            p.decomposition().m_coord_map().tr_mul(&ax) * 2.0
        } else {
            &ax * 2.0
        };
        let rows = r.len();
        let mut full_r = DVector::zeros(rows + 1);
        full_r.rows_mut(0, rows).copy_from(&r);
        full_r[rows] = x.dot(&ax) - 1.0;
        let mut full_j = DMatrix::zeros(rows + 1, jac.ncols());
        full_j.rows_mut(0, rows).copy_from(&jac);
        full_j.set_row(rows, &grad.transpose());
        Some((full_r, full_j))
    }

    pub(crate) fn normalize(&self, u: DVector<f64>) -> Option<DVector<f64>> {
        let s = self.problem.randers().alpha_norm(&self.m_part(&u));
        (s > 1e-150 && s.is_finite()).then(|| u / s)
    }

    fn solve(&self, seed: DVector<f64>, cfg: &SolveConfig) -> NewtonOutcome {
        let tol = cfg.newton_tol * self.problem.scale();
        gauss_newton(
            |u| self.eval(u),
            |u| self.normalize(u),
            seed,
            cfg.max_iter,
            tol,
        )
    }

    /// The solution set is not locally a single ray: some kernel direction of
    /// the augmented Jacobian moves the `m`-part.
    fn is_degenerate(&self, u: &DVector<f64>) -> bool {
        let Some((_, jac)) = self.eval(u) else {
            return false;
        };
        numerical_kernel(&jac, RANK_TOL)
            .iter()
            .any(|t| self.m_part(t).norm() > 1e-6)
    }

    fn seed(&self, direction: &DVector<f64>) -> DVector<f64> {
        if self.problem.has_isotropy() {
            self.problem.embed_m(direction)
        } else {
            direction.clone()
        }
    }
}

/// Whether the ray through `x` (`m`-coordinates, trivial isotropy) lies on a
/// rank-deficient part of the solution set.
pub(crate) fn degenerate_at(problem: &GeodesicProblem, x: &DVector<f64>) -> bool {
    let system = RaySystem::new(problem);
    system
        .normalize(system.seed(x))
        .is_some_and(|u| system.is_degenerate(&u))
}

struct Candidate {
    ray: GeodesicRay,
    degenerate: bool,
}

/// Finds all geodesic rays by multistart Gauss-Newton on the α-unit sphere,
/// deduplicates them by angle (keeping `x` and `-x` distinct), and flags a
/// continuum when many seeds land on distinct rank-deficient solutions.
pub fn enumerate_rays(problem: &GeodesicProblem, cfg: &SolveConfig) -> Result<SolveReport> {
    cfg.validate()?;
    if problem.dim_m() < 2 {
        return Err(Error::Unsupported("enumeration needs dim m >= 2".into()));
    }
    let started = Instant::now();
    let system = RaySystem::new(problem);
    let directions = seed_directions(cfg.seeds, problem.dim_m(), cfg.rng_seed);
    debug_assert_eq!(system.unknowns(), system.seed(&directions[0]).len());

    let outcomes: Vec<NewtonOutcome> = directions
        .par_iter()
        .map(|d| system.solve(system.seed(d), cfg))
        .collect();

    let mut stats = SolveStats {
        seeds: outcomes.len(),
        ..SolveStats::default()
    };
    let mut iterations = 0usize;
    let mut candidates: Vec<Candidate> = Vec::new();
    // α-unit representatives of accepted rays, for dedup
    let mut reps: Vec<DVector<f64>> = Vec::new();
    let to_euclid = alpha_sqrt(problem);

    for out in &outcomes {
        iterations += out.iterations;
        stats.max_iterations = stats.max_iterations.max(out.iterations);
        if !out.converged {
            continue;
        }
        stats.converged += 1;
        let x = system.m_part(&out.x);
        let z = &to_euclid * (&x / problem.randers().alpha_norm(&x));
        let duplicate = reps.iter().any(|r| {
            let chord = (r - &z).norm();
            2.0 * (0.5 * chord).min(1.0).asin() <= cfg.dedup_angle
        });
        if duplicate {
            continue;
        }
        let ray = match GeodesicRay::from_vector(problem, &out.x, RayKind::Isolated) {
            Ok(r) if r.residual_norm < SOUNDNESS_TOL => r,
            _ => {
                stats.rejected += 1;
                continue;
            }
        };
        reps.push(z);
        candidates.push(Candidate {
            degenerate: system.is_degenerate(&out.x),
            ray,
        });
    }
    stats.mean_iterations = iterations as f64 / stats.seeds.max(1) as f64;

    if candidates.is_empty() {
        return Err(Error::SolverFailure(format!(
            "none of {} seeds converged to a geodesic ray",
            stats.seeds
        )));
    }

    stats.distinct = candidates.len();
    stats.degenerate_distinct = candidates.iter().filter(|c| c.degenerate).count();
    let threshold = (cfg.continuum_fraction * stats.seeds as f64).ceil() as usize;
    let continuum_detected = stats.degenerate_distinct >= threshold.max(2);

    let mut rays: Vec<GeodesicRay> = candidates
        .into_iter()
        .map(|c| {
            let mut ray = c.ray;
            if continuum_detected && c.degenerate {
                ray.kind = RayKind::ContinuumMember;
            }
            ray
        })
        .collect();
    sort_rays(&mut rays);
    stats.elapsed_seconds = started.elapsed().as_secs_f64();

    let mut report = SolveReport {
        rays,
        continuum_detected,
        killing: KillingSummary::of(problem),
        audit: super::AuditVerdict {
            count: super::RayCount::Finite(0),
            signature: problem.killing().signature(),
            required_minimum: 2,
            pass: false,
        },
        stats,
    };
    report.audit = theorem_audit(problem, &report);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{LieAlgebra, ReductiveDecomposition};
    use crate::minkowski::RandersStructure;
    use crate::solvers::{ray_angle, KSign, RayCount};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn half_drift(algebra: LieAlgebra) -> GeodesicProblem {
        GeodesicProblem::on_group(
            algebra,
            RandersStructure::with_identity(v(&[0.5, 0.0, 0.0])).unwrap(),
        )
        .unwrap()
    }

    fn small_cfg() -> SolveConfig {
        SolveConfig {
            seeds: 400,
            ..SolveConfig::default()
        }
    }

    fn assert_matches(problem: &GeodesicProblem, report: &SolveReport, expected: &[DVector<f64>]) {
        assert_eq!(report.rays.len(), expected.len(), "{:#?}", report.rays);
        for e in expected {
            let best = report
                .rays
                .iter()
                .map(|r| ray_angle(problem, &r.direction(), e))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "missing ray {e}");
        }
    }

    #[test]
    fn so3_four_rays() {
        let p = half_drift(LieAlgebra::so3(1.0, 2.0, 1.0));
        let report = enumerate_rays(&p, &small_cfg()).unwrap();
        let h = 3f64.sqrt() / 2.0;
        assert_matches(
            &p,
            &report,
            &[v(&[1.0, 0.0, 0.0]), v(&[-1.0, 0.0, 0.0]), v(&[0.5, h, 0.0]), v(&[0.5, -h, 0.0])],
        );
        assert!(!report.continuum_detected);
        assert!(report.rays.iter().all(|r| r.k_sign == KSign::Negative));
        assert!(report.audit.pass);
    }

    #[test]
    fn so3_two_rays() {
        let p = half_drift(LieAlgebra::so3(2.0, 2.0, 3.0));
        let report = enumerate_rays(&p, &small_cfg()).unwrap();
        assert_matches(&p, &report, &[v(&[1.0, 0.0, 0.0]), v(&[-1.0, 0.0, 0.0])]);
        assert_eq!(report.audit.count, RayCount::Finite(2));
        assert_eq!(report.audit.required_minimum, 2);
    }

    #[test]
    fn sl2_four_rays() {
        let p = half_drift(LieAlgebra::sl2(1.0, 1.0, 1.0));
        let report = enumerate_rays(&p, &small_cfg()).unwrap();
        let h = 15f64.sqrt() / 4.0;
        assert_matches(
            &p,
            &report,
            &[v(&[1.0, 0.0, 0.0]), v(&[-1.0, 0.0, 0.0]), v(&[-0.25, h, 0.0]), v(&[-0.25, -h, 0.0])],
        );
        for r in &report.rays {
            assert!((p.randers().norm(&r.direction()) - 1.0).abs() < 1e-12);
        }
        assert_eq!(report.audit.required_minimum, 4);
        assert!(report.audit.pass);
    }

    #[test]
    fn bi_invariant_continuum() {
        let p = GeodesicProblem::on_group(LieAlgebra::so3(1.0, 1.0, 1.0), RandersStructure::euclidean(3))
            .unwrap();
        let report = enumerate_rays(&p, &small_cfg()).unwrap();
        assert!(report.continuum_detected);
        assert_eq!(report.audit.count, RayCount::Infinite);
        assert!(report.rays.iter().all(|r| r.kind == RayKind::ContinuumMember));
    }

    #[test]
    fn heisenberg_cone_is_a_continuum() {
        let p = GeodesicProblem::on_group(
            LieAlgebra::heisenberg(),
            RandersStructure::with_identity(v(&[0.1, -0.2, 0.3])).unwrap(),
        )
        .unwrap();
        let report = enumerate_rays(&p, &small_cfg()).unwrap();
        assert!(report.continuum_detected);
        // ±E3 are isolated solutions off the cone x3 = -|x| v3
        let isolated: Vec<_> = report.rays.iter().filter(|r| r.kind == RayKind::Isolated).collect();
        assert_eq!(isolated.len(), 2);
    }

    #[test]
    fn deterministic_for_equal_seed() {
        let p = half_drift(LieAlgebra::sl2(0.7, 2.1, 1.3));
        let a = enumerate_rays(&p, &small_cfg()).unwrap();
        let b = enumerate_rays(&p, &small_cfg()).unwrap();
        assert_eq!(a.rays, b.rays);
    }

    #[test]
    fn round_sphere_with_isotropy() {
        let g = LieAlgebra::so3(1.0, 1.0, 1.0);
        let d = ReductiveDecomposition::from_isotropy(&g, &[v(&[0.0, 0.0, 1.0])]).unwrap();
        let p = GeodesicProblem::new(g, d, RandersStructure::euclidean(2)).unwrap();
        let report = enumerate_rays(&p, &small_cfg()).unwrap();
        assert!(report.continuum_detected);
        for r in &report.rays {
            let y = p.embed_m(&r.direction())
                + p.decomposition().h_basis() * DVector::from_column_slice(r.h_part.as_ref().unwrap());
            assert!(p.general_residual(&y).unwrap().norm < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let p = half_drift(LieAlgebra::so3(1.0, 2.0, 1.0));
        let cfg = SolveConfig {
            continuum_fraction: 1.5,
            ..SolveConfig::default()
        };
        assert!(matches!(enumerate_rays(&p, &cfg), Err(Error::InvalidSolveConfig(_))));
    }
}
