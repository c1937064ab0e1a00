//! Critical points of `f(z) = K(z,z) / F²(z)` on the indicatrix.
//!
//! At a critical point `y` with `F(y) = 1` and `λ = K(y, y)` one has
//! `K(y, w) = λ g_y(y, w)` for every `w`, and since `K(y, [y, u]_m) = 0` this
//! makes `y` a geodesic vector whenever `λ ≠ 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::newton::{gauss_newton, NewtonOutcome};
use super::seeds::seed_directions;
use super::{alpha_sqrt, k_sign, sort_rays, GeodesicRay, RayKind, SolveConfig, SOUNDNESS_TOL};
use crate::criterion::GeodesicProblem;
use crate::error::{Error, Result};
use crate::lie::{column_span, orthogonal_complement};
use crate::minkowski::IndicatrixPoint;

const ASCENT_STEPS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Maximum,
    Minimum,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub ray: GeodesicRay,
    pub kind: CriticalKind,
    /// `max_w |K(y, w) - λ g_y(y, w)|` over the basis of `m`.
    pub multiplier_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalResult {
    pub points: Vec<CriticalPoint>,
    /// `f` is constant on the indicatrix, so every direction is critical.
    pub plateau: bool,
    /// Converged critical points dropped by the geodesic residual check.
    pub rejected: usize,
}

struct RatioFunction<'a> {
    problem: &'a GeodesicProblem,
}

impl RatioFunction<'_> {
    fn value(&self, z: &DVector<f64>) -> f64 {
        let f = self.problem.randers().norm(z);
        self.problem.killing().value(z) / (f * f)
    }

    /// Euclidean gradient of `f`.
    fn gradient(&self, z: &DVector<f64>) -> Option<DVector<f64>> {
        let r = self.problem.randers();
        let phi = r.legendre(z).ok()?;
        let f2 = r.norm(z).powi(2);
        let kz = self.problem.killing().matrix() * z;
        let q = z.dot(&kz);
        Some(kz * (2.0 / f2) - phi * (2.0 * q / (f2 * f2)))
    }

    fn normalize(&self, z: DVector<f64>) -> Option<DVector<f64>> {
        let f = self.problem.randers().norm(&z);
        (f > 1e-150 && f.is_finite()).then(|| z / f)
    }

    /// `G(z) = K z - f(z) ∇(½F²)(z)` with `F(z) - 1` appended.
    fn system(&self, z: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let r = self.problem.randers();
        let k = self.problem.killing().matrix();
        let phi = r.legendre(z).ok()?;
        let hphi = r.hessian_half_sq(z).ok()?;
        let grad_f = self.gradient(z)?;
        let fz = self.value(z);
        let m = z.len();
        let mut res = DVector::zeros(m + 1);
        res.rows_mut(0, m).copy_from(&(k * z - &phi * fz));
        res[m] = r.norm(z) - 1.0;
        let mut jac = DMatrix::zeros(m + 1, m);
        jac.rows_mut(0, m)
            .copy_from(&(k - &phi * grad_f.transpose() - hphi * fz));
        jac.set_row(m, &r.gradient(z).ok()?.transpose());
        Some((res, jac))
    }

    /// Projected gradient ascent (`sign > 0`) or descent on the indicatrix.
    fn climb(&self, mut z: DVector<f64>, sign: f64) -> DVector<f64> {
        let mut step = 0.25;
        let mut fz = self.value(&z);
        for _ in 0..ASCENT_STEPS {
            let (Some(g), Ok(n)) = (self.gradient(&z), self.problem.randers().gradient(&z)) else {
                break;
            };
            let n = &n / n.norm();
            let t = &g - &n * g.dot(&n);
            if t.norm() < 1e-8 {
                break;
            }
            let mut moved = false;
            for _ in 0..20 {
                if let Some(trial) = self.normalize(&z + &t * (sign * step / t.norm())) {
                    let ft = self.value(&trial);
                    if sign * (ft - fz) > 0.0 {
                        z = trial;
                        fz = ft;
                        moved = true;
                        step *= 1.5;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        z
    }

    fn polish(&self, z: DVector<f64>, cfg: &SolveConfig, tol: f64) -> NewtonOutcome {
        gauss_newton(|u| self.system(u), |u| self.normalize(u), z, cfg.max_iter, tol)
    }

    /// Second-order type of a critical point from the Hessian of
    /// `K(z,z) - λ F²(z)` restricted to the tangent space of the indicatrix.
    fn classify(&self, z: &DVector<f64>, lambda: f64) -> CriticalKind {
        let r = self.problem.randers();
        let (Ok(hphi), Ok(n)) = (r.hessian_half_sq(z), r.gradient(z)) else {
            return CriticalKind::Degenerate;
        };
        let h = self.problem.killing().matrix() * 2.0 - hphi * (2.0 * lambda);
        // f is invariant under the isotropy, so orbit directions are always null
        let mut normal = vec![n];
        let y = self.problem.embed_m(z);
        let iso = self.problem.decomposition().h_basis();
        for j in 0..iso.ncols() {
            let b = self.problem.algebra().bracket_unchecked(&iso.column(j).into_owned(), &y);
            normal.push(self.problem.m_coords(&b));
        }
        let basis = orthogonal_complement(z.len(), &column_span(z.len(), &normal));
        if basis.is_empty() {
            return CriticalKind::Degenerate;
        }
        let t = DMatrix::from_columns(&basis);
        let projected = t.transpose() * &h * &t;
        let eig = SymmetricEigen::new(projected).eigenvalues;
        let tol = 1e-7 * h.norm().max(1.0);
        if eig.iter().any(|e| e.abs() <= tol) {
            CriticalKind::Degenerate
        } else if eig.iter().all(|e| *e < 0.0) {
            CriticalKind::Maximum
        } else if eig.iter().all(|e| *e > 0.0) {
            CriticalKind::Minimum
        } else {
            CriticalKind::Saddle
        }
    }
}

/// Multistart search for critical points of `K(z,z)/F²(z)` on `I_F`.
///
/// Seeds in `{K > 0}` climb towards maxima, seeds in `{K < 0}` descend
/// towards minima, and every seed is additionally polished directly so that
/// saddles are reached too. Returned points have `|λ|` above the null-cone
/// tolerance and pass the geodesic residual check.
pub fn variational_critical_points(
    problem: &GeodesicProblem,
    cfg: &SolveConfig,
) -> Result<VariationalResult> {
    cfg.validate()?;
    let killing = problem.killing();
    if killing.signature().is_flat() {
        return Err(Error::WrongCase(
            "the Killing form vanishes on m; use case1_support_points".into(),
        ));
    }
    let ratio = RatioFunction { problem };
    let seeds: Vec<DVector<f64>> = seed_directions(cfg.seeds, problem.dim_m(), cfg.rng_seed ^ 0x5eed)
        .into_iter()
        .filter_map(|d| ratio.normalize(d))
        .collect();

    let values: Vec<f64> = seeds.iter().map(|z| ratio.value(z)).collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let spread_tol = 1e-9 * lo.abs().max(hi.abs()).max(1.0);
    if hi - lo <= spread_tol {
        return Ok(VariationalResult {
            points: Vec::new(),
            plateau: true,
            rejected: 0,
        });
    }

    let null_tol = killing.null_tol();
    let tol = cfg.newton_tol * killing.norm().max(1.0) * problem.randers().alpha().norm().max(1.0);
    let outcomes: Vec<NewtonOutcome> = seeds
        .par_iter()
        .zip(values.par_iter())
        .flat_map_iter(|(z, fz)| {
            let mut runs = vec![ratio.polish(z.clone(), cfg, tol)];
            if fz.abs() > null_tol {
                let climbed = ratio.climb(z.clone(), fz.signum());
                runs.push(ratio.polish(climbed, cfg, tol));
            }
            runs
        })
        .collect();

    let to_euclid = alpha_sqrt(problem);
    let max_chord = 2.0 * (0.5 * cfg.dedup_angle).sin();
    let mut reps: Vec<DVector<f64>> = Vec::new();
    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut rejected = 0;
    for out in outcomes.into_iter().filter(|o| o.converged) {
        let z = out.x;
        let rep = &to_euclid * &z;
        let rep = &rep / rep.norm();
        if reps.iter().any(|r| (r - &rep).norm() <= max_chord) {
            continue;
        }
        reps.push(rep);
        let point = IndicatrixPoint::project(&z, problem.randers(), killing)?;
        let z = point.vector();
        let lambda = point.killing_value;
        if lambda.abs() <= null_tol {
            continue;
        }
        let residual_norm = problem.residual_m(&z)?.norm;
        if residual_norm >= SOUNDNESS_TOL {
            rejected += 1;
            continue;
        }
        let phi = problem.randers().legendre(&z)?;
        let multiplier_residual = (killing.matrix() * &z - phi * lambda).amax();
        let kind = ratio.classify(&z, lambda);
        points.push(CriticalPoint {
            ray: GeodesicRay {
                y: point,
                residual_norm,
                lambda,
                kind: RayKind::Isolated,
                k_sign: k_sign(problem, lambda),
                h_part: problem
                    .has_isotropy()
                    .then(|| vec![0.0; problem.decomposition().dim_h()]),
            },
            kind,
            multiplier_residual,
        });
    }
    let mut rays: Vec<GeodesicRay> = points.iter().map(|p| p.ray.clone()).collect();
    sort_rays(&mut rays);
    let mut sorted = Vec::with_capacity(points.len());
    for r in rays {
        let idx = points.iter().position(|p| p.ray == r).expect("ray taken from points");
        sorted.push(points.swap_remove(idx));
    }
    Ok(VariationalResult {
        points: sorted,
        plateau: false,
        rejected,
    })
}
