//! Finding geodesic rays: multistart root finding on the indicatrix, the
//! variational search for critical points of `K(z,z)/F²(z)`, the flat-Killing
//! support-point construction, and the lower-bound audit.

mod audit;
mod case1;
mod enumerate;
mod newton;
pub mod seeds;
mod variational;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::criterion::GeodesicProblem;
use crate::error::{Error, Result};
use crate::lie::Signature;
use crate::minkowski::IndicatrixPoint;

pub use audit::{theorem_audit, AuditVerdict, RayCount};
pub use case1::{case1_support_points, default_hyperplane, derived_in_m, SupportPoints};
pub use enumerate::enumerate_rays;
pub(crate) use enumerate::degenerate_at;
pub use variational::{variational_critical_points, CriticalKind, CriticalPoint, VariationalResult};

/// Every reported ray must re-evaluate below this residual.
pub const SOUNDNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Number of multistart directions.
    pub seeds: usize,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Rays closer than this angle (radians, on the α-unit sphere) are merged.
    pub dedup_angle: f64,
    /// Fraction of seeds that must land on distinct degenerate rays before a
    /// continuum is reported.
    pub continuum_fraction: f64,
    pub rng_seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            seeds: 2000,
            newton_tol: 1e-12,
            max_iter: 60,
            dedup_angle: 1e-6,
            continuum_fraction: 0.05,
            rng_seed: 42,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidSolveConfig(what.to_string()));
        if self.seeds == 0 {
            return bad("seeds must be positive");
        }
        if !(self.newton_tol > 0.0) {
            return bad("newton_tol must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        if !(self.dedup_angle > 0.0) {
            return bad("dedup_angle must be positive");
        }
        if !(self.continuum_fraction > 0.0 && self.continuum_fraction < 1.0) {
            return bad("continuum_fraction must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayKind {
    Isolated,
    ContinuumMember,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KSign {
    Positive,
    Negative,
    Null,
}

/// A geodesic direction normalized to `F(y) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicRay {
    pub y: IndicatrixPoint,
    pub residual_norm: f64,
    /// `K(y, y)`, which is the multiplier in `K(y, ·) = λ g_y(y, ·)` when `F(y) = 1`.
    pub lambda: f64,
    pub kind: RayKind,
    pub k_sign: KSign,
    /// `h`-part of the geodesic vector, present only for nontrivial isotropy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_part: Option<Vec<f64>>,
}

impl GeodesicRay {
    /// Builds a ray from a geodesic vector given in `g`-coordinates.
    pub(crate) fn from_vector(
        problem: &GeodesicProblem,
        y: &DVector<f64>,
        kind: RayKind,
    ) -> Result<Self> {
        let x = problem.m_coords(y);
        let f = problem.randers().norm(&x);
        if !(f > 0.0) {
            return Err(Error::ZeroVector);
        }
        let y = y / f;
        let point = IndicatrixPoint::project(&x, problem.randers(), problem.killing())?;
        let residual_norm = if problem.has_isotropy() {
            problem.general_residual(&y)?.norm
        } else {
            problem.randers_residual(&point.vector())?.norm
        };
        let lambda = point.killing_value;
        let h_part = problem
            .has_isotropy()
            .then(|| problem.decomposition().h_coords(&y).iter().copied().collect());
        Ok(Self {
            k_sign: k_sign(problem, lambda),
            y: point,
            residual_norm,
            lambda,
            kind,
            h_part,
        })
    }

    pub fn direction(&self) -> DVector<f64> {
        self.y.vector()
    }
}

pub(crate) fn k_sign(problem: &GeodesicProblem, lambda: f64) -> KSign {
    let tol = problem.killing().null_tol();
    if lambda > tol {
        KSign::Positive
    } else if lambda < -tol {
        KSign::Negative
    } else {
        KSign::Null
    }
}

/// Compact description of the restricted Killing form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingSummary {
    pub matrix: Vec<Vec<f64>>,
    pub signature: Signature,
    pub radical_dim: usize,
}

impl KillingSummary {
    pub fn of(problem: &GeodesicProblem) -> Self {
        let k = problem.killing();
        Self {
            matrix: k
                .matrix()
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            signature: k.signature(),
            radical_dim: k.radical_basis().len(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub seeds: usize,
    pub converged: usize,
    /// Converged seeds whose re-evaluated residual failed the soundness check.
    pub rejected: usize,
    pub distinct: usize,
    pub degenerate_distinct: usize,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub rays: Vec<GeodesicRay>,
    pub continuum_detected: bool,
    pub killing: KillingSummary,
    pub audit: AuditVerdict,
    pub stats: SolveStats,
}

impl SolveReport {
    /// Adds rays not already present (within `dedup_angle`), keeps the list
    /// sorted and refreshes the audit. Returns how many were new.
    pub fn merge_rays(
        &mut self,
        problem: &GeodesicProblem,
        extra: impl IntoIterator<Item = GeodesicRay>,
        dedup_angle: f64,
    ) -> usize {
        let to_euclid = alpha_sqrt(problem);
        let rep = |d: &DVector<f64>| {
            let z = &to_euclid * d;
            let n = z.norm();
            z / n
        };
        let mut reps: Vec<DVector<f64>> = self.rays.iter().map(|r| rep(&r.direction())).collect();
        let max_chord = 2.0 * (0.5 * dedup_angle).sin();
        let mut added = 0;
        for ray in extra {
            let z = rep(&ray.direction());
            if !reps.iter().any(|r| (r - &z).norm() <= max_chord) {
                reps.push(z);
                self.rays.push(ray);
                added += 1;
            }
        }
        sort_rays(&mut self.rays);
        self.audit = theorem_audit(problem, self);
        added
    }
}

/// `Lᵀ` with `α = L Lᵀ`, so that `|Lᵀ x|` is the α-norm of `x`.
pub(crate) fn alpha_sqrt(problem: &GeodesicProblem) -> nalgebra::DMatrix<f64> {
    problem
        .randers()
        .alpha()
        .clone()
        .cholesky()
        .expect("alpha is positive definite")
        .l()
        .transpose()
}

pub(crate) fn sort_rays(rays: &mut [GeodesicRay]) {
    rays.sort_by(|a, b| {
        for (x, y) in a.y.y.iter().zip(&b.y.y) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        std::cmp::Ordering::Equal
    });
}

/// Angle between the rays through `a` and `b` (`m`-coordinates) measured on
/// the α-unit sphere; antipodal rays are `π` apart.
pub fn ray_angle(problem: &GeodesicProblem, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let r = problem.randers();
    let a = a / r.alpha_norm(a);
    let b = b / r.alpha_norm(b);
    let chord = r.alpha_norm(&(a - b));
    2.0 * (0.5 * chord).min(1.0).asin()
}
