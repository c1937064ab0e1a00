//! Flat Killing form: geodesic vectors from a hyperplane `W ⊃ [m, m]_m`.
//!
//! If `n` is a point of the indicatrix whose tangent hyperplane is `W`, then
//! `g_n(n, w) = 0` for all `w ∈ W`, and since every `[n, u]_m` lies in `W`
//! the vector `n` is geodesic. A strictly convex indicatrix has exactly two
//! such points, one on each side of `W`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::newton::gauss_newton;
use super::{GeodesicRay, RayKind, SolveConfig, SOUNDNESS_TOL};
use crate::criterion::GeodesicProblem;
use crate::error::{Error, Result};
use crate::lie::{column_span, orthogonal_complement};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPoints {
    /// On the side of `W` the (sign-fixed) normal points to.
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
    pub residual_n1: f64,
    pub residual_n2: f64,
}

impl SupportPoints {
    pub fn n1(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.n1)
    }

    pub fn n2(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.n2)
    }

    /// Both points as rays, ready to merge into a report.
    pub fn rays(&self, problem: &GeodesicProblem) -> Result<Vec<GeodesicRay>> {
        [self.n1(), self.n2()]
            .iter()
            .map(|n| GeodesicRay::from_vector(problem, &problem.embed_m(n), RayKind::Isolated))
            .collect()
    }
}

/// Orthonormal basis (in `m`-coordinates) of the span of all `[m_i, m_j]_m`.
pub fn derived_in_m(problem: &GeodesicProblem) -> Vec<DVector<f64>> {
    let n = problem.dim_m();
    let mut columns = Vec::new();
    for i in 0..n {
        let ei = problem.embed_m(&unit(n, i));
        for j in (i + 1)..n {
            let ej = problem.embed_m(&unit(n, j));
            let b = problem.algebra().bracket_unchecked(&ei, &ej);
            columns.push(problem.m_coords(&b));
        }
    }
    column_span(n, &columns)
}

/// A hyperplane containing `[m, m]_m`: the derived part plus all but the
/// last vector of its orthogonal complement.
pub fn default_hyperplane(problem: &GeodesicProblem) -> Result<Vec<DVector<f64>>> {
    let n = problem.dim_m();
    let derived = derived_in_m(problem);
    if derived.len() >= n {
        return Err(Error::InvalidHyperplane(
            "[m, m] spans m, so no hyperplane contains it".into(),
        ));
    }
    let mut rest = orthogonal_complement(n, &derived);
    rest.pop();
    Ok(derived.into_iter().chain(rest).collect())
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}

/// Euclidean unit normal of `W`, with its largest component made positive.
fn hyperplane_normal(problem: &GeodesicProblem, hyperplane: &[DVector<f64>]) -> Result<DVector<f64>> {
    let n = problem.dim_m();
    if hyperplane.len() + 1 != n {
        return Err(Error::InvalidHyperplane(format!(
            "expected {} spanning vectors, got {}",
            n - 1,
            hyperplane.len()
        )));
    }
    for w in hyperplane {
        if w.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.len(),
            });
        }
        if !w.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidHyperplane("non-finite entry".into()));
        }
    }
    let span = column_span(n, hyperplane);
    if span.len() + 1 != n {
        return Err(Error::InvalidHyperplane(format!(
            "vectors span a subspace of dimension {}, not {}",
            span.len(),
            n - 1
        )));
    }
    let mut normal = orthogonal_complement(n, &span)
        .pop()
        .ok_or_else(|| Error::InvalidHyperplane("no normal direction".into()))?;
    if normal.max() < -normal.min() {
        normal = -normal;
    }
    for d in derived_in_m(problem) {
        let leak = d.dot(&normal).abs();
        if leak > 1e-9 {
            return Err(Error::InvalidHyperplane(format!(
                "[m, m] is not contained in W (normal component {leak:e})"
            )));
        }
    }
    Ok(normal)
}

/// The two indicatrix points whose tangent hyperplane is parallel to `W`.
///
/// `hyperplane` holds `dim m - 1` spanning vectors in `m`-coordinates.
/// Both points are found by Newton on `{g_n(n, w_j) = 0, F(n) = 1}` from
/// `±α⁻¹ν`, where `ν` is the normal of `W`.
pub fn case1_support_points(
    problem: &GeodesicProblem,
    hyperplane: &[DVector<f64>],
    cfg: &SolveConfig,
) -> Result<SupportPoints> {
    cfg.validate()?;
    if !problem.killing().signature().is_flat() {
        return Err(Error::WrongCase(
            "the Killing form is not identically zero on m; use variational_critical_points".into(),
        ));
    }
    let normal = hyperplane_normal(problem, hyperplane)?;
    let randers = problem.randers();
    let w = DMatrix::from_columns(hyperplane);
    let eval = |n: &DVector<f64>| -> Option<(DVector<f64>, DMatrix<f64>)> {
        let k = hyperplane.len();
        let phi = randers.legendre(n).ok()?;
        let hphi = randers.hessian_half_sq(n).ok()?;
        let mut r = DVector::zeros(k + 1);
        r.rows_mut(0, k).copy_from(&(w.transpose() * phi));
        r[k] = randers.norm(n) - 1.0;
        let mut jac = DMatrix::zeros(k + 1, n.len());
        jac.rows_mut(0, k).copy_from(&(w.transpose() * hphi));
        jac.set_row(k, &randers.gradient(n).ok()?.transpose());
        Some((r, jac))
    };
    let normalize = |n: DVector<f64>| {
        let f = randers.norm(&n);
        (f > 1e-150 && f.is_finite()).then(|| n / f)
    };
    let seed = randers
        .alpha()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite(0.0))?
        .solve(&normal);
    let tol = cfg.newton_tol * randers.alpha().norm().max(1.0);
    let mut found = Vec::with_capacity(2);
    for s in [seed.clone(), -seed] {
        let out = gauss_newton(eval, normalize, s, cfg.max_iter.max(60), tol);
        if !out.converged {
            return Err(Error::SolverFailure(format!(
                "support point did not converge (residual {:e})",
                out.residual
            )));
        }
        let residual = problem.residual_m(&out.x)?.norm;
        if residual >= SOUNDNESS_TOL {
            return Err(Error::SolverFailure(format!(
                "support point has geodesic residual {residual:e}"
            )));
        }
        found.push((out.x, residual));
    }
    let (n2, r2) = found.pop().expect("two points");
    let (n1, r1) = found.pop().expect("two points");
    if !(n1.dot(&normal) > 0.0 && n2.dot(&normal) < 0.0) {
        return Err(Error::SolverFailure(
            "support points are not on opposite sides of W".into(),
        ));
    }
    Ok(SupportPoints {
        n1: n1.iter().copied().collect(),
        n2: n2.iter().copied().collect(),
        residual_n1: r1,
        residual_n2: r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::LieAlgebra;
    use crate::minkowski::RandersStructure;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn heis(drift: &[f64]) -> GeodesicProblem {
        GeodesicProblem::on_group(
            LieAlgebra::heisenberg(),
            RandersStructure::with_identity(v(drift)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn heisenberg_support_points() {
        let p = heis(&[0.5, 0.0, 0.0]);
        let w = [v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
        let s = case1_support_points(&p, &w, &SolveConfig::default()).unwrap();
        assert_abs_diff_eq!(s.n1(), v(&[2.0 / 3.0, 0.0, 0.0]), epsilon = 1e-10);
        assert_abs_diff_eq!(s.n2(), v(&[-2.0, 0.0, 0.0]), epsilon = 1e-10);
        assert!(s.residual_n1 < 1e-10 && s.residual_n2 < 1e-10);
        assert!((s.n1() + s.n2()).norm() > 1.0);
        let rays = s.rays(&p).unwrap();
        assert_eq!(rays.len(), 2);
    }

    #[test]
    fn hyperplane_must_contain_derived_algebra() {
        let p = heis(&[0.5, 0.0, 0.0]);
        let w = [v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])];
        assert!(matches!(
            case1_support_points(&p, &w, &SolveConfig::default()),
            Err(Error::InvalidHyperplane(_))
        ));
        let short = [v(&[0.0, 0.0, 1.0])];
        assert!(matches!(
            case1_support_points(&p, &short, &SolveConfig::default()),
            Err(Error::InvalidHyperplane(_))
        ));
        let degenerate = [v(&[0.0, 0.0, 1.0]), v(&[0.0, 0.0, 2.0])];
        assert!(matches!(
            case1_support_points(&p, &degenerate, &SolveConfig::default()),
            Err(Error::InvalidHyperplane(_))
        ));
    }

    #[test]
    fn semisimple_input_is_the_other_case() {
        let p = GeodesicProblem::on_group(LieAlgebra::so3(1.0, 2.0, 3.0), RandersStructure::euclidean(3))
            .unwrap();
        let w = default_hyperplane(&p);
        assert!(w.is_err());
        let w = [v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
        assert!(matches!(
            case1_support_points(&p, &w, &SolveConfig::default()),
            Err(Error::WrongCase(_))
        ));
    }

    #[test]
    fn default_hyperplane_works_for_generic_drift() {
        let p = heis(&[0.2, -0.3, 0.4]);
        let w = default_hyperplane(&p).unwrap();
        assert_eq!(w.len(), 2);
        let s = case1_support_points(&p, &w, &SolveConfig::default()).unwrap();
        assert!(s.residual_n1 < 1e-9 && s.residual_n2 < 1e-9);
        assert_abs_diff_eq!(p.randers().norm(&s.n1()), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.randers().norm(&s.n2()), 1.0, epsilon = 1e-12);
    }
}
