//! Randers norms `F(u) = sqrt(α(u,u)) + α(V,u)` on `m`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::lie::KillingData;

/// Margin by which `α(V, V)` must stay below 1.
pub const RANDERS_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RandersStructure {
    alpha: DMatrix<f64>,
    drift: DVector<f64>,
    beta: DVector<f64>,
}

impl RandersStructure {
    pub fn new(alpha: DMatrix<f64>, drift: DVector<f64>) -> Result<Self> {
        if !alpha.is_square() {
            return Err(Error::DimensionMismatch {
                expected: alpha.nrows(),
                got: alpha.ncols(),
            });
        }
        check_len(alpha.nrows(), drift.len())?;
        let asym = (&alpha - alpha.transpose()).amax();
        if asym > 1e-12 * alpha.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let alpha = (&alpha + alpha.transpose()) * 0.5;
        let smallest = SymmetricEigen::new(alpha.clone()).eigenvalues.min();
        if !(smallest > 0.0) {
            return Err(Error::NotPositiveDefinite(smallest));
        }
        let beta = &alpha * &drift;
        let vv = drift.dot(&beta);
        if !(vv < 1.0 - RANDERS_MARGIN) {
            return Err(Error::RandersBound(vv));
        }
        Ok(Self { alpha, drift, beta })
    }

    /// `V = 0`.
    pub fn riemannian(alpha: DMatrix<f64>) -> Result<Self> {
        let n = alpha.nrows();
        Self::new(alpha, DVector::zeros(n))
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::riemannian(DMatrix::identity(dim, dim)).expect("identity is positive definite")
    }

    /// `α = I` with drift `V`.
    pub fn with_identity(drift: DVector<f64>) -> Result<Self> {
        let n = drift.len();
        Self::new(DMatrix::identity(n, n), drift)
    }

    pub fn dim(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn alpha(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    pub fn drift(&self) -> &DVector<f64> {
        &self.drift
    }

    /// The 1-form `β = α(V, ·)` as a coordinate covector.
    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn is_reversible(&self) -> bool {
        self.drift.iter().all(|v| *v == 0.0)
    }

    pub fn alpha_form(&self, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        u.dot(&(&self.alpha * w))
    }

    pub fn alpha_norm(&self, u: &DVector<f64>) -> f64 {
        self.alpha_form(u, u).max(0.0).sqrt()
    }

    /// `sqrt(α(V, V))`.
    pub fn drift_norm(&self) -> f64 {
        self.alpha_norm(&self.drift)
    }

    pub fn norm(&self, u: &DVector<f64>) -> f64 {
        self.alpha_norm(u) + self.beta.dot(u)
    }

    /// Gradient of `F` at `u ≠ 0`.
    pub fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dim(), u.len())?;
        let s = self.alpha_norm(u);
        if s == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(&self.alpha * u / s + &self.beta)
    }

    /// `∇(½F²)(y)`, so that `g_y(y, w) = legendre(y) · w`.
    pub fn legendre(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let grad = self.gradient(y)?;
        Ok(grad * self.norm(y))
    }

    /// Hessian of `½F²` at `y ≠ 0`: `∇F ∇Fᵀ + F ∇²F`.
    pub fn hessian_half_sq(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let grad = self.gradient(y)?;
        let s = self.alpha_norm(y);
        let ay = &self.alpha * y;
        let hess_f = &self.alpha / s - &ay * ay.transpose() / (s * s * s);
        Ok(&grad * grad.transpose() + hess_f * self.norm(y))
    }

    /// `g_y(y, w) = ½ d/dt F²(y + t w)` at `t = 0`.
    pub fn fundamental_directional(&self, y: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        Ok(self.legendre(y)?.dot(w))
    }

    /// `x / F(x)`.
    pub fn indicatrix_project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dim(), x.len())?;
        let f = self.norm(x);
        if !(f > 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(x / f)
    }
}

/// A point of the unit indicatrix together with its Killing value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatrixPoint {
    pub y: Vec<f64>,
    pub killing_value: f64,
}

impl IndicatrixPoint {
    pub fn project(x: &DVector<f64>, randers: &RandersStructure, killing: &KillingData) -> Result<Self> {
        let y = randers.indicatrix_project(x)?;
        Ok(Self {
            killing_value: killing.value(&y),
            y: y.iter().copied().collect(),
        })
    }

    pub fn vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn half_drift() -> RandersStructure {
        RandersStructure::with_identity(v(&[0.5, 0.0, 0.0])).unwrap()
    }

    /// Central difference of `½F²(y + t w)` at `t = 0`.
    fn fd_directional(r: &RandersStructure, y: &DVector<f64>, w: &DVector<f64>, h: f64) -> f64 {
        let f = |t: f64| 0.5 * r.norm(&(y + w * t)).powi(2);
        (f(h) - f(-h)) / (2.0 * h)
    }

    #[test]
    fn norm_examples() {
        assert_eq!(RandersStructure::euclidean(3).norm(&v(&[1.0, 0.0, 0.0])), 1.0);
        let r = half_drift();
        assert_eq!(r.norm(&v(&[1.0, 0.0, 0.0])), 1.5);
        assert_eq!(r.norm(&v(&[0.0, 1.0, 0.0])), 1.0);
        assert_eq!(r.norm(&DVector::zeros(3)), 0.0);
    }

    #[test]
    fn directional_examples() {
        let r = half_drift();
        let e1 = v(&[1.0, 0.0, 0.0]);
        let e2 = v(&[0.0, 1.0, 0.0]);
        // frozen from fd_directional with h = 1e-6
        let fd11 = fd_directional(&r, &e1, &e1, 1e-6);
        let fd12 = fd_directional(&r, &e1, &e2, 1e-6);
        assert_abs_diff_eq!(fd11, 2.25, epsilon = 1e-8);
        assert_abs_diff_eq!(fd12, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.fundamental_directional(&e1, &e1).unwrap(), 2.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.fundamental_directional(&e1, &e2).unwrap(), 0.0, epsilon = 1e-15);

        let riem = RandersStructure::riemannian(DMatrix::from_row_slice(
            2,
            2,
            &[2.0, 0.3, 0.3, 1.0],
        ))
        .unwrap();
        let (y, w) = (v(&[0.4, -1.2]), v(&[1.5, 0.7]));
        assert_abs_diff_eq!(
            riem.fundamental_directional(&y, &w).unwrap(),
            riem.alpha_form(&y, &w),
            epsilon = 1e-14
        );
    }

    #[test]
    fn directional_needs_nonzero_base() {
        let r = half_drift();
        assert_eq!(
            r.fundamental_directional(&DVector::zeros(3), &v(&[1.0, 0.0, 0.0])),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn indicatrix_examples() {
        let e = RandersStructure::euclidean(3);
        assert_eq!(e.indicatrix_project(&v(&[2.0, 0.0, 0.0])).unwrap(), v(&[1.0, 0.0, 0.0]));
        let r = half_drift();
        assert_abs_diff_eq!(
            r.indicatrix_project(&v(&[1.0, 0.0, 0.0])).unwrap(),
            v(&[2.0 / 3.0, 0.0, 0.0]),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            r.indicatrix_project(&v(&[-1.0, 0.0, 0.0])).unwrap(),
            v(&[-2.0, 0.0, 0.0]),
            epsilon = 1e-15
        );
        assert_eq!(r.indicatrix_project(&DVector::zeros(3)), Err(Error::ZeroVector));
    }

    #[test]
    fn constructor_rejects_bad_metrics() {
        assert!(matches!(
            RandersStructure::with_identity(v(&[1.0, 0.0, 0.0])),
            Err(Error::RandersBound(_))
        ));
        assert!(matches!(
            RandersStructure::riemannian(DMatrix::from_diagonal(&v(&[1.0, -1.0]))),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(matches!(
            RandersStructure::riemannian(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])),
            Err(Error::NotSymmetric(_))
        ));
        assert!(matches!(
            RandersStructure::new(DMatrix::identity(3, 3), v(&[0.1, 0.1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn drift_breaks_reversibility() {
        let r = RandersStructure::with_identity(v(&[0.2, -0.3, 0.1])).unwrap();
        let u = r.drift().clone();
        assert!((r.norm(&u) - r.norm(&-&u)).abs() > 1e-3);
        assert!(!r.is_reversible());
        assert!(RandersStructure::euclidean(3).is_reversible());
    }

    fn arb_randers() -> impl Strategy<Value = RandersStructure> {
        (
            prop::collection::vec(-1.0f64..1.0, 9),
            prop::collection::vec(-1.0f64..1.0, 3),
            0.0f64..0.95,
        )
            .prop_map(|(l, dir, radius)| {
                let l = DMatrix::from_row_slice(3, 3, &l);
                let alpha = &l * l.transpose() + DMatrix::identity(3, 3) * 0.3;
                let dir = v(&dir);
                let r0 = RandersStructure::riemannian(alpha.clone()).unwrap();
                let n = r0.alpha_norm(&dir).max(1e-9);
                RandersStructure::new(alpha, dir * (radius / n)).unwrap()
            })
    }

    fn arb_vec() -> impl Strategy<Value = DVector<f64>> {
        prop::collection::vec(-3.0f64..3.0, 3)
            .prop_filter("nonzero", |x| x.iter().map(|t| t * t).sum::<f64>() > 1e-4)
            .prop_map(|x| v(&x))
    }

    proptest! {
        #[test]
        fn homogeneity(r in arb_randers(), u in arb_vec(), lambda in 0.01f64..50.0) {
            let lhs = r.norm(&(&u * lambda));
            let rhs = lambda * r.norm(&u);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }

        #[test]
        fn lower_bound_by_alpha(r in arb_randers(), u in arb_vec()) {
            let bound = (1.0 - r.drift_norm()) * r.alpha_norm(&u);
            prop_assert!(r.norm(&u) >= bound * (1.0 - 1e-12));
        }

        #[test]
        fn directional_matches_finite_difference(r in arb_randers(), y in arb_vec(), w in arb_vec()) {
            let fd = fd_directional(&r, &y, &w, 1e-6);
            let exact = r.fundamental_directional(&y, &w).unwrap();
            let scale = r.norm(&y) * r.alpha_norm(&w) * 10.0;
            prop_assert!((fd - exact).abs() <= 1e-6 * scale.max(exact.abs()));
        }

        #[test]
        fn euler_identity(r in arb_randers(), y in arb_vec()) {
            let g = r.fundamental_directional(&y, &y).unwrap();
            let f2 = r.norm(&y).powi(2);
            prop_assert!((g - f2).abs() <= 1e-10 * f2);
        }

        #[test]
        fn indicatrix_lands_on_unit_level(r in arb_randers(), x in arb_vec()) {
            let y = r.indicatrix_project(&x).unwrap();
            prop_assert!((r.norm(&y) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn hessian_matches_gradient_difference(r in arb_randers(), y in arb_vec(), w in arb_vec()) {
            let h = 1e-6;
            let gp = r.legendre(&(&y + &w * h)).unwrap();
            let gm = r.legendre(&(&y - &w * h)).unwrap();
            let fd = (gp - gm) / (2.0 * h);
            let exact = r.hessian_half_sq(&y).unwrap() * &w;
            let scale = exact.norm().max(r.alpha_norm(&w)) ;
            prop_assert!((fd - exact).norm() <= 1e-5 * scale);
        }
    }
}
