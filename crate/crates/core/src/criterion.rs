//! Residual maps whose zeros are geodesic vectors.
//!
//! A nonzero `Y ∈ g` is a geodesic vector iff `g_{Y_m}(Y_m, [Y, U]_m) = 0`
//! for every `U ∈ m`. For a Randers norm on a group (`h = 0`) this reduces to
//! `α(X + sqrt(α(X,X)) V, [X, U]) = 0`. Both forms are evaluated with one
//! component per basis vector of `m`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::lie::{KillingData, LieAlgebra, ReductiveDecomposition};
use crate::minkowski::RandersStructure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualVector {
    pub components: Vec<f64>,
    pub norm: f64,
}

impl ResidualVector {
    pub fn from_vector(r: &DVector<f64>) -> Self {
        Self {
            components: r.iter().copied().collect(),
            norm: r.norm(),
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm <= tol
    }
}

/// Result of the indicatrix / Killing-sphere tangency test at one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencyCertificate {
    /// Sine of the angle between the normals of `I_F` and `S_K`.
    pub residual: f64,
    /// Largest `|K(y, [y, u_i]_m)|`, relative to `|y|^2 ||K||`.
    pub bracket_leak: f64,
    /// Both quantities are below tolerance, so the direction is geodesic.
    pub implies_geodesic: bool,
}

/// A Lie algebra with a reductive decomposition, a Randers norm on `m` and
/// the Killing form restricted to `m`.
#[derive(Debug, Clone)]
pub struct GeodesicProblem {
    algebra: LieAlgebra,
    decomposition: ReductiveDecomposition,
    randers: RandersStructure,
    killing: KillingData,
    m_coord_map: DMatrix<f64>,
    /// `L_i`: `y ↦ [y, m_i]_m` in `m`-coordinates, `dim_m × dim_g`.
    bracket_maps: Vec<DMatrix<f64>>,
}

impl GeodesicProblem {
    pub fn new(
        algebra: LieAlgebra,
        decomposition: ReductiveDecomposition,
        randers: RandersStructure,
    ) -> Result<Self> {
        check_len(algebra.dim(), decomposition.dim_g())?;
        check_len(decomposition.dim_m(), randers.dim())?;
        let killing = KillingData::restricted(&algebra, &decomposition);
        let m_coord_map = decomposition.m_coord_map();
        let bracket_maps = (0..decomposition.dim_m())
            .map(|i| {
                let mi = decomposition.m_basis().column(i).into_owned();
                -(&m_coord_map * algebra.ad_unchecked(&mi))
            })
            .collect();
        Ok(Self {
            algebra,
            decomposition,
            randers,
            killing,
            m_coord_map,
            bracket_maps,
        })
    }

    /// Group case, `m = g`.
    pub fn on_group(algebra: LieAlgebra, randers: RandersStructure) -> Result<Self> {
        let n = algebra.dim();
        Self::new(algebra, ReductiveDecomposition::trivial(n), randers)
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn decomposition(&self) -> &ReductiveDecomposition {
        &self.decomposition
    }

    pub fn randers(&self) -> &RandersStructure {
        &self.randers
    }

    pub fn killing(&self) -> &KillingData {
        &self.killing
    }

    pub fn dim_m(&self) -> usize {
        self.decomposition.dim_m()
    }

    pub fn dim_g(&self) -> usize {
        self.algebra.dim()
    }

    pub fn has_isotropy(&self) -> bool {
        !self.decomposition.is_trivial()
    }

    /// Magnitude of the residual map on the α-unit sphere, used to make
    /// tolerances relative: `max(1, max|c|) * max(1, ||α||)`.
    pub fn scale(&self) -> f64 {
        self.algebra.max_constant().max(1.0) * self.randers.alpha().norm().max(1.0)
    }

    pub fn m_coords(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.m_coord_map * y
    }

    pub fn embed_m(&self, x: &DVector<f64>) -> DVector<f64> {
        self.decomposition.embed_m(x)
    }

    /// `[y, m_i]_m` in `m`-coordinates.
    pub fn projected_bracket(&self, y: &DVector<f64>, i: usize) -> DVector<f64> {
        &self.bracket_maps[i] * y
    }

    /// Component `i` is `g_{y_m}(y_m, [y, m_i]_m)`; `y` is given in `g`-coordinates.
    pub fn general_residual(&self, y: &DVector<f64>) -> Result<ResidualVector> {
        check_len(self.dim_g(), y.len())?;
        let legendre = self.randers.legendre(&self.m_coords(y))?;
        let r = DVector::from_iterator(
            self.dim_m(),
            self.bracket_maps.iter().map(|l| legendre.dot(&(l * y))),
        );
        Ok(ResidualVector::from_vector(&r))
    }

    /// Residual of [`Self::general_residual`] and its Jacobian with respect to `y`.
    pub fn general_residual_jacobian(
        &self,
        y: &DVector<f64>,
    ) -> Result<(DVector<f64>, DMatrix<f64>)> {
        check_len(self.dim_g(), y.len())?;
        let x = self.m_coords(y);
        let legendre = self.randers.legendre(&x)?;
        let hess_c = self.randers.hessian_half_sq(&x)? * &self.m_coord_map;
        let m = self.dim_m();
        let mut r = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, self.dim_g());
        for (i, l) in self.bracket_maps.iter().enumerate() {
            let ly = l * y;
            r[i] = legendre.dot(&ly);
            let row = hess_c.tr_mul(&ly) + l.tr_mul(&legendre);
            jac.set_row(i, &row.transpose());
        }
        Ok((r, jac))
    }

    /// Component `i` is `α(x + sqrt(α(x,x)) V, [x, E_i])`. Requires `h = 0`.
    pub fn randers_residual(&self, x: &DVector<f64>) -> Result<ResidualVector> {
        Ok(ResidualVector::from_vector(&self.randers_residual_jacobian(x)?.0))
    }

    pub fn randers_residual_jacobian(
        &self,
        x: &DVector<f64>,
    ) -> Result<(DVector<f64>, DMatrix<f64>)> {
        if self.has_isotropy() {
            return Err(Error::UnsupportedDecomposition(
                "the closed Randers form needs h = 0; use general_residual".into(),
            ));
        }
        check_len(self.dim_g(), x.len())?;
        let alpha = self.randers.alpha();
        let drift = self.randers.drift();
        let s = self.randers.alpha_norm(x);
        if s == 0.0 {
            return Err(Error::ZeroVector);
        }
        let ax = alpha * x;
        let u = x + drift * s;
        let au = alpha * &u;
        let n = self.dim_g();
        let mut r = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, n);
        for (i, l) in self.bracket_maps.iter().enumerate() {
            let aw = alpha * (l * x);
            r[i] = u.dot(&aw);
            let row = &aw + &ax * (drift.dot(&aw) / s) + l.tr_mul(&au);
            jac.set_row(i, &row.transpose());
        }
        Ok((r, jac))
    }

    /// Geodesic residual of an `m`-vector with no `h` part; uses the closed
    /// Randers form when `h = 0` and the general form otherwise.
    pub fn residual_m(&self, x: &DVector<f64>) -> Result<ResidualVector> {
        if self.has_isotropy() {
            self.general_residual(&self.embed_m(x))
        } else {
            self.randers_residual(x)
        }
    }

    /// Sine of the angle between the normal of `I_F` at `x_F` and the normal
    /// of `S_K` at `x_K`; zero iff the two tangent hyperplanes are parallel.
    /// `x` is in `m`-coordinates.
    pub fn tangency_residual(&self, x: &DVector<f64>) -> Result<f64> {
        check_len(self.dim_m(), x.len())?;
        let value = self.killing.value(x);
        let tol = self.killing.null_tol() * x.norm_squared();
        if value.abs() <= tol || x.norm() == 0.0 {
            return Err(Error::NullCone { value, tol });
        }
        let gf = self.randers.legendre(x)?;
        let gk = self.killing.matrix() * x;
        let gf = &gf / gf.norm();
        let gk = &gk / gk.norm();
        Ok((&gf - &gk * gf.dot(&gk)).norm())
    }

    /// Tangency plus an explicit check that every `[y, u]_m` lies in the
    /// tangent hyperplane of `S_K`, which is what turns tangency into the
    /// geodesic condition.
    pub fn tangency_certificate(&self, x: &DVector<f64>, tol: f64) -> Result<TangencyCertificate> {
        let residual = self.tangency_residual(x)?;
        let y = self.embed_m(x);
        let kx = self.killing.matrix() * x;
        let denom = x.norm_squared() * self.killing.norm().max(f64::MIN_POSITIVE);
        let bracket_leak = self
            .bracket_maps
            .iter()
            .map(|l| kx.dot(&(l * &y)).abs() / denom)
            .fold(0.0, f64::max);
        Ok(TangencyCertificate {
            residual,
            bracket_leak,
            implies_geodesic: residual <= tol && bracket_leak <= tol,
        })
    }
}

fn identity_metric_drift(randers: &RandersStructure) -> Result<[f64; 3]> {
    if randers.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: randers.dim(),
        });
    }
    if (randers.alpha() - DMatrix::<f64>::identity(3, 3)).amax() > 0.0 {
        return Err(Error::Unsupported(
            "the three-dimensional example systems assume alpha = identity".into(),
        ));
    }
    let v = randers.drift();
    Ok([v[0], v[1], v[2]])
}

/// The simplified so(3) system with `α = I`:
/// `(b−a) x2 x3 + (b x3 v2 − a x2 v3) s`,
/// `(a−c) x1 x3 + (a x1 v3 − c x3 v1) s`,
/// `(c−b) x1 x2 + (c x2 v1 − b x1 v2) s`, with `s = |x|`.
pub fn example_system_so3(
    x: &[f64; 3],
    (a, b, c): (f64, f64, f64),
    randers: &RandersStructure,
) -> Result<[f64; 3]> {
    let [v1, v2, v3] = identity_metric_drift(randers)?;
    let [x1, x2, x3] = *x;
    let s = (x1 * x1 + x2 * x2 + x3 * x3).sqrt();
    Ok([
        (b - a) * x2 * x3 + (b * x3 * v2 - a * x2 * v3) * s,
        (a - c) * x1 * x3 + (a * x1 * v3 - c * x3 * v1) * s,
        (c - b) * x1 * x2 + (c * x2 * v1 - b * x1 * v2) * s,
    ])
}

/// The simplified sl(2) system with `α = I`:
/// `(a+b) x2 x3 + (b x3 v2 + a x2 v3) s`,
/// `(a−c) x1 x3 + (a x1 v3 − c x3 v1) s`,
/// `(b+c) x1 x2 + (c x2 v1 + b x1 v2) s`.
pub fn example_system_sl2(
    x: &[f64; 3],
    (a, b, c): (f64, f64, f64),
    randers: &RandersStructure,
) -> Result<[f64; 3]> {
    let [v1, v2, v3] = identity_metric_drift(randers)?;
    let [x1, x2, x3] = *x;
    let s = (x1 * x1 + x2 * x2 + x3 * x3).sqrt();
    Ok([
        (a + b) * x2 * x3 + (b * x3 * v2 + a * x2 * v3) * s,
        (a - c) * x1 * x3 + (a * x1 * v3 - c * x3 * v1) * s,
        (b + c) * x1 * x2 + (c * x2 * v1 + b * x1 * v2) * s,
    ])
}
