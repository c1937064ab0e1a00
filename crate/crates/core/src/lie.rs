//! Finite-dimensional real Lie algebras given by structure constants.
//!
//! An algebra of dimension `n` stores the dense table `c[i][j][k]` with
//! `[E_i, E_j] = sum_k c[i][j][k] E_k`. Everything downstream (adjoint
//! matrices, the Killing form, reductive decompositions) is derived from it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Absolute Jacobi tolerance for algebras whose constants are of unit size.
pub const JACOBI_TOL: f64 = 1e-12;

/// Singular value cutoff used when extracting spans of brackets.
pub const RANK_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    structure: Vec<f64>,
    label: String,
}

impl LieAlgebra {
    /// Builds an algebra from a dense `dim^3` table indexed as `(i * dim + j) * dim + k`.
    ///
    /// Fails if the table is not antisymmetric in `(i, j)` or if the Jacobi
    /// identity is violated on some basis triple.
    pub fn new(label: impl Into<String>, dim: usize, structure: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        check_len(dim * dim * dim, structure.len())?;
        let algebra = Self {
            dim,
            structure,
            label: label.into(),
        };
        algebra.check_antisymmetry()?;
        algebra.check_jacobi()?;
        Ok(algebra)
    }

    /// Builds an algebra from the nonzero brackets `[E_i, E_j] = value * E_k`
    /// listed as `(i, j, k, value)` with zero-based indices. The entry for
    /// `(j, i)` is filled in by antisymmetry; repeated entries accumulate.
    pub fn from_brackets(
        label: impl Into<String>,
        dim: usize,
        brackets: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        let mut structure = vec![0.0; dim * dim * dim];
        for &(i, j, k, value) in brackets {
            for idx in [i, j, k] {
                if idx >= dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: idx + 1,
                    });
                }
            }
            if i == j {
                if value != 0.0 {
                    return Err(Error::NotAntisymmetric { i, j, k });
                }
                continue;
            }
            structure[(i * dim + j) * dim + k] += value;
            structure[(j * dim + i) * dim + k] -= value;
        }
        Self::new(label, dim, structure)
    }

    /// `[E1,E2] = a E3`, `[E1,E3] = -b E2`, `[E2,E3] = c E1`; isomorphic to so(3) for `a, b, c > 0`.
    pub fn so3(a: f64, b: f64, c: f64) -> Self {
        Self::from_brackets(
            format!("so3(a={a}, b={b}, c={c})"),
            3,
            &[(0, 1, 2, a), (0, 2, 1, -b), (1, 2, 0, c)],
        )
        .expect("so3 family satisfies the Jacobi identity")
    }

    /// `[E1,E2] = a E3`, `[E1,E3] = b E2`, `[E2,E3] = c E1`; isomorphic to sl(2) for `a, b, c > 0`.
    pub fn sl2(a: f64, b: f64, c: f64) -> Self {
        Self::from_brackets(
            format!("sl2(a={a}, b={b}, c={c})"),
            3,
            &[(0, 1, 2, a), (0, 2, 1, b), (1, 2, 0, c)],
        )
        .expect("sl2 family satisfies the Jacobi identity")
    }

    /// Three-dimensional Heisenberg algebra, `[E1,E2] = E3`.
    pub fn heisenberg() -> Self {
        Self::from_brackets("heisenberg", 3, &[(0, 1, 2, 1.0)])
            .expect("heisenberg algebra satisfies the Jacobi identity")
    }

    pub fn abelian(dim: usize) -> Self {
        Self::new(format!("abelian({dim})"), dim, vec![0.0; dim * dim * dim])
            .expect("abelian algebra is valid")
    }

    /// Direct sum `self ⊕ other`; the basis of `other` follows the basis of `self`.
    pub fn direct_sum(&self, other: &LieAlgebra) -> LieAlgebra {
        let n = self.dim + other.dim;
        let mut structure = vec![0.0; n * n * n];
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    structure[(i * n + j) * n + k] = self.c(i, j, k);
                }
            }
        }
        let o = self.dim;
        for i in 0..other.dim {
            for j in 0..other.dim {
                for k in 0..other.dim {
                    structure[((i + o) * n + (j + o)) * n + (k + o)] = other.c(i, j, k);
                }
            }
        }
        LieAlgebra {
            dim: n,
            structure,
            label: format!("{} + {}", self.label, other.label),
        }
    }

    /// Re-expresses the algebra in the basis `E'_a = sum_j basis[(j, a)] E_j`.
    pub fn change_basis(&self, basis: &DMatrix<f64>) -> Result<LieAlgebra> {
        let n = self.dim;
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: basis.nrows().max(basis.ncols()),
            });
        }
        let inverse = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidDecomposition("basis change is singular".into()))?;
        let mut structure = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                let ea = basis.column(a).into_owned();
                let eb = basis.column(b).into_owned();
                let image = inverse.clone() * self.bracket_unchecked(&ea, &eb);
                for k in 0..n {
                    structure[(a * n + b) * n + k] = image[k];
                }
            }
        }
        Ok(LieAlgebra {
            dim: n,
            structure,
            label: format!("{} (rebased)", self.label),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn structure(&self) -> &[f64] {
        &self.structure
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    /// Largest absolute structure constant.
    pub fn max_constant(&self) -> f64 {
        self.structure.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.dim);
        e[i] = 1.0;
        e
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dim, x.len())?;
        check_len(self.dim, y.len())?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                let base = (i * n + j) * n;
                for k in 0..n {
                    out[k] += w * self.structure[base + k];
                }
            }
        }
        out
    }

    /// Matrix of `u ↦ [x, u]`.
    pub fn ad_matrix(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_len(self.dim, x.len())?;
        Ok(self.ad_unchecked(x))
    }

    pub(crate) fn ad_unchecked(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut ad = DMatrix::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    ad[(k, j)] += x[i] * self.c(i, j, k);
                }
            }
        }
        ad
    }

    /// `K_ij = trace(ad(E_i) ad(E_j))`, symmetric by construction.
    pub fn killing_matrix(&self) -> DMatrix<f64> {
        let n = self.dim;
        let ads: Vec<DMatrix<f64>> = (0..n)
            .map(|i| self.ad_unchecked(&self.basis_vector(i)))
            .collect();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let t = (&ads[i] * &ads[j]).trace();
                k[(i, j)] = t;
                k[(j, i)] = t;
            }
        }
        k
    }

    /// Largest `|[[E_i,E_j],E_k] + [[E_j,E_k],E_i] + [[E_k,E_i],E_j]|` over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        self.jacobi_worst().map_or(0.0, |(_, _, _, r)| r)
    }

    fn jacobi_worst(&self) -> Option<(usize, usize, usize, f64)> {
        let n = self.dim;
        let mut worst: Option<(usize, usize, usize, f64)> = None;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut total = 0.0_f64;
                    let mut r = vec![0.0; n];
                    for l in 0..n {
                        for m in 0..n {
                            r[m] += self.c(i, j, l) * self.c(l, k, m)
                                + self.c(j, k, l) * self.c(l, i, m)
                                + self.c(k, i, l) * self.c(l, j, m);
                        }
                    }
                    for v in r {
                        total = total.max(v.abs());
                    }
                    if worst.is_none_or(|w| total > w.3) {
                        worst = Some((i, j, k, total));
                    }
                }
            }
        }
        worst
    }

    fn check_antisymmetry(&self) -> Result<()> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.c(i, j, k) != -self.c(j, i, k) {
                        return Err(Error::NotAntisymmetric { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_jacobi(&self) -> Result<()> {
        let scale = self.max_constant().max(1.0);
        if let Some((i, j, k, residual)) = self.jacobi_worst() {
            if residual > JACOBI_TOL * scale * scale {
                return Err(Error::JacobiViolation { i, j, k, residual });
            }
        }
        Ok(())
    }

    /// Orthonormal (Euclidean coordinate) basis of the span of all brackets `[E_i, E_j]`.
    pub fn derived_subalgebra(&self) -> Vec<DVector<f64>> {
        let n = self.dim;
        let mut columns = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                columns.push(self.bracket_unchecked(&self.basis_vector(i), &self.basis_vector(j)));
            }
        }
        column_span(n, &columns)
    }
}

/// Orthonormal basis of the span of `columns` (rank cutoff [`RANK_CUTOFF`]).
pub(crate) fn column_span(n: usize, columns: &[DVector<f64>]) -> Vec<DVector<f64>> {
    if columns.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_columns(columns);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let cutoff = RANK_CUTOFF * svd.singular_values.max().max(1.0);
    let mut basis = Vec::new();
    for (idx, s) in svd.singular_values.iter().enumerate() {
        if *s > cutoff {
            basis.push(u.column(idx).into_owned());
        }
    }
    debug_assert!(basis.iter().all(|b| b.len() == n));
    basis
}

/// Orthonormal basis of the Euclidean orthogonal complement of `span`.
pub(crate) fn orthogonal_complement(n: usize, span: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let basis = column_span(n, span);
    let mut out: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        for b in basis.iter().chain(out.iter()) {
            let d = b.dot(&e);
            e -= b * d;
        }
        // second pass keeps the result orthogonal to working precision
        for b in basis.iter().chain(out.iter()) {
            let d = b.dot(&e);
            e -= b * d;
        }
        let norm = e.norm();
        if norm > 1e-8 {
            out.push(e / norm);
        }
        if basis.len() + out.len() == n {
            break;
        }
    }
    out
}

/// A splitting `g = m + h` with `[h, m] ⊂ m`.
///
/// Vectors of `g` are written in the algebra's coordinates; vectors of `m`
/// are written in coordinates relative to `m_basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductiveDecomposition {
    m_basis: DMatrix<f64>,
    h_basis: DMatrix<f64>,
    /// inverse of `[m_basis | h_basis]`
    coords: DMatrix<f64>,
}

impl ReductiveDecomposition {
    /// `m = g`, `h = 0`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            m_basis: DMatrix::identity(dim, dim),
            h_basis: DMatrix::zeros(dim, 0),
            coords: DMatrix::identity(dim, dim),
        }
    }

    /// Checks that the two families span the algebra, that `h` is a subalgebra,
    /// and that `[h, m] ⊂ m`.
    pub fn new(
        algebra: &LieAlgebra,
        m_basis: &[DVector<f64>],
        h_basis: &[DVector<f64>],
    ) -> Result<Self> {
        let n = algebra.dim();
        if m_basis.len() + h_basis.len() != n {
            return Err(Error::InvalidDecomposition(format!(
                "dim m ({}) + dim h ({}) must equal dim g ({n})",
                m_basis.len(),
                h_basis.len()
            )));
        }
        if m_basis.is_empty() {
            return Err(Error::InvalidDecomposition("m must be nonzero".into()));
        }
        for v in m_basis.iter().chain(h_basis) {
            check_len(n, v.len())?;
        }
        let m = DMatrix::from_columns(m_basis);
        let h = if h_basis.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(h_basis)
        };
        let mut full = DMatrix::zeros(n, n);
        full.columns_mut(0, m.ncols()).copy_from(&m);
        if h.ncols() > 0 {
            full.columns_mut(m.ncols(), h.ncols()).copy_from(&h);
        }
        let smallest = full.clone().svd(false, false).singular_values.min();
        if smallest < RANK_CUTOFF {
            return Err(Error::InvalidDecomposition(
                "m and h bases do not span the algebra".into(),
            ));
        }
        let coords = full
            .try_inverse()
            .ok_or_else(|| Error::InvalidDecomposition("singular basis".into()))?;
        let decomposition = Self {
            m_basis: m,
            h_basis: h,
            coords,
        };
        let tol = 1e-10 * algebra.max_constant().max(1.0);
        for a in 0..decomposition.dim_h() {
            let ha = decomposition.h_basis.column(a).into_owned();
            for b in 0..decomposition.dim_h() {
                let hb = decomposition.h_basis.column(b).into_owned();
                let leak = decomposition.m_coords(&algebra.bracket_unchecked(&ha, &hb)).amax();
                if leak > tol {
                    return Err(Error::InvalidDecomposition(format!(
                        "h is not a subalgebra: [h_{a}, h_{b}] has m-component {leak:e}"
                    )));
                }
            }
            for i in 0..decomposition.dim_m() {
                let mi = decomposition.m_basis.column(i).into_owned();
                let leak = decomposition.h_coords(&algebra.bracket_unchecked(&ha, &mi)).amax();
                if leak > tol {
                    return Err(Error::InvalidDecomposition(format!(
                        "not reductive: [h_{a}, m_{i}] has h-component {leak:e}"
                    )));
                }
            }
        }
        Ok(decomposition)
    }

    /// Uses the Euclidean coordinate complement of `h` as `m`.
    pub fn from_isotropy(algebra: &LieAlgebra, h_basis: &[DVector<f64>]) -> Result<Self> {
        let m_basis = orthogonal_complement(algebra.dim(), h_basis);
        Self::new(algebra, &m_basis, h_basis)
    }

    pub fn dim_g(&self) -> usize {
        self.m_basis.nrows()
    }

    pub fn dim_m(&self) -> usize {
        self.m_basis.ncols()
    }

    pub fn dim_h(&self) -> usize {
        self.h_basis.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim_h() == 0
    }

    pub fn m_basis(&self) -> &DMatrix<f64> {
        &self.m_basis
    }

    pub fn h_basis(&self) -> &DMatrix<f64> {
        &self.h_basis
    }

    /// Linear map `g → m` (coordinates relative to `m_basis`), as a `dim_m × dim_g` matrix.
    pub fn m_coord_map(&self) -> DMatrix<f64> {
        self.coords.rows(0, self.dim_m()).into_owned()
    }

    pub fn m_coords(&self, y: &DVector<f64>) -> DVector<f64> {
        self.coords.rows(0, self.dim_m()) * y
    }

    pub fn h_coords(&self, y: &DVector<f64>) -> DVector<f64> {
        self.coords.rows(self.dim_m(), self.dim_h()) * y
    }

    /// The vector of `g` with `m`-coordinates `x` and no `h` part.
    pub fn embed_m(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.m_basis * x
    }

    /// Idempotent projection `g → g` with image `m` and kernel `h`.
    pub fn projection_to_m(&self) -> DMatrix<f64> {
        &self.m_basis * self.m_coord_map()
    }

    pub fn project_to_m(&self, y: &DVector<f64>) -> DVector<f64> {
        self.embed_m(&self.m_coords(y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
    pub k: usize,
}

impl Signature {
    pub fn is_indefinite(&self) -> bool {
        self.p > 0 && self.q > 0
    }

    pub fn is_flat(&self) -> bool {
        self.p == 0 && self.q == 0
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.p, self.q, self.k)
    }
}

/// Default eigenvalue cutoff `1e-9 * max(1, ||K||)` (Frobenius norm).
pub fn default_killing_tol(matrix: &DMatrix<f64>) -> f64 {
    1e-9 * matrix.norm().max(1.0)
}

/// Counts eigenvalues above `tol`, below `-tol` and in between, and returns an
/// orthonormal basis of the eigenspace for the middle band.
pub fn killing_signature(
    matrix: &DMatrix<f64>,
    tol: f64,
) -> Result<(Signature, Vec<DVector<f64>>)> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: matrix.nrows(),
            got: matrix.ncols(),
        });
    }
    let asym = (matrix - matrix.transpose()).amax();
    if asym > 1e-12 * matrix.amax().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let mut sig = Signature { p: 0, q: 0, k: 0 };
    let mut radical = Vec::new();
    for (idx, lambda) in eig.eigenvalues.iter().enumerate() {
        if *lambda > tol {
            sig.p += 1;
        } else if *lambda < -tol {
            sig.q += 1;
        } else {
            sig.k += 1;
            radical.push(eig.eigenvectors.column(idx).into_owned());
        }
    }
    Ok((sig, radical))
}

/// The Killing form restricted to `m`, with its signature and radical.
#[derive(Debug, Clone, PartialEq)]
pub struct KillingData {
    matrix: DMatrix<f64>,
    signature: Signature,
    radical_basis: Vec<DVector<f64>>,
    tol: f64,
}

impl KillingData {
    pub fn from_matrix(matrix: DMatrix<f64>, tol: Option<f64>) -> Result<Self> {
        let tol = tol.unwrap_or_else(|| default_killing_tol(&matrix));
        let (signature, radical_basis) = killing_signature(&matrix, tol)?;
        // exact symmetry for downstream quadratic forms
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self {
            matrix,
            signature,
            radical_basis,
            tol,
        })
    }

    /// Killing form of `algebra` restricted to `m`, in `m`-coordinates.
    pub fn restricted(algebra: &LieAlgebra, decomposition: &ReductiveDecomposition) -> Self {
        let full = algebra.killing_matrix();
        let m = decomposition.m_basis();
        let restricted = m.transpose() * full * m;
        Self::from_matrix(restricted, None).expect("Killing matrix is symmetric")
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn radical_basis(&self) -> &[DVector<f64>] {
        &self.radical_basis
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn form(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.matrix * y))
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.form(x, x)
    }

    /// Null-cone cutoff for `K(x, x)` at unit-size `x`: `1e-9 * max(1, ||K||)`.
    pub fn null_tol(&self) -> f64 {
        1e-9 * self.norm().max(1.0)
    }

    /// `x / sqrt(|K(x, x)|)`, landing on `K = ±1`.
    pub fn sphere_project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dim(), x.len())?;
        let value = self.value(x);
        let tol = self.null_tol() * x.norm_squared();
        if value.abs() <= tol {
            return Err(Error::NullCone { value, tol });
        }
        Ok(x / value.abs().sqrt())
    }
}
