//! Damped Gauss-Newton for square or overdetermined systems whose iterates
//! are renormalized onto a level set after every step.

use nalgebra::{DMatrix, DVector};

const STALL_RATIO: f64 = 0.9;
const STALL_STEPS: usize = 5;

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub x: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `|r(x)|` from `x0`, using minimum-norm steps `-J⁺ r` with
/// backtracking and a Levenberg-Marquardt fallback.
///
/// `eval` returns `None` where the system is undefined; `normalize` maps a
/// trial point back onto the constraint set (or rejects it).
pub(crate) fn gauss_newton<E, N>(
    eval: E,
    normalize: N,
    x0: DVector<f64>,
    max_iter: usize,
    tol: f64,
) -> NewtonOutcome
where
    E: Fn(&DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)>,
    N: Fn(DVector<f64>) -> Option<DVector<f64>>,
{
    let fail = |x: DVector<f64>, iterations| NewtonOutcome {
        x,
        residual: f64::INFINITY,
        iterations,
        converged: false,
    };
    let Some(mut x) = normalize(x0.clone()) else {
        return fail(x0, 0);
    };
    let Some((mut r, mut jac)) = eval(&x) else {
        return fail(x, 0);
    };
    let mut norm = r.norm();
    let mut slow = 0;
    for it in 0..max_iter {
        if norm <= tol {
            return NewtonOutcome {
                x,
                residual: norm,
                iterations: it,
                converged: true,
            };
        }
        let step = min_norm_step(&jac, &r);
        let mut accepted = None;
        if let Some(step) = step {
            let mut t = 1.0;
            for _ in 0..24 {
                if let Some(trial) = normalize(&x + &step * t) {
                    if let Some((rt, jt)) = eval(&trial) {
                        let nt = rt.norm();
                        if nt < norm {
                            accepted = Some((trial, rt, jt, nt));
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
        }
        if accepted.is_none() {
            let mut mu = norm.max(1e-12);
            for _ in 0..12 {
                if let Some(step) = lm_step(&jac, &r, mu) {
                    if let Some(trial) = normalize(&x + step) {
                        if let Some((rt, jt)) = eval(&trial) {
                            let nt = rt.norm();
                            if nt < norm {
                                accepted = Some((trial, rt, jt, nt));
                                break;
                            }
                        }
                    }
                }
                mu *= 10.0;
            }
        }
        match accepted {
            Some((xn, rn, jn, nn)) => {
                // a run of barely-decreasing steps means a nonzero local minimum
                slow = if nn > STALL_RATIO * norm { slow + 1 } else { 0 };
                if slow >= STALL_STEPS && nn > 1e3 * tol {
                    return NewtonOutcome {
                        x: xn,
                        residual: nn,
                        iterations: it + 1,
                        converged: false,
                    };
                }
                x = xn;
                r = rn;
                jac = jn;
                norm = nn;
            }
            None => {
                return NewtonOutcome {
                    x,
                    residual: norm,
                    iterations: it + 1,
                    converged: norm <= tol,
                }
            }
        }
    }
    NewtonOutcome {
        converged: norm <= tol,
        x,
        residual: norm,
        iterations: max_iter,
    }
}

fn min_norm_step(jac: &DMatrix<f64>, r: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = jac.clone().svd(true, true);
    let eps = 1e-14 * svd.singular_values.max();
    svd.solve(r, eps).ok().map(|s| -s)
}

fn lm_step(jac: &DMatrix<f64>, r: &DVector<f64>, mu: f64) -> Option<DVector<f64>> {
    let n = jac.ncols();
    let lhs = jac.tr_mul(jac) + DMatrix::identity(n, n) * mu;
    let rhs = jac.tr_mul(r);
    lhs.cholesky().map(|c| -c.solve(&rhs))
}

/// Right singular vectors spanning the numerical kernel of `jac`
/// (singular values below `rel_tol * σ_max`), padding wide matrices so the
/// whole kernel is represented.
pub(crate) fn numerical_kernel(jac: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let cols = jac.ncols();
    let padded = if jac.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, jac.nrows()).copy_from(jac);
        p
    } else {
        jac.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let cutoff = rel_tol * svd.singular_values.max().max(f64::MIN_POSITIVE);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= cutoff)
        .map(|(i, _)| vt.row(i).transpose())
        .collect()
}
