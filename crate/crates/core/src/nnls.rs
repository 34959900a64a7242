//! Active-set nonnegative least squares (Lawson–Hanson).

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// `‖Ax − b‖₂` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit before the KKT conditions held.
    pub converged: bool,
}

/// Minimizes `‖Ax − b‖₂` subject to `x ≥ 0`.
///
/// Columns listed as `false` in `allowed` are pinned at zero. `max_iter`
/// bounds the total number of least-squares subproblem solves.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, allowed: Option<&[bool]>, max_iter: usize) -> NnlsSolution {
    let n = a.ncols();
    assert_eq!(a.nrows(), b.len(), "row count of A must match b");
    if let Some(mask) = allowed {
        assert_eq!(mask.len(), n, "support mask length must match columns");
    }
    let allowed = |j: usize| allowed.is_none_or(|m| m[j]);

    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    // Columns whose entry just failed to become positive; cleared after any
    // step that moves x.
    let mut blocked = vec![false; n];
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    let w_tol = 10.0 * f64::EPSILON * scale * (a.nrows().max(n) as f64) * (b.norm().max(1.0));
    let mut iterations = 0;
    let mut converged = true;

    loop {
        let w = a.tr_mul(&(b - a * &x));
        let candidate = (0..n)
            .filter(|&j| !passive[j] && !blocked[j] && allowed(j) && w[j] > w_tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(j) = candidate else { break };
        if iterations >= max_iter {
            converged = false;
            break;
        }
        passive[j] = true;

        let mut first_inner = true;
        loop {
            iterations += 1;
            let s = solve_passive(a, b, &passive);
            if (0..n).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                x = s;
                blocked.iter_mut().for_each(|f| *f = false);
                break;
            }
            // Step toward s until the first passive coordinate hits zero.
            let alpha = (0..n)
                .filter(|&i| passive[i] && s[i] <= 0.0)
                .map(|i| x[i] / (x[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            if first_inner && alpha == 0.0 && s[j] <= 0.0 {
                passive[j] = false;
                blocked[j] = true;
                break;
            }
            first_inner = false;
            x += (s - &x) * alpha;
            for i in 0..n {
                if passive[i] && x[i] <= 0.0 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            blocked.iter_mut().for_each(|f| *f = false);
            if iterations >= max_iter {
                break;
            }
        }
        if iterations >= max_iter {
            converged = (0..n).all(|i| passive[i] || !allowed(i) || a.column(i).dot(&(b - a * &x)) <= w_tol);
            break;
        }
    }
    let residual = (a * &x - b).norm();
    NnlsSolution { x, residual, iterations, converged }
}

/// Unconstrained least squares on the passive columns, zeros elsewhere.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..a.ncols()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(cols.iter());
    let svd = sub.svd(true, true);
    let smax = svd.singular_values.max();
    let sol = svd
        .solve(b, 1e-12 * smax)
        .expect("SVD factors were requested");
    let mut out = DVector::zeros(a.ncols());
    for (k, &j) in cols.iter().enumerate() {
        out[j] = sol[k];
    }
    out
}
