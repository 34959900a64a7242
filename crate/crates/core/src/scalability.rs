//! Standard scalability: find `cᵢ ≥ 0` with `Σ cᵢ² vᵢvᵢᵀ` equal to the
//! identity (or to a projection `P`), posed as nonnegative least squares.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{verify_parseval, Frame, ParsevalTarget, VerificationReport};
use crate::nnls::nnls;

const WEIGHT_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Constants `cᵢ ≥ 0` with `{cᵢvᵢ}` Parseval for the target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StandardScaling {
    pub constants: Vec<f64>,
    /// `‖Σ cᵢ² vᵢvᵢᵀ − target‖_F`.
    pub residual: f64,
    pub target_rank: usize,
}

impl StandardScaling {
    pub fn scaled_vectors(&self, frame: &Frame) -> Vec<DVector<f64>> {
        frame.vectors().iter().zip(&self.constants).map(|(x, c)| x * *c).collect()
    }

    /// Direct Parseval check of `{cᵢxᵢ}` on ℝⁿ.
    pub fn verify(&self, frame: &Frame, tol: f64) -> Result<VerificationReport> {
        if self.constants.len() != frame.len() {
            return Err(Error::InvalidArgument(format!(
                "{} constants for {} vectors",
                self.constants.len(),
                frame.len()
            )));
        }
        verify_parseval(&self.scaled_vectors(frame), ParsevalTarget::Identity(frame.dim()), tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Certificate {
    /// Every vector lies in one open quadrant of a 2-dimensional range.
    #[serde(rename = "open-quadrant")]
    OpenQuadrant,
    /// The NNLS optimum stays above tolerance.
    #[serde(rename = "residual-infeasible")]
    ResidualInfeasible,
}

impl Certificate {
    pub fn tag(&self) -> &'static str {
        match self {
            Certificate::OpenQuadrant => "open-quadrant",
            Certificate::ResidualInfeasible => "residual-infeasible",
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalabilityVerdict {
    pub feasible: bool,
    pub scaling: Option<StandardScaling>,
    pub certificate: Option<Certificate>,
    /// Best residual found, feasible or not.
    pub residual: f64,
    /// False if the NNLS iteration cap was reached.
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Decides whether `{vᵢ}` can be scaled to a Parseval frame for the target.
///
/// When the solution set is not a single point, the returned weights
/// `wᵢ = cᵢ²‖vᵢ‖²` are the minimum-norm feasible ones, so repeated or
/// interchangeable vectors share the weight evenly.
pub fn solve_standard_scaling(vectors: &[DVector<f64>], target: ParsevalTarget<'_>, tol: f64) -> Result<ScalabilityVerdict> {
    solve_restricted(vectors, target, None, true, tol)
}

/// Like [`solve_standard_scaling`] but returns the active-set vertex
/// solution, which has as few nonzero constants as NNLS finds.
pub(crate) fn solve_standard_scaling_sparse(
    vectors: &[DVector<f64>],
    target: ParsevalTarget<'_>,
    tol: f64,
) -> Result<ScalabilityVerdict> {
    solve_restricted(vectors, target, None, false, tol)
}

/// Like [`solve_standard_scaling`] with `cᵢ` pinned to zero wherever
/// `allowed[i]` is false.
pub fn solve_standard_scaling_restricted(
    vectors: &[DVector<f64>],
    target: ParsevalTarget<'_>,
    allowed: &[bool],
    tol: f64,
) -> Result<ScalabilityVerdict> {
    if allowed.len() != vectors.len() {
        return Err(Error::InvalidArgument(format!("support mask has {} entries for {} vectors", allowed.len(), vectors.len())));
    }
    solve_restricted(vectors, target, Some(allowed), true, tol)
}

fn solve_restricted(
    vectors: &[DVector<f64>],
    target: ParsevalTarget<'_>,
    allowed: Option<&[bool]>,
    spread: bool,
    tol: f64,
) -> Result<ScalabilityVerdict> {
    if vectors.is_empty() {
        return Err(Error::Empty("no vectors to scale"));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = target.dim();
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(Error::DimensionMismatch { index, expected: n, found: v.len() });
        }
    }

    let mut warnings = Vec::new();
    let vectors: Vec<DVector<f64>> = match target {
        ParsevalTarget::Identity(_) => vectors.to_vec(),
        ParsevalTarget::Range(p) => vectors
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let leak = p.apply_complement(v).norm();
                if leak > tol {
                    warnings.push(format!("vector {i} left the target range by {leak:e}; projected"));
                    p.apply(v)
                } else {
                    v.clone()
                }
            })
            .collect(),
    };

    // Columns are unit-normalized for conditioning; cᵢ = √wᵢ / ‖vᵢ‖.
    // Weights at round-off level are dropped so supports stay exact.
    let norms: Vec<f64> = vectors.iter().map(|v| v.norm()).collect();
    let m = vectors.len();
    let rows = n * (n + 1) / 2;
    let mut a = DMatrix::zeros(rows, m);
    for (i, v) in vectors.iter().enumerate() {
        if norms[i] > 0.0 {
            let u = v / norms[i];
            a.set_column(i, &vectorize_outer(&u));
        }
    }
    let b = vectorize_sym(&target.matrix());
    let mask: Vec<bool> = (0..m).map(|i| norms[i] > 0.0 && allowed.is_none_or(|s| s[i])).collect();
    let sol = nnls(&a, &b, Some(&mask), 50 * m.max(1));

    let weights_to_scaling = |x: &DVector<f64>| -> Result<(Vec<f64>, f64)> {
        let constants: Vec<f64> =
            (0..m).map(|i| if mask[i] && x[i] > WEIGHT_FLOOR { x[i].sqrt() / norms[i] } else { 0.0 }).collect();
        let scaled: Vec<DVector<f64>> = vectors.iter().zip(&constants).map(|(v, c)| v * *c).collect();
        let residual = verify_parseval(&scaled, target, tol)?.residual;
        Ok((constants, residual))
    };
    let (mut constants, mut residual) = weights_to_scaling(&sol.x)?;

    let feasible = residual <= tol;
    if feasible && spread && m > 1 {
        if let Some(w) = min_norm_weights(&a, &sol.x, &mask) {
            let (c, r) = weights_to_scaling(&w)?;
            if r <= tol {
                (constants, residual) = (c, r);
            }
        }
    }
    let (scaling, certificate) = if feasible {
        (Some(StandardScaling { constants, residual, target_rank: target_rank(target) }), None)
    } else {
        (None, Some(infeasibility_certificate(&vectors, target)))
    };
    Ok(ScalabilityVerdict { feasible, scaling, certificate, residual, converged: sol.converged, warnings })
}

/// Minimum-norm `w ≥ 0` with the same `Aw` as the feasible `basic`, over
/// the masked columns, or `None` when the solution is unique.
///
/// With `N` an orthonormal null-space basis and `w₀ = basic − NNᵀ·basic`,
/// every such `w` is `w₀ + Nz` and `‖w‖² = ‖w₀‖² + ‖z‖²`, so this is the
/// least-distance problem `min ‖z‖` subject to `Nz ≥ −w₀`, solved through
/// NNLS on `[Nᵀ; −w₀ᵀ] u ≈ e_last`.
fn min_norm_weights(a: &DMatrix<f64>, basic: &DVector<f64>, mask: &[bool]) -> Option<DVector<f64>> {
    let cols: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let k = cols.len();
    if k < 2 {
        return None;
    }
    // Padding to at least k rows makes the thin SVD return all of V.
    let mut sub = DMatrix::zeros(a.nrows().max(k), k);
    for (j, &i) in cols.iter().enumerate() {
        sub.view_mut((0, j), (a.nrows(), 1)).copy_from(&a.column(i));
    }
    let svd = sub.svd(false, true);
    let v_t = svd.v_t?;
    let cutoff = crate::RANK_CUTOFF * svd.singular_values.max();
    let null: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&s| svd.singular_values[s] <= cutoff)
        .map(|s| v_t.row(s).transpose())
        .collect();
    if null.is_empty() {
        return None;
    }
    let mut w0 = DVector::from_iterator(k, cols.iter().map(|&i| basic[i]));
    for v in &null {
        w0 -= v * v.dot(&w0);
    }
    let d = null.len();
    let mut e = DMatrix::zeros(d + 1, k);
    for (r, v) in null.iter().enumerate() {
        e.row_mut(r).copy_from(&v.transpose());
    }
    e.row_mut(d).copy_from(&(-&w0).transpose());
    let mut f = DVector::zeros(d + 1);
    f[d] = 1.0;
    let sol = nnls(&e, &f, None, 50 * k);
    let r = &e * &sol.x - &f;
    if !(r[d].abs() > f64::EPSILON) {
        return None;
    }
    let mut w = w0;
    for (row, v) in null.iter().enumerate() {
        w += v * (-r[row] / r[d]);
    }
    let mut full = DVector::zeros(mask.len());
    for (j, &i) in cols.iter().enumerate() {
        full[i] = w[j].max(0.0);
    }
    Some(full)
}

fn target_rank(target: ParsevalTarget<'_>) -> usize {
    match target {
        ParsevalTarget::Identity(n) => n,
        ParsevalTarget::Range(p) => p.rank(),
    }
}

fn infeasibility_certificate(vectors: &[DVector<f64>], target: ParsevalTarget<'_>) -> Certificate {
    if target_rank(target) != 2 {
        return Certificate::ResidualInfeasible;
    }
    let coords: Vec<DVector<f64>> = vectors
        .iter()
        .filter(|v| v.norm() > 0.0)
        .map(|v| match target {
            ParsevalTarget::Identity(_) => v.clone(),
            ParsevalTarget::Range(p) => p.coordinates(v),
        })
        .collect();
    match open_quadrant_certificate(&coords) {
        Ok(true) => Certificate::OpenQuadrant,
        _ => Certificate::ResidualInfeasible,
    }
}

/// True when, after flipping every vector whose first nonzero coordinate is
/// negative, all vectors lie strictly inside one coordinate quadrant of ℝ².
/// A true result certifies that the family is not scalable.
pub fn open_quadrant_certificate(vectors: &[DVector<f64>]) -> Result<bool> {
    if vectors.is_empty() {
        return Err(Error::Empty("no vectors"));
    }
    let mut flipped = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != 2 {
            return Err(Error::DimensionMismatch { index, expected: 2, found: v.len() });
        }
        if v[0] == 0.0 && v[1] == 0.0 {
            return Err(Error::ZeroVector { index });
        }
        let sign = if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) { -1.0 } else { 1.0 };
        flipped.push((sign * v[0], sign * v[1]));
    }
    let first_positive = flipped.iter().all(|&(x, _)| x > 0.0);
    let second_positive = flipped.iter().all(|&(_, y)| y > 0.0);
    let second_negative = flipped.iter().all(|&(_, y)| y < 0.0);
    Ok(first_positive && (second_positive || second_negative))
}

/// Upper triangle of a symmetric matrix with off-diagonal entries weighted by
/// √2, so the Euclidean norm equals the Frobenius norm.
fn vectorize_sym(s: &DMatrix<f64>) -> DVector<f64> {
    let n = s.nrows();
    let mut out = DVector::zeros(n * (n + 1) / 2);
    let mut k = 0;
    for j in 0..n {
        for l in j..n {
            out[k] = if j == l { s[(j, j)] } else { std::f64::consts::SQRT_2 * s[(j, l)] };
            k += 1;
        }
    }
    out
}

fn vectorize_outer(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len();
    let mut out = DVector::zeros(n * (n + 1) / 2);
    let mut k = 0;
    for j in 0..n {
        for l in j..n {
            let e = v[j] * v[l];
            out[k] = if j == l { e } else { std::f64::consts::SQRT_2 * e };
            k += 1;
        }
    }
    out
}
