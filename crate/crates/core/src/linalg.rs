use nalgebra::{DMatrix, DVector};

use crate::RANK_CUTOFF;

/// Σ vᵢvᵢᵀ over the given vectors.
pub(crate) fn outer_sum<'a, I>(dim: usize, vectors: I) -> DMatrix<f64>
where
    I: IntoIterator<Item = &'a DVector<f64>>,
{
    let mut s = DMatrix::zeros(dim, dim);
    for v in vectors {
        s.ger(1.0, v, v, 1.0);
    }
    s
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Numerical rank of an arbitrary matrix: singular values above
/// `RANK_CUTOFF · σ_max`.
pub(crate) fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_CUTOFF * smax).count()
}

/// Gram–Schmidt with a second reorthogonalization pass. Vectors whose
/// remainder falls below `RANK_CUTOFF` times the largest input norm are
/// dropped, so the output spans the same space as the input.
pub(crate) fn orthonormalize(vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let norm = r.norm();
        if norm > RANK_CUTOFF * scale {
            basis.push(r / norm);
        }
    }
    basis
}

/// Unit vector with its first non-negligible coordinate made positive.
pub(crate) fn canonical_sign(mut v: DVector<f64>) -> DVector<f64> {
    let scale = v.amax();
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-12 * scale).copied() {
        if first < 0.0 {
            v.neg_mut();
        }
    }
    v
}

/// Orthonormal basis of the orthogonal complement of an orthonormal set.
pub(crate) fn complete_basis(dim: usize, basis: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut all: Vec<DVector<f64>> = basis.to_vec();
    let mut extra = Vec::new();
    // Adding canonical vectors in order keeps the completion deterministic.
    for j in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut r = DVector::zeros(dim);
        r[j] = 1.0;
        for _ in 0..2 {
            for q in &all {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let norm = r.norm();
        if norm > 1e-6 {
            let q = r / norm;
            all.push(q.clone());
            extra.push(q);
        }
    }
    extra
}

pub(crate) fn columns_matrix(dim: usize, vectors: &[DVector<f64>]) -> DMatrix<f64> {
    if vectors.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    DMatrix::from_columns(vectors)
}
