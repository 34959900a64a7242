//! Orthogonal projections: canonical coordinate projections, projections onto
//! spans, seeded random projections and validation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::frame::VerificationReport;
use crate::linalg::{canonical_sign, complete_basis, orthonormalize, outer_sum, symmetrize};

/// A symmetric idempotent matrix together with its rank and an orthonormal
/// basis of its range.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalProjection {
    matrix: DMatrix<f64>,
    rank: usize,
    range_basis: Vec<DVector<f64>>,
}

impl OrthogonalProjection {
    /// Projection onto the span of `vectors`. Dependent inputs are allowed;
    /// the rank is the dimension of the span.
    pub fn from_basis(dim: usize, vectors: &[DVector<f64>]) -> Result<Self> {
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { index, expected: dim, found: v.len() });
            }
        }
        let basis = orthonormalize(vectors);
        if basis.is_empty() {
            return Err(Error::Empty("projection spanning set has no nonzero vector"));
        }
        Ok(Self::from_orthonormal(dim, basis))
    }

    /// Assumes `basis` is orthonormal.
    pub(crate) fn from_orthonormal(dim: usize, basis: Vec<DVector<f64>>) -> Self {
        let matrix = outer_sum(dim, &basis);
        Self { matrix, rank: basis.len(), range_basis: basis }
    }

    /// The coordinate projection `Π_J` onto `span{e_j : j ∈ J}` (zero-based).
    pub fn canonical(indices: &[usize], dim: usize) -> Result<Self> {
        let mut keep = vec![false; dim];
        for &j in indices {
            if j >= dim {
                return Err(Error::IndexOutOfRange { index: j, len: dim });
            }
            keep[j] = true;
        }
        let diag = DVector::from_iterator(dim, keep.iter().map(|&k| if k { 1.0 } else { 0.0 }));
        let basis = (0..dim)
            .filter(|&j| keep[j])
            .map(|j| {
                let mut e = DVector::zeros(dim);
                e[j] = 1.0;
                e
            })
            .collect::<Vec<_>>();
        Ok(Self { matrix: DMatrix::from_diagonal(&diag), rank: basis.len(), range_basis: basis })
    }

    /// `Π_{[k]}`, the projection onto the first `k` coordinates.
    pub fn leading(k: usize, dim: usize) -> Result<Self> {
        Self::canonical(&(0..k).collect::<Vec<_>>(), dim)
    }

    /// Projection onto the span of `k` orthonormalized standard Gaussian
    /// vectors drawn from a ChaCha stream seeded with `seed`.
    pub fn random(dim: usize, rank: usize, seed: u64) -> Result<Self> {
        if rank == 0 || rank >= dim {
            return Err(Error::InvalidArgument(format!("random projection rank must be in 1..={}, got {rank}", dim.saturating_sub(1))));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draws: Vec<DVector<f64>> = Vec::with_capacity(rank);
        loop {
            while draws.len() < rank {
                draws.push(DVector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(&mut rng))));
            }
            let basis = orthonormalize(&draws);
            if basis.len() == rank {
                return Ok(Self::from_orthonormal(dim, basis));
            }
            draws = basis;
        }
    }

    /// Validates `matrix` as an orthogonal projection and recovers its range
    /// basis from a symmetric eigendecomposition.
    pub fn from_matrix(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let report = validate_projection(&matrix, tol);
        if !report.passed {
            return Err(Error::InvalidProjection(format!(
                "symmetry residual {:e}, idempotence residual {:e} (tolerance {:e})",
                report.detail["symmetry"].residual, report.detail["idempotence"].residual, tol
            )));
        }
        let matrix = symmetrize(&matrix);
        let dim = matrix.nrows();
        let eig = SymmetricEigen::new(matrix.clone());
        let mut basis: Vec<(usize, DVector<f64>)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.5)
            .map(|(i, _)| {
                let v = canonical_sign(eig.eigenvectors.column(i).into_owned());
                (v.iamax(), v)
            })
            .collect();
        basis.sort_by_key(|(pivot, _)| *pivot);
        let basis: Vec<DVector<f64>> = basis.into_iter().map(|(_, v)| v).collect();
        let rank = basis.len();
        let trace_rank = matrix.trace().round();
        if trace_rank != rank as f64 {
            return Err(Error::InvalidProjection(format!("trace {} disagrees with rank {rank}", matrix.trace())));
        }
        debug_assert_eq!(dim, matrix.ncols());
        Ok(Self { matrix, rank, range_basis: basis })
    }

    /// `I − P`.
    pub fn complement(&self) -> Self {
        let dim = self.dim();
        let matrix = DMatrix::identity(dim, dim) - &self.matrix;
        let range_basis = complete_basis(dim, &self.range_basis);
        Self { matrix, rank: dim - self.rank, range_basis }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn range_basis(&self) -> &[DVector<f64>] {
        &self.range_basis
    }

    /// Rank 0 or full rank.
    pub fn is_trivial(&self) -> bool {
        self.rank == 0 || self.rank == self.dim()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// `(I − P)x`.
    pub fn apply_complement(&self, x: &DVector<f64>) -> DVector<f64> {
        x - &self.matrix * x
    }

    /// Coordinates of `x` in the range basis.
    pub fn coordinates(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.rank, self.range_basis.iter().map(|b| b.dot(x)))
    }

    /// Row-major copy of the matrix.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.matrix.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Replaces the matrix by an exact canonical projection with the same
    /// range when they agree within `tol`.
    pub(crate) fn snap_to(&self, target: &OrthogonalProjection, tol: f64) -> Option<Self> {
        ((&self.matrix - target.matrix()).norm() <= tol).then(|| target.clone())
    }
}

/// Symmetry and idempotence residuals of a square matrix.
pub fn validate_projection(matrix: &DMatrix<f64>, tol: f64) -> VerificationReport {
    if !matrix.is_square() {
        return VerificationReport::from_conditions(tol, f64::INFINITY, &[("square", f64::INFINITY)]);
    }
    let symmetry = (matrix - matrix.transpose()).norm();
    let idempotence = (matrix * matrix - matrix).norm();
    VerificationReport::from_conditions(tol, symmetry.max(idempotence), &[("symmetry", symmetry), ("idempotence", idempotence)])
}
