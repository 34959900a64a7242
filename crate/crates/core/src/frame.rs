//! Frames, frame operators, frame bounds and Parseval verification.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{columns_matrix, numerical_rank, outer_sum};
use crate::projection::OrthogonalProjection;

/// An ordered family of `m` vectors in ℝⁿ.
///
/// Index order is significant: scaling constants are attached per index, so
/// frames are never deduplicated or reordered.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    dim: usize,
    vectors: Vec<DVector<f64>>,
    labels: Option<Vec<String>>,
}

impl Frame {
    pub fn new(dim: usize, vectors: Vec<DVector<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("frame dimension must be positive".into()));
        }
        if vectors.is_empty() {
            return Err(Error::Empty("frame has no vectors"));
        }
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { index, expected: dim, found: v.len() });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self { dim, vectors, labels: None })
    }

    /// Builds a frame from coordinate rows, one row per vector.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).ok_or(Error::Empty("frame has no vectors"))?;
        let vectors = rows.iter().map(|r| DVector::from_column_slice(r.as_ref())).collect();
        Self::new(dim, vectors)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vectors.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} vectors",
                labels.len(),
                self.vectors.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors `m`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &DVector<f64> {
        &self.vectors[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.vectors.iter().map(|v| v.iter().copied().collect()).collect()
    }

    /// The n×m synthesis matrix `X` whose columns are the frame vectors.
    pub fn synthesis_matrix(&self) -> DMatrix<f64> {
        columns_matrix(self.dim, &self.vectors)
    }

    /// `S = Σ xᵢxᵢᵀ`.
    pub fn frame_operator(&self) -> DMatrix<f64> {
        outer_sum(self.dim, &self.vectors)
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.synthesis_matrix())
    }

    /// True when the vectors span ℝⁿ.
    pub fn is_frame(&self) -> bool {
        self.rank() == self.dim
    }

    pub fn frame_bounds(&self) -> FrameBounds {
        let eig = SymmetricEigen::new(self.frame_operator());
        let upper = eig.eigenvalues.max().max(0.0);
        let spanning = self.is_frame();
        let lower = if spanning { eig.eigenvalues.min() } else { 0.0 };
        let condition_number = if lower > 0.0 { upper / lower } else { f64::INFINITY };
        FrameBounds { lower, upper, condition_number, spanning }
    }

    /// The canonical Parseval frame `{S^{-1/2} xᵢ}`.
    pub fn canonical_parseval(&self) -> Result<Frame> {
        let rank = self.rank();
        if rank < self.dim {
            return Err(Error::NotSpanning { dim: self.dim, rank });
        }
        let eig = SymmetricEigen::new(self.frame_operator());
        let lmax = eig.eigenvalues.max();
        if eig.eigenvalues.min() <= crate::RANK_CUTOFF * lmax {
            return Err(Error::NotSpanning { dim: self.dim, rank });
        }
        let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
        let s_inv_half = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
        let vectors = self.vectors.iter().map(|x| &s_inv_half * x).collect();
        Ok(Frame { dim: self.dim, vectors, labels: self.labels.clone() })
    }

    /// `{Uxᵢ}` for an orthogonal `U`.
    pub fn apply_unitary(&self, u: &DMatrix<f64>, tol: f64) -> Result<Frame> {
        check_unitary(u, self.dim, tol)?;
        let vectors = self.vectors.iter().map(|x| u * x).collect();
        Ok(Frame { dim: self.dim, vectors, labels: self.labels.clone() })
    }

    /// Unit-normalizes every vector; also returns the original norms.
    pub fn normalize_columns(&self) -> Result<(Frame, Vec<f64>)> {
        let mut norms = Vec::with_capacity(self.len());
        let mut vectors = Vec::with_capacity(self.len());
        for (index, x) in self.vectors.iter().enumerate() {
            let n = x.norm();
            if n == 0.0 {
                return Err(Error::ZeroVector { index });
            }
            norms.push(n);
            vectors.push(x / n);
        }
        Ok((Frame { dim: self.dim, vectors, labels: self.labels.clone() }, norms))
    }

    pub fn is_unit_norm(&self, tol: f64) -> bool {
        self.vectors.iter().all(|x| (x.norm() - 1.0).abs() <= tol)
    }
}

pub(crate) fn check_unitary(u: &DMatrix<f64>, dim: usize, tol: f64) -> Result<()> {
    if u.nrows() != dim || u.ncols() != dim {
        let found = if u.nrows() != dim { u.nrows() } else { u.ncols() };
        return Err(Error::DimensionMismatch { index: 0, expected: dim, found });
    }
    let residual = (u.transpose() * u - DMatrix::identity(dim, dim)).norm();
    if !(residual <= tol) {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

/// Optimal frame bounds: the extreme eigenvalues of the frame operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    /// `upper / lower`, infinite for non-spanning families.
    pub condition_number: f64,
    pub spanning: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubCondition {
    pub passed: bool,
    pub residual: f64,
}

/// Outcome of a numerical identity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    /// Frobenius norm of the defect of the main identity.
    pub residual: f64,
    pub detail: BTreeMap<String, SubCondition>,
    pub tolerance: f64,
}

impl VerificationReport {
    /// `passed` holds iff every named residual is at most `tol`.
    pub fn from_conditions(tol: f64, residual: f64, conditions: &[(&str, f64)]) -> Self {
        let detail: BTreeMap<String, SubCondition> = conditions
            .iter()
            .map(|&(name, r)| (name.to_string(), SubCondition { passed: r <= tol, residual: r }))
            .collect();
        let passed = detail.values().all(|c| c.passed);
        Self { passed, residual, detail, tolerance: tol }
    }

    pub fn condition(&self, name: &str) -> Option<SubCondition> {
        self.detail.get(name).copied()
    }
}

/// What a family of vectors should be Parseval for.
#[derive(Clone, Copy, Debug)]
pub enum ParsevalTarget<'a> {
    /// All of ℝⁿ.
    Identity(usize),
    /// The range of an orthogonal projection.
    Range(&'a OrthogonalProjection),
}

impl ParsevalTarget<'_> {
    pub fn dim(&self) -> usize {
        match self {
            ParsevalTarget::Identity(n) => *n,
            ParsevalTarget::Range(p) => p.dim(),
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        match self {
            ParsevalTarget::Identity(n) => DMatrix::identity(*n, *n),
            ParsevalTarget::Range(p) => p.matrix().clone(),
        }
    }
}

/// Checks `‖Σ vᵢvᵢᵀ − target‖_F ≤ tol`. For a projection target every `vᵢ`
/// must also lie in its range (`‖(I−P)vᵢ‖ ≤ tol`).
pub fn verify_parseval(vectors: &[DVector<f64>], target: ParsevalTarget<'_>, tol: f64) -> Result<VerificationReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = target.dim();
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(Error::DimensionMismatch { index, expected: n, found: v.len() });
        }
    }
    let defect = (outer_sum(n, vectors) - target.matrix()).norm();
    let report = match target {
        ParsevalTarget::Identity(_) => VerificationReport::from_conditions(tol, defect, &[("frame_operator", defect)]),
        ParsevalTarget::Range(p) => {
            let leak = vectors.iter().map(|v| p.apply_complement(v).norm()).fold(0.0, f64::max);
            VerificationReport::from_conditions(tol, defect, &[("frame_operator", defect), ("range_containment", leak)])
        }
    };
    Ok(report)
}
