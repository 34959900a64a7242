//! Unitary transport of piecewise scalings.
//!
//! If `UP = QU` for a unitary `U`, a `P`-piecewise scaling of `{xᵢ}` is a
//! `Q`-piecewise scaling of `{Uxᵢ}` with the same constants.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::frame::{check_unitary, Frame};
use crate::piecewise::PiecewiseScaling;
use crate::projection::OrthogonalProjection;

/// Residual bound for the defining identities of a constructed intertwiner.
pub const INTERTWINER_TOL: f64 = 1e-10;

/// A unitary `U` with `UP = QU`, mapping an orthonormal basis of range(P)
/// (completed to ℝⁿ) onto one of range(Q). Returns the identity when
/// `P = Q`.
pub fn intertwiner(p: &OrthogonalProjection, q: &OrthogonalProjection) -> Result<DMatrix<f64>> {
    let n = p.dim();
    if q.dim() != n {
        return Err(Error::DimensionMismatch { index: 0, expected: n, found: q.dim() });
    }
    if p.rank() != q.rank() {
        return Err(Error::RankMismatch { left: p.rank(), right: q.rank() });
    }
    if p.matrix() == q.matrix() {
        return Ok(DMatrix::identity(n, n));
    }
    let (pc, qc) = (p.complement(), q.complement());
    let mut u = DMatrix::zeros(n, n);
    for (from, to) in p.range_basis().iter().zip(q.range_basis()).chain(pc.range_basis().iter().zip(qc.range_basis())) {
        u.ger(1.0, to, from, 1.0);
    }
    let unitarity = (u.transpose() * &u - DMatrix::identity(n, n)).norm();
    let intertwining = (&u * p.matrix() - q.matrix() * &u).norm();
    if unitarity > INTERTWINER_TOL || intertwining > INTERTWINER_TOL {
        return Err(Error::Inconsistency(format!(
            "intertwiner residuals {unitarity:e} (unitarity), {intertwining:e} (UP = QU)"
        )));
    }
    Ok(u)
}

/// `(U·frame, {Q = UPUᵀ, same a, same b})`.
pub fn transport_scaling(frame: &Frame, ps: &PiecewiseScaling, u: &DMatrix<f64>, tol: f64) -> Result<(Frame, PiecewiseScaling)> {
    check_unitary(u, frame.dim(), tol)?;
    let moved = frame.apply_unitary(u, tol)?;
    let basis = ps.projection.range_basis().iter().map(|b| u * b).collect();
    let q = OrthogonalProjection::from_orthonormal(frame.dim(), basis);
    Ok((moved, PiecewiseScaling::new(q, ps.a.clone(), ps.b.clone())?))
}

/// Moves a scaling to the coordinate projection `Π_{[k]}`, `k = rank(P)`.
/// The transported projection is replaced by the exact `Π_{[k]}`.
pub fn to_canonical(frame: &Frame, ps: &PiecewiseScaling, tol: f64) -> Result<(Frame, PiecewiseScaling)> {
    let target = OrthogonalProjection::leading(ps.projection.rank(), frame.dim())?;
    let u = intertwiner(&ps.projection, &target)?;
    let (moved, transported) = transport_scaling(frame, ps, &u, tol.max(INTERTWINER_TOL))?;
    let snapped = transported.projection.snap_to(&target, INTERTWINER_TOL).ok_or_else(|| {
        Error::Inconsistency("transported projection is not the coordinate projection".into())
    })?;
    Ok((moved, PiecewiseScaling::new(snapped, transported.a, transported.b)?))
}
