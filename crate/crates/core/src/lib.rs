//! Standard and piecewise scaling of finite frames in ℝⁿ.
//!
//! A frame `{xᵢ}` is *scalable* when some constants `cᵢ` make `{cᵢxᵢ}` a
//! Parseval frame, and *piecewise scalable* when an orthogonal projection `P`
//! and constants `aᵢ`, `bᵢ` make `{aᵢPxᵢ + bᵢ(I−P)xᵢ}` Parseval. This crate
//! decides the first by nonnegative least squares, verifies the second through
//! both the direct frame-operator identity and its three-condition
//! decomposition, builds explicit piecewise scalings in ℝ², ℝ³ and special
//! ℝ⁴ configurations, transports scalings under unitary maps, and reports
//! closeness obstructions that rule piecewise scalings out.
//!
//! Indices are zero-based throughout the API and the command-line tool.

// Tolerance checks are written `!(x <= tol)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod frame;
pub mod io;
mod linalg;
pub mod nnls;
pub mod obstruction;
pub mod piecewise;
pub mod projection;
pub mod scalability;
pub mod transport;

pub use error::{Error, Result};
pub use frame::{Frame, FrameBounds, ParsevalTarget, SubCondition, VerificationReport};
pub use obstruction::{DichotomyBranch, ObstructionReport, ObstructionTheorem, ScalingRef};
pub use piecewise::{PiecewiseReport, PiecewiseScaling, R3Construction, SearchOutcome};
pub use projection::OrthogonalProjection;
pub use scalability::{Certificate, ScalabilityVerdict, StandardScaling};

/// Absolute Frobenius tolerance used for Parseval and identity checks.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Relative singular-value cutoff for numerical rank decisions.
pub const RANK_CUTOFF: f64 = 1e-10;
