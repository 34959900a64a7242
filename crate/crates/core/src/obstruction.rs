//! Closeness obstructions for unit-norm frames and bounds on scaling
//! constants.

use std::fmt;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{Frame, VerificationReport};
use crate::piecewise::{verify_piecewise, PiecewiseScaling};
use crate::projection::OrthogonalProjection;
use crate::scalability::StandardScaling;

/// Unit-norm gate for the obstruction hypotheses.
pub const UNIT_NORM_TOL: f64 = 1e-8;
/// Closeness threshold for rank-two projections in ℝ⁴ (strict).
pub const R4_RANK2_THRESHOLD: f64 = 1.0 / 8.0;
/// Closeness threshold for ranks `2..=n-2` in any dimension (strict).
pub const RANK_K_THRESHOLD: f64 = 1.0 / 64.0;

// Slack for rounding in the dichotomy inequalities.
const ROUNDING_SLACK: f64 = 1e-12;

/// Largest pairwise distance `max_{i≠j} ‖xᵢ − xⱼ‖` and a pair attaining it.
pub fn pairwise_closeness(frame: &Frame) -> Result<(f64, (usize, usize))> {
    if frame.len() < 2 {
        return Err(Error::InvalidArgument("pairwise closeness needs at least two vectors".into()));
    }
    let xs = frame.vectors();
    let mut best = (0.0, (0, 1));
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let d = (&xs[i] - &xs[j]).norm();
            if d > best.0 {
                best = (d, (i, j));
            }
        }
    }
    Ok(best)
}

/// Which alternative of the closeness dichotomy holds for a projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DichotomyBranch {
    /// `⟨Pxᵢ,Pxⱼ⟩ ≥ 1/2 − 4ε` for all `i ≠ j`.
    Range,
    /// `⟨(I−P)xᵢ,(I−P)xⱼ⟩ ≥ 1/2 − ε` for all `i ≠ j`.
    Complement,
    Both,
}

/// For a unit-norm frame with pairwise distances at most `epsilon < 1`,
/// either all projected inner products `⟨Pxᵢ,Pxⱼ⟩` are at least `1/2 − 4ε`
/// or all complement inner products are at least `1/2 − ε`.
pub fn dichotomy_check(frame: &Frame, p: &OrthogonalProjection, epsilon: f64) -> Result<DichotomyBranch> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Hypothesis(format!("closeness bound must lie in (0, 1), got {epsilon}")));
    }
    if !frame.is_unit_norm(UNIT_NORM_TOL) {
        return Err(Error::Hypothesis("frame is not unit-norm".into()));
    }
    if p.dim() != frame.dim() {
        return Err(Error::DimensionMismatch { index: 0, expected: frame.dim(), found: p.dim() });
    }
    if frame.len() >= 2 {
        let (closeness, _) = pairwise_closeness(frame)?;
        if closeness > epsilon {
            return Err(Error::Hypothesis(format!("pairwise closeness {closeness} exceeds {epsilon}")));
        }
    }
    let pp: Vec<DVector<f64>> = frame.vectors().iter().map(|x| p.apply(x)).collect();
    let qq: Vec<DVector<f64>> = frame.vectors().iter().map(|x| p.apply_complement(x)).collect();
    let min_off_diagonal = |v: &[DVector<f64>]| {
        let mut min = f64::INFINITY;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                min = min.min(v[i].dot(&v[j]));
            }
        }
        min
    };
    let range = min_off_diagonal(&pp) >= 0.5 - 4.0 * epsilon - ROUNDING_SLACK;
    let complement = min_off_diagonal(&qq) >= 0.5 - epsilon - ROUNDING_SLACK;
    match (range, complement) {
        (true, true) => Ok(DichotomyBranch::Both),
        (true, false) => Ok(DichotomyBranch::Range),
        (false, true) => Ok(DichotomyBranch::Complement),
        (false, false) => Err(Error::Inconsistency("neither branch of the closeness dichotomy holds".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ObstructionTheorem {
    /// Unit-norm frames of ℝ⁴ with closeness below 1/8: no rank-2 projection.
    #[serde(rename = "cor-4.4")]
    R4RankTwo,
    /// Unit-norm frames with closeness below 1/64: no projection of rank
    /// `2..=n-2`.
    #[serde(rename = "rank-k-1/64")]
    RankK,
    #[serde(rename = "none")]
    None,
}

impl ObstructionTheorem {
    pub fn tag(&self) -> &'static str {
        match self {
            ObstructionTheorem::R4RankTwo => "cor-4.4",
            ObstructionTheorem::RankK => "rank-k-1/64",
            ObstructionTheorem::None => "none",
        }
    }
}

impl fmt::Display for ObstructionTheorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Projection ranks ruled out for a clustered unit-norm frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub epsilon: f64,
    pub applicable_ranks: Vec<usize>,
    pub theorem: ObstructionTheorem,
    pub unit_norm: bool,
    /// A pair attaining `epsilon`.
    pub farthest_pair: Option<(usize, usize)>,
}

/// Certifies the projection ranks for which no piecewise scaling exists,
/// from pairwise closeness alone. Thresholds are strict.
pub fn closeness_obstruction(frame: &Frame) -> ObstructionReport {
    let unit_norm = frame.is_unit_norm(UNIT_NORM_TOL);
    let (epsilon, pair) = match pairwise_closeness(frame) {
        Ok((e, pair)) => (e, Some(pair)),
        Err(_) => (0.0, None),
    };
    let n = frame.dim();
    let (theorem, applicable_ranks) = if !unit_norm || pair.is_none() || n < 4 {
        (ObstructionTheorem::None, Vec::new())
    } else if n == 4 && epsilon < R4_RANK2_THRESHOLD {
        (ObstructionTheorem::R4RankTwo, vec![2])
    } else if epsilon < RANK_K_THRESHOLD {
        (ObstructionTheorem::RankK, (2..=n - 2).collect())
    } else {
        (ObstructionTheorem::None, Vec::new())
    };
    ObstructionReport { epsilon, applicable_ranks, theorem, unit_norm, farthest_pair: pair }
}

/// `(‖x/‖x‖ − y/‖y‖‖, 32‖x − y‖)` for `1/4 ≤ ‖x‖, ‖y‖ ≤ 1` and
/// `‖x − y‖ < 1/16`; the first never exceeds the second.
pub fn normalization_gap_bound(x: &DVector<f64>, y: &DVector<f64>) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { index: 1, expected: x.len(), found: y.len() });
    }
    let (nx, ny) = (x.norm(), y.norm());
    for n in [nx, ny] {
        if !(0.25..=1.0).contains(&n) {
            return Err(Error::Hypothesis(format!("norm {n} outside [1/4, 1]")));
        }
    }
    let d = (x - y).norm();
    if d >= 1.0 / 16.0 {
        return Err(Error::Hypothesis(format!("distance {d} is not below 1/16")));
    }
    Ok(((x / nx - y / ny).norm(), 32.0 * d))
}

#[derive(Clone, Copy, Debug)]
pub enum ScalingRef<'a> {
    Standard(&'a StandardScaling),
    Piecewise(&'a PiecewiseScaling),
}

/// Checks the scaling-constant inequalities on a verified scaling of a
/// unit-norm frame. Each detail entry is the amount by which an inequality
/// is violated (zero when it holds).
///
/// Standard: `max cᵢ² ≤ 1`, `Σ cᵢ² = n`, and `|cᵢ| = 1` forces `xᵢ ⊥ xⱼ`
/// for every other `j` with `cⱼ ≠ 0`. Piecewise: `n ≤ Σ max(aᵢ², bᵢ²)`,
/// `|aᵢbᵢ| ≤ √(aᵢ²+bᵢ²)` and `min(|aᵢ|,|bᵢ|) ≤ √2`.
pub fn check_constant_bounds(frame: &Frame, scaling: ScalingRef<'_>, tol: f64) -> Result<VerificationReport> {
    if !frame.is_unit_norm(tol.max(UNIT_NORM_TOL)) {
        return Err(Error::Hypothesis("frame is not unit-norm".into()));
    }
    let n = frame.dim() as f64;
    match scaling {
        ScalingRef::Standard(s) => {
            let verified = s.verify(frame, tol)?;
            if !verified.passed {
                return Err(Error::Hypothesis(format!("scaling does not verify: residual {:e}", verified.residual)));
            }
            let c = &s.constants;
            let max_sq = c.iter().map(|c| c * c).fold(0.0, f64::max);
            let sum_sq: f64 = c.iter().map(|c| c * c).sum();
            let xs = frame.vectors();
            let mut orthogonality = 0.0f64;
            for i in 0..c.len() {
                if (c[i].abs() - 1.0).abs() > tol {
                    continue;
                }
                // Σ_{j≠i} cⱼ²⟨xᵢ,xⱼ⟩² = 1 − cᵢ² + xᵢᵀ(S − I)xᵢ
                let allowance = ((1.0 - c[i] * c[i]).abs() + verified.residual).sqrt() + 10.0 * tol;
                for j in (0..c.len()).filter(|&j| j != i && c[j] != 0.0) {
                    let v = (c[j] * xs[i].dot(&xs[j])).abs();
                    orthogonality = orthogonality.max(v - allowance);
                }
            }
            Ok(VerificationReport::from_conditions(
                tol,
                verified.residual,
                &[
                    ("max_c_squared", (max_sq - 1.0).max(0.0)),
                    ("sum_c_squared", (sum_sq - n).abs()),
                    ("unit_constant_orthogonality", orthogonality.max(0.0)),
                ],
            ))
        }
        ScalingRef::Piecewise(ps) => {
            let verified = verify_piecewise(frame, ps, tol)?;
            if !verified.passed {
                return Err(Error::Hypothesis(format!("scaling does not verify: residual {:e}", verified.direct_residual)));
            }
            let sum_max: f64 = ps.a.iter().zip(&ps.b).map(|(a, b)| (a * a).max(b * b)).sum();
            let mut product = 0.0f64;
            let mut minimum = 0.0f64;
            for (a, b) in ps.a.iter().zip(&ps.b) {
                product = product.max((a * b).abs() - (a * a + b * b).sqrt());
                minimum = minimum.max(a.abs().min(b.abs()) - std::f64::consts::SQRT_2);
            }
            Ok(VerificationReport::from_conditions(
                tol,
                verified.direct_residual,
                &[
                    ("sum_max_squares", (n - sum_max).max(0.0)),
                    ("product_bound", product.max(0.0)),
                    ("min_bound", minimum.max(0.0)),
                ],
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::ParsevalTarget;
    use crate::piecewise::{construct_from_orthogonal_split, construct_r3};
    use crate::scalability::solve_standard_scaling;

    fn f(rows: &[&[f64]]) -> Frame {
        Frame::from_rows(rows).unwrap()
    }

    #[test]
    fn closeness_examples() {
        let (d, pair) = pairwise_closeness(&f(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(pair, (0, 1));
        assert_eq!(pairwise_closeness(&f(&[&[0.6, 0.8], &[0.6, 0.8]])).unwrap().0, 0.0);
        assert!(pairwise_closeness(&f(&[&[1.0, 0.0]])).is_err());
    }

    #[test]
    fn repeated_vector_satisfies_dichotomy() {
        let frame = f(&[&[0.6, 0.8, 0.0], &[0.6, 0.8, 0.0]]);
        for seed in 0..10 {
            let p = OrthogonalProjection::random(3, 1 + (seed as usize % 2), seed).unwrap();
            assert!(dichotomy_check(&frame, &p, 1e-9).is_ok());
        }
    }

    #[test]
    fn dichotomy_gates() {
        let frame = f(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let p = OrthogonalProjection::leading(1, 2).unwrap();
        assert!(matches!(dichotomy_check(&frame, &p, 1.0), Err(Error::Hypothesis(_))));
        assert!(matches!(dichotomy_check(&frame, &p, 0.5), Err(Error::Hypothesis(_))));
        let long = f(&[&[2.0, 0.0], &[2.0, 0.0]]);
        assert!(matches!(dichotomy_check(&long, &p, 0.5), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn obstruction_in_low_dimension_is_empty() {
        let frame = f(&[&[1.0, 0.0, 0.0], &[0.999, 0.0447, 0.0]]);
        let frame = frame.normalize_columns().unwrap().0;
        let rep = closeness_obstruction(&frame);
        assert!(rep.applicable_ranks.is_empty());
        assert_eq!(rep.theorem, ObstructionTheorem::None);
    }

    #[test]
    fn obstruction_thresholds_are_strict() {
        // two unit vectors at distance exactly 2 sin(θ/2)
        let at = |d: f64, n: usize| {
            let theta = 2.0 * (d / 2.0).asin();
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            x[0] = 1.0;
            y[0] = theta.cos();
            y[1] = theta.sin();
            Frame::from_rows(&[x, y]).unwrap()
        };
        assert_eq!(closeness_obstruction(&at(0.1, 4)).theorem, ObstructionTheorem::R4RankTwo);
        assert_eq!(closeness_obstruction(&at(0.13, 4)).theorem, ObstructionTheorem::None);
        let rep = closeness_obstruction(&at(0.01, 6));
        assert_eq!(rep.theorem, ObstructionTheorem::RankK);
        assert_eq!(rep.applicable_ranks, vec![2, 3, 4]);
        assert_eq!(closeness_obstruction(&at(0.02, 6)).theorem, ObstructionTheorem::None);
        // not unit-norm
        let scaled = Frame::from_rows(&[[2.0, 0.0, 0.0, 0.0], [2.0, 0.01, 0.0, 0.0]]).unwrap();
        assert_eq!(closeness_obstruction(&scaled).theorem, ObstructionTheorem::None);
    }

    #[test]
    fn normalization_gap_examples() {
        let x = DVector::from_vec(vec![0.5, 0.5]);
        assert_eq!(normalization_gap_bound(&x, &x).unwrap(), (0.0, 0.0));
        let (lhs, bound) = normalization_gap_bound(&DVector::from_vec(vec![1.0, 0.0]), &DVector::from_vec(vec![0.99, 0.05])).unwrap();
        assert!(lhs <= bound);
        let short = DVector::from_vec(vec![0.2, 0.0]);
        assert!(matches!(normalization_gap_bound(&short, &short), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn standard_bounds_on_orthonormal_basis() {
        let frame = f(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let s = solve_standard_scaling(frame.vectors(), ParsevalTarget::Identity(3), 1e-8).unwrap().scaling.unwrap();
        let rep = check_constant_bounds(&frame, ScalingRef::Standard(&s), 1e-8).unwrap();
        assert!(rep.passed, "{rep:?}");
        let sum: f64 = s.constants.iter().map(|c| c * c).sum();
        assert!((sum - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unit_constant_with_zero_partner() {
        // c = (1, 1, 0): x₁ is not orthogonal to x₃, but c₃ = 0
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let frame = f(&[&[1.0, 0.0], &[0.0, 1.0], &[r, r]]);
        let s = solve_standard_scaling(frame.vectors(), ParsevalTarget::Identity(2), 1e-8).unwrap().scaling.unwrap();
        assert!(check_constant_bounds(&frame, ScalingRef::Standard(&s), 1e-8).unwrap().passed);
    }

    #[test]
    fn piecewise_bounds_with_large_constants() {
        let eps = 0.1;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let frame = f(&[&[eps, (1.0 - eps * eps).sqrt()], &[r, r]]);
        let p = OrthogonalProjection::leading(1, 2).unwrap();
        let ps = construct_from_orthogonal_split(&frame, &p, &[0], &[1], 1e-8).unwrap();
        let rep = check_constant_bounds(&frame, ScalingRef::Piecewise(&ps), 1e-8).unwrap();
        assert!(rep.passed);
        let sum_max: f64 = ps.a.iter().zip(&ps.b).map(|(a, b)| (a * a).max(b * b)).sum();
        assert!((sum_max - 102.0).abs() < 1e-9);
    }

    #[test]
    fn piecewise_bounds_on_spatial_fixture() {
        let h = 3f64.sqrt() / 2.0;
        let frame = f(&[&[1.0, 0.0, 0.0], &[0.5, h, 0.0], &[0.0, 0.0, 1.0]]);
        let ps = construct_r3(&frame, 1e-8).unwrap();
        assert!(check_constant_bounds(&frame, ScalingRef::Piecewise(&ps), 1e-8).unwrap().passed);
    }

    #[test]
    fn unverified_scaling_is_rejected() {
        let frame = f(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let s = StandardScaling { constants: vec![2.0, 1.0], residual: 0.0, target_rank: 2 };
        assert!(matches!(check_constant_bounds(&frame, ScalingRef::Standard(&s), 1e-8), Err(Error::Hypothesis(_))));
    }
}
