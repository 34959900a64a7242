//! Piecewise scalings `{aᵢPxᵢ + bᵢ(I−P)xᵢ}`: verification, explicit
//! constructors and a randomized search.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{verify_parseval, Frame, ParsevalTarget, VerificationReport};
use crate::linalg::{canonical_sign, numerical_rank, outer_sum};
use crate::projection::OrthogonalProjection;
use crate::scalability::{solve_standard_scaling, solve_standard_scaling_restricted, solve_standard_scaling_sparse};

/// A projection `P` with per-index constants for the `P`-part (`a`) and the
/// `(I−P)`-part (`b`) of each frame vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseScaling {
    pub projection: OrthogonalProjection,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PiecewiseScaling {
    pub fn new(projection: OrthogonalProjection, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidArgument(format!("{} P-side constants but {} complement constants", a.len(), b.len())));
        }
        Ok(Self { projection, a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    fn check(&self, frame: &Frame) -> Result<()> {
        if self.a.len() != frame.len() || self.b.len() != frame.len() {
            return Err(Error::InvalidArgument(format!(
                "scaling has {} constants for a frame of {} vectors",
                self.a.len(),
                frame.len()
            )));
        }
        if self.projection.dim() != frame.dim() {
            return Err(Error::DimensionMismatch { index: 0, expected: frame.dim(), found: self.projection.dim() });
        }
        Ok(())
    }

    /// `{aᵢPxᵢ}`.
    pub fn p_parts(&self, frame: &Frame) -> Result<Vec<DVector<f64>>> {
        self.check(frame)?;
        Ok(frame.vectors().iter().zip(&self.a).map(|(x, a)| self.projection.apply(x) * *a).collect())
    }

    /// `{bᵢ(I−P)xᵢ}`.
    pub fn q_parts(&self, frame: &Frame) -> Result<Vec<DVector<f64>>> {
        self.check(frame)?;
        Ok(frame.vectors().iter().zip(&self.b).map(|(x, b)| self.projection.apply_complement(x) * *b).collect())
    }

    /// `{aᵢPxᵢ + bᵢ(I−P)xᵢ}`.
    pub fn scaled_vectors(&self, frame: &Frame) -> Result<Vec<DVector<f64>>> {
        let p = self.p_parts(frame)?;
        let q = self.q_parts(frame)?;
        Ok(p.into_iter().zip(q).map(|(p, q)| p + q).collect())
    }

    /// Swaps the roles of `P` and `I − P`.
    pub fn swapped(&self) -> Self {
        Self { projection: self.projection.complement(), a: self.b.clone(), b: self.a.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseReport {
    /// The direct check `‖Σ yᵢyᵢᵀ − I‖_F ≤ tol`.
    pub passed: bool,
    /// Both sides subspace-Parseval and the cross operator below tolerance.
    pub three_condition_passed: bool,
    /// `Σaᵢ²Pxᵢ(Pxᵢ)ᵀ = P`.
    pub p_side: VerificationReport,
    /// `Σbᵢ²(I−P)xᵢ((I−P)xᵢ)ᵀ = I − P`.
    pub q_side: VerificationReport,
    pub cross_norm: f64,
    pub direct_residual: f64,
    /// Frobenius distance between the direct defect and the sum of the
    /// decomposed defects; zero in exact arithmetic.
    pub route_gap: f64,
    pub tolerance: f64,
}

/// `C = Σ aᵢbᵢ (Pxᵢ)((I−P)xᵢ)ᵀ`. The mixed term `Σ aᵢbᵢ⟨x,Pxᵢ⟩⟨x,(I−P)xᵢ⟩`
/// equals `xᵀCx`, and since `C` maps range(I−P) into range(P) it vanishes as
/// a quadratic form iff `C = 0`.
pub fn cross_operator(frame: &Frame, ps: &PiecewiseScaling) -> Result<DMatrix<f64>> {
    ps.check(frame)?;
    let n = frame.dim();
    let mut c = DMatrix::zeros(n, n);
    for (i, x) in frame.vectors().iter().enumerate() {
        let w = ps.a[i] * ps.b[i];
        if w != 0.0 {
            c.ger(w, &ps.projection.apply(x), &ps.projection.apply_complement(x), 1.0);
        }
    }
    Ok(c)
}

/// Checks a piecewise scaling both directly and through the three-condition
/// decomposition, and cross-checks the two routes.
pub fn verify_piecewise(frame: &Frame, ps: &PiecewiseScaling, tol: f64) -> Result<PiecewiseReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = frame.dim();
    let p = &ps.projection;
    let q = p.complement();
    let p_parts = ps.p_parts(frame)?;
    let q_parts = ps.q_parts(frame)?;
    let direct: Vec<DVector<f64>> = p_parts.iter().zip(&q_parts).map(|(a, b)| a + b).collect();

    let p_side = verify_parseval(&p_parts, ParsevalTarget::Range(p), tol)?;
    let q_side = verify_parseval(&q_parts, ParsevalTarget::Range(&q), tol)?;
    let c = cross_operator(frame, ps)?;
    let cross_norm = c.norm();

    let identity = DMatrix::<f64>::identity(n, n);
    let direct_defect = outer_sum(n, &direct) - &identity;
    let decomposed = (outer_sum(n, &p_parts) - p.matrix()) + (outer_sum(n, &q_parts) - q.matrix()) + &c + c.transpose();
    let route_gap = (&direct_defect - decomposed).norm();
    let direct_residual = direct_defect.norm();
    if route_gap > 10.0 * tol {
        return Err(Error::Inconsistency(format!(
            "direct and decomposed frame-operator defects differ by {route_gap:e} (tolerance {tol:e})"
        )));
    }

    Ok(PiecewiseReport {
        passed: direct_residual <= tol,
        three_condition_passed: p_side.passed && q_side.passed && cross_norm <= tol,
        p_side,
        q_side,
        cross_norm,
        direct_residual,
        route_gap,
        tolerance: tol,
    })
}

fn nonzero(part: &DVector<f64>, whole: &DVector<f64>, tol: f64) -> bool {
    part.norm() > tol * whole.norm()
}

/// Any two spanning vectors of ℝ² and any rank-one `P`: picks `i ≠ j` with
/// `Pxᵢ ≠ 0 ≠ (I−P)xⱼ` (the best-conditioned such pair) and sets
/// `aᵢ = 1/‖Pxᵢ‖`, `bⱼ = 1/‖(I−P)xⱼ‖`, all other constants zero.
pub fn construct_r2(frame: &Frame, p: &OrthogonalProjection, tol: f64) -> Result<PiecewiseScaling> {
    if frame.dim() != 2 || p.dim() != 2 {
        return Err(Error::Hypothesis("the planar constructor needs a frame and projection on R^2".into()));
    }
    if p.is_trivial() {
        return Err(Error::Hypothesis("projection must be non-trivial (rank 1)".into()));
    }
    let rank = frame.rank();
    if rank < 2 {
        return Err(Error::NotSpanning { dim: 2, rank });
    }
    let m = frame.len();
    let xs = frame.vectors();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..m {
        let pi = p.apply(&xs[i]);
        if !nonzero(&pi, &xs[i], tol) {
            continue;
        }
        let si = pi.norm() / xs[i].norm();
        for j in (0..m).filter(|&j| j != i) {
            let qj = p.apply_complement(&xs[j]);
            if !nonzero(&qj, &xs[j], tol) {
                continue;
            }
            let score = si.min(qj.norm() / xs[j].norm());
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, i, j));
            }
        }
    }
    let (_, i, j) = best.ok_or_else(|| Error::Hypothesis("no index pair with nonzero P- and complement parts".into()))?;
    construct_from_orthogonal_split(frame, p, &[i], &[j], tol)
}

/// Builds a scaling from index sets whose projected parts are orthogonal
/// bases: `{Pxᵢ}_{i∈I}` of range(P) and `{(I−P)xⱼ}_{j∈J}` of range(I−P).
/// The sets must be disjoint so that every `aᵢbᵢ` vanishes.
pub fn construct_from_orthogonal_split(
    frame: &Frame,
    p: &OrthogonalProjection,
    p_indices: &[usize],
    q_indices: &[usize],
    tol: f64,
) -> Result<PiecewiseScaling> {
    let m = frame.len();
    if p.dim() != frame.dim() {
        return Err(Error::DimensionMismatch { index: 0, expected: frame.dim(), found: p.dim() });
    }
    for &i in p_indices.iter().chain(q_indices) {
        if i >= m {
            return Err(Error::IndexOutOfRange { index: i, len: m });
        }
    }
    if let Some(i) = p_indices.iter().find(|i| q_indices.contains(i)) {
        return Err(Error::Hypothesis(format!("index {i} appears in both index sets")));
    }
    let q = p.complement();
    let a = side_constants(frame, p, p_indices, tol, "P")?;
    let b = side_constants(frame, &q, q_indices, tol, "I-P")?;
    let ps = PiecewiseScaling::new(p.clone(), a, b)?;
    let report = verify_piecewise(frame, &ps, tol)?;
    if !report.passed {
        return Err(Error::Hypothesis(format!("split does not verify: residual {:e}", report.direct_residual)));
    }
    Ok(ps)
}

fn side_constants(frame: &Frame, proj: &OrthogonalProjection, indices: &[usize], tol: f64, side: &str) -> Result<Vec<f64>> {
    let mut unique = indices.to_vec();
    unique.sort_unstable();
    unique.dedup();
    if unique.len() != indices.len() {
        return Err(Error::Hypothesis(format!("repeated index in the {side} index set")));
    }
    let mut constants = vec![0.0; frame.len()];
    let mut units = Vec::with_capacity(indices.len());
    for &i in indices {
        let x = frame.vector(i);
        let part = proj.apply(x);
        if !nonzero(&part, x, tol) {
            return Err(Error::Hypothesis(format!("{side}-part of vector {i} is zero")));
        }
        let norm = part.norm();
        constants[i] = 1.0 / norm;
        units.push(part / norm);
    }
    if units.len() != proj.rank() {
        return Err(Error::Hypothesis(format!(
            "{} {side}-parts cannot form a basis of a rank-{} range",
            units.len(),
            proj.rank()
        )));
    }
    let gram = DMatrix::from_fn(units.len(), units.len(), |r, c| units[r].dot(&units[c]));
    let defect = (gram - DMatrix::identity(units.len(), units.len())).norm();
    if defect > tol {
        return Err(Error::Hypothesis(format!("{side}-parts are not orthogonal (Gram defect {defect:e})")));
    }
    Ok(constants)
}

/// Internals of the ℝ³ construction, kept for diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct R3Construction {
    pub scaling: PiecewiseScaling,
    /// The independent triple, in index order; the first two are the pair
    /// made orthogonal by `I − P`.
    pub triple: [usize; 3],
    /// `⟨x₁,x₂⟩ ≥ 0` after normalizing (and possibly flipping `x₂`).
    pub inner_product: f64,
    pub lambda: f64,
    /// `u = λ(x₁+x₂) + z`; `P` projects onto its span.
    pub u: DVector<f64>,
    /// `|‖u‖² − (2λ²(1+a) + 1)|`.
    pub norm_identity_gap: f64,
    /// `⟨(I−P)x₁, (I−P)x₂⟩` on the normalized pair.
    pub complement_inner: f64,
}

/// Every spanning frame of ℝ³ is piecewise scalable with a rank-one `P`.
pub fn construct_r3(frame: &Frame, tol: f64) -> Result<PiecewiseScaling> {
    construct_r3_detailed(frame, tol).map(|c| c.scaling)
}

pub fn construct_r3_detailed(frame: &Frame, tol: f64) -> Result<R3Construction> {
    if frame.dim() != 3 {
        return Err(Error::Hypothesis("the R^3 constructor needs a frame on R^3".into()));
    }
    let triple = independent_triple(frame)?;
    let unit = |i: usize| {
        let x = frame.vector(i);
        Vector3::new(x[0], x[1], x[2]) / x.norm()
    };
    let x1 = unit(triple[0]);
    let mut x2 = unit(triple[1]);
    let x3 = unit(triple[2]);
    let mut a = x1.dot(&x2);
    if a < 0.0 {
        x2 = -x2;
        a = -a;
    }
    let normal = x1.cross(&x2).normalize();
    let z = canonical_sign(DVector::from_column_slice(normal.as_slice()));
    let to_d = |v: Vector3<f64>| DVector::from_column_slice(v.as_slice());
    let (x1, x2, x3) = (to_d(x1), to_d(x2), to_d(x3));

    let magnitude = (a / (1.0 - a * a)).sqrt();
    let mut chosen = None;
    for lambda in [magnitude, -magnitude] {
        let u: DVector<f64> = (&x1 + &x2) * lambda + &z;
        let p = OrthogonalProjection::from_basis(3, std::slice::from_ref(&u))?;
        if p.apply(&x3).norm() > tol {
            chosen = Some((lambda, u, p));
            break;
        }
    }
    let (lambda, u, p) = chosen.ok_or_else(|| Error::Inconsistency("both signs of lambda annihilate the third vector".into()))?;

    let norm_identity_gap = (u.norm_squared() - (2.0 * lambda * lambda * (1.0 + a) + 1.0)).abs();
    let complement_inner = p.apply_complement(&x1).dot(&p.apply_complement(&x2));
    if complement_inner.abs() > tol {
        return Err(Error::Inconsistency(format!("complement parts not orthogonal: {complement_inner:e}")));
    }
    let scaling = construct_from_orthogonal_split(frame, &p, &[triple[2]], &[triple[0], triple[1]], tol)?;
    Ok(R3Construction { scaling, triple, inner_product: a, lambda, u, norm_identity_gap, complement_inner })
}

/// Greedy pivoted selection of three independent (normalized) vectors,
/// returned in index order.
fn independent_triple(frame: &Frame) -> Result<[usize; 3]> {
    let rank = frame.rank();
    if rank < 3 {
        return Err(Error::NotSpanning { dim: 3, rank });
    }
    let mut residuals: Vec<Option<DVector<f64>>> = frame
        .vectors()
        .iter()
        .map(|x| {
            let n = x.norm();
            (n > 0.0).then(|| x / n)
        })
        .collect();
    let mut chosen = Vec::with_capacity(3);
    for _ in 0..3 {
        let (best, _) = residuals
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().map(|r| (i, r.norm())))
            .fold((usize::MAX, -1.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
        let q = residuals[best].take().expect("selected residual exists");
        let q = &q / q.norm();
        chosen.push(best);
        for r in residuals.iter_mut().flatten() {
            let c = q.dot(r);
            r.axpy(-c, &q, 1.0);
        }
    }
    chosen.sort_unstable();
    Ok([chosen[0], chosen[1], chosen[2]])
}

/// Special position in ℝ⁴: independent `x₁..x₄` with `⟨x₂,x₄⟩ = ⟨x₃,x₄⟩ = 0`
/// and `⟨x₁,x₄⟩ ≠ 0`. Produces a rank-two `P` with `Px₁ ⊥ Px₂` and
/// `(I−P)x₃ ⊥ (I−P)x₄`.
pub fn construct_r4_special(frame: &Frame, idx: [usize; 4], tol: f64) -> Result<PiecewiseScaling> {
    if frame.dim() != 4 {
        return Err(Error::Hypothesis("the special-position constructor needs a frame on R^4".into()));
    }
    for &i in &idx {
        if i >= frame.len() {
            return Err(Error::IndexOutOfRange { index: i, len: frame.len() });
        }
    }
    let xs: Vec<DVector<f64>> = idx
        .iter()
        .map(|&i| {
            let x = frame.vector(i);
            let n = x.norm();
            if n == 0.0 {
                Err(Error::ZeroVector { index: i })
            } else {
                Ok(x / n)
            }
        })
        .collect::<Result<_>>()?;
    if numerical_rank(&DMatrix::from_columns(&xs)) < 4 {
        return Err(Error::Hypothesis("selected vectors are linearly dependent".into()));
    }
    let (g24, g34, g14) = (xs[1].dot(&xs[3]), xs[2].dot(&xs[3]), xs[0].dot(&xs[3]));
    if g24.abs() > tol || g34.abs() > tol {
        return Err(Error::Hypothesis(format!("need <x2,x4> = <x3,x4> = 0, got {g24:e} and {g34:e}")));
    }
    if g14.abs() <= tol {
        return Err(Error::Hypothesis("need <x1,x4> != 0".into()));
    }

    let q = OrthogonalProjection::from_basis(4, &[xs[1].clone(), xs[3].clone()])?;
    let w = q.apply_complement(&xs[0]);
    let u = &w / w.norm();
    let r = OrthogonalProjection::from_basis(4, &[xs[0].clone(), xs[2].clone(), u.clone()])?;
    let z = r.apply_complement(&xs[1]);
    let v = &z / z.norm();
    let p = OrthogonalProjection::from_basis(4, &[u, v])?;
    construct_from_orthogonal_split(frame, &p, &[idx[0], idx[1]], &[idx[2], idx[3]], tol)
}

/// Which strategy produced a search result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchRoute {
    /// The frame is standard scalable; `aᵢ = bᵢ = cᵢ`.
    StandardScaling,
    Planar,
    Spatial,
    /// Disjoint-support split over a sampled projection.
    RandomSplit { rank: usize, candidate: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    /// Projection ranks to try; `None` means `1..n`.
    pub ranks: Option<Vec<usize>>,
    /// Sampled projections per rank.
    pub budget: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { ranks: None, budget: 200, seed: 0, tol: crate::DEFAULT_TOL }
    }
}

/// Result of [`search_piecewise`]. An empty result is not a proof that the
/// frame is not piecewise scalable.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub scaling: Option<PiecewiseScaling>,
    pub route: Option<SearchRoute>,
    pub ranks: Vec<usize>,
}

/// Looks for a piecewise scaling: standard scalability first, then the
/// planar and spatial constructors, then disjoint splits over seeded random
/// projections of each requested rank.
///
/// Candidates may be evaluated in parallel; the result is the passing
/// candidate with the smallest (rank, index), so it does not depend on
/// scheduling.
pub fn search_piecewise(frame: &Frame, opts: &SearchOptions) -> Result<SearchOutcome> {
    if opts.budget == 0 {
        return Err(Error::InvalidArgument("search budget must be at least 1".into()));
    }
    let n = frame.dim();
    let mut ranks: Vec<usize> = opts.ranks.clone().unwrap_or_else(|| (1..n).collect());
    ranks.retain(|&k| k >= 1 && k < n);
    ranks.sort_unstable();
    ranks.dedup();
    let none = |ranks: Vec<usize>| Ok(SearchOutcome { scaling: None, route: None, ranks });
    if ranks.is_empty() || !frame.is_frame() {
        return none(ranks);
    }
    let tol = opts.tol;
    let found = |ps: PiecewiseScaling, route, ranks| Ok(SearchOutcome { scaling: Some(ps), route: Some(route), ranks });

    let standard = solve_standard_scaling(frame.vectors(), ParsevalTarget::Identity(n), tol)?;
    if let Some(s) = standard.scaling {
        let ps = PiecewiseScaling::new(OrthogonalProjection::leading(ranks[0], n)?, s.constants.clone(), s.constants)?;
        if verify_piecewise(frame, &ps, tol)?.passed {
            return found(ps, SearchRoute::StandardScaling, ranks);
        }
    }

    if n == 2 {
        let p = OrthogonalProjection::leading(1, 2)?;
        if let Ok(ps) = construct_r2(frame, &p, tol) {
            return found(ps, SearchRoute::Planar, ranks);
        }
    }
    if n == 3 {
        if let Ok(ps) = construct_r3(frame, tol) {
            let ps = if ranks.contains(&1) { ps } else { ps.swapped() };
            return found(ps, SearchRoute::Spatial, ranks);
        }
    }

    let candidates: Vec<(usize, usize)> = ranks.iter().flat_map(|&k| (0..opts.budget).map(move |c| (k, c))).collect();
    let hit = candidates.par_iter().find_map_first(|&(k, c)| {
        let p = OrthogonalProjection::random(n, k, derive_seed(opts.seed, k as u64, c as u64)).ok()?;
        try_split(frame, &p, tol).map(|ps| (ps, k, c))
    });
    match hit {
        Some((ps, rank, candidate)) => found(ps, SearchRoute::RandomSplit { rank, candidate }, ranks),
        None => none(ranks),
    }
}

/// Disjoint-split attempt for a fixed projection: scale each side by NNLS,
/// then resolve overlapping supports by re-solving one side with the other
/// side's support excluded.
pub fn try_split(frame: &Frame, p: &OrthogonalProjection, tol: f64) -> Option<PiecewiseScaling> {
    let q = p.complement();
    let pv: Vec<DVector<f64>> = frame.vectors().iter().map(|x| p.apply(x)).collect();
    let qv: Vec<DVector<f64>> = frame.vectors().iter().map(|x| q.apply(x)).collect();
    let sa = solve_standard_scaling_sparse(&pv, ParsevalTarget::Range(p), tol).ok()?.scaling?;
    let sb = solve_standard_scaling_sparse(&qv, ParsevalTarget::Range(&q), tol).ok()?.scaling?;
    let accept = |a: Vec<f64>, b: Vec<f64>| {
        let ps = PiecewiseScaling::new(p.clone(), a, b).ok()?;
        verify_piecewise(frame, &ps, tol).ok()?.passed.then_some(ps)
    };
    if let Some(ps) = accept(sa.constants.clone(), sb.constants.clone()) {
        return Some(ps);
    }
    let free_b: Vec<bool> = sa.constants.iter().map(|&c| c == 0.0).collect();
    if let Ok(v) = solve_standard_scaling_restricted(&qv, ParsevalTarget::Range(&q), &free_b, tol) {
        if let Some(s) = v.scaling {
            if let Some(ps) = accept(sa.constants.clone(), s.constants) {
                return Some(ps);
            }
        }
    }
    let free_a: Vec<bool> = sb.constants.iter().map(|&c| c == 0.0).collect();
    let v = solve_standard_scaling_restricted(&pv, ParsevalTarget::Range(p), &free_a, tol).ok()?;
    accept(v.scaling?.constants, sb.constants)
}

/// Disjoint-support attempts for a fixed projection. Each attempt assigns
/// every index at random to the `P` side, the `I − P` side or neither, and
/// solves both sides by NNLS restricted to those supports.
pub fn search_split_with_projection(
    frame: &Frame,
    p: &OrthogonalProjection,
    attempts: usize,
    seed: u64,
    tol: f64,
) -> Result<Option<PiecewiseScaling>> {
    if p.dim() != frame.dim() {
        return Err(Error::DimensionMismatch { index: 0, expected: frame.dim(), found: p.dim() });
    }
    let q = p.complement();
    let pv: Vec<DVector<f64>> = frame.vectors().iter().map(|x| p.apply(x)).collect();
    let qv: Vec<DVector<f64>> = frame.vectors().iter().map(|x| q.apply(x)).collect();
    let m = frame.len();
    let hit = (0..attempts).into_par_iter().find_map_first(|t| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, t as u64));
        let side: Vec<u8> = (0..m).map(|_| rng.random_range(0..3u8)).collect();
        let on_p: Vec<bool> = side.iter().map(|&s| s == 0).collect();
        let on_q: Vec<bool> = side.iter().map(|&s| s == 1).collect();
        let a = solve_standard_scaling_restricted(&pv, ParsevalTarget::Range(p), &on_p, tol).ok()?.scaling?;
        let b = solve_standard_scaling_restricted(&qv, ParsevalTarget::Range(&q), &on_q, tol).ok()?.scaling?;
        let ps = PiecewiseScaling::new(p.clone(), a.constants, b.constants).ok()?;
        verify_piecewise(frame, &ps, tol).ok()?.passed.then_some(ps)
    });
    Ok(hit)
}

/// Per-candidate seed, a SplitMix64 mix of (seed, rank, candidate).
pub fn derive_seed(seed: u64, rank: u64, candidate: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ rank) ^ candidate)
}
