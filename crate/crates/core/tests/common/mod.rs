//! Random generators and fixture loading shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use framescale::piecewise::{construct_r2, construct_r3, PiecewiseScaling};
use framescale::{Frame, OrthogonalProjection};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

pub fn fixture(name: &str) -> Frame {
    framescale::io::load_frame(&fixture_path(name), None).expect("fixture loads")
}

pub fn gaussian(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

pub fn unit(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    loop {
        let g = gaussian(rng, n);
        let norm = g.norm();
        if norm > 1e-3 {
            return g / norm;
        }
    }
}

pub fn gaussian_frame(rng: &mut impl Rng, n: usize, m: usize) -> Frame {
    Frame::new(n, (0..m).map(|_| gaussian(rng, n)).collect()).unwrap()
}

pub fn unit_frame(rng: &mut impl Rng, n: usize, m: usize) -> Frame {
    Frame::new(n, (0..m).map(|_| unit(rng, n)).collect()).unwrap()
}

/// Haar-distributed rotation (determinant +1).
pub fn rotation(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Unit vectors within `spread` of a random centre, rejected until the
/// largest pairwise distance is at most `bound`.
pub fn clustered_frame(rng: &mut impl Rng, n: usize, m: usize, spread: f64, bound: f64) -> Frame {
    loop {
        let centre = unit(rng, n);
        let vectors: Vec<_> = (0..m).map(|_| (&centre + unit(rng, n) * spread).normalize()).collect();
        let frame = Frame::new(n, vectors).unwrap();
        if frame.rank() == n && framescale::obstruction::pairwise_closeness(&frame).unwrap().0 <= bound {
            return frame;
        }
    }
}

/// Spanning unit vectors of ℝ² strictly inside one open quadrant, each
/// possibly negated.
pub fn quadrant_frame(rng: &mut impl Rng, m: usize) -> Frame {
    let (sx, sy) = (if rng.random() { 1.0 } else { -1.0 }, if rng.random() { 1.0 } else { -1.0 });
    loop {
        let vectors: Vec<_> = (0..m)
            .map(|_| {
                let t = rng.random_range(0.02..(std::f64::consts::FRAC_PI_2 - 0.02));
                let flip = if rng.random() { 1.0 } else { -1.0 };
                DVector::from_vec(vec![flip * sx * t.cos(), flip * sy * t.sin()])
            })
            .collect();
        let frame = Frame::new(2, vectors).unwrap();
        if frame.frame_bounds().lower > 1e-4 {
            return frame;
        }
    }
}

/// Random tuple for the piecewise equivalence checks. Roughly half pass by
/// construction; the rest use generic constants or perturb a passing
/// scaling far outside the tolerance.
pub fn piecewise_tuple(rng: &mut impl Rng, tol: f64) -> (Frame, PiecewiseScaling) {
    match rng.random_range(0..4u8) {
        0 => {
            let n = rng.random_range(2..=4);
            let m = rng.random_range(n..=n + 3);
            let frame = gaussian_frame(rng, n, m);
            let k = rng.random_range(1..n);
            let p = OrthogonalProjection::random(n, k, rng.random()).unwrap();
            let a = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
            let b = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
            (frame, PiecewiseScaling::new(p, a, b).unwrap())
        }
        1 | 2 => {
            let (frame, ps) = passing_tuple(rng, tol);
            flip_and_rescale(rng, &frame, &ps)
        }
        _ => {
            let (frame, mut ps) = passing_tuple(rng, tol);
            let i = rng.random_range(0..frame.len());
            let delta = rng.random_range(1e-3..1e-1);
            if ps.a[i] != 0.0 {
                ps.a[i] += delta;
            } else {
                ps.b[i] += delta;
            }
            (frame, ps)
        }
    }
}

/// A passing scaling of a unit-norm frame from the planar or spatial
/// constructor.
pub fn passing_tuple(rng: &mut impl Rng, tol: f64) -> (Frame, PiecewiseScaling) {
    if rng.random() {
        let frame = unit_frame(rng, 2, 2);
        let p = OrthogonalProjection::random(2, 1, rng.random()).unwrap();
        let ps = construct_r2(&frame, &p, tol).unwrap();
        (frame, ps)
    } else {
        let m = rng.random_range(3..=6);
        let frame = unit_frame(rng, 3, m);
        let ps = construct_r3(&frame, tol).unwrap();
        (frame, ps)
    }
}

/// Replaces `xᵢ` by `tᵢxᵢ` with `tᵢ` of random sign and size and divides
/// `(aᵢ, bᵢ)` by `tᵢ`, which leaves the scaled family unchanged.
pub fn flip_and_rescale(rng: &mut impl Rng, frame: &Frame, ps: &PiecewiseScaling) -> (Frame, PiecewiseScaling) {
    let t: Vec<f64> = (0..frame.len())
        .map(|_| {
            let s: f64 = rng.random_range(0.5..2.0);
            if rng.random() { s } else { -s }
        })
        .collect();
    let vectors = frame.vectors().iter().zip(&t).map(|(x, t)| x * *t).collect();
    let a = ps.a.iter().zip(&t).map(|(a, t)| a / t).collect();
    let b = ps.b.iter().zip(&t).map(|(b, t)| b / t).collect();
    (Frame::new(frame.dim(), vectors).unwrap(), PiecewiseScaling::new(ps.projection.clone(), a, b).unwrap())
}
