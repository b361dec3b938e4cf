//! Interior candidate point clouds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::monomials::{MonomialSpec, Space};
use crate::{Error, Point, Polygon, Result};

pub const DEFAULT_OVERSAMPLE: f64 = 10.0;
pub const DEFAULT_SEED: u64 = 42;

/// Candidate count `ceil(oversample * N)`.
pub fn candidate_count_for(spec: &MonomialSpec, oversample: f64) -> Result<usize> {
    if !(oversample >= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "oversample must be at least 2, got {oversample}"
        )));
    }
    Ok((oversample * spec.len() as f64).ceil() as usize)
}

/// Axis-aligned lattice with the given spacing, centered on the bounding box
/// and filtered to strictly interior points.
pub fn fill_pattern(poly: &Polygon, spacing: f64) -> Result<Vec<Point>> {
    let diam = poly.diameter();
    if !(spacing > 0.0) || spacing >= diam {
        return Err(Error::InvalidArgument(format!(
            "spacing {spacing} must be positive and below the diameter {diam}"
        )));
    }
    let (lo, hi) = poly.bounding_box();
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        let w = hi - lo;
        let n = ((w / spacing + 1e-9).floor() as usize).max(1);
        let off = lo + 0.5 * (w - n as f64 * spacing);
        (0..n).map(|i| off + spacing * (i as f64 + 0.5)).collect()
    };
    let xs = axis(lo.x, hi.x);
    let ys = axis(lo.y, hi.y);
    let pts: Vec<Point> = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| Point::new(x, y)))
        .filter(|p| poly.contains(p))
        .collect();
    if pts.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "spacing {spacing} leaves no interior lattice points; use a smaller spacing"
        )));
    }
    Ok(pts)
}

/// The coarsest lattice of [`fill_pattern`] type with at least `count` interior points.
pub fn fill_count(poly: &Polygon, count: usize) -> Result<Vec<Point>> {
    if count == 0 {
        return Err(Error::InvalidArgument("candidate count must be positive".into()));
    }
    let (lo, hi) = poly.bounding_box();
    let side = (hi.x - lo.x).max(hi.y - lo.y);
    let ratio = (hi.x - lo.x) * (hi.y - lo.y) / poly.signed_area();
    let mut n = ((count as f64 * ratio).sqrt().ceil() as usize + 1).max(2);
    loop {
        let pts = fill_pattern(poly, side / n as f64).unwrap_or_default();
        if pts.len() >= count {
            return Ok(pts);
        }
        n += 1;
        if n > 100_000 {
            return Err(Error::Degenerate("cannot fill polygon with lattice points".into()));
        }
    }
}

/// Equispaced unisolvent nodes on `[-h, h]^2`: the `(p+1)^2` tensor grid for
/// Q, the lower-left triangular lattice `i + j <= p` for P.
pub fn equispaced_nodes(space: Space, p: u32, half_width: f64) -> Vec<Point> {
    if p == 0 {
        return vec![Point::origin()];
    }
    let t = |i: u32| -half_width + 2.0 * half_width * i as f64 / p as f64;
    let mut out = Vec::new();
    for j in 0..=p {
        for i in 0..=p {
            if space == Space::Q || i + j <= p {
                out.push(Point::new(t(i), t(j)));
            }
        }
    }
    out
}

/// Tensor grid of Chebyshev-Gauss points `h cos((2k+1) pi / 2n)` on `[-h, h]^2`,
/// `x` varying fastest.
pub fn chebyshev_grid(n: usize, half_width: f64) -> Vec<Point> {
    let g: Vec<f64> = (0..n)
        .map(|k| half_width * ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect();
    g.iter().flat_map(|&y| g.iter().map(move |&x| Point::new(x, y))).collect()
}

/// Uniform random interior points by rejection sampling.
pub fn random_points(poly: &Polygon, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = poly.bounding_box();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if poly.contains(&p) {
            out.push(p);
        }
    }
    out
}

pub fn min_pairwise_distance(pts: &[Point]) -> f64 {
    pts.par_iter()
        .enumerate()
        .map(|(i, a)| pts[i + 1..].iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Pairwise repulsion in pseudo-time. Each pair closer than
/// `d0 = 1.2 sqrt(area / M)` pushes apart with force `(d0 - r) / r` along the
/// separating direction; the step is capped at `0.2 d0`. Steps that leave
/// the polygon are halved until the point is inside again. Coincident points
/// are separated along a direction drawn from the seeded RNG.
pub fn gravitational_relax(poly: &Polygon, seed_pts: &[Point], iters: usize, rng_seed: u64) -> Vec<Point> {
    let mut pts = seed_pts.to_vec();
    if iters == 0 || pts.len() < 2 {
        return pts;
    }
    let m = pts.len();
    let d0 = 1.2 * (poly.signed_area() / m as f64).sqrt();
    let cap = 0.2 * d0;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..iters {
        let jitter: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let steps: Vec<nalgebra::Vector2<f64>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut f = nalgebra::Vector2::zeros();
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let d = pts[i] - pts[j];
                    let r = d.norm();
                    if r >= d0 {
                        continue;
                    }
                    if r == 0.0 {
                        let t = jitter[i];
                        f += nalgebra::Vector2::new(t.cos(), t.sin()) * d0;
                    } else {
                        f += d * ((d0 - r) / r);
                    }
                }
                let s = f.norm();
                if s > cap {
                    f *= cap / s;
                }
                f
            })
            .collect();
        for (p, s) in pts.iter_mut().zip(&steps) {
            let mut step = *s;
            for _ in 0..40 {
                let q = *p + step;
                if poly.contains(&q) {
                    *p = q;
                    break;
                }
                step *= 0.5;
            }
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomials::Space;

    fn square() -> Polygon {
        Polygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(candidate_count_for(&MonomialSpec::new(Space::P, 2), 10.0).unwrap(), 60);
        assert_eq!(candidate_count_for(&MonomialSpec::new(Space::Q, 2), 10.0).unwrap(), 90);
        assert!(candidate_count_for(&MonomialSpec::new(Space::P, 2), 1.5).is_err());
    }

    #[test]
    fn fill_examples() {
        let pts = fill_pattern(&square(), 0.5).unwrap();
        assert_eq!(pts.len(), 16);
        assert!(pts.iter().all(|p| square().contains(p)));
        let tri = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap();
        let pts = fill_pattern(&tri, tri.diameter() / 50.0).unwrap();
        assert!(pts.len() > 100);
        assert!(pts.iter().all(|p| p.x > 0.0 && p.y > 0.0 && p.x + p.y < 1.0));
        assert!(fill_pattern(&square(), 3.0).is_err());
        let c = fill_count(&tri, 60).unwrap();
        assert!(c.len() >= 60);
    }

    #[test]
    fn relax_identity_and_separation() {
        let seed = vec![Point::new(0.01, 0.0), Point::new(-0.01, 0.0)];
        assert_eq!(gravitational_relax(&square(), &seed, 0, 1), seed);
        let out = gravitational_relax(&square(), &seed, 100, 1);
        assert!((out[0] - out[1]).norm() > 0.02);
        assert!(out.iter().all(|p| square().contains(p)));
    }

    #[test]
    fn relax_spreads_random_points() {
        let sq = square();
        let pts = random_points(&sq, 200, 7);
        let mut last = min_pairwise_distance(&pts);
        let mut done = 0;
        let mut cur = pts;
        for stage in [1, 2, 8, 32] {
            cur = gravitational_relax(&sq, &cur, stage - done, 3);
            done = stage;
            let d = min_pairwise_distance(&cur);
            assert!(d > last, "stage {stage}: {d} <= {last}");
            last = d;
            assert!(cur.iter().all(|p| sq.contains(p)));
        }
    }

    #[test]
    fn chebyshev_grid_layout() {
        let g = chebyshev_grid(20, 1.0);
        assert_eq!(g.len(), 400);
        assert!(g.iter().all(|p| p.x.abs() < 1.0 && p.y.abs() < 1.0));
    }
}
