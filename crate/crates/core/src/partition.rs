//! Hertel-Mehlhorn convex partitioning of simple polygons.
//!
//! Diagonals are generated by visiting vertices from a start index and adding
//! every diagonal to a later vertex that stays inside the polygon and crosses
//! no earlier diagonal, which yields a triangulation. Diagonals are then
//! scanned in creation order and dropped whenever both endpoints stay convex
//! without them.

use crate::geometry::{loop_is_convex, orient, segment_distance, segments_cross};
use crate::{Error, Point, Polygon, Result};

#[derive(Clone, Debug)]
pub struct ConvexPartition {
    pub pieces: Vec<Polygon>,
    pub parent: Polygon,
    /// Kept diagonals as outer-loop vertex index pairs.
    pub diagonals: Vec<(usize, usize)>,
}

impl ConvexPartition {
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn all_convex(&self) -> bool {
        let eps = 1e-12 * self.parent.diameter().powi(2);
        self.pieces.iter().all(|p| loop_is_convex(p.outer(), eps))
    }

    /// `|sum of piece areas - parent area| / parent area`.
    pub fn area_defect(&self) -> f64 {
        let total: f64 = self.pieces.iter().map(|p| p.signed_area()).sum();
        let a = self.parent.signed_area();
        (total - a).abs() / a
    }
}

pub fn hertel_mehlhorn(poly: &Polygon, start: usize) -> Result<ConvexPartition> {
    if poly.has_holes() {
        return Err(Error::InvalidArgument("convex partitioning requires a polygon without holes".into()));
    }
    let v = poly.outer();
    let n = v.len();
    if start >= n {
        return Err(Error::InvalidArgument(format!("start vertex {start} out of range for {n} vertices")));
    }
    let eps = 1e-12 * poly.diameter().powi(2);
    let mut diags: Vec<(usize, usize)> = Vec::new();
    for step in 0..n {
        let i = (start + step) % n;
        for off in 2..n - 1 {
            let j = (i + off) % n;
            if diags.iter().any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i)) {
                continue;
            }
            if is_diagonal(v, i, j, eps) && !diags.iter().any(|&(a, b)| crosses(v, (a, b), (i, j), eps)) {
                diags.push((i, j));
            }
        }
    }
    let mut kept = diags.clone();
    for d in &diags {
        let others: Vec<(usize, usize)> = kept.iter().copied().filter(|x| x != d).collect();
        if convex_at(v, d.0, &others, eps) && convex_at(v, d.1, &others, eps) {
            kept = others;
        }
    }
    let pieces = trace_faces(v, &kept)?;
    Ok(ConvexPartition {
        pieces,
        parent: poly.clone(),
        diagonals: kept,
    })
}

#[inline]
fn left(a: &Point, b: &Point, c: &Point, eps: f64) -> bool {
    orient(a, b, c) > eps
}

#[inline]
fn left_on(a: &Point, b: &Point, c: &Point, eps: f64) -> bool {
    orient(a, b, c) >= -eps
}

/// Segment `v_i v_j` lies strictly inside the polygon.
fn is_diagonal(v: &[Point], i: usize, j: usize, eps: f64) -> bool {
    let n = v.len();
    let (a, b) = (&v[i], &v[j]);
    let a0 = &v[(i + n - 1) % n];
    let a1 = &v[(i + 1) % n];
    let in_cone = if left_on(a, a1, a0, eps) {
        left(a, b, a0, eps) && left(b, a, a1, eps)
    } else {
        !(left_on(a, b, a1, eps) && left_on(b, a, a0, eps))
    };
    if !in_cone {
        return false;
    }
    let len = (b - a).norm();
    for k in 0..n {
        if k != i && k != j && segment_distance(&v[k], a, b) <= eps / len.max(f64::MIN_POSITIVE) {
            return false;
        }
        let k1 = (k + 1) % n;
        if k == i || k == j || k1 == i || k1 == j {
            continue;
        }
        if segments_cross(a, b, &v[k], &v[k1], eps) {
            return false;
        }
    }
    true
}

fn crosses(v: &[Point], d: (usize, usize), e: (usize, usize), eps: f64) -> bool {
    if d.0 == e.0 || d.0 == e.1 || d.1 == e.0 || d.1 == e.1 {
        return false;
    }
    segments_cross(&v[d.0], &v[d.1], &v[e.0], &v[e.1], eps)
}

/// Rays at vertex `i` sorted counter-clockwise from the next boundary vertex
/// to the previous one.
fn fan(v: &[Point], i: usize, diags: &[(usize, usize)]) -> Vec<usize> {
    let n = v.len();
    let next = (i + 1) % n;
    let prev = (i + n - 1) % n;
    let base = v[next] - v[i];
    let ang = |k: usize| {
        let d = v[k] - v[i];
        let a = (base.x * d.y - base.y * d.x).atan2(base.x * d.x + base.y * d.y);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    };
    let mut mid: Vec<usize> = diags
        .iter()
        .filter_map(|&(a, b)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
        .collect();
    mid.sort_by(|&a, &b| ang(a).total_cmp(&ang(b)));
    let mut out = vec![next];
    out.extend(mid);
    out.push(prev);
    out
}

/// Every sector at `i` between consecutive rays is at most pi.
fn convex_at(v: &[Point], i: usize, diags: &[(usize, usize)], eps: f64) -> bool {
    let f = fan(v, i, diags);
    f.windows(2).all(|w| left_on(&v[i], &v[w[0]], &v[w[1]], eps))
}

fn trace_faces(v: &[Point], diags: &[(usize, usize)]) -> Result<Vec<Polygon>> {
    let n = v.len();
    let mut half: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for &(a, b) in diags {
        half.push((a, b));
        half.push((b, a));
    }
    let mut used = vec![false; half.len()];
    let find = |e: (usize, usize)| half.iter().position(|&h| h == e);
    let mut pieces = Vec::new();
    for s in 0..half.len() {
        if used[s] {
            continue;
        }
        let mut face = Vec::new();
        let mut cur = s;
        loop {
            used[cur] = true;
            let (a, b) = half[cur];
            face.push(a);
            // Next ray at b: the one just before `a` in the fan (clockwise from a).
            let f = fan(v, b, diags);
            let pos = f.iter().position(|&k| k == a).ok_or_else(|| Error::Degenerate("broken partition graph".into()))?;
            if pos == 0 {
                return Err(Error::Degenerate("face tracing left the polygon".into()));
            }
            let c = f[pos - 1];
            cur = find((b, c)).ok_or_else(|| Error::Degenerate("missing half-edge".into()))?;
            if cur == s {
                break;
            }
            if face.len() > n {
                return Err(Error::Degenerate("face tracing did not close".into()));
            }
        }
        pieces.push(Polygon::simple(face.iter().map(|&k| v[k]).collect())?);
    }
    Ok(pieces)
}

/// A 10-vertex domain with reflex vertices at 1-based positions 6 and 9.
/// Starting the partition at vertex 1 gives 4 pieces and at vertex 9 gives 2.
pub fn ten_vertex_domain() -> Polygon {
    Polygon::from_coords(&TEN_VERTEX_COORDS).expect("valid domain")
}

pub const TEN_VERTEX_COORDS: [(f64, f64); 10] = [
    (0.0, 0.0),
    (4.0, -2.0),
    (6.0, -1.0),
    (8.0, 2.0),
    (7.0, 3.0),
    (6.0, 3.0),
    (3.0, 5.0),
    (1.0, 5.0),
    (1.0, 2.0),
    (-2.0, 1.0),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_polygon_is_one_piece() {
        let hex = Polygon::regular(6, 1.0).unwrap();
        for s in 0..6 {
            let p = hertel_mehlhorn(&hex, s).unwrap();
            assert_eq!(p.len(), 1);
            assert!(p.area_defect() < 1e-12);
        }
    }

    #[test]
    fn l_shape_splits_in_two() {
        let l = Polygon::from_coords(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]).unwrap();
        for s in 0..6 {
            let p = hertel_mehlhorn(&l, s).unwrap();
            assert!(p.len() <= 3 && p.len() >= 2);
            assert!(p.all_convex());
            assert!(p.area_defect() < 1e-9);
        }
    }

    #[test]
    fn ten_vertex_domain_counts() {
        let d = ten_vertex_domain();
        assert_eq!(d.reflex_vertices(), vec![5, 8]);
        let a = hertel_mehlhorn(&d, 0).unwrap();
        let b = hertel_mehlhorn(&d, 8).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(b.len(), 2);
        for p in [&a, &b] {
            assert!(p.all_convex());
            assert!(p.area_defect() < 1e-9);
        }
    }

    #[test]
    fn holes_are_rejected() {
        let outer = Polygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap().outer().to_vec();
        let hole = vec![Point::new(-0.5, -0.5), Point::new(-0.5, 0.5), Point::new(0.5, 0.5), Point::new(0.5, -0.5)];
        let h = Polygon::new(outer, vec![hole]).unwrap();
        assert!(hertel_mehlhorn(&h, 0).is_err());
    }
}
