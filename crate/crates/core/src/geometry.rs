//! Polygons, orientation predicates, triangulation and the normalization map.

use std::fmt;

use nalgebra::{Point2, Vector2};

use crate::{Error, Result};

pub type Point = Point2<f64>;
pub type Triangle = [Point; 3];

/// Half-width of the box in which the moment norm of the monomial basis
/// converges: tanh(1/2).
pub fn moment_box_half_width() -> f64 {
    0.5f64.tanh()
}

/// Twice the signed area of the triangle (a, b, c); positive when counter-clockwise.
#[inline]
pub fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

pub fn loop_signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = &pts[i];
        let b = &pts[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

/// Distance from `p` to the closed segment [a, b].
pub fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Proper or touching intersection test for closed segments, with tolerance `eps`
/// on the orientation values.
fn segments_intersect(p1: &Point, p2: &Point, q1: &Point, q2: &Point, eps: f64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    let on = |a: &Point, b: &Point, c: &Point, d: f64| {
        d.abs() <= eps
            && c.x >= a.x.min(b.x) - 1e-15
            && c.x <= a.x.max(b.x) + 1e-15
            && c.y >= a.y.min(b.y) - 1e-15
            && c.y <= a.y.max(b.y) + 1e-15
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Strict crossing test: the open segments cross at a single interior point.
pub(crate) fn segments_cross(p1: &Point, p2: &Point, q1: &Point, q2: &Point, eps: f64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
}

/// A simple polygon with a counter-clockwise outer loop and optional
/// clockwise holes.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    outer: Vec<Point>,
    holes: Vec<Vec<Point>>,
}

impl Polygon {
    /// Validates the loops: at least three vertices, no repeated consecutive
    /// vertices, no self-intersection, counter-clockwise outer loop and
    /// clockwise holes lying inside it.
    pub fn new(outer: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self> {
        check_loop(&outer, "outer loop")?;
        if loop_signed_area(&outer) <= 0.0 {
            return Err(Error::InvalidPolygon(
                "outer loop must be counter-clockwise with positive area".into(),
            ));
        }
        for (k, h) in holes.iter().enumerate() {
            check_loop(h, &format!("hole {k}"))?;
            if loop_signed_area(h) >= 0.0 {
                return Err(Error::InvalidPolygon(format!(
                    "hole {k} must be clockwise with negative signed area"
                )));
            }
        }
        let poly = Polygon { outer, holes };
        poly.check_no_crossings()?;
        let outer_only = Polygon {
            outer: poly.outer.clone(),
            holes: vec![],
        };
        for (k, h) in poly.holes.iter().enumerate() {
            if !h.iter().all(|p| outer_only.contains(p)) {
                return Err(Error::InvalidPolygon(format!("hole {k} is not inside the outer loop")));
            }
        }
        Ok(poly)
    }

    pub fn simple(outer: Vec<Point>) -> Result<Self> {
        Self::new(outer, vec![])
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self> {
        Self::simple(coords.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    /// Axis-aligned rectangle [x0, x1] x [y0, y1].
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::from_coords(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    }

    /// Regular polygon with `sides` vertices on the circle of the given radius,
    /// first vertex on the positive x axis.
    pub fn regular(sides: usize, radius: f64) -> Result<Self> {
        if sides < 3 {
            return Err(Error::InvalidArgument("a polygon needs at least 3 sides".into()));
        }
        let pts = (0..sides)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
                Point::new(radius * t.cos(), radius * t.sin())
            })
            .collect();
        Self::simple(pts)
    }

    /// T-shaped concave hull in `[-1, 1]^2` with stem width 2/3.
    pub fn t_hull() -> Self {
        Self::from_coords(&[
            (-1.0 / 3.0, -1.0),
            (1.0 / 3.0, -1.0),
            (1.0 / 3.0, 1.0 / 3.0),
            (1.0, 1.0 / 3.0),
            (1.0, 1.0),
            (-1.0, 1.0),
            (-1.0, 1.0 / 3.0),
            (-1.0 / 3.0, 1.0 / 3.0),
        ])
        .expect("valid T hull")
    }

    /// `[-1, 1]^2` with the square hole `[-1/2, 1/2]^2`.
    pub fn holed_square() -> Self {
        let outer = Self::rectangle(-1.0, -1.0, 1.0, 1.0).expect("valid square").outer;
        let hole = vec![
            Point::new(-0.5, -0.5),
            Point::new(-0.5, 0.5),
            Point::new(0.5, 0.5),
            Point::new(0.5, -0.5),
        ];
        Self::new(outer, vec![hole]).expect("valid holed square")
    }

    pub fn outer(&self) -> &[Point] {
        &self.outer
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.holes
    }

    pub fn has_holes(&self) -> bool {
        !self.holes.is_empty()
    }

    /// Outer loop followed by the holes.
    pub fn loops(&self) -> impl Iterator<Item = &[Point]> {
        std::iter::once(self.outer.as_slice()).chain(self.holes.iter().map(|h| h.as_slice()))
    }

    /// Directed boundary edges of all loops; holes keep their clockwise
    /// orientation so the interior is always on the left.
    pub fn edges(&self) -> Vec<(Point, Point)> {
        let mut out = Vec::new();
        for lp in self.loops() {
            let n = lp.len();
            for i in 0..n {
                out.push((lp[i], lp[(i + 1) % n]));
            }
        }
        out
    }

    /// Shoelace area: outer loop minus holes.
    pub fn signed_area(&self) -> f64 {
        self.loops().map(loop_signed_area).sum()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.outer {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Largest distance between two outer vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.outer.iter().enumerate() {
            for b in &self.outer[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    pub fn centroid(&self) -> Point {
        let mut cx = 0.0;
        let mut cy = 0.0;
        for lp in self.loops() {
            let n = lp.len();
            for i in 0..n {
                let a = &lp[i];
                let b = &lp[(i + 1) % n];
                let c = a.x * b.y - b.x * a.y;
                cx += (a.x + b.x) * c;
                cy += (a.y + b.y) * c;
            }
        }
        let a6 = 6.0 * self.signed_area();
        Point::new(cx / a6, cy / a6)
    }

    /// Boundary distance below which a point counts as outside.
    pub fn boundary_tolerance(&self) -> f64 {
        1e-12 * self.diameter()
    }

    /// Strict interior test. Points within `1e-12 * diameter` of any edge are
    /// classified as outside.
    pub fn contains(&self, pt: &Point) -> bool {
        let eps = self.boundary_tolerance();
        let mut winding = 0i32;
        for lp in self.loops() {
            let n = lp.len();
            for i in 0..n {
                let a = &lp[i];
                let b = &lp[(i + 1) % n];
                if segment_distance(pt, a, b) <= eps {
                    return false;
                }
                if a.y <= pt.y {
                    if b.y > pt.y && orient(a, b, pt) > 0.0 {
                        winding += 1;
                    }
                } else if b.y <= pt.y && orient(a, b, pt) < 0.0 {
                    winding -= 1;
                }
            }
        }
        winding != 0
    }

    /// Indices of outer-loop vertices with interior angle above pi.
    pub fn reflex_vertices(&self) -> Vec<usize> {
        reflex_indices(&self.outer, 1e-12 * self.diameter().powi(2))
    }

    pub fn is_convex(&self) -> bool {
        !self.has_holes() && self.reflex_vertices().is_empty()
    }

    /// Triangulation by ear clipping; holes are first joined to the outer
    /// loop by bridge cuts.
    pub fn triangulate(&self) -> Result<Vec<Triangle>> {
        let merged = if self.holes.is_empty() {
            self.outer.clone()
        } else {
            bridge_holes(&self.outer, &self.holes)?
        };
        let tris = ear_clip(&merged)?;
        Ok(tris.into_iter().map(|[a, b, c]| [merged[a], merged[b], merged[c]]).collect())
    }

    pub fn map(&self, m: &AffineMap) -> Polygon {
        Polygon {
            outer: self.outer.iter().map(|p| m.apply(p)).collect(),
            holes: self
                .holes
                .iter()
                .map(|h| h.iter().map(|p| m.apply(p)).collect())
                .collect(),
        }
    }

    /// Largest |x_i| over the outer vertices.
    pub fn max_abs_coordinate(&self) -> f64 {
        self.outer.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
    }

    fn check_no_crossings(&self) -> Result<()> {
        let edges = self.edges();
        let eps = 1e-14 * self.diameter().powi(2);
        // Adjacent edges of the same loop share an endpoint; only test
        // non-adjacent pairs.
        let mut loop_of = Vec::new();
        let mut pos = Vec::new();
        let mut lens = Vec::new();
        for (k, lp) in self.loops().enumerate() {
            for i in 0..lp.len() {
                loop_of.push(k);
                pos.push(i);
            }
            lens.push(lp.len());
        }
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                if loop_of[i] == loop_of[j] {
                    let n = lens[loop_of[i]];
                    let (a, b) = (pos[i], pos[j]);
                    if (a + 1) % n == b || (b + 1) % n == a {
                        continue;
                    }
                }
                let (p1, p2) = edges[i];
                let (q1, q2) = edges[j];
                if segments_intersect(&p1, &p2, &q1, &q2, eps) {
                    return Err(Error::InvalidPolygon(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polygon {
    /// Text format: `d nloops`, then per loop `nverts` followed by `x y` lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "2 {}", 1 + self.holes.len())?;
        for lp in self.loops() {
            writeln!(f, "{}", lp.len())?;
            for p in lp {
                writeln!(f, "{:.17e} {:.17e}", p.x, p.y)?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Polygon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tok = s.split_whitespace();
        let mut next = |what: &str| {
            tok.next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of input reading {what}")))
        };
        let d: usize = parse_tok(next("dimension")?)?;
        if d != 2 {
            return Err(Error::Parse(format!("only 2-D polygons are supported, got d = {d}")));
        }
        let nloops: usize = parse_tok(next("loop count")?)?;
        if nloops == 0 {
            return Err(Error::Parse("at least one loop is required".into()));
        }
        let mut loops = Vec::with_capacity(nloops);
        for _ in 0..nloops {
            let nv: usize = parse_tok(next("vertex count")?)?;
            let mut lp = Vec::with_capacity(nv);
            for _ in 0..nv {
                let x: f64 = parse_tok(next("x")?)?;
                let y: f64 = parse_tok(next("y")?)?;
                lp.push(Point::new(x, y));
            }
            loops.push(lp);
        }
        let outer = loops.remove(0);
        Polygon::new(outer, loops)
    }
}

fn parse_tok<T: std::str::FromStr>(t: &str) -> Result<T> {
    t.parse().map_err(|_| Error::Parse(format!("cannot parse '{t}'")))
}

fn check_loop(pts: &[Point], what: &str) -> Result<()> {
    if pts.len() < 3 {
        return Err(Error::InvalidPolygon(format!("{what} has fewer than 3 vertices")));
    }
    if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::InvalidPolygon(format!("{what} has non-finite coordinates")));
    }
    let n = pts.len();
    for i in 0..n {
        if pts[i] == pts[(i + 1) % n] {
            return Err(Error::InvalidPolygon(format!("{what} repeats vertex {i}")));
        }
    }
    Ok(())
}

pub(crate) fn reflex_indices(pts: &[Point], eps: f64) -> Vec<usize> {
    let n = pts.len();
    (0..n)
        .filter(|&i| orient(&pts[(i + n - 1) % n], &pts[i], &pts[(i + 1) % n]) < -eps)
        .collect()
}

/// True when every turn of the counter-clockwise loop is at least `-eps`.
pub fn loop_is_convex(pts: &[Point], eps: f64) -> bool {
    reflex_indices(pts, eps).is_empty()
}

/// Joins each hole to the outer boundary with a two-way bridge edge, giving a
/// single weakly simple counter-clockwise loop.
fn bridge_holes(outer: &[Point], holes: &[Vec<Point>]) -> Result<Vec<Point>> {
    let mut merged: Vec<Point> = outer.to_vec();
    let mut order: Vec<usize> = (0..holes.len()).collect();
    let max_x = |h: &Vec<Point>| h.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.x));
    order.sort_by(|&a, &b| max_x(&holes[b]).total_cmp(&max_x(&holes[a])));
    let scale = outer
        .iter()
        .chain(holes.iter().flatten())
        .fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
        .max(1.0);
    let eps = 1e-14 * scale * scale;

    for (done, &hk) in order.iter().enumerate() {
        let hole = &holes[hk];
        let (im, m) = hole
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.x.total_cmp(&b.1.x).then(b.0.cmp(&a.0)))
            .map(|(i, p)| (i, *p))
            .unwrap();
        let mut cand: Vec<usize> = (0..merged.len()).collect();
        cand.sort_by(|&a, &b| (merged[a] - m).norm().total_cmp(&(merged[b] - m).norm()));
        let pending: Vec<&Vec<Point>> = order[done..].iter().map(|&k| &holes[k]).collect();
        let mut chosen = None;
        'outer: for &iv in &cand {
            let v = merged[iv];
            let blocked = |lp: &[Point]| {
                let n = lp.len();
                (0..n).any(|i| {
                    let a = lp[i];
                    let b = lp[(i + 1) % n];
                    if a == v || b == v || a == m || b == m {
                        return false;
                    }
                    segments_intersect(&m, &v, &a, &b, eps)
                })
            };
            if blocked(&merged) || pending.iter().any(|h| blocked(h)) {
                continue;
            }
            // The bridge must leave v into the interior: m lies inside the
            // wedge formed at v by its neighbours.
            let n = merged.len();
            let prev = merged[(iv + n - 1) % n];
            let next = merged[(iv + 1) % n];
            let convex = orient(&prev, &v, &next) >= 0.0;
            let left_of = |a: &Point, b: &Point| orient(a, b, &m) > 0.0;
            let inside_wedge = if convex {
                left_of(&prev, &v) && left_of(&v, &next)
            } else {
                left_of(&prev, &v) || left_of(&v, &next)
            };
            if !inside_wedge {
                continue 'outer;
            }
            chosen = Some(iv);
            break;
        }
        let iv = chosen.ok_or_else(|| Error::Degenerate("no visible bridge for hole".into()))?;
        let mut next = Vec::with_capacity(merged.len() + hole.len() + 2);
        next.extend_from_slice(&merged[..=iv]);
        let hn = hole.len();
        for k in 0..=hn {
            next.push(hole[(im + k) % hn]);
        }
        next.extend_from_slice(&merged[iv..]);
        merged = next;
    }
    Ok(merged)
}

fn point_in_closed_triangle(p: &Point, a: &Point, b: &Point, c: &Point, eps: f64) -> bool {
    orient(a, b, p) >= -eps && orient(b, c, p) >= -eps && orient(c, a, p) >= -eps
}

/// Ear clipping of a counter-clockwise (possibly weakly simple) loop.
/// Collinear vertices are dropped when no strict ear remains.
pub fn ear_clip(pts: &[Point]) -> Result<Vec<[usize; 3]>> {
    let n = pts.len();
    if n < 3 {
        return Err(Error::Degenerate("fewer than 3 vertices".into()));
    }
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs())).max(1e-300);
    let area = loop_signed_area(pts);
    if area <= 1e-14 * scale * scale {
        return Err(Error::Degenerate("loop has no positive area (collinear or clockwise)".into()));
    }
    let eps = 1e-13 * scale * scale;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let mut start = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for step in 0..m {
            let k = (start + step) % m;
            let ip = idx[(k + m - 1) % m];
            let ic = idx[k];
            let inx = idx[(k + 1) % m];
            let (a, b, c) = (&pts[ip], &pts[ic], &pts[inx]);
            if orient(a, b, c) <= eps {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                let q = &pts[j];
                if q == a || q == b || q == c {
                    return false;
                }
                point_in_closed_triangle(q, a, b, c, -eps.min(0.0))
            });
            if blocked {
                continue;
            }
            tris.push([ip, ic, inx]);
            idx.remove(k);
            start = if k == 0 { 0 } else { k - 1 };
            clipped = true;
            break;
        }
        if !clipped {
            // Remove a collinear vertex if one exists.
            let pos = (0..m).find(|&k| {
                let a = &pts[idx[(k + m - 1) % m]];
                let b = &pts[idx[k]];
                let c = &pts[idx[(k + 1) % m]];
                orient(a, b, c).abs() <= eps
            });
            match pos {
                Some(k) => {
                    idx.remove(k);
                }
                None => return Err(Error::Degenerate("ear clipping found no ear".into())),
            }
        }
    }
    let (a, b, c) = (idx[0], idx[1], idx[2]);
    if orient(&pts[a], &pts[b], &pts[c]) > eps {
        tris.push([a, b, c]);
    }
    Ok(tris)
}

/// Similarity map `x -> scale * x + translate`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub translate: Vector2<f64>,
}

impl AffineMap {
    pub fn new(scale: f64, translate: Vector2<f64>) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!("map scale must be positive, got {scale}")));
        }
        Ok(Self { scale, translate })
    }

    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            translate: Vector2::zeros(),
        }
    }

    #[inline]
    pub fn apply(&self, p: &Point) -> Point {
        Point::from(p.coords * self.scale + self.translate)
    }

    #[inline]
    pub fn invert(&self, q: &Point) -> Point {
        Point::from((q.coords - self.translate) / self.scale)
    }

    pub fn inverse(&self) -> AffineMap {
        AffineMap {
            scale: 1.0 / self.scale,
            translate: -self.translate / self.scale,
        }
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &AffineMap) -> AffineMap {
        AffineMap {
            scale: self.scale * first.scale,
            translate: first.translate * self.scale + self.translate,
        }
    }
}

/// Centers the polygon's centroid at the origin and scales it into the box
/// |x_i| <= tanh(1/2).
pub fn normalize_hull(poly: &Polygon) -> Result<(Polygon, AffineMap)> {
    normalize_hull_to(poly, moment_box_half_width())
}

/// Centers the centroid at the origin and scales so that the largest vertex
/// coordinate magnitude equals `half_width`.
pub fn normalize_hull_to(poly: &Polygon, half_width: f64) -> Result<(Polygon, AffineMap)> {
    let area = poly.signed_area();
    if !(area > 0.0) {
        return Err(Error::Degenerate("cannot normalize a polygon with zero area".into()));
    }
    let c = poly.centroid();
    let extent = poly
        .outer()
        .iter()
        .fold(0.0f64, |m, p| m.max((p.x - c.x).abs()).max((p.y - c.y).abs()));
    let scale = half_width / extent;
    let map = AffineMap::new(scale, -c.coords * scale)?;
    Ok((poly.map(&map), map))
}
