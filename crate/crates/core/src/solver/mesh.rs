//! Hull meshes: per-hull bases on normalized hulls, physical quadrature and
//! interface connectivity.

use std::str::FromStr;

use nalgebra::{DMatrix, Vector2};
use rayon::prelude::*;

use crate::basis::{build_basis, HullBasis, Route};
use crate::candidates::{candidate_count_for, fill_count, DEFAULT_OVERSAMPLE};
use crate::fekete::{approximate_fekete, FeketeSet, Method, FEKETE_BOX_HALF_WIDTH};
use crate::geometry::normalize_hull_to;
use crate::quadrature::{edge_rule, polygon_rule, MAX_AREA_DEGREE, MAX_EDGE_DEGREE};
use crate::{AffineMap, Error, MonomialSpec, Point, Polygon, Result, Space};

/// Element family of a mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Approximate Fekete nodes of the P space on each hull.
    HullP,
    /// Approximate Fekete nodes of the Q space on each hull.
    HullQ,
    /// Equispaced Lagrange nodes on triangles.
    TriLagrange,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::TriLagrange, Family::HullP, Family::HullQ];
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::HullP => "hull-P",
            Family::HullQ => "hull-Q",
            Family::TriLagrange => "tri-lagrange",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hull-P" | "hull-p" => Ok(Family::HullP),
            "hull-Q" | "hull-q" => Ok(Family::HullQ),
            "tri-lagrange" => Ok(Family::TriLagrange),
            _ => Err(Error::Parse(format!(
                "unknown family '{s}' (expected hull-P, hull-Q or tri-lagrange)"
            ))),
        }
    }
}

/// One hull with its basis and volume quadrature in physical coordinates.
#[derive(Clone, Debug)]
pub struct Element {
    pub poly: Polygon,
    /// Physical to normalized coordinates.
    pub map: AffineMap,
    pub basis: HullBasis,
    pub vol_pts: Vec<Point>,
    pub vol_w: Vec<f64>,
    /// Row `q` holds the nodal basis at `vol_pts[q]`.
    pub phi: DMatrix<f64>,
    pub phi_x: DMatrix<f64>,
    pub phi_y: DMatrix<f64>,
}

impl Element {
    pub fn new(poly: Polygon, map: AffineMap, basis: HullBasis) -> Result<Self> {
        let deg = (2 * basis.fekete.spec.max_total_degree()).min(MAX_AREA_DEGREE);
        let rule = polygon_rule(&poly, deg)?;
        let s = map.scale;
        let refp: Vec<Point> = rule.nodes.iter().map(|p| map.apply(p)).collect();
        let phi = basis.nodal_matrix(&refp);
        let n = basis.len();
        let mut phi_x = DMatrix::zeros(refp.len(), n);
        let mut phi_y = DMatrix::zeros(refp.len(), n);
        for (q, p) in refp.iter().enumerate() {
            let (gx, gy) = basis.eval_nodal_grad(p);
            phi_x.row_mut(q).copy_from(&(gx * s).transpose());
            phi_y.row_mut(q).copy_from(&(gy * s).transpose());
        }
        Ok(Self {
            poly,
            map,
            basis,
            vol_pts: rule.nodes,
            vol_w: rule.weights,
            phi,
            phi_x,
            phi_y,
        })
    }

    pub fn dof(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self) -> u32 {
        self.basis.fekete.spec.degree()
    }

    /// Nodes in physical coordinates.
    pub fn nodes(&self) -> Vec<Point> {
        self.basis.nodes().iter().map(|p| self.map.invert(p)).collect()
    }

    /// Row `i` holds the nodal basis at physical point `pts[i]`.
    pub fn eval(&self, pts: &[Point]) -> DMatrix<f64> {
        let refp: Vec<Point> = pts.iter().map(|p| self.map.apply(p)).collect();
        self.basis.nodal_matrix(&refp)
    }

    /// Mass matrix `∫ ψ ψ^T`.
    pub fn mass(&self) -> DMatrix<f64> {
        weighted_gram(&self.phi, &self.phi, &self.vol_w)
    }
}

/// `Σ_q w_q a(q,:)^T b(q,:)`.
pub(crate) fn weighted_gram(a: &DMatrix<f64>, b: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut aw = a.clone();
    for (q, mut r) in aw.row_iter_mut().enumerate() {
        r *= w[q];
    }
    aw.tr_mul(b)
}

/// An edge seen from its left hull, oriented counter-clockwise for that hull.
#[derive(Clone, Debug)]
pub struct Face {
    pub left: usize,
    pub left_edge: usize,
    /// Neighbor hull and its local edge, `None` on the boundary.
    pub right: Option<(usize, usize)>,
    pub a: Point,
    pub b: Point,
    /// Outward unit normal of the left hull.
    pub normal: Vector2<f64>,
    /// Right-side coordinates are `left + shift` (nonzero across periodic seams).
    pub shift: Vector2<f64>,
    pub pts: Vec<Point>,
    pub w: Vec<f64>,
    pub phi_l: DMatrix<f64>,
    pub phi_r: Option<DMatrix<f64>>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct HullMesh {
    pub elements: Vec<Element>,
    pub faces: Vec<Face>,
    pub family: Family,
}

/// Equispaced nodes `v0 + (i/p)(v1 - v0) + (j/p)(v2 - v0)`, `i + j <= p`.
pub fn equispaced_triangle_nodes(tri: &[Point], p: u32) -> Vec<Point> {
    if p == 0 {
        return vec![Point::from((tri[0].coords + tri[1].coords + tri[2].coords) / 3.0)];
    }
    let mut out = Vec::new();
    let pf = p as f64;
    for j in 0..=p {
        for i in 0..=p - j {
            out.push(tri[0] + (tri[1] - tri[0]) * (i as f64 / pf) + (tri[2] - tri[0]) * (j as f64 / pf));
        }
    }
    out
}

/// Basis on a normalized hull for the given family.
pub fn hull_basis(norm: &Polygon, family: Family, p: u32) -> Result<HullBasis> {
    let fek = match family {
        Family::HullP | Family::HullQ => {
            let space = if family == Family::HullP { Space::P } else { Space::Q };
            let spec = MonomialSpec::new(space, p);
            let cands = fill_count(norm, candidate_count_for(&spec, DEFAULT_OVERSAMPLE)?)?;
            approximate_fekete(norm, &spec, &cands, Method::Qr)?
        }
        Family::TriLagrange => {
            if norm.outer().len() != 3 || norm.has_holes() {
                return Err(Error::Mesh("tri-lagrange elements must be triangles".into()));
            }
            let spec = MonomialSpec::new(Space::P, p);
            FeketeSet::from_nodes(norm, &spec, equispaced_triangle_nodes(norm.outer(), p))?
        }
    };
    build_basis(&fek, Route::Direct)
}

impl HullMesh {
    /// Builds bases (one per distinct normalized hull shape and degree) and
    /// matches interface edges. `periods` identifies opposite sides of an
    /// axis-aligned box of the given extents.
    pub fn build(
        polys: Vec<Polygon>,
        family: Family,
        degrees: &[u32],
        periods: Option<Vector2<f64>>,
    ) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::Mesh("mesh has no hulls".into()));
        }
        if degrees.len() != polys.len() {
            return Err(Error::InvalidArgument(format!(
                "{} degrees given for {} hulls",
                degrees.len(),
                polys.len()
            )));
        }
        let normalized: Vec<(Polygon, AffineMap)> = polys
            .iter()
            .map(|p| normalize_hull_to(p, FEKETE_BOX_HALF_WIDTH))
            .collect::<Result<_>>()?;
        // Distinct (shape, degree) pairs share one basis.
        let mut keys: Vec<(String, u32)> = Vec::new();
        let mut slot = Vec::with_capacity(polys.len());
        for (i, (np, _)) in normalized.iter().enumerate() {
            let k = (shape_key(np), degrees[i]);
            let pos = keys.iter().position(|x| *x == k).unwrap_or_else(|| {
                keys.push(k);
                keys.len() - 1
            });
            slot.push(pos);
        }
        let firsts: Vec<usize> = (0..keys.len()).map(|k| slot.iter().position(|&s| s == k).unwrap()).collect();
        let bases: Vec<HullBasis> = firsts
            .par_iter()
            .map(|&i| hull_basis(&normalized[i].0, family, degrees[i]))
            .collect::<Result<_>>()?;
        let elements: Vec<Element> = polys
            .into_par_iter()
            .enumerate()
            .map(|(i, poly)| {
                let (np, map) = &normalized[i];
                let mut b = bases[slot[i]].clone();
                b.fekete.poly = np.clone();
                Element::new(poly, *map, b)
            })
            .collect::<Result<_>>()?;
        let faces = match_faces(&elements, periods)?;
        Ok(Self {
            elements,
            faces,
            family,
        })
    }

    /// `n x n` quads on `[lo, hi]^2`; tri-lagrange splits each quad along
    /// its lower-left to upper-right diagonal.
    pub fn square_grid(n: usize, lo: f64, hi: f64, family: Family, p: u32, periodic: bool) -> Result<Self> {
        let polys = grid_polygons(n, lo, hi, family == Family::TriLagrange)?;
        let degrees = vec![p; polys.len()];
        let periods = periodic.then(|| Vector2::new(hi - lo, hi - lo));
        Self::build(polys, family, &degrees, periods)
    }

    /// The 4x4 benchmark mesh on `[-1, 1]^2`.
    pub fn benchmark(family: Family, p: u32) -> Result<Self> {
        Self::square_grid(4, -1.0, 1.0, family, p, false)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Scalar degrees of freedom `Σ N_h`.
    pub fn dof(&self) -> usize {
        self.elements.iter().map(|e| e.dof()).sum()
    }

    /// Offsets of each hull's scalar block.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.len() + 1);
        let mut acc = 0;
        off.push(0);
        for e in &self.elements {
            acc += e.dof();
            off.push(acc);
        }
        off
    }

    /// Smallest hull diameter.
    pub fn h_min(&self) -> f64 {
        self.elements.iter().map(|e| e.poly.diameter()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_degree(&self) -> u32 {
        self.elements.iter().map(|e| e.degree()).max().unwrap_or(0)
    }
}

/// Polygons of an `n x n` grid on `[lo, hi]^2`, row by row from the bottom.
pub fn grid_polygons(n: usize, lo: f64, hi: f64, triangles: bool) -> Result<Vec<Polygon>> {
    if n == 0 || !(hi > lo) {
        return Err(Error::InvalidArgument(format!("invalid grid {n} on [{lo}, {hi}]")));
    }
    let h = (hi - lo) / n as f64;
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (x0, y0) = (lo + i as f64 * h, lo + j as f64 * h);
            let (x1, y1) = (x0 + h, y0 + h);
            if triangles {
                out.push(Polygon::from_coords(&[(x0, y0), (x1, y0), (x1, y1)])?);
                out.push(Polygon::from_coords(&[(x0, y0), (x1, y1), (x0, y1)])?);
            } else {
                out.push(Polygon::rectangle(x0, y0, x1, y1)?);
            }
        }
    }
    Ok(out)
}

fn shape_key(p: &Polygon) -> String {
    let mut s = String::new();
    for l in p.loops() {
        for v in l {
            s.push_str(&format!("{:.12e},{:.12e};", v.x, v.y));
        }
        s.push('|');
    }
    s
}

fn face_degree(a: &Element, b: Option<&Element>) -> u32 {
    let d = a.basis.fekete.spec.max_total_degree().max(b.map_or(0, |e| e.basis.fekete.spec.max_total_degree()));
    (2 * d + 1).min(MAX_EDGE_DEGREE)
}

fn match_faces(elements: &[Element], periods: Option<Vector2<f64>>) -> Result<Vec<Face>> {
    let diam = elements.iter().map(|e| e.poly.diameter()).fold(0.0, f64::max);
    let tol = 1e-10 * diam.max(1.0);
    let mut shifts = vec![Vector2::zeros()];
    if let Some(per) = periods {
        shifts.extend([
            Vector2::new(per.x, 0.0),
            Vector2::new(-per.x, 0.0),
            Vector2::new(0.0, per.y),
            Vector2::new(0.0, -per.y),
        ]);
    }
    let edges: Vec<(usize, usize, Point, Point)> = elements
        .iter()
        .enumerate()
        .flat_map(|(h, e)| {
            e.poly
                .edges()
                .into_iter()
                .enumerate()
                .map(move |(k, (a, b))| (h, k, a, b))
        })
        .collect();
    let mut taken = vec![false; edges.len()];
    let mut faces = Vec::new();
    for i in 0..edges.len() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let (h, k, a, b) = edges[i];
        let mut partner = None;
        'search: for s in &shifts {
            for j in (i + 1)..edges.len() {
                if taken[j] {
                    continue;
                }
                let (_, _, c, d) = edges[j];
                if (c - (b + s)).norm() <= tol && (d - (a + s)).norm() <= tol {
                    partner = Some((j, *s));
                    break 'search;
                }
            }
        }
        let t = b - a;
        let normal = Vector2::new(t.y, -t.x) / t.norm();
        let left = &elements[h];
        let (right, shift, right_el) = match partner {
            Some((j, s)) => {
                taken[j] = true;
                (Some((edges[j].0, edges[j].1)), s, Some(&elements[edges[j].0]))
            }
            None => (None, Vector2::zeros(), None),
        };
        if right.is_some_and(|(r, _)| r == h) {
            return Err(Error::Mesh(format!("hull {h} is its own neighbor")));
        }
        let rule = edge_rule(&a, &b, face_degree(left, right_el))?;
        let phi_l = left.eval(&rule.nodes);
        let phi_r = right_el.map(|r| {
            let shifted: Vec<Point> = rule.nodes.iter().map(|p| p + shift).collect();
            r.eval(&shifted)
        });
        faces.push(Face {
            left: h,
            left_edge: k,
            right,
            a,
            b,
            normal,
            shift,
            pts: rule.nodes,
            w: rule.weights,
            phi_l,
            phi_r,
        });
    }
    Ok(faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_connectivity() {
        let m = HullMesh::square_grid(3, -1.0, 1.0, Family::HullP, 2, false).unwrap();
        assert_eq!(m.len(), 9);
        // 12 interior + 12 boundary edges
        assert_eq!(m.faces.len(), 24);
        assert_eq!(m.faces.iter().filter(|f| f.is_boundary()).count(), 12);
        let pm = HullMesh::square_grid(3, -1.0, 1.0, Family::HullP, 2, true).unwrap();
        assert_eq!(pm.faces.len(), 18);
        assert!(pm.faces.iter().all(|f| !f.is_boundary()));
    }

    #[test]
    fn triangle_grid_and_dof() {
        let m = HullMesh::square_grid(4, -1.0, 1.0, Family::TriLagrange, 2, false).unwrap();
        assert_eq!(m.len(), 32);
        assert_eq!(m.dof(), 32 * 6);
        let q = HullMesh::benchmark(Family::HullQ, 2).unwrap();
        assert_eq!(q.dof(), 16 * 9);
    }

    #[test]
    fn physical_quadrature_and_chain_rule() {
        let m = HullMesh::square_grid(2, 0.0, 1.0, Family::HullP, 3, false).unwrap();
        let e = &m.elements[3];
        let area: f64 = e.vol_w.iter().sum();
        assert!((area - 0.25).abs() < 1e-13);
        // Partition of unity and its zero gradient
        for q in 0..e.phi.nrows() {
            assert!((e.phi.row(q).sum() - 1.0).abs() < 1e-10);
            assert!(e.phi_x.row(q).sum().abs() < 1e-8);
        }
        // d/dx of the interpolant of x equals 1
        let nodes = e.nodes();
        let u: nalgebra::DVector<f64> = nalgebra::DVector::from_iterator(nodes.len(), nodes.iter().map(|p| p.x));
        let dx = &e.phi_x * &u;
        assert!(dx.iter().all(|v| (v - 1.0).abs() < 1e-8));
    }

    #[test]
    fn faces_coincide() {
        let m = HullMesh::benchmark(Family::HullP, 2).unwrap();
        for f in m.faces.iter().filter(|f| !f.is_boundary()) {
            let (r, k) = f.right.unwrap();
            let (c, d) = m.elements[r].poly.edges()[k];
            assert!((c - f.b).norm() < 1e-10 && (d - f.a).norm() < 1e-10);
        }
    }

    #[test]
    fn family_parsing() {
        for f in Family::ALL {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        assert!("hex".parse::<Family>().is_err());
    }
}
