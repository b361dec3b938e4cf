//! Gauss-Legendre rules on segments, triangles and polygons.

use crate::geometry::{orient, Triangle};
use crate::{Error, Point, Polygon, Result};

/// Highest exactness degree offered on segments.
pub const MAX_EDGE_DEGREE: u32 = 41;
/// Highest exactness degree offered on triangles and polygons.
pub const MAX_AREA_DEGREE: u32 = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: u32,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(&Point) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    fn append(&mut self, other: QuadratureRule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }
}

/// `n`-point Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Number of Gauss points exact for polynomials of the given degree.
pub fn points_for_degree(degree: u32) -> usize {
    (degree as usize + 2) / 2
}

/// Gauss-Legendre rule on the segment [a, b]; weights carry the length.
pub fn edge_rule(a: &Point, b: &Point, degree: u32) -> Result<QuadratureRule> {
    if degree > MAX_EDGE_DEGREE {
        return Err(Error::DegreeTooHigh {
            requested: degree as usize,
            max: MAX_EDGE_DEGREE as usize,
        });
    }
    if a == b {
        return Err(Error::Degenerate("edge endpoints coincide".into()));
    }
    let (x, w) = gauss_legendre(points_for_degree(degree));
    let half = 0.5 * (b - a).norm();
    let nodes = x.iter().map(|&t| a + (b - a) * (0.5 * (t + 1.0))).collect();
    Ok(QuadratureRule {
        nodes,
        weights: w.iter().map(|wi| wi * half).collect(),
        degree,
    })
}

/// Collapsed tensor-product rule on a triangle.
pub fn triangle_rule(tri: &Triangle, degree: u32) -> Result<QuadratureRule> {
    if degree > MAX_AREA_DEGREE {
        return Err(Error::DegreeTooHigh {
            requested: degree as usize,
            max: MAX_AREA_DEGREE as usize,
        });
    }
    let [a, b, c] = tri;
    let twice_area = orient(a, b, c);
    let scale = (b - a).norm().max((c - a).norm()).max((c - b).norm());
    if twice_area.abs() <= 1e-14 * scale * scale {
        return Err(Error::Degenerate("triangle has zero area".into()));
    }
    // x = a + u (b - a) + u v (c - b), Jacobian |2A| u; the integrand gains one
    // degree in u.
    let (gu, wu) = gauss_legendre(points_for_degree(degree + 1));
    let (gv, wv) = gauss_legendre(points_for_degree(degree));
    let mut nodes = Vec::with_capacity(gu.len() * gv.len());
    let mut weights = Vec::with_capacity(gu.len() * gv.len());
    for (ui, wui) in gu.iter().zip(&wu) {
        let u = 0.5 * (ui + 1.0);
        for (vi, wvi) in gv.iter().zip(&wv) {
            let v = 0.5 * (vi + 1.0);
            nodes.push(a + (b - a) * u + (c - b) * (u * v));
            weights.push(0.25 * wui * wvi * twice_area.abs() * u);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        degree,
    })
}

/// Triangle rules concatenated over the ear-clipping triangulation.
pub fn polygon_rule(poly: &Polygon, degree: u32) -> Result<QuadratureRule> {
    if degree > MAX_AREA_DEGREE {
        return Err(Error::DegreeTooHigh {
            requested: degree as usize,
            max: MAX_AREA_DEGREE as usize,
        });
    }
    let mut rule = QuadratureRule {
        nodes: vec![],
        weights: vec![],
        degree,
    };
    for t in poly.triangulate()? {
        rule.append(triangle_rule(&t, degree)?);
    }
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta_xy(a: i32, b: i32) -> f64 {
        // integral of x^a y^b over the reference triangle = a! b! / (a+b+2)!
        let f = |n: i32| (1..=n).map(|k| k as f64).product::<f64>();
        f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=21 {
            let (x, w) = gauss_legendre(n);
            for k in 0..(2 * n) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "n={n} k={k} {q} {exact}");
            }
        }
    }

    #[test]
    fn edge_rule_examples() {
        let r = edge_rule(&Point::new(-1.0, 0.0), &Point::new(1.0, 0.0), 1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.nodes[0], Point::new(0.0, 0.0));
        assert_eq!(r.weights[0], 2.0);
        let r = edge_rule(&Point::new(-1.0, 0.0), &Point::new(1.0, 0.0), 3).unwrap();
        assert!((r.integrate(|p| p.x * p.x) - 2.0 / 3.0).abs() < 1e-14);
        let r = edge_rule(&Point::new(0.0, 0.0), &Point::new(3.0, 4.0), 5).unwrap();
        assert!((r.measure() - 5.0).abs() < 1e-14);
        assert!(edge_rule(&Point::origin(), &Point::new(1.0, 0.0), 42).is_err());
    }

    #[test]
    fn triangle_rule_examples() {
        let t = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let r = triangle_rule(&t, 1).unwrap();
        assert!((r.measure() - 0.5).abs() < 1e-15);
        assert!((r.integrate(|p| p.x) - 1.0 / 6.0).abs() < 1e-13);
        let r = triangle_rule(&t, 20).unwrap();
        let exact = beta_xy(10, 10);
        assert!(((r.integrate(|p| p.x.powi(10) * p.y.powi(10)) - exact) / exact).abs() < 1e-10);
        assert!(r.weights.iter().all(|&w| w > 0.0));
        for a in 0..=20 {
            for b in 0..=(20 - a) {
                let e = beta_xy(a, b);
                let q = r.integrate(|p| p.x.powi(a) * p.y.powi(b));
                assert!(((q - e) / e).abs() < 1e-10, "{a} {b}");
            }
        }
        assert!(triangle_rule(&t, 21).is_err());
        let flat = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert!(triangle_rule(&flat, 2).is_err());
    }

    #[test]
    fn polygon_rule_measures_area() {
        let sq = Polygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap();
        let r = polygon_rule(&sq, 4).unwrap();
        assert!((r.measure() - 4.0).abs() < 1e-13);
        assert!((r.integrate(|p| p.x * p.x) - 4.0 / 3.0).abs() < 1e-13);
    }
}
