//! Exact monomial moments by reduction to boundary integrals.
//!
//! For `f = x^a y^b` the field `F = (x^{a+1} y^b / (2(a+1)), x^a y^{b+1} / (2(b+1)))`
//! has divergence `f`, so `∫_Ω f = ∮ F·n ds`. Along a straight edge `F·n` is a
//! polynomial of degree `a + b + 1`, integrated exactly by Gauss-Legendre.

use nalgebra::{DMatrix, DVector};

use crate::monomials::{Exponent, MonomialSpec};
use crate::quadrature::{gauss_legendre, points_for_degree};
use crate::{Error, Point, Polygon, Result};

/// Component `k` (0 for x, 1 for y) of the flux field whose divergence is monomial `j`.
pub fn antiderivative_flux(spec: &MonomialSpec, j: usize, k: usize, pt: &Point) -> Result<f64> {
    let e = spec
        .exponents()
        .get(j)
        .ok_or_else(|| Error::InvalidArgument(format!("monomial index {j} out of range")))?;
    if k > 1 {
        return Err(Error::InvalidArgument(format!("axis {k} out of range for d = 2")));
    }
    Ok(flux(e, k, pt))
}

#[inline]
fn flux(e: &Exponent, k: usize, pt: &Point) -> f64 {
    let (a, b) = (e[0] as i32, e[1] as i32);
    if k == 0 {
        pt.x.powi(a + 1) * pt.y.powi(b) / (2.0 * (a + 1) as f64)
    } else {
        pt.x.powi(a) * pt.y.powi(b + 1) / (2.0 * (b + 1) as f64)
    }
}

/// Moments `∫_Ω x^a y^b dΩ` for an arbitrary exponent list.
pub fn monomial_moments(poly: &Polygon, exps: &[Exponent]) -> DVector<f64> {
    let deg = exps.iter().map(|e| e[0] + e[1]).max().unwrap_or(0);
    let (gx, gw) = gauss_legendre(points_for_degree(deg + 1));
    let kmax = exps.iter().map(|e| e[0].max(e[1])).max().unwrap_or(0) as usize + 1;
    let mut m = DVector::zeros(exps.len());
    let mut px = vec![1.0; kmax + 1];
    let mut py = vec![1.0; kmax + 1];
    for (a, b) in poly.edges() {
        let d = b - a;
        for (t, w) in gx.iter().zip(&gw) {
            let p = a + d * (0.5 * (t + 1.0));
            for i in 1..=kmax {
                px[i] = px[i - 1] * p.x;
                py[i] = py[i - 1] * p.y;
            }
            // F·n ds with n ds = (dy, -dx) dt, dt = dτ / 2.
            let h = 0.5 * w;
            for (mj, e) in m.iter_mut().zip(exps) {
                let (ea, eb) = (e[0] as usize, e[1] as usize);
                let f1 = px[ea + 1] * py[eb] / (2.0 * (ea + 1) as f64);
                let f2 = px[ea] * py[eb + 1] / (2.0 * (eb + 1) as f64);
                *mj += h * (f1 * d.y - f2 * d.x);
            }
        }
    }
    m
}

/// Moments of every monomial of the spec over the polygon (holes included).
pub fn boundary_moments(poly: &Polygon, spec: &MonomialSpec) -> DVector<f64> {
    monomial_moments(poly, spec.exponents())
}

/// `∫_Ω f·f dΩ`, the squared moment norm of the monomial vector.
pub fn moment_norm_sq(poly: &Polygon, spec: &MonomialSpec) -> f64 {
    boundary_moments(poly, &spec.squared()).sum()
}

/// Gram matrix `G_ij = ∫_Ω f_i f_j dΩ`; its trace is [`moment_norm_sq`].
pub fn gram_matrix(poly: &Polygon, spec: &MonomialSpec) -> DMatrix<f64> {
    let e = spec.exponents();
    let n = e.len();
    let mut pairs = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            pairs.push([e[i][0] + e[j][0], e[i][1] + e[j][1]]);
        }
    }
    let mut uniq = pairs.clone();
    uniq.sort_unstable();
    uniq.dedup();
    let vals = monomial_moments(poly, &uniq);
    let mut g = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let v = vals[uniq.binary_search(&pairs[k]).unwrap()];
            g[(i, j)] = v;
            g[(j, i)] = v;
            k += 1;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::normalize_hull;
    use crate::monomials::Space;
    use crate::quadrature::polygon_rule;

    fn square() -> Polygon {
        Polygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn flux_examples() {
        let s = MonomialSpec::new(Space::P, 2);
        let p = Point::new(0.3, 0.8);
        assert!((antiderivative_flux(&s, 0, 0, &p).unwrap() - 0.15).abs() < 1e-15);
        assert!((antiderivative_flux(&s, 3, 0, &Point::new(1.0, 0.0)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(antiderivative_flux(&s, 6, 0, &p).is_err());
        let h = 1e-6;
        let q = MonomialSpec::new(Space::Q, 3);
        for j in 0..q.len() {
            let fx = |x: f64| antiderivative_flux(&q, j, 0, &Point::new(x, p.y)).unwrap();
            let fy = |y: f64| antiderivative_flux(&q, j, 1, &Point::new(p.x, y)).unwrap();
            let div = (fx(p.x + h) - fx(p.x - h) + fy(p.y + h) - fy(p.y - h)) / (2.0 * h);
            assert!((div - q.eval(&p)[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn square_moments() {
        let s = MonomialSpec::new(Space::P, 2);
        let m = boundary_moments(&square(), &s);
        assert!((m[0] - 4.0).abs() < 1e-14);
        assert!(m[1].abs() < 1e-14);
        assert!((m[3] - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn holed_square_against_triangulation() {
        let hole = vec![
            Point::new(-0.5, -0.5),
            Point::new(-0.5, 0.5),
            Point::new(0.5, 0.5),
            Point::new(0.5, -0.5),
        ];
        let h = Polygon::new(square().outer().to_vec(), vec![hole]).unwrap();
        let s = MonomialSpec::new(Space::P, 6);
        let m = boundary_moments(&h, &s);
        assert!((m[0] - 3.0).abs() < 1e-14);
        let r = polygon_rule(&h, 6).unwrap();
        for (j, e) in s.exponents().iter().enumerate() {
            let q = r.integrate(|p| p.x.powi(e[0] as i32) * p.y.powi(e[1] as i32));
            assert!((q - m[j]).abs() < 1e-12 * m[j].abs().max(1.0));
        }
    }

    #[test]
    fn norm_examples() {
        assert!((moment_norm_sq(&square(), &MonomialSpec::new(Space::P, 0)) - 4.0).abs() < 1e-14);
        assert!((moment_norm_sq(&square(), &MonomialSpec::new(Space::P, 1)) - 20.0 / 3.0).abs() < 1e-13);
        let s2 = MonomialSpec::new(Space::Q, 3);
        let g = gram_matrix(&square(), &s2);
        assert!((g.trace() - moment_norm_sq(&square(), &s2)).abs() < 1e-12);
        assert!((g[(1, 1)] - 4.0 / 3.0).abs() < 1e-14);
        let (n, _) = normalize_hull(&square()).unwrap();
        let mut prev = 0.0;
        for p in 0..15 {
            let v = moment_norm_sq(&n, &MonomialSpec::new(Space::Q, p));
            assert!(v > prev && v <= 1.0 + 1e-9, "p={p} {v}");
            prev = v;
        }
    }
}
