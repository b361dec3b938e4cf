//! Nodal, modal and orthonormal hull bases.
//!
//! With `Ṽ = U S V^T` the SVD of the Vandermonde matrix at the Fekete nodes,
//! the nodal basis is `ψ(x) = f(x) a` with `a = V S^-1 U^T`, the modal basis is
//! `ψ̄(x) = f(x) V S^-1 = ψ(x) U`, and the normalized modes are
//! `ψ̃_k(x) = f(x) V_k / ‖f‖`. Modes come in descending singular value order.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::fekete::FeketeSet;
use crate::linalg::Svd;
use crate::moments::{gram_matrix, moment_norm_sq};
use crate::{Error, Point, Result};

/// Smallest admissible singular value of the preconditioned nodal matrix.
pub const MIN_SIGMA: f64 = 1e-12;

/// Formula used for the nodal coefficient matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    /// `a = V S^-1 U^T` from the SVD of the nodal Vandermonde matrix.
    Direct,
    /// `a = P0 V1 S1^-1 U1^T` from the SVD of the preconditioned nodal matrix.
    Reusable,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Direct => "direct",
            Route::Reusable => "reusable",
        })
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Route::Direct),
            "reusable" => Ok(Route::Reusable),
            _ => Err(Error::Parse(format!("unknown route '{s}' (expected direct or reusable)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HullBasis {
    pub fekete: FeketeSet,
    /// Nodal coefficients; column `j` holds the monomial coefficients of `ψ_j`.
    pub a: DMatrix<f64>,
    /// `V S^-1`.
    pub modal_factor: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    /// `sqrt(∫ f·f dΩ)`.
    pub fnorm: f64,
    pub route: Route,
}

pub fn build_basis(fek: &FeketeSet, route: Route) -> Result<HullBasis> {
    let svd = &fek.svd;
    if !(svd.sigma_min() > 0.0) || !(fek.precond_sigma_min >= MIN_SIGMA) {
        return Err(Error::Singular(format!(
            "degenerate node set: preconditioned sigma_min = {:.3e} below {MIN_SIGMA:e}",
            fek.precond_sigma_min
        )));
    }
    let mut modal = svd.v.clone();
    for (k, mut c) in modal.column_iter_mut().enumerate() {
        c /= svd.s[k];
    }
    let a = match route {
        Route::Direct => &modal * svd.u.transpose(),
        Route::Reusable => {
            let vsel = fek.spec.vandermonde(&fek.points);
            let s1 = Svd::new(&(vsel * &fek.p0))?;
            let mut m = s1.v.clone();
            for (k, mut c) in m.column_iter_mut().enumerate() {
                c /= s1.s[k];
            }
            &fek.p0 * m * s1.u.transpose()
        }
    };
    let fnorm = moment_norm_sq(&fek.poly, &fek.spec).sqrt();
    Ok(HullBasis {
        fekete: fek.clone(),
        a,
        modal_factor: modal,
        u: svd.u.clone(),
        sigma: svd.s.clone(),
        fnorm,
        route,
    })
}

impl HullBasis {
    pub fn len(&self) -> usize {
        self.a.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.a.ncols() == 0
    }

    pub fn nodes(&self) -> &[Point] {
        &self.fekete.points
    }

    /// `[ψ_1(x), ..., ψ_N(x)]`.
    pub fn eval_nodal(&self, pt: &Point) -> DVector<f64> {
        self.a.tr_mul(&self.fekete.spec.eval(pt))
    }

    /// Nodal values together with an inside flag; evaluation outside the hull
    /// is allowed but flagged.
    pub fn eval_nodal_flagged(&self, pt: &Point) -> (DVector<f64>, bool) {
        (self.eval_nodal(pt), self.fekete.poly.contains(pt))
    }

    /// Gradients `(∂ψ/∂x, ∂ψ/∂y)` in the hull's own coordinates.
    pub fn eval_nodal_grad(&self, pt: &Point) -> (DVector<f64>, DVector<f64>) {
        let (dx, dy) = self.fekete.spec.eval_grad(pt);
        (self.a.tr_mul(&dx), self.a.tr_mul(&dy))
    }

    /// Row `i` holds the nodal basis at `pts[i]`.
    pub fn nodal_matrix(&self, pts: &[Point]) -> DMatrix<f64> {
        self.fekete.spec.vandermonde(pts) * &self.a
    }

    /// First `k_m` modal functions `ψ̄_k`.
    pub fn eval_modal(&self, pt: &Point, km: usize) -> DVector<f64> {
        let f = self.fekete.spec.eval(pt);
        self.modal_factor.columns(0, km).tr_mul(&f)
    }

    /// First `k_m` normalized modes `ψ̃_k = f V_k / ‖f‖`.
    pub fn eval_orthonormal(&self, pt: &Point, km: usize) -> DVector<f64> {
        let f = self.fekete.spec.eval(pt);
        self.fekete.svd.v.columns(0, km).tr_mul(&f) / self.fnorm
    }

    /// Generalized Fourier coefficients `w = U_(:, 1..k_m)^T u`.
    pub fn gfc_transform(&self, u_nodal: &DVector<f64>, km: usize) -> DVector<f64> {
        self.u.columns(0, km).tr_mul(u_nodal)
    }

    /// Nodal values of `sum_k ψ̄_k w_k`; at the nodes `ψ̄ = U`.
    pub fn gfc_reconstruct(&self, w: &DVector<f64>) -> DVector<f64> {
        self.u.columns(0, w.len()) * w
    }

    /// Keeps the first `k_m` modes. Returns the filtered nodal values and the
    /// norm of the discarded coefficients.
    pub fn filter_modes(&self, u_nodal: &DVector<f64>, km: usize) -> (DVector<f64>, f64) {
        let w = self.gfc_transform(u_nodal, self.len());
        let kept = w.rows(0, km).clone_owned();
        let tail = w.rows(km, self.len() - km).norm();
        (self.gfc_reconstruct(&kept), tail)
    }

    /// Monomial coefficients of the interpolant of nodal values.
    pub fn interpolant_coefficients(&self, u_nodal: &DVector<f64>) -> DVector<f64> {
        &self.a * u_nodal
    }

    pub fn gfc_decay_check(&self, u_nodal: &DVector<f64>) -> DecayReport {
        let w = self.gfc_transform(u_nodal, self.len());
        let coef_norm = self.interpolant_coefficients(u_nodal).norm();
        let unorm = u_nodal.norm();
        let mut envelope: f64 = 0.0;
        let mut bound_holds = true;
        let mut nodal_bound_holds = true;
        for k in 0..self.len() {
            let (wk, sk) = (w[k].abs(), self.sigma[k]);
            envelope = envelope.max(wk / sk);
            bound_holds &= wk <= sk * coef_norm + 1e-10;
            nodal_bound_holds &= wk <= sk * unorm + 1e-10;
        }
        DecayReport {
            w,
            sigma: self.sigma.clone(),
            coef_norm,
            nodal_norm: unorm,
            envelope,
            bound_holds,
            nodal_bound_holds,
        }
    }

    /// `sqrt(Σ |w_i| (a_i - b_i)²)` with the node quadrature weights.
    pub fn nodal_l2_error(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.fekete
            .weights
            .iter()
            .zip(a.iter().zip(b.iter()))
            .map(|(w, (x, y))| w.abs() * (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖f‖ / σ_min`.
    pub fn lebesgue_bound(&self) -> f64 {
        self.fnorm / self.fekete.svd.sigma_min()
    }

    /// `max_x sum_i |ψ_i(x)|` over the samples.
    pub fn lebesgue_estimate(&self, samples: &[Point]) -> f64 {
        let psi = self.nodal_matrix(samples);
        psi.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Operator norm from nodal values (Euclidean) to the interpolant (L2 over
    /// the hull), with the Gram matrix replaced by a Monte-Carlo average over
    /// `samples`.
    pub fn sampled_l2_operator_norm(&self, samples: &[Point]) -> Result<f64> {
        let psi = self.nodal_matrix(samples);
        let area = self.fekete.poly.signed_area();
        let g = psi.tr_mul(&psi) * (area / samples.len() as f64);
        Ok(Svd::new(&g)?.sigma_max().sqrt())
    }

    /// The same operator norm with the exact Gram matrix.
    pub fn l2_operator_norm(&self) -> Result<f64> {
        let g = gram_matrix(&self.fekete.poly, &self.fekete.spec);
        let m = self.a.transpose() * g * &self.a;
        Ok(Svd::new(&m)?.sigma_max().sqrt())
    }

    /// Exact `∫ ψ̄_k ψ̄_m dΩ` for all mode pairs.
    pub fn modal_gram(&self) -> DMatrix<f64> {
        let g = gram_matrix(&self.fekete.poly, &self.fekete.spec);
        self.modal_factor.transpose() * g * &self.modal_factor
    }

    /// Exact `∫ ψ̃_k ψ̃_m dΩ` for all mode pairs.
    pub fn orthonormal_gram(&self) -> DMatrix<f64> {
        let g = gram_matrix(&self.fekete.poly, &self.fekete.spec);
        let v = &self.fekete.svd.v;
        v.transpose() * g * v / (self.fnorm * self.fnorm)
    }

    /// Orders modes by descending `|W·V_k|`, ties by ascending `k`, where
    /// `W_j = ∫ f_j u dΩ`.
    pub fn weierstrass_permutation(&self, moments_u: &DVector<f64>) -> Vec<usize> {
        let proj = self.fekete.svd.v.tr_mul(moments_u);
        let mut idx: Vec<usize> = (0..proj.len()).collect();
        idx.sort_by(|&i, &j| proj[j].abs().total_cmp(&proj[i].abs()).then(i.cmp(&j)));
        idx
    }
}

#[derive(Clone, Debug)]
pub struct DecayReport {
    pub w: DVector<f64>,
    pub sigma: DVector<f64>,
    /// `‖a u‖`, the norm of the monomial coefficients of the interpolant.
    pub coef_norm: f64,
    pub nodal_norm: f64,
    /// Measured `max_k |w_k| / σ_k`.
    pub envelope: f64,
    /// `|w_k| <= σ_k ‖a u‖` for every `k`.
    pub bound_holds: bool,
    /// `|w_k| <= σ_k ‖u‖` for every `k`.
    pub nodal_bound_holds: bool,
}

/// `sqrt(area * mean((I u - g)^2))` over the samples.
pub fn sampled_l2_error<F: Fn(&Point) -> f64>(basis: &HullBasis, u_nodal: &DVector<f64>, g: F, samples: &[Point]) -> f64 {
    let c = basis.interpolant_coefficients(u_nodal);
    let vals = basis.fekete.spec.vandermonde(samples) * c;
    let s: f64 = samples.iter().zip(vals.iter()).map(|(p, v)| (v - g(p)).powi(2)).sum();
    (basis.fekete.poly.signed_area() * s / samples.len() as f64).sqrt()
}

/// Nodal samples of `g` at the basis nodes.
pub fn sample_nodes<F: Fn(&Point) -> f64>(basis: &HullBasis, g: F) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.nodes().iter().map(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{fill_count, random_points};
    use crate::fekete::{approximate_fekete, Method};
    use crate::moments::boundary_moments;
    use crate::monomials::{MonomialSpec, Space};
    use crate::Polygon;

    fn square() -> Polygon {
        Polygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap()
    }

    fn basis_on(poly: &Polygon, space: Space, p: u32, route: Route) -> HullBasis {
        let spec = MonomialSpec::new(space, p);
        let c = fill_count(poly, 10 * spec.len()).unwrap();
        let f = approximate_fekete(poly, &spec, &c, Method::Qr).unwrap();
        build_basis(&f, route).unwrap()
    }

    #[test]
    fn barycentric_on_triangle() {
        let tri = Polygon::from_coords(&[(-0.5, -0.5), (0.5, -0.5), (0.0, 0.5)]).unwrap();
        let b = basis_on(&tri, Space::P, 1, Route::Direct);
        let x = b.nodes().to_vec();
        for p in random_points(&tri, 20, 3) {
            let psi = b.eval_nodal(&p);
            assert!((psi.sum() - 1.0).abs() < 1e-12);
            let back = x.iter().zip(psi.iter()).fold(nalgebra::Vector2::zeros(), |acc, (q, w)| acc + q.coords * *w);
            assert!((back - p.coords).norm() < 1e-12);
        }
        assert!((b.lebesgue_estimate(tri.outer()) - 1.0).abs() < 1e-8 || b.lebesgue_estimate(&random_points(&tri, 100, 1)) >= 1.0);
    }

    #[test]
    fn cardinality_and_routes() {
        let b = basis_on(&square(), Space::P, 8, Route::Direct);
        let card = b.nodal_matrix(b.nodes());
        assert!((card - DMatrix::identity(45, 45)).amax() < 1e-8);
        let r = basis_on(&square(), Space::P, 8, Route::Reusable);
        let pts = random_points(&square(), 100, 5);
        assert!((b.nodal_matrix(&pts) - r.nodal_matrix(&pts)).amax() < 1e-8);
        for p in &pts {
            assert!((b.eval_nodal(p).sum() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn polynomial_reproduction() {
        let b = basis_on(&square(), Space::Q, 4, Route::Direct);
        let spec = &b.fekete.spec;
        let coef = DVector::from_fn(spec.len(), |i, _| ((i * 7) % 5) as f64 - 2.0);
        let g = |p: &Point| spec.eval(p).dot(&coef);
        let u = sample_nodes(&b, g);
        for p in random_points(&square(), 50, 9) {
            assert!((b.eval_nodal(&p).dot(&u) - g(&p)).abs() < 1e-8);
        }
    }

    #[test]
    fn modal_relations() {
        let b = basis_on(&square(), Space::P, 6, Route::Direct);
        let n = b.len();
        let p = Point::new(0.3, -0.2);
        let modal = b.eval_modal(&p, n);
        let ortho = b.eval_orthonormal(&p, n);
        for k in 0..n {
            assert!((ortho[k] - modal[k] * b.sigma[k] / b.fnorm).abs() < 1e-10);
        }
        // modal reconstruction with all modes equals nodal interpolation
        let u = sample_nodes(&b, |q| (q.x * 2.0).sin() + q.y);
        let w = b.gfc_transform(&u, n);
        assert!((modal.dot(&w) - b.eval_nodal(&p).dot(&u)).abs() < 1e-8);
        assert!((b.gfc_reconstruct(&w) - &u).amax() < 1e-8);
        // mode 1 keeps one sign
        let grid: Vec<Point> = (0..50)
            .flat_map(|i| (0..50).map(move |j| Point::new(-0.99 + 0.04 * i as f64, -0.99 + 0.04 * j as f64)))
            .collect();
        let m1: Vec<f64> = grid.iter().map(|q| b.eval_modal(q, 1)[0]).collect();
        assert!(m1.iter().all(|&v| v > 0.0) || m1.iter().all(|&v| v < 0.0));
    }

    #[test]
    fn gfc_examples() {
        let b = basis_on(&square(), Space::P, 5, Route::Direct);
        let n = b.len();
        let one = DVector::from_element(n, 1.0);
        let w = b.gfc_transform(&one, n);
        assert!((b.gfc_reconstruct(&w) - &one).amax() < 1e-10);
        let u5 = DVector::from_iterator(n, b.nodes().iter().map(|q| b.eval_modal(q, 5)[4]));
        let w5 = b.gfc_transform(&u5, 5);
        assert!((b.gfc_reconstruct(&w5) - &u5).amax() < 1e-8);
        let (f, tail) = b.filter_modes(&u5, n);
        assert!((f - &u5).amax() < 1e-12 && tail < 1e-12);
        let mut last = f64::INFINITY;
        let g = sample_nodes(&b, |q| (3.0 * q.x).cos() * q.y.exp());
        for km in 1..=n {
            let (_, t) = b.filter_modes(&g, km);
            assert!(t <= last + 1e-15);
            last = t;
        }
    }

    #[test]
    fn decay_bounds() {
        let b = basis_on(&square(), Space::P, 10, Route::Direct);
        let n = b.len();
        let mut e1 = DVector::zeros(n);
        e1[0] = 1.0;
        let w = b.gfc_transform(&e1, n);
        assert!(w.iter().all(|x| x.abs() <= 1.0 + 1e-12));
        let u = sample_nodes(&b, |q| (q.x + 0.5 * q.y).sin());
        let r = b.gfc_decay_check(&u);
        assert!(r.bound_holds);
        assert!(r.envelope <= r.coef_norm + 1e-10);
        let top = DVector::from_iterator(n, b.nodes().iter().map(|q| b.eval_modal(q, n)[n - 1]));
        let wt = b.gfc_transform(&top, n);
        assert_eq!(wt.iamax(), n - 1);
    }

    #[test]
    fn lebesgue_bound_examples() {
        let c = basis_on(&square(), Space::P, 0, Route::Direct);
        assert!((c.lebesgue_estimate(&random_points(&square(), 100, 1)) - 1.0).abs() < 1e-14);
        let b4 = basis_on(&square(), Space::P, 4, Route::Direct);
        let b8 = basis_on(&square(), Space::P, 8, Route::Direct);
        let samples = random_points(&square(), 10_000, 2);
        // The bound grows with 1/σ_min; the measured constant grows slowly.
        assert!(b8.lebesgue_bound() > b4.lebesgue_bound());
        assert!(b8.lebesgue_estimate(&samples) < 10.0 * b4.lebesgue_estimate(&samples));
        assert!(b8.sampled_l2_operator_norm(&samples).unwrap() <= b8.lebesgue_bound() + 1e-6);
        assert!(b8.l2_operator_norm().unwrap() <= b8.lebesgue_bound() + 1e-9);

        // Nearly repeated nodes
        let spec = MonomialSpec::new(Space::P, 1);
        let pts = vec![Point::new(-0.5, -0.5), Point::new(0.5, -0.5), Point::new(0.5, -0.5 + 1e-8)];
        let f = FeketeSet::from_nodes(&square(), &spec, pts).unwrap();
        let d = build_basis(&f, Route::Direct).unwrap();
        assert!(d.lebesgue_bound() > 1e6);
    }

    #[test]
    fn weierstrass_order() {
        let b = basis_on(&square(), Space::P, 4, Route::Direct);
        let m = boundary_moments(&square(), &b.fekete.spec);
        let perm = b.weierstrass_permutation(&m);
        let mut sorted = perm.clone();
        sorted.sort();
        assert_eq!(sorted, (0..b.len()).collect::<Vec<_>>());
        let zero = DVector::zeros(b.len());
        assert_eq!(b.weierstrass_permutation(&zero), (0..b.len()).collect::<Vec<_>>());
    }

    #[test]
    fn route_parsing() {
        assert_eq!("direct".parse::<Route>().unwrap(), Route::Direct);
        assert!("other".parse::<Route>().is_err());
    }
}
