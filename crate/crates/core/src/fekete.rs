//! Approximate Fekete points and their quadrature weights.
//!
//! The `M x N` candidate Vandermonde matrix is right-preconditioned by
//! `P0 = V S^-1` from its SVD, which makes the columns orthonormal. The moment
//! system `P0^T V^T w = P0^T m = mu` is then solved on a greedy support of `N`
//! candidates chosen by column-pivoted QR or orthogonal matching pursuit.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{classical_gram_schmidt, omp_columns, pivoted_qr_columns, upper_triangular_inverse, Svd};
use crate::moments::boundary_moments;
use crate::monomials::MonomialSpec;
use crate::{Error, Point, Polygon, Result};

/// Fekete selection requires hulls inside `[-1, 1]^2`.
pub const FEKETE_BOX_HALF_WIDTH: f64 = 1.0;

/// Singular values at or below this multiple of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 4.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Qr,
    Omp,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qr" => Ok(Method::Qr),
            "omp" => Ok(Method::Omp),
            _ => Err(Error::Parse(format!("unknown selection method '{s}' (expected qr or omp)"))),
        }
    }
}

/// Right preconditioner used before selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    /// `P = V S^-1` from the SVD, repeated `s` times.
    Svd,
    /// `P = R^-1` from a classical Gram-Schmidt QR.
    Qr,
}

#[derive(Clone, Debug)]
pub struct SvdPrecondition {
    /// Preconditioned matrix `vmat * p0`.
    pub v1: DMatrix<f64>,
    /// Accumulated right preconditioner.
    pub p0: DMatrix<f64>,
    /// SVD of the input matrix.
    pub svd0: Svd,
    pub steps: usize,
}

impl SvdPrecondition {
    /// Condition number of `v1`.
    pub fn condition(&self) -> Result<f64> {
        Ok(Svd::new(&self.v1)?.condition())
    }
}

/// Applies `s >= 1` rounds of `A <- A V S^-1`.
pub fn svd_precondition(vmat: &DMatrix<f64>, s: usize) -> Result<SvdPrecondition> {
    if s == 0 {
        return Err(Error::InvalidArgument("at least one preconditioning step is required".into()));
    }
    let (m, n) = vmat.shape();
    if m < n {
        return Err(Error::RankDeficient {
            deficient: n - m,
            cols: n,
        });
    }
    let svd0 = Svd::new(vmat)?;
    let def = svd0.deficiency(RANK_TOLERANCE);
    if def > 0 {
        return Err(Error::RankDeficient { deficient: def, cols: n });
    }
    let mut p0 = scaled_inverse(&svd0);
    let mut v1 = vmat * &p0;
    for _ in 1..s {
        let sk = Svd::new(&v1)?;
        let step = scaled_inverse(&sk);
        p0 = &p0 * &step;
        v1 = &v1 * &step;
    }
    Ok(SvdPrecondition { v1, p0, svd0, steps: s })
}

fn scaled_inverse(svd: &Svd) -> DMatrix<f64> {
    let mut p = svd.v.clone();
    for (k, mut col) in p.column_iter_mut().enumerate() {
        col /= svd.s[k];
    }
    p
}

/// `(V1, P)` with `P = R^-1` from a single-pass classical Gram-Schmidt QR.
pub fn qr_precondition(vmat: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (_, r) = classical_gram_schmidt(vmat)?;
    let p = upper_triangular_inverse(&r)?;
    Ok((vmat * &p, p))
}

/// Greedy support by pivoted QR of `V1^T`, then weights from the restricted system.
pub fn select_support_qr(v1: &DMatrix<f64>, mu: &DVector<f64>) -> Result<(Vec<usize>, DVector<f64>)> {
    let n = v1.ncols();
    let sel = pivoted_qr_columns(&v1.transpose(), n)?;
    let w = restricted_weights(v1, &sel, mu)?;
    Ok((sel, w))
}

/// Greedy support of exactly `N` atoms by orthogonal matching pursuit on `V1^T`.
pub fn select_support_omp(v1: &DMatrix<f64>, mu: &DVector<f64>) -> Result<(Vec<usize>, DVector<f64>)> {
    let n = v1.ncols();
    let sel = omp_columns(&v1.transpose(), mu, n)?;
    let w = restricted_weights(v1, &sel, mu)?;
    Ok((sel, w))
}

fn restricted_weights(v1: &DMatrix<f64>, sel: &[usize], mu: &DVector<f64>) -> Result<DVector<f64>> {
    let r = v1.select_rows(sel);
    let svd = Svd::new(&r)?;
    if !(svd.sigma_min() > RANK_TOLERANCE * svd.sigma_max()) {
        return Err(Error::Singular("restricted system on the selected support".into()));
    }
    Ok(svd.solve_transpose(mu))
}

#[derive(Clone, Copy, Debug)]
pub struct FeketeOptions {
    pub method: Method,
    pub preconditioner: Preconditioner,
    pub steps: usize,
    /// Minimum ratio of candidates to `N`; `None` accepts any `M >= N`.
    pub min_oversample: Option<f64>,
}

impl Default for FeketeOptions {
    fn default() -> Self {
        Self {
            method: Method::Qr,
            preconditioner: Preconditioner::Svd,
            steps: 1,
            min_oversample: Some(crate::candidates::DEFAULT_OVERSAMPLE),
        }
    }
}

/// `N` nodes with quadrature weights and the SVD of their Vandermonde matrix.
#[derive(Clone, Debug)]
pub struct FeketeSet {
    pub points: Vec<Point>,
    pub weights: DVector<f64>,
    /// Candidate indices of the nodes, empty when built from explicit nodes.
    pub indices: Vec<usize>,
    /// SVD of the `N x N` Vandermonde matrix at the nodes.
    pub svd: Svd,
    pub spec: MonomialSpec,
    pub poly: Polygon,
    /// Smallest singular value of the preconditioned matrix restricted to the support.
    pub precond_sigma_min: f64,
    /// Right preconditioner applied before selection.
    pub p0: DMatrix<f64>,
}

impl FeketeSet {
    /// Quadrature weights for given nodes, from the moment system.
    pub fn from_nodes(poly: &Polygon, spec: &MonomialSpec, points: Vec<Point>) -> Result<Self> {
        if points.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "{} nodes given for a space of dimension {}",
                points.len(),
                spec.len()
            )));
        }
        let vand = spec.vandermonde(&points);
        let svd = Svd::new(&vand)?;
        if !(svd.sigma_min() > 0.0) {
            return Err(Error::Singular("Vandermonde matrix at the nodes".into()));
        }
        let m = boundary_moments(poly, spec);
        let weights = svd.solve_transpose(&m);
        let precond_sigma_min = svd.sigma_min() / svd.sigma_max();
        let p0 = scaled_inverse(&svd);
        Ok(FeketeSet {
            points,
            weights,
            indices: vec![],
            svd,
            spec: spec.clone(),
            poly: poly.clone(),
            precond_sigma_min,
            p0,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.sum()
    }

    pub fn abs_weight_sum(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.min()
    }

    /// Largest `|sum_i w_i f_j(x_i) - m_j| / max(1, |m_j|)` over the monomials.
    pub fn moment_residual(&self) -> f64 {
        let m = boundary_moments(&self.poly, &self.spec);
        let q = self.spec.vandermonde(&self.points).tr_mul(&self.weights);
        q.iter()
            .zip(m.iter())
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn integrate<F: Fn(&Point) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(self.weights.iter()).map(|(p, w)| w * f(p)).sum()
    }
}

/// Checks that the polygon lies in the selection box.
pub fn check_normalized(poly: &Polygon) -> Result<()> {
    let ext = poly.max_abs_coordinate();
    if ext > FEKETE_BOX_HALF_WIDTH + 1e-9 {
        return Err(Error::NotNormalized(format!(
            "largest vertex coordinate {ext} exceeds {FEKETE_BOX_HALF_WIDTH}; normalize the hull first"
        )));
    }
    Ok(())
}

/// Approximate Fekete points with the default SVD preconditioning.
pub fn approximate_fekete(poly: &Polygon, spec: &MonomialSpec, cands: &[Point], method: Method) -> Result<FeketeSet> {
    approximate_fekete_with(
        poly,
        spec,
        cands,
        &FeketeOptions {
            method,
            ..Default::default()
        },
    )
}

pub fn approximate_fekete_with(
    poly: &Polygon,
    spec: &MonomialSpec,
    cands: &[Point],
    opts: &FeketeOptions,
) -> Result<FeketeSet> {
    check_normalized(poly)?;
    let n = spec.len();
    let need = match opts.min_oversample {
        Some(r) => (r * n as f64).ceil() as usize,
        None => n,
    };
    if cands.len() < need {
        return Err(Error::InvalidArgument(format!(
            "{} candidates given, at least {need} required for N = {n}",
            cands.len()
        )));
    }
    let vmat = spec.vandermonde(cands);
    let (v1, p0) = match opts.preconditioner {
        Preconditioner::Svd => {
            let pc = svd_precondition(&vmat, opts.steps)?;
            (pc.v1, pc.p0)
        }
        Preconditioner::Qr => qr_precondition(&vmat)?,
    };
    let m = boundary_moments(poly, spec);
    let mu = p0.tr_mul(&m);
    let (sel, weights) = match opts.method {
        Method::Qr => select_support_qr(&v1, &mu)?,
        Method::Omp => select_support_omp(&v1, &mu)?,
    };
    let precond_sigma_min = Svd::new(&v1.select_rows(&sel))?.sigma_min();
    let points: Vec<Point> = sel.iter().map(|&i| cands[i]).collect();
    let svd = Svd::new(&spec.vandermonde(&points))?;
    if !(svd.sigma_min() > 0.0) {
        return Err(Error::Singular("Vandermonde matrix at the selected nodes".into()));
    }
    let vsel = spec.vandermonde(&points);
    let mut weights = weights;
    let res = |w: &DVector<f64>| (&m - vsel.tr_mul(w)).norm();
    for _ in 0..2 {
        let r = &m - vsel.tr_mul(&weights);
        let cand = &weights + svd.solve_transpose(&r);
        if res(&cand) < res(&weights) {
            weights = cand;
        } else {
            break;
        }
    }
    Ok(FeketeSet {
        points,
        weights,
        indices: sel,
        svd,
        spec: spec.clone(),
        poly: poly.clone(),
        precond_sigma_min,
        p0,
    })
}
