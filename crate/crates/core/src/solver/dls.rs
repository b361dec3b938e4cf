//! Discontinuous least-squares discretization of one implicit-Euler step.
//!
//! Per hull the functional `∫ |L U - f|² + α ∮ |U - U_neighbor|²` is minimized
//! with `L = D + A1 ∂x + A2 ∂y`. Boundary edges use the exact trace as the
//! neighbor state. Unknowns are ordered `(ρ nodes, u nodes, v nodes)` per hull.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix3, Vector3};
use rayon::prelude::*;

use super::acoustics::{exact_solution, manufactured_source, AcousticsModel};
use super::mesh::{weighted_gram, HullMesh};
use super::State;
use crate::{Error, Point, Result};

/// Unknowns of the assembled system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unknowns {
    /// Values at the hull nodes.
    Nodal,
    /// Modal coefficients `W = U^T u`.
    Modal,
}

#[derive(Clone, Copy, Debug)]
pub struct DlsOptions {
    pub dt: f64,
    pub alpha: f64,
    pub unknowns: Unknowns,
}

impl Default for DlsOptions {
    fn default() -> Self {
        Self {
            dt: 1e-12,
            alpha: 1.0,
            unknowns: Unknowns::Nodal,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DlsSystem {
    pub diag: Vec<DMatrix<f64>>,
    /// `(row hull, column hull, block)`.
    pub offdiag: Vec<(usize, usize, DMatrix<f64>)>,
    pub rhs: Vec<DVector<f64>>,
    pub alpha: f64,
    pub d: f64,
    pub unknowns: Unknowns,
    /// Per hull, indices into `offdiag` of its block row.
    neighbors: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct DlsSolution {
    pub state: State,
    /// Raw unknowns per hull.
    pub unknowns: Vec<DVector<f64>>,
    pub iterations: usize,
    pub residual: f64,
}

fn kron_i3(m: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let c = m.ncols();
    let mut out = DMatrix::zeros(3 * n, 3 * c);
    for k in 0..3 {
        out.view_mut((k * n, k * c), (n, c)).copy_from(&(m * scale));
    }
    out
}

/// Rows `(q, r)` of `sqrt(w_q) L(ψ)` at the volume points.
fn operator_rows(
    phi: &DMatrix<f64>,
    phi_x: &DMatrix<f64>,
    phi_y: &DMatrix<f64>,
    w: &[f64],
    d: f64,
    a1: &Matrix3<f64>,
    a2: &Matrix3<f64>,
) -> DMatrix<f64> {
    let (nq, n) = phi.shape();
    let mut l = DMatrix::zeros(3 * nq, 3 * n);
    for q in 0..nq {
        let sw = w[q].sqrt();
        for r in 0..3 {
            let row = 3 * q + r;
            for k in 0..3 {
                let (c1, c2, cd) = (a1[(r, k)], a2[(r, k)], if r == k { d } else { 0.0 });
                if c1 == 0.0 && c2 == 0.0 && cd == 0.0 {
                    continue;
                }
                for j in 0..n {
                    l[(row, k * n + j)] = sw * (cd * phi[(q, j)] + c1 * phi_x[(q, j)] + c2 * phi_y[(q, j)]);
                }
            }
        }
    }
    l
}

/// Assembles the benchmark system with the manufactured source and exact
/// boundary trace.
pub fn assemble_dls(mesh: &HullMesh, model: &AcousticsModel, opts: &DlsOptions) -> Result<DlsSystem> {
    let src = manufactured_source(model, opts.dt)?;
    assemble_dls_with(mesh, model, opts, src, exact_solution)
}

pub fn assemble_dls_with<F, G>(mesh: &HullMesh, model: &AcousticsModel, opts: &DlsOptions, source: F, trace: G) -> Result<DlsSystem>
where
    F: Fn(&Point) -> Vector3<f64> + Sync,
    G: Fn(&Point) -> Vector3<f64> + Sync,
{
    if !(opts.alpha >= 0.0) || !opts.alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be non-negative, got {}", opts.alpha)));
    }
    if !(opts.dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {}", opts.dt)));
    }
    let d = 1.0 / opts.dt;
    let (a1, a2) = (model.a1(), model.a2());
    let modal = opts.unknowns == Unknowns::Modal;
    let tr = |h: usize, m: &DMatrix<f64>| -> DMatrix<f64> {
        if modal {
            m * &mesh.elements[h].basis.u
        } else {
            m.clone()
        }
    };
    let mut blocks: Vec<(DMatrix<f64>, DVector<f64>)> = mesh
        .elements
        .par_iter()
        .enumerate()
        .map(|(h, e)| {
            let (phi, px, py) = (tr(h, &e.phi), tr(h, &e.phi_x), tr(h, &e.phi_y));
            let l = operator_rows(&phi, &px, &py, &e.vol_w, d, &a1, &a2);
            let mut fw = DVector::zeros(3 * e.vol_pts.len());
            for (q, p) in e.vol_pts.iter().enumerate() {
                let f = source(p) * e.vol_w[q].sqrt();
                fw.rows_mut(3 * q, 3).copy_from(&f);
            }
            (l.tr_mul(&l), l.tr_mul(&fw))
        })
        .collect();
    let mut offdiag = Vec::new();
    for f in &mesh.faces {
        let pl = tr(f.left, &f.phi_l);
        let mll = weighted_gram(&pl, &pl, &f.w);
        blocks[f.left].0 += kron_i3(&mll, opts.alpha);
        match (f.right, &f.phi_r) {
            (Some((r, _)), Some(phi_r)) => {
                let pr = tr(r, phi_r);
                blocks[r].0 += kron_i3(&weighted_gram(&pr, &pr, &f.w), opts.alpha);
                let mlr = weighted_gram(&pl, &pr, &f.w);
                offdiag.push((f.left, r, kron_i3(&mlr, -opts.alpha)));
                offdiag.push((r, f.left, kron_i3(&mlr.transpose(), -opts.alpha)));
            }
            _ => {
                let n = pl.ncols();
                let rhs = &mut blocks[f.left].1;
                for (q, p) in f.pts.iter().enumerate() {
                    let g = trace(p);
                    for k in 0..3 {
                        for j in 0..n {
                            rhs[k * n + j] += opts.alpha * f.w[q] * pl[(q, j)] * g[k];
                        }
                    }
                }
            }
        }
    }
    let mut neighbors = vec![Vec::new(); mesh.len()];
    for (i, (r, _, _)) in offdiag.iter().enumerate() {
        neighbors[*r].push(i);
    }
    let (diag, rhs) = blocks.into_iter().unzip();
    Ok(DlsSystem {
        diag,
        offdiag,
        rhs,
        alpha: opts.alpha,
        d,
        unknowns: opts.unknowns,
        neighbors,
    })
}

fn dot(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

impl DlsSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[DVector<f64>]) -> Vec<DVector<f64>> {
        (0..self.len())
            .into_par_iter()
            .map(|h| {
                let mut y = &self.diag[h] * &x[h];
                for &i in &self.neighbors[h] {
                    let (_, c, b) = &self.offdiag[i];
                    y += b * &x[*c];
                }
                y
            })
            .collect()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for b in &self.diag {
            off.push(off.last().unwrap() + b.nrows());
        }
        off
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let off = self.offsets();
        let n = *off.last().unwrap();
        let mut a = DMatrix::zeros(n, n);
        for (h, b) in self.diag.iter().enumerate() {
            let mut v = a.view_mut((off[h], off[h]), b.shape());
            v += b;
        }
        for (r, c, b) in &self.offdiag {
            let mut v = a.view_mut((off[*r], off[*c]), b.shape());
            v += b;
        }
        a
    }

    /// `‖A - A^T‖_F / ‖A‖_F`.
    pub fn symmetry_error(&self) -> f64 {
        let mut blocks: BTreeMap<(usize, usize), DMatrix<f64>> = BTreeMap::new();
        for (r, c, b) in &self.offdiag {
            blocks
                .entry((*r, *c))
                .and_modify(|m| *m += b)
                .or_insert_with(|| b.clone());
        }
        let mut err = 0.0;
        let mut norm = 0.0;
        for b in &self.diag {
            err += (b - b.transpose()).norm_squared();
            norm += b.norm_squared();
        }
        for ((r, c), b) in &blocks {
            norm += b.norm_squared();
            err += match blocks.get(&(*c, *r)) {
                Some(t) => (b - t.transpose()).norm_squared(),
                None => b.norm_squared(),
            };
        }
        (err / norm).sqrt()
    }

    pub fn offdiag_norm(&self) -> f64 {
        self.offdiag.iter().map(|(_, _, b)| b.norm_squared()).sum::<f64>().sqrt()
    }

    /// Block-Jacobi preconditioned conjugate gradients; stops when
    /// `‖r‖ <= tol ‖rhs‖`.
    pub fn solve(&self, tol: f64, maxit: usize) -> Result<(Vec<DVector<f64>>, usize, f64)> {
        let pre: Vec<Cholesky<f64, Dyn>> = self
            .diag
            .iter()
            .enumerate()
            .map(|(h, b)| {
                Cholesky::new(b.clone()).ok_or_else(|| {
                    Error::Breakdown(format!("diagonal block of hull {h} is not positive definite"))
                })
            })
            .collect::<Result<_>>()?;
        let precond = |r: &[DVector<f64>]| -> Vec<DVector<f64>> { pre.iter().zip(r).map(|(c, v)| c.solve(v)).collect() };
        let bnorm = dot(&self.rhs, &self.rhs).sqrt();
        let mut x: Vec<DVector<f64>> = self.rhs.iter().map(|b| DVector::zeros(b.len())).collect();
        if bnorm == 0.0 {
            return Ok((x, 0, 0.0));
        }
        let mut r = self.rhs.clone();
        let mut z = precond(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut rnorm = bnorm;
        for it in 0..maxit {
            if rnorm <= tol * bnorm {
                return Ok((x, it, rnorm / bnorm));
            }
            let ap = self.apply(&p);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) || !(rz > 0.0) {
                return Err(Error::Breakdown(format!(
                    "conjugate gradients met a non-positive curvature at iteration {it}; the system is not positive definite"
                )));
            }
            let alpha = rz / pap;
            for h in 0..x.len() {
                x[h].axpy(alpha, &p[h], 1.0);
                r[h].axpy(-alpha, &ap[h], 1.0);
            }
            rnorm = dot(&r, &r).sqrt();
            if !rnorm.is_finite() {
                return Err(Error::NonFinite { step: it });
            }
            z = precond(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for h in 0..p.len() {
                p[h] = &z[h] + &p[h] * beta;
            }
        }
        if rnorm <= tol * bnorm {
            return Ok((x, maxit, rnorm / bnorm));
        }
        Err(Error::NoConvergence {
            iterations: maxit,
            residual: rnorm / bnorm,
        })
    }
}

/// Solves the system and converts unknowns to nodal values.
pub fn solve_dls(mesh: &HullMesh, sys: &DlsSystem, tol: f64, maxit: usize) -> Result<DlsSolution> {
    let (x, iterations, residual) = sys.solve(tol, maxit)?;
    let state = x
        .iter()
        .zip(&mesh.elements)
        .map(|(v, e)| {
            let m = DMatrix::from_column_slice(e.dof(), 3, v.as_slice());
            match sys.unknowns {
                Unknowns::Nodal => m,
                Unknowns::Modal => &e.basis.u * m,
            }
        })
        .collect();
    Ok(DlsSolution {
        state,
        unknowns: x,
        iterations,
        residual,
    })
}

/// Assembles, solves and measures the L2 error of the benchmark problem.
pub fn run_benchmark(mesh: &HullMesh, model: &AcousticsModel, opts: &DlsOptions, tol: f64) -> Result<(DlsSolution, f64)> {
    let sys = assemble_dls(mesh, model, opts)?;
    let sol = solve_dls(mesh, &sys, tol, 10_000)?;
    let err = super::l2_error(mesh, &sol.state, exact_solution)?;
    Ok((sol, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::mesh::Family;
    use crate::Polygon;

    fn single(p: u32) -> HullMesh {
        HullMesh::build(vec![Polygon::rectangle(-0.5, -0.5, 0.5, 0.5).unwrap()], Family::HullQ, &[p], None).unwrap()
    }

    #[test]
    fn single_hull_converges_spectrally() {
        let model = AcousticsModel::default();
        let opts = DlsOptions {
            dt: 1.0,
            ..Default::default()
        };
        let errs: Vec<f64> = [2, 4, 6]
            .iter()
            .map(|&p| run_benchmark(&single(p), &model, &opts, 1e-12).unwrap().1)
            .collect();
        assert!(errs[1] < 0.1 * errs[0] && errs[2] < 0.1 * errs[1], "{errs:?}");
        assert!(errs[2] < 1e-4);
    }

    #[test]
    fn symmetric_and_decoupled_without_penalty() {
        let mesh = HullMesh::square_grid(2, 0.0, 1.0, Family::HullP, 2, false).unwrap();
        let model = AcousticsModel::default();
        let sys = assemble_dls(&mesh, &model, &DlsOptions::default()).unwrap();
        assert!(sys.symmetry_error() < 1e-12);
        assert!(sys.offdiag_norm() > 0.0);
        let zero = assemble_dls(
            &mesh,
            &model,
            &DlsOptions {
                alpha: 0.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(zero.offdiag_norm(), 0.0);
        let (_, it, _) = zero.solve(1e-10, 10).unwrap();
        assert!(it <= 1);
    }

    #[test]
    fn modal_and_nodal_solves_agree() {
        let mesh = HullMesh::square_grid(2, 0.0, 1.0, Family::HullQ, 3, false).unwrap();
        let model = AcousticsModel::default();
        let base = DlsOptions {
            dt: 0.5,
            ..Default::default()
        };
        let nodal = solve_dls(&mesh, &assemble_dls(&mesh, &model, &base).unwrap(), 1e-13, 1000).unwrap();
        let mopts = DlsOptions {
            unknowns: Unknowns::Modal,
            ..base
        };
        let modal = solve_dls(&mesh, &assemble_dls(&mesh, &model, &mopts).unwrap(), 1e-13, 1000).unwrap();
        for (h, e) in mesh.elements.iter().enumerate() {
            let w = e.basis.u.tr_mul(&nodal.state[h]);
            let wm = DMatrix::from_column_slice(e.dof(), 3, modal.unknowns[h].as_slice());
            assert!((w - wm).amax() < 1e-8);
        }
    }

    #[test]
    fn indefinite_system_is_reported() {
        let mesh = HullMesh::square_grid(2, 0.0, 1.0, Family::HullP, 1, false).unwrap();
        let mut sys = assemble_dls(&mesh, &AcousticsModel::default(), &DlsOptions { dt: 1.0, ..Default::default() }).unwrap();
        sys.diag[0] = -sys.diag[0].clone();
        assert!(matches!(sys.solve(1e-10, 100), Err(Error::Breakdown(_))));
        let mut sys2 = assemble_dls(&mesh, &AcousticsModel::default(), &DlsOptions { dt: 1.0, ..Default::default() }).unwrap();
        sys2.offdiag[0].2 *= 1e6;
        assert!(sys2.solve(1e-10, 100).is_err());
    }

    #[test]
    fn rejects_bad_options() {
        let mesh = single(1);
        let m = AcousticsModel::default();
        assert!(assemble_dls(&mesh, &m, &DlsOptions { alpha: -1.0, ..Default::default() }).is_err());
        assert!(assemble_dls(&mesh, &m, &DlsOptions { dt: 0.0, ..Default::default() }).is_err());
    }
}
