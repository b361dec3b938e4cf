//! Discontinuous Galerkin residual with exact upwind interface flux and a
//! classical RK4 integrator.
//!
//! Weak form per hull: `M dU/dt = ∫ ∇ψ · F(U) - ∮ ψ F*·n`, `F = (A1 U, A2 U)`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix3, Vector3};
use rayon::prelude::*;

use super::acoustics::AcousticsModel;
use super::mesh::HullMesh;
use super::State;
use crate::{Error, Point, Result};

/// Exterior state on boundary faces.
#[derive(Clone, Copy)]
pub enum Boundary<'a> {
    /// Mirror state with reversed normal velocity (zero mass flux).
    Wall,
    /// Prescribed exterior state `g(t, x)`.
    Exact(&'a (dyn Fn(f64, &Point) -> Vector3<f64> + Sync)),
}

pub struct DgOperator<'a> {
    pub mesh: &'a HullMesh,
    pub model: AcousticsModel,
    pub boundary: Boundary<'a>,
    mass: Vec<Cholesky<f64, Dyn>>,
}

fn weighted(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (q, mut r) in out.row_iter_mut().enumerate() {
        r *= w[q];
    }
    out
}

impl<'a> DgOperator<'a> {
    pub fn new(mesh: &'a HullMesh, model: AcousticsModel, boundary: Boundary<'a>) -> Result<Self> {
        let mass = mesh
            .elements
            .iter()
            .enumerate()
            .map(|(h, e)| {
                Cholesky::new(e.mass()).ok_or_else(|| Error::Singular(format!("mass matrix of hull {h}")))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            mesh,
            model,
            boundary,
            mass,
        })
    }

    /// Upwind fluxes at the quadrature points of every face, rows `(F*·n)^T`.
    fn face_fluxes(&self, t: f64, state: &State) -> Vec<DMatrix<f64>> {
        self.mesh
            .faces
            .par_iter()
            .map(|f| {
                let ul = &f.phi_l * &state[f.left];
                let ur = match (f.right, &f.phi_r) {
                    (Some((r, _)), Some(pr)) => pr * &state[r],
                    _ => {
                        let mut ext = DMatrix::zeros(ul.nrows(), 3);
                        for (q, p) in f.pts.iter().enumerate() {
                            let s = match self.boundary {
                                Boundary::Wall => {
                                    let u = Vector3::new(ul[(q, 0)], ul[(q, 1)], ul[(q, 2)]);
                                    self.model.wall_state(&u, &f.normal)
                                }
                                Boundary::Exact(g) => g(t, p),
                            };
                            ext.row_mut(q).copy_from(&s.transpose());
                        }
                        ext
                    }
                };
                let an: Matrix3<f64> = self.model.normal_jacobian(&f.normal);
                let abs = self.model.abs_normal_jacobian(&f.normal);
                let sum = &ul + &ur;
                let jump = &ur - &ul;
                let mut out = DMatrix::zeros(ul.nrows(), 3);
                for q in 0..ul.nrows() {
                    let s = Vector3::new(sum[(q, 0)], sum[(q, 1)], sum[(q, 2)]);
                    let j = Vector3::new(jump[(q, 0)], jump[(q, 1)], jump[(q, 2)]);
                    out.row_mut(q).copy_from(&(0.5 * an * s - 0.5 * abs * j).transpose());
                }
                out
            })
            .collect()
    }

    /// Weak-form residual `R` per hull (before the mass solve).
    pub fn residual(&self, t: f64, state: &State) -> State {
        let (a1t, a2t) = (self.model.a1().transpose(), self.model.a2().transpose());
        let a1t = DMatrix::from_column_slice(3, 3, a1t.as_slice());
        let a2t = DMatrix::from_column_slice(3, 3, a2t.as_slice());
        let mut res: State = self
            .mesh
            .elements
            .par_iter()
            .zip(state.par_iter())
            .map(|(e, s)| {
                let uq = &e.phi * s;
                weighted(&e.phi_x, &e.vol_w).tr_mul(&(&uq * &a1t)) + weighted(&e.phi_y, &e.vol_w).tr_mul(&(&uq * &a2t))
            })
            .collect();
        let fluxes = self.face_fluxes(t, state);
        for (f, fl) in self.mesh.faces.iter().zip(&fluxes) {
            res[f.left] -= weighted(&f.phi_l, &f.w).tr_mul(fl);
            if let (Some((r, _)), Some(pr)) = (f.right, &f.phi_r) {
                res[r] += weighted(pr, &f.w).tr_mul(fl);
            }
        }
        res
    }

    /// `-∮ F*·n` per hull.
    pub fn net_boundary_flux(&self, t: f64, state: &State) -> Vec<Vector3<f64>> {
        let mut out = vec![Vector3::zeros(); self.mesh.len()];
        let fluxes = self.face_fluxes(t, state);
        for (f, fl) in self.mesh.faces.iter().zip(&fluxes) {
            let w = DVector::from_column_slice(&f.w);
            let v = fl.tr_mul(&w);
            let v = Vector3::new(v[0], v[1], v[2]);
            out[f.left] -= v;
            if let Some((r, _)) = f.right {
                out[r] += v;
            }
        }
        out
    }

    /// `dU/dt = M^-1 R`.
    pub fn rate(&self, t: f64, state: &State) -> State {
        let r = self.residual(t, state);
        r.into_iter().zip(&self.mass).map(|(ri, m)| m.solve(&ri)).collect()
    }

    /// `Σ_h ∫ (c² ρ² / ρ0 + ρ0 (u² + v²))`.
    pub fn energy(&self, state: &State) -> f64 {
        self.mesh
            .elements
            .iter()
            .zip(state)
            .map(|(e, s)| {
                let uq = &e.phi * s;
                (0..uq.nrows())
                    .map(|q| e.vol_w[q] * self.model.energy_density(&Vector3::new(uq[(q, 0)], uq[(q, 1)], uq[(q, 2)])))
                    .sum::<f64>()
            })
            .sum()
    }

    /// One classical RK4 step.
    pub fn step_rk4(&self, t: f64, dt: f64, u: &State) -> State {
        let axpy = |a: &State, k: &State, c: f64| -> State { a.iter().zip(k).map(|(x, y)| x + y * c).collect() };
        let k1 = self.rate(t, u);
        let k2 = self.rate(t + 0.5 * dt, &axpy(u, &k1, 0.5 * dt));
        let k3 = self.rate(t + 0.5 * dt, &axpy(u, &k2, 0.5 * dt));
        let k4 = self.rate(t + dt, &axpy(u, &k3, dt));
        u.iter()
            .enumerate()
            .map(|(h, x)| x + (&k1[h] + &k2[h] * 2.0 + &k3[h] * 2.0 + &k4[h]) * (dt / 6.0))
            .collect()
    }

    /// `steps` RK4 steps from time `t0`; aborts on non-finite values.
    pub fn advance(&self, state: &State, t0: f64, dt: f64, steps: usize) -> Result<State> {
        let mut u = state.clone();
        for k in 0..steps {
            u = self.step_rk4(t0 + k as f64 * dt, dt, &u);
            if u.iter().any(|m| m.iter().any(|v| !v.is_finite())) {
                return Err(Error::NonFinite { step: k + 1 });
            }
        }
        Ok(u)
    }
}

/// Largest step with `c0 dt (2p+1) / h_min <= cfl`.
pub fn stable_dt(mesh: &HullMesh, model: &AcousticsModel, cfl: f64) -> f64 {
    cfl * mesh.h_min() / (model.c0 * (2 * mesh.max_degree() + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::acoustics::PlaneWave;
    use crate::solver::mesh::Family;
    use crate::solver::{hull_integrals, interpolate, l2_error, zero_state};
    use crate::Polygon;
    use nalgebra::Vector2;

    #[test]
    fn constant_state_is_steady_on_periodic_mesh() {
        let mesh = HullMesh::square_grid(3, -1.0, 1.0, Family::HullP, 3, true).unwrap();
        let op = DgOperator::new(&mesh, AcousticsModel::new(1.2, 0.9).unwrap(), Boundary::Wall).unwrap();
        let s = interpolate(&mesh, |_| Vector3::new(0.7, -0.3, 0.4));
        let r = op.residual(0.0, &s);
        assert!(r.iter().all(|m| m.amax() < 1e-10));
    }

    #[test]
    fn zero_and_identity_cases() {
        let mesh = HullMesh::square_grid(2, 0.0, 1.0, Family::HullQ, 2, false).unwrap();
        let op = DgOperator::new(&mesh, AcousticsModel::default(), Boundary::Wall).unwrap();
        let z = zero_state(&mesh);
        assert!(op.advance(&z, 0.0, 0.01, 3).unwrap().iter().all(|m| m.amax() == 0.0));
        let s = interpolate(&mesh, |p| Vector3::new(p.x, p.y, 1.0));
        let same = op.advance(&s, 0.0, 0.01, 0).unwrap();
        assert_eq!(same, s);
    }

    #[test]
    fn local_conservation() {
        let mesh = HullMesh::square_grid(2, -1.0, 1.0, Family::HullP, 4, false).unwrap();
        let wave = PlaneWave::new(AcousticsModel::default(), Vector2::new(1.0, 0.5), 1.0);
        let g = move |t: f64, p: &Point| wave.state(t, p);
        let op = DgOperator::new(&mesh, wave.model, Boundary::Exact(&g)).unwrap();
        let s = interpolate(&mesh, |p| wave.state(0.0, p) + Vector3::new(p.x * p.y, 0.1, -p.x));
        let rate = op.rate(0.0, &s);
        let lhs = hull_integrals(&mesh, &rate);
        let rhs = op.net_boundary_flux(0.0, &s);
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-10 * b.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn wall_conserves_mass_and_dissipates_energy() {
        let mesh = HullMesh::build(vec![Polygon::regular(6, 1.0).unwrap()], Family::HullP, &[4], None).unwrap();
        let model = AcousticsModel::default();
        let op = DgOperator::new(&mesh, model, Boundary::Wall).unwrap();
        let mut s = interpolate(&mesh, |p| Vector3::new((-4.0 * (p.x * p.x + p.y * p.y)).exp(), 0.0, 0.0));
        let m0 = hull_integrals(&mesh, &s)[0].x;
        let dt = stable_dt(&mesh, &model, 0.4);
        let mut e = op.energy(&s);
        for _ in 0..20 {
            s = op.advance(&s, 0.0, dt, 5).unwrap();
            let e1 = op.energy(&s);
            assert!(e1 - e <= 1e-10 * e.max(1.0));
            e = e1;
        }
        let m1 = hull_integrals(&mesh, &s)[0].x;
        assert!((m1 - m0).abs() <= 1e-10 * m0.abs());
    }

    #[test]
    fn plane_wave_error_decreases_with_p() {
        let wave = PlaneWave::new(AcousticsModel::default(), Vector2::new(0.6, 0.8), 1.0);
        let g = move |t: f64, p: &Point| wave.state(t, p);
        let mut errs = Vec::new();
        for p in 1..=4 {
            let mesh = HullMesh::benchmark(Family::HullP, p).unwrap();
            let op = DgOperator::new(&mesh, wave.model, Boundary::Exact(&g)).unwrap();
            let s = interpolate(&mesh, |x| wave.state(0.0, x));
            let out = op.advance(&s, 0.0, 1e-3, 10).unwrap();
            errs.push(l2_error(&mesh, &out, |x| wave.state(0.01, x)).unwrap());
        }
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn blow_up_is_detected() {
        let mesh = HullMesh::square_grid(2, 0.0, 1.0, Family::HullP, 3, false).unwrap();
        let op = DgOperator::new(&mesh, AcousticsModel::default(), Boundary::Wall).unwrap();
        let s = interpolate(&mesh, |p| Vector3::new(p.x.sin(), p.y, 0.0));
        assert!(matches!(op.advance(&s, 0.0, 10.0, 500), Err(Error::NonFinite { .. })));
    }
}
