//! DG and DLS discretizations of linear acoustics on hull meshes.

pub mod acoustics;
pub mod dg;
pub mod dls;
pub mod mesh;
pub mod study;

pub use acoustics::{AcousticsModel, PlaneWave};
pub use mesh::{Family, HullMesh};

use nalgebra::{DMatrix, Vector3};

use crate::quadrature::{polygon_rule, MAX_AREA_DEGREE};
use crate::{Point, Result};

/// Nodal values per hull, one `N x 3` matrix with columns `(ρ, u, v)`.
pub type State = Vec<DMatrix<f64>>;

/// Nodal interpolation of a vector field.
pub fn interpolate<F: Fn(&Point) -> Vector3<f64>>(mesh: &HullMesh, f: F) -> State {
    mesh.elements
        .iter()
        .map(|e| {
            let nodes = e.nodes();
            let mut m = DMatrix::zeros(nodes.len(), 3);
            for (i, p) in nodes.iter().enumerate() {
                m.row_mut(i).copy_from(&f(p).transpose());
            }
            m
        })
        .collect()
}

pub fn zero_state(mesh: &HullMesh) -> State {
    mesh.elements.iter().map(|e| DMatrix::zeros(e.dof(), 3)).collect()
}

/// `sqrt(Σ_h ∫ |U_h - U|²)` with the highest-degree polygon rule.
pub fn l2_error<F: Fn(&Point) -> Vector3<f64>>(mesh: &HullMesh, state: &State, exact: F) -> Result<f64> {
    let mut total = 0.0;
    for (e, s) in mesh.elements.iter().zip(state) {
        let rule = polygon_rule(&e.poly, MAX_AREA_DEGREE)?;
        let vals = e.eval(&rule.nodes) * s;
        for (q, p) in rule.nodes.iter().enumerate() {
            let d = vals.row(q).transpose() - exact(p);
            total += rule.weights[q] * d.norm_squared();
        }
    }
    Ok(total.sqrt())
}

/// `∫ U` per hull.
pub fn hull_integrals(mesh: &HullMesh, state: &State) -> Vec<Vector3<f64>> {
    mesh.elements
        .iter()
        .zip(state)
        .map(|(e, s)| {
            let w = nalgebra::DVector::from_column_slice(&e.vol_w);
            let v = (&e.phi * s).tr_mul(&w);
            Vector3::new(v[0], v[1], v[2])
        })
        .collect()
}
