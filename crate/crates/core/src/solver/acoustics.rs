//! Linearized acoustics `U_t + A1 U_x + A2 U_y = 0` with `U = (ρ, u, v)`.

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcousticsModel {
    pub rho0: f64,
    pub c0: f64,
}

impl Default for AcousticsModel {
    fn default() -> Self {
        Self { rho0: 1.0, c0: 1.0 }
    }
}

impl AcousticsModel {
    pub fn new(rho0: f64, c0: f64) -> Result<Self> {
        if !(rho0 > 0.0 && c0 > 0.0) {
            return Err(Error::InvalidArgument(format!("rho0 and c0 must be positive, got {rho0}, {c0}")));
        }
        Ok(Self { rho0, c0 })
    }

    pub fn a1(&self) -> Matrix3<f64> {
        let k = self.c0 * self.c0 / self.rho0;
        Matrix3::new(0.0, self.rho0, 0.0, k, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn a2(&self) -> Matrix3<f64> {
        let k = self.c0 * self.c0 / self.rho0;
        Matrix3::new(0.0, 0.0, self.rho0, 0.0, 0.0, 0.0, k, 0.0, 0.0)
    }

    /// `n1 A1 + n2 A2`.
    pub fn normal_jacobian(&self, n: &Vector2<f64>) -> Matrix3<f64> {
        self.a1() * n.x + self.a2() * n.y
    }

    /// Eigenvalues `(-c, 0, c)` and right eigenvectors (columns) of the normal
    /// Jacobian for a unit normal.
    pub fn eigen(&self, n: &Vector2<f64>) -> (Vector3<f64>, Matrix3<f64>) {
        let c = self.c0;
        let r = Matrix3::new(
            self.rho0, 0.0, self.rho0, //
            -c * n.x, -n.y, c * n.x, //
            -c * n.y, n.x, c * n.y,
        );
        (Vector3::new(-c, 0.0, c), r)
    }

    /// `|A_n| = R |Λ| R^-1`.
    pub fn abs_normal_jacobian(&self, n: &Vector2<f64>) -> Matrix3<f64> {
        let (lam, r) = self.eigen(n);
        let ri = r.try_inverse().expect("acoustic eigenvectors are independent");
        r * Matrix3::from_diagonal(&lam.abs()) * ri
    }

    /// Upwind numerical flux `F*·n` for left state `ul`, right state `ur`.
    pub fn upwind_flux(&self, ul: &Vector3<f64>, ur: &Vector3<f64>, n: &Vector2<f64>) -> Vector3<f64> {
        let an = self.normal_jacobian(n);
        let abs = self.abs_normal_jacobian(n);
        0.5 * an * (ul + ur) - 0.5 * abs * (ur - ul)
    }

    /// `∫ (c² ρ² / ρ0 + ρ0 (u² + v²))` integrand at one state.
    pub fn energy_density(&self, u: &Vector3<f64>) -> f64 {
        self.c0 * self.c0 * u.x * u.x / self.rho0 + self.rho0 * (u.y * u.y + u.z * u.z)
    }

    /// Mirror state for a solid wall: normal velocity reversed.
    pub fn wall_state(&self, u: &Vector3<f64>, n: &Vector2<f64>) -> Vector3<f64> {
        let vn = u.y * n.x + u.z * n.y;
        Vector3::new(u.x, u.y - 2.0 * vn * n.x, u.z - 2.0 * vn * n.y)
    }
}

/// Manufactured solution `(cos πx cos πy, x² + y², x - y)`.
pub fn exact_solution(p: &Point) -> Vector3<f64> {
    use std::f64::consts::PI;
    Vector3::new((PI * p.x).cos() * (PI * p.y).cos(), p.x * p.x + p.y * p.y, p.x - p.y)
}

/// `(∂U/∂x, ∂U/∂y)` of [`exact_solution`].
pub fn exact_gradient(p: &Point) -> (Vector3<f64>, Vector3<f64>) {
    use std::f64::consts::PI;
    let (sx, cx) = (PI * p.x).sin_cos();
    let (sy, cy) = (PI * p.y).sin_cos();
    (
        Vector3::new(-PI * sx * cy, 2.0 * p.x, 1.0),
        Vector3::new(-PI * cx * sy, 2.0 * p.y, -1.0),
    )
}

/// Source of the implicit-Euler manufactured problem
/// `f = U/Δt + A1 ∂U/∂x + A2 ∂U/∂y`.
pub fn manufactured_source(model: &AcousticsModel, dt: f64) -> Result<impl Fn(&Point) -> Vector3<f64>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let (a1, a2) = (model.a1(), model.a2());
    Ok(move |p: &Point| {
        let (ux, uy) = exact_gradient(p);
        exact_solution(p) / dt + a1 * ux + a2 * uy
    })
}

/// Plane wave `ρ = g(n·x - c t)`, `(u, v) = (c/ρ0) g n` with `g(s) = sin(k π s)`.
#[derive(Clone, Copy, Debug)]
pub struct PlaneWave {
    pub model: AcousticsModel,
    pub direction: Vector2<f64>,
    pub wavenumber: f64,
}

impl PlaneWave {
    pub fn new(model: AcousticsModel, direction: Vector2<f64>, wavenumber: f64) -> Self {
        Self {
            model,
            direction: direction.normalize(),
            wavenumber,
        }
    }

    pub fn state(&self, t: f64, p: &Point) -> Vector3<f64> {
        let s = self.direction.dot(&p.coords) - self.model.c0 * t;
        let g = (self.wavenumber * std::f64::consts::PI * s).sin();
        let k = self.model.c0 / self.model.rho0 * g;
        Vector3::new(g, k * self.direction.x, k * self.direction.y)
    }
}
