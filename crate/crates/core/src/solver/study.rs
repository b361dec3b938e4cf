//! Convergence studies and degree-of-freedom bookkeeping.

use std::str::FromStr;

use nalgebra::Vector2;

use super::acoustics::{AcousticsModel, PlaneWave};
use super::dg::{Boundary, DgOperator};
use super::dls::{run_benchmark, DlsOptions};
use super::mesh::{Family, HullMesh};
use super::{interpolate, l2_error};
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Dls,
    Dg,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Dls => "dls",
            Kind::Dg => "dg",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dls" => Ok(Kind::Dls),
            "dg" => Ok(Kind::Dg),
            _ => Err(Error::Parse(format!("unknown solver kind '{s}' (expected dls or dg)"))),
        }
    }
}

/// DG degrees of freedom on `ne` triangles.
pub fn dof_dg(ne: usize, p: u32) -> usize {
    let p = p as usize;
    ne * (p + 1) * (p + 2) / 2
}

/// Continuous Galerkin degrees of freedom on a fan of `ne` triangles.
pub fn dof_cg(ne: usize, p: u32) -> usize {
    dof_dg(ne, p) - ne * (p as usize + 1) + 1
}

pub fn dof_shull_p(p: u32) -> usize {
    dof_dg(1, p)
}

pub fn dof_shull_q(p: u32) -> usize {
    (p as usize + 1).pow(2)
}

#[derive(Clone, Copy, Debug)]
pub struct StudyConfig {
    /// Quads per side on `[-1, 1]^2`.
    pub grid: usize,
    pub model: AcousticsModel,
    /// DLS implicit step, or DG explicit step.
    pub dt: f64,
    pub alpha: f64,
    /// DG steps.
    pub steps: usize,
    pub tol: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            grid: 4,
            model: AcousticsModel::default(),
            dt: 1e-12,
            alpha: 1.0,
            steps: 10,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub family: Family,
    pub p: u32,
    pub dof: usize,
    pub l2err: f64,
}

/// Plane wave used by the DG runs.
pub fn dg_plane_wave(model: AcousticsModel) -> PlaneWave {
    PlaneWave::new(model, Vector2::new(0.6, 0.8), 1.0)
}

/// One row: DLS benchmark error, or DG plane-wave error after `steps` steps.
pub fn run_case(kind: Kind, family: Family, p: u32, cfg: &StudyConfig) -> Result<(HullMesh, StudyRow)> {
    let mesh = HullMesh::square_grid(cfg.grid, -1.0, 1.0, family, p, false)?;
    let l2err = match kind {
        Kind::Dls => {
            let opts = DlsOptions {
                dt: cfg.dt,
                alpha: cfg.alpha,
                ..Default::default()
            };
            run_benchmark(&mesh, &cfg.model, &opts, cfg.tol)?.1
        }
        Kind::Dg => {
            let wave = dg_plane_wave(cfg.model);
            let g = move |t: f64, x: &Point| wave.state(t, x);
            let op = DgOperator::new(&mesh, cfg.model, Boundary::Exact(&g))?;
            let s = interpolate(&mesh, |x| wave.state(0.0, x));
            let out = op.advance(&s, 0.0, cfg.dt, cfg.steps)?;
            l2_error(&mesh, &out, |x| wave.state(cfg.dt * cfg.steps as f64, x))?
        }
    };
    let row = StudyRow {
        family,
        p,
        dof: mesh.dof(),
        l2err,
    };
    Ok((mesh, row))
}

pub fn convergence_study(kind: Kind, families: &[Family], p_list: &[u32], cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    let mut rows = Vec::new();
    for &f in families {
        for &p in p_list {
            rows.push(run_case(kind, f, p, cfg)?.1);
        }
    }
    Ok(rows)
}

/// Smallest DOF in `rows` of `family` whose error is at most `target`.
pub fn dof_to_reach(rows: &[StudyRow], family: Family, target: f64) -> Option<usize> {
    rows.iter()
        .filter(|r| r.family == family && r.l2err <= target)
        .map(|r| r.dof)
        .min()
}
