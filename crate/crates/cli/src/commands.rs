use std::fs;
use std::path::Path;

use nalgebra::DVector;

use shull::basis::{build_basis, sample_nodes, sampled_l2_error, HullBasis};
use shull::candidates::{
    candidate_count_for, chebyshev_grid, equispaced_nodes, fill_count, fill_pattern, gravitational_relax, random_points,
};
use shull::fekete::{approximate_fekete_with, FeketeOptions, FeketeSet, Preconditioner, FEKETE_BOX_HALF_WIDTH};
use shull::geometry::normalize_hull_to;
use shull::io::{csv_string, fmt_f64, read_points_csv, read_polygon, write_polygons, Tabulation};
use shull::moments::boundary_moments;
use shull::partition::hertel_mehlhorn;
use shull::quadrature::polygon_rule;
use shull::solver::acoustics::AcousticsModel;
use shull::solver::dg::{Boundary, DgOperator};
use shull::solver::dls::{run_benchmark, DlsOptions};
use shull::solver::study::{dg_plane_wave, run_case, Kind, StudyConfig};
use shull::solver::{interpolate, l2_error, Family, HullMesh, State};
use shull::{AffineMap, Error, MonomialSpec, Point, Polygon, Result, Space};

use crate::*;

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load(path: &Path) -> Result<Polygon> {
    read_polygon(path).map_err(|e| match e {
        Error::Io(io) => Error::InvalidArgument(format!("cannot read {}: {io}", path.display())),
        other => other,
    })
}

fn normalized(poly: &Polygon) -> Result<(Polygon, AffineMap)> {
    normalize_hull_to(poly, FEKETE_BOX_HALF_WIDTH)
}

/// Candidates in normalized coordinates and the matching oversampling floor.
fn make_candidates(norm: &Polygon, map: &AffineMap, spec: &MonomialSpec, c: &CandArgs) -> Result<(Vec<Point>, Option<f64>)> {
    if let Some(path) = &c.candidates_file {
        let pts = read_points_csv(path)?;
        return Ok((pts.iter().map(|p| map.apply(p)).collect(), None));
    }
    if let Some(n) = c.grid {
        if !matches!(c.candidates, CandKind::Chebyshev) {
            return Err(Error::InvalidArgument("--grid requires --candidates chebyshev".into()));
        }
        let pts: Vec<Point> = chebyshev_grid(n, FEKETE_BOX_HALF_WIDTH).into_iter().filter(|p| norm.contains(p)).collect();
        return Ok((pts, None));
    }
    let count = candidate_count_for(spec, c.oversample)?;
    let pts = match c.candidates {
        CandKind::Fill => fill_count(norm, count)?,
        CandKind::Random => random_points(norm, count, c.seed),
        CandKind::Relaxed => gravitational_relax(norm, &random_points(norm, count, c.seed), 50, c.seed),
        CandKind::Chebyshev => chebyshev_filling(norm, count)?,
    };
    Ok((pts, Some(c.oversample)))
}

fn chebyshev_filling(norm: &Polygon, count: usize) -> Result<Vec<Point>> {
    let mut n = (count as f64).sqrt().ceil() as usize;
    loop {
        let pts: Vec<Point> = chebyshev_grid(n, FEKETE_BOX_HALF_WIDTH).into_iter().filter(|p| norm.contains(p)).collect();
        if pts.len() >= count {
            return Ok(pts);
        }
        n += 1;
        if n > 20_000 {
            return Err(Error::Degenerate("cannot fill polygon with Chebyshev points".into()));
        }
    }
}

fn fekete_on(
    norm: &Polygon,
    map: &AffineMap,
    spec: &MonomialSpec,
    cand: &CandArgs,
    method: MethodArg,
    precond: PrecondArg,
    steps: usize,
) -> Result<FeketeSet> {
    let (cands, min_oversample) = make_candidates(norm, map, spec, cand)?;
    let opts = FeketeOptions {
        method: method.into(),
        preconditioner: match precond {
            PrecondArg::Svd => Preconditioner::Svd,
            PrecondArg::Qr => Preconditioner::Qr,
        },
        steps,
        min_oversample,
    };
    approximate_fekete_with(norm, spec, &cands, &opts)
}

fn basis_on(norm: &Polygon, map: &AffineMap, space: Space, p: u32, cand: &CandArgs, route: RouteArg) -> Result<HullBasis> {
    let f = fekete_on(norm, map, &MonomialSpec::new(space, p), cand, MethodArg::Qr, PrecondArg::Svd, 1)?;
    build_basis(&f, route.into())
}

pub fn partition(a: &PartitionArgs) -> Result<()> {
    let poly = load(&a.input)?;
    let n = poly.outer().len();
    if a.start == 0 || a.start > n {
        return Err(Error::InvalidArgument(format!("--start must be in 1..={n}, got {}", a.start)));
    }
    let part = hertel_mehlhorn(&poly, a.start - 1)?;
    match &a.out {
        Some(p) => write_polygons(p, &part.pieces)?,
        None => {
            let text: Vec<String> = part.pieces.iter().map(|p| p.to_string()).collect();
            print!("{}", text.join("\n"));
        }
    }
    eprintln!(
        "pieces: {} (reflex vertices: {}, start vertex {})",
        part.len(),
        poly.reflex_vertices().len(),
        a.start
    );
    Ok(())
}

pub fn candidates(a: &CandidatesArgs) -> Result<()> {
    if a.count == 0 {
        return Err(Error::InvalidArgument("--count must be positive".into()));
    }
    let poly = load(&a.input)?;
    let (norm, map) = normalized(&poly)?;
    let pts = match (a.kind, a.spacing) {
        (CandKind::Fill, Some(h)) => fill_pattern(&norm, h * map.scale)?,
        (_, Some(_)) => return Err(Error::InvalidArgument("--spacing applies to --kind fill only".into())),
        (CandKind::Fill, None) => fill_count(&norm, a.count)?,
        (CandKind::Random, None) => random_points(&norm, a.count, a.seed),
        (CandKind::Chebyshev, None) => chebyshev_filling(&norm, a.count)?,
        (CandKind::Relaxed, None) => gravitational_relax(&norm, &random_points(&norm, a.count, a.seed), a.iterations, a.seed),
    };
    let rows = pts.iter().map(|p| map.invert(p)).map(|p| [p.x, p.y]);
    emit(a.out.as_deref(), &csv_string(&["x", "y"], rows))?;
    eprintln!("candidates: {}", pts.len());
    Ok(())
}

pub fn moments(a: &MomentsArgs) -> Result<()> {
    let poly = load(&a.input)?;
    let spec = MonomialSpec::new(a.space.into(), a.degree);
    let m = boundary_moments(&poly, &spec);
    let rows = spec.exponents().iter().zip(m.iter()).map(|(e, v)| [e[0] as f64, e[1] as f64, *v]);
    emit(a.out.as_deref(), &csv_string(&["a", "b", "moment"], rows))
}

pub fn quad(a: &QuadArgs) -> Result<()> {
    let poly = load(&a.input)?;
    let rule = polygon_rule(&poly, a.degree)?;
    let rows = rule.nodes.iter().zip(&rule.weights).map(|(p, w)| [p.x, p.y, *w]);
    emit(a.out.as_deref(), &csv_string(&["x", "y", "w"], rows))?;
    eprintln!("nodes: {}, area: {}", rule.len(), fmt_f64(rule.measure()));
    Ok(())
}

pub fn fekete(a: &FeketeArgs) -> Result<()> {
    if a.steps == 0 {
        return Err(Error::InvalidArgument("--steps must be at least 1".into()));
    }
    let poly = load(&a.input)?;
    let (norm, map) = normalized(&poly)?;
    let f = fekete_on(&norm, &map, &MonomialSpec::new(a.space.into(), a.degree), &a.cand, a.method, a.precond, a.steps)?;
    let s2 = map.scale * map.scale;
    let rows = f
        .points
        .iter()
        .zip(f.weights.iter())
        .map(|(p, w)| {
            let x = map.invert(p);
            [x.x, x.y, w / s2]
        });
    emit(a.out.as_deref(), &csv_string(&["x", "y", "w"], rows))?;
    eprintln!(
        "N: {}, sum w: {}, sum |w|: {}, min w: {}, moment residual: {:.3e}",
        f.len(),
        fmt_f64(f.weight_sum() / s2),
        fmt_f64(f.abs_weight_sum() / s2),
        fmt_f64(f.min_weight() / s2),
        f.moment_residual()
    );
    Ok(())
}

pub fn basis(a: &BasisArgs) -> Result<()> {
    let poly = load(&a.input)?;
    let (norm, map) = normalized(&poly)?;
    let b = basis_on(&norm, &map, a.space.into(), a.degree, &a.cand, a.route)?;
    let n = b.len();
    let km = a.km.unwrap_or(n);
    if km == 0 || km > n {
        return Err(Error::InvalidArgument(format!("--km must be in 1..={n}, got {km}")));
    }
    let pts: Vec<Point> = match &a.at {
        Some(p) => read_points_csv(p)?.iter().map(|x| map.apply(x)).collect(),
        None => b.nodes().to_vec(),
    };
    let cols = if matches!(a.kind, BasisKind::Nodal) { n } else { km };
    let mut header = vec!["x".to_string(), "y".to_string()];
    header.extend((1..=cols).map(|k| format!("psi_{k}")));
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| {
            let v: DVector<f64> = match a.kind {
                BasisKind::Nodal => b.eval_nodal(p),
                BasisKind::Modal => b.eval_modal(p, km),
                BasisKind::Orthonormal => b.eval_orthonormal(p, km),
            };
            let x = map.invert(p);
            let mut r = vec![x.x, x.y];
            r.extend(v.iter());
            r
        })
        .collect();
    emit(a.out.as_deref(), &csv_string(&header, rows))?;
    eprintln!("N: {n}, sigma_min: {:.3e}, sigma_max: {:.3e}", b.sigma.min(), b.sigma.max());
    Ok(())
}

pub fn tabulate(a: &TabulateArgs) -> Result<()> {
    let space: Space = a.space.into();
    let mut jobs: Vec<(String, Polygon)> = Vec::new();
    match &a.input {
        Some(p) => jobs.push(("in".into(), load(p)?)),
        None => {
            for &e in &a.sides.0 {
                if e < 3 {
                    return Err(Error::InvalidArgument(format!("master hulls need at least 3 sides, got {e}")));
                }
                jobs.push((e.to_string(), Polygon::regular(e as usize, 1.0)?));
            }
        }
    }
    fs::create_dir_all(&a.out_dir)?;
    for (name, poly) in jobs {
        let (norm, map) = normalized(&poly)?;
        let b = basis_on(&norm, &map, space, a.degree, &a.cand, a.route)?;
        let tab = Tabulation::from_basis(&b, map);
        let path = a.out_dir.join(format!("tab_{name}_{space}{}_{}.txt", a.degree, tab.key.route));
        tab.write(&path)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

pub fn lebesgue(a: &LebesgueArgs) -> Result<()> {
    if a.samples == 0 {
        return Err(Error::InvalidArgument("--samples must be positive".into()));
    }
    let poly = load(&a.input)?;
    let (norm, map) = normalized(&poly)?;
    let space: Space = a.space.into();
    let samples = random_points(&norm, a.samples, a.cand.seed);
    let mut rows = Vec::new();
    for &p in &a.degree.0 {
        let f = match a.nodes {
            NodeKind::Fekete => fekete_on(&norm, &map, &MonomialSpec::new(space, p), &a.cand, MethodArg::Qr, PrecondArg::Svd, 1)?,
            NodeKind::Equispaced => FeketeSet::from_nodes(
                &norm,
                &MonomialSpec::new(space, p),
                equispaced_nodes(space, p, FEKETE_BOX_HALF_WIDTH),
            )?,
        };
        let b = build_basis(&f, shull::basis::Route::Direct)?;
        rows.push([
            p as f64,
            b.len() as f64,
            b.lebesgue_bound(),
            b.lebesgue_estimate(&samples),
            b.sampled_l2_operator_norm(&samples)?,
            b.l2_operator_norm()?,
        ]);
    }
    emit(
        a.out.as_deref(),
        &csv_string(&["p", "n", "bound", "estimate", "l2_sampled", "l2_exact"], rows),
    )
}

fn test_function(f: Function) -> impl Fn(&Point) -> f64 {
    use std::f64::consts::PI;
    move |p: &Point| match f {
        Function::Cos3 => (3.0 * PI * p.x).cos() * (3.0 * PI * p.y).cos(),
        Function::Sin2 => (2.0 * PI * p.x).sin() * (2.0 * PI * p.y).sin(),
        Function::Radial4 => (4.0 * PI * (p.x * p.x + p.y * p.y).sqrt()).cos(),
        Function::Runge => 1.0 / (1.0 + 25.0 * (p.x * p.x + p.y * p.y)),
    }
}

pub fn interp(a: &InterpArgs) -> Result<()> {
    if a.samples == 0 {
        return Err(Error::InvalidArgument("--samples must be positive".into()));
    }
    let poly = load(&a.input)?;
    let (norm, map) = normalized(&poly)?;
    let samples = random_points(&norm, a.samples, a.cand.seed);
    let g = test_function(a.function);
    let gn = |x: &Point| g(&map.invert(x));
    let mut rows = Vec::new();
    for &p in &a.degree.0 {
        let b = basis_on(&norm, &map, a.space.into(), p, &a.cand, RouteArg::Direct)?;
        let n = b.len();
        let u = sample_nodes(&b, gn);
        let kms: Vec<usize> = match &a.km {
            Some(v) => v.0.iter().map(|&k| k as usize).collect(),
            None => vec![n],
        };
        for km in kms {
            if km == 0 || km > n {
                return Err(Error::InvalidArgument(format!("--km {km} outside 1..={n} at p = {p}")));
            }
            let (filtered, _) = b.filter_modes(&u, km);
            let err = sampled_l2_error(&b, &filtered, gn, &samples) / map.scale;
            let nodal = b.nodal_l2_error(&filtered, &u) / map.scale;
            rows.push([p as f64, n as f64, km as f64, err, nodal]);
        }
    }
    emit(a.out.as_deref(), &csv_string(&["p", "n", "km", "l2err", "nodal_err"], rows))
}

fn model_of(m: &ModelArgs) -> Result<AcousticsModel> {
    if !(m.alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("--alpha must be non-negative, got {}", m.alpha)));
    }
    if let Some(dt) = m.dt {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("--dt must be positive, got {dt}")));
        }
    }
    if !(m.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("--tol must be positive, got {}", m.tol)));
    }
    AcousticsModel::new(m.rho0, m.c0)
}

/// `0.4 h_min / (c0 (2p + 1))` on the `n x n` grid of `[-1, 1]^2`.
fn dg_dt(model: &AcousticsModel, n: usize, p: u32) -> f64 {
    0.4 * (2.0 / n as f64) / (model.c0 * (2 * p + 1) as f64)
}

fn state_csv(mesh: &HullMesh, state: &State) -> String {
    let mut s = String::from("hull,x,y,rho,u,v\n");
    for (h, (e, st)) in mesh.elements.iter().zip(state).enumerate() {
        for (i, p) in e.nodes().iter().enumerate() {
            let vals = [p.x, p.y, st[(i, 0)], st[(i, 1)], st[(i, 2)]];
            let cells: Vec<String> = vals.iter().map(|&v| fmt_f64(v)).collect();
            s.push_str(&format!("{h},{}\n", cells.join(",")));
        }
    }
    s
}

pub fn solve(a: &SolveArgs) -> Result<()> {
    let model = model_of(&a.model)?;
    let mesh = HullMesh::square_grid(a.model.mesh, -1.0, 1.0, a.family, a.degree, false)?;
    match a.kind {
        KindArg::Dls => {
            let opts = DlsOptions {
                dt: a.model.dt.unwrap_or(1e-12),
                alpha: a.model.alpha,
                ..Default::default()
            };
            let (sol, err) = run_benchmark(&mesh, &model, &opts, a.model.tol)?;
            emit(a.out.as_deref(), &state_csv(&mesh, &sol.state))?;
            eprintln!(
                "dls {} p={} dof: {}, l2 error: {:.6e}, cg iterations: {}",
                a.family,
                a.degree,
                mesh.dof(),
                err,
                sol.iterations
            );
        }
        KindArg::Dg => {
            let dt = a.model.dt.unwrap_or_else(|| dg_dt(&model, a.model.mesh, a.degree));
            let wave = dg_plane_wave(model);
            let g = move |t: f64, x: &Point| wave.state(t, x);
            let op = DgOperator::new(&mesh, model, Boundary::Exact(&g))?;
            let s0 = interpolate(&mesh, |x| wave.state(0.0, x));
            let out = op.advance(&s0, 0.0, dt, a.model.steps)?;
            let t1 = dt * a.model.steps as f64;
            let err = l2_error(&mesh, &out, |x| wave.state(t1, x))?;
            emit(a.out.as_deref(), &state_csv(&mesh, &out))?;
            eprintln!(
                "dg {} p={} dof: {}, dt: {:.3e}, steps: {}, l2 error: {:.6e}",
                a.family,
                a.degree,
                mesh.dof(),
                dt,
                a.model.steps,
                err
            );
        }
    }
    Ok(())
}

pub fn study(a: &StudyArgs) -> Result<()> {
    let model = model_of(&a.model)?;
    let families: Vec<Family> = if a.family.is_empty() { Family::ALL.to_vec() } else { a.family.clone() };
    let kind: Kind = a.kind.into();
    let pmax = a.p.0.iter().copied().max().unwrap_or(1);
    let cfg = StudyConfig {
        grid: a.model.mesh,
        model,
        dt: a.model.dt.unwrap_or(match kind {
            Kind::Dls => 1e-12,
            Kind::Dg => dg_dt(&model, a.model.mesh, pmax),
        }),
        alpha: a.model.alpha,
        steps: a.model.steps,
        tol: a.model.tol,
    };
    let mut text = String::from("family,p,dof,l2err\n");
    for &f in &families {
        for &p in &a.p.0 {
            let (_, row) = run_case(kind, f, p, &cfg)?;
            text.push_str(&format!("{},{},{},{}\n", row.family, row.p, row.dof, fmt_f64(row.l2err)));
        }
    }
    emit(a.out.as_deref(), &text)
}
