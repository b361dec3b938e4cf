//! File formats: polygons, CSV tables and tabulated hull bases.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector, Vector2};

use crate::basis::{HullBasis, Route};
use crate::fekete::FeketeSet;
use crate::linalg::Svd;
use crate::monomials::{MonomialSpec, Space};
use crate::{AffineMap, Error, Point, Polygon, Result};

pub fn read_polygon(path: &Path) -> Result<Polygon> {
    fs::read_to_string(path)?.parse()
}

pub fn write_polygon(path: &Path, poly: &Polygon) -> Result<()> {
    fs::write(path, poly.to_string())?;
    Ok(())
}

/// Several polygons in one file, separated by blank lines.
pub fn write_polygons(path: &Path, polys: &[Polygon]) -> Result<()> {
    let text: Vec<String> = polys.iter().map(|p| p.to_string()).collect();
    fs::write(path, text.join("\n"))?;
    Ok(())
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text with a header row; every float has 17 significant digits.
pub fn csv_string<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.as_ref().iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    fs::write(path, csv_string(header, rows))?;
    Ok(())
}

/// Numeric rows of a CSV file with a header line.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV file".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (k, l) in lines.enumerate() {
        let r: std::result::Result<Vec<f64>, _> = l.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let r = r.map_err(|_| Error::Parse(format!("bad number on data row {}", k + 1)))?;
        if r.len() != header.len() {
            return Err(Error::Parse(format!("data row {} has {} fields, expected {}", k + 1, r.len(), header.len())));
        }
        rows.push(r);
    }
    Ok((header, rows))
}

/// Points from the first two columns of a CSV file.
pub fn read_points_csv(path: &Path) -> Result<Vec<Point>> {
    let (h, rows) = read_csv(path)?;
    if h.len() < 2 {
        return Err(Error::Parse("point CSV needs at least x and y columns".into()));
    }
    Ok(rows.iter().map(|r| Point::new(r[0], r[1])).collect())
}

const TAB_MAGIC: &str = "shull-tab";
const TAB_VERSION: u32 = 1;

/// Lookup key of a tabulated basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TabKey {
    pub d: usize,
    /// Number of polygon sides.
    pub sides: usize,
    pub degree: u32,
    pub space: Space,
    pub route: Route,
}

/// Stored hull basis, together with the map from physical to hull coordinates.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub key: TabKey,
    pub polygon: Polygon,
    pub map: AffineMap,
    pub points: Vec<Point>,
    pub weights: DVector<f64>,
    pub a: DMatrix<f64>,
    pub modal_factor: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub fnorm: f64,
}

impl Tabulation {
    pub fn from_basis(b: &HullBasis, map: AffineMap) -> Self {
        let f = &b.fekete;
        Tabulation {
            key: TabKey {
                d: 2,
                sides: f.poly.outer().len(),
                degree: f.spec.degree(),
                space: f.spec.space(),
                route: b.route,
            },
            polygon: f.poly.clone(),
            map,
            points: f.points.clone(),
            weights: f.weights.clone(),
            a: b.a.clone(),
            modal_factor: b.modal_factor.clone(),
            u: b.u.clone(),
            sigma: b.sigma.clone(),
            fnorm: b.fnorm,
        }
    }

    /// Rebuilds the basis without recomputing any factorization.
    pub fn to_basis(&self) -> Result<HullBasis> {
        let spec = MonomialSpec::new(self.key.space, self.key.degree);
        let n = spec.len();
        if self.points.len() != n || self.a.shape() != (n, n) {
            return Err(Error::Parse(format!("tabulated sizes do not match N = {n}")));
        }
        let mut v = self.modal_factor.clone();
        for (k, mut c) in v.column_iter_mut().enumerate() {
            c *= self.sigma[k];
        }
        let svd = Svd {
            u: self.u.clone(),
            s: self.sigma.clone(),
            v,
        };
        let fek = FeketeSet {
            points: self.points.clone(),
            weights: self.weights.clone(),
            indices: vec![],
            svd,
            spec,
            poly: self.polygon.clone(),
            precond_sigma_min: self.sigma.min() / self.sigma.max(),
            p0: self.modal_factor.clone(),
        };
        Ok(HullBasis {
            fekete: fek,
            a: self.a.clone(),
            modal_factor: self.modal_factor.clone(),
            u: self.u.clone(),
            sigma: self.sigma.clone(),
            fnorm: self.fnorm,
            route: self.key.route,
        })
    }

    pub fn to_text(&self) -> String {
        let k = &self.key;
        let mut s = String::new();
        let _ = writeln!(s, "{TAB_MAGIC} {TAB_VERSION}");
        let _ = writeln!(s, "key {} {} {} {} {}", k.d, k.sides, k.degree, k.space, k.route);
        let _ = writeln!(
            s,
            "map {} {} {}",
            fmt_f64(self.map.scale),
            fmt_f64(self.map.translate.x),
            fmt_f64(self.map.translate.y)
        );
        let _ = writeln!(s, "polygon");
        s.push_str(&self.polygon.to_string());
        let n = self.points.len();
        let _ = writeln!(s, "nodes {n}");
        for (p, w) in self.points.iter().zip(self.weights.iter()) {
            let _ = writeln!(s, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(*w));
        }
        for (name, m) in [("a", &self.a), ("modal", &self.modal_factor), ("u", &self.u)] {
            let _ = writeln!(s, "{name}");
            for r in m.row_iter() {
                let cells: Vec<String> = r.iter().map(|&x| fmt_f64(x)).collect();
                let _ = writeln!(s, "{}", cells.join(" "));
            }
        }
        let _ = writeln!(s, "sigma");
        let cells: Vec<String> = self.sigma.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(s, "{}", cells.join(" "));
        let _ = writeln!(s, "fnorm {}", fmt_f64(self.fnorm));
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut t = text.split_whitespace();
        let mut next = |what: &str| t.next().ok_or_else(|| Error::Parse(format!("tabulation ends before {what}")));
        fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
            s.parse().map_err(|_| Error::Parse(format!("cannot parse '{s}'")))
        }
        let expect = |got: &str, want: &str| {
            if got == want {
                Ok(())
            } else {
                Err(Error::Parse(format!("expected '{want}', found '{got}'")))
            }
        };
        expect(next("magic")?, TAB_MAGIC)?;
        let ver: u32 = num(next("version")?)?;
        if ver != TAB_VERSION {
            return Err(Error::Parse(format!("unsupported tabulation version {ver}")));
        }
        expect(next("key")?, "key")?;
        let key = TabKey {
            d: num(next("d")?)?,
            sides: num(next("sides")?)?,
            degree: num(next("degree")?)?,
            space: next("space")?.parse()?,
            route: next("route")?.parse()?,
        };
        expect(next("map")?, "map")?;
        let scale: f64 = num(next("scale")?)?;
        let tx: f64 = num(next("tx")?)?;
        let ty: f64 = num(next("ty")?)?;
        let map = AffineMap::new(scale, Vector2::new(tx, ty))?;
        expect(next("polygon")?, "polygon")?;
        let mut ptext = String::new();
        let dim = next("polygon d")?;
        let nloops: usize = num(next("loop count")?)?;
        let _ = write!(ptext, "{dim} {nloops}");
        for _ in 0..nloops {
            let nv: usize = num(next("vertex count")?)?;
            let _ = write!(ptext, " {nv}");
            for _ in 0..2 * nv {
                let _ = write!(ptext, " {}", next("vertex")?);
            }
        }
        let polygon: Polygon = ptext.parse()?;
        expect(next("nodes")?, "nodes")?;
        let n: usize = num(next("node count")?)?;
        let mut points = Vec::with_capacity(n);
        let mut weights = DVector::zeros(n);
        for i in 0..n {
            let x: f64 = num(next("x")?)?;
            let y: f64 = num(next("y")?)?;
            points.push(Point::new(x, y));
            weights[i] = num(next("w")?)?;
        }
        let mut mats = Vec::new();
        for name in ["a", "modal", "u"] {
            expect(next(name)?, name)?;
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = num(next(name)?)?;
                }
            }
            mats.push(m);
        }
        expect(next("sigma")?, "sigma")?;
        let mut sigma = DVector::zeros(n);
        for i in 0..n {
            sigma[i] = num(next("sigma")?)?;
        }
        expect(next("fnorm")?, "fnorm")?;
        let fnorm: f64 = num(next("fnorm")?)?;
        let u = mats.pop().unwrap();
        let modal_factor = mats.pop().unwrap();
        let a = mats.pop().unwrap();
        Ok(Tabulation {
            key,
            polygon,
            map,
            points,
            weights,
            a,
            modal_factor,
            u,
            sigma,
            fnorm,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Reads a tabulation and checks that its key matches exactly.
    pub fn lookup(path: &Path, key: &TabKey) -> Result<Self> {
        let t = Self::read(path)?;
        if &t.key != key {
            return Err(Error::InvalidArgument(format!(
                "tabulation key {:?} does not match requested {:?}",
                t.key, key
            )));
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::candidates::fill_count;
    use crate::fekete::{approximate_fekete, Method};

    #[test]
    fn csv_has_header_and_full_precision() {
        let s = csv_string(&["x", "y"], [[0.1, 1.0 / 3.0]]);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("x,y"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(row, vec![0.1, 1.0 / 3.0]);
        assert_eq!(csv_string(&["a"], Vec::<[f64; 1]>::new()), "a\n");
    }

    #[test]
    fn tabulation_round_trip() {
        let hex = Polygon::regular(6, 1.0).unwrap();
        let spec = MonomialSpec::new(Space::P, 3);
        let c = fill_count(&hex, 100).unwrap();
        let f = approximate_fekete(&hex, &spec, &c, Method::Qr).unwrap();
        let b = build_basis(&f, Route::Direct).unwrap();
        let t = Tabulation::from_basis(&b, AffineMap::identity());
        let back = Tabulation::parse(&t.to_text()).unwrap();
        assert_eq!(back.key, t.key);
        assert_eq!(back.a, t.a);
        assert_eq!(back.points, t.points);
        assert_eq!(back.to_text(), t.to_text());
        let rb = back.to_basis().unwrap();
        let p = Point::new(0.1, 0.2);
        assert!((rb.eval_nodal(&p) - b.eval_nodal(&p)).amax() < 1e-14);
        assert!((rb.eval_modal(&p, 10) - b.eval_modal(&p, 10)).amax() < 1e-12);
        assert!(Tabulation::parse("shull-tab 2").is_err());
    }
}
