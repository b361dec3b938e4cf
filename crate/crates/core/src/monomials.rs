//! Monomial spaces and Vandermonde matrices.
//!
//! Exponents are listed in graded lexicographic order: by total degree, and
//! within one degree by descending power of `x`. For `P` with `p = 2` that is
//! `1, x, y, x^2, xy, y^2`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::{Error, Point, Result};

/// Polynomial space tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// Total degree at most `p`.
    P,
    /// Degree at most `p` in each variable.
    Q,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::P => "P",
            Space::Q => "Q",
        })
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(Space::P),
            "Q" | "q" => Ok(Space::Q),
            _ => Err(Error::Parse(format!("unknown polynomial space '{s}' (expected P or Q)"))),
        }
    }
}

pub type Exponent = [u32; 2];

/// A two-variable monomial space with its ordered exponent list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialSpec {
    space: Space,
    degree: u32,
    exponents: Vec<Exponent>,
}

impl MonomialSpec {
    pub fn new(space: Space, degree: u32) -> Self {
        Self {
            space,
            degree,
            exponents: enumerate_monomials(space, degree),
        }
    }

    /// A spec over an explicit exponent list (used for squared monomials).
    pub(crate) fn custom(space: Space, degree: u32, exponents: Vec<Exponent>) -> Self {
        Self {
            space,
            degree,
            exponents,
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        2
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.exponents
    }

    /// Largest total degree among the monomials (`p` for P, `2p` for Q).
    pub fn max_total_degree(&self) -> u32 {
        self.exponents.iter().map(|e| e[0] + e[1]).max().unwrap_or(0)
    }

    fn max_axis_degree(&self) -> usize {
        self.exponents.iter().map(|e| e[0].max(e[1])).max().unwrap_or(0) as usize
    }

    /// The squared monomials `f_j^2`, in the same order.
    pub fn squared(&self) -> MonomialSpec {
        MonomialSpec::custom(
            self.space,
            2 * self.degree,
            self.exponents.iter().map(|e| [2 * e[0], 2 * e[1]]).collect(),
        )
    }

    /// Index of the constant monomial.
    pub fn constant_index(&self) -> Option<usize> {
        self.exponents.iter().position(|e| *e == [0, 0])
    }

    /// Row `f(pt)` of monomial values, written into `out`.
    pub fn eval_into(&self, pt: &Point, out: &mut [f64]) {
        let (px, py) = powers(pt, self.max_axis_degree());
        for (o, e) in out.iter_mut().zip(&self.exponents) {
            *o = px[e[0] as usize] * py[e[1] as usize];
        }
    }

    pub fn eval(&self, pt: &Point) -> DVector<f64> {
        let mut v = DVector::zeros(self.len());
        self.eval_into(pt, v.as_mut_slice());
        v
    }

    /// Partial derivatives of every monomial at `pt`: `(d/dx, d/dy)`.
    pub fn eval_grad(&self, pt: &Point) -> (DVector<f64>, DVector<f64>) {
        let (px, py) = powers(pt, self.max_axis_degree());
        let n = self.len();
        let mut dx = DVector::zeros(n);
        let mut dy = DVector::zeros(n);
        for (j, e) in self.exponents.iter().enumerate() {
            let (a, b) = (e[0] as usize, e[1] as usize);
            if a > 0 {
                dx[j] = a as f64 * px[a - 1] * py[b];
            }
            if b > 0 {
                dy[j] = b as f64 * px[a] * py[b - 1];
            }
        }
        (dx, dy)
    }

    /// `M x N` matrix whose row `i` is `f(pts[i])`.
    pub fn vandermonde(&self, pts: &[Point]) -> DMatrix<f64> {
        let n = self.len();
        let rows: Vec<Vec<f64>> = pts
            .par_iter()
            .map(|p| {
                let mut r = vec![0.0; n];
                self.eval_into(p, &mut r);
                r
            })
            .collect();
        DMatrix::from_fn(pts.len(), n, |i, j| rows[i][j])
    }
}

fn powers(pt: &Point, k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut px = vec![1.0; k + 1];
    let mut py = vec![1.0; k + 1];
    for i in 1..=k {
        px[i] = px[i - 1] * pt.x;
        py[i] = py[i - 1] * pt.y;
    }
    (px, py)
}

/// Exponents of the space in graded lexicographic order.
pub fn enumerate_monomials(space: Space, p: u32) -> Vec<Exponent> {
    let top = match space {
        Space::P => p,
        Space::Q => 2 * p,
    };
    let mut out = Vec::new();
    for t in 0..=top {
        for i in (0..=t).rev() {
            let j = t - i;
            if space == Space::Q && (i > p || j > p) {
                continue;
            }
            out.push([i, j]);
        }
    }
    out
}

/// Space dimension: `(p+1)(p+2)/2` for P, `(p+1)^2` for Q.
pub fn dimension(space: Space, p: u32) -> usize {
    let p = p as usize;
    match space {
        Space::P => (p + 1) * (p + 2) / 2,
        Space::Q => (p + 1) * (p + 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_monomials(Space::P, 1), vec![[0, 0], [1, 0], [0, 1]]);
        assert_eq!(MonomialSpec::new(Space::P, 2).len(), 6);
        assert_eq!(MonomialSpec::new(Space::Q, 2).len(), 9);
        assert_eq!(
            enumerate_monomials(Space::Q, 1),
            vec![[0, 0], [1, 0], [0, 1], [1, 1]]
        );
        for p in 0..12 {
            assert_eq!(enumerate_monomials(Space::P, p).len(), dimension(Space::P, p));
            assert_eq!(enumerate_monomials(Space::Q, p).len(), dimension(Space::Q, p));
        }
    }

    #[test]
    fn evaluation_examples() {
        let s = MonomialSpec::new(Space::P, 2);
        let v = s.eval(&Point::origin());
        assert_eq!(v.as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(s.eval(&Point::new(1.0, 1.0)).iter().all(|&x| x == 1.0));
        let q = Point::new(0.5, -0.5);
        let v = s.eval(&q);
        for (j, e) in s.exponents().iter().enumerate() {
            assert_eq!(v[j], q.x.powi(e[0] as i32) * q.y.powi(e[1] as i32));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s = MonomialSpec::new(Space::Q, 3);
        let p = Point::new(0.3, -0.7);
        let (dx, dy) = s.eval_grad(&p);
        let h = 1e-6;
        let fx = (s.eval(&Point::new(p.x + h, p.y)) - s.eval(&Point::new(p.x - h, p.y))) / (2.0 * h);
        let fy = (s.eval(&Point::new(p.x, p.y + h)) - s.eval(&Point::new(p.x, p.y - h))) / (2.0 * h);
        assert!((dx - fx).amax() < 1e-8);
        assert!((dy - fy).amax() < 1e-8);
    }

    #[test]
    fn vandermonde_shape_and_rank() {
        let s = MonomialSpec::new(Space::P, 1);
        let v = s.vandermonde(&[Point::origin()]);
        assert_eq!(v.shape(), (1, 3));
        assert_eq!(v.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
        let tri = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(s.vandermonde(&tri).determinant().abs() > 0.5);
    }

    #[test]
    fn space_parsing() {
        assert_eq!("P".parse::<Space>().unwrap(), Space::P);
        assert_eq!("q".parse::<Space>().unwrap(), Space::Q);
        assert!("R".parse::<Space>().is_err());
    }
}
