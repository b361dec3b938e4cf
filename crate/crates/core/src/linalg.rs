//! Dense linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Thin SVD `A = U diag(s) V^T` with descending singular values.
///
/// Column signs are fixed so that the largest-magnitude entry of each column
/// of `V` is positive, which makes the factors reproducible.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::Singular("matrix has non-finite entries".into()));
        }
        let fa = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
        let svd = fa
            .thin_svd()
            .map_err(|_| Error::Breakdown("SVD did not converge".into()))?;
        let (fu, fv, fs) = (svd.U(), svd.V(), svd.S().column_vector());
        let k = fs.nrows();
        let mut u = DMatrix::from_fn(a.nrows(), k, |i, j| fu[(i, j)]);
        let mut v = DMatrix::from_fn(a.ncols(), k, |i, j| fv[(i, j)]);
        let s = DVector::from_fn(k, |i, _| fs[i]);
        for k in 0..s.len() {
            let col = v.column(k);
            let imax = col.iamax();
            if col[imax] < 0.0 {
                v.column_mut(k).neg_mut();
                u.column_mut(k).neg_mut();
            }
        }
        Ok(Svd { u, s, v })
    }

    pub fn sigma_max(&self) -> f64 {
        self.s.iter().copied().fold(0.0, f64::max)
    }

    pub fn sigma_min(&self) -> f64 {
        self.s.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn condition(&self) -> f64 {
        self.sigma_max() / self.sigma_min()
    }

    /// Number of singular values at or below `tol * sigma_max`.
    pub fn deficiency(&self, tol: f64) -> usize {
        let cut = tol * self.sigma_max();
        self.s.iter().filter(|&&x| x <= cut).count()
    }

    /// Pseudo-inverse solution `V S^-1 U^T b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut c = self.u.tr_mul(b);
        for (ci, si) in c.iter_mut().zip(self.s.iter()) {
            *ci /= si;
        }
        &self.v * c
    }

    /// Solution of `A^T x = b` for square `A`: `U S^-1 V^T b`.
    pub fn solve_transpose(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut c = self.v.tr_mul(b);
        for (ci, si) in c.iter_mut().zip(self.s.iter()) {
            *ci /= si;
        }
        &self.u * c
    }
}

/// Greedy column selection by Householder QR with column pivoting.
///
/// Returns the first `k` pivot columns of `a`. Ties in the pivot norm within
/// `1e-12` relative go to the lower column index.
pub fn pivoted_qr_columns(a: &DMatrix<f64>, k: usize) -> Result<Vec<usize>> {
    let (n, m) = a.shape();
    if k > m || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot select {k} columns from a {n}x{m} matrix"
        )));
    }
    // Work on columns as contiguous vectors.
    let mut cols: Vec<Vec<f64>> = (0..m).map(|j| a.column(j).iter().copied().collect()).collect();
    let mut active: Vec<usize> = (0..m).collect();
    let mut chosen = Vec::with_capacity(k);
    let mut hv = vec![0.0; n];
    for step in 0..k {
        let mut best = 0usize;
        let mut best_norm = -1.0f64;
        for (pos, &j) in active.iter().enumerate() {
            let nrm: f64 = cols[j][step..].iter().map(|x| x * x).sum::<f64>();
            if nrm > best_norm * (1.0 + 1e-12) {
                best_norm = nrm;
                best = pos;
            } else if nrm >= best_norm * (1.0 - 1e-12) && j < active[best] {
                best = pos;
            }
        }
        let jp = active.swap_remove(best);
        active.sort_unstable();
        if best_norm <= 0.0 {
            return Err(Error::RankDeficient {
                deficient: k - step,
                cols: k,
            });
        }
        chosen.push(jp);
        // Householder vector zeroing cols[jp][step+1..].
        let x = &cols[jp][step..];
        let alpha = if x[0] >= 0.0 { -best_norm.sqrt() } else { best_norm.sqrt() };
        for (i, xi) in x.iter().enumerate() {
            hv[step + i] = *xi;
        }
        hv[step] -= alpha;
        let hn: f64 = hv[step..n].iter().map(|x| x * x).sum();
        if hn == 0.0 {
            continue;
        }
        for &j in &active {
            let c = &mut cols[j];
            let dot: f64 = hv[step..n].iter().zip(&c[step..n]).map(|(h, x)| h * x).sum();
            let f = 2.0 * dot / hn;
            for (ci, hi) in c[step..n].iter_mut().zip(&hv[step..n]) {
                *ci -= f * hi;
            }
        }
        let c = &mut cols[jp];
        c[step] = alpha;
        for ci in c[step + 1..n].iter_mut() {
            *ci = 0.0;
        }
    }
    Ok(chosen)
}

/// Thin QR by single-pass classical Gram-Schmidt: `A = Q R`.
pub fn classical_gram_schmidt(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (m, n) = a.shape();
    let mut q = DMatrix::zeros(m, n);
    let mut r = DMatrix::zeros(n, n);
    for j in 0..n {
        let aj = a.column(j);
        let mut v = aj.clone_owned();
        for i in 0..j {
            let rij = q.column(i).dot(&aj);
            r[(i, j)] = rij;
            v.axpy(-rij, &q.column(i), 1.0);
        }
        let nv = v.norm();
        if nv == 0.0 || !nv.is_finite() {
            return Err(Error::RankDeficient {
                deficient: n - j,
                cols: n,
            });
        }
        r[(j, j)] = nv;
        q.set_column(j, &(v / nv));
    }
    Ok((q, r))
}

/// Inverse of an upper-triangular matrix.
pub fn upper_triangular_inverse(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = r.nrows();
    let id = DMatrix::identity(n, n);
    r.solve_upper_triangular(&id)
        .ok_or_else(|| Error::Singular("triangular factor has a zero diagonal".into()))
}

/// Orthogonal matching pursuit on the dictionary `a` (columns are atoms)
/// for the target `b`, selecting exactly `k` atoms.
///
/// When the residual vanishes before `k` atoms are chosen, the remaining atoms
/// are chosen by largest norm orthogonal to the current support.
pub fn omp_columns(a: &DMatrix<f64>, b: &DVector<f64>, k: usize) -> Result<Vec<usize>> {
    let (n, m) = a.shape();
    if k > m || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot select {k} atoms from a {n}x{m} dictionary"
        )));
    }
    let norms: Vec<f64> = (0..m).map(|j| a.column(j).norm()).collect();
    // Squared norm of each atom orthogonal to the span of the support.
    let mut orth2: Vec<f64> = norms.iter().map(|x| x * x).collect();
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut in_support = vec![false; m];
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut resid = b.clone();
    let bnorm = b.norm().max(f64::MIN_POSITIVE);
    while support.len() < k {
        let use_residual = resid.norm() > 1e-13 * bnorm;
        let mut best = None;
        let mut best_score = -1.0f64;
        for j in 0..m {
            if in_support[j] || norms[j] == 0.0 {
                continue;
            }
            let score = if use_residual {
                (a.column(j).dot(&resid) / norms[j]).abs()
            } else {
                orth2[j].max(0.0).sqrt()
            };
            if score > best_score * (1.0 + 1e-12) {
                best_score = score;
                best = Some(j);
            }
        }
        let j = best.ok_or(Error::RankDeficient {
            deficient: k - support.len(),
            cols: k,
        })?;
        let mut v = a.column(j).clone_owned();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv <= 1e-14 * norms[j] {
            if use_residual {
                // The residual is numerically orthogonal to every remaining
                // atom; switch to the orthogonal-norm criterion.
                resid.fill(0.0);
                continue;
            }
            return Err(Error::RankDeficient {
                deficient: k - support.len(),
                cols: k,
            });
        }
        let q = v / nv;
        let c = q.dot(&resid);
        resid.axpy(-c, &q, 1.0);
        let dots = a.tr_mul(&q);
        for (o, d) in orth2.iter_mut().zip(dots.iter()) {
            *o -= d * d;
        }
        basis.push(q);
        support.push(j);
        in_support[j] = true;
    }
    Ok(support)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let a = DMatrix::from_fn(7, 4, |i, j| ((i * 3 + j * 5) % 7) as f64 - 2.5 + (i == j) as u8 as f64);
        let s = Svd::new(&a).unwrap();
        assert!(s.s.as_slice().windows(2).all(|w| w[0] >= w[1]));
        let back = &s.u * DMatrix::from_diagonal(&s.s) * s.v.transpose();
        assert!((back - &a).amax() < 1e-12);
        let b = DVector::from_fn(7, |i, _| i as f64);
        let x = s.solve(&b);
        let ls = a.clone().svd(true, true).solve(&b, 1e-14).unwrap();
        assert!((x - ls).amax() < 1e-10);
    }

    #[test]
    fn pivoted_qr_picks_largest_then_orthogonal() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 3.0, 0.1, 0.0, 1.0, 0.0, 2.0]);
        assert_eq!(pivoted_qr_columns(&a, 2).unwrap(), vec![2, 3]);
        // ties go to the lower index
        let t = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(pivoted_qr_columns(&t, 2).unwrap(), vec![0, 2]);
        let sq = DMatrix::<f64>::identity(3, 3);
        let mut sel = pivoted_qr_columns(&sq, 3).unwrap();
        sel.sort();
        assert_eq!(sel, vec![0, 1, 2]);
    }

    #[test]
    fn gram_schmidt_factorizes() {
        let a = DMatrix::from_fn(6, 3, |i, j| (1.0 + i as f64).powi(j as i32));
        let (q, r) = classical_gram_schmidt(&a).unwrap();
        assert!((&q * &r - &a).amax() < 1e-12);
        let ri = upper_triangular_inverse(&r).unwrap();
        assert!((&r * ri - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn omp_recovers_sparse_support() {
        let a = DMatrix::<f64>::identity(5, 5);
        let b = DVector::from_row_slice(&[0.0, 3.0, 0.0, -1.0, 0.0]);
        let s = omp_columns(&a, &b, 2).unwrap();
        assert_eq!(s, vec![1, 3]);
        let all = omp_columns(&a, &b, 5).unwrap();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
    }
}
