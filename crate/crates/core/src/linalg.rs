//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `m − m*`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn hermitian_min_eig(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Lower-triangular factor `L` with `m = L L*` and real positive diagonal.
#[derive(Debug, Clone)]
pub struct Cholesky {
    pub l: CMat,
}

impl Cholesky {
    pub fn solve(&self, b: &CVec) -> CVec {
        let y = self.forward(b);
        self.backward(&y)
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &CVec) -> CVec {
        let n = self.l.nrows();
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solves `L* x = y`.
    pub fn backward(&self, y: &CVec) -> CVec {
        let n = self.l.nrows();
        let mut x = y.clone();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)].conj() * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> CMat {
        let n = self.l.nrows();
        let mut inv = CMat::zeros(n, n);
        for j in 0..n {
            let mut e = CVec::zeros(n);
            e[j] = Complex64::new(1.0, 0.0);
            inv.set_column(j, &self.solve(&e));
        }
        inv
    }
}

/// Cholesky factorization of a Hermitian positive definite matrix. A
/// non-positive pivot is reported as an A2 violation naming `what`.
pub fn cholesky(m: &CMat, what: &str) -> Result<Cholesky> {
    let n = m.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::A2Violation(format!("{what} is not positive definite")));
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(Cholesky { l })
}

pub fn inverse(m: &CMat, what: &str) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|z| z.is_finite()))
        .ok_or_else(|| Error::Singular(what.to_string()))
}

pub fn solve(m: &CMat, rhs: &CVec, what: &str) -> Result<CVec> {
    m.clone()
        .lu()
        .solve(rhs)
        .filter(|x| x.iter().all(|z| z.is_finite()))
        .ok_or_else(|| Error::Singular(what.to_string()))
}

/// Orthonormal basis (columns) of `{x : Σ c_a x_a = 0}` in ℂ^d; `c` nonzero.
pub fn annihilator_basis(c: &[Complex64]) -> CMat {
    let d = c.len();
    // The constraint is ⟨x, conj(c)⟩ = 0 in the standard inner product.
    let normal = CVec::from_iterator(d, c.iter().map(|z| z.conj()));
    let nn = normal.norm();
    let mut basis: Vec<CVec> = Vec::with_capacity(d.saturating_sub(1));
    let unit_normal = normal / Complex64::new(nn, 0.0);
    for k in 0..d {
        if basis.len() + 1 == d {
            break;
        }
        let mut v = CVec::zeros(d);
        v[k] = Complex64::new(1.0, 0.0);
        let proj = unit_normal.dotc(&v);
        v -= &unit_normal * proj;
        for b in &basis {
            let p = b.dotc(&v);
            v -= b * p;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / Complex64::new(norm, 0.0));
        }
    }
    let cols: Vec<CVec> = basis;
    if cols.is_empty() {
        return CMat::zeros(d, 0);
    }
    CMat::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigen_and_norms() {
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-10 && (ev[1] - 3.0).abs() < 1e-10);
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-10);
        assert!(hermitian_defect(&m) < 1e-15);
        let ch = cholesky(&m, "m").unwrap();
        assert!(max_abs(&(&ch.l * ch.l.adjoint() - &m)) < 1e-14);
        assert!(max_abs(&(ch.inverse() * &m - CMat::identity(2, 2))) < 1e-14);
        let neg = -m;
        assert!(matches!(cholesky(&neg, "m"), Err(Error::A2Violation(_))));
    }

    #[test]
    fn annihilator_is_orthonormal_and_in_kernel() {
        let grad = [c(0.3, -1.0), c(2.0, 0.5), c(0.0, 0.0)];
        let q = annihilator_basis(&grad);
        assert_eq!(q.ncols(), 2);
        let gram = q.adjoint() * &q;
        assert!(max_abs(&(gram - CMat::identity(2, 2))) < 1e-12);
        for col in q.column_iter() {
            let s: Complex64 = grad.iter().zip(col.iter()).map(|(g, x)| g * x).sum();
            assert!(s.norm() < 1e-12);
        }
    }
}
