//! Families of Hermitian norms `h(t)` on ℂⁿ and the curvature of their unit
//! spheres.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exprs::{parse, Expr, Func, Var, VarAssignment};
use crate::geometry::{sample_points, DomainFamily};
use crate::lifts::geodesic_curvature;
use crate::linalg::{self, CMat};

type C = Complex64;

pub const MAX_FIBRE_DIM: usize = 4;

/// `h[α][β] = h_{αβ̄}(t)` with entries in the base variables only.
#[derive(Debug, Clone)]
pub struct HermitianNormFamily {
    pub h: Vec<Vec<Expr>>,
    pub m: usize,
    // d_t[j][α][β] = ∂h_{αβ̄}/∂t^j, and so on.
    d_t: Vec<Vec<Vec<Expr>>>,
    d_tbar: Vec<Vec<Vec<Expr>>>,
    d_t_tbar: Vec<Vec<Vec<Vec<Expr>>>>,
}

/// Coefficients S_{αβ̄jk̄} = h_{αβ̄,jk̄} − Σ h_{αλ̄,j} h^{λ̄ν} h_{νβ̄,k̄}.
#[derive(Debug, Clone, PartialEq)]
pub struct SemmesTensor {
    pub n: usize,
    pub m: usize,
    data: Vec<C>,
}

impl SemmesTensor {
    fn index(&self, a: usize, b: usize, j: usize, k: usize) -> usize {
        ((a * self.n + b) * self.m + j) * self.m + k
    }

    pub fn get(&self, a: usize, b: usize, j: usize, k: usize) -> C {
        self.data[self.index(a, b, j, k)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// The `n×n` block for base directions `(j, k)`.
    pub fn block(&self, j: usize, k: usize) -> CMat {
        CMat::from_fn(self.n, self.n, |a, b| self.get(a, b, j, k))
    }

    /// Largest |S_{αβ̄jk̄} − conj(S_{βᾱkj̄})|.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                for j in 0..self.m {
                    for k in 0..self.m {
                        d = d.max((self.get(a, b, j, k) - self.get(b, a, k, j).conj()).norm());
                    }
                }
            }
        }
        d
    }
}

fn map3<F: Fn(&Expr) -> Expr>(h: &[Vec<Expr>], f: F) -> Vec<Vec<Expr>> {
    h.iter().map(|r| r.iter().map(&f).collect()).collect()
}

impl HermitianNormFamily {
    pub fn new(h: Vec<Vec<Expr>>, m: usize) -> Result<HermitianNormFamily> {
        let n = h.len();
        if n == 0 || n > MAX_FIBRE_DIM || h.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!(
                "norm matrix must be square of size 1..={MAX_FIBRE_DIM}"
            )));
        }
        for e in h.iter().flatten() {
            e.check_signature(m, 0)?;
        }
        let d_t = (0..m).map(|j| map3(&h, |e| e.wirtinger(Var::Base(j), false))).collect();
        let d_tbar: Vec<Vec<Vec<Expr>>> =
            (0..m).map(|k| map3(&h, |e| e.wirtinger(Var::Base(k), true))).collect();
        let d_t_tbar = (0..m)
            .map(|j| {
                (0..m)
                    .map(|k| map3(&d_tbar[k], |e| e.wirtinger(Var::Base(j), false)))
                    .collect()
            })
            .collect();
        let fam = HermitianNormFamily {
            h,
            m,
            d_t,
            d_tbar,
            d_t_tbar,
        };
        for t in sample_points(0x5eed_0003, 8, m, 0.5) {
            let ht = fam.matrix(&t)?;
            let defect = linalg::hermitian_defect(&ht);
            if defect > 1e-12 {
                return Err(Error::Config(format!(
                    "h(t) is not Hermitian (defect {defect:e}) at t = {t:?}"
                )));
            }
            if !(linalg::hermitian_min_eig(&ht) > 0.0) {
                return Err(Error::Config(format!("h(t) is not positive definite at t = {t:?}")));
            }
        }
        Ok(fam)
    }

    /// Parses a row-major matrix of entry expressions.
    pub fn parse(h: &[Vec<String>], m: usize) -> Result<HermitianNormFamily> {
        let exprs = h
            .iter()
            .map(|r| r.iter().map(|s| parse(s).map_err(Error::from)).collect())
            .collect::<Result<_>>()?;
        HermitianNormFamily::new(exprs, m)
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    fn eval(&self, es: &[Vec<Expr>], t: &[C]) -> Result<CMat> {
        let a = VarAssignment::new(t, &[]);
        let n = self.n();
        let mut out = CMat::zeros(n, n);
        for (i, r) in es.iter().enumerate() {
            for (k, e) in r.iter().enumerate() {
                out[(i, k)] = e.eval(&a)?;
            }
        }
        Ok(out)
    }

    pub fn matrix(&self, t: &[C]) -> Result<CMat> {
        self.eval(&self.h, t)
    }

    /// h(z, z) = Σ h_{αβ̄} z^α conj(z^β).
    pub fn quadratic(&self, t: &[C], z: &[C]) -> Result<f64> {
        Ok(quad_form(&self.matrix(t)?, z).re)
    }

    pub fn semmes_matrix(&self, t: &[C]) -> Result<SemmesTensor> {
        let (n, m) = (self.n(), self.m);
        let hinv = linalg::inverse(&self.matrix(t)?, "h(t)")?;
        let dt: Vec<CMat> = self.d_t.iter().map(|e| self.eval(e, t)).collect::<Result<_>>()?;
        let dtb: Vec<CMat> = self.d_tbar.iter().map(|e| self.eval(e, t)).collect::<Result<_>>()?;
        let mut tensor = SemmesTensor {
            n,
            m,
            data: vec![C::new(0.0, 0.0); n * n * m * m],
        };
        for j in 0..m {
            for k in 0..m {
                let block = self.eval(&self.d_t_tbar[j][k], t)? - &dt[j] * &hinv * &dtb[k];
                for a in 0..n {
                    for b in 0..n {
                        let i = tensor.index(a, b, j, k);
                        tensor.data[i] = block[(a, b)];
                    }
                }
            }
        }
        Ok(tensor)
    }

    /// θ_{jk̄} = Σ S_{αβ̄jk̄} z^α conj(z^β).
    pub fn norm_theta(&self, t: &[C], z: &[C]) -> Result<CMat> {
        let s = self.semmes_matrix(t)?;
        Ok(CMat::from_fn(self.m, self.m, |j, k| quad_form(&s.block(j, k), z)))
    }

    /// ρ(t, z) = Σ h_{αβ̄}(t) z^α conj(z^β) − 1 as a domain family.
    pub fn unit_ball_family(&self) -> Result<DomainFamily> {
        let mut rho = Expr::num(-1.0);
        for (a, r) in self.h.iter().enumerate() {
            for (b, e) in r.iter().enumerate() {
                let term = Expr::mul(e.clone(), Expr::mul(Expr::z(a), Expr::conj(Expr::z(b))));
                rho = Expr::add(rho, term);
            }
        }
        // Each conjugate pair of terms sums to a real number; take the real
        // part explicitly so rounding cannot leave an imaginary residue.
        let rho = Expr::call(Func::Re, rho);
        DomainFamily::new(rho, Expr::num(0.0), self.m, self.n())
    }
}

fn quad_form(h: &CMat, z: &[C]) -> C {
    let mut s = C::new(0.0, 0.0);
    for (a, za) in z.iter().enumerate() {
        for (b, zb) in z.iter().enumerate() {
            s += h[(a, b)] * za * zb.conj();
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop32Report {
    pub max_semmes: f64,
    pub max_norm_theta: f64,
    pub max_domain_theta: f64,
    /// Largest |norm θ − h(z,z)·domain θ| over the samples.
    pub bridge_defect: f64,
    pub semmes_flat: bool,
    pub norm_flat: bool,
    pub domain_flat: bool,
    /// All three flatness flags agree.
    pub equivalent: bool,
}

/// Compares the three flatness criteria for a norm family: vanishing of the
/// Semmes tensor, of the norm curvature form and of the geodesic curvature
/// of the unit-sphere boundaries.
pub fn prop32_equivalence(
    fam: &HermitianNormFamily,
    t_grid: &[Vec<C>],
    z_samples: &[Vec<C>],
    tol: f64,
) -> Result<Prop32Report> {
    let ball = fam.unit_ball_family()?;
    let mut rep = Prop32Report {
        max_semmes: 0.0,
        max_norm_theta: 0.0,
        max_domain_theta: 0.0,
        bridge_defect: 0.0,
        semmes_flat: false,
        norm_flat: false,
        domain_flat: false,
        equivalent: false,
    };
    for t in t_grid {
        rep.max_semmes = rep.max_semmes.max(fam.semmes_matrix(t)?.max_abs());
        for z in z_samples {
            let q = fam.quadratic(t, z)?;
            if !(q > 0.0) {
                return Err(Error::Config("norm samples must be nonzero vectors".into()));
            }
            let norm_theta = fam.norm_theta(t, z)?;
            let scale = q.sqrt();
            let p: Vec<C> = z.iter().map(|x| x / scale).collect();
            let dom = geodesic_curvature(&ball, t, &p)?;
            rep.max_norm_theta = rep.max_norm_theta.max(linalg::spectral_norm(&norm_theta));
            rep.max_domain_theta = rep.max_domain_theta.max(dom.spectral_norm());
            let bridge = &norm_theta - dom.theta * C::new(q, 0.0);
            rep.bridge_defect = rep.bridge_defect.max(linalg::max_abs(&bridge));
        }
    }
    rep.semmes_flat = rep.max_semmes < tol;
    rep.norm_flat = rep.max_norm_theta < tol;
    rep.domain_flat = rep.max_domain_theta < tol;
    rep.equivalent = rep.semmes_flat == rep.norm_flat && rep.norm_flat == rep.domain_flat;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn fam(rows: &[&[&str]]) -> HermitianNormFamily {
        let h: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect();
        HermitianNormFamily::parse(&h, 1).unwrap()
    }

    #[test]
    fn scalar_gaussian_norm() {
        let f = fam(&[&["exp(abs2(t1))"]]);
        let th = f.norm_theta(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(th[(0, 0)].re, 1.0, epsilon = 1e-14);
        let s = f.semmes_matrix(&[c(0.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(s.get(0, 0, 0, 0).re, 1.0, epsilon = 1e-14);
        let t = [c(0.4, -0.3)];
        let th = f.norm_theta(&t, &[c(0.5, 0.5)]).unwrap();
        assert_abs_diff_eq!(th[(0, 0)].re, 0.25f64.exp() * 0.5, epsilon = 1e-13);
    }

    #[test]
    fn pluriharmonic_and_constant_norms_are_flat() {
        let f = fam(&[&["exp(t1 + conj(t1))"]]);
        for t in [c(0.0, 0.0), c(0.3, 0.2)] {
            assert!(f.semmes_matrix(&[t]).unwrap().max_abs() < 1e-14);
            assert!(f.norm_theta(&[t], &[c(0.7, -0.1)]).unwrap()[(0, 0)].norm() < 1e-14);
        }
        let id = fam(&[&["1", "0"], &["0", "1"]]);
        assert_eq!(id.semmes_matrix(&[c(0.2, 0.0)]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn flat_direction_of_a_diagonal_norm() {
        let f = fam(&[&["exp(abs2(t1))", "0"], &["0", "1"]]);
        let th = f.norm_theta(&[c(0.3, 0.1)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(th[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn tensor_is_hermitian_for_a_coupled_norm() {
        let f = fam(&[
            &["exp(abs2(t1))", "0.3*t1"],
            &["0.3*conj(t1)", "1 + abs2(t1)"],
        ]);
        let s = f.semmes_matrix(&[c(0.2, -0.4)]).unwrap();
        assert!(s.hermitian_defect() < 1e-12);
    }

    #[test]
    fn equivalence_on_fixtures() {
        let grid = vec![vec![c(0.0, 0.0)], vec![c(0.3, 0.1)], vec![c(-0.2, 0.4)]];
        let zs = vec![vec![c(1.0, 0.0)], vec![c(0.3, -0.6)]];
        let flat = prop32_equivalence(&fam(&[&["exp(t1 + conj(t1))"]]), &grid, &zs, 1e-8).unwrap();
        assert!(flat.semmes_flat && flat.norm_flat && flat.domain_flat);
        let curved = prop32_equivalence(&fam(&[&["exp(abs2(t1))"]]), &grid, &zs, 1e-8).unwrap();
        assert!(curved.equivalent && !curved.semmes_flat);
        assert!(curved.bridge_defect < 1e-8);
        assert_abs_diff_eq!(curved.max_domain_theta, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_non_hermitian_or_large() {
        let bad: Vec<Vec<String>> = vec![
            vec!["1".into(), "t1".into()],
            vec!["t1".into(), "1".into()],
        ];
        assert!(HermitianNormFamily::parse(&bad, 1).is_err());
        let big: Vec<Vec<String>> = (0..5)
            .map(|i| (0..5).map(|k| if i == k { "1".into() } else { "0".into() }).collect())
            .collect();
        assert!(HermitianNormFamily::parse(&big, 1).is_err());
    }
}
