//! Families of domains `D_t = {ρ(t, ·) < 0}` over a base in ℂ^m, their
//! Wirtinger jets and Levi data, boundary search along rays, planar
//! quadrature, and the fibre-integral derivative check.
//!
//! Points of the total space are addressed by a combined index `A`: the
//! first `m` slots are base coordinates `t^j`, the next `n` are fibre
//! coordinates `μ^λ`.

mod fibre_deriv;
mod quadrature;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::exprs::{parse, Expr, Var, VarAssignment};
use crate::linalg::{self, CMat};

pub use fibre_deriv::{fibre_integral_derivative_check, FibreDerivCheck, FibreShape};
pub use quadrature::{build_quadrature, BoundaryNode, InteriorNode, QuadratureRule};

type C = Complex64;

/// Value, first Wirtinger derivatives and mixed (1,1) Hessian blocks of a
/// real function at one point of the total space.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet11 {
    pub value: f64,
    /// ρ_j
    pub dt: Vec<C>,
    /// ρ_λ
    pub dmu: Vec<C>,
    /// ρ_{jk̄}
    pub dt_dtbar: CMat,
    /// ρ_{jν̄}
    pub dt_dmubar: CMat,
    /// ρ_{λν̄}
    pub dmu_dmubar: CMat,
}

impl Jet11 {
    /// Splits a combined gradient and Hessian `H[A][B] = ∂²/∂x^A∂x̄^B`.
    pub fn from_full(value: f64, grad: &[C], hess: &CMat, m: usize) -> Jet11 {
        let d = grad.len();
        let n = d - m;
        Jet11 {
            value,
            dt: grad[..m].to_vec(),
            dmu: grad[m..].to_vec(),
            dt_dtbar: hess.view((0, 0), (m, m)).into_owned(),
            dt_dmubar: hess.view((0, m), (m, n)).into_owned(),
            dmu_dmubar: hess.view((m, m), (n, n)).into_owned(),
        }
    }

    pub fn m(&self) -> usize {
        self.dt.len()
    }

    pub fn n(&self) -> usize {
        self.dmu.len()
    }

    pub fn full_gradient(&self) -> Vec<C> {
        self.dt.iter().chain(&self.dmu).copied().collect()
    }

    /// The combined Hessian over `(t, μ)`. The `μ t̄` block is the adjoint of
    /// the `t μ̄` block, as it is for any real function.
    pub fn full_hessian(&self) -> CMat {
        let (m, n) = (self.m(), self.n());
        let mut h = CMat::zeros(m + n, m + n);
        h.view_mut((0, 0), (m, m)).copy_from(&self.dt_dtbar);
        h.view_mut((0, m), (m, n)).copy_from(&self.dt_dmubar);
        h.view_mut((m, 0), (n, m)).copy_from(&self.dt_dmubar.adjoint());
        h.view_mut((m, m), (n, n)).copy_from(&self.dmu_dmubar);
        h
    }

    /// Largest entry-wise difference across all parts of two jets.
    pub fn max_diff(&self, other: &Jet11) -> f64 {
        let vec_diff = |a: &[C], b: &[C]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max)
        };
        [
            (self.value - other.value).abs(),
            vec_diff(&self.dt, &other.dt),
            vec_diff(&self.dmu, &other.dmu),
            linalg::max_abs(&(&self.dt_dtbar - &other.dt_dtbar)),
            linalg::max_abs(&(&self.dt_dmubar - &other.dt_dmubar)),
            linalg::max_abs(&(&self.dmu_dmubar - &other.dmu_dmubar)),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// A real defining function on an open set of ℂ^m × ℂ^n, possibly with a
/// weight. Implemented symbolically by [`DomainFamily`] and numerically by
/// implicit families such as holomorphic motions.
pub trait DefiningFunction: Sync {
    fn dims(&self) -> (usize, usize);

    fn value(&self, t: &[C], mu: &[C]) -> Result<f64>;

    fn jet(&self, t: &[C], mu: &[C]) -> Result<Jet11>;

    /// ρ_λ at the point.
    fn fibre_gradient(&self, t: &[C], mu: &[C]) -> Result<Vec<C>> {
        Ok(self.jet(t, mu)?.dmu)
    }

    /// The weight φ; zero unless the family carries one.
    fn weight(&self, _t: &[C], _mu: &[C]) -> Result<f64> {
        Ok(0.0)
    }
}

/// ρ and φ as expressions, with every derivative the jets need built
/// symbolically once at construction.
#[derive(Debug, Clone)]
pub struct DomainFamily {
    pub rho: Expr,
    pub phi: Expr,
    pub m: usize,
    pub n: usize,
    rho_d: Vec<Expr>,
    rho_h: Vec<Vec<Expr>>,
    phi_d: Vec<Expr>,
    phi_h: Vec<Vec<Expr>>,
}

fn combined_var(a: usize, m: usize) -> Var {
    if a < m {
        Var::Base(a)
    } else {
        Var::Fibre(a - m)
    }
}

const REAL_SAMPLES: usize = 16;

impl DomainFamily {
    pub fn new(rho: Expr, phi: Expr, m: usize, n: usize) -> Result<DomainFamily> {
        if n == 0 {
            return Err(Error::Config("fibre dimension must be at least 1".into()));
        }
        rho.check_signature(m, n)?;
        phi.check_signature(m, n)?;
        check_real(&rho, m, n)?;
        check_real(&phi, m, n)?;
        let (rho_d, rho_h) = derivative_exprs(&rho, m + n, m);
        let (phi_d, phi_h) = derivative_exprs(&phi, m + n, m);
        Ok(DomainFamily {
            rho,
            phi,
            m,
            n,
            rho_d,
            rho_h,
            phi_d,
            phi_h,
        })
    }

    /// Parses ρ and φ; an empty weight means φ = 0.
    pub fn parse(rho: &str, phi: &str, m: usize, n: usize) -> Result<DomainFamily> {
        let phi = if phi.trim().is_empty() {
            Expr::num(0.0)
        } else {
            parse(phi)?
        };
        DomainFamily::new(parse(rho)?, phi, m, n)
    }

    /// True when ρ does not involve any base variable.
    pub fn is_product(&self) -> bool {
        (0..self.m).all(|j| !self.rho.depends_on(Var::Base(j)))
    }

    pub fn weight_jet(&self, t: &[C], mu: &[C]) -> Result<Jet11> {
        eval_jet(&self.phi, &self.phi_d, &self.phi_h, self.m, t, mu)
    }

    /// φ_j at the point.
    pub fn weight_dt(&self, t: &[C], mu: &[C]) -> Result<Vec<C>> {
        let a = VarAssignment::new(t, mu);
        self.phi_d[..self.m].iter().map(|e| e.eval(&a)).collect()
    }
}

impl DefiningFunction for DomainFamily {
    fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn value(&self, t: &[C], mu: &[C]) -> Result<f64> {
        Ok(self.rho.eval_at(t, mu)?.re)
    }

    fn jet(&self, t: &[C], mu: &[C]) -> Result<Jet11> {
        eval_jet(&self.rho, &self.rho_d, &self.rho_h, self.m, t, mu)
    }

    fn fibre_gradient(&self, t: &[C], mu: &[C]) -> Result<Vec<C>> {
        let a = VarAssignment::new(t, mu);
        self.rho_d[self.m..].iter().map(|e| e.eval(&a)).collect()
    }

    fn weight(&self, t: &[C], mu: &[C]) -> Result<f64> {
        Ok(self.phi.eval_at(t, mu)?.re)
    }
}

fn derivative_exprs(e: &Expr, d: usize, m: usize) -> (Vec<Expr>, Vec<Vec<Expr>>) {
    let grad: Vec<Expr> = (0..d)
        .map(|a| e.wirtinger(combined_var(a, m), false))
        .collect();
    let hess = grad
        .iter()
        .map(|ga| {
            (0..d)
                .map(|b| ga.wirtinger(combined_var(b, m), true))
                .collect()
        })
        .collect();
    (grad, hess)
}

fn eval_jet(
    e: &Expr,
    grad: &[Expr],
    hess: &[Vec<Expr>],
    m: usize,
    t: &[C],
    mu: &[C],
) -> Result<Jet11> {
    let a = VarAssignment::new(t, mu);
    let value = e.eval(&a)?.re;
    let g: Vec<C> = grad.iter().map(|x| x.eval(&a)).collect::<Result<_>>()?;
    let d = g.len();
    let mut h = CMat::zeros(d, d);
    for (i, row) in hess.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            h[(i, j)] = x.eval(&a)?;
        }
    }
    Ok(Jet11::from_full(value, &g, &h, m))
}

/// Fails when `e` has a non-negligible imaginary part at a deterministic set
/// of sample points. Points where evaluation fails are skipped.
fn check_real(e: &Expr, m: usize, n: usize) -> Result<()> {
    for (k, p) in sample_points(0x5eed_0001, REAL_SAMPLES, m + n, 0.5).iter().enumerate() {
        let Ok(v) = e.eval_at(&p[..m], &p[m..]) else {
            continue;
        };
        if v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
            return Err(Error::NotReal {
                imag: v.im,
                sample: k,
            });
        }
    }
    Ok(())
}

/// Deterministic pseudo-random points, uniform in the polydisc of the given
/// radius.
pub fn sample_points(seed: u64, count: usize, dim: usize, radius: f64) -> Vec<Vec<C>> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let r = radius * rng.gen::<f64>().sqrt();
                    C::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
                })
                .collect()
        })
        .collect()
}

/// Finite-difference jet of `f` with Richardson-extrapolated central
/// differences in the real coordinates, steps `h` and `h/2`.
pub fn fd_jet<F>(f: F, m: usize, t: &[C], mu: &[C], h: f64) -> Result<Jet11>
where
    F: Fn(&[C], &[C]) -> Result<f64>,
{
    let x0: Vec<C> = t.iter().chain(mu).copied().collect();
    let d = x0.len();
    let eval = |shift: &[(usize, f64)]| -> Result<f64> {
        let mut x = x0.clone();
        for &(r, step) in shift {
            let delta = if r % 2 == 0 {
                C::new(step, 0.0)
            } else {
                C::new(0.0, step)
            };
            x[r / 2] += delta;
        }
        f(&x[..m], &x[m..])
    };
    let value = eval(&[])?;

    let richardson = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;
    let first = |r: usize, s: f64| -> Result<f64> {
        Ok((eval(&[(r, s)])? - eval(&[(r, -s)])?) / (2.0 * s))
    };
    let second = |u: usize, v: usize, s: f64| -> Result<f64> {
        if u == v {
            Ok((eval(&[(u, s)])? - 2.0 * value + eval(&[(u, -s)])?) / (s * s))
        } else {
            let pp = eval(&[(u, s), (v, s)])?;
            let pm = eval(&[(u, s), (v, -s)])?;
            let mp = eval(&[(u, -s), (v, s)])?;
            let mm = eval(&[(u, -s), (v, -s)])?;
            Ok((pp - pm - mp + mm) / (4.0 * s * s))
        }
    };

    let nr = 2 * d;
    let mut g1 = vec![0.0; nr];
    for (r, slot) in g1.iter_mut().enumerate() {
        *slot = richardson(first(r, h)?, first(r, 0.5 * h)?);
    }
    let mut hr = vec![vec![0.0; nr]; nr];
    for u in 0..nr {
        for v in u..nr {
            let val = richardson(second(u, v, h)?, second(u, v, 0.5 * h)?);
            hr[u][v] = val;
            hr[v][u] = val;
        }
    }

    let grad: Vec<C> = (0..d)
        .map(|a| C::new(0.5 * g1[2 * a], -0.5 * g1[2 * a + 1]))
        .collect();
    // ∂_A ∂̄_B = ¼[(∂x_A∂x_B + ∂y_A∂y_B) + i(∂x_A∂y_B − ∂y_A∂x_B)]
    let mut hess = CMat::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
            hess[(a, b)] = C::new(
                0.25 * (hr[xa][xb] + hr[ya][yb]),
                0.25 * (hr[xa][yb] - hr[ya][xb]),
            );
        }
    }
    Ok(Jet11::from_full(value, &grad, &hess, m))
}

/// Fibre data at one point: the Levi form, its inverse, the raised gradient
/// and two gradient norms.
#[derive(Debug, Clone)]
pub struct FibreFrame {
    /// ρ_{λν̄}
    pub levi: CMat,
    /// `levi_inv[(α, β)]` is ρ^{ᾱβ}.
    pub levi_inv: CMat,
    /// ρ^β = Σ_α ρ_ᾱ ρ^{ᾱβ}
    pub rho_up: Vec<C>,
    /// Σ |ρ_α|², the Euclidean fibre gradient.
    pub grad_sq: f64,
    /// Σ ρ^α ρ_α, the fibre gradient measured by the inverse Levi form.
    pub grad_sq_levi: f64,
}

impl FibreFrame {
    /// Fails with an A2 violation when the Levi form is not positive definite.
    pub fn new(jet: &Jet11) -> Result<FibreFrame> {
        let levi = jet.dmu_dmubar.clone();
        let levi_inv = linalg::cholesky(&levi, "fibre Levi form")?.inverse();
        let n = jet.n();
        let rho_up: Vec<C> = (0..n)
            .map(|b| (0..n).map(|a| jet.dmu[a].conj() * levi_inv[(a, b)]).sum())
            .collect();
        let grad_sq = jet.dmu.iter().map(|z| z.norm_sqr()).sum();
        let grad_sq_levi = rho_up.iter().zip(&jet.dmu).map(|(u, d)| u * d).sum::<C>().re;
        Ok(FibreFrame {
            levi,
            levi_inv,
            rho_up,
            grad_sq,
            grad_sq_levi,
        })
    }
}

/// Outcome of a sign-change search along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub radius: f64,
    /// Radii with ρ < 0 and ρ ≥ 0 that enclose `radius`.
    pub bracket: (f64, f64),
    pub residual: f64,
}

const RAY_START: f64 = 1.0 / 16.0;
const RAY_MAX: f64 = 64.0;
const RAY_TOL: f64 = 1e-12;

/// First sign change of `g` on (0, 64]: doubling from 1/16 brackets it, then
/// regula falsi with the Illinois modification refines the root until
/// `|g| < 1e-12` or the bracket collapses.
pub fn ray_root<G: Fn(f64) -> Result<f64>>(g: G) -> Result<RayHit> {
    let g0 = g(0.0)?;
    if !(g0 < 0.0) {
        return Err(Error::Precondition(format!(
            "ray origin is not inside the domain (ρ = {g0:e})"
        )));
    }
    let (mut lo, mut flo) = (0.0, g0);
    let mut hi = RAY_START;
    let mut fhi = g(hi)?;
    while fhi < 0.0 {
        if hi >= RAY_MAX {
            return Err(Error::NoSignChange { radius: RAY_MAX });
        }
        (lo, flo) = (hi, fhi);
        hi *= 2.0;
        fhi = g(hi)?;
    }
    let bracket = (lo, hi);
    if fhi.abs() < RAY_TOL {
        return Ok(RayHit {
            radius: hi,
            bracket,
            residual: fhi.abs(),
        });
    }
    let mut side = 0i8;
    let (mut best, mut fbest) = (hi, fhi);
    for _ in 0..400 {
        let mut x = (lo * fhi - hi * flo) / (fhi - flo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = g(x)?;
        if fx.abs() < fbest.abs() {
            (best, fbest) = (x, fx);
        }
        if fx.abs() < RAY_TOL || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if fx < 0.0 {
            (lo, flo) = (x, fx);
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            (hi, fhi) = (x, fx);
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(RayHit {
        radius: best,
        bracket,
        residual: fbest.abs(),
    })
}

fn unit(direction: &[C]) -> Result<Vec<C>> {
    let norm = direction.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::Config("ray direction must be nonzero".into()));
    }
    Ok(direction.iter().map(|z| z / norm).collect())
}

/// Boundary point of the fibre over `t` on the ray from `center` along
/// `direction`, with the search data.
pub fn locate_on_ray(
    fam: &dyn DefiningFunction,
    t: &[C],
    center: &[C],
    direction: &[C],
) -> Result<(Vec<C>, RayHit)> {
    let dir = unit(direction)?;
    let at = |r: f64| -> Vec<C> { center.iter().zip(&dir).map(|(c, d)| c + d * r).collect() };
    let hit = ray_root(|r| fam.value(t, &at(r)))?;
    Ok((at(hit.radius), hit))
}

/// Boundary point of `D_t` on the ray from the origin along `direction`.
pub fn boundary_locate(fam: &dyn DefiningFunction, t: &[C], direction: &[C]) -> Result<Vec<C>> {
    let n = fam.dims().1;
    locate_on_ray(fam, t, &vec![C::new(0.0, 0.0); n], direction).map(|(p, _)| p)
}

/// `count` boundary points of `D_t`. For n = 1 the rays are equally spaced in
/// angle; otherwise the directions are deterministic pseudo-random.
pub fn boundary_samples(fam: &dyn DefiningFunction, t: &[C], count: usize) -> Result<Vec<Vec<C>>> {
    let n = fam.dims().1;
    let dirs: Vec<Vec<C>> = if n == 1 {
        (0..count)
            .map(|k| vec![C::from_polar(1.0, std::f64::consts::TAU * k as f64 / count as f64)])
            .collect()
    } else {
        sample_points(0x5eed_0002, count, n, 1.0)
    };
    dirs.iter().map(|d| boundary_locate(fam, t, d)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct A2Report {
    pub min_levi_eig: f64,
    /// Smallest Euclidean fibre gradient |∂ρ|² over boundary samples.
    pub min_boundary_grad_sq: f64,
    pub passed: bool,
    pub failure: Option<String>,
}

/// Checks strict plurisubharmonicity of ρ on the fibre at every sample and a
/// nonvanishing fibre gradient (|∂ρ|² > eps²) at the boundary samples.
pub fn a2_check(
    fam: &dyn DefiningFunction,
    t: &[C],
    interior: &[Vec<C>],
    boundary: &[Vec<C>],
    eps: f64,
) -> Result<A2Report> {
    let mut report = A2Report {
        min_levi_eig: f64::INFINITY,
        min_boundary_grad_sq: f64::INFINITY,
        passed: true,
        failure: None,
    };
    fn fail(report: &mut A2Report, msg: String) {
        if report.failure.is_none() {
            report.failure = Some(msg);
        }
        report.passed = false;
    }
    for (k, p) in interior.iter().chain(boundary).enumerate() {
        let jet = fam.jet(t, p)?;
        let ev = linalg::hermitian_min_eig(&jet.dmu_dmubar);
        report.min_levi_eig = report.min_levi_eig.min(ev);
        if !(ev > 0.0) {
            fail(&mut report, format!("Levi eigenvalue {ev:e} at sample {k} ({p:?})"));
        }
        if k >= interior.len() {
            let g: f64 = jet.dmu.iter().map(|z| z.norm_sqr()).sum();
            report.min_boundary_grad_sq = report.min_boundary_grad_sq.min(g);
            if !(g > eps * eps) {
                fail(&mut report, format!("|∂ρ|² = {g:e} at boundary sample {p:?}"));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn fam(rho: &str, m: usize) -> DomainFamily {
        DomainFamily::parse(rho, "", m, 1).unwrap()
    }

    #[test]
    fn unit_disk_jet() {
        let f = fam("abs2(z1) - 1", 0);
        let j = f.jet(&[], &[c(0.5, 0.0)]).unwrap();
        assert_abs_diff_eq!(j.value, -0.75, epsilon = 1e-15);
        assert_abs_diff_eq!((j.dmu[0] - c(0.5, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((j.dmu_dmubar[(0, 0)] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn shrinking_disk_jet_at_origin_of_base() {
        let f = fam("abs2(z1)*exp(abs2(t1)) - 1", 1);
        let j = f.jet(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert!(j.dt[0].norm() < 1e-15);
        assert_abs_diff_eq!(j.dt_dtbar[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j.dmu_dmubar[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert!(j.dt_dmubar[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn radius_family_jet() {
        let f = fam("abs2(z1) - exp(t1 + conj(t1))", 1);
        let j = f.jet(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!((j.dt[0] - c(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert!(j.dt_dmubar[(0, 0)].norm() < 1e-15);
        assert_abs_diff_eq!(j.dt_dtbar[(0, 0)].re, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn symbolic_jet_matches_fd_oracle() {
        let f = DomainFamily::parse(
            "abs2(z1)*exp(abs2(t1)) + re(t1*conj(z1)^2) + abs2(z2) - 1",
            "",
            1,
            2,
        )
        .unwrap();
        for p in sample_points(7, 10, 3, 0.7) {
            let sym = f.jet(&p[..1], &p[1..]).unwrap();
            let fd = fd_jet(|t, mu| f.value(t, mu), 1, &p[..1], &p[1..], 1e-3).unwrap();
            assert!(sym.max_diff(&fd) < 1e-6, "{}", sym.max_diff(&fd));
            assert!(linalg::hermitian_defect(&sym.dt_dtbar) < 1e-10);
            assert!(linalg::hermitian_defect(&sym.dmu_dmubar) < 1e-10);
        }
    }

    #[test]
    fn rejects_complex_rho_and_undeclared_variables() {
        assert!(matches!(
            DomainFamily::parse("z1", "", 0, 1),
            Err(Error::NotReal { .. })
        ));
        assert!(matches!(
            DomainFamily::parse("abs2(z2) - 1", "", 0, 1),
            Err(Error::UndeclaredVariable(_))
        ));
    }

    #[test]
    fn boundary_locate_examples() {
        let disk = fam("abs2(z1) - 1", 0);
        let p = boundary_locate(&disk, &[], &[c(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!((p[0] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);

        let shrink = fam("abs2(z1)*exp(abs2(t1)) - 1", 1);
        let p = boundary_locate(&shrink, &[c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(p[0].re, (-0.5f64).exp(), epsilon = 1e-12);

        let grow = fam("abs2(z1) - 1 - abs2(t1)", 1);
        let (p, hit) =
            locate_on_ray(&grow, &[c(0.5, 0.0)], &[c(0.0, 0.0)], &[c(0.0, 1.0)]).unwrap();
        assert_abs_diff_eq!(p[0].im, 1.25f64.sqrt(), epsilon = 1e-12);
        assert!(hit.residual < 1e-12);
        assert!(hit.bracket.0 <= hit.radius && hit.radius <= hit.bracket.1);
    }

    #[test]
    fn boundary_locate_errors() {
        let half = fam("re(z1)", 0);
        assert!(matches!(
            boundary_locate(&half, &[], &[c(-1.0, 0.0)]),
            Err(Error::Precondition(_))
        ));
        let strip = fam("abs2(re(z1)) - 1", 0);
        assert!(matches!(
            boundary_locate(&strip, &[], &[c(0.0, 1.0)]),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn a2_examples() {
        let disk = fam("abs2(z1) - 1", 0);
        let bdy = boundary_samples(&disk, &[], 8).unwrap();
        let r = a2_check(&disk, &[], &[vec![c(0.2, 0.1)]], &bdy, 1e-6).unwrap();
        assert!(r.passed);
        assert_abs_diff_eq!(r.min_levi_eig, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.min_boundary_grad_sq, 1.0, epsilon = 1e-10);

        let flat = fam("re(z1) + im(z1)*0", 0);
        let r = a2_check(&flat, &[], &[vec![c(-0.5, 0.0)]], &[], 1e-6).unwrap();
        assert!(!r.passed);
        assert!(r.failure.is_some());

        let grow = fam("abs2(z1) - 1 - abs2(t1)", 1);
        let t = [c(0.5, 0.0)];
        let bdy = boundary_samples(&grow, &t, 8).unwrap();
        let r = a2_check(&grow, &t, &[], &bdy, 1e-6).unwrap();
        assert!(r.passed);
        assert_abs_diff_eq!(r.min_boundary_grad_sq, 1.25, epsilon = 1e-10);
    }

    #[test]
    fn fibre_frame_inverse() {
        let f = DomainFamily::parse("abs2(z1) + 2*abs2(z2) + re(z1*conj(z2)) - 1", "", 0, 2)
            .unwrap();
        let j = f.jet(&[], &[c(0.3, 0.1), c(-0.2, 0.4)]).unwrap();
        let fr = FibreFrame::new(&j).unwrap();
        let id = &fr.levi * &fr.levi_inv;
        assert!(linalg::max_abs(&(id - CMat::identity(2, 2))) < 1e-10);
        assert!(fr.grad_sq >= 0.0 && fr.grad_sq_levi >= 0.0);
    }
}
