//! Horizontal lifts `V_j = ∂/∂t^j − Σ v_j^λ ∂/∂μ^λ` and the geodesic
//! curvature θ_{jk̄}(ρ) of a family of boundaries.
//!
//! Three lifts are computed from a [`Jet11`]:
//!
//! * [`lift_log_from_jet`] is horizontal for i∂∂̄ψ with ψ = −log(−ρ), by a
//!   direct linear solve with the ψ fibre Hessian (interior points only).
//! * [`lift_log_boundary_from_jet`] is the same lift written through the
//!   Levi form of ρ, which extends smoothly to ρ = 0.
//! * [`lift_levi_from_jet`] is horizontal for the Levi form alone.
//!
//! A fourth construction, [`lift_adapted_from_jet`], changes fibre
//! coordinates linearly so that the Levi form is the identity and only the
//! first coordinate sees ∂ρ; at a boundary point the lift is then read off
//! componentwise. It shares no algebra with the others and serves as a
//! cross-check for n ≥ 2.
//!
//! Writing `L` for the Levi form, `a = (ρ_λ)`, `s_j = (ρ_{jν̄})_ν` and
//! `g = a* L⁻¹ a`, the boundary-regular lift is
//!
//! ```text
//! v_j = s_j L⁻¹ + (s_j L⁻¹ a)(a* L⁻¹)/(ρ − g) − ρ_j (a* L⁻¹)/(ρ − g)
//! ```
//!
//! which follows from the ψ Hessian by a rank-one inverse update and holds
//! wherever ρ ≠ g, not only on the boundary.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{boundary_samples, DefiningFunction, FibreFrame, Jet11};
use crate::linalg::{self, CMat, CVec};

type C = Complex64;

/// |ρ| below which a point counts as a boundary point.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Smallest admissible |ρ − g|.
pub const DENOMINATOR_TOL: f64 = 1e-10;
/// Required agreement between the two curvature routes, relative to max(1, |θ|).
pub const ROUTE_TOL: f64 = 1e-8;

/// `v[(j, λ)] = v_j^λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftCoefficients {
    pub v: CMat,
}

impl LiftCoefficients {
    /// Components of V_j over the combined `(t, μ)` coordinates.
    pub fn vector(&self, j: usize) -> Vec<C> {
        let (m, n) = self.v.shape();
        let mut x = vec![C::new(0.0, 0.0); m + n];
        x[j] = C::new(1.0, 0.0);
        for l in 0..n {
            x[m + l] = -self.v[(j, l)];
        }
        x
    }

    /// V_j(ρ) = ρ_j − Σ v_j^λ ρ_λ.
    pub fn apply(&self, jet: &Jet11, j: usize) -> C {
        jet.dt[j]
            - (0..jet.n())
                .map(|l| self.v[(j, l)] * jet.dmu[l])
                .sum::<C>()
    }

    /// max_j |V_j(ρ)|.
    pub fn max_tangency(&self, jet: &Jet11) -> f64 {
        (0..jet.m())
            .map(|j| self.apply(jet, j).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &LiftCoefficients) -> f64 {
        linalg::max_abs(&(&self.v - &other.v))
    }
}

/// ⟨X, Y⟩ = Σ H[A][B] X^A conj(Y^B).
pub fn pairing(hess: &CMat, x: &[C], y: &[C]) -> C {
    let mut s = C::new(0.0, 0.0);
    for (a, xa) in x.iter().enumerate() {
        for (b, yb) in y.iter().enumerate() {
            s += hess[(a, b)] * xa * yb.conj();
        }
    }
    s
}

/// Gram matrix of the lifts V_1..V_m under `hess`.
pub fn gram_of_lifts(hess: &CMat, lift: &LiftCoefficients) -> CMat {
    let m = lift.v.nrows();
    let vs: Vec<Vec<C>> = (0..m).map(|j| lift.vector(j)).collect();
    CMat::from_fn(m, m, |j, k| pairing(hess, &vs[j], &vs[k]))
}

fn row(m: &CMat, j: usize) -> CVec {
    CVec::from_iterator(m.ncols(), m.row(j).iter().copied())
}

/// Lift for i∂∂̄(−log(−ρ)) at an interior point, from the transposed system
/// Ψᵀ v_j = r_j with Ψ_{λν̄} = ρ_{λν̄}/(−ρ) + ρ_λ ρ_ν̄/ρ² and
/// r_{jν̄} = ρ_{jν̄}/(−ρ) + ρ_j ρ_ν̄/ρ².
pub fn lift_log_from_jet(jet: &Jet11) -> Result<LiftCoefficients> {
    let rho = jet.value;
    if !(rho < 0.0) {
        return Err(Error::Precondition(format!(
            "logarithmic lift needs an interior point, ρ = {rho:e}"
        )));
    }
    let (m, n) = (jet.m(), jet.n());
    let r2 = rho * rho;
    let psi_t = CMat::from_fn(n, n, |nu, l| {
        jet.dmu_dmubar[(l, nu)] / (-rho) + jet.dmu[l] * jet.dmu[nu].conj() / r2
    });
    let mut v = CMat::zeros(m, n);
    for j in 0..m {
        let r = CVec::from_fn(n, |nu, _| {
            jet.dt_dmubar[(j, nu)] / (-rho) + jet.dt[j] * jet.dmu[nu].conj() / r2
        });
        let x = linalg::solve(&psi_t, &r, "fibre Hessian of −log(−ρ)")?;
        v.set_row(j, &x.transpose());
    }
    Ok(LiftCoefficients { v })
}

/// Boundary-regular form of the logarithmic lift; see the module docs.
pub fn lift_log_boundary_from_jet(jet: &Jet11) -> Result<LiftCoefficients> {
    let frame = FibreFrame::new(jet)?;
    if !(frame.grad_sq > 0.0) {
        return Err(Error::A2Violation("fibre gradient vanishes".into()));
    }
    let denom = jet.value - frame.grad_sq_levi;
    if denom.abs() < DENOMINATOR_TOL {
        return Err(Error::Precondition(format!(
            "ρ − |∂ρ|² = {denom:e} is too close to zero"
        )));
    }
    let (m, n) = (jet.m(), jet.n());
    let a = CVec::from_column_slice(&jet.dmu);
    // (L⁻¹ a)_α is the conjugate of ρ^α.
    let linv_a = &frame.levi_inv * &a;
    let up = &frame.rho_up;
    let mut v = CMat::zeros(m, n);
    for j in 0..m {
        let s = row(&jet.dt_dmubar, j);
        let s_linv = frame.levi_inv.transpose() * &s;
        let s_linv_a: C = s.iter().zip(linv_a.iter()).map(|(x, y)| x * y).sum();
        let coef = (s_linv_a - jet.dt[j]) / denom;
        for b in 0..n {
            v[(j, b)] = s_linv[b] + coef * up[b];
        }
    }
    Ok(LiftCoefficients { v })
}

/// Lift for the Levi form: v_j^β = Σ_α ρ_{jᾱ} ρ^{ᾱβ}.
pub fn lift_levi_from_jet(jet: &Jet11) -> Result<LiftCoefficients> {
    let frame = FibreFrame::new(jet)?;
    let v = &jet.dt_dmubar * &frame.levi_inv;
    Ok(LiftCoefficients { v })
}

/// Boundary lift in adapted fibre coordinates μ = A μ'. With L = R R*
/// (Cholesky) and a unitary U whose first column is R⁻¹a/|R⁻¹a|, the choice
/// A = conj(R^{-*} U) makes the Levi form the identity and ∂ρ = (ρ'_1, 0, …).
/// Tangency then forces v'^1 = ρ_j/ρ'_1, horizontality forces
/// v'^κ = ρ'_{jκ̄} for κ ≥ 2, and v = A v'.
pub fn lift_adapted_from_jet(jet: &Jet11) -> Result<LiftCoefficients> {
    if jet.value.abs() > BOUNDARY_TOL {
        return Err(Error::Precondition(format!(
            "adapted lift needs a boundary point, ρ = {:e}",
            jet.value
        )));
    }
    let (m, n) = (jet.m(), jet.n());
    let chol = linalg::cholesky(&jet.dmu_dmubar, "fibre Levi form")?;
    let a = CVec::from_column_slice(&jet.dmu);
    let b = chol.forward(&a);
    let bn = b.norm();
    if !(bn > 0.0) {
        return Err(Error::A2Violation("fibre gradient vanishes".into()));
    }
    let u1 = &b / C::new(bn, 0.0);
    let conj_u1: Vec<C> = u1.iter().map(|z| z.conj()).collect();
    let rest = linalg::annihilator_basis(&conj_u1);
    let mut u = CMat::zeros(n, n);
    u.set_column(0, &u1);
    for k in 0..rest.ncols() {
        u.set_column(k + 1, &rest.column(k));
    }
    // C = R^{-*} U, column by column.
    let mut cm = CMat::zeros(n, n);
    for k in 0..n {
        cm.set_column(k, &chol.backward(&u.column(k).into_owned()));
    }
    let am = cm.map(|z| z.conj());
    let rho1 = (am.transpose() * &a)[0];
    let mut v = CMat::zeros(m, n);
    for j in 0..m {
        let s = row(&jet.dt_dmubar, j);
        let s_prime = cm.transpose() * &s;
        let mut vp = s_prime.clone();
        vp[0] = jet.dt[j] / rho1;
        let vj = &am * vp;
        v.set_row(j, &vj.transpose());
    }
    Ok(LiftCoefficients { v })
}

pub fn lift_log(fam: &dyn DefiningFunction, t: &[C], mu: &[C]) -> Result<LiftCoefficients> {
    lift_log_from_jet(&fam.jet(t, mu)?)
}

pub fn lift_log_boundary(
    fam: &dyn DefiningFunction,
    t: &[C],
    mu: &[C],
) -> Result<LiftCoefficients> {
    let jet = fam.jet(t, mu)?;
    require_boundary(&jet)?;
    lift_log_boundary_from_jet(&jet)
}

pub fn lift_levi(fam: &dyn DefiningFunction, t: &[C], mu: &[C]) -> Result<LiftCoefficients> {
    lift_levi_from_jet(&fam.jet(t, mu)?)
}

fn require_boundary(jet: &Jet11) -> Result<()> {
    if jet.value.abs() > BOUNDARY_TOL {
        return Err(Error::Precondition(format!(
            "point is not on the boundary, ρ = {:e}",
            jet.value
        )));
    }
    Ok(())
}

/// θ_{jk̄}(ρ) at a boundary point, by two routes.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicCurvature {
    /// c + correction.
    pub theta: CMat,
    /// ⟨V̂_j, V̂_k⟩ for the Levi lift.
    pub c_levi: CMat,
    /// g V̂_j(ρ) conj(V̂_k(ρ)) / (ρ − g)².
    pub correction: CMat,
    /// ⟨V_j, V_k⟩ for the boundary-regular logarithmic lift.
    pub theta_direct: CMat,
    pub route_diff: f64,
    /// max_j |V_j(ρ)|.
    pub tangency: f64,
    /// max_j |V̂_j(ρ)|.
    pub levi_tangency: f64,
}

impl GeodesicCurvature {
    pub fn spectral_norm(&self) -> f64 {
        linalg::spectral_norm(&self.theta)
    }

    pub fn min_eig(&self) -> f64 {
        linalg::hermitian_min_eig(&self.theta)
    }

    /// Smallest eigenvalue of θ − c; nonnegative up to rounding.
    pub fn min_eig_excess(&self) -> f64 {
        linalg::hermitian_min_eig(&(&self.theta - &self.c_levi))
    }

    /// Largest entry of θ − c − correction.
    pub fn decomposition_defect(&self) -> f64 {
        linalg::max_abs(&(&self.theta - &self.c_levi - &self.correction))
    }
}

pub fn geodesic_curvature_from_jet(jet: &Jet11) -> Result<GeodesicCurvature> {
    require_boundary(jet)?;
    let m = jet.m();
    let frame = FibreFrame::new(jet)?;
    let hess = jet.full_hessian();
    let levi = lift_levi_from_jet(jet)?;
    let log = lift_log_boundary_from_jet(jet)?;

    let g = frame.grad_sq_levi;
    let denom = jet.value - g;
    let vhat: Vec<C> = (0..m).map(|j| levi.apply(jet, j)).collect();
    let c_levi = gram_of_lifts(&hess, &levi);
    let correction = CMat::from_fn(m, m, |j, k| vhat[j] * vhat[k].conj() * (g / (denom * denom)));
    let theta = &c_levi + &correction;
    let theta_direct = gram_of_lifts(&hess, &log);

    let route_diff = linalg::max_abs(&(&theta - &theta_direct));
    let scale = linalg::max_abs(&theta).max(1.0);
    if route_diff > ROUTE_TOL * scale {
        return Err(Error::RouteMismatch {
            what: "geodesic curvature".into(),
            diff: route_diff,
            tol: ROUTE_TOL * scale,
        });
    }
    Ok(GeodesicCurvature {
        theta,
        c_levi,
        correction,
        theta_direct,
        route_diff,
        tangency: log.max_tangency(jet),
        levi_tangency: vhat.iter().map(|z| z.norm()).fold(0.0, f64::max),
    })
}

pub fn geodesic_curvature(
    fam: &dyn DefiningFunction,
    t: &[C],
    mu: &[C],
) -> Result<GeodesicCurvature> {
    geodesic_curvature_from_jet(&fam.jet(t, mu)?)
}

/// Smallest eigenvalue of the combined Hessian of ρ on the complex tangent
/// space {X : Σ ρ_A X^A = 0} of the total boundary.
pub fn total_levi_min_eig(jet: &Jet11) -> f64 {
    let grad = jet.full_gradient();
    let basis = linalg::annihilator_basis(&grad);
    if basis.ncols() == 0 {
        return f64::INFINITY;
    }
    let h = jet.full_hessian();
    let restricted = basis.transpose() * h * basis.map(|z| z.conj());
    linalg::hermitian_min_eig(&restricted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationReport {
    /// Largest spectral norm of θ over all samples.
    pub max_theta: f64,
    /// Base point and boundary point where it occurs.
    pub argmax: (Vec<C>, Vec<C>),
    pub samples: usize,
    pub is_interpolation: bool,
}

/// Decides θ ≡ 0 on `samples_per_t` boundary points over each base point.
pub fn interpolation_check(
    fam: &dyn DefiningFunction,
    t_grid: &[Vec<C>],
    samples_per_t: usize,
    tol: f64,
) -> Result<InterpolationReport> {
    let mut points = Vec::new();
    for t in t_grid {
        for p in boundary_samples(fam, t, samples_per_t)? {
            points.push((t.clone(), p));
        }
    }
    let norms: Vec<f64> = points
        .par_iter()
        .map(|(t, p)| geodesic_curvature(fam, t, p).map(|g| g.spectral_norm()))
        .collect::<Result<_>>()?;
    let mut best = 0usize;
    for (i, v) in norms.iter().enumerate() {
        if *v > norms[best] {
            best = i;
        }
    }
    let max_theta = norms.get(best).copied().unwrap_or(0.0);
    Ok(InterpolationReport {
        max_theta,
        argmax: points.get(best).cloned().unwrap_or_default(),
        samples: points.len(),
        is_interpolation: max_theta < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_locate, DomainFamily};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn fam(rho: &str) -> DomainFamily {
        DomainFamily::parse(rho, "", 1, 1).unwrap()
    }

    #[test]
    fn product_family_has_zero_lift() {
        let f = fam("abs2(z1) - 1");
        let v = lift_log(&f, &[c(0.2, 0.1)], &[c(0.3, -0.4)]).unwrap();
        assert!(linalg::max_abs(&v.v) < 1e-15);
        let b = lift_log_boundary(&f, &[c(0.2, 0.1)], &[c(0.0, 1.0)]).unwrap();
        assert!(linalg::max_abs(&b.v) < 1e-15);
        let l = lift_levi(&f, &[c(0.2, 0.1)], &[c(0.0, 1.0)]).unwrap();
        assert!(linalg::max_abs(&l.v) < 1e-15);
    }

    #[test]
    fn radius_family_lifts() {
        let f = fam("abs2(z1) - exp(t1 + conj(t1))");
        let v = lift_log(&f, &[c(0.0, 0.0)], &[c(0.5, 0.0)]).unwrap();
        assert_abs_diff_eq!((v.v[(0, 0)] - c(-0.5, 0.0)).norm(), 0.0, epsilon = 1e-14);
        let jet = f.jet(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        let b = lift_log_boundary_from_jet(&jet).unwrap();
        assert_abs_diff_eq!((b.v[(0, 0)] - c(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert!(b.apply(&jet, 0).norm() < 1e-14);
        let l = lift_levi_from_jet(&jet).unwrap();
        assert!(l.v[(0, 0)].norm() < 1e-15);
        assert_abs_diff_eq!(l.apply(&jet, 0).re, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn growing_family_lift_vanishes_at_base_origin() {
        let f = fam("abs2(z1) - 1 - abs2(t1)");
        for z in [c(0.1, 0.2), c(-0.7, 0.3), c(0.0, 0.0)] {
            let v = lift_log(&f, &[c(0.0, 0.0)], &[z]).unwrap();
            assert!(linalg::max_abs(&v.v) < 1e-15);
        }
    }

    #[test]
    fn shrinking_family_is_tangent_and_theta_is_one() {
        let f = fam("abs2(z1)*exp(abs2(t1)) - 1");
        for t in [c(0.3, 0.0), c(-0.2, 0.5)] {
            for dir in [c(1.0, 0.0), c(0.6, 0.8)] {
                let p = boundary_locate(&f, &[t], &[dir]).unwrap();
                let g = geodesic_curvature(&f, &[t], &p).unwrap();
                assert!(g.tangency < 1e-10);
                assert_abs_diff_eq!(g.theta[(0, 0)].re, 1.0, epsilon = 1e-10);
                assert!(g.route_diff < 1e-10);
                assert!(g.decomposition_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn levi_flat_and_non_pseudoconvex_theta() {
        let flat = fam("abs2(z1) - exp(2*re(t1))");
        let p = boundary_locate(&flat, &[c(0.3, -0.1)], &[c(0.0, 1.0)]).unwrap();
        let g = geodesic_curvature(&flat, &[c(0.3, -0.1)], &p).unwrap();
        assert!(g.theta[(0, 0)].norm() < 1e-10);

        let grow = fam("abs2(z1) - 1 - abs2(t1)");
        let p = boundary_locate(&grow, &[c(0.5, 0.0)], &[c(1.0, 0.0)]).unwrap();
        let g = geodesic_curvature(&grow, &[c(0.5, 0.0)], &p).unwrap();
        assert_abs_diff_eq!(g.theta[(0, 0)].re, -0.8, epsilon = 1e-10);
        assert!(g.min_eig_excess() >= -1e-12);
    }

    #[test]
    fn interior_lift_matches_boundary_formula() {
        // The boundary-regular formula is exact at interior points too.
        let f = DomainFamily::parse(
            "abs2(z1)*exp(abs2(t1)) + 0.3*re(t1*conj(z1)) + 2*abs2(z2) + re(z1*conj(z2)) - 1",
            "",
            1,
            2,
        )
        .unwrap();
        let jet = f.jet(&[c(0.2, 0.1)], &[c(0.3, 0.1), c(-0.1, 0.2)]).unwrap();
        let a = lift_log_from_jet(&jet).unwrap();
        let b = lift_log_boundary_from_jet(&jet).unwrap();
        assert!(a.max_diff(&b) < 1e-12);
    }

    #[test]
    fn adapted_route_agrees_in_two_fibre_dimensions() {
        let f = DomainFamily::parse(
            "abs2(z1)*exp(abs2(t1)) + 0.3*re(t1*conj(z1)) + 2*abs2(z2) + re(z1*conj(z2)) - 1",
            "",
            1,
            2,
        )
        .unwrap();
        let t = [c(0.2, 0.1)];
        let p = boundary_locate(&f, &t, &[c(0.6, 0.2), c(-0.3, 0.7)]).unwrap();
        let jet = f.jet(&t, &p).unwrap();
        let a = lift_adapted_from_jet(&jet).unwrap();
        let b = lift_log_boundary_from_jet(&jet).unwrap();
        assert!(a.max_diff(&b) < 1e-10, "{}", a.max_diff(&b));
        assert!(a.max_tangency(&jet) < 1e-12);
    }

    #[test]
    fn interpolation_verdicts() {
        let grid = vec![vec![c(0.0, 0.0)], vec![c(0.3, 0.2)]];
        let flat = fam("abs2(z1) - exp(2*re(t1))");
        assert!(interpolation_check(&flat, &grid, 8, 1e-8).unwrap().is_interpolation);
        let prod = fam("abs2(z1) - 1");
        assert!(interpolation_check(&prod, &grid, 8, 1e-8).unwrap().is_interpolation);
        let shrink = fam("abs2(z1)*exp(abs2(t1)) - 1");
        let r = interpolation_check(&shrink, &grid, 8, 1e-8).unwrap();
        assert!(!r.is_interpolation);
        assert_abs_diff_eq!(r.max_theta, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn total_levi_form_signs() {
        let stein = fam("abs2(z1)*exp(abs2(t1)) - 1");
        let p = boundary_locate(&stein, &[c(0.3, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert!(total_levi_min_eig(&stein.jet(&[c(0.3, 0.0)], &p).unwrap()) > 0.0);
        let grow = fam("abs2(z1) - 1 - abs2(t1)");
        let p = boundary_locate(&grow, &[c(0.5, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert!(total_levi_min_eig(&grow.jet(&[c(0.5, 0.0)], &p).unwrap()) < 0.0);
    }

    #[test]
    fn interior_point_is_rejected_by_boundary_routes() {
        let f = fam("abs2(z1) - 1");
        assert!(matches!(
            geodesic_curvature(&f, &[c(0.0, 0.0)], &[c(0.5, 0.0)]),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            lift_log(&f, &[c(0.0, 0.0)], &[c(1.0, 0.0)]),
            Err(Error::Precondition(_))
        ));
    }
}
