use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{locate_on_ray, DefiningFunction};
use crate::error::{Error, Result};
use crate::quad::gauss_legendre_on;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorNode {
    pub zeta: C,
    /// Weight for the measure `i dζ∧dζ̄`.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub zeta: C,
    /// dζ/dθ of the boundary parametrization θ ↦ r(θ)e^{iθ}.
    pub tangent: C,
    /// Trapezoid weight in θ.
    pub weight: f64,
}

/// Polar quadrature of a planar fibre star-shaped about the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub interior: Vec<InteriorNode>,
    /// Counterclockwise boundary parametrization.
    pub boundary: Vec<BoundaryNode>,
    /// Boundary radius r(θ_k) per angular node.
    pub radii: Vec<f64>,
}

impl QuadratureRule {
    /// Rule for `{|ζ| < radius}`.
    pub fn disk(radius: f64, radial_order: usize, angular_order: usize) -> QuadratureRule {
        let radii = vec![radius; angular_order];
        let derivs = vec![0.0; angular_order];
        QuadratureRule::from_radii(&radii, &derivs, radial_order)
    }

    /// Tensor rule from boundary radii r(θ_k) and their θ-derivatives on the
    /// equally spaced angles θ_k = 2πk/M.
    ///
    /// The radial Gauss–Legendre rule runs in s = r², where
    /// `i dζ∧dζ̄ = 2 r dr dθ = ds dθ`, so a monomial ζ^a ζ̄^a becomes the
    /// polynomial s^a and is integrated exactly for a < 2·radial_order.
    pub fn from_radii(radii: &[f64], dradii: &[f64], radial_order: usize) -> QuadratureRule {
        let m = radii.len();
        let dtheta = TAU / m as f64;
        let mut interior = Vec::with_capacity(m * radial_order);
        let mut boundary = Vec::with_capacity(m);
        for (k, (&r, &dr)) in radii.iter().zip(dradii).enumerate() {
            let e = C::from_polar(1.0, dtheta * k as f64);
            for (s, w) in gauss_legendre_on(radial_order, 0.0, r * r) {
                interior.push(InteriorNode {
                    zeta: e * s.sqrt(),
                    weight: w * dtheta,
                });
            }
            boundary.push(BoundaryNode {
                zeta: e * r,
                tangent: C::new(dr, r) * e,
                weight: dtheta,
            });
        }
        QuadratureRule {
            interior,
            boundary,
            radii: radii.to_vec(),
        }
    }

    /// ∫ f i dζ∧dζ̄ over the fibre.
    pub fn integrate<F: Fn(C) -> C>(&self, f: F) -> C {
        self.interior.iter().map(|n| f(n.zeta) * n.weight).sum()
    }

    /// ∮ f dζ over the boundary, counterclockwise.
    pub fn integrate_dz<F: Fn(C) -> C>(&self, f: F) -> C {
        self.boundary
            .iter()
            .map(|n| f(n.zeta) * n.tangent * n.weight)
            .sum()
    }

    /// ∮ f dζ̄ over the boundary, counterclockwise.
    pub fn integrate_dzbar<F: Fn(C) -> C>(&self, f: F) -> C {
        self.boundary
            .iter()
            .map(|n| f(n.zeta) * n.tangent.conj() * n.weight)
            .sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary.iter().map(|n| n.tangent.norm() * n.weight).sum()
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }
}

const STAR_CHECKS: usize = 8;

/// Polar rule for the fibre over `t` (n = 1). Each angular ray is searched
/// for its boundary radius and ρ is required to increase along the ray at
/// eight interior checkpoints. The boundary derivative dr/dθ comes from
/// implicit differentiation of ρ(t, r(θ)e^{iθ}) = 0.
pub fn build_quadrature(
    fam: &dyn DefiningFunction,
    t: &[C],
    radial_order: usize,
    angular_order: usize,
) -> Result<QuadratureRule> {
    if fam.dims().1 != 1 {
        return Err(Error::Config("planar quadrature needs fibre dimension 1".into()));
    }
    if radial_order == 0 || angular_order < 3 {
        return Err(Error::Config(
            "quadrature needs radial order ≥ 1 and angular order ≥ 3".into(),
        ));
    }
    let origin = [C::new(0.0, 0.0)];
    let mut radii = Vec::with_capacity(angular_order);
    let mut dradii = Vec::with_capacity(angular_order);
    for k in 0..angular_order {
        let theta = TAU * k as f64 / angular_order as f64;
        let e = C::from_polar(1.0, theta);
        let (p, hit) = locate_on_ray(fam, t, &origin, &[e])?;
        let r = hit.radius;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..STAR_CHECKS {
            let v = fam.value(t, &[e * (r * i as f64 / STAR_CHECKS as f64)])?;
            if !(v > prev) || !(v < 0.0) {
                return Err(Error::NotStarShaped(format!(
                    "ρ is not increasing along the ray at θ = {theta:.6}"
                )));
            }
            prev = v;
        }
        let g = fam.fibre_gradient(t, &p)?[0];
        let d_r = 2.0 * (g * e).re;
        let d_theta = 2.0 * (g * C::new(0.0, r) * e).re;
        if !(d_r > 0.0) {
            return Err(Error::NotStarShaped(format!(
                "boundary is tangent to the ray at θ = {theta:.6}"
            )));
        }
        radii.push(r);
        dradii.push(-d_theta / d_r);
    }
    Ok(QuadratureRule::from_radii(&radii, &dradii, radial_order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainFamily;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn rule(rho: &str, radial: usize, angular: usize) -> QuadratureRule {
        let fam = DomainFamily::parse(rho, "", 0, 1).unwrap();
        build_quadrature(&fam, &[], radial, angular).unwrap()
    }

    #[test]
    fn unit_disk_area_and_second_moment() {
        let q = rule("abs2(z1) - 1", 20, 64);
        assert_abs_diff_eq!(q.integrate(|_| C::new(1.0, 0.0)).re, 2.0 * PI, epsilon = 1e-10);
        assert_abs_diff_eq!(q.integrate(|z| C::new(z.norm_sqr(), 0.0)).re, PI, epsilon = 1e-10);
        assert_abs_diff_eq!(q.boundary_length(), 2.0 * PI, epsilon = 1e-8);
        assert!(q.interior.iter().all(|n| n.weight > 0.0));
    }

    #[test]
    fn monomial_exactness() {
        let order = 6;
        let q = QuadratureRule::disk(1.0, order, 4 * order + 1);
        for a in 0..=2 * order {
            for b in 0..=(2 * order - a) {
                let v = q.integrate(|z| z.powu(a as u32) * z.conj().powu(b as u32));
                let exact = if a == b { 2.0 * PI / (a as f64 + 1.0) } else { 0.0 };
                assert!((v - C::new(exact, 0.0)).norm() < 1e-9, "a={a} b={b} {v}");
            }
        }
    }

    #[test]
    fn exact_one_forms_integrate_to_zero() {
        // The ellipse is star-shaped but not a disk, so r'(θ) matters.
        let q = rule("abs2(z1) + 0.5*re(z1^2) - 1", 20, 128);
        for k in 0..4 {
            let v = q.integrate_dz(|z| z.powu(k));
            assert!(v.norm() < 1e-10, "{k}: {v}");
        }
        // ∮ ζ̄ dζ = 2i·area, and ∫ i dζ∧dζ̄ = 2·area.
        let area2 = q.integrate(|_| C::new(1.0, 0.0)).re;
        let circ = q.integrate_dz(|z| z.conj());
        assert_abs_diff_eq!((circ - C::new(0.0, area2)).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn non_monotone_ray_is_rejected() {
        let fam = DomainFamily::parse("10*abs2(z1)*(abs2(z1) - 0.3)^2 - 1", "", 0, 1).unwrap();
        assert!(matches!(
            build_quadrature(&fam, &[], 8, 16),
            Err(Error::NotStarShaped(_))
        ));
    }
}
