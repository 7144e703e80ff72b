//! d/dt ∫_{D_t} f dx = ∫_{D_t} (∂_t f + div(w f)) dx for a real parameter t
//! and a vector field V = ∂_t + Σ w^λ ∂_{x^λ} tangent to the total boundary.

use num_complex::Complex64;

use super::{build_quadrature, fd_jet, ray_root, DefiningFunction, Jet11};
use crate::error::{Error, Result};
use crate::exprs::{Expr, Var};
use crate::quad::composite_gauss_legendre;

type C = Complex64;

/// How the fibre `{x : ρ(t, x) < 0}` is parametrized. Interval fibres read
/// `z1` as the real coordinate x; planar fibres read `z1 = x1 + i x2` and
/// must be star-shaped about the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FibreShape {
    Interval { center: f64 },
    Planar { radial_order: usize, angular_order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FibreDerivCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Largest |V(ρ)| over the boundary samples.
    pub max_tangency: f64,
}

const TANGENCY_TOL: f64 = 1e-8;
const INTERVAL_NODES: usize = 16;
const INTERVAL_PANELS: usize = 8;

struct RealParam<'a> {
    rho: &'a Expr,
    drho: Expr,
}

impl DefiningFunction for RealParam<'_> {
    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }

    fn value(&self, t: &[C], mu: &[C]) -> Result<f64> {
        Ok(self.rho.eval_at(t, mu)?.re)
    }

    fn jet(&self, t: &[C], mu: &[C]) -> Result<Jet11> {
        fd_jet(|t, mu| self.value(t, mu), 1, t, mu, 1e-3)
    }

    fn fibre_gradient(&self, t: &[C], mu: &[C]) -> Result<Vec<C>> {
        Ok(vec![self.drho.eval_at(t, mu)?])
    }
}

fn real_at(e: &Expr, t: f64, x: C) -> Result<f64> {
    Ok(e.eval_at(&[C::new(t, 0.0)], &[x])?.re)
}

/// Returns the central-difference derivative of F(t) = ∫_{D_t} f dx
/// (Richardson-extrapolated from steps `h`, `h/2`) and the transport
/// integral ∫ (∂_t f + div(w f)) dx. `w` has one component for interval
/// fibres and two for planar ones.
pub fn fibre_integral_derivative_check(
    rho: &Expr,
    f: &Expr,
    w: &[Expr],
    t: f64,
    h: f64,
    shape: FibreShape,
) -> Result<FibreDerivCheck> {
    let planar = matches!(shape, FibreShape::Planar { .. });
    let dim = if planar { 2 } else { 1 };
    if w.len() != dim {
        return Err(Error::Config(format!(
            "vector field needs {dim} fibre component(s), got {}",
            w.len()
        )));
    }
    for e in std::iter::once(rho).chain(std::iter::once(f)).chain(w) {
        e.check_signature(1, 1)?;
    }
    let x = Var::Fibre(0);
    let d_x = |e: &Expr, k: usize| if k == 0 { e.d_real(x) } else { e.d_imag(x) };
    let d_t = |e: &Expr| e.d_real(Var::Base(0));

    let mut transport = d_t(f);
    let mut v_rho = d_t(rho);
    for (k, wk) in w.iter().enumerate() {
        transport = Expr::add(transport, d_x(&Expr::mul(wk.clone(), f.clone()), k));
        v_rho = Expr::add(v_rho, Expr::mul(wk.clone(), d_x(rho, k)));
    }

    let fibre_integral = |tt: f64, g: &Expr| -> Result<(f64, Vec<C>)> {
        match shape {
            FibreShape::Interval { center } => {
                let side = |sgn: f64| ray_root(|r| real_at(rho, tt, C::new(center + sgn * r, 0.0)));
                let a = center - side(-1.0)?.radius;
                let b = center + side(1.0)?.radius;
                let mut sum = 0.0;
                for (xi, wi) in composite_gauss_legendre(INTERVAL_NODES, INTERVAL_PANELS, a, b) {
                    sum += wi * real_at(g, tt, C::new(xi, 0.0))?;
                }
                Ok((sum, vec![C::new(a, 0.0), C::new(b, 0.0)]))
            }
            FibreShape::Planar {
                radial_order,
                angular_order,
            } => {
                let fam = RealParam {
                    rho,
                    drho: rho.wirtinger(x, false),
                };
                let rule = build_quadrature(&fam, &[C::new(tt, 0.0)], radial_order, angular_order)?;
                let mut sum = 0.0;
                for node in &rule.interior {
                    // Lebesgue measure is half of i dζ∧dζ̄.
                    sum += 0.5 * node.weight * real_at(g, tt, node.zeta)?;
                }
                Ok((sum, rule.boundary.iter().map(|b| b.zeta).collect()))
            }
        }
    };

    let (rhs, boundary) = fibre_integral(t, &transport)?;
    let mut max_tangency: f64 = 0.0;
    for p in &boundary {
        max_tangency = max_tangency.max(real_at(&v_rho, t, *p)?.abs());
    }
    if max_tangency > TANGENCY_TOL {
        return Err(Error::Precondition(format!(
            "vector field is not tangent to the boundary: |V(ρ)| = {max_tangency:e}"
        )));
    }
    let central = |s: f64| -> Result<f64> {
        Ok((fibre_integral(t + s, f)?.0 - fibre_integral(t - s, f)?.0) / (2.0 * s))
    };
    let lhs = (4.0 * central(0.5 * h)? - central(h)?) / 3.0;
    Ok(FibreDerivCheck {
        lhs,
        rhs,
        max_tangency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprs::parse;
    use approx::assert_abs_diff_eq;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn growing_interval() {
        let r = fibre_integral_derivative_check(
            &p("z1*(z1 - 1 - t1)"),
            &p("z1^2"),
            &[p("z1/(1 + t1)")],
            0.0,
            1e-3,
            FibreShape::Interval { center: 0.5 },
        )
        .unwrap();
        assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.rhs, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn fixed_interval_linear_in_t() {
        let r = fibre_integral_derivative_check(
            &p("z1*(z1 - 1)"),
            &p("t1*z1"),
            &[p("0")],
            0.3,
            1e-3,
            FibreShape::Interval { center: 0.5 },
        )
        .unwrap();
        assert_abs_diff_eq!(r.lhs, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn constant_on_fixed_domain() {
        let r = fibre_integral_derivative_check(
            &p("z1*(z1 - 1)"),
            &p("3"),
            &[p("0")],
            0.0,
            1e-3,
            FibreShape::Interval { center: 0.5 },
        )
        .unwrap();
        assert!(r.lhs.abs() < 1e-10 && r.rhs.abs() < 1e-12);
    }

    #[test]
    fn growing_disk_in_the_plane() {
        // D_t = {|x| < 1 + t}, f = |x|², w = x/(1 + t): F(t) = π(1+t)⁴/2.
        let r = fibre_integral_derivative_check(
            &p("abs2(z1) - (1 + t1)^2"),
            &p("abs2(z1)"),
            &[p("re(z1)/(1 + t1)"), p("im(z1)/(1 + t1)")],
            0.0,
            1e-3,
            FibreShape::Planar {
                radial_order: 8,
                angular_order: 32,
            },
        )
        .unwrap();
        assert_abs_diff_eq!(r.lhs, 2.0 * std::f64::consts::PI, epsilon = 1e-6);
        assert_abs_diff_eq!(r.rhs, 2.0 * std::f64::consts::PI, epsilon = 1e-10);
    }

    #[test]
    fn non_tangent_field_is_rejected() {
        let err = fibre_integral_derivative_check(
            &p("z1*(z1 - 1 - t1)"),
            &p("z1^2"),
            &[p("0")],
            0.0,
            1e-3,
            FibreShape::Interval { center: 0.5 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
