use num_complex::Complex64;
use serde::Serialize;

use super::{fd_dt, fd_dt_dtbar};
use crate::bergman::{build_model, project_dual, BergmanModel, DualSectionData, ModelOptions};
use crate::error::{Error, Result};
use crate::geometry::{sample_points, DefiningFunction, DomainFamily};
use crate::lifts::lift_log_boundary;
use crate::linalg::{self, CVec};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vf1Result {
    #[serde(serialize_with = "ser_c")]
    pub lhs: C,
    #[serde(serialize_with = "ser_c")]
    pub rhs_interior: C,
    #[serde(serialize_with = "ser_c")]
    pub rhs_boundary: C,
}

impl Vf1Result {
    /// |lhs − (rhs_interior − rhs_boundary)|.
    pub fn residual(&self) -> f64 {
        (self.lhs - (self.rhs_interior - self.rhs_boundary)).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vf2Result {
    #[serde(serialize_with = "ser_c")]
    pub lhs: C,
    #[serde(serialize_with = "ser_c")]
    pub rhs: C,
}

impl Vf2Result {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

pub(crate) fn ser_c<S: serde::Serializer>(z: &C, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    [z.re, z.im].serialize(s)
}

/// The kernel derivative `∂_ζ^α ∂̄_η^β K(ζ, η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEntry {
    pub alpha: usize,
    pub beta: usize,
    pub zeta: C,
    pub eta: C,
}

impl KernelEntry {
    /// K(ζ, η) itself.
    pub fn value(zeta: C, eta: C) -> KernelEntry {
        KernelEntry {
            alpha: 0,
            beta: 0,
            zeta,
            eta,
        }
    }

    fn eval(&self, fam: &DomainFamily, model: &BergmanModel) -> Result<C> {
        // Both points must lie inside the fibre.
        model.functional(fam, &point(self.alpha, self.zeta))?;
        model.functional(fam, &point(self.beta, self.eta))?;
        Ok(model.kernel_deriv(self.alpha, self.beta, self.zeta, self.eta))
    }
}

fn point(order: usize, eta: C) -> DualSectionData {
    DualSectionData::PointDeriv { order, eta }
}

/// Pairs two sections against `e^{−φ}` and a per-node factor over the
/// interior quadrature of `model`.
fn interior_pairing(model: &BergmanModel, u: &CVec, w: &CVec, factor: &[C]) -> C {
    let uv = model.eval_coeffs_at_nodes(u);
    let wv = model.eval_coeffs_at_nodes(w);
    model
        .rule
        .interior
        .iter()
        .enumerate()
        .map(|(r, node)| uv[r] * wv[r].conj() * factor[r] * (node.weight * model.weights[r]))
        .sum()
}

/// First-order variation of `∂_ζ^α ∂̄_η^β K` in the direction `t^j`.
///
/// The boundary term is the contraction of `e^{−φ} u conj(u′) i dζ∧dζ̄` with
/// the lift `V_j = ∂_{t^j} − v_j ∂_ζ`, pulled back to the boundary curve
/// `θ ↦ ζ(θ)`: only the fibre part of `V_j` survives, leaving
/// `i e^{−φ} u conj(u′) (−v_j) conj(ζ′(θ)) dθ`. The curve runs counterclockwise.
pub fn vf1_check(
    fam: &DomainFamily,
    t0: &[C],
    j: usize,
    entry: KernelEntry,
    h_fd: f64,
    opts: ModelOptions,
) -> Result<Vf1Result> {
    check_single_fibre(fam, t0, j)?;
    let kernel_at = |t: &[C]| -> Result<Vec<C>> { Ok(vec![entry.eval(fam, &build_model(fam, t, opts)?)?]) };
    let lhs = fd_dt(&kernel_at, t0, j, h_fd, false)?[0];

    let model = build_model(fam, t0, opts)?;
    let u = project_dual(&model, fam, &point(entry.beta, entry.eta))?.coeffs;
    let u_prime = project_dual(&model, fam, &point(entry.alpha, entry.zeta))?.coeffs;

    let phi_j: Vec<C> = model
        .rule
        .interior
        .iter()
        .map(|node| fam.weight_dt(t0, &[node.zeta]).map(|d| d[j]))
        .collect::<Result<_>>()?;
    let rhs_interior = interior_pairing(&model, &u, &u_prime, &phi_j);

    let i = C::new(0.0, 1.0);
    let mut rhs_boundary = C::new(0.0, 0.0);
    for node in &model.rule.boundary {
        let v = lift_log_boundary(fam, t0, &[node.zeta])?.v[(j, 0)];
        let e = (-fam.weight(t0, &[node.zeta])?).exp();
        let uu = model.eval_coeffs(&u, node.zeta) * model.eval_coeffs(&u_prime, node.zeta).conj();
        rhs_boundary += i * e * uu * (-v) * node.tangent.conj() * node.weight;
    }
    Ok(Vf1Result {
        lhs,
        rhs_interior,
        rhs_boundary,
    })
}

fn check_single_fibre(fam: &DomainFamily, t0: &[C], j: usize) -> Result<()> {
    if fam.n != 1 {
        return Err(Error::Precondition(
            "kernel variation is implemented for planar fibres".into(),
        ));
    }
    if t0.len() != fam.m || j >= fam.m {
        return Err(Error::Config(format!(
            "base point has {} coordinates and direction {j}, family has m = {}",
            t0.len(),
            fam.m
        )));
    }
    Ok(())
}

/// Largest entry and smallest eigenvalue of i∂∂̄φ over deterministic
/// samples of the total space around `t0`.
pub(crate) fn weight_hessian_extremes(fam: &DomainFamily, t0: &[C]) -> Result<(f64, f64)> {
    let mut max_abs: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let pts = sample_points(0x05ee_d0f2, 24, fam.m + fam.n, 0.5);
    for p in pts {
        let t: Vec<C> = t0.iter().zip(&p[..fam.m]).map(|(a, b)| a + b).collect();
        let Ok(jet) = fam.weight_jet(&t, &p[fam.m..]) else {
            continue;
        };
        let h = jet.full_hessian();
        max_abs = max_abs.max(linalg::max_abs(&h));
        min_eig = min_eig.min(linalg::hermitian_min_eig(&h));
    }
    Ok((max_abs, min_eig))
}

const PLURIHARMONIC_TOL: f64 = 1e-10;

/// Mixed second variation `∂_{t^j}∂_{t̄^j} ∂_ζ^α ∂̄_η^β K` for a product family
/// whose weight is pluriharmonic, against the pairing of the t̄-derivatives
/// of the two sections in the Gram matrix at `t0`.
///
/// The basis scale is frozen at its value over `t0` so that coefficient
/// vectors at different stencil nodes refer to the same monomials.
pub fn vf2_product_flat_check(
    fam: &DomainFamily,
    t0: &[C],
    j: usize,
    entry: KernelEntry,
    h_fd: f64,
    opts: ModelOptions,
) -> Result<Vf2Result> {
    check_single_fibre(fam, t0, j)?;
    if !fam.is_product() {
        return Err(Error::Precondition(
            "second variation is only checked for product families".into(),
        ));
    }
    let (hess, _) = weight_hessian_extremes(fam, t0)?;
    if hess > PLURIHARMONIC_TOL {
        return Err(Error::Precondition(format!(
            "weight is not pluriharmonic: |i∂∂̄φ| reaches {hess:e}"
        )));
    }
    let center = build_model(fam, t0, opts)?;
    let opts = ModelOptions {
        scale: Some(center.scale),
        ..opts
    };
    let kernel_at = |t: &[C]| -> Result<Vec<C>> { Ok(vec![entry.eval(fam, &build_model(fam, t, opts)?)?]) };
    let lhs = fd_dt_dtbar(&kernel_at, t0, j, h_fd)?[0];

    let nb = center.dim();
    let sections_at = |t: &[C]| -> Result<Vec<C>> {
        let model = build_model(fam, t, opts)?;
        let u = project_dual(&model, fam, &point(entry.beta, entry.eta))?.coeffs;
        let w = project_dual(&model, fam, &point(entry.alpha, entry.zeta))?.coeffs;
        Ok(u.iter().chain(w.iter()).copied().collect())
    };
    let d = fd_dt(&sections_at, t0, j, h_fd, true)?;
    let du = CVec::from_column_slice(&d[..nb]);
    let dw = CVec::from_column_slice(&d[nb..]);
    Ok(Vf2Result {
        lhs,
        rhs: center.pair(&du, &dw),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn opts() -> ModelOptions {
        ModelOptions {
            degree: 20,
            radial_order: 40,
            angular_order: 64,
            scale: None,
        }
    }

    /// Unit-disk kernel in the i dζ∧dζ̄ convention.
    fn k0(z: C, w: C) -> C {
        let d = C::new(1.0, 0.0) - z * w.conj();
        C::new(1.0 / (2.0 * PI), 0.0) / (d * d)
    }

    #[test]
    fn radius_family_boundary_term() {
        let fam = DomainFamily::parse("abs2(z1) - exp(2*re(t1))", "", 1, 1).unwrap();
        let r = vf1_check(&fam, &[c(0.0, 0.0)], 0, KernelEntry::value(c(0.0, 0.0), c(0.0, 0.0)), 1e-3, opts())
            .unwrap();
        let q = 1.0 / (2.0 * PI);
        assert!((r.lhs - c(-q, 0.0)).norm() < 1e-6, "{:?}", r);
        assert!(r.rhs_interior.norm() < 1e-12);
        assert!((r.rhs_boundary - c(q, 0.0)).norm() < 1e-6);
        assert!(r.residual() < 1e-6);
    }

    #[test]
    fn pluriharmonic_weight_on_product_disk() {
        let fam = DomainFamily::parse("abs2(z1) - 1", "2*re(t1*z1)", 1, 1).unwrap();
        let (zeta, eta) = (c(0.3, 0.0), c(-0.2, 0.1));
        let r = vf1_check(&fam, &[c(0.0, 0.0)], 0, KernelEntry::value(zeta, eta), 1e-3, opts()).unwrap();
        // ∂_t of e^{tζ} K₀(ζ,η) e^{t̄η̄} at t = 0.
        assert!((r.lhs - zeta * k0(zeta, eta)).norm() < 1e-6);
        assert!(r.rhs_boundary.norm() < 1e-12);
        assert!(r.residual() < 1e-6);
    }

    #[test]
    fn vf2_oracles() {
        let (zeta, eta) = (c(0.3, 0.0), c(-0.2, 0.1));
        let fam = DomainFamily::parse("abs2(z1) - 1", "2*re(t1*z1)", 1, 1).unwrap();
        let r = vf2_product_flat_check(&fam, &[c(0.0, 0.0)], 0, KernelEntry::value(zeta, eta), 1e-3, opts())
            .unwrap();
        let want = zeta * eta.conj() * k0(zeta, eta);
        assert!((r.lhs - want).norm() < 1e-4, "{:?}", r);
        assert!((r.rhs - want).norm() < 1e-6, "{:?}", r);

        let fam = DomainFamily::parse("abs2(z1) - 1", "t1 + conj(t1)", 1, 1).unwrap();
        let r = vf2_product_flat_check(&fam, &[c(0.0, 0.0)], 0, KernelEntry::value(zeta, eta), 1e-3, opts())
            .unwrap();
        assert!((r.lhs - k0(zeta, eta)).norm() < 1e-4);
        assert!((r.rhs - k0(zeta, eta)).norm() < 1e-6);
    }

    #[test]
    fn vf2_preconditions() {
        let curved = DomainFamily::parse("abs2(z1) - 1", "abs2(z1)", 1, 1).unwrap();
        let moving = DomainFamily::parse("abs2(z1) - exp(2*re(t1))", "", 1, 1).unwrap();
        for fam in [curved, moving] {
            let e = vf2_product_flat_check(
                &fam,
                &[c(0.0, 0.0)],
                0,
                KernelEntry::value(c(0.0, 0.0), c(0.0, 0.0)),
                1e-3,
                opts(),
            );
            assert!(matches!(e, Err(Error::Precondition(_))));
        }
    }
}
