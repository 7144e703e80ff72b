use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::ScanResult;
use crate::bergman::{build_model, project_dual, BergmanModel, DualSectionData, ModelOptions};
use crate::error::{Error, Result};
use crate::exprs::{parse, Expr, Var};
use crate::geometry::{boundary_samples, fd_jet, sample_points, DefiningFunction, DomainFamily, Jet11};
use crate::lifts::geodesic_curvature;

type C = Complex64;

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;
/// Step for the finite-difference jets of the implicit defining function.
pub const MOTION_JET_STEP: f64 = 1e-2;
const IDENTITY_TOL: f64 = 1e-12;
/// Rays and radial fractions used to sample the closure of D_0.
const BASE_RAYS: usize = 24;
const BASE_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// A motion `(z, t) ↦ f(z, t)` of a planar domain `D_0 = {ρ_0 < 0}`, with the
/// Beltrami coefficient `J = f_z̄/f_z` and its t-derivatives kept symbolically.
#[derive(Debug, Clone)]
pub struct MotionSpec {
    pub f: Expr,
    pub rho0: Expr,
    pub m: usize,
    f_z: Expr,
    f_zbar: Expr,
    rho0_z: Expr,
    rho0_zbar: Expr,
    beltrami: Expr,
    beltrami_dt: Vec<Expr>,
    base: DomainFamily,
}

impl MotionSpec {
    /// Checks that f(·, 0) is the identity on samples of D_0.
    pub fn new(f: Expr, rho0: Expr, m: usize) -> Result<MotionSpec> {
        if m == 0 {
            return Err(Error::Config("a motion needs at least one parameter".into()));
        }
        f.check_signature(m, 1)?;
        rho0.check_signature(m, 1)?;
        if (0..m).any(|j| rho0.depends_on(Var::Base(j))) {
            return Err(Error::Config("ρ_0 must depend on z1 only".into()));
        }
        let z = Var::Fibre(0);
        let f_z = f.wirtinger(z, false);
        let f_zbar = f.wirtinger(z, true);
        let beltrami = Expr::div(f_zbar.clone(), f_z.clone());
        let beltrami_dt = (0..m).map(|j| beltrami.wirtinger(Var::Base(j), false)).collect();
        let base = DomainFamily::new(rho0.clone(), Expr::num(0.0), m, 1)?;
        let spec = MotionSpec {
            f,
            rho0: rho0.clone(),
            m,
            f_z,
            f_zbar,
            rho0_z: rho0.wirtinger(z, false),
            rho0_zbar: rho0.wirtinger(z, true),
            beltrami,
            beltrami_dt,
            base,
        };
        let zero = vec![C::new(0.0, 0.0); m];
        for z in spec.base_samples()? {
            let d = (spec.f.eval_at(&zero, &[z])? - z).norm();
            if d > IDENTITY_TOL * z.norm().max(1.0) {
                return Err(Error::Precondition(format!(
                    "f(·, 0) is not the identity: moves {z} by {d:e}"
                )));
            }
        }
        Ok(spec)
    }

    pub fn parse(f: &str, rho0: &str, m: usize) -> Result<MotionSpec> {
        MotionSpec::new(parse(f)?, parse(rho0)?, m)
    }

    /// Points of the closure of D_0 along equally spaced rays.
    fn base_samples(&self) -> Result<Vec<C>> {
        let zero = vec![C::new(0.0, 0.0); self.m];
        let rim = boundary_samples(&self.base, &zero, BASE_RAYS)?;
        let mut out = vec![C::new(0.0, 0.0)];
        for p in rim {
            out.extend(BASE_FRACTIONS[1..].iter().map(|s| p[0] * s));
        }
        Ok(out)
    }

    pub fn beltrami(&self, t: &[C], z: C) -> Result<C> {
        self.beltrami.eval_at(t, &[z])
    }

    /// Largest |J| over samples of the closure of D_0 and the given base points.
    pub fn max_beltrami(&self, t_grid: &[Vec<C>]) -> Result<f64> {
        let zs = self.base_samples()?;
        let mut best: f64 = 0.0;
        for t in t_grid {
            for &z in &zs {
                best = best.max(self.beltrami(t, z)?.norm());
            }
        }
        Ok(best)
    }

    /// Fails unless |J| < 1 on the samples.
    pub fn check_quasiconformal(&self, t_grid: &[Vec<C>]) -> Result<()> {
        let j = self.max_beltrami(t_grid)?;
        if !(j < 1.0) {
            return Err(Error::Precondition(format!(
                "Beltrami coefficient reaches |J| = {j}"
            )));
        }
        Ok(())
    }

    /// z with f(z, t) = w. Newton from z = w, with the step solving the
    /// real-linear system f_z dz + f_z̄ conj(dz) = −(f − w).
    pub fn invert(&self, w: C, t: &[C]) -> Result<C> {
        let mut z = w;
        for _ in 0..NEWTON_MAX_ITER {
            let r = self.f.eval_at(t, &[z])? - w;
            let a = self.f_z.eval_at(t, &[z])?;
            let b = self.f_zbar.eval_at(t, &[z])?;
            let det = a.norm_sqr() - b.norm_sqr();
            if !(det.abs() > 0.0) || !det.is_finite() {
                return Err(Error::Newton(format!(
                    "Jacobian of f(·, t) is singular at z = {z}"
                )));
            }
            let dz = (b * r.conj() - a.conj() * r) / det;
            z += dz;
            if r.norm() < NEWTON_TOL * w.norm().max(1.0) {
                return Ok(z);
            }
        }
        let r = (self.f.eval_at(t, &[z])? - w).norm();
        if r < NEWTON_TOL * w.norm().max(1.0) {
            return Ok(z);
        }
        Err(Error::Newton(format!(
            "no convergence for w = {w} after {NEWTON_MAX_ITER} iterations (residual {r:e})"
        )))
    }

    /// `(f_z)² J_j / (|f_z|²(1 − |J|²))` at (z, t) for every base direction.
    fn flatness_density(&self, t: &[C], z: C) -> Result<Vec<C>> {
        let fz = self.f_z.eval_at(t, &[z])?;
        let j = self.beltrami(t, z)?;
        let denom = fz.norm_sqr() * (1.0 - j.norm_sqr());
        if !(denom > 0.0) {
            return Err(Error::Precondition(format!(
                "|J| = {} is not below 1 at z = {z}",
                j.norm()
            )));
        }
        self.beltrami_dt
            .iter()
            .map(|e| Ok(fz * fz * e.eval_at(t, &[z])? / denom))
            .collect()
    }

    pub fn family(&self) -> MotionFamily {
        MotionFamily { spec: self.clone() }
    }
}

/// The image fibres `D_t = f(D_0, t)` as the implicit family
/// `ρ(t, w) = ρ_0(z(w, t))`.
#[derive(Debug, Clone)]
pub struct MotionFamily {
    pub spec: MotionSpec,
}

impl DefiningFunction for MotionFamily {
    fn dims(&self) -> (usize, usize) {
        (self.spec.m, 1)
    }

    fn value(&self, t: &[C], mu: &[C]) -> Result<f64> {
        let z = self.spec.invert(mu[0], t)?;
        Ok(self.spec.rho0.eval_at(t, &[z])?.re)
    }

    fn jet(&self, t: &[C], mu: &[C]) -> Result<Jet11> {
        fd_jet(|t, mu| self.value(t, mu), self.spec.m, t, mu, MOTION_JET_STEP)
    }

    /// ρ_w by the chain rule through the inverse map:
    /// ∂z/∂w = conj(f_z)/D and ∂z̄/∂w = −conj(f_z̄)/D, D = |f_z|² − |f_z̄|².
    fn fibre_gradient(&self, t: &[C], mu: &[C]) -> Result<Vec<C>> {
        let s = &self.spec;
        let z = s.invert(mu[0], t)?;
        let a = s.f_z.eval_at(t, &[z])?;
        let b = s.f_zbar.eval_at(t, &[z])?;
        let d = a.norm_sqr() - b.norm_sqr();
        let r_z = s.rho0_z.eval_at(t, &[z])?;
        let r_zbar = s.rho0_zbar.eval_at(t, &[z])?;
        Ok(vec![(r_z * a.conj() - r_zbar * b.conj()) / d])
    }
}

/// `∫_{D_t} K^t(ζ, η) (f_z)² J_j/(|f_z|²(1 − |J|²)) i dζ∧dζ̄` for each base
/// direction, the density evaluated at z(ζ, t). `model` must be built over
/// `t` on [`MotionSpec::family`].
pub fn motion_flatness(
    motion: &MotionSpec,
    t: &[C],
    eta: C,
    model: &BergmanModel,
) -> Result<Vec<C>> {
    if model.t != t {
        return Err(Error::Config("model is built over a different base point".into()));
    }
    let fam = motion.family();
    let k_eta = project_dual(model, &fam, &DualSectionData::PointDeriv { order: 0, eta })?;
    let kvals = model.eval_coeffs_at_nodes(&k_eta.coeffs);
    let mut out = vec![C::new(0.0, 0.0); motion.m];
    for (r, node) in model.rule.interior.iter().enumerate() {
        let z = motion.invert(node.zeta, t)?;
        let g = motion.flatness_density(t, z)?;
        let w = kvals[r] * (node.weight * model.weights[r]);
        for (o, gj) in out.iter_mut().zip(g) {
            *o += w * gj;
        }
    }
    Ok(out)
}

/// The motion `f = z + a(t) z̄` of the unit disk.
pub fn conjugate_linear_motion(a: &Expr) -> Result<MotionSpec> {
    let z = Expr::z(0);
    let f = Expr::add(z.clone(), Expr::mul(a.clone(), Expr::conj(z.clone())));
    let rho0 = Expr::sub(Expr::mul(z.clone(), Expr::conj(z)), Expr::num(1.0));
    MotionSpec::new(f, rho0, 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cor215Report {
    /// max |a| over the grid.
    pub max_a: f64,
    /// |motion_flatness| per grid node.
    pub flatness: ScanResult,
    /// max |a| < tol.
    pub trivial: bool,
    /// The two verdicts agree.
    pub consistent: bool,
}

/// Triviality of `z + a(t) z̄` on the unit disk, decided from a and
/// cross-checked against the flatness integral over the grid.
pub fn cor215_check(a: &Expr, t_grid: &[Vec<C>], tol: f64, opts: ModelOptions) -> Result<Cor215Report> {
    a.check_signature(1, 0)?;
    let zero = [C::new(0.0, 0.0)];
    if a.eval_at(&zero, &[])?.norm() > IDENTITY_TOL {
        return Err(Error::Precondition("a(0) must vanish".into()));
    }
    let a_tbar = a.wirtinger(Var::Base(0), true);
    let mut max_a: f64 = 0.0;
    for t in t_grid {
        max_a = max_a.max(a.eval_at(t, &[])?.norm());
        if a_tbar.eval_at(t, &[])?.norm() > 1e-12 {
            return Err(Error::Precondition(format!(
                "a is not holomorphic in t at {}",
                t[0]
            )));
        }
    }
    if !(max_a < 1.0) {
        return Err(Error::Precondition(format!("|a| reaches {max_a} on the grid")));
    }
    let motion = conjugate_linear_motion(a)?;
    let fam = motion.family();
    let values: Vec<f64> = t_grid
        .par_iter()
        .map(|t| {
            let model = build_model(&fam, t, opts)?;
            Ok(motion_flatness(&motion, t, C::new(0.0, 0.0), &model)?[0].norm())
        })
        .collect::<Result<_>>()?;
    let flatness = ScanResult::upper_bound(t_grid.to_vec(), values, tol);
    let trivial = max_a < tol;
    Ok(Cor215Report {
        max_a,
        consistent: trivial == flatness.passed,
        flatness,
        trivial,
    })
}

/// max |θ| of the image family at `samples` boundary points over each base
/// point; passes when every value is below `tol`.
pub fn motion_levi_flat_check(
    motion: &MotionSpec,
    t_grid: &[Vec<C>],
    samples: usize,
    tol: f64,
) -> Result<ScanResult> {
    motion.check_quasiconformal(t_grid)?;
    let fam = motion.family();
    let values: Vec<f64> = t_grid
        .par_iter()
        .map(|t| {
            let mut worst: f64 = 0.0;
            for p in boundary_samples(&fam, t, samples)? {
                worst = worst.max(geodesic_curvature(&fam, t, &p)?.spectral_norm());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(ScanResult::upper_bound(t_grid.to_vec(), values, tol))
}

/// Largest |z(f(p, t), t) − p| over seeded points p of the disk |p| < 0.9.
pub fn inversion_residual(motion: &MotionSpec, t: &[C], count: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in sample_points(0x5eed_0303, count, 1, 0.9) {
        let w = motion.f.eval_at(t, &p)?;
        let z = motion.invert(w, t)?;
        worst = worst.max((z - p[0]).norm());
    }
    Ok(worst)
}
