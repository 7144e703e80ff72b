//! The real model: a family of intervals `[a(t), b(t)]` over `t ∈ [0, 1]`
//! with `Φ(t) = −log(b − a)`, its geodesic and remaining terms, and numeric
//! convexity scans of `t ↦ log∫e^{φ}dx` and `t ↦ −log∫e^{−φ}dx`.
//!
//! Expressions use `t1` for the real parameter and `z1` for the real fibre
//! coordinate; both are evaluated on the real axis.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprs::{parse, Expr, Var};
use crate::quad::composite_gauss_legendre;
use crate::variation::ScanResult;

type C = Complex64;

/// Grid points used to check b − a > 0 at construction.
const WIDTH_SAMPLES: usize = 65;
const REM_TOL: f64 = 1e-12;
const GEO_TOL: f64 = 1e-10;
/// Triviality fit tolerance.
pub const TRIVIAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct IntervalFamily {
    pub a: Expr,
    pub b: Expr,
    pub window: (f64, f64),
    da: Expr,
    db: Expr,
    dda: Expr,
    ddb: Expr,
}

fn real_at(e: &Expr, t: f64) -> Result<f64> {
    let v = e.eval_at(&[C::new(t, 0.0)], &[])?;
    if v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
        return Err(Error::NotReal { imag: v.im, sample: 0 });
    }
    Ok(v.re)
}

impl IntervalFamily {
    /// `window` must lie in [0, 1]; b − a > 0 is checked on a grid of it.
    pub fn new(a: Expr, b: Expr, window: (f64, f64)) -> Result<IntervalFamily> {
        let (lo, hi) = window;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::Config(format!(
                "parameter window ({lo}, {hi}) is not an interval in [0, 1]"
            )));
        }
        a.check_signature(1, 0)?;
        b.check_signature(1, 0)?;
        let t = Var::Base(0);
        let da = a.d_real(t);
        let db = b.d_real(t);
        let fam = IntervalFamily {
            dda: da.d_real(t),
            ddb: db.d_real(t),
            da,
            db,
            a,
            b,
            window,
        };
        for k in 0..WIDTH_SAMPLES {
            let t = lo + (hi - lo) * k as f64 / (WIDTH_SAMPLES - 1) as f64;
            fam.width(t)?;
        }
        Ok(fam)
    }

    pub fn parse(a: &str, b: &str, window: (f64, f64)) -> Result<IntervalFamily> {
        IntervalFamily::new(parse(a)?, parse(b)?, window)
    }

    fn width(&self, t: f64) -> Result<f64> {
        let w = real_at(&self.b, t)? - real_at(&self.a, t)?;
        if !(w > 0.0) {
            return Err(Error::Degenerate {
                t,
                detail: format!("b − a = {w:e}"),
            });
        }
        Ok(w)
    }

    fn contains(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.window;
        if !(lo <= t && t <= hi) {
            return Err(Error::Precondition(format!(
                "t = {t} is outside the window [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// Φ(t) = −log(b − a).
    pub fn phi(&self, t: f64) -> Result<f64> {
        Ok(-self.width(t)?.ln())
    }

    /// Φ̇ = (ȧ − ḃ)/(b − a).
    pub fn phi_dot(&self, t: f64) -> Result<f64> {
        Ok((real_at(&self.da, t)? - real_at(&self.db, t)?) / self.width(t)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToyReport {
    pub t: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub geo: f64,
    pub rem: f64,
    pub phi_ddot: f64,
}

/// θ(a) = ä, θ(b) = −b̈, Geo = (θ(a) + θ(b))/(b − a), R = (ȧ − ḃ)²/(b − a)²
/// and Φ̈ = ((b − a)(ä − b̈) + (ȧ − ḃ)²)/(b − a)².
pub fn toy_report(fam: &IntervalFamily, t: f64) -> Result<ToyReport> {
    fam.contains(t)?;
    let w = fam.width(t)?;
    let da = real_at(&fam.da, t)?;
    let db = real_at(&fam.db, t)?;
    let dda = real_at(&fam.dda, t)?;
    let ddb = real_at(&fam.ddb, t)?;
    let theta_a = dda;
    let theta_b = -ddb;
    let d = da - db;
    Ok(ToyReport {
        t,
        theta_a,
        theta_b,
        geo: (theta_a + theta_b) / w,
        rem: d * d / (w * w),
        phi_ddot: (w * (dda - ddb) + d * d) / (w * w),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityVerdict {
    pub min_rem: f64,
    pub rem_ok: bool,
    /// ä ≥ 0 and b̈ ≤ 0 on the grid.
    pub convex_total_space: bool,
    /// Smallest Geo, computed only when the total space is convex.
    pub min_geo: Option<f64>,
    pub geo_ok: Option<bool>,
    /// First grid point where a checked inequality fails.
    pub first_violation: Option<f64>,
}

impl PositivityVerdict {
    pub fn passed(&self) -> bool {
        self.rem_ok && self.geo_ok.unwrap_or(true)
    }
}

/// R ≥ 0 everywhere, and Geo ≥ 0 when a is convex and b concave on the grid.
pub fn toy_positivity_scan(fam: &IntervalFamily, grid: &[f64]) -> Result<PositivityVerdict> {
    let reports: Vec<ToyReport> = grid.iter().map(|&t| toy_report(fam, t)).collect::<Result<_>>()?;
    let min_rem = reports.iter().map(|r| r.rem).fold(f64::INFINITY, f64::min);
    let mut first_violation = reports.iter().find(|r| r.rem < -REM_TOL).map(|r| r.t);
    let convex_total_space = reports.iter().all(|r| r.theta_a >= 0.0 && r.theta_b >= 0.0);
    let (min_geo, geo_ok) = if convex_total_space {
        let g = reports.iter().map(|r| r.geo).fold(f64::INFINITY, f64::min);
        if first_violation.is_none() {
            first_violation = reports.iter().find(|r| r.geo < -GEO_TOL).map(|r| r.t);
        }
        (Some(g), Some(g >= -GEO_TOL))
    } else {
        (None, None)
    };
    Ok(PositivityVerdict {
        min_rem,
        rem_ok: min_rem >= -REM_TOL,
        convex_total_space,
        min_geo,
        geo_ok,
        first_violation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrivialityReport {
    pub trivial: bool,
    /// Least-squares slope of a(t) − a(0) against t.
    pub c: f64,
    pub max_fit_residual: f64,
    /// |Φ̈| < tol on the grid.
    pub phi_affine: bool,
    pub max_phi_ddot: f64,
}

/// Whether `[a(t), b(t)] = [a(0), b(0)] + ct` on the grid, with the affineness
/// of Φ reported alongside.
pub fn toy_triviality(fam: &IntervalFamily, grid: &[f64], tol: f64) -> Result<TrivialityReport> {
    if grid.is_empty() {
        return Err(Error::Config("triviality needs a nonempty grid".into()));
    }
    let a0 = real_at(&fam.a, 0.0)?;
    let b0 = real_at(&fam.b, 0.0)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        rows.push((t, real_at(&fam.a, t)? - a0, real_at(&fam.b, t)? - b0));
    }
    let stt: f64 = rows.iter().map(|r| r.0 * r.0).sum();
    let sta: f64 = rows.iter().map(|r| r.0 * r.1).sum();
    let c = if stt > 0.0 { sta / stt } else { 0.0 };
    let max_fit_residual = rows
        .iter()
        .map(|&(t, da, db)| (da - c * t).abs().max((db - c * t).abs()))
        .fold(0.0, f64::max);
    let mut max_phi_ddot: f64 = 0.0;
    for &t in grid {
        max_phi_ddot = max_phi_ddot.max(toy_report(fam, t)?.phi_ddot.abs());
    }
    Ok(TrivialityReport {
        trivial: max_fit_residual < tol,
        c,
        max_fit_residual,
        phi_affine: max_phi_ddot < tol,
        max_phi_ddot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvexityMode {
    /// F(t) = log∫e^{φ(t,x)}dx.
    Holder,
    /// F(t) = −log∫e^{−φ(t,x)}dx.
    Prekopa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct LineQuadrature {
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    pub panels: usize,
    /// Step of the five-point second difference in t.
    pub step: f64,
}

impl Default for LineQuadrature {
    fn default() -> Self {
        LineQuadrature {
            order: 20,
            panels: 64,
            step: 1e-3,
        }
    }
}

/// The integrand at the window ends must fall below this fraction of its
/// largest sampled value.
pub const TAIL_RATIO: f64 = 1e-14;
const WINDOW_START: f64 = 1.0;
const WINDOW_MAX: f64 = 1024.0;
const WINDOW_PROBES: usize = 401;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityScan {
    /// F̈ per grid point.
    pub scan: ScanResult,
    /// Truncation half-width X used at each grid point.
    pub windows: Vec<f64>,
}

fn exponent(phi: &Expr, mode: ConvexityMode, t: f64, x: f64) -> Result<f64> {
    let v = phi.eval_at(&[C::new(t, 0.0)], &[C::new(x, 0.0)])?.re;
    Ok(match mode {
        ConvexityMode::Holder => v,
        ConvexityMode::Prekopa => -v,
    })
}

/// Smallest power-of-two multiple X of 1 whose end values are negligible for
/// every parameter in `ts`.
fn truncation(phi: &Expr, mode: ConvexityMode, ts: &[f64]) -> Result<f64> {
    let cutoff = TAIL_RATIO.ln();
    let mut x = WINDOW_START;
    loop {
        let mut ok = true;
        for &t in ts {
            let mut peak = f64::NEG_INFINITY;
            for k in 0..WINDOW_PROBES {
                let xi = -x + 2.0 * x * k as f64 / (WINDOW_PROBES - 1) as f64;
                peak = peak.max(exponent(phi, mode, t, xi)?);
            }
            let ends = exponent(phi, mode, t, -x)?.max(exponent(phi, mode, t, x)?);
            if !peak.is_finite() || !ends.is_finite() || ends - peak >= cutoff {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(x);
        }
        if x >= WINDOW_MAX {
            return Err(Error::Divergence(format!(
                "integrand does not decay to {TAIL_RATIO:e} of its peak within |x| ≤ {WINDOW_MAX}"
            )));
        }
        x *= 2.0;
    }
}

/// log∫_{−X}^{X} e^{ψ} dx with the peak factored out.
fn log_integral(phi: &Expr, mode: ConvexityMode, t: f64, nodes: &[(f64, f64)]) -> Result<f64> {
    let psi: Vec<f64> = nodes
        .iter()
        .map(|&(x, _)| exponent(phi, mode, t, x))
        .collect::<Result<_>>()?;
    let peak = psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = psi.iter().zip(nodes).map(|(p, (_, w))| w * (p - peak).exp()).sum();
    Ok(peak + s.ln())
}

/// F̈ on `t_grid` by the five-point stencil, each point with its own adaptive
/// truncation shared by the stencil. Passes when min F̈ ≥ −tol.
pub fn convexity_scan(
    phi: &Expr,
    mode: ConvexityMode,
    t_grid: &[f64],
    quad: LineQuadrature,
    tol: f64,
) -> Result<ConvexityScan> {
    phi.check_signature(1, 1)?;
    if quad.order == 0 || quad.panels == 0 || !(quad.step > 0.0) {
        return Err(Error::Config("line quadrature needs positive order, panels and step".into()));
    }
    let h = quad.step;
    let sign = match mode {
        ConvexityMode::Holder => 1.0,
        ConvexityMode::Prekopa => -1.0,
    };
    let rows: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let ts = [t - 2.0 * h, t - h, t, t + h, t + 2.0 * h];
            let x = truncation(phi, mode, &ts)?;
            let nodes = composite_gauss_legendre(quad.order, quad.panels, -x, x);
            let f: Vec<f64> = ts
                .iter()
                .map(|&s| log_integral(phi, mode, s, &nodes).map(|v| sign * v))
                .collect::<Result<_>>()?;
            let fdd = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
            Ok((fdd, x))
        })
        .collect::<Result<_>>()?;
    let nodes = t_grid.iter().map(|&t| vec![C::new(t, 0.0)]).collect();
    Ok(ConvexityScan {
        scan: ScanResult::lower_bound(nodes, rows.iter().map(|r| r.0).collect(), tol),
        windows: rows.iter().map(|r| r.1).collect(),
    })
}

/// `count` equally spaced points of [lo, hi].
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}
