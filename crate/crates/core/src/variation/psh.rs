use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::formulas::weight_hessian_extremes;
use super::ScanResult;
use crate::bergman::{build_model, project_dual, DualSectionData, ModelOptions};
use crate::error::{Error, Result};
use crate::geometry::{boundary_samples, DefiningFunction, DomainFamily};
use crate::lifts::total_levi_min_eig;

type C = Complex64;

/// Boundary points per base node used for the Steinness flag.
const STEIN_SAMPLES: usize = 16;
const STEIN_TOL: f64 = 1e-9;

/// Whether the total space looks Stein with a plurisubharmonic weight on the
/// sampled points. Reported, never assumed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinFlag {
    /// Smallest eigenvalue of the total Levi form over boundary samples.
    pub min_total_levi: f64,
    /// Smallest eigenvalue of i∂∂̄φ over samples.
    pub min_weight_eig: f64,
    pub stein: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PshScan {
    /// One scan of ∂²/∂t∂t̄ log‖P(f)‖² per functional, in input order.
    pub scans: Vec<ScanResult>,
    pub stein: SteinFlag,
}

/// Nodes of a `k × k` square grid over `[−radius, radius]²` that lie in the
/// closed disk of that radius.
pub fn square_grid(k: usize, radius: f64) -> Vec<Vec<C>> {
    let mut out = Vec::new();
    for a in 0..k {
        for b in 0..k {
            let (x, y) = if k == 1 {
                (0.0, 0.0)
            } else {
                let step = 2.0 * radius / (k - 1) as f64;
                (-radius + a as f64 * step, -radius + b as f64 * step)
            };
            let t = C::new(x, y);
            if t.norm() <= radius * (1.0 + 1e-12) {
                out.push(vec![t]);
            }
        }
    }
    out
}

/// Offsets of the nine-point stencil: centre, edges, corners.
const STENCIL: [(f64, f64); 9] = [
    (0.0, 0.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (1.0, 1.0),
    (1.0, -1.0),
    (-1.0, 1.0),
    (-1.0, -1.0),
];

/// ∂∂̄ = Δ/4 with the isotropic nine-point Laplacian
/// `[4(E+W+N+S) + (corners) − 20 u] / (6h²)`.
fn nine_point(u: &[f64], h: f64) -> f64 {
    let edges: f64 = u[1..5].iter().sum();
    let corners: f64 = u[5..9].iter().sum();
    (4.0 * edges + corners - 20.0 * u[0]) / (6.0 * h * h) / 4.0
}

/// Finite-difference `∂²/∂t∂t̄ log‖P(f)^t‖²` at every grid node for each
/// functional, for a one-dimensional base. Each stencil point gets its own
/// Bergman model; all functionals share it.
pub fn psh_scan(
    fam: &DomainFamily,
    data: &[DualSectionData],
    t_grid: &[Vec<C>],
    h_fd: f64,
    opts: ModelOptions,
    tol: f64,
) -> Result<PshScan> {
    if fam.m != 1 || fam.n != 1 {
        return Err(Error::Precondition(
            "plurisubharmonicity scans need a one-dimensional base and planar fibres".into(),
        ));
    }
    if data.is_empty() || t_grid.is_empty() {
        return Err(Error::Config("scan needs a grid and at least one functional".into()));
    }
    if !(h_fd > 0.0) {
        return Err(Error::Config(format!("stencil step must be positive, got {h_fd}")));
    }
    let points: Vec<C> = t_grid
        .iter()
        .flat_map(|t| STENCIL.iter().map(move |&(a, b)| t[0] + C::new(a * h_fd, b * h_fd)))
        .collect();
    let logs: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&t| {
            let model = build_model(fam, &[t], opts)?;
            data.iter()
                .map(|d| {
                    let n = project_dual(&model, fam, d)?.norm_sq;
                    if !(n > 0.0) {
                        return Err(Error::Precondition(format!(
                            "projection vanishes at t = {t}; its logarithm is −∞"
                        )));
                    }
                    Ok(n.ln())
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let scans = (0..data.len())
        .map(|d| {
            let values: Vec<f64> = logs
                .chunks(STENCIL.len())
                .map(|block| {
                    let u: Vec<f64> = block.iter().map(|v| v[d]).collect();
                    nine_point(&u, h_fd)
                })
                .collect();
            ScanResult::lower_bound(t_grid.to_vec(), values, tol)
        })
        .collect();
    Ok(PshScan {
        scans,
        stein: stein_flag(fam, t_grid)?,
    })
}

fn stein_flag(fam: &DomainFamily, t_grid: &[Vec<C>]) -> Result<SteinFlag> {
    let mut min_total_levi = f64::INFINITY;
    let mut min_weight_eig = f64::INFINITY;
    for t in t_grid {
        for p in boundary_samples(fam, t, STEIN_SAMPLES)? {
            min_total_levi = min_total_levi.min(total_levi_min_eig(&fam.jet(t, &p)?));
        }
        min_weight_eig = min_weight_eig.min(weight_hessian_extremes(fam, t)?.1);
    }
    Ok(SteinFlag {
        min_total_levi,
        min_weight_eig,
        stein: min_total_levi >= -STEIN_TOL && min_weight_eig >= -STEIN_TOL,
    })
}
