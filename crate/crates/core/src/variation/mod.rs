//! Variation of Bergman data over the base: the first-order kernel variation
//! formula, plurisubharmonicity scans, the mixed second variation for
//! product families with pluriharmonic weight, and holomorphic motions.
//!
//! All t-derivatives are central differences at steps `h` and `h/2`
//! combined by Richardson extrapolation; complex directions are assembled
//! from the real and imaginary axis differences.

mod formulas;
mod motion;
mod psh;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

pub use formulas::{vf1_check, vf2_product_flat_check, KernelEntry, Vf1Result, Vf2Result};
pub use motion::{
    conjugate_linear_motion, cor215_check, inversion_residual, motion_flatness,
    motion_levi_flat_check, Cor215Report, MotionFamily, MotionSpec, MOTION_JET_STEP,
};
pub use psh::{psh_scan, square_grid, PshScan, SteinFlag};

type C = Complex64;

/// A scanned quantity over a grid of base points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    #[serde(serialize_with = "serialize_nodes")]
    pub nodes: Vec<Vec<C>>,
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub argmin: usize,
    pub argmax: usize,
    pub tol: f64,
    pub passed: bool,
}

fn serialize_nodes<S: serde::Serializer>(
    nodes: &[Vec<C>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(nodes.len()))?;
    for n in nodes {
        let flat: Vec<[f64; 2]> = n.iter().map(|z| [z.re, z.im]).collect();
        seq.serialize_element(&flat)?;
    }
    seq.end()
}

impl ScanResult {
    fn new(nodes: Vec<Vec<C>>, values: Vec<f64>, tol: f64) -> ScanResult {
        let mut r = ScanResult {
            nodes,
            values,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            argmin: 0,
            argmax: 0,
            tol,
            passed: false,
        };
        for (i, &v) in r.values.iter().enumerate() {
            if v < r.min {
                r.min = v;
                r.argmin = i;
            }
            if v > r.max {
                r.max = v;
                r.argmax = i;
            }
        }
        r
    }

    /// Passes when every value is at least `−tol`.
    pub fn lower_bound(nodes: Vec<Vec<C>>, values: Vec<f64>, tol: f64) -> ScanResult {
        let mut r = ScanResult::new(nodes, values, tol);
        r.passed = r.values.iter().all(|v| *v >= -tol);
        r
    }

    /// Passes when every value is below `tol`.
    pub fn upper_bound(nodes: Vec<Vec<C>>, values: Vec<f64>, tol: f64) -> ScanResult {
        let mut r = ScanResult::new(nodes, values, tol);
        r.passed = r.values.iter().all(|v| *v < tol);
        r
    }
}

/// Evaluates `f` at every point in parallel, keeping input order.
fn eval_points<F>(f: &F, points: &[Vec<C>]) -> Result<Vec<Vec<C>>>
where
    F: Fn(&[C]) -> Result<Vec<C>> + Sync,
{
    points.par_iter().map(|p| f(p)).collect()
}

fn shifted(t0: &[C], j: usize, d: C) -> Vec<C> {
    let mut t = t0.to_vec();
    t[j] += d;
    t
}

fn combine(parts: &[(&[C], C)]) -> Vec<C> {
    let n = parts[0].0.len();
    (0..n)
        .map(|i| parts.iter().map(|(v, c)| v[i] * c).sum())
        .collect()
}

/// ∂f/∂t^j (or ∂f/∂t̄^j) of a vector-valued function.
pub fn fd_dt<F>(f: &F, t0: &[C], j: usize, h: f64, conjugated: bool) -> Result<Vec<C>>
where
    F: Fn(&[C]) -> Result<Vec<C>> + Sync,
{
    let steps = [h, 0.5 * h];
    let mut points = Vec::with_capacity(8);
    for s in steps {
        for d in [C::new(s, 0.0), C::new(-s, 0.0), C::new(0.0, s), C::new(0.0, -s)] {
            points.push(shifted(t0, j, d));
        }
    }
    let vals = eval_points(f, &points)?;
    let sign = if conjugated { 1.0 } else { -1.0 };
    let wirt = |k: usize, s: f64| {
        let a = 0.5 / (2.0 * s);
        let b = C::new(0.0, sign * a);
        combine(&[
            (&vals[k], C::new(a, 0.0)),
            (&vals[k + 1], C::new(-a, 0.0)),
            (&vals[k + 2], b),
            (&vals[k + 3], -b),
        ])
    };
    let coarse = wirt(0, h);
    let fine = wirt(4, 0.5 * h);
    Ok(combine(&[(&fine, C::new(4.0 / 3.0, 0.0)), (&coarse, C::new(-1.0 / 3.0, 0.0))]))
}

/// ∂²f/∂t^j∂t̄^j = Δ_j f / 4 with the five-point Laplacian.
pub fn fd_dt_dtbar<F>(f: &F, t0: &[C], j: usize, h: f64) -> Result<Vec<C>>
where
    F: Fn(&[C]) -> Result<Vec<C>> + Sync,
{
    let mut points = vec![t0.to_vec()];
    for s in [h, 0.5 * h] {
        for d in [C::new(s, 0.0), C::new(-s, 0.0), C::new(0.0, s), C::new(0.0, -s)] {
            points.push(shifted(t0, j, d));
        }
    }
    let vals = eval_points(f, &points)?;
    let lap = |k: usize, s: f64| {
        let w = C::new(0.25 / (s * s), 0.0);
        combine(&[
            (&vals[k], w),
            (&vals[k + 1], w),
            (&vals[k + 2], w),
            (&vals[k + 3], w),
            (&vals[0], -w * 4.0),
        ])
    };
    let coarse = lap(1, h);
    let fine = lap(5, 0.5 * h);
    Ok(combine(&[(&fine, C::new(4.0 / 3.0, 0.0)), (&coarse, C::new(-1.0 / 3.0, 0.0))]))
}
