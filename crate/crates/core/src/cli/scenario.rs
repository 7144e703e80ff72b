//! Scenario files: JSON objects tagged by `kind`, with expressions as
//! strings and complex numbers as `[re, im]` pairs.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bergman::{DualSectionData, ModelOptions};
use crate::error::{Error, Result};
use crate::exprs::parse;
use crate::geometry::FibreShape;
use crate::realtoy::{linspace, ConvexityMode, LineQuadrature};
use crate::variation::square_grid;

type C = Complex64;

pub type Cx = [f64; 2];

pub fn cx(z: Cx) -> C {
    C::new(z[0], z[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    /// Overrides of named tolerances.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Expected values of reported scalars.
    #[serde(default)]
    pub expect: BTreeMap<String, Expectation>,
    #[serde(default)]
    pub output: Output,
    #[serde(flatten)]
    pub task: Task,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    pub tol: f64,
}

/// Output file names, relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Output {
    pub report: Option<String>,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Task {
    Toy(ToyTask),
    Convexity(ConvexityTask),
    Lifts(LiftsTask),
    Norms(NormsTask),
    Bergman(BergmanTask),
    Vf1(KernelVariationTask),
    Psh(PshTask),
    Vf2(KernelVariationTask),
    Motion(MotionTask),
    FibreDeriv(FibreDerivTask),
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Toy(_) => "toy",
            Task::Convexity(_) => "convexity",
            Task::Lifts(_) => "lifts",
            Task::Norms(_) => "norms",
            Task::Bergman(_) => "bergman",
            Task::Vf1(_) => "vf1",
            Task::Psh(_) => "psh",
            Task::Vf2(_) => "vf2",
            Task::Motion(_) => "motion",
            Task::FibreDeriv(_) => "fibre-deriv",
        }
    }
}

/// Points of a real parameter interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineGrid {
    Range { lo: f64, hi: f64, count: usize },
    Points(Vec<f64>),
}

impl LineGrid {
    pub fn points(&self, count_override: Option<usize>) -> Result<Vec<f64>> {
        let pts = match self {
            LineGrid::Range { lo, hi, count } => linspace(*lo, *hi, count_override.unwrap_or(*count)),
            LineGrid::Points(p) => p.clone(),
        };
        if pts.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        Ok(pts)
    }
}

/// Points of a one-dimensional complex base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseGrid {
    /// The `k × k` square over `[−radius, radius]²`, cut to the disk.
    Square { k: usize, radius: f64 },
    Points(Vec<Cx>),
}

impl Default for BaseGrid {
    fn default() -> Self {
        BaseGrid::Square { k: 9, radius: 0.4 }
    }
}

impl BaseGrid {
    pub fn points(&self, k_override: Option<usize>) -> Result<Vec<Vec<C>>> {
        let pts = match self {
            BaseGrid::Square { k, radius } => {
                if !(*radius >= 0.0) {
                    return Err(Error::Config(format!("grid radius must be nonnegative, got {radius}")));
                }
                square_grid(k_override.unwrap_or(*k), *radius)
            }
            BaseGrid::Points(p) => p.iter().map(|z| vec![cx(*z)]).collect(),
        };
        if pts.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub degree: usize,
    pub radial_order: usize,
    pub angular_order: usize,
}

impl Default for ModelSpec {
    fn default() -> Self {
        let d = ModelOptions::default();
        ModelSpec {
            degree: d.degree,
            radial_order: d.radial_order,
            angular_order: d.angular_order,
        }
    }
}

impl ModelSpec {
    pub fn options(&self) -> ModelOptions {
        ModelOptions {
            degree: self.degree,
            radial_order: self.radial_order,
            angular_order: self.angular_order,
            scale: None,
        }
    }
}

fn default_window() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_unit_grid() -> LineGrid {
    LineGrid::Range {
        lo: 0.0,
        hi: 1.0,
        count: 101,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyTask {
    pub a: String,
    pub b: String,
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    /// Parameters at which the full report is recorded.
    #[serde(default)]
    pub points: Vec<f64>,
    #[serde(default = "default_unit_grid")]
    pub grid: LineGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityTask {
    pub phi: String,
    pub mode: ConvexityMode,
    pub grid: LineGrid,
    #[serde(default)]
    pub quadrature: LineQuadrature,
}

fn one() -> usize {
    1
}

fn default_samples() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftsTask {
    pub rho: String,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "one")]
    pub n: usize,
    /// Base points; for m > 1 only explicit points are accepted and each
    /// is padded with zeros after the first coordinate.
    #[serde(default)]
    pub grid: BaseGrid,
    /// Boundary samples per base point.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_norm_samples() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormsTask {
    pub h: Vec<Vec<String>>,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default)]
    pub grid: BaseGrid,
    #[serde(default = "default_norm_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BergmanTask {
    pub rho: String,
    #[serde(default)]
    pub phi: String,
    #[serde(default)]
    pub t: Cx,
    #[serde(default)]
    pub model: ModelSpec,
    /// ζ and η both range over these points.
    pub points: BaseGrid,
    /// K(ζ, η) as an expression in z1 = ζ and z2 = η.
    #[serde(default)]
    pub oracle: Option<String>,
}

fn default_h_vf() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelVariationTask {
    pub rho: String,
    #[serde(default)]
    pub phi: String,
    #[serde(default)]
    pub t0: Cx,
    #[serde(default)]
    pub alpha: usize,
    #[serde(default)]
    pub beta: usize,
    #[serde(default)]
    pub zeta: Cx,
    #[serde(default)]
    pub eta: Cx,
    #[serde(default = "default_h_vf")]
    pub h_fd: f64,
    #[serde(default)]
    pub model: ModelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalSpec {
    Point { order: usize, eta: Cx },
    Current { density: String, radius: f64 },
}

impl FunctionalSpec {
    pub fn data(&self) -> Result<DualSectionData> {
        Ok(match self {
            FunctionalSpec::Point { order, eta } => DualSectionData::PointDeriv {
                order: *order,
                eta: cx(*eta),
            },
            FunctionalSpec::Current { density, radius } => DualSectionData::CompactCurrent {
                density: parse(density)?,
                radius: *radius,
            },
        })
    }
}

fn default_h_psh() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PshTask {
    pub rho: String,
    #[serde(default)]
    pub phi: String,
    pub functionals: Vec<FunctionalSpec>,
    #[serde(default)]
    pub grid: BaseGrid,
    #[serde(default = "default_h_psh")]
    pub h_fd: f64,
    #[serde(default)]
    pub model: ModelSpec,
}

fn default_rho0() -> String {
    "abs2(z1) - 1".into()
}

fn default_levi_samples() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionTask {
    /// The motion f(z1, t1); ignored when `a` is given.
    #[serde(default)]
    pub f: Option<String>,
    #[serde(default = "default_rho0")]
    pub rho0: String,
    /// Coefficient of the motion z + a(t) z̄ of the unit disk.
    #[serde(default)]
    pub a: Option<String>,
    #[serde(default)]
    pub grid: BaseGrid,
    #[serde(default)]
    pub eta: Cx,
    #[serde(default = "default_levi_samples")]
    pub samples: usize,
    #[serde(default)]
    pub model: ModelSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeSpec {
    Interval { center: f64 },
    Planar { radial_order: usize, angular_order: usize },
}

impl ShapeSpec {
    pub fn shape(&self) -> FibreShape {
        match *self {
            ShapeSpec::Interval { center } => FibreShape::Interval { center },
            ShapeSpec::Planar {
                radial_order,
                angular_order,
            } => FibreShape::Planar {
                radial_order,
                angular_order,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FibreDerivTask {
    pub rho: String,
    pub f: String,
    pub w: Vec<String>,
    #[serde(default)]
    pub t: f64,
    #[serde(default = "default_h_vf")]
    pub h: f64,
    pub shape: ShapeSpec,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// Tolerances positive and every expression parseable.
    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.tolerances {
            if !(*v > 0.0) {
                return Err(Error::Config(format!("tolerance `{k}` must be positive, got {v}")));
            }
        }
        for (k, e) in &self.expect {
            if !(e.tol > 0.0) || !e.value.is_finite() {
                return Err(Error::Config(format!("expectation `{k}` needs a finite value and positive tol")));
            }
        }
        let mut exprs: Vec<&str> = Vec::new();
        match &self.task {
            Task::Toy(t) => exprs.extend([t.a.as_str(), t.b.as_str()]),
            Task::Convexity(t) => exprs.push(&t.phi),
            Task::Lifts(t) => exprs.push(&t.rho),
            Task::Norms(t) => exprs.extend(t.h.iter().flatten().map(String::as_str)),
            Task::Bergman(t) => {
                exprs.extend([t.rho.as_str(), t.phi.as_str()]);
                exprs.extend(t.oracle.as_deref());
            }
            Task::Vf1(t) | Task::Vf2(t) => exprs.extend([t.rho.as_str(), t.phi.as_str()]),
            Task::Psh(t) => {
                exprs.extend([t.rho.as_str(), t.phi.as_str()]);
                if t.functionals.is_empty() {
                    return Err(Error::Config("psh scenario needs at least one functional".into()));
                }
                for f in &t.functionals {
                    if let FunctionalSpec::Current { density, .. } = f {
                        exprs.push(density);
                    }
                }
            }
            Task::Motion(t) => {
                exprs.push(&t.rho0);
                exprs.extend(t.f.as_deref());
                exprs.extend(t.a.as_deref());
                if t.f.is_none() && t.a.is_none() {
                    return Err(Error::Config("motion scenario needs `f` or `a`".into()));
                }
            }
            Task::FibreDeriv(t) => {
                exprs.extend([t.rho.as_str(), t.f.as_str()]);
                exprs.extend(t.w.iter().map(String::as_str));
            }
        }
        for e in exprs {
            if !e.trim().is_empty() {
                parse(e)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tagged_kinds() {
        let s = Scenario::from_json(r#"{"kind": "toy", "a": "0", "b": "1 + t1"}"#).unwrap();
        assert_eq!(s.task.kind(), "toy");
        let s = Scenario::from_json(
            r#"{"kind": "psh", "rho": "abs2(z1) - 1",
                "functionals": [{"point": {"order": 0, "eta": [0, 0]}},
                                {"current": {"density": "1", "radius": 0.2}}],
                "grid": {"points": [[0, 0]]}}"#,
        )
        .unwrap();
        assert_eq!(s.task.kind(), "psh");
        let s = Scenario::from_json(
            r#"{"kind": "fibre-deriv", "rho": "z1*(z1 - 1)", "f": "1", "w": ["0"],
                "shape": {"interval": {"center": 0.5}}}"#,
        )
        .unwrap();
        assert_eq!(s.task.kind(), "fibre-deriv");
    }

    #[test]
    fn rejects_bad_scenarios() {
        assert!(Scenario::from_json(r#"{"kind": "toy", "a": "0", "b": "1 +"}"#).is_err());
        assert!(Scenario::from_json(r#"{"kind": "nope"}"#).is_err());
        assert!(Scenario::from_json(
            r#"{"kind": "toy", "a": "0", "b": "1", "tolerances": {"decomposition": -1}}"#
        )
        .is_err());
        assert!(Scenario::from_json(r#"{"kind": "motion"}"#).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(BaseGrid::default().points(Some(3)).unwrap().len(), 5);
        assert!(BaseGrid::Points(vec![]).points(None).is_err());
        let g = LineGrid::Range { lo: 0.0, hi: 1.0, count: 11 };
        assert_eq!(g.points(Some(3)).unwrap(), vec![0.0, 0.5, 1.0]);
    }
}
