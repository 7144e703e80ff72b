//! Built-in scenarios, runnable as `fixture:NAME`.

pub struct Fixture {
    pub name: &'static str,
    pub kind: &'static str,
    /// What the fixture exercises.
    pub checks: &'static str,
    pub scenario: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "toy-convex",
        kind: "toy",
        checks: "Φ̈ = Geo + R with convex total space; Geo = 1.6 at t = 0.5",
        scenario: r#"{"kind": "toy", "a": "0", "b": "1 + t1 - t1^2", "points": [0.5],
  "expect": {"geo@0.5": {"value": 1.6, "tol": 1e-10}, "rem@0.5": {"value": 0, "tol": 1e-12}}}"#,
    },
    Fixture {
        name: "toy-trivial",
        kind: "toy",
        checks: "translated interval: every term vanishes, trivial and Φ affine",
        scenario: r#"{"kind": "toy", "a": "t1", "b": "1 + t1", "points": [0.5],
  "expect": {"trivial": {"value": 1, "tol": 0.5}, "phi_affine": {"value": 1, "tol": 0.5}}}"#,
    },
    Fixture {
        name: "toy-concave-ends",
        kind: "toy",
        checks: "a concave: positivity of Geo skipped, Geo = −2 at t = 0",
        scenario: r#"{"kind": "toy", "a": "-1 - t1^2", "b": "1 + t1^2", "points": [0],
  "expect": {"geo@0": {"value": -2, "tol": 1e-10}}}"#,
    },
    Fixture {
        name: "prekopa-gaussian",
        kind: "convexity",
        checks: "minimal-integral convexity, φ = t² + x² gives F̈ = 2",
        scenario: r#"{"kind": "convexity", "phi": "t1^2 + z1^2", "mode": "prekopa",
  "grid": {"range": {"lo": -1, "hi": 1, "count": 9}},
  "expect": {"min_fdd": {"value": 2, "tol": 1e-4}, "max_fdd": {"value": 2, "tol": 1e-4}}}"#,
    },
    Fixture {
        name: "holder-gaussian",
        kind: "convexity",
        checks: "log-integral convexity, φ = tx − x² gives F̈ = 0.5",
        scenario: r#"{"kind": "convexity", "phi": "t1*z1 - z1^2", "mode": "holder",
  "grid": {"range": {"lo": -1, "hi": 1, "count": 9}},
  "expect": {"min_fdd": {"value": 0.5, "tol": 1e-4}, "max_fdd": {"value": 0.5, "tol": 1e-4}}}"#,
    },
    Fixture {
        name: "prekopa-flat",
        kind: "convexity",
        checks: "t-independent weight gives F̈ = 0",
        scenario: r#"{"kind": "convexity", "phi": "z1^2", "mode": "prekopa",
  "grid": {"range": {"lo": -1, "hi": 1, "count": 5}},
  "expect": {"min_fdd": {"value": 0, "tol": 1e-6}, "max_fdd": {"value": 0, "tol": 1e-6}}}"#,
    },
    Fixture {
        name: "product-disk",
        kind: "lifts",
        checks: "product family: tangent lifts, θ = 0",
        scenario: r#"{"kind": "lifts", "rho": "abs2(z1) - 1", "grid": {"square": {"k": 3, "radius": 0.4}},
  "expect": {"max_abs_theta": {"value": 0, "tol": 1e-10}}}"#,
    },
    Fixture {
        name: "levi-flat-exp",
        kind: "lifts",
        checks: "geodesic curvature of the disks of radius e^{Re t}: θ = 0, Levi-flat total boundary",
        scenario: r#"{"kind": "lifts", "rho": "abs2(z1) - exp(2*re(t1))", "grid": {"square": {"k": 3, "radius": 0.4}},
  "expect": {"max_abs_theta": {"value": 0, "tol": 1e-10}, "interpolation": {"value": 1, "tol": 0.5}}}"#,
    },
    Fixture {
        name: "shrinking-disk",
        kind: "lifts",
        checks: "geodesic curvature of {|z|² e^{|t|²} < 1}: θ = 1",
        scenario: r#"{"kind": "lifts", "rho": "abs2(z1)*exp(abs2(t1)) - 1", "grid": {"square": {"k": 3, "radius": 0.4}},
  "expect": {"min_theta": {"value": 1, "tol": 1e-10}, "max_theta": {"value": 1, "tol": 1e-10}}}"#,
    },
    Fixture {
        name: "growing-non-pseudoconvex",
        kind: "lifts",
        checks: "geodesic curvature of {|z|² < 1 + |t|²}: θ = −0.8 at t = 0.5",
        scenario: r#"{"kind": "lifts", "rho": "abs2(z1) - 1 - abs2(t1)", "grid": {"points": [[0.5, 0]]},
  "expect": {"min_theta": {"value": -0.8, "tol": 1e-8}, "max_theta": {"value": -0.8, "tol": 1e-8}}}"#,
    },
    Fixture {
        name: "semmes-flat",
        kind: "norms",
        checks: "pluriharmonic log-norm: Semmes tensor, norm θ and domain θ all vanish",
        scenario: r#"{"kind": "norms", "h": [["exp(t1 + conj(t1))"]], "grid": {"square": {"k": 3, "radius": 0.4}},
  "expect": {"flat": {"value": 1, "tol": 0.5}}}"#,
    },
    Fixture {
        name: "semmes-exp",
        kind: "norms",
        checks: "norm e^{|t|²}|z|²: all three curvatures positive",
        scenario: r#"{"kind": "norms", "h": [["exp(abs2(t1))"]], "grid": {"square": {"k": 3, "radius": 0.4}},
  "expect": {"flat": {"value": 0, "tol": 0.5}}}"#,
    },
    Fixture {
        name: "unit-disk-kernel",
        kind: "bergman",
        checks: "unit-disk kernel against 1/(2π(1 − ζη̄)²) on a 5 × 5 grid",
        scenario: r#"{"kind": "bergman", "rho": "abs2(z1) - 1", "points": {"points": [[-0.5, -0.5], [-0.25, -0.5], [0.0, -0.5], [0.25, -0.5], [0.5, -0.5], [-0.5, -0.25], [-0.25, -0.25], [0.0, -0.25], [0.25, -0.25], [0.5, -0.25], [-0.5, 0.0], [-0.25, 0.0], [0.0, 0.0], [0.25, 0.0], [0.5, 0.0], [-0.5, 0.25], [-0.25, 0.25], [0.0, 0.25], [0.25, 0.25], [0.5, 0.25], [-0.5, 0.5], [-0.25, 0.5], [0.0, 0.5], [0.25, 0.5], [0.5, 0.5]]},
  "oracle": "1/(2*pi*(1 - z1*conj(z2))^2)"}"#,
    },
    Fixture {
        name: "vf1-radius",
        kind: "vf1",
        checks: "first variation on disks of radius e^{Re t}: lhs = −1/(2π), boundary term 1/(2π)",
        scenario: r#"{"kind": "vf1", "rho": "abs2(z1) - exp(2*re(t1))",
  "expect": {"lhs_re": {"value": -0.15915494309189535, "tol": 1e-4},
             "rhs_interior_re": {"value": 0, "tol": 1e-4},
             "rhs_boundary_re": {"value": 0.15915494309189535, "tol": 1e-4}}}"#,
    },
    Fixture {
        name: "vf1-pluriharmonic",
        kind: "vf1",
        checks: "first variation on the product disk with weight 2 Re(tz)",
        scenario: r#"{"kind": "vf1", "rho": "abs2(z1) - 1", "phi": "2*re(t1*z1)", "zeta": [0.3, 0.1], "eta": [-0.2, 0.2],
  "tolerances": {"residual": 2e-4}}"#,
    },
    Fixture {
        name: "psh-shrinking",
        kind: "psh",
        checks: "log K(0,0;t) on {|z|² e^{|t|²} < 1} has ∂∂̄ = 1",
        scenario: r#"{"kind": "psh", "rho": "abs2(z1)*exp(abs2(t1)) - 1",
  "functionals": [{"point": {"order": 0, "eta": [0, 0]}}], "grid": {"square": {"k": 1, "radius": 0}},
  "expect": {"min[0]": {"value": 1, "tol": 1e-3}}}"#,
    },
    Fixture {
        name: "psh-stein",
        kind: "psh",
        checks: "plurisubharmonic norms of point-derivative and compact-current sections",
        scenario: r#"{"kind": "psh", "rho": "abs2(z1)*exp(abs2(t1)) - 1", "phi": "abs2(z1)",
  "functionals": [{"point": {"order": 0, "eta": [0.1, 0]}}, {"point": {"order": 1, "eta": [0, 0.1]}},
                  {"point": {"order": 2, "eta": [0, 0]}}, {"current": {"density": "1 + re(z1)", "radius": 0.3}}],
  "grid": {"square": {"k": 3, "radius": 0.2}}}"#,
    },
    Fixture {
        name: "psh-non-pseudoconvex",
        kind: "psh",
        checks: "diagnostic on {|z|² < 1 + |t|²}: flagged non-Stein, ∂∂̄ log K = −1",
        scenario: r#"{"kind": "psh", "rho": "abs2(z1) - 1 - abs2(t1)",
  "functionals": [{"point": {"order": 0, "eta": [0, 0]}}], "grid": {"square": {"k": 1, "radius": 0}},
  "expect": {"min[0]": {"value": -1, "tol": 1e-3}, "stein": {"value": 0, "tol": 0.5}}}"#,
    },
    Fixture {
        name: "psh-product",
        kind: "psh",
        checks: "product family: ∂∂̄ log K vanishes",
        scenario: r#"{"kind": "psh", "rho": "abs2(z1) - 1",
  "functionals": [{"point": {"order": 1, "eta": [0.2, 0]}}], "grid": {"square": {"k": 1, "radius": 0}},
  "expect": {"min[0]": {"value": 0, "tol": 1e-6}}}"#,
    },
    Fixture {
        name: "vf2-pluriharmonic",
        kind: "vf2",
        checks: "second variation on the product disk with weight 2 Re(tz)",
        scenario: r#"{"kind": "vf2", "rho": "abs2(z1) - 1", "phi": "2*re(t1*z1)"}"#,
    },
    Fixture {
        name: "vf2-rescaling",
        kind: "vf2",
        checks: "second variation with z-independent weight 2 Re t",
        scenario: r#"{"kind": "vf2", "rho": "abs2(z1) - 1", "phi": "2*re(t1)", "zeta": [0.2, 0], "eta": [0, 0.3]}"#,
    },
    Fixture {
        name: "motion-a-half-t",
        kind: "motion",
        checks: "motion z + (t/2) z̄: flatness 0.5/(1 − |t|²/4), non-trivial",
        scenario: r#"{"kind": "motion", "a": "t1/2", "grid": {"square": {"k": 3, "radius": 0.4}},
  "expect": {"trivial": {"value": 0, "tol": 0.5}}}"#,
    },
    Fixture {
        name: "motion-a-zero",
        kind: "motion",
        checks: "identity motion: trivial, flatness vanishes",
        scenario: r#"{"kind": "motion", "a": "0", "grid": {"square": {"k": 3, "radius": 0.4}},
  "expect": {"trivial": {"value": 1, "tol": 0.5}}}"#,
    },
    Fixture {
        name: "motion-a-t-squared",
        kind: "motion",
        checks: "motion z + t² z̄: non-trivial, flatness zero only at t = 0",
        scenario: r#"{"kind": "motion", "a": "t1^2", "grid": {"square": {"k": 3, "radius": 0.4}},
  "expect": {"trivial": {"value": 0, "tol": 0.5}}}"#,
    },
    Fixture {
        name: "motion-exp",
        kind: "motion",
        checks: "motion z e^t: Levi-flat total boundary",
        scenario: r#"{"kind": "motion", "f": "z1*exp(t1)", "grid": {"square": {"k": 3, "radius": 0.4}}}"#,
    },
    Fixture {
        name: "fibre-deriv-interval",
        kind: "fibre-deriv",
        checks: "moving interval (0, 1 + t), f = x²: both sides equal 1",
        scenario: r#"{"kind": "fibre-deriv", "rho": "z1*(z1 - 1 - t1)", "f": "z1^2", "w": ["z1/(1 + t1)"],
  "shape": {"interval": {"center": 0.5}},
  "expect": {"lhs": {"value": 1, "tol": 1e-6}, "rhs": {"value": 1, "tol": 1e-6}}}"#,
    },
    Fixture {
        name: "fibre-deriv-fixed",
        kind: "fibre-deriv",
        checks: "fixed interval (0, 1), f = tx: both sides equal 0.5",
        scenario: r#"{"kind": "fibre-deriv", "rho": "z1*(z1 - 1)", "f": "t1*z1", "w": ["0"],
  "shape": {"interval": {"center": 0.5}},
  "expect": {"lhs": {"value": 0.5, "tol": 1e-6}, "rhs": {"value": 0.5, "tol": 1e-10}}}"#,
    },
];

pub fn find(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

/// The catalog as an aligned text table.
pub fn table() -> String {
    let w = FIXTURES.iter().map(|f| f.name.len()).max().unwrap_or(0);
    let k = FIXTURES.iter().map(|f| f.kind.len()).max().unwrap_or(0);
    let mut s = format!("{:w$}  {:k$}  checks\n", "name", "kind");
    for f in FIXTURES {
        s.push_str(&format!("{:w$}  {:k$}  {}\n", f.name, f.kind, f.checks));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::Scenario;

    #[test]
    fn fixtures_parse_and_match_kind() {
        for f in FIXTURES {
            let s = Scenario::from_json(f.scenario).unwrap_or_else(|e| panic!("{}: {e}", f.name));
            assert_eq!(s.task.kind(), f.kind, "{}", f.name);
        }
        let mut names: Vec<_> = FIXTURES.iter().map(|f| f.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), FIXTURES.len());
    }

    #[test]
    fn table_lists_required_names() {
        let t = table();
        for n in ["levi-flat-exp", "semmes-flat", "motion-a-half-t"] {
            assert!(t.lines().any(|l| l.starts_with(n)), "{n}");
        }
    }
}
