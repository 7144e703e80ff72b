//! Acceptance suite: one line per criterion, exit status nonzero on any
//! failure. Oracles are closed forms evaluated here, independent of the
//! library code paths they check.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cbmlab::bergman::{build_model, reproducing_check, DualSectionData, ModelOptions};
use cbmlab::exprs::parse;
use cbmlab::geometry::{
    boundary_samples, fibre_integral_derivative_check, sample_points, DefiningFunction, DomainFamily,
    FibreShape,
};
use cbmlab::lifts::{geodesic_curvature, lift_log_boundary};
use cbmlab::normfam::{prop32_equivalence, HermitianNormFamily};
use cbmlab::realtoy::{convexity_scan, linspace, toy_positivity_scan, toy_report, ConvexityMode, IntervalFamily, LineQuadrature};
use cbmlab::variation::{
    conjugate_linear_motion, cor215_check, motion_flatness, motion_levi_flat_check, psh_scan, square_grid,
    vf1_check, vf2_product_flat_check, KernelEntry, MotionSpec,
};

type Outcome = Result<String, String>;

type Criterion = (&'static str, f64, fn() -> Outcome);

/// Closed-form second variation from ζ, η and K0(ζ, η).
type Vf2Oracle = fn(C, C, C) -> C;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn t0() -> [C; 1] {
    [c(0.0, 0.0)]
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const FOUR_FAMILIES: [(&str, &str); 4] = [
    ("product", "abs2(z1) - 1"),
    ("exp-radius Levi-flat", "abs2(z1) - exp(2*re(t1))"),
    ("shrinking pseudoconvex", "abs2(z1)*exp(abs2(t1)) - 1"),
    ("growing non-pseudoconvex", "abs2(z1) - 1 - abs2(t1)"),
];

fn poly_text(c: &[f64]) -> String {
    c.iter()
        .enumerate()
        .map(|(k, v)| format!("({v:e})*t1^{k}"))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

fn criterion_1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xacce_0001);
    let (mut dec, mut fd_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let deg = rng.gen_range(0..=4);
        let a: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-0.25..0.25)).collect();
        let mut b: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-0.25..0.25)).collect();
        b[0] += 2.0;
        let fam = IntervalFamily::parse(&poly_text(&a), &poly_text(&b), (0.0, 1.0)).map_err(err)?;
        let phi = |t: f64| -(poly_eval(&b, t) - poly_eval(&a, t)).ln();
        for t in linspace(0.05, 0.95, 10) {
            let r = toy_report(&fam, t).map_err(err)?;
            dec = dec.max((r.phi_ddot - r.geo - r.rem).abs());
            let fd = |h: f64| (phi(t + h) - 2.0 * phi(t) + phi(t - h)) / (h * h);
            let oracle = (4.0 * fd(5e-4) - fd(1e-3)) / 3.0;
            fd_err = fd_err.max((r.phi_ddot - oracle).abs());
        }
    }
    ensure(
        dec < 1e-10 && fd_err < 1e-6,
        format!("50 families: max |Φ̈ − Geo − R| = {dec:.1e} (< 1e-10), max |Φ̈ − FD| = {fd_err:.1e} (< 1e-6)"),
    )
}

fn criterion_2() -> Outcome {
    let families = [("0", "1 + t1 - t1^2"), ("t1", "1 + t1"), ("2*t1", "1 + 2*t1"), ("0", "1 + t1"), ("-1 - t1^2", "1 + t1^2")];
    let grid = linspace(0.0, 1.0, 101);
    let (mut min_rem, mut min_geo) = (f64::INFINITY, f64::INFINITY);
    let mut convex = 0;
    for (a, b) in families {
        let fam = IntervalFamily::parse(a, b, (0.0, 1.0)).map_err(err)?;
        let v = toy_positivity_scan(&fam, &grid).map_err(err)?;
        min_rem = min_rem.min(v.min_rem);
        if let Some(g) = v.min_geo {
            convex += 1;
            min_geo = min_geo.min(g);
        }
    }
    // Geo = 2/(1 + t − t²) for a = 0, b = 1 + t − t².
    let fam = IntervalFamily::parse("0", "1 + t1 - t1^2", (0.0, 1.0)).map_err(err)?;
    let mut oracle: f64 = 0.0;
    for &t in &grid {
        oracle = oracle.max((toy_report(&fam, t).map_err(err)?.geo - 2.0 / (1.0 + t - t * t)).abs());
    }
    ensure(
        min_rem >= -1e-12 && min_geo >= -1e-10 && convex == 4 && oracle < 1e-12,
        format!("min R = {min_rem:.1e} (≥ −1e-12), min Geo = {min_geo:.3} over {convex} convex fixtures (≥ −1e-10), Geo oracle error {oracle:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let grid = linspace(-1.0, 1.0, 11);
    let q = LineQuadrature::default();
    // −log∫e^{−t²−x²}dx = t² − log√π and log∫e^{tx−x²}dx = t²/4 + log√π.
    let cases = [("t1^2 + z1^2", ConvexityMode::Prekopa, 2.0), ("t1*z1 - z1^2", ConvexityMode::Holder, 0.5)];
    let mut parts = Vec::new();
    let mut ok = true;
    for (phi, mode, oracle) in cases {
        let s = convexity_scan(&parse(phi).map_err(err)?, mode, &grid, q, 1e-4).map_err(err)?;
        let dev = s.scan.values.iter().map(|v| (v - oracle).abs()).fold(0.0, f64::max);
        ok &= dev < 1e-4;
        parts.push(format!("{phi}: max |F̈ − {oracle}| = {dev:.1e}"));
    }
    ensure(ok, format!("{} (< 1e-4)", parts.join(", ")))
}

fn criterion_4() -> Outcome {
    let grid = square_grid(3, 0.4);
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, rho) in FOUR_FAMILIES {
        let fam = DomainFamily::parse(rho, "", 1, 1).map_err(err)?;
        let mut m: f64 = 0.0;
        for t in &grid {
            for p in boundary_samples(&fam, t, 64).map_err(err)? {
                let lift = lift_log_boundary(&fam, t, &p).map_err(err)?;
                m = m.max(lift.max_tangency(&fam.jet(t, &p).map_err(err)?));
            }
        }
        worst = worst.max(m);
        parts.push(format!("{name} {m:.0e}"));
    }
    ensure(
        worst < 1e-8,
        format!("max |V(ρ)| over 64 samples × 9 base points: {} (< 1e-8)", parts.join(", ")),
    )
}

fn criterion_5() -> Outcome {
    let cases: [(&str, C, f64, f64); 3] = [
        ("abs2(z1)*exp(abs2(t1)) - 1", c(0.3, -0.2), 1.0, 1e-10),
        ("abs2(z1) - exp(2*re(t1))", c(0.3, -0.2), 0.0, 1e-10),
        ("abs2(z1) - 1 - abs2(t1)", c(0.5, 0.0), -1.0 / 1.25, 1e-8),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (rho, t, oracle, tol) in cases {
        let fam = DomainFamily::parse(rho, "", 1, 1).map_err(err)?;
        let (mut dev3, mut dev_direct, mut route): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for p in boundary_samples(&fam, &[t], 64).map_err(err)? {
            let g = geodesic_curvature(&fam, &[t], &p).map_err(err)?;
            dev3 = dev3.max((g.theta[(0, 0)].re - oracle).abs());
            dev_direct = dev_direct.max((g.theta_direct[(0, 0)].re - oracle).abs());
            route = route.max(g.route_diff);
        }
        ok &= dev3 < tol && dev_direct < tol && route < 1e-8;
        parts.push(format!("θ = {oracle:.2}: assembly {dev3:.0e}, pairing {dev_direct:.0e}, routes {route:.0e}"));
    }
    ensure(ok, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let grid = square_grid(3, 0.4);
    let mut min_excess = f64::INFINITY;
    for (_, rho) in FOUR_FAMILIES {
        let fam = DomainFamily::parse(rho, "", 1, 1).map_err(err)?;
        for t in &grid {
            for p in boundary_samples(&fam, t, 32).map_err(err)? {
                min_excess = min_excess.min(geodesic_curvature(&fam, t, &p).map_err(err)?.min_eig_excess());
            }
        }
    }
    let zs: Vec<Vec<C>> = sample_points(0xacce_0006, 12, 1, 1.0)
        .into_iter()
        .filter(|z| z[0].norm() > 1e-3)
        .collect();
    let mut ok = min_excess >= -1e-10;
    let mut parts = vec![format!("min eig(θ − c) = {min_excess:.1e}")];
    for (h, flat) in [("exp(t1 + conj(t1))", true), ("exp(abs2(t1))", false)] {
        let fam = HermitianNormFamily::parse(&[vec![h.to_string()]], 1).map_err(err)?;
        let r = prop32_equivalence(&fam, &grid, &zs, 1e-8).map_err(err)?;
        let expected = r.semmes_flat == flat && r.norm_flat == flat && r.domain_flat == flat;
        ok &= r.equivalent && expected;
        parts.push(format!(
            "h = {h}: flat = ({}, {}, {})",
            r.semmes_flat, r.norm_flat, r.domain_flat
        ));
    }
    ensure(ok, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let fam = DomainFamily::parse("abs2(z1) - 1", "", 1, 1).map_err(err)?;
    let model = build_model(&fam, &t0(), ModelOptions::default()).map_err(err)?;
    let axis = linspace(-0.5, 0.5, 5);
    let pts: Vec<C> = axis.iter().flat_map(|&y| axis.iter().map(move |&x| c(x, y))).collect();
    let (mut dev, mut rep): (f64, f64) = (0.0, 0.0);
    for &eta in &pts {
        rep = rep.max(reproducing_check(&model, eta, 0).integral);
        for &zeta in &pts {
            let oracle = 1.0 / (2.0 * PI * (c(1.0, 0.0) - zeta * eta.conj()).powi(2));
            dev = dev.max((model.kernel(zeta, eta) - oracle).norm());
        }
    }
    ensure(
        dev < 1e-6 && rep < 1e-10 && pts.len() == 25,
        format!("max |K − 1/(2π(1 − ζη̄)²)| = {dev:.1e} over {} pairs (< 1e-6), reproducing residual {rep:.1e} (< 1e-10)", pts.len() * pts.len()),
    )
}

fn criterion_8() -> Outcome {
    let opts = ModelOptions::default();
    let zero = KernelEntry { alpha: 0, beta: 0, zeta: c(0.0, 0.0), eta: c(0.0, 0.0) };
    // K(0,0;t) = e^{−2 Re t}/(2π), so ∂_t K = −1/(2π) at t = 0.
    let k = 1.0 / (2.0 * PI);
    let radius = DomainFamily::parse("abs2(z1) - exp(2*re(t1))", "", 1, 1).map_err(err)?;
    let r = vf1_check(&radius, &t0(), 0, zero, 1e-3, opts).map_err(err)?;
    let (dl, di, db) = ((r.lhs - (-k)).norm(), r.rhs_interior.norm(), (r.rhs_boundary - k).norm());
    let ph = DomainFamily::parse("abs2(z1) - 1", "2*re(t1*z1)", 1, 1).map_err(err)?;
    let entry = KernelEntry { alpha: 0, beta: 0, zeta: c(0.3, 0.1), eta: c(-0.2, 0.2) };
    let p = vf1_check(&ph, &t0(), 0, entry, 1e-3, opts).map_err(err)?;
    ensure(
        dl < 1e-4 && di < 1e-4 && db < 1e-4 && p.residual() < 2e-4,
        format!(
            "radius family: lhs {:.6} (err {dl:.0e}), rhs_interior err {di:.0e}, rhs_boundary {:.6} (err {db:.0e}); pluriharmonic residual {:.1e} (< 2e-4)",
            r.lhs.re, r.rhs_boundary.re, p.residual()
        ),
    )
}

fn criterion_9() -> Outcome {
    let opts = ModelOptions::default();
    let origin = vec![vec![c(0.0, 0.0)]];
    let point0 = DualSectionData::PointDeriv { order: 0, eta: c(0.0, 0.0) };
    let shrinking = DomainFamily::parse("abs2(z1)*exp(abs2(t1)) - 1", "", 1, 1).map_err(err)?;
    let s = psh_scan(&shrinking, std::slice::from_ref(&point0), &origin, 1e-2, opts, 1e-3).map_err(err)?;
    let one = s.scans[0].values[0];

    let stein = DomainFamily::parse("abs2(z1)*exp(abs2(t1)) - 1", "abs2(z1)", 1, 1).map_err(err)?;
    let data = vec![
        DualSectionData::PointDeriv { order: 0, eta: c(0.1, 0.0) },
        DualSectionData::PointDeriv { order: 1, eta: c(0.0, 0.1) },
        DualSectionData::PointDeriv { order: 2, eta: c(0.0, 0.0) },
        DualSectionData::CompactCurrent { density: parse("1 + re(z1)").map_err(err)?, radius: 0.3 },
    ];
    let st = psh_scan(&stein, &data, &square_grid(3, 0.2), 1e-2, opts, 1e-3).map_err(err)?;
    let stein_min = st.scans.iter().map(|s| s.min).fold(f64::INFINITY, f64::min);

    let bad = DomainFamily::parse("abs2(z1) - 1 - abs2(t1)", "", 1, 1).map_err(err)?;
    let b = psh_scan(&bad, &[point0], &origin, 1e-2, opts, 1e-3).map_err(err)?;
    let minus_one = b.scans[0].values[0];
    ensure(
        (one - 1.0).abs() < 1e-3 && s.stein.stein && st.stein.stein && stein_min >= -1e-3 && !b.stein.stein && (minus_one + 1.0).abs() < 1e-3,
        format!(
            "shrinking disk {one:.6} (1 ± 1e-3); Stein min over α ∈ {{0,1,2}} and a current {stein_min:.3} (≥ −1e-3); non-pseudoconvex flagged = {}, value {minus_one:.6} (−1 ± 1e-3)",
            !b.stein.stein
        ),
    )
}

fn criterion_10() -> Outcome {
    let opts = ModelOptions::default();
    let k0 = |z: C, e: C| 1.0 / (2.0 * PI * (c(1.0, 0.0) - z * e.conj()).powi(2));
    // K^t = K0 e^{tζ + conj(tη)} for φ = 2 Re(tz) and K^t = K0 e^{2 Re t} for φ = 2 Re t.
    let cases: [(&str, C, C, Vf2Oracle); 3] = [
        ("2*re(t1*z1)", c(0.0, 0.0), c(0.0, 0.0), |z, e, k| z * e.conj() * k),
        ("2*re(t1*z1)", c(0.3, 0.1), c(-0.2, 0.2), |z, e, k| z * e.conj() * k),
        ("2*re(t1)", c(0.2, 0.0), c(0.0, 0.3), |_, _, k| k),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (phi, zeta, eta, oracle) in cases {
        let fam = DomainFamily::parse("abs2(z1) - 1", phi, 1, 1).map_err(err)?;
        let entry = KernelEntry { alpha: 0, beta: 0, zeta, eta };
        let r = vf2_product_flat_check(&fam, &t0(), 0, entry, 1e-3, opts).map_err(err)?;
        let dev = (r.lhs - oracle(zeta, eta, k0(zeta, eta))).norm();
        ok &= r.residual() < 1e-3 && dev < 1e-3;
        parts.push(format!("φ = {phi} at ζ = {zeta}, η = {eta}: residual {:.1e}, lhs vs closed form {dev:.1e}", r.residual()));
    }
    ensure(ok, format!("{} (< 1e-3)", parts.join("; ")))
}

fn flatness_at_zero(a: &str) -> Result<C, String> {
    let spec = conjugate_linear_motion(&parse(a).map_err(err)?).map_err(err)?;
    let model = build_model(&spec.family(), &t0(), ModelOptions::default()).map_err(err)?;
    Ok(motion_flatness(&spec, &t0(), c(0.0, 0.0), &model).map_err(err)?[0])
}

fn criterion_11() -> Outcome {
    let half = flatness_at_zero("t1/2")?;
    let quarter = flatness_at_zero("t1/4")?;
    let linear = (half - quarter * 2.0).norm();

    let grid = square_grid(3, 0.4);
    let opts = ModelOptions::default();
    let mut verdicts = Vec::new();
    let mut ok = (half - 0.5).norm() < 1e-6 && linear < 1e-6;
    for (a, trivial) in [("0", true), ("t1/2", false), ("t1^2", false)] {
        let r = cor215_check(&parse(a).map_err(err)?, &grid, 1e-8, opts).map_err(err)?;
        ok &= r.consistent && r.trivial == trivial;
        verdicts.push(format!("{a}: {}", if r.trivial { "trivial" } else { "non-trivial" }));
    }
    let mut max_theta: f64 = 0.0;
    for f in ["z1*exp(t1)", "z1", "z1 + (t1/2)*conj(z1)"] {
        let spec = MotionSpec::parse(f, "abs2(z1) - 1", 1).map_err(err)?;
        max_theta = max_theta.max(motion_levi_flat_check(&spec, &grid, 16, 1e-6).map_err(err)?.max);
    }
    ok &= max_theta < 1e-6;
    ensure(
        ok,
        format!(
            "flatness {:.8} for a = t/2 (0.5 ± 1e-6), linearity defect {linear:.0e}; verdicts {} consistent; Levi-flat max |θ| = {max_theta:.0e} (< 1e-6)",
            half.re,
            verdicts.join(", ")
        ),
    )
}

fn criterion_12() -> Outcome {
    let p = |s: &str| parse(s).map_err(err);
    let shape = FibreShape::Interval { center: 0.5 };
    // F(t) = (1 + t)³/3 and F(t) = t/2.
    let a = fibre_integral_derivative_check(&p("z1*(z1 - 1 - t1)")?, &p("z1^2")?, &[p("z1/(1 + t1)")?], 0.0, 1e-3, shape).map_err(err)?;
    let b = fibre_integral_derivative_check(&p("z1*(z1 - 1)")?, &p("t1*z1")?, &[p("0")?], 0.3, 1e-3, shape).map_err(err)?;
    let ok = (a.lhs - 1.0).abs() < 1e-6 && (a.rhs - 1.0).abs() < 1e-6 && (b.lhs - 0.5).abs() < 1e-12 && (b.rhs - 0.5).abs() < 1e-12;
    ensure(
        ok,
        format!(
            "moving interval lhs {:.9}, rhs {:.9} (1 ± 1e-6); fixed interval lhs {:.12}, rhs {:.12} (0.5)",
            a.lhs, a.rhs, b.lhs, b.rhs
        ),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("toy decomposition", 1.0, criterion_1),
        ("toy positivity", 1.0, criterion_2),
        ("Prékopa and Hölder scans", 5.0, criterion_3),
        ("lift tangency", 5.0, criterion_4),
        ("geodesic curvature values", 5.0, criterion_5),
        ("Levi excess and norm-family equivalence", 5.0, criterion_6),
        ("Bergman oracle", 10.0, criterion_7),
        ("first variation", 60.0, criterion_8),
        ("plurisubharmonicity scans", 120.0, criterion_9),
        ("second variation, product-flat", 60.0, criterion_10),
        ("holomorphic motions", 30.0, criterion_11),
        ("fibre-integral derivative", 1.0, criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail} [{secs:.2} s, budget {budget} s]", i + 1);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
