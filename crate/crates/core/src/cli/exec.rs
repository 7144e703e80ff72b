use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;

use super::report::{CsvTable, Findings, Tolerances};
use super::scenario::*;
use crate::bergman::{build_model, extremal_norm_check, reproducing_check, DualSectionData};
use crate::error::{Error, Result};
use crate::exprs::{parse, Var};
use crate::geometry::{
    a2_check, boundary_samples, fibre_integral_derivative_check, sample_points, DomainFamily,
};
use crate::lifts::{geodesic_curvature_from_jet, lift_log_boundary_from_jet, ROUTE_TOL};
use crate::linalg;
use crate::normfam::{prop32_equivalence, HermitianNormFamily};
use crate::realtoy::{
    convexity_scan, toy_positivity_scan, toy_report, toy_triviality, IntervalFamily, TRIVIAL_TOL,
};
use crate::variation::{
    conjugate_linear_motion, cor215_check, motion_flatness, motion_levi_flat_check, psh_scan,
    vf1_check, vf2_product_flat_check, KernelEntry, MotionSpec,
};
use crate::geometry::DefiningFunction;

type C = Complex64;

pub struct Context<'a> {
    pub tols: &'a mut Tolerances,
    pub grid: Option<usize>,
    pub timings: BTreeMap<String, f64>,
}

impl Context<'_> {
    fn timed<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.timings
            .insert(name.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }
}

pub fn run_task(task: &Task, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    match task {
        Task::Toy(t) => toy(t, cx_, out),
        Task::Convexity(t) => convexity(t, cx_, out),
        Task::Lifts(t) => lifts(t, cx_, out),
        Task::Norms(t) => norms(t, cx_, out),
        Task::Bergman(t) => bergman(t, cx_, out),
        Task::Vf1(t) => vf1(t, cx_, out),
        Task::Psh(t) => psh(t, cx_, out),
        Task::Vf2(t) => vf2(t, cx_, out),
        Task::Motion(t) => motion(t, cx_, out),
        Task::FibreDeriv(t) => fibre_deriv(t, cx_, out),
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn toy(t: &ToyTask, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    let fam = IntervalFamily::parse(&t.a, &t.b, (t.window[0], t.window[1]))?;
    let grid = t.grid.points(cx_.grid)?;
    let tol_dec = cx_.tols.get("decomposition", 1e-10);
    let tol_rem = cx_.tols.get("rem", 1e-12);
    let tol_geo = cx_.tols.get("geo", 1e-10);
    let tol_triv = cx_.tols.get("triviality", TRIVIAL_TOL);

    let mut csv = CsvTable::new(&["re_t", "im_t", "theta_a", "theta_b", "geo", "rem", "phi_ddot"]);
    let mut defect: f64 = 0.0;
    cx_.timed("reports", || {
        for &s in &grid {
            let r = toy_report(&fam, s)?;
            defect = defect.max((r.phi_ddot - r.geo - r.rem).abs());
            csv.push(vec![s, 0.0, r.theta_a, r.theta_b, r.geo, r.rem, r.phi_ddot]);
        }
        Ok(())
    })?;
    out.check(
        "decomposition",
        defect <= tol_dec,
        format!("max |Φ̈ − Geo − R| = {defect:e} over {} points", grid.len()),
    );
    for &p in &t.points {
        let r = toy_report(&fam, p)?;
        out.value(format!("theta_a@{p}"), r.theta_a);
        out.value(format!("theta_b@{p}"), r.theta_b);
        out.value(format!("geo@{p}"), r.geo);
        out.value(format!("rem@{p}"), r.rem);
        out.value(format!("phi_ddot@{p}"), r.phi_ddot);
    }

    let pos = toy_positivity_scan(&fam, &grid)?;
    out.value("min_rem", pos.min_rem);
    out.check("rem_nonnegative", pos.min_rem >= -tol_rem, format!("min R = {:e}", pos.min_rem));
    out.value("convex_total_space", flag(pos.convex_total_space));
    let triv = toy_triviality(&fam, &grid, tol_triv)?;
    out.value("trivial", flag(triv.trivial));
    out.value("phi_affine", flag(triv.phi_affine));
    out.value("slope", triv.c);
    out.value("max_fit_residual", triv.max_fit_residual);
    if let Some(g) = pos.min_geo {
        out.value("min_geo", g);
        out.check("geo_nonnegative", g >= -tol_geo, format!("min Geo = {g:e}"));
        out.check(
            "triviality_matches_affine",
            triv.trivial == triv.phi_affine,
            format!("trivial = {}, Φ affine = {}", triv.trivial, triv.phi_affine),
        );
    } else {
        let why = "a is not convex or b is not concave on the grid".to_string();
        out.skip("geo_nonnegative", why.clone());
        out.skip("triviality_matches_affine", why);
    }
    out.sample("positivity", &pos)?;
    out.sample("triviality", &triv)?;
    out.csv = Some(csv);
    Ok(())
}

fn convexity(t: &ConvexityTask, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    let phi = parse(&t.phi)?;
    let grid = t.grid.points(cx_.grid)?;
    let tol = cx_.tols.get("convexity", 1e-4);
    let s = cx_.timed("scan", || convexity_scan(&phi, t.mode, &grid, t.quadrature, tol))?;
    out.value("min_fdd", s.scan.min);
    out.value("max_fdd", s.scan.max);
    out.value("max_window", s.windows.iter().copied().fold(0.0, f64::max));
    out.check(
        "convex",
        s.scan.passed,
        format!("min F̈ = {:e} at t = {}", s.scan.min, grid[s.scan.argmin]),
    );
    let mut csv = CsvTable::new(&["re_t", "im_t", "fdd", "window"]);
    for ((t, v), w) in grid.iter().zip(&s.scan.values).zip(&s.windows) {
        csv.push(vec![*t, 0.0, *v, *w]);
    }
    out.csv = Some(csv);
    Ok(())
}

/// Base points for a family with `m` base coordinates; square grids only
/// exist for m = 1.
fn base_points(grid: &BaseGrid, m: usize, k: Option<usize>) -> Result<Vec<Vec<C>>> {
    let pts = grid.points(k)?;
    if m == 1 {
        return Ok(pts);
    }
    if matches!(grid, BaseGrid::Square { .. }) {
        return Err(Error::Config(format!(
            "square grids need a one-dimensional base; give explicit points for m = {m}"
        )));
    }
    Ok(pts
        .into_iter()
        .map(|p| {
            let mut v = vec![C::new(0.0, 0.0); m];
            v[0] = p[0];
            v
        })
        .collect())
}

fn lifts(t: &LiftsTask, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    let fam = DomainFamily::parse(&t.rho, "", t.m, t.n)?;
    let grid = base_points(&t.grid, t.m, cx_.grid)?;
    let tol_tan = cx_.tols.get("tangency", 1e-8);
    let tol_route = cx_.tols.get("route", ROUTE_TOL);
    let tol_excess = cx_.tols.get("levi_excess", 1e-10);
    let tol_dec = cx_.tols.get("decomposition", 1e-10);
    let tol_interp = cx_.tols.get("interpolation", 1e-8);

    let mut csv = CsvTable::new(&[
        "re_t", "im_t", "re_mu1", "im_mu1", "theta_min", "theta_max", "tangency", "route_diff",
    ]);
    let mut max_tan: f64 = 0.0;
    let mut max_route: f64 = 0.0;
    let mut min_excess = f64::INFINITY;
    let mut max_dec: f64 = 0.0;
    let (mut th_min, mut th_max, mut th_abs) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    let mut mismatch: Option<String> = None;
    let mut count = 0usize;
    cx_.timed("curvature", || {
        for tb in &grid {
            for p in boundary_samples(&fam, tb, t.samples)? {
                let jet = fam.jet(tb, &p)?;
                let lift = lift_log_boundary_from_jet(&jet)?;
                let tan = lift.max_tangency(&jet);
                max_tan = max_tan.max(tan);
                count += 1;
                let g = match geodesic_curvature_from_jet(&jet) {
                    Ok(g) => g,
                    Err(Error::RouteMismatch { diff, .. }) => {
                        max_route = max_route.max(diff);
                        mismatch.get_or_insert(format!("routes differ by {diff:e} at t = {:?}, μ = {:?}", tb, p));
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let scale = 1.0f64.max(linalg::max_abs(&g.theta));
                max_route = max_route.max(g.route_diff / scale);
                min_excess = min_excess.min(g.min_eig_excess());
                max_dec = max_dec.max(g.decomposition_defect());
                let evs = linalg::hermitian_eigenvalues(&g.theta);
                let lo = evs.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = evs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                th_min = th_min.min(lo);
                th_max = th_max.max(hi);
                th_abs = th_abs.max(g.spectral_norm());
                csv.push(vec![tb[0].re, tb[0].im, p[0].re, p[0].im, lo, hi, tan, g.route_diff]);
            }
        }
        Ok(())
    })?;
    out.value("samples", count as f64);
    out.value("max_tangency", max_tan);
    out.value("max_route_diff", max_route);
    out.value("min_theta", th_min);
    out.value("max_theta", th_max);
    out.value("max_abs_theta", th_abs);
    out.value("min_levi_excess", min_excess);
    out.value("interpolation", flag(mismatch.is_none() && th_abs < tol_interp));
    out.check("tangency", max_tan < tol_tan, format!("max |V_j(ρ)| = {max_tan:e}"));
    match mismatch {
        Some(m) => out.check("routes", false, m),
        None => out.check(
            "routes",
            max_route <= tol_route,
            format!("max relative route difference {max_route:e}"),
        ),
    }
    out.check(
        "levi_excess",
        min_excess >= -tol_excess,
        format!("min eig(θ − c) = {min_excess:e}"),
    );
    out.check(
        "decomposition",
        max_dec <= tol_dec,
        format!("max |θ − c − correction| = {max_dec:e}"),
    );
    out.csv = Some(csv);
    Ok(())
}

fn norms(t: &NormsTask, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    let fam = HermitianNormFamily::parse(&t.h, t.m)?;
    let grid = base_points(&t.grid, t.m, cx_.grid)?;
    let tol = cx_.tols.get("flatness", 1e-8);
    let tol_bridge = cx_.tols.get("bridge", 1e-8);
    let zs: Vec<Vec<C>> = sample_points(0x5eed_0a0a, t.samples, fam.n(), 1.0)
        .into_iter()
        .filter(|z| z.iter().map(|x| x.norm_sqr()).sum::<f64>() > 1e-6)
        .collect();
    let r = cx_.timed("equivalence", || prop32_equivalence(&fam, &grid, &zs, tol))?;
    out.value("max_semmes", r.max_semmes);
    out.value("max_norm_theta", r.max_norm_theta);
    out.value("max_domain_theta", r.max_domain_theta);
    out.value("bridge_defect", r.bridge_defect);
    out.value("flat", flag(r.semmes_flat && r.norm_flat && r.domain_flat));
    out.check(
        "equivalence",
        r.equivalent,
        format!(
            "semmes flat = {}, norm flat = {}, domain flat = {}",
            r.semmes_flat, r.norm_flat, r.domain_flat
        ),
    );
    out.check(
        "bridge",
        r.bridge_defect <= tol_bridge,
        format!("max |norm θ − h(z,z)·domain θ| = {:e}", r.bridge_defect),
    );
    Ok(())
}

fn bergman(t: &BergmanTask, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    let fam = DomainFamily::parse(&t.rho, &t.phi, 1, 1)?;
    let tb = [cx(t.t)];
    let pts: Vec<C> = t.points.points(cx_.grid)?.into_iter().map(|p| p[0]).collect();
    let tol_oracle = cx_.tols.get("oracle", 1e-6);
    let tol_rep = cx_.tols.get("reproducing", 1e-10);
    let tol_ext = cx_.tols.get("extremal", 1e-10);
    let oracle = t.oracle.as_deref().map(parse).transpose()?;
    let model = cx_.timed("model", || build_model(&fam, &tb, t.model.options()))?;
    out.value("retained", model.kept.len() as f64);
    out.value("condition", model.condition);

    let mut csv = CsvTable::new(&[
        "re_zeta", "im_zeta", "re_eta", "im_eta", "re_kernel", "im_kernel", "oracle_error",
    ]);
    let mut max_err: f64 = 0.0;
    let mut max_rep: f64 = 0.0;
    let mut max_ext: f64 = 0.0;
    for &eta in &pts {
        // Validates that η is inside the fibre.
        model.functional(&fam, &DualSectionData::PointDeriv { order: 0, eta })?;
        let rep = reproducing_check(&model, eta, model.degree);
        max_rep = max_rep.max(rep.integral).max(rep.basis);
        let (lhs, rhs) = extremal_norm_check(&model, &fam, &DualSectionData::PointDeriv { order: 0, eta })?;
        max_ext = max_ext.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        for &zeta in &pts {
            let k = model.kernel(zeta, eta);
            let err = match &oracle {
                Some(o) => (o.eval_at(&tb, &[zeta, eta])? - k).norm(),
                None => f64::NAN,
            };
            if oracle.is_some() {
                max_err = max_err.max(err);
            }
            csv.push(vec![zeta.re, zeta.im, eta.re, eta.im, k.re, k.im, err]);
        }
    }
    let k00 = model.kernel(pts[0], pts[0]);
    out.value("kernel_re@first", k00.re);
    out.value("max_reproducing_residual", max_rep);
    out.value("max_extremal_defect", max_ext);
    out.check(
        "reproducing",
        max_rep < tol_rep,
        format!("max reproducing residual {max_rep:e}"),
    );
    out.check(
        "extremal",
        max_ext < tol_ext,
        format!("max relative |‖P(f)‖² − sup| = {max_ext:e}"),
    );
    if oracle.is_some() {
        out.value("max_oracle_error", max_err);
        out.check("oracle", max_err < tol_oracle, format!("max |K − oracle| = {max_err:e}"));
    } else {
        out.skip("oracle", "no oracle expression given".into());
    }
    out.csv = Some(csv);
    Ok(())
}

fn a2_at(fam: &DomainFamily, t0: &[C], out: &mut Findings) -> Result<()> {
    let rim = boundary_samples(fam, t0, 32)?;
    let interior: Vec<Vec<C>> = rim.iter().map(|p| vec![p[0] * 0.5]).chain([vec![C::new(0.0, 0.0)]]).collect();
    let r = a2_check(fam, t0, &interior, &rim, 1e-8)?;
    out.check(
        "a2",
        r.passed,
        r.failure.unwrap_or_else(|| format!("min Levi eigenvalue {:e}", r.min_levi_eig)),
    );
    Ok(())
}

fn entry(t: &KernelVariationTask) -> KernelEntry {
    KernelEntry {
        alpha: t.alpha,
        beta: t.beta,
        zeta: cx(t.zeta),
        eta: cx(t.eta),
    }
}

fn complex_value(out: &mut Findings, name: &str, z: C) {
    out.value(format!("{name}_re"), z.re);
    out.value(format!("{name}_im"), z.im);
}

fn vf1(t: &KernelVariationTask, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    let fam = DomainFamily::parse(&t.rho, &t.phi, 1, 1)?;
    let t0 = [cx(t.t0)];
    let tol_abs = cx_.tols.get("residual", 1e-4);
    let tol_rel = cx_.tols.get("residual_rel", 1e-3);
    a2_at(&fam, &t0, out)?;
    let r = cx_.timed("variation", || vf1_check(&fam, &t0, 0, entry(t), t.h_fd, t.model.options()))?;
    complex_value(out, "lhs", r.lhs);
    complex_value(out, "rhs_interior", r.rhs_interior);
    complex_value(out, "rhs_boundary", r.rhs_boundary);
    let res = r.residual();
    out.value("residual", res);
    let bound = tol_abs.max(tol_rel * r.lhs.norm());
    out.check(
        "vf1",
        res < bound,
        format!("|lhs − (rhs_interior − rhs_boundary)| = {res:e}, bound {bound:e}"),
    );
    Ok(())
}

fn vf2(t: &KernelVariationTask, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    let fam = DomainFamily::parse(&t.rho, &t.phi, 1, 1)?;
    let t0 = [cx(t.t0)];
    let tol = cx_.tols.get("residual", 1e-3);
    let r = cx_.timed("variation", || {
        vf2_product_flat_check(&fam, &t0, 0, entry(t), t.h_fd, t.model.options())
    })?;
    complex_value(out, "lhs", r.lhs);
    complex_value(out, "rhs", r.rhs);
    out.value("residual", r.residual());
    out.check("vf2", r.residual() < tol, format!("|lhs − rhs| = {:e}", r.residual()));
    Ok(())
}

fn psh(t: &PshTask, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    let fam = DomainFamily::parse(&t.rho, &t.phi, 1, 1)?;
    let grid = t.grid.points(cx_.grid)?;
    let data: Vec<DualSectionData> = t.functionals.iter().map(|f| f.data()).collect::<Result<_>>()?;
    let tol = cx_.tols.get("psh", 1e-3);
    let s = cx_.timed("scan", || psh_scan(&fam, &data, &grid, t.h_fd, t.model.options(), tol))?;
    out.value("stein", flag(s.stein.stein));
    out.value("min_total_levi", s.stein.min_total_levi);
    out.value("min_weight_eig", s.stein.min_weight_eig);
    let mut header = vec!["re_t".to_string(), "im_t".to_string()];
    for (k, scan) in s.scans.iter().enumerate() {
        header.push(format!("ddlog[{k}]"));
        out.value(format!("min[{k}]"), scan.min);
        out.value(format!("max[{k}]"), scan.max);
        let name = format!("psh[{k}]");
        let at = grid[scan.argmin][0];
        if s.stein.stein {
            out.check(&name, scan.passed, format!("min ∂∂̄ log‖P(f)‖² = {:e} at t = {at}", scan.min));
        } else {
            out.skip(
                &name,
                format!(
                    "total space not Stein with psh weight on samples; diagnostic min {:e} at t = {at}",
                    scan.min
                ),
            );
        }
    }
    let mut csv = CsvTable {
        header,
        rows: Vec::new(),
    };
    for (i, tb) in grid.iter().enumerate() {
        let mut row = vec![tb[0].re, tb[0].im];
        row.extend(s.scans.iter().map(|sc| sc.values[i]));
        csv.push(row);
    }
    out.sample("stein", &s.stein)?;
    out.csv = Some(csv);
    Ok(())
}

fn motion(t: &MotionTask, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    let grid = t.grid.points(cx_.grid)?;
    let opts = t.model.options();
    if let Some(a) = &t.a {
        let a = parse(a)?;
        let tol = cx_.tols.get("triviality", 1e-8);
        let r = cx_.timed("cor215", || cor215_check(&a, &grid, tol, opts))?;
        out.value("max_a", r.max_a);
        out.value("max_flatness", r.flatness.max);
        out.value("trivial", flag(r.trivial));
        out.check(
            "cor215_consistent",
            r.consistent,
            format!("max |a| = {:e}, max |flatness| = {:e}", r.max_a, r.flatness.max),
        );
        let mut csv = CsvTable::new(&["re_t", "im_t", "abs_flatness"]);
        for (tb, v) in grid.iter().zip(&r.flatness.values) {
            csv.push(vec![tb[0].re, tb[0].im, *v]);
        }
        out.csv = Some(csv);
        // The Levi-flatness scan of the same motion.
        let spec = conjugate_linear_motion(&a)?;
        return levi_flat(&spec, &grid, t.samples, cx_, out);
    }
    let f = t.f.as_deref().unwrap_or_default();
    let spec = MotionSpec::parse(f, &t.rho0, 1)?;
    spec.check_quasiconformal(&grid)?;
    out.value("max_beltrami", spec.max_beltrami(&grid)?);
    let fam = spec.family();
    let eta = cx(t.eta);
    let mut csv = CsvTable::new(&["re_t", "im_t", "re_flatness", "im_flatness"]);
    cx_.timed("flatness", || {
        for (i, tb) in grid.iter().enumerate() {
            let model = build_model(&fam, tb, opts)?;
            let v = motion_flatness(&spec, tb, eta, &model)?[0];
            complex_value(out, &format!("flatness[{i}]"), v);
            csv.push(vec![tb[0].re, tb[0].im, v.re, v.im]);
        }
        Ok(())
    })?;
    out.csv = Some(csv);
    levi_flat(&spec, &grid, t.samples, cx_, out)
}

fn levi_flat(
    spec: &MotionSpec,
    grid: &[Vec<C>],
    samples: usize,
    cx_: &mut Context,
    out: &mut Findings,
) -> Result<()> {
    let tol = cx_.tols.get("levi_flat", 1e-6);
    let anti = spec.f.wirtinger(Var::Base(0), true);
    let mut holomorphic = true;
    for p in sample_points(0x5eed_0b0b, 16, 2, 0.5) {
        if anti.eval_at(&p[..1], &p[1..])?.norm() > 1e-12 {
            holomorphic = false;
            break;
        }
    }
    let s = cx_.timed("levi_flat", || motion_levi_flat_check(spec, grid, samples, tol))?;
    out.value("max_abs_theta", s.max);
    if holomorphic {
        out.check("levi_flat", s.passed, format!("max |θ| = {:e}", s.max));
    } else {
        out.skip(
            "levi_flat",
            format!("f is not holomorphic in t; max |θ| = {:e}", s.max),
        );
    }
    Ok(())
}

fn fibre_deriv(t: &FibreDerivTask, cx_: &mut Context, out: &mut Findings) -> Result<()> {
    let rho = parse(&t.rho)?;
    let f = parse(&t.f)?;
    let w = t.w.iter().map(|s| parse(s).map_err(Error::from)).collect::<Result<Vec<_>>>()?;
    let tol = cx_.tols.get("agreement", 1e-6);
    let r = cx_.timed("check", || {
        fibre_integral_derivative_check(&rho, &f, &w, t.t, t.h, t.shape.shape())
    })?;
    out.value("lhs", r.lhs);
    out.value("rhs", r.rhs);
    out.value("max_tangency", r.max_tangency);
    out.check(
        "agreement",
        (r.lhs - r.rhs).abs() < tol,
        format!("|d/dt ∫ f − ∫ (∂_t f + div(w f))| = {:e}", (r.lhs - r.rhs).abs()),
    );
    Ok(())
}
