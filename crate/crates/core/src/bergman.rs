//! Weighted Bergman spaces of planar fibres.
//!
//! The space over `t` is spanned by the scaled monomials `e_k(ζ) = (ζ/s)^k`,
//! `k = 0..=N`, where `s` is the largest boundary radius of the fibre. The
//! Gram matrix `G_{ij} = ∫ e_i conj(e_j) e^{−φ} i dζ∧dζ̄` is computed by the
//! fibre quadrature and factored by a pivoted Cholesky decomposition.
//!
//! A bounded functional ℓ is stored through `p_i = ℓ(e_i)`. Its representer
//! `u = Σ d_j e_j` satisfies `(f, u) = ℓ(f)`, hence `G conj(d) = p` and
//! `‖u‖² = p* G⁻¹ p`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exprs::Expr;
use crate::geometry::{build_quadrature, DefiningFunction, QuadratureRule};
use crate::linalg::{CMat, CVec};

type C = Complex64;

/// Relative pivot size below which a basis direction is dropped.
pub const PIVOT_DROP: f64 = 1e-13;
/// Relative negative pivot beyond which the Gram matrix is rejected.
pub const PIVOT_INDEFINITE: f64 = 1e-10;
/// Dual data must sit at least this far inside the fibre (in ρ).
pub const INTERIOR_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOptions {
    pub degree: usize,
    pub radial_order: usize,
    pub angular_order: usize,
    /// Basis scale `s`; the largest boundary radius when absent.
    pub scale: Option<f64>,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            degree: 30,
            radial_order: 60,
            angular_order: 128,
            scale: None,
        }
    }
}

/// A functional on the Bergman space of one fibre.
#[derive(Debug, Clone, PartialEq)]
pub enum DualSectionData {
    /// f ↦ f^{(order)}(eta).
    PointDeriv { order: usize, eta: C },
    /// f ↦ ∫_{|ζ|<radius} f conj(g) e^{−φ} i dζ∧dζ̄, for a density g in
    /// `t1` and `z1`. It is a holomorphic section in t only when
    /// conj(g) e^{−φ} does not depend on t over the support.
    CompactCurrent { density: Expr, radius: f64 },
}

#[derive(Debug, Clone)]
pub struct BergmanModel {
    pub t: Vec<C>,
    pub degree: usize,
    pub scale: f64,
    pub rule: QuadratureRule,
    /// e^{−φ} at the interior nodes.
    pub weights: Vec<f64>,
    pub gram: CMat,
    /// Basis indices retained by the pivoted factorization, in pivot order.
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// `G[kept, kept] = L L*`.
    pub chol: CMat,
    /// (largest / smallest retained pivot)².
    pub condition: f64,
    /// e_k at the interior nodes, one row per node.
    basis_nodes: CMat,
}

/// Representer of a functional.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSection {
    /// `d` over the full basis; dropped directions carry zero.
    pub coeffs: CVec,
    /// `p_i = ℓ(e_i)`.
    pub functional: CVec,
    /// ‖u‖² = p* G⁻¹ p.
    pub norm_sq: f64,
}

/// Builds the model over `t`. The fibre must be star-shaped about 0.
pub fn build_model(fam: &dyn DefiningFunction, t: &[C], opts: ModelOptions) -> Result<BergmanModel> {
    let rule = build_quadrature(fam, t, opts.radial_order, opts.angular_order)?;
    let scale = opts.scale.unwrap_or_else(|| rule.max_radius());
    let nb = opts.degree + 1;
    let mut weights = Vec::with_capacity(rule.interior.len());
    for node in &rule.interior {
        let phi = fam.weight(t, &[node.zeta])?;
        let w = (-phi).exp();
        if !w.is_finite() {
            return Err(Error::Precondition(format!(
                "weight e^(-φ) is not finite at ζ = {}",
                node.zeta
            )));
        }
        weights.push(w);
    }
    let mut basis_nodes = CMat::zeros(rule.interior.len(), nb);
    for (r, node) in rule.interior.iter().enumerate() {
        let x = node.zeta / scale;
        let mut p = C::new(1.0, 0.0);
        for k in 0..nb {
            basis_nodes[(r, k)] = p;
            p *= x;
        }
    }
    let mut gram = CMat::zeros(nb, nb);
    for (r, node) in rule.interior.iter().enumerate() {
        let w = node.weight * weights[r];
        let row = basis_nodes.row(r);
        for i in 0..nb {
            let wi = row[i] * w;
            for j in 0..nb {
                gram[(i, j)] += wi * row[j].conj();
            }
        }
    }
    let (kept, dropped, chol) = pivoted_cholesky(&gram)?;
    let diag: Vec<f64> = (0..kept.len()).map(|i| chol[(i, i)].re).collect();
    let hi = diag.iter().copied().fold(0.0, f64::max);
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(BergmanModel {
        t: t.to_vec(),
        degree: opts.degree,
        scale,
        rule,
        weights,
        gram,
        kept,
        dropped,
        chol,
        condition: (hi / lo).powi(2),
        basis_nodes,
    })
}

/// Greedy largest-diagonal pivoting. Returns retained indices, dropped
/// indices and the lower factor of the retained block in pivot order.
fn pivoted_cholesky(g: &CMat) -> Result<(Vec<usize>, Vec<usize>, CMat)> {
    let n = g.nrows();
    let dmax = (0..n).map(|i| g[(i, i)].re).fold(0.0, f64::max);
    if !(dmax > 0.0) {
        return Err(Error::Indefinite { pivot: dmax, index: 0 });
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut kept: Vec<usize> = Vec::with_capacity(n);
    // cols[c][i]: column c of L evaluated at original index i.
    let mut cols: Vec<Vec<C>> = Vec::with_capacity(n);
    let resid = |i: usize, cols: &[Vec<C>]| -> f64 {
        g[(i, i)].re - cols.iter().map(|c| c[i].norm_sqr()).sum::<f64>()
    };
    while !remaining.is_empty() {
        let (pos, piv) = remaining
            .iter()
            .enumerate()
            .map(|(p, &i)| (p, resid(i, &cols)))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        if let Some((index, pivot)) = remaining
            .iter()
            .map(|&i| (i, resid(i, &cols)))
            .find(|&(_, d)| d < -PIVOT_INDEFINITE * dmax)
        {
            return Err(Error::Indefinite { pivot, index });
        }
        if piv < PIVOT_DROP * dmax {
            break;
        }
        let k = remaining.remove(pos);
        let lkk = piv.sqrt();
        let mut col = vec![C::new(0.0, 0.0); n];
        col[k] = C::new(lkk, 0.0);
        for &i in &remaining {
            let mut s = g[(i, k)];
            for c in &cols {
                s -= c[i] * c[k].conj();
            }
            col[i] = s / lkk;
        }
        cols.push(col);
        kept.push(k);
    }
    let r = kept.len();
    let mut l = CMat::zeros(r, r);
    for (c, col) in cols.iter().enumerate() {
        for (row, &i) in kept.iter().enumerate() {
            l[(row, c)] = col[i];
        }
    }
    let mut dropped = remaining;
    dropped.sort_unstable();
    Ok((kept, dropped, l))
}

fn falling(k: usize, a: usize) -> f64 {
    (0..a).map(|i| (k - i) as f64).product()
}

impl BergmanModel {
    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    /// `d^α/dζ^α e_k(ζ)` for every k.
    pub fn basis_derivs(&self, zeta: C, alpha: usize) -> CVec {
        let x = zeta / self.scale;
        CVec::from_fn(self.dim(), |k, _| {
            if k < alpha {
                C::new(0.0, 0.0)
            } else {
                x.powu((k - alpha) as u32) * (falling(k, alpha) / self.scale.powi(alpha as i32))
            }
        })
    }

    /// Solves `L y = P p` on the retained indices.
    fn whiten(&self, p: &CVec) -> CVec {
        let r = self.kept.len();
        let mut y = CVec::from_fn(r, |i, _| p[self.kept[i]]);
        for i in 0..r {
            let mut s = y[i];
            for k in 0..i {
                s -= self.chol[(i, k)] * y[k];
            }
            y[i] = s / self.chol[(i, i)];
        }
        y
    }

    /// `G⁻¹ p` on the retained block, zero elsewhere.
    fn gram_solve(&self, p: &CVec) -> CVec {
        let r = self.kept.len();
        let mut y = self.whiten(p);
        for i in (0..r).rev() {
            let mut s = y[i];
            for k in (i + 1)..r {
                s -= self.chol[(k, i)].conj() * y[k];
            }
            y[i] = s / self.chol[(i, i)];
        }
        let mut x = CVec::zeros(self.dim());
        for (i, &k) in self.kept.iter().enumerate() {
            x[k] = y[i];
        }
        x
    }

    /// q* G⁻¹ p, computed as (L⁻¹q)* (L⁻¹p).
    fn kernel_from(&self, p: &CVec, q: &CVec) -> C {
        self.whiten(q).dotc(&self.whiten(p))
    }

    pub fn kernel(&self, zeta: C, eta: C) -> C {
        self.kernel_deriv(0, 0, zeta, eta)
    }

    /// ∂_ζ^α ∂̄_η^β K(ζ, η) from the exact monomial derivatives.
    pub fn kernel_deriv(&self, alpha: usize, beta: usize, zeta: C, eta: C) -> C {
        self.kernel_from(&self.basis_derivs(zeta, alpha), &self.basis_derivs(eta, beta))
    }

    /// `(a, b) = aᵀ G conj(b)` for coefficient vectors over the basis.
    pub fn pair(&self, a: &CVec, b: &CVec) -> C {
        let gb = &self.gram * b.map(|z| z.conj());
        a.iter().zip(gb.iter()).map(|(x, y)| x * y).sum()
    }

    /// Σ d_k e_k(ζ).
    pub fn eval_coeffs(&self, coeffs: &CVec, zeta: C) -> C {
        self.basis_derivs(zeta, 0).dot(coeffs)
    }

    /// Values of Σ d_k e_k at the interior quadrature nodes.
    pub fn eval_coeffs_at_nodes(&self, coeffs: &CVec) -> CVec {
        &self.basis_nodes * coeffs
    }

    /// `p` for a functional; fails when the data leave the fibre.
    pub fn functional(&self, fam: &dyn DefiningFunction, data: &DualSectionData) -> Result<CVec> {
        match data {
            DualSectionData::PointDeriv { order, eta } => {
                let v = fam.value(&self.t, &[*eta])?;
                if !(v < -INTERIOR_MARGIN) {
                    return Err(Error::Precondition(format!(
                        "evaluation point {eta} is not inside the fibre (ρ = {v:e})"
                    )));
                }
                Ok(self.basis_derivs(*eta, *order))
            }
            DualSectionData::CompactCurrent { density, radius } => {
                density.check_signature(self.t.len().max(1), 1)?;
                for k in 0..64 {
                    let z = C::from_polar(*radius, std::f64::consts::TAU * k as f64 / 64.0);
                    if !(fam.value(&self.t, &[z])? < 0.0) {
                        return Err(Error::Precondition(format!(
                            "current support |ζ| ≤ {radius} escapes the fibre"
                        )));
                    }
                }
                let support = QuadratureRule::disk(*radius, 24, 64);
                let mut b = CVec::zeros(self.dim());
                for node in &support.interior {
                    let g = density.eval_at(&self.t, &[node.zeta])?;
                    let w = (-fam.weight(&self.t, &[node.zeta])?).exp() * node.weight;
                    let e = self.basis_derivs(node.zeta, 0);
                    for k in 0..self.dim() {
                        b[k] += g * e[k].conj() * w;
                    }
                }
                Ok(b.map(|z| z.conj()))
            }
        }
    }

    /// Representer of the functional with coefficient vector `p`.
    pub fn represent(&self, p: &CVec) -> DualSection {
        let coeffs = self.gram_solve(p).map(|z| z.conj());
        let norm_sq = self.whiten(p).norm_squared();
        DualSection {
            coeffs,
            functional: p.clone(),
            norm_sq,
        }
    }
}

pub fn project_dual(
    model: &BergmanModel,
    fam: &dyn DefiningFunction,
    data: &DualSectionData,
) -> Result<DualSection> {
    Ok(model.represent(&model.functional(fam, data)?))
}

/// ‖P(f)‖² and, independently, |ℓ(u*)|²/‖u*‖² for the maximizer u* built in
/// the orthonormal basis and evaluated with ℓ applied directly.
pub fn extremal_norm_check(
    model: &BergmanModel,
    fam: &dyn DefiningFunction,
    data: &DualSectionData,
) -> Result<(f64, f64)> {
    let sec = project_dual(model, fam, data)?;
    let lhs = model.pair(&sec.coeffs, &sec.coeffs).re;
    let q = model.whiten(&sec.functional);
    let qn = q.norm();
    if qn == 0.0 {
        return Ok((lhs, 0.0));
    }
    // u* = Σ conj(q_a)/|q| ε_a with ε = L⁻¹ e, written back in monomials:
    // coefficients c = (L⁻¹)ᵀ conj(q)/|q|.
    let r = model.kept.len();
    let mut y = q.map(|z| z.conj() / qn);
    for i in (0..r).rev() {
        let mut s = y[i];
        for k in (i + 1)..r {
            s -= model.chol[(k, i)] * y[k];
        }
        y[i] = s / model.chol[(i, i)];
    }
    let mut c = CVec::zeros(model.dim());
    for (i, &k) in model.kept.iter().enumerate() {
        c[k] = y[i];
    }
    let value = apply_functional(model, fam, data, &c)?;
    let norm = model.pair(&c, &c).re;
    Ok((lhs, value.norm_sqr() / norm))
}

fn apply_functional(
    model: &BergmanModel,
    fam: &dyn DefiningFunction,
    data: &DualSectionData,
    c: &CVec,
) -> Result<C> {
    match data {
        DualSectionData::PointDeriv { order, eta } => {
            Ok(model.basis_derivs(*eta, *order).dot(c))
        }
        DualSectionData::CompactCurrent { density, radius } => {
            let support = QuadratureRule::disk(*radius, 24, 64);
            let mut s = C::new(0.0, 0.0);
            for node in &support.interior {
                let g = density.eval_at(&model.t, &[node.zeta])?;
                let w = (-fam.weight(&model.t, &[node.zeta])?).exp() * node.weight;
                s += model.eval_coeffs(c, node.zeta) * g.conj() * w;
            }
            Ok(s)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproducingResiduals {
    /// |∫ K(ζ, η) e^{−φ} i dζ∧dζ̄ − 1|.
    pub integral: f64,
    /// max_k |∫ e_k conj(K(·, η)) e^{−φ} i dζ∧dζ̄ − e_k(η)| over k ≤ max_k.
    pub basis: f64,
}

pub fn reproducing_check(model: &BergmanModel, eta: C, max_k: usize) -> ReproducingResiduals {
    let k_eta = model.represent(&model.basis_derivs(eta, 0));
    let kvals = model.eval_coeffs_at_nodes(&k_eta.coeffs);
    let mut integral = C::new(0.0, 0.0);
    for (r, node) in model.rule.interior.iter().enumerate() {
        integral += kvals[r] * node.weight * model.weights[r];
    }
    let e_eta = model.basis_derivs(eta, 0);
    let mut basis: f64 = 0.0;
    for k in 0..=max_k.min(model.degree) {
        let mut s = C::new(0.0, 0.0);
        for (r, node) in model.rule.interior.iter().enumerate() {
            s += model.basis_nodes[(r, k)] * kvals[r].conj() * node.weight * model.weights[r];
        }
        basis = basis.max((s - e_eta[k]).norm());
    }
    ReproducingResiduals {
        integral: (integral - C::new(1.0, 0.0)).norm(),
        basis,
    }
}
