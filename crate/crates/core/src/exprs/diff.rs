use num_complex::Complex64;

use super::{Expr, Func, Var, VarAssignment};
use crate::error::Result;

pub(super) fn wirtinger(e: &Expr, var: Var, conjugated: bool) -> Expr {
    let d = |x: &Expr| wirtinger(x, var, conjugated);
    match e {
        Expr::Num(_) => Expr::num(0.0),
        Expr::Var(u) => {
            if *u == var && !conjugated {
                Expr::num(1.0)
            } else {
                Expr::num(0.0)
            }
        }
        Expr::Neg(a) => Expr::neg(d(a)),
        Expr::Add(a, b) => Expr::add(d(a), d(b)),
        Expr::Sub(a, b) => Expr::sub(d(a), d(b)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(d(a), (**b).clone()),
            Expr::mul((**a).clone(), d(b)),
        ),
        Expr::Div(a, b) => {
            let num = Expr::sub(
                Expr::mul(d(a), (**b).clone()),
                Expr::mul((**a).clone(), d(b)),
            );
            Expr::div(num, Expr::pow((**b).clone(), 2))
        }
        Expr::Pow(a, k) => {
            if *k == 0 {
                return Expr::num(0.0);
            }
            Expr::mul(
                Expr::mul(Expr::num(*k as f64), Expr::pow((**a).clone(), k - 1)),
                d(a),
            )
        }
        Expr::Call(f, a) => match f {
            Func::Exp => Expr::mul(e.clone(), d(a)),
            Func::Log => Expr::div(d(a), (**a).clone()),
            // ∂ conj(g) = conj(∂̄ g) and ∂̄ conj(g) = conj(∂ g)
            Func::Conj => Expr::conj(wirtinger(a, var, !conjugated)),
            Func::Re | Func::Im | Func::Abs2 => d(&rewrite_real_parts(*f, a)),
        },
    }
}

/// re, im and abs2 expressed through conj.
fn rewrite_real_parts(f: Func, a: &Expr) -> Expr {
    let w = a.clone();
    let wc = Expr::conj(a.clone());
    match f {
        Func::Re => Expr::div(Expr::add(w, wc), Expr::num(2.0)),
        Func::Im => Expr::div(
            Expr::sub(w, wc),
            Expr::complex(Complex64::new(0.0, 2.0)),
        ),
        Func::Abs2 => Expr::mul(w, wc),
        _ => unreachable!("only real-part primitives are rewritten"),
    }
}

/// Central-difference Wirtinger derivative: (∂x − i∂y)/2, or (∂x + i∂y)/2 when
/// `conjugated`.
pub fn fd_wirtinger(
    e: &Expr,
    var: Var,
    conjugated: bool,
    point: &VarAssignment,
    h: f64,
) -> Result<Complex64> {
    assert!(h > 0.0, "finite-difference step must be positive");
    let shifted = |delta: Complex64| -> Result<Complex64> {
        let mut p = point.clone();
        if let Some(slot) = p.get_mut(var) {
            *slot += delta;
        }
        e.eval(&p)
    };
    let dx = (shifted(Complex64::new(h, 0.0))? - shifted(Complex64::new(-h, 0.0))?) / (2.0 * h);
    let dy = (shifted(Complex64::new(0.0, h))? - shifted(Complex64::new(0.0, -h))?) / (2.0 * h);
    let i = Complex64::i();
    Ok(if conjugated {
        (dx + i * dy) * 0.5
    } else {
        (dx - i * dy) * 0.5
    })
}

/// Richardson-extrapolated central difference from steps `h` and `h/2`.
pub fn fd_wirtinger_richardson(
    e: &Expr,
    var: Var,
    conjugated: bool,
    point: &VarAssignment,
    h: f64,
) -> Result<Complex64> {
    let coarse = fd_wirtinger(e, var, conjugated, point, h)?;
    let fine = fd_wirtinger(e, var, conjugated, point, 0.5 * h)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use approx::assert_abs_diff_eq;

    fn at_z(z: Complex64) -> VarAssignment {
        VarAssignment::new(&[], &[z])
    }

    #[test]
    fn abs2_derivative_is_conj() {
        let e = parse("abs2(z1)").unwrap();
        let d = e.wirtinger(Var::Fibre(0), false);
        assert_eq!(d.to_string(), "conj(z1)");
    }

    #[test]
    fn mixed_derivative_of_abs2_is_one() {
        let e = parse("abs2(t1)").unwrap();
        let d = e.wirtinger(Var::Base(0), false).wirtinger(Var::Base(0), true);
        assert_eq!(d.as_num(), Some(Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn exp_abs2_derivative_matches_richardson_oracle() {
        let e = parse("exp(abs2(z1))").unwrap();
        let p = at_z(Complex64::new(1.0, 0.0));
        let sym = e.wirtinger(Var::Fibre(0), false).eval(&p).unwrap();
        let oracle = fd_wirtinger_richardson(&e, Var::Fibre(0), false, &p, 1e-4).unwrap();
        assert_abs_diff_eq!(sym.re, std::f64::consts::E, epsilon = 1e-12);
        assert_abs_diff_eq!((sym - oracle).norm(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn fd_of_abs2_at_two() {
        let e = parse("abs2(z1)").unwrap();
        let d = fd_wirtinger(&e, Var::Fibre(0), false, &at_z(Complex64::new(2.0, 0.0)), 1e-5)
            .unwrap();
        assert_abs_diff_eq!(d.re, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(d.im, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn fd_of_constant_is_zero() {
        let e = parse("3 + 2*i").unwrap();
        let d = fd_wirtinger(&e, Var::Fibre(0), true, &at_z(Complex64::new(0.3, 0.1)), 1e-3)
            .unwrap();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn re_and_im_derivatives() {
        let re = parse("re(z1)").unwrap();
        let im = parse("im(z1)").unwrap();
        let p = at_z(Complex64::new(0.2, 0.7));
        let v = Var::Fibre(0);
        assert_abs_diff_eq!(re.wirtinger(v, false).eval(&p).unwrap().re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(re.wirtinger(v, true).eval(&p).unwrap().re, 0.5, epsilon = 1e-15);
        let d = im.wirtinger(v, false).eval(&p).unwrap();
        assert_abs_diff_eq!((d - Complex64::new(0.0, -0.5)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn log_and_quotient_rules() {
        let e = parse("log(1 + abs2(z1)) / (2 + z1)").unwrap();
        let p = at_z(Complex64::new(0.4, -0.3));
        for conj in [false, true] {
            let sym = e.wirtinger(Var::Fibre(0), conj).eval(&p).unwrap();
            let fd = fd_wirtinger_richardson(&e, Var::Fibre(0), conj, &p, 1e-3).unwrap();
            assert_abs_diff_eq!((sym - fd).norm(), 0.0, epsilon = 1e-9);
        }
    }
}
