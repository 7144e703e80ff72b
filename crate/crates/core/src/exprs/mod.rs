//! Complex-valued expressions over base variables `t1..tm`, fibre variables
//! `z1..zn` and their conjugates.
//!
//! Expressions are immutable once built. Symbolic Wirtinger derivatives treat a
//! variable and its conjugate as independent; `re`, `im` and `abs2` are rewritten
//! through `conj` before the chain rule is applied. `log` is the principal
//! branch, so callers must keep its argument away from the negative real axis.

mod diff;
mod parser;

use std::fmt;
use std::ops;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use diff::{fd_wirtinger, fd_wirtinger_richardson};
pub use parser::parse;

/// A variable of the total space: `t{j+1}` on the base, `z{j+1}` on the fibre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Base(usize),
    Fibre(usize),
}

impl Var {
    pub fn name(&self) -> String {
        match self {
            Var::Base(j) => format!("t{}", j + 1),
            Var::Fibre(j) => format!("z{}", j + 1),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Re,
    Im,
    Conj,
    Abs2,
}

impl Func {
    pub fn name(&self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Re => "re",
            Func::Im => "im",
            Func::Conj => "conj",
            Func::Abs2 => "abs2",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "re" => Func::Re,
            "im" => Func::Im,
            "conj" => Func::Conj,
            "abs2" => Func::Abs2,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// Values for every declared variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VarAssignment {
    pub t: Vec<Complex64>,
    pub z: Vec<Complex64>,
}

impl VarAssignment {
    pub fn new(t: &[Complex64], z: &[Complex64]) -> Self {
        VarAssignment {
            t: t.to_vec(),
            z: z.to_vec(),
        }
    }

    pub fn get(&self, v: Var) -> Option<Complex64> {
        match v {
            Var::Base(j) => self.t.get(j).copied(),
            Var::Fibre(j) => self.z.get(j).copied(),
        }
    }

    pub fn get_mut(&mut self, v: Var) -> Option<&mut Complex64> {
        match v {
            Var::Base(j) => self.t.get_mut(j),
            Var::Fibre(j) => self.z.get_mut(j),
        }
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Expr {
    pub fn num(re: f64) -> Expr {
        Expr::Num(Complex64::new(re, 0.0))
    }

    pub fn complex(c: Complex64) -> Expr {
        Expr::Num(c)
    }

    pub fn t(j: usize) -> Expr {
        Expr::Var(Var::Base(j))
    }

    pub fn z(j: usize) -> Expr {
        Expr::Var(Var::Fibre(j))
    }

    pub fn as_num(&self) -> Option<Complex64> {
        match self {
            Expr::Num(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(ZERO)
    }

    // Folding constructors. These never change the value of an expression;
    // they only collapse numeric subtrees and identities with 0 and 1.

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x + y),
            (Some(x), _) if x == ZERO => b,
            (_, Some(y)) if y == ZERO => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x - y),
            (Some(x), _) if x == ZERO => Expr::neg(b),
            (_, Some(y)) if y == ZERO => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x * y),
            (Some(x), _) if x == ZERO => Expr::Num(ZERO),
            (_, Some(y)) if y == ZERO => Expr::Num(ZERO),
            (Some(x), _) if x == ONE => b,
            (_, Some(y)) if y == ONE => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if y != ZERO => Expr::Num(x / y),
            (Some(x), _) if x == ZERO => Expr::Num(ZERO),
            (_, Some(y)) if y == ONE => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(x) => Expr::Num(-x),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        match (k, a.as_num()) {
            (0, _) => Expr::Num(ONE),
            (1, _) => a,
            (_, Some(x)) if x != ZERO || k > 0 => Expr::Num(x.powi(k)),
            _ => Expr::Pow(Box::new(a), k),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        if let Some(x) = a.as_num() {
            match f {
                Func::Exp => return Expr::Num(x.exp()),
                Func::Log if x != ZERO => return Expr::Num(x.ln()),
                Func::Re => return Expr::num(x.re),
                Func::Im => return Expr::num(x.im),
                Func::Conj => return Expr::Num(x.conj()),
                Func::Abs2 => return Expr::num(x.norm_sqr()),
                Func::Log => {}
            }
        }
        if f == Func::Conj {
            if let Expr::Call(Func::Conj, inner) = a {
                return *inner;
            }
        }
        Expr::Call(f, Box::new(a))
    }

    pub fn conj(a: Expr) -> Expr {
        Expr::call(Func::Conj, a)
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::call(Func::Exp, a)
    }

    /// Visits every variable occurring in the tree.
    pub fn for_each_var(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.for_each_var(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        let mut found = false;
        self.for_each_var(&mut |u| found |= u == v);
        found
    }

    /// Fails with the first variable outside `t1..tm`, `z1..zn`.
    pub fn check_signature(&self, m: usize, n: usize) -> Result<()> {
        let mut bad = None;
        self.for_each_var(&mut |v| {
            let ok = match v {
                Var::Base(j) => j < m,
                Var::Fibre(j) => j < n,
            };
            if !ok && bad.is_none() {
                bad = Some(v);
            }
        });
        match bad {
            Some(v) => Err(Error::UndeclaredVariable(v.name())),
            None => Ok(()),
        }
    }

    pub fn eval(&self, a: &VarAssignment) -> Result<Complex64> {
        Ok(match self {
            Expr::Num(c) => *c,
            Expr::Var(v) => a.get(*v).ok_or_else(|| Error::UndeclaredVariable(v.name()))?,
            Expr::Neg(x) => -x.eval(a)?,
            Expr::Add(x, y) => x.eval(a)? + y.eval(a)?,
            Expr::Sub(x, y) => x.eval(a)? - y.eval(a)?,
            Expr::Mul(x, y) => x.eval(a)? * y.eval(a)?,
            Expr::Div(x, y) => {
                let d = y.eval(a)?;
                if d == ZERO {
                    return Err(Error::DivisionByZero);
                }
                x.eval(a)? / d
            }
            Expr::Pow(x, k) => {
                let b = x.eval(a)?;
                if b == ZERO && *k < 0 {
                    return Err(Error::DivisionByZero);
                }
                b.powi(*k)
            }
            Expr::Call(f, x) => {
                let w = x.eval(a)?;
                match f {
                    Func::Exp => w.exp(),
                    Func::Log => {
                        if w == ZERO {
                            return Err(Error::Domain("log(0)".into()));
                        }
                        w.ln()
                    }
                    Func::Re => Complex64::new(w.re, 0.0),
                    Func::Im => Complex64::new(w.im, 0.0),
                    Func::Conj => w.conj(),
                    Func::Abs2 => Complex64::new(w.norm_sqr(), 0.0),
                }
            }
        })
    }

    /// Evaluates with `t` and `z` slices directly.
    pub fn eval_at(&self, t: &[Complex64], z: &[Complex64]) -> Result<Complex64> {
        self.eval(&VarAssignment::new(t, z))
    }

    /// Symbolic ∂/∂var (or ∂/∂conj(var) when `conjugated`).
    pub fn wirtinger(&self, var: Var, conjugated: bool) -> Expr {
        diff::wirtinger(self, var, conjugated)
    }

    /// Real derivative along the real axis of `var`: ∂ + ∂̄.
    pub fn d_real(&self, var: Var) -> Expr {
        Expr::add(self.wirtinger(var, false), self.wirtinger(var, true))
    }

    /// Real derivative along the imaginary axis of `var`: i(∂ − ∂̄).
    pub fn d_imag(&self, var: Var) -> Expr {
        Expr::mul(
            Expr::complex(Complex64::i()),
            Expr::sub(self.wirtinger(var, false), self.wirtinger(var, true)),
        )
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => {
                if c.im == 0.0 {
                    if c.re < 0.0 || (c.re == 0.0 && c.re.is_sign_negative()) {
                        write!(f, "(-{})", -c.re)
                    } else {
                        write!(f, "{}", c.re)
                    }
                } else {
                    let sign = if c.im < 0.0 { '-' } else { '+' };
                    let re = if c.re < 0.0 {
                        format!("-{}", -c.re)
                    } else {
                        format!("{}", c.re)
                    };
                    write!(f, "({}{}{}*i)", re, sign, c.im.abs())
                }
            }
            Expr::Var(v) => write!(f, "{}", v),
            Expr::Neg(a) => write!(f, "(-{})", a),
            Expr::Add(a, b) => write!(f, "({} + {})", a, b),
            Expr::Sub(a, b) => write!(f, "({} - {})", a, b),
            Expr::Mul(a, b) => write!(f, "({} * {})", a, b),
            Expr::Div(a, b) => write!(f, "({} / {})", a, b),
            Expr::Pow(a, k) => {
                if *k < 0 {
                    write!(f, "({}^(-{}))", a, -(*k as i64))
                } else {
                    write!(f, "({}^{})", a, k)
                }
            }
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
