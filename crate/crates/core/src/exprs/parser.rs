use num_complex::Complex64;

use super::{Expr, Func, Var};
use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(ch) = self.src[self.pos..].chars().next() {
            if ch.is_whitespace() {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Returns the next token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(ch) = rest.chars().next() else {
            return Ok((Tok::End, start));
        };
        let single = match ch {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if ch.is_ascii_digit() || ch == '.' {
            return self.number(start);
        }
        if ch.is_ascii_alphabetic() {
            let len = rest
                .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
                .unwrap_or(rest.len());
            self.pos += len;
            return Ok((Tok::Ident(rest[..len].to_string()), start));
        }
        Err(ParseError {
            offset: start,
            expected: format!("a token (found `{ch}`)"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        let mut i = start;
        let mut is_int = true;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'.' {
            is_int = false;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                is_int = false;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        self.pos = i;
        if is_int {
            if let Ok(k) = text.parse::<i64>() {
                return Ok((Tok::Int(k), start));
            }
        }
        text.parse::<f64>()
            .map(|x| (Tok::Num(x), start))
            .map_err(|_| ParseError {
                offset: start,
                expected: "a numeric literal".into(),
            })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.at,
            expected: expected.to_string(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump()?;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.bump()?;
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.bump()?;
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Minus {
            self.bump()?;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.atom()?;
        while self.tok == Tok::Caret {
            self.bump()?;
            let k = self.exponent()?;
            base = Expr::Pow(Box::new(base), k);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let parenthesized = self.tok == Tok::LParen;
        if parenthesized {
            self.bump()?;
        }
        let negative = self.tok == Tok::Minus;
        if negative {
            self.bump()?;
        }
        let Tok::Int(k) = self.tok else {
            return self.fail("an integer exponent");
        };
        let at = self.at;
        self.bump()?;
        if parenthesized {
            if self.tok != Tok::RParen {
                return self.fail("`)`");
            }
            self.bump()?;
        }
        let k = if negative { -k } else { k };
        i32::try_from(k).map_err(|_| ParseError {
            offset: at,
            expected: "an exponent that fits in 32 bits".into(),
        })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(x) => {
                self.bump()?;
                Ok(Expr::num(x))
            }
            Tok::Int(k) => {
                self.bump()?;
                Ok(Expr::num(k as f64))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return self.fail("`)`");
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                if name == "i" {
                    return Ok(Expr::Num(Complex64::i()));
                }
                if name == "pi" {
                    return Ok(Expr::num(std::f64::consts::PI));
                }
                if let Some(func) = Func::from_name(&name) {
                    if self.tok != Tok::LParen {
                        return self.fail("`(` after function name");
                    }
                    self.bump()?;
                    let arg = self.expr()?;
                    if self.tok != Tok::RParen {
                        return self.fail("`)`");
                    }
                    self.bump()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                variable(&name).map(Expr::Var).ok_or(ParseError {
                    offset: at,
                    expected: "a variable t<k>/z<k>, `i`, `pi`, or one of exp, log, re, im, conj, abs2"
                        .into(),
                })
            }
            _ => self.fail("an operand"),
        }
    }
}

fn variable(name: &str) -> Option<Var> {
    let (kind, digits) = name.split_at(1);
    let k: usize = digits.parse().ok()?;
    if k == 0 || digits.starts_with('0') {
        return None;
    }
    match kind {
        "t" => Some(Var::Base(k - 1)),
        "z" => Some(Var::Fibre(k - 1)),
        _ => None,
    }
}

/// Parses an expression with the usual precedence: `^` binds tighter than
/// unary minus, which binds tighter than `*` `/`, then `+` `-`. Binary
/// operators associate to the left. Exponents must be integer literals.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        lexer: Lexer { src: text, pos: 0 },
        tok: Tok::End,
        at: 0,
    };
    p.bump()?;
    if p.tok == Tok::End {
        return p.fail("an expression");
    }
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.fail("an operator or end of input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Box<Expr> {
        Box::new(Expr::num(1.0))
    }

    #[test]
    fn parses_abs2_minus_one() {
        let e = parse("abs2(z1) - 1").unwrap();
        assert_eq!(
            e,
            Expr::Sub(Box::new(Expr::Call(Func::Abs2, Box::new(Expr::z(0)))), one())
        );
    }

    #[test]
    fn parses_nested_call() {
        let e = parse("abs2(z1)*exp(abs2(t1)) - 1").unwrap();
        let expected = Expr::Sub(
            Box::new(Expr::Mul(
                Box::new(Expr::Call(Func::Abs2, Box::new(Expr::z(0)))),
                Box::new(Expr::Call(
                    Func::Exp,
                    Box::new(Expr::Call(Func::Abs2, Box::new(Expr::t(0)))),
                )),
            )),
            one(),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn double_plus_is_rejected_at_offset_5() {
        let err = parse("z1 + + 2").unwrap_err();
        assert_eq!(err.offset, 5);
        assert!(err.expected.contains("operand"));
    }

    #[test]
    fn precedence_and_associativity() {
        // -x^2 is -(x^2)
        assert_eq!(
            parse("-z1^2").unwrap(),
            Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::z(0)), 2)))
        );
        // a - b - c is (a - b) - c
        let e = parse("1 - 2 - 3").unwrap();
        assert_eq!(e.eval_at(&[], &[]).unwrap().re, -4.0);
        let e = parse("8 / 4 / 2").unwrap();
        assert_eq!(e.eval_at(&[], &[]).unwrap().re, 1.0);
        let e = parse("2*3^2").unwrap();
        assert_eq!(e.eval_at(&[], &[]).unwrap().re, 18.0);
        let e = parse("z1^(-1)").unwrap();
        assert_eq!(e, Expr::Pow(Box::new(Expr::z(0)), -1));
    }

    #[test]
    fn literals() {
        let e = parse("1.5e-1 + 2*i").unwrap();
        assert_eq!(e.eval_at(&[], &[]).unwrap(), Complex64::new(0.15, 2.0));
        assert!(parse("z1^1.5").is_err());
        let e = parse("2*pi").unwrap();
        assert_eq!(e.eval_at(&[], &[]).unwrap().re, std::f64::consts::TAU);
    }

    #[test]
    fn error_cases() {
        assert_eq!(parse("").unwrap_err().offset, 0);
        assert_eq!(parse("   ").unwrap_err().offset, 3);
        assert_eq!(parse("(z1").unwrap_err().offset, 3);
        assert_eq!(parse("z1 z2").unwrap_err().offset, 3);
        assert_eq!(parse("sin(z1)").unwrap_err().offset, 0);
        assert_eq!(parse("z0").unwrap_err().offset, 0);
        assert_eq!(parse("exp z1").unwrap_err().offset, 4);
        assert_eq!(parse("z1 # 2").unwrap_err().offset, 3);
    }
}
