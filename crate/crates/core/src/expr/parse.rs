//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' exponent)?
//! base   := number | ident | func '(' expr ')' | 'diff' '(' ident (',' ident ',' nat)+ ')' | '(' expr ')'
//! ```
//!
//! Exponents must be rational literals, optionally signed or parenthesized.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{Expr, Func, Rational, Symbol};
use crate::jet::{JetSpace, MultiIndex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at {pos}")]
    UnknownSymbol { pos: usize, name: String },
    #[error("unknown function `{name}` at {pos}")]
    UnknownFunction { pos: usize, name: String },
    #[error("exponent at {pos} must be a rational constant")]
    SymbolicExponent { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownSymbol { pos, .. }
            | ParseError::UnknownFunction { pos, .. }
            | ParseError::SymbolicExponent { pos } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit()) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &text[start..i];
            let mut frac = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac = &text[fs..i];
            }
            let digits = format!("{int_part}{frac}");
            let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().unwrap() };
            let denom = num_traits::pow(BigInt::from(10), frac.len());
            out.push((Tok::Num(Rational::new(numer, denom)), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    space: &'a JetSpace,
}

/// Parse `text` against the symbol table of `space`.
pub fn parse(text: &str, space: &JetSpace) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: tokenize(text)?, at: 0, space };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(p.error("unexpected trailing input")),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos(), msg: msg.to_string() }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                factors.push(self.unary()?.recip());
            } else {
                break;
            }
        }
        Ok(Expr::product(factors))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.eat('^') {
            let r = self.exponent()?;
            return Ok(Expr::pow(&base, r));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Rational, ParseError> {
        let start = self.pos();
        let symbolic = ParseError::SymbolicExponent { pos: start };
        if self.eat('(') {
            let neg = self.eat('-');
            let mut r = match self.bump().0 {
                Tok::Num(r) => r,
                _ => return Err(symbolic),
            };
            if self.eat('/') {
                match self.bump().0 {
                    Tok::Num(d) if !d.is_zero() => r /= d,
                    _ => return Err(symbolic),
                }
            }
            if !self.eat(')') {
                return Err(symbolic);
            }
            return Ok(if neg { -r } else { r });
        }
        let neg = self.eat('-');
        match self.bump().0 {
            Tok::Num(r) => Ok(if neg { -r } else { r }),
            _ => Err(symbolic),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(r) => Ok(Expr::constant(r)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    self.bump();
                    if name == "diff" {
                        return self.diff_args(pos);
                    }
                    let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction { pos, name })?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::apply(func, &arg));
                }
                match self.space.lookup(&name) {
                    Some(s) => Ok(Expr::symbol(s)),
                    None => Err(ParseError::UnknownSymbol { pos, name }),
                }
            }
            Tok::End => Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() }),
            Tok::Op(c) => Err(ParseError::Syntax { pos, msg: format!("unexpected `{c}`") }),
        }
    }

    fn diff_args(&mut self, pos: usize) -> Result<Expr, ParseError> {
        let (tok, dpos) = self.bump();
        let name = match tok {
            Tok::Ident(n) => n,
            _ => return Err(ParseError::Syntax { pos: dpos, msg: "expected a dependent variable".into() }),
        };
        let dep = match self.space.lookup(&name) {
            Some(Symbol::Jet(a, j)) if j.order() == 0 => a,
            _ => return Err(ParseError::UnknownSymbol { pos: dpos, name }),
        };
        let mut index = MultiIndex::zero(self.space.n());
        let mut any = false;
        while self.eat(',') {
            let (tok, vpos) = self.bump();
            let var = match tok {
                Tok::Ident(n) => n,
                _ => return Err(ParseError::Syntax { pos: vpos, msg: "expected an independent variable".into() }),
            };
            let i = match self.space.lookup(&var) {
                Some(Symbol::Indep(i)) => i as usize,
                _ => return Err(ParseError::UnknownSymbol { pos: vpos, name: var }),
            };
            self.expect(',')?;
            let (tok, npos) = self.bump();
            let count = match tok {
                Tok::Num(r) if r.is_integer() && r >= Rational::one() => r.to_integer(),
                _ => return Err(ParseError::Syntax { pos: npos, msg: "expected a positive integer".into() }),
            };
            let count: usize = count
                .try_into()
                .map_err(|_| ParseError::Syntax { pos: npos, msg: "derivative count too large".into() })?;
            for _ in 0..count {
                index = index.increment(i);
            }
            any = true;
        }
        if !any {
            return Err(ParseError::Syntax { pos, msg: "diff needs at least one variable".into() });
        }
        self.expect(')')?;
        Ok(Expr::symbol(Symbol::Jet(dep as u16, index)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> JetSpace {
        JetSpace::new(&["x"], &["u"], 3).unwrap()
    }

    #[test]
    fn grammar_cases() {
        let s = space();
        let e = s.parse("u_x^2 + 1").unwrap();
        assert_eq!(e, &s.ode_jet(0, 1).powi(2) + &Expr::one());
        assert_eq!(s.parse("diff(u,x,2)").unwrap(), s.ode_jet(0, 2));
        assert_eq!(s.parse("x^(-1/2)").unwrap(), Expr::pow(&s.x(0), super::super::rat(-1, 2)));
        assert_eq!(s.parse("0.25*x").unwrap(), &Expr::rational(1, 4) * &s.x(0));
        assert_eq!(s.parse("-x^2").unwrap(), -&s.x(0).powi(2));
    }

    #[test]
    fn errors_carry_positions() {
        let s = space();
        assert!(matches!(s.parse("exp(lam*x)"), Err(ParseError::UnknownSymbol { pos: 4, .. })));
        assert!(matches!(s.parse("foo(x)"), Err(ParseError::UnknownFunction { pos: 0, .. })));
        assert!(matches!(s.parse("x^u"), Err(ParseError::SymbolicExponent { pos: 2 })));
        assert!(matches!(s.parse("x + * u"), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(s.parse("(x"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn parameters_resolve() {
        let s = JetSpace::with_params(&["x"], &["u"], &["lam"], 1).unwrap();
        assert!(s.parse("exp(lam*x)").is_ok());
    }
}
