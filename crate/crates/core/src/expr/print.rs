//! Text rendering that the parser reads back.

use num_traits::{One, Signed};

use super::{Expr, Kind, Rational, Symbol};
use crate::jet::JetSpace;

const SUM: u8 = 0;
const PRODUCT: u8 = 1;
const POWER_BASE: u8 = 2;

pub fn render(e: &Expr, space: Option<&JetSpace>) -> String {
    let mut out = String::new();
    write_expr(e, space, SUM, &mut out);
    out
}

fn symbol_name(s: &Symbol, space: Option<&JetSpace>) -> String {
    match space {
        Some(sp) => sp.symbol_name(s),
        None => match s {
            Symbol::Indep(i) => format!("x{i}"),
            Symbol::Param(p) => format!("p{p}"),
            Symbol::Aux(k) => format!("aux{k}"),
            Symbol::Jet(a, j) => {
                if j.order() == 0 {
                    format!("u{a}")
                } else {
                    let counts: Vec<String> = j.counts().iter().map(|c| c.to_string()).collect();
                    format!("u{a}_{}", counts.join("_"))
                }
            }
        },
    }
}

fn write_const(c: &Rational, prec: u8, out: &mut String) {
    let text = if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    };
    let needs_parens = (c.is_negative() || !c.is_integer()) && prec > SUM;
    if needs_parens {
        out.push('(');
        out.push_str(&text);
        out.push(')');
    } else {
        out.push_str(&text);
    }
}

fn write_exponent(r: &Rational, out: &mut String) {
    if r.is_integer() && r.is_positive() {
        out.push_str(&r.numer().to_string());
    } else if r.is_integer() {
        out.push_str(&format!("({})", r.numer()));
    } else {
        out.push_str(&format!("({}/{})", r.numer(), r.denom()));
    }
}

fn write_expr(e: &Expr, space: Option<&JetSpace>, prec: u8, out: &mut String) {
    match e.kind() {
        Kind::Const(c) => write_const(c, prec, out),
        Kind::Sym(s) => out.push_str(&symbol_name(s, space)),
        Kind::Sum(ts) => {
            if prec > SUM {
                out.push('(');
            }
            for (k, t) in ts.iter().enumerate() {
                let (c, rest) = t.split_coefficient();
                if k == 0 {
                    write_expr(t, space, SUM, out);
                } else if c.is_negative() {
                    out.push_str(" - ");
                    write_term(&(-c), &rest, space, out);
                } else {
                    out.push_str(" + ");
                    write_expr(t, space, SUM, out);
                }
            }
            if prec > SUM {
                out.push(')');
            }
        }
        Kind::Product(_) => {
            let (c, rest) = e.split_coefficient();
            let negative = c.is_negative();
            let wrap = prec > SUM && negative || prec >= POWER_BASE;
            if wrap {
                out.push('(');
            }
            if negative {
                out.push('-');
                write_term(&(-c), &rest, space, out);
            } else {
                write_term(&c, &rest, space, out);
            }
            if wrap {
                out.push(')');
            }
        }
        Kind::Power(b, r) => {
            if prec >= POWER_BASE {
                out.push('(');
            }
            write_expr(b, space, POWER_BASE, out);
            out.push('^');
            write_exponent(r, out);
            if prec >= POWER_BASE {
                out.push(')');
            }
        }
        Kind::Apply(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(a, space, SUM, out);
            out.push(')');
        }
    }
}

/// Writes `c * rest` with `c > 0`.
fn write_term(c: &Rational, rest: &Expr, space: Option<&JetSpace>, out: &mut String) {
    let factors: Vec<Expr> = match rest.kind() {
        Kind::Const(k) if k.is_one() => Vec::new(),
        Kind::Product(fs) => fs.clone(),
        _ => vec![rest.clone()],
    };
    let mut first = true;
    if !c.is_one() || factors.is_empty() {
        write_const(c, PRODUCT, out);
        first = false;
    }
    for f in &factors {
        if !first {
            out.push('*');
        }
        first = false;
        write_expr(f, space, PRODUCT, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_readably() {
        let s = JetSpace::new(&["x"], &["u"], 2).unwrap();
        for text in ["u_x^2 + 1", "x - u", "-3*x*u_xx", "exp(x*u)/2", "x^(-1)", "(x + u)^(1/2)"] {
            let e = s.parse(text).unwrap();
            let back = s.parse(&s.render(&e)).unwrap();
            assert_eq!(e, back, "{text} -> {}", s.render(&e));
        }
    }

    #[test]
    fn negative_terms_use_minus() {
        let s = JetSpace::new(&["x"], &["u"], 1).unwrap();
        let e = s.parse("x - 2*u").unwrap();
        assert!(s.render(&e).contains(" - "));
    }
}
