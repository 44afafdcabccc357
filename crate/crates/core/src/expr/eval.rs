use std::collections::HashMap;

use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use super::{Expr, Func, Kind, Rational, Symbol};

/// Assignment of floating-point values to symbols.
pub type EvalPoint = HashMap<Symbol, f64>;

/// Assignment of exact rationals to symbols.
pub type ExactPoint = HashMap<Symbol, Rational>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    /// The point lies outside the natural domain of some subexpression.
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("unbound symbol {0:?}")]
    Unbound(Symbol),
}

const NEAR_POLE: f64 = 1e-6;

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain("non-finite value"))
    }
}

/// Values of shared subexpressions at one point, keyed by node address.
///
/// Only valid while the evaluated expressions are alive.
#[derive(Default)]
pub struct EvalMemo(HashMap<usize, f64>);

impl Expr {
    pub fn eval(&self, point: &EvalPoint) -> Result<f64, EvalError> {
        self.eval_memo(point, &mut EvalMemo::default())
    }

    /// Evaluate with a memo so that shared subexpressions are computed once.
    pub fn eval_memo(&self, point: &EvalPoint, memo: &mut EvalMemo) -> Result<f64, EvalError> {
        let shared = !matches!(self.kind(), Kind::Const(_) | Kind::Sym(_)) && self.is_shared();
        if shared {
            if let Some(v) = memo.0.get(&self.address()) {
                return Ok(*v);
            }
        }
        let v = self.eval_node(point, memo)?;
        if shared {
            memo.0.insert(self.address(), v);
        }
        Ok(v)
    }

    fn eval_node(&self, point: &EvalPoint, memo: &mut EvalMemo) -> Result<f64, EvalError> {
        let v = match self.kind() {
            Kind::Const(c) => c.to_f64().unwrap_or(f64::NAN),
            Kind::Sym(s) => *point.get(s).ok_or_else(|| EvalError::Unbound(s.clone()))?,
            Kind::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval_memo(point, memo)?;
                }
                acc
            }
            Kind::Product(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval_memo(point, memo)?;
                }
                acc
            }
            Kind::Power(b, r) => {
                let base = b.eval_memo(point, memo)?;
                if r.is_negative() && base.abs() < NEAR_POLE {
                    return Err(EvalError::Domain("pole of a negative power"));
                }
                if r.is_integer() {
                    let n = r.to_integer().to_i32().ok_or(EvalError::Domain("exponent too large"))?;
                    base.powi(n)
                } else {
                    let num = r.numer().to_f64().unwrap_or(f64::NAN);
                    let den = r.denom().to_i64().unwrap_or(0);
                    if base < 0.0 {
                        if den % 2 == 0 {
                            return Err(EvalError::Domain("even root of a negative value"));
                        }
                        // odd root of a negative base is real
                        let root = -(-base).powf(1.0 / den as f64);
                        root.powf(num)
                    } else {
                        base.powf(num / den as f64)
                    }
                }
            }
            Kind::Apply(f, a) => {
                let x = a.eval_memo(point, memo)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::Domain("log of a nonpositive value"));
                        }
                        x.ln()
                    }
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => {
                        if x.cos().abs() < NEAR_POLE {
                            return Err(EvalError::Domain("pole of tan"));
                        }
                        x.tan()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::Domain("sqrt of a negative value"));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        finite(v)
    }
}

impl Expr {
    /// Exact value when the expression is rational in its symbols.
    ///
    /// `None` for transcendental functions, fractional powers, poles and
    /// unbound symbols.
    pub fn eval_exact(&self, point: &ExactPoint) -> Option<Rational> {
        self.eval_exact_memo(point, &mut HashMap::new())
    }

    fn eval_exact_memo(&self, point: &ExactPoint, memo: &mut HashMap<usize, Option<Rational>>) -> Option<Rational> {
        let shared = !matches!(self.kind(), Kind::Const(_) | Kind::Sym(_)) && self.is_shared();
        if shared {
            if let Some(v) = memo.get(&self.address()) {
                return v.clone();
            }
        }
        let v = match self.kind() {
            Kind::Const(c) => Some(c.clone()),
            Kind::Sym(s) => point.get(s).cloned(),
            Kind::Sum(ts) => ts.iter().try_fold(Rational::from_integer(0.into()), |acc, t| {
                Some(acc + t.eval_exact_memo(point, memo)?)
            }),
            Kind::Product(fs) => fs.iter().try_fold(Rational::from_integer(1.into()), |acc, f| {
                Some(acc * f.eval_exact_memo(point, memo)?)
            }),
            Kind::Power(b, r) if r.is_integer() => {
                let base = b.eval_exact_memo(point, memo)?;
                let n = r.to_integer().to_i32()?;
                if n < 0 && num_traits::Zero::is_zero(&base) {
                    None
                } else {
                    Some(base.pow(n))
                }
            }
            Kind::Power(..) | Kind::Apply(..) => None,
        };
        if shared {
            memo.insert(self.address(), v.clone());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_and_reports_domain() {
        let s = Symbol::Aux(0);
        let x = Expr::symbol(s.clone());
        let mut p = EvalPoint::new();
        p.insert(s.clone(), -1.0);
        assert!(matches!(x.log().eval(&p), Err(EvalError::Domain(_))));
        let cube_root = Expr::pow(&x, super::super::rat(1, 3));
        assert!((cube_root.eval(&p).unwrap() + 1.0).abs() < 1e-12);
        p.insert(s, 0.0);
        assert!(x.recip().eval(&p).is_err());
        assert!(matches!(Expr::symbol(Symbol::Aux(9)).eval(&p), Err(EvalError::Unbound(_))));
    }

    #[test]
    fn exact_evaluation_of_rational_expressions() {
        let s = Symbol::Aux(0);
        let x = Expr::symbol(s.clone());
        let mut p = ExactPoint::new();
        p.insert(s.clone(), super::super::rat(1, 3));
        let e = &(&x * &x) + &x.recip();
        assert_eq!(e.eval_exact(&p), Some(super::super::rat(28, 9)));
        assert_eq!(x.exp().eval_exact(&p), None);
        assert_eq!(Expr::pow(&x, super::super::rat(1, 2)).eval_exact(&p), None);
        p.insert(s, super::super::rat(0, 1));
        assert_eq!(x.recip().eval_exact(&p), None);
    }
}
