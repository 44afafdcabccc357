use std::collections::HashMap;

use num_traits::One;

use super::{Expr, Func, Kind, Rational, Symbol};

impl Expr {
    /// Exact partial derivative, treating every other symbol as independent.
    pub fn partial(&self, s: &Symbol) -> Expr {
        if !self.may_contain(s) {
            return Expr::zero();
        }
        match self.kind() {
            Kind::Const(_) => Expr::zero(),
            Kind::Sym(t) => {
                if t == s {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Kind::Sum(ts) => Expr::sum(ts.iter().map(|t| t.partial(s))),
            Kind::Product(fs) => {
                let mut terms = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    if !f.may_contain(s) {
                        continue;
                    }
                    let df = f.partial(s);
                    if df.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                    factors.extend(fs[..i].iter().cloned());
                    factors.push(df);
                    factors.extend(fs[i + 1..].iter().cloned());
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Kind::Power(b, r) => {
                let db = b.partial(s);
                if db.is_zero() {
                    return Expr::zero();
                }
                let r1: Rational = r - Rational::one();
                Expr::product([Expr::constant(r.clone()), Expr::pow(b, r1), db])
            }
            Kind::Apply(f, a) => {
                let da = a.partial(s);
                if da.is_zero() {
                    return Expr::zero();
                }
                &self.outer_derivative(*f, a) * &da
            }
        }
    }

    /// `f'(a)` for `self = f(a)`.
    pub(crate) fn outer_derivative(&self, f: Func, a: &Expr) -> Expr {
        match f {
            Func::Exp => self.clone(),
            Func::Log => a.recip(),
            Func::Sin => a.cos(),
            Func::Cos => -a.sin(),
            Func::Tan => &Expr::one() + &a.tan().powi(2),
            Func::Sqrt => &Expr::rational(1, 2) * &a.sqrt().recip(),
        }
    }

    /// Derivation of the whole tree in one pass, given the derivative of each
    /// symbol. Shared subexpressions are differentiated once.
    pub fn derive_with<E>(&self, leaf: &mut impl FnMut(&Symbol) -> Result<Expr, E>) -> Result<Expr, E> {
        let mut memo = HashMap::new();
        self.derive_rec(leaf, &mut memo)
    }

    fn derive_rec<E>(
        &self,
        leaf: &mut impl FnMut(&Symbol) -> Result<Expr, E>,
        memo: &mut HashMap<usize, Expr>,
    ) -> Result<Expr, E> {
        let shared = self.is_shared();
        if shared {
            if let Some(d) = memo.get(&self.address()) {
                return Ok(d.clone());
            }
        }
        let d = match self.kind() {
            Kind::Const(_) => Expr::zero(),
            Kind::Sym(s) => leaf(s)?,
            Kind::Sum(ts) => Expr::sum(ts.iter().map(|t| t.derive_rec(leaf, memo)).collect::<Result<Vec<_>, E>>()?),
            Kind::Product(fs) => {
                let mut terms = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    let df = f.derive_rec(leaf, memo)?;
                    if df.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                    factors.extend(fs[..i].iter().cloned());
                    factors.push(df);
                    factors.extend(fs[i + 1..].iter().cloned());
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Kind::Power(b, r) => {
                let db = b.derive_rec(leaf, memo)?;
                if db.is_zero() {
                    Expr::zero()
                } else {
                    Expr::product([Expr::constant(r.clone()), Expr::pow(b, r - Rational::one()), db])
                }
            }
            Kind::Apply(f, a) => {
                let da = a.derive_rec(leaf, memo)?;
                if da.is_zero() {
                    Expr::zero()
                } else {
                    &self.outer_derivative(*f, a) * &da
                }
            }
        };
        if shared {
            memo.insert(self.address(), d.clone());
        }
        Ok(d)
    }

    /// Simultaneous substitution followed by canonicalization.
    pub fn substitute(&self, bindings: &HashMap<Symbol, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut mask = 0u64;
        for s in bindings.keys() {
            mask |= s.mask_bit();
        }
        self.subst_rec(bindings, mask)
    }

    pub fn substitute_one(&self, s: &Symbol, value: &Expr) -> Expr {
        let mut map = HashMap::new();
        map.insert(s.clone(), value.clone());
        self.substitute(&map)
    }

    /// Rebuild every node through the canonicalizing constructors.
    pub fn canonicalize(&self) -> Expr {
        match self.kind() {
            Kind::Const(_) | Kind::Sym(_) => self.clone(),
            Kind::Sum(ts) => Expr::sum(ts.iter().map(Expr::canonicalize)),
            Kind::Product(fs) => Expr::product(fs.iter().map(Expr::canonicalize)),
            Kind::Power(b, r) => Expr::pow(&b.canonicalize(), r.clone()),
            Kind::Apply(f, a) => Expr::apply(*f, &a.canonicalize()),
        }
    }

    fn subst_rec(&self, bindings: &HashMap<Symbol, Expr>, mask: u64) -> Expr {
        if self.mask() & mask == 0 {
            return self.clone();
        }
        match self.kind() {
            Kind::Const(_) => self.clone(),
            Kind::Sym(s) => bindings.get(s).cloned().unwrap_or_else(|| self.clone()),
            Kind::Sum(ts) => Expr::sum(ts.iter().map(|t| t.subst_rec(bindings, mask))),
            Kind::Product(fs) => Expr::product(fs.iter().map(|t| t.subst_rec(bindings, mask))),
            Kind::Power(b, r) => Expr::pow(&b.subst_rec(bindings, mask), r.clone()),
            Kind::Apply(f, a) => Expr::apply(*f, &a.subst_rec(bindings, mask)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aux(i: u32) -> (Symbol, Expr) {
        (Symbol::Aux(i), Expr::symbol(Symbol::Aux(i)))
    }

    #[test]
    fn square_rule() {
        let (s, x) = aux(0);
        assert_eq!(x.powi(2).partial(&s), &Expr::integer(2) * &x);
    }

    #[test]
    fn independent_symbol_gives_zero() {
        let (_, x) = aux(0);
        let (t, _) = aux(1);
        assert!((&x * &x.sin()).partial(&t).is_zero());
    }

    #[test]
    fn substitution_is_simultaneous() {
        let (s0, x) = aux(0);
        let (s1, y) = aux(1);
        let mut m = HashMap::new();
        m.insert(s0, y.clone());
        m.insert(s1, x.clone());
        assert_eq!((&x - &y).substitute(&m), &y - &x);
    }
}
