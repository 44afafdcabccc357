//! Immutable symbolic expressions over jet coordinates.
//!
//! Every constructor returns a canonical tree: nested sums and products are
//! flattened, constants folded, like terms and like factors collected, and
//! children sorted by a fixed total order. Canonical form is deliberately
//! light; identities that need real simplification are decided by the
//! numeric oracle in [`crate::oracle`].

mod calculus;
mod eval;
mod parse;
mod print;

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::jet::MultiIndex;

pub use eval::{EvalError, EvalMemo, EvalPoint, ExactPoint};
pub use parse::{parse, ParseError};
pub use print::render;

/// Exact rational constant.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Whitelisted elementary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// A coordinate or parameter an expression may depend on.
///
/// Jet coordinates are keyed by `(dependent index, multi-index)`, so the
/// dependent variable `u^a` itself is the jet coordinate with the zero
/// multi-index. `Aux` symbols are anonymous temporaries used by algorithms
/// that need fresh variables (reduced coordinates, unknowns).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Indep(u16),
    Jet(u16, MultiIndex),
    Param(u16),
    Aux(u32),
}

impl Symbol {
    pub fn jet(dep: usize, index: MultiIndex) -> Symbol {
        Symbol::Jet(dep as u16, index)
    }

    /// Jet order of the symbol; independent variables and parameters have none.
    pub fn jet_order(&self) -> Option<usize> {
        match self {
            Symbol::Jet(_, j) => Some(j.order()),
            _ => None,
        }
    }

    fn mask_bit(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        1u64 << (h.finish() % 64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Const(Rational),
    Sym(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Expr, Rational),
    Apply(Func, Expr),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
    mask: u64,
}

/// Reference-counted immutable expression. Cloning is cheap.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.kind == other.0.kind)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.kind.cmp(&other.0.kind)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print::render(self, None))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print::render(self, None))
    }
}

fn node_hash(kind: &Kind) -> u64 {
    let mut h = DefaultHasher::new();
    match kind {
        Kind::Const(c) => {
            0u8.hash(&mut h);
            c.hash(&mut h);
        }
        Kind::Sym(s) => {
            1u8.hash(&mut h);
            s.hash(&mut h);
        }
        Kind::Sum(ts) => {
            2u8.hash(&mut h);
            for t in ts {
                h.write_u64(t.0.hash);
            }
        }
        Kind::Product(fs) => {
            3u8.hash(&mut h);
            for t in fs {
                h.write_u64(t.0.hash);
            }
        }
        Kind::Power(b, r) => {
            4u8.hash(&mut h);
            h.write_u64(b.0.hash);
            r.hash(&mut h);
        }
        Kind::Apply(func, a) => {
            5u8.hash(&mut h);
            func.hash(&mut h);
            h.write_u64(a.0.hash);
        }
    }
    h.finish()
}

fn node_mask(kind: &Kind) -> u64 {
    match kind {
        Kind::Const(_) => 0,
        Kind::Sym(s) => s.mask_bit(),
        Kind::Sum(ts) | Kind::Product(ts) => ts.iter().fold(0, |m, t| m | t.0.mask),
        Kind::Power(b, _) => b.0.mask,
        Kind::Apply(_, a) => a.0.mask,
    }
}

impl Expr {
    fn raw(kind: Kind) -> Expr {
        let hash = node_hash(&kind);
        let mask = node_mask(&kind);
        Expr(Arc::new(Node { kind, hash, mask }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::raw(Kind::Const(c))
    }

    pub fn integer(n: i64) -> Expr {
        Expr::constant(int(n))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::constant(rat(num, den))
    }

    pub fn zero() -> Expr {
        Expr::integer(0)
    }

    pub fn one() -> Expr {
        Expr::integer(1)
    }

    pub fn symbol(s: Symbol) -> Expr {
        Expr::raw(Kind::Sym(s))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match &self.0.kind {
            Kind::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match &self.0.kind {
            Kind::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0.kind, Kind::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(&self.0.kind, Kind::Const(c) if c.is_one())
    }

    /// Cheap conservative test: `false` means `s` certainly does not occur.
    pub fn may_contain(&self, s: &Symbol) -> bool {
        self.0.mask & s.mask_bit() != 0
    }

    pub(crate) fn is_shared(&self) -> bool {
        Arc::strong_count(&self.0) > 1
    }

    pub(crate) fn address(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub(crate) fn mask(&self) -> u64 {
        self.0.mask
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        if !self.may_contain(s) {
            return false;
        }
        match &self.0.kind {
            Kind::Const(_) => false,
            Kind::Sym(t) => t == s,
            Kind::Sum(ts) | Kind::Product(ts) => ts.iter().any(|t| t.contains(s)),
            Kind::Power(b, _) => b.contains(s),
            Kind::Apply(_, a) => a.contains(s),
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    pub(crate) fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match &self.0.kind {
            Kind::Const(_) => {}
            Kind::Sym(s) => {
                out.insert(s.clone());
            }
            Kind::Sum(ts) | Kind::Product(ts) => ts.iter().for_each(|t| t.collect_symbols(out)),
            Kind::Power(b, _) => b.collect_symbols(out),
            Kind::Apply(_, a) => a.collect_symbols(out),
        }
    }

    /// Highest jet order among the free symbols (0 when none are derivatives).
    pub fn jet_order(&self) -> usize {
        self.free_symbols()
            .iter()
            .filter_map(Symbol::jet_order)
            .max()
            .unwrap_or(0)
    }

    /// Number of nodes counted as a tree.
    pub fn size(&self) -> usize {
        match &self.0.kind {
            Kind::Const(_) | Kind::Sym(_) => 1,
            Kind::Sum(ts) | Kind::Product(ts) => 1 + ts.iter().map(Expr::size).sum::<usize>(),
            Kind::Power(b, _) => 1 + b.size(),
            Kind::Apply(_, a) => 1 + a.size(),
        }
    }

    // ---- canonical constructors ----

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = Rational::zero();
        let mut coeffs: HashMap<Expr, Rational> = HashMap::new();
        for t in terms {
            push_term(&t, &Rational::one(), &mut constant, &mut coeffs);
        }
        let mut parts: Vec<Expr> = coeffs
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(rest, c)| scale_term(rest, c))
            .collect();
        if !constant.is_zero() {
            parts.push(Expr::constant(constant));
        }
        match parts.len() {
            0 => Expr::zero(),
            1 => parts.pop().unwrap(),
            _ => {
                parts.sort();
                Expr::raw(Kind::Sum(parts))
            }
        }
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut acc = ProductAcc::default();
        for f in factors {
            acc.push(&f, &Rational::one());
            if acc.coef.is_zero() {
                return Expr::zero();
            }
        }
        acc.finish()
    }

    pub fn pow(base: &Expr, exp: Rational) -> Expr {
        if exp.is_zero() {
            return Expr::one();
        }
        if exp.is_one() {
            return base.clone();
        }
        match &base.0.kind {
            Kind::Const(c) => {
                if exp.is_integer() {
                    if c.is_zero() {
                        if exp.is_positive() {
                            return Expr::zero();
                        }
                        return Expr::raw(Kind::Power(base.clone(), exp));
                    }
                    return Expr::constant(rational_powi(c, &exp));
                }
                if c.is_one() {
                    return Expr::one();
                }
                if c.is_zero() && exp.is_positive() {
                    return Expr::zero();
                }
                if let Some(root) = exact_root(c, &exp) {
                    return Expr::constant(root);
                }
                Expr::raw(Kind::Power(base.clone(), exp))
            }
            Kind::Power(inner, e1) if exp.is_integer() => Expr::pow(inner, e1 * &exp),
            Kind::Product(fs) if exp.is_integer() => {
                Expr::product(fs.iter().map(|f| Expr::pow(f, exp.clone())))
            }
            Kind::Apply(Func::Exp, a) => Expr::apply(Func::Exp, &(a * &Expr::constant(exp))),
            _ => Expr::raw(Kind::Power(base.clone(), exp)),
        }
    }

    pub fn powi(&self, n: i64) -> Expr {
        Expr::pow(self, int(n))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    pub fn apply(func: Func, arg: &Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            if c.is_zero() {
                match func {
                    Func::Exp | Func::Cos => return Expr::one(),
                    Func::Sin | Func::Tan | Func::Sqrt => return Expr::zero(),
                    Func::Log => {}
                }
            }
            if c.is_one() {
                match func {
                    Func::Log => return Expr::zero(),
                    Func::Sqrt => return Expr::one(),
                    _ => {}
                }
            }
            if func == Func::Sqrt && c.is_positive() {
                if let Some(root) = exact_root(c, &rat(1, 2)) {
                    return Expr::constant(root);
                }
            }
        }
        if func == Func::Log {
            if let Kind::Apply(Func::Exp, inner) = &arg.0.kind {
                return inner.clone();
            }
        }
        Expr::raw(Kind::Apply(func, arg.clone()))
    }

    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self)
    }
    pub fn log(&self) -> Expr {
        Expr::apply(Func::Log, self)
    }
    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self)
    }
    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self)
    }
    pub fn tan(&self) -> Expr {
        Expr::apply(Func::Tan, self)
    }
    pub fn sqrt(&self) -> Expr {
        Expr::apply(Func::Sqrt, self)
    }

    /// Split a term into its rational coefficient and the remaining factor.
    pub fn split_coefficient(&self) -> (Rational, Expr) {
        match &self.0.kind {
            Kind::Const(c) => (c.clone(), Expr::one()),
            Kind::Product(fs) => match fs[0].as_const() {
                Some(c) => {
                    let rest = if fs.len() == 2 {
                        fs[1].clone()
                    } else {
                        Expr::raw(Kind::Product(fs[1..].to_vec()))
                    };
                    (c.clone(), rest)
                }
                None => (Rational::one(), self.clone()),
            },
            _ => (Rational::one(), self.clone()),
        }
    }

    /// Fully distribute products over sums and expand small positive integer
    /// powers of sums. Rational functions keep their denominators as atoms.
    /// True when only sums, products and nonnegative integer powers occur.
    pub fn is_polynomial(&self) -> bool {
        match &self.0.kind {
            Kind::Const(_) | Kind::Sym(_) => true,
            Kind::Sum(ts) | Kind::Product(ts) => ts.iter().all(Expr::is_polynomial),
            Kind::Power(b, r) => r.is_integer() && !r.is_negative() && b.is_polynomial(),
            Kind::Apply(..) => false,
        }
    }

    /// Expand polynomials; leave anything with denominators or functions alone,
    /// where distributing only makes the tree grow.
    pub fn tidy(&self) -> Expr {
        if self.is_polynomial() {
            self.expand()
        } else {
            self.clone()
        }
    }

    pub fn expand(&self) -> Expr {
        match &self.0.kind {
            Kind::Const(_) | Kind::Sym(_) => self.clone(),
            Kind::Sum(ts) => Expr::sum(ts.iter().map(Expr::expand)),
            Kind::Product(fs) => {
                let mut terms = vec![Expr::one()];
                for f in fs {
                    let f = f.expand();
                    terms = multiply_out(&terms, &f);
                }
                Expr::sum(terms)
            }
            Kind::Power(b, r) => {
                let b = b.expand();
                if r.is_integer() && r.is_positive() && matches!(b.kind(), Kind::Sum(_)) {
                    if let Some(n) = r.to_integer().to_u32() {
                        if n <= 8 {
                            let mut terms = vec![Expr::one()];
                            for _ in 0..n {
                                terms = multiply_out(&terms, &b);
                            }
                            return Expr::sum(terms);
                        }
                    }
                }
                Expr::pow(&b, r.clone())
            }
            Kind::Apply(f, a) => Expr::apply(*f, &a.expand()),
        }
    }
}

fn multiply_out(terms: &[Expr], factor: &Expr) -> Vec<Expr> {
    match factor.kind() {
        Kind::Sum(fs) => {
            let mut out = Vec::with_capacity(terms.len() * fs.len());
            for t in terms {
                for f in fs {
                    out.push(t * f);
                }
            }
            out
        }
        _ => terms.iter().map(|t| t * factor).collect(),
    }
}

fn push_term(t: &Expr, scale: &Rational, constant: &mut Rational, coeffs: &mut HashMap<Expr, Rational>) {
    match &t.0.kind {
        Kind::Const(c) => *constant += c * scale,
        Kind::Sum(ts) => {
            for s in ts {
                push_term(s, scale, constant, coeffs);
            }
        }
        _ => {
            let (c, rest) = t.split_coefficient();
            // A product whose only non-constant factor is a sum scaled by a
            // constant is distributed so that cancellations are visible.
            if let Kind::Sum(inner) = &rest.0.kind {
                let s = &c * scale;
                for i in inner {
                    push_term(i, &s, constant, coeffs);
                }
                return;
            }
            *coeffs.entry(rest).or_insert_with(Rational::zero) += c * scale;
        }
    }
}

fn scale_term(rest: Expr, c: Rational) -> Expr {
    if c.is_one() {
        return rest;
    }
    match &rest.0.kind {
        Kind::Product(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::constant(c));
            v.extend(fs.iter().cloned());
            Expr::raw(Kind::Product(v))
        }
        _ => Expr::raw(Kind::Product(vec![Expr::constant(c), rest])),
    }
}

#[derive(Default)]
struct ProductAcc {
    coef: Rational,
    powers: HashMap<Expr, Rational>,
    exp_args: Vec<Expr>,
    started: bool,
}

impl ProductAcc {
    fn push(&mut self, f: &Expr, e: &Rational) {
        if !self.started {
            self.coef = Rational::one();
            self.started = true;
        }
        match &f.0.kind {
            Kind::Const(c) => {
                if e.is_one() {
                    self.coef *= c;
                } else {
                    self.push_base(f, e.clone());
                }
            }
            Kind::Product(fs) if e.is_integer() => {
                for g in fs {
                    self.push(g, e);
                }
            }
            Kind::Power(b, r) => self.push_base(b, r * e),
            Kind::Apply(Func::Exp, a) => {
                self.exp_args.push(if e.is_one() { a.clone() } else { a * &Expr::constant(e.clone()) })
            }
            _ => self.push_base(f, e.clone()),
        }
    }

    fn push_base(&mut self, b: &Expr, e: Rational) {
        if let Some(c) = b.as_const() {
            if e.is_integer() && !c.is_zero() {
                self.coef *= rational_powi(c, &e);
                return;
            }
        }
        *self.powers.entry(b.clone()).or_insert_with(Rational::zero) += e;
    }

    fn finish(mut self) -> Expr {
        if !self.started {
            return Expr::one();
        }
        let mut factors: Vec<Expr> = Vec::with_capacity(self.powers.len() + 1);
        let mut renormalize = false;
        for (b, e) in self.powers.drain() {
            if e.is_zero() {
                continue;
            }
            let p = Expr::pow(&b, e);
            match &p.0.kind {
                Kind::Const(c) => self.coef *= c,
                Kind::Product(fs) => {
                    renormalize = true;
                    for f in fs {
                        match f.as_const() {
                            Some(c) => self.coef *= c,
                            None => factors.push(f.clone()),
                        }
                    }
                }
                _ => factors.push(p),
            }
        }
        if renormalize {
            factors.push(Expr::constant(std::mem::take(&mut self.coef)));
            factors.extend(self.exp_args.drain(..).map(|a| Expr::apply(Func::Exp, &a)));
            return Expr::product(factors);
        }
        if !self.exp_args.is_empty() {
            let arg = Expr::sum(std::mem::take(&mut self.exp_args));
            let e = Expr::apply(Func::Exp, &arg);
            match e.as_const() {
                Some(c) => self.coef *= c,
                None => factors.push(e),
            }
        }
        if self.coef.is_zero() {
            return Expr::zero();
        }
        if factors.is_empty() {
            return Expr::constant(self.coef);
        }
        if factors.len() == 1 {
            let f = factors.pop().unwrap();
            if self.coef.is_one() {
                return f;
            }
            if let Kind::Sum(ts) = &f.0.kind {
                let c = Expr::constant(self.coef);
                return Expr::sum(ts.iter().map(|t| t * &c));
            }
            factors.push(f);
        }
        factors.sort();
        if !self.coef.is_one() {
            factors.insert(0, Expr::constant(self.coef));
        }
        Expr::raw(Kind::Product(factors))
    }
}

fn rational_powi(c: &Rational, e: &Rational) -> Rational {
    let n = e.to_integer();
    let n = n.to_i32().expect("exponent fits in i32");
    if n >= 0 {
        num_traits::pow(c.clone(), n as usize)
    } else {
        num_traits::pow(c.recip(), (-n) as usize)
    }
}

/// `c^e` when it is exactly rational (e.g. `4^(1/2) = 2`).
fn exact_root(c: &Rational, e: &Rational) -> Option<Rational> {
    if !c.is_positive() {
        return None;
    }
    let q = e.denom().to_u32()?;
    if q > 8 {
        return None;
    }
    let nr = int_root(c.numer(), q)?;
    let dr = int_root(c.denom(), q)?;
    let base = Rational::new(nr, dr);
    Some(rational_powi(&base, &Rational::from_integer(e.numer().clone())))
}

fn int_root(n: &BigInt, q: u32) -> Option<BigInt> {
    let r = n.nth_root(q);
    if num_traits::pow(r.clone(), q as usize) == *n {
        Some(r)
    } else {
        None
    }
}

// ---- operator sugar ----

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), rhs.clone()])
    }
}
impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}
impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), -rhs])
    }
}
impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        &self - &rhs
    }
}
impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::product([self.clone(), rhs.clone()])
    }
}
impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}
impl Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::product([self.clone(), rhs.recip()])
    }
}
impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        &self / &rhs
    }
}
impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::integer(-1), self.clone()])
    }
}
impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::integer(n)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Expr {
        Expr::symbol(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(i: u32) -> Expr {
        Expr::symbol(Symbol::Aux(i))
    }

    #[test]
    fn like_terms_collect() {
        let a = s(0);
        let e = &(&a + &a) - &(&Expr::integer(2) * &a);
        assert!(e.is_zero());
    }

    #[test]
    fn powers_merge() {
        let a = s(0);
        let e = &(&a * &a) * &a.recip();
        assert_eq!(e, a);
        assert_eq!(Expr::pow(&Expr::integer(4), rat(1, 2)), Expr::integer(2));
    }

    #[test]
    fn exp_factors_merge() {
        let a = s(0);
        let e = &a.exp() * &(-&a).exp();
        assert!(e.is_one());
        let p = Expr::pow(&a.exp(), int(-2));
        assert_eq!(p, (&Expr::integer(-2) * &a).exp());
    }

    #[test]
    fn canonical_is_order_independent() {
        let (a, b, c) = (s(0), s(1), s(2));
        let e1 = Expr::sum([a.clone(), &b * &c, Expr::integer(3)]);
        let e2 = Expr::sum([Expr::integer(3), &c * &b, a.clone()]);
        assert_eq!(e1, e2);
    }

    #[test]
    fn expand_distributes() {
        let (a, b) = (s(0), s(1));
        let sq = Expr::pow(&(&a + &b), int(2)).expand();
        let direct = Expr::sum([&a * &a, &Expr::integer(2) * &(&a * &b), &b * &b]);
        assert_eq!(sq, direct);
    }

    #[test]
    fn constant_distributes_over_single_sum() {
        let (a, b) = (s(0), s(1));
        let e = &Expr::integer(2) * &(&a + &b);
        assert!(matches!(e.kind(), Kind::Sum(_)));
    }
}
