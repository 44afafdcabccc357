//! Jet-space coordinates, total derivatives and contact forms.

use std::collections::HashSet;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::expr::{Expr, ParseError, Symbol};
use crate::field::ProlongedField;

/// Symmetric multi-index stored as derivative counts per independent variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(SmallVec<[u8; 4]>);

impl MultiIndex {
    pub fn zero(n: usize) -> MultiIndex {
        MultiIndex(SmallVec::from_elem(0, n))
    }

    pub fn from_counts(counts: &[u8]) -> MultiIndex {
        MultiIndex(SmallVec::from_slice(counts))
    }

    pub fn unit(n: usize, i: usize) -> MultiIndex {
        MultiIndex::zero(n).increment(i)
    }

    /// Multi-index of order `k` in a one-variable space.
    pub fn ode(k: usize) -> MultiIndex {
        MultiIndex::from_counts(&[k as u8])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn count(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn increment(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    pub fn decrement(&self, i: usize) -> Option<MultiIndex> {
        if self.0[i] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[i] -= 1;
        Some(MultiIndex(v))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `self <= other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// Largest direction with a nonzero count.
    pub fn last_direction(&self) -> Option<usize> {
        (0..self.0.len()).rev().find(|&i| self.0[i] > 0)
    }

    /// Smallest direction with a nonzero count.
    pub fn first_direction(&self) -> Option<usize> {
        (0..self.0.len()).find(|&i| self.0[i] > 0)
    }

    /// Directions of the canonical path, in nondecreasing order.
    pub fn path(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order());
        for (i, &c) in self.0.iter().enumerate() {
            for _ in 0..c {
                out.push(i);
            }
        }
        out
    }

    /// All multi-indices in `n` variables of exactly order `k`.
    pub fn all_of_order(n: usize, k: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
            if prefix.len() == n - 1 {
                prefix.push(left as u8);
                out.push(MultiIndex::from_counts(prefix));
                prefix.pop();
                return;
            }
            for c in (0..=left).rev() {
                prefix.push(c as u8);
                rec(n, left - c, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, k, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All multi-indices of order `0..=k`, grouped by increasing order.
    pub fn all_up_to(n: usize, k: usize) -> Vec<MultiIndex> {
        (0..=k).flat_map(|r| MultiIndex::all_of_order(n, r)).collect()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// Coordinate system `(x^i, u^a, u^a_J)` of a jet space of finite order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetSpace {
    indep: Vec<String>,
    dep: Vec<String>,
    params: Vec<String>,
    max_order: usize,
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

impl JetSpace {
    pub fn new(indep: &[&str], dep: &[&str], max_order: usize) -> Result<JetSpace> {
        JetSpace::with_params(indep, dep, &[], max_order)
    }

    pub fn with_params(indep: &[&str], dep: &[&str], params: &[&str], max_order: usize) -> Result<JetSpace> {
        if indep.is_empty() || dep.is_empty() {
            return Err(Error::InvalidSpace("need at least one independent and one dependent variable".into()));
        }
        let mut seen = HashSet::new();
        for name in indep.iter().chain(dep).chain(params) {
            if !valid_name(name) {
                return Err(Error::InvalidSpace(format!("bad variable name `{name}`")));
            }
            if crate::expr::Func::from_name(name).is_some() || *name == "diff" {
                return Err(Error::InvalidSpace(format!("`{name}` is reserved")));
            }
            if !seen.insert(*name) {
                return Err(Error::InvalidSpace(format!("duplicate name `{name}`")));
            }
        }
        let space = JetSpace {
            indep: indep.iter().map(|s| s.to_string()).collect(),
            dep: dep.iter().map(|s| s.to_string()).collect(),
            params: params.iter().map(|s| s.to_string()).collect(),
            max_order,
        };
        // Shorthand names like `u_xy` must not collide with declared names.
        for name in space.indep.iter().chain(&space.params) {
            if space.resolve_shorthand(name).is_some() {
                return Err(Error::InvalidSpace(format!("`{name}` clashes with a jet coordinate")));
            }
        }
        Ok(space)
    }

    /// The space with a different maximal order.
    pub fn with_max_order(&self, k: usize) -> JetSpace {
        JetSpace { max_order: k, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.indep.len()
    }

    pub fn m(&self) -> usize {
        self.dep.len()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn indep_names(&self) -> &[String] {
        &self.indep
    }

    pub fn dep_names(&self) -> &[String] {
        &self.dep
    }

    pub fn param_names(&self) -> &[String] {
        &self.params
    }

    pub fn x(&self, i: usize) -> Expr {
        Expr::symbol(Symbol::Indep(i as u16))
    }

    pub fn u(&self, a: usize) -> Expr {
        self.jet(a, &MultiIndex::zero(self.n()))
    }

    pub fn jet(&self, a: usize, index: &MultiIndex) -> Expr {
        Expr::symbol(Symbol::jet(a, index.clone()))
    }

    /// `u^a_(k)` in a one-variable space.
    pub fn ode_jet(&self, a: usize, k: usize) -> Expr {
        self.jet(a, &MultiIndex::ode(k))
    }

    pub fn param(&self, i: usize) -> Expr {
        Expr::symbol(Symbol::Param(i as u16))
    }

    pub fn zero_index(&self) -> MultiIndex {
        MultiIndex::zero(self.n())
    }

    pub fn multi_indices(&self, k: usize) -> Vec<MultiIndex> {
        MultiIndex::all_of_order(self.n(), k)
    }

    /// Every coordinate symbol of `J^k` (independent, then jets by order).
    pub fn coordinates(&self, k: usize) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = (0..self.n()).map(|i| Symbol::Indep(i as u16)).collect();
        for j in MultiIndex::all_up_to(self.n(), k) {
            for a in 0..self.m() {
                out.push(Symbol::jet(a, j.clone()));
            }
        }
        out
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        if let Some(i) = self.indep.iter().position(|s| s == name) {
            return Some(Symbol::Indep(i as u16));
        }
        if let Some(a) = self.dep.iter().position(|s| s == name) {
            return Some(Symbol::jet(a, self.zero_index()));
        }
        if let Some(p) = self.params.iter().position(|s| s == name) {
            return Some(Symbol::Param(p as u16));
        }
        self.resolve_shorthand(name)
    }

    /// Resolve `u_xy` style names by greedy matching of independent names.
    fn resolve_shorthand(&self, name: &str) -> Option<Symbol> {
        let (head, mut rest) = name.split_once('_')?;
        let a = self.dep.iter().position(|s| s == head)?;
        if rest.is_empty() {
            return None;
        }
        let mut idx = self.zero_index();
        while !rest.is_empty() {
            let (i, len) = self
                .indep
                .iter()
                .enumerate()
                .filter(|(_, s)| rest.starts_with(s.as_str()))
                .map(|(i, s)| (i, s.len()))
                .max_by_key(|&(_, l)| l)?;
            idx = idx.increment(i);
            rest = &rest[len..];
        }
        Some(Symbol::jet(a, idx))
    }

    fn shorthand_ok(&self) -> bool {
        self.indep.iter().all(|s| s.len() == 1)
    }

    pub fn symbol_name(&self, s: &Symbol) -> String {
        match s {
            Symbol::Indep(i) => self.indep.get(*i as usize).cloned().unwrap_or_else(|| format!("x{i}")),
            Symbol::Param(p) => self.params.get(*p as usize).cloned().unwrap_or_else(|| format!("p{p}")),
            Symbol::Aux(k) => format!("aux{k}"),
            Symbol::Jet(a, j) => {
                let dep = self.dep.get(*a as usize).cloned().unwrap_or_else(|| format!("u{a}"));
                if j.order() == 0 {
                    return dep;
                }
                if self.shorthand_ok() {
                    let mut s = dep;
                    s.push('_');
                    for i in j.path() {
                        s.push_str(&self.indep[i]);
                    }
                    s
                } else {
                    let mut s = format!("diff({dep}");
                    for (i, &c) in j.counts().iter().enumerate() {
                        if c > 0 {
                            s.push_str(&format!(",{},{}", self.indep[i], c));
                        }
                    }
                    s.push(')');
                    s
                }
            }
        }
    }

    pub fn parse(&self, text: &str) -> std::result::Result<Expr, ParseError> {
        crate::expr::parse(text, self)
    }

    pub fn render(&self, e: &Expr) -> String {
        crate::expr::render(e, Some(self))
    }

    fn check_order(&self, needed: usize) -> Result<()> {
        if needed > self.max_order {
            Err(Error::OrderOverflow { needed, max: self.max_order })
        } else {
            Ok(())
        }
    }

    /// `D_i e = ∂_i e + Σ u^a_{J+i} ∂e/∂u^a_J`.
    pub fn total_derivative(&self, e: &Expr, i: usize) -> Result<Expr> {
        e.derive_with(&mut |s: &Symbol| match s {
            Symbol::Indep(j) if *j as usize == i => Ok(Expr::one()),
            Symbol::Jet(a, j) => {
                let next = j.increment(i);
                self.check_order(next.order())?;
                Ok(Expr::symbol(Symbol::Jet(*a, next)))
            }
            _ => Ok(Expr::zero()),
        })
    }

    /// `D_J e`, applying directions in nondecreasing order.
    pub fn total_derivative_multi(&self, e: &Expr, index: &MultiIndex) -> Result<Expr> {
        let mut out = e.clone();
        for i in index.path() {
            out = self.total_derivative(&out, i)?;
        }
        Ok(out)
    }

    /// Contact forms `ω^a_J` for `|J| < max_order`.
    pub fn contact_forms(&self) -> Vec<ContactForm> {
        if self.max_order == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for j in MultiIndex::all_up_to(self.n(), self.max_order - 1) {
            for a in 0..self.m() {
                out.push(ContactForm { dep: a, index: j.clone() });
            }
        }
        out
    }

    /// Residuals of the contact-preservation condition for `v`.
    ///
    /// For each `ω^a_J` with `|J| < k`, the `dx^i` component of `L_V ω^a_J`
    /// modulo contact forms is `D_i ψ^a_J − u^a_{J,l} D_i ξ^l − ψ^a_{J,i}`.
    /// All residuals vanish exactly when `v` preserves the contact ideal.
    pub fn annihilates_contact(&self, v: &ProlongedField) -> Result<Vec<ContactResidual>> {
        let k = v.order();
        let work = self.with_max_order(self.max_order.max(k + 1));
        let mut out = Vec::new();
        if k == 0 {
            return Ok(out);
        }
        for j in MultiIndex::all_up_to(self.n(), k - 1) {
            for a in 0..self.m() {
                let psi = v.psi(a, &j);
                for i in 0..self.n() {
                    let mut terms = vec![work.total_derivative(&psi, i)?, -&v.psi(a, &j.increment(i))];
                    for (l, xi) in v.xi().iter().enumerate() {
                        let dxi = work.total_derivative(xi, i)?;
                        terms.push(-&(&self.jet(a, &j.increment(l)) * &dxi));
                    }
                    out.push(ContactResidual {
                        dep: a,
                        index: j.clone(),
                        direction: i,
                        residual: Expr::sum(terms).tidy(),
                    });
                }
            }
        }
        Ok(out)
    }
}

/// `ω^a_J = du^a_J − u^a_{J,i} dx^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContactForm {
    pub dep: usize,
    pub index: MultiIndex,
}

impl ContactForm {
    /// Nonzero coefficients: `du^a_J` first, then `dx^i` for each direction.
    pub fn coefficients(&self, space: &JetSpace) -> Vec<(Symbol, Expr)> {
        let mut out = vec![(Symbol::jet(self.dep, self.index.clone()), Expr::one())];
        for i in 0..space.n() {
            out.push((Symbol::Indep(i as u16), -&space.jet(self.dep, &self.index.increment(i))));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct ContactResidual {
    pub dep: usize,
    pub index: MultiIndex,
    pub direction: usize,
    pub residual: Expr,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ode() -> JetSpace {
        JetSpace::new(&["x"], &["u"], 3).unwrap()
    }

    #[test]
    fn enumerates_multi_indices() {
        assert_eq!(MultiIndex::all_of_order(2, 2).len(), 3);
        assert_eq!(MultiIndex::all_of_order(3, 2).len(), 6);
        assert_eq!(MultiIndex::all_up_to(1, 3).len(), 4);
        assert_eq!(MultiIndex::from_counts(&[1, 2]).path(), vec![0, 1, 1]);
    }

    #[test]
    fn total_derivative_examples() {
        let s = ode();
        let u = s.u(0);
        assert_eq!(s.total_derivative(&u, 0).unwrap(), s.ode_jet(0, 1));
        let e = &s.x(0) * &s.ode_jet(0, 1);
        let want = &s.ode_jet(0, 1) + &(&s.x(0) * &s.ode_jet(0, 2));
        assert_eq!(s.total_derivative(&e, 0).unwrap(), want);
    }

    #[test]
    fn total_derivative_multi_examples() {
        let s = JetSpace::new(&["x", "y"], &["u"], 2).unwrap();
        let xy = &s.x(0) * &s.x(1);
        assert!(s.total_derivative_multi(&xy, &MultiIndex::from_counts(&[1, 1])).unwrap().is_one());
        let uxx = s.total_derivative_multi(&s.u(0), &MultiIndex::from_counts(&[2, 0])).unwrap();
        assert_eq!(uxx, s.parse("u_xx").unwrap());
        assert_eq!(s.total_derivative_multi(&xy, &s.zero_index()).unwrap(), xy);
    }

    #[test]
    fn overflow_is_reported() {
        let s = ode();
        let e = s.ode_jet(0, 3);
        assert!(matches!(s.total_derivative(&e, 0), Err(Error::OrderOverflow { needed: 4, max: 3 })));
    }

    #[test]
    fn contact_form_listing() {
        let s = JetSpace::new(&["x"], &["u"], 1).unwrap();
        let forms = s.contact_forms();
        assert_eq!(forms.len(), 1);
        let c = forms[0].coefficients(&s);
        assert_eq!(c[0].1, Expr::one());
        assert_eq!(c[1].1, -&s.ode_jet(0, 1));
        let s2 = JetSpace::new(&["x", "y"], &["u"], 1).unwrap();
        assert_eq!(s2.contact_forms()[0].coefficients(&s2).len(), 3);
        assert!(s.with_max_order(0).contact_forms().is_empty());
    }

    #[test]
    fn shorthand_resolution() {
        let s = JetSpace::new(&["x", "y"], &["u", "v"], 3).unwrap();
        assert_eq!(s.lookup("u_yx"), s.lookup("u_xy"));
        assert_eq!(s.symbol_name(&s.lookup("v_xyy").unwrap()), "v_xyy");
        assert!(s.lookup("w_x").is_none());
        let long = JetSpace::new(&["time"], &["q"], 2).unwrap();
        assert_eq!(long.symbol_name(&Symbol::jet(0, MultiIndex::ode(2))), "diff(q,time,2)");
        assert_eq!(long.lookup("q_timetime"), Some(Symbol::jet(0, MultiIndex::ode(2))));
    }

    #[test]
    fn rejects_bad_spaces() {
        assert!(JetSpace::new(&[], &["u"], 1).is_err());
        assert!(JetSpace::new(&["x"], &["x"], 1).is_err());
        assert!(JetSpace::new(&["exp"], &["u"], 1).is_err());
    }
}
