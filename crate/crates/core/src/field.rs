//! Vector fields on the base space and their lifts to jet space.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol};
use crate::jet::{JetSpace, MultiIndex};
use crate::oracle::{Oracle, Verdict};

/// `ξ^i ∂_i + φ^a ∂_a` with coefficients depending on `(x, u)` only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    xi: Vec<Expr>,
    phi: Vec<Expr>,
}

impl VectorField {
    pub fn new(space: &JetSpace, xi: Vec<Expr>, phi: Vec<Expr>) -> Result<VectorField> {
        if xi.len() != space.n() || phi.len() != space.m() {
            return Err(Error::SizeMismatch(format!(
                "field has {} + {} components, space needs {} + {}",
                xi.len(),
                phi.len(),
                space.n(),
                space.m()
            )));
        }
        for e in xi.iter().chain(&phi) {
            if e.jet_order() > 0 {
                return Err(Error::InvalidField("coefficients may not depend on derivatives".into()));
            }
        }
        Ok(VectorField { xi, phi })
    }

    pub fn parse(space: &JetSpace, xi: &[&str], phi: &[&str]) -> Result<VectorField> {
        let xi = xi.iter().map(|t| space.parse(t)).collect::<std::result::Result<_, _>>()?;
        let phi = phi.iter().map(|t| space.parse(t)).collect::<std::result::Result<_, _>>()?;
        VectorField::new(space, xi, phi)
    }

    pub fn zero(space: &JetSpace) -> VectorField {
        VectorField { xi: vec![Expr::zero(); space.n()], phi: vec![Expr::zero(); space.m()] }
    }

    /// Vertical field `Σ q^a ∂_a`.
    pub fn vertical(space: &JetSpace, phi: Vec<Expr>) -> Result<VectorField> {
        VectorField::new(space, vec![Expr::zero(); space.n()], phi)
    }

    pub fn xi(&self) -> &[Expr] {
        &self.xi
    }

    pub fn phi(&self) -> &[Expr] {
        &self.phi
    }

    pub fn is_vertical(&self) -> bool {
        self.xi.iter().all(Expr::is_zero)
    }

    /// Action as a derivation on functions of `(x, u)`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut terms = Vec::new();
        for (i, xi) in self.xi.iter().enumerate() {
            if !xi.is_zero() {
                terms.push(xi * &f.partial(&Symbol::Indep(i as u16)));
            }
        }
        let zero = MultiIndex::zero(self.xi.len());
        for (a, phi) in self.phi.iter().enumerate() {
            if !phi.is_zero() {
                terms.push(phi * &f.partial(&Symbol::jet(a, zero.clone())));
            }
        }
        Expr::sum(terms)
    }

    /// `[X, Y] = XY − YX`.
    pub fn commutator(&self, other: &VectorField) -> VectorField {
        let bracket = |a: &Expr, b: &Expr| (self.apply(b) - other.apply(a)).tidy();
        VectorField {
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| bracket(a, b)).collect(),
            phi: self.phi.iter().zip(&other.phi).map(|(a, b)| bracket(a, b)).collect(),
        }
    }

    pub fn scale(&self, g: &Expr) -> VectorField {
        VectorField {
            xi: self.xi.iter().map(|e| (e * g).tidy()).collect(),
            phi: self.phi.iter().map(|e| (e * g).tidy()).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a + b).collect(),
            phi: self.phi.iter().zip(&other.phi).map(|(a, b)| a + b).collect(),
        }
    }

    /// `Σ c_k X_k` for expression coefficients.
    pub fn combination(space: &JetSpace, coeffs: &[Expr], fields: &[VectorField]) -> VectorField {
        let mut out = VectorField::zero(space);
        for (c, f) in coeffs.iter().zip(fields) {
            if !c.is_zero() {
                out = out.add(&f.scale(c));
            }
        }
        out
    }

    /// All components, `ξ` first.
    pub fn components(&self) -> Vec<Expr> {
        self.xi.iter().chain(&self.phi).cloned().collect()
    }

    /// Characteristics `Q^a = φ^a − u^a_i ξ^i` of the evolutionary representative.
    pub fn characteristic(&self, space: &JetSpace) -> Vec<Expr> {
        (0..space.m())
            .map(|a| {
                let mut terms = vec![self.phi[a].clone()];
                for (i, xi) in self.xi.iter().enumerate() {
                    terms.push(-&(&space.jet(a, &MultiIndex::unit(space.n(), i)) * xi));
                }
                Expr::sum(terms)
            })
            .collect()
    }

    pub fn render(&self, space: &JetSpace) -> String {
        let mut parts = Vec::new();
        for (i, e) in self.xi.iter().enumerate() {
            if !e.is_zero() {
                parts.push(format!("({})*d/d{}", space.render(e), space.indep_names()[i]));
            }
        }
        for (a, e) in self.phi.iter().enumerate() {
            if !e.is_zero() {
                parts.push(format!("({})*d/d{}", space.render(e), space.dep_names()[a]));
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Vertical field on `J^1` with characteristics `Q^a`, i.e. the evolutionary
/// representative `Q^a ∂_a` of a point field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvolutionaryField {
    pub q: Vec<Expr>,
}

pub fn evolutionary_representative(x: &VectorField, space: &JetSpace) -> EvolutionaryField {
    EvolutionaryField { q: x.characteristic(space) }
}

/// Which construction produced a jet-space field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwistKind {
    Standard,
    Lambda,
    Mu,
    Sigma,
    /// Result of brackets, scalings or other operator algebra.
    Derived,
}

pub type JetKey = (usize, MultiIndex);

/// First-order operator `ξ^i ∂_i + Σ ψ^a_J ∂/∂u^a_J` on `J^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProlongedField {
    xi: Vec<Expr>,
    psi: BTreeMap<JetKey, Expr>,
    order: usize,
    n: usize,
    m: usize,
    twist: TwistKind,
}

impl ProlongedField {
    pub fn new(xi: Vec<Expr>, psi: BTreeMap<JetKey, Expr>, order: usize, m: usize, twist: TwistKind) -> ProlongedField {
        let n = xi.len();
        ProlongedField { xi, psi, order, n, m, twist }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn twist(&self) -> TwistKind {
        self.twist
    }

    pub fn xi(&self) -> &[Expr] {
        &self.xi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn psi(&self, a: usize, index: &MultiIndex) -> Expr {
        self.psi.get(&(a, index.clone())).cloned().unwrap_or_else(Expr::zero)
    }

    /// `ψ^a_(k)` in a one-variable space.
    pub fn psi_ode(&self, a: usize, k: usize) -> Expr {
        self.psi(a, &MultiIndex::ode(k))
    }

    pub fn table(&self) -> &BTreeMap<JetKey, Expr> {
        &self.psi
    }

    pub fn base(&self, space: &JetSpace) -> Result<VectorField> {
        let zero = MultiIndex::zero(self.n);
        VectorField::new(space, self.xi.clone(), (0..self.m).map(|a| self.psi(a, &zero)).collect())
    }

    /// Every `(coordinate, coefficient)` pair, independent variables first.
    pub fn coefficients(&self) -> Vec<(Symbol, Expr)> {
        let mut out: Vec<(Symbol, Expr)> =
            self.xi.iter().enumerate().map(|(i, e)| (Symbol::Indep(i as u16), e.clone())).collect();
        for j in MultiIndex::all_up_to(self.n, self.order) {
            for a in 0..self.m {
                out.push((Symbol::jet(a, j.clone()), self.psi(a, &j)));
            }
        }
        out
    }

    pub fn apply(&self, f: &Expr) -> Expr {
        let mut terms = Vec::new();
        for (s, c) in self.coefficients() {
            if c.is_zero() || !f.may_contain(&s) {
                continue;
            }
            let d = f.partial(&s);
            if !d.is_zero() {
                terms.push(&c * &d);
            }
        }
        Expr::sum(terms)
    }

    fn compatible(&self, other: &ProlongedField) -> Result<()> {
        if self.n != other.n || self.m != other.m || self.order != other.order {
            return Err(Error::SizeMismatch("fields live on different jet spaces".into()));
        }
        Ok(())
    }

    fn from_coefficients(&self, coeffs: Vec<Expr>, twist: TwistKind) -> ProlongedField {
        let mut it = coeffs.into_iter();
        let xi: Vec<Expr> = (0..self.n).map(|_| it.next().unwrap()).collect();
        let mut psi = BTreeMap::new();
        for j in MultiIndex::all_up_to(self.n, self.order) {
            for a in 0..self.m {
                psi.insert((a, j.clone()), it.next().unwrap());
            }
        }
        ProlongedField { xi, psi, order: self.order, n: self.n, m: self.m, twist }
    }

    /// Commutator as first-order operators: `[V, W]^z = V(W^z) − W(V^z)`.
    pub fn commutator(&self, other: &ProlongedField) -> Result<ProlongedField> {
        self.compatible(other)?;
        let coeffs = self
            .coefficients()
            .into_iter()
            .zip(other.coefficients())
            .map(|((_, v), (_, w))| (self.apply(&w) - other.apply(&v)).tidy())
            .collect();
        Ok(self.from_coefficients(coeffs, TwistKind::Derived))
    }

    pub fn sub(&self, other: &ProlongedField) -> Result<ProlongedField> {
        self.compatible(other)?;
        let coeffs = self
            .coefficients()
            .into_iter()
            .zip(other.coefficients())
            .map(|((_, v), (_, w))| (v - w).tidy())
            .collect();
        Ok(self.from_coefficients(coeffs, TwistKind::Derived))
    }

    /// `g · V`.
    pub fn scale(&self, g: &Expr) -> ProlongedField {
        let coeffs = self.coefficients().into_iter().map(|(_, v)| (&v * g).tidy()).collect();
        self.from_coefficients(coeffs, TwistKind::Derived)
    }

    /// `Σ c_k V_k`.
    pub fn combination(coeffs: &[Expr], fields: &[ProlongedField]) -> Result<ProlongedField> {
        let first = fields.first().ok_or_else(|| Error::SizeMismatch("empty combination".into()))?;
        let mut acc: Vec<Vec<Expr>> = vec![Vec::new(); first.coefficients().len()];
        for (c, f) in coeffs.iter().zip(fields) {
            first.compatible(f)?;
            for (slot, (_, v)) in acc.iter_mut().zip(f.coefficients()) {
                slot.push(c * &v);
            }
        }
        let summed = acc.into_iter().map(|terms| Expr::sum(terms).tidy()).collect();
        Ok(first.from_coefficients(summed, TwistKind::Derived))
    }

    /// Drop the entries of order above `k`.
    pub fn truncate(&self, k: usize) -> ProlongedField {
        let psi = self.psi.iter().filter(|((_, j), _)| j.order() <= k).map(|(key, e)| (key.clone(), e.clone())).collect();
        ProlongedField { psi, order: k.min(self.order), ..self.clone() }
    }

    /// Coefficientwise comparison with the oracle.
    pub fn compare(&self, other: &ProlongedField, oracle: &Oracle) -> Result<Verdict> {
        self.compatible(other)?;
        let pairs: Vec<(Expr, Expr)> = self
            .coefficients()
            .into_iter()
            .zip(other.coefficients())
            .map(|((_, a), (_, b))| (a, b))
            .collect();
        oracle.check_pairs(&pairs)
    }

    pub fn is_zero_numeric(&self, oracle: &Oracle) -> Result<Verdict> {
        let exprs: Vec<Expr> = self.coefficients().into_iter().map(|(_, e)| e).collect();
        oracle.check_zero(&exprs)
    }

    pub fn render(&self, space: &JetSpace) -> Vec<(String, String)> {
        self.coefficients()
            .into_iter()
            .map(|(s, e)| (space.symbol_name(&s), space.render(&e)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_field_brackets() {
        let s = JetSpace::new(&["x"], &["u"], 1).unwrap();
        let dx = VectorField::parse(&s, &["1"], &["0"]).unwrap();
        let xdx = VectorField::parse(&s, &["x"], &["0"]).unwrap();
        assert_eq!(dx.commutator(&xdx), dx);
        let a = VectorField::parse(&s, &["0"], &["x"]).unwrap();
        let b = VectorField::parse(&s, &["0"], &["u"]).unwrap();
        assert_eq!(a.commutator(&b), a);
        assert_eq!(a.commutator(&a), VectorField::zero(&s));
    }

    #[test]
    fn characteristic_examples() {
        let s = JetSpace::new(&["x"], &["u"], 1).unwrap();
        let q = |xi: &str, phi: &str| VectorField::parse(&s, &[xi], &[phi]).unwrap().characteristic(&s)[0].clone();
        assert_eq!(q("1", "0"), s.parse("-u_x").unwrap());
        assert_eq!(q("0", "1"), Expr::one());
        assert_eq!(q("-u", "x"), s.parse("x + u*u_x").unwrap());
    }

    #[test]
    fn rejects_jet_dependent_coefficients() {
        let s = JetSpace::new(&["x"], &["u"], 1).unwrap();
        assert!(VectorField::parse(&s, &["u_x"], &["0"]).is_err());
    }
}
