//! Standard and twisted prolongations of vector fields.
//!
//! All engines share one recursion. Writing `C^a_J = ψ^a_J − u^a_{J,l} ξ^l`,
//! the entry for `J + e_i` is
//!
//! ```text
//! ψ^a_{J,i} = D_i ψ^a_J − u^a_{J,l} D_i ξ^l + T^a_i
//! ```
//!
//! where the twist term `T` is `0` (standard), `λ C^a_J` (λ), `(Λ_i)^a_b C^b_J`
//! (μ) or, across a family of fields, `σ_α^β (C^a_J)_β` (σ).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{JetKey, ProlongedField, TwistKind, VectorField};
use crate::jet::{JetSpace, MultiIndex};
use crate::matrix::Matrix;
use crate::oracle::{Oracle, Verdict};

/// Auxiliary data deforming the prolongation recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwistData {
    None,
    Lambda(Expr),
    /// One `m × m` matrix `Λ_i` per independent variable.
    Mu(Vec<Matrix>),
    /// `r × r` matrix mixing a family of `r` fields.
    Sigma(Matrix),
}

impl TwistData {
    /// Twist entries must live on `J^1`.
    pub fn validate(&self, space: &JetSpace) -> Result<()> {
        let on_first_jets = |e: &Expr| {
            if e.jet_order() > 1 {
                Err(Error::InvalidTwist("twist entries may depend on first derivatives at most".into()))
            } else {
                Ok(())
            }
        };
        match self {
            TwistData::None => Ok(()),
            TwistData::Lambda(l) => {
                if space.n() != 1 {
                    return Err(Error::InvalidTwist("λ-prolongation needs one independent variable".into()));
                }
                on_first_jets(l)
            }
            TwistData::Mu(ls) => {
                if ls.len() != space.n() {
                    return Err(Error::InvalidTwist(format!(
                        "need {} connection matrices, got {}",
                        space.n(),
                        ls.len()
                    )));
                }
                for l in ls {
                    if l.rows() != space.m() || l.cols() != space.m() {
                        return Err(Error::InvalidTwist(format!("connection matrices must be {0}x{0}", space.m())));
                    }
                    l.entries().iter().try_for_each(on_first_jets)?;
                }
                Ok(())
            }
            TwistData::Sigma(s) => {
                if space.n() != 1 {
                    return Err(Error::InvalidTwist("σ-prolongation needs one independent variable".into()));
                }
                if !s.is_square() {
                    return Err(Error::InvalidTwist("σ must be square".into()));
                }
                s.entries().iter().try_for_each(on_first_jets)
            }
        }
    }

    fn kind(&self) -> TwistKind {
        match self {
            TwistData::None => TwistKind::Standard,
            TwistData::Lambda(_) => TwistKind::Lambda,
            TwistData::Mu(_) => TwistKind::Mu,
            TwistData::Sigma(_) => TwistKind::Sigma,
        }
    }
}

/// Which direction is peeled off a multi-index to find its parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathRule {
    /// Canonical: the largest direction present (paths are nondecreasing).
    Last,
    /// The smallest direction present; used to test path independence.
    First,
}

impl PathRule {
    fn split(self, j: &MultiIndex) -> (MultiIndex, usize) {
        let i = match self {
            PathRule::Last => j.last_direction(),
            PathRule::First => j.first_direction(),
        }
        .expect("nonzero multi-index");
        (j.decrement(i).unwrap(), i)
    }
}

fn recursive_prolong(
    fields: &[VectorField],
    twist: &TwistData,
    k: usize,
    space: &JetSpace,
    rule: PathRule,
) -> Result<Vec<ProlongedField>> {
    twist.validate(space)?;
    if k > space.max_order() {
        return Err(Error::OrderOverflow { needed: k, max: space.max_order() });
    }
    let (n, m) = (space.n(), space.m());
    let zero = space.zero_index();
    let mut tables: Vec<BTreeMap<JetKey, Expr>> = fields
        .iter()
        .map(|f| f.phi().iter().enumerate().map(|(a, p)| ((a, zero.clone()), p.clone())).collect())
        .collect();
    // D_i ξ^l per field, reused at every order.
    let dxi: Vec<Vec<Vec<Expr>>> = fields
        .iter()
        .map(|f| {
            (0..n)
                .map(|i| f.xi().iter().map(|xi| space.total_derivative(xi, i)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    for order in 1..=k {
        for j in MultiIndex::all_of_order(n, order) {
            let (parent, i) = rule.split(&j);
            // C^a_P for every field and component.
            let contact: Vec<Vec<Expr>> = fields
                .iter()
                .zip(&tables)
                .map(|(f, t)| {
                    (0..m)
                        .map(|a| {
                            let mut terms = vec![t[&(a, parent.clone())].clone()];
                            for (l, xi) in f.xi().iter().enumerate() {
                                if !xi.is_zero() {
                                    terms.push(-&(&space.jet(a, &parent.increment(l)) * xi));
                                }
                            }
                            Expr::sum(terms)
                        })
                        .collect()
                })
                .collect();
            let mut new_entries = Vec::with_capacity(fields.len());
            for alpha in 0..fields.len() {
                let mut entries = Vec::with_capacity(m);
                for a in 0..m {
                    let mut terms = vec![space.total_derivative(&tables[alpha][&(a, parent.clone())], i)?];
                    for (l, d) in dxi[alpha][i].iter().enumerate() {
                        if !d.is_zero() {
                            terms.push(-&(&space.jet(a, &parent.increment(l)) * d));
                        }
                    }
                    match twist {
                        TwistData::None => {}
                        TwistData::Lambda(lam) => terms.push(lam * &contact[alpha][a]),
                        TwistData::Mu(ls) => {
                            for b in 0..m {
                                let coef = ls[i].get(a, b);
                                if !coef.is_zero() {
                                    terms.push(coef * &contact[alpha][b]);
                                }
                            }
                        }
                        TwistData::Sigma(s) => {
                            for beta in 0..fields.len() {
                                let coef = s.get(alpha, beta);
                                if !coef.is_zero() {
                                    terms.push(coef * &contact[beta][a]);
                                }
                            }
                        }
                    }
                    entries.push(Expr::sum(terms).tidy());
                }
                new_entries.push(entries);
            }
            for (alpha, entries) in new_entries.into_iter().enumerate() {
                for (a, e) in entries.into_iter().enumerate() {
                    tables[alpha].insert((a, j.clone()), e);
                }
            }
        }
    }
    Ok(fields
        .iter()
        .zip(tables)
        .map(|(f, t)| ProlongedField::new(f.xi().to_vec(), t, k, m, twist.kind()))
        .collect())
}

fn single(x: &VectorField, twist: &TwistData, k: usize, space: &JetSpace, rule: PathRule) -> Result<ProlongedField> {
    Ok(recursive_prolong(std::slice::from_ref(x), twist, k, space, rule)?.pop().unwrap())
}

/// `ψ^a_{J,i} = D_i ψ^a_J − u^a_{J,l} D_i ξ^l`.
pub fn prolong_standard(x: &VectorField, k: usize, space: &JetSpace) -> Result<ProlongedField> {
    single(x, &TwistData::None, k, space, PathRule::Last)
}

/// `ψ_(k+1) = (D_x + λ) ψ_(k) − u_(k+1) (D_x + λ) ξ`, componentwise in `a`.
pub fn prolong_lambda(x: &VectorField, lambda: &Expr, k: usize, space: &JetSpace) -> Result<ProlongedField> {
    single(x, &TwistData::Lambda(lambda.clone()), k, space, PathRule::Last)
}

/// Residual of one pair in the flatness condition.
#[derive(Clone, Debug)]
pub struct MchResidual {
    pub i: usize,
    pub j: usize,
    pub residual: Matrix,
}

/// `D_i Λ_j − D_j Λ_i + [Λ_i, Λ_j]` for every pair `i < j`.
pub fn check_mch(lams: &[Matrix], space: &JetSpace) -> Result<Vec<MchResidual>> {
    TwistData::Mu(lams.to_vec()).validate(space)?;
    let work = space.with_max_order(space.max_order().max(2));
    let mut out = Vec::new();
    for i in 0..lams.len() {
        for j in i + 1..lams.len() {
            let r = lams[j]
                .total_derivative(&work, i)?
                .sub(&lams[i].total_derivative(&work, j)?)?
                .add(&lams[i].commutator(&lams[j])?)?
                .expand();
            out.push(MchResidual { i, j, residual: r });
        }
    }
    Ok(out)
}

/// Oracle verdict over all entries of all flatness residuals.
pub fn mch_verdict(lams: &[Matrix], space: &JetSpace, oracle: &Oracle) -> Result<Vec<(MchResidual, Verdict)>> {
    check_mch(lams, space)?
        .into_iter()
        .map(|r| {
            let v = oracle.check_zero(r.residual.entries())?;
            Ok((r, v))
        })
        .collect()
}

/// Whether `prolong_mu` certifies flatness first.
#[derive(Clone, Copy, Debug)]
pub enum MchPolicy<'a> {
    Verify(&'a Oracle),
    Unchecked,
}

/// `ψ^a_{J,i} = (D_i + Λ_i)^a_b ψ^b_J − u^b_{J,l} (D_i + Λ_i)^a_b ξ^l`.
pub fn prolong_mu(
    x: &VectorField,
    lams: &[Matrix],
    k: usize,
    space: &JetSpace,
    policy: MchPolicy<'_>,
) -> Result<ProlongedField> {
    prolong_mu_along(x, lams, k, space, policy, PathRule::Last)
}

pub fn prolong_mu_along(
    x: &VectorField,
    lams: &[Matrix],
    k: usize,
    space: &JetSpace,
    policy: MchPolicy<'_>,
    rule: PathRule,
) -> Result<ProlongedField> {
    if let MchPolicy::Verify(oracle) = policy {
        for (r, v) in mch_verdict(lams, space, oracle)? {
            if !v.holds {
                return Err(Error::MchViolation { i: r.i, j: r.j, residual: v.max_abs });
            }
        }
    }
    single(x, &TwistData::Mu(lams.to_vec()), k, space, rule)
}

/// μ-prolongation in one independent variable with `μ = Λ dx`.
pub fn prolong_lambda_ode(x: &VectorField, lam: &Matrix, k: usize, space: &JetSpace) -> Result<ProlongedField> {
    if space.n() != 1 {
        return Err(Error::InvalidTwist("one independent variable required".into()));
    }
    prolong_mu(x, std::slice::from_ref(lam), k, space, MchPolicy::Unchecked)
}

/// `(ψ_{k+1})_α = D_x(ψ_k)_α − u_{k+1} D_x ξ_α + σ_α^β ((ψ_k)_β − u_{k+1} ξ_β)`.
pub fn prolong_sigma(xs: &[VectorField], sigma: &Matrix, k: usize, space: &JetSpace) -> Result<Vec<ProlongedField>> {
    if sigma.rows() != xs.len() || sigma.cols() != xs.len() {
        return Err(Error::SizeMismatch(format!("σ is {}x{} for {} fields", sigma.rows(), sigma.cols(), xs.len())));
    }
    recursive_prolong(xs, &TwistData::Sigma(sigma.clone()), k, space, PathRule::Last)
}

/// Dispatch on a single-field twist.
pub fn prolong(x: &VectorField, twist: &TwistData, k: usize, space: &JetSpace) -> Result<ProlongedField> {
    match twist {
        TwistData::Sigma(s) => {
            if s.rows() != 1 {
                return Err(Error::SizeMismatch("σ for a single field must be 1x1".into()));
            }
            Ok(prolong_sigma(std::slice::from_ref(x), s, k, space)?.pop().unwrap())
        }
        _ => single(x, twist, k, space, PathRule::Last),
    }
}

/// `∇_i = D_i + Λ_i` acting on columns of expressions.
#[derive(Clone, Debug)]
pub struct Connection {
    lams: Vec<Matrix>,
}

impl Connection {
    pub fn new(lams: Vec<Matrix>, space: &JetSpace) -> Result<Connection> {
        TwistData::Mu(lams.clone()).validate(space)?;
        Ok(Connection { lams })
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.lams
    }

    pub fn apply(&self, i: usize, v: &[Expr], space: &JetSpace) -> Result<Vec<Expr>> {
        let twisted = self.lams[i].apply(v)?;
        v.iter()
            .zip(twisted)
            .map(|(e, t)| Ok((space.total_derivative(e, i)? + t).tidy()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ode(k: usize) -> JetSpace {
        JetSpace::new(&["x"], &["u"], k).unwrap()
    }

    #[test]
    fn translation_in_u_has_trivial_prolongation() {
        let s = ode(4);
        let x = VectorField::parse(&s, &["0"], &["1"]).unwrap();
        let p = prolong_standard(&x, 4, &s).unwrap();
        for k in 1..=4 {
            assert!(p.psi_ode(0, k).is_zero());
        }
    }

    #[test]
    fn rotation_prolongation() {
        let s = ode(2);
        let x = VectorField::parse(&s, &["-u"], &["x"]).unwrap();
        let p = prolong_standard(&x, 2, &s).unwrap();
        assert_eq!(p.psi_ode(0, 1), s.parse("1 + u_x^2").unwrap());
        assert_eq!(p.psi_ode(0, 2), s.parse("3*u_x*u_xx").unwrap());
    }

    #[test]
    fn lambda_examples() {
        let s = ode(2);
        let du = VectorField::parse(&s, &["0"], &["1"]).unwrap();
        let p = prolong_lambda(&du, &s.parse("u_x").unwrap(), 2, &s).unwrap();
        assert_eq!(p.psi_ode(0, 1), s.parse("u_x").unwrap());
        assert_eq!(p.psi_ode(0, 2), s.parse("u_xx + u_x^2").unwrap());
        let scaling = VectorField::parse(&s, &["0"], &["u"]).unwrap();
        let lam = s.parse("x*u_x + u").unwrap();
        let p = prolong_lambda(&scaling, &lam, 1, &s).unwrap();
        assert_eq!(p.psi_ode(0, 1), (&s.ode_jet(0, 1) + &(&lam * &s.u(0))).expand());
    }

    #[test]
    fn twist_must_live_on_first_jets() {
        let s = ode(2);
        let du = VectorField::parse(&s, &["0"], &["1"]).unwrap();
        assert!(matches!(
            prolong_lambda(&du, &s.parse("u_xx").unwrap(), 2, &s),
            Err(Error::InvalidTwist(_))
        ));
    }

    #[test]
    fn non_flat_constant_pair() {
        let s = JetSpace::new(&["x", "y"], &["u", "v"], 2).unwrap();
        let l1 = Matrix::from_i64(&[&[0, 1], &[0, 0]]);
        let l2 = Matrix::from_i64(&[&[0, 0], &[1, 0]]);
        let r = check_mch(&[l1.clone(), l2.clone()], &s).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].residual, Matrix::from_i64(&[&[1, 0], &[0, -1]]));
        let x = VectorField::parse(&s, &["0", "0"], &["u", "v"]).unwrap();
        let o = Oracle::default();
        assert!(matches!(
            prolong_mu(&x, &[l1, l2], 2, &s, MchPolicy::Verify(&o)),
            Err(Error::MchViolation { .. })
        ));
    }

    #[test]
    fn single_variable_is_vacuously_flat() {
        let s = ode(2);
        assert!(check_mch(&[Matrix::scalar(s.parse("u_x").unwrap())], &s).unwrap().is_empty());
    }

    #[test]
    fn one_step_constant_lambda_matrix() {
        let s = JetSpace::new(&["x"], &["u", "v"], 1).unwrap();
        let x = VectorField::parse(&s, &["x*u"], &["v^2", "x"]).unwrap();
        let lam = Matrix::from_i64(&[&[2, -1], &[3, 5]]);
        let p = prolong_lambda_ode(&x, &lam, 1, &s).unwrap();
        let q = x.characteristic(&s);
        for a in 0..2 {
            let ua1 = s.ode_jet(a, 1);
            let mut want = vec![
                s.total_derivative(&x.phi()[a], 0).unwrap(),
                -&(&ua1 * &s.total_derivative(&x.xi()[0], 0).unwrap()),
            ];
            for b in 0..2 {
                want.push(lam.get(a, b) * &q[b]);
            }
            assert_eq!(p.psi_ode(a, 1), Expr::sum(want).expand());
        }
    }

    #[test]
    fn overflow_when_space_too_small() {
        let s = ode(1);
        let du = VectorField::parse(&s, &["0"], &["1"]).unwrap();
        assert!(matches!(prolong_standard(&du, 2, &s), Err(Error::OrderOverflow { .. })));
    }
}
