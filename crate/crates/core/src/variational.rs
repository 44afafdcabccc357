//! Euler–Lagrange operators, variational (λ-)symmetries, Noether-type
//! identities, solvable pairs and μ-conservation laws for one independent
//! variable.

use crate::error::{witness_from, Error, Result};
use crate::expr::{Expr, Symbol};
use crate::field::{ProlongedField, VectorField};
use crate::gauge::certify_invertible;
use crate::jet::{JetSpace, MultiIndex};
use crate::linalg;
use crate::matrix::Matrix;
use crate::oracle::{Oracle, Verdict};
use crate::prolong::{prolong_lambda, prolong_mu, MchPolicy};

/// A Lagrangian density `L(x, u_[n])` on a one-variable jet space.
#[derive(Clone, Debug)]
pub struct Lagrangian {
    expr: Expr,
    order: usize,
}

impl Lagrangian {
    pub fn new(space: &JetSpace, expr: Expr) -> Result<Lagrangian> {
        if space.n() != 1 {
            return Err(Error::Precondition("Lagrangians need one independent variable".into()));
        }
        let order = expr.jet_order();
        if order > space.max_order() {
            return Err(Error::OrderOverflow { needed: order, max: space.max_order() });
        }
        Ok(Lagrangian { expr, order })
    }

    pub fn parse(space: &JetSpace, text: &str) -> Result<Lagrangian> {
        Lagrangian::new(space, space.parse(text)?)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

fn work_space(space: &JetSpace, needed: usize) -> JetSpace {
    space.with_max_order(space.max_order().max(needed))
}

fn require_scalar_ode(space: &JetSpace) -> Result<()> {
    if space.n() != 1 || space.m() != 1 {
        return Err(Error::Precondition("this operation needs x ∈ R, u ∈ R".into()));
    }
    Ok(())
}

/// `(D_x + λ) f`.
fn twisted_derivative(space: &JetSpace, lambda: &Expr, f: &Expr) -> Result<Expr> {
    let d = space.total_derivative(f, 0)?;
    Ok(if lambda.is_zero() { d } else { &d + &(lambda * f) })
}

/// `E_a[L] = Σ_k (−D_x)^k ∂L/∂u^a_k`, one entry per dependent variable.
pub fn euler_lagrange(l: &Lagrangian, space: &JetSpace) -> Result<Vec<Expr>> {
    let work = work_space(space, 2 * l.order);
    (0..space.m())
        .map(|a| {
            let mut terms = Vec::new();
            for k in 0..=l.order {
                let mut t = l.expr.partial(&Symbol::jet(a, MultiIndex::ode(k)));
                for _ in 0..k {
                    t = -work.total_derivative(&t, 0)?;
                }
                terms.push(t);
            }
            Ok(Expr::sum(terms).expand())
        })
        .collect()
}

fn prolonged(x: &VectorField, lambda: &Expr, k: usize, space: &JetSpace) -> Result<ProlongedField> {
    prolong_lambda(x, lambda, k, &work_space(space, k))
}

/// `X_λ(L) + L (D_x + λ) ξ − (D_x + λ) F`.
pub fn variational_lambda_residual(
    x: &VectorField,
    lambda: &Expr,
    l: &Lagrangian,
    f: &Expr,
    space: &JetSpace,
) -> Result<Expr> {
    require_scalar_ode(space)?;
    let work = work_space(space, l.order.max(f.jet_order()) + 1);
    let v = prolonged(x, lambda, l.order, &work)?;
    let lhs = &v.apply(&l.expr) + &(&l.expr * &twisted_derivative(&work, lambda, &x.xi()[0])?);
    Ok((&lhs - &twisted_derivative(&work, lambda, f)?).expand())
}

/// `X^{(n)}(L) + L D_x ξ = D_x F`.
pub fn check_variational_symmetry(
    x: &VectorField,
    l: &Lagrangian,
    f: &Expr,
    space: &JetSpace,
    oracle: &Oracle,
) -> Result<Verdict> {
    check_variational_lambda_symmetry(x, &Expr::zero(), l, f, space, oracle)
}

/// `X^{(n)}_λ(L) + L (D_x + λ) ξ = (D_x + λ) F`.
pub fn check_variational_lambda_symmetry(
    x: &VectorField,
    lambda: &Expr,
    l: &Lagrangian,
    f: &Expr,
    space: &JetSpace,
    oracle: &Oracle,
) -> Result<Verdict> {
    oracle.check_zero(&[variational_lambda_residual(x, lambda, l, f, space)?])
}

/// Existence of some `F` with `X^{(n)}(L) + L D_x ξ = D_x F`, decided by the
/// Euler operator annihilating the left side.
pub fn variational_symmetry_exists(x: &VectorField, l: &Lagrangian, space: &JetSpace, oracle: &Oracle) -> Result<Verdict> {
    require_scalar_ode(space)?;
    let work = work_space(space, l.order + 1);
    let v = prolonged(x, &Expr::zero(), l.order, &work)?;
    let g = &v.apply(&l.expr) + &(&l.expr * &work.total_derivative(&x.xi()[0], 0)?);
    let g = Lagrangian::new(&work, g.expand())?;
    oracle.check_zero(&euler_lagrange(&g, &work)?)
}

/// `X_λ(L) + L (D_x + λ) ξ − Q E[L] − (D_x + λ) F`. For vertical fields the
/// `ξ` term vanishes and this is the plain twisted Noether identity.
pub fn noether_identity_residual(
    x: &VectorField,
    lambda: &Expr,
    l: &Lagrangian,
    f: &Expr,
    space: &JetSpace,
) -> Result<Expr> {
    require_scalar_ode(space)?;
    let q = x.characteristic(space)[0].clone();
    let e = euler_lagrange(l, space)?[0].clone();
    let base = variational_lambda_residual(x, lambda, l, f, space)?;
    Ok((&base - &(&q * &e)).expand())
}

/// Canonical flux for the twisted Noether identity:
/// `F = ξ L + Σ_k Σ_{j<k} ((−D_x)^j ∂L/∂u_k) (D_x + λ)^{k−1−j} Q`.
pub fn noether_flux(x: &VectorField, lambda: &Expr, l: &Lagrangian, space: &JetSpace) -> Result<Expr> {
    require_scalar_ode(space)?;
    let work = work_space(space, 2 * l.order + 1);
    let q = x.characteristic(space)[0].clone();
    let mut powers = vec![q];
    for _ in 1..l.order.max(1) {
        let next = twisted_derivative(&work, lambda, powers.last().unwrap())?;
        powers.push(next);
    }
    let mut terms = vec![&x.xi()[0] * &l.expr];
    for k in 1..=l.order {
        let mut lk = l.expr.partial(&Symbol::jet(0, MultiIndex::ode(k)));
        for j in 0..k {
            terms.push(&lk * &powers[k - 1 - j]);
            lk = -work.total_derivative(&lk, 0)?;
        }
    }
    Ok(Expr::sum(terms).expand())
}

/// `Q E[L] = (D_x + λ) P`.
pub fn verify_noether_potential(
    x: &VectorField,
    lambda: &Expr,
    l: &Lagrangian,
    p: &Expr,
    space: &JetSpace,
    oracle: &Oracle,
) -> Result<Verdict> {
    require_scalar_ode(space)?;
    let work = work_space(space, (2 * l.order).max(p.jet_order() + 1));
    let q = x.characteristic(space)[0].clone();
    let e = euler_lagrange(l, space)?[0].clone();
    let residual = &(&q * &e) - &twisted_derivative(&work, lambda, p)?;
    oracle.check_zero(&[residual])
}

/// Field, twist and flux whose Noether identity was certified on creation.
#[derive(Clone, Debug)]
pub struct NoetherCertificate {
    pub field: VectorField,
    pub lambda: Expr,
    pub flux: Expr,
    pub potential: Option<Expr>,
    pub identity: Verdict,
    pub potential_verdict: Option<Verdict>,
}

impl NoetherCertificate {
    pub fn certify(
        x: &VectorField,
        lambda: &Expr,
        l: &Lagrangian,
        flux: Expr,
        potential: Option<Expr>,
        space: &JetSpace,
        oracle: &Oracle,
    ) -> Result<NoetherCertificate> {
        let identity = oracle.check_zero(&[noether_identity_residual(x, lambda, l, &flux, space)?])?;
        if !identity.holds {
            return Err(Error::Precondition("Noether identity does not hold for the supplied flux".into()));
        }
        let potential_verdict = match &potential {
            Some(p) => {
                let v = verify_noether_potential(x, lambda, l, p, space, oracle)?;
                if !v.holds {
                    return Err(Error::Precondition("Q E[L] is not a twisted derivative of the supplied P".into()));
                }
                Some(v)
            }
            None => None,
        };
        Ok(NoetherCertificate { field: x.clone(), lambda: lambda.clone(), flux, potential, identity, potential_verdict })
    }
}

/// Find `h` with `[X1_λ1, X2_λ2] = h X1_λ1` coefficientwise up to order `k`.
pub fn check_solvable_pair(
    x1: &VectorField,
    lambda1: &Expr,
    x2: &VectorField,
    lambda2: &Expr,
    k: usize,
    space: &JetSpace,
    oracle: &Oracle,
) -> Result<Expr> {
    require_scalar_ode(space)?;
    let work = work_space(space, k + 1);
    let y1 = prolonged(x1, lambda1, k, &work)?;
    let y2 = prolonged(x2, lambda2, k, &work)?;
    let bracket = y1.commutator(&y2)?.coefficients();
    let base = y1.coefficients();
    if oracle.check_zero(&bracket.iter().map(|c| c.1.clone()).collect::<Vec<_>>())?.holds {
        return Ok(Expr::zero());
    }
    let mut pivot = None;
    for (i, (_, c)) in base.iter().enumerate() {
        if !c.is_zero() && !oracle.is_zero(c)? {
            pivot = Some(i);
            break;
        }
    }
    let Some(p) = pivot else {
        return Err(Error::NotProportional { coordinate: "all coefficients of the first field vanish".into(), witness: Vec::new() });
    };
    let mut h = &bracket[p].1 / &base[p].1;
    if let Some(v) = oracle.constant_value(&h)? {
        let (c, exact) = linalg::to_constant(v);
        if exact {
            h = c;
        }
    }
    for ((sym, c), (_, b)) in bracket.iter().zip(&base) {
        let residual = (c - &(&h * b)).expand();
        let v = oracle.check_zero(std::slice::from_ref(&residual))?;
        if !v.holds {
            return Err(Error::NotProportional {
                coordinate: space.symbol_name(sym),
                witness: v.failure.map(|f| witness_from(&f.point, Some(&work))).unwrap_or_default(),
            });
        }
    }
    Ok(h)
}

/// μ-Euler–Lagrange system of a first-order Lagrangian.
#[derive(Clone, Debug)]
pub struct MuEulerLagrange {
    /// `E_i = D_x ∂L/∂q̇^i − ∂L/∂q^i − (Λ^T)_i^j ∂L/∂q̇^j`.
    pub equations: Vec<Expr>,
    /// Solved accelerations `q̈^i`.
    pub accelerations: Vec<Expr>,
}

pub fn mu_euler_lagrange(l: &Lagrangian, lam: &Matrix, space: &JetSpace, oracle: &Oracle) -> Result<MuEulerLagrange> {
    if space.n() != 1 {
        return Err(Error::Precondition("μ-Euler–Lagrange equations need one independent variable".into()));
    }
    if l.order > 1 {
        return Err(Error::Precondition("μ-Euler–Lagrange equations need a first-order Lagrangian".into()));
    }
    let m = space.m();
    if lam.rows() != m || lam.cols() != m {
        return Err(Error::SizeMismatch(format!("Λ must be {m}x{m}")));
    }
    let work = work_space(space, 2);
    let qdot = |a: usize| Symbol::jet(a, MultiIndex::ode(1));
    let momenta: Vec<Expr> = (0..m).map(|a| l.expr.partial(&qdot(a))).collect();
    let mut equations = Vec::with_capacity(m);
    for i in 0..m {
        let mut terms = vec![work.total_derivative(&momenta[i], 0)?, -l.expr.partial(&Symbol::jet(i, MultiIndex::zero(1)))];
        for (j, p) in momenta.iter().enumerate() {
            let c = lam.get(j, i);
            if !c.is_zero() {
                terms.push(-&(c * p));
            }
        }
        equations.push(Expr::sum(terms).expand());
    }
    let hessian = Matrix::from_rows(
        (0..m).map(|i| (0..m).map(|j| momenta[i].partial(&qdot(j)).expand()).collect()).collect(),
    )?;
    certify_invertible(&hessian, oracle).map_err(|e| match e {
        Error::SingularAtSample => Error::DegenerateLagrangian,
        other => other,
    })?;
    let qddot: Vec<Symbol> = (0..m).map(|a| Symbol::jet(a, MultiIndex::ode(2))).collect();
    let rest: Vec<Expr> = equations
        .iter()
        .map(|e| {
            let mut out = e.clone();
            for s in &qddot {
                out = out.substitute_one(s, &Expr::zero());
            }
            -out
        })
        .collect();
    let accelerations = hessian.inverse()?.apply(&rest)?;
    Ok(MuEulerLagrange { equations, accelerations })
}

/// Hypothesis `X^{(1)}_μ(L) ≡ 0` and conservation `D_x P ≡ 0` on solutions
/// of the μ-Euler–Lagrange equations, with `P = φ^a ∂L/∂q̇^a`.
pub fn check_mu_conservation(
    l: &Lagrangian,
    lam: &Matrix,
    x: &VectorField,
    space: &JetSpace,
    oracle: &Oracle,
) -> Result<(Verdict, Verdict)> {
    if !x.is_vertical() {
        return Err(Error::NonVerticalInput);
    }
    let system = mu_euler_lagrange(l, lam, space, oracle)?;
    let work = work_space(space, 2);
    let v = prolong_mu(x, std::slice::from_ref(lam), 1, &work, MchPolicy::Unchecked)?;
    let hypothesis = oracle.check_zero(&[v.apply(&l.expr)])?;
    let p = Expr::sum(
        x.phi().iter().enumerate().map(|(a, phi)| phi * &l.expr.partial(&Symbol::jet(a, MultiIndex::ode(1)))),
    );
    let mut dp = work.total_derivative(&p, 0)?;
    let subs = (0..space.m()).map(|a| (Symbol::jet(a, MultiIndex::ode(2)), system.accelerations[a].clone())).collect();
    dp = dp.substitute(&subs);
    let conservation = oracle.check_zero(&[dp])?;
    Ok((hypothesis, conservation))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ode(k: usize) -> JetSpace {
        JetSpace::new(&["x"], &["u"], k).unwrap()
    }

    fn field(s: &JetSpace, xi: &str, phi: &str) -> VectorField {
        VectorField::parse(s, &[xi], &[phi]).unwrap()
    }

    #[test]
    fn euler_lagrange_examples() {
        let s = ode(2);
        let o = Oracle::default();
        let el = |t: &str| euler_lagrange(&Lagrangian::parse(&s, t).unwrap(), &s).unwrap()[0].clone();
        assert_eq!(el("u_x^2/2"), s.parse("-u_xx").unwrap());
        assert!(o.equal(&el("u_x^2/2 - u^2/2"), &s.parse("-u_xx - u").unwrap()).unwrap());
        let f = s.parse("x^2*sin(u) + u^3").unwrap();
        let df = s.total_derivative(&f, 0).unwrap();
        assert!(o.is_zero(&euler_lagrange(&Lagrangian::new(&s, df).unwrap(), &s).unwrap()[0]).unwrap());
    }

    #[test]
    fn variational_symmetry_examples() {
        let s = ode(1);
        let o = Oracle::default();
        let l = Lagrangian::parse(&s, "u_x^2/2").unwrap();
        assert!(check_variational_symmetry(&field(&s, "0", "1"), &l, &Expr::zero(), &s, &o).unwrap().holds);
        assert!(check_variational_symmetry(&field(&s, "0", "x"), &l, &s.u(0), &s, &o).unwrap().holds);
        assert!(!check_variational_symmetry(&field(&s, "0", "u"), &l, &Expr::zero(), &s, &o).unwrap().holds);
        assert!(variational_symmetry_exists(&field(&s, "0", "x"), &l, &s, &o).unwrap().holds);
        assert!(!variational_symmetry_exists(&field(&s, "0", "u"), &l, &s, &o).unwrap().holds);
    }

    #[test]
    fn lambda_variational_examples() {
        let s = ode(1);
        let o = Oracle::default();
        let l = Lagrangian::parse(&s, "u_x^2/2").unwrap();
        let du = field(&s, "0", "1");
        assert!(!check_variational_lambda_symmetry(&du, &Expr::one(), &l, &Expr::zero(), &s, &o).unwrap().holds);
        let l2 = Lagrangian::parse(&s, "u_x^2*exp(-2*u)/2").unwrap();
        let lam = s.ode_jet(0, 1);
        assert!(check_variational_lambda_symmetry(&du, &lam, &l2, &Expr::zero(), &s, &o).unwrap().holds);
        // L + D_x(x u) with flux shifted by X(x u)
        let shifted = Lagrangian::new(&s, l2.expr() + &s.parse("u + x*u_x").unwrap()).unwrap();
        let f2 = s.parse("x").unwrap();
        assert!(check_variational_lambda_symmetry(&du, &lam, &shifted, &f2, &s, &o).unwrap().holds);
        assert!(!check_variational_lambda_symmetry(&du, &lam, &shifted, &Expr::zero(), &s, &o).unwrap().holds);
    }

    #[test]
    fn noether_identity_examples() {
        let s = ode(2);
        let o = Oracle::default();
        let l = Lagrangian::parse(&s, "u_x^2/2").unwrap();
        let du = field(&s, "0", "1");
        let r = noether_identity_residual(&du, &Expr::zero(), &l, &s.ode_jet(0, 1), &s).unwrap();
        assert!(o.is_zero(&r).unwrap());
        let r = noether_identity_residual(&du, &Expr::zero(), &l, &s.parse("x*u").unwrap(), &s).unwrap();
        assert!(!o.is_zero(&r).unwrap());
        let zero = Lagrangian::new(&s, Expr::zero()).unwrap();
        let r = noether_identity_residual(&field(&s, "0", "x*u"), &Expr::zero(), &zero, &Expr::zero(), &s).unwrap();
        assert!(o.is_zero(&r).unwrap());
    }

    #[test]
    fn canonical_flux_satisfies_identity() {
        let s = ode(2);
        let o = Oracle::default();
        let l = Lagrangian::parse(&s, "u_x^2*exp(-2*u)/2 + x*u*u_xx").unwrap();
        for (xi, phi, lam) in [("0", "1", "u_x"), ("x", "u^2", "sin(u)"), ("u", "x", "0")] {
            let x = field(&s, xi, phi);
            let lam = s.parse(lam).unwrap();
            let f = noether_flux(&x, &lam, &l, &s).unwrap();
            assert!(NoetherCertificate::certify(&x, &lam, &l, f, None, &s, &o).is_ok());
        }
    }

    #[test]
    fn noether_potential_examples() {
        let s = ode(2);
        let o = Oracle::default();
        let l = Lagrangian::parse(&s, "u_x^2/2").unwrap();
        let du = field(&s, "0", "1");
        let p = s.parse("-u_x").unwrap();
        assert!(verify_noether_potential(&du, &Expr::zero(), &l, &p, &s, &o).unwrap().holds);
        let shifted = &p + &Expr::integer(3);
        assert!(verify_noether_potential(&du, &Expr::zero(), &l, &shifted, &s, &o).unwrap().holds);
        assert!(!verify_noether_potential(&du, &Expr::one(), &l, &shifted, &s, &o).unwrap().holds);
    }

    #[test]
    fn solvable_pair_examples() {
        let s = ode(2);
        let o = Oracle::default();
        let z = Expr::zero();
        let du = field(&s, "0", "1");
        assert!(check_solvable_pair(&du, &z, &du, &z, 2, &s, &o).unwrap().is_zero());
        let h = check_solvable_pair(&du, &z, &field(&s, "0", "u"), &z, 2, &s, &o).unwrap();
        assert!(h.is_one());
        let r = check_solvable_pair(
            &field(&s, "x*u", "u^2 + x"),
            &s.parse("u_x*x").unwrap(),
            &field(&s, "u", "x^2*u"),
            &s.parse("sin(u)").unwrap(),
            2,
            &s,
            &o,
        );
        assert!(matches!(r, Err(Error::NotProportional { ref witness, .. }) if !witness.is_empty()));
    }

    #[test]
    fn mu_euler_lagrange_examples() {
        let s = ode(2);
        let o = Oracle::default();
        let l = Lagrangian::parse(&s, "u_x^2/2").unwrap();
        let sys = mu_euler_lagrange(&l, &Matrix::scalar(Expr::integer(3)), &s, &o).unwrap();
        assert!(o.equal(&sys.accelerations[0], &s.parse("3*u_x").unwrap()).unwrap());
        let s2 = JetSpace::new(&["t"], &["q", "r"], 2).unwrap();
        let l2 = Lagrangian::parse(&s2, "(q_t^2 + r_t^2)/2").unwrap();
        let lam = Matrix::from_rows(vec![vec![Expr::zero(), Expr::integer(2)], vec![Expr::zero(), Expr::zero()]]).unwrap();
        let sys = mu_euler_lagrange(&l2, &lam, &s2, &o).unwrap();
        assert!(sys.accelerations[0].is_zero());
        assert!(o.equal(&sys.accelerations[1], &s2.parse("2*q_t").unwrap()).unwrap());
        let degenerate = Lagrangian::parse(&s, "u*u_x").unwrap();
        assert!(matches!(
            mu_euler_lagrange(&degenerate, &Matrix::scalar(Expr::zero()), &s, &o),
            Err(Error::DegenerateLagrangian)
        ));
    }

    #[test]
    fn mu_conservation_examples() {
        let s = ode(2);
        let o = Oracle::default();
        let l = Lagrangian::parse(&s, "u_x^2/2").unwrap();
        for lam in ["0", "1", "-1/2"] {
            let lam = s.parse(lam).unwrap();
            let x = VectorField::vertical(&s, vec![(-(&lam * &s.x(0))).exp()]).unwrap();
            let (h, c) = check_mu_conservation(&l, &Matrix::scalar(lam), &x, &s, &o).unwrap();
            assert!(h.holds && c.holds);
        }
        let (h, _) = check_mu_conservation(&l, &Matrix::scalar(Expr::one()), &field(&s, "0", "x"), &s, &o).unwrap();
        assert!(!h.holds);
    }
}
