//! Differential equations in solved form, symmetry conditions, involution
//! tests and the ansatz solver for determining equations.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{witness_from, Error, Result};
use crate::expr::{Expr, Symbol};
use crate::field::{ProlongedField, VectorField};
use crate::jet::{JetSpace, MultiIndex};
use crate::linalg;
use crate::matrix::Matrix;
use crate::oracle::{Oracle, Verdict};
use crate::prolong::{prolong, TwistData};

const MAX_DEPTH: usize = 64;

/// A system `u^a_{J*} = rhs` solved for leading derivatives of a common order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffEq {
    space: JetSpace,
    leads: Vec<(usize, MultiIndex)>,
    rhs: Vec<Expr>,
    order: usize,
}

impl DiffEq {
    pub fn new(space: &JetSpace, leads: Vec<(usize, MultiIndex)>, rhs: Vec<Expr>) -> Result<DiffEq> {
        if leads.is_empty() || leads.len() != rhs.len() {
            return Err(Error::NotSolvedForm("need one right-hand side per leading derivative".into()));
        }
        let order = leads[0].1.order();
        if order == 0 || leads.iter().any(|(_, j)| j.order() != order) {
            return Err(Error::NotSolvedForm("leading derivatives must share a positive order".into()));
        }
        if order > space.max_order() {
            return Err(Error::OrderOverflow { needed: order, max: space.max_order() });
        }
        for (k, (a, j)) in leads.iter().enumerate() {
            if *a >= space.m() || j.len() != space.n() {
                return Err(Error::NotSolvedForm("leading coordinate outside the space".into()));
            }
            if leads[..k].iter().any(|(b, i)| b == a && i == j) {
                return Err(Error::NotSolvedForm("repeated leading derivative".into()));
            }
        }
        let eq = DiffEq { space: space.clone(), leads, rhs, order };
        for r in &eq.rhs {
            if r.jet_order() > order {
                return Err(Error::NotSolvedForm("right-hand side exceeds the equation order".into()));
            }
            if r.free_symbols().iter().any(|s| eq.principal(s).is_some()) {
                return Err(Error::NotSolvedForm("right-hand side contains a leading derivative".into()));
            }
        }
        Ok(eq)
    }

    /// Parse `(lead, rhs)` pairs such as `("u_xx", "u_x^2 + u_x")`.
    pub fn parse(space: &JetSpace, equations: &[(&str, &str)]) -> Result<DiffEq> {
        let mut leads = Vec::new();
        let mut rhs = Vec::new();
        for (lead, r) in equations {
            match space.parse(lead)?.as_symbol() {
                Some(Symbol::Jet(a, j)) => leads.push((*a as usize, j.clone())),
                _ => return Err(Error::NotSolvedForm(format!("`{lead}` is not a jet coordinate"))),
            }
            rhs.push(space.parse(r)?);
        }
        DiffEq::new(space, leads, rhs)
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn leads(&self) -> &[(usize, MultiIndex)] {
        &self.leads
    }

    pub fn rhs(&self) -> &[Expr] {
        &self.rhs
    }

    /// Residual form `F = u^a_{J*} − rhs`.
    pub fn residual_forms(&self) -> Vec<Expr> {
        self.leads.iter().zip(&self.rhs).map(|((a, j), r)| &self.space.jet(*a, j) - r).collect()
    }

    /// Index of the leading derivative that `s` is a derivative of.
    fn principal(&self, s: &Symbol) -> Option<usize> {
        match s {
            Symbol::Jet(a, k) => self.leads.iter().position(|(b, j)| *b == *a as usize && j.divides(k)),
            _ => None,
        }
    }

    fn value(&self, a: usize, k: &MultiIndex, memo: &mut HashMap<(usize, MultiIndex), Expr>, depth: usize) -> Result<Expr> {
        if let Some(v) = memo.get(&(a, k.clone())) {
            return Ok(v.clone());
        }
        let unavailable = || Error::NeedsUnavailableDerivative(self.space.symbol_name(&Symbol::jet(a, k.clone())));
        if depth > MAX_DEPTH || k.order() > self.space.max_order() {
            return Err(unavailable());
        }
        let sym = Symbol::jet(a, k.clone());
        let lead = self.principal(&sym).expect("principal coordinate");
        let v = if self.leads[lead].1 == *k {
            self.rhs[lead].clone()
        } else {
            let j = &self.leads[lead].1;
            let i = (0..k.len()).rev().find(|&i| k.count(i) > j.count(i)).unwrap();
            let parent = k.decrement(i).unwrap();
            let pv = self.value(a, &parent, memo, depth + 1)?;
            let d = self.space.total_derivative(&pv, i).map_err(|_| unavailable())?;
            self.restrict_rec(&d, memo, depth + 1)?
        };
        memo.insert((a, k.clone()), v.clone());
        Ok(v)
    }

    fn restrict_rec(&self, e: &Expr, memo: &mut HashMap<(usize, MultiIndex), Expr>, depth: usize) -> Result<Expr> {
        let mut bindings = HashMap::new();
        for s in e.free_symbols() {
            if let Symbol::Jet(a, k) = &s {
                if k.order() > self.space.max_order() {
                    return Err(Error::NeedsUnavailableDerivative(self.space.symbol_name(&s)));
                }
                if self.principal(&s).is_some() {
                    let v = self.value(*a as usize, k, memo, depth)?;
                    bindings.insert(s.clone(), v);
                }
            }
        }
        Ok(e.substitute(&bindings))
    }

    /// Restriction to the solution manifold: replace leading derivatives and
    /// their total-derivative consequences by their solved values.
    pub fn restrict(&self, e: &Expr) -> Result<Expr> {
        let mut memo = HashMap::new();
        self.restrict_rec(e, &mut memo, 0)
    }
}

/// `[V(F)]` restricted to the solution manifold, one entry per equation.
pub fn symmetry_residual(eq: &DiffEq, v: &ProlongedField) -> Result<Vec<Expr>> {
    if v.order() < eq.order() {
        return Err(Error::Precondition(format!(
            "field prolonged to order {} for an equation of order {}",
            v.order(),
            eq.order()
        )));
    }
    eq.residual_forms().iter().map(|f| eq.restrict(&v.apply(f))).collect()
}

/// `V(F)` without restriction; vanishing means a strong symmetry.
pub fn strong_symmetry_residual(eq: &DiffEq, v: &ProlongedField) -> Vec<Expr> {
    eq.residual_forms().iter().map(|f| v.apply(f)).collect()
}

pub fn is_symmetry(eq: &DiffEq, v: &ProlongedField, oracle: &Oracle) -> Result<Verdict> {
    oracle.check_zero(&symmetry_residual(eq, v)?)
}

/// Commutator of first-order operators.
pub trait Bracket: Sized {
    fn bracket(&self, other: &Self) -> Result<Self>;
}

impl Bracket for VectorField {
    fn bracket(&self, other: &Self) -> Result<Self> {
        Ok(self.commutator(other))
    }
}

impl Bracket for ProlongedField {
    fn bracket(&self, other: &Self) -> Result<Self> {
        self.commutator(other)
    }
}

pub fn commutator<F: Bracket>(v: &F, w: &F) -> Result<F> {
    v.bracket(w)
}

/// Fields closing under brackets: `[X_α, X_β] = f^γ_{αβ} X_γ`.
#[derive(Clone, Debug)]
pub struct InvolutiveSystem {
    pub fields: Vec<VectorField>,
    /// `structure[α][β][γ] = f^γ_{αβ}`.
    pub structure: Vec<Vec<Vec<Expr>>>,
}

impl InvolutiveSystem {
    pub fn structure_function(&self, alpha: usize, beta: usize, gamma: usize) -> &Expr {
        &self.structure[alpha][beta][gamma]
    }
}

fn select_pivots(rows: &DMatrix<f64>) -> (Vec<usize>, Vec<usize>) {
    let tol = 1e-9;
    let mut pivot_rows: Vec<usize> = Vec::new();
    for r in 0..rows.nrows() {
        let mut trial = pivot_rows.clone();
        trial.push(r);
        let sub = rows.select_rows(trial.iter());
        if linalg::numeric_rank(&sub, tol) == trial.len() {
            pivot_rows = trial;
        }
    }
    let sub = rows.select_rows(pivot_rows.iter());
    let mut pivot_cols: Vec<usize> = Vec::new();
    for c in 0..sub.ncols() {
        let mut trial = pivot_cols.clone();
        trial.push(c);
        let m = sub.select_columns(trial.iter());
        if linalg::numeric_rank(&m, tol) == trial.len() {
            pivot_cols = trial;
        }
        if pivot_cols.len() == pivot_rows.len() {
            break;
        }
    }
    (pivot_rows, pivot_cols)
}

fn simplify_constant(e: Expr, oracle: &Oracle) -> Result<Expr> {
    if e.as_const().is_some() {
        return Ok(e);
    }
    if let Some(v) = oracle.constant_value(&e)? {
        if let Some(r) = linalg::rationalize(v, 12, 1e-6) {
            return Ok(Expr::constant(r));
        }
    }
    Ok(e)
}

/// Decide whether `xs` is closed under brackets and find structure functions.
///
/// Pivot fields and coordinates are chosen numerically; the structure
/// functions come from Cramer's rule on the pivot minor and every coordinate
/// of every bracket is then certified by the oracle.
pub fn check_involution(xs: &[VectorField], space: &JetSpace, oracle: &Oracle) -> Result<InvolutiveSystem> {
    let r = xs.len();
    if r == 0 {
        return Err(Error::Precondition("need at least one field".into()));
    }
    let comps: Vec<Vec<Expr>> = xs.iter().map(VectorField::components).collect();
    let dim = comps[0].len();
    let all: Vec<Expr> = comps.iter().flatten().cloned().collect();
    let points = oracle.sample_points(&all, &[], oracle.trials)?;
    let numeric = |p: &crate::expr::EvalPoint| -> DMatrix<f64> {
        DMatrix::from_fn(r, dim, |a, c| comps[a][c].eval(p).unwrap_or(0.0))
    };
    let (pivot_rows, pivot_cols) = select_pivots(&numeric(&points[0]));
    let rho = pivot_rows.len();
    let mut structure = vec![vec![vec![Expr::zero(); r]; r]; r];
    if rho == 0 {
        return Err(Error::DegenerateDistribution);
    }
    if rho > 4 {
        return Err(Error::MatrixTooLarge(rho));
    }
    // minor[c][g] = X_{pivot g} at coordinate pivot c
    let minor = Matrix::new(
        rho,
        rho,
        pivot_cols
            .iter()
            .flat_map(|&c| pivot_rows.iter().map(move |&g| (c, g)))
            .map(|(c, g)| comps[g][c].clone())
            .collect(),
    );
    let det = minor.det()?;
    let degenerate = points
        .iter()
        .filter(|p| det.eval(p).map(|v| v.abs() < 1e-9).unwrap_or(true))
        .count();
    if degenerate as f64 > 0.1 * points.len() as f64 {
        return Err(Error::DegenerateDistribution);
    }
    let adj = minor.adjugate()?;
    let inv_det = det.recip();

    for alpha in 0..r {
        for beta in alpha + 1..r {
            let b = xs[alpha].commutator(&xs[beta]).components();
            let rhs: Vec<Expr> = pivot_cols.iter().map(|&c| b[c].clone()).collect();
            let solved = adj.apply(&rhs)?;
            let mut coeffs = vec![Expr::zero(); r];
            for (g, e) in pivot_rows.iter().zip(solved) {
                coeffs[*g] = simplify_constant((&e * &inv_det).expand(), oracle)?;
            }
            let pairs: Vec<(Expr, Expr)> = (0..dim)
                .map(|c| {
                    let span = Expr::sum((0..r).map(|g| &coeffs[g] * &comps[g][c]));
                    (b[c].clone(), span)
                })
                .collect();
            let verdict = oracle.check_pairs(&pairs)?;
            if !verdict.holds {
                let witness = verdict.failure.map(|f| witness_from(&f.point, Some(space))).unwrap_or_default();
                return Err(Error::NotInvolutive { alpha, beta, witness });
            }
            for g in 0..r {
                structure[beta][alpha][g] = -&coeffs[g];
                structure[alpha][beta][g] = coeffs[g].clone();
            }
        }
    }
    Ok(InvolutiveSystem { fields: xs.to_vec(), structure })
}

/// Candidate fields whose linear span is searched for symmetries.
#[derive(Clone, Debug)]
pub struct AnsatzProblem {
    candidates: Vec<VectorField>,
}

impl AnsatzProblem {
    pub fn from_fields(candidates: Vec<VectorField>) -> AnsatzProblem {
        AnsatzProblem { candidates }
    }

    /// Every component of `(ξ, φ)` ranges over the span of `basis`.
    pub fn uniform(space: &JetSpace, basis: &[Expr]) -> Result<AnsatzProblem> {
        let dim = space.n() + space.m();
        let mut candidates = Vec::new();
        for c in 0..dim {
            for b in basis {
                let mut comps = vec![Expr::zero(); dim];
                comps[c] = b.clone();
                let phi = comps.split_off(space.n());
                candidates.push(VectorField::new(space, comps, phi)?);
            }
        }
        Ok(AnsatzProblem { candidates })
    }

    /// Monomials in `(x, u)` of total degree at most `degree`.
    pub fn monomials(space: &JetSpace, degree: usize) -> Vec<Expr> {
        let vars: Vec<Expr> = (0..space.n()).map(|i| space.x(i)).chain((0..space.m()).map(|a| space.u(a))).collect();
        let mut out = Vec::new();
        for d in 0..=degree {
            for exps in MultiIndex::all_of_order(vars.len(), d) {
                out.push(Expr::product(vars.iter().zip(exps.counts()).map(|(v, &e)| v.powi(e as i64))));
            }
        }
        out
    }

    pub fn polynomial(space: &JetSpace, degree: usize) -> Result<AnsatzProblem> {
        AnsatzProblem::uniform(space, &AnsatzProblem::monomials(space, degree))
    }

    pub fn candidates(&self) -> &[VectorField] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Basis of the symmetries found inside an ansatz.
#[derive(Clone, Debug, Default)]
pub struct SolutionSpace {
    /// Coefficients with respect to the ansatz candidates.
    pub coefficients: Vec<Vec<Expr>>,
    pub fields: Vec<VectorField>,
    /// Whether every coefficient of the basis vector was rationalized.
    pub exact: Vec<bool>,
    pub verdicts: Vec<Verdict>,
}

impl SolutionSpace {
    pub fn dim(&self) -> usize {
        self.fields.len()
    }
}

fn ansatz_attempt(
    eq: &DiffEq,
    problem: &AnsatzProblem,
    twist: &TwistData,
    oracle: &Oracle,
    residuals: &[Vec<Expr>],
    extra_points: usize,
) -> Result<Option<SolutionSpace>> {
    let space = eq.space();
    let p = problem.len();
    let all: Vec<Expr> = residuals.iter().flatten().cloned().collect();
    let count = (3 * p).max(p + 8) + extra_points;
    let points = oracle.sample_points(&all, &[], count)?;
    let neq = residuals[0].len();
    let mut a = DMatrix::zeros(points.len() * neq, p);
    for (pi, pt) in points.iter().enumerate() {
        for e in 0..neq {
            let row = pi * neq + e;
            for j in 0..p {
                a[(row, j)] = residuals[j][e].eval(pt).map_err(|_| Error::IllConditioned)?;
            }
            let scale = a.row(row).amax();
            if scale > 0.0 {
                a.row_mut(row).scale_mut(1.0 / scale);
            }
        }
    }
    let null = linalg::null_space(&a, 1e-8);
    let mut out = SolutionSpace::default();
    if null.ncols() == 0 {
        return Ok(Some(out));
    }
    let basis = linalg::rref(null.transpose(), 1e-9);
    let certify = oracle.with_trials(200);
    for row in basis.row_iter() {
        let mut exact = true;
        let coeffs: Vec<Expr> = row
            .iter()
            .map(|&v| {
                let (c, ok) = linalg::to_constant(v);
                exact &= ok;
                c
            })
            .collect();
        let field = VectorField::combination(space, &coeffs, problem.candidates());
        let v = prolong(&field, twist, eq.order(), space)?;
        let verdict = certify.check_zero(&symmetry_residual(eq, &v)?)?;
        if !verdict.holds {
            return Ok(None);
        }
        out.coefficients.push(coeffs);
        out.fields.push(field);
        out.exact.push(exact);
        out.verdicts.push(verdict);
    }
    Ok(Some(out))
}

/// Symmetries (for the given twist) inside the span of the ansatz fields.
///
/// Residuals are linear in the field, so each candidate's residual is
/// evaluated at sample points and the null space of the stacked system is
/// extracted by SVD. Every basis field is re-certified with 200 trials.
pub fn solve_determining_ansatz(
    eq: &DiffEq,
    problem: &AnsatzProblem,
    twist: &TwistData,
    oracle: &Oracle,
) -> Result<SolutionSpace> {
    if problem.is_empty() {
        return Ok(SolutionSpace::default());
    }
    let residuals: Vec<Vec<Expr>> = problem
        .candidates()
        .iter()
        .map(|g| symmetry_residual(eq, &prolong(g, twist, eq.order(), eq.space())?))
        .collect::<Result<_>>()?;
    for attempt in 0..3u64 {
        let o = oracle.with_seed(oracle.seed.wrapping_add(attempt * 0x9e37_79b9));
        match ansatz_attempt(eq, problem, twist, &o, &residuals, attempt as usize * problem.len()) {
            Ok(Some(space)) => return Ok(space),
            Ok(None) | Err(Error::IllConditioned) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::IllConditioned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prolong::{prolong_lambda, prolong_standard};

    fn ode(k: usize) -> JetSpace {
        JetSpace::new(&["x"], &["u"], k).unwrap()
    }

    #[test]
    fn restriction_examples() {
        let s = ode(3);
        let eq = DiffEq::parse(&s, &[("u_xx", "u_x^2 + u_x")]).unwrap();
        assert_eq!(eq.restrict(&s.parse("u_xx").unwrap()).unwrap(), s.parse("u_x^2 + u_x").unwrap());
        let third = eq.restrict(&s.parse("u_xxx").unwrap()).unwrap();
        let want = s.parse("(2*u_x + 1)*(u_x^2 + u_x)").unwrap();
        assert!(Oracle::default().equal(&third, &want).unwrap());
        assert_eq!(eq.restrict(&s.x(0)).unwrap(), s.x(0));
    }

    #[test]
    fn restriction_beyond_space_fails() {
        let s = ode(2);
        let eq = DiffEq::parse(&s, &[("u_xx", "u")]).unwrap();
        let e = Expr::symbol(Symbol::jet(0, MultiIndex::ode(3)));
        assert!(matches!(eq.restrict(&e), Err(Error::NeedsUnavailableDerivative(_))));
    }

    #[test]
    fn rejects_non_solved_forms() {
        let s = ode(2);
        assert!(DiffEq::parse(&s, &[("u_xx", "u_xx*x")]).is_err());
        assert!(DiffEq::parse(&s, &[("x", "u")]).is_err());
    }

    #[test]
    fn symmetry_residual_examples() {
        let s = ode(2);
        let o = Oracle::default();
        let free = DiffEq::parse(&s, &[("u_xx", "0")]).unwrap();
        let dx = VectorField::parse(&s, &["1"], &["0"]).unwrap();
        assert!(is_symmetry(&free, &prolong_standard(&dx, 2, &s).unwrap(), &o).unwrap().holds);
        let scale = VectorField::parse(&s, &["0"], &["u"]).unwrap();
        assert!(is_symmetry(&free, &prolong_standard(&scale, 2, &s).unwrap(), &o).unwrap().holds);

        let eq = DiffEq::parse(&s, &[("u_xx", "u_x^2 + u_x")]).unwrap();
        let du = VectorField::parse(&s, &["0"], &["1"]).unwrap();
        let v = prolong_lambda(&du, &s.parse("u_x").unwrap(), 2, &s).unwrap();
        assert!(is_symmetry(&eq, &v, &o).unwrap().holds);
        // unrestricted value equals F itself
        let strong = strong_symmetry_residual(&eq, &v);
        assert!(o.equal(&strong[0], &eq.residual_forms()[0]).unwrap());
    }

    #[test]
    fn involution_examples() {
        let s = ode(1);
        let o = Oracle::default();
        let dx = VectorField::parse(&s, &["1"], &["0"]).unwrap();
        let du = VectorField::parse(&s, &["0"], &["1"]).unwrap();
        let xdx = VectorField::parse(&s, &["x"], &["0"]).unwrap();
        let single = check_involution(std::slice::from_ref(&dx), &s, &o).unwrap();
        assert!(single.structure[0][0][0].is_zero());
        let pair = check_involution(&[dx.clone(), du], &s, &o).unwrap();
        assert!(pair.structure.iter().flatten().flatten().all(Expr::is_zero));
        let aff = check_involution(&[dx, xdx], &s, &o).unwrap();
        assert!(aff.structure_function(0, 1, 0).is_one());
        assert!(aff.structure_function(0, 1, 1).is_zero());
    }

    #[test]
    fn non_involutive_pair_reports_witness() {
        let s = JetSpace::new(&["x", "y"], &["u"], 1).unwrap();
        let a = VectorField::parse(&s, &["1", "0"], &["0"]).unwrap();
        let b = VectorField::parse(&s, &["0", "1"], &["x^2"]).unwrap();
        match check_involution(&[a, b], &s, &Oracle::default()) {
            Err(Error::NotInvolutive { alpha: 0, beta: 1, witness }) => assert!(!witness.is_empty()),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn free_particle_has_eight_quadratic_symmetries() {
        let s = ode(2);
        let eq = DiffEq::parse(&s, &[("u_xx", "0")]).unwrap();
        let problem = AnsatzProblem::polynomial(&s, 2).unwrap();
        let sol = solve_determining_ansatz(&eq, &problem, &TwistData::None, &Oracle::default()).unwrap();
        assert_eq!(sol.dim(), 8);
        assert!(sol.exact.iter().all(|e| *e));
    }

    #[test]
    fn empty_ansatz_gives_empty_space() {
        let s = ode(2);
        let eq = DiffEq::parse(&s, &[("u_xx", "0")]).unwrap();
        let sol = solve_determining_ansatz(&eq, &AnsatzProblem::from_fields(vec![]), &TwistData::None, &Oracle::default())
            .unwrap();
        assert_eq!(sol.dim(), 0);
    }

    #[test]
    fn translation_found_for_linear_equation() {
        let s = ode(2);
        let eq = DiffEq::parse(&s, &[("u_xx", "u")]).unwrap();
        let dx = VectorField::parse(&s, &["1"], &["0"]).unwrap();
        let sol = solve_determining_ansatz(&eq, &AnsatzProblem::from_fields(vec![dx.clone()]), &TwistData::None, &Oracle::default())
            .unwrap();
        assert_eq!(sol.fields, vec![dx]);
    }
}
