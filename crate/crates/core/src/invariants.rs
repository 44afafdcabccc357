//! Differential invariants by differentiation, order reduction of scalar
//! ODEs in invariant coordinates, and numeric reconstruction by quadrature.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{witness_from, Error, Result};
use crate::expr::{EvalPoint, Expr, Rational, Symbol};
use crate::field::{ProlongedField, TwistKind};
use crate::jet::{JetSpace, MultiIndex};
use crate::linalg;
use crate::oracle::{Oracle, Verdict};
use crate::symmetry::DiffEq;

/// Oracle verdict for `V(ζ) ≡ 0` over every field.
pub fn invariance_verdict(vs: &[ProlongedField], zeta: &Expr, oracle: &Oracle) -> Result<Verdict> {
    let exprs: Vec<Expr> = vs.iter().map(|v| v.apply(zeta)).collect();
    oracle.check_zero(&exprs)
}

pub fn is_invariant(vs: &[ProlongedField], zeta: &Expr, oracle: &Oracle) -> Result<bool> {
    Ok(invariance_verdict(vs, zeta, oracle)?.holds)
}

/// `D_x ζ / D_x η`.
pub fn ibdp_step(eta: &Expr, zeta: &Expr, space: &JetSpace, oracle: &Oracle) -> Result<Expr> {
    let deta = space.total_derivative(eta, 0)?;
    if deta.is_zero() || oracle.is_zero(&deta)? {
        return Err(Error::DegenerateBase);
    }
    let dzeta = space.total_derivative(zeta, 0)?;
    Ok(if deta.is_one() { dzeta } else { &dzeta / &deta })
}

/// `η`, `ζ = ζ_(1)` and the generated `ζ_(2), ζ_(3), …`.
#[derive(Clone, Debug)]
pub struct InvariantChain {
    pub base: Expr,
    pub seed: Expr,
    pub generated: Vec<Expr>,
    pub verdicts: Vec<Verdict>,
}

impl InvariantChain {
    /// `ζ_(k)` for `k ≥ 1`.
    pub fn element(&self, k: usize) -> Option<&Expr> {
        match k {
            0 => None,
            1 => Some(&self.seed),
            _ => self.generated.get(k - 2),
        }
    }

    /// `ζ_(1), …, ζ_(top)`.
    pub fn elements(&self) -> Vec<Expr> {
        std::iter::once(self.seed.clone()).chain(self.generated.iter().cloned()).collect()
    }

    pub fn top_order(&self) -> usize {
        1 + self.generated.len()
    }
}

/// Pointwise closure test for jet-space operators: adding any bracket
/// `[V_α, V_β]` to the family does not raise its rank at sample points.
pub fn operators_in_involution(vs: &[ProlongedField], oracle: &Oracle) -> Result<bool> {
    let mut rows: Vec<Vec<Expr>> = vs.iter().map(|v| v.coefficients().into_iter().map(|c| c.1).collect()).collect();
    let r = rows.len();
    for a in 0..r {
        for b in a + 1..r {
            rows.push(vs[a].commutator(&vs[b])?.coefficients().into_iter().map(|c| c.1).collect());
        }
    }
    if rows.len() == r {
        return Ok(true);
    }
    let all: Vec<Expr> = rows.iter().flatten().cloned().collect();
    let points = oracle.sample_points(&all, &[], oracle.trials.min(20))?;
    for p in &points {
        let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j].eval(p).unwrap_or(f64::NAN));
        if m.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let base = linalg::numeric_rank(&m.rows(0, r).into_owned(), 1e-9);
        if linalg::numeric_rank(&m, 1e-9) > base {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Generate `ζ_(k+1) = D_x ζ_(k) / D_x η` until the chain reaches jet order
/// `target`, certifying each new element against every field.
pub fn generate_invariant_chain(
    vs: &[ProlongedField],
    eta: &Expr,
    zeta: &Expr,
    target: usize,
    space: &JetSpace,
    oracle: &Oracle,
) -> Result<InvariantChain> {
    if space.n() != 1 {
        return Err(Error::Precondition("invariant chains need one independent variable".into()));
    }
    if let Some(v) = vs.iter().find(|v| v.order() < target) {
        return Err(Error::Precondition(format!("field prolonged to order {} < {target}", v.order())));
    }
    if vs.iter().any(|v| v.twist() == TwistKind::Sigma) && !operators_in_involution(vs, oracle)? {
        return Err(Error::Precondition("σ-prolonged fields are not in involution".into()));
    }
    for (name, e) in [("base", eta), ("seed", zeta)] {
        if !invariance_verdict(vs, e, oracle)?.holds {
            return Err(Error::NotInvariant(format!("{name} invariant {}", space.render(e))));
        }
    }
    let mut chain = InvariantChain { base: eta.clone(), seed: zeta.clone(), generated: Vec::new(), verdicts: Vec::new() };
    let mut current = zeta.clone();
    for order in zeta.jet_order().max(eta.jet_order()) + 1..=target {
        let next = ibdp_step(eta, &current, space, oracle)?;
        let verdict = invariance_verdict(vs, &next, oracle)?;
        if !verdict.holds {
            let witness = verdict.failure.as_ref().map(|f| witness_from(&f.point, Some(space))).unwrap_or_default();
            return Err(Error::IbdpViolation { order, residual: verdict.max_abs, witness });
        }
        chain.generated.push(next.clone());
        chain.verdicts.push(verdict);
        current = next;
    }
    Ok(chain)
}

/// Reduced equation in invariant coordinates `y = η`, `w = ζ`.
#[derive(Clone, Debug)]
pub struct ReductionResult {
    /// Equation `w_(N−1) = h(y, w, …, w_(N−2))` on the space with coordinates `(y, w)`.
    pub reduced: DiffEq,
    pub y: Expr,
    pub w: Expr,
    /// `substitution[j]` expresses `w_(j)` on the original jet space.
    pub substitution: Vec<Expr>,
    /// Residual of the pullback of the reduced equation, restricted to the original one.
    pub pullback: Verdict,
}

fn aux(k: u32) -> Symbol {
    Symbol::Aux(k)
}

/// Solve `target = value` for `s`, requiring `target` to be affine in `s`.
fn solve_affine(target: &Expr, value: &Expr, s: &Symbol, oracle: &Oracle) -> Result<Option<Expr>> {
    let slope = target.partial(s);
    if slope.is_zero() || oracle.is_zero(&slope)? {
        return Ok(None);
    }
    if slope.contains(s) && !oracle.is_zero(&slope.partial(s))? {
        return Ok(None);
    }
    let offset = target.substitute_one(s, &Expr::zero());
    Ok(Some(&(value - &offset) / &slope))
}

/// Reduce a scalar ODE of order `N ≥ 2` with invariants `η` (order 0) and
/// `ζ` (order 1) to an equation of order `N − 1` in `(y, w)`.
///
/// The chain `ζ_(j)` is built by differentiation, `ζ_(N)` is restricted to the
/// solution manifold, and the jet coordinates are then eliminated top-down by
/// solving `ζ_(j) = w_(j−1)` for `u_(j)`.
pub fn reduce_ode(eq: &DiffEq, eta: &Expr, zeta: &Expr, oracle: &Oracle) -> Result<ReductionResult> {
    let space = eq.space();
    if space.n() != 1 || space.m() != 1 || eq.leads().len() != 1 {
        return Err(Error::Precondition("reduction needs a scalar ODE".into()));
    }
    let order = eq.order();
    if order < 2 {
        return Err(Error::Precondition("reduction needs order at least 2".into()));
    }
    if eta.jet_order() != 0 || zeta.jet_order() != 1 {
        return Err(Error::Precondition("need an order-0 and an order-1 invariant".into()));
    }
    let mut chain = vec![zeta.clone()];
    for _ in 1..order {
        let next = ibdp_step(eta, chain.last().unwrap(), space, oracle)?;
        chain.push(next);
    }
    // chain[j - 1] = ζ_(j)
    let mut h = eq.restrict(&chain[order - 1])?;
    for j in (1..order).rev() {
        let uj = Symbol::jet(0, MultiIndex::ode(j));
        let w = Expr::symbol(aux(j as u32));
        let value = solve_affine(&chain[j - 1], &w, &uj, oracle)?.ok_or_else(|| {
            Error::NonGenericChain(format!("invariant of order {j} is not affine in {}", space.symbol_name(&uj)))
        })?;
        h = h.substitute_one(&uj, &value);
    }
    let y = Expr::symbol(aux(0));
    let x_sym = Symbol::Indep(0);
    let u_sym = Symbol::jet(0, MultiIndex::ode(0));
    let (eliminated, remaining) = match solve_affine(eta, &y, &x_sym, oracle)? {
        Some(v) => ((x_sym, v), u_sym),
        None => match solve_affine(eta, &y, &u_sym, oracle)? {
            Some(v) => ((u_sym, v), x_sym),
            None => return Err(Error::NonGenericChain("base invariant is affine in neither x nor u".into())),
        },
    };
    h = h.substitute_one(&eliminated.0, &eliminated.1);
    if h.contains(&remaining) {
        let dh = h.partial(&remaining);
        let verdict = oracle.check_zero(std::slice::from_ref(&dh))?;
        if !verdict.holds {
            let witness = verdict.failure.map(|f| witness_from(&f.point, None)).unwrap_or_default();
            return Err(Error::NotExpressible {
                detail: format!("depends on {}", space.symbol_name(&remaining)),
                witness,
            });
        }
        h = fix_symbol(&h, &remaining, oracle)?;
    }

    let reduced_space = JetSpace::new(&["y"], &["w"], order - 1)?;
    let mut to_reduced = HashMap::new();
    to_reduced.insert(aux(0), reduced_space.x(0));
    for j in 1..order {
        to_reduced.insert(aux(j as u32), reduced_space.ode_jet(0, j - 1));
    }
    let h_reduced = h.substitute(&to_reduced).expand();
    let reduced = DiffEq::new(&reduced_space, vec![(0, MultiIndex::ode(order - 1))], vec![h_reduced.clone()])?;

    let mut to_original = HashMap::new();
    to_original.insert(Symbol::Indep(0), eta.clone());
    for j in 0..order - 1 {
        to_original.insert(Symbol::jet(0, MultiIndex::ode(j)), chain[j].clone());
    }
    let pulled = h_reduced.substitute(&to_original);
    let residual = eq.restrict(&(&chain[order - 1] - &pulled))?;
    let pullback = oracle.with_trials(oracle.trials.max(100)).check_zero(&[residual])?;
    if !pullback.holds {
        let witness = pullback.failure.as_ref().map(|f| witness_from(&f.point, Some(space))).unwrap_or_default();
        return Err(Error::NotExpressible { detail: "pullback does not vanish on solutions".into(), witness });
    }
    Ok(ReductionResult {
        reduced,
        y: eta.clone(),
        w: zeta.clone(),
        substitution: chain[..order - 1].to_vec(),
        pullback,
    })
}

/// Replace a symbol the expression does not depend on by a constant at which
/// the expression is still defined.
fn fix_symbol(h: &Expr, s: &Symbol, oracle: &Oracle) -> Result<Expr> {
    for (p, q) in [(1, 1), (1, 2), (3, 2), (-1, 1), (2, 3), (-1, 2)] {
        let c = Expr::constant(Rational::new(p.into(), q.into()));
        let fixed = h.substitute_one(s, &c);
        if let Ok(v) = oracle.check_pairs(&[(h.clone(), fixed.clone())]) {
            if v.holds {
                return Ok(fixed);
            }
        }
    }
    Err(Error::NotExpressible { detail: "no admissible constant for an absent variable".into(), witness: Vec::new() })
}

/// Cumulative integral `v(y) = v(y_0) + ∫ w dy` of sampled data.
///
/// Each interval is integrated exactly against the quadratic through it and
/// a neighbouring node, which reduces to Simpson's rule on uniform grids and
/// also handles nonuniform ones.
pub fn reconstruct(samples: &[(f64, f64)], initial: f64) -> Result<Vec<(f64, f64)>> {
    if samples.iter().any(|(y, w)| !y.is_finite() || !w.is_finite()) || !initial.is_finite() {
        return Err(Error::NonFinite);
    }
    if samples.windows(2).any(|p| p[1].0 <= p[0].0) {
        return Err(Error::Precondition("grid must be strictly increasing".into()));
    }
    let mut out = Vec::with_capacity(samples.len());
    let mut v = initial;
    if let Some(first) = samples.first() {
        out.push((first.0, v));
    }
    for i in 0..samples.len().saturating_sub(1) {
        let (y0, w0) = samples[i];
        let (y1, w1) = samples[i + 1];
        let h = y1 - y0;
        let third = if i + 2 < samples.len() {
            Some(samples[i + 2])
        } else if i >= 1 {
            Some(samples[i - 1])
        } else {
            None
        };
        let piece = match third {
            None => 0.5 * h * (w0 + w1),
            Some((y2, w2)) => {
                let d = y2 - y0;
                let c = (h * (w2 - w0) - d * (w1 - w0)) / (h * d * (d - h));
                let b = ((w1 - w0) - c * h * h) / h;
                w0 * h + b * h * h / 2.0 + c * h * h * h / 3.0
            }
        };
        v += piece;
        out.push((y1, v));
    }
    Ok(out)
}

/// Classical fourth-order Runge–Kutta solve of a scalar ODE in solved form.
/// `initial` holds `(u, u_(1), …, u_(N−1))` at `x0`; returns `(x, u)` samples.
pub fn integrate_scalar_ode(eq: &DiffEq, x0: f64, initial: &[f64], x_end: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
    let space = eq.space();
    let order = eq.order();
    if space.n() != 1 || space.m() != 1 || initial.len() != order {
        return Err(Error::Precondition("need a scalar ODE and one initial value per lower order".into()));
    }
    let rhs = eq.rhs()[0].clone();
    let syms: Vec<Symbol> = (0..order).map(|j| Symbol::jet(0, MultiIndex::ode(j))).collect();
    let params: Vec<Symbol> = rhs.free_symbols().into_iter().filter(|s| matches!(s, Symbol::Param(_))).collect();
    if !params.is_empty() {
        return Err(Error::Precondition("equation has unbound parameters".into()));
    }
    let field = |x: f64, state: &[f64]| -> Result<Vec<f64>> {
        let mut p = EvalPoint::new();
        p.insert(Symbol::Indep(0), x);
        for (s, v) in syms.iter().zip(state) {
            p.insert(s.clone(), *v);
        }
        let top = rhs.eval(&p).map_err(|_| Error::NonFinite)?;
        let mut d: Vec<f64> = state[1..].to_vec();
        d.push(top);
        Ok(d)
    };
    let h = (x_end - x0) / steps as f64;
    let mut state = initial.to_vec();
    let mut out = vec![(x0, state[0])];
    let axpy = |s: &[f64], k: &[f64], a: f64| -> Vec<f64> { s.iter().zip(k).map(|(u, d)| u + a * d).collect() };
    for step in 0..steps {
        let x = x0 + step as f64 * h;
        let k1 = field(x, &state)?;
        let k2 = field(x + h / 2.0, &axpy(&state, &k1, h / 2.0))?;
        let k3 = field(x + h / 2.0, &axpy(&state, &k2, h / 2.0))?;
        let k4 = field(x + h, &axpy(&state, &k3, h))?;
        for i in 0..state.len() {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push((x0 + (step + 1) as f64 * h, state[0]));
    }
    Ok(out)
}

/// Rank of the Jacobian of `exprs` with respect to `coords` at sample points.
pub fn jacobian_ranks(exprs: &[Expr], coords: &[Symbol], oracle: &Oracle, count: usize) -> Result<Vec<usize>> {
    let jac: Vec<Vec<Expr>> = exprs.iter().map(|e| coords.iter().map(|c| e.partial(c)).collect()).collect();
    let flat: Vec<Expr> = jac.iter().flatten().cloned().collect();
    let points = oracle.sample_points(&flat, coords, count)?;
    Ok(points
        .iter()
        .map(|p| {
            let m = DMatrix::from_fn(exprs.len(), coords.len(), |i, j| jac[i][j].eval(p).unwrap_or(0.0));
            linalg::numeric_rank(&m, 1e-9)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VectorField;
    use crate::prolong::{prolong_lambda, prolong_standard};

    fn ode(k: usize) -> JetSpace {
        JetSpace::new(&["x"], &["u"], k).unwrap()
    }

    #[test]
    fn invariance_examples() {
        let s = ode(1);
        let o = Oracle::default();
        let du = VectorField::parse(&s, &["0"], &["1"]).unwrap();
        let v = prolong_standard(&du, 1, &s).unwrap();
        assert!(is_invariant(std::slice::from_ref(&v), &s.x(0), &o).unwrap());
        assert!(!is_invariant(std::slice::from_ref(&v), &s.u(0), &o).unwrap());
        let vl = prolong_lambda(&du, &s.parse("u_x").unwrap(), 1, &s).unwrap();
        assert!(is_invariant(&[vl], &s.parse("u_x*exp(-u)").unwrap(), &o).unwrap());
    }

    #[test]
    fn ibdp_step_examples() {
        let s = ode(2);
        let o = Oracle::default();
        assert_eq!(ibdp_step(&s.x(0), &s.u(0), &s, &o).unwrap(), s.ode_jet(0, 1));
        let step = ibdp_step(&s.x(0), &s.parse("u_x*exp(-u)").unwrap(), &s, &o).unwrap();
        assert!(o.equal(&step, &s.parse("(u_xx - u_x^2)*exp(-u)").unwrap()).unwrap());
        let inv = ibdp_step(&s.u(0), &s.x(0), &s, &o).unwrap();
        assert_eq!(inv, s.parse("1/u_x").unwrap());
        let c = Expr::integer(3);
        assert!(matches!(ibdp_step(&c, &s.x(0), &s, &o), Err(Error::DegenerateBase)));
    }

    #[test]
    fn standard_chain() {
        let s = ode(3);
        let o = Oracle::default();
        let du = VectorField::parse(&s, &["0"], &["1"]).unwrap();
        let v = prolong_standard(&du, 3, &s).unwrap();
        let chain = generate_invariant_chain(&[v], &s.x(0), &s.ode_jet(0, 1), 3, &s, &o).unwrap();
        assert_eq!(chain.generated, vec![s.ode_jet(0, 2), s.ode_jet(0, 3)]);
    }

    #[test]
    fn reductions() {
        let s = ode(2);
        let o = Oracle::default();
        let eq = DiffEq::parse(&s, &[("u_xx", "u_x")]).unwrap();
        let r = reduce_ode(&eq, &s.x(0), &s.ode_jet(0, 1), &o).unwrap();
        assert_eq!(r.reduced.rhs()[0], r.reduced.space().u(0));
        let eq = DiffEq::parse(&s, &[("u_xx", "u_x^2 + u_x")]).unwrap();
        let r = reduce_ode(&eq, &s.x(0), &s.parse("u_x*exp(-u)").unwrap(), &o).unwrap();
        assert_eq!(r.reduced.rhs()[0], r.reduced.space().u(0));
        let eq = DiffEq::parse(&s, &[("u_xx", "0")]).unwrap();
        let r = reduce_ode(&eq, &s.x(0), &s.ode_jet(0, 1), &o).unwrap();
        assert!(r.reduced.rhs()[0].is_zero());
    }

    #[test]
    fn reduction_with_wrong_invariant_is_not_expressible() {
        let s = ode(2);
        let eq = DiffEq::parse(&s, &[("u_xx", "u_x + u")]).unwrap();
        assert!(matches!(
            reduce_ode(&eq, &s.x(0), &s.ode_jet(0, 1), &Oracle::default()),
            Err(Error::NotExpressible { .. })
        ));
    }

    #[test]
    fn reconstruct_examples() {
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let zero: Vec<(f64, f64)> = grid.iter().map(|&y| (y, 0.0)).collect();
        assert!(reconstruct(&zero, 2.5).unwrap().iter().all(|(_, v)| *v == 2.5));
        let one: Vec<(f64, f64)> = grid.iter().map(|&y| (y, 1.0)).collect();
        assert!(reconstruct(&one, 0.0).unwrap().iter().all(|(y, v)| (v - y).abs() < 1e-12));
        let exp: Vec<(f64, f64)> = grid.iter().map(|&y| (y, y.exp())).collect();
        let v = reconstruct(&exp, 1.0).unwrap();
        assert!((v.last().unwrap().1 - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn reconstruct_on_nonuniform_grid() {
        let grid: Vec<f64> = (0..=400).map(|i| (i as f64 / 400.0).powi(2)).collect();
        let samples: Vec<(f64, f64)> = grid.iter().map(|&y| (y, y.cos())).collect();
        let v = reconstruct(&samples, 0.0).unwrap();
        assert!((v.last().unwrap().1 - 1f64.sin()).abs() < 1e-8);
    }
}
