//! Gauge correspondences between twisted and standard prolongations.
//!
//! For an invertible matrix function `A` on the base, multiplying twisted
//! prolongation coefficients by `A` yields standard prolongation
//! coefficients of the transformed field(s). The twist that makes this work
//! is the logarithmic derivative `A⁻¹ D A` in both the μ and σ settings.

use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol};
use crate::field::{ProlongedField, VectorField};
use crate::jet::{JetSpace, MultiIndex};
use crate::matrix::Matrix;
use crate::oracle::{Oracle, Verdict};
use crate::prolong::{prolong_mu, prolong_sigma, prolong_standard, MchPolicy, TwistData};

/// Coefficientwise residuals of a gauge diagram, with their oracle verdict.
#[derive(Clone, Debug)]
pub struct DiagramReport {
    /// Human-readable coordinate of each residual, e.g. `u_xx` or `Z2.u_x`.
    pub labels: Vec<String>,
    pub residuals: Vec<Expr>,
    pub verdict: Verdict,
}

fn check_on_base(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::SizeMismatch("gauge matrix must be square".into()));
    }
    if a.entries().iter().any(|e| e.jet_order() > 0) {
        return Err(Error::InvalidTwist("gauge matrix must depend on base coordinates only".into()));
    }
    Ok(())
}

/// Require `|det A| > 1e-10` at every oracle sample.
pub fn certify_invertible(a: &Matrix, oracle: &Oracle) -> Result<()> {
    let det = a.det()?;
    if let Some(c) = det.as_const() {
        return if num_traits::Zero::is_zero(c) { Err(Error::SingularAtSample) } else { Ok(()) };
    }
    let points = oracle.sample_points(std::slice::from_ref(&det), &[], oracle.trials)?;
    for p in &points {
        match det.eval(p) {
            Ok(v) if v.abs() > 1e-10 => {}
            _ => return Err(Error::SingularAtSample),
        }
    }
    Ok(())
}

/// `A⁻¹ D_i A` for every independent variable.
fn log_derivatives(a: &Matrix, space: &JetSpace, directions: usize) -> Result<Vec<Matrix>> {
    let inv = a.inverse()?;
    (0..directions)
        .map(|i| Ok(inv.mul(&a.total_derivative(space, i)?)?.expand()))
        .collect()
}

/// Connection `Λ_i = A⁻¹ D_i A` of a pure gauge, one matrix per direction.
pub fn mu_from_gauge(a: &Matrix, space: &JetSpace, oracle: &Oracle) -> Result<TwistData> {
    check_on_base(a)?;
    if a.rows() != space.m() {
        return Err(Error::SizeMismatch(format!("gauge matrix must be {0}x{0}", space.m())));
    }
    certify_invertible(a, oracle)?;
    Ok(TwistData::Mu(log_derivatives(a, space, space.n())?))
}

/// `σ = A⁻¹ D_x A` for an `r × r` gauge on a one-variable base.
pub fn sigma_from_gauge(a: &Matrix, space: &JetSpace, oracle: &Oracle) -> Result<TwistData> {
    check_on_base(a)?;
    if space.n() != 1 {
        return Err(Error::InvalidTwist("σ needs one independent variable".into()));
    }
    certify_invertible(a, oracle)?;
    Ok(TwistData::Sigma(log_derivatives(a, space, 1)?.pop().unwrap()))
}

/// `A ψ_J − ψ̃_J` for every `(a, J)` with `|J| ≤ k`, where `ψ` is the μ-prolongation
/// of the vertical field `X` with twist `mu_from_gauge(A)` and `ψ̃` is the standard
/// prolongation of the vertical field with characteristic `A Q`.
pub fn verify_gauge_diagram_mu(
    x: &VectorField,
    a: &Matrix,
    k: usize,
    space: &JetSpace,
    oracle: &Oracle,
) -> Result<DiagramReport> {
    if !x.is_vertical() {
        return Err(Error::NonVerticalInput);
    }
    let TwistData::Mu(lams) = mu_from_gauge(a, space, oracle)? else { unreachable!() };
    let twisted = prolong_mu(x, &lams, k, space, MchPolicy::Unchecked)?;
    let transformed = VectorField::vertical(space, a.apply(x.phi())?)?;
    let standard = prolong_standard(&transformed, k, space)?;
    let mut labels = Vec::new();
    let mut residuals = Vec::new();
    for idx in MultiIndex::all_up_to(space.n(), k) {
        let column: Vec<Expr> = (0..space.m()).map(|b| twisted.psi(b, &idx)).collect();
        let gauged = a.apply(&column)?;
        for (comp, g) in gauged.into_iter().enumerate() {
            labels.push(space.symbol_name(&Symbol::jet(comp, idx.clone())));
            residuals.push(&g - &standard.psi(comp, &idx));
        }
    }
    let verdict = oracle.check_zero(&residuals)?;
    Ok(DiagramReport { labels, residuals, verdict })
}

/// `Z_α − A_α^β Y_β` coefficientwise, where `Y` are the σ-prolongations of
/// `Xs` with `σ = sigma_from_gauge(A)` and `Z_α` is the standard prolongation
/// of `A_α^β X_β`.
pub fn verify_gauge_diagram_sigma(
    xs: &[VectorField],
    a: &Matrix,
    k: usize,
    space: &JetSpace,
    oracle: &Oracle,
) -> Result<DiagramReport> {
    if a.rows() != xs.len() {
        return Err(Error::SizeMismatch(format!("gauge matrix must be {0}x{0}", xs.len())));
    }
    let TwistData::Sigma(sigma) = sigma_from_gauge(a, space, oracle)? else { unreachable!() };
    let ys = prolong_sigma(xs, &sigma, k, space)?;
    let r = xs.len();
    let mut labels = Vec::new();
    let mut residuals = Vec::new();
    for alpha in 0..r {
        let row: Vec<Expr> = (0..r).map(|b| a.get(alpha, b).clone()).collect();
        let z = prolong_standard(&VectorField::combination(space, &row, xs), k, space)?;
        let mixed = ProlongedField::combination(&row, &ys)?;
        let diff = z.sub(&mixed)?;
        for (sym, c) in diff.coefficients() {
            labels.push(format!("Z{}.{}", alpha + 1, space.symbol_name(&sym)));
            residuals.push(c);
        }
    }
    let verdict = oracle.check_zero(&residuals)?;
    Ok(DiagramReport { labels, residuals, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prolong::{check_mch, prolong_lambda};

    fn space(m: usize, k: usize) -> JetSpace {
        let deps = ["u", "v"];
        JetSpace::new(&["x"], &deps[..m], k).unwrap()
    }

    fn mu(t: TwistData) -> Vec<Matrix> {
        match t {
            TwistData::Mu(l) => l,
            _ => panic!("expected μ"),
        }
    }

    #[test]
    fn mu_from_gauge_examples() {
        let s = space(1, 2);
        let o = Oracle::default();
        assert!(mu(mu_from_gauge(&Matrix::identity(1), &s, &o).unwrap())[0].get(0, 0).is_zero());
        let ex = Matrix::scalar(s.parse("exp(x)").unwrap());
        assert!(mu(mu_from_gauge(&ex, &s, &o).unwrap())[0].get(0, 0).is_one());
        let au = Matrix::scalar(s.u(0));
        let l = mu(mu_from_gauge(&au, &s, &o).unwrap());
        assert!(o.equal(l[0].get(0, 0), &s.parse("u_x/u").unwrap()).unwrap());
    }

    #[test]
    fn sigma_from_gauge_examples() {
        let s = space(1, 2);
        let o = Oracle::default();
        let sig = |a: &Matrix| match sigma_from_gauge(a, &s, &o).unwrap() {
            TwistData::Sigma(m) => m,
            _ => unreachable!(),
        };
        assert!(sig(&Matrix::identity(2)).entries().iter().all(Expr::is_zero));
        assert!(sig(&Matrix::scalar(s.parse("exp(x)").unwrap())).get(0, 0).is_one());
        assert!(sig(&Matrix::from_i64(&[&[1, 2], &[0, 3]])).entries().iter().all(Expr::is_zero));
    }

    #[test]
    fn singular_gauge_is_rejected() {
        let s = space(2, 1);
        let a = Matrix::from_rows(vec![vec![s.u(0), s.u(0)], vec![s.x(0), s.x(0)]]).unwrap();
        assert!(matches!(mu_from_gauge(&a, &s, &Oracle::default()), Err(Error::SingularAtSample)));
    }

    #[test]
    fn pure_gauge_is_flat() {
        let s = JetSpace::new(&["x", "y"], &["u", "v"], 2).unwrap();
        let a = Matrix::from_rows(vec![
            vec![s.parse("1 + x^2").unwrap(), s.parse("x*u").unwrap()],
            vec![s.parse("y").unwrap(), s.parse("1 + v^2 + x*y*u").unwrap()],
        ])
        .unwrap();
        let o = Oracle::default();
        let lams = mu(mu_from_gauge(&a, &s, &o).unwrap());
        for r in check_mch(&lams, &s).unwrap() {
            assert!(o.check_zero(r.residual.entries()).unwrap().holds);
        }
    }

    #[test]
    fn mu_diagram_commutes() {
        let s = space(1, 3);
        let o = Oracle::default();
        let x = VectorField::parse(&s, &["0"], &["x*u^2 - 3*u + x"]).unwrap();
        let a = Matrix::scalar(s.parse("exp(x)").unwrap());
        assert!(verify_gauge_diagram_mu(&x, &a, 3, &s, &o).unwrap().verdict.holds);
        let s2 = space(2, 2);
        let x2 = VectorField::parse(&s2, &["0"], &["u*v", "x + u"]).unwrap();
        let a2 = Matrix::from_rows(vec![
            vec![s2.parse("1 + x^2").unwrap(), s2.parse("u").unwrap()],
            vec![Expr::zero(), s2.parse("2 + v^2").unwrap()],
        ])
        .unwrap();
        assert!(verify_gauge_diagram_mu(&x2, &a2, 2, &s2, &o).unwrap().verdict.holds);
    }

    #[test]
    fn non_vertical_mu_diagram_is_rejected() {
        let s = space(1, 2);
        let x = VectorField::parse(&s, &["1"], &["0"]).unwrap();
        let r = verify_gauge_diagram_mu(&x, &Matrix::identity(1), 2, &s, &Oracle::default());
        assert!(matches!(r, Err(Error::NonVerticalInput)));
    }

    #[test]
    fn sigma_diagram_commutes() {
        let s = space(1, 2);
        let o = Oracle::default();
        let xs = vec![
            VectorField::parse(&s, &["0"], &["1"]).unwrap(),
            VectorField::parse(&s, &["0"], &["u"]).unwrap(),
        ];
        let a = Matrix::from_rows(vec![
            vec![s.parse("1 + x^2").unwrap(), s.parse("x*u").unwrap()],
            vec![Expr::zero(), s.parse("1 + u^2").unwrap()],
        ])
        .unwrap();
        assert!(verify_gauge_diagram_sigma(&xs, &a, 2, &s, &o).unwrap().verdict.holds);
    }

    #[test]
    fn scalar_sigma_gauge_is_a_lambda_twist() {
        let s = space(1, 3);
        let o = Oracle::default();
        let a = s.parse("1 + x^2").unwrap();
        let x = VectorField::parse(&s, &["u"], &["x"]).unwrap();
        let sigma = match sigma_from_gauge(&Matrix::scalar(a.clone()), &s, &o).unwrap() {
            TwistData::Sigma(m) => m,
            _ => unreachable!(),
        };
        let lam = &s.total_derivative(&a, 0).unwrap() / &a;
        let ys = prolong_sigma(std::slice::from_ref(&x), &sigma, 3, &s).unwrap();
        let yl = prolong_lambda(&x, &lam, 3, &s).unwrap();
        assert!(ys[0].compare(&yl, &o).unwrap().holds);
        assert!(verify_gauge_diagram_sigma(&[x], &Matrix::scalar(a), 3, &s, &o).unwrap().verdict.holds);
    }
}
