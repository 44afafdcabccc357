//! Randomized invariants driven by proptest. Instances come from the seeded
//! corpus, so proptest only has to shrink a seed.

use jetsym::corpus::{self, base_coordinates, random_expr, random_field, random_invertible_matrix, random_polynomial};
use jetsym::gauge::{mu_from_gauge, verify_gauge_diagram_sigma};
use jetsym::invariants::reconstruct;
use jetsym::prolong::{check_mch, prolong_lambda, prolong_mu_along, prolong_standard, MchPolicy, PathRule, TwistData};
use jetsym::variational::{noether_flux, noether_identity_residual, Lagrangian};
use jetsym::{Expr, JetSpace, MultiIndex, Oracle};
use proptest::prelude::*;

fn scalar(k: usize) -> JetSpace {
    JetSpace::new(&["x"], &["u"], k).unwrap()
}

fn holds_or_domain(r: jetsym::Result<jetsym::oracle::Verdict>) -> bool {
    match r {
        Ok(v) => v.holds,
        Err(jetsym::Error::PersistentDomainFailure) => true,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>()) {
        let s = scalar(1);
        let e = random_expr(&[s.x(0), s.u(0), s.ode_jet(0, 1)], 5, &mut corpus::rng(seed, 0));
        let once = e.canonicalize();
        prop_assert_eq!(once.canonicalize(), once);
    }

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>()) {
        let s = scalar(1);
        let e = random_expr(&[s.x(0), s.u(0), s.ode_jet(0, 1)], 4, &mut corpus::rng(seed, 1));
        let back = s.parse(&s.render(&e)).unwrap();
        prop_assert!(holds_or_domain(Oracle::default().check_pairs(&[(e, back)])));
    }

    #[test]
    fn total_derivatives_commute(seed in any::<u64>()) {
        let s = JetSpace::new(&["x", "y"], &["u"], 3).unwrap();
        let vars = [s.x(0), s.x(1), s.u(0), s.jet(0, &MultiIndex::unit(2, 0))];
        let e = random_expr(&vars, 3, &mut corpus::rng(seed, 2));
        let a = s.total_derivative(&s.total_derivative(&e, 0).unwrap(), 1).unwrap();
        let b = s.total_derivative(&s.total_derivative(&e, 1).unwrap(), 0).unwrap();
        prop_assert!(holds_or_domain(Oracle::default().check_pairs(&[(a, b)])));
    }

    #[test]
    fn standard_prolongation_preserves_brackets(seed in any::<u64>()) {
        let s = JetSpace::new(&["x"], &["u", "v"], 3).unwrap();
        let mut rng = corpus::rng(seed, 3);
        let x = random_field(&s, 2, &mut rng).unwrap();
        let y = random_field(&s, 2, &mut rng).unwrap();
        let lhs = prolong_standard(&x, 3, &s).unwrap().commutator(&prolong_standard(&y, 3, &s).unwrap()).unwrap();
        let rhs = prolong_standard(&x.commutator(&y), 3, &s).unwrap();
        prop_assert!(lhs.compare(&rhs, &Oracle::default()).unwrap().holds);
    }

    #[test]
    fn lambda_prolongation_truncates(seed in any::<u64>(), pick in 0usize..7) {
        let s = scalar(3);
        let x = random_field(&s, 2, &mut corpus::rng(seed, 4)).unwrap();
        let lam = corpus::lambda_corpus(&s)[pick].clone();
        let high = prolong_lambda(&x, &lam, 3, &s).unwrap().truncate(2);
        let low = prolong_lambda(&x, &lam, 2, &s).unwrap();
        prop_assert!(high.compare(&low, &Oracle::default()).unwrap().holds);
    }

    #[test]
    fn pure_gauges_are_flat_and_path_independent(seed in any::<u64>()) {
        let s = JetSpace::new(&["x", "y"], &["u", "v"], 2).unwrap();
        let o = Oracle::default();
        let mut rng = corpus::rng(seed, 5);
        let a = random_invertible_matrix(2, &base_coordinates(&s), &mut rng);
        let TwistData::Mu(lams) = mu_from_gauge(&a, &s, &o).unwrap() else { unreachable!() };
        for r in check_mch(&lams, &s).unwrap() {
            prop_assert!(o.check_zero(r.residual.entries()).unwrap().holds);
        }
        let x = corpus::random_vertical_field(&s, 1, &mut rng).unwrap();
        let last = prolong_mu_along(&x, &lams, 2, &s, MchPolicy::Unchecked, PathRule::Last).unwrap();
        let first = prolong_mu_along(&x, &lams, 2, &s, MchPolicy::Unchecked, PathRule::First).unwrap();
        prop_assert!(last.compare(&first, &o).unwrap().holds);
    }

    #[test]
    fn sigma_gauge_diagram_commutes(seed in any::<u64>(), r in 1usize..=2) {
        let s = scalar(3);
        let mut rng = corpus::rng(seed, 6);
        let xs: Vec<_> = (0..r).map(|_| random_field(&s, 2, &mut rng).unwrap()).collect();
        let a = random_invertible_matrix(r, &base_coordinates(&s), &mut rng);
        let o = Oracle::default().with_tol(1e-8);
        prop_assert!(verify_gauge_diagram_sigma(&xs, &a, 3, &s, &o).unwrap().verdict.holds);
    }

    #[test]
    fn canonical_flux_satisfies_noether_identity(seed in any::<u64>(), pick in 0usize..8) {
        let s = scalar(2);
        let mut rng = corpus::rng(seed, 7);
        let l = Lagrangian::new(&s, random_polynomial(&[s.x(0), s.u(0), s.ode_jet(0, 1)], 3, &mut rng)).unwrap();
        let x = random_field(&s, 2, &mut rng).unwrap();
        let lam = if pick == 7 { Expr::zero() } else { corpus::lambda_corpus(&s)[pick].clone() };
        let f = noether_flux(&x, &lam, &l, &s).unwrap();
        let r = noether_identity_residual(&x, &lam, &l, &f, &s).unwrap();
        prop_assert!(holds_or_domain(Oracle::default().check_zero(&[r])));
    }

    #[test]
    fn quadrature_of_exponential(c in -2.0f64..2.0, v0 in -1.0f64..1.0) {
        let ws: Vec<(f64, f64)> = (0..=200).map(|i| { let y = i as f64 / 200.0; (y, c * y.exp()) }).collect();
        let vs = reconstruct(&ws, v0).unwrap();
        let (y, v) = *vs.last().unwrap();
        prop_assert!((v - (v0 + c * (y.exp() - 1.0))).abs() < 1e-6);
    }
}
