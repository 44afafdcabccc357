//! Prolongation against a purely numerical route: flow the graph of a known
//! function along the field, differentiate the transformed function by finite
//! differences in x and in the flow parameter, and compare with ψ_k − ξ u_{k+1}.

use jetsym::corpus::{self, random_field};
use jetsym::expr::EvalPoint;
use jetsym::prolong::prolong_standard;
use jetsym::{Expr, JetSpace, MultiIndex, Symbol, VectorField};

fn graph(x: f64) -> f64 {
    x.sin() + 0.3 * x * x
}

fn graph_derivative(x: f64, k: usize) -> f64 {
    match k {
        0 => graph(x),
        1 => x.cos() + 0.6 * x,
        2 => -x.sin() + 0.6,
        3 => -x.cos(),
        _ => unreachable!(),
    }
}

fn field_at(xi: &Expr, phi: &Expr, x: f64, u: f64) -> (f64, f64) {
    let mut p = EvalPoint::new();
    p.insert(Symbol::Indep(0), x);
    p.insert(Symbol::jet(0, MultiIndex::ode(0)), u);
    (xi.eval(&p).unwrap(), phi.eval(&p).unwrap())
}

/// Time-`eps` flow by RK4.
fn flow(xi: &Expr, phi: &Expr, mut x: f64, mut u: f64, eps: f64) -> (f64, f64) {
    let steps = 40;
    let h = eps / steps as f64;
    for _ in 0..steps {
        let k1 = field_at(xi, phi, x, u);
        let k2 = field_at(xi, phi, x + h / 2.0 * k1.0, u + h / 2.0 * k1.1);
        let k3 = field_at(xi, phi, x + h / 2.0 * k2.0, u + h / 2.0 * k2.1);
        let k4 = field_at(xi, phi, x + h * k3.0, u + h * k3.1);
        x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        u += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (x, u)
}

/// Value at `x0` of the transformed graph, locating the preimage by Newton.
fn transformed(xi: &Expr, phi: &Expr, x0: f64, eps: f64) -> f64 {
    let mut s = x0;
    for _ in 0..50 {
        let f = flow(xi, phi, s, graph(s), eps).0 - x0;
        let d = 1e-7;
        let df = (flow(xi, phi, s + d, graph(s + d), eps).0 - flow(xi, phi, s - d, graph(s - d), eps).0) / (2.0 * d);
        let step = f / df;
        s -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    flow(xi, phi, s, graph(s), eps).1
}

/// Five-point stencils for the first two derivatives.
fn x_derivative(g: impl Fn(f64) -> f64, x0: f64, k: usize) -> f64 {
    let h = 1e-2;
    let v = [g(x0 - 2.0 * h), g(x0 - h), g(x0), g(x0 + h), g(x0 + 2.0 * h)];
    match k {
        0 => v[2],
        1 => (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h),
        2 => (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h),
        _ => unreachable!(),
    }
}

#[test]
fn prolongation_matches_numerical_flow() {
    let s = JetSpace::new(&["x"], &["u"], 3).unwrap();
    let mut rng = corpus::rng(11, 0);
    let mut fields: Vec<VectorField> = vec![VectorField::parse(&s, &["u"], &["-x"]).unwrap()];
    for _ in 0..3 {
        let f = random_field(&s, 2, &mut rng).unwrap();
        // keep flows tame on the test window
        fields.push(f.scale(&Expr::rational(1, 4)));
    }
    for (n, x) in fields.iter().enumerate() {
        let pr = prolong_standard(x, 2, &s).unwrap();
        let (xi, phi) = (x.xi()[0].clone(), x.phi()[0].clone());
        for x0 in [-0.4, 0.1, 0.5] {
            let mut p = EvalPoint::new();
            p.insert(Symbol::Indep(0), x0);
            for k in 0..=3 {
                p.insert(Symbol::jet(0, MultiIndex::ode(k)), graph_derivative(x0, k));
            }
            let xi0 = xi.eval(&p).unwrap();
            for k in 0..=2 {
                let eps = 1e-3;
                let plus = x_derivative(|t| transformed(&xi, &phi, t, eps), x0, k);
                let minus = x_derivative(|t| transformed(&xi, &phi, t, -eps), x0, k);
                let numeric = (plus - minus) / (2.0 * eps);
                let symbolic = pr.psi(0, &MultiIndex::ode(k)).eval(&p).unwrap() - xi0 * graph_derivative(x0, k + 1);
                let err = (numeric - symbolic).abs() / (1.0 + symbolic.abs());
                assert!(err < 1e-4, "field {n}, x0 = {x0}, order {k}: flow {numeric}, formula {symbolic}");
            }
        }
    }
}
