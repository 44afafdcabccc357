//! Seeded random instances: polynomial fields, invertible gauge matrices,
//! twists and expression trees.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::expr::{rat, Expr};
use crate::field::VectorField;
use crate::jet::{JetSpace, MultiIndex};
use crate::matrix::Matrix;

/// RNG for stream `stream` of `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `(x^i, u^a)` as expressions.
pub fn base_coordinates(space: &JetSpace) -> Vec<Expr> {
    let mut out: Vec<Expr> = (0..space.n()).map(|i| space.x(i)).collect();
    out.extend((0..space.m()).map(|a| space.u(a)));
    out
}

/// All monomials in `vars` of total degree at most `degree`, constant first.
pub fn monomials(vars: &[Expr], degree: usize) -> Vec<Expr> {
    let mut out = vec![Expr::one()];
    let mut last = vec![(Expr::one(), 0usize)];
    for _ in 0..degree {
        let mut next = Vec::new();
        for (m, start) in &last {
            for (i, v) in vars.iter().enumerate().skip(*start) {
                next.push((m * v, i));
            }
        }
        out.extend(next.iter().map(|p| p.0.clone()));
        last = next;
    }
    out
}

/// Integer coefficients in `[-3, 3]`, each monomial kept with probability 0.6.
pub fn random_polynomial(vars: &[Expr], degree: usize, rng: &mut ChaCha8Rng) -> Expr {
    let terms: Vec<Expr> = monomials(vars, degree)
        .into_iter()
        .filter_map(|m| {
            if rng.random_bool(0.6) {
                let c: i64 = rng.random_range(-3..=3);
                (c != 0).then(|| &Expr::integer(c) * &m)
            } else {
                None
            }
        })
        .collect();
    Expr::sum(terms)
}

/// Random polynomial field on the base of degree at most `degree`.
pub fn random_field(space: &JetSpace, degree: usize, rng: &mut ChaCha8Rng) -> Result<VectorField> {
    let vars = base_coordinates(space);
    let xi = (0..space.n()).map(|_| random_polynomial(&vars, degree, rng)).collect();
    let phi = (0..space.m()).map(|_| random_polynomial(&vars, degree, rng)).collect();
    VectorField::new(space, xi, phi)
}

pub fn random_vertical_field(space: &JetSpace, degree: usize, rng: &mut ChaCha8Rng) -> Result<VectorField> {
    let vars = base_coordinates(space);
    loop {
        let phi: Vec<Expr> = (0..space.m()).map(|_| random_polynomial(&vars, degree, rng)).collect();
        if phi.iter().any(|p| !p.is_zero()) {
            return VectorField::vertical(space, phi);
        }
    }
}

/// `q × q` matrix `L·U` with `L` unit lower triangular (small integer entries)
/// and `U` upper triangular with diagonal `1 + a v² + b w²` and random
/// polynomial entries above it. Entries have degree at most 2 and the
/// determinant is at least 1 everywhere.
pub fn random_invertible_matrix(q: usize, vars: &[Expr], rng: &mut ChaCha8Rng) -> Matrix {
    let mut lower = Matrix::identity(q);
    let mut upper = Matrix::zeros(q, q);
    let halves = [rat(1, 2), rat(1, 1), rat(2, 1)];
    for r in 0..q {
        for c in 0..q {
            if r > c {
                lower.set(r, c, Expr::integer(rng.random_range(-2..=2)));
            } else if r == c {
                let mut terms = vec![Expr::one()];
                for _ in 0..2 {
                    let v = vars.choose(rng).expect("nonempty variables");
                    let a = Expr::constant(halves.choose(rng).unwrap().clone());
                    terms.push(&a * &v.powi(2));
                }
                upper.set(r, c, Expr::sum(terms));
            } else {
                upper.set(r, c, random_polynomial(vars, 2, rng));
            }
        }
    }
    lower.mul(&upper).expect("square factors").expand()
}

/// Nonzero twists on `J¹` of a scalar ODE space.
pub fn lambda_corpus(space: &JetSpace) -> Vec<Expr> {
    ["u_x", "x*u_x", "sin(u)", "u", "1 + x^2", "u_x^2 - x", "exp(x)*u"]
        .iter()
        .map(|t| space.parse(t).expect("corpus twist parses on (x, u)"))
        .collect()
}

/// Random expression tree of depth at most `depth` over `vars`.
pub fn random_expr(vars: &[Expr], depth: usize, rng: &mut ChaCha8Rng) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.7) {
            vars.choose(rng).unwrap().clone()
        } else {
            Expr::rational(rng.random_range(-5..=5), rng.random_range(1..=4))
        };
    }
    let a = random_expr(vars, depth - 1, rng);
    match rng.random_range(0..9) {
        0 | 1 => &a + &random_expr(vars, depth - 1, rng),
        2 | 3 => &a * &random_expr(vars, depth - 1, rng),
        4 => &a - &random_expr(vars, depth - 1, rng),
        5 => a.powi(rng.random_range(2..=3)),
        6 => a.sin(),
        7 => (&a * &Expr::rational(1, 4)).exp(),
        _ => (&Expr::one() + &a.powi(2)).log(),
    }
}

/// Every jet coordinate of the space up to `order`, as expressions.
pub fn jet_coordinates(space: &JetSpace, order: usize) -> Vec<Expr> {
    let mut out: Vec<Expr> = (0..space.n()).map(|i| space.x(i)).collect();
    for idx in MultiIndex::all_up_to(space.n(), order) {
        for a in 0..space.m() {
            out.push(space.jet(a, &idx));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;

    #[test]
    fn monomial_count() {
        let s = JetSpace::new(&["x"], &["u", "v"], 1).unwrap();
        assert_eq!(monomials(&base_coordinates(&s), 2).len(), 10);
    }

    #[test]
    fn invertible_matrices_have_large_determinant() {
        let s = JetSpace::new(&["x"], &["u"], 1).unwrap();
        let vars = base_coordinates(&s);
        let o = Oracle::default();
        for seed in 0..5 {
            let a = random_invertible_matrix(3, &vars, &mut rng(seed, 0));
            let det = a.det().unwrap();
            for p in o.sample_points(std::slice::from_ref(&det), &[], 20).unwrap() {
                assert!(det.eval(&p).unwrap() >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn corpus_is_seed_deterministic() {
        let s = JetSpace::new(&["x"], &["u"], 1).unwrap();
        let a = random_field(&s, 2, &mut rng(7, 3)).unwrap();
        let b = random_field(&s, 2, &mut rng(7, 3)).unwrap();
        assert_eq!(a, b);
    }
}
