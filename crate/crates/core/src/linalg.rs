//! Floating-point linear algebra used for fitting and rank tests.

use nalgebra::DMatrix;
use num_bigint::BigInt;

use crate::expr::{Expr, Rational};

/// Nearest rational `p/q` with `q ≤ max_den` within `tol`, smallest `q` first.
pub fn rationalize(x: f64, max_den: i64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    for q in 1..=max_den {
        let p = (x * q as f64).round();
        if (x - p / q as f64).abs() <= tol {
            return Some(Rational::new(BigInt::from(p as i64), BigInt::from(q)));
        }
    }
    None
}

/// Exact rational if `x` is close to a small one, else its binary value.
pub fn to_constant(x: f64) -> (Expr, bool) {
    match rationalize(x, 12, 1e-6) {
        Some(r) => (Expr::constant(r), true),
        None => (Expr::constant(Rational::from_float(x).unwrap_or_default()), false),
    }
}

fn padded(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.nrows() >= a.ncols() {
        return a.clone();
    }
    let mut out = DMatrix::zeros(a.ncols(), a.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out
}

/// Singular values in decreasing order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = padded(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub fn numeric_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|v| **v > rel_tol * top).count()
}

/// Orthonormal basis (as columns) of the right null space of `a`.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let q = a.ncols();
    if a.nrows() == 0 || a.iter().all(|v| *v == 0.0) {
        return DMatrix::identity(q, q);
    }
    let svd = padded(a).svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.max();
    let cols: Vec<usize> = (0..q).filter(|&i| svd.singular_values[i] <= rel_tol * top).collect();
    let mut out = DMatrix::zeros(q, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        out.set_column(k, &vt.row(i).transpose());
    }
    out
}

/// Reduced row echelon form with partial pivoting.
pub fn rref(mut m: DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (piv, val) = (r..rows)
            .map(|i| (i, m[(i, c)].abs()))
            .fold((r, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if val <= tol {
            continue;
        }
        m.swap_rows(r, piv);
        let p = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        m[(i, j)] -= f * m[(r, j)];
                    }
                }
            }
        }
        r += 1;
    }
    for v in m.iter_mut() {
        if v.abs() <= tol {
            *v = 0.0;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalizes_small_fractions() {
        assert_eq!(rationalize(0.5000000001, 12, 1e-6), Some(crate::expr::rat(1, 2)));
        assert_eq!(rationalize(-2.0 / 3.0, 12, 1e-6), Some(crate::expr::rat(-2, 3)));
        assert_eq!(rationalize(std::f64::consts::PI, 12, 1e-6), None);
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let n = null_space(&a, 1e-8);
        assert_eq!(n.ncols(), 2);
        assert!((&a * &n).norm() < 1e-12);
        assert_eq!(numeric_rank(&a, 1e-8), 1);
    }

    #[test]
    fn rref_canonical_basis() {
        let m = DMatrix::from_row_slice(2, 3, &[2.0, 4.0, 0.0, 1.0, 3.0, 1.0]);
        let r = rref(m, 1e-12);
        assert_eq!(r, DMatrix::from_row_slice(2, 3, &[1.0, 0.0, -2.0, 0.0, 1.0, 1.0]));
    }
}
