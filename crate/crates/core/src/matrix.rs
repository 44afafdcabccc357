//! Small dense matrices of expressions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{EvalError, EvalPoint, Expr};
use crate::jet::JetSpace;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Expr>) -> Matrix {
        assert_eq!(data.len(), rows * cols, "matrix data has the wrong length");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix::new(rows, cols, vec![Expr::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Matrix {
        Matrix::diag(vec![Expr::one(); n])
    }

    pub fn diag(entries: Vec<Expr>) -> Matrix {
        let n = entries.len();
        let mut m = Matrix::zeros(n, n);
        for (i, e) in entries.into_iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn scalar(e: Expr) -> Matrix {
        Matrix::new(1, 1, vec![e])
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::SizeMismatch("ragged matrix rows".into()));
        }
        Ok(Matrix::new(r, c, rows.into_iter().flatten().collect()))
    }

    pub fn from_i64(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| Expr::integer(v)).collect()).collect())
            .expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Expr {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, e: Expr) {
        self.data[r * self.cols + c] = e;
    }

    pub fn entries(&self) -> &[Expr] {
        &self.data
    }

    pub fn map<F: FnMut(&Expr) -> Expr>(&self, f: F) -> Matrix {
        Matrix::new(self.rows, self.cols, self.data.iter().map(f).collect())
    }

    pub fn try_map<F: FnMut(&Expr) -> Result<Expr>>(&self, f: F) -> Result<Matrix> {
        Ok(Matrix::new(self.rows, self.cols, self.data.iter().map(f).collect::<Result<_>>()?))
    }

    fn same_shape(&self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::SizeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Ok(Matrix::new(self.rows, self.cols, self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Ok(Matrix::new(self.rows, self.cols, self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect()))
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::SizeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                out.push(Expr::sum((0..self.cols).map(|k| self.get(r, k) * other.get(k, c))));
            }
        }
        Ok(Matrix::new(self.rows, other.cols, out))
    }

    /// Matrix times a column of expressions.
    pub fn apply(&self, v: &[Expr]) -> Result<Vec<Expr>> {
        if v.len() != self.cols {
            return Err(Error::SizeMismatch(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|r| Expr::sum((0..self.cols).map(|k| self.get(r, k) * &v[k])))
            .collect())
    }

    pub fn scale(&self, e: &Expr) -> Matrix {
        self.map(|x| x * e)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.push(self.get(r, c).clone());
            }
        }
        Matrix::new(self.cols, self.rows, out)
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Matrix) -> Result<Matrix> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn expand(&self) -> Matrix {
        self.map(Expr::expand)
    }

    pub fn total_derivative(&self, space: &JetSpace, i: usize) -> Result<Matrix> {
        self.try_map(|e| space.total_derivative(e, i))
    }

    fn minor(&self, skip_r: usize, skip_c: usize) -> Matrix {
        let mut out = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for r in (0..self.rows).filter(|&r| r != skip_r) {
            for c in (0..self.cols).filter(|&c| c != skip_c) {
                out.push(self.get(r, c).clone());
            }
        }
        Matrix::new(self.rows - 1, self.cols - 1, out)
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Result<Expr> {
        if !self.is_square() {
            return Err(Error::SizeMismatch("determinant of a non-square matrix".into()));
        }
        Ok(match self.rows {
            0 => Expr::one(),
            1 => self.get(0, 0).clone(),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            n => Expr::sum((0..n).map(|c| {
                let sign = if c % 2 == 0 { Expr::one() } else { Expr::integer(-1) };
                Expr::product([sign, self.get(0, c).clone(), self.minor(0, c).det().unwrap()])
            })),
        })
    }

    pub fn adjugate(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::SizeMismatch("adjugate of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 1 {
            return Ok(Matrix::scalar(Expr::one()));
        }
        let mut out = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let cof = self.minor(r, c).det()?;
                let cof = if (r + c) % 2 == 0 { cof } else { -cof };
                out.set(c, r, cof);
            }
        }
        Ok(out)
    }

    /// Symbolic inverse via adjugate and determinant, for sizes up to 3.
    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows > 3 {
            return Err(Error::MatrixTooLarge(self.rows));
        }
        let d = self.det()?;
        if d.is_zero() {
            return Err(Error::SingularAtSample);
        }
        Ok(self.adjugate()?.scale(&d.recip()))
    }

    pub fn eval(&self, point: &EvalPoint) -> std::result::Result<DMatrix<f64>, EvalError> {
        let vals: Vec<f64> = self.data.iter().map(|e| e.eval(point)).collect::<std::result::Result<_, _>>()?;
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &vals))
    }

    pub fn render(&self, space: &JetSpace) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| space.render(self.get(r, c))).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;

    #[test]
    fn commutator_of_nilpotents() {
        let a = Matrix::from_i64(&[&[0, 1], &[0, 0]]);
        let b = Matrix::from_i64(&[&[0, 0], &[1, 0]]);
        assert_eq!(a.commutator(&b).unwrap(), Matrix::from_i64(&[&[1, 0], &[0, -1]]));
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let s = JetSpace::new(&["x"], &["u"], 1).unwrap();
        let a = Matrix::from_rows(vec![
            vec![s.parse("1 + x^2").unwrap(), s.parse("u").unwrap(), Expr::zero()],
            vec![s.parse("x").unwrap(), Expr::integer(2), s.parse("u*x").unwrap()],
            vec![Expr::one(), Expr::zero(), s.parse("3 + u^2").unwrap()],
        ])
        .unwrap();
        let prod = a.inverse().unwrap().mul(&a).unwrap();
        let id = Matrix::identity(3);
        let pairs: Vec<_> = prod.entries().iter().cloned().zip(id.entries().iter().cloned()).collect();
        assert!(Oracle::default().check_pairs(&pairs).unwrap().holds);
        assert!(matches!(Matrix::identity(4).inverse(), Err(Error::MatrixTooLarge(4))));
    }
}
