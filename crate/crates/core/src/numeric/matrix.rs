use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rat;
use crate::error::{Error, Result};

/// Dense row-major matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvariantViolation(
                "matrix rows have differing lengths".into(),
            ));
        }
        Ok(RatMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Rat]) -> Vec<Rat> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `xᵀ A`.
    pub fn vec_mul(&self, x: &[Rat]) -> Vec<Rat> {
        assert_eq!(x.len(), self.rows, "dimension mismatch in vec_mul");
        let mut out = vec![Rat::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, a) in self.row(i).iter().enumerate() {
                if !a.is_zero() {
                    out[j] += xi * a;
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.entries[i * self.cols + j]
    }
}

/// Sparse-aware dot product.
pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// Solves `A x = b` exactly.
///
/// Each row of `[A | b]` is scaled to integers by the lcm of its
/// denominators, then reduced with Bareiss fraction-free elimination, so
/// every intermediate entry is a minor of the scaled system. Pivots are the
/// largest-magnitude candidates in their column. The result is checked by
/// substitution before it is returned.
pub fn solve_linear(a: &RatMatrix, b: &[Rat]) -> Result<Vec<Rat>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::InvariantViolation(format!(
            "solve_linear needs a square system, got {}x{} with rhs {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let mut m: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let row = a.row(i).iter().chain(std::iter::once(&b[i]));
            let scale = row.clone().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.map(|x| x.numer() * (&scale / x.denom())).collect()
        })
        .collect();

    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = (k..n)
            .filter(|&i| !m[i][k].is_zero())
            .max_by(|&i, &j| m[i][k].abs().cmp(&m[j][k].abs()).then(j.cmp(&i)))
            .ok_or(Error::SingularMatrix)?;
        m.swap(k, pivot);
        let (top, rest) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            let factor = row[k].clone();
            for j in (k + 1)..=n {
                let v = &pivot_row[k] * &row[j] - &factor * &pivot_row[j];
                debug_assert!((&v % &prev).is_zero());
                row[j] = v / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }

    let mut x = vec![Rat::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Rat::from_bigint(m[i][n].clone());
        for j in (i + 1)..n {
            if !m[i][j].is_zero() {
                acc -= &(Rat::from_bigint(m[i][j].clone()) * &x[j]);
            }
        }
        x[i] = acc.checked_div(&Rat::from_bigint(m[i][i].clone()))?;
    }

    if a.mul_vec(&x) != b {
        return Err(Error::Internal(
            "solve_linear: substitution check failed".into(),
        ));
    }
    Ok(x)
}
