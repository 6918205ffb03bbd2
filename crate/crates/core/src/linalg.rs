//! Dense matrices over exact rationals or binary64, with Gaussian
//! elimination.
//!
//! One `Scalar` trait covers both coefficient types: rationals test against
//! zero exactly (the `eps` argument is ignored), floats against a
//! caller-supplied absolute threshold. Everything here is small -- ambient
//! dimensions stay below ten -- so storage is plain dense row-major with no
//! attempt at blocking. Pivots are chosen by largest magnitude for
//! determinism and float stability; for rationals this also keeps
//! intermediate entries modest.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, ToPrimitive, Zero};

use crate::scalar::Rational;

pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Exact coefficient types ignore `eps` in zero tests.
    const EXACT: bool;

    fn magnitude(&self) -> f64;

    fn negligible(&self, eps: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= eps
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn magnitude(&self) -> f64 {
        // Only used for pivot preference; huge values round to infinity,
        // which is still a fine pivot choice.
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RMat = Mat<Rational>;
pub type FMat = Mat<f64>;

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        assert!(!rows.is_empty(), "no rows");
        let cols = rows[0].len();
        assert!(cols > 0, "empty rows");
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let n = rows.len();
        Mat {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, d.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<T> {
        self.row(i).to_vec()
    }

    pub fn col_vec(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc = acc + self.at(i, k).clone() * rhs.at(k, j).clone();
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self.at(i, k).clone() * v[k].clone();
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.at(i, j).clone() + rhs.at(i, j).clone()
        })
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.at(i, j).clone() - rhs.at(i, j).clone()
        })
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| -self.at(i, j).clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.at(i, j).clone() * s.clone()
        })
    }

    /// Largest entry magnitude; the natural scale for float thresholds.
    pub fn max_magnitude(&self) -> f64 {
        self.data
            .iter()
            .map(Scalar::magnitude)
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.at(i, j) == self.at(j, i)))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn to_f64_mat(m: &RMat) -> FMat {
    m.map(|x| x.to_f64().expect("rational out of f64 range"))
}

pub fn to_f64_vec(v: &[Rational]) -> Vec<f64> {
    v.iter()
        .map(|x| x.to_f64().expect("rational out of f64 range"))
        .collect()
}

pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

pub fn vec_max_magnitude<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(Scalar::magnitude).fold(0.0, f64::max)
}

pub struct Rref<T> {
    pub mat: Mat<T>,
    /// Pivot column of each of the first `rank` rows.
    pub pivots: Vec<usize>,
}

impl<T> Rref<T> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Reduced row echelon form with partial pivoting. For exact scalars the
/// result is the canonical representative of the row space.
pub fn rref<T: Scalar>(m: &Mat<T>, eps: f64) -> Rref<T> {
    let mut w = m.clone();
    let (rows, cols) = (w.rows(), w.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // best pivot in column c at or below row r
        let mut best = r;
        for i in r + 1..rows {
            if w.at(i, c).magnitude() > w.at(best, c).magnitude() {
                best = i;
            }
        }
        if w.at(best, c).negligible(eps) {
            continue;
        }
        if best != r {
            for j in 0..cols {
                let a = w.at(r, j).clone();
                let b = w.at(best, j).clone();
                w.set(r, j, b);
                w.set(best, j, a);
            }
        }
        let inv = T::one() / w.at(r, c).clone();
        for j in 0..cols {
            let v = w.at(r, j).clone() * inv.clone();
            w.set(r, j, v);
        }
        w.set(r, c, T::one());
        for i in 0..rows {
            if i != r && !w.at(i, c).is_zero() {
                let f = w.at(i, c).clone();
                for j in 0..cols {
                    let v = w.at(i, j).clone() - f.clone() * w.at(r, j).clone();
                    w.set(i, j, v);
                }
                w.set(i, c, T::zero());
            }
        }
        pivots.push(c);
        r += 1;
    }
    // zero out the negligible tail rows so the echelon form is clean
    for i in r..rows {
        for j in 0..cols {
            w.set(i, j, T::zero());
        }
    }
    Rref { mat: w, pivots }
}

pub fn rank<T: Scalar>(m: &Mat<T>, eps: f64) -> usize {
    rref(m, eps).rank()
}

///// Basis of the right kernel: vectors v with m v = 0.
pub fn nullspace<T: Scalar>(m: &Mat<T>, eps: f64) -> Vec<Vec<T>> {
    let r = rref(m, eps);
    let cols = m.cols();
    let mut basis = Vec::new();
    let pivot_set: Vec<Option<usize>> = {
        let mut v = vec![None; cols];
        for (row, &c) in r.pivots.iter().enumerate() {
            v[c] = Some(row);
        }
        v
    };
    for free in 0..cols {
        if pivot_set[free].is_some() {
            continue;
        }
        let mut v = vec![T::zero(); cols];
        v[free] = T::one();
        for (c, p) in pivot_set.iter().enumerate() {
            if let Some(row) = p {
                v[c] = -r.mat.at(*row, free).clone();
            }
        }
        basis.push(v);
    }
    basis
}

/// One solution of a x = b, or None when inconsistent.
pub fn solve<T: Scalar>(a: &Mat<T>, b: &[T], eps: f64) -> Option<Vec<T>> {
    assert_eq!(a.rows(), b.len());
    let aug = Mat::from_fn(a.rows(), a.cols() + 1, |i, j| {
        if j < a.cols() {
            a.at(i, j).clone()
        } else {
            b[i].clone()
        }
    });
    let r = rref(&aug, eps);
    if r.pivots.last() == Some(&a.cols()) {
        return None; // pivot in the augmented column
    }
    let mut x = vec![T::zero(); a.cols()];
    for (row, &c) in r.pivots.iter().enumerate() {
        x[c] = r.mat.at(row, a.cols()).clone();
    }
    Some(x)
}

pub fn inverse<T: Scalar>(m: &Mat<T>, eps: f64) -> Option<Mat<T>> {
    assert_eq!(m.rows(), m.cols(), "inverse of non-square matrix");
    let n = m.rows();
    let aug = Mat::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m.at(i, j).clone()
        } else if j - n == i {
            T::one()
        } else {
            T::zero()
        }
    });
    let r = rref(&aug, eps);
    if r.rank() < n || r.pivots[n - 1] != n - 1 {
        return None;
    }
    Some(Mat::from_fn(n, n, |i, j| r.mat.at(i, n + j).clone()))
}

pub fn determinant<T: Scalar>(m: &Mat<T>, eps: f64) -> T {
    assert_eq!(m.rows(), m.cols(), "determinant of non-square matrix");
    let n = m.rows();
    let mut w = m.clone();
    let mut det = T::one();
    for c in 0..n {
        let mut best = c;
        for i in c + 1..n {
            if w.at(i, c).magnitude() > w.at(best, c).magnitude() {
                best = i;
            }
        }
        if w.at(best, c).negligible(eps) {
            return T::zero();
        }
        if best != c {
            det = -det;
            for j in 0..n {
                let a = w.at(c, j).clone();
                let b = w.at(best, j).clone();
                w.set(c, j, b);
                w.set(best, j, a);
            }
        }
        det = det * w.at(c, c).clone();
        let inv = T::one() / w.at(c, c).clone();
        for i in c + 1..n {
            if w.at(i, c).is_zero() {
                continue;
            }
            let f = w.at(i, c).clone() * inv.clone();
            for j in c..n {
                let v = w.at(i, j).clone() - f.clone() * w.at(c, j).clone();
                w.set(i, j, v);
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn m2(rows: [[i64; 2]; 2]) -> RMat {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
    }

    #[test]
    fn matmul_and_transpose() {
        let a = m2([[1, 2], [3, 4]]);
        let b = m2([[0, 1], [1, 0]]);
        assert_eq!(a.matmul(&b), m2([[2, 1], [4, 3]]));
        assert_eq!(a.transpose(), m2([[1, 3], [2, 4]]));
        assert_eq!(a.mul_vec(&[int(1), int(1)]), vec![int(3), int(7)]);
    }

    #[test]
    fn rref_is_canonical_for_rationals() {
        // two different bases of the same row space
        let a = RMat::from_rows(vec![
            vec![int(2), int(4), int(0)],
            vec![int(1), int(2), int(1)],
        ]);
        let b = RMat::from_rows(vec![
            vec![int(1), int(2), int(3)],
            vec![int(3), int(6), int(1)],
        ]);
        let (ra, rb) = (rref(&a, 0.0), rref(&b, 0.0));
        assert_eq!(ra.mat, rb.mat);
        assert_eq!(ra.pivots, vec![0, 2]);
    }

    #[test]
    fn solve_and_nullspace_agree() {
        let a = RMat::from_rows(vec![
            vec![int(1), int(2), int(3)],
            vec![int(2), int(4), int(6)],
        ]);
        assert_eq!(rank(&a, 0.0), 1);
        let ns = nullspace(&a, 0.0);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(a.mul_vec(v).iter().all(|x| x == &int(0)));
        }
        let x = solve(&a, &[int(6), int(12)], 0.0).unwrap();
        assert_eq!(a.mul_vec(&x), vec![int(6), int(12)]);
        assert_eq!(solve(&a, &[int(1), int(0)], 0.0), None);
    }

    #[test]
    fn inverse_rational() {
        let a = m2([[2, 1], [1, 1]]);
        let inv = inverse(&a, 0.0).unwrap();
        assert_eq!(a.matmul(&inv), RMat::identity(2));
        assert_eq!(inv, m2([[1, -1], [-1, 2]]));
        let singular = m2([[1, 2], [2, 4]]);
        assert!(inverse(&singular, 0.0).is_none());
    }

    #[test]
    fn determinant_exact() {
        assert_eq!(determinant(&m2([[2, 1], [1, 1]]), 0.0), int(1));
        assert_eq!(determinant(&m2([[1, 2], [2, 4]]), 0.0), int(0));
        let a = RMat::from_rows(vec![
            vec![rat(1, 2), int(0), int(1)],
            vec![int(0), int(3), int(0)],
            vec![int(1), int(0), int(1)],
        ]);
        assert_eq!(determinant(&a, 0.0), rat(-3, 2));
    }

    #[test]
    fn float_path_uses_threshold() {
        let a = FMat::from_rows(vec![vec![1.0, 2.0], vec![1.0, 2.0 + 1e-14]]);
        assert_eq!(rank(&a, 1e-9), 1);
        assert_eq!(rank(&a, 1e-16), 2);
    }
}
