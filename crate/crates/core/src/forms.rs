//! The diagonal forms on R^{p,q} and its lift R^{p+1,q+1}, Gram matrices of
//! restrictions, and congruence normalization.
//!
//! Conventions used everywhere downstream: the base form is
//! Q(x) = x_1^2 + ... + x_p^2 - x_{p+1}^2 - ... - x_{p+q}^2, and the lifted
//! space orders coordinates (xi_0, xi_1, ..., xi_{p+q}, xi_{p+q+1}) with
//! signs (+, base signs, -). The bilinear form is the polarization
//! B(x,y) = (Q(x+y) - Q(x) - Q(y)) / 2, which for these diagonal forms is
//! the signed coordinate product.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Mat, RMat, Scalar};
use crate::scalar::{rational_sqrt, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormsError {
    #[error("ambient space needs p + q >= 2, got p={p}, q={q}")]
    SpaceTooSmall { p: usize, q: usize },
    #[error("vector length {got} does not match space dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("gram matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("gram matrix must be symmetric")]
    NotSymmetric,
}

/// R^{p,q}: R^{p+q} with the sign pattern (+^p, -^q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSpace {
    p: usize,
    q: usize,
}

impl QuadraticSpace {
    pub fn new(p: usize, q: usize) -> Result<Self, FormsError> {
        if p + q < 2 {
            return Err(FormsError::SpaceTooSmall { p, q });
        }
        Ok(QuadraticSpace { p, q })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    pub fn lift(&self) -> LiftedSpace {
        LiftedSpace { base: *self }
    }

    pub fn signs(&self) -> Vec<i8> {
        let mut s = vec![1i8; self.p];
        s.extend(std::iter::repeat(-1i8).take(self.q));
        s
    }

    pub fn eval_q(&self, x: &[Rational]) -> Result<Rational, FormsError> {
        check_dim(self.dim(), x.len())?;
        Ok(diag_q(&self.signs(), x))
    }

    pub fn eval_b(&self, x: &[Rational], y: &[Rational]) -> Result<Rational, FormsError> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        Ok(diag_b(&self.signs(), x, y))
    }

    pub(crate) fn eval_q_f64(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        diag_q(&self.signs(), x)
    }

    pub fn gram(&self) -> GramMatrix {
        GramMatrix(sign_diag(&self.signs()))
    }
}

/// R^{p+1,q+1}, the lift of a base space; its projectivized null cone is the
/// compactification the rest of the crate works on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LiftedSpace {
    base: QuadraticSpace,
}

impl LiftedSpace {
    pub fn base(&self) -> QuadraticSpace {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim() + 2
    }

    pub fn signs(&self) -> Vec<i8> {
        let mut s = Vec::with_capacity(self.dim());
        s.push(1i8);
        s.extend(self.base.signs());
        s.push(-1i8);
        s
    }

    pub fn eval_q(&self, x: &[Rational]) -> Result<Rational, FormsError> {
        check_dim(self.dim(), x.len())?;
        Ok(diag_q(&self.signs(), x))
    }

    pub fn eval_b(&self, x: &[Rational], y: &[Rational]) -> Result<Rational, FormsError> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        Ok(diag_b(&self.signs(), x, y))
    }

    pub fn gram(&self) -> GramMatrix {
        GramMatrix(sign_diag(&self.signs()))
    }

    /// Gram matrix of the form restricted to the span of `basis` rows.
    pub fn gram_restricted(&self, basis: &RMat) -> Result<GramMatrix, FormsError> {
        check_dim(self.dim(), basis.cols())?;
        let signs = self.signs();
        Ok(GramMatrix(Mat::from_fn(
            basis.rows(),
            basis.rows(),
            |i, j| diag_b(&signs, basis.row(i), basis.row(j)),
        )))
    }
}

pub(crate) fn diag_q<T: Scalar>(signs: &[i8], x: &[T]) -> T {
    diag_b(signs, x, x)
}

pub(crate) fn diag_b<T: Scalar>(signs: &[i8], x: &[T], y: &[T]) -> T {
    let mut acc = T::zero();
    for (s, (a, b)) in signs.iter().zip(x.iter().zip(y)) {
        let term = a.clone() * b.clone();
        acc = if *s > 0 { acc + term } else { acc - term };
    }
    acc
}

fn sign_diag(signs: &[i8]) -> RMat {
    let diag: Vec<Rational> = signs
        .iter()
        .map(|&s| {
            if s > 0 {
                Rational::from_integer(1.into())
            } else {
                Rational::from_integer((-1).into())
            }
        })
        .collect();
    Mat::from_diag(&diag)
}

fn check_dim(expected: usize, got: usize) -> Result<(), FormsError> {
    if expected == got {
        Ok(())
    } else {
        Err(FormsError::DimensionMismatch { expected, got })
    }
}

/// Symmetric rational matrix, the Gram matrix of a form on some basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramMatrix(RMat);

impl GramMatrix {
    pub fn new(m: RMat) -> Result<Self, FormsError> {
        if m.rows() != m.cols() {
            return Err(FormsError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if !m.is_symmetric() {
            return Err(FormsError::NotSymmetric);
        }
        Ok(GramMatrix(m))
    }

    pub fn from_diag(diag: &[Rational]) -> Self {
        GramMatrix(Mat::from_diag(diag))
    }

    pub fn matrix(&self) -> &RMat {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }
}

/// Counts of positive, negative and zero diagonal entries after congruent
/// diagonalization. Invariant under change of basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }

    pub fn rank(&self) -> usize {
        self.n_plus + self.n_minus
    }

    pub fn is_degenerate(&self) -> bool {
        self.n_zero > 0
    }

    pub fn is_indefinite(&self) -> bool {
        self.n_plus > 0 && self.n_minus > 0
    }

    /// Semidefinite means no mixed signs; includes definite and zero forms.
    pub fn is_semidefinite(&self) -> bool {
        !self.is_indefinite()
    }
}

/// Symmetric Gaussian congruence: returns (P, d) with P^T G P = diag(d),
/// P invertible, all arithmetic exact.
///
/// Pivoting: prefer a nonzero diagonal entry (swap it in); if the remaining
/// diagonal is entirely zero but some off-diagonal entry G_ij is not, add
/// row/column j into i first, which makes G_ii = 2 G_ij nonzero.
pub fn congruent_diagonalize(g: &GramMatrix) -> (RMat, Vec<Rational>) {
    let n = g.dim();
    let mut w = g.matrix().clone();
    let mut p = RMat::identity(n);

    // column operation col_dst += f * col_src applied congruently to w, and
    // plainly to p (p accumulates only column operations)
    let add_col = |w: &mut RMat, p: &mut RMat, dst: usize, src: usize, f: &Rational| {
        for i in 0..n {
            let v = w.at(i, dst).clone() + f.clone() * w.at(i, src).clone();
            w.set(i, dst, v);
        }
        for j in 0..n {
            let v = w.at(dst, j).clone() + f.clone() * w.at(src, j).clone();
            w.set(dst, j, v);
        }
        for i in 0..n {
            let v = p.at(i, dst).clone() + f.clone() * p.at(i, src).clone();
            p.set(i, dst, v);
        }
    };
    let swap = |w: &mut RMat, p: &mut RMat, a: usize, b: usize| {
        for i in 0..n {
            let (x, y) = (w.at(i, a).clone(), w.at(i, b).clone());
            w.set(i, a, y);
            w.set(i, b, x);
        }
        for j in 0..n {
            let (x, y) = (w.at(a, j).clone(), w.at(b, j).clone());
            w.set(a, j, y);
            w.set(b, j, x);
        }
        for i in 0..n {
            let (x, y) = (p.at(i, a).clone(), p.at(i, b).clone());
            p.set(i, a, y);
            p.set(i, b, x);
        }
    };

    for i in 0..n {
        if w.at(i, i).is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !w.at(j, j).is_zero()) {
                swap(&mut w, &mut p, i, j);
            } else if let Some(j) = (i + 1..n).find(|&j| !w.at(i, j).is_zero()) {
                let one = Rational::from_integer(1.into());
                add_col(&mut w, &mut p, i, j, &one);
            }
        }
        if w.at(i, i).is_zero() {
            continue; // row/col i is zero on the remaining block
        }
        for j in i + 1..n {
            if !w.at(i, j).is_zero() {
                let f = -(w.at(i, j).clone() / w.at(i, i).clone());
                add_col(&mut w, &mut p, j, i, &f);
            }
        }
    }

    let diag = (0..n).map(|i| w.at(i, i).clone()).collect();
    (p, diag)
}

pub fn signature(g: &GramMatrix) -> Signature {
    let (_, diag) = congruent_diagonalize(g);
    let mut sig = Signature {
        n_plus: 0,
        n_minus: 0,
        n_zero: 0,
    };
    for d in &diag {
        if d.is_positive() {
            sig.n_plus += 1;
        } else if d.is_negative() {
            sig.n_minus += 1;
        } else {
            sig.n_zero += 1;
        }
    }
    sig
}

/// Exact congruence to the sorted unit diagonal diag(+1..,-1..,0..) when one
/// exists over the rationals: P with P^T G P in that shape.
///
/// Each diagonal entry whose absolute value is a perfect square is scaled
/// directly; leftover entries are matched in (+,-) pairs whose ratio is a
/// perfect square, which span a hyperbolic plane admitting an exact (+1,-1)
/// basis. Anything else (for example diag(2,-3)) has no rational unit form
/// and yields None.
pub fn unit_congruence(g: &GramMatrix) -> Option<RMat> {
    let n = g.dim();
    let (p0, diag) = congruent_diagonalize(g);
    let mut cols: Vec<Vec<Rational>> = (0..n).map(|j| p0.col_vec(j)).collect();

    // (column, +1/-1/0) once normalized
    let mut resolved: Vec<(Vec<Rational>, i8)> = Vec::new();
    let mut leftover: Vec<(usize, Rational)> = Vec::new();

    for (j, d) in diag.iter().enumerate() {
        if d.is_zero() {
            resolved.push((cols[j].clone(), 0));
        } else if let Some(r) = rational_sqrt(&d.abs()) {
            let s = r.recip();
            let col = cols[j].iter().map(|x| x * &s).collect();
            resolved.push((col, if d.is_positive() { 1 } else { -1 }));
        } else {
            leftover.push((j, d.clone()));
        }
    }

    // pair leftovers of opposite sign; each pair is a hyperbolic plane
    let mut pos: Vec<(usize, Rational)> = Vec::new();
    let mut neg: Vec<(usize, Rational)> = Vec::new();
    for (j, d) in leftover {
        if d.is_positive() {
            pos.push((j, d));
        } else {
            neg.push((j, d));
        }
    }
    'outer: while let Some((i, di)) = pos.pop() {
        for k in 0..neg.len() {
            let (j, dj) = &neg[k];
            // need -dj/di to be a perfect rational square
            if let Some(s) = rational_sqrt(&(-dj.clone() / &di)) {
                // z1 = s*ci + cj and z2 = s*ci - cj are isotropic with
                // B(z1,z2) = -2*dj =: beta; then z1 + z2/(2 beta) and
                // z1 - z2/(2 beta) have Q = +1 and -1 and pair to zero.
                let beta = -(dj.clone() + dj.clone());
                let half_inv = (beta.clone() + beta.clone()).recip();
                let (ci, cj) = (cols[i].clone(), cols[*j].clone());
                let z1: Vec<Rational> =
                    ci.iter().zip(&cj).map(|(a, b)| a * &s + b).collect();
                let z2: Vec<Rational> =
                    ci.iter().zip(&cj).map(|(a, b)| a * &s - b).collect();
                let wp: Vec<Rational> = z1
                    .iter()
                    .zip(&z2)
                    .map(|(a, b)| a + b * &half_inv)
                    .collect();
                let wm: Vec<Rational> = z1
                    .iter()
                    .zip(&z2)
                    .map(|(a, b)| a - b * &half_inv)
                    .collect();
                // beta/2 scaling below: Q(z1 ± z2/(2beta)) = ±2*B(z1,z2)/(2beta) = ±1
                resolved.push((wp, 1));
                resolved.push((wm, -1));
                neg.remove(k);
                continue 'outer;
            }
        }
        return None; // positive leftover with no matching negative
    }
    if !neg.is_empty() {
        return None;
    }

    // sort columns: +1 block, then -1, then radical
    resolved.sort_by_key(|(_, s)| match s {
        1 => 0,
        -1 => 1,
        _ => 2,
    });
    for j in 0..n {
        cols[j] = resolved[j].0.clone();
    }
    let p = RMat::from_fn(n, n, |i, j| cols[j][i].clone());
    debug_assert!({
        let d = p.transpose().matmul(g.matrix()).matmul(&p);
        (0..n).all(|i| {
            (0..n).all(|j| {
                let expect = if i != j {
                    Rational::from_integer(0.into())
                } else {
                    match resolved[i].1 {
                        1 => Rational::from_integer(1.into()),
                        -1 => Rational::from_integer((-1).into()),
                        _ => Rational::from_integer(0.into()),
                    }
                };
                *d.at(i, j) == expect
            })
        })
    });
    Some(p)
}
