//! Two-planes in R^4 through their wedge coordinates.
//!
//! A plane spanned by u, v maps to the six 2x2 minors of the 2x4 matrix
//! (u; v), the coordinates of u ^ v in the basis e_i ^ e_j ordered
//! (12, 13, 14, 23, 24, 34). The image is cut out by one quadratic
//! equation, Q(x) = 2 x1 x6 - 2 x2 x5 + 2 x3 x4, of signature (3,3): a
//! nonzero wedge vector is decomposable exactly when Q vanishes, so the
//! Grassmannian is the projective null quadric of a (3,3) form. Unimodular
//! matrices act on wedge coordinates preserving Q, which realizes the
//! classical map from SL(4) into O(3,3).

use std::sync::OnceLock;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::forms::{unit_congruence, GramMatrix};
use crate::linalg::{self, Mat, RMat};
use crate::projective::{ProjectiveError, ProjectivePoint, ProjectiveSubspace};
use crate::scalar::{format_rational, Rational};

/// Index pairs (i, j), i < j, in the order the six coordinates are stored.
pub const WEDGE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub const WEDGE_DIM: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum GrassmannError {
    #[error("expected a vector of length {expected}, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    BadShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("spanning vectors are linearly dependent")]
    DependentVectors,
    #[error("the zero wedge vector has no projective meaning")]
    ZeroVector,
    #[error("wedge vector is not decomposable: its quadratic value is nonzero")]
    NotDecomposable,
    #[error("pushforward requires determinant exactly 1, got {0}")]
    DeterminantNotOne(String),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
}

/// A 2-plane in R^4, held as an ordered spanning pair. The pair matters for
/// the wedge coordinates (swapping it flips all signs); the plane itself is
/// the span.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane2 {
    u: Vec<Rational>,
    v: Vec<Rational>,
}

impl Plane2 {
    pub fn new(u: Vec<Rational>, v: Vec<Rational>) -> Result<Self, GrassmannError> {
        for w in [&u, &v] {
            if w.len() != 4 {
                return Err(GrassmannError::BadLength {
                    expected: 4,
                    got: w.len(),
                });
            }
        }
        if minors(&u, &v).iter().all(Zero::is_zero) {
            return Err(GrassmannError::DependentVectors);
        }
        Ok(Plane2 { u, v })
    }

    pub fn u(&self) -> &[Rational] {
        &self.u
    }

    pub fn v(&self) -> &[Rational] {
        &self.v
    }

    /// The plane as a projective line in P^3.
    pub fn span(&self) -> ProjectiveSubspace {
        ProjectiveSubspace::span_of_vectors(&[self.u.clone(), self.v.clone()])
            .expect("independent spanning pair")
    }

    /// Image plane under an invertible 4x4 matrix.
    pub fn transformed(&self, a: &RMat) -> Result<Plane2, GrassmannError> {
        if a.rows() != 4 || a.cols() != 4 {
            return Err(GrassmannError::BadShape {
                expected: 4,
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        Plane2::new(a.mul_vec(&self.u), a.mul_vec(&self.v))
    }
}

/// Coordinates of a bivector in the basis e_i ^ e_j, order (12, 13, 14,
/// 23, 24, 34). Not every bivector is a wedge of two vectors; see
/// `is_decomposable`.
#[derive(Clone, Debug, PartialEq)]
pub struct Wedge2 {
    coords: Vec<Rational>,
}

impl Wedge2 {
    pub fn new(coords: Vec<Rational>) -> Result<Self, GrassmannError> {
        if coords.len() != WEDGE_DIM {
            return Err(GrassmannError::BadLength {
                expected: WEDGE_DIM,
                got: coords.len(),
            });
        }
        Ok(Wedge2 { coords })
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Antisymmetric minor accessor: m(i,j) = -m(j,i), m(i,i) = 0.
    fn minor(&self, i: usize, j: usize) -> Rational {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Rational::zero(),
            std::cmp::Ordering::Less => {
                let l = pair_index(i, j);
                self.coords[l].clone()
            }
            std::cmp::Ordering::Greater => {
                let l = pair_index(j, i);
                -self.coords[l].clone()
            }
        }
    }
}

fn pair_index(i: usize, j: usize) -> usize {
    WEDGE_PAIRS
        .iter()
        .position(|&p| p == (i, j))
        .expect("valid index pair")
}

fn minors(u: &[Rational], v: &[Rational]) -> Vec<Rational> {
    WEDGE_PAIRS
        .iter()
        .map(|&(i, j)| u[i].clone() * &v[j] - u[j].clone() * &v[i])
        .collect()
}

/// The six 2x2 minors of the spanning pair. Replacing the pair by another
/// basis of the same plane scales the result by the change-of-basis
/// determinant, so the class in P^5 depends on the plane alone.
pub fn plucker(p: &Plane2) -> Wedge2 {
    Wedge2 {
        coords: minors(&p.u, &p.v),
    }
}

/// The decomposability form 2 x1 x6 - 2 x2 x5 + 2 x3 x4.
pub fn wedge_q(v: &Wedge2) -> Rational {
    wedge_b(v, v)
}

/// Polarization of `wedge_q`: the coefficient of e1^e2^e3^e4 in v ^ w.
pub fn wedge_b(v: &Wedge2, w: &Wedge2) -> Rational {
    let x = &v.coords;
    let y = &w.coords;
    x[0].clone() * &y[5] + x[5].clone() * &y[0] - x[1].clone() * &y[4] - x[4].clone() * &y[1]
        + x[2].clone() * &y[3]
        + x[3].clone() * &y[2]
}

/// Gram matrix of `wedge_b` in the stored basis.
pub fn wedge_gram() -> GramMatrix {
    let units: Vec<Wedge2> = (0..WEDGE_DIM)
        .map(|l| {
            let mut c = vec![Rational::zero(); WEDGE_DIM];
            c[l] = Rational::one();
            Wedge2 { coords: c }
        })
        .collect();
    let m = Mat::from_fn(WEDGE_DIM, WEDGE_DIM, |i, j| wedge_b(&units[i], &units[j]));
    GramMatrix::new(m).expect("symmetric by construction")
}

/// A nonzero bivector is a wedge of two vectors exactly when the
/// decomposability form vanishes on it.
pub fn is_decomposable(v: &Wedge2) -> Result<bool, GrassmannError> {
    if v.is_zero() {
        return Err(GrassmannError::ZeroVector);
    }
    Ok(wedge_q(v).is_zero())
}

/// Reconstruct a spanning pair from decomposable wedge coordinates.
///
/// With (a, b) the pair of the first nonzero coordinate, the rows
/// u_k = m(a,k) and w_k = m(b,k) lie in the plane, are independent, and
/// satisfy u ^ w = m(a,b) times the input, so the output is deterministic
/// and its wedge is proportional to the input.
pub fn unplucker(v: &Wedge2) -> Result<Plane2, GrassmannError> {
    if v.is_zero() {
        return Err(GrassmannError::ZeroVector);
    }
    if !wedge_q(v).is_zero() {
        return Err(GrassmannError::NotDecomposable);
    }
    let l = v
        .coords
        .iter()
        .position(|c| !c.is_zero())
        .expect("nonzero vector has a nonzero coordinate");
    let (a, b) = WEDGE_PAIRS[l];
    let u: Vec<Rational> = (0..4).map(|k| v.minor(a, k)).collect();
    let w: Vec<Rational> = (0..4).map(|k| v.minor(b, k)).collect();
    let plane = Plane2::new(u, w).expect("pivot minor squared is nonzero");
    debug_assert_eq!(
        plucker(&plane).coords,
        v.coords
            .iter()
            .map(|c| c.clone() * &v.coords[l])
            .collect::<Vec<_>>()
    );
    Ok(plane)
}

/// The induced action of a unimodular 4x4 matrix on wedge coordinates:
/// column (i, j) holds the wedge of the i-th and j-th columns of the input.
/// Requires determinant exactly 1, which makes the wedge form invariant
/// rather than merely scaled.
pub fn sl4_pushforward(a: &RMat) -> Result<RMat, GrassmannError> {
    if a.rows() != 4 || a.cols() != 4 {
        return Err(GrassmannError::BadShape {
            expected: 4,
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let det = linalg::determinant(a, 0.0);
    if !det.is_one() {
        return Err(GrassmannError::DeterminantNotOne(format_rational(&det)));
    }
    let cols: Vec<Vec<Rational>> = WEDGE_PAIRS
        .iter()
        .map(|&(i, j)| minors(&a.col_vec(i), &a.col_vec(j)))
        .collect();
    Ok(Mat::from_fn(WEDGE_DIM, WEDGE_DIM, |m, l| cols[l][m].clone()))
}

/// Fixed congruence carrying the wedge form to diag(1,1,1,-1,-1,-1),
/// together with its inverse; computed once and reused so that all
/// coordinate changes agree across the crate.
fn standard_pair() -> &'static (RMat, RMat) {
    static CELL: OnceLock<(RMat, RMat)> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = unit_congruence(&wedge_gram())
            .expect("three hyperbolic planes admit an exact unit basis");
        let p_inv = linalg::inverse(&p, 0.0).expect("congruence is invertible");
        (p, p_inv)
    })
}

/// The frozen congruence P with P^T G P = diag(1,1,1,-1,-1,-1).
pub fn standard_congruence() -> &'static RMat {
    &standard_pair().0
}

/// Coordinates of a wedge vector in the split (3,3) frame. Decomposable
/// vectors land on the null quadric of the compactified R^{2,2}; others
/// land off it.
pub fn to_standard_n22(v: &Wedge2) -> Result<ProjectivePoint, GrassmannError> {
    if v.is_zero() {
        return Err(GrassmannError::ZeroVector);
    }
    let y = standard_pair().1.mul_vec(&v.coords);
    Ok(ProjectivePoint::new(y)?)
}

/// The pushforward conjugated into the split frame: an exact matrix in the
/// orthogonal group of diag(1,1,1,-1,-1,-1).
pub fn pushforward_conjugate(a: &RMat) -> Result<RMat, GrassmannError> {
    let tilde = sl4_pushforward(a)?;
    let (p, p_inv) = standard_pair();
    Ok(p_inv.matmul(&tilde).matmul(p))
}
