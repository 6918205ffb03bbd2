//! Projective points and subspaces of RP^{p+q+1}, the embedding of R^{p,q}
//! into the null quadric, and dimension counting for hyperplane sections.
//!
//! A point is a nonzero rational coordinate vector up to scale. x in R^{p,q}
//! embeds as [(1-Q(x))/2 : x_1 : ... : x_{p+q} : (1+Q(x))/2]; the image
//! always lies on the null cone of the lifted form. Points with
//! xi_0 + xi_{p+q+1} = 0 are the points at infinity, everything else
//! unembeds back to x = (xi_1, ..., xi_{p+q}) / (xi_0 + xi_{p+q+1}).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::forms::{signature, FormsError, QuadraticSpace};
use crate::linalg::{self, Mat, RMat};
use crate::scalar::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProjectiveError {
    #[error("projective point needs a nonzero coordinate vector")]
    ZeroVector,
    #[error("span needs at least one nonzero vector")]
    ZeroSpan,
    #[error("coordinate length {got} does not match ambient dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is not on the quadric")]
    NotOnQuadric,
    #[error(transparent)]
    Forms(#[from] FormsError),
}

/// Point of RP^{n-1}: nonzero coordinates up to scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectivePoint {
    coords: Vec<Rational>,
}

impl ProjectivePoint {
    pub fn new(coords: Vec<Rational>) -> Result<Self, ProjectiveError> {
        if coords.iter().all(Zero::is_zero) {
            return Err(ProjectiveError::ZeroVector);
        }
        Ok(ProjectivePoint { coords })
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    /// Canonical representative: integral coordinates with gcd 1 and the
    /// first nonzero coordinate positive. Serialization uses this form.
    pub fn canonical_coords(&self) -> Vec<Rational> {
        canonical_scaling(&self.coords)
    }

    /// Equality as projective points: proportional coordinate vectors.
    pub fn projectively_eq(&self, other: &Self) -> bool {
        self.coords.len() == other.coords.len()
            && self.canonical_coords() == other.canonical_coords()
    }
}

/// Clear denominators, divide by the gcd, and normalize the leading sign.
pub(crate) fn canonical_scaling(coords: &[Rational]) -> Vec<Rational> {
    let mut lcm = BigInt::one();
    for c in coords {
        lcm = lcm.lcm(c.denom());
    }
    let mut ints: Vec<BigInt> = coords
        .iter()
        .map(|c| c.numer() * (&lcm / c.denom()))
        .collect();
    let mut gcd = BigInt::zero();
    for v in &ints {
        gcd = gcd.gcd(v);
    }
    if !gcd.is_zero() {
        for v in &mut ints {
            *v /= &gcd;
        }
    }
    if let Some(first) = ints.iter().find(|v| !v.is_zero()) {
        if first.is_negative() {
            for v in &mut ints {
                *v = -v.clone();
            }
        }
    }
    ints.into_iter().map(Rational::from_integer).collect()
}

/// Linear subspace of the ambient vector space, viewed projectively.
/// Stored as the reduced row echelon basis, so equal subspaces compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectiveSubspace {
    basis: RMat,
}

impl ProjectiveSubspace {
    pub fn span_of_vectors(vectors: &[Vec<Rational>]) -> Result<Self, ProjectiveError> {
        if vectors.is_empty() {
            return Err(ProjectiveError::ZeroSpan);
        }
        let dim = vectors[0].len();
        for v in vectors {
            if v.len() != dim {
                return Err(ProjectiveError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        let m = Mat::from_rows(vectors.to_vec());
        let r = linalg::rref(&m, 0.0);
        if r.rank() == 0 {
            return Err(ProjectiveError::ZeroSpan);
        }
        let basis = Mat::from_rows((0..r.rank()).map(|i| r.mat.row_vec(i)).collect());
        Ok(ProjectiveSubspace { basis })
    }

    pub fn span_of_points(points: &[ProjectivePoint]) -> Result<Self, ProjectiveError> {
        let vectors: Vec<Vec<Rational>> =
            points.iter().map(|p| p.coords().to_vec()).collect();
        Self::span_of_vectors(&vectors)
    }

    /// Number of independent vectors (so projective dimension + 1).
    pub fn vector_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn proj_dim(&self) -> usize {
        self.vector_dim() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols()
    }

    /// Canonical (reduced row echelon) basis rows.
    pub fn basis(&self) -> &RMat {
        &self.basis
    }

    pub fn contains_vector(&self, v: &[Rational]) -> bool {
        if v.len() != self.ambient_dim() {
            return false;
        }
        let mut rows: Vec<Vec<Rational>> =
            (0..self.basis.rows()).map(|i| self.basis.row_vec(i)).collect();
        rows.push(v.to_vec());
        linalg::rank(&Mat::from_rows(rows), 0.0) == self.vector_dim()
    }

    pub fn member(&self, p: &ProjectivePoint) -> bool {
        self.contains_vector(p.coords())
    }

    pub fn contains(&self, other: &Self) -> bool {
        other
            .basis
            .iter_rows()
            .all(|row| self.contains_vector(row))
    }

    pub fn same_subspace(&self, other: &Self) -> bool {
        self == other
    }

    /// Intersection of the two subspaces, or None when it is zero.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        if self.ambient_dim() != other.ambient_dim() {
            return None;
        }
        let (ra, rb) = (self.vector_dim(), other.vector_dim());
        // solve a^T u = b^T v: kernel of [basis_a^T | -basis_b^T]
        let joint = Mat::from_fn(self.ambient_dim(), ra + rb, |i, j| {
            if j < ra {
                self.basis.at(j, i).clone()
            } else {
                -other.basis.at(j - ra, i).clone()
            }
        });
        let kernel = linalg::nullspace(&joint, 0.0);
        let mut vectors = Vec::new();
        for k in kernel {
            let u = &k[..ra];
            let v: Vec<Rational> = self.basis.transpose().mul_vec(u);
            if !v.iter().all(Zero::is_zero) {
                vectors.push(v);
            }
        }
        if vectors.is_empty() {
            None
        } else {
            Some(Self::span_of_vectors(&vectors).expect("nonzero intersection vectors"))
        }
    }
}

/// The conformal embedding of R^{p,q} into the null quadric.
pub fn embed(space: &QuadraticSpace, x: &[Rational]) -> Result<ProjectivePoint, ProjectiveError> {
    let q = space.eval_q(x)?;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let one = Rational::one();
    let mut coords = Vec::with_capacity(space.dim() + 2);
    coords.push((one.clone() - &q) * &half);
    coords.extend_from_slice(x);
    coords.push((one + &q) * &half);
    Ok(ProjectivePoint { coords })
}

/// Whether the point lies on the null quadric of the lifted form.
pub fn on_quadric(space: &QuadraticSpace, p: &ProjectivePoint) -> Result<bool, ProjectiveError> {
    Ok(space.lift().eval_q(p.coords())?.is_zero())
}

/// Inverse of `embed` where defined. Ok(None) marks a point at infinity
/// (xi_0 + xi_{last} = 0); points off the quadric are an error.
pub fn unembed(
    space: &QuadraticSpace,
    p: &ProjectivePoint,
) -> Result<Option<Vec<Rational>>, ProjectiveError> {
    if !on_quadric(space, p)? {
        return Err(ProjectiveError::NotOnQuadric);
    }
    let n = space.dim();
    let s = p.coords[0].clone() + &p.coords[n + 1];
    if s.is_zero() {
        return Ok(None);
    }
    Ok(Some(
        p.coords[1..=n].iter().map(|c| c / &s).collect(),
    ))
}

pub(crate) fn embed_f64(space: &QuadraticSpace, x: &[f64]) -> Vec<f64> {
    let q = space.eval_q_f64(x);
    let mut coords = Vec::with_capacity(space.dim() + 2);
    coords.push((1.0 - q) / 2.0);
    coords.extend_from_slice(x);
    coords.push((1.0 + q) / 2.0);
    coords
}

/// Float unembedding. Returns None when the point is at infinity relative to
/// the coordinate scale (|s| below 1e-12 of the largest coordinate).
pub(crate) fn unembed_f64(space: &QuadraticSpace, xi: &[f64]) -> Option<Vec<f64>> {
    let n = space.dim();
    let s = xi[0] + xi[n + 1];
    let scale = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if s.abs() <= 1e-12 * scale.max(1e-300) {
        return None;
    }
    Some(xi[1..=n].iter().map(|c| c / s).collect())
}

/// Dimension of the intersection of the null quadric with a projective
/// subspace, decided exactly from the signature of the restricted form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntersectionDim {
    Empty,
    Dimension(usize),
}

/// N cap [h] for h a linear subspace of the lifted space, as a projective
/// dimension. Indefinite restrictions meet the quadric in codimension one;
/// a semidefinite restriction of rank r meets it exactly in the projectivized
/// radical, which is empty when the restriction is definite.
pub fn quadric_intersection_dim(
    space: &QuadraticSpace,
    h: &ProjectiveSubspace,
) -> Result<IntersectionDim, ProjectiveError> {
    let lifted = space.lift();
    if h.ambient_dim() != lifted.dim() {
        return Err(ProjectiveError::DimensionMismatch {
            expected: lifted.dim(),
            got: h.ambient_dim(),
        });
    }
    let gram = lifted.gram_restricted(h.basis())?;
    let sig = signature(&gram);
    if sig.is_indefinite() {
        return Ok(IntersectionDim::Dimension(h.proj_dim() - 1));
    }
    if sig.n_zero == 0 {
        return Ok(IntersectionDim::Empty);
    }
    Ok(IntersectionDim::Dimension(sig.n_zero - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn space(p: usize, q: usize) -> QuadraticSpace {
        QuadraticSpace::new(p, q).unwrap()
    }

    fn pt(v: &[i64]) -> ProjectivePoint {
        ProjectivePoint::new(v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn embed_unit_point_r11() {
        // Q((1,0)) = 1 so the embedding is [0 : 1 : 0 : 1]
        let p = embed(&space(1, 1), &[int(1), int(0)]).unwrap();
        assert!(p.projectively_eq(&pt(&[0, 1, 0, 1])));
        assert!(on_quadric(&space(1, 1), &p).unwrap());
    }

    #[test]
    fn embed_r20_canonicalizes() {
        // Q((2,0)) = 4: [-3/2 : 2 : 0 : 5/2], leading sign flipped to positive
        let p = embed(&space(2, 0), &[int(2), int(0)]).unwrap();
        assert_eq!(
            p.canonical_coords(),
            vec![int(3), int(-4), int(0), int(-5)]
        );
        assert!(p.projectively_eq(&pt(&[-3, 4, 0, 5])));
    }

    #[test]
    fn unembed_roundtrip_and_infinity() {
        let s = space(2, 0);
        let x = vec![rat(1, 2), int(0)];
        let p = embed(&s, &x).unwrap();
        assert_eq!(unembed(&s, &p).unwrap(), Some(x));
        // [3:4:0:5] is the embedding of (1/2, 0) rescaled
        assert_eq!(
            unembed(&s, &pt(&[3, 4, 0, 5])).unwrap(),
            Some(vec![rat(1, 2), int(0)])
        );
        // e_infinity
        let inf = pt(&[-1, 0, 0, 1]);
        assert_eq!(unembed(&s, &inf).unwrap(), None);
        // off-quadric is an error
        assert_eq!(
            unembed(&s, &pt(&[1, 0, 0, 0])),
            Err(ProjectiveError::NotOnQuadric)
        );
    }

    #[test]
    fn canonicalization_rules() {
        let p = ProjectivePoint::new(vec![rat(-2, 3), int(0), rat(4, 3)]).unwrap();
        assert_eq!(p.canonical_coords(), vec![int(1), int(0), int(-2)]);
        assert!(p.projectively_eq(&pt(&[-1, 0, 2])));
        assert!(!p.projectively_eq(&pt(&[1, 0, 2])));
    }

    #[test]
    fn span_and_membership() {
        let h = ProjectiveSubspace::span_of_vectors(&[
            vec![int(1), int(0), int(1), int(0)],
            vec![int(0), int(1), int(0), int(0)],
            vec![int(1), int(1), int(1), int(0)], // dependent
        ])
        .unwrap();
        assert_eq!(h.vector_dim(), 2);
        assert_eq!(h.proj_dim(), 1);
        assert!(h.member(&pt(&[2, 3, 2, 0])));
        assert!(!h.member(&pt(&[1, 0, 0, 0])));
        let same = ProjectiveSubspace::span_of_vectors(&[
            vec![int(1), int(1), int(1), int(0)],
            vec![int(2), int(-1), int(2), int(0)],
        ])
        .unwrap();
        assert!(h.same_subspace(&same));
    }

    #[test]
    fn intersect_subspaces() {
        let a = ProjectiveSubspace::span_of_vectors(&[
            vec![int(1), int(0), int(0)],
            vec![int(0), int(1), int(0)],
        ])
        .unwrap();
        let b = ProjectiveSubspace::span_of_vectors(&[
            vec![int(0), int(1), int(1)],
            vec![int(1), int(0), int(1)],
        ])
        .unwrap();
        let meet = a.intersect(&b).unwrap();
        assert_eq!(meet.vector_dim(), 1);
        assert!(meet.contains_vector(&[int(1), int(-1), int(0)]));
        let c = ProjectiveSubspace::span_of_vectors(&[vec![int(0), int(0), int(1)]]).unwrap();
        assert!(a.intersect(&c).is_none());
    }

    #[test]
    fn hyperplane_sections_of_the_sphere() {
        // N^{2,0} in RP^3: lifted signs (+,+,+,-)
        let s = space(2, 0);
        // {xi_0 = 0}: restriction diag(1,1,-1) indefinite -> a circle
        let h1 = ProjectiveSubspace::span_of_vectors(&[
            vec![int(0), int(1), int(0), int(0)],
            vec![int(0), int(0), int(1), int(0)],
            vec![int(0), int(0), int(0), int(1)],
        ])
        .unwrap();
        assert_eq!(
            quadric_intersection_dim(&s, &h1).unwrap(),
            IntersectionDim::Dimension(1)
        );
        // {xi_3 = 0}: restriction diag(1,1,1) definite -> empty
        let h2 = ProjectiveSubspace::span_of_vectors(&[
            vec![int(1), int(0), int(0), int(0)],
            vec![int(0), int(1), int(0), int(0)],
            vec![int(0), int(0), int(1), int(0)],
        ])
        .unwrap();
        assert_eq!(
            quadric_intersection_dim(&s, &h2).unwrap(),
            IntersectionDim::Empty
        );
        // {xi_0 = xi_3}: semidefinite rank 2 -> single point [1:0:0:1]
        let h3 = ProjectiveSubspace::span_of_vectors(&[
            vec![int(1), int(0), int(0), int(1)],
            vec![int(0), int(1), int(0), int(0)],
            vec![int(0), int(0), int(1), int(0)],
        ])
        .unwrap();
        assert_eq!(
            quadric_intersection_dim(&s, &h3).unwrap(),
            IntersectionDim::Dimension(0)
        );
    }

    #[test]
    fn totally_isotropic_subspace_lies_on_quadric() {
        // span{(1,0,1,0),(0,1,0,1)} in the lift of R^{1,1} (signs +,+,-,-):
        // each generator pairs a plus slot with a minus slot, so the
        // restricted form vanishes identically
        let s = space(1, 1);
        let h = ProjectiveSubspace::span_of_vectors(&[
            vec![int(1), int(0), int(1), int(0)],
            vec![int(0), int(1), int(0), int(1)],
        ])
        .unwrap();
        assert_eq!(
            quadric_intersection_dim(&s, &h).unwrap(),
            IntersectionDim::Dimension(1)
        );
    }
}
