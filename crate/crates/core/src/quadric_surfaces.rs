//! Quadratic surfaces inside the compactified space: hyperplane sections of
//! the null quadric and their lower-dimensional analogues.
//!
//! A hypersurface is cut out by a hyperplane with normal a; its affine trace
//! is the solution set of alpha Q(x) + B(beta, x) + gamma = 0, and the two
//! descriptions convert into each other by an exact linear change. The sign
//! of Q^(a) is a complete invariant of the conformal group action on
//! hypersurfaces, which makes orbit questions exact rational arithmetic.
//!
//! A d-dimensional surface is the section of the quadric by a projective
//! subspace of dimension d + 1. The section has the right dimension exactly
//! when the restricted form is indefinite or semidefinite of rank one; the
//! signature of that restriction drives the orbit machinery, with the
//! subtlety that equal point sets can arise from restrictions of different
//! signatures, so a negative answer here only speaks about the given
//! realizations.

use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{
    congruent_diagonalize, signature, unit_congruence, FormsError, LiftedSpace, QuadraticSpace,
    Signature,
};
use crate::linalg::{self, Mat, RMat};
use crate::projective::{
    canonical_scaling, quadric_intersection_dim, IntersectionDim, ProjectiveError,
    ProjectiveSubspace,
};
use crate::scalar::Rational;
use crate::transforms::ConformalMap;
use crate::witt::{extend_isometry, IsometryProblem, OrthogonalWitness, WittError, WittParams};

#[derive(Debug, Error, PartialEq)]
pub enum SurfaceError {
    #[error("affine quadric needs at least one nonzero coefficient")]
    ZeroQuadric,
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hypersurface normal must be nonzero")]
    ZeroNormal,
    #[error("this hyperplane meets the quadric in too small a set to be a hypersurface")]
    EmptySection,
    #[error("inputs live in different spaces")]
    SpaceMismatch,
    #[error("subspace of vector dimension {vector_dim} does not define a surface in ambient dimension {ambient}")]
    SubspaceDimension { vector_dim: usize, ambient: usize },
    #[error("the quadric section has dimension {got:?}, expected {expected}")]
    NotASurface {
        expected: usize,
        got: IntersectionDim,
    },
    #[error("sampling could not certify the span of the section; equality undecided")]
    Indeterminate,
    #[error("this operation needs a definite base space (p = 0 or q = 0)")]
    NotDefiniteSpace,
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
}

/// Sign class of a hypersurface: the sign of Q^ on its normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    pub fn of(x: &Rational) -> Sign {
        if x.is_zero() {
            Sign::Zero
        } else if x.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

/// The affine equation alpha Q(x) + B(beta, x) + gamma = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineQuadric {
    alpha: Rational,
    beta: Vec<Rational>,
    gamma: Rational,
}

impl AffineQuadric {
    pub fn new(
        alpha: Rational,
        beta: Vec<Rational>,
        gamma: Rational,
    ) -> Result<Self, SurfaceError> {
        if alpha.is_zero() && gamma.is_zero() && beta.iter().all(Zero::is_zero) {
            return Err(SurfaceError::ZeroQuadric);
        }
        Ok(AffineQuadric { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &[Rational] {
        &self.beta
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    /// Scale-normalized coefficients: (alpha, beta, gamma) as one tuple made
    /// integral, primitive, leading nonzero entry positive. Proportional
    /// coefficient tuples canonicalize identically.
    pub fn canonicalized(&self) -> AffineQuadric {
        let mut flat = vec![self.alpha.clone()];
        flat.extend(self.beta.iter().cloned());
        flat.push(self.gamma.clone());
        let canon = canonical_scaling(&flat);
        let n = self.beta.len();
        AffineQuadric {
            alpha: canon[0].clone(),
            beta: canon[1..=n].to_vec(),
            gamma: canon[n + 1].clone(),
        }
    }

    /// Left-hand side of the defining equation at x.
    pub fn eval(&self, space: &QuadraticSpace, x: &[Rational]) -> Result<Rational, SurfaceError> {
        if self.beta.len() != space.dim() {
            return Err(SurfaceError::DimensionMismatch {
                expected: space.dim(),
                got: self.beta.len(),
            });
        }
        let q = space.eval_q(x)?;
        let b = space.eval_b(&self.beta, x)?;
        Ok(self.alpha.clone() * q + b + &self.gamma)
    }
}

/// Hyperplane section of the quadric, stored through its normal vector.
/// The normal determines the hyperplane {xi : B^(a, xi) = 0} and is unique
/// up to scale. In definite base spaces only one sign of Q^(a) gives a
/// genuine hypersurface; the constructor enforces that.
#[derive(Clone, Debug)]
pub struct Hypersurface {
    space: LiftedSpace,
    normal: Vec<Rational>,
}

impl Hypersurface {
    pub fn new(base: QuadraticSpace, normal: Vec<Rational>) -> Result<Self, SurfaceError> {
        let space = base.lift();
        if normal.len() != space.dim() {
            return Err(SurfaceError::DimensionMismatch {
                expected: space.dim(),
                got: normal.len(),
            });
        }
        if normal.iter().all(Zero::is_zero) {
            return Err(SurfaceError::ZeroNormal);
        }
        let q = space.eval_q(&normal)?;
        if base.q() == 0 && !q.is_positive() {
            return Err(SurfaceError::EmptySection);
        }
        if base.p() == 0 && !q.is_negative() {
            return Err(SurfaceError::EmptySection);
        }
        Ok(Hypersurface { space, normal })
    }

    pub fn space(&self) -> LiftedSpace {
        self.space
    }

    pub fn base(&self) -> QuadraticSpace {
        self.space.base()
    }

    pub fn normal(&self) -> &[Rational] {
        &self.normal
    }

    /// Scale-normalized normal: integral, primitive, leading entry positive.
    pub fn canonical_normal(&self) -> Vec<Rational> {
        canonical_scaling(&self.normal)
    }

    pub fn sign(&self) -> Sign {
        let q = self
            .space
            .eval_q(&self.normal)
            .expect("normal length enforced at construction");
        Sign::of(&q)
    }

    /// The hyperplane {xi : B^(a, xi) = 0} as a projective subspace.
    pub fn hyperplane(&self) -> ProjectiveSubspace {
        let signs = self.space.signs();
        let row = Mat::from_rows(vec![(0..self.space.dim())
            .map(|j| {
                if signs[j] > 0 {
                    self.normal[j].clone()
                } else {
                    -self.normal[j].clone()
                }
            })
            .collect()]);
        let kernel = linalg::nullspace(&row, 0.0);
        ProjectiveSubspace::span_of_vectors(&kernel)
            .expect("a nonzero normal leaves an (n-1)-dimensional kernel")
    }

    /// Same hypersurface: same space and proportional normals.
    pub fn eq_up_to_scale(&self, other: &Hypersurface) -> bool {
        self.space == other.space && self.canonical_normal() == other.canonical_normal()
    }
}

pub fn sign_of(h: &Hypersurface) -> Sign {
    h.sign()
}

/// Convert the affine equation to its hyperplane normal:
/// a = (gamma - alpha, beta, -gamma - alpha). The pullback identity
/// B^(a, embed(x)) = alpha Q(x) + B(beta, x) + gamma holds exactly.
pub fn affine_to_projective(
    space: QuadraticSpace,
    quadric: &AffineQuadric,
) -> Result<Hypersurface, SurfaceError> {
    if quadric.beta.len() != space.dim() {
        return Err(SurfaceError::DimensionMismatch {
            expected: space.dim(),
            got: quadric.beta.len(),
        });
    }
    let mut a = Vec::with_capacity(space.dim() + 2);
    a.push(quadric.gamma.clone() - &quadric.alpha);
    a.extend(quadric.beta.iter().cloned());
    a.push(-quadric.gamma.clone() - &quadric.alpha);
    Hypersurface::new(space, a)
}

/// Inverse of `affine_to_projective` up to overall scale.
pub fn projective_to_affine(h: &Hypersurface) -> AffineQuadric {
    let n = h.base().dim();
    let a = &h.normal;
    let half = crate::scalar::rat(1, 2);
    let alpha = -(a[0].clone() + &a[n + 1]) * &half;
    let beta = a[1..=n].to_vec();
    let gamma = (a[0].clone() - &a[n + 1]) * &half;
    AffineQuadric::new(alpha, beta, gamma).expect("nonzero normal converts to nonzero equation")
}

/// Image hypersurface under a conformal map: the normal maps by the matrix
/// itself, since the matrix preserves the pairing.
pub fn act_hypersurface(
    map: &ConformalMap,
    h: &Hypersurface,
) -> Result<Hypersurface, SurfaceError> {
    if map.space() != h.base() {
        return Err(SurfaceError::SpaceMismatch);
    }
    let image = map.matrix().mul_vec(&h.normal);
    Ok(Hypersurface::new(h.base(), image).expect("orthogonal image stays valid"))
}

/// Orbit test for the conformal action on hypersurfaces: the sign of the
/// normal is a complete invariant, so this is an exact rational decision.
pub fn same_orbit_hypersurface(
    h1: &Hypersurface,
    h2: &Hypersurface,
) -> Result<bool, SurfaceError> {
    if h1.space != h2.space {
        return Err(SurfaceError::SpaceMismatch);
    }
    Ok(h1.sign() == h2.sign())
}

/// Section of the quadric by a projective subspace of dimension d + 1,
/// accepted only when the section really is d-dimensional. The signature of
/// the restricted form is cached; it depends on the subspace, not just on
/// the point set.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceD {
    base: QuadraticSpace,
    h: ProjectiveSubspace,
    d: usize,
    sig: Signature,
}

impl SurfaceD {
    pub fn base(&self) -> QuadraticSpace {
        self.base
    }

    pub fn space(&self) -> LiftedSpace {
        self.base.lift()
    }

    pub fn subspace(&self) -> &ProjectiveSubspace {
        &self.h
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// For a semidefinite restriction the whole section is the projectivized
    /// radical, a linear set; returns it, or None in the indefinite case.
    pub fn linear_locus(&self) -> Option<ProjectiveSubspace> {
        if !self.sig.is_semidefinite() {
            return None;
        }
        let gram = self
            .space()
            .gram_restricted(self.h.basis())
            .expect("basis matches ambient");
        let coeffs = linalg::nullspace(gram.matrix(), 0.0);
        let vectors: Vec<Vec<Rational>> = coeffs
            .iter()
            .map(|c| combine_rows(self.h.basis(), c))
            .collect();
        Some(
            ProjectiveSubspace::span_of_vectors(&vectors)
                .expect("rank-one semidefinite restriction has a nonzero radical"),
        )
    }
}

fn combine_rows(basis: &RMat, coeffs: &[Rational]) -> Vec<Rational> {
    let n = basis.cols();
    let mut out = vec![Rational::zero(); n];
    for (c, i) in coeffs.iter().zip(0..basis.rows()) {
        for j in 0..n {
            out[j] = out[j].clone() + c.clone() * basis.at(i, j).clone();
        }
    }
    out
}

/// Validate a subspace as a d-dimensional surface; d is read off from the
/// subspace dimension and the section must have exactly that dimension.
pub fn make_surface(
    space: QuadraticSpace,
    h: &ProjectiveSubspace,
) -> Result<SurfaceD, SurfaceError> {
    let lifted = space.lift();
    if h.ambient_dim() != lifted.dim() {
        return Err(SurfaceError::DimensionMismatch {
            expected: lifted.dim(),
            got: h.ambient_dim(),
        });
    }
    let k = h.vector_dim();
    if k < 3 || k > space.dim() + 1 {
        return Err(SurfaceError::SubspaceDimension {
            vector_dim: k,
            ambient: lifted.dim(),
        });
    }
    let d = k - 2;
    let got = quadric_intersection_dim(&space, h)?;
    if got != IntersectionDim::Dimension(d) {
        return Err(SurfaceError::NotASurface { expected: d, got });
    }
    let sig = signature(&lifted.gram_restricted(h.basis())?);
    Ok(SurfaceD {
        base: space,
        h: h.clone(),
        d,
        sig,
    })
}

/// Image surface under a conformal map.
pub fn act_surface(map: &ConformalMap, s: &SurfaceD) -> Result<SurfaceD, SurfaceError> {
    if map.space() != s.base {
        return Err(SurfaceError::SpaceMismatch);
    }
    let rows: Vec<Vec<Rational>> = s
        .h
        .basis()
        .iter_rows()
        .map(|row| map.matrix().mul_vec(row))
        .collect();
    let image = ProjectiveSubspace::span_of_vectors(&rows)?;
    make_surface(s.base, &image)
}

pub const DEFAULT_SAMPLING_SEED: u64 = 22;

/// Point-set equality of two sections.
///
/// Semidefinite sections are linear sets compared exactly through their
/// radicals. An indefinite section is compared by certifying that its
/// rational points span the subspace; when the certification fails (rational
/// points can be scarce) the answer is the `Indeterminate` error rather than
/// a guess.
pub fn surface_points_equal(s1: &SurfaceD, s2: &SurfaceD) -> Result<bool, SurfaceError> {
    surface_points_equal_seeded(s1, s2, DEFAULT_SAMPLING_SEED)
}

pub fn surface_points_equal_seeded(
    s1: &SurfaceD,
    s2: &SurfaceD,
    seed: u64,
) -> Result<bool, SurfaceError> {
    if s1.base != s2.base {
        return Err(SurfaceError::SpaceMismatch);
    }
    if s1.d != s2.d {
        return Err(SurfaceError::DimensionMismatch {
            expected: s1.d,
            got: s2.d,
        });
    }
    match (s1.sig.is_semidefinite(), s2.sig.is_semidefinite()) {
        (true, true) => Ok(s1.linear_locus() == s2.linear_locus()),
        (true, false) => decide_against_spanning(s2, seed),
        (false, true) => decide_against_spanning(s1, seed),
        (false, false) => {
            if s1.h == s2.h {
                return Ok(true);
            }
            // distinct subspaces: if either section certifiably spans its
            // subspace, the point sets cannot coincide
            if null_span_certified(s1, seed)? || null_span_certified(s2, seed)? {
                Ok(false)
            } else {
                Err(SurfaceError::Indeterminate)
            }
        }
    }
}

/// A semidefinite section is a linear set of projective dimension d; an
/// indefinite one that spans its (d+2)-dimensional subspace cannot equal it.
fn decide_against_spanning(indef: &SurfaceD, seed: u64) -> Result<bool, SurfaceError> {
    if null_span_certified(indef, seed)? {
        Ok(false)
    } else {
        Err(SurfaceError::Indeterminate)
    }
}

/// Try to certify that the rational points of the section span the whole
/// subspace, by collecting isotropic coefficient vectors of the restricted
/// form: first a small deterministic box, then secants through the points
/// already found in seeded pseudo-random directions.
fn null_span_certified(s: &SurfaceD, seed: u64) -> Result<bool, SurfaceError> {
    let gram = s.space().gram_restricted(s.h.basis())?;
    let g = gram.matrix();
    let k = g.rows();
    let qc = |c: &[Rational]| -> Rational { linalg::dot(&g.mul_vec(c), c) };
    let bc = |c: &[Rational], w: &[Rational]| -> Rational { linalg::dot(&g.mul_vec(c), w) };

    let mut found: Vec<Vec<Rational>> = Vec::new();
    let mut rank_now = 0usize;
    let try_push = |c: Vec<Rational>, found: &mut Vec<Vec<Rational>>, rank_now: &mut usize| {
        if c.iter().all(Zero::is_zero) {
            return;
        }
        let mut rows = found.clone();
        rows.push(c.clone());
        if linalg::rank(&Mat::from_rows(rows), 0.0) > *rank_now {
            found.push(c);
            *rank_now += 1;
        }
    };

    // deterministic box of small integer coefficients
    let radius: i64 = if k <= 4 { 3 } else { 1 };
    let width = (2 * radius + 1) as u64;
    let total = width.pow(k as u32).min(20_000);
    for idx in 0..total {
        if rank_now == k {
            return Ok(true);
        }
        let mut rem = idx;
        let c: Vec<Rational> = (0..k)
            .map(|_| {
                let digit = (rem % width) as i64 - radius;
                rem /= width;
                crate::scalar::int(digit)
            })
            .collect();
        if qc(&c).is_zero() {
            try_push(c, &mut found, &mut rank_now);
        }
    }

    // secant construction: from a known point z, the line toward w returns
    // to the quadric at t = -2 B(z,w) / Q(w)
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..400 {
        if rank_now == k {
            return Ok(true);
        }
        if found.is_empty() {
            break;
        }
        let w: Vec<Rational> = (0..k)
            .map(|_| crate::scalar::int(rng.gen_range(-9..=9)))
            .collect();
        if w.iter().all(Zero::is_zero) {
            continue;
        }
        let qw = qc(&w);
        if qw.is_zero() {
            try_push(w, &mut found, &mut rank_now);
            continue;
        }
        let z = found[attempt % found.len()].clone();
        let t = -crate::scalar::int(2) * bc(&z, &w) / qw;
        if t.is_zero() {
            continue;
        }
        let c: Vec<Rational> = z
            .iter()
            .zip(&w)
            .map(|(a, b)| a.clone() + t.clone() * b.clone())
            .collect();
        debug_assert!(qc(&c).is_zero());
        try_push(c, &mut found, &mut rank_now);
    }
    Ok(rank_now == k)
}

/// Orbit construction from the given realizations: when the cached
/// signatures match, produce an orthogonal matrix carrying one subspace onto
/// the other (exact whenever a rational orthonormal-style frame exists,
/// verified floats otherwise). A `None` means the signatures differ, which
/// rules out equivalence through these realizations only.
pub fn same_orbit_given_realizations(
    s1: &SurfaceD,
    s2: &SurfaceD,
    params: &WittParams,
) -> Result<Option<OrthogonalWitness>, SurfaceError> {
    if s1.base != s2.base {
        return Err(SurfaceError::SpaceMismatch);
    }
    if s1.d != s2.d {
        return Err(SurfaceError::DimensionMismatch {
            expected: s1.d,
            got: s2.d,
        });
    }
    if s1.sig != s2.sig {
        return Ok(None);
    }
    let lifted = s1.space();
    let g1 = lifted.gram_restricted(s1.h.basis())?;
    let g2 = lifted.gram_restricted(s2.h.basis())?;

    // frames of the two subspaces with identical Grams
    if let (Some(p1), Some(p2)) = (unit_congruence(&g1), unit_congruence(&g2)) {
        let f1 = frame_from_columns(s1.h.basis(), &p1);
        let f2 = frame_from_columns(s2.h.basis(), &p2);
        let prob = IsometryProblem::new(lifted, f1, f2)?;
        let m = extend_isometry(&prob, params)?;
        debug_assert!({
            let rows: Vec<Vec<Rational>> = s1
                .h
                .basis()
                .iter_rows()
                .map(|row| m.mul_vec(row))
                .collect();
            ProjectiveSubspace::span_of_vectors(&rows).unwrap() == s2.h
        });
        let pairs: Vec<(Vec<Rational>, Vec<Rational>)> = prob
            .sources()
            .iter()
            .cloned()
            .zip(prob.targets().iter().cloned())
            .collect();
        return Ok(Some(OrthogonalWitness::from_exact(
            &lifted.signs(),
            m,
            &pairs,
        )));
    }

    let f1 = float_unit_frame(s1.h.basis(), &g1);
    let f2 = float_unit_frame(s2.h.basis(), &g2);
    let prob = IsometryProblem::new(lifted, f1.clone(), f2.clone())?;
    let m = extend_isometry(&prob, params)?;
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = f1.into_iter().zip(f2).collect();
    Ok(Some(OrthogonalWitness::from_float(
        &lifted.signs(),
        m,
        &pairs,
        params,
    )?))
}

/// Rows of P^T basis: the frame vectors whose Gram is P^T G P.
fn frame_from_columns(basis: &RMat, p: &RMat) -> Vec<Vec<Rational>> {
    (0..p.cols())
        .map(|j| combine_rows(basis, &p.col_vec(j)))
        .collect()
}

/// Congruent diagonalization rescaled to diagonal entries +-1 and 0, columns
/// sorted positive, negative, zero; needs square roots, hence binary64.
fn float_unit_frame(basis: &RMat, gram: &crate::forms::GramMatrix) -> Vec<Vec<f64>> {
    let (p, diag) = congruent_diagonalize(gram);
    let mut order: Vec<usize> = (0..diag.len()).collect();
    let class = |x: &Rational| -> u8 {
        if x.is_positive() {
            0
        } else if x.is_negative() {
            1
        } else {
            2
        }
    };
    order.sort_by_key(|&j| (class(&diag[j]), j));
    let basis_f = linalg::to_f64_mat(basis);
    order
        .iter()
        .map(|&j| {
            let col = linalg::to_f64_vec(&p.col_vec(j));
            let dj = diag[j].to_f64().expect("diagonal entry fits binary64");
            let scale = if dj == 0.0 { 1.0 } else { dj.abs().sqrt().recip() };
            let mut out = vec![0.0; basis_f.cols()];
            for (i, c) in col.iter().enumerate() {
                for (slot, val) in out.iter_mut().zip(basis_f.row(i)) {
                    *slot += c * scale * val;
                }
            }
            out
        })
        .collect()
}

/// In a definite base space every d-dimensional surface arises from an
/// indefinite restriction of one fixed signature, so the group acts
/// transitively and a mapping element always exists.
pub fn definite_case_orbit(
    s1: &SurfaceD,
    s2: &SurfaceD,
    params: &WittParams,
) -> Result<OrthogonalWitness, SurfaceError> {
    if s1.base.p() != 0 && s1.base.q() != 0 {
        return Err(SurfaceError::NotDefiniteSpace);
    }
    Ok(same_orbit_given_realizations(s1, s2, params)?
        .expect("sections of equal dimension in a definite space share one signature"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective;
    use crate::scalar::{int, rat};
    use num_traits::ToPrimitive;

    fn space(p: usize, q: usize) -> QuadraticSpace {
        QuadraticSpace::new(p, q).unwrap()
    }

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    fn curve(space: QuadraticSpace, level: i64) -> Hypersurface {
        // Q(x) = level, written as Q(x) - level = 0
        let quad = AffineQuadric::new(int(1), vec![int(0); space.dim()], int(-level)).unwrap();
        affine_to_projective(space, &quad).unwrap()
    }

    #[test]
    fn affine_normals_of_the_three_standard_curves() {
        let s = space(1, 1);
        assert_eq!(curve(s, 1).canonical_normal(), v(&[1, 0, 0, 0]));
        assert_eq!(curve(s, -1).canonical_normal(), v(&[0, 0, 0, 1]));
        let cone = AffineQuadric::new(int(1), vec![int(0), int(0)], int(0)).unwrap();
        assert_eq!(
            affine_to_projective(s, &cone).unwrap().canonical_normal(),
            v(&[1, 0, 0, 1])
        );
    }

    #[test]
    fn signs_of_the_three_standard_curves() {
        let s = space(1, 1);
        assert_eq!(curve(s, 1).sign(), Sign::Positive);
        assert_eq!(curve(s, -1).sign(), Sign::Negative);
        let h = Hypersurface::new(s, v(&[1, 0, 0, 1])).unwrap();
        assert_eq!(h.sign(), Sign::Zero);
    }

    #[test]
    fn proportional_quadrics_canonicalize_identically() {
        let a = AffineQuadric::new(int(2), vec![int(0), int(-4)], int(-2)).unwrap();
        let b = AffineQuadric::new(rat(-1, 3), vec![int(0), rat(2, 3)], rat(1, 3)).unwrap();
        let canon = a.canonicalized();
        assert_eq!(canon, b.canonicalized());
        assert_eq!(canon.alpha(), &int(1));
        assert_eq!(canon.beta(), &[int(0), int(-2)]);
        assert_eq!(canon.gamma(), &int(-1));
    }

    #[test]
    fn projective_to_affine_inverts_the_conversion() {
        let s = space(1, 1);
        let h = Hypersurface::new(s, v(&[1, 0, 0, 0])).unwrap();
        let q = projective_to_affine(&h);
        assert_eq!(q.alpha(), &rat(-1, 2));
        assert_eq!(q.beta(), &v(&[0, 0])[..]);
        assert_eq!(q.gamma(), &rat(1, 2));
        // -Q/2 + 1/2 = 0 is the unit level set
        assert_eq!(q.eval(&s, &v(&[1, 0])).unwrap(), int(0));
        let back = affine_to_projective(s, &q).unwrap();
        assert!(back.eq_up_to_scale(&h));
    }

    #[test]
    fn roundtrip_on_a_generic_equation() {
        let s = space(2, 1);
        let q = AffineQuadric::new(rat(2, 3), v(&[1, -2, 5]), rat(-7, 4)).unwrap();
        let h = affine_to_projective(s, &q).unwrap();
        let q2 = projective_to_affine(&h);
        // equal up to overall scale; here the scale is exactly one
        assert_eq!(q2, q);
    }

    #[test]
    fn pullback_identity_is_exact() {
        let s = space(2, 1);
        let q = AffineQuadric::new(rat(1, 2), v(&[3, 0, -1]), int(2)).unwrap();
        let h = affine_to_projective(s, &q).unwrap();
        let samples = [
            vec![int(0), int(0), int(0)],
            vec![int(1), int(-2), int(3)],
            vec![rat(1, 2), rat(-3, 4), rat(7, 5)],
        ];
        for x in &samples {
            let lhs = q.eval(&s, x).unwrap();
            let pulled = s
                .lift()
                .eval_b(h.normal(), projective::embed(&s, x).unwrap().coords())
                .unwrap();
            assert_eq!(lhs, pulled);
        }
    }

    #[test]
    fn definite_space_rejects_nonpositive_normals() {
        let s = space(2, 0);
        assert!(Hypersurface::new(s, v(&[1, 0, 0, 0])).is_ok());
        assert_eq!(
            Hypersurface::new(s, v(&[0, 0, 0, 1])).unwrap_err(),
            SurfaceError::EmptySection
        );
        assert_eq!(
            Hypersurface::new(s, v(&[1, 0, 0, 1])).unwrap_err(),
            SurfaceError::EmptySection
        );
        // and dually for p = 0
        let s0 = space(0, 2);
        assert!(Hypersurface::new(s0, v(&[0, 0, 0, 1])).is_ok());
        assert_eq!(
            Hypersurface::new(s0, v(&[1, 0, 0, 0])).unwrap_err(),
            SurfaceError::EmptySection
        );
    }

    #[test]
    fn inversion_stabilizes_the_unit_curve() {
        let s = space(1, 1);
        let h = curve(s, 1);
        let w = ConformalMap::inversion(s);
        let image = act_hypersurface(&w, &h).unwrap();
        assert!(image.eq_up_to_scale(&h));
    }

    #[test]
    fn dilation_moves_unit_curve_to_level_four() {
        let s = space(1, 1);
        let h = curve(s, 1);
        let d = ConformalMap::dilation(s, &int(2)).unwrap();
        let image = act_hypersurface(&d, &h).unwrap();
        assert!(image.eq_up_to_scale(&curve(s, 4)));
        assert_eq!(image.canonical_normal(), v(&[5, 0, 0, -3]));
    }

    #[test]
    fn sign_is_invariant_under_the_action() {
        let s = space(1, 1);
        let m = ConformalMap::translation(s, &v(&[3, 1]))
            .unwrap()
            .compose(&ConformalMap::inversion(s))
            .unwrap()
            .compose(&ConformalMap::dilation(s, &rat(2, 5)).unwrap())
            .unwrap();
        for level in [1i64, -1] {
            let h = curve(s, level);
            assert_eq!(act_hypersurface(&m, &h).unwrap().sign(), h.sign());
        }
        let null = Hypersurface::new(s, v(&[1, 0, 0, 1])).unwrap();
        assert_eq!(act_hypersurface(&m, &null).unwrap().sign(), Sign::Zero);
    }

    #[test]
    fn orbits_of_hypersurfaces_follow_the_sign() {
        let s = space(1, 1);
        assert!(same_orbit_hypersurface(&curve(s, 1), &curve(s, 4)).unwrap());
        assert!(!same_orbit_hypersurface(&curve(s, 1), &curve(s, -1)).unwrap());
        let other = space(2, 0);
        assert_eq!(
            same_orbit_hypersurface(&curve(s, 1), &curve(other, 1)).unwrap_err(),
            SurfaceError::SpaceMismatch
        );
    }

    fn paper_surfaces() -> (SurfaceD, SurfaceD) {
        // the standard example in the lift of R^{2,2}: two 1-dimensional
        // surfaces with the same points but different signatures
        let s = space(2, 2);
        let v1 = v(&[1, 0, 0, 0, 0, 0]);
        let v2 = v(&[0, 1, 0, 0, 1, 0]);
        let v3 = v(&[0, 0, 1, 1, 0, 0]);
        let v4 = v(&[0, 0, 0, 0, 0, 1]);
        let h1 = ProjectiveSubspace::span_of_vectors(&[v1, v2.clone(), v3.clone()]).unwrap();
        let h2 = ProjectiveSubspace::span_of_vectors(&[v2, v3, v4]).unwrap();
        (
            make_surface(s, &h1).unwrap(),
            make_surface(s, &h2).unwrap(),
        )
    }

    #[test]
    fn semidefinite_rank_one_sections_are_accepted_with_signatures() {
        let (s1, s2) = paper_surfaces();
        assert_eq!(s1.d(), 1);
        assert_eq!(s2.d(), 1);
        assert_eq!(
            s1.signature(),
            Signature {
                n_plus: 1,
                n_minus: 0,
                n_zero: 2
            }
        );
        assert_eq!(
            s2.signature(),
            Signature {
                n_plus: 0,
                n_minus: 1,
                n_zero: 2
            }
        );
    }

    #[test]
    fn definite_plane_is_not_a_surface() {
        let s = space(2, 0);
        // span{e_0, e_1, e_2} restricts to diag(1,1,1): empty section
        let h = ProjectiveSubspace::span_of_vectors(&[
            v(&[1, 0, 0, 0]),
            v(&[0, 1, 0, 0]),
            v(&[0, 0, 1, 0]),
        ])
        .unwrap();
        assert_eq!(
            make_surface(s, &h).unwrap_err(),
            SurfaceError::NotASurface {
                expected: 1,
                got: IntersectionDim::Empty
            }
        );
    }

    #[test]
    fn equal_point_sets_with_different_signatures() {
        let (s1, s2) = paper_surfaces();
        // same linear locus, hence the same points
        assert!(surface_points_equal(&s1, &s2).unwrap());
        let w = ProjectiveSubspace::span_of_vectors(&[
            v(&[0, 1, 0, 0, 1, 0]),
            v(&[0, 0, 1, 1, 0, 0]),
        ])
        .unwrap();
        assert_eq!(s1.linear_locus().unwrap(), w);
        // but the realizations are inequivalent
        assert!(same_orbit_given_realizations(&s1, &s2, &WittParams::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn distinct_indefinite_curves_are_distinguished() {
        let s = space(1, 1);
        let h1 = curve(s, 1).hyperplane();
        let h2 = curve(s, -1).hyperplane();
        let s1 = make_surface(s, &h1).unwrap();
        let s2 = make_surface(s, &h2).unwrap();
        assert!(!s1.signature().is_semidefinite());
        assert!(!surface_points_equal(&s1, &s2).unwrap());
        assert!(surface_points_equal(&s1, &s1).unwrap());
    }

    #[test]
    fn orbit_witness_for_equal_level_curves() {
        let s = space(1, 1);
        let s1 = make_surface(s, &curve(s, 1).hyperplane()).unwrap();
        let s2 = make_surface(s, &curve(s, 4).hyperplane()).unwrap();
        let w = same_orbit_given_realizations(&s1, &s2, &WittParams::default())
            .unwrap()
            .expect("equal signatures");
        assert!(w.orth_residual <= 1e-9);
        assert!(w.image_residual <= 1e-9);
        // the witness maps the first subspace onto the second
        let m = &w.matrix;
        let rows: Vec<Vec<f64>> = s1
            .subspace()
            .basis()
            .iter_rows()
            .map(|row| m.mul_vec(&linalg::to_f64_vec(row)))
            .collect();
        for row in rows {
            let proj = project_residual_f64(&row, s2.subspace());
            assert!(proj < 1e-8, "image row leaves the target subspace: {proj}");
        }
    }

    fn project_residual_f64(x: &[f64], target: &ProjectiveSubspace) -> f64 {
        // distance from x to the row space of the target basis, via normal
        // equations; small ambient dimensions keep this stable enough
        let b = linalg::to_f64_mat(target.basis());
        let bt = b.transpose();
        let gram = b.matmul(&bt);
        let rhs = b.mul_vec(x);
        let sol = linalg::solve(&gram, &rhs, 1e-12).expect("independent basis rows");
        let recon = bt.mul_vec(&sol);
        x.iter()
            .zip(&recon)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn surface_transported_by_the_group_stays_in_orbit() {
        let s = space(1, 1);
        let s1 = make_surface(s, &curve(s, 1).hyperplane()).unwrap();
        let m = ConformalMap::translation(s, &v(&[1, 2]))
            .unwrap()
            .compose(&ConformalMap::dilation(s, &rat(3, 2)).unwrap())
            .unwrap();
        let s2 = act_surface(&m, &s1).unwrap();
        assert_eq!(s1.signature(), s2.signature());
        let w = same_orbit_given_realizations(&s1, &s2, &WittParams::default())
            .unwrap()
            .expect("transported surface keeps its signature");
        assert!(w.orth_residual <= 1e-9 && w.image_residual <= 1e-9);
    }

    #[test]
    fn circles_in_the_plane_are_all_equivalent() {
        // p=2, q=0: circles of different radius and center
        let s = space(2, 0);
        let unit = AffineQuadric::new(int(1), v(&[0, 0]), int(-1)).unwrap();
        // (x-3)^2 + y^2 = 4: Q(x) - 6 x_1 + 5 = 0
        let moved = AffineQuadric::new(int(1), v(&[-6, 0]), int(5)).unwrap();
        let h1 = affine_to_projective(s, &unit).unwrap().hyperplane();
        let h2 = affine_to_projective(s, &moved).unwrap().hyperplane();
        let s1 = make_surface(s, &h1).unwrap();
        let s2 = make_surface(s, &h2).unwrap();
        let w = definite_case_orbit(&s1, &s2, &WittParams::default()).unwrap();
        assert!(w.orth_residual <= 1e-9 && w.image_residual <= 1e-9);
        // identity works for a surface against itself
        let same = definite_case_orbit(&s1, &s1, &WittParams::default()).unwrap();
        assert!(same.orth_residual <= 1e-9);
    }

    #[test]
    fn circle_and_line_are_equivalent_in_the_plane() {
        let s = space(2, 0);
        let unit = AffineQuadric::new(int(1), v(&[0, 0]), int(-1)).unwrap();
        // the line x_1 = 0 (alpha = 0): its closure is a circle through
        // infinity
        let line = AffineQuadric::new(int(0), v(&[1, 0]), int(0)).unwrap();
        let s1 = make_surface(s, &affine_to_projective(s, &unit).unwrap().hyperplane()).unwrap();
        let s2 = make_surface(s, &affine_to_projective(s, &line).unwrap().hyperplane()).unwrap();
        let w = definite_case_orbit(&s1, &s2, &WittParams::default()).unwrap();
        assert!(w.orth_residual <= 1e-9 && w.image_residual <= 1e-9);
    }

    #[test]
    fn definite_case_needs_a_definite_space() {
        let s = space(1, 1);
        let s1 = make_surface(s, &curve(s, 1).hyperplane()).unwrap();
        assert_eq!(
            definite_case_orbit(&s1, &s1, &WittParams::default()).unwrap_err(),
            SurfaceError::NotDefiniteSpace
        );
    }

    #[test]
    fn float_frames_norm_check() {
        // circle sections force irrational frame scalings; the float path
        // must still deliver small residuals
        let s = space(2, 0);
        let a = AffineQuadric::new(int(1), v(&[0, 0]), int(-3)).unwrap();
        let b = AffineQuadric::new(int(1), v(&[-2, 2]), int(-1)).unwrap();
        let s1 = make_surface(s, &affine_to_projective(s, &a).unwrap().hyperplane()).unwrap();
        let s2 = make_surface(s, &affine_to_projective(s, &b).unwrap().hyperplane()).unwrap();
        let w = same_orbit_given_realizations(&s1, &s2, &WittParams::default())
            .unwrap()
            .expect("same signature in the definite case");
        assert!(w.orth_residual <= 1e-9);
        assert!(w.image_residual <= 1e-9);
        assert!(!w.is_exact() || w.orth_residual == 0.0);
    }

    #[test]
    fn eval_to_f64_on_curve_points() {
        // sanity: points of the moved circle satisfy its equation
        let s = space(2, 0);
        let moved = AffineQuadric::new(int(1), v(&[-6, 0]), int(5)).unwrap();
        assert_eq!(moved.eval(&s, &v(&[1, 0])).unwrap(), int(0));
        assert_eq!(moved.eval(&s, &v(&[5, 0])).unwrap(), int(0));
        assert_eq!(
            moved.eval(&s, &v(&[3, 2])).unwrap().to_f64().unwrap(),
            0.0
        );
    }
}
