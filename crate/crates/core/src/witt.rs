//! Constructive Witt extension: reflections, hyperbolic partners, and
//! orthogonal matrices carrying prescribed vectors onto prescribed targets.
//!
//! Everything is generic over the coefficient type. With `Rational`
//! coefficients the construction is exact: reflections only divide by values
//! of the form, never take roots. With `f64` coefficients every decision
//! (isotropy, independence, degeneracy) is made against scale-relative
//! thresholds from `WittParams`, and the final matrix is accepted only if
//! its orthogonality and image residuals pass `residual_tol`.
//!
//! The orbit-map entry points at the bottom connect this machinery to
//! hypersurfaces: two hypersurfaces of equal sign are related by a matrix
//! that maps normal line to normal line. The required scaling is a square
//! root, so those functions fall back to floats when the ratio is not a
//! perfect rational square; the witness records which path was taken.

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::forms::{diag_b, diag_q, LiftedSpace};
use crate::linalg::{self, FMat, Mat, RMat, Scalar};
use crate::quadric_surfaces::{Hypersurface, Sign};
use crate::scalar::{rational_sqrt, Rational};

/// Scale-relative thresholds for the float path. `scale` below always means
/// max(1, largest input magnitude); bilinear quantities compare against
/// tolerance times scale squared.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WittParams {
    /// Allowed disagreement of source and target pairings on input.
    pub gram_tol: f64,
    /// Residual budget for the returned matrix: image residuals may reach
    /// this times the input scale, the orthogonality defect this times the
    /// squared entry magnitude of the matrix itself.
    pub residual_tol: f64,
    /// Threshold below which a value of the form counts as zero.
    pub iso_tol: f64,
}

impl Default for WittParams {
    fn default() -> Self {
        WittParams {
            gram_tol: 1e-12,
            residual_tol: 1e-9,
            iso_tol: 1e-10,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum WittError {
    #[error("vector length {got} does not match ambient dimension {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("source and target counts differ: {sources} vs {targets}")]
    CountMismatch { sources: usize, targets: usize },
    #[error("the zero vector cannot be mapped")]
    ZeroVector,
    #[error("reflection vector is isotropic or nearly so")]
    IsotropicReflection,
    #[error("hyperbolic partner requires an isotropic vector")]
    NotIsotropic,
    #[error("vector is not orthogonal to the avoided set")]
    NotOrthogonalToAvoid,
    #[error("cannot decide isotropy this close to the cone")]
    AmbiguousIsotropy,
    #[error("source and target pairings disagree beyond tolerance")]
    GramMismatch,
    #[error("targets do not satisfy the linear relations of the sources")]
    InconsistentDependency,
    #[error("no hyperbolic partner exists in the admissible complement")]
    NoPartner,
    #[error("pairing block is degenerate; cannot continue matching")]
    DegenerateBlock,
    #[error("hypersurfaces live in different spaces")]
    SpaceMismatch,
    #[error("hypersurfaces lie in different orbits (sign mismatch)")]
    SignMismatch,
    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualExceeded { residual: f64, tol: f64 },
}

fn check_len(expected: usize, got: usize) -> Result<(), WittError> {
    if expected == got {
        Ok(())
    } else {
        Err(WittError::ShapeMismatch { expected, got })
    }
}

fn vsub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() - y.clone())
        .collect()
}

fn vadd<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() + y.clone())
        .collect()
}

/// a - c*b componentwise.
fn vsub_scaled<T: Scalar>(a: &[T], c: &T, b: &[T]) -> Vec<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() - c.clone() * y.clone())
        .collect()
}

/// a + c*b componentwise.
fn vadd_scaled<T: Scalar>(a: &[T], c: &T, b: &[T]) -> Vec<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() + c.clone() * y.clone())
        .collect()
}

fn vscale<T: Scalar>(c: &T, v: &[T]) -> Vec<T> {
    v.iter().map(|x| c.clone() * x.clone()).collect()
}

fn sign_diag_t<T: Scalar>(signs: &[i8]) -> Mat<T> {
    let diag: Vec<T> = signs
        .iter()
        .map(|&s| if s > 0 { T::one() } else { -T::one() })
        .collect();
    Mat::from_diag(&diag)
}

/// max(1, largest magnitude over all listed vectors).
fn tuple_scale<T: Scalar>(lists: &[&[Vec<T>]]) -> f64 {
    let mut s = 1.0f64;
    for list in lists {
        for v in list.iter() {
            s = s.max(linalg::vec_max_magnitude(v));
        }
    }
    s
}

fn image_residual<T: Scalar>(m: &Mat<T>, u: &[T], v: &[T]) -> f64 {
    m.mul_vec(u)
        .iter()
        .zip(v)
        .map(|(a, b)| (a.clone() - b.clone()).magnitude())
        .fold(0.0, f64::max)
}

fn orthogonality_residual<T: Scalar>(signs: &[i8], m: &Mat<T>) -> f64 {
    let j = sign_diag_t::<T>(signs);
    m.transpose().matmul(&j).matmul(m).sub(&j).max_magnitude()
}

/// Reflection in the hyperplane orthogonal to w:
/// tau_w(x) = x - 2 B(x,w)/Q(w) * w. Requires Q(w) != 0.
pub fn reflection<T: Scalar>(
    space: &LiftedSpace,
    w: &[T],
    params: &WittParams,
) -> Result<Mat<T>, WittError> {
    reflection_in(&space.signs(), w, params)
}

fn reflection_in<T: Scalar>(signs: &[i8], w: &[T], params: &WittParams) -> Result<Mat<T>, WittError> {
    check_len(signs.len(), w.len())?;
    let qw = diag_q(signs, w);
    let scale = linalg::vec_max_magnitude(w).max(1.0);
    if qw.negligible(params.iso_tol * scale * scale) {
        return Err(WittError::IsotropicReflection);
    }
    let two = T::one() + T::one();
    let n = signs.len();
    Ok(Mat::from_fn(n, n, |i, j| {
        let jw = if signs[j] > 0 {
            w[j].clone()
        } else {
            -w[j].clone()
        };
        let term = two.clone() * w[i].clone() * jw / qw.clone();
        if i == j {
            T::one() - term
        } else {
            -term
        }
    }))
}

/// Isotropic w', orthogonal to everything in `avoid`, with B(w, w') = 1.
/// Preconditions: Q(w) = 0, w != 0, and w itself orthogonal to `avoid`.
pub fn hyperbolic_partner<T: Scalar>(
    space: &LiftedSpace,
    w: &[T],
    avoid: &[Vec<T>],
    params: &WittParams,
) -> Result<Vec<T>, WittError> {
    hyperbolic_partner_in(&space.signs(), w, avoid, params)
}

fn hyperbolic_partner_in<T: Scalar>(
    signs: &[i8],
    w: &[T],
    avoid: &[Vec<T>],
    params: &WittParams,
) -> Result<Vec<T>, WittError> {
    let n = signs.len();
    check_len(n, w.len())?;
    for a in avoid {
        check_len(n, a.len())?;
    }
    if w.iter().all(Zero::is_zero) {
        return Err(WittError::ZeroVector);
    }
    let scale = tuple_scale(&[&[w.to_vec()], avoid]);
    let qtol = params.iso_tol * scale * scale;
    if !diag_q(signs, w).negligible(qtol) {
        return Err(WittError::NotIsotropic);
    }
    for a in avoid {
        if !diag_b(signs, w, a).negligible(qtol) {
            return Err(WittError::NotOrthogonalToAvoid);
        }
    }
    // candidate directions spanning the orthogonal complement of `avoid`
    let candidates: Vec<Vec<T>> = if avoid.is_empty() {
        (0..n)
            .map(|i| {
                let mut e = vec![T::zero(); n];
                e[i] = T::one();
                e
            })
            .collect()
    } else {
        let pairing_rows = Mat::from_fn(avoid.len(), n, |i, j| {
            if signs[j] > 0 {
                avoid[i][j].clone()
            } else {
                -avoid[i][j].clone()
            }
        });
        linalg::nullspace(&pairing_rows, params.iso_tol * scale)
    };
    // pick the candidate pairing most strongly with w, relative to its size
    let mut best: Option<(Vec<T>, T, f64)> = None;
    for z in candidates {
        let b = diag_b(signs, w, &z);
        if b.negligible(qtol) {
            continue;
        }
        let score = b.magnitude() / linalg::vec_max_magnitude(&z).max(1.0);
        if best.as_ref().map_or(true, |(_, _, s)| score > *s) {
            best = Some((z, b, score));
        }
    }
    let (z, bwz, _) = best.ok_or(WittError::NoPartner)?;
    // w' = z/B(w,z) - Q(z)/(2 B(w,z)^2) * w: isotropic, pairs to exactly 1
    let two = T::one() + T::one();
    let inv = T::one() / bwz.clone();
    let coef = diag_q(signs, &z) / (two * bwz.clone() * bwz);
    Ok(vsub_scaled(&vscale(&inv, &z), &coef, w))
}

fn classify_isotropy<T: Scalar>(q: &T, scale: f64, params: &WittParams) -> Result<bool, WittError> {
    if T::EXACT {
        return Ok(q.is_zero());
    }
    let m = q.magnitude();
    let tol = params.iso_tol * scale * scale;
    if m <= tol {
        Ok(true)
    } else if m <= 1e3 * tol {
        Err(WittError::AmbiguousIsotropy)
    } else {
        Ok(false)
    }
}

/// Orthogonal M with M u = v, for Q(u) = Q(v) and u, v nonzero.
pub fn map_vector<T: Scalar>(
    space: &LiftedSpace,
    u: &[T],
    v: &[T],
    params: &WittParams,
) -> Result<Mat<T>, WittError> {
    map_vector_in(&space.signs(), u, v, params)
}

fn map_vector_in<T: Scalar>(
    signs: &[i8],
    u: &[T],
    v: &[T],
    params: &WittParams,
) -> Result<Mat<T>, WittError> {
    let n = signs.len();
    check_len(n, u.len())?;
    check_len(n, v.len())?;
    if u.iter().all(Zero::is_zero) || v.iter().all(Zero::is_zero) {
        return Err(WittError::ZeroVector);
    }
    let scale = tuple_scale(&[&[u.to_vec(), v.to_vec()]]);
    let qu = diag_q(signs, u);
    let qv = diag_q(signs, v);
    if !(qu.clone() - qv.clone()).negligible(params.gram_tol * scale * scale) {
        return Err(WittError::GramMismatch);
    }
    let u_iso = classify_isotropy(&qu, scale, params)?;
    let v_iso = classify_isotropy(&qv, scale, params)?;
    if u_iso != v_iso {
        return Err(WittError::GramMismatch);
    }
    if u_iso {
        map_isotropic(signs, u, v, params)
    } else {
        map_anisotropic(signs, u, v, params)
    }
}

/// Anisotropic case. Reflect in u - v when that vector is anisotropic;
/// otherwise reflect in u + v and then in v. The identity is kept as a
/// third candidate: when u and v agree to working precision, u - v is pure
/// noise and reflecting in it is hopeless, while doing nothing already
/// achieves the attainable floor. Smallest image residual wins.
fn map_anisotropic<T: Scalar>(
    signs: &[i8],
    u: &[T],
    v: &[T],
    params: &WittParams,
) -> Result<Mat<T>, WittError> {
    let id = Mat::identity(signs.len());
    let mut best: (Mat<T>, f64) = (id.clone(), image_residual(&id, u, v));
    if let Ok(t) = reflection_in(signs, &vsub(u, v), params) {
        let r = image_residual(&t, u, v);
        if r < best.1 {
            best = (t, r);
        }
    }
    if let (Ok(t1), Ok(t2)) = (
        reflection_in(signs, &vadd(u, v), params),
        reflection_in(signs, v, params),
    ) {
        let m = t2.matmul(&t1);
        let r = image_residual(&m, u, v);
        if r < best.1 {
            best = (m, r);
        }
    }
    Ok(best.0)
}

/// Isotropic case. A single reflection works when B(u,v) != 0; otherwise
/// route through an intermediate isotropic z pairing with both, built from
/// hyperbolic partners.
fn map_isotropic<T: Scalar>(
    signs: &[i8],
    u: &[T],
    v: &[T],
    params: &WittParams,
) -> Result<Mat<T>, WittError> {
    let scale = tuple_scale(&[&[u.to_vec(), v.to_vec()]]);
    let btol = params.iso_tol * scale * scale;
    if !diag_b(signs, u, v).negligible(btol) {
        // Q(u - v) = -2 B(u,v) != 0 and the reflection swaps u and v
        return reflection_in(signs, &vsub(u, v), params);
    }
    let up = hyperbolic_partner_in(signs, u, &[], params)?;
    let z = if !diag_b(signs, &up, v).negligible(btol) {
        up
    } else {
        let vp = hyperbolic_partner_in(signs, v, &[], params)?;
        if !diag_b(signs, u, &vp).negligible(btol) {
            vp
        } else {
            // z = u' + v' - B(u',v') u pairs to 1 with both u and v
            let c = diag_b(signs, &up, &vp);
            vsub_scaled(&vadd(&up, &vp), &c, u)
        }
    };
    let t1 = reflection_in(signs, &vsub(u, &z), params)?;
    let t2 = reflection_in(signs, &vsub(&z, v), params)?;
    Ok(t2.matmul(&t1))
}

/// Vectors to be matched onto targets by a single orthogonal matrix.
/// Feasibility requires the pairings to agree: B(u_i, u_j) = B(v_i, v_j).
#[derive(Clone, Debug)]
pub struct IsometryProblem<T: Scalar> {
    space: LiftedSpace,
    sources: Vec<Vec<T>>,
    targets: Vec<Vec<T>>,
}

impl<T: Scalar> IsometryProblem<T> {
    pub fn new(
        space: LiftedSpace,
        sources: Vec<Vec<T>>,
        targets: Vec<Vec<T>>,
    ) -> Result<Self, WittError> {
        if sources.len() != targets.len() {
            return Err(WittError::CountMismatch {
                sources: sources.len(),
                targets: targets.len(),
            });
        }
        for v in sources.iter().chain(targets.iter()) {
            check_len(space.dim(), v.len())?;
        }
        Ok(IsometryProblem {
            space,
            sources,
            targets,
        })
    }

    pub fn space(&self) -> LiftedSpace {
        self.space
    }

    pub fn sources(&self) -> &[Vec<T>] {
        &self.sources
    }

    pub fn targets(&self) -> &[Vec<T>] {
        &self.targets
    }
}

/// Orthogonal M with M u_i = v_i for every pair of the problem.
///
/// Dependent sources are reduced to an independent subset after checking
/// that the targets satisfy the same linear relations (Gram agreement alone
/// does not imply that). Radical vectors of the independent span are matched
/// first, each through a fresh hyperbolic partner appended on both sides;
/// the remaining nondegenerate block is matched one vector at a time by
/// reflections taken inside the orthogonal complement of what is already
/// matched.
pub fn extend_isometry<T: Scalar>(
    prob: &IsometryProblem<T>,
    params: &WittParams,
) -> Result<Mat<T>, WittError> {
    let signs = prob.space.signs();
    let n = signs.len();
    let k = prob.sources.len();
    if k == 0 {
        return Ok(Mat::identity(n));
    }
    let scale = tuple_scale(&[&prob.sources, &prob.targets]);
    let lin_tol = params.iso_tol * scale;
    let quad_tol = params.iso_tol * scale * scale;

    for i in 0..k {
        for j in 0..=i {
            let gs = diag_b(&signs, &prob.sources[i], &prob.sources[j]);
            let gt = diag_b(&signs, &prob.targets[i], &prob.targets[j]);
            if !(gs - gt).negligible(params.gram_tol * scale * scale) {
                return Err(WittError::GramMismatch);
            }
        }
    }

    // independent subset of the sources, in input order
    let mut indep: Vec<usize> = Vec::new();
    for i in 0..k {
        let mut rows: Vec<Vec<T>> = indep.iter().map(|&t| prob.sources[t].clone()).collect();
        rows.push(prob.sources[i].clone());
        if linalg::rank(&Mat::from_rows(rows), lin_tol) == indep.len() + 1 {
            indep.push(i);
        }
    }
    if indep.is_empty() {
        // every source is zero; that maps onto zero targets and nothing else
        for t in &prob.targets {
            if t.iter().any(|c| !c.negligible(lin_tol)) {
                return Err(WittError::InconsistentDependency);
            }
        }
        return Ok(Mat::identity(n));
    }
    // matching the independent subset determines the rest; the targets must
    // be consistent with that
    let tgt_rows: Vec<Vec<T>> = indep.iter().map(|&t| prob.targets[t].clone()).collect();
    if linalg::rank(&Mat::from_rows(tgt_rows), lin_tol) < indep.len() {
        return Err(WittError::InconsistentDependency);
    }
    if indep.len() < k {
        let basis_cols = Mat::from_fn(n, indep.len(), |r, c| prob.sources[indep[c]][r].clone());
        for i in 0..k {
            if indep.contains(&i) {
                continue;
            }
            let coeffs = linalg::solve(&basis_cols, &prob.sources[i], lin_tol)
                .ok_or(WittError::InconsistentDependency)?;
            let mut pred = vec![T::zero(); n];
            for (c, &idx) in coeffs.iter().zip(&indep) {
                for r in 0..n {
                    pred[r] = pred[r].clone() + c.clone() * prob.targets[idx][r].clone();
                }
            }
            if vsub(&pred, &prob.targets[i])
                .iter()
                .any(|d| !d.negligible(lin_tol.max(params.gram_tol * scale)))
            {
                return Err(WittError::InconsistentDependency);
            }
        }
    }

    let u: Vec<Vec<T>> = indep.iter().map(|&t| prob.sources[t].clone()).collect();
    let v: Vec<Vec<T>> = indep.iter().map(|&t| prob.targets[t].clone()).collect();
    let r = u.len();

    // split off the radical of the source span
    let gram = Mat::from_fn(r, r, |i, j| diag_b(&signs, &u[i], &u[j]));
    let rad_coeffs = linalg::nullspace(&gram, quad_tol);
    let rad_dim = rad_coeffs.len();
    let combine = |vecs: &[Vec<T>], coeffs: &[T]| -> Vec<T> {
        let mut out = vec![T::zero(); n];
        for (c, vec) in coeffs.iter().zip(vecs) {
            for i in 0..n {
                out[i] = out[i].clone() + c.clone() * vec[i].clone();
            }
        }
        out
    };
    let z_src: Vec<Vec<T>> = rad_coeffs.iter().map(|c| combine(&u, c)).collect();
    let z_tgt: Vec<Vec<T>> = rad_coeffs.iter().map(|c| combine(&v, c)).collect();
    // complement: input vectors whose coefficient directions complete the
    // radical to a basis
    let mut comp: Vec<usize> = Vec::new();
    {
        let mut rows: Vec<Vec<T>> = rad_coeffs.clone();
        let mut rank_now = rad_dim;
        for j in 0..r {
            if rank_now == r {
                break;
            }
            let mut e = vec![T::zero(); r];
            e[j] = T::one();
            rows.push(e);
            if linalg::rank(&Mat::from_rows(rows.clone()), lin_tol) == rank_now + 1 {
                comp.push(j);
                rank_now += 1;
            } else {
                rows.pop();
            }
        }
    }
    let w_src: Vec<Vec<T>> = comp.iter().map(|&j| u[j].clone()).collect();
    let w_tgt: Vec<Vec<T>> = comp.iter().map(|&j| v[j].clone()).collect();

    // every radical vector consumes a fresh hyperbolic partner, kept
    // orthogonal to everything else being matched
    let mut p_src: Vec<Vec<T>> = Vec::new();
    let mut p_tgt: Vec<Vec<T>> = Vec::new();
    for i in 0..rad_dim {
        let mut avoid_s: Vec<Vec<T>> = w_src.clone();
        let mut avoid_t: Vec<Vec<T>> = w_tgt.clone();
        for (l, (zs, zt)) in z_src.iter().zip(&z_tgt).enumerate() {
            if l != i {
                avoid_s.push(zs.clone());
                avoid_t.push(zt.clone());
            }
        }
        avoid_s.extend(p_src.iter().cloned());
        avoid_t.extend(p_tgt.iter().cloned());
        p_src.push(hyperbolic_partner_in(&signs, &z_src[i], &avoid_s, params)?);
        p_tgt.push(hyperbolic_partner_in(&signs, &z_tgt[i], &avoid_t, params)?);
    }

    let mut srcs: Vec<Vec<T>> = Vec::new();
    let mut tgts: Vec<Vec<T>> = Vec::new();
    for i in 0..rad_dim {
        srcs.push(z_src[i].clone());
        srcs.push(p_src[i].clone());
        tgts.push(z_tgt[i].clone());
        tgts.push(p_tgt[i].clone());
    }
    srcs.extend(w_src);
    tgts.extend(w_tgt);

    let m = match_nondeg(&signs, &srcs, &tgts, params, scale)?;

    // acceptance: residuals on the original problem, not the augmented one.
    // the orthogonality defect of a float product is quadratic in the entry
    // magnitudes of the matrix, so it is judged against those; the image
    // residual is judged against the input scale
    let orth = orthogonality_residual(&signs, &m);
    let img = prob
        .sources
        .iter()
        .zip(&prob.targets)
        .map(|(s, t)| image_residual(&m, s, t))
        .fold(0.0, f64::max);
    if T::EXACT {
        debug_assert_eq!(orth, 0.0);
        debug_assert_eq!(img, 0.0);
    }
    let m_scale = m.max_magnitude().max(1.0);
    let orth_tol = params.residual_tol * m_scale * m_scale;
    if orth > orth_tol {
        return Err(WittError::ResidualExceeded {
            residual: orth,
            tol: orth_tol,
        });
    }
    let img_tol = params.residual_tol * scale;
    if img > img_tol {
        return Err(WittError::ResidualExceeded {
            residual: img,
            tol: img_tol,
        });
    }
    Ok(m)
}

/// Matching for lists with nondegenerate pairing Gram and equal pairings on
/// both sides. Matches one pair per step, then recurses in its orthogonal
/// complement; all reflections used later are orthogonal to the already
/// matched targets, so earlier matches are preserved.
///
/// The pair matched at each step is chosen for conditioning: every later
/// projection divides by the form value of the matched target, so the front
/// is the candidate whose form value is largest relative to its squared
/// size. Candidates are the input pairs plus small mixtures u_i + c*u_j;
/// matching a mixture is enough, because once u_j is matched too, u_i
/// follows by linearity. If every candidate is (near-)isotropic the Gram
/// was degenerate after all and matching stops.
fn match_nondeg<T: Scalar>(
    signs: &[i8],
    src: &[Vec<T>],
    tgt: &[Vec<T>],
    params: &WittParams,
    scale: f64,
) -> Result<Mat<T>, WittError> {
    let n = signs.len();
    if src.is_empty() {
        return Ok(Mat::identity(n));
    }
    // projections inflate the vectors from level to level; the isotropy
    // threshold has to follow the data actually present
    let scale = scale.max(tuple_scale(&[src, tgt]));
    let qtol = params.iso_tol * scale * scale;

    // (front source, front target, index the front replaces)
    let mut cands: Vec<(Vec<T>, Vec<T>, usize)> = Vec::new();
    for i in 0..src.len() {
        cands.push((src[i].clone(), tgt[i].clone(), i));
    }
    let two = T::one() + T::one();
    let coeffs = [T::one(), -T::one(), two.clone(), -two];
    for i in 0..src.len() {
        for j in 0..src.len() {
            if i == j {
                continue;
            }
            for c in &coeffs {
                cands.push((
                    vadd_scaled(&src[i], c, &src[j]),
                    vadd_scaled(&tgt[i], c, &tgt[j]),
                    i,
                ));
            }
        }
    }
    let mut best: Option<(f64, usize)> = None;
    for (idx, (u, v, _)) in cands.iter().enumerate() {
        if diag_q(signs, u).negligible(qtol) {
            continue;
        }
        let size = linalg::vec_max_magnitude(u)
            .max(linalg::vec_max_magnitude(v))
            .max(1.0);
        let sc = diag_q(signs, u).magnitude() / (size * size);
        if best.map_or(true, |(b, _)| sc > b) {
            best = Some((sc, idx));
        }
    }
    let (_, pick) = best.ok_or(WittError::DegenerateBlock)?;
    let (u0, v0, f) = cands.swap_remove(pick);

    let sigma = map_anisotropic(signs, &u0, &v0, params)?;
    let q_front = diag_q(signs, &v0);
    let mut next_src = Vec::with_capacity(src.len() - 1);
    let mut next_tgt = Vec::with_capacity(tgt.len() - 1);
    for j in 0..src.len() {
        if j == f {
            continue;
        }
        let img = sigma.mul_vec(&src[j]);
        let c = diag_b(signs, &tgt[j], &v0) / q_front.clone();
        next_src.push(vsub_scaled(&img, &c, &v0));
        next_tgt.push(vsub_scaled(&tgt[j], &c, &v0));
    }
    let rest = match_nondeg(signs, &next_src, &next_tgt, params, scale)?;
    Ok(rest.matmul(&sigma))
}

/// An orthogonal matrix together with the evidence it was accepted on.
/// `exact` carries the rational matrix when the construction stayed exact,
/// in which case both residuals are genuinely zero.
#[derive(Clone, Debug)]
pub struct OrthogonalWitness {
    pub matrix: FMat,
    pub exact: Option<RMat>,
    pub orth_residual: f64,
    pub image_residual: f64,
}

impl OrthogonalWitness {
    pub(crate) fn from_exact(
        signs: &[i8],
        m: RMat,
        pairs: &[(Vec<Rational>, Vec<Rational>)],
    ) -> Self {
        assert_eq!(orthogonality_residual(signs, &m), 0.0);
        for (s, t) in pairs {
            assert_eq!(image_residual(&m, s, t), 0.0);
        }
        OrthogonalWitness {
            matrix: linalg::to_f64_mat(&m),
            exact: Some(m),
            orth_residual: 0.0,
            image_residual: 0.0,
        }
    }

    pub(crate) fn from_float(
        signs: &[i8],
        m: FMat,
        pairs: &[(Vec<f64>, Vec<f64>)],
        params: &WittParams,
    ) -> Result<Self, WittError> {
        let orth = orthogonality_residual(signs, &m);
        let mut img = 0.0f64;
        let mut scale = 1.0f64;
        for (s, t) in pairs {
            img = img.max(image_residual(&m, s, t));
            scale = scale
                .max(linalg::vec_max_magnitude(s))
                .max(linalg::vec_max_magnitude(t));
        }
        let m_scale = m.max_magnitude().max(1.0);
        let orth_tol = params.residual_tol * m_scale * m_scale;
        if orth > orth_tol {
            return Err(WittError::ResidualExceeded {
                residual: orth,
                tol: orth_tol,
            });
        }
        let img_tol = params.residual_tol * scale;
        if img > img_tol {
            return Err(WittError::ResidualExceeded {
                residual: img,
                tol: img_tol,
            });
        }
        Ok(OrthogonalWitness {
            matrix: m,
            exact: None,
            orth_residual: orth,
            image_residual: img,
        })
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }
}

/// Orthogonal matrix carrying one hypersurface onto another of the same
/// sign. The normal of the target is rescaled by sqrt(Q(a)/Q(a')) first;
/// when that ratio is a perfect rational square the whole construction is
/// exact. Zero-sign pairs are delegated to `orbit_map_null`.
pub fn orbit_map_hypersurface(
    h1: &Hypersurface,
    h2: &Hypersurface,
    params: &WittParams,
) -> Result<OrthogonalWitness, WittError> {
    if h1.space() != h2.space() {
        return Err(WittError::SpaceMismatch);
    }
    if h1.sign() != h2.sign() {
        return Err(WittError::SignMismatch);
    }
    if h1.sign() == Sign::Zero {
        return orbit_map_null(h1, h2, params);
    }
    let space = h1.space();
    let signs = space.signs();
    let a = h1.normal();
    let b = h2.normal();
    let qa = space.eval_q(a).expect("normal length enforced by type");
    let qb = space.eval_q(b).expect("normal length enforced by type");
    let ratio = qa / qb;
    if let Some(lambda) = rational_sqrt(&ratio) {
        let target = vscale(&lambda, b);
        let m = map_vector_in(&signs, a, &target, params)?;
        Ok(OrthogonalWitness::from_exact(
            &signs,
            m,
            &[(a.to_vec(), target)],
        ))
    } else {
        let lambda = ratio.to_f64().expect("scaling ratio fits binary64").sqrt();
        let af = linalg::to_f64_vec(a);
        let target: Vec<f64> = linalg::to_f64_vec(b).iter().map(|x| x * lambda).collect();
        let m = map_vector_in(&signs, &af, &target, params)?;
        OrthogonalWitness::from_float(&signs, m, &[(af, target)], params)
    }
}

/// Orthogonal matrix carrying one zero-sign hypersurface onto another.
/// Both normals are isotropic, so no scaling is needed and the result is
/// always exact for rational input.
pub fn orbit_map_null(
    h1: &Hypersurface,
    h2: &Hypersurface,
    params: &WittParams,
) -> Result<OrthogonalWitness, WittError> {
    if h1.space() != h2.space() {
        return Err(WittError::SpaceMismatch);
    }
    if h1.sign() != Sign::Zero || h2.sign() != Sign::Zero {
        return Err(WittError::SignMismatch);
    }
    let space = h1.space();
    let signs = space.signs();
    let a = h1.normal().to_vec();
    let b = h2.normal().to_vec();
    let m = map_vector_in(&signs, &a, &b, params)?;
    Ok(OrthogonalWitness::from_exact(&signs, m, &[(a, b)]))
}
