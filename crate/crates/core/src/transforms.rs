//! Conformal transformations of the compactified space, modeled as rational
//! orthogonal matrices of the lifted form.
//!
//! A matrix M with M^T J^ M = J^ acts projectively on the null quadric and,
//! through the embedding, conformally on R^{p,q} wherever the image stays
//! finite. The classical generators all have exact rational lifts:
//!
//! * translation by b: affine x -> x + b
//! * rotation by R in O(p,q): x -> Rx, lift diag(1, R, 1)
//! * dilation by lambda > 0: x -> lambda x
//! * inversion: x -> x / Q(x), lift diag(-1, 1, ..., 1)
//!
//! `decompose` peels any orthogonal matrix back into such a word, exactly,
//! with the lift of the word reproducing the matrix up to overall sign (the
//! kernel of the projective action).

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::forms::{FormsError, LiftedSpace, QuadraticSpace};
use crate::linalg::{Mat, RMat};
use crate::projective::{self, ProjectiveError, ProjectivePoint};
use crate::scalar::{int, Rational};

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("matrix must be {expected}x{expected} for this space, got {rows}x{cols}")]
    BadShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("matrix does not preserve the lifted form")]
    NotOrthogonal,
    #[error("rotation block does not preserve the base form")]
    NotBaseOrthogonal,
    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(String),
    #[error("maps belong to different spaces")]
    SpaceMismatch,
    #[error("stencil point maps to infinity, conformal factor undefined here")]
    UndefinedAtStencil,
    #[error("step size must be positive and finite")]
    BadStep,
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
}

/// Element of the orthogonal group of the lifted form, acting conformally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConformalMap {
    space: QuadraticSpace,
    matrix: RMat,
}

/// Check M^T J^ M = J^ exactly.
pub fn verify_orthogonal(lifted: &LiftedSpace, m: &RMat) -> bool {
    let n = lifted.dim();
    if m.rows() != n || m.cols() != n {
        return false;
    }
    let j = lifted.gram().matrix().clone();
    m.transpose().matmul(&j).matmul(m) == j
}

impl ConformalMap {
    pub fn from_matrix(space: QuadraticSpace, matrix: RMat) -> Result<Self, TransformError> {
        let n = space.lift().dim();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(TransformError::BadShape {
                expected: n,
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if !verify_orthogonal(&space.lift(), &matrix) {
            return Err(TransformError::NotOrthogonal);
        }
        Ok(ConformalMap { space, matrix })
    }

    pub fn identity(space: QuadraticSpace) -> Self {
        ConformalMap {
            space,
            matrix: Mat::identity(space.lift().dim()),
        }
    }

    /// x -> x + b.
    pub fn translation(space: QuadraticSpace, b: &[Rational]) -> Result<Self, TransformError> {
        let n = space.dim();
        let qb = space.eval_q(b)?;
        let half = Rational::new(1.into(), 2.into());
        let half_q = qb * &half;
        let signs = space.signs();
        let matrix = Mat::from_fn(n + 2, n + 2, |i, j| {
            match (i, j) {
                (0, 0) => Rational::one() - &half_q,
                (0, j) if j <= n => {
                    let t = -b[j - 1].clone();
                    if signs[j - 1] > 0 {
                        t
                    } else {
                        -t
                    }
                }
                (0, _) => -half_q.clone(),
                (i, 0) if i <= n => b[i - 1].clone(),
                (i, j) if i <= n && j <= n => {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                }
                (i, _) if i <= n => b[i - 1].clone(),
                (_, 0) => half_q.clone(),
                (_, j) if j <= n => {
                    if signs[j - 1] > 0 {
                        b[j - 1].clone()
                    } else {
                        -b[j - 1].clone()
                    }
                }
                _ => Rational::one() + &half_q,
            }
        });
        debug_assert!(verify_orthogonal(&space.lift(), &matrix));
        Ok(ConformalMap { space, matrix })
    }

    /// x -> Rx for R preserving the base form.
    pub fn rotation(space: QuadraticSpace, r: &RMat) -> Result<Self, TransformError> {
        let n = space.dim();
        if r.rows() != n || r.cols() != n {
            return Err(TransformError::BadShape {
                expected: n,
                rows: r.rows(),
                cols: r.cols(),
            });
        }
        let j = space.gram().matrix().clone();
        if r.transpose().matmul(&j).matmul(r) != j {
            return Err(TransformError::NotBaseOrthogonal);
        }
        let matrix = Mat::from_fn(n + 2, n + 2, |i, jx| {
            if i == 0 || i == n + 1 {
                if i == jx {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            } else if jx >= 1 && jx <= n {
                r.at(i - 1, jx - 1).clone()
            } else {
                Rational::zero()
            }
        });
        Ok(ConformalMap { space, matrix })
    }

    /// x -> lambda x, lambda > 0.
    pub fn dilation(space: QuadraticSpace, lambda: &Rational) -> Result<Self, TransformError> {
        if !lambda.is_positive() {
            return Err(TransformError::NonPositiveDilation(
                crate::scalar::format_rational(lambda),
            ));
        }
        let n = space.dim();
        let inv = Rational::one() / lambda;
        let half = Rational::new(1.into(), 2.into());
        let c = (&inv + lambda) * &half;
        let d = (&inv - lambda) * &half;
        let matrix = Mat::from_fn(n + 2, n + 2, |i, j| match (i, j) {
            (0, 0) => c.clone(),
            (0, j) if j == n + 1 => d.clone(),
            (i, 0) if i == n + 1 => d.clone(),
            (i, j) if i == n + 1 && j == n + 1 => c.clone(),
            (i, j) if i == j => Rational::one(),
            _ => Rational::zero(),
        });
        debug_assert!(verify_orthogonal(&space.lift(), &matrix));
        Ok(ConformalMap { space, matrix })
    }

    /// x -> x / Q(x).
    pub fn inversion(space: QuadraticSpace) -> Self {
        let n = space.lift().dim();
        let matrix = Mat::from_fn(n, n, |i, j| {
            if i != j {
                Rational::zero()
            } else if i == 0 {
                -Rational::one()
            } else {
                Rational::one()
            }
        });
        ConformalMap { space, matrix }
    }

    pub fn space(&self) -> QuadraticSpace {
        self.space
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    /// self after other: (self.compose(other)).act = self.act . other.act.
    pub fn compose(&self, other: &Self) -> Result<Self, TransformError> {
        if self.space != other.space {
            return Err(TransformError::SpaceMismatch);
        }
        Ok(ConformalMap {
            space: self.space,
            matrix: self.matrix.matmul(&other.matrix),
        })
    }

    /// Exact inverse, J^ M^T J^ by orthogonality.
    pub fn inverse(&self) -> Self {
        let j = self.space.lift().gram().matrix().clone();
        ConformalMap {
            space: self.space,
            matrix: j.matmul(&self.matrix.transpose()).matmul(&j),
        }
    }

    /// Same projective action: equal matrices up to overall sign.
    pub fn eq_up_to_sign(&self, other: &Self) -> bool {
        self.space == other.space
            && (self.matrix == other.matrix || self.matrix == other.matrix.neg())
    }

    /// Apply the lifted matrix to a raw coordinate vector.
    pub fn apply_to_vector(&self, v: &[Rational]) -> Result<Vec<Rational>, TransformError> {
        let n = self.space.lift().dim();
        if v.len() != n {
            return Err(TransformError::BadShape {
                expected: n,
                rows: v.len(),
                cols: 1,
            });
        }
        Ok(self.matrix.mul_vec(v))
    }

    /// Action on points of the null quadric.
    pub fn act_point(&self, p: &ProjectivePoint) -> Result<ProjectivePoint, TransformError> {
        if !projective::on_quadric(&self.space, p)? {
            return Err(TransformError::Projective(ProjectiveError::NotOnQuadric));
        }
        let image = self.matrix.mul_vec(p.coords());
        Ok(ProjectivePoint::new(image).expect("orthogonal image of nonzero vector is nonzero"))
    }

    /// Conformal action on an affine point; Ok(None) when the image is at
    /// infinity (for inversion-type maps this is the light cone of a point).
    pub fn act_affine(&self, x: &[Rational]) -> Result<Option<Vec<Rational>>, TransformError> {
        let p = projective::embed(&self.space, x)?;
        let image = self.matrix.mul_vec(p.coords());
        let image = ProjectivePoint::new(image).expect("orthogonal image is nonzero");
        Ok(projective::unembed(&self.space, &image)?)
    }

    /// Float version of `act_affine` for sampling-heavy callers.
    pub fn act_affine_f64(&self, x: &[f64]) -> Option<Vec<f64>> {
        debug_assert_eq!(x.len(), self.space.dim());
        let xi = projective::embed_f64(&self.space, x);
        let m = crate::linalg::to_f64_mat(&self.matrix);
        let image = m.mul_vec(&xi);
        projective::unembed_f64(&self.space, &image)
    }

    /// Peel into translation / rotation / dilation / inversion generators.
    /// The returned word lifts back to this matrix up to overall sign.
    pub fn decompose(&self) -> GeneratorWord {
        decompose(self)
    }
}

/// One classical generator of the conformal group.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Translate(Vec<Rational>),
    Rotate(RMat),
    Dilate(Rational),
    Invert,
}

impl Generator {
    pub fn lift(&self, space: QuadraticSpace) -> Result<ConformalMap, TransformError> {
        match self {
            Generator::Translate(b) => ConformalMap::translation(space, b),
            Generator::Rotate(r) => ConformalMap::rotation(space, r),
            Generator::Dilate(l) => ConformalMap::dilation(space, l),
            Generator::Invert => Ok(ConformalMap::inversion(space)),
        }
    }
}

/// Composition word, outermost generator first: the word [g1, g2, g3] acts
/// as g1(g2(g3(x))) and lifts to lift(g1) lift(g2) lift(g3).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorWord {
    space: QuadraticSpace,
    word: Vec<Generator>,
}

impl GeneratorWord {
    pub fn new(space: QuadraticSpace, word: Vec<Generator>) -> Result<Self, TransformError> {
        for g in &word {
            g.lift(space)?;
        }
        Ok(GeneratorWord { space, word })
    }

    pub fn space(&self) -> QuadraticSpace {
        self.space
    }

    pub fn generators(&self) -> &[Generator] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn lift(&self) -> Result<ConformalMap, TransformError> {
        let mut acc = ConformalMap::identity(self.space);
        for g in &self.word {
            acc = acc.compose(&g.lift(self.space)?)?;
        }
        Ok(acc)
    }
}

fn e_infinity(space: &QuadraticSpace) -> Vec<Rational> {
    let n = space.dim();
    let mut v = vec![Rational::zero(); n + 2];
    v[0] = -Rational::one();
    v[n + 1] = Rational::one();
    v
}

/// Exact decomposition of an orthogonal matrix into generators.
///
/// Strategy: first arrange that the map fixes the point at infinity. If the
/// image of infinity is a finite point x0, conjugating by inversion after
/// translating x0 to the origin does it. If the image is a different point
/// at infinity (possible only in mixed signature), one inversion, possibly
/// preceded by a null translation, makes it finite first. What remains fixes
/// infinity, so a translation and a dilation reduce it to an exact block
/// diag(1, R, 1) with R preserving the base form.
fn decompose(map: &ConformalMap) -> GeneratorWord {
    let space = map.space;
    let n = space.dim();
    let mut word: Vec<Generator> = Vec::new();
    let mut m = map.clone();

    let einf = e_infinity(&space);
    let img = m.matrix.mul_vec(&einf);
    let s = img[0].clone() + &img[n + 1];
    let t = img[0].clone() - &img[n + 1];
    let is_proportional_to_einf =
        s.is_zero() && img[1..=n].iter().all(Zero::is_zero) && !t.is_zero();

    if !is_proportional_to_einf {
        if s.is_zero() && t.is_zero() {
            // image is (0, w, 0) with w a nonzero null vector of the base
            // form; translating by a unit vector that pairs with w moves it
            // off this degenerate stratum, then inversion lands it finite
            let i = (1..=n)
                .find(|&i| !img[i].is_zero())
                .expect("image of nonzero vector is nonzero");
            let mut c = vec![Rational::zero(); n];
            c[i - 1] = Rational::one();
            let tc = ConformalMap::translation(space, &c).expect("unit translation");
            word.push(Generator::Translate(c.iter().map(|x| -x.clone()).collect()));
            word.push(Generator::Invert);
            m = ConformalMap::inversion(space)
                .compose(&tc)
                .and_then(|f| f.compose(&m))
                .expect("same space");
        } else if s.is_zero() {
            // at infinity but not the degenerate stratum: inversion suffices
            word.push(Generator::Invert);
            m = ConformalMap::inversion(space).compose(&m).expect("same space");
        }
        // now the image of infinity is finite: translate it to the origin
        // (unless it already is the origin) and invert, so the remainder
        // fixes infinity
        let img = ProjectivePoint::new(m.matrix.mul_vec(&einf)).expect("nonzero image");
        let x0 = projective::unembed(&space, &img)
            .expect("orthogonal image of null vector is null")
            .expect("finite by construction");
        if x0.iter().any(|c| !c.is_zero()) {
            let minus_x0: Vec<Rational> = x0.iter().map(|x| -x.clone()).collect();
            let t_back = ConformalMap::translation(space, &minus_x0).expect("translation");
            word.push(Generator::Translate(x0));
            m = t_back.compose(&m).expect("same space");
        }
        word.push(Generator::Invert);
        m = ConformalMap::inversion(space).compose(&m).expect("same space");
    }

    // m fixes infinity, so 0 has a finite image b: peel the translation
    let b = m
        .act_affine(&vec![Rational::zero(); n])
        .expect("dimensions agree")
        .expect("affine map keeps the origin finite");
    if b.iter().any(|c| !c.is_zero()) {
        let minus_b: Vec<Rational> = b.iter().map(|x| -x.clone()).collect();
        let t_back = ConformalMap::translation(space, &minus_b).expect("translation");
        word.push(Generator::Translate(b));
        m = t_back.compose(&m).expect("same space");
    }

    // m fixes infinity and the origin; the scaling on e_infinity is the
    // dilation factor up to sign
    let mu = {
        let img = m.matrix.mul_vec(&einf);
        img[n + 1].clone()
    };
    let lambda = if mu.is_negative() { -mu } else { mu };
    if lambda != Rational::one() {
        let d_back = ConformalMap::dilation(space, &(Rational::one() / &lambda))
            .expect("positive dilation");
        word.push(Generator::Dilate(lambda));
        m = d_back.compose(&m).expect("same space");
    }

    // remainder is exactly +-diag(1, R, 1); normalize the sign and read R off
    let sign = m.matrix.at(0, 0).clone();
    debug_assert!(sign == Rational::one() || sign == -Rational::one());
    let mm = if sign == -Rational::one() {
        m.matrix.neg()
    } else {
        m.matrix.clone()
    };
    debug_assert!({
        let border_ok = (0..n + 2).all(|k| {
            (mm.at(0, k) == &int(if k == 0 { 1 } else { 0 }))
                && (mm.at(n + 1, k) == &int(if k == n + 1 { 1 } else { 0 }))
                && (mm.at(k, 0) == &int(if k == 0 { 1 } else { 0 }))
                && (mm.at(k, n + 1) == &int(if k == n + 1 { 1 } else { 0 }))
        });
        border_ok
    });
    let r = Mat::from_fn(n, n, |i, j| mm.at(i + 1, j + 1).clone());
    if r != Mat::identity(n) {
        word.push(Generator::Rotate(r));
    }

    GeneratorWord { space, word }
}

/// Least-squares style probe of the conformal property at a point, using
/// central differences. For a conformal map F the derivative satisfies
/// (DF)^T J (DF) = Omega^2 J; we report the factor and the residual of that
/// identity in the max norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalFactorEstimate {
    pub omega_sq: f64,
    pub residual: f64,
}

pub const DEFAULT_STENCIL_STEP: f64 = 1e-5;

pub fn estimate_conformal_factor(
    map: &ConformalMap,
    x: &[f64],
    step: f64,
) -> Result<ConformalFactorEstimate, TransformError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(TransformError::BadStep);
    }
    let n = map.space().dim();
    if x.len() != n {
        return Err(TransformError::BadShape {
            expected: n,
            rows: x.len(),
            cols: 1,
        });
    }
    if map.act_affine_f64(x).is_none() {
        return Err(TransformError::UndefinedAtStencil);
    }
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += step;
        xm[j] -= step;
        let fp = map
            .act_affine_f64(&xp)
            .ok_or(TransformError::UndefinedAtStencil)?;
        let fm = map
            .act_affine_f64(&xm)
            .ok_or(TransformError::UndefinedAtStencil)?;
        let col: Vec<f64> = fp
            .iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * step))
            .collect();
        columns.push(col);
    }
    let signs = map.space().signs();
    // G = A^T J A for A the Jacobian estimate
    let g = |i: usize, j: usize| -> f64 {
        columns[i]
            .iter()
            .zip(&columns[j])
            .zip(&signs)
            .map(|((a, b), &s)| if s > 0 { a * b } else { -(a * b) })
            .sum()
    };
    let omega_sq = (0..n)
        .map(|j| g(j, j) * f64::from(signs[j]))
        .sum::<f64>()
        / n as f64;
    let mut residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { omega_sq * f64::from(signs[i]) } else { 0.0 };
            residual = residual.max((g(i, j) - target).abs());
        }
    }
    Ok(ConformalFactorEstimate { omega_sq, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn space(p: usize, q: usize) -> QuadraticSpace {
        QuadraticSpace::new(p, q).unwrap()
    }

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn generator_lifts_are_orthogonal() {
        let s = space(2, 1);
        let lifted = s.lift();
        let t = ConformalMap::translation(s, &v(&[1, -2, 3])).unwrap();
        assert!(verify_orthogonal(&lifted, t.matrix()));
        let w = ConformalMap::inversion(s);
        assert!(verify_orthogonal(&lifted, w.matrix()));
        let d = ConformalMap::dilation(s, &rat(2, 7)).unwrap();
        assert!(verify_orthogonal(&lifted, d.matrix()));
    }

    #[test]
    fn translation_acts_by_adding() {
        let s = space(2, 1);
        let t = ConformalMap::translation(s, &v(&[1, -2, 3])).unwrap();
        assert_eq!(
            t.act_affine(&v(&[5, 5, 5])).unwrap(),
            Some(v(&[6, 3, 8]))
        );
        let back = t.inverse();
        assert_eq!(back.act_affine(&v(&[6, 3, 8])).unwrap(), Some(v(&[5, 5, 5])));
    }

    #[test]
    fn dilation_scales() {
        let s = space(1, 1);
        let d = ConformalMap::dilation(s, &rat(3, 2)).unwrap();
        assert_eq!(
            d.act_affine(&v(&[2, -4])).unwrap(),
            Some(vec![int(3), int(-6)])
        );
        assert!(ConformalMap::dilation(s, &int(0)).is_err());
        assert!(ConformalMap::dilation(s, &int(-2)).is_err());
    }

    #[test]
    fn inversion_divides_by_q() {
        let s = space(2, 0);
        let w = ConformalMap::inversion(s);
        // Q((1,1)) = 2
        assert_eq!(
            w.act_affine(&v(&[1, 1])).unwrap(),
            Some(vec![rat(1, 2), rat(1, 2)])
        );
        // null vectors go to infinity; with q = 0 only the origin is null
        assert_eq!(w.act_affine(&v(&[0, 0])).unwrap(), None);
        // and in mixed signature the whole light cone does
        let s11 = space(1, 1);
        let w11 = ConformalMap::inversion(s11);
        assert_eq!(w11.act_affine(&v(&[3, 3])).unwrap(), None);
    }

    #[test]
    fn rotation_requires_base_orthogonality() {
        let s = space(1, 1);
        // hyperbolic rotation with rational entries: diag-free O(1,1) element
        let r = Mat::from_rows(vec![
            vec![rat(5, 4), rat(3, 4)],
            vec![rat(3, 4), rat(5, 4)],
        ]);
        let m = ConformalMap::rotation(s, &r).unwrap();
        assert_eq!(
            m.act_affine(&v(&[4, 0])).unwrap(),
            Some(vec![int(5), int(3)])
        );
        let bad = Mat::from_rows(vec![vec![int(1), int(1)], vec![int(0), int(1)]]);
        assert_eq!(
            ConformalMap::rotation(s, &bad).unwrap_err(),
            TransformError::NotBaseOrthogonal
        );
    }

    #[test]
    fn compose_matches_pointwise_action() {
        let s = space(2, 0);
        let t = ConformalMap::translation(s, &v(&[1, 0])).unwrap();
        let w = ConformalMap::inversion(s);
        let tw = t.compose(&w).unwrap();
        let x = v(&[1, 1]);
        let via_steps = t
            .act_affine(&w.act_affine(&x).unwrap().unwrap())
            .unwrap();
        assert_eq!(tw.act_affine(&x).unwrap(), via_steps);
    }

    #[test]
    fn word_lift_order_is_outermost_first() {
        let s = space(2, 0);
        let word = GeneratorWord::new(
            s,
            vec![
                Generator::Translate(v(&[1, 0])),
                Generator::Dilate(int(2)),
            ],
        )
        .unwrap();
        // outermost first: x -> 2x then +(1,0)
        assert_eq!(
            word.lift().unwrap().act_affine(&v(&[3, 3])).unwrap(),
            Some(v(&[7, 6]))
        );
    }

    #[test]
    fn decompose_affine_map() {
        let s = space(1, 1);
        let r = Mat::from_rows(vec![
            vec![rat(5, 4), rat(3, 4)],
            vec![rat(3, 4), rat(5, 4)],
        ]);
        let m = ConformalMap::translation(s, &v(&[2, -1]))
            .unwrap()
            .compose(&ConformalMap::dilation(s, &rat(1, 3)).unwrap())
            .unwrap()
            .compose(&ConformalMap::rotation(s, &r).unwrap())
            .unwrap();
        let word = m.decompose();
        assert!(word.lift().unwrap().eq_up_to_sign(&m));
        // canonical order: translate, dilate, rotate
        assert!(matches!(word.generators()[0], Generator::Translate(_)));
        assert!(matches!(word.generators()[1], Generator::Dilate(_)));
        assert!(matches!(word.generators()[2], Generator::Rotate(_)));
    }

    #[test]
    fn decompose_inversion_conjugates() {
        let s = space(2, 0);
        let m = ConformalMap::inversion(s)
            .compose(&ConformalMap::translation(s, &v(&[1, 2])).unwrap())
            .unwrap()
            .compose(&ConformalMap::inversion(s))
            .unwrap();
        let word = m.decompose();
        assert!(word.lift().unwrap().eq_up_to_sign(&m));
        assert!(word.generators().iter().any(|g| matches!(g, Generator::Invert)));
    }

    #[test]
    fn decompose_handles_infinity_to_infinity() {
        // conjugate of a null translation: sends infinity to a different
        // point at infinity, the case a naive origin-chase misses
        let s = space(1, 1);
        let b = v(&[1, 1]); // Q(b) = 0
        let m = ConformalMap::inversion(s)
            .compose(&ConformalMap::translation(s, &b).unwrap())
            .unwrap()
            .compose(&ConformalMap::inversion(s))
            .unwrap();
        let einf = e_infinity(&s);
        let img = m.matrix().mul_vec(&einf);
        assert!((img[0].clone() + &img[3]).is_zero(), "image stays at infinity");
        let word = m.decompose();
        assert!(word.lift().unwrap().eq_up_to_sign(&m));
    }

    #[test]
    fn decompose_roundtrips_a_long_word() {
        let s = space(2, 1);
        let r = Mat::from_rows(vec![
            vec![rat(3, 5), rat(-4, 5), int(0)],
            vec![rat(4, 5), rat(3, 5), int(0)],
            vec![int(0), int(0), int(1)],
        ]);
        let word = GeneratorWord::new(
            s,
            vec![
                Generator::Dilate(rat(7, 2)),
                Generator::Invert,
                Generator::Translate(v(&[1, 1, 1])),
                Generator::Rotate(r),
                Generator::Invert,
                Generator::Translate(v(&[0, 3, -2])),
            ],
        )
        .unwrap();
        let m = word.lift().unwrap();
        let again = m.decompose().lift().unwrap();
        assert!(again.eq_up_to_sign(&m));
    }

    #[test]
    fn conformal_factor_of_a_dilation() {
        let s = space(2, 0);
        let d = ConformalMap::dilation(s, &int(3)).unwrap();
        let est = estimate_conformal_factor(&d, &[0.4, -1.1], DEFAULT_STENCIL_STEP).unwrap();
        assert!((est.omega_sq - 9.0).abs() < 1e-6);
        assert!(est.residual < 1e-6);
    }

    #[test]
    fn conformal_factor_of_inversion_at_a_point() {
        // |dF| for x -> x/|x|^2 at x is 1/|x|^2; at (2,0) the factor^2 is 1/16
        let s = space(2, 0);
        let w = ConformalMap::inversion(s);
        let est = estimate_conformal_factor(&w, &[2.0, 0.0], DEFAULT_STENCIL_STEP).unwrap();
        assert!((est.omega_sq - 1.0 / 16.0).abs() < 1e-8);
        assert!(est.residual < 1e-8);
    }

    #[test]
    fn conformal_factor_undefined_when_stencil_hits_the_cone() {
        let s = space(2, 0);
        let w = ConformalMap::inversion(s);
        // one backward stencil point is exactly the origin, which inverts
        // to infinity
        assert_eq!(
            estimate_conformal_factor(&w, &[1e-5, 0.0], 1e-5).unwrap_err(),
            TransformError::UndefinedAtStencil
        );
    }
}
