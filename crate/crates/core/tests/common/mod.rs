//! Seeded random constructions shared by the integration suites: rational
//! scalars and vectors, exact elements of the base orthogonal group, random
//! generator words, and exact lifted orthogonal matrices built from
//! reflections.

#![allow(dead_code)]

use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use npq_core::linalg::{Mat, RMat};
use npq_core::scalar::{int, Rational};
use npq_core::witt::{reflection, WittParams};
use npq_core::{Generator, GeneratorWord, QuadraticSpace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational with numerator in -max_num..=max_num and denominator in
/// 1..=max_den.
pub fn rand_rational(rng: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> Rational {
    let n = rng.gen_range(-max_num..=max_num);
    let d = rng.gen_range(1..=max_den);
    Rational::new(n.into(), d.into())
}

pub fn rand_vec(rng: &mut ChaCha8Rng, len: usize, max_num: i64, max_den: i64) -> Vec<Rational> {
    (0..len).map(|_| rand_rational(rng, max_num, max_den)).collect()
}

pub fn rand_nonzero_vec(
    rng: &mut ChaCha8Rng,
    len: usize,
    max_num: i64,
    max_den: i64,
) -> Vec<Rational> {
    loop {
        let v = rand_vec(rng, len, max_num, max_den);
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

/// Exact element of O(p,q): a product of plane rotations c^2 + s^2 = 1
/// within one sign block, hyperbolic plane maps c^2 - s^2 = 1 across
/// blocks, and a random diagonal of signs. All entries rational.
pub fn rand_base_rotation(rng: &mut ChaCha8Rng, space: QuadraticSpace) -> RMat {
    let n = space.dim();
    let signs = space.signs();
    let mut acc: RMat = Mat::from_diag(
        &(0..n)
            .map(|_| if rng.gen_bool(0.5) { int(1) } else { int(-1) })
            .collect::<Vec<_>>(),
    );
    let steps = rng.gen_range(1..=3);
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let j = loop {
            let j = rng.gen_range(0..n);
            if j != i {
                break j;
            }
        };
        let t = loop {
            let t = rand_rational(rng, 3, 3);
            // t^2 = 1 degenerates the hyperbolic parametrization
            if !(t.clone() * &t).is_one() {
                break t;
            }
        };
        let t2 = t.clone() * &t;
        let one = Rational::one();
        let mut g: RMat = Mat::identity(n);
        if signs[i] == signs[j] {
            // (c, s) on the unit circle
            let den = one.clone() + &t2;
            let c = (one.clone() - &t2) / &den;
            let s = (t.clone() + &t) / &den;
            g.set(i, i, c.clone());
            g.set(j, j, c);
            g.set(i, j, -s.clone());
            g.set(j, i, s);
        } else {
            // (c, s) on the unit hyperbola
            let den = one.clone() - &t2;
            let c = (one.clone() + &t2) / &den;
            let s = (t.clone() + &t) / &den;
            g.set(i, i, c.clone());
            g.set(j, j, c);
            g.set(i, j, s.clone());
            g.set(j, i, s);
        }
        acc = acc.matmul(&g);
    }
    acc
}

/// Dilation factor: positive rational, biased toward perfect squares half
/// the time so both the exact and float orbit paths get exercised.
pub fn rand_dilation(rng: &mut ChaCha8Rng) -> Rational {
    let n = rng.gen_range(1..=4i64);
    let d = rng.gen_range(1..=4i64);
    Rational::new(n.into(), d.into())
}

pub fn rand_generator(rng: &mut ChaCha8Rng, space: QuadraticSpace) -> Generator {
    match rng.gen_range(0..4) {
        0 => Generator::Translate(rand_vec(rng, space.dim(), 3, 2)),
        1 => Generator::Rotate(rand_base_rotation(rng, space)),
        2 => Generator::Dilate(rand_dilation(rng)),
        _ => Generator::Invert,
    }
}

pub fn rand_word(rng: &mut ChaCha8Rng, space: QuadraticSpace, max_len: usize) -> GeneratorWord {
    let len = rng.gen_range(1..=max_len);
    let word = (0..len).map(|_| rand_generator(rng, space)).collect();
    GeneratorWord::new(space, word).expect("generated word is valid by construction")
}

/// Exact orthogonal matrix on the lifted space: a product of reflections in
/// random anisotropic rational vectors.
pub fn rand_lifted_orthogonal(
    rng: &mut ChaCha8Rng,
    space: QuadraticSpace,
    reflections: usize,
) -> RMat {
    let lifted = space.lift();
    let n = lifted.dim();
    let params = WittParams::default();
    let mut acc: RMat = Mat::identity(n);
    let mut done = 0;
    while done < reflections {
        let w = rand_nonzero_vec(rng, n, 3, 2);
        if lifted.eval_q(&w).unwrap().is_zero() {
            continue;
        }
        let r = reflection(&lifted, &w, &params).expect("anisotropic vector reflects");
        acc = acc.matmul(&r);
        done += 1;
    }
    acc
}
