//! Fixture builders for the benchmarks. Inputs are deterministic and sized
//! to represent the workloads the library sees in practice: exact rational
//! arithmetic on lifted spaces of modest dimension.

use npq_core::forms::{GramMatrix, QuadraticSpace};
use npq_core::grassmannian::Plane2;
use npq_core::linalg::{Mat, RMat};
use npq_core::scalar::{int, rat, Rational};
use npq_core::transforms::{ConformalMap, Generator, GeneratorWord};
use npq_core::witt::IsometryProblem;

/// Dense symmetric matrix with small mixed-sign entries; indefinite, so the
/// diagonalization has to pivot and complete squares rather than bail early.
pub fn dense_gram(n: usize) -> GramMatrix {
    let m = Mat::from_fn(n, n, |i, j| {
        let (a, b) = (i.min(j), i.max(j));
        int(((3 * a + 5 * b + a * b) % 11) as i64 - 5)
    });
    GramMatrix::new(m).expect("symmetric by construction")
}

/// A conformal map given by a moderately long generator word in R^{2,1}.
pub fn long_word_map() -> ConformalMap {
    let space = QuadraticSpace::new(2, 1).expect("valid signature");
    let rot = Mat::from_rows(vec![
        vec![rat(3, 5), rat(-4, 5), int(0)],
        vec![rat(4, 5), rat(3, 5), int(0)],
        vec![int(0), int(0), int(1)],
    ]);
    let word = GeneratorWord::new(
        space,
        vec![
            Generator::Translate(vec![int(1), int(-2), rat(1, 3)]),
            Generator::Invert,
            Generator::Rotate(rot),
            Generator::Dilate(rat(7, 2)),
            Generator::Invert,
            Generator::Translate(vec![rat(-1, 2), int(0), int(4)]),
        ],
    )
    .expect("all generators valid");
    word.lift().expect("word lifts")
}

/// Partial isometry data on the lift of R^{2,2}: three exact pairs related
/// by an exact conformal matrix, extension to all six dimensions left to the
/// solver. Sources mix a null vector, a unit, and a dependent combination.
pub fn isometry_problem() -> IsometryProblem<Rational> {
    let space = QuadraticSpace::new(2, 2).expect("valid signature");
    let map = long_word_map_22();
    let sources: Vec<Vec<Rational>> = vec![
        vec![int(1), int(0), int(0), int(0), int(0), int(1)],
        vec![int(0), int(1), int(0), int(0), int(0), int(0)],
        vec![int(2), rat(1, 2), int(0), int(1), int(0), int(2)],
    ];
    let targets = sources.iter().map(|s| map.mul_vec(s)).collect();
    IsometryProblem::new(space.lift(), sources, targets).expect("consistent pairs")
}

fn long_word_map_22() -> RMat {
    let space = QuadraticSpace::new(2, 2).expect("valid signature");
    let rot = Mat::from_rows(vec![
        vec![rat(5, 13), rat(-12, 13), int(0), int(0)],
        vec![rat(12, 13), rat(5, 13), int(0), int(0)],
        vec![int(0), int(0), int(1), int(0)],
        vec![int(0), int(0), int(0), int(1)],
    ]);
    let word = GeneratorWord::new(
        space,
        vec![
            Generator::Translate(vec![int(1), int(0), rat(2, 3), int(-1)]),
            Generator::Rotate(rot),
            Generator::Invert,
            Generator::Dilate(int(3)),
        ],
    )
    .expect("all generators valid");
    word.lift().expect("word lifts").matrix().clone()
}

/// A 2-plane in R^4 whose wedge coordinates are all nonzero.
pub fn generic_plane() -> Plane2 {
    Plane2::new(
        vec![int(1), int(2), int(-1), int(3)],
        vec![int(0), int(1), int(4), rat(-5, 2)],
    )
    .expect("independent spanning pair")
}
