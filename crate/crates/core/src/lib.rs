//! Conformal geometry on the quadric compactification of the generalized
//! Minkowski space R^{p,q}.
//!
//! R^{p,q} carries the indefinite form Q(x) = x_1^2 + ... + x_p^2 - x_{p+1}^2
//! - ... - x_{p+q}^2. Its conformal compactification is the projective
//! quadric N^{p,q} in RP^{p+q+1} cut out by the lifted form on R^{p+1,q+1},
//! and O(p+1,q+1) acts on N^{p,q} by conformal transformations. This crate
//! implements that action, the classification of conformal quadratic
//! hypersurfaces (quadrics and hyperplanes become hyperplane sections of the
//! quadric), and constructive isometry extension for moving one surface onto
//! another within its orbit.
//!
//! Classification decisions (signs, signatures, intersection dimensions) run
//! in exact rational arithmetic. Constructive maps may involve irrational
//! scalings; those run in binary64 and are verified against residual
//! tolerances, with an exact-rational fast path whenever the required square
//! roots are rational.

pub mod forms;
pub mod grassmannian;
pub mod json;
pub mod linalg;
pub mod projective;
pub mod quadric_surfaces;
pub mod scalar;
pub mod transforms;
pub mod witt;

pub use forms::{GramMatrix, LiftedSpace, QuadraticSpace, Signature};
pub use projective::{IntersectionDim, ProjectivePoint, ProjectiveSubspace};
pub use quadric_surfaces::{AffineQuadric, Hypersurface, Sign, SurfaceD};
pub use scalar::Rational;
pub use transforms::{ConformalMap, Generator, GeneratorWord};
pub use witt::{IsometryProblem, OrthogonalWitness, WittParams};
