//! Wire formats shared by the command-line front end and golden tests.
//!
//! Rationals travel as canonical strings ("3/4", "-2", denominator positive
//! and reduced), vectors as arrays of such strings, matrices row-major.
//! The DTO structs here carry no mathematical logic; `build` methods hand
//! straight off to the library constructors, so every invariant check
//! happens exactly once.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{FormsError, QuadraticSpace};
use crate::linalg::{Mat, RMat};
use crate::projective::{ProjectiveError, ProjectivePoint, ProjectiveSubspace};
use crate::quadric_surfaces::{
    make_surface, AffineQuadric, Hypersurface, SurfaceD, SurfaceError,
};
use crate::scalar::{format_rational, parse_rational, ParseRationalError, Rational};
use crate::transforms::{ConformalMap, Generator, GeneratorWord, TransformError};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
    #[error("matrix rows must all have length {expected}, found one of length {got}")]
    RaggedMatrix { expected: usize, got: usize },
    #[error("matrix needs at least one row and one column")]
    EmptyMatrix,
    #[error("unsupported generator: {0}")]
    BadGenerator(String),
}

pub fn rational_to_string(x: &Rational) -> String {
    format_rational(x)
}

pub fn rational_from_string(s: &str) -> Result<Rational, JsonError> {
    Ok(parse_rational(s)?)
}

pub fn vec_to_strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

pub fn vec_from_strings(v: &[String]) -> Result<Vec<Rational>, JsonError> {
    v.iter().map(|s| rational_from_string(s)).collect()
}

pub fn mat_to_strings(m: &RMat) -> Vec<Vec<String>> {
    m.iter_rows().map(vec_to_strings).collect()
}

pub fn mat_from_strings(rows: &[Vec<String>]) -> Result<RMat, JsonError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(JsonError::EmptyMatrix);
    }
    let width = rows[0].len();
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != width {
            return Err(JsonError::RaggedMatrix {
                expected: width,
                got: row.len(),
            });
        }
        out.push(vec_from_strings(row)?);
    }
    Ok(Mat::from_rows(out))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SpaceDto {
    pub p: usize,
    pub q: usize,
}

impl SpaceDto {
    pub fn of(space: QuadraticSpace) -> Self {
        SpaceDto {
            p: space.p(),
            q: space.q(),
        }
    }

    pub fn build(&self) -> Result<QuadraticSpace, JsonError> {
        Ok(QuadraticSpace::new(self.p, self.q)?)
    }
}

/// {"p":…,"q":…,"alpha":"…","beta":[…],"gamma":"…"}; p and q may be left
/// out when the surrounding request already names the space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineQuadricDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    pub alpha: String,
    pub beta: Vec<String>,
    pub gamma: String,
}

impl AffineQuadricDto {
    pub fn of(space: QuadraticSpace, quadric: &AffineQuadric) -> Self {
        AffineQuadricDto {
            p: Some(space.p()),
            q: Some(space.q()),
            alpha: format_rational(quadric.alpha()),
            beta: vec_to_strings(quadric.beta()),
            gamma: format_rational(quadric.gamma()),
        }
    }

    /// The space stated inline, when both fields are present.
    pub fn inline_space(&self) -> Result<Option<QuadraticSpace>, JsonError> {
        match (self.p, self.q) {
            (Some(p), Some(q)) => Ok(Some(QuadraticSpace::new(p, q)?)),
            _ => Ok(None),
        }
    }

    pub fn build(&self) -> Result<AffineQuadric, JsonError> {
        Ok(AffineQuadric::new(
            rational_from_string(&self.alpha)?,
            vec_from_strings(&self.beta)?,
            rational_from_string(&self.gamma)?,
        )?)
    }
}

/// {"normal":[…]} in lifted coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypersurfaceDto {
    pub normal: Vec<String>,
}

impl HypersurfaceDto {
    /// Serializes the canonical representative for byte-stable output.
    pub fn of(h: &Hypersurface) -> Self {
        HypersurfaceDto {
            normal: vec_to_strings(&h.canonical_normal()),
        }
    }

    pub fn build(&self, base: QuadraticSpace) -> Result<Hypersurface, JsonError> {
        Ok(Hypersurface::new(base, vec_from_strings(&self.normal)?)?)
    }
}

/// {"basis":[[…],…]} with rows spanning the subspace, lifted coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceDto {
    pub basis: Vec<Vec<String>>,
}

impl SurfaceDto {
    pub fn of(s: &SurfaceD) -> Self {
        SurfaceDto {
            basis: mat_to_strings(s.subspace().basis()),
        }
    }

    pub fn build(&self, base: QuadraticSpace) -> Result<SurfaceD, JsonError> {
        let rows: Vec<Vec<Rational>> = self
            .basis
            .iter()
            .map(|r| vec_from_strings(r))
            .collect::<Result<_, _>>()?;
        let span = ProjectiveSubspace::span_of_vectors(&rows)?;
        Ok(make_surface(base, &span)?)
    }
}

pub fn point_to_strings(p: &ProjectivePoint) -> Vec<String> {
    vec_to_strings(&p.canonical_coords())
}

pub fn conformal_map_to_strings(m: &ConformalMap) -> Vec<Vec<String>> {
    mat_to_strings(m.matrix())
}

pub fn conformal_map_from_strings(
    space: QuadraticSpace,
    rows: &[Vec<String>],
) -> Result<ConformalMap, JsonError> {
    Ok(ConformalMap::from_matrix(space, mat_from_strings(rows)?)?)
}

/// Externally tagged generator: {"translate":["1","0"]}, {"rotate":[[…]]},
/// {"dilate":"2"}, {"invert":true}.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorDto {
    Translate(Vec<String>),
    Rotate(Vec<Vec<String>>),
    Dilate(String),
    Invert(bool),
}

pub fn generator_to_dto(g: &Generator) -> GeneratorDto {
    match g {
        Generator::Translate(b) => GeneratorDto::Translate(vec_to_strings(b)),
        Generator::Rotate(r) => GeneratorDto::Rotate(mat_to_strings(r)),
        Generator::Dilate(l) => GeneratorDto::Dilate(format_rational(l)),
        Generator::Invert => GeneratorDto::Invert(true),
    }
}

pub fn generator_from_dto(dto: &GeneratorDto) -> Result<Generator, JsonError> {
    match dto {
        GeneratorDto::Translate(b) => Ok(Generator::Translate(vec_from_strings(b)?)),
        GeneratorDto::Rotate(r) => Ok(Generator::Rotate(mat_from_strings(r)?)),
        GeneratorDto::Dilate(l) => Ok(Generator::Dilate(rational_from_string(l)?)),
        GeneratorDto::Invert(true) => Ok(Generator::Invert),
        GeneratorDto::Invert(false) => {
            Err(JsonError::BadGenerator("{\"invert\":false}".to_string()))
        }
    }
}

pub fn word_to_dtos(w: &GeneratorWord) -> Vec<GeneratorDto> {
    w.generators().iter().map(generator_to_dto).collect()
}

pub fn word_from_dtos(
    space: QuadraticSpace,
    dtos: &[GeneratorDto],
) -> Result<GeneratorWord, JsonError> {
    let word = dtos
        .iter()
        .map(generator_from_dto)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GeneratorWord::new(space, word)?)
}
