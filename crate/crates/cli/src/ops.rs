//! Request handling. Each command parses its payload, hands off to the
//! library, and shapes a JSON response; no mathematics happens here. Error
//! kinds drive the process exit code: parse errors for malformed requests,
//! domain errors for inputs the library rejects, numeric errors when a
//! float-path construction fails its residual verification.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use npq_core::forms::QuadraticSpace;
use npq_core::grassmannian::{
    is_decomposable, plucker, sl4_pushforward, to_standard_n22, unplucker, wedge_q,
    GrassmannError, Plane2, Wedge2,
};
use npq_core::json::{
    conformal_map_from_strings, mat_from_strings, mat_to_strings, point_to_strings,
    rational_from_string, rational_to_string, vec_from_strings, vec_to_strings,
    word_from_dtos, word_to_dtos, AffineQuadricDto, GeneratorDto, HypersurfaceDto,
    JsonError, SpaceDto, SurfaceDto,
};
use npq_core::projective::{
    embed, quadric_intersection_dim, unembed, IntersectionDim, ProjectiveError,
    ProjectivePoint,
};
use npq_core::quadric_surfaces::{
    act_hypersurface, act_surface, affine_to_projective, projective_to_affine,
    same_orbit_given_realizations, surface_points_equal_seeded, Hypersurface, Sign,
    SurfaceError,
};
use npq_core::scalar::Rational;
use npq_core::transforms::TransformError;
use npq_core::witt::{orbit_map_hypersurface, OrthogonalWitness, WittError, WittParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Domain,
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Parse => 1,
            ErrorKind::Domain => 2,
            ErrorKind::Numeric => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorKind::Parse => "parse",
            ErrorKind::Domain => "domain",
            ErrorKind::Numeric => "numeric",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Parse,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Domain,
            message: message.into(),
        }
    }
}

fn witt_kind(e: &WittError) -> ErrorKind {
    match e {
        WittError::ResidualExceeded { .. }
        | WittError::AmbiguousIsotropy
        | WittError::DegenerateBlock
        | WittError::NoPartner => ErrorKind::Numeric,
        _ => ErrorKind::Domain,
    }
}

fn surface_kind(e: &SurfaceError) -> ErrorKind {
    match e {
        SurfaceError::Witt(w) => witt_kind(w),
        SurfaceError::Indeterminate => ErrorKind::Numeric,
        _ => ErrorKind::Domain,
    }
}

impl From<WittError> for CliError {
    fn from(e: WittError) -> Self {
        CliError {
            kind: witt_kind(&e),
            message: e.to_string(),
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        CliError {
            kind: surface_kind(&e),
            message: e.to_string(),
        }
    }
}

impl From<JsonError> for CliError {
    fn from(e: JsonError) -> Self {
        let kind = match &e {
            JsonError::Surface(s) => surface_kind(s),
            JsonError::Forms(_) | JsonError::Transform(_) | JsonError::Projective(_) => {
                ErrorKind::Domain
            }
            JsonError::Parse(_)
            | JsonError::RaggedMatrix { .. }
            | JsonError::EmptyMatrix
            | JsonError::BadGenerator(_) => ErrorKind::Parse,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        CliError {
            kind: ErrorKind::Domain,
            message: e.to_string(),
        }
    }
}

impl From<ProjectiveError> for CliError {
    fn from(e: ProjectiveError) -> Self {
        CliError {
            kind: ErrorKind::Domain,
            message: e.to_string(),
        }
    }
}

impl From<GrassmannError> for CliError {
    fn from(e: GrassmannError) -> Self {
        let kind = match &e {
            GrassmannError::BadLength { .. } | GrassmannError::BadShape { .. } => {
                ErrorKind::Parse
            }
            _ => ErrorKind::Domain,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

/// One request. `command`, when present, must agree with the subcommand;
/// `tolerance` overrides the residual tolerance for this request only.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub space: Option<SpaceDto>,
    pub payload: Value,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Serialize)]
pub struct Residuals {
    pub orthogonality: f64,
    pub image: f64,
}

/// Successful response body before envelope assembly. Exact-mode outcomes
/// carry no residuals by construction.
pub struct Outcome {
    pub mode: &'static str,
    pub result: Value,
    pub residuals: Option<Residuals>,
}

impl Outcome {
    fn exact(result: Value) -> Self {
        Outcome {
            mode: "exact",
            result,
            residuals: None,
        }
    }
}

pub fn handle(
    command: &str,
    req: &Request,
    flag_tolerance: Option<f64>,
    flag_seed: Option<u64>,
) -> Result<Outcome, CliError> {
    if let Some(named) = &req.command {
        if named != command {
            return Err(CliError::parse(format!(
                "request names command {named:?} but {command:?} was invoked"
            )));
        }
    }
    let mut params = WittParams::default();
    if let Some(tol) = req.tolerance.or(flag_tolerance) {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(CliError::parse("tolerance must be positive and finite"));
        }
        params.residual_tol = tol;
    }
    let seed = req.seed.or(flag_seed);
    match command {
        "classify" => classify(req),
        "act" => act(req),
        "orbit-map" => orbit_map(req, &params, seed),
        "decompose" => decompose(req),
        "grassmann" => grassmann(req),
        "embed" => embed_point(req),
        "unembed" => unembed_point(req),
        other => Err(CliError::parse(format!("unknown command {other:?}"))),
    }
}

fn required_space(req: &Request) -> Result<QuadraticSpace, CliError> {
    let dto = req
        .space
        .as_ref()
        .ok_or_else(|| CliError::parse("request is missing \"space\""))?;
    Ok(dto.build()?)
}

fn payload<T: for<'de> Deserialize<'de>>(req: &Request) -> Result<T, CliError> {
    serde_json::from_value(req.payload.clone())
        .map_err(|e| CliError::parse(format!("payload: {e}")))
}

fn intersection_value(d: IntersectionDim) -> Value {
    match d {
        IntersectionDim::Empty => json!("empty"),
        IntersectionDim::Dimension(k) => json!(k),
    }
}

fn sign_value(s: Sign) -> Value {
    serde_json::to_value(s).expect("sign serializes")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ClassifyPayload {
    Normal(HypersurfaceDto),
    Affine(AffineQuadricDto),
}

fn classify(req: &Request) -> Result<Outcome, CliError> {
    let (base, surface) = match payload::<ClassifyPayload>(req)? {
        ClassifyPayload::Normal(dto) => {
            let base = required_space(req)?;
            (base, dto.build(base)?)
        }
        ClassifyPayload::Affine(dto) => {
            let base = match (req.space.as_ref(), dto.inline_space()?) {
                (Some(outer), Some(inner)) if outer.build()? != inner => {
                    return Err(CliError::parse(
                        "payload names a different space than the request",
                    ));
                }
                (Some(outer), _) => outer.build()?,
                (None, Some(inner)) => inner,
                (None, None) => return Err(CliError::parse("request is missing \"space\"")),
            };
            (base, affine_to_projective(base, &dto.build()?)?)
        }
    };
    let affine = projective_to_affine(&surface);
    let dim = quadric_intersection_dim(&base, &surface.hyperplane())?;
    Ok(Outcome::exact(json!({
        "valid": true,
        "sign": sign_value(surface.sign()),
        "normal": vec_to_strings(&surface.canonical_normal()),
        "affine": AffineQuadricDto::of(base, &affine),
        "intersection": intersection_value(dim),
    })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActPayload {
    #[serde(default)]
    word: Option<Vec<GeneratorDto>>,
    #[serde(default)]
    matrix: Option<Vec<Vec<String>>>,
    #[serde(default)]
    point: Option<Vec<String>>,
    #[serde(default)]
    coords: Option<Vec<String>>,
    #[serde(default)]
    normal: Option<Vec<String>>,
    #[serde(default)]
    affine: Option<AffineQuadricDto>,
    #[serde(default)]
    basis: Option<Vec<Vec<String>>>,
}

fn act(req: &Request) -> Result<Outcome, CliError> {
    let base = required_space(req)?;
    let p: ActPayload = payload(req)?;

    let map = match (&p.word, &p.matrix) {
        (Some(dtos), None) => word_from_dtos(base, dtos)?.lift()?,
        (None, Some(rows)) => conformal_map_from_strings(base, rows)?,
        _ => {
            return Err(CliError::parse(
                "payload needs exactly one of \"word\" or \"matrix\"",
            ))
        }
    };

    let targets = [
        p.point.is_some(),
        p.coords.is_some(),
        p.normal.is_some(),
        p.affine.is_some(),
        p.basis.is_some(),
    ];
    if targets.iter().filter(|&&t| t).count() != 1 {
        return Err(CliError::parse(
            "payload needs exactly one of \"point\", \"coords\", \"normal\", \"affine\", \"basis\"",
        ));
    }

    let result = if let Some(point) = &p.point {
        let x = vec_from_strings(point)?;
        let image = map.act_affine(&x)?;
        let projective = map.act_point(&embed(&base, &x)?)?;
        json!({
            "point": image.as_deref().map(vec_to_strings),
            "coords": point_to_strings(&projective),
        })
    } else if let Some(coords) = &p.coords {
        let point = ProjectivePoint::new(vec_from_strings(coords)?)?;
        json!({ "coords": point_to_strings(&map.act_point(&point)?) })
    } else if let Some(normal) = &p.normal {
        let h = Hypersurface::new(base, vec_from_strings(normal)?)?;
        let image = act_hypersurface(&map, &h)?;
        json!({ "normal": vec_to_strings(&image.canonical_normal()) })
    } else if let Some(dto) = &p.affine {
        let h = affine_to_projective(base, &dto.build()?)?;
        let image = act_hypersurface(&map, &h)?;
        // the image normal carries an arbitrary scale from the matrix;
        // canonicalize so equal curves print identically
        let affine = projective_to_affine(&image).canonicalized();
        json!({ "affine": AffineQuadricDto::of(base, &affine) })
    } else {
        let dto = SurfaceDto {
            basis: p.basis.clone().expect("one target is set"),
        };
        let image = act_surface(&map, &dto.build(base)?)?;
        json!({ "basis": SurfaceDto::of(&image).basis })
    };
    Ok(Outcome::exact(result))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OrbitSide {
    Surface(SurfaceDto),
    Normal(HypersurfaceDto),
    Affine(AffineQuadricDto),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitMapPayload {
    first: Value,
    second: Value,
    #[serde(default)]
    check_points: bool,
}

fn orbit_side(base: QuadraticSpace, raw: &Value) -> Result<OrbitSide, CliError> {
    let side: OrbitSide = serde_json::from_value(raw.clone())
        .map_err(|e| CliError::parse(format!("orbit-map side: {e}")))?;
    // surfaces and hypersurfaces are both legal, but the two sides must
    // agree in kind; kind is decided here, construction happens later
    match &side {
        OrbitSide::Affine(dto) => {
            if let Some(inner) = dto.inline_space()? {
                if inner != base {
                    return Err(CliError::parse(
                        "payload names a different space than the request",
                    ));
                }
            }
        }
        OrbitSide::Surface(_) | OrbitSide::Normal(_) => {}
    }
    Ok(side)
}

fn side_hypersurface(base: QuadraticSpace, side: &OrbitSide) -> Result<Hypersurface, CliError> {
    match side {
        OrbitSide::Normal(dto) => Ok(dto.build(base)?),
        OrbitSide::Affine(dto) => Ok(affine_to_projective(base, &dto.build()?)?),
        OrbitSide::Surface(_) => unreachable!("kind agreement checked by caller"),
    }
}

fn witness_outcome(w: &OrthogonalWitness, extra: Option<(&str, Value)>) -> Outcome {
    let mut result = if let Some(m) = &w.exact {
        json!({ "matrix": mat_to_strings(m) })
    } else {
        let rows: Vec<Vec<f64>> = (0..w.matrix.rows())
            .map(|i| w.matrix.row(i).to_vec())
            .collect();
        json!({ "matrix": rows })
    };
    if let Some((key, value)) = extra {
        result
            .as_object_mut()
            .expect("result is an object")
            .insert(key.to_string(), value);
    }
    if w.exact.is_some() {
        Outcome::exact(result)
    } else {
        Outcome {
            mode: "float",
            result,
            residuals: Some(Residuals {
                orthogonality: w.orth_residual,
                image: w.image_residual,
            }),
        }
    }
}

fn orbit_map(req: &Request, params: &WittParams, seed: Option<u64>) -> Result<Outcome, CliError> {
    let base = required_space(req)?;
    let p: OrbitMapPayload = payload(req)?;
    let first = orbit_side(base, &p.first)?;
    let second = orbit_side(base, &p.second)?;

    match (&first, &second) {
        (OrbitSide::Surface(a), OrbitSide::Surface(b)) => {
            let s1 = a.build(base)?;
            let s2 = b.build(base)?;
            let witness = same_orbit_given_realizations(&s1, &s2, params)?.ok_or_else(|| {
                CliError::domain(
                    "realizations have different signatures; no mapping element from this data",
                )
            })?;
            let extra = if p.check_points {
                let seed = seed.unwrap_or(npq_core::quadric_surfaces::DEFAULT_SAMPLING_SEED);
                let equal = surface_points_equal_seeded(&s1, &s2, seed)?;
                Some(("points_equal", json!(equal)))
            } else {
                None
            };
            Ok(witness_outcome(&witness, extra))
        }
        (OrbitSide::Surface(_), _) | (_, OrbitSide::Surface(_)) => Err(CliError::parse(
            "first and second must be the same kind: two surfaces or two hypersurfaces",
        )),
        _ => {
            if p.check_points {
                return Err(CliError::parse(
                    "check_points applies to surface payloads only",
                ));
            }
            let h1 = side_hypersurface(base, &first)?;
            let h2 = side_hypersurface(base, &second)?;
            let witness = orbit_map_hypersurface(&h1, &h2, params)?;
            Ok(witness_outcome(&witness, None))
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecomposePayload {
    matrix: Vec<Vec<String>>,
}

fn decompose(req: &Request) -> Result<Outcome, CliError> {
    let base = required_space(req)?;
    let p: DecomposePayload = payload(req)?;
    let map = conformal_map_from_strings(base, &p.matrix)?;
    let word = map.decompose();
    Ok(Outcome::exact(json!({ "word": word_to_dtos(&word) })))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GrassmannPayload {
    Plane { plane: Vec<Vec<String>> },
    Wedge { wedge: Vec<String> },
    Push { pushforward: Vec<Vec<String>> },
}

fn grassmann(req: &Request) -> Result<Outcome, CliError> {
    if let Some(dto) = &req.space {
        if (dto.p, dto.q) != (2, 2) {
            return Err(CliError::parse(
                "grassmann works in the 2,2 model; omit \"space\" or set p = q = 2",
            ));
        }
    }
    let result = match payload::<GrassmannPayload>(req)? {
        GrassmannPayload::Plane { plane } => {
            if plane.len() != 2 {
                return Err(CliError::parse("\"plane\" needs exactly two spanning rows"));
            }
            let u = vec_from_strings(&plane[0])?;
            let v = vec_from_strings(&plane[1])?;
            let p = Plane2::new(u, v)?;
            let w = plucker(&p);
            json!({
                "plucker": vec_to_strings(w.coords()),
                "standard": point_to_strings(&to_standard_n22(&w)?),
            })
        }
        GrassmannPayload::Wedge { wedge } => {
            let w = Wedge2::new(vec_from_strings(&wedge)?)?;
            let decomposable = is_decomposable(&w)?;
            let plane = if decomposable {
                let p = unplucker(&w)?;
                json!([vec_to_strings(p.u()), vec_to_strings(p.v())])
            } else {
                Value::Null
            };
            json!({
                "wedge_q": rational_to_string(&wedge_q(&w)),
                "decomposable": decomposable,
                "plane": plane,
                "standard": point_to_strings(&to_standard_n22(&w)?),
            })
        }
        GrassmannPayload::Push { pushforward } => {
            let a = mat_from_strings(&pushforward)?;
            json!({ "matrix": mat_to_strings(&sl4_pushforward(&a)?) })
        }
    };
    Ok(Outcome::exact(result))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbedPayload {
    point: Vec<String>,
}

fn embed_point(req: &Request) -> Result<Outcome, CliError> {
    let base = required_space(req)?;
    let p: EmbedPayload = payload(req)?;
    let image = embed(&base, &vec_from_strings(&p.point)?)?;
    Ok(Outcome::exact(json!({ "coords": point_to_strings(&image) })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnembedPayload {
    coords: Vec<String>,
}

fn unembed_point(req: &Request) -> Result<Outcome, CliError> {
    let base = required_space(req)?;
    let p: UnembedPayload = payload(req)?;
    let point = ProjectivePoint::new(vec_from_strings(&p.coords)?)?;
    let back = unembed(&base, &point)?;
    Ok(Outcome::exact(json!({
        "point": back.as_deref().map(vec_to_strings),
        "infinite": back.is_none(),
    })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlotPayload {
    #[serde(default)]
    affine: Option<AffineQuadricDto>,
    #[serde(default)]
    normal: Option<Vec<String>>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    range: Option<String>,
}

/// Sample the zero set of a plane curve to CSV. The evaluation oracle is the
/// exact affine equation; crossings are located by sign change along grid
/// lines and tightened by bisection.
pub fn plot(req: &Request) -> Result<String, CliError> {
    if let Some(named) = &req.command {
        if named != "plot" {
            return Err(CliError::parse(format!(
                "request names command {named:?} but \"plot\" was invoked"
            )));
        }
    }
    let p: PlotPayload = payload(req)?;
    let (base, quadric) = match (&p.affine, &p.normal) {
        (Some(dto), None) => {
            let base = match (req.space.as_ref(), dto.inline_space()?) {
                (Some(outer), Some(inner)) if outer.build()? != inner => {
                    return Err(CliError::parse(
                        "payload names a different space than the request",
                    ));
                }
                (Some(outer), _) => outer.build()?,
                (None, Some(inner)) => inner,
                (None, None) => return Err(CliError::parse("request is missing \"space\"")),
            };
            (base, dto.build()?)
        }
        (None, Some(normal)) => {
            let base = required_space(req)?;
            let h = Hypersurface::new(base, vec_from_strings(normal)?)?;
            (base, projective_to_affine(&h))
        }
        _ => {
            return Err(CliError::parse(
                "payload needs exactly one of \"affine\" or \"normal\"",
            ))
        }
    };
    if base.dim() != 2 {
        return Err(CliError::domain(
            "plot draws plane curves only (p + q = 2)",
        ));
    }

    let n = p.samples.unwrap_or(129).clamp(8, 4096);
    let r = match &p.range {
        Some(s) => rational_from_string(s)?,
        None => Rational::from_integer(4.into()),
    };
    if Sign::of(&r) != Sign::Positive {
        return Err(CliError::parse("range must be positive"));
    }

    let grid: Vec<Rational> = (0..n)
        .map(|i| {
            let t = Rational::new((2 * i as i64).into(), (n as i64 - 1).into());
            -r.clone() + t * &r
        })
        .collect();
    let eval = |x: &Rational, y: &Rational| -> Result<Rational, CliError> {
        Ok(quadric.eval(&base, &[x.clone(), y.clone()])?)
    };

    let mut rows = vec!["x,y".to_string()];
    let mut emit = |x: &Rational, y: &Rational| {
        let xy = npq_core::linalg::to_f64_vec(&[x.clone(), y.clone()]);
        rows.push(format!("{:.6},{:.6}", xy[0], xy[1]));
    };
    // scan rows for crossings in x, then columns for crossings in y, so
    // both shallow and steep arcs of the curve get sampled
    for pass in 0..2 {
        for fixed in &grid {
            let mut prev: Option<(Rational, Sign)> = None;
            for step in &grid {
                let (x, y) = if pass == 0 {
                    (step.clone(), fixed.clone())
                } else {
                    (fixed.clone(), step.clone())
                };
                let sign = Sign::of(&eval(&x, &y)?);
                let along = if pass == 0 { x } else { y };
                if sign == Sign::Zero {
                    if pass == 0 {
                        emit(&along, fixed);
                    } else {
                        emit(fixed, &along);
                    }
                    prev = None;
                    continue;
                }
                if let Some((last, last_sign)) = &prev {
                    if *last_sign != sign {
                        let (mut lo, mut hi) = (last.clone(), along.clone());
                        let lo_sign = *last_sign;
                        for _ in 0..24 {
                            let half = Rational::new(1.into(), 2.into());
                            let mid = (lo.clone() + &hi) * half;
                            let s = if pass == 0 {
                                Sign::of(&eval(&mid, fixed)?)
                            } else {
                                Sign::of(&eval(fixed, &mid)?)
                            };
                            if s == Sign::Zero {
                                lo = mid;
                                break;
                            } else if s == lo_sign {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        if pass == 0 {
                            emit(&lo, fixed);
                        } else {
                            emit(fixed, &lo);
                        }
                    }
                }
                prev = Some((along, sign));
            }
        }
    }
    Ok(rows.join("\n") + "\n")
}
