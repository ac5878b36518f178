//! Problem files, run reports and sweep tables.
//!
//! A problem file is a JSON document:
//!
//! ```json
//! {
//!   "dimension": 1,
//!   "bodies": [{"type": "polytope", "vertices": [[-1], [1]]}],
//!   "objectives": [{"type": "inner"}],
//!   "epsilon": "auto",
//!   "seed": 0
//! }
//! ```
//!
//! Bodies are `polytope` (vertex list), `ball` (`center`, `radius`) or
//! `points` (a point cloud taken as the vertex list of its hull).
//! Objectives are `inner` or `bilinear` with a matrix `Q`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bodies::ConvexBody;
use crate::error::Error;
use crate::gapmap::{odd_gap, phi, phi_antipodal, psi, EpsilonPolicy, Instance};
use crate::objectives::Objective;
use crate::solver::Certificate;
use crate::sphere::{circle_point, SpherePoint};

/// Coordinates within this distance of the unit sphere are rescaled onto it.
pub const NORMALIZE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    pub bodies: Vec<BodySpec>,
    pub objectives: Vec<ObjectiveSpec>,
    pub epsilon: EpsilonSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Polytope { vertices: Vec<Vec<f64>> },
    Ball { center: Vec<f64>, radius: f64 },
    Points { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Inner,
    Bilinear {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSpec {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Syntax { path: String, message: String },
    #[error("{path}: {source}")]
    Invalid { path: String, source: Error },
}

impl LoadError {
    /// JSON path of the offending field (`.` for the whole document).
    pub fn field_path(&self) -> &str {
        match self {
            LoadError::Io { path, .. }
            | LoadError::Syntax { path, .. }
            | LoadError::Invalid { path, .. } => path,
        }
    }
}

fn invalid(path: impl Into<String>, source: Error) -> LoadError {
    LoadError::Invalid {
        path: path.into(),
        source,
    }
}

/// A validated problem together with its seed and content hash.
#[derive(Debug, Clone)]
pub struct Problem {
    pub instance: Instance,
    pub seed: u64,
    /// Hex SHA-256 of the file bytes.
    pub digest: String,
}

pub fn parse_problem(path: impl AsRef<Path>) -> Result<Problem, LoadError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_problem_bytes(&bytes)
}

pub fn parse_problem_bytes(bytes: &[u8]) -> Result<Problem, LoadError> {
    let text = std::str::from_utf8(bytes).map_err(|e| LoadError::Syntax {
        path: ".".into(),
        message: format!("not UTF-8: {e}"),
    })?;
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| LoadError::Syntax {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    Ok(Problem {
        instance: build_instance(&file)?,
        seed: file.seed,
        digest: sha256_hex(bytes),
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn check_points(points: &[Vec<f64>], n: usize, path: &str) -> Result<(), LoadError> {
    if points.is_empty() {
        return Err(invalid(path, Error::EmptyPolytope));
    }
    for (j, p) in points.iter().enumerate() {
        if p.len() != n {
            return Err(invalid(
                format!("{path}[{j}]"),
                Error::DimensionMismatch {
                    expected: n,
                    got: p.len(),
                },
            ));
        }
    }
    Ok(())
}

/// Validates a parsed file and builds the instance, reporting the first
/// problem with the path of the field at fault.
pub fn build_instance(file: &ProblemFile) -> Result<Instance, LoadError> {
    let n = file.dimension;
    if n == 0 {
        return Err(invalid("dimension", Error::InvalidSphereDimension(0)));
    }
    for (what, got, path) in [
        ("bodies", file.bodies.len(), "bodies"),
        ("objectives", file.objectives.len(), "objectives"),
    ] {
        if got != n {
            return Err(invalid(
                path,
                Error::CountMismatch {
                    what,
                    expected: n,
                    got,
                },
            ));
        }
    }

    let mut bodies = Vec::with_capacity(n);
    for (i, spec) in file.bodies.iter().enumerate() {
        let body = match spec {
            BodySpec::Polytope { vertices } => {
                let path = format!("bodies[{i}].vertices");
                check_points(vertices, n, &path)?;
                ConvexBody::polytope(vertices.clone()).map_err(|e| invalid(path, e))?
            }
            BodySpec::Points { points } => {
                let path = format!("bodies[{i}].points");
                check_points(points, n, &path)?;
                ConvexBody::polytope(points.clone()).map_err(|e| invalid(path, e))?
            }
            BodySpec::Ball { center, radius } => {
                if center.len() != n {
                    return Err(invalid(
                        format!("bodies[{i}].center"),
                        Error::DimensionMismatch {
                            expected: n,
                            got: center.len(),
                        },
                    ));
                }
                if !(*radius > 0.0) {
                    return Err(invalid(format!("bodies[{i}].radius"), Error::NonPositiveRadius(*radius)));
                }
                ConvexBody::ball(center.clone(), *radius).map_err(|e| invalid(format!("bodies[{i}]"), e))?
            }
        };
        let found = body.interior_dimension();
        if found < n {
            return Err(invalid(format!("bodies[{i}]"), Error::FlatBody { found, expected: n }));
        }
        bodies.push(body);
    }

    let mut objectives = Vec::with_capacity(n);
    for (i, spec) in file.objectives.iter().enumerate() {
        objectives.push(match spec {
            ObjectiveSpec::Inner => Objective::Inner,
            ObjectiveSpec::Bilinear { q } => {
                let path = format!("objectives[{i}].Q");
                if q.len() != n {
                    return Err(invalid(path, Error::MatrixShape { expected: n }));
                }
                if let Some(j) = q.iter().position(|row| row.len() != n) {
                    return Err(invalid(format!("{path}[{j}]"), Error::MatrixShape { expected: n }));
                }
                Objective::bilinear(q).map_err(|e| invalid(path, e))?
            }
        });
    }

    let policy = match &file.epsilon {
        EpsilonSpec::Value(e) => EpsilonPolicy::Fixed(*e),
        EpsilonSpec::Keyword(k) if k == "auto" => EpsilonPolicy::Auto,
        EpsilonSpec::Keyword(k) => {
            return Err(invalid(
                "epsilon",
                Error::InvalidArgument(format!("expected \"auto\" or a number, got {k:?}")),
            ))
        }
    };
    Instance::new(bodies, objectives, policy).map_err(|e| {
        let path = match e {
            Error::InadmissibleEpsilon { .. } => "epsilon",
            _ => ".",
        };
        invalid(path, e)
    })
}

/// Reads a point given on the command line. Coordinates within
/// [`NORMALIZE_SLACK`] of unit norm are rescaled; exact unit vectors are
/// kept bit for bit.
pub fn parse_point(coords: &[f64], n: usize) -> Result<SpherePoint, Error> {
    if coords.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: coords.len(),
        });
    }
    match SpherePoint::new(coords.to_vec()) {
        Ok(p) => Ok(p),
        Err(Error::NotUnit { norm, deviation }) if deviation > NORMALIZE_SLACK => {
            Err(Error::NotUnit { norm, deviation })
        }
        Err(Error::NotUnit { .. }) => SpherePoint::normalized(coords.to_vec()),
        Err(e) => Err(e),
    }
}

/// Output of `eval`. Deliberately free of timing so repeated runs print
/// identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub point: SpherePoint,
    pub epsilon: f64,
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    /// `φ(-u)`; absent when some objective is not antipodal.
    pub phi_antipodal: Option<Vec<f64>>,
    pub odd_gap: Option<Vec<f64>>,
    pub exact_inner: bool,
    pub instance_digest: String,
    pub version: String,
}

pub fn eval_report(problem: &Problem, p: &SpherePoint) -> Result<EvalReport, Error> {
    let inst = &problem.instance;
    let eps = inst.epsilon()?;
    let antipodal = (0..inst.n()).all(|i| inst.is_antipodal(i));
    Ok(EvalReport {
        point: p.clone(),
        epsilon: eps,
        psi: psi(inst, p)?.values,
        phi: phi(inst, p, eps)?.values,
        phi_antipodal: if antipodal {
            Some(phi_antipodal(inst, p, eps)?.values)
        } else {
            None
        },
        odd_gap: if antipodal { Some(odd_gap(inst, p, eps)?) } else { None },
        exact_inner: inst.is_exact(),
        instance_digest: problem.digest.clone(),
        version: VERSION.to_string(),
    })
}

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Output of `solve` and `verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub certificate: Certificate,
    pub instance_digest: String,
    pub version: String,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn new(certificate: Certificate, problem: &Problem, wall_time_ms: f64) -> Self {
        Self {
            certificate,
            instance_digest: problem.digest.clone(),
            version: VERSION.to_string(),
            wall_time_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub psi: f64,
    pub phi: f64,
    pub gap: f64,
}

/// `steps + 1` rows with θ uniform on `[-π/4, 7π/4]`, for a one-body
/// instance on S^1.
pub fn sweep(inst: &Instance, steps: usize) -> Result<Vec<SweepRow>, Error> {
    if inst.n() != 1 {
        return Err(Error::InvalidArgument(format!(
            "sweep needs dimension 1, got {}",
            inst.n()
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let eps = inst.epsilon()?;
    (0..=steps)
        .map(|k| {
            let theta = -FRAC_PI_4 + 2.0 * PI * k as f64 / steps as f64;
            let p = circle_point(theta);
            Ok(SweepRow {
                theta,
                psi: psi(inst, &p)?.values[0],
                phi: phi(inst, &p, eps)?.values[0],
                gap: odd_gap(inst, &p, eps)?[0],
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("theta,psi_1,phi_1,gap_1\n");
    for r in rows {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", r.theta, r.psi, r.phi, r.gap);
    }
    out
}
