//! Objectives `f(x, u)` optimised over the clipped bodies.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::sphere::{sample_sphere, SpherePoint};

/// Threshold on `|det Q| / Π‖row_i‖` below which `Q` counts as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-9;

pub type Evaluator = dyn Fn(&[f64], &SpherePoint) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum Objective {
    /// `⟨u, x⟩`
    Inner,
    /// `⟨u, Q x⟩` with `Q` nonsingular.
    Bilinear(Matrix),
    /// Arbitrary continuous `f(x, u)`. Must be pure and thread-safe.
    BlackBox {
        evaluator: Arc<Evaluator>,
        declared_antipodal: bool,
    },
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Inner => write!(f, "Inner"),
            Objective::Bilinear(q) => f.debug_tuple("Bilinear").field(&q.rows()).finish(),
            Objective::BlackBox {
                declared_antipodal, ..
            } => f
                .debug_struct("BlackBox")
                .field("declared_antipodal", declared_antipodal)
                .finish_non_exhaustive(),
        }
    }
}

impl Objective {
    pub fn bilinear(rows: &[Vec<f64>]) -> Result<Self> {
        let q = Matrix::from_rows(rows).ok_or(Error::MatrixShape {
            expected: rows.len(),
        })?;
        if q.rows().iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("bilinear matrix"));
        }
        let sd = q.scaled_determinant();
        if !(sd > SINGULAR_THRESHOLD) {
            return Err(Error::SingularMatrix(sd));
        }
        Ok(Objective::Bilinear(q))
    }

    pub fn black_box<F>(f: F, declared_antipodal: bool) -> Self
    where
        F: Fn(&[f64], &SpherePoint) -> f64 + Send + Sync + 'static,
    {
        Objective::BlackBox {
            evaluator: Arc::new(f),
            declared_antipodal,
        }
    }

    /// Dimension the objective is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Objective::Bilinear(q) => Some(q.dim()),
            _ => None,
        }
    }

    /// For objectives linear in `x`: the coefficient vector `c` with
    /// `f(x, p) = ⟨c, x⟩`.
    pub fn linear_coefficients(&self, p: &SpherePoint) -> Option<Vec<f64>> {
        match self {
            Objective::Inner => Some(p.head().to_vec()),
            Objective::Bilinear(q) => Some(q.transpose_mul_vec(p.head())),
            Objective::BlackBox { .. } => None,
        }
    }

    /// Whether inner problems with this objective are solved in closed form.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Objective::BlackBox { .. })
    }

    pub fn eval(&self, x: &[f64], p: &SpherePoint) -> Result<f64> {
        if x.len() != p.n() {
            return Err(Error::DimensionMismatch {
                expected: p.n(),
                got: x.len(),
            });
        }
        let v = match self {
            Objective::Inner => dot(p.head(), x),
            Objective::Bilinear(q) => {
                if q.dim() != x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: q.dim(),
                        got: x.len(),
                    });
                }
                dot(p.head(), &q.mul_vec(x))
            }
            Objective::BlackBox { evaluator, .. } => evaluator(x, p),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective(v))
        }
    }

    /// Whether `f(x, -p) = -f(x, p)`. Linear-in-`u` objectives are antipodal
    /// by construction; black boxes must declare it and survive `count`
    /// random probes with `‖x‖ ≤ 2`.
    pub fn antipodality_check(&self, n: usize, seed: u64, count: usize) -> bool {
        let Objective::BlackBox {
            evaluator,
            declared_antipodal,
        } = self
        else {
            return true;
        };
        if !declared_antipodal {
            return false;
        }
        let points = sample_sphere(n, count, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
        for p in points {
            let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let dn = norm(&dir);
            let radius = 2.0 * unit.sample(&mut rng).powf(1.0 / n as f64);
            let x: Vec<f64> = if dn > 0.0 {
                dir.iter().map(|d| d / dn * radius).collect()
            } else {
                vec![0.0; n]
            };
            let a = evaluator(&x, &p);
            let b = evaluator(&x, &p.antipode());
            if !a.is_finite() || !b.is_finite() || (a + b).abs() > 1e-9 * (1.0 + a.abs()) {
                return false;
            }
        }
        true
    }
}
