//! Max and min of an objective over a body clipped by one closed half-space.
//!
//! Linear objectives are solved exactly: over a polytope by enumerating the
//! vertices of the cut barycentric simplex, over a ball in closed form.
//! Black-box objectives over balls are approximated by low-discrepancy
//! sampling of the cap followed by a bounded simplex polish.

use std::cell::Cell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::Serialize;

use crate::bodies::{default_tol, feasibility_halfspace, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, orthonormal_complement, scaled};
use crate::objectives::Objective;
use crate::simplex::NelderMead;
use crate::sphere::{Halfspace, SpherePoint};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxMinResult {
    pub max_value: f64,
    pub min_value: f64,
    pub arg_max: Vec<f64>,
    pub arg_min: Vec<f64>,
    pub exact: bool,
    /// Estimated absolute error of `max_value - min_value`; zero when exact.
    pub approx_error: f64,
}

impl MaxMinResult {
    pub fn gap(&self) -> f64 {
        self.max_value - self.min_value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

/// Sampling settings for black-box inner problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlackBoxSettings {
    pub budget: usize,
    pub seed: u64,
}

impl Default for BlackBoxSettings {
    fn default() -> Self {
        Self {
            budget: 1024,
            seed: 0,
        }
    }
}

/// Smallest sample budget accepted by the black-box solver.
pub const MIN_BUDGET: usize = 64;

const POLISH_ITERATIONS: usize = 200;
const POLISH_XTOL: f64 = 1e-10;

/// Exact max/min of `⟨c, x⟩` over `conv(vertices) ∩ {⟨u, x⟩ ≥ b}`.
///
/// In barycentric coordinates the feasible set is the standard simplex cut
/// by a single half-space; its vertices are the vertices `v_j` with
/// `⟨u, v_j⟩ ≥ b` and the points where the cut crosses the edges
/// `[v_j, v_k]` with `⟨u, v_j⟩ > b > ⟨u, v_k⟩`. A linear objective attains
/// both extremes at such vertices, so enumerating them is exact.
pub fn maxmin_linear_polytope(
    vertices: &[Vec<f64>],
    c: &[f64],
    u: &[f64],
    b: f64,
    tol: f64,
) -> Result<MaxMinResult> {
    let Some(first) = vertices.first() else {
        return Err(Error::EmptyPolytope);
    };
    let n = first.len();
    for v in [c, u] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    let a: Vec<f64> = vertices.iter().map(|v| dot(u, v)).collect();
    let cv: Vec<f64> = vertices.iter().map(|v| dot(c, v)).collect();

    // (value, j, k, t) with point t·v_j + (1 - t)·v_k; pure vertices use k = j
    let mut best_max: Option<(f64, usize, usize, f64)> = None;
    let mut best_min: Option<(f64, usize, usize, f64)> = None;
    let mut offer = |cand: (f64, usize, usize, f64)| {
        if best_max.is_none_or(|m| cand.0 > m.0) {
            best_max = Some(cand);
        }
        if best_min.is_none_or(|m| cand.0 < m.0) {
            best_min = Some(cand);
        }
    };
    for j in 0..vertices.len() {
        if a[j] >= b - tol {
            offer((cv[j], j, j, 1.0));
        }
    }
    for j in 0..vertices.len() {
        if a[j] <= b {
            continue;
        }
        for k in 0..vertices.len() {
            if a[k] < b {
                let t = (b - a[k]) / (a[j] - a[k]);
                offer((t * cv[j] + (1.0 - t) * cv[k], j, k, t));
            }
        }
    }
    let (Some(mx), Some(mn)) = (best_max, best_min) else {
        return Err(Error::EmptyIntersection);
    };
    let point = |(_, j, k, t): (f64, usize, usize, f64)| -> Vec<f64> {
        if j == k {
            vertices[j].clone()
        } else {
            vertices[j]
                .iter()
                .zip(&vertices[k])
                .map(|(x, y)| t * x + (1.0 - t) * y)
                .collect()
        }
    };
    Ok(MaxMinResult {
        max_value: mx.0,
        min_value: mn.0,
        arg_max: point(mx),
        arg_min: point(mn),
        exact: true,
        approx_error: 0.0,
    })
}

/// Exact max/min of `⟨c, x⟩` over `B(center, r) ∩ {⟨u, x⟩ ≥ b}`.
pub fn maxmin_linear_ball(
    center: &[f64],
    r: f64,
    c: &[f64],
    u: &[f64],
    b: f64,
) -> Result<MaxMinResult> {
    let tol = 1e-9 * (1.0 + b.abs() + norm(center) + r);
    ball_maxmin(center, r, c, u, b, tol)
}

fn ball_maxmin(center: &[f64], r: f64, c: &[f64], u: &[f64], b: f64, tol: f64) -> Result<MaxMinResult> {
    let n = center.len();
    for v in [c, u] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    let un = norm(u);
    if dot(u, center) + r * un < b - tol {
        return Err(Error::EmptyIntersection);
    }
    let (max_value, arg_max) = ball_max(center, r, c, u, un, b, tol);
    let neg: Vec<f64> = c.iter().map(|x| -x).collect();
    let (neg_max, arg_min) = ball_max(center, r, &neg, u, un, b, tol);
    Ok(MaxMinResult {
        max_value,
        min_value: -neg_max,
        arg_max,
        arg_min,
        exact: true,
        approx_error: 0.0,
    })
}

/// Maximiser of `⟨c, x⟩` over the (nonempty) cap.
fn ball_max(center: &[f64], r: f64, c: &[f64], u: &[f64], un: f64, b: f64, tol: f64) -> (f64, Vec<f64>) {
    let cn = norm(c);
    let base = dot(c, center);
    if cn > 0.0 {
        let mut free = center.to_vec();
        axpy(&mut free, r / cn, c);
        if un == 0.0 || dot(u, &free) >= b - tol {
            return (base + r * cn, free);
        }
    } else if un == 0.0 {
        return (0.0, center.to_vec());
    }
    // the cut is active: optimise over the disk B ∩ {⟨u, x⟩ = b}
    let d = ((b - dot(u, center)) / un).min(r);
    let mut foot = center.to_vec();
    axpy(&mut foot, d / un, u);
    if cn == 0.0 {
        // every feasible point is optimal; report the foot of the cut, or
        // the centre when it is feasible
        return if d <= 0.0 { (0.0, center.to_vec()) } else { (0.0, foot) };
    }
    let disk_radius = (r * r - d * d).max(0.0).sqrt();
    let along = dot(c, u) / (un * un);
    let mut perp = c.to_vec();
    axpy(&mut perp, -along, u);
    let mut pn = norm(&perp);
    if pn <= 1e-12 * cn {
        // c is parallel to u; what is left of perp is rounding noise
        pn = 0.0;
    }
    let value = dot(c, &foot) + disk_radius * pn;
    let mut arg = foot;
    if pn > 0.0 && disk_radius > 0.0 {
        axpy(&mut arg, disk_radius / pn, &perp);
    }
    (value, arg)
}

/// Parametrisation of a ball cap `B ∩ {⟨a, x⟩ ≥ b}` by the unit cube.
struct CapChart {
    center: Vec<f64>,
    radius: f64,
    /// Unit normal and orthonormal complement; `None` when the cut is vacuous.
    frame: Option<(Vec<f64>, Vec<Vec<f64>>)>,
    /// Signed distance of the cut plane from the centre, clamped to `[-r, r]`.
    depth: f64,
}

impl CapChart {
    fn new(center: &[f64], radius: f64, h: &Halfspace) -> Self {
        let an = norm(&h.normal);
        if an == 0.0 {
            return Self {
                center: center.to_vec(),
                radius,
                frame: None,
                depth: -radius,
            };
        }
        let unit = scaled(&h.normal, 1.0 / an);
        let depth = ((h.offset - dot(&h.normal, center)) / an).clamp(-radius, radius);
        let complement = if unit.len() == 2 {
            vec![vec![-unit[1], unit[0]]]
        } else {
            orthonormal_complement(&unit)
        };
        Self {
            center: center.to_vec(),
            radius,
            frame: Some((unit, complement)),
            depth,
        }
    }

    /// Maps `[0, 1]^n` onto the cap.
    fn map(&self, t: &[f64]) -> Vec<f64> {
        let mut x = self.center.clone();
        match &self.frame {
            None => {
                let z: Vec<f64> = t.iter().map(|ti| 2.0 * ti - 1.0).collect();
                axpy(&mut x, self.radius, &cube_to_ball(&z));
            }
            Some((unit, complement)) => {
                let s = self.depth + (self.radius - self.depth) * t[0];
                axpy(&mut x, s, unit);
                let rho = (self.radius * self.radius - s * s).max(0.0).sqrt();
                let z: Vec<f64> = t[1..].iter().map(|ti| 2.0 * ti - 1.0).collect();
                for (wk, ek) in cube_to_ball(&z).iter().zip(complement) {
                    axpy(&mut x, rho * wk, ek);
                }
            }
        }
        x
    }
}

/// Radial map of `[-1, 1]^k` onto the closed unit ball.
fn cube_to_ball(z: &[f64]) -> Vec<f64> {
    let l2 = norm(z);
    if l2 == 0.0 {
        return z.to_vec();
    }
    let linf = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    scaled(z, linf / l2)
}

/// Additive-recurrence (Kronecker) sequence in `[0, 1)^dim` with a seeded
/// random shift. Prefixes are nested by construction.
fn kronecker_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    // g is the positive root of x^{dim+1} = x + 1
    let mut g = 2.0f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (dim as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=dim).map(|j| g.powi(-(j as i32)).fract()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
    let shift: Vec<f64> = (0..dim).map(|_| unit.sample(&mut rng)).collect();
    (0..count)
        .map(|k| {
            (0..dim)
                .map(|j| (shift[j] + (k as f64 + 1.0) * alpha[j]).fract())
                .collect()
        })
        .collect()
}

/// Approximate max/min of a black-box objective over `B ∩ H⁺_p`.
pub fn maxmin_blackbox_ball(
    body: &ConvexBody,
    f: &Objective,
    p: &SpherePoint,
    budget: usize,
    seed: u64,
) -> Result<MaxMinResult> {
    let (plus, _) = p.halfspaces();
    let tol = default_tol(body, p.last());
    if feasibility_halfspace(body, &plus, tol)?.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    blackbox_over_halfspace(body, f, p, &plus, BlackBoxSettings { budget, seed })
}

/// Sampling plus polish. Polishing starts from the best sample of every
/// dyadic prefix (64, 128, …, budget) of the sample sequence, so the start
/// set for budget `2B` contains the one for `B` and the result never gets
/// worse as the budget grows. The difference between the final estimate
/// and the half-budget estimate is reported as `approx_error`.
fn blackbox_over_halfspace(
    body: &ConvexBody,
    f: &Objective,
    p: &SpherePoint,
    h: &Halfspace,
    settings: BlackBoxSettings,
) -> Result<MaxMinResult> {
    let ConvexBody::Ball { center, radius } = body else {
        return Err(Error::InvalidArgument(
            "black-box inner problems need a ball body".into(),
        ));
    };
    if settings.budget < MIN_BUDGET {
        return Err(Error::InvalidArgument(format!(
            "black-box budget must be at least {MIN_BUDGET}, got {}",
            settings.budget
        )));
    }
    let dim = center.len();
    let chart = CapChart::new(center, *radius, &h.normalized());
    let failure: Cell<Option<Error>> = Cell::new(None);
    let value_at = |t: &[f64]| -> f64 {
        match f.eval(&chart.map(t), p) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };

    let samples = kronecker_points(dim, settings.budget, settings.seed);
    let values: Vec<f64> = samples.iter().map(|t| value_at(t)).collect();
    if let Some(e) = failure.take() {
        return Err(e);
    }

    let mut levels = Vec::new();
    let mut len = MIN_BUDGET;
    while len < settings.budget {
        levels.push(len);
        len *= 2;
    }
    levels.push(settings.budget);

    let nm = NelderMead {
        max_iter: POLISH_ITERATIONS,
        xtol: POLISH_XTOL,
        bounds: Some((0.0, 1.0)),
        ..Default::default()
    };
    // (value, t) running best for max and min, one entry per level
    let mut best_max = (f64::NEG_INFINITY, samples[0].clone());
    let mut best_min = (f64::INFINITY, samples[0].clone());
    let mut history: Vec<(f64, f64)> = Vec::with_capacity(levels.len());
    let mut polished_max: Vec<usize> = Vec::new();
    let mut polished_min: Vec<usize> = Vec::new();
    let mut scan_from = 0;
    let mut arg_hi = 0;
    let mut arg_lo = 0;
    for &level in &levels {
        for i in scan_from..level {
            if values[i] > values[arg_hi] {
                arg_hi = i;
            }
            if values[i] < values[arg_lo] {
                arg_lo = i;
            }
        }
        scan_from = level;
        let step = 0.5 * (level as f64).powf(-1.0 / dim as f64);
        if values[arg_hi] > best_max.0 {
            best_max = (values[arg_hi], samples[arg_hi].clone());
        }
        if values[arg_lo] < best_min.0 {
            best_min = (values[arg_lo], samples[arg_lo].clone());
        }
        if !polished_max.contains(&arg_hi) {
            polished_max.push(arg_hi);
            let out = nm.minimize(&mut |t: &[f64]| -value_at(t), &samples[arg_hi], step);
            if -out.value > best_max.0 {
                best_max = (-out.value, out.x);
            }
        }
        if !polished_min.contains(&arg_lo) {
            polished_min.push(arg_lo);
            let out = nm.minimize(&mut |t: &[f64]| value_at(t), &samples[arg_lo], step);
            if out.value < best_min.0 {
                best_min = (out.value, out.x);
            }
        }
        if let Some(e) = failure.take() {
            return Err(e);
        }
        history.push((best_max.0, best_min.0));
    }

    let approx_error = if history.len() >= 2 {
        let (hi_half, lo_half) = history[history.len() - 2];
        (best_max.0 - hi_half) + (lo_half - best_min.0)
    } else {
        (best_max.0 - values[arg_hi]) + (values[arg_lo] - best_min.0)
    };
    Ok(MaxMinResult {
        max_value: best_max.0,
        min_value: best_min.0,
        arg_max: chart.map(&best_max.1),
        arg_min: chart.map(&best_min.1),
        exact: false,
        approx_error,
    })
}

/// `(δ*(u | A ∩ H), δ_*(u | A ∩ H))` for the chosen side `H` of `p`.
pub fn support_pair(body: &ConvexBody, p: &SpherePoint, side: Side) -> Result<(f64, f64)> {
    match clipped_maxmin(body, &Objective::Inner, p, side, BlackBoxSettings::default())? {
        Some(r) => Ok((r.max_value, r.min_value)),
        None => Err(Error::EmptyIntersection),
    }
}

/// The side of `p` as a `Geq` half-space.
pub fn side_halfspace(p: &SpherePoint, side: Side) -> Halfspace {
    let (plus, minus) = p.halfspaces();
    match side {
        Side::Plus => plus,
        Side::Minus => minus.normalized(),
    }
}

/// Max and min of `f(·, p)` over `A ∩ H`, `H` the chosen side of `p`, or
/// `None` when that intersection is empty.
pub fn clipped_maxmin(
    body: &ConvexBody,
    f: &Objective,
    p: &SpherePoint,
    side: Side,
    settings: BlackBoxSettings,
) -> Result<Option<MaxMinResult>> {
    if body.dim() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: p.n(),
        });
    }
    if let Some(d) = f.dim() {
        if d != p.n() {
            return Err(Error::DimensionMismatch {
                expected: p.n(),
                got: d,
            });
        }
    }
    let h = side_halfspace(p, side);
    let tol = default_tol(body, p.last());
    if feasibility_halfspace(body, &h, tol)?.is_empty() {
        return Ok(None);
    }
    let result = match (f.linear_coefficients(p), body) {
        (Some(c), ConvexBody::Polytope { vertices }) => {
            maxmin_linear_polytope(vertices, &c, &h.normal, h.offset, tol)?
        }
        (Some(c), ConvexBody::Ball { center, radius }) => {
            ball_maxmin(center, *radius, &c, &h.normal, h.offset, tol)?
        }
        (None, ConvexBody::Ball { .. }) => blackbox_over_halfspace(body, f, p, &h, settings)?,
        (None, ConvexBody::Polytope { .. }) => {
            return Err(Error::InvalidArgument(
                "black-box objectives need a ball body".into(),
            ))
        }
    };
    Ok(Some(result))
}
