//! Compact convex bodies: polytopes in vertex form and closed balls.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, distance, dot, norm, rank, sub};
use crate::sphere::{Halfspace, Sense, SpherePoint};

/// Vertices closer than this are merged on construction.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// Pivot threshold for the affine-rank computation.
pub const RANK_THRESHOLD: f64 = 1e-9;

const MIN_NORM_BOUND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConvexBody {
    /// Convex hull of the listed points. Redundant (interior) points are
    /// allowed; nothing downstream needs a minimal vertex set.
    Polytope { vertices: Vec<Vec<f64>> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl ConvexBody {
    pub fn polytope(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::EmptyPolytope);
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("zero-dimensional vertex".into()));
        }
        let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite("polytope vertex"));
            }
            if !vertices.iter().any(|v| distance(v, &p) <= DUPLICATE_TOL) {
                vertices.push(p);
            }
        }
        Ok(ConvexBody::Polytope { vertices })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidArgument("zero-dimensional ball".into()));
        }
        if center.iter().any(|c| !c.is_finite()) || !radius.is_finite() {
            return Err(Error::NonFinite("ball"));
        }
        if radius <= 0.0 {
            return Err(Error::NonPositiveRadius(radius));
        }
        Ok(ConvexBody::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Polytope { vertices } => vertices[0].len(),
            ConvexBody::Ball { center, .. } => center.len(),
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, ConvexBody::Ball { .. })
    }

    /// Upper bound `M ≥ sup ‖x‖` over the body, floored at 1e-9.
    pub fn norm_bound(&self) -> f64 {
        let m = match self {
            ConvexBody::Polytope { vertices } => {
                vertices.iter().map(|v| norm(v)).fold(0.0, f64::max)
            }
            ConvexBody::Ball { center, radius } => norm(center) + radius,
        };
        m.max(MIN_NORM_BOUND)
    }

    /// `max ⟨a, x⟩` over the body.
    pub fn support(&self, a: &[f64]) -> f64 {
        match self {
            ConvexBody::Polytope { vertices } => vertices
                .iter()
                .map(|v| dot(a, v))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::Ball { center, radius } => dot(a, center) + radius * norm(a),
        }
    }

    /// Affine dimension of the body.
    pub fn interior_dimension(&self) -> usize {
        match self {
            ConvexBody::Polytope { vertices } => {
                let base = &vertices[0];
                let diffs: Vec<Vec<f64>> = vertices[1..].iter().map(|v| sub(v, base)).collect();
                rank(&diffs, RANK_THRESHOLD)
            }
            ConvexBody::Ball { center, .. } => center.len(),
        }
    }

    /// Whether `x` lies in the body, up to `tol`. For polytopes this solves
    /// a small feasibility problem, so it is meant for tests and
    /// diagnostics rather than inner loops.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            ConvexBody::Ball { center, radius } => distance(x, center) <= radius + tol,
            ConvexBody::Polytope { vertices } => {
                polytope_distance(vertices, x) <= tol
            }
        }
    }
}

/// Euclidean distance from `x` to the hull of `vertices`, by Wolfe's
/// nearest-point method on the translated points.
fn polytope_distance(vertices: &[Vec<f64>], x: &[f64]) -> f64 {
    let pts: Vec<Vec<f64>> = vertices.iter().map(|v| sub(v, x)).collect();
    let scale = pts.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(1e-300);
    let start = (0..pts.len())
        .min_by(|&i, &j| dot(&pts[i], &pts[i]).total_cmp(&dot(&pts[j], &pts[j])))
        .unwrap();
    // active set with convex weights
    let mut set: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let combine = |set: &[usize], w: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (&i, &wi) in set.iter().zip(w) {
            axpy(&mut y, wi, &pts[i]);
        }
        y
    };
    let mut y = pts[start].clone();
    for _ in 0..(10 * pts.len() + 100) {
        let yy = dot(&y, &y);
        if yy <= 1e-30 * scale {
            return 0.0;
        }
        let j = (0..pts.len())
            .min_by(|&i, &k| dot(&y, &pts[i]).total_cmp(&dot(&y, &pts[k])))
            .unwrap();
        if yy - dot(&y, &pts[j]) <= 1e-14 * scale || set.contains(&j) {
            break;
        }
        set.push(j);
        weights.push(0.0);
        loop {
            let Some(alpha) = affine_min_norm(&pts, &set) else {
                // degenerate active set; drop the newest point
                set.pop();
                weights.pop();
                break;
            };
            if alpha.iter().all(|&a| a > 1e-15) {
                weights = alpha;
                break;
            }
            let mut theta: f64 = 1.0;
            for (&w, &a) in weights.iter().zip(&alpha) {
                if a <= 1e-15 && w - a > 0.0 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = theta * a + (1.0 - theta) * *w;
            }
            let mut k = 0;
            while k < set.len() {
                if weights[k] <= 1e-15 {
                    set.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
        }
        y = combine(&set, &weights);
    }
    norm(&y)
}

/// Affine weights of the min-norm point of the affine hull of `pts[set]`.
fn affine_min_norm(pts: &[Vec<f64>], set: &[usize]) -> Option<Vec<f64>> {
    let k = set.len();
    if k == 1 {
        return Some(vec![1.0]);
    }
    let q0 = &pts[set[0]];
    let d: Vec<Vec<f64>> = set[1..].iter().map(|&i| sub(&pts[i], q0)).collect();
    let m = k - 1;
    let mut g: Vec<Vec<f64>> = (0..m)
        .map(|r| {
            let mut row: Vec<f64> = (0..m).map(|c| dot(&d[r], &d[c])).collect();
            row.push(-dot(&d[r], q0));
            row
        })
        .collect();
    let diag = (0..m).map(|r| g[r][r]).fold(0.0, f64::max);
    for col in 0..m {
        let piv = (col..m).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs()))?;
        if g[piv][col].abs() <= 1e-13 * diag.max(1e-300) {
            return None;
        }
        g.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = g[r][col] / g[col][col];
                for c in col..=m {
                    g[r][c] -= f * g[col][c];
                }
            }
        }
    }
    let beta: Vec<f64> = (0..m).map(|r| g[r][m] / g[r][r]).collect();
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta);
    Some(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Empty,
    NonEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub status: Status,
    /// `max ⟨u, x⟩` over the body.
    pub support_value: f64,
    /// `support_value - u_{n+1}`.
    pub margin: f64,
}

impl FeasibilityReport {
    pub fn is_empty(&self) -> bool {
        self.status == Status::Empty
    }
}

/// Default emptiness tolerance: `1e-9 · (1 + |offset| + M)`.
pub fn default_tol(body: &ConvexBody, offset: f64) -> f64 {
    1e-9 * (1.0 + offset.abs() + body.norm_bound())
}

/// Decides whether `A ∩ H` is empty for a closed half-space `H`.
pub fn feasibility_halfspace(body: &ConvexBody, h: &Halfspace, tol: f64) -> Result<FeasibilityReport> {
    if h.normal.len() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: h.normal.len(),
        });
    }
    let g = match h.sense {
        Sense::Geq => h.clone(),
        Sense::Leq => h.normalized(),
    };
    let support_value = body.support(&g.normal);
    let margin = support_value - g.offset;
    let status = if margin < -tol {
        Status::Empty
    } else {
        Status::NonEmpty
    };
    Ok(FeasibilityReport {
        status,
        support_value,
        margin,
    })
}

/// Whether `A ∩ H⁺_p` is empty: it is iff `max_A ⟨u, x⟩ < u_{n+1}`.
pub fn feasibility(body: &ConvexBody, p: &SpherePoint, tol: f64) -> Result<FeasibilityReport> {
    let (plus, _) = p.halfspaces();
    feasibility_halfspace(body, &plus, tol)
}

/// Diameter of `B ∩ H⁺_p` for a ball `B`.
pub fn cap_diameter_ball(body: &ConvexBody, p: &SpherePoint) -> Result<f64> {
    let ConvexBody::Ball { center, radius } = body else {
        return Err(Error::InvalidArgument("cap diameter needs a ball".into()));
    };
    if center.len() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            got: p.n(),
        });
    }
    let u = p.head();
    let un = norm(u);
    if un == 0.0 {
        return Err(Error::ZeroNormal);
    }
    let d = (p.last() - dot(u, center)) / un;
    if d > *radius {
        return Err(Error::EmptyIntersection);
    }
    if d <= 0.0 {
        Ok(2.0 * radius)
    } else {
        Ok(2.0 * (radius * radius - d * d).max(0.0).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{circle_point, sample_sphere, SpherePoint};
    use std::f64::consts::FRAC_PI_2;

    fn interval() -> ConvexBody {
        ConvexBody::polytope(vec![vec![-1.0], vec![1.0]]).unwrap()
    }

    /// Point whose hyperplane has signed distance `d` from the origin
    /// along `e_1` in R^2.
    fn plane_at(d: f64) -> SpherePoint {
        SpherePoint::normalized(vec![1.0, 0.0, d]).unwrap()
    }

    #[test]
    fn norm_bounds() {
        let sq = ConvexBody::polytope(vec![
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
        ])
        .unwrap();
        assert!((sq.norm_bound() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap().norm_bound(), 1.0);
        assert_eq!(interval().norm_bound(), 1.0);
        let tiny = ConvexBody::polytope(vec![vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(tiny.norm_bound(), 1e-9);
    }

    #[test]
    fn duplicates_are_merged() {
        let p = ConvexBody::polytope(vec![vec![0.0, 0.0], vec![1e-13, 0.0], vec![1.0, 0.0]]).unwrap();
        let ConvexBody::Polytope { vertices } = p else { unreachable!() };
        assert_eq!(vertices.len(), 2);
    }

    #[test]
    fn invalid_bodies_are_rejected() {
        assert_eq!(ConvexBody::polytope(vec![]), Err(Error::EmptyPolytope));
        assert!(ConvexBody::polytope(vec![vec![0.0], vec![0.0, 1.0]]).is_err());
        assert_eq!(
            ConvexBody::ball(vec![0.0], 0.0),
            Err(Error::NonPositiveRadius(0.0))
        );
        assert!(ConvexBody::ball(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn feasibility_on_the_interval() {
        let tol = 1e-9;
        let r = feasibility(&interval(), &circle_point(FRAC_PI_2), tol).unwrap();
        assert!(r.is_empty());
        assert!(r.support_value.abs() < 1e-16);

        let r = feasibility(&interval(), &circle_point(0.0), tol).unwrap();
        assert_eq!(r.status, Status::NonEmpty);
        assert_eq!(r.support_value, 1.0);
        assert_eq!(r.margin, 1.0);

        let r = feasibility(&interval(), &SpherePoint::south_pole(1), tol).unwrap();
        assert_eq!(r.status, Status::NonEmpty);
    }

    #[test]
    fn feasibility_dimension_mismatch() {
        let err = feasibility(&interval(), &SpherePoint::north_pole(2), 1e-9);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ball_support() {
        let b = ConvexBody::ball(vec![1.0, 0.0], 0.5).unwrap();
        let r = feasibility(&b, &plane_at(1.4), 1e-9).unwrap();
        // support along e1 = 1.5 (unnormalised); compare after normalising
        let p = plane_at(1.4);
        assert!((r.support_value - 1.5 * p.head()[0]).abs() < 1e-15);
        assert_eq!(r.status, Status::NonEmpty);
        assert!(feasibility(&b, &plane_at(1.6), 1e-9).unwrap().is_empty());
    }

    #[test]
    fn affine_dimension() {
        let tri = ConvexBody::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(tri.interior_dimension(), 2);
        let seg = ConvexBody::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(seg.interior_dimension(), 1);
        let ball = ConvexBody::ball(vec![0.0; 4], 2.0).unwrap();
        assert_eq!(ball.interior_dimension(), 4);
        let point = ConvexBody::polytope(vec![vec![3.0, 3.0, 3.0]]).unwrap();
        assert_eq!(point.interior_dimension(), 0);
    }

    #[test]
    fn cap_diameters() {
        let b = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!((cap_diameter_ball(&b, &plane_at(0.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!((cap_diameter_ball(&b, &plane_at(0.6)).unwrap() - 1.6).abs() < 1e-12);
        assert!(cap_diameter_ball(&b, &plane_at(1.0)).unwrap().abs() < 1e-7);
        assert_eq!(
            cap_diameter_ball(&b, &plane_at(1.2)),
            Err(Error::EmptyIntersection)
        );
        assert_eq!(
            cap_diameter_ball(&b, &SpherePoint::north_pole(2)),
            Err(Error::ZeroNormal)
        );
    }

    #[test]
    fn cap_diameter_shrinks_towards_tangency() {
        let r = 1.3;
        let b = ConvexBody::ball(vec![0.2, -0.1], r).unwrap();
        let dir = [0.6, 0.8];
        let base = dot(&dir, &[0.2, -0.1]);
        let mut prev = f64::INFINITY;
        for k in 1..=20 {
            let d = r * (1.0 - 2f64.powi(-k));
            let p = SpherePoint::normalized(vec![dir[0], dir[1], base + d]).unwrap();
            assert_eq!(feasibility(&b, &p, 1e-9).unwrap().status, Status::NonEmpty);
            let diam = cap_diameter_ball(&b, &p).unwrap();
            assert!(diam < prev);
            prev = diam;
        }
        assert!(prev < 1e-2 * r);
    }

    #[test]
    fn sides_cover_space() {
        let bodies = [
            interval(),
            ConvexBody::ball(vec![0.3], 0.1).unwrap(),
        ];
        for body in &bodies {
            for p in sample_sphere(1, 500, 3) {
                let a = feasibility(body, &p, 0.0).unwrap();
                let b = feasibility(body, &p.antipode(), 0.0).unwrap();
                assert!(!(a.is_empty() && b.is_empty()));
            }
        }
    }

    #[test]
    fn raising_the_offset_never_creates_feasibility() {
        let body = ConvexBody::polytope(vec![vec![0.0, 1.0], vec![2.0, -1.0], vec![-1.0, -0.5]]).unwrap();
        for p in sample_sphere(2, 300, 11) {
            let mut prev_empty = false;
            for k in 0..40 {
                let shifted = vec![p.head()[0], p.head()[1], p.last() + 0.1 * k as f64];
                // normalising rescales u and u_{n+1} together; the set is unchanged
                let q = SpherePoint::normalized(shifted).unwrap();
                let empty = feasibility(&body, &q, 0.0).unwrap().is_empty();
                if prev_empty {
                    assert!(empty);
                }
                prev_empty = empty;
            }
        }
    }

    #[test]
    fn polytope_containment() {
        let tri = ConvexBody::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(tri.contains(&[0.2, 0.2], 1e-9));
        assert!(tri.contains(&[0.5, 0.5], 1e-9));
        assert!(!tri.contains(&[0.6, 0.6], 1e-9));
        assert!(!tri.contains(&[-0.1, 0.5], 1e-9));
    }
}
