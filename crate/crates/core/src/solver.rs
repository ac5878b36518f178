//! Search for antipodal-gap certificates: points `u` with `φ(u) = φ(-u)`.
//!
//! `g(u) = φ(u) - φ(-u)` is odd and continuous whenever `φ` is, so it has a
//! zero on every sphere. On S^1 a sign change of `g` on the half circle
//! brackets one; in higher dimension the residual `‖g‖²` is driven to zero
//! by multistart simplex descent in tangent-plane charts.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::clipped_opt::{MaxMinResult, Side};
use crate::error::{Error, Result};
use crate::gapmap::{cap_value, odd_gap, Instance};
use crate::linalg::axpy;
use crate::simplex::NelderMead;
use crate::sphere::{circle_point, fibonacci_sphere, sample_sphere, SpherePoint};

/// Black-box certificates accept residuals up to this multiple of the
/// estimated inner-solver error.
pub const BLACKBOX_TOL_FACTOR: f64 = 10.0;

/// Starts evaluated together before checking for convergence.
const START_BATCH: usize = 8;

/// Largest accepted `brute_scan` resolution.
pub const MAX_SCAN_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    CircleBisection,
    Multistart,
}

/// Both sides of the hyperplane for one body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodyReport {
    pub plus_max: Option<f64>,
    pub plus_min: Option<f64>,
    pub minus_max: Option<f64>,
    pub minus_min: Option<f64>,
    pub plus_nonempty: bool,
    pub minus_nonempty: bool,
    /// `φ_i(u)`
    pub phi_plus: f64,
    /// `φ_i(-u)`
    pub phi_minus: f64,
}

impl BodyReport {
    fn from_sides(plus: Option<&MaxMinResult>, minus: Option<&MaxMinResult>, last: f64, eps: f64) -> Self {
        Self {
            plus_max: plus.map(|r| r.max_value),
            plus_min: plus.map(|r| r.min_value),
            minus_max: minus.map(|r| r.max_value),
            minus_min: minus.map(|r| r.min_value),
            plus_nonempty: plus.is_some(),
            minus_nonempty: minus.is_some(),
            phi_plus: plus.map_or_else(|| cap_value(last, eps), MaxMinResult::gap),
            phi_minus: minus.map_or_else(|| cap_value(-last, eps), MaxMinResult::gap),
        }
    }

    pub fn plus_gap(&self) -> Option<f64> {
        Some(self.plus_max? - self.plus_min?)
    }

    pub fn minus_gap(&self) -> Option<f64> {
        Some(self.minus_max? - self.minus_min?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub point: SpherePoint,
    /// `‖φ(u) - φ(-u)‖∞`
    pub residual: f64,
    pub odd_gap: Vec<f64>,
    pub per_body: Vec<BodyReport>,
    /// One side empty, the other the whole body, and the objective flat on
    /// it (within `tolerance`).
    pub case_two_flags: Vec<bool>,
    pub method: Option<Method>,
    pub exact_inner: bool,
    pub converged: bool,
    /// Residual threshold actually applied (widened for black boxes).
    pub tolerance: f64,
    pub epsilon: f64,
}

impl Certificate {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = Some(method);
        self
    }

    /// Both sides nonempty for every body.
    pub fn two_sided(&self) -> bool {
        self.per_body
            .iter()
            .all(|b| b.plus_nonempty && b.minus_nonempty)
    }
}

/// Recomputes both sides of every body at `p` from scratch and reports the
/// residual of the antipodal-gap equations.
pub fn verify(inst: &Instance, p: &SpherePoint, tol: f64) -> Result<Certificate> {
    if p.n() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            got: p.n(),
        });
    }
    if let Some(i) = (0..inst.n()).find(|&i| !inst.is_antipodal(i)) {
        return Err(Error::NotAntipodal(i));
    }
    let eps = inst.epsilon()?;
    let mut per_body = Vec::with_capacity(inst.n());
    let mut approx_error = 0.0f64;
    for i in 0..inst.n() {
        let plus = inst.side_extremes(i, p, Side::Plus)?;
        let minus = inst.side_extremes(i, p, Side::Minus)?;
        for r in plus.iter().chain(minus.iter()) {
            approx_error = approx_error.max(r.approx_error);
        }
        per_body.push(BodyReport::from_sides(plus.as_ref(), minus.as_ref(), p.last(), eps));
    }
    let exact_inner = inst.is_exact();
    let tolerance = if exact_inner {
        tol
    } else {
        tol.max(BLACKBOX_TOL_FACTOR * approx_error)
    };
    let odd_gap: Vec<f64> = per_body.iter().map(|b| b.phi_plus - b.phi_minus).collect();
    let residual = odd_gap.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let case_two_flags = per_body
        .iter()
        .map(|b| match (b.plus_nonempty, b.minus_nonempty) {
            (false, true) => b.minus_gap().is_some_and(|g| g <= tolerance),
            (true, false) => b.plus_gap().is_some_and(|g| g <= tolerance),
            _ => false,
        })
        .collect();
    Ok(Certificate {
        point: p.clone(),
        residual,
        odd_gap,
        per_body,
        case_two_flags,
        method: None,
        exact_inner,
        converged: residual <= tolerance,
        tolerance,
        epsilon: eps,
    })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, g| m.max(g.abs()))
}

/// Bracketing search on S^1: scans `g(θ)` on `[0, π)` (plus `θ = π`, where
/// `g(π) = -g(0)`), then bisects the first sign change until the bracket is
/// narrower than `tol` and `|g| ≤ tol` at one end, or floating point runs out.
pub fn solve_circle(inst: &Instance, grid: usize, tol: f64) -> Result<Certificate> {
    if inst.n() != 1 {
        return Err(Error::InvalidArgument(format!(
            "circle solver needs n = 1, instance has n = {}",
            inst.n()
        )));
    }
    if !inst.is_exact() {
        return Err(Error::InvalidArgument(
            "circle solver needs closed-form objectives".into(),
        ));
    }
    if grid < 16 {
        return Err(Error::InvalidArgument(format!("grid must be at least 16, got {grid}")));
    }
    let eps = inst.epsilon()?;
    let g = |theta: f64| -> Result<f64> { Ok(odd_gap(inst, &circle_point(theta), eps)?[0]) };

    let mut thetas: Vec<f64> = (0..grid).map(|k| PI * k as f64 / grid as f64).collect();
    thetas.push(PI);
    let values = thetas.iter().map(|&t| g(t)).collect::<Result<Vec<f64>>>()?;

    let finish = |theta: f64| -> Result<Certificate> {
        Ok(verify(inst, &circle_point(theta), tol)?.with_method(Method::CircleBisection))
    };

    if values.iter().all(|v| v.abs() < 1e-14) {
        return finish(thetas[0]);
    }
    if let Some(k) = values.iter().position(|v| *v == 0.0) {
        return finish(thetas[k]);
    }
    let Some(k) = (0..grid).find(|&k| values[k].signum() != values[k + 1].signum()) else {
        // only possible through rounding in g(π) = -g(0); fall back to the
        // smallest grid value
        let k = (0..values.len())
            .min_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()))
            .unwrap();
        return finish(thetas[k]);
    };

    let (mut lo, mut hi) = (thetas[k], thetas[k + 1]);
    let (mut g_lo, mut g_hi) = (values[k], values[k + 1]);
    for _ in 0..200 {
        if hi - lo <= tol && g_lo.abs().min(g_hi.abs()) <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid)?;
        if g_mid == 0.0 {
            return finish(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    finish(if g_lo.abs() <= g_hi.abs() { lo } else { hi })
}

/// Settings for [`solve_multistart`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultistartOptions {
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
    /// Simplex iterations per start.
    pub max_iter: usize,
}

impl Default for MultistartOptions {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 0,
            tol: 1e-8,
            max_iter: 2000,
        }
    }
}

/// Start points: `starts` seeded samples followed by the `2(n+1)` axis points.
pub fn start_points(n: usize, starts: usize, seed: u64) -> Vec<SpherePoint> {
    let mut pts = sample_sphere(n, starts, seed);
    for axis in 0..=n {
        pts.push(SpherePoint::axis(n, axis, true));
        pts.push(SpherePoint::axis(n, axis, false));
    }
    pts
}

/// Minimises `‖g‖²` from each start. Starts run in batches; once a batch
/// ends with a residual within `tol` the remaining starts are skipped. The
/// winner is the lowest residual, ties going to the lower start index, so
/// the result does not depend on thread scheduling.
pub fn solve_multistart(inst: &Instance, opts: MultistartOptions) -> Result<Certificate> {
    if opts.starts < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 starts, got {}",
            opts.starts
        )));
    }
    let eps = inst.epsilon()?;
    let starts = start_points(inst.n(), opts.starts, opts.seed);
    let mut best: Option<(f64, usize, SpherePoint)> = None;
    for (b, chunk) in starts.chunks(START_BATCH).enumerate() {
        let results = chunk
            .par_iter()
            .map(|p| local_descent(inst, eps, p, opts.tol, opts.max_iter))
            .collect::<Vec<Result<(f64, SpherePoint)>>>();
        for (j, r) in results.into_iter().enumerate() {
            let (res, point) = r?;
            let idx = b * START_BATCH + j;
            if best.as_ref().is_none_or(|(r0, _, _)| res < *r0) {
                best = Some((res, idx, point));
            }
        }
        if best.as_ref().is_some_and(|(r0, _, _)| *r0 <= opts.tol) {
            break;
        }
    }
    let (_, _, point) = best.expect("at least one start");
    Ok(verify(inst, &point, opts.tol)?.with_method(Method::Multistart))
}

/// Residual descent from one start. Each round runs a simplex search in the
/// chart `y ↦ (p + E y)/‖p + E y‖` with `E` an orthonormal tangent basis at
/// the current point, then re-centres the chart at the best point found.
fn local_descent(
    inst: &Instance,
    eps: f64,
    start: &SpherePoint,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, SpherePoint)> {
    let n = inst.n();
    let failure: Cell<Option<Error>> = Cell::new(None);
    let objective = |p: &SpherePoint| -> f64 {
        match odd_gap(inst, p, eps) {
            Ok(g) => g.iter().map(|v| v * v).sum(),
            Err(e) => {
                failure.set(Some(e));
                f64::INFINITY
            }
        }
    };
    // aim well below tol so the result is robust against re-evaluation
    let target = (1e-2 * tol).powi(2);
    let mut center = start.clone();
    let mut value = objective(&center);
    let mut step = 0.25;
    let mut left = max_iter;
    while left > 0 && value > target {
        let basis = center.tangent_basis();
        let chart = |y: &[f64]| -> SpherePoint {
            let mut c = center.coords().to_vec();
            for (yi, e) in y.iter().zip(&basis) {
                axpy(&mut c, *yi, e);
            }
            SpherePoint::normalized(c).unwrap_or_else(|_| center.clone())
        };
        let nm = NelderMead {
            max_iter: left.min(100 * n + 100),
            xtol: 1e-15,
            target,
            bounds: None,
        };
        let out = nm.minimize(&mut |y: &[f64]| objective(&chart(y)), &vec![0.0; n], step);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        left = left.saturating_sub(out.iterations.max(1));
        let improved = out.value < value;
        if improved {
            center = chart(&out.x);
            value = out.value;
        }
        if !improved && out.size < 1e-14 {
            break;
        }
        step = (4.0 * out.size).clamp(1e-12, 0.25);
    }
    let residual = inf_norm(&odd_gap(inst, &center, eps)?);
    Ok((residual, center))
}

/// Exhaustive residual scan: a uniform θ grid on S^1, or on S² the union of
/// Fibonacci lattices of sizes `resolution, resolution/2, …`, so doubling
/// the resolution only adds points.
pub fn brute_scan(inst: &Instance, resolution: usize) -> Result<(SpherePoint, f64)> {
    if resolution == 0 || resolution > MAX_SCAN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "resolution must be in 1..={MAX_SCAN_POINTS}, got {resolution}"
        )));
    }
    let eps = inst.epsilon()?;
    let points: Vec<SpherePoint> = match inst.n() {
        1 => (0..resolution)
            .map(|k| circle_point(2.0 * PI * k as f64 / resolution as f64))
            .collect(),
        2 => {
            let mut pts = Vec::new();
            let mut level = resolution;
            while level >= 1 {
                pts.extend(fibonacci_sphere(level));
                level /= 2;
            }
            pts
        }
        n => {
            return Err(Error::InvalidArgument(format!(
                "brute scan supports n <= 2, got {n}"
            )))
        }
    };
    let residuals = points
        .par_iter()
        .map(|p| odd_gap(inst, p, eps).map(|g| inf_norm(&g)))
        .collect::<Result<Vec<f64>>>()?;
    let k = (0..residuals.len())
        .min_by(|&a, &b| residuals[a].total_cmp(&residuals[b]).then(a.cmp(&b)))
        .expect("nonempty scan");
    Ok((points[k].clone(), residuals[k]))
}

/// Closed form of `ψ` for the interval `[-1, 1]` with objective `u_1 x_1`,
/// at `u = (cos θ, sin θ)`.
///
/// With θ reduced into `[-π/4, 7π/4)`: on `[-π/4, π/4]` the clipped set is
/// `[tan θ, 1]` and `ψ = cos θ - sin θ`; on `(π/4, 3π/4)` it is empty; on
/// `[3π/4, 5π/4]` it is `[-1, tan θ]` and `ψ = -(cos θ + sin θ)`; on
/// `(5π/4, 7π/4)` it is the whole interval and `ψ = 2|cos θ|`.
pub fn example1_psi(theta: f64) -> f64 {
    let t = (theta + FRAC_PI_4).rem_euclid(2.0 * PI) - FRAC_PI_4;
    let (s, c) = t.sin_cos();
    if t <= FRAC_PI_4 {
        (c - s).abs()
    } else if t < 3.0 * FRAC_PI_4 {
        0.0
    } else if t <= 5.0 * FRAC_PI_4 {
        (c + s).abs()
    } else {
        2.0 * c.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::ConvexBody;
    use crate::gapmap::{psi, EpsilonPolicy};
    use crate::objectives::Objective;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

    fn interval(lo: f64, hi: f64) -> Instance {
        Instance::new(
            vec![ConvexBody::polytope(vec![vec![lo], vec![hi]]).unwrap()],
            vec![Objective::Inner],
            EpsilonPolicy::Auto,
        )
        .unwrap()
    }

    #[test]
    fn example_one_closed_form() {
        assert_eq!(example1_psi(0.0), 1.0);
        assert_eq!(example1_psi(FRAC_PI_2), 0.0);
        assert!(example1_psi(3.0 * FRAC_PI_2) < 1e-15);
        assert!((example1_psi(7.0 * PI / 4.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((example1_psi(PI) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_psi_on_a_sweep() {
        let inst = interval(-1.0, 1.0);
        for k in 0..3600 {
            let theta = -FRAC_PI_4 + 2.0 * PI * k as f64 / 3600.0;
            let v = psi(&inst, &circle_point(theta)).unwrap().values[0];
            assert!((v - example1_psi(theta)).abs() < 1e-9, "theta {theta}");
        }
    }

    #[test]
    fn circle_solver_on_example_one() {
        let inst = interval(-1.0, 1.0);
        let cert = solve_circle(&inst, 64, 1e-12).unwrap();
        assert!(cert.residual < 1e-10);
        assert_eq!(cert.method, Some(Method::CircleBisection));
        assert!(cert.two_sided());
        // symmetric body: θ = 0 is an exact zero
        assert_eq!(cert.point.coords(), &[1.0, 0.0]);
    }

    #[test]
    fn circle_solver_on_shifted_interval() {
        let inst = interval(0.0, 2.0);
        let cert = solve_circle(&inst, 64, 1e-10).unwrap();
        assert!(cert.residual < 1e-8, "{}", cert.residual);
        assert!(cert.converged);
        let (_, scan) = brute_scan(&inst, 100_000).unwrap();
        assert!(scan >= cert.residual - 1e-9);
    }

    #[test]
    fn circle_solver_preconditions() {
        let two = Instance::new(
            vec![
                ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap(),
                ConvexBody::ball(vec![1.0, 0.0], 1.0).unwrap(),
            ],
            vec![Objective::Inner, Objective::Inner],
            EpsilonPolicy::Auto,
        )
        .unwrap();
        assert!(solve_circle(&two, 64, 1e-8).is_err());
        assert!(solve_circle(&interval(-1.0, 1.0), 8, 1e-8).is_err());
    }

    #[test]
    fn verify_at_a_wrong_point() {
        let inst = interval(-1.0, 1.0);
        let t = FRAC_PI_8;
        let cert = verify(&inst, &circle_point(t), 1e-8).unwrap();
        // plus side [tan t, 1], minus side [-1, tan t]
        let expect = ((t.cos() - t.sin()) - t.cos() * (t.tan() + 1.0)).abs();
        assert!((cert.residual - expect).abs() < 1e-12);
        assert!(cert.residual > 0.1);
        assert!(!cert.converged);
    }

    #[test]
    fn verify_at_the_north_pole() {
        let inst = interval(-1.0, 1.0);
        let cert = verify(&inst, &SpherePoint::north_pole(1), 1e-8).unwrap();
        let body = &cert.per_body[0];
        assert!(!body.plus_nonempty && body.minus_nonempty);
        assert_eq!(body.phi_plus, -1.0);
        assert_eq!(cert.case_two_flags, vec![true]);
        assert_eq!(cert.residual, (-1.0 - body.phi_minus).abs());
    }

    #[test]
    fn brute_scan_example_one() {
        let inst = interval(-1.0, 1.0);
        let (p, r) = brute_scan(&inst, 3600).unwrap();
        assert!(r < 2e-3);
        assert!(p.head()[0].abs() > 0.99);
        let mut prev = f64::INFINITY;
        for res in [90, 180, 360, 720] {
            let (_, r) = brute_scan(&interval(0.0, 2.0), res).unwrap();
            assert!(r >= 0.0 && r <= prev);
            prev = r;
        }
    }

    #[test]
    fn multistart_needs_enough_starts() {
        let inst = interval(-1.0, 1.0);
        let opts = MultistartOptions {
            starts: 4,
            ..Default::default()
        };
        assert!(solve_multistart(&inst, opts).is_err());
    }
}
