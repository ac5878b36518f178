//! Points of the unit sphere S^n ⊂ R^{n+1} and the hyperplane family they
//! index.
//!
//! A point `(u, u_{n+1})` with head `u ∈ R^n` and last coordinate `u_{n+1}`
//! defines the hyperplane `⟨u, x⟩ = u_{n+1}` together with the closed sides
//! `H⁺ = {⟨u,x⟩ ≥ u_{n+1}}` and `H⁻ = {⟨u,x⟩ ≤ u_{n+1}}`. Negating the point
//! swaps the two sides.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, orthonormal_complement};

/// Maximum deviation of `‖coords‖₂` from 1 accepted for a stored point.
pub const UNIT_TOL: f64 = 1e-12;

/// Gaussian draws below this norm are rejected before normalisation.
const MIN_DRAW_NORM: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
    n: usize,
}

impl SpherePoint {
    /// Wraps `coords` as a point of S^n with `n = coords.len() - 1`. The
    /// vector must already be unit to within [`UNIT_TOL`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidSphereDimension(coords.len().saturating_sub(1)));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("sphere point"));
        }
        let r = norm(&coords);
        if (r - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit {
                norm: r,
                deviation: (r - 1.0).abs(),
            });
        }
        let n = coords.len() - 1;
        Ok(Self { coords, n })
    }

    /// Normalises `coords` onto the sphere.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("sphere point"));
        }
        let r = norm(&coords);
        if r < MIN_DRAW_NORM {
            return Err(Error::NotUnit {
                norm: r,
                deviation: (r - 1.0).abs(),
            });
        }
        coords.iter_mut().for_each(|c| *c /= r);
        Self::new(coords)
    }

    /// North pole `(0, …, 0, 1)` of S^n.
    pub fn north_pole(n: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[n] = 1.0;
        Self { coords, n }
    }

    pub fn south_pole(n: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[n] = -1.0;
        Self { coords, n }
    }

    /// Unit basis vector `±e_axis`.
    pub fn axis(n: usize, axis: usize, positive: bool) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[axis] = if positive { 1.0 } else { -1.0 };
        Self { coords, n }
    }

    /// Dimension of the sphere (ambient dimension of the bodies).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The normal `u = (u_1, …, u_n)`.
    pub fn head(&self) -> &[f64] {
        &self.coords[..self.n]
    }

    /// The offset `u_{n+1}`.
    pub fn last(&self) -> f64 {
        self.coords[self.n]
    }

    pub fn antipode(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
            n: self.n,
        }
    }

    /// `(H⁺, H⁻)` for this point.
    pub fn halfspaces(&self) -> (Halfspace, Halfspace) {
        let normal = self.head().to_vec();
        let offset = self.last();
        (
            Halfspace {
                normal: normal.clone(),
                offset,
                sense: Sense::Geq,
            },
            Halfspace {
                normal,
                offset,
                sense: Sense::Leq,
            },
        )
    }

    /// Great-circle distance to `other`.
    pub fn geodesic_distance(&self, other: &SpherePoint) -> f64 {
        dot(&self.coords, &other.coords).clamp(-1.0, 1.0).acos()
    }

    /// Follows the great circle leaving `self` along the unit tangent
    /// `tangent` for arc length `h`.
    pub fn geodesic_step(&self, tangent: &[f64], h: f64) -> Result<Self> {
        let mut c: Vec<f64> = self.coords.iter().map(|x| x * h.cos()).collect();
        axpy(&mut c, h.sin(), tangent);
        Self::normalized(c)
    }

    /// Orthonormal basis of the tangent space at this point.
    pub fn tangent_basis(&self) -> Vec<Vec<f64>> {
        orthonormal_complement(&self.coords)
    }
}

impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    /// `⟨normal, x⟩ ≥ offset`
    Geq,
    /// `⟨normal, x⟩ ≤ offset`
    Leq,
}

/// A closed half-space of R^n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub sense: Sense,
}

impl Halfspace {
    /// Same set, rewritten in `Geq` form.
    pub fn normalized(&self) -> Halfspace {
        match self.sense {
            Sense::Geq => self.clone(),
            Sense::Leq => Halfspace {
                normal: self.normal.iter().map(|c| -c).collect(),
                offset: -self.offset,
                sense: Sense::Geq,
            },
        }
    }

    /// Signed slack `⟨normal, x⟩ - offset` of the `Geq` form.
    pub fn slack(&self, x: &[f64]) -> f64 {
        let s = dot(&self.normal, x) - self.offset;
        match self.sense {
            Sense::Geq => s,
            Sense::Leq => -s,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.slack(x) >= -tol
    }

    /// A zero normal gives either nothing or everything.
    pub fn is_degenerate(&self) -> bool {
        self.normal.iter().all(|c| *c == 0.0)
    }
}

/// The open cap `N_ε = {u : u_{n+1} > 1 - ε}` around the north pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonCap {
    epsilon: f64,
}

impl EpsilonCap {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cap epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Strict: the rim `u_{n+1} = 1 - ε` is outside.
    pub fn contains(&self, p: &SpherePoint) -> bool {
        p.last() > 1.0 - self.epsilon
    }
}

pub fn in_cap(p: &SpherePoint, cap: &EpsilonCap) -> bool {
    cap.contains(p)
}

/// `(cos θ, sin θ)` on S^1.
pub fn circle_point(theta: f64) -> SpherePoint {
    SpherePoint {
        coords: vec![theta.cos(), theta.sin()],
        n: 1,
    }
}

/// `count` pseudo-random points of S^n, uniform by normalised Gaussians.
/// Deterministic for a fixed seed.
pub fn sample_sphere(n: usize, count: usize, seed: u64) -> Vec<SpherePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if norm(&v) < MIN_DRAW_NORM {
            continue;
        }
        out.push(SpherePoint::normalized(v).expect("draw norm checked"));
    }
    out
}

/// Fibonacci lattice of `count` points on S².
pub fn fibonacci_sphere(count: usize) -> Vec<SpherePoint> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            SpherePoint::normalized(vec![r * phi.cos(), r * phi.sin(), z]).expect("lattice point")
        })
        .collect()
}

/// Point on the rim of a cap: last coordinate exactly `last`, head of norm
/// `sqrt(1 - last²)` pointing along `direction`.
pub fn point_with_last(direction: &[f64], last: f64) -> Result<SpherePoint> {
    let d = norm(direction);
    if d == 0.0 {
        return Err(Error::ZeroNormal);
    }
    let radius = (1.0 - last * last).max(0.0).sqrt();
    let mut coords: Vec<f64> = direction.iter().map(|c| c / d * radius).collect();
    coords.push(last);
    SpherePoint::new(coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn antipode_negates_and_is_an_involution() {
        let p = SpherePoint::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.antipode().coords(), &[-0.0, -0.0, -1.0]);
        assert_eq!(circle_point(0.0).antipode().coords(), &[-1.0, -0.0]);
        let q = SpherePoint::new(vec![0.6, 0.8]).unwrap();
        let back = q.antipode().antipode();
        assert_eq!(back.coords()[0].to_bits(), 0.6f64.to_bits());
        assert_eq!(back.coords()[1].to_bits(), 0.8f64.to_bits());
    }

    #[test]
    fn halfspaces_of_simple_points() {
        let (plus, minus) = circle_point(0.0).halfspaces();
        assert!(plus.contains(&[0.5], 0.0) && !plus.contains(&[-0.5], 0.0));
        assert!(minus.contains(&[-0.5], 0.0) && !minus.contains(&[0.5], 0.0));

        let (plus, minus) = SpherePoint::north_pole(3).halfspaces();
        assert!(plus.is_degenerate());
        assert!(!plus.contains(&[5.0, -2.0, 1.0], 0.0));
        assert!(minus.contains(&[5.0, -2.0, 1.0], 0.0));

        let (plus, _) = SpherePoint::south_pole(2).halfspaces();
        assert!(plus.contains(&[100.0, -100.0], 0.0));
    }

    #[test]
    fn flipped_point_swaps_sides() {
        for p in sample_sphere(3, 200, 5) {
            let (_, minus) = p.halfspaces();
            let (plus_of_antipode, _) = p.antipode().halfspaces();
            assert_eq!(plus_of_antipode.normalized(), minus.normalized());
        }
    }

    #[test]
    fn cap_membership_is_strict() {
        let cap = EpsilonCap::new(0.05).unwrap();
        assert!(in_cap(&SpherePoint::north_pole(2), &cap));
        assert!(!in_cap(&SpherePoint::south_pole(2), &cap));
        let rim = point_with_last(&[1.0, 1.0], 1.0 - 0.05).unwrap();
        assert!(!in_cap(&rim, &cap));
        assert!(EpsilonCap::new(0.0).is_err());
        assert!(EpsilonCap::new(1.0).is_err());
    }

    #[test]
    fn circle_points() {
        assert_eq!(circle_point(0.0).coords(), &[1.0, 0.0]);
        let p = circle_point(FRAC_PI_2);
        assert!(p.head()[0].abs() < 1e-16 && p.last() == 1.0);
        let q = circle_point(3.0 * FRAC_PI_2);
        assert!(q.head()[0].abs() < 1e-15 && q.last() == -1.0);
        for k in 0..100 {
            let t = -3.0 + 0.07 * k as f64;
            let a = circle_point(t);
            let b = circle_point(t + 2.0 * PI);
            assert!(crate::linalg::distance(a.coords(), b.coords()) < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_unit() {
        let a = sample_sphere(2, 5, 42);
        let b = sample_sphere(2, 5, 42);
        assert_eq!(a, b);
        let pts = sample_sphere(1, 10_000, 1);
        let mean = pts.iter().map(|p| norm(p.coords())).sum::<f64>() / pts.len() as f64;
        assert!((mean - 1.0).abs() < 1e-12);
        for p in &pts {
            assert!((norm(p.coords()) - 1.0).abs() <= UNIT_TOL);
            assert_eq!(p.n() + 1, p.coords().len());
        }
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(SpherePoint::new(vec![1.0]).is_err());
        assert!(SpherePoint::new(vec![1.0, 1.0]).is_err());
        assert!(SpherePoint::new(vec![f64::NAN, 1.0]).is_err());
        assert!(SpherePoint::normalized(vec![0.0, 0.0]).is_err());
        assert!(SpherePoint::normalized(vec![3.0, 4.0]).is_ok());
    }

    #[test]
    fn fibonacci_points_are_unit_and_spread() {
        let pts = fibonacci_sphere(500);
        assert_eq!(pts.len(), 500);
        let mean_z = pts.iter().map(|p| p.last()).sum::<f64>() / 500.0;
        assert!(mean_z.abs() < 1e-12);
    }

    #[test]
    fn geodesic_step_has_requested_length() {
        let p = sample_sphere(2, 1, 9).pop().unwrap();
        let t = &p.tangent_basis()[0];
        for h in [1e-2, 1e-4, 0.5] {
            let q = p.geodesic_step(t, h).unwrap();
            assert!((p.geodesic_distance(&q) - h).abs() < 1e-7);
        }
    }
}
