#![allow(dead_code)]

use antipodal::linalg::{dot, norm};
use antipodal::{ConvexBody, EpsilonPolicy, Instance, Objective};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Hull of `m` standard Gaussian points, redrawn until full-dimensional.
pub fn gaussian_hull(rng: &mut ChaCha8Rng, n: usize, m: usize) -> ConvexBody {
    loop {
        let pts: Vec<Vec<f64>> = (0..m).map(|_| gaussian(rng, n)).collect();
        let body = ConvexBody::polytope(pts).unwrap();
        if body.interior_dimension() == n {
            return body;
        }
    }
}

pub fn random_ball(rng: &mut ChaCha8Rng, n: usize) -> ConvexBody {
    let center: Vec<f64> = gaussian(rng, n).iter().map(|c| 0.5 * c).collect();
    ConvexBody::ball(center, rng.random_range(0.3..1.0)).unwrap()
}

/// Random orthogonal matrix by Gram–Schmidt on Gaussian columns.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v = gaussian(rng, n);
        for b in &basis {
            let d = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let r = norm(&v);
        if r > 1e-6 {
            basis.push(v.iter().map(|x| x / r).collect());
        }
    }
    basis
}

/// `U diag(s) V` with singular values in `[1, cond]`, so the condition
/// number is at most `cond`.
pub fn random_q(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> Vec<Vec<f64>> {
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    let s: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..cond)).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| u[i][k] * s[k] * v[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn bilinear(rng: &mut ChaCha8Rng, n: usize) -> Objective {
    Objective::bilinear(&random_q(rng, n, 100.0)).unwrap()
}

/// Mixed instance: each body a ball or a hull, each objective inner or
/// bilinear.
pub fn mixed_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let bodies = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                random_ball(rng, n)
            } else {
                gaussian_hull(rng, n, n + 3)
            }
        })
        .collect();
    let objectives = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                Objective::Inner
            } else {
                bilinear(rng, n)
            }
        })
        .collect();
    Instance::new(bodies, objectives, EpsilonPolicy::Auto).unwrap()
}

pub fn hull_instance(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Instance {
    let bodies = (0..n).map(|_| gaussian_hull(rng, n, m)).collect();
    Instance::new(bodies, vec![Objective::Inner; n], EpsilonPolicy::Auto).unwrap()
}

pub fn ball_bilinear_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let bodies = (0..n).map(|_| random_ball(rng, n)).collect();
    let objectives = (0..n).map(|_| bilinear(rng, n)).collect();
    Instance::new(bodies, objectives, EpsilonPolicy::Auto).unwrap()
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
