//! The optimal-value maps over the hyperplane family.
//!
//! For each body `A_i` and objective `f_i`, `ψ_i(u)` is the spread
//! `max f_i - min f_i` over `A_i ∩ H⁺_u`, or 0 when that set is empty.
//! `φ_i` agrees with `ψ_i` except on the open cap `u_{n+1} > 1 - ε` around
//! the north pole, where every clipped set is empty and `φ_i` falls
//! linearly to -1 at the pole. The odd map `g(u) = φ(u) - φ(-u)` vanishes
//! exactly at the antipodal-gap certificates.

use serde::Serialize;

use crate::bodies::ConvexBody;
use crate::clipped_opt::{clipped_maxmin, BlackBoxSettings, MaxMinResult, Side};
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::sphere::SpherePoint;

/// Upper limit for the automatically chosen cap width.
pub const EPSILON_CAP: f64 = 0.05;

/// Fraction of `1 - ε` the cap's worst-case support may reach under the
/// automatic rule.
const AUTO_SAFETY: f64 = 0.9;

const ANTIPODAL_PROBES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonPolicy {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct Instance {
    n: usize,
    bodies: Vec<ConvexBody>,
    objectives: Vec<Objective>,
    epsilon_policy: EpsilonPolicy,
    blackbox: BlackBoxSettings,
    antipodal: Vec<bool>,
    norm_bound: f64,
}

impl Instance {
    pub fn new(
        bodies: Vec<ConvexBody>,
        objectives: Vec<Objective>,
        epsilon_policy: EpsilonPolicy,
    ) -> Result<Self> {
        let n = bodies.len();
        if n == 0 {
            return Err(Error::InvalidSphereDimension(0));
        }
        if objectives.len() != n {
            return Err(Error::CountMismatch {
                what: "objectives",
                expected: n,
                got: objectives.len(),
            });
        }
        for (i, body) in bodies.iter().enumerate() {
            if body.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: body.dim(),
                });
            }
            let found = body.interior_dimension();
            if found != n {
                return Err(Error::FlatBody { found, expected: n });
            }
            match &objectives[i] {
                Objective::Bilinear(q) if q.dim() != n => {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: q.dim(),
                    })
                }
                Objective::BlackBox { .. } if !body.is_ball() => {
                    return Err(Error::BlackBoxNeedsBall(i))
                }
                _ => {}
            }
        }
        let antipodal = objectives
            .iter()
            .map(|f| f.antipodality_check(n, 0, ANTIPODAL_PROBES))
            .collect();
        let norm_bound = bodies.iter().map(|b| b.norm_bound()).fold(0.0, f64::max);
        let inst = Self {
            n,
            bodies,
            objectives,
            epsilon_policy,
            blackbox: BlackBoxSettings::default(),
            antipodal,
            norm_bound,
        };
        if let EpsilonPolicy::Fixed(eps) = epsilon_policy {
            inst.check_epsilon(eps)?;
        }
        Ok(inst)
    }

    pub fn with_blackbox_settings(mut self, settings: BlackBoxSettings) -> Self {
        self.blackbox = settings;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bodies(&self) -> &[ConvexBody] {
        &self.bodies
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn epsilon_policy(&self) -> EpsilonPolicy {
        self.epsilon_policy
    }

    pub fn blackbox_settings(&self) -> BlackBoxSettings {
        self.blackbox
    }

    /// `max_i M_i`.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Whether every inner problem is solved in closed form.
    pub fn is_exact(&self) -> bool {
        self.objectives.iter().all(Objective::is_exact)
    }

    pub fn is_antipodal(&self, i: usize) -> bool {
        self.antipodal[i]
    }

    /// The cap width in force for this instance.
    pub fn epsilon(&self) -> Result<f64> {
        match self.epsilon_policy {
            EpsilonPolicy::Auto => Ok(epsilon_auto(self)),
            EpsilonPolicy::Fixed(eps) => {
                self.check_epsilon(eps)?;
                Ok(eps)
            }
        }
    }

    fn check_epsilon(&self, eps: f64) -> Result<()> {
        if epsilon_admissible(eps, self.norm_bound) {
            Ok(())
        } else {
            Err(Error::InadmissibleEpsilon {
                eps,
                norm_bound: self.norm_bound,
            })
        }
    }

    /// Max/min of `f_i(·, p)` over the chosen side of `p`, `None` if empty.
    pub fn side_extremes(&self, i: usize, p: &SpherePoint, side: Side) -> Result<Option<MaxMinResult>> {
        clipped_maxmin(&self.bodies[i], &self.objectives[i], p, side, self.blackbox)
    }

    fn check_point(&self, p: &SpherePoint) -> Result<()> {
        if p.n() == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                got: p.n(),
            })
        }
    }
}

/// Whether the cap `u_{n+1} > 1 - ε` provably misses every body of norm at
/// most `norm_bound`: `sqrt(2ε - ε²)·M < 1 - ε`.
pub fn epsilon_admissible(eps: f64, norm_bound: f64) -> bool {
    eps > 0.0 && eps < 1.0 && (2.0 * eps - eps * eps).sqrt() * norm_bound < 1.0 - eps
}

/// Automatic cap width for bodies of norm at most `norm_bound`: the largest
/// `ε ∈ (0, 0.5]` with `sqrt(2ε - ε²)·M ≤ 0.9·(1 - ε)` (60 bisection
/// steps), capped at 0.05.
pub fn epsilon_for_bound(norm_bound: f64) -> f64 {
    let ok = |e: f64| (2.0 * e - e * e).sqrt() * norm_bound <= AUTO_SAFETY * (1.0 - e);
    let hat = if ok(0.5) {
        0.5
    } else {
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    hat.min(EPSILON_CAP)
}

pub fn epsilon_auto(inst: &Instance) -> f64 {
    epsilon_for_bound(inst.norm_bound())
}

/// One value per body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapVector {
    pub values: Vec<f64>,
    pub per_entry_exact: Vec<bool>,
}

/// Value of `φ_i` on an empty side whose relevant last coordinate is `last`.
pub(crate) fn cap_value(last: f64, eps: f64) -> f64 {
    if last > 1.0 - eps {
        ((1.0 - last) - eps) / eps
    } else {
        0.0
    }
}

fn evaluate(inst: &Instance, p: &SpherePoint, side: Side, eps: Option<f64>) -> Result<GapVector> {
    inst.check_point(p)?;
    let mut values = Vec::with_capacity(inst.n);
    let mut per_entry_exact = Vec::with_capacity(inst.n);
    for i in 0..inst.n {
        let (v, exact) = match inst.side_extremes(i, p, side)? {
            Some(r) => (r.gap(), r.exact),
            None => {
                let last = match side {
                    Side::Plus => p.last(),
                    Side::Minus => -p.last(),
                };
                (eps.map_or(0.0, |e| cap_value(last, e)), true)
            }
        };
        values.push(v);
        per_entry_exact.push(exact);
    }
    Ok(GapVector {
        values,
        per_entry_exact,
    })
}

/// `ψ(p)`.
pub fn psi(inst: &Instance, p: &SpherePoint) -> Result<GapVector> {
    evaluate(inst, p, Side::Plus, None)
}

/// `φ(p)` with cap width `eps`.
pub fn phi(inst: &Instance, p: &SpherePoint, eps: f64) -> Result<GapVector> {
    inst.check_epsilon(eps)?;
    evaluate(inst, p, Side::Plus, Some(eps))
}

/// `φ(-p)`, computed on the minus side of `p` with `f_i(·, p)`. Valid only
/// for objectives that are odd in the sphere parameter.
pub fn phi_antipodal(inst: &Instance, p: &SpherePoint, eps: f64) -> Result<GapVector> {
    inst.check_epsilon(eps)?;
    if let Some(i) = (0..inst.n).find(|&i| !inst.is_antipodal(i)) {
        return Err(Error::NotAntipodal(i));
    }
    evaluate(inst, p, Side::Minus, Some(eps))
}

/// `g(p) = φ(p) - φ(-p)`.
pub fn odd_gap(inst: &Instance, p: &SpherePoint, eps: f64) -> Result<Vec<f64>> {
    let plus = phi(inst, p, eps)?;
    let minus = phi_antipodal(inst, p, eps)?;
    Ok(plus
        .values
        .iter()
        .zip(&minus.values)
        .map(|(a, b)| a - b)
        .collect())
}
