//! Antipodal-gap certificates for hyperplane-clipped optimal-value maps.
//!
//! Each point `u = (u_1, …, u_n, u_{n+1})` of the sphere S^n cuts R^n by
//! the hyperplane `⟨(u_1, …, u_n), x⟩ = u_{n+1}`. For a family of convex
//! bodies `A_i` and objectives `f_i`, the crate evaluates the spread
//! `max f_i - min f_i` over each side of the cut, and searches for points
//! where the two sides have equal spread for every body at once. Such
//! points always exist by the Borsuk–Ulam theorem; the solvers here find
//! them numerically and report a verifiable certificate.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bodies;
pub mod clipped_opt;
pub mod error;
pub mod gapmap;
pub mod linalg;
pub mod objectives;
pub mod problem;
mod simplex;
pub mod solver;
pub mod sphere;

pub use bodies::{ConvexBody, FeasibilityReport, Status};
pub use clipped_opt::{MaxMinResult, Side};
pub use error::{Error, Result};
pub use gapmap::{odd_gap, phi, phi_antipodal, psi, EpsilonPolicy, GapVector, Instance};
pub use objectives::Objective;
pub use solver::{brute_scan, solve_circle, solve_multistart, verify, Certificate, Method};
pub use sphere::{circle_point, EpsilonCap, Halfspace, SpherePoint};
