//! Periodic integro-differential equations with mixed local/nonlocal
//! diffusion and (super)linear gradient terms: monotone finite-difference
//! schemes, ergodic-constant solvers, and large-time diagnostics.
//!
//! The central objects are the ergodic pair `(lambda, v)` solving
//! `S(v) + lambda = 0` on the torus and the Cauchy evolution
//! `u_t + S(u) = 0`, whose deviation `u(., t) - lambda t - v` flattens as
//! `t` grows. Two independent routes compute the pair — vanishing-discount
//! extrapolation ([`ergodic::vanishing_discount`]) and long-time slope
//! extraction ([`ergodic::long_time_pair`]) — and [`diagnostics`] certifies
//! the convergence.

pub mod catalog;
pub mod cauchy;
pub mod config;
pub mod diagnostics;
pub mod ergodic;
pub mod error;
pub mod levy;
pub mod runner;
pub mod scheme;
pub mod torus;

pub use error::{Error, Result};
