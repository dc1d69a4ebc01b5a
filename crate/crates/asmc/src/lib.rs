//! Closed-loop simulation of adaptive sliding-mode control with a prescribed
//! reaching-time bound and barrier-function gain adaptation.
//!
//! The library integrates perturbed first-order MIMO systems
//! `sigma_dot = G(t, sigma) [I + dg(t, sigma)] u + f(t, sigma)` under
//! unit-vector control and three gain laws (a baseline adaptive law, the
//! ARPS reaching-phase law with prescribed reaching time, and hybrid
//! ARPS-plus-barrier adaptation), and ships the experiment harness that
//! sweeps reach times over initial conditions and disturbance sizes,
//! replays the two disturbance-step scenarios, and cross-checks the
//! reaching phase against an independently integrated time-scaled system.

// Parameter checks are written as `!(x > 0.0)` on purpose: the negated form
// also rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controllers;
pub mod experiments;
pub mod integrator;
pub mod linalg;
pub mod plants;
mod svg;
pub mod timescale;
