//! Harvest scheduling for interacting fish populations.
//!
//! A scenario describes `n` species, each with a growth law (logistic,
//! modified logistic or Gompertz), an interaction row coupling it to the
//! other stocks, a profit function for its harvest, and boundary stocks
//! `x_i(0)` and `x_i(T)`. The solver finds per-species harvest schedules
//! `h_i(t)` on `[0, T]` that maximize total discounted profit subject to
//! the stock dynamics and the boundary conditions.
//!
//! The method is indirect: along an optimal path each species satisfies a
//! pointwise coordination condition parameterized by a single constant
//! `K_i`, so the two-point boundary problem reduces to a scalar root search
//! (shooting) per species. Species are coupled, so the full problem is
//! solved by cyclic coordinate descent: sweep the species in order, each
//! time re-shooting one species against the current paths of the others,
//! until the `K_i` stabilize.
//!
//! Module map:
//! - [`model`]: growth, interaction and profit primitives with closed-form
//!   partial derivatives.
//! - [`scenario`]: the scenario data model and its validation rules.
//! - [`trajectory`]: forward Euler path builder driven by the coordination
//!   condition (per-node control root solve and sensitivity accumulators).
//! - [`shooting`]: scalar root search on the coordination constant to hit a
//!   terminal stock, plus sweeps over a grid of constants.
//! - [`ccd`]: cyclic coordinate descent across species and the discounted
//!   objective.
//! - [`simulate`]: plain coupled forward integration under a prescribed
//!   harvest (no optimization), and steady-state search.
//!
//! The crate is `no_std` (with `alloc`); float transcendentals come from
//! `libm`. Everything is deterministic: identical inputs produce identical
//! bits on every run.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ccd;
pub mod error;
pub mod model;
pub mod scenario;
pub mod shooting;
pub mod simulate;
pub mod trajectory;

pub use error::Error;
