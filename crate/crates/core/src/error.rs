//! Failure conditions shared by the numeric layers.

use alloc::string::String;
use alloc::vec::Vec;

use crate::ccd::HistoryEntry;
use crate::scenario::Violation;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An evaluation outside a primitive's domain: non-positive stock,
    /// negative harvest, or a non-finite input.
    Domain { what: String },
    /// A stock hit zero or below during forward integration. `last_positive`
    /// is the stock at the node before the failing one.
    InfeasiblePath {
        species: usize,
        node: usize,
        last_positive: f64,
    },
    /// The sensitivity accumulator left f64 range at this node.
    Overflow { species: usize, node: usize },
    /// The control residual does not bracket a root over `[h_min, h_max]`;
    /// indicates corrupted economics parameters.
    InvalidBracket { species: usize, node: usize },
    /// No coordination constant inside the (once-widened) bracket reaches
    /// the terminal target. `reachable` is the terminal-stock range seen at
    /// the bracket endpoints.
    InfeasibleTarget {
        species: usize,
        target: f64,
        reachable: (f64, f64),
    },
    /// The root search on the coordination constant exhausted its iteration
    /// budget; `best_k` is the iterate with the smallest residual seen.
    NoRoot {
        species: usize,
        best_k: f64,
        best_residual: f64,
        iterations: usize,
    },
    /// Coordinate descent hit `max_outer_iters` before the coordination
    /// constants stabilized. Carries the per-pass iteration log.
    NoConvergence {
        outer_iters: usize,
        history: Vec<HistoryEntry>,
    },
    /// Grid construction with a non-positive horizon or fewer than 2 steps.
    InvalidGrid { n_steps: usize, horizon: f64 },
    /// The scenario failed validation; see `scenario::validate`.
    InvalidScenario { violations: Vec<Violation> },
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::Domain { what } => write!(f, "domain error: {what}"),
            Error::InfeasiblePath {
                species,
                node,
                last_positive,
            } => write!(
                f,
                "species {} stock reached zero at node {} (last positive value {:e})",
                species + 1,
                node,
                last_positive
            ),
            Error::Overflow { species, node } => write!(
                f,
                "sensitivity accumulator overflow for species {} at node {node}",
                species + 1
            ),
            Error::InvalidBracket { species, node } => write!(
                f,
                "control residual has no sign change for species {} at node {node}",
                species + 1
            ),
            Error::InfeasibleTarget {
                species,
                target,
                reachable,
            } => write!(
                f,
                "terminal stock {target} for species {} is outside the reachable range [{}, {}]",
                species + 1,
                reachable.0,
                reachable.1
            ),
            Error::NoRoot {
                species,
                best_k,
                best_residual,
                iterations,
            } => write!(
                f,
                "no coordination constant found for species {} in {iterations} evaluations \
                 (best K = {best_k}, terminal residual {best_residual:e})",
                species + 1
            ),
            Error::NoConvergence { outer_iters, .. } => write!(
                f,
                "coordinate descent did not stabilize within {outer_iters} outer iterations"
            ),
            Error::InvalidGrid { n_steps, horizon } => write!(
                f,
                "invalid grid: {n_steps} steps over horizon {horizon} (need n_steps >= 2 and horizon > 0)"
            ),
            Error::InvalidScenario { violations } => {
                write!(f, "scenario failed validation ({} violations)", violations.len())
            }
        }
    }
}

impl core::error::Error for Error {}
