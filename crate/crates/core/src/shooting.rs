//! Root search on the coordination constant.
//!
//! For fixed companion paths, phi(K) = terminal stock of the path built
//! under constant K. Hitting a required terminal stock means solving
//! phi(K) = target. The search runs the secant update on phi(K) - target
//! from the bracket endpoints, guarded by bisection: whenever the secant
//! denominator degenerates (phi plateaus in K) or the proposal leaves the
//! sign-changing bracket, the step falls back to the bracket midpoint.

use alloc::vec::Vec;

use crate::error::Error;
use crate::scenario::Scenario;
use crate::trajectory::{build_path, Grid, SensitivityScope, SpeciesPath};

/// Bracket and stopping rules for the root search.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct ShootingSettings {
    pub k_min: f64,
    pub k_max: f64,
    /// Absolute tolerance on |phi(K) - target| in stock units.
    pub tol_terminal: f64,
    /// Budget of phi evaluations (path builds), endpoints included.
    pub max_iters: usize,
    /// Minimum |phi(K_j) - phi(K_j-1)| for a secant step; below it the
    /// iteration bisects instead.
    pub secant_guard: f64,
}

impl Default for ShootingSettings {
    fn default() -> Self {
        ShootingSettings {
            k_min: -2.0,
            k_max: 2.0,
            tol_terminal: 5e-2,
            max_iters: 64,
            secant_guard: 1e-9,
        }
    }
}

/// Converged root: the constant, its path, the terminal residual
/// (signed, terminal - target) and the number of phi evaluations spent.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub k: f64,
    pub path: SpeciesPath,
    pub residual: f64,
    pub iterations: usize,
}

/// One phi evaluation. An infeasible path (stock collapse) is not an error
/// here: it reports the last positive stock as the terminal value with
/// `feasible = false`, which the root search treats as an extremely low
/// terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct KEvaluation {
    pub k: f64,
    pub terminal: f64,
    pub feasible: bool,
    pub path: Option<SpeciesPath>,
}

/// Build species i's path under constant `k` and report its terminal stock.
/// Only stock-collapse failures are absorbed into the result; any other
/// error propagates.
pub fn evaluate(
    k: f64,
    i: usize,
    scenario: &Scenario,
    companions: &[Vec<f64>],
    grid: &Grid,
    scope: SensitivityScope,
) -> Result<KEvaluation, Error> {
    match build_path(k, i, scenario, companions, grid, scope) {
        Ok(path) => Ok(KEvaluation {
            k,
            terminal: path.terminal(),
            feasible: true,
            path: Some(path),
        }),
        Err(Error::InfeasiblePath { last_positive, .. }) => Ok(KEvaluation {
            k,
            terminal: last_positive,
            feasible: false,
            path: None,
        }),
        Err(e) => Err(e),
    }
}

/// Find K with |phi(K) - target| within `tol_terminal`, target being species
/// i's required terminal stock.
///
/// Endpoints are probed first (either endpoint already within tolerance
/// returns immediately). If the target lies outside the terminal range seen
/// at the endpoints, the bracket is widened once by doubling its width
/// around its center; if the target is still outside, the search fails with
/// the reachable range estimate.
pub fn shoot(
    i: usize,
    scenario: &Scenario,
    companions: &[Vec<f64>],
    grid: &Grid,
    settings: &ShootingSettings,
    scope: SensitivityScope,
) -> Result<ShootingResult, Error> {
    let target = scenario.species[i].x_t;
    let tol = settings.tol_terminal;
    let mut evals = 0usize;

    let mut lo = settings.k_min;
    let mut hi = settings.k_max;
    let mut widened = false;
    let (mut eval_lo, mut eval_hi);
    loop {
        eval_lo = evaluate(lo, i, scenario, companions, grid, scope)?;
        evals += 1;
        if eval_lo.feasible && (eval_lo.terminal - target).abs() <= tol {
            return Ok(finish(eval_lo, target, evals));
        }
        eval_hi = evaluate(hi, i, scenario, companions, grid, scope)?;
        evals += 1;
        if eval_hi.feasible && (eval_hi.terminal - target).abs() <= tol {
            return Ok(finish(eval_hi, target, evals));
        }
        let (reach_lo, reach_hi) = ordered(eval_lo.terminal, eval_hi.terminal);
        if target >= reach_lo && target <= reach_hi {
            break;
        }
        if widened {
            return Err(Error::InfeasibleTarget {
                species: i,
                target,
                reachable: (reach_lo, reach_hi),
            });
        }
        // widen once: double the width around the bracket center
        let width = hi - lo;
        lo -= 0.5 * width;
        hi += 0.5 * width;
        widened = true;
    }

    // the target sits between the endpoint residual signs; keep one iterate
    // of each sign so bisection always has a valid interval
    let r_lo = eval_lo.terminal - target;
    let r_hi = eval_hi.terminal - target;
    let (mut k_neg, mut k_pos) = if r_lo <= 0.0 { (lo, hi) } else { (hi, lo) };

    let (mut k_prev, mut r_prev) = (lo, r_lo);
    let (mut k_cur, mut r_cur) = (hi, r_hi);
    let (mut best_k, mut best_r) = if r_lo.abs() <= r_hi.abs() {
        (lo, r_lo)
    } else {
        (hi, r_hi)
    };

    while evals < settings.max_iters {
        let denom = r_cur - r_prev;
        let mid = 0.5 * (k_neg + k_pos);
        let k_next = if denom.abs() < settings.secant_guard {
            mid
        } else {
            let s = k_cur - r_cur * (k_cur - k_prev) / denom;
            let (b_lo, b_hi) = ordered(k_neg, k_pos);
            if s.is_finite() && s > b_lo && s < b_hi {
                s
            } else {
                mid
            }
        };

        let eval = evaluate(k_next, i, scenario, companions, grid, scope)?;
        evals += 1;
        let r_next = eval.terminal - target;
        if eval.feasible && r_next.abs() <= tol {
            return Ok(ShootingResult {
                k: k_next,
                path: eval.path.expect("feasible evaluation carries its path"),
                residual: r_next,
                iterations: evals,
            });
        }
        if r_next <= 0.0 {
            k_neg = k_next;
        } else {
            k_pos = k_next;
        }
        if r_next.abs() < best_r.abs() {
            best_k = k_next;
            best_r = r_next;
        }
        k_prev = k_cur;
        r_prev = r_cur;
        k_cur = k_next;
        r_cur = r_next;
    }

    Err(Error::NoRoot {
        species: i,
        best_k,
        best_residual: best_r,
        iterations: evals,
    })
}

fn finish(eval: KEvaluation, target: f64, evals: usize) -> ShootingResult {
    ShootingResult {
        k: eval.k,
        residual: eval.terminal - target,
        path: eval.path.expect("feasible evaluation carries its path"),
        iterations: evals,
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Evaluate phi over a list of constants with fixed companions, in input
/// order. Infeasible paths appear as entries with `feasible = false`.
pub fn sweep_k(
    i: usize,
    scenario: &Scenario,
    companions: &[Vec<f64>],
    grid: &Grid,
    ks: &[f64],
    scope: SensitivityScope,
) -> Result<Vec<KEvaluation>, Error> {
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        out.push(evaluate(k, i, scenario, companions, grid, scope)?);
    }
    Ok(out)
}
