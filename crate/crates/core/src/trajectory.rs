//! Forward path construction for one species under the coordination rule.
//!
//! Along an optimal path, species i's harvest at time t satisfies
//!
//! ```text
//! F(t) = discounted_marginal_profit(t, x, u) * E(t) + A(t) = K
//! ```
//!
//! where E(t) = exp(integral of the stock sensitivity of the dynamics) and
//! A(t) accumulates the discounted stock sensitivity of profit weighted by
//! E. F is strictly decreasing in u, so at every node the control is either
//! the unique interior root of F = K or a bound of [h_min, h_max] where the
//! matching one-sided inequality holds (F <= K at h_min, F >= K at h_max).
//! Both accumulators use left-rectangle updates, consistent with the
//! forward Euler stock step (everything is first order in the step).
//!
//! What counts as "profit" in A depends on whose earnings the planner is
//! accountable for, see [`SensitivityScope`]. Under [`SensitivityScope::Joint`]
//! the integrand adds, for every companion j, the effect species i's stock
//! has on j's margin: a larger x_i raises the interaction drain on j, which
//! shifts the harvest j needs to keep its recorded path, valued at j's
//! marginal profit. The companion harvest used for that valuation is implied
//! from the recorded companion path and the live stock of species i.

use alloc::format;
use alloc::vec::Vec;

use crate::error::Error;
use crate::model;
use crate::scenario::{Scenario, Species};

/// Uniform time grid: `n_steps` Euler steps over `[0, horizon]`, nodes
/// t_k = k*step for k = 0..=n_steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_steps: usize,
    horizon: f64,
    step: f64,
}

impl Grid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Grid, Error> {
        if n_steps < 2 || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidGrid { n_steps, horizon });
        }
        Ok(Grid {
            n_steps,
            horizon,
            step: horizon / n_steps as f64,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Node count, always n_steps + 1.
    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn time(&self, node: usize) -> f64 {
        node as f64 * self.step
    }
}

/// How a node's control was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClampFlag {
    Interior,
    AtMin,
    AtMax,
}

/// Which profit terms feed the stock-sensitivity accumulator A.
///
/// `Joint` is fleet-wide planning: the accumulator internalizes how this
/// species' stock shifts every other owner's harvest margin, so the solver
/// lands on the jointly optimal plan. `OwnOnly` treats companion harvest
/// activity as given data and prices only the species' own margin; this is
/// the right reading for what-if sweeps of one species against frozen
/// companion schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SensitivityScope {
    Joint,
    OwnOnly,
}

/// Running accumulators of the coordination rule. `log_e` stores ln E(t)
/// (E itself spans many orders of magnitude); `a` stores A(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinationState {
    pub log_e: f64,
    pub a: f64,
}

impl CoordinationState {
    /// State at t = 0: E = 1, A = 0.
    pub fn initial() -> Self {
        CoordinationState { log_e: 0.0, a: 0.0 }
    }
}

/// One species' nodes: stock, applied control and clamp flag per node.
/// The terminal node repeats the last computed control; it is a reporting
/// convention only and never enters the integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesPath {
    pub stocks: Vec<f64>,
    pub harvests: Vec<f64>,
    pub flags: Vec<ClampFlag>,
}

impl SpeciesPath {
    /// Stock at the last node.
    pub fn terminal(&self) -> f64 {
        *self.stocks.last().expect("path has at least one node")
    }
}

/// Joint node samples for all species; `stocks[k][i]` and `harvests[k][i]`
/// refer to species i at node k. Harvest row `n_steps` repeats the previous
/// row (terminal convention, matching [`SpeciesPath`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub stocks: Vec<Vec<f64>>,
    pub harvests: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn n_nodes(&self) -> usize {
        self.stocks.len()
    }

    pub fn n_species(&self) -> usize {
        self.stocks.first().map_or(0, Vec::len)
    }

    /// Terminal stock of species i.
    pub fn terminal(&self, i: usize) -> f64 {
        self.stocks[self.stocks.len() - 1][i]
    }
}

/// Hard cap on bisection iterations; the loop normally exits much earlier
/// via the width and residual conditions.
const MAX_BISECT: usize = 200;

/// Residual tolerance on F - K at an interior control, in F units. The
/// returned control keeps the coordination identity to well below 1e-9 so
/// that independent reconstruction of F lands back on K.
const F_RESIDUAL_TOL: f64 = 1e-12;

/// Decide species i's control at one node.
///
/// Solves `discounted marginal profit = (K - A)/(E * exp(-discount*t))` for
/// u on `[h_min, h_max]` by bisection (the left side is strictly decreasing
/// in u). If even u = h_min falls short of the target the node clamps at
/// h_min, and symmetrically at h_max; the clamp direction encodes the
/// one-sided optimality inequality that holds there.
pub fn node_control(
    k_const: f64,
    state: &CoordinationState,
    t: f64,
    x: f64,
    sp: &Species,
    discount: f64,
    control_tol: f64,
    species: usize,
    node: usize,
) -> Result<(f64, ClampFlag), Error> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain {
            what: format!("node control requires stock > 0, got {x}"),
        });
    }
    // weight = E * exp(-discount*t), always > 0
    let weight = libm::exp(state.log_e - discount * t);
    if !weight.is_finite() || weight == 0.0 {
        return Err(Error::Overflow { species, node });
    }
    let target = (k_const - state.a) / weight;
    if !target.is_finite() {
        return Err(Error::Overflow { species, node });
    }

    let r_min = model::profit_dh(&sp.econ, x, sp.h_min)?;
    if r_min <= target {
        return Ok((sp.h_min, ClampFlag::AtMin));
    }
    let r_max = model::profit_dh(&sp.econ, x, sp.h_max)?;
    if r_max >= target {
        return Ok((sp.h_max, ClampFlag::AtMax));
    }

    // r_min > target > r_max: a unique interior root exists
    let mut lo = sp.h_min;
    let mut hi = sp.h_max;
    let mut u = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECT {
        let r = model::profit_dh(&sp.econ, x, u)?;
        if r >= target {
            lo = u;
        } else {
            hi = u;
        }
        if hi - lo <= control_tol && (r - target).abs() * weight <= F_RESIDUAL_TOL {
            return Ok((u, ClampFlag::Interior));
        }
        let next = 0.5 * (lo + hi);
        if next == u && hi - lo <= control_tol {
            // interval collapsed to adjacent floats; residual is as small
            // as this precision allows
            return Ok((u, ClampFlag::Interior));
        }
        u = next;
    }
    // only reachable if the residual never separated, which a strictly
    // decreasing marginal profit cannot produce
    Err(Error::InvalidBracket { species, node })
}

/// Advance the accumulators across one step of width `d`, using node-k
/// values (left rectangle): A += exp(-discount*t)*sensitivity*E*d first,
/// then ln E += (growth_dx - interaction_dxi)*d.
///
/// `stocks` is the node-k row with entry i replaced by the live stock;
/// `next_stocks` is the recorded row at node k+1 (entry i unused), needed
/// only under [`SensitivityScope::Joint`] to read each companion's drift.
/// The sensitivity integrand is profit_dx(x_i, u_i) alone under `OwnOnly`;
/// under `Joint` it subtracts, per companion j, j's marginal profit at its
/// implied harvest times d(interaction_j)/d(x_i). The implied harvest is
/// clamped to j's control bounds before valuation.
pub fn advance(
    state: &mut CoordinationState,
    t: f64,
    stocks: &[f64],
    next_stocks: &[f64],
    i: usize,
    u: f64,
    scenario: &Scenario,
    scope: SensitivityScope,
    d: f64,
    node: usize,
) -> Result<(), Error> {
    let sp = &scenario.species[i];
    let x = stocks[i];
    let weight = libm::exp(state.log_e - scenario.discount * t);
    let mut sens = model::profit_dx(&sp.econ, x, u)?;
    if scope == SensitivityScope::Joint {
        for (j, spj) in scenario.species.iter().enumerate() {
            if j == i || spj.interactions.is_empty() {
                continue;
            }
            let drift = (next_stocks[j] - stocks[j]) / d;
            let h_j = model::implied_harvest(&spj.growth, &spj.interactions, j, stocks, drift)?
                .clamp(spj.h_min, spj.h_max);
            let margin = model::profit_dh(&spj.econ, stocks[j], h_j)?;
            let pull = model::interaction_dxj(&spj.interactions, j, stocks, i)?;
            sens -= margin * pull;
        }
    }
    state.a += weight * sens * d;
    let fx = model::growth_dx(&sp.growth, x)? - model::interaction_dxi(&sp.interactions, i, stocks)?;
    state.log_e += fx * d;
    // e^709 is just inside f64 range; anything near it means the path blew up
    if !state.log_e.is_finite() || state.log_e.abs() > 700.0 || !state.a.is_finite() {
        return Err(Error::Overflow { species: i, node });
    }
    Ok(())
}

/// Integrate species i forward from its initial stock under coordination
/// constant `k_const`, holding the other species at `companions`.
///
/// `companions[k]` must hold every species' stock at node k (length
/// n_species); entry i is ignored and replaced by the integrated stock.
/// Fails with `InfeasiblePath` if the stock reaches zero or below.
pub fn build_path(
    k_const: f64,
    i: usize,
    scenario: &Scenario,
    companions: &[Vec<f64>],
    grid: &Grid,
    scope: SensitivityScope,
) -> Result<SpeciesPath, Error> {
    let n = scenario.n_species();
    let sp = scenario.species.get(i).ok_or_else(|| Error::Domain {
        what: format!("species index {} out of range", i + 1),
    })?;
    if companions.len() < grid.n_nodes() {
        return Err(Error::Domain {
            what: format!(
                "companion grid has {} rows, need {}",
                companions.len(),
                grid.n_nodes()
            ),
        });
    }

    let n_nodes = grid.n_nodes();
    let d = grid.step();
    let mut stocks = Vec::with_capacity(n_nodes);
    let mut harvests = Vec::with_capacity(n_nodes);
    let mut flags = Vec::with_capacity(n_nodes);
    let mut row = alloc::vec![0.0; n];

    let mut x = sp.x0;
    let mut state = CoordinationState::initial();
    for k in 0..grid.n_steps() {
        let t = grid.time(k);
        row.copy_from_slice(&companions[k][..n]);
        row[i] = x;
        let (u, flag) = node_control(
            k_const,
            &state,
            t,
            x,
            sp,
            scenario.discount,
            scenario.solver.control_tol,
            i,
            k,
        )?;
        stocks.push(x);
        harvests.push(u);
        flags.push(flag);

        let rate = model::dynamics(&sp.growth, &sp.interactions, i, &row, u)?;
        advance(
            &mut state,
            t,
            &row,
            &companions[k + 1],
            i,
            u,
            scenario,
            scope,
            d,
            k,
        )?;
        x += rate * d;
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InfeasiblePath {
                species: i,
                node: k + 1,
                last_positive: stocks[k],
            });
        }
    }
    stocks.push(x);
    harvests.push(harvests[grid.n_steps() - 1]);
    flags.push(flags[grid.n_steps() - 1]);

    Ok(SpeciesPath {
        stocks,
        harvests,
        flags,
    })
}
