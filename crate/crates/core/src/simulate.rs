//! Coupled forward integration under a prescribed harvest (no optimization).
//!
//! One forward Euler step advances every species simultaneously from the
//! same node row, so the result is independent of species order. Used to
//! study unharvested long-run behavior, to audit emitted plans (feeding a
//! solution's harvest schedule back in must reproduce its stocks), and for
//! steady-state searches.

use alloc::format;
use alloc::vec::Vec;

use crate::error::Error;
use crate::scenario::{ensure_valid, Scenario};
use crate::trajectory::{Grid, Trajectory};

/// Harvest prescription for a plain integration.
#[derive(Debug, Clone, PartialEq)]
pub enum HarvestSpec {
    /// No harvesting anywhere.
    None,
    /// Constant per-species rates, one entry per species.
    Constant(Vec<f64>),
    /// Full schedule: `rows[k][i]` is species i's rate on step k. Must have
    /// at least `n_steps` rows (a terminal row, if present, is ignored).
    Schedule(Vec<Vec<f64>>),
}

/// A plain integration request. Stocks start from `x0` (one entry per
/// species) and march `n_steps` Euler steps to `horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub horizon: f64,
    pub n_steps: usize,
    pub x0: Vec<f64>,
    pub harvests: HarvestSpec,
}

/// Default simulation density: 100 steps per 10 years.
pub fn default_sim_steps(horizon: f64) -> usize {
    let steps = libm::ceil(horizon * 10.0);
    if steps < 2.0 {
        2
    } else {
        steps as usize
    }
}

/// Integrate the coupled system under `spec`.
pub fn integrate(scenario: &Scenario, spec: &SimSpec) -> Result<Trajectory, Error> {
    ensure_valid(scenario)?;
    let grid = Grid::new(spec.horizon, spec.n_steps)?;
    let n = scenario.n_species();
    if spec.x0.len() != n {
        return Err(Error::Domain {
            what: format!("x0 has {} entries for {} species", spec.x0.len(), n),
        });
    }
    for (i, &x) in spec.x0.iter().enumerate() {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain {
                what: format!("x0 of species {} must be > 0, got {x}", i + 1),
            });
        }
    }
    let harvest_row = |k: usize| -> Result<Vec<f64>, Error> {
        match &spec.harvests {
            HarvestSpec::None => Ok(alloc::vec![0.0; n]),
            HarvestSpec::Constant(rates) => {
                if rates.len() != n {
                    return Err(Error::Domain {
                        what: format!("{} harvest rates for {} species", rates.len(), n),
                    });
                }
                Ok(rates.clone())
            }
            HarvestSpec::Schedule(rows) => {
                let row = rows.get(k).ok_or_else(|| Error::Domain {
                    what: format!("harvest schedule ends at row {} of {}", rows.len(), k + 1),
                })?;
                if row.len() != n {
                    return Err(Error::Domain {
                        what: format!("harvest row {k} has {} entries for {n} species", row.len()),
                    });
                }
                Ok(row.clone())
            }
        }
    };
    for k in 0..grid.n_steps() {
        for (i, &h) in harvest_row(k)?.iter().enumerate() {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(Error::Domain {
                    what: format!("harvest of species {} at step {k} must be >= 0, got {h}", i + 1),
                });
            }
        }
    }
    integrate_rows(scenario, &grid, spec.x0.clone(), harvest_row)
}

/// Integrate the scenario's own initial stocks under an explicit schedule
/// on an explicit grid. This is the audit path for solver output: it runs
/// the exact arithmetic of [`integrate`] without re-validating rates, so a
/// solution's schedule reproduces its stocks exactly.
pub fn integrate_schedule(
    scenario: &Scenario,
    grid: &Grid,
    schedule: &[Vec<f64>],
) -> Result<Trajectory, Error> {
    if schedule.len() < grid.n_steps() {
        return Err(Error::Domain {
            what: format!(
                "harvest schedule has {} rows, need {}",
                schedule.len(),
                grid.n_steps()
            ),
        });
    }
    let x0: Vec<f64> = scenario.species.iter().map(|sp| sp.x0).collect();
    integrate_rows(scenario, grid, x0, |k| Ok(schedule[k].clone()))
}

fn integrate_rows(
    scenario: &Scenario,
    grid: &Grid,
    x0: Vec<f64>,
    mut harvest_row: impl FnMut(usize) -> Result<Vec<f64>, Error>,
) -> Result<Trajectory, Error> {
    let n = scenario.n_species();
    let d = grid.step();
    let mut stocks = Vec::with_capacity(grid.n_nodes());
    let mut harvests = Vec::with_capacity(grid.n_nodes());
    let mut x = x0;
    let mut rates = alloc::vec![0.0; n];
    for k in 0..grid.n_steps() {
        let h = harvest_row(k)?;
        // simultaneous step: all rates from the same node row
        for i in 0..n {
            rates[i] = scenario.dynamics(i, &x, h[i])?;
        }
        stocks.push(x.clone());
        harvests.push(h);
        for i in 0..n {
            x[i] += rates[i] * d;
            if !(x[i] > 0.0) || !x[i].is_finite() {
                return Err(Error::InfeasiblePath {
                    species: i,
                    node: k + 1,
                    last_positive: stocks[k][i],
                });
            }
        }
    }
    stocks.push(x);
    harvests.push(harvests[grid.n_steps() - 1].clone());
    Ok(Trajectory { stocks, harvests })
}

/// Unharvested long-run stocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub stocks: Vec<f64>,
    /// True if every |stock rate| fell below the tolerance before
    /// `max_horizon`.
    pub converged: bool,
    /// Simulated years at the reported stocks.
    pub years: f64,
}

/// March the unharvested system (0.1-year steps) until every stock changes
/// by less than `tol` per year, or `max_horizon` years elapse.
pub fn steady_state(
    scenario: &Scenario,
    x0: &[f64],
    tol: f64,
    max_horizon: f64,
) -> Result<SteadyState, Error> {
    ensure_valid(scenario)?;
    let n = scenario.n_species();
    if x0.len() != n {
        return Err(Error::Domain {
            what: format!("x0 has {} entries for {} species", x0.len(), n),
        });
    }
    if !(tol > 0.0) || !(max_horizon > 0.0) {
        return Err(Error::Domain {
            what: format!("steady-state search needs tol > 0 and max_horizon > 0"),
        });
    }
    let d = 0.1;
    let steps = libm::ceil(max_horizon / d) as usize;
    let mut x: Vec<f64> = x0.to_vec();
    let mut rates = alloc::vec![0.0; n];
    for k in 0..=steps {
        let mut max_rate = 0.0_f64;
        for i in 0..n {
            rates[i] = scenario.dynamics(i, &x, 0.0)?;
            max_rate = max_rate.max(rates[i].abs());
        }
        // |dx/dt| is exactly the per-year change of the Euler step
        if max_rate < tol {
            return Ok(SteadyState {
                stocks: x,
                converged: true,
                years: k as f64 * d,
            });
        }
        if k == steps {
            break;
        }
        for i in 0..n {
            x[i] += rates[i] * d;
            if !(x[i] > 0.0) || !x[i].is_finite() {
                return Err(Error::InfeasiblePath {
                    species: i,
                    node: k + 1,
                    last_positive: 0.0,
                });
            }
        }
    }
    Ok(SteadyState {
        stocks: x,
        converged: false,
        years: steps as f64 * d,
    })
}
