//! Shared fixtures and independent re-implementations used as test oracles.

#![allow(dead_code)]

use fishery_core::model::{
    Economics, GrowthKind, GrowthModel, InteractionRow, PairTerm, TripleTerm,
};
use fishery_core::scenario::{Scenario, Species};
use fishery_core::trajectory::{ClampFlag, Grid, SensitivityScope, SpeciesPath};

pub fn logistic(r: f64, k: f64) -> GrowthModel {
    GrowthModel {
        kind: GrowthKind::Logistic,
        r,
        k,
        gamma: None,
    }
}

/// The three-species reference scenario used across the integration tests.
pub fn base_scenario() -> Scenario {
    let species1 = Species {
        name: "species-1".into(),
        growth: logistic(0.5, 1000.0),
        econ: Economics {
            p0: 0.9,
            p1: 0.01,
            c: 75.0,
            alpha: 1.1,
        },
        interactions: InteractionRow {
            pair: vec![
                PairTerm {
                    j: 1,
                    c: 2e-4,
                    beta: 1.0,
                    gamma: 1.1,
                },
                PairTerm {
                    j: 2,
                    c: 3e-5,
                    beta: 1.2,
                    gamma: 1.0,
                },
            ],
            triple: vec![TripleTerm {
                j: 1,
                k: 2,
                c: 1e-8,
                beta: 0.9,
                gamma_j: 1.1,
                gamma_k: 1.2,
            }],
        },
        x0: 150.0,
        x_t: 500.0,
        h_min: 0.0,
        h_max: 25.0,
    };
    let species2 = Species {
        name: "species-2".into(),
        growth: logistic(0.3, 700.0),
        econ: Economics {
            p0: 1.9,
            p1: 0.02,
            c: 85.0,
            alpha: 1.2,
        },
        interactions: InteractionRow {
            pair: vec![
                PairTerm {
                    j: 0,
                    c: 1e-5,
                    beta: 1.0,
                    gamma: 1.0,
                },
                PairTerm {
                    j: 2,
                    c: 2e-5,
                    beta: 1.0,
                    gamma: 1.2,
                },
            ],
            triple: vec![TripleTerm {
                j: 0,
                k: 2,
                c: 1e-7,
                beta: 1.0,
                gamma_j: 1.0,
                gamma_k: 1.0,
            }],
        },
        x0: 250.0,
        x_t: 500.0,
        h_min: 0.0,
        h_max: 25.0,
    };
    let species3 = Species {
        name: "species-3".into(),
        growth: logistic(0.2, 600.0),
        econ: Economics {
            p0: 2.8,
            p1: 0.03,
            c: 60.0,
            alpha: 1.4,
        },
        interactions: InteractionRow {
            pair: vec![
                PairTerm {
                    j: 0,
                    c: 1e-4,
                    beta: 1.0,
                    gamma: 1.1,
                },
                PairTerm {
                    j: 1,
                    c: 1e-4,
                    beta: 1.0,
                    gamma: 1.0,
                },
            ],
            // a zeroed row entry must behave exactly like an absent one
            triple: vec![TripleTerm {
                j: 0,
                k: 1,
                c: 0.0,
                beta: 0.0,
                gamma_j: 0.0,
                gamma_k: 0.0,
            }],
        },
        x0: 150.0,
        x_t: 200.0,
        h_min: 0.0,
        h_max: 25.0,
    };
    Scenario {
        species: vec![species1, species2, species3],
        horizon: 10.0,
        discount: 0.05,
        solver: Default::default(),
    }
}

/// Same scenario without upper control limits (sweep studies).
pub fn base_scenario_unbounded() -> Scenario {
    let mut sc = base_scenario();
    for sp in &mut sc.species {
        sp.h_max = 1e6;
    }
    sc
}

/// A single uncoupled logistic species, handy for closed-form-ish checks.
pub fn single_species_scenario() -> Scenario {
    Scenario {
        species: vec![Species {
            name: "solo".into(),
            growth: logistic(0.5, 1000.0),
            econ: Economics {
                p0: 0.9,
                p1: 0.01,
                c: 75.0,
                alpha: 1.1,
            },
            interactions: InteractionRow::default(),
            x0: 150.0,
            x_t: 900.0,
            h_min: 0.0,
            h_max: 25.0,
        }],
        horizon: 10.0,
        discount: 0.05,
        solver: Default::default(),
    }
}

/// Three heterogeneous species with empty interaction rows. Each terminal
/// target is read off one of the species' own constant-K paths, so every
/// target is reachable by construction and the solution sits strictly
/// inside the shooting bracket.
pub fn uncoupled_trio() -> Scenario {
    let mut sc = base_scenario();
    for sp in &mut sc.species {
        sp.interactions = InteractionRow::default();
    }
    let grid = Grid::new(sc.horizon, sc.solver.grid_steps).unwrap();
    let companions = constant_companions(&sc, &grid);
    let ks = [0.8, 1.0, 1.2];
    for i in 0..sc.species.len() {
        let path = fishery_core::trajectory::build_path(
            ks[i],
            i,
            &sc,
            &companions,
            &grid,
            SensitivityScope::Joint,
        )
        .unwrap();
        sc.species[i].x_t = path.terminal();
    }
    sc
}

/// Independent reconstruction of the coordination function along a stored
/// path: plain (non-log) accumulators, direct sums, no shared code with the
/// path builder. Returns F(t_k) for every step node k = 0..n_steps-1.
///
/// Under `Joint` scope the stock-sensitivity integrand additionally prices,
/// for every companion j, the harvest shift j needs to keep its recorded
/// path when this species' stock moves: marginal profit of j at the implied
/// (bound-clamped) harvest times the slope of j's interaction term in x_i.
/// The implied harvest is spelled out from first principles here rather
/// than calling the library helper.
pub fn reconstruct_coordination(
    scenario: &Scenario,
    i: usize,
    companions: &[Vec<f64>],
    path: &SpeciesPath,
    grid: &Grid,
    scope: SensitivityScope,
) -> Vec<f64> {
    use fishery_core::model;

    let sp = &scenario.species[i];
    let d = grid.step();
    let n = scenario.n_species();

    let mut out = Vec::with_capacity(grid.n_steps());
    let mut e = 1.0_f64;
    let mut a = 0.0_f64;
    for k in 0..grid.n_steps() {
        let t = grid.time(k);
        let x = path.stocks[k];
        let u = path.harvests[k];
        let disc = (-scenario.discount * t).exp();
        let f_u = disc * model::profit_dh(&sp.econ, x, u).unwrap();
        out.push(f_u * e + a);

        let mut row: Vec<f64> = companions[k][..n].to_vec();
        row[i] = x;
        let mut sens = model::profit_dx(&sp.econ, x, u).unwrap();
        if scope == SensitivityScope::Joint {
            for (j, spj) in scenario.species.iter().enumerate() {
                if j == i || spj.interactions.is_empty() {
                    continue;
                }
                let drift = (companions[k + 1][j] - companions[k][j]) / d;
                let h_j = (model::growth(&spj.growth, row[j]).unwrap()
                    - model::interaction(&spj.interactions, j, &row).unwrap()
                    - drift)
                    .clamp(spj.h_min, spj.h_max);
                sens -= model::profit_dh(&spj.econ, row[j], h_j).unwrap()
                    * model::interaction_dxj(&spj.interactions, j, &row, i).unwrap();
            }
        }
        a += disc * sens * e * d;
        let fx = model::growth_dx(&sp.growth, x).unwrap()
            - model::interaction_dxi(&sp.interactions, i, &row).unwrap();
        e *= (fx * d).exp();
    }
    out
}

/// Companion rows holding every species at its starting stock (a valid
/// strictly positive placeholder where real converged paths are not needed).
pub fn constant_companions(scenario: &Scenario, grid: &Grid) -> Vec<Vec<f64>> {
    let row: Vec<f64> = scenario.species.iter().map(|sp| sp.x0).collect();
    vec![row; grid.n_nodes()]
}

pub fn is_interior(flag: ClampFlag) -> bool {
    flag == ClampFlag::Interior
}
