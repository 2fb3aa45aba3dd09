//! Scenario data model and validation.
//!
//! A scenario is pure data: species parameters, boundary stocks, horizon,
//! discount rate and solver settings. Construction never fails; call
//! [`validate`] to collect rule violations before handing a scenario to the
//! solvers. With the `serde` feature the types (de)serialize from the JSON
//! scenario format, unknown fields rejected, omitted settings filled from
//! the defaults below.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ccd::CcdSettings;
use crate::error::Error;
use crate::model::{self, Economics, GrowthKind, GrowthModel, InteractionRow};
use crate::shooting::ShootingSettings;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Species {
    pub name: String,
    pub growth: GrowthModel,
    pub econ: Economics,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "InteractionRow::is_empty")
    )]
    pub interactions: InteractionRow,
    /// Stock at t = 0 (10^6 kg).
    pub x0: f64,
    /// Required stock at t = T (10^6 kg).
    #[cfg_attr(feature = "serde", serde(rename = "xT"))]
    pub x_t: f64,
    /// Lower harvest bound (10^6 kg/year), usually 0.
    #[cfg_attr(feature = "serde", serde(default))]
    pub h_min: f64,
    /// Upper harvest bound (10^6 kg/year).
    pub h_max: f64,
}

/// Grid size and root-solve controls. All fields have defaults, so a JSON
/// scenario may omit the whole block or any part of it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SolverSettings {
    /// Number of Euler steps over the horizon (the grid has grid_steps + 1 nodes).
    pub grid_steps: usize,
    /// Absolute tolerance on the per-node control root, in harvest units.
    pub control_tol: f64,
    pub shooting: ShootingSettings,
    pub ccd: CcdSettings,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            grid_steps: 100,
            control_tol: 1e-10,
            shooting: ShootingSettings::default(),
            ccd: CcdSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Scenario {
    pub species: Vec<Species>,
    /// Planning horizon T in years.
    pub horizon: f64,
    /// Continuous discount rate per year.
    #[cfg_attr(feature = "serde", serde(default = "default_discount"))]
    pub discount: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub solver: SolverSettings,
}

#[cfg(feature = "serde")]
fn default_discount() -> f64 {
    0.05
}

impl Scenario {
    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    /// Net stock rate of species i at the given joint stocks and harvest.
    pub fn dynamics(&self, i: usize, stocks: &[f64], h: f64) -> Result<f64, Error> {
        let sp = self.species_checked(i)?;
        model::dynamics(&sp.growth, &sp.interactions, i, stocks, h)
    }

    /// Harvest of species i that yields the prescribed stock rate.
    pub fn implied_harvest(&self, i: usize, stocks: &[f64], x_dot: f64) -> Result<f64, Error> {
        let sp = self.species_checked(i)?;
        model::implied_harvest(&sp.growth, &sp.interactions, i, stocks, x_dot)
    }

    fn species_checked(&self, i: usize) -> Result<&Species, Error> {
        self.species.get(i).ok_or_else(|| Error::Domain {
            what: format!("species index {} out of range", i + 1),
        })
    }
}

/// A single broken validation rule. `field` is the path of the offending
/// value in the scenario; `rule` states the requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Collect every broken rule; an empty result means the scenario is usable.
/// Rules are checked per field so that one bad value yields one violation.
pub fn validate(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut bad = |field: String, rule: &str| {
        out.push(Violation {
            field,
            rule: String::from(rule),
        })
    };

    if s.species.is_empty() {
        bad("species".into(), "at least one species is required");
    }
    if !(s.horizon > 0.0 && s.horizon.is_finite()) {
        bad("horizon".into(), "must be finite and > 0");
    }
    if !(s.discount >= 0.0 && s.discount.is_finite()) {
        bad("discount".into(), "must be finite and >= 0");
    }

    let n = s.species.len();
    for (i, sp) in s.species.iter().enumerate() {
        let base = format!("species[{i}]");
        if !(sp.growth.r > 0.0 && sp.growth.r.is_finite()) {
            bad(format!("{base}.growth.r"), "must be finite and > 0");
        }
        if !(sp.growth.k > 0.0 && sp.growth.k.is_finite()) {
            bad(format!("{base}.growth.k"), "must be finite and > 0");
        }
        match (sp.growth.kind, sp.growth.gamma) {
            (GrowthKind::ModifiedLogistic, None) => {
                bad(format!("{base}.growth.gamma"), "required for modified-logistic");
            }
            (GrowthKind::ModifiedLogistic, Some(g)) => {
                if !(g > 1.0 && g.is_finite()) {
                    bad(
                        format!("{base}.growth.gamma"),
                        "must be finite and > 1 for modified-logistic",
                    );
                }
            }
            (_, Some(_)) => {
                bad(
                    format!("{base}.growth.gamma"),
                    "only meaningful for modified-logistic",
                );
            }
            (_, None) => {}
        }
        if !(sp.econ.p0 > 0.0 && sp.econ.p0.is_finite()) {
            bad(format!("{base}.econ.p0"), "must be finite and > 0");
        }
        if !(sp.econ.p1 > 0.0 && sp.econ.p1.is_finite()) {
            bad(format!("{base}.econ.p1"), "must be finite and > 0");
        }
        if !(sp.econ.c > 0.0 && sp.econ.c.is_finite()) {
            bad(format!("{base}.econ.c"), "must be finite and > 0");
        }
        if !(sp.econ.alpha >= 1.0 && sp.econ.alpha.is_finite()) {
            bad(format!("{base}.econ.alpha"), "must be finite and >= 1");
        }
        if !(sp.x0 > 0.0 && sp.x0.is_finite()) {
            bad(format!("{base}.x0"), "must be finite and > 0");
        }
        if !(sp.x_t > 0.0 && sp.x_t.is_finite()) {
            bad(format!("{base}.xT"), "must be finite and > 0");
        }
        if !(sp.h_min >= 0.0 && sp.h_min.is_finite()) {
            bad(format!("{base}.h_min"), "must be finite and >= 0");
        } else if !(sp.h_max > sp.h_min && sp.h_max.is_finite()) {
            bad(format!("{base}.h_max"), "must be finite and > h_min");
        }

        for (t, term) in sp.interactions.pair.iter().enumerate() {
            let tbase = format!("{base}.interactions.pair[{t}]");
            if term.j == i {
                bad(format!("{tbase}.j"), "a species cannot interact with itself");
            } else if term.j >= n {
                bad(format!("{tbase}.j"), "references a species that does not exist");
            }
            for (name, v) in [("c", term.c), ("beta", term.beta), ("gamma", term.gamma)] {
                if !v.is_finite() {
                    bad(format!("{tbase}.{name}"), "must be finite");
                }
            }
        }
        for (t, term) in sp.interactions.triple.iter().enumerate() {
            let tbase = format!("{base}.interactions.triple[{t}]");
            if term.j >= term.k {
                bad(format!("{tbase}.j"), "companion indices must satisfy j < k");
            }
            if term.j == i || term.k == i {
                bad(
                    format!("{tbase}.j"),
                    "a species cannot appear in its own triple term",
                );
            } else if term.j >= n || term.k >= n {
                bad(
                    format!("{tbase}.k"),
                    "references a species that does not exist",
                );
            }
            for (name, v) in [
                ("c", term.c),
                ("beta", term.beta),
                ("gamma_j", term.gamma_j),
                ("gamma_k", term.gamma_k),
            ] {
                if !v.is_finite() {
                    bad(format!("{tbase}.{name}"), "must be finite");
                }
            }
        }
    }

    let sv = &s.solver;
    if sv.grid_steps < 2 {
        bad("solver.grid_steps".into(), "must be >= 2");
    }
    if !(sv.control_tol > 0.0 && sv.control_tol.is_finite()) {
        bad("solver.control_tol".into(), "must be finite and > 0");
    }
    if !(sv.shooting.k_min.is_finite() && sv.shooting.k_max.is_finite()) {
        bad("solver.shooting.k_min".into(), "bracket must be finite");
    } else if sv.shooting.k_min >= sv.shooting.k_max {
        bad("solver.shooting.k_min".into(), "bracket requires k_min < k_max");
    }
    if !(sv.shooting.tol_terminal > 0.0 && sv.shooting.tol_terminal.is_finite()) {
        bad("solver.shooting.tol_terminal".into(), "must be finite and > 0");
    }
    if sv.shooting.max_iters < 2 {
        bad("solver.shooting.max_iters".into(), "must be >= 2");
    }
    if !(sv.shooting.secant_guard >= 0.0 && sv.shooting.secant_guard.is_finite()) {
        bad("solver.shooting.secant_guard".into(), "must be finite and >= 0");
    }
    if !(sv.ccd.tol_k_change > 0.0 && sv.ccd.tol_k_change.is_finite()) {
        bad("solver.ccd.tol_k_change".into(), "must be finite and > 0");
    }
    if sv.ccd.max_outer_iters < 1 {
        bad("solver.ccd.max_outer_iters".into(), "must be >= 1");
    }

    out
}

/// Shorthand used by the solvers: validate and wrap violations in an error.
pub fn ensure_valid(s: &Scenario) -> Result<(), Error> {
    let violations = validate(s);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidScenario { violations })
    }
}
