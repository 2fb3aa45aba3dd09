//! Growth, interaction and profit primitives.
//!
//! Every operation has a closed-form partial derivative next to it; the test
//! suite checks each pair against central finite differences.

use alloc::format;
use alloc::vec::Vec;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum GrowthKind {
    Logistic,
    ModifiedLogistic,
    Gompertz,
}

/// Per-species growth law. `gamma` is the convexity exponent and is only
/// meaningful (and required) for `ModifiedLogistic`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct GrowthModel {
    pub kind: GrowthKind,
    /// Intrinsic growth rate (1/year).
    pub r: f64,
    /// Carrying capacity (10^6 kg).
    pub k: f64,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub gamma: Option<f64>,
}

/// Profit parameters for one species: price p0 - p1*h per unit harvested
/// and harvest cost c*h^alpha / x.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Economics {
    pub p0: f64,
    pub p1: f64,
    pub c: f64,
    pub alpha: f64,
}

/// One pairwise loss term c * x_i^beta * x_j^gamma in species i's row.
/// `j` is the 0-based index of the companion species.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PairTerm {
    #[cfg_attr(feature = "serde", serde(with = "index1"))]
    pub j: usize,
    pub c: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// One three-way loss term c * x_i^beta * x_j^gamma_j * x_k^gamma_k with
/// j < k, both different from i.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct TripleTerm {
    #[cfg_attr(feature = "serde", serde(with = "index1"))]
    pub j: usize,
    #[cfg_attr(feature = "serde", serde(with = "index1"))]
    pub k: usize,
    pub c: f64,
    pub beta: f64,
    pub gamma_j: f64,
    pub gamma_k: f64,
}

/// Sparse interaction row for one species; empty vectors mean no coupling.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct InteractionRow {
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Vec::is_empty"))]
    pub pair: Vec<PairTerm>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Vec::is_empty"))]
    pub triple: Vec<TripleTerm>,
}

impl InteractionRow {
    pub fn is_empty(&self) -> bool {
        self.pair.is_empty() && self.triple.is_empty()
    }
}

/// Species indices are 1-based in serialized form and 0-based in memory.
#[cfg(feature = "serde")]
mod index1 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &usize, s: S) -> Result<S::Ok, S::Error> {
        (v + 1).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let raw = usize::deserialize(d)?;
        if raw == 0 {
            return Err(serde::de::Error::custom("species indices are 1-based"));
        }
        Ok(raw - 1)
    }
}

fn ensure_finite(name: &str, v: f64) -> Result<(), Error> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: format!("{name} is not finite ({v})"),
        })
    }
}

/// Natural growth rate f(x).
///
/// Logistic: r*x*(1 - x/k). Modified logistic: r*x^gamma*(1 - x/k) with
/// gamma > 1. Gompertz: r*x*ln(k/x), which requires x > 0; the other two
/// accept x = 0 (zero stock has zero growth).
pub fn growth(m: &GrowthModel, x: f64) -> Result<f64, Error> {
    ensure_finite("stock", x)?;
    if x < 0.0 {
        return Err(Error::Domain {
            what: format!("stock must be >= 0 for growth evaluation, got {x}"),
        });
    }
    match m.kind {
        GrowthKind::Logistic => Ok(m.r * x * (1.0 - x / m.k)),
        GrowthKind::ModifiedLogistic => {
            let g = require_gamma(m)?;
            Ok(m.r * libm::pow(x, g) * (1.0 - x / m.k))
        }
        GrowthKind::Gompertz => {
            if x == 0.0 {
                return Err(Error::Domain {
                    what: format!("gompertz growth requires stock > 0, got {x}"),
                });
            }
            Ok(m.r * x * libm::log(m.k / x))
        }
    }
}

/// Derivative of [`growth`] with respect to the stock.
///
/// Logistic: r*(1 - 2x/k). Modified logistic:
/// r*(gamma*x^(gamma-1) - (gamma+1)*x^gamma/k). Gompertz: r*(ln(k/x) - 1).
pub fn growth_dx(m: &GrowthModel, x: f64) -> Result<f64, Error> {
    ensure_finite("stock", x)?;
    if x < 0.0 {
        return Err(Error::Domain {
            what: format!("stock must be >= 0 for growth derivative, got {x}"),
        });
    }
    match m.kind {
        GrowthKind::Logistic => Ok(m.r * (1.0 - 2.0 * x / m.k)),
        GrowthKind::ModifiedLogistic => {
            let g = require_gamma(m)?;
            Ok(m.r * (g * libm::pow(x, g - 1.0) - (g + 1.0) * libm::pow(x, g) / m.k))
        }
        GrowthKind::Gompertz => {
            if x == 0.0 {
                return Err(Error::Domain {
                    what: format!("gompertz growth requires stock > 0, got {x}"),
                });
            }
            Ok(m.r * (libm::log(m.k / x) - 1.0))
        }
    }
}

fn require_gamma(m: &GrowthModel) -> Result<f64, Error> {
    m.gamma.ok_or_else(|| Error::Domain {
        what: "modified-logistic growth requires gamma".into(),
    })
}

/// Stock lost by species i to the other species:
///
/// g_i(x) = sum_j c * x_i^beta * x_j^gamma
///        + sum_(j,k) c * x_i^beta * x_j^gamma_j * x_k^gamma_k
///
/// Terms with c = 0 are skipped before any exponentiation, so a zeroed term
/// never evaluates 0^0. Stocks referenced by a live term must be > 0.
pub fn interaction(row: &InteractionRow, i: usize, stocks: &[f64]) -> Result<f64, Error> {
    let mut total = 0.0;
    for term in &row.pair {
        if term.c == 0.0 {
            continue;
        }
        let xi = live_stock(stocks, i)?;
        let xj = live_stock(stocks, term.j)?;
        total += term.c * libm::pow(xi, term.beta) * libm::pow(xj, term.gamma);
    }
    for term in &row.triple {
        if term.c == 0.0 {
            continue;
        }
        let xi = live_stock(stocks, i)?;
        let xj = live_stock(stocks, term.j)?;
        let xk = live_stock(stocks, term.k)?;
        total += term.c
            * libm::pow(xi, term.beta)
            * libm::pow(xj, term.gamma_j)
            * libm::pow(xk, term.gamma_k);
    }
    Ok(total)
}

/// Derivative of [`interaction`] with respect to x_i (companions held fixed):
/// each live term contributes c * beta * x_i^(beta-1) * (companion factors).
pub fn interaction_dxi(row: &InteractionRow, i: usize, stocks: &[f64]) -> Result<f64, Error> {
    let mut total = 0.0;
    for term in &row.pair {
        let scale = term.c * term.beta;
        if scale == 0.0 {
            continue;
        }
        let xi = live_stock(stocks, i)?;
        let xj = live_stock(stocks, term.j)?;
        total += scale * libm::pow(xi, term.beta - 1.0) * libm::pow(xj, term.gamma);
    }
    for term in &row.triple {
        let scale = term.c * term.beta;
        if scale == 0.0 {
            continue;
        }
        let xi = live_stock(stocks, i)?;
        let xj = live_stock(stocks, term.j)?;
        let xk = live_stock(stocks, term.k)?;
        total += scale
            * libm::pow(xi, term.beta - 1.0)
            * libm::pow(xj, term.gamma_j)
            * libm::pow(xk, term.gamma_k);
    }
    Ok(total)
}

/// Derivative of [`interaction`] with respect to a companion stock x_j
/// (j != i): pair terms referencing j contribute
/// c * x_i^beta * gamma * x_j^(gamma-1); triple terms referencing j in
/// either slot contribute the matching factor rule. Terms not involving
/// species j contribute nothing.
pub fn interaction_dxj(
    row: &InteractionRow,
    i: usize,
    stocks: &[f64],
    j: usize,
) -> Result<f64, Error> {
    if j == i {
        return Err(Error::Domain {
            what: format!(
                "companion derivative needs a companion index, got own index {}",
                i + 1
            ),
        });
    }
    let mut total = 0.0;
    for term in &row.pair {
        if term.j != j {
            continue;
        }
        let scale = term.c * term.gamma;
        if scale == 0.0 {
            continue;
        }
        let xi = live_stock(stocks, i)?;
        let xj = live_stock(stocks, term.j)?;
        total += scale * libm::pow(xi, term.beta) * libm::pow(xj, term.gamma - 1.0);
    }
    for term in &row.triple {
        if term.c == 0.0 || (term.j != j && term.k != j) {
            continue;
        }
        let (g_here, g_other, other) = if term.j == j {
            (term.gamma_j, term.gamma_k, term.k)
        } else {
            (term.gamma_k, term.gamma_j, term.j)
        };
        let scale = term.c * g_here;
        if scale == 0.0 {
            continue;
        }
        let xi = live_stock(stocks, i)?;
        let xj = live_stock(stocks, j)?;
        let xo = live_stock(stocks, other)?;
        total += scale
            * libm::pow(xi, term.beta)
            * libm::pow(xj, g_here - 1.0)
            * libm::pow(xo, g_other);
    }
    Ok(total)
}

fn live_stock(stocks: &[f64], idx: usize) -> Result<f64, Error> {
    let x = *stocks.get(idx).ok_or_else(|| Error::Domain {
        what: format!(
            "interaction references species {} but only {} stocks were given",
            idx + 1,
            stocks.len()
        ),
    })?;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain {
            what: format!(
                "interaction requires stock of species {} to be > 0, got {x}",
                idx + 1
            ),
        });
    }
    Ok(x)
}

fn check_profit_args(e: &Economics, x: f64, h: f64) -> Result<(), Error> {
    ensure_finite("stock", x)?;
    ensure_finite("harvest", h)?;
    if x <= 0.0 {
        return Err(Error::Domain {
            what: format!("profit requires stock > 0, got {x}"),
        });
    }
    if h < 0.0 {
        return Err(Error::Domain {
            what: format!("profit requires harvest >= 0, got {h}"),
        });
    }
    let _ = e;
    Ok(())
}

/// Instantaneous profit: p0*h - p1*h^2 - c*h^alpha/x.
pub fn profit(e: &Economics, x: f64, h: f64) -> Result<f64, Error> {
    check_profit_args(e, x, h)?;
    Ok(e.p0 * h - e.p1 * h * h - e.c * libm::pow(h, e.alpha) / x)
}

/// Derivative of [`profit`] in the harvest: p0 - 2*p1*h - c*alpha*h^(alpha-1)/x.
/// For alpha = 1 the last factor is h^0 = 1, including at h = 0.
pub fn profit_dh(e: &Economics, x: f64, h: f64) -> Result<f64, Error> {
    check_profit_args(e, x, h)?;
    Ok(e.p0 - 2.0 * e.p1 * h - e.c * e.alpha * libm::pow(h, e.alpha - 1.0) / x)
}

/// Derivative of [`profit`] in the stock: c*h^alpha/x^2 (cost falls as the
/// stock grows, so this is nonnegative).
pub fn profit_dx(e: &Economics, x: f64, h: f64) -> Result<f64, Error> {
    check_profit_args(e, x, h)?;
    Ok(e.c * libm::pow(h, e.alpha) / (x * x))
}

/// Net stock rate for species i: growth minus interaction losses minus harvest.
pub fn dynamics(
    growth_model: &GrowthModel,
    row: &InteractionRow,
    i: usize,
    stocks: &[f64],
    h: f64,
) -> Result<f64, Error> {
    ensure_finite("harvest", h)?;
    let x = *stocks.get(i).ok_or_else(|| Error::Domain {
        what: format!("species index {} out of range", i + 1),
    })?;
    Ok(growth(growth_model, x)? - interaction(row, i, stocks)? - h)
}

/// Harvest that produces a prescribed stock rate: h = f(x_i) - g_i(x) - x_dot.
/// Inverse of [`dynamics`] in `h`; may be negative for an infeasible rate.
pub fn implied_harvest(
    growth_model: &GrowthModel,
    row: &InteractionRow,
    i: usize,
    stocks: &[f64],
    x_dot: f64,
) -> Result<f64, Error> {
    ensure_finite("stock rate", x_dot)?;
    let x = *stocks.get(i).ok_or_else(|| Error::Domain {
        what: format!("species index {} out of range", i + 1),
    })?;
    Ok(growth(growth_model, x)? - interaction(row, i, stocks)? - x_dot)
}
