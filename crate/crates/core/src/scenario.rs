//! Two-macrostate analysis without mixing.
//!
//! `s` is the perfect-mixing probability of Δ1 and `p` the probability that a
//! small evolved set lands wholly inside εT. Averaging the three admissible
//! capture scenarios gives probabilities that stay away from 0 and 1, and an
//! entropy with a strictly positive floor whenever `p < 1`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Overlap fraction `s ∈ (0,1)` and capture probability `p ∈ [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioParams {
    s: f64,
    p: f64,
}

impl ScenarioParams {
    pub fn new(s: f64, p: f64) -> Result<Self> {
        check_overlap(s)?;
        check_capture(p)?;
        Ok(Self { s, p })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

fn check_overlap(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "overlap fraction s={s} must lie in the open interval (0,1)"
        )))
    }
}

fn check_capture(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "capture probability p={p} must lie in [0,1]"
        )))
    }
}

/// (ρ1, ρ2) = (s, 1 − s).
pub fn two_state_distribution(s: f64) -> Result<(f64, f64)> {
    check_overlap(s)?;
    Ok((s, 1.0 - s))
}

/// −Σ ρ ln ρ in nats, with 0·ln 0 = 0.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some(bad) = dist.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidDistribution(format!(
            "entry {bad} is not a probability"
        )));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {total}, not 1"
        )));
    }
    Ok(dist.iter().map(|&x| -xlogx(x)).sum())
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// The three admissible capture scenarios. (Out, Out) is incompatible with
/// the two boundary conditions and never appears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scenario {
    /// Both Δ1 and Δ2 pieces evolve into εT.
    InIn,
    /// Only the Δ1 piece does.
    InOut,
    /// Only the Δ2 piece does.
    OutIn,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::InIn, Scenario::InOut, Scenario::OutIn];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::InIn => "in_in",
            Scenario::InOut => "in_out",
            Scenario::OutIn => "out_in",
        }
    }

    /// Probability of this scenario after dismissing (Out, Out).
    pub fn probability(&self, p: f64) -> f64 {
        match self {
            Scenario::InIn => p / (2.0 - p),
            Scenario::InOut | Scenario::OutIn => (1.0 - p) / (2.0 - p),
        }
    }

    /// Conditional (ρ1, ρ2) within this scenario.
    pub fn distribution(&self, s: f64) -> (f64, f64) {
        match self {
            Scenario::InIn => (s, 1.0 - s),
            Scenario::InOut => (1.0, 0.0),
            Scenario::OutIn => (0.0, 1.0),
        }
    }
}

/// One row of the scenario table. Measures are in units of μ(ε0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioRow {
    pub scenario: Scenario,
    pub probability: f64,
    pub numerator_d1: f64,
    pub numerator_d2: f64,
    pub denominator: f64,
    pub contribution_rho1: f64,
    pub contribution_rho2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioTable {
    pub rows: [ScenarioRow; 3],
}

impl ScenarioTable {
    /// Σ rows contribution: the scenario-averaged (ρ1, ρ2).
    pub fn weighted_sum(&self) -> (f64, f64) {
        self.rows.iter().fold((0.0, 0.0), |(a, b), row| {
            (a + row.contribution_rho1, b + row.contribution_rho2)
        })
    }

    pub fn total_probability(&self) -> f64 {
        self.rows.iter().map(|r| r.probability).sum()
    }
}

pub fn scenario_table(params: &ScenarioParams) -> ScenarioTable {
    let ScenarioParams { s, p } = *params;
    let row = |scenario: Scenario| {
        let (numerator_d1, numerator_d2, denominator) = match scenario {
            Scenario::InIn => (s, 1.0 - s, 1.0),
            Scenario::InOut => (s, 0.0, s),
            Scenario::OutIn => (0.0, 1.0 - s, 1.0 - s),
        };
        let probability = scenario.probability(p);
        ScenarioRow {
            scenario,
            probability,
            numerator_d1,
            numerator_d2,
            denominator,
            contribution_rho1: probability * numerator_d1 / denominator,
            contribution_rho2: probability * numerator_d2 / denominator,
        }
    };
    ScenarioTable {
        rows: Scenario::ALL.map(row),
    }
}

/// ρ1_b = (1 − p(1−s))/(2−p), ρ2_b = (1 − ps)/(2−p).
///
/// ρ1 is evaluated as ((1−p) + ps)/(2−p), which is exactly `s` at p = 1, and
/// ρ2 as its complement, so the pair sums to exactly 1.0 in floating point.
pub fn bounded_distribution(params: &ScenarioParams) -> (f64, f64) {
    let ScenarioParams { s, p } = *params;
    let rho1 = ((1.0 - p) + p * s) / (2.0 - p);
    (rho1, 1.0 - rho1)
}

/// Z_b = ln(2−p) − a/(2−p)·ln a − b/(2−p)·ln b with a = 1 − p(1−s), b = 1 − ps.
pub fn bounded_entropy(params: &ScenarioParams) -> f64 {
    let ScenarioParams { s, p } = *params;
    let a = 1.0 - p * (1.0 - s);
    let b = 1.0 - p * s;
    let ln_a = (-p * (1.0 - s)).ln_1p();
    let ln_b = (-p * s).ln_1p();
    (2.0 - p).ln() - a / (2.0 - p) * ln_a - b / (2.0 - p) * ln_b
}

/// Limit of Z_b as s → 0 or 1: ln(2−p) − (1−p)/(2−p)·ln(1−p).
pub fn entropy_lower_bound(p: f64) -> Result<f64> {
    check_capture(p)?;
    Ok((2.0 - p).ln() - xlogx(1.0 - p) / (2.0 - p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyRow {
    pub p: f64,
    pub s: f64,
    #[serde(rename = "Z_b")]
    pub z_b: f64,
}

/// Z_b over a (p, s) grid, p outer and s inner, in the order given.
pub fn entropy_scan(p_values: &[f64], s_grid: &[f64]) -> Result<Vec<EntropyRow>> {
    let mut params = Vec::with_capacity(p_values.len() * s_grid.len());
    for &p in p_values {
        for &s in s_grid {
            let pair = ScenarioParams::new(s, p)
                .map_err(|e| Error::Domain(format!("grid point (p={p}, s={s}): {e}")))?;
            params.push(pair);
        }
    }
    Ok(params
        .par_iter()
        .map(|pair| EntropyRow {
            p: pair.p,
            s: pair.s,
            z_b: bounded_entropy(pair),
        })
        .collect())
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// p-values plotted by default: {0.25, 0.5, 0.75, 1}.
pub const DEFAULT_P_VALUES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
