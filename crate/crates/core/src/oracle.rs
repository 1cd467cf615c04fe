//! Independent verification engines.
//!
//! The enumerators trace individual microstates through the raw one-step map
//! and never touch the region algebra or the cycle tables used by the
//! closed-form paths. The Monte Carlo sampler draws capture scenarios and
//! averages their conditional distributions.

// `!(x > 0)` style checks are deliberate: NaN weights must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_space::{Cell, MacrostatePartition, PermutationDynamics, RegionSet};
use crate::retrodiction::Weight;
use crate::rng::{self, Generator};
use crate::scenario::{Scenario, ScenarioParams};
use crate::two_time::{Exact, MacrostateDistribution, TwoTimeProblem};

/// Largest phase space the enumerators accept.
pub const ENUMERATION_LIMIT: usize = 1 << 16;

/// Parallel lanes used by [`monte_carlo_bounded`]. Fixed so results do not
/// depend on the thread count.
pub const MONTE_CARLO_LANES: u64 = 16;

fn guard(cell_count: usize) -> Result<()> {
    if cell_count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            cell_count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

fn step(map: &[Cell], mut x: Cell, steps: i64) -> Cell {
    for _ in 0..steps {
        x = map[x as usize];
    }
    x
}

/// Two-time distribution by counting trajectories: each x ∈ ε0 is stepped to
/// time t, recorded, then stepped on to T and kept only if it lands in εT.
pub fn enumerate_two_time(
    problem: &TwoTimeProblem<'_>,
    partition: &MacrostatePartition,
) -> Result<MacrostateDistribution> {
    let dynamics = problem.dynamics();
    guard(dynamics.cell_count())?;
    let map = dynamics.forward_map();
    let mut counts = vec![0u64; partition.len()];
    for &x in problem.epsilon0().cells() {
        let at_t = step(map, x, problem.t());
        let at_final = step(map, at_t, problem.final_time() - problem.t());
        if !problem.epsilon_t().contains(at_final) {
            continue;
        }
        let block = partition
            .blocks()
            .iter()
            .position(|b| b.contains(at_t))
            .expect("partition covers every cell");
        counts[block] += 1;
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::InconsistentBoundaryConditions);
    }
    MacrostateDistribution::from_counts(partition.labels().to_vec(), &counts)
}

/// Posterior over past macrostates by enumerating joint outcomes: a block k
/// drawn from the prior, a microstate drawn uniformly within it, traced `lag`
/// steps forward and kept if it lands in the observed block.
pub fn enumerate_retrodiction<W: Weight>(
    partition: &MacrostatePartition,
    dynamics: &PermutationDynamics,
    prior: &[W],
    observed: &str,
    lag: i64,
) -> Result<Vec<W>> {
    guard(dynamics.cell_count())?;
    if lag <= 0 {
        return Err(Error::InvalidTimes(format!(
            "lag must be positive, got {lag}"
        )));
    }
    if prior.len() != partition.len() {
        return Err(Error::LengthMismatch {
            what: "prior",
            found: prior.len(),
            expected: partition.len(),
        });
    }
    let target = partition.block(observed)?;
    let map = dynamics.forward_map();
    let mut mass = vec![W::zero(); partition.len()];
    for (k, block) in partition.blocks().iter().enumerate() {
        let per_cell = W::from_exact(&Ratio::new(1, block.measure()));
        for &x in block.cells() {
            if target.contains(step(map, x, lag)) {
                mass[k] = mass[k].clone() + prior[k].clone() * per_cell.clone();
            }
        }
    }
    let total = mass.iter().fold(W::zero(), |acc, m| acc + m.clone());
    if !(total > W::zero()) {
        return Err(Error::ObservationImpossible);
    }
    Ok(mass.into_iter().map(|m| m / total.clone()).collect())
}

/// How (Out, Out) is excluded when drawing scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SamplingMethod {
    /// Draw two independent captures with probability p; redraw (Out, Out).
    Rejection,
    /// Draw directly from the renormalised row probabilities.
    Renormalized,
}

/// Seeded stream of capture scenarios.
#[derive(Debug, Clone)]
pub struct ScenarioSampler {
    params: ScenarioParams,
    method: SamplingMethod,
    rng: Generator,
}

impl ScenarioSampler {
    pub fn new(params: ScenarioParams, seed: u64, method: SamplingMethod) -> Self {
        Self::with_rng(params, rng::seeded(seed), method)
    }

    fn with_rng(params: ScenarioParams, rng: Generator, method: SamplingMethod) -> Self {
        Self {
            params,
            method,
            rng,
        }
    }

    pub fn draw(&mut self) -> Scenario {
        let p = self.params.p();
        // p = 0 makes every raw draw (Out, Out); use the p → 0 limit instead.
        if self.method == SamplingMethod::Renormalized || p == 0.0 {
            let u: f64 = self.rng.random();
            let in_in = Scenario::InIn.probability(p);
            if u < in_in {
                Scenario::InIn
            } else if u < in_in + Scenario::InOut.probability(p) {
                Scenario::InOut
            } else {
                Scenario::OutIn
            }
        } else {
            loop {
                let first = self.rng.random_bool(p);
                let second = self.rng.random_bool(p);
                match (first, second) {
                    (true, true) => return Scenario::InIn,
                    (true, false) => return Scenario::InOut,
                    (false, true) => return Scenario::OutIn,
                    (false, false) => continue,
                }
            }
        }
    }
}

/// One scenario draw using rejection sampling.
pub fn sample_scenario(params: &ScenarioParams, seed: u64) -> Scenario {
    ScenarioSampler::new(*params, seed, SamplingMethod::Rejection).draw()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ScenarioCounts {
    pub in_in: u64,
    pub in_out: u64,
    pub out_in: u64,
}

impl ScenarioCounts {
    pub fn record(&mut self, scenario: Scenario) {
        match scenario {
            Scenario::InIn => self.in_in += 1,
            Scenario::InOut => self.in_out += 1,
            Scenario::OutIn => self.out_in += 1,
        }
    }

    pub fn get(&self, scenario: Scenario) -> u64 {
        match scenario {
            Scenario::InIn => self.in_in,
            Scenario::InOut => self.in_out,
            Scenario::OutIn => self.out_in,
        }
    }

    pub fn total(&self) -> u64 {
        self.in_in + self.in_out + self.out_in
    }

    fn merge(self, other: Self) -> Self {
        Self {
            in_in: self.in_in + other.in_in,
            in_out: self.in_out + other.in_out,
            out_in: self.out_in + other.out_in,
        }
    }
}

/// `draws` scenarios split over the fixed lanes, tallied.
pub fn scenario_counts(
    params: &ScenarioParams,
    draws: u64,
    seed: u64,
    method: SamplingMethod,
) -> ScenarioCounts {
    (0..MONTE_CARLO_LANES)
        .into_par_iter()
        .map(|lane| {
            let share = draws / MONTE_CARLO_LANES + u64::from(lane < draws % MONTE_CARLO_LANES);
            let mut sampler = ScenarioSampler::with_rng(*params, rng::lane(seed, lane), method);
            let mut counts = ScenarioCounts::default();
            for _ in 0..share {
                counts.record(sampler.draw());
            }
            counts
        })
        .reduce(ScenarioCounts::default, ScenarioCounts::merge)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    /// Averaged (ρ1, ρ2).
    pub estimate: Vec<f64>,
    /// Sample standard deviation of per-trial contributions over √trials.
    pub standard_error: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub counts: ScenarioCounts,
}

/// Scenario-averaged (ρ1, ρ2) by simulation, using rejection sampling.
pub fn monte_carlo_bounded(
    params: &ScenarioParams,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloResult> {
    monte_carlo_bounded_with(params, trials, seed, SamplingMethod::Rejection)
}

pub fn monte_carlo_bounded_with(
    params: &ScenarioParams,
    trials: u64,
    seed: u64,
    method: SamplingMethod,
) -> Result<MonteCarloResult> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let counts = scenario_counts(params, trials, seed, method);
    let s = params.s();
    let n = trials as f64;
    // Per-trial ρ1 contribution is s, 1 or 0 and ρ2 = 1 − ρ1; both share
    // one variance.
    let weighted = |x_in_in: f64, x_in_out: f64, x_out_in: f64| {
        let sum = counts.in_in as f64 * x_in_in
            + counts.in_out as f64 * x_in_out
            + counts.out_in as f64 * x_out_in;
        let sum_sq = counts.in_in as f64 * x_in_in * x_in_in
            + counts.in_out as f64 * x_in_out * x_in_out
            + counts.out_in as f64 * x_out_in * x_out_in;
        let mean = sum / n;
        let se = if trials > 1 {
            ((sum_sq - n * mean * mean).max(0.0) / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        (mean, se)
    };
    let (rho1, se1) = weighted(s, 1.0, 0.0);
    let (rho2, se2) = weighted(1.0 - s, 0.0, 1.0);
    Ok(MonteCarloResult {
        estimate: vec![rho1, rho2],
        standard_error: vec![se1, se2],
        trials,
        seed,
        counts,
    })
}

/// Where a small region ends up relative to εT after `lag` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capture {
    /// The image lies wholly inside εT.
    Inside,
    /// The image is disjoint from εT.
    Outside,
    /// The image straddles the boundary of εT.
    Straddling { fraction_inside: Exact },
}

impl Capture {
    /// 1 for whole capture, 0 for whole escape, `None` when straddling.
    pub fn indicator(&self) -> Option<u8> {
        match self {
            Capture::Inside => Some(1),
            Capture::Outside => Some(0),
            Capture::Straddling { .. } => None,
        }
    }

    pub fn is_whole(&self) -> bool {
        !matches!(self, Capture::Straddling { .. })
    }

    pub fn fraction_inside(&self) -> Exact {
        match self {
            Capture::Inside => Ratio::from_integer(1),
            Capture::Outside => Ratio::from_integer(0),
            Capture::Straddling { fraction_inside } => *fraction_inside,
        }
    }
}

pub fn estimate_capture_probability(
    dynamics: &PermutationDynamics,
    small_region: &RegionSet,
    epsilon_t: &RegionSet,
    lag: i64,
) -> Result<Capture> {
    if small_region.is_empty() {
        return Err(Error::Domain("small region has zero measure".into()));
    }
    let image = dynamics.evolve(small_region, lag)?;
    let inside = image.overlap(epsilon_t)?;
    Ok(if inside == image.measure() {
        Capture::Inside
    } else if inside == 0 {
        Capture::Outside
    } else {
        Capture::Straddling {
            fraction_inside: Ratio::new(inside, image.measure()),
        }
    })
}

/// Capture outcomes over a family of small regions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CaptureCensus {
    pub inside: u64,
    pub outside: u64,
    pub straddling: u64,
}

impl CaptureCensus {
    /// Empirical p among regions that evolved whole; `None` if none did.
    pub fn whole_capture_rate(&self) -> Option<f64> {
        let whole = self.inside + self.outside;
        (whole > 0).then(|| self.inside as f64 / whole as f64)
    }
}

pub fn capture_census(
    dynamics: &PermutationDynamics,
    regions: &[RegionSet],
    epsilon_t: &RegionSet,
    lag: i64,
) -> Result<CaptureCensus> {
    let mut census = CaptureCensus::default();
    for region in regions {
        match estimate_capture_probability(dynamics, region, epsilon_t, lag)? {
            Capture::Inside => census.inside += 1,
            Capture::Outside => census.outside += 1,
            Capture::Straddling { .. } => census.straddling += 1,
        }
    }
    Ok(census)
}
