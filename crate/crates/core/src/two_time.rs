//! Macrostate probabilities under an initial and a final boundary condition,
//! and their perfect-mixing reduction.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::phase_space::{MacrostatePartition, PermutationDynamics, RegionSet};

/// Exact rational probability.
pub type Exact = Ratio<u64>;

pub fn exact_to_f64(r: &Exact) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Boundary data: the system is in `epsilon0` at time 0 and in `epsilon_t`
/// at `final_time`; probabilities are asked for at time `t`.
#[derive(Debug, Clone)]
pub struct TwoTimeProblem<'a> {
    epsilon0: RegionSet,
    epsilon_t: RegionSet,
    t: i64,
    final_time: i64,
    dynamics: &'a PermutationDynamics,
}

impl<'a> TwoTimeProblem<'a> {
    pub fn new(
        epsilon0: RegionSet,
        epsilon_t: RegionSet,
        t: i64,
        final_time: i64,
        dynamics: &'a PermutationDynamics,
    ) -> Result<Self> {
        if !(0 < t && t < final_time) {
            return Err(Error::InvalidTimes(format!(
                "need 0 < t < T, got t={t}, T={final_time}"
            )));
        }
        for (name, r) in [("epsilon0", &epsilon0), ("epsilonT", &epsilon_t)] {
            if r.space() != dynamics.space() {
                return Err(Error::IncompatibleSpaces {
                    left: r.space().cell_count(),
                    right: dynamics.cell_count(),
                });
            }
            if r.is_empty() {
                return Err(Error::Domain(format!("{name} has zero measure")));
            }
        }
        Ok(Self {
            epsilon0,
            epsilon_t,
            t,
            final_time,
            dynamics,
        })
    }

    pub fn epsilon0(&self) -> &RegionSet {
        &self.epsilon0
    }

    pub fn epsilon_t(&self) -> &RegionSet {
        &self.epsilon_t
    }

    pub fn t(&self) -> i64 {
        self.t
    }

    pub fn final_time(&self) -> i64 {
        self.final_time
    }

    pub fn dynamics(&self) -> &'a PermutationDynamics {
        self.dynamics
    }
}

/// Probability of each macrostate of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacrostateDistribution {
    labels: Vec<String>,
    probabilities: Vec<Exact>,
}

impl MacrostateDistribution {
    /// Builds a distribution from unnormalised counts.
    pub fn from_counts(labels: Vec<String>, counts: &[u64]) -> Result<Self> {
        if labels.len() != counts.len() {
            return Err(Error::LengthMismatch {
                what: "counts",
                found: counts.len(),
                expected: labels.len(),
            });
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("all counts are zero".into()));
        }
        let probabilities = counts.iter().map(|&c| Ratio::new(c, total)).collect();
        Ok(Self {
            labels,
            probabilities,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probabilities(&self) -> &[Exact] {
        &self.probabilities
    }

    pub fn get(&self, label: &str) -> Option<Exact> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.probabilities[i])
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probabilities.iter().map(exact_to_f64).collect()
    }

    pub fn total(&self) -> Exact {
        self.probabilities
            .iter()
            .fold(Exact::zero(), |acc, p| acc + p)
    }
}

/// ρα = μ(φ^t(ε0) ∩ Δα ∩ φ^(t−T)(εT)) / μ(φ^t(ε0) ∩ φ^(t−T)(εT)).
pub fn two_time_distribution(
    problem: &TwoTimeProblem<'_>,
    partition: &MacrostatePartition,
) -> Result<MacrostateDistribution> {
    let dynamics = problem.dynamics;
    let forward = dynamics.evolve(&problem.epsilon0, problem.t)?;
    let backward = dynamics.evolve(&problem.epsilon_t, problem.t - problem.final_time)?;
    let admissible = forward.intersect(&backward)?;
    if admissible.is_empty() {
        return Err(Error::InconsistentBoundaryConditions);
    }
    let counts = partition
        .blocks()
        .iter()
        .map(|block| admissible.overlap(block))
        .collect::<Result<Vec<_>>>()?;
    MacrostateDistribution::from_counts(partition.labels().to_vec(), &counts)
}

/// ρα = μ(φ^t(ε0) ∩ Δα) / μ(ε0); the final boundary drops out.
pub fn perfect_mixing_distribution(
    epsilon0: &RegionSet,
    partition: &MacrostatePartition,
    t: i64,
    dynamics: &PermutationDynamics,
) -> Result<MacrostateDistribution> {
    if epsilon0.is_empty() {
        return Err(Error::Domain("epsilon0 has zero measure".into()));
    }
    let forward = dynamics.evolve(epsilon0, t)?;
    let counts = partition
        .blocks()
        .iter()
        .map(|block| forward.overlap(block))
        .collect::<Result<Vec<_>>>()?;
    MacrostateDistribution::from_counts(partition.labels().to_vec(), &counts)
}

/// |μ(A ∩ φ^(−lag)(B))/N − (μ(A)/N)(μ(B)/N)|: the deviation from the
/// product rule, in fractions of the total measure.
pub fn mixing_defect(
    a: &RegionSet,
    b: &RegionSet,
    lag: i64,
    dynamics: &PermutationDynamics,
) -> Result<f64> {
    let pulled = dynamics.evolve(b, -lag)?;
    let joint = a.overlap(&pulled)? as i128;
    let n = a.space().measure() as i128;
    let numerator = (n * joint - a.measure() as i128 * b.measure() as i128).abs();
    Ok(numerator as f64 / (n * n) as f64)
}
