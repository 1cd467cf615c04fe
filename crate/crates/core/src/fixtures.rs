//! Seeded random problem generators for oracle-equivalence campaigns.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::phase_space::{MacrostatePartition, PermutationDynamics, PhaseSpace, RegionSet};
use crate::rng::{self, Generator};
use crate::two_time::{Exact, TwoTimeProblem};

#[derive(Debug, Clone)]
pub struct TwoTimeFixture {
    pub seed: u64,
    pub partition: MacrostatePartition,
    pub dynamics: PermutationDynamics,
    pub epsilon0: RegionSet,
    pub epsilon_t: RegionSet,
    pub t: i64,
    pub final_time: i64,
}

impl TwoTimeFixture {
    pub fn problem(&self) -> Result<TwoTimeProblem<'_>> {
        TwoTimeProblem::new(
            self.epsilon0.clone(),
            self.epsilon_t.clone(),
            self.t,
            self.final_time,
            &self.dynamics,
        )
    }
}

#[derive(Debug, Clone)]
pub struct RetrodictionFixture {
    pub seed: u64,
    pub partition: MacrostatePartition,
    pub dynamics: PermutationDynamics,
    pub prior: Vec<Exact>,
    pub observed: String,
    pub lag: i64,
}

fn check_size(max_cells: usize) -> Result<()> {
    if max_cells < 2 {
        return Err(Error::Domain(format!(
            "fixtures need at least 2 cells, got max_cells={max_cells}"
        )));
    }
    Ok(())
}

fn random_partition(rng: &mut Generator, space: PhaseSpace) -> Result<MacrostatePartition> {
    let n = space.cell_count();
    let k = rng.random_range(1..=n.min(4));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut assignment = vec![0; n];
    for (i, &cell) in order.iter().enumerate() {
        assignment[cell] = if i < k { i } else { rng.random_range(0..k) };
    }
    let labels = (1..=k).map(|b| format!("D{b}")).collect();
    MacrostatePartition::from_assignment(labels, &assignment)
}

fn random_region(rng: &mut Generator, space: PhaseSpace, density: f64) -> Result<RegionSet> {
    let cells: Vec<usize> = (0..space.cell_count())
        .filter(|_| rng.random_bool(density))
        .collect();
    space.region(cells)
}

/// Random consistent two-time problem on at most `max_cells` cells.
///
/// εT always contains the time-T position of at least one ε0 microstate,
/// traced through the raw map, so the boundary conditions are satisfiable.
pub fn random_two_time_fixture(seed: u64, max_cells: usize) -> Result<TwoTimeFixture> {
    check_size(max_cells)?;
    let mut rng = rng::seeded(seed);
    let n = rng.random_range(2..=max_cells);
    let space = PhaseSpace::new(n)?;
    let partition = random_partition(&mut rng, space)?;
    let dynamics = PermutationDynamics::random(rng.next_u64(), n)?;

    let anchor = rng.random_range(0..n);
    let epsilon0 = random_region(&mut rng, space, 0.4)?.union(&space.region([anchor])?)?;
    let t = rng.random_range(1..=4);
    let final_time = t + rng.random_range(1..=8);

    let mut end = anchor as u32;
    for _ in 0..final_time {
        end = dynamics.forward_map()[end as usize];
    }
    let epsilon_t = if rng.random_bool(0.1) {
        space.full()
    } else {
        random_region(&mut rng, space, 0.4)?.union(&space.region([end as usize])?)?
    };
    Ok(TwoTimeFixture {
        seed,
        partition,
        dynamics,
        epsilon0,
        epsilon_t,
        t,
        final_time,
    })
}

/// Random retrodiction problem with a strictly positive rational prior.
pub fn random_retrodiction_fixture(seed: u64, max_cells: usize) -> Result<RetrodictionFixture> {
    check_size(max_cells)?;
    let mut rng = rng::seeded(seed);
    let n = rng.random_range(2..=max_cells);
    let space = PhaseSpace::new(n)?;
    let partition = random_partition(&mut rng, space)?;
    let dynamics = PermutationDynamics::random(rng.next_u64(), n)?;
    let weights: Vec<u64> = (0..partition.len())
        .map(|_| rng.random_range(1..=10))
        .collect();
    let total: u64 = weights.iter().sum();
    let prior = weights.iter().map(|&w| Ratio::new(w, total)).collect();
    let observed = partition.labels()[rng.random_range(0..partition.len())].clone();
    let lag = rng.random_range(1..=5);
    Ok(RetrodictionFixture {
        seed,
        partition,
        dynamics,
        prior,
        observed,
        lag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic_and_bounded() {
        for seed in 0..50 {
            let a = random_two_time_fixture(seed, 24).unwrap();
            let b = random_two_time_fixture(seed, 24).unwrap();
            assert_eq!(a.epsilon0, b.epsilon0);
            assert_eq!(a.dynamics, b.dynamics);
            assert!(a.dynamics.cell_count() <= 24);
            assert!(a.problem().is_ok());

            let r = random_retrodiction_fixture(seed, 24).unwrap();
            assert_eq!(r.prior.len(), r.partition.len());
            assert!(r.partition.index_of(&r.observed).is_ok());
        }
        assert!(random_two_time_fixture(0, 1).is_err());
    }
}
