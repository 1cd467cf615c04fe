//! Forward probabilities under the equal a priori density, and Bayesian
//! inference of past macrostates from a present observation.
//!
//! Posteriors are generic over [`Weight`] so the same code path serves both
//! floating-point inputs and exact rationals derived from the dynamics.

// `!(x > 0)` style checks are deliberate: NaN weights must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::Num;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_space::{MacrostatePartition, PermutationDynamics, RegionSet};
use crate::two_time::{exact_to_f64, Exact};

/// Numeric type usable for priors, likelihoods and posteriors.
pub trait Weight: Num + Clone + PartialOrd + Debug {
    fn from_exact(r: &Exact) -> Self;
    /// Whether `total` counts as a unit sum.
    fn is_unit(total: &Self) -> bool;
}

impl Weight for f64 {
    fn from_exact(r: &Exact) -> Self {
        exact_to_f64(r)
    }

    fn is_unit(total: &Self) -> bool {
        (total - 1.0).abs() <= 1e-12
    }
}

impl Weight for Exact {
    fn from_exact(r: &Exact) -> Self {
        *r
    }

    fn is_unit(total: &Self) -> bool {
        *total == Ratio::from_integer(1)
    }
}

/// P(A^j at t+lag | A^i at t) = μ(A^j ∩ φ^lag(A^i)) / μ(A^i).
pub fn forward_probability(
    a_i: &RegionSet,
    a_j: &RegionSet,
    lag: i64,
    dynamics: &PermutationDynamics,
) -> Result<Exact> {
    if lag <= 0 {
        return Err(Error::InvalidTimes(format!(
            "lag must be positive, got {lag}"
        )));
    }
    if a_i.is_empty() {
        return Err(Error::UndefinedDensity("the conditioning state"));
    }
    let image = dynamics.evolve(a_i, lag)?;
    Ok(Ratio::new(a_j.overlap(&image)?, a_i.measure()))
}

/// Hypotheses about the past with their prior and the likelihood of the
/// observed present state under each.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrodictionProblem<W> {
    hypotheses: Vec<String>,
    prior: Vec<W>,
    likelihoods: Vec<W>,
    observed: String,
}

impl<W: Weight> RetrodictionProblem<W> {
    pub fn new(
        hypotheses: Vec<String>,
        prior: Vec<W>,
        likelihoods: Vec<W>,
        observed: impl Into<String>,
    ) -> Result<Self> {
        let k = hypotheses.len();
        if k == 0 {
            return Err(Error::Domain("no hypotheses".into()));
        }
        for (what, v) in [("prior", &prior), ("likelihoods", &likelihoods)] {
            if v.len() != k {
                return Err(Error::LengthMismatch {
                    what,
                    found: v.len(),
                    expected: k,
                });
            }
        }
        if let Some(q) = prior.iter().find(|q| !(**q >= W::zero())) {
            return Err(Error::InvalidDistribution(format!(
                "prior entry {q:?} is negative"
            )));
        }
        let total = prior.iter().fold(W::zero(), |acc, q| acc + q.clone());
        if !W::is_unit(&total) {
            return Err(Error::InvalidDistribution(format!(
                "prior sums to {total:?}, not 1"
            )));
        }
        if let Some(l) = likelihoods
            .iter()
            .find(|l| !(**l >= W::zero() && **l <= W::one()))
        {
            return Err(Error::Domain(format!("likelihood {l:?} is outside [0,1]")));
        }
        Ok(Self {
            hypotheses,
            prior,
            likelihoods,
            observed: observed.into(),
        })
    }

    pub fn hypotheses(&self) -> &[String] {
        &self.hypotheses
    }

    pub fn prior(&self) -> &[W] {
        &self.prior
    }

    pub fn likelihoods(&self) -> &[W] {
        &self.likelihoods
    }

    pub fn observed(&self) -> &str {
        &self.observed
    }

    /// Unnormalised products P(A^i_s | A^k_t)·q^k.
    pub fn terms(&self) -> Vec<W> {
        self.likelihoods
            .iter()
            .zip(&self.prior)
            .map(|(l, q)| l.clone() * q.clone())
            .collect()
    }
}

/// Posterior over past hypotheses together with its normalisation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorReport<W> {
    pub hypotheses: Vec<String>,
    pub posterior: Vec<W>,
    pub normalization: W,
    pub terms: Vec<W>,
}

impl<W: Weight> PosteriorReport<W> {
    pub fn get(&self, hypothesis: &str) -> Option<&W> {
        self.hypotheses
            .iter()
            .position(|h| h == hypothesis)
            .map(|i| &self.posterior[i])
    }
}

impl PosteriorReport<Exact> {
    pub fn to_f64(&self) -> PosteriorReport<f64> {
        PosteriorReport {
            hypotheses: self.hypotheses.clone(),
            posterior: self.posterior.iter().map(exact_to_f64).collect(),
            normalization: exact_to_f64(&self.normalization),
            terms: self.terms.iter().map(exact_to_f64).collect(),
        }
    }
}

/// Normalises unnormalised terms into a posterior.
pub fn posterior_from_terms<W: Weight>(
    hypotheses: Vec<String>,
    terms: Vec<W>,
) -> Result<PosteriorReport<W>> {
    let normalization = terms.iter().fold(W::zero(), |acc, t| acc + t.clone());
    if !(normalization > W::zero()) {
        return Err(Error::ObservationImpossible);
    }
    let posterior = terms
        .iter()
        .map(|t| t.clone() / normalization.clone())
        .collect();
    Ok(PosteriorReport {
        hypotheses,
        posterior,
        normalization,
        terms,
    })
}

/// P(A^j_t | A^i_s) = P(A^i_s | A^j_t)·q^j / Σ_k P(A^i_s | A^k_t)·q^k.
pub fn backward_posterior<W: Weight>(
    problem: &RetrodictionProblem<W>,
) -> Result<PosteriorReport<W>> {
    posterior_from_terms(problem.hypotheses.clone(), problem.terms())
}

/// Retrodiction problem whose likelihood column comes from the dynamics:
/// one hypothesis per macrostate, observed `lag` steps later in `observed`.
pub fn dynamical_problem<W: Weight>(
    partition: &MacrostatePartition,
    dynamics: &PermutationDynamics,
    prior: Vec<W>,
    observed: &str,
    lag: i64,
) -> Result<RetrodictionProblem<W>> {
    let target = partition.block(observed)?;
    let likelihoods = partition
        .blocks()
        .iter()
        .map(|block| forward_probability(block, target, lag, dynamics).map(|r| W::from_exact(&r)))
        .collect::<Result<Vec<_>>>()?;
    RetrodictionProblem::new(partition.labels().to_vec(), prior, likelihoods, observed)
}

pub fn backward_posterior_dynamical<W: Weight>(
    partition: &MacrostatePartition,
    dynamics: &PermutationDynamics,
    prior: Vec<W>,
    observed: &str,
    lag: i64,
) -> Result<PosteriorReport<W>> {
    backward_posterior(&dynamical_problem(
        partition, dynamics, prior, observed, lag,
    )?)
}

/// Posteriors before and after adding Δm to each unnormalised term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Perturbation<W> {
    pub deltas: Vec<W>,
    pub before: PosteriorReport<W>,
    pub after: PosteriorReport<W>,
}

pub fn perturb_terms<W: Weight>(
    problem: &RetrodictionProblem<W>,
    deltas: &[W],
) -> Result<Perturbation<W>> {
    perturb_term_vector(problem.hypotheses.clone(), problem.terms(), deltas)
}

fn perturb_term_vector<W: Weight>(
    hypotheses: Vec<String>,
    terms: Vec<W>,
    deltas: &[W],
) -> Result<Perturbation<W>> {
    if deltas.len() != terms.len() {
        return Err(Error::LengthMismatch {
            what: "deltas",
            found: deltas.len(),
            expected: terms.len(),
        });
    }
    if let Some(d) = deltas.iter().find(|d| !(**d >= W::zero())) {
        return Err(Error::Domain(format!("perturbation {d:?} is negative")));
    }
    let raised = terms
        .iter()
        .zip(deltas)
        .map(|(t, d)| t.clone() + d.clone())
        .collect();
    let after = posterior_from_terms(hypotheses.clone(), raised)?;
    let before = posterior_from_terms(hypotheses, terms)?;
    Ok(Perturbation {
        deltas: deltas.to_vec(),
        before,
        after,
    })
}

/// Fire-alarm explaining-away model: independent fire and drill, and an
/// alarm that sounds iff at least one of them occurs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FireAlarmReport {
    pub prior_fire: f64,
    pub prior_drill: f64,
    /// P(fire | alarm).
    pub p_fire_given_alarm: f64,
    /// P(fire | alarm, no drill).
    pub p_fire_given_alarm_no_drill: f64,
    /// Rise in P(fire) once drill scenarios are ruled out.
    pub increase: f64,
    /// Joint-outcome view: before = drill ruled out, after = drill allowed.
    pub joint: Perturbation<f64>,
}

pub const FIRE_ALARM_HYPOTHESES: [&str; 4] = [
    "fire+drill",
    "fire+no_drill",
    "no_fire+drill",
    "no_fire+no_drill",
];

pub fn fire_alarm_demo(prior_fire: f64, prior_drill: f64) -> Result<FireAlarmReport> {
    for (name, x) in [("prior_fire", prior_fire), ("prior_drill", prior_drill)] {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("{name}={x} must lie in (0,1)")));
        }
    }
    let hypotheses: Vec<String> = FIRE_ALARM_HYPOTHESES
        .iter()
        .map(|h| h.to_string())
        .collect();
    let prior = vec![
        prior_fire * prior_drill,
        prior_fire * (1.0 - prior_drill),
        (1.0 - prior_fire) * prior_drill,
        (1.0 - prior_fire) * (1.0 - prior_drill),
    ];
    let alarm = vec![1.0, 1.0, 1.0, 0.0];
    let problem = RetrodictionProblem::new(hypotheses.clone(), prior, alarm, "alarm")?;
    let terms = problem.terms();

    // Ruling out the drill removes the drill terms; allowing it adds them
    // back, exactly like opening a second slit.
    let is_drill = [true, false, true, false];
    let no_drill: Vec<f64> = terms
        .iter()
        .zip(is_drill)
        .map(|(t, d)| if d { 0.0 } else { *t })
        .collect();
    let deltas: Vec<f64> = terms
        .iter()
        .zip(is_drill)
        .map(|(t, d)| if d { *t } else { 0.0 })
        .collect();
    let joint = perturb_term_vector(hypotheses, no_drill, &deltas)?;

    let fire = |r: &PosteriorReport<f64>| r.posterior[0] + r.posterior[1];
    let p_fire_given_alarm = fire(&joint.after);
    let p_fire_given_alarm_no_drill = fire(&joint.before);
    Ok(FireAlarmReport {
        prior_fire,
        prior_drill,
        p_fire_given_alarm,
        p_fire_given_alarm_no_drill,
        increase: p_fire_given_alarm_no_drill - p_fire_given_alarm,
        joint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::PhaseSpace;

    fn names(k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("H{i}")).collect()
    }

    fn r(n: u64, d: u64) -> Exact {
        Ratio::new(n, d)
    }

    #[test]
    fn forward_examples() {
        let space = PhaseSpace::new(6).unwrap();
        let a = space.region([0, 1]).unwrap();
        let id = PermutationDynamics::identity(6).unwrap();
        for lag in [1, 4, 9] {
            assert_eq!(forward_probability(&a, &a, lag, &id).unwrap(), r(1, 1));
        }
        let shift2 = PermutationDynamics::cyclic_shift(6, 2).unwrap();
        let b = space.region([2, 3]).unwrap();
        let c = space.region([4, 5]).unwrap();
        assert_eq!(forward_probability(&a, &b, 1, &shift2).unwrap(), r(1, 1));
        assert_eq!(forward_probability(&a, &c, 1, &shift2).unwrap(), r(0, 1));

        let err = forward_probability(&space.empty(), &b, 1, &shift2).unwrap_err();
        assert!(err.to_string().contains("undefined density"));
        assert!(forward_probability(&a, &b, 0, &shift2).is_err());
    }

    #[test]
    fn forward_sums_to_one_over_partition() {
        let space = PhaseSpace::new(12).unwrap();
        let partition = MacrostatePartition::equal_measure(space, 4).unwrap();
        let dyn_ = PermutationDynamics::random(3, 12).unwrap();
        let a = space.region([0, 5, 7, 11]).unwrap();
        let total = partition
            .blocks()
            .iter()
            .map(|b| forward_probability(&a, b, 3, &dyn_).unwrap())
            .fold(r(0, 1), |acc, x| acc + x);
        assert_eq!(total, r(1, 1));
    }

    #[test]
    fn backward_examples() {
        let p = RetrodictionProblem::new(names(2), vec![0.5, 0.5], vec![0.8, 0.4], "A").unwrap();
        let rep = backward_posterior(&p).unwrap();
        assert!((rep.posterior[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((rep.posterior[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((rep.normalization - 0.6).abs() < 1e-15);

        let p = RetrodictionProblem::new(names(2), vec![1.0, 0.0], vec![0.3, 0.9], "A").unwrap();
        assert_eq!(backward_posterior(&p).unwrap().posterior, vec![1.0, 0.0]);

        let p = RetrodictionProblem::new(names(4), vec![0.25; 4], vec![0.7; 4], "A").unwrap();
        assert_eq!(backward_posterior(&p).unwrap().posterior, vec![0.25; 4]);
    }

    #[test]
    fn impossible_observation() {
        let p = RetrodictionProblem::new(names(2), vec![0.5, 0.5], vec![0.0, 0.0], "A").unwrap();
        let err = backward_posterior(&p).unwrap_err();
        assert_eq!(err.to_string(), "observation impossible under hypotheses");
    }

    #[test]
    fn problem_validation() {
        assert!(RetrodictionProblem::new(names(2), vec![0.5, 0.6], vec![0.1, 0.1], "A").is_err());
        assert!(RetrodictionProblem::new(names(2), vec![1.5, -0.5], vec![0.1, 0.1], "A").is_err());
        assert!(RetrodictionProblem::new(names(2), vec![0.5, 0.5], vec![0.1, 1.1], "A").is_err());
        assert!(RetrodictionProblem::new(names(3), vec![0.5, 0.5], vec![0.1, 0.1], "A").is_err());
        assert!(RetrodictionProblem::<f64>::new(vec![], vec![], vec![], "A").is_err());
        assert!(RetrodictionProblem::new(
            names(2),
            vec![r(1, 3), r(1, 3)],
            vec![r(1, 2), r(1, 2)],
            "A"
        )
        .is_err());
    }

    #[test]
    fn dynamical_examples() {
        let space = PhaseSpace::new(6).unwrap();
        let partition = MacrostatePartition::equal_measure(space, 3).unwrap();
        let id = PermutationDynamics::identity(6).unwrap();
        let prior = vec![r(1, 5), r(3, 5), r(1, 5)];
        let rep = backward_posterior_dynamical(&partition, &id, prior, "D1", 2).unwrap();
        assert_eq!(rep.posterior, vec![r(1, 1), r(0, 1), r(0, 1)]);

        let shift = PermutationDynamics::cyclic_shift(6, 1).unwrap();
        let uniform = vec![r(1, 3); 3];
        let rep = backward_posterior_dynamical(&partition, &shift, uniform, "D2", 1).unwrap();
        assert_eq!(rep.terms, vec![r(1, 6), r(1, 6), r(0, 1)]);
        assert_eq!(rep.posterior, vec![r(1, 2), r(1, 2), r(0, 1)]);

        let float =
            backward_posterior_dynamical(&partition, &shift, vec![1.0 / 3.0; 3], "D2", 1).unwrap();
        assert!((float.posterior[0] - 0.5).abs() < 1e-15);
        assert!(
            backward_posterior_dynamical(&partition, &shift, vec![1.0 / 3.0; 3], "D7", 1).is_err()
        );
    }

    #[test]
    fn perturbation_examples() {
        // terms (0.4, 0.1) via likelihood 0.8, 0.2 under a uniform prior
        let p = RetrodictionProblem::new(names(2), vec![0.5, 0.5], vec![0.8, 0.2], "A").unwrap();
        let out = perturb_terms(&p, &[0.0, 0.3]).unwrap();
        assert!((out.before.posterior[0] - 0.8).abs() < 1e-15);
        assert!((out.after.posterior[0] - 0.5).abs() < 1e-15);

        let out = perturb_terms(&p, &[0.0, 0.0]).unwrap();
        assert_eq!(out.before, out.after);

        let out = perturb_terms(&p, &[0.1, 0.0]).unwrap();
        assert!((out.after.posterior[0] - 5.0 / 6.0).abs() < 1e-15);

        assert!(perturb_terms(&p, &[-0.1, 0.0]).is_err());
        assert!(perturb_terms(&p, &[0.1]).is_err());
    }

    #[test]
    fn perturbation_exact_rationals() {
        let p = RetrodictionProblem::new(
            names(2),
            vec![r(1, 2), r(1, 2)],
            vec![r(4, 5), r(1, 5)],
            "A",
        )
        .unwrap();
        let out = perturb_terms(&p, &[r(0, 1), r(3, 10)]).unwrap();
        assert_eq!(out.before.posterior[0], r(4, 5));
        assert_eq!(out.after.posterior[0], r(1, 2));
    }

    #[test]
    fn fire_alarm_examples() {
        let rep = fire_alarm_demo(0.01, 0.1).unwrap();
        assert!((rep.p_fire_given_alarm - 10.0 / 109.0).abs() < 1e-12);
        assert_eq!(rep.p_fire_given_alarm_no_drill, 1.0);
        assert!(rep.increase > 0.9);

        let rep = fire_alarm_demo(0.5, 0.5).unwrap();
        assert!((rep.p_fire_given_alarm - 2.0 / 3.0).abs() < 1e-12);

        let rep = fire_alarm_demo(0.3, 1e-12).unwrap();
        assert!((rep.p_fire_given_alarm - 1.0).abs() < 1e-9);

        assert!(fire_alarm_demo(0.0, 0.5).is_err());
        assert!(fire_alarm_demo(0.5, 1.0).is_err());
    }
}
