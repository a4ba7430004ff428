//! The hybrid 1.5-approximation, a best-of combiner and an exact oracle.

use std::cmp::Ordering;

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{nearest_assignment, Instance, IntegralSolution};
use crate::primal_dual::{jms, myz, BifactorBound};
use crate::rounding::{gamma_zero, trial_rng, A1Plan, ClusteringStrategy};
use crate::scalar::Scalar;

/// Probability with which A2 runs JMS instead of A1(γ₀).
pub const A2_JMS_PROBABILITY: f64 = 0.313;

/// Scaling parameter of the MYZ run inside [`best_of`].
pub const BEST_OF_MYZ_DELTA: f64 = 1.504;

/// Largest facility count accepted by [`brute_force_opt`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Expected bifactor of A2: the `0.313 / 0.687` mix of JMS and A1(γ₀).
pub fn a2_bound() -> BifactorBound {
    BifactorBound::JMS.mix(A2_JMS_PROBABILITY, BifactorBound::a1(gamma_zero(1e-12)))
}

/// The four-point line fixture: facilities at `0, 1, 2` with opening costs
/// `1, 3, 1`, clients at `0.25, 0.75, 1.25, 1.75`. Optimum `4.0`, open `{0, 2}`.
pub fn tiny1<T: Scalar>() -> Instance<T> {
    let fpos = [0.0, 1.0, 2.0];
    let cpos = [0.25, 0.75, 1.25, 1.75];
    let rows = fpos
        .iter()
        .map(|p: &f64| cpos.iter().map(|q: &f64| T::of((p - q).abs())).collect())
        .collect();
    Instance::new(vec![T::one(), T::of(3.0), T::one()], rows).expect("valid fixture")
}

/// JMS and the A1(γ₀) plan, prepared once for repeated randomized runs.
#[derive(Debug, Clone)]
pub struct Portfolio<T> {
    pub jms: IntegralSolution<T>,
    pub plan: A1Plan<T>,
}

impl<T: Scalar> Portfolio<T> {
    pub fn new(instance: &Instance<T>) -> Result<Self> {
        Ok(Self {
            jms: jms(instance)?,
            plan: A1Plan::new(instance, T::of(gamma_zero(1e-12)), ClusteringStrategy::Greedy)?,
        })
    }

    /// One draw of A2: JMS with probability 0.313, else A1(γ₀) on a seed
    /// derived from the same stream.
    pub fn a2(&self, instance: &Instance<T>, seed: u64) -> Result<IntegralSolution<T>> {
        let mut rng = trial_rng(seed, 0);
        if rng.gen::<f64>() < A2_JMS_PROBABILITY {
            Ok(self.jms.clone())
        } else {
            self.plan.round(instance, rng.next_u64())
        }
    }
}

pub fn a2_randomized<T: Scalar>(instance: &Instance<T>, seed: u64) -> Result<IntegralSolution<T>> {
    Portfolio::new(instance)?.a2(instance, seed)
}

/// Cheapest of JMS, MYZ(1.504) and `a1_trials` roundings of A1(γ₀) (trial
/// `t` uses stream `t` of `base_seed`, `t = 1..=a1_trials`). Ties keep the
/// earliest candidate in that order.
pub fn best_of<T: Scalar>(
    instance: &Instance<T>,
    a1_trials: usize,
    base_seed: u64,
) -> Result<IntegralSolution<T>> {
    if a1_trials == 0 {
        return Err(Error::InvalidParameter("best-of needs at least one A1 trial".into()));
    }
    let plan = A1Plan::new(instance, T::of(gamma_zero(1e-12)), ClusteringStrategy::Greedy)?;
    let rounded: Vec<IntegralSolution<T>> = (1..=a1_trials as u64)
        .into_par_iter()
        .map(|t| plan.round_with(instance, &mut trial_rng(base_seed, t)))
        .collect::<Result<_>>()?;
    let mut best = jms(instance)?;
    for candidate in std::iter::once(myz(instance, BEST_OF_MYZ_DELTA)?).chain(rounded) {
        if candidate.total() < best.total() {
            best = candidate;
        }
    }
    Ok(best)
}

/// Exact optimum by enumerating every nonempty open set; among equal costs the
/// lexicographically smallest set wins.
pub fn brute_force_opt<T: Scalar>(instance: &Instance<T>) -> Result<IntegralSolution<T>> {
    let m = instance.num_facilities();
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { what: "facility count", size: m, limit: BRUTE_FORCE_LIMIT });
    }
    // Fan out over the inclusion pattern of the first few facilities.
    let split = m.min(4);
    let best = (0u32..1 << split)
        .into_par_iter()
        .filter_map(|prefix| {
            let mut search = Search::new(instance);
            for i in 0..split {
                if prefix & (1 << i) != 0 {
                    search.include(i);
                }
            }
            search.descend(split);
            search.best
        })
        .reduce_with(better)
        .expect("at least one nonempty set");
    nearest_assignment(instance, &best.1)
}

fn better<T: Scalar>(a: (T, Vec<usize>), b: (T, Vec<usize>)) -> (T, Vec<usize>) {
    match a.0.partial_cmp(&b.0).expect("finite costs") {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

struct Search<'a, T> {
    instance: &'a Instance<T>,
    chosen: Vec<usize>,
    opening: T,
    nearest: Vec<T>,
    best: Option<(T, Vec<usize>)>,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(instance: &'a Instance<T>) -> Self {
        Self {
            instance,
            chosen: Vec::new(),
            opening: T::zero(),
            nearest: vec![T::infinity(); instance.num_clients()],
            best: None,
        }
    }

    fn include(&mut self, i: usize) -> Vec<T> {
        let saved = self.nearest.clone();
        self.chosen.push(i);
        self.opening = self.opening + self.instance.facility_cost(i);
        for (j, d) in self.nearest.iter_mut().enumerate() {
            *d = d.min(self.instance.cost(i, j));
        }
        saved
    }

    fn descend(&mut self, i: usize) {
        if i == self.instance.num_facilities() {
            if !self.chosen.is_empty() {
                let total = self.opening + self.nearest.iter().copied().sum::<T>();
                let candidate = (total, self.chosen.clone());
                self.best = Some(match self.best.take() {
                    None => candidate,
                    Some(best) => better(best, candidate),
                });
            }
            return;
        }
        let saved = self.include(i);
        self.descend(i + 1);
        self.chosen.pop();
        self.opening = self.opening - self.instance.facility_cost(i);
        self.nearest = saved;
        self.descend(i + 1);
    }
}
