//! Algorithm A1(γ): cluster-guided randomized rounding of the sparsened LP.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cluster::{greedy_clustering, random_clustering_with, Clustering, SupportGraph};
use crate::error::{Error, Result};
use crate::instance::{nearest_assignment, Instance, IntegralSolution};
use crate::lp::Relaxation;
use crate::scalar::Scalar;
use crate::sparsen::{sparsen, SparsenedSolution};

/// Residual of `1/e + e^{-γ} = (γ-1)(1 - 1/e + e^{-γ})`; strictly decreasing on `[1, 2]`.
pub fn gamma_zero_residual(gamma: f64) -> f64 {
    let inv_e = (-1.0f64).exp();
    let tail = (-gamma).exp();
    inv_e + tail - (gamma - 1.0) * (1.0 - inv_e + tail)
}

/// Root `γ₀ ≈ 1.67736` of [`gamma_zero_residual`], by bisection on `[1, 2]`.
pub fn gamma_zero(tol: f64) -> f64 {
    assert!(tol > 0.0, "tolerance must be positive");
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        let r = gamma_zero_residual(mid);
        if r.abs() <= tol || hi - lo <= f64::EPSILON * 4.0 {
            return mid;
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// The independent RNG stream `stream` under `seed`.
///
/// Trial `t` of a Monte Carlo run under `base_seed` uses stream `t`, so
/// stream `0` reproduces the single-shot call with the same seed.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How cluster centers are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusteringStrategy {
    /// Minimize `D_av^C + D_max^C` (deterministic).
    #[default]
    Greedy,
    /// Uniform center choice, redrawn in every rounding.
    Random,
}

/// Copies opened in one rounding, before mapping back to facilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenedCopies {
    pub opened: Vec<bool>,
    pub clustering: Option<Clustering>,
}

#[derive(Debug, Clone)]
enum Centers<T> {
    Fixed {
        clustering: Clustering,
        draws: Vec<Vec<(usize, T)>>,
        independent: Vec<(usize, T)>,
    },
    Random(SupportGraph),
}

/// Everything A1 computes once per instance; each rounding only samples.
#[derive(Debug, Clone)]
pub struct A1Plan<T> {
    pub relaxation: Relaxation<T>,
    pub sparsened: SparsenedSolution<T>,
    centers: Centers<T>,
}

impl<T: Scalar> A1Plan<T> {
    pub fn new(instance: &Instance<T>, gamma: T, strategy: ClusteringStrategy) -> Result<Self> {
        let relaxation = Relaxation::solve(instance)?;
        Self::from_relaxation(instance, relaxation, gamma, strategy)
    }

    pub fn from_relaxation(
        instance: &Instance<T>,
        relaxation: Relaxation<T>,
        gamma: T,
        strategy: ClusteringStrategy,
    ) -> Result<Self> {
        let sparsened = sparsen(instance, &relaxation, gamma)?;
        let centers = match strategy {
            ClusteringStrategy::Greedy => {
                let clustering = greedy_clustering(&sparsened);
                let (draws, independent) = sampling_tables(&sparsened, &clustering);
                Centers::Fixed { clustering, draws, independent }
            }
            ClusteringStrategy::Random => Centers::Random(SupportGraph::from_sparsened(&sparsened)),
        };
        Ok(Self { relaxation, sparsened, centers })
    }

    /// The clustering when it is fixed (greedy strategy).
    pub fn clustering(&self) -> Option<&Clustering> {
        match &self.centers {
            Centers::Fixed { clustering, .. } => Some(clustering),
            Centers::Random(_) => None,
        }
    }

    /// Samples which split copies open.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> OpenedCopies {
        match &self.centers {
            Centers::Fixed { draws, independent, .. } => OpenedCopies {
                opened: sample_openings(self.sparsened.facilities.len(), draws, independent, rng),
                clustering: None,
            },
            Centers::Random(graph) => {
                let clustering = random_clustering_with(graph, rng);
                let (draws, independent) = sampling_tables(&self.sparsened, &clustering);
                OpenedCopies {
                    opened: sample_openings(self.sparsened.facilities.len(), &draws, &independent, rng),
                    clustering: Some(clustering),
                }
            }
        }
    }

    pub fn connect(&self, instance: &Instance<T>, opened: &[bool]) -> Result<IntegralSolution<T>> {
        connect_copies(instance, &self.sparsened, opened)
    }

    pub fn round_with<R: Rng>(&self, instance: &Instance<T>, rng: &mut R) -> Result<IntegralSolution<T>> {
        let copies = self.sample(rng);
        self.connect(instance, &copies.opened)
    }

    pub fn round(&self, instance: &Instance<T>, seed: u64) -> Result<IntegralSolution<T>> {
        self.round_with(instance, &mut trial_rng(seed, 0))
    }
}

type SamplingTables<T> = (Vec<Vec<(usize, T)>>, Vec<(usize, T)>);

/// Cumulative close-copy tables per center, and the copies opened independently.
fn sampling_tables<T: Scalar>(sparsened: &SparsenedSolution<T>, clustering: &Clustering) -> SamplingTables<T> {
    let mut owned = vec![false; sparsened.facilities.len()];
    let draws = clustering
        .centers
        .iter()
        .map(|&c| {
            let mut acc = T::zero();
            sparsened
                .close_set(c)
                .iter()
                .map(|&k| {
                    owned[k] = true;
                    acc = acc + sparsened.facilities[k].opening;
                    (k, acc)
                })
                .collect()
        })
        .collect();
    let independent = sparsened
        .facilities
        .iter()
        .enumerate()
        .filter(|&(k, _)| !owned[k])
        .map(|(k, f)| (k, f.opening.min(T::one())))
        .collect();
    (draws, independent)
}

/// One copy per center, drawn proportionally to its close openings; all other
/// copies open independently with probability `min(ȳ, 1)`.
pub fn sample_openings<T: Scalar, R: Rng>(
    copies: usize,
    draws: &[Vec<(usize, T)>],
    independent: &[(usize, T)],
    rng: &mut R,
) -> Vec<bool> {
    let mut opened = vec![false; copies];
    for table in draws {
        let Some(&(last, total)) = table.last() else { continue };
        let u = T::of(rng.gen::<f64>()) * total;
        let pick = table.iter().find(|&&(_, cum)| u < cum).map_or(last, |&(k, _)| k);
        opened[pick] = true;
    }
    for &(k, p) in independent {
        if T::of(rng.gen::<f64>()) < p {
            opened[k] = true;
        }
    }
    opened
}

/// Rounds a sparsened solution under a fixed clustering.
pub fn round<T: Scalar>(
    instance: &Instance<T>,
    sparsened: &SparsenedSolution<T>,
    clustering: &Clustering,
    seed: u64,
) -> Result<IntegralSolution<T>> {
    let (draws, independent) = sampling_tables(sparsened, clustering);
    let mut rng = trial_rng(seed, 0);
    let opened = sample_openings(sparsened.facilities.len(), &draws, &independent, &mut rng);
    connect_copies(instance, sparsened, &opened)
}

/// Opens the facilities behind the opened copies (each once) and connects
/// every client to its nearest one.
pub fn connect_copies<T: Scalar>(
    instance: &Instance<T>,
    sparsened: &SparsenedSolution<T>,
    opened: &[bool],
) -> Result<IntegralSolution<T>> {
    let mut open: Vec<usize> = opened
        .iter()
        .zip(&sparsened.facilities)
        .filter(|(&o, _)| o)
        .map(|(_, f)| f.original_index)
        .collect();
    open.sort_unstable();
    open.dedup();
    nearest_assignment(instance, &open)
}

/// Full A1(γ) pipeline with the greedy clustering.
pub fn a1<T: Scalar>(instance: &Instance<T>, gamma: T, seed: u64) -> Result<IntegralSolution<T>> {
    check_gamma(gamma)?;
    A1Plan::new(instance, gamma, ClusteringStrategy::Greedy)?.round(instance, seed)
}

fn check_gamma<T: Scalar>(gamma: T) -> Result<()> {
    if gamma > T::one() && gamma < T::of(2.0) {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma.as_f64()))
    }
}

/// Which facility subset of a client a conditional statistic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacilitySet {
    Close,
    Distant,
}

/// Empirical `E[min_{i ∈ A open} c_ij | some i ∈ A open]` next to `d(j, A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDistance {
    pub client: usize,
    pub set: FacilitySet,
    pub average_distance: f64,
    /// Trials in which some copy of the set opened.
    pub hits: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl ConditionalDistance {
    /// `mean <= d(j, A) + sigmas * std_error` (vacuous without hits).
    pub fn within(&self, sigmas: f64, slack: f64) -> bool {
        self.hits == 0 || self.mean <= self.average_distance + sigmas * self.std_error + slack
    }
}

/// Monte Carlo summary of repeated A1 roundings on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingDiagnostics {
    pub trials: usize,
    pub mean_facility_cost: f64,
    pub mean_connection_cost: f64,
    pub mean_total: f64,
    pub std_facility_cost: f64,
    pub std_connection_cost: f64,
    pub std_total: f64,
    /// Per client: some close copy opened.
    pub p_close: Vec<f64>,
    /// Per client: no close copy, some distant copy opened.
    pub p_distant: Vec<f64>,
    /// Per client: neither.
    pub p_none: Vec<f64>,
    /// `γ F*`.
    pub bound_facility: f64,
    /// `(1 + 2e^{-γ}) C*`.
    pub bound_connection: f64,
    pub conditional: Vec<ConditionalDistance>,
    /// Trials in which some center had two close copies open (always 0).
    pub exclusivity_violations: usize,
}

impl RoundingDiagnostics {
    pub fn std_error_total(&self) -> f64 {
        self.std_total / (self.trials as f64).sqrt()
    }

    pub fn std_error_facility(&self) -> f64 {
        self.std_facility_cost / (self.trials as f64).sqrt()
    }

    pub fn bound_total(&self) -> f64 {
        self.bound_facility + self.bound_connection
    }

    pub fn mean_p_close(&self) -> f64 {
        mean(&self.p_close)
    }

    pub fn mean_p_distant(&self) -> f64 {
        mean(&self.p_distant)
    }

    pub fn mean_p_none(&self) -> f64 {
        mean(&self.p_none)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

struct TrialRecord {
    facility_cost: f64,
    connection_cost: f64,
    /// Per client: 0 close, 1 distant, 2 none.
    category: Vec<u8>,
    nearest_close: Vec<Option<f64>>,
    nearest_distant: Vec<Option<f64>>,
    violation: bool,
}

/// Runs `trials` roundings of A1(γ) over one shared LP, sparsening and
/// clustering. Trials execute in parallel; aggregation is sequential in trial
/// order, so the result depends only on the arguments.
pub fn monte_carlo<T: Scalar>(
    instance: &Instance<T>,
    gamma: T,
    trials: usize,
    base_seed: u64,
) -> Result<RoundingDiagnostics> {
    check_gamma(gamma)?;
    let plan = A1Plan::new(instance, gamma, ClusteringStrategy::Greedy)?;
    monte_carlo_with_plan(instance, &plan, trials, base_seed)
}

pub fn monte_carlo_with_plan<T: Scalar>(
    instance: &Instance<T>,
    plan: &A1Plan<T>,
    trials: usize,
    base_seed: u64,
) -> Result<RoundingDiagnostics> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let sp = &plan.sparsened;
    let n = instance.num_clients();
    let records: Vec<TrialRecord> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(base_seed, t);
            let copies = plan.sample(&mut rng);
            let sol = plan.connect(instance, &copies.opened)?;
            let clustering = copies.clustering.as_ref().or(plan.clustering()).expect("clustering");
            let violation = clustering
                .centers
                .iter()
                .any(|&c| sp.close_set(c).iter().filter(|&&k| copies.opened[k]).count() > 1);
            let nearest = |j: usize, set: &[usize]| {
                set.iter()
                    .filter(|&&k| copies.opened[k])
                    .map(|&k| instance.cost(sp.facilities[k].original_index, j).as_f64())
                    .reduce(f64::min)
            };
            let nearest_close: Vec<_> = (0..n).map(|j| nearest(j, sp.close_set(j))).collect();
            let nearest_distant: Vec<_> = (0..n).map(|j| nearest(j, sp.distant_set(j))).collect();
            let category = (0..n)
                .map(|j| match (nearest_close[j], nearest_distant[j]) {
                    (Some(_), _) => 0,
                    (None, Some(_)) => 1,
                    (None, None) => 2,
                })
                .collect();
            Ok(TrialRecord {
                facility_cost: sol.facility_cost.as_f64(),
                connection_cost: sol.connection_cost.as_f64(),
                category,
                nearest_close,
                nearest_distant,
                violation,
            })
        })
        .collect::<Result<_>>()?;

    let count = trials as f64;
    let moments = |values: &mut dyn Iterator<Item = f64>| {
        let (mut s, mut s2) = (0.0, 0.0);
        for v in values {
            s += v;
            s2 += v * v;
        }
        let mean = s / count;
        let var = if trials > 1 { ((s2 - count * mean * mean) / (count - 1.0)).max(0.0) } else { 0.0 };
        (mean, var.sqrt())
    };
    let (mean_f, std_f) = moments(&mut records.iter().map(|r| r.facility_cost));
    let (mean_c, std_c) = moments(&mut records.iter().map(|r| r.connection_cost));
    let (mean_t, std_t) = moments(&mut records.iter().map(|r| r.facility_cost + r.connection_cost));

    let mut tallies = vec![[0usize; 3]; n];
    for r in &records {
        for (j, &c) in r.category.iter().enumerate() {
            tallies[j][c as usize] += 1;
        }
    }
    let share = |c: usize| tallies.iter().map(|t| t[c] as f64 / count).collect::<Vec<_>>();

    let mut conditional = Vec::with_capacity(2 * n);
    for j in 0..n {
        for set in [FacilitySet::Close, FacilitySet::Distant] {
            let copies = match set {
                FacilitySet::Close => sp.close_set(j),
                FacilitySet::Distant => sp.distant_set(j),
            };
            let Some(avg) = sp.average_distance(instance, j, copies) else { continue };
            let hits: Vec<f64> = records
                .iter()
                .filter_map(|r| match set {
                    FacilitySet::Close => r.nearest_close[j],
                    FacilitySet::Distant => r.nearest_distant[j],
                })
                .collect();
            let h = hits.len() as f64;
            let (mean, std_error) = if hits.is_empty() {
                (0.0, 0.0)
            } else {
                let m = hits.iter().sum::<f64>() / h;
                let var = if hits.len() > 1 {
                    hits.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (h - 1.0)
                } else {
                    0.0
                };
                (m, (var / h).sqrt())
            };
            conditional.push(ConditionalDistance {
                client: j,
                set,
                average_distance: avg.as_f64(),
                hits: hits.len(),
                mean,
                std_error,
            });
        }
    }

    let gamma = sp.gamma.as_f64();
    let shares = &plan.relaxation.shares;
    Ok(RoundingDiagnostics {
        trials,
        mean_facility_cost: mean_f,
        mean_connection_cost: mean_c,
        mean_total: mean_t,
        std_facility_cost: std_f,
        std_connection_cost: std_c,
        std_total: std_t,
        p_close: share(0),
        p_distant: share(1),
        p_none: share(2),
        bound_facility: gamma * shares.total_facility.as_f64(),
        bound_connection: (1.0 + 2.0 * (-gamma).exp()) * shares.total_connection.as_f64(),
        conditional,
        exclusivity_violations: records.iter().filter(|r| r.violation).count(),
    })
}
