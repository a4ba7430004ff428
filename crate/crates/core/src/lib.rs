//! Approximation algorithms for uncapacitated facility location.
//!
//! The pipeline solves the LP relaxation, sparsens it with a `γ`-scaled
//! reassignment, clusters the clients and rounds (algorithm A1). Alongside it
//! sit the JMS primal-dual algorithm, greedy augmentation with opening-cost
//! scaling (MYZ), the randomized 1.5-hybrid A2, a best-of combiner and an
//! exact enumeration oracle. Everything numeric is generic over [`Scalar`]
//! (`f32` or `f64`); the exact center probabilities also run over rationals.
//!
//! ```
//! use ufl_core::{a1, brute_force_opt, gamma_zero, tiny1, Instance64};
//!
//! let inst: Instance64 = tiny1();
//! let opt = brute_force_opt(&inst).unwrap();
//! assert_eq!(opt.total(), 4.0);
//! let sol = a1(&inst, gamma_zero(1e-9), 7).unwrap();
//! assert!(sol.total() >= opt.total());
//! ```

pub mod cluster;
pub mod error;
pub mod harness;
pub mod instance;
pub mod lp;
pub mod portfolio;
pub mod primal_dual;
pub mod rounding;
pub mod scalar;
pub mod simplex;
pub mod sparsen;

pub use cluster::{
    exact_center_probabilities, greedy_clustering, greedy_clustering_by_key, random_clustering, Clustering,
    SupportGraph,
};
pub use error::{Error, Result};
pub use instance::{is_metric, nearest_assignment, Instance, IntegralSolution};
pub use lp::{client_shares, solve_relaxation, ClientShares, DualSolution, FractionalSolution, Relaxation};
pub use portfolio::{a2_randomized, best_of, brute_force_opt, tiny1, Portfolio, A2_JMS_PROBABILITY};
pub use primal_dual::{greedy_augment, jms, myz, scaled, BifactorBound, Scaled, UflAlgorithm};
pub use rounding::{
    a1, gamma_zero, monte_carlo, round, trial_rng, A1Plan, ClusteringStrategy, RoundingDiagnostics,
};
pub use scalar::Scalar;
pub use sparsen::{check_main_lemma, sparsen, ClientStats, SparsenedSolution};

pub type Instance64 = Instance<f64>;
pub type Instance32 = Instance<f32>;
pub type Solution64 = IntegralSolution<f64>;
pub type Solution32 = IntegralSolution<f32>;
pub type Relaxation64 = Relaxation<f64>;
pub type Relaxation32 = Relaxation<f32>;
pub type Sparsened64 = SparsenedSolution<f64>;
pub type Sparsened32 = SparsenedSolution<f32>;
pub type Plan64 = A1Plan<f64>;
pub type Plan32 = A1Plan<f32>;
