//! Invariant sweeps shared by the `verify` command and the test suites.

use crate::cluster::{exact_center_probabilities, SupportGraph};
use crate::error::Result;
use crate::instance::{is_metric, Instance};
use crate::lp::Relaxation;
use crate::portfolio::{best_of, brute_force_opt, Portfolio};
use crate::primal_dual::myz;
use crate::rounding::gamma_zero;
use crate::scalar::Scalar;
use crate::sparsen::{check_main_lemma, sparsen, SparsenedSolution};

use super::generate::{gen_euclidean, gen_two_level};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// Neighbor pairs `(j, j')`, `j != j'`, of a sparsened solution.
pub fn neighbor_pairs<T: Scalar>(sparsened: &SparsenedSolution<T>) -> Vec<(usize, usize)> {
    let graph = SupportGraph::from_sparsened(sparsened);
    (0..graph.num_clients())
        .flat_map(|j| graph.neighbors(j).iter().map(move |&jp| (j, jp)))
        .collect()
}

/// Main-lemma violations among all neighbor pairs: `(pairs checked, failures)`.
pub fn lemma2_sweep<T: Scalar>(
    instance: &Instance<T>,
    relaxation: &Relaxation<T>,
    gamma: T,
) -> Result<(usize, Vec<(usize, usize)>)> {
    let sp = sparsen(instance, relaxation, gamma)?;
    let pairs = neighbor_pairs(&sp);
    let mut failures = Vec::new();
    for &(j, jp) in &pairs {
        if !check_main_lemma(instance, &sp, j, jp)? {
            failures.push((j, jp));
        }
    }
    Ok((pairs.len(), failures))
}

/// Largest `|P[j][j'] - P[j'][j]|` of the exact center distribution.
pub fn lemma8_asymmetry(graph: &SupportGraph) -> Result<f64> {
    let p: Vec<Vec<f64>> = exact_center_probabilities(graph)?;
    let n = p.len();
    let mut worst = 0.0f64;
    for j in 0..n {
        for jp in 0..n {
            worst = worst.max((p[j][jp] - p[jp][j]).abs());
        }
    }
    Ok(worst)
}

/// Costs on one oracle-sized instance: `lp <= opt <= every heuristic`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sandwich {
    pub lp: f64,
    pub opt: f64,
    pub heuristics: Vec<(String, f64)>,
}

impl Sandwich {
    /// Holds up to a relative float slack `rel`.
    pub fn holds(&self, rel: f64) -> bool {
        let slack = |x: f64| rel * x.abs().max(1.0);
        self.lp <= self.opt + slack(self.opt)
            && self.heuristics.iter().all(|(_, c)| self.opt <= c + slack(*c))
    }
}

pub fn sandwich<T: Scalar>(instance: &Instance<T>, seed: u64) -> Result<Sandwich> {
    let relaxation = Relaxation::solve(instance)?;
    let opt = brute_force_opt(instance)?.total().as_f64();
    let portfolio = Portfolio::new(instance)?;
    let mut heuristics = vec![
        ("jms".to_string(), portfolio.jms.total().as_f64()),
        ("myz(1.504)".to_string(), myz(instance, 1.504)?.total().as_f64()),
        ("myz(1.1)".to_string(), myz(instance, 1.1)?.total().as_f64()),
        ("best-of".to_string(), best_of(instance, 10, seed)?.total().as_f64()),
    ];
    for t in 0..5 {
        let s = seed.wrapping_add(t);
        heuristics.push((format!("a1(seed={s})"), portfolio.plan.round(instance, s)?.total().as_f64()));
        heuristics.push((format!("a2(seed={s})"), portfolio.a2(instance, s)?.total().as_f64()));
    }
    Ok(Sandwich { lp: relaxation.objective().as_f64(), opt, heuristics })
}

/// Sizes for [`run_verify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub instances: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { instances: 10, seed: 2024 }
    }
}

/// Metric check, main-lemma sweep, sparsening invariants, Lemma 8 symmetry
/// and the oracle sandwich on a small generated suite.
pub fn run_verify(options: VerifyOptions) -> Result<Vec<CheckResult>> {
    let g0 = gamma_zero(1e-12);
    let gammas = [1.1, 1.5, g0, 1.9];
    let suite: Vec<Instance<f64>> = (0..options.instances as u64)
        .map(|k| {
            let seed = options.seed.wrapping_add(k);
            if k % 2 == 0 {
                gen_euclidean(8, 10, (0.2, 1.5), seed)
            } else {
                gen_two_level(8, 10, 3, (1.0, 3.0), seed)
            }
        })
        .collect::<Result<_>>()?;
    let mut checks = Vec::new();

    let non_metric = suite.iter().filter(|i| !is_metric(*i)).count();
    checks.push(CheckResult {
        name: "metric".into(),
        passed: non_metric == 0,
        detail: format!("{non_metric} of {} generated instances violate the triangle inequality", suite.len()),
    });

    let (mut pairs, mut violations, mut broken) = (0, 0, Vec::new());
    let mut graphs = Vec::new();
    for (k, inst) in suite.iter().enumerate() {
        let relaxation = Relaxation::solve(inst)?;
        for &g in &gammas {
            let (p, f) = lemma2_sweep(inst, &relaxation, g)?;
            pairs += p;
            violations += f.len();
            let sp = sparsen(inst, &relaxation, g)?;
            if let Err(e) = sp.check_invariants(inst) {
                broken.push(format!("instance {k}, gamma {g:.5}: {e}"));
            }
            if g == g0 {
                graphs.push(SupportGraph::from_sparsened(&sp));
            }
        }
    }
    checks.push(CheckResult {
        name: "main lemma".into(),
        passed: violations == 0,
        detail: format!("{violations} violations over {pairs} neighbor pairs"),
    });
    checks.push(CheckResult {
        name: "sparsening invariants".into(),
        passed: broken.is_empty(),
        detail: if broken.is_empty() {
            format!("{} sparsenings consistent", suite.len() * gammas.len())
        } else {
            broken.join("; ")
        },
    });

    let worst = graphs.iter().map(lemma8_asymmetry).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    checks.push(CheckResult {
        name: "center symmetry".into(),
        passed: worst <= 1e-12,
        detail: format!("max |P[j][j'] - P[j'][j]| = {worst:e} over {} graphs", graphs.len()),
    });

    let mut failed = Vec::new();
    for (k, inst) in suite.iter().enumerate() {
        let s = sandwich(inst, options.seed)?;
        if !s.holds(1e-9) {
            failed.push(format!("instance {k}: lp {} opt {}", s.lp, s.opt));
        }
    }
    checks.push(CheckResult {
        name: "oracle sandwich".into(),
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("lp <= opt <= heuristics on {} instances", suite.len())
        } else {
            failed.join("; ")
        },
    });

    let tiny = brute_force_opt(&crate::portfolio::tiny1::<f64>())?;
    checks.push(CheckResult {
        name: "tiny fixture".into(),
        passed: tiny.total() == 4.0 && tiny.open_set == [0, 2],
        detail: format!("optimum {} with open set {:?}", tiny.total(), tiny.open_set),
    });
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_verify_passes() {
        let checks = run_verify(VerifyOptions { instances: 3, seed: 5 }).unwrap();
        for c in &checks {
            assert!(c.passed, "{c}");
        }
        assert_eq!(checks.len(), 6);
    }

    #[test]
    fn sandwich_detects_inversion() {
        let s = Sandwich { lp: 5.0, opt: 4.0, heuristics: vec![] };
        assert!(!s.holds(1e-9));
    }
}
