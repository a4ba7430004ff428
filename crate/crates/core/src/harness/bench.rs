//! Benchmark grid runner and CSV report.
//!
//! A config names instance sources and algorithm cells; every (instance,
//! algorithm) cell runs concurrently and the rows are sorted by
//! `(instance, algo, params)` before emission. Randomized cells run `trials`
//! seeds: the cost columns describe trial 0 and `mean`/`stddev` summarize all
//! trials. `wall_ms` is recorded only when `timing` is set, so default output
//! is byte-identical across runs.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, IntegralSolution};
use crate::lp::Relaxation;
use crate::portfolio::{best_of, brute_force_opt, Portfolio};
use crate::primal_dual::{jms, myz};
use crate::rounding::{gamma_zero, trial_rng, A1Plan, ClusteringStrategy};

use super::formats::{read_instance, InstanceFormat};
use super::generate::{gen_euclidean, gen_regular, gen_two_level};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "UFL_THREADS";

/// Column order of the CSV report.
pub const CSV_HEADER: &str =
    "instance,algo,params,seed,facility_cost,connection_cost,total,lp_obj,ratio_lp,ratio_opt,trials,mean,stddev,wall_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceSource {
    Euclidean {
        name: String,
        m: usize,
        n: usize,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default = "default_cost_range")]
        cost_range: (f64, f64),
    },
    Regular {
        name: String,
        m: usize,
        n: usize,
        #[serde(default = "default_count")]
        count: usize,
    },
    TwoLevel {
        name: String,
        m: usize,
        n: usize,
        #[serde(default = "default_degree")]
        degree: usize,
        #[serde(default = "default_cost_range")]
        cost_range: (f64, f64),
        #[serde(default = "default_count")]
        count: usize,
    },
    File {
        name: String,
        path: PathBuf,
        #[serde(default = "default_format")]
        format: String,
    },
}

fn default_count() -> usize {
    1
}

fn default_cost_range() -> (f64, f64) {
    (0.5, 2.0)
}

fn default_degree() -> usize {
    3
}

fn default_format() -> String {
    "orlib".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "kebab-case")]
pub enum AlgorithmSpec {
    A1 {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default = "default_trials")]
        trials: usize,
    },
    Jms,
    Myz {
        delta: f64,
    },
    A2 {
        #[serde(default = "default_trials")]
        trials: usize,
    },
    BestOf {
        #[serde(default = "default_trials")]
        trials: usize,
    },
    Exact,
}

fn default_trials() -> usize {
    1
}

impl AlgorithmSpec {
    fn name(&self) -> &'static str {
        match self {
            Self::A1 { .. } => "a1",
            Self::Jms => "jms",
            Self::Myz { .. } => "myz",
            Self::A2 { .. } => "a2",
            Self::BestOf { .. } => "best-of",
            Self::Exact => "exact",
        }
    }

    fn params(&self) -> String {
        match self {
            Self::A1 { gamma, trials } => {
                format!("gamma={};trials={trials}", gamma.unwrap_or_else(|| gamma_zero(1e-12)))
            }
            Self::Myz { delta } => format!("delta={delta}"),
            Self::A2 { trials } => format!("trials={trials}"),
            Self::BestOf { trials } => format!("a1_trials={trials}"),
            Self::Jms | Self::Exact => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    pub instances: Vec<InstanceSource>,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Run the exact oracle for `ratio_opt` when `m` is at most this.
    #[serde(default = "default_oracle_limit")]
    pub oracle_max_facilities: usize,
    #[serde(default)]
    pub timing: bool,
}

fn default_oracle_limit() -> usize {
    12
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub algo: String,
    pub params: String,
    pub seed: u64,
    pub facility_cost: f64,
    pub connection_cost: f64,
    pub total: f64,
    pub lp_obj: f64,
    pub ratio_lp: f64,
    pub ratio_opt: Option<f64>,
    pub trials: usize,
    pub mean: f64,
    pub stddev: f64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

struct Prepared {
    name: String,
    instance: Instance<f64>,
    lp: f64,
    opt: Option<f64>,
}

fn load_instances(config: &BenchConfig) -> Result<Vec<(String, Instance<f64>)>> {
    let mut out = Vec::new();
    for (s, source) in config.instances.iter().enumerate() {
        let seed_for = |k: usize| {
            use rand::RngCore;
            trial_rng(config.seed, ((s as u64) << 32) | k as u64).next_u64()
        };
        match source {
            InstanceSource::Euclidean { name, m, n, count, cost_range } => {
                for k in 0..*count {
                    out.push((label(name, k, *count), gen_euclidean(*m, *n, *cost_range, seed_for(k))?));
                }
            }
            InstanceSource::Regular { name, m, n, count } => {
                for k in 0..*count {
                    out.push((label(name, k, *count), gen_regular(*m, *n, seed_for(k))?));
                }
            }
            InstanceSource::TwoLevel { name, m, n, degree, cost_range, count } => {
                for k in 0..*count {
                    let inst = gen_two_level(*m, *n, *degree, *cost_range, seed_for(k))?;
                    out.push((label(name, k, *count), inst));
                }
            }
            InstanceSource::File { name, path, format } => {
                let format: InstanceFormat = format.parse()?;
                out.push((name.clone(), read_instance(path, format)?));
            }
        }
    }
    Ok(out)
}

fn label(name: &str, k: usize, count: usize) -> String {
    if count == 1 {
        name.to_string()
    } else {
        format!("{name}-{k:03}")
    }
}

/// Runs the grid on a pool capped by `UFL_THREADS` when set.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .map_err(|_| Error::InvalidParameter(format!("{THREADS_ENV}={v} is not a count")))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    pool.install(|| run_grid(config))
}

fn run_grid(config: &BenchConfig) -> Result<BenchReport> {
    use rayon::prelude::*;

    let prepared: Vec<Prepared> = load_instances(config)?
        .into_par_iter()
        .map(|(name, instance)| {
            let lp = Relaxation::solve(&instance)?.objective();
            let opt = if instance.num_facilities() <= config.oracle_max_facilities {
                Some(brute_force_opt(&instance)?.total())
            } else {
                None
            };
            Ok(Prepared { name, instance, lp, opt })
        })
        .collect::<Result<_>>()?;
    let cells: Vec<(&Prepared, &AlgorithmSpec)> = prepared
        .iter()
        .flat_map(|p| config.algorithms.iter().map(move |a| (p, a)))
        .collect();
    let mut rows: Vec<BenchRow> = cells
        .into_par_iter()
        .map(|(p, algo)| run_cell(p, algo, config))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| (&a.instance, &a.algo, &a.params).cmp(&(&b.instance, &b.algo, &b.params)));
    Ok(BenchReport { rows })
}

fn run_cell(p: &Prepared, algo: &AlgorithmSpec, config: &BenchConfig) -> Result<BenchRow> {
    let start = Instant::now();
    let inst = &p.instance;
    let seed = config.seed;
    let runs: Vec<IntegralSolution<f64>> = match algo {
        AlgorithmSpec::A1 { gamma, trials } => {
            let g = gamma.unwrap_or_else(|| gamma_zero(1e-12));
            if !(g > 1.0 && g < 2.0) {
                return Err(Error::GammaOutOfRange(g));
            }
            let plan = A1Plan::new(inst, g, ClusteringStrategy::Greedy)?;
            (0..trials_at_least_one(*trials)?)
                .map(|t| plan.round_with(inst, &mut trial_rng(seed, t as u64)))
                .collect::<Result<_>>()?
        }
        AlgorithmSpec::A2 { trials } => {
            let portfolio = Portfolio::new(inst)?;
            (0..trials_at_least_one(*trials)?)
                .map(|t| portfolio.a2(inst, seed.wrapping_add(t as u64)))
                .collect::<Result<_>>()?
        }
        AlgorithmSpec::Jms => vec![jms(inst)?],
        AlgorithmSpec::Myz { delta } => vec![myz(inst, *delta)?],
        AlgorithmSpec::BestOf { trials } => vec![best_of(inst, trials_at_least_one(*trials)?, seed)?],
        AlgorithmSpec::Exact => vec![brute_force_opt(inst)?],
    };
    let totals: Vec<f64> = runs.iter().map(IntegralSolution::total).collect();
    let count = totals.len() as f64;
    let mean = totals.iter().sum::<f64>() / count;
    let stddev = if totals.len() > 1 {
        (totals.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (count - 1.0)).sqrt()
    } else {
        0.0
    };
    let first = &runs[0];
    let total = first.total();
    Ok(BenchRow {
        instance: p.name.clone(),
        algo: algo.name().to_string(),
        params: algo.params(),
        seed,
        facility_cost: first.facility_cost,
        connection_cost: first.connection_cost,
        total,
        lp_obj: p.lp,
        ratio_lp: total / p.lp,
        ratio_opt: p.opt.map(|o| total / o),
        trials: runs.len(),
        mean,
        stddev,
        wall_ms: if config.timing { start.elapsed().as_millis() as u64 } else { 0 },
    })
}

fn trials_at_least_one(trials: usize) -> Result<usize> {
    if trials == 0 {
        Err(Error::InvalidParameter("trials must be at least 1".into()))
    } else {
        Ok(trials)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = r#"{
        "seed": 11,
        "instances": [
            {"kind": "euclidean", "name": "euc", "m": 5, "n": 8, "count": 2},
            {"kind": "regular", "name": "reg", "m": 4, "n": 6},
            {"kind": "two-level", "name": "two", "m": 6, "n": 9}
        ],
        "algorithms": [
            {"algo": "a1", "trials": 5},
            {"algo": "jms"},
            {"algo": "myz", "delta": 1.504},
            {"algo": "a2", "trials": 5},
            {"algo": "best-of", "trials": 3},
            {"algo": "exact"}
        ]
    }"#;

    #[test]
    fn csv_is_deterministic_and_sorted() {
        let config = BenchConfig::from_json(CONFIG).unwrap();
        let report = run_bench(&config).unwrap();
        assert_eq!(report.rows.len(), 24);
        let csv = report.to_csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv, run_bench(&config).unwrap().to_csv().unwrap());
        for row in &report.rows {
            assert!(row.ratio_lp >= 1.0 - 1e-9, "{row:?}");
            assert_eq!(row.total, row.facility_cost + row.connection_cost);
            assert!(row.ratio_opt.unwrap() >= 1.0 - 1e-9);
        }
        let keys: Vec<_> = report.rows.iter().map(|r| (&r.instance, &r.algo)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(BenchConfig::from_json("{}"), Err(Error::Json(_))));
        let zero = r#"{"instances":[{"kind":"regular","name":"r","m":2,"n":2}],"algorithms":[{"algo":"a2","trials":0}]}"#;
        assert!(run_bench(&BenchConfig::from_json(zero).unwrap()).is_err());
    }
}
