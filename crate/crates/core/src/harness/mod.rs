//! Instance I/O, generators, the benchmark runner and verification sweeps.

pub mod bench;
pub mod formats;
pub mod generate;
pub mod verify;

pub use bench::{run_bench, AlgorithmSpec, BenchConfig, BenchReport, BenchRow, InstanceSource, CSV_HEADER};
pub use formats::{emit_json, emit_orlib, parse_json, parse_orlib, read_instance, InstanceFormat};
pub use generate::{gen_euclidean, gen_regular, gen_two_level};
pub use verify::{run_verify, CheckResult, VerifyOptions};
