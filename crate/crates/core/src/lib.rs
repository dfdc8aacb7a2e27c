//! Decentralized stochastic non-convex optimization over time-varying
//! directed networks.
//!
//! The crate simulates `n` agents that each own a local objective `f_i` and
//! cooperate to find a stationary point of `f = (1/n) Σ f_i` while talking
//! over a directed graph that changes every round. The main method is
//! Push-ASGD: push-sum de-biasing of the local models, a momentum-hybrid
//! (STORM-style) local gradient estimator, and gradient tracking over a
//! column-stochastic mixing matrix. Push-SGD is provided as a baseline.
//!
//! Module map:
//!
//! - [`graph`]: directed graphs, column-stochastic mixing matrices and
//!   time-varying topology schedules.
//! - [`oracle`]: local objectives and replayable stochastic first-order
//!   oracles.
//! - [`algo`]: the synchronous-round state machine.
//! - [`diagnostics`]: consensus and estimator error instrumentation,
//!   including the φ-weighted consensus norm.
//! - [`runner`]: multi-seed experiments, presets, aggregation and the rate
//!   probe.
//! - [`config`], [`output`], [`selftest`]: configuration documents, trace
//!   emission and the bundled invariant suites used by the CLI.

pub mod algo;
pub mod config;
pub mod diagnostics;
pub mod graph;
pub mod oracle;
pub mod output;
pub mod rng;
pub mod runner;
pub mod selftest;

pub use algo::{AlgoConfig, AlgoError, SwarmState, Variant};
pub use config::{parse_config, parse_config_file, ConfigError};
pub use diagnostics::{DiagnosticsRecorder, DiagnosticsReport, ProbeRow};
pub use graph::{DirectedGraph, GraphError, MixingMatrix, TopologySchedule};
pub use oracle::{Objective, OracleError, StochasticOracle};
pub use runner::{ExperimentConfig, RunTrace};

use thiserror::Error;

/// Top-level error, grouping the per-module failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Algo(#[from] AlgoError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Diagnostics(#[from] diagnostics::DiagnosticsError),
    #[error(transparent)]
    Runner(#[from] runner::RunnerError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
