//! Multi-seed experiments: configuration types, named presets, the worker
//! pool, quantile aggregation and the step-size rate probe.
//!
//! Seed fan-out: for the seed at position `k` of `ExperimentConfig::seeds`
//! with value `s`, the oracle seed is `rng::derive(s, [k])`. It does not
//! depend on the algorithm, so every algorithm in a sweep sees the same
//! noise realisation for a given seed (common random numbers), and a single
//! cell of a sweep is reproduced by running one algorithm with one seed.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algo::{self, AlgoConfig, AlgoError, SwarmState, Variant};
use crate::diagnostics::{DiagnosticsRecorder, DiagnosticsReport, ProbeRow};
use crate::graph::{
    complete, directed_ring, er_directed, reversed_ring, GraphError, ScheduleMode,
    TopologySchedule,
};
use crate::oracle::{
    load_csv_path, make_pl_sine, partition_dataset, to_binary_labels, two_class_gaussian, AScheme,
    Objective, OracleError, QuadraticObjective, RegLogisticObjective, StochasticOracle,
};
use crate::rng;

/// Default step size for every variant.
pub const DEFAULT_ALPHA: f64 = 6e-5;
/// Default momentum weight.
pub const DEFAULT_BETA: f64 = 0.015;

/// Step sizes searched when tuning the `pl-sine` preset.
pub const PL_SINE_ALPHA_GRID: [f64; 3] = [1e-3, 2e-3, 3e-3];
/// Momentum weights searched when tuning the `pl-sine` preset.
pub const PL_SINE_BETA_GRID: [f64; 4] = [1e-3, 3e-3, 1e-2, 3e-2];

pub const PRESET_NAMES: [&str; 2] = ["pl-sine", "logistic"];

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("invalid experiment: {}", .0.iter().map(|(f, m)| format!("{f}: {m}")).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<(String, String)>),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Algo(#[from] AlgoError),
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("no traces to aggregate")]
    NoTraces,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveKind {
    PlSine {
        sigma: f64,
        a_scheme: AScheme,
    },
    /// Non-convex regularized logistic regression. Without `data`, a
    /// label-sorted two-class Gaussian set of `samples_per_node · n` points
    /// in `dim` dimensions is generated.
    Logistic {
        lambda: f64,
        samples_per_node: usize,
        dim: usize,
        separation: f64,
        data: Option<PathBuf>,
        positive_class: f64,
    },
    Quadratic {
        dim: usize,
        sigma: f64,
    },
}

impl ObjectiveKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::PlSine { .. } => "pl-sine",
            ObjectiveKind::Logistic { .. } => "logistic",
            ObjectiveKind::Quadratic { .. } => "quadratic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    /// Every coordinate of the common starting model.
    pub x0: f64,
    /// Seeds random objective construction (coefficients, datasets).
    pub seed: u64,
    /// Whether both gradient evaluations of a momentum update share one
    /// noise draw.
    pub shared_noise: bool,
}

impl ObjectiveSpec {
    pub fn build(&self, n: usize) -> Result<Objective, OracleError> {
        let mut r = rng::derived_stream(self.seed, &[rng::TAG_OBJECTIVE]);
        Ok(match &self.kind {
            ObjectiveKind::PlSine { sigma, a_scheme } => {
                Objective::PlSine(make_pl_sine(n, *sigma, *a_scheme, &mut r)?)
            }
            ObjectiveKind::Logistic {
                lambda,
                samples_per_node,
                dim,
                separation,
                data,
                positive_class,
            } => {
                let points = match data {
                    Some(path) => to_binary_labels(load_csv_path(path)?, *positive_class),
                    None => two_class_gaussian(samples_per_node * n, *dim, *separation, &mut r),
                };
                Objective::RegLogistic(RegLogisticObjective::new(
                    partition_dataset(points, n)?,
                    *lambda,
                )?)
            }
            ObjectiveKind::Quadratic { dim, sigma } => {
                Objective::Quadratic(QuadraticObjective::random(n, *dim, *sigma, &mut r)?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyMode {
    /// One Erdős–Rényi draw, the directed ring and the reversed ring in
    /// turn.
    Cyclic,
    Static,
    ErRandom,
}

impl TopologyMode {
    pub fn name(self) -> &'static str {
        match self {
            TopologyMode::Cyclic => "cyclic",
            TopologyMode::Static => "static",
            TopologyMode::ErRandom => "er-random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Ring,
    ReversedRing,
    Complete,
    Er,
}

impl GraphKind {
    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Ring => "ring",
            GraphKind::ReversedRing => "reversed-ring",
            GraphKind::Complete => "complete",
            GraphKind::Er => "er",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologySpec {
    pub mode: TopologyMode,
    /// Graph of the static mode.
    pub graph: GraphKind,
    pub n: usize,
    pub p: f64,
    pub seed: u64,
}

impl TopologySpec {
    pub fn build(&self) -> Result<TopologySchedule, GraphError> {
        match self.mode {
            TopologyMode::Cyclic => TopologySchedule::er_ring_cycle(self.n, self.p, self.seed),
            TopologyMode::ErRandom => {
                TopologySchedule::new(self.n, self.seed, ScheduleMode::ErRandom { p: self.p })
            }
            TopologyMode::Static => {
                let g = match self.graph {
                    GraphKind::Ring => directed_ring(self.n)?,
                    GraphKind::ReversedRing => reversed_ring(self.n)?,
                    GraphKind::Complete => complete(self.n)?,
                    GraphKind::Er => er_directed(
                        self.n,
                        self.p,
                        &mut rng::derived_stream(self.seed, &[rng::TAG_TOPOLOGY]),
                    )?,
                };
                TopologySchedule::new(self.n, self.seed, ScheduleMode::Static(g))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub variant: Variant,
    pub alpha: f64,
    pub beta: f64,
    pub batch: usize,
    pub iterations: usize,
}

impl AlgorithmSpec {
    pub fn new(variant: Variant, iterations: usize) -> Self {
        Self {
            variant,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            batch: 1,
            iterations,
        }
    }

    pub fn algo_config(&self, x0: Vec<f64>) -> AlgoConfig {
        AlgoConfig::new(self.variant, self.alpha, self.beta, self.iterations)
            .with_batch(self.batch)
            .with_x0(x0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub topology: TopologySpec,
    pub algorithms: Vec<AlgorithmSpec>,
    pub seeds: Vec<u64>,
    pub probe_stride: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            objective: ObjectiveSpec {
                kind: ObjectiveKind::PlSine {
                    sigma: 0.5,
                    a_scheme: AScheme::Linear,
                },
                x0: 0.0,
                seed: 0,
                shared_noise: true,
            },
            topology: TopologySpec {
                mode: TopologyMode::Cyclic,
                graph: GraphKind::Ring,
                n: 100,
                p: 0.1,
                seed: 0,
            },
            algorithms: vec![AlgorithmSpec::new(Variant::PushAsgd, 1000)],
            seeds: vec![0],
            probe_stride: 10,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Range and consistency checks, every problem reported with its field
    /// path.
    pub fn validate(&self) -> Result<(), RunnerError> {
        let mut issues = Vec::new();
        let mut bad = |field: &str, msg: String| issues.push((field.to_string(), msg));

        match &self.objective.kind {
            ObjectiveKind::PlSine { sigma, .. } | ObjectiveKind::Quadratic { sigma, .. } => {
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    bad("objective.sigma", format!("must be finite and >= 0, got {sigma}"));
                }
            }
            ObjectiveKind::Logistic { .. } => {}
        }
        match &self.objective.kind {
            ObjectiveKind::Logistic {
                lambda,
                samples_per_node,
                dim,
                separation,
                data,
                ..
            } => {
                if !(*lambda >= 0.0 && lambda.is_finite()) {
                    bad("objective.lambda", format!("must be finite and >= 0, got {lambda}"));
                }
                if data.is_none() {
                    if *samples_per_node == 0 {
                        bad("objective.samples_per_node", "must be at least 1".into());
                    }
                    if *dim == 0 {
                        bad("objective.dim", "must be at least 1".into());
                    }
                    if !separation.is_finite() {
                        bad("objective.separation", format!("must be finite, got {separation}"));
                    }
                }
            }
            ObjectiveKind::Quadratic { dim, .. } if *dim == 0 => {
                bad("objective.dim", "must be at least 1".into());
            }
            _ => {}
        }
        if !self.objective.x0.is_finite() {
            bad("objective.x0", format!("must be finite, got {}", self.objective.x0));
        }

        let topo = &self.topology;
        if topo.n < 2 {
            bad("topology.n", format!("must be at least 2, got {}", topo.n));
        }
        let needs_p = matches!(topo.mode, TopologyMode::Cyclic | TopologyMode::ErRandom)
            || topo.graph == GraphKind::Er;
        if needs_p && !(topo.p > 0.0 && topo.p <= 1.0) {
            bad("topology.p", format!("must lie in (0, 1], got {}", topo.p));
        }

        if self.algorithms.is_empty() {
            bad("algorithms", "at least one algorithm is required".into());
        }
        for (k, a) in self.algorithms.iter().enumerate() {
            if !(a.alpha >= 0.0 && a.alpha.is_finite()) {
                bad(&format!("algorithms.{k}.alpha"), format!("must be finite and >= 0, got {}", a.alpha));
            }
            if !(0.0..=1.0).contains(&a.beta) {
                bad(&format!("algorithms.{k}.beta"), format!("must lie in [0, 1], got {}", a.beta));
            }
            if a.batch == 0 {
                bad(&format!("algorithms.{k}.batch"), "must be at least 1".into());
            }
        }
        if self.seeds.is_empty() {
            bad("seeds", "at least one seed is required".into());
        }
        if self.probe_stride == 0 {
            bad("probe_stride", "must be at least 1".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(RunnerError::Invalid(issues))
        }
    }

    /// FNV-1a 64 of the canonical JSON form; the output directory does not
    /// take part.
    pub fn fingerprint(&self) -> u64 {
        rng::fnv1a64(crate::config::canonical_json(self).as_bytes())
    }

    /// Fingerprint of one algorithm of the sweep: the experiment's canonical
    /// form together with the algorithm's position and settings.
    pub fn run_fingerprint(&self, algorithm: usize) -> u64 {
        let text = format!(
            "{}|{algorithm}|{}",
            crate::config::canonical_json(self),
            serde_json::to_string(&self.algorithms[algorithm]).expect("serializable"),
        );
        rng::fnv1a64(text.as_bytes())
    }
}

/// The oracle seed of seed slot `index` holding `seed`.
pub fn oracle_seed(seed: u64, index: usize) -> u64 {
    rng::derive(seed, &[index as u64])
}

/// Named experiment presets.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    match name {
        // PL sine problem on 100 nodes with the switching ER/ring topology.
        // Step sizes are the best cell of the preset grid; the start is
        // moved away from the minimizer so there is a transient to observe.
        "pl-sine" => Some(ExperimentConfig {
            objective: ObjectiveSpec {
                kind: ObjectiveKind::PlSine {
                    sigma: 0.5,
                    a_scheme: AScheme::Linear,
                },
                x0: 5.0,
                seed: 0,
                shared_noise: true,
            },
            topology: TopologySpec {
                mode: TopologyMode::Cyclic,
                graph: GraphKind::Ring,
                n: 100,
                p: 0.1,
                seed: 7,
            },
            algorithms: [Variant::PushAsgd, Variant::PushSgd]
                .into_iter()
                .map(|v| AlgorithmSpec {
                    alpha: 2e-3,
                    beta: 3e-3,
                    ..AlgorithmSpec::new(v, 5000)
                })
                .collect(),
            seeds: (1..=20).collect(),
            probe_stride: 10,
            output_dir: None,
        }),
        // Regularized logistic regression over a label-sorted synthetic
        // two-class set, one block of samples per node.
        "logistic" => Some(ExperimentConfig {
            objective: ObjectiveSpec {
                kind: ObjectiveKind::Logistic {
                    lambda: 1e-4,
                    samples_per_node: 12,
                    dim: 20,
                    separation: 2.0,
                    data: None,
                    positive_class: 1.0,
                },
                x0: 0.0,
                seed: 0,
                shared_noise: true,
            },
            topology: TopologySpec {
                mode: TopologyMode::Cyclic,
                graph: GraphKind::Ring,
                n: 100,
                p: 0.1,
                seed: 7,
            },
            algorithms: [Variant::PushAsgd, Variant::PushSgd]
                .into_iter()
                .map(|v| AlgorithmSpec::new(v, 3000))
                .collect(),
            seeds: (1..=5).collect(),
            probe_stride: 50,
            output_dir: None,
        }),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub wall_clock_secs: f64,
}

/// One (algorithm, seed) cell of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm_index: usize,
    pub variant: Variant,
    pub seed_index: usize,
    pub seed: u64,
    /// [`ExperimentConfig::run_fingerprint`] of the algorithm.
    pub fingerprint: u64,
    pub experiment_fingerprint: u64,
    pub report: DiagnosticsReport,
    /// Set when the run stopped on numerical divergence.
    pub divergence: Option<String>,
    pub meta: RunMeta,
}

impl RunTrace {
    pub fn rows(&self) -> &[ProbeRow] {
        &self.report.rows
    }

    pub fn final_row(&self) -> Option<&ProbeRow> {
        self.report.rows.last()
    }
}

/// Runs one cell. Divergence is not an error here; it is returned alongside
/// the partial report.
pub fn run_cell(
    objective: &Objective,
    schedule: &TopologySchedule,
    spec: &ObjectiveSpec,
    algorithm: &AlgorithmSpec,
    oracle_seed: u64,
    probe_stride: usize,
) -> Result<(DiagnosticsReport, Option<String>), RunnerError> {
    let oracle = StochasticOracle::new(objective, oracle_seed).with_shared_noise(spec.shared_noise);
    let config = algorithm.algo_config(vec![spec.x0; objective.dim()]);
    let mut recorder = DiagnosticsRecorder::new(objective, probe_stride, algorithm.iterations);
    let divergence = match algo::run(&oracle, &config, schedule, &mut recorder) {
        Ok(_) => None,
        Err(e @ AlgoError::Diverged { .. }) => Some(e.to_string()),
        Err(e) => return Err(e.into()),
    };
    Ok((recorder.finish(schedule), divergence))
}

/// Runs `f` over `0..jobs` on at most `workers` scoped threads and returns
/// the results in job order.
fn parallel_map<T, F>(jobs: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.clamp(1, jobs.max(1));
    if workers == 1 {
        return (0..jobs).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..jobs).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let job = next.fetch_add(1, Ordering::Relaxed);
                if job >= jobs {
                    break;
                }
                let out = f(job);
                slots.lock().expect("worker panicked")[job] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|o| o.expect("every job ran"))
        .collect()
}

/// One trace per (algorithm, seed) pair, algorithm-major. Results do not
/// depend on `workers`.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<Vec<RunTrace>, RunnerError> {
    config.validate()?;
    let objective = config.objective.build(config.topology.n)?;
    let schedule = config.topology.build()?;
    let experiment_fingerprint = config.fingerprint();
    let n_seeds = config.seeds.len();
    let jobs = config.algorithms.len() * n_seeds;

    let results = parallel_map(jobs, workers, |job| {
        let (a, k) = (job / n_seeds, job % n_seeds);
        let algorithm = &config.algorithms[a];
        let seed = config.seeds[k];
        let start = Instant::now();
        let (report, divergence) = run_cell(
            &objective,
            &schedule,
            &config.objective,
            algorithm,
            oracle_seed(seed, k),
            config.probe_stride,
        )?;
        Ok(RunTrace {
            algorithm_index: a,
            variant: algorithm.variant,
            seed_index: k,
            seed,
            fingerprint: config.run_fingerprint(a),
            experiment_fingerprint,
            report,
            divergence,
            meta: RunMeta {
                wall_clock_secs: start.elapsed().as_secs_f64(),
            },
        })
    });
    results.into_iter().collect()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub t: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    /// Number of traces contributing at this probe point.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileCurve {
    pub algorithm_index: usize,
    pub variant: Variant,
    pub points: Vec<QuantilePoint>,
}

/// Per-algorithm quantile curves of `metric` across seeds, on the probe
/// points of the longest trace. Probe points where no trace has a value
/// are dropped.
pub fn aggregate(traces: &[RunTrace], metric: &str) -> Result<Vec<QuantileCurve>, RunnerError> {
    if !ProbeRow::COLUMNS.contains(&metric) {
        return Err(RunnerError::UnknownMetric(metric.to_string()));
    }
    if traces.is_empty() {
        return Err(RunnerError::NoTraces);
    }
    let mut groups: Vec<(usize, Variant, Vec<&RunTrace>)> = Vec::new();
    for tr in traces {
        match groups.iter_mut().find(|g| g.0 == tr.algorithm_index) {
            Some(g) => g.2.push(tr),
            None => groups.push((tr.algorithm_index, tr.variant, vec![tr])),
        }
    }
    groups.sort_by_key(|g| g.0);
    Ok(groups
        .into_iter()
        .map(|(algorithm_index, variant, members)| {
            let longest = members
                .iter()
                .max_by_key(|t| t.rows().len())
                .expect("non-empty group");
            let points = longest
                .rows()
                .iter()
                .filter_map(|row| {
                    let mut values: Vec<f64> = members
                        .iter()
                        .filter_map(|tr| {
                            let r = tr.rows().binary_search_by_key(&row.t, |r| r.t).ok()?;
                            tr.rows()[r].metric(metric).flatten()
                        })
                        .collect();
                    if values.is_empty() {
                        return None;
                    }
                    values.sort_by(f64::total_cmp);
                    Some(QuantilePoint {
                        t: row.t,
                        median: quantile(&values, 0.5),
                        q25: quantile(&values, 0.25),
                        q75: quantile(&values, 0.75),
                        count: values.len(),
                    })
                })
                .collect();
            QuantileCurve {
                algorithm_index,
                variant,
                points,
            }
        })
        .collect())
}

/// Least-squares fit `y ≈ a + b x`; returns `(b, a, R²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateProbeConfig {
    pub objective: ObjectiveSpec,
    pub topology: TopologySpec,
    pub variant: Variant,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
    pub c_alpha: f64,
    pub c_beta: f64,
}

impl RateProbeConfig {
    /// PL sine problem on the `pl-sine` preset network and start.
    pub fn pl_sine(horizons: Vec<usize>, seeds: Vec<u64>) -> Self {
        let base = preset("pl-sine").expect("preset exists");
        Self {
            objective: base.objective,
            topology: base.topology,
            variant: Variant::PushAsgd,
            horizons,
            seeds,
            c_alpha: 0.5,
            c_beta: 1.0,
        }
    }

    /// `α = c_α n^{-1/2} T^{-1/3}`, `β = c_β T^{-2/3}`, `b = max(1, ⌈T^{1/3}/n⌉)`.
    pub fn schedule_for(&self, horizon: usize) -> AlgorithmSpec {
        let n = self.topology.n as f64;
        let t = horizon as f64;
        AlgorithmSpec {
            variant: self.variant,
            alpha: self.c_alpha / n.sqrt() * t.powf(-1.0 / 3.0),
            beta: (self.c_beta * t.powf(-2.0 / 3.0)).min(1.0),
            batch: ((t.cbrt() / n).ceil() as usize).max(1),
            iterations: horizon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub horizon: usize,
    pub alpha: f64,
    pub beta: f64,
    pub batch: usize,
    /// `(1/T) Σ_{t<T} ‖∇f(x̄_t)‖²` per seed, `None` for diverged runs.
    pub metrics: Vec<Option<f64>>,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateProbeReport {
    pub points: Vec<RatePoint>,
    /// Least-squares slope of `ln median` against `ln T`.
    pub slope: f64,
    pub warnings: Vec<String>,
}

pub fn rate_probe(config: &RateProbeConfig, workers: usize) -> Result<RateProbeReport, RunnerError> {
    let h = &config.horizons;
    if h.len() < 3 || h.windows(2).any(|w| w[0] >= w[1]) || h[0] == 0 {
        return Err(RunnerError::Invalid(vec![(
            "horizons".into(),
            "need at least 3 strictly increasing positive values".into(),
        )]));
    }
    if config.seeds.is_empty() {
        return Err(RunnerError::Invalid(vec![("seeds".into(), "at least one seed is required".into())]));
    }
    let objective = config.objective.build(config.topology.n)?;
    let schedule = config.topology.build()?;
    let n_seeds = config.seeds.len();

    let results = parallel_map(h.len() * n_seeds, workers, |job| {
        let (p, k) = (job / n_seeds, job % n_seeds);
        let spec = config.schedule_for(h[p]);
        let oracle = StochasticOracle::new(&objective, oracle_seed(config.seeds[k], k))
            .with_shared_noise(config.objective.shared_noise);
        let algo_config = spec.algo_config(vec![config.objective.x0; objective.dim()]);
        let mut sum = 0.0;
        let horizon = h[p];
        let outcome = algo::run(&oracle, &algo_config, &schedule, &mut |s: &SwarmState| {
            if s.t() < horizon {
                let g = objective.global_gradient(&s.x_bar()).expect("dimension fixed");
                sum += g.iter().map(|v| v * v).sum::<f64>();
            }
        });
        match outcome {
            Ok(_) => Ok(Some(sum / horizon as f64)),
            Err(AlgoError::Diverged { .. }) => Ok(None),
            Err(e) => Err(RunnerError::from(e)),
        }
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut warnings = Vec::new();
    let points: Vec<RatePoint> = h
        .iter()
        .enumerate()
        .map(|(p, &horizon)| {
            let spec = config.schedule_for(horizon);
            let metrics = results[p * n_seeds..(p + 1) * n_seeds].to_vec();
            let ok: Vec<f64> = metrics.iter().flatten().copied().collect();
            let diverged = n_seeds - ok.len();
            if diverged > 0 {
                warnings.push(format!(
                    "T={horizon}: {diverged} of {n_seeds} runs diverged at alpha={:e}; consider a smaller c_alpha",
                    spec.alpha
                ));
            }
            RatePoint {
                horizon,
                alpha: spec.alpha,
                beta: spec.beta,
                batch: spec.batch,
                median: if ok.is_empty() { f64::NAN } else { median(&ok) },
                metrics,
            }
        })
        .collect();
    let usable: Vec<&RatePoint> = points.iter().filter(|p| p.median > 0.0).collect();
    let slope = if usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|p| (p.horizon as f64).ln()).collect();
        let ys: Vec<f64> = usable.iter().map(|p| p.median.ln()).collect();
        linear_fit(&xs, &ys).0
    } else {
        warnings.push("fewer than two horizons with a usable median; slope undefined".into());
        f64::NAN
    };
    Ok(RateProbeReport {
        points,
        slope,
        warnings,
    })
}
