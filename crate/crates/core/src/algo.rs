//! Synchronous-round state machine for Push-ASGD and the Push-SGD baseline.
//!
//! One Push-ASGD round, with `W` the column-stochastic mixing matrix of the
//! round and every right-hand side read from the pre-round state:
//!
//! ```text
//! x⁺_i = Σ_j w_ij (x_j − α g_j)
//! y⁺_i = Σ_j w_ij y_j,            z⁺_i = x⁺_i / y⁺_i
//! v⁺_i = ∇f_i(z⁺_i; ξ_i) + (1 − β)(v_i − ∇f_i(z_i; ξ_i))
//! g⁺_i = Σ_j w_ij (g_j + v⁺_j − v_j)
//! ```
//!
//! Push-SGD drops `v` and `g` and descends along `∇f_i(z_i; ξ_i)` directly.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{MixingMatrix, TopologySchedule};
use crate::oracle::{Draw, OracleError, StochasticOracle};

/// Entries beyond this magnitude abort the run.
pub const DIVERGENCE_BOUND: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgoError {
    #[error("invalid algorithm configuration: {0}")]
    InvalidConfig(String),
    #[error("mixing matrix is {got}x{got}, swarm has {expected} nodes")]
    SizeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("numerical divergence at iteration {iteration}: {detail}")]
    Diverged { iteration: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Momentum-hybrid estimator with gradient tracking, `β ∈ (0, 1)`.
    PushAsgd,
    /// Push-sum SGD without tracking or momentum.
    PushSgd,
    /// Push-ASGD with `β = 1`: tracking of plain stochastic gradients.
    GtSgd,
    /// Push-ASGD with `β = 0`: SARAH-type recursive estimator.
    GtSarah,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::PushAsgd,
        Variant::PushSgd,
        Variant::GtSgd,
        Variant::GtSarah,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::PushAsgd => "push-asgd",
            Variant::PushSgd => "push-sgd",
            Variant::GtSgd => "gt-sgd",
            Variant::GtSarah => "gt-sarah",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    /// Whether the variant carries an estimator `v` and a tracker `g`.
    pub fn tracks_gradient(self) -> bool {
        !matches!(self, Variant::PushSgd)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoConfig {
    pub variant: Variant,
    pub alpha: f64,
    /// Ignored by `gt-sgd`, `gt-sarah` and `push-sgd`.
    pub beta: f64,
    pub init_batch: usize,
    pub iterations: usize,
    /// Common starting model; zero when unset.
    pub x0: Option<Vec<f64>>,
}

impl AlgoConfig {
    pub fn new(variant: Variant, alpha: f64, beta: f64, iterations: usize) -> Self {
        Self {
            variant,
            alpha,
            beta,
            init_batch: 1,
            iterations,
            x0: None,
        }
    }

    pub fn with_batch(mut self, b: usize) -> Self {
        self.init_batch = b;
        self
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    /// The momentum weight actually used by the variant.
    pub fn effective_beta(&self) -> f64 {
        match self.variant {
            Variant::GtSgd => 1.0,
            Variant::GtSarah => 0.0,
            _ => self.beta,
        }
    }

    /// `α = 0` is admitted (pure push-sum averaging).
    pub fn validate(&self) -> Result<(), AlgoError> {
        let mut problems = Vec::new();
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            problems.push(format!("alpha must be finite and >= 0, got {}", self.alpha));
        }
        let beta = self.effective_beta();
        if !(0.0..=1.0).contains(&beta) {
            problems.push(format!("beta must lie in [0, 1], got {beta}"));
        }
        if self.init_batch == 0 {
            problems.push("init batch must be at least 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(AlgoError::InvalidConfig(problems.join("; ")))
        }
    }
}

/// Read-only view of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState<'a> {
    pub x: &'a [f64],
    pub y: f64,
    pub z: &'a [f64],
    /// Empty for push-sgd.
    pub v: &'a [f64],
    /// Empty for push-sgd.
    pub g: &'a [f64],
}

/// Stacked per-node state; every matrix is row-major `n × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    n: usize,
    d: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    v: Vec<f64>,
    g: Vec<f64>,
    t: usize,
    sfo: u64,
    tracking: bool,
}

impl SwarmState {
    /// Every node starts at `config.x0` (zero by default), `y = 1`, and for
    /// tracking variants `g_0 = v_0 =` the mean of `b` stochastic gradients.
    pub fn init(oracle: &StochasticOracle<'_>, config: &AlgoConfig) -> Result<Self, AlgoError> {
        let obj = oracle.objective();
        let (n, d) = (obj.n(), obj.dim());
        let x0 = match &config.x0 {
            Some(x0) if x0.len() != d => {
                return Err(AlgoError::InvalidConfig(format!(
                    "x0 has dimension {}, objective has {d}",
                    x0.len()
                )))
            }
            Some(x0) => x0.clone(),
            None => vec![0.0; d],
        };
        let points: Vec<f64> = (0..n).flat_map(|_| x0.iter().copied()).collect();
        Self::init_with_points(oracle, config, points)
    }

    /// Like [`SwarmState::init`] but with a per-node starting model, given as
    /// a row-major `n × d` matrix.
    pub fn init_with_points(
        oracle: &StochasticOracle<'_>,
        config: &AlgoConfig,
        points: Vec<f64>,
    ) -> Result<Self, AlgoError> {
        config.validate()?;
        let obj = oracle.objective();
        let (n, d) = (obj.n(), obj.dim());
        if points.len() != n * d {
            return Err(AlgoError::InvalidConfig(format!(
                "initial points hold {} values, expected {}",
                points.len(),
                n * d
            )));
        }
        let tracking = config.variant.tracks_gradient();
        let mut state = Self {
            n,
            d,
            z: points.clone(),
            x: points,
            y: vec![1.0; n],
            v: Vec::new(),
            g: Vec::new(),
            t: 0,
            sfo: 0,
            tracking,
        };
        if tracking {
            let b = config.init_batch;
            let mut g = vec![0.0; n * d];
            let mut buf = vec![0.0; d];
            for i in 0..n {
                let zi = &state.z[i * d..(i + 1) * d];
                let gi = &mut g[i * d..(i + 1) * d];
                for r in 0..b {
                    oracle.init_gradient_into(i, r, zi, &mut buf)?;
                    gi.iter_mut().zip(&buf).for_each(|(a, s)| *a += s);
                }
                gi.iter_mut().for_each(|a| *a /= b as f64);
            }
            state.v = g.clone();
            state.g = g;
            state.sfo = (n * b) as u64;
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of completed rounds.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Cumulative stochastic-gradient queries.
    pub fn sfo(&self) -> u64 {
        self.sfo
    }

    pub fn tracks_gradient(&self) -> bool {
        self.tracking
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Stacked estimator, empty for push-sgd.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Stacked tracker, empty for push-sgd.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn node(&self, i: usize) -> NodeState<'_> {
        let d = self.d;
        fn row(m: &[f64], i: usize, d: usize) -> &[f64] {
            if m.is_empty() {
                m
            } else {
                &m[i * d..(i + 1) * d]
            }
        }
        NodeState {
            x: row(&self.x, i, d),
            y: self.y[i],
            z: row(&self.z, i, d),
            v: row(&self.v, i, d),
            g: row(&self.g, i, d),
        }
    }

    /// Network average `(1/n) Σ_i x_i`.
    pub fn x_bar(&self) -> Vec<f64> {
        column_mean(&self.x, self.n, self.d)
    }

    /// Advances one round of `config.variant`.
    pub fn step(
        &mut self,
        w: &MixingMatrix,
        oracle: &StochasticOracle<'_>,
        config: &AlgoConfig,
    ) -> Result<(), AlgoError> {
        match config.variant {
            Variant::PushSgd => self.step_push_sgd(w, oracle, config.alpha),
            _ => self.step_push_asgd(w, oracle, config.alpha, config.effective_beta()),
        }
    }

    pub fn step_push_asgd(
        &mut self,
        w: &MixingMatrix,
        oracle: &StochasticOracle<'_>,
        alpha: f64,
        beta: f64,
    ) -> Result<(), AlgoError> {
        self.check_mixing(w)?;
        if !self.tracking {
            return Err(AlgoError::InvalidConfig(
                "state was initialized without gradient tracking".into(),
            ));
        }
        let (n, d, t) = (self.n, self.d, self.t);

        let descended: Vec<f64> = self
            .x
            .iter()
            .zip(&self.g)
            .map(|(x, g)| x - alpha * g)
            .collect();
        let mut x_next = vec![0.0; n * d];
        w.apply(&descended, d, &mut x_next);

        let mut y_next = vec![0.0; n];
        w.apply(&self.y, 1, &mut y_next);
        let z_next = debias(&x_next, &y_next, d);

        let mut v_next = vec![0.0; n * d];
        let mut prior = vec![0.0; d];
        for i in 0..n {
            let rows = i * d..(i + 1) * d;
            let fresh = &mut v_next[rows.clone()];
            oracle.stochastic_gradient_into(i, t, &z_next[rows.clone()], Draw::Fresh, fresh)?;
            oracle.stochastic_gradient_into(i, t, &self.z[rows.clone()], Draw::ReusePrior, &mut prior)?;
            if beta != 1.0 {
                for ((vn, v), p) in fresh.iter_mut().zip(&self.v[rows]).zip(&prior) {
                    *vn += (1.0 - beta) * (v - p);
                }
            }
        }

        let increment: Vec<f64> = self
            .g
            .iter()
            .zip(&v_next)
            .zip(&self.v)
            .map(|((g, vn), v)| g + vn - v)
            .collect();
        let mut g_next = vec![0.0; n * d];
        w.apply(&increment, d, &mut g_next);

        self.x = x_next;
        self.y = y_next;
        self.z = z_next;
        self.v = v_next;
        self.g = g_next;
        self.t += 1;
        self.sfo += 2 * n as u64;
        self.guard()
    }

    pub fn step_push_sgd(
        &mut self,
        w: &MixingMatrix,
        oracle: &StochasticOracle<'_>,
        alpha: f64,
    ) -> Result<(), AlgoError> {
        self.check_mixing(w)?;
        let (n, d, t) = (self.n, self.d, self.t);

        let mut descended = vec![0.0; n * d];
        for i in 0..n {
            let rows = i * d..(i + 1) * d;
            let grad = &mut descended[rows.clone()];
            oracle.stochastic_gradient_into(i, t, &self.z[rows.clone()], Draw::Fresh, grad)?;
            for (s, x) in grad.iter_mut().zip(&self.x[rows]) {
                *s = x - alpha * *s;
            }
        }
        let mut x_next = vec![0.0; n * d];
        w.apply(&descended, d, &mut x_next);
        let mut y_next = vec![0.0; n];
        w.apply(&self.y, 1, &mut y_next);

        self.z = debias(&x_next, &y_next, d);
        self.x = x_next;
        self.y = y_next;
        self.t += 1;
        self.sfo += n as u64;
        self.guard()
    }

    fn check_mixing(&self, w: &MixingMatrix) -> Result<(), AlgoError> {
        if w.n() != self.n {
            return Err(AlgoError::SizeMismatch {
                expected: self.n,
                got: w.n(),
            });
        }
        Ok(())
    }

    fn guard(&self) -> Result<(), AlgoError> {
        let fields: [(&str, &[f64]); 5] = [
            ("x", &self.x),
            ("y", &self.y),
            ("z", &self.z),
            ("v", &self.v),
            ("g", &self.g),
        ];
        for (name, values) in fields {
            if let Some(k) = values
                .iter()
                .position(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND)
            {
                return Err(AlgoError::Diverged {
                    iteration: self.t,
                    detail: format!("{name}[{k}] = {}", values[k]),
                });
            }
        }
        Ok(())
    }
}

fn debias(x: &[f64], y: &[f64], d: usize) -> Vec<f64> {
    x.chunks_exact(d)
        .zip(y)
        .flat_map(|(row, &yi)| row.iter().map(move |v| v / yi))
        .collect()
}

pub(crate) fn column_mean(m: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut acc = vec![0.0; d];
    for row in m.chunks_exact(d) {
        acc.iter_mut().zip(row).for_each(|(a, v)| *a += v);
    }
    acc.iter_mut().for_each(|a| *a /= n as f64);
    acc
}

/// Observer invoked after initialization and after every round.
pub trait Probe {
    fn observe(&mut self, state: &SwarmState);
}

impl<F: FnMut(&SwarmState)> Probe for F {
    fn observe(&mut self, state: &SwarmState) {
        self(state)
    }
}

/// Initializes, then runs `config.iterations` rounds against the schedule.
pub fn run<P: Probe + ?Sized>(
    oracle: &StochasticOracle<'_>,
    config: &AlgoConfig,
    schedule: &TopologySchedule,
    probe: &mut P,
) -> Result<SwarmState, AlgoError> {
    let state = SwarmState::init(oracle, config)?;
    run_from(state, oracle, config, schedule, probe)
}

/// Runs `config.iterations` rounds starting from an already initialized
/// state.
pub fn run_from<P: Probe + ?Sized>(
    mut state: SwarmState,
    oracle: &StochasticOracle<'_>,
    config: &AlgoConfig,
    schedule: &TopologySchedule,
    probe: &mut P,
) -> Result<SwarmState, AlgoError> {
    if schedule.n() != state.n {
        return Err(AlgoError::SizeMismatch {
            expected: state.n,
            got: schedule.n(),
        });
    }
    probe.observe(&state);
    let start = state.t;
    for t in start..start + config.iterations {
        let w = schedule.mixing_at(t);
        state.step(&w, oracle, config)?;
        probe.observe(&state);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, directed_ring, TopologySchedule};
    use crate::oracle::{Objective, QuadraticObjective};
    use crate::rng;
    use proptest::prelude::*;

    fn half_quadratic(n: usize) -> Objective {
        // f_i(x) = ½x² on the real line.
        Objective::Quadratic(
            QuadraticObjective::new(vec![vec![1.0]; n], vec![vec![0.0]; n], 0.0).unwrap(),
        )
    }

    fn sine(n: usize, sigma: f64) -> Objective {
        Objective::PlSine(
            crate::oracle::make_pl_sine(n, sigma, crate::oracle::AScheme::Linear, &mut rng::stream(0))
                .unwrap(),
        )
    }

    #[test]
    fn hand_computed_first_round() {
        let obj = half_quadratic(2);
        let oracle = StochasticOracle::new(&obj, 0);
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.1, 0.5, 1).with_x0(vec![1.0]);
        let mut s = SwarmState::init(&oracle, &cfg).unwrap();
        assert_eq!(s.g(), &[1.0, 1.0]);
        let w = MixingMatrix::from_graph(&complete(2).unwrap());
        s.step(&w, &oracle, &cfg).unwrap();
        for i in 0..2 {
            assert!((s.node(i).x[0] - 0.9).abs() < 1e-15);
            assert_eq!(s.node(i).y, 1.0);
            assert!((s.node(i).z[0] - 0.9).abs() < 1e-15);
        }
    }

    #[test]
    fn init_contract() {
        let obj = sine(4, 0.0);
        let oracle = StochasticOracle::new(&obj, 1);
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.01, 0.1, 3);
        let s = SwarmState::init(&oracle, &cfg).unwrap();
        assert!(s.z().iter().all(|&z| z == 0.0));
        assert_eq!(s.v(), s.g());
        assert_eq!(s.sfo(), 4);
        for i in 0..4 {
            assert_eq!(s.node(i).g, obj.local_gradient(i, &[0.0]).unwrap().as_slice());
        }
        let batched = SwarmState::init(&oracle, &cfg.clone().with_batch(5)).unwrap();
        assert_eq!(batched.sfo(), 20);

        let bad = cfg.clone().with_x0(vec![0.0, 1.0]);
        assert!(SwarmState::init(&oracle, &bad).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = AlgoConfig::new(Variant::PushAsgd, 0.1, 0.5, 10);
        assert!(ok.validate().is_ok());
        assert!(AlgoConfig::new(Variant::PushAsgd, -0.1, 0.5, 10).validate().is_err());
        assert!(AlgoConfig::new(Variant::PushAsgd, 0.1, 1.5, 10).validate().is_err());
        assert!(AlgoConfig::new(Variant::PushAsgd, 0.1, 0.5, 10).with_batch(0).validate().is_err());
        // Named limits override whatever beta says.
        let sarah = AlgoConfig::new(Variant::GtSarah, 0.1, 7.0, 10);
        assert_eq!(sarah.effective_beta(), 0.0);
        assert!(sarah.validate().is_ok());
        assert_eq!(AlgoConfig::new(Variant::GtSgd, 0.1, 0.3, 1).effective_beta(), 1.0);
    }

    #[test]
    fn beta_one_uses_fresh_gradient_exactly() {
        let obj = sine(6, 0.5);
        let oracle = StochasticOracle::new(&obj, 4);
        let cfg = AlgoConfig::new(Variant::GtSgd, 0.05, 0.0, 1).with_x0(vec![1.3]);
        let schedule = TopologySchedule::er_ring_cycle(6, 0.3, 2).unwrap();
        let mut s = SwarmState::init(&oracle, &cfg).unwrap();
        for t in 0..20 {
            s.step(&schedule.mixing_at(t), &oracle, &cfg).unwrap();
            for i in 0..6 {
                let fresh = oracle.stochastic_gradient(i, t, s.node(i).z, Draw::Fresh).unwrap();
                assert_eq!(s.node(i).v[0].to_bits(), fresh[0].to_bits());
            }
        }
    }

    #[test]
    fn sfo_accounting() {
        let obj = sine(5, 0.5);
        let schedule = TopologySchedule::fixed(directed_ring(5).unwrap()).unwrap();
        let oracle = StochasticOracle::new(&obj, 2);
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.01, 0.2, 7).with_batch(3);
        let s = run(&oracle, &cfg, &schedule, &mut |_: &SwarmState| {}).unwrap();
        assert_eq!(s.sfo(), 5 * 3 + 2 * 5 * 7);
        assert_eq!(s.sfo(), oracle.sfo_count());

        let oracle = StochasticOracle::new(&obj, 2);
        let cfg = AlgoConfig::new(Variant::PushSgd, 0.01, 0.0, 9);
        let s = run(&oracle, &cfg, &schedule, &mut |_: &SwarmState| {}).unwrap();
        assert_eq!(s.sfo(), 5 * 9);
        assert!(s.v().is_empty());
    }

    #[test]
    fn zero_iterations_observe_only_init() {
        let obj = sine(3, 0.5);
        let oracle = StochasticOracle::new(&obj, 2);
        let schedule = TopologySchedule::fixed(directed_ring(3).unwrap()).unwrap();
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.01, 0.2, 0);
        let mut seen = Vec::new();
        run(&oracle, &cfg, &schedule, &mut |s: &SwarmState| seen.push(s.t())).unwrap();
        assert_eq!(seen, vec![0]);
    }

    #[test]
    fn divergence_is_reported_with_iteration() {
        let obj = half_quadratic(3);
        let oracle = StochasticOracle::new(&obj, 0);
        let schedule = TopologySchedule::fixed(complete(3).unwrap()).unwrap();
        // Step size 5 on curvature 1 multiplies the error by −4 each round.
        let cfg = AlgoConfig::new(Variant::PushSgd, 5.0, 0.0, 100).with_x0(vec![1.0]);
        let err = run(&oracle, &cfg, &schedule, &mut |_: &SwarmState| {}).unwrap_err();
        match err {
            AlgoError::Diverged { iteration, .. } => assert_eq!(iteration, 20),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mismatched_mixing_rejected() {
        let obj = sine(3, 0.0);
        let oracle = StochasticOracle::new(&obj, 0);
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.1, 0.5, 1);
        let mut s = SwarmState::init(&oracle, &cfg).unwrap();
        let w = MixingMatrix::from_graph(&complete(4).unwrap());
        assert_eq!(
            s.step(&w, &oracle, &cfg),
            Err(AlgoError::SizeMismatch { expected: 3, got: 4 })
        );
    }

    #[test]
    fn pure_push_sum_reaches_average() {
        let obj = sine(6, 0.0);
        let oracle = StochasticOracle::new(&obj, 0);
        let cfg = AlgoConfig::new(Variant::PushSgd, 0.0, 0.0, 400);
        let schedule = TopologySchedule::er_ring_cycle(6, 0.3, 9).unwrap();
        let points = vec![3.0, -1.0, 0.5, 2.0, 0.0, -4.5];
        let mean = points.iter().sum::<f64>() / 6.0;
        let s = SwarmState::init_with_points(&oracle, &cfg, points).unwrap();
        let s = run_from(s, &oracle, &cfg, &schedule, &mut |_: &SwarmState| {}).unwrap();
        assert!(s.z().iter().all(|z| (z - mean).abs() < 1e-10));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn conservation_laws(seed in any::<u64>(), beta in 0.0f64..=1.0, n in 2usize..12) {
            let obj = sine(n, 0.5);
            let oracle = StochasticOracle::new(&obj, seed);
            let schedule = TopologySchedule::er_ring_cycle(n, 0.25, seed).unwrap();
            let cfg = AlgoConfig::new(Variant::PushAsgd, 0.02, beta, 1).with_x0(vec![2.0]);
            let mut s = SwarmState::init(&oracle, &cfg).unwrap();
            for t in 0..60 {
                let before = s.x_bar()[0];
                let g_sum: f64 = s.g().iter().sum();
                s.step(&schedule.mixing_at(t), &oracle, &cfg).unwrap();
                let y_sum: f64 = s.y().iter().sum();
                prop_assert!((y_sum - n as f64).abs() <= 1e-9);
                let gap: f64 = s.g().iter().sum::<f64>() - s.v().iter().sum::<f64>();
                prop_assert!(gap.abs() <= 1e-9);
                let expect = before - 0.02 * g_sum / n as f64;
                prop_assert!((s.x_bar()[0] - expect).abs() <= 1e-9);
                for i in 0..n {
                    let node = s.node(i);
                    prop_assert!(node.y > 0.0);
                    prop_assert_eq!(node.z[0], node.x[0] / node.y);
                }
            }
        }
    }
}
