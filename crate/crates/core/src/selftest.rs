//! Invariant suites on small fixtures, bundled for the command line.

use std::fmt;

use rand::Rng;

use crate::algo::{self, AlgoConfig, SwarmState, Variant};
use crate::diagnostics::{empirical_contraction, l_norm_sq, phi_step, uniform, mix_debiased};
use crate::graph::{MixingMatrix, TopologySchedule, COLUMN_SUM_TOL};
use crate::oracle::{make_pl_sine, AScheme, Draw, Objective, QuadraticObjective, StochasticOracle};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    /// What was checked and against which bound.
    pub tolerance: String,
    pub passed: bool,
    /// Worst observed value.
    pub observed: String,
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<22} {} (observed {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.tolerance,
            self.observed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

impl fmt::Display for SelfTestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(f, "{s}")?;
        }
        let failed = self.suites.iter().filter(|s| !s.passed).count();
        write!(f, "{} suites, {failed} failed", self.suites.len())
    }
}

const N: usize = 10;

fn schedule() -> TopologySchedule {
    TopologySchedule::er_ring_cycle(N, 0.3, 1).expect("valid fixture")
}

pub fn conservation() -> SuiteResult {
    let tol = 1e-9;
    let obj = Objective::Quadratic(
        QuadraticObjective::random(N, 3, 0.5, &mut rng::stream(2)).expect("valid fixture"),
    );
    let oracle = StochasticOracle::new(&obj, 3);
    let cfg = AlgoConfig::new(Variant::PushAsgd, 0.02, 0.1, 200).with_x0(vec![0.5, -0.5, 1.0]);
    let sched = schedule();
    let mut state = SwarmState::init(&oracle, &cfg).expect("valid fixture");
    let mut worst = 0.0f64;
    let col_sum = |m: &[f64]| -> Vec<f64> {
        let mut s = vec![0.0; 3];
        m.chunks_exact(3).for_each(|r| s.iter_mut().zip(r).for_each(|(a, v)| *a += v));
        s
    };
    for t in 0..cfg.iterations {
        let (sx, sg) = (col_sum(state.x()), col_sum(state.g()));
        if state.step(&sched.mixing_at(t), &oracle, &cfg).is_err() {
            worst = f64::INFINITY;
            break;
        }
        let y_err = (state.y().iter().sum::<f64>() - N as f64).abs();
        let track = col_sum(state.g())
            .iter()
            .zip(col_sum(state.v()))
            .map(|(g, v)| (g - v).abs())
            .fold(0.0, f64::max);
        let avg = col_sum(state.x())
            .iter()
            .zip(sx.iter().zip(&sg))
            .map(|(x1, (x0, g))| (x1 - (x0 - cfg.alpha * g)).abs())
            .fold(0.0, f64::max);
        worst = worst.max(y_err).max(track).max(avg);
    }
    SuiteResult {
        name: "conservation",
        tolerance: format!("|sum y - n|, |sum g - sum v|, average dynamics <= {tol:e}"),
        passed: worst <= tol,
        observed: format!("{worst:.3e}"),
    }
}

pub fn consensus() -> SuiteResult {
    let tol = 1e-8;
    let d = 3;
    let obj = Objective::Quadratic(
        QuadraticObjective::random(N, d, 0.0, &mut rng::stream(4)).expect("valid fixture"),
    );
    let oracle = StochasticOracle::exact(&obj);
    let cfg = AlgoConfig::new(Variant::PushSgd, 0.0, 0.0, 300);
    let mut r = rng::stream(5);
    let points: Vec<f64> = (0..N * d).map(|_| r.random_range(-1.0..1.0)).collect();
    let mean = algo::column_mean(&points, N, d);
    let state = SwarmState::init_with_points(&oracle, &cfg, points).expect("valid fixture");
    let end = algo::run_from(state, &oracle, &cfg, &schedule(), &mut |_: &SwarmState| {})
        .expect("no descent, no divergence");
    let worst = end
        .z()
        .chunks_exact(d)
        .flat_map(|row| row.iter().zip(&mean).map(|(z, m)| (z - m).abs()))
        .fold(0.0, f64::max);
    SuiteResult {
        name: "consensus",
        tolerance: format!("max |z - mean(x0)| <= {tol:e} after 300 pure-mixing rounds"),
        passed: worst <= tol,
        observed: format!("{worst:.3e}"),
    }
}

pub fn unbiasedness() -> SuiteResult {
    let draws = 20_000usize;
    let sigma = 0.5;
    let obj = Objective::PlSine(
        make_pl_sine(N, sigma, AScheme::Linear, &mut rng::stream(0)).expect("valid fixture"),
    );
    let oracle = StochasticOracle::new(&obj, 6);
    let exact = obj.local_gradient(0, &[0.7]).expect("valid fixture")[0];
    let mut buf = [0.0];
    let (mut sum, mut sq) = (0.0, 0.0);
    for t in 0..draws {
        oracle
            .stochastic_gradient_into(0, t, &[0.7], Draw::Fresh, &mut buf)
            .expect("valid fixture");
        let e = buf[0] - exact;
        sum += e;
        sq += e * e;
    }
    let mean = sum / draws as f64;
    let var = sq / draws as f64 - mean * mean;
    let mean_tol = 4.0 * sigma / (draws as f64).sqrt();
    let var_rel = (var / (sigma * sigma) - 1.0).abs();
    SuiteResult {
        name: "unbiasedness",
        tolerance: format!("|mean error| < {mean_tol:.3e}, variance within 10% of {}", sigma * sigma),
        passed: mean.abs() < mean_tol && var_rel <= 0.1,
        observed: format!("mean error {mean:.3e}, variance {var:.4}"),
    }
}

pub fn deterministic_collapse() -> SuiteResult {
    let tol = 1e-10;
    let obj = Objective::PlSine(
        make_pl_sine(N, 0.0, AScheme::Linear, &mut rng::stream(0)).expect("valid fixture"),
    );
    let oracle = StochasticOracle::new(&obj, 0);
    let sched = schedule();
    let mut worst = 0.0f64;
    for beta in [0.0, 0.015, 0.5, 1.0] {
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.05, beta, 100).with_x0(vec![2.0]);
        let outcome = algo::run(&oracle, &cfg, &sched, &mut |s: &SwarmState| {
            for i in 0..N {
                let node = s.node(i);
                let g = obj.local_gradient(i, node.z).expect("valid fixture");
                worst = worst.max((node.v[0] - g[0]).abs());
            }
        });
        if outcome.is_err() {
            worst = f64::INFINITY;
        }
    }
    SuiteResult {
        name: "deterministic-collapse",
        tolerance: format!("noise-free |v - grad f_i(z)| <= {tol:e} for beta in {{0, 0.015, 0.5, 1}}"),
        passed: worst <= tol,
        observed: format!("{worst:.3e}"),
    }
}

/// Pure push-sum rounds from random points; returns `(z_t, y_t)` for every
/// round.
fn mixing_rounds(rounds: usize, d: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let sched = schedule();
    let mut r = rng::stream(7);
    let mut x: Vec<f64> = (0..N * d).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut y = vec![1.0; N];
    let mut out = Vec::with_capacity(rounds + 1);
    for t in 0..=rounds {
        let z: Vec<f64> = x.chunks_exact(d).zip(&y).flat_map(|(row, yi)| row.iter().map(move |v| v / yi)).collect();
        out.push((z, y.clone()));
        if t == rounds {
            break;
        }
        let w = sched.mixing_at(t);
        let mut nx = vec![0.0; N * d];
        let mut ny = vec![0.0; N];
        w.apply(&x, d, &mut nx);
        w.apply(&y, 1, &mut ny);
        x = nx;
        y = ny;
    }
    out
}

fn backward_phis(history: &[(Vec<f64>, Vec<f64>)]) -> Vec<Vec<f64>> {
    let sched = schedule();
    let last = history.len() - 1;
    let mut phis = vec![uniform(N)];
    for t in (0..last).rev() {
        let next = phi_step(&sched.mixing_at(t), &history[t].1, &history[t + 1].1, phis.last().unwrap());
        phis.push(next);
    }
    phis.reverse();
    phis
}

pub fn contraction() -> SuiteResult {
    let d = 2;
    let history = mixing_rounds(100, d);
    let phis = backward_phis(&history);
    let sched = schedule();
    let mut worst = 0.0f64;
    for t in 0..history.len() - 1 {
        if l_norm_sq(&history[t].0, d, &phis[t]).sqrt() <= 1e-10 {
            continue;
        }
        let mixed = mix_debiased(&sched.mixing_at(t), &history[t].0, d, &history[t].1, &history[t + 1].1);
        worst = worst.max(empirical_contraction(&history[t].0, &mixed, d, &phis[t], &phis[t + 1]));
    }
    SuiteResult {
        name: "contraction",
        tolerance: "lambda_t < 1 wherever the weighted deviation exceeds 1e-10".into(),
        passed: worst < 1.0,
        observed: format!("max lambda {worst:.6}"),
    }
}

pub fn phi_residual() -> SuiteResult {
    let (sum_tol, res_tol) = (1e-10, 1e-9);
    let history = mixing_rounds(100, 1);
    let phis = backward_phis(&history);
    let sched = schedule();
    let sum_err = phis
        .iter()
        .map(|p| (p.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let mut residual = 0.0f64;
    for t in 0..phis.len() - 1 {
        let w = crate::diagnostics::build_w_tilde(&sched.mixing_at(t), &history[t].1, &history[t + 1].1)
            .expect("positive weights");
        let back = w.transpose_apply(&phis[t + 1]);
        for (a, b) in back.iter().zip(&phis[t]) {
            residual = residual.max((a - b).abs());
        }
    }
    SuiteResult {
        name: "phi-residual",
        tolerance: format!("|sum phi - 1| <= {sum_tol:e}, residual <= {res_tol:e}"),
        passed: sum_err <= sum_tol && residual <= res_tol,
        observed: format!("sum error {sum_err:.3e}, residual {residual:.3e}"),
    }
}

/// Every column of every matrix sums to 1 and every entry is in `[0, 1]`.
pub fn column_stochasticity(matrices: &[MixingMatrix]) -> SuiteResult {
    let mut worst = 0.0f64;
    let mut negative = false;
    for w in matrices {
        for s in w.column_sums() {
            worst = worst.max((s - 1.0).abs());
        }
        negative |= w.as_dense().iter().any(|&v| !(0.0..=1.0).contains(&v));
    }
    SuiteResult {
        name: "column-stochasticity",
        tolerance: format!("|column sum - 1| <= {COLUMN_SUM_TOL:e}, entries in [0, 1]"),
        passed: worst <= COLUMN_SUM_TOL && !negative,
        observed: format!("{worst:.3e}"),
    }
}

/// The mixing matrices of the fixture schedule over one full period.
pub fn fixture_matrices() -> Vec<MixingMatrix> {
    let sched = schedule();
    (0..3).map(|t| sched.mixing_at(t).into_owned()).collect()
}

pub fn run_selftest() -> SelfTestReport {
    SelfTestReport {
        suites: vec![
            conservation(),
            consensus(),
            unbiasedness(),
            deterministic_collapse(),
            contraction(),
            phi_residual(),
            column_stochasticity(&fixture_matrices()),
        ],
    }
}
