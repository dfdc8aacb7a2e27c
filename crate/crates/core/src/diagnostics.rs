//! Analysis-side quantities: the φ-weighted consensus norm, the stochastic
//! vector sequence φ_t that makes one-step consensus contraction hold under
//! row-stochastic mixing, estimator and tracking errors, optimality gaps and
//! empirical contraction factors.
//!
//! With `Y_t = diag(y_t)`, the de-biased models evolve under the
//! row-stochastic matrix `W̃_t = Y_{t+1}⁻¹ W_t Y_t`, and `φ_t` is any
//! sequence of stochastic vectors with `φ_{t+1}ᵀ W̃_t = φ_tᵀ`. For a finite
//! run it is computed backward from a uniform terminal vector.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algo::{column_mean, Probe, SwarmState};
use crate::graph::{MixingMatrix, TopologySchedule};
use crate::oracle::Objective;

/// Below this 𝔏 value a contraction ratio is reported as 0.
pub const CONTRACTION_FLOOR: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("push-sum weight {index} is {value}, must be positive")]
    DegenerateWeights { index: usize, value: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Row-stochastic `W̃ = Y_{t+1}⁻¹ W Y_t`, dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WTilde {
    n: usize,
    data: Vec<f64>,
}

impl WTilde {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        (0..n).for_each(|i| data[i * n + i] = 1.0);
        Self { n, data }
    }

    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self, DiagnosticsError> {
        if data.len() != n * n {
            return Err(DiagnosticsError::Dimension(format!(
                "{} entries for a {n}x{n} matrix",
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks_exact(self.n).map(|r| r.iter().sum()).collect()
    }

    /// `W̃ᵀ φ`.
    pub fn transpose_apply(&self, phi: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (i, row) in self.data.chunks_exact(n).enumerate() {
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * phi[i];
            }
        }
        out
    }

    /// `W̃ M` for a row-major `n × d` matrix.
    pub fn apply(&self, m: &[f64], d: usize) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * d];
        for (i, row) in self.data.chunks_exact(n).enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    for c in 0..d {
                        out[i * d + c] += w * m[j * d + c];
                    }
                }
            }
        }
        out
    }
}

fn check_weights(y: &[f64]) -> Result<(), DiagnosticsError> {
    match y.iter().position(|&v| v.is_nan() || v <= 0.0) {
        Some(index) => Err(DiagnosticsError::DegenerateWeights {
            index,
            value: y[index],
        }),
        None => Ok(()),
    }
}

/// `W̃[i][j] = W[i][j] · y_t[j] / y_{t+1}[i]`.
pub fn build_w_tilde(
    w: &MixingMatrix,
    y_t: &[f64],
    y_next: &[f64],
) -> Result<WTilde, DiagnosticsError> {
    let n = w.n();
    if y_t.len() != n || y_next.len() != n {
        return Err(DiagnosticsError::Dimension(format!(
            "weights of length {} and {} for {n} nodes",
            y_t.len(),
            y_next.len()
        )));
    }
    check_weights(y_t)?;
    check_weights(y_next)?;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = w.get(i, j) * y_t[j] / y_next[i];
        }
    }
    Ok(WTilde { n, data })
}

/// φ_0 … φ_T for a recorded run.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSequence {
    phis: Vec<Vec<f64>>,
}

impl PhiSequence {
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    pub fn get(&self, t: usize) -> &[f64] {
        &self.phis[t]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.phis.iter().map(Vec::as_slice)
    }

    pub fn min_entry(&self) -> f64 {
        self.phis.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max_t max_j |φ_t − W̃_tᵀ φ_{t+1}|_j`.
    pub fn max_residual(&self, w_tildes: &[WTilde]) -> f64 {
        w_tildes
            .iter()
            .enumerate()
            .map(|(t, wt)| {
                let back = wt.transpose_apply(&self.phis[t + 1]);
                back.iter()
                    .zip(&self.phis[t])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// `φ_T = terminal`, `φ_t = W̃_tᵀ φ_{t+1}` for `t = T−1 … 0`.
pub fn phi_backward(w_tildes: &[WTilde], terminal: Vec<f64>) -> PhiSequence {
    let mut phis = vec![terminal];
    for wt in w_tildes.iter().rev() {
        let next = wt.transpose_apply(phis.last().expect("non-empty"));
        phis.push(next);
    }
    phis.reverse();
    PhiSequence { phis }
}

pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// One backward step `W̃_tᵀ φ_{t+1}` evaluated from the sparse columns of
/// `W` without forming `W̃`:
/// `(W̃ᵀφ)_j = y_t[j] · Σ_i W[i][j] φ[i] / y_{t+1}[i]`.
pub fn phi_step(w: &MixingMatrix, y_t: &[f64], y_next: &[f64], phi_next: &[f64]) -> Vec<f64> {
    (0..w.n())
        .map(|j| {
            y_t[j]
                * w.column(j)
                    .iter()
                    .map(|&(i, wij)| wij * phi_next[i] / y_next[i])
                    .sum::<f64>()
        })
        .collect()
}

/// φ-weighted mean row `Σ_j φ_j M_j`.
pub fn weighted_mean(m: &[f64], d: usize, phi: &[f64]) -> Vec<f64> {
    let mut mean = vec![0.0; d];
    for (row, &p) in m.chunks_exact(d).zip(phi) {
        mean.iter_mut().zip(row).for_each(|(a, v)| *a += p * v);
    }
    mean
}

/// `𝔏²(M, φ) = Σ_i φ_i ‖M_i − M̂‖²` with `M̂` the φ-weighted mean row.
pub fn l_norm_sq(m: &[f64], d: usize, phi: &[f64]) -> f64 {
    let mean = weighted_mean(m, d, phi);
    m.chunks_exact(d)
        .zip(phi)
        .map(|(row, &p)| p * row.iter().zip(&mean).map(|(v, c)| (v - c).powi(2)).sum::<f64>())
        .sum()
}

/// `𝔏(after, φ_after) / 𝔏(before, φ_before)`, or 0 when the denominator is
/// below [`CONTRACTION_FLOOR`].
pub fn empirical_contraction(
    before: &[f64],
    after: &[f64],
    d: usize,
    phi_before: &[f64],
    phi_after: &[f64],
) -> f64 {
    let den = l_norm_sq(before, d, phi_before).sqrt();
    if den < CONTRACTION_FLOOR {
        return 0.0;
    }
    l_norm_sq(after, d, phi_after).sqrt() / den
}

/// Plain consensus error `Σ_i ‖z_i − z̄‖²`.
pub fn consensus_error(z: &[f64], d: usize) -> f64 {
    let n = z.len() / d;
    let mean = column_mean(z, n, d);
    z.chunks_exact(d)
        .map(|row| row.iter().zip(&mean).map(|(v, c)| (v - c).powi(2)).sum::<f64>())
        .sum()
}

/// `(‖v − ∇f(z)‖²_F, ‖v̄ − (1/n)Σ∇f_i(z_i)‖²)`; `None` for states without
/// an estimator.
pub fn estimator_errors(state: &SwarmState, objective: &Objective) -> Option<(f64, f64)> {
    if !state.tracks_gradient() {
        return None;
    }
    let (n, d) = (state.n(), state.dim());
    let mut stacked = 0.0;
    let mut mean_diff = vec![0.0; d];
    let mut grad = vec![0.0; d];
    for i in 0..n {
        let node = state.node(i);
        objective
            .local_gradient_into(i, node.z, &mut grad)
            .expect("state matches objective");
        for ((m, v), g) in mean_diff.iter_mut().zip(node.v).zip(&grad) {
            stacked += (v - g).powi(2);
            *m += (v - g) / n as f64;
        }
    }
    Some((stacked, mean_diff.iter().map(|m| m * m).sum()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerMetrics {
    pub x_bar: Vec<f64>,
    pub grad_norm_sq: f64,
    pub value: f64,
    pub gap: Option<f64>,
}

/// Metrics at the network average `x̄ = (1/n) Σ x_i`.
pub fn optimizer_metrics(
    state: &SwarmState,
    objective: &Objective,
    f_star: Option<f64>,
) -> OptimizerMetrics {
    let x_bar = state.x_bar();
    let grad = objective.global_gradient(&x_bar).expect("state matches objective");
    let value = objective.global_value(&x_bar).expect("state matches objective");
    OptimizerMetrics {
        grad_norm_sq: grad.iter().map(|g| g * g).sum(),
        gap: f_star.map(|f| value - f),
        value,
        x_bar,
    }
}

/// Reported, never used to steer a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConstants {
    /// `ln ω = −(n + 2) ln n`, the worst-case positive entry of `W̃`.
    pub log_omega: f64,
    /// `sup_t max_i 1 / y_t^i`.
    pub y_inv_sup: f64,
    /// `d / min_{t,i} φ_t^i`.
    pub phi_m: f64,
    /// Largest recorded contraction ratio.
    pub max_lambda: Option<f64>,
}

pub fn log_omega(n: usize) -> f64 {
    -((n + 2) as f64) * (n as f64).ln()
}

pub fn analysis_constants(
    n: usize,
    d: usize,
    y_history: &[Vec<f64>],
    phis: &PhiSequence,
    lambdas: &[f64],
) -> AnalysisConstants {
    let y_inv_sup = y_history
        .iter()
        .flatten()
        .map(|y| 1.0 / y)
        .fold(0.0, f64::max);
    AnalysisConstants {
        log_omega: log_omega(n),
        y_inv_sup,
        phi_m: d as f64 / phis.min_entry(),
        max_lambda: lambdas.iter().copied().reduce(f64::max),
    }
}

/// Largest `‖∇f_i(x) − ∇f_i(x')‖ / ‖x − x'‖` over consecutive pairs of
/// `points` and all nodes. A lower bound on the smoothness constant.
pub fn empirical_lipschitz(objective: &Objective, points: &[Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for pair in points.windows(2) {
        let dist = pair[0]
            .iter()
            .zip(&pair[1])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if dist == 0.0 {
            continue;
        }
        for i in 0..objective.n() {
            let (Ok(ga), Ok(gb)) = (
                objective.local_gradient(i, &pair[0]),
                objective.local_gradient(i, &pair[1]),
            ) else {
                continue;
            };
            let diff = ga.iter().zip(&gb).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            best = best.max(diff / dist);
        }
    }
    best
}

/// `inf ½‖∇f(x)‖² / (f(x) − f*)` over a uniform grid on `[lo, hi]` for
/// one-dimensional objectives, skipping points where the gap is below
/// `1e-12`. An estimate of the PL constant.
pub fn pl_ratio_estimate(objective: &Objective, f_star: f64, lo: f64, hi: f64, points: usize) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..points {
        let x = [lo + (hi - lo) * k as f64 / (points - 1).max(1) as f64];
        let (Ok(v), Ok(g)) = (objective.global_value(&x), objective.global_gradient(&x)) else {
            continue;
        };
        let gap = v - f_star;
        if gap > 1e-12 {
            best = best.min(0.5 * g[0] * g[0] / gap);
        }
    }
    best
}

/// One CSV row of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub t: usize,
    pub sfo: u64,
    pub grad_norm_sq: f64,
    pub gap: Option<f64>,
    pub l2_z: Option<f64>,
    pub l2_h: Option<f64>,
    pub est_err: Option<f64>,
    pub est_err_avg: Option<f64>,
    pub consensus: f64,
    pub lambda_emp: Option<f64>,
    pub y_min: f64,
}

impl ProbeRow {
    pub const COLUMNS: [&'static str; 11] = [
        "t",
        "sfo",
        "grad_norm_sq",
        "gap",
        "l2_z",
        "l2_h",
        "est_err",
        "est_err_avg",
        "consensus",
        "lambda_emp",
        "y_min",
    ];

    /// Value of a named column. `None` for unknown names, `Some(None)` for a
    /// column that has no value in this row.
    pub fn metric(&self, name: &str) -> Option<Option<f64>> {
        Some(match name {
            "t" => Some(self.t as f64),
            "sfo" => Some(self.sfo as f64),
            "grad_norm_sq" => Some(self.grad_norm_sq),
            "gap" => self.gap,
            "l2_z" => self.l2_z,
            "l2_h" => self.l2_h,
            "est_err" => self.est_err,
            "est_err_avg" => self.est_err_avg,
            "consensus" => Some(self.consensus),
            "lambda_emp" => self.lambda_emp,
            "y_min" => Some(self.y_min),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub rows: Vec<ProbeRow>,
    pub constants: AnalysisConstants,
}

impl DiagnosticsReport {
    pub fn last(&self) -> Option<&ProbeRow> {
        self.rows.last()
    }
}

struct Snapshot {
    row: ProbeRow,
    z: Vec<f64>,
    h: Option<Vec<f64>>,
}

/// [`Probe`] that records `y_t` every round and a full snapshot every
/// `stride` rounds (and at the final round). φ-dependent columns are filled
/// in by [`DiagnosticsRecorder::finish`].
pub struct DiagnosticsRecorder<'a> {
    objective: &'a Objective,
    f_star: Option<f64>,
    stride: usize,
    last_t: usize,
    y_history: Vec<Vec<f64>>,
    snapshots: Vec<Snapshot>,
}

impl<'a> DiagnosticsRecorder<'a> {
    pub fn new(objective: &'a Objective, stride: usize, iterations: usize) -> Self {
        Self {
            objective,
            f_star: objective.optimum_value(),
            stride: stride.max(1),
            last_t: iterations,
            y_history: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn y_history(&self) -> &[Vec<f64>] {
        &self.y_history
    }

    /// Resolves φ backward from a uniform vector at the last recorded round
    /// and completes the rows.
    pub fn finish(self, schedule: &TopologySchedule) -> DiagnosticsReport {
        let d = self.objective.dim();
        let n = self.objective.n();
        let Some(last) = self.y_history.len().checked_sub(1) else {
            return DiagnosticsReport {
                rows: Vec::new(),
                constants: analysis_constants(n, d, &[], &PhiSequence { phis: vec![uniform(n)] }, &[]),
            };
        };
        let mut phis = vec![uniform(n)];
        for t in (0..last).rev() {
            let w = schedule.mixing_at(t);
            let next = phi_step(&w, &self.y_history[t], &self.y_history[t + 1], phis.last().unwrap());
            phis.push(next);
        }
        phis.reverse();
        let phis = PhiSequence { phis };

        let mut lambdas = Vec::new();
        let rows: Vec<ProbeRow> = self
            .snapshots
            .into_iter()
            .map(|snap| {
                let mut row = snap.row;
                let t = row.t;
                row.l2_z = Some(l_norm_sq(&snap.z, d, phis.get(t)));
                row.l2_h = snap.h.as_ref().map(|h| l_norm_sq(h, d, phis.get(t)));
                if t < last {
                    let w = schedule.mixing_at(t);
                    let mixed = mix_debiased(&w, &snap.z, d, &self.y_history[t], &self.y_history[t + 1]);
                    let lambda = empirical_contraction(&snap.z, &mixed, d, phis.get(t), phis.get(t + 1));
                    lambdas.push(lambda);
                    row.lambda_emp = Some(lambda);
                }
                row
            })
            .collect();

        DiagnosticsReport {
            constants: analysis_constants(n, d, &self.y_history, &phis, &lambdas),
            rows,
        }
    }
}

/// `W̃_t z = Y_{t+1}⁻¹ W (Y_t z)`.
pub fn mix_debiased(w: &MixingMatrix, z: &[f64], d: usize, y_t: &[f64], y_next: &[f64]) -> Vec<f64> {
    let scaled: Vec<f64> = z
        .chunks_exact(d)
        .zip(y_t)
        .flat_map(|(row, &y)| row.iter().map(move |v| v * y))
        .collect();
    let mut out = vec![0.0; z.len()];
    w.apply(&scaled, d, &mut out);
    for (row, &y) in out.chunks_exact_mut(d).zip(y_next) {
        row.iter_mut().for_each(|v| *v /= y);
    }
    out
}

impl Probe for DiagnosticsRecorder<'_> {
    fn observe(&mut self, state: &SwarmState) {
        self.y_history.push(state.y().to_vec());
        let t = state.t();
        if !t.is_multiple_of(self.stride) && t != self.last_t {
            return;
        }
        let d = state.dim();
        let metrics = optimizer_metrics(state, self.objective, self.f_star);
        let errors = estimator_errors(state, self.objective);
        let h = state.tracks_gradient().then(|| {
            state
                .g()
                .chunks_exact(d)
                .zip(state.y())
                .flat_map(|(row, &y)| row.iter().map(move |g| g / y))
                .collect()
        });
        self.snapshots.push(Snapshot {
            row: ProbeRow {
                t,
                sfo: state.sfo(),
                grad_norm_sq: metrics.grad_norm_sq,
                gap: metrics.gap,
                l2_z: None,
                l2_h: None,
                est_err: errors.map(|e| e.0),
                est_err_avg: errors.map(|e| e.1),
                consensus: consensus_error(state.z(), d),
                lambda_emp: None,
                y_min: state.y().iter().copied().fold(f64::INFINITY, f64::min),
            },
            z: state.z().to_vec(),
            h,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo::{self, AlgoConfig, Variant};
    use crate::graph::{complete, directed_ring, er_directed};
    use crate::oracle::{make_pl_sine, AScheme, QuadraticObjective, StochasticOracle};
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn w_tilde_of_doubly_stochastic_is_w() {
        let w = MixingMatrix::from_graph(&complete(4).unwrap());
        let wt = build_w_tilde(&w, &[1.0; 4], &[1.0; 4]).unwrap();
        assert_eq!(wt.data, w.as_dense());
    }

    #[test]
    fn w_tilde_rows_sum_to_one() {
        let w = MixingMatrix::from_graph(&directed_ring(3).unwrap());
        let y0 = vec![1.0; 3];
        let mut y1 = vec![0.0; 3];
        w.apply(&y0, 1, &mut y1);
        let wt = build_w_tilde(&w, &y0, &y1).unwrap();
        assert!(wt.row_sums().iter().all(|s| (s - 1.0).abs() < 1e-10));

        let g = er_directed(9, 0.3, &mut rng::stream(4)).unwrap();
        let w = MixingMatrix::from_graph(&g);
        let y0: Vec<f64> = (0..9).map(|k| 0.3 + k as f64 * 0.2).collect();
        let mut y1 = vec![0.0; 9];
        w.apply(&y0, 1, &mut y1);
        let wt = build_w_tilde(&w, &y0, &y1).unwrap();
        assert!(wt.row_sums().iter().all(|s| (s - 1.0).abs() < 1e-10));
    }

    #[test]
    fn w_tilde_rejects_degenerate_weights() {
        let w = MixingMatrix::from_graph(&directed_ring(3).unwrap());
        assert_eq!(
            build_w_tilde(&w, &[1.0, 0.0, 1.0], &[1.0; 3]),
            Err(DiagnosticsError::DegenerateWeights { index: 1, value: 0.0 })
        );
        assert!(build_w_tilde(&w, &[1.0; 3], &[1.0, 1.0, -2.0]).is_err());
        assert!(build_w_tilde(&w, &[1.0; 2], &[1.0; 3]).is_err());
    }

    #[test]
    fn phi_backward_trivial_cases() {
        let terminal = vec![0.1, 0.2, 0.7];
        let seq = phi_backward(&vec![WTilde::identity(3); 5], terminal.clone());
        assert_eq!(seq.len(), 6);
        assert!(seq.iter().all(|p| p == terminal.as_slice()));

        let w = MixingMatrix::from_graph(&complete(4).unwrap());
        let wt = build_w_tilde(&w, &[1.0; 4], &[1.0; 4]).unwrap();
        let seq = phi_backward(&vec![wt; 3], uniform(4));
        for p in seq.iter() {
            assert!(p.iter().all(|v| (v - 0.25).abs() < 1e-15));
        }
        assert_eq!(phi_backward(&[], uniform(2)).len(), 1);
    }

    fn recorded_w_tildes(n: usize, rounds: usize, seed: u64) -> Vec<WTilde> {
        let schedule = TopologySchedule::er_ring_cycle(n, 0.2, seed).unwrap();
        let mut y = vec![1.0; n];
        (0..rounds)
            .map(|t| {
                let w = schedule.mixing_at(t);
                let mut next = vec![0.0; n];
                w.apply(&y, 1, &mut next);
                let wt = build_w_tilde(&w, &y, &next).unwrap();
                y = next;
                wt
            })
            .collect()
    }

    #[test]
    fn phi_defining_relation_on_random_run() {
        let wts = recorded_w_tildes(10, 50, 3);
        let seq = phi_backward(&wts, uniform(10));
        assert!(seq.max_residual(&wts) < 1e-9);
        for p in seq.iter() {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn sparse_phi_step_matches_dense_route() {
        let n = 8;
        let schedule = TopologySchedule::er_ring_cycle(n, 0.3, 5).unwrap();
        let mut y = vec![1.0; n];
        let mut phi: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        let total: f64 = phi.iter().sum();
        phi.iter_mut().for_each(|p| *p /= total);
        for t in 0..12 {
            let w = schedule.mixing_at(t);
            let mut next = vec![0.0; n];
            w.apply(&y, 1, &mut next);
            let dense = build_w_tilde(&w, &y, &next).unwrap().transpose_apply(&phi);
            let sparse = phi_step(&w, &y, &next, &phi);
            for (a, b) in dense.iter().zip(&sparse) {
                assert!((a - b).abs() < 1e-15);
            }
            y = next;
        }
    }

    #[test]
    fn l_norm_examples() {
        assert_eq!(l_norm_sq(&[3.0, 1.0, 3.0, 1.0], 2, &[0.5, 0.5]), 0.0);
        assert!((l_norm_sq(&[0.0, 2.0], 1, &[0.5, 0.5]) - 1.0).abs() < 1e-15);
        let m = [0.3, -1.0, 2.0, 0.5, 1.5, -0.7];
        let phi = [0.2, 0.5, 0.3];
        let base = l_norm_sq(&m, 2, &phi);
        let scaled: Vec<f64> = m.iter().map(|v| 3.0 * v).collect();
        assert!((l_norm_sq(&scaled, 2, &phi) - 9.0 * base).abs() < 1e-12);
    }

    #[test]
    fn contraction_examples() {
        let z = [1.0, 1.0, 1.0];
        assert_eq!(empirical_contraction(&z, &z, 1, &uniform(3), &uniform(3)), 0.0);
        let z = [1.0, -2.0, 0.5];
        assert_eq!(empirical_contraction(&z, &z, 1, &uniform(3), &uniform(3)), 1.0);

        let n = 6;
        let g = er_directed(n, 0.4, &mut rng::stream(2)).unwrap();
        let w = MixingMatrix::from_graph(&g);
        let y0 = vec![1.0; n];
        let mut y1 = vec![0.0; n];
        w.apply(&y0, 1, &mut y1);
        let wt = build_w_tilde(&w, &y0, &y1).unwrap();
        let phi1 = uniform(n);
        let phi0 = wt.transpose_apply(&phi1);
        let z: Vec<f64> = (0..n).map(|k| (k as f64).cos()).collect();
        let lambda = empirical_contraction(&z, &wt.apply(&z, 1), 1, &phi0, &phi1);
        assert!((0.0..1.0).contains(&lambda));
    }

    #[test]
    fn l_norm_zero_iff_consensus() {
        let phi = [0.1, 0.6, 0.3];
        let same = [2.0, 2.0, 2.0];
        assert_eq!(l_norm_sq(&same, 1, &phi), 0.0);
        assert_eq!(consensus_error(&same, 1), 0.0);
        let apart = [2.0, 2.0, 2.1];
        assert!(l_norm_sq(&apart, 1, &phi) > 0.0);
        assert!(consensus_error(&apart, 1) > 0.0);
    }

    #[test]
    fn estimator_errors_examples() {
        let obj = Objective::PlSine(make_pl_sine(4, 0.0, AScheme::Linear, &mut rng::stream(0)).unwrap());
        let oracle = StochasticOracle::new(&obj, 0);
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.05, 0.3, 10).with_x0(vec![1.0]);
        let schedule = TopologySchedule::er_ring_cycle(4, 0.5, 1).unwrap();
        let mut worst: f64 = 0.0;
        algo::run(&oracle, &cfg, &schedule, &mut |s: &SwarmState| {
            let (a, b) = estimator_errors(s, &obj).unwrap();
            worst = worst.max(a).max(b);
        })
        .unwrap();
        assert!(worst <= 1e-18, "{worst}");

        // One noisy step: finite, non-negative.
        let noisy = Objective::PlSine(make_pl_sine(4, 0.5, AScheme::Linear, &mut rng::stream(0)).unwrap());
        let oracle = StochasticOracle::new(&noisy, 3);
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.05, 0.3, 1).with_x0(vec![1.0]);
        let s = algo::run(&oracle, &cfg, &schedule, &mut |_: &SwarmState| {}).unwrap();
        let (a, b) = estimator_errors(&s, &noisy).unwrap();
        assert!(a.is_finite() && a >= 0.0 && b.is_finite() && b >= 0.0);
    }

    #[test]
    fn estimator_error_with_constant_offset() {
        // Quadratic with zero curvature offsets: state v = ∇f + c per node.
        let obj = Objective::Quadratic(
            QuadraticObjective::new(vec![vec![1.0, 0.0, 0.0, 1.0]; 3], vec![vec![0.0, 0.0]; 3], 0.5)
                .unwrap(),
        );
        let oracle = StochasticOracle::exact(&obj);
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.1, 0.5, 0).with_x0(vec![1.0, -2.0]);
        let s = SwarmState::init(&oracle, &cfg).unwrap();
        let (a, b) = estimator_errors(&s, &obj).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
        // Rebuild with a noisy oracle, single draw per node: the offsets
        // c_i are the noise vectors, so check the identities directly.
        let noisy = StochasticOracle::new(&obj, 1);
        let s = SwarmState::init(&noisy, &cfg).unwrap();
        let (a, b) = estimator_errors(&s, &obj).unwrap();
        let offsets: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let g = obj.local_gradient(i, s.node(i).z).unwrap();
                s.node(i).v.iter().zip(&g).map(|(v, g)| v - g).collect()
            })
            .collect();
        let stacked: f64 = offsets.iter().flatten().map(|c| c * c).sum();
        let mean: Vec<f64> = (0..2).map(|k| offsets.iter().map(|c| c[k]).sum::<f64>() / 3.0).collect();
        assert!((a - stacked).abs() < 1e-14);
        assert!((b - mean.iter().map(|m| m * m).sum::<f64>()).abs() < 1e-14);
    }

    #[test]
    fn optimizer_metrics_examples() {
        let obj = Objective::PlSine(make_pl_sine(3, 0.5, AScheme::Linear, &mut rng::stream(0)).unwrap());
        let oracle = StochasticOracle::new(&obj, 0);
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.1, 0.5, 0);
        let s = SwarmState::init(&oracle, &cfg).unwrap();
        let m = optimizer_metrics(&s, &obj, obj.optimum_value());
        assert_eq!(m.grad_norm_sq, 0.0);
        assert_eq!(m.gap, Some(0.0));

        let mut r = rng::stream(8);
        let quad = Objective::Quadratic(QuadraticObjective::random(3, 2, 0.0, &mut r).unwrap());
        let Objective::Quadratic(q) = &quad else { unreachable!() };
        let oracle = StochasticOracle::new(&quad, 0);
        let x0 = vec![0.7, -1.2];
        let s = SwarmState::init(&oracle, &cfg.clone().with_x0(x0.clone())).unwrap();
        let m = optimizer_metrics(&s, &quad, quad.optimum_value());
        // gap = ½ (x − x*)ᵀ Ā (x − x*), Ā the mean Hessian.
        let e: Vec<f64> = x0.iter().zip(q.minimizer()).map(|(a, b)| a - b).collect();
        let mut closed = 0.0;
        for i in 0..3 {
            let h = q.hessian(i);
            for r in 0..2 {
                for c in 0..2 {
                    closed += 0.5 * e[r] * h[r * 2 + c] * e[c] / 3.0;
                }
            }
        }
        assert!((m.gap.unwrap() - closed).abs() < 1e-10);
        assert!(m.gap.unwrap() >= 0.0);
    }

    #[test]
    fn analysis_constant_examples() {
        assert!((log_omega(3) + 5.0 * 3f64.ln()).abs() < 1e-15);
        let phis = PhiSequence { phis: vec![uniform(4); 3] };
        let c = analysis_constants(4, 1, &vec![vec![1.0; 4]; 3], &phis, &[0.5, 0.9]);
        assert_eq!(c.y_inv_sup, 1.0);
        assert_eq!(c.phi_m, 4.0);
        assert_eq!(c.max_lambda, Some(0.9));
    }

    #[test]
    fn recorder_rows_and_constants() {
        let obj = Objective::PlSine(make_pl_sine(5, 0.5, AScheme::Linear, &mut rng::stream(0)).unwrap());
        let oracle = StochasticOracle::new(&obj, 11);
        let cfg = AlgoConfig::new(Variant::PushAsgd, 0.05, 0.2, 10).with_x0(vec![2.0]);
        let schedule = TopologySchedule::er_ring_cycle(5, 0.3, 2).unwrap();
        let mut rec = DiagnosticsRecorder::new(&obj, 5, 10);
        algo::run(&oracle, &cfg, &schedule, &mut rec).unwrap();
        let report = rec.finish(&schedule);
        let ts: Vec<usize> = report.rows.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0, 5, 10]);
        assert!(report.rows[..2].iter().all(|r| r.lambda_emp.is_some()));
        assert!(report.rows[2].lambda_emp.is_none());
        assert!(report.constants.y_inv_sup >= 1.0);
        for r in &report.rows {
            assert!(r.l2_z.unwrap() >= 0.0 && r.l2_h.unwrap() >= 0.0);
            assert!(r.grad_norm_sq >= 0.0 && r.consensus >= 0.0);
        }
    }

    #[test]
    fn pl_and_lipschitz_estimates() {
        let obj = Objective::PlSine(make_pl_sine(4, 0.5, AScheme::Linear, &mut rng::stream(0)).unwrap());
        let mu = pl_ratio_estimate(&obj, 0.0, -5.0, 5.0, 2001);
        assert!(mu > 0.0 && mu.is_finite());
        let mut r = rng::stream(1);
        let pts: Vec<Vec<f64>> = (0..200).map(|_| vec![r.random_range(-5.0..5.0)]).collect();
        let l = empirical_lipschitz(&obj, &pts);
        // |f_i''| ≤ 2 + 6 + max|a_i| = 9.
        assert!(l > 1.0 && l <= 9.0 + 1e-9);
    }

    proptest! {
        #[test]
        fn w_tilde_transpose_preserves_simplex(seed in any::<u64>(), n in 2usize..15) {
            let wts = recorded_w_tildes(n, 12, seed);
            let mut r = rng::stream(seed);
            let mut terminal: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
            let s: f64 = terminal.iter().sum();
            terminal.iter_mut().for_each(|v| *v /= s);
            let seq = phi_backward(&wts, terminal);
            for p in seq.iter() {
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                prop_assert!(p.iter().all(|&v| v >= 0.0));
            }
        }
    }
}
