//! Local objectives `f_i` and the stochastic first-order oracle (SFO).
//!
//! Three objective families are provided:
//!
//! - [`PlSineObjective`]: `f_i(x) = x² + 3 sin²x + a_i cos x` on the real
//!   line with `Σ a_i = 0`, so the network objective is `x² + 3 sin²x`,
//!   which is non-convex and satisfies the Polyak–Łojasiewicz inequality.
//!   Stochastic gradients add Gaussian noise.
//! - [`RegLogisticObjective`]: logistic loss over a node's local samples
//!   plus the non-convex penalty `λ Σ_k x_k² / (1 + x_k²)`. Stochastic
//!   gradients use one uniformly drawn local sample.
//! - [`QuadraticObjective`]: `½ xᵀA_i x − b_iᵀx` with Gaussian gradient
//!   noise, mostly for tests because its optimum is available in closed form.
//!
//! Randomness is replayable: the sample used by node `i` in round `t` is a
//! pure function of `(oracle seed, i, t)`.

mod data;

pub use data::{
    load_csv, load_csv_path, parse_idx_images, parse_idx_labels, partition_dataset,
    to_binary_labels, two_class_gaussian, LabeledPoint,
};

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("point has dimension {got}, objective expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("node {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("need at least {needed} samples for {n} nodes, got {got}")]
    TooFewSamples { needed: usize, n: usize, got: usize },
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error("dataset: {0}")]
    Data(String),
}

/// Heterogeneity profile of the `a_i` in [`PlSineObjective`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AScheme {
    /// Centered arithmetic sequence `i − (n−1)/2`.
    Linear,
    /// Standard normal draws, mean-centered.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlSineObjective {
    a: Vec<f64>,
    noise_sigma: f64,
}

impl PlSineObjective {
    pub fn new(a: Vec<f64>, noise_sigma: f64) -> Result<Self, OracleError> {
        if a.len() < 2 {
            return Err(OracleError::InvalidObjective(format!(
                "pl-sine needs at least 2 nodes, got {}",
                a.len()
            )));
        }
        let sum: f64 = a.iter().sum();
        if sum.abs() > 1e-12 {
            return Err(OracleError::InvalidObjective(format!(
                "heterogeneity coefficients must sum to 0, sum is {sum:e}"
            )));
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(OracleError::InvalidObjective(format!(
                "noise sigma must be finite and non-negative, got {noise_sigma}"
            )));
        }
        Ok(Self { a, noise_sigma })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    fn value(&self, i: usize, x: f64) -> f64 {
        let s = x.sin();
        x * x + 3.0 * s * s + self.a[i] * x.cos()
    }

    fn gradient(&self, i: usize, x: f64) -> f64 {
        let (s, c) = x.sin_cos();
        2.0 * x + 6.0 * s * c - self.a[i] * s
    }
}

/// Builds the PL test problem: `a` follows `scheme`, is mean-centered and
/// scaled to `max |a_i| = 1`.
pub fn make_pl_sine<R: Rng + ?Sized>(
    n: usize,
    sigma: f64,
    scheme: AScheme,
    rng: &mut R,
) -> Result<PlSineObjective, OracleError> {
    if n < 2 {
        return Err(OracleError::InvalidObjective(format!(
            "pl-sine needs at least 2 nodes, got {n}"
        )));
    }
    let raw: Vec<f64> = match scheme {
        AScheme::Linear => (0..n).map(|i| i as f64 - (n as f64 - 1.0) / 2.0).collect(),
        AScheme::Gaussian => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
    };
    let mean = raw.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    let scale = centered.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut a: Vec<f64> = if scale > 0.0 {
        centered.iter().map(|v| v / scale).collect()
    } else {
        centered
    };
    // Push the rounding residue onto the last coordinate.
    let residue: f64 = a.iter().sum();
    a[n - 1] -= residue;
    PlSineObjective::new(a, sigma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegLogisticObjective {
    nodes: Vec<Vec<LabeledPoint>>,
    lambda: f64,
    dim: usize,
}

impl RegLogisticObjective {
    /// Labels must already be in `{−1, +1}`, see [`to_binary_labels`].
    pub fn new(nodes: Vec<Vec<LabeledPoint>>, lambda: f64) -> Result<Self, OracleError> {
        if nodes.len() < 2 {
            return Err(OracleError::InvalidObjective(
                "logistic objective needs at least 2 nodes".into(),
            ));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(OracleError::InvalidObjective(format!(
                "regularization must be non-negative, got {lambda}"
            )));
        }
        let dim = nodes
            .iter()
            .flatten()
            .next()
            .map(|p| p.features.len())
            .ok_or_else(|| OracleError::InvalidObjective("no samples".into()))?;
        for (i, local) in nodes.iter().enumerate() {
            if local.is_empty() {
                return Err(OracleError::InvalidObjective(format!("node {i} owns no samples")));
            }
            for p in local {
                if p.features.len() != dim {
                    return Err(OracleError::DimensionMismatch {
                        expected: dim,
                        got: p.features.len(),
                    });
                }
                if p.label != 1.0 && p.label != -1.0 {
                    return Err(OracleError::InvalidObjective(format!(
                        "label {} is not in {{-1, +1}}",
                        p.label
                    )));
                }
            }
        }
        Ok(Self { nodes, lambda, dim })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn local_samples(&self, i: usize) -> &[LabeledPoint] {
        &self.nodes[i]
    }

    fn regularizer_value(&self, x: &[f64]) -> f64 {
        self.lambda * x.iter().map(|v| v * v / (1.0 + v * v)).sum::<f64>()
    }

    fn add_regularizer_gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            let q = 1.0 + v * v;
            *o += 2.0 * self.lambda * v / (q * q);
        }
    }

    fn sample_loss(p: &LabeledPoint, x: &[f64]) -> f64 {
        // ln(1 + exp(−s)) evaluated without overflow.
        let s = p.label * dot(&p.features, x);
        if s < 0.0 {
            -s + s.exp().ln_1p()
        } else {
            (-s).exp().ln_1p()
        }
    }

    fn add_sample_gradient(p: &LabeledPoint, x: &[f64], scale: f64, out: &mut [f64]) {
        let s = p.label * dot(&p.features, x);
        let coef = -scale * p.label / (1.0 + s.exp());
        for (o, m) in out.iter_mut().zip(&p.features) {
            *o += coef * m;
        }
    }
}

/// `f_i(x) = ½ xᵀA_i x − b_iᵀx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    dim: usize,
    // Row-major d×d per node.
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    noise_sigma: f64,
    minimizer: Vec<f64>,
}

impl QuadraticObjective {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, noise_sigma: f64) -> Result<Self, OracleError> {
        let n = a.len();
        if n < 2 || b.len() != n {
            return Err(OracleError::InvalidObjective(
                "quadratic needs matching A and b lists for at least 2 nodes".into(),
            ));
        }
        let dim = b[0].len();
        if dim == 0 {
            return Err(OracleError::InvalidObjective("dimension must be positive".into()));
        }
        let mut sum_a = DMatrix::<f64>::zeros(dim, dim);
        let mut sum_b = DVector::<f64>::zeros(dim);
        for (ai, bi) in a.iter().zip(&b) {
            if ai.len() != dim * dim || bi.len() != dim {
                return Err(OracleError::DimensionMismatch {
                    expected: dim,
                    got: bi.len(),
                });
            }
            let m = DMatrix::from_row_slice(dim, dim, ai);
            if (&m - m.transpose()).amax() > 1e-12 {
                return Err(OracleError::InvalidObjective("A_i must be symmetric".into()));
            }
            if m.clone().symmetric_eigenvalues().min() < -1e-12 {
                return Err(OracleError::InvalidObjective("A_i must be PSD".into()));
            }
            sum_a += m;
            sum_b += DVector::from_column_slice(bi);
        }
        let minimizer = sum_a
            .lu()
            .solve(&sum_b)
            .ok_or_else(|| OracleError::InvalidObjective("Σ A_i is singular".into()))?;
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(OracleError::InvalidObjective(format!(
                "noise sigma must be finite and non-negative, got {noise_sigma}"
            )));
        }
        Ok(Self {
            dim,
            a,
            b,
            noise_sigma,
            minimizer: minimizer.iter().copied().collect(),
        })
    }

    /// `A_i = M Mᵀ / d + ½ I` with Gaussian `M`, `b_i ~ N(0, I)`.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        dim: usize,
        noise_sigma: f64,
        rng: &mut R,
    ) -> Result<Self, OracleError> {
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            let m = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
            let mut ai = &m * m.transpose() / dim as f64;
            for k in 0..dim {
                ai[(k, k)] += 0.5;
            }
            // Exact symmetry for the validation in `new`.
            let ai = (&ai + ai.transpose()) * 0.5;
            a.push(ai.transpose().as_slice().to_vec());
            b.push((0..dim).map(|_| rng.sample(StandardNormal)).collect());
        }
        Self::new(a, b, noise_sigma)
    }

    /// Global minimizer of `(1/n) Σ f_i`.
    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn hessian(&self, i: usize) -> &[f64] {
        &self.a[i]
    }

    fn value(&self, i: usize, x: &[f64]) -> f64 {
        let d = self.dim;
        let a = &self.a[i];
        let quad: f64 = (0..d)
            .map(|r| x[r] * dot(&a[r * d..(r + 1) * d], x))
            .sum();
        0.5 * quad - dot(&self.b[i], x)
    }

    fn gradient(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(&self.a[i][r * d..(r + 1) * d], x) - self.b[i][r];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    PlSine(PlSineObjective),
    RegLogistic(RegLogisticObjective),
    Quadratic(QuadraticObjective),
}

impl Objective {
    pub fn n(&self) -> usize {
        match self {
            Objective::PlSine(o) => o.a.len(),
            Objective::RegLogistic(o) => o.nodes.len(),
            Objective::Quadratic(o) => o.a.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Objective::PlSine(_) => 1,
            Objective::RegLogistic(o) => o.dim,
            Objective::Quadratic(o) => o.dim,
        }
    }

    /// Global infimum when it is known in closed form.
    pub fn optimum_value(&self) -> Option<f64> {
        match self {
            Objective::PlSine(_) => Some(0.0),
            Objective::RegLogistic(_) => None,
            Objective::Quadratic(o) => Some(self.global_value_unchecked(&o.minimizer)),
        }
    }

    fn check(&self, i: usize, x: &[f64]) -> Result<(), OracleError> {
        let n = self.n();
        if i >= n {
            return Err(OracleError::NodeOutOfRange { node: i, n });
        }
        if x.len() != self.dim() {
            return Err(OracleError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn local_value(&self, i: usize, x: &[f64]) -> Result<f64, OracleError> {
        self.check(i, x)?;
        Ok(self.local_value_unchecked(i, x))
    }

    fn local_value_unchecked(&self, i: usize, x: &[f64]) -> f64 {
        match self {
            Objective::PlSine(o) => o.value(i, x[0]),
            Objective::RegLogistic(o) => {
                o.nodes[i]
                    .iter()
                    .map(|p| RegLogisticObjective::sample_loss(p, x))
                    .sum::<f64>()
                    + o.regularizer_value(x)
            }
            Objective::Quadratic(o) => o.value(i, x),
        }
    }

    /// Exact `∇f_i(x)` written into `out`.
    pub fn local_gradient_into(
        &self,
        i: usize,
        x: &[f64],
        out: &mut [f64],
    ) -> Result<(), OracleError> {
        self.check(i, x)?;
        if out.len() != self.dim() {
            return Err(OracleError::DimensionMismatch {
                expected: self.dim(),
                got: out.len(),
            });
        }
        self.local_gradient_unchecked(i, x, out);
        Ok(())
    }

    pub fn local_gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        let mut out = vec![0.0; self.dim()];
        self.local_gradient_into(i, x, &mut out)?;
        Ok(out)
    }

    fn local_gradient_unchecked(&self, i: usize, x: &[f64], out: &mut [f64]) {
        match self {
            Objective::PlSine(o) => out[0] = o.gradient(i, x[0]),
            Objective::RegLogistic(o) => {
                out.iter_mut().for_each(|v| *v = 0.0);
                for p in &o.nodes[i] {
                    RegLogisticObjective::add_sample_gradient(p, x, 1.0, out);
                }
                o.add_regularizer_gradient(x, out);
            }
            Objective::Quadratic(o) => o.gradient(i, x, out),
        }
    }

    /// `(1/n) Σ_i f_i(x)`.
    pub fn global_value(&self, x: &[f64]) -> Result<f64, OracleError> {
        self.check(0, x)?;
        Ok(self.global_value_unchecked(x))
    }

    fn global_value_unchecked(&self, x: &[f64]) -> f64 {
        let n = self.n();
        (0..n).map(|i| self.local_value_unchecked(i, x)).sum::<f64>() / n as f64
    }

    /// `(1/n) Σ_i ∇f_i(x)`.
    pub fn global_gradient(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        self.check(0, x)?;
        let n = self.n();
        let d = self.dim();
        let mut acc = vec![0.0; d];
        let mut buf = vec![0.0; d];
        for i in 0..n {
            self.local_gradient_unchecked(i, x, &mut buf);
            acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
        }
        acc.iter_mut().for_each(|a| *a /= n as f64);
        Ok(acc)
    }
}

/// Which sample an oracle query uses within round `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Draw {
    /// The round's sample `ξ_t^i`.
    Fresh,
    /// The second evaluation of the momentum update. Datapoint oracles reuse
    /// `ξ_t^i`; additive-noise oracles reuse the same noise vector when
    /// `shared_noise` is on and draw an independent one otherwise.
    ReusePrior,
}

/// Replayable SFO over an [`Objective`] with a query counter.
#[derive(Debug)]
pub struct StochasticOracle<'a> {
    objective: &'a Objective,
    seed: u64,
    shared_noise: bool,
    exact: bool,
    sfo: AtomicU64,
}

impl<'a> StochasticOracle<'a> {
    pub fn new(objective: &'a Objective, seed: u64) -> Self {
        Self {
            objective,
            seed,
            shared_noise: true,
            exact: false,
            sfo: AtomicU64::new(0),
        }
    }

    /// Noise-free, full-batch oracle: every query returns `∇f_i(x)`.
    pub fn exact(objective: &'a Objective) -> Self {
        Self {
            exact: true,
            ..Self::new(objective, 0)
        }
    }

    pub fn with_shared_noise(mut self, shared: bool) -> Self {
        self.shared_noise = shared;
        self
    }

    pub fn objective(&self) -> &'a Objective {
        self.objective
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shared_noise(&self) -> bool {
        self.shared_noise
    }

    pub fn sfo_count(&self) -> u64 {
        self.sfo.load(Ordering::Relaxed)
    }

    /// Stochastic gradient of node `i` in round `t`, written into `out`.
    pub fn stochastic_gradient_into(
        &self,
        i: usize,
        t: usize,
        x: &[f64],
        draw: Draw,
        out: &mut [f64],
    ) -> Result<(), OracleError> {
        let stream = match draw {
            Draw::Fresh => 0,
            Draw::ReusePrior if self.reuses_sample() => 0,
            Draw::ReusePrior => 1,
        };
        let seed = rng::derive(self.seed, &[rng::TAG_STEP, i as u64, t as u64, stream]);
        self.sample_into(i, x, seed, out)
    }

    pub fn stochastic_gradient(
        &self,
        i: usize,
        t: usize,
        x: &[f64],
        draw: Draw,
    ) -> Result<Vec<f64>, OracleError> {
        let mut out = vec![0.0; self.objective.dim()];
        self.stochastic_gradient_into(i, t, x, draw, &mut out)?;
        Ok(out)
    }

    /// The `r`-th sample of node `i`'s initial mini-batch.
    pub fn init_gradient_into(
        &self,
        i: usize,
        r: usize,
        x: &[f64],
        out: &mut [f64],
    ) -> Result<(), OracleError> {
        let seed = rng::derive(self.seed, &[rng::TAG_INIT, i as u64, r as u64]);
        self.sample_into(i, x, seed, out)
    }

    fn reuses_sample(&self) -> bool {
        self.shared_noise || matches!(self.objective, Objective::RegLogistic(_))
    }

    fn sample_into(
        &self,
        i: usize,
        x: &[f64],
        seed: u64,
        out: &mut [f64],
    ) -> Result<(), OracleError> {
        let obj = self.objective;
        obj.check(i, x)?;
        if out.len() != obj.dim() {
            return Err(OracleError::DimensionMismatch {
                expected: obj.dim(),
                got: out.len(),
            });
        }
        self.sfo.fetch_add(1, Ordering::Relaxed);
        if self.exact {
            obj.local_gradient_unchecked(i, x, out);
            return Ok(());
        }
        match obj {
            Objective::PlSine(PlSineObjective { noise_sigma, .. })
            | Objective::Quadratic(QuadraticObjective { noise_sigma, .. }) => {
                obj.local_gradient_unchecked(i, x, out);
                if *noise_sigma > 0.0 {
                    let mut r = rng::stream(seed);
                    for o in out.iter_mut() {
                        let e: f64 = r.sample(StandardNormal);
                        *o += noise_sigma * e;
                    }
                }
            }
            Objective::RegLogistic(o) => {
                let local = &o.nodes[i];
                let k = rng::stream(seed).random_range(0..local.len());
                out.iter_mut().for_each(|v| *v = 0.0);
                // Scaled by the local sample count so the draw is unbiased
                // for the summed local loss.
                RegLogisticObjective::add_sample_gradient(&local[k], x, local.len() as f64, out);
                o.add_regularizer_gradient(x, out);
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn pl(a: Vec<f64>, sigma: f64) -> Objective {
        Objective::PlSine(PlSineObjective::new(a, sigma).unwrap())
    }

    fn logistic_fixture() -> Objective {
        let mut r = rng::stream(99);
        let pts = two_class_gaussian(24, 4, 2.0, &mut r);
        let nodes = partition_dataset(pts, 3).unwrap();
        Objective::RegLogistic(RegLogisticObjective::new(nodes, 0.3).unwrap())
    }

    fn central_difference(obj: &Objective, i: usize, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|k| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[k] += h;
                xm[k] -= h;
                (obj.local_value(i, &xp).unwrap() - obj.local_value(i, &xm).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn pl_sine_gradient_values() {
        let obj = pl(vec![-0.7, 0.2, 0.5], 0.5);
        for i in 0..3 {
            assert_eq!(obj.local_gradient(i, &[0.0]).unwrap(), vec![0.0]);
        }
        let flat = pl(vec![0.0, 0.0], 0.0);
        let g = flat.local_gradient(0, &[FRAC_PI_2]).unwrap()[0];
        assert!((g - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn pl_sine_global_ignores_heterogeneity() {
        let a = pl(vec![-1.0, 0.25, 0.75], 0.5);
        let b = pl(vec![0.5, -0.5, 0.0], 0.5);
        assert_eq!(a.global_value(&[0.0]).unwrap(), 0.0);
        for x in [-2.0f64, -0.3, 0.9, 4.1] {
            let expect = x * x + 3.0 * x.sin().powi(2);
            assert!((a.global_value(&[x]).unwrap() - expect).abs() < 1e-12);
            assert!((b.global_value(&[x]).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn global_gradient_is_mean_of_local() {
        for obj in [logistic_fixture(), pl(vec![-1.0, 1.0], 0.1)] {
            let d = obj.dim();
            let x: Vec<f64> = (0..d).map(|k| 0.3 * k as f64 - 0.4).collect();
            let g = obj.global_gradient(&x).unwrap();
            for (k, gk) in g.iter().enumerate() {
                let mean = (0..obj.n())
                    .map(|i| obj.local_gradient(i, &x).unwrap()[k])
                    .sum::<f64>()
                    / obj.n() as f64;
                assert!((gk - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut r = rng::stream(5);
        let quad = Objective::Quadratic(QuadraticObjective::random(3, 4, 0.0, &mut r).unwrap());
        let sine = pl(vec![-0.6, 0.1, 0.5], 0.0);
        let logi = logistic_fixture();
        for obj in [&quad, &sine, &logi] {
            for _ in 0..20 {
                let x: Vec<f64> = (0..obj.dim()).map(|_| r.random_range(-2.0..2.0)).collect();
                for i in 0..obj.n() {
                    let exact = obj.local_gradient(i, &x).unwrap();
                    let fd = central_difference(obj, i, &x, 1e-5);
                    for (e, f) in exact.iter().zip(&fd) {
                        assert!((e - f).abs() < 1e-4, "{e} vs {f}");
                        assert!((e - f).abs() <= 1e-5 * e.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn dimension_and_range_errors() {
        let obj = pl(vec![-1.0, 1.0], 0.5);
        assert_eq!(
            obj.local_gradient(0, &[1.0, 2.0]),
            Err(OracleError::DimensionMismatch { expected: 1, got: 2 })
        );
        let oracle = StochasticOracle::new(&obj, 1);
        assert_eq!(
            oracle.stochastic_gradient(2, 0, &[0.0], Draw::Fresh),
            Err(OracleError::NodeOutOfRange { node: 2, n: 2 })
        );
    }

    #[test]
    fn invalid_objectives_rejected() {
        assert!(PlSineObjective::new(vec![1.0, 1.0], 0.5).is_err());
        assert!(PlSineObjective::new(vec![0.0], 0.5).is_err());
        assert!(PlSineObjective::new(vec![-1.0, 1.0], -0.1).is_err());
        let p = LabeledPoint {
            features: vec![1.0],
            label: 1.0,
        };
        assert!(RegLogisticObjective::new(vec![vec![p.clone()], vec![]], 0.1).is_err());
        assert!(RegLogisticObjective::new(vec![vec![p.clone()], vec![p.clone()]], -1.0).is_err());
        let bad_label = LabeledPoint {
            features: vec![1.0],
            label: 0.0,
        };
        assert!(RegLogisticObjective::new(vec![vec![p], vec![bad_label]], 0.1).is_err());
        let asym = vec![vec![1.0, 2.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]];
        assert!(QuadraticObjective::new(asym, vec![vec![0.0; 2]; 2], 0.0).is_err());
        let indefinite = vec![vec![-1.0, 0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]];
        assert!(QuadraticObjective::new(indefinite, vec![vec![0.0; 2]; 2], 0.0).is_err());
    }

    #[test]
    fn make_pl_sine_schemes() {
        let mut r = rng::stream(0);
        let lin = make_pl_sine(4, 0.5, AScheme::Linear, &mut r).unwrap();
        let expect = [-1.5, -0.5, 0.5, 1.5].map(|v| v / 1.5);
        for (a, e) in lin.coefficients().iter().zip(expect) {
            assert!((a - e).abs() < 1e-15);
        }
        assert_eq!(lin.noise_sigma(), 0.5);
        for n in [2, 3, 17, 100] {
            for scheme in [AScheme::Linear, AScheme::Gaussian] {
                let o = make_pl_sine(n, 0.5, scheme, &mut r).unwrap();
                assert!(o.coefficients().iter().sum::<f64>().abs() <= 1e-12);
            }
        }
        assert!(make_pl_sine(1, 0.5, AScheme::Linear, &mut r).is_err());
    }

    #[test]
    fn zero_noise_oracle_is_exact() {
        let obj = pl(vec![-0.4, 0.4], 0.0);
        let oracle = StochasticOracle::new(&obj, 3);
        for t in 0..5 {
            let g = oracle.stochastic_gradient(1, t, &[0.8], Draw::Fresh).unwrap();
            assert_eq!(g, obj.local_gradient(1, &[0.8]).unwrap());
        }
    }

    #[test]
    fn replayable_queries() {
        let obj = logistic_fixture();
        let x = vec![0.1, -0.2, 0.3, 0.0];
        let a = StochasticOracle::new(&obj, 77);
        let b = StochasticOracle::new(&obj, 77);
        for t in 0..10 {
            let ga = a.stochastic_gradient(2, t, &x, Draw::Fresh).unwrap();
            assert_eq!(ga, a.stochastic_gradient(2, t, &x, Draw::Fresh).unwrap());
            assert_eq!(ga, b.stochastic_gradient(2, t, &x, Draw::Fresh).unwrap());
            // Datapoint oracles always reuse ξ_t for the second evaluation.
            assert_eq!(ga, a.stochastic_gradient(2, t, &x, Draw::ReusePrior).unwrap());
        }
    }

    #[test]
    fn noise_sharing_flag() {
        let obj = pl(vec![-1.0, 1.0], 0.5);
        let shared = StochasticOracle::new(&obj, 8);
        let fresh = shared.stochastic_gradient(0, 4, &[0.3], Draw::Fresh).unwrap()[0];
        let again = shared.stochastic_gradient(0, 4, &[0.3], Draw::ReusePrior).unwrap()[0];
        assert_eq!(fresh, again);
        let indep = StochasticOracle::new(&obj, 8).with_shared_noise(false);
        let other = indep.stochastic_gradient(0, 4, &[0.3], Draw::ReusePrior).unwrap()[0];
        assert_ne!(fresh, other);
        assert_eq!(fresh, indep.stochastic_gradient(0, 4, &[0.3], Draw::Fresh).unwrap()[0]);
    }

    #[test]
    fn sfo_counter_counts_queries() {
        let obj = pl(vec![-1.0, 1.0], 0.5);
        let oracle = StochasticOracle::new(&obj, 1);
        let mut out = [0.0];
        for t in 0..7 {
            oracle.stochastic_gradient_into(0, t, &[0.0], Draw::Fresh, &mut out).unwrap();
        }
        oracle.init_gradient_into(1, 0, &[0.0], &mut out).unwrap();
        assert_eq!(oracle.sfo_count(), 8);
        // Failed queries are not charged.
        assert!(oracle.stochastic_gradient(5, 0, &[0.0], Draw::Fresh).is_err());
        assert_eq!(oracle.sfo_count(), 8);
    }

    #[test]
    fn logistic_sample_average_is_exact_gradient() {
        // Averaging the scaled per-sample gradient over every local sample
        // reproduces the summed local gradient.
        let obj = logistic_fixture();
        let Objective::RegLogistic(o) = &obj else { unreachable!() };
        let x = [0.5, -0.1, 0.2, -0.7];
        for i in 0..obj.n() {
            let local = o.local_samples(i);
            let mut acc = [0.0; 4];
            for p in local {
                let mut g = vec![0.0; 4];
                RegLogisticObjective::add_sample_gradient(p, &x, local.len() as f64, &mut g);
                o.add_regularizer_gradient(&x, &mut g);
                acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b / local.len() as f64);
            }
            let exact = obj.local_gradient(i, &x).unwrap();
            for (a, e) in acc.iter().zip(&exact) {
                assert!((a - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadratic_minimizer_is_stationary() {
        let mut r = rng::stream(12);
        let obj = Objective::Quadratic(QuadraticObjective::random(4, 3, 0.0, &mut r).unwrap());
        let Objective::Quadratic(q) = &obj else { unreachable!() };
        let g = obj.global_gradient(q.minimizer()).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
        let f_star = obj.optimum_value().unwrap();
        assert!(obj.global_value(&[1.0, 1.0, 1.0]).unwrap() >= f_star);
    }
}
