//! Browser demo: three interactive views backed by the simulator.
//!
//! - PL sine gap curves for Push-ASGD and Push-SGD on the switching
//!   ER/ring/reversed-ring network.
//! - Push-sum averaging with no descent: max deviation from the initial
//!   mean and the φ-weighted deviation per round.
//! - The column-stochastic mixing matrix of a given round.
//!
//! Each view has a plain Rust function returning JSON (tested on the host)
//! and a thin `#[wasm_bindgen]` export.

use serde_json::json;
use wasm_bindgen::prelude::*;

use push_asgd::algo::{self, AlgoConfig, SwarmState, Variant};
use push_asgd::diagnostics::{l_norm_sq, phi_step, uniform};
use push_asgd::graph::TopologySchedule;
use push_asgd::oracle::{make_pl_sine, AScheme, Objective, QuadraticObjective, StochasticOracle};
use push_asgd::rng;

/// Largest network the page lets you build.
pub const MAX_NODES: usize = 200;
pub const MAX_ITERATIONS: usize = 20_000;

fn check(n: usize, p: f64, iterations: usize) -> Result<(), String> {
    if !(2..=MAX_NODES).contains(&n) {
        return Err(format!("n must lie in 2..={MAX_NODES}"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err("p must lie in (0, 1]".into());
    }
    if iterations > MAX_ITERATIONS {
        return Err(format!("at most {MAX_ITERATIONS} iterations"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn pl_sine_curves_json(
    n: usize,
    p: f64,
    alpha: f64,
    beta: f64,
    x0: f64,
    iterations: usize,
    stride: usize,
    seed: u64,
) -> Result<String, String> {
    check(n, p, iterations)?;
    let stride = stride.max(1);
    let obj = Objective::PlSine(
        make_pl_sine(n, 0.5, AScheme::Linear, &mut rng::stream(0)).map_err(|e| e.to_string())?,
    );
    let schedule = TopologySchedule::er_ring_cycle(n, p, seed).map_err(|e| e.to_string())?;
    let mut curves = Vec::new();
    let mut ts = Vec::new();
    for variant in [Variant::PushAsgd, Variant::PushSgd] {
        let oracle = StochasticOracle::new(&obj, rng::derive(seed, &[0]));
        let cfg = AlgoConfig::new(variant, alpha, beta, iterations).with_x0(vec![x0]);
        let mut gaps = Vec::new();
        ts.clear();
        let outcome = algo::run(&oracle, &cfg, &schedule, &mut |s: &SwarmState| {
            if s.t().is_multiple_of(stride) || s.t() == iterations {
                ts.push(s.t());
                gaps.push(obj.global_value(&s.x_bar()).unwrap_or(f64::NAN));
            }
        });
        let diverged = outcome.err().map(|e| e.to_string());
        curves.push(json!({ "variant": variant.name(), "gap": gaps, "diverged": diverged }));
    }
    Ok(json!({ "t": ts, "curves": curves }).to_string())
}

pub fn consensus_json(n: usize, p: f64, rounds: usize, seed: u64) -> Result<String, String> {
    check(n, p, rounds)?;
    let d = 1;
    let obj = Objective::Quadratic(
        QuadraticObjective::random(n, d, 0.0, &mut rng::stream(0)).map_err(|e| e.to_string())?,
    );
    let oracle = StochasticOracle::exact(&obj);
    let schedule = TopologySchedule::er_ring_cycle(n, p, seed).map_err(|e| e.to_string())?;
    let cfg = AlgoConfig::new(Variant::PushSgd, 0.0, 0.0, rounds);
    let mut r = rng::derived_stream(seed, &[1]);
    let points: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut r, -1.0..1.0)).collect();
    let mean = points.iter().sum::<f64>() / n as f64;
    let state = SwarmState::init_with_points(&oracle, &cfg, points).map_err(|e| e.to_string())?;
    let mut zs = Vec::new();
    let mut ys = Vec::new();
    algo::run_from(state, &oracle, &cfg, &schedule, &mut |s: &SwarmState| {
        zs.push(s.z().to_vec());
        ys.push(s.y().to_vec());
    })
    .map_err(|e| e.to_string())?;
    let mut phis = vec![uniform(n)];
    for t in (0..rounds).rev() {
        let next = phi_step(&schedule.mixing_at(t), &ys[t], &ys[t + 1], phis.last().expect("non-empty"));
        phis.push(next);
    }
    phis.reverse();
    let max_dev: Vec<f64> = zs
        .iter()
        .map(|z| z.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max))
        .collect();
    let weighted: Vec<f64> = zs.iter().zip(&phis).map(|(z, phi)| l_norm_sq(z, d, phi).sqrt()).collect();
    Ok(json!({ "max_dev": max_dev, "weighted_dev": weighted }).to_string())
}

pub fn mixing_matrix_json(n: usize, p: f64, seed: u64, round: usize) -> Result<String, String> {
    check(n, p, 0)?;
    let schedule = TopologySchedule::er_ring_cycle(n, p, seed).map_err(|e| e.to_string())?;
    let w = schedule.mixing_at(round);
    let label = ["Erdős–Rényi", "directed ring", "reversed ring"][round % 3];
    Ok(json!({ "n": n, "graph": label, "weights": w.as_dense() }).to_string())
}

fn to_js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = plSineCurves)]
#[allow(clippy::too_many_arguments)]
pub fn pl_sine_curves(
    n: usize,
    p: f64,
    alpha: f64,
    beta: f64,
    x0: f64,
    iterations: usize,
    stride: usize,
    seed: u32,
) -> Result<String, JsError> {
    to_js(pl_sine_curves_json(n, p, alpha, beta, x0, iterations, stride, u64::from(seed)))
}

#[wasm_bindgen(js_name = consensus)]
pub fn consensus(n: usize, p: f64, rounds: usize, seed: u32) -> Result<String, JsError> {
    to_js(consensus_json(n, p, rounds, u64::from(seed)))
}

#[wasm_bindgen(js_name = mixingMatrix)]
pub fn mixing_matrix(n: usize, p: f64, seed: u32, round: usize) -> Result<String, JsError> {
    to_js(mixing_matrix_json(n, p, u64::from(seed), round))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn curves_have_matching_lengths() {
        let v: Value = serde_json::from_str(&pl_sine_curves_json(10, 0.3, 0.01, 0.05, 3.0, 100, 10, 1).unwrap()).unwrap();
        let t = v["t"].as_array().unwrap().len();
        assert_eq!(t, 11);
        for c in v["curves"].as_array().unwrap() {
            assert_eq!(c["gap"].as_array().unwrap().len(), t);
            assert!(c["diverged"].is_null());
        }
        let first = v["curves"][0]["gap"][0].as_f64().unwrap();
        let last = v["curves"][0]["gap"][10].as_f64().unwrap();
        assert!(last < first);
    }

    #[test]
    fn divergence_is_reported() {
        let v: Value = serde_json::from_str(&pl_sine_curves_json(5, 0.5, 50.0, 0.1, 3.0, 200, 1, 1).unwrap()).unwrap();
        assert!(v["curves"][0]["diverged"].is_string());
    }

    #[test]
    fn consensus_decays() {
        let v: Value = serde_json::from_str(&consensus_json(12, 0.2, 300, 4).unwrap()).unwrap();
        let dev = v["max_dev"].as_array().unwrap();
        assert_eq!(dev.len(), 301);
        assert!(dev[300].as_f64().unwrap() < 1e-8);
        assert_eq!(v["weighted_dev"].as_array().unwrap().len(), 301);
    }

    #[test]
    fn matrix_columns_sum_to_one() {
        let v: Value = serde_json::from_str(&mixing_matrix_json(6, 0.4, 2, 1).unwrap()).unwrap();
        let w: Vec<f64> = v["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        for j in 0..6 {
            let s: f64 = (0..6).map(|i| w[i * 6 + j]).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(v["graph"], "directed ring");
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(consensus_json(1, 0.2, 10, 0).is_err());
        assert!(mixing_matrix_json(10, 0.0, 0, 0).is_err());
        assert!(pl_sine_curves_json(10, 0.2, 0.01, 0.1, 1.0, MAX_ITERATIONS + 1, 1, 0).is_err());
    }
}
