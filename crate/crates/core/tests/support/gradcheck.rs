//! Finite-difference gradient check against an independent forward pass.

use beampredict_core::mlp::{MlpModel, Workspace, K};
use beampredict_core::rng::rng_from_seed;
use rand::seq::index::sample;
use rand::Rng;

/// Inputs with a hidden pre-activation closer to zero than this are
/// redrawn: the ReLU kink makes the finite difference meaningless there.
const KINK_MARGIN: f64 = 2e-2;
const H: f64 = 1e-3;
/// Gradients smaller than this are compared in absolute terms.
pub const REL_FLOOR: f64 = 1e-6;

/// Plain-loop forward pass: logits and hidden pre-activations.
pub fn forward(m: &MlpModel, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut a = x.to_vec();
    let mut pre_hidden = Vec::new();
    let mut off = 0;
    for l in 0..m.dims.len() - 1 {
        let (din, dout) = (m.dims[l], m.dims[l + 1]);
        let w = &m.params[off..off + din * dout];
        let b = &m.params[off + din * dout..off + din * dout + dout];
        off += din * dout + dout;
        let mut z: Vec<f64> = b.to_vec();
        for i in 0..din {
            for o in 0..dout {
                z[o] += a[i] * w[i * dout + o];
            }
        }
        if l + 2 < m.dims.len() {
            pre_hidden.extend_from_slice(&z);
            a = z.iter().map(|v| v.max(0.0)).collect();
        } else {
            a = z;
        }
    }
    (a, pre_hidden)
}

/// Weighted cross-entropy through a log-sum-exp.
pub fn loss(m: &MlpModel, x: &[f64], labels: &[usize; K], w: &[f64; K]) -> f64 {
    let (z, _) = forward(m, x);
    let mx = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = mx + z.iter().map(|v| (v - mx).exp()).sum::<f64>().ln();
    (0..K).map(|k| -w[k] * (z[labels[k]] - lse)).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct GradCheck {
    pub draws: usize,
    pub params: usize,
    pub max_rel_err: f64,
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

/// Backprop vs five-point central differences, one random (input, label
/// set, initialization) per draw.
// Parameters are perturbed in place, so the loop indexes rather than iterates.
#[allow(clippy::needless_range_loop)]
pub fn run(dims: &[usize], draws: usize, seed: u64, weights: &[f64; K]) -> GradCheck {
    let mut rng = rng_from_seed(seed);
    let classes = *dims.last().unwrap();
    let mut worst: f64 = 0.0;
    let mut ws = Workspace::default();
    let mut grad = Vec::new();
    let mut model = MlpModel::init(dims, 0).unwrap();
    for d in 0..draws {
        model = MlpModel::init(dims, seed ^ (d as u64 + 1)).unwrap();
        // Non-zero biases so their gradients are exercised too.
        for p in model.params.iter_mut() {
            if *p == 0.0 {
                *p = rng.random_range(-0.5..0.5);
            }
        }
        let x = loop {
            let x: Vec<f64> = (0..dims[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (_, pre) = forward(&model, &x);
            if pre.iter().all(|v| v.abs() > KINK_MARGIN) {
                break x;
            }
        };
        let idx = sample(&mut rng, classes, K);
        let labels: [usize; K] = core::array::from_fn(|k| idx.index(k));
        model.loss_and_grad(&x, &[labels], weights, &mut grad, &mut ws).unwrap();
        for i in 0..model.params.len() {
            let base = model.params[i];
            let mut at = |delta: f64| {
                model.params[i] = base + delta;
                let v = loss(&model, &x, &labels, weights);
                model.params[i] = base;
                v
            };
            let fd = (-at(2.0 * H) + 8.0 * at(H) - 8.0 * at(-H) + at(-2.0 * H)) / (12.0 * H);
            worst = worst.max(relative_error(grad[i], fd));
        }
    }
    GradCheck {
        draws,
        params: model.params.len(),
        max_rel_err: worst,
    }
}
