//! Fully connected beam predictor: forward pass, weighted cross-entropy,
//! backprop, Adam and a multi-step learning-rate schedule.
//!
//! Parameters live in one flat vector. Layer `l` stores its weight matrix
//! row-major as `in x out` followed by `out` biases.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math;
use crate::rng::{self, stream};
use crate::{Error, Result};

/// Labels per example.
pub const K: usize = 5;

pub const PAPER_DIMS: [usize; 5] = [2, 128, 128, 128, 1024];

pub const LOSS_WEIGHTS: [f64; K] = [0.5, 0.2, 0.15, 0.075, 0.075];

/// Lower clamp on probabilities inside the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Sum accumulated smallest-first.
pub fn weight_sum(w: &[f64; K]) -> f64 {
    let mut s = *w;
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    s.iter().sum()
}

/// `-sum w ln w`, the smallest loss any probability vector can reach.
pub fn loss_lower_bound(w: &[f64; K]) -> f64 {
    -w.iter().filter(|&&x| x > 0.0).map(|&x| x * math::ln(x)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub dims: Vec<usize>,
    pub params: Vec<f64>,
    pub seed: u64,
}

impl MlpModel {
    fn check_dims(dims: &[usize]) -> Result<()> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::param("dims", format!("need at least two positive layer sizes, got {dims:?}")));
        }
        if *dims.last().unwrap() < K {
            return Err(Error::param("dims", format!("output must have at least {K} classes")));
        }
        Ok(())
    }

    pub fn param_count(dims: &[usize]) -> usize {
        dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Self::check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            params: vec![0.0; Self::param_count(dims)],
            seed: 0,
        })
    }

    /// He-uniform weights, zero biases.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        let mut m = Self::zeros(dims)?;
        m.seed = seed;
        let mut rng = rng::rng_from_seed(rng::derive_seed(seed, stream::INIT, 0));
        for l in 0..m.layers() {
            let (fan_in, fan_out) = (m.dims[l], m.dims[l + 1]);
            let limit = math::sqrt(6.0 / fan_in as f64);
            let w = m.layer_offset(l);
            for p in &mut m.params[w..w + fan_in * fan_out] {
                *p = rng.random_range(-limit..limit);
            }
        }
        Ok(m)
    }

    pub fn paper(seed: u64) -> Self {
        Self::init(&PAPER_DIMS, seed).expect("paper dims are valid")
    }

    pub fn layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn classes(&self) -> usize {
        *self.dims.last().unwrap()
    }

    /// Offset of layer `l`'s weights; its biases follow at `+ in * out`.
    pub fn layer_offset(&self, l: usize) -> usize {
        self.dims[..=l].windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.params.iter().position(|p| !p.is_finite()) {
            Some(i) => Err(Error::NonFiniteParameter(i)),
            None => Ok(()),
        }
    }

    /// Forward pass of one input. Returns `(logits, probs)`.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut ws = Workspace::default();
        self.forward_batch(x, 1, &mut ws)?;
        let logits = ws.acts[self.layers()].clone();
        Ok((logits, ws.probs.clone()))
    }

    /// Forward pass of `n` inputs stored row-major in `x`. Activations of
    /// every layer and the softmax output stay in `ws`.
    pub fn forward_batch(&self, x: &[f64], n: usize, ws: &mut Workspace) -> Result<()> {
        let d0 = self.input_dim();
        if x.len() != n * d0 {
            return Err(Error::Shape(format!("expected {} features, got {}", n * d0, x.len())));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite feature at index {i}")));
        }
        self.check_finite()?;
        let layers = self.layers();
        ws.acts.resize_with(layers + 1, Vec::new);
        ws.acts[0].clear();
        ws.acts[0].extend_from_slice(x);
        for l in 0..layers {
            let (din, dout) = (self.dims[l], self.dims[l + 1]);
            let w_off = self.layer_offset(l);
            let w = &self.params[w_off..w_off + din * dout];
            let b = &self.params[w_off + din * dout..w_off + din * dout + dout];
            let (prev, rest) = ws.acts.split_at_mut(l + 1);
            let input = &prev[l];
            let out = &mut rest[0];
            out.clear();
            out.resize(n * dout, 0.0);
            for row in out.chunks_exact_mut(dout) {
                row.copy_from_slice(b);
            }
            gemm_acc(input, w, out, n, din, dout);
            if l + 1 < layers {
                for v in out.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
        }
        let c = self.classes();
        ws.probs.clear();
        ws.probs.extend_from_slice(&ws.acts[layers]);
        for r in 0..n {
            softmax_in_place(&mut ws.probs[r * c..(r + 1) * c]);
        }
        Ok(())
    }

    /// Mean weighted loss over the batch and its gradient, accumulated into
    /// `grad` (which is resized and zeroed).
    pub fn loss_and_grad(
        &self,
        x: &[f64],
        labels: &[[usize; K]],
        weights: &[f64; K],
        grad: &mut Vec<f64>,
        ws: &mut Workspace,
    ) -> Result<f64> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyDataset("empty batch".into()));
        }
        self.forward_batch(x, n, ws)?;
        let c = self.classes();
        let mut loss = 0.0;
        for (r, lab) in labels.iter().enumerate() {
            loss += weighted_ce_loss(&ws.probs[r * c..(r + 1) * c], lab, weights)?;
        }
        loss /= n as f64;

        grad.clear();
        grad.resize(self.params.len(), 0.0);
        let inv_n = 1.0 / n as f64;
        // dL/dlogits = (p - t) / n
        let mut delta = core::mem::take(&mut ws.delta);
        delta.clear();
        delta.extend(ws.probs.iter().map(|&p| p * inv_n));
        for (r, lab) in labels.iter().enumerate() {
            for k in 0..K {
                delta[r * c + lab[k]] -= weights[k] * inv_n;
            }
        }
        let mut prev_delta = core::mem::take(&mut ws.prev_delta);
        for l in (0..self.layers()).rev() {
            let (din, dout) = (self.dims[l], self.dims[l + 1]);
            let w_off = self.layer_offset(l);
            let input = &ws.acts[l];
            {
                let (gw, gb) = grad[w_off..w_off + din * dout + dout].split_at_mut(din * dout);
                for d in delta.chunks_exact(dout) {
                    axpy(1.0, d, gb);
                }
                gemm_at_b_acc(input, &delta, gw, n, din, dout);
            }
            if l == 0 {
                break;
            }
            // delta_prev = (delta W^T) masked by the ReLU of the input.
            let w = &self.params[w_off..w_off + din * dout];
            ws.wt.clear();
            ws.wt.resize(din * dout, 0.0);
            for i in 0..din {
                for o in 0..dout {
                    ws.wt[o * din + i] = w[i * dout + o];
                }
            }
            prev_delta.clear();
            prev_delta.resize(n * din, 0.0);
            gemm_acc(&delta, &ws.wt, &mut prev_delta, n, dout, din);
            for (v, &a) in prev_delta.iter_mut().zip(input.iter()) {
                if a <= 0.0 {
                    *v = 0.0;
                }
            }
            core::mem::swap(&mut delta, &mut prev_delta);
        }
        ws.delta = delta;
        ws.prev_delta = prev_delta;
        Ok(loss)
    }

    /// Top-`m` classes of one input, most probable first.
    pub fn predict_top_m(&self, x: &[f64], m: usize) -> Result<Vec<usize>> {
        let (_, probs) = self.forward(x)?;
        top_m(&probs, m)
    }

    /// Top-`m` classes for each of `n` inputs.
    pub fn predict_top_m_batch(&self, x: &[f64], n: usize, m: usize) -> Result<Vec<Vec<usize>>> {
        let mut ws = Workspace::default();
        let d0 = self.input_dim();
        let c = self.classes();
        let mut out = Vec::with_capacity(n);
        for start in (0..n).step_by(EVAL_CHUNK) {
            let len = EVAL_CHUNK.min(n - start);
            self.forward_batch(&x[start * d0..(start + len) * d0], len, &mut ws)?;
            for r in 0..len {
                out.push(top_m(&ws.probs[r * c..(r + 1) * c], m)?);
            }
        }
        Ok(out)
    }
}

const EVAL_CHUNK: usize = 256;

/// Reusable buffers for forward and backward passes.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    pub acts: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
    delta: Vec<f64>,
    prev_delta: Vec<f64>,
    wt: Vec<f64>,
}

/// Column and reduction tile; keeps a `TILE x TILE` block of the right
/// operand (32 KiB) cache resident while rows stream past it.
const TILE: usize = 64;

/// `out (n x m) += a (n x k) * b (k x m)`. Every output element sums its
/// terms in ascending `k` order, whatever the tiling. Zeros in `a` are
/// skipped.
fn gemm_acc(a: &[f64], b: &[f64], out: &mut [f64], n: usize, k: usize, m: usize) {
    for k0 in (0..k).step_by(TILE) {
        let k1 = (k0 + TILE).min(k);
        for m0 in (0..m).step_by(TILE) {
            let m1 = (m0 + TILE).min(m);
            for r in 0..n {
                let row = &mut out[r * m + m0..r * m + m1];
                for (i, &x) in a[r * k + k0..r * k + k1].iter().enumerate() {
                    if x != 0.0 {
                        let i = k0 + i;
                        axpy(x, &b[i * m + m0..i * m + m1], row);
                    }
                }
            }
        }
    }
}

/// `out (k x m) += a^T * b` for `a (n x k)`, `b (n x m)`; terms summed in
/// ascending row order.
fn gemm_at_b_acc(a: &[f64], b: &[f64], out: &mut [f64], n: usize, k: usize, m: usize) {
    for m0 in (0..m).step_by(TILE) {
        let m1 = (m0 + TILE).min(m);
        for r in 0..n {
            let src = &b[r * m + m0..r * m + m1];
            for (i, &x) in a[r * k..(r + 1) * k].iter().enumerate() {
                if x != 0.0 {
                    axpy(x, src, &mut out[i * m + m0..i * m + m1]);
                }
            }
        }
    }
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Numerically stable softmax.
pub fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = math::exp(*x - max);
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut v = logits.to_vec();
    softmax_in_place(&mut v);
    v
}

/// `sum_k -w_k ln max(p[labels[k]], 1e-12)`.
pub fn weighted_ce_loss(probs: &[f64], labels: &[usize; K], weights: &[f64; K]) -> Result<f64> {
    weighted_ce_loss_clamped(probs, labels, weights, PROB_FLOOR)
}

/// As [`weighted_ce_loss`] with an explicit floor; `0.0` disables it.
pub fn weighted_ce_loss_clamped(probs: &[f64], labels: &[usize; K], weights: &[f64; K], floor: f64) -> Result<f64> {
    let mut loss = 0.0;
    for k in 0..K {
        let l = labels[k];
        let p = *probs.get(l).ok_or(Error::LabelOutOfRange {
            label: l,
            classes: probs.len(),
        })?;
        loss -= weights[k] * math::ln(p.max(floor));
    }
    Ok(loss)
}

/// Indices of the `m` largest values, descending, ties by ascending index.
pub fn top_m(probs: &[f64], m: usize) -> Result<Vec<usize>> {
    if m == 0 || m > probs.len() {
        return Err(Error::param("m", format!("must be in [1, {}], got {m}", probs.len())));
    }
    let rank = |a: &usize, b: &usize| {
        probs[*b]
            .partial_cmp(&probs[*a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    if m == 1 {
        let mut best = 0;
        for i in 1..probs.len() {
            if rank(&i, &best) == Ordering::Less {
                best = i;
            }
        }
        return Ok(vec![best]);
    }
    let mut idx: Vec<usize> = (0..probs.len()).collect();
    if m < idx.len() {
        idx.select_nth_unstable_by(m - 1, rank);
        idx.truncate(m);
    }
    idx.sort_unstable_by(rank);
    Ok(idx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64, hp: &AdamParams) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::Shape(format!(
            "params {}, grads {}, moments {}/{}",
            params.len(),
            grads.len(),
            state.m.len(),
            state.v.len()
        )));
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - math::powi(hp.beta1, t);
    let bc2 = 1.0 - math::powi(hp.beta2, t);
    for i in 0..params.len() {
        let g = grads[i];
        let m = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
        let v = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
        state.m[i] = m;
        state.v[i] = v;
        let m_hat = m / bc1;
        let v_hat = v / bc2;
        params[i] -= lr * m_hat / (math::sqrt(v_hat) + hp.eps);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub initial_lr: f64,
    pub milestones: Vec<usize>,
    pub lr_gamma: f64,
    pub adam: AdamParams,
    pub loss_weights: [f64; K],
    pub seed: u64,
    /// Leading layers whose parameters stay fixed.
    #[serde(default)]
    pub freeze_layers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 60,
            batch_size: 128,
            initial_lr: 0.2,
            milestones: vec![20, 40],
            lr_gamma: 0.1,
            adam: AdamParams::default(),
            loss_weights: LOSS_WEIGHTS,
            seed: 0,
            freeze_layers: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::param("epochs", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be positive"));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::param("initial_lr", format!("must be positive, got {}", self.initial_lr)));
        }
        if !(self.lr_gamma > 0.0 && self.lr_gamma.is_finite()) {
            return Err(Error::param("lr_gamma", "must be positive"));
        }
        let w = &self.loss_weights;
        if weight_sum(w) != 1.0 {
            return Err(Error::param("loss_weights", format!("must sum to 1, got {}", weight_sum(w))));
        }
        if !(w[K - 1] > 0.0 && w.windows(2).all(|p| p[0] >= p[1])) {
            return Err(Error::param("loss_weights", "must be positive and non-increasing"));
        }
        Ok(())
    }
}

/// `initial_lr * gamma^(milestones passed)`.
pub fn lr_at(cfg: &TrainConfig, epoch: usize) -> f64 {
    let passed = cfg.milestones.iter().filter(|&&m| m <= epoch).count();
    cfg.initial_lr * math::powi(cfg.lr_gamma, passed as i32)
}

/// Features (row-major) with their label sets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Examples {
    pub dim: usize,
    pub x: Vec<f64>,
    pub labels: Vec<[usize; K]>,
}

impl Examples {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_top1: Option<f64>,
}

/// Fraction of examples whose best label is the predicted top-1 class.
pub fn top1(model: &MlpModel, data: &Examples) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("no examples to score".into()));
    }
    let pred = model.predict_top_m_batch(&data.x, data.len(), 1)?;
    let hits = pred.iter().zip(&data.labels).filter(|(p, l)| p[0] == l[0]).count();
    Ok(hits as f64 / data.len() as f64)
}

/// Runs the full schedule and returns the final-epoch model.
pub fn train(
    model: &MlpModel,
    train_set: &Examples,
    val_set: Option<&Examples>,
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<EpochRecord>)> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyDataset("training set is empty".into()));
    }
    if train_set.dim != model.input_dim() {
        return Err(Error::Shape(format!("features have {} dims, model expects {}", train_set.dim, model.input_dim())));
    }
    let classes = model.classes();
    for lab in &train_set.labels {
        if let Some(&l) = lab.iter().find(|&&l| l >= classes) {
            return Err(Error::LabelOutOfRange { label: l, classes });
        }
    }
    let mut model = model.clone();
    let frozen = if cfg.freeze_layers >= model.layers() {
        model.params.len()
    } else {
        model.layer_offset(cfg.freeze_layers)
    };
    let mut adam = AdamState::new(model.params.len());
    let mut ws = Workspace::default();
    let mut grad = Vec::new();
    let mut xb = Vec::new();
    let mut lb = Vec::new();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let lr = lr_at(cfg, epoch);
        order.shuffle(&mut rng::rng_from_seed(rng::derive_seed(cfg.seed, stream::SHUFFLE, epoch as u64)));
        let mut loss_sum = 0.0;
        for (batch, chunk) in order.chunks(cfg.batch_size).enumerate() {
            xb.clear();
            lb.clear();
            for &i in chunk {
                xb.extend_from_slice(train_set.row(i));
                lb.push(train_set.labels[i]);
            }
            let loss = model.loss_and_grad(&xb, &lb, &cfg.loss_weights, &mut grad, &mut ws)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite { what: "loss", epoch, batch });
            }
            loss_sum += loss * chunk.len() as f64;
            grad[..frozen].fill(0.0);
            adam_step(&mut model.params, &grad, &mut adam, lr, &cfg.adam)?;
            if model.params.iter().any(|p| !p.is_finite()) {
                return Err(Error::NonFinite {
                    what: "parameter",
                    epoch,
                    batch,
                });
            }
        }
        let val_top1 = match val_set {
            Some(v) if !v.is_empty() => Some(top1(&model, v)?),
            _ => None,
        };
        history.push(EpochRecord {
            epoch,
            lr,
            train_loss: loss_sum / train_set.len() as f64,
            val_top1,
        });
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        assert_eq!(weight_sum(&LOSS_WEIGHTS), 1.0);
        assert!((loss_lower_bound(&LOSS_WEIGHTS) - 1.341_573).abs() < 1e-5);
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = MlpModel::zeros(&PAPER_DIMS).unwrap();
        let (_, p) = m.forward(&[0.3, 0.7]).unwrap();
        assert!(p.iter().all(|&x| x == 1.0 / 1024.0));
        let l = weighted_ce_loss(&p, &[1, 2, 3, 4, 5], &LOSS_WEIGHTS).unwrap();
        assert!((l - math::ln(1024.0)).abs() < 1e-9);
    }

    #[test]
    fn clamp_example() {
        let mut p = vec![1e-300; 1024];
        p[7] = 1.0 - 4e-12;
        let l = weighted_ce_loss(&p, &[7, 1, 2, 3, 4], &LOSS_WEIGHTS).unwrap();
        let expect = -0.5 * math::ln(1.0 - 4e-12) + 0.5 * math::ln(1e12);
        assert!((l - expect).abs() < 1e-9);
        assert!((l - 13.8155).abs() < 1e-3);
    }

    #[test]
    fn lr_schedule() {
        let c = TrainConfig::default();
        assert_eq!(lr_at(&c, 0), 0.2);
        assert!((lr_at(&c, 19) - 0.2).abs() < 1e-15);
        assert!((lr_at(&c, 20) - 0.02).abs() < 1e-15);
        assert!((lr_at(&c, 59) - 0.002).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_is_lr_sign() {
        let mut p = vec![1.0, 1.0, 1.0, 1.0];
        let g = [0.5, -3.0, 1e-3, 0.0];
        let mut s = AdamState::new(4);
        adam_step(&mut p, &g, &mut s, 0.01, &AdamParams::default()).unwrap();
        assert!((p[0] - 0.99).abs() < 1e-6);
        assert!((p[1] - 1.01).abs() < 1e-6);
        assert!((p[2] - 0.99).abs() < 1e-6);
        assert_eq!(p[3], 1.0);
        assert!(adam_step(&mut p, &g[..3], &mut s, 0.01, &AdamParams::default()).is_err());
    }

    #[test]
    fn top_m_ties() {
        let p = [0.1, 0.3, 0.3, 0.2];
        assert_eq!(top_m(&p, 1).unwrap(), vec![1]);
        assert_eq!(top_m(&p, 3).unwrap(), vec![1, 2, 3]);
        assert_eq!(top_m(&p, 4).unwrap(), vec![1, 2, 3, 0]);
        assert!(top_m(&p, 0).is_err());
        assert!(top_m(&p, 5).is_err());
    }

    #[test]
    fn batch_gradient_is_mean_of_single() {
        let m = MlpModel::init(&[2, 8, 8, 16], 3).unwrap();
        let x = [0.1, 0.9, 0.5, 0.5, 0.8, 0.2];
        let labels = [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9], [15, 14, 13, 12, 11]];
        let mut ws = Workspace::default();
        let mut g = Vec::new();
        m.loss_and_grad(&x, &labels, &LOSS_WEIGHTS, &mut g, &mut ws).unwrap();
        let mut mean = vec![0.0; g.len()];
        let mut gi = Vec::new();
        for r in 0..3 {
            m.loss_and_grad(&x[r * 2..r * 2 + 2], &labels[r..r + 1], &LOSS_WEIGHTS, &mut gi, &mut ws).unwrap();
            for (a, b) in mean.iter_mut().zip(&gi) {
                *a += b / 3.0;
            }
        }
        for (a, b) in g.iter().zip(&mean) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(g.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn frozen_layers_do_not_move() {
        let m = MlpModel::init(&[2, 8, 8, 16], 5).unwrap();
        let data = Examples {
            dim: 2,
            x: vec![0.1, 0.2, 0.8, 0.9, 0.4, 0.6],
            labels: vec![[0, 1, 2, 3, 4], [4, 3, 2, 1, 0], [9, 8, 7, 6, 5]],
        };
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 2,
            initial_lr: 0.01,
            freeze_layers: 2,
            ..TrainConfig::default()
        };
        let (t, h) = train(&m, &data, None, &cfg).unwrap();
        let split = m.layer_offset(2);
        assert_eq!(&t.params[..split], &m.params[..split]);
        assert_ne!(&t.params[split..], &m.params[split..]);
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn divergence_is_reported() {
        let mut m = MlpModel::init(&[2, 4, 8], 1).unwrap();
        m.params[0] = f64::NAN;
        assert!(matches!(m.forward(&[0.0, 1.0]), Err(Error::NonFiniteParameter(0))));
    }
}
