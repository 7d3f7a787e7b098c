//! Dense ReLU network trained with RMSProp on squared error.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

const RHO: f64 = 0.9;
const EPS: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) struct Net {
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    x_mean: Vec<f64>,
    x_scale: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
}

pub(crate) struct TrainParams {
    pub lr: f64,
    pub lr_decay: f64,
    pub batch: usize,
    pub epochs: usize,
    pub max_updates: usize,
}

impl Net {
    /// He-normal hidden weights and a zero output layer; with `zero` every
    /// parameter starts at zero.
    pub fn new(inputs: usize, hidden: &[usize], zero: bool, rng: &mut Rng) -> Self {
        let mut sizes = vec![inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let normal = Normal::new(0.0, (2.0 / fan_in.max(1) as f64).sqrt()).unwrap();
            let w = (0..fan_in * fan_out)
                .map(|_| if zero || l + 2 == sizes.len() { 0.0 } else { normal.sample(rng) })
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Net {
            sizes,
            weights,
            biases,
            x_mean: vec![0.0; inputs],
            x_scale: vec![1.0; inputs],
            y_mean: 0.0,
            y_scale: 1.0,
        }
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    /// Forward pass in standardized units; fills per-layer activations.
    fn forward(&self, x: &[f64], acts: &mut Vec<Vec<f64>>) {
        acts.resize(self.sizes.len(), Vec::new());
        acts[0].clear();
        acts[0].extend(x.iter().zip(&self.x_mean).zip(&self.x_scale).map(|((v, m), s)| (v - m) / s));
        let layers = self.sizes.len() - 1;
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (head, tail) = acts.split_at_mut(l + 1);
            let input = &head[l];
            let out = &mut tail[0];
            out.clear();
            let w = &self.weights[l];
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut z = self.biases[l][o];
                for (a, b) in row.iter().zip(input.iter()) {
                    z += a * b;
                }
                out.push(if l + 1 < layers { z.max(0.0) } else { z });
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut acts = Vec::new();
        self.forward(x, &mut acts);
        acts[self.sizes.len() - 1][0] * self.y_scale + self.y_mean
    }

    fn standardize(&mut self, xs: &[&[f64]], ys: &[f64]) {
        let n = xs.len() as f64;
        let d = self.inputs();
        for j in 0..d {
            let mean = xs.iter().map(|x| x[j]).sum::<f64>() / n;
            let var = xs.iter().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / n;
            self.x_mean[j] = mean;
            self.x_scale[j] = if var > 1e-12 { var.sqrt() } else { 1.0 };
        }
        let mean = ys.iter().sum::<f64>() / n;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
        self.y_mean = mean;
        self.y_scale = if var > 1e-12 { var.sqrt() } else { 1.0 };
    }

    /// Mini-batch RMSProp on squared error. Returns the final training MSE
    /// in target units.
    pub fn train(&mut self, xs: &[&[f64]], ys: &[f64], p: &TrainParams, rng: &mut Rng) -> f64 {
        self.standardize(xs, ys);
        if self.sizes.len() == 2 {
            self.solve_linear(xs, ys);
            return self.mse(xs, ys);
        }
        let layers = self.sizes.len() - 1;
        let mut cache_w: Vec<Vec<f64>> = self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut cache_b: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut grad_w: Vec<Vec<f64>> = cache_w.clone();
        let mut grad_b: Vec<Vec<f64>> = cache_b.clone();
        let mut acts = Vec::new();
        let mut deltas: Vec<Vec<f64>> = self.sizes.iter().map(|&s| vec![0.0; s]).collect();
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let batch = p.batch.max(1);
        let per_epoch = xs.len().div_ceil(batch);
        let epochs = p.epochs.min(p.max_updates.div_ceil(per_epoch).max(1));
        let ys_std: Vec<f64> = ys.iter().map(|y| (y - self.y_mean) / self.y_scale).collect();
        for epoch in 0..epochs {
            order.shuffle(rng);
            let lr = p.lr / (1.0 + p.lr_decay * epoch as f64);
            for chunk in order.chunks(batch) {
                for g in grad_w.iter_mut().chain(grad_b.iter_mut()) {
                    g.iter_mut().for_each(|v| *v = 0.0);
                }
                for &i in chunk {
                    self.forward(xs[i], &mut acts);
                    deltas[layers][0] = acts[layers][0] - ys_std[i];
                    for l in (0..layers).rev() {
                        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
                        let w = &self.weights[l];
                        for o in 0..n_out {
                            let d = deltas[l + 1][o];
                            grad_b[l][o] += d;
                            let gw = &mut grad_w[l][o * n_in..(o + 1) * n_in];
                            for (g, a) in gw.iter_mut().zip(&acts[l]) {
                                *g += d * a;
                            }
                        }
                        if l > 0 {
                            for j in 0..n_in {
                                let mut s = 0.0;
                                for o in 0..n_out {
                                    s += w[o * n_in + j] * deltas[l + 1][o];
                                }
                                deltas[l][j] = if acts[l][j] > 0.0 { s } else { 0.0 };
                            }
                        }
                    }
                }
                let scale = 1.0 / chunk.len() as f64;
                for l in 0..layers {
                    rmsprop(&mut self.weights[l], &grad_w[l], &mut cache_w[l], lr, scale);
                    rmsprop(&mut self.biases[l], &grad_b[l], &mut cache_b[l], lr, scale);
                }
            }
        }
        self.mse(xs, ys)
    }

    fn mse(&self, xs: &[&[f64]], ys: &[f64]) -> f64 {
        let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (self.predict(x) - y).powi(2)).sum();
        sse / xs.len() as f64
    }

    /// Ridge least squares in standardized units (a tiny ridge keeps
    /// collinear features solvable).
    fn solve_linear(&mut self, xs: &[&[f64]], ys: &[f64]) {
        let d = self.inputs();
        let mut a = vec![vec![0.0; d + 1]; d];
        for (x, y) in xs.iter().zip(ys) {
            let z: Vec<f64> = (0..d).map(|j| (x[j] - self.x_mean[j]) / self.x_scale[j]).collect();
            let t = (y - self.y_mean) / self.y_scale;
            for i in 0..d {
                for j in 0..d {
                    a[i][j] += z[i] * z[j];
                }
                a[i][d] += z[i] * t;
            }
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += 1e-9 * xs.len() as f64 + 1e-12;
        }
        // Gauss-Jordan elimination with partial pivoting.
        for c in 0..d {
            let pivot = (c..d).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, pivot);
            let diag = a[c][c];
            for v in a[c].iter_mut() {
                *v /= diag;
            }
            let pivot_row = a[c].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != c && row[c] != 0.0 {
                    let f = row[c];
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        self.weights[0] = a.iter().map(|row| row[d]).collect();
        self.biases[0] = vec![0.0];
    }

    /// Weights and biases flattened layer by layer.
    pub fn parameters(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.biases).flat_map(|(w, b)| w.iter().chain(b.iter()).copied()).collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        let mut it = params.iter().copied();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut().chain(b.iter_mut()) {
                *v = it.next().unwrap_or(0.0);
            }
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }
}

fn rmsprop(params: &mut [f64], grads: &[f64], cache: &mut [f64], lr: f64, scale: f64) {
    for ((p, g), c) in params.iter_mut().zip(grads).zip(cache.iter_mut()) {
        let g = g * scale;
        *c = RHO * *c + (1.0 - RHO) * g * g;
        *p -= lr * g / (c.sqrt() + EPS);
    }
}
