use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bce_logit_grad, bce_with_logits, decide, sigmoid};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Hidden widths of the default 3-layer classifier.
pub const DEFAULT_HIDDEN: [usize; 2] = [512, 64];

/// `out_dim x in_dim` weights stored row-major, plus one bias per output.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        DenseLayer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    /// Uniform in ±sqrt(6 / (fan_in + fan_out)), zero bias.
    pub fn glorot(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-limit..=limit))
            .collect();
        DenseLayer {
            in_dim,
            out_dim,
            weights,
            bias: vec![0.0; out_dim],
        }
    }

    pub fn weight(&self, out: usize, input: usize) -> f64 {
        self.weights[out * self.in_dim + input]
    }

    fn apply(&self, x: &[f64], z: &mut [f64]) {
        for (o, zo) in z.iter_mut().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            *zo = self.bias[o] + dot(row, x);
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators; a fixed association order keeps results reproducible.
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in chunks * 4..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Layer widths `[input, hidden..., 1]` for a classifier of `depth` layers.
/// Depth 1 ignores `hidden`; deeper models take the first `depth - 1`
/// widths from it.
pub fn layer_dims(input_dim: usize, depth: usize, hidden: &[usize]) -> Result<Vec<usize>> {
    if depth == 0 {
        return Err(Error::Config("classifier depth must be >= 1".into()));
    }
    if hidden.len() < depth - 1 {
        return Err(Error::Config(format!(
            "depth {depth} needs {} hidden widths, got {}",
            depth - 1,
            hidden.len()
        )));
    }
    if hidden[..depth - 1].contains(&0) || input_dim == 0 {
        return Err(Error::Config("layer widths must be >= 1".into()));
    }
    let mut dims = Vec::with_capacity(depth + 1);
    dims.push(input_dim);
    dims.extend_from_slice(&hidden[..depth - 1]);
    dims.push(1);
    Ok(dims)
}

/// Dense layers with ReLU after every layer but the last, which emits a
/// single logit.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Gradients shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    fn zeros_like(model: &Mlp) -> Self {
        Gradients {
            layers: model
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    /// Same order as [`Mlp::flat_params`].
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.flat().iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

struct Trace {
    // pre-activations per layer
    z: Vec<Vec<f64>>,
    // post-ReLU activations of hidden layers
    a: Vec<Vec<f64>>,
}

impl Trace {
    fn new(model: &Mlp) -> Self {
        Trace {
            z: model.layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
            a: model.layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
        }
    }
}

impl Mlp {
    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        let Some(last) = layers.last() else {
            return Err(Error::Config("classifier needs at least one layer".into()));
        };
        if last.out_dim != 1 {
            return Err(Error::Config(format!("last layer must have 1 output, has {}", last.out_dim)));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.in_dim * l.out_dim || l.bias.len() != l.out_dim {
                return Err(Error::Config(format!("layer {i} parameter shape does not match its dims")));
            }
            if i > 0 && layers[i - 1].out_dim != l.in_dim {
                return Err(Error::DimensionMismatch {
                    context: "layer chaining",
                    expected: layers[i - 1].out_dim,
                    actual: l.in_dim,
                });
            }
        }
        Ok(Mlp { layers })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Mlp::from_layers(dims.windows(2).map(|w| DenseLayer::zeros(w[0], w[1])).collect())
    }

    /// Glorot-initialized model for the given layer widths.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Mlp::from_layers(
            dims.windows(2)
                .map(|w| DenseLayer::glorot(w[0], w[1], &mut rng))
                .collect(),
        )
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.out_dim))
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Parameters in checkpoint order: per layer, weights row-major then bias.
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.num_params(), "parameter count");
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[off..off + nb]);
            off += nb;
        }
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "classifier input",
                expected: self.input_dim(),
                actual: len,
            });
        }
        Ok(())
    }

    /// Output logit for one input vector.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x.len())?;
        let mut trace = Trace::new(self);
        Ok(self.forward_traced(x, &mut trace))
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        self.forward(x).map(sigmoid)
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        self.forward(x).map(decide)
    }

    pub fn logits(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.check_input(x.cols())?;
        let mut trace = Trace::new(self);
        Ok((0..x.rows()).map(|i| self.forward_traced(x.row(i), &mut trace)).collect())
    }

    pub fn predict_all(&self, x: &Matrix) -> Result<Vec<u8>> {
        Ok(self.logits(x)?.into_iter().map(decide).collect())
    }

    fn forward_traced(&self, x: &[f64], t: &mut Trace) -> f64 {
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (prev, rest) = t.a.split_at_mut(l);
            let input = if l == 0 { x } else { &prev[l - 1] };
            layer.apply(input, &mut t.z[l]);
            if l < last {
                for (a, &z) in rest[0].iter_mut().zip(&t.z[l]) {
                    *a = z.max(0.0);
                }
            }
        }
        t.z[last][0]
    }

    /// Mean binary cross-entropy over all rows.
    pub fn loss(&self, x: &Matrix, y: &[u8]) -> Result<f64> {
        let logits = self.logits(x)?;
        Ok(logits.iter().zip(y).map(|(&z, &t)| bce_with_logits(z, t)).sum::<f64>() / y.len() as f64)
    }

    /// Mean loss and its gradient over every row of `x`.
    pub fn backward(&self, x: &Matrix, y: &[u8]) -> Result<(f64, Gradients)> {
        let rows: Vec<usize> = (0..x.rows()).collect();
        self.backward_rows(x, y, &rows)
    }

    /// Mean loss and gradient over the selected rows of `x`; `y` is indexed
    /// like the rows of `x`.
    pub fn backward_rows(&self, x: &Matrix, y: &[u8], rows: &[usize]) -> Result<(f64, Gradients)> {
        self.check_input(x.cols())?;
        if rows.is_empty() {
            return Err(Error::Config("empty batch".into()));
        }
        let scale = 1.0 / rows.len() as f64;
        let mut grads = Gradients::zeros_like(self);
        let mut trace = Trace::new(self);
        let mut delta: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.out_dim]).collect();
        let mut loss = 0.0;
        let last = self.layers.len() - 1;

        for &r in rows {
            let xr = x.row(r);
            let z = self.forward_traced(xr, &mut trace);
            loss += bce_with_logits(z, y[r]);
            delta[last][0] = bce_logit_grad(z, y[r]) * scale;

            for l in (0..=last).rev() {
                let layer = &self.layers[l];
                let input = if l == 0 { xr } else { &trace.a[l - 1] };
                let g = &mut grads.layers[l];
                for (o, &d) in delta[l].iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    g.bias[o] += d;
                    let gw = &mut g.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (gwi, &xi) in gw.iter_mut().zip(input) {
                        *gwi += d * xi;
                    }
                }
                if l > 0 {
                    let (below, here) = delta.split_at_mut(l);
                    let prev = &mut below[l - 1];
                    prev.iter_mut().for_each(|v| *v = 0.0);
                    for (o, &d) in here[0].iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                        for (p, &w) in prev.iter_mut().zip(row) {
                            *p += d * w;
                        }
                    }
                    // ReLU derivative
                    for (p, &z) in prev.iter_mut().zip(&trace.z[l - 1]) {
                        if z <= 0.0 {
                            *p = 0.0;
                        }
                    }
                }
            }
        }
        Ok((loss * scale, grads))
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}
