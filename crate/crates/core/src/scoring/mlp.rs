//! Fully connected scorer: ReLU hidden layers, identity output.

use rand::Rng;

use super::{LinearScorer, Scorer};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_DIM};

/// Dense layer, `weights` stored row-major as `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.weights.chunks_exact(self.inputs).zip(&self.biases).map(|(row, b)| {
            row.iter().zip(x).fold(*b, |acc, (w, xi)| acc + w * xi)
        }));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QScorer {
    layers: Vec<Dense>,
}

/// Loss gradients, shaped like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(q: &QScorer) -> Self {
        Self {
            weights: q.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: q.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += scale * y);
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += scale * y);
        }
    }

    /// Flattened in the same order as [`QScorer::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b).copied())
            .collect()
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::Shape("need at least input and output sizes".into()));
    }
    if sizes[0] != FEATURE_DIM {
        return Err(Error::Shape(format!("input size {} != {FEATURE_DIM}", sizes[0])));
    }
    if *sizes.last().unwrap() != 1 {
        return Err(Error::Shape("output size must be 1".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::Shape("zero-width layer".into()));
    }
    Ok(())
}

impl QScorer {
    pub const DEFAULT_SIZES: [usize; 4] = [FEATURE_DIM, 32, 32, 1];

    /// All-zero network with the given layer sizes (input first).
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(Self {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn random<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut q = Self::zeros(sizes)?;
        for l in &mut q.layers {
            let bound = (6.0 / (l.inputs + l.outputs) as f64).sqrt();
            for w in &mut l.weights {
                *w = rng.random_range(-bound..=bound);
            }
        }
        Ok(q)
    }

    /// Single identity layer carrying the linear scorer's weights.
    pub fn from_linear(lin: &LinearScorer) -> Self {
        Self {
            layers: vec![Dense {
                inputs: FEATURE_DIM,
                outputs: 1,
                weights: lin.weights.to_vec(),
                biases: vec![0.0],
            }],
        }
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        let mut sizes = vec![layers.first().map_or(0, |l| l.inputs)];
        for (i, l) in layers.iter().enumerate() {
            if l.inputs != sizes[i] {
                return Err(Error::Shape(format!("layer {i} expects {} inputs, got {}", l.inputs, sizes[i])));
            }
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(Error::Shape(format!("layer {i} buffers do not match its shape")));
            }
            sizes.push(l.outputs);
        }
        check_sizes(&sizes)?;
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    /// Layer widths, input first.
    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Per layer: weights row-major, then biases.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::Shape(format!(
                "{} parameters for a network of {}",
                params.len(),
                self.parameter_count()
            )));
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.biases.iter_mut()).for_each(|p| *p = it.next().unwrap());
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    /// Pre-activations of every layer.
    fn pre_activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut input: Vec<f64> = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(l.outputs);
            l.forward_into(&input, &mut z);
            if i < last {
                input = z.iter().map(|v| v.max(0.0)).collect();
            }
            pre.push(z);
        }
        pre
    }

    pub fn forward(&self, x: &FeatureVector) -> f64 {
        self.pre_activations(&x.0).last().unwrap()[0]
    }

    /// Loss `0.5 * (q(x) - target)^2` and its gradients by reverse accumulation.
    pub fn forward_backward(&self, x: &FeatureVector, target: f64) -> (f64, Gradients) {
        let pre = self.pre_activations(&x.0);
        let out = pre.last().unwrap()[0];
        let err = out - target;
        let mut grads = Gradients::zeros_like(self);

        // Gradient w.r.t. the current layer's pre-activation.
        let mut delta = vec![err];
        for i in (0..self.layers.len()).rev() {
            let l = &self.layers[i];
            let input: Vec<f64> = if i == 0 {
                x.0.to_vec()
            } else {
                pre[i - 1].iter().map(|v| v.max(0.0)).collect()
            };
            for (o, d) in delta.iter().enumerate() {
                grads.biases[i][o] = *d;
                let row = &mut grads.weights[i][o * l.inputs..(o + 1) * l.inputs];
                row.iter_mut().zip(&input).for_each(|(g, xi)| *g = d * xi);
            }
            if i > 0 {
                let mut back = vec![0.0; l.inputs];
                for (o, d) in delta.iter().enumerate() {
                    let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                    back.iter_mut().zip(row).for_each(|(b, w)| *b += d * w);
                }
                for (b, z) in back.iter_mut().zip(&pre[i - 1]) {
                    if *z <= 0.0 {
                        *b = 0.0;
                    }
                }
                delta = back;
            }
        }
        (0.5 * err * err, grads)
    }

    /// `params -= step * grads`; biases are left alone unless `update_biases`.
    pub fn apply_gradients(&mut self, grads: &Gradients, step: f64, update_biases: bool) {
        if step == 0.0 {
            return;
        }
        for (i, l) in self.layers.iter_mut().enumerate() {
            l.weights.iter_mut().zip(&grads.weights[i]).for_each(|(w, g)| *w -= step * g);
            if update_biases {
                l.biases.iter_mut().zip(&grads.biases[i]).for_each(|(b, g)| *b -= step * g);
            }
        }
    }
}

impl Scorer for QScorer {
    fn score(&self, x: &FeatureVector) -> f64 {
        self.forward(x)
    }
}
