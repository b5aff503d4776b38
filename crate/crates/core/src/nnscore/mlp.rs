//! Dense feed-forward network with hand-written backpropagation.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// `x · sigmoid(x)`.
    #[default]
    Silu,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Silu => x / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Silu => {
                let s = 1.0 / (1.0 + (-x).exp());
                s * (1.0 + x * (1.0 - s))
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }
}

/// `y = x Wᵀ + b` with `W` of shape `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub activation: Activation,
}

/// Pre-activations and activations of one forward pass.
pub struct Cache {
    /// `inputs[l]` is the input to layer `l`.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Array2<f64>>,
}

/// Gradients laid out like [`Mlp::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weight: Vec<Array2<f64>>,
    pub bias: Vec<Array1<f64>>,
}

impl Mlp {
    /// Widths `[in, h₁, …, out]`. Hidden weights are `N(0, 1/fan_in)`; the
    /// output layer starts at zero when `zero_head` is set.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], activation: Activation, zero_head: bool, rng: &mut R) -> Self {
        assert!(widths.len() >= 2 && widths.iter().all(|&w| w > 0), "bad widths {widths:?}");
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let scale = (1.0 / fan_in as f64).sqrt();
                let weight = if zero_head && l == last {
                    Array2::zeros((fan_out, fan_in))
                } else {
                    Array2::from_shape_fn((fan_out, fan_in), |_| {
                        let z: f64 = rng.sample(StandardNormal);
                        scale * z
                    })
                };
                Dense { weight, bias: Array1::zeros(fan_out) }
            })
            .collect();
        Self { layers, activation }
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].inputs()];
        w.extend(self.layers.iter().map(Dense::outputs));
        w
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().outputs()
    }

    pub fn forward(&self, input: ArrayView2<f64>) -> Array2<f64> {
        let mut h = input.to_owned();
        let n = self.layers.len();
        for (l, layer) in self.layers.iter().enumerate() {
            h = h.dot(&layer.weight.t()) + &layer.bias;
            if l + 1 < n {
                h.mapv_inplace(|v| self.activation.apply(v));
            }
        }
        h
    }

    pub fn forward_cached(&self, input: ArrayView2<f64>) -> (Array2<f64>, Cache) {
        let n = self.layers.len();
        let mut inputs = Vec::with_capacity(n);
        let mut pre = Vec::with_capacity(n - 1);
        let mut h = input.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let z = h.dot(&layer.weight.t()) + &layer.bias;
            inputs.push(h);
            if l + 1 < n {
                h = z.mapv(|v| self.activation.apply(v));
                pre.push(z);
            } else {
                h = z;
            }
        }
        (h, Cache { inputs, pre })
    }

    /// Parameter gradients given `∂L/∂output`.
    pub fn backward(&self, cache: &Cache, grad_output: Array2<f64>) -> Gradients {
        let n = self.layers.len();
        let mut weight = Vec::with_capacity(n);
        let mut bias = Vec::with_capacity(n);
        let mut delta = grad_output;
        for l in (0..n).rev() {
            weight.push(delta.t().dot(&cache.inputs[l]));
            bias.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut back = delta.dot(&self.layers[l].weight);
                let act = self.activation;
                back.zip_mut_with(&cache.pre[l - 1], |g, &z| *g *= act.derivative(z));
                delta = back;
            }
        }
        weight.reverse();
        bias.reverse();
        Gradients { weight, bias }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer, weights (row-major) before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params());
        let mut i = 0;
        for l in &mut self.layers {
            for w in l.weight.iter_mut() {
                *w = flat[i];
                i += 1;
            }
            for b in l.bias.iter_mut() {
                *b = flat[i];
                i += 1;
            }
        }
    }
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weight.iter().zip(&self.bias) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn forward_of_hand_built_net() {
        let net = Mlp {
            layers: vec![
                Dense { weight: array![[1.0, -1.0], [0.5, 0.0]], bias: array![0.0, 1.0] },
                Dense { weight: array![[2.0, 1.0]], bias: array![-0.5] },
            ],
            activation: Activation::Tanh,
        };
        let out = net.forward(array![[0.3, 0.1]].view());
        let expect = 2.0 * 0.2f64.tanh() + 1.15f64.tanh() - 0.5;
        assert!((out[[0, 0]] - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_head_outputs_zero() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let net = Mlp::new(&[3, 8, 8, 2], Activation::Silu, true, &mut rng);
        let out = net.forward(array![[1.0, -2.0, 0.5]].view());
        assert!(out.iter().all(|&v| v == 0.0));
        assert_eq!(net.widths(), vec![3, 8, 8, 2]);
    }

    #[test]
    fn params_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let net = Mlp::new(&[2, 5, 3], Activation::Tanh, false, &mut rng);
        let mut other = Mlp::new(&[2, 5, 3], Activation::Tanh, true, &mut rng);
        other.set_params(&net.params());
        assert_eq!(other, net);
        assert_eq!(net.num_params(), 2 * 5 + 5 + 5 * 3 + 3);
    }

    #[test]
    fn activation_derivatives() {
        for act in [Activation::Silu, Activation::Tanh] {
            for x in [-3.0, -0.2, 0.0, 0.7, 4.0] {
                let h = 1e-6;
                let fd = (act.apply(x + h) - act.apply(x - h)) / (2.0 * h);
                assert!((fd - act.derivative(x)).abs() < 1e-9);
            }
        }
    }
}
