//! Feed-forward network: ReLU hidden layers, one logistic output unit,
//! trained with mini-batch SGD on binary cross-entropy.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::resample::{bce_from_logit, sigmoid};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden_layers: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden_layers: vec![64],
            learning_rate: 0.01,
            epochs: 100,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.contains(&0) {
            return Err(Error::InvalidParameter("hidden layer widths must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Dense layer; `weights` is `n_out × n_in`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Layer {
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            bias: vec![0.0; n_out],
        }
    }

    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.bias.iter().enumerate().map(|(o, b)| {
            let w = &self.weights[o * self.n_in..(o + 1) * self.n_in];
            b + w.iter().zip(input).map(|(a, x)| a * x).sum::<f64>()
        }));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Gradient with the same shapes as the network's layers.
pub type MlpGradient = Vec<Layer>;

impl Mlp {
    /// Glorot-uniform weights drawn from the seeded stream, zero biases.
    pub fn init(n_inputs: usize, hidden: &[usize], seed_value: u64) -> Mlp {
        let mut rng = seed::rng_for(seed_value, "mlp_init", 0);
        let mut widths = vec![n_inputs];
        widths.extend_from_slice(hidden);
        widths.push(1);
        let layers = widths
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let limit = (6.0 / (n_in + n_out) as f64).sqrt();
                let mut layer = Layer::zeros(n_in, n_out);
                for v in &mut layer.weights {
                    *v = rng.random_range(-limit..=limit);
                }
                layer
            })
            .collect();
        Mlp { layers }
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].n_in
    }

    /// Pre-activations of every layer for one input row.
    fn forward_trace(&self, row: &[f64]) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = row.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.forward(&act, &mut z);
            if l + 1 < self.layers.len() {
                act = z.iter().map(|&v| v.max(0.0)).collect();
            }
            pre.push(z);
        }
        pre
    }

    fn logit(&self, row: &[f64]) -> f64 {
        let mut act = row.to_vec();
        let mut z = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            layer.forward(&act, &mut z);
            if l + 1 < self.layers.len() {
                act.clear();
                act.extend(z.iter().map(|&v| v.max(0.0)));
            }
        }
        z[0]
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.n_inputs())?;
        Ok(x.rows().map(|r| sigmoid(self.logit(r))).collect())
    }

    /// Mean binary cross-entropy over the given rows.
    pub fn loss(&self, x: &Matrix, y: &[u8]) -> f64 {
        let total: f64 = x
            .rows()
            .zip(y)
            .map(|(r, &t)| bce_from_logit(self.logit(r), t as f64))
            .sum();
        total / x.n_rows() as f64
    }

    /// Backpropagated gradient of the mean loss over `rows` of `x`.
    pub fn gradient_on(&self, x: &Matrix, y: &[u8], rows: &[usize]) -> (f64, MlpGradient) {
        let mut grad: MlpGradient = self.layers.iter().map(|l| Layer::zeros(l.n_in, l.n_out)).collect();
        let mut loss = 0.0;
        let scale = 1.0 / rows.len() as f64;
        for &i in rows {
            let input = x.row(i);
            let pre = self.forward_trace(input);
            let logit = pre.last().expect("output layer")[0];
            let target = y[i] as f64;
            loss += bce_from_logit(logit, target);
            // dL/dz at the output
            let mut delta = vec![(sigmoid(logit) - target) * scale];
            for l in (0..self.layers.len()).rev() {
                let layer = &self.layers[l];
                let g = &mut grad[l];
                let prev_act: Vec<f64> = if l == 0 {
                    input.to_vec()
                } else {
                    pre[l - 1].iter().map(|&v| v.max(0.0)).collect()
                };
                for (o, d) in delta.iter().enumerate() {
                    g.bias[o] += d;
                    let row = &mut g.weights[o * layer.n_in..(o + 1) * layer.n_in];
                    for (w, a) in row.iter_mut().zip(&prev_act) {
                        *w += d * a;
                    }
                }
                if l > 0 {
                    let mut next = vec![0.0; layer.n_in];
                    for (o, d) in delta.iter().enumerate() {
                        let w = &layer.weights[o * layer.n_in..(o + 1) * layer.n_in];
                        for (n, wi) in next.iter_mut().zip(w) {
                            *n += d * wi;
                        }
                    }
                    for (n, z) in next.iter_mut().zip(&pre[l - 1]) {
                        if *z <= 0.0 {
                            *n = 0.0;
                        }
                    }
                    delta = next;
                }
            }
        }
        (loss * scale, grad)
    }

    pub fn gradient(&self, x: &Matrix, y: &[u8]) -> (f64, MlpGradient) {
        let rows: Vec<usize> = (0..x.n_rows()).collect();
        self.gradient_on(x, y, &rows)
    }

    /// All weights then biases, layer by layer.
    pub fn params_flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn set_params_flat(&mut self, values: &[f64]) {
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            for v in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *v = it.next().expect("parameter vector too short");
            }
        }
    }

    fn step(&mut self, grad: &MlpGradient, learning_rate: f64) {
        for (l, g) in self.layers.iter_mut().zip(grad) {
            for (w, d) in l.weights.iter_mut().zip(&g.weights) {
                *w -= learning_rate * d;
            }
            for (b, d) in l.bias.iter_mut().zip(&g.bias) {
                *b -= learning_rate * d;
            }
        }
    }
}

pub fn flatten(layers: &[Layer]) -> Vec<f64> {
    layers
        .iter()
        .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
        .collect()
}

pub fn fit(x: &Matrix, y: &[u8], params: &MlpParams) -> Result<Mlp> {
    params.validate()?;
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    let [n0, n1] = crate::data::class_counts(y);
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass);
    }
    let mut net = Mlp::init(x.n_cols(), &params.hidden_layers, params.seed);
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    for epoch in 0..params.epochs {
        let mut rng = seed::rng_for(params.seed, "mlp_epoch", epoch as u64);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(params.batch_size) {
            let (loss, grad) = net.gradient_on(x, y, batch);
            if !loss.is_finite() {
                return Err(Error::Diverged { model: "mlp", epoch });
            }
            epoch_loss += loss * batch.len() as f64;
            net.step(&grad, params.learning_rate);
        }
        if !epoch_loss.is_finite() || net.params_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { model: "mlp", epoch });
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{two_blobs, BlobSpec};

    #[test]
    fn init_shapes_and_bounds() {
        let net = Mlp::init(3, &[4, 2], 9);
        let shapes: Vec<(usize, usize)> = net.layers.iter().map(|l| (l.n_in, l.n_out)).collect();
        assert_eq!(shapes, vec![(3, 4), (4, 2), (2, 1)]);
        let limit = (6.0f64 / 7.0).sqrt();
        assert!(net.layers[0].weights.iter().all(|w| w.abs() <= limit));
        assert!(net.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn zero_epochs_returns_initial_network() {
        let ds = two_blobs(&BlobSpec::balanced(10), 1);
        let p = MlpParams {
            epochs: 0,
            hidden_layers: vec![8],
            seed: 5,
            ..MlpParams::default()
        };
        let net = fit(&ds.features, &ds.labels, &p).unwrap();
        assert_eq!(net, Mlp::init(2, &[8], 5));
    }

    #[test]
    fn learns_two_blobs() {
        let ds = two_blobs(&BlobSpec::balanced(100).with_separation(3.0), 2);
        let p = MlpParams {
            hidden_layers: vec![16],
            epochs: 200,
            seed: 1,
            ..MlpParams::default()
        };
        let before = Mlp::init(2, &[16], 1).loss(&ds.features, &ds.labels);
        let net = fit(&ds.features, &ds.labels, &p).unwrap();
        let after = net.loss(&ds.features, &ds.labels);
        assert!(after < before);
        let prob = net.predict_proba(&ds.features).unwrap();
        let correct = prob
            .iter()
            .zip(&ds.labels)
            .filter(|(p, &l)| (**p >= 0.5) as u8 == l)
            .count();
        assert!(correct as f64 / 200.0 >= 0.95, "accuracy {}", correct as f64 / 200.0);
    }

    #[test]
    fn rejects_bad_input() {
        let ds = two_blobs(&BlobSpec::balanced(5), 1);
        assert!(fit(&ds.features, &[1; 10], &MlpParams::default()).is_err());
        assert!(fit(
            &ds.features,
            &ds.labels,
            &MlpParams {
                batch_size: 0,
                ..MlpParams::default()
            }
        )
        .is_err());
        let diverge = MlpParams {
            learning_rate: 1e300,
            epochs: 20,
            ..MlpParams::default()
        };
        let far = two_blobs(&BlobSpec::balanced(20).with_separation(1e6), 1);
        assert!(matches!(
            fit(&far.features, &far.labels, &diverge),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn flat_params_round_trip() {
        let mut net = Mlp::init(3, &[5], 2);
        let flat = net.params_flat();
        assert_eq!(flat.len(), 3 * 5 + 5 + 5 + 1);
        let doubled: Vec<f64> = flat.iter().map(|v| v * 2.0).collect();
        net.set_params_flat(&doubled);
        assert_eq!(net.params_flat(), doubled);
    }
}
