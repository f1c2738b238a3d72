use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::signals::NoiseLevel;
use crate::tfr::TfImage;
use crate::{Error, Result};

use super::{ConvLayer, FeatureMap, Scalar};

/// Architecture and provenance of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub depth: usize,
    pub channels: usize,
    pub kernel: usize,
    /// Noise level of the training corpus, if trained.
    pub noise_level: Option<NoiseLevel>,
    pub init_seed: u64,
    pub train_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<S = f32> {
    pub layers: Vec<ConvLayer<S>>,
    pub meta: NetworkMeta,
}

/// Activations of one forward pass: `maps[0]` is the input, `maps[i]` the
/// output of layer `i`.
#[derive(Debug, Clone)]
pub struct Trace<S> {
    pub maps: Vec<FeatureMap<S>>,
}

impl<S: Scalar> Trace<S> {
    pub fn output(&self) -> &FeatureMap<S> {
        self.maps.last().expect("trace holds at least the input")
    }
}

/// Parameter-shaped buffers (gradients, Adam moments).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<S> {
    pub weights: Vec<Vec<S>>,
    pub bias: Vec<Vec<S>>,
}

impl<S: Scalar> Gradients<S> {
    pub fn zeros_like(net: &Network<S>) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![S::zero(); l.weights.len()]).collect(),
            bias: net.layers.iter().map(|l| vec![S::zero(); l.bias.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            a.iter_mut().zip(b).for_each(|(x, &y)| *x += y);
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            a.iter_mut().zip(b).for_each(|(x, &y)| *x += y);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &S> {
        self.weights.iter().chain(&self.bias).flatten()
    }

    pub fn is_zero(&self) -> bool {
        self.iter().all(|v| *v == S::zero())
    }
}

impl<S: Scalar> Network<S> {
    /// Zero-weight network with the standard layer layout: `1 → C`,
    /// `C → C` (×`depth-2`), `C → 1`; ReLU on all but the last layer.
    pub fn zeros(depth: usize, channels: usize, kernel: usize) -> Result<Self> {
        if depth == 0 || channels == 0 {
            return Err(Error::InvalidArgument("depth and channels must be positive".into()));
        }
        if kernel % 2 == 0 {
            return Err(Error::InvalidArgument(format!("kernel size {kernel} must be odd")));
        }
        let layers = (0..depth)
            .map(|i| {
                let last = i + 1 == depth;
                let inp = if i == 0 { 1 } else { channels };
                let out = if last { 1 } else { channels };
                ConvLayer::zeros(inp, out, kernel, !last)
            })
            .collect();
        Ok(Self {
            layers,
            meta: NetworkMeta {
                depth,
                channels,
                kernel,
                noise_level: None,
                init_seed: 0,
                train_seed: None,
            },
        })
    }

    /// He initialization: weights ~ N(0, std = √(2 / fan_in)), biases 0.
    pub fn init(depth: usize, channels: usize, kernel: usize, init_seed: u64) -> Result<Self> {
        let mut net = Self::zeros(depth, channels, kernel)?;
        net.meta.init_seed = init_seed;
        for (i, layer) in net.layers.iter_mut().enumerate() {
            let mut rng = seed::rng(seed::derive(init_seed, &[i as u64]));
            let std = (2.0 / layer.fan_in() as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("positive std");
            layer.weights.iter_mut().for_each(|w| *w = S::from_f64(normal.sample(&mut rng)));
        }
        Ok(net)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Side length of the square input window seen by one output pixel.
    pub fn receptive_field(&self) -> usize {
        self.layers.iter().map(|l| l.kernel - 1).sum::<usize>() + 1
    }

    pub fn cast<T: Scalar>(&self) -> Network<T> {
        let conv = |v: &[S]| v.iter().map(|x| T::from_f64(x.as_f64())).collect();
        Network {
            layers: self
                .layers
                .iter()
                .map(|l| ConvLayer {
                    in_channels: l.in_channels,
                    out_channels: l.out_channels,
                    kernel: l.kernel,
                    weights: conv(&l.weights),
                    bias: conv(&l.bias),
                    relu: l.relu,
                })
                .collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn forward(&self, input: &FeatureMap<S>) -> Result<FeatureMap<S>> {
        let mut x = input.clone();
        for layer in &self.layers {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    /// Forward pass keeping every intermediate map.
    pub fn forward_trace(&self, input: &FeatureMap<S>) -> Result<Trace<S>> {
        let mut maps = Vec::with_capacity(self.layers.len() + 1);
        maps.push(input.clone());
        for layer in &self.layers {
            let next = layer.forward(maps.last().expect("nonempty"))?;
            debug_assert_eq!((next.height, next.width), (input.height, input.width));
            maps.push(next);
        }
        Ok(Trace { maps })
    }

    /// Runs the network on a TF image.
    pub fn predict(&self, image: &TfImage) -> Result<TfImage> {
        Ok(self.forward(&FeatureMap::from_image(image))?.to_image())
    }

    /// Gradients of `scale · ½‖Ŷ - Y‖²` for one sample, given its forward
    /// trace. With `scale = 1/M` and summation over the batch this is the
    /// gradient of the batch MSE loss.
    pub fn backward(&self, trace: &Trace<S>, label: &FeatureMap<S>, scale: S) -> Result<Gradients<S>> {
        let out = trace.output();
        if (out.channels, out.height, out.width) != (label.channels, label.height, label.width) {
            return Err(Error::Shape("label shape differs from network output".into()));
        }
        let mut grads = Gradients::zeros_like(self);
        let mut g = FeatureMap {
            channels: out.channels,
            height: out.height,
            width: out.width,
            data: out.data.iter().zip(&label.data).map(|(&y, &t)| (y - t) * scale).collect(),
        };
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let next = layer.backward(
                &trace.maps[i],
                &trace.maps[i + 1],
                g,
                &mut grads.weights[i],
                &mut grads.bias[i],
                i > 0,
            );
            match next {
                Some(n) => g = n,
                None => break,
            }
        }
        Ok(grads)
    }
}

/// `(1/2M) Σ_m ‖Ŷ_m - Y_m‖_F²`.
pub fn mse_loss(predictions: &[TfImage], labels: &[TfImage]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::Empty("mse_loss needs at least one prediction"));
    }
    if predictions.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut total = 0.0;
    for (p, y) in predictions.iter().zip(labels) {
        if p.shape() != y.shape() {
            return Err(Error::Shape(format!("{:?} vs {:?}", p.shape(), y.shape())));
        }
        total += p.as_slice().iter().zip(y.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(total / (2.0 * predictions.len() as f64))
}
