//! The fixed classification network: three 3x3 conv+ReLU+maxpool stages
//! with 28, 64, and 128 filters, flattened into a four-way softmax head.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::layers::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool2x2_backward,
    maxpool2x2_forward, relu, relu_backward, softmax, ConvLayer, DenseLayer, PoolArgmax,
};
use crate::nn::loss::sparse_ce_loss;
use crate::nn::AdamState;
use crate::tensor::Tensor;

/// Input images are 28x28 RGB.
pub const INPUT_HW: usize = 28;
/// Input channel count.
pub const INPUT_CHANNELS: usize = 3;
/// Diagnostic classes.
pub const NUM_CLASSES: usize = 4;
/// Filter counts of the three conv stages.
pub const CONV_FILTERS: [usize; 3] = [28, 64, 128];
/// Flattened feature width feeding the dense head (3*3*128).
pub const FLAT_FEATURES: usize = 1152;
/// Total trainable parameters across all layers.
pub const PARAMETER_COUNT: usize = 95_444;

/// Fixed order in which parameter tensors are enumerated everywhere
/// (gradients, optimizer state, checkpoints).
pub const PARAM_NAMES: [&str; 8] = [
    "conv1.kernels",
    "conv1.bias",
    "conv2.kernels",
    "conv2.bias",
    "conv3.kernels",
    "conv3.bias",
    "dense.weights",
    "dense.bias",
];

/// The network plus optional per-parameter Adam state.
#[derive(Debug, Clone)]
pub struct Model {
    pub conv1: ConvLayer,
    pub conv2: ConvLayer,
    pub conv3: ConvLayer,
    pub dense: DenseLayer,
    /// Optimizer moments in [`PARAM_NAMES`] order; `None` until training
    /// starts or when a checkpoint was saved without them.
    pub adam: Option<Vec<AdamState>>,
}

/// Everything one forward pass produces, kept for backprop and Grad-CAM.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub input: Tensor,
    pub conv1_pre: Tensor,
    pub conv1_act: Tensor,
    pub pool1: Tensor,
    pub pool1_pos: PoolArgmax,
    pub conv2_pre: Tensor,
    pub conv2_act: Tensor,
    pub pool2: Tensor,
    pub pool2_pos: PoolArgmax,
    pub conv3_pre: Tensor,
    pub conv3_act: Tensor,
    pub pool3: Tensor,
    pub pool3_pos: PoolArgmax,
    pub flat: Tensor,
    pub logits: Tensor,
    pub probs: Tensor,
}

/// Per-parameter gradients in [`PARAM_NAMES`] order.
#[derive(Debug, Clone)]
pub struct ParamGrads(pub Vec<Tensor>);

impl ParamGrads {
    pub fn zeros_like(model: &Model) -> Self {
        Self(
            model
                .param_shapes()
                .iter()
                .map(|s| Tensor::zeros(s).expect("valid shape"))
                .collect(),
        )
    }

    /// Element-wise accumulate another gradient set.
    pub fn add_assign(&mut self, other: &ParamGrads) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            for (x, &y) in a.data_mut().iter_mut().zip(b.data()) {
                *x += y;
            }
        }
    }

    /// Scale every gradient, e.g. by 1/batch_size.
    pub fn scale(&mut self, factor: f32) {
        for g in &mut self.0 {
            for x in g.data_mut() {
                *x *= factor;
            }
        }
    }
}

fn glorot_uniform(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt() as f32;
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(-a..a)).collect();
    Tensor::from_vec(shape, data).expect("valid shape")
}

/// Builds the network with Glorot-uniform kernels and zero biases,
/// deterministically from `seed`.
pub fn build_paper_model(seed: u64) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ext = crate::nn::layers::KERNEL_EXTENT;
    let rf = ext * ext;

    let mut conv_layers = Vec::with_capacity(3);
    let mut cin = INPUT_CHANNELS;
    for &cout in &CONV_FILTERS {
        let kernels = glorot_uniform(&[ext, ext, cin, cout], rf * cin, rf * cout, &mut rng);
        let bias = Tensor::zeros(&[cout]).expect("valid shape");
        conv_layers.push(ConvLayer::new(kernels, bias).expect("kernel shape is valid"));
        cin = cout;
    }
    let conv3 = conv_layers.pop().expect("three conv layers");
    let conv2 = conv_layers.pop().expect("three conv layers");
    let conv1 = conv_layers.pop().expect("three conv layers");

    let weights = glorot_uniform(&[FLAT_FEATURES, NUM_CLASSES], FLAT_FEATURES, NUM_CLASSES, &mut rng);
    let bias = Tensor::zeros(&[NUM_CLASSES]).expect("valid shape");
    let dense = DenseLayer::new(weights, bias).expect("dense shape is valid");

    Model { conv1, conv2, conv3, dense, adam: None }
}

impl Model {
    /// Parameter tensors in [`PARAM_NAMES`] order.
    pub fn params(&self) -> Vec<&Tensor> {
        vec![
            &self.conv1.kernels,
            &self.conv1.bias,
            &self.conv2.kernels,
            &self.conv2.bias,
            &self.conv3.kernels,
            &self.conv3.bias,
            &self.dense.weights,
            &self.dense.bias,
        ]
    }

    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        self.params().iter().map(|p| p.shape().to_vec()).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// One Adam update over every parameter, lazily creating the optimizer
    /// state on first use.
    pub fn apply_adam(&mut self, grads: &ParamGrads, hp: &crate::nn::AdamHyper) -> Result<()> {
        if grads.0.len() != PARAM_NAMES.len() {
            return Err(Error::Shape(format!(
                "expected {} gradient tensors, got {}",
                PARAM_NAMES.len(),
                grads.0.len()
            )));
        }
        let Model { conv1, conv2, conv3, dense, adam } = self;
        let params: [&mut Tensor; 8] = [
            &mut conv1.kernels,
            &mut conv1.bias,
            &mut conv2.kernels,
            &mut conv2.bias,
            &mut conv3.kernels,
            &mut conv3.bias,
            &mut dense.weights,
            &mut dense.bias,
        ];
        if adam.is_none() {
            *adam = Some(params.iter().map(|p| AdamState::zeros_like(p)).collect());
        }
        let states = adam.as_mut().expect("just initialized");
        for ((param, grad), state) in params.into_iter().zip(&grads.0).zip(states.iter_mut()) {
            crate::nn::adam_step(param, grad, state, hp)?;
        }
        Ok(())
    }

    /// Full forward pass of a single 28x28x3 image, keeping every
    /// intermediate activation.
    pub fn forward_trace(&self, image: &Tensor) -> Result<ForwardTrace> {
        let input = match image.shape() {
            [h, w, c] if *h == INPUT_HW && *w == INPUT_HW && *c == INPUT_CHANNELS => {
                image.reshape(&[1, INPUT_HW, INPUT_HW, INPUT_CHANNELS])?
            }
            [1, h, w, c] if *h == INPUT_HW && *w == INPUT_HW && *c == INPUT_CHANNELS => {
                image.clone()
            }
            other => {
                return Err(Error::Shape(format!(
                    "expected a [28,28,3] image, got {other:?}"
                )))
            }
        };

        let conv1_pre = conv2d_forward(&input, &self.conv1)?;
        let conv1_act = relu(&conv1_pre);
        let (pool1, pool1_pos) = maxpool2x2_forward(&conv1_act)?;

        let conv2_pre = conv2d_forward(&pool1, &self.conv2)?;
        let conv2_act = relu(&conv2_pre);
        let (pool2, pool2_pos) = maxpool2x2_forward(&conv2_act)?;

        let conv3_pre = conv2d_forward(&pool2, &self.conv3)?;
        let conv3_act = relu(&conv3_pre);
        let (pool3, pool3_pos) = maxpool2x2_forward(&conv3_act)?;

        let flat = pool3.reshape(&[1, FLAT_FEATURES])?;
        let logits = dense_forward(&flat, &self.dense)?;
        let probs = softmax(&logits)?;

        Ok(ForwardTrace {
            input,
            conv1_pre,
            conv1_act,
            pool1,
            pool1_pos,
            conv2_pre,
            conv2_act,
            pool2,
            pool2_pos,
            conv3_pre,
            conv3_act,
            pool3,
            pool3_pos,
            flat,
            logits,
            probs,
        })
    }

    /// Loss and per-parameter gradients for one labeled image, by
    /// backpropagating through the cached forward trace.
    pub fn backward_from_trace(
        &self,
        trace: &ForwardTrace,
        label: usize,
    ) -> Result<(f32, ParamGrads)> {
        let (loss, grad_logits) = sparse_ce_loss(&trace.probs, &[label])?;

        let d = dense_backward(&grad_logits, &trace.flat, &self.dense)?;
        let grad_pool3 = d.input.reshape(trace.pool3.shape())?;
        let grad_act3 = maxpool2x2_backward(&grad_pool3, &trace.pool3_pos)?;
        let grad_pre3 = relu_backward(&grad_act3, &trace.conv3_pre)?;
        let c3 = conv2d_backward(&grad_pre3, &trace.pool2, &self.conv3)?;

        let grad_act2 = maxpool2x2_backward(&c3.input, &trace.pool2_pos)?;
        let grad_pre2 = relu_backward(&grad_act2, &trace.conv2_pre)?;
        let c2 = conv2d_backward(&grad_pre2, &trace.pool1, &self.conv2)?;

        let grad_act1 = maxpool2x2_backward(&c2.input, &trace.pool1_pos)?;
        let grad_pre1 = relu_backward(&grad_act1, &trace.conv1_pre)?;
        let c1 = conv2d_backward(&grad_pre1, &trace.input, &self.conv1)?;

        let grads = ParamGrads(vec![
            c1.kernels, c1.bias, c2.kernels, c2.bias, c3.kernels, c3.bias, d.weights, d.bias,
        ]);
        Ok((loss, grads))
    }

    /// Class probabilities for a batch of images, shaped [n,4]. Pure with
    /// respect to the model; items are evaluated independently.
    pub fn predict_proba(&self, images: &Tensor) -> Result<Tensor> {
        let shape = images.shape();
        if shape.len() != 4
            || shape[1] != INPUT_HW
            || shape[2] != INPUT_HW
            || shape[3] != INPUT_CHANNELS
        {
            return Err(Error::Shape(format!(
                "expected images shaped [n,28,28,3], got {shape:?}"
            )));
        }
        let n = shape[0];
        let rows: Vec<Vec<f32>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let item = batch_item(images, i);
                let trace = self.forward_trace(&item)?;
                Ok(trace.probs.data().to_vec())
            })
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(n * NUM_CLASSES);
        for row in rows {
            data.extend_from_slice(&row);
        }
        Tensor::from_vec(&[n, NUM_CLASSES], data)
    }
}

/// Copies item `i` of a [n,28,28,3] batch into its own [28,28,3] tensor.
pub fn batch_item(images: &Tensor, i: usize) -> Tensor {
    let per = INPUT_HW * INPUT_HW * INPUT_CHANNELS;
    let slice = &images.data()[i * per..(i + 1) * per];
    Tensor::from_vec(&[INPUT_HW, INPUT_HW, INPUT_CHANNELS], slice.to_vec())
        .expect("item shape is valid")
}
