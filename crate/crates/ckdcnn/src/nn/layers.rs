//! Layer primitives: 3x3 same-padding convolution, 2x2 max pooling, ReLU,
//! dense, and softmax, each with an analytically derived backward pass.
//!
//! All forward functions take activations shaped (batch, height, width,
//! channel) and are generic over [`Scalar`] so gradient verification can run
//! the identical code in `f64`.

use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Spatial kernel extent; the architecture uses 3x3 kernels throughout.
pub const KERNEL_EXTENT: usize = 3;

/// Convolution layer with same padding and stride 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer<T = f32> {
    /// Kernels shaped [3, 3, in_channels, out_channels].
    pub kernels: Tensor<T>,
    /// One bias per output channel.
    pub bias: Tensor<T>,
}

impl<T: Scalar> ConvLayer<T> {
    pub fn new(kernels: Tensor<T>, bias: Tensor<T>) -> Result<Self> {
        let ks = kernels.shape();
        if ks.len() != 4 || ks[0] != KERNEL_EXTENT || ks[1] != KERNEL_EXTENT {
            return Err(Error::Shape(format!(
                "conv kernels must be [3,3,cin,cout], got {ks:?}"
            )));
        }
        if bias.shape() != [ks[3]] {
            return Err(Error::Shape(format!(
                "conv bias must be [{}], got {:?}",
                ks[3],
                bias.shape()
            )));
        }
        Ok(Self { kernels, bias })
    }

    pub fn in_channels(&self) -> usize {
        self.kernels.shape()[2]
    }

    pub fn out_channels(&self) -> usize {
        self.kernels.shape()[3]
    }

    pub fn parameter_count(&self) -> usize {
        self.kernels.len() + self.bias.len()
    }
}

/// Gradients produced by [`conv2d_backward`].
#[derive(Debug, Clone)]
pub struct ConvGrads<T = f32> {
    pub input: Tensor<T>,
    pub kernels: Tensor<T>,
    pub bias: Tensor<T>,
}

/// Same-padding stride-1 convolution:
/// `out[b,y,x,o] = bias[o] + sum_{dy,dx,i} input[b,y+dy-1,x+dx-1,i] * k[dy,dx,i,o]`
/// with zeros outside the input bounds.
pub fn conv2d_forward<T: Scalar>(input: &Tensor<T>, layer: &ConvLayer<T>) -> Result<Tensor<T>> {
    let ishape = input.shape();
    if ishape.len() != 4 {
        return Err(Error::Shape(format!(
            "conv input must be 4-D (n,h,w,c), got {ishape:?}"
        )));
    }
    let (n, h, w, cin) = (ishape[0], ishape[1], ishape[2], ishape[3]);
    if cin != layer.in_channels() {
        return Err(Error::Shape(format!(
            "conv input has {cin} channels but kernels expect {}",
            layer.in_channels()
        )));
    }
    let cout = layer.out_channels();
    let mut out = Tensor::zeros(&[n, h, w, cout])?;
    let kdata = layer.kernels.data();
    let bias = layer.bias.data();
    let idata = input.data();
    let odata = out.data_mut();

    for b in 0..n {
        for y in 0..h {
            for x in 0..w {
                let obase = ((b * h + y) * w + x) * cout;
                let opx = &mut odata[obase..obase + cout];
                opx.copy_from_slice(bias);
                for dy in 0..KERNEL_EXTENT {
                    let ys = y + dy;
                    if ys < 1 || ys > h {
                        continue;
                    }
                    let ys = ys - 1;
                    for dx in 0..KERNEL_EXTENT {
                        let xs = x + dx;
                        if xs < 1 || xs > w {
                            continue;
                        }
                        let xs = xs - 1;
                        let ibase = ((b * h + ys) * w + xs) * cin;
                        let ipx = &idata[ibase..ibase + cin];
                        let kbase = (dy * KERNEL_EXTENT + dx) * cin * cout;
                        for (i, &a) in ipx.iter().enumerate() {
                            let krow = &kdata[kbase + i * cout..kbase + (i + 1) * cout];
                            for (o, &kv) in opx.iter_mut().zip(krow) {
                                *o += a * kv;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Analytic gradients of [`conv2d_forward`] with respect to the input,
/// kernels, and bias.
pub fn conv2d_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    input: &Tensor<T>,
    layer: &ConvLayer<T>,
) -> Result<ConvGrads<T>> {
    let ishape = input.shape();
    let (n, h, w, cin) = (ishape[0], ishape[1], ishape[2], ishape[3]);
    let cout = layer.out_channels();
    if grad_out.shape() != [n, h, w, cout] {
        return Err(Error::Shape(format!(
            "conv grad_out shape {:?} does not match forward output [{n},{h},{w},{cout}]",
            grad_out.shape()
        )));
    }
    if cin != layer.in_channels() {
        return Err(Error::Shape(format!(
            "conv input has {cin} channels but kernels expect {}",
            layer.in_channels()
        )));
    }

    let mut grad_input = Tensor::zeros(&[n, h, w, cin])?;
    let mut grad_kernels = Tensor::zeros(layer.kernels.shape())?;
    let mut grad_bias = Tensor::zeros(&[cout])?;

    let idata = input.data();
    let kdata = layer.kernels.data();
    let gdata = grad_out.data();
    let gi = grad_input.data_mut();
    let gk = grad_kernels.data_mut();
    let gb = grad_bias.data_mut();

    for b in 0..n {
        for y in 0..h {
            for x in 0..w {
                let gbase = ((b * h + y) * w + x) * cout;
                let gpx = &gdata[gbase..gbase + cout];
                for (acc, &g) in gb.iter_mut().zip(gpx) {
                    *acc += g;
                }
                for dy in 0..KERNEL_EXTENT {
                    let ys = y + dy;
                    if ys < 1 || ys > h {
                        continue;
                    }
                    let ys = ys - 1;
                    for dx in 0..KERNEL_EXTENT {
                        let xs = x + dx;
                        if xs < 1 || xs > w {
                            continue;
                        }
                        let xs = xs - 1;
                        let ibase = ((b * h + ys) * w + xs) * cin;
                        let kbase = (dy * KERNEL_EXTENT + dx) * cin * cout;
                        for i in 0..cin {
                            let a = idata[ibase + i];
                            let gkrow = &mut gk[kbase + i * cout..kbase + (i + 1) * cout];
                            for (acc, &g) in gkrow.iter_mut().zip(gpx) {
                                *acc += a * g;
                            }
                            let krow = &kdata[kbase + i * cout..kbase + (i + 1) * cout];
                            let mut dot = T::zero();
                            for (&kv, &g) in krow.iter().zip(gpx) {
                                dot += kv * g;
                            }
                            gi[ibase + i] += dot;
                        }
                    }
                }
            }
        }
    }

    Ok(ConvGrads { input: grad_input, kernels: grad_kernels, bias: grad_bias })
}

/// Winning input positions of a pooling forward pass, needed to route
/// gradients back.
#[derive(Debug, Clone)]
pub struct PoolArgmax {
    /// Flat input offset of the window maximum, one per output element.
    pub positions: Vec<usize>,
    /// Shape of the pooled input.
    pub input_shape: [usize; 4],
}

/// 2x2 max pooling with stride 2. Odd trailing rows/columns are discarded.
/// Window ties resolve to the first cell in row-major order.
pub fn maxpool2x2_forward<T: Scalar>(input: &Tensor<T>) -> Result<(Tensor<T>, PoolArgmax)> {
    let ishape = input.shape();
    if ishape.len() != 4 {
        return Err(Error::Shape(format!(
            "pool input must be 4-D (n,h,w,c), got {ishape:?}"
        )));
    }
    let (n, h, w, c) = (ishape[0], ishape[1], ishape[2], ishape[3]);
    if h < 2 || w < 2 {
        return Err(Error::Shape(format!(
            "pool input spatial extents must be at least 2, got {h}x{w}"
        )));
    }
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Tensor::zeros(&[n, oh, ow, c])?;
    let mut positions = vec![0usize; n * oh * ow * c];
    let idata = input.data();
    let odata = out.data_mut();

    for b in 0..n {
        for oy in 0..oh {
            for ox in 0..ow {
                let obase = ((b * oh + oy) * ow + ox) * c;
                for ch in 0..c {
                    let mut best_pos = ((b * h + oy * 2) * w + ox * 2) * c + ch;
                    let mut best = idata[best_pos];
                    for wy in 0..2 {
                        for wx in 0..2 {
                            let pos = ((b * h + oy * 2 + wy) * w + ox * 2 + wx) * c + ch;
                            if idata[pos] > best {
                                best = idata[pos];
                                best_pos = pos;
                            }
                        }
                    }
                    odata[obase + ch] = best;
                    positions[obase + ch] = best_pos;
                }
            }
        }
    }
    Ok((out, PoolArgmax { positions, input_shape: [n, h, w, c] }))
}

/// Routes each output gradient to the input position that won its window;
/// every other position (including discarded rows/columns) receives zero.
pub fn maxpool2x2_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    argmax: &PoolArgmax,
) -> Result<Tensor<T>> {
    if grad_out.len() != argmax.positions.len() {
        return Err(Error::Shape(format!(
            "pool grad_out has {} elements but argmax recorded {}",
            grad_out.len(),
            argmax.positions.len()
        )));
    }
    let mut grad_input = Tensor::zeros(&argmax.input_shape)?;
    let gi = grad_input.data_mut();
    for (&pos, &g) in argmax.positions.iter().zip(grad_out.data()) {
        gi[pos] += g;
    }
    Ok(grad_input)
}

/// Element-wise `max(0, x)`.
pub fn relu<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    let data = input.data().iter().map(|&v| v.max(T::zero())).collect();
    Tensor::from_vec(input.shape(), data).expect("shape preserved")
}

/// Backward of [`relu`]: passes gradient where the cached input is strictly
/// positive; the derivative at exactly zero is taken as zero.
pub fn relu_backward<T: Scalar>(grad_out: &Tensor<T>, input: &Tensor<T>) -> Result<Tensor<T>> {
    if grad_out.shape() != input.shape() {
        return Err(Error::Shape(format!(
            "relu grad_out shape {:?} does not match input {:?}",
            grad_out.shape(),
            input.shape()
        )));
    }
    let data = grad_out
        .data()
        .iter()
        .zip(input.data())
        .map(|(&g, &x)| if x > T::zero() { g } else { T::zero() })
        .collect();
    Tensor::from_vec(input.shape(), data)
}

/// Fully connected layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T = f32> {
    /// Weights shaped [fan_in, fan_out].
    pub weights: Tensor<T>,
    /// One bias per output unit.
    pub bias: Tensor<T>,
}

impl<T: Scalar> DenseLayer<T> {
    pub fn new(weights: Tensor<T>, bias: Tensor<T>) -> Result<Self> {
        let ws = weights.shape();
        if ws.len() != 2 {
            return Err(Error::Shape(format!(
                "dense weights must be [fan_in, fan_out], got {ws:?}"
            )));
        }
        if bias.shape() != [ws[1]] {
            return Err(Error::Shape(format!(
                "dense bias must be [{}], got {:?}",
                ws[1],
                bias.shape()
            )));
        }
        Ok(Self { weights, bias })
    }

    pub fn fan_in(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn fan_out(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Gradients produced by [`dense_backward`].
#[derive(Debug, Clone)]
pub struct DenseGrads<T = f32> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

/// `out = input . W + b` for a 2-D batch of row vectors.
pub fn dense_forward<T: Scalar>(input: &Tensor<T>, layer: &DenseLayer<T>) -> Result<Tensor<T>> {
    if input.ndim() != 2 || input.shape()[1] != layer.fan_in() {
        return Err(Error::Shape(format!(
            "dense input must be [n,{}], got {:?}",
            layer.fan_in(),
            input.shape()
        )));
    }
    let mut out = input.matmul(&layer.weights)?;
    let fan_out = layer.fan_out();
    let bias = layer.bias.data();
    for row in out.data_mut().chunks_mut(fan_out) {
        for (o, &b) in row.iter_mut().zip(bias) {
            *o += b;
        }
    }
    Ok(out)
}

/// Matrix-calculus gradients of [`dense_forward`].
pub fn dense_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    input: &Tensor<T>,
    layer: &DenseLayer<T>,
) -> Result<DenseGrads<T>> {
    let (n, fan_in, fan_out) = (input.shape()[0], layer.fan_in(), layer.fan_out());
    if grad_out.shape() != [n, fan_out] {
        return Err(Error::Shape(format!(
            "dense grad_out must be [{n},{fan_out}], got {:?}",
            grad_out.shape()
        )));
    }
    if input.shape()[1] != fan_in {
        return Err(Error::Shape(format!(
            "dense cached input must be [n,{fan_in}], got {:?}",
            input.shape()
        )));
    }

    // grad_input = grad_out . W^T
    let mut grad_input = Tensor::zeros(&[n, fan_in])?;
    let gi = grad_input.data_mut();
    let wdata = layer.weights.data();
    let gdata = grad_out.data();
    for r in 0..n {
        let grow = &gdata[r * fan_out..(r + 1) * fan_out];
        let girow = &mut gi[r * fan_in..(r + 1) * fan_in];
        for (i, gv) in girow.iter_mut().enumerate() {
            let wrow = &wdata[i * fan_out..(i + 1) * fan_out];
            let mut dot = T::zero();
            for (&wv, &g) in wrow.iter().zip(grow) {
                dot += wv * g;
            }
            *gv = dot;
        }
    }

    // grad_W = input^T . grad_out; grad_b = column sums of grad_out
    let mut grad_weights = Tensor::zeros(&[fan_in, fan_out])?;
    let mut grad_bias = Tensor::zeros(&[fan_out])?;
    let gw = grad_weights.data_mut();
    let gb = grad_bias.data_mut();
    let idata = input.data();
    for r in 0..n {
        let grow = &gdata[r * fan_out..(r + 1) * fan_out];
        for (acc, &g) in gb.iter_mut().zip(grow) {
            *acc += g;
        }
        for i in 0..fan_in {
            let a = idata[r * fan_in + i];
            let gwrow = &mut gw[i * fan_out..(i + 1) * fan_out];
            for (acc, &g) in gwrow.iter_mut().zip(grow) {
                *acc += a * g;
            }
        }
    }

    Ok(DenseGrads { input: grad_input, weights: grad_weights, bias: grad_bias })
}

/// Row-wise numerically stable softmax: `exp(x - rowmax) / sum`.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Result<Tensor<T>> {
    if logits.ndim() != 2 {
        return Err(Error::Shape(format!(
            "softmax expects a 2-D tensor, got {:?}",
            logits.shape()
        )));
    }
    let c = logits.shape()[1];
    let mut out = logits.clone();
    for row in out.data_mut().chunks_mut(c) {
        let mut row_max = row[0];
        for &v in row.iter() {
            row_max = row_max.max(v);
        }
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - row_max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], data: &[f32]) -> Tensor<f32> {
        Tensor::from_vec(shape, data.to_vec()).unwrap()
    }

    fn conv_1ch(kernel: [f32; 9], bias: f32) -> ConvLayer<f32> {
        ConvLayer::new(
            Tensor::from_vec(&[3, 3, 1, 1], kernel.to_vec()).unwrap(),
            Tensor::from_vec(&[1], vec![bias]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn conv_forward_bias_only_on_zero_input() {
        let input = Tensor::<f32>::zeros(&[1, 3, 3, 1]).unwrap();
        let layer = conv_1ch([0.3, -1.0, 0.7, 2.0, 0.1, -0.4, 0.9, 0.0, 5.0], 0.5);
        let out = conv2d_forward(&input, &layer).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn conv_forward_all_ones_kernel_edge_counts() {
        // 3x3 input of ones, all-ones kernel, zero bias: each output counts
        // the in-bounds taps (4 at corners, 6 at edge centers, 9 at center).
        let input = Tensor::<f32>::new(&[1, 3, 3, 1], 1.0).unwrap();
        let layer = conv_1ch([1.0; 9], 0.0);
        let out = conv2d_forward(&input, &layer).unwrap();
        let expect = [4.0, 6.0, 4.0, 6.0, 9.0, 6.0, 4.0, 6.0, 4.0];
        assert_eq!(out.data(), &expect);
    }

    #[test]
    fn conv_forward_same_padding_preserves_spatial_shape() {
        let input = Tensor::<f32>::zeros(&[2, 28, 28, 3]).unwrap();
        let kernels = Tensor::<f32>::zeros(&[3, 3, 3, 28]).unwrap();
        let bias = Tensor::<f32>::zeros(&[28]).unwrap();
        let layer = ConvLayer::new(kernels, bias).unwrap();
        let out = conv2d_forward(&input, &layer).unwrap();
        assert_eq!(out.shape(), &[2, 28, 28, 28]);
    }

    #[test]
    fn conv_forward_channel_mismatch_rejected() {
        let input = Tensor::<f32>::zeros(&[1, 4, 4, 2]).unwrap();
        let layer = conv_1ch([0.0; 9], 0.0);
        assert!(matches!(conv2d_forward(&input, &layer), Err(Error::Shape(_))));
    }

    #[test]
    fn conv_backward_zero_grad_gives_zero() {
        let input = t(&[1, 3, 3, 1], &[0.5, -1.0, 2.0, 0.0, 1.5, -0.5, 3.0, 0.25, -2.0]);
        let layer = conv_1ch([0.3, -1.0, 0.7, 2.0, 0.1, -0.4, 0.9, 0.0, 5.0], 0.5);
        let grads =
            conv2d_backward(&Tensor::zeros(&[1, 3, 3, 1]).unwrap(), &input, &layer).unwrap();
        assert!(grads.input.data().iter().all(|&v| v == 0.0));
        assert!(grads.kernels.data().iter().all(|&v| v == 0.0));
        assert!(grads.bias.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conv_backward_delta_grad_stamps_kernel() {
        // A single unit of output gradient at the center routes back a copy
        // of the kernel onto grad_input: hand-expanding the correlation sum
        // gives grad_input[y0+dy-1, x0+dx-1] = k[dy, dx].
        let kernel = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let layer = conv_1ch(kernel, 0.0);
        let input = Tensor::<f32>::new(&[1, 3, 3, 1], 0.1).unwrap();
        let mut grad_out = Tensor::<f32>::zeros(&[1, 3, 3, 1]).unwrap();
        grad_out.set4(0, 1, 1, 0, 1.0);
        let grads = conv2d_backward(&grad_out, &input, &layer).unwrap();
        assert_eq!(grads.input.data(), &kernel);
    }

    #[test]
    fn pool_forward_small_cases() {
        let input = t(&[1, 2, 2, 1], &[1.0, 2.0, 3.0, 4.0]);
        let (out, argmax) = maxpool2x2_forward(&input).unwrap();
        assert_eq!(out.data(), &[4.0]);
        assert_eq!(argmax.positions, vec![3]);

        // 7x7 floors to 3x3; row/col 6 are discarded.
        let odd = Tensor::<f32>::zeros(&[1, 7, 7, 1]).unwrap();
        let (out, _) = maxpool2x2_forward(&odd).unwrap();
        assert_eq!(out.shape(), &[1, 3, 3, 1]);
    }

    #[test]
    fn pool_ties_take_window_top_left() {
        let input = Tensor::<f32>::new(&[1, 4, 4, 2], 7.0).unwrap();
        let (out, argmax) = maxpool2x2_forward(&input).unwrap();
        assert!(out.data().iter().all(|&v| v == 7.0));
        for (e, &pos) in argmax.positions.iter().enumerate() {
            let c = e % 2;
            let ox = (e / 2) % 2;
            let oy = e / 4;
            assert_eq!(pos, ((oy * 2) * 4 + ox * 2) * 2 + c);
        }
    }

    #[test]
    fn pool_rejects_tiny_inputs() {
        let input = Tensor::<f32>::zeros(&[1, 1, 4, 1]).unwrap();
        assert!(matches!(maxpool2x2_forward(&input), Err(Error::Shape(_))));
    }

    #[test]
    fn pool_backward_routes_to_argmax() {
        let input = t(&[1, 2, 2, 1], &[1.0, 2.0, 3.0, 4.0]);
        let (_, argmax) = maxpool2x2_forward(&input).unwrap();
        let grad = maxpool2x2_backward(&t(&[1, 1, 1, 1], &[1.0]), &argmax).unwrap();
        assert_eq!(grad.data(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn pool_backward_conserves_gradient_mass() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let input = Tensor::<f32>::from_vec(
            &[1, 6, 6, 2],
            (0..72).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let (out, argmax) = maxpool2x2_forward(&input).unwrap();
        let grad_out = Tensor::<f32>::from_vec(
            out.shape(),
            (0..out.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let grad_in = maxpool2x2_backward(&grad_out, &argmax).unwrap();
        let sum_out: f32 = grad_out.data().iter().sum();
        let sum_in: f32 = grad_in.data().iter().sum();
        assert!((sum_out - sum_in).abs() < 1e-5);
    }

    #[test]
    fn relu_clamps_and_backward_masks() {
        let x = t(&[3], &[-1.0, 0.0, 2.0]);
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
        let g = relu_backward(&t(&[3], &[1.0, 1.0, 1.0]), &x).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn relu_nonnegative_and_identity_on_positive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let x = Tensor::<f32>::from_vec(
            &[50],
            (0..50).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        )
        .unwrap();
        let y = relu(&x);
        for (&xi, &yi) in x.data().iter().zip(y.data()) {
            assert!(yi >= 0.0);
            if xi > 0.0 {
                assert_eq!(yi, xi);
            }
        }
    }

    #[test]
    fn dense_forward_bias_broadcast() {
        let layer = DenseLayer::new(
            Tensor::<f32>::zeros(&[3, 4]).unwrap(),
            t(&[4], &[1.0, 2.0, 3.0, 4.0]),
        )
        .unwrap();
        let out = dense_forward(&Tensor::zeros(&[2, 3]).unwrap(), &layer).unwrap();
        assert_eq!(out.data(), &[1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn dense_paper_head_parameter_count() {
        let layer = DenseLayer::new(
            Tensor::<f32>::zeros(&[1152, 4]).unwrap(),
            Tensor::<f32>::zeros(&[4]).unwrap(),
        )
        .unwrap();
        assert_eq!(layer.parameter_count(), 4612);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let out = softmax(&t(&[1, 4], &[0.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(out.data(), &[0.25, 0.25, 0.25, 0.25]);

        let big = softmax(&t(&[1, 4], &[1000.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(big.data().iter().all(|v| v.is_finite()));
        assert!((big.data()[0] - 1.0).abs() < 1e-6);

        let x = t(&[2, 4], &[0.3, -1.2, 2.0, 0.7, -0.1, 0.0, 0.1, 0.2]);
        let p = softmax(&x).unwrap();
        for row in p.data().chunks(4) {
            let s: f32 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-6);
            assert!(row.iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn softmax_shift_invariance() {
        let x = Tensor::<f64>::from_vec(&[1, 4], vec![0.4, -0.3, 1.1, 0.0]).unwrap();
        let shifted =
            Tensor::<f64>::from_vec(&[1, 4], x.data().iter().map(|v| v + 12.5).collect()).unwrap();
        let a = softmax(&x).unwrap();
        let b = softmax(&shifted).unwrap();
        for (p, q) in a.data().iter().zip(b.data()) {
            assert!((p - q).abs() < 1e-9);
        }
    }
}
