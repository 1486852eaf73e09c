//! Grad-CAM: class-specific heatmaps from the gradient of a class logit
//! with respect to the final convolution's post-ReLU activation, rendered
//! as colorized overlays.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imgdata::{bilinear_resize_plane, ImageRgb};
use crate::nn::model::{Model, NUM_CLASSES};
use crate::nn::maxpool2x2_backward;
use crate::tensor::Tensor;

pub use crate::imgdata::write_png;

/// Layer whose activations the heatmap is computed from.
pub const SOURCE_LAYER: &str = "conv3/relu";

/// Non-negative, min-max normalized activation map for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    /// 2-D grid in [0,1]: 7x7 native, 28x28 after upsampling.
    pub map: Tensor,
    pub class_id: usize,
    pub source_layer: &'static str,
}

/// A colorized heatmap over its base image.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayImage {
    pub base: ImageRgb,
    pub heat_color: ImageRgb,
    /// Blend weight of the heat layer.
    pub alpha: f32,
}

fn minmax_normalize(values: &mut [f32]) {
    let mut lo = f32::MAX;
    let mut hi = f32::MIN;
    for &v in values.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi > lo {
        for v in values.iter_mut() {
            *v = (*v - lo) / (hi - lo);
        }
    } else if hi != 0.0 {
        // Constant non-zero map: every cell is the maximum.
        for v in values.iter_mut() {
            *v = 1.0;
        }
    }
    // Constant zero map stays all-zero.
}

/// Computes the 7x7 Grad-CAM map for `class_id`: channel weights are the
/// spatial means of the class logit's gradient at the final conv
/// activation; the weighted activation sum is ReLU-rectified and min-max
/// normalized into [0,1].
pub fn gradcam_map(model: &Model, image: &Tensor, class_id: usize) -> Result<Heatmap> {
    if class_id >= NUM_CLASSES {
        return Err(Error::Input(format!(
            "class id {class_id} out of range 0..{NUM_CLASSES}"
        )));
    }
    let trace = model.forward_trace(image)?;

    // Gradient of the class logit (pre-softmax) w.r.t. the flattened
    // features is the dense weight column; route it back through the pool.
    let fan_out = model.dense.fan_out();
    let fan_in = model.dense.fan_in();
    let wdata = model.dense.weights.data();
    let grad_flat: Vec<f32> = (0..fan_in).map(|i| wdata[i * fan_out + class_id]).collect();
    let grad_pool3 = Tensor::from_vec(trace.pool3.shape(), grad_flat)?;
    let grad_act = maxpool2x2_backward(&grad_pool3, &trace.pool3_pos)?;

    let act = &trace.conv3_act;
    let shape = act.shape();
    let (h, w, c) = (shape[1], shape[2], shape[3]);
    let spatial = (h * w) as f32;

    let mut channel_weights = vec![0f32; c];
    for px in grad_act.data().chunks(c) {
        for (acc, &g) in channel_weights.iter_mut().zip(px) {
            *acc += g;
        }
    }
    for acc in channel_weights.iter_mut() {
        *acc /= spatial;
    }

    let mut raw = vec![0f32; h * w];
    for (cell, px) in raw.iter_mut().zip(act.data().chunks(c)) {
        let mut sum = 0f32;
        for (&a, &alpha) in px.iter().zip(&channel_weights) {
            sum += alpha * a;
        }
        *cell = sum.max(0.0);
    }
    minmax_normalize(&mut raw);

    Ok(Heatmap {
        map: Tensor::from_vec(&[h, w], raw)?,
        class_id,
        source_layer: SOURCE_LAYER,
    })
}

/// Bilinear upsample of a heatmap to 28x28, with the same pixel-center
/// alignment as the image rescaler. Values remain in [0,1].
pub fn upsample_bilinear(map: &Heatmap) -> Heatmap {
    let (h, w) = (map.map.shape()[0], map.map.shape()[1]);
    let resized = bilinear_resize_plane(map.map.data(), h, w, 28, 28);
    Heatmap {
        map: Tensor::from_vec(&[28, 28], resized).expect("fixed output shape"),
        class_id: map.class_id,
        source_layer: map.source_layer,
    }
}

/// Piecewise-linear colormap: 0 -> blue, 0.5 -> green, 1 -> red.
pub fn heat_color(t: f32) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    if t <= 0.5 {
        let u = 2.0 * t;
        [0, (255.0 * u).round() as u8, (255.0 * (1.0 - u)).round() as u8]
    } else {
        let u = 2.0 * t - 1.0;
        [(255.0 * u).round() as u8, (255.0 * (1.0 - u)).round() as u8, 0]
    }
}

/// Colorizes a heatmap and pairs it with its base image for blending.
pub fn colorize_overlay(map: &Heatmap, base: &ImageRgb, alpha: f32) -> Result<OverlayImage> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Input(format!("alpha must lie in [0,1], got {alpha}")));
    }
    let (h, w) = (map.map.shape()[0], map.map.shape()[1]);
    if base.height != h || base.width != w {
        return Err(Error::Input(format!(
            "heatmap is {h}x{w} but base image is {}x{}",
            base.height, base.width
        )));
    }
    let mut pixels = Vec::with_capacity(h * w * 3);
    for &v in map.map.data() {
        pixels.extend_from_slice(&heat_color(v));
    }
    Ok(OverlayImage {
        base: base.clone(),
        heat_color: ImageRgb::new(h, w, pixels)?,
        alpha,
    })
}

impl OverlayImage {
    /// Blends heat over base: `(1 - alpha) * base + alpha * color`, rounded
    /// per channel.
    pub fn composite(&self) -> ImageRgb {
        let pixels = self
            .base
            .pixels
            .iter()
            .zip(&self.heat_color.pixels)
            .map(|(&b, &c)| ((1.0 - self.alpha) * b as f32 + self.alpha * c as f32).round() as u8)
            .collect();
        ImageRgb::new(self.base.height, self.base.width, pixels)
            .expect("base and heat dimensions agree")
    }

    /// Writes the composited overlay as a PNG.
    pub fn write_png(&self, path: &Path) -> Result<()> {
        write_png(&self.composite(), path)
    }
}

/// Output file name convention for explanation images.
pub fn overlay_file_name(input_stem: &str, class_id: usize) -> String {
    format!(
        "{input_stem}.gradcam.{}.png",
        crate::imgdata::CLASS_NAMES[class_id]
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgdata::{class_quadrant, generate_synthetic_dataset};
    use crate::nn::model::{batch_item, build_paper_model};
    use crate::nn::{fit, TrainConfig};

    #[test]
    fn zero_activation_map_stays_zero() {
        // A blacked-out input leaves conv activations at the (zero) biases,
        // so the weighted sum is zero everywhere and normalization must not
        // invent heat.
        let model = build_paper_model(2);
        let image = Tensor::zeros(&[28, 28, 3]).unwrap();
        let heat = gradcam_map(&model, &image, 1).unwrap();
        assert_eq!(heat.map.shape(), &[7, 7]);
        assert!(heat.map.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nonpositive_channel_weights_yield_zero_map() {
        // Forcing the class-0 weight column negative makes every channel
        // weight non-positive; ReLU then kills the whole weighted sum.
        let mut model = build_paper_model(11);
        let fan_out = model.dense.fan_out();
        for i in 0..model.dense.fan_in() {
            let w = &mut model.dense.weights.data_mut()[i * fan_out];
            *w = -w.abs() - 0.01;
        }
        let data = generate_synthetic_dataset([1, 0, 0, 0], 4).unwrap();
        let heat = gradcam_map(&model, &batch_item(&data.images, 0), 0).unwrap();
        assert!(heat.map.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nonzero_map_peaks_at_one_and_stays_in_unit_range() {
        let model = build_paper_model(4);
        let data = generate_synthetic_dataset([1, 0, 0, 0], 9).unwrap();
        let image = batch_item(&data.images, 0);
        for class_id in 0..4 {
            let heat = gradcam_map(&model, &image, class_id).unwrap();
            let max = heat.map.data().iter().fold(f32::MIN, |a, &b| a.max(b));
            let min = heat.map.data().iter().fold(f32::MAX, |a, &b| a.min(b));
            assert!(min >= 0.0 && max <= 1.0);
            if heat.map.data().iter().any(|&v| v != 0.0) {
                assert_eq!(max, 1.0);
            }
        }
    }

    #[test]
    fn doubling_class_weights_leaves_normalized_map_unchanged() {
        let model = build_paper_model(6);
        let data = generate_synthetic_dataset([0, 1, 0, 0], 3).unwrap();
        let image = batch_item(&data.images, 0);
        let before = gradcam_map(&model, &image, 1).unwrap();

        let mut scaled = model.clone();
        let fan_out = scaled.dense.fan_out();
        for i in 0..scaled.dense.fan_in() {
            scaled.dense.weights.data_mut()[i * fan_out + 1] *= 2.0;
        }
        let after = gradcam_map(&scaled, &image, 1).unwrap();
        assert_eq!(before.map, after.map);
    }

    #[test]
    fn gradcam_is_deterministic() {
        let model = build_paper_model(8);
        let data = generate_synthetic_dataset([0, 0, 1, 0], 5).unwrap();
        let image = batch_item(&data.images, 0);
        let a = gradcam_map(&model, &image, 2).unwrap();
        let b = gradcam_map(&model, &image, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn class_out_of_range_rejected() {
        let model = build_paper_model(0);
        let image = Tensor::zeros(&[28, 28, 3]).unwrap();
        assert!(matches!(gradcam_map(&model, &image, 4), Err(Error::Input(_))));
    }

    #[test]
    fn upsample_constant_and_hot_corner() {
        let constant = Heatmap {
            map: Tensor::new(&[7, 7], 0.6).unwrap(),
            class_id: 0,
            source_layer: SOURCE_LAYER,
        };
        let up = upsample_bilinear(&constant);
        assert_eq!(up.map.shape(), &[28, 28]);
        assert!(up.map.data().iter().all(|&v| (v - 0.6).abs() < 1e-6));

        let mut corner = Tensor::zeros(&[7, 7]).unwrap();
        corner.data_mut()[0] = 1.0;
        let heat = Heatmap { map: corner, class_id: 0, source_layer: SOURCE_LAYER };
        let up = upsample_bilinear(&heat);
        assert_eq!(up.map.get2(0, 0), 1.0);
        // Decays monotonically away from the hot corner along row 0 and
        // column 0, and never leaves [0,1].
        for i in 1..28 {
            assert!(up.map.get2(0, i) <= up.map.get2(0, i - 1));
            assert!(up.map.get2(i, 0) <= up.map.get2(i - 1, 0));
        }
        for &v in up.map.data() {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn colormap_endpoints_and_blend() {
        assert_eq!(heat_color(0.0), [0, 0, 255]);
        assert_eq!(heat_color(0.5), [0, 255, 0]);
        assert_eq!(heat_color(1.0), [255, 0, 0]);

        let base = ImageRgb::filled(28, 28, [255, 255, 255]).unwrap();
        let hot = Heatmap {
            map: Tensor::new(&[28, 28], 1.0).unwrap(),
            class_id: 3,
            source_layer: SOURCE_LAYER,
        };

        // alpha 0 with zero heat returns the base untouched.
        let cold = Heatmap {
            map: Tensor::new(&[28, 28], 0.0).unwrap(),
            ..hot.clone()
        };
        let overlay = colorize_overlay(&cold, &base, 0.0).unwrap();
        assert_eq!(overlay.composite(), base);

        // Full-alpha heat 1.0 is pure red.
        let overlay = colorize_overlay(&hot, &base, 1.0).unwrap();
        assert_eq!(overlay.composite().get(5, 5), [255, 0, 0]);

        // Half blend on white: (255, 128, 128) after round-half-up.
        let overlay = colorize_overlay(&hot, &base, 0.5).unwrap();
        assert_eq!(overlay.composite().get(0, 0), [255, 128, 128]);

        assert!(matches!(
            colorize_overlay(&hot, &base, 1.5),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn trained_model_localizes_evidence_quadrant() {
        // Train briefly on quadrant-coded data, then check the heat lands
        // inside the class quadrant for correctly classified samples.
        let data = generate_synthetic_dataset([40, 40, 40, 40], 77).unwrap();
        let mut model = build_paper_model(77);
        let cfg = TrainConfig { epochs: 6, ..Default::default() };
        fit(&mut model, &data, &data, &cfg).unwrap();

        let probe = generate_synthetic_dataset([10, 10, 10, 10], 78).unwrap();
        let probs = model.predict_proba(&probe.images).unwrap();
        let preds = probs.argmax_last_axis().unwrap();

        let mut localized = 0usize;
        let mut checked = 0usize;
        for i in 0..probe.len() {
            if preds[i] != probe.labels[i] {
                continue;
            }
            checked += 1;
            let heat = upsample_bilinear(
                &gradcam_map(&model, &batch_item(&probe.images, i), probe.labels[i]).unwrap(),
            );
            let quad = class_quadrant(probe.labels[i]);
            let (mut inside, mut outside) = (0f64, 0f64);
            let (mut n_in, mut n_out) = (0usize, 0usize);
            for y in 0..28 {
                for x in 0..28 {
                    let v = heat.map.get2(y, x) as f64;
                    if quad.contains(y, x) {
                        inside += v;
                        n_in += 1;
                    } else {
                        outside += v;
                        n_out += 1;
                    }
                }
            }
            if inside / n_in as f64 > outside / n_out as f64 {
                localized += 1;
            }
        }
        assert!(checked >= 20, "model failed to classify the probe set");
        assert!(
            localized as f64 >= 0.9 * checked as f64,
            "only {localized}/{checked} heatmaps localized"
        );
    }

    #[test]
    fn overlay_file_name_convention() {
        assert_eq!(overlay_file_name("scan_012", 3), "scan_012.gradcam.Tumor.png");
    }
}
