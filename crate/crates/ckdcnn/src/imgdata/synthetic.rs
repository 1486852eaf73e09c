//! Synthetic stand-in data: each class plants a bright blob inside its own
//! image quadrant, so both classification and Grad-CAM localization have a
//! known ground truth.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LabeledSet;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

const HW: usize = 28;
const HALF: usize = HW / 2;

/// Half-open pixel bounds of an image quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrant {
    pub y0: usize,
    pub y1: usize,
    pub x0: usize,
    pub x1: usize,
}

impl Quadrant {
    pub fn contains(&self, y: usize, x: usize) -> bool {
        y >= self.y0 && y < self.y1 && x >= self.x0 && x < self.x1
    }
}

/// Quadrant holding class `class_id`'s evidence: 0 top-left, 1 top-right,
/// 2 bottom-left, 3 bottom-right.
pub fn class_quadrant(class_id: usize) -> Quadrant {
    assert!(class_id < 4, "class id {class_id} out of range");
    let (top, left) = (class_id < 2, class_id % 2 == 0);
    Quadrant {
        y0: if top { 0 } else { HALF },
        y1: if top { HALF } else { HW },
        x0: if left { 0 } else { HALF },
        x1: if left { HALF } else { HW },
    }
}

/// Per-channel tint of each class's blob. Giving every class its own color
/// makes the evidence channel-coded as well as position-coded, so
/// channel-weighting explanation methods have a meaningful target.
const CLASS_COLORS: [[f32; 3]; 4] = [
    [1.0, 0.25, 0.2],  // Cyst: red
    [0.2, 1.0, 0.25],  // Normal: green
    [0.25, 0.3, 1.0],  // Stone: blue
    [0.95, 0.9, 0.15], // Tumor: yellow
];

fn quadrant_contrast(pixels: &[f32], quad: &Quadrant) -> (f32, f32) {
    let (mut inside, mut outside) = (0f32, 0f32);
    let (mut n_in, mut n_out) = (0usize, 0usize);
    for y in 0..HW {
        for x in 0..HW {
            let v: f32 = (0..3).map(|c| pixels[(y * HW + x) * 3 + c]).sum::<f32>() / 3.0;
            if quad.contains(y, x) {
                inside += v;
                n_in += 1;
            } else {
                outside += v;
                n_out += 1;
            }
        }
    }
    (inside / n_in as f32, outside / n_out as f32)
}

/// Generates `per_class[k]` images of class k: low uniform noise everywhere
/// plus a bright radial blob at a random position inside
/// [`class_quadrant`]`(k)`. Deterministic for a fixed seed.
pub fn generate_synthetic_dataset(per_class: [usize; 4], seed: u64) -> Result<LabeledSet> {
    let total: usize = per_class.iter().sum();
    if total == 0 {
        return Err(Error::Data("all per-class counts are zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(total * HW * HW * 3);
    let mut labels = Vec::with_capacity(total);

    for (class_id, &count) in per_class.iter().enumerate() {
        let quad = class_quadrant(class_id);
        for _ in 0..count {
            let mut pixels = vec![0f32; HW * HW * 3];
            for v in pixels.iter_mut() {
                *v = rng.gen_range(0.05..0.35);
            }
            let radius: f32 = rng.gen_range(2.5..4.0);
            let margin = radius.ceil() as usize + 1;
            let cy = rng.gen_range(quad.y0 + margin..quad.y1 - margin) as f32;
            let cx = rng.gen_range(quad.x0 + margin..quad.x1 - margin) as f32;
            let amplitude: f32 = rng.gen_range(0.55..0.75);
            for y in quad.y0..quad.y1 {
                for x in quad.x0..quad.x1 {
                    let d2 = (y as f32 - cy).powi(2) + (x as f32 - cx).powi(2);
                    let bump = amplitude * (1.0 - d2 / (radius * radius)).max(0.0);
                    if bump > 0.0 {
                        for c in 0..3 {
                            let p = &mut pixels[(y * HW + x) * 3 + c];
                            *p = (*p + bump).min(1.0);
                        }
                    }
                }
            }
            let (inside, outside) = quadrant_contrast(&pixels, &quad);
            assert!(
                inside > outside,
                "generated class-{class_id} image lacks quadrant contrast"
            );
            data.extend_from_slice(&pixels);
            labels.push(class_id);
        }
    }

    let images = Tensor::from_vec(&[total, HW, HW, 3], data)?;
    LabeledSet::new(images, labels)
}
