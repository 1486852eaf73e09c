//! Dataset ingestion, preprocessing, deterministic splits, and the
//! synthetic generator used for desk-scale verification.

mod dataset;
mod image;
mod split;
mod synthetic;

pub use dataset::{load_directory_dataset, write_dataset_layout, DecodePolicy, LoadOptions, LoadOutcome};
pub use image::{
    bgr_to_rgb, decode_image, image_from_unit_tensor, normalize_to_unit, resize_bilinear_28,
    write_png, ImageRgb,
};
pub(crate) use image::bilinear_resize_plane;
pub use split::{split_indices, split_train_test, split_train_val, SplitPair, DEFAULT_SPLIT_SEED};
pub use synthetic::{class_quadrant, generate_synthetic_dataset, Quadrant};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Class names in label order: Cyst = 0, Normal = 1, Stone = 2, Tumor = 3.
pub const CLASS_NAMES: [&str; 4] = ["Cyst", "Normal", "Stone", "Tumor"];

/// Maps a class name (case-insensitive) to its integer label.
pub fn encode_label(class_name: &str) -> Result<usize> {
    CLASS_NAMES
        .iter()
        .position(|n| n.eq_ignore_ascii_case(class_name))
        .ok_or_else(|| {
            Error::Label(format!(
                "unknown class {class_name:?}; valid names are {}",
                CLASS_NAMES.join(", ")
            ))
        })
}

/// Unit-range images paired with integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    /// Images shaped [n,28,28,3] with values in [0,1].
    pub images: Tensor,
    /// One label in 0..=3 per image.
    pub labels: Vec<usize>,
}

impl LabeledSet {
    pub fn new(images: Tensor, labels: Vec<usize>) -> Result<Self> {
        let shape = images.shape();
        if shape.len() != 4 || shape[1] != 28 || shape[2] != 28 || shape[3] != 3 {
            return Err(Error::Shape(format!(
                "labeled images must be [n,28,28,3], got {shape:?}"
            )));
        }
        if shape[0] != labels.len() {
            return Err(Error::Data(format!(
                "{} images but {} labels",
                shape[0],
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= CLASS_NAMES.len()) {
            return Err(Error::Label(format!("label {bad} out of range 0..4")));
        }
        if images.data().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::Data("image values must lie in [0,1]".into()));
        }
        Ok(Self { images, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Per-class sample counts.
    pub fn class_counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// New set containing the given sample indices, in the given order.
    pub fn gather(&self, indices: &[usize]) -> Result<LabeledSet> {
        if indices.is_empty() {
            return Err(Error::Data("cannot gather an empty sample selection".into()));
        }
        let per = 28 * 28 * 3;
        let mut data = Vec::with_capacity(indices.len() * per);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Data(format!(
                    "index {i} out of range for a set of {}",
                    self.len()
                )));
            }
            data.extend_from_slice(&self.images.data()[i * per..(i + 1) * per]);
            labels.push(self.labels[i]);
        }
        let images = Tensor::from_vec(&[indices.len(), 28, 28, 3], data)?;
        LabeledSet::new(images, labels)
    }
}
