//! SMOTE class balancing on flattened pixel features: each synthetic sample
//! interpolates between a class member and one of its k nearest same-class
//! neighbors.
//!
//! Features are held in `f64` so the recorded interpolation factor can be
//! recovered from the output to verification precision.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imgdata::LabeledSet;
use crate::tensor::Tensor;

/// Feature width of a flattened 28x28x3 image.
pub const IMAGE_FEATURE_WIDTH: usize = 28 * 28 * 3;

/// Canonical SMOTE neighborhood size.
pub const DEFAULT_K_NEIGHBORS: usize = 5;

/// Row-major 2-D feature matrix with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "feature matrix extents must be positive, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if labels.len() != rows {
            return Err(Error::Data(format!(
                "{rows} feature rows but {} labels",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= 4) {
            return Err(Error::Label(format!("label {bad} out of range 0..4")));
        }
        Ok(Self { rows, cols, values, labels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn class_counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Flattens [n,28,28,3] images into an [n,2352] feature matrix; row i is
/// image i in row-major order. Lossless.
pub fn flatten_images(set: &LabeledSet) -> FeatureMatrix {
    let n = set.len();
    let values = set.images.data().iter().map(|&v| v as f64).collect();
    FeatureMatrix::new(n, IMAGE_FEATURE_WIDTH, values, set.labels.clone())
        .expect("labeled set dimensions are valid")
}

/// Inverse of [`flatten_images`]: rebuilds the [n,28,28,3] tensor. Values
/// pass through unchanged (up to the storage narrowing back to `f32`).
pub fn restore_tensor4d(features: &FeatureMatrix) -> Result<LabeledSet> {
    if features.cols != IMAGE_FEATURE_WIDTH {
        return Err(Error::Shape(format!(
            "restoring images needs {IMAGE_FEATURE_WIDTH} columns, got {}",
            features.cols
        )));
    }
    let data: Vec<f32> = features.values.iter().map(|&v| v as f32).collect();
    let images = Tensor::from_vec(&[features.rows, 28, 28, 3], data)?;
    LabeledSet::new(images, features.labels.clone())
}

/// How far each class is oversampled. Targets are identical across classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BalancePlan {
    pub current: [usize; 4],
    pub target: [usize; 4],
    pub k_neighbors: usize,
}

impl BalancePlan {
    pub fn new(current: [usize; 4], target: usize, k_neighbors: usize) -> Result<Self> {
        if k_neighbors == 0 {
            return Err(Error::Config("k_neighbors must be at least 1".into()));
        }
        if let Some(class_id) = (0..4).find(|&c| target < current[c]) {
            return Err(Error::Balance(format!(
                "target {target} is below class {class_id}'s current count {}",
                current[class_id]
            )));
        }
        Ok(Self { current, target: [target; 4], k_neighbors })
    }

    /// Plan that raises every class to the majority count.
    pub fn to_majority(current: [usize; 4], k_neighbors: usize) -> Result<Self> {
        let majority = current.into_iter().max().unwrap_or(0);
        Self::new(current, majority, k_neighbors)
    }

    pub fn total_after(&self) -> usize {
        self.target.iter().sum()
    }
}

/// Per-member neighbor lists for one class.
#[derive(Debug, Clone)]
pub struct KnnIndices {
    /// Feature-matrix rows belonging to the class, in row order.
    pub members: Vec<usize>,
    /// For each member, the feature-matrix rows of its nearest same-class
    /// neighbors (self excluded), nearest first.
    pub neighbors: Vec<Vec<usize>>,
    /// Neighborhood size actually used (clamped to class size - 1).
    pub effective_k: usize,
    /// Set when k had to be clamped.
    pub clamped: bool,
}

/// K nearest same-class neighbors by Euclidean distance, ties broken by
/// lower row index. A class smaller than k+1 clamps k to size-1; a
/// single-member class cannot be oversampled and is an error.
pub fn knn_indices(features: &FeatureMatrix, class_id: usize, k: usize) -> Result<KnnIndices> {
    if class_id >= 4 {
        return Err(Error::Label(format!("class id {class_id} out of range 0..4")));
    }
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let members: Vec<usize> = (0..features.rows)
        .filter(|&i| features.labels[i] == class_id)
        .collect();
    if members.len() <= 1 {
        return Err(Error::Balance(format!(
            "class {class_id} has {} member(s); need at least 2 to interpolate",
            members.len()
        )));
    }
    let effective_k = k.min(members.len() - 1);
    let clamped = effective_k < k;

    let neighbors: Vec<Vec<usize>> = members
        .par_iter()
        .map(|&query| {
            let qrow = features.row(query);
            let mut dists: Vec<(f64, usize)> = members
                .iter()
                .filter(|&&other| other != query)
                .map(|&other| {
                    let d2: f64 = features
                        .row(other)
                        .iter()
                        .zip(qrow)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d2, other)
                })
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
            dists.into_iter().take(effective_k).map(|(_, i)| i).collect()
        })
        .collect();

    Ok(KnnIndices { members, neighbors, effective_k, clamped })
}

/// Parent pair and interpolation factor behind one synthetic row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticRecord {
    /// Row index of the synthetic sample in the oversampled matrix.
    pub row: usize,
    /// Feature-matrix row of the interpolation base x.
    pub parent: usize,
    /// Feature-matrix row of the chosen neighbor x_nn.
    pub neighbor: usize,
    /// Interpolation factor in [0,1): synthetic = x + lambda * (x_nn - x).
    pub lambda: f64,
    pub class_id: usize,
}

/// Result of [`smote_oversample`].
#[derive(Debug, Clone)]
pub struct OversampleOutcome {
    /// Original rows first (unchanged, in input order), then synthetic rows
    /// grouped by class 0..=3.
    pub features: FeatureMatrix,
    /// Provenance of every synthetic row, in output-row order.
    pub synthetic: Vec<SyntheticRecord>,
    /// Non-fatal degradations, e.g. a clamped neighborhood size.
    pub warnings: Vec<String>,
}

/// Oversamples every class up to its plan target. Each synthetic sample
/// draws a seeded-random class member, one of its k nearest neighbors, and
/// lambda in [0,1), then interpolates. Original rows are preserved.
pub fn smote_oversample(
    features: &FeatureMatrix,
    plan: &BalancePlan,
    seed: u64,
) -> Result<OversampleOutcome> {
    let counts = features.class_counts();
    if counts != plan.current {
        return Err(Error::Balance(format!(
            "plan expects class counts {:?} but the matrix holds {:?}",
            plan.current, counts
        )));
    }

    let mut values = features.values.clone();
    let mut labels = features.labels.clone();
    let mut synthetic = Vec::new();
    let mut warnings = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for class_id in 0..4 {
        let deficit = plan.target[class_id] - counts[class_id];
        if deficit == 0 {
            continue;
        }
        let knn = knn_indices(features, class_id, plan.k_neighbors)?;
        if knn.clamped {
            warnings.push(format!(
                "class {class_id}: k reduced from {} to {} (class has {} members)",
                plan.k_neighbors,
                knn.effective_k,
                knn.members.len()
            ));
        }
        for _ in 0..deficit {
            let member_pos = rng.gen_range(0..knn.members.len());
            let neighbor_pos = rng.gen_range(0..knn.effective_k);
            let lambda: f64 = rng.gen_range(0.0..1.0);
            let parent = knn.members[member_pos];
            let neighbor = knn.neighbors[member_pos][neighbor_pos];

            let row = labels.len();
            let base = parent * features.cols;
            let nn = neighbor * features.cols;
            for c in 0..features.cols {
                let x = features.values[base + c];
                let x_nn = features.values[nn + c];
                values.push(x + lambda * (x_nn - x));
            }
            labels.push(class_id);
            synthetic.push(SyntheticRecord { row, parent, neighbor, lambda, class_id });
        }
    }

    let rows = labels.len();
    Ok(OversampleOutcome {
        features: FeatureMatrix::new(rows, features.cols, values, labels)?,
        synthetic,
        warnings,
    })
}
