//! Class-directory dataset loading and writing.
//!
//! The on-disk layout is `root/{Cyst|Normal|Stone|Tumor}/*.{png,jpg,jpeg}`
//! (extensions matched case-insensitively). Files are processed in
//! lexicographic order per class so two loads of the same tree produce
//! identical sets.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::image::{bgr_to_rgb, decode_image, image_from_unit_tensor, normalize_to_unit, resize_bilinear_28, write_png};
use super::{LabeledSet, CLASS_NAMES};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// What to do when a file cannot be decoded (or a class directory is empty).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodePolicy {
    /// Fail the whole load on the first bad file.
    #[default]
    Abort,
    /// Drop bad files and report them in [`LoadOutcome::skipped`].
    Skip,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub policy: DecodePolicy,
    /// Treat file bytes as BGR-ordered and swap to RGB after decoding.
    /// Off by default: the decoder already emits RGB; the swap exists for
    /// byte-level parity with loaders that emit BGR.
    pub bgr_input: bool,
}

#[derive(Debug)]
pub struct LoadOutcome {
    pub set: LabeledSet,
    /// Files (or empty class directories) skipped under [`DecodePolicy::Skip`].
    pub skipped: Vec<(PathBuf, String)>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn class_directory(root: &Path, class_name: &str) -> Result<PathBuf> {
    let exact = root.join(class_name);
    if exact.is_dir() {
        return Ok(exact);
    }
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let entry = entry.map_err(io_err(root))?;
        let path = entry.path();
        if path.is_dir() {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                if name.eq_ignore_ascii_case(class_name) {
                    return Ok(path);
                }
            }
        }
    }
    Err(Error::Data(format!(
        "missing class directory {class_name:?} under {}",
        root.display()
    )))
}

fn is_supported_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            e.eq_ignore_ascii_case("png")
                || e.eq_ignore_ascii_case("jpg")
                || e.eq_ignore_ascii_case("jpeg")
        })
        .unwrap_or(false)
}

fn list_class_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if path.is_file() && is_supported_extension(&path) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn load_one(path: &Path, bgr_input: bool) -> Result<Vec<f32>> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let decoded = decode_image(&bytes).map_err(|e| match e {
        Error::Decode { reason, .. } => Error::Decode { path: Some(path.to_path_buf()), reason },
        other => other,
    })?;
    let decoded = if bgr_input { bgr_to_rgb(&decoded) } else { decoded };
    let resized = resize_bilinear_28(&decoded);
    Ok(normalize_to_unit(&resized)?.into_data())
}

/// Loads, decodes, converts, resizes, normalizes, and labels every image
/// under the class-directory layout.
pub fn load_directory_dataset(root: &Path, opts: &LoadOptions) -> Result<LoadOutcome> {
    let mut work: Vec<(PathBuf, usize)> = Vec::new();
    let mut skipped: Vec<(PathBuf, String)> = Vec::new();

    for (label, class_name) in CLASS_NAMES.iter().enumerate() {
        let dir = class_directory(root, class_name)?;
        let files = list_class_files(&dir)?;
        if files.is_empty() {
            match opts.policy {
                DecodePolicy::Abort => {
                    return Err(Error::Data(format!(
                        "class directory {} contains no images",
                        dir.display()
                    )))
                }
                DecodePolicy::Skip => {
                    skipped.push((dir, "class directory contains no images".into()));
                    continue;
                }
            }
        }
        work.extend(files.into_iter().map(|p| (p, label)));
    }

    let decoded: Vec<(usize, std::result::Result<Vec<f32>, String>)> = work
        .par_iter()
        .enumerate()
        .map(|(i, (path, _))| {
            (i, load_one(path, opts.bgr_input).map_err(|e| e.to_string()))
        })
        .collect();

    let per = 28 * 28 * 3;
    let mut data = Vec::with_capacity(work.len() * per);
    let mut labels = Vec::with_capacity(work.len());
    for (i, result) in decoded {
        match result {
            Ok(pixels) => {
                data.extend_from_slice(&pixels);
                labels.push(work[i].1);
            }
            Err(reason) => match opts.policy {
                DecodePolicy::Abort => {
                    return Err(Error::Decode { path: Some(work[i].0.clone()), reason })
                }
                DecodePolicy::Skip => skipped.push((work[i].0.clone(), reason)),
            },
        }
    }

    if labels.is_empty() {
        return Err(Error::Data(format!(
            "no usable images under {}",
            root.display()
        )));
    }
    let images = Tensor::from_vec(&[labels.len(), 28, 28, 3], data)?;
    Ok(LoadOutcome { set: LabeledSet::new(images, labels)?, skipped })
}

/// Writes a labeled set to the class-directory layout as 8-bit PNGs, so a
/// synthetic dataset can be reloaded through the ordinary pipeline.
pub fn write_dataset_layout(set: &LabeledSet, root: &Path) -> Result<()> {
    fs::create_dir_all(root).map_err(io_err(root))?;
    for name in CLASS_NAMES {
        fs::create_dir_all(root.join(name)).map_err(io_err(root))?;
    }
    let per = 28 * 28 * 3;
    let mut per_class_index = [0usize; 4];
    for i in 0..set.len() {
        let label = set.labels[i];
        let slice = &set.images.data()[i * per..(i + 1) * per];
        let tensor = Tensor::from_vec(&[28, 28, 3], slice.to_vec())?;
        let img = image_from_unit_tensor(&tensor)?;
        let file = root.join(CLASS_NAMES[label]).join(format!(
            "{}_{:05}.png",
            CLASS_NAMES[label].to_ascii_lowercase(),
            per_class_index[label]
        ));
        per_class_index[label] += 1;
        write_png(&img, &file)?;
    }
    Ok(())
}
