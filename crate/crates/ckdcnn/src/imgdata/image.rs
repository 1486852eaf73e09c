//! 8-bit RGB images and the pixel-level preprocessing ops: PNG/JPEG codec,
//! BGR channel swap, bilinear rescale to 28x28, and [0,1] normalization.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Interleaved 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRgb {
    pub height: usize,
    pub width: usize,
    /// R,G,B triples in row-major order; length is `height * width * 3`.
    pub pixels: Vec<u8>,
}

impl ImageRgb {
    pub fn new(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Shape(format!(
                "image extents must be positive, got {height}x{width}"
            )));
        }
        if pixels.len() != height * width * 3 {
            return Err(Error::Shape(format!(
                "{height}x{width} image needs {} bytes, got {}",
                height * width * 3,
                pixels.len()
            )));
        }
        Ok(Self { height, width, pixels })
    }

    /// Constant-color image.
    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width * 3);
        for _ in 0..height * width {
            pixels.extend_from_slice(&rgb);
        }
        Self::new(height, width, pixels)
    }

    pub fn get(&self, y: usize, x: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, y: usize, x: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }
}

/// Decodes PNG or JPEG bytes into an RGB image.
pub fn decode_image(bytes: &[u8]) -> Result<ImageRgb> {
    let decoded = image::load_from_memory(bytes)
        .map_err(|e| Error::Decode { path: None, reason: e.to_string() })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    ImageRgb::new(h, w, rgb.into_raw())
}

/// Writes an image as an 8-bit RGB PNG; the decode of the written file is
/// pixel-identical to the input.
pub fn write_png(img: &ImageRgb, path: &Path) -> Result<()> {
    let buffer = image::RgbImage::from_raw(img.width as u32, img.height as u32, img.pixels.clone())
        .ok_or_else(|| Error::Shape("image buffer does not match its extents".into()))?;
    buffer
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(source) => Error::Io { path: path.to_path_buf(), source },
            other => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(other.to_string()),
            },
        })
}

/// Swaps channels 0 and 2 of every pixel, turning a BGR-ordered buffer into
/// RGB (and vice versa; the swap is an involution).
pub fn bgr_to_rgb(img: &ImageRgb) -> ImageRgb {
    let mut out = img.clone();
    for px in out.pixels.chunks_mut(3) {
        px.swap(0, 2);
    }
    out
}

/// Interpolation taps for one axis under pixel-center alignment: the source
/// coordinate of destination index d is `(d + 0.5) * src/dst - 0.5`, clamped
/// to the borders.
pub(crate) fn bilinear_axis_taps(src: usize, dst: usize) -> Vec<(usize, usize, f32)> {
    let scale = src as f32 / dst as f32;
    (0..dst)
        .map(|d| {
            let s = ((d as f32 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f32);
            let lo = s.floor() as usize;
            let hi = (lo + 1).min(src - 1);
            (lo, hi, s - lo as f32)
        })
        .collect()
}

/// Bilinear resample of a single-channel f32 grid. Values stay within the
/// input's min/max (convex combinations only).
pub(crate) fn bilinear_resize_plane(
    src: &[f32],
    src_h: usize,
    src_w: usize,
    dst_h: usize,
    dst_w: usize,
) -> Vec<f32> {
    let ys = bilinear_axis_taps(src_h, dst_h);
    let xs = bilinear_axis_taps(src_w, dst_w);
    let mut out = Vec::with_capacity(dst_h * dst_w);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = src[y0 * src_w + x0] * (1.0 - fx) + src[y0 * src_w + x1] * fx;
            let bot = src[y1 * src_w + x0] * (1.0 - fx) + src[y1 * src_w + x1] * fx;
            out.push(top * (1.0 - fy) + bot * fy);
        }
    }
    out
}

/// Rescales an image to 28x28 with pixel-center-aligned bilinear
/// interpolation.
pub fn resize_bilinear_28(img: &ImageRgb) -> ImageRgb {
    const DST: usize = 28;
    let ys = bilinear_axis_taps(img.height, DST);
    let xs = bilinear_axis_taps(img.width, DST);
    let mut pixels = Vec::with_capacity(DST * DST * 3);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for c in 0..3 {
                let p = |yy: usize, xx: usize| img.pixels[(yy * img.width + xx) * 3 + c] as f32;
                let top = p(y0, x0) * (1.0 - fx) + p(y0, x1) * fx;
                let bot = p(y1, x0) * (1.0 - fx) + p(y1, x1) * fx;
                let v = top * (1.0 - fy) + bot * fy;
                pixels.push(v.round() as u8);
            }
        }
    }
    ImageRgb::new(DST, DST, pixels).expect("output extents are fixed")
}

/// Scales a 28x28 image into a [28,28,3] tensor of reals in [0,1] by
/// dividing every channel value by 255.
pub fn normalize_to_unit(img: &ImageRgb) -> Result<Tensor> {
    if img.height != 28 || img.width != 28 {
        return Err(Error::Shape(format!(
            "normalize_to_unit expects a 28x28 image, got {}x{}",
            img.height, img.width
        )));
    }
    let data = img.pixels.iter().map(|&b| b as f32 / 255.0).collect();
    Tensor::from_vec(&[28, 28, 3], data)
}

/// Quantizes a [28,28,3] unit-range tensor back to an 8-bit image.
pub fn image_from_unit_tensor(t: &Tensor) -> Result<ImageRgb> {
    if t.shape() != [28, 28, 3] {
        return Err(Error::Shape(format!(
            "expected a [28,28,3] tensor, got {:?}",
            t.shape()
        )));
    }
    let pixels = t
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    ImageRgb::new(28, 28, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode_png(img: &ImageRgb) -> Vec<u8> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.png");
        write_png(img, &path).unwrap();
        std::fs::read(&path).unwrap()
    }

    #[test]
    fn decode_single_white_pixel() {
        let img = ImageRgb::filled(1, 1, [255, 255, 255]).unwrap();
        let bytes = encode_png(&img);
        let decoded = decode_image(&bytes).unwrap();
        assert_eq!(decoded, img);
    }

    #[test]
    fn encode_decode_round_trip_preserves_palette() {
        let img = ImageRgb::new(
            2,
            2,
            vec![255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30],
        )
        .unwrap();
        let decoded = decode_image(&encode_png(&img)).unwrap();
        assert_eq!(decoded, img);
    }

    #[test]
    fn truncated_bytes_are_an_error_not_a_crash() {
        let img = ImageRgb::filled(4, 4, [1, 2, 3]).unwrap();
        let mut bytes = encode_png(&img);
        bytes.truncate(bytes.len() / 2);
        assert!(matches!(decode_image(&bytes), Err(Error::Decode { .. })));
        assert!(matches!(decode_image(b"not an image"), Err(Error::Decode { .. })));
    }

    #[test]
    fn bgr_swap_and_involution() {
        let img = ImageRgb::new(1, 2, vec![10, 20, 30, 7, 7, 7]).unwrap();
        let swapped = bgr_to_rgb(&img);
        assert_eq!(swapped.get(0, 0), [30, 20, 10]);
        assert_eq!(swapped.get(0, 1), [7, 7, 7]);
        assert_eq!(bgr_to_rgb(&swapped), img);
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = ImageRgb::filled(512, 512, [120, 45, 200]).unwrap();
        let small = resize_bilinear_28(&img);
        assert_eq!(small.height, 28);
        assert_eq!(small.width, 28);
        for y in 0..28 {
            for x in 0..28 {
                assert_eq!(small.get(y, x), [120, 45, 200]);
            }
        }
    }

    #[test]
    fn resize_28_input_is_identity() {
        let mut img = ImageRgb::filled(28, 28, [0, 0, 0]).unwrap();
        for y in 0..28 {
            for x in 0..28 {
                img.set(y, x, [(y * 7) as u8, (x * 9) as u8, ((y + x) * 3) as u8]);
            }
        }
        assert_eq!(resize_bilinear_28(&img), img);
    }

    #[test]
    fn resize_two_pixel_gradient_is_monotone() {
        // 1x2 source [0, 255]: outputs are convex combinations, monotone
        // left to right. Oracle: evaluate the interpolation formula.
        let img = ImageRgb::new(1, 2, vec![0, 0, 0, 255, 255, 255]).unwrap();
        let out = resize_bilinear_28(&img);
        let mut prev = -1i32;
        for x in 0..28 {
            let v = out.get(0, x)[0] as i32;
            assert!(v >= prev, "not monotone at column {x}");
            prev = v;
        }
        for x in 0..28 {
            let s = ((x as f32 + 0.5) * (2.0 / 28.0) - 0.5).clamp(0.0, 1.0);
            assert_eq!(out.get(0, x)[0], (255.0 * s).round() as u8);
        }
    }

    #[test]
    fn normalize_divides_by_255() {
        let mut img = ImageRgb::filled(28, 28, [0, 0, 0]).unwrap();
        img.set(0, 0, [255, 0, 51]);
        let t = normalize_to_unit(&img).unwrap();
        assert_eq!(t.shape(), &[28, 28, 3]);
        assert_eq!(t.data()[0], 1.0);
        assert_eq!(t.data()[1], 0.0);
        assert!((t.data()[2] - 0.2).abs() < 1e-7);
    }

    #[test]
    fn normalize_rejects_wrong_size() {
        let img = ImageRgb::filled(27, 28, [0, 0, 0]).unwrap();
        assert!(matches!(normalize_to_unit(&img), Err(Error::Shape(_))));
    }

    #[test]
    fn plane_resize_stays_within_bounds() {
        let src: Vec<f32> = (0..49).map(|i| (i % 7) as f32 / 6.0).collect();
        let out = bilinear_resize_plane(&src, 7, 7, 28, 28);
        let (min, max) = src.iter().fold((f32::MAX, f32::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        for &v in &out {
            assert!(v >= min - 1e-6 && v <= max + 1e-6);
        }
    }
}
