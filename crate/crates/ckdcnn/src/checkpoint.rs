//! Deterministic binary model checkpoints.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! offset size  field
//! 0      4     magic bytes "CKDM"
//! 4      4     u32 format version (currently 1)
//! 8      4     u32 flags; bit 0 = Adam state present
//! 12     4     u32 CRC-32 (IEEE) of the payload bytes
//! 16     8     u64 payload length in bytes
//! 24     ...   payload
//! ```
//!
//! Payload:
//! 1. architecture descriptor: u32 layer count, then per layer one u8 kind
//!    (0 Conv, 1 ReLU, 2 MaxPool, 3 Flatten, 4 Dense, 5 Softmax), one u8
//!    dimension count, and that many u32 extents (the parameter shape;
//!    zero dimensions for parameterless layers);
//! 2. the eight parameter tensors in [`PARAM_NAMES`] order, each as one u8
//!    dimension count, u32 extents, then row-major f32 values;
//! 3. if flags bit 0 is set, per parameter: u64 step count, then the f32
//!    first-moment and second-moment tensors (shapes match the parameter).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::layers::KERNEL_EXTENT;
use crate::nn::model::{Model, CONV_FILTERS, FLAT_FEATURES, INPUT_CHANNELS, NUM_CLASSES, PARAM_NAMES};
use crate::nn::{AdamState, ConvLayer, DenseLayer};
use crate::tensor::Tensor;

pub const MAGIC: [u8; 4] = *b"CKDM";
pub const FORMAT_VERSION: u32 = 1;
const FLAG_ADAM: u32 = 1;

const KIND_CONV: u8 = 0;
const KIND_RELU: u8 = 1;
const KIND_MAXPOOL: u8 = 2;
const KIND_FLATTEN: u8 = 3;
const KIND_DENSE: u8 = 4;
const KIND_SOFTMAX: u8 = 5;

const fn crc32_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u32;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 1 != 0 { (crc >> 1) ^ 0xEDB8_8320 } else { crc >> 1 };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

static CRC_TABLE: [u32; 256] = crc32_table();

/// CRC-32 (IEEE 802.3, reflected) over a byte slice.
pub fn crc32(bytes: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc = (crc >> 8) ^ CRC_TABLE[((crc ^ b as u32) & 0xFF) as usize];
    }
    crc ^ 0xFFFF_FFFF
}

/// Fixed (kind, parameter shape) chain of the supported architecture.
fn expected_layers() -> Vec<(u8, Vec<u32>)> {
    let ext = KERNEL_EXTENT as u32;
    let mut layers = Vec::new();
    let mut cin = INPUT_CHANNELS as u32;
    for &cout in &CONV_FILTERS {
        layers.push((KIND_CONV, vec![ext, ext, cin, cout as u32]));
        layers.push((KIND_RELU, vec![]));
        layers.push((KIND_MAXPOOL, vec![]));
        cin = cout as u32;
    }
    layers.push((KIND_FLATTEN, vec![]));
    layers.push((KIND_DENSE, vec![FLAT_FEATURES as u32, NUM_CLASSES as u32]));
    layers.push((KIND_SOFTMAX, vec![]));
    layers
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn tensor(&mut self, t: &Tensor) {
        self.u8(t.shape().len() as u8);
        for &d in t.shape() {
            self.u32(d as u32);
        }
        for &v in t.data() {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
    fn values_only(&mut self, t: &Tensor) {
        for &v in t.data() {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::MalformedCheckpoint(format!(
                "needed {n} bytes at offset {}, only {} remain",
                self.pos,
                self.bytes.len() - self.pos
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn values(&mut self, count: usize) -> Result<Vec<f32>> {
        let raw = self.take(count * 4)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }
    fn shape(&mut self) -> Result<Vec<usize>> {
        let ndims = self.u8()? as usize;
        let mut shape = Vec::with_capacity(ndims);
        for _ in 0..ndims {
            shape.push(self.u32()? as usize);
        }
        Ok(shape)
    }
    fn tensor(&mut self, expected_shape: &[usize], what: &str) -> Result<Tensor> {
        let shape = self.shape()?;
        if shape != expected_shape {
            return Err(Error::ArchitectureMismatch(format!(
                "{what} has shape {shape:?}, expected {expected_shape:?}"
            )));
        }
        let count = shape.iter().product();
        Tensor::from_vec(&shape, self.values(count)?)
    }
    fn done(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

fn encode_payload(model: &Model) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    let layers = expected_layers();
    w.u32(layers.len() as u32);
    for (kind, shape) in &layers {
        w.u8(*kind);
        w.u8(shape.len() as u8);
        for &d in shape {
            w.u32(d);
        }
    }
    for param in model.params() {
        w.tensor(param);
    }
    if let Some(states) = &model.adam {
        for state in states {
            w.u64(state.t);
            w.values_only(&state.m);
            w.values_only(&state.v);
        }
    }
    w.0
}

/// Writes the model (and its Adam state, when present) to `path`. The file
/// is byte-stable: identical models produce identical bytes.
pub fn save_checkpoint(model: &Model, path: &Path) -> Result<()> {
    let payload = encode_payload(model);
    let mut file = Vec::with_capacity(24 + payload.len());
    file.extend_from_slice(&MAGIC);
    file.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let flags = if model.adam.is_some() { FLAG_ADAM } else { 0 };
    file.extend_from_slice(&flags.to_le_bytes());
    file.extend_from_slice(&crc32(&payload).to_le_bytes());
    file.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    file.extend_from_slice(&payload);
    fs::write(path, file).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Reads a checkpoint back, verifying magic, version, checksum, and the
/// architecture descriptor before reconstructing the model.
pub fn load_checkpoint(path: &Path) -> Result<Model> {
    let bytes = fs::read(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    if bytes.len() < 24 {
        return Err(Error::MalformedCheckpoint(format!(
            "file is {} bytes, header needs 24",
            bytes.len()
        )));
    }
    if bytes[0..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let flags = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    let stored_crc = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes"));
    let payload_len = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")) as usize;
    if bytes.len() < 24 + payload_len {
        return Err(Error::MalformedCheckpoint(format!(
            "payload declares {payload_len} bytes but only {} are present",
            bytes.len() - 24
        )));
    }
    if bytes.len() > 24 + payload_len {
        return Err(Error::MalformedCheckpoint(format!(
            "{} trailing bytes after the declared payload",
            bytes.len() - 24 - payload_len
        )));
    }
    let payload = &bytes[24..];
    let computed = crc32(payload);
    if computed != stored_crc {
        return Err(Error::ChecksumMismatch { stored: stored_crc, computed });
    }

    let mut r = Reader { bytes: payload, pos: 0 };
    let expected = expected_layers();
    let layer_count = r.u32()? as usize;
    if layer_count != expected.len() {
        return Err(Error::ArchitectureMismatch(format!(
            "descriptor lists {layer_count} layers, expected {}",
            expected.len()
        )));
    }
    for (i, (kind, shape)) in expected.iter().enumerate() {
        let got_kind = r.u8()?;
        let got_dims = r.u8()? as usize;
        let mut got_shape = Vec::with_capacity(got_dims);
        for _ in 0..got_dims {
            got_shape.push(r.u32()?);
        }
        if got_kind != *kind || &got_shape != shape {
            return Err(Error::ArchitectureMismatch(format!(
                "layer {i}: kind {got_kind} shape {got_shape:?}, expected kind {kind} shape {shape:?}"
            )));
        }
    }

    let ext = KERNEL_EXTENT;
    let param_shapes: Vec<Vec<usize>> = vec![
        vec![ext, ext, INPUT_CHANNELS, CONV_FILTERS[0]],
        vec![CONV_FILTERS[0]],
        vec![ext, ext, CONV_FILTERS[0], CONV_FILTERS[1]],
        vec![CONV_FILTERS[1]],
        vec![ext, ext, CONV_FILTERS[1], CONV_FILTERS[2]],
        vec![CONV_FILTERS[2]],
        vec![FLAT_FEATURES, NUM_CLASSES],
        vec![NUM_CLASSES],
    ];
    let mut params = Vec::with_capacity(param_shapes.len());
    for (shape, name) in param_shapes.iter().zip(PARAM_NAMES) {
        params.push(r.tensor(shape, name)?);
    }

    let adam = if flags & FLAG_ADAM != 0 {
        let mut states = Vec::with_capacity(params.len());
        for param in &params {
            let t = r.u64()?;
            let m = Tensor::from_vec(param.shape(), r.values(param.len())?)?;
            let v = Tensor::from_vec(param.shape(), r.values(param.len())?)?;
            states.push(AdamState { m, v, t });
        }
        Some(states)
    } else {
        None
    };

    if !r.done() {
        return Err(Error::MalformedCheckpoint(format!(
            "{} unread payload bytes",
            payload.len() - r.pos
        )));
    }

    let dense_bias = params.pop().expect("eight parameters");
    let dense_weights = params.pop().expect("eight parameters");
    let conv3_bias = params.pop().expect("eight parameters");
    let conv3_kernels = params.pop().expect("eight parameters");
    let conv2_bias = params.pop().expect("eight parameters");
    let conv2_kernels = params.pop().expect("eight parameters");
    let conv1_bias = params.pop().expect("eight parameters");
    let conv1_kernels = params.pop().expect("eight parameters");

    Ok(Model {
        conv1: ConvLayer::new(conv1_kernels, conv1_bias)?,
        conv2: ConvLayer::new(conv2_kernels, conv2_bias)?,
        conv3: ConvLayer::new(conv3_kernels, conv3_bias)?,
        dense: DenseLayer::new(dense_weights, dense_bias)?,
        adam,
    })
}
