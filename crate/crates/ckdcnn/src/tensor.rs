//! Dense row-major tensors and the linear-algebra primitives the rest of
//! the crate builds on.
//!
//! Tensors are plain owned buffers: no broadcasting, no strided views, no
//! autodiff graph. Training runs in `f32`; gradient verification runs the
//! same code in `f64` through the [`Scalar`] generic.

use crate::error::{Error, Result};
use std::fmt::Debug;

/// Element types a [`Tensor`] may hold: `f32` for training, `f64` for
/// verification.
pub trait Scalar:
    num_traits::Float + num_traits::NumAssign + Debug + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Dense N-dimensional array in row-major order. 4-D activations use the
/// index order (batch, height, width, channel).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T = f32> {
    shape: Vec<usize>,
    data: Vec<T>,
}

fn validate_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::Shape("tensor shape must have at least one extent".into()));
    }
    let mut n = 1usize;
    for &e in shape {
        if e == 0 {
            return Err(Error::Shape(format!("zero extent in shape {shape:?}")));
        }
        n = n.checked_mul(e).ok_or_else(|| {
            Error::Shape(format!("shape {shape:?} overflows element count"))
        })?;
    }
    Ok(n)
}

impl<T: Scalar> Tensor<T> {
    /// Tensor of the given shape with every element set to `fill`.
    pub fn new(shape: &[usize], fill: T) -> Result<Self> {
        let n = validate_shape(shape)?;
        Ok(Self { shape: shape.to_vec(), data: vec![fill; n] })
    }

    /// All-zero tensor.
    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::new(shape, T::zero())
    }

    /// Wrap an existing buffer. The buffer length must match the shape.
    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        let n = validate_shape(shape)?;
        if n != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} expects {n} elements, got {}",
                data.len()
            )));
        }
        Ok(Self { shape: shape.to_vec(), data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Reinterpret the shape without touching element order.
    pub fn reshape(&self, new_shape: &[usize]) -> Result<Self> {
        let n = validate_shape(new_shape)?;
        if n != self.data.len() {
            return Err(Error::Shape(format!(
                "cannot reshape {} elements into {new_shape:?} ({n} elements)",
                self.data.len()
            )));
        }
        Ok(Self { shape: new_shape.to_vec(), data: self.data.clone() })
    }

    /// Flat offset of a 2-D index.
    #[inline]
    pub fn idx2(&self, i: usize, j: usize) -> usize {
        debug_assert_eq!(self.ndim(), 2);
        i * self.shape[1] + j
    }

    /// Flat offset of a 4-D (batch, y, x, channel) index.
    #[inline]
    pub fn idx4(&self, b: usize, y: usize, x: usize, c: usize) -> usize {
        debug_assert_eq!(self.ndim(), 4);
        ((b * self.shape[1] + y) * self.shape[2] + x) * self.shape[3] + c
    }

    pub fn get2(&self, i: usize, j: usize) -> T {
        self.data[self.idx2(i, j)]
    }

    pub fn set2(&mut self, i: usize, j: usize, v: T) {
        let k = self.idx2(i, j);
        self.data[k] = v;
    }

    pub fn get4(&self, b: usize, y: usize, x: usize, c: usize) -> T {
        self.data[self.idx4(b, y, x, c)]
    }

    pub fn set4(&mut self, b: usize, y: usize, x: usize, c: usize, v: T) {
        let k = self.idx4(b, y, x, c);
        self.data[k] = v;
    }

    /// Convert element type, e.g. `f32` weights to `f64` for verification.
    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
        }
    }

    /// Dense 2-D matrix product `[m,k] x [k,n] -> [m,n]`.
    pub fn matmul(&self, other: &Tensor<T>) -> Result<Tensor<T>> {
        if self.ndim() != 2 || other.ndim() != 2 {
            return Err(Error::Shape(format!(
                "matmul needs 2-D operands, got {:?} x {:?}",
                self.shape, other.shape
            )));
        }
        let (m, k) = (self.shape[0], self.shape[1]);
        let (k2, n) = (other.shape[0], other.shape[1]);
        if k != k2 {
            return Err(Error::Shape(format!(
                "matmul inner extents disagree: {:?} x {:?}",
                self.shape, other.shape
            )));
        }
        let mut out = vec![T::zero(); m * n];
        for i in 0..m {
            let row_out = &mut out[i * n..(i + 1) * n];
            for p in 0..k {
                let a = self.data[i * k + p];
                let row_b = &other.data[p * n..(p + 1) * n];
                for (o, &b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        Tensor::from_vec(&[m, n], out)
    }

    /// Row-wise argmax of a 2-D tensor; ties resolve to the lowest index.
    pub fn argmax_last_axis(&self) -> Result<Vec<usize>> {
        if self.ndim() != 2 {
            return Err(Error::Shape(format!(
                "argmax_last_axis needs a 2-D tensor, got {:?}",
                self.shape
            )));
        }
        let (n, c) = (self.shape[0], self.shape[1]);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let row = &self.data[i * c..(i + 1) * c];
            let mut best = 0usize;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            out.push(best);
        }
        Ok(out)
    }

    /// Element-wise sum.
    pub fn sum(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc + v)
    }
}
