//! Central finite differences, the independent oracle every analytic
//! backward pass is checked against.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Central-difference gradient `(f(x+eps) - f(x-eps)) / (2 eps)` evaluated
/// element by element in 64-bit precision.
pub fn finite_diff_grad<F>(loss_fn: F, param: &Tensor<f64>, epsilon: f64) -> Result<Tensor<f64>>
where
    F: Fn(&Tensor<f64>) -> f64,
{
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut probe = param.clone();
    let mut grad = Tensor::<f64>::zeros(param.shape())?;
    for i in 0..param.len() {
        let original = probe.data()[i];
        probe.data_mut()[i] = original + epsilon;
        let plus = loss_fn(&probe);
        probe.data_mut()[i] = original - epsilon;
        let minus = loss_fn(&probe);
        probe.data_mut()[i] = original;
        grad.data_mut()[i] = (plus - minus) / (2.0 * epsilon);
    }
    Ok(grad)
}

/// Largest relative disagreement between an analytic gradient and its
/// finite-difference estimate. The denominator is floored so elements that
/// are legitimately zero do not divide by zero.
pub fn max_relative_error(analytic: &Tensor<f64>, numeric: &Tensor<f64>) -> f64 {
    analytic
        .data()
        .iter()
        .zip(numeric.data())
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-8))
        .fold(0.0, f64::max)
}
