//! Adam optimizer with bias correction.

use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Optimizer hyperparameters. `Default` gives the standard
/// lr=0.001, beta1=0.9, beta2=0.999, epsilon=1e-8.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self { learning_rate: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First/second moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T = f32> {
    pub m: Tensor<T>,
    pub v: Tensor<T>,
    /// Completed optimizer steps; increments by exactly one per call.
    pub t: u64,
}

impl<T: Scalar> AdamState<T> {
    /// Zeroed moments matching a parameter's shape.
    pub fn zeros_like(param: &Tensor<T>) -> Self {
        Self {
            m: Tensor::zeros(param.shape()).expect("parameter shape is valid"),
            v: Tensor::zeros(param.shape()).expect("parameter shape is valid"),
            t: 0,
        }
    }
}

/// One Adam update:
/// `m = b1*m + (1-b1)*g`, `v = b2*v + (1-b2)*g^2`, bias-corrected to
/// `m_hat = m/(1-b1^t)`, `v_hat = v/(1-b2^t)`, then
/// `param -= lr * m_hat / sqrt(v_hat + eps)`.
pub fn adam_step<T: Scalar>(
    param: &mut Tensor<T>,
    grad: &Tensor<T>,
    state: &mut AdamState<T>,
    hp: &AdamHyper,
) -> Result<()> {
    if grad.shape() != param.shape() {
        return Err(Error::Shape(format!(
            "gradient shape {:?} does not match parameter {:?}",
            grad.shape(),
            param.shape()
        )));
    }
    if state.m.shape() != param.shape() || state.v.shape() != param.shape() {
        return Err(Error::Shape("optimizer state does not match parameter".into()));
    }
    if grad.data().iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric("non-finite gradient in adam_step".into()));
    }

    state.t += 1;
    let beta1 = T::from_f64(hp.beta1);
    let beta2 = T::from_f64(hp.beta2);
    let lr = T::from_f64(hp.learning_rate);
    let eps = T::from_f64(hp.epsilon);
    let one = T::one();
    let m_corr = one / (one - T::from_f64(hp.beta1.powi(state.t as i32)));
    let v_corr = one / (one - T::from_f64(hp.beta2.powi(state.t as i32)));

    let mdata = state.m.data_mut();
    let vdata = state.v.data_mut();
    for ((p, &g), (m, v)) in param
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(mdata.iter_mut().zip(vdata.iter_mut()))
    {
        *m = beta1 * *m + (one - beta1) * g;
        *v = beta2 * *v + (one - beta2) * g * g;
        let m_hat = *m * m_corr;
        let v_hat = *v * v_corr;
        *p = *p - lr * m_hat / (v_hat + eps).sqrt();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_first_step() {
        // w=0, g=1, defaults, t: 0 -> 1. The bias-corrected moments are both
        // exactly 1, so the update is lr / sqrt(1 + eps).
        let mut w = Tensor::<f64>::zeros(&[1]).unwrap();
        let g = Tensor::<f64>::new(&[1], 1.0).unwrap();
        let mut state = AdamState::zeros_like(&w);
        adam_step(&mut w, &g, &mut state, &AdamHyper::default()).unwrap();
        assert_eq!(state.t, 1);
        assert!((state.m.data()[0] - 0.1).abs() < 1e-15);
        assert!((state.v.data()[0] - 0.001).abs() < 1e-15);
        assert!((w.data()[0] - (-0.000999999995)).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_with_zero_state_is_noop() {
        let mut w = Tensor::<f64>::new(&[3], 0.7).unwrap();
        let g = Tensor::<f64>::zeros(&[3]).unwrap();
        let mut state = AdamState::zeros_like(&w);
        adam_step(&mut w, &g, &mut state, &AdamHyper::default()).unwrap();
        assert!(w.data().iter().all(|&v| v == 0.7));
        assert_eq!(state.t, 1);
    }

    #[test]
    fn elements_update_independently() {
        let hp = AdamHyper::default();
        let mut w = Tensor::<f64>::from_vec(&[2], vec![0.3, -0.9]).unwrap();
        let g = Tensor::<f64>::from_vec(&[2], vec![0.5, -1.25]).unwrap();
        let mut state = AdamState::zeros_like(&w);
        adam_step(&mut w, &g, &mut state, &hp).unwrap();

        for k in 0..2 {
            let mut w1 = Tensor::<f64>::new(&[1], [0.3, -0.9][k]).unwrap();
            let g1 = Tensor::<f64>::new(&[1], [0.5, -1.25][k]).unwrap();
            let mut s1 = AdamState::zeros_like(&w1);
            adam_step(&mut w1, &g1, &mut s1, &hp).unwrap();
            assert_eq!(w.data()[k], w1.data()[0]);
        }
    }

    #[test]
    fn first_step_magnitude_is_bounded() {
        use rand::{Rng, SeedableRng};
        let hp = AdamHyper::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let g0: f64 = rng.gen_range(-10.0..10.0);
            let w0: f64 = rng.gen_range(-1.0..1.0);
            let mut w = Tensor::<f64>::new(&[1], w0).unwrap();
            let g = Tensor::<f64>::new(&[1], g0).unwrap();
            let mut state = AdamState::zeros_like(&w);
            adam_step(&mut w, &g, &mut state, &hp).unwrap();
            let delta = (w.data()[0] - w0).abs();
            assert!(delta <= hp.learning_rate / (1.0 - hp.beta1) + 1e-12);
        }
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut w = Tensor::<f64>::zeros(&[1]).unwrap();
        let g = Tensor::<f64>::new(&[1], f64::NAN).unwrap();
        let mut state = AdamState::zeros_like(&w);
        assert!(matches!(
            adam_step(&mut w, &g, &mut state, &AdamHyper::default()),
            Err(Error::Numeric(_))
        ));
    }
}
