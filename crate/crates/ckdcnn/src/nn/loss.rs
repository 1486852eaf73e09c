//! Sparse categorical cross-entropy over softmax probabilities, with the
//! softmax-fused logit gradient.

use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Probabilities below this floor are clamped inside the log so saturated
/// predictions cannot produce an infinite loss.
pub const PROB_FLOOR: f64 = 1e-12;

/// Mean negative log-likelihood of the integer labels under `probs`, plus
/// the gradient with respect to the pre-softmax logits:
/// `grad = (probs - onehot(labels)) / n`.
pub fn sparse_ce_loss<T: Scalar>(probs: &Tensor<T>, labels: &[usize]) -> Result<(T, Tensor<T>)> {
    if probs.ndim() != 2 {
        return Err(Error::Shape(format!(
            "loss expects probabilities shaped [n,classes], got {:?}",
            probs.shape()
        )));
    }
    let (n, c) = (probs.shape()[0], probs.shape()[1]);
    if labels.len() != n {
        return Err(Error::Shape(format!(
            "{n} probability rows but {} labels",
            labels.len()
        )));
    }
    for (i, &label) in labels.iter().enumerate() {
        if label >= c {
            return Err(Error::Label(format!(
                "label {label} at row {i} out of range 0..{c}"
            )));
        }
    }

    let floor = T::from_f64(PROB_FLOOR);
    let inv_n = T::one() / T::from_f64(n as f64);
    let mut loss = T::zero();
    let mut grad = probs.clone();
    {
        let gdata = grad.data_mut();
        for (i, &label) in labels.iter().enumerate() {
            let row = &mut gdata[i * c..(i + 1) * c];
            loss -= row[label].max(floor).ln();
            row[label] -= T::one();
            for v in row.iter_mut() {
                *v *= inv_n;
            }
        }
    }
    Ok((loss * inv_n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::softmax;

    #[test]
    fn uniform_probs_cost_ln4() {
        let probs = Tensor::<f64>::new(&[3, 4], 0.25).unwrap();
        let (loss, _) = sparse_ce_loss(&probs, &[0, 2, 3]).unwrap();
        assert!((loss - 4.0f64.ln()).abs() < 1e-12);
        assert!((loss - 1.3862944).abs() < 1e-6);
    }

    #[test]
    fn confident_correct_prediction_costs_zero() {
        let mut probs = Tensor::<f64>::zeros(&[1, 4]).unwrap();
        probs.set2(0, 2, 1.0);
        let (loss, _) = sparse_ce_loss(&probs, &[2]).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn loss_nonnegative_and_floored() {
        // An exactly-zero probability on the true class hits the floor
        // instead of producing infinity.
        let mut probs = Tensor::<f64>::zeros(&[1, 4]).unwrap();
        probs.set2(0, 1, 1.0);
        let (loss, _) = sparse_ce_loss(&probs, &[0]).unwrap();
        assert!(loss.is_finite());
        assert!((loss - (-PROB_FLOOR.ln())).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_label_rejected() {
        let probs = Tensor::<f64>::new(&[1, 4], 0.25).unwrap();
        assert!(matches!(sparse_ce_loss(&probs, &[4]), Err(Error::Label(_))));
    }

    #[test]
    fn fused_gradient_is_probs_minus_onehot_over_n() {
        let logits =
            Tensor::<f64>::from_vec(&[2, 4], vec![0.2, -0.7, 1.1, 0.4, -0.3, 0.9, 0.0, 0.5])
                .unwrap();
        let probs = softmax(&logits).unwrap();
        let labels = [2usize, 1usize];
        let (_, grad) = sparse_ce_loss(&probs, &labels).unwrap();
        for i in 0..2 {
            for j in 0..4 {
                let onehot = if labels[i] == j { 1.0 } else { 0.0 };
                let expect = (probs.get2(i, j) - onehot) / 2.0;
                assert!((grad.get2(i, j) - expect).abs() < 1e-15);
            }
        }
    }
}
