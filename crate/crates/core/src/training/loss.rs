use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Mean of squared element differences.
pub fn mse(pred: &Matrix, target: &Matrix) -> Result<f64> {
    check(pred, target)?;
    let n = pred.data().len();
    if n == 0 {
        return Err(Error::EmptyInput("mse over zero elements"));
    }
    let sum: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / n as f64)
}

/// Gradient of [`mse`] with respect to `pred`.
pub fn mse_grad(pred: &Matrix, target: &Matrix) -> Result<Matrix> {
    check(pred, target)?;
    let scale = 2.0 / pred.data().len() as f64;
    Ok(pred.sub(target)?.scale(scale))
}

fn check(pred: &Matrix, target: &Matrix) -> Result<()> {
    if pred.shape() != target.shape() {
        return Err(Error::dim(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    Ok(())
}
