use crate::error::{Error, Result};

/// Mean squared error and its gradient `2 (pred - target) / n`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "mse over {} predictions and {} targets",
            pred.len(),
            target.len()
        )));
    }
    let n = pred.len() as f64;
    let diff: Vec<f64> = pred.iter().zip(target).map(|(p, t)| p - t).collect();
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
    let grad = diff.iter().map(|d| 2.0 * d / n).collect();
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_target() {
        let (l, g) = mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(l, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn hand_values() {
        let (l, g) = mse_loss(&[3.0, 4.0], &[0.0, 0.0]).unwrap();
        assert_eq!(l, 12.5);
        assert_eq!(g, vec![3.0, 4.0]);
    }

    #[test]
    fn gradient_matches_central_difference() {
        let pred = [0.3, -1.2, 2.5, 0.0];
        let target = [1.0, 0.5, -0.5, 0.25];
        let (_, g) = mse_loss(&pred, &target).unwrap();
        let eps = 1e-6;
        for k in 0..pred.len() {
            let mut up = pred;
            let mut down = pred;
            up[k] += eps;
            down[k] -= eps;
            let numeric = (mse_loss(&up, &target).unwrap().0 - mse_loss(&down, &target).unwrap().0) / (2.0 * eps);
            assert!((numeric - g[k]).abs() < 1e-8, "{k}: {numeric} vs {}", g[k]);
        }
    }

    #[test]
    fn length_mismatch() {
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
    }
}
