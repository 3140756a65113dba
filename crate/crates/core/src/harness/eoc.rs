use crate::{Error, Result};

/// `eoc_i = log(err_{i-1} / err_i) / log(ratio)` for consecutive errors.
pub fn compute_eoc(errors: &[f64], ratio: f64) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::InvalidArgument("need at least two errors".into()));
    }
    if !(ratio > 1.0) {
        return Err(Error::InvalidArgument(format!("refinement ratio must exceed 1, got {ratio}")));
    }
    if let Some(e) = errors.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!("errors must be positive and finite, got {e}")));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).ln() / ratio.ln()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((compute_eoc(&[0.04, 0.01], 2.0).unwrap()[0] - 2.0).abs() < 1e-14);
        let e = compute_eoc(&[0.017504, 0.005686], 2.0).unwrap()[0];
        assert!((e - 1.62).abs() < 5e-3, "{e}");
        assert_eq!(compute_eoc(&[0.3, 0.3], 2.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn invalid_input() {
        assert!(compute_eoc(&[0.1], 2.0).is_err());
        assert!(compute_eoc(&[0.1, 0.0], 2.0).is_err());
        assert!(compute_eoc(&[0.1, -1.0], 2.0).is_err());
        assert!(compute_eoc(&[0.1, 0.05], 1.0).is_err());
    }
}
