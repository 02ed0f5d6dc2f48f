use crate::discretization::StateVector;
use crate::error::{Error, Result};

/// `sqrt(dx · Σ|y_i - r_i|²)` over the stacked `(u, w)`.
pub fn discrete_l2_error(y: &StateVector, y_ref: &StateVector, dx: f64) -> Result<f64> {
    if y.len() != y_ref.len() {
        return Err(Error::DimensionMismatch { expected: y_ref.len(), actual: y.len() });
    }
    let sum: f64 = y.iter().zip(y_ref.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((dx * sum).sqrt())
}

/// `‖y - r‖∞ / ‖r‖∞`; falls back to the absolute error when `r = 0`.
pub fn relative_max_error(y: &[f64], reference: &[f64]) -> f64 {
    let diff = y.iter().zip(reference).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = reference.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Least-squares slope of `log e` against `log(1/M)`.
pub fn observed_order(errors: &[(usize, f64)]) -> Result<f64> {
    if errors.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: errors.len() });
    }
    if let Some(&(m, e)) = errors.iter().find(|(m, e)| *m == 0 || !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter(format!("cannot take logs of M = {m}, error = {e}")));
    }
    let pts: Vec<(f64, f64)> = errors.iter().map(|&(m, e)| (-(m as f64).ln(), e.ln())).collect();
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all step counts are equal".into()));
    }
    Ok(sxy / sxx)
}
