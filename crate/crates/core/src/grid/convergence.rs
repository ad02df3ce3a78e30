use serde::{Deserialize, Serialize, Serializer};

use super::GridError;

/// Errors measured on a refinement ladder and the fitted order of accuracy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub resolutions: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of log(error) against log(spacing). `+inf` when every error is zero.
    #[serde(serialize_with = "finite_or_null")]
    pub observed_order: f64,
}

fn finite_or_null<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

impl ConvergenceReport {
    /// Slopes between consecutive ladder entries.
    pub fn pairwise_orders(&self) -> Vec<f64> {
        self.resolutions
            .windows(2)
            .zip(self.errors.windows(2))
            .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            .collect()
    }

    pub fn order_within(&self, target: f64, tol: f64) -> bool {
        (self.observed_order - target).abs() <= tol
    }
}

/// Fits `error ≈ C·h^p` to `(h, error)` pairs.
pub fn estimate_order(pairs: &[(f64, f64)]) -> Result<ConvergenceReport, GridError> {
    if pairs.len() < 3 {
        return Err(GridError::TooFewResolutions(pairs.len()));
    }
    for (n, &(h, e)) in pairs.iter().enumerate() {
        if !(h.is_finite() && h > 0.0) {
            return Err(GridError::BadConvergenceData(format!("spacing {h} is not positive")));
        }
        if !(e.is_finite() && e >= 0.0) {
            return Err(GridError::BadConvergenceData(format!("error {e} is not a non-negative number")));
        }
        if pairs[..n].iter().any(|&(h2, _)| h2 == h) {
            return Err(GridError::BadConvergenceData(format!("spacing {h} repeated")));
        }
    }
    let resolutions: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let errors: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    if errors.iter().all(|&e| e == 0.0) {
        return Ok(ConvergenceReport { resolutions, errors, observed_order: f64::INFINITY });
    }
    if errors.contains(&0.0) {
        return Err(GridError::BadConvergenceData("some but not all errors are zero".into()));
    }
    let xs: Vec<f64> = resolutions.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(ConvergenceReport { resolutions, errors, observed_order: sxy / sxx })
}
