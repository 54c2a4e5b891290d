use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub fn mse(x: &Tensor, reference: &Tensor) -> Result<f64> {
    Ok(x.distance(reference)?.powi(2) / x.len() as f64)
}

/// Peak signal-to-noise ratio in dB: `10 log10(peak^2 / MSE)`.
/// Identical inputs give `f64::INFINITY`.
pub fn psnr(x: &Tensor, reference: &Tensor, peak: f64) -> Result<f64> {
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::param(
            "peak",
            format!("must be positive, got {peak}"),
        ));
    }
    let mse = mse(x, reference)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Render a PSNR value, using `inf` for identical inputs.
pub fn format_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}
