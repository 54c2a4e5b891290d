use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Seeded additive Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub std: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(std: f64, seed: u64) -> Self {
        Self { std, seed }
    }
}

/// `t + noise`, deterministic for a fixed seed and not clamped.
pub fn add_noise(t: &Tensor, spec: &NoiseSpec) -> Result<Tensor> {
    if !(spec.std.is_finite() && spec.std >= 0.0) {
        return Err(Error::param(
            "std",
            format!("must be >= 0, got {}", spec.std),
        ));
    }
    if spec.std == 0.0 {
        return Ok(t.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.std).expect("std validated");
    Ok(t.map(|v| v + normal.sample(&mut rng)))
}
