//! TV deblurring: `min_{x in C} ||A x - s||_F^2 + 2 lambda TV(x)`.
//!
//! The outer loop is FISTA (or monotone FISTA) on the quadratic data term;
//! each proximal step is a TV denoise of the gradient-step point, solved by
//! the dual projection method and warm-started from the previous duals.

use std::time::Instant;

use crate::blur::BlurSpectrum;
use crate::denoise::{denoise_warm, IterationRecord, SolveReport, SolverConfig};
use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::tv::{self, DualVars, TvFlavor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OuterAlgorithm {
    Fista,
    #[default]
    Mfista,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Lipschitz {
    /// `2 max |eigenvalue|^2`, exact for the circulant operator.
    #[default]
    FromSpectrum,
    Manual(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeblurConfig {
    /// Regularization, TV flavor, constraint and per-step denoiser budget.
    pub inner: SolverConfig,
    pub outer_iters: usize,
    pub outer_algo: OuterAlgorithm,
    pub lipschitz: Lipschitz,
    /// Relative-change stopping threshold for the outer loop; 0 runs all iterations.
    pub tol: f64,
}

impl Default for DeblurConfig {
    fn default() -> Self {
        Self {
            inner: SolverConfig {
                lambda: 0.01,
                max_iters: 10,
                ..SolverConfig::default()
            },
            outer_iters: 100,
            outer_algo: OuterAlgorithm::Mfista,
            lipschitz: Lipschitz::FromSpectrum,
            tol: 0.0,
        }
    }
}

impl DeblurConfig {
    pub fn validate(&self) -> Result<()> {
        self.inner.validate()?;
        if self.outer_iters == 0 {
            return Err(Error::param("outer_iters", "must be at least 1"));
        }
        if let Lipschitz::Manual(l) = self.lipschitz {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::param(
                    "lipschitz",
                    format!("must be positive, got {l}"),
                ));
            }
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::param(
                "tol",
                format!("must be >= 0, got {}", self.tol),
            ));
        }
        Ok(())
    }
}

/// Lipschitz constant of the gradient of `||A x - s||_F^2`.
pub fn data_lipschitz(b: &BlurSpectrum) -> f64 {
    2.0 * b.max_abs_eigenvalue().powi(2)
}

/// `||A x - s||_F^2 + 2 lambda TV(x)`.
pub fn deblur_objective(
    x: &Tensor,
    s: &Tensor,
    b: &BlurSpectrum,
    lambda: f64,
    flavor: TvFlavor,
) -> Result<f64> {
    Ok(b.apply(x)?.distance(s)?.powi(2) + 2.0 * lambda * tv::tv(x, flavor))
}

pub fn deblur(s: &Tensor, b: &BlurSpectrum, cfg: &DeblurConfig) -> Result<(Tensor, SolveReport)> {
    cfg.validate()?;
    s.ensure_finite()?;
    if s.dims() != b.dims() {
        return Err(Error::shape(b.dims(), s.dims()));
    }
    let start = Instant::now();
    let lambda = cfg.inner.lambda;
    let flavor = cfg.inner.flavor;
    let lipschitz = match cfg.lipschitz {
        Lipschitz::FromSpectrum => data_lipschitz(b),
        Lipschitz::Manual(l) => l,
    };
    if lipschitz.is_nan() || lipschitz <= 0.0 {
        return Err(Error::Numeric(
            "blur operator has an all-zero spectrum".into(),
        ));
    }

    // prox of (1/L) 2 lambda TV == denoiser with regularization 2 lambda / L
    let inner_cfg = SolverConfig {
        lambda: 2.0 * lambda / lipschitz,
        ..cfg.inner.clone()
    };
    let objective = |x: &Tensor| deblur_objective(x, s, b, lambda, flavor);

    let mut x_prev = cfg.inner.constraint.project(s);
    let mut f_prev = objective(&x_prev)?;
    let mut y = x_prev.clone();
    let mut t = 1.0f64;
    let mut duals = DualVars::zeros(s.dims());
    let mut report = SolveReport::default();

    for k in 1..=cfg.outer_iters {
        let residual = b.apply(&y)?.sub(s)?;
        let gradient_point = y.axpy(-2.0 / lipschitz, &b.apply_adjoint(&residual)?)?;
        let prox = denoise_warm(&gradient_point, &inner_cfg, Some(&duals))?;
        duals = prox.duals;
        let z = prox.x;
        let f_z = objective(&z)?;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let rel_change = z.distance(&x_prev)? / x_prev.frobenius_norm().max(1e-12);

        let (x, f_x) = match cfg.outer_algo {
            OuterAlgorithm::Fista => {
                let step_back = z.sub(&x_prev)?;
                y = z.axpy((t - 1.0) / t_next, &step_back)?;
                (z, f_z)
            }
            OuterAlgorithm::Mfista => {
                let (x, f_x) = if f_z <= f_prev {
                    (z.clone(), f_z)
                } else {
                    (x_prev.clone(), f_prev)
                };
                let toward_z = z.sub(&x)?;
                let step_back = x.sub(&x_prev)?;
                y = x
                    .axpy(t / t_next, &toward_z)?
                    .axpy((t - 1.0) / t_next, &step_back)?;
                (x, f_x)
            }
        };

        report.trace.push(IterationRecord {
            iter: k,
            dual_objective: None,
            primal_objective: f_x,
            rel_change,
        });
        report.iterations = k;
        report.final_rel_change = rel_change;
        x_prev = x;
        f_prev = f_x;
        t = t_next;

        if rel_change < cfg.tol {
            break;
        }
    }

    report.elapsed = start.elapsed();
    Ok((x_prev, report))
}
