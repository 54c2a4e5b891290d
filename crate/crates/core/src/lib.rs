//! Total-variation restoration of N-order tensors.
//!
//! Denoising solves `min_{x in C} ||x - s||_F^2 + 2 lambda TV(x)` by fast
//! gradient projection on the dual; deblurring adds a periodic convolution
//! `A` to the data term and wraps the denoiser in an outer FISTA loop.
//! Color images are `m x n x 3` tensors, videos stack frames along the last
//! mode.

pub mod blur;
pub mod deblur;
pub mod denoise;
pub mod error;
pub mod media;
pub mod metrics;
pub mod noise;
pub mod tensor;
pub mod tns;
pub mod tv;

pub use blur::{apply, apply_adjoint, gaussian_psf, naive_inverse, spectrum, BlurSpectrum, Psf};
pub use deblur::{
    data_lipschitz, deblur, deblur_objective, DeblurConfig, Lipschitz, OuterAlgorithm,
};
pub use denoise::{
    denoise, denoise_warm, dual_objective, primal_objective, project_constraint, Algorithm,
    ConstraintSet, DenoiseOutput, IterationRecord, SolveReport, SolverConfig,
};
pub use error::{Error, Result};
pub use media::{MediaKind, MediaMapping};
pub use metrics::psnr;
pub use noise::{add_noise, NoiseSpec};
pub use tensor::{elementwise, frobenius_norm, inner, ComplexTensor, ElementwiseOp, Tensor};
pub use tv::{div, grad, project_dual, tv, DualVars, TvFlavor};
