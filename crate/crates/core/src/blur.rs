//! Periodic (circulant) N-D blur operators diagonalized by the DFT.
//!
//! A PSF is zero-padded to the image extents and circularly shifted so its
//! center lands on the origin. The DFT of that tensor holds the eigenvalues
//! of the circulant blur, so `A x = ifftn(eig .* fftn(x))`.

use crate::error::{Error, Result};
use crate::tensor::{ComplexTensor, Tensor};

/// Point-spread function with a declared center (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Psf {
    kernel: Tensor,
    center: Vec<usize>,
    normalized: bool,
}

/// Geometric center: `ceil((s + 1) / 2)` in 1-based terms.
fn default_center(dims: &[usize]) -> Vec<usize> {
    dims.iter().map(|&s| s / 2).collect()
}

impl Psf {
    /// Wrap a kernel; `center` defaults to the geometric center.
    pub fn new(kernel: Tensor, center: Option<Vec<usize>>) -> Result<Self> {
        kernel.ensure_finite()?;
        let center = center.unwrap_or_else(|| default_center(kernel.dims()));
        if center.len() != kernel.order() || center.iter().zip(kernel.dims()).any(|(c, d)| c >= d) {
            return Err(Error::param(
                "center",
                format!("{center:?} lies outside kernel extents {:?}", kernel.dims()),
            ));
        }
        let normalized = (kernel.sum() - 1.0).abs() <= 1e-12;
        Ok(Self {
            kernel,
            center,
            normalized,
        })
    }

    /// Unit impulse of the given order: the identity blur.
    pub fn delta(order: usize) -> Self {
        Self {
            kernel: Tensor::ones(&vec![1; order]),
            center: vec![0; order],
            normalized: true,
        }
    }

    /// Isotropic Gaussian sampled at integer offsets from the center and
    /// renormalized to unit sum.
    pub fn gaussian(size: &[usize], sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param(
                "sigma",
                format!("must be positive, got {sigma}"),
            ));
        }
        if size.is_empty() || size.contains(&0) {
            return Err(Error::param(
                "size",
                format!("extents must be >= 1, got {size:?}"),
            ));
        }
        let center = default_center(size);
        let raw = Tensor::from_fn(size, |idx| {
            let r2: f64 = idx
                .iter()
                .zip(&center)
                .map(|(&i, &c)| (i as f64 - c as f64).powi(2))
                .sum();
            (-r2 / (2.0 * sigma * sigma)).exp()
        });
        let total = raw.sum();
        Ok(Self {
            kernel: raw.scale(1.0 / total),
            center,
            normalized: true,
        })
    }

    pub fn kernel(&self) -> &Tensor {
        &self.kernel
    }

    pub fn center(&self) -> &[usize] {
        &self.center
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn scaled(&self, alpha: f64) -> Psf {
        let kernel = self.kernel.scale(alpha);
        Psf {
            normalized: (kernel.sum() - 1.0).abs() <= 1e-12,
            kernel,
            center: self.center.clone(),
        }
    }
}

pub fn gaussian_psf(size: &[usize], sigma: f64) -> Result<Psf> {
    Psf::gaussian(size, sigma)
}

/// Eigenvalues of the circulant blur for a fixed image shape.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurSpectrum {
    eigenvalues: ComplexTensor,
    psf_dims: Vec<usize>,
    psf_center: Vec<usize>,
}

impl BlurSpectrum {
    /// Build the spectrum of `psf` acting on tensors of shape `dims`. A PSF of
    /// lower order than `dims` is extended with singleton trailing modes.
    pub fn new(psf: &Psf, dims: &[usize]) -> Result<Self> {
        let k = psf.kernel();
        if k.order() > dims.len() || k.dims().iter().zip(dims).any(|(s, d)| s > d) {
            return Err(Error::param(
                "psf",
                format!(
                    "kernel extents {:?} exceed image extents {dims:?}",
                    k.dims()
                ),
            ));
        }
        let padded = k.zero_pad(dims)?;
        let shifts: Vec<isize> = (0..dims.len())
            .map(|m| -(psf.center().get(m).copied().unwrap_or(0) as isize))
            .collect();
        let rotated = padded.roll(&shifts)?;
        Ok(Self {
            eigenvalues: rotated.fftn(),
            psf_dims: k.dims().to_vec(),
            psf_center: psf.center().to_vec(),
        })
    }

    pub fn eigenvalues(&self) -> &ComplexTensor {
        &self.eigenvalues
    }

    pub fn dims(&self) -> &[usize] {
        self.eigenvalues.dims()
    }

    pub fn psf_dims(&self) -> &[usize] {
        &self.psf_dims
    }

    pub fn psf_center(&self) -> &[usize] {
        &self.psf_center
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.max_abs()
    }

    fn check_dims(&self, x: &Tensor) -> Result<()> {
        if x.dims() != self.dims() {
            return Err(Error::shape(self.dims(), x.dims()));
        }
        Ok(())
    }

    fn filter(&self, x: &Tensor, eig: &ComplexTensor) -> Result<Tensor> {
        self.check_dims(x)?;
        let out = eig.mul(&x.fftn())?.ifftn();
        let scale = x.max_abs().max(1.0) * eig.max_abs().max(1.0);
        let residue = out.max_abs_imag();
        if residue > 1e-10 * scale {
            return Err(Error::Numeric(format!(
                "imaginary residue {residue:e} after real convolution"
            )));
        }
        Ok(out.re())
    }

    /// `A x`.
    pub fn apply(&self, x: &Tensor) -> Result<Tensor> {
        self.filter(x, &self.eigenvalues)
    }

    /// `A^T y`, via conjugated eigenvalues.
    pub fn apply_adjoint(&self, y: &Tensor) -> Result<Tensor> {
        self.filter(y, &self.eigenvalues.conj())
    }

    /// Spectral division `ifftn(fftn(y) ./ eig)`, zeroing frequencies whose
    /// eigenvalue magnitude is below `floor`. Amplifies noise badly; kept only
    /// to demonstrate why regularization is needed.
    pub fn naive_inverse(&self, y: &Tensor, floor: f64) -> Result<Tensor> {
        if !(floor.is_finite() && floor >= 0.0) {
            return Err(Error::param("floor", format!("must be >= 0, got {floor}")));
        }
        self.check_dims(y)?;
        let eig = self.eigenvalues.as_slice();
        if let Some(index) = eig.iter().position(|z| floor == 0.0 && z.norm() == 0.0) {
            return Err(Error::DivisionByZero { index });
        }
        let fy = y.fftn();
        let quotient: Vec<_> = fy
            .as_slice()
            .iter()
            .zip(eig)
            .map(|(v, e)| {
                if e.norm() >= floor {
                    v / e
                } else {
                    num_complex::Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let out = ComplexTensor::from_vec(y.dims(), quotient)?.ifftn();
        Ok(out.re())
    }
}

pub fn spectrum(psf: &Psf, dims: &[usize]) -> Result<BlurSpectrum> {
    BlurSpectrum::new(psf, dims)
}

pub fn apply(b: &BlurSpectrum, x: &Tensor) -> Result<Tensor> {
    b.apply(x)
}

pub fn apply_adjoint(b: &BlurSpectrum, y: &Tensor) -> Result<Tensor> {
    b.apply_adjoint(y)
}

pub fn naive_inverse(b: &BlurSpectrum, y: &Tensor, floor: f64) -> Result<Tensor> {
    b.naive_inverse(y, floor)
}
