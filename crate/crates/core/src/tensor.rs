//! Dense N-order real and complex tensors.
//!
//! Storage is an [`ndarray::ArrayD`] kept in standard (C, last index fastest)
//! layout, so `as_slice` always succeeds and matches the `.tns` byte order.

use ndarray::{ArrayD, Axis, Dimension, IxDyn, Zip};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Dims {
            dims: dims.to_vec(),
            reason: "order must be at least 1".into(),
        });
    }
    if dims.contains(&0) {
        return Err(Error::Dims {
            dims: dims.to_vec(),
            reason: "every extent must be at least 1".into(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementwiseOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Dense real tensor of order N >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    data: ArrayD<f64>,
}

impl Tensor {
    pub fn from_vec(dims: &[usize], data: Vec<f64>) -> Result<Self> {
        validate_dims(dims)?;
        let expected: usize = dims.iter().product();
        if expected != data.len() {
            return Err(Error::Dims {
                dims: dims.to_vec(),
                reason: format!("{} values supplied, {} required", data.len(), expected),
            });
        }
        let data = ArrayD::from_shape_vec(IxDyn(dims), data).expect("length checked above");
        Ok(Self { data })
    }

    pub fn from_array(data: ArrayD<f64>) -> Result<Self> {
        validate_dims(data.shape())?;
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        Ok(Self { data })
    }

    /// Panics if `dims` is empty or holds a zero extent.
    pub fn zeros(dims: &[usize]) -> Self {
        Self::full(dims, 0.0)
    }

    pub fn ones(dims: &[usize]) -> Self {
        Self::full(dims, 1.0)
    }

    pub fn full(dims: &[usize], value: f64) -> Self {
        validate_dims(dims).expect("invalid tensor dimensions");
        Self {
            data: ArrayD::from_elem(IxDyn(dims), value),
        }
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        validate_dims(dims).expect("invalid tensor dimensions");
        Self {
            data: ArrayD::from_shape_fn(IxDyn(dims), |idx| f(idx.slice())),
        }
    }

    pub fn dims(&self) -> &[usize] {
        self.data.shape()
    }

    pub fn order(&self) -> usize {
        self.data.ndim()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.data.as_slice().expect("standard layout")
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        self.data.as_slice_mut().expect("standard layout")
    }

    pub fn as_array(&self) -> &ArrayD<f64> {
        &self.data
    }

    pub fn into_array(self) -> ArrayD<f64> {
        self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data.into_raw_vec_and_offset().0
    }

    pub fn get(&self, index: &[usize]) -> Option<f64> {
        self.data.get(IxDyn(index)).copied()
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        self.data[IxDyn(index)] = value;
    }

    /// Index of the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.as_slice().iter().position(|v| !v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.first_non_finite() {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn ensure_same_dims(&self, other: &Tensor) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::shape(self.dims(), other.dims()));
        }
        Ok(())
    }

    pub fn inner(&self, other: &Tensor) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self
            .as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.as_slice().iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.as_slice().iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Tensor {
        Tensor {
            data: self.data.mapv(f),
        }
    }

    pub fn scale(&self, alpha: f64) -> Tensor {
        self.map(|v| alpha * v)
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        elementwise(self, other, ElementwiseOp::Add)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        elementwise(self, other, ElementwiseOp::Sub)
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        elementwise(self, other, ElementwiseOp::Mul)
    }

    pub fn div(&self, other: &Tensor) -> Result<Tensor> {
        elementwise(self, other, ElementwiseOp::Div)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Tensor) -> Result<Tensor> {
        self.ensure_same_dims(other)?;
        let mut out = self.data.clone();
        out.scaled_add(alpha, &other.data);
        Ok(Tensor { data: out })
    }

    /// Frobenius distance between two same-shaped tensors.
    pub fn distance(&self, other: &Tensor) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self
            .as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Circular shift: entry at `idx` moves to `(idx + shift) mod dims`.
    pub fn roll(&self, shifts: &[isize]) -> Result<Tensor> {
        Ok(Tensor {
            data: roll_array(&self.data, shifts)?,
        })
    }

    /// Copy into a zero tensor of larger `dims`, anchored at the origin.
    /// Missing trailing modes of `self` are treated as extent 1.
    pub fn zero_pad(&self, dims: &[usize]) -> Result<Tensor> {
        validate_dims(dims)?;
        if self.order() > dims.len() || self.dims().iter().zip(dims).any(|(s, d)| s > d) {
            return Err(Error::shape(dims, self.dims()));
        }
        let mut out = Tensor::zeros(dims);
        for (idx, v) in self.data.indexed_iter() {
            let mut target = vec![0usize; dims.len()];
            target[..idx.ndim()].copy_from_slice(idx.slice());
            out.data[IxDyn(&target)] = *v;
        }
        Ok(out)
    }

    pub fn to_complex(&self) -> ComplexTensor {
        ComplexTensor {
            data: self.data.mapv(|v| Complex64::new(v, 0.0)),
        }
    }

    /// Unnormalized forward N-dimensional DFT.
    pub fn fftn(&self) -> ComplexTensor {
        self.to_complex().fftn()
    }
}

pub fn inner(a: &Tensor, b: &Tensor) -> Result<f64> {
    a.inner(b)
}

pub fn frobenius_norm(a: &Tensor) -> f64 {
    a.frobenius_norm()
}

pub fn elementwise(a: &Tensor, b: &Tensor, op: ElementwiseOp) -> Result<Tensor> {
    a.ensure_same_dims(b)?;
    if op == ElementwiseOp::Div {
        if let Some(index) = b.as_slice().iter().position(|&v| v == 0.0) {
            return Err(Error::DivisionByZero { index });
        }
    }
    let mut out = a.data.clone();
    Zip::from(&mut out).and(&b.data).for_each(|x, &y| {
        *x = match op {
            ElementwiseOp::Add => *x + y,
            ElementwiseOp::Sub => *x - y,
            ElementwiseOp::Mul => *x * y,
            ElementwiseOp::Div => *x / y,
        }
    });
    Ok(Tensor { data: out })
}

fn roll_array<T: Clone>(a: &ArrayD<T>, shifts: &[isize]) -> Result<ArrayD<T>> {
    if shifts.len() != a.ndim() {
        return Err(Error::param(
            "shifts",
            format!("expected {} shifts, got {}", a.ndim(), shifts.len()),
        ));
    }
    let dims = a.shape().to_vec();
    let mut out = a.clone();
    let mut target = vec![0usize; dims.len()];
    for (idx, v) in a.indexed_iter() {
        for (m, t) in target.iter_mut().enumerate() {
            let n = dims[m] as isize;
            *t = (idx[m] as isize + shifts[m]).rem_euclid(n) as usize;
        }
        out[IxDyn(&target)] = v.clone();
    }
    Ok(out)
}

/// Dense complex tensor, used for frequency-domain values.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    data: ArrayD<Complex64>,
}

impl ComplexTensor {
    pub fn from_vec(dims: &[usize], data: Vec<Complex64>) -> Result<Self> {
        validate_dims(dims)?;
        let expected: usize = dims.iter().product();
        if expected != data.len() {
            return Err(Error::Dims {
                dims: dims.to_vec(),
                reason: format!("{} values supplied, {} required", data.len(), expected),
            });
        }
        let data = ArrayD::from_shape_vec(IxDyn(dims), data).expect("length checked above");
        Ok(Self { data })
    }

    pub fn dims(&self) -> &[usize] {
        self.data.shape()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.data.as_slice().expect("standard layout")
    }

    pub fn as_array(&self) -> &ArrayD<Complex64> {
        &self.data
    }

    pub fn get(&self, index: &[usize]) -> Option<Complex64> {
        self.data.get(IxDyn(index)).copied()
    }

    pub fn conj(&self) -> ComplexTensor {
        ComplexTensor {
            data: self.data.mapv(|z| z.conj()),
        }
    }

    pub fn scale(&self, alpha: f64) -> ComplexTensor {
        ComplexTensor {
            data: self.data.mapv(|z| z * alpha),
        }
    }

    pub fn mul(&self, other: &ComplexTensor) -> Result<ComplexTensor> {
        if self.dims() != other.dims() {
            return Err(Error::shape(self.dims(), other.dims()));
        }
        Ok(ComplexTensor {
            data: &self.data * &other.data,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn min_abs(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, z| m.min(z.norm()))
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn re(&self) -> Tensor {
        Tensor {
            data: self.data.mapv(|z| z.re),
        }
    }

    /// Unnormalized forward N-dimensional DFT.
    pub fn fftn(&self) -> ComplexTensor {
        let mut data = self.data.clone();
        transform_all_axes(&mut data, false);
        ComplexTensor { data }
    }

    /// Inverse N-dimensional DFT, divided by the number of entries.
    pub fn ifftn(&self) -> ComplexTensor {
        let mut data = self.data.clone();
        transform_all_axes(&mut data, true);
        let n = data.len() as f64;
        data.mapv_inplace(|z| z / n);
        ComplexTensor { data }
    }
}

fn transform_all_axes(data: &mut ArrayD<Complex64>, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..data.ndim() {
        let len = data.shape()[axis];
        if len < 2 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for mut lane in data.lanes_mut(Axis(axis)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (v, b) in lane.iter_mut().zip(&buf) {
                *v = *b;
            }
        }
    }
}
