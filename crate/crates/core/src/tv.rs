//! Discrete total variation, the difference operator and its adjoint, and
//! projection onto the dual feasible set.
//!
//! The dual variable holds one tensor per mode. Part `m` has the primal
//! extents except along mode `m`, which is one shorter. A singleton mode
//! yields an empty part.

use ndarray::{ArrayD, ArrayViewD, ArrayViewMutD, Axis, IxDyn, Slice, Zip};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TvFlavor {
    /// Per-voxel Euclidean norm of the co-located forward differences.
    #[default]
    Iso,
    /// Sum of absolute forward differences.
    Aniso,
}

fn head(a: &ArrayD<f64>, axis: usize) -> ArrayViewD<'_, f64> {
    a.slice_axis(Axis(axis), Slice::from(..-1))
}

fn tail(a: &ArrayD<f64>, axis: usize) -> ArrayViewD<'_, f64> {
    a.slice_axis(Axis(axis), Slice::from(1..))
}

fn head_mut(a: &mut ArrayD<f64>, axis: usize) -> ArrayViewMutD<'_, f64> {
    a.slice_axis_mut(Axis(axis), Slice::from(..-1))
}

fn tail_mut(a: &mut ArrayD<f64>, axis: usize) -> ArrayViewMutD<'_, f64> {
    a.slice_axis_mut(Axis(axis), Slice::from(1..))
}

fn part_dims(primal: &[usize], mode: usize) -> Vec<usize> {
    let mut d = primal.to_vec();
    d[mode] -= 1;
    d
}

/// Dual variables of the TV problem, one difference-shaped tensor per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVars {
    primal_dims: Vec<usize>,
    parts: Vec<ArrayD<f64>>,
}

impl DualVars {
    pub fn zeros(primal_dims: &[usize]) -> Self {
        let parts = (0..primal_dims.len())
            .map(|m| ArrayD::zeros(IxDyn(&part_dims(primal_dims, m))))
            .collect();
        Self {
            primal_dims: primal_dims.to_vec(),
            parts,
        }
    }

    pub fn from_parts(primal_dims: &[usize], parts: Vec<ArrayD<f64>>) -> Result<Self> {
        if parts.len() != primal_dims.len() {
            return Err(Error::Dims {
                dims: primal_dims.to_vec(),
                reason: format!(
                    "{} dual parts for an order-{} primal",
                    parts.len(),
                    primal_dims.len()
                ),
            });
        }
        for (m, p) in parts.iter().enumerate() {
            let expected = part_dims(primal_dims, m);
            if p.shape() != expected.as_slice() {
                return Err(Error::shape(&expected, p.shape()));
            }
        }
        let parts = parts
            .into_iter()
            .map(|p| p.as_standard_layout().into_owned())
            .collect();
        Ok(Self {
            primal_dims: primal_dims.to_vec(),
            parts,
        })
    }

    pub fn primal_dims(&self) -> &[usize] {
        &self.primal_dims
    }

    pub fn parts(&self) -> &[ArrayD<f64>] {
        &self.parts
    }

    pub fn part(&self, mode: usize) -> &ArrayD<f64> {
        &self.parts[mode]
    }

    pub fn part_mut(&mut self, mode: usize) -> &mut ArrayD<f64> {
        &mut self.parts[mode]
    }

    pub fn num_entries(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    fn ensure_compatible(&self, other: &DualVars) -> Result<()> {
        if self.primal_dims != other.primal_dims {
            return Err(Error::shape(&self.primal_dims, &other.primal_dims));
        }
        Ok(())
    }

    pub fn inner(&self, other: &DualVars) -> Result<f64> {
        self.ensure_compatible(other)?;
        Ok(self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| (a * b).sum())
            .sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.parts
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, other: &DualVars) -> Result<f64> {
        self.ensure_compatible(other)?;
        let mut acc = 0.0;
        for (a, b) in self.parts.iter().zip(&other.parts) {
            Zip::from(a)
                .and(b)
                .for_each(|x, y| acc += (x - y) * (x - y));
        }
        Ok(acc.sqrt())
    }

    pub fn max_abs(&self) -> f64 {
        self.parts
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &DualVars) -> Result<DualVars> {
        self.ensure_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.parts.iter_mut().zip(&other.parts) {
            a.scaled_add(alpha, b);
        }
        Ok(out)
    }

    pub fn scale(&self, alpha: f64) -> DualVars {
        let mut out = self.clone();
        for p in &mut out.parts {
            p.mapv_inplace(|v| alpha * v);
        }
        out
    }

    /// Sum of squares of the co-located dual entries at every primal voxel.
    fn voxel_sq_norms(&self) -> ArrayD<f64> {
        let mut sq = ArrayD::zeros(IxDyn(&self.primal_dims));
        for (m, p) in self.parts.iter().enumerate() {
            Zip::from(head_mut(&mut sq, m))
                .and(p)
                .for_each(|s, &v| *s += v * v);
        }
        sq
    }

    /// Whether every constraint of the dual feasible set holds up to `tol`.
    pub fn is_feasible(&self, flavor: TvFlavor, tol: f64) -> bool {
        match flavor {
            TvFlavor::Aniso => self.max_abs() <= 1.0 + tol,
            TvFlavor::Iso => self.voxel_sq_norms().iter().all(|&s| s <= 1.0 + tol),
        }
    }
}

/// Backward-oriented forward differences: part `m` holds `t(i) - t(i + e_m)`.
pub fn grad(t: &Tensor) -> DualVars {
    let a = t.as_array();
    let parts = (0..t.order())
        .map(|m| {
            (&head(a, m) - &tail(a, m))
                .as_standard_layout()
                .into_owned()
        })
        .collect();
    DualVars {
        primal_dims: t.dims().to_vec(),
        parts,
    }
}

/// Adjoint of [`grad`]: `out(i) = sum_m p_m(i) - p_m(i - e_m)`, with dual
/// entries outside their range read as zero.
pub fn div(d: &DualVars) -> Tensor {
    let mut out = ArrayD::zeros(IxDyn(&d.primal_dims));
    for (m, p) in d.parts.iter().enumerate() {
        let mut h = head_mut(&mut out, m);
        h += p;
        let mut t = tail_mut(&mut out, m);
        t -= p;
    }
    Tensor::from_array(out).expect("primal dims validated at construction")
}

/// Like [`div`] but checks `d` against an expected primal shape.
pub fn div_checked(d: &DualVars, primal_dims: &[usize]) -> Result<Tensor> {
    if d.primal_dims != primal_dims {
        return Err(Error::shape(primal_dims, &d.primal_dims));
    }
    Ok(div(d))
}

pub fn tv(t: &Tensor, flavor: TvFlavor) -> f64 {
    let g = grad(t);
    match flavor {
        TvFlavor::Aniso => g
            .parts
            .iter()
            .map(|p| p.iter().map(|v| v.abs()).sum::<f64>())
            .sum(),
        TvFlavor::Iso => g.voxel_sq_norms().iter().map(|s| s.sqrt()).sum(),
    }
}

/// Orthogonal projection onto the dual feasible set.
pub fn project_dual(d: &DualVars, flavor: TvFlavor) -> DualVars {
    let mut out = d.clone();
    match flavor {
        TvFlavor::Aniso => {
            for p in &mut out.parts {
                p.mapv_inplace(|v| v.clamp(-1.0, 1.0));
            }
        }
        TvFlavor::Iso => {
            let denom = d.voxel_sq_norms().mapv(|s| s.sqrt().max(1.0));
            for (m, p) in out.parts.iter_mut().enumerate() {
                Zip::from(p).and(head(&denom, m)).for_each(|v, &n| *v /= n);
            }
        }
    }
    out
}
