//! Dense complex tensors with Tucker (HOSVD) and CP helpers.
//!
//! Elements are stored first-index-fastest. Modes are zero-based. The mode-n
//! unfolding orders its columns cyclically over modes n+1, …, N−1, 0, …, n−1
//! with mode n+1 slowest, so that
//!
//! ```text
//! unfold(t ×₀ B₀ ⋯ ×_{N−1} B_{N−1}, n) = Bₙ · unfold(t, n) · (B_{n+1} ⊗ ⋯ ⊗ B_{N−1} ⊗ B₀ ⊗ ⋯ ⊗ B_{n−1})ᵀ
//! ```

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{left_singular_full, CMat, CVec, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// Order-N dense complex array.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

/// Tucker model `core ×₀ U₀ ×₁ U₁ ⋯`.
#[derive(Debug, Clone)]
pub struct HosvdModel {
    pub core: ComplexTensor,
    pub factors: Vec<CMat>,
    /// Per mode, the descending singular values of the unfolding (truncated
    /// models keep only the retained ones).
    pub mode_singular_values: Vec<Vec<f64>>,
}

impl HosvdModel {
    pub fn reconstruct(&self) -> Result<ComplexTensor> {
        let mut t = self.core.clone();
        for (n, u) in self.factors.iter().enumerate() {
            t = t.mode_product(u, n)?;
        }
        Ok(t)
    }
}

fn product(xs: &[usize]) -> usize {
    xs.iter().product()
}

impl ComplexTensor {
    /// Builds a tensor from data in canonical order.
    ///
    /// Extents may be zero, which yields an empty tensor usable as the
    /// neutral element of [`ComplexTensor::concat`].
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::InvalidShape("tensor order must be at least 1".into()));
        }
        if product(&shape) != data.len() {
            return Err(Error::InvalidShape(format!(
                "shape {:?} needs {} elements, got {}",
                shape,
                product(&shape),
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    /// All-zero tensor. Panics on an empty shape.
    pub fn zeros(shape: &[usize]) -> Self {
        assert!(!shape.is_empty(), "tensor order must be at least 1");
        Self { shape: shape.to_vec(), data: vec![C64::new(0.0, 0.0); product(shape)] }
    }

    /// Tensor whose entry at each multi-index is `f(index)`.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let mut t = Self::zeros(shape);
        let mut idx = vec![0usize; shape.len()];
        for k in 0..t.data.len() {
            t.data[k] = f(&idx);
            increment(&mut idx, shape);
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order());
        let mut lin = 0;
        for n in (0..self.order()).rev() {
            debug_assert!(idx[n] < self.shape[n]);
            lin = lin * self.shape[n] + idx[n];
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        let k = self.linear_index(idx);
        self.data[k] = value;
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|z| z * alpha).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch(format!("shapes {:?} and {:?}", self.shape, other.shape)));
        }
        Ok(())
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n >= self.order() {
            return Err(Error::ModeOutOfRange { mode: n, order: self.order() });
        }
        Ok(())
    }

    /// Column weights of every mode in the mode-n unfolding.
    fn unfolding_weights(shape: &[usize], n: usize) -> Vec<usize> {
        let order = shape.len();
        let mut w = vec![0usize; order];
        let mut acc = 1;
        for k in (1..order).rev() {
            let m = (n + k) % order;
            w[m] = acc;
            acc *= shape[m];
        }
        w
    }

    /// Mode-n matricization, `I_n × ∏_{k≠n} I_k`.
    pub fn unfold(&self, n: usize) -> Result<CMat> {
        self.check_mode(n)?;
        let rows = self.shape[n];
        let cols = self.len().checked_div(rows).unwrap_or(0);
        let w = Self::unfolding_weights(&self.shape, n);
        let mut m = CMat::zeros(rows, cols);
        let mut idx = vec![0usize; self.order()];
        for &z in &self.data {
            let col: usize = idx.iter().zip(&w).map(|(i, w)| i * w).sum();
            m[(idx[n], col)] = z;
            increment(&mut idx, &self.shape);
        }
        Ok(m)
    }

    /// Inverse of [`ComplexTensor::unfold`].
    pub fn fold(m: &CMat, shape: &[usize], n: usize) -> Result<Self> {
        let mut t = Self::zeros(shape);
        t.check_mode(n)?;
        let rows = shape[n];
        let cols = t.len().checked_div(rows).unwrap_or(0);
        if m.shape() != (rows, cols) {
            return Err(Error::DimensionMismatch(format!(
                "cannot fold {}x{} into shape {:?} along mode {n}",
                m.nrows(),
                m.ncols(),
                shape
            )));
        }
        let w = Self::unfolding_weights(shape, n);
        let mut idx = vec![0usize; shape.len()];
        for k in 0..t.data.len() {
            let col: usize = idx.iter().zip(&w).map(|(i, w)| i * w).sum();
            t.data[k] = m[(idx[n], col)];
            increment(&mut idx, shape);
        }
        Ok(t)
    }

    /// Mode-n product `t ×ₙ m` with `m` of shape `J × I_n`.
    pub fn mode_product(&self, m: &CMat, n: usize) -> Result<Self> {
        self.check_mode(n)?;
        let extent = self.shape[n];
        if m.ncols() != extent {
            return Err(Error::DimensionMismatch(format!(
                "mode-{n} product needs {extent} matrix columns, got {}",
                m.ncols()
            )));
        }
        let j_out = m.nrows();
        let inner = product(&self.shape[..n]);
        let outer = product(&self.shape[n + 1..]);
        let mut shape = self.shape.clone();
        shape[n] = j_out;
        let mut out = vec![C64::new(0.0, 0.0); inner * j_out * outer];
        for o in 0..outer {
            let src = &self.data[o * inner * extent..(o + 1) * inner * extent];
            let dst = &mut out[o * inner * j_out..(o + 1) * inner * j_out];
            for i in 0..extent {
                let s = &src[i * inner..(i + 1) * inner];
                for j in 0..j_out {
                    let c = m[(j, i)];
                    if c == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let d = &mut dst[j * inner..(j + 1) * inner];
                    for (d, s) in d.iter_mut().zip(s) {
                        *d += c * s;
                    }
                }
            }
        }
        Ok(Self { shape, data: out })
    }

    /// Outer product `v₀ ∘ v₁ ∘ ⋯`.
    pub fn outer(vectors: &[CVec]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidShape("outer product of no vectors".into()));
        }
        let shape: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
        Ok(Self::from_fn(&shape, |idx| {
            idx.iter().zip(vectors).fold(C64::new(1.0, 0.0), |acc, (&i, v)| acc * v[i])
        }))
    }

    /// Concatenation along mode n; every other extent must agree.
    pub fn concat(a: &Self, b: &Self, n: usize) -> Result<Self> {
        a.check_mode(n)?;
        if a.order() != b.order()
            || a.shape.iter().zip(&b.shape).enumerate().any(|(k, (x, y))| k != n && x != y)
        {
            return Err(Error::DimensionMismatch(format!(
                "cannot concatenate {:?} and {:?} along mode {n}",
                a.shape, b.shape
            )));
        }
        let inner = product(&a.shape[..n]);
        let outer = product(&a.shape[n + 1..]);
        let (ia, ib) = (a.shape[n] * inner, b.shape[n] * inner);
        let mut shape = a.shape.clone();
        shape[n] += b.shape[n];
        let mut data = Vec::with_capacity(a.len() + b.len());
        for o in 0..outer {
            data.extend_from_slice(&a.data[o * ia..(o + 1) * ia]);
            data.extend_from_slice(&b.data[o * ib..(o + 1) * ib]);
        }
        Ok(Self { shape, data })
    }

    /// Concatenation of several tensors along mode n.
    pub fn concat_all(parts: &[Self], n: usize) -> Result<Self> {
        let (first, rest) =
            parts.split_first().ok_or_else(|| Error::InvalidShape("nothing to concatenate".into()))?;
        first.check_mode(n)?;
        let inner = product(&first.shape[..n]);
        let outer = product(&first.shape[n + 1..]);
        let mut shape = first.shape.clone();
        for p in rest {
            if p.order() != first.order()
                || p.shape.iter().zip(&first.shape).enumerate().any(|(k, (x, y))| k != n && x != y)
            {
                return Err(Error::DimensionMismatch(format!(
                    "cannot concatenate {:?} and {:?} along mode {n}",
                    first.shape, p.shape
                )));
            }
            shape[n] += p.shape[n];
        }
        let mut data = Vec::with_capacity(product(&shape));
        for o in 0..outer {
            for p in parts {
                let block = p.shape[n] * inner;
                data.extend_from_slice(&p.data[o * block..(o + 1) * block]);
            }
        }
        Ok(Self { shape, data })
    }

    /// Sub-tensor keeping indices `range` of mode n.
    pub fn select(&self, n: usize, range: Range<usize>) -> Result<Self> {
        self.check_mode(n)?;
        if range.start > range.end || range.end > self.shape[n] {
            return Err(Error::DimensionMismatch(format!(
                "range {:?} outside mode {n} extent {}",
                range, self.shape[n]
            )));
        }
        let inner = product(&self.shape[..n]);
        let outer = product(&self.shape[n + 1..]);
        let block = self.shape[n] * inner;
        let mut shape = self.shape.clone();
        shape[n] = range.len();
        let mut data = Vec::with_capacity(product(&shape));
        for o in 0..outer {
            data.extend_from_slice(&self.data[o * block + range.start * inner..o * block + range.end * inner]);
        }
        Ok(Self { shape, data })
    }

    /// Order-N tensor with ones on the superdiagonal, all extents `size`.
    pub fn superdiagonal_identity(order: usize, size: usize) -> Result<Self> {
        if order < 2 || size < 1 {
            return Err(Error::InvalidParameter(format!(
                "superdiagonal identity needs order >= 2 and size >= 1, got {order} and {size}"
            )));
        }
        let mut t = Self::zeros(&vec![size; order]);
        for k in 0..size {
            t.set(&vec![k; order], C64::new(1.0, 0.0));
        }
        Ok(t)
    }

    /// CP tensor `⟦Z; A₀, A₁, …⟧` for factor matrices that share a column count.
    pub fn cp(factors: &[CMat]) -> Result<Self> {
        let k = factors.first().map(|f| f.ncols()).unwrap_or(0);
        if factors.len() < 2 || factors.iter().any(|f| f.ncols() != k) {
            return Err(Error::DimensionMismatch("CP factors need equal column counts".into()));
        }
        let mut t = Self::superdiagonal_identity(factors.len(), k)?;
        for (n, f) in factors.iter().enumerate() {
            t = t.mode_product(f, n)?;
        }
        Ok(t)
    }

    /// Full HOSVD: square unitary factors and the all-orthogonal core.
    pub fn hosvd(&self) -> Result<HosvdModel> {
        let mut factors = Vec::with_capacity(self.order());
        let mut sv = Vec::with_capacity(self.order());
        for n in 0..self.order() {
            let (u, s) = left_singular_full(&self.unfold(n)?)?;
            factors.push(u);
            sv.push(s);
        }
        let mut core = self.clone();
        for (n, u) in factors.iter().enumerate() {
            core = core.mode_product(&u.adjoint(), n)?;
        }
        Ok(HosvdModel { core, factors, mode_singular_values: sv })
    }

    /// HOSVD keeping the leading `ranks[n]` singular vectors of each mode.
    pub fn truncated_hosvd(&self, ranks: &[usize]) -> Result<HosvdModel> {
        if ranks.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} ranks for an order-{} tensor",
                ranks.len(),
                self.order()
            )));
        }
        for (n, (&r, &e)) in ranks.iter().zip(&self.shape).enumerate() {
            if r == 0 || r > e {
                return Err(Error::RankExceedsExtent { mode: n, rank: r, extent: e });
            }
        }
        let mut factors = Vec::with_capacity(self.order());
        let mut sv = Vec::with_capacity(self.order());
        let mut core = self.clone();
        for (n, &r) in ranks.iter().enumerate() {
            let (u, s) = left_singular_full(&self.unfold(n)?)?;
            let u = u.columns(0, r).into_owned();
            core = core.mode_product(&u.adjoint(), n)?;
            factors.push(u);
            sv.push(s[..r].to_vec());
        }
        Ok(HosvdModel { core, factors, mode_singular_values: sv })
    }
}

fn increment(idx: &mut [usize], shape: &[usize]) {
    for (i, &e) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < e {
            return;
        }
        *i = 0;
    }
}
