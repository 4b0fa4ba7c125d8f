//! Subarray smoothing that restores the signal rank of coherent paths.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::ComplexTensor;

/// Subarray counts per mode.
///
/// Both `n_v` and `n_h` slide the window along the vertical (mode-0) axis:
/// subarray `(n_v, n_h)` starts at layer `n_v + n_h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothingPlan {
    pub n_v: usize,
    pub n_h: usize,
    pub n_f: usize,
}

impl SmoothingPlan {
    pub const NONE: Self = Self { n_v: 1, n_h: 1, n_f: 1 };

    pub fn new(n_v: usize, n_h: usize, n_f: usize) -> Self {
        Self { n_v, n_h, n_f }
    }

    /// `(1, K, 1)` for scenes with coherent paths, no smoothing otherwise.
    pub fn default_for(k: usize, coherent: bool) -> Self {
        if coherent {
            Self::new(1, k, 1)
        } else {
            Self::NONE
        }
    }

    /// Number of subtensors stacked in the time mode.
    pub fn subarrays(&self) -> usize {
        self.n_v * self.n_h * self.n_f
    }

    /// Smoothed extents `(M̃_v, M̃_f)`, or `None` when the windows do not fit.
    pub fn smoothed_extents(&self, m_vd: usize, m_f: usize) -> Option<(usize, usize)> {
        let v = (m_vd + 2).checked_sub(self.n_v + self.n_h)?;
        let f = (m_f + 1).checked_sub(self.n_f)?;
        Some((v, f))
    }

    /// Checks the plan against the tensor extents and the path count.
    ///
    /// ESPRIT needs `K + 1` rows in the smoothed vertical and frequency
    /// modes; MUSIC needs more than `K` phase modes.
    pub fn validate(&self, shape: &[usize], k: usize) -> Result<()> {
        if shape.len() != 4 {
            return Err(Error::InvalidShape(format!("expected an order-4 tensor, got {:?}", shape)));
        }
        if self.n_v == 0 || self.n_h == 0 || self.n_f == 0 {
            return Err(Error::InvalidParameter(format!("subarray counts must be positive, got {:?}", self)));
        }
        let (v, f) = self.smoothed_extents(shape[0], shape[2]).ok_or_else(|| {
            Error::InvalidParameter(format!("plan {:?} does not fit extents {:?}", self, shape))
        })?;
        if v < k + 1 || f < k + 1 || shape[1] <= k {
            return Err(Error::InvalidParameter(format!(
                "plan {:?} leaves extents ({v}, {}, {f}) for {k} paths",
                self, shape[1]
            )));
        }
        Ok(())
    }
}

/// Stacks all smoothing subtensors of `y` along the time mode.
///
/// The output has shape `M̃_v × M_hd × M̃_f × (M_t N_v N_h N_f)`, with the
/// subtensor index running `n_f` fastest, then `n_h`, then `n_v`.
pub fn spatial_smooth(y: &ComplexTensor, plan: &SmoothingPlan) -> Result<ComplexTensor> {
    plan.validate(y.shape(), 0)?;
    let (mv, mf) = plan
        .smoothed_extents(y.shape()[0], y.shape()[2])
        .ok_or_else(|| Error::InvalidParameter(format!("plan {:?} does not fit", plan)))?;
    if *plan == SmoothingPlan::NONE {
        return Ok(y.clone());
    }
    let mut parts = Vec::with_capacity(plan.subarrays());
    for n_v in 0..plan.n_v {
        for n_h in 0..plan.n_h {
            let start = n_v + n_h;
            let rows = y.select(0, start..start + mv)?;
            for n_f in 0..plan.n_f {
                parts.push(rows.select(2, n_f..n_f + mf)?);
            }
        }
    }
    ComplexTensor::concat_all(&parts, 3)
}
