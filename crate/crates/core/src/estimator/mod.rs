//! Joint elevation, delay and azimuth estimation from the focused
//! measurement tensor.
//!
//! Steps: smoothing, truncated HOSVD, shift-invariance (ESPRIT) for
//! elevation and delay, eigenvector pairing, then a MUSIC azimuth search per
//! path.

mod esprit;
mod music;
mod smoothing;

use alloc::format;
use alloc::vec::Vec;

pub use esprit::{
    delay_from_eig, elevation_from_eig, pair_parameters, tls_shift_invariance, InvarianceSolver, Pairing,
    PAIRING_CONDITION_LIMIT,
};
pub use music::{joint_column, music_azimuth, music_spectrum, phase_mode_column, AzimuthPeak, MusicGrid};
pub use smoothing::{spatial_smooth, SmoothingPlan};

use crate::array::{SystemConfig, UcyaGeometry};
use crate::beamspace::qdft_matrix;
use crate::error::{Error, Result};
use crate::linalg::{left_singular_full, svd, CMat};
use crate::tensor::ComplexTensor;

/// Sum of the focused per-beam tensors, `M_vd × M_hd × M_f × M_t`.
#[derive(Debug, Clone)]
pub struct MeasurementTensor {
    pub y: ComplexTensor,
    pub cfg: SystemConfig,
    pub geo: UcyaGeometry,
    /// Phase-mode order `P`; `M_hd = 2P + 1`.
    pub p_max: usize,
    /// Reference subcarrier the data were focused onto.
    pub f0_index: usize,
}

impl MeasurementTensor {
    pub fn new(y: ComplexTensor, cfg: SystemConfig, geo: UcyaGeometry, p_max: usize) -> Result<Self> {
        let want = [geo.m_v, 2 * p_max + 1, cfg.m_f, cfg.m_t];
        if y.shape() != want {
            return Err(Error::DimensionMismatch(format!("measurement shape {:?}, expected {:?}", y.shape(), want)));
        }
        if y.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("non-finite measurement entry".into()));
        }
        Ok(Self { y, cfg, geo, p_max, f0_index: cfg.reference_index() })
    }
}

/// Elementwise sum over beams.
pub fn assemble(
    beams: &[ComplexTensor],
    cfg: &SystemConfig,
    geo: &UcyaGeometry,
    p_max: usize,
) -> Result<MeasurementTensor> {
    let (first, rest) = beams.split_first().ok_or_else(|| Error::InvalidShape("no beams to assemble".into()))?;
    let mut y = first.clone();
    for b in rest {
        y.add_assign(b)?;
    }
    MeasurementTensor::new(y, *cfg, *geo, p_max)
}

/// How the signal subspace is extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubspaceMethod {
    /// Truncated HOSVD in all four modes.
    #[default]
    Tensor,
    /// Only the time-mode (snapshot) SVD, as in matrix ESPRIT.
    Matrix,
}

/// Signal subspace tensor and the per-mode bases it came from.
#[derive(Debug, Clone)]
pub struct SignalSubspace {
    /// `M̃_v × M_hd × M̃_f × K`.
    pub u_s: ComplexTensor,
    /// Leading `K` left singular vectors of each unfolding.
    pub factors: Vec<CMat>,
    /// Orthonormal `K`-dimensional basis over (layer, phase mode), layer
    /// index fastest.
    pub signal_vh: CMat,
    /// Full descending singular values of each unfolding.
    pub singular_values: Vec<Vec<f64>>,
}

/// Rank-`K` signal subspace of the smoothed tensor.
///
/// `Tensor` projects modes 0..3 onto their leading `K` singular vectors and
/// compresses the time mode to `K`; `Matrix` only compresses the time mode.
pub fn signal_subspace(y_ss: &ComplexTensor, k: usize, method: SubspaceMethod) -> Result<SignalSubspace> {
    if y_ss.order() != 4 {
        return Err(Error::InvalidShape(format!("expected an order-4 tensor, got {:?}", y_ss.shape())));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("path count must be at least 1".into()));
    }
    for n in 0..4 {
        let e = y_ss.shape()[n];
        if (n < 3 && k >= e) || k > e {
            return Err(Error::RankExceedsExtent { mode: n, rank: k, extent: e });
        }
    }
    let mut full = Vec::with_capacity(4);
    let mut singular_values = Vec::with_capacity(4);
    for n in 0..4 {
        let (u, s) = left_singular_full(&y_ss.unfold(n)?)?;
        full.push(u);
        singular_values.push(s);
    }
    let factors: Vec<CMat> = full.iter().map(|u| u.columns(0, k).into_owned()).collect();
    let mut u_s = y_ss.mode_product(&factors[3].adjoint(), 3)?;
    if method == SubspaceMethod::Tensor {
        for (n, u) in factors.iter().enumerate().take(3) {
            u_s = u_s.mode_product(&(u * u.adjoint()), n)?;
        }
    }
    let s = u_s.shape();
    let joint = CMat::from_column_slice(s[0] * s[1], s[2] * s[3], u_s.data());
    let (u, _, _) = svd(&joint)?;
    let signal_vh = u.columns(0, k).into_owned();
    Ok(SignalSubspace { u_s, factors, signal_vh, singular_values })
}

/// Estimator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    pub k: usize,
    pub plan: SmoothingPlan,
    pub grid: MusicGrid,
    pub solver: InvarianceSolver,
    pub subspace: SubspaceMethod,
}

impl EstimatorOptions {
    /// Defaults for `k` paths, smoothing only when `coherent`.
    pub fn new(k: usize, coherent: bool) -> Self {
        Self {
            k,
            plan: SmoothingPlan::default_for(k, coherent),
            grid: MusicGrid::default(),
            solver: InvarianceSolver::default(),
            subspace: SubspaceMethod::default(),
        }
    }
}

/// One recovered path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatedPath {
    pub elevation_rad: f64,
    pub delay_s: f64,
    pub azimuth_rad: f64,
}

/// Per-run diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// `|λ_v|` per path, near 1 at high SNR.
    pub vertical_moduli: Vec<f64>,
    /// `|λ_f|` per path.
    pub frequency_moduli: Vec<f64>,
    pub music_peaks: Vec<f64>,
    /// Retained singular values of each unfolding.
    pub retained_singular_values: Vec<Vec<f64>>,
    /// Paths whose elevation cosine was clamped to `[−1, 1]`.
    pub clamped: Vec<bool>,
    pub pairing_condition: f64,
    /// Pairing fell back to greedy matching.
    pub pairing_unstable: bool,
    /// Some path has no prominent azimuth peak.
    pub under_resolved: bool,
}

/// Recovered paths plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub paths: Vec<EstimatedPath>,
    pub diagnostics: Diagnostics,
}

/// Spectrum peak over median below which the peak is not considered resolved.
const MIN_PROMINENCE: f64 = 2.0;

/// Runs smoothing, subspace extraction, ESPRIT, pairing and MUSIC.
pub fn estimate(y: &MeasurementTensor, opts: &EstimatorOptions) -> Result<EstimationResult> {
    let k = opts.k;
    if k == 0 {
        return Err(Error::InvalidParameter("path count must be at least 1".into()));
    }
    opts.plan.validate(y.y.shape(), k)?;
    let y_ss = spatial_smooth(&y.y, &opts.plan)?;
    let sub = signal_subspace(&y_ss, k, opts.subspace)?;
    let psi_v = tls_shift_invariance(&sub.u_s, 0, opts.solver)?;
    let psi_f = tls_shift_invariance(&sub.u_s, 2, opts.solver)?;
    let pairing = pair_parameters(&psi_v, &psi_f)?;

    let f0 = y.cfg.frequency(y.f0_index);
    let b_hab = qdft_matrix(y.geo.m_h, y.p_max)?;
    let mut diag = Diagnostics {
        retained_singular_values: sub.singular_values.iter().map(|s| s[..k.min(s.len())].to_vec()).collect(),
        pairing_condition: pairing.condition,
        pairing_unstable: pairing.fallback,
        ..Diagnostics::default()
    };
    let mut paths = Vec::with_capacity(k);
    for &(lv, lf) in &pairing.pairs {
        let (theta, clamped) = elevation_from_eig(lv, f0, y.geo.layer_spacing_m)?;
        let tau = delay_from_eig(lf, y.cfg.subcarrier_spacing_hz);
        let peak = music_azimuth(&sub.signal_vh, theta, f0, &y.geo, &b_hab, &opts.grid)?;
        diag.vertical_moduli.push(lv.norm());
        diag.frequency_moduli.push(lf.norm());
        diag.music_peaks.push(peak.value);
        diag.clamped.push(clamped);
        diag.under_resolved |= peak.prominence < MIN_PROMINENCE;
        paths.push(EstimatedPath { elevation_rad: theta, delay_s: tau, azimuth_rad: peak.azimuth_rad });
    }
    Ok(EstimationResult { paths, diagnostics: diag })
}
