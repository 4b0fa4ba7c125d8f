//! End-to-end measurement and estimation for a fixed array and configuration.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::array::{
    beam_captures, horizontal_steering, pathloss, per_beam_tensor, synthesize, synthesize_clean, vertical_steering,
    Snapshots, SourceScene, SystemConfig, UcyaGeometry,
};
use crate::beamspace::{default_p_max, qdft_matrix, BeamformerSet, DigitalWeights};
use crate::error::Result;
use crate::estimator::{assemble, estimate, EstimationResult, EstimatorOptions, MeasurementTensor};
use crate::focusing::{FocusingOptions, FocusingSet};
use crate::linalg::{cis, CVec};
use crate::tensor::ComplexTensor;
#[allow(unused_imports)]
use num_traits::Float;

/// Beamformer and focusing choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    /// Phase-mode order; `None` uses `⌊2π f₀ r / c⌋`.
    pub p_max: Option<usize>,
    pub weights: DigitalWeights,
    pub focusing: FocusingOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { p_max: None, weights: DigitalWeights::Matched, focusing: FocusingOptions::default() }
    }
}

/// Precomputed beamformers and focusing matrices.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub cfg: SystemConfig,
    pub geo: UcyaGeometry,
    pub beamformers: BeamformerSet,
    pub focusing: FocusingSet,
}

impl Pipeline {
    pub fn new(cfg: SystemConfig, geo: UcyaGeometry, opts: PipelineOptions) -> Result<Self> {
        cfg.validate()?;
        geo.validate()?;
        let p_max = opts.p_max.unwrap_or_else(|| default_p_max(cfg.f0_hz, geo.radius_m));
        let beamformers = BeamformerSet::design(&cfg, &geo, p_max, opts.weights)?;
        let focusing = FocusingSet::build(&cfg, &geo, &beamformers, opts.focusing)?;
        Ok(Self { cfg, geo, beamformers, focusing })
    }

    pub fn desk() -> Result<Self> {
        let cfg = SystemConfig::desk();
        Self::new(cfg, UcyaGeometry::desk(cfg.f0_hz), PipelineOptions::default())
    }

    pub fn p_max(&self) -> usize {
        self.beamformers.p_max
    }

    /// Focuses every beam of `x` and sums them.
    pub fn focus(&self, x: &Snapshots) -> Result<MeasurementTensor> {
        let beams = per_beam_tensor(x, self.geo.m_v, self.beamformers.horizontal_dim())?;
        let focused = beams
            .iter()
            .enumerate()
            .map(|(m_b, t)| self.focusing.apply(t, m_b, &self.beamformers, &self.cfg))
            .collect::<Result<Vec<_>>>()?;
        assemble(&focused, &self.cfg, &self.geo, self.p_max())
    }

    /// Noisy measurement tensor at `cfg.snr_db`.
    pub fn measure<R: Rng + ?Sized>(&self, scene: &SourceScene, rng: &mut R) -> Result<MeasurementTensor> {
        let x = synthesize(scene, &self.cfg, &self.geo, &self.beamformers, rng)?;
        self.focus(&x)
    }

    pub fn measure_clean(&self, scene: &SourceScene) -> Result<MeasurementTensor> {
        let x = synthesize_clean(scene, &self.cfg, &self.geo, &self.beamformers)?;
        self.focus(&x)
    }

    pub fn estimate(&self, y: &MeasurementTensor, opts: &EstimatorOptions) -> Result<EstimationResult> {
        estimate(y, opts)
    }
}

/// Noiseless measurement tensor with frequency-independent manifolds, the
/// form perfect focusing would produce.
///
/// Each path contributes `a_v(θ, f₀) ∘ B_habᴴ a_h(θ, φ, f₀) ∘ a_f(τ) ∘ s`,
/// once per sweep beam that captures it.
pub fn ideal_measurement(
    scene: &SourceScene,
    cfg: &SystemConfig,
    geo: &UcyaGeometry,
    p_max: usize,
) -> Result<MeasurementTensor> {
    scene.validate(cfg)?;
    let f0 = cfg.frequency(cfg.reference_index());
    let b_hab = qdft_matrix(geo.m_h, p_max)?;
    let shape = [geo.m_v, 2 * p_max + 1, cfg.m_f, cfg.m_t];
    let mut y = ComplexTensor::zeros(&shape);
    for p in &scene.paths {
        let captures = (0..cfg.m_b).filter(|&b| beam_captures(p.elevation_rad, b, cfg.m_b)).count();
        if captures == 0 {
            continue;
        }
        let amp = captures as f64 * p.power / pathloss(p.delay_s, cfg).sqrt();
        let a_v = vertical_steering(p.elevation_rad, f0, geo);
        let a_h = b_hab.adjoint() * horizontal_steering(p.elevation_rad, p.azimuth_rad, f0, geo);
        let a_f = CVec::from_fn(cfg.m_f, |m, _| cis(-2.0 * PI * cfg.frequency(m) * p.delay_s));
        let s = CVec::from_iterator(cfg.m_t, scene.symbols[p.coherence_group].iter().map(|z| z * amp));
        y.add_assign(&ComplexTensor::outer(&[a_v, a_h, a_f, s])?)?;
    }
    MeasurementTensor::new(y, *cfg, *geo, p_max)
}
