//! Q-DFT analog beamformer and matched digital weights.
//!
//! The horizontal analog stage projects each circular layer onto phase modes
//! `p = −P..P`. The vertical analog stage is the identity, so every layer
//! keeps its own RF chain and the vertical shift invariance survives.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::array::{horizontal_steering, vertical_steering, SystemConfig, UcyaGeometry};
use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::linalg::{cis, kron, CMat, CVec, C64};
use crate::SPEED_OF_LIGHT;
#[allow(unused_imports)]
use num_traits::Float;

/// Largest phase-mode index worth keeping at frequency `f`: `⌊2π f r / c⌋`.
pub fn default_p_max(f_hz: f64, radius_m: f64) -> usize {
    (2.0 * PI * f_hz * radius_m / SPEED_OF_LIGHT).floor() as usize
}

/// Smallest circular element count that keeps phase modes un-aliased at `f`:
/// `⌊4π f r / c⌋`.
pub fn min_elements(f_hz: f64, radius_m: f64) -> usize {
    (4.0 * PI * f_hz * radius_m / SPEED_OF_LIGHT).floor() as usize
}

/// `M_h × (2P+1)` matrix with entries `e^{−j2π m p / M_h}`, `p = −P..P`.
pub fn qdft_matrix(m_h: usize, p_max: usize) -> Result<CMat> {
    if m_h < 2 * p_max + 1 {
        return Err(Error::InvalidParameter(format!(
            "{m_h} elements cannot resolve {} phase modes",
            2 * p_max + 1
        )));
    }
    let p0 = p_max as f64;
    Ok(CMat::from_fn(m_h, 2 * p_max + 1, |m, c| {
        cis(-2.0 * PI * m as f64 * (c as f64 - p0) / m_h as f64)
    }))
}

/// Phase-mode approximation of `qdft_matrix(M_h, P)ᴴ · horizontal_steering`:
/// entry `p` is `√M_h · jᵖ · J_p(γ) · e^{jpφ}` with `γ = 2π f r sin θ / c`.
pub fn beamspace_response(theta: f64, phi: f64, f_hz: f64, geo: &UcyaGeometry, p_max: usize) -> Result<CVec> {
    let need = min_elements(f_hz, geo.radius_m);
    if geo.m_h < need {
        return Err(Error::InvalidParameter(format!(
            "phase modes alias: {} elements, at least {need} needed",
            geo.m_h
        )));
    }
    let gamma = 2.0 * PI * f_hz * geo.radius_m * theta.sin() / SPEED_OF_LIGHT;
    let scale = (geo.m_h as f64).sqrt();
    let p0 = p_max as i32;
    Ok(CVec::from_fn(2 * p_max + 1, |c, _| {
        let p = c as i32 - p0;
        C64::i().powi(p) * cis(p as f64 * phi) * (scale * bessel_j(p, gamma))
    }))
}

/// Largest exact Q-DFT bin magnitude at `P < |p| ≤ 2P` relative to the largest
/// retained bin `|p| ≤ P`, for one incidence direction.
pub fn suppressed_bin_ratio(theta: f64, phi: f64, f_hz: f64, geo: &UcyaGeometry, p_max: usize) -> f64 {
    let a_h = horizontal_steering(theta, phi, f_hz, geo);
    let bin = |p: i64| {
        (0..geo.m_h)
            .map(|m| cis(2.0 * PI * m as f64 * p as f64 / geo.m_h as f64) * a_h[m])
            .sum::<C64>()
            .norm()
    };
    let p0 = p_max as i64;
    let retained = (-p0..=p0).map(bin).fold(0.0, f64::max);
    let suppressed = (p0 + 1..=2 * p0).flat_map(|p| [bin(p), bin(-p)]).fold(0.0, f64::max);
    suppressed / retained
}

/// How the digital weights are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitalWeights {
    /// Vertical weights matched to the sweep direction, horizontal uniform.
    Matched,
    /// All-ones weights; the digital stage passes data through.
    Identity,
}

/// Analog and per-(subcarrier, beam) digital beamformers.
#[derive(Debug, Clone)]
pub struct BeamformerSet {
    pub m_v: usize,
    pub m_h: usize,
    pub p_max: usize,
    /// Horizontal analog Q-DFT matrix, `M_h × (2P+1)`.
    pub b_hab: CMat,
    m_f: usize,
    m_b: usize,
    vertical: Vec<CVec>,
    horizontal: Vec<CVec>,
}

/// Centre of sweep interval `m_b` (zero-based): `π (m_b + ½) / M_b`.
pub fn sweep_direction(m_b: usize, m_b_count: usize) -> f64 {
    PI * (m_b as f64 + 0.5) / m_b_count as f64
}

impl BeamformerSet {
    /// Designs the beamformers for every subcarrier and sweep beam.
    pub fn design(cfg: &SystemConfig, geo: &UcyaGeometry, p_max: usize, weights: DigitalWeights) -> Result<Self> {
        let b_hab = qdft_matrix(geo.m_h, p_max)?;
        let n_h = 2 * p_max + 1;
        let mut vertical = Vec::with_capacity(cfg.m_f * cfg.m_b);
        let mut horizontal = Vec::with_capacity(cfg.m_f * cfg.m_b);
        for m_f in 0..cfg.m_f {
            let f = cfg.frequency(m_f);
            for m_b in 0..cfg.m_b {
                let (v, h) = match weights {
                    DigitalWeights::Matched => (
                        vertical_steering(sweep_direction(m_b, cfg.m_b), f, geo).normalize(),
                        CVec::from_element(n_h, C64::new(1.0 / (n_h as f64).sqrt(), 0.0)),
                    ),
                    DigitalWeights::Identity => {
                        (CVec::from_element(geo.m_v, C64::new(1.0, 0.0)), CVec::from_element(n_h, C64::new(1.0, 0.0)))
                    }
                };
                vertical.push(v);
                horizontal.push(h);
            }
        }
        Ok(Self { m_v: geo.m_v, m_h: geo.m_h, p_max, b_hab, m_f: cfg.m_f, m_b: cfg.m_b, vertical, horizontal })
    }

    /// Beamspace stream count `M_v (2P+1)`.
    pub fn stream_count(&self) -> usize {
        self.m_v * self.horizontal_dim()
    }

    pub fn horizontal_dim(&self) -> usize {
        2 * self.p_max + 1
    }

    fn slot(&self, m_f: usize, m_b: usize) -> usize {
        assert!(m_f < self.m_f && m_b < self.m_b, "beamformer index ({m_f}, {m_b}) out of range");
        m_f * self.m_b + m_b
    }

    /// Diagonal of `B_vdb` at `(m_f, m_b)`.
    pub fn vertical_weights(&self, m_f: usize, m_b: usize) -> &CVec {
        &self.vertical[self.slot(m_f, m_b)]
    }

    pub fn vertical_weights_mut(&mut self, m_f: usize, m_b: usize) -> &mut CVec {
        let k = self.slot(m_f, m_b);
        &mut self.vertical[k]
    }

    /// Diagonal of `B_hdb` at `(m_f, m_b)`.
    pub fn horizontal_weights(&self, m_f: usize, m_b: usize) -> &CVec {
        &self.horizontal[self.slot(m_f, m_b)]
    }

    /// Vertical beamspace response `B_vdbᴴ a_v`.
    pub fn vertical_response(&self, a_v: &CVec, m_f: usize, m_b: usize) -> CVec {
        self.vertical_weights(m_f, m_b).conjugate().component_mul(a_v)
    }

    /// Horizontal beamspace response `B_hdbᴴ B_habᴴ a_h`.
    pub fn horizontal_response(&self, a_h: &CVec, m_f: usize, m_b: usize) -> CVec {
        self.horizontal_weights(m_f, m_b).conjugate().component_mul(&self.b_hab.ad_mul(a_h))
    }

    /// Kronecker-factored hybrid combining of a separable array response.
    pub fn apply_hybrid(&self, a_v: &CVec, a_h: &CVec, m_f: usize, m_b: usize) -> Result<CVec> {
        if a_v.len() != self.m_v || a_h.len() != self.m_h {
            return Err(Error::DimensionMismatch(format!(
                "responses of length {} and {} for a {}x{} array",
                a_v.len(),
                a_h.len(),
                self.m_v,
                self.m_h
            )));
        }
        Ok(crate::linalg::kron_vec(&self.vertical_response(a_v, m_f, m_b), &self.horizontal_response(a_h, m_f, m_b)))
    }

    /// Full combiner `(B_vab B_vdb) ⊗ (B_hab B_hdb)`, `M_v M_h × M_v (2P+1)`.
    pub fn full_matrix(&self, m_f: usize, m_b: usize) -> CMat {
        let v = CMat::from_diagonal(self.vertical_weights(m_f, m_b));
        let h = &self.b_hab * CMat::from_diagonal(self.horizontal_weights(m_f, m_b));
        kron(&v, &h)
    }

    /// Applies the full combiner to an arbitrary array snapshot.
    pub fn apply_full(&self, field: &CVec, m_f: usize, m_b: usize) -> Result<CVec> {
        if field.len() != self.m_v * self.m_h {
            return Err(Error::DimensionMismatch(format!(
                "snapshot of length {} for {} elements",
                field.len(),
                self.m_v * self.m_h
            )));
        }
        Ok(self.full_matrix(m_f, m_b).ad_mul(field))
    }
}
