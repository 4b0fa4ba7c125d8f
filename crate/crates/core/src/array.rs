//! Cylindrical array geometry, steering vectors and snapshot synthesis.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::beamspace::BeamformerSet;
use crate::error::{Error, Result};
use crate::linalg::{cis, kron_vec, CVec, C64};
use crate::tensor::ComplexTensor;
use crate::SPEED_OF_LIGHT;
#[allow(unused_imports)]
use num_traits::Float;

/// Stacked uniform circular arrays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcyaGeometry {
    /// Number of circular layers `M_v`.
    pub m_v: usize,
    /// Elements per layer `M_h`.
    pub m_h: usize,
    pub radius_m: f64,
    /// Vertical distance between adjacent layers `h`.
    pub layer_spacing_m: f64,
}

impl UcyaGeometry {
    pub fn new(m_v: usize, m_h: usize, radius_m: f64, layer_spacing_m: f64) -> Result<Self> {
        let geo = Self { m_v, m_h, radius_m, layer_spacing_m };
        geo.validate()?;
        Ok(geo)
    }

    /// 8 layers of 25 elements, radius 2λ and half-wavelength layer spacing.
    pub fn desk(f0_hz: f64) -> Self {
        let lambda = SPEED_OF_LIGHT / f0_hz;
        Self { m_v: 8, m_h: 25, radius_m: 2.0 * lambda, layer_spacing_m: lambda / 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_v < 2 || self.m_h < 3 {
            return Err(Error::InvalidParameter(format!(
                "array needs at least 2 layers of 3 elements, got {}x{}",
                self.m_v, self.m_h
            )));
        }
        if !(self.radius_m > 0.0 && self.radius_m.is_finite() && self.layer_spacing_m > 0.0 && self.layer_spacing_m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radius {} and layer spacing {} must be positive",
                self.radius_m, self.layer_spacing_m
            )));
        }
        Ok(())
    }
}

/// OFDM, sweep and noise parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub f0_hz: f64,
    pub bandwidth_hz: f64,
    /// Number of selected subcarriers `M_f`.
    pub m_f: usize,
    /// Spacing `Δ_F` between selected subcarriers.
    pub subcarrier_spacing_hz: f64,
    /// Time frames `M_t`.
    pub m_t: usize,
    /// Sweep beams `M_b`.
    pub m_b: usize,
    /// Time between successive sweep beams `τ_b`.
    pub sweep_interval_s: f64,
    /// Per-stream SNR in dB; `+∞` disables noise.
    pub snr_db: f64,
    pub pathloss_exponent: f64,
    /// Distance `d₀` at which the pathloss is unity.
    pub reference_distance_m: f64,
    pub seed: u64,
}

impl SystemConfig {
    /// 28 GHz carrier, 2 GHz band sampled at 8 subcarriers, 16 frames, 4 beams.
    pub fn desk() -> Self {
        let bandwidth_hz = 2e9;
        let m_f = 8;
        Self {
            f0_hz: 28e9,
            bandwidth_hz,
            m_f,
            subcarrier_spacing_hz: bandwidth_hz / m_f as f64,
            m_t: 16,
            m_b: 4,
            sweep_interval_s: 1e-6,
            snr_db: 10.0,
            pathloss_exponent: 2.1,
            reference_distance_m: 10.0,
            seed: 1,
        }
    }

    /// Frequency of subcarrier `m_f` (zero-based): `f₀ − B/2 + m_f Δ_F`.
    pub fn frequency(&self, m_f: usize) -> f64 {
        self.f0_hz - self.bandwidth_hz / 2.0 + m_f as f64 * self.subcarrier_spacing_hz
    }

    /// Subcarrier whose frequency is closest to `f₀`; ties go to the lower index.
    pub fn reference_index(&self) -> usize {
        (0..self.m_f)
            .min_by(|&a, &b| {
                (self.frequency(a) - self.f0_hz).abs().total_cmp(&(self.frequency(b) - self.f0_hz).abs())
            })
            .unwrap_or(0)
    }

    /// Unambiguous delay range `1/Δ_F`.
    pub fn max_delay(&self) -> f64 {
        1.0 / self.subcarrier_spacing_hz
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_f < 2 || self.m_t < 2 || self.m_b < 1 {
            return Err(Error::InvalidParameter(format!(
                "need M_f >= 2, M_t >= 2, M_b >= 1, got {}, {}, {}",
                self.m_f, self.m_t, self.m_b
            )));
        }
        if !(self.subcarrier_spacing_hz > 0.0 && self.bandwidth_hz >= 0.0 && self.f0_hz > 0.0) {
            return Err(Error::InvalidParameter("frequencies must be positive".into()));
        }
        if self.frequency(0) <= 0.0 {
            return Err(Error::InvalidParameter(format!("lowest subcarrier {} Hz is not positive", self.frequency(0))));
        }
        if self.snr_db.is_nan() || !(self.reference_distance_m > 0.0) || !self.pathloss_exponent.is_finite() {
            return Err(Error::InvalidParameter("invalid SNR or pathloss parameters".into()));
        }
        Ok(())
    }
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
    pub delay_s: f64,
    /// Real amplitude gain `α`.
    pub power: f64,
    /// Paths sharing a group transmit the same symbol stream.
    pub coherence_group: usize,
}

/// Ground-truth paths and the symbol stream of each coherence group.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceScene {
    pub paths: Vec<Path>,
    /// `symbols[g]` holds `M_t` unit-modulus symbols of group `g`.
    pub symbols: Vec<Vec<C64>>,
}

/// Unit-modulus QPSK symbol.
fn qpsk<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    cis(PI / 4.0 + PI / 2.0 * rng.random_range(0..4) as f64)
}

impl SourceScene {
    /// Draws QPSK streams for every coherence group used by `paths`.
    pub fn with_random_symbols<R: Rng + ?Sized>(paths: Vec<Path>, m_t: usize, rng: &mut R) -> Self {
        let groups = paths.iter().map(|p| p.coherence_group + 1).max().unwrap_or(0);
        let symbols = (0..groups).map(|_| (0..m_t).map(|_| qpsk(rng)).collect()).collect();
        Self { paths, symbols }
    }

    pub fn k(&self) -> usize {
        self.paths.len()
    }

    /// True when some coherence group holds more than one path.
    pub fn has_coherent_paths(&self) -> bool {
        let mut counts = vec![0usize; self.symbols.len()];
        for p in &self.paths {
            if let Some(c) = counts.get_mut(p.coherence_group) {
                *c += 1;
            }
        }
        counts.iter().any(|&c| c > 1)
    }

    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        for (k, p) in self.paths.iter().enumerate() {
            if !(0.0..2.0 * PI).contains(&p.azimuth_rad) {
                return Err(Error::InvalidParameter(format!("path {k}: azimuth {} outside [0, 2π)", p.azimuth_rad)));
            }
            if !(p.elevation_rad > 0.0 && p.elevation_rad < PI) {
                return Err(Error::InvalidParameter(format!("path {k}: elevation {} outside (0, π)", p.elevation_rad)));
            }
            if !(0.0..cfg.max_delay()).contains(&p.delay_s) {
                return Err(Error::InvalidParameter(format!(
                    "path {k}: delay {} outside [0, {})",
                    p.delay_s,
                    cfg.max_delay()
                )));
            }
            if !(p.power > 0.0 && p.power.is_finite()) {
                return Err(Error::InvalidParameter(format!("path {k}: power must be positive")));
            }
            match self.symbols.get(p.coherence_group) {
                Some(s) if s.len() == cfg.m_t => {}
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "path {k}: group {} has no stream of {} symbols",
                        p.coherence_group, cfg.m_t
                    )))
                }
            }
            for (j, q) in self.paths[..k].iter().enumerate() {
                if (p.elevation_rad - q.elevation_rad).abs() < 1e-9 {
                    return Err(Error::Degenerate(format!("paths {j} and {k} share an elevation")));
                }
            }
        }
        Ok(())
    }
}

/// Vertical steering vector, entry `m`: `e^{−j2π f h m cos θ / c} / √M_v`.
pub fn vertical_steering(theta: f64, f_hz: f64, geo: &UcyaGeometry) -> CVec {
    let step = -2.0 * PI / SPEED_OF_LIGHT * f_hz * geo.layer_spacing_m * theta.cos();
    let amp = 1.0 / (geo.m_v as f64).sqrt();
    CVec::from_fn(geo.m_v, |m, _| cis(step * m as f64) * amp)
}

/// Horizontal steering vector, entry `m`: `e^{j2π f r sin θ cos(φ − 2πm/M_h) / c} / √M_h`.
pub fn horizontal_steering(theta: f64, phi: f64, f_hz: f64, geo: &UcyaGeometry) -> CVec {
    let k = 2.0 * PI / SPEED_OF_LIGHT * f_hz * geo.radius_m * theta.sin();
    let amp = 1.0 / (geo.m_h as f64).sqrt();
    CVec::from_fn(geo.m_h, |m, _| {
        let varphi = 2.0 * PI * m as f64 / geo.m_h as f64;
        cis(k * (phi - varphi).cos()) * amp
    })
}

/// `a_v ⊗ a_h`, vertical index slowest.
pub fn full_steering(theta: f64, phi: f64, f_hz: f64, geo: &UcyaGeometry) -> CVec {
    kron_vec(&vertical_steering(theta, f_hz, geo), &horizontal_steering(theta, phi, f_hz, geo))
}

/// Delay and sweep phase `e^{−j2π f τ} e^{−j2π f m_b τ_b}` for zero-based `m_b`.
pub fn delay_sweep_factor(tau_s: f64, f_hz: f64, m_b: usize, tau_b: f64) -> C64 {
    cis(-2.0 * PI * f_hz * tau_s) * sweep_factor(f_hz, m_b, tau_b)
}

/// Sweep phase `e^{−j2π f m_b τ_b}`.
pub fn sweep_factor(f_hz: f64, m_b: usize, tau_b: f64) -> C64 {
    cis(-2.0 * PI * f_hz * m_b as f64 * tau_b)
}

/// Whether beam `m_b` (zero-based) captures a path at elevation `theta`.
///
/// Beam windows are the sweep intervals `[π m_b/M_b, π (m_b+1)/M_b)` widened by
/// half an interval on each side.
pub fn beam_captures(theta: f64, m_b: usize, m_b_count: usize) -> bool {
    let width = PI / m_b_count as f64;
    let lo = width * m_b as f64 - width / 2.0;
    let hi = width * (m_b + 1) as f64 + width / 2.0;
    theta >= lo && theta < hi
}

/// Path loss `ρ = ((d₀ + c τ)/d₀)^η`.
pub fn pathloss(delay_s: f64, cfg: &SystemConfig) -> f64 {
    let d = cfg.reference_distance_m + SPEED_OF_LIGHT * delay_s;
    (d / cfg.reference_distance_m).powf(cfg.pathloss_exponent)
}

/// Post-beamforming samples `x[m_f, m_t, m_b]`, each of length `M_v (2P+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshots {
    pub m_f: usize,
    pub m_t: usize,
    pub m_b: usize,
    pub len: usize,
    /// Noise variance per complex entry used during synthesis.
    pub noise_variance: f64,
    data: Vec<C64>,
}

impl Snapshots {
    pub fn zeros(m_f: usize, m_t: usize, m_b: usize, len: usize) -> Self {
        Self { m_f, m_t, m_b, len, noise_variance: 0.0, data: vec![C64::new(0.0, 0.0); m_f * m_t * m_b * len] }
    }

    fn offset(&self, m_f: usize, m_t: usize, m_b: usize) -> usize {
        assert!(m_f < self.m_f && m_t < self.m_t && m_b < self.m_b, "snapshot index out of range");
        ((m_b * self.m_t + m_t) * self.m_f + m_f) * self.len
    }

    pub fn vector(&self, m_f: usize, m_t: usize, m_b: usize) -> &[C64] {
        let o = self.offset(m_f, m_t, m_b);
        &self.data[o..o + self.len]
    }

    pub fn vector_mut(&mut self, m_f: usize, m_t: usize, m_b: usize) -> &mut [C64] {
        let o = self.offset(m_f, m_t, m_b);
        &mut self.data[o..o + self.len]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Mean `|x|²` over every stream and sample.
    pub fn mean_power(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }

    /// Adds circular Gaussian noise of variance `sigma2` per complex entry.
    pub fn add_noise<R: Rng + ?Sized>(&mut self, sigma2: f64, rng: &mut R) {
        let s = (sigma2 / 2.0).sqrt();
        for z in &mut self.data {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *z += C64::new(re * s, im * s);
        }
        self.noise_variance += sigma2;
    }
}

/// Noiseless post-beamforming snapshots of every captured path.
pub fn synthesize_clean(scene: &SourceScene, cfg: &SystemConfig, geo: &UcyaGeometry, bf: &BeamformerSet) -> Result<Snapshots> {
    if bf.m_v != geo.m_v || bf.m_h != geo.m_h {
        return Err(Error::DimensionMismatch(format!(
            "beamformer for {}x{} used on a {}x{} array",
            bf.m_v, bf.m_h, geo.m_v, geo.m_h
        )));
    }
    scene.validate(cfg)?;
    let mut out = Snapshots::zeros(cfg.m_f, cfg.m_t, cfg.m_b, bf.stream_count());
    for p in &scene.paths {
        let amp = p.power / pathloss(p.delay_s, cfg).sqrt();
        let symbols = &scene.symbols[p.coherence_group];
        for m_f in 0..cfg.m_f {
            let f = cfg.frequency(m_f);
            let a_v = vertical_steering(p.elevation_rad, f, geo);
            let a_h = horizontal_steering(p.elevation_rad, p.azimuth_rad, f, geo);
            for m_b in (0..cfg.m_b).filter(|&b| beam_captures(p.elevation_rad, b, cfg.m_b)) {
                let resp = bf.apply_hybrid(&a_v, &a_h, m_f, m_b)?;
                let phase = delay_sweep_factor(p.delay_s, f, m_b, cfg.sweep_interval_s) * amp;
                for (m_t, s) in symbols.iter().enumerate() {
                    let c = s * phase;
                    for (x, r) in out.vector_mut(m_f, m_t, m_b).iter_mut().zip(resp.iter()) {
                        *x += c * r;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Noise variance giving `snr_db` against mean signal power `signal_power`.
///
/// An empty scene has no signal power; unit power is assumed so that the
/// noise level stays defined.
pub fn noise_variance(signal_power: f64, snr_db: f64) -> f64 {
    let p = if signal_power > 0.0 { signal_power } else { 1.0 };
    p / 10f64.powf(snr_db / 10.0)
}

/// Snapshots of the scene plus AWGN at `cfg.snr_db`.
pub fn synthesize<R: Rng + ?Sized>(
    scene: &SourceScene,
    cfg: &SystemConfig,
    geo: &UcyaGeometry,
    bf: &BeamformerSet,
    rng: &mut R,
) -> Result<Snapshots> {
    let mut x = synthesize_clean(scene, cfg, geo, bf)?;
    if cfg.snr_db.is_finite() {
        let sigma2 = noise_variance(x.mean_power(), cfg.snr_db);
        x.add_noise(sigma2, rng);
    }
    Ok(x)
}

/// Rearranges each beam's snapshots into an `M_vd × M_hd × M_f × M_t` tensor.
pub fn per_beam_tensor(x: &Snapshots, m_vd: usize, m_hd: usize) -> Result<Vec<ComplexTensor>> {
    if m_vd * m_hd != x.len {
        return Err(Error::DimensionMismatch(format!("snapshot length {} is not {m_vd} x {m_hd}", x.len)));
    }
    (0..x.m_b)
        .map(|m_b| {
            let mut data = Vec::with_capacity(x.len * x.m_f * x.m_t);
            for m_t in 0..x.m_t {
                for m_f in 0..x.m_f {
                    let v = x.vector(m_f, m_t, m_b);
                    for i_h in 0..m_hd {
                        for i_v in 0..m_vd {
                            data.push(v[i_v * m_hd + i_h]);
                        }
                    }
                }
            }
            ComplexTensor::new(vec![m_vd, m_hd, x.m_f, x.m_t], data)
        })
        .collect()
}

/// Inverse of [`per_beam_tensor`] for a single beam.
pub fn flatten_beam(t: &ComplexTensor) -> Result<Vec<Vec<C64>>> {
    let s = t.shape();
    if s.len() != 4 {
        return Err(Error::InvalidShape(format!("expected an order-4 tensor, got {:?}", s)));
    }
    let (m_vd, m_hd, m_f, m_t) = (s[0], s[1], s[2], s[3]);
    let mut out = Vec::with_capacity(m_f * m_t);
    for m_t in 0..m_t {
        for m_f in 0..m_f {
            let mut v = vec![C64::new(0.0, 0.0); m_vd * m_hd];
            for i_v in 0..m_vd {
                for i_h in 0..m_hd {
                    v[i_v * m_hd + i_h] = t.get(&[i_v, i_h, m_f, m_t]);
                }
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Settings for random scene generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub k: usize,
    /// Number of paths (from the first) sharing one symbol stream; values
    /// below 2 give an incoherent scene.
    pub coherent: usize,
    pub elevation_min_rad: f64,
    pub elevation_max_rad: f64,
    /// Minimum separation of `cos θ` between any two paths.
    pub min_cos_separation: f64,
}

impl SceneSpec {
    pub fn new(k: usize, coherent: usize) -> Self {
        Self {
            k,
            coherent,
            elevation_min_rad: 30f64.to_radians(),
            elevation_max_rad: 150f64.to_radians(),
            min_cos_separation: 0.1,
        }
    }
}

/// Draws a scene: elevations with separated `cos θ`, uniform azimuths, delays
/// inside `[0.05, 0.95]` of the unambiguous range, unit gains.
pub fn random_scene<R: Rng + ?Sized>(spec: &SceneSpec, cfg: &SystemConfig, rng: &mut R) -> Result<SourceScene> {
    let (c_lo, c_hi) = (spec.elevation_max_rad.cos(), spec.elevation_min_rad.cos());
    if spec.k as f64 * spec.min_cos_separation > (c_hi - c_lo) * 0.9 {
        return Err(Error::InvalidParameter(format!(
            "{} paths do not fit with cos separation {}",
            spec.k, spec.min_cos_separation
        )));
    }
    let mut cosines: Vec<f64> = Vec::with_capacity(spec.k);
    while cosines.len() < spec.k {
        let c = rng.random_range(c_lo..c_hi);
        if cosines.iter().all(|&o| (o - c).abs() >= spec.min_cos_separation) {
            cosines.push(c);
        }
    }
    let coherent = if spec.coherent >= 2 { spec.coherent.min(spec.k) } else { 0 };
    let paths = cosines
        .iter()
        .enumerate()
        .map(|(k, &c)| Path {
            azimuth_rad: rng.random_range(0.0..2.0 * PI),
            elevation_rad: c.acos(),
            delay_s: rng.random_range(0.05..0.95) * cfg.max_delay(),
            power: 1.0,
            coherence_group: if k < coherent { 0 } else if coherent > 0 { k - coherent + 1 } else { k },
        })
        .collect();
    Ok(SourceScene::with_random_symbols(paths, cfg.m_t, rng))
}
