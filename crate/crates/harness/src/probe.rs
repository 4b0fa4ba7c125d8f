//! Per-stage wall-clock timing against problem size.

use std::time::{Duration, Instant};

use anyhow::Result;
use ucya_core::array::{random_scene, SceneSpec, SystemConfig, UcyaGeometry};
use ucya_core::estimator::{signal_subspace, spatial_smooth, EstimatorOptions};
use ucya_core::pipeline::{Pipeline, PipelineOptions};

use crate::experiment::trial_rng;

/// One problem size `(P, M_v, M_f, M_t, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeSize {
    pub p_max: usize,
    pub m_v: usize,
    pub m_f: usize,
    pub m_t: usize,
    pub k: usize,
}

impl ProbeSize {
    pub fn desk(m_t: usize) -> Self {
        Self { p_max: 12, m_v: 8, m_f: 8, m_t, k: 3 }
    }
}

/// Median stage times for one size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub size: ProbeSize,
    /// Smoothing plus signal-subspace extraction.
    pub decomposition: Duration,
    /// Shift invariance, pairing and azimuth search.
    pub estimation: Duration,
    pub total: Duration,
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

/// Times the estimator on a noisy desk-scale measurement of each size,
/// taking the median of `reps` runs.
pub fn complexity_probe(sizes: &[ProbeSize], reps: usize, seed: u64) -> Result<Vec<ProbeRow>> {
    let reps = reps.max(1);
    sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let mut cfg = SystemConfig::desk();
            cfg.m_f = size.m_f;
            cfg.m_t = size.m_t;
            cfg.subcarrier_spacing_hz = cfg.bandwidth_hz / size.m_f as f64;
            cfg.snr_db = 10.0;
            let mut geo = UcyaGeometry::desk(cfg.f0_hz);
            geo.m_v = size.m_v;
            let pipeline =
                Pipeline::new(cfg, geo, PipelineOptions { p_max: Some(size.p_max), ..PipelineOptions::default() })?;
            let mut rng = trial_rng(seed, i, 0);
            let scene = random_scene(&SceneSpec::new(size.k, 0), &cfg, &mut rng)?;
            let y = pipeline.measure(&scene, &mut rng)?;
            let opts = EstimatorOptions::new(size.k, false);
            let (mut dec, mut tot) = (Vec::with_capacity(reps), Vec::with_capacity(reps));
            for _ in 0..reps {
                let t0 = Instant::now();
                let ss = spatial_smooth(&y.y, &opts.plan)?;
                std::hint::black_box(signal_subspace(&ss, size.k, opts.subspace)?);
                dec.push(t0.elapsed());
                let t0 = Instant::now();
                std::hint::black_box(pipeline.estimate(&y, &opts)?);
                tot.push(t0.elapsed());
            }
            let (decomposition, total) = (median(dec), median(tot));
            Ok(ProbeRow { size, decomposition, estimation: total.saturating_sub(decomposition), total })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of decomposition time against `M_t`.
pub fn decomposition_slope(rows: &[ProbeRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.size.m_t as f64, r.decomposition.as_secs_f64())).collect();
    log_log_slope(&pts)
}
