//! Seeded Monte-Carlo sweeps.

use std::io::Write;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ucya_core::array::{random_scene, Path, SourceScene};
use ucya_core::estimator::{EstimatedPath, EstimationResult, EstimatorOptions};
use ucya_core::pipeline::Pipeline;

use crate::config::{RunConfig, SweepAxis};
use crate::metrics::{match_paths, rmse, PathError};

/// Accepted range of estimated shift-invariance eigenvalue moduli.
pub const MODULUS_RANGE: (f64, f64) = (0.2, 5.0);

pub const TRIAL_COLUMNS: [&str; 13] = [
    "sweep_value",
    "trial",
    "path",
    "theta_true_deg",
    "theta_est_deg",
    "phi_true_deg",
    "phi_est_deg",
    "tau_true_ns",
    "tau_est_ns",
    "theta_err_deg",
    "phi_err_deg",
    "tau_err_ns",
    "failed",
];

pub const SUMMARY_COLUMNS: [&str; 6] =
    ["sweep_value", "rmse_theta_deg", "rmse_phi_deg", "rmse_tau_ns", "failure_rate", "trials"];

/// A base configuration swept along one axis.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub base: RunConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn from_config(cfg: RunConfig) -> Self {
        Self { axis: cfg.sweep_axis, values: cfg.sweep_values.clone(), trials: cfg.trials, seed: cfg.system.seed, base: cfg }
    }

    /// Configuration of one sweep point.
    pub fn point(&self, value: f64) -> Result<RunConfig> {
        let mut cfg = self.base.clone();
        let count = || -> Result<usize> {
            if value < 1.0 || value.fract() != 0.0 {
                bail!("{} must be a positive integer, got {value}", self.axis.name());
            }
            Ok(value as usize)
        };
        match self.axis {
            SweepAxis::SnrDb => cfg.system.snr_db = value,
            SweepAxis::AntennaLayers => cfg.geometry.m_v = count()?,
            SweepAxis::PathCount => {
                if !cfg.paths.is_empty() {
                    bail!("cannot sweep the path count of an explicit scene");
                }
                cfg.k = count()?;
            }
            SweepAxis::PhaseModes => cfg.p_max = Some(count()?),
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.values.is_empty() {
            bail!("sweep has no values");
        }
        Ok(())
    }
}

/// Trial RNG: the master seed with stream `(point << 32) | trial`.
pub fn trial_rng(seed: u64, point: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng
}

/// One true path with its assigned estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub truth: Path,
    pub estimate: Option<EstimatedPath>,
    pub error: Option<PathError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub sweep_value: f64,
    pub trial: usize,
    pub paths: Vec<PathRecord>,
    pub failed: bool,
}

impl TrialRecord {
    /// Elevation RMSE over this trial's paths, radians (NaN if failed).
    pub fn elevation_rmse(&self) -> f64 {
        rmse(self.paths.iter().filter_map(|p| p.error.map(|e| e.elevation_rad)))
    }
}

/// Per-point aggregate. RMSEs cover successful trials only; angles in
/// radians, delays in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub rmse_elevation_rad: f64,
    pub rmse_azimuth_rad: f64,
    pub rmse_delay_s: f64,
    pub failure_rate: f64,
    pub trials: usize,
}

impl SummaryRow {
    pub fn aggregate(sweep_value: f64, records: &[TrialRecord]) -> Self {
        let errors: Vec<PathError> = records.iter().flat_map(|r| r.paths.iter().filter_map(|p| p.error)).collect();
        let failed = records.iter().filter(|r| r.failed).count();
        Self {
            sweep_value,
            rmse_elevation_rad: rmse(errors.iter().map(|e| e.elevation_rad)),
            rmse_azimuth_rad: rmse(errors.iter().map(|e| e.azimuth_rad)),
            rmse_delay_s: rmse(errors.iter().map(|e| e.delay_s)),
            failure_rate: failed as f64 / records.len().max(1) as f64,
            trials: records.len(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

/// True when estimation succeeded and every eigenvalue modulus is in range.
pub fn is_success(result: &EstimationResult) -> bool {
    let d = &result.diagnostics;
    d.vertical_moduli.iter().chain(&d.frequency_moduli).all(|&m| (MODULUS_RANGE.0..=MODULUS_RANGE.1).contains(&m))
}

fn scene_for(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<SourceScene> {
    if cfg.paths.is_empty() {
        Ok(random_scene(&cfg.scene_spec(), &cfg.system, rng)?)
    } else {
        Ok(SourceScene::with_random_symbols(cfg.paths.clone(), cfg.system.m_t, rng))
    }
}

/// Runs one trial. Estimator errors become a failed record; scene
/// generation errors are configuration errors and propagate.
pub fn run_trial(
    pipeline: &Pipeline,
    cfg: &RunConfig,
    opts: &EstimatorOptions,
    sweep_value: f64,
    rng: &mut ChaCha8Rng,
    trial: usize,
) -> Result<TrialRecord> {
    let scene = scene_for(cfg, rng)?;
    let outcome = pipeline
        .measure(&scene, rng)
        .and_then(|y| pipeline.estimate(&y, opts))
        .ok()
        .filter(is_success);
    let paths = match &outcome {
        Some(result) => match_paths(&scene.paths, &result.paths, cfg.system.subcarrier_spacing_hz)
            .into_iter()
            .zip(&scene.paths)
            .map(|((j, err), t)| PathRecord { truth: *t, estimate: Some(result.paths[j]), error: Some(err) })
            .collect(),
        None => scene.paths.iter().map(|t| PathRecord { truth: *t, estimate: None, error: None }).collect(),
    };
    Ok(TrialRecord { sweep_value, trial, paths, failed: outcome.is_none() })
}

/// Runs every sweep point; trials run in parallel, results keep trial order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let mut out = ExperimentOutput::default();
    for (point, &value) in spec.values.iter().enumerate() {
        let cfg = spec.point(value)?;
        let pipeline = Pipeline::new(cfg.system, cfg.geometry, cfg.pipeline_options())
            .with_context(|| format!("building the pipeline for {} = {value}", spec.axis.name()))?;
        let opts = cfg.estimator_options();
        let records = (0..spec.trials)
            .into_par_iter()
            .map(|trial| run_trial(&pipeline, &cfg, &opts, value, &mut trial_rng(spec.seed, point, trial), trial))
            .collect::<Result<Vec<_>>>()?;
        out.summary.push(SummaryRow::aggregate(value, &records));
        out.records.extend(records);
    }
    Ok(out)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_trials<W: Write>(w: W, records: &[TrialRecord]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(TRIAL_COLUMNS)?;
    for r in records {
        for (i, p) in r.paths.iter().enumerate() {
            let e = p.estimate.as_ref();
            let err = p.error.as_ref();
            csv.write_record([
                r.sweep_value.to_string(),
                r.trial.to_string(),
                i.to_string(),
                p.truth.elevation_rad.to_degrees().to_string(),
                opt(e.map(|e| e.elevation_rad.to_degrees())),
                p.truth.azimuth_rad.to_degrees().to_string(),
                opt(e.map(|e| e.azimuth_rad.to_degrees())),
                (p.truth.delay_s * 1e9).to_string(),
                opt(e.map(|e| e.delay_s * 1e9)),
                opt(err.map(|e| e.elevation_rad.to_degrees())),
                opt(err.map(|e| e.azimuth_rad.to_degrees())),
                opt(err.map(|e| e.delay_s * 1e9)),
                u8::from(r.failed).to_string(),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(w: W, summary: &[SummaryRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(SUMMARY_COLUMNS)?;
    for s in summary {
        csv.write_record([
            s.sweep_value.to_string(),
            s.rmse_elevation_rad.to_degrees().to_string(),
            s.rmse_azimuth_rad.to_degrees().to_string(),
            (s.rmse_delay_s * 1e9).to_string(),
            s.failure_rate.to_string(),
            s.trials.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(text: &str) -> ExperimentSpec {
        let values = if text.contains("sweep_values") { "" } else { "sweep_values = 10\n" };
        ExperimentSpec::from_config(format!("m_v = 6\nm_t = 8\ntrials = 2\n{values}{text}").parse().unwrap())
    }

    #[test]
    fn trial_streams_differ() {
        use rand::Rng;
        let a: u64 = trial_rng(1, 0, 0).random();
        let b: u64 = trial_rng(1, 0, 1).random();
        let c: u64 = trial_rng(1, 1, 0).random();
        let again: u64 = trial_rng(1, 0, 0).random();
        assert_eq!(a, again);
        assert!(a != b && a != c && b != c);
    }

    #[test]
    fn sweep_points_set_their_axis() {
        let spec = small("sweep_axis = m_v");
        assert_eq!(spec.point(12.0).unwrap().geometry.m_v, 12);
        assert!(spec.point(2.5).is_err());
        let spec = small("sweep_axis = p_max");
        assert_eq!(spec.point(8.0).unwrap().p_max, Some(8));
        let spec = small("path.0.elevation_deg = 60\npath.0.azimuth_deg = 0\npath.0.delay_ns = 1\nsweep_axis = k");
        assert!(spec.point(2.0).is_err());
    }

    #[test]
    fn single_noiseless_trial_rmse_equals_its_error() {
        let mut spec = small("k = 3\nsweep_values = inf");
        spec.trials = 1;
        let out = run_experiment(&spec).unwrap();
        let r = &out.records[0];
        assert!(!r.failed);
        assert_eq!(out.summary[0].failure_rate, 0.0);
        let errs: Vec<f64> = r.paths.iter().map(|p| p.error.unwrap().elevation_rad).collect();
        let want = (errs.iter().map(|e| e * e).sum::<f64>() / 3.0).sqrt();
        assert_eq!(out.summary[0].rmse_elevation_rad, want);
        assert_eq!(r.elevation_rmse(), want);
    }

    #[test]
    fn summary_excludes_failures() {
        let ok = |e: f64| PathRecord {
            truth: Path { azimuth_rad: 0.0, elevation_rad: 1.0, delay_s: 0.0, power: 1.0, coherence_group: 0 },
            estimate: None,
            error: Some(PathError { elevation_rad: e, azimuth_rad: 0.0, delay_s: 0.0 }),
        };
        let records = vec![
            TrialRecord { sweep_value: 0.0, trial: 0, paths: vec![ok(3.0), ok(4.0)], failed: false },
            TrialRecord {
                sweep_value: 0.0,
                trial: 1,
                paths: vec![PathRecord { error: None, ..ok(0.0) }],
                failed: true,
            },
        ];
        let s = SummaryRow::aggregate(0.0, &records);
        assert_eq!(s.failure_rate, 0.5);
        assert_eq!(s.trials, 2);
        assert!((s.rmse_elevation_rad - 12.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let spec = small("k = 2");
        let out = run_experiment(&spec).unwrap();
        let mut buf = Vec::new();
        write_trials(&mut buf, &out.records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRIAL_COLUMNS.join(","));
        assert_eq!(lines.count(), 4);
        let mut buf = Vec::new();
        write_summary(&mut buf, &out.summary).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&SUMMARY_COLUMNS.join(",")));
        assert!(text.lines().nth(1).unwrap().ends_with(",2"));
    }
}
