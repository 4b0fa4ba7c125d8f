//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Angles are in degrees and delays
//! in nanoseconds; everything else uses SI units. Explicit paths are given as
//! `path.N.elevation_deg`, `path.N.azimuth_deg`, `path.N.delay_ns`,
//! `path.N.power` and `path.N.group`.

use std::collections::BTreeMap;
use std::path::Path as FsPath;
use std::str::FromStr;

use thiserror::Error;
use ucya_core::array::{Path, SceneSpec, SystemConfig, UcyaGeometry};
use ucya_core::beamspace::DigitalWeights;
use ucya_core::estimator::{EstimatorOptions, InvarianceSolver, MusicGrid, SmoothingPlan, SubspaceMethod};
use ucya_core::focusing::FocusingOptions;
use ucya_core::pipeline::PipelineOptions;
use ucya_core::SPEED_OF_LIGHT;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`")]
    Value { line: usize, key: String, value: String },
    #[error("path {index} is missing `{field}`")]
    IncompletePath { index: usize, field: &'static str },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Quantity varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SnrDb,
    AntennaLayers,
    PathCount,
    PhaseModes,
}

impl FromStr for SweepAxis {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "snr_db" => Ok(Self::SnrDb),
            "m_v" => Ok(Self::AntennaLayers),
            "k" => Ok(Self::PathCount),
            "p_max" => Ok(Self::PhaseModes),
            _ => Err(()),
        }
    }
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SnrDb => "snr_db",
            Self::AntennaLayers => "m_v",
            Self::PathCount => "k",
            Self::PhaseModes => "p_max",
        }
    }
}

/// Smoothing choice: fixed subarray counts or the scene-dependent default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    Auto,
    Fixed(SmoothingPlan),
}

/// Everything needed for a single run or a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub geometry: UcyaGeometry,
    pub p_max: Option<usize>,
    pub weights: DigitalWeights,
    pub focusing: FocusingOptions,
    /// Number of paths in random scenes (ignored when `paths` is set).
    pub k: usize,
    /// Leading random-scene paths sharing one symbol stream.
    pub coherent: usize,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    pub min_cos_separation: f64,
    /// Fixed scene; random scenes are drawn per trial when empty.
    pub paths: Vec<Path>,
    pub smoothing: Smoothing,
    pub grid: MusicGrid,
    pub solver: InvarianceSolver,
    pub subspace: SubspaceMethod,
    pub trials: usize,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let system = SystemConfig::desk();
        let spec = SceneSpec::new(3, 0);
        Self {
            system,
            geometry: UcyaGeometry::desk(system.f0_hz),
            p_max: None,
            weights: DigitalWeights::Matched,
            focusing: FocusingOptions::default(),
            k: spec.k,
            coherent: 0,
            elevation_min_deg: spec.elevation_min_rad.to_degrees(),
            elevation_max_deg: spec.elevation_max_rad.to_degrees(),
            min_cos_separation: spec.min_cos_separation,
            paths: Vec::new(),
            smoothing: Smoothing::Auto,
            grid: MusicGrid::default(),
            solver: InvarianceSolver::TotalLeastSquares,
            subspace: SubspaceMethod::Tensor,
            trials: 200,
            sweep_axis: SweepAxis::SnrDb,
            sweep_values: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
        }
    }
}

impl RunConfig {
    pub fn load(path: &FsPath) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        text.parse()
    }

    /// Path count of the scene this configuration produces.
    pub fn path_count(&self) -> usize {
        if self.paths.is_empty() {
            self.k
        } else {
            self.paths.len()
        }
    }

    pub fn is_coherent(&self) -> bool {
        if self.paths.is_empty() {
            self.coherent >= 2
        } else {
            let mut groups: Vec<usize> = self.paths.iter().map(|p| p.coherence_group).collect();
            groups.sort_unstable();
            groups.windows(2).any(|w| w[0] == w[1])
        }
    }

    pub fn scene_spec(&self) -> SceneSpec {
        SceneSpec {
            k: self.k,
            coherent: self.coherent,
            elevation_min_rad: self.elevation_min_deg.to_radians(),
            elevation_max_rad: self.elevation_max_deg.to_radians(),
            min_cos_separation: self.min_cos_separation,
        }
    }

    pub fn pipeline_options(&self) -> PipelineOptions {
        PipelineOptions { p_max: self.p_max, weights: self.weights, focusing: self.focusing }
    }

    pub fn estimator_options(&self) -> EstimatorOptions {
        let k = self.path_count();
        let mut opts = EstimatorOptions::new(k, self.is_coherent());
        if let Smoothing::Fixed(plan) = self.smoothing {
            opts.plan = plan;
        }
        opts.grid = self.grid;
        opts.solver = self.solver;
        opts.subspace = self.subspace;
        opts
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: ucya_core::Error| ConfigError::Invalid(e.to_string());
        self.system.validate().map_err(invalid)?;
        self.geometry.validate().map_err(invalid)?;
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        if self.sweep_values.is_empty() {
            return Err(ConfigError::Invalid("sweep_values must not be empty".into()));
        }
        if self.path_count() == 0 {
            return Err(ConfigError::Invalid("need at least one path".into()));
        }
        Ok(())
    }
}

#[derive(Default)]
struct PathFields {
    elevation_deg: Option<f64>,
    azimuth_deg: Option<f64>,
    delay_ns: Option<f64>,
    power: Option<f64>,
    group: Option<usize>,
}

fn parse_list<T: FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        let mut paths: BTreeMap<usize, PathFields> = BTreeMap::new();
        let (mut radius_m, mut spacing_m, mut spacing_hz) = (None, None, None);

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .ok_or_else(|| ConfigError::Syntax { line, text: raw.to_string() })?;
            if seen.insert(key.to_string(), line).is_some() {
                return Err(ConfigError::Duplicate { line, key: key.to_string() });
            }
            let bad = || ConfigError::Value { line, key: key.to_string(), value: value.to_string() };
            let num = || value.parse::<f64>().map_err(|_| bad());
            let int = || value.parse::<usize>().map_err(|_| bad());

            if let Some(rest) = key.strip_prefix("path.") {
                let (index, field) = rest
                    .split_once('.')
                    .and_then(|(n, f)| Some((n.parse::<usize>().ok()?, f)))
                    .ok_or_else(|| ConfigError::UnknownKey { line, key: key.to_string() })?;
                let p = paths.entry(index).or_default();
                match field {
                    "elevation_deg" => p.elevation_deg = Some(num()?),
                    "azimuth_deg" => p.azimuth_deg = Some(num()?),
                    "delay_ns" => p.delay_ns = Some(num()?),
                    "power" => p.power = Some(num()?),
                    "group" => p.group = Some(int()?),
                    _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
                }
                continue;
            }

            let s = &mut cfg.system;
            match key {
                "f0_hz" => s.f0_hz = num()?,
                "bandwidth_hz" => s.bandwidth_hz = num()?,
                "m_f" => s.m_f = int()?,
                "subcarrier_spacing_hz" => spacing_hz = Some(num()?),
                "m_t" => s.m_t = int()?,
                "m_b" => s.m_b = int()?,
                "sweep_interval_s" => s.sweep_interval_s = num()?,
                "snr_db" => s.snr_db = if value == "inf" { f64::INFINITY } else { num()? },
                "pathloss_exponent" => s.pathloss_exponent = num()?,
                "reference_distance_m" => s.reference_distance_m = num()?,
                "seed" => s.seed = value.parse().map_err(|_| bad())?,
                "m_v" => cfg.geometry.m_v = int()?,
                "m_h" => cfg.geometry.m_h = int()?,
                "radius_m" => radius_m = Some(num()?),
                "layer_spacing_m" => spacing_m = Some(num()?),
                "p_max" => cfg.p_max = Some(int()?),
                "weights" => {
                    cfg.weights = match value {
                        "matched" => DigitalWeights::Matched,
                        "identity" => DigitalWeights::Identity,
                        _ => return Err(bad()),
                    }
                }
                "focus_grid" => cfg.focusing.n_b = int()?,
                "focus_horizontal" => cfg.focusing.horizontal = parse_bool(value).ok_or_else(bad)?,
                "k" => cfg.k = int()?,
                "coherent" => cfg.coherent = int()?,
                "elevation_min_deg" => cfg.elevation_min_deg = num()?,
                "elevation_max_deg" => cfg.elevation_max_deg = num()?,
                "min_cos_separation" => cfg.min_cos_separation = num()?,
                "smoothing" => {
                    cfg.smoothing = if value == "auto" {
                        Smoothing::Auto
                    } else {
                        match parse_list::<usize>(value).as_deref() {
                            Some(&[n_v, n_h, n_f]) => Smoothing::Fixed(SmoothingPlan::new(n_v, n_h, n_f)),
                            _ => return Err(bad()),
                        }
                    }
                }
                "grid_points" => cfg.grid.points = int()?,
                "refine" => cfg.grid.refine = parse_bool(value).ok_or_else(bad)?,
                "solver" => {
                    cfg.solver = match value {
                        "tls" => InvarianceSolver::TotalLeastSquares,
                        "ls" => InvarianceSolver::LeastSquares,
                        _ => return Err(bad()),
                    }
                }
                "subspace" => {
                    cfg.subspace = match value {
                        "tensor" => SubspaceMethod::Tensor,
                        "matrix" => SubspaceMethod::Matrix,
                        _ => return Err(bad()),
                    }
                }
                "trials" => cfg.trials = int()?,
                "sweep_axis" => cfg.sweep_axis = value.parse().map_err(|_| bad())?,
                "sweep_values" => cfg.sweep_values = parse_list(value).ok_or_else(bad)?,
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            }
        }

        let lambda = SPEED_OF_LIGHT / cfg.system.f0_hz;
        cfg.geometry.radius_m = radius_m.unwrap_or(2.0 * lambda);
        cfg.geometry.layer_spacing_m = spacing_m.unwrap_or(lambda / 2.0);
        cfg.system.subcarrier_spacing_hz =
            spacing_hz.unwrap_or(cfg.system.bandwidth_hz / cfg.system.m_f.max(1) as f64);

        for (index, p) in paths {
            let need = |v: Option<f64>, field| v.ok_or(ConfigError::IncompletePath { index, field });
            cfg.paths.push(Path {
                elevation_rad: need(p.elevation_deg, "elevation_deg")?.to_radians(),
                azimuth_rad: need(p.azimuth_deg, "azimuth_deg")?.to_radians(),
                delay_s: need(p.delay_ns, "delay_ns")? * 1e-9,
                power: p.power.unwrap_or(1.0),
                coherence_group: p.group.unwrap_or(cfg.paths.len()),
            });
        }
        if !cfg.paths.is_empty() {
            let mut groups: Vec<usize> = cfg.paths.iter().map(|p| p.coherence_group).collect();
            groups.sort_unstable();
            groups.dedup();
            if groups.iter().enumerate().any(|(i, &g)| i != g) {
                return Err(ConfigError::Invalid("path groups must be numbered 0, 1, 2, … without gaps".into()));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_desk_defaults() {
        let cfg: RunConfig = "".parse().unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.system.m_f, 8);
        assert_eq!(cfg.geometry.m_h, 25);
    }

    #[test]
    fn parses_scalars_lists_and_paths() {
        let text = "
            # narrowband check
            f0_hz = 10e9
            bandwidth_hz = 1e8
            m_f = 10
            snr_db = inf
            smoothing = 1, 2, 1
            sweep_axis = m_v
            sweep_values = 6, 8, 12
            solver = ls
            path.0.elevation_deg = 60
            path.0.azimuth_deg = 90
            path.0.delay_ns = 3.5
            path.1.elevation_deg = 100
            path.1.azimuth_deg = 10
            path.1.delay_ns = 1
            path.1.group = 0
        ";
        let cfg: RunConfig = text.parse().unwrap();
        assert_eq!(cfg.system.subcarrier_spacing_hz, 1e7);
        assert!(cfg.system.snr_db.is_infinite());
        assert!((cfg.geometry.radius_m - 2.0 * SPEED_OF_LIGHT / 10e9).abs() < 1e-15);
        assert_eq!(cfg.smoothing, Smoothing::Fixed(SmoothingPlan::new(1, 2, 1)));
        assert_eq!(cfg.sweep_axis, SweepAxis::AntennaLayers);
        assert_eq!(cfg.sweep_values, vec![6.0, 8.0, 12.0]);
        assert_eq!(cfg.solver, InvarianceSolver::LeastSquares);
        assert_eq!(cfg.paths.len(), 2);
        assert!((cfg.paths[0].elevation_rad - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert!((cfg.paths[0].delay_s - 3.5e-9).abs() < 1e-24);
        assert!(cfg.is_coherent());
        assert_eq!(cfg.path_count(), 2);
    }

    #[test]
    fn rejects_unknown_and_malformed_lines() {
        assert!(matches!("m_q = 3".parse::<RunConfig>(), Err(ConfigError::UnknownKey { line: 1, .. })));
        assert!(matches!("\nm_f 3".parse::<RunConfig>(), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!("m_f = x".parse::<RunConfig>(), Err(ConfigError::Value { .. })));
        assert!(matches!("m_f = 4\nm_f = 5".parse::<RunConfig>(), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!("path.0.elevation_deg = 30".parse::<RunConfig>(), Err(ConfigError::IncompletePath { .. })));
        assert!(matches!("path.x.delay_ns = 1".parse::<RunConfig>(), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!("trials = 0".parse::<RunConfig>(), Err(ConfigError::Invalid(_))));
        assert!(matches!("smoothing = 1,2".parse::<RunConfig>(), Err(ConfigError::Value { .. })));
    }

    #[test]
    fn estimator_options_follow_scene() {
        let cfg: RunConfig = "k = 3\ncoherent = 2".parse().unwrap();
        assert_eq!(cfg.estimator_options().plan, SmoothingPlan::new(1, 3, 1));
        let cfg: RunConfig = "k = 3".parse().unwrap();
        assert_eq!(cfg.estimator_options().plan, SmoothingPlan::NONE);
        let cfg: RunConfig = "k = 3\nsmoothing = 2,1,2".parse().unwrap();
        assert_eq!(cfg.estimator_options().plan, SmoothingPlan::new(2, 1, 2));
    }
}
