use std::fs::File;
use std::io::{self, BufReader, BufWriter};
use std::path::{Path as FsPath, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ucya_core::array::{Path, SourceScene};
use ucya_core::estimator::{EstimationResult, MeasurementTensor};
use ucya_core::pipeline::Pipeline;
use ucya_harness::config::RunConfig;
use ucya_harness::dump::{read_tensor, write_tensor};
use ucya_harness::experiment::{run_experiment, trial_rng, write_summary, write_trials, ExperimentSpec};
use ucya_harness::metrics::match_paths;
use ucya_harness::probe::{complexity_probe, decomposition_slope, ProbeSize};

#[derive(Parser)]
#[command(name = "ucya", version, about = "Wideband cylindrical-array channel parameter estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one scene and dump its measurement tensor.
    Synth {
        /// Run configuration (desk defaults when omitted).
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Output tensor file.
        #[arg(short, long)]
        out: PathBuf,
        /// Trial index selecting the RNG stream.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Estimate paths from a dumped tensor, or from a fresh synthetic scene.
    Estimate {
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Tensor written by `synth`; must match the configuration.
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Run the configured Monte-Carlo sweep.
    Sweep {
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Per-path trial records.
        #[arg(short, long)]
        out: PathBuf,
        /// Per-point summary; printed to stdout when omitted.
        #[arg(short, long)]
        summary: Option<PathBuf>,
        /// Override `trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Override `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Time the estimator stages over several snapshot counts.
    Probe {
        /// Snapshot counts `M_t`.
        #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32])]
        m_t: Vec<usize>,
        #[arg(long, default_value_t = 12)]
        p_max: usize,
        #[arg(long, default_value_t = 8)]
        m_v: usize,
        #[arg(long, default_value_t = 8)]
        m_f: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(config: Option<&FsPath>) -> Result<RunConfig> {
    match config {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn build(cfg: &RunConfig) -> Result<Pipeline> {
    Ok(Pipeline::new(cfg.system, cfg.geometry, cfg.pipeline_options())?)
}

fn synth_scene(cfg: &RunConfig, pipeline: &Pipeline, trial: usize) -> Result<(SourceScene, MeasurementTensor)> {
    let mut rng = trial_rng(cfg.system.seed, 0, trial);
    let scene = if cfg.paths.is_empty() {
        ucya_core::array::random_scene(&cfg.scene_spec(), &cfg.system, &mut rng)?
    } else {
        SourceScene::with_random_symbols(cfg.paths.clone(), cfg.system.m_t, &mut rng)
    };
    let y = pipeline.measure(&scene, &mut rng)?;
    Ok((scene, y))
}

fn print_path(label: &str, p_el: f64, p_az: f64, p_tau: f64) {
    println!("{label:>6}  elevation {:9.4}°  azimuth {:9.4}°  delay {:9.5} ns", p_el.to_degrees(), p_az.to_degrees(), p_tau * 1e9);
}

fn report(result: &EstimationResult, truth: Option<&[Path]>, spacing_hz: f64) {
    for (i, e) in result.paths.iter().enumerate() {
        print_path(&format!("est {i}"), e.elevation_rad, e.azimuth_rad, e.delay_s);
    }
    if let Some(truth) = truth {
        if truth.len() == result.paths.len() {
            for (t, (j, err)) in truth.iter().zip(match_paths(truth, &result.paths, spacing_hz)) {
                print_path(&format!("true {j}"), t.elevation_rad, t.azimuth_rad, t.delay_s);
                println!(
                    "        error     {:9.4}°          {:9.4}°        {:9.5} ns",
                    err.elevation_rad.to_degrees(),
                    err.azimuth_rad.to_degrees(),
                    err.delay_s * 1e9
                );
            }
        }
    }
    let d = &result.diagnostics;
    println!("vertical |λ|: {:?}", d.vertical_moduli);
    println!("frequency |λ|: {:?}", d.frequency_moduli);
    println!("pairing condition {:.3e}{}", d.pairing_condition, if d.pairing_unstable { " (greedy fallback)" } else { "" });
    if d.clamped.iter().any(|&c| c) {
        println!("warning: some elevation eigenvalues fell outside the array manifold and were clamped");
    }
    if d.under_resolved {
        println!("warning: some azimuth peaks are under-resolved");
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synth { config, out, trial } => {
            let cfg = load(config.as_deref())?;
            let pipeline = build(&cfg)?;
            let (scene, y) = synth_scene(&cfg, &pipeline, trial)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_tensor(BufWriter::new(file), &y.y)?;
            println!("wrote {:?} tensor to {}", y.y.shape(), out.display());
            for (i, p) in scene.paths.iter().enumerate() {
                print_path(&format!("path {i}"), p.elevation_rad, p.azimuth_rad, p.delay_s);
            }
        }
        Command::Estimate { config, input, trial } => {
            let cfg = load(config.as_deref())?;
            let pipeline = build(&cfg)?;
            let (truth, y) = match input {
                Some(path) => {
                    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
                    let t = read_tensor(BufReader::new(file))?;
                    (None, MeasurementTensor::new(t, cfg.system, cfg.geometry, pipeline.p_max())?)
                }
                None => {
                    let (scene, y) = synth_scene(&cfg, &pipeline, trial)?;
                    (Some(scene.paths), y)
                }
            };
            let result = pipeline.estimate(&y, &cfg.estimator_options())?;
            report(&result, truth.as_deref(), cfg.system.subcarrier_spacing_hz);
        }
        Command::Sweep { config, out, summary, trials, seed } => {
            let cfg = load(config.as_deref())?;
            let mut spec = ExperimentSpec::from_config(cfg);
            if let Some(t) = trials {
                if t == 0 {
                    bail!("--trials must be at least 1");
                }
                spec.trials = t;
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            let result = run_experiment(&spec)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_trials(BufWriter::new(file), &result.records)?;
            match summary {
                Some(path) => {
                    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    write_summary(BufWriter::new(file), &result.summary)?;
                }
                None => write_summary(io::stdout().lock(), &result.summary)?,
            }
        }
        Command::Probe { m_t, p_max, m_v, m_f, k, reps, seed } => {
            let sizes: Vec<ProbeSize> = m_t.iter().map(|&m_t| ProbeSize { p_max, m_v, m_f, m_t, k }).collect();
            let rows = complexity_probe(&sizes, reps, seed)?;
            println!("{:>4} {:>4} {:>4} {:>4} {:>3}  {:>14} {:>14} {:>14}", "P", "M_v", "M_f", "M_t", "K", "decomposition", "estimation", "total");
            for r in &rows {
                let s = r.size;
                println!(
                    "{:>4} {:>4} {:>4} {:>4} {:>3}  {:>11.3} ms {:>11.3} ms {:>11.3} ms",
                    s.p_max,
                    s.m_v,
                    s.m_f,
                    s.m_t,
                    s.k,
                    r.decomposition.as_secs_f64() * 1e3,
                    r.estimation.as_secs_f64() * 1e3,
                    r.total.as_secs_f64() * 1e3
                );
            }
            if rows.len() >= 2 {
                println!("decomposition log-log slope vs M_t: {:.3}", decomposition_slope(&rows));
            }
        }
    }
    Ok(())
}
