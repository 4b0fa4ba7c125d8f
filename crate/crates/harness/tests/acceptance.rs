//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucya_core::array::{random_scene, Path, SceneSpec, SourceScene, SystemConfig, UcyaGeometry};
use ucya_core::beamspace::{default_p_max, suppressed_bin_ratio};
use ucya_core::bessel::bessel_j;
use ucya_core::estimator::EstimatorOptions;
use ucya_core::focusing::{solve_focusing, FocusingOptions};
use ucya_core::linalg::{kron, numerical_rank, unitarity_defect};
use ucya_core::pipeline::{ideal_measurement, Pipeline, PipelineOptions};
use ucya_core::{CMat, ComplexTensor, C64, SPEED_OF_LIGHT};
use ucya_harness::config::RunConfig;
use ucya_harness::experiment::{run_experiment, ExperimentSpec, TrialRecord};
use ucya_harness::metrics::{match_paths, PathError};
use ucya_harness::probe::{complexity_probe, decomposition_slope, ProbeSize};

const THETA_TOL: f64 = 1e-4;
const TAU_TOL: f64 = 1e-12;
const PHI_TOL: f64 = PI / 180.0;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

/// Runs one criterion; `budget` is its wall-clock limit in seconds.
fn run(id: u32, name: &'static str, budget: Option<u64>, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t0 = Instant::now();
    let (mut pass, mut detail) = f();
    let elapsed = t0.elapsed();
    if let Some(secs) = budget {
        if elapsed > Duration::from_secs(secs) {
            pass = false;
            detail.push_str(&format!("; exceeded the {secs} s budget"));
        }
    }
    let o = Outcome { id, name, pass, detail, elapsed };
    println!(
        "C{:<2} {} {} [{:.1} s] {}",
        o.id,
        if o.pass { "PASS" } else { "FAIL" },
        o.name,
        o.elapsed.as_secs_f64(),
        o.detail
    );
    o
}

fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> ComplexTensor {
    ComplexTensor::from_fn(shape, |_| rand_c(rng))
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CMat {
    CMat::from_fn(m, n, |_, _| rand_c(rng))
}

fn rel(a: &ComplexTensor, b: &ComplexTensor) -> f64 {
    a.sub(b).unwrap().norm() / b.norm()
}

fn tensor_algebra() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut chain, mut commute, mut unfold, mut hosvd) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..100 {
        let order = 3 + i % 2;
        let shape: Vec<usize> = (0..order).map(|_| rng.random_range(2..6)).collect();
        let t = random_tensor(&mut rng, &shape);
        let n = rng.random_range(0..order);
        let m = (n + 1 + rng.random_range(0..order - 1)) % order;

        let b = random_matrix(&mut rng, shape[n] + 1, shape[n]);
        let c = random_matrix(&mut rng, 3, shape[n] + 1);
        let lhs = t.mode_product(&b, n).unwrap().mode_product(&c, n).unwrap();
        chain = chain.max(rel(&lhs, &t.mode_product(&(&c * &b), n).unwrap()));

        let d = random_matrix(&mut rng, 2, shape[m]);
        let nm = t.mode_product(&b, n).unwrap().mode_product(&d, m).unwrap();
        let mn = t.mode_product(&d, m).unwrap().mode_product(&b, n).unwrap();
        commute = commute.max(rel(&nm, &mn));

        let bs: Vec<CMat> = shape.iter().map(|&e| random_matrix(&mut rng, e + 1, e)).collect();
        let mut full = t.clone();
        for (k, bk) in bs.iter().enumerate() {
            full = full.mode_product(bk, k).unwrap();
        }
        for k in 0..order {
            let mut kr = bs[(k + 1) % order].clone();
            for j in 2..order {
                kr = kron(&kr, &bs[(k + j) % order]);
            }
            let rhs = &bs[k] * t.unfold(k).unwrap() * kr.transpose();
            unfold = unfold.max((full.unfold(k).unwrap() - &rhs).norm() / rhs.norm());
        }

        hosvd = hosvd.max(rel(&t.hosvd().unwrap().reconstruct().unwrap(), &t));
    }
    let pass = chain < 1e-12 && commute < 1e-12 && unfold < 1e-12 && hosvd < 1e-10;
    (pass, format!("chain {chain:.1e}, commutation {commute:.1e}, unfolding {unfold:.1e}, HOSVD {hosvd:.1e}"))
}

fn bessel_constants() -> (bool, String) {
    let (j3, j6) = (bessel_j(3, 1.5), bessel_j(6, 1.5));
    let pass = (0.055..=0.065).contains(&j3) && (1.5e-4..=2.5e-4).contains(&j6);
    (pass, format!("J3(1.5) = {j3:.6}, J6(1.5) = {j6:.4e}"))
}

fn truncation() -> (bool, String) {
    let f0 = SystemConfig::desk().f0_hz;
    let geo = UcyaGeometry::desk(f0);
    let p = default_p_max(f0, geo.radius_m);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut tail) = (0f64, 0f64);
    for _ in 0..100 {
        let theta = rng.random_range(20f64.to_radians()..160f64.to_radians());
        let phi = rng.random_range(0.0..2.0 * PI);
        worst = worst.max(suppressed_bin_ratio(theta, phi, f0, &geo, p));
        let gamma = 2.0 * PI * f0 * geo.radius_m * theta.sin() / SPEED_OF_LIGHT;
        let kept = (0..=p as i32).map(|q| bessel_j(q, gamma).abs()).fold(0.0, f64::max);
        tail = tail.max(bessel_j(p as i32 + 1, gamma).abs() / kept);
    }
    (
        p == 12 && worst < 0.05,
        format!(
            "M_h = {}, P = {p}, worst suppressed/retained bin ratio {worst:.3} (limit 0.05); Bessel tail |J_13(γ)|/max|J_p(γ)| up to {tail:.3}",
            geo.m_h
        ),
    )
}

fn focusing() -> (bool, String) {
    let mut defect: f64 = 0.0;
    let mut norm_change: f64 = 0.0;
    let mut count = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for horizontal in [false, true] {
        let cfg = SystemConfig::desk();
        let opts = PipelineOptions { focusing: FocusingOptions { horizontal, ..Default::default() }, ..Default::default() };
        let p = Pipeline::new(cfg, UcyaGeometry::desk(cfg.f0_hz), opts).unwrap();
        for t in p.focusing.matrices() {
            defect = defect.max(unitarity_defect(t));
            let x = random_matrix(&mut rng, t.ncols(), 5);
            norm_change = norm_change.max(((t * &x).norm() - x.norm()).abs() / x.norm());
            count += 1;
        }
    }
    let g0 = random_matrix(&mut rng, 8, 20);
    let q = random_matrix(&mut rng, 8, 8).qr().q();
    let g = q.adjoint() * &g0;
    let t = solve_focusing(&g, &g0).unwrap();
    let residual = (&t * &g - &g0).norm() / g0.norm();
    let pass = defect < 1e-10 && residual < 1e-10 && norm_change < 1e-12;
    (
        pass,
        format!("{count} matrices, max ‖TᴴT−I‖ {defect:.1e}, Procrustes residual {residual:.1e}, max norm change {norm_change:.1e}"),
    )
}

#[derive(Default)]
struct Worst {
    theta: f64,
    tau: f64,
    phi: f64,
}

impl Worst {
    fn add(&mut self, errs: &[(usize, PathError)]) {
        for (_, e) in errs {
            self.theta = self.theta.max(e.elevation_rad);
            self.tau = self.tau.max(e.delay_s);
            self.phi = self.phi.max(e.azimuth_rad);
        }
    }

    fn within(&self) -> bool {
        self.theta < THETA_TOL && self.tau < TAU_TOL && self.phi <= PHI_TOL
    }

    fn show(&self) -> String {
        format!("θ {:.2e} rad, τ {:.2e} s, φ {:.3}°", self.theta, self.tau, self.phi.to_degrees())
    }
}

fn noiseless_incoherent() -> (bool, String) {
    let pipeline = Pipeline::desk().unwrap();
    let cfg = pipeline.cfg;
    let opts = EstimatorOptions::new(3, false);
    let (mut real, mut ideal) = (Worst::default(), Worst::default());
    for trial in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + trial);
        let scene = random_scene(&SceneSpec::new(3, 0), &cfg, &mut rng).unwrap();
        let y = pipeline.measure_clean(&scene).unwrap();
        let r = pipeline.estimate(&y, &opts).unwrap();
        real.add(&match_paths(&scene.paths, &r.paths, cfg.subcarrier_spacing_hz));
        let y = ideal_measurement(&scene, &cfg, &pipeline.geo, pipeline.p_max()).unwrap();
        let r = pipeline.estimate(&y, &opts).unwrap();
        ideal.add(&match_paths(&scene.paths, &r.paths, cfg.subcarrier_spacing_hz));
    }
    (
        real.within(),
        format!("10 desk scenes, worst {}; with ideal focusing {}", real.show(), ideal.show()),
    )
}

fn coherent_scene(m_t: usize) -> SourceScene {
    let path = |el: f64, az: f64, ns: f64, g: usize| Path {
        elevation_rad: el.to_radians(),
        azimuth_rad: az.to_radians(),
        delay_s: ns * 1e-9,
        power: 1.0,
        coherence_group: g,
    };
    let paths = vec![path(60.0, 40.0, 0.8, 0), path(95.0, 170.0, 1.9, 0), path(125.0, 290.0, 3.1, 1)];
    SourceScene::with_random_symbols(paths, m_t, &mut ChaCha8Rng::seed_from_u64(6))
}

fn coherent_ab() -> (bool, String) {
    let pipeline = Pipeline::desk().unwrap();
    let cfg = pipeline.cfg;
    let scene = coherent_scene(cfg.m_t);
    let y = pipeline.measure_clean(&scene).unwrap();
    let rank = numerical_rank(&y.y.unfold(3).unwrap()).unwrap();

    let smoothed = EstimatorOptions::new(3, true);
    let mut with = Worst::default();
    let r = pipeline.estimate(&y, &smoothed).unwrap();
    with.add(&match_paths(&scene.paths, &r.paths, cfg.subcarrier_spacing_hz));

    let without = match pipeline.estimate(&y, &EstimatorOptions::new(3, false)) {
        Ok(r) => {
            let mut w = Worst::default();
            w.add(&match_paths(&scene.paths, &r.paths, cfg.subcarrier_spacing_hz));
            w
        }
        Err(_) => Worst { theta: f64::INFINITY, tau: f64::INFINITY, phi: f64::INFINITY },
    };

    let mut ideal = Worst::default();
    let yi = ideal_measurement(&scene, &cfg, &pipeline.geo, pipeline.p_max()).unwrap();
    let r = pipeline.estimate(&yi, &smoothed).unwrap();
    ideal.add(&match_paths(&scene.paths, &r.paths, cfg.subcarrier_spacing_hz));

    let pass = with.within() && rank == 2 && !without.within();
    (
        pass,
        format!(
            "smoothing (1,3,1): {}; mode-4 rank {rank}; no smoothing: {}; smoothing with ideal focusing: {}",
            with.show(),
            without.show(),
            ideal.show()
        ),
    )
}

/// At most one increase, and that one within 10 %.
fn non_increasing(xs: &[f64]) -> bool {
    let ups: Vec<(f64, f64)> = xs.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect();
    xs.iter().all(|x| x.is_finite()) && (ups.is_empty() || (ups.len() == 1 && ups[0].1 <= 1.1 * ups[0].0))
}

fn fmt_list(xs: &[f64], scale: f64) -> String {
    xs.iter().map(|x| format!("{:.4}", x * scale)).collect::<Vec<_>>().join(", ")
}

fn sweep(text: &str) -> ucya_harness::experiment::ExperimentOutput {
    let cfg: RunConfig = text.parse().unwrap();
    run_experiment(&ExperimentSpec::from_config(cfg)).unwrap()
}

fn snr_monotonicity() -> (bool, String) {
    let out = sweep("trials = 200\nsweep_axis = snr_db\nsweep_values = -10, -5, 0, 5, 10\nseed = 7");
    let theta: Vec<f64> = out.summary.iter().map(|s| s.rmse_elevation_rad).collect();
    let tau: Vec<f64> = out.summary.iter().map(|s| s.rmse_delay_s).collect();
    let failures: Vec<f64> = out.summary.iter().map(|s| s.failure_rate).collect();
    let pass = non_increasing(&theta) && non_increasing(&tau);
    (
        pass,
        format!(
            "θ RMSE [{}]°, τ RMSE [{}] ns, failure rates [{}]",
            fmt_list(&theta, 180.0 / PI),
            fmt_list(&tau, 1e9),
            fmt_list(&failures, 1.0)
        ),
    )
}

fn median_trial_rmse(records: &[TrialRecord]) -> f64 {
    let mut xs: Vec<f64> =
        records.iter().map(|r| if r.failed { f64::INFINITY } else { r.elevation_rmse() }).collect();
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn tensor_vs_matrix() -> (bool, String) {
    let base = "trials = 200\nsweep_values = -10\nseed = 8\n";
    let tensor = sweep(&format!("{base}subspace = tensor"));
    let matrix = sweep(&format!("{base}subspace = matrix"));
    let (t, m) = (median_trial_rmse(&tensor.records), median_trial_rmse(&matrix.records));
    (t <= m, format!("median elevation RMSE at −10 dB: tensor {:.4}°, matrix {:.4}°", t.to_degrees(), m.to_degrees()))
}

fn antenna_scaling() -> (bool, String) {
    let out = sweep("trials = 200\nsnr_db = -5\nsweep_axis = m_v\nsweep_values = 6, 8, 12\nseed = 9");
    let theta: Vec<f64> = out.summary.iter().map(|s| s.rmse_elevation_rad).collect();
    (non_increasing(&theta), format!("θ RMSE for M_v = 6, 8, 12: [{}]°", fmt_list(&theta, 180.0 / PI)))
}

fn complexity() -> (bool, String) {
    let sizes: Vec<ProbeSize> = [8, 16, 32].into_iter().map(ProbeSize::desk).collect();
    let rows = complexity_probe(&sizes, 9, 10).unwrap();
    let slope = decomposition_slope(&rows);
    let ms: Vec<f64> = rows.iter().map(|r| r.decomposition.as_secs_f64()).collect();
    ((0.7..=1.3).contains(&slope), format!("decomposition [{}] ms for M_t = 8, 16, 32, slope {slope:.3}", fmt_list(&ms, 1e3)))
}

fn determinism() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "trials = 20\nsweep_values = -5, 5\nseed = 11\n").unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("trials{i}.csv"));
        let summary = dir.path().join(format!("summary{i}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_ucya"))
            .arg("sweep")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .arg("--summary")
            .arg(&summary)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push((std::fs::read(out).unwrap(), std::fs::read(summary).unwrap()));
    }
    let same = outputs[0] == outputs[1];
    (same && !outputs[0].0.is_empty(), format!("two sweeps, {} trial-CSV bytes, identical: {same}", outputs[0].0.len()))
}

fn main() -> ExitCode {
    let outcomes = [
        run(1, "tensor algebra", Some(10), tensor_algebra),
        run(2, "Bessel constants", None, bessel_constants),
        run(3, "phase-mode truncation", Some(5), truncation),
        run(4, "focusing unitarity", None, focusing),
        run(5, "noiseless incoherent end-to-end", Some(30), noiseless_incoherent),
        run(6, "coherent A/B with smoothing", Some(60), coherent_ab),
        run(7, "SNR monotonicity", Some(900), snr_monotonicity),
        run(8, "tensor vs matrix at low SNR", None, tensor_vs_matrix),
        run(9, "antenna scaling", None, antenna_scaling),
        run(10, "complexity scaling", None, complexity),
        run(11, "sweep determinism", None, determinism),
    ];
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
