use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use tofmcl::bench::{benchmark_dataset, localize_trial, run_benchmark, BenchmarkSpec, Cell, SceneRef};
use tofmcl::characterize::{calibrate, write_residuals_csv, SweepConfig};
use tofmcl::mcl::write_trace_csv;
use tofmcl::sensor_model::NoiseModel;
use tofmcl::simulator::Scene;

use crate::{BenchmarkArgs, CharacterizeArgs, CliError, LocalizeArgs};

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io { path: "<stdout>".into(), source: e }),
        _ => Ok(()),
    }
}

fn load_noise(calibration: Option<&Path>) -> Result<NoiseModel<f64>, CliError> {
    match calibration {
        None => Ok(NoiseModel::characterized()),
        Some(path) => NoiseModel::from_kv_str(&read_config(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
    }
}

pub fn characterize(args: CharacterizeArgs) -> Result<(), CliError> {
    let mut config: SweepConfig<f64> = match &args.config {
        Some(path) => serde_json::from_str(&read_config(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => SweepConfig::default(),
    };
    config.sigma_scale *= args.noise;
    if config.frames_per_pose < 2 {
        return Err(CliError::Config("frames_per_pose must be at least 2".into()));
    }
    let injected = load_noise(args.calibration.as_deref())?;
    let mut rng = tofmcl::seed::rng_from_seed(args.seed);
    let report = calibrate(&injected, &config, &mut rng)?;

    fs::create_dir_all(&args.out).map_err(|source| CliError::Io { path: args.out.clone(), source })?;
    let calibration_path = args.out.join("calibration.txt");
    let residuals_path = args.out.join("residuals.csv");
    fs::write(&calibration_path, report.model.to_kv_string())
        .map_err(|source| CliError::Io { path: calibration_path.clone(), source })?;
    write_residuals_csv(report.residuals(), create(&residuals_path)?)?;

    let (inj, rec) = (injected.orientation(), report.orientation.coeffs);
    let se = report.orientation.standard_errors;
    let mut rows = vec![
        ("range_slope", injected.range_slope(), report.range.slope, report.range.slope_se),
        ("range_offset_mm", injected.range_offset_mm(), report.range.offset_mm, report.range.offset_se),
        ("orient_a", inj.a, rec.a, se.a),
        ("orient_b", inj.b, rec.b, se.b),
        ("orient_c", inj.c, rec.c, se.c),
    ];
    let names: Vec<String> = report.range.sigma_table.iter().map(|(r, _)| format!("sigma_pct@{r}mm")).collect();
    for (name, (range, recovered)) in names.iter().zip(&report.range.sigma_table) {
        let injected_pct = injected.sigma_percent_at(*range).unwrap_or(f64::NAN);
        rows.push((name.as_str(), injected_pct, *recovered, f64::NAN));
    }
    let mut text = format!("{:<18} {:>14} {:>14} {:>12}\n", "parameter", "injected", "recovered", "std_err");
    for (name, a, b, s) in rows {
        let s = if s.is_nan() { "-".to_string() } else { format!("{s:.3e}") };
        let _ = writeln!(text, "{name:<18} {a:>14.6} {b:>14.6} {s:>12}");
    }
    let _ = writeln!(
        text,
        "max relative range residual {:.4}; wrote {} and {}",
        report.max_relative_residual(),
        calibration_path.display(),
        residuals_path.display()
    );
    emit(&text)
}

fn scene_from(config: Option<&PathBuf>, builtin: &str) -> Result<(Scene<f64>, SceneRef), CliError> {
    let scene_ref = match (config, builtin) {
        (Some(path), _) => SceneRef::File(path.clone()),
        (None, "deer") => SceneRef::Deer,
        (None, _) => SceneRef::Crate,
    };
    let scene = scene_ref.load(None).map_err(tofmcl::bench::BenchError::from)?;
    Ok((scene, scene_ref))
}

pub fn localize(args: LocalizeArgs) -> Result<(), CliError> {
    let (scene, scene_ref) = scene_from(args.config.as_ref(), &args.scene)?;
    let noise = load_noise(args.calibration.as_deref())?;
    let cell = Cell { sensors: args.sensors, samples: args.samples.unwrap_or(scene.pose_count()) };
    let mut spec = BenchmarkSpec::<f64> {
        scene: scene_ref,
        methods: vec![args.method],
        cells: vec![cell],
        trials: 1,
        master_seed: args.seed,
        sigma_scale: args.noise,
        ..Default::default()
    };
    spec.filter.measurement_mode = args.mode;
    spec.validate(&scene)?;
    // Same data and seeds as trial 0 of the matching benchmark cell.
    let dataset = benchmark_dataset(&spec, &scene, &noise)?;
    let out = localize_trial(&spec, &scene, &dataset, &noise, args.method, cell, 0)?;
    if let Some(path) = &args.out {
        write_trace_csv(&out.trace, create(path)?).map_err(tofmcl::bench::BenchError::from)?;
    }
    let flagged = out.degenerate_steps();
    if flagged > 0 {
        log::info!("{flagged} of {} steps were degenerate", out.trace.len() - 1);
    }
    emit(&format!(
        "{} {:.6} {:.4} {}\n",
        args.method,
        out.error.e_x,
        out.error.e_gamma,
        out.trace.len() - 1
    ))
}

pub fn benchmark(args: BenchmarkArgs) -> Result<(), CliError> {
    let (mut spec, base_dir) = match &args.config {
        Some(path) => (BenchmarkSpec::<f64>::from_json(&read_config(path)?)?, path.parent().map(Path::to_path_buf)),
        None => (BenchmarkSpec::default(), None),
    };
    let scene = spec.scene.load(base_dir.as_deref()).map_err(tofmcl::bench::BenchError::from)?;
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if let Some(method) = args.method {
        spec.methods = vec![method];
    }
    if args.sensors.is_some() || args.samples.is_some() {
        spec.cells = vec![Cell {
            sensors: args.sensors.unwrap_or(1),
            samples: args.samples.unwrap_or(scene.pose_count()),
        }];
    }
    if let Some(mode) = args.mode {
        spec.filter.measurement_mode = mode;
    }
    if let Some(noise) = args.noise {
        spec.sigma_scale = noise;
    }
    let noise = load_noise(args.calibration.as_deref())?;
    let table = run_benchmark(&spec, &scene, &noise)?;
    match &args.out {
        Some(path) => {
            table.write_csv(create(path)?)?;
            let mut text = String::new();
            for r in &table.rows {
                let _ = match &r.error {
                    Some(e) => writeln!(text, "{} {}x{} failed: {e}", r.method, r.sensors, r.samples),
                    None => writeln!(
                        text,
                        "{} {}x{} e_x {:.4} ± {:.4} m, e_gamma {:.3} ± {:.3} deg",
                        r.method, r.sensors, r.samples, r.ex_mean, r.ex_std, r.eg_mean, r.eg_std
                    ),
                };
            }
            emit(&text)
        }
        None => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            emit(&String::from_utf8_lossy(&buf))
        }
    }
}
