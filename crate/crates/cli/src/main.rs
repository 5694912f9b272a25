//! `landau-lab` command line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use landau_lab::decayfit::{default_window, fit_exponential, fit_polynomial_rate, FitReport, Window};
use landau_lab::error::ErrorClass;
use landau_lab::evolve::{run_linear, run_nonlinear_with, LinearNorm, LinearProblem};
use landau_lab::io::config::{load_config, parse_config_str};
use landau_lab::io::csv::{read_csv, write_csv, Table};
use landau_lab::io::plot::{emit_plot, PlotStyle};
use landau_lab::io::snapshot::{read_snapshot, write_snapshot};
use landau_lab::io::RunConfig;
use landau_lab::linearized::dissipativity::{find_mr, phi_from_sample};
use landau_lab::linearized::operator::{assemble, spectral_report};
use landau_lab::linearized::radial::RadialSample;
use landau_lab::maxwellian::discretize_maxwellian;
use landau_lab::weight::{WeightContext, WeightSpec};
use landau_lab::diagnostics::NormSpace;
use landau_lab::{Grid, LandauError, Result};

#[derive(Debug, Parser)]
#[command(name = "landau-lab", version, about = "Velocity-space solver for the homogeneous Landau equation")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Configuration override `section.key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Nonlinear run; writes diagnostics.csv and snapshots.
    Simulate(SimulateArgs),
    /// Linear semigroup run (L, B or B0); writes linear.csv.
    Linear(LinearArgs),
    /// Spectrum of the conjugated linearized operator.
    Spectrum(SpectrumArgs),
    /// (M, R) cutoff certificate for a weight and target rate.
    Dissipativity(DissipativityArgs),
    /// Radial tables of J_alpha, l1, l2 and phi.
    KernelsTable(KernelsTableArgs),
    /// Decay-rate fit of one CSV column.
    Fit(FitArgs),
    /// SVG line plot of CSV columns.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Resume from a snapshot written by an earlier run of the same config.
    #[arg(long, value_name = "PATH")]
    resume: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GeneratorArg {
    L,
    B,
    B0,
}

#[derive(Debug, Args)]
struct LinearArgs {
    #[arg(long, value_enum, default_value = "l")]
    generator: GeneratorArg,
    /// Cells per axis (spectral grid for L, direct grid for B and B0).
    #[arg(long, default_value_t = 13)]
    n: usize,
    #[arg(long, default_value_t = 6.0)]
    half_width: f64,
    #[arg(long, default_value_t = 2.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.05)]
    dt_diag: f64,
    /// Target rate of the (M, R) cutoff for B.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Lebesgue exponent of the cutoff certificate for B.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 15)]
    n: usize,
    #[arg(long, default_value_t = 6.0)]
    half_width: f64,
}

#[derive(Debug, Args)]
struct DissipativityArgs {
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Defaults to `model.gamma`.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Stretched-exponential weight exp(kappa <v>^s); omit both for mu^{-1/2}.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 4096.0)]
    radius_max: f64,
}

#[derive(Debug, Args)]
struct KernelsTableArgs {
    #[arg(long, default_value_t = 12.0)]
    r_max: f64,
    #[arg(long, default_value_t = 0.25)]
    step: f64,
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    #[arg(long, default_value_t = 0.75)]
    s: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FitKindArg {
    Exponential,
    Polynomial,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long, value_name = "PATH")]
    csv: PathBuf,
    #[arg(long, default_value = "l1_dist")]
    column: String,
    #[arg(long, value_enum, default_value = "exponential")]
    kind: FitKindArg,
    /// Window start; default is the late-time window.
    #[arg(long)]
    t_a: Option<f64>,
    #[arg(long)]
    t_b: Option<f64>,
    /// Predicted rate to compare with.
    #[arg(long)]
    prediction: Option<f64>,
    /// Roundoff floor of the series for the default window.
    #[arg(long, default_value_t = 1e-13)]
    floor: f64,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long, value_name = "PATH")]
    csv: PathBuf,
    /// Comma-separated column names.
    #[arg(long, value_delimiter = ',', required = true)]
    columns: Vec<String>,
    #[arg(long, default_value = "semilogy")]
    style: String,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "plot.svg")]
    name: String,
}

fn run_config(cli: &Cli) -> Result<RunConfig> {
    match &cli.config {
        Some(path) => load_config(path, &cli.set),
        None => parse_config_str("", &cli.set),
    }
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| LandauError::Io { path: dir.clone(), source: e })?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| LandauError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable report") + "\n"
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let cfg = run_config(cli)?;
    let dir = out_dir(cli, &cfg)?;
    let sim = &cfg.sim;
    let resume = match &args.resume {
        Some(path) => {
            let snap = read_snapshot(path)?;
            if snap.gamma != sim.gamma {
                return Err(LandauError::Config(format!(
                    "snapshot gamma {} differs from the configured {}",
                    snap.gamma, sim.gamma
                )));
            }
            Some((snap.field, snap.t))
        }
        None => None,
    };
    let per_snapshot = sim.snapshot_every.map(|s| (s / sim.dt_diag).round() as u64);
    let total = (sim.t_end / sim.dt_diag).round() as u64;
    let out = run_nonlinear_with(sim, resume, &mut |cp| {
        if let Some(k) = per_snapshot {
            if cp.index % k == 0 || cp.index == total {
                let path = dir.join(format!("snapshot_{:06}.lndu", cp.index));
                write_snapshot(&path, cp.field, cp.row.t, sim.gamma)?;
            }
        }
        info!("t = {:.4} H = {:.12e} l1 = {:.4e}", cp.row.t, cp.row.h, cp.row.l1_dist);
        Ok(())
    })?;
    let table = Table::new(out.columns.clone(), out.rows.iter().map(|r| r.values()).collect());
    let csv = dir.join("diagnostics.csv");
    write_csv(&csv, &table)?;
    write_snapshot(&dir.join("final.lndu"), &out.field, sim.t_end, sim.gamma)?;
    println!("wrote {} ({} rows)", csv.display(), table.rows.len());
    Ok(())
}

fn linear(cli: &Cli, args: &LinearArgs) -> Result<()> {
    let cfg = run_config(cli)?;
    let dir = out_dir(cli, &cfg)?;
    let gamma = cfg.sim.gamma;
    for w in &cfg.linear_weights {
        w.validate(WeightContext::Linearized, gamma)?;
    }
    let grid = Grid::new(args.n, args.half_width)?;
    // Perturbation: the configured initial datum minus the sampled μ.
    let f0 = cfg.sim.initial.discretize(&grid)?;
    let mu = discretize_maxwellian(&grid, 1.0, [0.0; 3], 1.0)?;
    let h0 = f0.add_scaled(-1.0, &mu)?;
    let (problem, norms) = match args.generator {
        GeneratorArg::L => {
            let mut norms = vec![LinearNorm::L2InvSqrtMu];
            norms.extend(cfg.linear_weights.iter().map(|&weight| LinearNorm::Weighted {
                weight,
                space: NormSpace::L1,
            }));
            (LinearProblem::spectral(assemble(&grid, gamma, None)?)?, norms)
        }
        GeneratorArg::B | GeneratorArg::B0 => {
            let cutoff = match args.generator {
                GeneratorArg::B => {
                    let weight = *cfg.linear_weights.first().ok_or_else(|| {
                        LandauError::Config("B runs need at least one entry in diagnostics.linear_weights".into())
                    })?;
                    let cert = find_mr(args.lambda, &weight, args.p, gamma, 4096.0)?;
                    println!("cutoff M = {:.6e}, R = {}", cert.cutoff.m, cert.cutoff.r);
                    Some(cert.cutoff)
                }
                _ => None,
            };
            let norms = cfg
                .linear_weights
                .iter()
                .flat_map(|&weight| {
                    [NormSpace::L1, NormSpace::L2]
                        .into_iter()
                        .map(move |space| LinearNorm::Weighted { weight, space })
                })
                .collect();
            (LinearProblem::direct(&grid, gamma, cutoff)?, norms)
        }
    };
    let series = run_linear(&problem, &h0, args.t_end, args.dt_diag, cfg.sim.c_cfl, &norms)?;
    let csv = dir.join("linear.csv");
    write_csv(&csv, &Table::new(series.columns.clone(), series.rows.clone()))?;
    println!("wrote {} ({} rows)", csv.display(), series.rows.len());
    Ok(())
}

fn spectrum(cli: &Cli, args: &SpectrumArgs) -> Result<()> {
    let cfg = run_config(cli)?;
    let dir = out_dir(cli, &cfg)?;
    let grid = Grid::new(args.n, args.half_width)?;
    let report = spectral_report(&assemble(&grid, cfg.sim.gamma, None)?)?;
    let kv = format!(
        "n = {}\nhalf_width = {}\ngamma = {}\nlambda0 = {:.12e}\nmax_eigenvalue = {:.12e}\nspectral_norm = {:.12e}\nasymmetry = {:.6e}\nmax_null_residual = {:.6e}\n",
        report.n,
        report.half_width,
        report.gamma,
        report.lambda0,
        report.max_eigenvalue,
        report.spectral_norm,
        report.asymmetry,
        report.null_residuals.iter().fold(0.0f64, |m, x| m.max(*x))
    );
    write_text(&dir.join("spectrum.txt"), &kv)?;
    write_text(&dir.join("spectrum.json"), &to_json(&report))?;
    let rows = report.eigenvalues.iter().enumerate().map(|(i, &x)| vec![i as f64, x]).collect();
    write_csv(&dir.join("eigenvalues.csv"), &Table::new(vec!["index".into(), "eigenvalue".into()], rows))?;
    print!("{kv}");
    Ok(())
}

fn weight_from(kappa: Option<f64>, s: Option<f64>) -> Result<WeightSpec> {
    match (kappa, s) {
        (Some(k), Some(s)) => WeightSpec::stretched_exp(k, s),
        (None, None) => Ok(WeightSpec::InverseSqrtMaxwellian),
        _ => Err(LandauError::InvalidParameter("give both --kappa and --s, or neither".into())),
    }
}

fn dissipativity(cli: &Cli, args: &DissipativityArgs) -> Result<()> {
    let cfg = run_config(cli)?;
    let dir = out_dir(cli, &cfg)?;
    let gamma = args.gamma.unwrap_or(cfg.sim.gamma);
    let weight = weight_from(args.kappa, args.s)?;
    let cert = find_mr(args.lambda, &weight, args.p, gamma, args.radius_max)?;
    let kv = format!(
        "weight = {}\ngamma = {}\np = {}\nlambda = {}\nM = {:.12e}\nR = {}\nworst_margin = {:.12e}\nsweep_points = {}\n",
        weight.key(),
        gamma,
        args.p,
        args.lambda,
        cert.cutoff.m,
        cert.cutoff.r,
        cert.worst_margin,
        cert.sweep.len()
    );
    write_text(&dir.join("certificate.txt"), &kv)?;
    write_text(&dir.join("certificate.json"), &to_json(&cert))?;
    let rows = cert.margins().map(|(r, phi, margin)| vec![r, phi, margin]).collect();
    write_csv(
        &dir.join("sweep.csv"),
        &Table::new(vec!["r".into(), "phi".into(), "phi_minus_cutoff".into()], rows),
    )?;
    print!("{kv}");
    Ok(())
}

fn kernels_table(cli: &Cli, args: &KernelsTableArgs) -> Result<()> {
    let cfg = run_config(cli)?;
    let dir = out_dir(cli, &cfg)?;
    let gamma = cfg.sim.gamma;
    if !(args.step > 0.0) || !(args.r_max >= 0.0) {
        return Err(LandauError::InvalidParameter("need step > 0 and r_max >= 0".into()));
    }
    let weight = WeightSpec::stretched_exp(args.kappa, args.s)?;
    weight.validate(WeightContext::Linearized, gamma)?;
    let count = (args.r_max / args.step).floor() as usize;
    let mut rows = Vec::with_capacity(count + 1);
    for i in 0..=count {
        let r = i as f64 * args.step;
        let s = RadialSample::direct(r, gamma)?;
        let phi = phi_from_sample(r, &s, &weight, args.p, gamma)?;
        let phi_mu = phi_from_sample(r, &s, &WeightSpec::InverseSqrtMaxwellian, 2.0, gamma)?;
        rows.push(vec![r, s.j_gamma, s.j_gamma2, s.j_two, s.ell1, s.ell2, phi, phi_mu]);
    }
    let columns = ["r", "J_gamma", "J_gamma_plus_2", "J_2", "ell1", "ell2", "phi_m", "phi_invsqrtmu"];
    let csv = dir.join("kernels_table.csv");
    write_csv(&csv, &Table::new(columns.iter().map(|s| s.to_string()).collect(), rows))?;
    println!("wrote {}", csv.display());
    Ok(())
}

fn fit(cli: &Cli, args: &FitArgs) -> Result<()> {
    let table = read_csv(&args.csv)?;
    let x = table.columns.first().cloned().unwrap_or_default();
    let series = table.series(&x, &args.column)?;
    let window = match (args.t_a, args.t_b) {
        (None, None) => default_window(&series, args.floor)?,
        (a, b) => Window::new(
            a.unwrap_or(series.first().map_or(0.0, |p| p.0)),
            b.unwrap_or(series.last().map_or(0.0, |p| p.0)),
        )?,
    };
    let mut report: FitReport = match args.kind {
        FitKindArg::Exponential => fit_exponential(&series, window)?,
        FitKindArg::Polynomial => fit_polynomial_rate(&series, window)?,
    };
    if let Some(p) = args.prediction {
        report = report.with_prediction(p);
    }
    print!("{}", report.to_key_values());
    if cli.out.is_some() || cli.config.is_some() {
        let cfg = run_config(cli)?;
        let dir = out_dir(cli, &cfg)?;
        write_text(&dir.join("fit.json"), &to_json(&report))?;
    } else {
        print!("{}", to_json(&report));
    }
    Ok(())
}

fn plot(cli: &Cli, args: &PlotArgs) -> Result<()> {
    let style: PlotStyle = args.style.parse()?;
    let dir = match &cli.out {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| LandauError::Io { path: d.clone(), source: e })?;
            d.clone()
        }
        None => PathBuf::from("."),
    };
    let path = dir.join(&args.name);
    emit_plot(&args.csv, &args.columns, style, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("LANDAU_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| LandauError::InvalidParameter(format!("LANDAU_LAB_THREADS must be a count, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| LandauError::InvalidParameter(format!("thread pool: {e}")))
}

fn dispatch(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a),
        Command::Linear(a) => linear(cli, a),
        Command::Spectrum(a) => spectrum(cli, a),
        Command::Dissipativity(a) => dissipativity(cli, a),
        Command::KernelsTable(a) => kernels_table(cli, a),
        Command::Fit(a) => fit(cli, a),
        Command::Plot(a) => plot(cli, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let detail = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {detail}", e.tag());
            ExitCode::from(match e.class() {
                ErrorClass::Validation => 1,
                ErrorClass::Numerical => 2,
                ErrorClass::Io => 3,
            })
        }
    }
}
