//! Command-line driver for the scaled Volterra divergence pipeline.
//!
//! Subcommands: `calibrate` -> `zeros` -> `demo` build on each other through
//! JSON artifacts in the artifact directory; `solve` runs the equation solver
//! standalone; `verify` runs the full acceptance suite; `report` summarizes
//! the existing artifacts. Logs go to stderr, data to files or stdout.

use abel_volterra::artifact;
use abel_volterra::calibration::{self, CalibrationResult};
use abel_volterra::laplace::TransformAccuracy;
use abel_volterra::residue::{build_report, ReportOptions};
use abel_volterra::volterra::{solve, Forcing, KernelModel, Scheme, SolveOptions};
use abel_volterra::zeros::{build_catalog, certify_region};
use anyhow::{bail, Context as _};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "abelv", version, about = "scaled Volterra divergence pipeline")]
struct Cli {
    /// Artifact directory (env: ABELV_ARTIFACTS).
    #[arg(long, global = true, env = "ABELV_ARTIFACTS", default_value = "artifacts")]
    artifacts: PathBuf,
    /// Optional config file (TOML, one section per subcommand).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate the kernel: search the scaling base, solve the bump heights.
    Calibrate(CalibrateArgs),
    /// Certify the search region and catalog the zeros of H = 1 + K.
    Zeros(ZerosArgs),
    /// Solve f + n k*f = g on a uniform grid and write the curve as CSV.
    Solve(SolveArgs),
    /// Pick N and x0, evaluate predictions per m, attach solver values.
    Demo(DemoArgs),
    /// Run the acceptance criteria; nonzero exit on any failure.
    Verify,
    /// Summarize the existing artifacts.
    Report,
}

#[derive(Args, Debug, Clone, Default)]
struct CalibrateArgs {
    /// Fixed scaling base; omitted means automatic search from 3 upward.
    #[arg(long)]
    l: Option<u32>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Cap for the automatic scaling-base search.
    #[arg(long)]
    l_max: Option<u32>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct CalibrateConfig {
    l: Option<u32>,
    delta: Option<f64>,
    epsilon: Option<f64>,
    l_max: Option<u32>,
}

#[derive(Args, Debug, Clone, Default)]
struct ZerosArgs {
    /// Sampling step for the certification edges.
    #[arg(long)]
    omega_probe_step: Option<f64>,
    /// Optional CSV of |H| on a sigma/omega grid for plotting.
    #[arg(long)]
    grid_csv: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ZerosConfig {
    omega_probe_step: Option<f64>,
    grid_csv: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct SolveArgs {
    /// Kernel: calibrated | linear | abel:<coef>.
    #[arg(long, default_value = "calibrated")]
    kernel: String,
    /// Scale factor n (exclusive with --m).
    #[arg(long)]
    n: Option<f64>,
    /// Sets n = L^m from the calibration artifact.
    #[arg(long)]
    m: Option<u32>,
    /// Right endpoint.
    #[arg(long = "X")]
    x_end: f64,
    /// Grid step.
    #[arg(long)]
    h: f64,
    /// Forcing: one | monomial:<N>.
    #[arg(long, default_value = "one")]
    g: String,
    /// Scheme: trapezoidal | euler.
    #[arg(long, default_value = "trapezoidal")]
    scheme: String,
    /// Force log-domain arithmetic.
    #[arg(long)]
    log_domain: bool,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Default)]
struct DemoArgs {
    /// Cap for the forcing-exponent search.
    #[arg(long)]
    n_max: Option<u32>,
    /// Comma-separated list of m values.
    #[arg(long)]
    m_list: Option<String>,
    /// Override the evaluation point (default 2 pi / Im z_min).
    #[arg(long)]
    x0_override: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct DemoConfig {
    n_max: Option<u32>,
    m_list: Option<Vec<u32>>,
    x0_override: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    calibrate: Option<CalibrateConfig>,
    #[serde(default)]
    zeros: Option<ZerosConfig>,
    #[serde(default)]
    demo: Option<DemoConfig>,
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))?;
            let cfg: FileConfig = toml::from_str(&text)
                .with_context(|| format!("malformed config {}", p.display()))?;
            Ok(cfg)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let cfg = load_config(&cli.config)?;
    let dir = &cli.artifacts;
    match cli.command {
        Command::Calibrate(args) => cmd_calibrate(dir, args, cfg.calibrate.unwrap_or_default()),
        Command::Zeros(args) => cmd_zeros(dir, args, cfg.zeros.unwrap_or_default()),
        Command::Solve(args) => cmd_solve(dir, args),
        Command::Demo(args) => cmd_demo(dir, args, cfg.demo.unwrap_or_default()),
        Command::Verify => cmd_verify(),
        Command::Report => cmd_report(dir),
    }
}

fn calibration_path(dir: &Path) -> PathBuf {
    dir.join("calibration.json")
}
fn catalog_path(dir: &Path) -> PathBuf {
    dir.join("zero_catalog.json")
}
fn report_path(dir: &Path) -> PathBuf {
    dir.join("divergence_report.json")
}

fn load_calibration(dir: &Path) -> anyhow::Result<CalibrationResult> {
    let text = artifact::read_text(&calibration_path(dir), "the calibration artifact")?;
    Ok(artifact::calibration_from_json(&text)?)
}

fn cmd_calibrate(dir: &Path, args: CalibrateArgs, cfg: CalibrateConfig) -> anyhow::Result<i32> {
    let delta = args.delta.or(cfg.delta).unwrap_or(0.25);
    let epsilon = args.epsilon.or(cfg.epsilon).unwrap_or(0.05);
    let l_max = args.l_max.or(cfg.l_max).unwrap_or(400);
    if !(delta > 0.0 && delta < 1.0) {
        bail!("delta = {delta} out of range (0, 1)");
    }
    if !(epsilon > 0.0 && epsilon < 10.0) {
        bail!("epsilon = {epsilon} out of range (0, 10)");
    }
    if !(3..=100_000).contains(&l_max) {
        bail!("l_max = {l_max} out of range [3, 100000]");
    }
    let acc = TransformAccuracy::tight();
    let cal = match args.l.or(cfg.l) {
        Some(l) => calibration::calibrate(l, delta, epsilon, &acc)?,
        None => calibration::calibrate_auto(delta, epsilon, l_max, &acc)?,
    };
    eprintln!(
        "calibrated: L = {}, lambda = {}, b0 = {:.6e}, b1 = {:.6e}, |K(z0)+1| = {:.3e}, condition = {:.2}",
        cal.spec.l(),
        cal.spec.lambda(),
        cal.spec.bump_height(0),
        cal.spec.bump_height(1),
        cal.residual,
        cal.condition
    );
    let path = calibration_path(dir);
    artifact::write_text(&path, &artifact::calibration_to_json(&cal))?;
    eprintln!("wrote {}", path.display());
    Ok(0)
}

fn cmd_zeros(dir: &Path, args: ZerosArgs, cfg: ZerosConfig) -> anyhow::Result<i32> {
    let cal = load_calibration(dir)?;
    let step = args.omega_probe_step.or(cfg.omega_probe_step).unwrap_or(0.05);
    if !(step > 0.0 && step <= 1.0) {
        bail!("omega_probe_step = {step} out of range (0, 1]");
    }
    let acc = TransformAccuracy::standard();
    let region = certify_region(&cal, step, &acc)?;
    eprintln!(
        "certified region: sigma in [{}, {:.3}] (scan to {:.3}), omega_max = {}, min |H| on edges = {:.4}",
        region.sigma_lo, region.sigma_hi, region.scan_sigma_hi, region.omega_max,
        region.boundary_min_modulus
    );
    let catalog = build_catalog(&cal, &region, &acc)?;
    eprintln!(
        "catalog: {} zeros (conjugates included), R_max = {:.12}, mu_max = {}, z_min = {}",
        catalog.zeros.len(),
        catalog.r_max,
        catalog.mu_max,
        catalog.z_min
    );
    let path = catalog_path(dir);
    artifact::write_text(&path, &artifact::catalog_to_json(&cal, &catalog))?;
    eprintln!("wrote {}", path.display());
    if let Some(grid_csv) = args
        .grid_csv
        .or_else(|| cfg.grid_csv.as_ref().map(PathBuf::from))
    {
        let csv = artifact::h_grid_csv(&cal, (0.5, 3.0, 100), (0.0, 25.0, 500))?;
        artifact::write_text(&grid_csv, &csv)?;
        eprintln!("wrote {}", grid_csv.display());
    }
    Ok(0)
}

fn cmd_solve(dir: &Path, args: SolveArgs) -> anyhow::Result<i32> {
    let model = match args.kernel.as_str() {
        "linear" => KernelModel::Linear,
        "calibrated" => {
            let cal = load_calibration(dir)?;
            KernelModel::ModulatedAbel(cal.spec)
        }
        other => match other.strip_prefix("abel:") {
            Some(c) => KernelModel::ConstAbel {
                coef: c
                    .parse()
                    .with_context(|| format!("bad abel coefficient '{c}'"))?,
            },
            None => bail!("unknown kernel '{other}' (calibrated | linear | abel:<coef>)"),
        },
    };
    let n = match (args.n, args.m) {
        (Some(n), None) => n,
        (None, Some(m)) => {
            let cal = load_calibration(dir)?;
            (cal.spec.l() as f64).powi(m as i32)
        }
        (None, None) => bail!("one of --n or --m is required"),
        (Some(_), Some(_)) => bail!("--n and --m are mutually exclusive"),
    };
    let forcing = match args.g.as_str() {
        "one" => Forcing::One,
        other => match other.strip_prefix("monomial:") {
            Some(p) => Forcing::Monomial(p.parse().with_context(|| format!("bad power '{p}'"))?),
            None => bail!("unknown forcing '{other}' (one | monomial:<N>)"),
        },
    };
    let scheme = match args.scheme.as_str() {
        "trapezoidal" => Scheme::ProductTrapezoidal,
        "euler" => Scheme::ProductEuler,
        other => bail!("unknown scheme '{other}' (trapezoidal | euler)"),
    };
    let grid = solve(
        &model,
        forcing,
        &SolveOptions {
            n,
            x_end: args.x_end,
            h: args.h,
            scheme,
            log_domain: if args.log_domain { Some(true) } else { None },
        },
    )?;
    eprintln!(
        "solved {} nodes (n = {n}, kernel {})",
        grid.len(),
        grid.kernel_desc
    );
    artifact::write_text(&args.out, &artifact::curve_to_csv(&grid))?;
    eprintln!("wrote {}", args.out.display());
    Ok(0)
}

fn cmd_demo(dir: &Path, args: DemoArgs, cfg: DemoConfig) -> anyhow::Result<i32> {
    let cal = load_calibration(dir)?;
    let text = artifact::read_text(&catalog_path(dir), "the zero catalog")?;
    let catalog = artifact::catalog_from_json(&text, &cal)?;
    let m_list = match args.m_list {
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .context("bad --m-list")?,
        None => cfg.m_list.unwrap_or_else(|| (0..=6).collect()),
    };
    if m_list.is_empty() || m_list.iter().any(|&m| m > 12) {
        bail!("m list must be nonempty with entries <= 12");
    }
    let n_max = args.n_max.or(cfg.n_max).unwrap_or(64);
    if !(1..=150).contains(&n_max) {
        bail!("n_max = {n_max} out of range [1, 150]");
    }
    let opts = ReportOptions {
        n_max,
        m_list,
        x0_override: args.x0_override.or(cfg.x0_override),
        ..ReportOptions::default()
    };
    let acc = TransformAccuracy::standard();
    let report = build_report(&cal, &catalog, &opts, &acc)?;
    eprintln!(
        "demo: N = {}, cos theta_N = {:.4}, x0 = {:.9}",
        report.chosen.n_exp, report.chosen.cos_theta, report.x0
    );
    for row in &report.rows {
        eprintln!(
            "  m = {}: prediction ln = {:.6e}, lower bound ln = {:?}, solver = {}",
            row.m,
            row.prediction_ln,
            row.lower_bound_ln,
            row.solver_ln
                .map(|l| format!("ln {:.6e} (sign {})", l, row.solver_sign.unwrap_or(0)))
                .unwrap_or_else(|| row.solver_note.clone())
        );
    }
    let path = report_path(dir);
    artifact::write_text(&path, &artifact::report_to_json(&cal, &report))?;
    eprintln!("wrote {}", path.display());
    let csv_path = dir.join("divergence_table.csv");
    artifact::write_text(&csv_path, &artifact::report_to_csv(&report))?;
    eprintln!("wrote {}", csv_path.display());
    Ok(0)
}

fn cmd_verify() -> anyhow::Result<i32> {
    let results = abel_volterra::acceptance::run_all();
    let mut ok = true;
    for r in &results {
        println!("{}", r.line());
        ok &= r.passed;
    }
    Ok(if ok { 0 } else { 2 })
}

fn cmd_report(dir: &Path) -> anyhow::Result<i32> {
    let cal = load_calibration(dir)?;
    println!("kernel calibration");
    println!(
        "  L = {}, lambda = {}, delta = {}, epsilon = {}",
        cal.spec.l(),
        cal.spec.lambda(),
        cal.spec.delta(),
        cal.spec.epsilon()
    );
    println!(
        "  bump heights b0 = {:.6e}, b1 = {:.6e}; comparability {:.3} <= sqrt(x) k(x) <= {:.3}",
        cal.spec.bump_height(0),
        cal.spec.bump_height(1),
        cal.spec.lower(),
        cal.spec.upper()
    );
    println!("  |K(1+i) + 1| = {:.3e}", cal.residual);
    let cat_text = artifact::read_text(&catalog_path(dir), "the zero catalog")?;
    let catalog = artifact::catalog_from_json(&cat_text, &cal)?;
    println!("zero catalog (rectangle-certified)");
    println!(
        "  {} zeros, R_max = {:.12}, mu_max = {}, z_min = {:.9}+{:.9}i",
        catalog.zeros.len(),
        catalog.r_max,
        catalog.mu_max,
        catalog.z_min.re,
        catalog.z_min.im
    );
    let rep_path = report_path(dir);
    if rep_path.exists() {
        let text = artifact::read_text(&rep_path, "the divergence report")?;
        let v: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| abel_volterra::Error::Format(format!("bad report JSON: {e}")))?;
        println!("divergence demonstration");
        println!(
            "  forcing exponent N = {}, x0 = {}",
            v["n_exp"], v["x0"]
        );
        if let Some(rows) = v["rows"].as_array() {
            println!("  log of the predicted lower bound for f_m(x0):");
            for row in rows {
                println!(
                    "    m = {}: {} {}",
                    row["m"],
                    row["lower_bound_ln"],
                    row["solver_ln"]
                        .as_f64()
                        .map(|s| format!("(solver: ln |f| = {s:.4})"))
                        .unwrap_or_default()
                );
            }
        }
        println!("  consecutive increments grow by a factor lambda = L^2: the");
        println!("  subsequence f_(L^m)(x0) diverges although a/sqrt(x) <= k(x) <= b/sqrt(x).");
    } else {
        println!("(no divergence report yet; run `abelv demo`)");
    }
    Ok(0)
}
