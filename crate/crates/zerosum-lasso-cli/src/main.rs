//! `zsl`: batch interface to the zero-sum constrained lasso solver.
//!
//! Subcommands: `gen` (synthetic dataset bundle), `solve` (one problem),
//! `path` (a decreasing lambda grid, optionally warm-started), `check`
//! (independent optimality audit of a saved solution), `bench` (desk-scale
//! timing table).
//!
//! Exit codes: 0 success (and, for `check`, a passed audit), 1 data or
//! validation failure (machine-readable JSON line on stderr), 2 usage
//! error.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use report::{SolveReport, TransformFlags};
use zerosum_lasso::data::{
    gen_synthetic, load_dataset, write_bundle, CoefMode, Dataset, SyntheticSpec,
};
use zerosum_lasso::optimality::{eta_bounds, full_gradient, kkt_check, lambda_max, multiplier};
use zerosum_lasso::path::{lambda_grid, path_report, solve_path, write_report_csv, write_report_json};
use zerosum_lasso::{solve, DenseMatrix, Problem, SolverConfig};

#[derive(Parser)]
#[command(
    name = "zsl",
    version,
    about = "l1-regularized least squares under the zero-sum constraint"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic compositional dataset bundle (X.csv, y.csv, meta.json)
    Gen(GenArgs),
    /// Solve one problem instance and write result.json
    Solve(SolveArgs),
    /// Solve along a decreasing lambda grid, warm- or cold-started
    Path(PathArgs),
    /// Audit a saved solution against the optimality conditions
    Check(CheckArgs),
    /// Timing table over synthetic instances
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Coefficient pattern: `paper6` (six fixed coefficients) or `frac=F`
    /// (random support of round(F*n) variables)
    #[arg(long, default_value = "paper6")]
    coef: String,
    /// Uniform range for `frac=` coefficients
    #[arg(long, default_value_t = -1.0)]
    coef_low: f64,
    #[arg(long, default_value_t = 1.0)]
    coef_high: f64,
    #[arg(long, default_value_t = 0.5)]
    noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the bundle
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    /// Design (or compositional) matrix CSV
    #[arg(long)]
    x: PathBuf,
    /// Response CSV; omit to take the last column of --x
    #[arg(long)]
    y: Option<PathBuf>,
    /// Apply the entrywise log transform (compositional input)
    #[arg(long)]
    log_transform: bool,
    /// Center columns and response to mean zero
    #[arg(long)]
    center: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Absolute regularization weight
    #[arg(long, conflicts_with = "lambda_frac", required_unless_present = "lambda_frac")]
    lambda: Option<f64>,
    /// Weight as a fraction of lambda_max
    #[arg(long)]
    lambda_frac: Option<f64>,
    /// Relative optimality tolerance
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_outer: usize,
    #[arg(long, default_value = "result.json")]
    out: PathBuf,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 10)]
    grid_count: usize,
    #[arg(long, default_value_t = 0.95)]
    hi_frac: f64,
    #[arg(long, default_value_t = 1e-3)]
    lo_frac: f64,
    /// Warm-start each grid point at the previous solution (default)
    #[arg(long, conflicts_with = "cold")]
    warm: bool,
    /// Cold-start every grid point
    #[arg(long)]
    cold: bool,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV report path
    #[arg(long, default_value = "report.csv")]
    out: PathBuf,
    /// Optional JSON report path
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    data: DataArgs,
    /// result.json produced by `solve`
    #[arg(long)]
    solution: PathBuf,
    /// Regularization weight; defaults to the one recorded in the solution
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark suite (only `synthetic`)
    #[arg(long, default_value = "synthetic")]
    suite: String,
    /// Size grammar `m=200:n=200,400,1000`
    #[arg(long, default_value = "m=200:n=200,400,1000")]
    sizes: String,
    /// Number of seeded instances per size
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Coefficient pattern (as in `gen`)
    #[arg(long, default_value = "paper6")]
    coef: String,
    #[arg(long, default_value_t = 0.5)]
    noise_sd: f64,
    /// Lambda grid points per instance
    #[arg(long, default_value_t = 5)]
    grid_count: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Base seed; instance seeds derive from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "table.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Path(args) => cmd_path(args),
        Command::Check(args) => cmd_check(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            // Machine-readable error line for scripting callers.
            eprintln!(
                "{}",
                serde_json::json!({ "error": format!("{err:#}") })
            );
            ExitCode::from(1)
        }
    }
}

// Negated comparisons so NaN flag values are rejected too.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn parse_coef(token: &str, low: f64, high: f64) -> Result<CoefMode> {
    if token == "paper6" {
        return Ok(CoefMode::SixFixed);
    }
    if let Some(frac) = token.strip_prefix("frac=") {
        let fraction: f64 = frac
            .parse()
            .map_err(|_| anyhow!("invalid fraction in --coef {token:?}"))?;
        if !(fraction > 0.0 && fraction <= 1.0) {
            bail!("--coef fraction must be in (0, 1], got {fraction}");
        }
        if !(low < high) {
            bail!("--coef-low must be below --coef-high");
        }
        return Ok(CoefMode::RandomFraction {
            fraction,
            low,
            high,
        });
    }
    bail!("--coef must be `paper6` or `frac=F`, got {token:?}")
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let coef_mode = parse_coef(&args.coef, args.coef_low, args.coef_high)?;
    if !(args.noise_sd > 0.0) {
        bail!("--noise-sd must be positive");
    }
    let spec = SyntheticSpec {
        m: args.m,
        n: args.n,
        coef_mode,
        noise_sd: args.noise_sd,
        seed: args.seed,
    };
    let (dataset, x_true) = gen_synthetic::<f64>(&spec)?;
    write_bundle(&args.out, &dataset, &x_true, &spec)?;
    println!(
        "wrote {} ({} x {}, seed {})",
        args.out.display(),
        spec.m,
        spec.n,
        spec.seed
    );
    Ok(ExitCode::SUCCESS)
}

/// Loads, transforms, and reports which transforms ran.
fn prepare(data: &DataArgs) -> Result<(Dataset<f64>, TransformFlags)> {
    let mut dataset = load_dataset::<f64>(&data.x, data.y.as_deref())?;
    if data.log_transform {
        dataset = dataset.log_transform()?;
    }
    if data.center {
        dataset = dataset.center();
    }
    Ok((
        dataset,
        TransformFlags {
            log: data.log_transform,
            center: data.center,
        },
    ))
}

fn resolve_lambda(
    lambda: Option<f64>,
    lambda_frac: Option<f64>,
    a: &DenseMatrix<f64>,
    y: &[f64],
) -> Result<f64> {
    match (lambda, lambda_frac) {
        (Some(l), None) => Ok(l),
        (None, Some(frac)) => {
            if frac < 0.0 {
                bail!("--lambda-frac must be nonnegative");
            }
            Ok(frac * lambda_max(a, y))
        }
        _ => bail!("exactly one of --lambda / --lambda-frac is required"),
    }
}

fn write_text(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let (dataset, transform) = prepare(&args.data)?;
    let lambda = resolve_lambda(args.lambda, args.lambda_frac, &dataset.x, &dataset.y)?;
    let (m, n) = (dataset.n_samples(), dataset.n_features());
    let problem = Problem::new(dataset.x, dataset.y, lambda)?;
    let config = SolverConfig {
        eps_opt: args.eps,
        seed: args.seed,
        max_outer_iters: args.max_outer,
        ..SolverConfig::default()
    };
    let result = solve(&problem, &config)?;
    let report = SolveReport::from_result(&result, m, n, lambda, args.eps, args.seed, transform);
    let json = serde_json::to_string_pretty(&report)?;
    write_text(&args.out, json.as_bytes())?;
    println!(
        "lambda={} objective={} gap={} nnz={} status={}",
        lambda, report.objective, report.gap, report.nnz, report.status
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_path(args: PathArgs) -> Result<ExitCode> {
    let (dataset, _) = prepare(&args.data)?;
    let lmax = lambda_max(&dataset.x, &dataset.y);
    let grid = lambda_grid(lmax, args.grid_count, args.hi_frac, args.lo_frac)?;
    let config = SolverConfig {
        eps_opt: args.eps,
        seed: args.seed,
        ..SolverConfig::default()
    };
    let warm = !args.cold;
    let results = solve_path(&dataset.x, &dataset.y, &grid, &config, warm)?;
    let points = path_report(&grid, &results);

    let mut csv = Vec::new();
    write_report_csv(&mut csv, &points)?;
    write_text(&args.out, &csv)?;
    if let Some(json_path) = &args.out_json {
        let mut js = Vec::new();
        write_report_json(&mut js, &points)?;
        write_text(json_path, &js)?;
    }
    let total_inner: usize = points.iter().map(|p| p.ac2cd_inner_steps).sum();
    println!(
        "{} grid points ({}), lambda_max={}, cumulative inner steps={}",
        points.len(),
        if warm { "warm" } else { "cold" },
        lmax,
        total_inner
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode> {
    let (dataset, _) = prepare(&args.data)?;
    let text = fs::read_to_string(&args.solution)
        .with_context(|| format!("reading {}", args.solution.display()))?;
    let saved: SolveReport = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.solution.display()))?;
    let n = dataset.n_features();
    if saved.n != n {
        bail!("solution was computed for n={}, data has n={n}", saved.n);
    }
    let lambda = args.lambda.unwrap_or(saved.lambda);
    let x = saved.dense_x(n);

    // Everything below is recomputed from scratch; the solver-reported gap
    // in the file is deliberately ignored.
    let problem = Problem::new(dataset.x, dataset.y, lambda)?;
    let r = problem.residual(&x);
    let grad = full_gradient(&problem, &r);
    let bounds = eta_bounds(&x, &grad, lambda);
    let mu = if x.iter().any(|&v| v != 0.0) {
        multiplier(&x, &grad, lambda, 1.0)?
    } else {
        0.5 * (bounds.eta_min + bounds.eta_max)
    };
    let kkt = kkt_check(&x, &grad, lambda, mu);
    let scale = bounds.scale();
    let pass = bounds.gap <= args.eps * scale;
    println!(
        "eta_min={} eta_max={} gap={} scale={} mu={} kkt_max_violation={} pass={}",
        bounds.eta_min, bounds.eta_max, bounds.gap, scale, kkt.mu, kkt.max_violation, pass
    );
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// `m=200:n=200,400,1000` -> (200, [200, 400, 1000])
fn parse_sizes(token: &str) -> Result<(usize, Vec<usize>)> {
    let (m_part, n_part) = token
        .split_once(':')
        .ok_or_else(|| anyhow!("--sizes must look like m=200:n=200,400,1000"))?;
    let m = m_part
        .strip_prefix("m=")
        .ok_or_else(|| anyhow!("--sizes must start with m="))?
        .parse::<usize>()
        .map_err(|_| anyhow!("invalid m in --sizes"))?;
    let ns = n_part
        .strip_prefix("n=")
        .ok_or_else(|| anyhow!("--sizes needs an n= part"))?
        .split(',')
        .map(|s| s.parse::<usize>().map_err(|_| anyhow!("invalid n {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    if ns.is_empty() {
        bail!("--sizes needs at least one n");
    }
    Ok((m, ns))
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    if args.suite != "synthetic" {
        bail!("unknown suite {:?}, only `synthetic` exists", args.suite);
    }
    let (m, ns) = parse_sizes(&args.sizes)?;
    let coef_mode = parse_coef(&args.coef, -1.0, 1.0)?;

    let mut out = String::from(
        "m,n,coef,seed,lambda_index,lambda,objective,gap,nnz,outer_iters,mvp_iters,ac2cd_inner_steps,time_s\n",
    );
    for &n in &ns {
        for instance in 0..args.seeds {
            let seed = args.seed.wrapping_add(instance);
            let spec = SyntheticSpec {
                m,
                n,
                coef_mode: coef_mode.clone(),
                noise_sd: args.noise_sd,
                seed,
            };
            let (dataset, _) = gen_synthetic::<f64>(&spec)?;
            let dataset = dataset.log_transform()?;
            let lmax = lambda_max(&dataset.x, &dataset.y);
            let grid = lambda_grid(lmax, args.grid_count, 0.95, 1e-3)?;
            let config = SolverConfig {
                eps_opt: args.eps,
                seed,
                ..SolverConfig::default()
            };
            for (k, &lambda) in grid.values.iter().enumerate() {
                let problem = Problem::new(dataset.x.clone(), dataset.y.clone(), lambda)?;
                let t0 = Instant::now();
                let result = solve(&problem, &config)?;
                let dt = t0.elapsed().as_secs_f64();
                out.push_str(&format!(
                    "{m},{n},{},{seed},{},{lambda},{},{},{},{},{},{},{dt:.6}\n",
                    args.coef,
                    k + 1,
                    result.objective,
                    result.gap,
                    result.nnz(),
                    result.outer_iters,
                    result.mvp_iters,
                    result.ac2cd_inner_steps,
                ));
            }
        }
    }
    write_text(&args.out, out.as_bytes())?;
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}
