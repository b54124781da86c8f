//! `polya`: batch front-end for the urn limit-law library.
//!
//! Exit codes: 0 success, 1 failed validation, 2 invalid parameters or
//! arguments, 3 I/O failure, 4 moment residual above tolerance, 5 quadrature
//! or convergence failure, 6 missing samples file.

use clap::{Args, Parser, Subcommand, ValueEnum};
use polya_core::charfun::density::{density_fourier_with, density_mixture};
use polya_core::charfun::{CharFun, DensityGrid, DensityOptions};
use polya_core::io::{self, Format};
use polya_core::moments::moment_recursion;
use polya_core::params::Composition;
use polya_core::simulate::{run_replicas_with, Completion, SampleKind};
use polya_core::stats;
use polya_core::validate::{self, ValidateOptions};
use polya_core::{validate_params, Error, UrnParams};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polya", version, about = "Limit laws of large two-colour Pólya urns")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Urn {
    #[arg(long, default_value_t = 4)]
    m: i64,
    #[arg(long = "S", default_value_t = 7)]
    s: i64,
    #[arg(long, default_value_t = 1)]
    b: i64,
    /// Initial red balls.
    #[arg(long, default_value_t = 1)]
    alpha: u64,
    /// Initial black balls.
    #[arg(long, default_value_t = 0)]
    beta: u64,
}

#[derive(Args, Clone)]
struct Output {
    /// Output file; defaults to a file named after the command in
    /// `$POLYA_OUT_DIR` (or the current directory).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, env = "POLYA_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Spacing {
    Linear,
    Log,
    SymmetricLog,
}

#[derive(Args, Clone)]
struct Grid {
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
    /// Points (per side for symmetric-log).
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, value_enum)]
    spacing: Option<Spacing>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Wdt,
    Xi,
    Wct,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompletionArg {
    None,
    Branching,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fourier,
    Mixture,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo replicas of a limit estimator.
    Simulate {
        #[command(flatten)]
        urn: Urn,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 100_000)]
        replicas: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = CompletionArg::None)]
        completion: CompletionArg,
        #[command(flatten)]
        out: Output,
    },
    /// Moments E[X^n], E[Y^n] from the exact recursion.
    Moments {
        #[command(flatten)]
        urn: Urn,
        #[arg(long, default_value_t = 40)]
        order: usize,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Tabulates F, G and F^alpha G^beta.
    Charfun {
        #[command(flatten)]
        urn: Urn,
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        out: Output,
    },
    /// Density of W^CT by Fourier inversion or as a mixture over W^DT samples.
    Density {
        #[command(flatten)]
        urn: Urn,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_enum, default_value_t = MethodArg::Fourier)]
        method: MethodArg,
        /// W^DT sample file written by `simulate --kind wdt`.
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Switch point between tabulated and asymptotic integrands.
        #[arg(long, default_value_t = 20.0)]
        truncation: f64,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Runs the cross-validation suite and writes a JSON report.
    Validate {
        #[command(flatten)]
        urn: Urn,
        /// 1e5 replicas instead of 1e6.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        replicas: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long, env = "POLYA_OUT_DIR")]
        out_dir: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

type Outcome = std::result::Result<(), Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NonBalancedOrNegativeEntry(_) | Error::NotLargeNonTriangular(_) => 2,
            Error::DomainError { .. } | Error::WrongKind { .. } | Error::EmptySide(_) => 2,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Format(_) => 3,
            Error::SingularSystem(_) | Error::ResidualExceeded { .. } => 4,
            Error::ConvergenceFailure(_)
            | Error::NewtonDivergence { .. }
            | Error::ToleranceExceeded { .. }
            | Error::TailBoundExceeded { .. } => 5,
        };
        fail(code, e.to_string())
    }
}

impl Urn {
    fn params(&self) -> Result<UrnParams, Failure> {
        let p = validate_params(self.m, self.s, self.b)?;
        p.require_large()?;
        if self.alpha + self.beta == 0 {
            return Err(fail(2, "initial composition must be nonzero"));
        }
        Ok(p)
    }

    fn init(&self) -> Composition {
        Composition::new(self.alpha, self.beta)
    }

    fn tag(&self) -> String {
        format!("{}_{}_{}", self.m, self.s, self.b)
    }
}

impl Output {
    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }

    fn path(&self, stem: &str) -> PathBuf {
        let ext = match self.format {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        };
        resolve(&self.output, &self.out_dir, &format!("{stem}.{ext}"))
    }
}

fn resolve(output: &Option<PathBuf>, dir: &Option<PathBuf>, name: &str) -> PathBuf {
    match (output, dir) {
        (Some(p), _) => p.clone(),
        (None, Some(d)) => d.join(name),
        (None, None) => PathBuf::from(name),
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| fail(3, format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| fail(3, format!("{}: {e}", path.display())))
}

impl Grid {
    fn points(&self, default: (f64, f64, usize, Spacing), exclude_zero: bool) -> Result<Vec<f64>, Failure> {
        let lo = self.min.unwrap_or(default.0);
        let hi = self.max.unwrap_or(default.1);
        let n = self.count.unwrap_or(default.2);
        let spacing = self.spacing.unwrap_or(default.3);
        if !(lo.is_finite() && hi.is_finite()) || hi < lo || n == 0 {
            return Err(fail(2, "grid needs finite min <= max and count >= 1"));
        }
        let lin = |a: f64, b: f64, k: usize| -> Vec<f64> {
            if k == 1 {
                return vec![a];
            }
            (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
        };
        let pts = match spacing {
            Spacing::Linear => lin(lo, hi, n),
            Spacing::Log | Spacing::SymmetricLog => {
                if lo <= 0.0 {
                    return Err(fail(2, "log grids need min > 0"));
                }
                let side: Vec<f64> = lin(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect();
                if matches!(spacing, Spacing::Log) {
                    side
                } else {
                    side.iter().rev().map(|x| -x).chain(side.iter().copied()).collect()
                }
            }
        };
        if exclude_zero && pts.contains(&0.0) {
            return Err(fail(2, "density grids exclude 0"));
        }
        Ok(pts)
    }
}

fn cmd_simulate(
    urn: &Urn,
    kind: KindArg,
    replicas: u64,
    steps: usize,
    seed: u64,
    completion: CompletionArg,
    out: &Output,
) -> Outcome {
    let p = urn.params()?;
    if replicas == 0 {
        return Err(fail(2, "replicas must be at least 1"));
    }
    let kind = match kind {
        KindArg::Wdt => SampleKind::Wdt,
        KindArg::Xi => SampleKind::Xi,
        KindArg::Wct => SampleKind::Wct,
    };
    let completion = match completion {
        CompletionArg::None => Completion::None,
        CompletionArg::Branching => Completion::Branching,
    };
    let set = run_replicas_with(&p, urn.init(), kind, steps, replicas, seed, completion)?;
    let path = out.path(&format!("samples_{}_{}", kind.name(), urn.tag()));
    io::write_samples(create(&path)?, &set, out.format())?;
    let s = stats::summary(&set.values);
    println!("wrote {} values to {}", s.n, path.display());
    println!("mean {:.6} stderr {:.6} variance {:.6}", s.mean, s.stderr, s.variance);
    if kind == SampleKind::Xi {
        let shape = urn.init().total() as f64 / p.s as f64;
        let ks = stats::ks_gamma(&set.values, shape);
        println!("KS vs Gamma({shape:.6}): D {:.6} p-value {:.4}", ks.statistic, ks.p_value);
    }
    Ok(())
}

fn cmd_moments(urn: &Urn, order: usize, tolerance: f64, out: &Output) -> Outcome {
    let p = urn.params()?;
    let t = moment_recursion(&p, order)?;
    let path = out.path(&format!("moments_{}", urn.tag()));
    io::write_moments(create(&path)?, &t, out.format())?;
    println!("wrote orders 0..={order} to {}", path.display());
    println!("max residual {:.3e} ({:?})", t.max_residual(), t.precision);
    if order >= 2 {
        let half = (order / 2).max(1);
        let (g1, g2) = (t.root_growth(half), t.root_growth(order));
        println!(
            "|a_n/n!|^(1/n): n={half} {g1:.6}, n={order} {g2:.6} ({})",
            if g2 > g1 { "growing: zero radius" } else { "not growing" }
        );
    }
    if t.max_residual() > tolerance {
        return Err(fail(
            4,
            format!("residual {:.3e} exceeds tolerance {tolerance:.1e}", t.max_residual()),
        ));
    }
    Ok(())
}

fn cmd_charfun(urn: &Urn, grid: &Grid, out: &Output) -> Outcome {
    let p = urn.params()?;
    let xs = grid.points((-10.0, 10.0, 201, Spacing::Linear), false)?;
    let cf = CharFun::new(&p)?;
    let table = cf.tabulate(&xs, urn.init())?;
    let path = out.path(&format!("charfun_{}", urn.tag()));
    io::write_cf(create(&path)?, &table, out.format())?;
    println!("wrote {} points to {}", xs.len(), path.display());
    Ok(())
}

fn print_density_diagnostics(d: &DensityGrid) {
    println!("integral over grid {:.6}", d.integral());
    println!("monotone on each side {}", d.monotone_each_side(1e-12));
    let emax = d.errors.iter().copied().fold(0.0, f64::max);
    println!("max error estimate {emax:.3e}");
    for (k, v) in &d.metadata {
        println!("{k} {v}");
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_density(
    urn: &Urn,
    grid: &Grid,
    method: MethodArg,
    samples: &Option<PathBuf>,
    truncation: f64,
    tolerance: f64,
    out: &Output,
) -> Outcome {
    let xs = grid.points((1e-4, 50.0, 400, Spacing::SymmetricLog), true)?;
    let d = match method {
        MethodArg::Fourier => {
            let p = urn.params()?;
            if !(truncation > 0.0) {
                return Err(fail(2, "truncation must be positive"));
            }
            let cf = CharFun::new(&p)?;
            let opts = DensityOptions {
                init: urn.init(),
                truncation,
                tol: tolerance,
            };
            density_fourier_with(&cf, &xs, opts)?
        }
        MethodArg::Mixture => {
            let path = samples
                .as_ref()
                .ok_or_else(|| fail(6, "--method mixture needs --samples"))?;
            if !path.exists() {
                return Err(fail(6, format!("samples file {} not found", path.display())));
            }
            let set = io::read_samples_file(path)?;
            set.params()?.require_large()?;
            density_mixture(&set, &xs)?
        }
    };
    let path = out.path(&format!("density_{}_{}", method_name(method), urn.tag()));
    io::write_density(create(&path)?, &d, out.format())?;
    println!("wrote {} points to {}", xs.len(), path.display());
    print_density_diagnostics(&d);
    Ok(())
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Fourier => "fourier",
        MethodArg::Mixture => "mixture",
    }
}

fn cmd_validate(
    urn: &Urn,
    quick: bool,
    replicas: Option<u64>,
    seed: Option<u64>,
    output: &Option<PathBuf>,
    out_dir: &Option<PathBuf>,
) -> Outcome {
    let p = urn.params()?;
    let mut opts = if quick {
        ValidateOptions::quick()
    } else {
        ValidateOptions::full()
    };
    if let Some(r) = replicas {
        opts.replicas = r.max(1);
    }
    if let Some(s) = seed {
        opts.seed = s;
    }
    let report = validate::run(&p, opts)?;
    for line in report.lines() {
        println!("{line}");
    }
    println!("C0 series {:.16e}, from I1 {:.16e}", report.c0_pair.0, report.c0_pair.1);
    let path = resolve(output, out_dir, &format!("validate_{}.json", urn.tag()));
    serde_json::to_writer_pretty(create(&path)?, &report).map_err(|e| fail(3, e.to_string()))?;
    println!("report written to {}", path.display());
    if report.all_pass {
        Ok(())
    } else {
        Err(fail(1, "validation failed"))
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| fail(2, e.to_string()))?;
    }
    match &cli.command {
        Command::Simulate {
            urn,
            kind,
            replicas,
            steps,
            seed,
            completion,
            out,
        } => cmd_simulate(urn, *kind, *replicas, *steps, *seed, *completion, out),
        Command::Moments {
            urn,
            order,
            tolerance,
            out,
        } => cmd_moments(urn, *order, *tolerance, out),
        Command::Charfun { urn, grid, out } => cmd_charfun(urn, grid, out),
        Command::Density {
            urn,
            grid,
            method,
            samples,
            truncation,
            tolerance,
            out,
        } => cmd_density(urn, grid, *method, samples, *truncation, *tolerance, out),
        Command::Validate {
            urn,
            quick,
            replicas,
            seed,
            output,
            out_dir,
        } => cmd_validate(urn, *quick, *replicas, *seed, output, out_dir),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
