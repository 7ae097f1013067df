use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fracbern::kernel::eval_radial_numeric;
use fracbern::periodic::{default_c3_grids, estimate_c3};
use fracbern::positivity::{find_eps_star, CertificateGrids};
use fracbern::FractionalParams;
use fracbern_cli::report::{Provenance, Row};
use fracbern_cli::{run_plan_with_workers, workers_from_env, Format, ReportTable, SweepPlan};

#[derive(Parser)]
#[command(name = "fracbern", version, about = "Fractional heat kernels and Bernstein-type constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parameter sweeps over the estimators.
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Whole-space kernel evaluation.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Positivity threshold of the perturbed kernel.
    #[command(subcommand)]
    Positivity(PositivityCmd),
    /// Periodic kernel lower bounds.
    #[command(subcommand)]
    Periodic(PeriodicCmd),
    /// Report file utilities.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Run every sweep of a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output_path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

#[derive(Subcommand)]
enum KernelCmd {
    /// Evaluate p(t, r) by radial quadrature.
    Eval {
        #[command(flatten)]
        exponent: ExponentArgs,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum PositivityCmd {
    /// Largest certified perturbation size.
    FindEps {
        #[command(flatten)]
        exponent: ExponentArgs,
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum PeriodicCmd {
    /// Estimate inf k^per(t,x)/t over the default probe grid.
    C3 {
        #[command(flatten)]
        exponent: ExponentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Re-encode a report as CSV or JSON.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

#[derive(Args)]
struct ExponentArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
}

#[derive(Args)]
struct OutputArgs {
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

enum Failure {
    Validation(String),
    Partial(usize),
}

fn resolve_format(explicit: Option<FormatArg>, path: Option<&Path>, fallback: Format) -> Format {
    explicit.map(Format::from).or_else(|| path.and_then(Format::from_path)).unwrap_or(fallback)
}

fn write_table(table: &ReportTable, out: Option<&Path>, format: Format) -> Result<(), Failure> {
    match out {
        Some(path) => fracbern_cli::emit_report(table, path, format).map_err(|e| Failure::Validation(e.to_string())),
        None => std::io::stdout()
            .write_all(table.render(format).as_bytes())
            .map_err(|e| Failure::Validation(format!("stdout: {e}"))),
    }
}

fn single_row(task: &str, params: &FractionalParams, t: Option<f64>, quantity: &str, value: f64) -> Row {
    Row {
        task: task.into(),
        alpha: params.alpha,
        dim: params.dim,
        q: None,
        n_scale: None,
        t,
        quantity: quantity.into(),
        value,
        error_bound: None,
        witness: String::new(),
        seed: None,
    }
}

fn params(e: &ExponentArgs, t: f64) -> Result<FractionalParams, Failure> {
    FractionalParams::new(e.alpha, e.dim, t).map_err(|e| Failure::Validation(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let compute = |e: fracbern::Error| Failure::Partial(1).with_message(e.to_string());
    match cli.command {
        Command::Sweep(SweepCmd::Run { config, out, format }) => {
            let plan = SweepPlan::load(&config).map_err(|e| Failure::Validation(e.to_string()))?;
            let workers = workers_from_env().map_err(Failure::Validation)?;
            let table = run_plan_with_workers(&plan, workers).map_err(|e| Failure::Validation(e.to_string()))?;
            let first = &plan.sweeps()[0];
            let out = out.or_else(|| first.output_path.clone());
            let format = resolve_format(format, out.as_deref(), first.format);
            write_table(&table, out.as_deref(), format)?;
            match table.error_rows() {
                0 => Ok(()),
                n => Err(Failure::Partial(n)),
            }
        }
        Command::Kernel(KernelCmd::Eval { exponent, t, r, tol, output }) => {
            let p = params(&exponent, t)?;
            let v = eval_radial_numeric(&p, r, tol).map_err(compute)?;
            let mut table = ReportTable::new(Provenance::current(None, None));
            table.rows.push(Row {
                error_bound: Some(v.abs_err),
                witness: format!("r={r:e}"),
                ..single_row("kernel_eval", &p, Some(t), "p", v.value)
            });
            write_table(&table, output.out.as_deref(), resolve_format(output.format, output.out.as_deref(), Format::Csv))
        }
        Command::Positivity(PositivityCmd::FindEps { exponent, rel_tol, output }) => {
            let p = params(&exponent, 1.0)?;
            let grids = CertificateGrids { rel_tol, ..CertificateGrids::default() };
            let (eps, cert) = find_eps_star(&p, &grids).map_err(compute)?;
            let mut table = ReportTable::new(Provenance::current(None, None));
            table.rows.push(Row {
                witness: format!("certified={}", cert.is_positive()),
                ..single_row("eps_star", &p, None, "eps_star", eps)
            });
            table.rows.push(single_row("eps_star", &p, None, "certified_margin", cert.min_margin));
            table.rows.push(single_row("eps_star", &p, None, "relative_margin", cert.min_relative_margin));
            table.rows.push(single_row("eps_star", &p, None, "small_time_margin", cert.small_time_margin));
            write_table(&table, output.out.as_deref(), resolve_format(output.format, output.out.as_deref(), Format::Csv))
        }
        Command::Periodic(PeriodicCmd::C3 { exponent, output }) => {
            let p = params(&exponent, 1.0)?;
            let (t_grid, x_grid) = default_c3_grids();
            let rep = estimate_c3(&p, &t_grid, &x_grid).map_err(compute)?;
            let witness = format!("t={:e};x={:?}", rep.argmin_t, rep.argmin_x);
            let mut table = ReportTable::new(Provenance::current(None, None));
            table.rows.push(Row { witness: witness.clone(), ..single_row("periodic_c3", &p, None, "c3_hat", rep.c3_hat) });
            table.rows.push(Row { witness, ..single_row("periodic_c3", &p, None, "c3_certified", rep.c3_certified) });
            write_table(&table, output.out.as_deref(), resolve_format(output.format, output.out.as_deref(), Format::Csv))
        }
        Command::Report(ReportCmd::Convert { input, out, format }) => {
            let table = ReportTable::read(&input).map_err(|e| Failure::Validation(e.to_string()))?;
            let format = resolve_format(format, Some(&out), Format::Csv);
            write_table(&table, Some(&out), format)
        }
    }
}

impl Failure {
    fn with_message(self, msg: String) -> Self {
        eprintln!("error: {msg}");
        self
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Partial(n)) => {
            eprintln!("{n} cell(s) failed; see the error rows of the report");
            ExitCode::from(2)
        }
    }
}
