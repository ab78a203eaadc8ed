//! Argument parsing and command dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use progcens::experiments::{
    consistency_study, critical_value_table, power_grid, run_test, CriticalValueCache, MonteCarloConfig,
    DEFAULT_ALPHA, DEFAULT_REPS, DEFAULT_SEED,
};
use progcens::StatisticKind;

use crate::data::DataFile;
use crate::error::{CliError, CliResult};
use crate::output::{f4, Table};
use crate::report::{ReportDocument, RunConfig};
use crate::reproduce::{reproduce, ReproduceOptions, Verdict};
use crate::select::{parse_alternatives, parse_m_list, parse_schemes};

pub const CACHE_ENV: &str = "PROGCENS_CACHE_DIR";
pub const WORKERS_ENV: &str = "PROGCENS_WORKERS";

/// Exit code of `test` when any statistic rejects normality.
pub const EXIT_REJECT: i32 = 2;
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "progcens",
    version,
    about = "Normality tests for progressively Type-II censored samples"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a data file for normality with Monte Carlo calibrated statistics.
    Test(TestArgs),
    /// Simulate upper-alpha critical values.
    CriticalValues(CriticalArgs),
    /// Estimate power against alternative distributions.
    Power(PowerArgs),
    /// Mean of H over growing samples of a scheme family.
    Consistency(ConsistencyArgs),
    /// Regenerate a published table and compare it cell by cell.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Significance level.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = DEFAULT_REPS)]
    pub reps: usize,
    /// Master seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, env = WORKERS_ENV, default_value_t = 0)]
    pub workers: usize,
}

impl McArgs {
    pub fn config(&self) -> MonteCarloConfig {
        MonteCarloConfig {
            reps: self.reps,
            seed: self.seed,
            alpha: self.alpha,
            workers: self.workers,
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// CSV file with header "x,r" (or "x" together with --scheme).
    #[arg(long)]
    pub data: PathBuf,
    /// Total number of units on test.
    #[arg(long)]
    pub n: usize,
    /// Removals r1,...,rm; overrides the file's r column.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Statistics to compute, comma separated, or "all".
    #[arg(long, default_value = "all")]
    pub stat: String,
    /// Sort rows by x instead of rejecting unsorted input.
    #[arg(long)]
    pub sort: bool,
    #[command(flatten)]
    pub mc: McArgs,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print results as CSV or JSON instead of a table.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// "table6", catalog labels such as "[1],[15]", or "n:r1,...,rm".
    #[arg(long, default_value = "table6")]
    pub schemes: String,
    #[arg(long, default_value = "H")]
    pub stat: String,
    #[command(flatten)]
    pub mc: McArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long, default_value = "table6")]
    pub schemes: String,
    /// Alternatives, e.g. "t3,t4,logistic,laplace" or "laplace:0:2".
    #[arg(long, default_value = "t3,t4,logistic,laplace")]
    pub alt: String,
    #[arg(long, default_value = "H")]
    pub stat: String,
    #[command(flatten)]
    pub mc: McArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    /// Scheme family 1 to 5.
    #[arg(long)]
    pub family: u32,
    /// Comma-separated numbers of observed failures.
    #[arg(long)]
    pub m: String,
    #[arg(long, default_value = "normal,t3,t4,laplace,logistic")]
    pub alt: String,
    #[command(flatten)]
    pub mc: McArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Table id: 1, 2, 3, 4, 5, 7, 8 or 10.
    pub id: u32,
    /// Restrict tables 7 and 8 to these catalog schemes.
    #[arg(long)]
    pub schemes: Option<String>,
    /// Restrict tables 1 to 5 to rows with m at most this value.
    #[arg(long)]
    pub max_m: Option<usize>,
    #[command(flatten)]
    pub mc: McArgs,
    /// Output directory for table<id>.csv and table<id>_check.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Cache directory: `$PROGCENS_CACHE_DIR`, else `$XDG_CACHE_HOME/progcens`,
/// else `$HOME/.cache/progcens`.
pub fn cache_dir() -> Option<PathBuf> {
    let var = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
    var(CACHE_ENV)
        .or_else(|| var("XDG_CACHE_HOME").map(|d| d.join("progcens")))
        .or_else(|| var("HOME").map(|d| d.join(".cache").join("progcens")))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn emit(text: &str, out_path: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    match out_path {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

fn render<T: serde::Serialize>(table: &Table, json: &T, format: Format) -> CliResult<String> {
    Ok(match format {
        Format::Csv => table.to_csv()?,
        Format::Json => serde_json::to_string_pretty(json)? + "\n",
    })
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_ERROR;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let recorded: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli, recorded, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: Cli, recorded: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    match cli.command {
        Command::Test(a) => cmd_test(a, recorded, out),
        Command::CriticalValues(a) => cmd_critical_values(a, out, err),
        Command::Power(a) => cmd_power(a, out),
        Command::Consistency(a) => cmd_consistency(a, out),
        Command::Reproduce(a) => cmd_reproduce(a, out, err),
    }
}

pub fn cmd_test(a: TestArgs, recorded: Vec<String>, out: &mut dyn Write) -> CliResult<i32> {
    let kinds = StatisticKind::parse_list(&a.stat)?;
    let config = a.mc.config();
    let sample = DataFile::read(&a.data, a.sort)?.into_sample(a.n, a.scheme.as_deref())?;
    let reports = run_test(&sample, &kinds, &config)?;
    let doc = ReportDocument::new(
        recorded,
        RunConfig {
            seed: config.seed,
            reps: config.reps,
            alpha: config.alpha,
        },
        sample.scheme().clone(),
        &reports,
    );
    let json = doc.to_json()?;
    if let Some(path) = &a.out {
        write_file(path, &json)?;
    }
    let mut table = Table::new([
        "statistic",
        "observed",
        "lower_critical_value",
        "critical_value",
        "p_value",
        "reject",
    ]);
    for r in &doc.results {
        table.push(vec![
            r.statistic.name(),
            f4(r.observed),
            r.lower_critical_value.map(f4).unwrap_or_default(),
            f4(r.critical_value),
            f4(r.p_value),
            r.reject.to_string(),
        ]);
    }
    let text = match a.format {
        Some(Format::Csv) => table.to_csv()?,
        Some(Format::Json) => json,
        None => {
            let fit = &doc.fit;
            format!(
                "scheme   {}\nfit      mu = {:.4}  sigma = {:.4}  loglik = {:.4}{}\nalpha    {}  reps {}  seed {}\n\n{}",
                doc.scheme,
                fit.mu_hat,
                fit.sigma_hat,
                fit.loglik,
                if fit.converged { "" } else { "  (not converged)" },
                config.alpha,
                config.reps,
                config.seed,
                table.to_text()
            )
        }
    };
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(if doc.any_rejected { EXIT_REJECT } else { 0 })
}

pub fn cmd_critical_values(a: CriticalArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let schemes = parse_schemes(&a.schemes)?;
    let kinds = StatisticKind::parse_list(&a.stat)?;
    let config = a.mc.config();
    let cache = cache_dir().map(CriticalValueCache::new);
    let rows = critical_value_table(&schemes, &kinds, &config, cache.as_ref())?;
    let mut table = Table::new([
        "scheme",
        "n",
        "m",
        "statistic",
        "alpha",
        "lower_critical_value",
        "critical_value",
    ]);
    for r in &rows {
        if r.clamped {
            writeln!(
                err,
                "warning: scheme {} statistic {}: alpha = {} with {} replicates puts the critical value at an extreme order statistic",
                r.label, r.statistic, r.alpha, r.reps
            )
            .map_err(io_err)?;
        }
        table.push(vec![
            r.label.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.statistic.name(),
            r.alpha.to_string(),
            r.lower_critical_value.map(f4).unwrap_or_default(),
            f4(r.critical_value),
        ]);
    }
    emit(&render(&table, &rows, a.format)?, a.out.as_deref(), out)?;
    Ok(0)
}

pub fn cmd_power(a: PowerArgs, out: &mut dyn Write) -> CliResult<i32> {
    let schemes = parse_schemes(&a.schemes)?;
    let alts = parse_alternatives(&a.alt)?;
    let kinds = StatisticKind::parse_list(&a.stat)?;
    let config = a.mc.config();
    let mut cells = Vec::new();
    for ls in &schemes {
        cells.extend(power_grid(ls, &kinds, &alts, &config)?);
    }
    let mut table = Table::new([
        "scheme",
        "alternative",
        "statistic",
        "power",
        "std_error",
        "lower_critical_value",
        "critical_value",
    ]);
    for c in &cells {
        table.push(vec![
            c.scheme_label.clone(),
            c.alternative.clone(),
            c.statistic.name(),
            f4(c.estimate),
            f4(c.std_error),
            c.lower_critical_value.map(f4).unwrap_or_default(),
            f4(c.critical_value),
        ]);
    }
    emit(&render(&table, &cells, a.format)?, a.out.as_deref(), out)?;
    Ok(0)
}

pub fn cmd_consistency(a: ConsistencyArgs, out: &mut dyn Write) -> CliResult<i32> {
    let ms = parse_m_list(&a.m)?;
    let alts = parse_alternatives(&a.alt)?;
    let config = a.mc.config();
    let cells = consistency_study(a.family, &ms, &alts, &config)?;
    let mut header = vec!["n".to_string(), "m".to_string()];
    header.extend(alts.iter().map(|d| d.name()));
    let mut table = Table::new(header);
    for chunk in cells.chunks(alts.len()) {
        let mut row = vec![chunk[0].n.to_string(), chunk[0].m.to_string()];
        row.extend(chunk.iter().map(|c| f4(c.estimate)));
        table.push(row);
    }
    emit(&render(&table, &cells, a.format)?, a.out.as_deref(), out)?;
    Ok(0)
}

pub fn cmd_reproduce(a: ReproduceArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let opts = ReproduceOptions {
        config: a.mc.config(),
        schemes: a.schemes,
        max_m: a.max_m,
        cache: cache_dir().map(CriticalValueCache::new),
    };
    let rep = reproduce(a.id, &opts)?;
    let table_path = a.out.join(format!("table{}.csv", rep.id));
    let check_path = a.out.join(format!("table{}_check.csv", rep.id));
    write_file(&table_path, &rep.table.to_csv()?)?;
    write_file(&check_path, &rep.checks_table().to_csv()?)?;
    for c in rep.checks.iter().filter(|c| c.verdict != Verdict::Pass) {
        writeln!(
            err,
            "{}: {} computed {} reference {} tolerance {}{}",
            c.verdict.as_str(),
            c.cell,
            f4(c.computed),
            c.reference,
            f4(c.tolerance),
            if c.note.is_empty() {
                String::new()
            } else {
                format!(" ({})", c.note)
            }
        )
        .map_err(io_err)?;
    }
    writeln!(
        out,
        "{}\nwrote {} and {}",
        rep.summary(),
        table_path.display(),
        check_path.display()
    )
    .map_err(io_err)?;
    Ok(0)
}
