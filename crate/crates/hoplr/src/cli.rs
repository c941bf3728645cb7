//! The `hoplr` command line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hoplr_core::gfpoly::{find_generator, ExpTable, PrimeBase};
use hoplr_core::pointgen::{digitalnet_points, interlace};
use hoplr_core::walsh::{KernelRoute, Smoothness};
use hoplr_core::wce::{wce_bound, wce_prefix_errors};

use crate::budget;
use crate::construct::{construct, resolve_modulus, Algorithm, ConstructParams};
use crate::fixtures;
use crate::manifest::{self, RunManifest};
use crate::matrixfile::{read_matrices, write_matrices};
use crate::parallel::kernel_values;
use crate::pointsio::{write_bin, write_csv};
use crate::reproduce;
use crate::rulefile::{rule_errors, rule_points, RuleFile, WeightsField, TIE_BREAK};
use crate::weights::parse_weights;

#[derive(Debug, Parser)]
#[command(
    name = "hoplr",
    version,
    about = "Higher-order polynomial lattice rules by fast CBC construction"
)]
pub struct Cli {
    /// Worker threads for kernel tables; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=1024))]
    pub threads: u32,
    /// Accepted for scripts; nothing here draws random numbers.
    #[arg(long, global = true)]
    pub seedless: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a rule by CBC and write it as JSON.
    Construct(ConstructArgs),
    /// Print e_1..e_s of a rule file or an interlaced matrix file.
    Wce(WceArgs),
    /// Write the points of a rule.
    Points(PointsArgs),
    /// Print omega_alpha(v_n(g^delta / p)) for every delta as CSV.
    Kernel(KernelArgs),
    /// Print the a priori bound on the CBC error for d = 1..s.
    Bound(BoundArgs),
    /// Interlace generating matrices.
    Interlace(InterlaceArgs),
    /// Compare against the published tables.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long, default_value_t = 2)]
    pub b: u32,
    #[arg(long, required_unless_present = "from_manifest")]
    pub m: Option<u32>,
    #[arg(long, required_unless_present = "from_manifest")]
    pub alpha: Option<u32>,
    #[arg(long, required_unless_present = "from_manifest")]
    pub s: Option<usize>,
    /// geom:C, polydecay or list:FILE
    #[arg(long, required_unless_present = "from_manifest")]
    pub weights: Option<String>,
    /// auto or an integer code of an irreducible polynomial of degree alpha*m
    #[arg(long, default_value = "auto")]
    pub p: String,
    #[arg(long, value_enum, default_value_t = Algorithm::Fast)]
    pub algo: Algorithm,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the run manifest (default: OUT.manifest.json).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Take every construction parameter from an earlier manifest.
    #[arg(long, conflicts_with_all = ["m", "alpha", "s", "weights", "b"])]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WceArgs {
    #[arg(long, required_unless_present = "matrices", conflicts_with = "matrices")]
    pub rule: Option<PathBuf>,
    /// A matrix file; evaluated as the net it generates.
    #[arg(long, requires_all = ["alpha", "weights"])]
    pub matrices: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<u32>,
    #[arg(long)]
    pub weights: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PointFormat {
    Csv,
    Bin,
}

#[derive(Debug, Args)]
pub struct PointsArgs {
    #[arg(long)]
    pub rule: PathBuf,
    #[arg(long, value_enum, default_value_t = PointFormat::Csv)]
    pub format: PointFormat,
    /// Write integer numerators over b^n instead of reals (CSV only).
    #[arg(long)]
    pub numerators: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Auto,
    Digits,
    Closed,
    Base2,
    Series,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 2)]
    pub b: u32,
    #[arg(long)]
    pub alpha: u32,
    #[arg(long, required_unless_present = "n", conflicts_with = "n")]
    pub m: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, default_value = "auto")]
    pub p: String,
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    pub route: RouteArg,
    /// Series truncation in digits (default n + 12).
    #[arg(long)]
    pub series_digits: Option<u32>,
    /// Only the first N exponents.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, default_value_t = 2)]
    pub b: u32,
    #[arg(long)]
    pub alpha: u32,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub m: u32,
    /// Modulus degree (default alpha * m).
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub weights: String,
}

#[derive(Debug, Args)]
pub struct InterlaceArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep only the first N rows of each interlaced matrix.
    #[arg(long)]
    pub keep_rows: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproduceMode {
    Eval,
    Cbc,
    Both,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, value_parser = ["1", "2a", "2b", "3a", "3b"])]
    pub table: String,
    #[arg(long, value_enum, default_value_t = ReproduceMode::Both)]
    pub mode: ReproduceMode,
    /// 2s square matrices of one net, for table 1.
    #[arg(long)]
    pub matrices: Option<PathBuf>,
    /// Exit with status 1 if any row fails.
    #[arg(long)]
    pub strict: bool,
}

/// Runs a parsed command line, writing reports to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    let threads = cli.threads as usize;
    match &cli.command {
        Command::Construct(a) => cmd_construct(a, threads, out).map(|_| true),
        Command::Wce(a) => cmd_wce(a, out).map(|_| true),
        Command::Points(a) => cmd_points(a, out).map(|_| true),
        Command::Kernel(a) => cmd_kernel(a, threads, out).map(|_| true),
        Command::Bound(a) => cmd_bound(a, out).map(|_| true),
        Command::Interlace(a) => cmd_interlace(a, out).map(|_| true),
        Command::Reproduce(a) => cmd_reproduce(a, threads, out),
    }
}

/// Entry point of the binary.
pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(true), Ok(())) => std::process::ExitCode::SUCCESS,
        (Ok(false), Ok(())) => std::process::ExitCode::from(1),
        (Err(e), _) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::from(2)
        }
        (_, Err(e)) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(2)
        }
    }
}

fn parse_p(text: &str) -> Result<Option<u64>> {
    if text == "auto" {
        return Ok(None);
    }
    Ok(Some(text.parse().with_context(|| {
        format!("--p must be auto or an integer, got {text:?}")
    })?))
}

fn degree(alpha: u32, m: u32) -> Result<u32> {
    alpha.checked_mul(m).context("alpha * m overflows")
}

fn params_from_args(a: &ConstructArgs) -> Result<ConstructParams> {
    let (m, alpha, s, w) = match (a.m, a.alpha, a.s, &a.weights) {
        (Some(m), Some(alpha), Some(s), Some(w)) => (m, alpha, s, w),
        _ => bail!("--m, --alpha, --s and --weights are required"),
    };
    ensure!(s >= 1, "s must be ≥ 1");
    ensure!(m >= 1, "m must be ≥ 1");
    Smoothness::new(alpha)?;
    let base = PrimeBase::new(a.b)?;
    let md = resolve_modulus(base, degree(alpha, m)?, parse_p(&a.p)?)?;
    Ok(ConstructParams {
        b: a.b,
        m,
        alpha,
        s,
        p: md.poly().code(),
        weights: WeightsField::from_sequence(&parse_weights(w)?),
        algorithm: a.algo,
        tie_break: TIE_BREAK.into(),
    })
}

fn cmd_construct(a: &ConstructArgs, threads: usize, out: &mut dyn Write) -> Result<()> {
    let params = match &a.from_manifest {
        Some(path) => {
            let mut p = RunManifest::read(path)?.params;
            if a.p != "auto" {
                bail!("--p cannot be combined with --from-manifest");
            }
            p.algorithm = a.algo;
            p
        }
        None => params_from_args(a)?,
    };
    let start = Instant::now();
    let rule = construct(&params, budget::from_env()?, threads)?;
    let elapsed = start.elapsed().as_secs_f64();
    RuleFile::from_rule(&rule).write(&a.out)?;
    let man_path = a.manifest.clone().unwrap_or_else(|| manifest::default_path(&a.out));
    RunManifest::new(params, &rule, &a.out, threads, elapsed).write(&man_path)?;
    writeln!(
        out,
        "b={} m={} alpha={} n={} p={} g={} weights {}",
        rule.base.get(),
        rule.m,
        rule.alpha,
        rule.n,
        rule.p.code(),
        rule.generator.code(),
        rule.weight_spec.describe()
    )?;
    writeln!(out, "{:>3}  {:>12}  {:>12}", "d", "q_d", "e_d")?;
    for (d, (q, e)) in rule.q.iter().zip(&rule.errors).enumerate() {
        writeln!(out, "{:>3}  {:>12}  {:>12.5e}", d + 1, q.code(), e)?;
    }
    writeln!(
        out,
        "wrote {} and {} in {elapsed:.3} s",
        a.out.display(),
        man_path.display()
    )?;
    Ok(())
}

fn print_errors(errors: &[f64], out: &mut dyn Write) -> Result<()> {
    for (d, e) in errors.iter().enumerate() {
        writeln!(out, "{} {:.5e}", d + 1, e)?;
    }
    Ok(())
}

fn cmd_wce(a: &WceArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(path) = &a.rule {
        let rule = RuleFile::read(path)?.to_rule()?;
        return print_errors(&rule_errors(&rule)?, out);
    }
    let path = a.matrices.as_ref().context("--rule or --matrices is required")?;
    let alpha = Smoothness::new(a.alpha.context("--alpha is required with --matrices")?)?;
    let weights = parse_weights(a.weights.as_deref().context("--weights is required with --matrices")?)?;
    let matrices = read_matrices(path)?;
    let points = digitalnet_points(&matrices)?;
    let w = weights.materialize(points.dim())?;
    print_errors(&wce_prefix_errors(&points, alpha, &w)?.errors, out)
}

fn with_output<F>(path: Option<&Path>, out: &mut dyn Write, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().with_context(|| format!("writing {}", p.display()))?;
            Ok(())
        }
        None => f(out),
    }
}

fn cmd_points(a: &PointsArgs, out: &mut dyn Write) -> Result<()> {
    let rule = RuleFile::read(&a.rule)?.to_rule()?;
    let points = rule_points(&rule)?;
    ensure!(
        !(a.numerators && a.format == PointFormat::Bin),
        "--numerators applies to CSV; binary output always holds numerators"
    );
    with_output(a.out.as_deref(), out, |w| match a.format {
        PointFormat::Csv => write_csv(&points, a.numerators, w),
        PointFormat::Bin => write_bin(&points, w),
    })
}

fn cmd_kernel(a: &KernelArgs, threads: usize, out: &mut dyn Write) -> Result<()> {
    let base = PrimeBase::new(a.b)?;
    let alpha = Smoothness::new(a.alpha)?;
    let n = match (a.n, a.m) {
        (Some(n), _) => n,
        (None, Some(m)) => degree(a.alpha, m)?,
        (None, None) => bail!("--n or --m is required"),
    };
    ensure!(n >= 1, "n must be ≥ 1");
    let md = resolve_modulus(base, n, parse_p(&a.p)?)?;
    let size = u128::from(md.field_size());
    let budget = budget::from_env()?;
    ensure!(
        size <= budget.fast_field,
        "kernel table of {size} entries is over the budget of {} (set HOPLR_BUDGET to raise it)",
        budget.fast_field
    );
    let route = match a.route {
        RouteArg::Auto => KernelRoute::Auto,
        RouteArg::Digits => KernelRoute::Digits,
        RouteArg::Closed => KernelRoute::Closed,
        RouteArg::Base2 => KernelRoute::Base2,
        RouteArg::Series => KernelRoute::Series {
            digits: a.series_digits.unwrap_or(n + 12),
        },
    };
    let exp = ExpTable::new(&md, find_generator(&md))?;
    let count = a.limit.unwrap_or(exp.len()).min(exp.len());
    let (values, _) = kernel_values(&md, &exp, alpha, route, threads)?;
    with_output(a.out.as_deref(), out, |w| {
        writeln!(w, "delta,v,omega")?;
        for (delta, (&pw, omega)) in exp.powers().iter().zip(&values).take(count).enumerate() {
            let v = md.v_n(hoplr_core::gfpoly::Poly::from_code(u64::from(pw)), n);
            writeln!(w, "{delta},{v},{omega}")?;
        }
        Ok(())
    })
}

fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> Result<()> {
    let base = PrimeBase::new(a.b)?;
    let alpha = Smoothness::new(a.alpha)?;
    ensure!(a.s >= 1, "s must be ≥ 1");
    let n = match a.n {
        Some(n) => n,
        None => degree(a.alpha, a.m)?,
    };
    let weights = parse_weights(&a.weights)?.materialize(a.s)?;
    for d in 1..=a.s {
        let b = wce_bound(base, alpha, a.tau, a.m, n, &weights[..d])?;
        writeln!(out, "{d} {b:.5e}")?;
    }
    Ok(())
}

fn cmd_interlace(a: &InterlaceArgs, out: &mut dyn Write) -> Result<()> {
    ensure!(a.d >= 1, "d must be ≥ 1");
    let matrices = read_matrices(&a.input)?;
    let inter = interlace(&matrices, a.d, a.keep_rows)?;
    write_matrices(&a.out, &inter)?;
    writeln!(
        out,
        "wrote {} matrices of {}x{} to {}",
        inter.len(),
        inter[0].rows(),
        inter[0].cols(),
        a.out.display()
    )?;
    Ok(())
}

fn cmd_reproduce(a: &ReproduceArgs, threads: usize, out: &mut dyn Write) -> Result<bool> {
    let budget = budget::from_env()?;
    if a.table == "1" {
        let path = a
            .matrices
            .as_ref()
            .context("table 1 needs --matrices FILE with 10 square matrices")?;
        let lines = reproduce::comparison(&read_matrices(path)?, budget, threads)?;
        write!(out, "{}", reproduce::format_comparison(&lines))?;
        return Ok(!a.strict || lines.iter().all(|l| l.cbc_wins()));
    }
    let t = fixtures::table(&a.table).context("unknown table")?;
    writeln!(out, "{}", reproduce::table_header(t))?;
    let mut ok = true;
    if matches!(a.mode, ReproduceMode::Eval | ReproduceMode::Both) {
        let rows = reproduce::eval_rows(t, &reproduce::evaluate_table(t)?)?;
        ok &= rows.iter().all(|r| r.pass);
        write!(
            out,
            "{}",
            reproduce::format_rows("published q, errors cut to the printed digits", &rows, Some(&t.q))
        )?;
    }
    if matches!(a.mode, ReproduceMode::Cbc | ReproduceMode::Both) {
        let start = Instant::now();
        let rule = reproduce::construct_table(t, budget, threads)?;
        let q: Vec<u64> = rule.q.iter().map(|q| q.code()).collect();
        let rows = reproduce::cbc_rows(t, &rule.errors)?;
        ok &= rows.iter().all(|r| r.pass);
        write!(
            out,
            "{}",
            reproduce::format_rows(
                &format!(
                    "fast CBC (g={}, {:.1} s), error at most the published one +{}",
                    rule.generator.code(),
                    start.elapsed().as_secs_f64(),
                    reproduce::CBC_SLACK
                ),
                &rows,
                Some(&q)
            )
        )?;
    }
    Ok(ok || !a.strict)
}
