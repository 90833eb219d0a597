use clap::{Args, Parser, Subcommand, ValueEnum};
use pepsbound::cli::{self, BoundaryArgs, FactorizeArgs, Gibbs1dArgs, MartingaleArgs, MpsArgs, SplitSpec};
use pepsbound::io::{RunReport, SeriesRow};
use pepsbound::{Error, Result};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Boundary states, parent Hamiltonians and Gibbs-form certificates for PEPS and MPS.
///
/// Exit codes: 0 all asserted checks pass, 1 a check failed, 2 input error,
/// 3 resource cap exceeded. `PEPSBOUND_DENSE_CAP` overrides the dense cap.
#[derive(Parser)]
#[command(name = "pepsbound", version)]
struct Cli {
    /// Worker threads for dense linear algebra (1 = sequential).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary state, spectrum, boundary Hamiltonian and locality profile of a region.
    Boundary {
        /// Fixture file or built-in name.
        fixture: String,
        /// `row,col,height,width`; defaults to the whole lattice.
        #[arg(long)]
        region: Option<String>,
        /// Chain length for MPS fixtures.
        #[arg(long)]
        length: Option<usize>,
        #[arg(long, value_enum, default_value_t = Topo::Cycle)]
        topology: Topo,
    },
    /// Martingale norms `‖P_AB P_BC − P_ABC‖`, optionally as a series in `ℓ_B`.
    Martingale {
        fixture: String,
        #[command(flatten)]
        split: SplitFlags,
        #[arg(long, value_enum, default_value_t = Meth::Auto)]
        method: Meth,
        #[command(flatten)]
        series: SeriesFlags,
    },
    /// Factorization certificate, ε values and the 8ε verdict.
    Factorize {
        fixture: String,
        #[command(flatten)]
        split: SplitFlags,
        #[arg(long, value_enum, default_value_t = Source::Gibbs)]
        source: Source,
        #[arg(long, value_enum, default_value_t = ModeFlag::Mpo)]
        mode: ModeFlag,
        #[command(flatten)]
        series: SeriesFlags,
    },
    /// Canonical gauge, γ and the convergence of the boundary state of an MPS.
    Mps {
        fixture: String,
        /// Comma-separated lengths `m`.
        #[arg(long, default_value = "2,3,4,5,6,7,8,9,10")]
        lengths: String,
        /// Fail unless the fitted ratio is within 5% of γ and the constant within ±20%.
        #[arg(long)]
        assert_fit: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Araki residuals, strict-locality ε(ℓ) and X-terms for a chain Hamiltonian.
    Gibbs1d {
        fixture: String,
        #[arg(long, default_value_t = 0.6)]
        t: f64,
        /// Site of the observable; defaults to the middle of the chain.
        #[arg(long)]
        center: Option<usize>,
        /// Half-width of the observable's support.
        #[arg(long, default_value_t = 0)]
        n: usize,
        /// Comma-separated ℓ values.
        #[arg(long, default_value = "1,2,3,4")]
        ells: String,
        /// Constant `c` of the validity condition `2tJ > c`.
        #[arg(long, default_value_t = 1.0)]
        validity: f64,
        /// Buffer length of the X-term layout; 0 skips it.
        #[arg(long, default_value_t = 2)]
        buffer: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Runs the invariant suite on the built-in fixtures.
    Selftest,
    /// Prints a built-in fixture as JSON.
    Fixture {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(cli::BUILTIN_FIXTURES))]
        name: String,
    },
}

#[derive(Args)]
struct SplitFlags {
    /// Widths of A, B and C: `wa,wb,wc`.
    #[arg(long, default_value = "1,2,1")]
    widths: String,
    /// Rectangle `row,col,height,width` holding ABC (PEPS fixtures).
    #[arg(long)]
    total: Option<String>,
    #[arg(long, default_value_t = 0)]
    ell: usize,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
}

#[derive(Args)]
struct SeriesFlags {
    /// Comma-separated widths of B for a decay series.
    #[arg(long)]
    series: Option<String>,
    /// Write the series as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Topo {
    Line,
    Cycle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Meth {
    Auto,
    Dense,
    MatrixFree,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Product,
    Gibbs,
    Identity,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeFlag {
    Injective,
    Mpo,
}

fn split_spec(f: &SplitFlags) -> Result<SplitSpec> {
    let w = cli::parse_list(&f.widths)?;
    let widths: [usize; 3] = w.try_into().map_err(|_| Error::input("--widths needs three numbers"))?;
    let total = f.total.as_deref().map(cli::parse_rect).transpose()?;
    Ok(SplitSpec { total, widths, ell: f.ell, beta: f.beta })
}

fn series(f: &SeriesFlags) -> Result<Vec<usize>> {
    f.series.as_deref().map(cli::parse_list).transpose().map(Option::unwrap_or_default)
}

fn write_csv(path: &Option<PathBuf>, rows: &[SeriesRow]) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, cli::csv(rows))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Option<RunReport>> {
    let report = match &cli.command {
        Command::Boundary { fixture, region, length, topology } => {
            let fx = cli::load_fixture(fixture)?;
            let region = region.as_deref().map(cli::parse_rect).transpose()?;
            let topology = match topology {
                Topo::Line => cli::TopologyArg::Line,
                Topo::Cycle => cli::TopologyArg::Cycle,
            };
            cli::cmd_boundary(&fx, &BoundaryArgs { region, length: *length, topology })?
        }
        Command::Martingale { fixture, split, method, series: s } => {
            let fx = cli::load_fixture(fixture)?;
            let method = match method {
                Meth::Auto => cli::MethodArg::Auto,
                Meth::Dense => cli::MethodArg::Dense,
                Meth::MatrixFree => cli::MethodArg::MatrixFree,
            };
            let args = MartingaleArgs { split: split_spec(split)?, method, series: series(s)? };
            let (rep, rows) = cli::cmd_martingale(&fx, &args)?;
            write_csv(&s.csv, &rows)?;
            rep
        }
        Command::Factorize { fixture, split, source, mode, series: s } => {
            let fx = cli::load_fixture(fixture)?;
            let source = match source {
                Source::Product => cli::SourceArg::Product,
                Source::Gibbs => cli::SourceArg::Gibbs,
                Source::Identity => cli::SourceArg::Identity,
            };
            let mode = match mode {
                ModeFlag::Injective => cli::ModeArg::Injective,
                ModeFlag::Mpo => cli::ModeArg::Mpo,
            };
            let args = FactorizeArgs { split: split_spec(split)?, source, mode, series: series(s)? };
            let (rep, rows) = cli::cmd_factorize(&fx, &args)?;
            write_csv(&s.csv, &rows)?;
            rep
        }
        Command::Mps { fixture, lengths, assert_fit, csv } => {
            let fx = cli::load_fixture(fixture)?;
            let (rep, rows) = cli::cmd_mps(&fx, &MpsArgs { lengths: cli::parse_list(lengths)?, assert_fit: *assert_fit })?;
            write_csv(csv, &rows)?;
            rep
        }
        Command::Gibbs1d { fixture, t, center, n, ells, validity, buffer, csv } => {
            let fx = cli::load_fixture(fixture)?;
            let args = Gibbs1dArgs { t: *t, center: *center, n: *n, ells: cli::parse_list(ells)?, validity: *validity, buffer: *buffer };
            let (rep, rows) = cli::cmd_gibbs1d(&fx, &args)?;
            write_csv(csv, &rows)?;
            rep
        }
        Command::Selftest => cli::cmd_selftest()?,
        Command::Fixture { name } => {
            let text = cli::builtin_fixture(name)?.to_json()?;
            emit(&cli.out, &text)?;
            return Ok(None);
        }
    };
    emit(&cli.out, &report.to_json()?)?;
    Ok(Some(report))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let par = if cli.threads <= 1 { faer::Par::Seq } else { faer::Par::rayon(cli.threads) };
    faer::set_global_parallelism(par);
    match run(&cli) {
        Ok(Some(rep)) if !rep.passed() => {
            for c in rep.checks.iter().filter(|c| c.asserted && !c.pass) {
                eprintln!("check failed: {} (measured {:e}, bound {:e}, tolerance {:e})", c.name, c.measured, c.bound, c.tolerance);
            }
            ExitCode::from(1)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
