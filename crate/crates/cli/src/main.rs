use std::path::PathBuf;
use std::process::ExitCode;

use arrmono::cache::{self, CacheStatus};
use arrmono::certificate::{Certificate, Verdict};
use arrmono::g31::ARRANGEMENT_DEGREE;
use arrmono::koszul::general_wedge_kernel;
use arrmono::pipeline::{
    certificate_line, exit_code, OutputFormat, Pipeline, PipelineError, PrimeSpec, RunConfig,
    DEFAULT_PRIME_BITS, DEFAULT_PRIME_COUNT, REPORT_VERSION,
};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_USAGE: u8 = 3;

/// Verifies that the first Milnor monodromy of the G31 reflection
/// arrangement is the identity, emitting machine-checkable certificates.
#[derive(Parser, Debug)]
#[command(name = "arrmono", version)]
struct Cli {
    /// Cache directory for the constructed polynomials.
    #[arg(long, global = true, env = "ARRMONO_CACHE")]
    cache_dir: Option<PathBuf>,
    /// Keep everything in memory.
    #[arg(long, global = true, conflicts_with = "cache_dir")]
    no_cache: bool,
    /// Explicit comma-separated primes (overrides --prime-count/--prime-bits).
    #[arg(long, global = true, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    #[arg(long, global = true, default_value_t = DEFAULT_PRIME_COUNT)]
    prime_count: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_PRIME_BITS)]
    prime_bits: u32,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also run the expensive independent cross-check at k = 50.
    #[arg(long, global = true)]
    heavy_oracles: bool,
    /// Marks the named certificate as refuted before the verdict is drawn.
    #[arg(long, global = true, hide = true)]
    inject_fault: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build (or load) the arrangement data.
    Build,
    /// Run one group of certificates.
    Verify {
        #[arg(value_enum)]
        what: VerifyTarget,
    },
    /// Run the certificates for one degree k in {10, 20, 30, 40, 50}.
    Check {
        #[arg(long)]
        k: u32,
    },
    /// Run the whole pipeline and draw the monodromy conclusion.
    Report,
    /// Independent oracles.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VerifyTarget {
    Freeness,
    Regseq,
    Minors,
    Scan,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Kernel dimension of df^ on 2-forms of degree k (2 <= k <= 59).
    WedgeKernel {
        #[arg(long)]
        k: u32,
    },
}

fn config(cli: &Cli) -> RunConfig {
    RunConfig {
        cache_dir: if cli.no_cache {
            None
        } else {
            Some(cli.cache_dir.clone().unwrap_or_else(|| PathBuf::from(".arrmono-cache")))
        },
        primes: match &cli.primes {
            Some(p) => PrimeSpec::Explicit { primes: p.clone() },
            None => PrimeSpec::Generated {
                count: cli.prime_count,
                bits: cli.prime_bits,
                seed: cli.seed,
            },
        },
        seed: cli.seed,
        threads: cli.threads,
        heavy_oracles: cli.heavy_oracles,
        output_format: match cli.format {
            Format::Text => OutputFormat::Text,
            Format::Json => OutputFormat::Json,
        },
        ..RunConfig::default()
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn inject(certs: &mut [Certificate], id: &Option<String>) {
    if let Some(id) = id {
        for c in certs.iter_mut().filter(|c| &c.id == id) {
            c.verdict = Verdict::Refuted;
            c.detail = Some("fault injected".into());
        }
    }
}

/// Prints a list of certificates and returns the exit code.
fn emit(command: &str, mut certs: Vec<Certificate>, cli: &Cli, primes: &[u64]) -> ExitCode {
    inject(&mut certs, &cli.inject_fault);
    let verdict = Verdict::all(certs.iter());
    match cli.format {
        Format::Json => {
            let v = serde_json::json!({
                "report_version": REPORT_VERSION,
                "command": command,
                "primes": primes,
                "certificates": certs,
                "verdict": verdict,
            });
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
        }
        Format::Text => {
            for c in &certs {
                print!("{}", certificate_line(c));
            }
            println!("{command}: {verdict}");
        }
    }
    ExitCode::from(exit_code(verdict, certs.iter()) as u8)
}

fn pipeline(cli: &Cli) -> Result<Pipeline, ExitCode> {
    Pipeline::new(config(cli)).map_err(|e| match e {
        PipelineError::Config(e) => usage(e),
        other => {
            eprintln!("error: {other}");
            ExitCode::from(EXIT_USAGE)
        }
    })
}

fn run(cli: &Cli) -> ExitCode {
    if let Err(e) = config(cli).resolve_primes() {
        return usage(e);
    }
    if let Command::Check { k } = cli.command {
        if ![10, 20, 30, 40, 50].contains(&k) {
            return usage(format!("no check is defined for k = {k}; choose one of 10, 20, 30, 40, 50"));
        }
    }
    if let Command::Oracle {
        which: OracleCommand::WedgeKernel { k },
    } = cli.command
    {
        if !(2..ARRANGEMENT_DEGREE).contains(&k) {
            return usage(format!("k = {k} is outside 2..=59"));
        }
    }
    let p = match pipeline(cli) {
        Ok(p) => p,
        Err(code) => return code,
    };
    match &cli.command {
        Command::Build => {
            let dir = p.config.cache_dir.as_ref().map(|d| cache::cache_subdir(d));
            let status = match &p.cache_status {
                Some(CacheStatus::Hit) => "cache hit".to_string(),
                Some(CacheStatus::Built) => "built".to_string(),
                Some(CacheStatus::Rebuilt(why)) => format!("rebuilt ({why})"),
                None => "built in memory".to_string(),
            };
            let deg = p.data.f.degree().map(|d| d as i64).unwrap_or(-1);
            match cli.format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "cache_dir": dir,
                        "status": status,
                        "degree_f": deg,
                        "terms_f": p.data.f.len(),
                        "build_steps_ms": p.build_timings,
                    })
                ),
                Format::Text => {
                    if let Some(d) = dir {
                        println!("cache: {}", d.display());
                    }
                    println!("status: {status}");
                    println!("deg f = {deg}, {} terms", p.data.f.len());
                }
            }
            ExitCode::SUCCESS
        }
        Command::Verify { what } => {
            let (name, certs) = match what {
                VerifyTarget::Freeness => ("verify freeness", p.freeness()),
                VerifyTarget::Regseq => ("verify regseq", p.regular_sequences()),
                VerifyTarget::Minors => ("verify minors", p.minors()),
                VerifyTarget::Scan => ("verify scan", p.scans()),
            };
            emit(name, certs, cli, &p.primes)
        }
        Command::Check { k } => {
            let mut certs = match p.check(*k) {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            if *k == 50 {
                certs.extend(p.k50_prerequisites());
            }
            emit(&format!("check k={k}"), certs, cli, &p.primes)
        }
        Command::Oracle {
            which: OracleCommand::WedgeKernel { k },
        } => {
            let (dim, cert) = general_wedge_kernel(*k, &p.data.basis, &p.primes);
            let cert = cert.with_value("dimension_upper_bound", dim);
            if let Format::Text = cli.format {
                println!("dim ker(df^) in degree {k} <= {dim} (kernel mod p)");
            }
            // the dimension itself is the output; only a failed run is an error
            let mut certs = vec![cert];
            inject(&mut certs, &cli.inject_fault);
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&certs[0]).expect("json")),
                Format::Text => print!("{}", certificate_line(&certs[0])),
            }
            if certs[0].verdict == Verdict::Refuted {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Report => {
            let mut report = p.report();
            if let Some(id) = &cli.inject_fault {
                for c in report.certificates_mut().filter(|c| &c.id == id) {
                    c.verdict = Verdict::Refuted;
                    c.detail = Some("fault injected".into());
                }
                report.reevaluate();
            }
            match cli.format {
                Format::Json => println!("{}", report.to_json()),
                Format::Text => print!("{}", report.to_text()),
            }
            if report.verdict() != Verdict::Proved {
                eprintln!("not proved: {}", report.conclusion.failing.join("; "));
            }
            ExitCode::from(report.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    run(&cli)
}
