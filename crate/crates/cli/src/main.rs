use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use conncurv::{parse, Dims};
use conncurv_cli::{exit, load_config, report, run, Format, Verdict};

#[derive(Parser)]
#[command(name = "conncurv", about = "Verify curvature identities of connections on bundle patches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check in a suite config.
    Check {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Parse an expression and print its canonical form.
    ParseExpr {
        expr: String,
        /// Base and fiber dimensions, as `m,n`.
        #[arg(long, value_parser = parse_dims)]
        dims: Dims,
    },
    /// Print the tool version.
    Version,
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    let (m, n) = s.split_once(',').ok_or("expected `m,n`")?;
    let m = m.trim().parse().map_err(|e| format!("base dimension: {e}"))?;
    let n = n.trim().parse().map_err(|e| format!("fiber dimension: {e}"))?;
    Ok(Dims::new(m, n))
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Version => {
            println!("{} {}", report::TOOL, report::VERSION);
            code(exit::PASS)
        }
        Command::ParseExpr { expr, dims } => match parse(&expr, dims) {
            Ok(e) => {
                println!("{e}");
                code(exit::PASS)
            }
            Err(e) => {
                eprintln!("error: {e}");
                code(exit::CONFIG)
            }
        },
        Command::Check {
            config,
            format,
            out,
            seed,
            jobs,
        } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return code(exit::CONFIG);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run(&cfg, jobs);
            let format = match format {
                FormatArg::Json => Format::Json,
                FormatArg::Text => Format::Text,
            };
            let written = match &out {
                Some(path) => File::create(path).and_then(|f| report.emit(format, &mut BufWriter::new(f))),
                None => report.emit(format, &mut std::io::stdout().lock()),
            };
            if let Err(e) = written {
                eprintln!("error: writing report: {e}");
                return code(exit::CONFIG);
            }
            match report.verdict {
                Verdict::Pass => code(exit::PASS),
                Verdict::Fail => code(exit::FAIL),
            }
        }
    }
}
