use std::process::ExitCode;

use clap::Parser;
use gl2modp::cli::{self, RunConfig, COMMANDS};

/// Batch driver: runs one command over F_q and prints a JSON report.
#[derive(Parser, Debug)]
#[command(name = "gl2modp", version, about)]
struct Args {
    /// Command, as a flag.
    #[arg(long)]
    cmd: Option<String>,
    /// Residue characteristic; `acceptance` without it runs every default field.
    #[arg(long)]
    p: Option<u32>,
    /// Degree of F_q over F_p.
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Number of t-adic digits kept for inexact series.
    #[arg(long)]
    precision: Option<usize>,
    /// Include peeling traces and per-check details.
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Command and key=value settings, e.g. `irreps p=3 n=1`.
    rest: Vec<String>,
}

fn config(args: Args) -> Result<(RunConfig, Option<std::path::PathBuf>), String> {
    let mut c = RunConfig {
        p: args.p,
        n: args.n,
        command: String::new(),
        precision: args.precision,
        trace: args.trace,
        seed: args.seed,
    };
    let mut command = args.cmd;
    for item in args.rest {
        let parse = |v: &str| v.parse::<u64>().map_err(|_| format!("bad value in {item}"));
        match item.split_once('=') {
            Some(("p", v)) => c.p = Some(parse(v)? as u32),
            Some(("n", v)) => c.n = parse(v)? as u32,
            Some(("seed", v)) => c.seed = parse(v)?,
            Some(("precision", v)) => c.precision = Some(parse(v)? as usize),
            Some((k, _)) => return Err(format!("unknown setting {k}")),
            None if command.is_none() => command = Some(item),
            None => return Err(format!("unexpected argument {item}")),
        }
    }
    c.command = command.ok_or_else(|| format!("no command; expected one of {}", COMMANDS.join(", ")))?;
    Ok((c, args.out))
}

fn main() -> ExitCode {
    let (c, out) = match config(Args::parse()) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match cli::run(&c) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes") + "\n";
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    match report.first_failure() {
        None => ExitCode::SUCCESS,
        Some(name) => {
            eprintln!("FAIL: {name}");
            ExitCode::from(1)
        }
    }
}
