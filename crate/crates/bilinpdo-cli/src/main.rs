use std::path::PathBuf;
use std::process::ExitCode;

use bilinpdo::acceptance::{self, Status};
use bilinpdo_cli::config::{parse_arg, parse_text, Entry, ExperimentConfig, Origin};
use bilinpdo_cli::{experiments, output};
use clap::Parser;

#[derive(Parser, Debug)]
#[command(
    name = "bilinpdo",
    about = "Run a bilinpdo experiment or the self-test suite",
    override_usage = "bilinpdo <EXPERIMENT> [key=value ...] [--out DIR] [--seed S] [--config FILE]\n       bilinpdo selftest [--filter=MODULE] [--debug-corrupt-partition]"
)]
struct Cli {
    /// Experiment name, or `selftest`.
    experiment: String,
    /// `key=value` overrides, applied after the config file.
    params: Vec<String>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Selftest: only run criteria of this module.
    #[arg(long, value_name = "MODULE")]
    filter: Option<String>,
    /// Selftest: build the frequency split from a wrong partition profile.
    #[arg(long)]
    debug_corrupt_partition: bool,
}

const USAGE: u8 = 1;
const TOLERANCE: u8 = 2;

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("BILINPDO_THREADS") else { return Ok(()) };
    let n: usize = v.parse().map_err(|_| format!("BILINPDO_THREADS: expected a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("BILINPDO_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn selftest(cli: &Cli) -> ExitCode {
    if !cli.params.is_empty() {
        eprintln!("error: selftest takes no key=value arguments");
        return ExitCode::from(USAGE);
    }
    if let Some(f) = &cli.filter {
        let known = acceptance::modules();
        if !known.contains(&f.as_str()) {
            eprintln!("error: unknown module `{f}` (known: {})", known.join(", "));
            return ExitCode::from(USAGE);
        }
    }
    let opts = acceptance::Options { corrupt_partition: cli.debug_corrupt_partition };
    let out = acceptance::run(cli.filter.as_deref(), &opts, |o| println!("{}", o.line()));
    let count = |s: Status| out.iter().filter(|o| o.status == s).count();
    println!("{} passed, {} failed, {} known failures", count(Status::Pass), count(Status::Fail), count(Status::KnownFail));
    if count(Status::Fail) > 0 {
        ExitCode::from(TOLERANCE)
    } else {
        ExitCode::SUCCESS
    }
}

fn experiment(cli: &Cli) -> Result<ExitCode, String> {
    let mut entries = Vec::new();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        entries.extend(parse_text(&text).map_err(|e| format!("{}: {e}", path.display()))?);
    }
    entries.push(("experiment".into(), Entry::at(cli.experiment.clone(), Origin::Arg { index: 1, column: 1 })));
    for (i, a) in cli.params.iter().enumerate() {
        entries.push(parse_arg(i + 2, a).map_err(|e| e.to_string())?);
    }
    if let Some(s) = cli.seed {
        entries.push(("seed".into(), Entry::at(s.to_string(), Origin::Default)));
    }
    if let Some(o) = &cli.out {
        entries.push(("output_dir".into(), Entry::at(o.display().to_string(), Origin::Default)));
    }
    let cfg = ExperimentConfig::build(entries).map_err(|e| e.to_string())?;
    let rep = match experiments::run(&cfg) {
        Ok(r) => r,
        Err(experiments::RunError::Config(e)) => return Err(e.to_string()),
        Err(e) => {
            eprintln!("{}: numerical error: {e}", cfg.experiment.name());
            return Ok(ExitCode::from(TOLERANCE));
        }
    };
    let files = output::write(&rep, &cfg.output_dir).map_err(|e| format!("{}: {e}", cfg.output_dir.display()))?;
    println!("{} {}: {}", if rep.pass { "PASS" } else { "FAIL" }, cfg.experiment.name(), rep.summary);
    println!("tolerance: {}", rep.tolerance);
    for f in files {
        println!("wrote {}", f.display());
    }
    if rep.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        if let Some(row) = &rep.offending {
            println!("offending row: {row}");
        }
        Ok(ExitCode::from(TOLERANCE))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = threads() {
        eprintln!("error: {e}");
        return ExitCode::from(USAGE);
    }
    if cli.experiment == "selftest" {
        return selftest(&cli);
    }
    if cli.filter.is_some() || cli.debug_corrupt_partition {
        eprintln!("error: --filter and --debug-corrupt-partition only apply to selftest");
        return ExitCode::from(USAGE);
    }
    match experiment(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE)
        }
    }
}
