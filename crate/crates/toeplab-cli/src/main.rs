use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toeplab::config::Config;
use toeplab_cli::run;

#[derive(Parser)]
#[command(name = "toeplab", version, about = "Random Toeplitz and Hankel matrix experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    args: Args,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Index-sum trace formulas against dense products on random small cases.
    TraceCheck,
    /// Limiting *-moment of a word.
    Limit,
    /// Empirical moments over a list of sizes next to the limit.
    Converge,
    /// Eigenvalues, histograms and spectral moments of a polynomial.
    Esd,
    /// Fourth central moment of normalized traces across sizes.
    Concentration,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::TraceCheck => "trace-check",
            Command::Limit => "limit",
            Command::Converge => "converge",
            Command::Esd => "esd",
            Command::Concentration => "concentration",
        }
    }
}

#[derive(clap::Args)]
struct Args {
    /// Configuration file (spec, symbols and run keys).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    #[arg(long, global = true)]
    word: Option<String>,
    /// Sizes, comma separated.
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// QMC points per replicate.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Directory for output files; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Any configuration key, as `key=value`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn config(args: &Args) -> Result<Config, String> {
    let mut cfg = match &args.spec {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| format!("{}: {e}", p.display()))?
            .parse::<Config>()
            .map_err(|e| e.to_string())?,
        None => Config::empty(),
    };
    let mut overrides: Vec<(String, String)> = Vec::new();
    if let Some(w) = &args.word {
        overrides.push(("word".into(), format!("{w:?}")));
    }
    if let Some(n) = &args.n {
        overrides.push(("n".into(), format!("[{n}]")));
    }
    if let Some(r) = args.reps {
        overrides.push(("reps".into(), r.to_string()));
    }
    if let Some(s) = args.seed {
        overrides.push(("seed".into(), s.to_string()));
    }
    if let Some(s) = args.samples {
        overrides.push(("samples".into(), s.to_string()));
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        overrides.push((k.trim().into(), v.trim().into()));
    }
    for (k, v) in overrides {
        cfg.set(&k, &v).map_err(|e| e.to_string())?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = std::env::var("TOEPLAB_WORKERS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let cfg = match config(&cli.args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match run(cli.command.name(), &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match &cli.args.out {
        Some(dir) => {
            if let Err(e) = std::fs::create_dir_all(dir) {
                eprintln!("error: {}: {e}", dir.display());
                return ExitCode::from(2);
            }
            for a in &outcome.artifacts {
                let path = dir.join(&a.name);
                if let Err(e) = std::fs::write(&path, &a.contents) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
        }
        None => {
            for a in &outcome.artifacts {
                print!("{}", a.contents);
                if !a.contents.ends_with('\n') {
                    println!();
                }
            }
        }
    }
    eprintln!("{}", outcome.summary);
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
