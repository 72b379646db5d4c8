use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use annuflow::config::parse_config_full;
use annuflow::output::{write_run, MANIFEST_FILE};
use annuflow::study::{run, RunStatus};
use annuflow::verify::{Verdict, Verifier};
use annuflow::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "annuflow", version, about = "Oscillatory annular flow of a shear-thinning, concentration-thickening fluid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one study described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (default: `dir` from [output], else `<config stem>_out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks.
    Verify {
        /// Only checks on grids of at most 101 nodes.
        #[arg(long)]
        fast: bool,
        /// Write the report as JSON into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every config matching a glob pattern, in parallel.
    Sweep {
        pattern: String,
        /// Parent directory; each run writes to `<out>/<config stem>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::ConfigParse { .. } | Error::ConfigValidation { .. } | Error::Parameter { .. } => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn default_out(config: &Path) -> PathBuf {
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    PathBuf::from(format!("{stem}_out"))
}

fn run_one(config: &Path, out: Option<PathBuf>) -> Result<(PathBuf, RunStatus), Error> {
    let text = std::fs::read_to_string(config)?;
    let parsed = parse_config_full(&text)?;
    let dir = out
        .or_else(|| parsed.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| default_out(config));
    let output = run(&parsed.study)?;
    write_run(&dir, &parsed.study, &output)?;
    Ok((dir, output.status))
}

fn report(config: &Path, result: &Result<(PathBuf, RunStatus), Error>) -> u8 {
    match result {
        Ok((dir, RunStatus::Complete)) => {
            println!("{}: complete, results in {}", config.display(), dir.display());
            0
        }
        Ok((dir, RunStatus::Aborted { t_last_good, reason })) => {
            eprintln!(
                "{}: aborted at t = {t_last_good} ({reason}); partial results in {}",
                config.display(),
                dir.display()
            );
            EXIT_NUMERICAL
        }
        Err(e) => {
            eprintln!("{}: {e}", config.display());
            exit_code(e)
        }
    }
}

fn verify(fast: bool, out: Option<PathBuf>) -> u8 {
    let verifier = Verifier::new(fast);
    let outcomes = verifier.check_all();
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| o.verdict == Verdict::Fail).count();
    let skipped = outcomes.iter().filter(|o| o.verdict == Verdict::Skipped).count();
    println!(
        "{} passed, {failed} failed, {skipped} skipped",
        outcomes.len() - failed - skipped
    );
    if let Some(dir) = out {
        let summaries: Vec<_> = outcomes.iter().map(|o| o.summary()).collect();
        let written = std::fs::create_dir_all(&dir).and_then(|_| {
            let text = serde_json::to_string_pretty(&summaries).map_err(std::io::Error::from)?;
            std::fs::write(dir.join("verify.json"), text + "\n")
        });
        if let Err(e) = written {
            eprintln!("cannot write report: {e}");
            return EXIT_IO;
        }
    }
    if failed == 0 {
        0
    } else {
        EXIT_NUMERICAL
    }
}

fn sweep(pattern: &str, out: Option<PathBuf>) -> u8 {
    let paths = match glob::glob(pattern) {
        Ok(paths) => paths,
        Err(e) => {
            eprintln!("bad pattern `{pattern}`: {e}");
            return EXIT_USAGE;
        }
    };
    let mut configs = Vec::new();
    for p in paths {
        match p {
            Ok(p) => configs.push(p),
            Err(e) => {
                eprintln!("{e}");
                return EXIT_IO;
            }
        }
    }
    if configs.is_empty() {
        eprintln!("no config matches `{pattern}`");
        return EXIT_USAGE;
    }
    let parent = out.unwrap_or_else(|| PathBuf::from("sweep_out"));
    let threads = std::env::var("ANNUFLOW_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("cannot start worker threads: {e}");
            return EXIT_USAGE;
        }
    };
    let results: Vec<_> = pool.install(|| {
        configs
            .par_iter()
            .map(|c| {
                let dir = parent.join(default_out(c).file_name().unwrap_or_default());
                run_one(c, Some(dir))
            })
            .collect()
    });
    let mut code = 0;
    for (c, r) in configs.iter().zip(&results) {
        code = code.max(report(c, r));
    }
    code
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Run { config, out } => {
            let result = run_one(&config, out);
            if let Ok((dir, _)) = &result {
                debug_assert!(dir.join(MANIFEST_FILE).exists());
            }
            report(&config, &result)
        }
        Command::Verify { fast, out } => verify(fast, out),
        Command::Sweep { pattern, out } => sweep(&pattern, out),
    };
    ExitCode::from(code)
}
