use std::fmt::Write as _;
use std::fs::File;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use concsynth::harness::{
    exit_code, run_file, run_suite, suite_exit_code, summary, write_csv, write_json, Engine, SolveOptions,
    DEFAULT_SUITE_TIMEOUT,
};
use concsynth::smt::{resolve_program, SmtConfig};

#[derive(Parser)]
#[command(name = "concsynth", version, about = "Synthesize CLIA functions and loop invariants from SyGuS files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one SyGuS problem and print the solution.
    Solve(SolveArgs),
    /// Run every `.sl` file below a directory and report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct EngineArgs {
    /// auto, concolic, ssi or at.
    #[arg(long, default_value = "auto")]
    engine: Engine,
    /// Worker threads for the concolic search.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// SMT solver binary (default: $CONCSYNTH_SMT, then z3).
    #[arg(long)]
    smt_solver: Option<String>,
    /// Always use the concolic search, even for decidable fragments.
    #[arg(long)]
    no_fragments: bool,
    /// Largest decision-tree height to try.
    #[arg(long, default_value_t = concsynth::concolic::DEFAULT_MAX_HEIGHT)]
    max_height: usize,
    /// CEGIS rounds per height before moving on.
    #[arg(long, default_value_t = concsynth::concolic::DEFAULT_HEIGHT_ITER_CAP)]
    height_iter_cap: usize,
    /// Remove the per-height round limit.
    #[arg(long)]
    no_height_cap: bool,
    /// Reject problems whose grammar lacks ite or comparisons.
    #[arg(long)]
    strict_grammar: bool,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    /// Overall time limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Write run statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Print the SSI candidate terms.
    #[arg(long)]
    dump_candidates: bool,
    /// Print the branch transition graph in DOT format.
    #[arg(long)]
    dump_graph: bool,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    /// Per-problem time limit in seconds.
    #[arg(long, default_value_t = DEFAULT_SUITE_TIMEOUT.as_secs_f64())]
    timeout: f64,
    /// Problems run in parallel.
    #[arg(long, default_value_t = 1)]
    suite_jobs: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn options(a: &EngineArgs, timeout: Option<f64>) -> Result<SolveOptions> {
    if let Some(t) = timeout {
        anyhow::ensure!(t > 0.0 && t.is_finite(), "--timeout must be a positive number of seconds");
    }
    let timeout = timeout.map(Duration::from_secs_f64);
    Ok(SolveOptions {
        engine: a.engine,
        fragments: !a.no_fragments,
        strict_grammar: a.strict_grammar,
        timeout,
        smt: SmtConfig::for_program(&resolve_program(a.smt_solver.as_deref())),
        jobs: a.jobs.max(1),
        max_height: a.max_height,
        height_iter_cap: (!a.no_height_cap).then_some(a.height_iter_cap),
        dump_candidates: false,
        dump_graph: false,
    })
}

fn solve(args: SolveArgs) -> Result<i32> {
    let mut opts = options(&args.engine, args.timeout)?;
    opts.dump_candidates = args.dump_candidates;
    opts.dump_graph = args.dump_graph;
    let (rec, out) = run_file(&args.file, &opts);
    let mut text = String::new();
    if let Some(out) = &out {
        for note in &out.notes {
            eprintln!("note: {note}");
        }
        if let Some(cands) = &out.candidates {
            writeln!(text, "; candidates: {}", cands.join(", "))?;
        }
        if let Some(dot) = &out.graph_dot {
            text.push_str(dot);
        }
    }
    match (&rec.solution, rec.status) {
        (Some(sol), _) => writeln!(text, "{sol}")?,
        (None, status) => {
            writeln!(text, "{}", status.to_string().to_lowercase())?;
            if let Some(m) = &rec.message {
                eprintln!("{m}");
            }
        }
    }
    emit(&text)?;
    if rec.unsound {
        eprintln!("UNSOUND: the reported solution failed independent verification");
    }
    if let Some(path) = &args.stats {
        let stats = serde_json::json!({ "record": rec, "outcome": out });
        serde_json::to_writer_pretty(File::create(path).with_context(|| format!("creating {}", path.display()))?, &stats)?;
    }
    Ok(exit_code(&rec))
}

fn bench(args: BenchArgs) -> Result<i32> {
    let opts = options(&args.engine, Some(args.timeout))?;
    let records = run_suite(&args.dir, &opts, args.suite_jobs).with_context(|| format!("reading {}", args.dir.display()))?;
    let mut text = String::new();
    for r in &records {
        let flag = if r.unsound { "  UNSOUND" } else { "" };
        writeln!(text, "{:<60} {:<12} {:<9} {:>8}ms{flag}", r.path, r.status.to_string(), r.engine.to_string(), r.ms)?;
    }
    text.push_str(&summary(&records));
    emit(&text)?;
    if let Some(path) = &args.csv {
        write_csv(&records, File::create(path).with_context(|| format!("creating {}", path.display()))?)?;
    }
    if let Some(path) = &args.json {
        write_json(&records, File::create(path).with_context(|| format!("creating {}", path.display()))?)?;
    }
    Ok(suite_exit_code(&records))
}

/// Writes to stdout; a reader that went away early is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
    };
    match r {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
