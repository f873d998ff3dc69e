//! Command line surface. Five subcommands share one configuration story:
//! explicit flags beat the optional `--config` TOML file, which beats
//! built-in defaults; `SOSIEFORGE_OUT` supplies the fallback output root.
//! Exit codes identify the error class: 2 configuration, 3 corpus, 4 I/O.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus::{corpus_check, corpus_hash, load_corpus, Corpus, CorpusError, DEFAULT_COVERAGE_THRESHOLD};
use crate::diversity::{diversity_json, measure_diversity};
use crate::minilang::typecheck;
use crate::reactions::ReactionIndex;
use crate::runtime::DEFAULT_FUEL;
use crate::search::{
    build_report, load_pool, persist_campaign, render_report, report_csv, report_json,
    run_campaign, timing_json, validate_report, CampaignConfig, CampaignError, TimingReport,
};
use crate::transforms::TransformationKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CORPUS: i32 = 3;
pub const EXIT_IO: i32 = 4;

const OUT_ENV: &str = "SOSIEFORGE_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "sosieforge",
    version,
    about = "Synthesizes and screens computationally diverse variants of MiniLang programs"
)]
pub struct Cli {
    /// TOML file of key = value defaults; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Campaign seed; every command is deterministic given the same seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a transformation campaign over a corpus program and store results.
    Sosiefy(SosiefyArgs),
    /// Compare stored variants' execution traces against the original.
    Diversity(DiversityArgs),
    /// Validate a campaign report file and render it as a table or CSV.
    Report(ReportArgs),
    /// Print the reaction of every statement of a corpus program, one JSON line each.
    ReactionsDump(ReactionsDumpArgs),
    /// Check corpus layout, static safety, suite status, and coverage.
    CorpusCheck(CorpusCheckArgs),
}

#[derive(Args, Debug, Default)]
pub struct SosiefyArgs {
    /// Corpus program directory (containing src/ and tests/).
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    /// Number of transplantation point draws.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Comma separated transformation kinds (default: all nine).
    #[arg(long)]
    pub kinds: Option<String>,
    /// Interpreter step budget per test run.
    #[arg(long)]
    pub fuel: Option<u64>,
    /// Store degenerated and ill-formed variants too, not just sosies.
    #[arg(long)]
    pub keep_all: bool,
    /// Output root; defaults to $SOSIEFORGE_OUT, then ./out.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for variant evaluation (1 = sequential).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct DiversityArgs {
    /// Corpus program directory the pool was synthesized from.
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    /// Variant pool root (the campaign's output root).
    #[arg(long, value_name = "DIR")]
    pub pool: Option<PathBuf>,
    /// Original-program runs used to build the noise mask (minimum 2).
    #[arg(long)]
    pub runs: Option<usize>,
    /// Report destination; defaults to <pool>/<program>/diversity.json.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Interpreter step budget per test run.
    #[arg(long)]
    pub fuel: Option<u64>,
    /// Worker threads for trace comparison (1 = sequential).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Campaign report to validate and render (report.json).
    #[arg(value_name = "REPORT")]
    pub report: PathBuf,
    /// Also write the table as CSV to this file.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Timing sidecar; defaults to timing.json next to the report.
    #[arg(long, value_name = "FILE")]
    pub timing: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct ReactionsDumpArgs {
    /// Corpus program directory.
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    /// Destination file (default: stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct CorpusCheckArgs {
    /// Corpus program directory.
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    /// Minimum fraction of application statements the suite must execute.
    #[arg(long)]
    pub coverage_threshold: Option<f64>,
    /// Interpreter step budget per test run.
    #[arg(long)]
    pub fuel: Option<u64>,
}

/// Defaults read from `--config`. Field names are the flag names; unknown
/// keys are configuration errors.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub kinds: Option<String>,
    pub fuel: Option<u64>,
    pub keep_all: Option<bool>,
    pub out: Option<PathBuf>,
    pub pool: Option<PathBuf>,
    pub runs: Option<usize>,
    pub workers: Option<usize>,
    pub coverage_threshold: Option<f64>,
}

pub fn load_file_config(path: &Path) -> Result<FileConfig, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {}", path.display(), e))?;
    toml::from_str(&text).map_err(|e| format!("config {}: {}", path.display(), e))
}

pub fn parse_kinds(spec: &str) -> Result<Vec<TransformationKind>, String> {
    let mut kinds = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let kind = part
            .parse::<TransformationKind>()
            .map_err(|_| format!("unknown transformation kind '{}'", part))?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    if kinds.is_empty() {
        return Err("no transformation kinds selected".to_string());
    }
    Ok(kinds)
}

fn resolve_out(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or(file)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn corpus_exit(err: &CorpusError) -> i32 {
    match err {
        CorpusError::Io(_) => EXIT_IO,
        _ => EXIT_CORPUS,
    }
}

fn load_checked_corpus(dir: Option<&Path>) -> Result<Corpus, i32> {
    let dir = dir.ok_or_else(|| {
        eprintln!("error: --corpus is required (flag or config file)");
        EXIT_CONFIG
    })?;
    let corpus = load_corpus(dir).map_err(|e| {
        eprintln!("error: {}", e);
        corpus_exit(&e)
    })?;
    let diags = typecheck(&corpus.program);
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("error: {}", d);
        }
        return Err(EXIT_CORPUS);
    }
    Ok(corpus)
}

fn configure_workers(workers: usize) -> bool {
    if workers > 1 {
        // A second global-pool build in the same process is harmless; the
        // first configuration wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
        true
    } else {
        false
    }
}

fn write_out(path: &Path, contents: &str) -> Result<(), i32> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                eprintln!("error: {}: {}", parent.display(), e);
                EXIT_IO
            })?;
        }
    }
    fs::write(path, contents).map_err(|e| {
        eprintln!("error: {}: {}", path.display(), e);
        EXIT_IO
    })
}

/// Writes to stdout without the panic the print macros would raise on a
/// write error. A closed pipe (`sosieforge report | head`) ends the
/// process quietly; any other stdout failure is an I/O error.
fn emit(text: impl AsRef<str>) {
    use std::io::Write;
    let mut out = io::stdout();
    if let Err(e) = out.write_all(text.as_ref().as_bytes()).and_then(|_| out.flush()) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(EXIT_OK);
        }
        eprintln!("error: stdout: {}", e);
        std::process::exit(EXIT_IO);
    }
}

/// Parses argv and runs the selected command, returning the process exit
/// code. Usage errors exit directly through clap with code 2.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap uses exit code 2 for usage errors and 0 for help/version.
            err.exit();
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(code) => code,
    }
}

pub fn dispatch(cli: Cli) -> Result<i32, i32> {
    let file = match &cli.config {
        Some(path) => load_file_config(path).map_err(|e| {
            eprintln!("error: {}", e);
            EXIT_CONFIG
        })?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Sosiefy(args) => sosiefy(cli.seed, args, file),
        Command::Diversity(args) => diversity(args, file),
        Command::Report(args) => report(args),
        Command::ReactionsDump(args) => reactions_dump(args, file),
        Command::CorpusCheck(args) => corpus_check_cmd(args, file),
    }
}

fn sosiefy(seed: Option<u64>, args: SosiefyArgs, file: FileConfig) -> Result<i32, i32> {
    let corpus_dir = args.corpus.or(file.corpus);
    let corpus = load_checked_corpus(corpus_dir.as_deref())?;
    let kinds = match args.kinds.or(file.kinds) {
        Some(spec) => parse_kinds(&spec).map_err(|e| {
            eprintln!("error: {}", e);
            EXIT_CONFIG
        })?,
        None => TransformationKind::ALL.to_vec(),
    };
    let workers = args.workers.or(file.workers).unwrap_or(1);
    let config = CampaignConfig {
        seed: seed.or(file.seed).unwrap_or(0),
        budget: args.budget.or(file.budget).unwrap_or(100),
        kinds,
        fuel: args.fuel.or(file.fuel).unwrap_or(DEFAULT_FUEL),
        parallel: configure_workers(workers),
    };
    let output = run_campaign(&corpus.program, &config).map_err(|e| match e {
        CampaignError::BaselineFails(tests) => {
            eprintln!("error: baseline suite fails: {}", tests.join(", "));
            EXIT_CORPUS
        }
        CampaignError::NoKinds => {
            eprintln!("error: no transformation kinds selected");
            EXIT_CONFIG
        }
    })?;
    let keep_all = args.keep_all || file.keep_all.unwrap_or(false);
    let out_root = resolve_out(args.out, file.out);
    let written = persist_campaign(&corpus.program, &corpus.name, &output, &out_root, keep_all)
        .map_err(|e| {
            eprintln!("error: {}", e);
            EXIT_IO
        })?;
    let index = ReactionIndex::build(&corpus.program);
    let (report, timing) =
        build_report(&corpus.name, &corpus.program, &index, &output, &corpus_hash(&corpus));
    let report_dir = out_root.join(&corpus.name);
    write_out(&report_dir.join("report.json"), &report_json(&report))?;
    write_out(&report_dir.join("timing.json"), &timing_json(&timing))?;
    write_out(&report_dir.join("report.csv"), &report_csv(&report, &timing))?;
    emit(render_report(&report, Some(&timing)));
    emit(format!(
        "stored {} variant(s) under {}; reports in {}\n",
        written.len(),
        out_root.display(),
        report_dir.display()
    ));
    Ok(EXIT_OK)
}

fn diversity(args: DiversityArgs, file: FileConfig) -> Result<i32, i32> {
    let corpus_dir = args.corpus.or(file.corpus);
    let corpus = load_checked_corpus(corpus_dir.as_deref())?;
    let runs = args.runs.or(file.runs).unwrap_or(2);
    if runs < 2 {
        eprintln!("error: --runs must be at least 2 to expose nondeterminism");
        return Err(EXIT_CONFIG);
    }
    let pool_root = args.pool.or(file.pool).map_or_else(|| resolve_out(None, file.out), |p| p);
    let pool = load_pool(&pool_root, &corpus.name).map_err(|e| {
        eprintln!("error: {}", e);
        EXIT_IO
    })?;
    let fuel = args.fuel.or(file.fuel).unwrap_or(DEFAULT_FUEL);
    let workers = args.workers.or(file.workers).unwrap_or(1);
    let report = measure_diversity(&pool, &corpus.program, fuel, runs, configure_workers(workers));
    let out_path = args
        .out
        .unwrap_or_else(|| pool_root.join(&corpus.name).join("diversity.json"));
    write_out(&out_path, &diversity_json(&report))?;
    emit(format!(
        "pool {}: {} verified sosie(s), {} excluded\n",
        corpus.name,
        report.verdicts.len(),
        report.excluded.len()
    ));
    emit(format!(
        "diverse: any {} ({:.1}%), calls {} ({:.1}%), variables {} ({:.1}%)\n",
        report.any_diversity,
        report.any_diversity_pct,
        report.call_diversity,
        report.call_diversity_pct,
        report.variable_diversity,
        report.variable_diversity_pct
    ));
    emit(format!("report written to {}\n", out_path.display()));
    Ok(EXIT_OK)
}

fn report(args: ReportArgs) -> Result<i32, i32> {
    let text = fs::read_to_string(&args.report).map_err(|e| {
        eprintln!("error: {}: {}", args.report.display(), e);
        EXIT_IO
    })?;
    let report = validate_report(&text).map_err(|e| {
        eprintln!("error: invalid report: {}", e);
        EXIT_CONFIG
    })?;
    let timing_path = args
        .timing
        .clone()
        .or_else(|| args.report.parent().map(|p| p.join("timing.json")));
    let timing: Option<TimingReport> = match timing_path {
        Some(path) if path.is_file() => {
            let text = fs::read_to_string(&path).map_err(|e| {
                eprintln!("error: {}: {}", path.display(), e);
                EXIT_IO
            })?;
            Some(serde_json::from_str(&text).map_err(|e| {
                eprintln!("error: invalid timing file {}: {}", path.display(), e);
                EXIT_CONFIG
            })?)
        }
        Some(path) if args.timing.is_some() => {
            eprintln!("error: {}: not a file", path.display());
            return Err(EXIT_IO);
        }
        _ => None,
    };
    emit(render_report(&report, timing.as_ref()));
    if let Some(csv_path) = args.csv {
        let timing = timing.unwrap_or_default();
        write_out(&csv_path, &report_csv(&report, &timing))?;
        emit(format!("csv written to {}\n", csv_path.display()));
    }
    Ok(EXIT_OK)
}

fn reactions_dump(args: ReactionsDumpArgs, file: FileConfig) -> Result<i32, i32> {
    let corpus_dir = args.corpus.or(file.corpus);
    let corpus = load_checked_corpus(corpus_dir.as_deref())?;
    let dump = ReactionIndex::build(&corpus.program).dump_lines();
    match args.out {
        Some(path) => write_out(&path, &dump)?,
        None => emit(dump),
    }
    Ok(EXIT_OK)
}

fn corpus_check_cmd(args: CorpusCheckArgs, file: FileConfig) -> Result<i32, i32> {
    let dir = args.corpus.or(file.corpus).ok_or_else(|| {
        eprintln!("error: --corpus is required (flag or config file)");
        EXIT_CONFIG
    })?;
    let corpus = load_corpus(&dir).map_err(|e| {
        eprintln!("error: {}", e);
        corpus_exit(&e)
    })?;
    let fuel = args.fuel.or(file.fuel).unwrap_or(DEFAULT_FUEL);
    let threshold = args
        .coverage_threshold
        .or(file.coverage_threshold)
        .unwrap_or(DEFAULT_COVERAGE_THRESHOLD);
    match corpus_check(&corpus, fuel, threshold) {
        Ok(check) => {
            emit(format!(
                "{}: ok ({} statements, {} application, {} tests, coverage {:.1}%)\n",
                corpus.name,
                check.statements,
                check.application_statements,
                check.tests,
                check.coverage_ratio * 100.0
            ));
            for w in &check.warnings {
                emit(format!("warning: {}\n", w));
            }
            Ok(EXIT_OK)
        }
        Err(problems) => {
            for p in &problems {
                eprintln!("error: {}", p);
            }
            Err(EXIT_CORPUS)
        }
    }
}
