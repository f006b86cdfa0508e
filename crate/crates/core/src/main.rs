use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nngen::corpus::{DumpFormat, Split, DEFAULT_MIN_TRAIN_COMMITS};
use nngen::pipeline::{
    self, EvaluateConfig, FilterConfig, GenerateConfig, IngestConfig, SampleConfig, StatsConfig,
};
use nngen::retrieval::{ScopePolicy, Stage2Direction, DEFAULT_K};

#[derive(Parser)]
#[command(
    name = "nngen",
    version,
    about = "Nearest-neighbour commit message generation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load cleaned .diff/.msg splits and attach repository provenance from a raw dump
    Ingest(IngestArgs),
    /// Drop repositories with too few training commits from both splits
    Filter(FilterArgs),
    /// Describe enriched corpora
    Stats(StatsArgs),
    /// Retrieve a message for every test commit
    Generate(GenerateArgs),
    /// Origin analysis and BLEU-4 comparison of outcome files
    Evaluate(EvaluateArgs),
    /// Corpus BLEU-4 of a candidate .msg file against a reference .msg file
    Score(ScoreArgs),
    /// Draw random provenance mappings for manual review
    SampleMappings(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Global,
    SameRepo,
    ExcludeRepo,
}

impl From<PolicyArg> for ScopePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Global => ScopePolicy::Global,
            PolicyArg::SameRepo => ScopePolicy::SameRepo,
            PolicyArg::ExcludeRepo => ScopePolicy::ExcludeRepo,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpFormatArg {
    Tsv,
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    TestAsCandidate,
    TrainAsCandidate,
}

#[derive(Args)]
struct IngestArgs {
    /// Training split: path prefix of the .diff/.msg pair
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    valid: Option<PathBuf>,
    #[arg(long)]
    test: PathBuf,
    /// Raw commit dump with message, repo_id, commit_id records
    #[arg(long)]
    dump: PathBuf,
    #[arg(long, value_enum, default_value = "tsv")]
    dump_format: DumpFormatArg,
    /// Field delimiter for tsv/csv dumps, overriding the format default
    #[arg(long)]
    dump_delimiter: Option<char>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Keep repositories with at least this many training commits
    #[arg(long, default_value_t = DEFAULT_MIN_TRAIN_COMMITS)]
    min_train_commits: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value = "global")]
    policy: PolicyArg,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Worker threads; defaults to all available cores
    #[arg(long)]
    workers: Option<usize>,
    /// Which diff plays the BLEU candidate when re-ranking
    #[arg(long, value_enum, default_value = "test-as-candidate")]
    stage2_direction: DirectionArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Enriched test corpus holding the reference messages
    #[arg(long)]
    test: PathBuf,
    /// Outcome files written by `generate` (repeatable)
    #[arg(long, required = true)]
    outcomes: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    candidate: PathBuf,
    reference: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    /// provenance.json written by `ingest`
    #[arg(long)]
    mapping: PathBuf,
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn dump_format(format: DumpFormatArg, delimiter: Option<char>) -> nngen::Result<DumpFormat> {
    let delim = delimiter
        .map(|c| {
            u8::try_from(c)
                .map_err(|_| nngen::Error::Config(format!("delimiter {c:?} is not a single byte")))
        })
        .transpose()?;
    Ok(match format {
        DumpFormatArg::Jsonl => DumpFormat::JsonLines,
        DumpFormatArg::Tsv => DumpFormat::Delimited {
            delimiter: delim.unwrap_or(b'\t'),
            quoted: false,
        },
        DumpFormatArg::Csv => DumpFormat::Delimited {
            delimiter: delim.unwrap_or(b','),
            quoted: true,
        },
    })
}

fn run(command: Command) -> nngen::Result<()> {
    match command {
        Command::Ingest(a) => {
            let s = pipeline::cmd_ingest(&IngestConfig {
                train: a.train,
                valid: a.valid,
                test: a.test,
                dump: a.dump,
                dump_format: dump_format(a.dump_format, a.dump_delimiter)?,
                out: a.out,
            })?;
            for sp in &s.splits {
                println!(
                    "{}: {} commits, {} unknown repository, {} blank lines rejected",
                    sp.split,
                    sp.commits,
                    sp.unknown_repo,
                    sp.rejected_lines.len()
                );
            }
            println!(
                "provenance: {}/{} distinct messages resolved, {} unresolved ({:.2}%)",
                s.resolved_messages,
                s.distinct_messages,
                s.unresolved_messages,
                100.0 * s.unresolved_fraction
            );
        }
        Command::Filter(a) => {
            let s = pipeline::cmd_filter(&FilterConfig {
                train: a.train,
                test: a.test,
                min_train_commits: a.min_train_commits,
                out: a.out,
            })?;
            println!("train: {} -> {} commits", s.train_before, s.train_after);
            println!("test:  {} -> {} commits", s.test_before, s.test_after);
            println!("repositories kept: {}", s.kept_repos);
        }
        Command::Stats(a) => {
            let mut inputs = Vec::new();
            inputs.extend(a.train.map(|p| (Split::Train, p)));
            inputs.extend(a.test.map(|p| (Split::Test, p)));
            let (_, text) = pipeline::cmd_stats(&StatsConfig { inputs, out: a.out })?;
            print!("{text}");
        }
        Command::Generate(a) => {
            let policy: ScopePolicy = a.policy.into();
            let cfg = GenerateConfig {
                train: a.train,
                test: a.test,
                policy,
                k: a.k,
                workers: a.workers,
                direction: match a.stage2_direction {
                    DirectionArg::TestAsCandidate => Stage2Direction::TestAsCandidate,
                    DirectionArg::TrainAsCandidate => Stage2Direction::TrainAsCandidate,
                },
                out: a.out,
            };
            let s = pipeline::cmd_generate(&cfg, |done, total| {
                if done == total || done % 250 == 0 {
                    eprintln!("[{policy}] {done}/{total}");
                }
            })?;
            eprintln!("[{policy}] finished in {:.2}s", s.elapsed.as_secs_f64());
            println!(
                "{} outcomes, {} without candidates -> {}, {}",
                s.outcomes,
                s.no_candidate,
                s.outcomes_file.display(),
                s.msg_file.display()
            );
        }
        Command::Evaluate(a) => {
            let e = pipeline::cmd_evaluate(&EvaluateConfig {
                test: a.test,
                outcomes: a.outcomes,
                out: a.out,
            })?;
            for m in &e.methods {
                println!("{}\n{}", m.name, m.origins.render_text());
            }
            print!("{}", e.comparison.render_text());
        }
        Command::Score(a) => {
            let b = pipeline::cmd_score(&a.candidate, &a.reference)?;
            println!("{}", pipeline::render_bleu(&b));
        }
        Command::SampleMappings(a) => {
            let sample = pipeline::cmd_sample_mappings(&SampleConfig {
                mapping: a.mapping,
                n: a.n,
                seed: a.seed,
                out: a.out,
            })?;
            print!("{}", pipeline::render_sample(&sample));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
