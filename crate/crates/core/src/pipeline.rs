//! The file-staged experiment pipeline behind the `nngen` binary:
//! ingest → filter → generate → evaluate, plus `stats`, `score` and
//! `sample-mappings`.
//!
//! Every command validates its input paths before doing any work and writes
//! its outputs atomically.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::corpus::{
    self, build_provenance, enrich, filter_by_repo_size, load_split, read_dump, read_enriched,
    read_mapping, render_stats_table, sample_mappings, write_enriched, write_mapping, Corpus,
    CorpusStats, DumpFormat, MappingEntry, Split,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    compare, method_report, origin_analysis, Comparison, MethodReport, OriginBreakdown,
};
use crate::fsutil;
use crate::retrieval::{
    read_outcomes, write_generated_msgs, write_outcomes, Retriever, ScopePolicy, Stage2Direction,
};
use crate::textmetrics::{bleu4_corpus, BleuBreakdown};

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "input file {} does not exist",
            path.display()
        )))
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fsutil::write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

fn write_text(text: &str, path: &Path) -> Result<()> {
    fsutil::write_atomic(path, |w| w.write_all(text.as_bytes()))
}

/// Resolves a dataset name to its `.diff`/`.msg` pair. Accepts the bare
/// prefix (`data/train`) or either file of the pair.
pub fn dataset_files(name: &Path) -> (PathBuf, PathBuf) {
    let base = match name.extension().and_then(|e| e.to_str()) {
        Some("diff") | Some("msg") => name.with_extension(""),
        _ => name.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = base.clone().into_os_string();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    (with("diff"), with("msg"))
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub train: PathBuf,
    pub valid: Option<PathBuf>,
    pub test: PathBuf,
    pub dump: PathBuf,
    pub dump_format: DumpFormat,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub split: Split,
    pub commits: usize,
    pub rejected_lines: Vec<usize>,
    pub unknown_repo: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub splits: Vec<SplitSummary>,
    pub distinct_messages: usize,
    pub resolved_messages: usize,
    pub unresolved_messages: usize,
    pub unresolved_fraction: f64,
}

/// Loads the cleaned splits, maps their messages to repositories through
/// the raw dump and writes `<split>.jsonl`, `provenance.json` and
/// `ingest_summary.json` into `out`.
pub fn cmd_ingest(cfg: &IngestConfig) -> Result<IngestSummary> {
    let mut names = vec![(Split::Train, &cfg.train)];
    if let Some(v) = &cfg.valid {
        names.push((Split::Valid, v));
    }
    names.push((Split::Test, &cfg.test));

    let mut files = Vec::new();
    for (split, name) in names {
        let (d, m) = dataset_files(name);
        require_file(&d)?;
        require_file(&m)?;
        files.push((split, d, m));
    }
    require_file(&cfg.dump)?;

    let mut loaded = Vec::new();
    for (split, d, m) in &files {
        let l = load_split(d, m, *split)?;
        log::info!(
            "{split}: {} commits loaded, {} rejected",
            l.corpus.len(),
            l.rejected_lines.len()
        );
        loaded.push(l);
    }
    let mapping = build_provenance(
        loaded.iter().map(|l| &l.corpus),
        read_dump(&cfg.dump, cfg.dump_format)?,
    )?;

    let mut splits = Vec::new();
    for l in loaded {
        let corpus = enrich(l.corpus, &mapping);
        write_enriched(&corpus, &cfg.out.join(format!("{}.jsonl", corpus.split())))?;
        splits.push(SplitSummary {
            split: corpus.split(),
            commits: corpus.len(),
            rejected_lines: l.rejected_lines,
            unknown_repo: corpus.unknown_repo_count(),
        });
    }
    write_mapping(&mapping, &cfg.out.join("provenance.json"))?;
    let summary = IngestSummary {
        splits,
        distinct_messages: mapping.total_messages,
        resolved_messages: mapping.len(),
        unresolved_messages: mapping.unresolved_count,
        unresolved_fraction: mapping.unresolved_fraction(),
    };
    write_json(&summary, &cfg.out.join("ingest_summary.json"))?;
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    pub min_train_commits: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSummary {
    pub min_train_commits: usize,
    pub train_before: usize,
    pub test_before: usize,
    pub train_after: usize,
    pub test_after: usize,
    pub kept_repos: usize,
}

/// Writes the repository-size-filtered `train.jsonl` / `test.jsonl` and
/// `filter_summary.json` into `out`.
pub fn cmd_filter(cfg: &FilterConfig) -> Result<FilterSummary> {
    require_file(&cfg.train)?;
    require_file(&cfg.test)?;
    let train = read_enriched(&cfg.train, Split::Train)?;
    let test = read_enriched(&cfg.test, Split::Test)?;
    let (ftrain, ftest) = filter_by_repo_size(&train, &test, cfg.min_train_commits)?;
    write_enriched(&ftrain, &cfg.out.join("train.jsonl"))?;
    write_enriched(&ftest, &cfg.out.join("test.jsonl"))?;
    let summary = FilterSummary {
        min_train_commits: cfg.min_train_commits,
        train_before: train.len(),
        test_before: test.len(),
        train_after: ftrain.len(),
        test_after: ftest.len(),
        kept_repos: ftrain.by_repo().len(),
    };
    write_json(&summary, &cfg.out.join("filter_summary.json"))?;
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct StatsConfig {
    pub inputs: Vec<(Split, PathBuf)>,
    pub out: Option<PathBuf>,
}

/// Stats for each enriched input; with `out` set, also writes `stats.json`
/// and `stats.txt`.
pub fn cmd_stats(cfg: &StatsConfig) -> Result<(Vec<CorpusStats>, String)> {
    if cfg.inputs.is_empty() {
        return Err(Error::Config(
            "stats needs at least one of --train / --test".into(),
        ));
    }
    for (_, p) in &cfg.inputs {
        require_file(p)?;
    }
    let mut all = Vec::new();
    for (split, p) in &cfg.inputs {
        all.push(corpus::stats(&read_enriched(p, *split)?)?);
    }
    let text = render_stats_table(&all);
    if let Some(out) = &cfg.out {
        write_json(&all, &out.join("stats.json"))?;
        write_text(&text, &out.join("stats.txt"))?;
    }
    Ok((all, text))
}

#[derive(Debug, Clone)]
pub struct GenerateConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    pub policy: ScopePolicy,
    pub k: usize,
    pub workers: Option<usize>,
    pub direction: Stage2Direction,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSummary {
    pub policy: ScopePolicy,
    pub outcomes: usize,
    pub no_candidate: usize,
    pub outcomes_file: PathBuf,
    pub msg_file: PathBuf,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Retrieves a message for every test commit and writes
/// `<policy>.outcomes.jsonl` and `<policy>.msg` into `out`.
pub fn cmd_generate<F>(cfg: &GenerateConfig, progress: F) -> Result<GenerateSummary>
where
    F: Fn(usize, usize) + Sync,
{
    if cfg.k == 0 {
        return Err(Error::Config("--k must be at least 1".into()));
    }
    require_file(&cfg.train)?;
    require_file(&cfg.test)?;
    let train = read_enriched(&cfg.train, Split::Train)?;
    let test = read_enriched(&cfg.test, Split::Test)?;
    let started = Instant::now();
    let retriever = Retriever::new(&train)
        .with_k(cfg.k)
        .with_direction(cfg.direction);
    let total = test.len();
    let batch = retriever
        .run_batch_with_progress(&test, cfg.policy, cfg.workers, |done| progress(done, total))?;
    let elapsed = started.elapsed();

    let outcomes_file = cfg.out.join(format!("{}.outcomes.jsonl", cfg.policy));
    let msg_file = cfg.out.join(format!("{}.msg", cfg.policy));
    write_outcomes(&batch, &outcomes_file)?;
    write_generated_msgs(&batch, &test, &msg_file)?;
    Ok(GenerateSummary {
        policy: cfg.policy,
        outcomes: batch.outcomes.len(),
        no_candidate: batch.failures.len(),
        outcomes_file,
        msg_file,
        elapsed,
    })
}

#[derive(Debug, Clone)]
pub struct EvaluateConfig {
    pub test: PathBuf,
    pub outcomes: Vec<PathBuf>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEvaluation {
    pub name: String,
    pub origins: OriginBreakdown,
    pub report: MethodReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationOutput {
    pub methods: Vec<MethodEvaluation>,
    pub comparison: Comparison,
}

/// Name and policy of an outcomes file named `<policy>.outcomes.jsonl`.
/// Unrecognised names keep their stem and are treated as global runs.
fn method_of(path: &Path) -> (String, ScopePolicy) {
    let stem = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("outcomes")
        .trim_end_matches(".jsonl")
        .trim_end_matches(".outcomes")
        .to_string();
    match stem.parse::<ScopePolicy>() {
        Ok(p) => (p.method_name().to_string(), p),
        Err(_) => (stem, ScopePolicy::Global),
    }
}

/// Writes `origins_<method>.{json,txt}` per outcomes file and
/// `comparison.{json,txt}` into `out`.
pub fn cmd_evaluate(cfg: &EvaluateConfig) -> Result<EvaluationOutput> {
    if cfg.outcomes.is_empty() {
        return Err(Error::Config(
            "evaluate needs at least one --outcomes file".into(),
        ));
    }
    require_file(&cfg.test)?;
    for p in &cfg.outcomes {
        require_file(p)?;
    }
    let test = read_enriched(&cfg.test, Split::Test)?;
    let mut methods = Vec::new();
    for path in &cfg.outcomes {
        let (name, policy) = method_of(path);
        let batch = read_outcomes(path, policy)?;
        let origins = origin_analysis(&batch.outcomes, &test)?;
        let report = method_report(&name, &batch, &test)?;
        write_json(&origins, &cfg.out.join(format!("origins_{name}.json")))?;
        write_text(
            &origins.render_text(),
            &cfg.out.join(format!("origins_{name}.txt")),
        )?;
        methods.push(MethodEvaluation {
            name,
            origins,
            report,
        });
    }
    let comparison = compare(&methods.iter().map(|m| m.report.clone()).collect::<Vec<_>>());
    write_json(&comparison, &cfg.out.join("comparison.json"))?;
    write_text(&comparison.render_text(), &cfg.out.join("comparison.txt"))?;
    Ok(EvaluationOutput {
        methods,
        comparison,
    })
}

/// Corpus BLEU-4 of a candidate `.msg` file against a line-aligned
/// reference `.msg` file.
pub fn cmd_score(candidate: &Path, reference: &Path) -> Result<BleuBreakdown> {
    require_file(candidate)?;
    require_file(reference)?;
    let cands = fsutil::read_lines(candidate)?;
    let refs = fsutil::read_lines(reference)?;
    if cands.len() != refs.len() {
        return Err(Error::LineCountMismatch {
            diff_path: candidate.to_path_buf(),
            diff_lines: cands.len(),
            msg_path: reference.to_path_buf(),
            msg_lines: refs.len(),
        });
    }
    let cands: Vec<Vec<String>> = cands.iter().map(|l| corpus::tokenize(l)).collect();
    let refs: Vec<Vec<String>> = refs.iter().map(|l| corpus::tokenize(l)).collect();
    if let Some(line) = refs.iter().position(Vec::is_empty) {
        return Err(Error::Parse {
            path: reference.to_path_buf(),
            line: line + 1,
            message: "blank reference line".into(),
        });
    }
    bleu4_corpus(&cands, &refs)
}

pub fn render_bleu(b: &BleuBreakdown) -> String {
    format!(
        "BLEU_4 = {:.2}, p = {:.1}/{:.1}/{:.1}/{:.1} (BP = {:.4}, c = {}, r = {})",
        b.score,
        100.0 * b.precisions[0],
        100.0 * b.precisions[1],
        100.0 * b.precisions[2],
        100.0 * b.precisions[3],
        b.brevity_penalty,
        b.candidate_len,
        b.reference_len
    )
}

#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub mapping: PathBuf,
    pub n: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Draws mapping entries for manual review; with `out` set, also writes
/// them as tab-separated `message, repo_id, commit_id` lines to
/// `mapping_sample.tsv`.
pub fn cmd_sample_mappings(cfg: &SampleConfig) -> Result<Vec<MappingEntry>> {
    require_file(&cfg.mapping)?;
    let mapping = read_mapping(&cfg.mapping)?;
    let sample = sample_mappings(&mapping, cfg.n, cfg.seed)?;
    if let Some(out) = &cfg.out {
        write_text(&render_sample(&sample), &out.join("mapping_sample.tsv"))?;
    }
    Ok(sample)
}

pub fn render_sample(sample: &[MappingEntry]) -> String {
    sample
        .iter()
        .map(|e| format!("{}\t{}\t{}\n", e.message, e.repo_id, e.commit_id))
        .collect()
}

/// Reads an enriched corpus, mapping a missing file to a configuration
/// error.
pub fn load_enriched(path: &Path, split: Split) -> Result<Corpus> {
    require_file(path)?;
    read_enriched(path, split)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_file_resolution() {
        let (d, m) = dataset_files(Path::new("data/cleaned.train"));
        assert_eq!(d, Path::new("data/cleaned.train.diff"));
        assert_eq!(m, Path::new("data/cleaned.train.msg"));
        let (d, m) = dataset_files(Path::new("data/train.msg"));
        assert_eq!(d, Path::new("data/train.diff"));
        assert_eq!(m, Path::new("data/train.msg"));
    }

    #[test]
    fn method_names_from_files() {
        assert_eq!(
            method_of(Path::new("o/same-repo.outcomes.jsonl")).0,
            "Simple-NNGen"
        );
        assert_eq!(
            method_of(Path::new("o/global.outcomes.jsonl")).1,
            ScopePolicy::Global
        );
        assert_eq!(method_of(Path::new("o/custom.jsonl")).0, "custom");
    }
}
