//! Commit datasets: loading the line-aligned `.diff`/`.msg` pairs, attaching
//! repository provenance, repository-size filtering and descriptive stats.

mod provenance;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil;

pub use provenance::{
    build_provenance, normalize_message, read_dump, read_mapping, sample_mappings, write_mapping,
    DumpFormat, MappingEntry, ProvenanceMapping, RawRecord,
};

/// Default kept-threshold for [`filter_by_repo_size`]: repositories with 50
/// or fewer training commits are dropped.
pub const DEFAULT_MIN_TRAIN_COMMITS: usize = 51;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        })
    }
}

/// Splits on ASCII whitespace. The upstream data is already tokenized, so no
/// case folding or punctuation handling happens here.
pub fn tokenize(line: &str) -> Vec<String> {
    line.split_ascii_whitespace().map(str::to_owned).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commit {
    /// Line ordinal in the original split files. Stable through enrichment
    /// and filtering.
    pub index: usize,
    pub diff_tokens: Vec<String>,
    pub msg_tokens: Vec<String>,
    /// `None` when provenance is unknown.
    pub repo: Option<String>,
    pub split: Split,
}

impl Commit {
    /// The message as a single-space-joined string, which is also its
    /// normalized form for provenance matching.
    pub fn message(&self) -> String {
        self.msg_tokens.join(" ")
    }

    pub fn diff(&self) -> String {
        self.diff_tokens.join(" ")
    }
}

/// An ordered commit collection with a repository index.
///
/// Commits are kept in strictly increasing `index` order, so ordering by
/// position and ordering by commit index agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    split: Split,
    commits: Vec<Commit>,
    positions: HashMap<usize, usize>,
    by_repo: BTreeMap<String, Vec<usize>>,
}

impl Corpus {
    pub fn new(split: Split, commits: Vec<Commit>) -> Result<Self> {
        let mut positions = HashMap::with_capacity(commits.len());
        let mut by_repo: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut prev: Option<usize> = None;
        for (pos, c) in commits.iter().enumerate() {
            if prev.is_some_and(|p| p >= c.index) {
                return Err(Error::InvalidCorpus(format!(
                    "commit indices must be strictly increasing (saw {} after {})",
                    c.index,
                    prev.unwrap()
                )));
            }
            prev = Some(c.index);
            if c.split != split {
                return Err(Error::InvalidCorpus(format!(
                    "commit {} belongs to split {} in a {split} corpus",
                    c.index, c.split
                )));
            }
            if c.diff_tokens.is_empty() || c.msg_tokens.is_empty() {
                return Err(Error::InvalidCorpus(format!(
                    "commit {} has an empty diff or message",
                    c.index
                )));
            }
            match &c.repo {
                Some(r) if r.is_empty() => {
                    return Err(Error::InvalidCorpus(format!(
                        "commit {} has an empty repository name",
                        c.index
                    )))
                }
                Some(r) => by_repo.entry(r.clone()).or_default().push(c.index),
                None => {}
            }
            positions.insert(c.index, pos);
        }
        Ok(Corpus {
            split,
            commits,
            positions,
            by_repo,
        })
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn commits(&self) -> &[Commit] {
        &self.commits
    }

    pub fn into_commits(self) -> Vec<Commit> {
        self.commits
    }

    pub fn len(&self) -> usize {
        self.commits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commits.is_empty()
    }

    /// Repository → commit indices, in index order.
    pub fn by_repo(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.by_repo
    }

    pub fn repo_size(&self, repo: &str) -> usize {
        self.by_repo.get(repo).map_or(0, Vec::len)
    }

    pub fn position_of(&self, index: usize) -> Option<usize> {
        self.positions.get(&index).copied()
    }

    pub fn get(&self, index: usize) -> Option<&Commit> {
        self.position_of(index).map(|p| &self.commits[p])
    }

    pub fn unknown_repo_count(&self) -> usize {
        self.commits.iter().filter(|c| c.repo.is_none()).count()
    }
}

/// A loaded split plus the line numbers rejected for being blank.
#[derive(Debug)]
pub struct LoadedSplit {
    pub corpus: Corpus,
    pub rejected_lines: Vec<usize>,
}

/// Loads a line-aligned `.diff`/`.msg` pair. Line `i` of each file forms
/// commit `i`; lines where either side is blank are skipped with a warning.
pub fn load_split(diff_file: &Path, msg_file: &Path, split: Split) -> Result<LoadedSplit> {
    let diffs = fsutil::read_lines(diff_file)?;
    let msgs = fsutil::read_lines(msg_file)?;
    if diffs.is_empty() {
        return Err(Error::EmptyFile(diff_file.to_path_buf()));
    }
    if msgs.is_empty() {
        return Err(Error::EmptyFile(msg_file.to_path_buf()));
    }
    if diffs.len() != msgs.len() {
        return Err(Error::LineCountMismatch {
            diff_path: diff_file.to_path_buf(),
            diff_lines: diffs.len(),
            msg_path: msg_file.to_path_buf(),
            msg_lines: msgs.len(),
        });
    }

    let mut commits = Vec::with_capacity(diffs.len());
    let mut rejected_lines = Vec::new();
    for (index, (d, m)) in diffs.iter().zip(&msgs).enumerate() {
        let diff_tokens = tokenize(d);
        let msg_tokens = tokenize(m);
        if diff_tokens.is_empty() || msg_tokens.is_empty() {
            warn!(
                "{} line {}: blank {}, record skipped",
                split,
                index + 1,
                if diff_tokens.is_empty() {
                    "diff"
                } else {
                    "message"
                }
            );
            rejected_lines.push(index);
            continue;
        }
        commits.push(Commit {
            index,
            diff_tokens,
            msg_tokens,
            repo: None,
            split,
        });
    }
    Ok(LoadedSplit {
        corpus: Corpus::new(split, commits)?,
        rejected_lines,
    })
}

/// Sets `repo` on every commit whose normalized message has a mapping entry.
pub fn enrich(corpus: Corpus, mapping: &ProvenanceMapping) -> Corpus {
    let split = corpus.split();
    let commits = corpus
        .into_commits()
        .into_iter()
        .map(|mut c| {
            if let Some(entry) = mapping.get(&c.message()) {
                c.repo = Some(entry.repo_id.clone());
            }
            c
        })
        .collect();
    Corpus::new(split, commits).expect("enrichment keeps corpus invariants")
}

/// Keeps only commits whose repository is known and has at least
/// `min_train_commits` commits in `train`; the same repository set is applied
/// to both splits.
pub fn filter_by_repo_size(
    train: &Corpus,
    test: &Corpus,
    min_train_commits: usize,
) -> Result<(Corpus, Corpus)> {
    let keep = |c: &Commit| {
        c.repo
            .as_deref()
            .is_some_and(|r| train.repo_size(r) >= min_train_commits)
    };
    let select = |corpus: &Corpus| -> Result<Corpus> {
        let kept: Vec<Commit> = corpus
            .commits()
            .iter()
            .filter(|c| keep(c))
            .cloned()
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyFilterResult(corpus.split()));
        }
        Corpus::new(corpus.split(), kept)
    };
    Ok((select(train)?, select(test)?))
}

/// Median with the mean-of-two-middle-values rule for even counts.
pub fn median(values: &[usize]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) as f64 / 2.0
    } else {
        v[mid] as f64
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub split: Split,
    pub commit_count: usize,
    pub repo_count: usize,
    pub per_repo_commit_counts: BTreeMap<String, usize>,
    /// `None` when no commit has a known repository.
    pub median_commits_per_repo: Option<f64>,
    pub median_msg_len_words: f64,
    /// Message length in words → number of commits.
    pub msg_len_histogram: BTreeMap<usize, usize>,
    pub unknown_repo_count: usize,
}

pub fn stats(corpus: &Corpus) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::InvalidCorpus("statistics of an empty corpus".into()));
    }
    let per_repo_commit_counts: BTreeMap<String, usize> = corpus
        .by_repo()
        .iter()
        .map(|(r, ix)| (r.clone(), ix.len()))
        .collect();
    let repo_sizes: Vec<usize> = per_repo_commit_counts.values().copied().collect();
    let lengths: Vec<usize> = corpus
        .commits()
        .iter()
        .map(|c| c.msg_tokens.len())
        .collect();
    let mut msg_len_histogram = BTreeMap::new();
    for &l in &lengths {
        *msg_len_histogram.entry(l).or_insert(0) += 1;
    }
    Ok(CorpusStats {
        split: corpus.split(),
        commit_count: corpus.len(),
        repo_count: per_repo_commit_counts.len(),
        median_commits_per_repo: median(&repo_sizes),
        median_msg_len_words: median(&lengths).expect("non-empty corpus"),
        per_repo_commit_counts,
        msg_len_histogram,
        unknown_repo_count: corpus.unknown_repo_count(),
    })
}

/// Aligned-column summary of one or more stats records.
pub fn render_stats_table(stats: &[CorpusStats]) -> String {
    let header = [
        "split",
        "commits",
        "repos",
        "unknown",
        "median/repo",
        "median msg len",
    ];
    let rows: Vec<[String; 6]> = stats
        .iter()
        .map(|s| {
            [
                s.split.to_string(),
                s.commit_count.to_string(),
                s.repo_count.to_string(),
                s.unknown_repo_count.to_string(),
                s.median_commits_per_repo
                    .map_or_else(|| "-".to_string(), |m| format!("{m}")),
                format!("{}", s.median_msg_len_words),
            ]
        })
        .collect();
    crate::table::render(&header, &rows)
}

/// One line of the enriched-corpus JSON Lines format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichedRecord {
    pub index: usize,
    pub repo: Option<String>,
    pub diff: String,
    pub msg: String,
}

pub fn write_enriched(corpus: &Corpus, path: &Path) -> Result<()> {
    fsutil::write_atomic(path, |w| {
        for c in corpus.commits() {
            let rec = EnrichedRecord {
                index: c.index,
                repo: c.repo.clone(),
                diff: c.diff(),
                msg: c.message(),
            };
            serde_json::to_writer(&mut *w, &rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read_enriched(path: &Path, split: Split) -> Result<Corpus> {
    let reader = fsutil::open(path)?;
    let mut commits = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EnrichedRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        commits.push(Commit {
            index: rec.index,
            diff_tokens: tokenize(&rec.diff),
            msg_tokens: tokenize(&rec.msg),
            repo: rec.repo,
            split,
        });
    }
    if commits.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Corpus::new(split, commits)
}
