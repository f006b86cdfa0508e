//! Two-stage nearest-neighbour message retrieval.
//!
//! Stage one ranks the training diffs in scope by cosine similarity of raw
//! term-frequency vectors and keeps the top `k`. Stage two re-ranks those by
//! sentence BLEU-4 between the test diff and each candidate diff; the winner's
//! message is the generated message.
//!
//! Both stages break ties towards the earlier stage-one rank, and stage one
//! breaks ties towards the lower training index. Cosines are compared as
//! exact rationals (`dot² / (‖u‖²‖v‖²)` on integers), so equal similarities
//! always tie regardless of floating-point rounding.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Commit, Corpus};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::textmetrics::{bleu4_profiles, NgramProfiles};

/// Number of stage-one candidates re-ranked by BLEU.
pub const DEFAULT_K: usize = 5;

/// Bag-of-words term counts of a diff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseTermVector {
    counts: HashMap<String, u32>,
    squared_norm: u64,
}

impl SparseTermVector {
    pub fn counts(&self) -> &HashMap<String, u32> {
        &self.counts
    }

    pub fn squared_norm(&self) -> u64 {
        self.squared_norm
    }

    pub fn norm(&self) -> f64 {
        (self.squared_norm as f64).sqrt()
    }
}

pub fn vectorize<S: AsRef<str>>(tokens: &[S]) -> Result<SparseTermVector> {
    if tokens.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts: HashMap<String, u32> = HashMap::new();
    for t in tokens {
        *counts.entry(t.as_ref().to_owned()).or_insert(0) += 1;
    }
    let squared_norm = counts.values().map(|&c| u64::from(c) * u64::from(c)).sum();
    Ok(SparseTermVector {
        counts,
        squared_norm,
    })
}

pub fn dot(u: &SparseTermVector, v: &SparseTermVector) -> u64 {
    let (small, large) = if u.counts.len() <= v.counts.len() {
        (u, v)
    } else {
        (v, u)
    };
    small
        .counts
        .iter()
        .filter_map(|(t, &a)| large.counts.get(t).map(|&b| u64::from(a) * u64::from(b)))
        .sum()
}

fn cosine_value(dot: u64, sq_u: u64, sq_v: u64) -> f64 {
    let denom = ((u128::from(sq_u) * u128::from(sq_v)) as f64).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (dot as f64 / denom).min(1.0)
    }
}

pub fn cosine(u: &SparseTermVector, v: &SparseTermVector) -> f64 {
    cosine_value(dot(u, v), u.squared_norm, v.squared_norm)
}

/// A stage-one score against a fixed query vector.
#[derive(Debug, Clone, Copy)]
struct Similarity {
    index: usize,
    dot: u64,
    other_sq: u64,
}

impl Similarity {
    /// Descending similarity, then ascending index. The query norm is common
    /// to both sides, so `dot_a² · ‖b‖² ⋚ dot_b² · ‖a‖²` decides.
    fn rank(&self, other: &Similarity) -> Ordering {
        let lhs = u128::from(self.dot) * u128::from(self.dot) * u128::from(other.other_sq);
        let rhs = u128::from(other.dot) * u128::from(other.dot) * u128::from(self.other_sq);
        rhs.cmp(&lhs).then(self.index.cmp(&other.index))
    }
}

/// Bounded insertion keeping the best `k` similarities in rank order.
struct TopK {
    k: usize,
    items: Vec<Similarity>,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, s: Similarity) {
        if self.items.len() == self.k
            && self
                .items
                .last()
                .is_some_and(|worst| s.rank(worst) != Ordering::Less)
        {
            return;
        }
        let at = self.items.partition_point(|x| x.rank(&s) == Ordering::Less);
        self.items.insert(at, s);
        self.items.truncate(self.k);
    }
}

/// The `k` pool members most cosine-similar to `test`, ordered by cosine
/// descending then index ascending. A pool smaller than `k` is returned
/// whole.
pub fn top_k_cosine<'a, I>(test: &SparseTermVector, pool: I, k: usize) -> Vec<(usize, f64)>
where
    I: IntoIterator<Item = (usize, &'a SparseTermVector)>,
{
    let mut top = TopK::new(k.max(1));
    for (index, v) in pool {
        top.offer(Similarity {
            index,
            dot: dot(test, v),
            other_sq: v.squared_norm,
        });
    }
    top.items
        .into_iter()
        .map(|s| (s.index, cosine_value(s.dot, test.squared_norm, s.other_sq)))
        .collect()
}

/// Which training commits a test commit may retrieve from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopePolicy {
    /// All training commits.
    Global,
    /// Only commits of the test commit's repository.
    SameRepo,
    /// Every commit outside the test commit's repository, including
    /// commits of unknown provenance.
    ExcludeRepo,
}

impl ScopePolicy {
    pub const ALL: [ScopePolicy; 3] = [
        ScopePolicy::Global,
        ScopePolicy::SameRepo,
        ScopePolicy::ExcludeRepo,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScopePolicy::Global => "global",
            ScopePolicy::SameRepo => "same-repo",
            ScopePolicy::ExcludeRepo => "exclude-repo",
        }
    }

    /// Conventional method name for reports.
    pub fn method_name(&self) -> &'static str {
        match self {
            ScopePolicy::Global => "NNGen",
            ScopePolicy::SameRepo => "Simple-NNGen",
            ScopePolicy::ExcludeRepo => "EXC-NNGen",
        }
    }
}

impl fmt::Display for ScopePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScopePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScopePolicy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown policy {s:?}; expected global, same-repo or exclude-repo"
                ))
            })
    }
}

/// Which side plays the BLEU candidate in stage two.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage2Direction {
    #[default]
    TestAsCandidate,
    TrainAsCandidate,
}

/// Where the chosen neighbour comes from relative to the test commit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    SameRepo,
    OtherRepo,
    UnknownRepo,
}

impl Origin {
    pub const ALL: [Origin; 3] = [Origin::SameRepo, Origin::OtherRepo, Origin::UnknownRepo];

    pub fn classify(test_repo: Option<&str>, neighbor_repo: Option<&str>) -> Origin {
        match (test_repo, neighbor_repo) {
            (Some(a), Some(b)) if a == b => Origin::SameRepo,
            (Some(_), Some(_)) => Origin::OtherRepo,
            _ => Origin::UnknownRepo,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Origin::SameRepo => "same repository",
            Origin::OtherRepo => "other repository",
            Origin::UnknownRepo => "unknown repository",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalOutcome {
    pub test_index: usize,
    pub neighbor_index: usize,
    pub generated_msg_tokens: Vec<String>,
    /// Stage-one cosine of the chosen neighbour.
    pub cosine: f64,
    /// Stage-two BLEU-4 (0–100) of the chosen neighbour.
    pub stage2_bleu: f64,
    pub origin: Origin,
    pub candidate_pool_size: usize,
}

/// Why a test commit had nothing to retrieve from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoCandidateReason {
    UnknownTestRepo,
    RepoAbsentFromTraining { repo: String },
    EmptyPool,
}

impl fmt::Display for NoCandidateReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoCandidateReason::UnknownTestRepo => f.write_str("test commit repository is unknown"),
            NoCandidateReason::RepoAbsentFromTraining { repo } => {
                write!(f, "repository {repo} has no training commits")
            }
            NoCandidateReason::EmptyPool => f.write_str("no training commits in scope"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("test commit {test_index}: {reason}")]
pub struct NoCandidates {
    pub test_index: usize,
    pub reason: NoCandidateReason,
}

/// Per-run results: one entry per test commit, either an outcome or a
/// no-candidate failure, both in test order.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub policy: ScopePolicy,
    pub outcomes: Vec<RetrievalOutcome>,
    pub failures: Vec<NoCandidates>,
}

impl BatchOutput {
    pub fn len(&self) -> usize {
        self.outcomes.len() + self.failures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Immutable retrieval index over a training corpus.
pub struct Retriever<'a> {
    train: &'a Corpus,
    vocab: HashMap<&'a str, u32>,
    /// Per training commit: (term id, count) sorted by term id.
    vectors: Vec<Vec<(u32, u32)>>,
    squared_norms: Vec<u64>,
    /// Per term id: (training position, count).
    postings: Vec<Vec<(u32, u32)>>,
    repo_positions: HashMap<&'a str, Vec<usize>>,
    k: usize,
    direction: Stage2Direction,
}

impl<'a> Retriever<'a> {
    pub fn new(train: &'a Corpus) -> Self {
        let mut vocab: HashMap<&'a str, u32> = HashMap::new();
        let mut vectors = Vec::with_capacity(train.len());
        let mut squared_norms = Vec::with_capacity(train.len());
        let mut postings: Vec<Vec<(u32, u32)>> = Vec::new();
        let mut repo_positions: HashMap<&'a str, Vec<usize>> = HashMap::new();

        for (pos, commit) in train.commits().iter().enumerate() {
            let mut counts: HashMap<u32, u32> = HashMap::new();
            for tok in &commit.diff_tokens {
                let next = vocab.len() as u32;
                let id = *vocab.entry(tok.as_str()).or_insert(next);
                *counts.entry(id).or_insert(0) += 1;
            }
            let mut v: Vec<(u32, u32)> = counts.into_iter().collect();
            v.sort_unstable();
            postings.resize_with(vocab.len(), Vec::new);
            for &(id, c) in &v {
                postings[id as usize].push((pos as u32, c));
            }
            squared_norms.push(v.iter().map(|&(_, c)| u64::from(c) * u64::from(c)).sum());
            vectors.push(v);
            if let Some(repo) = commit.repo.as_deref() {
                repo_positions.entry(repo).or_default().push(pos);
            }
        }

        Retriever {
            train,
            vocab,
            vectors,
            squared_norms,
            postings,
            repo_positions,
            k: DEFAULT_K,
            direction: Stage2Direction::default(),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k.max(1);
        self
    }

    pub fn with_direction(mut self, direction: Stage2Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn train(&self) -> &'a Corpus {
        self.train
    }

    /// Test vector restricted to the training vocabulary, plus its full
    /// squared norm.
    fn query(&self, tokens: &[String]) -> (Vec<(u32, u32)>, u64) {
        let mut known: HashMap<u32, u32> = HashMap::new();
        let mut all: HashMap<&str, u32> = HashMap::new();
        for t in tokens {
            *all.entry(t.as_str()).or_insert(0) += 1;
            if let Some(&id) = self.vocab.get(t.as_str()) {
                *known.entry(id).or_insert(0) += 1;
            }
        }
        let sq = all.values().map(|&c| u64::from(c) * u64::from(c)).sum();
        let mut q: Vec<(u32, u32)> = known.into_iter().collect();
        q.sort_unstable();
        (q, sq)
    }

    fn merge_dot(a: &[(u32, u32)], b: &[(u32, u32)]) -> u64 {
        let (mut i, mut j, mut acc) = (0, 0, 0u64);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    acc += u64::from(a[i].1) * u64::from(b[j].1);
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Training positions in scope for `test`, in ascending order.
    fn pool(
        &self,
        test: &Commit,
        policy: ScopePolicy,
    ) -> std::result::Result<Vec<usize>, NoCandidateReason> {
        let pool: Vec<usize> = match policy {
            ScopePolicy::Global => (0..self.train.len()).collect(),
            ScopePolicy::SameRepo => {
                let repo = test
                    .repo
                    .as_deref()
                    .ok_or(NoCandidateReason::UnknownTestRepo)?;
                self.repo_positions.get(repo).cloned().ok_or_else(|| {
                    NoCandidateReason::RepoAbsentFromTraining {
                        repo: repo.to_owned(),
                    }
                })?
            }
            ScopePolicy::ExcludeRepo => {
                let repo = test
                    .repo
                    .as_deref()
                    .ok_or(NoCandidateReason::UnknownTestRepo)?;
                (0..self.train.len())
                    .filter(|&p| self.train.commits()[p].repo.as_deref() != Some(repo))
                    .collect()
            }
        };
        if pool.is_empty() {
            Err(NoCandidateReason::EmptyPool)
        } else {
            Ok(pool)
        }
    }

    /// Stage one over an explicit pool of training positions: returns
    /// `(position, dot)` pairs in rank order, at most `k` of them.
    fn stage_one(&self, query: &[(u32, u32)], pool: &[usize]) -> Vec<(usize, u64)> {
        let mut top = TopK::new(self.k);
        let n = self.train.len();
        if pool.len() * 4 >= n {
            let mut acc = vec![0u64; n];
            for &(id, qc) in query {
                for &(pos, c) in &self.postings[id as usize] {
                    acc[pos as usize] += u64::from(qc) * u64::from(c);
                }
            }
            for &pos in pool {
                top.offer(Similarity {
                    index: pos,
                    dot: acc[pos],
                    other_sq: self.squared_norms[pos],
                });
            }
        } else {
            for &pos in pool {
                top.offer(Similarity {
                    index: pos,
                    dot: Self::merge_dot(query, &self.vectors[pos]),
                    other_sq: self.squared_norms[pos],
                });
            }
        }
        top.items.into_iter().map(|s| (s.index, s.dot)).collect()
    }

    /// Retrieves the nearest training commit for `test` under `policy`.
    pub fn generate(
        &self,
        test: &Commit,
        policy: ScopePolicy,
    ) -> std::result::Result<RetrievalOutcome, NoCandidates> {
        let fail = |reason| NoCandidates {
            test_index: test.index,
            reason,
        };
        let pool = self.pool(test, policy).map_err(fail)?;
        let (query, test_sq) = self.query(&test.diff_tokens);
        let candidates = self.stage_one(&query, &pool);

        let test_profiles = NgramProfiles::new(&test.diff_tokens);
        let mut best: Option<(usize, u64, f64)> = None;
        for &(pos, dot) in &candidates {
            let train_profiles = NgramProfiles::new(&self.train.commits()[pos].diff_tokens);
            let bleu = match self.direction {
                Stage2Direction::TestAsCandidate => bleu4_profiles(&test_profiles, &train_profiles),
                Stage2Direction::TrainAsCandidate => {
                    bleu4_profiles(&train_profiles, &test_profiles)
                }
            }
            .expect("corpus diffs are non-empty")
            .score;
            if best.is_none_or(|(_, _, b)| bleu > b) {
                best = Some((pos, dot, bleu));
            }
        }
        let (pos, dot, stage2_bleu) = best.ok_or_else(|| fail(NoCandidateReason::EmptyPool))?;
        let neighbor = &self.train.commits()[pos];
        Ok(RetrievalOutcome {
            test_index: test.index,
            neighbor_index: neighbor.index,
            generated_msg_tokens: neighbor.msg_tokens.clone(),
            cosine: cosine_value(dot, test_sq, self.squared_norms[pos]),
            stage2_bleu,
            origin: Origin::classify(test.repo.as_deref(), neighbor.repo.as_deref()),
            candidate_pool_size: pool.len(),
        })
    }

    /// Runs [`Retriever::generate`] for every test commit on `workers`
    /// threads (all available cores when `None`). The result does not depend
    /// on the worker count.
    pub fn run_batch(
        &self,
        test: &Corpus,
        policy: ScopePolicy,
        workers: Option<usize>,
    ) -> Result<BatchOutput> {
        self.run_batch_with_progress(test, policy, workers, |_| {})
    }

    /// As [`Retriever::run_batch`], calling `progress` with the number of
    /// finished test commits after each one.
    pub fn run_batch_with_progress<F>(
        &self,
        test: &Corpus,
        policy: ScopePolicy,
        workers: Option<usize>,
        progress: F,
    ) -> Result<BatchOutput>
    where
        F: Fn(usize) + Sync,
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = workers {
            builder = builder.num_threads(w.max(1));
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let done = AtomicUsize::new(0);
        let results: Vec<_> = pool.install(|| {
            test.commits()
                .par_iter()
                .map(|c| {
                    let r = self.generate(c, policy);
                    progress(done.fetch_add(1, AtomicOrdering::Relaxed) + 1);
                    r
                })
                .collect()
        });
        let mut out = BatchOutput {
            policy,
            outcomes: Vec::with_capacity(results.len()),
            failures: Vec::new(),
        };
        for r in results {
            match r {
                Ok(o) => out.outcomes.push(o),
                Err(e) => out.failures.push(e),
            }
        }
        Ok(out)
    }
}

/// One-off retrieval that builds a fresh index over `train`.
pub fn nn_generate(
    test: &Commit,
    train: &Corpus,
    policy: ScopePolicy,
    k: usize,
) -> std::result::Result<RetrievalOutcome, NoCandidates> {
    Retriever::new(train).with_k(k).generate(test, policy)
}

/// One line of the outcomes JSON Lines file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OutcomeRecord {
    Found {
        test_index: usize,
        neighbor_index: usize,
        cosine: f64,
        stage2_bleu: f64,
        origin: Origin,
        generated_msg: String,
        candidate_pool_size: usize,
    },
    Failed {
        test_index: usize,
        error: NoCandidateReason,
    },
}

/// Writes all outcomes and failures ordered by test index.
pub fn write_outcomes(batch: &BatchOutput, path: &Path) -> Result<()> {
    let mut records: Vec<(usize, OutcomeRecord)> = batch
        .outcomes
        .iter()
        .map(|o| {
            (
                o.test_index,
                OutcomeRecord::Found {
                    test_index: o.test_index,
                    neighbor_index: o.neighbor_index,
                    cosine: o.cosine,
                    stage2_bleu: o.stage2_bleu,
                    origin: o.origin,
                    generated_msg: o.generated_msg_tokens.join(" "),
                    candidate_pool_size: o.candidate_pool_size,
                },
            )
        })
        .chain(batch.failures.iter().map(|f| {
            (
                f.test_index,
                OutcomeRecord::Failed {
                    test_index: f.test_index,
                    error: f.reason.clone(),
                },
            )
        }))
        .collect();
    records.sort_by_key(|(i, _)| *i);
    fsutil::write_atomic(path, |w| {
        for (_, r) in &records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read_outcomes(path: &Path, policy: ScopePolicy) -> Result<BatchOutput> {
    let mut out = BatchOutput {
        policy,
        outcomes: Vec::new(),
        failures: Vec::new(),
    };
    for (lineno, line) in fsutil::open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: OutcomeRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        match rec {
            OutcomeRecord::Found {
                test_index,
                neighbor_index,
                cosine,
                stage2_bleu,
                origin,
                generated_msg,
                candidate_pool_size,
            } => out.outcomes.push(RetrievalOutcome {
                test_index,
                neighbor_index,
                generated_msg_tokens: tokenize(&generated_msg),
                cosine,
                stage2_bleu,
                origin,
                candidate_pool_size,
            }),
            OutcomeRecord::Failed { test_index, error } => out.failures.push(NoCandidates {
                test_index,
                reason: error,
            }),
        }
    }
    Ok(out)
}

/// Plain `.msg` file of generated messages, one line per test commit of
/// `test` in order; commits without an outcome get an empty line.
pub fn write_generated_msgs(batch: &BatchOutput, test: &Corpus, path: &Path) -> Result<()> {
    let by_index: HashMap<usize, &RetrievalOutcome> =
        batch.outcomes.iter().map(|o| (o.test_index, o)).collect();
    fsutil::write_atomic(path, |w| {
        for c in test.commits() {
            if let Some(o) = by_index.get(&c.index) {
                w.write_all(o.generated_msg_tokens.join(" ").as_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}
