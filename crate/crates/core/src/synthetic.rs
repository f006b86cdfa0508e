//! Seeded synthetic commit corpora for demos, tests and desk-scale
//! experiments.
//!
//! Every repository gets its own identifiers and message vocabulary, and
//! each commit belongs to one of the repository's recurring change topics.
//! Diffs are mostly drawn from a vocabulary shared by all repositories,
//! with a few topic and repository identifiers mixed in, so cosine
//! similarity alone often lands on look-alike diffs from other repositories.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Commit, Corpus, Split};

const SHARED_DIFF_VOCAB: &[&str] = &[
    "<nl>", "+", "-", "{", "}", "(", ")", ";", "=", "return", "if", "else", "for", "new", "null",
    "this", "public", "private", "void", "int", "String", "import", "@@", "final", "static",
    "true", "false", ".",
];

const VERBS: &[&str] = &["fix", "add", "update", "remove", "refactor", "use", "move"];

const FILLER: &[&str] = &["the", "in", "to", "for", "of", "."];

const GENERIC_MESSAGES: &[&str] = &[
    "fix typo",
    "update readme",
    "fix typo in documentation",
    "bump version number",
    "remove unused imports",
    "add missing license header",
];

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub repos: usize,
    pub train_per_repo: usize,
    pub test_per_repo: usize,
    /// Training commits with no repository attached.
    pub unknown_train: usize,
    pub topics_per_repo: usize,
    /// Tokens drawn from the shared vocabulary per diff.
    pub boilerplate_len: usize,
    /// Topic identifier tokens per diff.
    pub topic_tokens: usize,
    /// Repository-wide identifier tokens per diff.
    pub repo_tokens: usize,
    /// Probability of replacing one message token with a random repository
    /// word.
    pub message_noise: f64,
    /// Probability that a commit carries a generic message shared by all
    /// repositories instead of its topic message.
    pub generic_message_rate: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 42,
            repos: 8,
            train_per_repo: 60,
            test_per_repo: 15,
            unknown_train: 0,
            topics_per_repo: 6,
            boilerplate_len: 20,
            topic_tokens: 4,
            repo_tokens: 2,
            message_noise: 0.3,
            generic_message_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub train: Corpus,
    pub test: Corpus,
}

struct Topic {
    identifiers: Vec<String>,
    message: Vec<String>,
}

struct Repo {
    name: String,
    identifiers: Vec<String>,
    words: Vec<String>,
    topics: Vec<Topic>,
}

fn make_repo(r: usize, cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Repo {
    let words: Vec<String> = (0..12).map(|j| format!("r{r}w{j}")).collect();
    let topics = (0..cfg.topics_per_repo.max(1))
        .map(|t| {
            let identifiers = (0..4).map(|j| format!("r{r}t{t}id{j}")).collect();
            let mut message = vec![VERBS.choose(rng).unwrap().to_string()];
            let len = rng.random_range(3..=6);
            for _ in 0..len {
                if rng.random_bool(0.25) {
                    message.push(FILLER.choose(rng).unwrap().to_string());
                } else {
                    message.push(words.choose(rng).unwrap().clone());
                }
            }
            Topic {
                identifiers,
                message,
            }
        })
        .collect();
    Repo {
        name: format!("org{r}/project{r}"),
        identifiers: (0..6).map(|j| format!("r{r}pkg{j}")).collect(),
        words,
        topics,
    }
}

fn make_commit(
    repo: &Repo,
    cfg: &SyntheticConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<String>, Vec<String>) {
    let topic = repo.topics.choose(rng).unwrap();
    let mut diff: Vec<String> = (0..cfg.boilerplate_len.max(1))
        .map(|_| SHARED_DIFF_VOCAB.choose(rng).unwrap().to_string())
        .collect();
    for _ in 0..cfg.topic_tokens {
        let at = rng.random_range(0..=diff.len());
        diff.insert(at, topic.identifiers.choose(rng).unwrap().clone());
    }
    for _ in 0..cfg.repo_tokens {
        let at = rng.random_range(0..=diff.len());
        diff.insert(at, repo.identifiers.choose(rng).unwrap().clone());
    }
    if rng.random_bool(cfg.generic_message_rate.clamp(0.0, 1.0)) {
        let generic = GENERIC_MESSAGES.choose(rng).unwrap();
        return (diff, generic.split(' ').map(str::to_owned).collect());
    }
    let mut msg = topic.message.clone();
    if rng.random_bool(cfg.message_noise.clamp(0.0, 1.0)) {
        let at = rng.random_range(0..msg.len());
        msg[at] = repo.words.choose(rng).unwrap().clone();
    }
    (diff, msg)
}

/// Builds a train/test pair from `cfg`. Identical configs give identical
/// corpora.
pub fn generate(cfg: &SyntheticConfig) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let repos: Vec<Repo> = (0..cfg.repos)
        .map(|r| make_repo(r, cfg, &mut rng))
        .collect();

    let build = |split: Split, per_repo: usize, unknown: usize, rng: &mut ChaCha8Rng| {
        let mut raw: Vec<(Option<String>, Vec<String>, Vec<String>)> = Vec::new();
        for repo in &repos {
            for _ in 0..per_repo {
                let (d, m) = make_commit(repo, cfg, rng);
                raw.push((Some(repo.name.clone()), d, m));
            }
        }
        for _ in 0..unknown {
            let repo = repos.choose(rng).expect("at least one repository");
            let (d, m) = make_commit(repo, cfg, rng);
            raw.push((None, d, m));
        }
        raw.shuffle(rng);
        let commits = raw
            .into_iter()
            .enumerate()
            .map(|(index, (repo, diff_tokens, msg_tokens))| Commit {
                index,
                diff_tokens,
                msg_tokens,
                repo,
                split,
            })
            .collect();
        Corpus::new(split, commits).expect("synthetic commits are well formed")
    };
    let train = build(
        Split::Train,
        cfg.train_per_repo,
        cfg.unknown_train,
        &mut rng,
    );
    let test = build(Split::Test, cfg.test_per_repo, 0, &mut rng);
    SyntheticData { train, test }
}
