//! Repository provenance by exact message match against a raw commit dump.
//!
//! Both sides are compared after [`normalize_message`]. When a message
//! occurs several times in the dump, the first record in file order wins.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};
use crate::fsutil;

/// Collapses whitespace runs to single spaces and trims both ends.
pub fn normalize_message(message: &str) -> String {
    message.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// One record of the raw commit dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub message: String,
    pub repo_id: String,
    pub commit_id: String,
}

/// Layout of the raw dump file.
///
/// Delimited records carry the fields `message, repo_id, commit_id`. If a
/// line has more than three fields, the last two are the repository and
/// commit ids and everything before them is the message. With `quoted` set,
/// fields may be wrapped in double quotes as in CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpFormat {
    Delimited {
        delimiter: u8,
        quoted: bool,
    },
    /// One JSON object per line with `message`, `repo_id`, `commit_id`.
    JsonLines,
}

impl DumpFormat {
    pub const TSV: DumpFormat = DumpFormat::Delimited {
        delimiter: b'\t',
        quoted: false,
    };
    pub const CSV: DumpFormat = DumpFormat::Delimited {
        delimiter: b',',
        quoted: true,
    };
}

/// Streams the raw dump in file order.
pub fn read_dump(
    path: &Path,
    format: DumpFormat,
) -> Result<Box<dyn Iterator<Item = Result<RawRecord>>>> {
    let reader = fsutil::open(path)?;
    let path: PathBuf = path.to_path_buf();
    match format {
        DumpFormat::JsonLines => Ok(Box::new(reader.lines().enumerate().filter_map(
            move |(i, line)| match line {
                Err(e) => Some(Err(Error::io(&path, e))),
                Ok(l) if l.trim().is_empty() => None,
                Ok(l) => Some(serde_json::from_str(&l).map_err(|e| Error::Parse {
                    path: path.clone(),
                    line: i + 1,
                    message: e.to_string(),
                })),
            },
        ))),
        DumpFormat::Delimited { delimiter, quoted } => {
            let rdr = csv::ReaderBuilder::new()
                .delimiter(delimiter)
                .has_headers(false)
                .flexible(true)
                .quoting(quoted)
                .from_reader(reader);
            let sep = (delimiter as char).to_string();
            Ok(Box::new(rdr.into_records().map(move |rec| {
                let rec = rec.map_err(|e| Error::Parse {
                    path: path.clone(),
                    line: e.position().map_or(0, |p| p.line() as usize),
                    message: e.to_string(),
                })?;
                let n = rec.len();
                if n < 3 {
                    return Err(Error::Parse {
                        path: path.clone(),
                        line: rec.position().map_or(0, |p| p.line() as usize),
                        message: format!("expected message, repo_id, commit_id; got {n} fields"),
                    });
                }
                let message = rec.iter().take(n - 2).collect::<Vec<_>>().join(&sep);
                Ok(RawRecord {
                    message,
                    repo_id: rec[n - 2].to_string(),
                    commit_id: rec[n - 1].to_string(),
                })
            })))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub repo_id: String,
    pub commit_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub message: String,
    pub repo_id: String,
    pub commit_id: String,
}

/// Normalized cleaned message → first matching raw record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceMapping {
    entries: BTreeMap<String, Provenance>,
    /// Distinct cleaned messages with no match in the dump.
    pub unresolved_count: usize,
    /// Distinct cleaned messages searched for.
    pub total_messages: usize,
}

impl ProvenanceMapping {
    pub fn get(&self, message: &str) -> Option<&Provenance> {
        self.entries.get(&normalize_message(message))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn unresolved_fraction(&self) -> f64 {
        if self.total_messages == 0 {
            0.0
        } else {
            self.unresolved_count as f64 / self.total_messages as f64
        }
    }

    /// Entries in message order.
    pub fn entries(&self) -> impl Iterator<Item = MappingEntry> + '_ {
        self.entries.iter().map(|(m, p)| MappingEntry {
            message: m.clone(),
            repo_id: p.repo_id.clone(),
            commit_id: p.commit_id.clone(),
        })
    }
}

/// Maps every distinct message of the cleaned corpora to the first raw dump
/// record with the same normalized message.
pub fn build_provenance<'a, C, D>(cleaned: C, dump: D) -> Result<ProvenanceMapping>
where
    C: IntoIterator<Item = &'a Corpus>,
    D: IntoIterator<Item = Result<RawRecord>>,
{
    let mut wanted: HashMap<String, Option<Provenance>> = HashMap::new();
    for corpus in cleaned {
        for c in corpus.commits() {
            wanted
                .entry(normalize_message(&c.message()))
                .or_insert(None);
        }
    }
    let total_messages = wanted.len();
    let mut resolved = 0;
    for record in dump {
        if resolved == total_messages {
            break;
        }
        let record = record?;
        if let Some(slot @ None) = wanted.get_mut(&normalize_message(&record.message)) {
            *slot = Some(Provenance {
                repo_id: record.repo_id,
                commit_id: record.commit_id,
            });
            resolved += 1;
        }
    }
    if resolved == 0 {
        return Err(Error::NoProvenanceMatches);
    }
    let entries: BTreeMap<String, Provenance> = wanted
        .into_iter()
        .filter_map(|(m, p)| p.map(|p| (m, p)))
        .collect();
    Ok(ProvenanceMapping {
        unresolved_count: total_messages - entries.len(),
        total_messages,
        entries,
    })
}

/// Draws `n` mapping entries uniformly without replacement, reproducibly
/// from `seed`, for manual review.
pub fn sample_mappings(
    mapping: &ProvenanceMapping,
    n: usize,
    seed: u64,
) -> Result<Vec<MappingEntry>> {
    if n > mapping.len() {
        return Err(Error::SampleTooLarge {
            requested: n,
            available: mapping.len(),
        });
    }
    let mut all: Vec<MappingEntry> = mapping.entries().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (picked, _) = all.partial_shuffle(&mut rng, n);
    Ok(picked.to_vec())
}

pub fn write_mapping(mapping: &ProvenanceMapping, path: &Path) -> Result<()> {
    fsutil::write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, mapping)?;
        w.write_all(b"\n")
    })
}

pub fn read_mapping(path: &Path) -> Result<ProvenanceMapping> {
    serde_json::from_reader(fsutil::open(path)?).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}
