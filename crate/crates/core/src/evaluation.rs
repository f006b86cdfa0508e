//! Per-origin analysis of retrieval outcomes and per-method BLEU reports.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::retrieval::{BatchOutput, Origin, RetrievalOutcome};
use crate::table;
use crate::textmetrics::{bleu4_corpus, bleu4_sentence, BleuBreakdown};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginEntry {
    pub origin: Origin,
    pub count: usize,
    pub ratio: f64,
    /// Mean sentence BLEU-4 of generated vs reference messages; `None` for
    /// an origin with no outcomes.
    pub mbleu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginBreakdown {
    pub total: usize,
    /// Mean sentence BLEU-4 over every outcome.
    pub overall_mbleu: Option<f64>,
    /// One entry per origin, in [`Origin::ALL`] order.
    pub entries: Vec<OriginEntry>,
}

impl OriginBreakdown {
    pub fn entry(&self, origin: Origin) -> &OriginEntry {
        self.entries
            .iter()
            .find(|e| e.origin == origin)
            .expect("every origin has an entry")
    }

    /// Text table with the columns Origin / ORG_R / MBLEU.
    pub fn render_text(&self) -> String {
        let fmt_mbleu = |m: Option<f64>| m.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
        let mut rows = vec![[
            "full test dataset".to_string(),
            self.total.to_string(),
            fmt_mbleu(self.overall_mbleu),
        ]];
        for e in &self.entries {
            rows.push([
                e.origin.label().to_string(),
                format!("{}/{} ({:.0}%)", e.count, self.total, 100.0 * e.ratio),
                fmt_mbleu(e.mbleu),
            ]);
        }
        table::render(&["Origin", "ORG_R", "MBLEU"], &rows)
    }
}

fn reference_of(references: &Corpus, test_index: usize) -> Result<&[String]> {
    references
        .get(test_index)
        .map(|c| c.msg_tokens.as_slice())
        .ok_or_else(|| {
            Error::Alignment(format!(
                "outcome for test index {test_index} has no reference commit"
            ))
        })
}

fn sentence_score(o: &RetrievalOutcome, references: &Corpus) -> Result<f64> {
    Ok(bleu4_sentence(
        &o.generated_msg_tokens,
        reference_of(references, o.test_index)?,
    )?
    .score)
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Partitions outcomes by origin and computes each origin's share and mean
/// sentence BLEU-4.
pub fn origin_analysis(
    outcomes: &[RetrievalOutcome],
    references: &Corpus,
) -> Result<OriginBreakdown> {
    let total = outcomes.len();
    let mut all = Vec::with_capacity(total);
    let mut per_origin: [Vec<f64>; 3] = Default::default();
    for o in outcomes {
        let s = sentence_score(o, references)?;
        all.push(s);
        let slot = Origin::ALL
            .iter()
            .position(|x| *x == o.origin)
            .expect("known origin");
        per_origin[slot].push(s);
    }
    let entries = Origin::ALL
        .iter()
        .zip(&per_origin)
        .map(|(&origin, scores)| OriginEntry {
            origin,
            count: scores.len(),
            ratio: if total == 0 {
                0.0
            } else {
                scores.len() as f64 / total as f64
            },
            mbleu: mean(scores),
        })
        .collect();
    Ok(OriginBreakdown {
        total,
        overall_mbleu: mean(&all),
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    /// Corpus-level BLEU-4; `None` when no test commit produced an outcome.
    pub bleu: Option<BleuBreakdown>,
    pub mean_sentence_bleu: Option<f64>,
    pub outcome_count: usize,
    pub no_candidate_count: usize,
}

impl MethodReport {
    pub fn score(&self) -> f64 {
        self.bleu.map_or(0.0, |b| b.score)
    }
}

/// Checks that every test commit of `references` appears exactly once in
/// `batch`, as an outcome or as a failure.
fn check_alignment(batch: &BatchOutput, references: &Corpus) -> Result<()> {
    if batch.len() != references.len() {
        return Err(Error::Alignment(format!(
            "{} outcomes + {} failures for {} reference commits",
            batch.outcomes.len(),
            batch.failures.len(),
            references.len()
        )));
    }
    let mut seen = HashSet::with_capacity(batch.len());
    let indices = batch
        .outcomes
        .iter()
        .map(|o| o.test_index)
        .chain(batch.failures.iter().map(|f| f.test_index));
    for i in indices {
        if references.get(i).is_none() {
            return Err(Error::Alignment(format!(
                "test index {i} has no reference commit"
            )));
        }
        if !seen.insert(i) {
            return Err(Error::Alignment(format!(
                "test index {i} appears more than once"
            )));
        }
    }
    Ok(())
}

/// Corpus-level BLEU-4 of a method's generated messages against the
/// reference messages. Test commits without candidates are counted but
/// left out of the scores.
pub fn method_report(name: &str, batch: &BatchOutput, references: &Corpus) -> Result<MethodReport> {
    check_alignment(batch, references)?;
    let mut cands = Vec::with_capacity(batch.outcomes.len());
    let mut refs = Vec::with_capacity(batch.outcomes.len());
    let mut sentence = Vec::with_capacity(batch.outcomes.len());
    for o in &batch.outcomes {
        let r = reference_of(references, o.test_index)?;
        sentence.push(bleu4_sentence(&o.generated_msg_tokens, r)?.score);
        cands.push(o.generated_msg_tokens.as_slice());
        refs.push(r);
    }
    let bleu = if cands.is_empty() {
        None
    } else {
        Some(bleu4_corpus(&cands, &refs)?)
    };
    Ok(MethodReport {
        method: name.to_string(),
        bleu,
        mean_sentence_bleu: mean(&sentence),
        outcome_count: batch.outcomes.len(),
        no_candidate_count: batch.failures.len(),
    })
}

/// Method reports ranked by corpus BLEU-4, highest first. Ties keep input
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<MethodReport>,
}

impl Comparison {
    pub fn ranking(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.method.as_str()).collect()
    }

    /// Text table with the columns Method / BLEU_4 / p1..p4, precisions in
    /// percent.
    pub fn render_text(&self) -> String {
        let rows: Vec<[String; 9]> = self
            .rows
            .iter()
            .map(|r| {
                let mut row: [String; 9] = Default::default();
                row[0] = r.method.clone();
                match &r.bleu {
                    Some(b) => {
                        row[1] = format!("{:.2}", b.score);
                        for i in 0..4 {
                            row[2 + i] = format!("{:.1}", 100.0 * b.precisions[i]);
                        }
                    }
                    None => row[1..6].iter_mut().for_each(|c| *c = "-".into()),
                }
                row[6] = r
                    .mean_sentence_bleu
                    .map_or_else(|| "-".into(), |m| format!("{m:.2}"));
                row[7] = r.outcome_count.to_string();
                row[8] = r.no_candidate_count.to_string();
                row
            })
            .collect();
        table::render(
            &[
                "Method",
                "BLEU_4",
                "p1",
                "p2",
                "p3",
                "p4",
                "mean sent. BLEU",
                "outcomes",
                "no candidate",
            ],
            &rows,
        )
    }
}

pub fn compare(reports: &[MethodReport]) -> Comparison {
    let mut rows = reports.to_vec();
    rows.sort_by(|a, b| b.score().total_cmp(&a.score()));
    Comparison { rows }
}
