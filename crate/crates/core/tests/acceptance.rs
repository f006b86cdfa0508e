//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criteria 1–7 run on generated data. Criteria 8–12 need the public cleaned
//! dataset and raw commit dump and are skipped unless `NNGEN_DATA_DIR` is
//! set; see the README for the expected layout.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::{oracle_generate, random_tokens, tie_heavy_corpus, toks};
use nngen::corpus::{
    self, build_provenance, enrich, filter_by_repo_size, load_split, read_dump, Corpus, DumpFormat,
    Split,
};
use nngen::evaluation::{compare, method_report, origin_analysis, MethodReport, OriginBreakdown};
use nngen::retrieval::{cosine, nn_generate, vectorize, write_outcomes, BatchOutput, Origin};
use nngen::synthetic::{generate, SyntheticConfig};
use nngen::textmetrics::{bleu4_sentence, brevity_penalty};
use nngen::{Retriever, ScopePolicy};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------------------
// 1. BLEU identities
// ---------------------------------------------------------------------------

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut failures = Vec::new();
    for i in 0..100 {
        let x = random_tokens(&mut rng, 4, 30, 50, "w");
        let s = bleu4_sentence(&x, &x).unwrap().score;
        if s != 100.0 {
            failures.push(format!("identity #{i} scored {s}"));
        }
    }
    for i in 0..100 {
        let a = random_tokens(&mut rng, 1, 30, 50, "a");
        let b = random_tokens(&mut rng, 1, 30, 50, "b");
        let s = bleu4_sentence(&a, &b).unwrap().score;
        if s != 0.0 {
            failures.push(format!("disjoint #{i} scored {s}"));
        }
    }
    let hand = bleu4_sentence(&toks("a b c d e"), &toks("a b c d f"))
        .unwrap()
        .score;
    if (hand - 66.87).abs() > 0.01 {
        failures.push(format!("hand pair scored {hand}"));
    }
    check(
        failures.is_empty(),
        format!("100 identities = 100, 100 disjoint = 0, hand pair = {hand:.4}; {failures:?}"),
    )
}

// ---------------------------------------------------------------------------
// 2. Brevity penalty
// ---------------------------------------------------------------------------

fn criterion_2() -> Verdict {
    let a = brevity_penalty(10, 5).unwrap();
    let b = brevity_penalty(7, 7).unwrap();
    let c = brevity_penalty(5, 10).unwrap();
    let mut monotone = true;
    for r in 1..=60 {
        let mut prev = f64::NEG_INFINITY;
        for cand in 0..=120 {
            let bp = brevity_penalty(cand, r).unwrap();
            if bp < prev || ((bp == 1.0) != (cand >= r)) {
                monotone = false;
            }
            prev = bp;
        }
    }
    check(
        a == 1.0 && b == 1.0 && (c - (-1.0f64).exp()).abs() <= 1e-9 && monotone,
        format!(
            "BP(10,5)={a}, BP(7,7)={b}, BP(5,10)={c:.12}, monotone sweep r≤60,c≤120: {monotone}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. Cosine properties
// ---------------------------------------------------------------------------

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut bad = Vec::new();
    for i in 0..200 {
        let a = random_tokens(&mut rng, 1, 40, 12, "t");
        let b = random_tokens(&mut rng, 1, 40, 12, "t");
        let va = vectorize(&a).unwrap();
        let vb = vectorize(&b).unwrap();
        if cosine(&va, &vb) != cosine(&vb, &va) {
            bad.push(format!("symmetry #{i}"));
        }
        if (cosine(&va, &va) - 1.0).abs() > 1e-12 {
            bad.push(format!("self #{i}"));
        }
        let disjoint = random_tokens(&mut rng, 1, 40, 12, "u");
        if cosine(&va, &vectorize(&disjoint).unwrap()) != 0.0 {
            bad.push(format!("orthogonality #{i}"));
        }
        let mut shuffled = a.clone();
        shuffled.shuffle(&mut rng);
        if vectorize(&shuffled).unwrap() != va
            || cosine(&vectorize(&shuffled).unwrap(), &vb) != cosine(&va, &vb)
        {
            bad.push(format!("permutation #{i}"));
        }
        let doubled: Vec<String> = a.iter().chain(&a).cloned().collect();
        if (cosine(&vectorize(&doubled).unwrap(), &vb) - cosine(&va, &vb)).abs() > 1e-12 {
            bad.push(format!("scaling #{i}"));
        }
    }
    check(
        bad.is_empty(),
        format!("200 random vector pairs; violations: {bad:?}"),
    )
}

// ---------------------------------------------------------------------------
// 4. Oracle equivalence
// ---------------------------------------------------------------------------

fn criterion_4() -> Verdict {
    let mut compared = 0;
    let mut ties = 0;
    let mut mismatches = Vec::new();
    for seed in 0..60 {
        let c = tie_heavy_corpus(seed);
        for policy in ScopePolicy::ALL {
            for test in c.test.commits() {
                let got = nn_generate(test, &c.train, policy, c.k).ok();
                let want = oracle_generate(test, &c.train, policy, c.k);
                compared += 1;
                let same = match (&got, &want) {
                    (None, None) => true,
                    (Some(g), Some(w)) => {
                        g.neighbor_index == w.neighbor_index
                            && g.stage2_bleu == w.stage2_bleu
                            && (g.cosine - w.cosine).abs() < 1e-12
                    }
                    _ => false,
                };
                if let Some(w) = &want {
                    let tied = c
                        .train
                        .commits()
                        .iter()
                        .filter(|t| {
                            t.diff_tokens == c.train.get(w.neighbor_index).unwrap().diff_tokens
                        })
                        .count();
                    if tied > 1 {
                        ties += 1;
                    }
                }
                if !same {
                    mismatches.push(format!(
                        "seed {seed} {policy} test {}: {got:?} vs {want:?}",
                        test.index
                    ));
                }
            }
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "60 corpora, {compared} retrievals ({ties} with duplicate-diff ties); mismatches: {}",
            mismatches.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 5. Scope soundness and partition
// ---------------------------------------------------------------------------

fn criterion_5() -> Verdict {
    let mut problems = Vec::new();
    for seed in 0..5 {
        let data = generate(&SyntheticConfig {
            seed,
            unknown_train: 30,
            ..SyntheticConfig::default()
        });
        let r = Retriever::new(&data.train);
        let same = r
            .run_batch(&data.test, ScopePolicy::SameRepo, None)
            .unwrap();
        let exc = r
            .run_batch(&data.test, ScopePolicy::ExcludeRepo, None)
            .unwrap();
        let global = r.run_batch(&data.test, ScopePolicy::Global, None).unwrap();
        if same.outcomes.iter().any(|o| o.origin != Origin::SameRepo) {
            problems.push(format!(
                "seed {seed}: same-repo outcome from another origin"
            ));
        }
        if exc.outcomes.iter().any(|o| o.origin == Origin::SameRepo) {
            problems.push(format!(
                "seed {seed}: exclude-repo outcome from the same repository"
            ));
        }
        let b = origin_analysis(&global.outcomes, &data.test).unwrap();
        let count_sum: usize = b.entries.iter().map(|e| e.count).sum();
        let ratio_sum: f64 = b.entries.iter().map(|e| e.ratio).sum();
        if count_sum != global.outcomes.len() || (ratio_sum - 1.0).abs() > 1e-9 {
            problems.push(format!(
                "seed {seed}: partition {count_sum} / ratio sum {ratio_sum}"
            ));
        }
    }
    check(
        problems.is_empty(),
        format!("5 synthetic corpora; {problems:?}"),
    )
}

// ---------------------------------------------------------------------------
// 6. Determinism across worker counts
// ---------------------------------------------------------------------------

fn criterion_6() -> Verdict {
    let data = generate(&SyntheticConfig {
        seed: 6,
        repos: 10,
        train_per_repo: 90,
        test_per_repo: 10,
        unknown_train: 100,
        ..SyntheticConfig::default()
    });
    let max_workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .max(4);
    let dir = tempfile::tempdir().unwrap();
    let r = Retriever::new(&data.train);
    let mut identical = true;
    for policy in ScopePolicy::ALL {
        let one = r.run_batch(&data.test, policy, Some(1)).unwrap();
        let many = r.run_batch(&data.test, policy, Some(max_workers)).unwrap();
        let p1 = dir.path().join(format!("{policy}-1.jsonl"));
        let pn = dir.path().join(format!("{policy}-n.jsonl"));
        write_outcomes(&one, &p1).unwrap();
        write_outcomes(&many, &pn).unwrap();
        identical &= std::fs::read(&p1).unwrap() == std::fs::read(&pn).unwrap() && one == many;
    }
    check(
        identical,
        format!(
            "{} train + {} test commits, 1 vs {max_workers} workers, 3 policies: byte-identical = {identical}",
            data.train.len(),
            data.test.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 7. Directional replication of the scope ranking
// ---------------------------------------------------------------------------

fn criterion_7() -> Verdict {
    let mut rows = Vec::new();
    let mut ok = true;
    for seed in [42, 1, 2, 3, 4] {
        let data = generate(&SyntheticConfig {
            seed,
            ..SyntheticConfig::default()
        });
        let r = Retriever::new(&data.train);
        let score = |p| {
            let batch = r.run_batch(&data.test, p, None).unwrap();
            method_report(p.method_name(), &batch, &data.test)
                .unwrap()
                .score()
        };
        let (g, s, e) = (
            score(ScopePolicy::Global),
            score(ScopePolicy::SameRepo),
            score(ScopePolicy::ExcludeRepo),
        );
        ok &= s > g && g >= e && e < 0.25 * s;
        rows.push(format!(
            "seed {seed}: same {s:.2} > global {g:.2} >= exclude {e:.2}"
        ));
    }
    check(ok, rows.join("; "))
}

// ---------------------------------------------------------------------------
// 8–12. Full reproduction on the released dataset
// ---------------------------------------------------------------------------

struct RealData {
    train: Corpus,
    valid: Corpus,
    test: Corpus,
    enriched_train: Corpus,
    enriched_test: Corpus,
    filtered_train: Corpus,
    filtered_test: Corpus,
}

fn dump_format() -> DumpFormat {
    match std::env::var("NNGEN_RAW_DUMP_FORMAT").as_deref() {
        Ok("jsonl") => DumpFormat::JsonLines,
        Ok("csv") => DumpFormat::CSV,
        _ => DumpFormat::TSV,
    }
}

fn load_real(dir: &Path) -> nngen::Result<RealData> {
    let split = |name: &str, s| {
        load_split(
            &dir.join(format!("cleaned.{name}.diff")),
            &dir.join(format!("cleaned.{name}.msg")),
            s,
        )
        .map(|l| l.corpus)
    };
    let train = split("train", Split::Train)?;
    let valid = split("valid", Split::Valid)?;
    let test = split("test", Split::Test)?;
    let dump: PathBuf = std::env::var_os("NNGEN_RAW_DUMP")
        .map(PathBuf::from)
        .unwrap_or_else(|| dir.join("raw_dump.tsv"));
    let mapping = build_provenance([&train, &valid, &test], read_dump(&dump, dump_format())?)?;
    let enriched_train = enrich(train.clone(), &mapping);
    let enriched_test = enrich(test.clone(), &mapping);
    let (filtered_train, filtered_test) = filter_by_repo_size(
        &enriched_train,
        &enriched_test,
        corpus::DEFAULT_MIN_TRAIN_COMMITS,
    )?;
    Ok(RealData {
        train,
        valid,
        test,
        enriched_train,
        enriched_test,
        filtered_train,
        filtered_test,
    })
}

struct RealRuns {
    table1: OriginBreakdown,
    global_cleaned_time: Duration,
    table2: Vec<MethodReport>,
    simple_time: Duration,
}

fn timed(r: &Retriever, test: &Corpus, p: ScopePolicy) -> (BatchOutput, Duration) {
    let t = Instant::now();
    let b = r.run_batch(test, p, None).unwrap();
    (b, t.elapsed())
}

fn run_real(d: &RealData) -> RealRuns {
    // NNGen and EXC-NNGen search the full cleaned training set; Simple-NNGen
    // is restricted to the test commit's repository anyway.
    let r = Retriever::new(&d.enriched_train);
    let (global_all, global_cleaned_time) = timed(&r, &d.enriched_test, ScopePolicy::Global);
    let table1 = origin_analysis(&global_all.outcomes, &d.enriched_test).unwrap();
    let mut table2 = Vec::new();
    let mut simple_time = Duration::ZERO;
    for p in ScopePolicy::ALL {
        let (b, t) = timed(&r, &d.filtered_test, p);
        if p == ScopePolicy::SameRepo {
            simple_time = t;
        }
        table2.push(method_report(p.method_name(), &b, &d.filtered_test).unwrap());
    }
    RealRuns {
        table1,
        global_cleaned_time,
        table2,
        simple_time,
    }
}

fn criterion_8(d: &RealData) -> Verdict {
    let counts = (d.train.len(), d.valid.len(), d.test.len());
    let filtered = (d.filtered_train.len(), d.filtered_test.len());
    let unknown = d.enriched_test.unknown_repo_count();
    check(
        counts == (22112, 2511, 2521) && filtered == (14738, 1665) && unknown.abs_diff(52) <= 5,
        format!(
            "cleaned {counts:?}, filtered {filtered:?}, unknown-provenance test commits {unknown}"
        ),
    )
}

fn criterion_9(runs: &RealRuns) -> Verdict {
    let expected = [
        ("NNGen", 17.06, [28.5, 17.7, 14.1, 12.5]),
        ("Simple-NNGen", 17.64, [28.8, 18.1, 14.5, 12.8]),
        ("EXC-NNGen", 2.68, [10.8, 2.9, 1.9, 1.7]),
    ];
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, bleu, p) in expected {
        let rep = runs.table2.iter().find(|r| r.method == name).unwrap();
        let b = rep.bleu.unwrap();
        ok &= (b.score - bleu).abs() <= 0.5;
        for (got, want) in b.precisions.iter().zip(p) {
            ok &= (100.0 * got - want).abs() <= 0.7;
        }
        rows.push(format!(
            "{name} {:.2} ({:.1}/{:.1}/{:.1}/{:.1})",
            b.score,
            100.0 * b.precisions[0],
            100.0 * b.precisions[1],
            100.0 * b.precisions[2],
            100.0 * b.precisions[3]
        ));
    }
    let ranking = compare(&runs.table2).ranking().join(" > ");
    ok &= ranking == "Simple-NNGen > NNGen > EXC-NNGen";
    check(ok, format!("{}; ranking {ranking}", rows.join(", ")))
}

fn criterion_10(runs: &RealRuns) -> Verdict {
    let t = &runs.table1;
    let same = t.entry(Origin::SameRepo);
    let other = t.entry(Origin::OtherRepo);
    let (ms, mo) = (same.mbleu.unwrap_or(0.0), other.mbleu.unwrap_or(0.0));
    check(
        (same.ratio - 0.60).abs() <= 0.02
            && (ms - 13.13).abs() <= 1.0
            && (mo - 3.29).abs() <= 1.0
            && ms > 3.0 * mo,
        format!(
            "same-repo ratio {:.3} ({}/{}), MBLEU same {ms:.2}, other {mo:.2}, overall {:.2}",
            same.ratio,
            same.count,
            t.total,
            t.overall_mbleu.unwrap_or(0.0)
        ),
    )
}

fn criterion_11(d: &RealData) -> Verdict {
    let train = corpus::stats(&d.filtered_train).unwrap();
    let test = corpus::stats(&d.filtered_test).unwrap();
    check(
        train.median_commits_per_repo == Some(102.5)
            && train.median_msg_len_words == 6.0
            && test.median_msg_len_words == 6.0,
        format!(
            "median train commits/repo {:?}, median message length train {} / test {}",
            train.median_commits_per_repo, train.median_msg_len_words, test.median_msg_len_words
        ),
    )
}

fn criterion_12(runs: &RealRuns) -> Verdict {
    let g = runs.global_cleaned_time;
    let s = runs.simple_time;
    check(
        g < Duration::from_secs(600) && s < Duration::from_secs(60),
        format!(
            "global 2521 x 22112: {:.1}s; simple-nngen: {:.1}s",
            g.as_secs_f64(),
            s.as_secs_f64()
        ),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Verdict)> = vec![
        (1, "BLEU identities", criterion_1()),
        (2, "brevity penalty", criterion_2()),
        (3, "cosine properties", criterion_3()),
        (4, "oracle equivalence", criterion_4()),
        (5, "scope soundness and partition", criterion_5()),
        (6, "determinism across workers", criterion_6()),
        (7, "directional scope ranking", criterion_7()),
    ];

    let titles = [
        (8, "dataset counts"),
        (9, "method BLEU table"),
        (10, "origin table"),
        (11, "corpus medians"),
        (12, "runtime"),
    ];
    match std::env::var_os("NNGEN_DATA_DIR") {
        None => {
            for (n, title) in titles {
                results.push((n, title, Verdict::Skip("NNGEN_DATA_DIR not set".into())));
            }
        }
        Some(dir) => match load_real(Path::new(&dir)) {
            Err(e) => {
                for (n, title) in titles {
                    results.push((
                        n,
                        title,
                        Verdict::Fail(format!("dataset could not be loaded: {e}")),
                    ));
                }
            }
            Ok(d) => {
                let runs = run_real(&d);
                results.push((8, titles[0].1, criterion_8(&d)));
                results.push((9, titles[1].1, criterion_9(&runs)));
                results.push((10, titles[2].1, criterion_10(&runs)));
                results.push((11, titles[3].1, criterion_11(&d)));
                results.push((12, titles[4].1, criterion_12(&runs)));
            }
        },
    }

    let mut failed = 0;
    for (n, title, verdict) in &results {
        let (tag, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("[{tag}] criterion {n:>2} ({title}): {detail}");
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
