//! Drops repositories with too few training commits and prints corpus
//! statistics before and after.
//!
//! ```bash
//! cargo run -p nngen --example filter_and_stats -- [min_train_commits]
//! ```

use nngen::corpus::{filter_by_repo_size, render_stats_table, stats, DEFAULT_MIN_TRAIN_COMMITS};
use nngen::synthetic::{generate, SyntheticConfig};

fn main() -> nngen::Result<()> {
    let min = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_MIN_TRAIN_COMMITS);

    // Two generated corpora of different sizes, merged by shifting indices,
    // so that some repositories fall under the threshold.
    let big = generate(&SyntheticConfig {
        seed: 1,
        repos: 4,
        train_per_repo: 80,
        unknown_train: 12,
        ..SyntheticConfig::default()
    });
    let small = generate(&SyntheticConfig {
        seed: 2,
        repos: 6,
        train_per_repo: 30,
        ..SyntheticConfig::default()
    });
    let merge = |a: &nngen::corpus::Corpus, b: &nngen::corpus::Corpus| {
        let offset = a.commits().last().map_or(0, |c| c.index + 1);
        let mut commits = a.commits().to_vec();
        commits.extend(b.commits().iter().cloned().map(|mut c| {
            c.index += offset;
            c.repo = c.repo.map(|r| format!("small-{r}"));
            c
        }));
        nngen::corpus::Corpus::new(a.split(), commits)
    };
    let train = merge(&big.train, &small.train)?;
    let test = merge(&big.test, &small.test)?;

    println!(
        "before filtering:\n{}",
        render_stats_table(&[stats(&train)?, stats(&test)?])
    );
    let (ft, fs) = filter_by_repo_size(&train, &test, min)?;
    println!("after keeping repositories with >= {min} training commits:");
    print!("{}", render_stats_table(&[stats(&ft)?, stats(&fs)?]));
    Ok(())
}
