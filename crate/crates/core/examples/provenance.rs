//! Attaches repositories to a cleaned dataset by looking its messages up in a
//! raw commit dump, then draws a reproducible sample of the mapping for
//! manual checking.
//!
//! ```bash
//! cargo run -p nngen --example provenance
//! ```

use std::fs;

use nngen::corpus::{
    build_provenance, enrich, load_split, read_dump, sample_mappings, DumpFormat, Split,
};

fn main() -> nngen::Result<()> {
    let dir = tempfile::tempdir().expect("temporary directory");
    let diff = dir.path().join("train.diff");
    let msg = dir.path().join("train.msg");
    let dump = dir.path().join("raw.tsv");

    fs::write(&diff, "+ a = 1 ;\n- b ( ) ;\n+ c . d ( ) ;\n+ e\n").unwrap();
    fs::write(
        &msg,
        "set a to one\nremove call to b\nfix typo\nsomething never pushed\n",
    )
    .unwrap();
    // The dump lists the same "fix typo" message twice; the first line wins.
    // Whitespace differences do not prevent a match.
    fs::write(
        &dump,
        "set  a to one\tacme/core\t1a2b\n\
         remove call to b\tacme/web\t3c4d\n\
         fix typo\tacme/docs\t5e6f\n\
         fix typo\tacme/core\t7a8b\n",
    )
    .unwrap();

    let train = load_split(&diff, &msg, Split::Train)?.corpus;
    let mapping = build_provenance([&train], read_dump(&dump, DumpFormat::TSV)?)?;
    println!(
        "{} of {} distinct messages resolved ({:.0}% unresolved)",
        mapping.len(),
        mapping.total_messages,
        100.0 * mapping.unresolved_fraction()
    );

    let enriched = enrich(train, &mapping);
    for c in enriched.commits() {
        println!(
            "  {:<24} {}",
            c.message(),
            c.repo.as_deref().unwrap_or("(unknown)")
        );
    }

    println!("\nreview sample:");
    for e in sample_mappings(&mapping, 2, 7)? {
        println!("  {:?} -> {} @ {}", e.message, e.repo_id, e.commit_id);
    }
    Ok(())
}
