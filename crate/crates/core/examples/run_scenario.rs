//! Drive the batch runner from code: run a JSON scenario twice and diff the
//! two output directories.

use std::path::PathBuf;

use scatterlab::runner::{compare_runs, run_scenario};

fn main() -> scatterlab::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let config = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| root.join("mourre.json"));
    let out = std::env::temp_dir().join("scatterlab-example-runs");
    let a = run_scenario(&config, &out, None)?;
    let b = run_scenario(&config, &out, None)?;
    println!("{:?} {} -> {}", a.summary.status, a.summary.kind, a.dir.display());
    for (k, v) in &a.summary.metrics {
        println!("  {k:>16} = {v:.6e}");
    }
    let diff = compare_runs(&a.dir, &b.dir)?;
    println!("rerun differs in {} metrics", diff.entries.len());
    Ok(())
}
