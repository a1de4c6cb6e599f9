//! Runs a scenario file (default: the bundled `example_1_2.json`) and writes its artifacts.
//!
//! `cargo run --example verdict_scenario -- path/to/scenario.json out_dir`

use bvlsc::report::write_artifacts;
use bvlsc::verdict::{analyze, Scenario};
use std::path::PathBuf;

fn main() -> bvlsc::Result<()> {
    let mut args = std::env::args().skip(1);
    let path =
        args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/example_1_2.json"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("bvlsc-example"));
    let scenario = Scenario::from_json(&std::fs::read_to_string(&path)?)?;
    let v = analyze(&scenario)?;
    println!("{}: {:?}", v.name, v.overall);
    for w in &v.violations {
        println!("  {} at {:?}: {:+.4} (witness: {})", w.check, w.x0, w.value, w.has_witness);
    }
    for e in &v.errors {
        println!("  error in {}: {}", e.context, e.message);
    }
    for p in write_artifacts(&v, &out)? {
        println!("  wrote {}", p.display());
    }
    Ok(())
}
