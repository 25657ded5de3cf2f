//! Loads a benchmark text directory or JSON file and prints its statistics.
//!
//! ```text
//! cargo run --example load_benchmark -- data/MUTAG
//! ```
//!
//! Without an argument it reads the two-graph fixture shipped with the tests.

use infogain_wavelets::io::{label_histogram, LoadOptions};
use infogain_wavelets::{load_dataset, Result};

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/tiny").into());
    let ds = load_dataset(&path, LoadOptions::default())?;
    let stats = ds.stats();
    println!("{}", serde_json::to_string_pretty(&stats)?);
    for (value, count) in label_histogram(&ds) {
        println!("label {value}: {count} graphs");
    }
    let g = &ds.graphs[0];
    println!("first graph: {} nodes, {} edges, degrees {:?}", g.n_nodes(), g.n_edges(), g.degrees());
    Ok(())
}
