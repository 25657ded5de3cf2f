//! Fits InfoGain scales on a dataset and prints each channel's scales next
//! to a coarse text plot of its information curve.
//!
//! ```text
//! cargo run --example fit_scales -- [dataset] [t_J]
//! ```

use infogain_wavelets::io::LoadOptions;
use infogain_wavelets::{fit, load_dataset, InfoGainConfig, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let dataset = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/planted.json").into());
    let t_j: usize = args.next().map_or(32, |s| s.parse().expect("t_J must be an integer"));

    let ds = load_dataset(&dataset, LoadOptions::default())?;
    let cfg = InfoGainConfig {
        max_scale: t_j,
        ..Default::default()
    };
    let model = fit(&ds.graphs, ds.labels.as_deref(), &cfg)?;
    println!("median scales {}", model.median_scales()?);
    for c in 0..model.n_channels() {
        if model.uninformative_mask[c] {
            println!("channel {c}: uninformative, filled with {}", model.per_channel_scales[c]);
            continue;
        }
        println!("channel {c}: {}", model.per_channel_scales[c]);
        let curve = &model.curves[c];
        for (k, r) in curve.rescaled.iter().enumerate().step_by(2) {
            let bar = "#".repeat((r * 40.0).round() as usize);
            println!("  t={:>3} {r:5.3} {bar}", curve.scale_at(k));
        }
    }
    Ok(())
}
