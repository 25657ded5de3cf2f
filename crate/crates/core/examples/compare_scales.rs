//! Cross-validates the linear probe under dyadic, InfoGain and one-hot LEGS
//! wavelets on the same folds.
//!
//! ```text
//! cargo run --release --example compare_scales -- [dataset] [folds] [t_J]
//! ```
//!
//! Defaults to the planted fixture with 2 folds and `t_J = 32`. Point it at a
//! benchmark directory such as `data/MUTAG` with 10 folds and `t_J = 16` for
//! the desk-scale comparison.

use infogain_wavelets::harness::{cross_validate_dataset, ExperimentConfig, ScaleSource};
use infogain_wavelets::io::LoadOptions;
use infogain_wavelets::wavelets::dyadic_scales;
use infogain_wavelets::{load_dataset, InfoGainConfig, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let dataset = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/planted.json").into());
    let folds: usize = args.next().map_or(2, |s| s.parse().expect("folds must be an integer"));
    let t_j: usize = args.next().map_or(32, |s| s.parse().expect("t_J must be an integer"));
    let j = t_j.ilog2() as usize;

    let ds = load_dataset(&dataset, LoadOptions::default())?;
    println!("{}: {} graphs, {} channels, t_J = {t_j}, {folds} folds", ds.name, ds.len(), ds.n_channels);

    let sources = [
        ("dyadic", ScaleSource::Dyadic { j }),
        (
            "infogain",
            ScaleSource::Infogain(InfoGainConfig {
                max_scale: t_j,
                ..Default::default()
            }),
        ),
        (
            "legs-onehot",
            ScaleSource::LegsOnehot {
                scales: dyadic_scales(j)?,
                softmax: true,
            },
        ),
    ];
    for (name, scale_source) in sources {
        let cfg = ExperimentConfig {
            dataset: dataset.clone().into(),
            load: LoadOptions::default(),
            scale_source,
            scattering: Default::default(),
            classifier: Default::default(),
            folds,
            seed: 0,
            workers: None,
            drop_uninformative: true,
        };
        let report = cross_validate_dataset(&ds, &cfg)?;
        let m = &report.metrics;
        let folds: Vec<String> = m.per_fold.iter().map(|f| format!("{:.3}", f.accuracy)).collect();
        println!(
            "{name:>12}: {:.3} ± {:.3}  (features {}, folds [{}], majority {:.3})",
            m.mean,
            m.std,
            m.feature_len,
            folds.join(", "),
            m.majority_baseline
        );
    }
    Ok(())
}
