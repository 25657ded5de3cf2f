use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use infogain_wavelets::graph::IsolatedNodes;
use infogain_wavelets::harness::{cross_validate_dataset, extract_features, with_workers, ExperimentConfig, Extractor};
use infogain_wavelets::infogain::{quantiles_from_interval, ZeroSubstitution};
use infogain_wavelets::io::{export_curves, export_model, import_model, write_curves, write_features, FeatureTable, LoadOptions, NodeAttributes};
use infogain_wavelets::wavelets::{dyadic_scales, Activation, ScaleSet};
use infogain_wavelets::{fit, load_dataset, Error, InfoGainConfig, Result, ScatteringConfig};

#[derive(Parser)]
#[command(name = "infogain", version, about = "Diffusion wavelet scales by InfoGain, scattering features and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttrArg {
    Auto,
    Concat,
    Ignore,
}

#[derive(Clone, Copy, ValueEnum)]
enum IsolatedArg {
    Reject,
    FixedPoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Infogain,
    Dyadic,
    LegsOnehot,
}

#[derive(clap::Args)]
struct DatasetArgs {
    /// Benchmark directory (DS_A.txt, ...) or JSON graph file.
    #[arg(long)]
    dataset: PathBuf,
    /// Use of DS_node_attributes.txt.
    #[arg(long, value_enum, default_value = "auto")]
    node_attributes: AttrArg,
    /// Handling of nodes without edges.
    #[arg(long, value_enum, default_value = "reject")]
    isolated: IsolatedArg,
}

impl DatasetArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            node_attributes: match self.node_attributes {
                AttrArg::Auto => NodeAttributes::Auto,
                AttrArg::Concat => NodeAttributes::Concat,
                AttrArg::Ignore => NodeAttributes::Ignore,
            },
            isolated: match self.isolated {
                IsolatedArg::Reject => IsolatedNodes::Reject,
                IsolatedArg::FixedPoint => IsolatedNodes::FixedPoint,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit per-channel InfoGain scales and write the model JSON.
    FitScales {
        #[command(flatten)]
        data: DatasetArgs,
        /// Largest diffusion scale t_J.
        #[arg(long, default_value_t = 16)]
        tj: usize,
        /// Spacing of the quantile grid; 0.25 gives 0.25, 0.5, 0.75.
        #[arg(long, default_value_t = 0.25)]
        quantile_interval: f64,
        /// `half-min` or a positive constant such as 1e-2.
        #[arg(long, default_value = "half-min")]
        zeros: ZeroSubstitution,
        /// Weight graphs by inverse class frequency.
        #[arg(long)]
        class_balance: bool,
        #[arg(long, default_value_t = 1.0)]
        sample_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        uninformative_tolerance: f64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the information curves CSV here.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Export information curves of a fitted model as CSV.
    Curves {
        #[arg(long)]
        model: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract pooled scattering moments for every graph.
    Features {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long, value_enum, default_value = "infogain")]
        scale_source: SourceArg,
        /// Fitted model, required for `--scale-source infogain`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Dyadic depth J.
        #[arg(long, default_value_t = 4)]
        j: usize,
        /// Scales for `legs-onehot`, e.g. 0,1,2,4,8,16; dyadic when absent.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<usize>>,
        /// Keep channels the model marks uninformative.
        #[arg(long)]
        keep_uninformative: bool,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 4)]
        moments: usize,
        #[arg(long, default_value = "abs")]
        activation: Activation,
        #[arg(long)]
        workers: Option<usize>,
        /// Output CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stratified cross-validation of the linear probe.
    Benchmark {
        /// Experiment config JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-phase wall-clock seconds; kept apart so metrics stay reproducible.
        #[arg(long)]
        timings: Option<PathBuf>,
        /// Directory for the per-fold InfoGain models (fold_<k>.json).
        #[arg(long)]
        models_dir: Option<PathBuf>,
        /// Overrides the config's worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print dataset statistics.
    Info {
        /// Benchmark directory or JSON graph file.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        node_attributes: AttrArg,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::FitScales {
            data,
            tj,
            quantile_interval,
            zeros,
            class_balance,
            sample_fraction,
            seed,
            uninformative_tolerance,
            workers,
            out,
            curves,
        } => {
            let cfg = InfoGainConfig {
                max_scale: tj,
                quantiles: quantiles_from_interval(quantile_interval)?,
                zero_substitution: zeros,
                class_balance,
                uninformative_tolerance,
                sample_fraction,
                sample_seed: seed,
            };
            cfg.validate()?;
            let ds = load_dataset(&data.dataset, data.options())?;
            let model = with_workers(workers, || fit(&ds.graphs, ds.labels.as_deref(), &cfg))??;
            export_model(&model, &out)?;
            if let Some(path) = curves {
                export_curves(&model, path)?;
            }
            let dropped = model.uninformative_mask.iter().filter(|&&u| u).count();
            eprintln!(
                "fitted {} channels on {} graphs ({dropped} uninformative)",
                model.n_channels(),
                ds.len()
            );
        }
        Command::Curves { model, out } => {
            let model = import_model(model)?;
            match out {
                Some(path) => export_curves(&model, path)?,
                None => write_curves(&model, std::io::stdout().lock())?,
            }
        }
        Command::Features {
            data,
            scale_source,
            model,
            j,
            scales,
            keep_uninformative,
            order,
            moments,
            activation,
            workers,
            out,
        } => {
            let scattering = ScatteringConfig {
                order,
                activation,
                moments,
                ..Default::default()
            };
            scattering.validate()?;
            let extractor = match scale_source {
                SourceArg::Infogain => {
                    let path = model.ok_or_else(|| {
                        Error::InvalidConfig("--scale-source infogain needs --model".into())
                    })?;
                    Extractor::from_model(&import_model(path)?, !keep_uninformative)
                }
                SourceArg::Dyadic => Extractor::dyadic(j)?,
                SourceArg::LegsOnehot => {
                    let set = match scales {
                        Some(s) => ScaleSet::new(s)?,
                        None => dyadic_scales(j)?,
                    };
                    Extractor::legs_onehot(&set, true)?
                }
            };
            let ds = load_dataset(&data.dataset, data.options())?;
            let (values, layout) = with_workers(workers, || extract_features(&ds.graphs, &extractor, &scattering))??;
            let labels = match &ds.labels {
                Some(l) => l.iter().map(|&y| Some(y)).collect(),
                None => vec![None; ds.len()],
            };
            let table = FeatureTable::from_layout(&layout, labels, values);
            match out {
                Some(path) => write_features(&table, fs::File::create(path)?)?,
                None => write_features(&table, std::io::stdout().lock())?,
            }
        }
        Command::Benchmark {
            config,
            out,
            timings,
            models_dir,
            workers,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if workers.is_some() {
                cfg.workers = workers;
            }
            cfg.validate()?;
            let ds = load_dataset(&cfg.dataset, cfg.load)?;
            let report = cross_validate_dataset(&ds, &cfg)?;
            let (metrics, time, models) = (&report.metrics, &report.timings, &report.models);
            write_text(&out, &(serde_json::to_string_pretty(metrics)? + "\n"))?;
            if let Some(path) = timings {
                write_text(&path, &(serde_json::to_string_pretty(time)? + "\n"))?;
            }
            if let Some(dir) = models_dir {
                fs::create_dir_all(&dir)?;
                for (k, model) in models.iter().enumerate() {
                    if let Some(m) = model {
                        export_model(m, dir.join(format!("fold_{k}.json")))?;
                    }
                }
            }
            eprintln!(
                "{}: accuracy {:.4} ± {:.4} over {} folds (majority {:.4})",
                metrics.dataset,
                metrics.mean,
                metrics.std,
                metrics.per_fold.len(),
                metrics.majority_baseline
            );
        }
        Command::Info {
            dataset,
            node_attributes,
            json,
        } => {
            let data = DatasetArgs {
                dataset,
                node_attributes,
                isolated: IsolatedArg::FixedPoint,
            };
            let ds = load_dataset(&data.dataset, data.options())?;
            let stats = ds.stats();
            let mut stdout = std::io::stdout().lock();
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&stats)?)?;
            } else {
                writeln!(stdout, "Dataset        {}", stats.name)?;
                writeln!(stdout, "Graphs         {}", stats.graphs)?;
                writeln!(stdout, "Node Features  {}", stats.node_features)?;
                writeln!(stdout, "Avg. Nodes     {:.2}", stats.mean_nodes)?;
                writeln!(stdout, "Avg. Edges     {:.2}", stats.mean_edges)?;
                writeln!(stdout, "Classes        {}", stats.classes)?;
                let counts: Vec<String> = stats.class_counts.iter().map(|c| c.to_string()).collect();
                writeln!(stdout, "Class Counts   {}", counts.join(" "))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
