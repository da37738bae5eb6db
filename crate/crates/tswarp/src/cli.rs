//! Command-line surface: dataset simulation, single-pair classification runs,
//! archive-style benchmarks, low-sample sweeps, accuracy correlation, and the
//! timing harness. Reports land in CSV files with fixed headers.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use tswarp_core::synth::{generate_dataset, SynthError, SyntheticSpec};
use tswarp_core::LabeledDataset;

use crate::classify::{
    accuracy_correlation, evaluate, low_sample_sweep, timing_benchmark, ClassifyError,
    CorrelationError, Dissimilarity, EvalOptions, EvalReport, ThreadMode,
};
use crate::tsv::{load_tsv, save_tsv, write_atomic, TsvError};

/// Seed fallback when a command's `--seed` flag is absent.
pub const SEED_ENV_VAR: &str = "TSWARP_SEED";

#[derive(Debug, Error)]
enum CommandError {
    #[error(transparent)]
    Tsv(#[from] TsvError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Data(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "tswarp",
    version,
    about = "1-NN time-series classification over elastic and transport dissimilarities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ThreadsArg {
    /// Evaluation parallelism: "auto" uses all cores, "1" forces sequential.
    #[arg(long, default_value = "auto")]
    threads: ThreadMode,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset of warped templates and write it as TSV.
    Simulate {
        /// Number of classes.
        #[arg(long)]
        classes: usize,
        /// Atomic subclasses (templates) per class.
        #[arg(long)]
        atoms: usize,
        /// Samples drawn per atom.
        #[arg(long)]
        samples: usize,
        /// Samples per signal.
        #[arg(long)]
        length: usize,
        /// RNG seed; falls back to TSWARP_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Warp dispersion in [0,1]; 0 is the identity warp.
        #[arg(long, default_value_t = 0.5)]
        roughness: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// 1-NN classify a test file against a training file; write per-item CSV.
    Classify {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Dissimilarity: euclidean, dtw, dtw_weighted, or dt.
        #[arg(long)]
        metric: Dissimilarity,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: ThreadsArg,
    },
    /// Evaluate every <Name>_TRAIN.tsv / <Name>_TEST.tsv pair found one
    /// directory below --data-dir, for each metric.
    Bench {
        #[arg(long)]
        data_dir: PathBuf,
        /// Comma-separated metric list.
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<Dissimilarity>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: ThreadsArg,
    },
    /// Mean accuracy over repeated random training subsamples of fixed
    /// per-class sizes.
    Lowsample {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Comma-separated per-class training counts.
        #[arg(long, value_delimiter = ',')]
        per_class: Vec<usize>,
        #[arg(long)]
        repeats: usize,
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<Dissimilarity>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: ThreadsArg,
    },
    /// Pearson correlation between two metrics' accuracy columns of a bench
    /// report.
    Corr {
        /// A CSV produced by `bench`.
        #[arg(long)]
        report: PathBuf,
        /// The two metric names to pair, e.g. dt,dtw.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        cols: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wall-clock cost of full 1-NN evaluations on synthetic data, per
    /// signal length, training size, and metric. Runs sequentially.
    Timing {
        #[arg(long, value_delimiter = ',')]
        lengths: Vec<usize>,
        /// Training samples per class (two classes are generated).
        #[arg(long, value_delimiter = ',')]
        train_sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<Dissimilarity>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Test samples per class.
        #[arg(long, default_value_t = 100)]
        test_per_class: usize,
        /// Repetitions per cell; the median is reported.
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

/// Parses argv and runs the selected command. Returns the process exit code:
/// 0 on success, 1 on usage errors, 2 on data errors.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    if let Some(seed) = flag {
        return seed;
    }
    if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
        match raw.parse() {
            Ok(seed) => return seed,
            Err(_) => eprintln!("warning: ignoring unparsable {SEED_ENV_VAR}={raw:?}"),
        }
    }
    0
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_csv(path: &Path, rows: &[Vec<String>]) -> Result<(), CommandError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.write_record(row).map_err(|source| CommandError::Csv {
            path: path.display().to_string(),
            source,
        })?;
    }
    let bytes = writer.into_inner().expect("vec writer does not fail");
    write_atomic(path, &bytes)?;
    Ok(())
}

fn run(command: Command) -> Result<(), CommandError> {
    match command {
        Command::Simulate {
            classes,
            atoms,
            samples,
            length,
            seed,
            roughness,
            out,
        } => {
            let spec = SyntheticSpec {
                num_classes: classes,
                atoms_per_class: atoms,
                samples_per_atom: samples,
                grid_size: length,
                warp_knots: SyntheticSpec::DEFAULT_WARP_KNOTS,
                warp_roughness: roughness,
                seed: resolve_seed(seed),
            };
            let dataset = generate_dataset(&spec)?;
            save_tsv(&dataset, &out)?;
            println!(
                "wrote {} signals of length {} to {}",
                dataset.len(),
                dataset.signal_len(),
                out.display()
            );
            Ok(())
        }
        Command::Classify {
            train,
            test,
            metric,
            out,
            threads,
        } => {
            let train_set = load_tsv(&train)?;
            let test_set = load_tsv(&test)?;
            let options = EvalOptions {
                dataset: dataset_name(&test),
                threads: threads.threads,
                seed: None,
            };
            let report = evaluate(&train_set, &test_set, metric, &options)?;
            let mut rows = vec![vec![
                "item_index".into(),
                "true_label".into(),
                "predicted_label".into(),
                "distance".into(),
            ]];
            for p in &report.predictions {
                rows.push(vec![
                    p.index.to_string(),
                    p.true_label.to_string(),
                    p.predicted.to_string(),
                    p.distance.to_string(),
                ]);
            }
            write_csv(&out, &rows)?;
            if report.fallback_count() > 0 {
                eprintln!(
                    "warning: {} item(s) fell back to the euclidean distance",
                    report.fallback_count()
                );
            }
            println!(
                "{}: accuracy {:.4} over {} items in {:.3} s ({})",
                report.dataset, report.accuracy, report.test_size, report.seconds, metric
            );
            Ok(())
        }
        Command::Bench {
            data_dir,
            metrics,
            out,
            threads,
        } => {
            let mut rows = vec![vec![
                "dataset".into(),
                "metric".into(),
                "accuracy".into(),
                "seconds".into(),
                "train_size".into(),
                "test_size".into(),
            ]];
            for (name, result) in bench_directories(&data_dir, &metrics, threads.threads)? {
                match result {
                    Ok(reports) => {
                        for r in reports {
                            println!(
                                "{name} {}: accuracy {:.4} in {:.3} s",
                                r.metric, r.accuracy, r.seconds
                            );
                            rows.push(vec![
                                name.clone(),
                                r.metric.to_string(),
                                r.accuracy.to_string(),
                                r.seconds.to_string(),
                                r.train_size.to_string(),
                                r.test_size.to_string(),
                            ]);
                        }
                    }
                    Err(e) => {
                        eprintln!("warning: skipping {name}: {e}");
                        rows.push(vec![
                            name.clone(),
                            "error".into(),
                            String::new(),
                            String::new(),
                            String::new(),
                            String::new(),
                        ]);
                    }
                }
            }
            write_csv(&out, &rows)?;
            Ok(())
        }
        Command::Lowsample {
            train,
            test,
            per_class,
            repeats,
            metrics,
            seed,
            out,
            threads,
        } => {
            let train_set = load_tsv(&train)?;
            let test_set = load_tsv(&test)?;
            let options = EvalOptions {
                dataset: dataset_name(&test),
                threads: threads.threads,
                seed: None,
            };
            let sweep = low_sample_sweep(
                &train_set,
                &test_set,
                &per_class,
                repeats,
                &metrics,
                resolve_seed(seed),
                &options,
            )?;
            let mut rows = vec![vec![
                "per_class".into(),
                "metric".into(),
                "mean_accuracy".into(),
                "repeats".into(),
            ]];
            for row in &sweep.rows {
                println!(
                    "per_class {}: {} mean accuracy {:.4} over {} repeats",
                    row.per_class, row.metric, row.mean_accuracy, row.repeats
                );
                rows.push(vec![
                    row.per_class.to_string(),
                    row.metric.to_string(),
                    row.mean_accuracy.to_string(),
                    row.repeats.to_string(),
                ]);
            }
            write_csv(&out, &rows)?;
            Ok(())
        }
        Command::Corr { report, cols, out } => {
            if cols.len() != 2 {
                return Err(CommandError::Data(format!(
                    "--cols needs exactly two metric names, got {}",
                    cols.len()
                )));
            }
            let pairs = paired_accuracies(&report, &cols[0], &cols[1])?;
            let mut rows = vec![vec![
                "metric_a".into(),
                "metric_b".into(),
                "pairs".into(),
                "pearson".into(),
            ]];
            match accuracy_correlation(&pairs) {
                Ok(r) => {
                    println!(
                        "pearson({}, {}) = {r:.4} over {} datasets",
                        cols[0],
                        cols[1],
                        pairs.len()
                    );
                    rows.push(vec![
                        cols[0].clone(),
                        cols[1].clone(),
                        pairs.len().to_string(),
                        r.to_string(),
                    ]);
                }
                Err(e @ CorrelationError::ZeroVariance) => {
                    // not a failure: report the no-correlation outcome
                    println!("no correlation: {e}");
                    rows.push(vec![
                        cols[0].clone(),
                        cols[1].clone(),
                        pairs.len().to_string(),
                        String::new(),
                    ]);
                }
                Err(e) => return Err(CommandError::Data(e.to_string())),
            }
            write_csv(&out, &rows)?;
            Ok(())
        }
        Command::Timing {
            lengths,
            train_sizes,
            metrics,
            seed,
            out,
            test_per_class,
            repeats,
        } => {
            let cells = timing_benchmark(
                &lengths,
                &train_sizes,
                test_per_class,
                &metrics,
                resolve_seed(seed),
                repeats,
            )?;
            let mut rows = vec![vec![
                "length".into(),
                "train_per_class".into(),
                "test_per_class".into(),
                "metric".into(),
                "seconds".into(),
            ]];
            for cell in &cells {
                println!(
                    "length {} train {}x2 test {}x2 {}: {:.4} s",
                    cell.length,
                    cell.train_per_class,
                    cell.test_per_class,
                    cell.metric,
                    cell.seconds
                );
                rows.push(vec![
                    cell.length.to_string(),
                    cell.train_per_class.to_string(),
                    cell.test_per_class.to_string(),
                    cell.metric.to_string(),
                    cell.seconds.to_string(),
                ]);
            }
            write_csv(&out, &rows)?;
            Ok(())
        }
    }
}

type BenchOutcome = Result<Vec<EvalReport>, CommandError>;

/// Runs every dataset directory under `data_dir`, one `(name, outcome)` per
/// directory in name order. A failing dataset yields an `Err` outcome instead
/// of aborting the whole run.
fn bench_directories(
    data_dir: &Path,
    metrics: &[Dissimilarity],
    threads: ThreadMode,
) -> Result<Vec<(String, BenchOutcome)>, CommandError> {
    let entries = std::fs::read_dir(data_dir).map_err(|source| {
        CommandError::Tsv(TsvError::Io {
            path: data_dir.display().to_string(),
            source,
        })
    })?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(CommandError::Data(format!(
            "{}: no dataset directories found",
            data_dir.display()
        )));
    }

    let mut out = Vec::new();
    for dir in dirs {
        let name = dataset_name(&dir);
        out.push((name.clone(), bench_one(&dir, &name, metrics, threads)));
    }
    Ok(out)
}

fn bench_one(
    dir: &Path,
    name: &str,
    metrics: &[Dissimilarity],
    threads: ThreadMode,
) -> BenchOutcome {
    let train = load_tsv(dir.join(format!("{name}_TRAIN.tsv")))?;
    let test = load_tsv(dir.join(format!("{name}_TEST.tsv")))?;
    let options = EvalOptions {
        dataset: name.to_string(),
        threads,
        seed: None,
    };
    let mut reports = Vec::with_capacity(metrics.len());
    for &metric in metrics {
        reports.push(evaluate(&train, &test, metric, &options)?);
    }
    Ok(reports)
}

/// Extracts `(accuracy_a, accuracy_b)` per dataset from a bench CSV for two
/// metric names. Rows whose accuracy does not parse (error rows) are skipped.
fn paired_accuracies(
    report: &Path,
    metric_a: &str,
    metric_b: &str,
) -> Result<Vec<(f64, f64)>, CommandError> {
    let mut reader = csv::Reader::from_path(report).map_err(|source| CommandError::Csv {
        path: report.display().to_string(),
        source,
    })?;
    let headers = reader.headers().map_err(|source| CommandError::Csv {
        path: report.display().to_string(),
        source,
    })?;
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(dataset_col), Some(metric_col), Some(accuracy_col)) =
        (col("dataset"), col("metric"), col("accuracy"))
    else {
        return Err(CommandError::Data(format!(
            "{}: missing dataset/metric/accuracy columns",
            report.display()
        )));
    };

    let mut by_dataset: BTreeMap<String, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|source| CommandError::Csv {
            path: report.display().to_string(),
            source,
        })?;
        let (Some(dataset), Some(metric), Some(accuracy)) = (
            record.get(dataset_col),
            record.get(metric_col),
            record.get(accuracy_col),
        ) else {
            continue;
        };
        let Ok(accuracy) = accuracy.parse::<f64>() else {
            continue;
        };
        let entry = by_dataset.entry(dataset.to_string()).or_default();
        if metric == metric_a {
            entry.0 = Some(accuracy);
        } else if metric == metric_b {
            entry.1 = Some(accuracy);
        }
    }
    Ok(by_dataset
        .into_values()
        .filter_map(|(a, b)| Some((a?, b?)))
        .collect())
}

/// Convenience for tests and `LabeledDataset` consumers that want a file pair.
pub fn load_pair(
    train: impl AsRef<Path>,
    test: impl AsRef<Path>,
) -> Result<(LabeledDataset, LabeledDataset), TsvError> {
    Ok((load_tsv(train)?, load_tsv(test)?))
}
