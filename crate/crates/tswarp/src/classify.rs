//! 1-nearest-neighbor classification over pluggable dissimilarities, with
//! accuracy evaluation, low-sample-regime sweeps, accuracy correlation, and a
//! timing harness.
//!
//! Test items are independent; evaluation runs them in parallel unless the
//! caller forces sequential mode (the timing harness does, for honest
//! wall-clock ratios). Reports come out identical either way.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use tswarp_core::dtw::{dtw_cost, dtw_weighted_cost, DtwError};
use tswarp_core::signal::{Signal, SignalError};
use tswarp_core::synth::{generate_dataset, SynthError, SyntheticSpec};
use tswarp_core::transport::transport_divergence;
use tswarp_core::{DatasetMeta, Label, LabeledDataset, LabeledItem};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Dtw(#[from] DtwError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("class {label} has {available} training items, {requested} requested")]
    NotEnoughSamples {
        label: Label,
        available: usize,
        requested: usize,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum CorrelationError {
    #[error("need at least 2 paired accuracies, got {got}")]
    TooFewPoints { got: usize },
    #[error("correlation undefined: an accuracy column has zero variance")]
    ZeroVariance,
}

/// The dissimilarities the 1-NN classifier can run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dissimilarity {
    /// L² distance on raw aligned samples (shorter resampled to longer).
    Euclidean,
    /// Classic unweighted DTW on raw lengths.
    Dtw,
    /// Step-weighted DTW (equal lengths required).
    DtwWeighted,
    /// Transport divergence, oriented test-to-train.
    TransportDivergence,
}

impl Dissimilarity {
    pub fn token(&self) -> &'static str {
        match self {
            Dissimilarity::Euclidean => "euclidean",
            Dissimilarity::Dtw => "dtw",
            Dissimilarity::DtwWeighted => "dtw_weighted",
            Dissimilarity::TransportDivergence => "dt",
        }
    }
}

impl fmt::Display for Dissimilarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Dissimilarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(Dissimilarity::Euclidean),
            "dtw" => Ok(Dissimilarity::Dtw),
            "dtw_weighted" => Ok(Dissimilarity::DtwWeighted),
            "dt" => Ok(Dissimilarity::TransportDivergence),
            other => Err(format!(
                "unknown metric {other:?} (expected euclidean, dtw, dtw_weighted, or dt)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThreadMode {
    #[default]
    Auto,
    Single,
}

impl FromStr for ThreadMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(ThreadMode::Auto),
            "1" => Ok(ThreadMode::Single),
            other => Err(format!("unknown thread mode {other:?} (expected auto or 1)")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Dataset name recorded in the report.
    pub dataset: String,
    pub threads: ThreadMode,
    /// Subsample seed, when the evaluation came from one.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub index: usize,
    pub true_label: Label,
    pub predicted: Label,
    /// Distance to the nearest training item.
    pub distance: f64,
    /// True when the transport divergence was undefined for this item and
    /// the prediction fell back to the Euclidean distance.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub metric: Dissimilarity,
    pub accuracy: f64,
    pub predictions: Vec<Prediction>,
    pub seconds: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: Option<u64>,
}

impl EvalReport {
    pub fn fallback_count(&self) -> usize {
        self.predictions.iter().filter(|p| p.fallback).count()
    }
}

/// Euclidean distance on aligned samples; the shorter signal is resampled to
/// the longer grid.
fn euclidean(a: &Signal, b: &Signal) -> Result<f64, ClassifyError> {
    let (ra, rb);
    let (a, b) = if a.len() == b.len() {
        (a, b)
    } else {
        let m = a.len().max(b.len());
        ra = a.resample(m)?;
        rb = b.resample(m)?;
        (&ra, &rb)
    };
    Ok(a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Distance of one (test, train) pair. `Ok(None)` marks a pair on which the
/// transport divergence is undefined (a constant signal).
fn pair_distance(
    metric: Dissimilarity,
    test: &Signal,
    train: &Signal,
) -> Result<Option<f64>, ClassifyError> {
    match metric {
        Dissimilarity::Euclidean => euclidean(test, train).map(Some),
        Dissimilarity::Dtw => Ok(Some(dtw_cost(test, train))),
        Dissimilarity::DtwWeighted => Ok(Some(dtw_weighted_cost(test, train)?)),
        Dissimilarity::TransportDivergence => match transport_divergence(test, train) {
            Ok(d) => Ok(Some(d)),
            Err(SignalError::ZeroVariation) => Ok(None),
            Err(e) => Err(e.into()),
        },
    }
}

/// Distances from one test signal to every training item, `None` where the
/// dissimilarity is undefined for the pair.
pub fn distances_to_train(
    train: &LabeledDataset,
    test_signal: &Signal,
    metric: Dissimilarity,
) -> Result<Vec<Option<f64>>, ClassifyError> {
    train
        .items()
        .iter()
        .map(|item| pair_distance(metric, test_signal, &item.signal))
        .collect()
}

/// Index of the smallest defined distance; ties go to the lowest index.
fn argmin(distances: &[Option<f64>]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in distances.iter().enumerate() {
        if let Some(d) = d {
            if best.is_none_or(|(_, b)| *d < b) {
                best = Some((i, *d));
            }
        }
    }
    best
}

fn classify_item(
    train: &LabeledDataset,
    test_signal: &Signal,
    metric: Dissimilarity,
) -> Result<(usize, f64, bool), ClassifyError> {
    let distances = distances_to_train(train, test_signal, metric)?;
    if let Some((i, d)) = argmin(&distances) {
        return Ok((i, d, false));
    }
    // the divergence was undefined against every training item (e.g. a
    // constant test signal): fall back to Euclidean and flag the item
    let distances = distances_to_train(train, test_signal, Dissimilarity::Euclidean)?;
    let (i, d) = argmin(&distances).expect("euclidean distance is always defined");
    Ok((i, d, true))
}

/// Label of the training item nearest to `test_signal` under `metric`.
pub fn nn_classify(
    train: &LabeledDataset,
    test_signal: &Signal,
    metric: Dissimilarity,
) -> Result<Label, ClassifyError> {
    let (i, _, _) = classify_item(train, test_signal, metric)?;
    Ok(train.items()[i].label.clone())
}

/// Classifies every test item against the training set and reports exact
/// accuracy and wall time. Deterministic given its inputs.
pub fn evaluate(
    train: &LabeledDataset,
    test: &LabeledDataset,
    metric: Dissimilarity,
    options: &EvalOptions,
) -> Result<EvalReport, ClassifyError> {
    let start = Instant::now();
    let run = |(index, item): (usize, &LabeledItem)| -> Result<Prediction, ClassifyError> {
        let (nearest, distance, fallback) = classify_item(train, &item.signal, metric)?;
        Ok(Prediction {
            index,
            true_label: item.label.clone(),
            predicted: train.items()[nearest].label.clone(),
            distance,
            fallback,
        })
    };
    let predictions: Vec<Prediction> = match options.threads {
        ThreadMode::Auto => test
            .items()
            .par_iter()
            .enumerate()
            .map(run)
            .collect::<Result<_, _>>()?,
        ThreadMode::Single => test
            .items()
            .iter()
            .enumerate()
            .map(run)
            .collect::<Result<_, _>>()?,
    };
    let correct = predictions
        .iter()
        .filter(|p| p.predicted == p.true_label)
        .count();
    Ok(EvalReport {
        dataset: options.dataset.clone(),
        metric,
        accuracy: correct as f64 / test.len() as f64,
        predictions,
        seconds: start.elapsed().as_secs_f64(),
        train_size: train.len(),
        test_size: test.len(),
        seed: options.seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub per_class: usize,
    pub metric: Dissimilarity,
    pub repeats: usize,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    /// One report per (repeat, per-class count, metric).
    pub evals: Vec<EvalReport>,
    /// Mean accuracy per (per-class count, metric).
    pub rows: Vec<SweepRow>,
}

/// Repeatedly subsamples `per_class` training items per class (uniformly,
/// without replacement, seeded) and evaluates every metric on the identical
/// subsample; reports mean accuracy per (count, metric).
pub fn low_sample_sweep(
    train: &LabeledDataset,
    test: &LabeledDataset,
    per_class: &[usize],
    repeats: usize,
    metrics: &[Dissimilarity],
    seed: u64,
    options: &EvalOptions,
) -> Result<SweepReport, ClassifyError> {
    // class -> training indices, classes in first-occurrence order
    let labels = train.class_labels();
    let groups: Vec<Vec<usize>> = labels
        .iter()
        .map(|label| {
            train
                .items()
                .iter()
                .enumerate()
                .filter(|(_, item)| item.label == *label)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    for &count in per_class {
        for (label, group) in labels.iter().zip(&groups) {
            if count > group.len() {
                return Err(ClassifyError::NotEnoughSamples {
                    label: label.clone(),
                    available: group.len(),
                    requested: count,
                });
            }
        }
    }

    let mut evals = Vec::new();
    for repeat in 0..repeats {
        for (ci, &count) in per_class.iter().enumerate() {
            // one stream per (repeat, count): the draw is identical for every
            // metric and independent of evaluation order
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((repeat * per_class.len() + ci) as u64);
            let mut items = Vec::with_capacity(count * groups.len());
            for group in &groups {
                for pick in rand::seq::index::sample(&mut rng, group.len(), count) {
                    items.push(train.items()[group[pick]].clone());
                }
            }
            let subset = LabeledDataset::new(items, DatasetMeta::Inline)
                .expect("per-class counts are at least 1");
            for &metric in metrics {
                let sub_options = EvalOptions {
                    dataset: options.dataset.clone(),
                    threads: options.threads,
                    seed: Some(seed),
                };
                evals.push(evaluate(&subset, test, metric, &sub_options)?);
            }
        }
    }

    let mut rows = Vec::new();
    for (ci, &count) in per_class.iter().enumerate() {
        for (mi, &metric) in metrics.iter().enumerate() {
            let total: f64 = (0..repeats)
                .map(|r| evals[(r * per_class.len() + ci) * metrics.len() + mi].accuracy)
                .sum();
            rows.push(SweepRow {
                per_class: count,
                metric,
                repeats,
                mean_accuracy: total / repeats as f64,
            });
        }
    }
    Ok(SweepReport { evals, rows })
}

/// Pearson correlation over paired accuracies. Two distinct points are the
/// smallest input that has one (it is then exactly ±1).
pub fn accuracy_correlation(pairs: &[(f64, f64)]) -> Result<f64, CorrelationError> {
    if pairs.len() < 2 {
        return Err(CorrelationError::TooFewPoints { got: pairs.len() });
    }
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in pairs {
        cov += (x - mean_x) * (y - mean_y);
        var_x += (x - mean_x) * (x - mean_x);
        var_y += (y - mean_y) * (y - mean_y);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(CorrelationError::ZeroVariance);
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingCell {
    pub length: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub metric: Dissimilarity,
    /// Median wall time of the repetitions, sequential mode.
    pub seconds: f64,
}

/// Wall-clock cost of full 1-NN evaluations on synthetic two-class data, per
/// signal length, training size, and metric. Measurements run sequentially
/// and report the median of `repeats` repetitions.
pub fn timing_benchmark(
    lengths: &[usize],
    train_per_class: &[usize],
    test_per_class: usize,
    metrics: &[Dissimilarity],
    seed: u64,
    repeats: usize,
) -> Result<Vec<TimingCell>, ClassifyError> {
    let mut cells = Vec::new();
    for &length in lengths {
        for &per_class in train_per_class {
            let train = generate_dataset(&SyntheticSpec {
                num_classes: 2,
                atoms_per_class: 1,
                samples_per_atom: per_class,
                grid_size: length,
                warp_knots: SyntheticSpec::DEFAULT_WARP_KNOTS,
                warp_roughness: 0.5,
                seed,
            })?;
            let test = generate_dataset(&SyntheticSpec {
                num_classes: 2,
                atoms_per_class: 1,
                samples_per_atom: test_per_class,
                grid_size: length,
                warp_knots: SyntheticSpec::DEFAULT_WARP_KNOTS,
                warp_roughness: 0.5,
                seed: seed.wrapping_add(1),
            })?;
            let options = EvalOptions {
                dataset: format!("timing-{length}"),
                threads: ThreadMode::Single,
                seed: Some(seed),
            };
            for &metric in metrics {
                let mut times: Vec<f64> = (0..repeats.max(1))
                    .map(|_| evaluate(&train, &test, metric, &options).map(|r| r.seconds))
                    .collect::<Result<_, _>>()?;
                times.sort_by(|a, b| a.partial_cmp(b).expect("durations are finite"));
                cells.push(TimingCell {
                    length,
                    train_per_class: per_class,
                    test_per_class,
                    metric,
                    seconds: times[times.len() / 2],
                });
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tswarp_core::synth::{apply_warp, random_warp, template_catalog};

    fn synthetic(classes: usize, atoms: usize, samples: usize, seed: u64) -> LabeledDataset {
        generate_dataset(&SyntheticSpec {
            num_classes: classes,
            atoms_per_class: atoms,
            samples_per_atom: samples,
            grid_size: 150,
            warp_knots: SyntheticSpec::DEFAULT_WARP_KNOTS,
            warp_roughness: 0.5,
            seed,
        })
        .unwrap()
    }

    fn all_metrics() -> [Dissimilarity; 4] {
        [
            Dissimilarity::Euclidean,
            Dissimilarity::Dtw,
            Dissimilarity::DtwWeighted,
            Dissimilarity::TransportDivergence,
        ]
    }

    #[test]
    fn a_training_item_classifies_as_itself() {
        let train = synthetic(3, 1, 2, 5);
        for metric in all_metrics() {
            for item in train.items() {
                let label = nn_classify(&train, &item.signal, metric).unwrap();
                assert_eq!(label, item.label, "metric {metric}");
            }
        }
    }

    #[test]
    fn self_evaluation_is_perfect() {
        let train = synthetic(2, 2, 3, 9);
        for metric in all_metrics() {
            let report = evaluate(&train, &train, metric, &EvalOptions::default()).unwrap();
            assert_eq!(report.accuracy, 1.0, "metric {metric}");
            assert_eq!(report.fallback_count(), 0);
        }
    }

    #[test]
    fn single_template_classes_classify_perfectly() {
        // one template per class, one training sample each: warped test items
        // all land on their class for both elastic metrics
        let train = synthetic(2, 1, 1, 100);
        let test = synthetic(2, 1, 25, 200);
        for metric in [Dissimilarity::TransportDivergence, Dissimilarity::Dtw] {
            let report = evaluate(&train, &test, metric, &EvalOptions::default()).unwrap();
            assert_eq!(report.accuracy, 1.0, "metric {metric}");
        }
    }

    #[test]
    fn parallel_and_sequential_reports_agree() {
        let train = synthetic(2, 2, 2, 31);
        let test = synthetic(2, 2, 4, 32);
        for metric in all_metrics() {
            let auto = evaluate(
                &train,
                &test,
                metric,
                &EvalOptions {
                    threads: ThreadMode::Auto,
                    ..EvalOptions::default()
                },
            )
            .unwrap();
            let single = evaluate(
                &train,
                &test,
                metric,
                &EvalOptions {
                    threads: ThreadMode::Single,
                    ..EvalOptions::default()
                },
            )
            .unwrap();
            assert_eq!(auto.predictions, single.predictions);
            assert_eq!(auto.accuracy, single.accuracy);
        }
    }

    #[test]
    fn argmin_is_invariant_under_squaring() {
        let train = synthetic(2, 2, 3, 71);
        let test = synthetic(2, 2, 5, 72);
        for metric in all_metrics() {
            for item in test.items() {
                let raw = distances_to_train(&train, &item.signal, metric).unwrap();
                let squared: Vec<Option<f64>> =
                    raw.iter().map(|d| d.map(|d| d * d)).collect();
                assert_eq!(argmin(&raw).map(|(i, _)| i), argmin(&squared).map(|(i, _)| i));
            }
        }
    }

    #[test]
    fn constant_test_signal_falls_back_to_euclidean() {
        let train = synthetic(2, 1, 2, 55);
        let flat = Signal::new(vec![0.25; train.signal_len()]).unwrap();
        let mut items = train.items().to_vec();
        items.push(LabeledItem {
            signal: flat,
            label: Label::from("9"),
            atom: None,
        });
        let test = LabeledDataset::new(items, DatasetMeta::Inline).unwrap();
        let report = evaluate(
            &train,
            &test,
            Dissimilarity::TransportDivergence,
            &EvalOptions::default(),
        )
        .unwrap();
        assert_eq!(report.fallback_count(), 1);
        let flagged = report.predictions.last().unwrap();
        assert!(flagged.fallback);
        assert!(flagged.distance.is_finite());
    }

    #[test]
    fn constant_training_items_are_skipped_by_the_divergence() {
        let mut items = synthetic(2, 1, 2, 56).items().to_vec();
        let len = items[0].signal.len();
        items.insert(
            0,
            LabeledItem {
                signal: Signal::new(vec![1.0; len]).unwrap(),
                label: Label::from("flat"),
                atom: None,
            },
        );
        let train = LabeledDataset::new(items, DatasetMeta::Inline).unwrap();
        let test = synthetic(2, 1, 3, 57);
        let report = evaluate(
            &train,
            &test,
            Dissimilarity::TransportDivergence,
            &EvalOptions::default(),
        )
        .unwrap();
        // the flat training item can never win the argmin
        for p in &report.predictions {
            assert_ne!(p.predicted, Label::from("flat"));
            assert!(!p.fallback);
        }
    }

    #[test]
    fn sweep_with_full_classes_equals_plain_evaluation() {
        let train = synthetic(2, 1, 4, 21);
        let test = synthetic(2, 1, 6, 22);
        let metrics = [Dissimilarity::Euclidean, Dissimilarity::Dtw];
        let sweep = low_sample_sweep(
            &train,
            &test,
            &[4],
            1,
            &metrics,
            77,
            &EvalOptions::default(),
        )
        .unwrap();
        for (row, &metric) in sweep.rows.iter().zip(&metrics) {
            let direct = evaluate(&train, &test, metric, &EvalOptions::default()).unwrap();
            assert_eq!(row.mean_accuracy, direct.accuracy);
        }
    }

    #[test]
    fn sweep_is_deterministic_and_validates_counts() {
        let train = synthetic(2, 1, 5, 23);
        let test = synthetic(2, 1, 4, 24);
        let metrics = [Dissimilarity::Euclidean];
        let a = low_sample_sweep(&train, &test, &[1, 2], 3, &metrics, 7, &EvalOptions::default())
            .unwrap();
        let b = low_sample_sweep(&train, &test, &[1, 2], 3, &metrics, 7, &EvalOptions::default())
            .unwrap();
        assert_eq!(a.rows, b.rows);
        for (x, y) in a.evals.iter().zip(&b.evals) {
            assert_eq!(x.predictions, y.predictions);
        }

        assert!(matches!(
            low_sample_sweep(&train, &test, &[6], 1, &metrics, 7, &EvalOptions::default()),
            Err(ClassifyError::NotEnoughSamples { available: 5, requested: 6, .. })
        ));
    }

    #[test]
    fn elastic_metrics_stay_perfect_in_the_low_sample_regime() {
        let train = synthetic(2, 1, 8, 301);
        let test = synthetic(2, 1, 10, 302);
        let metrics = [Dissimilarity::Dtw, Dissimilarity::TransportDivergence];
        let sweep = low_sample_sweep(
            &train,
            &test,
            &[1, 2, 4],
            3,
            &metrics,
            5,
            &EvalOptions::default(),
        )
        .unwrap();
        for row in &sweep.rows {
            assert_eq!(row.mean_accuracy, 1.0, "{row:?}");
        }
    }

    #[test]
    fn correlation_identities() {
        let same = [(0.8, 0.8), (0.6, 0.6), (0.9, 0.9)];
        assert!((accuracy_correlation(&same).unwrap() - 1.0).abs() <= 1e-12);

        // anti-correlated two-point case
        let anti = [(0.0, 1.0), (1.0, 0.0)];
        assert!((accuracy_correlation(&anti).unwrap() + 1.0).abs() <= 1e-12);

        assert_eq!(
            accuracy_correlation(&[(0.1, 0.2)]),
            Err(CorrelationError::TooFewPoints { got: 1 })
        );
        assert_eq!(
            accuracy_correlation(&[(0.5, 0.2), (0.5, 0.4), (0.5, 0.6)]),
            Err(CorrelationError::ZeroVariance)
        );
    }

    #[test]
    fn warped_items_match_their_template_any_metric_smoke() {
        // nn_classify sees through a warp: the nearest item of a warped
        // template is a sample of the same template
        let templates = template_catalog(2, 150).unwrap();
        let train = synthetic(2, 1, 1, 400);
        let mut rng = ChaCha8Rng::seed_from_u64(401);
        for (class, template) in templates.iter().enumerate() {
            let warp = random_warp(10, 0.6, &mut rng).unwrap();
            let probe = apply_warp(template, &warp);
            let label = nn_classify(&train, &probe, Dissimilarity::TransportDivergence).unwrap();
            assert_eq!(label, Label::from(class));
        }
    }

    #[test]
    fn timing_benchmark_produces_ordered_cells() {
        let cells = timing_benchmark(
            &[32, 64],
            &[2],
            3,
            &[Dissimilarity::Euclidean, Dissimilarity::Dtw],
            5,
            1,
        )
        .unwrap();
        assert_eq!(cells.len(), 4);
        for cell in &cells {
            assert!(cell.seconds >= 0.0);
        }
    }
}
