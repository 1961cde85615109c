//! Coefficient of determination, cross-dataset grids and the combined
//! training experiment.
//!
//! In a grid, every dataset trains one model on its train split (early
//! stopping on its val split). That model is scored on its own test split
//! (in-distribution) and on the whole of every other dataset
//! (out-of-distribution).

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::{namespaced_id, DatasetId, LabeledClip, NormalizedLabel, Split, SplitAssignment};
use crate::embedding_io::FeatureMatrix;
use crate::error::{Error, Result};
use crate::regressor::{self, labels_to_array, MlpParams, TrainConfig, TrainReport};

/// `1 - SS_res / SS_tot`.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.len() < 2 {
        return Err(Error::TooFewRecords {
            needed: 2,
            got: y_true.len(),
        });
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ConstantTarget);
    }
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Per-axis R² and their mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub r2_avg: f64,
    pub r2_arousal: f64,
    pub r2_valence: f64,
    pub n_test: usize,
}

/// Scores `(valence, arousal)` predictions against `n × 2` targets.
pub fn score(pred: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<EvalResult> {
    if pred.dim() != targets.dim() {
        return Err(Error::LengthMismatch {
            left: pred.nrows(),
            right: targets.nrows(),
        });
    }
    let col = |m: ArrayView2<f64>, j| m.column(j).to_vec();
    let r2_valence = r2(&col(targets, 0), &col(pred, 0))?;
    let r2_arousal = r2(&col(targets, 1), &col(pred, 1))?;
    Ok(EvalResult {
        r2_avg: (r2_arousal + r2_valence) / 2.0,
        r2_arousal,
        r2_valence,
        n_test: targets.nrows(),
    })
}

/// Eval-mode predictions of `params` scored against `targets`.
pub fn evaluate(params: &MlpParams, x: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<EvalResult> {
    if x.nrows() == 0 {
        return Err(Error::Empty("test set is empty"));
    }
    let pred = regressor::forward_batch(params, x, None)?;
    score(pred.view(), targets)
}

/// Features and `(valence, arousal)` targets with row-aligned clip ids.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub clip_ids: Vec<String>,
    pub x: Array2<f64>,
    pub y: Array2<f64>,
}

impl LabeledSet {
    pub fn new(clip_ids: Vec<String>, x: Array2<f64>, y: Array2<f64>) -> Result<Self> {
        if x.nrows() != clip_ids.len() || y.dim() != (clip_ids.len(), 2) {
            return Err(Error::LengthMismatch {
                left: x.nrows(),
                right: y.nrows(),
            });
        }
        Ok(Self { clip_ids, x, y })
    }

    /// Rows of `features` for every clip in `clips`, with their labels.
    pub fn from_clips(features: &FeatureMatrix, clips: &[LabeledClip]) -> Result<Self> {
        let ids: Vec<&str> = clips.iter().map(|c| c.clip_id.as_str()).collect();
        let m = features.select(&ids)?;
        let labels: Vec<NormalizedLabel> = clips.iter().map(|c| c.label).collect();
        Self::new(m.clip_ids, m.values, labels_to_array(&labels))
    }

    pub fn len(&self) -> usize {
        self.clip_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clip_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Rows whose clip id falls in `split`, keeping row order.
    pub fn subset(&self, splits: &SplitAssignment, split: Split) -> LabeledSet {
        let rows: Vec<usize> = self
            .clip_ids
            .iter()
            .enumerate()
            .filter(|(_, id)| splits.get(id) == Some(split))
            .map(|(i, _)| i)
            .collect();
        LabeledSet {
            clip_ids: rows.iter().map(|&i| self.clip_ids[i].clone()).collect(),
            x: self.x.select(Axis(0), &rows),
            y: self.y.select(Axis(0), &rows),
        }
    }

    pub fn concat(parts: &[&LabeledSet]) -> Result<LabeledSet> {
        let first = parts.first().ok_or(Error::Empty("nothing to concatenate"))?;
        if let Some(p) = parts.iter().find(|p| p.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                got: p.dim(),
            });
        }
        let xs: Vec<_> = parts.iter().map(|p| p.x.view()).collect();
        let ys: Vec<_> = parts.iter().map(|p| p.y.view()).collect();
        Ok(LabeledSet {
            clip_ids: parts.iter().flat_map(|p| p.clip_ids.iter().cloned()).collect(),
            x: concatenate(Axis(0), &xs).expect("dims checked"),
            y: concatenate(Axis(0), &ys).expect("dims checked"),
        })
    }

    /// Prefixes clip ids with a dataset namespace.
    pub fn namespaced(&self, dataset: DatasetId) -> LabeledSet {
        LabeledSet {
            clip_ids: self.clip_ids.iter().map(|id| namespaced_id(dataset, id)).collect(),
            ..self.clone()
        }
    }
}

/// One dataset taking part in a grid.
#[derive(Debug, Clone)]
pub struct GridDataset {
    pub name: String,
    pub data: LabeledSet,
    pub splits: SplitAssignment,
}

/// Trains on the train split with early stopping on the val split.
pub fn fit(data: &LabeledSet, splits: &SplitAssignment, config: &TrainConfig) -> Result<(MlpParams, TrainReport)> {
    let train = data.subset(splits, Split::Train);
    let val = data.subset(splits, Split::Val);
    regressor::train(train.x.view(), train.y.view(), val.x.view(), val.y.view(), config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub train_id: String,
    pub test_id: String,
    /// Trained and tested on the same dataset.
    pub in_distribution: bool,
    #[serde(flatten)]
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOutcome {
    Ok(EvalResult),
    Failed(String),
}

impl GridCell {
    pub fn result(&self) -> Option<&EvalResult> {
        match &self.outcome {
            CellOutcome::Ok(r) => Some(r),
            CellOutcome::Failed(_) => None,
        }
    }
}

/// Every requested `(train, test)` pair, row-major by training dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub names: Vec<String>,
    pub cells: Vec<GridCell>,
}

impl GridResult {
    pub fn get(&self, train: &str, test: &str) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.train_id == train && c.test_id == test)
    }

    /// `train_id,test_id,r2_avg,r2_a,r2_v,n`; failed cells have empty values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("train_id,test_id,r2_avg,r2_a,r2_v,n\n");
        for c in &self.cells {
            match c.result() {
                Some(r) => writeln!(
                    out,
                    "{},{},{:.6},{:.6},{:.6},{}",
                    c.train_id, c.test_id, r.r2_avg, r.r2_arousal, r.r2_valence, r.n_test
                ),
                None => writeln!(out, "{},{},,,,", c.train_id, c.test_id),
            }
            .expect("writing to a String");
        }
        out
    }

    /// Rows are test sets, column groups are training sets (Avg. / A. / V.).
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<8}", "Test");
        for name in &self.names {
            let _ = write!(out, "| {:^26} ", format!("train {name}"));
        }
        out.push('\n');
        let _ = write!(out, "{:<8}", "");
        for _ in &self.names {
            let _ = write!(out, "| {:>8}{:>9}{:>9} ", "Avg.", "A.", "V.");
        }
        out.push('\n');
        for test in &self.names {
            let _ = write!(out, "{test:<8}");
            for train in &self.names {
                match self.get(train, test).and_then(GridCell::result) {
                    Some(r) => {
                        let mark = if train == test { "*" } else { " " };
                        let _ = write!(out, "|{mark}{:>8.2}{:>9.2}{:>9.2} ", r.r2_avg, r.r2_arousal, r.r2_valence);
                    }
                    None => {
                        let _ = write!(out, "| {:^26} ", "failed");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Cross-dataset evaluation grid. A training failure only marks its own row.
pub fn cross_grid(datasets: &[GridDataset], config: &TrainConfig) -> Result<GridResult> {
    if datasets.is_empty() {
        return Err(Error::Empty("grid needs at least one dataset"));
    }
    let rows: Vec<Vec<GridCell>> = datasets
        .par_iter()
        .map(|train_ds| {
            let model = fit(&train_ds.data, &train_ds.splits, config);
            datasets
                .iter()
                .map(|test_ds| {
                    let in_distribution = train_ds.name == test_ds.name;
                    let outcome = match &model {
                        Err(e) => CellOutcome::Failed(format!("training failed: {e}")),
                        Ok((params, _)) => {
                            let test = if in_distribution {
                                test_ds.data.subset(&test_ds.splits, Split::Test)
                            } else {
                                test_ds.data.clone()
                            };
                            match evaluate(params, test.x.view(), test.y.view()) {
                                Ok(r) => CellOutcome::Ok(r),
                                Err(e) => CellOutcome::Failed(e.to_string()),
                            }
                        }
                    };
                    GridCell {
                        train_id: train_ds.name.clone(),
                        test_id: test_ds.name.clone(),
                        in_distribution,
                        outcome,
                    }
                })
                .collect()
        })
        .collect();
    Ok(GridResult {
        names: datasets.iter().map(|d| d.name.clone()).collect(),
        cells: rows.into_iter().flatten().collect(),
    })
}

/// One corpus of the combined-training experiment, with both feature sets
/// row-aligned to the same clips.
#[derive(Debug, Clone)]
pub struct FinalDataset {
    pub embedding: LabeledSet,
    /// Embedding concatenated with the 72-dim chroma descriptor.
    pub fused: LabeledSet,
    pub splits: SplitAssignment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InputKind {
    Embedding,
    EmbeddingChroma,
}

impl InputKind {
    pub fn label(self) -> &'static str {
        match self {
            InputKind::Embedding => "Jukebox",
            InputKind::EmbeddingChroma => "Jukebox+Chroma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalRow {
    pub input: String,
    pub training: String,
    pub testing: String,
    #[serde(flatten)]
    pub outcome: CellOutcome,
}

/// The 4-run, 12-cell in/out-of-distribution comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalReport {
    pub rows: Vec<FinalRow>,
    pub train_reports: BTreeMap<String, TrainReport>,
}

impl FinalReport {
    pub fn get(&self, input: &str, training: &str, testing: &str) -> Option<&FinalRow> {
        self.rows
            .iter()
            .find(|r| r.input == input && r.training == training && r.testing == testing)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("input,training,testing,r2_avg,r2_a,r2_v,n\n");
        for r in &self.rows {
            let _ = match &r.outcome {
                CellOutcome::Ok(e) => writeln!(
                    out,
                    "{},{},{},{:.6},{:.6},{:.6},{}",
                    r.input, r.training, r.testing, e.r2_avg, e.r2_arousal, e.r2_valence, e.n_test
                ),
                CellOutcome::Failed(_) => writeln!(out, "{},{},{},,,,", r.input, r.training, r.testing),
            };
        }
        out
    }

    pub fn to_text_table(&self) -> String {
        let mut out = format!("{:<16}{:<10}{:<10}{:>8}{:>8}{:>8}\n", "Input", "Training", "Testing", "Avg.", "A.", "V.");
        for r in &self.rows {
            let _ = match &r.outcome {
                CellOutcome::Ok(e) => writeln!(
                    out,
                    "{:<16}{:<10}{:<10}{:>8.3}{:>8.3}{:>8.3}",
                    r.input, r.training, r.testing, e.r2_avg, e.r2_arousal, e.r2_valence
                ),
                CellOutcome::Failed(msg) => writeln!(out, "{:<16}{:<10}{:<10}  failed: {msg}", r.input, r.training, r.testing),
            };
        }
        out
    }
}

/// In-domain corpora combined for the diversified training run.
pub const COMBINED_MEMBERS: [DatasetId; 3] = [DatasetId::E, DatasetId::P, DatasetId::W1];
/// Corpora held out entirely for out-of-distribution testing.
pub const HELD_OUT: [DatasetId; 2] = [DatasetId::D, DatasetId::W2];

/// Trains {embedding, embedding+chroma} × {EmoMusic only, E∪P∪W1} and tests
/// each model on its in-domain test split(s), all of DEAM and all of WCMED.
pub fn final_experiment(inputs: &HashMap<DatasetId, FinalDataset>, config: &TrainConfig) -> Result<FinalReport> {
    let missing: Vec<&str> = COMBINED_MEMBERS
        .iter()
        .chain(&HELD_OUT)
        .filter(|id| !inputs.contains_key(id))
        .map(|id| id.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingInputs(format!("datasets {}", missing.join(", "))));
    }

    struct Run {
        input: InputKind,
        training: &'static str,
        members: &'static [DatasetId],
    }
    let runs: Vec<Run> = [InputKind::Embedding, InputKind::EmbeddingChroma]
        .into_iter()
        .flat_map(|input| {
            [
                Run {
                    input,
                    training: "EmoMusic",
                    members: &COMBINED_MEMBERS[..1],
                },
                Run {
                    input,
                    training: "Combined",
                    members: &COMBINED_MEMBERS[..],
                },
            ]
        })
        .collect();

    let results: Vec<(Vec<FinalRow>, String, Option<TrainReport>)> = runs
        .par_iter()
        .map(|run| {
            let pick = |id: &DatasetId| -> &LabeledSet {
                let d = &inputs[id];
                match run.input {
                    InputKind::Embedding => &d.embedding,
                    InputKind::EmbeddingChroma => &d.fused,
                }
            };
            let part = |split: Split| -> Result<LabeledSet> {
                let parts: Vec<LabeledSet> = run
                    .members
                    .iter()
                    .map(|id| pick(id).subset(&inputs[id].splits, split).namespaced(*id))
                    .collect();
                LabeledSet::concat(&parts.iter().collect::<Vec<_>>())
            };
            let key = format!("{} / {}", run.input.label(), run.training);
            let trained = part(Split::Train).and_then(|tr| {
                let va = part(Split::Val)?;
                regressor::train(tr.x.view(), tr.y.view(), va.x.view(), va.y.view(), config)
            });
            let tests: Vec<(&str, Result<LabeledSet>)> = vec![
                (run.training, part(Split::Test)),
                ("DEAM", Ok(pick(&DatasetId::D).clone())),
                ("WCMED", Ok(pick(&DatasetId::W2).clone())),
            ];
            let rows = tests
                .into_iter()
                .map(|(name, test)| {
                    let outcome = match (&trained, test) {
                        (Err(e), _) => CellOutcome::Failed(format!("training failed: {e}")),
                        (_, Err(e)) => CellOutcome::Failed(e.to_string()),
                        (Ok((params, _)), Ok(t)) => match evaluate(params, t.x.view(), t.y.view()) {
                            Ok(r) => CellOutcome::Ok(r),
                            Err(e) => CellOutcome::Failed(e.to_string()),
                        },
                    };
                    FinalRow {
                        input: run.input.label().to_owned(),
                        training: run.training.to_owned(),
                        testing: name.to_owned(),
                        outcome,
                    }
                })
                .collect();
            (rows, key, trained.ok().map(|(_, r)| r))
        })
        .collect();

    let mut report = FinalReport {
        rows: Vec::new(),
        train_reports: BTreeMap::new(),
    };
    for (rows, key, train_report) in results {
        report.rows.extend(rows);
        if let Some(r) = train_report {
            report.train_reports.insert(key, r);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::make_splits;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn r2_hand_cases() {
        let y = [1.0, 2.0, 3.0];
        assert!((r2(&y, &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(r2(&y, &[2.0, 2.0, 2.0]).unwrap().abs() < 1e-12);
        // SS_res = 4 + 0 + 4 = 8, SS_tot = 2
        assert!((r2(&y, &[3.0, 2.0, 1.0]).unwrap() + 3.0).abs() < 1e-12);
        assert!(matches!(r2(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ConstantTarget)));
        assert!(r2(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn score_cases() {
        let t = ndarray::array![[0.5, -0.2], [-0.5, 0.4], [0.1, 0.0]];
        let r = score(t.view(), t.view()).unwrap();
        assert_eq!((r.r2_avg, r.r2_arousal, r.r2_valence, r.n_test), (1.0, 1.0, 1.0, 3));

        let centred = ndarray::array![[0.5, -0.2], [-0.5, 0.2], [0.0, 0.0]];
        let r = score(Array2::zeros((3, 2)).view(), centred.view()).unwrap();
        assert_eq!((r.r2_avg, r.r2_arousal, r.r2_valence), (0.0, 0.0, 0.0));
    }

    fn synthetic(name: &str, n: usize, d: usize, map: &Array2<f64>, seed: u64) -> GridDataset {
        let mut rng = crate::rng::seeded(seed, 4);
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
        let y = x.dot(map).mapv(|v: f64| v.tanh());
        let ids: Vec<String> = (0..n).map(|i| format!("{name}{i}")).collect();
        let splits = make_splits(ids.iter().map(String::as_str), seed).unwrap();
        GridDataset {
            name: name.into(),
            data: LabeledSet::new(ids, x, y).unwrap(),
            splits,
        }
    }

    fn fast_config() -> TrainConfig {
        TrainConfig {
            hidden_units: [32, 16],
            learning_rate: 5e-3,
            max_epochs: 80,
            patience: 10,
            dropout_input: 0.0,
            dropout_hidden: 0.0,
            batch_size: 16,
            ..Default::default()
        }
    }

    #[test]
    fn single_dataset_grid() {
        let map = Array2::from_shape_fn((4, 2), |(i, j)| (i as f64 - j as f64) * 0.4);
        let g = cross_grid(&[synthetic("A", 60, 4, &map, 1)], &fast_config()).unwrap();
        assert_eq!(g.cells.len(), 1);
        assert!(g.cells[0].in_distribution);
        assert!(g.cells[0].result().unwrap().n_test == 6);
        let csv = g.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("train_id,test_id,r2_avg,r2_a,r2_v,n\nA,A,"));
    }

    #[test]
    fn failing_row_keeps_other_cells() {
        let map = Array2::from_shape_fn((3, 2), |(i, j)| ((i + j) as f64).sin());
        let good = synthetic("A", 50, 3, &map, 2);
        let mut bad = synthetic("B", 50, 3, &map, 3);
        // no validation clips: training cannot run
        for s in bad.splits.assignment.values_mut() {
            if *s == Split::Val {
                *s = Split::Train;
            }
        }
        let g = cross_grid(&[good, bad], &fast_config()).unwrap();
        assert_eq!(g.cells.len(), 4);
        assert!(g.get("A", "A").unwrap().result().is_some());
        assert!(g.get("A", "B").unwrap().result().is_some());
        assert!(g.get("B", "A").unwrap().result().is_none());
        assert!(g.to_text_table().contains("failed"));
    }

    #[test]
    fn final_experiment_reports_missing() {
        let err = final_experiment(&HashMap::new(), &fast_config()).unwrap_err();
        assert!(err.to_string().contains("E, P, W1, D, W2"), "{err}");
    }

    #[test]
    fn final_experiment_shape() {
        let map = Array2::from_shape_fn((3, 2), |(i, j)| 0.3 * (i as f64 + 1.0) * if j == 0 { 1.0 } else { -1.0 });
        let mut inputs = HashMap::new();
        for (k, id) in DatasetId::ALL.into_iter().enumerate() {
            let ds = synthetic(id.as_str(), 40, 3, &map, k as u64);
            let chroma = Array2::from_elem((40, 2), 0.5);
            let fused = LabeledSet::new(
                ds.data.clip_ids.clone(),
                ndarray::concatenate(Axis(1), &[ds.data.x.view(), chroma.view()]).unwrap(),
                ds.data.y.clone(),
            )
            .unwrap();
            inputs.insert(
                id,
                FinalDataset {
                    embedding: ds.data,
                    fused,
                    splits: ds.splits,
                },
            );
        }
        let report = final_experiment(&inputs, &fast_config()).unwrap();
        assert_eq!(report.rows.len(), 12);
        assert_eq!(report.train_reports.len(), 4);
        let combined = report.get("Jukebox", "Combined", "Combined").unwrap();
        let n_test: usize = COMBINED_MEMBERS.iter().map(|id| inputs[id].splits.count(Split::Test)).sum();
        assert_eq!(combined.outcome, {
            let CellOutcome::Ok(r) = &combined.outcome else { panic!("failed") };
            assert_eq!(r.n_test, n_test);
            combined.outcome.clone()
        });
        let deam = report.get("Jukebox+Chroma", "EmoMusic", "DEAM").unwrap();
        assert!(matches!(&deam.outcome, CellOutcome::Ok(r) if r.n_test == 40));
        assert_eq!(report.to_csv().lines().count(), 13);
    }

    proptest! {
        #[test]
        fn r2_permutation_invariant(ys in proptest::collection::vec(-5.0f64..5.0, 3..30), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut rng = crate::rng::seeded(seed, 0);
            let preds: Vec<f64> = ys.iter().map(|y| y + rng.random_range(-1.0..1.0)).collect();
            prop_assume!(ys.iter().any(|y| (y - ys[0]).abs() > 1e-6));
            let mut idx: Vec<usize> = (0..ys.len()).collect();
            idx.shuffle(&mut rng);
            let a = r2(&ys, &preds).unwrap();
            let b = r2(&idx.iter().map(|&i| ys[i]).collect::<Vec<_>>(), &idx.iter().map(|&i| preds[i]).collect::<Vec<_>>()).unwrap();
            prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn r2_constant_shift(ys in proptest::collection::vec(-5.0f64..5.0, 2..30), c in 0.01f64..3.0) {
            let mean = ys.iter().sum::<f64>() / ys.len() as f64;
            let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
            prop_assume!(ss_tot > 1e-6);
            let shifted: Vec<f64> = ys.iter().map(|y| y + c).collect();
            let expect = 1.0 - ys.len() as f64 * c * c / ss_tot;
            let got = r2(&ys, &shifted).unwrap();
            prop_assert!((got - expect).abs() < 1e-9 * expect.abs().max(1.0));
        }
    }
}
