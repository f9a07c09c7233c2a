//! Source-trained classifiers: brute-force k-nearest-neighbours and a
//! one-vs-rest linear SVM fitted with Pegasos-style subgradient steps.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::Matrix;

/// Labelled samples, one row per sample, classes `0..c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    x: Matrix,
    y: Vec<usize>,
    classes: usize,
}

impl LabeledSet {
    /// Every class in `0..=max(y)` must occur at least once.
    pub fn new(x: Matrix, y: Vec<usize>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::mismatch(format!("{} labels", x.nrows()), y.len()));
        }
        let classes = y.iter().max().map_or(0, |m| m + 1);
        if classes == 0 {
            return Err(Error::InsufficientData("labelled set is empty".into()));
        }
        let counts = class_counts(&y, classes);
        if let Some(missing) = counts.iter().position(|&n| n == 0) {
            return Err(Error::SchemaMismatch(format!(
                "labels must be contiguous from 0; class {missing} never occurs"
            )));
        }
        Ok(LabeledSet { x, y, classes })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.y, self.classes)
    }
}

fn class_counts(y: &[usize], classes: usize) -> Vec<usize> {
    let mut counts = vec![0; classes];
    for &label in y {
        counts[label] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    LinearSvm,
}

impl ClassifierKind {
    /// Short name used in traces.
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::LinearSvm => "svm",
        }
    }
}

/// Hyperparameters for both classifier kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub neighbors: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            neighbors: 1,
            lambda: 1e-4,
            epochs: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Knn {
        set: LabeledSet,
        neighbors: usize,
    },
    /// One row of `weights` and one bias per class.
    LinearSvm {
        weights: Matrix,
        biases: Vec<f64>,
    },
}

pub fn train(set: &LabeledSet, kind: ClassifierKind, params: &ClassifierParams) -> Result<ClassifierModel> {
    if set.classes() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 classes to train, found {}",
            set.classes()
        )));
    }
    match kind {
        ClassifierKind::Knn => {
            if params.neighbors == 0 || params.neighbors > set.len() {
                return Err(Error::InsufficientData(format!(
                    "neighbor count {} needs 1..={} training samples",
                    params.neighbors,
                    set.len()
                )));
            }
            Ok(ClassifierModel::Knn {
                set: set.clone(),
                neighbors: params.neighbors,
            })
        }
        ClassifierKind::LinearSvm => train_svm(set, params),
    }
}

fn train_svm(set: &LabeledSet, params: &ClassifierParams) -> Result<ClassifierModel> {
    if let Some(c) = set.class_counts().iter().position(|&n| n < 2) {
        return Err(Error::InsufficientData(format!("class {c} has fewer than 2 samples")));
    }
    if params.lambda.is_nan() || params.lambda <= 0.0 || params.epochs == 0 {
        return Err(Error::InvalidConfig(format!(
            "svm needs lambda > 0 and epochs >= 1 (lambda={}, epochs={})",
            params.lambda, params.epochs
        )));
    }
    let (n, d) = (set.len(), set.dim());
    let lambda = params.lambda;
    let radius = 1.0 / lambda.sqrt();
    let mut weights = Matrix::zeros(set.classes(), d);
    let mut biases = vec![0.0; set.classes()];

    for class in 0..set.classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(class as u64));
        // Bias rides along as a constant feature.
        let mut w = vec![0.0; d + 1];
        let mut order: Vec<usize> = (0..n).collect();
        let mut t = 0usize;
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let target = if set.y[i] == class { 1.0 } else { -1.0 };
                let row = set.x.row(i);
                let margin = target * (row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[d]);
                let shrink = 1.0 - eta * lambda;
                w.iter_mut().for_each(|wi| *wi *= shrink);
                if margin < 1.0 {
                    for (wi, xi) in w.iter_mut().zip(row.iter()) {
                        *wi += eta * target * xi;
                    }
                    w[d] += eta * target;
                }
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > radius {
                    let s = radius / norm;
                    w.iter_mut().for_each(|wi| *wi *= s);
                }
            }
        }
        for j in 0..d {
            weights[(class, j)] = w[j];
        }
        biases[class] = w[d];
    }
    Ok(ClassifierModel::LinearSvm { weights, biases })
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierModel::Knn { .. } => ClassifierKind::Knn,
            ClassifierModel::LinearSvm { .. } => ClassifierKind::LinearSvm,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ClassifierModel::Knn { set, .. } => set.dim(),
            ClassifierModel::LinearSvm { weights, .. } => weights.ncols(),
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            ClassifierModel::Knn { set, .. } => set.classes(),
            ClassifierModel::LinearSvm { weights, .. } => weights.nrows(),
        }
    }

    /// One-vs-rest scores `x W^T + b`, `M x c`. Only defined for the SVM.
    pub fn scores(&self, x: &Matrix) -> Result<Matrix> {
        self.check_dim(x)?;
        match self {
            ClassifierModel::LinearSvm { weights, biases } => {
                let mut s = x * weights.transpose();
                for mut row in s.row_iter_mut() {
                    for (v, b) in row.iter_mut().zip(biases) {
                        *v += b;
                    }
                }
                Ok(s)
            }
            ClassifierModel::Knn { .. } => Err(Error::InvalidConfig("knn has no decision scores".into())),
        }
    }

    /// Labels for every row of `x`. Ties go to the smallest class index.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        self.check_dim(x)?;
        match self {
            ClassifierModel::Knn { set, neighbors } => {
                Ok((0..x.nrows()).map(|r| knn_vote(set, *neighbors, x, r)).collect())
            }
            ClassifierModel::LinearSvm { .. } => {
                let s = self.scores(x)?;
                Ok(s.row_iter().map(|row| argmax_first(row.iter().copied())).collect())
            }
        }
    }

    fn check_dim(&self, x: &Matrix) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::mismatch(
                format!("{} columns", self.dim()),
                format!("{} columns", x.ncols()),
            ));
        }
        Ok(())
    }
}

pub fn predict(model: &ClassifierModel, x: &Matrix) -> Result<Vec<usize>> {
    model.predict(x)
}

fn knn_vote(set: &LabeledSet, neighbors: usize, x: &Matrix, r: usize) -> usize {
    let query = x.row(r);
    let mut dist: Vec<(f64, usize)> = set
        .x
        .row_iter()
        .enumerate()
        .map(|(i, row)| {
            let d2 = row
                .iter()
                .zip(query.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            (d2, set.y[i])
        })
        .collect();
    // Equal distances resolve toward the smaller class, so row order never matters.
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if neighbors < dist.len() {
        dist.select_nth_unstable_by(neighbors - 1, by_distance);
        dist.truncate(neighbors);
    }
    let mut votes = vec![0usize; set.classes];
    for &(_, class) in &dist {
        votes[class] += 1;
    }
    argmax_first(votes.into_iter().map(|v| v as f64))
}

/// Index of the first maximum.
fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(predicted.len(), truth.len(), "prediction and label counts differ");
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}
