//! Labelled source sets and temporally ordered target streams.
//!
//! Streams come either from a CSV file already in temporal order or from one
//! of two seeded generators: the classic three-class waveform signals and a
//! Gaussian mixture that rotates steadily in a fixed plane.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::classify::LabeledSet;
use crate::error::{Error, Result};
use crate::manifold::Matrix;
use crate::pipeline::MiniBatch;

/// Shape and seed of a generated stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamSpec {
    /// `N_T`, rows per mini-batch.
    pub batch_size: usize,
    /// `B`, number of mini-batches.
    pub batch_count: usize,
    /// Rows in the labelled source set.
    pub source_size: usize,
    pub seed: u64,
}

impl StreamSpec {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 || self.batch_count == 0 {
            return Err(Error::InvalidConfig(format!(
                "stream needs batch size >= 2 and at least one batch (got N_T={}, B={})",
                self.batch_size, self.batch_count
            )));
        }
        if self.source_size < 2 {
            return Err(Error::InvalidConfig("source set needs at least 2 rows".into()));
        }
        Ok(())
    }
}

/// A labelled source set and the target stream that follows it.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub source: LabeledSet,
    pub stream: Vec<MiniBatch>,
}

impl DatasetBundle {
    pub fn dim(&self) -> usize {
        self.source.dim()
    }
}

/// How to read a CSV file of `d` features followed by an integer label.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    /// Feature count; inferred from the first data row when `None`.
    pub dim: Option<usize>,
    pub source_fraction: f64,
    pub batch_size: usize,
    pub has_header: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            dim: None,
            source_fraction: 0.2,
            batch_size: 50,
            has_header: false,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<DatasetBundle> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(BufReader::new(file), schema).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// [`load_csv`] over any reader.
pub fn read_csv<R: BufRead>(reader: R, schema: &CsvSchema) -> Result<DatasetBundle> {
    if !(schema.source_fraction > 0.0 && schema.source_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "source fraction must lie in (0, 1), got {}",
            schema.source_fraction
        )));
    }
    if schema.batch_size < 2 {
        return Err(Error::InvalidConfig(format!(
            "batch size must be at least 2, got {}",
            schema.batch_size
        )));
    }

    let mut dim = schema.dim;
    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let row = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: Default::default(),
            source,
        })?;
        if (idx == 0 && schema.has_header) || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let d = *dim.get_or_insert(cells.len().saturating_sub(1));
        if d == 0 || cells.len() != d + 1 {
            return Err(Error::SchemaMismatch(format!(
                "row {row} has {} columns, expected {} features plus a label",
                cells.len(),
                d
            )));
        }
        for (col, cell) in cells[..d].iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: col + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: col + 1,
                    message: format!("'{cell}' is not finite"),
                });
            }
            values.push(v);
        }
        let label: usize = cells[d].parse().map_err(|_| Error::Parse {
            row,
            column: d + 1,
            message: format!("label '{}' is not a non-negative integer", cells[d]),
        })?;
        labels.push(label);
    }

    let d = dim.unwrap_or(0);
    let n = labels.len();
    if n == 0 {
        return Err(Error::InsufficientData("CSV contains no data rows".into()));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; classes];
    for &l in &labels {
        counts[l] += 1;
    }
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::SchemaMismatch(format!(
            "labels must be contiguous from 0; class {missing} never occurs"
        )));
    }

    let x = Matrix::from_row_slice(n, d, &values);
    let n_source = ((schema.source_fraction * n as f64) - 1e-9).ceil() as usize;
    let n_source = n_source.clamp(1, n);
    let mut source_counts = vec![0usize; classes];
    for &l in &labels[..n_source] {
        source_counts[l] += 1;
    }
    if let Some(c) = source_counts.iter().position(|&c| c < 2) {
        return Err(Error::InsufficientData(format!(
            "source split ({n_source} rows) has fewer than 2 rows of class {c}"
        )));
    }
    let source = LabeledSet::new(x.rows(0, n_source).into_owned(), labels[..n_source].to_vec())?;

    let batches = (n - n_source) / schema.batch_size;
    let stream = (0..batches)
        .map(|b| {
            let start = n_source + b * schema.batch_size;
            MiniBatch::new(
                x.rows(start, schema.batch_size).into_owned(),
                Some(labels[start..start + schema.batch_size].to_vec()),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetBundle { source, stream })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformVariant {
    /// 21 signal features.
    W21,
    /// 21 signal features plus 19 pure-noise features.
    W40,
}

impl WaveformVariant {
    pub fn dim(self) -> usize {
        match self {
            WaveformVariant::W21 => 21,
            WaveformVariant::W40 => 40,
        }
    }
}

/// Triangular base wave of height 6 centred at (1-based) position `centre`.
fn base_wave(centre: f64) -> [f64; 21] {
    let mut h = [0.0; 21];
    for (i, v) in h.iter_mut().enumerate() {
        *v = (6.0 - ((i + 1) as f64 - centre).abs()).max(0.0);
    }
    h
}

fn waveform_rows(rng: &mut ChaCha8Rng, n: usize, variant: WaveformVariant) -> (Matrix, Vec<usize>) {
    let waves = [base_wave(11.0), base_wave(15.0), base_wave(7.0)];
    // class -> pair of base waves
    const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
    let d = variant.dim();
    let mut x = Matrix::zeros(n, d);
    let mut y = Vec::with_capacity(n);
    for r in 0..n {
        let class = rng.random_range(0..3);
        let u: f64 = rng.random();
        let (a, b) = PAIRS[class];
        for j in 0..d {
            let noise: f64 = rng.sample(StandardNormal);
            let signal = if j < 21 {
                u * waves[a][j] + (1.0 - u) * waves[b][j]
            } else {
                0.0
            };
            x[(r, j)] = signal + noise;
        }
        y.push(class);
    }
    (x, y)
}

/// Three-class waveform signals: each row is a random convex combination of
/// two of three triangular base waves plus unit Gaussian noise.
pub fn gen_waveform(spec: &StreamSpec, variant: WaveformVariant) -> Result<DatasetBundle> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (x, y) = waveform_rows(&mut rng, spec.source_size, variant);
    let source = LabeledSet::new(x, y)?;
    let stream = (0..spec.batch_count)
        .map(|_| {
            let (x, y) = waveform_rows(&mut rng, spec.batch_size, variant);
            MiniBatch::new(x, Some(y))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetBundle { source, stream })
}

/// Class-separated Gaussian mixture whose target batches rotate in the
/// `(axis 0, axis d-1)` plane by `(n / B) * total_rotation`.
///
/// Class means sit on a circle of radius `separation / 2` in the plane of the
/// first two axes. Axis `j` has standard deviation `spread[j]` when given,
/// else 0.75 on axis 0, 1.2 on axes 1 and 2, 0.45 on the last axis and 0.8
/// elsewhere. Rotating axis 0 into the last axis then moves the class signal
/// out of the source's principal subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatingDrift {
    pub classes: usize,
    pub dim: usize,
    pub total_rotation: f64,
    pub separation: f64,
    pub spread: Option<Vec<f64>>,
    /// Axes spanning the rotation plane; `None` means `(0, d - 1)`.
    pub plane: Option<(usize, usize)>,
}

impl RotatingDrift {
    pub fn new(classes: usize, dim: usize, total_rotation: f64) -> Self {
        RotatingDrift {
            classes,
            dim,
            total_rotation,
            separation: 3.0,
            spread: None,
            plane: None,
        }
    }

    fn stds(&self) -> Vec<f64> {
        match &self.spread {
            Some(s) => s.clone(),
            None => (0..self.dim)
                .map(|j| match j {
                    0 => 0.75,
                    1 | 2 => 1.2,
                    j if j == self.dim - 1 => 0.45,
                    _ => 0.8,
                })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 4 {
            return Err(Error::InvalidConfig(format!(
                "rotating drift needs d >= 4, got {}",
                self.dim
            )));
        }
        if self.classes < 2 {
            return Err(Error::InvalidConfig("rotating drift needs at least 2 classes".into()));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.total_rotation) {
            return Err(Error::InvalidConfig(format!(
                "total rotation must lie in [0, pi/2], got {}",
                self.total_rotation
            )));
        }
        if self.spread.as_ref().is_some_and(|s| s.len() != self.dim) {
            return Err(Error::InvalidConfig("spread must have one entry per dimension".into()));
        }
        Ok(())
    }

    fn rows(&self, rng: &mut ChaCha8Rng, n: usize, angle: f64, stds: &[f64]) -> (Matrix, Vec<usize>) {
        let d = self.dim;
        let radius = self.separation / 2.0;
        let (s, c) = angle.sin_cos();
        let mut x = Matrix::zeros(n, d);
        let mut y = Vec::with_capacity(n);
        for r in 0..n {
            let class = rng.random_range(0..self.classes);
            let phase = 2.0 * PI * class as f64 / self.classes as f64;
            for j in 0..d {
                let noise: f64 = rng.sample(StandardNormal);
                x[(r, j)] = stds[j] * noise;
            }
            x[(r, 0)] += radius * phase.cos();
            x[(r, 1)] += radius * phase.sin();
            let (p, q) = self.plane.unwrap_or((0, d - 1));
            let (a, b) = (x[(r, p)], x[(r, q)]);
            x[(r, p)] = c * a - s * b;
            x[(r, q)] = s * a + c * b;
            y.push(class);
        }
        (x, y)
    }
}

/// Rotating-drift stream with the default shape for `classes` and `d`.
pub fn gen_rotating_drift(spec: &StreamSpec, classes: usize, d: usize, total_rotation: f64) -> Result<DatasetBundle> {
    gen_rotating_drift_with(spec, &RotatingDrift::new(classes, d, total_rotation))
}

pub fn gen_rotating_drift_with(spec: &StreamSpec, drift: &RotatingDrift) -> Result<DatasetBundle> {
    spec.validate()?;
    drift.validate()?;
    let stds = drift.stds();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (x, y) = drift.rows(&mut rng, spec.source_size, 0.0, &stds);
    let source = LabeledSet::new(x, y)?;
    let stream = (1..=spec.batch_count)
        .map(|n| {
            let angle = n as f64 / spec.batch_count as f64 * drift.total_rotation;
            let (x, y) = drift.rows(&mut rng, spec.batch_size, angle, &stds);
            MiniBatch::new(x, Some(y))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetBundle { source, stream })
}
